//! Minimax design of the shared transition profile.
//!
//! The error `E_n(ω, b) = H_n(ω, b) - H_d(ω, b)` is affine in the profile
//! `V`, so `|E| ≤ δ` is replaced by `P` half-planes
//! `Re{e^{jθ_p} E} ≤ δ`, `θ_p = 2πp/P`, which turns the problem into a
//! linear program. The constraint universe (every phase, band centre and
//! grid point) is far too large to hand to the LP at once; a cutting-plane
//! exchange starts from a strided subset and keeps adding the most violated
//! half-planes until none is violated.

use std::collections::{BTreeMap, HashSet};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ptvir::{
    base_response_idft, calibrate_for, desired_response, error_on_grid, ptvir_from_base,
    worst_case_error, FrequencyGrid, ShiftRule,
};
use crate::scalar::Real;
use crate::simplex::MinimaxLp;
use crate::spectrum::{
    affine_decomposition, validate_and_discretize, BinSpec, DftCoefficients, FilterSpec,
    TransitionProfile,
};

/// Filter order estimate `-4π·log10(10·δp·δs) / (3Δ)`, rounded up to the
/// next even integer (at least 2).
pub fn estimate_order(passband_ripple: f64, stopband_ripple: f64, transition_width: f64) -> usize {
    let raw = estimate_order_raw(passband_ripple, stopband_ripple, transition_width);
    let halves = (raw / 2.0 - 1e-9).ceil().max(1.0);
    2 * halves as usize
}

pub fn estimate_order_raw(passband_ripple: f64, stopband_ripple: f64, transition_width: f64) -> f64 {
    -4.0 * std::f64::consts::PI * (10.0 * passband_ripple * stopband_ripple).log10()
        / (3.0 * transition_width)
}

/// Raw FFT length estimate `0.9·L·log2(L)`.
pub fn estimate_fft_length_raw(filter_len: usize) -> f64 {
    let l = filter_len as f64;
    0.9 * l * l.log2()
}

/// FFT length: the estimate rounded to the nearest power of two (in the
/// log domain). Fails when that is shorter than the filter or than 8.
pub fn estimate_fft_length(filter_len: usize) -> Result<usize> {
    if filter_len < 2 {
        return Err(Error::InvalidSpec("filter length must be at least 2".into()));
    }
    let raw = estimate_fft_length_raw(filter_len);
    let n = 1usize << raw.log2().round().max(0.0) as u32;
    if n < filter_len || n < 8 {
        return Err(Error::FftTooShort { n, l: filter_len });
    }
    Ok(n)
}

/// One `(phase, band centre, grid point)` constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub n: usize,
    pub b: usize,
    /// Index into the grid points.
    pub point: usize,
}

/// A minimax design problem at fixed `(L, N)`.
#[derive(Debug, Clone)]
pub struct DesignProblem<T> {
    pub bins: BinSpec,
    pub grid: FrequencyGrid<T>,
    /// Number of half-planes approximating each modulus constraint.
    pub facets: usize,
    /// Relative violation accepted when the exchange stops.
    pub exchange_tol: T,
    pub max_rounds: usize,
    /// Phases constrained (all `0..M` by default).
    pub phases: Vec<usize>,
    pub rule: ShiftRule,
    /// Seed every `seed_stride`-th masked grid point per `(n, b)`.
    pub seed_stride: usize,
    /// The seed stride is widened until the seed has at most this many rows.
    pub max_seed_rows: usize,
    pub max_add_per_round: usize,
}

impl<T: Real> DesignProblem<T> {
    pub fn new(bins: BinSpec, grid_points: usize, facets: usize) -> Result<Self> {
        if facets < 8 || !facets.is_multiple_of(2) {
            return Err(Error::InvalidSpec(format!(
                "facet count must be even and at least 8, got {facets}"
            )));
        }
        let grid = FrequencyGrid::new(&bins, grid_points)?;
        let rule = calibrate_for::<T>(bins.fft_len, bins.filter_len)?;
        Ok(DesignProblem {
            bins,
            grid,
            facets,
            exchange_tol: T::lit(1e-9),
            max_rounds: 200,
            phases: (0..bins.block_len).collect(),
            rule,
            seed_stride: 16,
            max_seed_rows: 1_200_000,
            max_add_per_round: 4000,
        })
    }

    pub fn with_phases(mut self, phases: Vec<usize>) -> Self {
        self.phases = phases;
        self
    }

    pub fn universe_size(&self) -> usize {
        self.grid.constraint_count(self.phases.len())
    }

    fn facet_angles(&self) -> Vec<Complex<T>> {
        let p = self.facets as i64;
        (0..p)
            .map(|i| {
                let (c, s) = crate::scalar::unit_phasor::<T>(2 * i, p);
                Complex::new(c, s)
            })
            .collect()
    }
}

/// Affine error model `E = c + Σ_r a_r·V(r)` for a list of triples.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem<T> {
    pub triples: Vec<Triple>,
    pub offsets: Vec<Complex<T>>,
    pub coeffs: Vec<Vec<Complex<T>>>,
}

impl<T: Real> ConstraintSystem<T> {
    pub fn error(&self, i: usize, profile: &[T]) -> Complex<T> {
        let mut e = self.offsets[i];
        for (a, &v) in self.coeffs[i].iter().zip(profile) {
            e += a.scale(v);
        }
        e
    }
}

/// Time-domain bases of one band centre, evaluated at arbitrary
/// frequencies through per-frequency prefix sums.
struct BandModel<T> {
    b: usize,
    /// Masked grid indices.
    indices: Vec<usize>,
    fixed: Vec<T>,
    basis: Vec<Vec<T>>,
}

/// Per-frequency helper: `e^{-jωs}` for `s = 0..=N`.
struct Phasors<T> {
    e: Vec<Complex<T>>,
}

impl<T: Real> Phasors<T> {
    fn new(omega: T, n: usize) -> Self {
        let e = (0..=n)
            .map(|s| {
                let a = omega * T::from_usize_exact(s);
                Complex::new(a.cos(), -a.sin())
            })
            .collect();
        Phasors { e }
    }

    /// `e^{jωk}` for `-N ≤ k ≤ N`.
    #[inline]
    fn pos(&self, k: i64) -> Complex<T> {
        if k >= 0 {
            self.e[k as usize].conj()
        } else {
            self.e[(-k) as usize]
        }
    }

    /// Prefix sums `P[s] = Σ_{t<s} h(t)·e^{-jωt}`, `s = 0..=N`.
    fn prefix(&self, h: &[T], out: &mut Vec<Complex<T>>) {
        out.clear();
        let mut acc = Complex::new(T::zero(), T::zero());
        out.push(acc);
        for (&x, e) in h.iter().zip(&self.e) {
            acc += e.scale(x);
            out.push(acc);
        }
    }
}

/// `H_n(ω)` from prefix sums: with `d_n(q) = h((q + σ_n) mod N)`,
/// `H_n = e^{jω(σ_n - n)}·(P[N] + (e^{-jωN} - 1)·P[σ_n])`.
struct PhaseMap<T> {
    sigma: Vec<usize>,
    lead: Vec<Complex<T>>,
    wrap: Complex<T>,
}

impl<T: Real> PhaseMap<T> {
    fn new(rule: &ShiftRule, phases: &[usize], ph: &Phasors<T>) -> Self {
        let n = rule.fft_len;
        let sigma: Vec<usize> = phases.iter().map(|&p| rule.shift(p)).collect();
        let lead = phases
            .iter()
            .zip(&sigma)
            .map(|(&p, &s)| ph.pos(s as i64 - p as i64))
            .collect();
        PhaseMap {
            sigma,
            lead,
            wrap: ph.e[n] - T::one(),
        }
    }

    #[inline]
    fn response(&self, i: usize, prefix: &[Complex<T>]) -> Complex<T> {
        let total = prefix[prefix.len() - 1];
        self.lead[i] * (total + self.wrap * prefix[self.sigma[i]])
    }
}

impl<T: Real> BandModel<T> {
    fn new(problem: &DesignProblem<T>, b: usize) -> Result<Self> {
        let bins = &problem.bins;
        let aff = affine_decomposition::<T>(bins, b, bins.filter_len)?;
        let idft = |t: Vec<Complex<T>>| {
            base_response_idft(&DftCoefficients {
                table: t,
                source_b: Some(b),
            })
        };
        let fixed = idft(aff.fixed)?;
        let basis = aff.basis.into_iter().map(idft).collect::<Result<Vec<_>>>()?;
        let mask = problem.grid.mask(b).expect("grid built from the same bins");
        Ok(BandModel {
            b,
            indices: mask.indices.clone(),
            fixed,
            basis,
        })
    }

    fn combined(&self, profile: &[T]) -> Vec<T> {
        let mut h = self.fixed.clone();
        for (g, &v) in self.basis.iter().zip(profile) {
            for (x, &gv) in h.iter_mut().zip(g) {
                *x += gv * v;
            }
        }
        h
    }
}

fn desired<T: Real>(problem: &DesignProblem<T>, omega: T, b: usize) -> Complex<T> {
    desired_response(omega, &problem.bins, b).expect("masked grid excludes the transition band")
}

/// Builds the affine model for `triples`, spot-checking it against the
/// direct PTVIR evaluation.
pub fn build_constraints<T: Real>(
    problem: &DesignProblem<T>,
    triples: &[Triple],
) -> Result<ConstraintSystem<T>> {
    let models: BTreeMap<usize, BandModel<T>> = problem
        .bins
        .band_centres()
        .map(|b| BandModel::new(problem, b).map(|m| (b, m)))
        .collect::<Result<_>>()?;
    let system = affine_rows(problem, &models, triples);
    spot_check(problem, &system)?;
    Ok(system)
}

/// Triple index, constant term and profile coefficients of one row.
type Row<T> = (usize, Complex<T>, Vec<Complex<T>>);

fn affine_rows<T: Real>(
    problem: &DesignProblem<T>,
    models: &BTreeMap<usize, BandModel<T>>,
    triples: &[Triple],
) -> ConstraintSystem<T> {
    let n_fft = problem.bins.fft_len;
    // group by (b, point) to share the prefix sums across phases
    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, t) in triples.iter().enumerate() {
        groups.entry((t.b, t.point)).or_default().push(i);
    }
    let groups: Vec<((usize, usize), Vec<usize>)> = groups.into_iter().collect();
    let rows: Vec<Vec<Row<T>>> = groups
        .par_iter()
        .map(|((b, point), members)| {
            let model = &models[b];
            let omega = problem.grid.points[*point];
            let ph = Phasors::new(omega, n_fft);
            let phases: Vec<usize> = members.iter().map(|&i| triples[i].n).collect();
            let map = PhaseMap::new(&problem.rule, &phases, &ph);
            let d = desired(problem, omega, *b);
            let mut pf = Vec::with_capacity(n_fft + 1);
            ph.prefix(&model.fixed, &mut pf);
            let pbasis: Vec<Vec<Complex<T>>> = model
                .basis
                .iter()
                .map(|h| {
                    let mut p = Vec::with_capacity(n_fft + 1);
                    ph.prefix(h, &mut p);
                    p
                })
                .collect();
            members
                .iter()
                .enumerate()
                .map(|(k, &i)| {
                    let c = map.response(k, &pf) - d;
                    let a = pbasis.iter().map(|p| map.response(k, p)).collect();
                    (i, c, a)
                })
                .collect()
        })
        .collect();
    let zero = Complex::new(T::zero(), T::zero());
    let mut offsets = vec![zero; triples.len()];
    let mut coeffs = vec![Vec::new(); triples.len()];
    for (i, c, a) in rows.into_iter().flatten() {
        offsets[i] = c;
        coeffs[i] = a;
    }
    ConstraintSystem {
        triples: triples.to_vec(),
        offsets,
        coeffs,
    }
}

/// Compares the affine model with `error_on_grid` for ten fixed profiles on
/// a subsample of the triples.
fn spot_check<T: Real>(problem: &DesignProblem<T>, system: &ConstraintSystem<T>) -> Result<()> {
    let lv = problem.bins.profile_len();
    let step = (system.triples.len() / 64).max(1);
    let sample: Vec<usize> = (0..system.triples.len()).step_by(step).collect();
    let mut worst = T::zero();
    for trial in 0..10u64 {
        let values: Vec<T> = (0..lv)
            .map(|r| T::lit(((trial as f64 + 1.0) * 0.618 + r as f64 * 0.377).sin()))
            .collect();
        let profile = TransitionProfile::new(values)?;
        let mut sets = BTreeMap::new();
        for &i in &sample {
            let t = system.triples[i];
            if let std::collections::btree_map::Entry::Vacant(e) = sets.entry(t.b) {
                let h = crate::spectrum::dft_coefficients(&problem.bins, &profile, t.b)?;
                e.insert(ptvir_from_base(&base_response_idft(&h)?, &problem.rule));
            }
            let set = &sets[&t.b];
            let omega = problem.grid.points[t.point];
            let direct = crate::ptvir::response_hn(set, t.n, omega)? - desired(problem, omega, t.b);
            let affine = system.error(i, profile.values());
            worst = worst.max((direct - affine).norm());
        }
    }
    if worst > T::lit(1e-10) {
        return Err(Error::AffineMismatch(worst.to_f64_lossy()));
    }
    Ok(())
}

/// Result of one minimax solve at fixed `(L, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxSolution<T> {
    pub profile: TransitionProfile<T>,
    /// LP optimum (polygonal modulus).
    pub delta_lp: T,
    /// True worst-case `|E|` over the whole constraint universe.
    pub delta: T,
    pub rounds: usize,
    pub lp_rows: usize,
    pub lp_iterations: usize,
    /// LP rows with slack ≤ 1e-7 at the solution.
    pub active_rows: usize,
}

struct Scan<T> {
    max_modulus: T,
    /// (violation, triple, facet), local maxima along frequency only.
    candidates: Vec<(T, Triple, usize)>,
}

fn scan_band<T: Real>(
    problem: &DesignProblem<T>,
    model: &BandModel<T>,
    profile: &[T],
    threshold: Option<T>,
    angles: &[Complex<T>],
) -> Scan<T> {
    let n_fft = problem.bins.fft_len;
    let h = model.combined(profile);
    let phases = &problem.phases;
    let p = problem.facets;
    let step = T::lit(p as f64) / (T::lit(2.0) * T::PI());
    let mut prefix = Vec::with_capacity(n_fft + 1);
    let mut max_modulus = T::zero();
    // facet violation per (phase, position)
    let mut viol: Vec<Vec<(T, usize)>> = vec![Vec::with_capacity(model.indices.len()); phases.len()];
    for &point in &model.indices {
        let omega = problem.grid.points[point];
        let ph = Phasors::new(omega, n_fft);
        let map = PhaseMap::new(&problem.rule, phases, &ph);
        ph.prefix(&h, &mut prefix);
        let d = desired(problem, omega, model.b);
        for (k, row) in viol.iter_mut().enumerate() {
            let e = map.response(k, &prefix) - d;
            max_modulus = max_modulus.max(e.norm());
            if threshold.is_some() {
                // nearest facet to -arg(E)
                let idx = (-e.arg() * step).round().to_i64().unwrap_or(0).rem_euclid(p as i64) as usize;
                row.push(((angles[idx] * e).re, idx));
            }
        }
    }
    let mut candidates = Vec::new();
    if let Some(th) = threshold {
        for (k, row) in viol.iter().enumerate() {
            for (i, &(v, facet)) in row.iter().enumerate() {
                if v <= th {
                    continue;
                }
                let left = i.checked_sub(1).map(|j| row[j].0);
                let right = row.get(i + 1).map(|x| x.0);
                if left.is_none_or(|l| v >= l) && right.is_none_or(|r| v >= r) {
                    candidates.push((
                        v,
                        Triple {
                            n: phases[k],
                            b: model.b,
                            point: model.indices[i],
                        },
                        facet,
                    ));
                }
            }
        }
    }
    Scan {
        max_modulus,
        candidates,
    }
}

fn push_rows<T: Real>(
    lp: &mut MinimaxLp<T>,
    system: &ConstraintSystem<T>,
    facets: &[(usize, usize)],
    angles: &[Complex<T>],
) {
    for &(i, p) in facets {
        let rot = angles[p];
        let g: Vec<T> = system.coeffs[i].iter().map(|a| (rot * a).re).collect();
        let h = -(rot * system.offsets[i]).re;
        lp.push_row(&g, h);
    }
}

fn seed_triples<T: Real>(problem: &DesignProblem<T>, stride: usize) -> Vec<Triple> {
    let mut out = Vec::new();
    for mask in &problem.grid.masks {
        let idx = &mask.indices;
        let mut picks: Vec<usize> = (0..idx.len()).step_by(stride).collect();
        // always include both band edges and the last point
        let pass_last = idx.iter().rposition(|&i| problem.grid.points[i] <= mask.pass_edge);
        picks.extend(pass_last);
        picks.extend(pass_last.map(|p| p + 1).filter(|&p| p < idx.len()));
        picks.push(idx.len() - 1);
        picks.sort_unstable();
        picks.dedup();
        for &n in &problem.phases {
            out.extend(picks.iter().map(|&k| Triple {
                n,
                b: mask.b,
                point: idx[k],
            }));
        }
    }
    out
}

/// Solves the minimax problem by cutting-plane exchange.
pub fn solve_minimax<T: Real>(problem: &DesignProblem<T>) -> Result<MinimaxSolution<T>> {
    let lv = problem.bins.profile_len();
    let angles = problem.facet_angles();
    let models: Vec<BandModel<T>> = problem
        .bins
        .band_centres()
        .map(|b| BandModel::new(problem, b))
        .collect::<Result<_>>()?;
    let model_map: BTreeMap<usize, BandModel<T>> = problem
        .bins
        .band_centres()
        .map(|b| BandModel::new(problem, b).map(|m| (b, m)))
        .collect::<Result<_>>()?;

    let mut stride = problem.seed_stride.max(1);
    let mut seed = seed_triples(problem, stride);
    while seed.len() * problem.facets > problem.max_seed_rows && stride < 1 << 20 {
        stride *= 2;
        seed = seed_triples(problem, stride);
    }
    if seed.is_empty() {
        return Err(Error::Lp("empty"));
    }
    let system = build_constraints(problem, &seed)?;
    let mut lp = MinimaxLp::new(lv);
    let mut active: HashSet<(Triple, usize)> = HashSet::new();
    let all: Vec<(usize, usize)> = (0..seed.len())
        .flat_map(|i| (0..problem.facets).map(move |p| (i, p)))
        .collect();
    for &(i, p) in &all {
        active.insert((seed[i], p));
    }
    push_rows(&mut lp, &system, &all, &angles);

    let mut rounds = 0;
    let mut iterations = 0;
    let sol = loop {
        rounds += 1;
        let sol = lp.solve()?;
        iterations += sol.iterations;
        let threshold = sol.delta + problem.exchange_tol * sol.delta.max(T::lit(1e-12));
        let scans: Vec<Scan<T>> = models
            .par_iter()
            .map(|m| scan_band(problem, m, &sol.v, Some(threshold), &angles))
            .collect();
        let mut candidates: Vec<(T, Triple, usize)> =
            scans.into_iter().flat_map(|s| s.candidates).collect();
        if candidates.is_empty() {
            break sol;
        }
        if rounds >= problem.max_rounds {
            return Err(Error::ExchangeDiverged(rounds));
        }
        candidates.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .expect("finite violations")
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let mut new_triples = Vec::new();
        let mut new_facets = Vec::new();
        for (_, t, p) in candidates {
            if new_facets.len() >= problem.max_add_per_round {
                break;
            }
            for facet in [p, (p + 1) % problem.facets, (p + problem.facets - 1) % problem.facets] {
                if active.insert((t, facet)) {
                    if new_triples.last() != Some(&t) {
                        new_triples.push(t);
                    }
                    new_facets.push((new_triples.len() - 1, facet));
                }
            }
        }
        if new_facets.is_empty() {
            // every violated half-plane is already in the LP: numerical floor
            break sol;
        }
        let added = affine_rows(problem, &model_map, &new_triples);
        push_rows(&mut lp, &added, &new_facets, &angles);
    };

    let delta = models
        .par_iter()
        .map(|m| scan_band(problem, m, &sol.v, None, &angles).max_modulus)
        .collect::<Vec<_>>()
        .into_iter()
        .fold(T::zero(), T::max);
    let active_rows = lp.active_count(&sol.v, sol.delta, T::lit(1e-7));
    Ok(MinimaxSolution {
        profile: TransitionProfile::new(sol.v)?,
        delta_lp: sol.delta,
        delta,
        rounds,
        lp_rows: lp.len(),
        lp_iterations: iterations,
        active_rows,
    })
}

/// Reference solve: every triple of the universe with all `P` facets in a
/// single LP, no exchange. Only practical for small instances.
pub fn solve_dense<T: Real>(problem: &DesignProblem<T>) -> Result<MinimaxSolution<T>> {
    let mut triples = Vec::new();
    for mask in &problem.grid.masks {
        for &n in &problem.phases {
            triples.extend(mask.indices.iter().map(|&point| Triple {
                n,
                b: mask.b,
                point,
            }));
        }
    }
    let system = build_constraints(problem, &triples)?;
    let angles = problem.facet_angles();
    let mut lp = MinimaxLp::new(problem.bins.profile_len());
    let rows: Vec<(usize, usize)> = (0..triples.len())
        .flat_map(|i| (0..problem.facets).map(move |p| (i, p)))
        .collect();
    push_rows(&mut lp, &system, &rows, &angles);
    let sol = lp.solve()?;
    let delta = (0..triples.len())
        .map(|i| system.error(i, &sol.v).norm())
        .fold(T::zero(), T::max);
    let active_rows = lp.active_count(&sol.v, sol.delta, T::lit(1e-7));
    Ok(MinimaxSolution {
        profile: TransitionProfile::new(sol.v)?,
        delta_lp: sol.delta,
        delta,
        rounds: 1,
        lp_rows: lp.len(),
        lp_iterations: sol.iterations,
        active_rows,
    })
}

/// Dense-grid recheck of a design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub delta: f64,
    pub per_b_max: BTreeMap<usize, f64>,
    pub per_n_max: Vec<f64>,
    pub passband_max: f64,
    pub stopband_max: f64,
    pub grid_k: usize,
    pub max_error: f64,
    pub pass: bool,
}

/// Outcome of one attempted `(order, L, N)` in the design loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub order: usize,
    pub filter_len: usize,
    pub fft_len: usize,
    /// `None` when the specification was off the grid at this `N`.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult<T> {
    pub profile: TransitionProfile<T>,
    pub delta_achieved: T,
    pub delta_lp: T,
    pub bins: BinSpec,
    pub iterations: usize,
    pub grid_k: usize,
    pub facets: usize,
    pub max_error: T,
    pub attempts: Vec<Attempt>,
    pub verification: Option<VerificationReport>,
}

impl<T: Real> DesignResult<T> {
    pub fn meets_spec(&self) -> bool {
        self.delta_achieved <= self.max_error
    }
}

/// Knobs of the design loop.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignOptions {
    pub grid_k: usize,
    pub facets: usize,
    /// Fix `N` instead of estimating it from `L`.
    pub fft_len: Option<usize>,
    /// Fix `L` (single attempt, no order loop).
    pub filter_len: Option<usize>,
    /// Try one order lower when `δ < reduce_margin·δ_E` at the initial order.
    pub reduce_margin: f64,
    /// Give up once the order exceeds this multiple of the initial estimate.
    pub max_order_factor: usize,
    /// Dense verification grid size as a multiple of `grid_k` (0 = skip).
    pub verify_factor: usize,
    pub seed_stride: usize,
    pub max_seed_rows: usize,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            grid_k: 1000,
            facets: 16,
            fft_len: None,
            filter_len: None,
            reduce_margin: 0.5,
            max_order_factor: 8,
            verify_factor: 4,
            seed_stride: 16,
            max_seed_rows: 1_200_000,
        }
    }
}

/// Solves at fixed `bins` and packages the result.
pub fn design_fixed<T: Real>(
    bins: BinSpec,
    max_error: T,
    opts: &DesignOptions,
) -> Result<DesignResult<T>> {
    let mut problem = DesignProblem::<T>::new(bins, opts.grid_k, opts.facets)?;
    problem.seed_stride = opts.seed_stride;
    problem.max_seed_rows = opts.max_seed_rows;
    let sol = solve_minimax(&problem)?;
    let mut result = DesignResult {
        profile: sol.profile,
        delta_achieved: sol.delta,
        delta_lp: sol.delta_lp,
        bins,
        iterations: sol.rounds,
        grid_k: opts.grid_k,
        facets: opts.facets,
        max_error,
        attempts: vec![Attempt {
            order: bins.filter_len - 1,
            filter_len: bins.filter_len,
            fft_len: bins.fft_len,
            delta: Some(sol.delta.to_f64_lossy()),
        }],
        verification: None,
    };
    if opts.verify_factor > 0 {
        result.verification = Some(verify(&result, opts.verify_factor * opts.grid_k)?);
    }
    Ok(result)
}

/// Full design loop: order estimate, FFT length estimate, discretization,
/// minimax solve, and order adjustment until `δ ≤ δ_E`.
pub fn design<T: Real>(spec: &FilterSpec<T>, opts: &DesignOptions) -> Result<DesignResult<T>> {
    spec.check()?;
    if let Some(l) = opts.filter_len {
        let n = match opts.fft_len {
            Some(n) => n,
            None => estimate_fft_length(l)?,
        };
        let bins = validate_and_discretize(spec, n, l)?;
        return design_fixed(bins, spec.max_error, opts);
    }
    let initial = estimate_order(
        spec.passband_ripple.to_f64_lossy(),
        spec.stopband_ripple.to_f64_lossy(),
        spec.transition_width.to_f64_lossy(),
    );
    let cap = initial * opts.max_order_factor;
    let mut attempts = Vec::new();
    let mut last_error: Option<Error> = None;
    let mut best = f64::INFINITY;

    let mut try_order = |order: usize, attempts: &mut Vec<Attempt>| -> Result<Option<DesignResult<T>>> {
        let l = order + 1;
        let n = match opts.fft_len {
            Some(n) => n,
            None => estimate_fft_length(l)?,
        };
        let bins = match validate_and_discretize(spec, n, l) {
            Ok(b) => b,
            Err(e @ (Error::OffGrid { .. } | Error::OddTransitionWidth(_) | Error::BinRange(_))) => {
                attempts.push(Attempt {
                    order,
                    filter_len: l,
                    fft_len: n,
                    delta: None,
                });
                last_error = Some(e);
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        let mut quick = opts.clone();
        quick.verify_factor = 0;
        let r = design_fixed(bins, spec.max_error, &quick)?;
        attempts.push(r.attempts[0]);
        Ok(Some(r))
    };

    let mut order = initial;
    let accepted = loop {
        if order > cap {
            if let (Some(e), true) = (last_error.take(), best.is_infinite()) {
                return Err(e);
            }
            return Err(Error::NotConverged {
                best,
                order: order - 2,
            });
        }
        if let Some(r) = try_order(order, &mut attempts)? {
            let d = r.delta_achieved.to_f64_lossy();
            best = best.min(d);
            if r.meets_spec() {
                let margin = T::lit(opts.reduce_margin) * spec.max_error;
                if order == initial && r.delta_achieved < margin && order > 2 {
                    if let Some(lower) = try_order(order - 2, &mut attempts)? {
                        if lower.meets_spec() {
                            break lower;
                        }
                    }
                }
                break r;
            }
        }
        order += 2;
    };
    let mut result = accepted;
    result.attempts = attempts;
    if opts.verify_factor > 0 {
        result.verification = Some(verify(&result, opts.verify_factor * opts.grid_k)?);
    }
    Ok(result)
}

/// Recomputes the worst-case error on a dense grid through the PTVIR route
/// (IDFT, index permutation, direct summation).
pub fn verify<T: Real>(result: &DesignResult<T>, dense_k: usize) -> Result<VerificationReport> {
    let bins = &result.bins;
    let grid = FrequencyGrid::<T>::new(bins, dense_k)?;
    let rule = calibrate_for::<T>(bins.fft_len, bins.filter_len)?;
    let wc = worst_case_error(bins, &result.profile, &grid, &rule)?;
    let delta = wc.max.to_f64_lossy();
    Ok(VerificationReport {
        delta,
        per_b_max: wc.per_b_max.iter().map(|(b, v)| (*b, v.to_f64_lossy())).collect(),
        per_n_max: wc.per_n_max.iter().map(|v| v.to_f64_lossy()).collect(),
        passband_max: wc.pass_max.to_f64_lossy(),
        stopband_max: wc.stop_max.to_f64_lossy(),
        grid_k: dense_k,
        max_error: result.max_error.to_f64_lossy(),
        pass: delta <= result.max_error.to_f64_lossy(),
    })
}

/// Worst-case error of an arbitrary profile on the grid of `problem`
/// through the PTVIR route.
pub fn profile_error<T: Real>(problem: &DesignProblem<T>, profile: &TransitionProfile<T>) -> Result<T> {
    let mut worst = T::zero();
    for b in problem.bins.band_centres() {
        let h = crate::spectrum::dft_coefficients(&problem.bins, profile, b)?;
        let set = ptvir_from_base(&base_response_idft(&h)?, &problem.rule);
        let sweep = error_on_grid(&set, &problem.grid, &problem.bins, b)?;
        for &n in &problem.phases {
            worst = worst.max(sweep.per_phase_max[n]);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn order_estimates() {
        assert!((estimate_order_raw(1e-3, 1e-3, 0.25 * PI) - 26.6667).abs() < 1e-3);
        assert_eq!(estimate_order(1e-3, 1e-3, 0.25 * PI), 28);
        assert!((estimate_order_raw(0.01, 0.01, 0.5 * PI) - 8.0).abs() < 1e-12);
        assert_eq!(estimate_order(0.01, 0.01, 0.5 * PI), 8);
        let d = 0.7;
        assert!((estimate_order_raw(0.1, 0.1, d) - 4.0 * PI / (3.0 * d)).abs() < 1e-12);
    }

    #[test]
    fn fft_length_estimates() {
        assert!((estimate_fft_length_raw(29) - 126.8).abs() < 0.05);
        assert_eq!(estimate_fft_length(29).unwrap(), 128);
        assert!((estimate_fft_length_raw(33) - 149.8).abs() < 0.05);
        assert_eq!(estimate_fft_length(33).unwrap(), 128);
        assert!(matches!(estimate_fft_length(2), Err(Error::FftTooShort { .. })));
    }

    fn small_problem(phases: Vec<usize>, b_low: usize, b_high: usize, k: usize) -> DesignProblem<f64> {
        let bins = BinSpec::new(32, 9, 4, b_low, b_high).unwrap();
        DesignProblem::new(bins, k, 8).unwrap().with_phases(phases)
    }

    #[test]
    fn affine_model_probes() {
        let p = small_problem((0..24).collect(), 6, 8, 64);
        let triples: Vec<Triple> = p.grid.masks[1]
            .indices
            .iter()
            .step_by(5)
            .flat_map(|&point| [0, 7, 23].map(|n| Triple { n, b: 7, point }))
            .collect();
        let sys = build_constraints(&p, &triples).unwrap();
        let zero = [0.0; 3];
        for i in 0..triples.len() {
            assert_eq!(sys.error(i, &zero), sys.offsets[i]);
            let e1 = sys.error(i, &[0.0, 1.0, 0.0]);
            assert!((e1 - (sys.offsets[i] + sys.coeffs[i][1])).norm() < 1e-15);
        }
    }

    #[test]
    fn exchange_matches_dense_on_small_instance() {
        let p = small_problem(vec![5], 8, 8, 64);
        let dense = solve_dense(&p).unwrap();
        let mut ex = p.clone();
        ex.seed_stride = 8;
        ex.max_add_per_round = 4;
        let sol = solve_minimax(&ex).unwrap();
        assert!((sol.delta_lp - dense.delta_lp).abs() < 1e-8);
        assert!(sol.rounds > 1);
    }

    #[test]
    fn solution_bounds_and_certificate() {
        let p = small_problem((0..24).collect(), 6, 9, 64);
        let sol = solve_minimax(&p).unwrap();
        let sec = 1.0 / (PI / 8.0).cos();
        assert!(sol.delta <= sol.delta_lp * sec + 1e-12);
        assert!(sol.delta >= sol.delta_lp - 1e-12);
        assert!(sol.active_rows > p.bins.profile_len());
        let direct = profile_error(&p, &sol.profile).unwrap();
        assert!((direct - sol.delta).abs() < 1e-10);
    }

    #[test]
    fn deterministic_profiles() {
        let p = small_problem((0..24).collect(), 6, 8, 64);
        let a = solve_minimax(&p).unwrap();
        let b = solve_minimax(&p).unwrap();
        assert_eq!(a.profile, b.profile);
    }

    #[test]
    fn wider_band_range_cannot_help() {
        let narrow = solve_minimax(&small_problem((0..24).collect(), 7, 8, 64)).unwrap();
        let wide = solve_minimax(&small_problem((0..24).collect(), 6, 9, 64)).unwrap();
        assert!(wide.delta_lp >= narrow.delta_lp - 1e-12);
    }

    #[test]
    fn facet_count_validated() {
        let bins = BinSpec::new(32, 9, 4, 8, 8).unwrap();
        assert!(DesignProblem::<f64>::new(bins, 64, 6).is_err());
        assert!(DesignProblem::<f64>::new(bins, 64, 9).is_err());
    }
}
