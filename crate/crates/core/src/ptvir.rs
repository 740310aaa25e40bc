//! Periodically time-varying impulse response (PTVIR) of the overlap-save
//! system, and error evaluation on frequency grids.
//!
//! Output sample `n` of every block (`n = 0..M`) sees a time-invariant
//! response `z^{-n}·D_n(z)`, where the taps `d_n(q)`, `q = 0..N`, are a
//! circular shift of the IDFT of the coefficient table. The shift is
//! measured from a reference block processor rather than assumed.

use std::collections::BTreeMap;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block::{run_stream, BlockProcessor};
use crate::error::{Error, Result};
use crate::oracle::{naive_idft, NaiveBlockFilter};
use crate::scalar::{unit_phasor, Real};
use crate::spectrum::{
    bin_to_radians, transition_bins, BinSpec, DftCoefficients, TransitionProfile,
};

/// The `M` responses `d_n(q)` of one coefficient table.
#[derive(Debug, Clone, PartialEq)]
pub struct PtvirSet<T> {
    /// `M` rows of `N` taps.
    pub responses: Vec<Vec<T>>,
    pub block_len: usize,
    pub fft_len: usize,
    pub source_b: Option<usize>,
}

impl<T: Real> PtvirSet<T> {
    pub fn row(&self, n: usize) -> Result<&[T]> {
        self.responses
            .get(n)
            .map(Vec::as_slice)
            .ok_or(Error::PhaseOutOfRange {
                index: n,
                period: self.block_len,
            })
    }

    /// Largest absolute entrywise difference to another set of equal shape.
    pub fn max_abs_diff(&self, other: &PtvirSet<T>) -> T {
        self.responses
            .iter()
            .zip(&other.responses)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (*x - *y).abs()))
            .fold(T::zero(), T::max)
    }

    /// CSV export: one row per phase, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.responses {
            let line: Vec<String> = row
                .iter()
                .map(|v| crate::artifact::fmt_f64(v.to_f64_lossy()))
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// `d_{M-1}(q)`: inverse DFT of the coefficient table, checked to be real.
pub fn base_response_idft<T: Real>(h: &DftCoefficients<T>) -> Result<Vec<T>> {
    let y = naive_idft(&h.table);
    let residue = y.iter().map(|c| c.im.abs()).fold(T::zero(), T::max);
    if residue > T::residue_tol() {
        return Err(Error::Asymmetric(residue.to_f64_lossy()));
    }
    Ok(y.into_iter().map(|c| c.re).collect())
}

/// `d_{M-1}(q)` from the real cosine series of a frequency-sampled lowpass;
/// no complex arithmetic involved.
pub fn base_response_cosine<T: Real>(
    bins: &BinSpec,
    profile: &TransitionProfile<T>,
    b: usize,
    filter_len: usize,
) -> Result<Vec<T>> {
    profile.check_len(bins)?;
    let (k1, k2) = transition_bins(bins, b)?;
    let n = bins.fft_len as i64;
    let two = T::lit(2.0);
    let scale = T::one() / T::from_usize_exact(bins.fft_len);
    Ok((0..n)
        .map(|q| {
            // cos(2πk/N·(q - (L-1)/2)) = cos(π·k·(2q - L + 1)/N)
            let arg = 2 * q - filter_len as i64 + 1;
            let cos = |k: usize| unit_phasor::<T>(k as i64 * arg, n).0;
            let mut acc = T::one();
            for k in 1..k1 {
                acc += two * cos(k);
            }
            for k in k1..=k2 {
                acc += two * profile.values()[k - k1] * cos(k);
            }
            acc * scale
        })
        .collect())
}

/// Circular index rule `d_n(q) = base((q + direction·n + offset) mod N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShiftRule {
    pub direction: i8,
    pub offset: usize,
    pub block_len: usize,
    pub fft_len: usize,
}

impl ShiftRule {
    /// Index into the base response for tap `q` of phase `n` (taken mod `M`).
    #[inline]
    pub fn source_index(&self, n: usize, q: usize) -> usize {
        let n = (n % self.block_len) as i64;
        let len = self.fft_len as i64;
        (q as i64 + self.direction as i64 * n + self.offset as i64).rem_euclid(len) as usize
    }

    /// Net shift `σ_n` with `d_n(q) = base((q + σ_n) mod N)`.
    #[inline]
    pub fn shift(&self, n: usize) -> usize {
        self.source_index(n, 0)
    }
}

/// Impulse-probes a block processor to obtain its PTVIR.
///
/// An impulse is placed at every input phase `p + M`, `p = 0..M` (the extra
/// block keeps anticipatory taps inside the observed window), and `N + 2M`
/// output samples are recorded. Linearity is checked by superposition and
/// scaling before the responses are trusted.
pub fn measure_ptvir<T: Real, P: BlockProcessor<T> + ?Sized>(oracle: &mut P) -> Result<PtvirSet<T>> {
    let n = oracle.fft_len();
    let m = oracle.block_len();
    let record = n + 2 * m;
    let probe = |oracle: &mut P, impulses: &[(usize, T)]| -> Result<Vec<T>> {
        let mut x = vec![T::zero(); record];
        for &(t, a) in impulses {
            x[t] += a;
        }
        oracle.reset();
        run_stream(oracle, &x)
    };

    let mut responses = vec![vec![T::zero(); n]; m];
    let mut outputs = Vec::with_capacity(m);
    for p in 0..m {
        let origin = p + m;
        let y = probe(oracle, &[(origin, T::one())])?;
        for (t, &v) in y.iter().enumerate() {
            let phase = t % m;
            // causal delay t - origin + M - 1 = q + phase
            let q = t as i64 - origin as i64 + m as i64 - 1 - phase as i64;
            if (0..n as i64).contains(&q) {
                responses[phase][q as usize] = v;
            }
        }
        outputs.push(y);
    }

    let tol = T::residue_tol();
    let (pa, pb) = (m, m + m / 2);
    let joint = probe(oracle, &[(pa, T::one()), (pb, T::one())])?;
    let scaled = probe(oracle, &[(pa, T::lit(-2.5))])?;
    let mut residue = T::zero();
    for t in 0..record {
        let sum = outputs[pa - m][t] + outputs[pb - m][t];
        residue = residue.max((joint[t] - sum).abs());
        residue = residue.max((scaled[t] + T::lit(2.5) * outputs[pa - m][t]).abs());
    }
    oracle.reset();
    if residue > tol {
        return Err(Error::Nonlinear(residue.to_f64_lossy()));
    }
    Ok(PtvirSet {
        responses,
        block_len: m,
        fft_len: n,
        source_b: None,
    })
}

/// Finds the circular shift rule that maps `base` onto the responses
/// measured from `oracle`.
pub fn calibrate_shift_convention<T: Real, P: BlockProcessor<T> + ?Sized>(
    oracle: &mut P,
    base: &[T],
) -> Result<ShiftRule> {
    let measured = measure_ptvir(oracle)?;
    fit_shift_rule(&measured, base)
}

pub fn fit_shift_rule<T: Real>(measured: &PtvirSet<T>, base: &[T]) -> Result<ShiftRule> {
    let (n, m) = (measured.fft_len, measured.block_len);
    let scale = base.iter().fold(T::one(), |a, &b| a.max(b.abs()));
    let tol = T::residue_tol() * scale;
    let mut best: Option<(T, ShiftRule)> = None;
    for direction in [1i8, -1] {
        for offset in 0..n {
            let rule = ShiftRule {
                direction,
                offset,
                block_len: m,
                fft_len: n,
            };
            let mut dev = T::zero();
            'rows: for (phase, row) in measured.responses.iter().enumerate() {
                for (q, &v) in row.iter().enumerate() {
                    dev = dev.max((v - base[rule.source_index(phase, q)]).abs());
                    if best.as_ref().is_some_and(|(b, _)| dev >= *b) {
                        break 'rows;
                    }
                }
            }
            if best.as_ref().is_none_or(|(b, _)| dev < *b) {
                best = Some((dev, rule));
            }
        }
    }
    let (dev, rule) = best.expect("at least one candidate rule");
    if dev > tol {
        return Err(Error::ShiftRuleNotFound(dev.to_f64_lossy()));
    }
    Ok(rule)
}

/// Calibrates against the naive reference filter for a fixed non-trivial
/// table at the given lengths.
pub fn calibrate_for<T: Real>(fft_len: usize, filter_len: usize) -> Result<ShiftRule> {
    let block_len = fft_len - filter_len + 1;
    // an asymmetric, aperiodic probe table: every tap of the base response
    // distinct, so exactly one rule can fit
    let probe: Vec<Complex<T>> = {
        let taps: Vec<Complex<T>> = (0..fft_len)
            .map(|q| Complex::new(T::lit(1.0 + q as f64 * 0.01 + (q as f64 * 0.7).sin() * 1e-3), T::zero()))
            .collect();
        crate::oracle::naive_dft(&taps)
    };
    let mut table = probe;
    // enforce exact conjugate symmetry so the base response is real
    for k in 1..fft_len / 2 {
        table[fft_len - k] = table[k].conj();
    }
    table[0].im = T::zero();
    table[fft_len / 2].im = T::zero();
    let h = DftCoefficients {
        table,
        source_b: None,
    };
    let base = base_response_idft(&h)?;
    let mut oracle = NaiveBlockFilter::new(&h, block_len)?;
    calibrate_shift_convention(&mut oracle, &base)
}

/// Builds all `M` rows from the base row by index permutation.
pub fn ptvir_from_base<T: Real>(base: &[T], rule: &ShiftRule) -> PtvirSet<T> {
    let responses = (0..rule.block_len)
        .map(|n| (0..rule.fft_len).map(|q| base[rule.source_index(n, q)]).collect())
        .collect();
    PtvirSet {
        responses,
        block_len: rule.block_len,
        fft_len: rule.fft_len,
        source_b: None,
    }
}

/// `H_n(e^{jωT}) = e^{-jωTn}·Σ_q d_n(q)·e^{-jωTq}` by direct (Horner)
/// summation.
pub fn response_hn<T: Real>(set: &PtvirSet<T>, n: usize, omega: T) -> Result<Complex<T>> {
    let row = set.row(n)?;
    Ok(response_of_row(row, n, omega))
}

pub(crate) fn response_of_row<T: Real>(row: &[T], n: usize, omega: T) -> Complex<T> {
    let z = Complex::new(omega.cos(), -omega.sin());
    let mut acc = Complex::new(T::zero(), T::zero());
    for &d in row.iter().rev() {
        acc = acc * z + d;
    }
    let shift = omega * T::from_usize_exact(n);
    acc * Complex::new(shift.cos(), -shift.sin())
}

/// Passband and stopband edges `b ∓ Δ/2` in radians for band centre `b`.
pub fn band_edges<T: Real>(bins: &BinSpec, b: usize) -> (T, T) {
    let half = bins.transition_bins / 2;
    (
        bin_to_radians(b - half, bins.fft_len),
        bin_to_radians(b + half, bins.fft_len),
    )
}

/// Desired OLS response: the linear-phase lowpass delayed by a further
/// `M - 1` samples in the passband, zero in the stopband.
pub fn desired_response<T: Real>(omega: T, bins: &BinSpec, b: usize) -> Result<Complex<T>> {
    let (pass_edge, stop_edge) = band_edges::<T>(bins, b);
    if omega <= pass_edge {
        let delay = T::from_usize_exact(bins.filter_len - 1) / T::lit(2.0)
            + T::from_usize_exact(bins.block_len - 1);
        let arg = omega * delay;
        Ok(Complex::new(arg.cos(), -arg.sin()))
    } else if omega >= stop_edge {
        Ok(Complex::new(T::zero(), T::zero()))
    } else {
        Err(Error::InTransitionBand(omega.to_f64_lossy()))
    }
}

/// Constrained grid points for one band centre.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMask<T> {
    pub b: usize,
    pub pass_edge: T,
    pub stop_edge: T,
    /// Grid indices in the passband then the stopband, ascending.
    pub indices: Vec<usize>,
}

/// Uniform grid over `[0, π]` with every band edge of the design inserted.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid<T> {
    pub points: Vec<T>,
    /// Nominal uniform point count the grid was built from.
    pub uniform_points: usize,
    pub masks: Vec<BandMask<T>>,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(bins: &BinSpec, uniform_points: usize) -> Result<Self> {
        if uniform_points < 2 * bins.fft_len {
            return Err(Error::InvalidSpec(format!(
                "grid needs at least 2N = {} points, got {uniform_points}",
                2 * bins.fft_len
            )));
        }
        let pi = T::PI();
        let last = T::from_usize_exact(uniform_points - 1);
        let mut points: Vec<T> = (0..uniform_points)
            .map(|i| pi * T::from_usize_exact(i) / last)
            .collect();
        for b in bins.band_centres() {
            let (p, s) = band_edges::<T>(bins, b);
            points.push(p);
            points.push(s);
        }
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
        points.dedup();
        let masks = bins
            .band_centres()
            .map(|b| {
                let (pass_edge, stop_edge) = band_edges::<T>(bins, b);
                let indices = points
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w <= pass_edge || w >= stop_edge)
                    .map(|(i, _)| i)
                    .collect();
                BandMask {
                    b,
                    pass_edge,
                    stop_edge,
                    indices,
                }
            })
            .collect();
        Ok(FrequencyGrid {
            points,
            uniform_points,
            masks,
        })
    }

    pub fn mask(&self, b: usize) -> Option<&BandMask<T>> {
        self.masks.iter().find(|m| m.b == b)
    }

    /// Total number of constrained `(n, b, ω)` triples for `phases` phases.
    pub fn constraint_count(&self, phases: usize) -> usize {
        phases * self.masks.iter().map(|m| m.indices.len()).sum::<usize>()
    }
}

/// `|E_n(ω)|` over the masked grid of one band centre.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSweep<T> {
    pub b: usize,
    /// Grid indices evaluated (the band mask).
    pub indices: Vec<usize>,
    /// `errors[n][i]` for grid point `indices[i]`.
    pub errors: Vec<Vec<T>>,
    pub max: T,
    pub pass_max: T,
    pub stop_max: T,
    pub per_phase_max: Vec<T>,
}

pub fn error_on_grid<T: Real>(
    set: &PtvirSet<T>,
    grid: &FrequencyGrid<T>,
    bins: &BinSpec,
    b: usize,
) -> Result<ErrorSweep<T>> {
    let mask = grid.mask(b).ok_or(Error::BandOutOfRange {
        b: b as i64,
        low: bins.band_low as i64,
        high: bins.band_high as i64,
    })?;
    let desired: Vec<(Complex<T>, bool)> = mask
        .indices
        .iter()
        .map(|&i| {
            let w = grid.points[i];
            desired_response(w, bins, b).map(|d| (d, w <= mask.pass_edge))
        })
        .collect::<Result<_>>()?;
    let errors: Vec<Vec<T>> = set
        .responses
        .par_iter()
        .enumerate()
        .map(|(n, row)| {
            mask.indices
                .iter()
                .zip(&desired)
                .map(|(&i, (d, _))| (response_of_row(row, n, grid.points[i]) - d).norm())
                .collect()
        })
        .collect();
    let mut pass_max = T::zero();
    let mut stop_max = T::zero();
    let mut per_phase_max = Vec::with_capacity(errors.len());
    for row in &errors {
        let mut row_max = T::zero();
        for (e, (_, is_pass)) in row.iter().zip(&desired) {
            row_max = row_max.max(*e);
            if *is_pass {
                pass_max = pass_max.max(*e);
            } else {
                stop_max = stop_max.max(*e);
            }
        }
        per_phase_max.push(row_max);
    }
    Ok(ErrorSweep {
        b,
        indices: mask.indices.clone(),
        errors,
        max: pass_max.max(stop_max),
        pass_max,
        stop_max,
        per_phase_max,
    })
}

/// Worst-case error of a profile over every band centre, phase and masked
/// grid point, computed through the PTVIR route.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase<T> {
    pub max: T,
    pub pass_max: T,
    pub stop_max: T,
    pub per_b_max: BTreeMap<usize, T>,
    pub per_n_max: Vec<T>,
}

pub fn worst_case_error<T: Real>(
    bins: &BinSpec,
    profile: &TransitionProfile<T>,
    grid: &FrequencyGrid<T>,
    rule: &ShiftRule,
) -> Result<WorstCase<T>> {
    let sweeps: Vec<ErrorSweep<T>> = bins
        .band_centres()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&b| {
            let h = crate::spectrum::dft_coefficients(bins, profile, b)?;
            let set = ptvir_from_base(&base_response_idft(&h)?, rule);
            error_on_grid(&set, grid, bins, b)
        })
        .collect::<Result<_>>()?;
    let mut out = WorstCase {
        max: T::zero(),
        pass_max: T::zero(),
        stop_max: T::zero(),
        per_b_max: BTreeMap::new(),
        per_n_max: vec![T::zero(); bins.block_len],
    };
    for s in &sweeps {
        out.max = out.max.max(s.max);
        out.pass_max = out.pass_max.max(s.pass_max);
        out.stop_max = out.stop_max.max(s.stop_max);
        out.per_b_max.insert(s.b, s.max);
        for (acc, &v) in out.per_n_max.iter_mut().zip(&s.per_phase_max) {
            *acc = acc.max(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{assemble_dft_coefficients, dft_coefficients};

    fn reference_bins() -> BinSpec {
        BinSpec::new(128, 33, 16, 48, 55).unwrap()
    }

    fn ramp_profile() -> TransitionProfile<f64> {
        TransitionProfile::linear_ramp(15)
    }

    #[test]
    fn allpass_base_is_delayed_impulse() {
        let h = assemble_dft_coefficients(&vec![1.0f64; 128], 33).unwrap();
        let d = base_response_idft(&h).unwrap();
        for (q, v) in d.iter().enumerate() {
            let e = if q == 16 { 1.0 } else { 0.0 };
            assert!((v - e).abs() < 1e-14);
        }
        let zero = DftCoefficients {
            table: vec![Complex::new(0.0f64, 0.0); 128],
            source_b: None,
        };
        assert!(base_response_idft(&zero).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn asymmetric_table_rejected() {
        let mut table = vec![Complex::new(0.0f64, 0.0); 16];
        table[1] = Complex::new(1.0, 0.0);
        let h = DftCoefficients {
            table,
            source_b: None,
        };
        assert!(matches!(base_response_idft(&h), Err(Error::Asymmetric(_))));
    }

    #[test]
    fn cosine_route_matches_idft() {
        let bins = reference_bins();
        let p = ramp_profile();
        for b in bins.band_centres() {
            let via_idft = base_response_idft(&dft_coefficients(&bins, &p, b).unwrap()).unwrap();
            let via_cos = base_response_cosine(&bins, &p, b, 33).unwrap();
            for (a, c) in via_idft.iter().zip(&via_cos) {
                assert!((a - c).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cosine_route_edge_identities() {
        // k1 = 1: only the DC term survives when V = 0
        let bins = BinSpec::new(32, 9, 4, 2, 2).unwrap();
        let d = base_response_cosine(&bins, &TransitionProfile::<f64>::zeros(3), 2, 9).unwrap();
        assert!(d.iter().all(|&v| (v - 1.0 / 32.0).abs() < 1e-15));
        // peak tap: every cosine equals one
        let bins = reference_bins();
        let p = ramp_profile();
        let d = base_response_cosine(&bins, &p, 50, 33).unwrap();
        let (k1, _) = transition_bins(&bins, 50).unwrap();
        let peak = (1.0 + 2.0 * (k1 - 1) as f64 + 2.0 * p.values().iter().sum::<f64>()) / 128.0;
        assert!((d[16] - peak).abs() < 1e-14);
    }

    #[test]
    fn calibrated_rule_is_ols_shift() {
        let rule = calibrate_for::<f64>(128, 33).unwrap();
        assert_eq!(rule.direction, 1);
        assert_eq!(rule.offset, 33);
        for n in 0..96 {
            for q in 0..128 {
                assert_eq!(rule.source_index(n, q), rule.source_index(n + 96, q));
            }
        }
        assert_eq!(rule.shift(95), 0);
    }

    #[test]
    fn measured_equals_analytic_for_design_table() {
        let bins = reference_bins();
        let h = dft_coefficients(&bins, &ramp_profile(), 48).unwrap();
        let base = base_response_idft(&h).unwrap();
        let mut oracle = NaiveBlockFilter::new(&h, 96).unwrap();
        let measured = measure_ptvir(&mut oracle).unwrap();
        let rule = fit_shift_rule(&measured, &base).unwrap();
        let analytic = ptvir_from_base(&base, &rule);
        assert!(measured.max_abs_diff(&analytic) < 1e-12);
        let last = measured.row(95).unwrap();
        assert!(last.iter().zip(&base).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn allpass_responses_are_pure_delays() {
        let h = assemble_dft_coefficients(&vec![1.0f64; 128], 33).unwrap();
        let mut oracle = NaiveBlockFilter::new(&h, 96).unwrap();
        let set = measure_ptvir(&mut oracle).unwrap();
        for (n, row) in set.responses.iter().enumerate() {
            // total causal delay 16 + M - 1 = q + n
            let q_peak = 111 - n;
            for (q, &v) in row.iter().enumerate() {
                let e = if q == q_peak { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-12);
            }
            for w in [0.0, 0.3, 1.7, 3.0] {
                assert!((response_hn(&set, n, w).unwrap().norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn permutation_preserves_values() {
        let base: Vec<f64> = (0..32).map(|i| (i as f64 * 0.31).sin()).collect();
        let rule = ShiftRule {
            direction: 1,
            offset: 9,
            block_len: 24,
            fft_len: 32,
        };
        let set = ptvir_from_base(&base, &rule);
        let mut sorted_base = base.clone();
        sorted_base.sort_by(f64::total_cmp);
        for row in &set.responses {
            let mut r = row.clone();
            r.sort_by(f64::total_cmp);
            assert_eq!(r, sorted_base);
        }
    }

    #[test]
    fn response_dc_identity_and_range() {
        let bins = reference_bins();
        let h = dft_coefficients(&bins, &ramp_profile(), 52).unwrap();
        let rule = calibrate_for::<f64>(128, 33).unwrap();
        let set = ptvir_from_base(&base_response_idft(&h).unwrap(), &rule);
        for n in [0, 40, 95] {
            let dc = response_hn(&set, n, 0.0).unwrap();
            let sum: f64 = set.responses[n].iter().sum();
            assert!((dc.re - sum).abs() < 1e-14 && dc.im.abs() < 1e-14);
            let bound: f64 = set.responses[n].iter().map(|v| v.abs()).sum();
            assert!(response_hn(&set, n, 1.234).unwrap().norm() <= bound + 1e-15);
        }
        assert!(matches!(
            response_hn(&set, 96, 0.1),
            Err(Error::PhaseOutOfRange { .. })
        ));
    }

    #[test]
    fn desired_response_regions() {
        let bins = reference_bins();
        let b = 48;
        let (p, s) = band_edges::<f64>(&bins, b);
        assert_eq!(desired_response(0.0, &bins, b).unwrap(), Complex::new(1.0, 0.0));
        assert_eq!(desired_response(s, &bins, b).unwrap(), Complex::new(0.0, 0.0));
        assert!((desired_response(p, &bins, b).unwrap().norm() - 1.0).abs() < 1e-15);
        assert!(matches!(
            desired_response(0.5 * (p + s), &bins, b),
            Err(Error::InTransitionBand(_))
        ));
    }

    #[test]
    fn grid_contains_edges_and_masks() {
        let bins = reference_bins();
        let grid = FrequencyGrid::<f64>::new(&bins, 1000).unwrap();
        for mask in &grid.masks {
            assert!(grid.points.contains(&mask.pass_edge));
            assert!(grid.points.contains(&mask.stop_edge));
            for &i in &mask.indices {
                let w = grid.points[i];
                assert!(w <= mask.pass_edge || w >= mask.stop_edge);
            }
        }
        assert!(FrequencyGrid::<f64>::new(&bins, 255).is_err());
    }

    #[test]
    fn zero_filter_error_is_indicator() {
        let bins = reference_bins();
        let grid = FrequencyGrid::<f64>::new(&bins, 512).unwrap();
        let set = PtvirSet {
            responses: vec![vec![0.0; 128]; 96],
            block_len: 96,
            fft_len: 128,
            source_b: None,
        };
        let sweep = error_on_grid(&set, &grid, &bins, 50).unwrap();
        assert!((sweep.pass_max - 1.0).abs() < 1e-15);
        assert_eq!(sweep.stop_max, 0.0);
    }

    #[test]
    fn allpass_with_ols_delay_has_no_passband_error() {
        // b at the top of the admissible range: the passband spans
        // [0, π - Δ] and the all-pass matches the desired delay
        // (L-1)/2 + M - 1 at every phase
        let bins = BinSpec::new(128, 33, 16, 55, 55).unwrap();
        let h = assemble_dft_coefficients(&vec![1.0f64; 128], 33).unwrap();
        let rule = calibrate_for::<f64>(128, 33).unwrap();
        let set = ptvir_from_base(&base_response_idft(&h).unwrap(), &rule);
        let grid = FrequencyGrid::<f64>::new(&bins, 1000).unwrap();
        let sweep = error_on_grid(&set, &grid, &bins, 55).unwrap();
        assert!(sweep.pass_max < 1e-12, "{}", sweep.pass_max);
        // without the extra M - 1 samples the error would be the gap between
        // the two delays
        let w = 0.3f64;
        let gap = (Complex::new((16.0 * w).cos(), -(16.0 * w).sin())
            - Complex::new((111.0 * w).cos(), -(111.0 * w).sin()))
        .norm();
        assert!(gap > 0.1);
    }
}
