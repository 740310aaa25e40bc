//! Dense revised simplex for small-row, many-column linear programs.
//!
//! Chebyshev approximation problems have few unknowns and a huge number of
//! constraints, so they are solved through their dual: a standard-form LP
//! with one row per unknown and one column per constraint. The basis
//! inverse is a tiny dense matrix, and the costly step (pricing every
//! column) parallelizes without affecting the pivot sequence.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Basis entries at or above this value denote artificial variables.
const ARTIFICIAL: usize = usize::MAX / 2;
const PAR_PRICING_MIN_COLS: usize = 16_384;
const REINVERT_EVERY: usize = 64;
const DEGENERATE_SWITCH: usize = 32;

/// `min c^T x  s.t.  A x = rhs,  x >= 0` with `rhs >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardLp<T> {
    rows: usize,
    /// Column-major: column `j` is `columns[j*rows..(j+1)*rows]`.
    columns: Vec<T>,
    costs: Vec<T>,
    rhs: Vec<T>,
}

/// Optimal basic solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    /// Basic variables (column index, value); artificial entries omitted.
    pub basic: Vec<(usize, T)>,
    /// Simplex multipliers, one per row.
    pub duals: Vec<T>,
    pub objective: T,
    /// Final basis, reusable as a warm start after appending columns.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

impl<T: Real> StandardLp<T> {
    pub fn new(rhs: Vec<T>) -> Self {
        StandardLp {
            rows: rhs.len(),
            columns: Vec::new(),
            costs: Vec::new(),
            rhs,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.costs.len()
    }

    pub fn push_column(&mut self, column: &[T], cost: T) {
        assert_eq!(column.len(), self.rows, "column height");
        self.columns.extend_from_slice(column);
        self.costs.push(cost);
    }

    #[inline]
    fn column(&self, j: usize) -> &[T] {
        &self.columns[j * self.rows..(j + 1) * self.rows]
    }

    fn opt_tol() -> T {
        T::epsilon().sqrt() * T::lit(1e-3)
    }

    fn piv_tol() -> T {
        T::epsilon().sqrt() * T::lit(1e-1)
    }

    /// Solves from scratch, or from `warm` (a basis returned by an earlier
    /// solve of this LP before more columns were appended).
    pub fn solve(&self, warm: Option<&[usize]>) -> Result<LpSolution<T>> {
        let mut state = match warm.and_then(|b| Tableau::from_basis(self, b)) {
            Some(s) => s,
            None => {
                let mut s = Tableau::artificial(self);
                s.optimize(self, Phase::One)?;
                let infeas: T = s
                    .basis
                    .iter()
                    .zip(&s.x)
                    .filter(|(v, _)| **v >= ARTIFICIAL)
                    .map(|(_, &x)| x)
                    .sum();
                if infeas > Self::piv_tol() {
                    return Err(Error::Lp("infeasible"));
                }
                s.drive_out_artificials(self);
                s
            }
        };
        state.optimize(self, Phase::Two)?;
        let duals = state.duals(self, Phase::Two);
        let objective = state
            .basis
            .iter()
            .zip(&state.x)
            .map(|(&v, &x)| if v < ARTIFICIAL { self.costs[v] * x } else { T::zero() })
            .sum();
        let basic = state
            .basis
            .iter()
            .zip(&state.x)
            .filter(|(v, _)| **v < ARTIFICIAL)
            .map(|(&v, &x)| (v, x))
            .collect();
        Ok(LpSolution {
            basic,
            duals,
            objective,
            basis: state.basis,
            iterations: state.iterations,
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

struct Tableau<T> {
    m: usize,
    basis: Vec<usize>,
    /// Row-major `m x m` basis inverse.
    binv: Vec<T>,
    x: Vec<T>,
    is_basic: Vec<bool>,
    iterations: usize,
}

impl<T: Real> Tableau<T> {
    fn artificial(lp: &StandardLp<T>) -> Self {
        let m = lp.rows;
        let mut binv = vec![T::zero(); m * m];
        for i in 0..m {
            binv[i * m + i] = T::one();
        }
        Tableau {
            m,
            basis: (0..m).map(|i| ARTIFICIAL + i).collect(),
            binv,
            x: lp.rhs.clone(),
            is_basic: vec![false; lp.cols()],
            iterations: 0,
        }
    }

    fn from_basis(lp: &StandardLp<T>, basis: &[usize]) -> Option<Self> {
        let m = lp.rows;
        if basis.len() != m || basis.iter().any(|&v| v < ARTIFICIAL && v >= lp.cols()) {
            return None;
        }
        let mut t = Tableau {
            m,
            basis: basis.to_vec(),
            binv: vec![T::zero(); m * m],
            x: vec![T::zero(); m],
            is_basic: vec![false; lp.cols()],
            iterations: 0,
        };
        for &v in basis {
            if v < ARTIFICIAL {
                t.is_basic[v] = true;
            }
        }
        if !t.reinvert(lp) {
            return None;
        }
        let tol = StandardLp::<T>::piv_tol();
        let artificial_slack = t
            .basis
            .iter()
            .zip(&t.x)
            .any(|(&v, &x)| v >= ARTIFICIAL && x.abs() > tol);
        if t.x.iter().any(|&x| x < -tol) || artificial_slack {
            return None;
        }
        Some(t)
    }

    fn basis_column(&self, lp: &StandardLp<T>, v: usize, out: &mut [T]) {
        if v >= ARTIFICIAL {
            out.fill(T::zero());
            out[v - ARTIFICIAL] = T::one();
        } else {
            out.copy_from_slice(lp.column(v));
        }
    }

    /// Recomputes the basis inverse by Gauss-Jordan elimination with partial
    /// pivoting, then the basic solution. Returns false if singular.
    fn reinvert(&mut self, lp: &StandardLp<T>) -> bool {
        let m = self.m;
        let mut a = vec![T::zero(); m * m];
        let mut col = vec![T::zero(); m];
        for (j, &v) in self.basis.iter().enumerate() {
            self.basis_column(lp, v, &mut col);
            for i in 0..m {
                a[i * m + j] = col[i];
            }
        }
        let mut inv = vec![T::zero(); m * m];
        for i in 0..m {
            inv[i * m + i] = T::one();
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&i, &j| {
                    a[i * m + c]
                        .abs()
                        .partial_cmp(&a[j * m + c].abs())
                        .expect("finite")
                        .then(j.cmp(&i))
                })
                .expect("nonempty");
            if a[p * m + c].abs() <= T::epsilon() * T::lit(16.0) {
                return false;
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for i in 0..m {
                if i != c {
                    let f = a[i * m + c];
                    if f != T::zero() {
                        for k in 0..m {
                            let (ack, ick) = (a[c * m + k], inv[c * m + k]);
                            a[i * m + k] -= f * ack;
                            inv[i * m + k] -= f * ick;
                        }
                    }
                }
            }
        }
        self.binv = inv;
        self.x = self.apply_binv(&lp.rhs);
        true
    }

    fn apply_binv(&self, v: &[T]) -> Vec<T> {
        let m = self.m;
        (0..m)
            .map(|i| (0..m).map(|k| self.binv[i * m + k] * v[k]).sum())
            .collect()
    }

    fn cost(lp: &StandardLp<T>, v: usize, phase: Phase) -> T {
        match (phase, v >= ARTIFICIAL) {
            (Phase::One, true) => T::one(),
            (Phase::One, false) => T::zero(),
            (Phase::Two, true) => T::zero(),
            (Phase::Two, false) => lp.costs[v],
        }
    }

    fn duals(&self, lp: &StandardLp<T>, phase: Phase) -> Vec<T> {
        let m = self.m;
        let cb: Vec<T> = self.basis.iter().map(|&v| Self::cost(lp, v, phase)).collect();
        (0..m)
            .map(|k| (0..m).map(|i| cb[i] * self.binv[i * m + k]).sum())
            .collect()
    }

    /// Entering column: most negative reduced cost (lowest index on ties),
    /// or the lowest-index negative one under Bland's rule.
    fn price(&self, lp: &StandardLp<T>, pi: &[T], phase: Phase, bland: bool) -> Option<usize> {
        let tol = StandardLp::<T>::opt_tol();
        let reduced = |j: usize| -> Option<(T, usize)> {
            if self.is_basic[j] {
                return None;
            }
            let col = lp.column(j);
            let mut d = match phase {
                Phase::One => T::zero(),
                Phase::Two => lp.costs[j],
            };
            for (p, a) in pi.iter().zip(col) {
                d -= *p * *a;
            }
            (d < -tol).then_some((d, j))
        };
        let better = |a: Option<(T, usize)>, b: Option<(T, usize)>| match (a, b) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => {
                let b_wins = if bland { b.1 < a.1 } else { b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) };
                Some(if b_wins { b } else { a })
            }
        };
        let n = lp.cols();
        let best = if n >= PAR_PRICING_MIN_COLS {
            (0..n)
                .into_par_iter()
                .with_min_len(4096)
                .map(reduced)
                .reduce(|| None, better)
        } else {
            (0..n).map(reduced).fold(None, better)
        };
        best.map(|(_, j)| j)
    }

    fn optimize(&mut self, lp: &StandardLp<T>, phase: Phase) -> Result<()> {
        let m = self.m;
        let piv_tol = StandardLp::<T>::piv_tol();
        let max_iter = 50_000 + 50 * lp.cols();
        let mut degenerate_run = 0usize;
        let mut since_reinvert = 0usize;
        let mut col = vec![T::zero(); m];
        loop {
            if self.iterations > max_iter {
                return Err(Error::Lp("cycling (iteration limit reached)"));
            }
            let pi = self.duals(lp, phase);
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            let Some(q) = self.price(lp, &pi, phase, bland) else {
                // confirm optimality on a freshly factored basis
                if since_reinvert > 0 {
                    if !self.reinvert(lp) {
                        return Err(Error::Lp("numerically singular"));
                    }
                    since_reinvert = 0;
                    continue;
                }
                return Ok(());
            };
            col.copy_from_slice(lp.column(q));
            let alpha = self.apply_binv(&col);
            // ratio test
            let tie_tol = piv_tol * T::lit(1e-3);
            let mut leave: Option<usize> = None;
            let mut best_ratio = T::infinity();
            for i in 0..m {
                if alpha[i] <= piv_tol {
                    continue;
                }
                let ratio = self.x[i].max(T::zero()) / alpha[i];
                let take = match leave {
                    None => true,
                    Some(_) if ratio < best_ratio - tie_tol => true,
                    Some(r) if ratio <= best_ratio + tie_tol => {
                        let (art_i, art_r) = (self.basis[i] >= ARTIFICIAL, self.basis[r] >= ARTIFICIAL);
                        if bland {
                            self.basis[i] < self.basis[r]
                        } else {
                            // prefer evicting artificials, then the largest pivot
                            (art_i && !art_r) || (art_i == art_r && alpha[i] > alpha[r])
                        }
                    }
                    Some(_) => false,
                };
                if take {
                    leave = Some(i);
                    best_ratio = best_ratio.min(ratio);
                }
            }
            let Some(r) = leave else {
                return Err(Error::Lp("unbounded"));
            };
            let theta = self.x[r].max(T::zero()) / alpha[r];
            if theta <= piv_tol {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, q, &alpha, theta);
            since_reinvert += 1;
            if since_reinvert >= REINVERT_EVERY {
                if !self.reinvert(lp) {
                    return Err(Error::Lp("numerically singular"));
                }
                since_reinvert = 0;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[T], theta: T) {
        let m = self.m;
        for (xi, &a) in self.x.iter_mut().zip(&alpha[..m]) {
            *xi -= theta * a;
        }
        self.x[r] = theta;
        let ar = alpha[r];
        for k in 0..m {
            self.binv[r * m + k] /= ar;
        }
        for (i, &f) in alpha[..m].iter().enumerate() {
            if i != r && f != T::zero() {
                for k in 0..m {
                    let v = self.binv[r * m + k];
                    self.binv[i * m + k] -= f * v;
                }
            }
        }
        let old = self.basis[r];
        if old < ARTIFICIAL {
            self.is_basic[old] = false;
        }
        self.basis[r] = q;
        self.is_basic[q] = true;
        self.iterations += 1;
    }

    /// Pivots zero-level artificials out of the basis where possible; those
    /// left belong to redundant rows.
    fn drive_out_artificials(&mut self, lp: &StandardLp<T>) {
        let m = self.m;
        let tol = StandardLp::<T>::piv_tol();
        for r in 0..m {
            if self.basis[r] < ARTIFICIAL {
                continue;
            }
            let row: Vec<T> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut best: Option<(T, usize)> = None;
            for j in 0..lp.cols() {
                if self.is_basic[j] {
                    continue;
                }
                let v: T = row.iter().zip(lp.column(j)).map(|(a, b)| *a * *b).sum();
                if v.abs() > tol && best.is_none_or(|(bv, _)| v.abs() > bv) {
                    best = Some((v.abs(), j));
                }
            }
            if let Some((_, q)) = best {
                let alpha = self.apply_binv(lp.column(q));
                self.pivot(r, q, &alpha, T::zero());
            }
        }
        self.reinvert(lp);
    }
}

/// `min δ  s.t.  g_iᵀ v − δ ≤ h_i` over free `v` and `δ`, solved via its
/// standard-form dual. Rows are appended incrementally and the previous
/// optimal basis is reused as a warm start.
#[derive(Debug, Clone)]
pub struct MinimaxLp<T> {
    vars: usize,
    lp: StandardLp<T>,
    rows_h: Vec<T>,
    basis: Option<Vec<usize>>,
}

/// Solution of a [`MinimaxLp`].
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxSolution<T> {
    pub v: Vec<T>,
    pub delta: T,
    pub iterations: usize,
    /// Row indices with positive dual weight (the supporting constraints).
    pub support: Vec<usize>,
}

impl<T: Real> MinimaxLp<T> {
    pub fn new(vars: usize) -> Self {
        let mut rhs = vec![T::zero(); vars + 1];
        rhs[vars] = T::one();
        MinimaxLp {
            vars,
            lp: StandardLp::new(rhs),
            rows_h: Vec::new(),
            basis: None,
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn len(&self) -> usize {
        self.rows_h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows_h.is_empty()
    }

    /// Adds `gᵀ v − δ ≤ h`; returns the row index.
    pub fn push_row(&mut self, g: &[T], h: T) -> usize {
        assert_eq!(g.len(), self.vars);
        let mut col = Vec::with_capacity(self.vars + 1);
        col.extend_from_slice(g);
        col.push(T::one());
        self.lp.push_column(&col, h);
        self.rows_h.push(h);
        self.rows_h.len() - 1
    }

    pub fn solve(&mut self) -> Result<MinimaxSolution<T>> {
        if self.rows_h.is_empty() {
            return Err(Error::Lp("empty"));
        }
        let sol = match self.lp.solve(self.basis.as_deref()) {
            Ok(s) => s,
            // a stale warm start should never be fatal
            Err(_) if self.basis.is_some() => self.lp.solve(None)?,
            Err(e) => return Err(e),
        };
        self.basis = Some(sol.basis.clone());
        let v = sol.duals[..self.vars].to_vec();
        let delta = -sol.duals[self.vars];
        let support = sol
            .basic
            .iter()
            .filter(|(_, y)| *y > T::zero())
            .map(|(j, _)| *j)
            .collect();
        Ok(MinimaxSolution {
            v,
            delta,
            iterations: sol.iterations,
            support,
        })
    }

    /// Largest `g_iᵀ v − δ − h_i` over all rows (≤ 0 when feasible).
    pub fn max_violation(&self, v: &[T], delta: T) -> T {
        (0..self.len())
            .map(|i| {
                let col = self.lp.column(i);
                let gv: T = col[..self.vars].iter().zip(v).map(|(a, b)| *a * *b).sum();
                gv - delta - self.rows_h[i]
            })
            .fold(T::neg_infinity(), T::max)
    }

    /// Number of rows with slack at most `tol`.
    pub fn active_count(&self, v: &[T], delta: T, tol: T) -> usize {
        (0..self.len())
            .filter(|&i| {
                let col = self.lp.column(i);
                let gv: T = col[..self.vars].iter().zip(v).map(|(a, b)| *a * *b).sum();
                self.rows_h[i] - (gv - delta) <= tol
            })
            .count()
    }
}
