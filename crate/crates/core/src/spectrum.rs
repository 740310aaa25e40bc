//! Filter requirements, their bin-domain discretization, and the
//! frequency-sampled DFT coefficient tables.
//!
//! A lowpass with band centre `b` and fixed transition width `Δ` is described
//! by its DFT magnitude samples: ones in the passband, zeros in the
//! stopband, and a shared transition profile `V(r)` in between. The profile
//! does not depend on `b`, so retuning only moves the bin indices where the
//! profile is placed.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{unit_phasor, Real};

/// Maximum distance (in bins) between a requested frequency and the DFT grid
/// that is still accepted as "on grid". Printed specifications are often
/// rounded to four digits (e.g. `0.8594π` for `55/64·π`).
pub const GRID_TOLERANCE_BINS: f64 = 5e-3;

/// Continuous-frequency lowpass requirements. Frequencies are normalized
/// angular frequencies `ωT` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec<T> {
    pub transition_width: T,
    pub passband_ripple: T,
    pub stopband_ripple: T,
    pub max_error: T,
    pub band_low: T,
    pub band_high: T,
}

impl<T: Real> FilterSpec<T> {
    pub fn new(
        transition_width: T,
        passband_ripple: T,
        stopband_ripple: T,
        max_error: T,
        band_low: T,
        band_high: T,
    ) -> Result<Self> {
        let spec = FilterSpec {
            transition_width,
            passband_ripple,
            stopband_ripple,
            max_error,
            band_low,
            band_high,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        let pi = T::PI();
        let half = self.transition_width / T::lit(2.0);
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.to_string()));
        if !(self.transition_width > T::zero() && self.transition_width < pi) {
            return bad("transition width must lie in (0, pi)");
        }
        for (name, v) in [
            ("passband ripple", self.passband_ripple),
            ("stopband ripple", self.stopband_ripple),
            ("max error", self.max_error),
        ] {
            if !(v > T::zero() && v < T::one()) {
                return Err(Error::InvalidSpec(format!("{name} must lie in (0, 1)")));
            }
        }
        // band edges are checked with a grid-sized slack so that printed
        // (rounded) specifications at the upper limit are not rejected here
        let slack = T::lit(1e-3);
        if !(self.band_low + slack >= half
            && self.band_low <= self.band_high
            && self.band_high <= pi - half + slack)
        {
            return bad("band centres must satisfy width/2 <= b_low <= b_high <= pi - width/2");
        }
        Ok(())
    }
}

/// Exact bin-domain discretization of a [`FilterSpec`] at a given FFT length
/// and effective filter length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinSpec {
    pub fft_len: usize,
    pub filter_len: usize,
    pub block_len: usize,
    pub transition_bins: usize,
    pub band_low: usize,
    pub band_high: usize,
}

impl BinSpec {
    /// Builds a bin specification from integer quantities, checking every
    /// invariant. The block length is derived as `N - L + 1`.
    pub fn new(
        fft_len: usize,
        filter_len: usize,
        transition_bins: usize,
        band_low: usize,
        band_high: usize,
    ) -> Result<Self> {
        if fft_len < 8 || !fft_len.is_power_of_two() {
            return Err(Error::BinRange(format!(
                "FFT length {fft_len} must be a power of two >= 8"
            )));
        }
        if filter_len == 0 || filter_len > fft_len {
            return Err(Error::BinRange(format!(
                "filter length {filter_len} must lie in [1, {fft_len}]"
            )));
        }
        if transition_bins == 0 {
            return Err(Error::BinRange("transition width must be positive".into()));
        }
        if !transition_bins.is_multiple_of(2) {
            return Err(Error::OddTransitionWidth(transition_bins as i64));
        }
        let half = transition_bins / 2;
        let upper = (fft_len / 2).checked_sub(half + 1);
        match upper {
            Some(upper) if half <= band_low && band_low <= band_high && band_high <= upper => {}
            _ => {
                return Err(Error::BinRange(format!(
                    "need {half} <= b_low ({band_low}) <= b_high ({band_high}) <= N/2 - {} ",
                    half + 1
                )))
            }
        }
        Ok(BinSpec {
            fft_len,
            filter_len,
            block_len: fft_len - filter_len + 1,
            transition_bins,
            band_low,
            band_high,
        })
    }

    /// Number of shared transition samples, `Δ_N - 1`.
    pub fn profile_len(&self) -> usize {
        self.transition_bins - 1
    }

    pub fn band_centres(&self) -> std::ops::RangeInclusive<usize> {
        self.band_low..=self.band_high
    }

    pub fn contains(&self, b: usize) -> bool {
        self.band_centres().contains(&b)
    }

    pub fn check_band(&self, b: usize) -> Result<()> {
        if self.contains(b) {
            Ok(())
        } else {
            Err(Error::BandOutOfRange {
                b: b as i64,
                low: self.band_low as i64,
                high: self.band_high as i64,
            })
        }
    }

    /// Same design, but with the band range replaced.
    pub fn with_band_range(&self, low: usize, high: usize) -> Result<Self> {
        BinSpec::new(self.fft_len, self.filter_len, self.transition_bins, low, high)
    }

    /// Band centre in radians, `b_N * 2π / N`.
    pub fn band_radians<T: Real>(&self, b: usize) -> T {
        bin_to_radians(b, self.fft_len)
    }

    pub fn transition_radians<T: Real>(&self) -> T {
        bin_to_radians(self.transition_bins, self.fft_len)
    }
}

pub(crate) fn bin_to_radians<T: Real>(bins: usize, fft_len: usize) -> T {
    T::lit(2.0) * T::PI() * T::from_usize_exact(bins) / T::from_usize_exact(fft_len)
}

fn snap_to_grid(quantity: &'static str, radians: f64, fft_len: usize) -> Result<(usize, f64)> {
    let bins = radians * fft_len as f64 / (2.0 * std::f64::consts::PI);
    let nearest = bins.round();
    if (bins - nearest).abs() > GRID_TOLERANCE_BINS || nearest < 0.0 {
        return Err(Error::OffGrid {
            quantity,
            value: bins,
            fft_len,
            suggestion: String::new(),
        });
    }
    Ok((nearest as usize, bins))
}

/// Maps a continuous specification onto the `2π/N` grid.
///
/// Frequencies must already be within [`GRID_TOLERANCE_BINS`] of a bin;
/// anything further away is rejected with a suggestion for the nearest valid
/// specification instead of being rounded silently.
pub fn validate_and_discretize<T: Real>(
    spec: &FilterSpec<T>,
    fft_len: usize,
    filter_len: usize,
) -> Result<BinSpec> {
    spec.check()?;
    if fft_len < 8 || !fft_len.is_power_of_two() {
        return Err(Error::BinRange(format!(
            "FFT length {fft_len} must be a power of two >= 8"
        )));
    }
    if filter_len == 0 || filter_len > fft_len {
        return Err(Error::BinRange(format!(
            "filter length {filter_len} exceeds FFT length {fft_len}"
        )));
    }
    let with_hint = |e: Error| match e {
        Error::OffGrid {
            quantity,
            value,
            fft_len,
            ..
        } => {
            let hint = nearest_grid_spec(spec, fft_len)
                .map(|s| {
                    format!(
                        "; nearest valid: transition_width = {}pi, b_low = {}pi, b_high = {}pi",
                        s.transition_width.to_f64_lossy() / std::f64::consts::PI,
                        s.band_low.to_f64_lossy() / std::f64::consts::PI,
                        s.band_high.to_f64_lossy() / std::f64::consts::PI,
                    )
                })
                .unwrap_or_default();
            Error::OffGrid {
                quantity,
                value,
                fft_len,
                suggestion: hint,
            }
        }
        other => other,
    };
    let (delta_n, _) =
        snap_to_grid("transition width", spec.transition_width.to_f64_lossy(), fft_len)
            .map_err(with_hint)?;
    if delta_n % 2 != 0 {
        return Err(Error::OddTransitionWidth(delta_n as i64));
    }
    let (b_low, _) =
        snap_to_grid("b_low", spec.band_low.to_f64_lossy(), fft_len).map_err(with_hint)?;
    let (b_high, _) =
        snap_to_grid("b_high", spec.band_high.to_f64_lossy(), fft_len).map_err(with_hint)?;
    BinSpec::new(fft_len, filter_len, delta_n, b_low, b_high)
}

/// Nearest specification that lands on the grid: transition width rounded to
/// an even bin count (at least 2), band centres rounded and clamped into the
/// admissible range. Returns `None` when no band centre is admissible.
pub fn nearest_grid_spec<T: Real>(spec: &FilterSpec<T>, fft_len: usize) -> Option<FilterSpec<T>> {
    let scale = fft_len as f64 / (2.0 * std::f64::consts::PI);
    let width = spec.transition_width.to_f64_lossy() * scale;
    let delta_n = (((width / 2.0).round() as usize).max(1)) * 2;
    let half = delta_n / 2;
    let upper = (fft_len / 2).checked_sub(half + 1)?;
    if half > upper {
        return None;
    }
    let clamp = |x: f64| (x.round().max(0.0) as usize).clamp(half, upper);
    let lo = clamp(spec.band_low.to_f64_lossy() * scale);
    let hi = clamp(spec.band_high.to_f64_lossy() * scale).max(lo);
    Some(FilterSpec {
        transition_width: bin_to_radians(delta_n, fft_len),
        band_low: bin_to_radians(lo, fft_len),
        band_high: bin_to_radians(hi, fft_len),
        ..*spec
    })
}

/// First and last transition-band bin for band centre `b`.
pub fn transition_bins(bins: &BinSpec, b: usize) -> Result<(usize, usize)> {
    bins.check_band(b)?;
    let half = bins.transition_bins / 2;
    Ok((b + 1 - half, b + half - 1))
}

/// The shared transition-band samples `V(r)`, `r = 0..Δ_N-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionProfile<T> {
    values: Vec<T>,
}

impl<T: Real> TransitionProfile<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("transition profile must be finite".into()));
        }
        Ok(TransitionProfile { values })
    }

    pub fn zeros(len: usize) -> Self {
        TransitionProfile {
            values: vec![T::zero(); len],
        }
    }

    /// Unit vector `e_r`.
    pub fn unit(len: usize, r: usize) -> Self {
        let mut values = vec![T::zero(); len];
        values[r] = T::one();
        TransitionProfile { values }
    }

    /// Straight line from 1 down to 0 across the transition band.
    pub fn linear_ramp(len: usize) -> Self {
        let step = T::one() / T::from_usize_exact(len + 1);
        let values = (0..len)
            .map(|r| T::one() - step * T::from_usize_exact(r + 1))
            .collect();
        TransitionProfile { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_len(&self, bins: &BinSpec) -> Result<()> {
        if self.len() != bins.profile_len() {
            return Err(Error::LengthMismatch {
                expected: bins.profile_len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// Which region of the spectrum a bin falls in for a given band centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinRegion {
    Pass,
    /// Transition bin carrying profile sample `r`.
    Transition(usize),
    Stop,
}

/// Classifies bin `k` for band centre `b`; covers `0..N` exactly once.
pub fn bin_region(bins: &BinSpec, b: usize, k: usize) -> Result<BinRegion> {
    let (k1, k2) = transition_bins(bins, b)?;
    let n = bins.fft_len;
    // fold onto 0..=N/2 using the even symmetry of the magnitude samples
    let folded = if k > n / 2 { n - k } else { k };
    Ok(if folded < k1 {
        BinRegion::Pass
    } else if folded <= k2 {
        BinRegion::Transition(folded - k1)
    } else {
        BinRegion::Stop
    })
}

/// Real magnitude samples `H_R(k)` for band centre `b`. Only copies values
/// (ones, zeros and profile entries); no arithmetic is performed on them.
pub fn magnitude_samples<T: Real>(
    bins: &BinSpec,
    profile: &TransitionProfile<T>,
    b: usize,
) -> Result<Vec<T>> {
    profile.check_len(bins)?;
    let n = bins.fft_len;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(match bin_region(bins, b, k)? {
            BinRegion::Pass => T::one(),
            BinRegion::Transition(r) => profile.values[r],
            BinRegion::Stop => T::zero(),
        });
    }
    Ok(out)
}

/// Linear-phase factors `exp(-j·2πk(L-1)/(2N))`, evaluated from the reduced
/// integer angle. Bins above `N/2` use the alias `k - N`, which makes the
/// table conjugate symmetric exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable<T> {
    filter_len: usize,
    factors: Vec<Complex<T>>,
}

impl<T: Real> PhaseTable<T> {
    pub fn new(fft_len: usize, filter_len: usize) -> Self {
        let n = fft_len as i64;
        let delay2 = filter_len as i64 - 1;
        let factors = (0..n)
            .map(|k| {
                let alias = if 2 * k > n { k - n } else { k };
                let (c, s) = unit_phasor::<T>(-alias * delay2, n);
                Complex::new(c, s)
            })
            .collect();
        PhaseTable {
            filter_len,
            factors,
        }
    }

    pub fn filter_len(&self) -> usize {
        self.filter_len
    }

    pub fn factors(&self) -> &[Complex<T>] {
        &self.factors
    }

    #[inline]
    pub fn get(&self, k: usize) -> Complex<T> {
        self.factors[k]
    }
}

/// Length-`N` DFT coefficient table `H(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DftCoefficients<T> {
    pub table: Vec<Complex<T>>,
    /// Band centre the table was built for, if it came from a profile.
    pub source_b: Option<usize>,
}

impl<T: Real> DftCoefficients<T> {
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Largest `|H(N-k) - conj(H(k))|` over `k = 1..N-1`.
    pub fn max_asymmetry(&self) -> T {
        let n = self.table.len();
        (1..n)
            .map(|k| (self.table[n - k] - self.table[k].conj()).norm())
            .fold(T::zero(), T::max)
    }
}

/// Applies the linear-phase factor to real magnitude samples.
pub fn assemble_dft_coefficients<T: Real>(
    magnitudes: &[T],
    filter_len: usize,
) -> Result<DftCoefficients<T>> {
    let phase = PhaseTable::new(magnitudes.len(), filter_len);
    assemble_with_phase(magnitudes, &phase)
}

pub fn assemble_with_phase<T: Real>(
    magnitudes: &[T],
    phase: &PhaseTable<T>,
) -> Result<DftCoefficients<T>> {
    let n = magnitudes.len();
    if n != phase.factors.len() {
        return Err(Error::LengthMismatch {
            expected: phase.factors.len(),
            got: n,
        });
    }
    if (1..n).any(|k| magnitudes[k] != magnitudes[n - k]) {
        return Err(Error::InvalidSpec(
            "magnitude samples must be even symmetric".into(),
        ));
    }
    let table = magnitudes
        .iter()
        .zip(&phase.factors)
        .map(|(&m, &p)| p.scale(m))
        .collect();
    Ok(DftCoefficients {
        table,
        source_b: None,
    })
}

/// Convenience: magnitude placement followed by phase assembly.
pub fn dft_coefficients<T: Real>(
    bins: &BinSpec,
    profile: &TransitionProfile<T>,
    b: usize,
) -> Result<DftCoefficients<T>> {
    let mags = magnitude_samples(bins, profile, b)?;
    let mut h = assemble_dft_coefficients(&mags, bins.filter_len)?;
    h.source_b = Some(b);
    Ok(h)
}

/// `H(k) = F(k) + Σ_r V(r)·G_r(k)`: the coefficient table as an affine
/// function of the transition profile.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineTables<T> {
    pub fixed: Vec<Complex<T>>,
    pub basis: Vec<Vec<Complex<T>>>,
}

impl<T: Real> AffineTables<T> {
    pub fn evaluate(&self, profile: &TransitionProfile<T>) -> Vec<Complex<T>> {
        let mut out = self.fixed.clone();
        for (g, &v) in self.basis.iter().zip(profile.values()) {
            for (o, &gk) in out.iter_mut().zip(g) {
                *o += gk.scale(v);
            }
        }
        out
    }
}

pub fn affine_decomposition<T: Real>(
    bins: &BinSpec,
    b: usize,
    filter_len: usize,
) -> Result<AffineTables<T>> {
    let n = bins.fft_len;
    let phase = PhaseTable::<T>::new(n, filter_len);
    let zero = Complex::new(T::zero(), T::zero());
    let mut fixed = vec![zero; n];
    let mut basis = vec![vec![zero; n]; bins.profile_len()];
    for k in 0..n {
        match bin_region(bins, b, k)? {
            BinRegion::Pass => fixed[k] = phase.get(k),
            BinRegion::Transition(r) => basis[r][k] = phase.get(k),
            BinRegion::Stop => {}
        }
    }
    Ok(AffineTables { fixed, basis })
}
