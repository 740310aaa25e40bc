//! Streaming overlap-save engine.
//!
//! Each block of `M` new samples is appended to the last `L - 1` inputs,
//! transformed, multiplied by the coefficient table, inverse transformed,
//! and the last `M` samples are emitted. For a variable-bandwidth design the
//! multiplication is split in two stages: a real *variable* stage (pass,
//! zero, or scale by `V(r)`) and a *fixed* linear-phase stage. Retuning the
//! bandwidth only moves the transition-bin indices.

use std::sync::Arc;

use num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::block::{check_len, BlockProcessor};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectrum::{transition_bins, BinSpec, DftCoefficients, PhaseTable, TransitionProfile};

/// Real-input DFT of length `N`. `forward` is unnormalized with the
/// `exp(-j2πnk/N)` kernel and yields bins `0..=N/2`; `inverse` maps such a
/// half spectrum back to `N` real samples, scaled by `1/N`.
#[allow(clippy::len_without_is_empty)]
pub trait TransformProvider<T>: Send {
    fn len(&self) -> usize;

    fn forward(&mut self, input: &mut [T], spectrum: &mut [Complex<T>]);

    fn inverse(&mut self, spectrum: &mut [Complex<T>], output: &mut [T]);
}

/// [`TransformProvider`] backed by `realfft`.
pub struct RealFftProvider<T: Real> {
    len: usize,
    fwd: Arc<dyn RealToComplex<T>>,
    inv: Arc<dyn ComplexToReal<T>>,
    scratch_fwd: Vec<Complex<T>>,
    scratch_inv: Vec<Complex<T>>,
}

impl<T: Real> RealFftProvider<T> {
    pub fn new(len: usize) -> Self {
        let mut planner = RealFftPlanner::<T>::new();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        let scratch_fwd = fwd.make_scratch_vec();
        let scratch_inv = inv.make_scratch_vec();
        RealFftProvider {
            len,
            fwd,
            inv,
            scratch_fwd,
            scratch_inv,
        }
    }
}

impl<T: Real> TransformProvider<T> for RealFftProvider<T> {
    fn len(&self) -> usize {
        self.len
    }

    fn forward(&mut self, input: &mut [T], spectrum: &mut [Complex<T>]) {
        self.fwd
            .process_with_scratch(input, spectrum, &mut self.scratch_fwd)
            .expect("buffer sizes fixed at construction");
    }

    fn inverse(&mut self, spectrum: &mut [Complex<T>], output: &mut [T]) {
        // DC and Nyquist must be real for a real output
        spectrum[0].im = T::zero();
        spectrum[self.len / 2].im = T::zero();
        self.inv
            .process_with_scratch(spectrum, output, &mut self.scratch_inv)
            .expect("buffer sizes fixed at construction");
        let scale = T::one() / T::from_usize_exact(self.len);
        for y in output.iter_mut() {
            *y *= scale;
        }
    }
}

/// Operation counters kept by the engine's multiply stages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineCounters {
    pub blocks: u64,
    /// Real general multiplications in the variable stage (two per
    /// transition bin in the non-redundant half spectrum).
    pub variable_mults: u64,
    /// Complex multiplications by the fixed phase table.
    pub fixed_complex_mults: u64,
}

#[derive(Debug, Clone)]
enum Stage<T> {
    Variable {
        bins: BinSpec,
        profile: Vec<T>,
        phase: Vec<Complex<T>>,
        b: usize,
        k1: usize,
        k2: usize,
    },
    /// Arbitrary conjugate-symmetric table (classical OLS); bins `0..=N/2`.
    Fixed { half: Vec<Complex<T>> },
}

/// One overlap-save stream.
pub struct OlsEngine<T: Real> {
    fft_len: usize,
    block_len: usize,
    stage: Stage<T>,
    ring: Vec<T>,
    pending: Vec<T>,
    frame: Vec<T>,
    spectrum: Vec<Complex<T>>,
    output: Vec<T>,
    transform: Box<dyn TransformProvider<T>>,
    counters: EngineCounters,
}

impl<T: Real> std::fmt::Debug for OlsEngine<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OlsEngine")
            .field("fft_len", &self.fft_len)
            .field("block_len", &self.block_len)
            .field("stage", &self.stage)
            .field("counters", &self.counters)
            .finish_non_exhaustive()
    }
}

impl<T: Real> OlsEngine<T> {
    /// Engine for a variable-bandwidth design, tuned to band centre `b`.
    pub fn new(bins: &BinSpec, profile: &TransitionProfile<T>, b: usize) -> Result<Self> {
        Self::with_provider(bins, profile, b, Box::new(RealFftProvider::new(bins.fft_len)))
    }

    pub fn with_provider(
        bins: &BinSpec,
        profile: &TransitionProfile<T>,
        b: usize,
        transform: Box<dyn TransformProvider<T>>,
    ) -> Result<Self> {
        profile.check_len(bins)?;
        check_len(bins.fft_len, transform.len())?;
        let (k1, k2) = transition_bins(bins, b)?;
        let phase = PhaseTable::<T>::new(bins.fft_len, bins.filter_len).factors()
            [..=bins.fft_len / 2]
            .to_vec();
        let stage = Stage::Variable {
            bins: *bins,
            profile: profile.values().to_vec(),
            phase,
            b,
            k1,
            k2,
        };
        Ok(Self::build(bins.fft_len, bins.block_len, stage, transform))
    }

    /// Engine with an arbitrary (conjugate-symmetric) coefficient table.
    pub fn with_coefficients(h: &DftCoefficients<T>, block_len: usize) -> Result<Self> {
        let n = h.len();
        if !n.is_power_of_two() || block_len == 0 || block_len > n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: block_len,
            });
        }
        let asym = h.max_asymmetry();
        if asym > T::residue_tol() {
            return Err(Error::Asymmetric(asym.to_f64_lossy()));
        }
        let stage = Stage::Fixed {
            half: h.table[..=n / 2].to_vec(),
        };
        Ok(Self::build(n, block_len, stage, Box::new(RealFftProvider::new(n))))
    }

    fn build(fft_len: usize, block_len: usize, stage: Stage<T>, transform: Box<dyn TransformProvider<T>>) -> Self {
        OlsEngine {
            fft_len,
            block_len,
            stage,
            ring: vec![T::zero(); fft_len - block_len],
            pending: Vec::with_capacity(block_len),
            frame: vec![T::zero(); fft_len],
            spectrum: vec![Complex::new(T::zero(), T::zero()); fft_len / 2 + 1],
            output: vec![T::zero(); fft_len],
            transform,
            counters: EngineCounters::default(),
        }
    }

    pub fn bandwidth(&self) -> Option<usize> {
        match &self.stage {
            Stage::Variable { b, .. } => Some(*b),
            Stage::Fixed { .. } => None,
        }
    }

    pub fn counters(&self) -> EngineCounters {
        self.counters
    }

    /// Retunes to band centre `b` from the next block on. Touches only the
    /// two transition-bin indices.
    pub fn set_bandwidth(&mut self, new_b: usize) -> Result<()> {
        match &mut self.stage {
            Stage::Variable { bins, b, k1, k2, .. } => {
                let (lo, hi) = transition_bins(bins, new_b)?;
                *b = new_b;
                *k1 = lo;
                *k2 = hi;
                Ok(())
            }
            Stage::Fixed { .. } => Err(Error::InvalidSpec(
                "engine has a fixed coefficient table".into(),
            )),
        }
    }

    fn multiply(&mut self) {
        let spec = &mut self.spectrum;
        match &self.stage {
            Stage::Variable {
                profile,
                phase,
                k1,
                k2,
                ..
            } => {
                let zero = Complex::new(T::zero(), T::zero());
                // variable stage: pass, scale or zero
                for (r, x) in spec[*k1..=*k2].iter_mut().enumerate() {
                    *x = x.scale(profile[r]);
                }
                for x in spec[*k2 + 1..].iter_mut() {
                    *x = zero;
                }
                // fixed stage on the nonzero bins
                for (x, p) in spec[..=*k2].iter_mut().zip(phase) {
                    *x *= p;
                }
                self.counters.variable_mults += 2 * (*k2 + 1 - *k1) as u64;
                self.counters.fixed_complex_mults += (*k2 + 1) as u64;
            }
            Stage::Fixed { half } => {
                for (x, h) in spec.iter_mut().zip(half) {
                    *x *= h;
                }
                self.counters.fixed_complex_mults += half.len() as u64;
            }
        }
    }

    /// Number of input samples buffered towards the next block.
    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Feeds an arbitrary number of samples and returns the output of every
    /// block completed by them.
    pub fn push(&mut self, input: &[T]) -> Vec<T> {
        let m = self.block_len;
        let mut out = Vec::with_capacity(input.len() + m);
        let mut rest = input;
        while !rest.is_empty() {
            let take = (m - self.pending.len()).min(rest.len());
            self.pending.extend_from_slice(&rest[..take]);
            rest = &rest[take..];
            if self.pending.len() == m {
                let block = std::mem::take(&mut self.pending);
                out.extend(self.run_block(&block));
                self.pending = block;
                self.pending.clear();
            }
        }
        out
    }

    /// Zero-pads and processes a final partial block, returning only the
    /// outputs at real input times. The stream is finished afterwards.
    pub fn flush(&mut self) -> Vec<T> {
        if self.pending.is_empty() {
            return Vec::new();
        }
        let real = self.pending.len();
        let mut block = std::mem::take(&mut self.pending);
        block.resize(self.block_len, T::zero());
        let mut y = self.run_block(&block);
        y.truncate(real);
        y
    }

    fn run_block(&mut self, input: &[T]) -> Vec<T> {
        let keep = self.ring.len();
        self.frame[..keep].copy_from_slice(&self.ring);
        self.frame[keep..].copy_from_slice(input);
        // the transform may clobber its input, so save the next ring first
        self.ring
            .copy_from_slice(&self.frame[self.fft_len - keep..]);
        self.transform.forward(&mut self.frame, &mut self.spectrum);
        self.multiply();
        self.transform.inverse(&mut self.spectrum, &mut self.output);
        self.counters.blocks += 1;
        self.output[keep..].to_vec()
    }
}

impl<T: Real> BlockProcessor<T> for OlsEngine<T> {
    fn fft_len(&self) -> usize {
        self.fft_len
    }

    fn block_len(&self) -> usize {
        self.block_len
    }

    fn reset(&mut self) {
        self.ring.fill(T::zero());
        self.pending.clear();
    }

    fn process_block(&mut self, input: &[T]) -> Result<Vec<T>> {
        check_len(self.block_len, input.len())?;
        Ok(self.run_block(input))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::NaiveBlockFilter;
    use crate::spectrum::{assemble_dft_coefficients, dft_coefficients};

    fn pseudo_random(len: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..len)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    fn bins() -> BinSpec {
        BinSpec::new(128, 33, 16, 48, 55).unwrap()
    }

    #[test]
    fn provider_roundtrip() {
        let mut p = RealFftProvider::<f64>::new(64);
        let x = pseudo_random(64, 3);
        let mut buf = x.clone();
        let mut spec = vec![Complex::new(0.0, 0.0); 33];
        p.forward(&mut buf, &mut spec);
        let mut back = vec![0.0; 64];
        p.inverse(&mut spec, &mut back);
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let profile = TransitionProfile::linear_ramp(15);
        let mut e = OlsEngine::new(&bins(), &profile, 50).unwrap();
        let y = e.push(&vec![0.0; 96 * 5]);
        assert_eq!(y.len(), 480);
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_naive_oracle() {
        let bins = bins();
        let profile = TransitionProfile::linear_ramp(15);
        let mut e = OlsEngine::new(&bins, &profile, 52).unwrap();
        let h = dft_coefficients(&bins, &profile, 52).unwrap();
        let mut o = NaiveBlockFilter::new(&h, 96).unwrap();
        for blk in 0..10 {
            let x = pseudo_random(96, blk);
            let a = e.process_block(&x).unwrap();
            let b = o.process_block(&x).unwrap();
            for (u, v) in a.iter().zip(&b) {
                assert!((u - v).abs() < 1e-12);
            }
        }
        assert_eq!(e.counters().variable_mults, 10 * 30);
    }

    #[test]
    fn allpass_table_is_delay() {
        let h = assemble_dft_coefficients(&vec![1.0f64; 128], 33).unwrap();
        let mut e = OlsEngine::with_coefficients(&h, 96).unwrap();
        let x = pseudo_random(500, 9);
        let mut y = e.push(&x);
        y.extend(e.flush());
        assert_eq!(y.len(), 500);
        for t in 0..500 {
            let expected = if t >= 16 { x[t - 16] } else { 0.0 };
            assert!((y[t] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn block_length_checked() {
        let mut e = OlsEngine::new(&bins(), &TransitionProfile::linear_ramp(15), 48).unwrap();
        assert_eq!(
            e.process_block(&[0.0; 95]),
            Err(Error::LengthMismatch {
                expected: 96,
                got: 95
            })
        );
    }

    #[test]
    fn bandwidth_range_enforced() {
        let p = TransitionProfile::<f64>::linear_ramp(15);
        assert!(OlsEngine::new(&bins(), &p, 47).is_err());
        let mut e = OlsEngine::new(&bins(), &p, 48).unwrap();
        assert!(e.set_bandwidth(56).is_err());
        assert_eq!(e.bandwidth(), Some(48));
        e.set_bandwidth(48).unwrap();
        assert_eq!(e.bandwidth(), Some(48));
    }

    #[test]
    fn flush_semantics() {
        let p = TransitionProfile::linear_ramp(15);
        let mut e = OlsEngine::new(&bins(), &p, 48).unwrap();
        e.push(&pseudo_random(192, 1));
        assert!(e.flush().is_empty());
        let mut e = OlsEngine::new(&bins(), &p, 48).unwrap();
        let x = pseudo_random(99, 2);
        let head = e.push(&x);
        assert_eq!(head.len(), 96);
        let tail = e.flush();
        assert_eq!(tail.len(), 3);
        assert!(e.flush().is_empty());
    }
}
