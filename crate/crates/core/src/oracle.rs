//! Brute-force reference implementations.
//!
//! Nothing here touches the FFT backend: every transform is the defining
//! O(N²) sum, accumulated with compensated (Neumaier) summation.

use num_complex::Complex;

use crate::block::{check_len, BlockProcessor};
use crate::error::Result;
use crate::ptvir::PtvirSet;
use crate::scalar::{unit_phasor, Real};
use crate::spectrum::DftCoefficients;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        CompensatedSum {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

pub fn compensated_sum<T: Real>(xs: impl IntoIterator<Item = T>) -> T {
    let mut acc = CompensatedSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// `exp(sign·j·2π·i/N)` for `i = 0..N`.
fn twiddles<T: Real>(n: usize, sign: i64) -> Vec<Complex<T>> {
    (0..n as i64)
        .map(|i| {
            let (c, s) = unit_phasor::<T>(sign * 2 * i, n as i64);
            Complex::new(c, s)
        })
        .collect()
}

fn naive_transform<T: Real>(x: &[Complex<T>], sign: i64) -> Vec<Complex<T>> {
    let n = x.len();
    let w = twiddles::<T>(n, sign);
    (0..n)
        .map(|k| {
            let mut re = CompensatedSum::new();
            let mut im = CompensatedSum::new();
            for (i, xi) in x.iter().enumerate() {
                let p = xi * w[(i * k) % n];
                re.add(p.re);
                im.add(p.im);
            }
            Complex::new(re.value(), im.value())
        })
        .collect()
}

/// Unnormalized forward DFT by direct summation.
pub fn naive_dft<T: Real>(x: &[Complex<T>]) -> Vec<Complex<T>> {
    naive_transform(x, -1)
}

/// Inverse DFT by direct summation, scaled by `1/N`.
pub fn naive_idft<T: Real>(x: &[Complex<T>]) -> Vec<Complex<T>> {
    let scale = T::one() / T::from_usize_exact(x.len());
    naive_transform(x, 1)
        .into_iter()
        .map(|c| c.scale(scale))
        .collect()
}

/// Overlap-save filtering with every transform done by direct summation and
/// no use of spectral symmetry.
#[derive(Debug, Clone)]
pub struct NaiveBlockFilter<T> {
    coeffs: Vec<Complex<T>>,
    block_len: usize,
    ring: Vec<T>,
}

impl<T: Real> NaiveBlockFilter<T> {
    pub fn new(h: &DftCoefficients<T>, block_len: usize) -> Result<Self> {
        let n = h.len();
        if block_len == 0 || block_len > n {
            return Err(crate::Error::LengthMismatch {
                expected: n,
                got: block_len,
            });
        }
        Ok(NaiveBlockFilter {
            coeffs: h.table.clone(),
            block_len,
            ring: vec![T::zero(); n - block_len],
        })
    }

    /// Replaces the coefficient table; applies from the next block on.
    pub fn set_coefficients(&mut self, h: &DftCoefficients<T>) -> Result<()> {
        check_len(self.coeffs.len(), h.len())?;
        self.coeffs = h.table.clone();
        Ok(())
    }
}

impl<T: Real> BlockProcessor<T> for NaiveBlockFilter<T> {
    fn fft_len(&self) -> usize {
        self.coeffs.len()
    }

    fn block_len(&self) -> usize {
        self.block_len
    }

    fn reset(&mut self) {
        self.ring.fill(T::zero());
    }

    fn process_block(&mut self, input: &[T]) -> Result<Vec<T>> {
        check_len(self.block_len, input.len())?;
        let n = self.coeffs.len();
        let frame: Vec<Complex<T>> = self
            .ring
            .iter()
            .chain(input)
            .map(|&x| Complex::new(x, T::zero()))
            .collect();
        let spectrum: Vec<Complex<T>> = naive_dft(&frame)
            .into_iter()
            .zip(&self.coeffs)
            .map(|(x, h)| x * h)
            .collect();
        let y = naive_idft(&spectrum);
        // keep the newest N-M input samples for the next frame
        let keep = n - self.block_len;
        let tail_start = frame.len() - keep;
        self.ring = frame[tail_start..].iter().map(|c| c.re).collect();
        Ok(y[keep..].iter().map(|c| c.re).collect())
    }
}

/// Filters a whole stream with the naive block filter (fresh state).
pub fn naive_block_filter<T: Real>(
    h: &DftCoefficients<T>,
    stream: &[T],
    block_len: usize,
) -> Result<Vec<T>> {
    let mut f = NaiveBlockFilter::new(h, block_len)?;
    crate::block::run_stream(&mut f, stream)
}

/// `y(n) = Σ_q h(q)·x(n-q)` with zero initial conditions; output has the
/// input's length.
pub fn direct_fir_convolution<T: Real>(h: &[T], x: &[T]) -> Vec<T> {
    (0..x.len())
        .map(|t| compensated_sum(h.iter().enumerate().filter(|(q, _)| *q <= t).map(|(q, &hq)| hq * x[t - q])))
        .collect()
}

/// Direct time-varying convolution with the responses of a [`PtvirSet`].
///
/// Output sample `t` at block position `n = t mod M` is
/// `Σ_q d_n(q)·x(t + M - 1 - n - q)`; samples outside the stream are zero.
/// The responses are indexed with the causal `M - 1` output delay folded
/// back, so the output lines up sample for sample with the OLS stream.
pub fn lptv_convolution<T: Real>(set: &PtvirSet<T>, x: &[T]) -> Vec<T> {
    let m = set.block_len as isize;
    let len = x.len() as isize;
    (0..len)
        .map(|t| {
            let n = t % m;
            let row = &set.responses[n as usize];
            compensated_sum(row.iter().enumerate().filter_map(|(q, &d)| {
                let i = t + m - 1 - n - q as isize;
                (0..len).contains(&i).then(|| d * x[i as usize])
            }))
        })
        .collect()
}

/// Time-varying convolution where output block `j` uses `sets[schedule[j]]`.
pub fn lptv_convolution_switched<T: Real>(sets: &[&PtvirSet<T>], schedule: &[usize], x: &[T]) -> Vec<T> {
    let m = sets[0].block_len;
    let len = x.len() as isize;
    (0..x.len())
        .map(|t| {
            let set = sets[schedule[t / m]];
            let n = (t % m) as isize;
            let row = &set.responses[n as usize];
            let t = t as isize;
            compensated_sum(row.iter().enumerate().filter_map(|(q, &d)| {
                let i = t + m as isize - 1 - n - q as isize;
                (0..len).contains(&i).then(|| d * x[i as usize])
            }))
        })
        .collect()
}
