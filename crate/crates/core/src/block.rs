//! Common interface for anything that filters a stream block by block.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A block-wise LPTV filter with the overlap-save framing: `fft_len`-sample
/// frames, `block_len` new samples in and out per call, state primed with
/// zeros on reset.
pub trait BlockProcessor<T: Real> {
    fn fft_len(&self) -> usize;

    fn block_len(&self) -> usize;

    /// Clears all stream state back to the primed (all-zero) condition.
    fn reset(&mut self);

    fn process_block(&mut self, input: &[T]) -> Result<Vec<T>>;
}

/// Runs a whole stream through `proc`, zero-padding the final partial block
/// and truncating the output to the input length. Does not reset first.
pub fn run_stream<T: Real, P: BlockProcessor<T> + ?Sized>(proc: &mut P, input: &[T]) -> Result<Vec<T>> {
    let m = proc.block_len();
    let mut out = Vec::with_capacity(input.len() + m);
    let mut block = vec![T::zero(); m];
    for chunk in input.chunks(m) {
        block[..chunk.len()].copy_from_slice(chunk);
        block[chunk.len()..].fill(T::zero());
        out.extend(proc.process_block(&block)?);
    }
    out.truncate(input.len());
    Ok(out)
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}
