use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid filter specification: {0}")]
    InvalidSpec(String),

    #[error("{quantity} = {value} bins is not on the 2*pi/{fft_len} grid{suggestion}")]
    OffGrid {
        quantity: &'static str,
        value: f64,
        fft_len: usize,
        suggestion: String,
    },

    #[error("transition width of {0} bins is odd")]
    OddTransitionWidth(i64),

    #[error("bin range violated: {0}")]
    BinRange(String),

    #[error("band centre b_N = {b} outside design range [{low}, {high}]")]
    BandOutOfRange { b: i64, low: i64, high: i64 },

    #[error("expected length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("coefficient table is not conjugate symmetric (imaginary residue {0:e})")]
    Asymmetric(f64),

    #[error("no circular shift rule reproduces the measured responses (best deviation {0:e})")]
    ShiftRuleNotFound(f64),

    #[error("system under test is not linear (superposition residue {0:e})")]
    Nonlinear(f64),

    #[error("phase index {index} out of range for period {period}")]
    PhaseOutOfRange { index: usize, period: usize },

    #[error("frequency {0} inside the open transition band")]
    InTransitionBand(f64),

    #[error("FFT length estimate {n} is smaller than filter length {l}; choose N manually")]
    FftTooShort { n: usize, l: usize },

    #[error("affine constraint model disagrees with direct evaluation by {0:e}")]
    AffineMismatch(f64),

    #[error("linear program is {0}")]
    Lp(&'static str),

    #[error("constraint exchange did not converge within {0} rounds")]
    ExchangeDiverged(usize),

    #[error("design loop did not reach the error target (best delta {best:e} at order {order})")]
    NotConverged { best: f64, order: usize },

    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
