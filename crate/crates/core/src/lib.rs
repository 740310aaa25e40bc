//! Variable-bandwidth FIR filtering in the frequency domain.
//!
//! A lowpass filter is realized by overlap-save fast convolution whose DFT
//! coefficients are fixed to one in the passband, zero in the stopband and
//! to an optimized real profile `V(r)` across a transition band of
//! constant width. Moving the band edge only moves where the profile is
//! placed, so retuning performs no arithmetic.
//!
//! Module map:
//! - [`spectrum`]: specifications, bin layout, coefficient tables.
//! - [`engine`]: the streaming overlap-save filter.
//! - [`ptvir`]: periodically time-varying impulse responses, error analysis.
//! - [`minimax`]: order loop and cutting-plane minimax design.
//! - [`simplex`]: the LP solver behind it.
//! - [`oracle`]: slow reference implementations.
//! - [`complexity`]: operation-count model.
//! - [`artifact`]: file formats.

pub mod artifact;
pub mod block;
pub mod complexity;
pub mod engine;
pub mod error;
pub mod instrument;
pub mod minimax;
pub mod oracle;
pub mod ptvir;
pub mod scalar;
pub mod simplex;
pub mod spectrum;

pub use artifact::DesignArtifact;
pub use block::{run_stream, BlockProcessor};
pub use engine::OlsEngine;
pub use error::{Error, Result};
pub use minimax::{design, DesignOptions};
pub use scalar::Real;
pub use spectrum::{BinSpec, FilterSpec, TransitionProfile};

pub type Engine = engine::OlsEngine<f64>;
pub type Spec = spectrum::FilterSpec<f64>;
pub type Profile = spectrum::TransitionProfile<f64>;
pub type Design = minimax::DesignResult<f64>;
pub type Ptvir = ptvir::PtvirSet<f64>;
pub type Grid = ptvir::FrequencyGrid<f64>;
