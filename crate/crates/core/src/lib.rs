//! Quantum pattern-recognition key distribution over lossy bosonic channels.
//!
//! Alice encodes keys as binary patterns of coherent states; Bob decodes them
//! with a pretty-good measurement while an eavesdropper collects the reflected
//! light. This crate evaluates the resulting information quantities and
//! secure-rate hierarchy for target-pattern codes ([`ltpf`]) and for degenerate
//! codes built from image datasets ([`degenerate`]), plus the combinatorics of
//! degenerate pattern spaces ([`combinatorics`]).

pub mod combinatorics;
pub mod degenerate;
pub mod ensemble;
pub mod error;
pub mod info;
pub mod ltpf;
pub mod pattern;
pub mod rates;

pub use ensemble::{GramSpectrum, Priors};
pub use nalgebra::{DMatrix, DVector};
pub use error::{Error, Result};
pub use ltpf::{LocalityPartition, LtpfInformation, LtpfScheme, TpfAssignment};
pub use pattern::{ChannelParams, ImageSpace, Modulation, ModulationKind, Pattern, Side};
pub use rates::{Attack, RatePoint};
