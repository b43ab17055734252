//! Exact p-adic step functions, Haar integration, characters of Z_p, and
//! L2 approximation by lifted character sums on Q_p.
//!
//! The pipeline: truncated p-adic arithmetic with explicit digit windows
//! ([`padic`]), locally constant functions as ball/value maps ([`step`]),
//! exact-rational Haar measure ([`haar`]), Fourier analysis on the unit
//! ball ([`character`]), and the coset-glued approximation with its error
//! reports ([`approx`]). The [`cli`] module drives batch experiments.

pub mod approx;
pub mod character;
pub mod cli;
pub mod error;
pub mod haar;
pub mod padic;
pub mod step;

pub use approx::{
    approximate, approximate_at_level, approximate_piece, coset_decompose, membership_check,
    ApproxReport, CosetPiece,
};
pub use character::{
    characters_up_to_level, fast_transform, fourier_all, fourier_coefficient, fourier_truncate,
    Character, FourierCoefficients,
};
pub use cli::{
    generate, generate_seeded, parse_spec, ExperimentConfig, FunctionSpec, Mode, OutputFormat,
};
pub use error::{Error, Result};
pub use haar::{uniqueness_ratio, HaarMeasure};
pub use padic::{coset_reps, Ball, PAdicApprox, Prime};
pub use step::{PointwiseOp, StepFunction};
