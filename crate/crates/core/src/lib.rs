//! Constant-modulus NLFM pulse design.
//!
//! Two synthesis routes share one discretization:
//!
//! * [`stationary_phase`] builds the group delay of a spectral window, inverts
//!   it to a frequency law and integrates that into the pulse phase.
//! * [`optimizer`] refines a spectral phase by alternating the closed-form
//!   unit-modulus least-squares step with a phase update, tracking the
//!   minimum residual error after every iteration.
//!
//! [`metrics`] measures the autocorrelation peak sidelobe level of the result
//! and [`pipeline`] drives batches of designs and writes result files.

pub mod error;
pub mod exec;
pub mod metrics;
pub mod optimizer;
pub mod pipeline;
pub mod special;
pub mod spectral;
pub mod stationary_phase;
pub mod windows;

pub use error::{Error, Result};
pub use exec::Execution;
pub use metrics::{autocorrelation, peak_sidelobe_level, Acf, PslStatus, SidelobeReport};
pub use optimizer::{OptimizerConfig, OptimizerTrace, OutOfBand, StopReason};
pub use spectral::{BandMagnitude, DesignGrid, Spectral};
pub use stationary_phase::{synthesize_spm, GroupDelayTable, NlfmSignal};
pub use windows::{evaluate_window, SampledWindow, WindowKind, WindowSpec};

pub use num_complex::Complex64;
