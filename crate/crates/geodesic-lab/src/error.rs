//! Crate-wide error type.
//!
//! Each variant corresponds to a named failure mode of one of the lab's
//! operations; numerical routines return `Error` rather than panicking so
//! that the CLI can emit structured error reports.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A chart point fell outside the metric's domain.
    #[error("point ({0}, {1}) outside chart domain: {2}")]
    OutsideDomain(f64, f64, String),

    /// Adaptive step-size control underflowed; carries the last good state.
    #[error("integration step underflow at t={t}: {context}")]
    Integration { t: f64, context: String },

    /// Nearest-point projection was requested outside the tube of validity.
    #[error("point at distance {dist} outside projection tube (radius {tube})")]
    OutOfTube { dist: f64, tube: f64 },

    /// A curve could not be written as a normal graph over the base.
    #[error("curve is not graphical over the base geodesic: {0}")]
    NotGraphical(String),

    /// |J| and |J'| both vanished numerically along a transfer path.
    #[error("degenerate Jacobi data at t={0}: |J| and |J'| both below 1e-12")]
    DegenerateField(f64),

    /// Two index computations that must agree disagreed.
    #[error("index methods disagree: {0}")]
    IndexInconsistency(String),

    /// Eigenvalue counts did not stabilize under grid refinement.
    #[error("spectrum unresolved under grid doubling: {0}")]
    UnresolvedSpectrum(String),

    /// A supersolution certificate was structurally invalid.
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    /// A stability criterion pair disagreed; carries the counterexample.
    #[error("stability criteria disagree on a closed geodesic: {0}")]
    StabilityCounterexample(String),

    /// The requested section is too large for the return map to be defined.
    #[error("return map undefined, shrink the section: {0}")]
    ShrinkSection(String),

    /// The requested side of a geodesic is not available in the chart.
    #[error("side unavailable: {0}")]
    UnavailableSide(String),

    /// The foliation check found a gap or a double cover.
    #[error("foliation failure: {0}")]
    FoliationFailure(String),

    /// Lookup outside the foliated region.
    #[error("point not in the foliated region: {0}")]
    OutsideFoliation(String),

    /// A precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The deformation shear was so large the normal chart folded.
    #[error("deformation chart folds at w={0}: {1}")]
    DeformationFold(f64, String),

    /// A quantitative deformation estimate failed.
    #[error("deformation estimate violated: {0}")]
    EstimateViolation(String),

    /// Every sampled deformation parameter failed to restore transversality.
    #[error("restorer exhausted its parameter grid: {0}")]
    RestorerExhausted(String),

    /// A trap-region certificate failed; carries the offending piece.
    #[error("trap violation on piece [{a}, {b}]: {context}")]
    TrapViolation { a: f64, b: f64, context: String },

    /// A crossing count kept growing under refinement.
    #[error("crossing count unresolved under refinement: {0}")]
    UnresolvedCount(String),

    /// A piece of a long geodesic matched no leaf of the lamination model.
    #[error("decomposition failure on arc [{a}, {b}]: {context}")]
    DecompositionFailure { a: f64, b: f64, context: String },

    /// An invalid cavity choice (e.g. Power with k = 0).
    #[error("invalid word-rule choice: {0}")]
    InvalidChoice(String),

    /// Not enough of an infinite word was available.
    #[error("insufficient word data: need {need} letters, have {have}")]
    InsufficientData { need: usize, have: usize },

    /// Configuration file problems.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
