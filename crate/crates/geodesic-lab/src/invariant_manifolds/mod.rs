//! Stable/unstable manifold structure at strictly stable closed
//! geodesics: the section curve Y (trapped directions), the four
//! asymptotic circles of geodesics, tube foliations, the backward
//! asymptotic direction field X₋, linearization probes, and exponential
//! decay data for the distinguished Jacobi fields.

pub mod circles;
pub mod decay;
pub mod foliation;
pub mod linearization;
pub mod section;
pub mod stable_set;
pub mod xfield;

pub use circles::{trace_asymptotic_circle, AsymptoticCircle};
pub use decay::{asymptotic_data_closed, normalize_half_plane, AsymptoticJacobiData};
pub use foliation::{foliation_check, FoliationReport};
pub use linearization::{linearization_probe, LinearizationReport};
pub use section::{Orientation, SectionChart, Side};
pub use stable_set::{stable_set_on_section, StableSectionCurve};
pub use xfield::{x_minus_field, orthogonal_curve, XMinusSample};
