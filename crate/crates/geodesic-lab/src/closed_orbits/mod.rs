//! Closed geodesics: grid-plus-Newton search on flow sections,
//! classification by Poincaré eigendata, simplicity detection, and the
//! continuity probe under bump perturbations.

pub mod finder;
pub mod record;
pub mod simple;
pub mod vary;

pub use finder::{find_closed_geodesics, FinderConfig, SectionSpec};
pub use record::{classify, Classification, ClosedGeodesicRecord};
pub use simple::simplicity_check;
pub use vary::{vary_continuity_probe, VaryProbeReport};
