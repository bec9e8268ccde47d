//! A numerical laboratory for the dynamics of simple geodesics on surfaces.
//!
//! The crate builds chart-based metrics from three families (flat tori,
//! surfaces of revolution, Fermi strips), integrates unit-speed geodesics
//! and the Jacobi equation along them, and layers progressively more
//! structure on top:
//!
//! - relative Poincaré (transfer) matrices in SL(2,R), zero/crossing counts,
//!   Morse index and nullity of segments and closed geodesics ([`jacobi`]),
//! - a closed-geodesic finder with eigenvalue classification
//!   ([`closed_orbits`]),
//! - stable/unstable manifold sections, asymptotic circles of geodesics and
//!   tube foliations at strictly stable orbits ([`invariant_manifolds`]),
//! - bounded-Jacobi-field detection, heteroclinic search, localized metric
//!   deformations and a transversality restorer ([`ks`]),
//! - trap-region certificates bounding zero counts of Jacobi fields along
//!   long geodesics shadowing a lamination ([`index_bound`]),
//! - the free-group word calculus of curves carried on a train track
//!   ([`traintrack`]).
//!
//! Every runnable capability has an example under `examples/`; the thin
//! `geodesic-lab` binary exposes the same experiments as subcommands driven
//! by TOML config files (see [`cli`]).

pub mod cli;
pub mod closed_orbits;
pub mod error;
pub mod geodesic_flow;
pub mod index_bound;
pub mod invariant_manifolds;
pub mod jacobi;
pub mod ks;
pub mod numeric;
pub mod report;
pub mod surface;
pub mod traintrack;

pub use error::{Error, Result};
