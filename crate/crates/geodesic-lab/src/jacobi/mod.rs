//! The Jacobi equation along geodesics: relative Poincaré (transfer)
//! matrices in SL(2,R), zero/crossing counting with the clockwise rule,
//! Morse index and nullity via two independent routes, and positive
//! supersolution certificates for stability.

pub mod certificates;
pub mod index;
pub mod transfer;

pub use certificates::{
    supersolution_certificate, transported_certificate, CertificateReport,
};
pub use index::{closed_index, segment_index, ClosedIndex, SegmentIndexReport};
pub use transfer::{
    count_crossings, relative_poincare, Crossing, JacobiState, TransferMatrix, TransferPath,
};

use crate::error::{Error, Result};
use crate::geodesic_flow::GeodesicTrajectory;
use crate::surface::SurfaceMetric;

/// Checks the two stability criteria for a closed geodesic and returns the
/// shared verdict: index zero if and only if no Jacobi field acquires two
/// zeros on the universal cover (probed over ten periods and a direction
/// sweep). Disagreement is a counterexample artifact.
pub fn stability_equivalence_check(
    metric: &SurfaceMetric,
    traj: &GeodesicTrajectory,
) -> Result<bool> {
    let spectral = closed_index(metric, traj)?;
    let stable_spectral = spectral.index == 0;

    let periods = 10.0;
    let path = TransferPath::over_closed(metric, traj, periods)?;
    let mut max_zeros = 0usize;
    let sweep = 360;
    for k in 0..sweep {
        let theta = std::f64::consts::PI * k as f64 / sweep as f64;
        let v = crate::numeric::Vec2::new(theta.cos(), theta.sin());
        let crossings = path.crossings(v, 0.0, path.t_end())?;
        max_zeros = max_zeros.max(crossings.len() + usize::from(theta.cos().abs() < 1e-15));
    }
    let stable_sweep = max_zeros <= 1;

    if stable_spectral != stable_sweep {
        return Err(Error::StabilityCounterexample(format!(
            "spectral index {} (stable={}) vs sweep max zeros {} over {periods} periods \
             (stable={})",
            spectral.index, stable_spectral, max_zeros, stable_sweep
        )));
    }
    Ok(stable_spectral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic_flow::{integrate_geodesic, PhasePoint};
    use crate::numeric::Vec2;
    use crate::surface::Profile;
    use std::f64::consts::PI;

    #[test]
    fn catenoid_waist_is_stable_both_ways() {
        let m = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.0), 0.0);
        let waist = integrate_geodesic(&m, &start, 2.0 * PI).unwrap();
        assert!(stability_equivalence_check(&m, &waist).unwrap());
    }

    #[test]
    fn sphere_great_circle_is_unstable_both_ways() {
        let m = SurfaceMetric::revolution(Profile::Sphere, 1e-3, PI - 1e-3);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, PI / 2.0), 0.0);
        let eq = integrate_geodesic(&m, &start, 2.0 * PI).unwrap();
        assert!(!stability_equivalence_check(&m, &eq).unwrap());
    }

    #[test]
    fn flat_torus_circle_is_stable_with_no_two_zero_field() {
        let m = SurfaceMetric::flat_torus(1.0, 1.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.5), 0.0);
        let circle = integrate_geodesic(&m, &start, 1.0).unwrap();
        assert!(stability_equivalence_check(&m, &circle).unwrap());
    }
}
