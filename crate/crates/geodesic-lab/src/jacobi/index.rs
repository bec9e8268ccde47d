//! Morse index and nullity, each computed by two independent routes:
//! conjugate-point counts of the Jacobi flow versus eigenvalue counts of
//! the discretized operator -(d²/dt² + K) (Sturm inertia), with grid
//! doubling and Richardson extrapolation guarding the near-zero
//! eigenvalues.

use super::transfer::TransferPath;
use crate::error::{Error, Result};
use crate::geodesic_flow::GeodesicTrajectory;
use crate::numeric::sturm::{Boundary, SchrodingerDiscretization};
use crate::numeric::Vec2;
use crate::surface::SurfaceMetric;
use serde::Serialize;

fn curvature_samples(
    metric: &SurfaceMetric,
    traj: &GeodesicTrajectory,
    t1: f64,
    t2: f64,
    n: usize,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Dirichlet: interior nodes; periodic: left-closed uniform grid.
        let t = match boundary {
            Boundary::Dirichlet => t1 + (t2 - t1) * (i + 1) as f64 / (n + 1) as f64,
            Boundary::Periodic => t1 + (t2 - t1) * i as f64 / n as f64,
        };
        let p = traj.state_at(t);
        out.push(metric.curvature_at(p.pos)?);
    }
    Ok(out)
}

/// Segment (Dirichlet) index report: both routes and the agreed value.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentIndexReport {
    pub index: usize,
    pub conjugate_points: Vec<f64>,
    pub eigenvalue_count: usize,
    pub grid: usize,
}

/// Morse index of the segment [t1, t2] with fixed endpoints: the number of
/// conjugate points in (t1, t2), cross-checked against the negative
/// eigenvalue count of the Dirichlet discretization. Disagreement after
/// refinement is an error.
pub fn segment_index(
    metric: &SurfaceMetric,
    traj: &GeodesicTrajectory,
    t1: f64,
    t2: f64,
) -> Result<SegmentIndexReport> {
    // Route 1: zeros in (t1, t2) of the Jacobi field with J(t1)=0, J'(t1)=1.
    let path = TransferPath::over(metric, traj, t1, t2)?;
    let eps = 1e-9 * (t2 - t1);
    let crossings = path.crossings(Vec2::new(0.0, 1.0), t1, t2 - eps)?;
    let conjugate_points: Vec<f64> = crossings.iter().map(|c| c.t).collect();

    // Route 2: Dirichlet eigenvalue count, stable under doubling.
    let mut grid = 1024usize;
    let mut count = None;
    for _ in 0..3 {
        let k1 = curvature_samples(metric, traj, t1, t2, grid, Boundary::Dirichlet)?;
        let h1 = (t2 - t1) / (grid + 1) as f64;
        let op1 = SchrodingerDiscretization::new(&k1, h1, Boundary::Dirichlet);
        let c1 = op1.count_below(0.0);
        let k2 = curvature_samples(metric, traj, t1, t2, 2 * grid, Boundary::Dirichlet)?;
        let h2 = (t2 - t1) / (2 * grid + 1) as f64;
        let op2 = SchrodingerDiscretization::new(&k2, h2, Boundary::Dirichlet);
        let c2 = op2.count_below(0.0);
        if c1 == c2 {
            count = Some(c1);
            break;
        }
        grid *= 2;
    }
    let eigenvalue_count =
        count.ok_or_else(|| Error::UnresolvedSpectrum("Dirichlet count unstable".into()))?;

    if eigenvalue_count != conjugate_points.len() {
        return Err(Error::IndexInconsistency(format!(
            "conjugate points {} vs eigenvalue count {} on [{t1}, {t2}]",
            conjugate_points.len(),
            eigenvalue_count
        )));
    }
    Ok(SegmentIndexReport {
        index: eigenvalue_count,
        conjugate_points,
        eigenvalue_count,
        grid,
    })
}

/// Index/nullity of a closed geodesic with the low spectrum attached.
#[derive(Debug, Clone, Serialize)]
pub struct ClosedIndex {
    pub index: usize,
    pub nullity: usize,
    /// Richardson-extrapolated eigenvalues below the reporting cap.
    pub spectrum: Vec<f64>,
    pub tolerance: f64,
    pub grid: usize,
}

/// Morse index and nullity of a closed geodesic: eigenvalues of the
/// periodic operator (convention L φ + λ φ = 0). The index counts
/// λ < -tol, the nullity |λ| ≤ tol with tol = 1e-6·max(1, |K|∞); both
/// must be stable across two grid doublings.
pub fn closed_index(metric: &SurfaceMetric, traj: &GeodesicTrajectory) -> Result<ClosedIndex> {
    let (t1, t2) = (traj.t_start(), traj.t_end());
    let mut k_max: f64 = 0.0;
    for i in 0..128 {
        let t = t1 + (t2 - t1) * i as f64 / 128.0;
        k_max = k_max.max(metric.curvature_at(traj.state_at(t).pos)?.abs());
    }
    let tol = 1e-6 * k_max.max(1.0);
    let cap = 3.0 * (1.0 + k_max);

    let spectrum_at = |n: usize| -> Result<Vec<f64>> {
        let k = curvature_samples(metric, traj, t1, t2, n, Boundary::Periodic)?;
        let h = (t2 - t1) / n as f64;
        let op = SchrodingerDiscretization::new(&k, h, Boundary::Periodic);
        Ok(op.eigenvalues_below(cap))
    };

    let n0 = 1024usize;
    let s1 = spectrum_at(n0)?;
    let s2 = spectrum_at(2 * n0)?;
    let s3 = spectrum_at(4 * n0)?;
    let extrap = |coarse: &[f64], fine: &[f64]| -> Vec<f64> {
        fine.iter()
            .zip(coarse)
            .map(|(f, c)| (4.0 * f - c) / 3.0)
            .collect()
    };
    let e12 = extrap(&s1, &s2);
    let e23 = extrap(&s2, &s3);
    let counts = |evs: &[f64]| {
        let idx = evs.iter().filter(|l| **l < -tol).count();
        let nul = evs.iter().filter(|l| l.abs() <= tol).count();
        (idx, nul)
    };
    let (i12, n12) = counts(&e12);
    let (i23, n23) = counts(&e23);
    if (i12, n12) != (i23, n23) {
        return Err(Error::UnresolvedSpectrum(format!(
            "(index, nullity) = ({i12}, {n12}) at {n0}→{} vs ({i23}, {n23}) at {}→{}",
            2 * n0,
            2 * n0,
            4 * n0
        )));
    }
    Ok(ClosedIndex {
        index: i23,
        nullity: n23,
        spectrum: e23,
        tolerance: tol,
        grid: 4 * n0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic_flow::{integrate_geodesic, PhasePoint};
    use crate::surface::Profile;
    use std::f64::consts::PI;

    fn sphere_equator(len: f64) -> (SurfaceMetric, GeodesicTrajectory) {
        let m = SurfaceMetric::revolution(Profile::Sphere, 1e-3, PI - 1e-3);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, PI / 2.0), 0.0);
        let traj = integrate_geodesic(&m, &start, len).unwrap();
        (m, traj)
    }

    #[test]
    fn flat_segment_has_index_zero() {
        let m = SurfaceMetric::flat_torus(1.0, 1.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.2), 0.0);
        let traj = integrate_geodesic(&m, &start, 3.0).unwrap();
        let r = segment_index(&m, &traj, 0.0, 3.0).unwrap();
        assert_eq!(r.index, 0);
    }

    #[test]
    fn unit_curvature_segment_indices() {
        let (m, traj) = sphere_equator(2.5 * PI + 0.05);
        let r1 = segment_index(&m, &traj, 0.0, 1.5 * PI).unwrap();
        assert_eq!(r1.index, 1);
        assert!((r1.conjugate_points[0] - PI).abs() < 1e-7);
        let r2 = segment_index(&m, &traj, 0.0, 2.5 * PI).unwrap();
        assert_eq!(r2.index, 2);
    }

    #[test]
    fn sphere_great_circle_spectrum() {
        let (m, traj) = sphere_equator(2.0 * PI);
        let ci = closed_index(&m, &traj).unwrap();
        assert_eq!(ci.index, 1);
        assert_eq!(ci.nullity, 2);
        // Eigenvalues m² - 1 resolved to 1e-4.
        assert!((ci.spectrum[0] + 1.0).abs() < 1e-4);
        assert!(ci.spectrum[1].abs() < 1e-4 && ci.spectrum[2].abs() < 1e-4);
        assert!((ci.spectrum[3] - 3.0).abs() < 1e-4);
    }

    #[test]
    fn catenoid_waist_strictly_stable_spectrum() {
        let m = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.0), 0.0);
        let traj = integrate_geodesic(&m, &start, 2.0 * PI).unwrap();
        let ci = closed_index(&m, &traj).unwrap();
        assert_eq!((ci.index, ci.nullity), (0, 0));
        // Eigenvalues m² + 1.
        assert!((ci.spectrum[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn torus_outer_equator_index_three() {
        let m = SurfaceMetric::revolution(Profile::TorusMinor { major: 2.0 }, -10.0, 10.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.0), 0.0);
        let traj = integrate_geodesic(&m, &start, 6.0 * PI).unwrap();
        let ci = closed_index(&m, &traj).unwrap();
        assert_eq!((ci.index, ci.nullity), (3, 0));
        // Eigenvalues (n/3)² - 1/3.
        assert!((ci.spectrum[0] + 1.0 / 3.0).abs() < 1e-4);
        assert!((ci.spectrum[1] - (1.0 / 9.0 - 1.0 / 3.0)).abs() < 1e-4);
    }
}
