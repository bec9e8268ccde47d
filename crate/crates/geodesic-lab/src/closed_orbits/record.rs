//! Closed geodesic records: one period of trajectory plus Poincaré
//! eigendata, classification, Morse index/nullity, and a measured tube
//! radius.

use crate::error::{Error, Result};
use crate::geodesic_flow::{
    integrate_geodesic, measured_tube_radius, project_to_curve, GeodesicTrajectory, PhasePoint,
    Projection,
};
use crate::jacobi::{closed_index, relative_poincare, TransferMatrix};
use crate::numeric::Vec2;
use crate::surface::SurfaceMetric;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    StrictlyStable,
    HyperbolicUnstable,
    Elliptic,
    Degenerate,
}

/// Classifies from eigendata and spectral counts. Degenerate when 1 is an
/// eigenvalue within tolerance or the nullity is positive; strictly stable
/// requires real eigenvalues 0 < λ < 1 < 1/λ with index and nullity zero.
pub fn classify(
    eigenvalues: [(f64, f64); 2],
    index: usize,
    nullity: usize,
    tol: f64,
) -> Classification {
    let near_one = eigenvalues
        .iter()
        .any(|(re, im)| im.abs() < tol && (re - 1.0).abs() < tol);
    if nullity > 0 || near_one {
        return Classification::Degenerate;
    }
    if eigenvalues[0].1.abs() > tol {
        return Classification::Elliptic;
    }
    let lambda = eigenvalues[0].0;
    if lambda > 0.0 && lambda < 1.0 && index == 0 && nullity == 0 {
        Classification::StrictlyStable
    } else {
        Classification::HyperbolicUnstable
    }
}

#[derive(Debug, Clone)]
pub struct ClosedGeodesicRecord {
    pub trajectory: GeodesicTrajectory,
    pub length: f64,
    pub poincare: TransferMatrix,
    /// Eigenvalues as (re, im), contracting first for real spectra.
    pub eigenvalues: [(f64, f64); 2],
    pub classification: Classification,
    pub index: usize,
    pub nullity: usize,
    pub tube_radius: f64,
    /// Phase-space gap between the period endpoints.
    pub closure_gap: f64,
}

impl ClosedGeodesicRecord {
    /// Builds the record from a closing start state and period; fails when
    /// the orbit does not close within 1e-8 in phase space.
    pub fn new(metric: &SurfaceMetric, start: &PhasePoint, length: f64) -> Result<Self> {
        let trajectory = integrate_geodesic(metric, start, length)?;
        let end = trajectory.end_state();
        let closure_gap = start.distance(metric, &end);
        if closure_gap > 1e-8 {
            return Err(Error::Precondition(format!(
                "orbit does not close: phase gap {closure_gap:.3e}"
            )));
        }
        let poincare = relative_poincare(metric, &trajectory, 0.0, length)?;
        let eigenvalues = poincare.m.eigenvalues();
        let ci = closed_index(metric, &trajectory)?;
        let classification = classify(eigenvalues, ci.index, ci.nullity, ci.tolerance.max(1e-7));
        let tube_radius = measured_tube_radius(metric, &trajectory, true);
        Ok(ClosedGeodesicRecord {
            trajectory,
            length,
            poincare,
            eigenvalues,
            classification,
            index: ci.index,
            nullity: ci.nullity,
            tube_radius,
            closure_gap,
        })
    }

    pub fn start_state(&self) -> PhasePoint {
        self.trajectory.start_state()
    }

    /// Nearest-point projection onto this closed geodesic (foot parameter
    /// modulo the length, signed height along the unit normal).
    pub fn project(&self, metric: &SurfaceMetric, x: Vec2) -> Result<Projection> {
        project_to_curve(metric, &self.trajectory, true, x, self.tube_radius)
    }

    /// Signed height of a point over the geodesic, using the tube radius
    /// stored on the record.
    pub fn height_of(&self, metric: &SurfaceMetric, x: Vec2) -> Result<f64> {
        Ok(self.project(metric, x)?.height)
    }

    /// Whether `state` lies on this record's trajectory within `tol`
    /// (phase-space distance, time-shift equivalence).
    pub fn contains_state(&self, metric: &SurfaceMetric, state: &PhasePoint, tol: f64) -> bool {
        let mut best = f64::INFINITY;
        let mut best_t = 0.0;
        for (t, p) in self.trajectory.samples() {
            let d = state.distance(metric, &p);
            if d < best {
                best = d;
                best_t = t;
            }
        }
        if best < tol {
            return true;
        }
        // Refine around the best sample.
        let mut lo = best_t - 0.2;
        let mut hi = best_t + 0.2;
        for _ in 0..40 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            let d1 = state.distance(metric, &self.trajectory.state_at(m1));
            let d2 = state.distance(metric, &self.trajectory.state_at(m2));
            if d1 < d2 {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let t = 0.5 * (lo + hi);
        state.distance(metric, &self.trajectory.state_at(t)) < tol
    }

    /// Export row matching the records JSON-lines schema.
    pub fn export_row(&self) -> serde_json::Value {
        let s = self.start_state();
        serde_json::json!({
            "length": self.length,
            "eigenvalues": self.eigenvalues,
            "classification": self.classification,
            "index": self.index,
            "nullity": self.nullity,
            "start": { "pos": [s.pos.x, s.pos.y], "vel": [s.vel.x, s.vel.y] },
            "tube_radius": self.tube_radius,
            "closure_gap": self.closure_gap,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Profile;
    use std::f64::consts::PI;

    #[test]
    fn torus_inner_equator_strictly_stable() {
        let m = SurfaceMetric::revolution(Profile::TorusMinor { major: 2.0 }, -10.0, 10.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, PI), 0.0);
        let rec = ClosedGeodesicRecord::new(&m, &start, 2.0 * PI).unwrap();
        assert_eq!(rec.classification, Classification::StrictlyStable);
        let expected = (2.0 * PI).exp();
        assert!((rec.eigenvalues[1].0 - expected).abs() / expected < 1e-4);
        assert!((rec.eigenvalues[0].0 - 1.0 / expected).abs() * expected < 1e-4);
        assert_eq!((rec.index, rec.nullity), (0, 0));
    }

    #[test]
    fn torus_outer_equator_elliptic_index_three() {
        let m = SurfaceMetric::revolution(Profile::TorusMinor { major: 2.0 }, -10.0, 10.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.0), 0.0);
        let rec = ClosedGeodesicRecord::new(&m, &start, 6.0 * PI).unwrap();
        assert_eq!(rec.classification, Classification::Elliptic);
        assert_eq!(rec.index, 3);
        assert_eq!(rec.nullity, 0);
    }

    #[test]
    fn flat_torus_circle_degenerate() {
        let m = SurfaceMetric::flat_torus(1.0, 1.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.4), 0.0);
        let rec = ClosedGeodesicRecord::new(&m, &start, 1.0).unwrap();
        assert_eq!(rec.classification, Classification::Degenerate);
        assert!(rec.nullity > 0);
    }

    #[test]
    fn eigenvalue_product_is_unit() {
        let m = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.0), 0.0);
        let rec = ClosedGeodesicRecord::new(&m, &start, 2.0 * PI).unwrap();
        assert!(rec.poincare.det_defect() < 1e-8);
    }
}
