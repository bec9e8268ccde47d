//! Transverse self-intersection detection by segment-pair sweep with
//! chart wrapping.

use crate::geodesic_flow::GeodesicTrajectory;
use crate::numeric::Vec2;
use crate::surface::SurfaceMetric;

/// True iff the trajectory has no transverse self-intersection. Adjacent
/// segments (and the closing junction when the endpoints meet) are
/// exempt; near-tangent overlaps below the angle tolerance are not
/// counted as transverse.
pub fn simplicity_check(metric: &SurfaceMetric, traj: &GeodesicTrajectory) -> bool {
    self_intersections(metric, traj, 0.02).is_empty()
}

/// Transverse self-intersection points (chart coordinates) of the sampled
/// trajectory; `angle_tol` is the minimum crossing angle in radians.
pub fn self_intersections(
    metric: &SurfaceMetric,
    traj: &GeodesicTrajectory,
    angle_tol: f64,
) -> Vec<Vec2> {
    let pts: Vec<(f64, Vec2, Vec2)> = traj
        .samples()
        .map(|(t, p)| (t, p.pos, p.vel))
        .collect();
    let n = pts.len();
    let closed = {
        let d = metric.displacement(pts[0].1, pts[n - 1].1).norm();
        d < 1e-6
    };
    let mut out = Vec::new();
    for i in 0..n - 1 {
        for j in i + 2..n - 1 {
            // Skip the closing junction of a closed curve.
            if closed && i == 0 && j == n - 2 {
                continue;
            }
            let a0 = pts[i].1;
            let a1_d = metric.displacement(a0, pts[i + 1].1);
            let b0_d = metric.displacement(a0, pts[j].1);
            if b0_d.norm() > a1_d.norm() + metric.displacement(pts[j].1, pts[j + 1].1).norm() + 0.05
            {
                continue;
            }
            let b1_d = b0_d.add(metric.displacement(pts[j].1, pts[j + 1].1));
            if let Some((fu, _fv)) = seg_intersect(Vec2::new(0.0, 0.0), a1_d, b0_d, b1_d) {
                // Transversality: angle between the two velocities.
                let vi = pts[i].2;
                let vj = pts[j].2;
                let angle = vi.line_angle(vj);
                if angle > angle_tol {
                    let p = Vec2::new(a0.x + fu * a1_d.x, a0.y + fu * a1_d.y);
                    out.push(metric.wrap_point(p));
                }
            }
        }
    }
    out
}

fn seg_intersect(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> Option<(f64, f64)> {
    let r = a1.sub(a0);
    let s = b1.sub(b0);
    let denom = r.cross(s);
    if denom.abs() < 1e-300 {
        return None;
    }
    let q = b0.sub(a0);
    let tu = q.cross(s) / denom;
    let tv = q.cross(r) / denom;
    if (0.0..=1.0).contains(&tu) && (0.0..=1.0).contains(&tv) {
        Some((tu, tv))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic_flow::{integrate_geodesic, PhasePoint};
    use crate::surface::{Bump, Profile, SurfaceMetric};
    use std::f64::consts::PI;

    #[test]
    fn equators_and_torus_lines_are_simple() {
        let m = SurfaceMetric::revolution(Profile::TorusMinor { major: 2.0 }, -10.0, 10.0);
        let eq = integrate_geodesic(
            &m,
            &PhasePoint::from_angle(&m, Vec2::new(0.0, PI), 0.0),
            2.0 * PI,
        )
        .unwrap();
        assert!(simplicity_check(&m, &eq));

        let ft = SurfaceMetric::flat_torus(1.0, 1.0);
        let diag = integrate_geodesic(
            &ft,
            &PhasePoint::from_angle(&ft, Vec2::new(0.0, 0.0), PI / 4.0),
            2f64.sqrt(),
        )
        .unwrap();
        assert!(simplicity_check(&ft, &diag));
    }

    #[test]
    fn bump_deflection_produces_detected_crossing() {
        // A strong bump bends a line on the flat torus; the pre- and
        // post-bump strands have different slopes, and non-parallel
        // strands on a torus must cross.
        let m = SurfaceMetric::flat_torus(1.0, 1.0).with_bumps(vec![Bump {
            center_s: 0.5,
            center_t: 0.5,
            amplitude: 0.35,
            radius: 0.32,
        }]);
        let mut found = false;
        for k in 0..8 {
            let theta = 0.15 + 0.05 * k as f64;
            let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.32), theta);
            if let Ok(traj) = integrate_geodesic(&m, &start, 9.0) {
                if !self_intersections(&m, &traj, 0.02).is_empty() {
                    found = true;
                    break;
                }
            }
        }
        assert!(found, "deflected line should self-cross on the torus");
    }

    #[test]
    fn straight_line_far_from_bump_stays_simple() {
        let m = SurfaceMetric::flat_torus(1.0, 1.0).with_bumps(vec![Bump {
            center_s: 0.5,
            center_t: 0.5,
            amplitude: 0.35,
            radius: 0.25,
        }]);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.05), 0.0);
        let traj = integrate_geodesic(&m, &start, 3.0).unwrap();
        assert!(simplicity_check(&m, &traj));
    }
}
