//! Nearest-point projection onto a geodesic and measured tube radii.
//!
//! The projection minimizes squared chart distance (with wrapping) by a
//! guarded Newton iteration seeded at the nearest stored sample; the
//! signed height pairs the chart displacement with the unit normal at the
//! foot. Parallels of Fermi metrics take an exact fast path.

use super::GeodesicTrajectory;
use crate::error::{Error, Result};
use crate::numeric::Vec2;
use crate::surface::SurfaceMetric;

#[derive(Debug, Clone, Copy)]
pub struct Projection {
    /// Arclength parameter of the foot on the base trajectory.
    pub foot_t: f64,
    /// Signed height along the unit normal of the base at the foot.
    pub height: f64,
}

/// Projects x onto the trajectory. For `closed` trajectories the foot
/// parameter is taken modulo the length. Errors with [`Error::OutOfTube`]
/// when the distance exceeds `tube`.
pub fn project_to_curve(
    metric: &SurfaceMetric,
    traj: &GeodesicTrajectory,
    closed: bool,
    x: Vec2,
    tube: f64,
) -> Result<Projection> {
    // Exact fast path for Fermi parallels: the normal geodesics are the
    // meridians, so the foot shares the s-coordinate with x.
    if let Some(par) = traj.parallel_data() {
        let height = x.y - par.t0;
        if height.abs() > tube {
            return Err(Error::OutOfTube {
                dist: height.abs(),
                tube,
            });
        }
        let half = metric.s_period() / 2.0;
        let mut ds = (x.x - par.s_start).rem_euclid(metric.s_period());
        if !closed && ds > half {
            ds -= metric.s_period();
        }
        // Arclength along the parallel: dτ = f0·ds, oriented by s-speed.
        let mut foot_t = ds * par.f0 * par.s_speed.signum();
        let len = traj.length();
        if closed {
            foot_t = foot_t.rem_euclid(len);
        } else if foot_t < traj.t_start() || foot_t > traj.t_end() {
            return Err(Error::OutOfTube {
                dist: height.abs(),
                tube,
            });
        }
        // Height sign: unit normal of the parallel is rotate90(vel); for
        // positive s-speed that is +∂t.
        let signed = height * par.s_speed.signum();
        return Ok(Projection {
            foot_t,
            height: signed,
        });
    }

    let len = traj.length();
    // Seed at the nearest sample.
    let mut best_t = traj.t_start();
    let mut best_d = f64::INFINITY;
    for (t, p) in traj.samples() {
        let d = metric.displacement(p.pos, x).norm();
        if d < best_d {
            best_d = d;
            best_t = t;
        }
    }
    if best_d > tube * 1.5 {
        return Err(Error::OutOfTube {
            dist: best_d,
            tube,
        });
    }
    let eval = |t: f64| {
        let tt = if closed {
            traj.t_start() + (t - traj.t_start()).rem_euclid(len)
        } else {
            t.clamp(traj.t_start(), traj.t_end())
        };
        traj.state_at(tt)
    };
    // Newton on φ(t) = <γ(t) - x, γ'(t)> with finite-difference φ'.
    let phi = |t: f64| {
        let p = eval(t);
        let d = metric.displacement(x, p.pos);
        d.dot(p.vel)
    };
    let mut t = best_t;
    let h = 1e-6;
    for _ in 0..60 {
        let f0 = phi(t);
        if f0.abs() < 1e-13 {
            break;
        }
        let d1 = (phi(t + h) - phi(t - h)) / (2.0 * h);
        if d1.abs() < 1e-14 {
            break;
        }
        let mut step = -f0 / d1;
        // Guard against hops larger than the sample spacing.
        step = step.clamp(-0.25, 0.25);
        t += step;
        if step.abs() < 1e-13 {
            break;
        }
    }
    let foot_t = if closed {
        traj.t_start() + (t - traj.t_start()).rem_euclid(len)
    } else {
        t.clamp(traj.t_start(), traj.t_end())
    };
    let foot = eval(foot_t);
    let disp = metric.displacement(foot.pos, x);
    let dist = metric.norm(foot.pos, disp);
    if dist > tube {
        return Err(Error::OutOfTube { dist, tube });
    }
    let n = metric.rotate90(foot.pos, foot.vel);
    let height = metric.inner(foot.pos, disp, n);
    Ok(Projection {
        foot_t,
        height,
    })
}

/// Largest tube radius (from a fixed ladder) on which projection is
/// single-valued over a sample grid; a measured quantity, not a bound.
pub fn measured_tube_radius(
    metric: &SurfaceMetric,
    traj: &GeodesicTrajectory,
    closed: bool,
) -> f64 {
    let (t_min, t_max) = metric.t_range();
    let mut cap: f64 = 0.45 * metric.s_period();
    if !metric.t_periodic() {
        for (_, p) in traj.samples() {
            cap = cap.min((p.pos.y - t_min).abs()).min((t_max - p.pos.y).abs());
        }
    }
    let len = traj.length();
    'ladder: for k in 0..10 {
        let delta = cap * 0.9f64.powi(k) * 0.9;
        if delta <= 0.0 {
            continue;
        }
        for i in 0..24 {
            let t = traj.t_start() + len * i as f64 / 24.0;
            let p = traj.state_at(t);
            let n = metric.rotate90(p.pos, p.vel);
            for side in [-1.0, 1.0] {
                let q = Vec2::new(p.pos.x + side * delta * n.x, p.pos.y + side * delta * n.y);
                if !metric.contains(q) {
                    continue 'ladder;
                }
                match project_to_curve(metric, traj, closed, q, delta * 1.5) {
                    Ok(pr) => {
                        if (pr.height.abs() - delta).abs() > 0.2 * delta {
                            continue 'ladder;
                        }
                    }
                    Err(_) => continue 'ladder,
                }
            }
        }
        return delta;
    }
    cap * 0.9f64.powi(9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic_flow::{integrate_geodesic, PhasePoint};
    use crate::surface::Profile;

    #[test]
    fn flat_torus_projection_is_exact() {
        let m = SurfaceMetric::flat_torus(1.0, 1.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.0), 0.0);
        let gamma = integrate_geodesic(&m, &start, 1.0).unwrap();
        let pr = project_to_curve(&m, &gamma, true, Vec2::new(0.3, 0.1), 0.4).unwrap();
        assert!((pr.foot_t - 0.3).abs() < 1e-12);
        assert!((pr.height - 0.1).abs() < 1e-12);
    }

    #[test]
    fn point_on_curve_has_zero_height() {
        let m = SurfaceMetric::revolution(Profile::TorusMinor { major: 2.0 }, -50.0, 50.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.4, 0.5), 0.8);
        let gamma = integrate_geodesic(&m, &start, 2.0).unwrap();
        let q = gamma.state_at(1.3);
        let pr = project_to_curve(&m, &gamma, false, q.pos, 0.3).unwrap();
        assert!(pr.height.abs() < 1e-9);
        assert!((pr.foot_t - 1.3).abs() < 1e-6);
    }

    #[test]
    fn out_of_tube_is_an_error() {
        let m = SurfaceMetric::flat_torus(1.0, 1.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.0), 0.0);
        let gamma = integrate_geodesic(&m, &start, 1.0).unwrap();
        let e = project_to_curve(&m, &gamma, true, Vec2::new(0.2, 0.4), 0.1);
        assert!(matches!(e, Err(Error::OutOfTube { .. })));
    }

    #[test]
    fn nearly_parallel_projection_contracts_little() {
        // dΠ on a nearby geodesic stays within ψ(δ) of 1, decreasing in δ.
        let m = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
        let waist = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.0), 0.0);
        let gamma = integrate_geodesic(&m, &waist, 2.0 * std::f64::consts::PI).unwrap();
        let mut last_psi = f64::INFINITY;
        for delta in [0.3, 0.15, 0.075] {
            let start = PhasePoint::from_angle(&m, Vec2::new(0.3, delta * 0.8), 0.0);
            let nearby = integrate_geodesic(&m, &start, 1.0).unwrap();
            let mut psi: f64 = 0.0;
            let mut prev: Option<(f64, f64)> = None;
            for i in 0..=20 {
                let t = i as f64 / 20.0;
                let p = nearby.state_at(t);
                let pr = project_to_curve(&m, &gamma, true, p.pos, 0.5).unwrap();
                if let Some((t_prev, foot_prev)) = prev {
                    let dfoot = (pr.foot_t - foot_prev).abs();
                    let darc = t - t_prev;
                    psi = psi.max((dfoot / darc - 1.0).abs());
                }
                prev = Some((t, pr.foot_t));
            }
            assert!(psi < last_psi + 1e-9, "ψ should decrease with δ");
            assert!(psi < 0.2, "nearly parallel: ψ = {psi}");
            last_psi = psi;
        }
    }
}
