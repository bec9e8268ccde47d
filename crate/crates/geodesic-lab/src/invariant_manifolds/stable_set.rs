//! The stable set Y on a section: a point lies on Y exactly when all its
//! forward returns stay in the section tube. Realized by bisection on the
//! angular coordinate per position sample: directions off Y exit the tube
//! above or below, and the exit side brackets the trapped angle.

use super::section::{Orientation, SectionChart, Side};
use crate::closed_orbits::ClosedGeodesicRecord;
use crate::error::{Error, Result};
use crate::geodesic_flow::{GeodesicSystem, PhasePoint};
use crate::numeric::ode::integrate;
use crate::surface::SurfaceMetric;
use serde::Serialize;

/// Outcome of flowing a section point forward: trapped in the tube for
/// the whole horizon, or first exit with the height sign.
pub(crate) fn tube_exit_side(
    metric: &SurfaceMetric,
    record: &ClosedGeodesicRecord,
    start: &PhasePoint,
    tube: f64,
    t_max: f64,
) -> Result<Option<f64>> {
    let sys = GeodesicSystem::new(metric);
    let opts = crate::geodesic_flow::default_opts();
    let mut exit: Option<f64> = None;
    let y0 = [start.pos.x, start.pos.y, start.vel.x, start.vel.y];
    let res = integrate(&sys, 0.0, y0, t_max, &opts, |s| {
        let pos = crate::numeric::Vec2::new(s.y1[0], s.y1[1]);
        match record.height_of(metric, pos) {
            Ok(h) => {
                if h.abs() > tube {
                    exit = Some(h.signum());
                    false
                } else {
                    true
                }
            }
            Err(_) => {
                // Outside the projection tube entirely.
                exit = Some((pos.y - record.trajectory.state_at(0.0).pos.y).signum());
                false
            }
        }
    });
    match res {
        Ok(_) => Ok(exit),
        Err(_) if exit.is_some() => Ok(exit),
        Err(e) => Err(e),
    }
}

/// The stable set on a section, sampled as a polyline with a tangent
/// estimate at the origin.
#[derive(Debug, Clone, Serialize)]
pub struct StableSectionCurve {
    /// Position samples along the transversal (signed by side).
    pub us: Vec<f64>,
    /// Trapped angles θ*(u) relative to the base direction.
    pub thetas: Vec<f64>,
    /// dθ*/du at the origin (Richardson from the two smallest samples);
    /// in the linearized (J, J') identification this is the slope of the
    /// contracting eigendirection.
    pub tangent_slope: f64,
    pub side: Side,
    pub orientation: Orientation,
    pub horizon: f64,
    pub tube: f64,
}

/// Computes Y on the given side/orientation by tube-containment bisection.
/// `u_max` bounds the section extent (defaults to half the record tube),
/// `n_samples` geometric position samples, horizon `periods` periods.
pub fn stable_set_on_section(
    metric: &SurfaceMetric,
    record: &ClosedGeodesicRecord,
    chart: &SectionChart,
    side: Side,
    n_samples: usize,
    periods: f64,
) -> Result<StableSectionCurve> {
    if record.classification != crate::closed_orbits::Classification::StrictlyStable {
        return Err(Error::Precondition(
            "stable set requires a strictly stable record".into(),
        ));
    }
    let tube = 0.5 * record.tube_radius;
    let u_max = 0.8 * tube;
    let t_max = periods * record.length;
    // Eigendirection guess for the trapped angle slope.
    let contracting = record.poincare.m.eigenvector(record.eigenvalues[0].0);
    let slope_guess = contracting.y / contracting.x;

    let mut us = Vec::with_capacity(n_samples);
    let mut thetas = Vec::with_capacity(n_samples);
    let ratio: f64 = 0.72;
    let mut guess_slope = slope_guess;
    for i in 0..n_samples {
        let u = side.sign() * u_max * ratio.powi(i as i32);
        let theta_guess = guess_slope * u;
        let theta = bisect_trapped_angle(metric, record, chart, u, theta_guess, tube, t_max)?;
        us.push(u);
        thetas.push(theta);
        guess_slope = theta / u;
    }
    us.reverse();
    thetas.reverse();
    // Richardson tangent from the two innermost samples (|u| smallest).
    let (u1, th1, u2, th2) = match side {
        Side::Above => (us[0], thetas[0], us[1], thetas[1]),
        Side::Below => (
            us[n_samples - 1],
            thetas[n_samples - 1],
            us[n_samples - 2],
            thetas[n_samples - 2],
        ),
    };
    let s1 = th1 / u1;
    let s2 = th2 / u2;
    // u2 = u1/ratio: first-order Richardson in u.
    let tangent_slope = (s1 - ratio * s2) / (1.0 - ratio);
    Ok(StableSectionCurve {
        us,
        thetas,
        tangent_slope,
        side,
        orientation: Orientation::Same,
        horizon: t_max,
        tube,
    })
}

pub(crate) fn bisect_trapped_angle(
    metric: &SurfaceMetric,
    record: &ClosedGeodesicRecord,
    chart: &SectionChart,
    u: f64,
    theta_guess: f64,
    tube: f64,
    t_max: f64,
) -> Result<f64> {
    let exit_of = |theta: f64| -> Result<Option<f64>> {
        let start = chart.point(metric, u, theta);
        tube_exit_side(metric, record, &start, tube, t_max)
    };
    // Bracket by scanning around the guess, widening on failure.
    let mut width = 0.35 * u.abs().max(1e-4);
    for _attempt in 0..6 {
        let n_scan = 14;
        let mut prev: Option<(f64, f64)> = None;
        let mut bracket = None;
        for k in 0..=n_scan {
            let theta = theta_guess - width + 2.0 * width * k as f64 / n_scan as f64;
            let side = match exit_of(theta)? {
                Some(s) => s,
                None => return Ok(theta), // trapped for the whole horizon
            };
            if let Some((th_prev, s_prev)) = prev {
                if s_prev != side {
                    bracket = Some((th_prev, theta));
                    break;
                }
            }
            prev = Some((theta, side));
        }
        if let Some((mut lo, mut hi)) = bracket {
            let side_lo = exit_of(lo)?.unwrap_or(0.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                match exit_of(mid)? {
                    None => return Ok(mid),
                    Some(s) => {
                        if s == side_lo {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                }
                if (hi - lo).abs() < 1e-15 {
                    break;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        width *= 2.5;
    }
    Err(Error::ShrinkSection(format!(
        "no trapped-angle bracket at u = {u}"
    )))
}
