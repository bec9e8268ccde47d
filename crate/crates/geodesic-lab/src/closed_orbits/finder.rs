//! Grid-plus-Newton closed-geodesic finder.
//!
//! A grid of initial conditions is seeded on one or more flow sections;
//! orbits are integrated up to the length cap, near-returns to the start
//! are captured, and Newton iteration on (section coordinate, angle,
//! period) drives the return residual to zero. Results are deduplicated
//! by time-shift equivalence and sorted by length.

use super::record::ClosedGeodesicRecord;
use crate::error::{Error, Result};
use crate::geodesic_flow::{flow, PhasePoint};
use crate::numeric::linalg::solve3;
use crate::numeric::Vec2;
use crate::surface::{MetricFamily, SurfaceMetric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Flow sections used for seeding and return detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SectionSpec {
    /// The curve s = s0 (a meridian, geodesic in every Fermi metric),
    /// parameterized by t; transverse to everything moving in s.
    Meridian { s0: f64 },
    /// The curve t = t0, parameterized by s; transverse to everything
    /// moving in t.
    Parallel { t0: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinderConfig {
    pub sections: Vec<SectionSpec>,
    /// Grid density along the section coordinate.
    pub n_position: usize,
    /// Grid density over launch angles.
    pub n_angle: usize,
    /// Capture radius for near-returns seeding Newton.
    pub capture: f64,
    /// Newton convergence tolerance on the phase-space gap.
    pub newton_tol: f64,
    pub max_newton_iter: usize,
    /// Dedup tolerance for time-shift equivalence.
    pub dedup_tol: f64,
}

impl FinderConfig {
    /// Sensible defaults for a metric: meridian section for strips and
    /// revolution surfaces, meridian plus parallel for tori.
    pub fn for_metric(metric: &SurfaceMetric) -> Self {
        let mut sections = vec![SectionSpec::Meridian { s0: 0.0 }];
        if metric.t_periodic() {
            sections.push(SectionSpec::Parallel { t0: 0.25 });
        }
        let (t_min, t_max) = metric.t_range();
        let _ = (t_min, t_max);
        FinderConfig {
            sections,
            n_position: 14,
            n_angle: 12,
            capture: 0.35,
            newton_tol: 1e-10,
            max_newton_iter: 50,
            dedup_tol: 1e-6,
        }
    }
}

fn section_start(
    metric: &SurfaceMetric,
    section: &SectionSpec,
    u: f64,
    theta: f64,
) -> PhasePoint {
    match section {
        // Angle measured from the +s frame direction (transverse range).
        SectionSpec::Meridian { s0 } => PhasePoint::from_angle(metric, Vec2::new(*s0, u), theta),
        // Angle measured from the +t frame direction.
        SectionSpec::Parallel { t0 } => {
            PhasePoint::from_angle(metric, Vec2::new(u, *t0), theta + std::f64::consts::FRAC_PI_2)
        }
    }
}

/// Phase-space return residual in (wrapped Δs, Δt or wrapped Δt, Δangle).
fn return_residual(metric: &SurfaceMetric, start: &PhasePoint, end: &PhasePoint) -> [f64; 3] {
    let d = metric.displacement(start.pos, end.pos);
    let a0 = metric.frame_angle(start.pos, start.vel);
    let a1 = metric.frame_angle(end.pos, end.vel);
    let mut da = (a1 - a0).rem_euclid(std::f64::consts::TAU);
    if da > std::f64::consts::PI {
        da -= std::f64::consts::TAU;
    }
    [d.x, d.y, da]
}

fn residual_norm(r: &[f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

/// Newton refinement on (u, θ, T) with Tikhonov-regularized least-squares
/// steps (translation-invariant families make the plain Jacobian
/// singular) and residual backtracking. Returns the closing start and
/// period.
fn newton_close(
    metric: &SurfaceMetric,
    section: &SectionSpec,
    mut u: f64,
    mut theta: f64,
    mut period: f64,
    cfg: &FinderConfig,
) -> Option<(PhasePoint, f64)> {
    let eval = |u: f64, theta: f64, period: f64| -> Option<[f64; 3]> {
        let start = section_start(metric, section, u, theta);
        let end = flow(metric, &start, period).ok()?;
        Some(return_residual(metric, &start, &end))
    };
    let mut r = eval(u, theta, period)?;
    for _ in 0..cfg.max_newton_iter {
        if residual_norm(&r) < cfg.newton_tol {
            if period < 1e-3 {
                return None;
            }
            return Some((section_start(metric, section, u, theta), period));
        }
        let h = 1e-7;
        let mut jac = [[0.0; 3]; 3];
        for (col, d) in [(0usize, [h, 0.0, 0.0]), (1, [0.0, h, 0.0]), (2, [0.0, 0.0, h])] {
            let r2 = eval(u + d[0], theta + d[1], period + d[2])?;
            for row in 0..3 {
                jac[row][col] = (r2[row] - r[row]) / h;
            }
        }
        // Normal equations with a small ridge.
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    jtj[i][j] += jac[k][i] * jac[k][j];
                }
            }
            for k in 0..3 {
                jtr[i] += jac[k][i] * r[k];
            }
        }
        let ridge = 1e-9 * (1.0 + jtj[0][0].max(jtj[1][1]).max(jtj[2][2]));
        for (i, row) in jtj.iter_mut().enumerate() {
            row[i] += ridge;
        }
        let delta = solve3(jtj, [-jtr[0], -jtr[1], -jtr[2]])?;
        // Backtracking on the residual norm.
        let mut step = 1.0;
        let scale = residual_norm(&delta);
        if scale > 0.5 {
            step = 0.5 / scale;
        }
        let mut improved = false;
        for _ in 0..8 {
            let (u2, th2, p2) = (
                u + step * delta[0],
                theta + step * delta[1],
                period + step * delta[2],
            );
            if !u2.is_finite() || !th2.is_finite() || !p2.is_finite() || p2 <= 0.0 {
                step *= 0.5;
                continue;
            }
            if let Some(r2) = eval(u2, th2, p2) {
                if residual_norm(&r2) < residual_norm(&r) * (1.0 - 1e-4 * step) {
                    u = u2;
                    theta = th2;
                    period = p2;
                    r = r2;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            return None;
        }
    }
    None
}

/// Structural seeds: critical parallels of the s-averaged coefficient
/// (closed geodesics of rotationally symmetric metrics, near-closing
/// candidates of their perturbations) and, on t-periodic charts, meridians
/// (geodesics of every Fermi metric).
fn structural_seeds(metric: &SurfaceMetric, cfg: &FinderConfig) -> Vec<(SectionSpec, f64, f64, f64)> {
    let mut seeds = Vec::new();
    if !metric.is_fermi() {
        return seeds;
    }
    let (t_min, t_max) = metric.t_range();
    let span = t_max - t_min;
    let (lo, hi) = if metric.t_periodic() {
        (t_min, t_max)
    } else {
        (t_min + 0.08 * span, t_max - 0.08 * span)
    };
    let avg = |t: f64| -> (f64, f64) {
        let mut f = 0.0;
        let mut f_t = 0.0;
        let n = 16;
        for i in 0..n {
            let s = metric.s_period() * i as f64 / n as f64;
            let jet = metric.coeff_jet(s, t);
            f += jet.f;
            f_t += jet.f_t;
        }
        (f / n as f64, f_t / n as f64)
    };
    // Identically critical coefficient (flat torus): every parallel closes.
    let flat = (0..=8).all(|i| avg(lo + (hi - lo) * i as f64 / 8.0).1.abs() < 1e-13);
    if flat {
        for i in 0..4 {
            let t = lo + (hi - lo) * (0.1 + 0.8 * i as f64 / 4.0);
            let (f, _) = avg(t);
            seeds.push((
                SectionSpec::Meridian { s0: 0.0 },
                t,
                0.0,
                metric.s_period() * f,
            ));
        }
    } else {
        let roots = crate::numeric::roots::scan_roots(lo, hi, 160, 1e-12, |t| avg(t).1);
        for t in roots {
            let (f, _) = avg(t);
            seeds.push((
                SectionSpec::Meridian { s0: 0.0 },
                t,
                0.0,
                metric.s_period() * f,
            ));
        }
    }
    if metric.t_periodic() {
        // Meridians close with length equal to the t-period.
        for i in 0..4 {
            let s0 = metric.s_period() * i as f64 / 4.0;
            seeds.push((
                SectionSpec::Parallel { t0: t_min },
                s0,
                0.0, // angle measured from +t for the Parallel section
                span,
            ));
        }
    }
    let _ = cfg;
    seeds
}

/// Searches for closed geodesics of length below the cap. The grid may
/// miss orbits (density is a config knob); every returned record satisfies
/// the closure and classification invariants.
pub fn find_closed_geodesics(
    metric: &SurfaceMetric,
    length_cap: f64,
    cfg: &FinderConfig,
) -> Result<Vec<ClosedGeodesicRecord>> {
    let (t_min, t_max) = metric.t_range();
    let mut seeds: Vec<(SectionSpec, f64, f64)> = Vec::new();
    for section in &cfg.sections {
        for i in 0..cfg.n_position {
            let u = match section {
                SectionSpec::Meridian { .. } => {
                    if metric.t_periodic() {
                        t_min + (t_max - t_min) * i as f64 / cfg.n_position as f64
                    } else {
                        let lo = t_min + 0.12 * (t_max - t_min);
                        let hi = t_max - 0.12 * (t_max - t_min);
                        lo + (hi - lo) * i as f64 / (cfg.n_position - 1).max(1) as f64
                    }
                }
                SectionSpec::Parallel { .. } => {
                    metric.s_period() * i as f64 / cfg.n_position as f64
                }
            };
            for j in 0..cfg.n_angle {
                let theta = -1.2 + 2.4 * j as f64 / (cfg.n_angle - 1).max(1) as f64;
                seeds.push((*section, u, theta));
            }
        }
    }

    let mut found: Vec<(PhasePoint, f64)> = seeds
        .par_iter()
        .flat_map_iter(|(section, u, theta)| {
            let mut local = Vec::new();
            let start = section_start(metric, section, *u, *theta);
            // March along the orbit and capture near-returns.
            let step = 0.25;
            let n_steps = (length_cap / step).ceil() as usize;
            let mut state = start;
            for k in 1..=n_steps {
                let t = k as f64 * step;
                state = match flow(metric, &state, step) {
                    Ok(s) => s,
                    Err(_) => break,
                };
                if t > 0.5 && start.distance(metric, &state) < cfg.capture {
                    if let Some((s, period)) =
                        newton_close(metric, section, *u, *theta, t, cfg)
                    {
                        if period <= length_cap * 1.001 {
                            local.push((s, period));
                        }
                    }
                }
            }
            local
        })
        .collect();

    // Structural seeds (critical parallels, meridians) refined by the same
    // Newton; these capture hyperbolic equators whose basins are too small
    // for the marching grid.
    for (section, u, theta, period_guess) in structural_seeds(metric, cfg) {
        if period_guess > length_cap * 1.001 {
            continue;
        }
        if let Some((s, period)) = newton_close(metric, &section, u, theta, period_guess, cfg) {
            if period <= length_cap * 1.001 {
                found.push((s, period));
            }
        }
    }

    // Deduplicate by time-shift equivalence, preferring shorter periods.
    let mut candidates = found;
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut records: Vec<ClosedGeodesicRecord> = Vec::new();
    for (start, period) in candidates {
        let mut duplicate = false;
        for r in &records {
            let ratio = period / r.length;
            let near_multiple = (ratio - ratio.round()).abs() < 1e-4 && ratio.round() >= 1.0;
            if near_multiple && r.contains_state(metric, &start, cfg.dedup_tol) {
                duplicate = true;
                break;
            }
        }
        if duplicate {
            continue;
        }
        match ClosedGeodesicRecord::new(metric, &start, period) {
            Ok(rec) => records.push(rec),
            Err(Error::Precondition(_)) => {} // dropped candidate, logged by caller
            Err(e) => return Err(e),
        }
    }
    records.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then(a.start_state().pos.x.total_cmp(&b.start_state().pos.x))
            .then(a.start_state().pos.y.total_cmp(&b.start_state().pos.y))
    });
    Ok(records)
}

/// Convenience: find and keep only strictly stable records (used by the
/// invariant-manifold and heteroclinic machinery).
pub fn equator_record(
    metric: &SurfaceMetric,
    t0: f64,
) -> Result<ClosedGeodesicRecord> {
    // Direct construction for a parallel t = t0 that is a geodesic
    // (coefficient critical in t there).
    let jet = metric.coeff_jet(0.0, t0);
    if jet.f_t.abs() > 1e-10 {
        return Err(Error::Precondition(format!(
            "parallel t = {t0} is not a geodesic: f_t = {:.3e}",
            jet.f_t
        )));
    }
    let start = PhasePoint::from_angle(metric, Vec2::new(0.0, t0), 0.0);
    let length = metric.s_period() * jet.f;
    ClosedGeodesicRecord::new(metric, &start, length)
}

/// Family tag helper for picking default sections in reports.
pub fn default_cap(metric: &SurfaceMetric) -> f64 {
    match metric.family() {
        MetricFamily::FlatTorus { a, b } => 1.6 * a.max(*b),
        _ => 7.0 * std::f64::consts::PI,
    }
}
