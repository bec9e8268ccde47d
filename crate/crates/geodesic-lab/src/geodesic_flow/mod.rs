//! Unit-speed geodesic integration with dense trajectories, event
//! detection, nearest-point projection onto closed geodesics, and normal
//! graph extraction.

pub mod graph;
pub mod project;

use crate::error::{Error, Result};
use crate::numeric::ode::{integrate, OdeOptions, OdeSystem, Step};
use crate::numeric::Vec2;
use crate::surface::{christoffel_from_local, LocalGeometry, SurfaceMetric};
use serde::Serialize;
use std::cell::Cell;

pub use graph::{normal_graph_of, NormalGraph};
pub use project::{measured_tube_radius, project_to_curve, Projection};

/// A point of the unit tangent bundle in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub pos: Vec2,
    pub vel: Vec2,
}

impl PhasePoint {
    /// Builds a phase point, normalizing the velocity to unit metric norm.
    /// The input must already be within 1e-10 of unit speed.
    pub fn new(metric: &SurfaceMetric, pos: Vec2, vel: Vec2) -> Result<Self> {
        let n = metric.norm(pos, vel);
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::Precondition(format!(
                "velocity norm {n} is not unit within 1e-10"
            )));
        }
        Ok(PhasePoint {
            pos,
            vel: vel.scale(1.0 / n),
        })
    }

    /// Unit-speed phase point from a frame angle (0 along +s, π/2 along +t).
    pub fn from_angle(metric: &SurfaceMetric, pos: Vec2, theta: f64) -> Self {
        PhasePoint {
            pos,
            vel: metric.velocity_from_angle(pos, theta),
        }
    }

    pub fn reversed(&self) -> PhasePoint {
        PhasePoint {
            pos: self.pos,
            vel: self.vel.scale(-1.0),
        }
    }

    fn to_state(self) -> [f64; 4] {
        [self.pos.x, self.pos.y, self.vel.x, self.vel.y]
    }

    fn from_state(y: &[f64; 4]) -> PhasePoint {
        PhasePoint {
            pos: Vec2::new(y[0], y[1]),
            vel: Vec2::new(y[2], y[3]),
        }
    }

    /// Phase-space distance under chart wrapping (chart metric on
    /// positions plus Euclidean on velocities).
    pub fn distance(&self, metric: &SurfaceMetric, other: &PhasePoint) -> f64 {
        let d = metric.displacement(self.pos, other.pos);
        let dv = other.vel.sub(self.vel);
        (d.norm().powi(2) + dv.norm().powi(2)).sqrt()
    }
}

pub(crate) struct GeodesicSystem<'a> {
    pub metric: &'a SurfaceMetric,
    pub left_domain: Cell<bool>,
}

impl<'a> GeodesicSystem<'a> {
    pub fn new(metric: &'a SurfaceMetric) -> Self {
        GeodesicSystem {
            metric,
            left_domain: Cell::new(false),
        }
    }
}

pub(crate) fn geodesic_accel(local: &LocalGeometry, v: Vec2) -> Vec2 {
    let ch = christoffel_from_local(local);
    Vec2::new(
        -(ch[0][0][0] * v.x * v.x + 2.0 * ch[0][0][1] * v.x * v.y + ch[0][1][1] * v.y * v.y),
        -(ch[1][0][0] * v.x * v.x + 2.0 * ch[1][0][1] * v.x * v.y + ch[1][1][1] * v.y * v.y),
    )
}

impl OdeSystem<4> for GeodesicSystem<'_> {
    fn rhs(&self, _t: f64, y: &[f64; 4], dy: &mut [f64; 4]) {
        let p = Vec2::new(y[0], y[1]);
        if !self.metric.contains(p) {
            self.left_domain.set(true);
        }
        let local = self.metric.local(p);
        let a = geodesic_accel(&local, Vec2::new(y[2], y[3]));
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = a.x;
        dy[3] = a.y;
    }

    fn project(&self, _t: f64, y: &mut [f64; 4]) {
        // Renormalize to unit speed after every accepted step.
        let p = Vec2::new(y[0], y[1]);
        let v = Vec2::new(y[2], y[3]);
        let n = self.metric.norm(p, v);
        y[2] /= n;
        y[3] /= n;
    }
}

/// Sampled integral curve of the geodesic flow, parameterized by arclength.
#[derive(Debug, Clone)]
pub struct GeodesicTrajectory {
    steps: Vec<Step<4>>,
    t_start: f64,
    t_end: f64,
    /// Set when every sample lies on one Fermi parallel: (t-coordinate,
    /// coefficient value on it, signed s-speed, start s).
    parallel: Option<ParallelData>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ParallelData {
    pub t0: f64,
    pub f0: f64,
    pub s_speed: f64,
    pub s_start: f64,
}

impl GeodesicTrajectory {
    fn from_steps(metric: &SurfaceMetric, steps: Vec<Step<4>>) -> Self {
        assert!(!steps.is_empty());
        let t_start = steps.first().unwrap().t0;
        let t_end = steps.last().unwrap().t1;
        let t0 = steps[0].y0[1];
        let is_parallel = metric.is_fermi()
            && steps
                .iter()
                .all(|s| (s.y0[1] - t0).abs() < 1e-10 && (s.y1[1] - t0).abs() < 1e-10);
        let parallel = if is_parallel {
            let f0 = metric.coeff_jet(steps[0].y0[0], t0).f;
            Some(ParallelData {
                t0,
                f0,
                s_speed: steps[0].y0[2],
                s_start: steps[0].y0[0],
            })
        } else {
            None
        };
        GeodesicTrajectory {
            steps,
            t_start,
            t_end,
            parallel,
        }
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn length(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub(crate) fn parallel_data(&self) -> Option<&ParallelData> {
        self.parallel.as_ref()
    }

    /// Sample points at accepted steps: (arclength, phase point).
    pub fn samples(&self) -> impl Iterator<Item = (f64, PhasePoint)> + '_ {
        let first = std::iter::once((self.steps[0].t0, PhasePoint::from_state(&self.steps[0].y0)));
        first.chain(
            self.steps
                .iter()
                .map(|s| (s.t1, PhasePoint::from_state(&s.y1))),
        )
    }

    pub fn start_state(&self) -> PhasePoint {
        PhasePoint::from_state(&self.steps[0].y0)
    }

    pub fn end_state(&self) -> PhasePoint {
        PhasePoint::from_state(&self.steps.last().unwrap().y1)
    }

    fn step_index_for(&self, t: f64) -> usize {
        let steps = &self.steps;
        if t <= steps[0].t1 {
            return 0;
        }
        if t >= steps[steps.len() - 1].t0 {
            return steps.len() - 1;
        }
        let mut lo = 0usize;
        let mut hi = steps.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if steps[mid].t1 < t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Dense state by cubic Hermite interpolation of the accepted steps.
    pub fn state_at(&self, t: f64) -> PhasePoint {
        let t = t.clamp(self.t_start, self.t_end);
        let s = &self.steps[self.step_index_for(t)];
        PhasePoint::from_state(&s.eval(t))
    }

    /// State at `t` recomputed by a fresh short integration from the nearest
    /// accepted sample; use where interpolation error matters.
    pub fn refined_state_at(&self, metric: &SurfaceMetric, t: f64) -> Result<PhasePoint> {
        let t = t.clamp(self.t_start, self.t_end);
        let s = &self.steps[self.step_index_for(t)];
        let (t_from, y_from) = if (t - s.t0).abs() <= (s.t1 - t).abs() {
            (s.t0, s.y0)
        } else {
            (s.t1, s.y1)
        };
        if t == t_from {
            return Ok(PhasePoint::from_state(&y_from));
        }
        let sys = GeodesicSystem::new(metric);
        let opts = OdeOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            h_initial: (t - t_from).abs().min(1e-3),
            ..OdeOptions::default()
        };
        let y = integrate(&sys, t_from, y_from, t, &opts, |_| true)?;
        Ok(PhasePoint::from_state(&y))
    }

    /// Maximum unit-speed violation over all samples.
    pub fn unit_speed_violation(&self, metric: &SurfaceMetric) -> f64 {
        self.samples()
            .map(|(_, p)| (metric.inner(p.pos, p.vel, p.vel) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn default_opts() -> OdeOptions {
    OdeOptions::default()
}

/// Integrates a unit-speed geodesic for the given arclength (> 0).
pub fn integrate_geodesic(
    metric: &SurfaceMetric,
    start: &PhasePoint,
    length: f64,
) -> Result<GeodesicTrajectory> {
    if length <= 0.0 {
        return Err(Error::Precondition("length must be positive".into()));
    }
    integrate_span(metric, start, 0.0, length)
}

/// Integrates over [t_back, t_fwd] with the anchor state at t = 0.
pub fn integrate_span(
    metric: &SurfaceMetric,
    anchor: &PhasePoint,
    t_back: f64,
    t_fwd: f64,
) -> Result<GeodesicTrajectory> {
    assert!(t_back <= 0.0 && t_fwd >= 0.0 && t_fwd - t_back > 0.0);
    let sys = GeodesicSystem::new(metric);
    let opts = default_opts();
    let mut steps: Vec<Step<4>> = Vec::new();
    if t_back < 0.0 {
        let mut back: Vec<Step<4>> = Vec::new();
        integrate(&sys, 0.0, anchor.to_state(), t_back, &opts, |s| {
            back.push(s.clone());
            true
        })?;
        // Normalize to increasing-time intervals.
        for s in back.iter_mut() {
            std::mem::swap(&mut s.t0, &mut s.t1);
            std::mem::swap(&mut s.y0, &mut s.y1);
            std::mem::swap(&mut s.f0, &mut s.f1);
        }
        back.reverse();
        steps.extend(back);
    }
    if t_fwd > 0.0 {
        integrate(&sys, 0.0, anchor.to_state(), t_fwd, &opts, |s| {
            steps.push(s.clone());
            true
        })?;
    }
    if sys.left_domain.get() {
        return Err(Error::Integration {
            t: t_fwd,
            context: "trajectory left the chart domain".into(),
        });
    }
    Ok(GeodesicTrajectory::from_steps(metric, steps))
}

/// Flows a phase point by arclength `t` (either sign) and returns the
/// endpoint state.
pub fn flow(metric: &SurfaceMetric, start: &PhasePoint, t: f64) -> Result<PhasePoint> {
    if t == 0.0 {
        return Ok(*start);
    }
    let sys = GeodesicSystem::new(metric);
    let y = integrate(&sys, 0.0, start.to_state(), t, &default_opts(), |_| true)?;
    if sys.left_domain.get() {
        return Err(Error::Integration {
            t,
            context: "trajectory left the chart domain".into(),
        });
    }
    Ok(PhasePoint::from_state(&y))
}

/// Result of an event search along a geodesic.
#[derive(Debug, Clone, Copy)]
pub struct EventHit {
    pub t: f64,
    pub state: PhasePoint,
}

/// Integrates from `start` for at most |t_max| arclength (signed), stopping
/// at the first sign change of `event`. Events are detected on accepted
/// steps (step size is capped at 0.1) and refined by bisection on the
/// dense output. A sign change occurring in the first `skip` arclength is
/// ignored, which lets callers restart from a previous event.
pub fn integrate_until(
    metric: &SurfaceMetric,
    start: &PhasePoint,
    t_max: f64,
    skip: f64,
    event: &dyn Fn(f64, &PhasePoint) -> f64,
) -> Result<Option<EventHit>> {
    let sys = GeodesicSystem::new(metric);
    let opts = default_opts();
    let mut hit: Option<EventHit> = None;
    let skip = skip.abs();
    let res = integrate(&sys, 0.0, start.to_state(), t_max, &opts, |s| {
        // Sub-sample the step to catch crossings faster than the step size.
        let nodes = [s.t0, 0.5 * (s.t0 + s.t1), s.t1];
        let mut prev_t = nodes[0];
        let mut prev_v = event(prev_t, &PhasePoint::from_state(&s.eval(prev_t)));
        for &t in &nodes[1..] {
            let v = event(t, &PhasePoint::from_state(&s.eval(t)));
            if prev_t.abs() >= skip
                && t.abs() >= skip
                && prev_v != 0.0
                && (prev_v < 0.0) != (v < 0.0)
            {
                let t_root = crate::numeric::roots::bisect(prev_t, t, 1e-12, |tt| {
                    event(tt, &PhasePoint::from_state(&s.eval(tt)))
                });
                hit = Some(EventHit {
                    t: t_root,
                    state: PhasePoint::from_state(&s.eval(t_root)),
                });
                return false;
            }
            prev_t = t;
            prev_v = v;
        }
        true
    });
    match res {
        Ok(_) => Ok(hit),
        Err(e) => {
            if hit.is_some() {
                Ok(hit)
            } else {
                Err(e)
            }
        }
    }
}

/// Clairaut quantity f²·ds/dτ, conserved along geodesics of rotationally
/// symmetric Fermi metrics (equals r·cos ψ on surfaces of revolution).
pub fn clairaut_constant(metric: &SurfaceMetric, state: &PhasePoint) -> f64 {
    let g = metric.tensor(state.pos);
    g[0] * state.vel.x + g[1] * state.vel.y
}

/// Geodesic system that re-imposes an exact Clairaut constant after every
/// accepted step, keeping asymptotic orbits of rotationally symmetric
/// metrics on their invariant manifold far beyond the horizon where raw
/// double-precision integration drifts off (the deviation grows like
/// e^t along a strictly stable waist).
struct ClairautProjectedSystem<'a> {
    inner: GeodesicSystem<'a>,
    c: f64,
    /// When the constant is the value on a parallel t = w, the vertical
    /// speed is recovered from the cancellation-free coefficient gap
    /// (1 - c²/f² loses all digits once |t - w| < 1e-8).
    waist_t: Option<f64>,
}

impl OdeSystem<4> for ClairautProjectedSystem<'_> {
    fn rhs(&self, t: f64, y: &[f64; 4], dy: &mut [f64; 4]) {
        self.inner.rhs(t, y, dy);
    }

    fn project(&self, t: f64, y: &mut [f64; 4]) {
        self.inner.project(t, y);
        let p = Vec2::new(y[0], y[1]);
        let f = self.inner.metric.coeff_jet(p.x, p.y).f;
        // Unit speed + f² ṡ = c determine the velocity up to the sign of ṫ;
        // keep the integrated sign.
        let vs = self.c / (f * f);
        let vt2 = match self.waist_t {
            Some(w) => {
                let gap = self.inner.metric.coeff_gap(p.x, p.y, w);
                gap * (f + self.c) / (f * f)
            }
            None => 1.0 - (self.c / f) * (self.c / f),
        };
        if vt2 >= 0.0 {
            y[2] = vs;
            y[3] = vt2.sqrt().copysign(y[3]);
        }
    }
}

/// Start state of the waist-asymptotic geodesic through (s0, t0): the
/// direction whose Clairaut constant equals the coefficient value on the
/// parallel t = waist_t exactly, headed toward the waist.
pub fn clairaut_asymptotic_start(
    metric: &SurfaceMetric,
    waist_t: f64,
    s0: f64,
    t0: f64,
    s_orientation: f64,
) -> Result<PhasePoint> {
    let c = metric.coeff_jet(s0, waist_t).f;
    let f = metric.coeff_jet(s0, t0).f;
    let ratio = c / f;
    if ratio.abs() > 1.0 {
        return Err(Error::Precondition(format!(
            "no asymptotic direction: coefficient {f} at t0 below waist value {c}"
        )));
    }
    let vs = s_orientation.signum() * c / (f * f);
    let vt = -(1.0 - ratio * ratio).sqrt() * (t0 - waist_t).signum();
    Ok(PhasePoint {
        pos: Vec2::new(s0, t0),
        vel: Vec2::new(vs, vt),
    })
}

/// Integrates a geodesic of a rotationally symmetric Fermi metric with a
/// Clairaut constant enforced exactly after each step. When `waist_t` is
/// given, the constant is the coefficient value on that parallel and the
/// vertical speed is recovered in cancellation-free form, which keeps
/// asymptotic orbits on the invariant manifold down to subnormal heights.
pub fn integrate_geodesic_clairaut(
    metric: &SurfaceMetric,
    start: &PhasePoint,
    length: f64,
    waist_t: Option<f64>,
) -> Result<GeodesicTrajectory> {
    if !metric.is_fermi() {
        return Err(Error::Precondition(
            "Clairaut projection requires a Fermi-form metric".into(),
        ));
    }
    let c = match waist_t {
        Some(w) => metric.coeff_jet(start.pos.x, w).f,
        None => clairaut_constant(metric, start),
    };
    let sys = ClairautProjectedSystem {
        inner: GeodesicSystem::new(metric),
        c,
        waist_t,
    };
    let mut steps: Vec<Step<4>> = Vec::new();
    integrate(&sys, 0.0, start.to_state(), length, &default_opts(), |s| {
        steps.push(s.clone());
        true
    })?;
    if sys.inner.left_domain.get() {
        return Err(Error::Integration {
            t: length,
            context: "trajectory left the chart domain".into(),
        });
    }
    Ok(GeodesicTrajectory::from_steps(metric, steps))
}

/// Report of the monotone-spiraling check on a tube-entering geodesic.
#[derive(Debug, Clone, Serialize)]
pub struct SpiralReport {
    /// Arclength at which the orbit entered the tube.
    pub entry_t: f64,
    /// Heights sampled after entry (one sample per tenth of a period).
    pub heights: Vec<f64>,
    /// Number of samples at which |height| failed to decrease strictly.
    pub violations: usize,
}

/// Checks that a geodesic asymptotic to the parallel t = `waist_t` spirals
/// monotonically toward it: once inside the tube of radius `tube`, the
/// height |t - waist_t| decreases strictly for at least `periods` periods.
pub fn monotone_spiral_check(
    metric: &SurfaceMetric,
    start: &PhasePoint,
    waist_t: f64,
    tube: f64,
    periods: f64,
    period_length: f64,
) -> Result<SpiralReport> {
    let total = periods * period_length * 1.3 + 10.0;
    let traj = integrate_geodesic_clairaut(metric, start, total, Some(waist_t))?;
    let mut entry_t = None;
    let mut cursor = 0.0;
    while cursor <= traj.t_end() {
        if (traj.state_at(cursor).pos.y - waist_t).abs() < tube {
            entry_t = Some(cursor);
            break;
        }
        cursor += 0.05;
    }
    let entry_t = entry_t.ok_or_else(|| Error::Precondition("orbit never enters the tube".into()))?;
    let mut heights = Vec::new();
    let mut violations = 0;
    let dt = period_length / 10.0;
    let n = (periods * period_length / dt).ceil() as usize;
    let mut prev = f64::INFINITY;
    for i in 0..=n {
        let t = entry_t + i as f64 * dt;
        if t > traj.t_end() {
            break;
        }
        let h = (traj.state_at(t).pos.y - waist_t).abs();
        if h >= prev {
            violations += 1;
        }
        heights.push(h);
        prev = h;
    }
    Ok(SpiralReport {
        entry_t,
        heights,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Profile;
    use std::f64::consts::PI;

    #[test]
    fn flat_torus_straight_line() {
        let m = SurfaceMetric::flat_torus(1.0, 1.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.0), 0.0);
        let traj = integrate_geodesic(&m, &start, 1.0).unwrap();
        let end = traj.end_state();
        assert!((m.wrap_s(end.pos.x) - 0.0).abs() < 1e-10);
        assert!(end.pos.y.abs() < 1e-12);
    }

    #[test]
    fn sphere_great_circle_closes() {
        let m = SurfaceMetric::revolution(Profile::Sphere, 1e-3, PI - 1e-3);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, PI / 2.0), 0.0);
        let traj = integrate_geodesic(&m, &start, 2.0 * PI).unwrap();
        let end = traj.end_state();
        let gap = (m.displacement(start.pos, end.pos).norm().powi(2)
            + end.vel.sub(start.vel).norm().powi(2))
        .sqrt();
        assert!(gap < 1e-7, "great circle should close, gap {gap}");
    }

    #[test]
    fn clairaut_is_conserved() {
        let m = SurfaceMetric::revolution(Profile::TorusMinor { major: 2.0 }, -50.0, 50.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.3, 0.8), 0.6);
        let c0 = clairaut_constant(&m, &start);
        let traj = integrate_geodesic(&m, &start, 20.0).unwrap();
        for (_, p) in traj.samples() {
            assert!((clairaut_constant(&m, &p) - c0).abs() < 1e-8);
        }
    }

    #[test]
    fn unit_speed_maintained_over_long_runs() {
        let m = SurfaceMetric::revolution(Profile::TorusMinor { major: 2.0 }, -100.0, 100.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.1, 0.4), 0.9);
        let traj = integrate_geodesic(&m, &start, 100.0).unwrap();
        assert!(traj.unit_speed_violation(&m) < 1e-8);
    }

    #[test]
    fn flow_property_composition() {
        let m = SurfaceMetric::revolution(Profile::TorusMinor { major: 2.0 }, -50.0, 50.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(1.0, -0.3), 1.1);
        let a = flow(&m, &start, 1.7).unwrap();
        let b = flow(&m, &a, 2.4).unwrap();
        let c = flow(&m, &start, 4.1).unwrap();
        assert!(b.distance(&m, &c) < 1e-8);
    }

    #[test]
    fn backward_span_covers_negative_times() {
        let m = SurfaceMetric::revolution(Profile::TorusMinor { major: 2.0 }, -50.0, 50.0);
        let anchor = PhasePoint::from_angle(&m, Vec2::new(0.5, 0.2), 0.4);
        let traj = integrate_span(&m, &anchor, -3.0, 3.0).unwrap();
        assert!((traj.t_start() + 3.0).abs() < 1e-12);
        let mid = traj.state_at(0.0);
        assert!(mid.distance(&m, &anchor) < 1e-9);
        let back = flow(&m, &anchor, -1.5).unwrap();
        assert!(traj.state_at(-1.5).distance(&m, &back) < 1e-7);
    }

    #[test]
    fn monotone_spiraling_toward_catenoid_waist() {
        let m = SurfaceMetric::revolution(Profile::Cosh, -1.4, 1.4);
        let t0: f64 = 0.5;
        let psi = (1.0 / t0.cosh()).acos();
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, t0), -psi);
        let report = monotone_spiral_check(&m, &start, 0.0, 0.45, 6.0, 2.0 * PI).unwrap();
        assert_eq!(report.violations, 0, "heights: {:?}", &report.heights);
        assert!(report.heights.len() > 55);
    }

    #[test]
    fn event_detection_finds_meridian_crossing() {
        let m = SurfaceMetric::flat_torus(2.0, 1.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.1, 0.2), 0.3);
        // Crossing of s = 1 line.
        let hit = integrate_until(&m, &start, 5.0, 0.0, &|_, p| p.pos.x - 1.0)
            .unwrap()
            .unwrap();
        assert!((hit.state.pos.x - 1.0).abs() < 1e-9);
        assert!((hit.t - 0.9 / 0.3f64.cos()).abs() < 1e-6);
    }
}
