//! Relative Poincaré maps: the SL(2,R) transfer matrices propagating
//! (J, J') along a geodesic, with crossing counts of the y-axis.
//!
//! dP/dt = R(t) P with R = [[0, 1], [-K, 0]]; tr R = 0 keeps det P = 1.
//! When a propagated vector meets the y-axis it moves clockwise: the sign
//! of J just after a zero equals the sign of J' there. Step sizes stay
//! below half the minimal zero gap π/√(max K), so endpoint sign changes
//! count zeros exactly.

use crate::error::{Error, Result};
use crate::geodesic_flow::GeodesicTrajectory;
use crate::numeric::ode::{integrate, OdeOptions, OdeSystem};
use crate::numeric::{Mat2, Vec2};
use crate::surface::SurfaceMetric;
use serde::Serialize;
use std::cell::Cell;

/// Normal Jacobi data (J, J') at a parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiState {
    pub j: f64,
    pub jp: f64,
}

impl JacobiState {
    pub fn to_vec(self) -> Vec2 {
        Vec2::new(self.j, self.jp)
    }

    pub fn from_vec(v: Vec2) -> Self {
        JacobiState { j: v.x, jp: v.y }
    }
}

/// Transfer matrix P_{t1→t2} acting on (J, J').
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransferMatrix {
    pub m: Mat2,
    pub t0: f64,
    pub t1: f64,
}

impl TransferMatrix {
    /// Composition P_{t1→t2} ∘ P_{t0→t1}.
    pub fn compose(&self, earlier: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            m: self.m.mul(earlier.m),
            t0: earlier.t0,
            t1: self.t1,
        }
    }

    pub fn det_defect(&self) -> f64 {
        (self.m.det() - 1.0).abs()
    }
}

struct TransferSystem<'a> {
    metric: &'a SurfaceMetric,
    traj: &'a GeodesicTrajectory,
    closed_period: Option<f64>,
    domain_issue: Cell<bool>,
}

impl TransferSystem<'_> {
    fn curvature(&self, t: f64) -> f64 {
        let tt = match self.closed_period {
            Some(period) => self.traj.t_start() + (t - self.traj.t_start()).rem_euclid(period),
            None => t,
        };
        let p = self.traj.state_at(tt);
        match self.metric.curvature_at(p.pos) {
            Ok(k) => k,
            Err(_) => {
                self.domain_issue.set(true);
                0.0
            }
        }
    }
}

impl OdeSystem<4> for TransferSystem<'_> {
    fn rhs(&self, t: f64, y: &[f64; 4], dy: &mut [f64; 4]) {
        let k = self.curvature(t);
        // Rows of P: (J-row, J'-row).
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = -k * y[0];
        dy[3] = -k * y[1];
    }
}

fn transfer_opts(k_max: f64) -> OdeOptions {
    OdeOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        h_initial: 1e-3,
        h_min: 1e-14,
        h_max: (0.04f64).min(1.2 / (1.0 + k_max).sqrt()),
        ..OdeOptions::default()
    }
}

fn max_curvature(metric: &SurfaceMetric, traj: &GeodesicTrajectory) -> f64 {
    let mut k_max: f64 = 0.0;
    for i in 0..=64 {
        let t = traj.t_start() + traj.length() * i as f64 / 64.0;
        if let Ok(k) = metric.curvature_at(traj.state_at(t).pos) {
            k_max = k_max.max(k.abs());
        }
    }
    k_max
}

/// Integrates the relative Poincaré map over [t1, t2] of the trajectory.
pub fn relative_poincare(
    metric: &SurfaceMetric,
    traj: &GeodesicTrajectory,
    t1: f64,
    t2: f64,
) -> Result<TransferMatrix> {
    if t1 < traj.t_start() - 1e-12 || t2 > traj.t_end() + 1e-12 {
        return Err(Error::Precondition(format!(
            "[{t1}, {t2}] outside trajectory range [{}, {}]",
            traj.t_start(),
            traj.t_end()
        )));
    }
    let sys = TransferSystem {
        metric,
        traj,
        closed_period: None,
        domain_issue: Cell::new(false),
    };
    let y0 = [1.0, 0.0, 0.0, 1.0];
    let opts = transfer_opts(max_curvature(metric, traj));
    let y = integrate(&sys, t1, y0, t2, &opts, |_| true)?;
    Ok(TransferMatrix {
        m: Mat2::new(y[0], y[1], y[2], y[3]),
        t0: t1,
        t1: t2,
    })
}

/// A y-axis crossing of a propagated Jacobi vector.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Crossing {
    pub t: f64,
    pub j: f64,
    pub jp: f64,
    /// Clockwise rule: sign of J right after the zero equals sign of J'.
    pub clockwise: bool,
}

/// Transfer increments on a grid dense enough that any Jacobi solution has
/// at most one zero per node interval. Vectors are propagated node to
/// node with renormalization: cumulative matrices applied to a contracting
/// seed lose it to catastrophic cancellation once the dynamic range
/// exceeds 1/ε, while incremental products stay backward stable.
#[derive(Debug, Clone)]
pub struct TransferPath {
    times: Vec<f64>,
    /// incr[i]: transfer from node i to node i+1.
    incr: Vec<Mat2>,
    full: Mat2,
    /// Gronwall rate bound: a true Jacobi vector cannot decay faster than
    /// e^{-rate·Δt}, so dropping 1e-12 below that envelope is numerical
    /// breakdown rather than legitimate contraction.
    decay_rate: f64,
}

impl TransferPath {
    /// Builds the path over [t1, t2] ⊂ trajectory range.
    pub fn over(
        metric: &SurfaceMetric,
        traj: &GeodesicTrajectory,
        t1: f64,
        t2: f64,
    ) -> Result<TransferPath> {
        Self::build(metric, traj, t1, t2, None)
    }

    /// Path over `periods` traversals of a closed trajectory (universal
    /// cover propagation).
    pub fn over_closed(
        metric: &SurfaceMetric,
        traj: &GeodesicTrajectory,
        periods: f64,
    ) -> Result<TransferPath> {
        let period = traj.length();
        Self::build(
            metric,
            traj,
            traj.t_start(),
            traj.t_start() + periods * period,
            Some(period),
        )
    }

    fn build(
        metric: &SurfaceMetric,
        traj: &GeodesicTrajectory,
        t1: f64,
        t2: f64,
        closed_period: Option<f64>,
    ) -> Result<TransferPath> {
        let sys = TransferSystem {
            metric,
            traj,
            closed_period,
            domain_issue: Cell::new(false),
        };
        let k_max = max_curvature(metric, traj);
        let window = (0.04f64).min(1.2 / (1.0 + k_max).sqrt());
        let n_win = (((t2 - t1) / window).ceil() as usize).max(1);
        let mut opts = transfer_opts(k_max);
        let mut times = Vec::with_capacity(n_win + 1);
        let mut incr = Vec::with_capacity(n_win);
        times.push(t1);
        let mut full = Mat2::IDENTITY;
        for i in 0..n_win {
            let a = t1 + (t2 - t1) * i as f64 / n_win as f64;
            let b = t1 + (t2 - t1) * (i + 1) as f64 / n_win as f64;
            opts.h_initial = (b - a).min(opts.h_max);
            let y0 = [1.0, 0.0, 0.0, 1.0];
            let y = integrate(&sys, a, y0, b, &opts, |_| true)?;
            let m = Mat2::new(y[0], y[1], y[2], y[3]);
            times.push(b);
            incr.push(m);
            full = m.mul(full);
        }
        if sys.domain_issue.get() {
            return Err(Error::Integration {
                t: t2,
                context: "curvature evaluation left the chart domain".into(),
            });
        }
        Ok(TransferPath {
            times,
            incr,
            full,
            decay_rate: 1.0 + k_max.sqrt(),
        })
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Final transfer matrix over the whole path.
    pub fn full_matrix(&self) -> TransferMatrix {
        TransferMatrix {
            m: self.full,
            t0: self.t_start(),
            t1: self.t_end(),
        }
    }

    pub fn node_times(&self) -> &[f64] {
        &self.times
    }

    /// Propagated Jacobi data at every node, renormalized to unit length;
    /// the accompanying value is the log of the true norm.
    pub fn propagate_normalized(&self, v: Vec2) -> Vec<(f64, JacobiState, f64)> {
        let mut out = Vec::with_capacity(self.times.len());
        let mut cur = v;
        let mut log_scale = 0.0f64;
        let n0 = cur.norm();
        log_scale += n0.ln();
        cur = cur.scale(1.0 / n0);
        out.push((self.times[0], JacobiState::from_vec(cur), log_scale));
        for (i, m) in self.incr.iter().enumerate() {
            cur = m.apply(cur);
            let n = cur.norm();
            log_scale += n.ln();
            cur = cur.scale(1.0 / n);
            out.push((self.times[i + 1], JacobiState::from_vec(cur), log_scale));
        }
        out
    }

    /// Propagated Jacobi data at every node (true scale; overflow-prone on
    /// very long strongly hyperbolic paths — prefer the normalized form).
    pub fn propagate(&self, v: Vec2) -> Vec<(f64, JacobiState)> {
        self.propagate_normalized(v)
            .into_iter()
            .map(|(t, s, ls)| {
                let scale = ls.exp();
                (
                    t,
                    JacobiState {
                        j: s.j * scale,
                        jp: s.jp * scale,
                    },
                )
            })
            .collect()
    }

    /// Y-axis crossings of P_{t,t1}·v on (a, b]; each crossing is checked
    /// transverse and clockwise. Crossing data is reported at the local
    /// renormalized (unit) scale, where node data with |J| and |J'| both
    /// below 1e-12 signals numerical breakdown (impossible for true Jacobi
    /// fields, which are unit vectors in this frame).
    pub fn crossings(&self, v: Vec2, a: f64, b: f64) -> Result<Vec<Crossing>> {
        let data = self.propagate_normalized(v);
        let mut out = Vec::new();
        for w in data.windows(2) {
            let (t0, s0, l0) = w[0];
            let (t1, s1n, l1) = w[1];
            if s0.j.abs() < 1e-12 && s0.jp.abs() < 1e-12 {
                return Err(Error::DegenerateField(t0));
            }
            if t1 <= a || t0 > b {
                continue;
            }
            // Rescale the right node into the left node's frame so the
            // Hermite refinement sees the true solution up to one common
            // positive factor.
            let rel = (l1 - l0).exp();
            let s1 = JacobiState {
                j: s1n.j * rel,
                jp: s1n.jp * rel,
            };
            let crossing_here = if s0.j == 0.0 {
                // Zero exactly at a node: counted at that node (skip to
                // avoid double counting with the previous window).
                false
            } else {
                (s0.j < 0.0) != (s1.j < 0.0) || s1.j == 0.0
            };
            if !crossing_here {
                continue;
            }
            let h = t1 - t0;
            let t_zero = if s1.j == 0.0 {
                t1
            } else {
                crate::numeric::roots::bisect(t0, t1, 1e-12, |t| hermite_j(t0, s0, t1, s1, t))
            };
            if t_zero <= a + 1e-15 || t_zero > b + 1e-12 {
                continue;
            }
            let frac = (t_zero - t0) / h;
            let jp_zero = s0.jp + frac * (s1.jp - s0.jp);
            let after_sign = if s1.j != 0.0 { s1.j } else { jp_zero };
            let clockwise = jp_zero != 0.0 && after_sign.signum() == jp_zero.signum();
            if jp_zero.abs() < 1e-12 {
                return Err(Error::DegenerateField(t_zero));
            }
            out.push(Crossing {
                t: t_zero,
                j: 0.0,
                jp: jp_zero,
                clockwise,
            });
        }
        Ok(out)
    }

    /// Per-window transfer increments (node i → i+1).
    pub fn increments(&self) -> &[Mat2] {
        &self.incr
    }
}

fn hermite_j(t0: f64, s0: JacobiState, t1: f64, s1: JacobiState, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * s0.j
        + (s3 - 2.0 * s2 + s) * h * s0.jp
        + (-2.0 * s3 + 3.0 * s2) * s1.j
        + (s3 - s2) * h * s1.jp
}

/// Counts y-axis crossings of the Jacobi vector with initial data `v` at
/// `t1`, over (t1, t2].
pub fn count_crossings(
    metric: &SurfaceMetric,
    traj: &GeodesicTrajectory,
    t1: f64,
    t2: f64,
    v: Vec2,
) -> Result<usize> {
    if v.norm() == 0.0 {
        return Err(Error::Precondition("initial Jacobi vector is zero".into()));
    }
    let path = TransferPath::over(metric, traj, t1, t2)?;
    Ok(path.crossings(v, t1, t2)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic_flow::{integrate_geodesic, PhasePoint};
    use crate::surface::{Coeff, Profile};
    use std::f64::consts::PI;

    fn flat_line(len: f64) -> (SurfaceMetric, GeodesicTrajectory) {
        let m = SurfaceMetric::flat_torus(1.0, 1.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.5), 0.0);
        let traj = integrate_geodesic(&m, &start, len).unwrap();
        (m, traj)
    }

    fn sphere_equator(len: f64) -> (SurfaceMetric, GeodesicTrajectory) {
        let m = SurfaceMetric::revolution(Profile::Sphere, 1e-3, PI - 1e-3);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, PI / 2.0), 0.0);
        let traj = integrate_geodesic(&m, &start, len).unwrap();
        (m, traj)
    }

    #[test]
    fn zero_curvature_gives_shear_matrix() {
        let tau = 0.8;
        let (m, traj) = flat_line(tau);
        let p = relative_poincare(&m, &traj, 0.0, tau).unwrap();
        assert!((p.m.a - 1.0).abs() < 1e-10);
        assert!((p.m.b - tau).abs() < 1e-10);
        assert!(p.m.c.abs() < 1e-10);
        assert!((p.m.d - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unit_curvature_gives_rotation() {
        let tau = 1.3;
        let (m, traj) = sphere_equator(tau);
        let p = relative_poincare(&m, &traj, 0.0, tau).unwrap();
        assert!((p.m.a - tau.cos()).abs() < 1e-8);
        assert!((p.m.b - tau.sin()).abs() < 1e-8);
        assert!((p.m.c + tau.sin()).abs() < 1e-8);
        assert!((p.m.d - tau.cos()).abs() < 1e-8);
    }

    #[test]
    fn negative_curvature_eigenstructure() {
        let m = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.0), 0.0);
        let traj = integrate_geodesic(&m, &start, 2.0 * PI).unwrap();
        let p = relative_poincare(&m, &traj, 0.0, 2.0 * PI).unwrap();
        let ev = p.m.eigenvalues();
        let expected = (2.0 * PI).exp();
        assert!((ev[1].0 - expected).abs() / expected < 1e-8);
        assert!((ev[0].0 - 1.0 / expected).abs() / (1.0 / expected) < 1e-6);
        let v_plus = p.m.eigenvector(ev[0].0);
        // Contracting eigenvector along (1, -1).
        assert!((v_plus.x + v_plus.y).abs() < 1e-6, "{v_plus:?}");
        assert!(p.det_defect() < 1e-8);
    }

    #[test]
    fn composition_law() {
        let m = SurfaceMetric::fermi_strip(Coeff::Dumbbell { depth: 0.25 }, 4.0, -2.0, 2.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.3, 0.4), 0.3);
        let traj = integrate_geodesic(&m, &start, 3.0).unwrap();
        let p_ab = relative_poincare(&m, &traj, 0.0, 1.2).unwrap();
        let p_bc = relative_poincare(&m, &traj, 1.2, 3.0).unwrap();
        let p_ac = relative_poincare(&m, &traj, 0.0, 3.0).unwrap();
        let composed = p_bc.compose(&p_ab);
        let diff = [
            composed.m.a - p_ac.m.a,
            composed.m.b - p_ac.m.b,
            composed.m.c - p_ac.m.c,
            composed.m.d - p_ac.m.d,
        ];
        for d in diff {
            assert!(d.abs() < 1e-7, "composition defect {d}");
        }
    }

    #[test]
    fn crossing_counts_match_sine_zeros() {
        // K = 1, v = (0,1): J = sin t.
        let (m, traj) = sphere_equator(2.0 * PI + 0.1);
        let c1 = count_crossings(&m, &traj, 0.0, 1.5 * PI, Vec2::new(0.0, 1.0)).unwrap();
        assert_eq!(c1, 1);
        let c2 = count_crossings(&m, &traj, 0.0, 2.0 * PI + 0.1, Vec2::new(0.0, 1.0)).unwrap();
        assert_eq!(c2, 2);
        // K = 0, v = (1,0): no zeros.
        let (mf, trajf) = flat_line(5.0);
        let c0 = count_crossings(&mf, &trajf, 0.0, 5.0, Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(c0, 0);
    }

    #[test]
    fn crossings_are_clockwise() {
        let (m, traj) = sphere_equator(7.0);
        let path = TransferPath::over(&m, &traj, 0.0, 7.0).unwrap();
        let crossings = path.crossings(Vec2::new(0.0, 1.0), 0.0, 7.0).unwrap();
        assert_eq!(crossings.len(), 2);
        for c in &crossings {
            assert!(c.clockwise, "crossing at {} not clockwise", c.t);
        }
        assert!((crossings[0].t - PI).abs() < 1e-8);
        assert!((crossings[1].t - 2.0 * PI).abs() < 1e-8);
    }
}
