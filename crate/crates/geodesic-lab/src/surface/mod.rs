//! Chart-based surface metrics: flat tori, surfaces of revolution, and
//! Fermi strips (f²(s,t) ds² + dt²), with optional quintic bump
//! perturbations and localized deformations.
//!
//! All three built-in families share the Fermi normal form, in which the
//! curves s = const are geodesics and the Gaussian curvature is
//! K = -f_tt / f. Deformed metrics (see [`deformed`]) leave the Fermi
//! class and are evaluated as general 2x2 metric tensors.

pub mod coeff;
pub mod deformed;
pub mod sampling;

use crate::error::{Error, Result};
use crate::numeric::Vec2;
use serde::{Deserialize, Serialize};

pub use coeff::{Bump, Coeff, CoeffJet, FourierTerm, Lens, Profile, TrigTerm};
pub use deformed::DeformedMetric;

/// Family tag carried in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MetricFamily {
    FlatTorus { a: f64, b: f64 },
    Revolution { profile: Profile },
    FermiStrip { coeff: Coeff },
    Deformed { shear: f64, inner: Box<MetricFamily> },
}

#[derive(Debug, Clone)]
enum MetricKind {
    Fermi { coeff: Coeff },
    Deformed(Box<DeformedMetric>),
}

/// Local metric data at a chart point: either a Fermi coefficient jet or a
/// general tensor with first derivatives.
#[derive(Debug, Clone, Copy)]
pub enum LocalGeometry {
    Fermi(CoeffJet),
    /// [g11, g12, g22] plus s- and t-derivatives of each component.
    General {
        g: [f64; 3],
        dg_s: [f64; 3],
        dg_t: [f64; 3],
    },
}

#[derive(Debug, Clone)]
pub struct SurfaceMetric {
    kind: MetricKind,
    bumps: Vec<Bump>,
    family: MetricFamily,
    s_period: f64,
    t_min: f64,
    t_max: f64,
    t_periodic: bool,
}

impl SurfaceMetric {
    /// Flat torus with side lengths a (s-direction) and b (t-direction).
    pub fn flat_torus(a: f64, b: f64) -> Self {
        assert!(a > 0.0 && b > 0.0);
        SurfaceMetric {
            kind: MetricKind::Fermi {
                coeff: Coeff::Const(1.0),
            },
            bumps: Vec::new(),
            family: MetricFamily::FlatTorus { a, b },
            s_period: a,
            t_min: 0.0,
            t_max: b,
            t_periodic: true,
        }
    }

    /// Surface of revolution with arclength-parameterized profile r(t);
    /// chart coordinates (θ, t), θ of period 2π, metric r²dθ² + dt².
    pub fn revolution(profile: Profile, t_min: f64, t_max: f64) -> Self {
        assert!(t_min < t_max);
        SurfaceMetric {
            kind: MetricKind::Fermi {
                coeff: Coeff::OfT(profile.clone()),
            },
            bumps: Vec::new(),
            family: MetricFamily::Revolution { profile },
            s_period: 2.0 * std::f64::consts::PI,
            t_min,
            t_max,
            t_periodic: false,
        }
    }

    /// Surface of revolution with a t-periodic profile (e.g. a torus of
    /// revolution): both chart coordinates wrap.
    pub fn revolution_periodic(profile: Profile, t_period: f64) -> Self {
        assert!(t_period > 0.0);
        SurfaceMetric {
            kind: MetricKind::Fermi {
                coeff: Coeff::OfT(profile.clone()),
            },
            bumps: Vec::new(),
            family: MetricFamily::Revolution { profile },
            s_period: 2.0 * std::f64::consts::PI,
            t_min: 0.0,
            t_max: t_period,
            t_periodic: true,
        }
    }

    /// Fermi strip f²(s,t) ds² + dt² with s-period and t-range.
    pub fn fermi_strip(coeff: Coeff, s_period: f64, t_min: f64, t_max: f64) -> Self {
        assert!(s_period > 0.0 && t_min < t_max);
        SurfaceMetric {
            kind: MetricKind::Fermi {
                coeff: coeff.clone(),
            },
            bumps: Vec::new(),
            family: MetricFamily::FermiStrip { coeff },
            s_period,
            t_min,
            t_max,
            t_periodic: false,
        }
    }

    pub(crate) fn from_deformed(d: DeformedMetric) -> Self {
        let base = d.base.clone();
        let family = MetricFamily::Deformed {
            shear: d.w,
            inner: Box::new(base.family.clone()),
        };
        SurfaceMetric {
            kind: MetricKind::Deformed(Box::new(d)),
            bumps: Vec::new(),
            family,
            s_period: base.s_period,
            t_min: base.t_min,
            t_max: base.t_max,
            t_periodic: base.t_periodic,
        }
    }

    /// Adds quintic bump perturbations to the defining coefficient.
    pub fn with_bumps(mut self, bumps: Vec<Bump>) -> Self {
        assert!(
            matches!(self.kind, MetricKind::Fermi { .. }),
            "bumps apply to the built-in families"
        );
        self.bumps = bumps;
        self
    }

    pub fn family(&self) -> &MetricFamily {
        &self.family
    }

    pub fn is_fermi(&self) -> bool {
        matches!(self.kind, MetricKind::Fermi { .. })
    }

    pub fn is_perturbed(&self) -> bool {
        !self.bumps.is_empty()
    }

    pub fn s_period(&self) -> f64 {
        self.s_period
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    pub fn t_periodic(&self) -> bool {
        self.t_periodic
    }

    /// Wraps s into [0, period).
    pub fn wrap_s(&self, s: f64) -> f64 {
        s.rem_euclid(self.s_period)
    }

    pub fn wrap_point(&self, p: Vec2) -> Vec2 {
        let t = if self.t_periodic {
            self.t_min + (p.y - self.t_min).rem_euclid(self.t_max - self.t_min)
        } else {
            p.y
        };
        Vec2::new(self.wrap_s(p.x), t)
    }

    /// Shortest representative of the displacement q - p under chart
    /// periodicity.
    pub fn displacement(&self, p: Vec2, q: Vec2) -> Vec2 {
        let half = self.s_period / 2.0;
        let mut ds = (q.x - p.x).rem_euclid(self.s_period);
        if ds > half {
            ds -= self.s_period;
        }
        let dt = if self.t_periodic {
            let span = self.t_max - self.t_min;
            let mut d = (q.y - p.y).rem_euclid(span);
            if d > span / 2.0 {
                d -= span;
            }
            d
        } else {
            q.y - p.y
        };
        Vec2::new(ds, dt)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.t_periodic || (p.y >= self.t_min && p.y <= self.t_max)
    }

    fn check_domain(&self, p: Vec2) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(
                p.x,
                p.y,
                format!("t must lie in [{}, {}]", self.t_min, self.t_max),
            ))
        }
    }

    /// Fermi coefficient jet (base family plus bumps). Panics for deformed
    /// metrics, which are not of Fermi form; use [`Self::local`] instead.
    pub fn coeff_jet(&self, s: f64, t: f64) -> CoeffJet {
        match &self.kind {
            MetricKind::Fermi { coeff } => {
                let mut jet = coeff.jet(self.wrap_s(s), t);
                for b in &self.bumps {
                    let d = self.displacement(Vec2::new(b.center_s, b.center_t), Vec2::new(s, t));
                    let bj = b.jet_at(d.x, d.y);
                    jet.f += bj.f;
                    jet.f_s += bj.f_s;
                    jet.f_t += bj.f_t;
                    jet.f_tt += bj.f_tt;
                }
                jet
            }
            MetricKind::Deformed(_) => panic!("deformed metric has no Fermi coefficient"),
        }
    }

    /// Coefficient difference f(s,t) - f(s,w), cancellation-free for the
    /// built-in rotationally symmetric families.
    pub fn coeff_gap(&self, s: f64, t: f64, w: f64) -> f64 {
        match &self.kind {
            MetricKind::Fermi { coeff } => {
                let mut gap = coeff.parallel_gap(self.wrap_s(s), t, w);
                for b in &self.bumps {
                    let dt = self.displacement(Vec2::new(b.center_s, b.center_t), Vec2::new(s, t));
                    let dw = self.displacement(Vec2::new(b.center_s, b.center_t), Vec2::new(s, w));
                    gap += b.jet_at(dt.x, dt.y).f - b.jet_at(dw.x, dw.y).f;
                }
                gap
            }
            MetricKind::Deformed(_) => panic!("deformed metric has no Fermi coefficient"),
        }
    }

    /// Local geometry at a chart point (hot path for integration).
    pub fn local(&self, p: Vec2) -> LocalGeometry {
        match &self.kind {
            MetricKind::Fermi { .. } => LocalGeometry::Fermi(self.coeff_jet(p.x, p.y)),
            MetricKind::Deformed(d) => d.local(p),
        }
    }

    /// Metric tensor [g11, g12, g22] at p (evaluation only).
    pub fn tensor(&self, p: Vec2) -> [f64; 3] {
        match &self.kind {
            MetricKind::Fermi { .. } => {
                let f = self.coeff_jet(p.x, p.y).f;
                [f * f, 0.0, 1.0]
            }
            MetricKind::Deformed(d) => d.tensor(p),
        }
    }

    /// Gaussian curvature at p.
    pub fn curvature_at(&self, p: Vec2) -> Result<f64> {
        self.check_domain(p)?;
        match &self.kind {
            MetricKind::Fermi { .. } => {
                let jet = self.coeff_jet(p.x, p.y);
                Ok(-jet.f_tt / jet.f)
            }
            MetricKind::Deformed(d) => Ok(d.curvature(p)),
        }
    }

    /// Christoffel symbols Γ^i_{jk} with indices [i][j][k], coordinates
    /// ordered (s, t); symmetric in (j, k).
    pub fn christoffel_at(&self, p: Vec2) -> Result<[[[f64; 2]; 2]; 2]> {
        self.check_domain(p)?;
        Ok(christoffel_from_local(&self.local(p)))
    }

    /// Inner product of chart vectors at p.
    pub fn inner(&self, p: Vec2, u: Vec2, v: Vec2) -> f64 {
        let g = self.tensor(p);
        g[0] * u.x * v.x + g[1] * (u.x * v.y + u.y * v.x) + g[2] * u.y * v.y
    }

    pub fn norm(&self, p: Vec2, v: Vec2) -> f64 {
        self.inner(p, v, v).max(0.0).sqrt()
    }

    /// Orthonormal frame (e1 along ∂s, e2 completing it, positively
    /// oriented) expressed in chart components.
    pub fn frame(&self, p: Vec2) -> (Vec2, Vec2) {
        let g = self.tensor(p);
        let e1 = Vec2::new(1.0 / g[0].sqrt(), 0.0);
        // e2 = (∂t - (g12/g11) ∂s) normalized.
        let w = Vec2::new(-g[1] / g[0], 1.0);
        let n = (g[2] - g[1] * g[1] / g[0]).sqrt();
        let e2 = Vec2::new(w.x / n, w.y / n);
        (e1, e2)
    }

    /// Rotates v by +90° in the metric (orientation of the chart).
    pub fn rotate90(&self, p: Vec2, v: Vec2) -> Vec2 {
        let (e1, e2) = self.frame(p);
        let a = self.inner(p, v, e1);
        let b = self.inner(p, v, e2);
        Vec2::new(-b * e1.x + a * e2.x, -b * e1.y + a * e2.y)
    }

    /// Frame angle of a chart vector: 0 along +s, π/2 along +t.
    pub fn frame_angle(&self, p: Vec2, v: Vec2) -> f64 {
        let (e1, e2) = self.frame(p);
        let a = self.inner(p, v, e1);
        let b = self.inner(p, v, e2);
        b.atan2(a)
    }

    /// Unit vector with the given frame angle.
    pub fn velocity_from_angle(&self, p: Vec2, theta: f64) -> Vec2 {
        let (e1, e2) = self.frame(p);
        Vec2::new(
            theta.cos() * e1.x + theta.sin() * e2.x,
            theta.cos() * e1.y + theta.sin() * e2.y,
        )
    }

    /// Finite-difference Brioschi curvature from metric-tensor evaluations
    /// only; independent oracle for the analytic curvature path.
    pub fn brioschi_fd_curvature(&self, p: Vec2, h: f64) -> f64 {
        brioschi_fd(&|q| self.tensor(q), p, h)
    }

    /// Serializable description for reports.
    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "bumps": self.bumps,
            "s_period": self.s_period,
            "t_range": [self.t_min, self.t_max],
            "t_periodic": self.t_periodic,
        })
    }
}

/// Gaussian curvature by the Brioschi formula with central finite
/// differences of the metric components (step h). Works for any tensor
/// field, orthogonal or not; this is the evaluation-only curvature oracle.
pub fn brioschi_fd(tensor: &dyn Fn(Vec2) -> [f64; 3], p: Vec2, h: f64) -> f64 {
    let comp = |i: usize, q: Vec2| tensor(q)[i];
    let d_s =
        |i: usize, q: Vec2| (comp(i, Vec2::new(q.x + h, q.y)) - comp(i, Vec2::new(q.x - h, q.y))) / (2.0 * h);
    let d_t =
        |i: usize, q: Vec2| (comp(i, Vec2::new(q.x, q.y + h)) - comp(i, Vec2::new(q.x, q.y - h))) / (2.0 * h);
    let d_tt = |i: usize, q: Vec2| {
        (comp(i, Vec2::new(q.x, q.y + h)) - 2.0 * comp(i, q) + comp(i, Vec2::new(q.x, q.y - h)))
            / (h * h)
    };
    let d_ss = |i: usize, q: Vec2| {
        (comp(i, Vec2::new(q.x + h, q.y)) - 2.0 * comp(i, q) + comp(i, Vec2::new(q.x - h, q.y)))
            / (h * h)
    };
    let d_st = |i: usize, q: Vec2| {
        (comp(i, Vec2::new(q.x + h, q.y + h)) - comp(i, Vec2::new(q.x + h, q.y - h))
            - comp(i, Vec2::new(q.x - h, q.y + h))
            + comp(i, Vec2::new(q.x - h, q.y - h)))
            / (4.0 * h * h)
    };
    let (e, f, g) = (comp(0, p), comp(1, p), comp(2, p));
    let (e_s, e_t) = (d_s(0, p), d_t(0, p));
    let (f_s, f_t) = (d_s(1, p), d_t(1, p));
    let (g_s, g_t) = (d_s(2, p), d_t(2, p));
    let e_tt = d_tt(0, p);
    let g_ss = d_ss(2, p);
    let f_st = d_st(1, p);
    let m1 = [
        [-0.5 * e_tt + f_st - 0.5 * g_ss, 0.5 * e_s, f_s - 0.5 * e_t],
        [f_t - 0.5 * g_s, e, f],
        [0.5 * g_t, f, g],
    ];
    let m2 = [
        [0.0, 0.5 * e_t, 0.5 * g_s],
        [0.5 * e_t, e, f],
        [0.5 * g_s, f, g],
    ];
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let denom = e * g - f * f;
    (det3(m1) - det3(m2)) / (denom * denom)
}

/// Christoffel symbols from local geometry. For Fermi coefficients the
/// nonzero symbols are Γ^s_ss = f_s/f, Γ^s_st = f_t/f, Γ^t_ss = -f f_t.
pub fn christoffel_from_local(local: &LocalGeometry) -> [[[f64; 2]; 2]; 2] {
    match local {
        LocalGeometry::Fermi(jet) => {
            let a = jet.f_s / jet.f;
            let b = jet.f_t / jet.f;
            let c = -jet.f * jet.f_t;
            [[[a, b], [b, 0.0]], [[c, 0.0], [0.0, 0.0]]]
        }
        LocalGeometry::General { g, dg_s, dg_t } => {
            // Γ^k_ij = ½ g^{kl} (∂_i g_jl + ∂_j g_il - ∂_l g_ij)
            let det = g[0] * g[2] - g[1] * g[1];
            let inv = [[g[2] / det, -g[1] / det], [-g[1] / det, g[0] / det]];
            let gm = [[g[0], g[1]], [g[1], g[2]]];
            let _ = gm;
            let dg = [
                [[dg_s[0], dg_s[1]], [dg_s[1], dg_s[2]]],
                [[dg_t[0], dg_t[1]], [dg_t[1], dg_t[2]]],
            ];
            let mut out = [[[0.0; 2]; 2]; 2];
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let mut sum = 0.0;
                        for l in 0..2 {
                            sum += inv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                        }
                        out[k][i][j] = 0.5 * sum;
                    }
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn flat_torus_is_flat_with_zero_christoffels() {
        let m = SurfaceMetric::flat_torus(1.0, 1.0);
        let p = Vec2::new(0.3, 0.7);
        assert_eq!(m.curvature_at(p).unwrap(), 0.0);
        let ch = m.christoffel_at(p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert_eq!(ch[i][j][k], 0.0);
                }
            }
        }
    }

    #[test]
    fn catenoid_has_curvature_minus_one_on_waist() {
        let m = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
        let k = m.curvature_at(Vec2::new(0.7, 0.0)).unwrap();
        assert!((k + 1.0).abs() < 1e-14);
    }

    #[test]
    fn torus_inner_equator_curvature() {
        // r(t) = 2 + cos t; inner equator at t = π has K = -1.
        let m = SurfaceMetric::revolution(Profile::TorusMinor { major: 2.0 }, f64::NEG_INFINITY, f64::INFINITY);
        let k = m.curvature_at(Vec2::new(0.2, PI)).unwrap();
        assert!((k + 1.0).abs() < 1e-12, "K = {k}");
        // Outer equator: K = 1/3.
        let k0 = m.curvature_at(Vec2::new(0.2, 0.0)).unwrap();
        assert!((k0 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn revolution_christoffel_matches_formulas() {
        let m = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
        let t = 0.4;
        let ch = m.christoffel_at(Vec2::new(1.0, t)).unwrap();
        let (r, r1, _) = Profile::Cosh.jet(t);
        // Γ^t_θθ = -r r' and Γ^θ_θt = r'/r.
        assert!((ch[1][0][0] + r * r1).abs() < 1e-14);
        assert!((ch[0][0][1] - r1 / r).abs() < 1e-14);
        assert!((ch[0][0][1] - ch[0][1][0]).abs() == 0.0);
    }

    #[test]
    fn fermi_strip_christoffel_f_t_over_f() {
        let c = Coeff::Dumbbell { depth: 0.25 };
        let m = SurfaceMetric::fermi_strip(c.clone(), 4.0, -2.0, 2.0);
        let (s, t) = (1.3, 0.6);
        let ch = m.christoffel_at(Vec2::new(s, t)).unwrap();
        let jet = c.jet(s, t);
        assert!((ch[0][0][1] - jet.f_t / jet.f).abs() < 1e-14);
    }

    #[test]
    fn analytic_curvature_matches_brioschi_fd() {
        let metrics = [
            SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5),
            SurfaceMetric::revolution(Profile::TorusMinor { major: 2.0 }, -10.0, 10.0),
            SurfaceMetric::fermi_strip(Coeff::Dumbbell { depth: 0.25 }, 4.0, -2.0, 2.0),
            SurfaceMetric::flat_torus(1.0, 1.0).with_bumps(vec![Bump {
                center_s: 0.5,
                center_t: 0.5,
                amplitude: 0.05,
                radius: 0.3,
            }]),
        ];
        for m in &metrics {
            for i in 0..5 {
                let p = Vec2::new(0.11 + 0.13 * i as f64, 0.4 - 0.15 * i as f64);
                let ka = m.curvature_at(p).unwrap();
                let kf = m.brioschi_fd_curvature(p, 1e-5);
                let scale = ka.abs().max(1.0);
                assert!(
                    (ka - kf).abs() / scale < 1e-5,
                    "analytic {ka} vs brioschi {kf} on {:?}",
                    m.family()
                );
            }
        }
    }

    #[test]
    fn displacement_wraps_shortest_way() {
        let m = SurfaceMetric::flat_torus(1.0, 1.0);
        let d = m.displacement(Vec2::new(0.9, 0.1), Vec2::new(0.1, 0.9));
        assert!((d.x - 0.2).abs() < 1e-14);
        assert!((d.y + 0.2).abs() < 1e-14);
    }

    #[test]
    fn frame_is_orthonormal() {
        let m = SurfaceMetric::fermi_strip(Coeff::Dumbbell { depth: 0.3 }, 4.0, -2.0, 2.0);
        let p = Vec2::new(0.7, 0.9);
        let (e1, e2) = m.frame(p);
        assert!((m.inner(p, e1, e1) - 1.0).abs() < 1e-14);
        assert!((m.inner(p, e2, e2) - 1.0).abs() < 1e-14);
        assert!(m.inner(p, e1, e2).abs() < 1e-14);
        let n = m.rotate90(p, e1);
        assert!((n.x - e2.x).abs() < 1e-14 && (n.y - e2.y).abs() < 1e-14);
    }
}
