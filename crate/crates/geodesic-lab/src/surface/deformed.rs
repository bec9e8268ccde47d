//! Localized shear deformation of a Fermi metric.
//!
//! Given a base metric f(t)² ds² + dt² (s-independent over a box column),
//! a horizontal segment c = {t = t_c} of arclength X, and a shear w, the
//! deformed metric agrees with the base outside the box
//! [0, X] x [0, 3ε/4] (box coordinates: x arclength along c, τ = t - t_c)
//! and redirects the family of geodesics entering the box perpendicular to
//! c so that they exit perpendicular to the tilted curve
//! c_w(x) = (x, ε - w·x).
//!
//! Construction: geodesic normal coordinates Ψ_w are re-integrated from
//! c_w (each ray carries its lateral Jacobi stretch, which is the Fermi
//! coefficient f_w of the base metric in the Ψ_w chart); a quintic blend
//! η(τ) interpolates between the undeformed chart near c and the Ψ_w chart
//! near c_w, and the metric in the blended chart is declared to be
//! (η f + (1-η) f_w)² dx² + dy². An s-cutoff φ glues it back to the base
//! metric at the left/right edges of the box. In the interior band where
//! φ = 1 the blended chart's vertical lines are geodesics, which is what
//! produces the perpendicular exit.

use super::coeff::{smoothstep, smoothstep_d1, smoothstep_d2};
use super::{christoffel_from_local, LocalGeometry, SurfaceMetric};
use crate::error::{Error, Result};
use crate::numeric::linalg::solve2;
use crate::numeric::ode::{integrate, OdeOptions, OdeSystem, Step};
use crate::numeric::{Mat2, Vec2};

#[derive(Debug, Clone)]
struct NormalRay {
    steps: Vec<Step<6>>,
}

impl NormalRay {
    fn eval(&self, tau: f64) -> [f64; 6] {
        let steps = &self.steps;
        if tau <= steps[0].t0 {
            return steps[0].y0;
        }
        let last = steps.last().unwrap();
        if tau >= last.t1 {
            return last.y1;
        }
        let mut lo = 0usize;
        let mut hi = steps.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if steps[mid].t1 < tau {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        steps[lo].eval(tau)
    }
}

/// Geodesic + lateral Jacobi stretch along a ray of the normal family.
struct RaySystem<'a> {
    base: &'a SurfaceMetric,
}

impl OdeSystem<6> for RaySystem<'_> {
    fn rhs(&self, _t: f64, y: &[f64; 6], dy: &mut [f64; 6]) {
        let p = Vec2::new(y[0], y[1]);
        let local = self.base.local(p);
        let ch = christoffel_from_local(&local);
        let (vs, vt) = (y[2], y[3]);
        dy[0] = vs;
        dy[1] = vt;
        dy[2] = -(ch[0][0][0] * vs * vs + 2.0 * ch[0][0][1] * vs * vt + ch[0][1][1] * vt * vt);
        dy[3] = -(ch[1][0][0] * vs * vs + 2.0 * ch[1][0][1] * vs * vt + ch[1][1][1] * vt * vt);
        let k = match local {
            LocalGeometry::Fermi(jet) => -jet.f_tt / jet.f,
            LocalGeometry::General { .. } => unreachable!("base metric is Fermi"),
        };
        dy[4] = y[5];
        dy[5] = -k * y[4];
    }
}

#[derive(Debug, Clone)]
pub struct DeformedMetric {
    pub base: SurfaceMetric,
    pub w: f64,
    pub t_c: f64,
    pub eps: f64,
    pub s_lo: f64,
    pub s_hi: f64,
    pub f0: f64,
    pub x_total: f64,
    rays: Vec<NormalRay>,
    x_step: f64,
}

impl DeformedMetric {
    /// Integrates the normal-ray family of c_w and assembles the metric.
    /// Fails if the shear would tilt c_w into the blend zone (chart fold).
    pub fn build(
        base: &SurfaceMetric,
        t_c: f64,
        eps: f64,
        s_lo: f64,
        s_hi: f64,
        w: f64,
    ) -> Result<Self> {
        if !base.is_fermi() {
            return Err(Error::Precondition(
                "deformation base must be a Fermi-form metric".into(),
            ));
        }
        // s-independence over the box column.
        for i in 0..=16 {
            for j in 0..=8 {
                let s = s_lo + (s_hi - s_lo) * i as f64 / 16.0;
                let t = t_c + eps * j as f64 / 8.0;
                if base.coeff_jet(s, t).f_s.abs() > 1e-12 {
                    return Err(Error::Precondition(
                        "base coefficient must be s-independent over the deformation box".into(),
                    ));
                }
            }
        }
        let f0 = base.coeff_jet(s_lo, t_c).f;
        let x_total = (s_hi - s_lo) * f0;
        if w.abs() * x_total >= eps / 5.0 {
            return Err(Error::DeformationFold(
                w,
                format!(
                    "|w|·X = {:.3e} reaches the blend zone (limit {:.3e})",
                    w.abs() * x_total,
                    eps / 5.0
                ),
            ));
        }

        let n_x = ((x_total / 0.006).ceil() as usize).clamp(257, 2049);
        let x_step = x_total / (n_x - 1) as f64;
        let sys = RaySystem { base };
        let opts = OdeOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            h_initial: 1e-3,
            h_min: 1e-14,
            h_max: 0.02,
            };
        let mut rays = Vec::with_capacity(n_x);
        for i in 0..n_x {
            let x = i as f64 * x_step;
            let (pos, vel, j0, j0p) = ray_initial_data(base, t_c, eps, s_lo, f0, w, x);
            let y0 = [pos.x, pos.y, vel.x, vel.y, j0, j0p];
            let mut steps = Vec::new();
            integrate(&sys, 0.0, y0, 1.05 * eps, &opts, |s| { steps.push(s.clone()); true })?;
            for s in &steps {
                if s.y1[4] <= 0.0 {
                    return Err(Error::DeformationFold(
                        w,
                        "normal chart folds: lateral stretch hit zero".into(),
                    ));
                }
            }
            rays.push(NormalRay { steps });
        }
        Ok(DeformedMetric {
            base: base.clone(),
            w,
            t_c,
            eps,
            s_lo,
            s_hi,
            f0,
            x_total,
            rays,
            x_step,
        })
    }

    /// The tilted exit curve c_w in chart coordinates, sampled by arclength
    /// parameter x of c.
    pub fn exit_curve(&self, x: f64) -> Vec2 {
        Vec2::new(self.s_lo + x / self.f0, self.t_c + self.eps - self.w * x)
    }

    /// Unit tangent of c_w at parameter x.
    pub fn exit_tangent(&self, x: f64) -> Vec2 {
        let t = Vec2::new(1.0 / self.f0, -self.w);
        let p = self.exit_curve(x);
        t.scale(1.0 / self.base.norm(p, t))
    }

    fn eta(&self, tau: f64) -> (f64, f64, f64) {
        // 1 on [0, ε/2], 0 on [3ε/4, ε], quintic in between.
        let u = (tau - 0.5 * self.eps) / (0.25 * self.eps);
        let s = smoothstep(u);
        let s1 = smoothstep_d1(u) / (0.25 * self.eps);
        let s2 = smoothstep_d2(u) / (0.25 * self.eps * 0.25 * self.eps);
        (1.0 - s, -s1, -s2)
    }

    fn phi(&self, x: f64) -> f64 {
        smoothstep(x / self.eps) * smoothstep((self.x_total - x) / self.eps)
    }

    /// Box-chart x of the undeformed chart for a global point.
    fn x_phi_of(&self, p: Vec2) -> f64 {
        let s_mid = 0.5 * (self.s_lo + self.s_hi);
        let ds = self.base.displacement(Vec2::new(s_mid, p.y), p).x;
        (s_mid + ds - self.s_lo) * self.f0
    }

    fn in_machinery_zone(&self, p: Vec2) -> bool {
        let tau = p.y - self.t_c;
        let pad = 0.02 * self.eps;
        if tau <= 0.5 * self.eps - pad || tau >= 0.75 * self.eps + pad {
            return false;
        }
        let x = self.x_phi_of(p);
        x > -0.2 * self.eps && x < self.x_total + 0.2 * self.eps
    }

    /// Family evaluation at (x, τ): cubic interpolation in x across rays,
    /// dense in τ along each ray. Returns the 6-state and its x-derivative.
    fn family_eval(&self, x: f64, tau: f64) -> ([f64; 6], [f64; 6]) {
        let n = self.rays.len();
        let fi = (x / self.x_step).floor() as isize;
        let i0 = (fi - 1).clamp(0, n as isize - 4) as usize;
        let xs: [f64; 4] = [
            i0 as f64 * self.x_step,
            (i0 + 1) as f64 * self.x_step,
            (i0 + 2) as f64 * self.x_step,
            (i0 + 3) as f64 * self.x_step,
        ];
        let ys: [[f64; 6]; 4] = [
            self.rays[i0].eval(tau),
            self.rays[i0 + 1].eval(tau),
            self.rays[i0 + 2].eval(tau),
            self.rays[i0 + 3].eval(tau),
        ];
        let mut weights = [0.0; 4];
        let mut dweights = [0.0; 4];
        for j in 0..4 {
            let mut w = 1.0;
            for k in 0..4 {
                if k != j {
                    w *= (x - xs[k]) / (xs[j] - xs[k]);
                }
            }
            weights[j] = w;
            let mut dw = 0.0;
            for m in 0..4 {
                if m == j {
                    continue;
                }
                let mut term = 1.0 / (xs[j] - xs[m]);
                for k in 0..4 {
                    if k != j && k != m {
                        term *= (x - xs[k]) / (xs[j] - xs[k]);
                    }
                }
                dw += term;
            }
            dweights[j] = dw;
        }
        let mut val = [0.0; 6];
        let mut dval = [0.0; 6];
        for c in 0..6 {
            for j in 0..4 {
                val[c] += weights[j] * ys[j][c];
                dval[c] += dweights[j] * ys[j][c];
            }
        }
        (val, dval)
    }

    /// Inverts the Ψ_w normal chart: finds (x, τ) with ray(x)(τ) = p.
    fn psi_inverse(&self, p: Vec2, x_init: f64, tau_init: f64) -> (f64, f64) {
        let mut x = x_init.clamp(0.0, self.x_total);
        let mut tau = tau_init.clamp(0.0, 1.04 * self.eps);
        for _ in 0..30 {
            let (y, _) = self.family_eval(x, tau);
            let pos = Vec2::new(y[0], y[1]);
            let vel = Vec2::new(y[2], y[3]);
            let nhat = self.base.rotate90(pos, vel);
            let r = pos.sub(p);
            if r.norm() < 1e-13 {
                break;
            }
            let m = Mat2::new(y[4] * nhat.x, vel.x, y[4] * nhat.y, vel.y);
            match solve2(m, r.scale(-1.0)) {
                Some(d) => {
                    x = (x + d.x).clamp(-self.x_step, self.x_total + self.x_step);
                    tau = (tau + d.y).clamp(-0.02 * self.eps, 1.049 * self.eps);
                }
                None => break,
            }
        }
        (x, tau)
    }

    /// Full machinery tensor (assumes p is in or near the blend zone).
    fn tensor_machinery(&self, p: Vec2) -> [f64; 3] {
        let x_phi = self.x_phi_of(p);
        let y_phi = p.y - self.t_c;
        let (x_psi, tau) = self.psi_inverse(p, x_phi, self.eps - y_phi);
        let y_psi = self.eps - tau;
        let (e, e1, _) = self.eta(y_phi);

        let x_hat = e * x_phi + (1.0 - e) * x_psi;
        let y_hat = e * y_phi + (1.0 - e) * y_psi;

        // Jacobian of the blended inverse chart.
        let (y6, _) = self.family_eval(x_psi, tau);
        let pos = Vec2::new(y6[0], y6[1]);
        let vel = Vec2::new(y6[2], y6[3]);
        let nhat = self.base.rotate90(pos, vel);
        let dpsi = Mat2::new(y6[4] * nhat.x, -vel.x, y6[4] * nhat.y, -vel.y);
        let minv = dpsi.inverse(); // rows: ∇x_psi, ∇y_psi over (σ, t)
        let grad_x_hat = Vec2::new(
            e * self.f0 + (1.0 - e) * minv.a,
            (1.0 - e) * minv.b + e1 * (x_phi - x_psi),
        );
        let grad_y_hat = Vec2::new(
            (1.0 - e) * minv.c,
            e + (1.0 - e) * minv.d + e1 * (y_phi - y_psi),
        );

        // Blended coefficient at the blended chart point.
        let (eh, _, _) = self.eta(y_hat);
        let f_phi = self.base.coeff_jet(p.x, self.t_c + y_hat).f / self.f0;
        let (yw, _) = self.family_eval(x_hat, self.eps - y_hat);
        let f_w = yw[4];
        let fc = eh * f_phi + (1.0 - eh) * f_w;
        let fc2 = fc * fc;

        let g11 = fc2 * grad_x_hat.x * grad_x_hat.x + grad_y_hat.x * grad_y_hat.x;
        let g12 = fc2 * grad_x_hat.x * grad_x_hat.y + grad_y_hat.x * grad_y_hat.y;
        let g22 = fc2 * grad_x_hat.y * grad_x_hat.y + grad_y_hat.y * grad_y_hat.y;

        let phi = self.phi(x_hat);
        let gb = self.base.tensor(p);
        [
            phi * g11 + (1.0 - phi) * gb[0],
            phi * g12 + (1.0 - phi) * gb[1],
            phi * g22 + (1.0 - phi) * gb[2],
        ]
    }

    pub fn tensor(&self, p: Vec2) -> [f64; 3] {
        if self.in_machinery_zone(p) {
            self.tensor_machinery(p)
        } else {
            self.base.tensor(p)
        }
    }

    pub fn local(&self, p: Vec2) -> LocalGeometry {
        if !self.in_machinery_zone(p) {
            return self.base.local(p);
        }
        let h = 1e-6;
        let g = self.tensor_machinery(p);
        let gsp = self.tensor_machinery(Vec2::new(p.x + h, p.y));
        let gsm = self.tensor_machinery(Vec2::new(p.x - h, p.y));
        let gtp = self.tensor_machinery(Vec2::new(p.x, p.y + h));
        let gtm = self.tensor_machinery(Vec2::new(p.x, p.y - h));
        let mut dg_s = [0.0; 3];
        let mut dg_t = [0.0; 3];
        for i in 0..3 {
            dg_s[i] = (gsp[i] - gsm[i]) / (2.0 * h);
            dg_t[i] = (gtp[i] - gtm[i]) / (2.0 * h);
        }
        LocalGeometry::General { g, dg_s, dg_t }
    }

    pub fn curvature(&self, p: Vec2) -> f64 {
        if !self.in_machinery_zone(p) {
            return self
                .base
                .curvature_at(p)
                .expect("base curvature inside chart");
        }
        let x_phi = self.x_phi_of(p);
        let y_phi = p.y - self.t_c;
        let (x_psi, tau0) = self.psi_inverse(p, x_phi, self.eps - y_phi);
        let (e, _, _) = self.eta(y_phi);
        let x_hat = e * x_phi + (1.0 - e) * x_psi;
        let y_hat = e * y_phi + (1.0 - e) * (self.eps - tau0);
        if self.phi(x_hat) > 1.0 - 1e-12 {
            // Interior band: metric is Fermi in the blended chart, so
            // K = -F_yy / F with exact derivative data from the rays.
            let tau = self.eps - y_hat;
            let (eh, eh1, eh2) = self.eta(y_hat);
            let jet = self.base.coeff_jet(p.x, self.t_c + y_hat);
            let (pv, p1, p2) = (jet.f / self.f0, jet.f_t / self.f0, jet.f_tt / self.f0);
            let (yw, _) = self.family_eval(x_hat, tau);
            let wv = yw[4];
            let w1 = -yw[5]; // ∂J/∂y = -J'(τ)
            let ray_pos = Vec2::new(yw[0], yw[1]);
            let kb = self
                .base
                .curvature_at(ray_pos)
                .expect("base curvature inside chart");
            let w2 = -kb * wv; // J'' = -K J
            let f = eh * pv + (1.0 - eh) * wv;
            let f_yy = eh2 * (pv - wv)
                + 2.0 * eh1 * (p1 - w1)
                + eh * p2
                + (1.0 - eh) * w2;
            -f_yy / f
        } else {
            // Edge strips where the φ-blend mixes tensors: finite-difference
            // Brioschi on the machinery tensor.
            super::brioschi_fd(&|q| self.tensor_machinery(q), p, 2e-4)
        }
    }
}

/// Start data for the normal ray at arclength x along c_w: position on
/// c_w, downward unit normal, and the lateral Jacobi data (J, J') of the
/// normal variation.
fn ray_initial_data(
    base: &SurfaceMetric,
    t_c: f64,
    eps: f64,
    s_lo: f64,
    f0: f64,
    w: f64,
    x: f64,
) -> (Vec2, Vec2, f64, f64) {
    let point = |x: f64| Vec2::new(s_lo + x / f0, t_c + eps - w * x);
    let tangent = Vec2::new(1.0 / f0, -w);
    let normal_at = |x: f64| -> Vec2 {
        let p = point(x);
        let rho = base.norm(p, tangent);
        let that = tangent.scale(1.0 / rho);
        // Rotate by -90°: downward-pointing unit normal.
        base.rotate90(p, that).scale(-1.0)
    };
    let p = point(x);
    let rho = base.norm(p, tangent);
    let vel = normal_at(x);
    // J'(0) = <D_x N, T̂>: covariant x-derivative of the unit normal field
    // along c_w, paired with the unit tangent.
    let h = 1e-5 * (1.0 + x.abs());
    let n_p = normal_at(x + h);
    let n_m = normal_at(x - h);
    let dn = Vec2::new((n_p.x - n_m.x) / (2.0 * h), (n_p.y - n_m.y) / (2.0 * h));
    let ch = christoffel_from_local(&base.local(p));
    let gamma_term = Vec2::new(
        ch[0][0][0] * tangent.x * vel.x
            + ch[0][0][1] * (tangent.x * vel.y + tangent.y * vel.x)
            + ch[0][1][1] * tangent.y * vel.y,
        ch[1][0][0] * tangent.x * vel.x
            + ch[1][0][1] * (tangent.x * vel.y + tangent.y * vel.x)
            + ch[1][1][1] * tangent.y * vel.y,
    );
    let cov = dn.add(gamma_term);
    let that = tangent.scale(1.0 / rho);
    let j0p = base.inner(p, cov, that);
    (p, vel, rho, j0p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Profile;

    fn flat_strip() -> SurfaceMetric {
        SurfaceMetric::fermi_strip(crate::surface::Coeff::Const(1.0), 6.0, -1.0, 1.0)
    }

    #[test]
    fn zero_shear_reproduces_base_tensor() {
        let base = flat_strip();
        let d = DeformedMetric::build(&base, -0.2, 0.4, 1.0, 3.0, 0.0).unwrap();
        for i in 0..20 {
            for j in 0..10 {
                let p = Vec2::new(1.0 + 2.0 * i as f64 / 19.0, -0.2 + 0.4 * j as f64 / 9.0);
                let g = d.tensor(p);
                let gb = base.tensor(p);
                for c in 0..3 {
                    assert!(
                        (g[c] - gb[c]).abs() < 1e-9,
                        "component {c} differs: {} vs {}",
                        g[c],
                        gb[c]
                    );
                }
            }
        }
    }

    #[test]
    fn support_is_exact_outside_box() {
        let base = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
        let d = DeformedMetric::build(&base, 0.3, 0.4, 1.0, 3.0, 5e-3).unwrap();
        // Outside the τ blend zone and outside the column the tensor is
        // bit-identical to the base.
        let pts = [
            Vec2::new(2.0, 0.35), // below ε/2 band
            Vec2::new(2.0, 0.65), // above 3ε/4 band
            Vec2::new(4.5, 0.5),  // outside column
            Vec2::new(2.0, -0.5), // below box
        ];
        for p in pts {
            assert_eq!(d.tensor(p), base.tensor(p));
        }
    }

    #[test]
    fn cosh_strip_small_shear_smooth_and_spd() {
        let base = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
        let d = DeformedMetric::build(&base, 0.3, 0.4, 1.0, 3.0, 1e-2).unwrap();
        for i in 0..=30 {
            for j in 0..=20 {
                let p = Vec2::new(
                    0.9 + 2.3 * i as f64 / 30.0,
                    0.3 + 0.4 * j as f64 / 20.0,
                );
                let g = d.tensor(p);
                assert!(g[0] > 0.0 && g[0] * g[2] - g[1] * g[1] > 0.0, "SPD at {p:?}");
            }
        }
        // Deformation actually does something in the blend zone above the
        // column: g12 is nonzero somewhere.
        let mut max_g12 = 0.0f64;
        for i in 0..=60 {
            let p = Vec2::new(1.0 + 2.0 * i as f64 / 60.0, 0.3 + 0.62 * 0.4);
            max_g12 = max_g12.max(d.tensor(p)[1].abs());
        }
        assert!(max_g12 > 1e-6, "shear should induce off-diagonal terms");
    }

    #[test]
    fn fold_guard_rejects_large_shear() {
        let base = flat_strip();
        let err = DeformedMetric::build(&base, -0.2, 0.4, 1.0, 3.0, 0.1);
        assert!(matches!(err, Err(Error::DeformationFold(_, _))));
    }
}
