//! Positive supersolution certificates: a segment is stable when the
//! Schrödinger operator L u = u'' + K u admits φ > 0 with L φ ≤ 0; the
//! quadratic form -∫ f L f = ∫ (f')² - K f² is then nonnegative, which is
//! verified by quadrature against randomized compactly supported test
//! functions.

use crate::error::{Error, Result};
use crate::geodesic_flow::{project_to_curve, GeodesicTrajectory};
use crate::numeric::sturm::{Boundary, SchrodingerDiscretization};
use crate::surface::SurfaceMetric;
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub valid: bool,
    /// Max of L φ over interior samples.
    pub max_l_phi: f64,
    /// Min of -∫ f L f over the random test functions.
    pub min_quadratic_form: f64,
    pub test_functions: usize,
}

/// Verifies a positive supersolution certificate for the segment
/// [t1, t2] of the trajectory. `phi` is sampled uniformly (including the
/// endpoints); it must be strictly positive. The certificate is valid when
/// L φ ≤ tol pointwise and the quadratic form stays above -1e-8 on
/// `n_tests` random smooth compactly supported functions.
pub fn supersolution_certificate(
    metric: &SurfaceMetric,
    traj: &GeodesicTrajectory,
    t1: f64,
    t2: f64,
    phi: &[f64],
    tol: f64,
    n_tests: usize,
    rng: &mut impl Rng,
) -> Result<CertificateReport> {
    if phi.len() < 8 {
        return Err(Error::InvalidCertificate(
            "need at least 8 samples of the supersolution".into(),
        ));
    }
    if phi.iter().any(|p| *p <= 0.0) {
        return Err(Error::InvalidCertificate(
            "supersolution must be strictly positive".into(),
        ));
    }
    let n = phi.len();
    let h = (t2 - t1) / (n - 1) as f64;
    let ks: Vec<f64> = (0..n)
        .map(|i| {
            let t = t1 + h * i as f64;
            metric.curvature_at(traj.state_at(t).pos)
        })
        .collect::<Result<_>>()?;

    // Pointwise L φ = φ'' + K φ on interior samples.
    let mut max_l_phi = f64::NEG_INFINITY;
    for i in 1..n - 1 {
        let second = (phi[i - 1] - 2.0 * phi[i] + phi[i + 1]) / (h * h);
        max_l_phi = max_l_phi.max(second + ks[i] * phi[i]);
    }
    let supersolution_ok = max_l_phi <= tol;

    // Quadrature check of the quadratic form on random test functions
    // f = sin²(π(t-t1)/(t2-t1)) · (random low-order trig polynomial),
    // vanishing to first order at the endpoints.
    let len = t2 - t1;
    let m = 512usize;
    let hq = len / m as f64;
    let mut min_q = f64::INFINITY;
    for _ in 0..n_tests {
        let a0: f64 = rng.gen_range(-1.0..1.0);
        let a1: f64 = rng.gen_range(-1.0..1.0);
        let a2: f64 = rng.gen_range(-1.0..1.0);
        let w1: f64 = rng.gen_range(0.5..3.0);
        let w2: f64 = rng.gen_range(0.5..3.0);
        let f = |t: f64| {
            let x = (t - t1) / len;
            let window = (std::f64::consts::PI * x).sin().powi(2);
            window * (a0 + a1 * (w1 * t).sin() + a2 * (w2 * t).cos())
        };
        let fp = |t: f64| {
            let e = 1e-6;
            (f(t + e) - f(t - e)) / (2.0 * e)
        };
        // Simpson quadrature of (f')² - K f².
        let mut q = 0.0;
        for i in 0..m {
            let ta = t1 + hq * i as f64;
            let tmid = ta + 0.5 * hq;
            let tb = ta + hq;
            let k_at = |t: f64| {
                let frac = (t - t1) / h;
                let j = (frac.floor() as usize).min(n - 2);
                let w = frac - j as f64;
                ks[j] * (1.0 - w) + ks[j + 1] * w
            };
            let g = |t: f64| fp(t).powi(2) - k_at(t) * f(t).powi(2);
            q += hq / 6.0 * (g(ta) + 4.0 * g(tmid) + g(tb));
        }
        min_q = min_q.min(q);
    }
    let quadratic_ok = min_q >= -1e-8 * len.max(1.0);

    Ok(CertificateReport {
        valid: supersolution_ok && quadratic_ok,
        max_l_phi,
        min_quadratic_form: min_q,
        test_functions: n_tests,
    })
}

/// Transports the first periodic eigenfunction of a strictly stable closed
/// geodesic onto a nearby segment through the nearest-point projection and
/// returns the sampled candidate supersolution.
pub fn transported_certificate(
    metric: &SurfaceMetric,
    stable_closed: &GeodesicTrajectory,
    nearby: &GeodesicTrajectory,
    t1: f64,
    t2: f64,
    tube: f64,
    n_samples: usize,
) -> Result<Vec<f64>> {
    let period = stable_closed.length();
    let n_grid = 1024;
    let ks: Vec<f64> = (0..n_grid)
        .map(|i| {
            let t = stable_closed.t_start() + period * i as f64 / n_grid as f64;
            metric.curvature_at(stable_closed.state_at(t).pos)
        })
        .collect::<Result<_>>()?;
    let op = SchrodingerDiscretization::new(&ks, period / n_grid as f64, Boundary::Periodic);
    // Convention L φ + λ φ = 0: strict stability (-L > 0) means λ0 > 0.
    let (lambda0, phi) = op.ground_eigenfunction();
    if lambda0 <= 0.0 {
        return Err(Error::Precondition(format!(
            "base geodesic is not strictly stable: first eigenvalue {lambda0}"
        )));
    }
    let mut out = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let t = t1 + (t2 - t1) * i as f64 / (n_samples - 1) as f64;
        let p = nearby.state_at(t);
        let pr = project_to_curve(metric, stable_closed, true, p.pos, tube)?;
        let frac = (pr.foot_t - stable_closed.t_start()).rem_euclid(period) / period
            * n_grid as f64;
        let j = (frac.floor() as usize).min(n_grid - 1);
        let w = frac - j as f64;
        let val = phi[j] * (1.0 - w) + phi[(j + 1) % n_grid] * w;
        out.push(val);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic_flow::{integrate_geodesic, PhasePoint};
    use crate::jacobi::segment_index;
    use crate::numeric::Vec2;
    use crate::surface::Profile;
    use rand::SeedableRng;
    use std::f64::consts::PI;

    #[test]
    fn constant_supersolution_on_negative_curvature() {
        let m = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.0), 0.0);
        let traj = integrate_geodesic(&m, &start, 4.0).unwrap();
        let phi = vec![1.0; 65];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let rep =
            supersolution_certificate(&m, &traj, 0.0, 4.0, &phi, 1e-6, 100, &mut rng).unwrap();
        assert!(rep.valid, "L(1) = K = -1 < 0 certifies stability");
        assert!(rep.max_l_phi < -0.9);
    }

    #[test]
    fn cosine_on_unit_curvature_is_rejected() {
        // K = 1, φ = cos(t/2) on (-π, π): L φ = (3/4) φ > 0.
        let m = SurfaceMetric::revolution(Profile::Sphere, 1e-3, PI - 1e-3);
        let anchor = PhasePoint::from_angle(&m, Vec2::new(0.0, PI / 2.0), 0.0);
        let traj = crate::geodesic_flow::integrate_span(&m, &anchor, -PI, PI).unwrap();
        let n = 129;
        let phi: Vec<f64> = (0..n)
            .map(|i| {
                let t = -PI + 2.0 * PI * i as f64 / (n - 1) as f64;
                (t / 2.0).cos().max(1e-6)
            })
            .collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let rep =
            supersolution_certificate(&m, &traj, -PI, PI, &phi, 1e-6, 50, &mut rng).unwrap();
        assert!(!rep.valid);
        assert!(rep.max_l_phi > 0.5, "Lφ = (3/4)φ: {}", rep.max_l_phi);
    }

    #[test]
    fn nonpositive_phi_is_invalid() {
        let m = SurfaceMetric::flat_torus(1.0, 1.0);
        let start = PhasePoint::from_angle(&m, Vec2::new(0.0, 0.2), 0.0);
        let traj = integrate_geodesic(&m, &start, 1.0).unwrap();
        let phi = vec![1.0, 1.0, -0.1, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let e = supersolution_certificate(&m, &traj, 0.0, 1.0, &phi, 1e-6, 10, &mut rng);
        assert!(matches!(e, Err(Error::InvalidCertificate(_))));
    }

    #[test]
    fn transported_eigenfunction_certifies_nearby_segments() {
        // Strictly stable catenoid waist: transporting its ground
        // eigenfunction certifies nearby segments of length ≥ 1, in
        // agreement with the zero segment index.
        let m = SurfaceMetric::revolution(Profile::Cosh, -1.5, 1.5);
        let waist = integrate_geodesic(
            &m,
            &PhasePoint::from_angle(&m, Vec2::new(0.0, 0.0), 0.0),
            2.0 * PI,
        )
        .unwrap();
        let nearby_start = PhasePoint::from_angle(&m, Vec2::new(0.3, 0.12), 0.05);
        let nearby = integrate_geodesic(&m, &nearby_start, 1.2).unwrap();
        let phi = transported_certificate(&m, &waist, &nearby, 0.0, 1.2, 0.5, 65).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let rep =
            supersolution_certificate(&m, &nearby, 0.0, 1.2, &phi, 1e-2, 100, &mut rng).unwrap();
        assert!(rep.valid, "max Lφ = {}", rep.max_l_phi);
        let idx = segment_index(&m, &nearby, 0.0, 1.2).unwrap();
        assert_eq!(idx.index, 0);
    }
}
