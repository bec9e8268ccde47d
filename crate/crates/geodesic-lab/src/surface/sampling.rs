//! Seeded random metric generators for property tests and randomized
//! acceptance runs. Coefficients are kept mildly perturbed so geodesics
//! of moderate length stay inside the charts.

use super::{Bump, Coeff, FourierTerm, Profile, SurfaceMetric, TrigTerm};
use rand::Rng;

/// Random Fermi strip: 1 + small trigonometric polynomial, s-period 2π,
/// t-range (-2, 2). Curvature stays O(1).
pub fn random_fermi_strip(rng: &mut impl Rng) -> SurfaceMetric {
    let s_period = 2.0 * std::f64::consts::PI;
    let n_terms = rng.gen_range(1..=3);
    let mut terms = Vec::new();
    for _ in 0..n_terms {
        let k = rng.gen_range(1..=2) as f64;
        terms.push(FourierTerm {
            amp: rng.gen_range(0.02..0.12),
            ks: k * 2.0 * std::f64::consts::PI / s_period,
            phase_s: rng.gen_range(0.0..std::f64::consts::TAU),
            kt: rng.gen_range(0.5..1.5),
            phase_t: rng.gen_range(0.0..std::f64::consts::TAU),
        });
    }
    let coeff = Coeff::Fourier { c0: 1.0, terms };
    SurfaceMetric::fermi_strip(coeff, s_period, -2.0, 2.0)
}

/// Random surface of revolution with profile 2 + small trig terms on a
/// wide t-range (profile stays positive).
pub fn random_revolution(rng: &mut impl Rng) -> SurfaceMetric {
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        terms.push(TrigTerm {
            amp: rng.gen_range(0.05..0.3),
            freq: rng.gen_range(0.5..1.5),
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
        });
    }
    let profile = Profile::Trig { c0: 2.0, terms };
    SurfaceMetric::revolution(profile, -4.0, 4.0)
}

/// Random choice over the three families, optionally bump-perturbed.
pub fn random_metric(rng: &mut impl Rng) -> SurfaceMetric {
    match rng.gen_range(0..4) {
        0 => {
            let a = rng.gen_range(0.8..1.5);
            let b = rng.gen_range(0.8..1.5);
            let m = SurfaceMetric::flat_torus(a, b);
            if rng.gen_bool(0.5) {
                m.with_bumps(vec![Bump {
                    center_s: rng.gen_range(0.0..a),
                    center_t: rng.gen_range(0.0..b),
                    amplitude: rng.gen_range(0.01..0.05),
                    radius: rng.gen_range(0.15..0.3),
                }])
            } else {
                m
            }
        }
        1 => random_revolution(rng),
        _ => random_fermi_strip(rng),
    }
}

/// A phase point with random interior position and direction, safe for
/// integration lengths up to ~6 on the metrics produced above.
pub fn random_interior_start(metric: &SurfaceMetric, rng: &mut impl Rng) -> (f64, f64, f64) {
    let s = rng.gen_range(0.0..metric.s_period());
    let (t_min, t_max) = metric.t_range();
    let t = if metric.t_periodic() {
        rng.gen_range(t_min..t_max)
    } else {
        let mid = 0.5 * (t_min + t_max);
        let span = (t_max - t_min) * 0.15;
        rng.gen_range(mid - span..mid + span)
    };
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    (s, t, theta)
}
