//! Smooth coefficient functions for chart metrics of the form
//! f²(s,t) ds² + dt², with analytic partial derivatives up to f_tt.
//!
//! Profiles are one-variable coefficients r(t) for surfaces of revolution;
//! [`Coeff`] covers the two-variable Fermi coefficients, including the
//! dumbbell family, trigonometric polynomials for randomized tests, and
//! localized curvature lenses.

use serde::{Deserialize, Serialize};

/// Value and partial derivatives of a coefficient at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffJet {
    pub f: f64,
    pub f_s: f64,
    pub f_t: f64,
    pub f_tt: f64,
}

impl CoeffJet {
    pub fn constant(c: f64) -> Self {
        CoeffJet {
            f: c,
            f_s: 0.0,
            f_t: 0.0,
            f_tt: 0.0,
        }
    }
}

/// One-variable profile r(t) > 0 with analytic derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    Constant(f64),
    /// Catenoid-style profile cosh t.
    Cosh,
    /// Round-sphere profile sin t on (0, π).
    Sphere,
    /// Torus of revolution r(t) = major + cos t (arclength minor circle).
    TorusMinor { major: f64 },
    /// c0 + Σ amp·cos(freq·t + phase).
    Trig {
        c0: f64,
        terms: Vec<TrigTerm>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amp: f64,
    pub freq: f64,
    pub phase: f64,
}

impl Profile {
    /// r(t) - r(w) in cancellation-free product form; exact near t = w,
    /// where the plain difference of evaluations loses all digits.
    pub fn gap(&self, t: f64, w: f64) -> f64 {
        match self {
            Profile::Constant(_) => 0.0,
            Profile::Cosh => 2.0 * (0.5 * (t + w)).sinh() * (0.5 * (t - w)).sinh(),
            Profile::Sphere => 2.0 * (0.5 * (t + w)).cos() * (0.5 * (t - w)).sin(),
            Profile::TorusMinor { .. } => {
                -2.0 * (0.5 * (t + w)).sin() * (0.5 * (t - w)).sin()
            }
            Profile::Trig { terms, .. } => {
                let mut gap = 0.0;
                for term in terms {
                    let a = term.freq * t + term.phase;
                    let b = term.freq * w + term.phase;
                    gap += -2.0 * term.amp * (0.5 * (a + b)).sin() * (0.5 * (a - b)).sin();
                }
                gap
            }
        }
    }

    /// (r, r', r'')
    pub fn jet(&self, t: f64) -> (f64, f64, f64) {
        match self {
            Profile::Constant(c) => (*c, 0.0, 0.0),
            Profile::Cosh => (t.cosh(), t.sinh(), t.cosh()),
            Profile::Sphere => (t.sin(), t.cos(), -t.sin()),
            Profile::TorusMinor { major } => (major + t.cos(), -t.sin(), -t.cos()),
            Profile::Trig { c0, terms } => {
                let (mut r, mut r1, mut r2) = (*c0, 0.0, 0.0);
                for term in terms {
                    let a = term.freq * t + term.phase;
                    r += term.amp * a.cos();
                    r1 -= term.amp * term.freq * a.sin();
                    r2 -= term.amp * term.freq * term.freq * a.cos();
                }
                (r, r1, r2)
            }
        }
    }
}

/// Even, compactly supported C² window (1 - u²)³ on |u| < 1.
fn cell_window(u: f64) -> (f64, f64, f64) {
    if u.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - u * u;
    let w = q * q * q;
    let w1 = -6.0 * u * q * q;
    let w2 = -6.0 * q * q + 24.0 * u * u * q;
    (w, w1, w2)
}

/// Separable C² curvature lens added to a base coefficient. A positive
/// amplitude bulges the coefficient along t = t_center, which makes the
/// Gaussian curvature positive there while keeping that line a geodesic
/// (the t-window is even, so f_t vanishes on the center line).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lens {
    pub amp: f64,
    pub s_center: f64,
    pub s_halfwidth: f64,
    pub t_center: f64,
    pub t_halfwidth: f64,
}

/// Fermi coefficient families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Coeff {
    Const(f64),
    /// f(s,t) = r(t); rotationally symmetric.
    OfT(Profile),
    /// f(t) = 1 + depth·(t² - 1)²: strictly stable waists at t = ±1 and an
    /// unstable equator at t = 0.
    Dumbbell { depth: f64 },
    /// c0 + Σ amp·cos(ks·s + phase_s)·cos(kt·t + phase_t); ks must be an
    /// integer multiple of 2π / s_period for chart periodicity.
    Fourier { c0: f64, terms: Vec<FourierTerm> },
    /// Base coefficient plus localized lenses.
    WithLenses { base: Box<Coeff>, lenses: Vec<Lens> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub amp: f64,
    pub ks: f64,
    pub phase_s: f64,
    pub kt: f64,
    pub phase_t: f64,
}

impl Coeff {
    /// f(s,t) - f(s,w) in a cancellation-free form where available
    /// (t-only families); falls back to the plain difference otherwise.
    pub fn parallel_gap(&self, s: f64, t: f64, w: f64) -> f64 {
        match self {
            Coeff::Const(_) => 0.0,
            Coeff::OfT(p) => p.gap(t, w),
            Coeff::Dumbbell { depth } => {
                // depth·((t²-1)² - (w²-1)²) = depth·(t-w)(t+w)(t²+w²-2)
                depth * (t - w) * (t + w) * (t * t + w * w - 2.0)
            }
            _ => self.jet(s, t).f - self.jet(s, w).f,
        }
    }

    pub fn jet(&self, s: f64, t: f64) -> CoeffJet {
        match self {
            Coeff::Const(c) => CoeffJet::constant(*c),
            Coeff::OfT(p) => {
                let (f, f_t, f_tt) = p.jet(t);
                CoeffJet {
                    f,
                    f_s: 0.0,
                    f_t,
                    f_tt,
                }
            }
            Coeff::Dumbbell { depth } => {
                let q = t * t - 1.0;
                CoeffJet {
                    f: 1.0 + depth * q * q,
                    f_s: 0.0,
                    f_t: 4.0 * depth * q * t,
                    f_tt: depth * (12.0 * t * t - 4.0),
                }
            }
            Coeff::Fourier { c0, terms } => {
                let (mut f, mut f_s, mut f_t, mut f_tt) = (*c0, 0.0, 0.0, 0.0);
                for term in terms {
                    let a = term.ks * s + term.phase_s;
                    let b = term.kt * t + term.phase_t;
                    let (ca, sa) = (a.cos(), a.sin());
                    let (cb, sb) = (b.cos(), b.sin());
                    f += term.amp * ca * cb;
                    f_s -= term.amp * term.ks * sa * cb;
                    f_t -= term.amp * term.kt * ca * sb;
                    f_tt -= term.amp * term.kt * term.kt * ca * cb;
                }
                CoeffJet { f, f_s, f_t, f_tt }
            }
            Coeff::WithLenses { base, lenses } => {
                let mut jet = base.jet(s, t);
                for lens in lenses {
                    let us = (s - lens.s_center) / lens.s_halfwidth;
                    let ut = (t - lens.t_center) / lens.t_halfwidth;
                    let (ws, ws1, _) = cell_window(us);
                    let (wt, wt1, wt2) = cell_window(ut);
                    jet.f += lens.amp * ws * wt;
                    jet.f_s += lens.amp * ws1 * wt / lens.s_halfwidth;
                    jet.f_t += lens.amp * ws * wt1 / lens.t_halfwidth;
                    jet.f_tt += lens.amp * ws * wt2 / (lens.t_halfwidth * lens.t_halfwidth);
                }
                jet
            }
        }
    }
}

/// Quintic smoothstep: 0 below 0, 1 above 1, C² monotone in between.
pub fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }
}

pub fn smoothstep_d1(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        x * x * (30.0 + x * (-60.0 + 30.0 * x))
    }
}

pub fn smoothstep_d2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        x * (60.0 + x * (-180.0 + 120.0 * x))
    }
}

/// Radial quintic bump used as a metric perturbation: amp·S(1 - ρ) where
/// ρ is chart distance from the center over the radius. C² everywhere,
/// identically zero for ρ ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center_s: f64,
    pub center_t: f64,
    pub amplitude: f64,
    pub radius: f64,
}

impl Bump {
    /// Jet of the bump given the (already wrapped) displacement from the
    /// bump center.
    pub fn jet_at(&self, ds: f64, dt: f64) -> CoeffJet {
        let r2 = ds * ds + dt * dt;
        let rad2 = self.radius * self.radius;
        if r2 >= rad2 {
            return CoeffJet::constant(0.0);
        }
        let rho = (r2 / rad2).sqrt();
        if rho < 1e-9 {
            // S'(1) = S''(1) = 0, so all first/second derivatives vanish
            // at the center.
            return CoeffJet {
                f: self.amplitude,
                f_s: 0.0,
                f_t: 0.0,
                f_tt: 0.0,
            };
        }
        let a = self.amplitude;
        let q = smoothstep(1.0 - rho);
        let q1 = -smoothstep_d1(1.0 - rho);
        let q2 = smoothstep_d2(1.0 - rho);
        // rho as a function of (s, t).
        let rho_s = ds / (rad2 * rho);
        let rho_t = dt / (rad2 * rho);
        let rho_tt = 1.0 / (rad2 * rho) - dt * dt / (rad2 * rad2 * rho * rho * rho);
        CoeffJet {
            f: a * q,
            f_s: a * q1 * rho_s,
            f_t: a * q1 * rho_t,
            f_tt: a * (q2 * rho_t * rho_t + q1 * rho_tt),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    }

    #[test]
    fn profile_jets_match_finite_differences() {
        let profiles = [
            Profile::Cosh,
            Profile::Sphere,
            Profile::TorusMinor { major: 2.0 },
            Profile::Trig {
                c0: 2.0,
                terms: vec![TrigTerm {
                    amp: 0.3,
                    freq: 2.0,
                    phase: 0.4,
                }],
            },
        ];
        for p in &profiles {
            for &t in &[0.3, 0.9, 1.7] {
                let (_, r1, r2) = p.jet(t);
                let h = 1e-5;
                let fd1 = (p.jet(t + h).0 - p.jet(t - h).0) / (2.0 * h);
                let fd2v = fd2(|x| p.jet(x).0, t, 1e-4);
                assert!((r1 - fd1).abs() < 1e-8);
                assert!((r2 - fd2v).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn bump_is_c2_at_support_boundary() {
        let b = Bump {
            center_s: 0.0,
            center_t: 0.0,
            amplitude: 0.1,
            radius: 0.5,
        };
        // Jet just inside the boundary should be tiny.
        let jet = b.jet_at(0.4999, 0.0);
        assert!(jet.f.abs() < 1e-8);
        assert!(jet.f_s.abs() < 1e-4);
        assert!(jet.f_tt.abs() < 1e-1);
        // FD cross-check of f_tt at an interior point.
        let fd = fd2(|t| b.jet_at(0.2, t).f, 0.1, 1e-4);
        let jet = b.jet_at(0.2, 0.1);
        assert!((jet.f_tt - fd).abs() < 1e-5, "{} vs {}", jet.f_tt, fd);
    }

    #[test]
    fn dumbbell_waists_are_critical() {
        let c = Coeff::Dumbbell { depth: 0.25 };
        for &t in &[-1.0, 0.0, 1.0] {
            assert!(c.jet(0.0, t).f_t.abs() < 1e-14);
        }
        assert!(c.jet(0.0, 1.0).f_tt > 0.0); // stable waist
        assert!(c.jet(0.0, 0.0).f_tt < 0.0); // unstable equator
    }

    #[test]
    fn lens_center_line_stays_critical_with_positive_curvature() {
        let c = Coeff::WithLenses {
            base: Box::new(Coeff::Const(1.0)),
            lenses: vec![Lens {
                amp: 1.0 / 23.0,
                s_center: 0.0,
                s_halfwidth: 3.0,
                t_center: 0.0,
                t_halfwidth: 0.5,
            }],
        };
        let jet = c.jet(0.0, 0.0);
        assert!(jet.f_t.abs() < 1e-15);
        let curvature = -jet.f_tt / jet.f;
        assert!(curvature > 0.9 && curvature < 1.1, "K = {curvature}");
    }
}
