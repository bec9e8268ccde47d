//! Adaptive Dormand-Prince 5(4) integration with per-step error control
//! and cubic-Hermite dense output between accepted steps.
//!
//! The integrator is generic over the state dimension through const
//! generics; geodesics use N = 4 (position + velocity), transfer-matrix
//! propagation N = 4, joint geodesic + Jacobi systems N = 6 or 8.

use crate::error::{Error, Result};

pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]);

    /// Optional post-step projection (e.g. unit-speed renormalization).
    /// Applied to every accepted step's endpoint.
    fn project(&self, _t: f64, _y: &mut [f64; N]) {}
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_initial: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            h_initial: 1e-3,
            h_min: 1e-13,
            h_max: 0.1,
        }
    }
}

/// One accepted integration step with endpoint derivatives, enough for
/// cubic Hermite evaluation anywhere inside the step.
#[derive(Debug, Clone)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
    pub f1: [f64; N],
}

impl<const N: usize> Step<N> {
    /// Cubic Hermite interpolation at `t` in [t0, t1].
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i]
                + h11 * h * self.f1[i];
        }
        out
    }
}

// Dormand-Prince 5(4) coefficients.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

/// Integrates from (t0, y0) to t_end, invoking `on_step` after each
/// accepted step; the callback returns `false` to stop early. Supports
/// backward integration (t_end < t0).
pub fn integrate<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut on_step: impl FnMut(&Step<N>) -> bool,
) -> Result<[f64; N]> {
    if t_end == t0 {
        return Ok(y0);
    }
    let dir = (t_end - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut f = [0.0; N];
    sys.rhs(t, &y, &mut f);
    let mut h = opts.h_initial.min(opts.h_max).max(opts.h_min) * dir;

    let mut k = [[0.0; N]; 7];
    loop {
        let remaining = t_end - t;
        if remaining == 0.0
            || remaining.signum() != dir
            || remaining.abs() <= 1e-14 * (1.0 + t.abs())
        {
            return Ok(y);
        }
        let mut at_end = false;
        if h.abs() >= remaining.abs() {
            h = remaining;
            at_end = true;
        }

        k[0] = f;
        let stages: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
        for (si, coeffs) in stages.iter().enumerate() {
            let mut ytmp = y;
            for (j, &a) in coeffs.iter().enumerate() {
                for i in 0..N {
                    ytmp[i] += h * a * k[j][i];
                }
            }
            sys.rhs(t + C[si] * h, &ytmp, &mut k[si + 1]);
        }
        // 5th-order solution (also stage 7 position for FSAL).
        let mut y5 = y;
        for (j, &b) in B5.iter().enumerate() {
            for i in 0..N {
                y5[i] += h * b * k[j][i];
            }
        }
        sys.rhs(t + h, &y5, &mut k[6]);
        // Embedded 4th-order error estimate.
        let mut err_norm_sq = 0.0;
        for i in 0..N {
            let mut y4i = y[i];
            for (j, &b) in B4.iter().enumerate() {
                y4i += h * b * k[j][i];
            }
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4i) / sc;
            err_norm_sq += e * e;
        }
        let err = (err_norm_sq / N as f64).sqrt();

        if err <= 1.0 {
            let mut step = Step {
                t0: t,
                y0: y,
                f0: k[0],
                t1: t + h,
                y1: y5,
                f1: k[6],
            };
            sys.project(step.t1, &mut step.y1);
            if step.y1 != y5 {
                sys.rhs(step.t1, &step.y1, &mut step.f1);
            }
            t = step.t1;
            y = step.y1;
            f = step.f1;
            if !on_step(&step) {
                return Ok(y);
            }
            if at_end {
                return Ok(y);
            }
        }

        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() > opts.h_max {
            h = opts.h_max * dir;
        }
        if h.abs() < opts.h_min {
            return Err(Error::Integration {
                t,
                context: format!("step size {:.3e} below minimum {:.3e}", h.abs(), opts.h_min),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Harmonic;
    impl OdeSystem<2> for Harmonic {
        fn rhs(&self, _t: f64, y: &[f64; 2], dy: &mut [f64; 2]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    #[test]
    fn harmonic_oscillator_period() {
        let tau = 2.0 * std::f64::consts::PI;
        let y = integrate(&Harmonic, 0.0, [1.0, 0.0], tau, &OdeOptions::default(), |_| true)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9);
        assert!(y[1].abs() < 1e-9);
    }

    #[test]
    fn backward_integration_matches_forward() {
        let fwd = integrate(&Harmonic, 0.0, [1.0, 0.0], 1.0, &OdeOptions::default(), |_| true)
            .unwrap();
        let back = integrate(&Harmonic, 1.0, fwd, 0.0, &OdeOptions::default(), |_| true).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-9);
        assert!(back[1].abs() < 1e-9);
    }

    #[test]
    fn dense_output_accuracy() {
        let mut steps: Vec<Step<2>> = Vec::new();
        integrate(
            &Harmonic,
            0.0,
            [0.0, 1.0],
            3.0,
            &OdeOptions::default(),
            |s| { steps.push(s.clone()); true },
        )
        .unwrap();
        for s in &steps {
            let tm = 0.5 * (s.t0 + s.t1);
            let y = s.eval(tm);
            assert!((y[0] - tm.sin()).abs() < 1e-7, "dense output too coarse");
        }
    }
}
