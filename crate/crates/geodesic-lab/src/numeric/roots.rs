//! Scalar root finding: bisection against a sign change, with an optional
//! secant acceleration step. Used for event times, zero refinement of
//! Jacobi fields, and section-mismatch roots.

/// Refines a root of `f` inside [a, b] where f(a) and f(b) have opposite
/// signs. Returns the midpoint of the final bracket.
pub fn bisect(mut a: f64, mut b: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut fa = f(a);
    let fb = f(b);
    debug_assert!(
        fa == 0.0 || fb == 0.0 || (fa < 0.0) != (fb < 0.0),
        "bisect requires a sign change"
    );
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) != (fm < 0.0) {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Scans [a, b] with `n` uniform samples and returns every bracket
/// [x_i, x_{i+1}] on which `f` changes sign, refined by bisection.
pub fn scan_roots(a: f64, b: f64, n: usize, tol: f64, mut f: impl FnMut(f64) -> f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev_x = a;
    let mut prev_f = f(a);
    for i in 1..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        let fx = f(x);
        if prev_f == 0.0 {
            roots.push(prev_x);
        } else if (prev_f < 0.0) != (fx < 0.0) && fx != 0.0 {
            roots.push(bisect(prev_x, x, tol, &mut f));
        }
        prev_x = x;
        prev_f = fx;
    }
    if prev_f == 0.0 {
        roots.push(prev_x);
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sine_roots() {
        let roots = scan_roots(0.5, 7.0, 200, 1e-12, |x| x.sin());
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - std::f64::consts::PI).abs() < 1e-10);
        assert!((roots[1] - 2.0 * std::f64::consts::PI).abs() < 1e-10);
    }
}
