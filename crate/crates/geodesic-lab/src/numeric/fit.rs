//! Linear least squares on (x, y) samples; used for exponential decay-rate
//! fits (via log coordinates) and first-order response slopes.

/// Fits y = intercept + slope * x by least squares.
/// Returns (intercept, slope).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (intercept, slope)
}

/// Fits ||v(t)|| ~ C exp(-alpha t): returns (C, alpha) with samplewise
/// envelope constant C chosen so the bound holds at every sample.
pub fn exp_decay_fit(ts: &[f64], norms: &[f64]) -> (f64, f64) {
    let logs: Vec<f64> = norms.iter().map(|v| v.max(1e-300).ln()).collect();
    let (b, m) = linear_fit(ts, &logs);
    let alpha = -m;
    // Inflate C until the envelope dominates every sample.
    let mut c = b.exp();
    for (t, v) in ts.iter().zip(norms) {
        let bound = c * (-alpha * t).exp();
        if *v > bound {
            c *= v / bound;
        }
    }
    (c, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_decay_rate() {
        let ts: Vec<f64> = (0..50).map(|i| 0.2 * i as f64).collect();
        let ns: Vec<f64> = ts.iter().map(|t| 3.0 * (-1.7 * t).exp()).collect();
        let (c, alpha) = exp_decay_fit(&ts, &ns);
        assert!((alpha - 1.7).abs() < 1e-10);
        assert!((c - 3.0).abs() < 1e-9);
        for (t, n) in ts.iter().zip(&ns) {
            assert!(*n <= c * (-alpha * t).exp() * (1.0 + 1e-12));
        }
    }
}
