//! Small fixed-size linear algebra: 2-vectors, 2x2 matrices, and a pivoted
//! 3x3 solve for Newton steps. Everything is `Copy` and allocation-free.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product; positive when `o` is
    /// counterclockwise from `self`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn scale(self, a: f64) -> Vec2 {
        Vec2::new(a * self.x, a * self.y)
    }

    pub fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }

    /// Angle of the line spanned by `self` and the line spanned by `o`,
    /// in [0, pi/2]; zero iff the vectors are parallel.
    pub fn line_angle(self, o: Vec2) -> f64 {
        let s = self.cross(o).abs();
        let c = self.dot(o).abs();
        s.atan2(c)
    }
}

/// 2x2 real matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn det(self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(self) -> f64 {
        self.a + self.d
    }

    pub fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn apply(self, v: Vec2) -> Vec2 {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    pub fn inverse(self) -> Mat2 {
        let det = self.det();
        Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    /// Eigenvalues as a pair of complex numbers (re, im), ordered so that
    /// for real spectra the first has the smaller absolute value.
    pub fn eigenvalues(self) -> [(f64, f64); 2] {
        let m = self.trace() / 2.0;
        let disc = m * m - self.det();
        if disc >= 0.0 {
            let r = disc.sqrt();
            let (l1, l2) = (m - r, m + r);
            if l1.abs() <= l2.abs() {
                [(l1, 0.0), (l2, 0.0)]
            } else {
                [(l2, 0.0), (l1, 0.0)]
            }
        } else {
            let r = (-disc).sqrt();
            [(m, -r), (m, r)]
        }
    }

    /// Eigenvector for a real eigenvalue.
    pub fn eigenvector(self, lambda: f64) -> Vec2 {
        // (A - lambda I) v = 0; pick the larger row for stability.
        let r1 = Vec2::new(self.a - lambda, self.b);
        let r2 = Vec2::new(self.c, self.d - lambda);
        let v = if r1.norm() >= r2.norm() {
            Vec2::new(-r1.y, r1.x)
        } else {
            Vec2::new(-r2.y, r2.x)
        };
        if v.norm() == 0.0 {
            Vec2::new(1.0, 0.0)
        } else {
            v.normalized()
        }
    }
}

/// Solves a 3x3 linear system with partial pivoting. Returns `None` when the
/// matrix is numerically singular.
pub fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let mut piv = col;
        for row in col + 1..3 {
            if m[row][col].abs() > m[piv][col].abs() {
                piv = row;
            }
        }
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let mut s = rhs[col];
        for k in col + 1..3 {
            s -= m[col][k] * x[k];
        }
        x[col] = s / m[col][col];
    }
    Some(x)
}

/// Solves a 2x2 linear system.
pub fn solve2(m: Mat2, rhs: Vec2) -> Option<Vec2> {
    let det = m.det();
    if det.abs() < 1e-300 {
        return None;
    }
    Some(Vec2::new(
        (rhs.x * m.d - rhs.y * m.b) / det,
        (m.a * rhs.y - m.c * rhs.x) / det,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_hyperbolic_cosine_matrix() {
        let t = 2.0 * std::f64::consts::PI;
        let p = Mat2::new(t.cosh(), t.sinh(), t.sinh(), t.cosh());
        let ev = p.eigenvalues();
        assert!((ev[0].0 - (-t).exp()).abs() < 1e-9 * (-t).exp().max(1e-12));
        assert!((ev[1].0 - t.exp()).abs() / t.exp() < 1e-12);
        let v = p.eigenvector(ev[1].0);
        assert!((v.x.abs() - v.y.abs()).abs() < 1e-9);
    }

    #[test]
    fn solve3_roundtrip() {
        let m = [[2.0, 1.0, -1.0], [0.5, 3.0, 2.0], [1.0, -1.0, 4.0]];
        let x = [1.5, -2.0, 0.25];
        let rhs = [
            m[0][0] * x[0] + m[0][1] * x[1] + m[0][2] * x[2],
            m[1][0] * x[0] + m[1][1] * x[1] + m[1][2] * x[2],
            m[2][0] * x[0] + m[2][1] * x[1] + m[2][2] * x[2],
        ];
        let got = solve3(m, rhs).unwrap();
        for i in 0..3 {
            assert!((got[i] - x[i]).abs() < 1e-12);
        }
    }
}
