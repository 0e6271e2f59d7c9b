//! Small dense helpers for 2x2 problems.

use serde::{Deserialize, Serialize};

/// Roots of `t^2 - trace t + det = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Eigenvalues {
    /// Real pair, ordered by decreasing modulus.
    Real { first: f64, second: f64 },
    /// Complex-conjugate pair `modulus * exp(+-i argument)`, `argument` in (0, pi).
    Complex { modulus: f64, argument: f64 },
}

impl Eigenvalues {
    pub fn from_trace_det(trace: f64, det: f64) -> Self {
        let disc = trace * trace - 4.0 * det;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // avoid cancellation in the smaller root
            let big = if trace >= 0.0 {
                0.5 * (trace + sq)
            } else {
                0.5 * (trace - sq)
            };
            let small = if big != 0.0 { det / big } else { 0.0 };
            let (first, second) = if big.abs() >= small.abs() {
                (big, small)
            } else {
                (small, big)
            };
            Eigenvalues::Real { first, second }
        } else {
            let modulus = det.sqrt();
            let argument = (-disc).sqrt().atan2(trace);
            Eigenvalues::Complex { modulus, argument }
        }
    }

    /// Moduli, larger first.
    pub fn moduli(&self) -> (f64, f64) {
        match *self {
            Eigenvalues::Real { first, second } => (first.abs(), second.abs()),
            Eigenvalues::Complex { modulus, .. } => (modulus, modulus),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Eigenvalues::Complex { .. })
    }
}

/// Unit eigenvector of a real 2x2 matrix for a real eigenvalue.
pub fn eigenvector_2x2(a: [[f64; 2]; 2], value: f64) -> [f64; 2] {
    // rows of (A - value I) are orthogonal to the eigenvector; use the larger row
    let r0 = [a[0][0] - value, a[0][1]];
    let r1 = [a[1][0], a[1][1] - value];
    let n0 = r0[0].hypot(r0[1]);
    let n1 = r1[0].hypot(r1[1]);
    let (r, n) = if n0 >= n1 { (r0, n0) } else { (r1, n1) };
    if n == 0.0 {
        return [1.0, 0.0];
    }
    [-r[1] / n, r[0] / n]
}

/// Solves a 2x2 linear system by Cramer's rule; `None` when singular.
pub fn solve_2x2(a: [[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        (b[0] * a[1][1] - a[0][1] * b[1]) / det,
        (a[0][0] * b[1] - b[0] * a[1][0]) / det,
    ])
}
