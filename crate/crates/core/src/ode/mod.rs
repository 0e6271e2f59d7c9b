//! The four-dimensional vector field with a Bykov heteroclinic network.
//!
//! For `tau1 = tau2 = 0` the unit sphere carries two saddle-foci
//! `O1 = (0, 0, 0, 1)` and `O2 = (0, 0, 0, -1)` joined by a two-dimensional
//! sphere of connections and two one-dimensional ones. The `tau` terms break
//! the two-dimensional connection.

mod dopri;
mod scan;
mod spectrum;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::constants::{derive_constants, MapConstants, SaddleValues};
use crate::error::{Error, Result};

pub use dopri::{integrate, integrate_fixed, Dopri5, Trajectory};
pub use scan::{ode_scan, OdeCell, OdeScanSpec, DEFAULT_INITIAL_STATE, NEAR_NETWORK_FLAG};
pub use spectrum::{
    classify_spectrum, lyapunov_spectrum, lyapunov_spectrum_of, SpectrumResult,
    SpectrumSettings,
};

pub type State4 = [f64; 4];
pub type Matrix4x4 = [[f64; 4]; 4];

pub const O1: State4 = [0.0, 0.0, 0.0, 1.0];
pub const O2: State4 = [0.0, 0.0, 0.0, -1.0];

#[inline]
pub fn r2(s: &State4) -> f64 {
    s.iter().map(|v| v * v).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeParams {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub tau1: f64,
    pub tau2: f64,
}

impl OdeParams {
    pub fn new(alpha: f64, beta: f64, omega: f64, tau1: f64, tau2: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            omega,
            tau1,
            tau2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.alpha, self.beta);
        let mut broken = Vec::new();
        if !(b < 0.0 && 0.0 < a) {
            broken.push(format!("beta < 0 < alpha (alpha = {a}, beta = {b})"));
        }
        if !(b * b < 8.0 * a * a) {
            broken.push(format!("beta^2 < 8 alpha^2 (beta^2 = {}, 8 alpha^2 = {})", b * b, 8.0 * a * a));
        }
        if !(b.abs() < a.abs()) {
            broken.push(format!("|beta| < |alpha| (|beta| = {}, |alpha| = {})", b.abs(), a.abs()));
        }
        if !self.omega.is_finite() {
            broken.push(format!("omega finite (omega = {})", self.omega));
        }
        for (name, t) in [("tau1", self.tau1), ("tau2", self.tau2)] {
            if !(0.0..=1.0).contains(&t) {
                broken.push(format!("{name} in [0, 1] ({name} = {t})"));
            }
        }
        if broken.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("violated: {}", broken.join("; "))))
        }
    }
}

/// Any autonomous system on `R^4` with an analytic Jacobian.
pub trait Flow: Sync {
    fn field(&self, s: &State4) -> State4;
    fn jacobian(&self, s: &State4) -> Matrix4x4;
}

impl Flow for OdeParams {
    fn field(&self, s: &State4) -> State4 {
        vector_field(s, self)
    }

    fn jacobian(&self, s: &State4) -> Matrix4x4 {
        jacobian(s, self)
    }
}

/// `x_i' = a_i x_i`, whose spectrum is exactly `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearDiagonal(pub [f64; 4]);

impl Flow for LinearDiagonal {
    fn field(&self, s: &State4) -> State4 {
        std::array::from_fn(|i| self.0[i] * s[i])
    }

    fn jacobian(&self, _: &State4) -> Matrix4x4 {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = self.0[i];
        }
        m
    }
}

#[inline]
pub fn vector_field(s: &State4, p: &OdeParams) -> State4 {
    let [x1, x2, x3, x4] = *s;
    let OdeParams {
        alpha: a,
        beta: b,
        omega: w,
        tau1: t1,
        tau2: t2,
    } = *p;
    let radial = 1.0 - r2(s);
    [
        x1 * radial - w * x2 - a * x1 * x4 + b * x1 * x4 * x4 + t2 * x1 * x3 * x4,
        x2 * radial + w * x1 - a * x2 * x4 + b * x2 * x4 * x4,
        x3 * radial + a * x3 * x4 + b * x3 * x4 * x4 + t1 * x4 * x4 * x4 - t2 * x1 * x1 * x4,
        x4 * radial - a * (x3 * x3 - x1 * x1 - x2 * x2) - b * x4 * (x1 * x1 + x2 * x2 + x3 * x3)
            - t1 * x3 * x4 * x4,
    ]
}

#[inline]
pub fn jacobian(s: &State4, p: &OdeParams) -> Matrix4x4 {
    let [x1, x2, x3, x4] = *s;
    let OdeParams {
        alpha: a,
        beta: b,
        omega: w,
        tau1: t1,
        tau2: t2,
    } = *p;
    let radial = 1.0 - r2(s);
    let tangential = x1 * x1 + x2 * x2 + x3 * x3;
    [
        [
            radial - 2.0 * x1 * x1 - a * x4 + b * x4 * x4 + t2 * x3 * x4,
            -2.0 * x1 * x2 - w,
            -2.0 * x1 * x3 + t2 * x1 * x4,
            -2.0 * x1 * x4 - a * x1 + 2.0 * b * x1 * x4 + t2 * x1 * x3,
        ],
        [
            -2.0 * x1 * x2 + w,
            radial - 2.0 * x2 * x2 - a * x4 + b * x4 * x4,
            -2.0 * x2 * x3,
            -2.0 * x2 * x4 - a * x2 + 2.0 * b * x2 * x4,
        ],
        [
            -2.0 * x1 * x3 - 2.0 * t2 * x1 * x4,
            -2.0 * x2 * x3,
            radial - 2.0 * x3 * x3 + a * x4 + b * x4 * x4,
            -2.0 * x3 * x4 + a * x3 + 2.0 * b * x3 * x4 + 3.0 * t1 * x4 * x4 - t2 * x1 * x1,
        ],
        [
            -2.0 * x1 * x4 + 2.0 * a * x1 - 2.0 * b * x1 * x4,
            -2.0 * x2 * x4 + 2.0 * a * x2 - 2.0 * b * x2 * x4,
            -2.0 * x3 * x4 - 2.0 * a * x3 - 2.0 * b * x3 * x4 - t1 * x4 * x4,
            radial - 2.0 * x4 * x4 - b * tangential - 2.0 * t1 * x3 * x4,
        ],
    ]
}

#[inline]
pub fn divergence(s: &State4, p: &OdeParams) -> f64 {
    let j = jacobian(s, p);
    (0..4).map(|i| j[i][i]).sum()
}

/// Eigenvalue as `[re, im]`.
pub type Complex = [f64; 2];

/// Eigenvalues of a 4x4 matrix, sorted by real part then imaginary part.
pub fn eigenvalues4(m: &Matrix4x4) -> Vec<Complex> {
    let mat = Matrix4::from_fn(|i, j| m[i][j]);
    let mut ev: Vec<Complex> = mat
        .complex_eigenvalues()
        .iter()
        .map(|z| [z.re, z.im])
        .collect();
    ev.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    ev
}

/// Largest distance in an optimal pairing of two eigenvalue lists.
pub fn eigen_mismatch(found: &[Complex], expected: &[Complex]) -> f64 {
    let mut left: Vec<Complex> = expected.to_vec();
    let mut worst: f64 = 0.0;
    for z in found {
        let (k, d) = left
            .iter()
            .enumerate()
            .map(|(k, e)| (k, (z[0] - e[0]).hypot(z[1] - e[1])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, f64::INFINITY));
        if k < left.len() {
            left.remove(k);
        }
        worst = worst.max(d);
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub point: State4,
    /// `|f(O)|`.
    pub residual: f64,
    pub eigenvalues: Vec<Complex>,
    /// Tangential pair, tangential real and radial eigenvalue; only for `tau1 = 0`.
    pub expected: Option<Vec<Complex>>,
    pub mismatch: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriaCheck {
    pub o1: EquilibriumReport,
    pub o2: EquilibriumReport,
    /// `(C1, E1, C2, E2) = (alpha - beta, alpha + beta, alpha - beta, alpha + beta)`.
    pub saddle_values: Option<SaddleValues>,
    pub constants: Option<MapConstants>,
    pub constants_error: Option<String>,
}

fn norm4(v: &State4) -> f64 {
    r2(v).sqrt()
}

/// Residuals, spectra and derived map constants at `O1` and `O2`.
pub fn equilibria_check(p: &OdeParams) -> EquilibriaCheck {
    let (a, b, w) = (p.alpha, p.beta, p.omega);
    let tangential = p.tau1 == 0.0;
    let report = |o: State4, expected: Vec<Complex>| {
        let eigenvalues = eigenvalues4(&jacobian(&o, p));
        let expected = tangential.then_some(expected);
        let mismatch = expected.as_ref().map(|e| eigen_mismatch(&eigenvalues, e));
        EquilibriumReport {
            point: o,
            residual: norm4(&vector_field(&o, p)),
            eigenvalues,
            expected,
            mismatch,
        }
    };
    let o1 = report(
        O1,
        vec![[-(a - b), w], [-(a - b), -w], [a + b, 0.0], [-2.0, 0.0]],
    );
    let o2 = report(
        O2,
        vec![[a + b, w], [a + b, -w], [-(a - b), 0.0], [-2.0, 0.0]],
    );
    let sv = SaddleValues::new(a - b, a + b, a - b, a + b, w);
    let (saddle_values, constants, constants_error) = match sv.and_then(|sv| Ok((sv, derive_constants(&sv)?))) {
        Ok((sv, c)) => (Some(sv), Some(c), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    EquilibriaCheck {
        o1,
        o2,
        saddle_values,
        constants,
        constants_error,
    }
}
