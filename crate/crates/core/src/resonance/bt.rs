//! Discrete Bogdanov-Takens points: location and nondegeneracy coefficients.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::{fixed_s, g_unchecked, omega_star};
use crate::constants::MapConstants;
use crate::error::{Error, Result};
use crate::map::{jacobian, return_map, LiftPoint, Params};

const FD_STEP: f64 = 1e-4;
const LOCATED_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BtBranch {
    /// `x = pi/2`, `A = G_l(w*) - lambda`.
    HalfPi,
    /// `x = 3 pi/2`, `A = G_l(w*) + lambda`.
    ThreeHalvesPi,
}

impl BtBranch {
    pub fn angle(self) -> f64 {
        match self {
            BtBranch::HalfPi => 0.5 * PI,
            BtBranch::ThreeHalvesPi => 1.5 * PI,
        }
    }

    /// `sin x` at the branch angle.
    pub fn sign(self) -> f64 {
        match self {
            BtBranch::HalfPi => 1.0,
            BtBranch::ThreeHalvesPi => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtCoefficients {
    /// Scale of the `y` coordinate change, `-2 K l pi (delta-1) / (delta^(delta/(1-delta)) ln delta)`.
    pub coeff_c: f64,
    pub a20: f64,
    pub b11: f64,
    pub b20: f64,
    /// Finite-difference noise estimated by step halving, per coefficient.
    pub noise: [f64; 3],
    /// Sign pattern `b20 < 0, a20 + b11 - b20 > 0` (mirrored at `x = pi/2`).
    pub nondegenerate: bool,
    /// `b20 (a20 + b11 - b20) < 0`: the invariant circle born at Hopf is attracting.
    pub stable_circle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtPoint {
    pub ell: u32,
    pub branch: BtBranch,
    pub a: f64,
    pub lambda: f64,
    pub omega: f64,
    pub coeff_c: f64,
    pub a20: f64,
    pub b11: f64,
    pub b20: f64,
    pub nondegenerate: bool,
    /// Set when the point has `A < 0`, i.e. `lambda >= M` on the lower branch.
    pub outside_region: bool,
}

impl BtPoint {
    pub fn params(&self) -> Params {
        Params::new(self.a, self.lambda, self.omega)
    }

    /// The fixed point carrying the double unit eigenvalue.
    pub fn point(&self, c: &MapConstants) -> LiftPoint {
        LiftPoint::new(
            self.branch.angle(),
            fixed_s(self.omega, self.ell, c).powf(c.delta),
        )
    }
}

fn bare_point(lambda: f64, ell: u32, c: &MapConstants, branch: BtBranch) -> BtPoint {
    let omega = omega_star(ell, c);
    let a = g_unchecked(omega, ell, c) - branch.sign() * lambda;
    BtPoint {
        ell,
        branch,
        a,
        lambda,
        omega,
        coeff_c: coordinate_scale(ell, c),
        a20: 0.0,
        b11: 0.0,
        b20: 0.0,
        nondegenerate: false,
        outside_region: a < 0.0,
    }
}

/// The two Bogdanov-Takens points at `omega = omega*_l` for this `lambda`.
pub fn bt_points(lambda: f64, ell: u32, c: &MapConstants) -> Result<(BtPoint, BtPoint)> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "lambda must be non-negative, got {lambda}"
        )));
    }
    let fill = |branch| -> Result<BtPoint> {
        let mut bt = bare_point(lambda, ell, c, branch);
        let coeffs = bt_nondegeneracy(&bt, c)?;
        bt.coeff_c = coeffs.coeff_c;
        bt.a20 = coeffs.a20;
        bt.b11 = coeffs.b11;
        bt.b20 = coeffs.b20;
        bt.nondegenerate = coeffs.nondegenerate;
        Ok(bt)
    };
    Ok((fill(BtBranch::HalfPi)?, fill(BtBranch::ThreeHalvesPi)?))
}

pub fn coordinate_scale(ell: u32, c: &MapConstants) -> f64 {
    let d = c.delta;
    -2.0 * c.k * ell as f64 * PI * (d - 1.0) / (d.powf(d / (1.0 - d)) * d.ln())
}

/// Second-order coefficients of the map after moving the fixed point to the
/// origin and rescaling `y` by `C`, by central differences.
pub fn bt_nondegeneracy(bt: &BtPoint, c: &MapConstants) -> Result<BtCoefficients> {
    let coeff_c = coordinate_scale(bt.ell, c);
    if bt.lambda == 0.0 {
        return Ok(BtCoefficients {
            coeff_c,
            a20: 0.0,
            b11: 0.0,
            b20: 0.0,
            noise: [0.0; 3],
            nondegenerate: false,
            stable_circle: false,
        });
    }
    let mu = bt.params();
    let p = bt.point(c);
    let q = return_map(p, &mu, c)?;
    let shift = TAU * bt.ell as f64;
    let res = (q.x - p.x - shift).abs().max((q.y - p.y).abs());
    if res > LOCATED_TOL {
        return Err(Error::Inconclusive(format!(
            "Bogdanov-Takens point not located: fixed-point residual {res:e}"
        )));
    }

    let transformed = |u: f64, v: f64| -> Result<(f64, f64)> {
        let r = return_map(LiftPoint::new(p.x + u, p.y + v / coeff_c), &mu, c)?;
        Ok((r.x - p.x - shift, coeff_c * (r.y - p.y)))
    };
    let estimate = |h: f64| -> Result<[f64; 3]> {
        let (t1_0, t2_0) = transformed(0.0, 0.0)?;
        let (t1_p, t2_p) = transformed(h, 0.0)?;
        let (t1_m, t2_m) = transformed(-h, 0.0)?;
        let a20 = (t1_p - 2.0 * t1_0 + t1_m) / (h * h);
        let b20 = (t2_p - 2.0 * t2_0 + t2_m) / (h * h);
        let pp = transformed(h, h)?.1;
        let pm = transformed(h, -h)?.1;
        let mp = transformed(-h, h)?.1;
        let mm = transformed(-h, -h)?.1;
        let b11 = (pp - pm - mp + mm) / (4.0 * h * h);
        Ok([a20, b11, b20])
    };
    let coarse = estimate(FD_STEP)?;
    let fine = estimate(0.5 * FD_STEP)?;
    let noise = [
        (coarse[0] - fine[0]).abs(),
        (coarse[1] - fine[1]).abs(),
        (coarse[2] - fine[2]).abs(),
    ];
    let [a20, b11, b20] = coarse;
    let combo = a20 + b11 - b20;
    if b20.abs() <= 10.0 * noise[2] || combo.abs() <= 10.0 * (noise[0] + noise[1] + noise[2]) {
        return Err(Error::Inconclusive(format!(
            "coefficients at finite-difference noise level: b20 = {b20:e}, a20 + b11 - b20 = {combo:e}"
        )));
    }
    let nondegenerate = match bt.branch {
        BtBranch::ThreeHalvesPi => b20 < 0.0 && combo > 0.0,
        BtBranch::HalfPi => b20 > 0.0 && combo < 0.0,
    };
    Ok(BtCoefficients {
        coeff_c,
        a20,
        b11,
        b20,
        noise,
        nondegenerate,
        stable_circle: b20 * combo < 0.0,
    })
}

/// Closed-form leading coefficients for the two branches,
/// `(a20, b11, b20)`.
pub fn table_coefficients(bt: &BtPoint, c: &MapConstants) -> (f64, f64, f64) {
    let cc = coordinate_scale(bt.ell, c);
    let (d, kw, lam) = (c.delta, c.k * bt.omega, bt.lambda);
    match bt.branch {
        BtBranch::ThreeHalvesPi => {
            let base = bt.a + lam;
            let b = base.powf(d - 2.0) * lam * d * (1.0 - d);
            (-cc * kw * lam / (base * base), b, b)
        }
        BtBranch::HalfPi => {
            let base = bt.a - lam;
            let b = -base.powf(d - 2.0) * lam * d * (1.0 - d);
            (cc * kw * lam / (base * base), b, b)
        }
    }
}

/// A numerically located point of the double-unit-eigenvalue locus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtSolve {
    pub x: f64,
    pub y: f64,
    pub a: f64,
    pub omega: f64,
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// `[F1 - x - 2 l pi, F2 - y, trace - 2, det - 1]` at `(x, y)` for `(A, lambda, w)`.
pub fn bt_residuals(
    x: f64,
    y: f64,
    a: f64,
    omega: f64,
    lambda: f64,
    ell: u32,
    c: &MapConstants,
) -> Result<[f64; 4]> {
    let mu = Params::new(a, lambda, omega);
    let p = LiftPoint::new(x, y);
    let q = return_map(p, &mu, c)?;
    let j = jacobian(p, &mu, c)?;
    Ok([
        q.x - x - TAU * ell as f64,
        q.y - y,
        j.trace() - 2.0,
        j.det() - 1.0,
    ])
}

/// Newton on `(x, y, A, w)` for the four conditions of [`bt_residuals`] at fixed `lambda`.
pub fn locate_bt(lambda: f64, ell: u32, c: &MapConstants, seed: [f64; 4]) -> Result<BtSolve> {
    let eval = |z: &Vector4<f64>| -> Result<Vector4<f64>> {
        bt_residuals(z[0], z[1], z[2], z[3], lambda, ell, c).map(Vector4::from)
    };
    let norm = |r: &Vector4<f64>| r.amax();
    let mut z = Vector4::from(seed);
    let mut r = eval(&z)?;
    const MAX_ITER: usize = 60;
    for it in 0..MAX_ITER {
        if norm(&r) <= 1e-13 {
            return Ok(solved(&z, lambda, norm(&r), it));
        }
        let mut jac = Matrix4::zeros();
        for k in 0..4 {
            let h = 1e-7 * z[k].abs().max(1e-3);
            let mut zp = z;
            let mut zm = z;
            zp[k] += h;
            zm[k] -= h;
            let col = (eval(&zp)? - eval(&zm)?) / (2.0 * h);
            jac.set_column(k, &col);
        }
        let Some(step) = jac.lu().solve(&(-r)) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-4 {
            let trial = z + step * t;
            if let Ok(rt) = eval(&trial) {
                if norm(&rt) < norm(&r) || norm(&rt) <= 1e-13 {
                    z = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm(&r) <= 1e-11 {
        return Ok(solved(&z, lambda, norm(&r), MAX_ITER));
    }
    Err(Error::NewtonFailed {
        iterations: MAX_ITER,
        residual: norm(&r),
    })
}

fn solved(z: &Vector4<f64>, lambda: f64, residual: f64, iterations: usize) -> BtSolve {
    BtSolve {
        x: z[0],
        y: z[1],
        a: z[2],
        omega: z[3],
        lambda,
        residual,
        iterations,
    }
}

/// Follows the locus through `lambdas` in order, each solve seeded by the previous.
pub fn continue_bt_locus(
    lambdas: &[f64],
    ell: u32,
    c: &MapConstants,
    seed: [f64; 4],
) -> Result<Vec<BtSolve>> {
    let mut out = Vec::with_capacity(lambdas.len());
    let mut guess = seed;
    for &lam in lambdas {
        let sol = locate_bt(lam, ell, c, guess)?;
        guess = [sol.x, sol.y, sol.a, sol.omega];
        out.push(sol);
    }
    Ok(out)
}
