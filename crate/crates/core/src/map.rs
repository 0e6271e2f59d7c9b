//! Factor maps and the truncated first return map.
//!
//! Points live on the universal cover of the cross-section: `x` is never
//! reduced modulo `2 pi` here, so lift displacements count full turns. Only
//! [`LiftPoint::reduced`] folds the angle back onto `[0, 2 pi)`.
//!
//! The remainder terms of the local maps are dropped, and only the upper
//! component (`y > 0` for the logarithmic stages) is modelled.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::constants::MapConstants;
use crate::error::{Error, Result};
use crate::linalg::Eigenvalues;

/// Unfolding parameters `(A, lambda, omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Average splitting of the two-dimensional connection.
    pub a: f64,
    /// Amplitude of the splitting modulation.
    pub lambda: f64,
    /// Spin frequency.
    pub omega: f64,
}

impl Params {
    pub fn new(a: f64, lambda: f64, omega: f64) -> Self {
        Self { a, lambda, omega }
    }

    /// Membership in the parameter set `0 <= lambda < A <= eps`, `M >= A + lambda`.
    pub fn in_admissible_set(&self, c: &MapConstants, eps: f64) -> bool {
        0.0 <= self.lambda
            && self.lambda < self.a
            && self.a <= eps
            && c.m >= self.a + self.lambda
            && self.omega > 0.0
    }

    /// `y + A + lambda sin x`, the argument of both logarithm and power.
    #[inline]
    pub fn s(&self, p: LiftPoint) -> f64 {
        p.y + self.a + self.lambda * p.x.sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftPoint {
    pub x: f64,
    pub y: f64,
}

impl LiftPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Same point with the angle folded onto `[0, 2 pi)`.
    pub fn reduced(&self) -> Self {
        Self {
            x: self.x.rem_euclid(TAU),
            y: self.y,
        }
    }

    pub fn dist(&self, other: &Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Stages of the return map, `F = Eta . Psi21` with `Eta = Phi2 . Psi12 . Phi1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    /// Local map near the first saddle; output read as `(r, phi)`.
    Phi1,
    /// Local map near the second saddle; input read as `(r, phi)`.
    Phi2,
    /// Transition along the one-dimensional connection (identity).
    Psi12,
    /// Transition along the split two-dimensional connection.
    Psi21,
    /// Composition `Phi2 . Psi12 . Phi1`.
    Eta,
}

fn positive(value: f64) -> Result<f64> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositiveRadius { value })
    }
}

pub fn factor_map(stage: Stage, p: LiftPoint, mu: &Params, c: &MapConstants) -> Result<LiftPoint> {
    let w = mu.omega;
    match stage {
        Stage::Phi1 => {
            let y = positive(p.y)?;
            Ok(LiftPoint::new(y.powf(c.delta1), p.x - (w / c.e1) * y.ln()))
        }
        Stage::Psi12 => Ok(p),
        Stage::Phi2 => {
            let (r, phi) = (positive(p.x)?, p.y);
            Ok(LiftPoint::new(phi - (w / c.e2) * r.ln(), r.powf(c.delta2)))
        }
        Stage::Psi21 => Ok(LiftPoint::new(p.x, p.y + mu.a + mu.lambda * p.x.sin())),
        Stage::Eta => {
            let y = positive(p.y)?;
            Ok(LiftPoint::new(p.x - c.k * w * y.ln(), y.powf(c.delta)))
        }
    }
}

fn checked_s(p: LiftPoint, mu: &Params) -> Result<f64> {
    if !(p.y.abs() <= 1.0) {
        return Err(Error::OutOfSection { y: p.y });
    }
    let s = mu.s(p);
    if !(s > 0.0) {
        return Err(Error::LeftDomain { s });
    }
    Ok(s)
}

/// One return to the cross-section, in the lift.
#[inline]
pub fn return_map(p: LiftPoint, mu: &Params, c: &MapConstants) -> Result<LiftPoint> {
    let s = checked_s(p, mu)?;
    Ok(LiftPoint::new(p.x - c.k * mu.omega * s.ln(), s.powf(c.delta)))
}

/// [`return_map`] followed by reduction of the angle.
pub fn return_map_reduced(p: LiftPoint, mu: &Params, c: &MapConstants) -> Result<LiftPoint> {
    return_map(p, mu, c).map(|q| q.reduced())
}

/// Inverse of the return map on its image, in the lift. Used for stable manifolds.
pub fn inverse_return_map(q: LiftPoint, mu: &Params, c: &MapConstants) -> Result<LiftPoint> {
    if !(q.y > 0.0) {
        return Err(Error::NonPositiveRadius { value: q.y });
    }
    let s = q.y.powf(1.0 / c.delta);
    let x = q.x + c.k * mu.omega * s.ln();
    let y = s - mu.a - mu.lambda * x.sin();
    if !(y.abs() <= 1.0) {
        return Err(Error::OutOfSection { y });
    }
    Ok(LiftPoint::new(x, y))
}

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Jacobian2 {
    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn eigenvalues(&self) -> Eigenvalues {
        Eigenvalues::from_trace_det(self.trace(), self.det())
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    #[inline]
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }
}

#[inline]
pub fn jacobian(p: LiftPoint, mu: &Params, c: &MapConstants) -> Result<Jacobian2> {
    let s = checked_s(p, mu)?;
    let kw = c.k * mu.omega;
    let cos = p.x.cos();
    let dy = c.delta * s.powf(c.delta - 1.0);
    Ok(Jacobian2 {
        a11: 1.0 - kw * mu.lambda * cos / s,
        a12: -kw / s,
        a21: mu.lambda * cos * dy,
        a22: dy,
    })
}

/// Map and Jacobian in one pass, sharing `s`.
#[inline]
pub fn step_with_jacobian(
    p: LiftPoint,
    mu: &Params,
    c: &MapConstants,
) -> Result<(LiftPoint, Jacobian2)> {
    let s = checked_s(p, mu)?;
    let kw = c.k * mu.omega;
    let cos = p.x.cos();
    // same rounding as `return_map`
    let y = s.powf(c.delta);
    let dy = c.delta * y / s;
    let next = LiftPoint::new(p.x - kw * s.ln(), y);
    let jac = Jacobian2 {
        a11: 1.0 - kw * mu.lambda * cos / s,
        a12: -kw / s,
        a21: mu.lambda * cos * dy,
        a22: dy,
    };
    Ok((next, jac))
}

/// Determinant of the Jacobian as a function of `s` only: `delta s^(delta-1)`.
pub fn det_from_s(s: f64, c: &MapConstants) -> f64 {
    c.delta * s.powf(c.delta - 1.0)
}
