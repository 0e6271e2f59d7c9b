//! Resonance wedges, `(1, l)`-fixed points and their bifurcations.
//!
//! A `(1, l)`-fixed point returns to itself after the angle advances by
//! exactly `2 l pi`. Writing `s = y + A + lambda sin x`, this forces
//! `s = exp(-2 l pi / (K w))` and `y = s^delta`, so the fixed points solve
//! `lambda sin x = G_l(w) - A` with
//! `G_l(w) = exp(-2 l pi / (K w)) - exp(-2 l delta pi / (K w))`.

mod bt;
mod surfaces;

pub use bt::{
    bt_nondegeneracy, bt_points, bt_residuals, continue_bt_locus, locate_bt, table_coefficients,
    BtBranch, BtCoefficients, BtPoint, BtSolve,
};
pub use surfaces::{
    hopf_sn_tangency_angle, sample_surfaces, SurfaceLabel, SurfaceRegion, SurfaceSample,
};

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::constants::MapConstants;
use crate::error::{Error, Result};
use crate::linalg::{solve_2x2, Eigenvalues};
use crate::map::{jacobian, return_map, LiftPoint, Params};

/// Half-width of the band treated as a unit-modulus eigenvalue.
pub const NON_HYPERBOLIC_BAND: f64 = 1e-10;
/// Distance of `|G_l - A|` from `lambda` treated as the wedge boundary.
pub const BOUNDARY_TOL: f64 = 1e-10;
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;

pub fn g_ell(omega: f64, ell: u32, c: &MapConstants) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveOmega { omega });
    }
    Ok(g_unchecked(omega, ell, c))
}

#[inline]
pub(crate) fn g_unchecked(omega: f64, ell: u32, c: &MapConstants) -> f64 {
    let base = -2.0 * ell as f64 * PI / (c.k * omega);
    base.exp() - (c.delta * base).exp()
}

/// Maximiser of `G_l`, `2 l pi (delta - 1) / (K ln delta)`.
pub fn omega_star(ell: u32, c: &MapConstants) -> f64 {
    2.0 * ell as f64 * PI * (c.delta - 1.0) / (c.k * c.delta.ln())
}

/// The two frequencies with `G_l(w) = level`, below and above `omega_star`.
pub fn g_level_omegas(level: f64, ell: u32, c: &MapConstants) -> Result<(f64, f64)> {
    let peak = omega_star(ell, c);
    if !(level > 0.0 && level < c.m) {
        return Err(Error::InvalidParams(format!(
            "G_l level {level} must lie in (0, M = {})",
            c.m
        )));
    }
    let root = |mut lo: f64, mut hi: f64, rising: bool| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (g_unchecked(mid, ell, c) < level) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mut far = 2.0 * peak;
    while g_unchecked(far, ell, c) >= level {
        far *= 2.0;
    }
    Ok((root(0.0, peak, true), root(far, peak, true)))
}

/// Value of `s` at every `(1, l)`-fixed point for this `omega`.
#[inline]
pub fn fixed_s(omega: f64, ell: u32, c: &MapConstants) -> f64 {
    (-2.0 * ell as f64 * PI / (c.k * omega)).exp()
}

/// Determinant of the Jacobian at any `(1, l)`-fixed point, `delta exp(-2 l (delta-1) pi / (K w))`.
pub fn fixed_det(omega: f64, ell: u32, c: &MapConstants) -> f64 {
    c.delta * (-2.0 * ell as f64 * (c.delta - 1.0) * PI / (c.k * omega)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

pub fn wedge_membership(mu: &Params, ell: u32, c: &MapConstants) -> Result<Membership> {
    let gap = (g_ell(mu.omega, ell, c)? - mu.a).abs() - mu.lambda;
    Ok(if gap.abs() <= BOUNDARY_TOL {
        Membership::Boundary
    } else if gap < 0.0 {
        Membership::Inside
    } else {
        Membership::Outside
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointClass {
    SinkNode,
    SinkFocus,
    Saddle,
    SourceNode,
    SourceFocus,
    NonHyperbolic,
}

impl FixedPointClass {
    pub fn is_sink(self) -> bool {
        matches!(self, FixedPointClass::SinkNode | FixedPointClass::SinkFocus)
    }
}

pub fn classify(trace: f64, det: f64) -> FixedPointClass {
    let ev = Eigenvalues::from_trace_det(trace, det);
    let (big, small) = ev.moduli();
    if (big - 1.0).abs() <= NON_HYPERBOLIC_BAND || (small - 1.0).abs() <= NON_HYPERBOLIC_BAND {
        return FixedPointClass::NonHyperbolic;
    }
    let focus = ev.is_complex();
    if big < 1.0 {
        if focus {
            FixedPointClass::SinkFocus
        } else {
            FixedPointClass::SinkNode
        }
    } else if small > 1.0 {
        if focus {
            FixedPointClass::SourceFocus
        } else {
            FixedPointClass::SourceNode
        }
    } else {
        FixedPointClass::Saddle
    }
}

/// Which solution of `sin x = sigma` a fixed point sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FixedBranch {
    /// `x = asin(sigma)`, `cos x >= 0`.
    CosPositive,
    /// `x = pi - asin(sigma)`, `cos x <= 0`.
    CosNegative,
    /// Tangency, `sigma = +-1`.
    Tangent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub ell: u32,
    pub branch: FixedBranch,
    /// Angle in `[0, 2 pi)`.
    pub x: f64,
    pub y: f64,
    pub s: f64,
    pub trace: f64,
    pub det: f64,
    pub eigenvalues: Eigenvalues,
    pub class: FixedPointClass,
    /// Max-norm residual of `F(p) - (x + 2 l pi, y)` after polishing.
    pub residual: f64,
}

impl FixedPointRecord {
    pub fn point(&self) -> LiftPoint {
        LiftPoint::new(self.x, self.y)
    }
}

/// Solves `sin x = sigma` for `sigma = (G_l(w) - A) / lambda`.
///
/// `None` means no solutions; the degenerate `lambda = 0` circle is an error.
fn angle_solutions(mu: &Params, ell: u32, c: &MapConstants) -> Result<Vec<(FixedBranch, f64)>> {
    let g = g_ell(mu.omega, ell, c)?;
    if mu.lambda < 0.0 {
        return Err(Error::InvalidParams(format!(
            "lambda must be non-negative, got {}",
            mu.lambda
        )));
    }
    if mu.lambda == 0.0 {
        if (g - mu.a).abs() <= 1e-14 * g.max(mu.a.abs()).max(1e-300) {
            return Err(Error::DegenerateCircle);
        }
        return Ok(Vec::new());
    }
    let sigma = (g - mu.a) / mu.lambda;
    if sigma.abs() > 1.0 + 1e-12 {
        return Ok(Vec::new());
    }
    if sigma.abs() >= 1.0 - 1e-12 {
        let x = if sigma > 0.0 { 0.5 * PI } else { 1.5 * PI };
        return Ok(vec![(FixedBranch::Tangent, x)]);
    }
    let base = sigma.asin();
    Ok(vec![
        (FixedBranch::CosPositive, base.rem_euclid(TAU)),
        (FixedBranch::CosNegative, (PI - base).rem_euclid(TAU)),
    ])
}

fn residual(p: LiftPoint, ell: u32, mu: &Params, c: &MapConstants) -> Result<[f64; 2]> {
    let q = return_map(p, mu, c)?;
    Ok([q.x - p.x - TAU * ell as f64, q.y - p.y])
}

/// Newton on the lift for `F(p) = p + (2 l pi, 0)`.
pub fn polish_fixed_point(
    seed: LiftPoint,
    ell: u32,
    mu: &Params,
    c: &MapConstants,
) -> Result<(LiftPoint, f64)> {
    let mut p = seed;
    let mut r = residual(p, ell, mu, c)?;
    let mut norm = r[0].abs().max(r[1].abs());
    for _ in 0..NEWTON_MAX_ITER {
        if norm <= NEWTON_TOL {
            return Ok((p, norm));
        }
        let j = jacobian(p, mu, c)?;
        let a = [[j.a11 - 1.0, j.a12], [j.a21, j.a22 - 1.0]];
        let Some(d) = solve_2x2(a, [-r[0], -r[1]]) else {
            break;
        };
        let trial = LiftPoint::new(p.x + d[0], p.y + d[1]);
        let Ok(rt) = residual(trial, ell, mu, c) else {
            break;
        };
        let nt = rt[0].abs().max(rt[1].abs());
        if nt >= norm && norm <= 1e2 * NEWTON_TOL {
            // stalled at rounding level
            return Ok((p, norm));
        }
        p = trial;
        r = rt;
        norm = nt;
    }
    if norm <= NEWTON_TOL {
        return Ok((p, norm));
    }
    Err(Error::NewtonFailed {
        iterations: NEWTON_MAX_ITER,
        residual: norm,
    })
}

fn record(
    branch: FixedBranch,
    p: LiftPoint,
    residual: f64,
    ell: u32,
    mu: &Params,
    c: &MapConstants,
) -> Result<FixedPointRecord> {
    let j = jacobian(p, mu, c)?;
    let (trace, det) = (j.trace(), j.det());
    let r = p.reduced();
    Ok(FixedPointRecord {
        ell,
        branch,
        x: r.x,
        y: r.y,
        s: mu.s(r),
        trace,
        det,
        eigenvalues: j.eigenvalues(),
        class: classify(trace, det),
        residual,
    })
}

/// All `(1, l)`-fixed points for these parameters, closed-form seeded and
/// Newton polished.
pub fn fixed_points(mu: &Params, c: &MapConstants, ell: u32) -> Result<Vec<FixedPointRecord>> {
    let sols = angle_solutions(mu, ell, c)?;
    let s = fixed_s(mu.omega, ell, c);
    let y = s.powf(c.delta);
    sols.into_iter()
        .map(|(branch, x)| {
            let seed = LiftPoint::new(x, y);
            let (p, res) = if branch == FixedBranch::Tangent {
                // Newton is singular at the tangency; the seed is exact up to rounding.
                let r = residual(seed, ell, mu, c)?;
                (seed, r[0].abs().max(r[1].abs()))
            } else {
                polish_fixed_point(seed, ell, mu, c)?
            };
            record(branch, p, res, ell, mu, c)
        })
        .collect()
}

/// Fixed point on one branch without Newton polishing; `None` outside the wedge.
pub(crate) fn closed_form_point(
    mu: &Params,
    c: &MapConstants,
    ell: u32,
    branch: FixedBranch,
) -> Option<LiftPoint> {
    if !(mu.lambda > 0.0 && mu.omega > 0.0) {
        return None;
    }
    let s = fixed_s(mu.omega, ell, c);
    let sigma = (s - s.powf(c.delta) - mu.a) / mu.lambda;
    if !(sigma.abs() <= 1.0) {
        return None;
    }
    let base = sigma.asin();
    let x = match branch {
        FixedBranch::CosPositive => base,
        FixedBranch::CosNegative => PI - base,
        FixedBranch::Tangent => return None,
    };
    Some(LiftPoint::new(x, s.powf(c.delta)))
}

/// Closed-form trace at the fixed point on `branch`:
/// `1 -+ K w sqrt(lambda^2 - (G - A)^2) / s + det`.
pub(crate) fn closed_form_trace(
    mu: &Params,
    c: &MapConstants,
    ell: u32,
    branch: FixedBranch,
) -> Option<f64> {
    let g = g_unchecked(mu.omega, ell, c);
    let rad = mu.lambda * mu.lambda - (g - mu.a).powi(2);
    if !(rad >= 0.0) {
        return None;
    }
    let sign = match branch {
        FixedBranch::CosPositive => 1.0,
        FixedBranch::CosNegative => -1.0,
        FixedBranch::Tangent => 0.0,
    };
    let s = fixed_s(mu.omega, ell, c);
    Some(1.0 - sign * c.k * mu.omega * rad.sqrt() / s + fixed_det(mu.omega, ell, c))
}
