//! Samplers for the bifurcation surfaces of `(1, l)`-fixed points.
//!
//! At a fixed point the trace and determinant are known in closed form, so
//! every surface is the zero set of a scalar residual along one grid axis:
//!
//! | label | residual                         | axis  |
//! |-------|----------------------------------|-------|
//! | SN1   | `G_l(w) - A - lambda`            | A     |
//! | SN2   | `G_l(w) - A + lambda`            | A     |
//! | HOPF  | `det - 1`, with `|trace| < 2`    | omega |
//! | PD    | `1 + trace + det`                | omega |
//! | NF    | `trace^2 - 4 det`                | omega |

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    closed_form_point, closed_form_trace, fixed_det, g_unchecked, omega_star, FixedBranch,
};
use crate::constants::MapConstants;
use crate::error::{Error, Result};
use crate::map::{jacobian, Params};

/// Samples with a larger defining residual are dropped.
pub const SAMPLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SurfaceLabel {
    #[serde(rename = "SN1")]
    Sn1,
    #[serde(rename = "SN2")]
    Sn2,
    #[serde(rename = "HOPF")]
    Hopf,
    #[serde(rename = "PD")]
    Pd,
    #[serde(rename = "NF")]
    Nf,
}

impl SurfaceLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SurfaceLabel::Sn1 => "SN1",
            SurfaceLabel::Sn2 => "SN2",
            SurfaceLabel::Hopf => "HOPF",
            SurfaceLabel::Pd => "PD",
            SurfaceLabel::Nf => "NF",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRegion {
    pub a: (f64, f64),
    pub lambda: (f64, f64),
    pub omega: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSample {
    pub label: SurfaceLabel,
    pub a: f64,
    pub lambda: f64,
    pub omega: f64,
    pub branch: FixedBranch,
    pub residual: f64,
}

fn node(range: (f64, f64), n: usize, i: usize) -> f64 {
    range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
}

/// Bisection on a bracket with a sign change; `None` if `f` leaves its domain.
fn bisect(f: impl Fn(f64) -> Option<f64>, mut lo: f64, mut hi: f64) -> Option<(f64, f64)> {
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Some((lo, 0.0));
    }
    if f_hi == 0.0 {
        return Some((hi, 0.0));
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Some((mid, 0.0));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    Some((root, f(root)?.abs()))
}

fn validate(region: &SurfaceRegion, grid: [usize; 3]) -> Result<()> {
    if grid.iter().any(|&n| n < 2) {
        return Err(Error::InvalidParams(format!(
            "surface grid needs at least 2 nodes per axis, got {grid:?}"
        )));
    }
    for (name, (lo, hi)) in [
        ("A", region.a),
        ("lambda", region.lambda),
        ("omega", region.omega),
    ] {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidParams(format!(
                "{name} range needs finite min <= max, got {lo}..{hi}"
            )));
        }
    }
    if !(region.omega.0 > 0.0) {
        return Err(Error::NonPositiveOmega {
            omega: region.omega.0,
        });
    }
    if region.lambda.0 < 0.0 {
        return Err(Error::InvalidParams("lambda must be non-negative".into()));
    }
    Ok(())
}

fn branch_residual(
    label: SurfaceLabel,
    mu: &Params,
    c: &MapConstants,
    ell: u32,
    branch: FixedBranch,
) -> Option<f64> {
    let trace = closed_form_trace(mu, c, ell, branch)?;
    let det = fixed_det(mu.omega, ell, c);
    Some(match label {
        SurfaceLabel::Hopf => det - 1.0,
        SurfaceLabel::Pd => 1.0 + trace + det,
        SurfaceLabel::Nf => trace * trace - 4.0 * det,
        SurfaceLabel::Sn1 | SurfaceLabel::Sn2 => unreachable!("saddle-nodes are sampled along A"),
    })
}

/// Residual from the Jacobian evaluated at the actual fixed point.
fn jacobian_residual(
    label: SurfaceLabel,
    mu: &Params,
    c: &MapConstants,
    ell: u32,
    branch: FixedBranch,
) -> Option<(f64, f64)> {
    let p = closed_form_point(mu, c, ell, branch)?;
    let j = jacobian(p, mu, c).ok()?;
    let (t, d) = (j.trace(), j.det());
    let r = match label {
        SurfaceLabel::Hopf => d - 1.0,
        SurfaceLabel::Pd => 1.0 + t + d,
        SurfaceLabel::Nf => t * t - 4.0 * d,
        SurfaceLabel::Sn1 | SurfaceLabel::Sn2 => return None,
    };
    Some((r, t))
}

/// Locates a saddle-node sample on the A-edge `[a0, a1]`.
fn sn_on_edge(
    label: SurfaceLabel,
    lambda: f64,
    omega: f64,
    a0: f64,
    a1: f64,
    ell: u32,
    c: &MapConstants,
) -> Option<SurfaceSample> {
    let g = g_unchecked(omega, ell, c);
    let sign = if label == SurfaceLabel::Sn1 { 1.0 } else { -1.0 };
    let (a, res) = bisect(|a| Some(g - a - sign * lambda), a0, a1)?;
    (res < SAMPLE_TOL).then_some(SurfaceSample {
        label,
        a,
        lambda,
        omega,
        branch: FixedBranch::Tangent,
        residual: res,
    })
}

/// Locates a HOPF/PD/NF sample on the omega-edge `[w0, w1]` for one branch.
#[allow(clippy::too_many_arguments)]
fn fixed_point_surface_on_edge(
    label: SurfaceLabel,
    a: f64,
    lambda: f64,
    w0: f64,
    w1: f64,
    ell: u32,
    c: &MapConstants,
    branch: FixedBranch,
) -> Option<SurfaceSample> {
    let at = |w: f64| Params::new(a, lambda, w);
    let (omega, _) = bisect(|w| branch_residual(label, &at(w), c, ell, branch), w0, w1)?;
    let mu = at(omega);
    let (res, trace) = jacobian_residual(label, &mu, c, ell, branch)?;
    if label == SurfaceLabel::Hopf && !(trace.abs() < 2.0) {
        return None;
    }
    (res.abs() < SAMPLE_TOL).then_some(SurfaceSample {
        label,
        a,
        lambda,
        omega,
        branch,
        residual: res.abs(),
    })
}

/// Every surface crossing of the grid edges inside `region`.
///
/// `grid` is the node count along `(A, lambda, omega)`. Output order is
/// deterministic: by lambda node, then label, then A node, then omega node.
pub fn sample_surfaces(
    region: &SurfaceRegion,
    ell: u32,
    c: &MapConstants,
    grid: [usize; 3],
) -> Result<Vec<SurfaceSample>> {
    validate(region, grid)?;
    let [na, nl, nw] = grid;
    let per_lambda: Vec<Vec<SurfaceSample>> = (0..nl)
        .into_par_iter()
        .map(|k| {
            let lambda = node(region.lambda, nl, k);
            let mut out = Vec::new();
            for label in [SurfaceLabel::Sn1, SurfaceLabel::Sn2] {
                for m in 0..nw {
                    let omega = node(region.omega, nw, m);
                    for i in 0..na - 1 {
                        let (a0, a1) = (node(region.a, na, i), node(region.a, na, i + 1));
                        out.extend(sn_on_edge(label, lambda, omega, a0, a1, ell, c));
                    }
                }
            }
            for label in [SurfaceLabel::Hopf, SurfaceLabel::Pd, SurfaceLabel::Nf] {
                for i in 0..na {
                    let a = node(region.a, na, i);
                    for m in 0..nw - 1 {
                        let (w0, w1) = (node(region.omega, nw, m), node(region.omega, nw, m + 1));
                        for branch in [FixedBranch::CosPositive, FixedBranch::CosNegative] {
                            out.extend(fixed_point_surface_on_edge(
                                label, a, lambda, w0, w1, ell, c, branch,
                            ));
                        }
                    }
                }
            }
            out
        })
        .collect();
    Ok(per_lambda.into_iter().flatten().collect())
}

/// Angle in degrees between the HOPF and SN1 curves at the lower
/// Bogdanov-Takens point, in the `(A, omega)` plane at fixed `lambda`.
///
/// Both curves are sampled `step` away from the point (HOPF along A, SN1 along
/// omega) and the angle is taken between the two secants.
pub fn hopf_sn_tangency_angle(lambda: f64, ell: u32, c: &MapConstants, step: f64) -> Result<f64> {
    if !(lambda > 0.0 && step > 0.0) {
        return Err(Error::InvalidParams(
            "tangency angle needs lambda > 0 and step > 0".into(),
        ));
    }
    let w_bt = omega_star(ell, c);
    let a_bt = g_unchecked(w_bt, ell, c) - lambda;

    let a_h = a_bt + step;
    let hopf = [FixedBranch::CosPositive, FixedBranch::CosNegative]
        .into_iter()
        .find_map(|b| {
            fixed_point_surface_on_edge(
                SurfaceLabel::Hopf,
                a_h,
                lambda,
                0.9 * w_bt,
                1.1 * w_bt,
                ell,
                c,
                b,
            )
        })
        .ok_or_else(|| Error::Inconclusive("no Hopf sample next to the BT point".into()))?;

    let w_s = w_bt + step;
    let sn = sn_on_edge(SurfaceLabel::Sn1, lambda, w_s, a_bt - 1.0, a_bt + 1.0, ell, c)
        .ok_or_else(|| Error::Inconclusive("no SN1 sample next to the BT point".into()))?;

    let dh = [hopf.a - a_bt, hopf.omega - w_bt];
    let ds = [sn.a - a_bt, sn.omega - w_bt];
    let cos = (dh[0] * ds[0] + dh[1] * ds[1]).abs() / (dh[0].hypot(dh[1]) * ds[0].hypot(ds[1]));
    Ok(cos.min(1.0).acos().to_degrees())
}
