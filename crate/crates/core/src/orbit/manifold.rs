//! One-dimensional invariant manifolds of saddle `(1, l)`-fixed points.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::MapConstants;
use crate::error::{Error, Result};
use crate::linalg::{eigenvector_2x2, Eigenvalues};
use crate::map::{inverse_return_map, jacobian, return_map, LiftPoint, Params};
use crate::resonance::{fixed_points, FixedPointClass, FixedPointRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Unstable,
    Stable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSettings {
    /// Number of fundamental-domain images to grow.
    pub steps: usize,
    /// Largest allowed distance between consecutive points.
    pub step_cap: f64,
    /// Distance from the saddle to the start of the fundamental segment.
    pub offset: f64,
    /// Growth stops once a branch is this long.
    pub max_arclength: f64,
    /// Hard cap on points per branch; hitting it truncates the trace.
    pub max_points: usize,
}

impl Default for TraceSettings {
    fn default() -> Self {
        Self {
            steps: 40,
            step_cap: 1e-2,
            offset: 1e-6,
            max_arclength: 20.0,
            max_points: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldTrace {
    pub saddle: FixedPointRecord,
    pub side: Side,
    pub eigenvalue: f64,
    /// Unit eigenvector; `points` leaves the saddle along `+direction`.
    pub direction: [f64; 2],
    /// Branch along `+direction`, starting at the saddle.
    pub points: Vec<LiftPoint>,
    /// Branch along `-direction`, starting at the saddle.
    pub opposite: Vec<LiftPoint>,
    /// Total length of both branches.
    pub arclength: f64,
    /// Length of each fundamental-domain image on the `+` branch.
    pub domain_lengths: Vec<f64>,
    /// Set when the domain, the inverse map or the point cap cut growth short.
    pub truncated: bool,
}

/// The saddle among the `(1, l)`-fixed points.
pub fn saddle_of(mu: &Params, c: &MapConstants, ell: u32) -> Result<FixedPointRecord> {
    fixed_points(mu, c, ell)?
        .into_iter()
        .find(|r| r.class == FixedPointClass::Saddle)
        .ok_or(Error::NotSaddle)
}

fn polyline_length(pts: &[LiftPoint]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(&w[1])).sum()
}

struct Branch {
    points: Vec<LiftPoint>,
    domain_lengths: Vec<f64>,
    truncated: bool,
}

fn grow_branch<F>(
    p: LiftPoint,
    v: [f64; 2],
    expansion: f64,
    map: F,
    set: &TraceSettings,
) -> Branch
where
    F: Fn(LiftPoint) -> Result<LiftPoint>,
{
    let h = set.offset;
    let along = |t: f64| LiftPoint::new(p.x + t * v[0], p.y + t * v[1]);
    let image = |t: f64, k: usize| -> Option<LiftPoint> {
        let mut q = along(t);
        for _ in 0..k {
            q = map(q).ok()?;
        }
        Some(q)
    };

    let span = h * (expansion - 1.0);
    let n0 = ((span / set.step_cap).ceil() as usize).max(1) + 1;
    let mut seg: Vec<(f64, LiftPoint)> = (0..n0)
        .map(|i| {
            let t = h * (1.0 + (expansion - 1.0) * i as f64 / (n0 - 1) as f64);
            (t, along(t))
        })
        .collect();

    let mut points = vec![p];
    points.extend(seg.iter().map(|&(_, q)| q));
    let mut domain_lengths = vec![polyline_length(&points[1..])];
    let mut arclength = polyline_length(&points);
    let min_dt = h * 1e-13;

    for k in 1..=set.steps {
        let mut next: Vec<(f64, LiftPoint)> = Vec::with_capacity(seg.len());
        let mut cut = false;
        for &(t, q) in &seg {
            let Ok(img) = map(q) else {
                cut = true;
                break;
            };
            if let Some(&(ta, qa)) = next.last() {
                refine(&mut next, (ta, qa), (t, img), k, &image, set.step_cap, min_dt, &mut cut);
                if cut {
                    break;
                }
            }
            next.push((t, img));
            if points.len() + next.len() > set.max_points {
                cut = true;
                break;
            }
        }
        let pts: Vec<LiftPoint> = next.iter().map(|&(_, q)| q).collect();
        let len = polyline_length(&pts);
        // the first image repeats the previous domain's last point up to O(offset^2)
        let fresh = pts.get(1..).unwrap_or(&[]);
        if let (Some(last), Some(first)) = (points.last(), fresh.first()) {
            arclength += last.dist(first);
        }
        arclength += polyline_length(fresh);
        points.extend_from_slice(fresh);
        domain_lengths.push(len);
        if cut {
            return Branch {
                points,
                domain_lengths,
                truncated: true,
            };
        }
        if arclength >= set.max_arclength {
            break;
        }
        seg = next;
    }
    Branch {
        points,
        domain_lengths,
        truncated: false,
    }
}

/// Inserts images of intermediate parameters between `a` and `b` (exclusive)
/// until consecutive points are at most `cap` apart.
#[allow(clippy::too_many_arguments)]
fn refine<I>(
    out: &mut Vec<(f64, LiftPoint)>,
    a: (f64, LiftPoint),
    b: (f64, LiftPoint),
    k: usize,
    image: &I,
    cap: f64,
    min_dt: f64,
    cut: &mut bool,
) where
    I: Fn(f64, usize) -> Option<LiftPoint>,
{
    if a.1.dist(&b.1) <= cap || (b.0 - a.0).abs() <= min_dt {
        return;
    }
    let tm = 0.5 * (a.0 + b.0);
    let Some(qm) = image(tm, k) else {
        *cut = true;
        return;
    };
    refine(out, a, (tm, qm), k, image, cap, min_dt, cut);
    if *cut {
        return;
    }
    out.push((tm, qm));
    refine(out, (tm, qm), b, k, image, cap, min_dt, cut);
}

/// Grows the unstable (or stable) manifold of a saddle from a fundamental
/// segment along its eigenvector.
///
/// The map used is `F - (2 l pi, 0)`, so the trace stays on the lift sheet of
/// the saddle. The stable side is grown under the inverse. A negative
/// eigenvalue is handled by iterating twice per step.
pub fn manifold_trace(
    fp: &FixedPointRecord,
    mu: &Params,
    c: &MapConstants,
    side: Side,
    settings: &TraceSettings,
) -> Result<ManifoldTrace> {
    if fp.class != FixedPointClass::Saddle {
        return Err(Error::NotSaddle);
    }
    if !(settings.step_cap > 0.0 && settings.offset > 0.0) {
        return Err(Error::InvalidParams(
            "step_cap and offset must be positive".into(),
        ));
    }
    let p = fp.point();
    let j = jacobian(p, mu, c)?;
    let Eigenvalues::Real { first, second } = j.eigenvalues() else {
        return Err(Error::NotSaddle);
    };
    let value = match side {
        Side::Unstable => first,
        Side::Stable => second,
    };
    let v = eigenvector_2x2(j.rows(), value);
    let shift = TAU * fp.ell as f64;
    let twice = value < 0.0;
    let forward = |q: LiftPoint| -> Result<LiftPoint> {
        let r = return_map(q, mu, c)?;
        Ok(LiftPoint::new(r.x - shift, r.y))
    };
    let backward = |q: LiftPoint| inverse_return_map(LiftPoint::new(q.x + shift, q.y), mu, c);
    let step = |q: LiftPoint| -> Result<LiftPoint> {
        let once = match side {
            Side::Unstable => forward(q)?,
            Side::Stable => backward(q)?,
        };
        if !twice {
            return Ok(once);
        }
        match side {
            Side::Unstable => forward(once),
            Side::Stable => backward(once),
        }
    };
    let mut expansion = match side {
        Side::Unstable => value.abs(),
        Side::Stable => 1.0 / value.abs(),
    };
    if twice {
        expansion *= expansion;
    }
    let plus = grow_branch(p, v, expansion, step, settings);
    let minus = grow_branch(p, [-v[0], -v[1]], expansion, step, settings);
    let arclength = polyline_length(&plus.points) + polyline_length(&minus.points);
    Ok(ManifoldTrace {
        saddle: *fp,
        side,
        eigenvalue: value,
        direction: v,
        truncated: plus.truncated || minus.truncated,
        points: plus.points,
        opposite: minus.points,
        arclength,
        domain_lengths: plus.domain_lengths,
    })
}

#[derive(Clone, Copy)]
struct Seg {
    a: LiftPoint,
    b: LiftPoint,
}

impl Seg {
    fn shifted(&self, dx: f64) -> Seg {
        Seg {
            a: LiftPoint::new(self.a.x + dx, self.a.y),
            b: LiftPoint::new(self.b.x + dx, self.b.y),
        }
    }

    fn x_range(&self) -> (f64, f64) {
        (self.a.x.min(self.b.x), self.a.x.max(self.b.x))
    }
}

fn segments(trace: &ManifoldTrace) -> Vec<Seg> {
    [&trace.points, &trace.opposite]
        .into_iter()
        .flat_map(|pts| pts.windows(2))
        .map(|w| {
            let dx = -TAU * (w[0].x / TAU).floor();
            Seg { a: w[0], b: w[1] }.shifted(dx)
        })
        .collect()
}

fn cross(o: LiftPoint, a: LiftPoint, b: LiftPoint) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Proper crossing point of two segments, if any.
fn intersection(s: &Seg, t: &Seg) -> Option<LiftPoint> {
    let d1 = cross(t.a, t.b, s.a);
    let d2 = cross(t.a, t.b, s.b);
    let d3 = cross(s.a, s.b, t.a);
    let d4 = cross(s.a, s.b, t.b);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        let u = d1 / (d1 - d2);
        Some(LiftPoint::new(
            s.a.x + u * (s.b.x - s.a.x),
            s.a.y + u * (s.b.y - s.a.y),
        ))
    } else {
        None
    }
}

/// Distance on the cylinder, angle taken modulo `2 pi`.
fn cylinder_dist(p: LiftPoint, q: LiftPoint) -> f64 {
    let dx = (p.x - q.x).rem_euclid(TAU);
    dx.min(TAU - dx).hypot(p.y - q.y)
}

/// Transversal crossings of an unstable and a stable trace on the cylinder,
/// ignoring those within `exclude_radius` of the saddle itself.
pub fn homoclinic_crossings(
    unstable: &ManifoldTrace,
    stable: &ManifoldTrace,
    exclude_radius: f64,
) -> usize {
    let su = segments(unstable);
    let ss = segments(stable);
    if su.is_empty() || ss.is_empty() {
        return 0;
    }
    let width = su
        .iter()
        .chain(&ss)
        .map(|s| {
            let (lo, hi) = s.x_range();
            hi - lo
        })
        .fold(1e-3, f64::max);
    // bins cover [-2 pi, 4 pi); every segment starts in [0, 2 pi)
    let origin = -TAU;
    let nbins = ((3.0 * TAU / width).ceil() as usize).clamp(1, 1 << 16);
    let bin_w = 3.0 * TAU / nbins as f64;
    let bin_of = |x: f64| (((x - origin) / bin_w).floor().max(0.0) as usize).min(nbins - 1);
    let mut bins: Vec<Vec<Seg>> = vec![Vec::new(); nbins];
    for s in &ss {
        for k in [-1.0, 0.0, 1.0] {
            let t = s.shifted(k * TAU);
            let (lo, hi) = t.x_range();
            if hi < origin || lo >= origin + 3.0 * TAU {
                continue;
            }
            for b in bin_of(lo)..=bin_of(hi) {
                bins[b].push(t);
            }
        }
    }
    let saddle = unstable.saddle.point();
    let mut count = 0;
    for u in &su {
        let (lo, hi) = u.x_range();
        let (b0, b1) = (bin_of(lo), bin_of(hi));
        for b in b0..=b1 {
            for t in &bins[b] {
                // count a pair once: in the first bin both share
                let shared = bin_of(t.x_range().0).max(b0);
                if shared != b {
                    continue;
                }
                if let Some(q) = intersection(u, t) {
                    if cylinder_dist(q, saddle) > exclude_radius {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub omega: f64,
    /// `None` when no saddle exists at this frequency.
    pub crossings: Option<usize>,
    pub truncated: bool,
}

/// Crossing counts of the saddle's manifolds along a line of frequencies.
pub fn homoclinic_sweep(
    base: &Params,
    ell: u32,
    c: &MapConstants,
    omegas: &[f64],
    settings: &TraceSettings,
    exclude_radius: f64,
) -> Vec<SweepPoint> {
    omegas
        .par_iter()
        .map(|&omega| {
            let mu = Params { omega, ..*base };
            let traced = saddle_of(&mu, c, ell).and_then(|fp| {
                let u = manifold_trace(&fp, &mu, c, Side::Unstable, settings)?;
                let s = manifold_trace(&fp, &mu, c, Side::Stable, settings)?;
                Ok((homoclinic_crossings(&u, &s, exclude_radius), u.truncated || s.truncated))
            });
            match traced {
                Ok((n, truncated)) => SweepPoint {
                    omega,
                    crossings: Some(n),
                    truncated,
                },
                Err(_) => SweepPoint {
                    omega,
                    crossings: None,
                    truncated: false,
                },
            }
        })
        .collect()
}

/// Parameter interval across which the manifolds start or stop crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomoclinicBracket {
    pub lo: f64,
    pub hi: f64,
    pub crossings_lo: usize,
    pub crossings_hi: usize,
}

/// Adjacent sweep points where the crossing count switches between zero and
/// non-zero.
pub fn homoclinic_brackets(sweep: &[SweepPoint]) -> Vec<HomoclinicBracket> {
    sweep
        .windows(2)
        .filter_map(|w| match (w[0].crossings, w[1].crossings) {
            (Some(a), Some(b)) if (a == 0) != (b == 0) => Some(HomoclinicBracket {
                lo: w[0].omega,
                hi: w[1].omega,
                crossings_lo: a,
                crossings_hi: b,
            }),
            _ => None,
        })
        .collect()
}
