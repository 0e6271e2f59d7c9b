//! Orbits of the return map in the lift.
//!
//! Lyapunov exponents are per iterate and use the natural logarithm. The
//! tangent frame is re-orthonormalised after every iterate.

mod manifold;
mod scan;

use std::f64::consts::TAU;

use rand::{rngs::StdRng, Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::constants::MapConstants;
use crate::error::{Error, Result};
use crate::map::{return_map, step_with_jacobian, Jacobian2, LiftPoint, Params};

pub use manifold::{
    homoclinic_brackets, homoclinic_crossings, homoclinic_sweep, manifold_trace, saddle_of,
    HomoclinicBracket, ManifoldTrace, Side, SweepPoint, TraceSettings,
};
pub use scan::{scan, MapCell, MapScanSpec};

/// Default threshold separating zero from non-zero exponents.
pub const EXPONENT_THRESHOLD: f64 = 5e-4;

/// Tolerance for declaring an orbit settled on a `(1, l)`-fixed point.
const CONVERGED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// The last step repeats the point up to a whole number of turns.
    Converged,
    Bounded,
    /// `iteration` is the index of the first iterate outside the domain.
    Escaped { iteration: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitResult {
    /// Last point reached (the last admissible one after an escape).
    pub final_point: LiftPoint,
    /// Mean lift displacement of `x` per iterate over the measurement window.
    pub displacement: f64,
    /// Sorted descending. NaN when the window is empty because of an escape.
    pub exponents: [f64; 2],
    pub outcome: Outcome,
    /// Iterates that entered the exponent average.
    pub window: usize,
}

/// Pushes the frame `(q1, q2)` through `j` and re-orthonormalises it.
/// Returns the two log stretches.
#[inline]
fn qr_step(j: &Jacobian2, q: &mut [[f64; 2]; 2]) -> [f64; 2] {
    let w1 = j.apply(q[0]);
    let mut w2 = j.apply(q[1]);
    let r1 = w1[0].hypot(w1[1]);
    let u1 = [w1[0] / r1, w1[1] / r1];
    let proj = w2[0] * u1[0] + w2[1] * u1[1];
    w2[0] -= proj * u1[0];
    w2[1] -= proj * u1[1];
    let r2 = w2[0].hypot(w2[1]);
    q[0] = u1;
    q[1] = [w2[0] / r2, w2[1] / r2];
    [r1.ln(), r2.ln()]
}

fn sorted_desc(a: f64, b: f64) -> [f64; 2] {
    if b > a {
        [b, a]
    } else {
        [a, b]
    }
}

fn settled(prev: LiftPoint, next: LiftPoint) -> bool {
    let dx = next.x - prev.x;
    let turns = (dx / TAU).round();
    (dx - turns * TAU).abs() < CONVERGED_TOL && (next.y - prev.y).abs() < CONVERGED_TOL
}

/// Applies the return map `n` times, measuring exponents and displacement
/// over iterates `transient..n`.
pub fn iterate(
    p0: LiftPoint,
    mu: &Params,
    c: &MapConstants,
    n: usize,
    transient: usize,
) -> Result<OrbitResult> {
    if n <= transient {
        return Err(Error::EmptyWindow(format!(
            "n = {n} must exceed transient = {transient}"
        )));
    }
    let (mut p, mut prev, mut start) = (p0, p0, p0);
    let mut frame = [[1.0, 0.0], [0.0, 1.0]];
    let mut sums = [0.0, 0.0];
    let mut window = 0usize;
    let mut outcome = Outcome::Bounded;
    for k in 0..n {
        let (q, j) = match step_with_jacobian(p, mu, c) {
            Ok(step) => step,
            Err(e) if k == 0 => return Err(e),
            Err(_) => {
                outcome = Outcome::Escaped { iteration: k };
                break;
            }
        };
        if k >= transient {
            if k == transient {
                start = p;
            }
            let l = qr_step(&j, &mut frame);
            sums[0] += l[0];
            sums[1] += l[1];
            window += 1;
        }
        prev = p;
        p = q;
    }
    if outcome == Outcome::Bounded && settled(prev, p) {
        outcome = Outcome::Converged;
    }
    if window == 0 {
        return Ok(OrbitResult {
            final_point: p,
            displacement: f64::NAN,
            exponents: [f64::NAN; 2],
            outcome,
            window,
        });
    }
    let m = window as f64;
    Ok(OrbitResult {
        final_point: p,
        displacement: (p.x - start.x) / m,
        exponents: sorted_desc(sums[0] / m, sums[1] / m),
        outcome,
        window,
    })
}

/// `(x_n - x_0) / (2 pi n)` in the lift.
pub fn rotation_number(p0: LiftPoint, mu: &Params, c: &MapConstants, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyWindow("rotation number needs n >= 1".into()));
    }
    let mut p = p0;
    for k in 0..n {
        p = return_map(p, mu, c).map_err(|_| Error::Escaped { iteration: k })?;
    }
    Ok((p.x - p0.x) / (TAU * n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttractorClass {
    PeriodicSink,
    InvariantCircle,
    Chaotic,
    /// Both exponents within the threshold of zero.
    Indeterminate,
    Escaped,
}

impl AttractorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            AttractorClass::PeriodicSink => "PeriodicSink",
            AttractorClass::InvariantCircle => "InvariantCircle",
            AttractorClass::Chaotic => "Chaotic",
            AttractorClass::Indeterminate => "Indeterminate",
            AttractorClass::Escaped => "Escaped",
        }
    }

    /// Class of a single orbit from its sorted exponents.
    pub fn from_exponents(exponents: [f64; 2], threshold: f64) -> Self {
        let [l1, l2] = exponents;
        if l1 > threshold {
            AttractorClass::Chaotic
        } else if l1 < -threshold {
            AttractorClass::PeriodicSink
        } else if l2 < -threshold {
            AttractorClass::InvariantCircle
        } else {
            AttractorClass::Indeterminate
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifySettings {
    pub n: usize,
    pub transient: usize,
    pub threshold: f64,
}

impl Default for ClassifySettings {
    fn default() -> Self {
        Self {
            n: 4000,
            transient: 1000,
            threshold: EXPONENT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorReport {
    pub class: AttractorClass,
    /// Exponents of the first surviving seed of the winning class.
    pub exponents: [f64; 2],
    /// Rotation number of that seed over the measurement window.
    pub rotation: f64,
    /// Surviving seeds per class, in the order of [`AttractorClass`].
    pub votes: [usize; 4],
    pub escaped_seeds: usize,
}

/// Majority vote over the seeds that survive. Ties go to the class listed
/// first in [`AttractorClass`]. An empty seed list counts as escaped.
pub fn classify_attractor(
    mu: &Params,
    c: &MapConstants,
    seeds: &[LiftPoint],
    settings: &ClassifySettings,
) -> AttractorReport {
    let mut votes = [0usize; 4];
    let mut first: [Option<OrbitResult>; 4] = [None; 4];
    let mut escaped_seeds = 0;
    for &seed in seeds {
        let orbit = match iterate(seed, mu, c, settings.n, settings.transient) {
            Ok(o) if !matches!(o.outcome, Outcome::Escaped { .. }) => o,
            _ => {
                escaped_seeds += 1;
                continue;
            }
        };
        let class = AttractorClass::from_exponents(orbit.exponents, settings.threshold);
        let slot = class as usize;
        votes[slot] += 1;
        first[slot].get_or_insert(orbit);
    }
    let winner = (0..4).fold(None, |best: Option<usize>, k| match best {
        _ if votes[k] == 0 => best,
        Some(b) if votes[b] >= votes[k] => best,
        _ => Some(k),
    });
    match winner {
        Some(k) => {
            let orbit = first[k].expect("winning class has an orbit");
            AttractorReport {
                class: CLASSES[k],
                exponents: orbit.exponents,
                rotation: orbit.displacement / TAU,
                votes,
                escaped_seeds,
            }
        }
        None => AttractorReport {
            class: AttractorClass::Escaped,
            exponents: [f64::NAN; 2],
            rotation: f64::NAN,
            votes,
            escaped_seeds,
        },
    }
}

const CLASSES: [AttractorClass; 4] = [
    AttractorClass::PeriodicSink,
    AttractorClass::InvariantCircle,
    AttractorClass::Chaotic,
    AttractorClass::Indeterminate,
];

/// Height `exp(-2 l pi delta / (K w))` of the default seed line.
pub fn seed_height(omega: f64, ell: u32, c: &MapConstants) -> f64 {
    (-TAU * ell as f64 * c.delta / (c.k * omega)).exp()
}

/// `count` points equally spaced in `x` on the default seed line.
pub fn default_seeds(mu: &Params, c: &MapConstants, ell: u32, count: usize) -> Vec<LiftPoint> {
    let y = seed_height(mu.omega, ell, c);
    (0..count)
        .map(|k| LiftPoint::new(TAU * k as f64 / count as f64, y))
        .collect()
}

/// Like [`default_seeds`] but each angle is shifted by a uniform fraction of
/// the spacing drawn from `rng`.
pub fn jittered_seeds<R: Rng>(
    mu: &Params,
    c: &MapConstants,
    ell: u32,
    count: usize,
    rng: &mut R,
) -> Vec<LiftPoint> {
    let y = seed_height(mu.omega, ell, c);
    (0..count)
        .map(|k| {
            let u: f64 = rng.gen();
            LiftPoint::new(TAU * (k as f64 + u) / count as f64, y)
        })
        .collect()
}

/// Deterministic per-cell generator derived from a base seed and a cell index.
pub fn cell_rng(seed: u64, index: u64) -> StdRng {
    StdRng::seed_from_u64(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::{fixed_points, g_ell, FixedPointClass};
    use proptest::prelude::*;

    fn k1() -> MapConstants {
        MapConstants::from_delta_k(3.0, 1.0).unwrap()
    }

    fn mu0() -> Params {
        Params::new(0.35, 0.05, 8.0)
    }

    fn sink(mu: &Params, c: &MapConstants) -> LiftPoint {
        fixed_points(mu, c, 1)
            .unwrap()
            .into_iter()
            .find(|r| r.class.is_sink())
            .unwrap()
            .point()
    }

    #[test]
    fn focus_orbit_converges_with_half_log_det() {
        let c = k1();
        let mu = mu0();
        let r = iterate(sink(&mu, &c), &mu, &c, 2_000_000, 0).unwrap();
        assert_eq!(r.outcome, Outcome::Converged);
        assert!((r.displacement - TAU).abs() < 1e-9);
        let expect = 0.5 * 0.623_638_729_f64.ln();
        assert!((expect + 0.236_092_019).abs() < 1e-8);
        for e in r.exponents {
            assert!((e - expect).abs() < 1e-6, "{:?}", r.exponents);
        }
    }

    #[test]
    fn node_exponents_are_log_eigenvalues() {
        let c = k1();
        // close to the saddle-node surface the sink is a node
        let g = g_ell(8.0, 1, &c).unwrap();
        let mu = Params::new(g - 0.05 * 0.999, 0.05, 8.0);
        let rec = fixed_points(&mu, &c, 1)
            .unwrap()
            .into_iter()
            .find(|r| r.class == FixedPointClass::SinkNode)
            .expect("node");
        let r = iterate(rec.point(), &mu, &c, 2_000_000, 0).unwrap();
        let (m1, m2) = rec.eigenvalues.moduli();
        assert!((r.exponents[0] - m1.ln()).abs() < 1e-6, "{:?} {m1}", r.exponents);
        assert!((r.exponents[1] - m2.ln()).abs() < 1e-6, "{:?} {m2}", r.exponents);
    }

    #[test]
    fn empty_window_is_an_error() {
        let c = k1();
        let mu = mu0();
        let p = sink(&mu, &c);
        assert!(matches!(iterate(p, &mu, &c, 100, 100), Err(Error::EmptyWindow(_))));
        assert!(rotation_number(p, &mu, &c, 0).is_err());
    }

    #[test]
    fn immediate_domain_violation_is_an_error() {
        let c = k1();
        let mu = mu0();
        let p = LiftPoint::new(0.0, -0.5);
        assert!(matches!(iterate(p, &mu, &c, 10, 0), Err(Error::LeftDomain { .. })));
    }

    #[test]
    fn rigid_case_collapses_then_escapes() {
        let c = k1();
        let mu = Params::new(0.0, 0.0, 8.0);
        let y0: f64 = 0.9;
        let mut p = LiftPoint::new(0.3, y0);
        for k in 1..4 {
            p = return_map(p, &mu, &c).unwrap();
            assert!((p.y - y0.powf(3f64.powi(k))).abs() < 1e-15);
        }
        let r = iterate(LiftPoint::new(0.3, y0), &mu, &c, 1000, 0).unwrap();
        match r.outcome {
            Outcome::Escaped { iteration } => assert!(iteration > 1 && iteration < 20),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rotation_number_at_fixed_point_is_ell() {
        let c = k1();
        let mu = mu0();
        let rho = rotation_number(sink(&mu, &c), &mu, &c, 500).unwrap();
        assert!((rho - 1.0).abs() < 1e-12);
        let c2 = MapConstants::from_delta_k(3.0, 1.0).unwrap();
        let mu2 = Params::new(0.35, 0.05, 16.0);
        if let Some(r) = fixed_points(&mu2, &c2, 2).unwrap().first() {
            let rho2 = rotation_number(r.point(), &mu2, &c2, 3).unwrap();
            assert!((rho2 - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn random_seeds_lock_to_one() {
        let c = k1();
        let mu = mu0();
        let mut rng = cell_rng(7, 0);
        let n = 2000;
        for p in jittered_seeds(&mu, &c, 1, 16, &mut rng) {
            let orbit = iterate(p, &mu, &c, n, 0).unwrap();
            if orbit.outcome != Outcome::Converged {
                continue;
            }
            let rho = rotation_number(p, &mu, &c, n).unwrap();
            assert!((rho - 1.0).abs() < 1.0 / n as f64, "{rho}");
        }
    }

    #[test]
    fn classification_examples() {
        let c = k1();
        let set = ClassifySettings::default();
        let mu = mu0();
        let rep = classify_attractor(&mu, &c, &default_seeds(&mu, &c, 1, 8), &set);
        assert_eq!(rep.class, AttractorClass::PeriodicSink);
        assert!((rep.rotation - 1.0).abs() < 1e-9);

        // lambda = 0 with G(w) = A: a circle of (1,1)-fixed points
        let a = 0.35;
        let w = crate::resonance::g_level_omegas(a, 1, &c).unwrap().0;
        assert!((g_ell(w, 1, &c).unwrap() - a).abs() < 1e-13);
        let mu = Params::new(a, 0.0, w);
        let rep = classify_attractor(&mu, &c, &default_seeds(&mu, &c, 1, 8), &set);
        assert_eq!(rep.class, AttractorClass::InvariantCircle, "{rep:?}");

        let bad = [LiftPoint::new(0.0, -0.9), LiftPoint::new(1.0, -0.95)];
        let rep = classify_attractor(&mu0(), &c, &bad, &set);
        assert_eq!(rep.class, AttractorClass::Escaped);
        assert_eq!(rep.escaped_seeds, 2);
    }

    #[test]
    fn vote_prefers_sink_on_ties() {
        assert!(AttractorClass::PeriodicSink < AttractorClass::InvariantCircle);
        assert_eq!(
            AttractorClass::from_exponents([1e-3, -0.1], EXPONENT_THRESHOLD),
            AttractorClass::Chaotic
        );
        assert_eq!(
            AttractorClass::from_exponents([1e-4, 1e-4], EXPONENT_THRESHOLD),
            AttractorClass::Indeterminate
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exponent_sum_is_mean_log_det(
            a in 0.2f64..0.35,
            lambda in 0.0f64..0.1,
            omega in 1.0f64..12.0,
            x0 in 0.0f64..TAU,
        ) {
            let c = k1();
            let mu = Params::new(a, lambda, omega);
            let mut p = LiftPoint::new(x0, seed_height(omega, 1, &c));
            let (n, transient) = (400, 100);
            let Ok(r) = iterate(p, &mu, &c, n, transient) else { return Ok(()) };
            prop_assume!(!matches!(r.outcome, Outcome::Escaped { .. }));
            let mut acc = 0.0;
            for k in 0..n {
                if k >= transient {
                    acc += crate::map::det_from_s(mu.s(p), &c).ln();
                }
                p = return_map(p, &mu, &c).unwrap();
            }
            let mean = acc / (n - transient) as f64;
            let sum = r.exponents[0] + r.exponents[1];
            prop_assert!((sum - mean).abs() < 1e-8, "{} vs {}", sum, mean);
            prop_assert!(r.exponents[0] >= r.exponents[1]);
        }
    }
}
