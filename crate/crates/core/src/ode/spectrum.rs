//! Benettin estimate of the full Lyapunov spectrum.

use serde::{Deserialize, Serialize};

use super::{Dopri5, Flow, OdeParams, State4, O1, O2};
use crate::error::{Error, Result};

/// State, four tangent vectors and the running divergence integral.
const AUG: usize = 4 + 16 + 1;

/// Distance from `O1`/`O2` counted as "near an equilibrium".
const NEAR_EQUILIBRIUM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSettings {
    pub t_final: f64,
    /// Time between Gram-Schmidt renormalisations.
    pub renorm_dt: f64,
    /// Time discarded before the tangent frame starts.
    pub transient: f64,
    pub tol: f64,
    /// Exponents within this distance of zero count as zero.
    pub threshold: f64,
}

impl SpectrumSettings {
    /// Renormalisation every 0.5, transient 10% of `t_final`, tolerance 1e-9.
    pub fn new(t_final: f64) -> Self {
        Self {
            t_final,
            renorm_dt: 0.5,
            transient: 0.1 * t_final,
            tol: 1e-9,
            threshold: crate::orbit::EXPONENT_THRESHOLD,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_final > self.transient && self.transient >= 0.0) {
            return Err(Error::EmptyWindow(format!(
                "t_final = {} must exceed transient = {} >= 0",
                self.t_final, self.transient
            )));
        }
        if !(self.renorm_dt > 0.0 && self.tol > 0.0 && self.threshold >= 0.0) {
            return Err(Error::InvalidParams(
                "renorm_dt and tol must be positive, threshold non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Sorted descending.
    pub exponents: [f64; 4],
    pub count_positive: usize,
    pub count_zero: usize,
    /// `count_positive + count_zero`.
    pub count_nonnegative: usize,
    pub t_final: f64,
    /// End of the measured window; below `t_final` after a failure.
    pub t_reached: f64,
    pub transient: f64,
    pub renorm_dt: f64,
    /// Time average of the divergence over the measured window.
    pub divergence_mean: f64,
    pub final_state: State4,
    /// Share of renormalisation instants spent within 0.1 of `O1` or `O2`.
    pub near_equilibrium_fraction: f64,
    /// `false` when integration failed and the exponents cover a partial window.
    pub complete: bool,
}

/// `(positive, zero)` counts under `threshold`.
pub fn classify_spectrum(exponents: &[f64], threshold: f64) -> (usize, usize) {
    let positive = exponents.iter().filter(|&&l| l > threshold).count();
    let zero = exponents.iter().filter(|&&l| l.abs() <= threshold).count();
    (positive, zero)
}

fn gram_schmidt(y: &mut [f64; AUG]) -> [f64; 4] {
    let mut logs = [0.0; 4];
    for k in 0..4 {
        let base = 4 + 4 * k;
        for m in 0..k {
            let other = 4 + 4 * m;
            let dot: f64 = (0..4).map(|i| y[base + i] * y[other + i]).sum();
            for i in 0..4 {
                y[base + i] -= dot * y[other + i];
            }
        }
        let norm = (0..4).map(|i| y[base + i].powi(2)).sum::<f64>().sqrt();
        for i in 0..4 {
            y[base + i] /= norm;
        }
        logs[k] = norm.ln();
    }
    logs
}

fn near_equilibrium(s: &[f64]) -> bool {
    [O1, O2].iter().any(|o| {
        (0..4).map(|i| (s[i] - o[i]).powi(2)).sum::<f64>().sqrt() < NEAR_EQUILIBRIUM
    })
}

/// Benettin spectrum for any [`Flow`].
pub fn lyapunov_spectrum_of<F: Flow>(flow: &F, s0: State4, set: &SpectrumSettings) -> Result<SpectrumResult> {
    set.validate()?;
    let state_rhs = |s: &State4| flow.field(s);
    let mut t = 0.0;
    let mut s = s0;
    Dopri5::new(set.tol).advance(&state_rhs, &mut t, &mut s, set.transient)?;

    let aug_rhs = |y: &[f64; AUG]| {
        let x: State4 = [y[0], y[1], y[2], y[3]];
        let f = flow.field(&x);
        let j = flow.jacobian(&x);
        let mut out = [0.0; AUG];
        out[..4].copy_from_slice(&f);
        for k in 0..4 {
            let v = &y[4 + 4 * k..8 + 4 * k];
            for i in 0..4 {
                out[4 + 4 * k + i] = j[i][0] * v[0] + j[i][1] * v[1] + j[i][2] * v[2] + j[i][3] * v[3];
            }
        }
        out[20] = j[0][0] + j[1][1] + j[2][2] + j[3][3];
        out
    };
    let mut y = [0.0; AUG];
    y[..4].copy_from_slice(&s);
    for k in 0..4 {
        y[4 + 5 * k] = 1.0;
    }

    let mut stepper = Dopri5::new(set.tol);
    let mut sums = [0.0; 4];
    let mut divergence = 0.0;
    let mut t_done = set.transient;
    let (mut samples, mut near) = (0usize, 0usize);
    let mut complete = true;
    let segments = ((set.t_final - set.transient) / set.renorm_dt).ceil() as usize;
    for seg in 1..=segments {
        let t_next = (set.transient + seg as f64 * set.renorm_dt).min(set.t_final);
        let mut trial = y;
        let mut tt = t_done;
        match stepper.advance(&aug_rhs, &mut tt, &mut trial, t_next) {
            Ok(()) => {}
            Err(e) if seg == 1 => return Err(e),
            Err(_) => {
                complete = false;
                break;
            }
        }
        let logs = gram_schmidt(&mut trial);
        if logs.iter().any(|l| !l.is_finite()) {
            if seg == 1 {
                return Err(Error::IntegrationFailed { t: tt, step: 0.0 });
            }
            complete = false;
            break;
        }
        for k in 0..4 {
            sums[k] += logs[k];
        }
        divergence += trial[20];
        trial[20] = 0.0;
        y = trial;
        t_done = t_next;
        samples += 1;
        if near_equilibrium(&y[..4]) {
            near += 1;
        }
    }
    let span = t_done - set.transient;
    let mut exponents = sums.map(|v| v / span);
    exponents.sort_by(|a, b| b.total_cmp(a));
    let (count_positive, count_zero) = classify_spectrum(&exponents, set.threshold);
    Ok(SpectrumResult {
        exponents,
        count_positive,
        count_zero,
        count_nonnegative: count_positive + count_zero,
        t_final: set.t_final,
        t_reached: t_done,
        transient: set.transient,
        renorm_dt: set.renorm_dt,
        divergence_mean: divergence / span,
        final_state: [y[0], y[1], y[2], y[3]],
        near_equilibrium_fraction: near as f64 / samples as f64,
        complete,
    })
}

/// Benettin spectrum of the vector field.
pub fn lyapunov_spectrum(s0: State4, p: &OdeParams, set: &SpectrumSettings) -> Result<SpectrumResult> {
    lyapunov_spectrum_of(p, s0, set)
}
