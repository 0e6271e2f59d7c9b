//! Dormand-Prince 5(4) with adaptive step size.

use super::{vector_field, OdeParams, State4};
use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth- minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (h, k) in terms {
        for i in 0..N {
            out[i] += h * k[i];
        }
    }
    out
}

/// One trial step: the fifth-order solution, its derivative there, and the
/// error estimate.
#[inline]
fn trial<const N: usize, F>(f: &F, y: &[f64; N], k1: &[f64; N], h: f64) -> ([f64; N], [f64; N], [f64; N])
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k2 = f(&axpy(y, &[(h * A21, k1)]));
    let k3 = f(&axpy(y, &[(h * A31, k1), (h * A32, &k2)]));
    let k4 = f(&axpy(y, &[(h * A41, k1), (h * A42, &k2), (h * A43, &k3)]));
    let k5 = f(&axpy(
        y,
        &[(h * A51, k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)],
    ));
    let k6 = f(&axpy(
        y,
        &[(h * A61, k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)],
    ));
    let next = axpy(
        y,
        &[(h * B1, k1), (h * B3, &k3), (h * B4, &k4), (h * B5, &k5), (h * B6, &k6)],
    );
    let k7 = f(&next);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (next, k7, err)
}

/// Adaptive stepper for autonomous systems `y' = f(y)`. Keeps the last
/// accepted step size between calls.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    /// Step size to try next; `None` picks one automatically.
    pub h: Option<f64>,
    pub accepted: u64,
    pub rejected: u64,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h: None,
            accepted: 0,
            rejected: 0,
        }
    }

    fn err_norm<const N: usize>(&self, y: &[f64; N], next: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs().max(next[i].abs());
            acc += (err[i] / sc).powi(2);
        }
        (acc / N as f64).sqrt()
    }

    fn initial_step<const N: usize, F>(&self, f: &F, y: &[f64; N], k1: &[f64; N], span: f64) -> f64
    where
        F: Fn(&[f64; N]) -> [f64; N],
    {
        let scale = |i: usize| self.atol + self.rtol * y[i].abs();
        let rms = |v: &dyn Fn(usize) -> f64| ((0..N).map(|i| v(i).powi(2)).sum::<f64>() / N as f64).sqrt();
        let d0 = rms(&|i| y[i] / scale(i));
        let d1 = rms(&|i| k1[i] / scale(i));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1 = axpy(y, &[(h0, k1)]);
        let k2 = f(&y1);
        let d2 = rms(&|i| (k2[i] - k1[i]) / scale(i)) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// Advances `(t, y)` to exactly `t_end`.
    pub fn advance<const N: usize, F>(&mut self, f: &F, t: &mut f64, y: &mut [f64; N], t_end: f64) -> Result<()>
    where
        F: Fn(&[f64; N]) -> [f64; N],
    {
        self.advance_with(f, t, y, t_end, |_, _| {})
    }

    /// As [`Dopri5::advance`], calling `observe(t, y)` after every accepted step.
    pub fn advance_with<const N: usize, F, O>(
        &mut self,
        f: &F,
        t: &mut f64,
        y: &mut [f64; N],
        t_end: f64,
        mut observe: O,
    ) -> Result<()>
    where
        F: Fn(&[f64; N]) -> [f64; N],
        O: FnMut(f64, &[f64; N]),
    {
        if t_end <= *t {
            return Ok(());
        }
        let mut k1 = f(y);
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(f, y, &k1, t_end - *t),
        };
        loop {
            let remaining = t_end - *t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(Error::IntegrationFailed { t: *t, step });
            }
            let (next, k7, err) = trial(f, y, &k1, step);
            let en = self.err_norm(y, &next, &err);
            if en <= 1.0 && next.iter().all(|v| v.is_finite()) {
                self.accepted += 1;
                *t = if last { t_end } else { *t + step };
                *y = next;
                k1 = k7;
                observe(*t, y);
                let factor = if en == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // a clipped final step says nothing about the next one
                if !last || step == h {
                    h = step * factor;
                }
                if last {
                    self.h = Some(h);
                    return Ok(());
                }
            } else {
                self.rejected += 1;
                let factor = if en.is_finite() {
                    (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                h = step * factor;
            }
        }
    }

    /// Fixed step size, no error control. The last step is shortened to hit `t_end`.
    pub fn fixed<const N: usize, F>(f: &F, y0: [f64; N], t_end: f64, h: f64) -> [f64; N]
    where
        F: Fn(&[f64; N]) -> [f64; N],
    {
        let (mut t, mut y) = (0.0, y0);
        while t < t_end {
            let step = h.min(t_end - t);
            let k1 = f(&y);
            y = trial(f, &y, &k1, step).0;
            t += step;
        }
        y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State4>,
}

impl Trajectory {
    pub fn last(&self) -> State4 {
        *self.states.last().expect("trajectory has the initial state")
    }
}

/// Integrates the vector field to `t_final`, recording every accepted step.
pub fn integrate(s0: State4, p: &OdeParams, t_final: f64, tol: f64) -> Result<Trajectory> {
    if !(t_final > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "t_final ({t_final}) and tol ({tol}) must be positive"
        )));
    }
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![s0],
    };
    let (mut t, mut y) = (0.0, s0);
    let f = |s: &State4| vector_field(s, p);
    Dopri5::new(tol).advance_with(&f, &mut t, &mut y, t_final, |t, y| {
        traj.times.push(t);
        traj.states.push(*y);
    })?;
    Ok(traj)
}

/// Fixed-step Dormand-Prince, for convergence studies.
pub fn integrate_fixed(s0: State4, p: &OdeParams, t_final: f64, h: f64) -> State4 {
    Dopri5::fixed(&|s: &State4| vector_field(s, p), s0, t_final, h)
}
