//! Scans of the spectrum over the `(tau1, tau2)` square.

use serde::{Deserialize, Serialize};

use super::{lyapunov_spectrum, OdeParams, SpectrumSettings, State4};
use crate::error::Result;
use crate::grid::{Axis, ScanGrid};

pub const DEFAULT_INITIAL_STATE: State4 = [0.1, 0.1, 0.0, -0.99];
pub const NEAR_NETWORK_FLAG: &str = "near-network, slow convergence";

/// Share of renormalisation instants near `O1`/`O2` above which a cell is
/// flagged as creeping along the network.
const NEAR_NETWORK_SHARE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeScanSpec {
    /// Rows sweep `tau1`.
    pub tau1: Axis,
    /// Columns sweep `tau2`.
    pub tau2: Axis,
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub initial: State4,
    pub settings: SpectrumSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeCell {
    /// Number of non-negative exponents; `None` when the cell failed.
    pub class: Option<usize>,
    pub exponents: [f64; 4],
    pub divergence_mean: f64,
    pub flags: Vec<String>,
    pub error: Option<String>,
}

fn cell(spec: &OdeScanSpec, tau1: f64, tau2: f64) -> OdeCell {
    let failed = |msg: String| OdeCell {
        class: None,
        exponents: [f64::NAN; 4],
        divergence_mean: f64::NAN,
        flags: Vec::new(),
        error: Some(msg),
    };
    let p = match OdeParams::new(spec.alpha, spec.beta, spec.omega, tau1, tau2) {
        Ok(p) => p,
        Err(e) => return failed(e.to_string()),
    };
    match lyapunov_spectrum(spec.initial, &p, &spec.settings) {
        Ok(r) => {
            let mut flags = Vec::new();
            if !r.complete {
                flags.push(format!("partial window to t = {}", r.t_reached));
            }
            if r.near_equilibrium_fraction >= NEAR_NETWORK_SHARE {
                flags.push(NEAR_NETWORK_FLAG.to_string());
            }
            OdeCell {
                class: Some(r.count_nonnegative),
                exponents: r.exponents,
                divergence_mean: r.divergence_mean,
                flags,
                error: None,
            }
        }
        Err(e) => failed(e.to_string()),
    }
}

/// Fills the `(tau1, tau2)` grid in parallel, row-major.
pub fn ode_scan(spec: &OdeScanSpec) -> Result<ScanGrid<OdeCell>> {
    spec.tau1.validate()?;
    spec.tau2.validate()?;
    OdeParams::new(spec.alpha, spec.beta, spec.omega, 0.0, 0.0)?;
    Ok(ScanGrid::fill(spec.tau1.clone(), spec.tau2.clone(), |t1, t2| cell(spec, t1, t2)))
}
