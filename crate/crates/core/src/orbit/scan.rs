//! Two-parameter scans of the attractor class.

use serde::{Deserialize, Serialize};

use super::{
    cell_rng, classify_attractor, default_seeds, jittered_seeds, AttractorClass, ClassifySettings,
};
use crate::constants::MapConstants;
use crate::error::{Error, Result};
use crate::grid::{Axis, ScanGrid};
use crate::map::Params;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapScanSpec {
    /// Named `A`, `lambda` or `omega`.
    pub rows: Axis,
    pub cols: Axis,
    /// Values of the parameter that is not swept (the swept ones are ignored).
    pub base: Params,
    /// Rotation used to place the seed line.
    pub ell: u32,
    pub seeds_per_cell: usize,
    /// `None` uses equally spaced seeds, otherwise jittered ones.
    pub seed: Option<u64>,
    pub settings: ClassifySettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    /// `None` when the cell failed; see `error`.
    pub class: Option<AttractorClass>,
    pub exponents: [f64; 2],
    pub rotation: f64,
    pub escaped_seeds: usize,
    pub error: Option<String>,
}

fn set_param(mu: &mut Params, name: &str, value: f64) -> Result<()> {
    match name {
        "A" | "a" => mu.a = value,
        "lambda" => mu.lambda = value,
        "omega" => mu.omega = value,
        other => {
            return Err(Error::InvalidParams(format!(
                "unknown scan axis {other:?}; expected A, lambda or omega"
            )))
        }
    }
    Ok(())
}

fn cell(spec: &MapScanSpec, c: &MapConstants, index: u64, rv: f64, cv: f64) -> MapCell {
    let mut mu = spec.base;
    set_param(&mut mu, &spec.rows.name, rv).expect("validated axis");
    set_param(&mut mu, &spec.cols.name, cv).expect("validated axis");
    let failed = |msg: String| MapCell {
        class: None,
        exponents: [f64::NAN; 2],
        rotation: f64::NAN,
        escaped_seeds: 0,
        error: Some(msg),
    };
    if !(mu.omega > 0.0) {
        return failed(Error::NonPositiveOmega { omega: mu.omega }.to_string());
    }
    if !(mu.lambda >= 0.0) {
        return failed(format!("lambda must be non-negative, got {}", mu.lambda));
    }
    let seeds = match spec.seed {
        None => default_seeds(&mu, c, spec.ell, spec.seeds_per_cell),
        Some(s) => jittered_seeds(&mu, c, spec.ell, spec.seeds_per_cell, &mut cell_rng(s, index)),
    };
    let rep = classify_attractor(&mu, c, &seeds, &spec.settings);
    MapCell {
        class: Some(rep.class),
        exponents: rep.exponents,
        rotation: rep.rotation,
        escaped_seeds: rep.escaped_seeds,
        error: None,
    }
}

/// Classifies every node of the grid in parallel. Cells depend only on their
/// own parameters and seeds, so the result does not depend on the thread count.
pub fn scan(spec: &MapScanSpec, c: &MapConstants) -> Result<ScanGrid<MapCell>> {
    spec.rows.validate()?;
    spec.cols.validate()?;
    let mut probe = spec.base;
    set_param(&mut probe, &spec.rows.name, 0.0)?;
    set_param(&mut probe, &spec.cols.name, 0.0)?;
    if spec.rows.name == spec.cols.name {
        return Err(Error::InvalidParams("scan axes must differ".into()));
    }
    if spec.seeds_per_cell == 0 {
        return Err(Error::InvalidParams("at least one seed per cell".into()));
    }
    if spec.settings.n <= spec.settings.transient {
        return Err(Error::EmptyWindow(format!(
            "n = {} must exceed transient = {}",
            spec.settings.n, spec.settings.transient
        )));
    }
    Ok(ScanGrid::fill_indexed(
        spec.rows.clone(),
        spec.cols.clone(),
        |k, rv, cv| cell(spec, c, k as u64, rv, cv),
    ))
}
