//! One function per subcommand. Each returns the artifact text.

use anyhow::{bail, Context, Result};
use serde_json::json;

use bykov::ode::{self, OdeParams, OdeScanSpec, SpectrumSettings};
use bykov::orbit::{self, ClassifySettings, MapScanSpec, Side, TraceSettings};
use bykov::resonance::{self, SurfaceRegion};
use bykov::{derive_constants, Axis, LiftPoint, MapConstants, Params, SaddleValues};

use crate::args::{MapArgs, OdeArgs, PointArgs, Range, RangeArgs, Resolution, SpectrumArgs};
use crate::output;
use crate::Invalid;

pub struct Artifact {
    pub text: String,
    /// Grid CSVs may not go to stdout.
    pub needs_file: bool,
    pub warnings: Vec<String>,
}

impl Artifact {
    fn json<T: serde::Serialize>(value: &T, warnings: Vec<String>) -> Self {
        Self {
            text: output::json(value),
            needs_file: false,
            warnings,
        }
    }
}

fn missing(command: &str, keys: &[(&str, bool)]) -> Result<()> {
    let absent: Vec<&str> = keys.iter().filter(|(_, ok)| !ok).map(|(k, _)| *k).collect();
    if absent.is_empty() {
        Ok(())
    } else {
        Err(Invalid(format!("{command} requires {}", absent.join(", "))).into())
    }
}

fn constants(map: &MapArgs) -> Result<MapConstants> {
    if map.ell == 0 {
        bail!(Invalid("--ell must be at least 1".into()));
    }
    Ok(MapConstants::from_delta_k(map.delta, map.k)?)
}

fn point(command: &str, p: &PointArgs) -> Result<Params> {
    missing(
        command,
        &[("--A", p.a.is_some()), ("--lambda", p.lambda.is_some()), ("--omega", p.omega.is_some())],
    )?;
    let mu = Params::new(p.a.unwrap(), p.lambda.unwrap(), p.omega.unwrap());
    if !(mu.omega > 0.0) {
        bail!(Invalid(format!("--omega must be positive, got {}", mu.omega)));
    }
    if !(mu.lambda >= 0.0) {
        bail!(Invalid(format!("--lambda must be non-negative, got {}", mu.lambda)));
    }
    Ok(mu)
}

/// Warnings for parameters outside the admissible set `0 <= lambda < A`, `A + lambda <= M`.
fn region_warnings(a_min: f64, a_max: f64, lambda_max: f64, c: &MapConstants) -> Vec<String> {
    let mut w = Vec::new();
    if lambda_max > a_min {
        w.push(format!(
            "outside 𝒱: lambda = {lambda_max} exceeds A = {a_min}, heteroclinic-tangle regime"
        ));
    }
    if a_max + lambda_max > c.m {
        w.push(format!(
            "outside 𝒱: A + lambda = {} exceeds M = {}",
            a_max + lambda_max,
            c.m
        ));
    }
    w
}

fn point_warnings(mu: &Params, c: &MapConstants) -> Vec<String> {
    region_warnings(mu.a, mu.a, mu.lambda, c)
}

#[allow(clippy::too_many_arguments)]
pub fn constants_cmd(
    map: &MapArgs,
    c1: Option<f64>,
    e1: Option<f64>,
    c2: Option<f64>,
    e2: Option<f64>,
    omega_spin: Option<f64>,
) -> Result<Artifact> {
    let given = [c1, e1, c2, e2, omega_spin];
    let (saddle, c) = if given.iter().all(Option::is_some) {
        let sv = SaddleValues::new(c1.unwrap(), e1.unwrap(), c2.unwrap(), e2.unwrap(), omega_spin.unwrap())?;
        (Some(sv), derive_constants(&sv)?)
    } else if given.iter().any(Option::is_some) {
        missing(
            "constants with saddle values",
            &[
                ("--c1", c1.is_some()),
                ("--e1", e1.is_some()),
                ("--c2", c2.is_some()),
                ("--e2", e2.is_some()),
                ("--omega-spin", omega_spin.is_some()),
            ],
        )?;
        unreachable!()
    } else {
        (None, constants(map)?)
    };
    let ell = map.ell.max(1);
    Ok(Artifact::json(
        &json!({
            "saddle_values": saddle,
            "constants": c,
            "ell": ell,
            "omega_star": resonance::omega_star(ell, &c),
        }),
        Vec::new(),
    ))
}

pub fn fixed_points_cmd(map: &MapArgs, p: &PointArgs) -> Result<Artifact> {
    let c = constants(map)?;
    let mu = point("fixed-points", p)?;
    let records = resonance::fixed_points(&mu, &c, map.ell)?;
    Ok(Artifact::json(
        &json!({
            "params": mu,
            "ell": map.ell,
            "g": resonance::g_ell(mu.omega, map.ell, &c)?,
            "membership": format!("{:?}", resonance::wedge_membership(&mu, map.ell, &c)?),
            "fixed_points": records,
        }),
        point_warnings(&mu, &c),
    ))
}

pub fn bt_cmd(map: &MapArgs, lambda: Option<f64>) -> Result<Artifact> {
    missing("bt", &[("--lambda", lambda.is_some())])?;
    let c = constants(map)?;
    let lambda = lambda.unwrap();
    let (p1, p2) = resonance::bt_points(lambda, map.ell, &c)?;
    let mut points = Vec::new();
    for bt in [p1, p2] {
        let q = bt.point(&c);
        let located = resonance::locate_bt(lambda, map.ell, &c, [q.x, q.y, bt.a, bt.omega]);
        let (a20, b11, b20) = resonance::table_coefficients(&bt, &c);
        points.push(json!({
            "point": bt,
            "x": q.x,
            "y": q.y,
            "closed_form_coefficients": { "a20": a20, "b11": b11, "b20": b20 },
            "located": located.as_ref().ok(),
            "locate_error": located.as_ref().err().map(|e| e.to_string()),
        }));
    }
    let mut warnings = Vec::new();
    if p1.outside_region {
        warnings.push(format!("lambda = {lambda} >= M: the lower BT point has A < 0"));
    }
    Ok(Artifact::json(
        &json!({ "lambda": lambda, "ell": map.ell, "points": points }),
        warnings,
    ))
}

fn ranges(command: &str, r: &RangeArgs) -> Result<(Range, Range, Range)> {
    missing(
        command,
        &[("--A", r.a.is_some()), ("--lambda", r.lambda.is_some()), ("--omega", r.omega.is_some())],
    )?;
    Ok((r.a.unwrap(), r.lambda.unwrap(), r.omega.unwrap()))
}

fn resolution(name: &str, g: &Resolution, n: usize) -> Result<Vec<usize>> {
    if g.0.len() != n {
        bail!(Invalid(format!("--grid for {name} needs {n} comma-separated resolutions")));
    }
    Ok(g.0.clone())
}

pub fn surfaces_cmd(map: &MapArgs, r: &RangeArgs, grid: &Resolution) -> Result<Artifact> {
    let c = constants(map)?;
    let (a, l, w) = ranges("surfaces", r)?;
    let g = resolution("surfaces", grid, 3)?;
    let region = SurfaceRegion {
        a: (a.min, a.max),
        lambda: (l.min, l.max),
        omega: (w.min, w.max),
    };
    let samples = resonance::sample_surfaces(&region, map.ell, &c, [g[0], g[1], g[2]])?;
    Ok(Artifact {
        text: output::surfaces_csv(&samples),
        needs_file: false,
        warnings: region_warnings(a.min, a.max, l.max, &c),
    })
}

pub fn wedge_cmd(map: &MapArgs, p: &PointArgs) -> Result<Artifact> {
    let c = constants(map)?;
    let mu = point("wedge", p)?;
    let g = resonance::g_ell(mu.omega, map.ell, &c)?;
    Ok(Artifact::json(
        &json!({
            "params": mu,
            "ell": map.ell,
            "g": g,
            "gap": (g - mu.a).abs() - mu.lambda,
            "membership": format!("{:?}", resonance::wedge_membership(&mu, map.ell, &c)?),
        }),
        point_warnings(&mu, &c),
    ))
}

pub fn iterate_cmd(
    map: &MapArgs,
    p: &PointArgs,
    x0: f64,
    y0: Option<f64>,
    n: usize,
    transient: usize,
) -> Result<Artifact> {
    let c = constants(map)?;
    let mu = point("iterate", p)?;
    let y0 = y0.unwrap_or_else(|| orbit::seed_height(mu.omega, map.ell, &c));
    let start = LiftPoint::new(x0, y0);
    let result = orbit::iterate(start, &mu, &c, n, transient)?;
    let rotation = orbit::rotation_number(start, &mu, &c, n).ok();
    let class = orbit::AttractorClass::from_exponents(result.exponents, orbit::EXPONENT_THRESHOLD);
    Ok(Artifact::json(
        &json!({
            "params": mu,
            "start": start,
            "n": n,
            "transient": transient,
            "orbit": result,
            "rotation_number": rotation,
            "class": matches!(result.outcome, orbit::Outcome::Escaped { .. })
                .then_some("Escaped")
                .unwrap_or(class.as_str()),
        }),
        point_warnings(&mu, &c),
    ))
}

#[allow(clippy::too_many_arguments)]
pub fn manifolds_cmd(
    map: &MapArgs,
    r: &RangeArgs,
    grid: &Resolution,
    steps: usize,
    step_cap: f64,
    exclude: f64,
) -> Result<Artifact> {
    let c = constants(map)?;
    let (a, l, w) = ranges("manifolds", r)?;
    if !(a.is_point() && l.is_point()) {
        bail!(Invalid("manifolds takes single values for --A and --lambda".into()));
    }
    if !(step_cap > 0.0) {
        bail!(Invalid("--step-cap must be positive".into()));
    }
    let settings = TraceSettings {
        steps,
        step_cap,
        ..TraceSettings::default()
    };
    let base = Params::new(a.min, l.min, w.min);
    let warnings = point_warnings(&base, &c);
    if w.is_point() {
        let fp = orbit::saddle_of(&base, &c, map.ell)?;
        let unstable = orbit::manifold_trace(&fp, &base, &c, Side::Unstable, &settings)?;
        let stable = orbit::manifold_trace(&fp, &base, &c, Side::Stable, &settings)?;
        let crossings = orbit::homoclinic_crossings(&unstable, &stable, exclude);
        return Ok(Artifact::json(
            &json!({
                "params": base,
                "saddle": fp,
                "crossings": crossings,
                "unstable": unstable,
                "stable": stable,
            }),
            warnings,
        ));
    }
    let n = resolution("manifolds", grid, 1)?[0].max(2);
    let omegas: Vec<f64> = Axis::new("omega", w.min, w.max, n)?.values().collect();
    let sweep = orbit::homoclinic_sweep(&base, map.ell, &c, &omegas, &settings, exclude);
    let brackets = orbit::homoclinic_brackets(&sweep);
    Ok(Artifact::json(
        &json!({ "A": a.min, "lambda": l.min, "sweep": sweep, "brackets": brackets }),
        warnings,
    ))
}

/// Picks the two swept parameters; rows follow the order omega, A, lambda.
fn swept_axes(a: Range, l: Range, w: Range, rows: usize, cols: usize) -> Result<(Axis, Axis, Params)> {
    let named = [("omega", w), ("A", a), ("lambda", l)];
    let swept: Vec<&(&str, Range)> = named.iter().filter(|(_, r)| !r.is_point()).collect();
    if swept.len() != 2 {
        bail!(Invalid(format!(
            "scan-map needs exactly two of --A, --lambda, --omega as min:max ranges, got {}",
            swept.len()
        )));
    }
    let row = Axis::new(swept[0].0, swept[0].1.min, swept[0].1.max, rows)?;
    let col = Axis::new(swept[1].0, swept[1].1.min, swept[1].1.max, cols)?;
    Ok((row, col, Params::new(a.min, l.min, w.min)))
}

#[allow(clippy::too_many_arguments)]
pub fn scan_map_cmd(
    map: &MapArgs,
    r: &RangeArgs,
    grid: &Resolution,
    n: usize,
    transient: usize,
    seeds: usize,
    threshold: f64,
    seed: Option<u64>,
) -> Result<Artifact> {
    let c = constants(map)?;
    let (a, l, w) = ranges("scan-map", r)?;
    let g = resolution("scan-map", grid, 2)?;
    let (rows, cols, base) = swept_axes(a, l, w, g[0], g[1])?;
    let spec = MapScanSpec {
        rows,
        cols,
        base,
        ell: map.ell,
        seeds_per_cell: seeds,
        seed,
        settings: ClassifySettings {
            n,
            transient,
            threshold,
        },
    };
    let grid = orbit::scan(&spec, &c)?;
    Ok(Artifact {
        text: output::map_grid_csv(&grid),
        needs_file: true,
        warnings: region_warnings(a.min, a.max, l.max, &c),
    })
}

fn spectrum_settings(s: &SpectrumArgs) -> Result<SpectrumSettings> {
    let mut set = SpectrumSettings::new(s.t_final);
    set.renorm_dt = s.renorm_dt;
    set.tol = s.tol;
    if let Some(t) = s.transient {
        set.transient = t;
    }
    if !(s.t_final > 0.0) {
        bail!(Invalid("--t-final must be positive".into()));
    }
    Ok(set)
}

pub fn ode_spectrum_cmd(o: &OdeArgs, tau1: f64, tau2: f64, s: &SpectrumArgs) -> Result<Artifact> {
    let p = OdeParams::new(o.alpha, o.beta, o.omega, tau1, tau2)?;
    let set = spectrum_settings(s)?;
    let r = ode::lyapunov_spectrum(s.x0.0, &p, &set)?;
    Ok(Artifact::json(
        &json!({ "params": p, "initial": s.x0.0, "settings": set, "spectrum": r }),
        Vec::new(),
    ))
}

pub fn ode_scan_cmd(
    o: &OdeArgs,
    tau1: Option<Range>,
    tau2: Option<Range>,
    grid: &Resolution,
    s: &SpectrumArgs,
) -> Result<Artifact> {
    missing("ode-scan", &[("--tau1", tau1.is_some()), ("--tau2", tau2.is_some())])?;
    let (t1, t2) = (tau1.unwrap(), tau2.unwrap());
    for (name, r) in [("--tau1", t1), ("--tau2", t2)] {
        if r.min < 0.0 || r.max > 1.0 {
            bail!(Invalid(format!("{name} must lie in [0, 1], got {r}")));
        }
    }
    let g = resolution("ode-scan", grid, 2)?;
    OdeParams::new(o.alpha, o.beta, o.omega, 0.0, 0.0)?;
    let spec = OdeScanSpec {
        tau1: Axis::new("tau1", t1.min, t1.max, g[0])?,
        tau2: Axis::new("tau2", t2.min, t2.max, g[1])?,
        alpha: o.alpha,
        beta: o.beta,
        omega: o.omega,
        initial: s.x0.0,
        settings: spectrum_settings(s)?,
    };
    let grid = ode::ode_scan(&spec)?;
    Ok(Artifact {
        text: output::ode_grid_csv(&grid),
        needs_file: true,
        warnings: Vec::new(),
    })
}

pub fn ode_check_cmd(o: &OdeArgs, tau1: f64, tau2: f64) -> Result<Artifact> {
    let p = OdeParams::new(o.alpha, o.beta, o.omega, tau1, tau2)?;
    let chk = ode::equilibria_check(&p);
    let mut warnings = Vec::new();
    if tau1 != 0.0 {
        warnings.push(format!(
            "tau1 = {tau1}: O1 and O2 are not equilibria of the field (|f(O1)| = {})",
            chk.o1.residual
        ));
    }
    Ok(Artifact::json(&json!({ "params": p, "check": chk }), warnings))
}

pub fn gnuplot_hint(command: &str) -> Option<&'static str> {
    Some(match command {
        "surfaces" => concat!(
            "set datafile separator ','\n",
            "splot for [L in 'SN1 SN2 HOPF PD NF'] '< grep ^'.L.', OUT' using 2:4:3 title L with points pt 7 ps 0.3"
        ),
        "scan-map" => concat!(
            "set datafile separator ','\n",
            "class(s) = s eq 'PeriodicSink' ? 0 : s eq 'InvariantCircle' ? 1 : s eq 'Chaotic' ? 2 : 3\n",
            "plot OUT every ::1 using 3:4:(class(strcol(5))) with image"
        ),
        "ode-scan" => concat!(
            "set datafile separator ','\n",
            "plot OUT every ::1 using 3:4:5 with image"
        ),
        "manifolds" => "plot '< jq -r \".unstable.points[] | \\\"\\\\(.x) \\\\(.y)\\\"\" OUT' with lines",
        _ => return None,
    })
}

pub fn write_out(path: &std::path::Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
