//! Command-line front end: argument parsing, configuration files and output.

// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod output;

use std::io::Write;

use anyhow::Result;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use commands::Artifact;

/// A violated input constraint; reported with kind `validation`.
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn error_kind(e: &anyhow::Error) -> &'static str {
    if e.downcast_ref::<Invalid>().is_some() {
        return "validation";
    }
    if let Some(err) = e.downcast_ref::<bykov::Error>() {
        use bykov::Error::*;
        return match err {
            NotWeaklyAttracting { .. }
            | InvalidSaddleValue { .. }
            | NonPositiveOmega { .. }
            | InvalidParams(_)
            | EmptyWindow(_)
            | OutOfSection { .. }
            | LeftDomain { .. } => "validation",
            _ => "computation",
        };
    }
    if e.downcast_ref::<std::io::Error>().is_some() || e.chain().any(|c| c.is::<std::io::Error>()) {
        return "io";
    }
    "computation"
}

fn compute(cli: &Cli) -> Result<Artifact> {
    let g = &cli.global;
    match &cli.command {
        Command::Constants {
            map,
            c1,
            e1,
            c2,
            e2,
            omega_spin,
        } => commands::constants_cmd(map, *c1, *e1, *c2, *e2, *omega_spin),
        Command::FixedPoints { map, point } => commands::fixed_points_cmd(map, point),
        Command::Bt { map, lambda } => commands::bt_cmd(map, *lambda),
        Command::Surfaces { map, ranges, grid } => commands::surfaces_cmd(map, ranges, grid),
        Command::Wedge { map, point } => commands::wedge_cmd(map, point),
        Command::Iterate {
            map,
            point,
            x0,
            y0,
            n,
            transient,
        } => commands::iterate_cmd(map, point, *x0, *y0, *n, *transient),
        Command::Manifolds {
            map,
            ranges,
            grid,
            steps,
            step_cap,
            exclude,
        } => commands::manifolds_cmd(map, ranges, grid, *steps, *step_cap, *exclude),
        Command::ScanMap {
            map,
            ranges,
            grid,
            n,
            transient,
            seeds,
            threshold,
        } => commands::scan_map_cmd(map, ranges, grid, *n, *transient, *seeds, *threshold, g.seed),
        Command::OdeSpectrum {
            ode,
            tau1,
            tau2,
            spectrum,
        } => commands::ode_spectrum_cmd(ode, *tau1, *tau2, spectrum),
        Command::OdeScan {
            ode,
            tau1,
            tau2,
            grid,
            spectrum,
        } => commands::ode_scan_cmd(ode, *tau1, *tau2, grid, spectrum),
        Command::OdeCheck { ode, tau1, tau2 } => commands::ode_check_cmd(ode, *tau1, *tau2),
    }
}

/// Validates global options, runs the command on a pool of the requested
/// size and writes its artifact.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let grid_csv = matches!(cli.command, Command::ScanMap { .. } | Command::OdeScan { .. });
    if grid_csv && cli.global.out.is_none() {
        return Err(Invalid(format!("{} writes a CSV grid and requires --out PATH", cli.command.name())).into());
    }
    let threads = match cli.global.threads {
        Some(0) => return Err(Invalid("--threads must be at least 1".into()).into()),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let artifact = pool.install(|| compute(cli))?;
    for w in &artifact.warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    match &cli.global.out {
        Some(path) => commands::write_out(path, &artifact.text)?,
        None if artifact.needs_file => unreachable!("checked above"),
        None => stdout.write_all(artifact.text.as_bytes())?,
    }
    if cli.global.gnuplot_hint {
        match commands::gnuplot_hint(cli.command.name()) {
            Some(h) => writeln!(stderr, "# gnuplot recipe (OUT = output file)\n{h}")?,
            None => writeln!(stderr, "# no gnuplot recipe for {}", cli.command.name())?,
        }
    }
    Ok(())
}

fn error_record(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

/// Entry point shared by the binary: returns the process exit code.
pub fn main_with(argv: Vec<String>) -> i32 {
    let (mut stdout, mut stderr) = (std::io::stdout(), std::io::stderr());
    let argv = match args::expand_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            let _ = writeln!(stderr, "{}", error_record("validation", &msg));
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let _ = writeln!(stderr, "{}", error_record("usage", e.to_string().trim()));
            return 2;
        }
    };
    match run(&cli, &mut stdout, &mut stderr) {
        Ok(()) => 0,
        Err(e) => {
            let kind = error_kind(&e);
            let _ = writeln!(stderr, "{}", error_record(kind, &format!("{e:#}")));
            if kind == "validation" {
                2
            } else {
                1
            }
        }
    }
}
