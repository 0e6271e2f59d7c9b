//! Acceptance criteria 1-10. Each test prints one `criterion N: PASS|FAIL` line
//! straight to stderr (bypassing capture) and then asserts it.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use bykov::ode::{
    self, eigen_mismatch, eigenvalues4, jacobian as ode_jacobian, lyapunov_spectrum, vector_field,
    OdeCell, OdeParams, OdeScanSpec, SpectrumSettings, State4, DEFAULT_INITIAL_STATE, O1, O2,
};
use bykov::orbit::{self, AttractorClass, ClassifySettings, MapCell, MapScanSpec};
use bykov::resonance::{
    self, bt_nondegeneracy, bt_points, continue_bt_locus, g_ell, hopf_sn_tangency_angle, omega_star,
    sample_surfaces, wedge_membership, Membership, SurfaceLabel, SurfaceRegion,
};
use bykov::{Axis, MapConstants, Params, ScanGrid};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn report(n: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n}: {verdict} ({detail})");
    assert!(pass, "criterion {n} failed: {detail}");
}

fn within(t: Duration, limit_s: f64) -> bool {
    t.as_secs_f64() < limit_s
}

#[test]
fn criterion_01_bt_location() {
    let start = Instant::now();
    let c = MapConstants::from_delta_k(3.0, 1.0).unwrap();
    let lambdas: Vec<f64> = (1..=10).map(|i| 0.01 * i as f64).collect();
    let mut worst: f64 = 0.0;
    // closed form 2 l pi (delta - 1) / (K ln delta); the quoted 11.4386 and
    // 22.8772 are off by 2e-4 and 4e-4 and are only reported
    let printed = [11.4386, 22.8772];
    let mut ok = (c.m - 0.384900).abs() < 5e-7;
    for ell in [1, 2] {
        let w_star = omega_star(ell, &c);
        for (sign, x0) in [(-1.0, 0.5 * PI), (1.0, 1.5 * PI)] {
            // deliberately rough start at the first lambda
            let a0 = c.m + sign * lambdas[0];
            let y0 = (-2.0 * ell as f64 * PI * c.delta / (c.k * w_star)).exp();
            let seed = [x0 + 0.05, 1.05 * y0, a0 + 5e-3, 1.01 * w_star];
            match continue_bt_locus(&lambdas, ell, &c, seed) {
                Ok(locus) => {
                    for s in &locus {
                        let a = c.m + sign * s.lambda;
                        worst = worst.max((s.a - a).abs()).max((s.omega - w_star).abs());
                    }
                }
                Err(_) => ok = false,
            }
        }
    }
    let t = start.elapsed();
    ok &= worst < 1e-6 && within(t, 5.0);
    report(
        1,
        ok,
        &format!(
            "M = {:.6}, w*_1 = {:.6} (quoted {}), w*_2 = {:.6} (quoted {}), max |locus - (M -+ lambda, w*_l)| = {worst:.2e}, {:.2} s",
            c.m,
            omega_star(1, &c),
            printed[0],
            omega_star(2, &c),
            printed[1],
            t.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_02_bt_nondegeneracy() {
    let start = Instant::now();
    let c = MapConstants::from_delta_k(3.0, 1.0).unwrap();
    let mut ok = true;
    let mut lines = Vec::new();
    for ell in [1, 2] {
        let (p1, p2) = bt_points(0.1, ell, &c).unwrap();
        for bt in [p1, p2] {
            let k = bt_nondegeneracy(&bt, &c).unwrap();
            // b20 < 0, a20 + b11 - b20 > 0 at 3 pi/2, mirrored at pi/2
            let signs = k.nondegenerate;
            let rel = (k.b11 - k.b20).abs() / k.b20.abs();
            ok &= signs && rel <= 1e-6;
            lines.push(format!(
                "l={ell} {:?}: a20={:.4e} b11={:.4e} b20={:.4e} signs={} |b11-b20|/|b20|={rel:.3}",
                bt.branch, k.a20, k.b11, k.b20, signs
            ));
        }
    }
    let t = start.elapsed();
    ok &= within(t, 5.0);
    report(2, ok, &format!("{}; {:.2} s", lines.join("; "), t.as_secs_f64()));
}

#[test]
fn criterion_03_g_maximum() {
    let start = Instant::now();
    let mut ok = true;
    let mut worst_max: f64 = 0.0;
    for k in [1.0, 2.0] {
        let c = MapConstants::from_delta_k(3.0, k).unwrap();
        let mut prev_star = 0.0;
        for ell in 1..=10 {
            let w_star = omega_star(ell, &c);
            ok &= w_star > prev_star;
            prev_star = w_star;
            worst_max = worst_max.max((g_ell(w_star, ell, &c).unwrap() - c.m).abs());
            // geometric grid over two decades either side of the maximum
            let n = 4000;
            let w: Vec<f64> = (0..=n)
                .map(|i| w_star * 100f64.powf(2.0 * i as f64 / n as f64 - 1.0))
                .collect();
            let g: Vec<f64> = w.iter().map(|&w| g_ell(w, ell, &c).unwrap()).collect();
            for i in 0..n {
                let rising = w[i + 1] <= w_star;
                let falling = w[i] >= w_star;
                if rising {
                    ok &= g[i + 1] > g[i];
                } else if falling {
                    ok &= g[i + 1] < g[i];
                }
                ok &= g[i] < c.m || w[i] == w_star;
            }
        }
    }
    let t = start.elapsed();
    ok &= worst_max < 1e-12 && within(t, 1.0);
    report(
        3,
        ok,
        &format!(
            "max |G_l(w*_l) - M| = {worst_max:.1e} for l = 1..10, K = 1, 2; {:.2} s",
            t.as_secs_f64()
        ),
    );
}

/// Newton on the lift equations written out directly, seeded along a line of
/// `x` values; returns the distinct roots with `x` reduced to `[0, 2 pi)`.
fn newton_fixed_points(mu: &Params, c: &MapConstants, ell: u32) -> Vec<(f64, f64)> {
    let kw = c.k * mu.omega;
    let shift = TAU * ell as f64;
    let residual = |x: f64, y: f64| -> Option<([f64; 2], [[f64; 2]; 2])> {
        let s = y + mu.a + mu.lambda * x.sin();
        if s.is_nan() || s <= 0.0 {
            return None;
        }
        let sd1 = s.powf(c.delta - 1.0);
        let lc = mu.lambda * x.cos();
        Some((
            [-kw * s.ln() - shift, s * sd1 - y],
            [[-kw * lc / s, -kw / s], [c.delta * sd1 * lc, c.delta * sd1 - 1.0]],
        ))
    };
    let y0 = (-shift * c.delta / kw).exp();
    let mut roots: Vec<(f64, f64)> = Vec::new();
    for i in 0..16 {
        let (mut x, mut y) = (TAU * i as f64 / 16.0, y0);
        for _ in 0..100 {
            let Some((r, j)) = residual(x, y) else { break };
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let dx = (r[0] * j[1][1] - j[0][1] * r[1]) / det;
            let dy = (j[0][0] * r[1] - r[0] * j[1][0]) / det;
            x -= dx;
            y -= dy;
            if dx.abs() < 1e-15 && dy.abs() < 1e-15 * y.abs().max(1e-300) {
                break;
            }
        }
        if let Some((r, _)) = residual(x, y) {
            if r[0].abs() < 1e-12 && r[1].abs() < 1e-12 * y.max(1e-300) {
                let xr = x.rem_euclid(TAU);
                let near = |&(a, b): &(f64, f64)| {
                    let d = (a - xr).abs();
                    d.min(TAU - d) < 1e-8 && (b - y).abs() < 1e-8
                };
                if !roots.iter().any(near) {
                    roots.push((xr, y));
                }
            }
        }
    }
    roots
}

#[test]
fn criterion_04_fixed_point_oracle() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(4);
    let (mut worst_xy, mut worst_det): (f64, f64) = (0.0, 0.0);
    let mut ok = true;
    let mut count = 0;
    for (k, w_range) in [(1.0, (2.0, 40.0)), (2.0, (1.0, 20.0))] {
        let c = MapConstants::from_delta_k(3.0, k).unwrap();
        let mut accepted = 0;
        while accepted < 500 {
            let omega = rng.gen_range(w_range.0..w_range.1);
            let lambda = rng.gen_range(1e-3..0.1);
            let g = g_ell(omega, 1, &c).unwrap();
            let a = rng.gen_range(g - lambda..g + lambda);
            let mu = Params::new(a, lambda, omega);
            if a <= 0.0 || wedge_membership(&mu, 1, &c).unwrap() != Membership::Inside {
                continue;
            }
            accepted += 1;
            let records = resonance::fixed_points(&mu, &c, 1).unwrap();
            let roots = newton_fixed_points(&mu, &c, 1);
            ok &= records.len() == 2 && roots.len() == 2;
            let det = c.delta * (-2.0 * (c.delta - 1.0) * PI / (c.k * omega)).exp();
            for r in &records {
                let d = roots
                    .iter()
                    .map(|&(x, y)| {
                        let dx = (x - r.x).abs();
                        dx.min(TAU - dx).max((y - r.y).abs())
                    })
                    .fold(f64::INFINITY, f64::min);
                worst_xy = worst_xy.max(d);
                worst_det = worst_det.max((r.det - det).abs());
            }
        }
        count += accepted;
    }
    let t = start.elapsed();
    ok &= worst_xy < 1e-10 && worst_det < 1e-10 && within(t, 10.0);
    report(
        4,
        ok,
        &format!(
            "{count} interior points, max closed-form vs Newton = {worst_xy:.1e}, max det error = {worst_det:.1e}, {:.2} s",
            t.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_05_surface_structure() {
    let start = Instant::now();
    let c = MapConstants::from_delta_k(3.0, 2.0).unwrap();
    let region = SurfaceRegion {
        a: (0.0, 0.5),
        lambda: (0.0, 0.1),
        omega: (0.5, 10.0),
    };
    let samples = sample_surfaces(&region, 1, &c, [64, 32, 128]).unwrap();
    let labels: BTreeSet<&str> = samples.iter().map(|s| s.label.as_str()).collect();
    let families = ["SN1", "SN2", "HOPF", "PD", "NF"].iter().all(|l| labels.contains(l));
    let w_star = omega_star(1, &c);
    let hopf_dev = samples
        .iter()
        .filter(|s| s.label == SurfaceLabel::Hopf)
        .map(|s| (s.omega - w_star).abs())
        .fold(0.0, f64::max);
    let angle = hopf_sn_tangency_angle(0.1, 1, &c, 1e-3).unwrap();
    let t = start.elapsed();
    let ok = families && hopf_dev < 1e-8 && angle < 5.0 && within(t, 60.0);
    report(
        5,
        ok,
        &format!(
            "{} samples, families {labels:?}, max |w_Hopf - w*_1| = {hopf_dev:.1e} (w*_1 = {w_star:.4}), Hopf-SN angle = {angle:.2} deg, {:.2} s",
            samples.len(),
            t.as_secs_f64()
        ),
    );
}

fn map_scan_spec() -> MapScanSpec {
    MapScanSpec {
        rows: Axis::new("omega", 0.5, 10.0, 200).unwrap(),
        cols: Axis::new("A", 0.0, 0.5, 200).unwrap(),
        base: Params::new(0.0, 0.1, 1.0),
        ell: 1,
        seeds_per_cell: 8,
        seed: Some(2024),
        settings: ClassifySettings::default(),
    }
}

fn map_scan_constants() -> MapConstants {
    MapConstants::from_delta_k(3.0, 2.0).unwrap()
}

fn map_scan() -> &'static (ScanGrid<MapCell>, Duration) {
    static SCAN: OnceLock<(ScanGrid<MapCell>, Duration)> = OnceLock::new();
    SCAN.get_or_init(|| {
        let start = Instant::now();
        let grid = orbit::scan(&map_scan_spec(), &map_scan_constants()).unwrap();
        (grid, start.elapsed())
    })
}

#[test]
fn criterion_06_map_scan_phenomenology() {
    let (grid, t) = map_scan();
    let c = map_scan_constants();
    let w_star = omega_star(1, &c);
    let (mut agree, mut total) = (0usize, 0usize);
    let (mut circles, mut circles_below) = (0usize, 0usize);
    let mut chaotic_large_w = 0usize;
    let mut inside_sink_w_le = (0usize, 0usize);
    for (_, _, omega, a, cell) in grid.iter() {
        let mu = Params::new(a, 0.1, omega);
        let inside = wedge_membership(&mu, 1, &c).unwrap() == Membership::Inside;
        let sink = cell.class == Some(AttractorClass::PeriodicSink);
        total += 1;
        agree += usize::from(inside == sink);
        if inside && omega <= w_star {
            inside_sink_w_le.1 += 1;
            inside_sink_w_le.0 += usize::from(sink);
        }
        if cell.class == Some(AttractorClass::InvariantCircle) {
            circles += 1;
            let g = g_ell(omega, 1, &c).unwrap();
            circles_below += usize::from(omega < w_star && g < a - 0.1);
        }
        if cell.class == Some(AttractorClass::Chaotic) && cell.exponents[0] > 5e-4 && omega > w_star {
            chaotic_large_w += 1;
        }
    }
    let share = agree as f64 / total as f64;
    let a_ok = share >= 0.95;
    // weak sinks next to det = 1 can read as circles; same margin as (a)
    let b_ok = circles > 0 && circles_below as f64 >= 0.95 * circles as f64;
    let c_ok = chaotic_large_w > 0;
    let ok = a_ok && b_ok && c_ok && within(*t, 300.0);
    report(
        6,
        ok,
        &format!(
            "(a) sink <-> Inside agreement {:.2}% [{}], sinks on Inside cells with w <= w* {}/{}; \
             (b) {circles_below}/{circles} invariant-circle cells below the wedge [{}]; \
             (c) {chaotic_large_w} chaotic cells at w > {w_star:.3} [{}]; {:.1} s",
            100.0 * share,
            if a_ok { "ok" } else { "short" },
            inside_sink_w_le.0,
            inside_sink_w_le.1,
            if b_ok { "ok" } else { "short" },
            if c_ok { "ok" } else { "short" },
            t.as_secs_f64()
        ),
    );
}

fn params(t1: f64, t2: f64) -> OdeParams {
    OdeParams::new(1.0, -0.1, 1.0, t1, t2).unwrap()
}

#[test]
fn criterion_07_ode_structure() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = [0.0f64; 6];
    for _ in 0..1000 {
        let p = params(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
        let mut s: State4 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let norm = ode::r2(&s).sqrt();
        s.iter_mut().for_each(|v| *v /= norm);
        let f = vector_field(&s, &p);
        worst[0] = worst[0].max(s.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>().abs());

        let axis = vector_field(&[0.0, 0.0, s[2], s[3]], &p);
        worst[1] = worst[1].max(axis[0].abs()).max(axis[1].abs());
        let p0 = params(0.0, 0.0);
        worst[1] = worst[1].max(vector_field(&[s[0], s[1], 0.0, s[3]], &p0)[2].abs());

        let g = vector_field(&[-s[0], -s[1], s[2], s[3]], &p);
        let want = [-f[0], -f[1], f[2], f[3]];
        worst[2] = worst[2].max(g.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));

        let pr = params(p.tau1, 0.0);
        let th: f64 = rng.gen_range(0.0..TAU);
        let (c, sn) = (th.cos(), th.sin());
        let rot = |v: &State4| [c * v[0] - sn * v[1], sn * v[0] + c * v[1], v[2], v[3]];
        let lhs = vector_field(&rot(&s), &pr);
        let rhs = rot(&vector_field(&s, &pr));
        worst[3] = worst[3].max(lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));

        let j = ode_jacobian(&s, &p);
        for k in 0..4 {
            let h = 1e-6;
            let (mut up, mut dn) = (s, s);
            up[k] += h;
            dn[k] -= h;
            let (fu, fd) = (vector_field(&up, &p), vector_field(&dn, &p));
            for i in 0..4 {
                let fdv = (fu[i] - fd[i]) / (2.0 * h);
                worst[4] = worst[4].max((fdv - j[i][k]).abs() / j[i][k].abs().max(1.0));
            }
        }
    }
    let p0 = params(0.0, 0.0);
    let e1 = [[-1.1, 1.0], [-1.1, -1.0], [0.9, 0.0], [-2.0, 0.0]];
    let e2 = [[0.9, 1.0], [0.9, -1.0], [-1.1, 0.0], [-2.0, 0.0]];
    worst[5] = eigen_mismatch(&eigenvalues4(&ode_jacobian(&O1, &p0)), &e1)
        .max(eigen_mismatch(&eigenvalues4(&ode_jacobian(&O2, &p0)), &e2));
    let t = start.elapsed();
    let ok = worst[0] < 1e-12
        && worst[1] == 0.0
        && worst[2] < 1e-14
        && worst[3] < 1e-12
        && worst[4] < 1e-6
        && worst[5] < 1e-8
        && within(t, 5.0);
    report(
        7,
        ok,
        &format!(
            "sphere {:.1e}, subspaces {:.1e}, gamma_pi {:.1e}, SO(2) {:.1e}, Jacobian {:.1e}, O1/O2 spectra {:.1e}, {:.2} s",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            worst[4],
            worst[5],
            t.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_08_torus_exponents() {
    let start = Instant::now();
    let r = lyapunov_spectrum(DEFAULT_INITIAL_STATE, &params(0.01, 0.0), &SpectrumSettings::new(1000.0))
        .unwrap();
    let t = start.elapsed();
    let zero = r.exponents.iter().filter(|l| l.abs() <= 5e-4).count();
    let negative = r.exponents.iter().filter(|&&l| l < -5e-4).count();
    let ok = r.complete && zero == 2 && negative == 2 && within(t, 30.0);
    report(
        8,
        ok,
        &format!(
            "exponents {:?}, {zero} within 5e-4 of zero, {negative} below -5e-4, {:.2} s",
            r.exponents.map(|l| (l * 1e6).round() / 1e6),
            t.as_secs_f64()
        ),
    );
}

fn ode_scan_spec() -> OdeScanSpec {
    OdeScanSpec {
        tau1: Axis::new("tau1", 0.0, 1.0, 50).unwrap(),
        tau2: Axis::new("tau2", 0.0, 1.0, 50).unwrap(),
        alpha: 1.0,
        beta: -0.1,
        omega: 1.0,
        initial: DEFAULT_INITIAL_STATE,
        settings: SpectrumSettings::new(1000.0),
    }
}

fn ode_grid() -> &'static (ScanGrid<OdeCell>, Duration) {
    static SCAN: OnceLock<(ScanGrid<OdeCell>, Duration)> = OnceLock::new();
    SCAN.get_or_init(|| {
        let start = Instant::now();
        let grid = ode::ode_scan(&ode_scan_spec()).unwrap();
        (grid, start.elapsed())
    })
}

#[test]
fn criterion_09_ode_scan() {
    let (grid, t) = ode_grid();
    let total = grid.cells.len();
    let classified = grid.cells.iter().filter(|c| c.class.is_some()).count();
    let classes: BTreeSet<usize> = grid.cells.iter().filter_map(|c| c.class).collect();
    let two_near_axis = grid
        .iter()
        .filter(|&(_, _, t1, t2, c)| t1 <= 0.2 && t2 <= 0.1 && c.class == Some(2))
        .count();
    let counts: Vec<String> = classes
        .iter()
        .map(|k| format!("{k}: {}", grid.cells.iter().filter(|c| c.class == Some(*k)).count()))
        .collect();
    let ok = classified * 100 >= 99 * total
        && classes.len() >= 2
        && two_near_axis > 0
        && within(*t, 1800.0);
    report(
        9,
        ok,
        &format!(
            "{classified}/{total} classified, classes {{{}}}, {two_near_axis} class-2 cells with tau1 <= 0.2, tau2 <= 0.1, {:.1} s",
            counts.join(", "),
            t.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let (map_a, _) = map_scan();
    let (ode_a, _) = ode_grid();
    let threads = rayon::current_num_threads() + 2;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let (map_b, ode_b) = pool.install(|| {
        (
            orbit::scan(&map_scan_spec(), &map_scan_constants()).unwrap(),
            ode::ode_scan(&ode_scan_spec()).unwrap(),
        )
    });
    // Debug formatting prints every float in shortest round-trip form
    let same_map = format!("{map_a:?}") == format!("{map_b:?}");
    let same_ode = format!("{ode_a:?}") == format!("{ode_b:?}");
    report(
        10,
        same_map && same_ode,
        &format!(
            "map scan identical: {same_map}, ODE scan identical: {same_ode} ({} vs {threads} threads)",
            rayon::current_num_threads()
        ),
    );
}
