//! Acceptance suite: one PASS/FAIL line per criterion. Criteria that drive
//! figure presets run the release-style binary; the rest call the library.
//! Exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};
use std::process::Command;

use dtpt::fisher::{tongue_tip_trajectory, ComplexWindow, TipTable, DEFAULT_EPS_ZERO};
use dtpt::geometry::{dtop, dtop_finite_difference, total_geometric_phase, DtopOptions, DtopSeries, Observable};
use dtpt::loschmidt::{log_amplitude_real, ThermalSpec};
use dtpt::numeric::fit_line;
use dtpt::scaling::{
    find_critical_points, fit_log_size, fit_log_time, fit_power_law_series, FitWindow, KinkType, PowerLawReference,
};
use dtpt::spectrum::{build_mode_bank, ModeBank, SpectrumSpec};
use dtpt::TimeGrid;

/// Coupling of the BEC presets.
fn g0() -> f64 {
    1.0 / TAU.sqrt()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

type Table = Vec<BTreeMap<String, String>>;

fn read_csv(path: &Path) -> Table {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let headers = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            headers.iter().zip(r.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()
        })
        .collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or(f64::NAN)
}

fn run_preset(name: &str, threads: usize, root: &Path) -> Result<PathBuf, String> {
    let out = root.join(format!("{name}_t{threads}"));
    let status = Command::new(env!("CARGO_BIN_EXE_dtpt"))
        .args(["reproduce", name, "--threads", &threads.to_string(), "--out"])
        .arg(&out)
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(out)
    } else {
        Err(format!("dtpt reproduce {name} exited with {status}"))
    }
}

// 1
fn revival_identity() -> Outcome {
    let mut worst = 0.0f64;
    for alpha in [-1.0, 0.0, 1.0] {
        let bank = build_mode_bank(&SpectrumSpec::harmonic(1000, 1.0, g0(), alpha)).unwrap();
        for n in 1..=5 {
            worst = worst.max(log_amplitude_real(&bank, n as f64 * TAU).abs() / bank.total_weight());
        }
    }
    outcome(worst < 1e-12, format!("max |Gamma(n tau0)| / sum lambda^2 = {worst:.2e} (< 1e-12)"))
}

fn tip_trajectory(spec: SpectrumSpec, sizes: &[usize], t_c: f64) -> TipTable {
    let specs: Vec<SpectrumSpec> = sizes.iter().map(|&n| spec.with_modes(n)).collect();
    tongue_tip_trajectory(
        &specs,
        |b: &ModeBank| {
            let u = 1.0 / b.max_frequency();
            ComplexWindow::centered(t_c, 20.0 * u, 40.0 * u, 161, 81).unwrap()
        },
        DEFAULT_EPS_ZERO,
    )
    .unwrap()
}

/// Tip nearest the axis per size, restricted to `|t - t_c| <= tol`.
fn nearest_tips(table: &TipTable, t_c: f64, tol: f64) -> Vec<Option<(f64, f64)>> {
    table
        .sizes()
        .iter()
        .map(|&n| {
            table
                .tips_at(n)
                .filter(|r| (r.t_star - t_c).abs() <= tol)
                .map(|r| (r.t_star, r.s_star.abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
        })
        .collect()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|p| p[1] < p[0])
}

// 2
fn fisher_crossings() -> Outcome {
    let sizes = [100, 1000, 10000];
    let mut pass = true;
    let mut notes = Vec::new();
    for alpha in [-1.0, 0.0, 1.0] {
        for n in 1..=3 {
            let t_c = n as f64 * TAU;
            let table = tip_trajectory(SpectrumSpec::harmonic(1000, 1.0, g0(), alpha), &sizes, t_c);
            let tips = nearest_tips(&table, t_c, 0.05 * TAU);
            let ok = match tips.as_slice() {
                [Some(_), Some(mid), Some(_)] => {
                    let s: Vec<f64> = tips.iter().map(|t| t.unwrap().1).collect();
                    within(mid.0, t_c, 0.01) && strictly_decreasing(&s)
                }
                _ => false,
            };
            if !ok {
                notes.push(format!("alpha {alpha} n {n}: {tips:?}"));
            }
            pass &= ok;
        }
    }
    let detail = if notes.is_empty() {
        "9 tongues: tips within 1% of n tau0 at N=1e3, |s*| strictly decreasing over N=1e2,1e3,1e4".to_string()
    } else {
        notes.join("; ")
    };
    outcome(pass, detail)
}

// 3
fn kink_orders() -> Outcome {
    let expected = [
        (1.0, Observable::NuD, KinkType::LogDivergent),
        (0.0, Observable::NuDDot, KinkType::DerivativeJump),
        (-1.0, Observable::NuDDdot, KinkType::LogDivergent),
    ];
    let grid = TimeGrid::uniform(0.5 * TAU, 3.5 * TAU, TAU / 400.0).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for (alpha, obs, kind) in expected {
        let series: BTreeMap<usize, DtopSeries> = [250, 500, 1000]
            .into_iter()
            .map(|n| {
                let bank = build_mode_bank(&SpectrumSpec::harmonic(n, 1.0, g0(), alpha)).unwrap();
                (n, dtop(&bank, &grid, &DtopOptions::default()))
            })
            .collect();
        let found: Vec<(f64, Observable, KinkType)> = find_critical_points(&series)
            .unwrap()
            .into_iter()
            .map(|p| ((p.t_c / TAU * 100.0).round() / 100.0, p.observable, p.kind))
            .collect();
        let want: Vec<(f64, Observable, KinkType)> = (1..=3).map(|n| (n as f64, obs, kind)).collect();
        if found != want {
            pass = false;
            notes.push(format!("alpha {alpha}: got {found:?}"));
        }
    }
    let detail = if pass {
        "alpha +1: log nu_D, alpha 0: jump nu_D_dot, alpha -1: log nu_D_ddot at t_1..t_3; nothing else".to_string()
    } else {
        notes.join("; ")
    };
    outcome(pass, detail)
}

fn critical_rows(dir: &Path, file: &str) -> Table {
    read_csv(&dir.join(file))
}

// 4
fn scaling_coefficients(fig2: &Path) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (alpha, sign) in [("1", 1.0), ("-1", -1.0)] {
        let rows = critical_rows(fig2, &format!("critical_alpha_{alpha}.csv"));
        let mut kappas = Vec::new();
        for n in 1..=3 {
            let Some(row) = rows.iter().find(|r| within(num(r, "t_c"), n as f64, 0.01)) else {
                pass = false;
                notes.push(format!("alpha {alpha}: no point at t_{n}"));
                continue;
            };
            let (k, kp, z) = (num(row, "kappa"), num(row, "kappa_prime"), num(row, "dynamical_exponent"));
            let n = n as f64;
            pass &= within(k, sign * n, 0.05) && within(kp, -sign * n, 0.05) && within(z, 1.0, 0.05);
            kappas.push(format!("({k:.3}, {kp:.3}, z {z:.4})"));
        }
        notes.push(format!("alpha {alpha} (kappa, kappa', |kappa'/kappa|) = {}", kappas.join(" ")));
    }
    let rows = critical_rows(fig2, "critical_alpha_0.csv");
    let mut exps = Vec::new();
    for n in 1..=3 {
        match rows.iter().find(|r| within(num(r, "t_c"), n as f64, 0.01)) {
            Some(row) => {
                let e = num(row, "power_exponent");
                pass &= within(e, 1.0, 0.05);
                exps.push(format!("{e:.4}"));
            }
            None => {
                pass = false;
                exps.push("missing".into());
            }
        }
    }
    notes.push(format!("alpha 0 exponents {}", exps.join(" ")));
    notes.push("targets: alpha +1 kappa = +n, kappa' = -n; alpha -1 flipped".into());
    outcome(pass, notes.join("; "))
}

// 5
fn membrane_kinks(fig4: &Path) -> Outcome {
    let rows = critical_rows(fig4, "critical.csv");
    let mut pass = true;
    let mut notes = Vec::new();
    let logs = [(0.5, -3.8), (1.5, 11.5), (2.5, -20.0)];
    for (t, kappa) in logs {
        match rows.iter().find(|r| within(num(r, "t_c"), t, 0.01)) {
            Some(r) if r["kind"] == "log-divergent" => {
                let (k, kp) = (num(r, "kappa"), num(r, "kappa_prime"));
                let ok = within(k, kappa, 0.1) && within(kp, -kappa, 0.1);
                pass &= ok;
                notes.push(format!("{t}: kappa {k:.3} kappa' {kp:.3}"));
            }
            _ => {
                pass = false;
                notes.push(format!("{t}: no log-divergent point"));
            }
        }
    }
    for t in [1.0, 2.0, 3.0] {
        match rows.iter().find(|r| within(num(r, "t_c"), t, 0.01)) {
            Some(r) if r["kind"] == "derivative-jump" => {
                let e = num(r, "power_exponent");
                pass &= within(e, 1.0, 0.05);
                notes.push(format!("{t}: exponent {e:.4}"));
            }
            _ => {
                pass = false;
                notes.push(format!("{t}: no derivative-jump point"));
            }
        }
    }
    pass &= rows.len() == 6;
    outcome(pass, format!("{} points; {}", rows.len(), notes.join(", ")))
}

// 6
fn membrane_tongues(fig3c: &Path) -> Outcome {
    let rows = read_csv(&fig3c.join("crossings.csv"));
    let mut pass = rows.len() == 3;
    let mut notes = Vec::new();
    for (m, row) in rows.iter().enumerate() {
        // taubar = 4 pi / delta, so multiples of pi / delta sit at quarters
        let target = 0.25 * (m + 1) as f64;
        let s: Vec<f64> = row["s_stars"].split(' ').map(|v| v.parse().unwrap()).collect();
        let ok = within(num(row, "t_c"), target, 0.01) && strictly_decreasing(&s);
        pass &= ok;
        notes.push(format!("t* {:.5} taubar, |s*| {:?}", num(row, "t_c"), s));
    }
    outcome(pass, notes.join("; "))
}

// 7
fn fid_ordering(fig3a: &Path) -> Outcome {
    let mut at_revival = Vec::new();
    let mut depth = Vec::new();
    for g in ["0.5", "1", "2"] {
        let rows = read_csv(&fig3a.join(format!("fid_g0_{g}.csv")));
        let t: Vec<f64> = rows.iter().map(|r| num(r, "t")).collect();
        let f: Vec<f64> = rows.iter().map(|r| num(r, "fid")).collect();
        let i = (0..t.len()).min_by(|&a, &b| (t[a] - 1.0).abs().total_cmp(&(t[b] - 1.0).abs())).unwrap();
        at_revival.push(f[i]);
        let min = (0..t.len()).filter(|&j| t[j] > 0.0 && t[j] <= 1.0).map(|j| f[j]).fold(f64::INFINITY, f64::min);
        depth.push(1.0 - min);
    }
    let pass = strictly_decreasing(&at_revival) && depth.windows(2).all(|p| p[1] > p[0]);
    outcome(
        pass,
        format!(
            "fid(taubar) for g0 = 0.5, 1, 2: {}; collapse depth {}",
            at_revival.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(" > "),
            depth.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(" < ")
        ),
    )
}

// 8
fn thermal_robustness(fig4d: &Path) -> Outcome {
    let rows = read_csv(&fig4d.join("thermal_tc0.csv"));
    let by_n: Vec<(f64, f64, bool)> = rows
        .iter()
        .map(|r| (num(r, "n_th"), num(r, "exponent"), r["deviates"] == "true"))
        .collect();
    let get = |n: f64| by_n.iter().find(|r| r.0 == n).copied();
    let mut pass = true;
    let mut notes = Vec::new();
    match (get(0.0), get(100.0)) {
        (Some(z), Some(h)) => {
            pass &= within(z.1, 1.0, 0.05) && (h.1 - 1.0).abs() <= 0.15;
            notes.push(format!("exponent n_th=0 {:.4}, n_th=100 {:.4}", z.1, h.1));
        }
        _ => pass = false,
    }
    let first = by_n.iter().find(|r| r.2).map(|r| r.0);
    pass &= matches!(first, Some(n) if n > 1.0 && n <= 10.0);
    notes.push(format!("first deviation at n_th = {first:?}"));
    let n_hot = ThermalSpec::from_temperature(20e6, 0.1).unwrap().n_th;
    let n_cold = ThermalSpec::from_temperature(20e6, 0.015).unwrap().n_th;
    pass &= (n_hot - 104.0).abs() <= 1.0 && (n_cold - 15.0).abs() <= 1.0;
    notes.push(format!("n_th(20 MHz, 0.1 K) = {n_hot:.2}, n_th(20 MHz, 15 mK) = {n_cold:.2}"));
    outcome(pass, notes.join("; "))
}

// 9
fn linear_dispersion_necessity() -> Outcome {
    let curved = |n: usize| SpectrumSpec::power_dispersion(n, 1.0, 1.0, 0.0, 1.2);
    let linear = |n: usize| SpectrumSpec::power_dispersion(n, 1.0, 1.0, 0.0, 1.0);
    let bank = build_mode_bank(&curved(1000)).unwrap();
    let revival = log_amplitude_real(&bank, TAU).exp();

    let table = tip_trajectory(curved(1000), &[100, 1000, 10000], TAU);
    let crossing = dtpt::fisher::crossing_times(&table, 0.05 * TAU)
        .map(|c| c.iter().any(|x| x.declared))
        .unwrap_or(false);

    let grid = TimeGrid::uniform(0.5 * TAU, 1.5 * TAU, TAU / 4000.0).unwrap();
    let slope = |make: &dyn Fn(usize) -> SpectrumSpec, obs: Observable| {
        let (x, y): (Vec<f64>, Vec<f64>) = [100, 1000, 10000]
            .into_iter()
            .map(|n| {
                let s = dtop(&build_mode_bank(&make(n)).unwrap(), &grid, &DtopOptions::default());
                let m = s.observable(obs).iter().fold(0.0f64, |a, v| a.max(v.abs()));
                ((n as f64).ln(), m)
            })
            .unzip();
        fit_line(&x, &y).unwrap().slope
    };
    let (s_curved, s_linear) = (slope(&curved, Observable::NuDDot), slope(&linear, Observable::NuDDot));
    let growth_ok = s_curved < 0.1 * s_linear;
    let (d_curved, d_linear) = (slope(&curved, Observable::NuDDdot), slope(&linear, Observable::NuDDdot));
    outcome(
        revival < 0.9 && !crossing && growth_ok,
        format!(
            "exp Gamma(tau0) = {revival:.4}; declared crossing: {crossing}; max|nu_D_dot| slope vs ln N: p=1.2 {s_curved:.4}, p=1 {s_linear:.4}; (max|nu_D_ddot| slopes {d_curved:.1} vs {d_linear:.1})"
        ),
    )
}

/// Max deviation relative to the analytic sup-norm, edges skipped.
fn rel_dev(a: &[f64], b: &[f64], skip: usize) -> f64 {
    let n = a.len();
    let scale = a[skip..n - skip].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a[skip..n - skip].iter().zip(&b[skip..n - skip]).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

// 10
fn oracle_agreements() -> Outcome {
    let mut fd_worst = 0.0f64;
    let grid = TimeGrid::uniform(0.29 * TAU, 0.31 * TAU, 2e-4).unwrap();
    for alpha in [1.0, 0.0, -1.0] {
        let bank = build_mode_bank(&SpectrumSpec::harmonic(1000, 1.0, g0(), alpha)).unwrap();
        let opts = DtopOptions::default();
        let an = dtop(&bank, &grid, &opts);
        let fd = dtop_finite_difference(&bank, &grid, &opts, 1e-6).unwrap();
        for obs in Observable::ALL {
            fd_worst = fd_worst.max(rel_dev(an.observable(obs), fd.observable(obs), 4));
        }
    }

    let bank = build_mode_bank(&SpectrumSpec::harmonic(100_000, 1.0, 1.0, 1.0)).unwrap();
    let phi = total_geometric_phase(&bank, &TimeGrid::new(vec![TAU / 4.0]).unwrap(), false).values[0];
    let leibniz = (phi + PI / 4.0).abs();

    let mut fit_worst = 0.0f64;
    let sizes: BTreeMap<usize, f64> = [1000usize, 10_000, 100_000].into_iter().map(|n| (n, 2.5 * (n as f64).ln() - 0.7)).collect();
    fit_worst = fit_worst.max((fit_log_size(&sizes).unwrap().kappa - 2.5).abs() / 2.5);
    let t_c = 2.0;
    let times = TimeGrid::uniform(1.0, 3.0, 1e-3).unwrap();
    let synth = |f: &dyn Fn(f64) -> f64| {
        let v: Vec<f64> = times.times().iter().map(|&t| f(t)).collect();
        DtopSeries {
            times: times.times().to_vec(),
            nu: v.clone(),
            nu_dot: v.clone(),
            nu_ddot: v,
            method: dtpt::geometry::DtopMethod::Analytic,
        }
    };
    let log = synth(&|t| -3.0 * ((t - t_c) / t_c).abs().ln() + 0.2);
    let kt = fit_log_time(&log, Observable::NuD, t_c, &FitWindow::default()).unwrap().kappa;
    fit_worst = fit_worst.max((kt + 3.0).abs() / 3.0);
    let pw = synth(&|t| 4.0 * (t - t_c).abs());
    let e = fit_power_law_series(&pw, Observable::NuDDot, t_c, &FitWindow::default(), PowerLawReference::AtCritical)
        .unwrap()
        .kappa;
    fit_worst = fit_worst.max((e - 1.0).abs());

    outcome(
        fd_worst < 1e-6 && leibniz < 1e-4 && fit_worst < 1e-9,
        format!("FD vs analytic {fd_worst:.2e} (< 1e-6); Leibniz |Phi + pi/4| {leibniz:.2e} (< 1e-4); synthetic fits {fit_worst:.2e} (< 1e-9)"),
    )
}

fn files_of(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

// 11
fn determinism(a: &Path, b: &Path) -> Outcome {
    let (fa, fb) = (files_of(a), files_of(b));
    let differing: Vec<&String> = fa.keys().filter(|k| fa.get(*k) != fb.get(*k)).collect();
    let pass = !fa.is_empty() && fa.len() == fb.len() && differing.is_empty();
    outcome(
        pass,
        format!("{} CSVs compared between --threads 1 and --threads 2; differing: {differing:?}", fa.len()),
    )
}

fn checked(run: &Result<PathBuf, String>, check: fn(&Path) -> Outcome) -> Outcome {
    match run {
        Ok(dir) => check(dir),
        Err(e) => outcome(false, e.as_str()),
    }
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    let root = tempfile::tempdir().expect("temp dir");
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let preset = |name: &str, threads: usize| run_preset(name, threads, root.path());

    results.push((1, "revival identity", revival_identity()));
    results.push((2, "Fisher crossings", fisher_crossings()));
    results.push((3, "DTOP kink orders", kink_orders()));
    let fig2 = preset("fig2", 1);
    results.push((4, "scaling coefficients", checked(&fig2, scaling_coefficients)));
    results.push((5, "membrane kinks", checked(&preset("fig4", 0), membrane_kinks)));
    results.push((6, "membrane tongues", checked(&preset("fig3c", 0), membrane_tongues)));
    results.push((7, "FID ordering", checked(&preset("fig3a", 0), fid_ordering)));
    results.push((8, "thermal robustness", checked(&preset("fig4d", 0), thermal_robustness)));
    results.push((9, "linear-dispersion necessity", linear_dispersion_necessity()));
    results.push((10, "oracle agreements", oracle_agreements()));
    let second = preset("fig2", 2);
    let det = match (&fig2, &second) {
        (Ok(a), Ok(b)) => determinism(a, b),
        (Err(e), _) | (_, Err(e)) => outcome(false, e.as_str()),
    };
    results.push((11, "determinism", det));

    let mut n_fail = 0;
    for (id, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        n_fail += usize::from(!o.pass);
        println!("criterion {id:>2} [{tag}] {name}: {}", o.detail);
    }
    println!("{} of {} criteria pass", results.len() - n_fail, results.len());
    if n_fail > 0 {
        std::process::exit(1);
    }
}
