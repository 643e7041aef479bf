//! One function per subcommand. Each writes its CSVs (and SVGs when asked)
//! through the recorder, which hashes them into the manifest.

use dtpt::export::{
    format_f64, write_csv, write_dtop, write_fid, write_field, write_fits, write_modes, write_phase, write_regions,
    write_size_scaling, write_spectral_density, write_time_scaling, write_tips,
};
use dtpt::fisher::{crossing_times, extract_zero_regions, scan, tongue_tip_trajectory, ComplexWindow, TipTable};
use dtpt::geometry::{dtop, total_geometric_phase, DtopOptions};
use dtpt::loschmidt::fid;
use dtpt::scaling::KinkType;
use dtpt::spectrum::{build_mode_bank, spectral_density};

use crate::analysis::analyze;
use crate::config::{RunConfig, Variant};
use crate::manifest::Recorder;
use crate::svg;
use crate::CliError;

fn name(stem: &str, label: &str, ext: &str) -> String {
    if label.is_empty() {
        format!("{stem}.{ext}")
    } else {
        format!("{stem}_{label}.{ext}")
    }
}

fn header(cfg: &RunConfig, v: &Variant) -> String {
    let mut h = cfg.header();
    if !v.label.is_empty() {
        h.push_str(&format!("\n[variant]\nlabel = \"{}\"\nspectral_exponent = {}\ncoupling_amplitude = {}\n", v.label, v.spec.spectral_exponent, v.spec.coupling_amplitude));
    }
    h
}

pub fn spectrum(cfg: &RunConfig, rec: &mut Recorder) -> Result<(), CliError> {
    rec.stage("spectrum");
    for v in cfg.variants() {
        let bank = build_mode_bank(&v.spec).map_err(CliError::config)?;
        let h = header(cfg, &v);
        rec.emit_with(&name("modes", &v.label, "csv"), |b| write_modes(b, &h, &bank))?;
        let bins = cfg.output.density_bins.min(bank.len());
        if bins >= 2 {
            let est = spectral_density(&bank, bins)?;
            let h = format!("{h}\nfitted exponent = {}", format_f64(est.exponent()));
            rec.emit_with(&name("density", &v.label, "csv"), |b| write_spectral_density(b, &h, &est))?;
        }
    }
    Ok(())
}

pub fn phase(cfg: &RunConfig, rec: &mut Recorder) -> Result<(), CliError> {
    let grid = cfg.time_grid()?;
    let c = cfg.time_scale();
    rec.stage("phase");
    for v in cfg.variants() {
        let bank = build_mode_bank(&v.spec).map_err(CliError::config)?;
        let series = total_geometric_phase(&bank, &grid, true);
        rec.emit_with(&name("phase", &v.label, "csv"), |b| write_phase(b, &header(cfg, &v), &series, c))?;
        if cfg.output.svg {
            let t: Vec<f64> = series.times.iter().map(|t| t / c).collect();
            let s = svg::line_plot("phi_G", "t", &t, &[("phi_G", &series.values)]);
            rec.emit(&name("phase", &v.label, "svg"), s.as_bytes())?;
        }
    }
    Ok(())
}

pub fn dtop_cmd(cfg: &RunConfig, rec: &mut Recorder) -> Result<(), CliError> {
    let grid = cfg.time_grid()?;
    let c = cfg.time_scale();
    let thermals = cfg.thermals()?;
    rec.stage("dtop");
    for v in cfg.variants() {
        let bank = build_mode_bank(&v.spec).map_err(CliError::config)?;
        for th in &thermals {
            let label = if thermals.len() > 1 {
                [v.label.clone(), format!("nth_{}", th.n_th)].iter().filter(|s| !s.is_empty()).cloned().collect::<Vec<_>>().join("_")
            } else {
                v.label.clone()
            };
            let series = dtop(&bank, &grid, &DtopOptions::default().with_thermal(*th));
            rec.emit_with(&name("dtop", &label, "csv"), |b| write_dtop(b, &header(cfg, &v), &series, c))?;
            if cfg.output.svg {
                let t: Vec<f64> = series.times.iter().map(|t| t / c).collect();
                for (obs, y) in [("nu_D", &series.nu), ("nu_D_dot", &series.nu_dot), ("nu_D_ddot", &series.nu_ddot)] {
                    let s = svg::line_plot(obs, "t", &t, &[(obs, y)]);
                    rec.emit(&name(&format!("dtop_{obs}"), &label, "svg"), s.as_bytes())?;
                }
            }
        }
    }
    Ok(())
}

pub fn fid_cmd(cfg: &RunConfig, rec: &mut Recorder) -> Result<(), CliError> {
    let grid = cfg.time_grid()?;
    let c = cfg.time_scale();
    let thermals = cfg.thermals()?;
    rec.stage("fid");
    let mut curves = Vec::new();
    for v in cfg.variants() {
        let bank = build_mode_bank(&v.spec).map_err(CliError::config)?;
        for th in &thermals {
            let label = if thermals.len() > 1 {
                [v.label.clone(), format!("nth_{}", th.n_th)].iter().filter(|s| !s.is_empty()).cloned().collect::<Vec<_>>().join("_")
            } else {
                v.label.clone()
            };
            let series = fid(&bank, th, &grid);
            rec.emit_with(&name("fid", &label, "csv"), |b| write_fid(b, &header(cfg, &v), &series, c))?;
            curves.push((if label.is_empty() { "fid".to_string() } else { label }, series.fid));
        }
    }
    if cfg.output.svg {
        let t: Vec<f64> = grid.times().iter().map(|t| t / c).collect();
        let refs: Vec<(&str, &[f64])> = curves.iter().map(|(n, y)| (n.as_str(), y.as_slice())).collect();
        rec.emit("fid.svg", svg::line_plot("free-induction decay", "t", &t, &refs).as_bytes())?;
    }
    Ok(())
}

pub fn fisher(cfg: &RunConfig, rec: &mut Recorder) -> Result<(), CliError> {
    let wcfg = cfg
        .complex_window
        .clone()
        .ok_or_else(|| CliError::Config("missing section [complex_window]".into()))?;
    let fixed = cfg.fixed_window()?;
    if fixed.is_none() && wcfg.track.is_empty() {
        return Err(CliError::Config("complex_window needs fixed bounds or track centres".into()));
    }
    let c = cfg.time_scale();
    let eps = cfg.scaling.eps_zero;
    for v in cfg.variants() {
        let h = header(cfg, &v);
        if let Some(window) = fixed {
            if wcfg.symmetry_check && !window.is_symmetric() {
                rec.warn(format!("complex window s = [{}, {}] is not symmetric", window.s_min, window.s_max));
            }
            let mut table = TipTable::default();
            for n in cfg.sizes() {
                rec.stage(&format!("fisher scan N={n}"));
                let bank = build_mode_bank(&v.spec.with_modes(n)).map_err(CliError::config)?;
                let field = scan(&bank, &window)?;
                rec.manifest.clamp_events += field.clamp_events;
                let regions = extract_zero_regions(&field, eps)?;
                let tag = [v.label.clone(), format!("N{n}")].iter().filter(|s| !s.is_empty()).cloned().collect::<Vec<_>>().join("_");
                rec.emit_with(&name("field", &tag, "csv"), |b| write_field(b, &h, &field, c))?;
                rec.emit_with(&name("regions", &tag, "csv"), |b| write_regions(b, &h, &regions, c))?;
                table.cell_heights.insert(n, window.cell_height());
                for r in &regions {
                    table.rows.push(dtpt::fisher::TipRow {
                        n_modes: n,
                        region_id: r.id,
                        t_star: r.tip_t,
                        s_star: r.tip_s,
                        touches_edge: r.touches_edge,
                    });
                }
                if cfg.output.svg {
                    let lines: Vec<Vec<(f64, f64)>> = regions
                        .iter()
                        .flat_map(|r| r.boundary.iter().map(|p| p.iter().map(|&(t, s)| (t / c, s / c)).collect()))
                        .collect();
                    let s = svg::heatmap(
                        &format!("Re Gamma, N = {n}"),
                        &field.re,
                        window.n_t,
                        window.n_s,
                        (window.t_min / c, window.t_max / c),
                        (window.s_min / c, window.s_max / c),
                        &lines,
                    );
                    rec.emit(&name("field", &tag, "svg"), s.as_bytes())?;
                }
            }
            rec.emit_with(&name("tips", &v.label, "csv"), |b| write_tips(b, &h, &table, c))?;
        }
        if !wcfg.track.is_empty() {
            rec.stage("fisher tracking");
            let specs: Vec<_> = cfg.sizes().iter().map(|&n| v.spec.with_modes(n)).collect();
            let mut merged = TipTable::default();
            let mut crossings = Vec::new();
            for &centre in &wcfg.track {
                let window_for = |b: &dtpt::spectrum::ModeBank| {
                    let u = 1.0 / b.max_frequency();
                    ComplexWindow::centered(centre * c, wcfg.track_half_width * u, wcfg.track_s_max * u, wcfg.track_n_t, wcfg.track_n_s)
                        .expect("validated window")
                };
                let table = tongue_tip_trajectory(&specs, window_for, eps)?;
                merged.clamp_events += table.clamp_events;
                merged.cell_heights = table.cell_heights.clone();
                crossings.extend(crossing_times(&table, wcfg.match_tol * c)?);
                merged.rows.extend(table.rows);
            }
            // renumber regions per size so ids stay unique across centres
            let mut next = std::collections::BTreeMap::<usize, usize>::new();
            for row in &mut merged.rows {
                let id = next.entry(row.n_modes).or_insert(0);
                row.region_id = *id;
                *id += 1;
            }
            rec.manifest.clamp_events += merged.clamp_events;
            rec.emit_with(&name("tips_tracked", &v.label, "csv"), |b| write_tips(b, &h, &merged, c))?;
            let rows = crossings.iter().map(|x| {
                vec![
                    format_f64(x.t_c / c),
                    format_f64(x.extrapolated_s / c),
                    x.declared.to_string(),
                    x.sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "),
                    x.s_stars.iter().map(|s| format_f64(s / c)).collect::<Vec<_>>().join(" "),
                ]
            });
            rec.emit_with(&name("crossings", &v.label, "csv"), |b| {
                write_csv(b, &h, &["t_c", "extrapolated_s", "declared", "sizes", "s_stars"], rows)
            })?;
        }
    }
    Ok(())
}

pub fn scaling(cfg: &RunConfig, rec: &mut Recorder) -> Result<(), CliError> {
    let grid = cfg.time_grid()?;
    let sizes = cfg.sizes();
    if sizes.len() < 3 {
        return Err(CliError::Numerical(dtpt::Error::InsufficientSizes {
            needed: 3,
            got: sizes.len(),
        }));
    }
    let c = cfg.time_scale();
    let thermals = cfg.thermals()?;
    for v in cfg.variants() {
        rec.stage(&format!("scaling {}", if v.label.is_empty() { "run" } else { &v.label }));
        let h = header(cfg, &v);
        let analysis = analyze(&v.spec, &sizes, &grid, &cfg.scaling, &cfg.critical_options(), &thermals, c)?;
        let mut summary = Vec::new();
        for (i, p) in analysis.points.iter().enumerate() {
            let tag = [v.label.clone(), format!("tc{i}")].iter().filter(|s| !s.is_empty()).cloned().collect::<Vec<_>>().join("_");
            let fits: Vec<_> = [p.size_fit, p.time_fit, p.power_fit].into_iter().flatten().collect();
            let ph = format!("{h}\ncritical point t_c = {} ({} in {})", format_f64(p.t_c / c), kind_name(p.point.kind), p.point.observable);
            rec.emit_with(&name("fits", &tag, "csv"), |b| write_fits(b, &ph, &fits))?;
            if !p.size_values.is_empty() {
                rec.emit_with(&name("size_scaling", &tag, "csv"), |b| write_size_scaling(b, &ph, &p.size_values))?;
            }
            let (x, f): (Vec<f64>, Vec<f64>) = p.time_values.iter().map(|&(x, f)| (x / c, f)).unzip();
            rec.emit_with(&name("time_scaling", &tag, "csv"), |b| write_time_scaling(b, &ph, &x, &f))?;
            if !p.thermal.is_empty() {
                let rows = p.thermal.iter().map(|t| {
                    vec![format_f64(t.n_th), format_f64(t.fit.kappa), format_f64(t.fit.r2), t.deviates.to_string()]
                });
                rec.emit_with(&name("thermal", &tag, "csv"), |b| write_csv(b, &ph, &["n_th", "exponent", "r2", "deviates"], rows))?;
            }
            for f in &p.failures {
                rec.warn(format!("{tag}: {f}"));
            }
            let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
            summary.push(vec![
                i.to_string(),
                format_f64(p.t_c / c),
                p.point.observable.name().to_string(),
                kind_name(p.point.kind).to_string(),
                opt(p.size_fit.map(|f| f.kappa)),
                opt(p.time_fit.map(|f| f.kappa)),
                opt(p.power_fit.map(|f| f.kappa)),
                opt(p.dynamical_exponent),
            ]);
        }
        rec.emit_with(&name("critical", &v.label, "csv"), |b| {
            write_csv(
                b,
                &h,
                &["index", "t_c", "observable", "kind", "kappa", "kappa_prime", "power_exponent", "dynamical_exponent"],
                summary,
            )
        })?;
    }
    Ok(())
}

fn kind_name(k: KinkType) -> &'static str {
    match k {
        KinkType::LogDivergent => "log-divergent",
        KinkType::DerivativeJump => "derivative-jump",
    }
}
