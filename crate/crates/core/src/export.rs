//! CSV writers. Every file opens with `#`-prefixed comment lines carrying the
//! caller's header (normally the resolved run configuration), then one column
//! header line and the data rows. `time_scale` arguments divide every time
//! coordinate (real and imaginary), so files can be written in tau units.

use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::fisher::{AmplitudeField, TipTable, ZeroRegion};
use crate::geometry::{DtopSeries, PhaseSeries};
use crate::loschmidt::FidSeries;
use crate::scaling::ScalingFit;
use crate::spectrum::{ModeBank, SpectralDensityEstimate};

/// Shortest round-trip decimal; scientific notation outside [1e-4, 1e15).
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_csv<W, I>(out: &mut W, header: &str, columns: &[&str], rows: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = Vec<String>>,
{
    for line in header.lines() {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "{}", columns.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn floats(values: &[f64]) -> Vec<String> {
    values.iter().map(|&v| format_f64(v)).collect()
}

pub fn write_modes<W: Write>(out: &mut W, header: &str, bank: &ModeBank) -> io::Result<()> {
    let rows = (0..bank.len()).map(|k| {
        let mut row = vec![k.to_string()];
        row.extend(floats(&[bank.frequencies()[k], bank.couplings()[k]]));
        row
    });
    write_csv(out, header, &["k", "omega", "g"], rows)
}

pub fn write_spectral_density<W: Write>(out: &mut W, header: &str, est: &SpectralDensityEstimate) -> io::Result<()> {
    let rows = est
        .centers
        .iter()
        .zip(&est.density)
        .map(|(&c, &d)| floats(&[c, d]));
    write_csv(out, header, &["omega", "density"], rows)
}

pub fn write_phase<W: Write>(out: &mut W, header: &str, series: &PhaseSeries, time_scale: f64) -> io::Result<()> {
    let rows = series
        .times
        .iter()
        .zip(&series.values)
        .map(|(&t, &v)| floats(&[t / time_scale, v]));
    write_csv(out, header, &["t", "phi_G"], rows)
}

pub fn write_dtop<W: Write>(out: &mut W, header: &str, series: &DtopSeries, time_scale: f64) -> io::Result<()> {
    let rows = (0..series.len()).map(|i| {
        floats(&[
            series.times[i] / time_scale,
            series.nu[i],
            series.nu_dot[i],
            series.nu_ddot[i],
        ])
    });
    write_csv(out, header, &["t", "nu_D", "nu_D_dot", "nu_D_ddot"], rows)
}

pub fn write_fid<W: Write>(out: &mut W, header: &str, series: &FidSeries, time_scale: f64) -> io::Result<()> {
    let rows = (0..series.times.len()).map(|i| floats(&[series.times[i] / time_scale, series.gamma[i], series.fid[i]]));
    write_csv(out, header, &["t", "gamma", "fid"], rows)
}

/// Row-major over the window: s outer, t inner.
pub fn write_field<W: Write>(out: &mut W, header: &str, field: &AmplitudeField, time_scale: f64) -> io::Result<()> {
    let w = &field.window;
    let c = time_scale;
    let geometry = format!(
        "window t=[{}, {}] s=[{}, {}] n_t={} n_s={} row-major (s outer, t inner)",
        format_f64(w.t_min / c),
        format_f64(w.t_max / c),
        format_f64(w.s_min / c),
        format_f64(w.s_max / c),
        w.n_t,
        w.n_s
    );
    let header = if header.is_empty() {
        geometry
    } else {
        format!("{header}\n{geometry}")
    };
    let rows = (0..w.n_s).flat_map(|j| {
        (0..w.n_t).map(move |i| floats(&[w.t_at(i) / c, w.s_at(j) / c, field.re_at(i, j), field.im_at(i, j)]))
    });
    write_csv(out, &header, &["t", "s", "re_gamma", "im_gamma"], rows)
}

pub fn write_regions<W: Write>(out: &mut W, header: &str, regions: &[ZeroRegion], time_scale: f64) -> io::Result<()> {
    let rows = regions.iter().flat_map(|r| {
        r.boundary_points().map(move |&(t, s)| {
            let mut row = vec![r.id.to_string()];
            row.extend(floats(&[t / time_scale, s / time_scale]));
            row
        })
    });
    write_csv(out, header, &["region_id", "t", "s"], rows)
}

pub fn write_tips<W: Write>(out: &mut W, header: &str, table: &TipTable, time_scale: f64) -> io::Result<()> {
    let rows = table.rows.iter().map(|r| {
        let mut row = vec![r.n_modes.to_string(), r.region_id.to_string()];
        row.extend(floats(&[r.t_star / time_scale, r.s_star / time_scale]));
        row
    });
    write_csv(out, header, &["N", "region_id", "t_star", "s_star"], rows)
}

/// Critical values against system size.
pub fn write_size_scaling<W: Write>(out: &mut W, header: &str, values: &BTreeMap<usize, f64>) -> io::Result<()> {
    let rows = values.iter().map(|(n, &f)| vec![n.to_string(), format_f64(f)]);
    write_csv(out, header, &["N", "f_tc"], rows)
}

pub fn write_time_scaling<W: Write>(out: &mut W, header: &str, offsets: &[f64], values: &[f64]) -> io::Result<()> {
    let rows = offsets.iter().zip(values).map(|(&x, &f)| floats(&[x, f]));
    write_csv(out, header, &["t_offset", "f"], rows)
}

/// The window column is `lo:hi`.
pub fn write_fits<W: Write>(out: &mut W, header: &str, fits: &[ScalingFit]) -> io::Result<()> {
    let rows = fits.iter().map(|f| {
        vec![
            f.model.as_str().to_string(),
            format_f64(f.kappa),
            format_f64(f.upsilon),
            format_f64(f.r2),
            format!("{}:{}", format_f64(f.window.0), format_f64(f.window.1)),
        ]
    });
    write_csv(out, header, &["model", "kappa", "upsilon", "r2", "window"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{build_mode_bank, SpectrumSpec};

    fn text(f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn float_format_switches_to_exponent() {
        assert_eq!(format_f64(0.5), "0.5");
        assert_eq!(format_f64(1e-5), "1e-5");
        assert_eq!(format_f64(-2.5e20), "-2.5e20");
        assert_eq!(format_f64(0.0), "0");
        for v in [1.234567890123e-7, std::f64::consts::PI, 6.02e23] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn modes_file_layout() {
        let bank = build_mode_bank(&SpectrumSpec::membrane(4, 1.0, 0.75, 0.8)).unwrap();
        let s = text(|b| write_modes(b, "kind = \"membrane\"\nn_modes = 4", &bank));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# kind = \"membrane\"");
        assert_eq!(lines[2], "k,omega,g");
        assert_eq!(lines[3], "0,0.75,0.8");
        assert_eq!(lines.len(), 3 + 4);
    }

    #[test]
    fn empty_regions_write_header_only() {
        let s = text(|b| write_regions(b, "", &[], 1.0));
        assert_eq!(s, "region_id,t,s\n");
    }
}
