//! CSV serialization.

use std::io::Write;
use std::path::{Path, PathBuf};

use geomopt_core::Report;

use crate::error::{CliError, CliResult};

pub const TRAJECTORY_HEADER: [&str; 8] = [
    "iter",
    "objective",
    "gap",
    "gradmap_norm",
    "active_size",
    "jaccard",
    "cone_ratio",
    "contraction",
];

pub const SCALING_HEADER: [&str; 10] = [
    "dim",
    "ensemble",
    "trial",
    "H_support_closed",
    "H_face_enumerated_or_NA",
    "sigma_min_support",
    "L_global",
    "L_support",
    "identified",
    "H_global",
];

pub const REPORT_HEADER: [&str; 15] = [
    "restriction",
    "L",
    "L_K",
    "H",
    "H_method",
    "H_K",
    "HK_method",
    "nu_K",
    "nu_provenance",
    "mu_K",
    "gamma_lb",
    "delta_star",
    "kappa",
    "kappa_K",
    "B_norm",
];

/// 17 significant digits; `inf`, `-inf`, `NaN` for non-finite values.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), num)
}

pub fn report_row(label: &str, r: &Report) -> Vec<String> {
    vec![
        label.to_string(),
        num(r.l),
        num(r.l_k),
        opt(r.h.as_ref().map(|h| h.value)),
        r.h.as_ref().map_or("NA", |h| h.method.name()).to_string(),
        opt(r.h_k.as_ref().map(|h| h.value)),
        r.h_k.as_ref().map_or("NA", |h| h.method.name()).to_string(),
        num(r.nu_k),
        r.nu_provenance.name().to_string(),
        num(r.mu_k),
        opt(r.gamma_lb),
        opt(r.delta_star),
        num(r.kappa),
        num(r.kappa_k),
        opt(r.b_norm),
    ]
}

/// Renders a CSV document (LF line endings, header always present).
pub fn render_csv(header: &[&str], rows: &[Vec<String>], timestamp: bool) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    if timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        writeln!(buf, "# generated {secs}").expect("write to memory");
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(buf);
    let csv_err = |e: csv::Error| CliError::Config(format!("csv: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Config(format!("csv: {e}")))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `out` with `suffix` appended to the full file name.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(opt(None), "NA");
    }

    #[test]
    fn header_only_document() {
        let bytes = render_csv(&TRAJECTORY_HEADER, &[], false).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "iter,objective,gap,gradmap_norm,active_size,jaccard,cone_ratio,contraction\n"
        );
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("a/b.csv"), ".solution"), PathBuf::from("a/b.csv.solution"));
    }
}
