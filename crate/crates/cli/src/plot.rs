//! Long-format `(series, x, y)` table for external plotting.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use hle_core::asymptotics::FitMode;
use hle_core::io::{fmt_f64, read_profile, read_profile_header};
use hle_core::params::singular_solution;

use crate::commands::{FitOut, FIT_FILE, PROFILE_CSV, PROFILE_JSON, TIME_SERIES_FILE};
use crate::error::CliError;

pub const PLOT_FILE: &str = "plot_data.csv";

fn open(dir: &Path, name: &str) -> Result<BufReader<File>, CliError> {
    let path = dir.join(name);
    File::open(&path)
        .map(BufReader::new)
        .map_err(|_| CliError::MissingArtifact(path.display().to_string()))
}

fn open_optional(dir: &Path, name: &str) -> Result<Option<BufReader<File>>, CliError> {
    match dir.join(name).exists() {
        true => open(dir, name).map(Some),
        false => Ok(None),
    }
}

/// Reads the artifacts in `dir` and writes the plot table there.
pub fn run_plotdata(dir: &Path) -> Result<(), CliError> {
    let header = read_profile_header(open(dir, PROFILE_JSON)?)?;
    let profile = read_profile(&header, open(dir, PROFILE_CSV)?)?;
    let mut rows: Vec<(&str, f64, f64)> = Vec::new();

    let r = profile.grid().nodes();
    let sing = singular_solution(profile.params())?;
    let (uu, vv) = profile.normalized();
    for (name, y) in [("u", profile.u()), ("v", profile.v())] {
        rows.extend(r.iter().zip(y).map(|(&x, &y)| (name, x, y)));
    }
    rows.extend(r.iter().map(|&x| ("u_star", x, sing.u(x))));
    rows.extend(r.iter().map(|&x| ("v_star", x, sing.v(x))));
    rows.extend(r.iter().zip(&uu).map(|(&x, &y)| ("U_norm", x, y)));
    rows.extend(r.iter().zip(&vv).map(|(&x, &y)| ("V_norm", x, y)));

    if let Some(f) = open_optional(dir, FIT_FILE)? {
        let fit: FitOut = serde_json::from_reader(f)?;
        let (lo, hi) = fit.fit.fit_window;
        let (du, _) = profile.deficits();
        let s = profile.grid().log_nodes();
        let window: Vec<usize> = (0..s.len()).filter(|&i| s[i] >= lo && s[i] <= hi).collect();
        let log = |x: f64| if fit.fit.mode == FitMode::Equality { x.ln() } else { 1.0 };
        rows.extend(window.iter().map(|&i| ("U_deficit", r[i], du[i])));
        rows.extend(window.iter().map(|&i| {
            (
                "U_deficit_fit",
                r[i],
                -fit.fit.d1 / fit.c_alpha * r[i].powf(-fit.fit.gamma_fit) * log(r[i]),
            )
        }));
    }

    if let Some(f) = open_optional(dir, TIME_SERIES_FILE)? {
        let mut rd = csv::Reader::from_reader(f);
        let names = rd.headers()?.clone();
        let col = |n: &str| {
            names
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| CliError::MissingArtifact(format!("{TIME_SERIES_FILE} column {n}")))
        };
        let (it, ip, il) = (col("t")?, col("norm_plain")?, col("norm_log")?);
        let mut plain = Vec::new();
        let mut log = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let get = |i: usize| -> Result<f64, CliError> {
                rec[i]
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad number {:?} in {TIME_SERIES_FILE}", &rec[i])))
            };
            plain.push(("norm_plain", get(it)?, get(ip)?));
            log.push(("norm_log", get(it)?, get(il)?));
        }
        rows.extend(plain);
        rows.extend(log);
    }

    let mut w = csv::Writer::from_writer(File::create(dir.join(PLOT_FILE))?);
    w.write_record(["series", "x", "y"])?;
    for (name, x, y) in rows {
        w.write_record([name.to_string(), fmt_f64(x), fmt_f64(y)])?;
    }
    w.flush()?;
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))?.flush()?;
    Ok(())
}
