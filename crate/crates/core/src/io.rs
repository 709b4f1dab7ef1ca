//! CSV and JSON forms of profiles and evolution histories.
//!
//! Floats are written with 17 significant digits so every value re-reads to
//! the same double.

use std::io::{Read, Write};

use thiserror::Error;

use crate::evolve::{EvolutionHistory, EvolutionRecord};
use crate::grid::{GridError, RadialGrid};
use crate::params::{Exponents, ParamsError};
use crate::profile::{ProfileHeader, SteadyProfile};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("malformed table: {0}")]
    Format(String),
}

pub const PROFILE_COLUMNS: [&str; 11] = [
    "r",
    "u",
    "v",
    "du",
    "dv",
    "U_norm",
    "V_norm",
    "U_deficit",
    "V_deficit",
    "U_slope",
    "V_slope",
];

pub const TIME_SERIES_COLUMNS: [&str; 7] = [
    "t",
    "norm_plain",
    "norm_log",
    "squeeze_u",
    "squeeze_v",
    "min_u",
    "min_v",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_flag(x: Option<bool>) -> &'static str {
    match x {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    }
}

/// One row per node. The deficit and slope columns carry `1 - 𝒰`, `1 - 𝒱`
/// and `d𝒰/ds`, `d𝒱/ds`, from which the profile is rebuilt on load.
pub fn write_profile_csv<W: Write>(profile: &SteadyProfile, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROFILE_COLUMNS)?;
    let (uu, vv) = profile.normalized();
    for (i, &r) in profile.grid().nodes().iter().enumerate() {
        let x = profile.states()[i];
        let row = [
            r,
            profile.u()[i],
            profile.v()[i],
            profile.du()[i],
            profile.dv()[i],
            uu[i],
            vv[i],
            -x[0],
            -x[2],
            x[1],
            x[3],
        ];
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile_header<W: Write>(profile: &SteadyProfile, out: W) -> Result<(), IoError> {
    serde_json::to_writer_pretty(out, &profile.header())?;
    Ok(())
}

pub fn read_profile_header<R: Read>(input: R) -> Result<ProfileHeader, IoError> {
    Ok(serde_json::from_reader(input)?)
}

/// Rebuilds a profile from its header and CSV table.
pub fn read_profile<R: Read>(header: &ProfileHeader, table: R) -> Result<SteadyProfile, IoError> {
    let grid = RadialGrid::try_from(header.grid)?;
    let mut rd = csv::Reader::from_reader(table);
    let names = rd.headers()?.clone();
    let col = |name: &str| {
        names
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IoError::Format(format!("missing column {name}")))
    };
    let (iy, iz, iyp, izp) = (col("U_deficit")?, col("V_deficit")?, col("U_slope")?, col("V_slope")?);
    let mut states = Vec::with_capacity(grid.len());
    for rec in rd.records() {
        let rec = rec?;
        let get = |i: usize| -> Result<f64, IoError> {
            rec.get(i)
                .ok_or_else(|| IoError::Format("short row".into()))?
                .parse::<f64>()
                .map_err(|e| IoError::Format(e.to_string()))
        };
        states.push([-get(iy)?, get(iyp)?, -get(iz)?, get(izp)?]);
    }
    if states.len() != grid.len() {
        return Err(IoError::Format(format!(
            "{} rows for a grid of {}",
            states.len(),
            grid.len()
        )));
    }
    Ok(SteadyProfile::from_states(
        header.params,
        grid,
        header.xi,
        header.c0,
        states,
    )?)
}

pub fn write_time_series_csv<W: Write>(records: &[EvolutionRecord], out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TIME_SERIES_COLUMNS)?;
    for r in records {
        w.write_record([
            fmt_f64(r.t),
            fmt_f64(r.norm_plain),
            fmt_f64(r.norm_log),
            fmt_flag(r.squeeze_u).to_string(),
            fmt_flag(r.squeeze_v).to_string(),
            fmt_f64(r.min_u),
            fmt_f64(r.min_v),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Field snapshots in the profile layout, prefixed with `t`. Derivatives
/// are central differences in `log r`; the deficit and slope columns are
/// left out.
pub fn write_snapshots_csv<W: Write>(
    history: &EvolutionHistory,
    grid: &RadialGrid,
    exponents: &Exponents,
    out: W,
) -> Result<(), IoError> {
    let c = exponents.coefficients()?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once("t").chain(PROFILE_COLUMNS[..7].iter().copied()))?;
    let r = grid.nodes();
    let du_dr = |f: &[f64], i: usize| {
        let m = f.len();
        let (a, b) = if i == 0 {
            (0, 1)
        } else if i + 1 == m {
            (m - 2, m - 1)
        } else {
            (i - 1, i + 1)
        };
        (f[b] - f[a]) / (r[b] - r[a])
    };
    for (t, u, v) in &history.snapshots {
        for i in 0..r.len() {
            let row = [
                *t,
                r[i],
                u[i],
                v[i],
                du_dr(u, i),
                du_dr(v, i),
                u[i] / (c.c_alpha * r[i].powf(-exponents.alpha)),
                v[i] / (c.c_beta * r[i].powf(-exponents.beta)),
            ];
            w.write_record(row.iter().map(|x| fmt_f64(*x)))?;
        }
    }
    w.flush()?;
    Ok(())
}
