//! The subcommands. Every file is written in full by one thread.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hle_core::asymptotics::{
    check_family_ordering, check_monotone_convergence, check_separation, fit_expansion, fit_expansion_on,
    select_window, ExpansionFit, FitMode, MonotoneReport, OrderingReport, SeparationReport,
};
use hle_core::evolve::{
    discrete_envelopes, evolve, linearized_perturbation, scale_to_norm, Discretization, EvolutionHistory,
    EvolutionState, NormMode, NormWeights, Scheme,
};
use hle_core::io::{fmt_f64, write_profile_csv, write_profile_header, write_snapshots_csv, write_time_series_csv};
use hle_core::params::{jl_boundary_p, CriticalityReport, Existence, JlStatus};
use hle_core::shooter::{check_preconditions, family_member, shoot, ShootResult};
use hle_core::spectrum::{linearized_pair, spectrum, SpectrumResult};
use hle_core::{Exponents, RadialGrid, SteadyProfile, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Command, Perturbation, RunConfig};
use crate::error::CliError;

pub const CLASSIFY_FILE: &str = "classify.json";
pub const REGION_MAP_FILE: &str = "region_map.csv";
pub const CONFIG_FILE: &str = "config.json";
pub const PROFILE_CSV: &str = "profile.csv";
pub const PROFILE_JSON: &str = "profile.json";
pub const STEADY_FILE: &str = "steady.json";
pub const FIT_FILE: &str = "fit.json";
pub const TIME_SERIES_FILE: &str = "time_series.csv";
pub const SQUEEZE_FILE: &str = "squeeze_series.csv";
pub const SNAPSHOT_FILE: &str = "snapshots.csv";
pub const EVOLUTION_FILE: &str = "evolution.json";
pub const SUMMARY_FILE: &str = "summary.json";

pub const REGION_COLUMNS: [&str; 5] = ["p", "q", "classification", "existence_margin", "jl_margin"];

/// Where a parameter point sits relative to the existence and
/// Joseph-Lundgren conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    NoExistence,
    ExistenceOnly,
    JlStrict,
    JlEqualityBand,
}

impl Region {
    pub fn of(report: &CriticalityReport) -> Self {
        match (report.existence, report.jl) {
            (Existence::Fails | Existence::Equality, _) => Region::NoExistence,
            (_, JlStatus::Strict) => Region::JlStrict,
            (_, JlStatus::Equality) => Region::JlEqualityBand,
            _ => Region::ExistenceOnly,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Region::NoExistence => "no-existence",
            Region::ExistenceOnly => "existence-only",
            Region::JlStrict => "jl-strict",
            Region::JlEqualityBand => "jl-equality-band",
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JlMarginOut {
    pub lhs: f64,
    pub rhs: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyOut {
    pub params: SystemParams,
    pub alpha: f64,
    pub beta: f64,
    pub c_alpha: Option<f64>,
    pub c_beta: Option<f64>,
    pub lambda_star: f64,
    pub existence: Existence,
    pub jl: JlStatus,
    pub classification: Region,
    pub existence_margin: f64,
    pub existence_margin_exponents: f64,
    pub jl_margin: JlMarginOut,
    pub spectrum: Option<SpectrumResult>,
}

pub fn classify_params(params: &SystemParams, eq_tol: f64) -> ClassifyOut {
    let e = Exponents::new(params);
    let report = CriticalityReport::new(params, eq_tol);
    let spectrum = if report.existence == Existence::Strict && report.jl.holds() {
        spectrum(params).ok()
    } else {
        None
    };
    ClassifyOut {
        params: *params,
        alpha: e.alpha,
        beta: e.beta,
        c_alpha: e.coefficients.map(|c| c.c_alpha),
        c_beta: e.coefficients.map(|c| c.c_beta),
        lambda_star: e.lambda_star,
        existence: report.existence,
        jl: report.jl,
        classification: Region::of(&report),
        existence_margin: report.existence_margin.sobolev,
        existence_margin_exponents: report.existence_margin.exponent_sum,
        jl_margin: JlMarginOut {
            lhs: report.jl_margin.lhs,
            rhs: report.jl_margin.rhs,
            relative: report.jl_margin.relative(),
        },
        spectrum,
    }
}

/// The configured parameters, moved onto the Joseph-Lundgren boundary if
/// requested.
pub fn resolve_params(cfg: &RunConfig) -> Result<SystemParams, CliError> {
    match cfg.jl_boundary {
        None => Ok(cfg.params),
        Some(b) => Ok(jl_boundary_p(&cfg.params, b.path, b.bracket)?.params),
    }
}

pub fn run_classify(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let params = resolve_params(cfg)?;
    write_json(out, CLASSIFY_FILE, &classify_params(&params, cfg.eq_tol))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCell {
    pub p: f64,
    pub q: f64,
    pub region: Region,
    pub existence_margin: f64,
    pub jl_margin: f64,
}

/// One cell per `(p, q)`, `p`-major. Without a `q` range, `q = p`.
pub fn region_map(cfg: &RunConfig) -> Result<Vec<RegionCell>, CliError> {
    let ps = cfg.sweep.p.values();
    let points: Vec<(f64, f64)> = match &cfg.sweep.q {
        None => ps.iter().map(|&p| (p, p)).collect(),
        Some(q) => {
            let qs = q.values();
            ps.iter().flat_map(|&p| qs.iter().map(move |&q| (p, q))).collect()
        }
    };
    points
        .par_iter()
        .map(|&(p, q)| {
            let params = cfg.params.with_pq(p, q)?;
            let report = CriticalityReport::new(&params, cfg.eq_tol);
            Ok(RegionCell {
                p,
                q,
                region: Region::of(&report),
                existence_margin: report.existence_margin.sobolev,
                jl_margin: report.jl_margin.relative(),
            })
        })
        .collect()
}

pub fn run_sweep(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let cells = region_map(cfg)?;
    let mut w = csv::Writer::from_writer(create(out, REGION_MAP_FILE)?);
    w.write_record(REGION_COLUMNS)?;
    for c in &cells {
        w.write_record([
            fmt_f64(c.p),
            fmt_f64(c.q),
            c.region.label().to_string(),
            fmt_f64(c.existence_margin),
            fmt_f64(c.jl_margin),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Property {
    pub name: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderingOut {
    pub xi_hi: f64,
    pub xi_lo: f64,
    pub report: OrderingReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteadyOut {
    pub params: SystemParams,
    pub shoot: ShootResult,
    pub monotone: MonotoneReport,
    pub separation: SeparationReport,
    pub ordering: Vec<OrderingOut>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOut {
    pub alpha: f64,
    pub beta: f64,
    pub c_alpha: f64,
    pub c_beta: f64,
    pub fit: ExpansionFit,
    /// Residual of the pure power model on the same window, for equality
    /// runs.
    pub strict_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionOut {
    pub xi: f64,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
    pub nodes: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub gamma: f64,
    pub norm_mode: NormMode,
    pub perturbation: Perturbation,
    pub initial_norm: f64,
    pub growth_plain: f64,
    pub growth_log: f64,
    pub growth_bound: f64,
    pub growth_bound_note: String,
    pub min_u: f64,
    pub min_v: f64,
    pub theta: Option<f64>,
    pub squeeze_ok: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub command: Command,
    pub params: SystemParams,
    pub fit_mode: FitMode,
    pub c0: f64,
    pub gamma: f64,
    pub gamma_fit: Option<f64>,
    pub properties: Vec<Property>,
    pub passed: bool,
}

fn finish(out: &Path, summary: Summary) -> Result<(), CliError> {
    write_json(out, SUMMARY_FILE, &summary)?;
    let failed: Vec<String> = summary
        .properties
        .iter()
        .filter(|p| !p.pass)
        .map(|p| p.name.clone())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Property(failed))
    }
}

/// Smooth weights in `[0.1, 0.9]`: a sum of random Gaussian bumps in
/// `log r` around 1/2.
pub fn bump_weights(rng: &mut ChaCha8Rng, grid: &RadialGrid) -> Vec<f64> {
    let s = grid.log_nodes();
    let (lo, hi) = (s[0], s[s.len() - 1]);
    let bumps: Vec<(f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(lo..hi),
                rng.random_range(0.5..3.0),
            )
        })
        .collect();
    s.iter()
        .map(|&x| {
            let b: f64 = bumps.iter().map(|(a, c, w)| a * (-((x - c) / w).powi(2)).exp()).sum();
            (0.5 + 0.4 * b).clamp(0.1, 0.9)
        })
        .collect()
}

fn sorted_family(xis: &[f64]) -> Vec<f64> {
    let mut v = xis.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

pub fn run_pipeline(cfg: &RunConfig, command: Command, out: &Path) -> Result<(), CliError> {
    let params = resolve_params(cfg)?;
    check_preconditions(&params)?;
    let spec = spectrum(&params)?;
    let mode = FitMode::for_spectrum(&spec);
    let shot = shoot(&params, &cfg.shoot)?;
    let profile = shot.profile;
    write_json(out, CONFIG_FILE, cfg)?;
    let mut w = create(out, PROFILE_CSV)?;
    write_profile_csv(&profile, &mut w)?;
    w.flush()?;
    let mut w = create(out, PROFILE_JSON)?;
    write_profile_header(&profile, &mut w)?;
    w.write_all(b"\n")?;
    w.flush()?;

    let xis = sorted_family(&cfg.xi_family);
    let members: Vec<SteadyProfile> = xis
        .par_iter()
        .map(|&xi| family_member(&profile, xi))
        .collect::<Result<_, _>>()?;
    let mut ordering = Vec::new();
    for i in 1..members.len() {
        ordering.push(OrderingOut {
            xi_hi: xis[i],
            xi_lo: xis[i - 1],
            report: check_family_ordering(&members[i], &members[i - 1])?,
        });
    }
    let steady = SteadyOut {
        params,
        shoot: shot.result,
        monotone: check_monotone_convergence(&profile),
        separation: check_separation(&profile),
        ordering,
    };
    write_json(out, STEADY_FILE, &steady)?;
    let mut props = vec![
        Property {
            name: "monotone".into(),
            pass: steady.monotone.ok,
        },
        Property {
            name: "separation".into(),
            pass: steady.separation.ok,
        },
        Property {
            name: "family_ordering".into(),
            pass: steady.ordering.iter().all(|o| o.report.ok && !o.report.degenerate),
        },
    ];
    let mut summary = Summary {
        command,
        params,
        fit_mode: mode,
        c0: steady.shoot.c0,
        gamma: spec.gamma(),
        gamma_fit: None,
        properties: Vec::new(),
        passed: false,
    };
    if command == Command::Steady {
        summary.passed = props.iter().all(|p| p.pass);
        summary.properties = props;
        return finish(out, summary);
    }

    let fit = fit_expansion(&profile, &spec, mode, &cfg.window)?;
    let strict_residual = if mode == FitMode::Equality {
        let range = select_window(&profile, &cfg.window, mode).expect("fit succeeded on this window");
        Some(fit_expansion_on(&profile, &spec, FitMode::Strict, range, cfg.window.min_points)?.residual)
    } else {
        None
    };
    let e = profile.exponents();
    let c = e.coefficients()?;
    props.push(Property {
        name: "fit_rate".into(),
        pass: fit.relative_gamma_error() <= cfg.fit_tol,
    });
    props.push(Property {
        name: "fit_signs".into(),
        pass: fit.signs_ok,
    });
    if let Some(sr) = strict_residual {
        props.push(Property {
            name: "fit_log_model_preferred".into(),
            pass: fit.residual < sr,
        });
    }
    summary.gamma_fit = Some(fit.gamma_fit);
    write_json(
        out,
        FIT_FILE,
        &FitOut {
            alpha: e.alpha,
            beta: e.beta,
            c_alpha: c.c_alpha,
            c_beta: c.c_beta,
            fit,
            strict_residual,
        },
    )?;
    if command == Command::Asymptotics {
        summary.passed = props.iter().all(|p| p.pass);
        summary.properties = props;
        return finish(out, summary);
    }

    let ev = evolve_stage(cfg, &profile, &spec, out)?;
    props.push(Property {
        name: "bounded_growth".into(),
        pass: ev.0,
    });
    props.push(Property {
        name: "positivity".into(),
        pass: ev.1,
    });
    if let Some(sq) = ev.2 {
        props.push(Property {
            name: "squeeze".into(),
            pass: sq,
        });
    }
    summary.passed = props.iter().all(|p| p.pass);
    summary.properties = props;
    finish(out, summary)
}

fn write_history(out: &Path, name: &str, h: &EvolutionHistory) -> Result<(), CliError> {
    let mut w = create(out, name)?;
    write_time_series_csv(&h.records, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Runs the perturbation and squeeze evolutions. Returns bounded growth,
/// positivity and the squeeze verdict.
fn evolve_stage(
    cfg: &RunConfig,
    profile: &SteadyProfile,
    spec: &SpectrumResult,
    out: &Path,
) -> Result<(bool, bool, Option<bool>), CliError> {
    let set = &cfg.evolve;
    let d = &set.discretization;
    let grid = d.grid()?;
    let params = *profile.params();
    let mut disc = Discretization::from_profile(profile, set.xi, grid.clone())?;
    disc.polish_reference()?;
    let weights = NormWeights {
        exponents: *profile.exponents(),
        gamma: spec.gamma(),
    };
    let norm_mode = if spec.double_root {
        NormMode::Log
    } else {
        NormMode::Plain
    };

    let m = grid.len();
    let (mut du, mut dv) = match set.perturbation {
        Perturbation::Linearized => {
            linearized_perturbation(&grid, &linearized_pair(&weights.exponents, &params, spec.gamma())?)
        }
        Perturbation::Bump => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(1);
            let bu = bump_weights(&mut rng, &grid);
            let bv = bump_weights(&mut rng, &grid);
            (0..m)
                .map(|i| {
                    if i + 1 == m {
                        (0.0, 0.0)
                    } else {
                        (disc.u_ref[i] * (bu[i] - 0.5), disc.v_ref[i] * (bv[i] - 0.5))
                    }
                })
                .unzip()
        }
    };
    scale_to_norm(&mut du, &mut dv, &grid, &weights, norm_mode, set.amplitude)?;
    let h = evolve(
        &disc,
        EvolutionState::new(du, dv),
        d.scheme,
        d.dt,
        d.t_final,
        d.record_every,
        &weights,
        None,
        set.snapshots,
    )?;
    write_history(out, TIME_SERIES_FILE, &h)?;
    if set.snapshots {
        let mut w = create(out, SNAPSHOT_FILE)?;
        write_snapshots_csv(&h, &grid, &weights.exponents, &mut w)?;
        w.flush()?;
    }
    let growth = h.growth(norm_mode);
    let min_u = h.records.iter().map(|r| r.min_u).fold(f64::INFINITY, f64::min);
    let min_v = h.records.iter().map(|r| r.min_v).fold(f64::INFINITY, f64::min);

    let squeeze = if set.squeeze {
        let env = discrete_envelopes(&disc, profile, set.xi, d.theta_family)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let wu = bump_weights(&mut rng, &grid);
        let wv = bump_weights(&mut rng, &grid);
        let (su, sv) = env.interpolate(&wu, &wv);
        let hs = evolve(
            &disc,
            EvolutionState::new(su, sv),
            d.scheme,
            d.dt,
            d.t_final,
            d.record_every,
            &weights,
            Some(&env),
            false,
        )?;
        write_history(out, SQUEEZE_FILE, &hs)?;
        hs.squeeze_ok
    } else {
        None
    };

    let meta = EvolutionOut {
        xi: set.xi,
        scheme: d.scheme,
        dt: d.dt,
        t_final: d.t_final,
        nodes: d.nodes,
        r_min: d.r_min,
        r_max: d.r_max,
        gamma: spec.gamma(),
        norm_mode,
        perturbation: set.perturbation,
        initial_norm: set.amplitude,
        growth_plain: h.growth(NormMode::Plain),
        growth_log: h.growth(NormMode::Log),
        growth_bound: set.growth_bound,
        growth_bound_note:
            "operational convention: bounded growth of the weighted norm over the run, not a proof of stability".into(),
        min_u,
        min_v,
        theta: set.squeeze.then_some(d.theta_family),
        squeeze_ok: squeeze,
    };
    write_json(out, EVOLUTION_FILE, &meta)?;
    Ok((growth <= set.growth_bound, min_u > 0.0 && min_v > 0.0, squeeze))
}
