//! Checks of the qualitative properties of regular solutions and fits of
//! the two-term tail expansion
//!
//! ```text
//!   u = C_α r^{-α} + D₁ r^{-α-γ} (log r)^m + ...,   m ∈ {0, 1}
//! ```
//!
//! where `m = 1` exactly when the characteristic quartic has a double root.
//! All comparisons go through the stored deficits `1 - 𝒰`, `1 - 𝒱`, which
//! stay accurate far into the tail.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::SteadyProfile;
use crate::spectrum::SpectrumResult;

/// Tolerance on discrete decreases of `𝒰`, `𝒱`.
pub const MONOTONE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("profiles live on different grids")]
    GridMismatch,
    #[error("profiles belong to different parameter sets")]
    ParamsMismatch,
    #[error("fit window holds {points} nodes, need at least {min}")]
    TailTooShort { points: usize, min: usize },
    #[error("{requested:?} fit requested but the spectrum {reason}")]
    WrongMode { requested: FitMode, reason: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub ok: bool,
    /// Smallest discrete increment of `𝒰` or `𝒱` between neighbouring nodes.
    pub margin: f64,
    pub terminal_deficit_u: f64,
    pub terminal_deficit_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub ok: bool,
    /// `min (u* - u)/u*, (v* - v)/v*` over the grid.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub ok: bool,
    /// `min (u_hi - u_lo)/u_lo, (v_hi - v_lo)/v_lo` over the grid.
    pub margin: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualitativeReport {
    pub monotone: MonotoneReport,
    pub separation: SeparationReport,
    pub ordering: Option<OrderingReport>,
}

impl QualitativeReport {
    pub fn all_ok(&self) -> bool {
        self.monotone.ok && self.separation.ok && self.ordering.is_none_or(|o| o.ok)
    }
}

pub fn check_monotone_convergence(profile: &SteadyProfile) -> MonotoneReport {
    let st = profile.states();
    let margin = st
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]).min(w[1][2] - w[0][2]))
        .fold(f64::INFINITY, f64::min);
    let last = st.last().copied().unwrap_or([0.0; 4]);
    MonotoneReport {
        ok: margin >= -MONOTONE_TOL,
        margin,
        terminal_deficit_u: -last[0],
        terminal_deficit_v: -last[2],
    }
}

pub fn check_separation(profile: &SteadyProfile) -> SeparationReport {
    let margin = profile
        .states()
        .iter()
        .map(|x| (-x[0]).min(-x[2]))
        .fold(f64::INFINITY, f64::min);
    SeparationReport {
        ok: margin > 0.0,
        margin,
    }
}

/// Strict ordering `u_hi > u_lo`, `v_hi > v_lo` at every node, for two
/// members of the same family with `ξ_hi > ξ_lo`.
pub fn check_family_ordering(hi: &SteadyProfile, lo: &SteadyProfile) -> Result<OrderingReport, AsymptoticsError> {
    if hi.params() != lo.params() {
        return Err(AsymptoticsError::ParamsMismatch);
    }
    if hi.grid() != lo.grid() {
        return Err(AsymptoticsError::GridMismatch);
    }
    let margin = hi
        .states()
        .iter()
        .zip(lo.states())
        .map(|(a, b)| ((a[0] - b[0]) / (1.0 + b[0])).min((a[2] - b[2]) / (1.0 + b[2])))
        .fold(f64::INFINITY, f64::min);
    let degenerate = hi.xi() == lo.xi();
    Ok(OrderingReport {
        ok: !degenerate && margin > 0.0,
        margin,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// Pure power correction.
    Strict,
    /// Power correction with a `log r` factor.
    Equality,
}

impl FitMode {
    pub fn for_spectrum(spectrum: &SpectrumResult) -> Self {
        if spectrum.double_root {
            FitMode::Equality
        } else {
            FitMode::Strict
        }
    }
}

/// Fit window selected by the size of `1 - 𝒰`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSpec {
    pub deficit_min: f64,
    pub deficit_max: f64,
    pub min_points: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            deficit_min: 1e-20,
            deficit_max: 1e-10,
            min_points: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentFit {
    /// Coefficient of the correction term in physical variables.
    pub coefficient: f64,
    pub gamma: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the regression.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub mode: FitMode,
    pub d1: f64,
    pub d2: f64,
    pub gamma_fit: f64,
    pub gamma_fit_v: f64,
    pub gamma_spectral: f64,
    /// `[s_lo, s_hi]` in `s = log r`.
    pub fit_window: (f64, f64),
    pub points: usize,
    pub residual: f64,
    pub residual_v: f64,
    /// Rate gap `min(2γ, λ₂) - γ` to the next term of the expansion.
    pub remainder_gap: f64,
    /// `D₁ < 0` and `D₂ < 0`.
    pub signs_ok: bool,
}

impl ExpansionFit {
    pub fn relative_gamma_error(&self) -> f64 {
        (self.gamma_fit - self.gamma_spectral).abs() / self.gamma_spectral
    }
}

fn check_mode(spectrum: &SpectrumResult, mode: FitMode) -> Result<(), AsymptoticsError> {
    match (mode, spectrum.double_root) {
        (FitMode::Strict, true) => Err(AsymptoticsError::WrongMode {
            requested: mode,
            reason: "has a double root",
        }),
        (FitMode::Equality, false) => Err(AsymptoticsError::WrongMode {
            requested: mode,
            reason: "has simple roots",
        }),
        _ => Ok(()),
    }
}

/// The `s`-interval of nodes whose `1 - 𝒰` lies in the window.
pub fn select_window(profile: &SteadyProfile, window: &WindowSpec, mode: FitMode) -> Option<(f64, f64)> {
    let s = profile.grid().log_nodes();
    let mut range: Option<(f64, f64)> = None;
    for (si, x) in s.iter().zip(profile.states()) {
        let d = -x[0];
        if d >= window.deficit_min && d <= window.deficit_max && (mode == FitMode::Strict || *si > 0.0) {
            range = Some(match range {
                None => (*si, *si),
                Some((a, _)) => (a, *si),
            });
        }
    }
    range
}

/// Fits the expansion on nodes whose deficit lies in `window`.
pub fn fit_expansion(
    profile: &SteadyProfile,
    spectrum: &SpectrumResult,
    mode: FitMode,
    window: &WindowSpec,
) -> Result<ExpansionFit, AsymptoticsError> {
    check_mode(spectrum, mode)?;
    let Some(range) = select_window(profile, window, mode) else {
        return Err(AsymptoticsError::TailTooShort {
            points: 0,
            min: window.min_points,
        });
    };
    fit_expansion_on(profile, spectrum, mode, range, window.min_points)
}

/// Fits the expansion on the nodes with `s` in `[range.0, range.1]`,
/// without checking the mode against the spectrum.
pub fn fit_expansion_on(
    profile: &SteadyProfile,
    spectrum: &SpectrumResult,
    mode: FitMode,
    range: (f64, f64),
    min_points: usize,
) -> Result<ExpansionFit, AsymptoticsError> {
    let s = profile.grid().log_nodes();
    let mut pts_u = Vec::new();
    let mut pts_v = Vec::new();
    for (&si, x) in s.iter().zip(profile.states()) {
        if si < range.0 || si > range.1 || (mode == FitMode::Equality && si <= 0.0) {
            continue;
        }
        let shift = if mode == FitMode::Equality { si.ln() } else { 0.0 };
        if x[0] < 0.0 {
            pts_u.push((si, (-x[0]).ln() - shift));
        }
        if x[2] < 0.0 {
            pts_v.push((si, (-x[2]).ln() - shift));
        }
    }
    let points = pts_u.len().min(pts_v.len());
    if points < min_points.max(3) {
        return Err(AsymptoticsError::TailTooShort {
            points,
            min: min_points.max(3),
        });
    }
    let c = profile.exponents().coefficients.expect("profile has coefficients");
    let fu = regress(&pts_u, c.c_alpha);
    let fv = regress(&pts_v, c.c_beta);
    let gamma = spectrum.gamma;
    Ok(ExpansionFit {
        mode,
        d1: fu.coefficient,
        d2: fv.coefficient,
        gamma_fit: fu.gamma,
        gamma_fit_v: fv.gamma,
        gamma_spectral: gamma,
        fit_window: range,
        points,
        residual: fu.residual,
        residual_v: fv.residual,
        remainder_gap: (2.0 * gamma).min(spectrum.next_decay_rate()) - gamma,
        signs_ok: fu.coefficient < 0.0 && fv.coefficient < 0.0,
    })
}

/// Least-squares line through `(s, log|deficit|)`.
fn regress(pts: &[(f64, f64)], scale: f64) -> ComponentFit {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    ComponentFit {
        coefficient: -scale * intercept.exp(),
        gamma: -slope,
        intercept,
        residual: (ss / n).sqrt(),
    }
}

/// Two-term reconstruction `C r^{-a} + D r^{-a-γ} (log r)^m`.
pub fn expansion_value(c: f64, a: f64, d: f64, gamma: f64, mode: FitMode, r: f64) -> f64 {
    let log_factor = if mode == FitMode::Equality { r.ln() } else { 1.0 };
    c * r.powf(-a) + d * r.powf(-a - gamma) * log_factor
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::params::SystemParams;
    use crate::spectrum::spectrum;

    fn synthetic(mode: FitMode, d: f64, g: f64) -> SteadyProfile {
        let params = SystemParams::new(11, 0.0, 0.0, 7.0, 7.0).unwrap();
        let grid = RadialGrid::new(1.0, 1e6, 401).unwrap();
        let states = grid
            .log_nodes()
            .iter()
            .map(|&s| {
                let (y, dy) = match mode {
                    FitMode::Strict => (d * (-g * s).exp(), -g * d * (-g * s).exp()),
                    FitMode::Equality => (d * s * (-g * s).exp(), d * (1.0 - g * s) * (-g * s).exp()),
                };
                [y, dy, y, dy]
            })
            .collect();
        SteadyProfile::from_states(params, grid, 1.0, 1.0, states).unwrap()
    }

    #[test]
    fn recovers_exact_power_model() {
        let p = synthetic(FitMode::Strict, -0.3, 3.7);
        let spec = spectrum(p.params()).unwrap();
        let fit = fit_expansion(&p, &spec, FitMode::Strict, &WindowSpec::default()).unwrap();
        let ca = p.exponents().c_alpha().unwrap();
        assert!((fit.gamma_fit / 3.7 - 1.0).abs() < 1e-10);
        assert!((fit.d1 / (-0.3 * ca) - 1.0).abs() < 1e-10);
        assert!(fit.residual < 1e-10);
        assert!(fit.signs_ok);
    }

    #[test]
    fn mode_must_match_spectrum() {
        let p = synthetic(FitMode::Strict, -0.3, 4.0);
        let spec = spectrum(p.params()).unwrap();
        let err = fit_expansion(&p, &spec, FitMode::Equality, &WindowSpec::default()).unwrap_err();
        assert!(matches!(err, AsymptoticsError::WrongMode { .. }));
    }

    #[test]
    fn empty_window_is_too_short() {
        let p = synthetic(FitMode::Strict, -1e-30, 4.0);
        let spec = spectrum(p.params()).unwrap();
        let err = fit_expansion(&p, &spec, FitMode::Strict, &WindowSpec::default()).unwrap_err();
        assert!(matches!(err, AsymptoticsError::TailTooShort { .. }));
    }

    #[test]
    fn expansion_value_matches_states() {
        let p = synthetic(FitMode::Equality, -0.5, 4.0);
        let c = p.exponents().c_alpha().unwrap();
        let a = p.exponents().alpha;
        for (i, &r) in p.grid().nodes().iter().enumerate().step_by(50) {
            let u = expansion_value(c, a, -0.5 * c, 4.0, FitMode::Equality, r);
            assert!((u / p.u()[i] - 1.0).abs() < 1e-13);
        }
    }
}
