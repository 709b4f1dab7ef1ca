//! Radial parabolic flow `u_t = Δu + r^k v^p`, `v_t = Δv + r^l u^q` near a
//! steady state, on a truncated log grid.
//!
//! The unknowns are the perturbations `δ = (u - u_ref, v - v_ref)` about a
//! fixed reference, advanced by
//!
//! ```text
//!   δ_t = L δ + τ + G(δ),   G_u(δ) = r^k ((v_ref + δ_v)₊^p - v_ref^p),
//! ```
//!
//! where `L` is the discrete radial Laplacian and `τ = L u_ref + r^k v_ref^p`
//! the residual of the reference. Working with `δ` keeps differences between
//! neighbouring steady states resolvable where they are far below the
//! rounding level of `u` itself. The outermost node is pinned to its
//! initial value.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridError, RadialGrid};
use crate::params::{Exponents, ParamsError, SystemParams};
use crate::profile::SteadyProfile;
use crate::shooter::{family_states, ShootError};
use crate::spectrum::LinearizedPair;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolveError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Shoot(#[from] ShootError),
    #[error("radial Laplacian needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("invalid evolution settings: {0}")]
    Config(String),
    #[error("linear solve failed: zero pivot at row {0}")]
    Singular(usize),
    #[error("Newton iteration for a discrete steady state did not converge (last relative update {0:e})")]
    Newton(f64),
    #[error("blow-up or instability detected at t = {0}")]
    BlowUp(f64),
    #[error("field length {got} does not match the grid ({expected})")]
    Length { got: usize, expected: usize },
}

/// Three-point discrete Laplacian on a log grid.
///
/// Interior rows use the conservative form `r^{-n} (r^{n-2} f_s)_s` with
/// central differences in `s`; all off-diagonal weights are positive. The
/// innermost node treats the field as even about the origin,
/// `Δf ≈ 2n (f₁ - f₀)/(r₁² - r₀²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialLaplacian {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl RadialLaplacian {
    pub fn new(grid: &RadialGrid, n: u32) -> Result<Self, EvolveError> {
        let m = grid.len();
        if m < 3 {
            return Err(EvolveError::TooFewNodes(m));
        }
        let r = grid.nodes();
        let h = grid.log_step();
        let half = 0.5 * (n as f64 - 2.0) * h;
        let (ep, em) = (half.exp(), (-half).exp());
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let c0 = 2.0 * n as f64 / (r[1] * r[1] - r[0] * r[0]);
        upper[0] = c0;
        diag[0] = -c0;
        for i in 1..m {
            let w = 1.0 / (r[i] * r[i] * h * h);
            lower[i] = em * w;
            upper[i] = if i + 1 < m { ep * w } else { 0.0 };
            diag[i] = -(em * w + ep * w);
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `(L f)_i` for every node but the last.
    fn apply_row(&self, f: &[f64], i: usize) -> f64 {
        let mut acc = self.diag[i] * f[i];
        if i > 0 {
            acc += self.lower[i] * f[i - 1];
        }
        if i + 1 < f.len() {
            acc += self.upper[i] * f[i + 1];
        }
        acc
    }
}

/// Discrete Laplacian of a radial field. The last node uses a quadratically
/// extrapolated ghost value.
pub fn radial_laplacian(field: &[f64], grid: &RadialGrid, n: u32) -> Result<Vec<f64>, EvolveError> {
    let lap = RadialLaplacian::new(grid, n)?;
    if field.len() != grid.len() {
        return Err(EvolveError::Length {
            got: field.len(),
            expected: grid.len(),
        });
    }
    let m = field.len();
    let mut out: Vec<f64> = (0..m - 1).map(|i| lap.apply_row(field, i)).collect();
    let ghost = 3.0 * field[m - 1] - 3.0 * field[m - 2] + field[m - 3];
    let r = grid.nodes()[m - 1];
    let h = grid.log_step();
    let half = 0.5 * (n as f64 - 2.0) * h;
    let w = 1.0 / (r * r * h * h);
    out.push(w * ((-half).exp() * (field[m - 2] - field[m - 1]) + half.exp() * (ghost - field[m - 1])));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// `sup (1+r)^{α+γ}|δu| + (1+r)^{β+γ}|δv|`
    Plain,
    /// The same divided by `log(2 + r)`.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorm {
    pub value: f64,
    pub mode: NormMode,
    pub gamma: f64,
}

pub fn weighted_norm(
    du: &[f64],
    dv: &[f64],
    grid: &RadialGrid,
    exponents: &Exponents,
    gamma: f64,
    mode: NormMode,
) -> WeightedNorm {
    let (a, b) = (exponents.alpha + gamma, exponents.beta + gamma);
    let value = grid
        .nodes()
        .iter()
        .zip(du.iter().zip(dv))
        .map(|(&r, (x, y))| {
            let s = (1.0 + r).powf(a) * x.abs() + (1.0 + r).powf(b) * y.abs();
            match mode {
                NormMode::Plain => s,
                NormMode::Log => s / (2.0 + r).ln(),
            }
        })
        .fold(0.0, f64::max);
    WeightedNorm { value, mode, gamma }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Implicit Euler diffusion, explicit Euler reaction. Monotone.
    ImexEuler,
    /// Crank-Nicolson diffusion, second-order Adams-Bashforth reaction.
    CrankNicolson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Offset `θ` of the comparison envelopes `ξ ± θ`.
    pub theta_family: f64,
    pub scheme: Scheme,
    /// Record monitors every this many steps.
    pub record_every: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            r_min: 1e-4,
            r_max: 1e4,
            nodes: 401,
            dt: 0.01,
            t_final: 10.0,
            theta_family: 0.1,
            scheme: Scheme::ImexEuler,
            record_every: 10,
        }
    }
}

impl EvolutionConfig {
    pub fn grid(&self) -> Result<RadialGrid, EvolveError> {
        Ok(RadialGrid::new(self.r_min, self.r_max, self.nodes)?)
    }

    pub fn validate(&self, xi: f64) -> Result<(), EvolveError> {
        if !(self.dt > 0.0 && self.t_final > 0.0 && self.dt.is_finite() && self.t_final.is_finite()) {
            return Err(EvolveError::Config(format!(
                "dt = {} and T = {} must be positive",
                self.dt, self.t_final
            )));
        }
        if !(self.theta_family > 0.0 && self.theta_family < 0.5 * xi) {
            return Err(EvolveError::Config(format!(
                "theta = {} must lie in (0, xi/2) with xi = {xi}",
                self.theta_family
            )));
        }
        if self.record_every == 0 {
            return Err(EvolveError::Config("record_every must be positive".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// `(ref + d)₊^m - ref^m`, accurate when `|d| ≪ ref`.
fn reaction_increment(reference: f64, d: f64, m: f64) -> f64 {
    if reference > 0.0 {
        let x = d / reference;
        let dev = if x <= -1.0 { -1.0 } else { (m * x.ln_1p()).exp_m1() };
        reference.powf(m) * dev
    } else {
        (reference + d).max(0.0).powf(m) - reference.max(0.0).powf(m)
    }
}

/// `d/dd (ref + d)₊^m`.
fn reaction_slope(reference: f64, d: f64, m: f64) -> f64 {
    let w = (reference + d).max(0.0);
    if w == 0.0 {
        0.0
    } else {
        m * w.powf(m - 1.0)
    }
}

/// Spatial operator, weights and reference state of a discretized problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub params: SystemParams,
    pub grid: RadialGrid,
    pub lap: RadialLaplacian,
    weight_u: Vec<f64>,
    weight_v: Vec<f64>,
    pub u_ref: Vec<f64>,
    pub v_ref: Vec<f64>,
    pub tau_u: Vec<f64>,
    pub tau_v: Vec<f64>,
}

impl Discretization {
    /// Reference `(u_ref, v_ref)` with its discrete residual as forcing.
    pub fn new(params: SystemParams, grid: RadialGrid, u_ref: Vec<f64>, v_ref: Vec<f64>) -> Result<Self, EvolveError> {
        for f in [&u_ref, &v_ref] {
            if f.len() != grid.len() {
                return Err(EvolveError::Length {
                    got: f.len(),
                    expected: grid.len(),
                });
            }
        }
        let lap = RadialLaplacian::new(&grid, params.n())?;
        let r = grid.nodes();
        let weight_u: Vec<f64> = r.iter().map(|x| x.powf(params.k())).collect();
        let weight_v: Vec<f64> = r.iter().map(|x| x.powf(params.l())).collect();
        let m = grid.len();
        let mut tau_u = vec![0.0; m];
        let mut tau_v = vec![0.0; m];
        for i in 0..m - 1 {
            tau_u[i] = lap.apply_row(&u_ref, i) + weight_u[i] * v_ref[i].max(0.0).powf(params.p());
            tau_v[i] = lap.apply_row(&v_ref, i) + weight_v[i] * u_ref[i].max(0.0).powf(params.q());
        }
        Ok(Self {
            params,
            grid,
            lap,
            weight_u,
            weight_v,
            u_ref,
            v_ref,
            tau_u,
            tau_v,
        })
    }

    /// The trivial reference `u = v = 0`.
    pub fn zero(params: SystemParams, grid: RadialGrid) -> Result<Self, EvolveError> {
        let m = grid.len();
        Self::new(params, grid, vec![0.0; m], vec![0.0; m])
    }

    /// Samples the family member `ξ` of `profile` on `grid` as reference.
    pub fn from_profile(profile: &SteadyProfile, xi: f64, grid: RadialGrid) -> Result<Self, EvolveError> {
        let (u, v) = sample_family(profile, xi, &grid)?;
        Self::new(*profile.params(), grid, u, v)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Replaces the reference by the discrete steady state with the same
    /// value at `r_max`, and treats it as exact (`τ = 0`) afterwards.
    pub fn polish_reference(&mut self) -> Result<(), EvolveError> {
        let m = self.len();
        let d = self.steady_state(vec![0.0; m], vec![0.0; m])?;
        for i in 0..m {
            self.u_ref[i] += d.0[i];
            self.v_ref[i] += d.1[i];
        }
        self.tau_u.iter_mut().for_each(|x| *x = 0.0);
        self.tau_v.iter_mut().for_each(|x| *x = 0.0);
        Ok(())
    }

    fn reaction(&self, du: &[f64], dv: &[f64], gu: &mut [f64], gv: &mut [f64]) {
        let (p, q) = (self.params.p(), self.params.q());
        for i in 0..self.len() {
            gu[i] = self.tau_u[i] + self.weight_u[i] * reaction_increment(self.v_ref[i], dv[i], p);
            gv[i] = self.tau_v[i] + self.weight_v[i] * reaction_increment(self.u_ref[i], du[i], q);
        }
    }

    /// Solves `L δ + τ + G(δ) = 0` by Newton's method, starting from the
    /// given perturbation, whose last entries are kept fixed.
    pub fn steady_state(&self, mut du: Vec<f64>, mut dv: Vec<f64>) -> Result<(Vec<f64>, Vec<f64>), EvolveError> {
        let m = self.len();
        let (p, q) = (self.params.p(), self.params.q());
        let unknowns = 2 * (m - 1);
        let mut band = Band::new(unknowns);
        let mut rhs = vec![0.0; unknowns];
        let mut gu = vec![0.0; m];
        let mut gv = vec![0.0; m];
        let mut last = f64::INFINITY;
        for _ in 0..60 {
            self.reaction(&du, &dv, &mut gu, &mut gv);
            band.clear();
            for i in 0..m - 1 {
                let (ru, rv) = (2 * i, 2 * i + 1);
                rhs[ru] = -(self.lap.apply_row(&du, i) + gu[i]);
                rhs[rv] = -(self.lap.apply_row(&dv, i) + gv[i]);
                band.set(ru, ru, self.lap.diag[i]);
                band.set(rv, rv, self.lap.diag[i]);
                band.set(ru, rv, self.weight_u[i] * reaction_slope(self.v_ref[i], dv[i], p));
                band.set(rv, ru, self.weight_v[i] * reaction_slope(self.u_ref[i], du[i], q));
                if i > 0 {
                    band.set(ru, ru - 2, self.lap.lower[i]);
                    band.set(rv, rv - 2, self.lap.lower[i]);
                }
                if i + 2 < m {
                    band.set(ru, ru + 2, self.lap.upper[i]);
                    band.set(rv, rv + 2, self.lap.upper[i]);
                }
            }
            band.solve(&mut rhs)?;
            let mut rel = 0.0f64;
            for i in 0..m - 1 {
                for (x, dx) in [(&mut du[i], rhs[2 * i]), (&mut dv[i], rhs[2 * i + 1])] {
                    *x += dx;
                    let scale = x.abs().max(f64::MIN_POSITIVE);
                    rel = rel.max(dx.abs() / scale);
                }
            }
            if !rel.is_finite() {
                return Err(EvolveError::Newton(rel));
            }
            if rel <= 1e-13 || (rel <= 1e-10 && rel >= 0.5 * last) {
                return Ok((du, dv));
            }
            last = rel;
        }
        if last <= 1e-8 {
            Ok((du, dv))
        } else {
            Err(EvolveError::Newton(last))
        }
    }
}

/// Physical fields `(u, v)` of the family member `ξ` on `grid`.
pub fn sample_family(profile: &SteadyProfile, xi: f64, grid: &RadialGrid) -> Result<(Vec<f64>, Vec<f64>), EvolveError> {
    let states = family_states(profile, xi, grid.log_nodes())?;
    let e = profile.exponents();
    let c = e.coefficients()?;
    Ok(grid
        .nodes()
        .iter()
        .zip(&states)
        .map(|(&r, x)| {
            (
                c.c_alpha * r.powf(-e.alpha) * (1.0 + x[0]),
                c.c_beta * r.powf(-e.beta) * (1.0 + x[2]),
            )
        })
        .unzip())
}

/// Differences `u_{ξ'} - u_ξ`, `v_{ξ'} - v_ξ` on `grid`, formed from the
/// deficits so they stay accurate where both are close to the singular
/// solution.
pub fn family_offset(
    profile: &SteadyProfile,
    xi: f64,
    xi_other: f64,
    grid: &RadialGrid,
) -> Result<(Vec<f64>, Vec<f64>), EvolveError> {
    let a = family_states(profile, xi, grid.log_nodes())?;
    let b = family_states(profile, xi_other, grid.log_nodes())?;
    let e = profile.exponents();
    let c = e.coefficients()?;
    Ok(grid
        .nodes()
        .iter()
        .zip(a.iter().zip(&b))
        .map(|(&r, (x, y))| {
            (
                c.c_alpha * r.powf(-e.alpha) * (y[0] - x[0]),
                c.c_beta * r.powf(-e.beta) * (y[2] - x[2]),
            )
        })
        .unzip())
}

/// Lower and upper comparison states, stored as perturbations of the
/// reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelopes {
    pub lower_u: Vec<f64>,
    pub lower_v: Vec<f64>,
    pub upper_u: Vec<f64>,
    pub upper_v: Vec<f64>,
}

impl Envelopes {
    /// True when the envelopes fail to be strictly ordered somewhere.
    pub fn is_degenerate(&self) -> bool {
        self.lower_u.iter().zip(&self.upper_u).any(|(a, b)| a >= b)
            || self.lower_v.iter().zip(&self.upper_v).any(|(a, b)| a >= b)
    }

    /// `lower + (upper - lower) w` with `w` taken per node.
    pub fn interpolate(&self, wu: &[f64], wv: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mix = |lo: &[f64], hi: &[f64], w: &[f64]| -> Vec<f64> {
            lo.iter().zip(hi).zip(w).map(|((a, b), t)| a + (b - a) * t).collect()
        };
        (
            mix(&self.lower_u, &self.upper_u, wu),
            mix(&self.lower_v, &self.upper_v, wv),
        )
    }
}

/// Discrete steady states of the scheme next to the family members
/// `ξ ± θ`, relative to a polished reference for member `ξ`.
pub fn discrete_envelopes(
    disc: &Discretization,
    profile: &SteadyProfile,
    xi: f64,
    theta: f64,
) -> Result<Envelopes, EvolveError> {
    let solve = |other: f64| -> Result<(Vec<f64>, Vec<f64>), EvolveError> {
        let (mut du, mut dv) = family_offset(profile, xi, other, &disc.grid)?;
        // Start from the continuous offset measured against the discrete reference.
        let (uc, vc) = sample_family(profile, xi, &disc.grid)?;
        let m = disc.len();
        for i in 0..m - 1 {
            du[i] -= disc.u_ref[i] - uc[i];
            dv[i] -= disc.v_ref[i] - vc[i];
        }
        disc.steady_state(du, dv)
    };
    let (lower_u, lower_v) = solve(xi - theta)?;
    let (upper_u, upper_v) = solve(xi + theta)?;
    Ok(Envelopes {
        lower_u,
        lower_v,
        upper_u,
        upper_v,
    })
}

/// Strict pointwise `lower < δ < upper` for each component, or `None` when
/// the envelopes are degenerate.
pub fn comparison_monitor(du: &[f64], dv: &[f64], env: &Envelopes) -> Option<(bool, bool)> {
    if env.is_degenerate() {
        return None;
    }
    let inside = |x: &[f64], lo: &[f64], hi: &[f64]| x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| a < v && v < b);
    Some((
        inside(du, &env.lower_u, &env.upper_u),
        inside(dv, &env.lower_v, &env.upper_v),
    ))
}

/// Banded matrix with two sub- and super-diagonals, factored in place
/// without pivoting.
#[derive(Debug, Clone)]
struct Band {
    n: usize,
    /// Row-major, 5 entries per row for offsets -2..=2.
    a: Vec<f64>,
}

impl Band {
    fn new(n: usize) -> Self {
        Self { n, a: vec![0.0; 5 * n] }
    }

    fn clear(&mut self) {
        self.a.iter_mut().for_each(|x| *x = 0.0);
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        5 * i + (j + 2 - i)
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.a[k] = v;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[self.idx(i, j)]
    }

    fn solve(&mut self, b: &mut [f64]) -> Result<(), EvolveError> {
        let n = self.n;
        for k in 0..n {
            let piv = self.get(k, k);
            if piv == 0.0 || !piv.is_finite() {
                return Err(EvolveError::Singular(k));
            }
            for i in k + 1..(k + 3).min(n) {
                let f = self.get(i, k) / piv;
                if f == 0.0 {
                    continue;
                }
                for j in k + 1..(k + 3).min(n) {
                    let v = self.get(i, j) - f * self.get(k, j);
                    self.set(i, j, v);
                }
                b[i] -= f * b[k];
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..(k + 3).min(n) {
                acc -= self.get(k, j) * b[j];
            }
            b[k] = acc / self.get(k, k);
        }
        Ok(())
    }
}

/// Prefactored tridiagonal system `(I - c L)` with the last row pinned.
#[derive(Debug, Clone)]
struct Tridiagonal {
    lower: Vec<f64>,
    /// Reciprocals of the eliminated diagonal.
    inv_diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    fn new(lap: &RadialLaplacian, c: f64) -> Result<Self, EvolveError> {
        let m = lap.len();
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for i in 0..m - 1 {
            lower[i] = -c * lap.lower[i];
            diag[i] = 1.0 - c * lap.diag[i];
            upper[i] = -c * lap.upper[i];
        }
        diag[m - 1] = 1.0;
        let mut inv_diag = vec![0.0; m];
        for i in 0..m {
            let d = if i == 0 {
                diag[0]
            } else {
                diag[i] - lower[i] * upper[i - 1] * inv_diag[i - 1]
            };
            if d == 0.0 || !d.is_finite() {
                return Err(EvolveError::Singular(i));
            }
            inv_diag[i] = 1.0 / d;
        }
        Ok(Self { lower, inv_diag, upper })
    }

    fn solve(&self, b: &mut [f64]) {
        let m = b.len();
        for i in 1..m {
            b[i] -= self.lower[i] * self.inv_diag[i - 1] * b[i - 1];
        }
        b[m - 1] *= self.inv_diag[m - 1];
        for i in (0..m - 1).rev() {
            b[i] = (b[i] - self.upper[i] * b[i + 1]) * self.inv_diag[i];
        }
    }
}

/// `(φ, ψ)(max(r, 1))`, vanishing at the pinned last node.
pub fn linearized_perturbation(grid: &RadialGrid, pair: &LinearizedPair) -> (Vec<f64>, Vec<f64>) {
    let m = grid.len();
    grid.nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            if i + 1 == m {
                (0.0, 0.0)
            } else {
                (pair.phi(r.max(1.0)), pair.psi(r.max(1.0)))
            }
        })
        .unzip()
}

/// Rescales `(du, dv)` in place to weighted norm `target`; returns the factor.
pub fn scale_to_norm(
    du: &mut [f64],
    dv: &mut [f64],
    grid: &RadialGrid,
    weights: &NormWeights,
    mode: NormMode,
    target: f64,
) -> Result<f64, EvolveError> {
    let n = weighted_norm(du, dv, grid, &weights.exponents, weights.gamma, mode).value;
    if !(n > 0.0 && n.is_finite()) {
        return Err(EvolveError::Config(format!(
            "cannot rescale a perturbation of norm {n}"
        )));
    }
    let c = target / n;
    du.iter_mut().chain(dv.iter_mut()).for_each(|x| *x *= c);
    Ok(c)
}

/// Perturbation fields at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub t: f64,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

impl EvolutionState {
    pub fn new(du: Vec<f64>, dv: Vec<f64>) -> Self {
        Self { t: 0.0, du, dv }
    }
}

pub struct Stepper<'a> {
    disc: &'a Discretization,
    scheme: Scheme,
    dt: f64,
    solver: Tridiagonal,
    pinned: (f64, f64),
    previous: Option<(Vec<f64>, Vec<f64>)>,
    gu: Vec<f64>,
    gv: Vec<f64>,
}

impl<'a> Stepper<'a> {
    /// The last node of `initial` is held fixed for the whole run.
    pub fn new(
        disc: &'a Discretization,
        scheme: Scheme,
        dt: f64,
        initial: &EvolutionState,
    ) -> Result<Self, EvolveError> {
        let m = disc.len();
        for f in [&initial.du, &initial.dv] {
            if f.len() != m {
                return Err(EvolveError::Length {
                    got: f.len(),
                    expected: m,
                });
            }
        }
        let c = match scheme {
            Scheme::ImexEuler => dt,
            Scheme::CrankNicolson => 0.5 * dt,
        };
        Ok(Self {
            disc,
            scheme,
            dt,
            solver: Tridiagonal::new(&disc.lap, c)?,
            pinned: (initial.du[m - 1], initial.dv[m - 1]),
            previous: None,
            gu: vec![0.0; m],
            gv: vec![0.0; m],
        })
    }

    pub fn step(&mut self, state: &mut EvolutionState) -> Result<(), EvolveError> {
        let m = self.disc.len();
        let dt = self.dt;
        self.disc.reaction(&state.du, &state.dv, &mut self.gu, &mut self.gv);
        let (mut bu, mut bv) = match self.scheme {
            Scheme::ImexEuler => (
                (0..m).map(|i| state.du[i] + dt * self.gu[i]).collect::<Vec<_>>(),
                (0..m).map(|i| state.dv[i] + dt * self.gv[i]).collect::<Vec<_>>(),
            ),
            Scheme::CrankNicolson => {
                let (pu, pv) = self
                    .previous
                    .take()
                    .unwrap_or_else(|| (self.gu.clone(), self.gv.clone()));
                let lap = &self.disc.lap;
                let bu = (0..m)
                    .map(|i| {
                        let l = if i + 1 < m { lap.apply_row(&state.du, i) } else { 0.0 };
                        state.du[i] + 0.5 * dt * l + dt * (1.5 * self.gu[i] - 0.5 * pu[i])
                    })
                    .collect();
                let bv = (0..m)
                    .map(|i| {
                        let l = if i + 1 < m { lap.apply_row(&state.dv, i) } else { 0.0 };
                        state.dv[i] + 0.5 * dt * l + dt * (1.5 * self.gv[i] - 0.5 * pv[i])
                    })
                    .collect();
                self.previous = Some((self.gu.clone(), self.gv.clone()));
                (bu, bv)
            }
        };
        bu[m - 1] = self.pinned.0;
        bv[m - 1] = self.pinned.1;
        self.solver.solve(&mut bu);
        self.solver.solve(&mut bv);
        state.t += dt;
        if bu.iter().chain(&bv).any(|x| !x.is_finite()) {
            return Err(EvolveError::BlowUp(state.t));
        }
        state.du = bu;
        state.dv = bv;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRecord {
    pub t: f64,
    pub norm_plain: f64,
    pub norm_log: f64,
    /// Squeeze held at every step since the previous record.
    pub squeeze_u: Option<bool>,
    pub squeeze_v: Option<bool>,
    pub min_u: f64,
    pub min_v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionHistory {
    pub records: Vec<EvolutionRecord>,
    pub final_state: EvolutionState,
    /// Squeeze held at every step, when envelopes were supplied and not
    /// degenerate.
    pub squeeze_ok: Option<bool>,
    /// Snapshots of `(u, v)` at recorded times, if requested.
    pub snapshots: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

impl EvolutionHistory {
    /// Largest recorded norm over the first one.
    pub fn growth(&self, mode: NormMode) -> f64 {
        let pick = |r: &EvolutionRecord| match mode {
            NormMode::Plain => r.norm_plain,
            NormMode::Log => r.norm_log,
        };
        let first = pick(&self.records[0]);
        self.records.iter().map(pick).fold(0.0, f64::max) / first
    }
}

/// Norm weights used by the monitors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormWeights {
    pub exponents: Exponents,
    pub gamma: f64,
}

/// Advances `initial` to `t_final`, recording monitors every
/// `record_every` steps (and at both ends).
#[allow(clippy::too_many_arguments)]
pub fn evolve(
    disc: &Discretization,
    initial: EvolutionState,
    scheme: Scheme,
    dt: f64,
    t_final: f64,
    record_every: usize,
    weights: &NormWeights,
    envelopes: Option<&Envelopes>,
    snapshots: bool,
) -> Result<EvolutionHistory, EvolveError> {
    let mut stepper = Stepper::new(disc, scheme, dt, &initial)?;
    let steps = (t_final / dt).round() as usize;
    let envelopes = envelopes.filter(|e| !e.is_degenerate());
    let mut state = initial;
    let mut records = Vec::new();
    let mut snaps = Vec::new();
    let mut window = (true, true);
    let mut all = (true, true);
    let mut record = |state: &EvolutionState, window: (bool, bool), snaps: &mut Vec<_>| {
        let u: Vec<f64> = disc.u_ref.iter().zip(&state.du).map(|(a, b)| a + b).collect();
        let v: Vec<f64> = disc.v_ref.iter().zip(&state.dv).map(|(a, b)| a + b).collect();
        let e = &weights.exponents;
        records.push(EvolutionRecord {
            t: state.t,
            norm_plain: weighted_norm(&state.du, &state.dv, &disc.grid, e, weights.gamma, NormMode::Plain).value,
            norm_log: weighted_norm(&state.du, &state.dv, &disc.grid, e, weights.gamma, NormMode::Log).value,
            squeeze_u: envelopes.map(|_| window.0),
            squeeze_v: envelopes.map(|_| window.1),
            min_u: u.iter().copied().fold(f64::INFINITY, f64::min),
            min_v: v.iter().copied().fold(f64::INFINITY, f64::min),
        });
        if snapshots {
            snaps.push((state.t, u, v));
        }
    };
    if let Some(env) = envelopes {
        let (a, b) = comparison_monitor(&state.du, &state.dv, env).expect("not degenerate");
        window = (a, b);
        all = (a, b);
    }
    record(&state, window, &mut snaps);
    for k in 1..=steps {
        stepper.step(&mut state)?;
        if let Some(env) = envelopes {
            let (a, b) = comparison_monitor(&state.du, &state.dv, env).expect("not degenerate");
            window = (window.0 && a, window.1 && b);
            all = (all.0 && a, all.1 && b);
        }
        if k % record_every == 0 || k == steps {
            record(&state, window, &mut snaps);
            window = (true, true);
        }
    }
    Ok(EvolutionHistory {
        records,
        final_state: state,
        squeeze_ok: envelopes.map(|_| all.0 && all.1),
        snapshots: snaps,
    })
}
