//! Characteristic quartic of the linearization about the singular solution,
//! its roots, and the explicit linearized pair built from the decay rate.
//!
//! The quartic is symmetric about `λ*`, so with `μ = (λ - λ*)^2` it reduces
//! to the quadratic `μ² - 2(K + 2d²) μ + K² - P = 0` where
//! `K = ((n-2)² - (α-β)²)/4`, `d = (α-β)/2` and `P = pq Q(α) Q(β)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{q_poly, Exponents, ParamsError, SystemParams};

/// Relative threshold on `|F(λ*)| / P` for reporting a double root.
pub const DOUBLE_ROOT_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("Joseph-Lundgren condition fails: F(lambda*) = {f_star:e} < 0, only two real roots")]
    JlFails { f_star: f64 },
    #[error(transparent)]
    Params(#[from] ParamsError),
}

/// `F(λ) = Q(α-λ) Q(β-λ) - pq Q(α) Q(β)`.
pub fn evaluate_f(lambda: f64, exponents: &Exponents, params: &SystemParams) -> f64 {
    let n = params.n();
    q_poly(exponents.alpha - lambda, n) * q_poly(exponents.beta - lambda, n)
        - params.p() * params.q() * exponents.q_alpha * exponents.q_beta
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Sorted ascending: `-λ₁ ≤ -λ₂ ≤ -λ₃ < 0 < λ₄`.
    pub roots: [f64; 4],
    pub lambda_star: f64,
    /// Magnitude of the largest negative root.
    pub gamma: f64,
    pub double_root: bool,
    pub f_at_lambda_star: f64,
    /// `pq Q(α) Q(β)`, the natural scale of `F`.
    pub scale: f64,
}

impl SpectrumResult {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The unstable exponent `λ₄ > 0`.
    pub fn growth_rate(&self) -> f64 {
        self.roots[3]
    }

    /// Decay rate of the next stable mode after `γ`, i.e. `λ₂`.
    pub fn next_decay_rate(&self) -> f64 {
        -self.roots[1]
    }
}

pub fn solve_quartic(exponents: &Exponents, params: &SystemParams) -> Result<SpectrumResult, SpectrumError> {
    let m = 0.5 * (params.dim() - 2.0);
    let d = 0.5 * (exponents.alpha - exponents.beta);
    let k = m * m - d * d;
    let scale = params.p() * params.q() * exponents.q_alpha * exponents.q_beta;
    let f_star = k * k - scale;
    let tol = DOUBLE_ROOT_TOL * scale;
    if f_star < -tol {
        return Err(SpectrumError::JlFails { f_star });
    }
    let double_root = f_star.abs() <= tol;

    // Both μ roots; the smaller one via the product to avoid cancellation.
    let mu_plus = (k + 2.0 * d * d) + (4.0 * d * d * m * m + scale).sqrt();
    let mu_minus = if double_root { 0.0 } else { (f_star / mu_plus).max(0.0) };
    let (outer, inner) = (mu_plus.sqrt(), mu_minus.sqrt());
    let ls = exponents.lambda_star;
    let roots = [ls - outer, ls - inner, ls + inner, ls + outer];
    Ok(SpectrumResult {
        roots,
        lambda_star: ls,
        gamma: -roots[2],
        double_root,
        f_at_lambda_star: f_star,
        scale,
    })
}

pub fn spectrum(params: &SystemParams) -> Result<SpectrumResult, SpectrumError> {
    solve_quartic(&Exponents::new(params), params)
}

/// Explicit solution `(φ, ψ)` of the system linearized about the singular
/// solution, `φ = c r^{-(α+γ)}`, `ψ = r^{-(β+γ)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizedPair {
    pub phi_coefficient: f64,
    pub phi_exponent: f64,
    pub psi_coefficient: f64,
    pub psi_exponent: f64,
}

impl LinearizedPair {
    pub fn phi(&self, r: f64) -> f64 {
        self.phi_coefficient * r.powf(-self.phi_exponent)
    }

    pub fn psi(&self, r: f64) -> f64 {
        self.psi_coefficient * r.powf(-self.psi_exponent)
    }
}

pub fn linearized_pair(
    exponents: &Exponents,
    params: &SystemParams,
    gamma: f64,
) -> Result<LinearizedPair, SpectrumError> {
    let c = exponents.coefficients()?;
    let phi_exponent = exponents.alpha + gamma;
    Ok(LinearizedPair {
        phi_coefficient: params.p() * c.c_beta.powf(params.p() - 1.0) / q_poly(phi_exponent, params.n()),
        phi_exponent,
        psi_coefficient: 1.0,
        psi_exponent: exponents.beta + gamma,
    })
}
