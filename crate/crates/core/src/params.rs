//! System parameters, scaling exponents and the existence / Joseph-Lundgren
//! classifiers for the Hénon-Lane-Emden system
//!
//! ```text
//!   -Δu = |x|^k v^p,   -Δv = |x|^l u^q   in R^n.
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance used to report equality in the two classifiers.
pub const DEFAULT_EQ_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("dimension n = {0} is below 3")]
    Dimension(u32),
    #[error("weight exponent {name} = {value} must be finite and nonnegative")]
    Weight { name: &'static str, value: f64 },
    #[error("reaction exponent {name} = {value} must be finite and at least 1")]
    Reaction { name: &'static str, value: f64 },
    #[error("p*q = {0} must exceed 1")]
    Superlinear(f64),
    #[error("coefficients undefined: Q(alpha) = {q_alpha}, Q(beta) = {q_beta} must both be positive")]
    CoefficientsUndefined { q_alpha: f64, q_beta: f64 },
    #[error("Joseph-Lundgren margin does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
}

/// The quintuple `(n, k, l, p, q)`. Always valid once constructed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct SystemParams {
    n: u32,
    k: f64,
    l: f64,
    p: f64,
    q: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: u32,
    k: f64,
    l: f64,
    p: f64,
    q: f64,
}

impl TryFrom<RawParams> for SystemParams {
    type Error = ParamsError;
    fn try_from(r: RawParams) -> Result<Self, Self::Error> {
        SystemParams::new(r.n, r.k, r.l, r.p, r.q)
    }
}

impl From<SystemParams> for RawParams {
    fn from(s: SystemParams) -> Self {
        RawParams {
            n: s.n,
            k: s.k,
            l: s.l,
            p: s.p,
            q: s.q,
        }
    }
}

impl SystemParams {
    pub fn new(n: u32, k: f64, l: f64, p: f64, q: f64) -> Result<Self, ParamsError> {
        if n < 3 {
            return Err(ParamsError::Dimension(n));
        }
        for (name, value) in [("k", k), ("l", l)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ParamsError::Weight { name, value });
            }
        }
        for (name, value) in [("p", p), ("q", q)] {
            if !(value.is_finite() && value >= 1.0) {
                return Err(ParamsError::Reaction { name, value });
            }
        }
        if p * q <= 1.0 {
            return Err(ParamsError::Superlinear(p * q));
        }
        Ok(Self { n, k, l, p, q })
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn dim(&self) -> f64 {
        self.n as f64
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn l(&self) -> f64 {
        self.l
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Same system with `p` replaced.
    pub fn with_p(&self, p: f64) -> Result<Self, ParamsError> {
        Self::new(self.n, self.k, self.l, p, self.q)
    }

    /// Same system with `(p, q)` replaced.
    pub fn with_pq(&self, p: f64, q: f64) -> Result<Self, ParamsError> {
        Self::new(self.n, self.k, self.l, p, q)
    }

    /// True when swapping the two equations leaves the system unchanged.
    pub fn is_symmetric(&self) -> bool {
        self.k == self.l && self.p == self.q
    }
}

/// `Q(λ) = λ (n - 2 - λ)`.
pub fn q_poly(lambda: f64, n: u32) -> f64 {
    lambda * (n as f64 - 2.0 - lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub c_alpha: f64,
    pub c_beta: f64,
}

/// Decay exponents of the singular solution and the derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub alpha: f64,
    pub beta: f64,
    pub q_alpha: f64,
    pub q_beta: f64,
    /// Symmetry center of the characteristic quartic.
    pub lambda_star: f64,
    /// `None` when `Q(α)` or `Q(β)` is not positive.
    pub coefficients: Option<Coefficients>,
}

impl Exponents {
    pub fn new(params: &SystemParams) -> Self {
        let (n, k, l, p, q) = (params.dim(), params.k, params.l, params.p, params.q);
        let pq1 = p * q - 1.0;
        let alpha = (k + 2.0 + (l + 2.0) * p) / pq1;
        let beta = (l + 2.0 + (k + 2.0) * q) / pq1;
        let q_alpha = q_poly(alpha, params.n);
        let q_beta = q_poly(beta, params.n);
        let coefficients = if q_alpha > 0.0 && q_beta > 0.0 {
            let (la, lb) = (q_alpha.ln(), q_beta.ln());
            Some(Coefficients {
                c_alpha: ((la + p * lb) / pq1).exp(),
                c_beta: ((lb + q * la) / pq1).exp(),
            })
        } else {
            None
        };
        Self {
            alpha,
            beta,
            q_alpha,
            q_beta,
            lambda_star: 0.5 * (alpha + beta) - 0.5 * (n - 2.0),
            coefficients,
        }
    }

    pub fn coefficients(&self) -> Result<Coefficients, ParamsError> {
        self.coefficients.ok_or(ParamsError::CoefficientsUndefined {
            q_alpha: self.q_alpha,
            q_beta: self.q_beta,
        })
    }

    pub fn c_alpha(&self) -> Result<f64, ParamsError> {
        self.coefficients().map(|c| c.c_alpha)
    }

    pub fn c_beta(&self) -> Result<f64, ParamsError> {
        self.coefficients().map(|c| c.c_beta)
    }
}

pub fn exponents(params: &SystemParams) -> Exponents {
    Exponents::new(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Existence {
    Strict,
    Equality,
    Fails,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JlStatus {
    Strict,
    Equality,
    Fails,
    NotApplicable,
}

impl JlStatus {
    pub fn holds(self) -> bool {
        matches!(self, JlStatus::Strict | JlStatus::Equality)
    }
}

/// Margins of the existence condition, written in both equivalent forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExistenceMargin {
    /// `(n-2) - (k+n)/(p+1) - (l+n)/(q+1)`
    pub sobolev: f64,
    /// `(n-2) - (α+β)`
    pub exponent_sum: f64,
}

/// Both sides of the Joseph-Lundgren inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JlMargin {
    pub lhs: f64,
    pub rhs: f64,
}

impl JlMargin {
    pub fn value(&self) -> f64 {
        self.lhs - self.rhs
    }

    /// Margin normalized by the larger side; bounded in magnitude by 1
    /// whenever both sides are nonnegative.
    pub fn relative(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.value() / scale
        }
    }
}

fn classify(margin: f64, scale: f64, eq_tol: f64) -> Existence {
    if margin.abs() <= eq_tol * scale {
        Existence::Equality
    } else if margin > 0.0 {
        Existence::Strict
    } else {
        Existence::Fails
    }
}

pub fn existence_margin(params: &SystemParams) -> ExistenceMargin {
    let n = params.dim();
    let e = Exponents::new(params);
    ExistenceMargin {
        sobolev: (n - 2.0) - (params.k + n) / (params.p + 1.0) - (params.l + n) / (params.q + 1.0),
        exponent_sum: (n - 2.0) - (e.alpha + e.beta),
    }
}

pub fn existence_status(params: &SystemParams) -> Existence {
    existence_status_tol(params, DEFAULT_EQ_TOL)
}

pub fn existence_status_tol(params: &SystemParams, eq_tol: f64) -> Existence {
    let m = existence_margin(params);
    classify(m.sobolev, params.dim() - 2.0, eq_tol)
}

pub fn jl_margin(params: &SystemParams) -> JlMargin {
    let e = Exponents::new(params);
    let n2 = params.dim() - 2.0;
    let d = e.alpha - e.beta;
    let k = 0.25 * (n2 * n2 - d * d);
    JlMargin {
        lhs: k * k,
        rhs: params.p * params.q * e.q_alpha * e.q_beta,
    }
}

pub fn jl_status(params: &SystemParams, eq_tol: f64) -> JlStatus {
    if existence_status(params) == Existence::Fails {
        return JlStatus::NotApplicable;
    }
    let m = jl_margin(params);
    match classify(m.value(), m.lhs.abs().max(m.rhs.abs()), eq_tol) {
        Existence::Strict => JlStatus::Strict,
        Existence::Equality => JlStatus::Equality,
        Existence::Fails => JlStatus::Fails,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalityReport {
    pub existence: Existence,
    pub jl: JlStatus,
    pub existence_margin: ExistenceMargin,
    pub jl_margin: JlMargin,
}

impl CriticalityReport {
    pub fn new(params: &SystemParams, eq_tol: f64) -> Self {
        Self {
            existence: existence_status_tol(params, eq_tol),
            jl: jl_status(params, eq_tol),
            existence_margin: existence_margin(params),
            jl_margin: jl_margin(params),
        }
    }
}

/// Which curve the Joseph-Lundgren boundary is traced along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPath {
    /// `q` fixed at the template value, `p` varies.
    FixedQ,
    /// `q = p`.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JlBoundary {
    pub p: f64,
    pub params: SystemParams,
    pub iterations: usize,
    /// Bracket width after each bisection step.
    pub widths: Vec<f64>,
}

/// Locates the `p` at which the Joseph-Lundgren inequality becomes an
/// equality, by bisection on the relative margin. The template supplies
/// `n, k, l` and, for [`BoundaryPath::FixedQ`], `q`.
pub fn jl_boundary_p(
    template: &SystemParams,
    path: BoundaryPath,
    bracket: (f64, f64),
) -> Result<JlBoundary, ParamsError> {
    let at = |p: f64| match path {
        BoundaryPath::FixedQ => template.with_p(p),
        BoundaryPath::Diagonal => template.with_pq(p, p),
    };
    let margin = |p: f64| -> Result<f64, ParamsError> { Ok(jl_margin(&at(p)?).relative()) };

    let (mut lo, mut hi) = bracket;
    let mut m_lo = margin(lo)?;
    let m_hi = margin(hi)?;
    if m_lo == 0.0 {
        hi = lo;
    } else if m_hi == 0.0 {
        lo = hi;
    } else if m_lo.signum() == m_hi.signum() {
        return Err(ParamsError::NoSignChange { lo, hi });
    }

    let mut widths = Vec::new();
    let mut iterations = 0;
    while hi - lo > 0.0 && iterations < 200 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let m = margin(mid)?;
        iterations += 1;
        if m == 0.0 {
            lo = mid;
            hi = mid;
        } else if m.signum() == m_lo.signum() {
            lo = mid;
            m_lo = m;
        } else {
            hi = mid;
        }
        widths.push(hi - lo);
    }
    let p = lo + 0.5 * (hi - lo);
    Ok(JlBoundary {
        p,
        params: at(p)?,
        iterations,
        widths,
    })
}

/// The explicit radial singular solution `(C_α r^{-α}, C_β r^{-β})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularSolution {
    pub alpha: f64,
    pub beta: f64,
    pub c_alpha: f64,
    pub c_beta: f64,
}

impl SingularSolution {
    pub fn new(params: &SystemParams) -> Result<Self, ParamsError> {
        let e = Exponents::new(params);
        let c = e.coefficients()?;
        Ok(Self {
            alpha: e.alpha,
            beta: e.beta,
            c_alpha: c.c_alpha,
            c_beta: c.c_beta,
        })
    }

    pub fn u(&self, r: f64) -> f64 {
        self.c_alpha * r.powf(-self.alpha)
    }

    pub fn v(&self, r: f64) -> f64 {
        self.c_beta * r.powf(-self.beta)
    }

    pub fn eval(&self, r: f64) -> (f64, f64) {
        (self.u(r), self.v(r))
    }

    /// Radial derivatives `(u*'(r), v*'(r))`.
    pub fn derivative(&self, r: f64) -> (f64, f64) {
        (-self.alpha * self.u(r) / r, -self.beta * self.v(r) / r)
    }
}

pub fn singular_solution(params: &SystemParams) -> Result<SingularSolution, ParamsError> {
    SingularSolution::new(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn anchor() -> SystemParams {
        SystemParams::new(11, 0.0, 0.0, 7.0, 7.0).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert_eq!(SystemParams::new(2, 0.0, 0.0, 3.0, 3.0), Err(ParamsError::Dimension(2)));
        assert!(matches!(
            SystemParams::new(11, -0.1, 0.0, 3.0, 3.0),
            Err(ParamsError::Weight { name: "k", .. })
        ));
        assert!(matches!(
            SystemParams::new(11, 0.0, 0.0, 0.5, 3.0),
            Err(ParamsError::Reaction { name: "p", .. })
        ));
        assert!(matches!(
            SystemParams::new(11, 0.0, 0.0, 1.0, 1.0),
            Err(ParamsError::Superlinear(_))
        ));
        assert!(SystemParams::new(11, 0.0, f64::NAN, 3.0, 3.0).is_err());
    }

    #[test]
    fn q_poly_values() {
        assert_eq!(q_poly(0.0, 11), 0.0);
        assert_eq!(q_poly(9.0, 11), 0.0);
        assert_relative_eq!(q_poly(1.0 / 3.0, 11), 26.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(q_poly(2.0, 11), q_poly(7.0, 11));
    }

    #[test]
    fn anchor_exponents() {
        let e = Exponents::new(&anchor());
        assert_relative_eq!(e.alpha, 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(e.beta, 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(e.lambda_star, -25.0 / 6.0, max_relative = 1e-15);
        let c = e.coefficients().unwrap();
        let expected = (26.0f64 / 9.0).powf(1.0 / 6.0);
        assert_relative_eq!(c.c_alpha, expected, max_relative = 1e-13);
        assert_eq!(c.c_alpha, c.c_beta);
    }

    #[test]
    fn n12_quadratic_exponents() {
        let e = Exponents::new(&SystemParams::new(12, 0.0, 0.0, 2.0, 2.0).unwrap());
        assert_relative_eq!(e.alpha, 2.0, max_relative = 1e-15);
        assert_relative_eq!(e.beta, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn coefficients_flagged_when_undefined() {
        // (n=3, p=q=1.5): alpha = beta = 4 > n-2, so Q(alpha) < 0.
        let params = SystemParams::new(3, 0.0, 0.0, 1.5, 1.5).unwrap();
        let e = Exponents::new(&params);
        assert!(e.q_alpha < 0.0);
        assert!(matches!(
            e.coefficients(),
            Err(ParamsError::CoefficientsUndefined { .. })
        ));
        assert!(SingularSolution::new(&params).is_err());
    }

    #[test]
    fn existence_examples() {
        let m = existence_margin(&anchor());
        assert_relative_eq!(m.sobolev, 6.25, max_relative = 1e-14);
        assert_eq!(existence_status(&anchor()), Existence::Strict);
        let eq = SystemParams::new(12, 0.0, 0.0, 1.4, 1.4).unwrap();
        assert_eq!(existence_status(&eq), Existence::Equality);
        let fails = SystemParams::new(12, 0.0, 0.0, 1.2, 1.2).unwrap();
        assert_eq!(existence_status(&fails), Existence::Fails);
        assert_eq!(jl_status(&fails, DEFAULT_EQ_TOL), JlStatus::NotApplicable);
    }

    #[test]
    fn jl_examples() {
        let m = jl_margin(&anchor());
        assert_relative_eq!(m.lhs, 410.0625, max_relative = 1e-14);
        assert_relative_eq!(m.rhs, 49.0 * (26.0f64 / 9.0).powi(2), max_relative = 1e-14);
        assert_eq!(jl_status(&anchor(), DEFAULT_EQ_TOL), JlStatus::Strict);

        let n12 = SystemParams::new(12, 0.0, 0.0, 3.0, 3.0).unwrap();
        let m = jl_margin(&n12);
        assert_relative_eq!(m.lhs, 625.0, max_relative = 1e-14);
        assert_relative_eq!(m.rhs, 729.0, max_relative = 1e-14);
        assert_eq!(jl_status(&n12, DEFAULT_EQ_TOL), JlStatus::Fails);
    }

    #[test]
    fn jl_fails_in_dimension_ten() {
        for &p in &[1.5, 2.0, 3.0, 5.0, 7.0, 12.0, 40.0, 200.0] {
            for &q in &[1.0, 1.5, 3.0, 7.0, 50.0] {
                let Ok(params) = SystemParams::new(10, 0.0, 0.0, p, q) else {
                    continue;
                };
                let status = jl_status(&params, DEFAULT_EQ_TOL);
                assert!(!status.holds(), "p={p} q={q} gave {status:?}");
            }
        }
    }

    #[test]
    fn scalar_boundary_matches_closed_form() {
        let n = 11.0f64;
        let closed = ((n - 2.0).powi(2) - 4.0 * n + 8.0 * (n - 1.0).sqrt()) / ((n - 2.0) * (n - 10.0));
        let b = jl_boundary_p(&anchor(), BoundaryPath::Diagonal, (2.0, 20.0)).unwrap();
        assert_relative_eq!(b.p, closed, max_relative = 1e-10);
        assert_eq!(jl_status(&b.params, DEFAULT_EQ_TOL), JlStatus::Equality);
        assert!(b.widths.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn fixed_q_boundary_is_equality() {
        let b = jl_boundary_p(&anchor(), BoundaryPath::FixedQ, (1.01, 7.0)).unwrap();
        assert!(b.p > 1.01 && b.p < 7.0);
        assert_eq!(b.params.q(), 7.0);
        assert_eq!(jl_status(&b.params, DEFAULT_EQ_TOL), JlStatus::Equality);
    }

    #[test]
    fn boundary_requires_sign_change() {
        let err = jl_boundary_p(&anchor(), BoundaryPath::Diagonal, (8.0, 20.0)).unwrap_err();
        assert!(matches!(err, ParamsError::NoSignChange { .. }));
    }

    #[test]
    fn singular_solution_scaling() {
        let s = singular_solution(&anchor()).unwrap();
        let (u, v) = s.eval(1.0);
        assert_relative_eq!(u, (26.0f64 / 9.0).powf(1.0 / 6.0), max_relative = 1e-13);
        assert_eq!(u, v);
        assert_relative_eq!(s.u(6.0) / s.u(3.0), 2f64.powf(-s.alpha), max_relative = 1e-14);
    }

    #[test]
    fn params_serde_validates() {
        let ok: SystemParams = serde_json::from_str(r#"{"n":11,"k":0,"l":0,"p":7,"q":7}"#).unwrap();
        assert_eq!(ok, anchor());
        assert!(serde_json::from_str::<SystemParams>(r#"{"n":11,"k":0,"l":0,"p":0.5,"q":7}"#).is_err());
    }
}
