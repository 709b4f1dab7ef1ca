//! Regular radial steady states stored on a log grid, in deficit form.
//!
//! A profile keeps the Emden-Fowler deviations `y = 𝒰 - 1`, `z = 𝒱 - 1`
//! and their `s`-derivatives. Physical values are derived from them, which
//! keeps `1 - 𝒰` meaningful long after it drops below machine epsilon
//! relative to one.

use serde::{Deserialize, Serialize};

use crate::grid::RadialGrid;
use crate::ode::State;
use crate::params::{Exponents, ParamsError, SystemParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyProfile {
    params: SystemParams,
    exponents: Exponents,
    grid: RadialGrid,
    xi: f64,
    c0: f64,
    states: Vec<State>,
    u: Vec<f64>,
    v: Vec<f64>,
    du: Vec<f64>,
    dv: Vec<f64>,
}

impl SteadyProfile {
    /// Builds a profile from `[y, y', z, z']` at every grid node.
    pub fn from_states(
        params: SystemParams,
        grid: RadialGrid,
        xi: f64,
        c0: f64,
        states: Vec<State>,
    ) -> Result<Self, ParamsError> {
        assert_eq!(states.len(), grid.len(), "one state per grid node");
        let exponents = Exponents::new(&params);
        let c = exponents.coefficients()?;
        let (a, b) = (exponents.alpha, exponents.beta);
        let n = grid.len();
        let (mut u, mut v, mut du, mut dv) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for (&r, x) in grid.nodes().iter().zip(&states) {
            let (ua, vb) = (c.c_alpha * r.powf(-a), c.c_beta * r.powf(-b));
            u.push(ua * (1.0 + x[0]));
            v.push(vb * (1.0 + x[2]));
            du.push(ua / r * (x[1] - a * (1.0 + x[0])));
            dv.push(vb / r * (x[3] - b * (1.0 + x[2])));
        }
        Ok(Self {
            params,
            exponents,
            grid,
            xi,
            c0,
            states,
            u,
            v,
            du,
            dv,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }
    pub fn exponents(&self) -> &Exponents {
        &self.exponents
    }
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }
    /// `v(0) / u(0)^{β/α}`, the same for every member of a family.
    pub fn c0(&self) -> f64 {
        self.c0
    }
    /// Central value `u(0) = ξ^α`.
    pub fn u0(&self) -> f64 {
        self.xi.powf(self.exponents.alpha)
    }
    /// Central value `v(0) = C₀ ξ^β`.
    pub fn v0(&self) -> f64 {
        self.c0 * self.xi.powf(self.exponents.beta)
    }
    pub fn len(&self) -> usize {
        self.states.len()
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
    pub fn states(&self) -> &[State] {
        &self.states
    }
    pub fn u(&self) -> &[f64] {
        &self.u
    }
    pub fn v(&self) -> &[f64] {
        &self.v
    }
    pub fn du(&self) -> &[f64] {
        &self.du
    }
    pub fn dv(&self) -> &[f64] {
        &self.dv
    }

    /// `(𝒰, 𝒱)` at every node.
    pub fn normalized(&self) -> (Vec<f64>, Vec<f64>) {
        self.states.iter().map(|x| (1.0 + x[0], 1.0 + x[2])).unzip()
    }

    /// `(1 - 𝒰, 1 - 𝒱)` at every node, computed without cancellation.
    pub fn deficits(&self) -> (Vec<f64>, Vec<f64>) {
        self.states.iter().map(|x| (-x[0], -x[2])).unzip()
    }

    pub fn header(&self) -> ProfileHeader {
        let c = self
            .exponents
            .coefficients
            .expect("profiles only exist with coefficients");
        ProfileHeader {
            params: self.params,
            alpha: self.exponents.alpha,
            beta: self.exponents.beta,
            c_alpha: c.c_alpha,
            c_beta: c.c_beta,
            lambda_star: self.exponents.lambda_star,
            c0: self.c0,
            xi: self.xi,
            u0: self.u0(),
            v0: self.v0(),
            grid: self.grid.spec(),
        }
    }
}

/// `(𝒰, 𝒱)` per node.
pub fn normalized_profiles(profile: &SteadyProfile) -> (Vec<f64>, Vec<f64>) {
    profile.normalized()
}

/// Metadata written next to a profile's CSV table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileHeader {
    pub params: SystemParams,
    pub alpha: f64,
    pub beta: f64,
    pub c_alpha: f64,
    pub c_beta: f64,
    pub lambda_star: f64,
    pub c0: f64,
    pub xi: f64,
    pub u0: f64,
    pub v0: f64,
    pub grid: crate::grid::GridSpec,
}
