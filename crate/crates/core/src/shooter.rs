//! Shooting for the regular positive radial steady state.
//!
//! Trajectories start from a two-term series at `r_min` and are integrated
//! in Emden-Fowler deviation variables `y = 𝒰 - 1`, `z = 𝒱 - 1` with
//! `s = log r`. The target solution converges to the saddle `y = z = 0`, so
//! a single bisection on `v(0)` only tracks it until the unstable mode has
//! amplified rounding to visible size. Beyond that point the shot is
//! continued in segments: the two bracketing trajectories are restarted
//! from the last node where they still agree, and the bisection is repeated
//! on the segment joining them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::RadialGrid;
use crate::ode::{integrate, Event, Hit, OdeError, State, Stepper, System};
use crate::params::{existence_status, jl_status, Existence, Exponents, ParamsError, SystemParams, DEFAULT_EQ_TOL};
use crate::profile::SteadyProfile;
use crate::spectrum::solve_quartic;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShootError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("shooting refused: {0}")]
    Precondition(String),
    #[error("series start invalid at r0 = {r0:e}: truncation estimate {estimate:e}")]
    SeriesStart { r0: f64, estimate: f64 },
    #[error("no dichotomy: {0}")]
    NoDichotomy(String),
    #[error("stiff failure: {0}")]
    Stiff(#[from] OdeError),
    #[error("bisection stopped after {iterations} iterations with bracket width {width:e}")]
    MaxIter { iterations: usize, width: f64 },
    #[error("segmented shot made no progress beyond s = {s}")]
    Stalled { s: f64 },
    #[error("tail not in asymptotic regime: max 1 - U over trailing nodes is {deficit:e}")]
    TailNotAsymptotic { deficit: f64 },
    #[error("scaling parameter must be positive, got {0}")]
    Xi(f64),
}

/// Which way a failed trajectory says the central value `v(0)` is off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    TooSmall,
    TooLarge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    /// `𝒰 ≤ 0`
    UZero,
    /// `𝒱 ≤ 0`
    VZero,
    /// `𝒰 > 1 + ε`
    UOvershoot,
    /// `𝒱 > 1 + ε`
    VOvershoot,
    /// `𝒰' < 0`
    UDecreasing,
    /// `𝒱' < 0`
    VDecreasing,
}

impl Crossing {
    pub fn verdict(self) -> Verdict {
        match self {
            Crossing::UZero | Crossing::VOvershoot | Crossing::UDecreasing => Verdict::TooLarge,
            Crossing::VZero | Crossing::UOvershoot | Crossing::VDecreasing => Verdict::TooSmall,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventSet {
    /// Only `𝒰 ≤ 0` and `𝒱 ≤ 0`.
    ZeroCrossings,
    /// Zero crossings, overshoot of the singular envelope, and loss of
    /// monotonicity of `𝒰`, `𝒱`.
    Full,
}

/// Stopping conditions on the deviation state `[y, y', z, z']`.
pub fn shooting_events(set: EventSet, eps_sep: f64) -> Vec<Event<Crossing>> {
    let mut ev = vec![
        Event::below(Crossing::UZero, 0, -1.0, true),
        Event::below(Crossing::VZero, 2, -1.0, true),
    ];
    if set == EventSet::Full {
        ev.extend([
            Event::above(Crossing::UOvershoot, 0, eps_sep, false),
            Event::above(Crossing::VOvershoot, 2, eps_sep, false),
            Event::below(Crossing::UDecreasing, 1, 0.0, false),
            Event::below(Crossing::VDecreasing, 3, 0.0, false),
        ]);
    }
    ev
}

/// Right-hand side of the Emden-Fowler system in `(𝒰, 𝒰', 𝒱, 𝒱')`.
pub fn ef_rhs(state: &State, params: &SystemParams, exponents: &Exponents) -> State {
    let [uu, du, vv, dv] = *state;
    let n2 = params.dim() - 2.0;
    [
        du,
        exponents.q_alpha * (uu - vv.max(0.0).powf(params.p())) - (n2 - 2.0 * exponents.alpha) * du,
        dv,
        exponents.q_beta * (vv - uu.max(0.0).powf(params.q())) - (n2 - 2.0 * exponents.beta) * dv,
    ]
}

/// The Emden-Fowler system written for the deviations from the fixed point
/// `𝒰 = 𝒱 = 1`. Negative `𝒰`, `𝒱` are cut off in the nonlinearity.
#[derive(Debug, Clone, Copy)]
pub struct DeviationSystem {
    q_alpha: f64,
    q_beta: f64,
    damp_u: f64,
    damp_v: f64,
    p: f64,
    q: f64,
}

impl DeviationSystem {
    pub fn new(params: &SystemParams) -> Self {
        let e = Exponents::new(params);
        let n2 = params.dim() - 2.0;
        Self {
            q_alpha: e.q_alpha,
            q_beta: e.q_beta,
            damp_u: n2 - 2.0 * e.alpha,
            damp_v: n2 - 2.0 * e.beta,
            p: params.p(),
            q: params.q(),
        }
    }
}

/// `(1 + x)^m - 1` for `x > -1`, and `-1` below.
fn power_deviation(x: f64, m: f64) -> f64 {
    if x <= -1.0 {
        -1.0
    } else {
        (m * x.ln_1p()).exp_m1()
    }
}

impl System for DeviationSystem {
    fn rhs(&self, _s: f64, x: &State) -> State {
        let [y, dy, z, dz] = *x;
        [
            dy,
            self.q_alpha * (y - power_deviation(z, self.p)) - self.damp_u * dy,
            dz,
            self.q_beta * (z - power_deviation(y, self.q)) - self.damp_v * dz,
        ]
    }
}

/// Values and radial derivatives of `(u, v)` at a small radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesStart {
    pub u: f64,
    pub du: f64,
    pub v: f64,
    pub dv: f64,
    /// Relative size of the first neglected term.
    pub truncation: f64,
}

/// Largest acceptable first-order term of the series.
pub const SERIES_MAX_FIRST_ORDER: f64 = 0.1;
/// Largest acceptable relative size of the neglected terms.
pub const SERIES_MAX_TRUNCATION: f64 = 1e-10;

/// Two-term expansion of the regular solution with `u(0) = u0`,
/// `v(0) = v0` about the origin.
pub fn series_start(u0: f64, v0: f64, r0: f64, params: &SystemParams) -> Result<SeriesStart, ShootError> {
    if !(u0 > 0.0 && v0 >= 0.0 && r0 > 0.0) {
        return Err(ShootError::SeriesStart { r0, estimate: f64::NAN });
    }
    let (n, k, l, p, q) = (params.dim(), params.k(), params.l(), params.p(), params.q());
    let (fu, fv) = (v0.powf(p), u0.powf(q));
    let (ak, al) = ((k + 2.0) * (n + k), (l + 2.0) * (n + l));
    let (mk, ml) = (k + l + 4.0, n + k + l + 2.0);
    let cu = if v0 > 0.0 { p * v0.powf(p - 1.0) * fv / al } else { 0.0 };
    let cv = q * u0.powf(q - 1.0) * fu / ak;
    let rk = r0.powf(k + 2.0);
    let rl = r0.powf(l + 2.0);
    let rkl = r0.powf(mk);

    let u = u0 - fu * rk / ak + cu * rkl / (mk * ml);
    let du = (-fu * rk / (n + k) + cu * rkl / ml) / r0;
    let v = v0 - fv * rl / al + cv * rkl / (mk * ml);
    let dv = (-fv * rl / (n + l) + cv * rkl / ml) / r0;

    let scale = u0.max(v0);
    let eu = fu * rk / ak / u0;
    let ev = fv * rl / al / if v0 > 0.0 { v0 } else { scale };
    let eps = eu.max(ev);
    let truncation = eps.powi(3) * p.max(q).powi(2);
    if eps > SERIES_MAX_FIRST_ORDER || truncation > SERIES_MAX_TRUNCATION {
        return Err(ShootError::SeriesStart {
            r0,
            estimate: truncation.max(eps),
        });
    }
    Ok(SeriesStart {
        u,
        du,
        v,
        dv,
        truncation,
    })
}

/// Converts `(u, u', v, v')` at radius `r` to the deviation state.
pub fn to_deviation(r: f64, u: f64, du: f64, v: f64, dv: f64, exponents: &Exponents) -> Result<State, ParamsError> {
    let c = exponents.coefficients()?;
    let (a, b) = (exponents.alpha, exponents.beta);
    let (ra, rb) = (r.powf(a), r.powf(b));
    Ok([
        ra * u / c.c_alpha - 1.0,
        (a * ra * u + ra * r * du) / c.c_alpha,
        rb * v / c.c_beta - 1.0,
        (b * rb * v + rb * r * dv) / c.c_beta,
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Deviation states at the nodes reached, starting at `nodes[start]`.
    pub states: Vec<State>,
    pub start: usize,
    pub event: Option<Hit<Crossing>>,
}

/// Integrates the deviation system over the grid from node `start`.
pub fn integrate_until_event(
    params: &SystemParams,
    stepper: Stepper,
    nodes: &[f64],
    start: usize,
    x0: State,
    events: &[Event<Crossing>],
) -> Result<Trajectory, OdeError> {
    let sys = DeviationSystem::new(params);
    let run = integrate(&sys, stepper, &nodes[start..], x0, events)?;
    Ok(Trajectory {
        states: run.states,
        start,
        event: run.event,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShootConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub stepper: Stepper,
    /// Central value `u(0)`; the profile has `ξ = u(0)^{1/α}`.
    pub u0: f64,
    /// First guess for `v(0) / u(0)^{β/α}`.
    pub c0_guess: f64,
    /// Overshoot margin on `𝒰 - 1`, `𝒱 - 1`.
    pub eps_sep: f64,
    /// Required final width of the `v(0)` bracket.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative sup-norm distance below which the two bracketing
    /// trajectories are considered to coincide.
    pub agree_tol: f64,
    /// Fraction of trailing nodes that must already be close to the
    /// singular solution.
    pub tail_fraction: f64,
    pub tail_deficit: f64,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            r_min: 1e-4,
            r_max: 1e6,
            nodes: 2001,
            stepper: Stepper::default(),
            u0: 1.0,
            c0_guess: 1.0,
            eps_sep: 0.0,
            tol: 1e-12,
            max_iter: 200,
            agree_tol: 1e-8,
            tail_fraction: 0.1,
            tail_deficit: 0.05,
        }
    }
}

impl ShootConfig {
    pub fn grid(&self) -> Result<RadialGrid, crate::grid::GridError> {
        RadialGrid::new(self.r_min, self.r_max, self.nodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The `v(0)` bracket closed to the tolerance.
    Converged,
    /// A trial trajectory reached `r_max` without any event.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootResult {
    pub c0: f64,
    pub v0: f64,
    pub bracket_width: f64,
    pub termination: Termination,
    /// Bisection steps on `v(0)`.
    pub iterations: usize,
    /// Restarted segments after the first.
    pub segments: usize,
    /// Total trial integrations.
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shot {
    pub result: ShootResult,
    pub profile: SteadyProfile,
}

pub fn check_preconditions(params: &SystemParams) -> Result<(), ShootError> {
    match existence_status(params) {
        Existence::Strict => {}
        Existence::Equality => {
            return Err(ShootError::Precondition(
                "existence condition holds with equality; the singular solution does not govern the tail".into(),
            ))
        }
        Existence::Fails => return Err(ShootError::Precondition("existence condition fails".into())),
    }
    if !jl_status(params, DEFAULT_EQ_TOL).holds() {
        return Err(ShootError::Precondition("Joseph-Lundgren condition fails".into()));
    }
    Ok(())
}

enum Outcome {
    Failed(Verdict, Trajectory),
    Survived(Trajectory),
}

struct Shooter<'a> {
    params: &'a SystemParams,
    config: &'a ShootConfig,
    nodes: &'a [f64],
    events: Vec<Event<Crossing>>,
    trials: usize,
}

impl Shooter<'_> {
    fn run(&mut self, start: usize, x0: State) -> Result<Outcome, ShootError> {
        self.trials += 1;
        let tr = integrate_until_event(self.params, self.config.stepper, self.nodes, start, x0, &self.events)?;
        Ok(match tr.event {
            Some(ref hit) => Outcome::Failed(hit.kind.verdict(), tr),
            None => Outcome::Survived(tr),
        })
    }
}

fn sup(x: &State) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn midpoint(a: &State, b: &State) -> State {
    std::array::from_fn(|i| 0.5 * (a[i] + b[i]))
}

/// A trial parameter with its trajectory.
type Trial = (f64, Trajectory);

/// A surviving trajectory or the final bracket, then iterations and the
/// bracket ends.
type Bisection = (Result<Trajectory, (Trajectory, Trajectory)>, usize, f64, f64);

/// Bisects a one-parameter family of starting states. `lo` must give
/// `TooSmall` and `hi` `TooLarge`; their trajectories are passed in.
/// Returns either a surviving trajectory or the final bracket.
fn bisect<F>(
    sh: &mut Shooter,
    start: usize,
    family: F,
    mut lo: Trial,
    mut hi: Trial,
    resolved: impl Fn(f64, f64) -> bool,
) -> Result<Bisection, ShootError>
where
    F: Fn(f64) -> Result<State, ShootError>,
{
    let mut it = 0;
    while it < sh.config.max_iter {
        let mid = 0.5 * (lo.0 + hi.0);
        if mid <= lo.0.min(hi.0) || mid >= lo.0.max(hi.0) || resolved(lo.0, hi.0) {
            break;
        }
        it += 1;
        match sh.run(start, family(mid)?)? {
            Outcome::Survived(tr) => return Ok((Ok(tr), it, mid, mid)),
            Outcome::Failed(Verdict::TooSmall, tr) => lo = (mid, tr),
            Outcome::Failed(Verdict::TooLarge, tr) => hi = (mid, tr),
        }
    }
    Ok((Err((lo.1, hi.1)), it, lo.0, hi.0))
}

/// Finds the regular solution with `u(0) = config.u0`.
pub fn shoot(params: &SystemParams, config: &ShootConfig) -> Result<Shot, ShootError> {
    check_preconditions(params)?;
    if config.u0.is_nan() || config.u0 <= 0.0 {
        return Err(ShootError::Precondition(format!(
            "u(0) must be positive, got {}",
            config.u0
        )));
    }
    let grid = config.grid().map_err(|e| ShootError::Precondition(e.to_string()))?;
    let exponents = Exponents::new(params);
    // Trials run past r_max so that a trajectory still carrying a visible
    // unstable component fails before the end instead of surviving by luck.
    let growth = solve_quartic(&exponents, params)
        .map_err(|e| ShootError::Precondition(e.to_string()))?
        .growth_rate();
    let lookahead = ((1.0 / config.agree_tol).ln() + 5.0) / growth;
    let h = grid.log_step();
    let mut nodes: Vec<f64> = grid.log_nodes().to_vec();
    let last_grid = nodes.len() - 1;
    let s_end = nodes[last_grid];
    nodes.extend((1..=(lookahead / h).ceil() as usize).map(|i| s_end + i as f64 * h));
    let nodes = &nodes[..];
    let r0 = grid.r_min();
    let u0 = config.u0;
    let v_scale = u0.powf(exponents.beta / exponents.alpha);
    let start_state = |v0: f64| -> Result<State, ShootError> {
        let s = series_start(u0, v0, r0, params)?;
        Ok(to_deviation(r0, s.u, s.du, s.v, s.dv, &exponents)?)
    };
    let mut sh = Shooter {
        params,
        config,
        nodes,
        events: shooting_events(EventSet::Full, config.eps_sep),
        trials: 0,
    };

    // Stage 0: bracket and bisect the central value of v.
    let guess = config.c0_guess * v_scale;
    let mut lo: Option<(f64, Trajectory)> = None;
    let mut hi: Option<(f64, Trajectory)> = None;
    let mut accepted: Vec<State> = Vec::with_capacity(nodes.len());
    let mut factor = 1.0f64;
    let mut finished: Option<Trajectory> = None;
    let mut v0_final = guess;
    for _ in 0..60 {
        if lo.is_some() && hi.is_some() {
            break;
        }
        let trial_v = if lo.is_none() && hi.is_none() {
            guess
        } else if lo.is_none() {
            guess / factor
        } else {
            guess * factor
        };
        match sh.run(0, start_state(trial_v)?)? {
            Outcome::Survived(tr) => {
                finished = Some(tr);
                v0_final = trial_v;
                break;
            }
            Outcome::Failed(Verdict::TooSmall, tr) => {
                if hi.as_ref().is_some_and(|h| h.0 <= trial_v) {
                    return Err(ShootError::NoDichotomy(format!(
                        "v(0) = {trial_v} too small above a too-large value"
                    )));
                }
                lo = Some((trial_v, tr));
            }
            Outcome::Failed(Verdict::TooLarge, tr) => {
                if lo.as_ref().is_some_and(|l| l.0 >= trial_v) {
                    return Err(ShootError::NoDichotomy(format!(
                        "v(0) = {trial_v} too large below a too-small value"
                    )));
                }
                hi = Some((trial_v, tr));
            }
        }
        factor *= 2.0;
    }

    let mut iterations = 0;
    let mut width = 0.0;
    let mut segments = 0;
    let mut termination = Termination::Exact;
    if finished.is_none() {
        let (Some(l), Some(h)) = (lo, hi) else {
            return Err(ShootError::NoDichotomy(
                "could not bracket v(0) within 2^60 of the guess".into(),
            ));
        };
        let tol = config.tol;
        let (res, it, a, b) = bisect(&mut sh, 0, start_state, l, h, |_, _| false)?;
        iterations = it;
        width = (b - a).abs();
        v0_final = 0.5 * (a + b);
        if width > tol {
            return Err(ShootError::MaxIter { iterations, width });
        }
        let mut pair = match res {
            Ok(tr) => {
                finished = Some(tr);
                None
            }
            Err(pair) => {
                termination = Termination::Converged;
                Some(pair)
            }
        };

        // Continue past the point where the bracketing trajectories separate.
        while let Some((tl, th)) = pair.take() {
            let j0 = tl.start;
            let common = tl.states.len().min(th.states.len());
            let mut last = 0;
            for i in 0..common {
                let (a, b) = (&tl.states[i], &th.states[i]);
                let d: f64 = (0..4).map(|c| (a[c] - b[c]).abs()).fold(0.0, f64::max);
                if d > config.agree_tol * sup(a).max(sup(b)) {
                    break;
                }
                last = i;
            }
            let first = if accepted.is_empty() { 0 } else { 1 };
            for i in first..=last {
                accepted.push(midpoint(&tl.states[i], &th.states[i]));
            }
            if j0 + last >= last_grid {
                break;
            }
            if last == 0 {
                return Err(ShootError::Stalled { s: nodes[j0] });
            }
            segments += 1;
            if segments > nodes.len() {
                return Err(ShootError::Stalled { s: nodes[j0 + last] });
            }

            // Restart on the line through the two states at the last common node.
            let start = j0 + last;
            let base = *accepted.last().expect("accepted states");
            let dir: State = std::array::from_fn(|c| th.states[last][c] - tl.states[last][c]);
            let dnorm = sup(&dir);
            if dnorm == 0.0 {
                return Err(ShootError::Stalled { s: nodes[start] });
            }
            let family = |t: f64| -> Result<State, ShootError> { Ok(std::array::from_fn(|c| base[c] + t * dir[c])) };
            let mut k = 0.5;
            let mut ends: (Option<Trial>, Option<Trial>) = (None, None);
            for _ in 0..40 {
                if ends.0.is_none() {
                    match sh.run(start, family(-k)?)? {
                        Outcome::Survived(tr) => {
                            finished = Some(tr);
                            break;
                        }
                        Outcome::Failed(Verdict::TooSmall, tr) => ends.0 = Some((-k, tr)),
                        Outcome::Failed(Verdict::TooLarge, _) => {}
                    }
                }
                if ends.1.is_none() {
                    match sh.run(start, family(k)?)? {
                        Outcome::Survived(tr) => {
                            finished = Some(tr);
                            break;
                        }
                        Outcome::Failed(Verdict::TooLarge, tr) => ends.1 = Some((k, tr)),
                        Outcome::Failed(Verdict::TooSmall, _) => {}
                    }
                }
                if ends.0.is_some() && ends.1.is_some() {
                    break;
                }
                k *= 4.0;
            }
            if finished.is_some() {
                break;
            }
            let (Some(l), Some(h)) = ends else {
                return Err(ShootError::NoDichotomy(format!(
                    "restart at s = {} did not separate the two failure types",
                    nodes[start]
                )));
            };
            let base_norm = sup(&base);
            let resolved = |a: f64, b: f64| (b - a).abs() * dnorm <= 1e-17 * base_norm;
            let (res, _, _, _) = bisect(&mut sh, start, family, l, h, resolved)?;
            match res {
                Ok(tr) => finished = Some(tr),
                Err(p) => pair = Some(p),
            }
        }
    }
    if let Some(tr) = finished {
        let skip = if accepted.is_empty() { 0 } else { 1 };
        accepted.extend(tr.states.into_iter().skip(skip));
    }
    accepted.truncate(last_grid + 1);
    if accepted.len() != last_grid + 1 {
        return Err(ShootError::Stalled {
            s: nodes[accepted.len().saturating_sub(1)],
        });
    }

    let n = accepted.len();
    let tail_start = ((1.0 - config.tail_fraction) * n as f64).floor() as usize;
    let deficit = accepted[tail_start.min(n - 1)..]
        .iter()
        .map(|x| -x[0])
        .fold(f64::MIN, f64::max);
    if deficit > config.tail_deficit {
        return Err(ShootError::TailNotAsymptotic { deficit });
    }

    let xi = u0.powf(1.0 / exponents.alpha);
    let c0 = v0_final / v_scale;
    let profile = SteadyProfile::from_states(*params, grid.clone(), xi, c0, accepted)?;
    Ok(Shot {
        result: ShootResult {
            c0,
            v0: v0_final,
            bracket_width: width,
            termination,
            iterations,
            segments,
            trials: sh.trials,
        },
        profile,
    })
}

/// Shoots with default settings and the given bracket tolerance.
pub fn shoot_c0(params: &SystemParams, tol: f64) -> Result<ShootResult, ShootError> {
    let config = ShootConfig {
        tol,
        ..ShootConfig::default()
    };
    shoot(params, &config).map(|s| s.result)
}

/// Scaled member `u_ξ(r) = ξ^α u₁(ξ r)` of the family through `base`,
/// sampled on the base grid.
pub fn family_member(base: &SteadyProfile, xi: f64) -> Result<SteadyProfile, ShootError> {
    if xi == base.xi() {
        return Ok(base.clone());
    }
    let states = family_states(base, xi, base.grid().log_nodes())?;
    Ok(SteadyProfile::from_states(
        *base.params(),
        base.grid().clone(),
        xi,
        base.c0(),
        states,
    )?)
}

/// Deviation states of the family member `ξ` at arbitrary `s = log r`.
///
/// In deviation variables scaling is the shift `s ↦ s + log(ξ/ξ_base)`.
/// Shifted points that coincide with base nodes reuse them exactly; other
/// points inside the base grid are interpolated with cubic Hermite
/// polynomials using the exact second derivative from the ODE. Points
/// below the grid come from the series, and points beyond it follow the
/// exponential decay `y ∝ e^{κ s}` with `κ = y'/y` at the last node.
pub fn family_states(base: &SteadyProfile, xi: f64, at: &[f64]) -> Result<Vec<State>, ShootError> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(ShootError::Xi(xi));
    }
    let params = *base.params();
    let e = *base.exponents();
    let grid = base.grid();
    let s = grid.log_nodes();
    let h = grid.log_step();
    let shift = (xi / base.xi()).ln();
    let sys = DeviationSystem::new(&params);
    let states = base.states();
    let n = states.len();
    let (u0, v0) = (base.u0(), base.v0());

    let mut out = Vec::with_capacity(at.len());
    for &si in at {
        let t = si + shift;
        let x = if t < s[0] - 1e-9 * h {
            let r = t.exp();
            let st = series_start(u0, v0, r, &params)?;
            to_deviation(r, st.u, st.du, st.v, st.dv, &e)?
        } else if t > s[n - 1] + 1e-9 * h {
            let last = states[n - 1];
            let dt = t - s[n - 1];
            let mut x = [0.0; 4];
            for (c, dc) in [(0, 1), (2, 3)] {
                let kappa = if last[c] != 0.0 { last[dc] / last[c] } else { 0.0 };
                let g = (kappa * dt).exp();
                x[c] = last[c] * g;
                x[dc] = last[dc] * g;
            }
            x
        } else {
            let pos = ((t - s[0]) / h).clamp(0.0, (n - 1) as f64);
            let near = pos.round();
            if (pos - near).abs() <= 1e-9 {
                states[near as usize]
            } else {
                let i = (pos.floor() as usize).min(n - 2);
                let (a, b) = (&states[i], &states[i + 1]);
                let (fa, fb) = (sys.rhs(s[i], a), sys.rhs(s[i + 1], b));
                hermite(a, &fa, b, &fb, h, pos - i as f64)
            }
        };
        out.push(x);
    }
    Ok(out)
}

/// Cubic Hermite interpolation of a state and its derivative at fraction
/// `tau` of a step of length `h`. The derivative slots are interpolated
/// from their own values and slopes.
fn hermite(a: &State, fa: &State, b: &State, fb: &State, h: f64, tau: f64) -> State {
    let (t2, t3) = (tau * tau, tau * tau * tau);
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + tau;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    std::array::from_fn(|c| h00 * a[c] + h10 * h * fa[c] + h01 * b[c] + h11 * h * fb[c])
}
