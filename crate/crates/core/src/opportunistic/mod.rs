//! Uplink two-user NOMA with opportunistic semantic/bit mode switching.
//!
//! The primary user always transmits bits at a fixed power and is decoded
//! first, treating the secondary user's signal as interference. After SIC the
//! secondary user is decoded interference-free, in whichever mode it picked for
//! the current fading state. The secondary user maximizes its ergodic
//! (equivalent) semantic rate subject to
//!
//! * `E[p] <= p_avg` (average power),
//! * `p <= p_peak` in every state (peak power),
//! * `E[R_primary] >= r_req` (ergodic primary rate).
//!
//! The two ergodic constraints are priced by dual variables and the problem
//! decouples into per-state choices over a finite (mode, power) grid; see
//! [`solve_dual`].

mod dual;
mod sweep;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{sinr_unchecked, FadingEnsemble, FadingState, NoiseModel};
use crate::error::{ensure_finite_nonneg, ensure_positive, Error, Result};
use crate::rates::{bit_rate_unchecked, BitEquivalence, SemanticTextModel};

pub use dual::{
    dual_objective, evaluate_fixed_mode, meets_constraints, solve_dual, solve_strategy, CandidateTable,
    CONSTRAINT_SLACK,
};
pub use sweep::{sweep_rreq, RreqCurve, RreqSweep};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UplinkScenario {
    /// Fixed transmit power of the primary (bit) user, W.
    pub primary_power: f64,
    pub bandwidth: f64,
    pub noise: NoiseModel,
    pub semantic: SemanticTextModel,
    pub conversion: BitEquivalence,
    /// Required ergodic primary rate, bits/s.
    pub r_req: f64,
    /// Average power budget of the secondary user, W.
    pub p_avg: f64,
    /// Peak power of the secondary user, W.
    pub p_peak: f64,
}

impl UplinkScenario {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("primary_power", self.primary_power)?;
        ensure_positive("bandwidth", self.bandwidth)?;
        ensure_positive("p_avg", self.p_avg)?;
        ensure_positive("p_peak", self.p_peak)?;
        ensure_finite_nonneg("r_req", self.r_req)?;
        if self.p_avg > self.p_peak {
            return Err(Error::invalid(format!(
                "p_avg ({}) must not exceed p_peak ({})",
                self.p_avg, self.p_peak
            )));
        }
        self.semantic.validate()?;
        self.conversion.validate()
    }

    pub fn with_r_req(mut self, r_req: f64) -> Self {
        self.r_req = r_req;
        self
    }

    fn noise_power(&self) -> f64 {
        self.noise.power_in(self.bandwidth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommMode {
    Semantic,
    Bit,
}

impl fmt::Display for CommMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CommMode::Semantic => "semantic",
            CommMode::Bit => "bit",
        })
    }
}

/// Mode set available to the secondary user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Opportunistic,
    SemanticOnly,
    BitOnly,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Opportunistic, Strategy::SemanticOnly, Strategy::BitOnly];

    /// Modes in tie-breaking order: earlier wins at equal value.
    pub fn modes(self) -> &'static [CommMode] {
        match self {
            Strategy::Opportunistic => &[CommMode::Bit, CommMode::Semantic],
            Strategy::SemanticOnly => &[CommMode::Semantic],
            Strategy::BitOnly => &[CommMode::Bit],
        }
    }

    pub fn pinned(mode: CommMode) -> Self {
        match mode {
            CommMode::Semantic => Strategy::SemanticOnly,
            CommMode::Bit => Strategy::BitOnly,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Strategy::Opportunistic => "opportunistic",
            Strategy::SemanticOnly => "semantic-only",
            Strategy::BitOnly => "bit-only",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Secondary user's choice in one fading state. Zero power is reported as
/// `Bit` mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub mode: CommMode,
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DualVars {
    /// Price of average power, suts/s per W.
    pub lambda_apc: f64,
    /// Price of primary rate, suts/s per bit/s.
    pub nu_primary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpportunisticResult {
    pub strategy: Strategy,
    pub r_req: f64,
    /// Ergodic equivalent semantic rate of the secondary user, suts/s.
    pub ergodic_secondary: f64,
    /// Ergodic primary rate, bits/s.
    pub ergodic_primary: f64,
    pub avg_power: f64,
    pub policy: Vec<PolicyDecision>,
    /// Multipliers achieving the lowest dual value seen.
    pub duals: DualVars,
    /// Dual function value at `duals`; an upper bound on the optimum over the grid.
    pub dual_bound: f64,
    /// Subgradient iterations performed.
    pub iterations: usize,
    /// The relative gap between `dual_bound` and `ergodic_secondary` is within
    /// the solver tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Uniform power grid on `[0, p_peak]`.
    pub power_grid: usize,
    pub max_iters: usize,
    /// Relative duality-gap tolerance.
    pub tol: f64,
    /// Initial subgradient step, in units of the constraint scales.
    pub step0: f64,
    /// Number of distinct feasible iterates handed to local search when the
    /// dual phase leaves a gap.
    pub polish_starts: usize,
    /// Largest ensemble for which two-state exchange moves are searched.
    pub polish_pair_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            power_grid: 201,
            max_iters: 2000,
            tol: 1e-3,
            step0: 1.0,
            polish_starts: 8,
            polish_pair_limit: 16,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.power_grid < 2 {
            return Err(Error::Config(format!(
                "power_grid must be >= 2, got {}",
                self.power_grid
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        if !(self.step0.is_finite() && self.step0 > 0.0) {
            return Err(Error::Config(format!("step0 must be > 0, got {}", self.step0)));
        }
        Ok(())
    }
}

/// Primary rate with the secondary signal as interference.
pub fn primary_rate(secondary_power: f64, state: &FadingState, scn: &UplinkScenario) -> f64 {
    let sinr = sinr_unchecked(
        scn.primary_power * state.primary_gain.value(),
        secondary_power * state.secondary_gain.value(),
        scn.noise_power(),
    );
    bit_rate_unchecked(scn.bandwidth, sinr)
}

/// Equivalent semantic rate of the secondary user after SIC.
pub fn secondary_utility(
    mode: CommMode,
    power: f64,
    state: &FadingState,
    scn: &UplinkScenario,
) -> Result<f64> {
    ensure_finite_nonneg("secondary power", power)?;
    if power > scn.p_peak {
        return Err(Error::invalid(format!(
            "secondary power {power} W exceeds the peak {} W",
            scn.p_peak
        )));
    }
    Ok(utility_unchecked(mode, power, state, scn))
}

pub(crate) fn utility_unchecked(
    mode: CommMode,
    power: f64,
    state: &FadingState,
    scn: &UplinkScenario,
) -> f64 {
    if power == 0.0 {
        return 0.0;
    }
    let snr = power * state.secondary_gain.value() / scn.noise_power();
    match mode {
        CommMode::Semantic => scn.semantic.semantic_rate_unchecked(scn.bandwidth, snr, true),
        CommMode::Bit => scn
            .conversion
            .to_semantic(bit_rate_unchecked(scn.bandwidth, snr), &scn.semantic),
    }
}

/// `j`-th point of the uniform power grid on `[0, p_peak]`.
#[inline]
pub fn grid_power(j: usize, power_grid: usize, p_peak: f64) -> f64 {
    if j + 1 == power_grid {
        p_peak
    } else {
        p_peak * j as f64 / (power_grid - 1) as f64
    }
}

/// Ergodic primary rate when the secondary user is always silent: the
/// largest `r_req` any policy can meet.
pub fn silent_primary_rate(scn: &UplinkScenario, ensemble: &FadingEnsemble) -> f64 {
    ensemble.expectation(|s| primary_rate(0.0, s, scn))
}

/// Per-state maximizer of `utility + nu * primary_rate - lambda * power` over
/// both modes and the power grid. Ties go to the lower power, then to `Bit`.
pub fn solve_per_state(
    duals: DualVars,
    state: &FadingState,
    scn: &UplinkScenario,
    power_grid: usize,
) -> PolicyDecision {
    solve_per_state_with(duals, state, scn, power_grid, Strategy::Opportunistic)
}

pub fn solve_per_state_with(
    duals: DualVars,
    state: &FadingState,
    scn: &UplinkScenario,
    power_grid: usize,
    strategy: Strategy,
) -> PolicyDecision {
    let mut best = PolicyDecision {
        mode: CommMode::Bit,
        power: 0.0,
    };
    let mut best_value = f64::NEG_INFINITY;
    for j in 0..power_grid.max(2) {
        let p = grid_power(j, power_grid.max(2), scn.p_peak);
        let penalty = duals.nu_primary * primary_rate(p, state, scn) - duals.lambda_apc * p;
        for &mode in strategy.modes() {
            let v = utility_unchecked(mode, p, state, scn) + penalty;
            if v > best_value {
                best_value = v;
                best = PolicyDecision {
                    mode: if p == 0.0 { CommMode::Bit } else { mode },
                    power: p,
                };
            }
        }
    }
    best
}

/// Ergodic (secondary utility, primary rate, power) of a per-state policy.
pub fn evaluate_policy(
    scn: &UplinkScenario,
    ensemble: &FadingEnsemble,
    policy: &[PolicyDecision],
) -> Result<(f64, f64, f64)> {
    if policy.len() != ensemble.len() {
        return Err(Error::invalid(format!(
            "policy has {} decisions for {} states",
            policy.len(),
            ensemble.len()
        )));
    }
    let (mut u, mut r, mut p) = (0.0, 0.0, 0.0);
    for ((state, w), d) in ensemble.iter().zip(policy) {
        u += w * secondary_utility(d.mode, d.power, state, scn)?;
        r += w * primary_rate(d.power, state, scn);
        p += w * d.power;
    }
    Ok((u, r, p))
}
