//! Downlink rate pairs for one S-user and one B-user under OMA, pure NOMA and
//! semi-NOMA.
//!
//! Semi-NOMA splits the band into a shared sub-band of width `alpha * W`, where a
//! bit sub-stream is superimposed on the semantic stream, and an orthogonal
//! sub-band of width `(1 - alpha) * W` carrying the rest of the bit stream alone.
//! The S-user decodes and cancels the bit sub-stream first (bits-to-semantics
//! SIC ordering) and then decodes its semantic signal interference-free. The
//! shared bit sub-stream therefore has to be decodable at both receivers.
//! Pure NOMA is `alpha = 1` with no orthogonal power; OMA is an allocation with no
//! bit power on the shared sub-band.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{sinr_unchecked, LinkGain, NoiseModel};
use crate::error::{ensure_finite_nonneg, ensure_positive, Error, Result};
use crate::rates::{bit_rate_unchecked, SemanticTextModel};

/// Relative slack on the power budget, absorbing rounding in swept splits.
const BUDGET_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DownlinkScenario {
    pub s_gain: LinkGain,
    pub b_gain: LinkGain,
    pub total_power: f64,
    pub total_bandwidth: f64,
    pub noise: NoiseModel,
    pub semantic: SemanticTextModel,
}

impl DownlinkScenario {
    pub fn new(
        s_gain: LinkGain,
        b_gain: LinkGain,
        total_power: f64,
        total_bandwidth: f64,
        noise: NoiseModel,
        semantic: SemanticTextModel,
    ) -> Result<Self> {
        let scn = DownlinkScenario {
            s_gain,
            b_gain,
            total_power,
            total_bandwidth,
            noise,
            semantic,
        };
        scn.validate()?;
        Ok(scn)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("total_power", self.total_power)?;
        ensure_positive("total_bandwidth", self.total_bandwidth)?;
        self.semantic.validate()
    }

    /// Bit rate of the B-user alone on the whole band with the whole power budget.
    pub fn interference_free_bit_rate(&self) -> f64 {
        let snr = self.total_power * self.b_gain.value() / self.noise.power_in(self.total_bandwidth);
        bit_rate_unchecked(self.total_bandwidth, snr)
    }
}

/// One semi-NOMA operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// `alpha`: fraction of the band that is shared.
    pub shared_band_fraction: f64,
    /// Semantic stream power, on the shared sub-band.
    pub semantic_power: f64,
    /// Bit sub-stream power on the shared sub-band.
    pub bit_power_shared: f64,
    /// Bit sub-stream power on the orthogonal sub-band.
    pub bit_power_orth: f64,
}

impl Allocation {
    /// OMA point expressed as a semi-NOMA allocation: the S-user owns the
    /// `alpha` sub-band alone. Power on a zero-width band is dropped, since it
    /// carries no rate.
    pub fn oma(alpha: f64, semantic_power: f64, bit_power: f64) -> Self {
        Allocation {
            shared_band_fraction: alpha,
            semantic_power: if alpha == 0.0 { 0.0 } else { semantic_power },
            bit_power_shared: 0.0,
            bit_power_orth: if alpha == 1.0 { 0.0 } else { bit_power },
        }
    }

    /// Pure NOMA point: whole band shared.
    pub fn noma(semantic_power: f64, bit_power: f64) -> Self {
        Allocation {
            shared_band_fraction: 1.0,
            semantic_power,
            bit_power_shared: bit_power,
            bit_power_orth: 0.0,
        }
    }

    pub fn total_power(&self) -> f64 {
        self.semantic_power + self.bit_power_shared + self.bit_power_orth
    }
}

/// Achieved (semantic rate of the S-user, bit rate of the B-user).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    /// suts/s
    pub semantic: f64,
    /// bits/s
    pub bit: f64,
}

impl RatePair {
    pub fn new(semantic: f64, bit: f64) -> Self {
        RatePair { semantic, bit }
    }

    /// `self` is at least as good in both rates and strictly better in one.
    pub fn dominates(&self, other: &RatePair) -> bool {
        self.semantic >= other.semantic
            && self.bit >= other.bit
            && (self.semantic > other.semantic || self.bit > other.bit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Oma,
    Noma,
    SemiNoma,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::Oma, SchemeKind::Noma, SchemeKind::SemiNoma];

    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Oma => "oma",
            SchemeKind::Noma => "noma",
            SchemeKind::SemiNoma => "semi-noma",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Why an allocation is not admissible.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("{field} must be finite and >= 0, got {value}")]
    NegativePower { field: &'static str, value: f64 },
    #[error("shared band fraction must lie in [0, 1], got {0}")]
    BandFraction(f64),
    #[error("allocated power {used} W exceeds the budget {budget} W")]
    PowerBudget { used: f64, budget: f64 },
    #[error("{field} is {value} W on a zero-width sub-band")]
    PowerOnEmptyBand { field: &'static str, value: f64 },
    #[error("{scheme} requires {rule}")]
    Structure { scheme: SchemeKind, rule: &'static str },
}

/// Checks an allocation against the scenario budget and the scheme's structure.
pub fn validate_allocation(
    scenario: &DownlinkScenario,
    alloc: &Allocation,
    scheme: SchemeKind,
) -> std::result::Result<(), Violation> {
    let alpha = alloc.shared_band_fraction;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Violation::BandFraction(alpha));
    }
    for (field, value) in [
        ("semantic_power", alloc.semantic_power),
        ("bit_power_shared", alloc.bit_power_shared),
        ("bit_power_orth", alloc.bit_power_orth),
    ] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Violation::NegativePower { field, value });
        }
    }
    let used = alloc.total_power();
    if used > scenario.total_power * (1.0 + BUDGET_SLACK) {
        return Err(Violation::PowerBudget {
            used,
            budget: scenario.total_power,
        });
    }
    if alpha == 1.0 && alloc.bit_power_orth > 0.0 {
        return Err(Violation::PowerOnEmptyBand {
            field: "bit_power_orth",
            value: alloc.bit_power_orth,
        });
    }
    if alpha == 0.0 {
        for (field, value) in [
            ("semantic_power", alloc.semantic_power),
            ("bit_power_shared", alloc.bit_power_shared),
        ] {
            if value > 0.0 {
                return Err(Violation::PowerOnEmptyBand { field, value });
            }
        }
    }
    match scheme {
        SchemeKind::Oma if alloc.bit_power_shared != 0.0 => Err(Violation::Structure {
            scheme,
            rule: "no bit power on the S-user's sub-band",
        }),
        SchemeKind::Noma if alpha != 1.0 => Err(Violation::Structure {
            scheme,
            rule: "the whole band to be shared (alpha = 1)",
        }),
        SchemeKind::Noma if alloc.bit_power_orth != 0.0 => Err(Violation::Structure {
            scheme,
            rule: "no orthogonal bit power",
        }),
        _ => Ok(()),
    }
}

/// Per-sub-band view of a semi-NOMA evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiNomaRates {
    pub semantic: f64,
    /// Bit sub-stream rate on the shared sub-band.
    pub shared_bit: f64,
    /// Bit sub-stream rate on the orthogonal sub-band.
    pub orth_bit: f64,
    /// SINR of the shared bit sub-stream at the B-user.
    pub shared_sinr_b: f64,
    /// SINR of the shared bit sub-stream at the S-user (first SIC stage). It
    /// limits the shared bit rate only when the semantic power is positive.
    pub shared_sinr_s: f64,
}

impl SemiNomaRates {
    pub fn pair(&self) -> RatePair {
        RatePair::new(self.semantic, self.shared_bit + self.orth_bit)
    }
}

pub fn evaluate_semi_noma(scenario: &DownlinkScenario, alloc: &Allocation) -> Result<RatePair> {
    evaluate_semi_noma_detailed(scenario, alloc).map(|r| r.pair())
}

pub fn evaluate_semi_noma_detailed(scenario: &DownlinkScenario, alloc: &Allocation) -> Result<SemiNomaRates> {
    validate_allocation(scenario, alloc, SchemeKind::SemiNoma)?;
    Ok(semi_noma_rates(scenario, alloc))
}

/// Evaluation without validation; callers guarantee admissibility.
pub(crate) fn semi_noma_rates(scn: &DownlinkScenario, alloc: &Allocation) -> SemiNomaRates {
    let w = scn.total_bandwidth;
    let alpha = alloc.shared_band_fraction;
    let (w_shared, w_orth) = (alpha * w, (1.0 - alpha) * w);
    let (gs, gb) = (scn.s_gain.value(), scn.b_gain.value());

    let (mut semantic, mut shared_bit, mut sinr_b, mut sinr_s) = (0.0, 0.0, 0.0, 0.0);
    if w_shared > 0.0 {
        let noise = scn.noise.power_in(w_shared);
        sinr_b = sinr_unchecked(alloc.bit_power_shared * gb, alloc.semantic_power * gb, noise);
        sinr_s = sinr_unchecked(alloc.bit_power_shared * gs, alloc.semantic_power * gs, noise);
        // The S-user only has to decode the bit sub-stream in order to cancel
        // it before its own semantic signal; with no semantic signal there is
        // nothing to protect and only the B-user's SINR binds.
        let binding = if alloc.semantic_power > 0.0 {
            sinr_b.min(sinr_s)
        } else {
            sinr_b
        };
        shared_bit = bit_rate_unchecked(w_shared, binding);
        let snr_semantic = alloc.semantic_power * gs / noise;
        semantic = scn
            .semantic
            .semantic_rate_unchecked(w_shared, snr_semantic, alloc.semantic_power > 0.0);
    }
    let orth_bit = if w_orth > 0.0 {
        let snr = alloc.bit_power_orth * gb / scn.noise.power_in(w_orth);
        bit_rate_unchecked(w_orth, snr)
    } else {
        0.0
    };
    SemiNomaRates {
        semantic,
        shared_bit,
        orth_bit,
        shared_sinr_b: sinr_b,
        shared_sinr_s: sinr_s,
    }
}

fn check_budget(scenario: &DownlinkScenario, semantic_power: f64, bit_power: f64) -> Result<()> {
    ensure_finite_nonneg("semantic_power", semantic_power)?;
    ensure_finite_nonneg("bit_power", bit_power)?;
    let used = semantic_power + bit_power;
    if used > scenario.total_power * (1.0 + BUDGET_SLACK) {
        return Err(Violation::PowerBudget {
            used,
            budget: scenario.total_power,
        }
        .into());
    }
    Ok(())
}

/// Pure NOMA: both streams superimposed on the whole band.
pub fn evaluate_noma(scenario: &DownlinkScenario, semantic_power: f64, bit_power: f64) -> Result<RatePair> {
    check_budget(scenario, semantic_power, bit_power)?;
    Ok(semi_noma_rates(scenario, &Allocation::noma(semantic_power, bit_power)).pair())
}

/// OMA: the S-user owns `alpha * W`, the B-user owns the rest, no interference.
pub fn evaluate_oma(
    scenario: &DownlinkScenario,
    band_fraction: f64,
    semantic_power: f64,
    bit_power: f64,
) -> Result<RatePair> {
    check_budget(scenario, semantic_power, bit_power)?;
    if !(0.0..=1.0).contains(&band_fraction) {
        return Err(Error::from(Violation::BandFraction(band_fraction)));
    }
    let w = scenario.total_bandwidth;
    let (w_s, w_b) = (band_fraction * w, (1.0 - band_fraction) * w);
    let semantic = if w_s > 0.0 {
        let snr = semantic_power * scenario.s_gain.value() / scenario.noise.power_in(w_s);
        scenario
            .semantic
            .semantic_rate_unchecked(w_s, snr, semantic_power > 0.0)
    } else {
        0.0
    };
    let bit = if w_b > 0.0 {
        let snr = bit_power * scenario.b_gain.value() / scenario.noise.power_in(w_b);
        bit_rate_unchecked(w_b, snr)
    } else {
        0.0
    };
    Ok(RatePair::new(semantic, bit))
}
