//! Channel gains, noise, SNR/SINR arithmetic and Rayleigh block-fading ensembles.
//!
//! Fading is sampled with [`ChaCha8Rng`], seeded through `seed_from_u64`, with one
//! ChaCha stream per link (the sampler's `stream`). ChaCha output is specified
//! bit-for-bit, so an ensemble depends only on `(seed, stream, mean_gain, n)` and
//! not on the platform or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite_nonneg, ensure_positive, Error, Result};

/// Linear power gain `|h|^2` of one link.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LinkGain(f64);

impl LinkGain {
    pub fn new(gain: f64) -> Result<Self> {
        ensure_finite_nonneg("link gain", gain)?;
        Ok(LinkGain(gain))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for LinkGain {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        LinkGain::new(value)
    }
}

impl From<LinkGain> for f64 {
    fn from(g: LinkGain) -> f64 {
        g.0
    }
}

/// White noise with power spectral density `n0` (W/Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NoiseModel {
    n0: f64,
}

impl NoiseModel {
    pub fn new(n0: f64) -> Result<Self> {
        ensure_positive("noise spectral density", n0)?;
        Ok(NoiseModel { n0 })
    }

    #[inline]
    pub fn n0(self) -> f64 {
        self.n0
    }

    /// Noise power over `bandwidth` Hz.
    #[inline]
    pub fn power_in(self, bandwidth: f64) -> f64 {
        self.n0 * bandwidth
    }
}

impl TryFrom<f64> for NoiseModel {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        NoiseModel::new(value)
    }
}

impl From<NoiseModel> for f64 {
    fn from(n: NoiseModel) -> f64 {
        n.n0
    }
}

/// Received SNR `power * gain / (bandwidth * n0)`.
pub fn snr(power: f64, gain: LinkGain, bandwidth: f64, noise: NoiseModel) -> Result<f64> {
    sinr(power, gain, 0.0, LinkGain(0.0), bandwidth, noise)
}

/// Received SINR with one interfering signal treated as noise.
pub fn sinr(
    power: f64,
    gain: LinkGain,
    interference_power: f64,
    interference_gain: LinkGain,
    bandwidth: f64,
    noise: NoiseModel,
) -> Result<f64> {
    ensure_positive("bandwidth", bandwidth)?;
    ensure_finite_nonneg("signal power", power)?;
    ensure_finite_nonneg("interference power", interference_power)?;
    Ok(sinr_unchecked(
        power * gain.value(),
        interference_power * interference_gain.value(),
        noise.power_in(bandwidth),
    ))
}

#[inline]
pub(crate) fn sinr_unchecked(signal: f64, interference: f64, noise_power: f64) -> f64 {
    signal / (interference + noise_power)
}

/// Rayleigh fading source: `|h|^2` is exponential with mean `mean_gain`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingSampler {
    pub mean_gain: f64,
    /// ChaCha stream id; distinct links must use distinct streams to be independent.
    pub stream: u64,
}

impl FadingSampler {
    pub fn new(mean_gain: f64, stream: u64) -> Result<Self> {
        ensure_positive("mean fading gain", mean_gain)?;
        Ok(FadingSampler { mean_gain, stream })
    }

    fn rng(&self, seed: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// One coherence block: the gains of the primary and secondary uplinks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingState {
    pub primary_gain: LinkGain,
    pub secondary_gain: LinkGain,
}

impl FadingState {
    pub fn new(primary_gain: f64, secondary_gain: f64) -> Result<Self> {
        Ok(FadingState {
            primary_gain: LinkGain::new(primary_gain)?,
            secondary_gain: LinkGain::new(secondary_gain)?,
        })
    }
}

/// Finite set of fading states with probabilities; ergodic averages are
/// weighted sums over it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FadingEnsemble {
    states: Vec<FadingState>,
    weights: Vec<f64>,
}

impl FadingEnsemble {
    pub fn new(states: Vec<FadingState>, weights: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::invalid("fading ensemble must contain at least one state"));
        }
        if states.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} states but {} weights",
                states.len(),
                weights.len()
            )));
        }
        for &w in &weights {
            ensure_finite_nonneg("state weight", w)?;
        }
        let total: f64 = weights.iter().sum();
        // Summing n equal weights of 1/n drifts by O(n) ulps.
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "state weights sum to {total}, expected 1"
            )));
        }
        Ok(FadingEnsemble { states, weights })
    }

    pub fn uniform(states: Vec<FadingState>) -> Result<Self> {
        let n = states.len();
        FadingEnsemble::new(states, vec![1.0 / n as f64; n])
    }

    pub fn states(&self) -> &[FadingState] {
        &self.states
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FadingState, f64)> {
        self.states.iter().zip(self.weights.iter().copied())
    }

    /// Weighted mean of `f` over the states, summed in state order.
    pub fn expectation<F: FnMut(&FadingState) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(s, w)| w * f(s)).sum()
    }
}

/// Draws `n` i.i.d. block-fading states with uniform weights.
pub fn sample_fading(
    primary: &FadingSampler,
    secondary: &FadingSampler,
    n: usize,
    seed: u64,
) -> Result<FadingEnsemble> {
    if n == 0 {
        return Err(Error::invalid("ensemble size must be >= 1"));
    }
    ensure_positive("primary mean gain", primary.mean_gain)?;
    ensure_positive("secondary mean gain", secondary.mean_gain)?;
    if primary.stream == secondary.stream {
        return Err(Error::invalid(
            "primary and secondary samplers share a stream; their gains would be identical",
        ));
    }
    let mut rng_p = primary.rng(seed);
    let mut rng_s = secondary.rng(seed);
    let states = (0..n)
        .map(|_| {
            let gp: f64 = rng_p.sample(Exp1);
            let gs: f64 = rng_s.sample(Exp1);
            FadingState {
                primary_gain: LinkGain(primary.mean_gain * gp),
                secondary_gain: LinkGain(secondary.mean_gain * gs),
            }
        })
        .collect();
    FadingEnsemble::uniform(states)
}
