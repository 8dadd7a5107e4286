//! Semantic and bit rate models.
//!
//! The semantic rate of a text transmitter is its sentence throughput times the
//! semantic units (suts) carried per sentence, scaled by the sentence similarity
//! achieved at the received SNR:
//!
//! ```text
//! S = I * W / (k * L) * eps(snr)
//! eps(snr) = A1 + (A2 - A1) / (1 + exp(-(C1 * snr_dB + C2)))
//! ```
//!
//! with one channel symbol per Hz per second. The bit rate is the Shannon rate
//! `W log2(1 + sinr)`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite_nonneg, ensure_positive, Error, Result};

/// SNR floor applied before the dB conversion inside the logistic.
pub const SNR_FLOOR: f64 = 1e-12;

/// Text source and logistic similarity-curve parameters.
///
/// The defaults are desk-scale placeholders: an S-shaped curve with its
/// midpoint at 10 dB, 20 suts per 10-word sentence, 4 symbols per word.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemanticTextModel {
    /// `I`, semantic units per sentence.
    pub suts_per_sentence: f64,
    /// `L`, words per sentence.
    pub words_per_sentence: f64,
    /// `k`, channel symbols per word.
    pub symbols_per_word: f64,
    /// Lower asymptote `A1` of the similarity curve.
    pub logistic_lower: f64,
    /// Upper asymptote `A2` of the similarity curve.
    pub logistic_upper: f64,
    /// Slope `C1`, per dB.
    pub logistic_slope: f64,
    /// Offset `C2` added to `C1 * snr_dB`.
    pub logistic_shift: f64,
}

impl Default for SemanticTextModel {
    fn default() -> Self {
        SemanticTextModel {
            suts_per_sentence: 20.0,
            words_per_sentence: 10.0,
            symbols_per_word: 4.0,
            logistic_lower: 0.2,
            logistic_upper: 0.98,
            logistic_slope: 0.25,
            logistic_shift: -2.5,
        }
    }
}

impl SemanticTextModel {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("suts_per_sentence", self.suts_per_sentence)?;
        ensure_positive("words_per_sentence", self.words_per_sentence)?;
        ensure_positive("symbols_per_word", self.symbols_per_word)?;
        ensure_positive("logistic_slope", self.logistic_slope)?;
        if !self.logistic_shift.is_finite() {
            return Err(Error::invalid("logistic_shift must be finite"));
        }
        let (a1, a2) = (self.logistic_lower, self.logistic_upper);
        if !(0.0..1.0).contains(&a1) || !(a2 > a1 && a2 <= 1.0) {
            return Err(Error::invalid(format!(
                "logistic asymptotes must satisfy 0 <= A1 < A2 <= 1, got A1={a1}, A2={a2}"
            )));
        }
        Ok(())
    }

    /// Sentence similarity at the given linear SNR, in `[A1, A2]`.
    pub fn similarity(&self, snr: f64) -> Result<f64> {
        if snr.is_nan() || snr < 0.0 {
            return Err(Error::invalid(format!("snr must be >= 0, got {snr}")));
        }
        Ok(self.similarity_unchecked(snr))
    }

    #[inline]
    pub(crate) fn similarity_unchecked(&self, snr: f64) -> f64 {
        let snr_db = 10.0 * snr.max(SNR_FLOOR).log10();
        let z = self.logistic_slope * snr_db + self.logistic_shift;
        self.logistic_lower + (self.logistic_upper - self.logistic_lower) / (1.0 + (-z).exp())
    }

    /// Sentence throughput per Hz times suts per sentence: `I / (k L)`.
    #[inline]
    pub fn suts_per_symbol(&self) -> f64 {
        self.suts_per_sentence / (self.symbols_per_word * self.words_per_sentence)
    }

    /// Semantic rate in suts/s. A silent transmitter delivers nothing, even
    /// though the fitted curve is above zero at zero SNR.
    pub fn semantic_rate(&self, bandwidth: f64, snr: f64, transmitting: bool) -> Result<f64> {
        ensure_finite_nonneg("bandwidth", bandwidth)?;
        if !transmitting || bandwidth == 0.0 {
            return Ok(0.0);
        }
        Ok(self.suts_per_symbol() * bandwidth * self.similarity(snr)?)
    }

    #[inline]
    pub(crate) fn semantic_rate_unchecked(&self, bandwidth: f64, snr: f64, transmitting: bool) -> f64 {
        if !transmitting || bandwidth == 0.0 {
            0.0
        } else {
            self.suts_per_symbol() * bandwidth * self.similarity_unchecked(snr)
        }
    }

    /// Upper bound of the semantic rate on `bandwidth` Hz: `I W / (k L) * A2`.
    pub fn semantic_ceiling(&self, bandwidth: f64) -> f64 {
        self.suts_per_symbol() * bandwidth * self.logistic_upper
    }
}

/// Shannon rate `bandwidth * log2(1 + sinr)` in bits/s.
pub fn bit_rate(bandwidth: f64, sinr: f64) -> Result<f64> {
    ensure_finite_nonneg("bandwidth", bandwidth)?;
    if sinr.is_nan() || sinr < 0.0 {
        return Err(Error::invalid(format!("sinr must be >= 0, got {sinr}")));
    }
    Ok(bit_rate_unchecked(bandwidth, sinr))
}

#[inline]
pub(crate) fn bit_rate_unchecked(bandwidth: f64, sinr: f64) -> f64 {
    if bandwidth == 0.0 {
        0.0
    } else {
        bandwidth * (1.0 + sinr).log2()
    }
}

/// Bits-per-word factor used to express a bit rate as an equivalent semantic rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BitEquivalence {
    /// `mu`, bits per word (default: 5 ASCII characters of 8 bits).
    pub bits_per_word: f64,
}

impl Default for BitEquivalence {
    fn default() -> Self {
        BitEquivalence { bits_per_word: 40.0 }
    }
}

impl BitEquivalence {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("bits_per_word", self.bits_per_word)
    }

    /// bits/s -> words/s -> sentences/s -> suts/s.
    #[inline]
    pub fn to_semantic(&self, rate_bits: f64, model: &SemanticTextModel) -> f64 {
        rate_bits * model.suts_per_sentence / (model.words_per_sentence * self.bits_per_word)
    }

    #[inline]
    pub fn to_bits(&self, rate_suts: f64, model: &SemanticTextModel) -> f64 {
        rate_suts * model.words_per_sentence * self.bits_per_word / model.suts_per_sentence
    }
}
