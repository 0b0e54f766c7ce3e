//! Exponential-mixture (hyperexponential) dwell-time models.
//!
//! A channel alternates between ON (occupied by the macro cell) and OFF (idle)
//! periods. Each dwell length is modeled as a mixture of `k` exponentials,
//!
//! ```text
//! f(θ) = Σ w_i λ_i e^{-λ_i θ},     F(θ) = 1 - Σ w_i e^{-λ_i θ},
//! ```
//!
//! with rates kept in strictly increasing order. [`ChannelModel`] pairs an ON
//! and an OFF mixture and yields the duty cycle `u`.
//!
//! Fitting lives in [`fit`], goodness of fit in [`gof`].

pub mod fit;
pub mod gof;

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fit::{fit_mixture, Anchors, EmpiricalCdf, FitConfig, FitError, FitOutcome};
pub use gof::{
    goodness_of_fit, Density, GeneralizedPareto, GofError, Histogram, HistogramDensity,
    LogNormalDensity,
};

/// Tolerance on `Σ w_i = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Validation failures for mixtures, channels and dwell samples.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OccupancyError {
    #[error("mixture needs at least one component")]
    Empty,
    #[error("weights and rates differ in length ({weights} vs {rates})")]
    LengthMismatch { weights: usize, rates: usize },
    #[error("weight {index} is negative or not finite: {value}")]
    BadWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOL}")]
    WeightSum { sum: f64 },
    #[error("rate {index} must be positive and finite, got {value}")]
    BadRate { index: usize, value: f64 },
    #[error("rates must be strictly increasing (rate {index} = {value} does not exceed its predecessor)")]
    RatesNotIncreasing { index: usize, value: f64 },
    #[error("duration must be non-negative, got {0}")]
    NegativeDuration(f64),
    #[error("dwell sample {index} must be positive and finite, got {value}")]
    BadDwell { index: usize, value: f64 },
    #[error("duty cycle {0} is outside (0, 1)")]
    DutyCycle(f64),
}

/// Channel state: ON means the primary (macro cell) is transmitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum State {
    #[serde(rename = "ON")]
    On,
    #[serde(rename = "OFF")]
    Off,
}

impl State {
    pub fn flip(self) -> State {
        match self {
            State::On => State::Off,
            State::Off => State::On,
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            State::On => "ON",
            State::Off => "OFF",
        })
    }
}

impl std::str::FromStr for State {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "ON" | "on" => Ok(State::On),
            "OFF" | "off" => Ok(State::Off),
            other => Err(format!("unknown state `{other}` (expected ON or OFF)")),
        }
    }
}

/// A validated mixture of exponentials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpMixture {
    weights: Vec<f64>,
    rates: Vec<f64>,
}

/// Point evaluation of a mixture, see [`mixture_stats`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureStats {
    pub pdf: f64,
    pub cdf: f64,
    pub mean: f64,
}

impl ExpMixture {
    /// Builds a mixture, checking every invariant.
    pub fn new(weights: Vec<f64>, rates: Vec<f64>) -> Result<Self, OccupancyError> {
        if weights.len() != rates.len() {
            return Err(OccupancyError::LengthMismatch {
                weights: weights.len(),
                rates: rates.len(),
            });
        }
        if weights.is_empty() {
            return Err(OccupancyError::Empty);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(OccupancyError::BadWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(OccupancyError::WeightSum { sum });
        }
        for (index, &value) in rates.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(OccupancyError::BadRate { index, value });
            }
            if index > 0 && value <= rates[index - 1] {
                return Err(OccupancyError::RatesNotIncreasing { index, value });
            }
        }
        Ok(Self { weights, rates })
    }

    /// Single exponential with the given rate.
    pub fn exponential(rate: f64) -> Result<Self, OccupancyError> {
        Self::new(vec![1.0], vec![rate])
    }

    /// Builds a mixture from `(weight, rate)` pairs in any order.
    ///
    /// Weights are renormalized to sum to one, pairs are sorted by rate, and
    /// pairs sharing a rate are merged. Zero-weight pairs are discarded.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, OccupancyError> {
        let mut pairs: Vec<(f64, f64)> = pairs.iter().copied().filter(|p| p.0 != 0.0).collect();
        for (index, &(w, r)) in pairs.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(OccupancyError::BadWeight { index, value: w });
            }
            if !(r.is_finite() && r > 0.0) {
                return Err(OccupancyError::BadRate { index, value: r });
            }
        }
        if pairs.is_empty() {
            return Err(OccupancyError::Empty);
        }
        pairs.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (w, r) in pairs {
            match merged.last_mut() {
                Some(last) if last.1 == r => last.0 += w,
                _ => merged.push((w, r)),
            }
        }
        let total: f64 = merged.iter().map(|p| p.0).sum();
        let weights = merged.iter().map(|p| p.0 / total).collect();
        let rates = merged.iter().map(|p| p.1).collect();
        Self::new(weights, rates)
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn components(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights.iter().copied().zip(self.rates.iter().copied())
    }

    pub fn pdf(&self, theta: f64) -> f64 {
        if theta < 0.0 {
            return 0.0;
        }
        self.components()
            .map(|(w, l)| w * l * (-l * theta).exp())
            .sum()
    }

    /// Survival function `1 - F(θ)`.
    pub fn ccdf(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 1.0;
        }
        let g: f64 = self.components().map(|(w, l)| w * (-l * theta).exp()).sum();
        g.min(1.0)
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        // 1 - ccdf loses precision near 0; use expm1 per component instead.
        let f: f64 = self
            .components()
            .map(|(w, l)| -w * (-l * theta).exp_m1())
            .sum();
        f.min(1.0)
    }

    pub fn mean(&self) -> f64 {
        self.components().map(|(w, l)| w / l).sum()
    }

    /// Second moment `E[θ²] = Σ 2 w_i / λ_i²`.
    pub fn second_moment(&self) -> f64 {
        self.components().map(|(w, l)| 2.0 * w / (l * l)).sum()
    }

    /// Draws one dwell: component `i` with probability `w_i`, then `Exp(λ_i)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let rate = if self.k() == 1 {
            self.rates[0]
        } else {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = self.rates[self.k() - 1];
            for (w, l) in self.components() {
                acc += w;
                if u < acc {
                    chosen = l;
                    break;
                }
            }
            chosen
        };
        let e: f64 = Exp1.sample(rng);
        e / rate
    }
}

impl<'de> Deserialize<'de> for ExpMixture {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            weights: Vec<f64>,
            rates: Vec<f64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        ExpMixture::new(raw.weights, raw.rates).map_err(serde::de::Error::custom)
    }
}

/// Evaluates pdf, cdf and mean of `m` at `theta`.
pub fn mixture_stats(m: &ExpMixture, theta: f64) -> Result<MixtureStats, OccupancyError> {
    if !(theta >= 0.0) {
        return Err(OccupancyError::NegativeDuration(theta));
    }
    Ok(MixtureStats {
        pdf: m.pdf(theta),
        cdf: m.cdf(theta),
        mean: m.mean(),
    })
}

/// Draws one dwell duration from `m`.
pub fn sample_dwell<R: Rng + ?Sized>(m: &ExpMixture, rng: &mut R) -> f64 {
    m.sample(rng)
}

/// ON/OFF mixtures describing one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub on: ExpMixture,
    pub off: ExpMixture,
}

impl ChannelModel {
    pub fn new(on: ExpMixture, off: ExpMixture) -> Result<Self, OccupancyError> {
        let ch = Self { on, off };
        let u = ch.duty_cycle();
        if !(u > 0.0 && u < 1.0) {
            return Err(OccupancyError::DutyCycle(u));
        }
        Ok(ch)
    }

    /// Exponential ON and OFF dwells with the given rates.
    pub fn exponential(on_rate: f64, off_rate: f64) -> Result<Self, OccupancyError> {
        Self::new(
            ExpMixture::exponential(on_rate)?,
            ExpMixture::exponential(off_rate)?,
        )
    }

    pub fn mixture(&self, state: State) -> &ExpMixture {
        match state {
            State::On => &self.on,
            State::Off => &self.off,
        }
    }

    /// `u = E{x} / (E{x} + E{y})`.
    pub fn duty_cycle(&self) -> f64 {
        let on = self.on.mean();
        on / (on + self.off.mean())
    }
}

/// Free-function form of [`ChannelModel::duty_cycle`].
pub fn duty_cycle(ch: &ChannelModel) -> f64 {
    ch.duty_cycle()
}

/// Observed dwell lengths of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct DwellSamples {
    values: Vec<f64>,
    state: State,
}

impl DwellSamples {
    pub fn new(values: Vec<f64>, state: State) -> Result<Self, OccupancyError> {
        for (index, &value) in values.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(OccupancyError::BadDwell { index, value });
            }
        }
        Ok(Self { values, state })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn state(&self) -> State {
        self.state
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}
