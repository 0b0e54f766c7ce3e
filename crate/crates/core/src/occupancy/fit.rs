//! Tail-recursion fitting of exponential mixtures to dwell samples.
//!
//! Components are peeled off the empirical tail one at a time. With anchors
//! `c_i = c1 · a^{-(i-1)}` and the shifted survival function
//! `G_i(t) = 1 - F(t) - Σ_{j<i} w_j e^{-λ_j t}`, level `i < k` takes
//!
//! ```text
//! λ_i = ln(G_i(c_i) / G_i(b c_i)) / ((b - 1) c_i),    w_i = G_i(c_i) e^{λ_i c_i}
//! ```
//!
//! and the last level closes the weights, `w_k = 1 - Σ w_j`,
//! `λ_k = ln(w_k / G_k(c_k)) / c_k`. Levels whose pair is infeasible are dropped
//! and the survivors renormalized.
//!
//! With [`Anchors::Auto`] the recursion is repeated over a small grid of
//! anchors and component counts up to `k`, keeping the best-scoring fit.

use thiserror::Error;

use super::gof::{quantile_sorted, Histogram};
use super::{DwellSamples, ExpMixture, OccupancyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("no dwell samples to fit")]
    Empty,
    #[error("invalid fit configuration: {0}")]
    Config(String),
    #[error("anchor {anchor} leaves no empirical tail (F = {cdf})")]
    NoTail { anchor: f64, cdf: f64 },
    #[error("degenerate tail at level {level}: G(c) equals G(b c)")]
    Degenerate { level: usize },
    #[error("every recursion level was infeasible")]
    NoFeasibleComponent,
    #[error(transparent)]
    Occupancy(#[from] OccupancyError),
}

/// How the tail anchors are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchors {
    /// Search c1 over upper percentiles, `a` over a few spreads, `b = 2`.
    Auto,
    Fixed {
        c1: f64,
        b: f64,
        a: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub k: usize,
    pub anchors: Anchors,
}

impl FitConfig {
    pub fn auto(k: usize) -> Self {
        Self {
            k,
            anchors: Anchors::Auto,
        }
    }

    pub fn fixed(k: usize, c1: f64, b: f64, a: f64) -> Self {
        Self {
            k,
            anchors: Anchors::Fixed { c1, b, a },
        }
    }

    pub fn validate(&self) -> Result<(), FitError> {
        if self.k == 0 {
            return Err(FitError::Config("k must be at least 1".into()));
        }
        if let Anchors::Fixed { c1, b, a } = self.anchors {
            if !(c1 > 0.0 && c1.is_finite()) {
                return Err(FitError::Config(format!("c1 must be positive, got {c1}")));
            }
            if !(b > 1.0 && b.is_finite()) {
                return Err(FitError::Config(format!("b must exceed 1, got {b}")));
            }
            if !(a > b && a.is_finite()) {
                return Err(FitError::Config(format!(
                    "a must exceed b, got a={a} b={b}"
                )));
            }
        }
        Ok(())
    }
}

/// Result of [`fit_mixture`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub mixture: ExpMixture,
    pub requested_k: usize,
    pub effective_k: usize,
    pub c1: f64,
    pub b: f64,
    pub a: f64,
    /// Levels dropped as infeasible in the winning recursion.
    pub dropped_levels: Vec<usize>,
    /// Φ of the mixture on the sample histogram.
    pub log_likelihood: f64,
}

/// Right-continuous empirical CDF over sorted samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// `#{x ≤ t} / n`.
    pub fn cdf(&self, t: f64) -> f64 {
        self.sorted.partition_point(|&x| x <= t) as f64 / self.sorted.len() as f64
    }

    pub fn ccdf(&self, t: f64) -> f64 {
        (self.sorted.len() - self.sorted.partition_point(|&x| x <= t)) as f64
            / self.sorted.len() as f64
    }

    pub fn quantile(&self, p: f64) -> f64 {
        quantile_sorted(&self.sorted, p)
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }
}

struct Recursion {
    pairs: Vec<(f64, f64)>,
    dropped: Vec<usize>,
}

fn recurse(ecdf: &EmpiricalCdf, k: usize, c1: f64, b: f64, a: f64) -> Result<Recursion, FitError> {
    let tail = ecdf.ccdf(c1);
    if !(tail > 0.0) || ecdf.cdf(c1) <= 0.0 {
        return Err(FitError::NoTail {
            anchor: c1,
            cdf: ecdf.cdf(c1),
        });
    }
    if k == 1 {
        let rate = -tail.ln() / c1;
        return Ok(Recursion {
            pairs: vec![(1.0, rate)],
            dropped: Vec::new(),
        });
    }
    if ecdf.ccdf(b * c1) <= 0.0 {
        return Err(FitError::NoTail {
            anchor: b * c1,
            cdf: 1.0,
        });
    }

    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(k);
    let mut dropped = Vec::new();
    let shifted = |pairs: &[(f64, f64)], t: f64| {
        ecdf.ccdf(t) - pairs.iter().map(|&(w, l)| w * (-l * t).exp()).sum::<f64>()
    };
    for level in 1..k {
        let c = c1 * a.powi(-(level as i32 - 1));
        let g1 = shifted(&pairs, c);
        let g2 = shifted(&pairs, b * c);
        if g1 > 0.0 && g1 == g2 {
            return Err(FitError::Degenerate { level });
        }
        if !(g1 > 0.0 && g2 > 0.0 && g1 > g2) {
            dropped.push(level);
            continue;
        }
        let rate = (g1 / g2).ln() / ((b - 1.0) * c);
        let weight = g1 * (rate * c).exp();
        let remaining = 1.0 - pairs.iter().map(|p| p.0).sum::<f64>();
        if !(weight.is_finite() && weight > 0.0 && weight < remaining && rate.is_finite()) {
            dropped.push(level);
            continue;
        }
        pairs.push((weight, rate));
    }
    let ck = c1 * a.powi(-(k as i32 - 1));
    let wk = 1.0 - pairs.iter().map(|p| p.0).sum::<f64>();
    let gk = shifted(&pairs, ck);
    if wk > 0.0 && gk > 0.0 && wk > gk {
        pairs.push((wk, (wk / gk).ln() / ck));
    } else {
        dropped.push(k);
    }
    if pairs.is_empty() {
        return Err(FitError::NoFeasibleComponent);
    }
    Ok(Recursion { pairs, dropped })
}

fn assemble(
    ecdf: &EmpiricalCdf,
    hist: &Histogram,
    requested_k: usize,
    k: usize,
    (c1, b, a): (f64, f64, f64),
) -> Result<FitOutcome, FitError> {
    let r = recurse(ecdf, k, c1, b, a)?;
    let mixture = ExpMixture::from_pairs(&r.pairs)?;
    let log_likelihood = hist
        .score(&mixture)
        .map_err(|e| FitError::Config(e.to_string()))?;
    Ok(FitOutcome {
        effective_k: mixture.k(),
        mixture,
        requested_k,
        c1,
        b,
        a,
        dropped_levels: r.dropped,
        log_likelihood,
    })
}

const AUTO_PERCENTILES: [f64; 4] = [0.90, 0.95, 0.98, 0.99];
const AUTO_B: f64 = 2.0;

/// Fits an exponential mixture of at most `cfg.k` components to `samples`.
pub fn fit_mixture(samples: &DwellSamples, cfg: &FitConfig) -> Result<FitOutcome, FitError> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(FitError::Empty);
    }
    let ecdf = EmpiricalCdf::new(samples.values());
    let hist =
        Histogram::freedman_diaconis(ecdf.sorted()).map_err(|e| FitError::Config(e.to_string()))?;

    match cfg.anchors {
        Anchors::Fixed { c1, b, a } => {
            if c1 >= ecdf.max() {
                return Err(FitError::NoTail {
                    anchor: c1,
                    cdf: 1.0,
                });
            }
            assemble(&ecdf, &hist, cfg.k, cfg.k, (c1, b, a))
        }
        Anchors::Auto => {
            let q05 = ecdf.quantile(0.05);
            let mut best: Option<FitOutcome> = None;
            for count in 1..=cfg.k {
                for &p in &AUTO_PERCENTILES {
                    let c1 = ecdf.quantile(p);
                    let mut spreads = vec![4.0, 8.0];
                    if count > 1 && q05 > 0.0 {
                        let s = (c1 / q05).powf(1.0 / (count - 1) as f64).max(4.0);
                        if !spreads.contains(&s) {
                            spreads.push(s);
                        }
                    }
                    if count == 1 {
                        spreads.truncate(1);
                    }
                    for a in spreads {
                        let Ok(out) = assemble(&ecdf, &hist, cfg.k, count, (c1, AUTO_B, a)) else {
                            continue;
                        };
                        if best
                            .as_ref()
                            .is_none_or(|b| out.log_likelihood > b.log_likelihood)
                        {
                            best = Some(out);
                        }
                    }
                }
            }
            best.ok_or(FitError::NoFeasibleComponent)
        }
    }
}
