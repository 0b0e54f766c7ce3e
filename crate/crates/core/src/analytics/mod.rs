//! Closed-form access metrics and the sensing-interval optimizer.
//!
//! For a sensing period `T` and sensing time `t_s`:
//!
//! ```text
//! η   = T / (T + t_s)
//! ζ   = (1 - u) Σ w^x_i / (λ^x_i T) · (1 - e^{-λ^x_i T})
//! ζ_s = 1 - Π (1 - ζ_l)
//! τ   = (1 - p_fa) · F_Y(T)
//! χ   = 1 - η ζ_s (1 - α τ)
//! ```
//!
//! and `E{C_all} = η ζ_s (τ E{C} + (1 - τ) E{C0})`. The forms above are the
//! [`Closure::Printed`] set. [`Closure::Renewal`] swaps ζ and τ for the exact
//! alternating-renewal results, which use the equilibrium residual of the OFF
//! dwell:
//!
//! ```text
//! ζ = (1 - u) / T · Σ (w^y_i / λ^y_i²)(1 - e^{-λ^y_i T}) / E{y}
//! τ = (1 - p_fa) · (1 - Σ (w^y_i / λ^y_i) e^{-λ^y_i T} / E{y})
//! ```
//!
//! The two sets coincide for single-exponential channels with equal ON and
//! OFF rates.

pub mod optimize;
pub mod quadrature;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linkbudget::{self, DbNormal, LinkError, RadioEnv};
use crate::occupancy::{ChannelModel, ExpMixture};

pub use optimize::{optimize_interval, solve_for_target_drop, Bounds, Optimum, TargetSolution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("mean SNR of {0} dB is not positive; use quadrature mode")]
    HighSnrInvalid(f64),
    #[error("invalid policy: {0}")]
    Policy(String),
    #[error("no channels supplied")]
    NoChannels,
    #[error("invalid search bounds [{lo}, {hi}]")]
    Bounds { lo: f64, hi: f64 },
    #[error("target drop {target} is below the attainable minimum {min}")]
    Unattainable { target: f64, min: f64 },
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error(transparent)]
    Link(#[from] LinkError),
}

/// Periodic sensing policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccessPolicy {
    /// Sensing period `T`, seconds.
    pub period: f64,
    /// Sensing time `t_s`, seconds.
    pub sensing_time: f64,
    pub num_channels: usize,
}

impl AccessPolicy {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(AnalyticsError::Policy(format!(
                "period must be positive, got {}",
                self.period
            )));
        }
        if !(self.sensing_time >= 0.0 && self.sensing_time.is_finite()) {
            return Err(AnalyticsError::Policy(format!(
                "sensing time must be non-negative, got {}",
                self.sensing_time
            )));
        }
        if self.num_channels == 0 {
            return Err(AnalyticsError::Policy(
                "at least one channel is required".into(),
            ));
        }
        Ok(())
    }
}

/// How `E{log2(1 + γ)}` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrMode {
    /// `E{log2(1 + γ)} ≈ μ_dB / (10 log10 2)`.
    HighSnr,
    /// 64-node Gauss–Hermite over the dB-normal law.
    #[default]
    Quadrature,
}

/// Which ζ and τ expressions are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    #[default]
    Printed,
    Renewal,
}

/// Evaluation settings shared by the figures and the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Model {
    pub snr: SnrMode,
    pub closure: Closure,
}

/// Every closed-form figure at one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputFigures {
    pub eta: f64,
    pub zeta_per_channel: Vec<f64>,
    pub zeta_s: f64,
    pub tau: f64,
    pub chi: f64,
    pub c0_mean: f64,
    pub c_mean: f64,
    pub c_all_mean: f64,
}

/// `(1 - e^{-x}) / x`, equal to 1 at 0.
fn decay_ratio(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `η = T / (T + t_s)`.
pub fn transmission_efficiency(period: f64, sensing_time: f64) -> f64 {
    period / (period + sensing_time)
}

/// Captured opportunities of one channel, printed form (ON-state parameters).
pub fn captured_opportunities(ch: &ChannelModel, period: f64) -> f64 {
    let u = ch.duty_cycle();
    (1.0 - u)
        * ch.on
            .components()
            .map(|(w, l)| w * decay_ratio(l * period))
            .sum::<f64>()
}

/// Captured opportunities of one channel from the alternating-renewal model.
pub fn captured_opportunities_renewal(ch: &ChannelModel, period: f64) -> f64 {
    let u = ch.duty_cycle();
    let off = &ch.off;
    // E[min(residual, T)] / T with the equilibrium residual of the OFF dwell.
    let s = off
        .components()
        .map(|(w, l)| (w / l) * decay_ratio(l * period))
        .sum::<f64>();
    (1.0 - u) * s / off.mean()
}

/// Captured opportunities under the chosen closure.
pub fn captured(ch: &ChannelModel, period: f64, closure: Closure) -> f64 {
    match closure {
        Closure::Printed => captured_opportunities(ch, period),
        Closure::Renewal => captured_opportunities_renewal(ch, period),
    }
}

/// `ζ_s = 1 - Π (1 - ζ_l)`.
pub fn system_captured(zetas: &[f64]) -> f64 {
    1.0 - zetas.iter().map(|z| 1.0 - z).product::<f64>()
}

/// Mutual-operation fraction, printed form `(1 - p_fa) F_Y(T)`.
pub fn mutual_fraction(off: &ExpMixture, period: f64, pfa: f64) -> f64 {
    (1.0 - pfa) * off.cdf(period)
}

/// Mutual-operation fraction with the equilibrium residual of the OFF dwell.
pub fn mutual_fraction_renewal(off: &ExpMixture, period: f64, pfa: f64) -> f64 {
    let tail = off
        .components()
        .map(|(w, l)| (w / l) * (-l * period).exp())
        .sum::<f64>();
    (1.0 - pfa) * (1.0 - tail / off.mean())
}

/// Mutual fraction across channels, weighted by each channel's idle share `1 - u_l`.
pub fn system_mutual_fraction(
    channels: &[ChannelModel],
    period: f64,
    pfa: f64,
    closure: Closure,
) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ch in channels {
        let idle = 1.0 - ch.duty_cycle();
        let t = match closure {
            Closure::Printed => mutual_fraction(&ch.off, period, pfa),
            Closure::Renewal => mutual_fraction_renewal(&ch.off, period, pfa),
        };
        num += idle * t;
        den += idle;
    }
    num / den
}

/// `χ = 1 - η ζ_s (1 - α τ)` for a given `α`.
pub fn drop_from_parts(eta: f64, zeta_s: f64, alpha: f64, tau: f64) -> f64 {
    1.0 - eta * zeta_s * (1.0 - alpha * tau)
}

/// Throughput drop with `α` from the link budget and the printed closure.
pub fn throughput_drop(
    policy: &AccessPolicy,
    channels: &[ChannelModel],
    env: &RadioEnv,
    pfa: f64,
) -> Result<f64, AnalyticsError> {
    let a = linkbudget::alpha(env)?;
    throughput_drop_with(policy, channels, a, pfa, Closure::Printed)
}

/// Throughput drop for an explicit `α` and closure.
pub fn throughput_drop_with(
    policy: &AccessPolicy,
    channels: &[ChannelModel],
    alpha: f64,
    pfa: f64,
    closure: Closure,
) -> Result<f64, AnalyticsError> {
    policy.validate()?;
    let chans = serving_channels(channels, policy.num_channels)?;
    let eta = transmission_efficiency(policy.period, policy.sensing_time);
    let zetas: Vec<f64> = chans
        .iter()
        .map(|c| captured(c, policy.period, closure))
        .collect();
    let tau = system_mutual_fraction(&chans, policy.period, pfa, closure);
    Ok(drop_from_parts(eta, system_captured(&zetas), alpha, tau))
}

/// The first `n` channels, cycling through `channels` when fewer are given.
pub fn serving_channels(
    channels: &[ChannelModel],
    n: usize,
) -> Result<Vec<ChannelModel>, AnalyticsError> {
    if channels.is_empty() {
        return Err(AnalyticsError::NoChannels);
    }
    Ok(channels.iter().cycle().take(n).cloned().collect())
}

/// `log2(1 + 10^{x/10})` without overflow.
pub fn log2_one_plus_db(x_db: f64) -> f64 {
    let y = x_db * std::f64::consts::LN_10 / 10.0;
    let ln = if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    };
    ln / std::f64::consts::LN_2
}

/// `E{log2(1 + γ)}` for `γ` dB-normal.
pub fn expected_spectral_efficiency(g: &DbNormal, mode: SnrMode) -> Result<f64, AnalyticsError> {
    match mode {
        SnrMode::HighSnr => {
            if !(g.mean > 0.0) {
                return Err(AnalyticsError::HighSnrInvalid(g.mean));
            }
            Ok(g.mean / (10.0 * std::f64::consts::LOG10_2))
        }
        SnrMode::Quadrature => Ok(quadrature::normal_expectation(
            g.mean,
            g.sigma,
            log2_one_plus_db,
        )),
    }
}

/// Mean interference-free and interfered rates `(E{C0}, E{C})`, bits/s.
pub fn mean_rates(env: &RadioEnv, mode: SnrMode) -> Result<(f64, f64), AnalyticsError> {
    let s = linkbudget::sinr_dist(env)?;
    let c0 = env.bandwidth * expected_spectral_efficiency(&s.gamma0, mode)?;
    let c = env.bandwidth * expected_spectral_efficiency(&s.gamma, mode)?;
    Ok((c0, c))
}

/// Effective `α = 1 - E{C}/E{C0}`; equals the link-budget `α` in high-SNR mode.
pub fn effective_alpha(env: &RadioEnv, mode: SnrMode) -> Result<f64, AnalyticsError> {
    let (c0, c) = mean_rates(env, mode)?;
    Ok(1.0 - c / c0)
}

/// Mean throughputs given the access fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Throughputs {
    pub c0_mean: f64,
    pub c_mean: f64,
    pub c_all_mean: f64,
    pub chi: f64,
}

/// `E{C0}`, `E{C}`, `E{C_all}` and `χ = 1 - E{C_all}/E{C0}`.
pub fn expected_throughputs(
    env: &RadioEnv,
    eta: f64,
    zeta_s: f64,
    tau: f64,
    mode: SnrMode,
) -> Result<Throughputs, AnalyticsError> {
    let (c0, c) = mean_rates(env, mode)?;
    let c_all = eta * zeta_s * (tau * c + (1.0 - tau) * c0);
    Ok(Throughputs {
        c0_mean: c0,
        c_mean: c,
        c_all_mean: c_all,
        chi: 1.0 - c_all / c0,
    })
}

/// All figures at one policy.
pub fn throughput_figures(
    policy: &AccessPolicy,
    channels: &[ChannelModel],
    env: &RadioEnv,
    pfa: f64,
    model: Model,
) -> Result<ThroughputFigures, AnalyticsError> {
    policy.validate()?;
    let chans = serving_channels(channels, policy.num_channels)?;
    let eta = transmission_efficiency(policy.period, policy.sensing_time);
    let zetas: Vec<f64> = chans
        .iter()
        .map(|c| captured(c, policy.period, model.closure))
        .collect();
    let zeta_s = system_captured(&zetas);
    let tau = system_mutual_fraction(&chans, policy.period, pfa, model.closure);
    let t = expected_throughputs(env, eta, zeta_s, tau, model.snr)?;
    Ok(ThroughputFigures {
        eta,
        zeta_per_channel: zetas,
        zeta_s,
        tau,
        chi: t.chi,
        c0_mean: t.c0_mean,
        c_mean: t.c_mean,
        c_all_mean: t.c_all_mean,
    })
}

/// FBS transmit power (dBm) giving `E{C0} = target` bits/s.
pub fn calibrate_fbs_power(
    env: &RadioEnv,
    target: f64,
    mode: SnrMode,
) -> Result<f64, AnalyticsError> {
    let pl = linkbudget::path_loss(env, linkbudget::Link::FbsIndoor)?;
    let n = linkbudget::noise_dbm(env);
    if mode == SnrMode::HighSnr {
        // The high-SNR rate is linear in the mean SNR.
        let mu = target / env.bandwidth * 10.0 * std::f64::consts::LOG10_2;
        return Ok(mu + n + pl);
    }
    let c0 = |p: f64| -> Result<f64, AnalyticsError> {
        Ok(mean_rates(&RadioEnv { pt_fbs: p, ..*env }, mode)?.0)
    };
    // Bracket in received SNR from -60 dB to 300 dB.
    let (mut lo, mut hi) = (n + pl - 60.0, n + pl + 300.0);
    if c0(lo)? > target || c0(hi)? < target {
        return Err(AnalyticsError::Calibration(format!(
            "target {target} bit/s outside the reachable range"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if c0(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
