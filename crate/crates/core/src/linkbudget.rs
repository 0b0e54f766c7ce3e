//! Path loss, log-normal shadowing and the dB-domain SNR/SINR distributions.
//!
//! Carrier frequency enters the path-loss formulas in GHz. Noise power over the
//! band is `noise_density + 10 log10(B)` dBm. Everything below works on dB
//! means and spreads; [`DbNormal`] is a Gaussian on the dB scale.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("FBS mean received power equals the noise floor; alpha is undefined")]
    VanishingDenominator,
    #[error("calibration failed: {0}")]
    Calibration(String),
}

/// Radio scenario: transmit powers, geometry and shadowing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioEnv {
    /// MBS transmit power, dBm.
    pub pt_mbs: f64,
    /// FBS transmit power, dBm.
    pub pt_fbs: f64,
    /// MBS to terminal distance `R`, meters.
    pub mbs_distance: f64,
    /// Indoor distance `d`, meters.
    pub indoor_distance: f64,
    /// Carrier, GHz.
    pub carrier: f64,
    pub shadow_sigma_mbs: f64,
    pub shadow_sigma_fbs: f64,
    /// Noise density, dBm/Hz.
    pub noise_density: f64,
    /// Bandwidth, Hz.
    pub bandwidth: f64,
}

/// Which link a path loss refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    /// Outdoor MBS to the indoor terminal.
    MbsToIndoor,
    /// FBS to terminal, same room.
    FbsIndoor,
}

/// Gaussian on the dB scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbNormal {
    pub mean: f64,
    pub sigma: f64,
}

impl DbNormal {
    pub fn new(mean: f64, sigma: f64) -> Result<Self, LinkError> {
        if !(sigma >= 0.0) {
            return Err(LinkError::Negative {
                name: "sigma",
                value: sigma,
            });
        }
        Ok(Self { mean, sigma })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.sigma * z
    }
}

/// SINR and SNR distributions at the terminal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrDist {
    /// SINR under MBS interference.
    pub gamma: DbNormal,
    /// Interference-free SNR.
    pub gamma0: DbNormal,
}

impl RadioEnv {
    pub fn validate(&self) -> Result<(), LinkError> {
        for (name, value) in [
            ("mbs_distance", self.mbs_distance),
            ("indoor_distance", self.indoor_distance),
            ("carrier", self.carrier),
            ("bandwidth", self.bandwidth),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(LinkError::NonPositive { name, value });
            }
        }
        for (name, value) in [
            ("shadow_sigma_mbs", self.shadow_sigma_mbs),
            ("shadow_sigma_fbs", self.shadow_sigma_fbs),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(LinkError::Negative { name, value });
            }
        }
        Ok(())
    }
}

/// Path loss in dB.
pub fn path_loss(env: &RadioEnv, link: Link) -> Result<f64, LinkError> {
    env.validate()?;
    let fc = env.carrier.log10();
    Ok(match link {
        Link::MbsToIndoor => {
            36.7 * env.mbs_distance.log10() + 26.0 * fc + 0.5 * env.indoor_distance + 42.7
        }
        Link::FbsIndoor => 43.3 * env.indoor_distance.log10() + 20.0 * fc + 11.5,
    })
}

/// Received power distribution in dBm.
pub fn received_power_dist(env: &RadioEnv, link: Link) -> Result<DbNormal, LinkError> {
    let pl = path_loss(env, link)?;
    Ok(match link {
        Link::MbsToIndoor => DbNormal {
            mean: env.pt_mbs - pl,
            sigma: env.shadow_sigma_mbs,
        },
        Link::FbsIndoor => DbNormal {
            mean: env.pt_fbs - pl,
            sigma: env.shadow_sigma_fbs,
        },
    })
}

/// Noise power over the band, dBm.
pub fn noise_dbm(env: &RadioEnv) -> f64 {
    env.noise_density + 10.0 * env.bandwidth.log10()
}

/// Noise power over the band in linear milliwatts.
pub fn noise_mw(env: &RadioEnv) -> f64 {
    10f64.powf(noise_dbm(env) / 10.0)
}

/// SINR (interference dominated) and SNR distributions in dB.
pub fn sinr_dist(env: &RadioEnv) -> Result<SinrDist, LinkError> {
    let f = received_power_dist(env, Link::FbsIndoor)?;
    let m = received_power_dist(env, Link::MbsToIndoor)?;
    Ok(SinrDist {
        gamma: DbNormal {
            mean: f.mean - m.mean,
            sigma: f.sigma.hypot(m.sigma),
        },
        gamma0: DbNormal {
            mean: f.mean - noise_dbm(env),
            sigma: f.sigma,
        },
    })
}

/// `α = (μ_M - N) / (μ_F - N)` with every term in dB.
pub fn alpha(env: &RadioEnv) -> Result<f64, LinkError> {
    let f = received_power_dist(env, Link::FbsIndoor)?.mean;
    let m = received_power_dist(env, Link::MbsToIndoor)?.mean;
    let n = noise_dbm(env);
    let den = f - n;
    if den.abs() < 1e-12 {
        return Err(LinkError::VanishingDenominator);
    }
    Ok((m - n) / den)
}

/// MBS distance giving the requested `alpha`, other fields unchanged.
///
/// The MBS path loss is linear in `log10(R)`, so the solve is closed form.
pub fn distance_for_alpha(env: &RadioEnv, target: f64) -> Result<f64, LinkError> {
    let f = received_power_dist(env, Link::FbsIndoor)?.mean;
    let n = noise_dbm(env);
    let mu_m = n + target * (f - n);
    let pl = env.pt_mbs - mu_m;
    let rest = 26.0 * env.carrier.log10() + 0.5 * env.indoor_distance + 42.7;
    let r = 10f64.powf((pl - rest) / 36.7);
    if !(r > 0.0 && r.is_finite()) {
        return Err(LinkError::Calibration(format!(
            "no distance yields alpha {target}"
        )));
    }
    Ok(r)
}
