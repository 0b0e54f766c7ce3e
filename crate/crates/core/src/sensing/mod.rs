//! Energy detection: threshold setting, operating point and window decisions.
//!
//! A window of `M = 2 B t_s` real samples is declared busy (H1) when its energy
//! `Σ r(m)²` reaches the threshold
//!
//! ```text
//! ρ = 2 √(t_s B) σ² Q⁻¹(p_fa / (1 - u)) + 2 t_s B σ²
//! ```
//!
//! `σ²` is the per-sample noise variance, so the H0 window energy has mean
//! `2 t_s B σ²`. False-alarm and detection probabilities are prior-weighted:
//! `p_fa ≤ 1 - u` and `p_d ≤ u`. The classical conditional rates are
//! `p_fa / (1 - u)` and `p_d / u`.

pub mod qfunc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use qfunc::{q, q_inv};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensingError {
    #[error("p_fa / (1 - u) = {0} is outside (0, 1)")]
    Domain(f64),
    #[error("invalid detector: {0}")]
    Invalid(String),
    #[error("window has {got} samples, expected {expected}")]
    WindowLength { expected: usize, got: usize },
}

/// Energy-detector configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub target_pfa: f64,
    /// Sensing time `t_s`, seconds.
    pub sensing_time: f64,
    /// Bandwidth `B`, Hz.
    pub bandwidth: f64,
    /// Per-sample noise variance `σ²`, linear power.
    pub noise_variance: f64,
    /// Prior occupancy `u`.
    pub duty_cycle_prior: f64,
}

impl DetectorSpec {
    pub fn new(
        target_pfa: f64,
        sensing_time: f64,
        bandwidth: f64,
        noise_variance: f64,
        duty_cycle_prior: f64,
    ) -> Result<Self, SensingError> {
        let spec = Self {
            target_pfa,
            sensing_time,
            bandwidth,
            noise_variance,
            duty_cycle_prior,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SensingError> {
        if !(self.sensing_time > 0.0 && self.sensing_time.is_finite()) {
            return Err(SensingError::Invalid(format!(
                "sensing time must be positive, got {}",
                self.sensing_time
            )));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(SensingError::Invalid(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth
            )));
        }
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return Err(SensingError::Invalid(format!(
                "noise variance must be positive, got {}",
                self.noise_variance
            )));
        }
        if !(0.0..1.0).contains(&self.duty_cycle_prior) {
            return Err(SensingError::Invalid(format!(
                "duty cycle prior must lie in [0, 1), got {}",
                self.duty_cycle_prior
            )));
        }
        if self.sample_count() < 1 {
            return Err(SensingError::Invalid(
                "2 B t_s rounds to zero samples".into(),
            ));
        }
        let arg = self.conditional_pfa();
        if !(arg > 0.0 && arg < 1.0) {
            return Err(SensingError::Domain(arg));
        }
        Ok(())
    }

    /// `M = 2 B t_s`, rounded to the nearest integer.
    pub fn sample_count(&self) -> usize {
        (2.0 * self.bandwidth * self.sensing_time).round() as usize
    }

    /// `t_s · B`.
    pub fn time_bandwidth(&self) -> f64 {
        self.sensing_time * self.bandwidth
    }

    /// Target false-alarm rate given an idle channel, `p_fa / (1 - u)`.
    pub fn conditional_pfa(&self) -> f64 {
        self.target_pfa / (1.0 - self.duty_cycle_prior)
    }
}

/// Decision of the energy detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// Channel idle.
    H0,
    /// Channel busy.
    H1,
}

/// Prior-weighted and conditional operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Performance {
    pub pfa: f64,
    pub pd: f64,
    /// `P(H1 | idle)`.
    pub pfa_conditional: f64,
    /// `P(H1 | busy)`.
    pub pd_conditional: f64,
}

/// Energy threshold `ρ` meeting the spec's false-alarm target.
pub fn detection_threshold(spec: &DetectorSpec) -> Result<f64, SensingError> {
    let arg = spec.conditional_pfa();
    if !(arg > 0.0 && arg < 1.0) {
        return Err(SensingError::Domain(arg));
    }
    let tb = spec.time_bandwidth();
    let s2 = spec.noise_variance;
    Ok(2.0 * tb.sqrt() * s2 * q_inv(arg) + 2.0 * tb * s2)
}

/// False-alarm and detection probabilities at threshold `rho` and linear SNR `gamma0`.
pub fn detector_performance(spec: &DetectorSpec, rho: f64, gamma0: f64) -> Performance {
    let tb = spec.time_bandwidth();
    let s2 = spec.noise_variance;
    let u = spec.duty_cycle_prior;
    let g = gamma0 + 1.0;
    let pfa_c = q((rho - 2.0 * tb * s2) / (2.0 * tb.sqrt() * s2));
    let pd_c = q((rho - 2.0 * tb * g * s2) / (2.0 * tb.sqrt() * g * s2));
    Performance {
        pfa: (1.0 - u) * pfa_c,
        pd: u * pd_c,
        pfa_conditional: pfa_c,
        pd_conditional: pd_c,
    }
}

/// Decision on a precomputed window energy.
pub fn classify_energy(energy: f64, rho: f64) -> Hypothesis {
    if energy < rho {
        Hypothesis::H0
    } else {
        Hypothesis::H1
    }
}

/// Decision on a window of exactly `spec.sample_count()` samples.
pub fn classify_window(
    spec: &DetectorSpec,
    samples: &[f64],
    rho: f64,
) -> Result<Hypothesis, SensingError> {
    let expected = spec.sample_count();
    if samples.len() != expected {
        return Err(SensingError::WindowLength {
            expected,
            got: samples.len(),
        });
    }
    let energy: f64 = samples.iter().map(|r| r * r).sum();
    Ok(classify_energy(energy, rho))
}

/// Threshold expressed as an average power per sample, `ρ / M`.
pub fn power_threshold(spec: &DetectorSpec) -> Result<f64, SensingError> {
    Ok(detection_threshold(spec)? / spec.sample_count() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(pfa: f64, u: f64) -> DetectorSpec {
        DetectorSpec::new(pfa, 0.02, 5e6, 1.0, u).unwrap()
    }

    #[test]
    fn median_argument_gives_mean_energy() {
        let s = spec(0.25, 0.5);
        let rho = detection_threshold(&s).unwrap();
        assert_eq!(rho, 2.0 * 0.02 * 5e6);
        assert_eq!(s.sample_count(), 200_000);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            DetectorSpec::new(1e-3, 0.02, 5e6, 1.0, 0.9995),
            Err(SensingError::Domain(_))
        ));
        let mut s = spec(1e-3, 0.5);
        s.duty_cycle_prior = 0.9999;
        assert!(matches!(
            detection_threshold(&s),
            Err(SensingError::Domain(_))
        ));
        assert!(DetectorSpec::new(1e-3, 0.0, 5e6, 1.0, 0.5).is_err());
        assert!(DetectorSpec::new(1e-3, 1e-9, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn round_trip_pfa() {
        for &(pfa, u) in &[(1e-3, 0.5), (1e-3, 0.0), (0.05, 0.2), (1e-6, 0.8)] {
            let s = spec(pfa, u);
            let rho = detection_threshold(&s).unwrap();
            let p = detector_performance(&s, rho, 3.0);
            assert!((p.pfa / pfa - 1.0).abs() < 1e-12, "{pfa} {u} {}", p.pfa);
        }
    }

    #[test]
    fn zero_snr_detection_equals_false_alarm() {
        let s = spec(1e-3, 0.3);
        let rho = detection_threshold(&s).unwrap();
        let p = detector_performance(&s, rho, 0.0);
        assert!((p.pd / 0.3 - p.pfa / 0.7).abs() < 1e-15);
    }

    #[test]
    fn high_snr_detection_is_certain() {
        let s = spec(1e-3, 0.5);
        let rho = detection_threshold(&s).unwrap();
        let p = detector_performance(&s, rho, 40.0);
        assert!(p.pd_conditional > 1.0 - 1e-12);
        assert!(p.pd <= 0.5 && p.pfa <= 0.5);
    }

    #[test]
    fn monotone_in_threshold_and_snr() {
        let s = spec(1e-3, 0.5);
        let rho0 = detection_threshold(&s).unwrap();
        let mut last = f64::INFINITY;
        for i in 0..200 {
            let rho = rho0 * (0.995 + i as f64 * 5e-5);
            let p = detector_performance(&s, rho, 0.01);
            assert!(p.pfa < last);
            last = p.pfa;
        }
        let mut last = 0.0;
        for i in 0..200 {
            let p = detector_performance(&s, rho0, i as f64 * 1e-4);
            assert!(p.pd > last || p.pd == 0.5);
            last = p.pd;
        }
    }

    #[test]
    fn window_rules() {
        let s = DetectorSpec::new(1e-3, 1e-3, 5e3, 1.0, 0.5).unwrap();
        let rho = detection_threshold(&s).unwrap();
        assert_eq!(
            classify_window(&s, &vec![0.0; s.sample_count()], rho).unwrap(),
            Hypothesis::H0
        );
        assert!(matches!(
            classify_window(&s, &[0.0; 3], rho),
            Err(SensingError::WindowLength {
                expected: 10,
                got: 3
            })
        ));
        assert_eq!(classify_energy(rho, rho), Hypothesis::H1);
    }
}
