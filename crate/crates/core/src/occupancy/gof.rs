//! Log-likelihood goodness of fit between dwell samples and a candidate density.
//!
//! The empirical density `f` is a Freedman–Diaconis histogram anchored at the
//! origin. For a candidate density `g`,
//!
//! ```text
//! Φ = Σ_j p_j · ln(m_j / p_j)
//! ```
//!
//! where `p_j` is the sample fraction in occupied bin `j` and `m_j` the exact
//! mass `g` assigns to that bin. Empty bins are skipped. Φ ≤ 0, with equality
//! when `g` reproduces the histogram.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{DwellSamples, ExpMixture};
use crate::sensing::qfunc::q;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GofError {
    #[error("no samples to score")]
    Empty,
    #[error("candidate density has no mass on occupied bin [{lo}, {hi})")]
    SupportMismatch { lo: f64, hi: f64 },
    #[error("invalid density parameter: {0}")]
    BadParameter(String),
}

/// A distribution on `[0, ∞)` that can report the log of its mass on an interval.
pub trait Density {
    /// `ln P(lo ≤ θ < hi)`; `-∞` when the interval carries no mass.
    fn log_interval_mass(&self, lo: f64, hi: f64) -> f64;
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

impl Density for ExpMixture {
    fn log_interval_mass(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(0.0);
        if hi <= lo {
            return f64::NEG_INFINITY;
        }
        let h = hi - lo;
        // w e^{-λ lo} (1 - e^{-λ h}) per component, in log space.
        log_sum_exp(
            self.components()
                .map(|(w, l)| w.ln() - l * lo + (-(-l * h).exp_m1()).ln()),
        )
    }
}

/// Sparse histogram with equal-width bins `[j h, (j+1) h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    width: f64,
    n: usize,
    counts: BTreeMap<u64, u64>,
}

impl Histogram {
    /// Freedman–Diaconis width `2·IQR·n^{-1/3}`; when the IQR vanishes the
    /// width falls back to `max / ceil(√n)`.
    pub fn freedman_diaconis(values: &[f64]) -> Result<Self, GofError> {
        if values.is_empty() {
            return Err(GofError::Empty);
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
        let mut width = 2.0 * iqr / (n as f64).cbrt();
        if !(width > 0.0) {
            width = sorted[n - 1] / (n as f64).sqrt().ceil();
        }
        Self::with_width(&sorted, width)
    }

    pub fn with_width(values: &[f64], width: f64) -> Result<Self, GofError> {
        if values.is_empty() {
            return Err(GofError::Empty);
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(GofError::BadParameter(format!("bin width {width}")));
        }
        let mut counts = BTreeMap::new();
        for &x in values {
            *counts.entry((x / width).floor() as u64).or_insert(0) += 1;
        }
        Ok(Self {
            width,
            n: values.len(),
            counts,
        })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.len()
    }

    /// `(lo, hi, p)` for every occupied bin in ascending order.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.n as f64;
        let h = self.width;
        self.counts
            .iter()
            .map(move |(&j, &c)| (j as f64 * h, (j + 1) as f64 * h, c as f64 / n))
    }

    /// Φ of `g` against this histogram.
    pub fn score(&self, g: &dyn Density) -> Result<f64, GofError> {
        let mut phi = 0.0;
        for (lo, hi, p) in self.bins() {
            let lm = g.log_interval_mass(lo, hi);
            if lm == f64::NEG_INFINITY || lm.is_nan() {
                return Err(GofError::SupportMismatch { lo, hi });
            }
            phi += p * (lm - p.ln());
        }
        Ok(phi)
    }

    /// The piecewise-uniform density implied by this histogram.
    pub fn density(&self) -> HistogramDensity {
        HistogramDensity {
            width: self.width,
            probs: self
                .counts
                .iter()
                .map(|(&j, &c)| (j, c as f64 / self.n as f64))
                .collect(),
        }
    }
}

/// Piecewise-uniform density of a histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramDensity {
    width: f64,
    probs: BTreeMap<u64, f64>,
}

impl Density for HistogramDensity {
    fn log_interval_mass(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(0.0);
        if hi <= lo {
            return f64::NEG_INFINITY;
        }
        let h = self.width;
        let first = (lo / h).floor() as u64;
        let last = (hi / h).ceil() as u64;
        let mut mass = 0.0;
        for (&j, &p) in self.probs.range(first..last) {
            let b_lo = j as f64 * h;
            let b_hi = b_lo + h;
            let overlap = (hi.min(b_hi) - lo.max(b_lo)).max(0.0);
            mass += p * (overlap / h).min(1.0);
        }
        mass.ln()
    }
}

/// Log-normal density with log-mean `mu` and log-sd `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalDensity {
    pub mu: f64,
    pub sigma: f64,
}

impl LogNormalDensity {
    pub fn new(mu: f64, sigma: f64) -> Result<Self, GofError> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(GofError::BadParameter(format!(
                "log-normal mu={mu} sigma={sigma}"
            )));
        }
        Ok(Self { mu, sigma })
    }

    /// Moment estimates of `mu` and `sigma` from the sample logs.
    pub fn from_samples(samples: &DwellSamples) -> Result<Self, GofError> {
        if samples.is_empty() {
            return Err(GofError::Empty);
        }
        let n = samples.len() as f64;
        let mu = samples.values().iter().map(|x| x.ln()).sum::<f64>() / n;
        let var = samples
            .values()
            .iter()
            .map(|x| (x.ln() - mu).powi(2))
            .sum::<f64>()
            / n;
        Self::new(mu, var.sqrt())
    }
}

impl Density for LogNormalDensity {
    fn log_interval_mass(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo.max(0.0) {
            return f64::NEG_INFINITY;
        }
        let z = |x: f64| {
            if x <= 0.0 {
                f64::NEG_INFINITY
            } else {
                (x.ln() - self.mu) / self.sigma
            }
        };
        let (za, zb) = (z(lo), z(hi));
        // Subtract upper-tail probabilities on the right half, lower-tail on the left.
        let mass = if za >= 0.0 {
            q(za) - q(zb)
        } else {
            q(-zb) - q(-za)
        };
        mass.ln()
    }
}

/// Generalized Pareto with shape `xi` and scale `sigma`, location 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedPareto {
    pub xi: f64,
    pub sigma: f64,
}

impl GeneralizedPareto {
    pub fn new(xi: f64, sigma: f64) -> Result<Self, GofError> {
        if !(sigma > 0.0 && sigma.is_finite() && xi.is_finite()) {
            return Err(GofError::BadParameter(format!(
                "pareto xi={xi} sigma={sigma}"
            )));
        }
        Ok(Self { xi, sigma })
    }

    /// Method-of-moments estimate.
    pub fn from_samples(samples: &DwellSamples) -> Result<Self, GofError> {
        if samples.is_empty() {
            return Err(GofError::Empty);
        }
        let n = samples.len() as f64;
        let m = samples.mean();
        let v = samples
            .values()
            .iter()
            .map(|x| (x - m).powi(2))
            .sum::<f64>()
            / n;
        if !(v > 0.0) {
            return Err(GofError::BadParameter("zero sample variance".into()));
        }
        let r = m * m / v;
        Self::new(0.5 * (1.0 - r), 0.5 * m * (r + 1.0))
    }

    fn log_ccdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if self.xi.abs() < 1e-12 {
            return -x / self.sigma;
        }
        let t = self.xi * x / self.sigma;
        if t <= -1.0 {
            return f64::NEG_INFINITY;
        }
        -t.ln_1p() / self.xi
    }
}

impl Density for GeneralizedPareto {
    fn log_interval_mass(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(0.0);
        if hi <= lo {
            return f64::NEG_INFINITY;
        }
        let a = self.log_ccdf(lo);
        let b = self.log_ccdf(hi);
        if a == f64::NEG_INFINITY {
            return a;
        }
        // ln(S(lo) - S(hi)) = ln S(lo) + ln(1 - e^{ln S(hi) - ln S(lo)})
        a + (-(b - a).exp_m1()).ln()
    }
}

/// Φ of `g` against the Freedman–Diaconis histogram of `samples`.
pub fn goodness_of_fit(samples: &DwellSamples, g: &dyn Density) -> Result<f64, GofError> {
    Histogram::freedman_diaconis(samples.values())?.score(g)
}

pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::occupancy::State;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, LogNormal};

    fn lognormal_samples(n: usize, sigma: f64, seed: u64) -> DwellSamples {
        let mut rng = rng_from_seed(seed);
        let d = LogNormal::new(0.0, sigma).unwrap();
        DwellSamples::new((0..n).map(|_| d.sample(&mut rng)).collect(), State::Off).unwrap()
    }

    #[test]
    fn histogram_density_scores_zero() {
        let s = lognormal_samples(20_000, 1.0, 1);
        let h = Histogram::freedman_diaconis(s.values()).unwrap();
        let phi = h.score(&h.density()).unwrap();
        assert!(phi.abs() < 1e-9, "phi {phi}");
    }

    #[test]
    fn phi_is_non_positive() {
        let s = lognormal_samples(20_000, 1.0, 2);
        let m = ExpMixture::exponential(1.0 / s.mean()).unwrap();
        assert!(goodness_of_fit(&s, &m).unwrap() < 0.0);
        let ln = LogNormalDensity::from_samples(&s).unwrap();
        assert!(goodness_of_fit(&s, &ln).unwrap() <= 1e-12);
    }

    #[test]
    fn true_mixture_beats_equal_mean_exponential() {
        let m = ExpMixture::new(vec![0.8, 0.2], vec![0.5, 20.0]).unwrap();
        let mut rng = rng_from_seed(3);
        let s = DwellSamples::new((0..50_000).map(|_| m.sample(&mut rng)).collect(), State::On)
            .unwrap();
        let e = ExpMixture::exponential(1.0 / m.mean()).unwrap();
        let phi_m = goodness_of_fit(&s, &m).unwrap();
        let phi_e = goodness_of_fit(&s, &e).unwrap();
        assert!(phi_m.abs() < phi_e.abs(), "{phi_m} vs {phi_e}");
    }

    #[test]
    fn disjoint_support_is_an_error() {
        let a = DwellSamples::new(vec![1.0, 1.1, 1.2, 1.3, 1.4], State::On).unwrap();
        let b = DwellSamples::new(vec![50.0, 51.0, 52.0, 53.0, 54.0], State::On).unwrap();
        let hb = Histogram::freedman_diaconis(b.values()).unwrap().density();
        assert!(matches!(
            goodness_of_fit(&a, &hb),
            Err(GofError::SupportMismatch { .. })
        ));
    }

    #[test]
    fn mixture_interval_mass_matches_cdf_difference() {
        let m = ExpMixture::new(vec![0.3, 0.7], vec![0.2, 3.0]).unwrap();
        for &(lo, hi) in &[(0.0, 0.1), (0.5, 2.0), (3.0, 3.5)] {
            let direct = m.cdf(hi) - m.cdf(lo);
            assert!((m.log_interval_mass(lo, hi).exp() / direct - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lognormal_mass_sums_to_one() {
        let d = LogNormalDensity::new(0.3, 1.5).unwrap();
        let mut total = 0.0;
        for j in 0..20_000 {
            total += d
                .log_interval_mass(j as f64 * 0.05, (j + 1) as f64 * 0.05)
                .exp();
        }
        // Remaining mass beyond 1000 is the upper tail at z = (ln 1000 - 0.3)/1.5.
        let tail = q((1000f64.ln() - 0.3) / 1.5);
        assert!((total + tail - 1.0).abs() < 1e-9, "{total}");
    }

    #[test]
    fn pareto_moments_recovered() {
        // Exponential data: xi near 0, sigma near the mean.
        let m = ExpMixture::exponential(0.5).unwrap();
        let mut rng = rng_from_seed(4);
        let s = DwellSamples::new(
            (0..200_000).map(|_| m.sample(&mut rng)).collect(),
            State::On,
        )
        .unwrap();
        let g = GeneralizedPareto::from_samples(&s).unwrap();
        assert!(g.xi.abs() < 0.02, "xi {}", g.xi);
        assert!((g.sigma / 2.0 - 1.0).abs() < 0.02, "sigma {}", g.sigma);
        let total = g.log_interval_mass(0.0, 1e9).exp();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_iqr_falls_back() {
        let mut v = vec![1.0; 100];
        v.push(5.0);
        let h = Histogram::freedman_diaconis(&v).unwrap();
        assert!((h.width() - 5.0 / 11.0).abs() < 1e-12);
        assert_eq!(h.occupied_bins(), 2);
    }
}
