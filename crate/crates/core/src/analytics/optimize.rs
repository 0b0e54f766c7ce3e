//! One-dimensional search for the sensing period minimizing the throughput drop.
//!
//! A log-spaced grid brackets the minimum, golden-section search refines it.
//! A grid minimum on either end of the bracket is returned as-is with a flag.

use super::{
    captured, drop_from_parts, effective_alpha, mean_rates, system_captured,
    system_mutual_fraction, transmission_efficiency, AnalyticsError, Model,
};
use crate::linkbudget::RadioEnv;
use crate::occupancy::ChannelModel;
use crate::sensing::DetectorSpec;

/// Grid size of the coarse scan.
pub const GRID_POINTS: usize = 200;
/// Absolute tolerance of the golden-section refinement, seconds.
pub const TOLERANCE: f64 = 1e-4;

/// Search interval for `T`, seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    /// `[t_s, 100 × longest mean dwell]`.
    pub fn default_for(channels: &[ChannelModel], sensing_time: f64) -> Self {
        let longest = channels
            .iter()
            .flat_map(|c| [c.on.mean(), c.off.mean()])
            .fold(0.0, f64::max);
        Self {
            lo: sensing_time,
            hi: 100.0 * longest,
        }
    }

    fn validate(&self) -> Result<(), AnalyticsError> {
        if !(self.lo > 0.0 && self.hi > self.lo && self.hi.is_finite()) {
            return Err(AnalyticsError::Bounds {
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(())
    }
}

/// Which end of the bracket the minimum sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub t_opt: f64,
    pub chi_min: f64,
    /// `(1 - χ_min) E{C0}`, bits/s.
    pub c_opt: f64,
    pub c0_mean: f64,
    pub boundary: Option<Boundary>,
    pub bounds: Bounds,
}

/// χ as a function of `T` with everything else fixed.
#[derive(Debug, Clone)]
pub struct DropCurve<'a> {
    channels: &'a [ChannelModel],
    sensing_time: f64,
    pfa: f64,
    alpha: f64,
    model: Model,
    pub c0_mean: f64,
}

impl<'a> DropCurve<'a> {
    pub fn new(
        channels: &'a [ChannelModel],
        env: &RadioEnv,
        detector: &DetectorSpec,
        model: Model,
    ) -> Result<Self, AnalyticsError> {
        if channels.is_empty() {
            return Err(AnalyticsError::NoChannels);
        }
        let alpha = effective_alpha(env, model.snr)?;
        let c0_mean = mean_rates(env, model.snr)?.0;
        Ok(Self {
            channels,
            sensing_time: detector.sensing_time,
            pfa: detector.target_pfa,
            alpha,
            model,
            c0_mean,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn chi(&self, period: f64) -> f64 {
        let eta = transmission_efficiency(period, self.sensing_time);
        let zetas: Vec<f64> = self
            .channels
            .iter()
            .map(|c| captured(c, period, self.model.closure))
            .collect();
        let tau = system_mutual_fraction(self.channels, period, self.pfa, self.model.closure);
        drop_from_parts(eta, system_captured(&zetas), self.alpha, tau)
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(bounds: Bounds, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![bounds.lo];
    }
    let (a, b) = (bounds.lo.ln(), bounds.hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                bounds.lo
            } else if i == n - 1 {
                bounds.hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Period minimizing χ over `bounds` (default `[t_s, 100 × longest mean dwell]`).
///
/// The number of serving channels is `channels.len()`.
pub fn optimize_interval(
    channels: &[ChannelModel],
    env: &RadioEnv,
    detector: &DetectorSpec,
    bounds: Option<Bounds>,
    model: Model,
) -> Result<Optimum, AnalyticsError> {
    let curve = DropCurve::new(channels, env, detector, model)?;
    let bounds = bounds.unwrap_or_else(|| Bounds::default_for(channels, detector.sensing_time));
    bounds.validate()?;
    let grid = log_grid(bounds, GRID_POINTS);
    let values: Vec<f64> = grid.iter().map(|&t| curve.chi(t)).collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    let (t_opt, chi_min, boundary) = if best == 0 {
        (grid[0], values[0], Some(Boundary::Lower))
    } else if best == grid.len() - 1 {
        (grid[best], values[best], Some(Boundary::Upper))
    } else {
        let (t, v) = golden_section(|t| curve.chi(t), grid[best - 1], grid[best + 1], TOLERANCE);
        if v <= values[best] {
            (t, v, None)
        } else {
            (grid[best], values[best], None)
        }
    };
    Ok(Optimum {
        t_opt,
        chi_min,
        c_opt: (1.0 - chi_min) * curve.c0_mean,
        c0_mean: curve.c0_mean,
        boundary,
        bounds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSolution {
    pub period: f64,
    pub chi: f64,
}

/// Longest period in `bounds` whose drop does not exceed `target`.
///
/// Sensing less often saves overhead, so among the periods meeting the target
/// the longest one is returned.
pub fn solve_for_target_drop(
    channels: &[ChannelModel],
    env: &RadioEnv,
    detector: &DetectorSpec,
    target: f64,
    bounds: Option<Bounds>,
    model: Model,
) -> Result<TargetSolution, AnalyticsError> {
    let opt = optimize_interval(channels, env, detector, bounds, model)?;
    if opt.chi_min > target {
        return Err(AnalyticsError::Unattainable {
            target,
            min: opt.chi_min,
        });
    }
    let curve = DropCurve::new(channels, env, detector, model)?;
    let hi = opt.bounds.hi;
    if curve.chi(hi) <= target {
        return Ok(TargetSolution {
            period: hi,
            chi: curve.chi(hi),
        });
    }
    let (mut a, mut b) = (opt.t_opt, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if curve.chi(m) <= target {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-12 * b {
            break;
        }
    }
    Ok(TargetSolution {
        period: a,
        chi: curve.chi(a),
    })
}
