//! Monte Carlo ground truth for the closed forms.
//!
//! Traces are alternating ON/OFF dwell sequences. On top of them this module
//! provides the renewal oracle for captured opportunities and mutual
//! operation, a replay of the periodic-sensing access protocol, the senseless
//! baseline and dwell bootstrapping.
//!
//! Access protocol, per sensing cycle on the current channel:
//! 1. sense for `t_s` (no transmission), reading the state at the cycle start;
//! 2. draw the verdict from the conditional detector rates;
//! 3. busy verdict: stay silent for `T`, then move to the next channel
//!    (round robin, one probe per sensing instant);
//! 4. idle verdict: transmit for `T`. OFF time in the window earns the
//!    interference-free rate, ON time the interfered rate. Shadowing is drawn
//!    once per period.

use rand::seq::IndexedRandom;
use rand::Rng;
use thiserror::Error;

use crate::analytics::log2_one_plus_db;
use crate::linkbudget::{self, LinkError, RadioEnv};
use crate::occupancy::{ChannelModel, ExpMixture, State};
use crate::rng::{stream_rng, SimRng};
use crate::sensing::{detection_threshold, detector_performance, DetectorSpec, SensingError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("trace horizon {horizon} s is shorter than {required} s")]
    HorizonTooShort { horizon: f64, required: f64 },
    #[error("invalid trace: {0}")]
    Trace(String),
    #[error("no channels or traces supplied")]
    Empty,
    #[error("invalid simulation input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error(transparent)]
    Link(#[from] LinkError),
}

/// Where a trace came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceOrigin {
    Generated,
    Ingested,
    Bootstrapped,
}

/// Alternating ON/OFF dwells starting at time 0.
///
/// Queries past the horizon see the final state persisting.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyTrace {
    initial: State,
    durations: Vec<f64>,
    ends: Vec<f64>,
    origin: TraceOrigin,
}

impl OccupancyTrace {
    /// Builds a trace from dwell lengths, the first in state `initial`.
    pub fn new(initial: State, durations: Vec<f64>, origin: TraceOrigin) -> Result<Self, SimError> {
        if durations.is_empty() {
            return Err(SimError::Trace("no dwells".into()));
        }
        let mut ends = Vec::with_capacity(durations.len());
        let mut acc = 0.0;
        for (i, &d) in durations.iter().enumerate() {
            if !(d > 0.0 && d.is_finite()) {
                return Err(SimError::Trace(format!("dwell {i} has length {d}")));
            }
            acc += d;
            ends.push(acc);
        }
        Ok(Self {
            initial,
            durations,
            ends,
            origin,
        })
    }

    /// Builds a trace from explicit `(state, length)` pairs, which must alternate.
    pub fn from_dwells(dwells: &[(State, f64)], origin: TraceOrigin) -> Result<Self, SimError> {
        let Some(&(first, _)) = dwells.first() else {
            return Err(SimError::Trace("no dwells".into()));
        };
        for (i, w) in dwells.windows(2).enumerate() {
            if w[0].0 == w[1].0 {
                return Err(SimError::Trace(format!(
                    "dwells {i} and {} share a state",
                    i + 1
                )));
            }
        }
        Self::new(first, dwells.iter().map(|d| d.1).collect(), origin)
    }

    pub fn horizon(&self) -> f64 {
        self.ends[self.ends.len() - 1]
    }

    pub fn origin(&self) -> TraceOrigin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }

    pub fn initial_state(&self) -> State {
        self.initial
    }

    fn state_of(&self, index: usize) -> State {
        if index.is_multiple_of(2) {
            self.initial
        } else {
            self.initial.flip()
        }
    }

    /// `(state, length)` pairs in order.
    pub fn dwells(&self) -> impl Iterator<Item = (State, f64)> + '_ {
        self.durations
            .iter()
            .enumerate()
            .map(|(i, &d)| (self.state_of(i), d))
    }

    /// Dwell lengths of one state.
    pub fn dwells_of(&self, state: State) -> Vec<f64> {
        self.dwells()
            .filter(|d| d.0 == state)
            .map(|d| d.1)
            .collect()
    }

    fn index_at(&self, t: f64) -> usize {
        self.ends
            .partition_point(|&e| e <= t)
            .min(self.ends.len() - 1)
    }

    pub fn state_at(&self, t: f64) -> State {
        self.state_of(self.index_at(t))
    }

    /// End of the dwell containing `t`; infinite for the final dwell.
    pub fn next_change(&self, t: f64) -> f64 {
        let i = self.index_at(t);
        if i + 1 == self.ends.len() {
            f64::INFINITY
        } else {
            self.ends[i]
        }
    }

    /// Time spent in `state` within `[a, b)`.
    pub fn time_in(&self, state: State, a: f64, b: f64) -> f64 {
        let mut i = self.index_at(a);
        let mut cur = a;
        let mut acc = 0.0;
        while cur < b {
            let end = if i + 1 == self.ends.len() {
                b
            } else {
                self.ends[i].min(b)
            };
            if self.state_of(i) == state {
                acc += end - cur;
            }
            cur = end;
            i += 1;
        }
        acc
    }

    /// Fraction of the horizon spent ON.
    pub fn occupied_fraction(&self) -> f64 {
        self.dwells_of(State::On).iter().sum::<f64>() / self.horizon()
    }
}

/// Draws a trace of total length `horizon`; the final dwell is clipped.
pub fn generate_trace<R: Rng + ?Sized>(
    ch: &ChannelModel,
    horizon: f64,
    rng: &mut R,
) -> Result<OccupancyTrace, SimError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(SimError::Invalid(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let initial = if rng.random::<f64>() < ch.duty_cycle() {
        State::On
    } else {
        State::Off
    };
    let mut state = initial;
    let mut acc = 0.0;
    let mut durations = Vec::new();
    while acc < horizon {
        let mut d = ch.mixture(state).sample(rng);
        if d <= 0.0 {
            // Guard against a zero draw from the exponential sampler.
            d = f64::MIN_POSITIVE;
        }
        if acc + d >= horizon {
            d = horizon - acc;
        }
        if d > 0.0 {
            durations.push(d);
        }
        acc += d;
        state = state.flip();
    }
    OccupancyTrace::new(initial, durations, TraceOrigin::Generated)
}

/// Generates a trace with at least `dwells` dwells, no clipping.
pub fn generate_dwells<R: Rng + ?Sized>(
    ch: &ChannelModel,
    dwells: usize,
    rng: &mut R,
) -> Result<OccupancyTrace, SimError> {
    let initial = if rng.random::<f64>() < ch.duty_cycle() {
        State::On
    } else {
        State::Off
    };
    let mut state = initial;
    let mut durations = Vec::with_capacity(dwells);
    for _ in 0..dwells.max(1) {
        durations.push(ch.mixture(state).sample(rng).max(f64::MIN_POSITIVE));
        state = state.flip();
    }
    OccupancyTrace::new(initial, durations, TraceOrigin::Generated)
}

/// Renewal-oracle estimates of captured opportunities and mutual operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    /// Idle time exploited before the first reappearance in each period, over total time.
    pub zeta_hat: f64,
    /// Share of exploited periods in which the primary user reappears.
    pub tau_hat: f64,
    pub periods: usize,
    pub exploited_periods: usize,
}

/// Walks sensing instants `0, T, 2T, …` with perfect detection.
pub fn oracle_captured(trace: &OccupancyTrace, period: f64) -> Result<OracleEstimate, SimError> {
    if !(period > 0.0) {
        return Err(SimError::Invalid(format!(
            "period must be positive, got {period}"
        )));
    }
    let required = 1e3 * period;
    if trace.horizon() < required {
        return Err(SimError::HorizonTooShort {
            horizon: trace.horizon(),
            required,
        });
    }
    let periods = (trace.horizon() / period).floor() as usize;
    let mut exploited = 0usize;
    let mut captured = 0.0;
    let mut reappear = 0usize;
    let mut i = 0usize;
    for p in 0..periods {
        let t = p as f64 * period;
        while i + 1 < trace.ends.len() && trace.ends[i] <= t {
            i += 1;
        }
        if trace.state_of(i) == State::On {
            continue;
        }
        exploited += 1;
        let change = if i + 1 == trace.ends.len() {
            f64::INFINITY
        } else {
            trace.ends[i]
        };
        let residual = change - t;
        if residual < period {
            reappear += 1;
            captured += residual;
        } else {
            captured += period;
        }
    }
    Ok(OracleEstimate {
        zeta_hat: captured / (periods as f64 * period),
        tau_hat: if exploited == 0 {
            0.0
        } else {
            reappear as f64 / exploited as f64
        },
        periods,
        exploited_periods: exploited,
    })
}

/// Outcome of a simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    /// Total bits over total time, bits/s.
    pub mean_throughput: f64,
    /// Time-weighted CDF of the instantaneous rate, `(bits/s, probability)`.
    pub throughput_cdf: Vec<(f64, f64)>,
    /// Share of time transmitting with the channel idle.
    pub captured_fraction: f64,
    /// Share of time transmitting while the primary user is active.
    pub interfered_fraction: f64,
    /// Remaining time: sensing, silent periods, no channel found.
    pub no_opportunity_fraction: f64,
    /// Per-cycle throughput at the 5, 10, 50, 90, 95th percentiles.
    pub cycle_percentiles: [f64; 5],
    pub cycles: usize,
    pub duration: f64,
    pub seed: u64,
}

/// Percentile levels reported in [`SimReport::cycle_percentiles`].
pub const PERCENTILES: [f64; 5] = [0.05, 0.10, 0.50, 0.90, 0.95];
/// Number of points in [`SimReport::throughput_cdf`].
pub const CDF_POINTS: usize = 201;

#[derive(Default)]
struct Accumulator {
    bits: f64,
    time: f64,
    clean: f64,
    mutual: f64,
    pieces: Vec<(f64, f64)>,
    cycle_rates: Vec<f64>,
}

impl Accumulator {
    fn piece(&mut self, rate: f64, dt: f64) {
        if dt > 0.0 {
            self.pieces.push((rate, dt));
            self.bits += rate * dt;
            self.time += dt;
        }
    }

    fn finish(mut self, seed: u64) -> SimReport {
        self.pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = self.pieces.iter().map(|p| p.1).sum();
        let mut cdf = Vec::with_capacity(CDF_POINTS);
        let mut acc = 0.0;
        let mut j = 0usize;
        for k in 0..CDF_POINTS {
            let p = k as f64 / (CDF_POINTS - 1) as f64;
            // Smallest rate whose cumulative weight reaches p.
            while j < self.pieces.len() && acc + self.pieces[j].1 < p * total {
                acc += self.pieces[j].1;
                j += 1;
            }
            let rate = self.pieces[j.min(self.pieces.len() - 1)].0;
            cdf.push((rate, p));
        }
        self.cycle_rates.sort_by(f64::total_cmp);
        let mut pct = [0.0; 5];
        for (slot, &p) in pct.iter_mut().zip(PERCENTILES.iter()) {
            *slot = crate::occupancy::gof::quantile_sorted(&self.cycle_rates, p);
        }
        let time = self.time;
        SimReport {
            mean_throughput: self.bits / time,
            throughput_cdf: cdf,
            captured_fraction: self.clean / time,
            interfered_fraction: self.mutual / time,
            no_opportunity_fraction: ((time - self.clean - self.mutual) / time).max(0.0),
            cycle_percentiles: pct,
            cycles: self.cycle_rates.len(),
            duration: time,
            seed,
        }
    }
}

/// Per-period access parameters for [`simulate_access_traces`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessRun {
    pub period: f64,
    pub sensing_time: f64,
    pub duration: f64,
}

/// Conditional busy-verdict probabilities `(P(H1 | idle), P(H1 | busy))`.
pub fn verdict_rates(detector: &DetectorSpec, env: &RadioEnv) -> Result<(f64, f64), SimError> {
    let rho = detection_threshold(detector)?;
    let mbs = linkbudget::received_power_dist(env, linkbudget::Link::MbsToIndoor)?.mean;
    let snr = 10f64.powf((mbs - linkbudget::noise_dbm(env)) / 10.0);
    let perf = detector_performance(detector, rho, snr);
    Ok((perf.pfa_conditional, perf.pd_conditional))
}

const TRACE_STREAM_BASE: u64 = 0;
const PROTOCOL_STREAM: u64 = 1 << 32;

/// Replays the access protocol over given traces, one trace per channel.
pub fn simulate_access_traces(
    traces: &[OccupancyTrace],
    run: AccessRun,
    detector: &DetectorSpec,
    env: &RadioEnv,
    seed: u64,
) -> Result<SimReport, SimError> {
    if traces.is_empty() {
        return Err(SimError::Empty);
    }
    if !(run.period > 0.0 && run.sensing_time >= 0.0) {
        return Err(SimError::Invalid(format!(
            "period {} and sensing time {} must be positive",
            run.period, run.sensing_time
        )));
    }
    let required = 1e4 * run.period;
    if run.duration < required {
        return Err(SimError::HorizonTooShort {
            horizon: run.duration,
            required,
        });
    }
    let (pfa_c, pd_c) = verdict_rates(detector, env)?;
    let sinr = linkbudget::sinr_dist(env)?;
    let b = env.bandwidth;
    let mut rng = stream_rng(seed, PROTOCOL_STREAM);
    let mut acc = Accumulator::default();
    let cycle = run.sensing_time + run.period;
    let cycles = (run.duration / cycle).floor() as usize;
    acc.pieces.reserve(cycles * 3);
    acc.cycle_rates.reserve(cycles);
    let mut c = 0usize;
    for k in 0..cycles {
        let t = k as f64 * cycle;
        let trace = &traces[c];
        let busy_prob = match trace.state_at(t) {
            State::Off => pfa_c,
            State::On => pd_c,
        };
        let busy = rng.random::<f64>() < busy_prob;
        // Shadowing drawn every cycle keeps the stream aligned across verdicts.
        let g0 = sinr.gamma0.sample(&mut rng);
        let g = sinr.gamma.sample(&mut rng);
        acc.piece(0.0, run.sensing_time);
        if busy {
            acc.piece(0.0, run.period);
            acc.cycle_rates.push(0.0);
            c = (c + 1) % traces.len();
            continue;
        }
        let a = t + run.sensing_time;
        let clean = trace.time_in(State::Off, a, a + run.period);
        let mutual = run.period - clean;
        let r0 = b * log2_one_plus_db(g0);
        let r = b * log2_one_plus_db(g);
        acc.piece(r0, clean);
        acc.piece(r, mutual);
        acc.clean += clean;
        acc.mutual += mutual;
        acc.cycle_rates.push((r0 * clean + r * mutual) / cycle);
    }
    Ok(acc.finish(seed))
}

/// Generates one trace per channel and replays the access protocol.
pub fn simulate_access(
    channels: &[ChannelModel],
    run: AccessRun,
    detector: &DetectorSpec,
    env: &RadioEnv,
    seed: u64,
) -> Result<SimReport, SimError> {
    let traces = channel_traces(channels, run.duration + run.period + run.sensing_time, seed)?;
    simulate_access_traces(&traces, run, detector, env, seed)
}

/// One generated trace per channel, each from its own stream of `seed`.
pub fn channel_traces(
    channels: &[ChannelModel],
    horizon: f64,
    seed: u64,
) -> Result<Vec<OccupancyTrace>, SimError> {
    if channels.is_empty() {
        return Err(SimError::Empty);
    }
    channels
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let mut rng = stream_rng(seed, TRACE_STREAM_BASE + i as u64);
            generate_trace(ch, horizon, &mut rng)
        })
        .collect()
}

/// Senseless baseline over given traces: one channel chosen uniformly, always
/// transmitting. Shadowing is redrawn at every dwell change and at least every
/// `block` seconds.
pub fn simulate_senseless_traces(
    traces: &[OccupancyTrace],
    env: &RadioEnv,
    duration: f64,
    block: f64,
    seed: u64,
) -> Result<SimReport, SimError> {
    if traces.is_empty() {
        return Err(SimError::Empty);
    }
    if !(duration > 0.0 && block > 0.0) {
        return Err(SimError::Invalid(format!(
            "duration {duration} and block {block} must be positive"
        )));
    }
    let sinr = linkbudget::sinr_dist(env)?;
    let b = env.bandwidth;
    let mut rng: SimRng = stream_rng(seed, PROTOCOL_STREAM);
    let trace = traces.choose(&mut rng).expect("non-empty");
    let mut acc = Accumulator::default();
    let mut t = 0.0;
    while t < duration {
        let end = trace.next_change(t).min(t + block).min(duration);
        let dt = end - t;
        let (rate, clean) = match trace.state_at(t) {
            State::Off => (b * log2_one_plus_db(sinr.gamma0.sample(&mut rng)), true),
            State::On => (b * log2_one_plus_db(sinr.gamma.sample(&mut rng)), false),
        };
        acc.piece(rate, dt);
        if clean {
            acc.clean += dt;
        } else {
            acc.mutual += dt;
        }
        acc.cycle_rates.push(rate);
        t = end;
    }
    Ok(acc.finish(seed))
}

/// Senseless baseline over freshly generated traces.
pub fn simulate_senseless(
    channels: &[ChannelModel],
    env: &RadioEnv,
    duration: f64,
    block: f64,
    seed: u64,
) -> Result<SimReport, SimError> {
    let traces = channel_traces(channels, duration, seed)?;
    simulate_senseless_traces(&traces, env, duration, block, seed)
}

/// Resamples dwells with replacement, per state, from the pooled base traces.
///
/// Each output trace has length `horizon` and starts ON with the pooled
/// occupied-time fraction. The last dwell of every base trace is left out of
/// the pool since it may be clipped.
pub fn bootstrap_channels(
    base: &[OccupancyTrace],
    count: usize,
    horizon: f64,
    seed: u64,
) -> Result<Vec<OccupancyTrace>, SimError> {
    if base.is_empty() || count == 0 {
        return Err(SimError::Empty);
    }
    let mut on = Vec::new();
    let mut off = Vec::new();
    for tr in base {
        let n = if tr.len() > 2 { tr.len() - 1 } else { tr.len() };
        for (state, d) in tr.dwells().take(n) {
            match state {
                State::On => on.push(d),
                State::Off => off.push(d),
            }
        }
    }
    if on.is_empty() || off.is_empty() {
        return Err(SimError::Trace(
            "base traces need both ON and OFF dwells".into(),
        ));
    }
    let on_total: f64 = on.iter().sum();
    let u = on_total / (on_total + off.iter().sum::<f64>());
    (0..count)
        .map(|l| {
            let mut rng = stream_rng(seed, TRACE_STREAM_BASE + l as u64);
            let initial = if rng.random::<f64>() < u {
                State::On
            } else {
                State::Off
            };
            let mut state = initial;
            let mut acc = 0.0;
            let mut durations = Vec::new();
            while acc < horizon {
                let pool = if state == State::On { &on } else { &off };
                let mut d = *pool.choose(&mut rng).expect("non-empty pool");
                if acc + d >= horizon {
                    d = horizon - acc;
                }
                if d > 0.0 {
                    durations.push(d);
                }
                acc += d;
                state = state.flip();
            }
            OccupancyTrace::new(initial, durations, TraceOrigin::Bootstrapped)
        })
        .collect()
}

/// Empirical channel model of a trace: exponential dwells with the trace means.
pub fn exponential_model_of(trace: &OccupancyTrace) -> Result<ChannelModel, SimError> {
    let mean = |s: State| {
        let v = trace.dwells_of(s);
        v.iter().sum::<f64>() / v.len() as f64
    };
    let on = ExpMixture::exponential(1.0 / mean(State::On))
        .map_err(|e| SimError::Trace(e.to_string()))?;
    let off = ExpMixture::exponential(1.0 / mean(State::Off))
        .map_err(|e| SimError::Trace(e.to_string()))?;
    ChannelModel::new(on, off).map_err(|e| SimError::Trace(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{mean_rates, SnrMode};
    use crate::rng::rng_from_seed;

    fn env() -> RadioEnv {
        RadioEnv {
            pt_mbs: 40.0,
            pt_fbs: 20.46,
            mbs_distance: 20.5,
            indoor_distance: 10.0,
            carrier: 2.65,
            shadow_sigma_mbs: 7.0,
            shadow_sigma_fbs: 4.0,
            noise_density: -170.0,
            bandwidth: 5e6,
        }
    }

    fn detector(pfa: f64) -> DetectorSpec {
        DetectorSpec {
            target_pfa: pfa,
            sensing_time: 0.02,
            bandwidth: 5e6,
            noise_variance: 1.0,
            duty_cycle_prior: 0.5,
        }
    }

    #[test]
    fn trace_queries() {
        let tr =
            OccupancyTrace::new(State::Off, vec![1.0, 2.0, 3.0], TraceOrigin::Ingested).unwrap();
        assert_eq!(tr.horizon(), 6.0);
        assert_eq!(tr.state_at(0.5), State::Off);
        assert_eq!(tr.state_at(1.0), State::On);
        assert_eq!(tr.state_at(5.0), State::Off);
        assert_eq!(tr.state_at(50.0), State::Off);
        assert_eq!(tr.next_change(0.2), 1.0);
        assert_eq!(tr.next_change(4.0), f64::INFINITY);
        assert!((tr.time_in(State::Off, 0.5, 4.0) - 1.5).abs() < 1e-15);
        assert!((tr.time_in(State::On, 0.5, 4.0) - 2.0).abs() < 1e-15);
        assert!((tr.occupied_fraction() - 2.0 / 6.0).abs() < 1e-15);
        assert!(OccupancyTrace::from_dwells(
            &[(State::On, 1.0), (State::On, 1.0)],
            TraceOrigin::Ingested
        )
        .is_err());
        assert!(OccupancyTrace::new(State::On, vec![1.0, 0.0], TraceOrigin::Ingested).is_err());
    }

    #[test]
    fn generated_trace_occupancy_and_determinism() {
        let ch = ChannelModel::exponential(1.0, 1.0).unwrap();
        let tr = generate_trace(&ch, 1e6, &mut rng_from_seed(1)).unwrap();
        assert!((tr.horizon() - 1e6).abs() < 1e-6);
        assert!((tr.occupied_fraction() - 0.5).abs() < 0.01 * 0.5);
        let again = generate_trace(&ch, 1e6, &mut rng_from_seed(1)).unwrap();
        assert_eq!(tr, again);
        let short = generate_trace(&ch, 1e-9, &mut rng_from_seed(2)).unwrap();
        assert_eq!(short.len(), 1);
        assert_eq!(short.horizon(), 1e-9);
    }

    #[test]
    fn oracle_trivial_traces() {
        let off = OccupancyTrace::new(State::Off, vec![5000.0], TraceOrigin::Generated).unwrap();
        let e = oracle_captured(&off, 1.0).unwrap();
        assert_eq!(e.zeta_hat, 1.0);
        assert_eq!(e.tau_hat, 0.0);
        let on = OccupancyTrace::new(State::On, vec![5000.0], TraceOrigin::Generated).unwrap();
        assert_eq!(oracle_captured(&on, 1.0).unwrap().zeta_hat, 0.0);
        assert!(matches!(
            oracle_captured(&on, 10.0),
            Err(SimError::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn oracle_hand_trace() {
        // OFF 2.5, ON 0.5 repeated, period 1: per 3 s cycle the instants see
        // residuals 2.5, 1.5, 0.5, so 2.5 s captured and one reappearance.
        let d: Vec<f64> = (0..400).flat_map(|_| [2.5, 0.5]).collect();
        let tr = OccupancyTrace::new(State::Off, d, TraceOrigin::Generated).unwrap();
        let e = oracle_captured(&tr, 1.0).unwrap();
        assert_eq!(e.periods, 1200);
        assert_eq!(e.exploited_periods, 1200);
        assert!((e.zeta_hat - 2.5 / 3.0).abs() < 1e-12);
        assert!((e.tau_hat - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn always_off_throughput_is_efficiency_times_c0() {
        let tr = OccupancyTrace::new(State::Off, vec![1e7], TraceOrigin::Generated).unwrap();
        let run = AccessRun {
            period: 0.18,
            sensing_time: 0.02,
            duration: 4000.0,
        };
        let r = simulate_access_traces(&[tr], run, &detector(1e-12), &env(), 3).unwrap();
        let (c0, _) = mean_rates(&env(), SnrMode::Quadrature).unwrap();
        assert!(
            (r.mean_throughput / (0.9 * c0) - 1.0).abs() < 0.02,
            "{}",
            r.mean_throughput
        );
        assert!((r.captured_fraction - 0.9).abs() < 1e-9);
    }

    #[test]
    fn always_on_channel_yields_nothing() {
        let tr = OccupancyTrace::new(State::On, vec![1e7], TraceOrigin::Generated).unwrap();
        let run = AccessRun {
            period: 0.1,
            sensing_time: 0.02,
            duration: 2000.0,
        };
        let r = simulate_access_traces(&[tr], run, &detector(1e-3), &env(), 4).unwrap();
        assert_eq!(r.mean_throughput, 0.0);
        assert_eq!(r.no_opportunity_fraction, 1.0);
    }

    #[test]
    fn senseless_limits() {
        let (c0, c) = mean_rates(&env(), SnrMode::Quadrature).unwrap();
        let off = OccupancyTrace::new(State::Off, vec![1e5], TraceOrigin::Generated).unwrap();
        let r = simulate_senseless_traces(&[off], &env(), 1e4, 1.0, 5).unwrap();
        assert!((r.mean_throughput / c0 - 1.0).abs() < 0.02);
        let on = OccupancyTrace::new(State::On, vec![1e5], TraceOrigin::Generated).unwrap();
        let r = simulate_senseless_traces(&[on], &env(), 1e4, 1.0, 5).unwrap();
        assert!((r.mean_throughput / c - 1.0).abs() < 0.02);
    }

    #[test]
    fn reports_are_reproducible_and_consistent() {
        let ch = vec![ChannelModel::exponential(1.0, 1.0).unwrap(); 2];
        let run = AccessRun {
            period: 0.14,
            sensing_time: 0.02,
            duration: 1600.0,
        };
        let a = simulate_access(&ch, run, &detector(1e-3), &env(), 9).unwrap();
        let b = simulate_access(&ch, run, &detector(1e-3), &env(), 9).unwrap();
        assert_eq!(a, b);
        let s = a.captured_fraction + a.interfered_fraction + a.no_opportunity_fraction;
        assert!((s - 1.0).abs() < 1e-9);
        assert!(a
            .throughput_cdf
            .windows(2)
            .all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
        assert_eq!(a.throughput_cdf[0].1, 0.0);
        assert_eq!(a.throughput_cdf[CDF_POINTS - 1].1, 1.0);
        assert!(matches!(
            simulate_access(
                &ch,
                AccessRun {
                    duration: 10.0,
                    ..run
                },
                &detector(1e-3),
                &env(),
                9
            ),
            Err(SimError::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn bootstrap_preserves_duty_cycle() {
        let ch = ChannelModel::exponential(2.0, 0.5).unwrap();
        let base = generate_trace(&ch, 2e5, &mut rng_from_seed(6)).unwrap();
        let out = bootstrap_channels(std::slice::from_ref(&base), 1, 2e5, 7).unwrap();
        assert_eq!(out[0].origin(), TraceOrigin::Bootstrapped);
        assert!((out[0].occupied_fraction() / base.occupied_fraction() - 1.0).abs() < 0.02);
        let again = bootstrap_channels(&[base], 1, 2e5, 7).unwrap();
        assert_eq!(out, again);
        assert!(bootstrap_channels(&[], 1, 10.0, 1).is_err());
    }
}
