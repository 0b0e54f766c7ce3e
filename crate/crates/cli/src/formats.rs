//! Text formats: model files, dwell files and recorded power traces.
//!
//! Model file, one block per state:
//!
//! ```text
//! state=ON
//! k=2
//! w=0.7,0.3
//! lambda=1,10
//! ```
//!
//! Power trace: an optional `# sweep_period_ms=30` header, then one dBm
//! reading per line.

use std::fmt::Write as _;
use std::path::Path;

use oppspec_core::sensing::power_threshold;
use oppspec_core::simkernel::TraceOrigin;
use oppspec_core::{ChannelModel, DetectorSpec, DwellSamples, ExpMixture, OccupancyTrace, State};

use crate::CliError;

/// Sweep period assumed when a trace has no header.
pub const DEFAULT_SWEEP_PERIOD: f64 = 0.030;
/// Shortest trace accepted by [`ingest_power_trace`].
pub const MIN_SWEEPS: usize = 100;

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: msg.into(),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn list(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Model-file text for one mixture. Values keep full precision so the weight
/// sum survives the round trip.
pub fn format_mixture(state: State, m: &ExpMixture) -> String {
    format!(
        "state={state}\nk={}\nw={}\nlambda={}\n",
        m.k(),
        list(m.weights()),
        list(m.rates())
    )
}

pub fn format_model(ch: &ChannelModel) -> String {
    format!(
        "{}{}",
        format_mixture(State::On, &ch.on),
        format_mixture(State::Off, &ch.off)
    )
}

#[derive(Default)]
struct Block {
    state: Option<(State, usize)>,
    k: Option<usize>,
    w: Option<Vec<f64>>,
    lambda: Option<Vec<f64>>,
}

/// Parses every mixture block in a model file.
pub fn parse_mixtures(path: &Path, text: &str) -> Result<Vec<(State, ExpMixture)>, CliError> {
    let mut out = Vec::new();
    let mut cur = Block::default();

    let finish = |b: Block, out: &mut Vec<(State, ExpMixture)>| -> Result<(), CliError> {
        let Some((state, line)) = b.state else {
            return Ok(());
        };
        let (Some(k), Some(w), Some(l)) = (b.k, b.w, b.lambda) else {
            return Err(parse_err(path, line, "block needs k, w and lambda"));
        };
        if w.len() != k || l.len() != k {
            return Err(parse_err(
                path,
                line,
                format!("k={k} but {} weights and {} rates", w.len(), l.len()),
            ));
        }
        let m = ExpMixture::new(w, l).map_err(|e| parse_err(path, line, e.to_string()))?;
        out.push((state, m));
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(path, n, format!("expected key=value, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let numbers = |v: &str| -> Result<Vec<f64>, CliError> {
            v.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| parse_err(path, n, format!("bad number `{}`", s.trim())))
                })
                .collect()
        };
        match key {
            "state" => {
                finish(std::mem::take(&mut cur), &mut out)?;
                let s: State = value
                    .parse()
                    .map_err(|_| parse_err(path, n, format!("bad state `{value}`")))?;
                cur.state = Some((s, n));
            }
            _ if cur.state.is_none() => return Err(parse_err(path, n, "expected state= first")),
            "k" => {
                cur.k = Some(
                    value
                        .parse()
                        .map_err(|_| parse_err(path, n, format!("bad k `{value}`")))?,
                )
            }
            "w" => cur.w = Some(numbers(value)?),
            "lambda" => cur.lambda = Some(numbers(value)?),
            other => return Err(parse_err(path, n, format!("unknown key `{other}`"))),
        }
    }
    finish(cur, &mut out)?;
    Ok(out)
}

/// Reads a channel model file holding exactly one ON and one OFF block.
pub fn read_model(path: &Path) -> Result<ChannelModel, CliError> {
    let blocks = parse_mixtures(path, &read(path)?)?;
    let pick = |s: State| -> Result<ExpMixture, CliError> {
        let mut it = blocks.iter().filter(|(st, _)| *st == s);
        match (it.next(), it.next()) {
            (Some((_, m)), None) => Ok(m.clone()),
            _ => Err(parse_err(
                path,
                0,
                format!("need exactly one state={s} block"),
            )),
        }
    };
    ChannelModel::new(pick(State::On)?, pick(State::Off)?)
        .map_err(|e| parse_err(path, 0, e.to_string()))
}

pub fn write_model(path: &Path, ch: &ChannelModel) -> Result<(), CliError> {
    write(path, &format_model(ch))
}

/// Dwell file: optional `# state=ON|OFF` header, one duration (s) per line.
pub fn read_dwells(path: &Path, default_state: State) -> Result<DwellSamples, CliError> {
    let text = read(path)?;
    let mut state = default_state;
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(c) = line.strip_prefix('#') {
            if let Some(v) = c.trim().strip_prefix("state=") {
                state = v
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(path, i + 1, format!("bad state `{v}`")))?;
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| parse_err(path, i + 1, format!("bad duration `{line}`")))?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::InsufficientData(format!(
            "{} holds no dwells",
            path.display()
        )));
    }
    DwellSamples::new(values, state).map_err(|e| parse_err(path, 0, e.to_string()))
}

pub fn format_dwells(samples: &DwellSamples) -> String {
    let mut s = format!("# state={}\n", samples.state());
    for v in samples.values() {
        let _ = writeln!(s, "{v}");
    }
    s
}

/// Parsed power trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    /// From the header, seconds.
    pub sweep_period: Option<f64>,
    /// Readings, dBm.
    pub readings_dbm: Vec<f64>,
}

pub fn parse_power_trace(path: &Path, text: &str) -> Result<PowerTrace, CliError> {
    let mut sweep_period = None;
    let mut readings = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if let Some(c) = line.strip_prefix('#') {
            for part in c.split_whitespace() {
                if let Some(v) = part.strip_prefix("sweep_period_ms=") {
                    let ms: f64 = v
                        .parse()
                        .map_err(|_| parse_err(path, n, format!("bad sweep period `{v}`")))?;
                    if !(ms > 0.0 && ms.is_finite()) {
                        return Err(parse_err(path, n, "sweep period must be positive"));
                    }
                    sweep_period = Some(ms * 1e-3);
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| parse_err(path, n, format!("bad power reading `{line}`")))?;
        if !v.is_finite() {
            return Err(parse_err(path, n, format!("non-finite reading `{line}`")));
        }
        readings.push(v);
    }
    Ok(PowerTrace {
        sweep_period,
        readings_dbm: readings,
    })
}

pub fn format_power_trace(sweep_period: f64, readings_dbm: &[f64]) -> String {
    let mut s = format!("# sweep_period_ms={}\n", sweep_period * 1e3);
    for v in readings_dbm {
        let _ = writeln!(s, "{v:.3}");
    }
    s
}

/// Result of thresholding a power trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub on: DwellSamples,
    pub off: DwellSamples,
    pub trace: OccupancyTrace,
    pub sweep_period: f64,
    pub sweeps: usize,
}

/// Thresholds readings into ON/OFF and merges runs into dwells.
///
/// A sweep is ON when its power reaches the detector's per-sample threshold.
pub fn ingest_readings(
    readings_dbm: &[f64],
    sweep_period: f64,
    detector: &DetectorSpec,
) -> Result<Ingested, CliError> {
    if !(sweep_period > 0.0 && sweep_period.is_finite()) {
        return Err(CliError::Config(format!(
            "sweep period {sweep_period} must be positive"
        )));
    }
    if readings_dbm.len() < MIN_SWEEPS {
        return Err(CliError::InsufficientData(format!(
            "{} sweeps, need at least {MIN_SWEEPS}",
            readings_dbm.len()
        )));
    }
    let thr_dbm = 10.0 * power_threshold(detector)?.log10();
    let state = |p: f64| if p >= thr_dbm { State::On } else { State::Off };
    let mut runs: Vec<(State, usize)> = Vec::new();
    for &p in readings_dbm {
        let s = state(p);
        match runs.last_mut() {
            Some((last, n)) if *last == s => *n += 1,
            _ => runs.push((s, 1)),
        }
    }
    let dwells: Vec<(State, f64)> = runs
        .iter()
        .map(|&(s, n)| (s, n as f64 * sweep_period))
        .collect();
    let trace = OccupancyTrace::from_dwells(&dwells, TraceOrigin::Ingested)?;
    let of = |s: State| -> Result<DwellSamples, CliError> {
        let v = dwells.iter().filter(|d| d.0 == s).map(|d| d.1).collect();
        Ok(DwellSamples::new(v, s)?)
    };
    Ok(Ingested {
        on: of(State::On)?,
        off: of(State::Off)?,
        trace,
        sweep_period,
        sweeps: readings_dbm.len(),
    })
}

/// Reads and thresholds a power-trace file. `sweep_period` overrides the
/// header; without either, 30 ms is used.
pub fn ingest_power_trace(
    path: &Path,
    sweep_period: Option<f64>,
    detector: &DetectorSpec,
) -> Result<Ingested, CliError> {
    let pt = parse_power_trace(path, &read(path)?)?;
    let period = sweep_period
        .or(pt.sweep_period)
        .unwrap_or(DEFAULT_SWEEP_PERIOD);
    ingest_readings(&pt.readings_dbm, period, detector)
}
