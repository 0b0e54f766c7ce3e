//! Command workflows. Each command builds its artifacts in memory and [`run`]
//! writes them out, so a failure leaves no partial report set behind.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use oppspec_core::analytics::optimize::{log_grid, Boundary, DropCurve, GRID_POINTS};
use oppspec_core::analytics::{
    calibrate_fbs_power, effective_alpha, mean_rates, optimize_interval, serving_channels,
    throughput_figures, Optimum,
};
use oppspec_core::linkbudget::{alpha, distance_for_alpha, noise_mw};
use oppspec_core::occupancy::{fit_mixture, goodness_of_fit, GeneralizedPareto, LogNormalDensity};
use oppspec_core::rng::{stream_rng, sub_seed};
use oppspec_core::simkernel::{
    bootstrap_channels, channel_traces, generate_trace, simulate_access_traces,
    simulate_senseless_traces, AccessRun,
};
use oppspec_core::{
    AccessPolicy, ChannelModel, DetectorSpec, DwellSamples, ExpMixture, OccupancyTrace, RadioEnv,
    SimReport, State,
};

use crate::config::{ChannelSource, RunConfig};
use crate::formats::{self, format_model, format_power_trace, ingest_power_trace};
use crate::report::{Cell, Report};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Fit,
    Analyze,
    Optimize,
    Simulate,
    Sweep,
    /// Writes synthetic power traces from the configured channel models.
    Synth,
    /// Solves for the FBS power and macro distance hitting the calibration targets.
    Calibrate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::Analyze => "analyze",
            Command::Optimize => "optimize",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Synth => "synth",
            Command::Calibrate => "calibrate",
        }
    }
}

/// A file to be written under the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub text: String,
}

impl From<Report> for Artifact {
    fn from(r: Report) -> Self {
        Artifact {
            name: format!("{}.csv", r.name),
            text: r.render(),
        }
    }
}

/// Observed dwells behind a channel, when it came from data.
#[derive(Debug, Clone)]
pub struct ChannelData {
    pub on: DwellSamples,
    pub off: DwellSamples,
    pub trace: Option<OccupancyTrace>,
}

#[derive(Debug, Clone)]
pub struct Channel {
    pub label: String,
    pub model: ChannelModel,
    pub data: Option<ChannelData>,
}

/// Detector used for ingestion, before any channel model is known.
fn ingest_detector(cfg: &RunConfig, env: &RadioEnv) -> Result<DetectorSpec, CliError> {
    cfg.detector.spec(env, 0.0)
}

/// Resolves every configured channel, fitting data-backed ones.
pub fn load_channels(cfg: &RunConfig, base: &Path) -> Result<Vec<Channel>, CliError> {
    let env = cfg.scenario.env();
    let fit_cfg = cfg.fit.config()?;
    let fit = |on: &DwellSamples, off: &DwellSamples| -> Result<ChannelModel, CliError> {
        let on_m = fit_mixture(on, &fit_cfg)?.mixture;
        let off_m = fit_mixture(off, &fit_cfg)?.mixture;
        Ok(ChannelModel::new(on_m, off_m)?)
    };
    cfg.channels
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let label = format!("ch{}", i + 1);
            match r.source(base)? {
                ChannelSource::Model(p) => Ok(Channel {
                    label,
                    model: formats::read_model(&p)?,
                    data: None,
                }),
                ChannelSource::Inline(model) => Ok(Channel {
                    label,
                    model,
                    data: None,
                }),
                ChannelSource::Dwells { on, off } => {
                    let on = formats::read_dwells(&on, State::On)?;
                    let off = formats::read_dwells(&off, State::Off)?;
                    if on.state() != State::On || off.state() != State::Off {
                        return Err(CliError::Config(format!(
                            "{label}: dwell file headers disagree with on_dwells/off_dwells"
                        )));
                    }
                    Ok(Channel {
                        label,
                        model: fit(&on, &off)?,
                        data: Some(ChannelData {
                            on,
                            off,
                            trace: None,
                        }),
                    })
                }
                ChannelSource::PowerTrace(p) => {
                    let ing = ingest_power_trace(&p, None, &ingest_detector(cfg, &env)?)?;
                    Ok(Channel {
                        label,
                        model: fit(&ing.on, &ing.off)?,
                        data: Some(ChannelData {
                            on: ing.on,
                            off: ing.off,
                            trace: Some(ing.trace),
                        }),
                    })
                }
            }
        })
        .collect()
}

fn models(channels: &[Channel]) -> Vec<ChannelModel> {
    channels.iter().map(|c| c.model.clone()).collect()
}

fn mean_duty_cycle(models: &[ChannelModel]) -> f64 {
    models.iter().map(ChannelModel::duty_cycle).sum::<f64>() / models.len() as f64
}

/// Channels actually cycled through by the policy.
pub fn serving(cfg: &RunConfig, channels: &[Channel]) -> Result<Vec<ChannelModel>, CliError> {
    if cfg.policy.num_channels == 0 {
        return Err(CliError::Config(
            "policy.num_channels must be at least 1".into(),
        ));
    }
    Ok(serving_channels(
        &models(channels),
        cfg.policy.num_channels,
    )?)
}

pub fn detector_for(cfg: &RunConfig, serving: &[ChannelModel]) -> Result<DetectorSpec, CliError> {
    cfg.detector
        .spec(&cfg.scenario.env(), mean_duty_cycle(serving))
}

pub fn optimum(cfg: &RunConfig, serving: &[ChannelModel]) -> Result<Optimum, CliError> {
    let env = cfg.scenario.env();
    let det = detector_for(cfg, serving)?;
    let bounds = cfg.analysis.bounds(serving, det.sensing_time);
    Ok(optimize_interval(
        serving,
        &env,
        &det,
        Some(bounds),
        cfg.analysis.model(),
    )?)
}

/// Builds the artifacts of one command.
pub fn execute(cmd: Command, cfg: &RunConfig, base: &Path) -> Result<Vec<Artifact>, CliError> {
    let channels = load_channels(cfg, base)?;
    if channels.is_empty() {
        return Err(CliError::Config(
            "at least one [[channels]] entry is required".into(),
        ));
    }
    match cmd {
        Command::Fit => fit_cmd(cfg, &channels),
        Command::Analyze => Ok(vec![analyze_report(cfg, &channels)?.into()]),
        Command::Optimize => Ok(vec![optimize_report(cfg, &channels)?.into()]),
        Command::Simulate => simulate_cmd(cfg, &channels),
        Command::Sweep => Ok(vec![sweep_report(cfg, &channels)?.into()]),
        Command::Synth => synth_cmd(cfg, &channels),
        Command::Calibrate => Ok(vec![calibrate_report(cfg)?.into()]),
    }
}

/// Runs a command and writes its artifacts into `out`.
pub fn run(
    cmd: Command,
    cfg: &RunConfig,
    base: &Path,
    out: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let artifacts = execute(cmd, cfg, base)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    artifacts
        .iter()
        .map(|a| {
            let p = out.join(&a.name);
            std::fs::write(&p, &a.text).map_err(|e| CliError::io(&p, e))?;
            Ok(p)
        })
        .collect()
}

/// Mixture orders tabulated by `fit` next to the configured one.
pub const GOF_ORDERS: [usize; 4] = [1, 2, 4, 8];

/// Φ of every candidate family on one dwell sample.
pub fn gof_table(
    samples: &DwellSamples,
    cfg: &RunConfig,
) -> Result<Vec<(String, usize, f64)>, CliError> {
    let mut rows = Vec::new();
    let exp = ExpMixture::exponential(1.0 / samples.mean())?;
    rows.push((
        "exponential".to_string(),
        1,
        goodness_of_fit(samples, &exp)?,
    ));
    let mut orders = GOF_ORDERS.to_vec();
    if !orders.contains(&cfg.fit.k) {
        orders.push(cfg.fit.k);
        orders.sort_unstable();
    }
    for k in orders {
        let out = fit_mixture(samples, &cfg.fit.config_with_k(k)?)?;
        rows.push((format!("mixture_k{k}"), out.effective_k, out.log_likelihood));
    }
    let ln = LogNormalDensity::from_samples(samples)?;
    rows.push(("lognormal".into(), 2, goodness_of_fit(samples, &ln)?));
    let gp = GeneralizedPareto::from_samples(samples)?;
    rows.push((
        "generalized_pareto".into(),
        2,
        goodness_of_fit(samples, &gp)?,
    ));
    Ok(rows)
}

fn fit_cmd(cfg: &RunConfig, channels: &[Channel]) -> Result<Vec<Artifact>, CliError> {
    let mut out = Vec::new();
    let mut table = Report::new(
        "fit_gof",
        "fit",
        cfg,
        &["channel", "state", "samples", "model", "components", "phi"],
    );
    let mut fitted = 0;
    for ch in channels {
        let Some(data) = &ch.data else { continue };
        fitted += 1;
        out.push(Artifact {
            name: format!("{}.model", ch.label),
            text: format_model(&ch.model),
        });
        for s in [&data.on, &data.off] {
            for (name, k, phi) in gof_table(s, cfg)? {
                table.row(vec![
                    ch.label.as_str().into(),
                    s.state().to_string().into(),
                    s.len().into(),
                    name.into(),
                    k.into(),
                    phi.into(),
                ]);
            }
        }
    }
    if fitted == 0 {
        return Err(CliError::Config(
            "fit needs channels backed by dwell files or power traces".into(),
        ));
    }
    out.push(table.into());
    Ok(out)
}

pub fn analyze_report(cfg: &RunConfig, channels: &[Channel]) -> Result<Report, CliError> {
    let env = cfg.scenario.env();
    let serving = serving(cfg, channels)?;
    let det = detector_for(cfg, &serving)?;
    let bounds = cfg.analysis.bounds(&serving, det.sensing_time);
    let model = cfg.analysis.model();
    let mut r = Report::new(
        "analyze",
        "analyze",
        cfg,
        &["period_s", "eta", "zeta_s", "tau", "chi", "c_all_bps"],
    );
    let mut best: Option<(f64, f64)> = None;
    for t in log_grid(bounds, GRID_POINTS) {
        let policy = AccessPolicy {
            period: t,
            sensing_time: det.sensing_time,
            num_channels: serving.len(),
        };
        let f = throughput_figures(&policy, &serving, &env, det.target_pfa, model)?;
        if best.is_none_or(|(_, c)| f.chi < c) {
            best = Some((t, f.chi));
        }
        r.row(vec![
            t.into(),
            f.eta.into(),
            f.zeta_s.into(),
            f.tau.into(),
            f.chi.into(),
            f.c_all_mean.into(),
        ]);
    }
    let (c0, c) = mean_rates(&env, model.snr)?;
    r.meta("c0_bps", c0);
    r.meta("c_bps", c);
    r.meta("grid_argmin_s", best.expect("non-empty grid").0);
    Ok(r)
}

pub fn optimize_report(cfg: &RunConfig, channels: &[Channel]) -> Result<Report, CliError> {
    let serving = serving(cfg, channels)?;
    let opt = optimum(cfg, &serving)?;
    let alpha = effective_alpha(&cfg.scenario.env(), cfg.analysis.snr_mode)?;
    let mut r = Report::new(
        "optimize",
        "optimize",
        cfg,
        &[
            "t_opt_s",
            "chi_min",
            "c_opt_bps",
            "c0_bps",
            "alpha_effective",
            "boundary",
            "t_lo_s",
            "t_hi_s",
        ],
    );
    let boundary = match opt.boundary {
        None => "interior",
        Some(Boundary::Lower) => "lower",
        Some(Boundary::Upper) => "upper",
    };
    r.row(vec![
        opt.t_opt.into(),
        opt.chi_min.into(),
        opt.c_opt.into(),
        opt.c0_mean.into(),
        alpha.into(),
        boundary.into(),
        opt.bounds.lo.into(),
        opt.bounds.hi.into(),
    ]);
    Ok(r)
}

/// Access run and senseless baseline on the same channel traces.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub period: f64,
    pub access: SimReport,
    pub senseless: SimReport,
    /// Closed-form `E{C_all}` at `period`.
    pub analytic: f64,
}

pub fn simulation(cfg: &RunConfig, channels: &[Channel]) -> Result<Simulation, CliError> {
    let env = cfg.scenario.env();
    let serving = serving(cfg, channels)?;
    let det = detector_for(cfg, &serving)?;
    let period = match cfg.policy.period_ms {
        Some(ms) => ms * 1e-3,
        None => optimum(cfg, &serving)?.t_opt,
    };
    let run = access_run(cfg, period, det.sensing_time);
    let traces = channel_traces(&serving, run.duration + period + run.sensing_time, cfg.seed)?;
    let access = simulate_access_traces(&traces, run, &det, &env, cfg.seed)?;
    let senseless = simulate_senseless_traces(
        &traces,
        &env,
        run.duration,
        cfg.simulation.senseless_block_ms * 1e-3,
        cfg.seed,
    )?;
    let curve = DropCurve::new(&serving, &env, &det, cfg.analysis.model())?;
    let analytic = (1.0 - curve.chi(period)) * curve.c0_mean;
    Ok(Simulation {
        period,
        access,
        senseless,
        analytic,
    })
}

fn access_run(cfg: &RunConfig, period: f64, sensing_time: f64) -> AccessRun {
    AccessRun {
        period,
        sensing_time,
        duration: cfg.simulation.periods as f64 * (period + sensing_time),
    }
}

const SIM_COLUMNS: [&str; 12] = [
    "scheme",
    "period_s",
    "mean_bps",
    "captured_fraction",
    "interfered_fraction",
    "no_opportunity_fraction",
    "p05_bps",
    "p10_bps",
    "p50_bps",
    "p90_bps",
    "p95_bps",
    "cycles",
];

fn sim_row(scheme: &str, period: f64, s: &SimReport) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![
        scheme.into(),
        period.into(),
        s.mean_throughput.into(),
        s.captured_fraction.into(),
        s.interfered_fraction.into(),
        s.no_opportunity_fraction.into(),
    ];
    row.extend(s.cycle_percentiles.iter().map(|&p| Cell::Num(p)));
    row.push(s.cycles.into());
    row
}

fn simulate_cmd(cfg: &RunConfig, channels: &[Channel]) -> Result<Vec<Artifact>, CliError> {
    let sim = simulation(cfg, channels)?;
    let mut summary = Report::new("simulate", "simulate", cfg, &SIM_COLUMNS);
    summary.meta("analytic_c_all_bps", sim.analytic);
    summary.row(sim_row("access", sim.period, &sim.access));
    summary.row(sim_row("senseless", f64::NAN, &sim.senseless));
    let mut out: Vec<Artifact> = vec![summary.into()];
    for (name, s) in [("access", &sim.access), ("senseless", &sim.senseless)] {
        let mut cdf = Report::new(
            &format!("simulate_{name}"),
            "simulate",
            cfg,
            &["throughput_bps", "cum_prob"],
        );
        cdf.meta("scheme", name);
        cdf.meta("mean_throughput_bps", s.mean_throughput);
        cdf.meta("captured_fraction", s.captured_fraction);
        cdf.meta("interfered_fraction", s.interfered_fraction);
        cdf.meta("no_opportunity_fraction", s.no_opportunity_fraction);
        cdf.meta("duration_s", s.duration);
        for &(rate, p) in &s.throughput_cdf {
            cdf.row(vec![rate.into(), p.into()]);
        }
        out.push(cdf.into());
    }
    Ok(out)
}

/// One row of the channel-count sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub channels: usize,
    pub optimum: Optimum,
    pub sim: SimReport,
}

fn fit_pooled(traces: &[OccupancyTrace], cfg: &RunConfig) -> Result<ChannelModel, CliError> {
    let fit_cfg = cfg.fit.config()?;
    let pool = |s: State| -> Result<ExpMixture, CliError> {
        let mut v = Vec::new();
        for tr in traces {
            // The final dwell is clipped by the horizon.
            let n = if tr.len() > 2 { tr.len() - 1 } else { tr.len() };
            v.extend(tr.dwells().take(n).filter(|d| d.0 == s).map(|d| d.1));
        }
        Ok(fit_mixture(&DwellSamples::new(v, s)?, &fit_cfg)?.mixture)
    };
    Ok(ChannelModel::new(pool(State::On)?, pool(State::Off)?)?)
}

pub fn sweep(cfg: &RunConfig, channels: &[Channel]) -> Result<Vec<SweepRow>, CliError> {
    let max_l = cfg.sweep.max_channels;
    if max_l == 0 {
        return Err(CliError::Config(
            "sweep.max_channels must be at least 1".into(),
        ));
    }
    let env = cfg.scenario.env();
    let direct = channels.len() >= max_l;
    let (models, base): (Vec<ChannelModel>, Vec<OccupancyTrace>) = if direct {
        (models(&channels[..max_l]), Vec::new())
    } else {
        let base_seed = sub_seed(cfg.seed, 2);
        let base = channels
            .iter()
            .enumerate()
            .map(
                |(i, ch)| match ch.data.as_ref().and_then(|d| d.trace.clone()) {
                    Some(tr) => Ok(tr),
                    None => {
                        let mut rng = stream_rng(base_seed, i as u64);
                        Ok(generate_trace(
                            &ch.model,
                            cfg.sweep.base_horizon_s,
                            &mut rng,
                        )?)
                    }
                },
            )
            .collect::<Result<Vec<_>, CliError>>()?;
        let pooled = fit_pooled(&base, cfg)?;
        (vec![pooled; max_l], base)
    };

    let mut optima = Vec::with_capacity(max_l);
    let mut horizon: f64 = 0.0;
    for l in 1..=max_l {
        let opt = optimum(cfg, &models[..l])?;
        let run = access_run(cfg, opt.t_opt, cfg.detector.sensing_time());
        horizon = horizon.max(run.duration + run.period + run.sensing_time);
        optima.push(opt);
    }
    let traces = if direct {
        channel_traces(&models, horizon, cfg.seed)?
    } else {
        bootstrap_channels(&base, max_l, horizon, sub_seed(cfg.seed, 1))?
    };
    optima
        .into_iter()
        .enumerate()
        .map(|(i, opt)| {
            let l = i + 1;
            let det = detector_for(cfg, &models[..l])?;
            let run = access_run(cfg, opt.t_opt, det.sensing_time);
            let sim = simulate_access_traces(&traces[..l], run, &det, &env, cfg.seed)?;
            Ok(SweepRow {
                channels: l,
                optimum: opt,
                sim,
            })
        })
        .collect()
}

pub fn sweep_report(cfg: &RunConfig, channels: &[Channel]) -> Result<Report, CliError> {
    let rows = sweep(cfg, channels)?;
    let mut r = Report::new(
        "sweep",
        "sweep",
        cfg,
        &[
            "channels",
            "t_opt_s",
            "c_opt_bps",
            "mean_bps",
            "p05_bps",
            "p10_bps",
            "p50_bps",
            "p90_bps",
            "p95_bps",
        ],
    );
    for row in &rows {
        let mut cells: Vec<Cell> = vec![
            row.channels.into(),
            row.optimum.t_opt.into(),
            row.optimum.c_opt.into(),
            row.sim.mean_throughput.into(),
        ];
        cells.extend(row.sim.cycle_percentiles.iter().map(|&p| Cell::Num(p)));
        r.row(cells);
    }
    Ok(r)
}

/// Received power per sweep (dBm) for a channel observed through the
/// configured detector window at `snr_db` while ON.
pub fn synth_readings<R: Rng + ?Sized>(
    trace: &OccupancyTrace,
    sweep_period: f64,
    snr_db: f64,
    noise_mw: f64,
    samples_per_window: usize,
    rng: &mut R,
) -> Vec<f64> {
    let m = samples_per_window as f64;
    let chi = Gamma::new(0.5 * m, 2.0 / m).expect("positive shape");
    let on_gain = 1.0 + 10f64.powf(snr_db / 10.0);
    let n = (trace.horizon() / sweep_period).floor() as usize;
    (0..n)
        .map(|j| {
            let t = j as f64 * sweep_period;
            let mean = match trace.state_at(t) {
                State::On => noise_mw * on_gain,
                State::Off => noise_mw,
            };
            10.0 * (mean * chi.sample(rng)).log10()
        })
        .collect()
}

fn synth_cmd(cfg: &RunConfig, channels: &[Channel]) -> Result<Vec<Artifact>, CliError> {
    let env = cfg.scenario.env();
    let det = ingest_detector(cfg, &env)?;
    let s = cfg.synth;
    if !(s.duration_s > 0.0 && s.sweep_period_ms > 0.0) {
        return Err(CliError::Config(
            "synth duration and sweep period must be positive".into(),
        ));
    }
    let period = s.sweep_period_ms * 1e-3;
    let seed = sub_seed(cfg.seed, 3);
    let mut out = Vec::new();
    for (i, ch) in channels.iter().enumerate() {
        let mut rng = stream_rng(seed, i as u64);
        let trace = generate_trace(&ch.model, s.duration_s, &mut rng)?;
        let readings = synth_readings(
            &trace,
            period,
            s.snr_db,
            noise_mw(&env),
            det.sample_count(),
            &mut rng,
        );
        out.push(Artifact {
            name: format!("{}.trace", ch.label),
            text: format_power_trace(period, &readings),
        });
        out.push(Artifact {
            name: format!("{}_source.model", ch.label),
            text: format_model(&ch.model),
        });
    }
    Ok(out)
}

pub fn calibrate_report(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut env = cfg.scenario.env();
    let mode = cfg.analysis.snr_mode;
    env.pt_fbs = calibrate_fbs_power(&env, cfg.calibrate.target_c0_mbps * 1e6, mode)?;
    if let Some(a) = cfg.calibrate.target_alpha {
        env.mbs_distance = distance_for_alpha(&env, a)?;
    }
    let (c0, _) = mean_rates(&env, mode)?;
    let mut r = Report::new(
        "calibrate",
        "calibrate",
        cfg,
        &[
            "pt_fbs_dbm",
            "mbs_distance_m",
            "c0_bps",
            "alpha",
            "alpha_effective",
        ],
    );
    r.row(vec![
        env.pt_fbs.into(),
        env.mbs_distance.into(),
        c0.into(),
        alpha(&env)?.into(),
        effective_alpha(&env, mode)?.into(),
    ]);
    Ok(r)
}
