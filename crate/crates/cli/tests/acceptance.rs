//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines always show.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use oppspec_cli::commands::{self, load_channels, serving};
use oppspec_cli::config::{ChannelRef, RunConfig};
use oppspec_core::analytics::{
    captured_opportunities, captured_opportunities_renewal, mean_rates, mutual_fraction,
    mutual_fraction_renewal, SnrMode,
};
use oppspec_core::occupancy::{fit_mixture, FitConfig};
use oppspec_core::rng::{stream_rng, sub_seed};
use oppspec_core::sensing::{classify_window, detection_threshold};
use oppspec_core::simkernel::{
    channel_traces, generate_dwells, oracle_captured, simulate_access_traces,
    simulate_senseless_traces, AccessRun,
};
use oppspec_core::{ChannelModel, DetectorSpec, DwellSamples, ExpMixture, Hypothesis, State};

struct Outcome {
    pass: bool,
    detail: String,
}

fn scenario(name: &str) -> (RunConfig, PathBuf) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let cfg = RunConfig::load(&dir.join(name)).expect("scenario loads");
    (cfg, dir)
}

fn reference() -> RunConfig {
    scenario("reference.toml").0
}

/// Channel with OFF mean 1/`off_rate` and duty cycle `u`; `k = 2` uses
/// equal-weight components with rates in ratio 1:3.
fn channel(u: f64, off_rate: f64, k: usize) -> ChannelModel {
    let on_rate = off_rate * (1.0 - u) / u;
    let mix = |rate: f64| match k {
        1 => ExpMixture::exponential(rate).unwrap(),
        _ => ExpMixture::new(vec![0.5, 0.5], vec![rate * 2.0 / 3.0, rate * 2.0]).unwrap(),
    };
    ChannelModel::new(mix(on_rate), mix(off_rate)).unwrap()
}

fn criterion_1() -> Outcome {
    let mut worst_printed: f64 = 0.0;
    let mut worst_renewal: f64 = 0.0;
    let mut lines = Vec::new();
    let mut idx = 0;
    for k in [1, 2] {
        for u in [0.2, 0.5, 0.8] {
            for tl in [0.1, 1.0, 10.0] {
                let ch = channel(u, 1.0, k);
                let t = tl;
                let mut rng = stream_rng(101, idx);
                idx += 1;
                let trace = generate_dwells(&ch, 1_000_000, &mut rng).unwrap();
                let o = oracle_captured(&trace, t).unwrap();
                let zp = captured_opportunities(&ch, t);
                let tp = mutual_fraction(&ch.off, t, 0.0);
                let zr = captured_opportunities_renewal(&ch, t);
                let tr = mutual_fraction_renewal(&ch.off, t, 0.0);
                let dp = (zp - o.zeta_hat).abs().max((tp - o.tau_hat).abs());
                let dr = (zr - o.zeta_hat).abs().max((tr - o.tau_hat).abs());
                worst_printed = worst_printed.max(dp);
                worst_renewal = worst_renewal.max(dr);
                if dp >= 0.01 {
                    lines.push(format!(
                        "k={k} u={u} T*lambda={tl}: oracle zeta {:.4} tau {:.4}; closed form zeta {zp:.4} tau {tp:.4}",
                        o.zeta_hat, o.tau_hat
                    ));
                }
            }
        }
    }
    for l in &lines {
        println!("    criterion 1 deviation: {l}");
    }
    Outcome {
        pass: worst_printed < 0.01,
        detail: format!(
            "max |closed form - oracle| = {worst_printed:.4} over 18 runs ({} beyond 0.01); equilibrium-residual forms: {worst_renewal:.4}",
            lines.len()
        ),
    }
}

fn criterion_2() -> Outcome {
    let cfg = reference();
    let channels = load_channels(&cfg, Path::new(".")).unwrap();
    let serving = serving(&cfg, &channels).unwrap();
    let opt = commands::optimum(&cfg, &serving).unwrap();
    let det = commands::detector_for(&cfg, &serving).unwrap();
    let env = cfg.scenario.env();
    let periods = 100_000.0;
    let sim = |t: f64| {
        let run = AccessRun {
            period: t,
            sensing_time: det.sensing_time,
            duration: periods * (t + det.sensing_time),
        };
        let traces =
            channel_traces(&serving, run.duration + t + det.sensing_time, cfg.seed).unwrap();
        simulate_access_traces(&traces, run, &det, &env, cfg.seed)
            .unwrap()
            .mean_throughput
    };
    let at = sim(opt.t_opt);
    let lo = sim(0.25 * opt.t_opt);
    let hi = sim(4.0 * opt.t_opt);
    let rel = (at / opt.c_opt - 1.0).abs();
    Outcome {
        pass: at > lo && at > hi && rel < 0.03,
        detail: format!(
            "T_opt {:.4} s: simulated {:.2} Mbps vs analytic {:.2} Mbps ({:.2}%); 0.25 T_opt {:.2}, 4 T_opt {:.2}",
            opt.t_opt,
            at / 1e6,
            opt.c_opt / 1e6,
            rel * 100.0,
            lo / 1e6,
            hi / 1e6
        ),
    }
}

fn criterion_3() -> Outcome {
    let base = reference();
    let env = base.scenario.env();
    let mut rows = Vec::new();
    let mut ordered = 0;
    let mut high_ratio = f64::NAN;
    let mut idx = 0u64;
    for u in [0.3, 0.5, 0.7, 0.9] {
        for (j, off_mean) in [0.25, 0.5, 1.0, 2.0, 4.0].into_iter().enumerate() {
            let k = 1 + j % 2;
            let mut cfg = base.clone();
            cfg.seed = sub_seed(base.seed, 300 + idx);
            idx += 1;
            cfg.channels = vec![ChannelRef::inline(&channel(u, 1.0 / off_mean, k)); 2];
            let channels = load_channels(&cfg, Path::new(".")).unwrap();
            let serving = serving(&cfg, &channels).unwrap();
            let opt = commands::optimum(&cfg, &serving).unwrap();
            let det = commands::detector_for(&cfg, &serving).unwrap();
            let run = AccessRun {
                period: opt.t_opt,
                sensing_time: det.sensing_time,
                duration: 1e5 * (opt.t_opt + det.sensing_time),
            };
            let traces = channel_traces(
                &serving,
                run.duration + opt.t_opt + det.sensing_time,
                cfg.seed,
            )
            .unwrap();
            let c_opt = simulate_access_traces(&traces, run, &det, &env, cfg.seed)
                .unwrap()
                .mean_throughput;
            let c_sl = simulate_senseless_traces(&traces, &env, run.duration, 1.0, cfg.seed)
                .unwrap()
                .mean_throughput;
            let ratio = c_opt / c_sl;
            if ratio >= 1.0 {
                ordered += 1;
            }
            if u == 0.7 && off_mean == 1.0 {
                high_ratio = ratio;
            }
            rows.push(format!(
                "u={u} off_mean={off_mean}s k={k}: C_opt/C_SL = {ratio:.3}"
            ));
        }
    }
    for r in &rows {
        println!("    criterion 3 scenario: {r}");
    }
    Outcome {
        pass: ordered == rows.len() && high_ratio >= 1.10,
        detail: format!(
            "C_opt >= C_SL in {ordered}/{} scenarios; u=0.7 high-traffic ratio {high_ratio:.3} (need 1.10)",
            rows.len()
        ),
    }
}

fn criterion_4() -> Outcome {
    let mut cfg = reference();
    cfg.sweep.max_channels = 5;
    // One base channel, so all five are bootstrapped.
    cfg.channels.truncate(1);
    let channels = load_channels(&cfg, Path::new(".")).unwrap();
    let rows = commands::sweep(&cfg, &channels).unwrap();
    let means: Vec<f64> = rows.iter().map(|r| r.sim.mean_throughput).collect();
    let monotone = means.windows(2).all(|w| w[1] >= w[0]);
    let g12 = means[1] - means[0];
    let g45 = means[4] - means[3];
    Outcome {
        pass: monotone && g45 < 0.25 * g12,
        detail: format!(
            "means (Mbps) {}; gain L4->5 {:.3} vs 0.25 x gain L1->2 {:.3}",
            means
                .iter()
                .map(|m| format!("{:.2}", m / 1e6))
                .collect::<Vec<_>>()
                .join(", "),
            g45 / 1e6,
            0.25 * g12 / 1e6
        ),
    }
}

fn criterion_5() -> Outcome {
    let cfg = reference();
    let env = cfg.scenario.env();
    // Prior u = 0: the conditional false-alarm target equals p_fa.
    let det = cfg.detector.spec(&env, 0.0).unwrap();
    let rho = detection_threshold(&det).unwrap();
    let m = det.sample_count();
    let s2 = det.noise_variance;
    let n = 1_000_000u64;
    // Window energy of M real Gaussian samples is σ² χ²_M.
    let chi2 = Gamma::new(0.5 * m as f64, 2.0).unwrap();
    let mut rng = stream_rng(505, 0);
    let false_alarms = (0..n).filter(|_| s2 * chi2.sample(&mut rng) >= rho).count() as f64;
    let gain = 1.0 + 10f64.powf(1.6);
    let misses = (0..n)
        .filter(|_| s2 * gain * chi2.sample(&mut rng) < rho)
        .count() as f64;
    let p = det.target_pfa;
    let half = 2.5758 * (p * (1.0 - p) / n as f64).sqrt();
    let pfa_hat = false_alarms / n as f64;
    let pd_hat = 1.0 - misses / n as f64;

    // Sample-level cross-check on a short window.
    let small = DetectorSpec::new(1e-2, 1e-3, 5e4, 1.0, 0.0).unwrap();
    let rho_s = detection_threshold(&small).unwrap();
    let ms = small.sample_count();
    let mut rng = stream_rng(505, 1);
    let trials = 100_000;
    let mut window = vec![0.0; ms];
    let mut fa = 0usize;
    for _ in 0..trials {
        for x in window.iter_mut() {
            *x = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        if classify_window(&small, &window, rho_s).unwrap() == Hypothesis::H1 {
            fa += 1;
        }
    }
    println!(
        "    criterion 5 sample-level check: M = {ms}, p_fa target 0.01, observed {:.4} (Gaussian threshold approximation)",
        fa as f64 / trials as f64
    );
    Outcome {
        pass: (pfa_hat - p).abs() <= half && pd_hat > 0.9999,
        detail: format!(
            "M = {m}: false-alarm rate {pfa_hat:.6} (99% CI {:.6}..{:.6}); detection rate at 16 dB {pd_hat:.6}",
            p - half,
            p + half
        ),
    }
}

fn criterion_6() -> Outcome {
    let cfg = reference();
    let (c0, _) = mean_rates(&cfg.scenario.env(), SnrMode::Quadrature).unwrap();
    Outcome {
        pass: (c0 / 100e6 - 1.0).abs() <= 0.05,
        detail: format!("E{{C0}} = {:.3} Mbps", c0 / 1e6),
    }
}

fn criterion_7() -> Outcome {
    let mut rng = stream_rng(707, 0);
    let v: Vec<f64> = (0..100_000)
        .map(|_| (2.0 * rng.sample::<f64, _>(rand_distr::StandardNormal)).exp())
        .collect();
    let s = DwellSamples::new(v, State::Off).unwrap();
    let phi = |k: usize| {
        fit_mixture(&s, &FitConfig::auto(k))
            .unwrap()
            .log_likelihood
            .abs()
    };
    let (p1, p2, p8) = (phi(1), phi(2), phi(8));
    Outcome {
        pass: p8 < p2 && p2 < p1,
        detail: format!("lognormal(0, 2) dwells: |Phi| k=8 {p8:.4}, k=2 {p2:.4}, k=1 {p1:.4}"),
    }
}

fn criterion_8() -> Outcome {
    let (gen, dir) = scenario("synthetic-day.toml");
    let out = tempfile::tempdir().unwrap();
    let files = commands::run(commands::Command::Synth, &gen, &dir, out.path()).unwrap();
    let traces: Vec<&PathBuf> = files
        .iter()
        .filter(|p| p.extension().is_some_and(|e| e == "trace"))
        .collect();
    let generators = load_channels(&gen, &dir).unwrap();

    let mut ing_cfg = gen.clone();
    ing_cfg.channels = traces
        .iter()
        .map(|p| ChannelRef {
            power_trace: Some((*p).clone()),
            ..Default::default()
        })
        .collect();
    let fitted = load_channels(&ing_cfg, &dir).unwrap();

    let mut worst_u: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    let mut parts = Vec::new();
    for (g, f) in generators.iter().zip(&fitted) {
        let (ug, uf) = (g.model.duty_cycle(), f.model.duty_cycle());
        let tg = commands::optimum(&gen, std::slice::from_ref(&g.model))
            .unwrap()
            .t_opt;
        let tf = commands::optimum(&gen, std::slice::from_ref(&f.model))
            .unwrap()
            .t_opt;
        worst_u = worst_u.max((uf / ug - 1.0).abs());
        worst_t = worst_t.max((tf / tg - 1.0).abs());
        parts.push(format!(
            "{}: u {ug:.4} -> {uf:.4}, T_opt {tg:.4} -> {tf:.4} s",
            g.label
        ));
    }
    Outcome {
        pass: worst_u < 0.03 && worst_t < 0.10,
        detail: format!(
            "{}; worst duty-cycle error {:.2}%, worst T_opt error {:.2}%",
            parts.join("; "),
            worst_u * 100.0,
            worst_t * 100.0
        ),
    }
}

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "closed form vs renewal oracle",
            budget: Duration::from_secs(60),
            run: criterion_1,
        },
        Criterion {
            id: 2,
            name: "unimodal optimum",
            budget: Duration::from_secs(30),
            run: criterion_2,
        },
        Criterion {
            id: 3,
            name: "optimized vs senseless",
            budget: Duration::from_secs(300),
            run: criterion_3,
        },
        Criterion {
            id: 4,
            name: "channel-count saturation",
            budget: Duration::from_secs(120),
            run: criterion_4,
        },
        Criterion {
            id: 5,
            name: "energy-detector operating point",
            budget: Duration::from_secs(60),
            run: criterion_5,
        },
        Criterion {
            id: 6,
            name: "throughput calibration",
            budget: Duration::from_secs(1),
            run: criterion_6,
        },
        Criterion {
            id: 7,
            name: "fitting quality ordering",
            budget: Duration::from_secs(60),
            run: criterion_7,
        },
        Criterion {
            id: 8,
            name: "ingestion round trip",
            budget: Duration::from_secs(120),
            run: criterion_8,
        },
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|f| c.id.to_string() == *f || c.name.contains(f.as_str()))
        {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run).unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ),
        });
        let took = start.elapsed();
        let in_time = took <= c.budget;
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {} ({}): {} [{:.1} s of {} s]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            outcome.detail,
            took.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
