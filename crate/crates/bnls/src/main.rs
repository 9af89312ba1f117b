//! Command-line driver: samplers, flows, gauges, functional evaluations,
//! Monte Carlo studies, and the exhaustive phase-factorization check.
//!
//! Exit codes: 0 on success, 1 when a study verdict fails, 2 on usage or
//! numerical errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use bnls::config::RunConfig;
use bnls::experiments::{run_study, StudyKind, StudySpec};
use bnls::io;
use bnls_core::flow::{
    evolve_truncated, gauge_deterministic, gauge_random, suggested_dt, FlowSpec, GaugeDirection,
};
use bnls_core::phase::{phi, phi_factored, PhaseTuple};
use bnls_core::phases::RandomPhaseSpec;
use bnls_core::random::{mollify, sample_data, GaussianEnsemble, MollifierKind, MollifierSpec};
use bnls_core::restriction::{
    random_xsb_norm, s_functional, strichartz_ratio, xsb_norm, ModulationKernel, SFunctionalParams,
};
use bnls_core::window::EtaCutoff;
use bnls_core::{moments, C64};

#[derive(Parser)]
#[command(name = "bnls", version, about = "Truncated fourth-order NLS flows with rough Gaussian data")]
struct Cli {
    /// Flat key-value config file; explicit flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (the BNLS_THREADS environment variable overrides).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw random initial data and write it as a field JSON file.
    Sample {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Optional mollification kernel: smooth | sharp.
        #[arg(long)]
        mollify: Option<String>,
        #[arg(long)]
        scale: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a truncated flow and write the trajectory dump.
    Evolve {
        /// original | renormalized | resonant | gauged-truncated
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        t_end: Option<f64>,
        /// Step size; omitted means the accuracy-targeted suggestion.
        #[arg(long)]
        dt: Option<f64>,
        /// Target relative error for the suggested step.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        halving_tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a gauge transform to a trajectory dump.
    Gauge {
        #[arg(long)]
        input: PathBuf,
        /// forward | inverse
        #[arg(long)]
        direction: Option<String>,
        /// Use the random per-mode gauge instead of the deterministic one.
        #[arg(long, default_value_t = false)]
        random: bool,
        #[arg(long)]
        phase_cutoff: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a functional; emits CSV rows (params..., value, std_error).
    Functional {
        /// s1 | s2 | s3 | xsb | random-xsb | strichartz | moment
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        s: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Mode triple for the moment functional.
        #[arg(long, allow_hyphen_values = true)]
        n1: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        n2: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        n3: Option<i64>,
        #[arg(long)]
        k1: Option<u32>,
        #[arg(long)]
        k2: Option<u32>,
        #[arg(long)]
        k3: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo study and write report artifacts.
    Study {
        /// invariance | convergence | residual | z1-scaling | cancellation | functional-tails
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated cutoff list.
        #[arg(long)]
        cutoffs: Option<String>,
        /// Comma-separated observation times.
        #[arg(long)]
        times: Option<String>,
        /// Comma-separated data regularities.
        #[arg(long)]
        alphas: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
        /// Comma-separated mollification ladder.
        #[arg(long)]
        scales: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively verify the phase factorization on a box of tuples.
    PhaseCheck {
        #[arg(long = "box")]
        box_size: Option<i64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}

fn init_threads(cfg: &mut RunConfig, flag: Option<usize>) -> Result<()> {
    let from_cfg: Option<usize> = cfg.consume_parsed("threads")?;
    let from_env = std::env::var("BNLS_THREADS")
        .ok()
        .map(|v| v.parse::<usize>().context("BNLS_THREADS must be an integer"))
        .transpose()?;
    // environment beats the flag, the flag beats the config file
    if let Some(n) = from_env.or(flag).or(from_cfg) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("initializing thread pool")?;
    }
    Ok(())
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::new()),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("bad list entry {:?}: {}", p, e))
        })
        .collect()
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = load_config(&cli.config)?;
    init_threads(&mut cfg, cli.threads)?;
    match cli.command {
        Command::Sample { n, alpha, seed, mollify: kind, scale, out } => {
            let n = n.or(cfg.consume_parsed("sample.n")?).unwrap_or(16);
            let alpha = alpha.or(cfg.consume_parsed("sample.alpha")?).unwrap_or(0.0);
            let seed = seed.or(cfg.consume_parsed("sample.seed")?).unwrap_or(7);
            let kind = kind.or(cfg.consume("sample.mollify"));
            let scale = scale.or(cfg.consume_parsed("sample.scale")?);
            let out = out
                .or(cfg.consume("out").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("field.json"));
            cfg.ensure_empty()?;

            let mut field = sample_data(seed, n, alpha);
            let mut echo = RunConfig::new();
            echo.set("sample.n", n);
            echo.set("sample.alpha", alpha);
            echo.set("sample.seed", seed);
            if let Some(kind) = &kind {
                let scale = scale.context("--scale required with --mollify")?;
                let mk = match kind.as_str() {
                    "smooth" => MollifierKind::SmoothBump,
                    "sharp" => MollifierKind::SharpCutoff,
                    other => bail!("unknown mollifier {:?} (smooth|sharp)", other),
                };
                field = mollify(&field, MollifierSpec::new(mk, scale));
                echo.set("sample.mollify", kind);
                echo.set("sample.scale", scale);
            }
            let mut file = io::FieldFile::from_field(&field, echo.to_text());
            file.seed = Some(seed);
            file.alpha = Some(alpha);
            io::write_field(&out, &file)?;
            println!("sample: wrote cutoff-{} field (mass {:.6}) to {}", n, field.mass(), out.display());
            Ok(true)
        }
        Command::Evolve {
            variant,
            n,
            t_end,
            dt,
            eps,
            stride,
            seed,
            alpha,
            halving_tol,
            out,
        } => {
            let variant_name = variant
                .or(cfg.consume("evolve.variant"))
                .unwrap_or_else(|| "renormalized".into());
            let variant = io::variant_from_name(&variant_name)?;
            let n = n.or(cfg.consume_parsed("evolve.n")?).unwrap_or(16);
            let t_end = t_end.or(cfg.consume_parsed("evolve.t_end")?).unwrap_or(0.5);
            let eps = eps.or(cfg.consume_parsed("evolve.eps")?).unwrap_or(1e-6);
            let dt = dt
                .or(cfg.consume_parsed("evolve.dt")?)
                .unwrap_or_else(|| suggested_dt(n, t_end, eps));
            let stride = stride.or(cfg.consume_parsed("evolve.stride")?).unwrap_or(usize::MAX);
            let seed = seed.or(cfg.consume_parsed("evolve.seed")?).unwrap_or(7);
            let alpha = alpha.or(cfg.consume_parsed("evolve.alpha")?).unwrap_or(0.0);
            let halving_tol =
                halving_tol.or(cfg.consume_parsed("evolve.halving_tol")?).unwrap_or(50.0 * eps);
            let out = out
                .or(cfg.consume("out").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("trajectory.dump"));
            cfg.ensure_empty()?;

            let ens = GaussianEnsemble::new(seed, n, alpha);
            let f0 = ens.field();
            let spec = FlowSpec::new(variant, n, dt, t_end)
                .with_stride(stride)
                .with_halving_tol(halving_tol);
            let needs = spec.variant.needs_ensemble();
            let traj = evolve_truncated(&f0, &spec, needs.then_some(&ens))
                .map_err(|e| anyhow::anyhow!("{}", e))?;
            let mut echo = RunConfig::new();
            echo.set("evolve.variant", &variant_name);
            echo.set("evolve.n", n);
            echo.set("evolve.t_end", t_end);
            echo.set("evolve.dt", dt);
            echo.set("evolve.stride", stride);
            echo.set("evolve.seed", seed);
            echo.set("evolve.alpha", alpha);
            echo.set("evolve.halving_tol", halving_tol);
            io::write_trajectory(&out, &traj, echo.to_text())?;
            let last = traj.states.last().unwrap();
            println!(
                "evolve: {} steps of {} to t = {} (terminal mass {:.9}) -> {}",
                traj.times.len() - 1,
                variant_name,
                traj.times.last().unwrap(),
                last.mass(),
                out.display()
            );
            Ok(true)
        }
        Command::Gauge { input, direction, random, phase_cutoff, out } => {
            let dir_name =
                direction.or(cfg.consume("gauge.direction")).unwrap_or_else(|| "forward".into());
            let dir = match dir_name.as_str() {
                "forward" => GaugeDirection::Forward,
                "inverse" => GaugeDirection::Inverse,
                other => bail!("unknown direction {:?} (forward|inverse)", other),
            };
            let phase_cutoff = phase_cutoff.or(cfg.consume_parsed("gauge.phase_cutoff")?);
            let out = out
                .or(cfg.consume("out").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("gauged.dump"));
            cfg.ensure_empty()?;

            let (header, traj) = io::read_trajectory(&input)?;
            let gauged = if random {
                let ens = traj
                    .ensemble
                    .clone()
                    .context("random gauge needs a dump with an ensemble seed")?;
                gauge_random(&traj, &ens, phase_cutoff, dir)
                    .map_err(|e| anyhow::anyhow!("{}", e))?
            } else {
                gauge_deterministic(&traj, dir)
            };
            let mut echo = RunConfig::parse(&header.config)?;
            echo.set("gauge.direction", &dir_name);
            echo.set("gauge.random", random);
            if let Some(pc) = phase_cutoff {
                echo.set("gauge.phase_cutoff", pc);
            }
            io::write_trajectory(&out, &gauged, echo.to_text())?;
            println!("gauge: {} {} samples -> {}", dir_name, gauged.times.len(), out.display());
            Ok(true)
        }
        Command::Functional {
            which,
            n,
            s,
            b,
            delta,
            samples,
            seed,
            n1,
            n2,
            n3,
            k1,
            k2,
            k3,
            out,
        } => {
            let which = which.or(cfg.consume("functional.which")).unwrap_or_else(|| "s1".into());
            let n = n.or(cfg.consume_parsed("functional.n")?).unwrap_or(8);
            let s = s.or(cfg.consume_parsed("functional.s")?).unwrap_or(-0.1);
            let b = b.or(cfg.consume_parsed("functional.b")?).unwrap_or(0.45);
            let delta = delta.or(cfg.consume_parsed("functional.delta")?).unwrap_or(0.2);
            let samples = samples.or(cfg.consume_parsed("functional.samples")?).unwrap_or(20);
            let seed = seed.or(cfg.consume_parsed("functional.seed")?).unwrap_or(7);
            cfg.ensure_empty()?;
            let line = functional_row(
                &which, n, s, b, delta, samples, seed, n1, n2, n3, k1, k2, k3,
            )?;
            let text = format!("which,n,s,b,delta,samples,seed,value,std_error\n{}\n", line);
            match out {
                Some(p) => {
                    std::fs::write(&p, text)?;
                    println!("functional: {} -> {}", which, p.display());
                }
                None => print!("{}", text),
            }
            Ok(true)
        }
        Command::Study { kind, samples, seed, cutoffs, times, alphas, delta, scales, out } => {
            let kind_name = kind
                .or(cfg.consume("study.kind"))
                .context("--kind (or study.kind in the config) is required")?;
            let kind: StudyKind = kind_name.parse()?;
            let mut spec = StudySpec::default_for(kind);
            if let Some(v) = samples.or(cfg.consume_parsed("study.samples")?) {
                spec.samples = v;
            }
            if let Some(v) = seed.or(cfg.consume_parsed("study.seed")?) {
                spec.seed = v;
            }
            if let Some(v) = cutoffs.or(cfg.consume("study.cutoffs")) {
                spec.cutoffs = parse_list(&v)?;
            }
            if let Some(v) = times.or(cfg.consume("study.times")) {
                spec.times = parse_list(&v)?;
            }
            if let Some(v) = alphas.or(cfg.consume("study.alphas")) {
                spec.alphas = parse_list(&v)?;
            }
            if let Some(v) = delta.or(cfg.consume_parsed("study.delta")?) {
                spec.delta = v;
            }
            if let Some(v) = scales.or(cfg.consume("study.scales")) {
                spec.scales = parse_list(&v)?;
            }
            let out = out
                .or(cfg.consume("out").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(format!("study-{}", kind_name)));
            cfg.ensure_empty()?;

            let mut echo = RunConfig::new();
            echo.set("study.kind", &kind_name);
            echo.set("study.samples", spec.samples);
            echo.set("study.seed", spec.seed);
            echo.set("study.cutoffs", join(&spec.cutoffs));
            echo.set("study.times", join(&spec.times));
            echo.set("study.alphas", join(&spec.alphas));
            echo.set("study.delta", spec.delta);
            echo.set("study.scales", join(&spec.scales));
            let report = run_study(&spec, echo.to_text())?;
            report.write_artifacts(&out)?;
            println!("{} (artifacts in {})", report.summary(), out.display());
            Ok(report.passed)
        }
        Command::PhaseCheck { box_size } => {
            let box_size = box_size.or(cfg.consume_parsed("phase_check.box")?).unwrap_or(50);
            cfg.ensure_empty()?;
            let mut mismatches = 0u64;
            let mut total = 0u64;
            for a in -box_size..=box_size {
                for c in -box_size..=box_size {
                    for d in -box_size..=box_size {
                        total += 1;
                        if phi(a, c, d).unwrap() != phi_factored(a, c, d).unwrap() {
                            mismatches += 1;
                        }
                    }
                }
            }
            println!("phase-check: {} mismatches / {} tuples (box {})", mismatches, total, box_size);
            Ok(mismatches == 0)
        }
    }
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[allow(clippy::too_many_arguments)]
fn functional_row(
    which: &str,
    n: usize,
    s: f64,
    b: f64,
    delta: f64,
    samples: usize,
    seed: u64,
    n1: Option<i64>,
    n2: Option<i64>,
    n3: Option<i64>,
    k1: Option<u32>,
    k2: Option<u32>,
    k3: Option<u32>,
) -> Result<String> {
    let window = EtaCutoff::new(delta);
    let mean_se = |vals: &[f64]| -> (f64, f64) {
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        if vals.len() < 2 {
            return (m, 0.0);
        }
        let var =
            vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (vals.len() as f64 - 1.0);
        (m, (var / vals.len() as f64).sqrt())
    };
    let linear_two_sided = |seed: u64| -> Result<bnls_core::SpaceTimeField> {
        let f0 = sample_data(seed, n, 0.0);
        let span = 2.0 * delta * 1.05;
        let steps = 128usize;
        let h = 2.0 * span / steps as f64;
        let times: Vec<f64> = (0..=steps).map(|j| -span + j as f64 * h).collect();
        let states = times
            .iter()
            .map(|&t| bnls_core::flow::linear_propagate(&f0, t))
            .collect();
        let traj = bnls_core::flow::TrajectoryRecord {
            spec: FlowSpec::new(bnls_core::flow::FlowVariant::Renormalized, n, h, span),
            times,
            states,
            ensemble: None,
        };
        Ok(bnls_core::SpaceTimeField::from_trajectory(&traj).map_err(|e| anyhow::anyhow!("{}", e))?)
    };
    let (value, std_error) = match which {
        "s1" | "s2" | "s3" => {
            let j = which[1..].parse::<usize>().unwrap();
            if n > 24 {
                bail!("functional box {} exceeds the supported size 24", n);
            }
            let kernel = ModulationKernel::new(&window, b);
            let params = SFunctionalParams { s, box_size: n, trunc: n, projections: [-1, -1, -1] };
            let vals: Vec<f64> = (0..samples)
                .map(|i| {
                    let ens = GaussianEnsemble::new(
                        bnls_core::random::derive_trajectory_seed(seed, i as u64),
                        n,
                        0.0,
                    );
                    s_functional(j, params, &kernel, &ens).map_err(|e| anyhow::anyhow!("{}", e))
                })
                .collect::<Result<_>>()?;
            mean_se(&vals)
        }
        "xsb" => {
            let vals: Vec<f64> = (0..samples)
                .map(|i| {
                    let w = linear_two_sided(bnls_core::random::derive_trajectory_seed(seed, i as u64))?;
                    xsb_norm(&w, s, b, &window).map_err(|e| anyhow::anyhow!("{}", e))
                })
                .collect::<Result<_>>()?;
            mean_se(&vals)
        }
        "random-xsb" => {
            let vals: Vec<f64> = (0..samples)
                .map(|i| {
                    let sd = bnls_core::random::derive_trajectory_seed(seed, i as u64);
                    let w = linear_two_sided(sd)?;
                    let ens = GaussianEnsemble::new(sd, n, 0.0);
                    let phases = RandomPhaseSpec::new(&ens, Some(n));
                    random_xsb_norm(&w, s, b, &window, &phases)
                        .map_err(|e| anyhow::anyhow!("{}", e))
                })
                .collect::<Result<_>>()?;
            mean_se(&vals)
        }
        "strichartz" => {
            let vals: Vec<f64> = (0..samples)
                .map(|i| {
                    let w = linear_two_sided(bnls_core::random::derive_trajectory_seed(seed, i as u64))?;
                    strichartz_ratio(&w, &window).map_err(|e| anyhow::anyhow!("{}", e))
                })
                .collect::<Result<_>>()?;
            mean_se(&vals)
        }
        "moment" => {
            let tuple = PhaseTuple::new(n1.unwrap_or(1), n2.unwrap_or(0), n3.unwrap_or(-1))
                .map_err(|e| anyhow::anyhow!("{}", e))?;
            let coeffs = vec![(tuple, C64::new(1.0, 0.0))];
            let ks = [k1.map(Some).unwrap_or(Some(0)), Some(k2.unwrap_or(0)), Some(k3.unwrap_or(0))];
            let est = moments::multilinear_second_moment(&coeffs, ks, samples.max(2), seed);
            (est.mc_mean, est.mc_std_error)
        }
        other => bail!("unknown functional {:?}", other),
    };
    Ok(format!(
        "{},{},{},{},{},{},{},{},{}",
        which, n, s, b, delta, samples, seed, value, std_error
    ))
}
