use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use dxhog::bounds::{
    fmt_sig, hm_lb_bits, lb_eps_opt, lb_min_m, norm_bounds, sweep_eps, sweep_m, ub_eps,
    ub_eps_exact, ub_min_m, write_csv, Ensemble,
};
use dxhog::config::Config;
use dxhog::protocol::{
    certify, read_jsonl, replay, run_batch, run_spoof, summarize, summarize_scores, target_state,
    write_jsonl, Replay, TrialMode, XebSummary,
};
use dxhog::variational::{build_layout, optimize_ansatz, NoiseConstants, ParamsFile};
use dxhog::RandomStream;

use crate::{
    BoundsCmd, CliError, Command, EnsembleArgs, OptimizeArgs, SpoofCmd, TrialArgs, TrialCmd,
    VerifyCmd,
};

pub fn dispatch(cmd: Command, config: &Config) -> Result<(), CliError> {
    match cmd {
        Command::Bounds(b) => bounds(b, config),
        Command::Trial(TrialCmd::Run(args)) => trial_run(args, config),
        Command::Spoof(SpoofCmd::Run {
            n,
            m,
            trials,
            seed,
            out,
        }) => spoof_run(n, m, trials, seed, out, config),
        Command::Optimize(args) => optimize(args, config),
        Command::Verify(VerifyCmd::Records { path, tolerance }) => {
            verify_records(&path, tolerance.unwrap_or(config.tolerances.verify_abs))
        }
        Command::Selftest { level } => crate::selftest::run(level),
    }
}

fn ensemble(name: &str, t_max: u32, delta: f64) -> Result<Ensemble, CliError> {
    let e: Ensemble = name.trim().parse()?;
    Ok(match e {
        Ensemble::Design { .. } if !name.contains(':') => Ensemble::Design { t_max, delta },
        e => e,
    })
}

fn ensemble_args(a: &EnsembleArgs) -> Result<Ensemble, CliError> {
    ensemble(&a.ensemble, a.t_max, a.delta)
}

/// `a..b` / `a..=b` (inclusive) or `a,b,c`.
pub fn parse_u32_list(s: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::Usage(format!("bad list {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b
            .trim_start_matches('=')
            .trim()
            .parse()
            .map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|v| v.trim().parse().map_err(|_| bad()))
        .collect()
}

/// `a..b:step` (inclusive) or `a,b,c`.
pub fn parse_m_list(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Usage(format!("bad message-length list {s:?}"));
    if let Some((range, step)) = s.split_once(':') {
        let (a, b) = range.split_once("..").ok_or_else(bad)?;
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b
            .trim_start_matches('=')
            .trim()
            .parse()
            .map_err(|_| bad())?;
        let step: u64 = step.trim().parse().map_err(|_| bad())?;
        if step == 0 || a > b {
            return Err(bad());
        }
        return Ok((a..=b).step_by(step as usize).collect());
    }
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b
            .trim_start_matches('=')
            .trim()
            .parse()
            .map_err(|_| bad())?;
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|v| v.trim().parse().map_err(|_| bad()))
        .collect()
}

/// Explicit seed, `os`, or the configured default.
pub fn resolve_seed(seed: Option<&str>, config: &Config) -> Result<u64, CliError> {
    match seed {
        Some("os") => {
            let s = getrandom::u64().map_err(|e| CliError::Failure(format!("OS entropy: {e}")))?;
            eprintln!("seed: {s}");
            Ok(s)
        }
        Some(s) => s.parse().map_err(|_| {
            CliError::Usage(format!(
                "--seed must be an unsigned integer or `os`, got {s:?}"
            ))
        }),
        None => config.seeds.default.ok_or_else(|| {
            CliError::Usage(
                "randomized commands need --seed <u64|os> (or seeds.default in the config)".into(),
            )
        }),
    }
}

fn output_path(path: &Path, config: &Config) -> PathBuf {
    if path.is_relative() {
        config.paths.out_dir.join(path)
    } else {
        path.to_path_buf()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn summary_json(s: &XebSummary) -> String {
    serde_json::to_string(s).expect("summary serializes")
}

fn bounds(cmd: BoundsCmd, config: &Config) -> Result<(), CliError> {
    match cmd {
        BoundsCmd::Lower {
            n,
            ensemble,
            eps,
            m,
        } => {
            let e = ensemble_args(&ensemble)?;
            match (eps, m) {
                (Some(eps), _) => println!("{}", lb_min_m(n, e, eps)?),
                (None, Some(m)) => {
                    let (v, a) = lb_eps_opt(m as f64, &norm_bounds(e, n)?);
                    println!("eps_lb_opt={} a_star={}", fmt_sig(v, 10), fmt_sig(a, 10));
                }
                (None, None) => unreachable!("clap requires --eps or --m"),
            }
        }
        BoundsCmd::Upper { n, eps, m, exact } => match (eps, m) {
            (Some(eps), _) => println!("{}", ub_min_m(n, eps)?),
            (None, Some(m)) => {
                let v = if exact {
                    ub_eps_exact(n, m as f64)
                } else {
                    ub_eps(n, m as f64)
                };
                println!("{}", fmt_sig(v, 10));
            }
            (None, None) => unreachable!("clap requires --eps or --m"),
        },
        BoundsCmd::Sweep {
            n,
            ensemble: names,
            t_max,
            delta,
            eps,
            m,
            out,
        } => {
            let ns = parse_u32_list(&n)?;
            let ensembles = names
                .split(',')
                .map(|e| ensemble(e, t_max, delta))
                .collect::<Result<Vec<_>, _>>()?;
            let rows = match (eps, m) {
                (Some(eps), _) => sweep_eps(&ns, &ensembles, eps),
                (None, Some(ms)) => sweep_m(&ns, &ensembles, &parse_m_list(&ms)?)?,
                (None, None) => unreachable!("clap requires --eps or --m"),
            };
            match out {
                Some(p) => {
                    let p = output_path(&p, config);
                    write_csv(create(&p)?, &rows)?;
                    eprintln!("wrote {} rows to {}", rows.len(), p.display());
                }
                None => write_csv(io::stdout().lock(), &rows)?,
            }
        }
        BoundsCmd::Hm { n, eps } => println!("{}", fmt_sig(hm_lb_bits(n, eps), 10)),
    }
    Ok(())
}

fn trial_run(args: TrialArgs, config: &Config) -> Result<(), CliError> {
    let seed = resolve_seed(args.seed.as_deref(), config)?;
    let mode: TrialMode = args.mode.parse()?;
    if args.trials < 2 {
        return Err(CliError::Usage("--trials must be at least 2".into()));
    }
    let records = run_batch(args.n, args.trials, &mode, seed)?;
    if let Some(p) = &args.out {
        let p = output_path(p, config);
        write_jsonl(create(&p)?, &records)?;
    }
    let summary = summarize(&records)?;
    println!("{}", summary_json(&summary));
    if let Some(target) = args.certify {
        let c = certify(&summary, target, args.sigmas)?;
        let verdict = if c.pass { "pass" } else { "fail" };
        eprintln!(
            "certify eps={} at {}σ: {verdict} (margin {})",
            fmt_sig(target, 10),
            fmt_sig(args.sigmas, 10),
            fmt_sig(c.margin, 10)
        );
        if !c.pass {
            return Err(CliError::Failure("certification failed".into()));
        }
    }
    Ok(())
}

fn spoof_run(
    n: usize,
    m: u32,
    trials: u64,
    seed: Option<String>,
    out: Option<PathBuf>,
    config: &Config,
) -> Result<(), CliError> {
    let seed = resolve_seed(seed.as_deref(), config)?;
    let outcomes = run_spoof(n, m, trials, seed)?;
    let summary = summarize_scores(outcomes.iter().map(|o| o.score))?;
    let line = summary_json(&summary);
    println!("{line}");
    eprintln!(
        "codebook theory (exact integral): {}",
        fmt_sig(ub_eps_exact(n as u32, m as f64), 10)
    );
    if let Some(p) = out {
        let p = output_path(&p, config);
        let mut w = create(&p)?;
        writeln!(w, "{line}")?;
        w.flush()?;
    }
    Ok(())
}

fn optimize(args: OptimizeArgs, config: &Config) -> Result<(), CliError> {
    let seed = resolve_seed(args.seed.as_deref(), config)?;
    let layout = build_layout(args.n, args.depth)?;
    let target = target_state(args.n, seed)?;
    let constants = if args.noiseless {
        NoiseConstants::ZERO
    } else {
        config.noise
    };
    let mut opts = config.opt_options();
    opts.restarts = args.restarts;
    if let Some(it) = args.max_iters {
        opts.max_iters = it;
    }
    let mut rng = RandomStream::child(seed, 1);
    let result = optimize_ansatz(&layout, &target, &constants, &opts, &mut rng)?;
    eprintln!(
        "iterations {} ({}); overlap {}; noise factor {}",
        result.iterations,
        if result.converged {
            "converged"
        } else {
            "not converged"
        },
        fmt_sig(result.overlap, 10),
        fmt_sig(result.noise_factor, 10)
    );
    println!(
        "predicted_fidelity={}",
        fmt_sig(result.predicted_fidelity, 10)
    );
    if let Some(p) = args.out {
        let p = output_path(&p, config);
        let file = ParamsFile::from_result(&layout, &result, seed);
        let mut w = create(&p)?;
        writeln!(w, "{}", file.to_json())?;
        w.flush()?;
    }
    Ok(())
}

fn verify_records(path: &Path, tolerance: f64) -> Result<(), CliError> {
    let records = read_jsonl(BufReader::new(File::open(path)?))?;
    let mut bad = 0usize;
    for r in &records {
        match replay(r, tolerance)? {
            Replay::Match => {}
            Replay::Score { expected, got } => {
                bad += 1;
                eprintln!("record {}: score {expected:e} recomputes to {got:e}", r.id);
            }
            Replay::Outcome { expected, got } => {
                bad += 1;
                eprintln!("record {}: outcome {expected} recomputes to {got}", r.id);
            }
        }
    }
    if bad > 0 {
        return Err(CliError::Failure(format!(
            "{bad} of {} records do not replay",
            records.len()
        )));
    }
    println!("verified {} records", records.len());
    Ok(())
}
