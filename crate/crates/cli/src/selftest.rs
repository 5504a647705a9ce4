use std::time::Instant;

use dxhog::bounds::{lb_min_m, norm_bounds, ub_min_m, Ensemble};
use dxhog::haar::{sample_gaussian_state, sample_haar_state};
use dxhog::protocol::{
    replay, run_batch, run_spoof, summarize, summarize_scores, Replay, TrialMode,
};
use dxhog::stabilizer::{sample_stabilizer_preparation, to_measurement_template};
use dxhog::variational::{
    build_layout, objective_grad, optimize_ansatz, NoiseConstants, OptOptions,
};
use dxhog::RandomStream;

use crate::{CliError, Level};

type Check = (&'static str, fn() -> Result<String, String>);

fn within(mean: f64, se: f64, expected: f64, sigmas: f64) -> Result<String, String> {
    let msg = format!("mean {mean:.6} ± {se:.6}, expected {expected:.6}");
    if (mean - expected).abs() <= sigmas * se {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn headline_bounds() -> Result<String, String> {
    let a = lb_min_m(12, Ensemble::Clifford, 0.427).map_err(|e| e.to_string())?;
    let b = lb_min_m(12, Ensemble::Clifford, 0.362).map_err(|e| e.to_string())?;
    let c = ub_min_m(12, 0.427).map_err(|e| e.to_string())?;
    let msg = format!("lower 0.427 → {a}, lower 0.362 → {b}, upper 0.427 → {c}");
    if (a, b, c) == (78, 62, 330) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn clifford_norms() -> Result<String, String> {
    let nb = norm_bounds(Ensemble::Clifford, 12).map_err(|e| e.to_string())?;
    let msg = format!("A = {:.5e}, B = {:.5e}, t = {:?}", nb.a, nb.b, nb.t_opt);
    if (nb.a - 2.2094e-2).abs() < 5e-7 && (nb.b - 3.9452e-3).abs() < 5e-8 && nb.t_opt == Some(5) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn crossover() -> Result<String, String> {
    let first = (2..=12)
        .find(|&n| lb_min_m(n, Ensemble::Clifford, 1.0).is_ok_and(|m| m > n as u64))
        .ok_or("no crossover up to n = 12")?;
    if first == 7 {
        Ok(format!("first n with m > n: {first}"))
    } else {
        Err(format!("first n with m > n: {first}"))
    }
}

fn template_soundness() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut rng = RandomStream::new(101);
    for n in 2..=4 {
        for _ in 0..200 {
            let raw = sample_stabilizer_preparation(n, &mut rng).map_err(|e| e.to_string())?;
            let tpl = to_measurement_template(&raw);
            let d = raw
                .state()
                .phase_distance(&tpl.state())
                .map_err(|e| e.to_string())?;
            worst = worst.max(d);
        }
    }
    let msg = format!("max deviation {worst:.2e}");
    if worst < 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn gradient() -> Result<String, String> {
    let mut rng = RandomStream::new(102);
    let layout = build_layout(4, 3).map_err(|e| e.to_string())?;
    let target = sample_haar_state(4, &mut rng).map_err(|e| e.to_string())?;
    let c = NoiseConstants::default();
    let p: Vec<f64> = (0..layout.n_params())
        .map(|_| 2.0 * rng.uniform() - 1.0)
        .collect();
    let (_, g) = objective_grad(&layout, &p, &target, &c).map_err(|e| e.to_string())?;
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..p.len() {
        let f = |d: f64| {
            let mut q = p.clone();
            q[i] += d;
            objective_grad(&layout, &q, &target, &c).map(|r| r.0.fidelity)
        };
        let fd = (f(h).map_err(|e| e.to_string())? - f(-h).map_err(|e| e.to_string())?) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs() / g[i].abs().max(scale));
    }
    let msg = format!("max relative error {worst:.2e}");
    if worst < 1e-5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn gaussian_norm() -> Result<String, String> {
    let mut rng = RandomStream::new(103);
    let norms: Vec<f64> = (0..2000)
        .map(|_| sample_gaussian_state(4, &mut rng).map(|s| s.norm_sqr()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let s = summarize_scores(norms).map_err(|e| e.to_string())?;
    within(s.mean, s.stderr, 1.0, 4.0)
}

fn ideal_small() -> Result<String, String> {
    let recs = run_batch(6, 4000, &TrialMode::Ideal, 104).map_err(|e| e.to_string())?;
    let s = summarize(&recs).map_err(|e| e.to_string())?;
    within(s.mean, s.stderr, 63.0 / 65.0, 4.0)
}

fn replay_exact() -> Result<String, String> {
    let recs = run_batch(5, 100, &TrialMode::Depolarizing(0.5), 105).map_err(|e| e.to_string())?;
    for r in &recs {
        if replay(r, 0.0).map_err(|e| e.to_string())? != Replay::Match {
            return Err(format!("record {} does not replay", r.id));
        }
    }
    Ok(format!("{} records replay bit-exactly", recs.len()))
}

fn ideal_n12() -> Result<String, String> {
    let recs = run_batch(12, 20_000, &TrialMode::Ideal, 106).map_err(|e| e.to_string())?;
    let s = summarize(&recs).map_err(|e| e.to_string())?;
    within(s.mean, s.stderr, 4095.0 / 4097.0, 3.0)
}

fn depolarized_n12() -> Result<String, String> {
    let recs =
        run_batch(12, 10_000, &TrialMode::Depolarizing(0.427), 107).map_err(|e| e.to_string())?;
    let s = summarize(&recs).map_err(|e| e.to_string())?;
    within(s.mean, s.stderr, 0.427 * 4095.0 / 4097.0, 3.0)
}

fn spoof_theory() -> Result<String, String> {
    let outs = run_spoof(3, 6, 10_000, 108).map_err(|e| e.to_string())?;
    let s = summarize_scores(outs.iter().map(|o| o.score)).map_err(|e| e.to_string())?;
    within(s.mean, s.stderr, dxhog::bounds::ub_eps_exact(3, 6.0), 3.0)
}

fn expressivity() -> Result<String, String> {
    let layout = build_layout(6, 24).map_err(|e| e.to_string())?;
    let mut good = 0;
    for t in 0..10u64 {
        let target = sample_haar_state(6, &mut RandomStream::child(109, 2 * t))
            .map_err(|e| e.to_string())?;
        let r = optimize_ansatz(
            &layout,
            &target,
            &NoiseConstants::ZERO,
            &OptOptions::default(),
            &mut RandomStream::child(109, 2 * t + 1),
        )
        .map_err(|e| e.to_string())?;
        if r.overlap >= 0.99 {
            good += 1;
        }
    }
    let msg = format!("{good}/10 targets reach overlap ≥ 0.99");
    if good >= 8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

const QUICK: &[Check] = &[
    ("headline bounds", headline_bounds),
    ("clifford norm bounds", clifford_norms),
    ("advantage crossover", crossover),
    ("measurement template", template_soundness),
    ("adjoint gradient", gradient),
    ("gaussian state norm", gaussian_norm),
    ("ideal trials n=6", ideal_small),
    ("record replay", replay_exact),
];

const FULL: &[Check] = &[
    ("ideal trials n=12", ideal_n12),
    ("depolarized trials n=12", depolarized_n12),
    ("codebook vs theory", spoof_theory),
    ("ansatz expressivity n=6", expressivity),
];

pub fn run(level: Level) -> Result<(), CliError> {
    let checks: Vec<&Check> = match level {
        Level::Quick => QUICK.iter().collect(),
        Level::Full => QUICK.iter().chain(FULL).collect(),
    };
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {name}: {detail} [{:.2?}]", start.elapsed());
    }
    if failed > 0 {
        return Err(CliError::Failure(format!("{failed} self-test(s) failed")));
    }
    Ok(())
}
