//! wasm-bindgen exports backing `www/index.html`. Every function returns a JSON
//! string so the page needs no generated type bindings beyond `init`.

use dxhog::bounds::{lb_eps_opt, norm_bounds, ub_eps, Ensemble};
use dxhog::protocol::{run_batch, summarize, TrialMode};
use dxhog::stabilizer::{sample_stabilizer_preparation, to_measurement_template};
use dxhog::state::format_bitstring;
use dxhog::RandomStream;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(e: dxhog::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Lower (clifford, haar) and upper bound on F_XEB for `m = step, 2·step, …, m_max`.
pub fn bound_curves_json(n: u32, m_max: u32, step: u32) -> Result<String, dxhog::Error> {
    let step = step.max(1);
    let clifford = norm_bounds(Ensemble::Clifford, n)?;
    let haar = norm_bounds(Ensemble::Haar, n)?;
    let ms: Vec<u32> = (step..=m_max).step_by(step as usize).collect();
    let lb = |nb| -> Vec<f64> {
        ms.iter()
            .map(|&m| lb_eps_opt(m as f64, nb).0.min(1.0))
            .collect()
    };
    Ok(json!({
        "n": n,
        "m": ms,
        "clifford": lb(&clifford),
        "haar": lb(&haar),
        "upper": ms.iter().map(|&m| ub_eps(n, m as f64)).collect::<Vec<_>>(),
    })
    .to_string())
}

/// Depolarized trials: summary plus a histogram of `2^n p(z)` over the
/// sampled outcomes in bins of width 0.25 on `[0, 8)`.
pub fn xeb_trials_json(
    n: usize,
    trials: u32,
    fidelity: f64,
    seed: u32,
) -> Result<String, dxhog::Error> {
    const BINS: usize = 32;
    const WIDTH: f64 = 0.25;
    let mode = TrialMode::depolarizing(fidelity)?;
    let recs = run_batch(n, trials as u64, &mode, seed as u64)?;
    let s = summarize(&recs)?;
    let mut hist = vec![0u32; BINS];
    for r in &recs {
        let b = ((r.score + 1.0) / WIDTH) as usize;
        if b < BINS {
            hist[b] += 1;
        }
    }
    Ok(json!({
        "mean": s.mean,
        "stderr": s.stderr,
        "k": s.k,
        "bin_width": WIDTH,
        "hist": hist,
    })
    .to_string())
}

/// One random stabilizer measurement in X–H–S–CZ–H form and the state it
/// prepares from `|0…0⟩`.
pub fn stabilizer_json(n: usize, seed: u32) -> Result<String, dxhog::Error> {
    let raw = sample_stabilizer_preparation(n, &mut RandomStream::new(seed as u64))?;
    let tpl = to_measurement_template(&raw);
    let state = tpl.state().canonical_phase()?;
    let amps: Vec<_> = state
        .amps()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 1e-12)
        .map(|(z, a)| json!({"z": format_bitstring(z, n), "re": a.re, "im": a.im}))
        .collect();
    Ok(json!({
        "template": serde_json::to_value(&tpl).expect("template serializes"),
        "support_dim": raw.pivots.len(),
        "amplitudes": amps,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn bound_curves(n: u32, m_max: u32, step: u32) -> Result<String, JsValue> {
    bound_curves_json(n, m_max, step).map_err(js)
}

#[wasm_bindgen]
pub fn xeb_trials(n: usize, trials: u32, fidelity: f64, seed: u32) -> Result<String, JsValue> {
    xeb_trials_json(n, trials, fidelity, seed).map_err(js)
}

#[wasm_bindgen]
pub fn stabilizer(n: usize, seed: u32) -> Result<String, JsValue> {
    stabilizer_json(n, seed).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_have_matching_lengths() {
        let v: serde_json::Value =
            serde_json::from_str(&bound_curves_json(12, 400, 20).unwrap()).unwrap();
        let len = v["m"].as_array().unwrap().len();
        assert_eq!(len, 20);
        for k in ["clifford", "haar", "upper"] {
            assert_eq!(v[k].as_array().unwrap().len(), len);
        }
    }

    #[test]
    fn histogram_counts_most_outcomes() {
        let v: serde_json::Value =
            serde_json::from_str(&xeb_trials_json(6, 400, 1.0, 3).unwrap()).unwrap();
        let total: u64 = v["hist"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_u64().unwrap())
            .sum();
        assert!(total > 380 && total <= 400);
    }

    #[test]
    fn stabilizer_amplitudes_are_flat() {
        let v: serde_json::Value = serde_json::from_str(&stabilizer_json(4, 11).unwrap()).unwrap();
        let k = v["support_dim"].as_u64().unwrap();
        let amps = v["amplitudes"].as_array().unwrap();
        assert_eq!(amps.len(), 1 << k);
        let w = 1.0 / (amps.len() as f64).sqrt();
        for a in amps {
            let (re, im) = (a["re"].as_f64().unwrap(), a["im"].as_f64().unwrap());
            assert!(((re * re + im * im).sqrt() - w).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_fidelity_is_rejected() {
        assert!(xeb_trials_json(4, 10, 1.5, 1).is_err());
    }
}
