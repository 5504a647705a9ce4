//! DXHOG trials, XEB statistics, certification and the classical codebook
//! baseline.
//!
//! Seed schedule for a batch with master seed `s`: instance `i` draws its
//! state from `child(s, 2i)`, its measurement from `child(s, 2i + 1)`, and
//! its noise coin and Born sample from `child(s, 2^32 + i)`.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{sample_haar_state, sample_haar_unitary, MAX_DENSE_QUBITS};
use crate::rng::{child_seed, RandomStream};
use crate::stabilizer::{
    inverse_measurement_circuit, sample_stabilizer_preparation, to_measurement_template,
    MeasurementTemplate,
};
use crate::state::{format_bitstring, inner_product, parse_bitstring, StateVector};
use crate::stats::MeanAcc;
use crate::variational::ParamsFile;

const NOISE_OFFSET: u64 = 1 << 32;

pub fn state_seed(master: u64, index: u64) -> u64 {
    child_seed(master, 2 * index)
}

pub fn meas_seed(master: u64, index: u64) -> u64 {
    child_seed(master, 2 * index + 1)
}

pub fn noise_seed(master: u64, index: u64) -> u64 {
    child_seed(master, NOISE_OFFSET + index)
}

/// Haar target for a state seed.
pub fn target_state(n: usize, seed: u64) -> Result<StateVector> {
    sample_haar_state(n, &mut RandomStream::new(seed))
}

/// Uniformly random Clifford measurement for a measurement seed.
pub fn measurement(n: usize, seed: u64) -> Result<MeasurementTemplate> {
    let raw = sample_stabilizer_preparation(n, &mut RandomStream::new(seed))?;
    Ok(to_measurement_template(&raw))
}

/// One DXHOG input pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub id: u64,
    pub n: usize,
    pub state_seed: u64,
    pub meas_seed: u64,
    pub target: StateVector,
    pub template: MeasurementTemplate,
}

pub fn make_instance(n: usize, master_seed: u64, index: u64) -> Result<Instance> {
    let (ss, ms) = (
        state_seed(master_seed, index),
        meas_seed(master_seed, index),
    );
    Ok(Instance {
        id: index,
        n,
        state_seed: ss,
        meas_seed: ms,
        target: target_state(n, ss)?,
        template: measurement(n, ms)?,
    })
}

/// `ψ` rotated into the measurement basis: amplitude `z` is `⟨z|U|ψ⟩`.
pub fn measured_amplitudes(target: &StateVector, tpl: &MeasurementTemplate) -> Result<StateVector> {
    target.check_same_dim(&StateVector::zero(tpl.n))?;
    let mut rotated = target.clone();
    inverse_measurement_circuit(tpl).apply(&mut rotated)?;
    Ok(rotated)
}

fn score_of(rotated: &StateVector, z: usize) -> f64 {
    rotated.dim() as f64 * rotated.probability(z) - 1.0
}

/// `2^n |⟨z|U|ψ⟩|² - 1` for the template's measurement rotation `U`.
pub fn xeb_score(target: &StateVector, tpl: &MeasurementTemplate, z: usize) -> Result<f64> {
    let rotated = measured_amplitudes(target, tpl)?;
    if z >= rotated.dim() {
        return Err(Error::OutOfRange {
            what: "outcome",
            value: z as f64,
            range: "0..2^n",
        });
    }
    Ok(score_of(&rotated, z))
}

/// A variationally prepared state standing in for the exact target.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzSource {
    pub path: PathBuf,
    pub file: ParamsFile,
    pub prepared: StateVector,
    pub target: StateVector,
}

impl AnsatzSource {
    pub fn load(path: PathBuf) -> Result<Self> {
        let file = ParamsFile::load(&path)?;
        Self::from_file(path, file)
    }

    pub fn from_file(path: PathBuf, file: ParamsFile) -> Result<Self> {
        let prepared = file.state()?;
        let target = target_state(file.n, file.seed)?;
        Ok(Self {
            path,
            file,
            prepared,
            target,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrialMode {
    Ideal,
    /// Outcome-level global depolarizing: the ideal sample with probability
    /// `F`, a uniform bitstring otherwise.
    Depolarizing(f64),
    /// Samples from the prepared state; scores against the exact target.
    Ansatz(Arc<AnsatzSource>),
}

impl TrialMode {
    pub fn depolarizing(f: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::OutOfRange {
                what: "depolarizing fidelity",
                value: f,
                range: "[0, 1]",
            });
        }
        Ok(TrialMode::Depolarizing(f))
    }

    fn keep_probability(&self) -> f64 {
        match self {
            TrialMode::Depolarizing(f) => *f,
            _ => 1.0,
        }
    }
}

impl fmt::Display for TrialMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrialMode::Ideal => f.write_str("ideal"),
            TrialMode::Depolarizing(p) => write!(f, "depolarizing:{p}"),
            TrialMode::Ansatz(src) => write!(f, "ansatz:{}", src.path.display()),
        }
    }
}

impl FromStr for TrialMode {
    type Err = Error;

    /// `ideal`, `depolarizing:F` or `ansatz:path` (loads the params file).
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "ideal" => Ok(TrialMode::Ideal),
            Some(("depolarizing", f)) => {
                let f: f64 = f
                    .parse()
                    .map_err(|_| Error::Malformed(format!("bad depolarizing fidelity {f:?}")))?;
                TrialMode::depolarizing(f)
            }
            Some(("ansatz", path)) if !path.is_empty() => Ok(TrialMode::Ansatz(Arc::new(
                AnsatzSource::load(path.into())?,
            ))),
            _ => Err(Error::Malformed(format!(
                "unknown mode {s:?} (expected ideal, depolarizing:F or ansatz:path)"
            ))),
        }
    }
}

/// One line of a JSONL trial log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub id: u64,
    pub n: usize,
    pub mode: String,
    /// Outcome, qubit `n-1` first.
    pub z: String,
    pub score: f64,
    pub state_seed: u64,
    pub meas_seed: u64,
    pub noise_seed: u64,
}

impl TrialRecord {
    pub fn outcome(&self) -> Result<usize> {
        if self.z.len() != self.n {
            return Err(Error::Malformed(format!(
                "record {}: bitstring {:?} has the wrong length for n = {}",
                self.id, self.z, self.n
            )));
        }
        parse_bitstring(&self.z)
    }
}

/// Runs one trial; `rng` drives the noise coin and the Born sample.
pub fn run_trial(
    instance: &Instance,
    mode: &TrialMode,
    rng: &mut RandomStream,
) -> Result<TrialRecord> {
    let rotated = measured_amplitudes(&instance.target, &instance.template)?;
    // the coin is always drawn so that every mode consumes the stream alike
    let keep = rng.uniform() < mode.keep_probability();
    let z = if keep {
        match mode {
            TrialMode::Ansatz(src) => {
                if src.target != instance.target {
                    return Err(Error::Malformed(
                        "ansatz trials need the params file's target as the instance state".into(),
                    ));
                }
                measured_amplitudes(&src.prepared, &instance.template)?.born_sample(rng)?
            }
            _ => rotated.born_sample(rng)?,
        }
    } else {
        rng.below(instance.target.dim() as u64) as usize
    };
    Ok(TrialRecord {
        id: instance.id,
        n: instance.n,
        mode: mode.to_string(),
        z: format_bitstring(z, instance.n),
        score: score_of(&rotated, z),
        state_seed: instance.state_seed,
        meas_seed: instance.meas_seed,
        noise_seed: rng.seed(),
    })
}

/// Instance `index` of a batch; ansatz mode pins the state to the params
/// file's target.
pub fn batch_instance(
    n: usize,
    mode: &TrialMode,
    master_seed: u64,
    index: u64,
) -> Result<Instance> {
    match mode {
        TrialMode::Ansatz(src) => {
            if src.file.n != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: src.file.n,
                });
            }
            let ms = meas_seed(master_seed, index);
            Ok(Instance {
                id: index,
                n,
                state_seed: src.file.seed,
                meas_seed: ms,
                target: src.target.clone(),
                template: measurement(n, ms)?,
            })
        }
        _ => make_instance(n, master_seed, index),
    }
}

/// Runs `trials` trials in parallel; records come back in index order and are
/// identical for any thread count.
pub fn run_batch(
    n: usize,
    trials: u64,
    mode: &TrialMode,
    master_seed: u64,
) -> Result<Vec<TrialRecord>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let inst = batch_instance(n, mode, master_seed, i)?;
            run_trial(
                &inst,
                mode,
                &mut RandomStream::new(noise_seed(master_seed, i)),
            )
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XebSummary {
    pub k: u64,
    pub mean: f64,
    /// Sample standard deviation (k - 1 divisor) over `√k`.
    pub stderr: f64,
}

pub fn summarize_scores(scores: impl IntoIterator<Item = f64>) -> Result<XebSummary> {
    let acc: MeanAcc = scores.into_iter().collect();
    if acc.count() < 2 {
        return Err(Error::TooFewRecords(acc.count() as usize));
    }
    Ok(XebSummary {
        k: acc.count(),
        mean: acc.mean(),
        stderr: acc.stderr(),
    })
}

pub fn summarize(records: &[TrialRecord]) -> Result<XebSummary> {
    summarize_scores(records.iter().map(|r| r.score))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certification {
    pub pass: bool,
    /// `mean - k_sigma·stderr - target`.
    pub margin: f64,
}

/// Passes iff `mean - k_sigma·stderr ≥ target_eps`.
pub fn certify(summary: &XebSummary, target_eps: f64, k_sigma: f64) -> Result<Certification> {
    if !(k_sigma > 0.0) {
        return Err(Error::OutOfRange {
            what: "k_sigma",
            value: k_sigma,
            range: "(0, ∞)",
        });
    }
    let lower = summary.mean - k_sigma * summary.stderr;
    Ok(Certification {
        pass: lower >= target_eps,
        margin: lower - target_eps,
    })
}

pub fn write_jsonl<W: Write>(mut w: W, records: &[TrialRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Malformed(format!("line {}: {e}", i + 1)))?,
        );
    }
    Ok(out)
}

/// Outcome of replaying a record from its seeds.
#[derive(Clone, Debug, PartialEq)]
pub enum Replay {
    Match,
    /// Recomputed score differs.
    Score {
        expected: f64,
        got: f64,
    },
    /// Recomputed outcome differs (ideal and depolarizing modes only).
    Outcome {
        expected: String,
        got: String,
    },
}

/// Recomputes a record's score (and, where the mode allows, its outcome) from
/// the logged seeds. `tolerance` 0 demands bit equality.
pub fn replay(record: &TrialRecord, tolerance: f64) -> Result<Replay> {
    let z = record.outcome()?;
    let target = target_state(record.n, record.state_seed)?;
    let template = measurement(record.n, record.meas_seed)?;
    let got = xeb_score(&target, &template, z)?;
    let same = if tolerance == 0.0 {
        got.to_bits() == record.score.to_bits()
    } else {
        (got - record.score).abs() <= tolerance
    };
    if !same {
        return Ok(Replay::Score {
            expected: record.score,
            got,
        });
    }
    let mode = match record.mode.split_once(':') {
        None if record.mode == "ideal" => Some(TrialMode::Ideal),
        Some(("depolarizing", _)) => Some(record.mode.parse()?),
        _ => None,
    };
    if let Some(mode) = mode {
        let inst = Instance {
            id: record.id,
            n: record.n,
            state_seed: record.state_seed,
            meas_seed: record.meas_seed,
            target,
            template,
        };
        let again = run_trial(&inst, &mode, &mut RandomStream::new(record.noise_seed))?;
        if again.z != record.z {
            return Ok(Replay::Outcome {
                expected: record.z.clone(),
                got: again.z,
            });
        }
    }
    Ok(Replay::Match)
}

/// `2^m` independent Haar states.
pub fn build_codebook(n: usize, m: u32, rng: &mut RandomStream) -> Result<Vec<StateVector>> {
    if n > MAX_DENSE_QUBITS || m > 20 {
        return Err(Error::OutOfRange {
            what: "codebook size",
            value: m as f64,
            range: "n ≤ 6 and m ≤ 20",
        });
    }
    (0..1u64 << m).map(|_| sample_haar_state(n, rng)).collect()
}

/// Result of one codebook round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpoofOutcome {
    /// Alice's message.
    pub x: usize,
    /// `max_x |⟨φ_x|ψ⟩|²`.
    pub overlap: f64,
    pub z: usize,
    pub score: f64,
}

fn to_dvector(s: &StateVector) -> DVector<C64> {
    DVector::from_column_slice(s.amps())
}

/// Alice names the codebook state closest to `ψ`; Bob outputs the most likely
/// outcome of measuring that state with `U`; the result is scored on `ψ`.
pub fn spoof_trial(
    codebook: &[StateVector],
    target: &StateVector,
    u: &DMatrix<C64>,
) -> Result<SpoofOutcome> {
    let mut best = (0, -1.0);
    for (x, phi) in codebook.iter().enumerate() {
        let o = inner_product(phi, target)?.norm_sqr();
        if o > best.1 {
            best = (x, o);
        }
    }
    let (x, overlap) = best;
    let phi = codebook
        .get(x)
        .ok_or_else(|| Error::Malformed("empty codebook".into()))?;
    if u.nrows() != phi.dim() || u.ncols() != phi.dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.n(),
            got: u.nrows().trailing_zeros() as usize,
        });
    }
    let bob = u * to_dvector(phi);
    let z = bob
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .map(|(z, _)| z)
        .expect("nonempty");
    let amp = (u.row(z) * to_dvector(target))[(0, 0)];
    Ok(SpoofOutcome {
        x,
        overlap,
        z,
        score: target.dim() as f64 * amp.norm_sqr() - 1.0,
    })
}

/// Codebook protocol where both parties first apply a shared random `V`:
/// Alice encodes `Vψ`, Bob measures with `U V†`.
pub fn spoof_trial_rerandomized(
    codebook: &[StateVector],
    target: &StateVector,
    u: &DMatrix<C64>,
    v: &DMatrix<C64>,
) -> Result<SpoofOutcome> {
    let moved = StateVector::from_amps((v * to_dvector(target)).as_slice().to_vec())?;
    let bob = u * v.adjoint();
    let mut out = spoof_trial(codebook, &moved, &bob)?;
    // the score is unchanged by V: ⟨z|U V†|Vψ⟩ = ⟨z|U|ψ⟩
    let amp = (u.row(out.z) * to_dvector(target))[(0, 0)];
    out.score = target.dim() as f64 * amp.norm_sqr() - 1.0;
    Ok(out)
}

/// `trials` codebook rounds with fresh codebook, state and Haar measurement
/// per round (children `3t`, `3t+1`, `3t+2` of `master_seed`).
pub fn run_spoof(n: usize, m: u32, trials: u64, master_seed: u64) -> Result<Vec<SpoofOutcome>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let codebook = build_codebook(n, m, &mut RandomStream::child(master_seed, 3 * t))?;
            let psi = sample_haar_state(n, &mut RandomStream::child(master_seed, 3 * t + 1))?;
            let u = sample_haar_unitary(n, &mut RandomStream::child(master_seed, 3 * t + 2))?;
            spoof_trial(&codebook, &psi, &u)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::ub_eps_exact;
    use crate::special::harmonic;

    fn within(s: &XebSummary, expected: f64, sigmas: f64) -> bool {
        (s.mean - expected).abs() <= sigmas * s.stderr
    }

    #[test]
    fn instances_are_deterministic() {
        let a = make_instance(5, 11, 3).unwrap();
        let b = make_instance(5, 11, 3).unwrap();
        assert_eq!(a, b);
        let c = make_instance(5, 11, 4).unwrap();
        assert_ne!(a.target, c.target);
        assert_ne!(a.state_seed, a.meas_seed);
    }

    #[test]
    fn score_of_trivial_instance() {
        let tpl = MeasurementTemplate {
            n: 1,
            pivots: vec![],
            x_mask: vec![],
            s_mask: vec![],
            cz_edges: vec![],
            final_h: vec![0],
        };
        // |0⟩ is the template state, so the rotation maps it back to |0⟩
        assert!((tpl.state().probability(0) - 1.0).abs() < 1e-12);
        assert!((xeb_score(&StateVector::zero(1), &tpl, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!((xeb_score(&StateVector::zero(1), &tpl, 1).unwrap() + 1.0).abs() < 1e-12);
        assert!(xeb_score(&StateVector::zero(2), &tpl, 0).is_err());
    }

    #[test]
    fn uniform_outcomes_average_zero() {
        let inst = make_instance(4, 1, 0).unwrap();
        let mean: f64 = (0..16)
            .map(|z| xeb_score(&inst.target, &inst.template, z).unwrap())
            .sum::<f64>()
            / 16.0;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn full_fidelity_depolarizing_equals_ideal() {
        let inst = make_instance(6, 2, 9).unwrap();
        let a = run_trial(&inst, &TrialMode::Ideal, &mut RandomStream::new(5)).unwrap();
        let b = run_trial(
            &inst,
            &TrialMode::Depolarizing(1.0),
            &mut RandomStream::new(5),
        )
        .unwrap();
        assert_eq!(a.z, b.z);
        assert_eq!(a.score.to_bits(), b.score.to_bits());
    }

    #[test]
    fn ideal_mean_matches_two_design_value() {
        for n in [4usize, 8] {
            let recs = run_batch(n, 20_000, &TrialMode::Ideal, 17).unwrap();
            let s = summarize(&recs).unwrap();
            let big = (1u64 << n) as f64;
            assert!(within(&s, (big - 1.0) / (big + 1.0), 3.0), "n={n} {s:?}");
        }
    }

    #[test]
    fn fully_depolarized_mean_is_zero() {
        let recs = run_batch(3, 100_000, &TrialMode::Depolarizing(0.0), 3).unwrap();
        let s = summarize(&recs).unwrap();
        assert!(within(&s, 0.0, 3.0), "{s:?}");
    }

    #[test]
    fn depolarizing_is_linear() {
        let n = 5;
        let ideal = (31.0) / (33.0);
        for f in [0.25, 0.5, 0.427] {
            let recs = run_batch(n, 40_000, &TrialMode::Depolarizing(f), 23).unwrap();
            let s = summarize(&recs).unwrap();
            assert!(within(&s, f * ideal, 3.0), "F={f} {s:?}");
        }
    }

    #[test]
    fn score_streams_are_uncorrelated() {
        let recs = run_batch(3, 10_001, &TrialMode::Ideal, 8).unwrap();
        let s: Vec<f64> = recs.iter().map(|r| r.score).collect();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / s.len() as f64;
        let cov = s
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum::<f64>()
            / (s.len() - 1) as f64;
        let corr = cov / var;
        assert!(corr.abs() < 3.0 / (10_000f64).sqrt(), "{corr}");
    }

    #[test]
    fn summary_arithmetic() {
        let s = summarize_scores([1.0, 0.0, -1.0]).unwrap();
        assert_eq!(s.k, 3);
        assert!(s.mean.abs() < 1e-15);
        assert!((s.stderr - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let c = summarize_scores([0.5; 10]).unwrap();
        assert_eq!(c.stderr, 0.0);
        assert!(matches!(
            summarize_scores([1.0]),
            Err(Error::TooFewRecords(1))
        ));
    }

    #[test]
    fn certification_boundary() {
        let s = XebSummary {
            k: 10_000,
            mean: 0.427,
            stderr: 0.013,
        };
        let c = certify(&s, 0.362, 5.0).unwrap();
        assert!(c.pass);
        assert!(c.margin.abs() < 1e-12);
        assert!(!certify(&s, 0.363, 5.0).unwrap().pass);
        assert!(certify(&s, 0.3, 0.0).is_err());
    }

    #[test]
    fn records_replay_bit_exactly() {
        let recs = run_batch(6, 200, &TrialMode::Depolarizing(0.6), 99).unwrap();
        for r in &recs {
            assert_eq!(replay(r, 0.0).unwrap(), Replay::Match);
        }
        let mut bad = recs[0].clone();
        bad.score = f64::from_bits(bad.score.to_bits() + 1);
        assert!(matches!(replay(&bad, 0.0).unwrap(), Replay::Score { .. }));
    }

    #[test]
    fn jsonl_round_trip_and_thread_independence() {
        let recs = run_batch(4, 50, &TrialMode::Ideal, 1).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &recs).unwrap();
        assert_eq!(read_jsonl(&buf[..]).unwrap(), recs);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let again = single.install(|| run_batch(4, 50, &TrialMode::Ideal, 1).unwrap());
        assert_eq!(again, recs);
        let line = String::from_utf8(buf).unwrap();
        let first = line.lines().next().unwrap();
        assert!(first.starts_with("{\"id\":0,\"n\":4,\"mode\":\"ideal\",\"z\":\""));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("ideal".parse::<TrialMode>().unwrap(), TrialMode::Ideal);
        assert_eq!(
            "depolarizing:0.427".parse::<TrialMode>().unwrap(),
            TrialMode::Depolarizing(0.427)
        );
        assert!("depolarizing:1.5".parse::<TrialMode>().is_err());
        assert!("ansatz:/nonexistent/params.json"
            .parse::<TrialMode>()
            .is_err());
        assert!("noisy".parse::<TrialMode>().is_err());
        assert_eq!(TrialMode::Depolarizing(0.5).to_string(), "depolarizing:0.5");
    }

    #[test]
    fn codebook_shapes() {
        let mut rng = RandomStream::new(4);
        assert_eq!(build_codebook(3, 0, &mut rng).unwrap().len(), 1);
        let book = build_codebook(2, 4, &mut rng).unwrap();
        assert_eq!(book.len(), 16);
        for i in 0..book.len() {
            for j in 0..i {
                assert!(inner_product(&book[i], &book[j]).unwrap().norm_sqr() < 1.0 - 1e-9);
            }
        }
        assert!(build_codebook(7, 1, &mut rng).is_err());
        assert!(build_codebook(3, 21, &mut rng).is_err());
    }

    #[test]
    fn best_codebook_overlap_matches_order_statistic() {
        let (n, m) = (3usize, 4u32);
        let mut acc = MeanAcc::default();
        for t in 0..20_000u64 {
            let book = build_codebook(n, m, &mut RandomStream::child(5, 2 * t)).unwrap();
            let psi = sample_haar_state(n, &mut RandomStream::child(5, 2 * t + 1)).unwrap();
            let best = book
                .iter()
                .map(|phi| inner_product(phi, &psi).unwrap().norm_sqr())
                .fold(0.0, f64::max);
            acc.push(best);
        }
        let integral =
            crate::special::integrate(|u| (1.0 - u.powi(7)).powi(16), 0.0, 1.0, &[], 1e-12);
        let expected = 1.0 - integral;
        assert!(
            (acc.mean() - expected).abs() <= 3.0 * acc.stderr(),
            "{} vs {expected}",
            acc.mean()
        );
    }

    #[test]
    fn planted_codebook_reaches_harmonic_ceiling() {
        let n = 3;
        let mut acc = MeanAcc::default();
        for t in 0..20_000u64 {
            let mut rng = RandomStream::child(6, t);
            let psi = sample_haar_state(n, &mut rng).unwrap();
            let mut book = build_codebook(n, 2, &mut rng).unwrap();
            book[1] = psi.clone();
            let u = sample_haar_unitary(n, &mut rng).unwrap();
            let out = spoof_trial(&book, &psi, &u).unwrap();
            assert_eq!(out.x, 1);
            acc.push(out.score);
        }
        let expected = harmonic(8) - 1.0;
        assert!(
            (acc.mean() - expected).abs() <= 3.0 * acc.stderr(),
            "{} vs {expected}",
            acc.mean()
        );
    }

    #[test]
    fn single_state_codebook_is_a_guess() {
        let outs = run_spoof(3, 0, 20_000, 12).unwrap();
        let s = summarize_scores(outs.iter().map(|o| o.score)).unwrap();
        assert!((ub_eps_exact(3, 0.0)).abs() < 1e-9);
        assert!(within(&s, 0.0, 3.0), "{s:?}");
    }

    #[test]
    fn rerandomization_leaves_the_mean_unchanged() {
        let (n, m) = (3usize, 3u32);
        let mut plain = MeanAcc::default();
        let mut shared = MeanAcc::default();
        for t in 0..10_000u64 {
            let mut rng = RandomStream::child(13, t);
            let book = build_codebook(n, m, &mut rng).unwrap();
            let psi = sample_haar_state(n, &mut rng).unwrap();
            let u = sample_haar_unitary(n, &mut rng).unwrap();
            let v = sample_haar_unitary(n, &mut rng).unwrap();
            plain.push(spoof_trial(&book, &psi, &u).unwrap().score);
            shared.push(spoof_trial_rerandomized(&book, &psi, &u, &v).unwrap().score);
        }
        let diff = plain.mean() - shared.mean();
        let se = (plain.variance() / 1e4 + shared.variance() / 1e4).sqrt();
        assert!(diff.abs() <= 3.0 * se, "{diff} vs {se}");
        let expected = ub_eps_exact(3, m as f64);
        assert!((shared.mean() - expected).abs() <= 3.0 * shared.stderr());
    }
}
