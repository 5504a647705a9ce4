//! Uniform random stabilizer states as short layered circuits.
//!
//! Sampling follows the support-first construction: pick the dimension of the
//! support subspace, a uniform subspace in reduced row echelon form, spread a
//! uniform superposition over it with H and CNOT layers, then randomize the
//! affine shift (X), the imaginary phase (S), the linear phase (Z) and the
//! quadratic phase (CZ). [`to_measurement_template`] rewrites the result into
//! the fixed X–H–S–CZ–H form used to drive measurements, and
//! [`inverse_measurement_circuit`] gives the basis rotation that precedes a
//! computational-basis readout.

use std::collections::HashSet;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::gf2::BitMatrix;
use crate::rng::RandomStream;
use crate::state::StateVector;

/// Grid used when hashing phase-canonical stabilizer amplitudes.
pub const KEY_GRID: f64 = 1e-6;

/// Generator matrix of a subspace of F₂ⁿ in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RrefMatrix {
    pub n: usize,
    pub bits: BitMatrix,
    pub pivots: Vec<usize>,
}

impl RrefMatrix {
    pub fn k(&self) -> usize {
        self.pivots.len()
    }
}

/// Output of the support-first sampler, gate layers in the order
/// H(T) → CNOT → X → S → Z → CZ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawStabilizerCircuit {
    pub n: usize,
    /// Pivot set `T`; `|T|` is the support dimension.
    pub pivots: Vec<usize>,
    /// `(control ∈ T, target ∉ T)`.
    pub cnot_edges: Vec<(usize, usize)>,
    pub x_mask: Vec<usize>,
    pub s_mask: Vec<usize>,
    pub z_mask: Vec<usize>,
    pub cz_edges: Vec<(usize, usize)>,
}

/// Stabilizer preparation in X–H–S–CZ–H form. Serialized as the measurement
/// description recorded in trial logs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementTemplate {
    pub n: usize,
    pub pivots: Vec<usize>,
    pub x_mask: Vec<usize>,
    pub s_mask: Vec<usize>,
    pub cz_edges: Vec<[usize; 2]>,
    pub final_h: Vec<usize>,
}

/// Unnormalized support-codimension weights `η(0..=n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportDimWeights {
    pub n: usize,
    pub eta: Vec<f64>,
}

impl SupportDimWeights {
    pub fn new(n: usize) -> Self {
        let eta = (0..=n).map(|d| eta_unchecked(n, d)).collect();
        Self { n, eta }
    }

    pub fn total(&self) -> f64 {
        self.eta.iter().sum()
    }

    /// Probability that a uniform stabilizer state has support dimension `k`.
    pub fn support_dim_probability(&self, k: usize) -> f64 {
        self.eta[self.n - k] / self.total()
    }
}

fn eta_unchecked(n: usize, d: usize) -> f64 {
    let mut v = 0.5f64.powf((d * (d + 1)) as f64 / 2.0);
    for a in 1..=d {
        let num = 1.0 - 2f64.powi(d as i32 - n as i32 - a as i32);
        let den = 1.0 - 2f64.powi(-(a as i32));
        v *= num / den;
    }
    v
}

/// `η(d) = 2^{-d(d+1)/2} Π_{a=1..d} (1 - 2^{d-n-a}) / (1 - 2^{-a})`.
pub fn eta(n: usize, d: usize) -> Result<f64> {
    if d > n {
        return Err(Error::OutOfRange {
            what: "support codimension",
            value: d as f64,
            range: "0..=n",
        });
    }
    Ok(eta_unchecked(n, d))
}

/// Support dimension `k` of a uniform stabilizer state.
///
/// The weights `η(d)` describe the codimension `d = n - k`: at `n = 1` they
/// are `(1, 1/2)` while four of the six single-qubit stabilizer states have
/// full support.
pub fn sample_support_dim(n: usize, rng: &mut RandomStream) -> usize {
    let w = SupportDimWeights::new(n);
    let mut u = rng.uniform() * w.total();
    for (d, &e) in w.eta.iter().enumerate() {
        if u < e {
            return n - d;
        }
        u -= e;
    }
    0
}

/// Uniform `k`-dimensional subspace of F₂ⁿ: rejection-sample a full-rank
/// `k × n` matrix and reduce it.
pub fn sample_rref_subspace(n: usize, k: usize, rng: &mut RandomStream) -> Result<RrefMatrix> {
    if k > n || n > 64 {
        return Err(Error::OutOfRange {
            what: "subspace dimension",
            value: k as f64,
            range: "0..=n",
        });
    }
    loop {
        let m = BitMatrix::random(k, n, rng);
        let (bits, pivots) = m.rref();
        if pivots.len() == k {
            return Ok(RrefMatrix { n, bits, pivots });
        }
    }
}

fn complement(n: usize, set: &[usize]) -> Vec<usize> {
    (0..n).filter(|q| !set.contains(q)).collect()
}

/// Draws a uniformly random stabilizer state as a layered preparation circuit.
pub fn sample_stabilizer_preparation(
    n: usize,
    rng: &mut RandomStream,
) -> Result<RawStabilizerCircuit> {
    if n == 0 || n > 64 {
        return Err(Error::OutOfRange {
            what: "qubit count",
            value: n as f64,
            range: "1..=64",
        });
    }
    let k = sample_support_dim(n, rng);
    let rref = sample_rref_subspace(n, k, rng)?;
    let pivots = rref.pivots.clone();
    let mut cnot_edges = Vec::new();
    for (row, &i) in pivots.iter().enumerate() {
        for j in i + 1..n {
            if rref.bits.get(row, j) {
                cnot_edges.push((i, j));
            }
        }
    }
    let rest = complement(n, &pivots);
    let x_mask = rest.iter().copied().filter(|_| rng.coin()).collect();
    let s_mask = pivots.iter().copied().filter(|_| rng.coin()).collect();
    let z_mask = pivots.iter().copied().filter(|_| rng.coin()).collect();
    let mut cz_edges = Vec::new();
    for (a, &i) in pivots.iter().enumerate() {
        for &j in &pivots[a + 1..] {
            if rng.coin() {
                cz_edges.push((i, j));
            }
        }
    }
    Ok(RawStabilizerCircuit {
        n,
        pivots,
        cnot_edges,
        x_mask,
        s_mask,
        z_mask,
        cz_edges,
    })
}

impl RawStabilizerCircuit {
    pub fn circuit(&self) -> Circuit {
        let mut ops = Vec::new();
        ops.extend(self.pivots.iter().map(|&q| Gate::H(q)));
        ops.extend(
            self.cnot_edges
                .iter()
                .map(|&(control, target)| Gate::CNOT { control, target }),
        );
        ops.extend(self.x_mask.iter().map(|&q| Gate::X(q)));
        ops.extend(self.s_mask.iter().map(|&q| Gate::S(q)));
        ops.extend(self.z_mask.iter().map(|&q| Gate::Z(q)));
        ops.extend(self.cz_edges.iter().map(|&(a, b)| Gate::CZ(a, b)));
        Circuit::from_ops(self.n, ops).expect("sampler emits in-range gates")
    }

    pub fn state(&self) -> StateVector {
        let mut s = StateVector::zero(self.n);
        self.circuit().apply(&mut s).expect("matching register");
        s
    }
}

/// Rewrites a sampled circuit into X–H–S–CZ–H form.
///
/// The X layer commutes to the front (it avoids `T` and the CNOT controls);
/// `Z` on `T` passes through `H` as `X`; each CNOT becomes a CZ conjugated by
/// H on its target, and the diagonal S and CZ layers merge.
pub fn to_measurement_template(raw: &RawStabilizerCircuit) -> MeasurementTemplate {
    let mut x_mask: Vec<usize> = raw.x_mask.iter().chain(&raw.z_mask).copied().collect();
    x_mask.sort_unstable();
    let mut cz_edges: Vec<[usize; 2]> = raw
        .cnot_edges
        .iter()
        .chain(&raw.cz_edges)
        .map(|&(a, b)| [a.min(b), a.max(b)])
        .collect();
    cz_edges.sort_unstable();
    MeasurementTemplate {
        n: raw.n,
        pivots: raw.pivots.clone(),
        x_mask,
        s_mask: raw.s_mask.clone(),
        cz_edges,
        final_h: complement(raw.n, &raw.pivots),
    }
}

impl MeasurementTemplate {
    /// Checks the structural invariants of the X–H–S–CZ–H form.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let bad = |msg: String| Err(Error::Malformed(msg));
        if n == 0 || n > 64 {
            return bad(format!("template on {n} qubits"));
        }
        let in_range = |v: &[usize]| v.iter().all(|&q| q < n);
        let strictly_sorted = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        for (name, v) in [
            ("pivots", &self.pivots),
            ("x_mask", &self.x_mask),
            ("s_mask", &self.s_mask),
            ("final_h", &self.final_h),
        ] {
            if !in_range(v) || !strictly_sorted(v) {
                return bad(format!("{name} must be sorted, distinct and below {n}"));
            }
        }
        if !self.s_mask.iter().all(|q| self.pivots.contains(q)) {
            return bad("s_mask must lie within the pivots".into());
        }
        if self.final_h != complement(n, &self.pivots) {
            return bad("final_h must be the complement of the pivots".into());
        }
        let mut seen = HashSet::new();
        for &[a, b] in &self.cz_edges {
            if a >= n || b >= n || a == b || !seen.insert((a.min(b), a.max(b))) {
                return bad(format!("bad cz edge [{a}, {b}]"));
            }
            if !self.pivots.contains(&a) && !self.pivots.contains(&b) {
                return bad(format!("cz edge [{a}, {b}] lies outside the pivots"));
            }
        }
        Ok(())
    }

    /// X(x_mask) → H(all) → S(s_mask) → CZ(edges) → H(final_h).
    pub fn circuit(&self) -> Circuit {
        let mut ops = Vec::new();
        ops.extend(self.x_mask.iter().map(|&q| Gate::X(q)));
        ops.extend((0..self.n).map(Gate::H));
        ops.extend(self.s_mask.iter().map(|&q| Gate::S(q)));
        ops.extend(self.cz_edges.iter().map(|&[a, b]| Gate::CZ(a, b)));
        ops.extend(self.final_h.iter().map(|&q| Gate::H(q)));
        Circuit::from_ops(self.n, ops).expect("validated template")
    }

    pub fn state(&self) -> StateVector {
        let mut s = StateVector::zero(self.n);
        self.circuit().apply(&mut s).expect("matching register");
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("template serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: MeasurementTemplate = serde_json::from_str(s)?;
        t.validate()?;
        Ok(t)
    }
}

/// Basis rotation for measuring in the template's stabilizer basis:
/// H(final_h) → CZ → S†(s_mask) → H(all) → X(x_mask).
pub fn inverse_measurement_circuit(tpl: &MeasurementTemplate) -> Circuit {
    let mut ops = Vec::new();
    ops.extend(tpl.final_h.iter().map(|&q| Gate::H(q)));
    ops.extend(tpl.cz_edges.iter().map(|&[a, b]| Gate::CZ(a, b)));
    ops.extend(tpl.s_mask.iter().map(|&q| Gate::Sdg(q)));
    ops.extend((0..tpl.n).map(Gate::H));
    ops.extend(tpl.x_mask.iter().map(|&q| Gate::X(q)));
    Circuit::from_ops(tpl.n, ops).expect("validated template")
}

/// Number of `n`-qubit stabilizer states, summed over support dimensions.
pub fn stabilizer_count(n: usize) -> Result<u128> {
    if n == 0 || n > 10 {
        return Err(Error::OutOfRange {
            what: "qubit count for exact stabilizer counting",
            value: n as f64,
            range: "1..=10",
        });
    }
    let mut total = 0u128;
    for k in 0..=n {
        // number of k-dimensional subspaces, exactly
        let mut num = 1u128;
        let mut den = 1u128;
        for i in 0..k {
            num *= (1u128 << (n - i)) - 1;
            den *= (1u128 << (i + 1)) - 1;
        }
        let affine = (num / den) << (n - k);
        total += affine << (2 * k + k * k.saturating_sub(1) / 2);
    }
    Ok(total)
}

/// Every `n`-qubit stabilizer state (`n ≤ 3`), phase-canonical, built from the
/// affine-support canonical form `Σ_{x ∈ y+V} (-1)^{q(x)} i^{ℓ(x)} |x⟩`.
pub fn enumerate_stabilizer_states(n: usize) -> Result<Vec<StateVector>> {
    if n == 0 || n > 3 {
        return Err(Error::OutOfRange {
            what: "qubit count for stabilizer enumeration",
            value: n as f64,
            range: "1..=3",
        });
    }
    let dim = 1usize << n;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for subset in 0u64..1u64 << dim {
        // subspaces as closed subsets of F₂ⁿ containing 0
        if subset & 1 == 0 {
            continue;
        }
        let members: Vec<usize> = (0..dim).filter(|&v| subset >> v & 1 == 1).collect();
        let closed = members
            .iter()
            .all(|&a| members.iter().all(|&b| subset >> (a ^ b) & 1 == 1));
        if !closed {
            continue;
        }
        let (basis, _) = BitMatrix::new(n, members.iter().map(|&v| v as u64).collect()).rref();
        let basis: Vec<usize> = basis.rows().iter().map(|&r| r as usize).collect();
        let k = basis.len();
        let mut shifts = HashSet::new();
        for y in 0..dim {
            let rep = members.iter().map(|&v| v ^ y).min().expect("nonempty");
            if !shifts.insert(rep) {
                continue;
            }
            let pairs: Vec<(usize, usize)> = (0..k)
                .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
                .collect();
            for lin_i in 0..1usize << k {
                for lin_z in 0..1usize << k {
                    for quad in 0..1usize << pairs.len() {
                        let mut amps = vec![C64::new(0.0, 0.0); dim];
                        for c in 0..1usize << k {
                            let x = (0..k)
                                .filter(|i| c >> i & 1 == 1)
                                .fold(y, |acc, i| acc ^ basis[i]);
                            let i_pow = (c & lin_i).count_ones();
                            let mut sign = (c & lin_z).count_ones();
                            for (p, &(i, j)) in pairs.iter().enumerate() {
                                if quad >> p & 1 == 1 && c >> i & 1 == 1 && c >> j & 1 == 1 {
                                    sign += 1;
                                }
                            }
                            let phase = match (i_pow + 2 * sign) % 4 {
                                0 => C64::new(1.0, 0.0),
                                1 => C64::new(0.0, 1.0),
                                2 => C64::new(-1.0, 0.0),
                                _ => C64::new(0.0, -1.0),
                            };
                            amps[x] = phase;
                        }
                        let s = StateVector::from_amps(amps)?
                            .normalized()?
                            .canonical_phase()?;
                        if seen.insert(s.canonical_key(KEY_GRID)?) {
                            out.push(s);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
