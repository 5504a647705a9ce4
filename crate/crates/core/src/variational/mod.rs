//! Brickwork variational state preparation under a gate-counting noise model.
//!
//! The ansatz alternates a layer of `U3` gates on every qubit with a layer of
//! nearest-neighbor `ZZ(θ)` gates on a ring; `d` ZZ layers are bracketed by
//! `d + 1` U3 layers. The objective is
//! `F(θ) = |⟨ψ|C(θ)|0ⁿ⟩|² · Π_i (1 - 5/4 ε_2Q(θ_i) - 3 ε_mem)` with
//! `ε_2Q(θ) = c_slope |θ| + c_offset` over the ZZ angles.

pub mod lbfgs;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{apply_1q, apply_zz, phase_pi, u3_matrix, zz_phases, Gate, Mat2};
use crate::haar::sample_haar_su2_angles;
use crate::rng::RandomStream;
use crate::state::{inner_product, StateVector, MAX_QUBITS};

pub use lbfgs::{LbfgsOptions, Stop};

/// Two-qubit infidelity model constants (dimensionless; angles in π units).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConstants {
    pub c_slope: f64,
    pub c_offset: f64,
    pub eps_mem: f64,
}

impl Default for NoiseConstants {
    fn default() -> Self {
        Self {
            c_slope: 14.8e-4,
            c_offset: 2.7e-4,
            eps_mem: 8e-5,
        }
    }
}

impl NoiseConstants {
    pub const ZERO: NoiseConstants = NoiseConstants {
        c_slope: 0.0,
        c_offset: 0.0,
        eps_mem: 0.0,
    };

    /// Constants must be nonnegative and keep every per-gate factor positive.
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [
            ("noise.c_slope", self.c_slope),
            ("noise.c_offset", self.c_offset),
            ("noise.eps_mem", self.eps_mem),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::OutOfRange {
                    what,
                    value: v,
                    range: "[0, ∞)",
                });
            }
        }
        let worst = self.gate_factor(0.5);
        if !(worst > 0.0) {
            return Err(Error::OutOfRange {
                what: "worst-case ZZ fidelity factor",
                value: worst,
                range: "(0, 1]",
            });
        }
        Ok(())
    }

    /// `ε_2Q(θ) = c_slope |θ| + c_offset` at the effective angle.
    pub fn two_qubit_error(&self, theta: f64) -> f64 {
        self.c_slope * effective_angle(theta) + self.c_offset
    }

    /// `1 - 5/4 ε_2Q(θ) - 3 ε_mem`.
    pub fn gate_factor(&self, theta: f64) -> f64 {
        1.0 - 1.25 * self.two_qubit_error(theta) - 3.0 * self.eps_mem
    }
}

/// Wraps an angle to `[-1, 1)` (π units).
pub fn wrap_angle(theta: f64) -> f64 {
    (theta + 1.0).rem_euclid(2.0) - 1.0
}

/// `|θ|` folded to `[0, 1/2]`: `ZZ(θ ± 1)` differs from `ZZ(θ)` only by
/// single-qubit `Z` gates, which the neighboring U3 layer absorbs.
pub fn effective_angle(theta: f64) -> f64 {
    let w = wrap_angle(theta).abs();
    w.min(1.0 - w)
}

/// `d/dθ` of [`effective_angle`], with subgradient 0 at the kinks.
fn effective_angle_slope(theta: f64) -> f64 {
    let w = wrap_angle(theta);
    let a = w.abs();
    if w == 0.0 || a == 0.5 {
        0.0
    } else if a < 0.5 {
        w.signum()
    } else {
        -w.signum()
    }
}

/// One parameterized gate of the ansatz and the offset of its first angle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    U3 { qubit: usize, offset: usize },
    ZZ { a: usize, b: usize, offset: usize },
}

/// Periodic brickwork layout; gates are stored in application order and each
/// takes its angles from consecutive parameter slots (`θ, φ, λ` for U3).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzLayout {
    n: usize,
    depth: usize,
    slots: Vec<Slot>,
    n_params: usize,
}

/// ZZ pairs of brickwork layer `layer` on an `n`-qubit ring.
pub fn brickwork_pairs(n: usize, layer: usize) -> Vec<(usize, usize)> {
    let shift = layer % 2;
    (0..n / 2)
        .map(|k| ((2 * k + shift) % n, (2 * k + 1 + shift) % n))
        .collect()
}

pub fn build_layout(n: usize, depth: usize) -> Result<AnsatzLayout> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::OddQubitCount(n));
    }
    if n > MAX_QUBITS {
        return Err(Error::OutOfRange {
            what: "qubit count",
            value: n as f64,
            range: "2..=20",
        });
    }
    if depth == 0 {
        return Err(Error::OutOfRange {
            what: "ansatz depth",
            value: 0.0,
            range: "1..",
        });
    }
    let mut slots = Vec::with_capacity(n * (depth + 1) + n / 2 * depth);
    let mut offset = 0;
    for layer in 0..=depth {
        for qubit in 0..n {
            slots.push(Slot::U3 { qubit, offset });
            offset += 3;
        }
        if layer < depth {
            for (a, b) in brickwork_pairs(n, layer) {
                slots.push(Slot::ZZ { a, b, offset });
                offset += 1;
            }
        }
    }
    Ok(AnsatzLayout {
        n,
        depth,
        slots,
        n_params: offset,
    })
}

impl AnsatzLayout {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn zz_count(&self) -> usize {
        self.n / 2 * self.depth
    }

    /// Parameter indices of the ZZ angles.
    pub fn zz_offsets(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().filter_map(|s| match s {
            Slot::ZZ { offset, .. } => Some(*offset),
            Slot::U3 { .. } => None,
        })
    }

    fn check(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::ParamLength {
                expected: self.n_params,
                got: params.len(),
            });
        }
        Ok(())
    }

    pub fn circuit(&self, params: &[f64]) -> Result<Circuit> {
        self.check(params)?;
        let ops = self
            .slots
            .iter()
            .map(|s| match *s {
                Slot::U3 { qubit, offset } => Gate::U3 {
                    qubit,
                    theta: params[offset],
                    phi: params[offset + 1],
                    lambda: params[offset + 2],
                },
                Slot::ZZ { a, b, offset } => Gate::ZZ {
                    a,
                    b,
                    theta: params[offset],
                },
            })
            .collect();
        Circuit::from_ops(self.n, ops)
    }

    /// Initial point: Haar-random SU(2) angles for every U3, zero ZZ angles.
    pub fn initial_params(&self, rng: &mut RandomStream) -> Vec<f64> {
        let mut p = vec![0.0; self.n_params];
        for s in &self.slots {
            if let Slot::U3 { offset, .. } = *s {
                let (t, f, l) = sample_haar_su2_angles(rng);
                p[offset..offset + 3].copy_from_slice(&[t, f, l]);
            }
        }
        p
    }

    /// Rewrites `params` so ZZ angles lie in `[-1/2, 1/2]` and U3 angles in
    /// `[-1, 1)`, preserving `C(θ)|0ⁿ⟩` up to a global phase.
    pub fn canonicalize(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.check(params)?;
        let mut p = params.to_vec();
        // Z on each qubit of a ZZ(±1) remainder folds into the next U3:
        // U3(θ, φ, λ)·Z = U3(θ, φ, λ + 1).
        let mut pending_z = vec![false; self.n];
        for s in &self.slots {
            match *s {
                Slot::ZZ { a, b, offset } => {
                    let w = wrap_angle(p[offset]);
                    let folded = if w > 0.5 {
                        w - 1.0
                    } else if w < -0.5 {
                        w + 1.0
                    } else {
                        w
                    };
                    if folded != w {
                        pending_z[a] ^= true;
                        pending_z[b] ^= true;
                    }
                    p[offset] = folded;
                }
                Slot::U3 { qubit, offset } => {
                    if std::mem::take(&mut pending_z[qubit]) {
                        p[offset + 2] += 1.0;
                    }
                    // U3(θ + 2, φ, λ) = -U3(θ, φ, λ)
                    for v in &mut p[offset..offset + 3] {
                        *v = wrap_angle(*v);
                    }
                }
            }
        }
        Ok(p)
    }
}

/// `C(θ)|0ⁿ⟩`.
pub fn ansatz_state(layout: &AnsatzLayout, params: &[f64]) -> Result<StateVector> {
    layout.check(params)?;
    let mut state = StateVector::zero(layout.n);
    let amps = state.amps_mut();
    for s in &layout.slots {
        forward(amps, s, params);
    }
    Ok(state)
}

fn forward(amps: &mut [C64], slot: &Slot, params: &[f64]) {
    match *slot {
        Slot::U3 { qubit, offset } => apply_1q(
            amps,
            qubit,
            &u3_matrix(params[offset], params[offset + 1], params[offset + 2]),
        ),
        Slot::ZZ { a, b, offset } => {
            let (e, o) = zz_phases(params[offset]);
            apply_zz(amps, a, b, e, o)
        }
    }
}

fn backward(amps: &mut [C64], slot: &Slot, params: &[f64]) {
    match *slot {
        Slot::U3 { qubit, offset } => {
            let m = u3_matrix(params[offset], params[offset + 1], params[offset + 2]);
            let dag = [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ];
            apply_1q(amps, qubit, &dag)
        }
        Slot::ZZ { a, b, offset } => {
            let (e, o) = zz_phases(params[offset]);
            apply_zz(amps, a, b, e.conj(), o.conj())
        }
    }
}

/// `Π_i (1 - 5/4 ε_2Q(θ_i) - 3 ε_mem)` over the ZZ angles.
pub fn noise_product(
    params: &[f64],
    layout: &AnsatzLayout,
    constants: &NoiseConstants,
) -> Result<f64> {
    layout.check(params)?;
    Ok(layout
        .zz_offsets()
        .map(|o| constants.gate_factor(params[o]))
        .product())
}

/// Objective value with its parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Objective {
    pub fidelity: f64,
    pub overlap: f64,
    pub noise_factor: f64,
}

/// `F(θ)` and `∇F(θ)`; the overlap gradient comes from one reverse sweep.
pub fn objective_grad(
    layout: &AnsatzLayout,
    params: &[f64],
    target: &StateVector,
    constants: &NoiseConstants,
) -> Result<(Objective, Vec<f64>)> {
    layout.check(params)?;
    if target.n() != layout.n {
        return Err(Error::DimensionMismatch {
            expected: layout.n,
            got: target.n(),
        });
    }
    let mut phi = ansatz_state(layout, params)?;
    let amp = inner_product(target, &phi)?;
    let overlap = amp.norm_sqr();
    let mut grad = vec![0.0; layout.n_params];

    // chi_k = G_{k+1}^† ⋯ G_L^† |ψ⟩, phi_k = G_k ⋯ G_1 |0⟩; ⟨chi_k|phi_k⟩ = amp.
    let mut chi = target.clone();
    let (phi_a, chi_a) = (phi.amps_mut(), chi.amps_mut());
    let conj_amp = amp.conj();
    for slot in layout.slots.iter().rev() {
        backward(phi_a, slot, params);
        match *slot {
            Slot::U3 { qubit, offset } => {
                let r = reduced(chi_a, phi_a, qubit);
                let [dt, dp, dl] =
                    u3_derivatives(params[offset], params[offset + 1], params[offset + 2]);
                for (k, dm) in [dt, dp, dl].iter().enumerate() {
                    let d: C64 = (0..2)
                        .flat_map(|i| (0..2).map(move |j| (i, j)))
                        .map(|(i, j)| dm[i][j] * r[i][j])
                        .sum();
                    grad[offset + k] = 2.0 * (conj_amp * d).re;
                }
            }
            Slot::ZZ { a, b, offset } => {
                let mask = (1usize << a) | (1usize << b);
                let (mut even, mut odd) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for (i, (c, p)) in chi_a.iter().zip(phi_a.iter()).enumerate() {
                    let t = c.conj() * p;
                    if (i & mask).count_ones() == 1 {
                        odd += t;
                    } else {
                        even += t;
                    }
                }
                let (pe, po) = zz_phases(params[offset]);
                let d = C64::new(0.0, -0.5 * PI) * (pe * even - po * odd);
                grad[offset] = 2.0 * (conj_amp * d).re;
            }
        }
        backward(chi_a, slot, params);
    }

    let noise_factor = noise_product(params, layout, constants)?;
    for g in grad.iter_mut() {
        *g *= noise_factor;
    }
    for o in layout.zz_offsets() {
        let f = constants.gate_factor(params[o]);
        let df = -1.25 * constants.c_slope * effective_angle_slope(params[o]);
        grad[o] += overlap * noise_factor / f * df;
    }
    Ok((
        Objective {
            fidelity: overlap * noise_factor,
            overlap,
            noise_factor,
        },
        grad,
    ))
}

/// `R[i][j] = Σ conj(χ_i) φ_j` over index pairs differing in qubit `q`.
fn reduced(chi: &[C64], phi: &[C64], q: usize) -> Mat2 {
    let stride = 1usize << q;
    let zero = C64::new(0.0, 0.0);
    let mut r = [[zero; 2]; 2];
    for (cb, pb) in chi
        .chunks_exact(stride << 1)
        .zip(phi.chunks_exact(stride << 1))
    {
        let (c0, c1) = cb.split_at(stride);
        let (p0, p1) = pb.split_at(stride);
        for k in 0..stride {
            let (x0, x1) = (c0[k].conj(), c1[k].conj());
            r[0][0] += x0 * p0[k];
            r[0][1] += x0 * p1[k];
            r[1][0] += x1 * p0[k];
            r[1][1] += x1 * p1[k];
        }
    }
    r
}

fn u3_derivatives(theta: f64, phi: f64, lambda: f64) -> [Mat2; 3] {
    let (s, c) = (0.5 * PI * theta).sin_cos();
    let zero = C64::new(0.0, 0.0);
    let ipi = C64::new(0.0, PI);
    let (el, ep, epl) = (phase_pi(lambda), phase_pi(phi), phase_pi(lambda + phi));
    let h = 0.5 * PI;
    [
        [
            [C64::new(-h * s, 0.0), -el * (h * c)],
            [ep * (h * c), epl * (-h * s)],
        ],
        [[zero, zero], [ipi * ep * s, ipi * epl * c]],
        [[zero, -ipi * el * s], [zero, ipi * epl * c]],
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub rel_tol: f64,
    pub memory: usize,
    /// Extra runs from fresh random U3 angles; the best result is kept.
    pub restarts: usize,
    /// Size of the one-off ZZ kick applied if the search stalls at `θ = 0`.
    pub zz_kick: f64,
}

impl Default for OptOptions {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            grad_tol: 1e-8,
            rel_tol: 1e-12,
            memory: 10,
            restarts: 0,
            zz_kick: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    /// Canonicalized parameters.
    pub params: Vec<f64>,
    pub overlap: f64,
    pub noise_factor: f64,
    pub predicted_fidelity: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Predicted fidelity after each iteration of the winning run.
    pub history: Vec<f64>,
}

/// Maximizes `F(θ)` by L-BFGS on `-ln F(θ)`, orthant-wise in the ZZ angles.
pub fn optimize_ansatz(
    layout: &AnsatzLayout,
    target: &StateVector,
    constants: &NoiseConstants,
    opts: &OptOptions,
    rng: &mut RandomStream,
) -> Result<OptResult> {
    constants.validate()?;
    if target.n() != layout.n {
        return Err(Error::DimensionMismatch {
            expected: layout.n,
            got: target.n(),
        });
    }
    let norm = target.norm_sqr();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(norm));
    }
    let lopts = LbfgsOptions {
        memory: opts.memory,
        max_iters: opts.max_iters,
        grad_tol: opts.grad_tol,
        rel_tol: opts.rel_tol,
        ..Default::default()
    };
    let zz: Vec<usize> = layout.zz_offsets().collect();
    // -ln F separates the noise product into per-gate terms, each with a
    // convex kink wherever the effective ZZ angle is 0
    let kinks: Vec<lbfgs::Kink> = if constants.c_slope > 0.0 {
        let slope = 1.25 * constants.c_slope / constants.gate_factor(0.0);
        zz.iter()
            .map(|&index| lbfgs::Kink { index, slope })
            .collect()
    } else {
        Vec::new()
    };
    let mut best: Option<OptResult> = None;
    for _ in 0..=opts.restarts {
        let x0 = layout.initial_params(rng);
        let mut kicked = false;
        let mut kick_rng = RandomStream::new(rng.next_u64());
        let out = lbfgs::minimize(
            x0,
            |x| {
                let (obj, g) = objective_grad(layout, x, target, constants)
                    .expect("layout and target were checked");
                let f = obj.fidelity;
                (-f.ln(), g.into_iter().map(|v| -v / f).collect())
            },
            &lopts,
            &kinks,
            |x| {
                let at_zero: Vec<usize> = zz.iter().copied().filter(|&o| x[o] == 0.0).collect();
                if kicked || at_zero.is_empty() {
                    return false;
                }
                kicked = true;
                for o in at_zero {
                    x[o] = if kick_rng.coin() {
                        opts.zz_kick
                    } else {
                        -opts.zz_kick
                    };
                }
                true
            },
        );
        let params = layout.canonicalize(&out.x)?;
        let (obj, _) = objective_grad(layout, &params, target, constants)?;
        let result = OptResult {
            params,
            overlap: obj.overlap,
            noise_factor: obj.noise_factor,
            predicted_fidelity: obj.overlap * obj.noise_factor,
            iterations: out.iters,
            converged: out.stop.converged(),
            history: out.history.iter().map(|f| (-f).exp()).collect(),
        };
        if best
            .as_ref()
            .is_none_or(|b| result.predicted_fidelity > b.predicted_fidelity)
        {
            best = Some(result);
        }
    }
    Ok(best.expect("at least one run"))
}

/// Params file: `{"n", "depth", "params", "predicted_fidelity", "overlap",
/// "noise_factor", "seed"}`. `seed` is the target-state seed: the target is
/// `sample_haar_state(n, RandomStream::new(seed))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub n: usize,
    pub depth: usize,
    pub params: Vec<f64>,
    pub predicted_fidelity: f64,
    pub overlap: f64,
    pub noise_factor: f64,
    pub seed: u64,
}

impl ParamsFile {
    pub fn from_result(layout: &AnsatzLayout, result: &OptResult, seed: u64) -> Self {
        Self {
            n: layout.n,
            depth: layout.depth,
            params: result.params.clone(),
            predicted_fidelity: result.predicted_fidelity,
            overlap: result.overlap,
            noise_factor: result.noise_factor,
            seed,
        }
    }

    pub fn layout(&self) -> Result<AnsatzLayout> {
        let layout = build_layout(self.n, self.depth)?;
        layout.check(&self.params)?;
        Ok(layout)
    }

    pub fn state(&self) -> Result<StateVector> {
        ansatz_state(&self.layout()?, &self.params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params are serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: ParamsFile = serde_json::from_str(s)?;
        p.layout()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
