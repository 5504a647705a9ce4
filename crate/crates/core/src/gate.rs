//! Gate set and the statevector kernels that apply it.
//!
//! Rotation angles are in half-turns (units of π): `ZZ(θ) = exp(-i(π/2)θ Z⊗Z)`
//! and `U3(θ, φ, λ)` has entries `cos(πθ/2)`, `e^{iπφ} sin(πθ/2)`, and so on.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::StateVector;

pub type Mat2 = [[C64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    U3 {
        qubit: usize,
        theta: f64,
        phi: f64,
        lambda: f64,
    },
    ZZ {
        a: usize,
        b: usize,
        theta: f64,
    },
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Z(usize),
    CZ(usize, usize),
    CNOT {
        control: usize,
        target: usize,
    },
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// `e^{iπx}`.
#[inline]
pub fn phase_pi(x: f64) -> C64 {
    C64::from_polar(1.0, PI * x)
}

pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, c) = (0.5 * PI * theta).sin_cos();
    [
        [C64::new(c, 0.0), -phase_pi(lambda) * s],
        [phase_pi(phi) * s, phase_pi(lambda + phi) * c],
    ]
}

/// Diagonal of `ZZ(θ)` on the two parities: `(even, odd)`.
pub fn zz_phases(theta: f64) -> (C64, C64) {
    (phase_pi(-0.5 * theta), phase_pi(0.5 * theta))
}

impl Gate {
    pub fn kind(&self) -> &'static str {
        match self {
            Gate::U3 { .. } => "u3",
            Gate::ZZ { .. } => "zz",
            Gate::H(_) => "h",
            Gate::S(_) => "s",
            Gate::Sdg(_) => "sdg",
            Gate::X(_) => "x",
            Gate::Z(_) => "z",
            Gate::CZ(..) => "cz",
            Gate::CNOT { .. } => "cnot",
        }
    }

    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::U3 { qubit, .. } => vec![qubit],
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::X(q) | Gate::Z(q) => vec![q],
            Gate::ZZ { a, b, .. } | Gate::CZ(a, b) => vec![a, b],
            Gate::CNOT { control, target } => vec![control, target],
        }
    }

    pub fn angles(&self) -> Vec<f64> {
        match *self {
            Gate::U3 {
                theta, phi, lambda, ..
            } => vec![theta, phi, lambda],
            Gate::ZZ { theta, .. } => vec![theta],
            _ => Vec::new(),
        }
    }

    /// The adjoint gate.
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::U3 {
                qubit,
                theta,
                phi,
                lambda,
            } => Gate::U3 {
                qubit,
                theta: -theta,
                phi: -lambda,
                lambda: -phi,
            },
            Gate::ZZ { a, b, theta } => Gate::ZZ {
                a,
                b,
                theta: -theta,
            },
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            g => g,
        }
    }

    /// Checks the targets against an `n`-qubit register.
    pub fn validate(&self, n: usize) -> Result<()> {
        let t = self.targets();
        if let Some(&index) = t.iter().find(|&&q| q >= n) {
            return Err(Error::QubitOutOfRange { index, n });
        }
        if t.len() == 2 && t[0] == t[1] {
            return Err(Error::DuplicateTargets(t));
        }
        Ok(())
    }

    /// Applies the gate in place.
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        self.validate(state.n())?;
        self.apply_unchecked(state.amps_mut());
        Ok(())
    }

    pub(crate) fn apply_unchecked(&self, amps: &mut [C64]) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match *self {
            Gate::U3 {
                qubit,
                theta,
                phi,
                lambda,
            } => apply_1q(amps, qubit, &u3_matrix(theta, phi, lambda)),
            Gate::H(q) => apply_1q(
                amps,
                q,
                &[
                    [C64::new(h, 0.0), C64::new(h, 0.0)],
                    [C64::new(h, 0.0), C64::new(-h, 0.0)],
                ],
            ),
            Gate::S(q) => apply_phase_1q(amps, q, C64::new(0.0, 1.0)),
            Gate::Sdg(q) => apply_phase_1q(amps, q, C64::new(0.0, -1.0)),
            Gate::Z(q) => apply_phase_1q(amps, q, -ONE),
            Gate::X(q) => apply_x(amps, q),
            Gate::ZZ { a, b, theta } => {
                let (even, odd) = zz_phases(theta);
                apply_zz(amps, a, b, even, odd)
            }
            Gate::CZ(a, b) => apply_cz(amps, a, b),
            Gate::CNOT { control, target } => apply_cnot(amps, control, target),
        }
    }

    /// Unitary on the gate's own targets, in target order (first target is the
    /// least-significant bit of the local index).
    pub fn matrix(&self) -> Vec<Vec<C64>> {
        let k = self.targets().len();
        let dim = 1 << k;
        let local = self.relabeled();
        let mut cols = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut v = vec![ZERO; dim];
            v[j] = ONE;
            local.apply_unchecked(&mut v);
            cols.push(v);
        }
        (0..dim)
            .map(|i| (0..dim).map(|j| cols[j][i]).collect())
            .collect()
    }

    fn relabeled(&self) -> Gate {
        match *self {
            Gate::U3 {
                theta, phi, lambda, ..
            } => Gate::U3 {
                qubit: 0,
                theta,
                phi,
                lambda,
            },
            Gate::ZZ { theta, .. } => Gate::ZZ { a: 0, b: 1, theta },
            Gate::H(_) => Gate::H(0),
            Gate::S(_) => Gate::S(0),
            Gate::Sdg(_) => Gate::Sdg(0),
            Gate::X(_) => Gate::X(0),
            Gate::Z(_) => Gate::Z(0),
            Gate::CZ(..) => Gate::CZ(0, 1),
            Gate::CNOT { .. } => Gate::CNOT {
                control: 0,
                target: 1,
            },
        }
    }
}

/// Returns `U·state` for the gate embedded on its targets.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut out = state.clone();
    gate.apply(&mut out)?;
    Ok(out)
}

/// Applies a 2×2 matrix to qubit `q`.
pub fn apply_1q(amps: &mut [C64], q: usize, m: &Mat2) {
    let stride = 1usize << q;
    for block in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a0, *a1);
            *a0 = m[0][0] * x + m[0][1] * y;
            *a1 = m[1][0] * x + m[1][1] * y;
        }
    }
}

/// Multiplies amplitudes with qubit `q` set by `phase`.
pub fn apply_phase_1q(amps: &mut [C64], q: usize, phase: C64) {
    let stride = 1usize << q;
    for block in amps.chunks_exact_mut(stride << 1) {
        block[stride..].iter_mut().for_each(|a| *a *= phase);
    }
}

pub fn apply_x(amps: &mut [C64], q: usize) {
    let stride = 1usize << q;
    for block in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        lo.swap_with_slice(hi);
    }
}

/// Diagonal two-qubit phase by parity of bits `a` and `b`.
pub fn apply_zz(amps: &mut [C64], a: usize, b: usize, even: C64, odd: C64) {
    let mask = (1usize << a) | (1usize << b);
    for (i, amp) in amps.iter_mut().enumerate() {
        *amp *= if (i & mask).count_ones() == 1 {
            odd
        } else {
            even
        };
    }
}

pub fn apply_cz(amps: &mut [C64], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *amp = -*amp;
        }
    }
}

pub fn apply_cnot(amps: &mut [C64], control: usize, target: usize) {
    let c = 1usize << control;
    let t = 1usize << target;
    for i in 0..amps.len() {
        if i & c != 0 && i & t == 0 {
            amps.swap(i, i | t);
        }
    }
}

/// Wire form of a gate in circuit JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: String,
    pub targets: Vec<usize>,
    #[serde(default)]
    pub angles: Vec<f64>,
}

impl From<&Gate> for GateSpec {
    fn from(g: &Gate) -> Self {
        GateSpec {
            kind: g.kind().to_string(),
            targets: g.targets(),
            angles: g.angles(),
        }
    }
}

impl TryFrom<&GateSpec> for Gate {
    type Error = Error;

    fn try_from(s: &GateSpec) -> Result<Gate> {
        let (kind, n_targets, n_angles): (&'static str, usize, usize) = match s.kind.as_str() {
            "u3" => ("u3", 1, 3),
            "zz" => ("zz", 2, 1),
            "h" => ("h", 1, 0),
            "s" => ("s", 1, 0),
            "sdg" => ("sdg", 1, 0),
            "x" => ("x", 1, 0),
            "z" => ("z", 1, 0),
            "cz" => ("cz", 2, 0),
            "cnot" => ("cnot", 2, 0),
            other => return Err(Error::UnknownGate(other.to_string())),
        };
        if s.targets.len() != n_targets {
            return Err(Error::TargetArity {
                kind,
                expected: n_targets,
                got: s.targets.len(),
            });
        }
        if s.angles.len() != n_angles {
            return Err(Error::AngleArity {
                kind,
                expected: n_angles,
                got: s.angles.len(),
            });
        }
        let t = &s.targets;
        let a = &s.angles;
        Ok(match kind {
            "u3" => Gate::U3 {
                qubit: t[0],
                theta: a[0],
                phi: a[1],
                lambda: a[2],
            },
            "zz" => Gate::ZZ {
                a: t[0],
                b: t[1],
                theta: a[0],
            },
            "h" => Gate::H(t[0]),
            "s" => Gate::S(t[0]),
            "sdg" => Gate::Sdg(t[0]),
            "x" => Gate::X(t[0]),
            "z" => Gate::Z(t[0]),
            "cz" => Gate::CZ(t[0], t[1]),
            _ => Gate::CNOT {
                control: t[0],
                target: t[1],
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn is_unitary(m: &[Vec<C64>]) -> bool {
        let d = m.len();
        (0..d).all(|i| {
            (0..d).all(|j| {
                let dot: C64 = (0..d).map(|k| m[k][i].conj() * m[k][j]).sum();
                close(dot, if i == j { ONE } else { ZERO })
            })
        })
    }

    #[test]
    fn hadamard_on_zero() {
        let s = apply_gate(&StateVector::zero(1), &Gate::H(0)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(s.amps()[0], C64::new(r, 0.0)));
        assert!(close(s.amps()[1], C64::new(r, 0.0)));
    }

    #[test]
    fn zz_zero_is_identity() {
        let s = StateVector::from_amps(vec![
            C64::new(0.1, 0.2),
            C64::new(0.3, -0.4),
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.67),
        ])
        .unwrap();
        let out = apply_gate(
            &s,
            &Gate::ZZ {
                a: 0,
                b: 1,
                theta: 0.0,
            },
        )
        .unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn zz_half_on_00() {
        let out = apply_gate(
            &StateVector::zero(2),
            &Gate::ZZ {
                a: 0,
                b: 1,
                theta: 0.5,
            },
        )
        .unwrap();
        assert!(close(out.amps()[0], C64::from_polar(1.0, -PI / 4.0)));
        let m = Gate::ZZ {
            a: 0,
            b: 1,
            theta: 0.5,
        }
        .matrix();
        assert!(close(m[1][1], C64::from_polar(1.0, PI / 4.0)));
        assert!(close(m[3][3], C64::from_polar(1.0, -PI / 4.0)));
    }

    #[test]
    fn cnot_and_cz_matrices() {
        let m = Gate::CNOT {
            control: 0,
            target: 1,
        }
        .matrix();
        // control is local bit 0: |01⟩ (index 1) ↦ |11⟩ (index 3)
        assert!(close(m[3][1], ONE));
        assert!(close(m[1][3], ONE));
        assert!(close(m[0][0], ONE));
        let cz = Gate::CZ(0, 1).matrix();
        assert!(close(cz[3][3], -ONE));
    }

    #[test]
    fn gate_errors() {
        let mut s = StateVector::zero(2);
        assert!(matches!(
            Gate::H(2).apply(&mut s),
            Err(Error::QubitOutOfRange { index: 2, n: 2 })
        ));
        assert!(matches!(
            Gate::CZ(1, 1).apply(&mut s),
            Err(Error::DuplicateTargets(_))
        ));
    }

    #[test]
    fn spec_round_trip_and_errors() {
        let g = Gate::U3 {
            qubit: 2,
            theta: 0.25,
            phi: -0.5,
            lambda: 1.5,
        };
        let spec = GateSpec::from(&g);
        assert_eq!(Gate::try_from(&spec).unwrap(), g);
        let bad = GateSpec {
            kind: "cz".into(),
            targets: vec![0],
            angles: vec![],
        };
        assert!(Gate::try_from(&bad).is_err());
        let unknown = GateSpec {
            kind: "toffoli".into(),
            targets: vec![0, 1, 2],
            angles: vec![],
        };
        assert!(matches!(
            Gate::try_from(&unknown),
            Err(Error::UnknownGate(_))
        ));
    }

    proptest::proptest! {
        #[test]
        fn parameterized_gates_are_unitary(theta in -8.0..8.0f64, phi in -8.0..8.0f64, lambda in -8.0..8.0f64) {
            let u3 = Gate::U3 { qubit: 0, theta, phi, lambda };
            proptest::prop_assert!(is_unitary(&u3.matrix()));
            let zz = Gate::ZZ { a: 0, b: 1, theta };
            proptest::prop_assert!(is_unitary(&zz.matrix()));
        }

        #[test]
        fn inverse_undoes_gate(theta in -4.0..4.0f64, phi in -4.0..4.0f64, lambda in -4.0..4.0f64) {
            let gates = [
                Gate::U3 { qubit: 1, theta, phi, lambda },
                Gate::ZZ { a: 0, b: 2, theta },
                Gate::S(2),
                Gate::CNOT { control: 2, target: 0 },
            ];
            let psi = StateVector::from_amps(
                (0..8).map(|i| C64::new(i as f64 + 1.0, theta * i as f64)).collect(),
            ).unwrap().normalized().unwrap();
            for g in gates {
                let back = apply_gate(&apply_gate(&psi, &g).unwrap(), &g.inverse()).unwrap();
                let err = back.amps().iter().zip(psi.amps()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                proptest::prop_assert!(err < 1e-12);
                proptest::prop_assert!((apply_gate(&psi, &g).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }
}
