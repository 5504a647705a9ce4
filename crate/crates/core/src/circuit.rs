use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{Gate, GateSpec};
use crate::state::StateVector;

/// An ordered gate list on `n` qubits.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    n: usize,
    ops: Vec<Gate>,
}

#[derive(Serialize, Deserialize)]
struct CircuitWire {
    n: usize,
    ops: Vec<GateSpec>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self { n, ops: Vec::new() }
    }

    pub fn from_ops(n: usize, ops: Vec<Gate>) -> Result<Self> {
        for g in &ops {
            g.validate(n)?;
        }
        Ok(Self { n, ops })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[Gate] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n)?;
        self.ops.push(gate);
        Ok(())
    }

    /// Appends every gate of `other`.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        self.ops.extend_from_slice(&other.ops);
        Ok(())
    }

    /// Reversed sequence of adjoint gates.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n: self.n,
            ops: self.ops.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Applies the gates in order, in place.
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: state.n(),
            });
        }
        let amps = state.amps_mut();
        for g in &self.ops {
            g.apply_unchecked(amps);
        }
        Ok(())
    }

    /// Dense unitary, column `j` being the image of `|j⟩`. Only sensible for
    /// small registers.
    pub fn unitary(&self) -> Result<DMatrix<C64>> {
        if self.n > 10 {
            return Err(Error::OutOfRange {
                what: "qubits for a dense unitary",
                value: self.n as f64,
                range: "1..=10",
            });
        }
        let dim = 1usize << self.n;
        let mut u = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut col = StateVector::basis(self.n, j);
            self.apply(&mut col)?;
            for (i, a) in col.amps().iter().enumerate() {
                u[(i, j)] = *a;
            }
        }
        Ok(u)
    }

    pub fn to_json(&self) -> String {
        let wire = CircuitWire {
            n: self.n,
            ops: self.ops.iter().map(GateSpec::from).collect(),
        };
        serde_json::to_string(&wire).expect("circuit serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: CircuitWire = serde_json::from_str(s)?;
        let ops = wire
            .ops
            .iter()
            .map(Gate::try_from)
            .collect::<Result<Vec<_>>>()?;
        Circuit::from_ops(wire.n, ops)
    }
}

/// Returns the state after every gate of `circuit` has been applied.
pub fn apply_circuit(state: &StateVector, circuit: &Circuit) -> Result<StateVector> {
    let mut out = state.clone();
    circuit.apply(&mut out)?;
    Ok(out)
}
