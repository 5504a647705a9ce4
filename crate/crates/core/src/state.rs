//! Dense statevectors.
//!
//! Qubit 0 is the least-significant bit of the amplitude index. Bitstrings are
//! rendered most-significant qubit first, so `"01"` on two qubits is index 1
//! (qubit 0 set).

use std::io::{Read, Write};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Largest register the dense representation accepts.
pub const MAX_QUBITS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0^n⟩`.
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Self {
        assert!((1..=MAX_QUBITS).contains(&n), "unsupported qubit count {n}");
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Self { n, amps }
    }

    pub fn from_amps(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() || len > 1 << MAX_QUBITS {
            return Err(Error::BadLength(len));
        }
        Ok(Self {
            n: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Scales to unit norm in place.
    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let inv = 1.0 / norm;
        self.amps.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|⟨z|self⟩|²`.
    pub fn probability(&self, z: usize) -> f64 {
        self.amps[z].norm_sqr()
    }

    pub fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(())
    }

    /// Draws a computational-basis outcome by inverse CDF over `|amp|²`.
    pub fn born_sample(&self, rng: &mut RandomStream) -> Result<usize> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::NotNormalized(norm));
        }
        let u = rng.uniform() * norm;
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (z, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                acc += p;
                last_nonzero = z;
                if u < acc {
                    return Ok(z);
                }
            }
        }
        // rounding left u just above the accumulated total
        Ok(last_nonzero)
    }

    /// Global phase fixed so that the lowest-index nonzero amplitude is real
    /// and positive.
    pub fn canonical_phase(&self) -> Result<Self> {
        let lead = self
            .amps
            .iter()
            .find(|a| a.norm_sqr() > 1e-24)
            .ok_or(Error::ZeroVector)?;
        let rot = lead.conj() / lead.norm();
        Ok(Self {
            n: self.n,
            amps: self.amps.iter().map(|a| a * rot).collect(),
        })
    }

    /// Hashable key of the phase-canonical state with amplitudes rounded to a
    /// `grid`-spaced lattice.
    pub fn canonical_key(&self, grid: f64) -> Result<Vec<(i64, i64)>> {
        let c = self.canonical_phase()?;
        Ok(c.amps
            .iter()
            .map(|a| ((a.re / grid).round() as i64, (a.im / grid).round() as i64))
            .collect())
    }

    /// Largest componentwise distance after removing the global phase.
    pub fn phase_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        let ov = inner_product(self, other)?;
        let rot = if ov.norm() > 0.0 {
            ov / ov.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a * rot - b).norm())
            .fold(0.0, f64::max))
    }

    /// Little-endian binary form: `u64` qubit count, then interleaved
    /// `(re, im)` `f64` pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(Error::Malformed(format!("state header claims {n} qubits")));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for _ in 0..1usize << n {
            r.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            r.read_exact(&mut word)?;
            let im = f64::from_le_bytes(word);
            amps.push(C64::new(re, im));
        }
        Ok(Self { n, amps })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 16 * self.dim());
        self.write_binary(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    a.check_same_dim(b)?;
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// Renders outcome `z` as an `n`-character bitstring, qubit `n-1` first.
pub fn format_bitstring(z: usize, n: usize) -> String {
    format!("{z:0n$b}")
}

pub fn parse_bitstring(s: &str) -> Result<usize> {
    if s.is_empty() || s.len() > MAX_QUBITS || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::Malformed(format!("bad bitstring {s:?}")));
    }
    Ok(usize::from_str_radix(s, 2).expect("validated binary digits"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn basis_orthogonality() {
        let zero = StateVector::zero(1);
        let one = StateVector::basis(1, 1);
        assert_eq!(inner_product(&zero, &one).unwrap(), c(0.0, 0.0));
        assert_eq!(inner_product(&zero, &zero).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first_argument() {
        let a = StateVector::from_amps(vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let b = StateVector::zero(1);
        assert_eq!(inner_product(&a, &b).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = StateVector::zero(1);
        let b = StateVector::zero(2);
        assert!(matches!(
            inner_product(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bad_lengths() {
        assert!(StateVector::from_amps(vec![c(1.0, 0.0); 3]).is_err());
        assert!(StateVector::from_amps(vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn canonical_phase_removes_global_phase() {
        let s = StateVector::from_amps(vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(s.canonical_phase().unwrap(), StateVector::zero(1));
        let h = StateVector::from_amps(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert_eq!(h.canonical_phase().unwrap(), h);
        let zero = StateVector::from_amps(vec![c(0.0, 0.0); 2]).unwrap();
        assert!(matches!(zero.canonical_phase(), Err(Error::ZeroVector)));
    }

    #[test]
    fn canonical_phase_leading_zero_amplitudes() {
        let s = StateVector::from_amps(vec![c(0.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(s.canonical_phase().unwrap(), StateVector::basis(1, 1));
    }

    #[test]
    fn born_sample_of_basis_state() {
        let mut rng = RandomStream::new(3);
        let s = StateVector::zero(4);
        for _ in 0..100 {
            assert_eq!(s.born_sample(&mut rng).unwrap(), 0);
        }
        let s = StateVector::basis(3, 5);
        assert_eq!(s.born_sample(&mut rng).unwrap(), 5);
    }

    #[test]
    fn born_sample_bell_frequencies() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s =
            StateVector::from_amps(vec![c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)]).unwrap();
        let mut rng = RandomStream::new(11);
        let mut counts = [0usize; 4];
        for _ in 0..100_000 {
            counts[s.born_sample(&mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[1] + counts[2], 0);
        assert!((counts[0] as f64 / 1e5 - 0.5).abs() < 5e-3);
        assert!((counts[3] as f64 / 1e5 - 0.5).abs() < 5e-3);
    }

    #[test]
    fn born_sample_rejects_unnormalized() {
        let s = StateVector::from_amps(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let mut rng = RandomStream::new(0);
        assert!(matches!(
            s.born_sample(&mut rng),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn binary_layout() {
        let s = StateVector::from_amps(vec![c(0.5, -0.25), c(1.0, 2.0)]).unwrap();
        let bytes = s.to_bytes();
        assert_eq!(bytes.len(), 8 + 32);
        assert_eq!(&bytes[..8], &1u64.to_le_bytes());
        assert_eq!(&bytes[8..16], &0.5f64.to_le_bytes());
        assert_eq!(&bytes[16..24], &(-0.25f64).to_le_bytes());
        assert_eq!(StateVector::read_binary(&bytes[..]).unwrap(), s);
        assert!(StateVector::read_binary(&bytes[..20]).is_err());
    }

    #[test]
    fn bitstrings() {
        assert_eq!(format_bitstring(1, 2), "01");
        assert_eq!(format_bitstring(6, 4), "0110");
        assert_eq!(parse_bitstring("0110").unwrap(), 6);
        assert!(parse_bitstring("012").is_err());
        assert!(parse_bitstring("").is_err());
    }
}
