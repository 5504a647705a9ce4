//! Gaussian and Haar-random states and unitaries.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::state::{StateVector, MAX_QUBITS};

/// Largest register for which dense unitaries are sampled.
pub const MAX_DENSE_QUBITS: usize = 6;

/// Unnormalized Gaussian state: every real and imaginary part is an
/// independent `N(0, 2^{-(n+1)})`, so `E‖ψ‖² = 1`.
pub fn sample_gaussian_state(n: usize, rng: &mut RandomStream) -> Result<StateVector> {
    if !(1..=MAX_QUBITS).contains(&n) {
        return Err(Error::OutOfRange {
            what: "qubit count",
            value: n as f64,
            range: "1..=20",
        });
    }
    let sigma = (0.5f64).powi(n as i32 + 1).sqrt();
    let amps = (0..1usize << n)
        .map(|_| {
            let re = rng.normal();
            let im = rng.normal();
            C64::new(sigma * re, sigma * im)
        })
        .collect();
    StateVector::from_amps(amps)
}

/// Haar-random pure state (a normalized Gaussian state).
pub fn sample_haar_state(n: usize, rng: &mut RandomStream) -> Result<StateVector> {
    sample_gaussian_state(n, rng)?.normalized()
}

/// Haar-random `2^n × 2^n` unitary: QR of a complex Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn sample_haar_unitary(n: usize, rng: &mut RandomStream) -> Result<DMatrix<C64>> {
    if !(1..=MAX_DENSE_QUBITS).contains(&n) {
        return Err(Error::OutOfRange {
            what: "qubits for a dense unitary",
            value: n as f64,
            range: "1..=6",
        });
    }
    let dim = 1usize << n;
    let ginibre = DMatrix::from_fn(dim, dim, |_, _| {
        let re = rng.normal();
        let im = rng.normal();
        C64::new(re, im)
    });
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|x| *x *= ph);
    }
    Ok(q)
}

/// `(θ, φ, λ)` in half-turns such that `U3(θ, φ, λ)` is Haar-distributed on
/// SU(2) up to a global phase.
pub fn sample_haar_su2_angles(rng: &mut RandomStream) -> (f64, f64, f64) {
    // |⟨0|U|0⟩|² = cos²(πθ/2) is uniform on [0, 1]
    let u = rng.uniform();
    let theta = 2.0 * u.sqrt().acos() / std::f64::consts::PI;
    let phi = 2.0 * rng.uniform();
    let lambda = 2.0 * rng.uniform();
    (theta, phi, lambda)
}

/// `U·ψ` for a dense unitary.
pub fn apply_dense(u: &DMatrix<C64>, state: &StateVector) -> Result<StateVector> {
    if u.ncols() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.ncols().trailing_zeros() as usize,
            got: state.n(),
        });
    }
    let dim = state.dim();
    let amps = state.amps();
    let out = (0..dim)
        .map(|i| (0..dim).map(|j| u[(i, j)] * amps[j]).sum())
        .collect();
    StateVector::from_amps(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::u3_matrix;
    use crate::stats::{ks_p_value, MeanAcc};

    #[test]
    fn haar_state_is_normalized() {
        let mut rng = RandomStream::new(1);
        for n in 1..=10 {
            let s = sample_haar_state(n, &mut rng).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_state_norm_has_unit_mean() {
        let mut rng = RandomStream::new(2);
        let mut acc = MeanAcc::default();
        for _ in 0..10_000 {
            acc.push(sample_gaussian_state(6, &mut rng).unwrap().norm_sqr());
        }
        assert!((acc.mean() - 1.0).abs() < 0.01, "{}", acc.mean());
    }

    #[test]
    fn gaussian_component_variance() {
        let mut rng = RandomStream::new(3);
        let mut re = MeanAcc::default();
        let mut im = MeanAcc::default();
        for _ in 0..5_000 {
            for a in sample_gaussian_state(4, &mut rng).unwrap().amps() {
                re.push(a.re);
                im.push(a.im);
            }
        }
        let target = 1.0 / 32.0;
        assert!((re.variance() / target - 1.0).abs() < 0.05);
        assert!((im.variance() / target - 1.0).abs() < 0.05);
    }

    #[test]
    fn porter_thomas_statistics() {
        let mut rng = RandomStream::new(4);
        let n = 10;
        // one outcome per state keeps the samples independent
        let xs: Vec<f64> = (0..10_000)
            .map(|i| {
                let s = sample_gaussian_state(n, &mut rng)
                    .unwrap()
                    .normalized()
                    .unwrap();
                1024.0 * s.probability(i % 1024)
            })
            .collect();
        let p = ks_p_value(&xs, |x| 1.0 - (-x).exp());
        assert!(p > 1e-3, "KS p = {p}");
    }

    #[test]
    fn haar_state_moments() {
        let mut rng = RandomStream::new(5);
        for n in [3usize, 6] {
            let dim = 1usize << n;
            let mut m2 = MeanAcc::default();
            let mut m4 = MeanAcc::default();
            for _ in 0..20_000 {
                let s = sample_haar_state(n, &mut rng).unwrap();
                let p = s.probability(0);
                m2.push(p);
                m4.push(p * p);
            }
            let d = dim as f64;
            assert!((m2.mean() - 1.0 / d).abs() < 3.0 * m2.stderr());
            assert!((m4.mean() - 2.0 / (d * (d + 1.0))).abs() < 3.0 * m4.stderr());
        }
    }

    #[test]
    fn collision_probability_at_n6() {
        let mut rng = RandomStream::new(6);
        let mut acc = MeanAcc::default();
        for _ in 0..20_000 {
            let s = sample_haar_state(6, &mut rng).unwrap();
            acc.push(s.amps().iter().map(|a| a.norm_sqr().powi(2)).sum());
        }
        let expect = 2.0 / 65.0;
        assert!((acc.mean() - expect).abs() < 3.0 * acc.stderr());
    }

    #[test]
    fn overlap_with_fixed_state() {
        let mut rng = RandomStream::new(7);
        let phi = sample_haar_state(3, &mut rng).unwrap();
        let mut acc = MeanAcc::default();
        for _ in 0..50_000 {
            let psi = sample_haar_state(3, &mut rng).unwrap();
            acc.push(crate::state::inner_product(&phi, &psi).unwrap().norm_sqr());
        }
        assert!((acc.mean() - 0.125).abs() < 3.0 * acc.stderr());
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = RandomStream::new(8);
        for n in 1..=6 {
            let u = sample_haar_unitary(n, &mut rng).unwrap();
            let d = 1usize << n;
            assert!((u.adjoint() * &u - DMatrix::identity(d, d)).norm() < 1e-10);
        }
        assert!(sample_haar_unitary(7, &mut rng).is_err());
    }

    #[test]
    fn haar_unitary_first_moment_and_columns() {
        let mut rng = RandomStream::new(9);
        let mut acc = MeanAcc::default();
        let mut pt = Vec::new();
        for i in 0..20_000 {
            let u = sample_haar_unitary(3, &mut rng).unwrap();
            acc.push(u[(0, 0)].norm_sqr());
            pt.push(8.0 * u[(i % 8, 0)].norm_sqr());
        }
        assert!((acc.mean() - 0.125).abs() < 3.0 * acc.stderr());
        // the first column is a Haar state: 8|⟨z|U|0⟩|² ~ Beta(1, 7) scaled
        let p = ks_p_value(&pt, |x| 1.0 - (1.0 - x / 8.0).max(0.0).powi(7));
        assert!(p > 1e-3, "KS p = {p}");
    }

    #[test]
    fn haar_unitary_left_invariance() {
        // Fixed V: the distribution of |(VU)_{00}|² must match that of |U_{00}|².
        let mut rng = RandomStream::new(10);
        let v = sample_haar_unitary(2, &mut rng).unwrap();
        let xs: Vec<f64> = (0..20_000)
            .map(|_| (&v * sample_haar_unitary(2, &mut rng).unwrap())[(0, 0)].norm_sqr())
            .collect();
        let p = ks_p_value(&xs, |x| 1.0 - (1.0 - x).max(0.0).powi(3));
        assert!(p > 1e-3, "KS p = {p}");
    }

    #[test]
    fn su2_angles() {
        let mut rng = RandomStream::new(11);
        let mut acc = MeanAcc::default();
        let mut xs = Vec::new();
        for _ in 0..20_000 {
            let (t, p, l) = sample_haar_su2_angles(&mut rng);
            let m = u3_matrix(t, p, l);
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            assert!((det.norm() - 1.0).abs() < 1e-12);
            let p00 = m[0][0].norm_sqr();
            acc.push(p00);
            xs.push(p00);
        }
        assert!((acc.mean() - 0.5).abs() < 3.0 * acc.stderr());
        assert!(ks_p_value(&xs, |x| x.clamp(0.0, 1.0)) > 1e-3);
    }
}
