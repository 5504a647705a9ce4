//! Running means and the goodness-of-fit statistics used by the self-tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Welford accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanAcc {
    k: u64,
    mean: f64,
    m2: f64,
}

impl MeanAcc {
    pub fn push(&mut self, x: f64) {
        self.k += 1;
        let d = x - self.mean;
        self.mean += d / self.k as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.k
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance with the `k - 1` divisor.
    pub fn variance(&self) -> f64 {
        if self.k < 2 {
            return 0.0;
        }
        self.m2 / (self.k - 1) as f64
    }

    pub fn stderr(&self) -> f64 {
        if self.k < 2 {
            return 0.0;
        }
        (self.variance() / self.k as f64).sqrt()
    }
}

impl FromIterator<f64> for MeanAcc {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = MeanAcc::default();
        iter.into_iter().for_each(|x| acc.push(x));
        acc
    }
}

/// Upper-tail p-value of Pearson's chi-square statistic for observed counts
/// against expected probabilities.
pub fn chi_square_p(counts: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(counts.len(), probs.len());
    let total: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&c, &p)| {
            let e = p * total as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let dof = probs.iter().filter(|&&p| p > 0.0).count() - 1;
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}

/// Two-sided one-sample Kolmogorov–Smirnov p-value (asymptotic).
pub fn ks_p_value(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let k = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / k).max((i + 1) as f64 / k - f)
        })
        .fold(0.0, f64::max);
    let root = k.sqrt();
    let lambda = (root + 0.12 + 0.11 / root) * d;
    kolmogorov_q(lambda)
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_direct() {
        let acc: MeanAcc = [1.0, 0.0, -1.0].into_iter().collect();
        assert_eq!(acc.mean(), 0.0);
        assert!((acc.stderr() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn chi_square_perfect_fit() {
        assert!(chi_square_p(&[25, 25, 25, 25], &[0.25; 4]) > 0.99);
        assert!(chi_square_p(&[100, 0, 0, 0], &[0.25; 4]) < 1e-10);
    }

    #[test]
    fn ks_detects_mismatch() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_p_value(&xs, |x| x) > 0.99);
        assert!(ks_p_value(&xs, |x| x * x) < 1e-6);
    }
}
