//! Dense linear algebra over F₂ with rows packed into `u64` words.
//!
//! Column `j` of a row is bit `j`, so column 0 is the least-significant bit.

use crate::rng::RandomStream;

/// Row-major binary matrix with at most 64 columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<u64>,
}

impl BitMatrix {
    pub fn new(cols: usize, rows: Vec<u64>) -> Self {
        assert!(cols <= 64);
        let mask = col_mask(cols);
        assert!(
            rows.iter().all(|r| r & !mask == 0),
            "row wider than {cols} columns"
        );
        Self { cols, rows }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(cols, vec![0; rows])
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, (0..n).map(|i| 1u64 << i).collect())
    }

    pub fn random(rows: usize, cols: usize, rng: &mut RandomStream) -> Self {
        let mask = col_mask(cols);
        Self::new(cols, (0..rows).map(|_| rng.next_u64() & mask).collect())
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r] >> c & 1 == 1
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().1.len()
    }

    /// Reduced row echelon form (pivots in increasing column order, each pivot
    /// column zero outside its row) and the pivot columns. Zero rows are
    /// dropped.
    pub fn rref(mut self) -> (BitMatrix, Vec<usize>) {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let bit = 1u64 << c;
            let Some(p) = (r..self.rows.len()).find(|&i| self.rows[i] & bit != 0) else {
                continue;
            };
            self.rows.swap(r, p);
            let pivot_row = self.rows[r];
            for (i, row) in self.rows.iter_mut().enumerate() {
                if i != r && *row & bit != 0 {
                    *row ^= pivot_row;
                }
            }
            pivots.push(c);
            r += 1;
            if r == self.rows.len() {
                break;
            }
        }
        self.rows.truncate(r);
        (self, pivots)
    }

    /// Row space, enumerated (small dimensions only).
    pub fn span(&self) -> Vec<u64> {
        let k = self.rows.len();
        assert!(k <= 20);
        (0..1u64 << k)
            .map(|c| {
                self.rows
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| c >> i & 1 == 1)
                    .fold(0, |acc, (_, r)| acc ^ r)
            })
            .collect()
    }
}

fn col_mask(cols: usize) -> u64 {
    if cols == 64 {
        u64::MAX
    } else {
        (1u64 << cols) - 1
    }
}

/// Number of `k`-dimensional subspaces of F₂ⁿ.
pub fn gaussian_binomial2(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k)
        .map(|i| ((1u128 << (n - i)) - 1) as f64 / ((1u128 << (i + 1)) - 1) as f64)
        .product()
}
