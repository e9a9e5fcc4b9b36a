//! Banded LU factorization without pivoting, for the diagonally dominant /
//! symmetric positive definite systems of the radial implicit step.

use crate::error::{Error, Result};

/// Square band matrix with `lower` sub- and `upper` super-diagonals.
/// Entry `(i, j)` is stored at `data[i * width + (j + lower - i)]`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        BandMatrix {
            n,
            lower,
            upper,
            data: vec![0.0; n * (lower + upper + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.lower >= i && j <= i + self.upper && i < self.n && j < self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[i * self.width() + (j + self.lower - i)]
        } else {
            0.0
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside the band");
        let w = self.width();
        self.data[i * w + (j + self.lower - i)] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place Doolittle factorization. Fails if a pivot is not safely nonzero.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku, w) = (self.n, self.lower, self.upper, self.width());
        let diag: Vec<f64> = (0..n).map(|k| self.data[k * w + kl].abs()).collect();
        for k in 0..n {
            let pivot = self.data[k * w + kl];
            if !(pivot.abs() > 1e-12 * diag[k]) || !pivot.is_finite() {
                return Err(Error::Singular(format!("pivot {pivot:e} at row {k}")));
            }
            for i in k + 1..=(k + kl).min(n - 1) {
                let lik = self.data[i * w + (k + kl - i)] / pivot;
                self.data[i * w + (k + kl - i)] = lik;
                for j in k + 1..=(k + ku).min(n - 1) {
                    let ukj = self.data[k * w + (j + kl - k)];
                    self.data[i * w + (j + kl - i)] -= lik * ukj;
                }
            }
        }
        Ok(BandLu { m: self })
    }
}

/// Factors `L U` packed in band storage.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
}

impl BandLu {
    pub fn size(&self) -> usize {
        self.m.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let BandMatrix { n, lower: kl, upper: ku, .. } = self.m;
        let w = kl + ku + 1;
        let d = &self.m.data;
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let s: f64 = (lo..i).map(|j| d[i * w + (j + kl - i)] * b[j]).sum();
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let hi = (i + ku).min(n - 1);
            let s: f64 = (i + 1..=hi).map(|j| d[i * w + (j + kl - i)] * b[j]).sum();
            b[i] = (b[i] - s) / d[i * w + kl];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_random_dominant_pentadiagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let mut a = BandMatrix::zeros(n, 2, 2);
        for i in 0..n {
            for j in i.saturating_sub(2)..=(i + 2).min(n - 1) {
                let v = if i == j { 10.0 } else { rng.gen_range(-1.0..1.0) };
                a.add(i, j, v);
            }
        }
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut b = a.mul_vec(&x);
        a.factor().unwrap().solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = BandMatrix::zeros(4, 1, 1);
        assert!(matches!(a.factor(), Err(Error::Singular(_))));
    }
}
