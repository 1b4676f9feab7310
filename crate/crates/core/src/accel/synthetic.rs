//! Affine contractions `G(u) = A u + b` with a prescribed spectral norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FixedPointMap, OperatorError};
use crate::linalg::InnerProduct;
use crate::CoeffVector;

/// Dense affine map on `R^n` measured in the Euclidean norm.
#[derive(Debug, Clone)]
pub struct AffineMap {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    ip: InnerProduct,
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    while q.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for qi in &q {
                let d: f64 = qi.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(qi) {
                    *x -= d * y;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            q.push(v);
        }
    }
    q
}

impl AffineMap {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Self {
        let n = b.len();
        assert!(a.len() == n && a.iter().all(|r| r.len() == n), "A must be n × n");
        Self {
            a,
            b,
            ip: InnerProduct::euclidean(n),
        }
    }

    /// `A = r U diag(σ) Vᵀ` with random orthogonal `U`, `V`, `σ_1 = 1` and the
    /// other singular values uniform in `[0.1, 1]`, so `‖A‖₂ = r`.
    pub fn random_contraction(n: usize, r: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_orthogonal(n, &mut rng);
        let v = random_orthogonal(n, &mut rng);
        let sigma: Vec<f64> = (0..n)
            .map(|i| if i == 0 { 1.0 } else { rng.random_range(0.1..1.0) })
            .collect();
        let mut a = vec![vec![0.0; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, aij) in row.iter_mut().enumerate() {
                *aij = r * (0..n).map(|l| u[l][i] * sigma[l] * v[l][j]).sum::<f64>();
            }
        }
        let b = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        Self::new(a, b)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn apply_linear(&self, u: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .map(|row| row.iter().zip(u).map(|(x, y)| x * y).sum())
            .collect()
    }
}

impl FixedPointMap for AffineMap {
    fn apply(&self, u: &[f64]) -> Result<CoeffVector, OperatorError> {
        if u.len() != self.dim() {
            return Err(OperatorError(format!(
                "expected {} entries, got {}",
                self.dim(),
                u.len()
            )));
        }
        let mut out = self.apply_linear(u);
        for (o, b) in out.iter_mut().zip(&self.b) {
            *o += b;
        }
        Ok(out.into())
    }

    fn inner_product(&self) -> &InnerProduct {
        &self.ip
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_is_prescribed() {
        let map = AffineMap::random_contraction(8, 0.7, 3);
        // power iteration on AᵀA
        let mut x = vec![1.0; 8];
        let mut est = 0.0;
        for _ in 0..500 {
            let y = map.apply_linear(&x);
            let at: Vec<f64> = (0..8)
                .map(|j| (0..8).map(|i| map.matrix()[i][j] * y[i]).sum())
                .collect();
            let n = at.iter().map(|v| v * v).sum::<f64>().sqrt();
            est = n.sqrt();
            x = at.iter().map(|v| v / n).collect();
        }
        assert!((est - 0.7).abs() < 1e-8, "{est}");
    }
}
