//! Deterministic random operators.
//!
//! Three profiles matter downstream. `dense` samples generic bounded
//! operators. `smooth` damps entries by `exp(-kappa (s_i + s_j))`, the finite
//! stand-in for operators all of whose weighted seminorms stay moderate; the
//! convergence suites sample observables here, since a dense matrix with flat
//! entries escapes every seminorm ball as the truncation grows. `localized`
//! compresses a dense sample to the lowest levels.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::operator::{sandwich_diag, Operator};
use crate::seminorm::op_norm;
use crate::spectral::Spectrum;

pub struct OperatorSampler {
    rng: ChaCha8Rng,
}

impl OperatorSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Dense matrix with entries uniform in the complex unit square.
    pub fn dense_dim(&mut self, dim: usize) -> Operator {
        let rng = &mut self.rng;
        DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
        })
    }

    pub fn dense(&mut self, spec: &Spectrum) -> Operator {
        self.dense_dim(spec.ambient_dim())
    }

    /// Random Hermitian matrix scaled to the requested operator norm.
    pub fn hermitian(&mut self, dim: usize, norm: f64) -> Operator {
        let a = self.dense_dim(dim);
        let mut h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
        let current = op_norm(&h);
        if current > 0.0 {
            h *= Complex64::new(norm / current, 0.0);
        }
        h
    }

    /// `exp(-kappa S) Y exp(-kappa S)` for a dense sample `Y`.
    pub fn smooth(&mut self, spec: &Spectrum, kappa: f64) -> Operator {
        let y = self.dense(spec);
        let g: Vec<f64> = spec.expanded().iter().map(|&s| (-kappa * s).exp()).collect();
        sandwich_diag(&g, &y, &g)
    }

    /// `Q_m Y Q_m` for a dense sample `Y`.
    pub fn localized(&mut self, spec: &Spectrum, level: usize) -> Operator {
        let y = self.dense(spec);
        let q = spec
            .projector_diag(level)
            .expect("localization level within spectrum");
        sandwich_diag(&q, &y, &q)
    }
}
