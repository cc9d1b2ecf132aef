//! Weighted operator seminorms and Cauchy profiling of cutoff-indexed
//! operator sequences.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::operator::{check_square_match, sandwich_diag, Operator};
use crate::spectral::{Spectrum, TestFunction};

/// One seminorm of the grid: `|X|^{f,k}` when `k` is present, the weaker
/// two-sided weight `|f(S) X f(S)|` when absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeminormSpec {
    pub f: TestFunction,
    pub k: Option<u32>,
}

impl SeminormSpec {
    pub fn graph(f: TestFunction, k: u32) -> Self {
        Self { f, k: Some(k) }
    }

    pub fn weak(f: TestFunction) -> Self {
        Self { f, k: None }
    }
}

/// Largest singular value. Diagonal matrices short-circuit to the max entry
/// modulus; otherwise rows and columns whose entries all sit below
/// `1e-18 * max|entry|` are pruned (they perturb the norm by less than
/// `1e-14` relative) and the norm is the square root of the top eigenvalue
/// of the Gram matrix of the remaining block.
pub fn op_norm(x: &Operator) -> f64 {
    debug_assert_eq!(x.nrows(), x.ncols());
    if let Some(m) = diag_max(x) {
        return m;
    }
    let maxabs = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if maxabs == 0.0 {
        return 0.0;
    }
    let tau = 1e-18 * maxabs;
    let rows: Vec<usize> = (0..x.nrows())
        .filter(|&i| (0..x.ncols()).any(|j| x[(i, j)].norm() > tau))
        .collect();
    let cols: Vec<usize> = (0..x.ncols())
        .filter(|&j| (0..x.nrows()).any(|i| x[(i, j)].norm() > tau))
        .collect();
    let block = Operator::from_fn(rows.len(), cols.len(), |i, j| x[(rows[i], cols[j])]);
    // Gram matrix on the smaller side.
    let gram = if block.nrows() <= block.ncols() {
        &block * block.adjoint()
    } else {
        block.adjoint() * &block
    };
    let eig = SymmetricEigen::new(gram);
    eig.eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l))
        .max(0.0)
        .sqrt()
}

/// Max diagonal modulus if the matrix is exactly diagonal, else None.
fn diag_max(x: &Operator) -> Option<f64> {
    let n = x.nrows();
    let mut m = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let v = x[(i, j)];
            if i == j {
                m = m.max(v.norm());
            } else if v.re != 0.0 || v.im != 0.0 {
                return None;
            }
        }
    }
    Some(m)
}

fn check_ambient(x: &Operator, spec: &Spectrum) -> Result<()> {
    if x.nrows() != spec.ambient_dim() || x.ncols() != spec.ambient_dim() {
        return Err(CoreError::DimMismatch {
            left: x.nrows(),
            right: spec.ambient_dim(),
        });
    }
    Ok(())
}

/// `|X|^{f,k} = max(|f(S) X S^k|, |S^k X f(S)|)`. Both arms are computed;
/// the involution swaps them, so continuity tests need the full max.
pub fn seminorm_fk(x: &Operator, f: &TestFunction, k: u32, spec: &Spectrum) -> Result<f64> {
    check_ambient(x, spec)?;
    let fd = f.diag(spec);
    let sk = spec.power_diag(k as i32);
    let arm1 = op_norm(&sandwich_diag(&fd, x, &sk));
    let arm2 = op_norm(&sandwich_diag(&sk, x, &fd));
    Ok(arm1.max(arm2))
}

/// `|X|^f = |f(S) X f(S)|`.
pub fn seminorm_f(x: &Operator, f: &TestFunction, spec: &Spectrum) -> Result<f64> {
    check_ambient(x, spec)?;
    let fd = f.diag(spec);
    Ok(op_norm(&sandwich_diag(&fd, x, &fd)))
}

/// Evaluate a grid entry on `x`.
pub fn eval(spec_norm: &SeminormSpec, x: &Operator, spec: &Spectrum) -> Result<f64> {
    match spec_norm.k {
        Some(k) => seminorm_fk(x, &spec_norm.f, k, spec),
        None => seminorm_f(x, &spec_norm.f, spec),
    }
}

/// Finite-window verdict for a profiled sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Cauchy,
    NotCauchy,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Cauchy => "cauchy",
            Verdict::NotCauchy => "not_cauchy",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Which cutoff pairs a profile evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// Consecutive cutoffs only.
    Adjacent,
    /// Every ordered pair; the default for acceptance-grade reports.
    AllPairs,
}

/// Distance table of one seminorm across cutoff pairs, with the windowed
/// verdict.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub seminorm: SeminormSpec,
    /// `(L, M, distance)` with `L < M`, ordered by (M, L).
    pub pairs: Vec<(usize, usize, f64)>,
    pub verdict: Verdict,
    pub final_distance: f64,
    pub window: usize,
}

impl ConvergenceReport {
    pub fn max_distance(&self) -> f64 {
        self.pairs.iter().map(|p| p.2).fold(0.0, f64::max)
    }
}

pub(crate) fn pair_indices(count: usize, pairing: Pairing) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    match pairing {
        Pairing::Adjacent => {
            for i in 1..count {
                pairs.push((i - 1, i));
            }
        }
        Pairing::AllPairs => {
            for j in 1..count {
                for i in 0..j {
                    pairs.push((i, j));
                }
            }
        }
    }
    pairs
}

/// Windowed verdict over an ordered distance sequence: `Cauchy` when the
/// last `window` distances sit below `tol`, `Inconclusive` when they are
/// still shrinking, `NotCauchy` otherwise. Also returns the final distance.
pub fn verdict_from_distances(distances: &[f64], tol: f64, window: usize) -> (Verdict, f64) {
    let final_distance = *distances.last().unwrap();
    let w = window.min(distances.len());
    let last_max = distances[distances.len() - w..]
        .iter()
        .fold(0.0f64, |a, &b| a.max(b));
    if last_max < tol {
        return (Verdict::Cauchy, final_distance);
    }
    if distances.len() >= 2 * w {
        let prev_max = distances[distances.len() - 2 * w..distances.len() - w]
            .iter()
            .fold(0.0f64, |a, &b| a.max(b));
        if last_max < prev_max {
            return (Verdict::Inconclusive, final_distance);
        }
    }
    (Verdict::NotCauchy, final_distance)
}

/// Profile `d(L, M) = |X_L - X_M|` across cutoff pairs for every seminorm in
/// the grid. The verdict is `Cauchy` when the max distance over the last
/// `window` pairs is below `tol`, `Inconclusive` when still decreasing, and
/// `NotCauchy` otherwise. Deterministic given its inputs.
pub fn cauchy_profile(
    seq: &[(usize, Operator)],
    specs: &[SeminormSpec],
    pairing: Pairing,
    spectrum: &Spectrum,
    tol: f64,
    window: usize,
) -> Result<Vec<ConvergenceReport>> {
    if seq.len() < window + 2 {
        return Err(CoreError::TooFewCutoffs {
            got: seq.len(),
            need: window + 2,
            window,
        });
    }
    for (_, x) in seq {
        check_ambient(x, spectrum)?;
        check_square_match(x, &seq[0].1)?;
    }
    let pairs = pair_indices(seq.len(), pairing);
    // distances[pair][spec]
    let distances: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let diff = &seq[i].1 - &seq[j].1;
            specs
                .iter()
                .map(|sn| eval(sn, &diff, spectrum).expect("dims already checked"))
                .collect()
        })
        .collect();
    let reports = specs
        .iter()
        .enumerate()
        .map(|(si, sn)| {
            let ds: Vec<f64> = distances.iter().map(|row| row[si]).collect();
            let table: Vec<(usize, usize, f64)> = pairs
                .iter()
                .zip(ds.iter())
                .map(|(&(i, j), &d)| (seq[i].0, seq[j].0, d))
                .collect();
            let (verdict, final_distance) = verdict_from_distances(&ds, tol, window);
            ConvergenceReport {
                seminorm: *sn,
                pairs: table,
                verdict,
                final_distance,
                window,
            }
        })
        .collect();
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator;
    use crate::sampler::OperatorSampler;
    use crate::spectral::{make_spectrum, Degeneracy, SpectrumKind};
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn shifted(levels: usize) -> Spectrum {
        make_spectrum(SpectrumKind::ShiftedInteger, levels, Degeneracy::Simple).unwrap()
    }

    #[test]
    fn op_norm_examples() {
        let d = Operator::from_fn(3, 3, |i, j| {
            if i == j {
                Complex64::new((i + 1) as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        assert_relative_eq!(op_norm(&d), 3.0);
        assert_eq!(op_norm(&operator::zeros(4)), 0.0);
        // nilpotent Jordan block [[0,2],[0,0]] has singular values {2, 0}
        let mut n = operator::zeros(2);
        n[(0, 1)] = Complex64::new(2.0, 0.0);
        assert_relative_eq!(op_norm(&n), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn op_norm_matches_power_iteration_oracle() {
        let spec = shifted(8);
        let mut sampler = OperatorSampler::new(11);
        for _ in 0..10 {
            let x = sampler.dense(&spec);
            let direct = op_norm(&x);
            // power iteration on X^dagger X
            let gram = x.adjoint() * &x;
            let mut v = nalgebra::DVector::from_element(8, Complex64::new(1.0, 0.3));
            v /= Complex64::new(v.norm(), 0.0);
            let mut lambda = 0.0;
            for _ in 0..2000 {
                let w = &gram * &v;
                lambda = w.norm();
                v = w / Complex64::new(lambda, 0.0);
            }
            assert_relative_eq!(direct, lambda.sqrt(), epsilon = 1e-8);
        }
    }

    #[test]
    fn seminorm_identity_examples() {
        let spec = shifted(40);
        let f = TestFunction::exp(1.0).unwrap();
        let id = operator::identity(40);
        // k = 0: max_l e^{-s_l} = e^{-1}
        assert_relative_eq!(
            seminorm_fk(&id, &f, 0, &spec).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-14
        );
        // k = 1: max_l s_l e^{-s_l} attained at s_0 = 1
        assert_relative_eq!(
            seminorm_fk(&id, &f, 1, &spec).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-14
        );
        // weak seminorm of the identity: f(s_0)^2
        assert_relative_eq!(
            seminorm_f(&id, &f, &spec).unwrap(),
            (-2.0f64).exp(),
            epsilon = 1e-14
        );
        // weak seminorm of S itself: max_l s_l e^{-2 s_l} = e^{-2}
        let s_mat = spec.power_matrix(1);
        assert_relative_eq!(
            seminorm_f(&s_mat, &f, &spec).unwrap(),
            (-2.0f64).exp(),
            epsilon = 1e-14
        );
        let zero = operator::zeros(40);
        assert_eq!(seminorm_fk(&zero, &f, 2, &spec).unwrap(), 0.0);
        assert_eq!(seminorm_f(&zero, &f, &spec).unwrap(), 0.0);
    }

    #[test]
    fn dim_mismatch_rejected() {
        let spec = shifted(4);
        let f = TestFunction::exp(1.0).unwrap();
        let x = operator::identity(5);
        assert!(matches!(
            seminorm_fk(&x, &f, 0, &spec),
            Err(CoreError::DimMismatch { .. })
        ));
    }

    #[test]
    fn involution_swaps_arms() {
        let spec = shifted(6);
        let f = TestFunction::exp(0.7).unwrap();
        let mut sampler = OperatorSampler::new(3);
        let x = sampler.dense(&spec);
        let xd = x.adjoint();
        // |X*|^{f,k} = |X|^{f,k} because the max runs over both arms
        for k in 0..3 {
            let a = seminorm_fk(&x, &f, k, &spec).unwrap();
            let b = seminorm_fk(&xd, &f, k, &spec).unwrap();
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn seminorm_axioms() {
        let spec = shifted(6);
        let f = TestFunction::exp(1.0).unwrap();
        let mut sampler = OperatorSampler::new(5);
        let x = sampler.dense(&spec);
        let y = sampler.dense(&spec);
        let lam = Complex64::new(-2.5, 1.0);
        let k = 1;
        let nx = seminorm_fk(&x, &f, k, &spec).unwrap();
        let ny = seminorm_fk(&y, &f, k, &spec).unwrap();
        let nxs = seminorm_fk(&(&x * lam), &f, k, &spec).unwrap();
        assert_relative_eq!(nxs, lam.norm() * nx, max_relative = 1e-10);
        let nsum = seminorm_fk(&(&x + &y), &f, k, &spec).unwrap();
        assert!(nsum <= nx + ny + 1e-12);
    }

    #[test]
    fn chained_factorization_bound() {
        // |f(S) A B S^k| <= |f(S) A S^{k+n}| * |S^{-k-n} B S^k|
        let spec = shifted(8);
        let f = TestFunction::exp(1.0).unwrap();
        let mut sampler = OperatorSampler::new(9);
        for _ in 0..5 {
            let a = sampler.dense(&spec);
            let b = sampler.dense(&spec);
            for k in 0..2u32 {
                for n in 1..3u32 {
                    let fd = f.diag(&spec);
                    let sk = spec.power_diag(k as i32);
                    let skn = spec.power_diag((k + n) as i32);
                    let sneg = spec.power_diag(-((k + n) as i32));
                    let lhs = op_norm(&sandwich_diag(&fd, &(&a * &b), &sk));
                    let r1 = op_norm(&sandwich_diag(&fd, &a, &skn));
                    let r2 = op_norm(&sandwich_diag(&sneg, &b, &sk));
                    assert!(lhs <= r1 * r2 * (1.0 + 1e-10), "k={k} n={n}");
                }
            }
        }
    }

    #[test]
    fn constant_sequence_is_cauchy() {
        let spec = shifted(6);
        let f = TestFunction::exp(1.0).unwrap();
        let x = operator::identity(6);
        let seq: Vec<(usize, Operator)> = (0..6).map(|l| (l, x.clone())).collect();
        let reports = cauchy_profile(
            &seq,
            &[SeminormSpec::graph(f, 0)],
            Pairing::AllPairs,
            &spec,
            1e-6,
            3,
        )
        .unwrap();
        assert_eq!(reports[0].verdict, Verdict::Cauchy);
        assert_eq!(reports[0].final_distance, 0.0);
        assert!(reports[0].pairs.iter().all(|p| p.2 == 0.0));
    }

    #[test]
    fn too_few_cutoffs_rejected() {
        let spec = shifted(4);
        let f = TestFunction::exp(1.0).unwrap();
        let x = operator::identity(4);
        let seq = vec![(0, x.clone()), (1, x)];
        assert!(matches!(
            cauchy_profile(
                &seq,
                &[SeminormSpec::graph(f, 0)],
                Pairing::Adjacent,
                &spec,
                1e-6,
                3
            ),
            Err(CoreError::TooFewCutoffs { .. })
        ));
    }

    #[test]
    fn projected_tails_of_smooth_operator_converge() {
        // X_L = Q_L Y Q_L for a smooth-profile Y: the weights crush the tail.
        let spec = shifted(40);
        let f = TestFunction::exp(1.0).unwrap();
        let mut sampler = OperatorSampler::new(17);
        let y = sampler.smooth(&spec, 0.75);
        let seq: Vec<(usize, Operator)> = (10..40)
            .map(|l| {
                let q = spec.projector_diag(l).unwrap();
                (l, sandwich_diag(&q, &y, &q))
            })
            .collect();
        let reports = cauchy_profile(
            &seq,
            &[SeminormSpec::graph(f, 0), SeminormSpec::graph(f, 2)],
            Pairing::AllPairs,
            &spec,
            1e-6,
            3,
        )
        .unwrap();
        for r in &reports {
            assert_eq!(r.verdict, Verdict::Cauchy);
        }
    }
}
