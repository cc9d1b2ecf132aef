//! The scale operator `S`: spectrum, projectors, powers, and the class of
//! super-polynomially decaying test functions that weight the seminorms.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::operator::Operator;

/// Generator of the eigenvalue sequence `s_l`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumKind {
    /// `s_l = 1 + l`.
    ShiftedInteger,
    /// `s_l = (1 + l)^p` for a positive exponent `p`.
    PowerLaw { exponent: f64 },
    /// Eigenvalues given verbatim; no tail information beyond the list.
    Explicit(Vec<f64>),
}

/// Multiplicity layout of the levels.
#[derive(Debug, Clone, PartialEq)]
pub enum Degeneracy {
    /// Every level is simple.
    Simple,
    /// Explicit per-level multiplicities.
    PerLevel(Vec<usize>),
}

/// Spectrum of `S`: positive, nondecreasing eigenvalues with per-level
/// multiplicities, truncated to a finite ambient space.
#[derive(Debug, Clone)]
pub struct Spectrum {
    kind: SpectrumKind,
    values: Vec<f64>,
    degeneracy: Vec<usize>,
    /// Eigenvalue repeated per basis index, level by level.
    expanded: Vec<f64>,
    /// First basis index of each level (plus the ambient dim as sentinel).
    offsets: Vec<usize>,
}

impl Spectrum {
    pub fn kind(&self) -> &SpectrumKind {
        &self.kind
    }

    pub fn level_count(&self) -> usize {
        self.values.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.expanded.len()
    }

    /// Eigenvalue of level `l`.
    pub fn value(&self, l: usize) -> f64 {
        self.values[l]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn degeneracy(&self, l: usize) -> usize {
        self.degeneracy[l]
    }

    pub fn degeneracies(&self) -> &[usize] {
        &self.degeneracy
    }

    /// Eigenvalues repeated with multiplicity, one entry per basis index.
    pub fn expanded(&self) -> &[f64] {
        &self.expanded
    }

    /// Basis-index range of level `l`.
    pub fn level_range(&self, l: usize) -> std::ops::Range<usize> {
        self.offsets[l]..self.offsets[l + 1]
    }

    fn check_level(&self, l: usize) -> Result<()> {
        if l >= self.level_count() {
            return Err(CoreError::LevelOutOfRange {
                level: l,
                count: self.level_count(),
            });
        }
        Ok(())
    }

    /// Diagonal of `S^k` per basis index; negative `k` uses the bounded
    /// inverse.
    pub fn power_diag(&self, k: i32) -> Vec<f64> {
        self.expanded.iter().map(|&s| s.powi(k)).collect()
    }

    /// `S^k` as a dense diagonal matrix.
    pub fn power_matrix(&self, k: i32) -> Operator {
        diag_real(&self.power_diag(k))
    }

    /// 0/1 diagonal of the cumulative projector `Q_L` onto levels `<= L`.
    pub fn projector_diag(&self, level: usize) -> Result<Vec<f64>> {
        self.check_level(level)?;
        let cut = self.offsets[level + 1];
        Ok((0..self.ambient_dim())
            .map(|i| if i < cut { 1.0 } else { 0.0 })
            .collect())
    }

    /// Cumulative projector `Q_L` as a dense matrix.
    pub fn cumulative_projector(&self, level: usize) -> Result<Operator> {
        Ok(diag_real(&self.projector_diag(level)?))
    }

    /// `s_L^+ = sqrt(sum_{l<=L} s_l^2)`, multiplicities counted.
    pub fn sigma_plus(&self, level: usize) -> Result<f64> {
        self.check_level(level)?;
        let cut = self.offsets[level + 1];
        Ok(self.expanded[..cut].iter().map(|s| s * s).sum::<f64>().sqrt())
    }

    /// `s_L^- = sqrt(sum_{l<=L} s_l^{-2})`, multiplicities counted.
    pub fn sigma_minus(&self, level: usize) -> Result<f64> {
        self.check_level(level)?;
        let cut = self.offsets[level + 1];
        Ok(self.expanded[..cut]
            .iter()
            .map(|s| 1.0 / (s * s))
            .sum::<f64>()
            .sqrt())
    }

    /// `sqrt(sum_{k>L} s_k^{-2n})` over the *infinite* tail, for generators
    /// whose tail is a closed-form power sum. Explicit spectra carry no tail
    /// information and are rejected, as are generators whose inverse powers
    /// are not square-summable.
    pub fn tail_l2(&self, n: u32, level: usize) -> Result<f64> {
        self.check_level(level)?;
        if n == 0 {
            return Err(CoreError::DivergentTail {
                reason: "n = 0 sums infinitely many ones".into(),
            });
        }
        let p = match &self.kind {
            SpectrumKind::ShiftedInteger => 2.0 * f64::from(n),
            SpectrumKind::PowerLaw { exponent } => 2.0 * f64::from(n) * exponent,
            SpectrumKind::Explicit(_) => {
                return Err(CoreError::DivergentTail {
                    reason: "explicit spectrum has no closed-form tail".into(),
                })
            }
        };
        if p <= 1.0 {
            return Err(CoreError::DivergentTail {
                reason: format!("tail exponent {p} <= 1 fails the comparison test"),
            });
        }
        // Tail over levels k >= L+1 with s_k = (1+k)^q is the Hurwitz sum
        // zeta(p, L+2).
        Ok(hurwitz_zeta(p, (level + 2) as f64).sqrt())
    }
}

fn diag_real(d: &[f64]) -> Operator {
    let n = d.len();
    Operator::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(d[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Hurwitz zeta `sum_{m>=0} (a+m)^{-p}` for `p > 1`, via direct summation
/// plus Euler-Maclaurin tail corrections.
fn hurwitz_zeta(p: f64, a: f64) -> f64 {
    let cut = 20_000usize;
    let mut sum = 0.0;
    for m in 0..cut {
        sum += (a + m as f64).powf(-p);
    }
    let x = a + cut as f64;
    sum += x.powf(1.0 - p) / (p - 1.0);
    sum += 0.5 * x.powf(-p);
    sum += p * x.powf(-p - 1.0) / 12.0;
    sum -= p * (p + 1.0) * (p + 2.0) * x.powf(-p - 3.0) / 720.0;
    sum
}

/// Build a spectrum, validating positivity and monotonicity.
pub fn make_spectrum(
    kind: SpectrumKind,
    level_count: usize,
    degeneracy: Degeneracy,
) -> Result<Spectrum> {
    if level_count == 0 {
        return Err(CoreError::Param("level_count must be >= 1".into()));
    }
    let values: Vec<f64> = match &kind {
        SpectrumKind::ShiftedInteger => (0..level_count).map(|l| 1.0 + l as f64).collect(),
        SpectrumKind::PowerLaw { exponent } => {
            if *exponent <= 0.0 {
                return Err(CoreError::Param(format!(
                    "power-law exponent must be positive, got {exponent}"
                )));
            }
            (0..level_count)
                .map(|l| (1.0 + l as f64).powf(*exponent))
                .collect()
        }
        SpectrumKind::Explicit(vals) => {
            if vals.len() != level_count {
                return Err(CoreError::Param(format!(
                    "explicit spectrum has {} values, expected {level_count}",
                    vals.len()
                )));
            }
            vals.clone()
        }
    };
    for (i, &v) in values.iter().enumerate() {
        if !(v > 0.0) {
            return Err(CoreError::NonPositiveEigenvalue { index: i, value: v });
        }
        if i > 0 && v < values[i - 1] {
            return Err(CoreError::NotMonotone {
                index: i,
                previous: values[i - 1],
                value: v,
            });
        }
    }
    let degeneracy = match degeneracy {
        Degeneracy::Simple => vec![1; level_count],
        Degeneracy::PerLevel(d) => {
            if d.len() != level_count {
                return Err(CoreError::Param(format!(
                    "degeneracy has {} entries, expected {level_count}",
                    d.len()
                )));
            }
            if let Some(i) = d.iter().position(|&x| x == 0) {
                return Err(CoreError::Param(format!("degeneracy d_{i} must be positive")));
            }
            d
        }
    };
    let mut offsets = Vec::with_capacity(level_count + 1);
    let mut expanded = Vec::new();
    offsets.push(0);
    for (l, &d) in degeneracy.iter().enumerate() {
        expanded.extend(std::iter::repeat(values[l]).take(d));
        offsets.push(expanded.len());
    }
    Ok(Spectrum {
        kind,
        values,
        degeneracy,
        expanded,
        offsets,
    })
}

/// Decay family of a test function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayFamily {
    /// `f(x) = exp(-gamma x)`.
    Exp,
    /// `f(x) = exp(-gamma x^2)`.
    Gauss,
}

/// A positive bounded weight decaying faster than any inverse power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub family: DecayFamily,
    pub gamma: f64,
}

impl TestFunction {
    pub fn new(family: DecayFamily, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(CoreError::Param(format!(
                "test-function rate must be positive, got {gamma}"
            )));
        }
        Ok(Self { family, gamma })
    }

    pub fn exp(gamma: f64) -> Result<Self> {
        Self::new(DecayFamily::Exp, gamma)
    }

    pub fn gauss(gamma: f64) -> Result<Self> {
        Self::new(DecayFamily::Gauss, gamma)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.family {
            DecayFamily::Exp => (-self.gamma * x).exp(),
            DecayFamily::Gauss => (-self.gamma * x * x).exp(),
        }
    }

    /// `f(S)` on the diagonal, per basis index.
    pub fn diag(&self, spec: &Spectrum) -> Vec<f64> {
        spec.expanded().iter().map(|&s| self.eval(s)).collect()
    }
}

/// `f(S)` as a dense diagonal matrix.
pub fn f_of_s(f: &TestFunction, spec: &Spectrum) -> Operator {
    diag_real(&f.diag(spec))
}

/// Smallest level count for which every configured weight crushes the top
/// level: `f(s_{D-1}) * s_{D-1}^(k_max+n_max) < 1e-12`. Used to size the
/// ambient truncation so discarded tails are invisible in every evaluated
/// seminorm.
pub fn choose_level_count(
    kind: &SpectrumKind,
    fs: &[TestFunction],
    k_max: u32,
    n_max: u32,
    min_levels: usize,
) -> Result<usize> {
    let power = (k_max + n_max) as i32;
    let value = |l: usize| -> f64 {
        match kind {
            SpectrumKind::ShiftedInteger => 1.0 + l as f64,
            SpectrumKind::PowerLaw { exponent } => (1.0 + l as f64).powf(*exponent),
            SpectrumKind::Explicit(v) => v[l.min(v.len() - 1)],
        }
    };
    let crushes = |l: usize| {
        let s = value(l);
        fs.iter().all(|f| f.eval(s) * s.powi(power) < 1e-12)
    };
    for d in min_levels.max(1)..100_000 {
        if crushes(d - 1) {
            return Ok(d);
        }
    }
    Err(CoreError::Param(
        "no truncation below 100000 levels satisfies the tail rule".into(),
    ))
}

/// Check the truncation rule for an already-built spectrum.
pub fn truncation_ok(spec: &Spectrum, fs: &[TestFunction], k_max: u32, n_max: u32) -> bool {
    let s = spec.value(spec.level_count() - 1);
    let power = (k_max + n_max) as i32;
    fs.iter().all(|f| f.eval(s) * s.powi(power) < 1e-12)
}
