//! Conjugation-membership chains: ratios `|S^{-n} X S^n| / |X|`, projected
//! elements, density approximants, and the commutator criterion that places
//! localized lattice operators in the chain.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::operator::{check_square_match, sandwich_diag, Operator};
use crate::seminorm::{op_norm, seminorm_fk};
use crate::spectral::{Spectrum, TestFunction};

fn check_ambient(x: &Operator, spec: &Spectrum) -> Result<()> {
    if x.nrows() != spec.ambient_dim() {
        return Err(CoreError::DimMismatch {
            left: x.nrows(),
            right: spec.ambient_dim(),
        });
    }
    Ok(())
}

/// `T_S^n(X) = S^{-n} X S^n`.
pub fn conjugate_ts(x: &Operator, spec: &Spectrum, n: u32) -> Result<Operator> {
    check_ambient(x, spec)?;
    let neg = spec.power_diag(-(n as i32));
    let pos = spec.power_diag(n as i32);
    Ok(sandwich_diag(&neg, x, &pos))
}

/// Conjugation ratios of one operator.
#[derive(Debug, Clone)]
pub struct MembershipRecord {
    /// `|T_S(X)| / |X|`: the smallest chain parameter admitting `X`.
    pub alpha_star: f64,
    /// `|T_S^n(X)| / |X|` for `n = 1..=n_max`.
    pub iterated: Vec<f64>,
    /// Max of the iterated ratios.
    pub theta_hat: f64,
    pub bounded_flag: bool,
}

impl MembershipRecord {
    /// Chain semantics: `X` sits in the set with parameter `alpha` iff
    /// `alpha >= alpha_star`.
    pub fn member_of(&self, alpha: f64) -> bool {
        alpha >= self.alpha_star
    }
}

/// Conjugation ratios up to `n_max`.
pub fn membership(x: &Operator, spec: &Spectrum, n_max: u32) -> Result<MembershipRecord> {
    check_ambient(x, spec)?;
    let norm = op_norm(x);
    if norm == 0.0 {
        return Err(CoreError::ZeroOperator);
    }
    let mut iterated = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let t = conjugate_ts(x, spec, n)?;
        iterated.push(op_norm(&t) / norm);
    }
    let alpha_star = iterated.first().copied().unwrap_or(1.0);
    let theta_hat = iterated.iter().fold(0.0f64, |a, &b| a.max(b));
    let bounded_flag = iterated.iter().all(|r| r.is_finite());
    Ok(MembershipRecord {
        alpha_star,
        iterated,
        theta_hat,
        bounded_flag,
    })
}

/// Checks on a projected element `X_L = Q_L X Q_L`.
#[derive(Debug, Clone)]
pub struct ProjectedMembership {
    pub level: usize,
    /// `s_L^+ s_L^-`, the guaranteed chain parameter of `X_L`.
    pub bound: f64,
    pub alpha_star: f64,
    pub norm_xl: f64,
    /// Per `n = 1..=n_max`: support residual of `T_S^n(X_L)` outside the
    /// `Q_L` corner.
    pub support_residuals: Vec<f64>,
    /// Per `n`: `alpha_star(T_S^n(X_L))`.
    pub iterated_alpha: Vec<f64>,
    /// Per `n`: `(|T_S^n(X_L)|, bound^n * |X_L|)`.
    pub norm_vs_bound: Vec<(f64, f64)>,
}

impl ProjectedMembership {
    pub fn all_hold(&self, support_tol: f64, slack: f64) -> bool {
        self.alpha_star <= self.bound * (1.0 + slack)
            && self.support_residuals.iter().all(|&r| r <= support_tol)
            && self
                .iterated_alpha
                .iter()
                .all(|&a| a <= self.bound * (1.0 + slack))
            && self
                .norm_vs_bound
                .iter()
                .all(|&(n, b)| n <= b * (1.0 + slack))
    }
}

/// Project `X` to the lowest levels and measure every chain property the
/// projection guarantees.
pub fn projected_membership(
    x: &Operator,
    level: usize,
    spec: &Spectrum,
    n_max: u32,
) -> Result<ProjectedMembership> {
    check_ambient(x, spec)?;
    let q = spec.projector_diag(level)?;
    let xl = sandwich_diag(&q, x, &q);
    let norm_xl = op_norm(&xl);
    if norm_xl == 0.0 {
        return Err(CoreError::ZeroOperator);
    }
    let bound = spec.sigma_plus(level)? * spec.sigma_minus(level)?;
    let alpha_star = op_norm(&conjugate_ts(&xl, spec, 1)?) / norm_xl;
    let mut support_residuals = Vec::new();
    let mut iterated_alpha = Vec::new();
    let mut norm_vs_bound = Vec::new();
    for n in 1..=n_max {
        let tn = conjugate_ts(&xl, spec, n)?;
        let corner = sandwich_diag(&q, &tn, &q);
        support_residuals.push(op_norm(&(&tn - &corner)));
        let tn_norm = op_norm(&tn);
        iterated_alpha.push(op_norm(&conjugate_ts(&tn, spec, 1)?) / tn_norm);
        norm_vs_bound.push((tn_norm, bound.powi(n as i32) * norm_xl));
    }
    Ok(ProjectedMembership {
        level,
        bound,
        alpha_star,
        norm_xl,
        support_residuals,
        iterated_alpha,
        norm_vs_bound,
    })
}

/// A chain element within `eps` of `X` in one seminorm.
#[derive(Debug, Clone)]
pub struct DensityApproximant {
    /// Smallest projection level reaching `eps`.
    pub level: usize,
    /// Chain parameter `s_L^+ s_L^-` of the approximant.
    pub beta: f64,
    pub residual: f64,
}

/// Scan projection levels strictly below the truncation for the first with
/// `|X - Q_L X Q_L|^{f,k} < eps`. The top level is excluded: its projector
/// is the identity and approximates vacuously. The regularizing power `n`
/// certifies the square-summability hypothesis behind the scan.
pub fn density_approximant(
    x: &Operator,
    eps: f64,
    f: &TestFunction,
    k: u32,
    spec: &Spectrum,
    n: u32,
) -> Result<DensityApproximant> {
    check_ambient(x, spec)?;
    spec.tail_l2(n, 0)?;
    let mut best = f64::INFINITY;
    for level in 0..spec.level_count() - 1 {
        let q = spec.projector_diag(level)?;
        let xl = sandwich_diag(&q, x, &q);
        let residual = seminorm_fk(&(x - &xl), f, k, spec)?;
        best = best.min(residual);
        if residual < eps {
            let beta = spec.sigma_plus(level)? * spec.sigma_minus(level)?;
            return Ok(DensityApproximant {
                level,
                beta,
                residual,
            });
        }
    }
    Err(CoreError::NotReachable { eps, best })
}

/// Outcome of the commutator criterion `[X, S] = B X`.
#[derive(Debug, Clone)]
pub struct CommutatorReport {
    /// `|[X, S] - B X|`; the criterion applies when this is tiny.
    pub residual: f64,
    pub applies: bool,
    /// `|1 + S^{-1} B|`: chain parameter certified for `X`.
    pub alpha_hat: f64,
    /// `|1 + S^{-2} B S^2|`: chain parameter certified for `T_S(X)`.
    pub beta_hat: f64,
    pub alpha_star_x: f64,
    pub alpha_star_tsx: f64,
}

pub const CRITERION_TOL: f64 = 1e-10;

impl CommutatorReport {
    pub fn ensure_applicable(&self) -> Result<()> {
        if !self.applies {
            return Err(CoreError::CriterionNotApplicable {
                residual: self.residual,
                tol: CRITERION_TOL,
            });
        }
        Ok(())
    }

    /// Both certified parameters dominate the measured ratios.
    pub fn bounds_hold(&self, slack: f64) -> bool {
        self.alpha_star_x <= self.alpha_hat * (1.0 + slack)
            && self.alpha_star_tsx <= self.beta_hat * (1.0 + slack)
    }
}

/// Measure `[X, S] - B X` and the chain parameters the criterion certifies.
/// Values are always returned; `applies` records whether the residual is
/// small enough for the certificates to be meaningful.
pub fn commutator_criterion(x: &Operator, b: &Operator, spec: &Spectrum) -> Result<CommutatorReport> {
    check_ambient(x, spec)?;
    check_square_match(x, b)?;
    let s = spec.power_matrix(1);
    let lhs = x * &s - &s * x;
    let residual = op_norm(&(&lhs - b * x));
    let norm_x = op_norm(x);
    if norm_x == 0.0 {
        return Err(CoreError::ZeroOperator);
    }
    let applies = residual <= CRITERION_TOL * norm_x.max(1.0);
    let sinv = spec.power_diag(-1);
    let ones = vec![1.0; spec.ambient_dim()];
    let id = Operator::identity(spec.ambient_dim(), spec.ambient_dim());
    let alpha_hat = op_norm(&(&id + sandwich_diag(&sinv, b, &ones)));
    let s2 = spec.power_diag(2);
    let s2inv = spec.power_diag(-2);
    let beta_hat = op_norm(&(&id + sandwich_diag(&s2inv, b, &s2)));
    let tsx = conjugate_ts(x, spec, 1)?;
    let alpha_star_x = op_norm(&tsx) / norm_x;
    let norm_tsx = op_norm(&tsx);
    let alpha_star_tsx = if norm_tsx == 0.0 {
        0.0
    } else {
        op_norm(&conjugate_ts(&tsx, spec, 1)?) / norm_tsx
    };
    Ok(CommutatorReport {
        residual,
        applies,
        alpha_hat,
        beta_hat,
        alpha_star_x,
        alpha_star_tsx,
    })
}

/// Scaling invariance helper used by tests: `alpha_star(c X) = alpha_star(X)`.
pub fn rescale(x: &Operator, c: f64) -> Operator {
    x * Complex64::new(c, 0.0)
}
