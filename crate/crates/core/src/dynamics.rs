//! Regularized Heisenberg evolutions `alpha_L^t` and the convergence suites
//! run on them: propagator and evolution Cauchy profiles, the weighted
//! hypothesis gate, Taylor reconstruction from the regularized derivation,
//! the ordered triple limit, the integral identity for propagator
//! differences, the three sufficient conditions, and Gibbs-state profiles.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::alpha_sets::membership;
use crate::error::{CoreError, Result};
use crate::hamiltonian::{commutator, HamiltonianFamily};
use crate::operator::{hermiticity_defect, max_abs, sandwich_diag, Operator};
use crate::seminorm::{
    cauchy_profile, eval, op_norm, pair_indices, verdict_from_distances, ConvergenceReport,
    Pairing, SeminormSpec, Verdict,
};

fn sandwich_diag_projected(
    spec: &crate::spectral::Spectrum,
    level: usize,
    x: &Operator,
) -> Result<Operator> {
    let q = spec.projector_diag(level)?;
    Ok(sandwich_diag(&q, x, &q))
}

fn check_observable(fam: &HamiltonianFamily, x: &Operator) -> Result<()> {
    let dim = fam.spectrum().ambient_dim();
    if x.nrows() != dim || x.ncols() != dim {
        return Err(CoreError::DimMismatch {
            left: x.nrows(),
            right: dim,
        });
    }
    Ok(())
}

/// `alpha_L^t(X) = U_L(t) X U_L(t)^dagger`.
pub fn alpha_l(fam: &HamiltonianFamily, cutoff: usize, x: &Operator, t: f64) -> Result<Operator> {
    check_observable(fam, x)?;
    let u = fam.propagator(cutoff, t)?;
    Ok(&u * x * u.adjoint())
}

/// One pair of the `|S^{-n}(U_L - U_M)|` table.
#[derive(Debug, Clone, Copy)]
pub struct UnitaryCauchyRow {
    pub l: usize,
    pub m: usize,
    /// Exact value on the truncation.
    pub exact: f64,
    /// `2 max_{L<k<=M} s_k^{-n} |sin(t h_k / 2)|`, available in the
    /// commuting diagonal kind.
    pub closed_form: Option<f64>,
    /// `2 tail(n, min(L,M))`, available when the spectrum has a closed-form
    /// tail.
    pub tail_bound: Option<f64>,
}

/// `|S^{-n}(U_L - U_M)|` over cutoff pairs, with the diagonal closed form
/// and the square-summable tail bound alongside where they exist.
pub fn unitary_cauchy(
    fam: &HamiltonianFamily,
    n: u32,
    t: f64,
    cutoffs: &[usize],
) -> Result<Vec<UnitaryCauchyRow>> {
    let spec = fam.spectrum();
    let sneg = spec.power_diag(-(n as i32));
    let ones = vec![1.0; spec.ambient_dim()];
    let us: Vec<Operator> = cutoffs
        .iter()
        .map(|&c| fam.propagator(c, t))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (i, j) in pair_indices(cutoffs.len(), Pairing::AllPairs) {
        let (l, m) = (cutoffs[i], cutoffs[j]);
        let diff = &us[i] - &us[j];
        let exact = op_norm(&sandwich_diag(&sneg, &diff, &ones));
        let closed_form = if fam.is_diagonal() {
            let (lo, hi) = (l.min(m), l.max(m));
            let mut best = 0.0f64;
            for level in lo + 1..=hi {
                let h = fam.level_coefficient(level).unwrap();
                let v = 2.0 * spec.value(level).powi(-(n as i32)) * (t * h / 2.0).sin().abs();
                best = best.max(v);
            }
            Some(best)
        } else {
            None
        };
        let tail_bound = spec.tail_l2(n, l.min(m)).ok().map(|tl| 2.0 * tl);
        rows.push(UnitaryCauchyRow {
            l,
            m,
            exact,
            closed_form,
            tail_bound,
        });
    }
    Ok(rows)
}

/// The weighted gate table `|S^{-k-n}(U_L - U_M) S^k|`: the hypothesis that
/// lets the evolution limit survive without any commutation between the
/// Hamiltonians and the scale operator.
pub fn weighted_unitary_cauchy(
    fam: &HamiltonianFamily,
    n: u32,
    k: u32,
    t: f64,
    cutoffs: &[usize],
) -> Result<Vec<(usize, usize, f64)>> {
    let spec = fam.spectrum();
    let neg = spec.power_diag(-((k + n) as i32));
    let pos = spec.power_diag(k as i32);
    let us: Vec<Operator> = cutoffs
        .iter()
        .map(|&c| fam.propagator(c, t))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (i, j) in pair_indices(cutoffs.len(), Pairing::AllPairs) {
        let diff = &us[i] - &us[j];
        let value = op_norm(&sandwich_diag(&neg, &diff, &pos));
        rows.push((cutoffs[i], cutoffs[j], value));
    }
    Ok(rows)
}

/// Inputs of one evolution-limit run.
pub struct EvolutionRequest<'a> {
    pub family: &'a HamiltonianFamily,
    pub observable: Operator,
    pub t: f64,
    pub cutoffs: Vec<usize>,
    pub grid: Vec<SeminormSpec>,
    /// Regularizing power in the gate table.
    pub n: u32,
    pub pairing: Pairing,
    pub tol: f64,
    pub window: usize,
}

/// Gate table and verdict at one weight power `k`.
#[derive(Debug, Clone)]
pub struct GateRow {
    pub k: u32,
    pub rows: Vec<(usize, usize, f64)>,
    pub verdict: Verdict,
}

/// Residuals of `alpha_L(X)` against conjugation by the largest-cutoff
/// propagator, per seminorm of the grid.
#[derive(Debug, Clone)]
pub struct FactorizationRow {
    pub cutoff: usize,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

pub struct AlphaLimitSuite {
    pub gate: Vec<GateRow>,
    pub propagator_reports: Vec<ConvergenceReport>,
    pub evolution_reports: Vec<ConvergenceReport>,
    pub factorization: Vec<FactorizationRow>,
}

/// Profile the propagator sequence, the evolution sequence, and the
/// factorization residuals on one request. The gate is evaluated first and
/// recorded; the suite runs regardless of its verdict.
pub fn alpha_limit_suite(req: &EvolutionRequest) -> Result<AlphaLimitSuite> {
    check_observable(req.family, &req.observable)?;
    let spec = req.family.spectrum();

    let mut gate = Vec::new();
    let mut ks: Vec<u32> = req.grid.iter().filter_map(|s| s.k).collect();
    ks.sort_unstable();
    ks.dedup();
    for k in ks {
        let rows = weighted_unitary_cauchy(req.family, req.n, k, req.t, &req.cutoffs)?;
        let ds: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let (verdict, _) = verdict_from_distances(&ds, req.tol, req.window);
        gate.push(GateRow { k, rows, verdict });
    }

    let u_seq: Vec<(usize, Operator)> = req
        .cutoffs
        .iter()
        .map(|&c| Ok((c, req.family.propagator(c, req.t)?)))
        .collect::<Result<_>>()?;
    let propagator_reports =
        cauchy_profile(&u_seq, &req.grid, req.pairing, spec, req.tol, req.window)?;

    let alpha_seq: Vec<(usize, Operator)> = u_seq
        .iter()
        .map(|(c, u)| (*c, u * &req.observable * u.adjoint()))
        .collect();
    let evolution_reports =
        cauchy_profile(&alpha_seq, &req.grid, req.pairing, spec, req.tol, req.window)?;

    let target = &alpha_seq.last().unwrap().1;
    let factorization = alpha_seq
        .iter()
        .map(|(c, a)| {
            let diff = a - target;
            let residuals: Vec<f64> = req
                .grid
                .iter()
                .map(|sn| eval(sn, &diff, spec))
                .collect::<Result<_>>()?;
            let max_residual = residuals.iter().fold(0.0f64, |a, &b| a.max(b));
            Ok(FactorizationRow {
                cutoff: *c,
                residuals,
                max_residual,
            })
        })
        .collect::<Result<_>>()?;

    Ok(AlphaLimitSuite {
        gate,
        propagator_reports,
        evolution_reports,
        factorization,
    })
}

/// k-fold regularized derivation `delta_L^k(X)`, with
/// `delta_L(X) = i [H_L, X]`.
pub fn derivation(fam: &HamiltonianFamily, cutoff: usize, x: &Operator, k: u32) -> Result<Operator> {
    if k == 0 {
        return Err(CoreError::Param("derivation order must be >= 1".into()));
    }
    check_observable(fam, x)?;
    let h = fam.hamiltonian(cutoff)?;
    let mut y = x.clone();
    for _ in 0..k {
        y = commutator(&h, &y)? * Complex64::i();
    }
    Ok(y)
}

/// Residuals of the two projection identities available in the commuting
/// kind: the derivation of a projected observable agrees with the projected
/// derivation, and the evolution of a projected observable stays in the
/// corner.
pub fn projection_identities(
    fam: &HamiltonianFamily,
    l_cut: usize,
    m_cut: usize,
    x: &Operator,
    t: f64,
    k: u32,
) -> Result<(f64, f64)> {
    if !fam.is_diagonal() {
        return Err(CoreError::WrongKind {
            expected: "diagonal",
            got: fam.kind_name(),
        });
    }
    if l_cut < m_cut {
        return Err(CoreError::Param(format!(
            "projection identities need L >= M, got L={l_cut} M={m_cut}"
        )));
    }
    check_observable(fam, x)?;
    let spec = fam.spectrum();
    let q = spec.projector_diag(m_cut)?;
    let xm = sandwich_diag(&q, x, &q);

    let lhs_d = derivation(fam, l_cut, &xm, k)?;
    let rhs_d = sandwich_diag(&q, &derivation(fam, m_cut, x, k)?, &q);
    let r_derivation = op_norm(&(&lhs_d - &rhs_d));

    let lhs_a = alpha_l(fam, l_cut, &xm, t)?;
    let rhs_a = sandwich_diag(&q, &alpha_l(fam, l_cut, x, t)?, &q);
    let r_evolution = op_norm(&(&lhs_a - &rhs_a));
    Ok((r_derivation, r_evolution))
}

/// `sum_{k>n} x^k / k!`, the factorial tail controlling Taylor remainders.
/// Saturates to infinity rather than overflow for extreme arguments.
pub fn exp_series_tail(x: f64, n: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x > 500.0 {
        return f64::INFINITY;
    }
    let mut term = 1.0f64;
    for k in 1..=n {
        term *= x / k as f64;
    }
    let mut sum = 0.0;
    let mut k = n + 1;
    loop {
        term *= x / k as f64;
        sum += term;
        if term < sum * 1e-18 + 1e-300 {
            break;
        }
        k += 1;
    }
    sum
}

/// Taylor reconstruction of the evolution of a projected observable.
#[derive(Debug, Clone)]
pub struct TaylorReport {
    pub partial: Operator,
    /// `|alpha_L(X_M) - partial|`.
    pub measured_op: f64,
    /// Same residual in each grid seminorm.
    pub measured_grid: Vec<f64>,
    /// `|X_M| sum_{k>N} (2 |H_L| |t|)^k / k!`.
    pub apriori: f64,
    pub h_norm: f64,
    pub xm_norm: f64,
}

impl TaylorReport {
    pub fn within_apriori(&self) -> bool {
        self.measured_op <= self.apriori * (1.0 + 1e-12) + 1e-300
    }
}

/// Partial sum `sum_{k<=N} t^k/k! delta_L^k(X_M)` against `alpha_L(X_M)`.
pub fn taylor_dynamics(
    fam: &HamiltonianFamily,
    l_cut: usize,
    m_cut: usize,
    x: &Operator,
    t: f64,
    terms: usize,
    grid: &[SeminormSpec],
) -> Result<TaylorReport> {
    check_observable(fam, x)?;
    let spec = fam.spectrum();
    let q = spec.projector_diag(m_cut)?;
    let xm = sandwich_diag(&q, x, &q);
    let h = fam.hamiltonian(l_cut)?;
    let h_norm = op_norm(&h);
    let xm_norm = op_norm(&xm);

    let mut partial = xm.clone();
    let mut term = xm.clone();
    for k in 1..=terms {
        term = commutator(&h, &term)? * Complex64::new(0.0, t / k as f64);
        partial += &term;
    }
    let target = alpha_l(fam, l_cut, &xm, t)?;
    let diff = &target - &partial;
    let measured_op = op_norm(&diff);
    let measured_grid: Vec<f64> = grid
        .iter()
        .map(|sn| eval(sn, &diff, spec))
        .collect::<Result<_>>()?;
    let apriori = xm_norm * exp_series_tail(2.0 * h_norm * t.abs(), terms);
    Ok(TaylorReport {
        partial,
        measured_op,
        measured_grid,
        apriori,
        h_norm,
        xm_norm,
    })
}

/// Monotone stages of the ordered limit: series order first, then the
/// observable projection, then the Hamiltonian cutoff.
#[derive(Debug, Clone)]
pub struct TripleLimitSchedule {
    /// `(terms N_j, projection M_j, cutoff L_j)`, each nondecreasing.
    pub stages: Vec<(usize, usize, usize)>,
    /// Series order held fixed when the cutoff limit is (wrongly) taken
    /// innermost.
    pub wrong_order_terms: usize,
}

/// One stage of the ordered limit.
#[derive(Debug, Clone, Copy)]
pub struct TripleStage {
    pub terms: usize,
    pub m_cut: usize,
    pub l_cut: usize,
    /// Reconstruction residual of the innermost limit at this stage:
    /// `|alpha_L(X_M) - partial|` in the grid.
    pub inner_residual: f64,
    /// Distance of the stage approximant to the best available evolution
    /// `alpha_{L*}(X)`.
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct TripleLimitReport {
    pub staged: Vec<TripleStage>,
    /// `(L, distance)` with the series order pinned small: the profile of
    /// the wrong limit order, recorded but never asserted.
    pub wrong_order: Vec<(usize, f64)>,
}

pub fn triple_limit_run(
    fam: &HamiltonianFamily,
    x: &Operator,
    t: f64,
    schedule: &TripleLimitSchedule,
    grid: &[SeminormSpec],
) -> Result<TripleLimitReport> {
    check_observable(fam, x)?;
    if schedule.stages.is_empty() {
        return Err(CoreError::Param("empty schedule".into()));
    }
    for w in schedule.stages.windows(2) {
        let ((n0, m0, l0), (n1, m1, l1)) = (w[0], w[1]);
        if n1 < n0 || m1 < m0 || l1 < l0 {
            return Err(CoreError::Param(
                "schedule stages must be monotone in all three indices".into(),
            ));
        }
    }
    let spec = fam.spectrum();
    let l_star = schedule.stages.iter().map(|s| s.2).max().unwrap();
    let target = alpha_l(fam, l_star, x, t)?;
    let grid_dist = |a: &Operator| -> Result<f64> {
        let diff = a - &target;
        let mut worst = 0.0f64;
        for sn in grid {
            worst = worst.max(eval(sn, &diff, spec)?);
        }
        Ok(worst)
    };

    let mut staged = Vec::new();
    for &(terms, m_cut, l_cut) in &schedule.stages {
        let rep = taylor_dynamics(fam, l_cut, m_cut, x, t, terms, &[])?;
        let inner_target = alpha_l(fam, l_cut, &sandwich_diag_projected(spec, m_cut, x)?, t)?;
        let inner_diff = &inner_target - &rep.partial;
        let mut inner_residual = 0.0f64;
        for sn in grid {
            inner_residual = inner_residual.max(eval(sn, &inner_diff, spec)?);
        }
        staged.push(TripleStage {
            terms,
            m_cut,
            l_cut,
            inner_residual,
            distance: grid_dist(&rep.partial)?,
        });
    }

    let m_top = schedule.stages.iter().map(|s| s.1).max().unwrap();
    let mut wrong_order = Vec::new();
    for &(_, _, l_cut) in &schedule.stages {
        let rep = taylor_dynamics(fam, l_cut, m_top, x, t, schedule.wrong_order_terms, &[])?;
        wrong_order.push((l_cut, grid_dist(&rep.partial)?));
    }
    Ok(TripleLimitReport {
        staged,
        wrong_order,
    })
}

struct Eigh {
    vals: Vec<f64>,
    vecs: Operator,
}

impl Eigh {
    fn new(h: &Operator) -> Result<Self> {
        let defect = hermiticity_defect(h);
        let tol = 1e-12 * max_abs(h).max(1.0);
        if defect > tol {
            return Err(CoreError::NotHermitian { defect, tol });
        }
        let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let se = SymmetricEigen::new(sym);
        Ok(Self {
            vals: se.eigenvalues.iter().copied().collect(),
            vecs: se.eigenvectors,
        })
    }

    fn propagate(&self, t: f64) -> Operator {
        let dim = self.vecs.nrows();
        let mut phased = self.vecs.clone();
        for (j, &l) in self.vals.iter().enumerate() {
            let phase = Complex64::new(0.0, t * l).exp();
            for i in 0..dim {
                phased[(i, j)] *= phase;
            }
        }
        &phased * self.vecs.adjoint()
    }
}

#[derive(Debug, Clone)]
pub struct DysonReport {
    pub quadrature: Operator,
    pub direct: Operator,
    /// `|quadrature - direct|`.
    pub error: f64,
}

/// Composite-Simpson quadrature of
/// `i int_0^t U_L(t - t1) (H_L - H_M) U_M(t1) dt1` against the direct
/// propagator difference `U_L(t) - U_M(t)`. The phase sums run per
/// eigenvalue pair, which is the same quadrature rule evaluated without
/// rebuilding propagators at every node.
pub fn dyson_between(h_l: &Operator, h_m: &Operator, t: f64, panels: usize) -> Result<DysonReport> {
    if panels < 2 || panels % 2 != 0 {
        return Err(CoreError::OddPanels(panels));
    }
    let el = Eigh::new(h_l)?;
    let em = Eigh::new(h_m)?;
    let dim = h_l.nrows();
    let dh = h_l - h_m;
    // G = V_L^dagger dH V_M in the mixed eigenbasis
    let g = el.vecs.adjoint() * &dh * &em.vecs;
    let step = t / panels as f64;
    let mut kernel = Operator::zeros(dim, dim);
    for (a, &la) in el.vals.iter().enumerate() {
        for (b, &lb) in em.vals.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..=panels {
                let t1 = p as f64 * step;
                let w = if p == 0 || p == panels {
                    1.0
                } else if p % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += Complex64::new(0.0, la * (t - t1) + lb * t1).exp() * w;
            }
            kernel[(a, b)] = g[(a, b)] * acc * Complex64::new(0.0, step / 3.0);
        }
    }
    let quadrature = &el.vecs * kernel * em.vecs.adjoint();
    let direct = el.propagate(t) - em.propagate(t);
    let error = op_norm(&(&quadrature - &direct));
    Ok(DysonReport {
        quadrature,
        direct,
        error,
    })
}

/// Same identity at two cutoffs of a family.
pub fn dyson_difference(
    fam: &HamiltonianFamily,
    l_cut: usize,
    m_cut: usize,
    t: f64,
    panels: usize,
) -> Result<DysonReport> {
    let hl = fam.hamiltonian(l_cut)?;
    let hm = fam.hamiltonian(m_cut)?;
    dyson_between(&hl, &hm, t, panels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionStatus {
    Holds,
    Fails,
    Inconclusive,
}

impl ConditionStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionStatus::Holds => "holds",
            ConditionStatus::Fails => "fails",
            ConditionStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConditionVerdict {
    pub id: &'static str,
    pub status: ConditionStatus,
    /// Cutoff pair carrying the worst value.
    pub witness: Option<(usize, usize)>,
    pub worst: f64,
}

pub struct SufficientConditionsRequest<'a> {
    pub family: &'a HamiltonianFamily,
    pub n: u32,
    pub cutoffs: Vec<usize>,
    pub t_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    pub tol: f64,
    pub window: usize,
}

pub struct SufficientConditions {
    /// `|S^{-n}(H_L - H_M)|` per pair.
    pub difference_profile: Vec<(usize, usize, f64)>,
    pub difference_verdict: Verdict,
    /// `max_L |[H_L, S^{-1}]|`.
    pub commute_defect: f64,
    /// `(cutoff, t, alpha_star(U_L(t)))`.
    pub membership_rows: Vec<(usize, f64, f64)>,
    /// `(L, M, tau, truncated commutator series)`.
    pub series_rows: Vec<(usize, usize, f64, f64)>,
    pub cond1: ConditionVerdict,
    pub cond2: ConditionVerdict,
    pub cond3: ConditionVerdict,
}

fn base_status(v: Verdict) -> ConditionStatus {
    match v {
        Verdict::Cauchy => ConditionStatus::Holds,
        Verdict::NotCauchy => ConditionStatus::Fails,
        Verdict::Inconclusive => ConditionStatus::Inconclusive,
    }
}

/// Evaluate the three checkable routes to the weighted gate: commutation
/// with the inverse scale, uniform conjugation membership of the
/// propagators, and the weighted commutator series.
pub fn sufficient_conditions(req: &SufficientConditionsRequest) -> Result<SufficientConditions> {
    let fam = req.family;
    let spec = fam.spectrum();
    let sneg = spec.power_diag(-(req.n as i32));
    let ones = vec![1.0; spec.ambient_dim()];
    let sinv = spec.power_matrix(-1);

    let hs: Vec<Operator> = req
        .cutoffs
        .iter()
        .map(|&c| fam.hamiltonian(c))
        .collect::<Result<_>>()?;

    let pairs = pair_indices(req.cutoffs.len(), Pairing::AllPairs);
    let mut difference_profile = Vec::new();
    for &(i, j) in &pairs {
        let d = &hs[i] - &hs[j];
        difference_profile.push((
            req.cutoffs[i],
            req.cutoffs[j],
            op_norm(&sandwich_diag(&sneg, &d, &ones)),
        ));
    }
    let ds: Vec<f64> = difference_profile.iter().map(|r| r.2).collect();
    let (difference_verdict, _) = verdict_from_distances(&ds, req.tol, req.window);
    let worst_pair = difference_profile
        .iter()
        .cloned()
        .max_by(|a, b| a.2.total_cmp(&b.2));

    let commute_defect = hs
        .iter()
        .map(|h| op_norm(&commutator(h, &sinv).expect("dims match")))
        .fold(0.0f64, f64::max);
    let commute_scale = hs.iter().map(max_abs).fold(1.0f64, f64::max);
    let commutes = commute_defect <= 1e-12 * commute_scale;
    let cond1 = ConditionVerdict {
        id: "SC1",
        status: if commutes {
            base_status(difference_verdict)
        } else {
            ConditionStatus::Fails
        },
        witness: worst_pair.map(|(l, m, _)| (l, m)),
        worst: commute_defect,
    };

    let mut membership_rows = Vec::new();
    for &c in &req.cutoffs {
        for &t in &req.t_grid {
            let u = fam.propagator(c, t)?;
            let rec = membership(&u, spec, 1)?;
            membership_rows.push((c, t, rec.alpha_star));
        }
    }
    let alphas: Vec<f64> = membership_rows.iter().map(|r| r.2).collect();
    let half = alphas.len() / 2;
    let grown = if half > 0 {
        let early = alphas[..half].iter().fold(0.0f64, |a, &b| a.max(b));
        let late = alphas[half..].iter().fold(0.0f64, |a, &b| a.max(b));
        late > early * (1.0 + 1e-6)
    } else {
        false
    };
    let cond2 = ConditionVerdict {
        id: "SC2",
        status: match base_status(difference_verdict) {
            ConditionStatus::Holds if !grown => ConditionStatus::Holds,
            ConditionStatus::Holds => ConditionStatus::Inconclusive,
            other => other,
        },
        witness: worst_pair.map(|(l, m, _)| (l, m)),
        worst: alphas.iter().fold(0.0f64, |a, &b| a.max(b)),
    };

    let mut series_rows = Vec::new();
    let mut series_worst = 0.0f64;
    let mut series_witness = None;
    for &tau in &req.tau_grid {
        for &(i, j) in &pairs {
            let mut nested = commutator(&hs[i], &hs[j])?;
            let mut weight = tau;
            let mut total = weight * op_norm(&sandwich_diag(&sneg, &nested, &ones));
            for k in 2..=80usize {
                nested = commutator(&hs[i], &nested)?;
                weight *= tau / k as f64;
                let term = weight * op_norm(&sandwich_diag(&sneg, &nested, &ones));
                total += term;
                if term < 1e-12 * total + 1e-300 || !term.is_finite() {
                    break;
                }
            }
            if total > series_worst {
                series_worst = total;
                series_witness = Some((req.cutoffs[i], req.cutoffs[j]));
            }
            series_rows.push((req.cutoffs[i], req.cutoffs[j], tau, total));
        }
    }
    let mut series_ok = base_status(difference_verdict);
    for &tau in &req.tau_grid {
        let tds: Vec<f64> = series_rows
            .iter()
            .filter(|r| r.2 == tau)
            .map(|r| r.3)
            .collect();
        let (v, _) = verdict_from_distances(&tds, req.tol, req.window);
        match (series_ok, base_status(v)) {
            (ConditionStatus::Holds, ConditionStatus::Holds) => {}
            (ConditionStatus::Fails, _) | (_, ConditionStatus::Fails) => {
                series_ok = ConditionStatus::Fails
            }
            _ => series_ok = ConditionStatus::Inconclusive,
        }
    }
    let cond3 = ConditionVerdict {
        id: "SC3",
        status: series_ok,
        witness: series_witness,
        worst: series_worst,
    };

    Ok(SufficientConditions {
        difference_profile,
        difference_verdict,
        commute_defect,
        membership_rows,
        series_rows,
        cond1,
        cond2,
        cond3,
    })
}

pub struct GibbsRequest<'a> {
    pub family: &'a HamiltonianFamily,
    pub beta: f64,
    pub cutoffs: Vec<usize>,
    pub grid: Vec<SeminormSpec>,
    pub pairing: Pairing,
    pub tol: f64,
    pub window: usize,
}

pub struct GibbsReport {
    pub beta: f64,
    /// `(cutoff, |tr rho_L - 1|)`.
    pub trace_defects: Vec<(usize, f64)>,
    pub reports: Vec<ConvergenceReport>,
}

/// The regularized Gibbs state at one cutoff: the heat kernel compressed to
/// the cutoff sector and normalized by its trace there, so the state is a
/// genuine density matrix for every cutoff even though the ambient heat
/// kernel acts as the identity on untouched levels.
pub fn gibbs_state(fam: &HamiltonianFamily, cutoff: usize, beta: f64) -> Result<Operator> {
    if beta <= 0.0 {
        return Err(CoreError::Param(format!(
            "inverse temperature must be positive, got {beta}"
        )));
    }
    let spec = fam.spectrum();
    let q = spec.projector_diag(cutoff.min(spec.level_count() - 1))?;
    let w = fam.heat_kernel(cutoff, beta)?;
    let mut rho = sandwich_diag(&q, &w, &q);
    let trace: f64 = (0..rho.nrows()).map(|i| rho[(i, i)].re).sum();
    rho /= Complex64::new(trace, 0.0);
    Ok(rho)
}

/// Trace checks and Cauchy profile of the Gibbs sequence.
pub fn gibbs_suite(req: &GibbsRequest) -> Result<GibbsReport> {
    let seq: Vec<(usize, Operator)> = req
        .cutoffs
        .iter()
        .map(|&c| Ok((c, gibbs_state(req.family, c, req.beta)?)))
        .collect::<Result<_>>()?;
    let trace_defects = seq
        .iter()
        .map(|(c, rho)| {
            let tr: Complex64 = (0..rho.nrows()).map(|i| rho[(i, i)]).sum();
            (*c, (tr - Complex64::new(1.0, 0.0)).norm())
        })
        .collect();
    let reports = cauchy_profile(
        &seq,
        &req.grid,
        req.pairing,
        req.family.spectrum(),
        req.tol,
        req.window,
    )?;
    Ok(GibbsReport {
        beta: req.beta,
        trace_defects,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{AngleRule, HRule, RotationPlan};
    use crate::operator;
    use crate::sampler::OperatorSampler;
    use crate::spectral::{make_spectrum, Degeneracy, Spectrum, SpectrumKind, TestFunction};
    use approx::assert_relative_eq;

    fn shifted(levels: usize) -> Spectrum {
        make_spectrum(SpectrumKind::ShiftedInteger, levels, Degeneracy::Simple).unwrap()
    }

    fn two_level(h0: f64, h1: f64) -> HamiltonianFamily {
        HamiltonianFamily::diagonal(shifted(2), HRule::Explicit(vec![h0, h1]))
    }

    #[test]
    fn alpha_at_zero_time_is_identity_map() {
        let fam = HamiltonianFamily::diagonal(shifted(6), HRule::Linear);
        let mut sampler = OperatorSampler::new(60);
        let x = sampler.dense(fam.spectrum());
        let moved = alpha_l(&fam, 4, &x, 0.0).unwrap();
        assert!(op_norm(&(&moved - &x)) < 1e-14);
    }

    #[test]
    fn alpha_fixes_commuting_observables() {
        let fam = HamiltonianFamily::diagonal(shifted(6), HRule::Linear);
        let x = fam.spectrum().power_matrix(1);
        let moved = alpha_l(&fam, 5, &x, 1.3).unwrap();
        assert!(op_norm(&(&moved - &x)) < 1e-13);
    }

    #[test]
    fn alpha_two_level_phase() {
        let (h0, h1, t) = (0.4, 1.9, 0.8);
        let fam = two_level(h0, h1);
        let mut x = operator::zeros(2);
        x[(0, 1)] = Complex64::new(1.0, 0.0);
        let moved = alpha_l(&fam, 1, &x, t).unwrap();
        let expect = Complex64::new(0.0, (h0 - h1) * t).exp();
        assert!((moved[(0, 1)] - expect).norm() < 1e-14);
    }

    #[test]
    fn alpha_is_star_automorphism_and_isometry() {
        let fam = HamiltonianFamily::diagonal(shifted(8), HRule::Power { exponent: 1.5 });
        let mut sampler = OperatorSampler::new(61);
        let x = sampler.dense(fam.spectrum());
        let y = sampler.dense(fam.spectrum());
        let t = 0.9;
        let axy = alpha_l(&fam, 6, &(&x * &y), t).unwrap();
        let ax = alpha_l(&fam, 6, &x, t).unwrap();
        let ay = alpha_l(&fam, 6, &y, t).unwrap();
        assert!(op_norm(&(&axy - &ax * &ay)) < 1e-10);
        let axd = alpha_l(&fam, 6, &x.adjoint(), t).unwrap();
        assert!(op_norm(&(&axd - ax.adjoint())) < 1e-12);
        assert_relative_eq!(op_norm(&ax), op_norm(&x), epsilon = 1e-10);
    }

    #[test]
    fn alpha_group_law() {
        let fam = HamiltonianFamily::diagonal(shifted(8), HRule::Linear);
        let mut sampler = OperatorSampler::new(62);
        let x = sampler.dense(fam.spectrum());
        let a = alpha_l(&fam, 7, &alpha_l(&fam, 7, &x, 0.4).unwrap(), 0.7).unwrap();
        let b = alpha_l(&fam, 7, &x, 1.1).unwrap();
        assert!(op_norm(&(&a - &b)) < 1e-9);
    }

    #[test]
    fn unitary_cauchy_zero_time() {
        let fam = HamiltonianFamily::diagonal(shifted(10), HRule::ExpOfScale { gamma: 1.0 });
        let cutoffs: Vec<usize> = (0..8).collect();
        let rows = unitary_cauchy(&fam, 1, 0.0, &cutoffs).unwrap();
        assert!(rows.iter().all(|r| r.exact == 0.0));
    }

    #[test]
    fn weighted_gate_reduces_at_k_zero_and_commutes() {
        let fam = HamiltonianFamily::diagonal(shifted(12), HRule::ExpOfScale { gamma: 1.0 });
        let cutoffs: Vec<usize> = (0..10).collect();
        let n = 1;
        let t = 0.6;
        let plain = unitary_cauchy(&fam, n, t, &cutoffs).unwrap();
        let k0 = weighted_unitary_cauchy(&fam, n, 0, t, &cutoffs).unwrap();
        let k2 = weighted_unitary_cauchy(&fam, n, 2, t, &cutoffs).unwrap();
        for ((row, (_, _, w0)), (_, _, w2)) in plain.iter().zip(&k0).zip(&k2) {
            assert_relative_eq!(row.exact, *w0, epsilon = 1e-13);
            // the S-commuting family makes every k collapse to k = 0
            assert_relative_eq!(*w0, *w2, epsilon = 1e-13);
        }
    }

    #[test]
    fn weighted_gate_rotated_decreases() {
        let spec = shifted(40);
        let plan = RotationPlan::BrickWall {
            layers: 1,
            angles: AngleRule::Constant(std::f64::consts::FRAC_PI_4),
        };
        let fam = HamiltonianFamily::rotated(spec, HRule::Linear, plan).unwrap();
        let cutoffs: Vec<usize> = (5..35).step_by(4).collect();
        let rows = weighted_unitary_cauchy(&fam, 2, 1, 1.0, &cutoffs).unwrap();
        // adjacent-in-list pairs with growing cutoffs shrink
        let first = rows.iter().find(|r| (r.0, r.1) == (5, 9)).unwrap().2;
        let last = rows.iter().find(|r| (r.0, r.1) == (29, 33)).unwrap().2;
        assert!(last < first * 0.2, "first {first} last {last}");
        assert!(rows.iter().all(|r| r.2.is_finite()));
    }

    #[test]
    fn derivation_examples() {
        let fam = two_level(0.7, 2.1);
        let mut x = operator::zeros(2);
        x[(0, 1)] = Complex64::new(1.0, 0.0);
        let d1 = derivation(&fam, 1, &x, 1).unwrap();
        let expect = Complex64::new(0.0, 0.7 - 2.1);
        assert!((d1[(0, 1)] - expect).norm() < 1e-15);
        // recursion: delta^2(X) = delta(delta(X))
        let d2 = derivation(&fam, 1, &x, 2).unwrap();
        let d2b = derivation(&fam, 1, &d1, 1).unwrap();
        assert_eq!(d2, d2b);
        // commuting observable is annihilated
        let s = fam.spectrum().power_matrix(1);
        assert_eq!(op_norm(&derivation(&fam, 1, &s, 1).unwrap()), 0.0);
        assert!(derivation(&fam, 1, &x, 0).is_err());
    }

    #[test]
    fn projection_identities_hold_in_commuting_kind() {
        let fam = HamiltonianFamily::diagonal(shifted(12), HRule::ExpOfScale { gamma: 0.8 });
        let mut sampler = OperatorSampler::new(63);
        let x = sampler.dense(fam.spectrum());
        for (l, m, k) in [(4, 4, 1), (9, 4, 3), (11, 7, 2)] {
            let (rd, ra) = projection_identities(&fam, l, m, &x, 0.9, k).unwrap();
            assert!(rd <= 1e-10, "derivation residual {rd}");
            assert!(ra <= 1e-10, "evolution residual {ra}");
        }
        assert!(projection_identities(&fam, 3, 5, &x, 0.9, 1).is_err());
    }

    #[test]
    fn projection_identities_need_commuting_kind() {
        let plan = RotationPlan::BrickWall {
            layers: 1,
            angles: AngleRule::Constant(0.3),
        };
        let fam = HamiltonianFamily::rotated(shifted(8), HRule::Linear, plan).unwrap();
        let x = operator::identity(8);
        assert!(matches!(
            projection_identities(&fam, 5, 3, &x, 1.0, 1),
            Err(CoreError::WrongKind { .. })
        ));
    }

    #[test]
    fn taylor_zero_terms_is_projected_observable() {
        let fam = HamiltonianFamily::diagonal(shifted(8), HRule::Linear);
        let mut sampler = OperatorSampler::new(64);
        let x = sampler.dense(fam.spectrum());
        let rep = taylor_dynamics(&fam, 6, 4, &x, 0.5, 0, &[]).unwrap();
        let q = fam.spectrum().projector_diag(4).unwrap();
        let xm = sandwich_diag(&q, &x, &q);
        assert_eq!(rep.partial, xm);
        let direct = op_norm(&(alpha_l(&fam, 6, &xm, 0.5).unwrap() - &xm));
        assert_relative_eq!(rep.measured_op, direct, epsilon = 1e-12);
    }

    #[test]
    fn taylor_two_level_scalar_oracle() {
        let (h0, h1, t) = (0.3, 1.7, 0.9);
        let fam = two_level(h0, h1);
        let mut x = operator::zeros(2);
        x[(0, 1)] = Complex64::new(1.0, 0.0);
        let omega = Complex64::new(0.0, (h0 - h1) * t);
        for terms in [0usize, 1, 3, 7, 12] {
            let rep = taylor_dynamics(&fam, 1, 1, &x, t, terms, &[]).unwrap();
            // scalar remainder: |e^{i omega} - sum_{k<=N} (i omega)^k / k!|
            let mut partial = Complex64::new(0.0, 0.0);
            let mut term = Complex64::new(1.0, 0.0);
            partial += term;
            for k in 1..=terms {
                term *= omega / k as f64;
                partial += term;
            }
            let expect = (omega.exp() - partial).norm();
            assert_relative_eq!(rep.measured_op, expect, epsilon = 1e-12);
            assert!(rep.within_apriori());
        }
    }

    #[test]
    fn taylor_residual_eventually_monotone() {
        let fam = HamiltonianFamily::diagonal(shifted(8), HRule::Linear);
        let mut sampler = OperatorSampler::new(65);
        let x = sampler.dense(fam.spectrum());
        let t = 0.5;
        let h_norm = 7.0;
        let knee = (std::f64::consts::E * 2.0 * h_norm * t).ceil() as usize;
        let mut prev = f64::INFINITY;
        for terms in knee..knee + 12 {
            let rep = taylor_dynamics(&fam, 7, 7, &x, t, terms, &[]).unwrap();
            // monotone decay holds above the roundoff floor
            if prev > 1e-12 {
                assert!(rep.measured_op <= prev * (1.0 + 1e-9));
            }
            assert!(rep.within_apriori());
            prev = rep.measured_op;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn exp_tail_values() {
        assert_relative_eq!(
            exp_series_tail(1.0, 0),
            std::f64::consts::E - 1.0,
            epsilon = 1e-12
        );
        assert_eq!(exp_series_tail(0.0, 3), 0.0);
        assert!(exp_series_tail(1000.0, 5).is_infinite());
        // Poisson-style tail at the acceptance operating point
        let tail = exp_series_tail(10.0, 40);
        assert!(tail > 1e-10 && tail < 1e-7, "tail {tail}");
    }

    #[test]
    fn triple_limit_identity_observable_collapses() {
        let fam = HamiltonianFamily::diagonal(shifted(10), HRule::Linear);
        let x = operator::identity(10);
        let f = TestFunction::exp(1.0).unwrap();
        let schedule = TripleLimitSchedule {
            stages: vec![(2, 2, 3), (4, 4, 5), (8, 6, 8)],
            wrong_order_terms: 2,
        };
        let rep = triple_limit_run(&fam, &x, 0.7, &schedule, &[SeminormSpec::graph(f, 0)]).unwrap();
        // the inner reconstruction is exact at every stage: the projected
        // identity commutes with every H_L
        for s in &rep.staged {
            assert!(s.inner_residual < 1e-13);
        }
        // distance to the unprojected identity is the weighted tail of Q_M,
        // shrinking with the projection stage
        let ds: Vec<f64> = rep.staged.iter().map(|s| s.distance).collect();
        assert!(ds.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn triple_limit_ordered_stages_converge() {
        let fam = HamiltonianFamily::diagonal(shifted(16), HRule::Linear);
        let mut sampler = OperatorSampler::new(66);
        let x = sampler.smooth(fam.spectrum(), 0.6);
        let f = TestFunction::exp(1.0).unwrap();
        let grid = [SeminormSpec::graph(f, 0), SeminormSpec::graph(f, 1)];
        let schedule = TripleLimitSchedule {
            stages: vec![(6, 4, 6), (12, 8, 9), (24, 12, 12), (34, 15, 15)],
            wrong_order_terms: 2,
        };
        let rep = triple_limit_run(&fam, &x, 0.3, &schedule, &grid).unwrap();
        let ds: Vec<f64> = rep.staged.iter().map(|s| s.distance).collect();
        assert!(ds.last().unwrap() < &1e-6, "staged {ds:?}");
        assert!(ds.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
        // wrong order at tiny series order stalls well above the target
        assert!(rep.wrong_order.last().unwrap().1 > 1e-3);
    }

    #[test]
    fn dyson_identical_cutoffs_vanish() {
        let fam = HamiltonianFamily::diagonal(shifted(6), HRule::Linear);
        let rep = dyson_difference(&fam, 3, 3, 1.0, 16).unwrap();
        assert!(op_norm(&rep.quadrature) < 1e-14);
        assert!(rep.error < 1e-14);
        let rep0 = dyson_difference(&fam, 1, 4, 0.0, 16).unwrap();
        assert!(op_norm(&rep0.quadrature) < 1e-14);
        assert!(op_norm(&rep0.direct) < 1e-14);
    }

    #[test]
    fn dyson_three_level_example() {
        let fam = HamiltonianFamily::diagonal(shifted(3), HRule::Linear);
        let rep = dyson_difference(&fam, 1, 2, 1.0, 200).unwrap();
        assert!(rep.error <= 1e-8, "error {}", rep.error);
    }

    #[test]
    fn dyson_rejects_odd_panels() {
        let fam = HamiltonianFamily::diagonal(shifted(3), HRule::Linear);
        assert!(matches!(
            dyson_difference(&fam, 0, 1, 1.0, 7),
            Err(CoreError::OddPanels(7))
        ));
    }

    #[test]
    fn dyson_matches_node_by_node_simpson_oracle() {
        // same rule evaluated the expensive way: propagators at every node
        let mut sampler = OperatorSampler::new(67);
        let hl = sampler.hermitian(5, 2.0);
        let hm = sampler.hermitian(5, 2.0);
        let (t, panels) = (0.8, 24);
        let rep = dyson_between(&hl, &hm, t, panels).unwrap();
        let dh = &hl - &hm;
        let step = t / panels as f64;
        let mut acc = Operator::zeros(5, 5);
        for p in 0..=panels {
            let t1 = p as f64 * step;
            let w = if p == 0 || p == panels {
                1.0
            } else if p % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let node = crate::hamiltonian::propagator(&hl, t - t1).unwrap()
                * &dh
                * crate::hamiltonian::propagator(&hm, t1).unwrap();
            acc += node * Complex64::new(w, 0.0);
        }
        let oracle = acc * Complex64::new(0.0, step / 3.0);
        assert!(op_norm(&(&rep.quadrature - &oracle)) < 1e-11);
    }

    #[test]
    fn evolution_difference_factorization_bound() {
        // | f(S)(U_L X U_L* - U_M X U_M*) S^k |
        //   <= |f(S) U_L X S^{k+n}| |S^{-k-n}(U_L* - U_M*) S^k|
        //    + |f(S)(U_L - U_M) X S^{k+n}| |S^{-k-n} U_M* S^k|
        let spec = shifted(24);
        let plan = RotationPlan::BrickWall {
            layers: 2,
            angles: AngleRule::Constant(0.4),
        };
        let fam = HamiltonianFamily::rotated(spec, HRule::Linear, plan).unwrap();
        let spec = fam.spectrum();
        let mut sampler = OperatorSampler::new(68);
        let x = sampler.smooth(spec, 0.4);
        let f = TestFunction::exp(1.0).unwrap();
        let (k, n, t) = (1u32, 1u32, 0.9);
        let (l_cut, m_cut) = (8, 16);
        let ul = fam.propagator(l_cut, t).unwrap();
        let um = fam.propagator(m_cut, t).unwrap();
        let fd = f.diag(spec);
        let sk = spec.power_diag(k as i32);
        let skn = spec.power_diag((k + n) as i32);
        let sneg = spec.power_diag(-((k + n) as i32));
        let lhs = op_norm(&sandwich_diag(
            &fd,
            &(&ul * &x * ul.adjoint() - &um * &x * um.adjoint()),
            &sk,
        ));
        let a = op_norm(&sandwich_diag(&fd, &(&ul * &x), &skn));
        let b = op_norm(&sandwich_diag(&sneg, &(ul.adjoint() - um.adjoint()), &sk));
        let c = op_norm(&sandwich_diag(&fd, &(&(&ul - &um) * &x), &skn));
        let d = op_norm(&sandwich_diag(&sneg, &um.adjoint(), &sk));
        assert!(lhs <= a * b + c * d + 1e-12);
    }

    #[test]
    fn suite_gate_recorded_and_reports_computed() {
        let fam = HamiltonianFamily::diagonal(shifted(24), HRule::ExpOfScale { gamma: 1.0 });
        let mut sampler = OperatorSampler::new(69);
        let x = sampler.smooth(fam.spectrum(), 0.75);
        let f = TestFunction::exp(1.0).unwrap();
        let req = EvolutionRequest {
            family: &fam,
            observable: x,
            t: 0.5,
            cutoffs: (0..16).collect(),
            grid: vec![SeminormSpec::graph(f, 0), SeminormSpec::graph(f, 1)],
            n: 1,
            pairing: Pairing::AllPairs,
            tol: 1e-6,
            window: 3,
        };
        let suite = alpha_limit_suite(&req).unwrap();
        assert_eq!(suite.gate.len(), 2);
        assert_eq!(suite.propagator_reports.len(), 2);
        assert_eq!(suite.evolution_reports.len(), 2);
        // factorization residual vanishes at the top cutoff
        let last = suite.factorization.last().unwrap();
        assert_eq!(last.max_residual, 0.0);
    }

    #[test]
    fn sufficient_conditions_commuting_family() {
        // coefficients decaying against the scale: the weighted difference
        // profile is Cauchy, all commutators vanish
        let hs: Vec<f64> = (0..24).map(|l| (-(l as f64)).exp()).collect();
        let fam = HamiltonianFamily::diagonal(shifted(24), HRule::Explicit(hs));
        let req = SufficientConditionsRequest {
            family: &fam,
            n: 1,
            cutoffs: (4..22).collect(),
            t_grid: vec![0.5, 1.0],
            tau_grid: vec![0.5, 1.0],
            tol: 1e-6,
            window: 3,
        };
        let out = sufficient_conditions(&req).unwrap();
        assert_eq!(out.cond1.status, ConditionStatus::Holds);
        assert!(out.commute_defect < 1e-14);
        assert_eq!(out.cond2.status, ConditionStatus::Holds);
        assert!(out.membership_rows.iter().all(|r| (r.2 - 1.0).abs() < 1e-10));
        assert_eq!(out.cond3.status, ConditionStatus::Holds);
        assert!(out.series_rows.iter().all(|r| r.3 < 1e-10));
    }

    #[test]
    fn gibbs_flat_family_is_uniform_on_sector() {
        let fam = HamiltonianFamily::diagonal(shifted(10), HRule::Zero);
        for l in [0usize, 4, 9] {
            let rho = gibbs_state(&fam, l, 1.0).unwrap();
            let tr: f64 = (0..10).map(|i| rho[(i, i)].re).sum();
            assert_relative_eq!(tr, 1.0, epsilon = 1e-14);
            for i in 0..10 {
                let expect = if i <= l { 1.0 / (l as f64 + 1.0) } else { 0.0 };
                assert_relative_eq!(rho[(i, i)].re, expect, epsilon = 1e-14);
            }
        }
        assert!(gibbs_state(&fam, 2, -1.0).is_err());
    }

    #[test]
    fn gibbs_profile_converges() {
        let fam = HamiltonianFamily::diagonal(shifted(50), HRule::Linear);
        let f = TestFunction::exp(1.0).unwrap();
        let req = GibbsRequest {
            family: &fam,
            beta: 1.0,
            cutoffs: (10..46).step_by(3).collect(),
            grid: vec![SeminormSpec::graph(f, 0), SeminormSpec::graph(f, 2)],
            pairing: Pairing::AllPairs,
            tol: 1e-6,
            window: 3,
        };
        let rep = gibbs_suite(&req).unwrap();
        assert!(rep.trace_defects.iter().all(|d| d.1 <= 1e-12));
        for r in &rep.reports {
            assert_eq!(r.verdict, Verdict::Cauchy, "final {}", r.final_distance);
            assert!(r.final_distance < 1e-6);
        }
    }
}
