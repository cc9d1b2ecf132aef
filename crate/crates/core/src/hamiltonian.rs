//! Regularized Hamiltonian families `H_L` and their propagators.
//!
//! Three kinds: `Diagonal` shares the spectral projectors of `S`
//! (everything commutes), `Rotated` puts the `H_L` projectors in a
//! Givens-rotated basis with controlled overlaps against the `S` basis, and
//! `Lattice` sums local fermionic terms up to a site cutoff.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::fermion::OccupationBasis;
use crate::operator::{check_square_match, hermiticity_defect, max_abs, Operator};
use crate::spectral::{Spectrum, TestFunction};

/// Rule producing the coefficient `h_l` of level `l`.
#[derive(Debug, Clone, PartialEq)]
pub enum HRule {
    Zero,
    /// `h_l = l`.
    Linear,
    /// `h_l = l^p`.
    Power { exponent: f64 },
    /// `h_l = exp(gamma s_l)`.
    ExpOfScale { gamma: f64 },
    /// `h_l = f0(s_l)^{-1}`, or `f0(s_l)^{-2}` when squared: the coefficient
    /// growth that defeats tau-convergence of `{H_L}` while leaving the
    /// dynamics intact.
    InverseTest { f0: TestFunction, squared: bool },
    Explicit(Vec<f64>),
}

impl HRule {
    pub fn eval(&self, l: usize, s_l: f64) -> f64 {
        match self {
            HRule::Zero => 0.0,
            HRule::Linear => l as f64,
            HRule::Power { exponent } => (l as f64).powf(*exponent),
            HRule::ExpOfScale { gamma } => (gamma * s_l).exp(),
            HRule::InverseTest { f0, squared } => {
                let inv = 1.0 / f0.eval(s_l);
                if *squared {
                    inv * inv
                } else {
                    inv
                }
            }
            HRule::Explicit(v) => v[l],
        }
    }
}

/// Per-pair rotation angles of a plan.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleRule {
    Constant(f64),
    /// `theta_i = base * ratio^i` for the pair whose left index is `i`.
    Geometric { base: f64, ratio: f64 },
    /// `theta_i = pi/2 - eps * ratio^i`: a softened downward shift.
    ShiftLike { eps: f64, ratio: f64 },
    Explicit(Vec<f64>),
}

impl AngleRule {
    pub fn eval(&self, i: usize) -> f64 {
        match self {
            AngleRule::Constant(t) => *t,
            AngleRule::Geometric { base, ratio } => base * ratio.powi(i as i32),
            AngleRule::ShiftLike { eps, ratio } => {
                std::f64::consts::FRAC_PI_2 - eps * ratio.powi(i as i32)
            }
            AngleRule::Explicit(v) => v.get(i).copied().unwrap_or(0.0),
        }
    }
}

/// How the rotated basis is assembled from Givens rotations.
#[derive(Debug, Clone, PartialEq)]
pub enum RotationPlan {
    /// `layers` alternating layers of disjoint rotations on pairs
    /// `(2m+offset, 2m+offset+1)`; overlaps vanish beyond band `layers`.
    BrickWall { layers: usize, angles: AngleRule },
    /// One ascending cascade `G(0,1), G(1,2), ...`; overlaps spread upward
    /// geometrically, with exactly one sub-diagonal.
    Staircase { angles: AngleRule },
}

impl RotationPlan {
    /// Guaranteed overlap band, when the construction gives one.
    pub fn band(&self) -> Option<usize> {
        match self {
            RotationPlan::BrickWall { layers, .. } => Some(*layers),
            RotationPlan::Staircase { .. } => None,
        }
    }

    /// Orthogonal basis matrix whose columns are the rotated vectors.
    pub fn build_basis(&self, dim: usize) -> DMatrix<f64> {
        let mut u = DMatrix::<f64>::identity(dim, dim);
        let rotate = |u: &mut DMatrix<f64>, i: usize, theta: f64| {
            // rows i and i+1 of u get the 2x2 rotation on the left
            let (c, s) = (theta.cos(), theta.sin());
            for col in 0..dim {
                let a = u[(i, col)];
                let b = u[(i + 1, col)];
                u[(i, col)] = c * a - s * b;
                u[(i + 1, col)] = s * a + c * b;
            }
        };
        match self {
            RotationPlan::BrickWall { layers, angles } => {
                for layer in 0..*layers {
                    let mut i = layer % 2;
                    while i + 1 < dim {
                        rotate(&mut u, i, angles.eval(i));
                        i += 2;
                    }
                }
            }
            RotationPlan::Staircase { angles } => {
                for i in 0..dim.saturating_sub(1) {
                    rotate(&mut u, i, angles.eval(i));
                }
            }
        }
        u
    }
}

/// Site-local couplings of the fermion lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeConfig {
    pub sites: usize,
    /// On-site field of each site, coupling its number operator.
    pub onsite: Vec<f64>,
    /// Nearest-neighbor hopping amplitude of bond `(p, p+1)`.
    pub hopping: Vec<f64>,
}

pub const MIN_SITES: usize = 2;
pub const MAX_SITES: usize = 12;

impl LatticeConfig {
    pub fn uniform(sites: usize, field: f64, hop: f64) -> Result<Self> {
        let cfg = Self {
            sites,
            onsite: vec![field; sites],
            hopping: vec![hop; sites.saturating_sub(1)],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < MIN_SITES || self.sites > MAX_SITES {
            return Err(CoreError::SiteOutOfRange {
                sites: self.sites,
                min: MIN_SITES,
                max: MAX_SITES,
            });
        }
        if self.onsite.len() != self.sites || self.hopping.len() + 1 != self.sites {
            return Err(CoreError::Param(
                "lattice couplings must provide one field per site and one hop per bond".into(),
            ));
        }
        Ok(())
    }
}

enum FamilyKind {
    Diagonal {
        h: HRule,
    },
    Rotated {
        h: HRule,
        plan: RotationPlan,
        basis: DMatrix<f64>,
        basis_c: Operator,
    },
    Lattice {
        cfg: LatticeConfig,
        basis: OccupationBasis,
        eigen_memo: Mutex<HashMap<usize, Arc<(Vec<f64>, Operator)>>>,
    },
}

/// A cutoff-indexed family of bounded Hermitian operators on the ambient
/// space.
pub struct HamiltonianFamily {
    spectrum: Spectrum,
    kind: FamilyKind,
}

impl HamiltonianFamily {
    pub fn diagonal(spectrum: Spectrum, h: HRule) -> Self {
        Self {
            spectrum,
            kind: FamilyKind::Diagonal { h },
        }
    }

    pub fn rotated(spectrum: Spectrum, h: HRule, plan: RotationPlan) -> Result<Self> {
        if spectrum.degeneracies().iter().any(|&d| d != 1) {
            return Err(CoreError::Param(
                "rotated families need a simple spectrum (rank-one projectors)".into(),
            ));
        }
        let basis = plan.build_basis(spectrum.ambient_dim());
        let basis_c = basis.map(|v| Complex64::new(v, 0.0));
        Ok(Self {
            spectrum,
            kind: FamilyKind::Rotated {
                h,
                plan,
                basis,
                basis_c,
            },
        })
    }

    pub fn lattice(spectrum: Spectrum, cfg: LatticeConfig) -> Result<Self> {
        cfg.validate()?;
        if spectrum.ambient_dim() != 1 << cfg.sites {
            return Err(CoreError::DimMismatch {
                left: spectrum.ambient_dim(),
                right: 1 << cfg.sites,
            });
        }
        let basis = OccupationBasis::new(cfg.sites);
        Ok(Self {
            spectrum,
            kind: FamilyKind::Lattice {
                cfg,
                basis,
                eigen_memo: Mutex::new(HashMap::new()),
            },
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            FamilyKind::Diagonal { .. } => "diagonal",
            FamilyKind::Rotated { .. } => "rotated",
            FamilyKind::Lattice { .. } => "lattice",
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.kind, FamilyKind::Diagonal { .. })
    }

    /// Largest admissible cutoff: the top level (diagonal, rotated) or the
    /// last site (lattice).
    pub fn max_cutoff(&self) -> usize {
        match &self.kind {
            FamilyKind::Lattice { cfg, .. } => cfg.sites - 1,
            _ => self.spectrum.level_count() - 1,
        }
    }

    fn check_cutoff(&self, level: usize) -> Result<()> {
        if level > self.max_cutoff() {
            return Err(CoreError::LevelOutOfRange {
                level,
                count: self.max_cutoff() + 1,
            });
        }
        Ok(())
    }

    /// `h_l` of a single level, for the projector-sum kinds.
    pub fn level_coefficient(&self, l: usize) -> Option<f64> {
        let h = match &self.kind {
            FamilyKind::Diagonal { h } => h,
            FamilyKind::Rotated { h, .. } => h,
            FamilyKind::Lattice { .. } => return None,
        };
        Some(h.eval(l, self.spectrum.value(l)))
    }

    /// Coefficients `h_l` for levels `<= L`, for the projector-sum kinds.
    fn coefficients(&self, cutoff: usize) -> Option<Vec<f64>> {
        let h = match &self.kind {
            FamilyKind::Diagonal { h } => h,
            FamilyKind::Rotated { h, .. } => h,
            FamilyKind::Lattice { .. } => return None,
        };
        Some(
            (0..=cutoff)
                .map(|l| h.eval(l, self.spectrum.value(l)))
                .collect(),
        )
    }

    /// The regularized Hamiltonian `H_L`.
    pub fn hamiltonian(&self, cutoff: usize) -> Result<Operator> {
        self.check_cutoff(cutoff)?;
        let dim = self.spectrum.ambient_dim();
        match &self.kind {
            FamilyKind::Diagonal { .. } => {
                let hs = self.coefficients(cutoff).unwrap();
                let mut m = Operator::zeros(dim, dim);
                for (l, &hv) in hs.iter().enumerate() {
                    for i in self.spectrum.level_range(l) {
                        m[(i, i)] = Complex64::new(hv, 0.0);
                    }
                }
                Ok(m)
            }
            FamilyKind::Rotated { basis_c, .. } => {
                let hs = self.coefficients(cutoff).unwrap();
                let mut d = Operator::zeros(dim, dim);
                for (l, &hv) in hs.iter().enumerate() {
                    d[(l, l)] = Complex64::new(hv, 0.0);
                }
                Ok(basis_c * d * basis_c.transpose())
            }
            FamilyKind::Lattice { cfg, basis, .. } => {
                let mut m = Operator::zeros(dim, dim);
                for p in 0..=cutoff {
                    if cfg.onsite[p] != 0.0 {
                        m += basis.number(p) * Complex64::new(cfg.onsite[p], 0.0);
                    }
                }
                for p in 0..cutoff {
                    if cfg.hopping[p] != 0.0 {
                        let hop = basis.creation(p) * basis.annihilation(p + 1);
                        let hop = &hop + hop.adjoint();
                        m += hop * Complex64::new(cfg.hopping[p], 0.0);
                    }
                }
                Ok(m)
            }
        }
    }

    /// `U_L(t) = exp(i t H_L)`, through the structure of the kind: phases on
    /// the shared projectors for the commuting kinds, a memoized Hermitian
    /// eigendecomposition for the lattice.
    pub fn propagator(&self, cutoff: usize, t: f64) -> Result<Operator> {
        self.check_cutoff(cutoff)?;
        let dim = self.spectrum.ambient_dim();
        match &self.kind {
            FamilyKind::Diagonal { .. } => {
                let hs = self.coefficients(cutoff).unwrap();
                let mut m = Operator::identity(dim, dim);
                for (l, &hv) in hs.iter().enumerate() {
                    let phase = Complex64::new(0.0, t * hv).exp();
                    for i in self.spectrum.level_range(l) {
                        m[(i, i)] = phase;
                    }
                }
                Ok(m)
            }
            FamilyKind::Rotated { basis_c, .. } => {
                let hs = self.coefficients(cutoff).unwrap();
                let mut d = Operator::identity(dim, dim);
                for (l, &hv) in hs.iter().enumerate() {
                    d[(l, l)] = Complex64::new(0.0, t * hv).exp();
                }
                Ok(basis_c * d * basis_c.transpose())
            }
            FamilyKind::Lattice { eigen_memo, .. } => {
                let eig = {
                    let mut memo = eigen_memo.lock().expect("eigen memo poisoned");
                    if let Some(e) = memo.get(&cutoff) {
                        Arc::clone(e)
                    } else {
                        let h = self.hamiltonian(cutoff)?;
                        let se = SymmetricEigen::new(h);
                        let vals: Vec<f64> = se.eigenvalues.iter().copied().collect();
                        let entry = Arc::new((vals, se.eigenvectors));
                        memo.insert(cutoff, Arc::clone(&entry));
                        entry
                    }
                };
                let (vals, vecs) = (&eig.0, &eig.1);
                let mut phased = vecs.clone();
                for (j, &l) in vals.iter().enumerate() {
                    let phase = Complex64::new(0.0, t * l).exp();
                    for i in 0..dim {
                        phased[(i, j)] *= phase;
                    }
                }
                Ok(phased * vecs.adjoint())
            }
        }
    }

    /// `exp(-beta H_L)`, through the same structure as `propagator`.
    pub fn heat_kernel(&self, cutoff: usize, beta: f64) -> Result<Operator> {
        self.check_cutoff(cutoff)?;
        let dim = self.spectrum.ambient_dim();
        match &self.kind {
            FamilyKind::Diagonal { .. } => {
                let hs = self.coefficients(cutoff).unwrap();
                let mut m = Operator::identity(dim, dim);
                for (l, &hv) in hs.iter().enumerate() {
                    let w = Complex64::new((-beta * hv).exp(), 0.0);
                    for i in self.spectrum.level_range(l) {
                        m[(i, i)] = w;
                    }
                }
                Ok(m)
            }
            FamilyKind::Rotated { basis_c, .. } => {
                let hs = self.coefficients(cutoff).unwrap();
                let mut d = Operator::identity(dim, dim);
                for (l, &hv) in hs.iter().enumerate() {
                    d[(l, l)] = Complex64::new((-beta * hv).exp(), 0.0);
                }
                Ok(basis_c * d * basis_c.transpose())
            }
            FamilyKind::Lattice { eigen_memo, .. } => {
                let eig = {
                    let mut memo = eigen_memo.lock().expect("eigen memo poisoned");
                    if let Some(e) = memo.get(&cutoff) {
                        Arc::clone(e)
                    } else {
                        let h = self.hamiltonian(cutoff)?;
                        let se = SymmetricEigen::new(h);
                        let vals: Vec<f64> = se.eigenvalues.iter().copied().collect();
                        let entry = Arc::new((vals, se.eigenvectors));
                        memo.insert(cutoff, Arc::clone(&entry));
                        entry
                    }
                };
                let (vals, vecs) = (&eig.0, &eig.1);
                let mut weighted = vecs.clone();
                for (j, &l) in vals.iter().enumerate() {
                    let w = Complex64::new((-beta * l).exp(), 0.0);
                    for i in 0..dim {
                        weighted[(i, j)] *= w;
                    }
                }
                Ok(weighted * vecs.adjoint())
            }
        }
    }

    /// `|<phi_l, psi_k>|` between the `S` eigenbasis and the rotated basis.
    pub fn overlap_matrix(&self) -> Result<DMatrix<f64>> {
        match &self.kind {
            FamilyKind::Rotated { basis, .. } => Ok(basis.map(f64::abs)),
            _ => Err(CoreError::WrongKind {
                expected: "rotated",
                got: self.kind_name(),
            }),
        }
    }

    pub fn rotation_plan(&self) -> Option<&RotationPlan> {
        match &self.kind {
            FamilyKind::Rotated { plan, .. } => Some(plan),
            _ => None,
        }
    }

    pub fn lattice_config(&self) -> Option<&LatticeConfig> {
        match &self.kind {
            FamilyKind::Lattice { cfg, .. } => Some(cfg),
            _ => None,
        }
    }

    pub fn occupation_basis(&self) -> Option<&OccupationBasis> {
        match &self.kind {
            FamilyKind::Lattice { basis, .. } => Some(basis),
            _ => None,
        }
    }
}

/// `exp(i t H)` through a Hermitian eigendecomposition, for an arbitrary
/// Hermitian matrix.
pub fn propagator(h: &Operator, t: f64) -> Result<Operator> {
    let defect = hermiticity_defect(h);
    let tol = 1e-12 * max_abs(h).max(1.0);
    if defect > tol {
        return Err(CoreError::NotHermitian { defect, tol });
    }
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let se = SymmetricEigen::new(sym);
    let dim = h.nrows();
    let mut phased = se.eigenvectors.clone();
    for (j, &l) in se.eigenvalues.iter().enumerate() {
        let phase = Complex64::new(0.0, t * l).exp();
        for i in 0..dim {
            phased[(i, j)] *= phase;
        }
    }
    Ok(phased * se.eigenvectors.adjoint())
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    check_square_match(a, b)?;
    Ok(a * b - b * a)
}

/// k-fold nesting `[A, [A, ... [A, B]]]`; `k = 1` is the plain commutator.
pub fn iterated_commutator(a: &Operator, b: &Operator, k: usize) -> Result<Operator> {
    check_square_match(a, b)?;
    let mut out = commutator(a, b)?;
    for _ in 1..k {
        out = commutator(a, &out)?;
    }
    Ok(out)
}
