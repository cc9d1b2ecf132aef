//! Concrete model bundles: the bosonic number-scale model, the fermion
//! lattice with its degenerate total-number spectrum, rotated-projector
//! families with measured overlap regimes, and the coefficient rules that
//! defeat convergence of the Hamiltonian sequence itself.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::hamiltonian::{HRule, HamiltonianFamily, LatticeConfig, RotationPlan};
use crate::operator::Operator;
use crate::spectral::{make_spectrum, Degeneracy, Spectrum, SpectrumKind, TestFunction};

/// A spectrum, a Hamiltonian family on it, and named observables sharing the
/// ambient space.
pub struct ModelBundle {
    pub family: HamiltonianFamily,
    pub observables: BTreeMap<String, Operator>,
    pub label: String,
}

impl ModelBundle {
    pub fn spectrum(&self) -> &Spectrum {
        self.family.spectrum()
    }

    pub fn observable(&self, name: &str) -> Result<&Operator> {
        self.observables
            .get(name)
            .ok_or_else(|| CoreError::Param(format!("unknown observable {name}")))
    }
}

/// Truncated bosonic ladder operators on `dim` number states.
pub fn bosonic_ladder(dim: usize) -> (Operator, Operator, Operator) {
    let mut a = Operator::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let adag = a.adjoint();
    let num = &adag * &a;
    (a, adag, num)
}

/// Number-operator scale model: `s_l = 1 + l` on simple levels, diagonal
/// family with the given coefficient rule, ladder observables.
pub fn bosonic_example(level_count: usize, h_rule: HRule) -> Result<ModelBundle> {
    if level_count < 2 {
        return Err(CoreError::Param("bosonic model needs >= 2 levels".into()));
    }
    let spec = make_spectrum(SpectrumKind::ShiftedInteger, level_count, Degeneracy::Simple)?;
    let dim = spec.ambient_dim();
    let family = HamiltonianFamily::diagonal(spec, h_rule);
    let (a, adag, num) = bosonic_ladder(dim);
    let mut rank_one = Operator::zeros(dim, dim);
    rank_one[(0, 1)] = Complex64::new(1.0, 0.0);
    let mut observables = BTreeMap::new();
    observables.insert("a".into(), a);
    observables.insert("adag".into(), adag);
    observables.insert("n".into(), num);
    observables.insert("rank_one_01".into(), rank_one);
    Ok(ModelBundle {
        family,
        observables,
        label: "bosonic".into(),
    })
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out = 1usize;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

/// Fermion lattice model: occupation basis sorted by total number, scale
/// operator `1 + N_total` with binomial degeneracies, site-cutoff family,
/// and localized observables at the designated site.
pub fn fermion_lattice(sites: usize, cfg: LatticeConfig) -> Result<ModelBundle> {
    if cfg.sites != sites {
        return Err(CoreError::Param(format!(
            "coupling config is for {} sites, requested {sites}",
            cfg.sites
        )));
    }
    cfg.validate()?;
    let levels = sites + 1;
    let values: Vec<f64> = (0..levels).map(|n| 1.0 + n as f64).collect();
    let degeneracy: Vec<usize> = (0..levels).map(|n| binomial(sites, n)).collect();
    let spec = make_spectrum(
        SpectrumKind::Explicit(values),
        levels,
        Degeneracy::PerLevel(degeneracy),
    )?;
    let family = HamiltonianFamily::lattice(spec, cfg)?;

    let basis = family.occupation_basis().expect("lattice family");
    let j0 = 1.min(sites - 1);
    let dim = basis.dim();
    let a_j0 = basis.annihilation(j0);
    let n_j0 = basis.number(j0);
    let b_j0 = Operator::identity(dim, dim) - &n_j0;
    let hop = basis.creation(j0) * basis.annihilation((j0 + 1) % sites);
    let local_product = &hop + hop.adjoint();

    let mut observables = BTreeMap::new();
    observables.insert("adag_j0".into(), a_j0.adjoint());
    observables.insert("a_j0".into(), a_j0);
    observables.insert("n_j0".into(), n_j0);
    observables.insert("one_minus_n_j0".into(), b_j0);
    observables.insert("local_product".into(), local_product);
    Ok(ModelBundle {
        family,
        observables,
        label: format!("fermion_lattice_{sites}"),
    })
}

/// Requested shape of the measured overlap profile of a rotated family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapRegime {
    /// Overlaps vanish beyond a finite band.
    BandedFiniteR,
    /// Upper overlap profile decays geometrically in the offset, with
    /// summable mass.
    L1Profile,
    /// Upper overlap mass per column decays along the sequence.
    BkSummable,
}

impl OverlapRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            OverlapRegime::BandedFiniteR => "banded_finite_r",
            OverlapRegime::L1Profile => "l1_profile",
            OverlapRegime::BkSummable => "bk_summable",
        }
    }
}

/// Measured overlap data of a rotated family.
#[derive(Debug, Clone)]
pub struct OverlapProfile {
    /// `overlap[(l, k)] = |<phi_l, psi_k>|`.
    pub overlap: DMatrix<f64>,
    /// `upper[j][k] = overlap[(k + j, k)]`: the upper profile by offset.
    pub upper: Vec<Vec<f64>>,
    /// Column mass of the upper profile: `B_k = sum_j upper[j][k]^2`.
    pub b_k: Vec<f64>,
    pub band: Option<usize>,
    /// Interior spread of each offset row: deviation from translation
    /// invariance.
    pub translation_defect: f64,
    /// `sum_j max_k upper[j][k]`.
    pub upper_mass: f64,
}

const INTERIOR_TRIM: usize = 4;

impl OverlapProfile {
    pub fn measure(fam: &HamiltonianFamily) -> Result<Self> {
        let overlap = fam.overlap_matrix()?;
        let dim = overlap.nrows();
        let mut upper = Vec::new();
        for j in 0..dim {
            upper.push((0..dim - j).map(|k| overlap[(k + j, k)]).collect::<Vec<f64>>());
        }
        let b_k: Vec<f64> = (0..dim)
            .map(|k| (k..dim).map(|l| overlap[(l, k)] * overlap[(l, k)]).sum())
            .collect();
        let mut translation_defect = 0.0f64;
        for (j, row) in upper.iter().enumerate() {
            if row.len() <= 2 * INTERIOR_TRIM {
                continue;
            }
            let interior = &row[INTERIOR_TRIM..row.len() - INTERIOR_TRIM];
            let lo = interior.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            let hi = interior.iter().fold(0.0f64, |a, &b| a.max(b));
            translation_defect = translation_defect.max(hi - lo);
            let _ = j;
        }
        let upper_mass = upper
            .iter()
            .map(|row| row.iter().fold(0.0f64, |a, &b| a.max(b)))
            .sum();
        Ok(Self {
            overlap,
            upper,
            b_k,
            band: fam.rotation_plan().and_then(|p| p.band()),
            translation_defect,
            upper_mass,
        })
    }

    /// Offset profile maxima `max_k upper[j][k]`.
    pub fn offset_maxima(&self) -> Vec<f64> {
        self.upper
            .iter()
            .map(|row| row.iter().fold(0.0f64, |a, &b| a.max(b)))
            .collect()
    }

    /// Translation-invariant summable-profile gate: the interior profile is
    /// constant per offset within `tol_translation` and decays geometrically
    /// beyond the first offset.
    pub fn gate_translation_invariant_l1(&self, tol_translation: f64) -> bool {
        if self.translation_defect > tol_translation {
            return false;
        }
        let maxima = self.offset_maxima();
        if maxima.first().copied().unwrap_or(0.0) < 1e-8 {
            return false;
        }
        // geometric decay of offsets 1.. : each step shrinks by at least 5%
        let active: Vec<f64> = maxima
            .iter()
            .copied()
            .take_while(|&v| v > 1e-12)
            .collect();
        if active.len() < 3 {
            return true;
        }
        active.windows(2).skip(1).all(|w| w[1] <= 0.95 * w[0] + 1e-12)
    }

    /// Summable column-mass gate: `B_k` falls below `tol` on the top
    /// section.
    pub fn gate_bk_summable(&self, tol: f64) -> bool {
        let skip = self.b_k.len() / 3;
        self.b_k[skip..].iter().all(|&b| b < tol)
    }
}

/// A rotated bundle plus its measured overlap profile.
pub struct RotatedModel {
    pub bundle: ModelBundle,
    pub profile: OverlapProfile,
    pub regime: OverlapRegime,
}

pub const TRANSLATION_TOL: f64 = 1e-10;
pub const BK_TOL: f64 = 1e-3;

/// Build a rotated family and verify the measured overlaps realize the
/// requested regime.
pub fn rotated_example(
    level_count: usize,
    h_rule: HRule,
    plan: RotationPlan,
    regime: OverlapRegime,
) -> Result<RotatedModel> {
    let spec = make_spectrum(SpectrumKind::ShiftedInteger, level_count, Degeneracy::Simple)?;
    let dim = spec.ambient_dim();
    let family = HamiltonianFamily::rotated(spec, h_rule, plan)?;
    let profile = OverlapProfile::measure(&family)?;

    let ok = match regime {
        OverlapRegime::BandedFiniteR => match profile.band {
            Some(band) => {
                let mut banded = true;
                for l in 0..dim {
                    for k in 0..dim {
                        if l.abs_diff(k) > band && profile.overlap[(l, k)] != 0.0 {
                            banded = false;
                        }
                    }
                }
                banded
            }
            None => false,
        },
        OverlapRegime::L1Profile => profile.gate_translation_invariant_l1(TRANSLATION_TOL),
        OverlapRegime::BkSummable => profile.gate_bk_summable(BK_TOL),
    };
    if !ok {
        return Err(CoreError::RegimeUnachievable {
            regime: regime.as_str().into(),
            detail: format!(
                "translation defect {:.3e}, B_k tail max {:.3e}, band {:?}",
                profile.translation_defect,
                profile
                    .b_k
                    .iter()
                    .skip(profile.b_k.len() / 3)
                    .fold(0.0f64, |a, &b| a.max(b)),
                profile.band
            ),
        });
    }

    let mut rank_one = Operator::zeros(dim, dim);
    rank_one[(0, 1)] = Complex64::new(1.0, 0.0);
    let mut observables = BTreeMap::new();
    observables.insert("rank_one_01".into(), rank_one);
    Ok(RotatedModel {
        bundle: ModelBundle {
            family,
            observables,
            label: format!("rotated_{}", regime.as_str()),
        },
        profile,
        regime,
    })
}

/// The coefficient rule `h_l = f0(s_l)^{-1}` (squared: `f0(s_l)^{-2}`):
/// every increment of the Hamiltonian sequence has unit (resp. diverging)
/// weighted seminorm, so `{H_L}` cannot be Cauchy there.
pub fn counterexample_h(f0: TestFunction, squared: bool) -> HRule {
    HRule::InverseTest { f0, squared }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{alpha_l, unitary_cauchy};
    use crate::hamiltonian::AngleRule;
    use crate::operator;
    use crate::seminorm::{op_norm, seminorm_f, seminorm_fk};
    use approx::assert_relative_eq;

    #[test]
    fn bosonic_ladder_algebra() {
        let (a, adag, num) = bosonic_ladder(10);
        // a^dagger a = N exactly on the truncation
        assert_eq!(&adag * &a, num);
        // [a, a^dagger] = 1 except the top diagonal entry
        let comm = &a * &adag - &adag * &a;
        for i in 0..9 {
            for j in 0..10 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(comm[(i, j)].re, expect, epsilon = 1e-12);
                assert_eq!(comm[(i, j)].im, 0.0);
            }
        }
        assert_relative_eq!(comm[(9, 9)].re, -9.0, epsilon = 1e-12);
    }

    #[test]
    fn bosonic_dynamics_insensitive_to_coefficient_growth() {
        // the regularized propagators stay Cauchy in |S^{-1} . | for every
        // coefficient preset, including the seminorm-defeating one
        let cutoffs: Vec<usize> = (0..20).collect();
        let rules = [
            HRule::Zero,
            HRule::Linear,
            HRule::Power { exponent: 2.0 },
            counterexample_h(TestFunction::exp(1.0).unwrap(), false),
        ];
        for rule in rules {
            let bundle = bosonic_example(40, rule).unwrap();
            let rows = unitary_cauchy(&bundle.family, 1, 0.7, &cutoffs).unwrap();
            for r in &rows {
                assert!(r.exact <= r.tail_bound.unwrap() + 1e-12);
                assert_relative_eq!(r.exact, r.closed_form.unwrap(), epsilon = 1e-12);
            }
            // late pairs are small
            let last = rows.last().unwrap();
            assert!(last.exact <= 2.0 / 20.0 + 1e-12);
        }
    }

    #[test]
    fn bosonic_zero_rule_freezes_dynamics() {
        let bundle = bosonic_example(12, HRule::Zero).unwrap();
        let x = bundle.observable("a").unwrap();
        for l in [0, 5, 11] {
            let moved = alpha_l(&bundle.family, l, x, 1.3).unwrap();
            assert_eq!(&moved, x);
        }
    }

    #[test]
    fn fermion_lattice_degeneracies() {
        let cfg = LatticeConfig::uniform(3, 1.0, 0.5).unwrap();
        let bundle = fermion_lattice(3, cfg).unwrap();
        let spec = bundle.spectrum();
        assert_eq!(spec.ambient_dim(), 8);
        assert_eq!(spec.degeneracies(), &[1, 3, 3, 1]);
        assert_eq!(spec.value(1), 2.0);
    }

    #[test]
    fn lattice_commutation_identity() {
        // [a_j0, S] = (1 - N_j0) a_j0 with S = 1 + N_total
        let cfg = LatticeConfig::uniform(4, 0.8, 0.3).unwrap();
        let bundle = fermion_lattice(4, cfg).unwrap();
        let spec = bundle.spectrum();
        let s = spec.power_matrix(1);
        let a = bundle.observable("a_j0").unwrap();
        let b = bundle.observable("one_minus_n_j0").unwrap();
        let lhs = a * &s - &s * a;
        let rhs = b * a;
        assert!(op_norm(&(&lhs - &rhs)) < 1e-12);
    }

    #[test]
    fn lattice_hamiltonian_is_hermitian() {
        let cfg = LatticeConfig::uniform(4, 0.8, 0.3).unwrap();
        let bundle = fermion_lattice(4, cfg).unwrap();
        for l in 0..4 {
            let h = bundle.family.hamiltonian(l).unwrap();
            assert!(crate::operator::hermiticity_defect(&h) < 1e-13);
        }
    }

    #[test]
    fn site_range_enforced() {
        assert!(matches!(
            LatticeConfig::uniform(1, 0.0, 0.0),
            Err(CoreError::SiteOutOfRange { .. })
        ));
        assert!(matches!(
            LatticeConfig::uniform(13, 0.0, 0.0),
            Err(CoreError::SiteOutOfRange { .. })
        ));
    }

    #[test]
    fn rotated_zero_angles_identity_overlap() {
        let plan = RotationPlan::BrickWall {
            layers: 1,
            angles: AngleRule::Constant(0.0),
        };
        let m = rotated_example(12, HRule::Linear, plan, OverlapRegime::BandedFiniteR).unwrap();
        assert_eq!(m.profile.overlap, DMatrix::<f64>::identity(12, 12));
    }

    #[test]
    fn rotated_regimes_and_gates() {
        let banded = rotated_example(
            24,
            HRule::Linear,
            RotationPlan::BrickWall {
                layers: 1,
                angles: AngleRule::Constant(std::f64::consts::PI / 6.0),
            },
            OverlapRegime::BandedFiniteR,
        )
        .unwrap();
        // orthonormality: column sums of squares are 1
        for k in 0..24 {
            let s: f64 = (0..24)
                .map(|l| banded.profile.overlap[(l, k)].powi(2))
                .sum();
            assert_relative_eq!(s, 1.0, epsilon = 1e-12);
        }

        let l1 = rotated_example(
            30,
            HRule::Linear,
            RotationPlan::Staircase {
                angles: AngleRule::Constant(std::f64::consts::PI / 6.0),
            },
            OverlapRegime::L1Profile,
        )
        .unwrap();
        assert!(l1.profile.gate_translation_invariant_l1(TRANSLATION_TOL));
        assert!(!l1.profile.gate_bk_summable(BK_TOL));

        let bk = rotated_example(
            30,
            HRule::Linear,
            RotationPlan::Staircase {
                angles: AngleRule::ShiftLike {
                    eps: 0.4,
                    ratio: 0.6,
                },
            },
            OverlapRegime::BkSummable,
        )
        .unwrap();
        assert!(bk.profile.gate_bk_summable(BK_TOL));
        assert!(!bk.profile.gate_translation_invariant_l1(TRANSLATION_TOL));
    }

    #[test]
    fn regime_mismatch_reports_profile() {
        let out = rotated_example(
            24,
            HRule::Linear,
            RotationPlan::BrickWall {
                layers: 1,
                angles: AngleRule::Constant(0.3),
            },
            OverlapRegime::BkSummable,
        );
        match out {
            Err(CoreError::RegimeUnachievable { .. }) => {}
            Err(other) => panic!("unexpected error {other:?}"),
            Ok(_) => panic!("regime should be unachievable"),
        }
    }

    #[test]
    fn counterexample_unit_increments() {
        let f0 = TestFunction::exp(1.0).unwrap();
        let bundle = bosonic_example(30, counterexample_h(f0, false)).unwrap();
        let fam = &bundle.family;
        let spec = bundle.spectrum();
        for l in 1..20 {
            let diff = fam.hamiltonian(l).unwrap() - fam.hamiltonian(l - 1).unwrap();
            let inc = seminorm_fk(&diff, &f0, 0, spec).unwrap();
            assert_relative_eq!(inc, 1.0, epsilon = 1e-12);
            // the two-sided weight converges for the unsquared rule
            let weak = seminorm_f(&diff, &f0, spec).unwrap();
            assert_relative_eq!(weak, (-(1.0 + l as f64)).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn counterexample_squared_defeats_weak_topology_too() {
        let f0 = TestFunction::exp(1.0).unwrap();
        let bundle = bosonic_example(30, counterexample_h(f0, true)).unwrap();
        let fam = &bundle.family;
        let spec = bundle.spectrum();
        for l in 1..20 {
            let diff = fam.hamiltonian(l).unwrap() - fam.hamiltonian(l - 1).unwrap();
            let weak = seminorm_f(&diff, &f0, spec).unwrap();
            assert_relative_eq!(weak, 1.0, epsilon = 1e-12);
            let inc = seminorm_fk(&diff, &f0, 0, spec).unwrap();
            assert_relative_eq!(inc, (1.0 + l as f64).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn moderate_growth_contrast() {
        let f0 = TestFunction::exp(1.0).unwrap();
        let bundle = bosonic_example(40, HRule::Linear).unwrap();
        let fam = &bundle.family;
        let spec = bundle.spectrum();
        let h10 = fam.hamiltonian(10).unwrap();
        let h30 = fam.hamiltonian(30).unwrap();
        let d = seminorm_fk(&(&h30 - &h10), &f0, 0, spec).unwrap();
        assert!(d < 2e-4, "got {d}");
        let _ = operator::zeros(1);
    }
}
