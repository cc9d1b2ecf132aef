//! Fermionic ladder operators on an occupation-bitstring basis.
//!
//! Anticommutation is carried by Jordan-Wigner sign strings over the sites
//! below the acting one. Basis states are sorted by total occupation so the
//! total-number levels form contiguous blocks, matching the grouped layout
//! of `Spectrum`.

use num_complex::Complex64;

use crate::operator::Operator;

/// Bitstring basis of `sites` fermionic modes, sorted by (occupation, bits).
pub struct OccupationBasis {
    sites: usize,
    /// `order[idx]` is the bitstring of sorted basis index `idx`.
    order: Vec<usize>,
    /// Inverse map, bitstring to sorted index.
    index_of: Vec<usize>,
}

impl OccupationBasis {
    pub fn new(sites: usize) -> Self {
        let dim = 1usize << sites;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by_key(|&b| (b.count_ones(), b));
        let mut index_of = vec![0usize; dim];
        for (idx, &b) in order.iter().enumerate() {
            index_of[b] = idx;
        }
        Self {
            sites,
            order,
            index_of,
        }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.order.len()
    }

    /// Occupation of site `p` in sorted basis state `idx`.
    pub fn occupation(&self, idx: usize, p: usize) -> bool {
        self.order[idx] >> p & 1 == 1
    }

    /// Total occupation of sorted basis state `idx`.
    pub fn total(&self, idx: usize) -> u32 {
        self.order[idx].count_ones()
    }

    /// Jordan-Wigner sign picked up by site `p` acting on bitstring `b`.
    fn jw_sign(b: usize, p: usize) -> f64 {
        let below = b & ((1usize << p) - 1);
        if below.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Annihilation operator of site `p` as a dense matrix.
    pub fn annihilation(&self, p: usize) -> Operator {
        assert!(p < self.sites, "site {p} out of range");
        let dim = self.dim();
        let mut m = Operator::zeros(dim, dim);
        for (col, &b) in self.order.iter().enumerate() {
            if b >> p & 1 == 1 {
                let target = b & !(1usize << p);
                let row = self.index_of[target];
                m[(row, col)] = Complex64::new(Self::jw_sign(b, p), 0.0);
            }
        }
        m
    }

    pub fn creation(&self, p: usize) -> Operator {
        self.annihilation(p).adjoint()
    }

    /// Number operator of site `p` (diagonal).
    pub fn number(&self, p: usize) -> Operator {
        assert!(p < self.sites, "site {p} out of range");
        let dim = self.dim();
        let mut m = Operator::zeros(dim, dim);
        for idx in 0..dim {
            if self.occupation(idx, p) {
                m[(idx, idx)] = Complex64::new(1.0, 0.0);
            }
        }
        m
    }

    /// Diagonal of the total-number operator.
    pub fn total_number_diag(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| f64::from(self.total(i))).collect()
    }

    /// Apply `a_p` to basis state `idx` by occupation rules alone, without
    /// any matrix: `None` when annihilated, else `(sign, target_idx)`. This
    /// is the independent oracle the anticommutator tests compare against.
    pub fn apply_annihilation(&self, idx: usize, p: usize) -> Option<(f64, usize)> {
        let b = self.order[idx];
        if b >> p & 1 == 0 {
            return None;
        }
        Some((Self::jw_sign(b, p), self.index_of[b & !(1usize << p)]))
    }

    /// Same for `a_p^dagger`.
    pub fn apply_creation(&self, idx: usize, p: usize) -> Option<(f64, usize)> {
        let b = self.order[idx];
        if b >> p & 1 == 1 {
            return None;
        }
        Some((Self::jw_sign(b, p), self.index_of[b | (1usize << p)]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator;

    #[test]
    fn basis_sorted_by_occupation() {
        let basis = OccupationBasis::new(3);
        let totals: Vec<u32> = (0..8).map(|i| basis.total(i)).collect();
        assert_eq!(totals, vec![0, 1, 1, 1, 2, 2, 2, 3]);
    }

    #[test]
    fn car_relations_small() {
        for sites in 2..=4 {
            let basis = OccupationBasis::new(sites);
            let dim = basis.dim();
            let id = operator::identity(dim);
            for p in 0..sites {
                for q in 0..sites {
                    let ap = basis.annihilation(p);
                    let aqd = basis.creation(q);
                    let anti = &ap * &aqd + &aqd * &ap;
                    let expect = if p == q {
                        id.clone()
                    } else {
                        operator::zeros(dim)
                    };
                    assert_eq!(anti, expect, "{{a_{p}, a_{q}^+}} at {sites} sites");
                    let aq = basis.annihilation(q);
                    let anti2 = &ap * &aq + &aq * &ap;
                    assert_eq!(anti2, operator::zeros(dim));
                }
            }
        }
    }

    #[test]
    fn number_equals_creation_annihilation() {
        let basis = OccupationBasis::new(4);
        for p in 0..4 {
            let n = basis.number(p);
            let built = basis.creation(p) * basis.annihilation(p);
            assert_eq!(n, built);
        }
    }

    #[test]
    fn matrix_matches_rule_oracle() {
        let basis = OccupationBasis::new(5);
        let dim = basis.dim();
        for p in 0..5 {
            let m = basis.annihilation(p);
            for idx in 0..dim {
                match basis.apply_annihilation(idx, p) {
                    Some((sign, row)) => {
                        assert_eq!(m[(row, idx)].re, sign);
                    }
                    None => {
                        for row in 0..dim {
                            assert_eq!(m[(row, idx)], Complex64::new(0.0, 0.0));
                        }
                    }
                }
            }
        }
    }
}
