//! Greedy partition of the degree-`k` barycentric lattice into
//! `(sub-simplex, derivative order)` groups.
//!
//! Levels are processed from vertices up to the cell interior. At level
//! `l` an index `alpha` that no lower level has claimed joins group
//! `(F, d)` when the components of `alpha` on the face `F` sum to `k - d`,
//! with `d` running over `0..=max_order(l)`. Pairs are tried in
//! `(d, F)` order, so the smallest order (and then the lexicographically
//! first face) wins. Within a group, members keep lattice order and their
//! position is the group ordinal.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    binomial, dim_pk, enumerate_multiindices, enumerate_subsimplices, MultiIndex, SubSimplex,
    MAX_DIM,
};
use crate::counts::{CountReport, LevelCount};
use crate::error::{Error, Result};

/// `(n, m, k1)` of a `C^m-P_k^(n)` element with `k = m 2^n + 1 + k1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElementParams {
    pub n: usize,
    pub m: u32,
    pub k1: u32,
}

impl ElementParams {
    pub fn new(n: usize, m: i64, k1: i64) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::DimensionOutOfRange(n));
        }
        if m < 1 {
            return Err(Error::InvalidSmoothness(m));
        }
        if k1 < 0 {
            return Err(Error::NegativeExcess(k1));
        }
        Ok(ElementParams {
            n,
            m: m as u32,
            k1: k1 as u32,
        })
    }

    /// Polynomial degree.
    pub fn k(&self) -> u32 {
        self.m * (1 << self.n) + 1 + self.k1
    }

    /// Highest derivative order carried by a level-`level` face; the cell
    /// interior carries function values only.
    pub fn max_order(&self, level: usize) -> u32 {
        if level >= self.n {
            0
        } else {
            self.m * (1 << (self.n - 1 - level))
        }
    }

    /// `dim P_k^(n)`, the size of the lattice and of the element.
    pub fn dimension(&self) -> u64 {
        dim_pk(self.k() as i64, self.n)
    }
}

impl std::fmt::Display for ElementParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(n={}, m={}, k1={}, k={})",
            self.n,
            self.m,
            self.k1,
            self.k()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofGroup {
    pub subsimplex: SubSimplex,
    pub order: u32,
    /// Members in lattice order; the position is the ordinal.
    pub members: Vec<MultiIndex>,
}

impl DofGroup {
    pub fn level(&self) -> usize {
        self.subsimplex.level()
    }
}

/// Output of [`assign_dofs`]: every lattice index in exactly one group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofTable {
    pub params: ElementParams,
    /// Ordered by level, then derivative order, then sub-simplex.
    pub groups: Vec<DofGroup>,
}

impl DofTable {
    pub fn total(&self) -> usize {
        self.groups.iter().map(|g| g.members.len()).sum()
    }

    pub fn group(&self, subsimplex: &[usize], order: u32) -> Option<&DofGroup> {
        self.groups
            .iter()
            .find(|g| g.order == order && g.subsimplex.vertices() == subsimplex)
    }

    pub fn groups_at_level(&self, level: usize) -> impl Iterator<Item = &DofGroup> {
        self.groups.iter().filter(move |g| g.level() == level)
    }

    /// `(group index, ordinal)` for every member, in table order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &MultiIndex)> {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(gi, g)| g.members.iter().enumerate().map(move |(o, a)| (gi, o, a)))
    }

    /// Checks that the groups partition the lattice and that every member
    /// satisfies its membership condition.
    pub fn validate(&self) -> Result<()> {
        let p = self.params;
        let k = p.k();
        let mut seen = std::collections::HashSet::with_capacity(self.total());
        for g in &self.groups {
            if g.subsimplex.vertices().last().copied().unwrap_or(0) > p.n {
                return Err(Error::InvalidTable(format!(
                    "face {} outside the cell",
                    g.subsimplex
                )));
            }
            if g.order > p.max_order(g.level()) {
                return Err(Error::InvalidTable(format!(
                    "order {} exceeds the maximum for level {}",
                    g.order,
                    g.level()
                )));
            }
            for a in &g.members {
                if a.len() != p.n + 1 || a.degree() != k {
                    return Err(Error::InvalidTable(format!(
                        "{a} is not a degree-{k} index"
                    )));
                }
                if a.partial_sum(g.subsimplex.vertices()) != k - g.order {
                    return Err(Error::InvalidTable(format!(
                        "{a} does not belong to face {} at order {}",
                        g.subsimplex, g.order
                    )));
                }
                if !seen.insert(a) {
                    return Err(Error::InvalidTable(format!("{a} appears twice")));
                }
            }
        }
        if seen.len() as u64 != p.dimension() {
            return Err(Error::Unassigned {
                count: (p.dimension() - seen.len() as u64) as usize,
            });
        }
        Ok(())
    }
}

/// Runs the greedy level-by-level assignment.
pub fn assign_dofs(params: ElementParams) -> Result<DofTable> {
    let n = params.n;
    let k = params.k();
    let lattice = enumerate_multiindices(n, k as i64)?;
    let mut claimed = vec![false; lattice.len()];
    let mut groups = Vec::new();

    for level in 0..=n {
        let faces = enumerate_subsimplices(n, level)?;
        let max_order = params.max_order(level);
        let base = groups.len();
        for order in 0..=max_order {
            for face in &faces {
                groups.push(DofGroup {
                    subsimplex: face.clone(),
                    order,
                    members: Vec::new(),
                });
            }
        }
        for (alpha, taken) in lattice.iter().zip(claimed.iter_mut()) {
            if *taken {
                continue;
            }
            // first (order, face) pair in scan order
            let mut best: Option<(u32, usize)> = None;
            for (fi, face) in faces.iter().enumerate() {
                let s = alpha.partial_sum(face.vertices());
                if s + max_order >= k {
                    let d = k - s;
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, fi));
                    }
                }
            }
            if let Some((d, fi)) = best {
                groups[base + d as usize * faces.len() + fi]
                    .members
                    .push(alpha.clone());
                *taken = true;
            }
        }
    }

    let left = claimed.iter().filter(|c| !**c).count();
    if left > 0 {
        return Err(Error::Unassigned { count: left });
    }
    Ok(DofTable { params, groups })
}

/// Per-level and per-order counts of an assignment table, with the
/// same-level homogeneity check.
pub fn group_summary(table: &DofTable) -> Result<CountReport> {
    let p = table.params;
    let mut levels = Vec::with_capacity(p.n + 1);
    for level in 0..=p.n {
        let simplex_count = binomial(p.n as u64 + 1, level as u64 + 1) as u64;
        let max_order = p.max_order(level);
        let mut per_order = Vec::with_capacity(max_order as usize + 1);
        let mut per_face = std::collections::BTreeMap::<&SubSimplex, u64>::new();
        for order in 0..=max_order {
            let counts: Vec<u64> = table
                .groups_at_level(level)
                .filter(|g| g.order == order)
                .map(|g| {
                    *per_face.entry(&g.subsimplex).or_default() += g.members.len() as u64;
                    g.members.len() as u64
                })
                .collect();
            if counts.windows(2).any(|w| w[0] != w[1]) {
                return Err(Error::Inhomogeneous { level, counts });
            }
            let sum: u64 = counts.iter().sum();
            per_order.push(sum / simplex_count);
        }
        let totals: Vec<u64> = per_face.values().copied().collect();
        if totals.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::Inhomogeneous {
                level,
                counts: totals,
            });
        }
        let per_entity: u64 = per_order.iter().sum();
        levels.push(LevelCount {
            level,
            simplex_count,
            per_order,
            per_entity,
            total: per_entity * simplex_count,
        });
    }
    let grand_total = levels.iter().map(|l| l.total).sum();
    Ok(CountReport {
        params: p,
        levels,
        grand_total,
        dim_pk: p.dimension(),
        mismatches: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Literal transcription of the three nested scans (face, order,
    /// lattice) used as an oracle for the one-pass implementation.
    fn scan_oracle(params: ElementParams) -> Vec<(usize, u32, Vec<usize>, Vec<MultiIndex>)> {
        let k = params.k();
        let lattice = enumerate_multiindices(params.n, k as i64).unwrap();
        let mut taken = vec![false; lattice.len()];
        let mut out = Vec::new();
        for level in 0..=params.n {
            for face in enumerate_subsimplices(params.n, level).unwrap() {
                for d in 0..=params.max_order(level) {
                    let mut members = Vec::new();
                    for (i, a) in lattice.iter().enumerate() {
                        if !taken[i] && a.partial_sum(face.vertices()) == k - d {
                            taken[i] = true;
                            members.push(a.clone());
                        }
                    }
                    out.push((level, d, face.vertices().to_vec(), members));
                }
            }
        }
        assert!(taken.iter().all(|t| *t));
        out
    }

    #[test]
    fn params_validation() {
        assert_eq!(ElementParams::new(3, 3, -1), Err(Error::NegativeExcess(-1)));
        assert_eq!(
            ElementParams::new(0, 1, 0),
            Err(Error::DimensionOutOfRange(0))
        );
        assert_eq!(
            ElementParams::new(7, 1, 0),
            Err(Error::DimensionOutOfRange(7))
        );
        assert_eq!(
            ElementParams::new(2, 0, 0),
            Err(Error::InvalidSmoothness(0))
        );
        let p = ElementParams::new(3, 3, 2).unwrap();
        assert_eq!(p.k(), 27);
        assert_eq!(p.max_order(0), 12);
        assert_eq!(p.max_order(1), 6);
        assert_eq!(p.max_order(2), 3);
        assert_eq!(p.max_order(3), 0);
    }

    #[test]
    fn reference_groups_for_c3_p27() {
        let t = assign_dofs(ElementParams::new(3, 3, 2).unwrap()).unwrap();
        assert_eq!(t.group(&[0, 1, 2], 0).unwrap().members.len(), 28);
        assert_eq!(t.group(&[1, 2, 3], 0).unwrap().members.len(), 28);
        assert_eq!(t.group(&[0, 3], 6).unwrap().members.len(), 56);
        assert_eq!(t.group(&[0, 1, 2, 3], 0).unwrap().members.len(), 360);
        assert_eq!(t.group(&[2], 12).unwrap().members.len(), 91);
        assert_eq!(t.total(), 4060);
        t.validate().unwrap();
    }

    #[test]
    fn argyris_layout() {
        let t = assign_dofs(ElementParams::new(2, 1, 0).unwrap()).unwrap();
        let s = group_summary(&t).unwrap();
        assert_eq!(s.levels[0].per_entity, 6);
        assert_eq!(s.levels[1].per_entity, 1);
        assert_eq!(s.levels[2].per_entity, 0);
        assert_eq!(s.grand_total, 21);
        let edge = t.group(&[0, 1], 1).unwrap();
        assert_eq!(edge.members, vec![MultiIndex::new(vec![2, 2, 1])]);
    }

    #[test]
    fn summary_of_reference_case() {
        let t = assign_dofs(ElementParams::new(3, 3, 2).unwrap()).unwrap();
        let s = group_summary(&t).unwrap();
        assert_eq!(s.levels[0].per_entity, 455);
        assert_eq!(s.levels[0].total, 1820);
        assert_eq!(s.levels[1].per_order, vec![2, 6, 12, 20, 30, 42, 56]);
        assert_eq!(s.levels[2].per_order, vec![28, 45, 63, 82]);
        assert_eq!(s.levels[3].per_entity, 360);
        assert_eq!(s.grand_total, 4060);
        assert_eq!(s.dim_pk, 4060);
    }

    #[test]
    fn matches_literal_scan_order() {
        for (n, m, k1) in [
            (1, 1, 0),
            (1, 2, 1),
            (2, 1, 0),
            (2, 2, 1),
            (3, 1, 0),
            (3, 1, 2),
            (4, 1, 0),
        ] {
            let p = ElementParams::new(n, m, k1).unwrap();
            let table = assign_dofs(p).unwrap();
            for (level, d, face, members) in scan_oracle(p) {
                let g = table.group(&face, d).unwrap();
                assert_eq!(g.level(), level);
                assert_eq!(g.members, members, "{p} face {face:?} order {d}");
            }
        }
    }

    #[test]
    fn inhomogeneous_tables_are_rejected() {
        let mut t = assign_dofs(ElementParams::new(2, 1, 1).unwrap()).unwrap();
        let moved = t
            .groups
            .iter_mut()
            .find(|g| g.level() == 1 && !g.members.is_empty())
            .unwrap();
        moved.members.pop();
        assert!(matches!(
            group_summary(&t),
            Err(Error::Inhomogeneous { level: 1, .. })
        ));
    }

    #[test]
    fn validate_detects_corruption() {
        let mut t = assign_dofs(ElementParams::new(2, 1, 1).unwrap()).unwrap();
        let a = t.groups[0].members[0].clone();
        t.groups.last_mut().unwrap().members.push(a);
        assert!(t.validate().is_err());
    }

    fn check_priority(table: &DofTable) {
        let p = table.params;
        let k = p.k();
        let faces: Vec<Vec<SubSimplex>> = (0..=p.n)
            .map(|l| enumerate_subsimplices(p.n, l).unwrap())
            .collect();
        for g in &table.groups {
            for a in &g.members {
                for (lower, level_faces) in faces.iter().enumerate().take(g.level()) {
                    for f in level_faces {
                        let s = a.partial_sum(f.vertices());
                        assert!(s + p.max_order(lower) < k, "{a} claimable by {f}");
                    }
                }
                // no earlier (order, face) pair at the same level
                for f in &faces[g.level()] {
                    let s = a.partial_sum(f.vertices());
                    if s + p.max_order(g.level()) >= k {
                        let d = k - s;
                        assert!(
                            (d, f) >= (g.order, &g.subsimplex),
                            "{a} claimed late by {}",
                            g.subsimplex
                        );
                    }
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn partition_membership_priority(n in 1usize..=4, m in 1i64..=2, k1 in 0i64..=2) {
            prop_assume!(n < 4 || (m == 1 && k1 <= 1));
            let p = ElementParams::new(n, m, k1).unwrap();
            let t = assign_dofs(p).unwrap();
            prop_assert!(t.validate().is_ok());
            prop_assert_eq!(t.total() as u64, p.dimension());
            check_priority(&t);
            let s = group_summary(&t).unwrap();
            prop_assert_eq!(s.grand_total, s.dim_pk);
        }
    }
}
