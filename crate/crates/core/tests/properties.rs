use std::collections::HashMap;

use proptest::prelude::*;
use smoothfem_core::combinatorics::binomial;
use smoothfem_core::export::{table_from_json, table_to_csv, table_to_json};
use smoothfem_core::{assign_dofs, closed_form_count, group_summary, ElementParams};

/// Every lattice index of total degree `k` in `n + 1` parts.
fn brute_lattice(n: usize, k: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![k]];
    }
    let mut out = Vec::new();
    for first in 0..=k {
        for mut rest in brute_lattice(n - 1, k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All faces with `level + 1` vertices, lexicographic.
fn brute_faces(n: usize, level: usize) -> Vec<Vec<usize>> {
    let mut faces: Vec<Vec<usize>> = (0u32..1 << (n + 1))
        .filter(|mask| mask.count_ones() as usize == level + 1)
        .map(|mask| (0..=n).filter(|v| mask & (1 << v) != 0).collect())
        .collect();
    faces.sort();
    faces
}

/// Owner `(face, order)` of `alpha` by direct search over the priority order.
fn owner(n: usize, m: u32, k: u32, alpha: &[u32]) -> (Vec<usize>, u32) {
    for level in 0..=n {
        let cap = if level == n { 0 } else { m << (n - 1 - level) };
        for d in 0..=cap {
            for face in brute_faces(n, level) {
                let s: u32 = face.iter().map(|&v| alpha[v]).sum();
                if s + d == k {
                    return (face, d);
                }
            }
        }
    }
    unreachable!("the cell interior claims everything left")
}

fn params() -> impl Strategy<Value = ElementParams> {
    (2usize..=3, 1i64..=3, 0i64..=2).prop_map(|(n, m, k1)| ElementParams::new(n, m, k1).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn groups_match_priority_oracle(p in params()) {
        let table = assign_dofs(p).unwrap();
        let mut seen: HashMap<Vec<u32>, (Vec<usize>, u32)> = HashMap::new();
        for g in &table.groups {
            for a in &g.members {
                let prev = seen.insert(a.entries().to_vec(), (g.subsimplex.vertices().to_vec(), g.order));
                prop_assert!(prev.is_none(), "{:?} assigned twice", a);
            }
        }
        let lattice = brute_lattice(p.n, p.k());
        prop_assert_eq!(seen.len(), lattice.len());
        for alpha in lattice {
            let expected = owner(p.n, p.m, p.k(), &alpha);
            prop_assert_eq!(seen.get(&alpha), Some(&expected), "alpha {:?}", alpha);
        }
    }

    #[test]
    fn level_counts_match_closed_forms(p in params()) {
        let summary = group_summary(&assign_dofs(p).unwrap()).unwrap();
        let mut total = 0u64;
        for level in &summary.levels {
            let closed = closed_form_count(p.n, p.m, p.k1, level.level).unwrap();
            prop_assert_eq!(level.per_entity, closed);
            prop_assert_eq!(level.simplex_count as u128, binomial(p.n as u64 + 1, level.level as u64 + 1));
            total += level.total;
        }
        prop_assert_eq!(total as u128, binomial(p.k() as u64 + p.n as u64, p.n as u64));
    }

    #[test]
    fn json_round_trip(p in params()) {
        let table = assign_dofs(p).unwrap();
        let text = table_to_json(&table).unwrap();
        prop_assert_eq!(table_from_json(&text).unwrap(), table);
    }

    #[test]
    fn csv_has_one_row_per_dof(p in params()) {
        let table = assign_dofs(p).unwrap();
        let csv = table_to_csv(&table);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        prop_assert!(header.starts_with("ordinal,alpha_0"));
        let rows: Vec<&str> = lines.collect();
        prop_assert_eq!(rows.len(), table.total());
        let width = header.split(',').count();
        prop_assert!(rows.iter().all(|r| r.split(',').count() == width));
    }
}

#[test]
fn corrupted_json_is_rejected() {
    let table = assign_dofs(ElementParams::new(2, 1, 0).unwrap()).unwrap();
    let text = table_to_json(&table).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["groups"][0]["members"][0][0] = serde_json::json!(4);
    assert!(table_from_json(&value.to_string()).is_err());
    assert!(table_from_json("{}").is_err());
}

#[test]
fn high_smoothness_tetrahedral_total() {
    let table = assign_dofs(ElementParams::new(3, 4, 0).unwrap()).unwrap();
    assert_eq!(table.params.k(), 33);
    assert_eq!(table.total(), 7140);
}
