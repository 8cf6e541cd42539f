//! Report writers: the fixed-width text report, JSON (with import) and CSV.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::assignment::{group_summary, DofGroup, DofTable, ElementParams};
use crate::combinatorics::{LatticeRanker, MultiIndex, SubSimplex};
use crate::error::{Error, Result};

/// Right-aligned integer in a field of `width` characters, or `width`
/// asterisks when it does not fit (Fortran `Iw` semantics).
pub fn fortran_int(value: i64, width: usize) -> String {
    let s = value.to_string();
    if s.len() > width {
        "*".repeat(width)
    } else {
        format!("{s:>width$}")
    }
}

fn fi(value: impl TryInto<i64>, width: usize) -> String {
    fortran_int(value.try_into().unwrap_or(i64::MAX), width)
}

/// Per-order, per-level and total lines of the text report.
pub fn paper_report(table: &DofTable) -> Result<String> {
    let summary = group_summary(table)?;
    let p = table.params;
    let mut out = String::new();
    let mut grand_total = 0u64;
    for level in &summary.levels {
        let mut running = 0u64;
        for (order, &count) in level.per_order.iter().enumerate() {
            running += count;
            let _ = writeln!(
                out,
                "simplex{}  derivative{} dof {}  sum={}",
                fi(level.level, 2),
                fi(order, 2),
                fi(count, 7),
                fi(running, 8)
            );
        }
        let _ = writeln!(
            out,
            "level  {}  #simplex  {} dofs{} total{}",
            fi(level.level, 2),
            fi(level.simplex_count, 2),
            fi(running, 7),
            fi(running * level.simplex_count, 8)
        );
        grand_total += running * level.simplex_count;
    }
    let _ = writeln!(
        out,
        "(n m k_1)={}{}{},dim P_{{{}}}={}C^m-P_k^n={}",
        fi(p.n, 2),
        fi(p.m, 2),
        fi(p.k1, 2),
        fi(p.k(), 3),
        fi(p.dimension(), 8),
        fi(grand_total, 8)
    );
    Ok(out)
}

/// Index-study lines: for each order on the facet opposite vertex 0, the
/// first member with its components listed as `alpha_1..alpha_n, alpha_0`,
/// then level + 1, order + 1, the facet position and its vertices.
pub fn debug_check_lines(table: &DofTable) -> Vec<String> {
    let p = table.params;
    let n = p.n;
    let facet: Vec<usize> = (1..=n).collect();
    let level = n - 1;
    (0..=p.max_order(level))
        .filter_map(|order| {
            let group = table.group(&facet, order)?;
            let alpha = group.members.first()?;
            let mut line = String::from("check: ");
            for v in (1..=n).chain(std::iter::once(0)) {
                line.push_str(&fi(alpha[v], 4));
            }
            line.push_str(&fi(level + 1, 4));
            line.push_str("    ");
            line.push_str(&fi(order + 1, 4));
            line.push_str(&fi(1, 4));
            for v in &facet {
                line.push_str(&fi(*v, 4));
            }
            Some(line)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub n: usize,
    pub m: u32,
    pub k1: u32,
    pub k: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupJson {
    pub level: usize,
    pub vertices: Vec<usize>,
    pub order: u32,
    pub members: Vec<Vec<u32>>,
    /// Positions of the members in the lattice enumeration.
    pub ordinals: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelJson {
    pub level: usize,
    pub simplex_count: u64,
    pub per_entity: u64,
    pub total: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TotalsJson {
    pub dofs: u64,
    pub dim_pk: u64,
    pub levels: Vec<LevelJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableJson {
    pub params: ParamsJson,
    pub groups: Vec<GroupJson>,
    pub totals: TotalsJson,
}

pub fn table_to_json_value(table: &DofTable) -> Result<TableJson> {
    let p = table.params;
    let ranker = LatticeRanker::new(p.n, p.k());
    let summary = group_summary(table)?;
    Ok(TableJson {
        params: ParamsJson {
            n: p.n,
            m: p.m,
            k1: p.k1,
            k: p.k(),
        },
        groups: table
            .groups
            .iter()
            .map(|g| GroupJson {
                level: g.level(),
                vertices: g.subsimplex.vertices().to_vec(),
                order: g.order,
                members: g.members.iter().map(|a| a.entries().to_vec()).collect(),
                ordinals: g.members.iter().map(|a| ranker.rank(a.entries())).collect(),
            })
            .collect(),
        totals: TotalsJson {
            dofs: summary.grand_total,
            dim_pk: summary.dim_pk,
            levels: summary
                .levels
                .iter()
                .map(|l| LevelJson {
                    level: l.level,
                    simplex_count: l.simplex_count,
                    per_entity: l.per_entity,
                    total: l.total,
                })
                .collect(),
        },
    })
}

pub fn table_to_json(table: &DofTable) -> Result<String> {
    serde_json::to_string_pretty(&table_to_json_value(table)?)
        .map_err(|e| Error::Json(e.to_string()))
}

/// Rebuilds a table from [`table_to_json`] output and checks that it is a
/// partition with consistent ordinals and totals.
pub fn table_from_json(text: &str) -> Result<DofTable> {
    let doc: TableJson = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
    let pj = &doc.params;
    let params = ElementParams::new(pj.n, pj.m as i64, pj.k1 as i64)?;
    if params.k() != pj.k {
        return Err(Error::InvalidTable(format!(
            "k = {} does not match {params}",
            pj.k
        )));
    }
    let ranker = LatticeRanker::new(params.n, params.k());
    let mut groups = Vec::with_capacity(doc.groups.len());
    for g in doc.groups {
        let subsimplex = SubSimplex::new(g.vertices)?;
        if subsimplex.level() != g.level {
            return Err(Error::InvalidTable(format!(
                "face {subsimplex} listed at level {}",
                g.level
            )));
        }
        if g.ordinals.len() != g.members.len() {
            return Err(Error::InvalidTable(
                "ordinal count differs from member count".into(),
            ));
        }
        let members: Vec<MultiIndex> = g.members.into_iter().map(MultiIndex::new).collect();
        for (a, &o) in members.iter().zip(&g.ordinals) {
            if a.len() != params.n + 1 || ranker.rank(a.entries()) != o {
                return Err(Error::InvalidTable(format!(
                    "{a} does not sit at ordinal {o}"
                )));
            }
        }
        groups.push(DofGroup {
            subsimplex,
            order: g.order,
            members,
        });
    }
    let table = DofTable { params, groups };
    table.validate()?;
    if doc.totals.dofs != table.total() as u64 || doc.totals.dim_pk != params.dimension() {
        return Err(Error::InvalidTable("totals do not match the groups".into()));
    }
    Ok(table)
}

/// One row per lattice index, in enumeration order.
pub fn table_to_csv(table: &DofTable) -> String {
    let p = table.params;
    let ranker = LatticeRanker::new(p.n, p.k());
    let mut rows: Vec<(usize, String)> = table
        .groups
        .iter()
        .flat_map(|g| {
            let ranker = &ranker;
            g.members.iter().enumerate().map(move |(pos, a)| {
                let entries: Vec<String> = a.entries().iter().map(u32::to_string).collect();
                let vertices: Vec<String> = g
                    .subsimplex
                    .vertices()
                    .iter()
                    .map(usize::to_string)
                    .collect();
                let ordinal = ranker.rank(a.entries());
                (
                    ordinal,
                    format!(
                        "{ordinal},{},{},{},{},{pos}",
                        entries.join(","),
                        g.level(),
                        vertices.join(" "),
                        g.order
                    ),
                )
            })
        })
        .collect();
    rows.sort_unstable_by_key(|r| r.0);
    let mut out = String::from("ordinal,");
    for i in 0..=p.n {
        let _ = write!(out, "alpha_{i},");
    }
    out.push_str("level,vertices,order,position\n");
    for (_, row) in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}
