//! Closed-form per-entity DOF counts for `n = 2, 3, 4` and the dimension
//! identities they satisfy.
//!
//! All formulas are evaluated in `i128` and every division is checked for
//! exactness, so a mistyped coefficient shows up as an error instead of a
//! silently truncated count.

use serde::Serialize;

use crate::assignment::{assign_dofs, group_summary, ElementParams};
use crate::combinatorics::{binomial, dim_pk};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelCount {
    pub level: usize,
    /// Number of level-`level` faces of the cell, `C(n+1, level+1)`.
    pub simplex_count: u64,
    /// Count per derivative order on one face (empty for closed forms).
    pub per_order: Vec<u64>,
    pub per_entity: u64,
    pub total: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub params: ElementParams,
    pub levels: Vec<LevelCount>,
    pub grand_total: u64,
    pub dim_pk: u64,
    /// Human-readable descriptions of every failed comparison.
    pub mismatches: Vec<String>,
}

impl CountReport {
    pub fn per_level_per_entity(&self) -> Vec<(usize, u64)> {
        self.levels
            .iter()
            .map(|l| (l.level, l.per_entity))
            .collect()
    }

    pub fn per_level_total(&self) -> Vec<(usize, u64)> {
        self.levels.iter().map(|l| (l.level, l.total)).collect()
    }

    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.grand_total == self.dim_pk
    }
}

fn exact_div(numerator: i128, denominator: i128) -> Result<i128> {
    if numerator % denominator != 0 {
        return Err(Error::InexactDivision {
            numerator,
            denominator,
        });
    }
    Ok(numerator / denominator)
}

fn dim(k: i128, n: usize) -> i128 {
    dim_pk(k as i64, n) as i128
}

fn check_args(n: usize, m: u32, level: usize) -> Result<()> {
    if !(2..=4).contains(&n) {
        return Err(Error::NoClosedForm(n));
    }
    if m < 1 {
        return Err(Error::InvalidSmoothness(m as i64));
    }
    if level > n {
        return Err(Error::LevelOutOfRange { level, n });
    }
    Ok(())
}

/// Number of DOFs carried by one level-`level` face of a `C^m-P_k^(n)`
/// element, `k = m 2^n + 1 + k1`.
///
/// For `n = 4`, level 3 the wedge correction includes the `k1`-dependent
/// term; see [`printed_closed_form_count`] for the variant without it.
pub fn closed_form_count(n: usize, m: u32, k1: u32, level: usize) -> Result<u64> {
    check_args(n, m, level)?;
    let (m, k1) = (m as i128, k1 as i128);
    let value = match (n, level) {
        (4, 3) => tet_count_4d(m, k1)? - k1 * (m - 1) * m * (m + 1),
        _ => raw_count(n, m, k1, level)?,
    };
    Ok(value as u64)
}

/// Same as [`closed_form_count`] but with the expanded 4D tetrahedron
/// formula taken verbatim, i.e. without the `k1 (m-1) m (m+1)` wedge
/// term. It disagrees with the lattice partition whenever `m >= 2` and
/// `k1 >= 1`.
pub fn printed_closed_form_count(n: usize, m: u32, k1: u32, level: usize) -> Result<u64> {
    check_args(n, m, level)?;
    let (m, k1) = (m as i128, k1 as i128);
    let value = match (n, level) {
        (4, 3) => tet_count_4d(m, k1)?,
        _ => raw_count(n, m, k1, level)?,
    };
    Ok(value as u64)
}

fn tet_count_4d(m: i128, k1: i128) -> Result<i128> {
    // (m+1) ( m(2945m^2-491m+6)/24 + (546m^2-105m+4)k1/12 + (19m-2)k1^2/4 + k1^3/6 )
    exact_div(
        (m + 1)
            * (m * (2945 * m * m - 491 * m + 6)
                + 2 * (546 * m * m - 105 * m + 4) * k1
                + 6 * (19 * m - 2) * k1 * k1
                + 4 * k1 * k1 * k1),
        24,
    )
}

fn raw_count(n: usize, m: i128, k1: i128, level: usize) -> Result<i128> {
    Ok(match (n, level) {
        (2, 0) => dim(2 * m, 2),
        // sum_{i=0}^{m} (k1 + i)
        (2, 1) => (m + 1) * k1 + exact_div(m * (m + 1), 2)?,
        // dim P_{k-3m-3} with k = 4m+1+k1
        (2, 2) => dim(m + k1 - 2, 2),

        (3, 0) => exact_div((4 * m + 1) * (4 * m + 2) * (4 * m + 3), 6)?,
        (3, 1) => {
            let t = 2 * m + 1;
            k1 * exact_div(t * t + t, 2)? + exact_div(t * t * t - t, 3)?
        }
        (3, 2) => exact_div(
            (m + 1) * (3 * k1 * k1 + 3 * k1 * (6 * m - 1) + 25 * m * m - 4 * m),
            6,
        )?,
        (3, 3) => {
            let j = 4 * m + k1;
            exact_div((j - 2) * (j - 1) * j, 6)? - exact_div(4 * (m - 2) * (m - 1) * m, 6)?
        }

        (4, 0) => exact_div((8 * m + 1) * (8 * m + 2) * (8 * m + 3) * (8 * m + 4), 24)?,
        (4, 1) => {
            let m1 = 4 * m + 1;
            k1 * exact_div(m1 * (m1 + 1) * (m1 + 2), 6)?
                + exact_div((m1 - 1) * m1 * (m1 + 1) * (m1 + 2), 8)?
        }
        (4, 2) => exact_div(
            (m + 1) * (2 * m + 1) * (3 * k1 * k1 + 40 * k1 * m + 118 * m * m - 3 * k1 - 7 * m),
            6,
        )?,
        (4, 3) => tet_count_4d(m, k1)?,
        (4, 4) => {
            let j = 11 * m + k1;
            exact_div((j - 3) * (j - 2) * (j - 1) * j, 24)?
                - exact_div(5 * (4 * m - 3) * (4 * m - 2) * (4 * m - 1) * (4 * m), 24)?
                - exact_div(10 * (m - 2) * (m - 1) * m * (4 * k1 + 15 * m + 3), 24)?
        }
        _ => unreachable!("arguments checked"),
    })
}

fn closed_form_report(params: ElementParams) -> Result<CountReport> {
    let n = params.n;
    let mut levels = Vec::with_capacity(n + 1);
    for level in 0..=n {
        let per_entity = closed_form_count(n, params.m, params.k1, level)?;
        let simplex_count = binomial(n as u64 + 1, level as u64 + 1) as u64;
        levels.push(LevelCount {
            level,
            simplex_count,
            per_order: Vec::new(),
            per_entity,
            total: per_entity * simplex_count,
        });
    }
    Ok(CountReport {
        params,
        grand_total: levels.iter().map(|l| l.total).sum(),
        levels,
        dim_pk: params.dimension(),
        mismatches: Vec::new(),
    })
}

/// Evaluates the closed forms, sums them against `dim P_k^(n)` and compares
/// each level with the greedy assignment. Mismatches are collected in the
/// report rather than returned as errors.
pub fn verify_dimension_identity(n: usize, m: u32, k1: u32) -> Result<CountReport> {
    let params = ElementParams::new(n, m as i64, k1 as i64)?;
    let mut report = closed_form_report(params)?;
    if report.grand_total != report.dim_pk {
        report.mismatches.push(format!(
            "{params}: closed-form total {} != dim P_{}^({n}) = {}",
            report.grand_total,
            params.k(),
            report.dim_pk
        ));
    }
    let table = assign_dofs(params)?;
    match group_summary(&table) {
        Ok(enumerated) => {
            for (closed, counted) in report.levels.iter().zip(&enumerated.levels) {
                if closed.per_entity != counted.per_entity {
                    report.mismatches.push(format!(
                        "{params} level {}: closed form {} != assignment {}",
                        closed.level, closed.per_entity, counted.per_entity
                    ));
                }
            }
            if enumerated.grand_total != report.dim_pk {
                report.mismatches.push(format!(
                    "{params}: assignment total {} != {}",
                    enumerated.grand_total, report.dim_pk
                ));
            }
        }
        Err(e) => report.mismatches.push(format!("{params}: {e}")),
    }
    Ok(report)
}
