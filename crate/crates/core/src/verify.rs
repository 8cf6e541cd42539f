//! End-to-end checks: unisolvency of the realized functionals, value and
//! normal-derivative continuity across a shared facet, and the count
//! sweep against the closed forms.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assignment::{assign_dofs, group_summary, ElementParams};
use crate::combinatorics::{compositions, SubSimplex};
use crate::counts::verify_dimension_identity;
use crate::error::{Error, Result};
use crate::functionals::{boundary_placements, realize_functionals, FunctionalKey};
use crate::geometry::{Point, Simplex};
use crate::polynomials::ElementDefinition;

/// Residual bound for [`check_unisolvency`].
pub const UNISOLVENCY_TOLERANCE: f64 = 1e-8;
/// Relative jump bound for orders `0..=m` in [`continuity_jump_test`].
pub const CONTINUITY_TOLERANCE: f64 = 1e-7;
/// Reproduction error allowed per unit of `residual * max|b|`.
pub const REPRODUCTION_FACTOR: f64 = 10.0;
pub const REPRODUCTION_POINTS: usize = 10;
pub const FACET_SAMPLES: usize = 24;
pub const FACET_MARGIN: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct ReproductionReport {
    pub points: usize,
    pub max_error: f64,
    /// `max |b|` over the random Bernstein coefficients.
    pub coefficient_norm: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnisolvencyReport {
    pub params: ElementParams,
    pub dofs: usize,
    pub residual: f64,
    pub condition_estimate: f64,
    pub refinement_steps: usize,
    pub tolerance: f64,
    pub reproduction: Option<ReproductionReport>,
    /// Set when assembly failed, e.g. on a singular pivot.
    pub failure: Option<String>,
    pub pass: bool,
}

/// Assembles the element on `simplex` and checks `max|V C - I|` against
/// [`UNISOLVENCY_TOLERANCE`].
pub fn check_unisolvency(params: ElementParams, simplex: &Simplex) -> UnisolvencyReport {
    check_unisolvency_with(params, simplex, UNISOLVENCY_TOLERANCE, 0)
}

pub fn check_unisolvency_with(
    params: ElementParams,
    simplex: &Simplex,
    tolerance: f64,
    seed: u64,
) -> UnisolvencyReport {
    let mut report = UnisolvencyReport {
        params,
        dofs: params.dimension() as usize,
        residual: f64::INFINITY,
        condition_estimate: f64::INFINITY,
        refinement_steps: 0,
        tolerance,
        reproduction: None,
        failure: None,
        pass: false,
    };
    let element = match ElementDefinition::new(params, simplex.clone()) {
        Ok(e) => e,
        Err(e) => {
            report.failure = Some(e.to_string());
            return report;
        }
    };
    let dual = element.dual_basis();
    report.residual = dual.residual;
    report.condition_estimate = dual.condition_estimate;
    report.refinement_steps = dual.refinement_steps;
    let reproduction = interpolation_reproduction(&element, dual.residual, seed);
    report.pass = dual.residual < tolerance && reproduction.pass;
    report.reproduction = Some(reproduction);
    report
}

fn random_barycentric(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut cuts: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    gaps(&cuts)
}

fn gaps(sorted: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(sorted.len() + 1);
    let mut prev = 0.0;
    for &c in sorted {
        out.push(c - prev);
        prev = c;
    }
    out.push(1.0 - prev);
    out
}

/// Interpolates a random polynomial through its functional values and
/// compares both at random points of the cell.
pub fn interpolation_reproduction(
    element: &ElementDefinition,
    residual: f64,
    seed: u64,
) -> ReproductionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b: Vec<f64> = (0..element.len())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let values = element.apply_functionals(&b);
    let b_rec = element.bernstein_coefficients(&values);
    let n = element.params.n;
    let mut max_error = 0.0f64;
    for _ in 0..REPRODUCTION_POINTS {
        let lambda = random_barycentric(&mut rng, n);
        let x = element.simplex.from_barycentric(&lambda);
        let exact = element.evaluate(&b, x.as_slice(), &[]);
        let rebuilt = element.evaluate(&b_rec, x.as_slice(), &[]);
        max_error = max_error.max((exact - rebuilt).abs());
    }
    let coefficient_norm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tolerance = REPRODUCTION_FACTOR * residual.max(f64::EPSILON) * coefficient_norm;
    ReproductionReport {
        points: REPRODUCTION_POINTS,
        max_error,
        coefficient_norm,
        tolerance,
        pass: max_error <= tolerance,
    }
}

/// Two cells sharing a facet.
#[derive(Clone, Debug)]
pub struct CellPair {
    pub cell_a: Simplex,
    pub cell_b: Simplex,
    pub facet_a: SubSimplex,
    pub facet_b: SubSimplex,
}

impl CellPair {
    pub fn new(cell_a: Simplex, cell_b: Simplex) -> Result<Self> {
        let n = cell_a.dim();
        if cell_b.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: cell_b.dim(),
            });
        }
        let mut local_a = Vec::new();
        let mut local_b = Vec::new();
        for (i, g) in cell_a.global_ids().iter().enumerate() {
            if let Some(j) = cell_b.global_ids().iter().position(|h| h == g) {
                if (cell_a.vertex(i) - cell_b.vertex(j)).norm() != 0.0 {
                    return Err(Error::Identification(format!(
                        "vertex {g} has different coordinates in the two cells"
                    )));
                }
                local_a.push(i);
                local_b.push(j);
            }
        }
        if local_a.len() != n {
            return Err(Error::Identification(format!(
                "cells share {} vertices, expected {n}",
                local_a.len()
            )));
        }
        local_b.sort_unstable();
        let facet_a = SubSimplex::new(local_a)?;
        let facet_b = SubSimplex::new(local_b)?;
        // opposite sides: the apex of b has a negative coordinate for the
        // apex of a
        let apex_a = facet_a.complement(n)[0];
        let apex_b = facet_b.complement(n)[0];
        let lambda = cell_a.barycentric(cell_b.vertex(apex_b).as_slice());
        if lambda[apex_a] >= 0.0 {
            return Err(Error::Degenerate(
                "cells lie on the same side of the shared facet".into(),
            ));
        }
        Ok(Self {
            cell_a,
            cell_b,
            facet_a,
            facet_b,
        })
    }

    /// The unit simplex and a skewed neighbour across the facet opposite
    /// the origin, listed in a different local vertex order.
    pub fn standard(n: usize) -> Result<Self> {
        let a = Simplex::unit(n);
        let mut apex = vec![2.0 / n as f64; n];
        apex[0] += 0.13;
        apex[n - 1] -= 0.07;
        let mut vertices = vec![apex];
        let mut ids = vec![n + 1];
        for v in (1..=n).rev() {
            vertices.push(a.vertex(v).iter().copied().collect());
            ids.push(v);
        }
        let b = Simplex::with_global_ids(vertices, ids)?;
        Self::new(a, b)
    }

    pub fn dim(&self) -> usize {
        self.cell_a.dim()
    }

    pub fn shared_global_ids(&self) -> Vec<usize> {
        self.cell_a.face_key(&self.facet_a)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderJump {
    pub order: u32,
    pub max_jump: f64,
    /// Largest `|value|` of this order over the samples of both cells.
    pub scale: f64,
    pub relative: f64,
    /// Orders above `m` are reported but not required to be small.
    pub required: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct JumpReport {
    pub params: ElementParams,
    pub seed: u64,
    pub samples: usize,
    pub shared_dofs: usize,
    pub tolerance: f64,
    pub orders: Vec<OrderJump>,
    pub pass: bool,
}

impl JumpReport {
    pub fn order(&self, order: u32) -> Option<&OrderJump> {
        self.orders.iter().find(|o| o.order == order)
    }
}

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let step = 1.0 / base as f64;
    let mut f = step;
    let mut x = 0.0;
    while index > 0 {
        x += (index % base) as f64 * f;
        index /= base;
        f *= step;
    }
    x
}

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// Barycentric coordinates of `count` Halton points in the open
/// `dim`-simplex, kept at least `margin` away from every face.
pub fn facet_samples(dim: usize, count: usize, margin: f64) -> Vec<Vec<f64>> {
    (1..=count as u64)
        .map(|i| {
            let mut cuts: Vec<f64> = (0..dim).map(|d| radical_inverse(i, PRIMES[d])).collect();
            cuts.sort_by(f64::total_cmp);
            let shrink = 1.0 - (dim + 1) as f64 * margin;
            gaps(&cuts)
                .into_iter()
                .map(|l| margin + shrink * l)
                .collect()
        })
        .collect()
}

/// Both cells assembled once, with the shared-facet identification.
pub struct ContinuityHarness {
    pub params: ElementParams,
    pub pair: CellPair,
    pub element_a: ElementDefinition,
    pub element_b: ElementDefinition,
    /// `(index in a, index in b)` for every shared functional.
    pub shared: Vec<(usize, usize)>,
    normals: Vec<Point>,
    samples: Vec<Point>,
}

impl ContinuityHarness {
    pub fn new(params: ElementParams, pair: CellPair) -> Result<Self> {
        if pair.dim() != params.n {
            return Err(Error::DimensionMismatch {
                expected: params.n,
                got: pair.dim(),
            });
        }
        let element_a = ElementDefinition::new(params, pair.cell_a.clone())?;
        let element_b = ElementDefinition::new(params, pair.cell_b.clone())?;
        let shared = identify_shared(&element_a, &element_b, &pair.shared_global_ids())?;
        let normals = pair.cell_a.face_frame(&pair.facet_a)?.normals;
        let facet_vertices: Vec<usize> = pair.facet_a.vertices().to_vec();
        let samples = facet_samples(params.n - 1, FACET_SAMPLES, FACET_MARGIN)
            .into_iter()
            .map(|mu| {
                let mut lambda = vec![0.0; params.n + 1];
                for (&v, l) in facet_vertices.iter().zip(mu) {
                    lambda[v] = l;
                }
                pair.cell_a.from_barycentric(&lambda)
            })
            .collect();
        Ok(Self {
            params,
            pair,
            element_a,
            element_b,
            shared,
            normals,
            samples,
        })
    }

    pub fn samples(&self) -> &[Point] {
        &self.samples
    }

    /// Random DOFs on `a`, copied to `b` on the shared facet.
    pub fn dof_values(&self, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..self.element_a.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let mut b: Vec<f64> = (0..self.element_b.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        for &(i, j) in &self.shared {
            b[j] = a[i];
        }
        (a, b)
    }

    pub fn run(&self, seed: u64) -> JumpReport {
        let (a, b) = self.dof_values(seed);
        self.run_with_dofs(seed, &a, &b)
    }

    pub fn run_with_dofs(&self, seed: u64, dofs_a: &[f64], dofs_b: &[f64]) -> JumpReport {
        let ca = self.element_a.bernstein_coefficients(dofs_a);
        let cb = self.element_b.bernstein_coefficients(dofs_b);
        let m = self.params.m;
        let mut orders = Vec::with_capacity(m as usize + 2);
        for order in 0..=m + 1 {
            let mut max_jump = 0.0f64;
            let mut scale = 0.0f64;
            for powers in compositions(order, self.normals.len()) {
                let dirs: Vec<Point> = self
                    .normals
                    .iter()
                    .zip(&powers)
                    .flat_map(|(v, &p)| std::iter::repeat_n(v.clone(), p as usize))
                    .collect();
                for x in &self.samples {
                    let va = self.element_a.evaluate(&ca, x.as_slice(), &dirs);
                    let vb = self.element_b.evaluate(&cb, x.as_slice(), &dirs);
                    max_jump = max_jump.max((va - vb).abs());
                    scale = scale.max(va.abs()).max(vb.abs());
                }
            }
            let relative = if max_jump == 0.0 {
                0.0
            } else {
                max_jump / scale
            };
            let required = order <= m;
            orders.push(OrderJump {
                order,
                max_jump,
                scale,
                relative,
                required,
                pass: !required || relative < CONTINUITY_TOLERANCE,
            });
        }
        JumpReport {
            params: self.params,
            seed,
            samples: self.samples.len(),
            shared_dofs: self.shared.len(),
            tolerance: CONTINUITY_TOLERANCE,
            pass: orders.iter().all(|o| o.pass),
            orders,
        }
    }
}

/// Matches the functionals of both cells that live on the shared facet.
/// Every such functional must have exactly one counterpart.
pub fn identify_shared(
    a: &ElementDefinition,
    b: &ElementDefinition,
    facet: &[usize],
) -> Result<Vec<(usize, usize)>> {
    let on_facet = |e: &ElementDefinition| -> HashMap<FunctionalKey, usize> {
        e.functionals
            .iter()
            .enumerate()
            .filter(|(_, f)| f.lies_on(facet))
            .map(|(i, f)| (f.key(), i))
            .collect()
    };
    let keys_a = on_facet(a);
    let keys_b = on_facet(b);
    let mut pairs = Vec::with_capacity(keys_a.len());
    for (key, &i) in &keys_a {
        match keys_b.get(key) {
            Some(&j) => pairs.push((i, j)),
            None => {
                return Err(Error::Identification(format!(
                    "functional {i} of the first cell has no counterpart"
                )))
            }
        }
    }
    if keys_b.len() != pairs.len() {
        return Err(Error::Identification(format!(
            "{} facet functionals in the second cell, {} matched",
            keys_b.len(),
            pairs.len()
        )));
    }
    pairs.sort_unstable();
    Ok(pairs)
}

/// Two-cell jump test on `pair` with seeded random DOFs.
pub fn continuity_jump_test(
    params: ElementParams,
    pair: CellPair,
    seed: u64,
) -> Result<JumpReport> {
    Ok(ContinuityHarness::new(params, pair)?.run(seed))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepCase {
    pub params: ElementParams,
    pub k: u32,
    pub dim_pk: u64,
    pub total: u64,
    pub failures: Vec<String>,
}

impl SweepCase {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub cases: Vec<SweepCase>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(SweepCase::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &String> {
        self.cases.iter().flat_map(|c| &c.failures)
    }
}

/// Checks partition, closed forms, grand total, placement and functional
/// distinctness for one parameter triple.
pub fn sweep_case(params: ElementParams) -> SweepCase {
    let mut case = SweepCase {
        params,
        k: params.k(),
        dim_pk: params.dimension(),
        total: 0,
        failures: Vec::new(),
    };
    let table = match assign_dofs(params) {
        Ok(t) => t,
        Err(e) => {
            case.failures.push(format!("{params}: {e}"));
            return case;
        }
    };
    case.total = table.total() as u64;
    if let Err(e) = table.validate() {
        case.failures.push(format!("{params}: partition: {e}"));
    }
    if let Err(e) = group_summary(&table) {
        case.failures.push(format!("{params}: {e}"));
    }
    if (2..=4).contains(&params.n) {
        match verify_dimension_identity(params.n, params.m, params.k1) {
            Ok(report) => case.failures.extend(report.mismatches),
            Err(e) => case.failures.push(format!("{params}: {e}")),
        }
    }
    if case.total != case.dim_pk {
        case.failures.push(format!(
            "{params}: total {} != dim P_{}^({}) = {}",
            case.total, case.k, params.n, case.dim_pk
        ));
    }
    case.failures.extend(
        boundary_placements(&table)
            .into_iter()
            .map(|s| format!("{params}: placement: {s}")),
    );
    if let Err(e) = realize_functionals(&table, &Simplex::unit(params.n)) {
        case.failures.push(format!("{params}: functionals: {e}"));
    }
    case
}

pub fn sweep_cases(cases: &[ElementParams]) -> SweepReport {
    SweepReport {
        cases: cases.iter().map(|&p| sweep_case(p)).collect(),
    }
}

/// Sweeps `n = 2..=n_max`, `m = 1..=m_max` (at most 2 for `n = 4`) and
/// `k1 = 0..=k1_max`.
pub fn oracle_sweep(n_max: usize, m_max: u32, k1_max: u32) -> Result<SweepReport> {
    let mut params = Vec::new();
    for n in 2..=n_max {
        let m_top = if n >= 4 { m_max.min(2) } else { m_max };
        for m in 1..=m_top {
            for k1 in 0..=k1_max {
                params.push(ElementParams::new(n, m as i64, k1 as i64)?);
            }
        }
    }
    Ok(sweep_cases(&params))
}
