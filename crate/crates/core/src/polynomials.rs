//! Bernstein basis of `P_k` on a simplex, the generalized Vandermonde
//! matrix of a functional set, and its dual (nodal) basis.

use crate::assignment::{assign_dofs, DofTable, ElementParams};
use crate::combinatorics::{lattice, LatticeRanker, MultiIndex};
use crate::error::{Error, Result};
use crate::functionals::{realize_functionals, NodalFunctional};
use crate::geometry::{Point, Simplex};
use crate::linalg::{dot2, refined_inverse_with, DenseMatrix, LuFactorization};

const NONE: u32 = u32::MAX;

/// Refinement steps used by [`dual_basis`].
pub const REFINEMENT_STEPS: usize = 3;

/// One lattice of the degree ladder `0..=k`.
#[derive(Clone, Debug)]
struct Rung {
    len: usize,
    // predecessor[r * (n + 1) + i] = rank of alpha_r - e_i one degree lower
    predecessor: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct BernsteinBasis {
    n: usize,
    k: u32,
    indices: Vec<MultiIndex>,
    rungs: Vec<Rung>,
}

impl BernsteinBasis {
    pub fn new(n: usize, k: u32) -> Self {
        let mut rungs = Vec::with_capacity(k as usize + 1);
        rungs.push(Rung {
            len: 1,
            predecessor: vec![NONE; n + 1],
        });
        for j in 1..=k {
            let below = LatticeRanker::new(n, j - 1);
            let here = lattice(n, j);
            let mut predecessor = Vec::with_capacity(here.len() * (n + 1));
            let mut scratch = vec![0u32; n + 1];
            for alpha in &here {
                for i in 0..=n {
                    if alpha[i] == 0 {
                        predecessor.push(NONE);
                    } else {
                        scratch.copy_from_slice(alpha.entries());
                        scratch[i] -= 1;
                        predecessor.push(below.rank(&scratch) as u32);
                    }
                }
            }
            rungs.push(Rung {
                len: here.len(),
                predecessor,
            });
        }
        Self {
            n,
            k,
            indices: lattice(n, k),
            rungs,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Multi-indices of the basis functions, in column order.
    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// `out[a] = scale * sum_i weights[i] * prev[a - e_i]` on rung `j`.
    fn raise(&self, prev: &[f64], weights: &[f64], scale: f64, j: usize) -> Vec<f64> {
        let rung = &self.rungs[j];
        let stride = self.n + 1;
        (0..rung.len)
            .map(|r| {
                let preds = &rung.predecessor[r * stride..(r + 1) * stride];
                let s: f64 = preds
                    .iter()
                    .zip(weights)
                    .filter(|(&p, _)| p != NONE)
                    .map(|(&p, w)| w * prev[p as usize])
                    .sum();
                scale * s
            })
            .collect()
    }

    /// Values of every degree-`j` Bernstein polynomial at barycentric `lambda`.
    fn values_at_degree(&self, lambda: &[f64], j: u32) -> Vec<f64> {
        let mut v = vec![1.0];
        for deg in 1..=j as usize {
            v = self.raise(&v, lambda, 1.0, deg);
        }
        v
    }

    /// `D_{u_1} ... D_{u_d} B_alpha(x)` for every basis function, with
    /// directions given through their barycentric rates
    /// `mu[t][i] = grad(lambda_i) . u_t`.
    pub fn derivative_row(&self, lambda: &[f64], mu: &[Vec<f64>]) -> Vec<f64> {
        assert_eq!(lambda.len(), self.n + 1, "barycentric length");
        let d = mu.len() as u32;
        if d > self.k {
            return vec![0.0; self.len()];
        }
        let mut j = self.k - d;
        let mut v = self.values_at_degree(lambda, j);
        for rates in mu {
            j += 1;
            v = self.raise(&v, rates, j as f64, j as usize);
        }
        v
    }

    /// Derivative row at a Cartesian point on `simplex` along Cartesian
    /// `directions`.
    pub fn row_on(&self, simplex: &Simplex, point: &[f64], directions: &[Point]) -> Vec<f64> {
        let lambda = simplex.barycentric(point);
        let mu = barycentric_rates(simplex, directions);
        self.derivative_row(&lambda, &mu)
    }
}

/// `mu[t][i] = grad(lambda_i) . u_t`.
pub fn barycentric_rates(simplex: &Simplex, directions: &[Point]) -> Vec<Vec<f64>> {
    directions
        .iter()
        .map(|u| simplex.gradients().iter().map(|g| g.dot(u)).collect())
        .collect()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `B_alpha(lambda) = |alpha|! / alpha! * lambda^alpha`, by the direct formula.
pub fn bernstein_eval(alpha: &MultiIndex, lambda: &[f64]) -> f64 {
    let coeff = alpha
        .entries()
        .iter()
        .fold(factorial(alpha.degree()), |c, &a| c / factorial(a));
    alpha
        .entries()
        .iter()
        .zip(lambda)
        .fold(coeff, |p, (&a, l)| p * l.powi(a as i32))
}

/// Iterated directional derivative of a single `B_alpha`, through
/// `D_u B_alpha = |alpha| * sum_i mu_i B_{alpha - e_i}`.
pub fn bernstein_derivative(alpha: &MultiIndex, lambda: &[f64], mu: &[Vec<f64>]) -> f64 {
    let Some((rates, rest)) = mu.split_first() else {
        return bernstein_eval(alpha, lambda);
    };
    let k = alpha.degree();
    if k == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..alpha.len() {
        if alpha[i] > 0 && rates[i] != 0.0 {
            let mut lower = alpha.entries().to_vec();
            lower[i] -= 1;
            total += rates[i] * bernstein_derivative(&MultiIndex::new(lower), lambda, rest);
        }
    }
    k as f64 * total
}

/// `V[i][j] = phi_i(B_j)`.
pub fn build_vandermonde(
    basis: &BernsteinBasis,
    functionals: &[NodalFunctional],
    simplex: &Simplex,
) -> Result<DenseMatrix> {
    if simplex.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: simplex.dim(),
        });
    }
    if functionals.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            got: functionals.len(),
        });
    }
    let n = basis.len();
    let mut data = Vec::with_capacity(n * n);
    for f in functionals {
        data.extend(basis.row_on(simplex, f.point.as_slice(), &f.directions));
    }
    DenseMatrix::from_row_major(n, n, data)
}

#[derive(Clone, Debug)]
pub struct DualBasis {
    /// `coeffs[j][l]`: Bernstein coefficient `j` of nodal basis function `l`.
    pub coeffs: DenseMatrix,
    /// `max |V C - I|`.
    pub residual: f64,
    /// `||V||_1 ||C||_1`.
    pub condition_estimate: f64,
    pub refinement_steps: usize,
    /// Smallest pivot of the row-equilibrated factorization.
    pub min_pivot: f64,
}

/// Inverts the Vandermonde matrix. Fails with [`Error::Singular`] when
/// the functionals are not unisolvent.
pub fn dual_basis(vandermonde: &DenseMatrix) -> Result<DualBasis> {
    Ok(dual_from_factors(
        vandermonde,
        &LuFactorization::factor(vandermonde)?,
    ))
}

fn dual_from_factors(vandermonde: &DenseMatrix, lu: &LuFactorization) -> DualBasis {
    let inv = refined_inverse_with(vandermonde, lu, REFINEMENT_STEPS);
    DualBasis {
        condition_estimate: vandermonde.norm_one() * inv.matrix.norm_one(),
        coeffs: inv.matrix,
        residual: inv.residual,
        refinement_steps: inv.refinement_steps,
        min_pivot: inv.min_pivot,
    }
}

/// A finite element on one cell: table, functionals and the factored
/// Vandermonde matrix. The explicit nodal basis is formed on demand.
#[derive(Clone, Debug)]
pub struct ElementDefinition {
    pub params: ElementParams,
    pub table: DofTable,
    pub simplex: Simplex,
    pub functionals: Vec<NodalFunctional>,
    pub basis: BernsteinBasis,
    pub vandermonde: DenseMatrix,
    factors: LuFactorization,
}

impl ElementDefinition {
    pub fn new(params: ElementParams, simplex: Simplex) -> Result<Self> {
        let table = assign_dofs(params)?;
        let functionals = realize_functionals(&table, &simplex)?;
        let basis = BernsteinBasis::new(params.n, params.k());
        let vandermonde = build_vandermonde(&basis, &functionals, &simplex)?;
        let factors = LuFactorization::factor(&vandermonde)?;
        Ok(Self {
            params,
            table,
            simplex,
            functionals,
            basis,
            vandermonde,
            factors,
        })
    }

    pub fn len(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functionals.is_empty()
    }

    /// Inverse of the Vandermonde matrix with its residual.
    pub fn dual_basis(&self) -> DualBasis {
        dual_from_factors(&self.vandermonde, &self.factors)
    }

    /// Bernstein coefficients of `sum_l dofs[l] * psi_l`.
    pub fn bernstein_coefficients(&self, dofs: &[f64]) -> Vec<f64> {
        self.factors
            .solve_refined(&self.vandermonde, dofs, REFINEMENT_STEPS)
    }

    /// Iterated directional derivative of the polynomial with the given
    /// Bernstein coefficients.
    pub fn evaluate(&self, coefficients: &[f64], point: &[f64], directions: &[Point]) -> f64 {
        dot2(
            &self.basis.row_on(&self.simplex, point, directions),
            coefficients,
        )
    }

    /// All functionals applied to the polynomial with the given Bernstein
    /// coefficients.
    pub fn apply_functionals(&self, coefficients: &[f64]) -> Vec<f64> {
        self.vandermonde.mul_vec(coefficients)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn bary(n: usize, raw: &[f64]) -> Vec<f64> {
        let s: f64 = raw[..=n].iter().sum();
        raw[..=n].iter().map(|x| x / s).collect()
    }

    #[test]
    fn small_values() {
        let b = BernsteinBasis::new(1, 2);
        assert_eq!(b.len(), 3);
        let row = b.derivative_row(&[0.25, 0.75], &[]);
        // B_(2,0) = l0^2, B_(1,1) = 2 l0 l1, B_(0,2) = l1^2
        assert_eq!(row, vec![0.0625, 0.375, 0.5625]);
        let d = b.derivative_row(&[0.25, 0.75], &[vec![-1.0, 1.0]]);
        assert_eq!(d, vec![-0.5, -1.0, 1.5]);
        assert_eq!(
            b.derivative_row(&[0.25, 0.75], &vec![vec![-1.0, 1.0]; 3]),
            vec![0.0; 3]
        );
    }

    proptest! {
        #[test]
        fn partition_of_unity(n in 1usize..5, k in 0u32..8, raw in prop::collection::vec(0.01f64..1.0, 5)) {
            let b = BernsteinBasis::new(n, k);
            let lambda = bary(n, &raw);
            let s: f64 = b.derivative_row(&lambda, &[]).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-13);
        }

        #[test]
        fn derivative_rows_sum_to_zero(
            n in 1usize..5, k in 1u32..8, d in 1usize..4,
            raw in prop::collection::vec(0.01f64..1.0, 5),
            dirs in prop::collection::vec(-1.0f64..1.0, 12),
        ) {
            let simplex = Simplex::unit(n);
            let b = BernsteinBasis::new(n, k);
            let x: Vec<f64> = bary(n, &raw)[1..].to_vec();
            let directions: Vec<Point> = (0..d)
                .map(|t| DVector::from_iterator(n, dirs[t * 4..t * 4 + n].iter().copied()))
                .collect();
            let row = b.row_on(&simplex, &x, &directions);
            let scale: f64 = row.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            prop_assert!(row.iter().sum::<f64>().abs() < 1e-12 * scale);
        }

        #[test]
        fn fast_rows_match_direct_formula(
            n in 1usize..4, k in 0u32..7, d in 0usize..3,
            raw in prop::collection::vec(0.01f64..1.0, 4),
            rates in prop::collection::vec(-2.0f64..2.0, 12),
        ) {
            let b = BernsteinBasis::new(n, k);
            let lambda = bary(n, &raw);
            let mu: Vec<Vec<f64>> = (0..d).map(|t| rates[t * 4..t * 4 + n + 1].to_vec()).collect();
            let row = b.derivative_row(&lambda, &mu);
            for (alpha, v) in b.indices().iter().zip(&row) {
                let direct = bernstein_derivative(alpha, &lambda, &mu);
                prop_assert!((v - direct).abs() <= 1e-11 * direct.abs().max(1.0));
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let simplex = Simplex::new(vec![
            vec![0.1, -0.2, 0.0],
            vec![1.3, 0.1, 0.2],
            vec![0.2, 0.9, -0.1],
            vec![0.3, 0.2, 1.1],
        ])
        .unwrap();
        let b = BernsteinBasis::new(3, 5);
        let x = [0.4, 0.3, 0.25];
        let u = DVector::from_vec(vec![0.6, -0.48, 0.64]);
        let h = 1e-5;
        let shifted = |s: f64| -> Vec<f64> {
            let p: Vec<f64> = x.iter().zip(u.iter()).map(|(a, b)| a + s * b).collect();
            b.row_on(&simplex, &p, &[])
        };
        let (plus, minus) = (shifted(h), shifted(-h));
        let exact = b.row_on(&simplex, &x, std::slice::from_ref(&u));
        for j in 0..b.len() {
            let fd = (plus[j] - minus[j]) / (2.0 * h);
            assert!(
                (fd - exact[j]).abs() < 1e-6 * exact[j].abs().max(1.0),
                "{j}: {fd} vs {}",
                exact[j]
            );
        }
        let second = b.row_on(&simplex, &x, &[u.clone(), u.clone()]);
        let mid = b.row_on(&simplex, &x, &[]);
        for j in 0..b.len() {
            let fd = (plus[j] - 2.0 * mid[j] + minus[j]) / (h * h);
            assert!((fd - second[j]).abs() < 1e-3 * second[j].abs().max(1.0));
        }
    }

    #[test]
    fn argyris_element() {
        let params = ElementParams::new(2, 1, 0).unwrap();
        let e = ElementDefinition::new(params, Simplex::unit(2)).unwrap();
        assert_eq!(e.len(), 21);
        assert_eq!(e.vandermonde.nrows(), 21);
        let dual = e.dual_basis();
        assert!(dual.residual < 1e-12, "{}", dual.residual);
        let mut dofs = vec![0.0; 21];
        dofs[3] = 1.0;
        let c = e.bernstein_coefficients(&dofs);
        for (j, cj) in c.iter().enumerate() {
            assert!((cj - dual.coeffs.get(j, 3)).abs() < 1e-12);
        }
        // nodal property through the public evaluation path
        for l in [0, 7, 20] {
            let mut dofs = vec![0.0; 21];
            dofs[l] = 1.0;
            let c = e.bernstein_coefficients(&dofs);
            let applied = e.apply_functionals(&c);
            for (i, v) in applied.iter().enumerate() {
                let target = if i == l { 1.0 } else { 0.0 };
                assert!((v - target).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn vandermonde_rejects_mismatched_inputs() {
        let params = ElementParams::new(2, 1, 0).unwrap();
        let e = ElementDefinition::new(params, Simplex::unit(2)).unwrap();
        let basis = BernsteinBasis::new(2, 4);
        assert!(build_vandermonde(&basis, &e.functionals, &e.simplex).is_err());
        assert!(build_vandermonde(&e.basis, &e.functionals, &Simplex::unit(3)).is_err());
    }

    #[test]
    fn repeated_functional_is_singular() {
        let params = ElementParams::new(2, 1, 0).unwrap();
        let e = ElementDefinition::new(params, Simplex::unit(2)).unwrap();
        let mut fs = e.functionals.clone();
        fs[20] = fs[19].clone();
        let v = build_vandermonde(&e.basis, &fs, &e.simplex).unwrap();
        assert!(matches!(dual_basis(&v), Err(Error::Singular { .. })));
    }
}
