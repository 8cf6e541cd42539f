//! Realization of assigned lattice indices as point functionals.
//!
//! * Vertex groups of order `d` become the Cartesian partials `D^beta`,
//!   `|beta| = d`, at the vertex. Members are sorted and paired with the
//!   `beta` in lexicographic order.
//! * A group `(F, d)` on a proper face takes the point with barycentric
//!   coordinates `alpha_i / (k - d)` on `F` and the pure normal derivative
//!   whose exponents over the intrinsic normal basis of `F` are the off-face
//!   components of `alpha`.
//! * Interior indices become values at `alpha / k`.
//!
//! Points and frames only depend on global vertex numbers and coordinates,
//! so a face shared by two cells yields the same functionals in both.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::assignment::DofTable;
use crate::combinatorics::{composition_rank, composition_unrank, compositions, SubSimplex};
use crate::error::{Error, Result};
use crate::geometry::{Point, Simplex};

/// Coordinates are rounded to this grid when functionals are matched
/// across cells.
pub const KEY_RESOLUTION: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FunctionalKind {
    Value,
    VertexPartial { cartesian: Vec<u32> },
    NormalDerivative { normal_powers: Vec<u32> },
}

#[derive(Clone, Debug)]
pub struct NodalFunctional {
    pub point: Point,
    pub kind: FunctionalKind,
    pub order: u32,
    /// Home face in local numbering.
    pub face: SubSimplex,
    /// Home face as sorted global vertex ids.
    pub global_face: Vec<usize>,
    /// Unit directions of the iterated derivative, `order` of them.
    pub directions: Vec<Point>,
}

/// Cell-independent identity of a functional.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunctionalKey {
    pub global_face: Vec<usize>,
    pub derivative: Vec<u32>,
    pub point: Vec<i64>,
}

impl NodalFunctional {
    pub fn key(&self) -> FunctionalKey {
        let derivative = match &self.kind {
            FunctionalKind::Value => Vec::new(),
            FunctionalKind::VertexPartial { cartesian } => cartesian.clone(),
            FunctionalKind::NormalDerivative { normal_powers } => normal_powers.clone(),
        };
        FunctionalKey {
            global_face: self.global_face.clone(),
            derivative,
            point: self
                .point
                .iter()
                .map(|x| (x / KEY_RESOLUTION).round() as i64)
                .collect(),
        }
    }

    /// Whether the home face lies inside the face with the given global ids.
    pub fn lies_on(&self, global_vertices: &[usize]) -> bool {
        self.global_face.iter().all(|g| global_vertices.contains(g))
    }
}

/// Maps an off-face component pattern to a normal-monomial exponent tuple.
///
/// The `r`-th composition of `d` into `q` parts (lexicographic) is sent to
/// the `r`-th exponent tuple of degree `d` in `q` variables.
pub fn off_face_bijection(off_components: &[u32], d: u32, q: usize) -> Result<Vec<u32>> {
    if off_components.len() != q {
        return Err(Error::DimensionMismatch {
            expected: q,
            got: off_components.len(),
        });
    }
    let sum: u32 = off_components.iter().sum();
    if sum != d {
        return Err(Error::SumMismatch {
            expected: d,
            got: sum,
        });
    }
    let rank = composition_rank(off_components);
    Ok(composition_unrank(rank, d, q).expect("rank within range"))
}

fn repeat_directions(basis: &[Point], powers: &[u32]) -> Vec<Point> {
    basis
        .iter()
        .zip(powers)
        .flat_map(|(v, &p)| std::iter::repeat_n(v.clone(), p as usize))
        .collect()
}

/// Realizes every member of `table` on `simplex`, in table order.
pub fn realize_functionals(table: &DofTable, simplex: &Simplex) -> Result<Vec<NodalFunctional>> {
    let p = table.params;
    let n = p.n;
    if simplex.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: simplex.dim(),
        });
    }
    let k = p.k();
    let axes: Vec<Point> = (0..n)
        .map(|i| {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            e
        })
        .collect();

    let mut out = Vec::with_capacity(table.total());
    for group in &table.groups {
        if group.members.is_empty() {
            continue;
        }
        let face = &group.subsimplex;
        let d = group.order;
        let global_face = simplex.face_key(face);
        match face.level() {
            0 => {
                let v = face.vertices()[0];
                let betas = compositions(d, n);
                let mut sorted: Vec<(usize, _)> = group.members.iter().enumerate().collect();
                sorted.sort_by(|a, b| a.1.cmp(b.1));
                let mut beta_of = vec![0usize; sorted.len()];
                for (rank, (pos, _)) in sorted.iter().enumerate() {
                    beta_of[*pos] = rank;
                }
                for rank in beta_of {
                    let beta = betas[rank].clone();
                    out.push(NodalFunctional {
                        point: simplex.vertex(v).clone(),
                        directions: repeat_directions(&axes, &beta),
                        kind: FunctionalKind::VertexPartial { cartesian: beta },
                        order: d,
                        face: face.clone(),
                        global_face: global_face.clone(),
                    });
                }
            }
            level if level == n => {
                for alpha in &group.members {
                    let lambda: Vec<f64> = alpha
                        .entries()
                        .iter()
                        .map(|&a| a as f64 / k as f64)
                        .collect();
                    out.push(NodalFunctional {
                        point: simplex.from_barycentric(&lambda),
                        kind: FunctionalKind::Value,
                        order: 0,
                        directions: Vec::new(),
                        face: face.clone(),
                        global_face: global_face.clone(),
                    });
                }
            }
            _ => {
                let frame = simplex.face_frame(face)?;
                let off = face.complement(n);
                let scale = (k - d) as f64;
                for alpha in &group.members {
                    let mut lambda = vec![0.0; n + 1];
                    for &v in face.vertices() {
                        lambda[v] = alpha[v] as f64 / scale;
                    }
                    let off_components: Vec<u32> = off.iter().map(|&v| alpha[v]).collect();
                    let powers = off_face_bijection(&off_components, d, off.len())?;
                    let kind = if d == 0 {
                        FunctionalKind::Value
                    } else {
                        FunctionalKind::NormalDerivative {
                            normal_powers: powers.clone(),
                        }
                    };
                    out.push(NodalFunctional {
                        point: simplex.from_barycentric(&lambda),
                        directions: repeat_directions(&frame.normals, &powers),
                        kind,
                        order: d,
                        face: face.clone(),
                        global_face: global_face.clone(),
                    });
                }
            }
        }
    }

    let mut seen: HashMap<FunctionalKey, usize> = HashMap::with_capacity(out.len());
    for (i, f) in out.iter().enumerate() {
        if let Some(first) = seen.insert(f.key(), i) {
            return Err(Error::DuplicateFunctional { first, second: i });
        }
    }
    Ok(out)
}

/// Members of proper-face groups that would be placed on the boundary of
/// their face (some on-face component is zero). Empty for every
/// admissible table; reported rather than asserted so sweeps can flag it.
pub fn boundary_placements(table: &DofTable) -> Vec<String> {
    let n = table.params.n;
    table
        .groups
        .iter()
        .filter(|g| (1..n).contains(&g.level()))
        .flat_map(|g| {
            g.members
                .iter()
                .filter(|a| g.subsimplex.vertices().iter().any(|&v| a[v] == 0))
                .map(move |a| format!("{a} on face {} at order {}", g.subsimplex, g.order))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{assign_dofs, ElementParams};
    use std::collections::HashSet;

    fn realize(n: usize, m: i64, k1: i64) -> (DofTable, Vec<NodalFunctional>) {
        let table = assign_dofs(ElementParams::new(n, m, k1).unwrap()).unwrap();
        let f = realize_functionals(&table, &Simplex::unit(n)).unwrap();
        (table, f)
    }

    #[test]
    fn bijection_examples() {
        assert_eq!(off_face_bijection(&[1, 0], 1, 2).unwrap(), vec![1, 0]);
        assert_eq!(off_face_bijection(&[0, 1], 1, 2).unwrap(), vec![0, 1]);
        let image: HashSet<Vec<u32>> = compositions(2, 2)
            .iter()
            .map(|c| off_face_bijection(c, 2, 2).unwrap())
            .collect();
        assert_eq!(
            image,
            [vec![2, 0], vec![1, 1], vec![0, 2]].into_iter().collect()
        );
        assert_eq!(
            off_face_bijection(&[1, 0], 2, 2),
            Err(Error::SumMismatch {
                expected: 2,
                got: 1
            })
        );
        assert!(off_face_bijection(&[1, 0], 1, 3).is_err());
    }

    #[test]
    fn bijection_is_bijective() {
        for q in 1..=4 {
            for d in 0..=5 {
                let domain = compositions(d, q);
                let image: HashSet<Vec<u32>> = domain
                    .iter()
                    .map(|c| off_face_bijection(c, d, q).unwrap())
                    .collect();
                assert_eq!(image.len(), domain.len());
                assert!(image.iter().all(|e| e.iter().sum::<u32>() == d));
            }
        }
        assert_eq!(compositions(2, 3).len(), 6);
    }

    #[test]
    fn argyris_functionals() {
        let (_, f) = realize(2, 1, 0);
        assert_eq!(f.len(), 21);
        let at_origin: Vec<_> = f.iter().filter(|f| f.face.vertices() == [0]).collect();
        assert_eq!(at_origin.len(), 6);
        let orders: Vec<u32> = at_origin.iter().map(|f| f.order).collect();
        assert_eq!(orders, vec![0, 1, 1, 2, 2, 2]);
        assert!(at_origin.iter().all(|f| f.point.norm() == 0.0));

        let edge: Vec<_> = f.iter().filter(|f| f.face.vertices() == [0, 1]).collect();
        assert_eq!(edge.len(), 1);
        assert_eq!(edge[0].order, 1);
        assert!((edge[0].point[0] - 0.5).abs() < 1e-15 && edge[0].point[1].abs() < 1e-15);
        assert_eq!(
            edge[0].kind,
            FunctionalKind::NormalDerivative {
                normal_powers: vec![1]
            }
        );
        // the edge {0,1} lies on x_2 = 0
        assert!((edge[0].directions[0][1].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reference_face_values() {
        let (table, f) = realize(3, 3, 2);
        assert_eq!(f.len(), 4060);
        let face_values: Vec<_> = f
            .iter()
            .filter(|f| f.face.vertices() == [0, 1, 2] && f.order == 0)
            .collect();
        assert_eq!(face_values.len(), 28);
        assert!(face_values.iter().all(|f| f.kind == FunctionalKind::Value));
        // strictly inside the face x_3 = 0
        for fv in face_values {
            let l = Simplex::unit(3).barycentric(fv.point.as_slice());
            assert!(l[3].abs() < 1e-15);
            assert!(l[..3].iter().all(|x| *x > 0.0));
        }
        assert!(boundary_placements(&table).is_empty());
    }

    #[test]
    fn interior_values_sit_on_the_lattice() {
        let (table, f) = realize(3, 1, 1);
        let interior = table.groups.last().unwrap();
        let k = table.params.k() as f64;
        let cell = Simplex::unit(3);
        let values: Vec<_> = f.iter().filter(|f| f.face.level() == 3).collect();
        assert_eq!(values.len(), interior.members.len());
        for (fv, a) in values.iter().zip(&interior.members) {
            let l = cell.barycentric(fv.point.as_slice());
            for (li, ai) in l.iter().zip(a.entries()) {
                assert!((li - *ai as f64 / k).abs() < 1e-14);
            }
            assert!(a.entries().iter().all(|&x| x < table.params.k()));
        }
    }

    #[test]
    fn functionals_are_distinct_and_counted() {
        for (n, m, k1) in [
            (1, 1, 0),
            (2, 1, 0),
            (2, 2, 1),
            (2, 3, 0),
            (3, 1, 0),
            (3, 2, 0),
            (4, 1, 0),
        ] {
            let (table, f) = realize(n, m, k1);
            assert_eq!(f.len() as u64, table.params.dimension());
            let keys: HashSet<_> = f.iter().map(|f| f.key()).collect();
            assert_eq!(keys.len(), f.len());
            for fun in &f {
                assert_eq!(fun.directions.len() as u32, fun.order);
                for d in &fun.directions {
                    assert!((d.norm() - 1.0).abs() < 1e-14);
                }
            }
            assert!(boundary_placements(&table).is_empty());
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let table = assign_dofs(ElementParams::new(2, 1, 0).unwrap()).unwrap();
        assert!(matches!(
            realize_functionals(&table, &Simplex::unit(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
