//! Physical simplices, barycentric maps and intrinsic normal frames.

use nalgebra::{DMatrix, DVector};

use crate::combinatorics::SubSimplex;
use crate::error::{Error, Result};

pub type Point = DVector<f64>;

/// Residual norm below which a Gram-Schmidt candidate is treated as dependent.
pub const DEPENDENCE_TOL: f64 = 1e-10;

/// An affine `n`-simplex in `R^n` with globally numbered vertices.
///
/// Global vertex numbers identify shared faces between neighbouring cells;
/// anything attached to a face (points, normal frames) is computed from
/// the face's vertices sorted by global number, never from the local order.
#[derive(Clone, Debug)]
pub struct Simplex {
    vertices: Vec<Point>,
    global_ids: Vec<usize>,
    // lambda = affine * [1, x]
    affine: DMatrix<f64>,
    gradients: Vec<Point>,
}

impl Simplex {
    /// Simplex with global vertex numbers `0..=n`.
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let ids = (0..vertices.len()).collect();
        Self::with_global_ids(vertices, ids)
    }

    pub fn with_global_ids(vertices: Vec<Vec<f64>>, global_ids: Vec<usize>) -> Result<Self> {
        let n = vertices
            .len()
            .checked_sub(1)
            .filter(|n| *n >= 1)
            .ok_or_else(|| Error::Degenerate("a simplex needs at least two vertices".into()))?;
        if let Some(v) = vertices.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        if global_ids.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                got: global_ids.len(),
            });
        }
        let mut sorted = global_ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Degenerate(format!(
                "repeated global ids {global_ids:?}"
            )));
        }
        let vertices: Vec<Point> = vertices.into_iter().map(DVector::from_vec).collect();

        let edges = DMatrix::from_fn(n, n, |r, c| vertices[c + 1][r] - vertices[0][r]);
        let scale: f64 = (0..n).map(|c| edges.column(c).norm()).product();
        let det = edges.determinant();
        if scale == 0.0 || det.abs() <= 1e-12 * scale {
            return Err(Error::Degenerate(format!(
                "volume ratio {:e}",
                det.abs() / scale
            )));
        }

        // rows: [1, x_0, ..., x_{n-1}] per vertex as columns
        let homogeneous =
            DMatrix::from_fn(
                n + 1,
                n + 1,
                |r, c| {
                    if r == 0 {
                        1.0
                    } else {
                        vertices[c][r - 1]
                    }
                },
            );
        let affine = homogeneous
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("affine map is not invertible".into()))?;
        let gradients = (0..=n)
            .map(|i| DVector::from_fn(n, |j, _| affine[(i, j + 1)]))
            .collect();
        Ok(Simplex {
            vertices,
            global_ids,
            affine,
            gradients,
        })
    }

    /// The unit right simplex `{x_i >= 0, sum x_i <= 1}`.
    pub fn unit(n: usize) -> Self {
        let mut vertices = vec![vec![0.0; n]];
        for i in 0..n {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            vertices.push(v);
        }
        Self::new(vertices).expect("unit simplex is non-degenerate")
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i]
    }

    pub fn global_ids(&self) -> &[usize] {
        &self.global_ids
    }

    pub fn global_id(&self, local: usize) -> usize {
        self.global_ids[local]
    }

    /// Constant gradient of the `i`-th barycentric coordinate.
    pub fn gradient(&self, i: usize) -> &Point {
        &self.gradients[i]
    }

    pub fn gradients(&self) -> &[Point] {
        &self.gradients
    }

    pub fn barycentric(&self, point: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..=n)
            .map(|i| {
                self.affine[(i, 0)]
                    + (0..n)
                        .map(|j| self.affine[(i, j + 1)] * point[j])
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn from_barycentric(&self, lambda: &[f64]) -> Point {
        let mut x = DVector::zeros(self.dim());
        for (l, v) in lambda.iter().zip(&self.vertices) {
            x.axpy(*l, v, 1.0);
        }
        x
    }

    /// Face vertices as `(global id, coordinates)`, sorted by global id.
    pub fn face_vertices(&self, face: &SubSimplex) -> Vec<(usize, Point)> {
        let mut out: Vec<(usize, Point)> = face
            .vertices()
            .iter()
            .map(|&v| (self.global_ids[v], self.vertices[v].clone()))
            .collect();
        out.sort_by_key(|(g, _)| *g);
        out
    }

    /// Sorted global ids of a local face.
    pub fn face_key(&self, face: &SubSimplex) -> Vec<usize> {
        self.face_vertices(face)
            .into_iter()
            .map(|(g, _)| g)
            .collect()
    }

    /// Intrinsic frame of a local face.
    pub fn face_frame(&self, face: &SubSimplex) -> Result<NormalFrame> {
        let coords: Vec<Point> = self
            .face_vertices(face)
            .into_iter()
            .map(|(_, p)| p)
            .collect();
        normal_frame(&coords)
    }
}

/// Barycentric coordinates of `point` in `simplex`.
pub fn barycentric_coords(simplex: &Simplex, point: &[f64]) -> Result<Vec<f64>> {
    if point.len() != simplex.dim() {
        return Err(Error::DimensionMismatch {
            expected: simplex.dim(),
            got: point.len(),
        });
    }
    Ok(simplex.barycentric(point))
}

/// Orthonormal tangent and normal bases of a face.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFrame {
    pub tangents: Vec<Point>,
    pub normals: Vec<Point>,
}

fn orthogonalize(v: &mut Point, basis: &[Point]) {
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, 1.0);
        }
    }
}

/// Frame of the face spanned by `coords`, taken in the given order.
///
/// Tangents come from Gram-Schmidt on `v_i - v_0`; normals complete the
/// basis by Gram-Schmidt over the coordinate axes in index order, skipping
/// candidates whose residual norm is below [`DEPENDENCE_TOL`].
pub fn normal_frame(coords: &[Point]) -> Result<NormalFrame> {
    let first = coords
        .first()
        .ok_or_else(|| Error::Degenerate("empty face".into()))?;
    let n = first.len();
    if coords.len() > n + 1 {
        return Err(Error::Degenerate(format!(
            "{} points cannot be independent in R^{n}",
            coords.len()
        )));
    }
    if let Some(p) = coords.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.len(),
        });
    }
    let mut tangents: Vec<Point> = Vec::with_capacity(coords.len() - 1);
    for p in &coords[1..] {
        let mut v = p - first;
        let len = v.norm();
        orthogonalize(&mut v, &tangents);
        let r = v.norm();
        if r <= DEPENDENCE_TOL * len.max(1.0) {
            return Err(Error::Degenerate(
                "face vertices are affinely dependent".into(),
            ));
        }
        tangents.push(v / r);
    }
    let mut normals: Vec<Point> = Vec::with_capacity(n - tangents.len());
    for axis in 0..n {
        if tangents.len() + normals.len() == n {
            break;
        }
        let mut v = DVector::zeros(n);
        v[axis] = 1.0;
        orthogonalize(&mut v, &tangents);
        orthogonalize(&mut v, &normals);
        let r = v.norm();
        if r > DEPENDENCE_TOL {
            normals.push(v / r);
        }
    }
    Ok(NormalFrame { tangents, normals })
}
