//! Barycentric multi-indices, sub-simplex vertex subsets and polynomial
//! space dimensions.
//!
//! The lattice ordering is the one produced by nested loops over
//! `alpha_1` (outermost) through `alpha_n`, each ascending, with the
//! remainder stored in `alpha_0`. Everything downstream (assignment
//! ordinals, reports, Vandermonde column order) depends on it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest spatial dimension handled by the enumerators.
pub const MAX_DIM: usize = 6;

/// Largest lattice the enumerators will materialize.
pub const MAX_LATTICE_SIZE: u64 = 4_000_000;

/// Barycentric exponent tuple `(alpha_0, ..., alpha_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Number of barycentric components, `n + 1`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum of the components indexed by `vertices`.
    pub fn partial_sum(&self, vertices: &[usize]) -> u32 {
        vertices.iter().map(|&v| self.0[v]).sum()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl std::ops::Index<usize> for MultiIndex {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

/// A face of the reference simplex given by its (sorted) local vertex numbers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubSimplex(Vec<usize>);

impl SubSimplex {
    /// Builds a sub-simplex, rejecting empty or non-increasing vertex lists.
    pub fn new(vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() || vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTable(format!(
                "sub-simplex vertices must be strictly increasing: {vertices:?}"
            )));
        }
        Ok(SubSimplex(vertices))
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// Dimension of the face: 0 for a vertex, 1 for an edge, ...
    pub fn level(&self) -> usize {
        self.0.len() - 1
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Vertices of the `n`-simplex not on this face, ascending.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..=n).filter(|v| !self.contains(*v)).collect()
    }
}

impl fmt::Display for SubSimplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Binomial coefficient in wide arithmetic.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of the space of polynomials of total degree `k` in `n` variables.
/// Negative degrees give the empty space.
pub fn dim_pk(k: i64, n: usize) -> u64 {
    if k < 0 {
        return 0;
    }
    binomial(k as u64 + n as u64, n as u64) as u64
}

fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::DimensionOutOfRange(n))
    }
}

/// All multi-indices of length `n + 1` and degree `k`, in loop order.
pub fn enumerate_multiindices(n: usize, k: i64) -> Result<Vec<MultiIndex>> {
    check_dim(n)?;
    if k < 0 {
        return Err(Error::NegativeDegree(k));
    }
    let size = dim_pk(k, n);
    if size > MAX_LATTICE_SIZE {
        return Err(Error::LatticeTooLarge {
            n,
            k: k as u32,
            size,
            limit: MAX_LATTICE_SIZE,
        });
    }
    Ok(lattice(n, k as u32))
}

/// Unchecked lattice enumeration used internally for the lower-degree
/// lattices of the Bernstein recursion.
pub(crate) fn lattice(n: usize, k: u32) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(dim_pk(k as i64, n) as usize);
    let mut tail = vec![0u32; n];
    fill_lattice(&mut out, &mut tail, 0, k, k);
    out
}

fn fill_lattice(out: &mut Vec<MultiIndex>, tail: &mut [u32], depth: usize, left: u32, k: u32) {
    if depth == tail.len() {
        let mut entries = Vec::with_capacity(tail.len() + 1);
        entries.push(left);
        entries.extend_from_slice(tail);
        out.push(MultiIndex(entries));
        debug_assert_eq!(out.last().unwrap().degree(), k);
        return;
    }
    for a in 0..=left {
        tail[depth] = a;
        fill_lattice(out, tail, depth + 1, left - a, k);
    }
    tail[depth] = 0;
}

/// O(n) position lookup of a multi-index within [`enumerate_multiindices`]`(n, k)`.
#[derive(Clone, Debug)]
pub struct LatticeRanker {
    n: usize,
    k: u32,
    // below[r][b] = number of length-r tuples with sum <= b
    below: Vec<Vec<usize>>,
}

impl LatticeRanker {
    pub fn new(n: usize, k: u32) -> Self {
        let below = (0..=n)
            .map(|r| {
                (0..=k as u64)
                    .map(|b| binomial(b + r as u64, r as u64) as usize)
                    .collect()
            })
            .collect();
        LatticeRanker { n, k, below }
    }

    pub fn len(&self) -> usize {
        self.below[self.n][self.k as usize]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position of `alpha` in enumeration order. `alpha[0]` is ignored
    /// (it is implied by the degree).
    pub fn rank(&self, alpha: &[u32]) -> usize {
        debug_assert_eq!(alpha.len(), self.n + 1);
        let mut rank = 0;
        let mut budget = self.k;
        for (i, &a) in alpha[1..].iter().enumerate() {
            let rest = self.n - 1 - i;
            // tuples whose i-th tail entry is smaller than a
            for smaller in 0..a {
                rank += self.below[rest][(budget - smaller) as usize];
            }
            budget -= a;
        }
        rank
    }
}

/// All `parts`-tuples of non-negative integers summing to `total`,
/// in ascending lexicographic order.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0u32; parts];
    fill_compositions(&mut out, &mut cur, 0, total);
    out
}

fn fill_compositions(out: &mut Vec<Vec<u32>>, cur: &mut [u32], depth: usize, left: u32) {
    if depth + 1 == cur.len() {
        cur[depth] = left;
        out.push(cur.to_vec());
        return;
    }
    for a in 0..=left {
        cur[depth] = a;
        fill_compositions(out, cur, depth + 1, left - a);
    }
}

/// Position of `tuple` among [`compositions`]`(sum, len)`.
pub fn composition_rank(tuple: &[u32]) -> usize {
    let mut left: u32 = tuple.iter().sum();
    let mut rank = 0usize;
    for (i, &a) in tuple.iter().enumerate() {
        let rest = tuple.len() - 1 - i;
        if rest == 0 {
            break;
        }
        for smaller in 0..a {
            // compositions of (left - smaller) into `rest` parts
            let l = (left - smaller) as u64;
            rank += binomial(l + rest as u64 - 1, rest as u64 - 1) as usize;
        }
        left -= a;
    }
    rank
}

/// Inverse of [`composition_rank`]: the `rank`-th composition of `total`
/// into `parts` parts.
pub fn composition_unrank(mut rank: usize, total: u32, parts: usize) -> Option<Vec<u32>> {
    if parts == 0 {
        return (total == 0 && rank == 0).then(Vec::new);
    }
    let mut out = Vec::with_capacity(parts);
    let mut left = total;
    for i in 0..parts - 1 {
        let rest = (parts - 1 - i) as u64;
        let mut a = 0;
        loop {
            if a > left {
                return None;
            }
            let block = binomial((left - a) as u64 + rest - 1, rest - 1) as usize;
            if rank < block {
                break;
            }
            rank -= block;
            a += 1;
        }
        out.push(a);
        left -= a;
    }
    if rank != 0 {
        return None;
    }
    out.push(left);
    Some(out)
}

/// All faces of the `n`-simplex of the given level, lexicographically.
pub fn enumerate_subsimplices(n: usize, level: usize) -> Result<Vec<SubSimplex>> {
    if level > n {
        return Err(Error::LevelOutOfRange { level, n });
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(level + 1);
    fill_subsets(&mut out, &mut cur, 0, n, level + 1);
    Ok(out)
}

fn fill_subsets(
    out: &mut Vec<SubSimplex>,
    cur: &mut Vec<usize>,
    start: usize,
    n: usize,
    size: usize,
) {
    if cur.len() == size {
        out.push(SubSimplex(cur.clone()));
        return;
    }
    for v in start..=n {
        if n + 1 - v < size - cur.len() {
            break;
        }
        cur.push(v);
        fill_subsets(out, cur, v + 1, n, size);
        cur.pop();
    }
}
