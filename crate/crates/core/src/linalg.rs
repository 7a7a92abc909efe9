//! Exact linear algebra over [`Rat`] and [`CycNum`]: dense row reduction and
//! an incremental sparse echelon form used for the large homogeneous systems
//! (centroids, fixed spaces, cocycle spaces).

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_traits::{One, Zero};

use crate::scalars::{CycNum, Rat};

pub trait Field: Clone + PartialEq + Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Inverse of a nonzero element.
    fn inv(&self) -> Self;
}

impl Field for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        self.recip()
    }
}

impl Field for CycNum {
    fn zero() -> Self {
        CycNum::zero()
    }
    fn one() -> Self {
        CycNum::one()
    }
    fn is_zero(&self) -> bool {
        CycNum::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        CycNum::inv(self).expect("inverse of a pivot")
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<F: Field>(rows: &mut Vec<Vec<F>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inv();
        for v in rows[r].iter_mut() {
            if !v.is_zero() {
                *v = v.mul(&inv);
            }
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in c..ncols {
                    if !rows[r][j].is_zero() {
                        let t = f.mul(&rows[r][j]);
                        rows[i][j] = rows[i][j].sub(&t);
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn rank<F: Field>(rows: &[Vec<F>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Basis of `{x : A x = 0}` for a matrix with `ncols` columns.
pub fn nullspace<F: Field>(rows: &[Vec<F>], ncols: usize) -> Vec<Vec<F>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let mut basis = Vec::new();
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; ncols];
        for &p in &pivots {
            v[p] = true;
        }
        v
    };
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut x = vec![F::zero(); ncols];
        x[free] = F::one();
        for (row, &p) in m.iter().zip(&pivots) {
            if !row[free].is_zero() {
                x[p] = row[free].neg();
            }
        }
        basis.push(x);
    }
    basis
}

/// Solve `A x = b`; returns one solution if consistent.
pub fn solve<F: Field>(rows: &[Vec<F>], rhs: &[F]) -> Option<Vec<F>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<F>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut r = r.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![F::zero(); ncols];
    for (row, &p) in aug.iter().zip(&pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

pub fn mat_mul<F: Field>(a: &[Vec<F>], b: &[Vec<F>]) -> Vec<Vec<F>> {
    let inner = b.len();
    let ncols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..ncols)
                .map(|j| {
                    let mut acc = F::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            acc = acc.add(&row[k].mul(&b[k][j]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn identity<F: Field>(n: usize) -> Vec<Vec<F>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { F::one() } else { F::zero() }).collect())
        .collect()
}

pub fn inverse<F: Field>(a: &[Vec<F>]) -> Option<Vec<Vec<F>>> {
    let n = a.len();
    let mut aug: Vec<Vec<F>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { F::one() } else { F::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub type SparseRow<F> = BTreeMap<usize, F>;

/// Incrementally maintained echelon form of sparse rows. Each stored row has
/// pivot coefficient one at its smallest column.
#[derive(Clone, Debug)]
pub struct Echelon<F: Field> {
    rows: BTreeMap<usize, SparseRow<F>>,
}

impl<F: Field> Default for Echelon<F> {
    fn default() -> Self {
        Echelon { rows: BTreeMap::new() }
    }
}

impl<F: Field> Echelon<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &usize> {
        self.rows.keys()
    }

    /// Reduce a row against the stored pivots.
    pub fn reduce(&self, mut row: SparseRow<F>) -> SparseRow<F> {
        row.retain(|_, v| !v.is_zero());
        let mut cursor = 0usize;
        loop {
            let next = row.range(cursor..).find(|(c, _)| self.rows.contains_key(c)).map(|(c, v)| (*c, v.clone()));
            let Some((c, f)) = next else { break };
            let prow = &self.rows[&c];
            for (j, v) in prow {
                let t = f.mul(v);
                let e = row.entry(*j).or_insert_with(F::zero);
                *e = e.sub(&t);
                if e.is_zero() {
                    row.remove(j);
                }
            }
            cursor = c + 1;
        }
        row
    }

    /// Insert a row; returns true if it was independent of the stored rows.
    pub fn insert(&mut self, row: SparseRow<F>) -> bool {
        let row = self.reduce(row);
        let Some((&p, pv)) = row.iter().next() else {
            return false;
        };
        let inv = pv.inv();
        let row: SparseRow<F> = row.into_iter().map(|(c, v)| (c, v.mul(&inv))).collect();
        self.rows.insert(p, row);
        true
    }

    pub fn contains(&self, row: SparseRow<F>) -> bool {
        self.reduce(row).is_empty()
    }

    /// Fully reduced rows (every pivot column is zero in the other rows).
    pub fn reduced_rows(&self) -> Vec<(usize, SparseRow<F>)> {
        let mut out: BTreeMap<usize, SparseRow<F>> = BTreeMap::new();
        for (&p, row) in self.rows.iter().rev() {
            let mut r = row.clone();
            let cols: Vec<usize> = r.keys().copied().filter(|&c| c != p && out.contains_key(&c)).collect();
            for c in cols {
                let Some(f) = r.get(&c).cloned() else { continue };
                for (j, v) in &out[&c] {
                    let t = f.mul(v);
                    let e = r.entry(*j).or_insert_with(F::zero);
                    *e = e.sub(&t);
                    if e.is_zero() {
                        r.remove(j);
                    }
                }
            }
            out.insert(p, r);
        }
        out.into_iter().collect()
    }

    /// Basis of the solution space of the stored homogeneous system in
    /// `ncols` unknowns, as sparse vectors.
    pub fn nullspace(&self, ncols: usize) -> Vec<SparseRow<F>> {
        let reduced = self.reduced_rows();
        let mut basis = Vec::new();
        for free in (0..ncols).filter(|c| !self.rows.contains_key(c)) {
            let mut x = SparseRow::new();
            x.insert(free, F::one());
            for (p, row) in &reduced {
                if let Some(v) = row.get(&free) {
                    x.insert(*p, v.neg());
                }
            }
            basis.push(x);
        }
        basis
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rat;

    fn r(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn dense_nullspace_and_rank() {
        let a = vec![r(&[1, 2, 3]), r(&[2, 4, 6]), r(&[1, 0, 1])];
        assert_eq!(rank(&a), 2);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 1);
        for row in &a {
            let dot: Rat = row.iter().zip(&ns[0]).map(|(x, y)| x * y).sum();
            assert!(Zero::is_zero(&dot));
        }
    }

    #[test]
    fn dense_inverse() {
        let a = vec![r(&[2, 1]), r(&[1, 1])];
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity::<Rat>(2));
        assert!(inverse(&[r(&[1, 2]), r(&[2, 4])]).is_none());
    }

    #[test]
    fn sparse_matches_dense() {
        let a = vec![r(&[0, 1, 1, 0]), r(&[1, 0, 0, 1]), r(&[1, 1, 1, 1]), r(&[0, 0, 3, 0])];
        let mut e = Echelon::new();
        for row in &a {
            let sr: SparseRow<Rat> =
                row.iter().enumerate().filter(|(_, v)| !Zero::is_zero(*v)).map(|(i, v)| (i, v.clone())).collect();
            e.insert(sr);
        }
        assert_eq!(e.rank(), rank(&a));
        let ns = e.nullspace(4);
        assert_eq!(ns.len(), 4 - rank(&a));
        for x in &ns {
            for row in &a {
                let dot: Rat = x.iter().map(|(i, v)| &row[*i] * v).sum();
                assert!(Zero::is_zero(&dot));
            }
        }
    }

    #[test]
    fn solve_inconsistent() {
        let a = vec![r(&[1, 1]), r(&[2, 2])];
        assert!(solve(&a, &r(&[1, 3])).is_none());
        assert_eq!(solve(&a, &r(&[1, 2])).unwrap(), r(&[1, 0]));
    }
}
