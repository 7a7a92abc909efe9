//! Generalized Cartan matrices: validation, symmetrizers, classification
//! against the finite and affine catalogs, diagram automorphisms and an
//! explicit realization.
//!
//! Convention: `a_ij = α_j(α_i∨)`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalars::{rat, Rat};

/// A permutation of node indices, `p[i]` being the image of node `i`.
pub type Perm = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gcm {
    n: usize,
    entries: Vec<Vec<i64>>,
    symmetrizer: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "label", rename_all = "lowercase")]
pub enum CartanType {
    Finite(String),
    Affine(String),
    Indefinite,
}

impl CartanType {
    pub fn label(&self) -> Option<&str> {
        match self {
            CartanType::Finite(l) | CartanType::Affine(l) => Some(l),
            CartanType::Indefinite => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CartanType::Finite(_) => "finite",
            CartanType::Affine(_) => "affine",
            CartanType::Indefinite => "indefinite",
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, CartanType::Finite(_))
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, CartanType::Affine(_))
    }
}

/// Classification together with the node matching used for the label:
/// `catalog_perm[i]` is the catalog node corresponding to node `i`.
#[derive(Clone, Debug)]
pub struct Classification {
    pub ty: CartanType,
    pub catalog_perm: Option<Perm>,
}

impl Gcm {
    /// Validate a square integer matrix and compute its symmetrizer.
    pub fn new(matrix: Vec<Vec<i64>>) -> Result<Gcm> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::NotGcm("empty matrix".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotGcm(format!("row {i} has length {}, expected {n}", row.len())));
            }
        }
        for i in 0..n {
            if matrix[i][i] != 2 {
                return Err(Error::NotGcm(format!("diagonal entry ({i},{i}) is {}", matrix[i][i])));
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                if matrix[i][j] > 0 {
                    return Err(Error::NotGcm(format!("positive off-diagonal entry ({i},{j})")));
                }
                if (matrix[i][j] == 0) != (matrix[j][i] == 0) {
                    return Err(Error::NotGcm(format!("zero pattern not symmetric at ({i},{j})")));
                }
            }
        }
        // connectivity
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut eps: Vec<Option<Rat>> = vec![None; n];
        eps[0] = Some(rat(1));
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if i != j && matrix[i][j] != 0 && !seen[j] {
                    seen[j] = true;
                    // ε_j a_ij = ε_i a_ji
                    let ei = eps[i].clone().expect("visited");
                    eps[j] = Some(ei * rat(matrix[j][i]) / rat(matrix[i][j]));
                    queue.push_back(j);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Decomposable);
        }
        let eps: Vec<Rat> = eps.into_iter().map(|e| e.expect("connected")).collect();
        for i in 0..n {
            for j in 0..n {
                if &eps[j] * rat(matrix[i][j]) != &eps[i] * rat(matrix[j][i]) {
                    return Err(Error::NotSymmetrizable);
                }
            }
        }
        let denom_lcm = eps.iter().fold(num_bigint::BigInt::from(1), |acc, e| acc.lcm(e.denom()));
        let ints: Vec<num_bigint::BigInt> = eps.iter().map(|e| (e * Rat::from_integer(denom_lcm.clone())).to_integer()).collect();
        let g = ints.iter().fold(num_bigint::BigInt::zero(), |acc, x| acc.gcd(x));
        let symmetrizer = ints
            .iter()
            .map(|x| i64::try_from(x / &g).map_err(|_| Error::NotGcm("symmetrizer overflow".into())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Gcm { n, entries: matrix, symmetrizer })
    }

    /// Build a catalog matrix from a label such as `A2`, `G2`, `A1^(1)`,
    /// `D4^(3)`.
    pub fn from_label(label: &str) -> Result<Gcm> {
        catalog::parse_label(label)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn a(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    pub fn symmetrizer(&self) -> &[i64] {
        &self.symmetrizer
    }

    pub fn transpose(&self) -> Gcm {
        let m = (0..self.n).map(|i| (0..self.n).map(|j| self.entries[j][i]).collect()).collect();
        Gcm::new(m).expect("transpose of a GCM is a GCM")
    }

    /// Principal submatrix on the given nodes (not necessarily connected).
    pub fn principal(&self, nodes: &[usize]) -> Vec<Vec<i64>> {
        nodes.iter().map(|&i| nodes.iter().map(|&j| self.entries[i][j]).collect()).collect()
    }

    /// The symmetric matrix `D⁻¹A`.
    pub fn symmetrized(&self) -> Vec<Vec<Rat>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| rat(self.entries[i][j]) / rat(self.symmetrizer[i])).collect())
            .collect()
    }

    pub fn rank(&self) -> usize {
        let m: Vec<Vec<Rat>> = self.entries.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
        linalg::rank(&m)
    }

    pub fn corank(&self) -> usize {
        self.n - self.rank()
    }

    pub fn classify(&self) -> CartanType {
        self.classify_detailed().ty
    }

    pub fn classify_detailed(&self) -> Classification {
        let b = self.symmetrized();
        let all: Vec<usize> = (0..self.n).collect();
        if positive_definite(&b, &all) {
            let (label, perm) = catalog::match_finite(self).expect("every finite GCM is in the catalog");
            return Classification { ty: CartanType::Finite(label), catalog_perm: Some(perm) };
        }
        let det_zero = determinant(&sub(&b, &all)).is_zero();
        let proper_finite = (0..self.n).all(|k| {
            let nodes: Vec<usize> = (0..self.n).filter(|&i| i != k).collect();
            positive_definite(&b, &nodes)
        });
        if det_zero && proper_finite {
            let (label, perm) = catalog::match_affine(self).expect("every affine GCM is in the catalog");
            return Classification { ty: CartanType::Affine(label), catalog_perm: Some(perm) };
        }
        Classification { ty: CartanType::Indefinite, catalog_perm: None }
    }

    /// All permutations `ν` with `a_{ν i, ν j} = a_ij`, sorted.
    pub fn automorphisms(&self) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut partial = vec![usize::MAX; self.n];
        let mut used = vec![false; self.n];
        isomorphisms_rec(&self.entries, &self.entries, 0, &mut partial, &mut used, &mut out, usize::MAX);
        out.sort();
        out
    }

    /// Orbits of the diagram automorphism group, sorted by smallest member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let auts = self.automorphisms();
        let mut seen = vec![false; self.n];
        let mut orbits = Vec::new();
        for i in 0..self.n {
            if seen[i] {
                continue;
            }
            let orbit: BTreeSet<usize> = auts.iter().map(|p| p[i]).collect();
            for &j in &orbit {
                seen[j] = true;
            }
            orbits.push(orbit.into_iter().collect());
        }
        orbits
    }

    pub fn is_automorphism(&self, perm: &[usize]) -> bool {
        perm.len() == self.n
            && is_permutation(perm)
            && (0..self.n).all(|i| (0..self.n).all(|j| self.entries[perm[i]][perm[j]] == self.entries[i][j]))
    }

    /// A permutation `π` with `other[π i][π j] = self[i][j]`, if any.
    pub fn isomorphism_to(&self, other: &[Vec<i64>]) -> Option<Perm> {
        if other.len() != self.n || fingerprint(&self.entries) != fingerprint(other) {
            return None;
        }
        let mut out = Vec::new();
        let mut partial = vec![usize::MAX; self.n];
        let mut used = vec![false; self.n];
        isomorphisms_rec(&self.entries, other, 0, &mut partial, &mut used, &mut out, 1);
        out.pop()
    }

    pub fn realization(&self) -> Realization {
        Realization::new(self)
    }

    /// `⟨β, α_i∨⟩` for `β` in simple-root coordinates.
    pub fn pairing(&self, beta: &[i64], i: usize) -> i64 {
        beta.iter().enumerate().map(|(j, b)| b * self.entries[i][j]).sum()
    }

    /// Positive roots of a finite-type matrix, sorted by height and then by
    /// decreasing coordinate vector (so `α_1, α_2, …` come first).
    pub fn positive_roots(&self) -> Result<Vec<Vec<i64>>> {
        if !self.classify().is_finite() {
            return Err(Error::WrongType("positive roots are enumerated for finite type only".into()));
        }
        let n = self.n;
        let mut roots: Vec<Vec<i64>> = (0..n).map(|i| unit(n, i)).collect();
        let mut known: BTreeSet<Vec<i64>> = roots.iter().cloned().collect();
        let mut start = 0;
        while start < roots.len() {
            let end = roots.len();
            let mut next = BTreeSet::new();
            for beta in &roots[start..end] {
                for i in 0..n {
                    let mut p = 0;
                    let mut cur = beta.clone();
                    loop {
                        cur[i] -= 1;
                        if known.contains(&cur) {
                            p += 1;
                        } else {
                            break;
                        }
                    }
                    let q = p - self.pairing(beta, i);
                    if q > 0 {
                        let mut up = beta.clone();
                        up[i] += 1;
                        if !known.contains(&up) {
                            next.insert(up);
                        }
                    }
                }
            }
            for r in next {
                known.insert(r.clone());
                roots.push(r);
            }
            start = end;
        }
        roots.sort_by(|a, b| height(a).cmp(&height(b)).then_with(|| b.cmp(a)));
        Ok(roots)
    }

    /// Gram matrix of the symmetric bilinear form on the root lattice with
    /// `(α_i, α_j) = a_ij / ε_i`.
    pub fn root_gram(&self) -> Vec<Vec<Rat>> {
        self.symmetrized()
    }
}

impl fmt::Display for Gcm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

pub fn height(beta: &[i64]) -> i64 {
    beta.iter().sum()
}

pub fn unit(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

pub fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

pub fn compose(p: &[usize], q: &[usize]) -> Perm {
    q.iter().map(|&i| p[i]).collect()
}

pub fn invert(p: &[usize]) -> Perm {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

pub fn perm_order(p: &[usize]) -> u32 {
    let mut seen = vec![false; p.len()];
    let mut order = 1u32;
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut len = 0u32;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        order = order.lcm(&len);
    }
    order
}

/// Cycle notation with 1-based nodes, e.g. `(1 2)(3)` prints as `(12)`.
pub fn cycle_notation(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut parts = Vec::new();
    for i in 0..p.len() {
        if seen[i] || p[i] == i {
            seen[i] = true;
            continue;
        }
        let mut cyc = Vec::new();
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            cyc.push((j + 1).to_string());
            j = p[j];
        }
        parts.push(format!("({})", cyc.join(" ")));
    }
    if parts.is_empty() {
        "id".into()
    } else {
        parts.concat()
    }
}

fn fingerprint(m: &[Vec<i64>]) -> Vec<Vec<(i64, i64)>> {
    let n = m.len();
    let mut rows: Vec<Vec<(i64, i64)>> = (0..n)
        .map(|i| {
            let mut r: Vec<(i64, i64)> = (0..n).filter(|&j| j != i).map(|j| (m[i][j], m[j][i])).collect();
            r.sort();
            r
        })
        .collect();
    rows.sort();
    rows
}

fn isomorphisms_rec(
    a: &[Vec<i64>],
    b: &[Vec<i64>],
    i: usize,
    partial: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Perm>,
    limit: usize,
) {
    let n = a.len();
    if out.len() >= limit {
        return;
    }
    if i == n {
        out.push(partial.clone());
        return;
    }
    for cand in 0..n {
        if used[cand] {
            continue;
        }
        let ok = (0..i).all(|j| a[i][j] == b[cand][partial[j]] && a[j][i] == b[partial[j]][cand]);
        if !ok {
            continue;
        }
        partial[i] = cand;
        used[cand] = true;
        isomorphisms_rec(a, b, i + 1, partial, used, out, limit);
        used[cand] = false;
        partial[i] = usize::MAX;
    }
}

fn sub(b: &[Vec<Rat>], nodes: &[usize]) -> Vec<Vec<Rat>> {
    nodes.iter().map(|&i| nodes.iter().map(|&j| b[i][j].clone()).collect()).collect()
}

pub(crate) fn determinant(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = rat(1);
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return rat(0);
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let piv = a[c][c].clone();
        det *= &piv;
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &piv;
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
        }
    }
    det
}

/// Positive definiteness of the principal submatrix on `nodes`, by leading
/// minors. Works for decomposable submatrices too.
fn positive_definite(b: &[Vec<Rat>], nodes: &[usize]) -> bool {
    (1..=nodes.len()).all(|k| determinant(&sub(b, &nodes[..k])).is_positive())
}

/// An explicit realization `(h, Π, Π∨)` with `dim h = n + corank`.
///
/// Basis of `h`: `α_1∨, …, α_n∨, d_1, …, d_k`. The extra basis vectors are
/// fixed by `α_j(d_l) = F_jl` with `F` built from indicator functionals of the
/// diagram-automorphism orbits, so every diagram automorphism extends to `h`
/// fixing each `d_l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Realization {
    pub h_dim: usize,
    /// Row `j` holds the coordinates of `α_j` on the basis of `h`.
    pub simple_roots: Vec<Vec<i64>>,
    pub simple_coroots: Vec<Vec<i64>>,
    pub h_prime_basis: Vec<Vec<i64>>,
    pub h_dprime_basis: Vec<Vec<i64>>,
    pub center_basis: Vec<Vec<i64>>,
}

impl Realization {
    fn new(g: &Gcm) -> Realization {
        let n = g.n();
        let k = g.corank();
        let h_dim = n + k;
        let row = |j: usize, extra: &[Vec<i64>]| -> Vec<Rat> {
            let mut r: Vec<Rat> = (0..n).map(|i| rat(g.a(i, j))).collect();
            r.extend(extra.iter().map(|col| rat(col[j])));
            r
        };
        let mut extra: Vec<Vec<i64>> = Vec::new();
        let mut candidates: Vec<Vec<i64>> = g
            .orbits()
            .into_iter()
            .map(|o| {
                let mut v = vec![0; n];
                for i in o {
                    v[i] = 1;
                }
                v
            })
            .collect();
        candidates.extend((0..n).map(|i| unit(n, i)));
        let mut cur_rank = g.rank();
        for cand in candidates {
            if extra.len() == k {
                break;
            }
            let mut trial = extra.clone();
            trial.push(cand.clone());
            let m: Vec<Vec<Rat>> = (0..n).map(|j| row(j, &trial)).collect();
            let r = linalg::rank(&m);
            if r > cur_rank {
                cur_rank = r;
                extra = trial;
            }
        }
        debug_assert_eq!(cur_rank, n);
        let simple_roots: Vec<Vec<i64>> = (0..n)
            .map(|j| {
                let mut r: Vec<i64> = (0..n).map(|i| g.a(i, j)).collect();
                r.extend(extra.iter().map(|col| col[j]));
                r
            })
            .collect();
        let simple_coroots: Vec<Vec<i64>> = (0..n).map(|i| unit(h_dim, i)).collect();
        let h_prime_basis = simple_coroots.clone();
        let h_dprime_basis = (n..h_dim).map(|i| unit(h_dim, i)).collect();
        let at: Vec<Vec<Rat>> = (0..n).map(|j| (0..n).map(|i| rat(g.a(i, j))).collect()).collect();
        let center_basis = linalg::nullspace(&at, n)
            .into_iter()
            .map(|v| {
                let mut w = primitive_integral(&v);
                w.resize(h_dim, 0);
                w
            })
            .collect();
        Realization { h_dim, simple_roots, simple_coroots, h_prime_basis, h_dprime_basis, center_basis }
    }

    pub fn n(&self) -> usize {
        self.simple_roots.len()
    }

    pub fn corank(&self) -> usize {
        self.h_dim - self.n()
    }

    /// `α_j(h)` for `h` given in coordinates.
    pub fn eval_root(&self, j: usize, h: &[Rat]) -> Rat {
        self.simple_roots[j].iter().zip(h).map(|(a, x)| rat(*a) * x).sum()
    }

    /// The functional values `α_j(d_l)`.
    pub fn dprime_values(&self) -> Vec<Vec<i64>> {
        let n = self.n();
        self.simple_roots.iter().map(|r| r[n..].to_vec()).collect()
    }
}

/// Scale a rational vector to a primitive integer vector with positive
/// leading entry.
pub fn primitive_integral(v: &[Rat]) -> Vec<i64> {
    let l = v.iter().fold(num_bigint::BigInt::from(1), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<num_bigint::BigInt> = v.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect();
    let mut g = ints.iter().fold(num_bigint::BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return vec![0; v.len()];
    }
    if ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        g = -g;
    }
    ints.iter().map(|x| i64::try_from(x / &g).expect("small integral vector")).collect()
}

pub mod catalog {
    //! Standard finite and affine Cartan matrices (Bourbaki numbering for the
    //! finite types; affine node first for the affine types).

    use super::*;

    pub fn finite(series: char, n: usize) -> Option<Vec<Vec<i64>>> {
        let mut a = vec![vec![0i64; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 2;
        }
        let link = |a: &mut Vec<Vec<i64>>, i: usize, j: usize, aij: i64, aji: i64| {
            a[i][j] = aij;
            a[j][i] = aji;
        };
        match (series, n) {
            ('A', n) if n >= 1 => {
                for i in 0..n - 1 {
                    link(&mut a, i, i + 1, -1, -1);
                }
            }
            ('B', n) if n >= 2 => {
                for i in 0..n - 2 {
                    link(&mut a, i, i + 1, -1, -1);
                }
                link(&mut a, n - 2, n - 1, -1, -2);
            }
            ('C', n) if n >= 2 => {
                for i in 0..n - 2 {
                    link(&mut a, i, i + 1, -1, -1);
                }
                link(&mut a, n - 2, n - 1, -2, -1);
            }
            ('D', n) if n >= 4 => {
                for i in 0..n - 2 {
                    link(&mut a, i, i + 1, -1, -1);
                }
                link(&mut a, n - 3, n - 1, -1, -1);
            }
            ('E', 6..=8) => {
                // 1-3-4-5-6-7-8 with 2 attached to 4
                link(&mut a, 0, 2, -1, -1);
                link(&mut a, 1, 3, -1, -1);
                for i in 2..n - 1 {
                    link(&mut a, i, i + 1, -1, -1);
                }
            }
            ('F', 4) => {
                link(&mut a, 0, 1, -1, -1);
                link(&mut a, 1, 2, -1, -2);
                link(&mut a, 2, 3, -1, -1);
            }
            ('G', 2) => link(&mut a, 0, 1, -1, -3),
            _ => return None,
        }
        Some(a)
    }

    /// Finite types of rank `n`, each listed once up to isomorphism.
    pub fn finite_types(n: usize) -> Vec<(char, usize)> {
        let mut out = vec![('A', n)];
        if n >= 3 {
            out.push(('B', n));
        }
        if n >= 2 {
            out.push(('C', n));
        }
        if n >= 4 {
            out.push(('D', n));
        }
        if (6..=8).contains(&n) {
            out.push(('E', n));
        }
        if n == 4 {
            out.push(('F', 4));
        }
        if n == 2 {
            out.push(('G', 2));
        }
        out
    }

    pub fn finite_label(series: char, n: usize) -> String {
        format!("{series}{n}")
    }

    /// Highest root and highest coroot (in simple coroot coordinates) of a
    /// finite-type matrix.
    pub fn highest_root(g: &Gcm) -> (Vec<i64>, Vec<Rat>) {
        let roots = g.positive_roots().expect("finite type");
        let theta = roots.last().expect("nonempty root system").clone();
        let gram = g.root_gram();
        let norm = |v: &[i64]| -> Rat {
            let mut s = rat(0);
            for i in 0..v.len() {
                for j in 0..v.len() {
                    s += &gram[i][j] * rat(v[i] * v[j]);
                }
            }
            s
        };
        let tt = norm(&theta);
        let coroot = (0..g.n()).map(|k| rat(theta[k]) * norm(&unit(g.n(), k)) / &tt).collect();
        (theta, coroot)
    }

    /// The untwisted affine matrix `X^(1)` with the affine node first.
    pub fn untwisted(fin: &Gcm) -> Vec<Vec<i64>> {
        let n = fin.n();
        if n == 1 {
            return vec![vec![2, -2], vec![-2, 2]];
        }
        let (theta, theta_co) = highest_root(fin);
        let mut a = vec![vec![0i64; n + 1]; n + 1];
        a[0][0] = 2;
        for i in 0..n {
            for j in 0..n {
                a[i + 1][j + 1] = fin.a(i, j);
            }
        }
        for j in 0..n {
            // a_0j = α_j(K - θ∨) = -α_j(θ∨)
            let v: Rat = (0..n).map(|k| &theta_co[k] * rat(fin.a(k, j))).sum();
            assert!(v.is_integer());
            a[0][j + 1] = -v.to_integer().try_into().unwrap_or(0i64);
            // a_j0 = (δ - θ)(α_j∨) = -θ(α_j∨)
            a[j + 1][0] = -fin.pairing(&theta, j);
        }
        a
    }

    fn transpose(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
        (0..m.len()).map(|i| (0..m.len()).map(|j| m[j][i]).collect()).collect()
    }

    /// `A_{2ℓ}^(2)`: a chain with double bonds at both ends pointing the same
    /// way.
    fn a_even_twisted(l: usize) -> Vec<Vec<i64>> {
        if l == 1 {
            return vec![vec![2, -4], vec![-1, 2]];
        }
        let n = l + 1;
        let mut a = vec![vec![0i64; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 2;
        }
        for i in 0..n - 1 {
            a[i][i + 1] = -1;
            a[i + 1][i] = -1;
        }
        a[0][1] = -2;
        a[n - 2][n - 1] = -2;
        a
    }

    /// Affine types with `n` nodes: label and matrix (affine node first).
    pub fn affine_types(n: usize) -> Vec<(String, Vec<Vec<i64>>)> {
        let mut out = Vec::new();
        if n < 2 {
            return out;
        }
        let l = n - 1;
        for (s, r) in finite_types(l) {
            let fin = Gcm::new(finite(s, r).expect("catalog")).expect("catalog GCM");
            out.push((format!("{s}{r}^(1)"), untwisted(&fin)));
        }
        let fin_of = |s: char, r: usize| Gcm::new(finite(s, r).expect("catalog")).expect("catalog GCM");
        out.push((format!("A{}^(2)", 2 * l), a_even_twisted(l)));
        if l >= 3 {
            out.push((format!("A{}^(2)", 2 * l - 1), transpose(&untwisted(&fin_of('B', l)))));
        }
        if l >= 2 {
            out.push((format!("D{}^(2)", l + 1), transpose(&untwisted(&fin_of('C', l)))));
        }
        if l == 4 {
            out.push(("E6^(2)".into(), transpose(&untwisted(&fin_of('F', 4)))));
        }
        if l == 2 {
            out.push(("D4^(3)".into(), transpose(&untwisted(&fin_of('G', 2)))));
        }
        out
    }

    pub fn match_finite(g: &Gcm) -> Option<(String, Perm)> {
        finite_types(g.n()).into_iter().find_map(|(s, r)| {
            let m = finite(s, r)?;
            g.isomorphism_to(&m).map(|p| (finite_label(s, r), p))
        })
    }

    pub fn match_affine(g: &Gcm) -> Option<(String, Perm)> {
        affine_types(g.n()).into_iter().find_map(|(label, m)| g.isomorphism_to(&m).map(|p| (label, p)))
    }

    pub fn parse_label(label: &str) -> Result<Gcm> {
        let bad = || Error::schema("/gcm", format!("unknown Cartan type label {label:?}"));
        let label = label.trim().replace('_', "");
        let (base, twist) = match label.split_once('^') {
            Some((b, t)) => {
                let t = t.trim_start_matches('(').trim_end_matches(')');
                (b.to_string(), Some(t.parse::<u32>().map_err(|_| bad())?))
            }
            None => (label.clone(), None),
        };
        let mut chars = base.chars();
        let series = chars.next().ok_or_else(bad)?.to_ascii_uppercase();
        let rank: usize = chars.as_str().parse().map_err(|_| bad())?;
        match twist {
            None => {
                let m = finite(series, rank).ok_or_else(bad)?;
                Gcm::new(m)
            }
            Some(r) => {
                let want = format!("{series}{rank}^({r})");
                let found = (2..=rank + 2)
                    .flat_map(affine_types)
                    .find(|(l, _)| *l == want)
                    .or_else(|| {
                        // B2^(1) is listed as C2^(1)
                        (series == 'B' && rank == 2 && r == 1)
                            .then(|| affine_types(3).into_iter().find(|(l, _)| l == "C2^(1)"))
                            .flatten()
                    })
                    .ok_or_else(bad)?;
                Gcm::new(found.1)
            }
        }
    }

    /// Label of the affine algebra obtained from finite type `X_N` twisted by
    /// a diagram automorphism of order `r`.
    pub fn twisted_label(finite_label: &str, r: u32) -> String {
        format!("{finite_label}^({r})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gcm(m: &[&[i64]]) -> Result<Gcm> {
        Gcm::new(m.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn validation() {
        assert_eq!(gcm(&[&[2, -1], &[-1, 2]]).unwrap().symmetrizer(), &[1, 1]);
        assert_eq!(gcm(&[&[2, -1], &[-2, 2]]).unwrap().symmetrizer(), &[1, 2]);
        assert!(matches!(gcm(&[&[2, 1], &[1, 2]]), Err(Error::NotGcm(_))));
        assert!(matches!(gcm(&[&[2, 0], &[0, 2]]), Err(Error::Decomposable)));
        assert!(matches!(gcm(&[&[2, -1], &[0, 2]]), Err(Error::NotGcm(_))));
        assert!(matches!(gcm(&[&[3, -1], &[-1, 2]]), Err(Error::NotGcm(_))));
        // a 3-cycle with inconsistent ratios
        assert!(matches!(
            gcm(&[&[2, -1, -1], &[-2, 2, -1], &[-1, -1, 2]]),
            Err(Error::NotSymmetrizable)
        ));
    }

    #[test]
    fn symmetrizer_symmetrizes() {
        for label in ["B3", "C4", "F4", "G2", "A4^(2)", "D4^(3)", "E6^(2)"] {
            let g = Gcm::from_label(label).unwrap();
            let b = g.symmetrized();
            for i in 0..g.n() {
                for j in 0..g.n() {
                    assert_eq!(b[i][j], b[j][i], "{label}");
                }
            }
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(gcm(&[&[2, -1], &[-1, 2]]).unwrap().classify(), CartanType::Finite("A2".into()));
        assert_eq!(gcm(&[&[2, -2], &[-2, 2]]).unwrap().classify(), CartanType::Affine("A1^(1)".into()));
        assert_eq!(gcm(&[&[2, -3], &[-3, 2]]).unwrap().classify(), CartanType::Indefinite);
        assert_eq!(gcm(&[&[2, -1], &[-3, 2]]).unwrap().classify(), CartanType::Finite("G2".into()));
        assert_eq!(gcm(&[&[2, -1], &[-4, 2]]).unwrap().classify(), CartanType::Affine("A2^(2)".into()));
        assert_eq!(gcm(&[&[2, -1], &[-2, 2]]).unwrap().classify(), CartanType::Finite("C2".into()));
    }

    #[test]
    fn catalog_finite_entries_are_finite_and_distinct() {
        for n in 1..=8 {
            let types = catalog::finite_types(n);
            for (i, &(s, r)) in types.iter().enumerate() {
                let g = Gcm::new(catalog::finite(s, r).unwrap()).unwrap();
                assert_eq!(g.classify(), CartanType::Finite(format!("{s}{r}")));
                for &(s2, r2) in &types[i + 1..] {
                    assert!(g.isomorphism_to(&catalog::finite(s2, r2).unwrap()).is_none());
                }
            }
        }
    }

    #[test]
    fn catalog_affine_entries_are_affine_and_distinct() {
        for n in 2..=9 {
            let types = catalog::affine_types(n);
            for (i, (label, m)) in types.iter().enumerate() {
                let g = Gcm::new(m.clone()).unwrap();
                assert_eq!(g.corank(), 1, "{label}");
                assert_eq!(g.classify(), CartanType::Affine(label.clone()), "{label}");
                for (l2, m2) in &types[i + 1..] {
                    assert!(g.isomorphism_to(m2).is_none(), "{label} ~ {l2}");
                }
            }
        }
    }

    #[test]
    fn classify_is_permutation_invariant() {
        let g = Gcm::from_label("E6^(2)").unwrap();
        let p = [3usize, 0, 4, 1, 2];
        let m: Vec<Vec<i64>> = (0..5).map(|i| (0..5).map(|j| g.a(p[i], p[j])).collect()).collect();
        assert_eq!(Gcm::new(m).unwrap().classify(), g.classify());
    }

    #[test]
    fn root_counts() {
        // brute-force closure under simple reflections as the oracle
        for (label, count) in [("A2", 6), ("G2", 12), ("B3", 18), ("C3", 18), ("D4", 24), ("F4", 48), ("E6", 72)] {
            let g = Gcm::from_label(label).unwrap();
            let pos = g.positive_roots().unwrap();
            assert_eq!(2 * pos.len(), count, "{label}");
            let mut closure: BTreeSet<Vec<i64>> = (0..g.n()).map(|i| unit(g.n(), i)).collect();
            loop {
                let mut next = closure.clone();
                for beta in &closure {
                    for i in 0..g.n() {
                        let mut r = beta.clone();
                        r[i] -= g.pairing(beta, i);
                        next.insert(r);
                    }
                }
                if next.len() == closure.len() {
                    break;
                }
                closure = next;
            }
            assert_eq!(closure.len(), count, "{label}");
        }
    }

    #[test]
    fn automorphism_groups() {
        assert_eq!(Gcm::from_label("A2").unwrap().automorphisms().len(), 2);
        assert_eq!(Gcm::from_label("D4").unwrap().automorphisms().len(), 6);
        assert_eq!(Gcm::from_label("G2").unwrap().automorphisms().len(), 1);
        assert_eq!(Gcm::from_label("E8").unwrap().automorphisms().len(), 1);
        assert_eq!(Gcm::from_label("A1^(1)").unwrap().automorphisms().len(), 2);
        assert_eq!(Gcm::from_label("A3^(1)").unwrap().automorphisms().len(), 8);
    }

    #[test]
    fn realization_examples() {
        let r = Gcm::from_label("A2").unwrap().realization();
        assert_eq!((r.h_dim, r.h_dprime_basis.len(), r.center_basis.len()), (2, 0, 0));
        let g = Gcm::from_label("A1^(1)").unwrap();
        let r = g.realization();
        assert_eq!((r.h_dim, r.h_dprime_basis.len(), r.center_basis.len()), (3, 1, 1));
        assert_eq!(r.center_basis[0], vec![1, 1, 0]);
        let r = Gcm::from_label("D4").unwrap().realization();
        assert_eq!((r.h_dim, r.center_basis.len()), (4, 0));
    }

    #[test]
    fn realization_recovers_matrix() {
        for label in ["A3", "G2", "A1^(1)", "C2^(1)", "A4^(2)", "D4^(3)", "E6^(1)"] {
            let g = Gcm::from_label(label).unwrap();
            let r = g.realization();
            for i in 0..g.n() {
                for j in 0..g.n() {
                    let h: Vec<Rat> = r.simple_coroots[i].iter().map(|&x| rat(x)).collect();
                    assert_eq!(r.eval_root(j, &h), rat(g.a(i, j)), "{label}");
                }
            }
            let rows: Vec<Vec<Rat>> = r.simple_roots.iter().map(|v| v.iter().map(|&x| rat(x)).collect()).collect();
            assert_eq!(linalg::rank(&rows), g.n());
            for c in &r.center_basis {
                let h: Vec<Rat> = c.iter().map(|&x| rat(x)).collect();
                assert!((0..g.n()).all(|j| r.eval_root(j, &h).is_zero()));
            }
            // the d-functionals are constant on diagram orbits
            let f = r.dprime_values();
            for p in g.automorphisms() {
                for j in 0..g.n() {
                    assert_eq!(f[p[j]], f[j], "{label}");
                }
            }
        }
    }

    #[test]
    fn untwisted_matches_known() {
        let g = Gcm::from_label("A2^(1)").unwrap();
        assert_eq!(g.entries(), &[vec![2, -1, -1], vec![-1, 2, -1], vec![-1, -1, 2]]);
        let g = Gcm::from_label("G2^(1)").unwrap();
        assert_eq!(g.classify(), CartanType::Affine("G2^(1)".into()));
    }
}
