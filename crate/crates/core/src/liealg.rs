//! Kac-Moody algebras as explicit structure tables.
//!
//! Finite type is built in a Chevalley basis: positive root vectors are
//! defined by `e_ξ = [e_j, e_γ] / (p + 1)` with `j` the smallest node such that
//! `ξ - α_j` is a root, negative ones by `e_{-ξ} = -ω(e_ξ)`. All structure
//! constants are integers.
//!
//! Untwisted affine type is modelled as `ġ ⊗ k[z, z⁻¹] ⊕ kK ⊕ kd` with
//! z-degrees truncated to `[-D, D]`; `e_0 = f_θ ⊗ z`, `f_0 = e_θ ⊗ z⁻¹`,
//! `α_0∨ = K - θ∨`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gcm::{catalog, height, CartanType, Gcm, Realization};
use crate::linalg::{self, Echelon, SparseRow};
use crate::scalars::{format_rat, rat, CycNum, Rat};

pub const DEFAULT_WINDOW: i64 = 8;

/// A sparse vector over the basis of a [`LieAlgebra`]. Zero coordinates are
/// never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Element {
    coords: BTreeMap<usize, CycNum>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn basis(i: usize) -> Self {
        let mut coords = BTreeMap::new();
        coords.insert(i, CycNum::one());
        Element { coords }
    }

    pub fn term(i: usize, c: CycNum) -> Self {
        let mut e = Element::zero();
        e.add_term(i, &c);
        e
    }

    pub fn from_terms<I: IntoIterator<Item = (usize, CycNum)>>(terms: I) -> Self {
        let mut e = Element::zero();
        for (i, c) in terms {
            e.add_term(i, &c);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> CycNum {
        self.coords.get(&i).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&usize, &CycNum)> {
        self.coords.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coords.keys().copied()
    }

    pub fn add_term(&mut self, i: usize, c: &CycNum) {
        if c.is_zero() {
            return;
        }
        match self.coords.get_mut(&i) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.coords.remove(&i);
                }
            }
            None => {
                self.coords.insert(i, c.clone());
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Element, c: &CycNum) {
        if c.is_zero() {
            return;
        }
        for (i, v) in &other.coords {
            self.add_term(*i, &(v * c));
        }
    }

    pub fn scale(&self, c: &CycNum) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        Element { coords: self.coords.iter().map(|(i, v)| (*i, v * c)).collect() }
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut e = self.clone();
        e.add_scaled(other, &CycNum::one());
        e
    }

    pub fn sub(&self, other: &Element) -> Element {
        let mut e = self.clone();
        e.add_scaled(other, &CycNum::from_int(-1));
        e
    }

    pub fn neg(&self) -> Element {
        self.scale(&CycNum::from_int(-1))
    }

    pub fn to_sparse(&self) -> SparseRow<CycNum> {
        self.coords.clone()
    }

    pub fn from_sparse(row: SparseRow<CycNum>) -> Element {
        Element::from_terms(row)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisVec {
    pub symbol: String,
    /// Coordinates of the root in the simple roots of the algebra's GCM.
    pub root: Vec<i64>,
    /// z-degree in the affine model; zero in finite type.
    pub degree: i64,
    pub cartan: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraKind {
    Finite,
    AffineTruncated { window: i64 },
}

/// How a basis vector is obtained from generators, so automorphisms can be
/// extended from their values on `e_i, f_i, h`.
#[derive(Clone, Debug)]
pub enum Recipe {
    Cartan,
    Generator,
    /// `scale · [e_node or f_node, arg]`
    Bracket { node: usize, raising: bool, arg: usize, scale: Rat },
}

#[derive(Clone, Debug)]
struct AffineModel {
    fin: Arc<LieAlgebra>,
    window: i64,
    fdim: usize,
    /// normalized invariant form on the finite algebra, `(θ|θ) = 2`
    fin_form: Vec<i64>,
}

#[derive(Clone, Debug)]
enum Model {
    Finite { table: Vec<Vec<(usize, i64)>> },
    Affine(AffineModel),
}

#[derive(Clone, Debug)]
pub struct LieAlgebra {
    gcm: Gcm,
    cartan_type: CartanType,
    real: Realization,
    basis: Vec<BasisVec>,
    symbols: HashMap<String, usize>,
    roots: HashMap<Vec<i64>, Vec<usize>>,
    gens: Vec<(usize, usize)>,
    cartan0: Vec<usize>,
    /// abstract `h` basis vector -> coordinates on `cartan0`
    h_to_model: Vec<Vec<Rat>>,
    /// `cartan0` vector -> abstract `h` coordinates
    model_to_h: Vec<Vec<Rat>>,
    /// `alpha_on_cartan[u][k] = α_u(cartan0[k])`
    alpha_on_cartan: Vec<Vec<Rat>>,
    mirror: Vec<usize>,
    recipes: Vec<Recipe>,
    order: Vec<usize>,
    model: Model,
}

fn root_symbol(prefix: &str, root: &[i64]) -> String {
    let coords: Vec<String> = root.iter().map(|x| x.abs().to_string()).collect();
    format!("{prefix}[{}]", coords.join(","))
}

struct FiniteBuilder<'a> {
    g: &'a Gcm,
    pos: Vec<Vec<i64>>,
    pos_index: HashMap<Vec<i64>, usize>,
    a_tab: Vec<Vec<i64>>,
    b_tab: Vec<Vec<i64>>,
    /// for composite positive roots: (j, index of γ, p + 1)
    split: Vec<Option<(usize, usize, i64)>>,
    memo: HashMap<(usize, usize), BTreeMap<usize, i64>>,
}

impl<'a> FiniteBuilder<'a> {
    fn n(&self) -> usize {
        self.g.n()
    }

    fn npos(&self) -> usize {
        self.pos.len()
    }

    fn dim(&self) -> usize {
        2 * self.npos() + self.n()
    }

    fn lookup(&self, r: &[i64]) -> Option<usize> {
        self.pos_index.get(r).copied()
    }

    fn shifted(&self, r: &[i64], i: usize, by: i64) -> Vec<i64> {
        let mut v = r.to_vec();
        v[i] += by;
        v
    }

    fn new(g: &'a Gcm) -> Result<Self> {
        let pos = g.positive_roots()?;
        let pos_index = pos.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
        let n = g.n();
        let np = pos.len();
        let mut fb = FiniteBuilder {
            g,
            pos,
            pos_index,
            a_tab: vec![vec![0; np]; n],
            b_tab: vec![vec![0; np]; n],
            split: vec![None; np],
            memo: HashMap::new(),
        };
        fb.structure_tables();
        Ok(fb)
    }

    fn structure_tables(&mut self) {
        let n = self.n();
        let maxh = self.pos.iter().map(|r| height(r)).max().unwrap_or(1);
        for h in 2..=maxh {
            let level: Vec<usize> = (0..self.npos()).filter(|&k| height(&self.pos[k]) == h).collect();
            for &xi in &level {
                let xi_r = self.pos[xi].clone();
                let j = (0..n).find(|&u| self.lookup(&self.shifted(&xi_r, u, -1)).is_some()).expect("composite root");
                let gamma_r = self.shifted(&xi_r, j, -1);
                let gamma = self.lookup(&gamma_r).expect("root");
                let mut p = 0;
                while self.lookup(&self.shifted(&gamma_r, j, -(p + 1))).is_some() {
                    p += 1;
                }
                self.split[xi] = Some((j, gamma, p + 1));
                for i in 0..n {
                    if self.lookup(&self.shifted(&xi_r, i, -1)).is_none() {
                        continue;
                    }
                    let mut val = 0;
                    if i == j {
                        val -= self.g.pairing(&gamma_r, j);
                    }
                    if gamma_r == crate::gcm::unit(n, i) {
                        val += self.g.a(i, j);
                    } else if let Some(low) = self.lookup(&self.shifted(&gamma_r, i, -1)) {
                        val += self.b_tab[i][gamma] * self.a_tab[j][low];
                    }
                    assert_eq!(val % (p + 1), 0, "non-integral structure constant");
                    self.b_tab[i][xi] = val / (p + 1);
                }
            }
            for eta in (0..self.npos()).filter(|&k| height(&self.pos[k]) == h - 1) {
                let eta_r = self.pos[eta].clone();
                for j in 0..n {
                    let Some(xi) = self.lookup(&self.shifted(&eta_r, j, 1)) else { continue };
                    let mut found = None;
                    for i in 0..n {
                        if self.b_tab[i][xi] == 0 {
                            continue;
                        }
                        let mut f = 0;
                        if i == j {
                            f -= self.g.pairing(&eta_r, j);
                        }
                        if eta_r == crate::gcm::unit(n, i) {
                            f += self.g.a(i, j);
                        } else if let Some(low) = self.lookup(&self.shifted(&eta_r, i, -1)) {
                            f += self.b_tab[i][eta] * self.a_tab[j][low];
                        }
                        assert_eq!(f % self.b_tab[i][xi], 0, "non-integral structure constant");
                        let a = f / self.b_tab[i][xi];
                        if let Some(prev) = found {
                            assert_eq!(prev, a, "inconsistent structure constants");
                        }
                        found = Some(a);
                    }
                    self.a_tab[j][eta] = found.expect("root of height >= 2 has a nonzero f-image");
                }
            }
        }
    }

    // index helpers: positive k -> k, negative k -> np + k, cartan i -> 2np + i
    fn neg(&self, k: usize) -> usize {
        self.npos() + k
    }

    fn cartan(&self, i: usize) -> usize {
        2 * self.npos() + i
    }

    fn root_of(&self, b: usize) -> Vec<i64> {
        let np = self.npos();
        if b < np {
            self.pos[b].clone()
        } else if b < 2 * np {
            self.pos[b - np].iter().map(|x| -x).collect()
        } else {
            vec![0; self.n()]
        }
    }

    /// `[e_u, b]` (raising) or `[f_u, b]`.
    fn ad_gen(&self, u: usize, raising: bool, b: usize) -> Vec<(usize, i64)> {
        let n = self.n();
        let np = self.npos();
        let simple = crate::gcm::unit(n, u);
        if b >= 2 * np {
            let i = b - 2 * np;
            let c = self.g.a(i, u);
            return if raising { vec![(u, -c)] } else { vec![(self.neg(u), c)] };
        }
        let positive = b < np;
        let k = if positive { b } else { b - np };
        let r = &self.pos[k];
        match (raising, positive) {
            (true, true) => match self.lookup(&self.shifted(r, u, 1)) {
                Some(up) => vec![(up, self.a_tab[u][k])],
                None => vec![],
            },
            (true, false) => {
                if *r == simple {
                    vec![(self.cartan(u), 1)]
                } else {
                    match self.lookup(&self.shifted(r, u, -1)) {
                        Some(low) => vec![(self.neg(low), -self.b_tab[u][k])],
                        None => vec![],
                    }
                }
            }
            (false, true) => {
                if *r == simple {
                    vec![(self.cartan(u), -1)]
                } else {
                    match self.lookup(&self.shifted(r, u, -1)) {
                        Some(low) => vec![(low, self.b_tab[u][k])],
                        None => vec![],
                    }
                }
            }
            (false, false) => match self.lookup(&self.shifted(r, u, 1)) {
                Some(up) => vec![(self.neg(up), -self.a_tab[u][k])],
                None => vec![],
            },
        }
    }

    fn ad_gen_elem(&self, u: usize, raising: bool, x: &BTreeMap<usize, i64>) -> BTreeMap<usize, i64> {
        let mut out = BTreeMap::new();
        for (&b, &c) in x {
            for (t, v) in self.ad_gen(u, raising, b) {
                *out.entry(t).or_insert(0) += c * v;
            }
        }
        out.retain(|_, v| *v != 0);
        out
    }

    /// Generator presentation of basis vector `b`: `None` for Cartan
    /// elements, `Some((u, raising, arg, denom_sign))` meaning
    /// `b = sign/denom · [gen, arg]`, or the generator itself.
    fn split_of(&self, b: usize) -> Option<(usize, bool, Option<(usize, i64)>)> {
        let np = self.npos();
        if b >= 2 * np {
            return None;
        }
        let positive = b < np;
        let k = if positive { b } else { b - np };
        match self.split[k] {
            None => {
                let u = self.pos[k].iter().position(|&x| x == 1).expect("simple root");
                Some((u, positive, None))
            }
            Some((j, gamma, q)) => {
                if positive {
                    Some((j, true, Some((gamma, q))))
                } else {
                    Some((j, false, Some((self.neg(gamma), -q))))
                }
            }
        }
    }

    fn br(&mut self, a: usize, b: usize) -> BTreeMap<usize, i64> {
        if let Some(v) = self.memo.get(&(a, b)) {
            return v.clone();
        }
        let np = self.npos();
        let result = if a == b {
            BTreeMap::new()
        } else if b >= 2 * np {
            let i = b - 2 * np;
            let c = self.g.pairing(&self.root_of(a), i);
            if c == 0 { BTreeMap::new() } else { BTreeMap::from([(a, -c)]) }
        } else {
            let (u, raising, rest) = self.split_of(b).expect("root vector");
            let ad_a = {
                let single = BTreeMap::from([(a, 1i64)]);
                let mut m = self.ad_gen_elem(u, raising, &single);
                for v in m.values_mut() {
                    *v = -*v;
                }
                m
            };
            match rest {
                None => ad_a,
                Some((arg, q)) => {
                    // [a, [g, v]] = [[a, g], v] + [g, [a, v]]
                    let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
                    for (t, c) in ad_a {
                        for (s, v) in self.br(t, arg) {
                            *acc.entry(s).or_insert(0) += c * v;
                        }
                    }
                    let inner = self.br(a, arg);
                    for (s, v) in self.ad_gen_elem(u, raising, &inner) {
                        *acc.entry(s).or_insert(0) += v;
                    }
                    acc.retain(|_, v| *v != 0);
                    for v in acc.values_mut() {
                        assert_eq!(*v % q, 0, "non-integral bracket");
                        *v /= q;
                    }
                    acc
                }
            }
        };
        self.memo.insert((a, b), result.clone());
        result
    }
}

impl LieAlgebra {
    /// The finite-dimensional Kac-Moody algebra of a finite-type GCM.
    pub fn build_finite(g: &Gcm) -> Result<LieAlgebra> {
        let ty = g.classify();
        if !ty.is_finite() {
            return Err(Error::WrongType(format!("expected finite type, got {}", ty.kind())));
        }
        let mut fb = FiniteBuilder::new(g)?;
        let n = g.n();
        let np = fb.npos();
        let dim = fb.dim();
        let mut basis = Vec::with_capacity(dim);
        for r in &fb.pos {
            basis.push(BasisVec { symbol: root_symbol("e", r), root: r.clone(), degree: 0, cartan: false });
        }
        for r in &fb.pos {
            basis.push(BasisVec {
                symbol: root_symbol("f", r),
                root: r.iter().map(|x| -x).collect(),
                degree: 0,
                cartan: false,
            });
        }
        for i in 0..n {
            basis.push(BasisVec { symbol: format!("h[{}]", i + 1), root: vec![0; n], degree: 0, cartan: true });
        }
        let mut table = vec![Vec::new(); dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                table[a * dim + b] = fb.br(a, b).into_iter().collect();
            }
        }
        let gens = (0..n).map(|u| (u, np + u)).collect();
        let cartan0: Vec<usize> = (0..n).map(|i| 2 * np + i).collect();
        let ident: Vec<Vec<Rat>> = linalg::identity(n);
        let mirror = (0..dim).map(|b| if b < np { b + np } else if b < 2 * np { b - np } else { b }).collect();
        let mut alg = LieAlgebra::assemble(
            g.clone(),
            CartanType::Finite(g.classify().label().unwrap_or_default().to_string()),
            basis,
            gens,
            cartan0,
            ident.clone(),
            ident,
            mirror,
            Model::Finite { table },
        )?;
        alg.build_recipes()?;
        Ok(alg)
    }

    /// The untwisted affine algebra of an affine GCM, truncated to z-degrees
    /// in `[-window, window]`.
    pub fn build_affine(g: &Gcm, window: i64) -> Result<LieAlgebra> {
        let cls = g.classify_detailed();
        let label = match &cls.ty {
            CartanType::Affine(l) => l.clone(),
            other => return Err(Error::WrongType(format!("expected affine type, got {}", other.kind()))),
        };
        if !label.ends_with("^(1)") {
            return Err(Error::Unsupported(format!("loop model of twisted affine type {label}")));
        }
        if window < 1 {
            return Err(Error::schema("/window", "window must be at least 1"));
        }
        let perm = cls.catalog_perm.expect("affine label has a node matching");
        let n = g.n();
        let node0 = perm.iter().position(|&c| c == 0).expect("affine node");
        let fin_nodes: Vec<usize> = (0..n).filter(|&u| u != node0).collect();
        let fin_gcm = Gcm::new(g.principal(&fin_nodes))?;
        let fin = Arc::new(LieAlgebra::build_finite(&fin_gcm)?);
        let l = fin_nodes.len();
        let fdim = fin.dim();
        let (theta, theta_co) = catalog::highest_root(&fin_gcm);
        let theta_pos = fin.root_space(&theta)[0];
        let theta_neg = fin.root_space(&theta.iter().map(|x| -x).collect::<Vec<_>>())[0];

        // normalized invariant form of the finite algebra
        let ff = fin.invariant_form();
        let norm = ff.value(theta_pos, theta_neg).recip();
        let mut fin_form = vec![0i64; fdim * fdim];
        for ((i, j), v) in ff.entries() {
            let w = v * &norm;
            assert!(w.is_integer(), "normalized form is integral on a Chevalley basis");
            fin_form[i * fdim + j] = i64::try_from(w.to_integer()).expect("small form value");
        }

        let w = window;
        let enc = |deg: i64, local: usize| ((deg + w) as usize) * fdim + local;
        let k_idx = (2 * w as usize + 1) * fdim;
        let d_idx = k_idx + 1;
        let dim = d_idx + 1;
        let delta: Vec<i64> = {
            let mut v = vec![0i64; n];
            v[node0] = 1;
            for (t, &u) in fin_nodes.iter().enumerate() {
                v[u] = theta[t];
            }
            v
        };
        let mut basis = Vec::with_capacity(dim);
        for deg in -w..=w {
            for local in 0..fdim {
                let fb = &fin.basis[local];
                let mut root: Vec<i64> = delta.iter().map(|x| x * deg).collect();
                for (t, &u) in fin_nodes.iter().enumerate() {
                    root[u] += fb.root[t];
                }
                basis.push(BasisVec {
                    symbol: format!("{}@{deg}", fb.symbol),
                    root,
                    degree: deg,
                    cartan: fb.cartan,
                });
            }
        }
        basis.push(BasisVec { symbol: "c".into(), root: vec![0; n], degree: 0, cartan: true });
        basis.push(BasisVec { symbol: "d".into(), root: vec![0; n], degree: 0, cartan: true });

        let mut gens = vec![(0, 0); n];
        for (t, &u) in fin_nodes.iter().enumerate() {
            gens[u] = (enc(0, fin.gens[t].0), enc(0, fin.gens[t].1));
        }
        gens[node0] = (enc(1, theta_neg), enc(-1, theta_pos));

        let mut cartan0: Vec<usize> = fin.cartan0.iter().map(|&c| enc(0, c)).collect();
        cartan0.push(k_idx);
        cartan0.push(d_idx);
        let nc = cartan0.len();
        let real = g.realization();
        let fvals = real.dprime_values();
        let mut h_to_model = vec![vec![rat(0); nc]; real.h_dim];
        for (t, &u) in fin_nodes.iter().enumerate() {
            h_to_model[u][t] = rat(1);
        }
        for t in 0..l {
            h_to_model[node0][t] = -theta_co[t].clone();
        }
        h_to_model[node0][l] = rat(1);
        for (col, row) in h_to_model.iter_mut().enumerate().skip(n) {
            let dl = col - n;
            // finite part y with α_t(y) = F_{u(t)}, then d-coefficient x
            let at: Vec<Vec<Rat>> =
                (0..l).map(|t| (0..l).map(|s| rat(fin_gcm.a(s, t))).collect()).collect();
            let rhs: Vec<Rat> = fin_nodes.iter().map(|&u| rat(fvals[u][dl])).collect();
            let y = linalg::solve(&at, &rhs).expect("finite Cartan matrix is invertible");
            let theta_y: Rat = (0..l).map(|s| &y[s] * rat(fin_gcm.pairing(&theta, s))).sum();
            for t in 0..l {
                row[t] = y[t].clone();
            }
            row[l + 1] = rat(fvals[node0][dl]) + theta_y;
        }
        let model_to_h = linalg::inverse(&h_to_model).expect("Cartan change of basis is invertible");
        let mirror = (0..dim)
            .map(|b| {
                if b >= k_idx {
                    b
                } else {
                    let deg = (b / fdim) as i64 - w;
                    enc(-deg, fin.mirror[b % fdim])
                }
            })
            .collect();
        let model = Model::Affine(AffineModel { fin: fin.clone(), window: w, fdim, fin_form });
        let mut alg = LieAlgebra::assemble(
            g.clone(),
            cls.ty.clone(),
            basis,
            gens,
            cartan0,
            h_to_model,
            model_to_h,
            mirror,
            model,
        )?;
        alg.build_recipes()?;
        Ok(alg)
    }

    /// Build the algebra of any finite or untwisted affine GCM (affine with
    /// the given window).
    pub fn build(g: &Gcm, window: i64) -> Result<LieAlgebra> {
        match g.classify() {
            CartanType::Finite(_) => LieAlgebra::build_finite(g),
            CartanType::Affine(_) => LieAlgebra::build_affine(g, window),
            CartanType::Indefinite => Err(Error::WrongType("indefinite type is not constructed".into())),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        gcm: Gcm,
        cartan_type: CartanType,
        basis: Vec<BasisVec>,
        gens: Vec<(usize, usize)>,
        cartan0: Vec<usize>,
        h_to_model: Vec<Vec<Rat>>,
        model_to_h: Vec<Vec<Rat>>,
        mirror: Vec<usize>,
        model: Model,
    ) -> Result<LieAlgebra> {
        let real = gcm.realization();
        let symbols = basis.iter().enumerate().map(|(i, b)| (b.symbol.clone(), i)).collect();
        let mut roots: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, b) in basis.iter().enumerate() {
            roots.entry(b.root.clone()).or_default().push(i);
        }
        let mut alg = LieAlgebra {
            gcm,
            cartan_type,
            real,
            basis,
            symbols,
            roots,
            gens,
            cartan0,
            h_to_model,
            model_to_h,
            alpha_on_cartan: Vec::new(),
            mirror,
            recipes: Vec::new(),
            order: Vec::new(),
            model,
        };
        let n = alg.gcm.n();
        let mut aoc = vec![Vec::new(); n];
        for (u, row) in aoc.iter_mut().enumerate() {
            let e = alg.gens[u].0;
            for &c in &alg.cartan0 {
                let br = alg.bracket_basis(c, e)?;
                let v = br.get(e);
                row.push(v.as_rat().cloned().expect("rational eigenvalue"));
            }
        }
        alg.alpha_on_cartan = aoc;
        Ok(alg)
    }

    fn build_recipes(&mut self) -> Result<()> {
        let dim = self.dim();
        let n = self.gcm.n();
        let mut recipes = vec![Recipe::Cartan; dim];
        let is_gen_e: HashMap<usize, usize> = self.gens.iter().enumerate().map(|(u, g)| (g.0, u)).collect();
        let is_gen_f: HashMap<usize, usize> = self.gens.iter().enumerate().map(|(u, g)| (g.1, u)).collect();
        let mut positive: Vec<usize> = (0..dim).filter(|&b| self.basis[b].root.iter().any(|&x| x > 0)).collect();
        positive.sort_by_key(|&b| (height(&self.basis[b].root), b));
        for &b in &positive {
            if is_gen_e.contains_key(&b) {
                recipes[b] = Recipe::Generator;
                continue;
            }
            let root = &self.basis[b].root;
            let mut found = None;
            'search: for u in 0..n {
                let mut low = root.clone();
                low[u] -= 1;
                let Some(cands) = self.roots.get(&low) else { continue };
                for &v in cands {
                    let br = match self.bracket_basis(self.gens[u].0, v) {
                        Ok(x) => x,
                        Err(_) => continue,
                    };
                    if br.len() == 1 {
                        let c = br.get(b);
                        if !c.is_zero() {
                            let c = c.as_rat().cloned().expect("rational structure constant");
                            found = Some(Recipe::Bracket { node: u, raising: true, arg: v, scale: c.recip() });
                            break 'search;
                        }
                    }
                }
            }
            recipes[b] = found.ok_or_else(|| Error::Verification(format!("no recipe for {}", self.basis[b].symbol)))?;
        }
        for b in 0..dim {
            if self.basis[b].root.iter().any(|&x| x < 0) {
                if is_gen_f.contains_key(&b) {
                    recipes[b] = Recipe::Generator;
                    continue;
                }
                match recipes[self.mirror[b]].clone() {
                    Recipe::Bracket { node, arg, scale, .. } => {
                        recipes[b] = Recipe::Bracket { node, raising: false, arg: self.mirror[arg], scale: -scale };
                    }
                    other => {
                        return Err(Error::Verification(format!(
                            "mirror of {} has recipe {:?}",
                            self.basis[b].symbol, other
                        )))
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by_key(|&b| {
            let r = &self.basis[b].root;
            let rank = match recipes[b] {
                Recipe::Cartan => 0,
                Recipe::Generator => 1,
                Recipe::Bracket { .. } => 2,
            };
            (rank, height(r).abs(), b)
        });
        self.recipes = recipes;
        self.order = order;
        Ok(())
    }

    pub fn gcm(&self) -> &Gcm {
        &self.gcm
    }

    pub fn cartan_type(&self) -> &CartanType {
        &self.cartan_type
    }

    pub fn realization(&self) -> &Realization {
        &self.real
    }

    pub fn kind(&self) -> AlgebraKind {
        match &self.model {
            Model::Finite { .. } => AlgebraKind::Finite,
            Model::Affine(a) => AlgebraKind::AffineTruncated { window: a.window },
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.model, Model::Finite { .. })
    }

    pub fn window(&self) -> Option<i64> {
        match &self.model {
            Model::Finite { .. } => None,
            Model::Affine(a) => Some(a.window),
        }
    }

    /// The underlying finite algebra of an affine model.
    pub fn finite_part(&self) -> Option<&Arc<LieAlgebra>> {
        match &self.model {
            Model::Finite { .. } => None,
            Model::Affine(a) => Some(&a.fin),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisVec] {
        &self.basis
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.basis[i].symbol
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.get(symbol).copied()
    }

    pub fn rank(&self) -> usize {
        self.gcm.n()
    }

    pub fn e(&self, u: usize) -> Element {
        Element::basis(self.gens[u].0)
    }

    pub fn f(&self, u: usize) -> Element {
        Element::basis(self.gens[u].1)
    }

    pub fn generator_indices(&self) -> &[(usize, usize)] {
        &self.gens
    }

    /// Degree-zero Cartan basis indices of the model.
    pub fn cartan_indices(&self) -> &[usize] {
        &self.cartan0
    }

    pub fn mirror(&self, b: usize) -> usize {
        self.mirror[b]
    }

    pub fn recipe(&self, b: usize) -> &Recipe {
        &self.recipes[b]
    }

    pub fn recipe_order(&self) -> &[usize] {
        &self.order
    }

    /// Model element for an abstract `h` vector given on the realization
    /// basis `α_1∨, …, α_n∨, d_1, …`.
    pub fn h_element(&self, coords: &[Rat]) -> Element {
        let mut e = Element::zero();
        for (i, x) in coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (k, v) in self.h_to_model[i].iter().enumerate() {
                if !v.is_zero() {
                    e.add_term(self.cartan0[k], &CycNum::from_rat(x * v));
                }
            }
        }
        e
    }

    pub fn coroot(&self, u: usize) -> Element {
        let mut c = vec![rat(0); self.real.h_dim];
        c[u] = rat(1);
        self.h_element(&c)
    }

    /// Abstract `h` coordinates of a degree-zero Cartan element.
    pub fn h_coords(&self, x: &Element) -> Option<Vec<CycNum>> {
        let mut out = vec![CycNum::zero(); self.real.h_dim];
        for (b, c) in x.iter() {
            let k = self.cartan0.iter().position(|x| x == b)?;
            for (i, v) in self.model_to_h[k].iter().enumerate() {
                if !v.is_zero() {
                    out[i] += &c.scale(v);
                }
            }
        }
        Some(out)
    }

    /// `β(h)` for a root in simple-root coordinates and the `k`-th
    /// degree-zero Cartan basis vector.
    pub fn root_value(&self, beta: &[i64], k: usize) -> Rat {
        beta.iter().enumerate().map(|(u, &c)| rat(c) * &self.alpha_on_cartan[u][k]).sum()
    }

    pub fn root_space(&self, root: &[i64]) -> Vec<usize> {
        self.roots.get(root).cloned().unwrap_or_default()
    }

    /// All roots carried by the basis (in the window, for affine models).
    pub fn roots(&self) -> Vec<Vec<i64>> {
        let mut r: Vec<Vec<i64>> = self.roots.keys().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
        r.sort();
        r
    }

    pub fn is_real_root(&self, root: &[i64]) -> bool {
        let space = self.root_space(root);
        space.len() == 1 && !self.basis[space[0]].cartan
    }

    fn check_window(a: &AffineModel, deg: i64) -> Result<()> {
        if deg.abs() > a.window {
            Err(Error::WindowOverflow { degree: deg, window: a.window })
        } else {
            Ok(())
        }
    }

    /// `[b_i, b_j]` as integer combination, through a callback.
    pub fn for_each_bracket(&self, i: usize, j: usize, mut f: impl FnMut(usize, i64)) -> Result<()> {
        match &self.model {
            Model::Finite { table } => {
                for &(k, c) in &table[i * self.dim() + j] {
                    f(k, c);
                }
                Ok(())
            }
            Model::Affine(a) => {
                let fdim = a.fdim;
                let loop_len = (2 * a.window as usize + 1) * fdim;
                let k_idx = loop_len;
                let d_idx = loop_len + 1;
                let decode = |b: usize| ((b / fdim) as i64 - a.window, b % fdim);
                if i == k_idx || j == k_idx || (i == d_idx && j == d_idx) {
                    return Ok(());
                }
                if i == d_idx {
                    let (deg, _) = decode(j);
                    if deg != 0 {
                        f(j, deg);
                    }
                    return Ok(());
                }
                if j == d_idx {
                    let (deg, _) = decode(i);
                    if deg != 0 {
                        f(i, -deg);
                    }
                    return Ok(());
                }
                let (di, x) = decode(i);
                let (dj, y) = decode(j);
                let deg = di + dj;
                let fin_table = match &a.fin.model {
                    Model::Finite { table } => &table[x * fdim + y],
                    Model::Affine(_) => unreachable!("finite part is finite"),
                };
                if !fin_table.is_empty() {
                    Self::check_window(a, deg)?;
                    let base = ((deg + a.window) as usize) * fdim;
                    for &(k, c) in fin_table {
                        f(base + k, c);
                    }
                }
                if deg == 0 && di != 0 {
                    let v = a.fin_form[x * fdim + y];
                    if v != 0 {
                        f(k_idx, di * v);
                    }
                }
                Ok(())
            }
        }
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> Result<Element> {
        let mut e = Element::zero();
        self.for_each_bracket(i, j, |k, c| e.add_term(k, &CycNum::from_int(c)))?;
        Ok(e)
    }

    pub fn bracket(&self, x: &Element, y: &Element) -> Result<Element> {
        let mut acc: BTreeMap<usize, CycNum> = BTreeMap::new();
        for (&i, a) in x.iter() {
            for (&j, b) in y.iter() {
                let ab = a * b;
                let mut err = None;
                self.for_each_bracket(i, j, |k, c| {
                    let t = ab.scale_int(c);
                    let e = acc.entry(k).or_default();
                    *e += &t;
                })
                .unwrap_or_else(|e| err = Some(e));
                if let Some(e) = err {
                    return Err(e);
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Ok(Element { coords: acc })
    }

    /// `ad(x)` restricted to the basis: column `j` is `[x, b_j]`.
    pub fn ad(&self, x: &Element) -> Result<Vec<Element>> {
        (0..self.dim()).map(|j| self.bracket(x, &Element::basis(j))).collect()
    }

    /// Bases of `g′` and of the center `c`.
    pub fn derived_and_center(&self) -> (Vec<usize>, Vec<Element>) {
        let derived = match &self.model {
            Model::Finite { .. } => (0..self.dim()).collect(),
            Model::Affine(_) => (0..self.dim() - 1).collect(),
        };
        let center = self
            .real
            .center_basis
            .iter()
            .map(|c| self.h_element(&c.iter().map(|&x| rat(x)).collect::<Vec<_>>()))
            .collect();
        (derived, center)
    }

    /// Gram matrix of the invariant form on the abstract `h`:
    /// `(α_i∨, h) = ε_i α_i(h)` and `(h″, h″) = 0`.
    pub fn cartan_gram(&self) -> Vec<Vec<Rat>> {
        let n = self.gcm.n();
        let hd = self.real.h_dim;
        let eps = self.gcm.symmetrizer();
        let mut g = vec![vec![rat(0); hd]; hd];
        for i in 0..n {
            for j in 0..hd {
                // α_i(basis_j)
                let v = rat(eps[i]) * rat(self.real.simple_roots[i][j]);
                g[i][j] = v.clone();
                g[j][i] = v;
            }
        }
        for row in g.iter_mut().skip(n) {
            for v in row.iter_mut().skip(n) {
                *v = rat(0);
            }
        }
        g
    }

    /// The invariant symmetric form normalized by `(α_i∨, h) = ε_i α_i(h)`.
    pub fn invariant_form(&self) -> InvariantForm {
        let gram = self.cartan_gram();
        let nc = self.cartan0.len();
        let mut model_gram = vec![vec![rat(0); nc]; nc];
        for k in 0..nc {
            for l in 0..nc {
                let mut s = rat(0);
                for (i, a) in self.model_to_h[k].iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for (j, b) in self.model_to_h[l].iter().enumerate() {
                        if !b.is_zero() {
                            s += a * b * &gram[i][j];
                        }
                    }
                }
                model_gram[k][l] = s;
            }
        }
        let mut entries = BTreeMap::new();
        for k in 0..nc {
            for l in 0..nc {
                if !model_gram[k][l].is_zero() {
                    entries.insert((self.cartan0[k], self.cartan0[l]), model_gram[k][l].clone());
                }
            }
        }
        for b1 in 0..self.dim() {
            let root = &self.basis[b1].root;
            if root.iter().all(|&x| x == 0) {
                continue;
            }
            let neg: Vec<i64> = root.iter().map(|x| -x).collect();
            let k = (0..nc).find(|&k| !self.root_value(root, k).is_zero()).expect("nonzero root is nonzero on h");
            let beta_h = self.root_value(root, k);
            for b2 in self.root_space(&neg) {
                let Ok(br) = self.bracket_basis(b1, b2) else { continue };
                let mut s = rat(0);
                for (c, v) in br.iter() {
                    let idx = self.cartan0.iter().position(|x| x == c).expect("bracket of opposite roots is Cartan");
                    s += v.as_rat().expect("rational") * &model_gram[idx][k];
                }
                let val = s / &beta_h;
                if !val.is_zero() {
                    entries.insert((b1, b2), val);
                }
            }
        }
        InvariantForm { entries }
    }

    /// Centroid of a finite-dimensional algebra (or its derived algebra,
    /// which coincides with it in finite type).
    pub fn centroid_of(&self, _restrict_to_derived: bool) -> Result<Vec<Vec<Vec<Rat>>>> {
        if !self.is_finite() {
            return Err(Error::Unsupported("centroid of a truncated affine model".into()));
        }
        Ok(StructureTable::from_algebra(self).centroid())
    }

    pub fn element_to_json(&self, x: &Element) -> Value {
        let coords: serde_json::Map<String, Value> = x
            .iter()
            .map(|(i, c)| (self.symbol(*i).to_string(), serde_json::to_value(c).expect("serializable")))
            .collect();
        json!({ "coords": coords })
    }

    pub fn element_from_json(&self, v: &Value) -> Result<Element> {
        let coords = v
            .get("coords")
            .and_then(|c| c.as_object())
            .ok_or_else(|| Error::schema("/coords", "expected an object"))?;
        let mut e = Element::zero();
        for (sym, val) in coords {
            let i = self.index_of(sym).ok_or_else(|| Error::schema(format!("/coords/{sym}"), "unknown basis symbol"))?;
            let c: CycNum = serde_json::from_value(val.clone())
                .map_err(|err| Error::schema(format!("/coords/{sym}"), err.to_string()))?;
            e.add_term(i, &c);
        }
        Ok(e)
    }

    pub fn format_element(&self, x: &Element) -> String {
        if x.is_zero() {
            return "0".into();
        }
        x.iter().map(|(i, c)| format!("{}·{}", c, self.symbol(*i))).collect::<Vec<_>>().join(" + ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantForm {
    entries: BTreeMap<(usize, usize), Rat>,
}

impl InvariantForm {
    pub fn value(&self, i: usize, j: usize) -> Rat {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &Rat)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn pair(&self, x: &Element, y: &Element) -> CycNum {
        let mut s = CycNum::zero();
        for (i, a) in x.iter() {
            for (j, b) in y.iter() {
                if let Some(v) = self.entries.get(&(*i, *j)) {
                    s += &(a * b).scale(v);
                }
            }
        }
        s
    }
}

/// Structure constants of a finite-dimensional algebra over `Q`, used for
/// centroid computations (also for decomposable algebras).
#[derive(Clone, Debug)]
pub struct StructureTable {
    dim: usize,
    table: Vec<Vec<(usize, Rat)>>,
}

impl StructureTable {
    pub fn from_algebra(l: &LieAlgebra) -> StructureTable {
        let dim = l.dim();
        let mut table = vec![Vec::new(); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut v = Vec::new();
                l.for_each_bracket(i, j, |k, c| v.push((k, rat(c)))).expect("finite algebra");
                table[i * dim + j] = v;
            }
        }
        StructureTable { dim, table }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn direct_sum(&self, other: &StructureTable) -> StructureTable {
        let dim = self.dim + other.dim;
        let mut table = vec![Vec::new(); dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                table[i * dim + j] = self.table[i * self.dim + j].clone();
            }
        }
        for i in 0..other.dim {
            for j in 0..other.dim {
                table[(i + self.dim) * dim + j + self.dim] =
                    other.table[i * other.dim + j].iter().map(|(k, c)| (k + self.dim, c.clone())).collect();
            }
        }
        StructureTable { dim, table }
    }

    /// Basis of `{χ : χ([x, y]) = [x, χ(y)]}` as matrices (`χ[r][s]` is the
    /// coefficient of `b_r` in `χ(b_s)`).
    pub fn centroid(&self) -> Vec<Vec<Vec<Rat>>> {
        let d = self.dim;
        let var = |r: usize, s: usize| r * d + s;
        let mut ech: Echelon<Rat> = Echelon::new();
        for p in 0..d {
            for q in 0..d {
                // coefficient on b_r: Σ_k c^k_pq χ_rk - Σ_s c^r_ps χ_sq
                let mut rows: BTreeMap<usize, SparseRow<Rat>> = BTreeMap::new();
                for (k, c) in &self.table[p * d + q] {
                    for r in 0..d {
                        let e = rows.entry(r).or_default().entry(var(r, *k)).or_insert_with(Rat::zero);
                        *e += c;
                    }
                }
                for s in 0..d {
                    for (r, c) in &self.table[p * d + s] {
                        let e = rows.entry(*r).or_default().entry(var(s, q)).or_insert_with(Rat::zero);
                        *e -= c;
                    }
                }
                for (_, row) in rows {
                    ech.insert(row);
                }
            }
        }
        ech.nullspace(d * d)
            .into_iter()
            .map(|v| {
                let mut m = vec![vec![rat(0); d]; d];
                for (idx, val) in v {
                    m[idx / d][idx % d] = val;
                }
                m
            })
            .collect()
    }
}

/// Readable rendering of a rational matrix (used in reports).
pub fn format_matrix(m: &[Vec<Rat>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(format_rat).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn alg(label: &str) -> LieAlgebra {
        LieAlgebra::build_finite(&Gcm::from_label(label).unwrap()).unwrap()
    }

    fn jacobi_holds(l: &LieAlgebra, triples: impl Iterator<Item = (usize, usize, usize)>) {
        for (a, b, c) in triples {
            let (x, y, z) = (Element::basis(a), Element::basis(b), Element::basis(c));
            let t1 = l.bracket(&x, &l.bracket(&y, &z).unwrap()).unwrap();
            let t2 = l.bracket(&y, &l.bracket(&z, &x).unwrap()).unwrap();
            let t3 = l.bracket(&z, &l.bracket(&x, &y).unwrap()).unwrap();
            assert!(t1.add(&t2).add(&t3).is_zero(), "Jacobi fails on {a},{b},{c}");
        }
    }

    #[test]
    fn sl2_relations() {
        let l = alg("A1");
        assert_eq!(l.dim(), 3);
        let (e, f, h) = (l.e(0), l.f(0), l.coroot(0));
        assert_eq!(l.bracket(&e, &f).unwrap(), h);
        assert_eq!(l.bracket(&h, &e).unwrap(), e.scale(&CycNum::from_int(2)));
        assert_eq!(l.bracket(&h, &f).unwrap(), f.scale(&CycNum::from_int(-2)));
        assert!(l.bracket(&e, &e).unwrap().is_zero());
    }

    #[test]
    fn dimensions() {
        for (label, dim) in
            [("A2", 8), ("A3", 15), ("B3", 21), ("C3", 21), ("G2", 14), ("D4", 28), ("F4", 52), ("B4", 36), ("C4", 36)]
        {
            assert_eq!(alg(label).dim(), dim, "{label}");
        }
    }

    #[test]
    fn jacobi_exhaustive_small() {
        for label in ["A1", "A2", "B2", "G2", "A3"] {
            let l = alg(label);
            let d = l.dim();
            jacobi_holds(&l, (0..d).flat_map(|a| (a + 1..d).flat_map(move |b| (b + 1..d).map(move |c| (a, b, c)))));
        }
    }

    #[test]
    fn antisymmetry_and_grading() {
        for label in ["B3", "D4", "C3"] {
            let l = alg(label);
            for i in 0..l.dim() {
                for j in 0..l.dim() {
                    let a = l.bracket_basis(i, j).unwrap();
                    let b = l.bracket_basis(j, i).unwrap();
                    assert!(a.add(&b).is_zero());
                    let sum: Vec<i64> = l.basis[i].root.iter().zip(&l.basis[j].root).map(|(x, y)| x + y).collect();
                    for k in a.support() {
                        assert_eq!(l.basis[k].root, sum);
                    }
                }
            }
        }
    }

    #[test]
    fn chevalley_constants() {
        // N_{α,β} = ±(p+1) for positive roots α, β with α+β a root
        for label in ["G2", "B3", "F4"] {
            let g = Gcm::from_label(label).unwrap();
            let l = alg(label);
            let pos = g.positive_roots().unwrap();
            let set: std::collections::HashSet<Vec<i64>> = pos.iter().cloned().collect();
            for (i, a) in pos.iter().enumerate() {
                for (j, b) in pos.iter().enumerate() {
                    let s: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    if !set.contains(&s) {
                        continue;
                    }
                    let mut p = 0;
                    loop {
                        let t: Vec<i64> = b.iter().zip(a).map(|(y, x)| y - (p + 1) * x).collect();
                        let neg: Vec<i64> = t.iter().map(|x| -x).collect();
                        if set.contains(&t) || set.contains(&neg) {
                            p += 1;
                        } else {
                            break;
                        }
                    }
                    let br = l.bracket_basis(i, j).unwrap();
                    let c = br.iter().next().unwrap().1.as_rat().unwrap().clone();
                    assert_eq!(c.abs(), rat(p + 1), "{label}: {a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn serre_relations() {
        for label in ["A2", "B2", "G2", "D4"] {
            let l = alg(label);
            let g = l.gcm().clone();
            for i in 0..g.n() {
                for j in 0..g.n() {
                    if i == j {
                        continue;
                    }
                    let mut x = l.e(j);
                    let mut y = l.f(j);
                    for _ in 0..(1 - g.a(i, j)) {
                        x = l.bracket(&l.e(i), &x).unwrap();
                        y = l.bracket(&l.f(i), &y).unwrap();
                    }
                    assert!(x.is_zero() && y.is_zero(), "{label} {i} {j}");
                }
            }
        }
        let l = alg("A2");
        let e1 = l.e(0);
        let x = l.bracket(&e1, &l.bracket(&e1, &l.bracket(&e1, &l.e(1)).unwrap()).unwrap()).unwrap();
        assert!(x.is_zero());
    }

    #[test]
    fn form_values_and_invariance() {
        let l = alg("A1");
        let form = l.invariant_form();
        let h = l.coroot(0);
        assert_eq!(form.pair(&h, &h), CycNum::from_int(2));
        assert_eq!(form.pair(&l.e(0), &l.f(0)), CycNum::from_int(1));
        assert!(form.pair(&l.e(0), &l.e(0)).is_zero());
        for label in ["A2", "B2", "G2"] {
            let l = alg(label);
            let form = l.invariant_form();
            let d = l.dim();
            for a in 0..d {
                for b in 0..d {
                    assert_eq!(form.value(a, b), form.value(b, a));
                    for c in 0..d {
                        let (x, y, z) = (Element::basis(a), Element::basis(b), Element::basis(c));
                        let lhs = form.pair(&l.bracket(&x, &y).unwrap(), &z);
                        let rhs = form.pair(&x, &l.bracket(&y, &z).unwrap());
                        assert_eq!(lhs, rhs, "{label} {a} {b} {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn centroid_examples() {
        assert_eq!(alg("A1").centroid_of(true).unwrap().len(), 1);
        assert_eq!(alg("A2").centroid_of(true).unwrap().len(), 1);
        let t = StructureTable::from_algebra(&alg("A1"));
        assert_eq!(t.direct_sum(&t).centroid().len(), 2);
    }

    #[test]
    fn ad_nilpotent_on_generators() {
        let l = alg("B3");
        for u in 0..3 {
            for b in 0..l.dim() {
                let mut x = Element::basis(b);
                for _ in 0..5 {
                    x = l.bracket(&l.e(u), &x).unwrap();
                }
                assert!(x.is_zero());
            }
        }
    }

    #[test]
    fn affine_dimensions_and_window() {
        let g = Gcm::from_label("A1^(1)").unwrap();
        let l = LieAlgebra::build_affine(&g, 2).unwrap();
        let deg0 = l.basis().iter().filter(|b| b.degree == 0).count();
        assert_eq!(deg0, 5);
        for k in [-2, -1, 1, 2] {
            assert_eq!(l.basis().iter().filter(|b| b.degree == k).count(), 3);
        }
        let top = l.index_of("e[1]@2").unwrap();
        let one = l.index_of("e[1]@1").unwrap();
        let h1 = l.index_of("h[1]@1").unwrap();
        assert!(l.bracket_basis(top, one).unwrap().is_zero());
        assert!(matches!(l.bracket_basis(top, h1), Err(Error::WindowOverflow { .. })));

        let l = LieAlgebra::build_affine(&Gcm::from_label("A2^(1)").unwrap(), 1).unwrap();
        assert_eq!(l.basis().iter().filter(|b| b.degree == 0).count(), 10);
        assert!(matches!(
            LieAlgebra::build_affine(&Gcm::from_label("A2^(2)").unwrap(), 2),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(LieAlgebra::build_affine(&Gcm::from_label("A2").unwrap(), 2), Err(Error::WrongType(_))));
    }

    #[test]
    fn affine_generators_realize_the_matrix() {
        for label in ["A1^(1)", "A2^(1)", "C2^(1)", "G2^(1)"] {
            let g = Gcm::from_label(label).unwrap();
            let l = LieAlgebra::build_affine(&g, 3).unwrap();
            for i in 0..g.n() {
                assert_eq!(l.bracket(&l.e(i), &l.f(i)).unwrap(), l.coroot(i), "{label}");
                for j in 0..g.n() {
                    let hx = l.bracket(&l.coroot(i), &l.e(j)).unwrap();
                    assert_eq!(hx, l.e(j).scale(&CycNum::from_int(g.a(i, j))), "{label} {i} {j}");
                    if i != j {
                        assert!(l.bracket(&l.e(i), &l.f(j)).unwrap().is_zero());
                        let mut x = l.e(j);
                        for _ in 0..(1 - g.a(i, j)) {
                            x = l.bracket(&l.e(i), &x).unwrap();
                        }
                        assert!(x.is_zero(), "Serre {label} {i} {j}");
                    }
                }
            }
            // the d-part of h realizes the chosen functionals
            let real = l.realization();
            for dl in 0..real.corank() {
                let mut c = vec![rat(0); real.h_dim];
                c[g.n() + dl] = rat(1);
                let d = l.h_element(&c);
                for j in 0..g.n() {
                    let v = l.bracket(&d, &l.e(j)).unwrap();
                    assert_eq!(v, l.e(j).scale(&CycNum::from_int(real.simple_roots[j][g.n() + dl])));
                }
            }
            let (_, center) = l.derived_and_center();
            assert_eq!(center.len(), 1);
            for b in 0..l.dim() {
                assert!(l.bracket(&center[0], &Element::basis(b)).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn affine_jacobi_and_form_in_window() {
        let g = Gcm::from_label("A1^(1)").unwrap();
        let l = LieAlgebra::build_affine(&g, 3).unwrap();
        let form = l.invariant_form();
        let small: Vec<usize> = (0..l.dim()).filter(|&b| l.basis()[b].degree.abs() <= 1).collect();
        for &a in &small {
            for &b in &small {
                for &c in &small {
                    let (x, y, z) = (Element::basis(a), Element::basis(b), Element::basis(c));
                    let t1 = l.bracket(&x, &l.bracket(&y, &z).unwrap()).unwrap();
                    let t2 = l.bracket(&y, &l.bracket(&z, &x).unwrap()).unwrap();
                    let t3 = l.bracket(&z, &l.bracket(&x, &y).unwrap()).unwrap();
                    assert!(t1.add(&t2).add(&t3).is_zero());
                    let lhs = form.pair(&l.bracket(&x, &y).unwrap(), &z);
                    let rhs = form.pair(&x, &l.bracket(&y, &z).unwrap());
                    assert_eq!(lhs, rhs);
                }
            }
        }
        // (α_i∨, h) = ε_i α_i(h)
        let eps = g.symmetrizer();
        for i in 0..g.n() {
            for &k in l.cartan_indices() {
                let kpos = l.cartan_indices().iter().position(|&x| x == k).unwrap();
                let lhs = form.pair(&l.coroot(i), &Element::basis(k));
                let mut beta = vec![0; g.n()];
                beta[i] = 1;
                let rhs = CycNum::from_rat(rat(eps[i]) * l.root_value(&beta, kpos));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn recipes_reproduce_basis() {
        for l in [alg("G2"), LieAlgebra::build_affine(&Gcm::from_label("A2^(1)").unwrap(), 2).unwrap()] {
            for b in 0..l.dim() {
                if let Recipe::Bracket { node, raising, arg, scale } = l.recipe(b).clone() {
                    let g = if raising { l.e(node) } else { l.f(node) };
                    let v = l.bracket(&g, &Element::basis(arg)).unwrap().scale(&CycNum::from_rat(scale));
                    assert_eq!(v, Element::basis(b), "{}", l.symbol(b));
                }
            }
        }
    }
}
