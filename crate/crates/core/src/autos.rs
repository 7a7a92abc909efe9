//! Automorphism words, their matrices on a [`LieAlgebra`], the outer group
//! `Out(A)` and the projection `p`.

use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gcm::{compose, cycle_notation, invert, is_permutation, perm_order, Gcm, Perm};
use crate::liealg::{Element, LieAlgebra, Recipe};
use crate::linalg::{Echelon, SparseRow};
use crate::scalars::{rat, rat_frac, CycNum, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AutGen {
    /// `ν(e_i) = e_{ν(i)}`, `ν(f_i) = f_{ν(i)}`; fixes `h″`.
    Diagram(Perm),
    /// `ω(e_i) = -f_i`, `ω(f_i) = -e_i`, `ω(h) = -h`.
    Omega,
    /// `Ad(r)` with `r(α_j) = ζ_m^{exps[j]}`.
    AdR { exps: Vec<i64>, m: u32 },
    /// `exp(ad(coeff · x_root))` for a real root.
    Elementary { root: Vec<i64>, coeff: CycNum },
}

/// A product of generators; `[g1, g2]` is `g1 ∘ g2`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AutWord(pub Vec<AutGen>);

impl AutWord {
    pub fn identity() -> Self {
        AutWord(Vec::new())
    }

    pub fn diagram(p: Perm) -> Self {
        AutWord(vec![AutGen::Diagram(p)])
    }

    pub fn omega() -> Self {
        AutWord(vec![AutGen::Omega])
    }

    pub fn adr(exps: Vec<i64>, m: u32) -> Self {
        AutWord(vec![AutGen::adr(exps, m)])
    }

    pub fn gens(&self) -> &[AutGen] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self ∘ other`.
    pub fn then(&self, other: &AutWord) -> AutWord {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        AutWord(v)
    }

    pub fn inverse(&self) -> AutWord {
        AutWord(self.0.iter().rev().map(AutGen::inverse).collect())
    }

    pub fn pow(&self, k: u32) -> AutWord {
        let mut w = AutWord::identity();
        for _ in 0..k {
            w = w.then(self);
        }
        w
    }

    /// `τ ∘ self ∘ τ⁻¹`.
    pub fn conjugate_by(&self, tau: &AutWord) -> AutWord {
        tau.then(self).then(&tau.inverse())
    }

    pub fn has_elementary(&self) -> bool {
        self.0.iter().any(|g| matches!(g, AutGen::Elementary { .. }))
    }

    pub fn validate(&self, g: &Gcm) -> Result<()> {
        for (k, gen) in self.0.iter().enumerate() {
            match gen {
                AutGen::Diagram(p) => {
                    if p.len() != g.n() || !is_permutation(p) {
                        return Err(Error::schema(format!("/{k}/perm"), "not a permutation of the nodes"));
                    }
                    if !g.is_automorphism(p) {
                        return Err(Error::schema(format!("/{k}/perm"), "permutation does not preserve the matrix"));
                    }
                }
                AutGen::AdR { exps, m } => {
                    if exps.len() != g.n() {
                        return Err(Error::schema(format!("/{k}/exps"), "one exponent per node expected"));
                    }
                    if *m == 0 {
                        return Err(Error::schema(format!("/{k}/m"), "modulus must be positive"));
                    }
                }
                AutGen::Elementary { root, .. } => {
                    if root.len() != g.n() {
                        return Err(Error::schema(format!("/{k}/root"), "one coordinate per node expected"));
                    }
                }
                AutGen::Omega => {}
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.0.iter().map(AutGen::to_json).collect())
    }

    pub fn from_json(v: &Value) -> Result<AutWord> {
        let arr = v.as_array().ok_or_else(|| Error::schema("", "word must be an array of generators"))?;
        arr.iter().enumerate().map(|(k, g)| AutGen::from_json(g, &format!("/{k}"))).collect::<Result<_>>().map(AutWord)
    }
}

impl AutGen {
    pub fn adr(exps: Vec<i64>, m: u32) -> AutGen {
        let exps = exps.into_iter().map(|a| a.rem_euclid(m as i64)).collect();
        AutGen::AdR { exps, m }
    }

    pub fn inverse(&self) -> AutGen {
        match self {
            AutGen::Diagram(p) => AutGen::Diagram(invert(p)),
            AutGen::Omega => AutGen::Omega,
            AutGen::AdR { exps, m } => AutGen::adr(exps.iter().map(|a| -a).collect(), *m),
            AutGen::Elementary { root, coeff } => AutGen::Elementary { root: root.clone(), coeff: -coeff },
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AutGen::Diagram(p) => json!({"kind": "diagram", "perm": p.iter().map(|x| x + 1).collect::<Vec<_>>()}),
            AutGen::Omega => json!({"kind": "omega"}),
            AutGen::AdR { exps, m } => json!({"kind": "adr", "exps": exps, "m": m}),
            AutGen::Elementary { root, coeff } => json!({"kind": "elem", "root": root, "coeff": coeff}),
        }
    }

    pub fn from_json(v: &Value, path: &str) -> Result<AutGen> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::schema(format!("{path}/kind"), "missing generator kind"))?;
        let ints = |key: &str| -> Result<Vec<i64>> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::schema(format!("{path}/{key}"), "expected an integer array"))?
                .iter()
                .enumerate()
                .map(|(i, x)| x.as_i64().ok_or_else(|| Error::schema(format!("{path}/{key}/{i}"), "expected an integer")))
                .collect()
        };
        match kind {
            "diagram" => {
                let p = ints("perm")?;
                let n = p.len() as i64;
                let mut perm = Vec::with_capacity(p.len());
                for (i, x) in p.iter().enumerate() {
                    if *x < 1 || *x > n {
                        return Err(Error::schema(format!("{path}/perm/{i}"), "node out of range (nodes are 1-based)"));
                    }
                    perm.push((*x - 1) as usize);
                }
                if !is_permutation(&perm) {
                    return Err(Error::schema(format!("{path}/perm"), "not a permutation"));
                }
                Ok(AutGen::Diagram(perm))
            }
            "omega" => Ok(AutGen::Omega),
            "adr" => {
                let exps = ints("exps")?;
                let m = v
                    .get("m")
                    .and_then(Value::as_u64)
                    .filter(|&m| m > 0 && m <= u32::MAX as u64)
                    .ok_or_else(|| Error::schema(format!("{path}/m"), "expected a positive integer"))?;
                Ok(AutGen::adr(exps, m as u32))
            }
            "elem" => {
                let root = ints("root")?;
                let coeff = match v.get("coeff") {
                    None => CycNum::one(),
                    Some(c) => serde_json::from_value(c.clone())
                        .map_err(|e| Error::schema(format!("{path}/coeff"), e.to_string()))?,
                };
                Ok(AutGen::Elementary { root, coeff })
            }
            other => Err(Error::schema(format!("{path}/kind"), format!("unknown generator kind {other:?}"))),
        }
    }
}

impl fmt::Display for AutWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "id");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|g| match g {
                AutGen::Diagram(p) => format!("ν{}", cycle_notation(p)),
                AutGen::Omega => "ω".into(),
                AutGen::AdR { exps, m } => format!("Ad({exps:?};{m})"),
                AutGen::Elementary { root, coeff } => format!("exp({coeff}·x{root:?})"),
            })
            .collect();
        write!(f, "{}", parts.join("·"))
    }
}

/// An automorphism as the images of the basis vectors. In a truncated affine
/// model, columns whose image leaves the window are `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutMatrix {
    cols: Vec<Option<Element>>,
    window: Option<i64>,
}

impl AutMatrix {
    pub fn identity(dim: usize) -> Self {
        AutMatrix { cols: (0..dim).map(|j| Some(Element::basis(j))).collect(), window: None }
    }

    pub fn from_columns(cols: Vec<Option<Element>>, window: Option<i64>) -> Self {
        AutMatrix { cols, window }
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn col(&self, j: usize) -> Option<&Element> {
        self.cols[j].as_ref()
    }

    pub fn is_complete(&self) -> bool {
        self.cols.iter().all(Option::is_some)
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        let mut out = Element::zero();
        for (j, c) in x.iter() {
            match &self.cols[*j] {
                Some(v) => out.add_scaled(v, c),
                None => {
                    let w = self.window.unwrap_or(0);
                    return Err(Error::WindowOverflow { degree: w + 1, window: w });
                }
            }
        }
        Ok(out)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AutMatrix) -> AutMatrix {
        AutMatrix {
            cols: other.cols.iter().map(|c| c.as_ref().and_then(|v| self.apply(v).ok())).collect(),
            window: self.window.or(other.window),
        }
    }

    pub fn pow(&self, k: u32) -> AutMatrix {
        let mut acc = AutMatrix::identity(self.dim());
        for _ in 0..k {
            acc = self.compose(&acc);
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.cols.iter().enumerate().all(|(j, c)| c.as_ref().is_none_or(|v| *v == Element::basis(j)))
    }

    /// Dense matrix (rows indexed by basis, columns by basis); requires a
    /// complete matrix.
    pub fn to_dense(&self) -> Option<Vec<Vec<CycNum>>> {
        let d = self.dim();
        let mut m = vec![vec![CycNum::zero(); d]; d];
        for (j, c) in self.cols.iter().enumerate() {
            for (i, v) in c.as_ref()?.iter() {
                m[*i][j] = v.clone();
            }
        }
        Some(m)
    }

    /// `M[x, y] = [Mx, My]` on all basis pairs where both sides are defined.
    pub fn preserves_brackets(&self, l: &LieAlgebra) -> bool {
        let d = self.dim();
        for i in 0..d {
            let Some(mi) = self.col(i) else { continue };
            for j in i + 1..d {
                let Some(mj) = self.col(j) else { continue };
                let Ok(xy) = l.bracket_basis(i, j) else { continue };
                let Ok(lhs) = self.apply(&xy) else { continue };
                let Ok(rhs) = l.bracket(mi, mj) else { continue };
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    /// Relations on generator images: `[e_i, f_j] = δ_ij α_i∨` and
    /// `[h, e_j] = α_j(h) e_j` after applying the map.
    pub fn preserves_generator_relations(&self, l: &LieAlgebra) -> bool {
        let n = l.rank();
        let img = |x: &Element| self.apply(x).ok();
        for i in 0..n {
            let (Some(ei), Some(hi)) = (img(&l.e(i)), img(&l.coroot(i))) else { return false };
            for j in 0..n {
                let Some(fj) = img(&l.f(j)) else { return false };
                let Ok(b) = l.bracket(&ei, &fj) else { return false };
                let expect = if i == j { hi.clone() } else { Element::zero() };
                if b != expect {
                    return false;
                }
            }
        }
        for (k, &c) in l.cartan_indices().iter().enumerate() {
            let Some(hc) = img(&Element::basis(c)) else { return false };
            for j in 0..n {
                let Some(ej) = img(&l.e(j)) else { return false };
                let Ok(b) = l.bracket(&hc, &ej) else { return false };
                let beta = crate::gcm::unit(n, j);
                if b != ej.scale(&CycNum::from_rat(l.root_value(&beta, k))) {
                    return false;
                }
            }
        }
        true
    }
}

/// Extend images of `e_u`, `f_u` and a linear map on the abstract `h`
/// (`cartan_map[j]` = image of the `j`-th realization basis vector) to all
/// basis vectors via the recipes.
pub fn extend_from_generators(
    l: &LieAlgebra,
    e_img: &[Element],
    f_img: &[Element],
    cartan_map: &[Vec<Rat>],
) -> AutMatrix {
    let dim = l.dim();
    let mut cols: Vec<Option<Element>> = vec![None; dim];
    for (u, &(e, f)) in l.generator_indices().iter().enumerate() {
        cols[e] = Some(e_img[u].clone());
        cols[f] = Some(f_img[u].clone());
    }
    let hd = l.realization().h_dim;
    for &c in l.cartan_indices() {
        let coords = l.h_coords(&Element::basis(c)).expect("Cartan basis vector");
        let mut out = Element::zero();
        for (j, x) in coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let image: Vec<Rat> = (0..hd).map(|i| cartan_map[j][i].clone()).collect();
            out.add_scaled(&l.h_element(&image), x);
        }
        cols[c] = Some(out);
    }
    for &b in l.recipe_order() {
        if let Recipe::Bracket { node, raising, arg, scale } = l.recipe(b) {
            let g = if *raising { &e_img[*node] } else { &f_img[*node] };
            cols[b] = cols[*arg]
                .as_ref()
                .and_then(|a| l.bracket(g, a).ok())
                .map(|v| v.scale(&CycNum::from_rat(scale.clone())));
        }
    }
    AutMatrix { cols, window: l.window() }
}

/// Action of a grading-compatible generator on the abstract `h`
/// (column-major: `out[j]` is the image of basis vector `j`).
pub fn cartan_action(gen: &AutGen, l: &LieAlgebra) -> Option<Vec<Vec<Rat>>> {
    let hd = l.realization().h_dim;
    let n = l.rank();
    let mut m = vec![vec![rat(0); hd]; hd];
    match gen {
        AutGen::Diagram(p) => {
            for j in 0..hd {
                let t = if j < n { p[j] } else { j };
                m[j][t] = rat(1);
            }
        }
        AutGen::Omega => {
            for (j, row) in m.iter_mut().enumerate() {
                row[j] = rat(-1);
            }
        }
        AutGen::AdR { .. } => {
            for (j, row) in m.iter_mut().enumerate() {
                row[j] = rat(1);
            }
        }
        AutGen::Elementary { .. } => return None,
    }
    Some(m)
}

fn eval_gen(gen: &AutGen, l: &LieAlgebra) -> Result<AutMatrix> {
    let dim = l.dim();
    let n = l.rank();
    match gen {
        AutGen::Diagram(p) => {
            if !l.gcm().is_automorphism(p) {
                return Err(Error::schema("/perm", "permutation does not preserve the matrix"));
            }
            let e_img: Vec<Element> = (0..n).map(|i| l.e(p[i])).collect();
            let f_img: Vec<Element> = (0..n).map(|i| l.f(p[i])).collect();
            let cm = cartan_action(gen, l).expect("diagram acts on h");
            Ok(extend_from_generators(l, &e_img, &f_img, &cm))
        }
        AutGen::Omega => {
            let cols = (0..dim)
                .map(|b| {
                    let mb = l.mirror(b);
                    Some(Element::term(mb, CycNum::from_int(-1)))
                })
                .collect();
            Ok(AutMatrix { cols, window: l.window() })
        }
        AutGen::AdR { exps, m } => {
            let cols = (0..dim)
                .map(|b| {
                    let root = &l.basis()[b].root;
                    let k: i64 = root.iter().zip(exps).map(|(x, a)| x * a).sum();
                    Some(Element::term(b, CycNum::zeta_pow(*m, k)))
                })
                .collect();
            Ok(AutMatrix { cols, window: l.window() })
        }
        AutGen::Elementary { root, coeff } => {
            if !l.is_real_root(root) {
                return Err(Error::NonNilpotent(format!("{root:?} is not a real root carried by the basis")));
            }
            let x = Element::term(l.root_space(root)[0], coeff.clone());
            let cols = (0..dim)
                .map(|b| -> Result<Option<Element>> {
                    let mut term = Element::basis(b);
                    let mut sum = term.clone();
                    for k in 1..=6i64 {
                        term = match l.bracket(&x, &term) {
                            Ok(t) => t.scale(&CycNum::from_rat(rat_frac(1, k))),
                            Err(Error::WindowOverflow { .. }) => return Ok(None),
                            Err(e) => return Err(e),
                        };
                        if term.is_zero() {
                            return Ok(Some(sum));
                        }
                        sum = sum.add(&term);
                    }
                    Err(Error::NonNilpotent(format!("ad of x{root:?} is not nilpotent")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(AutMatrix { cols, window: l.window() })
        }
    }
}

/// The matrix of a word; the automorphism property is checked on generators.
pub fn eval_word(w: &AutWord, l: &LieAlgebra) -> Result<AutMatrix> {
    w.validate(l.gcm())?;
    let mut acc = AutMatrix::identity(l.dim());
    for gen in w.gens().iter().rev() {
        acc = eval_gen(gen, l)?.compose(&acc);
    }
    if !acc.preserves_generator_relations(l) {
        return Err(match l.window() {
            Some(w) => Error::WindowOverflow { degree: w + 1, window: w },
            None => Error::Verification("word does not evaluate to an automorphism".into()),
        });
    }
    Ok(acc)
}

fn generator_probe(l: &LieAlgebra) -> Vec<Element> {
    let mut v: Vec<Element> = (0..l.rank()).flat_map(|u| [l.e(u), l.f(u)]).collect();
    v.extend(l.cartan_indices().iter().map(|&c| Element::basis(c)));
    v
}

/// `M^k = id`, checked on generators of the algebra.
pub fn has_period(m: &AutMatrix, l: &LieAlgebra, k: u32) -> Result<bool> {
    for x in generator_probe(l) {
        let mut y = x.clone();
        for _ in 0..k {
            y = m.apply(&y)?;
        }
        if y != x {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Least `m ≤ max_m` with `M^m = id`.
pub fn period(m: &AutMatrix, l: &LieAlgebra, max_m: u32) -> Result<u32> {
    let probe = generator_probe(l);
    let mut cur = probe.clone();
    for k in 1..=max_m {
        for y in cur.iter_mut() {
            *y = m.apply(y)?;
        }
        if cur == probe {
            return Ok(k);
        }
    }
    Err(Error::PeriodExceeded(max_m))
}

/// Level `N` such that all entries of the matrix and `ζ_m` lie in `Q(ζ_N)`.
pub fn matrix_level(m: &AutMatrix, period: u32) -> u32 {
    let mut level = period.max(1);
    for c in m.cols.iter().flatten() {
        for (_, v) in c.iter() {
            level = crate::scalars::minimal_level([level, v.level()]);
        }
    }
    level
}

/// `g_ī = {x : σx = ζ_m^i x}` for `i = 0..m-1`.
pub fn eigenspaces(m: &AutMatrix, period: u32) -> Result<Vec<(u32, Vec<Element>)>> {
    let d = m.dim();
    if !m.is_complete() {
        return Err(Error::Unsupported("eigenspaces of a truncated affine model".into()));
    }
    let mut rows_t: Vec<SparseRow<CycNum>> = vec![SparseRow::new(); d];
    for j in 0..d {
        for (i, v) in m.col(j).expect("complete").iter() {
            rows_t[*i].insert(j, v.clone());
        }
    }
    let mut out = Vec::with_capacity(period as usize);
    for i in 0..period {
        let lambda = CycNum::zeta_pow(period, i as i64);
        let mut ech: Echelon<CycNum> = Echelon::new();
        for (r, row) in rows_t.iter().enumerate() {
            let mut row = row.clone();
            let e = row.entry(r).or_insert_with(CycNum::zero);
            *e = &*e - &lambda;
            ech.insert(row);
        }
        let space = ech.nullspace(d).into_iter().map(Element::from_sparse).collect();
        out.push((i, space));
    }
    Ok(out)
}

/// `θ_η`: fixes `g′` and sends `d_l ↦ d_l + Σ_s eta[l][s] c_s`.
pub fn theta_eta(l: &LieAlgebra, eta: &[Vec<Rat>]) -> Result<AutMatrix> {
    let real = l.realization();
    if real.center_basis.is_empty() {
        return Err(Error::WrongType("θ_η needs a nonzero center".into()));
    }
    let n = l.rank();
    let hd = real.h_dim;
    if eta.len() != real.corank() || eta.iter().any(|r| r.len() != real.center_basis.len()) {
        return Err(Error::schema("/eta", "expected a corank × center-dimension matrix"));
    }
    let mut cm: Vec<Vec<Rat>> = (0..hd).map(|j| (0..hd).map(|i| rat(i64::from(i == j))).collect()).collect();
    for (dl, row) in eta.iter().enumerate() {
        for (s, coef) in row.iter().enumerate() {
            for i in 0..hd {
                cm[n + dl][i] += coef * rat(real.center_basis[s][i]);
            }
        }
    }
    let e_img: Vec<Element> = (0..n).map(|u| l.e(u)).collect();
    let f_img: Vec<Element> = (0..n).map(|u| l.f(u)).collect();
    Ok(extend_from_generators(l, &e_img, &f_img, &cm))
}

/// `-w_0` as a permutation of the nodes of a finite-type matrix.
pub fn minus_w0(g: &Gcm) -> Result<Perm> {
    if !g.classify().is_finite() {
        return Err(Error::WrongType("longest Weyl element exists only in finite type".into()));
    }
    let n = g.n();
    let pos = g.positive_roots()?;
    let mut x: Vec<i64> = vec![0; n];
    for r in &pos {
        for (a, b) in x.iter_mut().zip(r) {
            *a += b;
        }
    }
    let mut word = Vec::new();
    while let Some(i) = (0..n).find(|&i| g.pairing(&x, i) > 0) {
        let c = g.pairing(&x, i);
        x[i] -= c;
        word.push(i);
    }
    let mut perm = vec![0; n];
    for (j, slot) in perm.iter_mut().enumerate() {
        let mut beta = crate::gcm::unit(n, j);
        for &i in &word {
            let c = g.pairing(&beta, i);
            beta[i] -= c;
        }
        *slot = beta.iter().position(|&c| c == -1).expect("w0 maps simple roots to negative simple roots");
    }
    Ok(perm)
}

/// An element of `Out(A)`: `ω^{omega} ∘ ν`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutElement {
    pub omega: bool,
    pub perm: Perm,
}

impl OutElement {
    pub fn identity(n: usize) -> Self {
        OutElement { omega: false, perm: (0..n).collect() }
    }

    pub fn mul(&self, other: &OutElement) -> OutElement {
        OutElement { omega: self.omega ^ other.omega, perm: compose(&self.perm, &other.perm) }
    }

    pub fn inverse(&self) -> OutElement {
        OutElement { omega: self.omega, perm: invert(&self.perm) }
    }

    pub fn is_identity(&self) -> bool {
        !self.omega && self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn order(&self) -> u32 {
        let p = perm_order(&self.perm);
        if self.omega && p % 2 == 1 {
            2 * p
        } else {
            p
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "omega": self.omega,
            "perm": self.perm.iter().map(|x| x + 1).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for OutElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = cycle_notation(&self.perm);
        if self.omega {
            write!(f, "ω{p}")
        } else {
            write!(f, "{p}")
        }
    }
}

/// `Out(A)`: `Aut(A)` in finite type, `⟨ω⟩ × Aut(A)` otherwise.
#[derive(Clone, Debug)]
pub struct OutGroup {
    n: usize,
    finite: bool,
    omega_class: Option<Perm>,
    elements: Vec<OutElement>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptLine {
    pub conjugator: OutElement,
    pub image: OutElement,
    pub hits_target: bool,
    pub hits_inverse: bool,
}

impl OutGroup {
    pub fn new(g: &Gcm) -> Result<OutGroup> {
        let finite = g.classify().is_finite();
        let autos = g.automorphisms();
        let mut elements: Vec<OutElement> = autos.iter().map(|p| OutElement { omega: false, perm: p.clone() }).collect();
        if !finite {
            elements.extend(autos.iter().map(|p| OutElement { omega: true, perm: p.clone() }));
        }
        elements.sort();
        let omega_class = if finite { Some(minus_w0(g)?) } else { None };
        Ok(OutGroup { n: g.n(), finite, omega_class, elements })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[OutElement] {
        &self.elements
    }

    pub fn is_finite_type(&self) -> bool {
        self.finite
    }

    pub fn identity(&self) -> OutElement {
        OutElement::identity(self.n)
    }

    /// Image of `ω` in `Out(A)`.
    pub fn omega_image(&self) -> OutElement {
        match &self.omega_class {
            Some(p) => OutElement { omega: false, perm: p.clone() },
            None => OutElement { omega: true, perm: (0..self.n).collect() },
        }
    }

    pub fn conjugate(&self, g: &OutElement, x: &OutElement) -> OutElement {
        g.mul(x).mul(&g.inverse())
    }

    /// `μ1 ∼ μ2`: some conjugate of `μ1` equals `μ2` or `μ2⁻¹`.
    pub fn tilde_equivalent(&self, m1: &OutElement, m2: &OutElement) -> bool {
        self.transcript(m1, m2).iter().any(|t| t.hits_target || t.hits_inverse)
    }

    /// Every conjugate `g μ1 g⁻¹` with its comparison against `μ2`, `μ2⁻¹`.
    pub fn transcript(&self, m1: &OutElement, m2: &OutElement) -> Vec<TranscriptLine> {
        let inv = m2.inverse();
        self.elements
            .iter()
            .map(|g| {
                let image = self.conjugate(g, m1);
                TranscriptLine { conjugator: g.clone(), hits_target: image == *m2, hits_inverse: image == inv, image }
            })
            .collect()
    }

    /// Representatives of the `∼`-classes, smallest first.
    pub fn tilde_classes(&self) -> Vec<Vec<OutElement>> {
        let mut classes: Vec<Vec<OutElement>> = Vec::new();
        for x in &self.elements {
            if classes.iter().any(|c| c.contains(x)) {
                continue;
            }
            let mut class: Vec<OutElement> = self
                .elements
                .iter()
                .filter(|y| self.tilde_equivalent(x, y))
                .cloned()
                .collect();
            class.sort();
            classes.push(class);
        }
        classes
    }

    pub fn project_gen(&self, gen: &AutGen) -> OutElement {
        match gen {
            AutGen::Diagram(p) => OutElement { omega: false, perm: p.clone() },
            AutGen::Omega => self.omega_image(),
            AutGen::AdR { .. } | AutGen::Elementary { .. } => self.identity(),
        }
    }

    /// `p(w)`, the product of the generator projections in word order.
    pub fn project_word(&self, w: &AutWord) -> OutElement {
        w.gens().iter().fold(self.identity(), |acc, g| acc.mul(&self.project_gen(g)))
    }
}

/// `ω^ε ∘ ν ∘ Ad(r)` with `r(α_j) = ζ_m^{exps[j]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub omega: bool,
    pub perm: Perm,
    pub exps: Vec<i64>,
    pub m: u32,
}

impl NormalForm {
    pub fn to_word(&self) -> AutWord {
        let mut gens = Vec::new();
        if self.omega {
            gens.push(AutGen::Omega);
        }
        if self.perm.iter().enumerate().any(|(i, &p)| i != p) {
            gens.push(AutGen::Diagram(self.perm.clone()));
        }
        if self.exps.iter().any(|&a| a != 0) {
            gens.push(AutGen::adr(self.exps.clone(), self.m));
        }
        AutWord(gens)
    }
}

/// Rewrite a word without elementary factors into [`NormalForm`].
pub fn normal_form(w: &AutWord, n: usize) -> Result<NormalForm> {
    let mut nf = NormalForm { omega: false, perm: (0..n).collect(), exps: vec![0; n], m: 1 };
    for gen in w.gens() {
        match gen {
            AutGen::Omega => {
                nf.omega = !nf.omega;
                for a in nf.exps.iter_mut() {
                    *a = (-*a).rem_euclid(nf.m as i64);
                }
            }
            AutGen::Diagram(mu) => {
                nf.perm = compose(&nf.perm, mu);
                nf.exps = (0..n).map(|i| nf.exps[mu[i]]).collect();
            }
            AutGen::AdR { exps, m } => {
                let level = num_integer::lcm(nf.m, *m);
                let (s1, s2) = ((level / nf.m) as i64, (level / *m) as i64);
                nf.exps = nf.exps.iter().zip(exps).map(|(a, b)| (a * s1 + b * s2).rem_euclid(level as i64)).collect();
                nf.m = level;
            }
            AutGen::Elementary { .. } => {
                return Err(Error::NotNormalForm("word contains elementary factors".into()));
            }
        }
    }
    reduce_level(&mut nf.exps, &mut nf.m);
    Ok(nf)
}

/// Smallest modulus representing the same character.
pub fn reduce_level(exps: &mut [i64], m: &mut u32) {
    let mut g = *m as i64;
    for a in exps.iter() {
        g = num_integer::gcd(g, *a);
    }
    let g = g.max(1);
    for a in exps.iter_mut() {
        *a /= g;
    }
    *m /= g as u32;
}

/// Integer matrix of the action on the root lattice (columns are images of
/// the simple roots) for a grading-compatible word.
pub fn root_lattice_action(w: &AutWord, n: usize) -> Result<Vec<Vec<i64>>> {
    let mut m: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for gen in w.gens().iter().rev() {
        let g: Vec<Vec<i64>> = match gen {
            AutGen::Diagram(p) => (0..n).map(|i| (0..n).map(|j| i64::from(p[j] == i)).collect()).collect(),
            AutGen::Omega => (0..n).map(|i| (0..n).map(|j| if i == j { -1 } else { 0 }).collect()).collect(),
            AutGen::AdR { .. } => continue,
            AutGen::Elementary { .. } => {
                return Err(Error::NotGradingCompatible("elementary factors do not act on the root grading".into()))
            }
        };
        m = (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| g[i][k] * m[k][j]).sum()).collect()).collect();
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn alg(label: &str) -> LieAlgebra {
        LieAlgebra::build_finite(&Gcm::from_label(label).unwrap()).unwrap()
    }

    #[test]
    fn automorphism_groups() {
        assert_eq!(Gcm::from_label("A2").unwrap().automorphisms().len(), 2);
        assert_eq!(Gcm::from_label("D4").unwrap().automorphisms().len(), 6);
        assert_eq!(Gcm::from_label("G2").unwrap().automorphisms().len(), 1);
    }

    #[test]
    fn out_group_orders() {
        assert_eq!(OutGroup::new(&Gcm::from_label("A2").unwrap()).unwrap().order(), 2);
        assert_eq!(OutGroup::new(&Gcm::from_label("A1^(1)").unwrap()).unwrap().order(), 4);
        assert_eq!(OutGroup::new(&Gcm::from_label("E8").unwrap()).unwrap().order(), 1);
    }

    fn weyl_longest_by_enumeration(g: &Gcm) -> Perm {
        // brute force: BFS over the Weyl group as integer matrices on the root lattice
        let n = g.n();
        let refl = |i: usize| -> Vec<Vec<i64>> {
            (0..n)
                .map(|r| {
                    (0..n)
                        .map(|c| {
                            let id = i64::from(r == c);
                            if r == i {
                                id - g.a(i, c)
                            } else {
                                id
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let mul = |a: &Vec<Vec<i64>>, b: &Vec<Vec<i64>>| -> Vec<Vec<i64>> {
            (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
        };
        let id: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        let mut seen = std::collections::HashSet::new();
        let mut queue = std::collections::VecDeque::from([id.clone()]);
        seen.insert(id);
        let pos = g.positive_roots().unwrap();
        while let Some(w) = queue.pop_front() {
            let all_neg = pos.iter().all(|r| {
                let img: Vec<i64> = (0..n).map(|i| (0..n).map(|j| w[i][j] * r[j]).sum()).collect();
                img.iter().all(|&x| x <= 0)
            });
            if all_neg {
                return (0..n).map(|j| (0..n).find(|&i| w[i][j] == -1).unwrap()).collect();
            }
            for i in 0..n {
                let nw = mul(&refl(i), &w);
                if seen.insert(nw.clone()) {
                    queue.push_back(nw);
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn minus_w0_matches_enumeration() {
        for label in ["A1", "A2", "A3", "A4", "B3", "C3", "D4", "D5", "G2", "F4", "E6"] {
            let g = Gcm::from_label(label).unwrap();
            assert_eq!(minus_w0(&g).unwrap(), weyl_longest_by_enumeration(&g), "{label}");
        }
        assert_eq!(minus_w0(&Gcm::from_label("A2").unwrap()).unwrap(), vec![1, 0]);
        assert_eq!(minus_w0(&Gcm::from_label("D4").unwrap()).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn projections() {
        let g = Gcm::from_label("A2").unwrap();
        let out = OutGroup::new(&g).unwrap();
        assert!(out.project_word(&AutWord::adr(vec![1, 1], 3)).is_identity());
        assert_eq!(out.project_word(&AutWord::diagram(vec![1, 0])).perm, vec![1, 0]);
        assert_eq!(out.project_word(&AutWord::omega()).perm, vec![1, 0]);
        assert!(out.project_word(&AutWord::omega().then(&AutWord::diagram(vec![1, 0]))).is_identity());
        let aff = OutGroup::new(&Gcm::from_label("A1^(1)").unwrap()).unwrap();
        assert!(aff.project_word(&AutWord::omega()).omega);
    }

    #[test]
    fn tilde_in_d4() {
        let out = OutGroup::new(&Gcm::from_label("D4").unwrap()).unwrap();
        let els = out.elements().to_vec();
        let three = els.iter().find(|e| e.order() == 3).unwrap();
        let two = els.iter().find(|e| e.order() == 2).unwrap();
        assert!(!out.tilde_equivalent(three, two));
        assert!(out.tilde_equivalent(three, &three.inverse()));
        for a in &els {
            assert!(out.tilde_equivalent(a, a));
            for b in &els {
                assert_eq!(out.tilde_equivalent(a, b), out.tilde_equivalent(b, a));
                for c in &els {
                    if out.tilde_equivalent(a, b) && out.tilde_equivalent(b, c) {
                        assert!(out.tilde_equivalent(a, c));
                    }
                }
            }
        }
        assert_eq!(out.tilde_classes().len(), 3);
    }

    #[test]
    fn eval_examples() {
        let l = alg("A1");
        let w = eval_word(&AutWord::omega(), &l).unwrap();
        assert_eq!(w.apply(&l.e(0)).unwrap(), l.f(0).neg());
        assert_eq!(w.apply(&l.f(0)).unwrap(), l.e(0).neg());
        assert_eq!(w.apply(&l.coroot(0)).unwrap(), l.coroot(0).neg());
        let r = eval_word(&AutWord::adr(vec![1], 2), &l).unwrap();
        assert_eq!(r.apply(&l.e(0)).unwrap(), l.e(0).neg());
        assert_eq!(r.apply(&l.coroot(0)).unwrap(), l.coroot(0));
        let l = alg("A2");
        let nu = eval_word(&AutWord::diagram(vec![1, 0]), &l).unwrap();
        assert_eq!(nu.apply(&l.e(0)).unwrap(), l.e(1));
        assert!(nu.preserves_brackets(&l));
        assert_eq!(period(&nu, &l, 10).unwrap(), 2);
        assert_eq!(period(&eval_word(&AutWord::omega(), &alg("A1")).unwrap(), &alg("A1"), 10).unwrap(), 2);
        assert_eq!(period(&AutMatrix::identity(l.dim()), &l, 10).unwrap(), 1);
        let d4 = alg("D4");
        let c3 = eval_word(&AutWord::diagram(vec![2, 1, 3, 0]), &d4).unwrap();
        assert_eq!(period(&c3, &d4, 10).unwrap(), 3);
        assert!(c3.preserves_brackets(&d4));
    }

    #[test]
    fn elementary_and_nilpotency() {
        let l = alg("A2");
        let w = AutWord(vec![AutGen::Elementary { root: vec![1, 1], coeff: CycNum::from_int(3) }]);
        let m = eval_word(&w, &l).unwrap();
        assert!(m.preserves_brackets(&l));
        let back = eval_word(&w.inverse(), &l).unwrap();
        assert!(m.compose(&back).is_identity());
        let bad = AutWord(vec![AutGen::Elementary { root: vec![2, 1], coeff: CycNum::one() }]);
        assert!(matches!(eval_word(&bad, &l), Err(Error::NonNilpotent(_))));
    }

    #[test]
    fn eigenspace_dims() {
        let l = alg("A2");
        let nu = eval_word(&AutWord::diagram(vec![1, 0]), &l).unwrap();
        let dims: Vec<usize> = eigenspaces(&nu, 2).unwrap().iter().map(|(_, s)| s.len()).collect();
        assert_eq!(dims, vec![3, 5]);
        let r = eval_word(&AutWord::adr(vec![1, 0], 2), &l).unwrap();
        let dims: Vec<usize> = eigenspaces(&r, 2).unwrap().iter().map(|(_, s)| s.len()).collect();
        assert_eq!(dims, vec![4, 4]);
        let id = AutMatrix::identity(l.dim());
        assert_eq!(eigenspaces(&id, 1).unwrap()[0].1.len(), 8);
        // eigenvectors are eigenvectors
        for (i, space) in eigenspaces(&nu, 2).unwrap() {
            for v in space {
                assert_eq!(nu.apply(&v).unwrap(), v.scale(&CycNum::zeta_pow(2, i as i64)));
            }
        }
    }

    #[test]
    fn theta_eta_on_affine() {
        let g = Gcm::from_label("A1^(1)").unwrap();
        let l = LieAlgebra::build_affine(&g, 3).unwrap();
        let zero = theta_eta(&l, &[vec![rat(0)]]).unwrap();
        assert!(zero.is_identity());
        let t = theta_eta(&l, &[vec![rat(1)]]).unwrap();
        let t_inv = theta_eta(&l, &[vec![rat(-1)]]).unwrap();
        assert!(t.compose(&t_inv).is_identity());
        assert!(t.preserves_brackets(&l));
        let mut d = vec![rat(0); 3];
        d[2] = rat(1);
        let dd = l.h_element(&d);
        let (_, center) = l.derived_and_center();
        assert_eq!(t.apply(&dd).unwrap(), dd.add(&center[0]));
        for u in 0..2 {
            assert_eq!(t.apply(&l.e(u)).unwrap(), l.e(u));
        }
        assert!(matches!(theta_eta(&alg("A1"), &[]), Err(Error::WrongType(_))));
    }

    #[test]
    fn affine_words() {
        let g = Gcm::from_label("A1^(1)").unwrap();
        let l = LieAlgebra::build_affine(&g, 4).unwrap();
        let flip = eval_word(&AutWord::diagram(vec![1, 0]), &l).unwrap();
        assert_eq!(flip.apply(&l.e(0)).unwrap(), l.e(1));
        assert_eq!(flip.apply(&l.f(1)).unwrap(), l.f(0));
        assert_eq!(period(&flip, &l, 4).unwrap(), 2);
        assert!(flip.preserves_brackets(&l));
        let om = eval_word(&AutWord::omega(), &l).unwrap();
        assert_eq!(om.apply(&l.e(0)).unwrap(), l.f(0).neg());
        assert!(om.preserves_brackets(&l));
    }

    #[test]
    fn json_roundtrip_and_errors() {
        let w = AutWord(vec![
            AutGen::Diagram(vec![1, 0]),
            AutGen::adr(vec![1, 0], 2),
            AutGen::Omega,
            AutGen::Elementary { root: vec![1, 0], coeff: CycNum::zeta(3) },
        ]);
        assert_eq!(AutWord::from_json(&w.to_json()).unwrap(), w);
        let bad = serde_json::json!([{"kind": "diagram", "perm": [1, 3]}]);
        match AutWord::from_json(&bad) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "/0/perm/1"),
            other => panic!("{other:?}"),
        }
        let bad = serde_json::json!([{"kind": "twist"}]);
        assert!(matches!(AutWord::from_json(&bad), Err(Error::Schema { .. })));
    }

    #[test]
    fn normal_form_rules() {
        let w = AutWord(vec![AutGen::adr(vec![1, 0], 2), AutGen::Diagram(vec![1, 0]), AutGen::Omega]);
        let nf = normal_form(&w, 2).unwrap();
        assert!(nf.omega);
        assert_eq!(nf.perm, vec![1, 0]);
        let l = alg("A2");
        assert_eq!(eval_word(&w, &l).unwrap(), eval_word(&nf.to_word(), &l).unwrap());
    }

    fn arb_word_a2() -> impl Strategy<Value = AutWord> {
        let gen = prop_oneof![
            Just(AutGen::Diagram(vec![1, 0])),
            Just(AutGen::Omega),
            (0i64..6, 0i64..6, 1u32..7).prop_map(|(a, b, m)| AutGen::adr(vec![a, b], m)),
            (0usize..6, -2i64..3).prop_map(|(r, c)| {
                let roots = [vec![1, 0], vec![0, 1], vec![1, 1], vec![-1, 0], vec![0, -1], vec![-1, -1]];
                AutGen::Elementary { root: roots[r].clone(), coeff: CycNum::from_int(c) }
            }),
        ];
        prop::collection::vec(gen, 0..4).prop_map(AutWord)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn eval_is_multiplicative(w1 in arb_word_a2(), w2 in arb_word_a2()) {
            let l = alg("A2");
            let m12 = eval_word(&w1.then(&w2), &l).unwrap();
            let m1 = eval_word(&w1, &l).unwrap();
            let m2 = eval_word(&w2, &l).unwrap();
            prop_assert_eq!(&m12, &m1.compose(&m2));
            prop_assert!(m12.preserves_brackets(&l));
            let out = OutGroup::new(l.gcm()).unwrap();
            prop_assert_eq!(out.project_word(&w1.then(&w2)), out.project_word(&w1).mul(&out.project_word(&w2)));
        }

        #[test]
        fn normal_form_evaluates_equal(w in arb_word_a2()) {
            let w = AutWord(w.0.into_iter().filter(|g| !matches!(g, AutGen::Elementary { .. })).collect());
            let l = alg("A2");
            let nf = normal_form(&w, 2).unwrap();
            prop_assert_eq!(eval_word(&w, &l).unwrap(), eval_word(&nf.to_word(), &l).unwrap());
        }

        #[test]
        fn eigenspace_dims_conjugation_invariant(w in arb_word_a2(), tau in arb_word_a2()) {
            let l = alg("A2");
            let base = AutWord(w.0.into_iter().filter(|g| !matches!(g, AutGen::Elementary { .. })).collect());
            let m = eval_word(&base, &l).unwrap();
            let p = period(&m, &l, 24).unwrap();
            let c = eval_word(&base.conjugate_by(&tau), &l).unwrap();
            let d1: Vec<usize> = eigenspaces(&m, p).unwrap().iter().map(|(_, s)| s.len()).collect();
            let d2: Vec<usize> = eigenspaces(&c, p).unwrap().iter().map(|(_, s)| s.len()).collect();
            prop_assert_eq!(d1, d2);
        }
    }
}
