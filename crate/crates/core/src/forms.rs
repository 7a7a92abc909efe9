//! Forms of `g ⊗ R` inside `g(S) = g ⊗ S`, `S = k[z^{±1}]`, `R = k[t^{±1}]`,
//! `t = z^m`: 1-cocycles of `Γ = Z/m` with values in `Aut_S(g(S))`, their
//! fixed-point algebras, cohomologous-witness checks, and the twisted
//! `Γ`-module `Hom_S(h″(S), c(S))` with its first cohomology.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::autos::{eval_word, has_period, AutMatrix, AutWord};
use crate::error::{Error, Result};
use crate::liealg::{Element, LieAlgebra};
use crate::linalg::{Echelon, SparseRow};
use crate::loops::{LoopAlgebra, LoopElement};
use crate::scalars::{rat, CycNum};

/// `x_α ⊗ z^i ↦ ζ_level^{b(α)} x_α ⊗ z^{i + c(α)}`, an `S`-linear
/// automorphism of `g(S)` attached to characters of the root lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shift {
    pub b: Vec<i64>,
    pub c: Vec<i64>,
    pub level: u32,
}

impl Shift {
    pub fn inverse(&self) -> Shift {
        Shift { b: self.b.iter().map(|x| -x).collect(), c: self.c.iter().map(|x| -x).collect(), level: self.level }
    }

    pub fn moves_degrees(&self) -> bool {
        self.c.iter().any(|&x| x != 0)
    }

    fn apply(&self, l: &LieAlgebra, x: &LoopElement) -> LoopElement {
        let mut out = LoopElement::zero();
        for (d, v) in x.terms() {
            for (i, coef) in v.iter() {
                let root = &l.basis()[*i].root;
                let bb: i64 = root.iter().zip(&self.b).map(|(r, y)| r * y).sum();
                let cc: i64 = root.iter().zip(&self.c).map(|(r, y)| r * y).sum();
                out.add_homogeneous(d + cc, &Element::term(*i, coef * &CycNum::zeta_pow(self.level, bb)));
            }
        }
        out
    }
}

/// Operators on `g(S)` built from base automorphisms, shifts and the
/// `Γ`-action `id ⊗ underline-i` (`z ↦ ζ_m^i z`).
#[derive(Clone, Debug)]
pub enum SOp {
    Word { word: AutWord, matrix: AutMatrix },
    Shift(Shift),
    Rot { i: i64, m: u32 },
    /// applied first to last
    Compose(Vec<SOp>),
}

impl SOp {
    pub fn word(l: &LieAlgebra, w: &AutWord) -> Result<SOp> {
        Ok(SOp::Word { word: w.clone(), matrix: eval_word(w, l)? })
    }

    pub fn identity() -> SOp {
        SOp::Compose(Vec::new())
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &SOp) -> SOp {
        SOp::Compose(vec![first.clone(), self.clone()])
    }

    pub fn apply(&self, l: &LieAlgebra, x: &LoopElement) -> Result<LoopElement> {
        match self {
            SOp::Word { matrix, .. } => {
                let mut out = LoopElement::zero();
                for (d, v) in x.terms() {
                    out.add_homogeneous(d, &matrix.apply(v)?);
                }
                Ok(out)
            }
            SOp::Shift(s) => Ok(s.apply(l, x)),
            SOp::Rot { i, m } => {
                let mut out = LoopElement::zero();
                for (d, v) in x.terms() {
                    out.add_homogeneous(d, &v.scale(&CycNum::zeta_pow(*m, i * d)));
                }
                Ok(out)
            }
            SOp::Compose(ops) => {
                let mut y = x.clone();
                for op in ops {
                    y = op.apply(l, &y)?;
                }
                Ok(y)
            }
        }
    }

    /// `ⁱf = (id ⊗ underline-i) f (id ⊗ underline-i)⁻¹`.
    pub fn twisted(&self, i: i64, m: u32) -> SOp {
        SOp::Compose(vec![SOp::Rot { i: -i, m }, self.clone(), SOp::Rot { i, m }])
    }

    fn moves_degrees(&self) -> bool {
        match self {
            SOp::Shift(s) => s.moves_degrees(),
            SOp::Compose(v) => v.iter().any(SOp::moves_degrees),
            _ => false,
        }
    }
}

/// A cocycle value `word ⊗ underline-twist`, optionally composed with a
/// shift: `u = W ∘ Rot(twist) ∘ Shift`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleValue {
    pub word: AutWord,
    pub twist: i64,
    pub shift: Option<Shift>,
}

impl CocycleValue {
    pub fn word(w: AutWord) -> Self {
        CocycleValue { word: w, twist: 0, shift: None }
    }

    pub fn operator(&self, l: &LieAlgebra, m: u32) -> Result<SOp> {
        let mut ops = Vec::new();
        if let Some(s) = &self.shift {
            ops.push(SOp::Shift(s.clone()));
        }
        if self.twist != 0 {
            ops.push(SOp::Rot { i: self.twist, m });
        }
        ops.push(SOp::word(l, &self.word)?);
        Ok(SOp::Compose(ops))
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({"word": self.word.to_json(), "twist": self.twist});
        if let Some(s) = &self.shift {
            v["shift"] = json!({"b": s.b, "c": s.c, "level": s.level});
        }
        v
    }
}

/// A map `Γ → Aut_S(g(S))`, `values[i] = u_ī`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cocycle {
    pub m: u32,
    pub values: Vec<CocycleValue>,
}

impl Cocycle {
    pub fn trivial(m: u32) -> Cocycle {
        Cocycle { m, values: (0..m).map(|_| CocycleValue::word(AutWord::identity())).collect() }
    }

    pub fn to_json(&self) -> Value {
        json!({"m": self.m, "values": self.values.iter().map(CocycleValue::to_json).collect::<Vec<_>>()})
    }

    pub fn operators(&self, l: &LieAlgebra) -> Result<Vec<SOp>> {
        self.values.iter().map(|v| v.operator(l, self.m)).collect()
    }
}

/// `ī ↦ σ^{-i} ⊗ id` for `σ = eval(w)` of period `m`.
pub fn loop_cocycle(l: &LieAlgebra, w: &AutWord, m: u32) -> Result<Cocycle> {
    let mat = eval_word(w, l)?;
    if !has_period(&mat, l, m)? {
        return Err(Error::NotPeriod(m));
    }
    let inv = w.inverse();
    Ok(Cocycle { m, values: (0..m).map(|i| CocycleValue::word(inv.pow(i))).collect() })
}

fn probe(l: &LieAlgebra, window: i64) -> Vec<LoopElement> {
    (-window..=window)
        .flat_map(|d| (0..l.dim()).map(move |b| LoopElement::homogeneous(d, Element::basis(b))))
        .collect()
}

fn ops_agree(l: &LieAlgebra, a: &SOp, b: &SOp, probe: &[LoopElement]) -> Result<bool> {
    for x in probe {
        if a.apply(l, x)? != b.apply(l, x)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `u_{ī+j̄} = u_ī · ⁱu_j̄` for all pairs, on `g ⊗ z^k`, `|k| ≤ probe_window`.
pub fn check_cocycle(u: &Cocycle, l: &LieAlgebra, probe_window: i64) -> Result<bool> {
    if u.values.len() != u.m as usize {
        return Ok(false);
    }
    let ops = u.operators(l)?;
    let pr = probe(l, probe_window);
    let m = u.m as usize;
    for i in 0..m {
        for j in 0..m {
            let lhs = &ops[(i + j) % m];
            let rhs = ops[i].after(&ops[j].twisted(i as i64, u.m));
            if !ops_agree(l, lhs, &rhs, &pr)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `g(S)_u = {x : u_ī (id ⊗ underline-i) x = x}` in degrees `[-W, W]`.
pub fn fixed_form(u: &Cocycle, l: &LieAlgebra, window: i64) -> Result<Vec<(i64, Vec<Element>)>> {
    let ops = u.operators(l)?;
    if ops.iter().any(SOp::moves_degrees) {
        return Err(Error::WindowNotStable);
    }
    let gen = ops[1 % u.m as usize].after(&SOp::Rot { i: 1, m: u.m });
    let dim = l.dim();
    let mut out = Vec::new();
    for d in -window..=window {
        // rows of (F - I)ᵀ for the nullspace solve
        let mut rows: Vec<SparseRow<CycNum>> = vec![SparseRow::new(); dim];
        for b in 0..dim {
            let img = gen.apply(l, &LoopElement::homogeneous(d, Element::basis(b)))?;
            if img.degrees().any(|k| k != d) {
                return Err(Error::WindowNotStable);
            }
            let mut col = img.at(d);
            col.add_term(b, &CycNum::from_int(-1));
            for (r, v) in col.iter() {
                rows[*r].insert(b, v.clone());
            }
        }
        let mut ech: Echelon<CycNum> = Echelon::new();
        for r in rows {
            ech.insert(r);
        }
        out.push((d, ech.nullspace(dim).into_iter().map(Element::from_sparse).collect()));
    }
    Ok(out)
}

/// Equality of two families of subspaces degree by degree.
pub fn same_graded_subspaces(a: &[(i64, Vec<Element>)], la: &LoopAlgebra) -> bool {
    a.iter().all(|(d, space)| {
        let other = la.component(*d);
        if space.len() != other.len() {
            return false;
        }
        let mut ech: Echelon<CycNum> = Echelon::new();
        for v in other {
            ech.insert(v.to_sparse());
        }
        space.iter().all(|v| ech.contains(v.to_sparse()))
    })
}

/// `v_ī = f⁻¹ u_ī ⁱf` for all `ī`, checked as `f v_ī = u_ī ⁱf`.
pub fn cohomologous_witness_check(u: &Cocycle, v: &Cocycle, f: &SOp, l: &LieAlgebra, probe_window: i64) -> Result<bool> {
    if u.m != v.m {
        return Ok(false);
    }
    let uo = u.operators(l)?;
    let vo = v.operators(l)?;
    let pr = probe(l, probe_window);
    for i in 0..u.m as usize {
        let lhs = f.after(&vo[i]);
        let rhs = uo[i].after(&f.twisted(i as i64, u.m));
        if !ops_agree(l, &lhs, &rhs, &pr)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The `Γ`-module `M = Hom_S(h″(S), c(S))` truncated to degrees `[-W, W]`,
/// with `(1·η)_k = ζ_m^k C η_k B` for `C = σ₁⁻¹|_c`, `B = β`.
#[derive(Clone, Debug)]
pub struct TwistedAction {
    pub m: u32,
    pub window: i64,
    /// `dim h″`
    pub corank: usize,
    /// `dim c`
    pub center_dim: usize,
    /// `β`, the `h″`-part of `σ₁` on `h″` (`beta[l][j]`: coefficient of `d_j` in `σ₁(d_l)`).
    pub beta: Vec<Vec<CycNum>>,
    /// `σ₁⁻¹` on `c` (`c_inv[s][r]`: coefficient of `c_r` in `σ₁⁻¹(c_s)`).
    pub c_inv: Vec<Vec<CycNum>>,
}

impl TwistedAction {
    pub fn module_dim(&self) -> usize {
        (2 * self.window as usize + 1) * self.corank * self.center_dim
    }

    fn index(&self, k: i64, l: usize, s: usize) -> usize {
        (((k + self.window) as usize) * self.corank + l) * self.center_dim + s
    }

    /// Matrix of `1·` on the module (column `j` is the image of basis `j`,
    /// the basis vector `(k, l, s)` being `η(d_l) = c_s z^k`).
    pub fn generator_matrix(&self) -> Vec<SparseRow<CycNum>> {
        let mut cols = Vec::with_capacity(self.module_dim());
        for k in -self.window..=self.window {
            let zeta = CycNum::zeta_pow(self.m, k);
            for l in 0..self.corank {
                for s in 0..self.center_dim {
                    // (C η B)(d_j) = Σ_l β[j][l] C(η(d_l)), η(d_l) = c_s
                    let mut col = SparseRow::new();
                    for j in 0..self.corank {
                        let b = &self.beta[j][l];
                        if b.is_zero() {
                            continue;
                        }
                        for r in 0..self.center_dim {
                            let v = &(b * &self.c_inv[s][r]) * &zeta;
                            if !v.is_zero() {
                                col.insert(self.index(k, j, r), v);
                            }
                        }
                    }
                    cols.push(col);
                }
            }
        }
        cols
    }

    fn apply(cols: &[SparseRow<CycNum>], x: &SparseRow<CycNum>) -> SparseRow<CycNum> {
        let mut out: SparseRow<CycNum> = SparseRow::new();
        for (j, c) in x {
            for (i, v) in &cols[*j] {
                let e = out.entry(*i).or_default();
                *e += &(c * v);
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// The action has period `m`.
    pub fn has_period_m(&self) -> bool {
        let cols = self.generator_matrix();
        (0..self.module_dim()).all(|j| {
            let mut x: SparseRow<CycNum> = SparseRow::from([(j, CycNum::one())]);
            for _ in 0..self.m {
                x = Self::apply(&cols, &x);
            }
            x == SparseRow::from([(j, CycNum::one())])
        })
    }
}

/// Build the twisted module for the cocycle `u` over an affine base.
/// Over a finite-type base `c = 0` and the module is zero.
pub fn twist_action(u: &Cocycle, l: &LieAlgebra) -> Result<TwistedAction> {
    let real = l.realization();
    let window = l.window().unwrap_or(0);
    let corank = real.corank();
    let center_dim = real.center_basis.len();
    if corank == 0 || center_dim == 0 {
        return Ok(TwistedAction { m: u.m, window: 0, corank: 0, center_dim: 0, beta: vec![], c_inv: vec![] });
    }
    if u.values.iter().any(|v| v.twist != 0 || v.shift.is_some()) {
        return Err(Error::WindowNotStable);
    }
    let n = l.rank();
    let sigma1 = u.values[1 % u.m as usize].word.inverse();
    let s1 = eval_word(&sigma1, l)?;
    let s1_inv = eval_word(&u.values[1 % u.m as usize].word, l)?;
    let cartan_part = |x: &Element| -> Result<Vec<CycNum>> {
        let mut h = Element::zero();
        for (i, c) in x.iter() {
            if l.cartan_indices().contains(i) {
                h.add_term(*i, c);
            }
        }
        l.h_coords(&h).ok_or_else(|| Error::Verification("Cartan part".into()))
    };
    let mut beta = vec![vec![CycNum::zero(); corank]; corank];
    for (dl, row) in beta.iter_mut().enumerate() {
        let mut coords = vec![rat(0); real.h_dim];
        coords[n + dl] = rat(1);
        let img = s1.apply(&l.h_element(&coords))?;
        let hc = cartan_part(&img)?;
        for (j, v) in row.iter_mut().enumerate() {
            *v = hc[n + j].clone();
        }
    }
    let centers: Vec<Vec<CycNum>> =
        real.center_basis.iter().map(|c| c.iter().map(|&x| CycNum::from_int(x)).collect()).collect();
    let mut c_inv = vec![vec![CycNum::zero(); center_dim]; center_dim];
    for (s, row) in c_inv.iter_mut().enumerate() {
        let cs = l.h_element(&real.center_basis[s].iter().map(|&x| rat(x)).collect::<Vec<_>>());
        let img = cartan_part(&s1_inv.apply(&cs)?)?;
        // express img in the center basis
        let a: Vec<Vec<CycNum>> = (0..real.h_dim).map(|i| centers.iter().map(|c| c[i].clone()).collect()).collect();
        let sol = crate::linalg::solve(&a, &img).ok_or_else(|| Error::Verification("σ₁⁻¹ does not preserve c".into()))?;
        *row = sol;
    }
    let t = TwistedAction { m: u.m, window, corank, center_dim, beta, c_inv };
    if !t.has_period_m() {
        return Err(Error::Verification("twisted action does not have period m".into()));
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct H1Report {
    pub module_dim: usize,
    pub cocycles: usize,
    pub coboundaries: usize,
    pub defect: usize,
}

/// `dim Z¹(Γ, M_W) − dim B¹(Γ, M_W)` by exact linear algebra, unknowns
/// `f(0), …, f(m−1) ∈ M_W`.
pub fn h1_vanishing_check(t: &TwistedAction) -> Result<H1Report> {
    let dim = t.module_dim();
    let m = t.m as usize;
    if dim == 0 {
        return Ok(H1Report { module_dim: 0, cocycles: 0, coboundaries: 0, defect: 0 });
    }
    let gen = t.generator_matrix();
    // powers of the action
    let mut powers: Vec<Vec<SparseRow<CycNum>>> = vec![(0..dim).map(|j| SparseRow::from([(j, CycNum::one())])).collect()];
    for i in 1..m {
        let prev = &powers[i - 1];
        powers.push(prev.iter().map(|col| TwistedAction::apply(&gen, col)).collect());
    }
    if (0..dim).any(|j| TwistedAction::apply(&gen, &powers[m - 1][j]) != SparseRow::from([(j, CycNum::one())])) {
        return Err(Error::WindowNotStable);
    }
    let var = |i: usize, a: usize| i * dim + a;
    let mut ech: Echelon<CycNum> = Echelon::new();
    for i in 0..m {
        for j in 0..m {
            // f(i+j) - f(i) - i·f(j) = 0, coordinate by coordinate
            let mut rows: Vec<SparseRow<CycNum>> = vec![SparseRow::new(); dim];
            for a in 0..dim {
                *rows[a].entry(var((i + j) % m, a)).or_default() += &CycNum::one();
                *rows[a].entry(var(i, a)).or_default() -= &CycNum::one();
            }
            for b in 0..dim {
                for (a, v) in &powers[i][b] {
                    *rows[*a].entry(var(j, b)).or_default() -= v;
                }
            }
            for mut r in rows {
                r.retain(|_, v| !v.is_zero());
                if !r.is_empty() {
                    ech.insert(r);
                }
            }
        }
    }
    let cocycles = m * dim - ech.rank();
    // B¹ is the image of x ↦ (i·x − x)_i
    let mut img: Echelon<CycNum> = Echelon::new();
    for b in 0..dim {
        let mut row = SparseRow::new();
        for (i, p) in powers.iter().enumerate() {
            let mut col = p[b].clone();
            *col.entry(b).or_default() -= &CycNum::one();
            for (a, v) in col {
                if !v.is_zero() {
                    row.insert(var(i, a), v);
                }
            }
        }
        img.insert(row);
    }
    let coboundaries = img.rank();
    Ok(H1Report { module_dim: dim, cocycles, coboundaries, defect: cocycles - coboundaries })
}

/// Arc-friendly helper: the loop algebra's cocycle.
pub fn cocycle_of(la: &Arc<LoopAlgebra>) -> Result<Cocycle> {
    loop_cocycle(la.base(), la.sigma(), la.m())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcm::Gcm;
    use crate::loops::build_loop;

    fn base(label: &str) -> Arc<LieAlgebra> {
        Arc::new(LieAlgebra::build_finite(&Gcm::from_label(label).unwrap()).unwrap())
    }

    #[test]
    fn loop_cocycle_shapes() {
        let sl3 = base("A2");
        let nu = AutWord::diagram(vec![1, 0]);
        let u = loop_cocycle(&sl3, &nu, 2).unwrap();
        assert!(u.values[0].word.is_empty());
        assert_eq!(u.values[1].word, nu.inverse());
        assert!(check_cocycle(&u, &sl3, 1).unwrap());
        let u4 = loop_cocycle(&sl3, &nu, 4).unwrap();
        assert!(check_cocycle(&u4, &sl3, 1).unwrap());
        let e2 = eval_word(&u4.values[2].word, &sl3).unwrap();
        assert!(e2.is_identity());
        assert!(check_cocycle(&Cocycle::trivial(3), &sl3, 1).unwrap());
    }

    #[test]
    fn broken_cocycles() {
        let sl3 = base("A2");
        let nu = AutWord::diagram(vec![1, 0]);
        let constant = Cocycle { m: 2, values: vec![CocycleValue::word(nu.clone()), CocycleValue::word(nu.clone())] };
        assert!(!check_cocycle(&constant, &sl3, 1).unwrap());
        let mut u = loop_cocycle(&sl3, &AutWord::adr(vec![1, 2], 3), 3).unwrap();
        u.values[2] = CocycleValue::word(AutWord::adr(vec![1, 1], 3));
        assert!(!check_cocycle(&u, &sl3, 1).unwrap());
    }

    #[test]
    fn fixed_form_matches_loop() {
        let sl3 = base("A2");
        for (w, m) in [
            (AutWord::identity(), 1),
            (AutWord::diagram(vec![1, 0]), 2),
            (AutWord::adr(vec![1, 0], 3), 3),
            (AutWord::diagram(vec![1, 0]).then(&AutWord::adr(vec![1, 1], 2)), 4),
        ] {
            let u = loop_cocycle(&sl3, &w, m).unwrap();
            let ff = fixed_form(&u, &sl3, 5).unwrap();
            let la = build_loop(&sl3, &w, m, Some(5)).unwrap();
            assert!(same_graded_subspaces(&ff, &la), "{w} {m}");
            let per: usize = ff.iter().filter(|(d, _)| (0..m as i64).contains(d)).map(|(_, s)| s.len()).sum();
            assert_eq!(per, 8);
        }
        let trivial = fixed_form(&Cocycle::trivial(2), &sl3, 2).unwrap();
        assert!(trivial.iter().all(|(d, s)| s.len() == if d % 2 == 0 { 8 } else { 0 }));
    }

    #[test]
    fn witness_checks() {
        let sl3 = base("A2");
        let nu = AutWord::diagram(vec![1, 0]);
        let u = loop_cocycle(&sl3, &nu, 2).unwrap();
        assert!(cohomologous_witness_check(&u, &u, &SOp::identity(), &sl3, 1).unwrap());
        // conjugation: v = cocycle of τστ⁻¹, witness τ⁻¹ ⊗ id
        let tau = AutWord::adr(vec![1, 0], 2);
        let v = loop_cocycle(&sl3, &nu.conjugate_by(&tau), 2).unwrap();
        let f = SOp::word(&sl3, &tau.inverse()).unwrap();
        assert!(cohomologous_witness_check(&u, &v, &f, &sl3, 1).unwrap());
        let wrong = SOp::word(&sl3, &AutWord::adr(vec![1, 2], 3)).unwrap();
        assert!(!cohomologous_witness_check(&u, &v, &wrong, &sl3, 1).unwrap());
        // f commuting with every u_i (id ⊗ underline-i) gives a self-witness
        let f = SOp::word(&sl3, &nu).unwrap();
        assert!(cohomologous_witness_check(&u, &u, &f, &sl3, 1).unwrap());
    }

    #[test]
    fn twisted_module_and_h1() {
        let sl2 = base("A1");
        let t = twist_action(&Cocycle::trivial(2), &sl2).unwrap();
        assert_eq!(t.module_dim(), 0);
        assert_eq!(h1_vanishing_check(&t).unwrap().defect, 0);

        let g = Gcm::from_label("A1^(1)").unwrap();
        let aff = LieAlgebra::build_affine(&g, 3).unwrap();
        for w in [AutWord::identity(), AutWord::diagram(vec![1, 0])] {
            let u = loop_cocycle(&aff, &w, 2).unwrap();
            let t = twist_action(&u, &aff).unwrap();
            assert_eq!(t.beta, vec![vec![CycNum::one()]]);
            assert_eq!(t.c_inv, vec![vec![CycNum::one()]]);
            assert!(t.has_period_m());
            let r = h1_vanishing_check(&t).unwrap();
            assert_eq!(r.module_dim, 7);
            assert_eq!(r.defect, 0);
        }
        let u = loop_cocycle(&aff, &AutWord::omega(), 2).unwrap();
        let t = twist_action(&u, &aff).unwrap();
        assert_eq!(t.c_inv, vec![vec![CycNum::from_int(-1)]]);
        assert_eq!(h1_vanishing_check(&t).unwrap().defect, 0);
    }
}
