//! Twisted loop algebras `L_m(g, σ) = ⊕_i g_ī ⊗ z^i` over a finite-type
//! base, the elementary isomorphisms between them, the centroid over `R`
//! and the normalization of `k`-isomorphisms to `R`-isomorphisms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Signed;
use serde_json::{json, Value};

use crate::autos::{eigenspaces, eval_word, has_period, AutMatrix, AutWord};
use crate::error::{Error, Result};
use crate::liealg::{Element, LieAlgebra};
use crate::linalg::{Echelon, SparseRow};
use crate::scalars::{CycNum, Rat};

pub fn default_window(m: u32) -> i64 {
    2 * m as i64 + 4
}

/// `Σ_i x_i ⊗ z^i` with finitely many nonzero `x_i`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoopElement {
    terms: BTreeMap<i64, Element>,
}

impl LoopElement {
    pub fn zero() -> Self {
        LoopElement::default()
    }

    pub fn homogeneous(deg: i64, x: Element) -> Self {
        let mut e = LoopElement::zero();
        e.add_homogeneous(deg, &x);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        self.terms.keys().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Element)> {
        self.terms.iter().map(|(d, x)| (*d, x))
    }

    pub fn at(&self, deg: i64) -> Element {
        self.terms.get(&deg).cloned().unwrap_or_default()
    }

    pub fn add_homogeneous(&mut self, deg: i64, x: &Element) {
        if x.is_zero() {
            return;
        }
        let e = self.terms.entry(deg).or_default();
        *e = e.add(x);
        if e.is_zero() {
            self.terms.remove(&deg);
        }
    }

    pub fn add(&self, other: &LoopElement) -> LoopElement {
        let mut out = self.clone();
        for (d, x) in &other.terms {
            out.add_homogeneous(*d, x);
        }
        out
    }

    pub fn sub(&self, other: &LoopElement) -> LoopElement {
        self.add(&other.scale(&CycNum::from_int(-1)))
    }

    pub fn scale(&self, c: &CycNum) -> LoopElement {
        let mut out = LoopElement::zero();
        for (d, x) in &self.terms {
            out.add_homogeneous(*d, &x.scale(c));
        }
        out
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> LoopElement {
        LoopElement { terms: self.terms.iter().map(|(d, x)| (d + k, x.clone())).collect() }
    }

    /// Coordinates `(degree, base index) -> coefficient`.
    pub fn flat(&self) -> BTreeMap<(i64, usize), CycNum> {
        let mut out = BTreeMap::new();
        for (d, x) in &self.terms {
            for (i, c) in x.iter() {
                out.insert((*d, *i), c.clone());
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
struct Component {
    basis: Vec<Element>,
    pivots: Vec<usize>,
}

impl Component {
    fn new(space: Vec<Element>) -> Component {
        let mut ech: Echelon<CycNum> = Echelon::new();
        for v in &space {
            ech.insert(v.to_sparse());
        }
        let (pivots, basis) = ech.reduced_rows().into_iter().map(|(p, r)| (p, Element::from_sparse(r))).unzip();
        Component { basis, pivots }
    }

    fn coords(&self, x: &Element) -> Option<Vec<CycNum>> {
        let c: Vec<CycNum> = self.pivots.iter().map(|&p| x.get(p)).collect();
        let mut rebuilt = Element::zero();
        for (v, b) in c.iter().zip(&self.basis) {
            rebuilt.add_scaled(b, v);
        }
        (rebuilt == *x).then_some(c)
    }
}

/// `L_m(g, σ)` with its graded components and a degree window used for
/// enumeration.
#[derive(Clone, Debug)]
pub struct LoopAlgebra {
    base: Arc<LieAlgebra>,
    sigma: AutWord,
    sigma_mat: AutMatrix,
    m: u32,
    window: i64,
    components: Vec<Component>,
}

impl LoopAlgebra {
    pub fn base(&self) -> &Arc<LieAlgebra> {
        &self.base
    }

    pub fn sigma(&self) -> &AutWord {
        &self.sigma
    }

    pub fn sigma_matrix(&self) -> &AutMatrix {
        &self.sigma_mat
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn with_window(&self, window: i64) -> LoopAlgebra {
        LoopAlgebra { window, ..self.clone() }
    }

    fn residue(&self, deg: i64) -> usize {
        deg.rem_euclid(self.m as i64) as usize
    }

    /// Basis of `g_ī`, the part of `L` in degree `deg` being `g_ī ⊗ z^deg`.
    pub fn component(&self, deg: i64) -> &[Element] {
        &self.components[self.residue(deg)].basis
    }

    pub fn dim_at(&self, deg: i64) -> usize {
        self.component(deg).len()
    }

    /// Component dimensions for residues `0..m`.
    pub fn period_dims(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.basis.len()).collect()
    }

    pub fn graded_dims(&self) -> Vec<(i64, usize)> {
        (-self.window..=self.window).map(|d| (d, self.dim_at(d))).collect()
    }

    pub fn basis_at(&self, deg: i64) -> Vec<LoopElement> {
        self.component(deg).iter().map(|x| LoopElement::homogeneous(deg, x.clone())).collect()
    }

    pub fn basis_in(&self, lo: i64, hi: i64) -> Vec<(i64, usize, LoopElement)> {
        (lo..=hi).flat_map(|d| self.basis_at(d).into_iter().enumerate().map(move |(k, x)| (d, k, x))).collect()
    }

    /// Coordinates of a homogeneous element of degree `deg` in the graded basis.
    pub fn coords(&self, deg: i64, x: &Element) -> Option<Vec<CycNum>> {
        self.components[self.residue(deg)].coords(x)
    }

    /// Membership via the fixed-point description: `σ(x_i) = ζ_m^i x_i`.
    pub fn contains(&self, x: &LoopElement) -> bool {
        x.terms().all(|(d, v)| {
            let zeta = CycNum::zeta_pow(self.m, d);
            self.sigma_mat.apply(v).map(|s| s == v.scale(&zeta)).unwrap_or(false)
        })
    }

    pub fn raw_bracket(&self, x: &LoopElement, y: &LoopElement) -> LoopElement {
        let mut out = LoopElement::zero();
        for (i, a) in x.terms() {
            for (j, b) in y.terms() {
                let v = self.base.bracket(a, b).expect("finite base");
                out.add_homogeneous(i + j, &v);
            }
        }
        out
    }

    /// Componentwise bracket; the result must stay in the window.
    pub fn bracket(&self, x: &LoopElement, y: &LoopElement) -> Result<LoopElement> {
        let out = self.raw_bracket(x, y);
        if let Some(d) = out.degrees().find(|d| d.abs() > self.window) {
            return Err(Error::WindowOverflow { degree: d, window: self.window });
        }
        Ok(out)
    }

    /// Multiplication by `t = z^m`.
    pub fn t_times(&self, x: &LoopElement, power: i64) -> LoopElement {
        x.shift(power * self.m as i64)
    }

    pub fn descriptor(&self) -> Value {
        json!({
            "base": self.base.cartan_type().label(),
            "sigma": self.sigma.to_json(),
            "m": self.m,
            "window": self.window,
            "period_dims": self.period_dims(),
        })
    }
}

/// `L_m(g, σ)` for the word `w`; `eval(w)^m = id` is required.
pub fn build_loop(base: &Arc<LieAlgebra>, w: &AutWord, m: u32, window: Option<i64>) -> Result<LoopAlgebra> {
    if !base.is_finite() {
        return Err(Error::Unsupported("loop algebras over an affine base".into()));
    }
    if m == 0 {
        return Err(Error::schema("/m", "period must be positive"));
    }
    let sigma_mat = eval_word(w, base)?;
    if !has_period(&sigma_mat, base, m)? {
        return Err(Error::NotPeriod(m));
    }
    let spaces = eigenspaces(&sigma_mat, m)?;
    let components: Vec<Component> = spaces.into_iter().map(|(_, s)| Component::new(s)).collect();
    let total: usize = components.iter().map(|c| c.basis.len()).sum();
    if total != base.dim() {
        return Err(Error::Verification(format!("eigenspaces span {total} of {} dimensions", base.dim())));
    }
    Ok(LoopAlgebra {
        base: base.clone(),
        sigma: w.clone(),
        sigma_mat,
        m,
        window: window.unwrap_or_else(|| default_window(m)),
        components,
    })
}

/// The induced automorphism `t ↦ a·t^{sign}` of `R`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Semilinearity {
    pub a: CycNum,
    pub sign: i8,
}

impl Semilinearity {
    pub fn linear() -> Self {
        Semilinearity { a: CycNum::one(), sign: 1 }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &Semilinearity) -> Semilinearity {
        let a2 = if first.sign == 1 { self.a.clone() } else { self.a.inv().expect("nonzero") };
        Semilinearity { a: &first.a * &a2, sign: self.sign * first.sign }
    }

    pub fn is_linear(&self) -> bool {
        self.sign == 1 && self.a.is_one()
    }
}

impl fmt::Display for Semilinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = if self.sign == 1 { "t" } else { "t^-1" };
        if self.a.is_one() {
            write!(f, "t ↦ {e}")
        } else {
            write!(f, "t ↦ {}·{e}", self.a)
        }
    }
}

#[derive(Clone, Debug)]
pub enum MapKind {
    Identity,
    /// `x ⊗ z^j ↦ x ⊗ z^{ej}`
    PeriodChange { e: u32 },
    /// `x ⊗ z^j ↦ x ⊗ z^{j/e}`, from `L_{em}(g, σ)` with `σ^m = id`
    PeriodDivide { e: u32 },
    /// `x ⊗ z^i ↦ x ⊗ z^{-i}`
    Inverse,
    /// `x ⊗ z^i ↦ τ(x) ⊗ z^i`
    Conjugation { tau: AutWord, matrix: AutMatrix },
    /// `x_α ⊗ z^i ↦ ζ_level^{b(α)} x_α ⊗ z^{i + c(α)}`
    Erasing { b: Vec<i64>, c: Vec<i64>, level: u32 },
    /// `x ⊗ z^i ↦ s^i x ⊗ z^i`
    Scaling { s: CycNum },
    /// applied first to last
    Composite(Vec<LoopMap>),
}

#[derive(Clone, Debug)]
pub struct LoopMap {
    pub source: Arc<LoopAlgebra>,
    pub target: Arc<LoopAlgebra>,
    pub kind: MapKind,
    pub semilinear: Semilinearity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapReport {
    pub basis_checked: usize,
    pub pairs_checked: usize,
    pub semilinearity: String,
}

impl LoopMap {
    pub fn name(&self) -> String {
        match &self.kind {
            MapKind::Identity => "identity".into(),
            MapKind::PeriodChange { e } => format!("period change (degrees × {e})"),
            MapKind::PeriodDivide { e } => format!("period change (degrees / {e})"),
            MapKind::Inverse => "inverse (z ↦ z⁻¹)".into(),
            MapKind::Conjugation { tau, .. } => format!("conjugation by {tau}"),
            MapKind::Erasing { b, c, level } => format!("erasing (b = {b:?}, c = {c:?}, level {level})"),
            MapKind::Scaling { s } => format!("scaling z ↦ {s}·z"),
            MapKind::Composite(v) => format!("composite of {} maps", v.len()),
        }
    }

    pub fn apply(&self, x: &LoopElement) -> Result<LoopElement> {
        let base = self.source.base();
        match &self.kind {
            MapKind::Identity => Ok(x.clone()),
            MapKind::PeriodChange { e } => {
                Ok(LoopElement { terms: x.terms().map(|(d, v)| (d * *e as i64, v.clone())).collect() })
            }
            MapKind::PeriodDivide { e } => {
                let e = *e as i64;
                if let Some(d) = x.degrees().find(|d| d % e != 0) {
                    return Err(Error::Verification(format!("degree {d} is not divisible by {e}")));
                }
                Ok(LoopElement { terms: x.terms().map(|(d, v)| (d / e, v.clone())).collect() })
            }
            MapKind::Inverse => Ok(LoopElement { terms: x.terms().map(|(d, v)| (-d, v.clone())).collect() }),
            MapKind::Conjugation { matrix, .. } => {
                let mut out = LoopElement::zero();
                for (d, v) in x.terms() {
                    out.add_homogeneous(d, &matrix.apply(v)?);
                }
                Ok(out)
            }
            MapKind::Erasing { b, c, level } => {
                let mut out = LoopElement::zero();
                for (d, v) in x.terms() {
                    for (i, coef) in v.iter() {
                        let root = &base.basis()[*i].root;
                        let bb: i64 = root.iter().zip(b).map(|(r, y)| r * y).sum();
                        let cc: i64 = root.iter().zip(c).map(|(r, y)| r * y).sum();
                        let phase = CycNum::zeta_pow(*level, bb);
                        out.add_homogeneous(d + cc, &Element::term(*i, coef * &phase));
                    }
                }
                Ok(out)
            }
            MapKind::Scaling { s } => {
                let mut out = LoopElement::zero();
                for (d, v) in x.terms() {
                    out.add_homogeneous(d, &v.scale(&s.pow(d)?));
                }
                Ok(out)
            }
            MapKind::Composite(maps) => {
                let mut y = x.clone();
                for f in maps {
                    y = f.apply(&y)?;
                }
                Ok(y)
            }
        }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &LoopMap) -> LoopMap {
        let mut maps = match &first.kind {
            MapKind::Composite(v) => v.clone(),
            _ => vec![first.clone()],
        };
        match &self.kind {
            MapKind::Composite(v) => maps.extend(v.iter().cloned()),
            _ => maps.push(self.clone()),
        }
        LoopMap {
            source: first.source.clone(),
            target: self.target.clone(),
            semilinear: self.semilinear.after(&first.semilinear),
            kind: MapKind::Composite(maps),
        }
    }

    /// Exact verification on the source basis in degrees `[-W, W]` (`W` the
    /// source window): images lie in the target, are independent within each
    /// degree, the declared semilinearity holds, and brackets are preserved
    /// on all pairs with degrees in `[-pair_window, pair_window]`.
    pub fn verify(&self, pair_window: i64) -> Result<MapReport> {
        let src = &self.source;
        let tgt = &self.target;
        let w = src.window();
        let mut basis_checked = 0;
        let mut images: BTreeMap<(i64, usize), LoopElement> = BTreeMap::new();
        let mut columns: BTreeMap<(i64, usize), usize> = BTreeMap::new();
        for d in -w..=w {
            let mut ech: Echelon<CycNum> = Echelon::new();
            for (k, x) in src.basis_at(d).into_iter().enumerate() {
                let y = self.apply(&x)?;
                if !tgt.contains(&y) {
                    return Err(Error::Verification(format!("{}: image of degree-{d} basis vector {k} leaves the target", self.name())));
                }
                let row: SparseRow<CycNum> = y
                    .flat()
                    .into_iter()
                    .map(|(key, c)| {
                        let next = columns.len();
                        (*columns.entry(key).or_insert(next), c)
                    })
                    .collect();
                if !ech.insert(row) {
                    return Err(Error::Verification(format!("{}: not injective in degree {d}", self.name())));
                }
                // semilinearity: φ(t x) = a t^{±1} φ(x)
                let tx = src.t_times(&x, 1);
                let lhs = self.apply(&tx)?;
                let rhs = tgt.t_times(&y, self.semilinear.sign as i64).scale(&self.semilinear.a);
                if lhs != rhs {
                    return Err(Error::NotSemilinear(format!("{}: declared {} fails in degree {d}", self.name(), self.semilinear)));
                }
                images.insert((d, k), y);
                basis_checked += 1;
            }
        }
        let pw = pair_window.min(w);
        let mut pairs_checked = 0;
        for d1 in -pw..=pw {
            for d2 in -pw..=pw {
                for (k1, x) in src.basis_at(d1).into_iter().enumerate() {
                    for (k2, y) in src.basis_at(d2).into_iter().enumerate() {
                        if (d1, k1) >= (d2, k2) {
                            continue;
                        }
                        let lhs = self.apply(&src.raw_bracket(&x, &y))?;
                        let rhs = tgt.raw_bracket(&images[&(d1, k1)], &images[&(d2, k2)]);
                        if lhs != rhs {
                            return Err(Error::Verification(format!(
                                "{}: bracket not preserved on degrees ({d1}, {d2})",
                                self.name()
                            )));
                        }
                        pairs_checked += 1;
                    }
                }
            }
        }
        Ok(MapReport { basis_checked, pairs_checked, semilinearity: self.semilinear.to_string() })
    }

    pub fn to_json(&self) -> Value {
        let kind = match &self.kind {
            MapKind::Identity => json!({"kind": "identity"}),
            MapKind::PeriodChange { e } => json!({"kind": "period_change", "e": e}),
            MapKind::PeriodDivide { e } => json!({"kind": "period_divide", "e": e}),
            MapKind::Inverse => json!({"kind": "inverse"}),
            MapKind::Conjugation { tau, .. } => json!({"kind": "conjugation", "tau": tau.to_json()}),
            MapKind::Erasing { b, c, level } => json!({"kind": "erasing", "b": b, "c": c, "level": level}),
            MapKind::Scaling { s } => json!({"kind": "scaling", "s": s}),
            MapKind::Composite(v) => json!({"kind": "composite", "maps": v.iter().map(LoopMap::to_json).collect::<Vec<_>>()}),
        };
        json!({
            "map": kind,
            "source": self.source.descriptor(),
            "target": self.target.descriptor(),
            "semilinearity": {"a": self.semilinear.a, "sign": self.semilinear.sign},
        })
    }

    /// Dump of the action on the source basis in degrees `[lo, hi]`.
    pub fn matrices(&self, lo: i64, hi: i64) -> Result<Value> {
        let base = self.source.base();
        let mut out = Vec::new();
        for (d, k, x) in self.source.basis_in(lo, hi) {
            let y = self.apply(&x)?;
            let img: Vec<Value> =
                y.terms().map(|(deg, v)| json!({"degree": deg, "element": base.element_to_json(v)})).collect();
            out.push(json!({"degree": d, "index": k, "image": img}));
        }
        Ok(Value::Array(out))
    }
}

fn arc(l: LoopAlgebra) -> Arc<LoopAlgebra> {
    Arc::new(l)
}

/// `L_d(g, σ) → L_m(g, σ)`, `x ⊗ z^j ↦ x ⊗ z^{(m/d) j}`.
pub fn period_change_iso(base: &Arc<LieAlgebra>, w: &AutWord, d: u32, m: u32, window: Option<i64>) -> Result<LoopMap> {
    if d == 0 || !m.is_multiple_of(d) {
        return Err(Error::NotDivisor { d, m });
    }
    let e = m / d;
    let src = build_loop(base, w, d, window)?;
    let tw = src.window() * e as i64;
    let tgt = build_loop(base, w, m, Some(window.map_or(tw, |x| x.max(tw))))?;
    Ok(LoopMap { source: arc(src), target: arc(tgt), kind: MapKind::PeriodChange { e }, semilinear: Semilinearity::linear() })
}

/// `L(g, σ) → L(g, σ⁻¹)`, `z ↦ z⁻¹`.
pub fn inverse_iso(la: &Arc<LoopAlgebra>) -> Result<LoopMap> {
    let tgt = build_loop(la.base(), &la.sigma().inverse(), la.m(), Some(la.window()))?;
    Ok(LoopMap {
        source: la.clone(),
        target: arc(tgt),
        kind: MapKind::Inverse,
        semilinear: Semilinearity { a: CycNum::one(), sign: -1 },
    })
}

/// `L(g, σ) → L(g, τστ⁻¹)`, `τ ⊗ id`.
pub fn conjugation_iso(la: &Arc<LoopAlgebra>, tau: &AutWord) -> Result<LoopMap> {
    let matrix = eval_word(tau, la.base())?;
    let tgt = build_loop(la.base(), &la.sigma().conjugate_by(tau), la.m(), Some(la.window()))?;
    Ok(LoopMap {
        source: la.clone(),
        target: arc(tgt),
        kind: MapKind::Conjugation { tau: tau.clone(), matrix },
        semilinear: Semilinearity::linear(),
    })
}

/// `id ⊗ ε` with `ε(z) = s z`, an automorphism of `L(g, σ)` with
/// `t ↦ s^m t`.
pub fn scaling_map(la: &Arc<LoopAlgebra>, s: CycNum) -> Result<LoopMap> {
    let a = s.pow(la.m() as i64)?;
    Ok(LoopMap { source: la.clone(), target: la.clone(), kind: MapKind::Scaling { s }, semilinear: Semilinearity { a, sign: 1 } })
}

pub fn identity_map(la: &Arc<LoopAlgebra>) -> LoopMap {
    LoopMap { source: la.clone(), target: la.clone(), kind: MapKind::Identity, semilinear: Semilinearity::linear() }
}

/// Recover `φ̃` from the action of `φ` on `t`-multiples of basis elements.
pub fn induced_base_aut(phi: &LoopMap) -> Result<Semilinearity> {
    let src = &phi.source;
    let tgt = &phi.target;
    let mut found: Option<Semilinearity> = None;
    for d in 0..src.m() as i64 {
        for x in src.basis_at(d) {
            let y = phi.apply(&x)?;
            let ty = phi.apply(&src.t_times(&x, 1))?;
            let mut this = None;
            for sign in [1i8, -1] {
                let shifted = tgt.t_times(&y, sign as i64);
                let Some(((deg, i), c)) = shifted.flat().into_iter().next() else { continue };
                let a = ty.at(deg).get(i).checked_div(&c)?;
                if !a.is_zero() && shifted.scale(&a) == ty {
                    this = Some(Semilinearity { a, sign });
                    break;
                }
            }
            let this = this.ok_or_else(|| Error::NotSemilinear(format!("degree {d} image is not a t-multiple")))?;
            match &found {
                None => found = Some(this),
                Some(f) if *f == this => {}
                Some(f) => return Err(Error::NotSemilinear(format!("inconsistent: {f} versus {this}"))),
            }
        }
    }
    found.ok_or_else(|| Error::NotSemilinear("empty source".into()))
}

fn rational_root(q: &Rat, m: u32) -> Option<Rat> {
    let root = |x: &BigInt| -> Option<BigInt> {
        let r = x.abs().nth_root(m);
        (num_traits::pow(r.clone(), m as usize) == x.abs()).then_some(r)
    };
    let (n, d) = (root(q.numer())?, root(q.denom())?);
    if q.is_negative() {
        (m % 2 == 1).then(|| -Rat::new(n, d))
    } else {
        Some(Rat::new(n, d))
    }
}

/// `s` with `s^{-m} = a`, among roots of unity or rational numbers.
pub fn mth_root_inverse(a: &CycNum, m: u32) -> Result<CycNum> {
    if let Some((o, j)) = a.as_root_of_unity() {
        return Ok(CycNum::zeta_pow(o * m, -j));
    }
    if let Some(q) = a.as_rat() {
        if let Some(r) = rational_root(q, m) {
            return CycNum::from_rat(r).inv();
        }
    }
    Err(Error::NoRootAvailable(format!("{a} has no m-th root (m = {m}) in a cyclotomic field; a field extension is needed")))
}

/// Compose `φ` with `z ↦ z⁻¹` (if `φ̃` inverts `t`) and a scaling so the
/// result is `R`-linear.
pub fn normalize_to_r_iso(phi: &LoopMap) -> Result<LoopMap> {
    let induced = induced_base_aut(phi)?;
    if induced != phi.semilinear {
        return Err(Error::NotSemilinear(format!("declared {} but observed {induced}", phi.semilinear)));
    }
    let mut cur = phi.clone();
    if cur.semilinear.sign == -1 {
        cur = inverse_iso(&cur.target)?.after(&cur);
    }
    if !cur.semilinear.a.is_one() {
        let s = mth_root_inverse(&cur.semilinear.a, cur.target.m())?;
        cur = scaling_map(&cur.target, s)?.after(&cur);
    }
    debug_assert!(cur.semilinear.is_linear());
    Ok(cur)
}

/// Dimension of the degree-`s` part of the centroid, computed on the
/// window: `χ` maps `L_i → L_{i+s}` for `|i| ≤ W` and commutes with `ad(x)`
/// for `x` in degrees `|j| ≤ m`, which generate `L`.
pub fn centroid_dim(la: &LoopAlgebra, shift: i64, window: i64) -> Result<usize> {
    let m = la.m() as i64;
    let base = la.base();
    // unknown index for (i, q, p): coefficient of basis q of degree i+s in χ(basis p of degree i)
    let mut offsets: BTreeMap<i64, usize> = BTreeMap::new();
    let mut total = 0usize;
    for i in -window..=window {
        offsets.insert(i, total);
        total += la.dim_at(i) * la.dim_at(i + shift);
    }
    let var = |i: i64, q: usize, p: usize| offsets[&i] + q * la.dim_at(i) + p;
    let mut ech: Echelon<CycNum> = Echelon::new();
    for j in -m..=m {
        for x in la.component(j) {
            for i in -window..=window {
                if (i + j).abs() > window {
                    continue;
                }
                let nij = la.dim_at(i + j);
                let nis = la.dim_at(i + shift);
                // ad x on degree i+s basis, in coordinates of degree i+j+s
                let ad_shifted: Vec<Vec<CycNum>> = la
                    .component(i + shift)
                    .iter()
                    .map(|b| {
                        let v = base.bracket(x, b).expect("finite base");
                        la.coords(i + j + shift, &v).expect("bracket stays in the loop algebra")
                    })
                    .collect();
                for (p, y) in la.component(i).iter().enumerate() {
                    let v = base.bracket(x, y).expect("finite base");
                    let c = la.coords(i + j, &v).expect("bracket stays in the loop algebra");
                    for u in 0..la.dim_at(i + j + shift) {
                        let mut row: SparseRow<CycNum> = SparseRow::new();
                        for (r, cr) in c.iter().enumerate().take(nij) {
                            if !cr.is_zero() {
                                let e = row.entry(var(i + j, u, r)).or_default();
                                *e += cr;
                            }
                        }
                        for (q, adq) in ad_shifted.iter().enumerate().take(nis) {
                            if !adq[u].is_zero() {
                                let e = row.entry(var(i, q, p)).or_default();
                                *e -= &adq[u];
                            }
                        }
                        row.retain(|_, v| !v.is_zero());
                        if !row.is_empty() {
                            ech.insert(row);
                        }
                    }
                }
            }
        }
    }
    Ok(total - ech.rank())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentroidReport {
    pub window: i64,
    /// `(shift, dimension)`
    pub ranks: Vec<(i64, usize)>,
}

/// Graded ranks of the centroid for shifts `0..=2m`.
pub fn loop_centroid(la: &LoopAlgebra, window: i64) -> Result<CentroidReport> {
    let m = la.m() as i64;
    let ranks = (0..=2 * m).map(|s| Ok((s, centroid_dim(la, s, window)?))).collect::<Result<_>>()?;
    Ok(CentroidReport { window, ranks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcm::Gcm;

    fn base(label: &str) -> Arc<LieAlgebra> {
        Arc::new(LieAlgebra::build_finite(&Gcm::from_label(label).unwrap()).unwrap())
    }

    #[test]
    fn graded_dimensions() {
        let sl2 = base("A1");
        let l = build_loop(&sl2, &AutWord::identity(), 1, Some(3)).unwrap();
        assert!(l.graded_dims().iter().all(|&(_, d)| d == 3));
        let sl3 = base("A2");
        let l = build_loop(&sl3, &AutWord::diagram(vec![1, 0]), 2, Some(4)).unwrap();
        for (d, n) in l.graded_dims() {
            assert_eq!(n, if d % 2 == 0 { 3 } else { 5 });
        }
        assert_eq!(l.period_dims().iter().sum::<usize>(), 8);
        assert!(matches!(build_loop(&sl3, &AutWord::diagram(vec![1, 0]), 3, None), Err(Error::NotPeriod(3))));
    }

    #[test]
    fn brackets_and_membership() {
        let sl2 = base("A1");
        let l = build_loop(&sl2, &AutWord::identity(), 1, Some(3)).unwrap();
        let e = LoopElement::homogeneous(0, sl2.e(0));
        let f = LoopElement::homogeneous(0, sl2.f(0));
        assert_eq!(l.bracket(&e, &f).unwrap(), LoopElement::homogeneous(0, sl2.coroot(0)));
        let x = LoopElement::homogeneous(1, sl2.e(0));
        let y = LoopElement::homogeneous(-1, sl2.f(0));
        assert_eq!(l.bracket(&x, &y).unwrap().degrees().collect::<Vec<_>>(), vec![0]);
        let big = LoopElement::homogeneous(3, sl2.e(0));
        assert!(matches!(l.bracket(&big, &f.shift(1)), Err(Error::WindowOverflow { .. })));

        let sl3 = base("A2");
        let l = build_loop(&sl3, &AutWord::diagram(vec![1, 0]), 2, None).unwrap();
        for a in l.basis_at(1) {
            for b in l.basis_at(1) {
                let c = l.bracket(&a, &b).unwrap();
                assert!(l.contains(&c));
                if !c.is_zero() {
                    assert!(l.coords(2, &c.at(2)).is_some());
                }
            }
        }
        assert!(!l.contains(&LoopElement::homogeneous(1, sl3.e(0))));
    }

    #[test]
    fn period_change_and_inverse() {
        let sl2 = base("A1");
        let p = period_change_iso(&sl2, &AutWord::identity(), 1, 2, Some(3)).unwrap();
        p.verify(2).unwrap();
        let x = LoopElement::homogeneous(1, sl2.e(0));
        assert_eq!(p.apply(&x).unwrap(), LoopElement::homogeneous(2, sl2.e(0)));
        let same = period_change_iso(&sl2, &AutWord::identity(), 2, 2, Some(3)).unwrap();
        assert_eq!(same.apply(&x).unwrap(), x);

        let sl3 = base("A2");
        let nu = AutWord::diagram(vec![1, 0]);
        let p = period_change_iso(&sl3, &nu, 2, 4, Some(4)).unwrap();
        p.verify(3).unwrap();
        assert!(matches!(period_change_iso(&sl3, &nu, 3, 4, None), Err(Error::NotDivisor { d: 3, m: 4 })));

        let la = Arc::new(build_loop(&sl3, &AutWord::adr(vec![1, 0], 3), 3, Some(5)).unwrap());
        let inv = inverse_iso(&la).unwrap();
        inv.verify(3).unwrap();
        assert_eq!(induced_base_aut(&inv).unwrap(), Semilinearity { a: CycNum::one(), sign: -1 });
        let twice = inverse_iso(&inv.target).unwrap().after(&inv);
        for (_, _, x) in la.basis_in(-2, 2) {
            assert_eq!(twice.apply(&x).unwrap(), x);
        }
    }

    #[test]
    fn conjugation_examples() {
        let sl3 = base("A2");
        let nu = AutWord::diagram(vec![1, 0]);
        let la = Arc::new(build_loop(&sl3, &nu, 2, Some(4)).unwrap());
        let c = conjugation_iso(&la, &AutWord::identity()).unwrap();
        c.verify(2).unwrap();
        let c = conjugation_iso(&la, &nu).unwrap();
        c.verify(2).unwrap();
        let r = AutWord::adr(vec![1, 0], 2);
        let c = conjugation_iso(&la, &r).unwrap();
        let rep = c.verify(2).unwrap();
        assert!(rep.pairs_checked > 0);
        assert_eq!(induced_base_aut(&c).unwrap(), Semilinearity::linear());
    }

    #[test]
    fn semilinearity_and_normalization() {
        let sl3 = base("A2");
        let la = Arc::new(build_loop(&sl3, &AutWord::diagram(vec![1, 0]), 2, Some(4)).unwrap());
        let s = scaling_map(&la, CycNum::zeta(8)).unwrap();
        s.verify(2).unwrap();
        assert_eq!(induced_base_aut(&s).unwrap().a, CycNum::zeta(4));
        let n = normalize_to_r_iso(&s).unwrap();
        assert!(n.semilinear.is_linear());
        n.verify(2).unwrap();
        assert_eq!(mth_root_inverse(&CycNum::zeta(4), 2).unwrap(), CycNum::zeta_pow(8, -1));
        let inv = inverse_iso(&la).unwrap();
        let n = normalize_to_r_iso(&inv).unwrap();
        assert!(n.semilinear.is_linear());
        n.verify(2).unwrap();
        let lin = identity_map(&la);
        assert!(normalize_to_r_iso(&lin).unwrap().semilinear.is_linear());
        assert!(matches!(
            mth_root_inverse(&CycNum::from_int(2), 2),
            Err(Error::NoRootAvailable(_))
        ));
        assert_eq!(mth_root_inverse(&CycNum::from_int(4), 2).unwrap(), CycNum::from_rat(Rat::new(1.into(), 2.into())));
    }

    #[test]
    fn composition_law() {
        let sl3 = base("A2");
        let la = Arc::new(build_loop(&sl3, &AutWord::diagram(vec![1, 0]), 2, Some(4)).unwrap());
        let s = scaling_map(&la, CycNum::zeta(6)).unwrap();
        let inv = inverse_iso(&la).unwrap();
        let s2 = scaling_map(&inv.target, CycNum::zeta(5)).unwrap();
        let comp = s2.after(&inv).after(&s);
        let expect = induced_base_aut(&s2).unwrap().after(&induced_base_aut(&inv).unwrap()).after(&induced_base_aut(&s).unwrap());
        assert_eq!(induced_base_aut(&comp).unwrap(), expect);
        assert_eq!(comp.semilinear, expect);
    }

    #[test]
    fn centroid_small() {
        let sl2 = base("A1");
        let l = build_loop(&sl2, &AutWord::identity(), 1, None).unwrap();
        assert_eq!(centroid_dim(&l, 0, 3).unwrap(), 1);
        assert_eq!(centroid_dim(&l, 1, 3).unwrap(), 1);
        let sl3 = base("A2");
        let l = build_loop(&sl3, &AutWord::diagram(vec![1, 0]), 2, None).unwrap();
        assert_eq!(centroid_dim(&l, 1, 3).unwrap(), 0);
        assert_eq!(centroid_dim(&l, 2, 3).unwrap(), 1);
    }
}
