//! Isomorphism of loop algebras `L(g, σ1) ≅_k L(g, σ2)` through the
//! projection `p : Aut(g) → Out(A)`, with explicit witness chains for words
//! of the first kind and certificates for negative answers.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::autos::{
    eval_word, has_period, normal_form, root_lattice_action, AutGen, AutWord, OutElement, OutGroup, TranscriptLine,
};
use crate::erasing::{erasing_data, matrix_order};
use crate::error::{Error, Result};
use crate::gcm::{catalog, perm_order, CartanType, Gcm};
use crate::liealg::{Element, LieAlgebra};
use crate::linalg::{nullspace, rank};
use crate::loops::{
    build_loop, conjugation_iso, default_window, inverse_iso, loop_centroid, LoopAlgebra, LoopMap, MapKind, MapReport,
    Semilinearity,
};
use crate::scalars::CycNum;

pub const SCOPE: &str =
    "the verdict is over the algebraic closure of Q; witness maps are defined over the cyclotomic field of the stated level";

#[derive(Clone, Debug)]
pub struct Link {
    pub map: LoopMap,
    pub report: MapReport,
}

/// A verified chain `L_m(g, w1) → … → L_m(g, w2)`.
#[derive(Clone, Debug)]
pub struct IsoWitness {
    pub links: Vec<Link>,
    pub semilinearity: Semilinearity,
    pub replay: MapReport,
    /// Smallest `N` with every coefficient in `Q(ζ_N)`.
    pub level: u32,
}

impl IsoWitness {
    pub fn to_json(&self) -> Value {
        let links: Vec<Value> = self
            .links
            .iter()
            .map(|l| {
                json!({
                    "name": l.map.name(),
                    "map": l.map.to_json(),
                    "verified": {"basis": l.report.basis_checked, "pairs": l.report.pairs_checked},
                })
            })
            .collect();
        json!({
            "links": links,
            "semilinearity": self.semilinearity.to_string(),
            "replay": {"basis": self.replay.basis_checked, "pairs": self.replay.pairs_checked},
            "field_level": self.level,
        })
    }
}

#[derive(Clone, Debug)]
pub enum WitnessStatus {
    Built(Box<IsoWitness>),
    Withheld(String),
}

impl WitnessStatus {
    pub fn built(&self) -> Option<&IsoWitness> {
        match self {
            WitnessStatus::Built(w) => Some(w),
            WitnessStatus::Withheld(_) => None,
        }
    }
}

/// Degree-zero component data: dimension, rank of its Killing form, and
/// dimension of its center.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fingerprint {
    pub dim: usize,
    pub killing_rank: usize,
    pub center_dim: usize,
}

#[derive(Clone, Debug)]
pub struct Invariant {
    pub name: String,
    pub left: Value,
    pub right: Value,
}

impl Invariant {
    pub fn distinguishes(&self) -> bool {
        self.left != self.right
    }
}

#[derive(Clone, Debug)]
pub struct NonisoCertificate {
    pub transcript: Vec<TranscriptLine>,
    pub invariants: Vec<Invariant>,
}

impl NonisoCertificate {
    /// Every element of `Out(A)` was tried and none conjugates `p(σ1)` to
    /// `p(σ2)^{±1}`.
    pub fn is_exhaustive(&self, out: &OutGroup) -> bool {
        self.transcript.len() == out.order() && self.transcript.iter().all(|t| !t.hits_target && !t.hits_inverse)
    }

    pub fn distinguished_by_invariants(&self) -> bool {
        self.invariants.iter().any(Invariant::distinguishes)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "transcript": self.transcript.iter().map(|t| json!({
                "conjugator": t.conjugator.to_json(),
                "image": t.image.to_json(),
                "hits": t.hits_target,
                "hits_inverse": t.hits_inverse,
            })).collect::<Vec<_>>(),
            "invariants": self.invariants.iter().map(|i| json!({
                "name": i.name, "left": i.left, "right": i.right, "distinguishes": i.distinguishes(),
            })).collect::<Vec<_>>(),
            "conclusive_invariants": self.distinguished_by_invariants(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub isomorphic: bool,
    pub base: String,
    pub m: u32,
    pub p1: OutElement,
    pub p2: OutElement,
    /// `g` with `g p(σ1) g⁻¹ = p(σ2)` (`false`) or `p(σ2)⁻¹` (`true`).
    pub conjugator: Option<(OutElement, bool)>,
    pub witness: Option<WitnessStatus>,
    pub certificate: Option<NonisoCertificate>,
    pub derived: bool,
}

impl Verdict {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "result": if self.isomorphic { "isomorphic" } else { "not_isomorphic" },
            "base": self.base,
            "algebra": if self.derived { "derived" } else { "full" },
            "m": self.m,
            "p1": self.p1.to_json(),
            "p2": self.p2.to_json(),
            "scope": SCOPE,
        });
        if let Some((g, inv)) = &self.conjugator {
            v["conjugator"] = json!({"element": g.to_json(), "to_inverse": inv});
        }
        match &self.witness {
            Some(WitnessStatus::Built(w)) => v["witness"] = w.to_json(),
            Some(WitnessStatus::Withheld(r)) => v["witness"] = json!({"withheld": r}),
            None => {}
        }
        if let Some(c) = &self.certificate {
            v["certificate"] = c.to_json();
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct DecideOptions {
    pub witness: bool,
    pub invariants: bool,
    pub centroid: bool,
    pub window: Option<i64>,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions { witness: true, invariants: true, centroid: false, window: None }
    }
}

impl DecideOptions {
    pub fn verdict_only() -> Self {
        DecideOptions { witness: false, invariants: false, centroid: false, window: None }
    }
}

fn label_of(g: &Gcm) -> String {
    match g.classify() {
        CartanType::Finite(l) | CartanType::Affine(l) => l,
        CartanType::Indefinite => "indefinite".into(),
    }
}

/// `eval(w)^m = id`, decided on normal forms when no elementary factor occurs.
pub fn check_period(g: &Gcm, base: Option<&LieAlgebra>, w: &AutWord, m: u32) -> Result<()> {
    w.validate(g)?;
    if m == 0 {
        return Err(Error::schema("/m", "period must be positive"));
    }
    let ok = if w.has_elementary() {
        let l = match base {
            Some(l) => l,
            None => return Err(Error::Unsupported("elementary factors need a finite-type base".into())),
        };
        has_period(&eval_word(w, l)?, l, m)?
    } else {
        let nf = normal_form(&w.pow(m), g.n())?;
        nf.to_word().is_empty()
    };
    if ok {
        Ok(())
    } else {
        Err(Error::NotPeriod(m))
    }
}

pub fn decide_iso(g: &Gcm, w1: &AutWord, w2: &AutWord, m: u32) -> Result<Verdict> {
    decide_with(g, w1, w2, m, &DecideOptions::default())
}

pub fn decide_with(g: &Gcm, w1: &AutWord, w2: &AutWord, m: u32, opts: &DecideOptions) -> Result<Verdict> {
    let ty = g.classify();
    if matches!(ty, CartanType::Indefinite) {
        return Err(Error::WrongType("decisions need a finite or affine matrix".into()));
    }
    let finite = ty.is_finite();
    let needs_base = finite && (opts.witness || opts.invariants || w1.has_elementary() || w2.has_elementary());
    let base = if needs_base { Some(Arc::new(LieAlgebra::build_finite(g)?)) } else { None };
    check_period(g, base.as_deref(), w1, m)?;
    check_period(g, base.as_deref(), w2, m)?;
    let out = OutGroup::new(g)?;
    let p1 = out.project_word(w1);
    let p2 = out.project_word(w2);
    let transcript = out.transcript(&p1, &p2);
    let conjugator = transcript
        .iter()
        .find(|t| t.hits_target)
        .or_else(|| transcript.iter().find(|t| t.hits_inverse))
        .map(|t| (t.conjugator.clone(), !t.hits_target));
    let isomorphic = conjugator.is_some();
    let mut verdict = Verdict {
        isomorphic,
        base: label_of(g),
        m,
        p1,
        p2,
        conjugator: conjugator.clone(),
        witness: None,
        certificate: None,
        derived: false,
    };
    if isomorphic && opts.witness {
        verdict.witness = Some(match &base {
            None => WitnessStatus::Withheld("loop algebras over an affine base are not modelled".into()),
            Some(l) => match build_witness_in(l, w1, w2, m, &conjugator.expect("isomorphic"), opts.window) {
                Ok(w) => WitnessStatus::Built(Box::new(w)),
                Err(Error::SecondKindUnsupported(r)) => WitnessStatus::Withheld(r),
                Err(e) => return Err(e),
            },
        });
    }
    if !isomorphic {
        verdict.certificate = Some(if opts.invariants {
            certificate_in(g, base.as_ref(), w1, w2, m, opts)?
        } else {
            NonisoCertificate { transcript, invariants: Vec::new() }
        });
    }
    Ok(verdict)
}

/// Same criterion for `g′ = [g, g]`; the projection `p′` of a restricted
/// automorphism agrees with `p`.
pub fn decide_iso_derived(g: &Gcm, w1: &AutWord, w2: &AutWord, m: u32) -> Result<Verdict> {
    let mut v = decide_with(g, w1, w2, m, &DecideOptions::verdict_only())?;
    v.derived = true;
    Ok(v)
}

#[derive(Clone, Debug)]
enum Step {
    Conj(AutWord),
    Up(u32),
    Down(u32),
    Erase { b: Vec<i64>, c: Vec<i64>, level: u32, target: AutWord },
}

/// Steps from `L_m(g, w)` to `L_m(g, ν)` for `w = ν·Ad(a)` up to reordering.
fn first_kind_steps(l: &LieAlgebra, w: &AutWord, m: u32) -> Result<Vec<Step>> {
    let n = l.rank();
    if w.has_elementary() {
        return Err(Error::NotNormalForm("conjugate the elementary factors away first".into()));
    }
    let nf = normal_form(w, n)?;
    if nf.omega {
        return Err(Error::SecondKindUnsupported(
            "the word has a Chevalley involution factor; the verdict stands but no witness chain is assembled".into(),
        ));
    }
    let nu = AutWord::diagram(nf.perm.clone());
    let big_n = root_lattice_action(&nu, n)?;
    let mut steps = Vec::new();
    if nf.exps.iter().all(|&a| a == 0) {
        return Ok(steps);
    }
    // Ad(-b) ν Ad(a) Ad(b) = ν Ad(c) with c∘(N - id) = 0
    let data = erasing_data(&big_n, &nf.exps, nf.m)?;
    let level = data.level();
    if data.b.iter().any(|&x| x != 0) {
        let s: Vec<i64> = data.b.iter().map(|x| -x).collect();
        steps.push(Step::Conj(AutWord(vec![AutGen::adr(s, level)])));
    }
    let mut a_erase = Vec::with_capacity(n);
    for &cj in &data.c {
        let num = cj * m as i64;
        if num % level as i64 != 0 {
            return Err(Error::Verification("diagonal part is not of period m".into()));
        }
        a_erase.push((num / level as i64).rem_euclid(m as i64));
    }
    if a_erase.iter().all(|&x| x == 0) {
        return Ok(steps);
    }
    let ed = erasing_data(&big_n, &a_erase, m)?;
    let d = matrix_order(&big_n, 720)?;
    if d > 1 {
        steps.push(Step::Up(d));
    }
    steps.push(Step::Erase {
        b: ed.b.iter().map(|x| -x).collect(),
        c: ed.c.iter().map(|x| -x).collect(),
        level: d * m,
        target: nu,
    });
    if d > 1 {
        steps.push(Step::Down(d));
    }
    Ok(steps)
}

fn realize(l: &Arc<LieAlgebra>, src: &Arc<LoopAlgebra>, step: &Step, window: i64) -> Result<LoopMap> {
    let linear = Semilinearity::linear();
    match step {
        Step::Conj(tau) => conjugation_iso(src, tau),
        Step::Up(e) => {
            let tgt = build_loop(l, src.sigma(), src.m() * e, Some(window))?;
            Ok(LoopMap { source: src.clone(), target: Arc::new(tgt), kind: MapKind::PeriodChange { e: *e }, semilinear: linear })
        }
        Step::Down(e) => {
            let tgt = build_loop(l, src.sigma(), src.m() / e, Some(window))?;
            Ok(LoopMap { source: src.clone(), target: Arc::new(tgt), kind: MapKind::PeriodDivide { e: *e }, semilinear: linear })
        }
        Step::Erase { b, c, level, target } => {
            let tgt = build_loop(l, target, src.m(), Some(window))?;
            Ok(LoopMap {
                source: src.clone(),
                target: Arc::new(tgt),
                kind: MapKind::Erasing { b: b.clone(), c: c.clone(), level: *level },
                semilinear: linear,
            })
        }
    }
}

fn invert_link(f: &LoopMap) -> Result<LoopMap> {
    let kind = match &f.kind {
        MapKind::Conjugation { tau, .. } => {
            let inv = tau.inverse();
            let matrix = eval_word(&inv, f.source.base())?;
            MapKind::Conjugation { tau: inv, matrix }
        }
        MapKind::PeriodChange { e } => MapKind::PeriodDivide { e: *e },
        MapKind::PeriodDivide { e } => MapKind::PeriodChange { e: *e },
        MapKind::Erasing { b, c, level } => {
            MapKind::Erasing { b: b.iter().map(|x| -x).collect(), c: c.iter().map(|x| -x).collect(), level: *level }
        }
        MapKind::Inverse => MapKind::Inverse,
        MapKind::Identity => MapKind::Identity,
        _ => return Err(Error::Unsupported("inverse of this link".into())),
    };
    let semilinear = if matches!(kind, MapKind::Inverse) { Semilinearity { a: CycNum::one(), sign: -1 } } else { Semilinearity::linear() };
    Ok(LoopMap { source: f.target.clone(), target: f.source.clone(), kind, semilinear })
}

fn chain_from(l: &Arc<LieAlgebra>, start: Arc<LoopAlgebra>, steps: &[Step], window: i64) -> Result<Vec<LoopMap>> {
    let mut cur = start;
    let mut out = Vec::new();
    for s in steps {
        let f = realize(l, &cur, s, window)?;
        cur = f.target.clone();
        out.push(f);
    }
    Ok(out)
}

fn map_level(f: &LoopMap) -> u32 {
    let mut level = f.source.m().max(f.target.m());
    match &f.kind {
        MapKind::Erasing { level: lv, .. } => level = num_integer::lcm(level, *lv),
        MapKind::Conjugation { tau, .. } => {
            for g in tau.gens() {
                if let AutGen::AdR { m, .. } = g {
                    level = num_integer::lcm(level, *m);
                }
            }
        }
        _ => {}
    }
    level
}

/// Explicit verified chain `L_m(g, w1) → L_m(g, w2)` for words of the first kind.
pub fn build_witness(g: &Gcm, w1: &AutWord, w2: &AutWord, m: u32, window: Option<i64>) -> Result<IsoWitness> {
    if !g.classify().is_finite() {
        return Err(Error::Unsupported("loop algebras over an affine base".into()));
    }
    let l = Arc::new(LieAlgebra::build_finite(g)?);
    check_period(g, Some(&l), w1, m)?;
    check_period(g, Some(&l), w2, m)?;
    let out = OutGroup::new(g)?;
    let (p1, p2) = (out.project_word(w1), out.project_word(w2));
    let t = out.transcript(&p1, &p2);
    let conj = t
        .iter()
        .find(|t| t.hits_target)
        .or_else(|| t.iter().find(|t| t.hits_inverse))
        .map(|t| (t.conjugator.clone(), !t.hits_target))
        .ok_or_else(|| Error::Verification("p(σ1) and p(σ2) are not equivalent".into()))?;
    build_witness_in(&l, w1, w2, m, &conj, window)
}

fn build_witness_in(
    l: &Arc<LieAlgebra>,
    w1: &AutWord,
    w2: &AutWord,
    m: u32,
    conj: &(OutElement, bool),
    window: Option<i64>,
) -> Result<IsoWitness> {
    let window = window.unwrap_or_else(|| default_window(m));
    let steps1 = first_kind_steps(l, w1, m)?;
    let steps2 = first_kind_steps(l, w2, m)?;
    if conj.0.omega {
        return Err(Error::SecondKindUnsupported("conjugator involves the Chevalley involution".into()));
    }
    let start = Arc::new(build_loop(l, w1, m, Some(window))?);
    let end = Arc::new(build_loop(l, w2, m, Some(window))?);
    let mut links = chain_from(l, start, &steps1, window)?;
    let back = chain_from(l, end.clone(), &steps2, window)?;
    let mid_src = links.last().map(|f| f.target.clone()).unwrap_or_else(|| Arc::new(build_loop(l, w1, m, Some(window)).expect("built above")));
    let mid_end = back.last().map(|f| f.target.clone()).unwrap_or(end);
    // mid_src has σ = ν1, mid_end has σ = ν2
    let mu = AutWord::diagram(conj.0.perm.clone());
    if conj.1 {
        let c = conjugation_iso(&mid_src, &mu)?;
        let inv = LoopMap { target: mid_end, ..inverse_iso(&c.target)? };
        links.push(c);
        links.push(inv);
    } else if !conj.0.is_identity() {
        links.push(LoopMap { target: mid_end, ..conjugation_iso(&mid_src, &mu)? });
    }
    for f in back.iter().rev() {
        links.push(invert_link(f)?);
    }
    // splice well-typed: each target is literally the next source
    for k in 1..links.len() {
        if !Arc::ptr_eq(&links[k - 1].target, &links[k].source) {
            let s = links[k - 1].target.clone();
            links[k].source = s;
        }
    }
    let pair_window = 1;
    let mut verified = Vec::with_capacity(links.len());
    for f in links {
        let report = f.verify(pair_window)?;
        verified.push(Link { map: f, report });
    }
    let (composite, level) = match verified.split_first() {
        None => {
            let la = Arc::new(build_loop(l, w1, m, Some(window))?);
            (crate::loops::identity_map(&la), m)
        }
        Some((first, rest)) => {
            let mut c = first.map.clone();
            let mut level = map_level(&first.map);
            for f in rest {
                c = f.map.after(&c);
                level = num_integer::lcm(level, map_level(&f.map));
            }
            (c, level)
        }
    };
    if composite.source.m() != m || composite.target.m() != m {
        return Err(Error::Verification("witness chain does not return to period m".into()));
    }
    let expect_target = eval_word(w2, l)?;
    if composite.target.sigma_matrix() != &expect_target {
        return Err(Error::Verification("witness chain ends at the wrong loop algebra".into()));
    }
    let replay = composite.verify(pair_window)?;
    Ok(IsoWitness { semilinearity: composite.semilinear.clone(), links: verified, replay, level })
}

/// Dimension, Killing rank and center of the degree-zero component.
pub fn degree_zero_fingerprint(la: &LoopAlgebra) -> Result<Fingerprint> {
    let base = la.base();
    let basis: Vec<Element> = la.component(0).to_vec();
    let n = basis.len();
    let mut ad: Vec<Vec<Vec<CycNum>>> = Vec::with_capacity(n);
    for x in &basis {
        let mut mat = vec![vec![CycNum::zero(); n]; n];
        for (j, y) in basis.iter().enumerate() {
            let br = base.bracket(x, y)?;
            let c = la.coords(0, &br).ok_or_else(|| Error::Verification("degree-zero part is not closed".into()))?;
            for (k, v) in c.into_iter().enumerate() {
                mat[k][j] = v;
            }
        }
        ad.push(mat);
    }
    let mut kil = vec![vec![CycNum::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut t = CycNum::zero();
            for a in 0..n {
                for b in 0..n {
                    t += &(&ad[i][a][b] * &ad[j][b][a]);
                }
            }
            kil[i][j] = t;
        }
    }
    let stacked: Vec<Vec<CycNum>> = ad.iter().flat_map(|m| m.iter().cloned()).collect();
    let center_dim = if n == 0 { 0 } else { nullspace(&stacked, n).len() };
    Ok(Fingerprint { dim: n, killing_rank: rank(&kil), center_dim })
}

fn certificate_in(
    g: &Gcm,
    base: Option<&Arc<LieAlgebra>>,
    w1: &AutWord,
    w2: &AutWord,
    m: u32,
    opts: &DecideOptions,
) -> Result<NonisoCertificate> {
    let out = OutGroup::new(g)?;
    let transcript = out.transcript(&out.project_word(w1), &out.project_word(w2));
    let l = match base {
        Some(l) => l,
        None => return Ok(NonisoCertificate { transcript, invariants: Vec::new() }),
    };
    let window = opts.window.unwrap_or_else(|| default_window(m));
    let l1 = build_loop(l, w1, m, Some(window))?;
    let l2 = build_loop(l, w2, m, Some(window))?;
    let mut invariants = vec![Invariant {
        name: "graded dimensions over one period".into(),
        left: json!(l1.period_dims()),
        right: json!(l2.period_dims()),
    }];
    let (f1, f2) = (degree_zero_fingerprint(&l1)?, degree_zero_fingerprint(&l2)?);
    let fp = |f: &Fingerprint| json!({"dim": f.dim, "killing_rank": f.killing_rank, "center_dim": f.center_dim});
    invariants.push(Invariant { name: "degree-zero fingerprint".into(), left: fp(&f1), right: fp(&f2) });
    if opts.centroid {
        let c1 = loop_centroid(&l1, window)?;
        let c2 = loop_centroid(&l2, window)?;
        invariants.push(Invariant { name: "centroid graded ranks".into(), left: json!(c1.ranks), right: json!(c2.ranks) });
    }
    Ok(NonisoCertificate { transcript, invariants })
}

/// Certificate for a negative verdict: the exhaustive conjugacy transcript
/// plus invariant comparisons of the two loop algebras.
pub fn noniso_certificate(g: &Gcm, w1: &AutWord, w2: &AutWord, m: u32, window: Option<i64>, centroid: bool) -> Result<NonisoCertificate> {
    let l = Arc::new(LieAlgebra::build_finite(g)?);
    check_period(g, Some(&l), w1, m)?;
    check_period(g, Some(&l), w2, m)?;
    certificate_in(g, Some(&l), w1, w2, m, &DecideOptions { witness: false, invariants: true, centroid, window })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub base: String,
    pub rank: usize,
    pub class: Vec<OutElement>,
    pub order: u32,
    pub label: String,
}

impl TableRow {
    pub fn representative(&self) -> &OutElement {
        &self.class[0]
    }

    pub fn to_json(&self) -> Value {
        json!({
            "base": self.base,
            "rank": self.rank,
            "representative": self.representative().to_json(),
            "class_size": self.class.len(),
            "order": self.order,
            "label": self.label,
        })
    }

    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.base,
            self.rank,
            self.representative(),
            self.class.len(),
            self.order,
            self.label
        )
    }
}

#[derive(Clone, Debug)]
pub struct AffineTable {
    pub rows: Vec<TableRow>,
    /// Same-base pairs of classes checked to give nonisomorphic loop algebras.
    pub distinct_pairs: usize,
    pub all_distinct: bool,
}

impl AffineTable {
    pub fn labels(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.label.clone()).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rows": self.rows.iter().map(TableRow::to_json).collect::<Vec<_>>(),
            "distinct_pairs": self.distinct_pairs,
            "all_distinct": self.all_distinct,
        })
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("base\trank\trepresentative\tclass_size\torder\tlabel\n");
        for r in &self.rows {
            s.push_str(&r.to_tsv());
            s.push('\n');
        }
        s
    }
}

/// `L(g, σ)` for finite-type `g` of rank `≤ max_rank`, one row per
/// `∼`-class of `Aut(A)`, labelled `X_N^(r)` with `r` the class order.
pub fn affine_table(max_rank: usize) -> Result<AffineTable> {
    if max_rank > 8 {
        return Err(Error::schema("/max_rank", "at most 8"));
    }
    let mut rows = Vec::new();
    let mut distinct_pairs = 0;
    let mut all_distinct = true;
    for n in 1..=max_rank {
        for (series, r) in catalog::finite_types(n) {
            let label = catalog::finite_label(series, r);
            let g = Gcm::from_label(&label)?;
            let out = OutGroup::new(&g)?;
            let classes = out.tilde_classes();
            for (i, ci) in classes.iter().enumerate() {
                for cj in classes.iter().skip(i + 1) {
                    let (a, b) = (&ci[0], &cj[0]);
                    let m = num_integer::lcm(a.order(), b.order());
                    let wa = AutWord::diagram(a.perm.clone());
                    let wb = AutWord::diagram(b.perm.clone());
                    let v = decide_with(&g, &wa, &wb, m, &DecideOptions::verdict_only())?;
                    distinct_pairs += 1;
                    all_distinct &= !v.isomorphic;
                }
            }
            for class in classes {
                let order = class[0].order();
                rows.push(TableRow { base: label.clone(), rank: n, label: catalog::twisted_label(&label, order), order, class });
            }
        }
    }
    Ok(AffineTable { rows, distinct_pairs, all_distinct })
}

/// A seeded pair of words of period `m` over `g` (finite type), mixing
/// conjugate and unrelated outer parts, diagonal factors and conjugations.
pub fn random_word_pair(g: &Gcm, seed: u64, max_m: u32) -> Result<(AutWord, AutWord, u32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = OutGroup::new(g)?;
    let n = g.n();
    let elems = out.elements().to_vec();
    let pick = |rng: &mut ChaCha8Rng| elems.choose(rng).expect("nonempty").clone();
    let outer_word = |e: &OutElement, omega: bool| -> AutWord {
        let mut w = AutWord::diagram(e.perm.clone());
        if omega {
            w = AutWord::omega().then(&w);
        }
        w
    };
    let x1 = pick(&mut rng);
    let x2 = if rng.gen_bool(0.5) {
        let c = pick(&mut rng);
        let y = out.conjugate(&c, &x1);
        if rng.gen_bool(0.5) {
            y.inverse()
        } else {
            y
        }
    } else {
        pick(&mut rng)
    };
    let om1 = rng.gen_bool(0.15);
    let om2 = rng.gen_bool(0.15);
    let ord = |e: &OutElement, om: bool| -> u32 {
        let p = perm_order(&e.perm);
        if om {
            num_integer::lcm(p, 2)
        } else {
            p
        }
    };
    let base_order = num_integer::lcm(ord(&x1, om1), ord(&x2, om2));
    let choices: Vec<u32> = (1..=max_m).filter(|k| k % base_order == 0).collect();
    let m = *choices.choose(&mut rng).ok_or(Error::NotPeriod(base_order))?;
    let decorate = |rng: &mut ChaCha8Rng, outer: AutWord| -> Result<AutWord> {
        let mut w = outer.clone();
        for _ in 0..8 {
            let a: Vec<i64> = (0..n).map(|_| rng.gen_range(0..m as i64)).collect();
            let cand = outer.then(&AutWord::adr(a, m));
            if normal_form(&cand.pow(m), n)?.to_word().is_empty() {
                w = cand;
                break;
            }
        }
        let k = rng.gen_range(1..=6u32);
        let s: Vec<i64> = (0..n).map(|_| rng.gen_range(0..k as i64)).collect();
        let tau = AutWord::diagram(pick(rng).perm).then(&AutWord::adr(s, k));
        Ok(if rng.gen_bool(0.7) { w.conjugate_by(&tau) } else { w })
    };
    let w1 = decorate(&mut rng, outer_word(&x1, om1))?;
    let w2 = decorate(&mut rng, outer_word(&x2, om2))?;
    Ok((w1, w2, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gcm(label: &str) -> Gcm {
        Gcm::from_label(label).unwrap()
    }

    #[test]
    fn basic_verdicts() {
        let a2 = gcm("A2");
        let flip = AutWord::diagram(vec![1, 0]);
        let v = decide_iso(&a2, &AutWord::adr(vec![1, 0], 2), &AutWord::identity(), 2).unwrap();
        assert!(v.isomorphic);
        let w = v.witness.as_ref().unwrap().built().unwrap();
        assert!(w.links.iter().any(|l| matches!(l.map.kind, MapKind::Erasing { .. })));
        assert!(w.semilinearity.is_linear());
        let v = decide_iso(&a2, &flip, &AutWord::identity(), 2).unwrap();
        assert!(!v.isomorphic);
        let cert = v.certificate.unwrap();
        assert!(cert.is_exhaustive(&OutGroup::new(&a2).unwrap()));
        assert_eq!(cert.transcript.len(), 2);
        assert_eq!(cert.invariants[0].left, json!([3, 5]));
        assert_eq!(cert.invariants[0].right, json!([8, 0]));
        assert!(cert.distinguished_by_invariants());
        assert!(matches!(decide_iso(&a2, &flip, &AutWord::identity(), 3), Err(Error::NotPeriod(3))));
    }

    #[test]
    fn d4_triality_and_inverse() {
        let d4 = gcm("D4");
        let c = AutWord::diagram(vec![2, 1, 3, 0]);
        let v = decide_iso(&d4, &c, &c.inverse(), 3).unwrap();
        assert!(v.isomorphic);
        let w = v.witness.unwrap();
        let w = w.built().unwrap();
        assert!(w.semilinearity.is_linear());
        let flip = AutWord::diagram(vec![2, 1, 0, 3]);
        let v = decide_iso(&d4, &c, &flip, 6).unwrap();
        assert!(!v.isomorphic);
    }

    #[test]
    fn same_word_and_erasing_link() {
        let a3 = gcm("A3");
        let flip = AutWord::diagram(vec![2, 1, 0]);
        let w = build_witness(&a3, &flip, &flip, 2, Some(3)).unwrap();
        assert!(w.links.is_empty());
        let w1 = flip.then(&AutWord::adr(vec![1, 0, 1], 2));
        let w = build_witness(&a3, &w1, &flip, 4, Some(4)).unwrap();
        assert!(w.links.iter().any(|l| matches!(l.map.kind, MapKind::Erasing { .. })));
        assert!(w.semilinearity.is_linear());
    }

    #[test]
    fn second_kind_withheld() {
        let a2 = gcm("A2");
        let v = decide_iso(&a2, &AutWord::omega(), &AutWord::diagram(vec![1, 0]), 2).unwrap();
        assert!(v.isomorphic);
        assert!(matches!(v.witness, Some(WitnessStatus::Withheld(_))));
        let a1 = gcm("A1^(1)");
        let v = decide_iso(&a1, &AutWord::omega(), &AutWord::identity(), 2).unwrap();
        assert!(!v.isomorphic);
        let v = decide_iso(&a1, &AutWord::diagram(vec![1, 0]), &AutWord::diagram(vec![1, 0]), 2).unwrap();
        assert!(matches!(v.witness, Some(WitnessStatus::Withheld(_))));
        let d = decide_iso_derived(&a1, &AutWord::omega(), &AutWord::identity(), 2).unwrap();
        assert!(!d.isomorphic && d.derived);
    }

    #[test]
    fn fingerprints() {
        let l = Arc::new(LieAlgebra::build_finite(&gcm("A2")).unwrap());
        let la = build_loop(&l, &AutWord::diagram(vec![1, 0]), 2, Some(2)).unwrap();
        assert_eq!(degree_zero_fingerprint(&la).unwrap(), Fingerprint { dim: 3, killing_rank: 3, center_dim: 0 });
        let la = build_loop(&l, &AutWord::adr(vec![1, 0], 2), 2, Some(2)).unwrap();
        assert_eq!(degree_zero_fingerprint(&la).unwrap(), Fingerprint { dim: 4, killing_rank: 3, center_dim: 1 });
    }

    #[test]
    fn small_table() {
        let t = affine_table(2).unwrap();
        assert_eq!(t.labels(), vec!["A1^(1)", "A2^(1)", "A2^(2)", "C2^(1)", "G2^(1)"]);
        assert!(t.all_distinct);
    }

    #[test]
    fn seeded_pairs_are_consistent() {
        for seed in 0..12 {
            for label in ["A2", "A3"] {
                let g = gcm(label);
                let (w1, w2, m) = random_word_pair(&g, seed, 6).unwrap();
                let v = decide_with(&g, &w1, &w2, m, &DecideOptions::verdict_only()).unwrap();
                let d = decide_iso_derived(&g, &w1, &w2, m).unwrap();
                assert_eq!(v.isomorphic, d.isomorphic);
                let s = decide_with(&g, &w2, &w1, m, &DecideOptions::verdict_only()).unwrap();
                assert_eq!(v.isomorphic, s.isomorphic);
            }
        }
    }
}
