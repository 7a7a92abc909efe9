//! Removing a commuting diagonal factor `ρ = Ad(r)` from `τρ`:
//! `L(g, τρ) ≅_R L(g, τ)` through the degree-shifting automorphism
//! `φ(x_α ⊗ z^i) = ζ_{dm}^{b(α)} x_α ⊗ z^{i + c(α)}` of `g ⊗ S_{dm}`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::autos::{eval_word, has_period, root_lattice_action, AutGen, AutWord};
use crate::error::{Error, Result};
use crate::liealg::{Element, LieAlgebra};
use crate::loops::{build_loop, LoopElement, LoopMap, MapKind, Semilinearity};
use crate::scalars::CycNum;

pub type IntMatrix = Vec<Vec<i64>>;

/// `g(x) = Σ_{i=0}^{d-2} (d-i-1) x^i`, coefficients from `x^0` up; `g = 0` for `d = 1`.
pub fn gd_polynomial(d: u32) -> Vec<i64> {
    let d = d as i64;
    (0..(d - 1).max(0)).map(|i| d - i - 1).collect()
}

pub fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    while out.last() == Some(&0) {
        out.pop();
    }
    out
}

/// `g(x)(x-1)^2 = x^d - dx + d - 1` as integer polynomials.
pub fn gd_identity_holds(d: u32) -> bool {
    let lhs = poly_mul(&gd_polynomial(d), &[1, -2, 1]);
    let di = d as i64;
    let mut rhs = vec![0; d as usize + 1];
    rhs[0] += di - 1;
    rhs[1] -= di;
    rhs[d as usize] += 1;
    while rhs.last() == Some(&0) {
        rhs.pop();
    }
    lhs == rhs
}

fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn mat_id(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

fn mat_sub_id(a: &IntMatrix) -> IntMatrix {
    let mut out = a.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] -= 1;
    }
    out
}

/// Covector times matrix: `(v ∘ A)(α_j) = Σ_i v_i A_{ij}`.
fn covec_mul(v: &[i64], a: &IntMatrix) -> Vec<i64> {
    (0..v.len()).map(|j| v.iter().enumerate().map(|(i, x)| x * a[i][j]).sum()).collect()
}

fn poly_eval(p: &[i64], a: &IntMatrix) -> IntMatrix {
    let n = a.len();
    let mut acc = vec![vec![0; n]; n];
    for c in p.iter().rev() {
        acc = mat_mul(&acc, a);
        for (i, row) in acc.iter_mut().enumerate() {
            row[i] += c;
        }
    }
    acc
}

/// Exact order of an integer matrix, up to `bound`.
pub fn matrix_order(a: &IntMatrix, bound: u32) -> Result<u32> {
    let id = mat_id(a.len());
    let mut p = a.clone();
    for k in 1..=bound {
        if p == id {
            return Ok(k);
        }
        p = mat_mul(&p, a);
    }
    Err(Error::NotFiniteOrder(bound))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErasingData {
    pub d: u32,
    pub m: u32,
    pub a: Vec<i64>,
    pub tau_hat: IntMatrix,
    pub b: Vec<i64>,
    pub c: Vec<i64>,
}

impl ErasingData {
    /// `b∘(τ̂ − id) + c = d·a`
    pub fn need1(&self) -> bool {
        let lhs = covec_mul(&self.b, &mat_sub_id(&self.tau_hat));
        lhs.iter().zip(&self.c).zip(&self.a).all(|((x, y), a)| x + y == self.d as i64 * a)
    }

    /// `c∘(τ̂ − id) = 0`
    pub fn need2(&self) -> bool {
        covec_mul(&self.c, &mat_sub_id(&self.tau_hat)).iter().all(|&x| x == 0)
    }

    pub fn level(&self) -> u32 {
        self.d * self.m
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d, "m": self.m, "a": self.a, "tau_hat": self.tau_hat,
            "b": self.b, "c": self.c, "need1": self.need1(), "need2": self.need2(),
        })
    }
}

const ORDER_BOUND: u32 = 720;

/// `b = −a∘g(τ̂)`, `c = d·a − b∘(τ̂ − id)` for `d` the exact order of `τ̂`.
pub fn erasing_data(tau_hat: &IntMatrix, a: &[i64], m: u32) -> Result<ErasingData> {
    if tau_hat.len() != a.len() || tau_hat.iter().any(|r| r.len() != a.len()) {
        return Err(Error::schema("/a", "length does not match the rank of the root lattice"));
    }
    let d = matrix_order(tau_hat, ORDER_BOUND)?;
    let g = poly_eval(&gd_polynomial(d), tau_hat);
    let b: Vec<i64> = covec_mul(a, &g).into_iter().map(|x| -x).collect();
    let bt = covec_mul(&b, &mat_sub_id(tau_hat));
    let c: Vec<i64> = a.iter().zip(&bt).map(|(x, y)| d as i64 * x - y).collect();
    let out = ErasingData { d, m, a: a.to_vec(), tau_hat: tau_hat.clone(), b, c };
    // g(τ̂)(τ̂ − id)² = −d(τ̂ − id)
    let t1 = mat_sub_id(tau_hat);
    let lhs = mat_mul(&g, &mat_mul(&t1, &t1));
    let rhs: IntMatrix = t1.iter().map(|r| r.iter().map(|x| -(d as i64) * x).collect()).collect();
    if lhs != rhs || !out.need1() || !out.need2() {
        return Err(Error::Verification("erasing data identities".into()));
    }
    Ok(out)
}

/// `a∘τ̂ ≡ a (mod m)`, i.e. `τ` and `Ad(a; m)` commute.
pub fn commutes(tau_hat: &IntMatrix, a: &[i64], m: u32) -> bool {
    covec_mul(a, tau_hat).iter().zip(a).all(|(x, y)| (x - y).rem_euclid(m as i64) == 0)
}

#[derive(Clone, Debug)]
pub struct Erasure {
    pub data: ErasingData,
    pub tau: AutWord,
    /// `τρ` with `ρ = Ad(a; m)`.
    pub tau_rho: AutWord,
    /// `L_{dm}(g, τ) → L_{dm}(g, τρ)`.
    pub map: LoopMap,
}

impl Erasure {
    pub fn to_json(&self) -> Value {
        json!({
            "tau": self.tau.to_json(),
            "tau_rho": self.tau_rho.to_json(),
            "data": self.data.to_json(),
            "map": self.map.to_json(),
        })
    }
}

fn max_shift(l: &LieAlgebra, c: &[i64]) -> i64 {
    l.basis().iter().map(|b| b.root.iter().zip(c).map(|(r, y)| r * y).sum::<i64>().abs()).max().unwrap_or(0)
}

/// The erasing automorphism for `τ` and `ρ = Ad(a; m)`, mapping
/// `L_{dm}(g, τ)` (window `window`) onto `L_{dm}(g, τρ)`.
pub fn erasing_iso(l: &Arc<LieAlgebra>, tau: &AutWord, a: &[i64], m: u32, window: Option<i64>) -> Result<Erasure> {
    let n = l.rank();
    if a.len() != n {
        return Err(Error::schema("/a", format!("expected {n} entries")));
    }
    let tau_hat = root_lattice_action(tau, n)?;
    if !commutes(&tau_hat, a, m) {
        return Err(Error::NotCommuting(format!("a = {a:?} is not τ̂-invariant mod {m}")));
    }
    let tm = eval_word(tau, l)?;
    if !has_period(&tm, l, m)? {
        return Err(Error::NotPeriod(m));
    }
    let data = erasing_data(&tau_hat, a, m)?;
    let level = data.level();
    let rho = AutWord(vec![AutGen::adr(a.to_vec(), m)]);
    let tau_rho = tau.then(&rho);
    let w = window.unwrap_or(2 * level as i64);
    let src = build_loop(l, tau, level, Some(w))?;
    let tgt = build_loop(l, &tau_rho, level, Some(w + max_shift(l, &data.c)))?;
    let map = LoopMap {
        source: Arc::new(src),
        target: Arc::new(tgt),
        kind: MapKind::Erasing { b: data.b.clone(), c: data.c.clone(), level },
        semilinear: Semilinearity::linear(),
    };
    Ok(Erasure { data, tau: tau.clone(), tau_rho, map })
}

/// `φ (τ ⊗ 1⁻¹) = (τρ ⊗ 1⁻¹) φ` on every `x_α ⊗ z^i`, `|i| ≤ window`,
/// where `1(z) = ζ_{dm} z`.
pub fn verify_conj(phi: &LoopMap, tau: &AutWord, a: &[i64], m: u32, window: i64) -> Result<bool> {
    let level = match &phi.kind {
        MapKind::Erasing { level, .. } => *level,
        _ => return Err(Error::schema("/map", "expected an erasing map")),
    };
    let l = phi.source.base();
    let t = eval_word(tau, l)?;
    let tr = eval_word(&tau.then(&AutWord(vec![AutGen::adr(a.to_vec(), m)])), l)?;
    let step = |mat: &crate::autos::AutMatrix, x: &LoopElement| -> Result<LoopElement> {
        let mut out = LoopElement::zero();
        for (d, v) in x.terms() {
            out.add_homogeneous(d, &mat.apply(v)?.scale(&CycNum::zeta_pow(level, -d)));
        }
        Ok(out)
    };
    for d in -window..=window {
        for bidx in 0..l.dim() {
            let x = LoopElement::homogeneous(d, Element::basis(bidx));
            let lhs = phi.apply(&step(&t, &x)?)?;
            let rhs = step(&tr, &phi.apply(&x)?)?;
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Seeded random integer vectors in `[-bound, bound]^n`, made `τ̂`-invariant
/// by summing over the `τ̂`-orbit so that `τ` and `Ad(a; m)` commute.
pub fn battery_vectors(tau_hat: &IntMatrix, count: usize, bound: i64, seed: u64) -> Result<Vec<Vec<i64>>> {
    let n = tau_hat.len();
    let d = matrix_order(tau_hat, ORDER_BOUND)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
        let mut acc = vec![0; n];
        let mut cur = raw;
        for _ in 0..d {
            for (x, y) in acc.iter_mut().zip(&cur) {
                *x += y;
            }
            cur = covec_mul(&cur, tau_hat);
        }
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcm::Gcm;
    use proptest::prelude::*;

    fn base(label: &str) -> Arc<LieAlgebra> {
        Arc::new(LieAlgebra::build_finite(&Gcm::from_label(label).unwrap()).unwrap())
    }

    #[test]
    fn polynomials() {
        assert_eq!(gd_polynomial(1), Vec::<i64>::new());
        assert_eq!(gd_polynomial(2), vec![1]);
        assert_eq!(gd_polynomial(3), vec![2, 1]);
        assert_eq!(poly_mul(&[2, 1], &[1, -2, 1]), vec![2, -3, 0, 1]);
        assert!((1..=64).all(gd_identity_holds));
    }

    #[test]
    fn data_examples() {
        let e = erasing_data(&vec![vec![1, 0], vec![0, 1]], &[3, -1], 4).unwrap();
        assert_eq!((e.d, e.b.clone(), e.c.clone()), (1, vec![0, 0], vec![3, -1]));
        let e = erasing_data(&vec![vec![-1]], &[1], 2).unwrap();
        assert_eq!((e.d, e.b.clone(), e.c.clone()), (2, vec![-1], vec![0]));
        let e = erasing_data(&vec![vec![0, 1], vec![1, 0]], &[1, 0], 2).unwrap();
        assert_eq!((e.d, e.b.clone(), e.c.clone()), (2, vec![-1, 0], vec![1, 1]));
        assert!(matches!(erasing_data(&vec![vec![1, 1], vec![0, 1]], &[1, 0], 2), Err(Error::NotFiniteOrder(_))));
    }

    #[test]
    fn sl2_shift() {
        let sl2 = base("A1");
        let er = erasing_iso(&sl2, &AutWord::identity(), &[1], 2, Some(3)).unwrap();
        assert_eq!(er.data.c, vec![1]);
        let e = sl2.e(0);
        let y = er.map.apply(&LoopElement::homogeneous(0, e.clone())).unwrap();
        assert_eq!(y, LoopElement::homogeneous(1, e));
        let f = sl2.f(0);
        let y = er.map.apply(&LoopElement::homogeneous(2, f.clone())).unwrap();
        assert_eq!(y, LoopElement::homogeneous(1, f));
        assert!(verify_conj(&er.map, &AutWord::identity(), &[1], 2, 3).unwrap());
        er.map.verify(2).unwrap();
    }

    #[test]
    fn sl3_flip() {
        let sl3 = base("A2");
        let flip = AutWord::diagram(vec![1, 0]);
        assert!(matches!(erasing_iso(&sl3, &flip, &[1, 0], 2, None), Err(Error::NotCommuting(_))));
        let er = erasing_iso(&sl3, &flip, &[1, 1], 2, Some(4)).unwrap();
        assert_eq!(er.data.level(), 4);
        assert!(verify_conj(&er.map, &flip, &[1, 1], 2, 4).unwrap());
        er.map.verify(1).unwrap();
        let mut broken = er.map.clone();
        if let MapKind::Erasing { b, .. } = &mut broken.kind {
            b[0] += 1;
        }
        assert!(!verify_conj(&broken, &flip, &[1, 1], 2, 2).unwrap());
        let zero = erasing_iso(&sl3, &flip, &[0, 0], 2, Some(2)).unwrap();
        assert_eq!((zero.data.b.clone(), zero.data.c.clone()), (vec![0, 0], vec![0, 0]));
    }

    #[test]
    fn omega_words() {
        let sl3 = base("A2");
        let w = AutWord::omega();
        for a in battery_vectors(&root_lattice_action(&w, 2).unwrap(), 3, 4, 7).unwrap() {
            let er = erasing_iso(&sl3, &w, &a, 2, Some(2)).unwrap();
            assert!(verify_conj(&er.map, &w, &a, 2, 2).unwrap());
        }
    }

    proptest! {
        #[test]
        fn need_identities(a in proptest::collection::vec(-20i64..20, 3), k in 0usize..6) {
            let perms = [[0, 1, 2], [1, 0, 2], [1, 2, 0], [2, 0, 1], [0, 2, 1], [2, 1, 0]];
            let p = perms[k];
            let t: IntMatrix = (0..3).map(|i| (0..3).map(|j| i64::from(p[j] == i)).collect()).collect();
            for sign in [1, -1] {
                let ts: IntMatrix = t.iter().map(|r| r.iter().map(|x| sign * x).collect()).collect();
                let e = erasing_data(&ts, &a, 6).unwrap();
                prop_assert!(e.need1() && e.need2());
            }
        }
    }
}
