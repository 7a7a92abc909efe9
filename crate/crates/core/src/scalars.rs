//! Exact arithmetic in the cyclotomic fields `Q(ζ_N)`.
//!
//! A [`CycNum`] is a vector of rationals in the power basis `1, ζ, …, ζ^{φ(N)-1}`
//! of `Q(ζ_N)`, always reduced modulo the `N`-th cyclotomic polynomial. The
//! primitive roots are the compatible system `ζ_N = exp(2πi/N)`, so
//! `ζ_{ℓm}^ℓ = ζ_m` holds for every `ℓ, m`. Binary operations lift both operands
//! to the lcm of their levels; values never change level in place.
//!
//! Levels `N ≡ 2 (mod 4)` are stored as `N/2` since `Q(ζ_{2k}) = Q(ζ_k)` for
//! odd `k`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parse `"p/q"` or `"p"` into a rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rat::new(p, q))
        }
        None => Some(Rat::from_integer(s.parse().ok()?)),
    }
}

pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn euler_phi(n: u32) -> usize {
    let mut result = n as u64;
    let mut m = n as u64;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result as usize
}

/// Smallest level hosting primitive roots of all the given orders.
pub fn minimal_level<I: IntoIterator<Item = u32>>(orders: I) -> u32 {
    orders.into_iter().fold(1, |acc, m| acc.lcm(&m.max(1)))
}

fn canonical_level(n: u32) -> u32 {
    if n % 4 == 2 {
        n / 2
    } else {
        n
    }
}

struct LevelData {
    phi: usize,
    /// `reduce[k]` holds `x^k mod Φ_N` for `0 <= k < N`.
    reduce: Vec<Vec<BigInt>>,
}

fn poly_divexact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    // den is monic
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![BigInt::zero(); num.len() - dd];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[k + j] -= &c * dj;
        }
        quot[k] = c;
    }
    debug_assert!(rem.iter().all(|r| r.is_zero()));
    quot
}

fn cyclotomic_poly(n: u32, cache: &mut HashMap<u32, Vec<BigInt>>) -> Vec<BigInt> {
    if let Some(p) = cache.get(&n) {
        return p.clone();
    }
    let mut p = vec![BigInt::zero(); n as usize + 1];
    p[0] = BigInt::from(-1);
    p[n as usize] = BigInt::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            let q = cyclotomic_poly(d, cache);
            p = poly_divexact(&p, &q);
        }
    }
    cache.insert(n, p.clone());
    p
}

fn build_level(n: u32) -> LevelData {
    let mut cache = HashMap::new();
    let phi_poly = cyclotomic_poly(n, &mut cache);
    let phi = phi_poly.len() - 1;
    let mut reduce = Vec::with_capacity(n as usize);
    let mut cur = vec![BigInt::zero(); phi];
    cur[0] = BigInt::one();
    for _ in 0..n {
        reduce.push(cur.clone());
        // multiply by x and reduce the overflow coefficient
        let top = cur[phi - 1].clone();
        for j in (1..phi).rev() {
            cur[j] = cur[j - 1].clone();
        }
        cur[0] = BigInt::zero();
        if !top.is_zero() {
            for j in 0..phi {
                cur[j] -= &top * &phi_poly[j];
            }
        }
    }
    LevelData { phi, reduce }
}

fn level_data(n: u32) -> Arc<LevelData> {
    static LEVELS: OnceLock<RwLock<HashMap<u32, Arc<LevelData>>>> = OnceLock::new();
    let levels = LEVELS.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(d) = levels.read().expect("level cache poisoned").get(&n) {
        return d.clone();
    }
    let data = Arc::new(build_level(n));
    levels
        .write()
        .expect("level cache poisoned")
        .entry(n)
        .or_insert(data)
        .clone()
}

/// An exact element of `Q(ζ_N)`.
#[derive(Clone, Debug)]
pub struct CycNum {
    level: u32,
    coeffs: Vec<Rat>,
}

impl CycNum {
    pub fn zero() -> Self {
        CycNum { level: 1, coeffs: vec![Rat::zero()] }
    }

    pub fn one() -> Self {
        CycNum { level: 1, coeffs: vec![Rat::one()] }
    }

    pub fn from_int(n: i64) -> Self {
        CycNum { level: 1, coeffs: vec![rat(n)] }
    }

    pub fn from_rat(r: Rat) -> Self {
        CycNum { level: 1, coeffs: vec![r] }
    }

    /// Build from power-basis coordinates at `level`. Fails if the length is
    /// not `φ(level)`.
    pub fn from_coeffs(level: u32, coeffs: Vec<Rat>) -> Result<Self> {
        if level == 0 {
            return Err(Error::Schema { path: "/level".into(), msg: "level must be positive".into() });
        }
        let phi = euler_phi(level);
        if coeffs.len() != phi {
            return Err(Error::Schema {
                path: "/coeffs".into(),
                msg: format!("expected {phi} coefficients for level {level}, got {}", coeffs.len()),
            });
        }
        let canon = canonical_level(level);
        if canon == level {
            return Ok(CycNum { level, coeffs }.normalized());
        }
        // level = 2k with k odd: rewrite through x_{2k} = -x_k^{(k+1)/2}
        let k = canon as i64;
        let mut acc = CycNum::zero();
        for (i, c) in coeffs.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc += &(CycNum::zeta_pow(level, i as i64).scale(&c));
        }
        debug_assert_eq!(acc.level % (k as u32), 0);
        Ok(acc)
    }

    /// The fixed primitive `m`-th root of unity.
    pub fn zeta(m: u32) -> Self {
        Self::zeta_pow(m, 1)
    }

    /// `ζ_m^k` for any integer `k`.
    pub fn zeta_pow(m: u32, k: i64) -> Self {
        assert!(m > 0, "root of unity order must be positive");
        let k = k.rem_euclid(m as i64);
        let canon = canonical_level(m);
        if canon == m {
            let data = level_data(m);
            let coeffs = data.reduce[k as usize].iter().cloned().map(Rat::from_integer).collect();
            return CycNum { level: m, coeffs }.normalized();
        }
        // ζ_{2c} = -ζ_c^{(c+1)/2} for odd c
        let c = canon as i64;
        let e = (k * ((c + 1) / 2)).rem_euclid(c);
        let base = Self::zeta_pow(canon, e);
        if k % 2 == 1 {
            -base
        } else {
            base
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// The value as a rational number, if it lies in `Q`.
    pub fn as_rat(&self) -> Option<&Rat> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn normalized(mut self) -> Self {
        if self.level > 1 && self.coeffs[1..].iter().all(|c| c.is_zero()) {
            let c = std::mem::take(&mut self.coeffs[0]);
            return CycNum { level: 1, coeffs: vec![c] };
        }
        self
    }

    /// Re-embed into `Q(ζ_n)`; `n` must be a multiple of the current level.
    pub fn lift(&self, n: u32) -> CycNum {
        let n = canonical_level(n);
        if n == self.level {
            return self.clone();
        }
        assert!(n.is_multiple_of(self.level), "cannot lift level {} to {}", self.level, n);
        let e = (n / self.level) as usize;
        let data = level_data(n);
        let mut coeffs = vec![Rat::zero(); data.phi];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = &data.reduce[(i * e) % n as usize];
            for (j, r) in row.iter().enumerate() {
                if !r.is_zero() {
                    coeffs[j] += c * r;
                }
            }
        }
        CycNum { level: n, coeffs }
    }

    fn common(a: &CycNum, b: &CycNum) -> u32 {
        a.level.lcm(&b.level)
    }

    pub fn scale(&self, r: &Rat) -> CycNum {
        if r.is_zero() {
            return CycNum::zero();
        }
        CycNum { level: self.level, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    pub fn scale_int(&self, k: i64) -> CycNum {
        match k {
            0 => CycNum::zero(),
            1 => self.clone(),
            -1 => -self.clone(),
            _ => {
                let k = BigInt::from(k);
                CycNum {
                    level: self.level,
                    coeffs: self.coeffs.iter().map(|c| c * &k).collect(),
                }
            }
        }
    }

    fn mul_same_level(&self, other: &CycNum) -> CycNum {
        let n = self.level;
        if n == 1 {
            return CycNum { level: 1, coeffs: vec![&self.coeffs[0] * &other.coeffs[0]] };
        }
        let data = level_data(n);
        let phi = data.phi;
        let mut conv = vec![Rat::zero(); 2 * phi - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    conv[i + j] += a * b;
                }
            }
        }
        let mut out = vec![Rat::zero(); phi];
        for (k, c) in conv.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k < phi {
                out[k] += c;
                continue;
            }
            let row = &data.reduce[k % n as usize];
            for (j, r) in row.iter().enumerate() {
                if !r.is_zero() {
                    out[j] += &c * r;
                }
            }
        }
        CycNum { level: n, coeffs: out }.normalized()
    }

    /// Multiplicative inverse; fails on zero.
    pub fn inv(&self) -> Result<CycNum> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(r) = self.as_rat() {
            return Ok(CycNum::from_rat(r.recip()));
        }
        // solve (self * x) = 1 through the multiplication matrix
        let phi = self.coeffs.len();
        let mut rows: Vec<Vec<Rat>> = vec![vec![Rat::zero(); phi + 1]; phi];
        for j in 0..phi {
            let basis = CycNum::zeta_pow(self.level, j as i64).lift(self.level);
            let col = self.mul_same_level(&basis).lift(self.level);
            for i in 0..phi {
                rows[i][j] = col.coeffs[i].clone();
            }
        }
        rows[0][phi] = Rat::one();
        for col in 0..phi {
            let piv = (col..phi).find(|&r| !rows[r][col].is_zero()).expect("multiplication matrix is invertible");
            rows.swap(col, piv);
            let p = rows[col][col].clone();
            for v in rows[col].iter_mut() {
                *v /= &p;
            }
            for r in 0..phi {
                if r != col && !rows[r][col].is_zero() {
                    let f = rows[r][col].clone();
                    for c in col..=phi {
                        let t = &f * &rows[col][c];
                        rows[r][c] -= t;
                    }
                }
            }
        }
        let coeffs = rows.into_iter().map(|mut r| r.pop().expect("augmented column")).collect();
        Ok(CycNum { level: self.level, coeffs }.normalized())
    }

    pub fn checked_div(&self, other: &CycNum) -> Result<CycNum> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<CycNum> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = CycNum::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// If this value is a root of unity, its exact multiplicative order.
    pub fn root_of_unity_order(&self) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        // every root of unity in Q(ζ_N) has order dividing lcm(2, N)
        let bound = self.level.lcm(&2);
        if !self.pow(bound as i64).ok()?.is_one() {
            return None;
        }
        (1..=bound)
            .filter(|d| bound.is_multiple_of(*d))
            .find(|&d| self.pow(d as i64).map(|v| v.is_one()).unwrap_or(false))
    }

    /// Write the value as `ζ_o^k` when it is a root of unity of order `o`.
    pub fn as_root_of_unity(&self) -> Option<(u32, i64)> {
        let o = self.root_of_unity_order()?;
        (0..o as i64).find(|&k| CycNum::zeta_pow(o, k) == *self).map(|k| (o, k))
    }
}

impl PartialEq for CycNum {
    fn eq(&self, other: &Self) -> bool {
        if self.level == other.level {
            return self.coeffs == other.coeffs;
        }
        let n = Self::common(self, other);
        self.lift(n).coeffs == other.lift(n).coeffs
    }
}

impl Eq for CycNum {}

impl Default for CycNum {
    fn default() -> Self {
        CycNum::zero()
    }
}

impl From<i64> for CycNum {
    fn from(n: i64) -> Self {
        CycNum::from_int(n)
    }
}

impl From<Rat> for CycNum {
    fn from(r: Rat) -> Self {
        CycNum::from_rat(r)
    }
}

impl<'a> Add<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn add(self, other: &CycNum) -> CycNum {
        if self.level == other.level {
            let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
            return CycNum { level: self.level, coeffs }.normalized();
        }
        let n = CycNum::common(self, other);
        &self.lift(n) + &other.lift(n)
    }
}

impl<'a> Sub<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn sub(self, other: &CycNum) -> CycNum {
        if self.level == other.level {
            let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
            return CycNum { level: self.level, coeffs }.normalized();
        }
        let n = CycNum::common(self, other);
        &self.lift(n) - &other.lift(n)
    }
}

impl<'a> Mul<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn mul(self, other: &CycNum) -> CycNum {
        if self.level == 1 {
            return other.scale(&self.coeffs[0]);
        }
        if other.level == 1 {
            return self.scale(&other.coeffs[0]);
        }
        if self.level == other.level {
            return self.mul_same_level(other);
        }
        let n = CycNum::common(self, other);
        self.lift(n).mul_same_level(&other.lift(n))
    }
}

impl Add for CycNum {
    type Output = CycNum;
    fn add(self, other: CycNum) -> CycNum {
        &self + &other
    }
}

impl Sub for CycNum {
    type Output = CycNum;
    fn sub(self, other: CycNum) -> CycNum {
        &self - &other
    }
}

impl Mul for CycNum {
    type Output = CycNum;
    fn mul(self, other: CycNum) -> CycNum {
        &self * &other
    }
}

impl Neg for CycNum {
    type Output = CycNum;
    fn neg(mut self) -> CycNum {
        for c in self.coeffs.iter_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        -self.clone()
    }
}

impl AddAssign<&CycNum> for CycNum {
    fn add_assign(&mut self, other: &CycNum) {
        if self.level == other.level {
            for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
                *a += b;
            }
            if self.level > 1 {
                *self = std::mem::take(self).normalized();
            }
        } else {
            *self = &*self + other;
        }
    }
}

impl SubAssign<&CycNum> for CycNum {
    fn sub_assign(&mut self, other: &CycNum) {
        if self.level == other.level {
            for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
                *a -= b;
            }
            if self.level > 1 {
                *self = std::mem::take(self).normalized();
            }
        } else {
            *self = &*self - other;
        }
    }
}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rat() {
            return write!(f, "{}", format_rat(r));
        }
        let mut first = true;
        write!(f, "(")?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let power = match k {
                0 => String::new(),
                1 => format!("z{}", self.level),
                _ => format!("z{}^{}", self.level, k),
            };
            if k == 0 {
                write!(f, "{}", format_rat(&mag))?;
            } else if mag.is_one() {
                write!(f, "{power}")?;
            } else {
                write!(f, "{}*{power}", format_rat(&mag))?;
            }
        }
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
struct CycNumWire {
    level: u32,
    coeffs: Vec<String>,
}

impl Serialize for CycNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CycNumWire { level: self.level, coeffs: self.coeffs.iter().map(format_rat).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = CycNumWire::deserialize(d)?;
        let coeffs = wire
            .coeffs
            .iter()
            .map(|s| parse_rat(s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}"))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        CycNum::from_coeffs(wire.level, coeffs).map_err(D::Error::custom)
    }
}

/// The compatible family of primitive roots of unity up to an ambient level
/// that grows as larger orders are requested.
#[derive(Clone, Debug)]
pub struct RootOfUnitySystem {
    level: u32,
}

impl RootOfUnitySystem {
    pub fn new(level: u32) -> Self {
        RootOfUnitySystem { level: level.max(1) }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `ζ_m`, raising the ambient level to `lcm(level, m)` when needed.
    pub fn zeta(&mut self, m: u32) -> CycNum {
        if !self.level.is_multiple_of(m) {
            self.level = self.level.lcm(&m);
        }
        CycNum::zeta(m)
    }

    /// Check `ζ_{ℓm}^ℓ = ζ_m` for every `ℓm` dividing the ambient level.
    pub fn is_compatible(&self) -> bool {
        let n = self.level;
        (1..=n).filter(|d| n.is_multiple_of(*d)).all(|big| {
            (1..=big).filter(|l| big % l == 0).all(|l| {
                CycNum::zeta(big).pow(l as i64).map(|v| v == CycNum::zeta(big / l)).unwrap_or(false)
            })
        })
    }
}
