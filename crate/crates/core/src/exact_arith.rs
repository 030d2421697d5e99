//! Exact arithmetic over `Q` and the cyclotomic fields `Q(zeta_N)`.
//!
//! A [`Cyclotomic`] of order `N` is stored in the power basis
//! `1, z, ..., z^(phi(N)-1)` with `z = exp(2 pi i / N)`, i.e. reduced modulo
//! the `N`-th cyclotomic polynomial. That basis makes zero testing and
//! rationality testing coordinate checks. Mixed-order arithmetic promotes both
//! operands to `Q(zeta_lcm)`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// `p/q` as a [`Rational`].
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Renders a rational as `p` or `p/q`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn euler_phi(n: u64) -> u64 {
    let mut m = n;
    let mut phi = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if m > 1 {
        phi -= phi / m;
    }
    phi
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn cyclotomic_cache() -> &'static Mutex<HashMap<u64, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients (lowest degree first) of the `n`-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(n: u64) -> Arc<Vec<i64>> {
    assert!(n >= 1, "cyclotomic polynomial of order 0");
    if let Some(p) = cyclotomic_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by every Phi_d with d | n, d < n
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in divisors(n).into_iter().filter(|&d| d < n) {
        let den = cyclotomic_polynomial(d);
        num = div_monic(&num, &den);
    }
    let poly = Arc::new(num);
    cyclotomic_cache().lock().unwrap().insert(n, poly.clone());
    poly
}

fn div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; num.len() - dn];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dn];
        quot[i] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

/// Exact element of `Q(zeta_N)`.
#[derive(Clone, Debug)]
pub struct Cyclotomic {
    order: u64,
    coeffs: Vec<Rational>,
}

impl Cyclotomic {
    /// Builds `sum_k c_k zeta_N^k` from arbitrary exponents (taken mod `N`).
    pub fn from_terms<I>(order: u64, terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, Rational)>,
    {
        assert!(order >= 1, "cyclotomic order must be positive");
        let mut dense = vec![Rational::zero(); order as usize];
        for (k, c) in terms {
            let k = k.rem_euclid(order as i64) as usize;
            dense[k] += c;
        }
        Self::reduce(order, dense)
    }

    fn reduce(order: u64, mut dense: Vec<Rational>) -> Self {
        let phi = euler_phi(order) as usize;
        let poly = cyclotomic_polynomial(order);
        for i in (phi..dense.len()).rev() {
            if dense[i].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut dense[i]);
            for (j, &p) in poly.iter().enumerate().take(phi) {
                if p != 0 {
                    dense[i - phi + j] -= &c * BigInt::from(p);
                }
            }
        }
        dense.truncate(phi);
        dense.resize(phi, Rational::zero());
        Cyclotomic { order, coeffs: dense }
    }

    /// Drops to `Q` when every non-constant coordinate vanishes.
    fn normalized(self) -> Self {
        if self.order > 1 && self.is_rational() {
            Cyclotomic::from_rational(self.coeffs.into_iter().next().unwrap_or_default())
        } else {
            self
        }
    }

    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(r: Rational) -> Self {
        Cyclotomic { order: 1, coeffs: vec![r] }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(int(n))
    }

    /// `zeta_N^k`.
    pub fn root(order: u64, k: i64) -> Self {
        Self::from_terms(order, [(k, Rational::one())])
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Power-basis coordinates, length `phi(order)`.
    pub fn coefficients(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.is_rational() && self.coeffs[0].is_one()
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(Zero::is_zero)
    }

    pub fn to_rational(&self) -> Result<Rational> {
        if self.is_rational() {
            Ok(self.coeffs[0].clone())
        } else {
            Err(Error::NotRational(self.to_string()))
        }
    }

    /// Re-expresses `self` in `Q(zeta_M)`; `M` must be a multiple of the order.
    pub fn lift(&self, order: u64) -> Self {
        assert!(
            order % self.order == 0,
            "cannot embed Q(zeta_{}) into Q(zeta_{order})",
            self.order
        );
        if order == self.order {
            return self.clone();
        }
        let step = (order / self.order) as usize;
        let mut dense = vec![Rational::zero(); order as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            dense[k * step] = c.clone();
        }
        Self::reduce(order, dense)
    }

    fn promote(a: &Self, b: &Self) -> (u64, Self, Self) {
        let n = a.order.lcm(&b.order);
        (n, a.lift(n), b.lift(n))
    }

    /// The Galois automorphism `zeta_N -> zeta_N^a`; `a` must be coprime to `N`.
    pub fn galois(&self, a: i64) -> Self {
        let n = self.order as i64;
        debug_assert_eq!(a.rem_euclid(n).gcd(&n), 1);
        Self::from_terms(
            self.order,
            self.coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (a * k as i64, c.clone())),
        )
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_rational() {
            return Ok(Self::from_rational(self.coeffs[0].recip()));
        }
        let n = self.order as i64;
        // product over the nontrivial Galois conjugates; self * prod is the norm
        let mut prod = Self::one();
        for a in 2..n {
            if a.gcd(&n) == 1 {
                prod = &prod * &self.galois(a);
            }
        }
        let norm = (self * &prod).to_rational()?;
        Ok(prod.scale(&norm.recip()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.inv()?)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Integer power; negative exponents go through the inverse.
    pub fn powi(&self, e: i64) -> Result<Self> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inv()?.pow(e.unsigned_abs()))
        }
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.coeffs == other.coeffs;
        }
        let (_, a, b) = Self::promote(self, other);
        a.coeffs == b.coeffs
    }
}

impl Eq for Cyclotomic {}

impl From<Rational> for Cyclotomic {
    fn from(r: Rational) -> Self {
        Self::from_rational(r)
    }
}

impl From<i64> for Cyclotomic {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl<'a> Add<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: &Cyclotomic) -> Cyclotomic {
        if rhs.order == 1 || self.order == 1 {
            let (big, r) = if rhs.order == 1 { (self, &rhs.coeffs[0]) } else { (rhs, &self.coeffs[0]) };
            let mut out = big.clone();
            out.coeffs[0] += r;
            return out;
        }
        if self.order == rhs.order {
            return Cyclotomic {
                order: self.order,
                coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
            };
        }
        let (_, a, b) = Cyclotomic::promote(self, rhs);
        &a + &b
    }
}

impl<'a> Sub<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: &Cyclotomic) -> Cyclotomic {
        self + &(-rhs)
    }
}

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        -&self
    }
}

impl<'a> Mul<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: &Cyclotomic) -> Cyclotomic {
        if rhs.order == 1 {
            return self.scale(&rhs.coeffs[0]);
        }
        if self.order == 1 {
            return rhs.scale(&self.coeffs[0]);
        }
        if self.order != rhs.order {
            let (_, a, b) = Cyclotomic::promote(self, rhs);
            return &a * &b;
        }
        if self.order <= 2 {
            return Cyclotomic::from_rational(&self.coeffs[0] * &rhs.coeffs[0]);
        }
        let n = self.coeffs.len();
        let mut dense = vec![Rational::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    dense[i + j] += a * b;
                }
            }
        }
        Cyclotomic::reduce(self.order, dense).normalized()
    }
}

macro_rules! forward_owned {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<Cyclotomic> for Cyclotomic {
            type Output = Cyclotomic;
            fn $f(self, rhs: Cyclotomic) -> Cyclotomic { (&self).$f(&rhs) }
        }
        impl<'a> $tr<&'a Cyclotomic> for Cyclotomic {
            type Output = Cyclotomic;
            fn $f(self, rhs: &Cyclotomic) -> Cyclotomic { (&self).$f(rhs) }
        }
        impl<'a> $tr<Cyclotomic> for &'a Cyclotomic {
            type Output = Cyclotomic;
            fn $f(self, rhs: Cyclotomic) -> Cyclotomic { self.$f(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl std::iter::Sum for Cyclotomic {
    fn sum<I: Iterator<Item = Cyclotomic>>(iter: I) -> Self {
        iter.fold(Cyclotomic::zero(), |a, b| a + b)
    }
}

impl<'a> std::iter::Sum<&'a Cyclotomic> for Cyclotomic {
    fn sum<I: Iterator<Item = &'a Cyclotomic>>(iter: I) -> Self {
        iter.fold(Cyclotomic::zero(), |a, b| a + b)
    }
}

impl std::iter::Product for Cyclotomic {
    fn product<I: Iterator<Item = Cyclotomic>>(iter: I) -> Self {
        iter.fold(Cyclotomic::one(), |a, b| a * b)
    }
}

/// `c0 + c1*z^1 + ... (z = zeta_N)`; rational values print as `p/q`.
impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                if k == 0 {
                    fmt_rational(c)
                } else {
                    format!("{}*z^{k}", fmt_rational(c))
                }
            })
            .collect();
        if terms.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", terms.join(" + "))?;
        if !self.is_rational() {
            write!(f, " (z = zeta_{})", self.order)?;
        }
        Ok(())
    }
}

impl FromStr for Cyclotomic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, order) = match s.rsplit_once("(z = zeta_") {
            Some((body, tail)) => {
                let n = tail
                    .trim_end()
                    .strip_suffix(')')
                    .and_then(|n| n.trim().parse::<u64>().ok())
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| Error::Parse(format!("bad cyclotomic order in '{s}'")))?;
                (body.trim(), n)
            }
            None => (s, 1),
        };
        let mut terms = Vec::new();
        for term in body.split(" + ") {
            let term = term.trim();
            match term.split_once("*z^") {
                Some((c, k)) => {
                    let k: i64 = k
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent in '{term}'")))?;
                    if order == 1 && k != 0 {
                        return Err(Error::Parse(format!("missing order for '{s}'")));
                    }
                    terms.push((k, parse_rational(c)?));
                }
                None => terms.push((0, parse_rational(term)?)),
            }
        }
        Ok(Cyclotomic::from_terms(order, terms))
    }
}

impl Serialize for Cyclotomic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Cyclotomic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter storing a [`Rational`] as its `p/q` string.
pub mod rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Returns `r` as an `i64` if it is an integer that fits.
pub fn rational_to_i64(r: &Rational) -> Option<i64> {
    use num_traits::ToPrimitive;
    if r.is_integer() {
        r.numer().to_i64()
    } else {
        None
    }
}

pub fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(n: u64, k: i64) -> Cyclotomic {
        Cyclotomic::root(n, k)
    }

    #[test]
    fn roots() {
        assert_eq!(z(4, 2), Cyclotomic::from_int(-1));
        assert_eq!(z(1, 0), Cyclotomic::one());
        assert_eq!(z(3, 1) + z(3, 2), Cyclotomic::from_int(-1));
        assert_eq!(z(5, -1), z(5, 4));
    }

    #[test]
    fn arithmetic() {
        assert_eq!(z(4, 1) * z(4, 1), Cyclotomic::from_int(-1));
        assert_eq!(z(2, 1).lift(6), z(6, 3));
        assert_eq!(z(2, 1), z(6, 3));
        let d = Cyclotomic::one() - z(2, 1);
        assert_eq!(Cyclotomic::one().checked_div(&d).unwrap(), Cyclotomic::from_rational(rat(1, 2)));
        assert_eq!(Cyclotomic::one().checked_div(&Cyclotomic::zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn conjugation() {
        assert_eq!(z(4, 1).conj(), -z(4, 1));
        let r = Cyclotomic::from_rational(rat(3, 5));
        assert_eq!(r.conj(), r);
        assert_eq!((Cyclotomic::one() + z(3, 1)).conj(), Cyclotomic::one() + z(3, 2));
    }

    #[test]
    fn rationality() {
        let s: Cyclotomic = (1..5).map(|k| z(5, k)).sum();
        assert_eq!(s.to_rational().unwrap(), int(-1));
        assert!(matches!(z(8, 1).to_rational(), Err(Error::NotRational(_))));
        assert_eq!(Cyclotomic::from_rational(rat(7, 3)).to_rational().unwrap(), rat(7, 3));
    }

    #[test]
    fn inverse_of_one_minus_root() {
        // |1 - zeta_3|^2 = 3
        let a = Cyclotomic::one() - z(3, 1);
        let prod = &a * &a.conj();
        assert_eq!(prod, Cyclotomic::from_int(3));
        assert_eq!(a.inv().unwrap(), a.conj().scale(&rat(1, 3)));
    }

    #[test]
    fn display_and_parse() {
        let a = Cyclotomic::from_terms(8, [(0, rat(1, 2)), (3, rat(-2, 3))]);
        let s = a.to_string();
        assert_eq!(s, "1/2 + -2/3*z^3 (z = zeta_8)");
        assert_eq!(s.parse::<Cyclotomic>().unwrap(), a);
        assert_eq!("0".parse::<Cyclotomic>().unwrap(), Cyclotomic::zero());
        assert_eq!(Cyclotomic::from_int(2).to_string(), "2");
        assert!("1*z^2".parse::<Cyclotomic>().is_err());
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(*cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(*cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(360).len() as u64, euler_phi(360) + 1);
    }

    fn arb_cyc() -> impl Strategy<Value = Cyclotomic> {
        (prop::sample::select(vec![1u64, 2, 3, 4, 5, 6, 8, 12]), prop::collection::vec((-6i64..6, 1i64..4), 0..4))
            .prop_map(|(n, cs)| {
                Cyclotomic::from_terms(n, cs.into_iter().enumerate().map(|(k, (p, q))| (k as i64, rat(p, q))))
            })
    }

    proptest! {
        #[test]
        fn field_axioms(a in arb_cyc(), b in arb_cyc(), c in arb_cyc()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
            if !a.is_zero() {
                prop_assert!((&a * &a.inv().unwrap()).is_one());
            }
        }

        #[test]
        fn conjugation_is_involutive_homomorphism(a in arb_cyc(), b in arb_cyc()) {
            prop_assert_eq!(a.conj().conj(), a.clone());
            prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
            prop_assert_eq!((&a + &b).conj(), &a.conj() + &b.conj());
        }

        #[test]
        fn embedding_commutes_with_arithmetic(a in arb_cyc(), b in arb_cyc(), m in 1u64..4) {
            let n = a.order().lcm(&b.order()) * m;
            prop_assert_eq!((&a * &b).lift(n), &a.lift(n) * &b.lift(n));
            prop_assert_eq!((&a + &b).lift(n), &a.lift(n) + &b.lift(n));
        }

        #[test]
        fn display_round_trip(a in arb_cyc()) {
            prop_assert_eq!(a.to_string().parse::<Cyclotomic>().unwrap(), a);
        }
    }
}
