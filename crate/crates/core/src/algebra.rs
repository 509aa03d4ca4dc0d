//! Exact arithmetic in Q(zeta_p) and its quadratic extension Q(zeta_p)(sqrt(-l)).
//!
//! Cyclotomic elements are stored on the power basis 1, zeta, ..., zeta^(p-2),
//! reduced modulo the cyclotomic polynomial Phi_p (so zeta^(p-1) is rewritten
//! as -(1 + zeta + ... + zeta^(p-2))). That basis is a Q-basis, hence equality
//! of reduced coefficient vectors is exact equality of field elements, and
//! sqrt(-l) never lies in Q(zeta_p) for a prime l distinct from p, so the
//! (re, im) split of `AlgNum` is canonical as well.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};

/// Element of Q(zeta_p) on the power basis of length p-1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CycEl {
    p: u64,
    coeffs: Vec<BigRational>,
}

fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl CycEl {
    pub fn zero(p: u64) -> Self {
        CycEl {
            p,
            coeffs: vec![BigRational::zero(); (p - 1) as usize],
        }
    }

    pub fn from_rational(p: u64, r: BigRational) -> Self {
        let mut el = CycEl::zero(p);
        el.coeffs[0] = r;
        el
    }

    pub fn one(p: u64) -> Self {
        Self::from_rational(p, BigRational::one())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Rebuild from a length-p exponent vector, folding the zeta^(p-1) slot
    /// into the basis via Phi_p.
    fn from_exponent_vector(p: u64, acc: Vec<BigRational>) -> Self {
        debug_assert_eq!(acc.len(), p as usize);
        let top = acc[(p - 1) as usize].clone();
        let coeffs = acc[..(p - 1) as usize]
            .iter()
            .map(|c| c - &top)
            .collect();
        CycEl { p, coeffs }
    }

    /// zeta_p^t, for any integer t (depends only on t mod p).
    pub fn zeta_pow(p: u64, t: i64) -> Self {
        let e = t.rem_euclid(p as i64) as u64;
        let mut acc = vec![BigRational::zero(); p as usize];
        acc[e as usize] = BigRational::one();
        Self::from_exponent_vector(p, acc)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Some(r) when the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn check_domain(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::DomainMismatch(format!(
                "cyclotomic orders {} and {} differ",
                self.p, other.p
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_domain(other)?;
        Ok(self.add(other))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_domain(other)?;
        Ok(self.mul(other))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "cyclotomic order mismatch");
        CycEl {
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        CycEl {
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "cyclotomic order mismatch");
        let p = self.p as usize;
        let mut acc = vec![BigRational::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let k = (i + j) % p;
                acc[k] = &acc[k] + a * b;
            }
        }
        Self::from_exponent_vector(self.p, acc)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        CycEl {
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Galois map zeta -> zeta^t for t coprime to p.
    pub fn galois(&self, t: u64) -> Self {
        let p = self.p;
        let mut acc = vec![BigRational::zero(); p as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = ((i as u64 * t) % p) as usize;
            acc[k] = &acc[k] + c;
        }
        Self::from_exponent_vector(p, acc)
    }

    /// Complex conjugation: zeta -> zeta^(-1).
    pub fn conj(&self) -> Self {
        self.galois(self.p - 1)
    }
}

/// Element of Q(zeta_p)(sqrt(-l)): re + im * sqrt(-l).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AlgNum {
    l: u64,
    re: CycEl,
    im: CycEl,
}

impl AlgNum {
    pub fn new(l: u64, re: CycEl, im: CycEl) -> Self {
        assert_eq!(re.p(), im.p(), "component fields differ");
        AlgNum { l, re, im }
    }

    pub fn zero(p: u64, l: u64) -> Self {
        AlgNum::new(l, CycEl::zero(p), CycEl::zero(p))
    }

    pub fn one(p: u64, l: u64) -> Self {
        AlgNum::new(l, CycEl::one(p), CycEl::zero(p))
    }

    pub fn from_rational(p: u64, l: u64, r: BigRational) -> Self {
        AlgNum::new(l, CycEl::from_rational(p, r), CycEl::zero(p))
    }

    pub fn from_int(p: u64, l: u64, n: i64) -> Self {
        Self::from_rational(p, l, rat_int(n))
    }

    pub fn from_bigint(p: u64, l: u64, n: BigInt) -> Self {
        Self::from_rational(p, l, BigRational::from_integer(n))
    }

    pub fn from_cyc(l: u64, re: CycEl) -> Self {
        let p = re.p();
        AlgNum::new(l, re, CycEl::zero(p))
    }

    /// sqrt(-l) itself.
    pub fn sqrt_neg_l(p: u64, l: u64) -> Self {
        AlgNum::new(l, CycEl::zero(p), CycEl::one(p))
    }

    pub fn zeta_pow(p: u64, l: u64, t: i64) -> Self {
        AlgNum::from_cyc(l, CycEl::zeta_pow(p, t))
    }

    pub fn p(&self) -> u64 {
        self.re.p()
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn re(&self) -> &CycEl {
        &self.re
    }

    pub fn im(&self) -> &CycEl {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn check_domain(&self, other: &Self) -> Result<()> {
        if self.l != other.l || self.p() != other.p() {
            return Err(Error::DomainMismatch(format!(
                "values live in Q(zeta_{})(sqrt(-{})) and Q(zeta_{})(sqrt(-{}))",
                self.p(),
                self.l,
                other.p(),
                other.l
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_domain(other)?;
        Ok(self.add(other))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_domain(other)?;
        Ok(self.mul(other))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.l, other.l, "extension mismatch");
        AlgNum::new(self.l, self.re.add(&other.re), self.im.add(&other.im))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        AlgNum::new(self.l, self.re.neg(), self.im.neg())
    }

    /// (a + b s)(c + d s) with s^2 = -l.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.l, other.l, "extension mismatch");
        let minus_l = rat_int(-(self.l as i64));
        let re = self
            .re
            .mul(&other.re)
            .add(&self.im.mul(&other.im).scale(&minus_l));
        let im = self.re.mul(&other.im).add(&self.im.mul(&other.re));
        AlgNum::new(self.l, re, im)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        AlgNum::new(self.l, self.re.scale(r), self.im.scale(r))
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&rat_int(n))
    }

    /// Square-and-multiply power.
    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = AlgNum::one(self.p(), self.l);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Complex conjugation: zeta -> zeta^(-1) and sqrt(-l) -> -sqrt(-l).
    pub fn conj(&self) -> Self {
        AlgNum::new(self.l, self.re.conj(), self.im.conj().neg())
    }

    /// Galois flip of the quadratic layer only: sqrt(-l) -> -sqrt(-l).
    pub fn galois_flip(&self) -> Self {
        AlgNum::new(self.l, self.re.clone(), self.im.neg())
    }

    /// x * conj(x); fixed by complex conjugation.
    pub fn norm_squared(&self) -> Self {
        self.mul(&self.conj())
    }

    /// Some(n) when the value is a rational integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        if !self.im.is_zero() {
            return None;
        }
        let r = self.re.as_rational()?;
        if r.is_integer() {
            Some(r.to_integer())
        } else {
            None
        }
    }
}

// ---------------------------------------------------------------------------
// serialization: decimal-string big integers, bit-exact round trip

#[derive(Serialize, Deserialize)]
struct AlgNumWire {
    p: u64,
    l: u64,
    re: Vec<[String; 2]>,
    im: Vec<[String; 2]>,
}

fn coeffs_to_wire(c: &[BigRational]) -> Vec<[String; 2]> {
    c.iter()
        .map(|r| [r.numer().to_string(), r.denom().to_string()])
        .collect()
}

fn coeffs_from_wire(w: &[[String; 2]], p: u64) -> std::result::Result<Vec<BigRational>, String> {
    if w.len() != (p - 1) as usize {
        return Err(format!("expected {} coefficients, got {}", p - 1, w.len()));
    }
    w.iter()
        .map(|[n, d]| {
            let num: BigInt = n.parse().map_err(|e| format!("bad numerator: {e}"))?;
            let den: BigInt = d.parse().map_err(|e| format!("bad denominator: {e}"))?;
            if den.is_zero() {
                return Err("zero denominator".to_string());
            }
            Ok(BigRational::new(num, den))
        })
        .collect()
}

impl Serialize for AlgNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AlgNumWire {
            p: self.p(),
            l: self.l,
            re: coeffs_to_wire(self.re.coeffs()),
            im: coeffs_to_wire(self.im.coeffs()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = AlgNumWire::deserialize(d)?;
        if w.p < 2 {
            return Err(D::Error::custom("p must be at least 2"));
        }
        let re = coeffs_from_wire(&w.re, w.p).map_err(D::Error::custom)?;
        let im = coeffs_from_wire(&w.im, w.p).map_err(D::Error::custom)?;
        Ok(AlgNum::new(
            w.l,
            CycEl { p: w.p, coeffs: re },
            CycEl { p: w.p, coeffs: im },
        ))
    }
}

// ---------------------------------------------------------------------------
// display: symbolic form used by the CSV export

fn fmt_cyc(c: &CycEl, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut first = true;
    for (i, coeff) in c.coeffs().iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        if first {
            if coeff.is_negative() {
                write!(f, "-")?;
            }
            first = false;
        } else if coeff.is_negative() {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let a = coeff.abs();
        if i == 0 {
            write!(f, "{a}")?;
        } else if a.is_one() {
            write!(f, "z^{i}")?;
        } else {
            write!(f, "{a}*z^{i}")?;
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl fmt::Display for CycEl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_cyc(self, f)
    }
}

impl fmt::Display for AlgNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return fmt_cyc(&self.re, f);
        }
        if self.re.is_zero() {
            write!(f, "({})*sqrt(-{})", self.im, self.l)
        } else {
            write!(f, "({}) + ({})*sqrt(-{})", self.re, self.im, self.l)
        }
    }
}

/// Quadratic Gauss sum value sign * i^i_power * sqrt(q), kept symbolic
/// because sqrt(q) does not lie in Q(zeta_p)(sqrt(-l)) in general.
/// Canonical form: i_power in {0, 1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadGaussValue {
    pub p: u64,
    pub f: u64,
    pub sign: i8,
    pub i_power: u8,
}

impl QuadGaussValue {
    pub fn new(p: u64, f: u64, mut sign: i8, i_power: u32) -> Self {
        let mut ip = i_power % 4;
        if ip >= 2 {
            sign = -sign;
            ip -= 2;
        }
        QuadGaussValue {
            p,
            f,
            sign,
            i_power: ip as u8,
        }
    }

    pub fn is_real(&self) -> bool {
        self.i_power == 0
    }
}

impl fmt::Display for QuadGaussValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign < 0 { "-" } else { "" };
        let i = if self.i_power == 1 { "i*" } else { "" };
        write!(f, "{s}{i}sqrt({}^{})", self.p, self.f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn zeta_examples() {
        // zeta_2 = -1
        assert_eq!(CycEl::zeta_pow(2, 1).coeffs(), &[rat(-1, 1)]);
        // zeta_3^2 = -1 - zeta_3
        assert_eq!(CycEl::zeta_pow(3, 2).coeffs(), &[rat(-1, 1), rat(-1, 1)]);
        // zeta_3 * zeta_3^2 = 1
        let z = CycEl::zeta_pow(3, 1);
        assert_eq!(z.mul(&CycEl::zeta_pow(3, 2)), CycEl::one(3));
        // depends only on t mod p
        assert_eq!(CycEl::zeta_pow(5, 7), CycEl::zeta_pow(5, -3));
    }

    fn half(p: u64, l: u64, a: i64, b: i64) -> AlgNum {
        // (a + b sqrt(-l)) / 2
        AlgNum::new(
            l,
            CycEl::from_rational(p, rat(a, 2)),
            CycEl::from_rational(p, rat(b, 2)),
        )
    }

    #[test]
    fn quadratic_extension_arithmetic() {
        let z = half(2, 7, -1, 1);
        assert_eq!(z.mul(&z), half(2, 7, -3, -1));
        assert_eq!(z.pow(7), half(2, 7, 13, 7));
        let s = AlgNum::sqrt_neg_l(2, 7);
        assert_eq!(s.mul(&s), AlgNum::from_int(2, 7, -7));
    }

    #[test]
    fn conjugation_and_flip() {
        let s = AlgNum::sqrt_neg_l(3, 7);
        assert_eq!(s.conj(), s.neg());
        let z = AlgNum::zeta_pow(3, 7, 1);
        assert_eq!(z.conj(), AlgNum::zeta_pow(3, 7, 2));
        let x = half(3, 7, 5, 3).mul(&AlgNum::zeta_pow(3, 7, 1));
        assert_eq!(x.galois_flip().galois_flip(), x);
        assert_eq!(x.conj().conj(), x);
    }

    #[test]
    fn norms() {
        assert_eq!(
            half(5, 7, 1, 1).norm_squared(),
            AlgNum::from_int(5, 7, 2)
        );
        let z = AlgNum::zeta_pow(5, 7, 3);
        assert_eq!(z.norm_squared(), AlgNum::one(5, 7));
        assert!(AlgNum::zero(5, 7).norm_squared().is_zero());
    }

    #[test]
    fn domain_mismatch_is_reported() {
        let a = AlgNum::one(3, 7);
        let b = AlgNum::one(3, 11);
        assert!(matches!(a.checked_mul(&b), Err(Error::DomainMismatch(_))));
        let c = CycEl::one(3);
        let d = CycEl::one(5);
        assert!(matches!(c.checked_add(&d), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let x = half(3, 7, -13, 7)
            .mul(&AlgNum::zeta_pow(3, 7, 2))
            .scale(&rat(22, 7));
        let json = serde_json::to_string(&x).unwrap();
        let back: AlgNum = serde_json::from_str(&json).unwrap();
        assert_eq!(x, back);
        assert_eq!(json, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn quad_gauss_canonical_form() {
        let g = QuadGaussValue::new(3, 2, -1, 2);
        assert_eq!((g.sign, g.i_power), (1, 0));
        let g = QuadGaussValue::new(7, 3, 1, 3);
        assert_eq!((g.sign, g.i_power), (-1, 1));
    }
}
