//! Numerical embedding of the exact layer at configurable decimal precision.
//!
//! Roots of unity and square roots are evaluated as exact decimal fractions
//! (mantissa / 10^scale) with a guard-digit margin, and all complex arithmetic
//! on top of them is exact rational arithmetic. Floating point appears only
//! when a result is rounded to f64 for display.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::algebra::{AlgNum, CycEl, QuadGaussValue};

const GUARD_DIGITS: u32 = 10;

/// Complex number with exact rational coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Complex {
    pub re: BigRational,
    pub im: BigRational,
}

impl Complex {
    pub fn zero() -> Self {
        Complex {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn from_rational(re: BigRational) -> Self {
        Complex {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Complex {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Complex {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Complex {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Complex {
            re: &self.re * r,
            im: &self.im * r,
        }
    }

    pub fn abs_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

fn ten_pow(s: u32) -> BigInt {
    BigInt::from(10u32).pow(s)
}

/// atan(1/x) * 10^s by the alternating series, floor-truncated per term.
fn atan_inv_fixed(x: u64, s: u32) -> BigInt {
    let scale = ten_pow(s);
    let x = BigInt::from(x);
    let xx = &x * &x;
    let mut power = &scale / &x;
    let mut total = BigInt::zero();
    let mut k: u64 = 0;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            total += &term;
        } else {
            total -= &term;
        }
        power = &power / &xx;
        k += 1;
    }
    total
}

/// pi * 10^s via Machin's formula; internal guard digits absorb the
/// per-term truncation drift.
fn pi_fixed(s: u32) -> BigInt {
    let g = 12;
    let raw = BigInt::from(16) * atan_inv_fixed(5, s + g) - BigInt::from(4) * atan_inv_fixed(239, s + g);
    raw / ten_pow(g)
}

fn fixed_mul(a: &BigInt, b: &BigInt, scale: &BigInt) -> BigInt {
    a * b / scale
}

/// cos(x) and sin(x) at fixed scale, x given as mantissa / 10^s, |x| < 7.
fn cos_sin_fixed(xm: &BigInt, s: u32) -> (BigInt, BigInt) {
    let scale = ten_pow(s);
    let x2 = fixed_mul(xm, xm, &scale);
    // cosine: sum (-1)^j x^(2j) / (2j)!
    let mut cos = scale.clone();
    let mut term = scale.clone();
    let mut j: u64 = 1;
    loop {
        term = fixed_mul(&term, &x2, &scale) / BigInt::from((2 * j - 1) * (2 * j));
        if term.is_zero() {
            break;
        }
        if j % 2 == 1 {
            cos -= &term;
        } else {
            cos += &term;
        }
        j += 1;
    }
    // sine: x * sum (-1)^j x^(2j) / (2j+1)!
    let mut sin = xm.clone();
    let mut term = xm.clone();
    let mut j: u64 = 1;
    loop {
        term = fixed_mul(&term, &x2, &scale) / BigInt::from((2 * j) * (2 * j + 1));
        if term.is_zero() {
            break;
        }
        if j % 2 == 1 {
            sin -= &term;
        } else {
            sin += &term;
        }
        j += 1;
    }
    (cos, sin)
}

/// e^(2 pi i k / n) with both coordinates accurate to about `digits` decimal
/// digits.
pub fn unit_root(n: u64, k: u64, digits: u32) -> Complex {
    let s = digits + GUARD_DIGITS;
    let scale = ten_pow(s);
    let k = k % n;
    let xm = BigInt::from(2u32) * pi_fixed(s) * BigInt::from(k) / BigInt::from(n);
    let (c, sn) = cos_sin_fixed(&xm, s);
    Complex {
        re: BigRational::new(c, scale.clone()),
        im: BigRational::new(sn, scale),
    }
}

/// All n-th roots of unity, index k holding e^(2 pi i k / n).
pub fn unit_roots(n: u64, digits: u32) -> Vec<Complex> {
    (0..n).map(|k| unit_root(n, k, digits)).collect()
}

/// sqrt(x) as an exact decimal fraction with `digits` correct digits.
pub fn sqrt_decimal(x: &BigUint, digits: u32) -> BigRational {
    let s = digits + GUARD_DIGITS;
    let scaled = x * BigUint::from(10u32).pow(2 * s);
    let root = scaled.sqrt();
    BigRational::new(BigInt::from(root), ten_pow(s))
}

/// Embed a cyclotomic element with zeta_p -> e^(2 pi i / p).
pub fn embed_cyc(x: &CycEl, digits: u32) -> Complex {
    let roots = unit_roots(x.p(), digits);
    let mut total = Complex::zero();
    for (i, c) in x.coeffs().iter().enumerate() {
        if !c.is_zero() {
            total = total.add(&roots[i as usize].scale(c));
        }
    }
    total
}

/// Embed with the principal branch sqrt(-l) -> +i sqrt(l).
pub fn embed_algnum(x: &AlgNum, digits: u32) -> Complex {
    let re = embed_cyc(x.re(), digits);
    let im = embed_cyc(x.im(), digits);
    let sqrt_l = sqrt_decimal(&BigUint::from(x.l()), digits);
    // (re) + (im) * i * sqrt(l)
    let i_sqrt_l = Complex {
        re: BigRational::zero(),
        im: sqrt_l,
    };
    re.add(&im.mul(&i_sqrt_l))
}

/// Embed a symbolic quadratic Gauss sum value.
pub fn embed_quad_gauss(g: &QuadGaussValue, digits: u32) -> Complex {
    let q = BigUint::from(g.p).pow(g.f as u32);
    let mag = sqrt_decimal(&q, digits) * BigRational::from_integer(BigInt::from(g.sign));
    if g.i_power == 0 {
        Complex {
            re: mag,
            im: BigRational::zero(),
        }
    } else {
        Complex {
            re: BigRational::zero(),
            im: mag,
        }
    }
}

/// |a - b| <= tol * max(1, |b|), all in exact arithmetic (squared comparison).
pub fn close_enough(a: &Complex, b: &Complex, tol: &BigRational) -> bool {
    let diff = a.sub(b).abs_sqr();
    let scale = b.abs_sqr().max(BigRational::from_integer(BigInt::from(1)));
    diff <= tol * tol * scale
}

pub fn tolerance(exp10: i32) -> BigRational {
    if exp10 >= 0 {
        BigRational::from_integer(ten_pow(exp10 as u32))
    } else {
        BigRational::new(BigInt::from(1), ten_pow((-exp10) as u32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Signed};

    fn approx(x: f64, y: f64, tol: f64) {
        assert!((x - y).abs() < tol, "{x} vs {y}");
    }

    #[test]
    fn pi_digits() {
        let p = pi_fixed(30);
        assert_eq!(
            p.to_string(),
            "3141592653589793238462643383279"
        );
    }

    #[test]
    fn unit_root_values() {
        let z = unit_root(2, 1, 30);
        approx(z.re.to_f64().unwrap(), -1.0, 1e-29);
        assert!(z.im.abs() < tolerance(-29));
        let z = unit_root(4, 1, 30);
        assert!(z.re.abs() < tolerance(-29));
        approx(z.im.to_f64().unwrap(), 1.0, 1e-15);
        let z = unit_root(6, 1, 30);
        approx(z.re.to_f64().unwrap(), 0.5, 1e-15);
        approx(z.im.to_f64().unwrap(), 0.75f64.sqrt(), 1e-15);
    }

    #[test]
    fn embed_examples() {
        let s = embed_algnum(&AlgNum::sqrt_neg_l(2, 7), 30);
        assert!(s.re.is_zero());
        approx(s.im.to_f64().unwrap(), 2.6457513110645906, 1e-15);

        let z2 = embed_algnum(&AlgNum::zeta_pow(2, 7, 1), 30);
        approx(z2.re.to_f64().unwrap(), -1.0, 1e-29);

        // (13 + 7 sqrt(-7)) / 2
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let x = AlgNum::from_int(2, 7, 13)
            .add(&AlgNum::sqrt_neg_l(2, 7).scale_int(7))
            .scale(&half);
        let e = embed_algnum(&x, 30);
        approx(e.re.to_f64().unwrap(), 6.5, 1e-20);
        approx(e.im.to_f64().unwrap(), 9.260129588726067, 1e-14);
    }

    #[test]
    fn embedding_is_multiplicative() {
        // embed(x*y) == embed(x)*embed(y) within 1e-10 relative at 30 digits
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let x = AlgNum::zeta_pow(5, 7, 2)
            .add(&AlgNum::sqrt_neg_l(5, 7).scale_int(3))
            .scale(&half);
        let y = AlgNum::zeta_pow(5, 7, 4).sub(&AlgNum::from_int(5, 7, 2));
        let lhs = embed_algnum(&x.mul(&y), 30);
        let rhs = embed_algnum(&x, 30).mul(&embed_algnum(&y, 30));
        assert!(close_enough(&lhs, &rhs, &tolerance(-10)));
    }

    #[test]
    fn roots_sum_to_zero() {
        for n in [3u64, 7, 49] {
            let total = unit_roots(n, 30)
                .iter()
                .fold(Complex::zero(), |acc, z| acc.add(z));
            assert!(total.abs_sqr() < tolerance(-25), "n = {n}");
        }
    }

    #[test]
    fn sqrt_decimal_value() {
        let r = sqrt_decimal(&BigUint::from(2u32), 30);
        let two = BigRational::from_integer(BigInt::from(2));
        assert!((&r * &r - &two).abs() < tolerance(-29));
    }

    #[test]
    fn quad_gauss_embedding() {
        let g = QuadGaussValue::new(5, 1, 1, 0);
        let e = embed_quad_gauss(&g, 30);
        approx(e.re.to_f64().unwrap(), 5f64.sqrt(), 1e-14);
        assert!(e.im.is_zero());
        let one = Complex::from_rational(BigRational::one());
        assert!(close_enough(&one, &one, &tolerance(-30)));
    }
}
