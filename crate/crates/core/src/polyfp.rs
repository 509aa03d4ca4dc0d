//! Dense univariate polynomial arithmetic over F_p, coefficient vectors stored
//! low degree first. Enough machinery for irreducibility tests, gcds, and the
//! cyclotomic-factor computations behind the delta convention.

use crate::arith::{mul_mod, pow_mod};
use crate::error::{Error, Result};

pub type Poly = Vec<u64>;

pub fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub fn deg(a: &Poly) -> Option<usize> {
    if a.is_empty() {
        None
    } else {
        Some(a.len() - 1)
    }
}

pub fn add(a: &Poly, b: &Poly, p: u64) -> Poly {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + y) % p;
    }
    trim(out)
}

pub fn sub(a: &Poly, b: &Poly, p: u64) -> Poly {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + p - y) % p;
    }
    trim(out)
}

pub fn mul(a: &Poly, b: &Poly, p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    trim(out)
}

/// Remainder of a modulo m; m need not be monic.
pub fn rem(a: &Poly, m: &Poly, p: u64) -> Poly {
    let md = deg(m).expect("division by zero polynomial");
    let lead_inv = pow_mod(m[md], p - 2, p);
    let mut r = a.clone();
    while let Some(rd) = deg(&r) {
        if rd < md {
            break;
        }
        let c = mul_mod(r[rd], lead_inv, p);
        let shift = rd - md;
        for (i, &mi) in m.iter().enumerate() {
            r[i + shift] = (r[i + shift] + p - mul_mod(c, mi, p)) % p;
        }
        r = trim(r);
    }
    r
}

/// Exact quotient a / m; panics if the division leaves a remainder.
pub fn div_exact(a: &Poly, m: &Poly, p: u64) -> Poly {
    let md = deg(m).expect("division by zero polynomial");
    let lead_inv = pow_mod(m[md], p - 2, p);
    let mut r = a.clone();
    let mut q = vec![0u64; a.len().saturating_sub(md)];
    while let Some(rd) = deg(&r) {
        if rd < md {
            break;
        }
        let c = mul_mod(r[rd], lead_inv, p);
        let shift = rd - md;
        q[shift] = c;
        for (i, &mi) in m.iter().enumerate() {
            r[i + shift] = (r[i + shift] + p - mul_mod(c, mi, p)) % p;
        }
        r = trim(r);
    }
    assert!(r.is_empty(), "non-exact polynomial division");
    trim(q)
}

/// Monic gcd.
pub fn gcd(a: &Poly, b: &Poly, p: u64) -> Poly {
    let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    make_monic(a, p)
}

pub fn make_monic(a: Poly, p: u64) -> Poly {
    match deg(&a) {
        None => a,
        Some(d) => {
            let inv = pow_mod(a[d], p - 2, p);
            a.into_iter().map(|c| mul_mod(c, inv, p)).collect()
        }
    }
}

pub fn mulmod(a: &Poly, b: &Poly, m: &Poly, p: u64) -> Poly {
    rem(&mul(a, b, p), m, p)
}

/// base^e mod m with a u64 exponent.
pub fn powmod(base: &Poly, mut e: u64, m: &Poly, p: u64) -> Poly {
    let mut acc = vec![1u64];
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(&acc, &b, m, p);
        }
        b = mulmod(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

fn x_poly() -> Poly {
    vec![0, 1]
}

/// x^(p^k) mod m by k applications of the p-power map.
pub fn frobenius_iter(k: usize, m: &Poly, p: u64) -> Poly {
    let mut t = x_poly();
    for _ in 0..k {
        t = powmod(&t, p, m, p);
    }
    t
}

/// Irreducibility over F_p via the x^(p^d) ladder: m of degree f is
/// irreducible iff x^(p^f) = x mod m and gcd(x^(p^(f/r)) - x, m) = 1 for
/// every prime r | f.
pub fn is_irreducible(m: &Poly, p: u64) -> bool {
    let f = match deg(m) {
        Some(0) | None => return false,
        Some(1) => return true,
        Some(f) => f,
    };
    let xf = frobenius_iter(f, m, p);
    if sub(&xf, &x_poly(), p) != Vec::<u64>::new() {
        return false;
    }
    for (r, _) in crate::arith::factorize(f as u64) {
        let xq = frobenius_iter(f / r as usize, m, p);
        let g = gcd(&sub(&xq, &x_poly(), p), m, p);
        if deg(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// The l-th cyclotomic polynomial for prime l: 1 + x + ... + x^(l-1).
pub fn cyclotomic_prime(l: u64) -> Poly {
    vec![1u64; l as usize]
}

/// Outcome of the standalone convention computation on a fixed irreducible
/// factor of the l-th cyclotomic polynomial over F_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialAnchor {
    /// The chosen factor (lexicographically smallest of the two).
    pub factor: Poly,
    /// The rejected factor.
    pub other: Poly,
    /// -1 when sum_{u in H1^(0)} xi^u = 0 on the chosen factor, +1 when it
    /// equals -1. These are the only possibilities on a special instance.
    pub delta: i8,
}

fn squares_mod(l: u64) -> Vec<u64> {
    let mut h: Vec<u64> = (1..l).map(|u| mul_mod(u, u, l)).collect();
    h.sort_unstable();
    h.dedup();
    h
}

/// sum_{u square mod l} x^u reduced mod Phi_l; no reduction is actually
/// needed because -1 is a non-square for l = 3 mod 4.
fn square_class_sigma(l: u64) -> Poly {
    let mut sigma = vec![0u64; l as usize - 1];
    for u in squares_mod(l) {
        sigma[u as usize] = 1;
    }
    trim(sigma)
}

/// The degree-(l-1)/2 factor g of Phi_l over F_p on which the square-class
/// section takes the value `eps`: g = gcd(sigma - eps, Phi_l). This anchors a
/// root xi of g with sum_{u square} xi^u = eps.
pub fn section_factor(p: u64, l: u64, eps: u64) -> Result<Poly> {
    let phi = cyclotomic_prime(l);
    let sigma = sub(&square_class_sigma(l), &vec![eps % p], p);
    let g = gcd(&sigma, &phi, p);
    let half = (l as usize - 1) / 2;
    if deg(&g) != Some(half) {
        return Err(Error::InternalInconsistency(format!(
            "section value {eps} is not attained on a Phi_{l} factor over F_{p}"
        )));
    }
    Ok(g)
}

/// Factor Phi_l over F_p (special case: -l = 1 mod p) and fix the delta
/// convention on the lexicographically smallest of the two degree-(l-1)/2
/// factors.
///
/// The factor with sum_{u in H1^(0)} xi^u = 0 is precisely
/// gcd(sum_{u in H1^(0)} x^u, Phi_l), so no randomized equal-degree
/// factorization is needed.
pub fn special_anchor(p: u64, l: u64) -> Result<SpecialAnchor> {
    if (l + 1) % p != 0 {
        return Err(Error::Unsupported(format!(
            "delta undefined: -{l} is not 1 mod {p} (generic case)"
        )));
    }
    let phi = cyclotomic_prime(l);
    let sigma = square_class_sigma(l);
    let g0 = gcd(&sigma, &phi, p);
    let half = (l as usize - 1) / 2;
    if deg(&g0) != Some(half) {
        return Err(Error::InternalInconsistency(format!(
            "gcd with the square-class section has degree {:?}, expected {half}",
            deg(&g0)
        )));
    }
    let g1 = make_monic(div_exact(&phi, &g0, p), p);
    // sanity: the complementary factor carries sum = -1
    let s1 = rem(&sigma, &g1, p);
    if s1 != vec![p - 1] {
        return Err(Error::InternalInconsistency(
            "square-class section is neither 0 nor -1 on a Phi_l factor".into(),
        ));
    }
    let (factor, other, delta) = if g0 <= g1 {
        (g0, g1, -1)
    } else {
        (g1, g0, 1)
    };
    Ok(SpecialAnchor {
        factor,
        other,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rem_and_gcd() {
        let p = 7;
        // (x^2 - 1) and (x - 1) share the factor x - 1
        let a = vec![6, 0, 1];
        let b = vec![6, 1];
        assert_eq!(gcd(&a, &b, p), vec![6, 1]);
        assert_eq!(rem(&a, &b, p), Vec::<u64>::new());
    }

    #[test]
    fn irreducibility_small() {
        // x^2 + 1 over F_3 is irreducible, over F_5 it splits
        assert!(is_irreducible(&vec![1, 0, 1], 3));
        assert!(!is_irreducible(&vec![1, 0, 1], 5));
        // x^2 + x + 1 is the only irreducible quadratic over F_2
        assert!(is_irreducible(&vec![1, 1, 1], 2));
        assert!(!is_irreducible(&vec![1, 0, 1], 2));
    }

    #[test]
    fn phi7_factors_over_f2() {
        let anchor = special_anchor(2, 7).unwrap();
        assert_eq!(deg(&anchor.factor), Some(3));
        assert_eq!(deg(&anchor.other), Some(3));
        assert_eq!(
            mul(&anchor.factor, &anchor.other, 2),
            cyclotomic_prime(7)
        );
        // Phi_7 = (x^3 + x + 1)(x^3 + x^2 + 1) over F_2; the square-class
        // section vanishes on x^3 + x + 1, and x^3 + x^2 + 1 sorts first.
        assert_eq!(anchor.factor, vec![1, 0, 1, 1]);
        assert_eq!(anchor.other, vec![1, 1, 0, 1]);
        assert_eq!(anchor.delta, 1);
    }

    #[test]
    fn anchor_rejects_generic() {
        assert!(matches!(special_anchor(11, 7), Err(Error::Unsupported(_))));
    }

    #[test]
    fn anchor_large_instance() {
        let anchor = special_anchor(3, 107).unwrap();
        assert_eq!(deg(&anchor.factor), Some(53));
        assert!(anchor.delta == 1 || anchor.delta == -1);
    }
}
