//! Elementary modular arithmetic on machine integers: modular exponentiation,
//! primality, integer factorization (trial division with a Pollard rho
//! fallback), multiplicative orders, Legendre symbols, and square roots mod p.

use crate::error::{Error, Result};

/// (a * b) mod m without overflow for m < 2^63.
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// a^e mod m by square and multiply.
pub fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Deterministic Miller-Rabin, valid for all u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    // n is odd, composite, and has no factor below the trial-division bound.
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization as (prime, exponent) pairs, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    let push = |p: u64, out: &mut Vec<(u64, u32)>| match out.iter_mut().find(|(q, _)| *q == p) {
        Some((_, e)) => *e += 1,
        None => out.push((p, 1)),
    };
    for p in [2u64, 3, 5] {
        while n % p == 0 {
            push(p, &mut out);
            n /= p;
        }
    }
    let mut d = 7u64;
    // trial division up to 10^6, then rho on what is left
    while d <= 1_000_000 && d * d <= n {
        while n % d == 0 {
            push(d, &mut out);
            n /= d;
        }
        d += 2;
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            push(m, &mut out);
            continue;
        }
        let f = pollard_rho(m);
        stack.push(f);
        stack.push(m / f);
    }
    out.sort_unstable();
    out
}

/// Euler's totient from the factorization of n.
pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .map(|(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

/// Smallest e >= 1 with x^e = 1 mod n. Starts from phi(n) and strips prime
/// factors, so it stays fast even when the order itself is large.
pub fn multiplicative_order(x: u64, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("modulus {n} < 2")));
    }
    let x = x % n;
    if gcd(x, n) != 1 {
        return Err(Error::InvalidInput(format!(
            "gcd({x}, {n}) != 1, multiplicative order undefined"
        )));
    }
    let mut e = euler_phi(n);
    for (r, _) in factorize(e) {
        while e % r == 0 && pow_mod(x, e / r, n) == 1 {
            e /= r;
        }
    }
    debug_assert_eq!(pow_mod(x, e, n), 1);
    Ok(e)
}

/// Legendre symbol (a | p) for an odd prime p, via Euler's criterion.
pub fn legendre_symbol(a: i64, p: u64) -> i32 {
    debug_assert!(p > 2 && is_prime(p));
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    match pow_mod(a, (p - 1) / 2, p) {
        1 => 1,
        x if x == p - 1 => -1,
        _ => unreachable!("p not prime"),
    }
}

/// Canonical square root of a mod p: the representative in [0, p/2].
/// Tonelli-Shanks in the general case.
pub fn sqrt_mod_p(a: i64, p: u64) -> Result<u64> {
    let a = a.rem_euclid(p as i64) as u64;
    if p == 2 {
        return Ok(a);
    }
    if a == 0 {
        return Ok(0);
    }
    if legendre_symbol(a as i64, p) != 1 {
        return Err(Error::NotAResidue(a, p));
    }
    let r = if p % 4 == 3 {
        pow_mod(a, (p + 1) / 4, p)
    } else {
        tonelli_shanks(a, p)
    };
    Ok(r.min(p - r))
}

fn tonelli_shanks(a: u64, p: u64) -> u64 {
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2u64;
    while legendre_symbol(z as i64, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_examples() {
        assert_eq!(multiplicative_order(2, 49).unwrap(), 21);
        assert_eq!(multiplicative_order(3, 11449).unwrap(), 5671);
        assert_eq!(multiplicative_order(1, 5).unwrap(), 1);
    }

    #[test]
    fn order_rejects_non_coprime() {
        assert!(matches!(
            multiplicative_order(6, 9),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn legendre_and_sqrt() {
        assert_eq!(legendre_symbol(2, 7), 1);
        assert_eq!(legendre_symbol(3, 7), -1);
        assert_eq!(legendre_symbol(14, 7), 0);
        assert_eq!(sqrt_mod_p(4, 11).unwrap(), 2);
        assert_eq!(sqrt_mod_p(-7, 11).unwrap(), 2);
        assert_eq!(sqrt_mod_p(2, 7).unwrap(), 3);
        assert_eq!(sqrt_mod_p(3, 13).unwrap(), 4);
        assert_eq!(sqrt_mod_p(3, 7), Err(Error::NotAResidue(3, 7)));
    }

    #[test]
    fn sqrt_is_canonical_branch() {
        for p in [11u64, 13, 17, 101, 65537] {
            for a in 1..30i64 {
                if legendre_symbol(a, p) == 1 {
                    let r = sqrt_mod_p(a, p).unwrap();
                    assert!(r <= p / 2);
                    assert_eq!(mul_mod(r, r, p) as i64, a.rem_euclid(p as i64));
                }
            }
        }
    }

    #[test]
    fn factorize_mersenne21() {
        // group order used by the flagship field construction
        assert_eq!(
            factorize((1u64 << 21) - 1),
            vec![(7, 2), (127, 1), (337, 1)]
        );
    }

    #[test]
    fn rho_handles_large_semiprime() {
        let n = 1_000_003u64 * 999_983;
        assert_eq!(factorize(n), vec![(999_983, 1), (1_000_003, 1)]);
    }
}
