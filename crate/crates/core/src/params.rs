//! Instance validation and derived parameters: the index-2 condition, the
//! class number h of Q(sqrt(-l)), the norm-equation pair (a, b), and the
//! residue-class partition of Z/l^2 Z.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, legendre_symbol, multiplicative_order, pow_mod};
use crate::error::{Error, Result};
use crate::polyfp;

/// Partition class of a residue k mod l^2 (Eq. S = S0 u lH1 u H2 split).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KClass {
    #[serde(rename = "k0")]
    Zero,
    #[serde(rename = "lH1_0")]
    LH1_0,
    #[serde(rename = "lH1_1")]
    LH1_1,
    #[serde(rename = "H2_0")]
    H2_0,
    #[serde(rename = "H2_1")]
    H2_1,
}

impl KClass {
    pub const ALL: [KClass; 5] = [
        KClass::Zero,
        KClass::LH1_0,
        KClass::LH1_1,
        KClass::H2_0,
        KClass::H2_1,
    ];

    pub fn label(self) -> &'static str {
        match self {
            KClass::Zero => "k0",
            KClass::LH1_0 => "lH1_0",
            KClass::LH1_1 => "lH1_1",
            KClass::H2_0 => "H2_0",
            KClass::H2_1 => "H2_1",
        }
    }

    /// Class size inside {0, ..., l^2 - 1}.
    pub fn size(self, l: u64) -> u64 {
        match self {
            KClass::Zero => 1,
            KClass::LH1_0 | KClass::LH1_1 => (l - 1) / 2,
            KClass::H2_0 | KClass::H2_1 => l * (l - 1) / 2,
        }
    }
}

/// Classify k mod l^2. A unit u is a square mod l^2 exactly when u mod l is a
/// square mod l, so a single Legendre symbol decides each branch.
pub fn classify_residue(k: u64, l: u64) -> KClass {
    let n = l * l;
    let k = k % n;
    if k == 0 {
        KClass::Zero
    } else if k % l == 0 {
        match legendre_symbol((k / l) as i64, l) {
            1 => KClass::LH1_0,
            _ => KClass::LH1_1,
        }
    } else {
        match legendre_symbol((k % l) as i64, l) {
            1 => KClass::H2_0,
            _ => KClass::H2_1,
        }
    }
}

/// Arithmetic case split of the trace table: generic when -l is not 1 mod p,
/// special otherwise (then delta in {-1, +1} picks between the two tables).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum ArithCase {
    Generic,
    Special { delta: i8 },
}

/// A validated (p, l) instance with every derived parameter of the setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub p: u64,
    pub l: u64,
    /// N = l^2.
    pub n: u64,
    /// f = l(l-1)/2 = ord_N(p).
    pub f: u64,
    /// Class number of Q(sqrt(-l)).
    pub h: u32,
    /// Norm-equation solution a^2 + l b^2 = 4 p^h with the congruence-fixed
    /// sign of a and b normalized positive.
    pub a: BigInt,
    pub b: BigInt,
    pub case: ArithCase,
}

impl Params {
    /// q = p^f as a big natural, computed on demand.
    pub fn q(&self) -> BigUint {
        BigUint::from(self.p).pow(self.f as u32)
    }

    pub fn q_minus_1(&self) -> BigUint {
        self.q() - 1u32
    }

    pub fn is_special(&self) -> bool {
        matches!(self.case, ArithCase::Special { .. })
    }

    /// The standalone-convention delta; None in the generic case.
    pub fn delta(&self) -> Option<i8> {
        match self.case {
            ArithCase::Special { delta } => Some(delta),
            ArithCase::Generic => None,
        }
    }

    pub fn class_of(&self, k: u64) -> KClass {
        classify_residue(k, self.l)
    }
}

/// Class number of Q(sqrt(-l)) for prime l = 3 mod 4, l > 3, by the Dirichlet
/// character sum h = (sum_{0 < a < l/2} (a|l)) / (2 - (2|l)). Exact, O(l).
pub fn class_number(l: u64) -> Result<u32> {
    if !is_prime(l) || l % 4 != 3 || l == 3 {
        return Err(Error::UnsupportedDiscriminant(l));
    }
    let s: i64 = (1..l.div_ceil(2))
        .map(|a| legendre_symbol(a as i64, l) as i64)
        .sum();
    let denom = 2 - legendre_symbol(2, l) as i64;
    if s <= 0 || s % denom != 0 {
        return Err(Error::InternalInconsistency(format!(
            "Dirichlet sum {s} not divisible by {denom} for l = {l}"
        )));
    }
    Ok((s / denom) as u32)
}

fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

/// Solve a^2 + l b^2 = 4 p^h with a = -2 p^((l-1+2h)/4) (mod l), b > 0.
/// Scans b upward and keeps only primitive solutions (p does not divide both
/// a and b), so the returned pair generates the h-th power of a prime ideal
/// over p.
pub fn solve_ab(p: u64, l: u64, h: u32) -> Result<(BigInt, BigInt)> {
    let four_ph = BigInt::from(4u32) * BigInt::from(p).pow(h);
    let lb = BigInt::from(l);
    let pb = BigInt::from(p);
    // a mod l forced by the congruence; the exponent is integral because
    // l = 3 mod 4 and h is odd for this discriminant family.
    let e = (l - 1 + 2 * h as u64) / 4;
    let a_target = (l - 2 * pow_mod(p % l, e, l) % l) % l;
    let mut b = BigInt::one();
    loop {
        let rest = &four_ph - &lb * &b * &b;
        if rest.is_negative() {
            return Err(Error::NoRepresentation { p, l, h });
        }
        if let Some(a0) = exact_sqrt(&rest) {
            if !a0.is_zero() {
                let primitive = !((&a0 % &pb).is_zero() && (&b % &pb).is_zero());
                if primitive {
                    for a in [a0.clone(), -a0] {
                        if (&a % &lb + &lb) % &lb == BigInt::from(a_target) {
                            return Ok((a, b));
                        }
                    }
                }
            }
        }
        b += 1;
    }
}

/// The residue-class partition of Z/l^2 Z with its explicit sets and the
/// primitive root generating them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResiduePartition {
    pub l: u64,
    /// Smallest primitive root of l^2.
    pub gamma: u64,
    pub h1_0: BTreeSet<u64>,
    pub h1_1: BTreeSet<u64>,
    pub h2_0: BTreeSet<u64>,
    pub h2_1: BTreeSet<u64>,
}

impl ResiduePartition {
    pub fn set(&self, class: KClass) -> Option<&BTreeSet<u64>> {
        match class {
            KClass::Zero => None,
            KClass::LH1_0 => Some(&self.h1_0),
            KClass::LH1_1 => Some(&self.h1_1),
            KClass::H2_0 => Some(&self.h2_0),
            KClass::H2_1 => Some(&self.h2_1),
        }
    }
}

/// Smallest primitive root of l^2.
pub fn smallest_primitive_root(l: u64) -> u64 {
    let n = l * l;
    let phi = l * (l - 1);
    (2..)
        .find(|&g| {
            g % l != 0 && multiplicative_order(g, n).map(|e| e == phi).unwrap_or(false)
        })
        .unwrap()
}

pub fn residue_partition(l: u64) -> Result<ResiduePartition> {
    if !is_prime(l) || l % 4 != 3 || l == 3 {
        return Err(Error::BadL(l));
    }
    let n = l * l;
    let gamma = smallest_primitive_root(l);
    let mut h2_0 = BTreeSet::new();
    let g2 = pow_mod(gamma, 2, n);
    let mut x = 1u64;
    loop {
        h2_0.insert(x);
        x = crate::arith::mul_mod(x, g2, n);
        if x == 1 {
            break;
        }
    }
    let h2_1: BTreeSet<u64> = h2_0
        .iter()
        .map(|&x| crate::arith::mul_mod(gamma, x, n))
        .collect();
    let h1_0: BTreeSet<u64> = (1..l).filter(|&u| legendre_symbol(u as i64, l) == 1).collect();
    let h1_1: BTreeSet<u64> = (1..l).filter(|&u| !h1_0.contains(&u)).collect();
    Ok(ResiduePartition {
        l,
        gamma,
        h1_0,
        h1_1,
        h2_0,
        h2_1,
    })
}

/// Validate a (p, l) pair and derive the full parameter record. Fails unless
/// l = 3 mod 4 (l prime, not 3), p is prime, and ord_{l^2}(p) = l(l-1)/2.
pub fn validate_instance(p: u64, l: u64) -> Result<Params> {
    if !is_prime(l) || l % 4 != 3 || l == 3 {
        return Err(Error::BadL(l));
    }
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("p = {p} is not prime")));
    }
    if p == l {
        return Err(Error::InvalidInput(format!("p = l = {p} is not allowed")));
    }
    let n = l * l;
    let f = l * (l - 1) / 2;
    let order = multiplicative_order(p, n)?;
    if order != f {
        return Err(Error::NotIndexTwo {
            p,
            modulus: n,
            order,
            expected: f,
        });
    }
    let h = class_number(l)?;
    debug_assert!(h % 2 == 1, "class number of Q(sqrt(-l)) is odd for prime l");
    let (a, b) = solve_ab(p, l, h)?;
    let case = if (l + 1) % p == 0 {
        let anchor = polyfp::special_anchor(p, l)?;
        ArithCase::Special {
            delta: anchor.delta,
        }
    } else {
        ArithCase::Generic
    };
    Ok(Params {
        p,
        l,
        n,
        f,
        h,
        a,
        b,
        case,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_numbers() {
        assert_eq!(class_number(7).unwrap(), 1);
        assert_eq!(class_number(107).unwrap(), 3);
        assert_eq!(class_number(23).unwrap(), 3);
        assert!(matches!(
            class_number(5),
            Err(Error::UnsupportedDiscriminant(5))
        ));
        assert!(matches!(
            class_number(3),
            Err(Error::UnsupportedDiscriminant(3))
        ));
    }

    #[test]
    fn solve_ab_examples() {
        assert_eq!(
            solve_ab(2, 7, 1).unwrap(),
            (BigInt::from(-1), BigInt::from(1))
        );
        assert_eq!(
            solve_ab(11, 7, 1).unwrap(),
            (BigInt::from(-4), BigInt::from(2))
        );
        assert_eq!(
            solve_ab(3, 107, 3).unwrap(),
            (BigInt::from(1), BigInt::from(1))
        );
    }

    #[test]
    fn solve_ab_satisfies_norm_equation() {
        for (p, l) in [(2u64, 7u64), (11, 7), (3, 107), (5, 19), (2, 23), (5, 11)] {
            let h = class_number(l).unwrap();
            let (a, b) = solve_ab(p, l, h).unwrap();
            let lhs = &a * &a + BigInt::from(l) * &b * &b;
            assert_eq!(lhs, BigInt::from(4u32) * BigInt::from(p).pow(h));
            assert!(b.is_positive());
        }
    }

    #[test]
    fn validate_examples() {
        let params = validate_instance(2, 7).unwrap();
        assert_eq!(params.f, 21);
        assert_eq!(params.h, 1);
        assert_eq!(params.a, BigInt::from(-1));
        assert_eq!(params.b, BigInt::from(1));
        assert!(params.is_special());

        assert!(matches!(
            validate_instance(3, 7),
            Err(Error::NotIndexTwo { order: 42, .. })
        ));
        assert!(matches!(
            validate_instance(2, 11),
            Err(Error::NotIndexTwo { order: 110, .. })
        ));
        assert!(matches!(validate_instance(2, 5), Err(Error::BadL(5))));
        assert!(matches!(validate_instance(2, 3), Err(Error::BadL(3))));
        assert!(matches!(validate_instance(4, 7), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn validate_generic_instances() {
        let p117 = validate_instance(11, 7).unwrap();
        assert_eq!(p117.case, ArithCase::Generic);
        assert_eq!(p117.f, 21);
        let p511 = validate_instance(5, 11).unwrap();
        assert_eq!(p511.case, ArithCase::Generic);
        assert_eq!(p511.f, 55);
    }

    #[test]
    fn validate_large_special() {
        let params = validate_instance(3, 107).unwrap();
        assert_eq!(params.f, 5671);
        assert_eq!(params.h, 3);
        assert!(params.is_special());
        let p519 = validate_instance(5, 19).unwrap();
        assert_eq!(p519.f, 171);
        assert_eq!(p519.h, 1);
        assert!(p519.is_special());
    }

    #[test]
    fn partition_l7() {
        let part = residue_partition(7).unwrap();
        assert_eq!(part.gamma, 3);
        assert_eq!(part.h1_0, BTreeSet::from([1, 2, 4]));
        assert_eq!(part.h1_1, BTreeSet::from([3, 5, 6]));
        assert_eq!(part.h2_0.len(), 21);
        assert_eq!(part.h2_1.len(), 21);
        // {0} u lH1_0 u lH1_1 u H2_0 u H2_1 partitions Z/49
        let mut all = BTreeSet::from([0u64]);
        for s in [&part.h2_0, &part.h2_1] {
            all.extend(s.iter().copied());
        }
        for s in [&part.h1_0, &part.h1_1] {
            all.extend(s.iter().map(|u| 7 * u));
        }
        assert_eq!(all, (0..49).collect());
        // u in H2_0 iff u mod l in H1_0
        assert!(part.h2_0.iter().all(|u| part.h1_0.contains(&(u % 7))));
    }

    #[test]
    fn classify_matches_partition() {
        let part = residue_partition(7).unwrap();
        for k in 0..49 {
            let class = classify_residue(k, 7);
            let member = match class {
                KClass::Zero => k == 0,
                KClass::LH1_0 => k % 7 == 0 && part.h1_0.contains(&(k / 7)),
                KClass::LH1_1 => k % 7 == 0 && part.h1_1.contains(&(k / 7)),
                KClass::H2_0 => part.h2_0.contains(&k),
                KClass::H2_1 => part.h2_1.contains(&k),
            };
            assert!(member, "k = {k} misclassified as {class:?}");
        }
    }

    #[test]
    fn subgroup_generated_by_p_is_h2_0() {
        // <p> mod l^2 equals the square class, enumerable for small l
        for (p, l) in [(2u64, 7u64), (11, 7), (2, 23), (5, 19), (5, 11)] {
            let part = residue_partition(l).unwrap();
            let n = l * l;
            let mut subgroup = BTreeSet::new();
            let mut x = 1u64;
            loop {
                subgroup.insert(x);
                x = crate::arith::mul_mod(x, p % n, n);
                if x == 1 {
                    break;
                }
            }
            assert_eq!(subgroup, part.h2_0, "instance ({p},{l})");
        }
    }
}
