//! Closed-form layer: index-2 Gauss sums, trace tables, the per-class I-sums,
//! the transform-identity assembly of each Walsh value, and the spectrum
//! tables with exact big-integer frequencies.
//!
//! Two independent paths produce every nonzero-class value: the I-sum
//! assembly (`walsh_value_via_eq32`) and the tabulated displays
//! (`theorem_value`). Their exact equality on every class is a standing test.
//!
//! The published b = 0 display (the "(l-1)/2 (A + B + l p^((f-h)/2) a)" row)
//! actually evaluates sum_j G(chi^j) over the order-N characters, which is
//! the transform of x -> Tr(x^N) at zero, not of x -> Tr(x^((q-1)/N)). The
//! correct value is 1 + (q-1)/N * I0; with it the mean identity
//! sum_b f_hat(b) = q and Parseval hold exactly, and the brute-force oracle
//! agrees. `spectrum_at_zero` implements the corrected form;
//! `character_sum_all_orders` keeps the published expression, which is still
//! a true Gauss-sum identity in its own right.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::algebra::{AlgNum, QuadGaussValue};
use crate::arith::{legendre_symbol, mul_mod, sqrt_mod_p};
use crate::embed::embed_algnum;
use crate::error::{Error, Result};
use crate::field::{BetaTable, FieldCtx};
use crate::oracle;
use crate::params::{ArithCase, KClass, Params};

// ---------------------------------------------------------------------------
// conventions

/// The trace-table anchor: epsilon in F_p for the generic case, delta for the
/// special case. Together with the sign of b this pins which of the two
/// conjugate closed-form variants is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceAnchor {
    Generic { epsilon: u64 },
    Special { delta: i8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConventionSource {
    /// Canonical square-root branch (generic) or the lexicographically
    /// smallest Phi_l factor (special); no field required.
    Standalone,
    /// Anchored to beta = alpha^((q-1)/N) of an explicit field.
    Field,
}

/// A resolved (b sign, trace anchor) pair. The sign of b is pinned to the
/// anchor by requiring (a + b)/2 + b*eps_hat = 0 mod p, i.e. that
/// (a + b sqrt(-l))/2 generates the prime ideal the anchor reduces through.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convention {
    pub b: BigInt,
    pub anchor: TraceAnchor,
    pub source: ConventionSource,
}

impl Convention {
    /// The F_p image of (-1 + sqrt(-l))/2 under the anchor.
    pub fn eps_hat(&self, p: u64) -> u64 {
        match self.anchor {
            TraceAnchor::Generic { epsilon } => epsilon,
            TraceAnchor::Special { delta } => {
                if delta == -1 {
                    0
                } else {
                    p - 1
                }
            }
        }
    }

    pub fn delta(&self) -> Option<i8> {
        match self.anchor {
            TraceAnchor::Special { delta } => Some(delta),
            TraceAnchor::Generic { .. } => None,
        }
    }

    pub fn epsilon(&self) -> Option<u64> {
        match self.anchor {
            TraceAnchor::Generic { epsilon } => Some(epsilon),
            TraceAnchor::Special { .. } => None,
        }
    }

    pub fn standalone(params: &Params) -> Result<Convention> {
        let anchor = match params.case {
            ArithCase::Special { delta } => TraceAnchor::Special { delta },
            ArithCase::Generic => {
                let r = sqrt_mod_p(-(params.l as i64), params.p)?;
                let inv2 = (params.p + 1) / 2;
                let epsilon = mul_mod((r + params.p - 1) % params.p, inv2, params.p);
                TraceAnchor::Generic { epsilon }
            }
        };
        let b = pick_signed_b(params, eps_of(&anchor, params.p))?;
        Ok(Convention {
            b,
            anchor,
            source: ConventionSource::Standalone,
        })
    }

    /// Anchor to an explicit field: eps_hat is read off beta^l, so the trace
    /// table, the Gauss sums and the spectrum all refer to the same alpha.
    pub fn from_field(params: &Params, ctx: &FieldCtx, table: &BetaTable) -> Result<Convention> {
        let eps = oracle::square_class_section(ctx, table, params.l)?;
        let anchor = match params.case {
            ArithCase::Special { .. } => match eps {
                0 => TraceAnchor::Special { delta: -1 },
                e if e == ctx.p - 1 => TraceAnchor::Special { delta: 1 },
                e => {
                    return Err(Error::InternalInconsistency(format!(
                        "special-case section = {e}, expected 0 or -1"
                    )))
                }
            },
            ArithCase::Generic => {
                // sanity: (2 eps + 1)^2 = -l mod p
                let r = (2 * eps + 1) % ctx.p;
                let want = (ctx.p - (params.l % ctx.p)) % ctx.p;
                if mul_mod(r, r, ctx.p) != want {
                    return Err(Error::InternalInconsistency(
                        "field section is not a root of x^2 + x + (1+l)/4".into(),
                    ));
                }
                TraceAnchor::Generic { epsilon: eps }
            }
        };
        let b = pick_signed_b(params, eps)?;
        Ok(Convention {
            b,
            anchor,
            source: ConventionSource::Field,
        })
    }
}

fn eps_of(anchor: &TraceAnchor, p: u64) -> u64 {
    match *anchor {
        TraceAnchor::Generic { epsilon } => epsilon,
        TraceAnchor::Special { delta } => {
            if delta == -1 {
                0
            } else {
                p - 1
            }
        }
    }
}

/// Exactly one sign of b makes (a + b)/2 + b*eps_hat vanish mod p; that sign
/// matches the prime-ideal convention of the anchor.
fn pick_signed_b(params: &Params, eps_hat: u64) -> Result<BigInt> {
    let p = BigInt::from(params.p);
    let eps = BigInt::from(eps_hat);
    let mut found = Vec::new();
    for sign in [1i64, -1] {
        let b = &params.b * BigInt::from(sign);
        let sum = &params.a + &b;
        if sum.is_even() {
            let v = sum / BigInt::from(2) + &b * &eps;
            if v.mod_floor(&p).is_zero() {
                found.push(b);
            }
        }
    }
    match found.len() {
        1 => Ok(found.pop().unwrap()),
        n => Err(Error::InternalInconsistency(format!(
            "{n} signs of b satisfy the ideal-membership congruence"
        ))),
    }
}

// ---------------------------------------------------------------------------
// small builders

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn an_int(params: &Params, n: i64) -> AlgNum {
    AlgNum::from_int(params.p, params.l, n)
}

fn an_big(params: &Params, n: &BigUint) -> AlgNum {
    AlgNum::from_bigint(params.p, params.l, BigInt::from(n.clone()))
}

fn zeta(params: &Params, e: u64) -> AlgNum {
    AlgNum::zeta_pow(params.p, params.l, (e % params.p) as i64)
}

fn sqrt_neg_l(params: &Params) -> AlgNum {
    AlgNum::sqrt_neg_l(params.p, params.l)
}

/// p^e as an exact rational scalar.
fn p_pow(params: &Params, e: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(params.p).pow(e as u32))
}

/// (a + b sqrt(-l)) / 2 with the convention-signed b.
fn half_ab(params: &Params, conv: &Convention) -> AlgNum {
    let a = BigRational::new(params.a.clone(), BigInt::from(2));
    let b = BigRational::new(conv.b.clone(), BigInt::from(2));
    AlgNum::from_rational(params.p, params.l, a).add(&sqrt_neg_l(params).scale(&b))
}

/// A = p^((f-hl)/2) ((a+b sqrt(-l))/2)^l and its conjugate B.
fn big_a_b(params: &Params, conv: &Convention) -> (AlgNum, AlgNum) {
    let c = half_ab(params, conv);
    let scale = p_pow(params, (params.f - params.h as u64 * params.l) / 2);
    let a = c.pow(params.l).scale(&scale);
    let b = a.galois_flip();
    (a, b)
}

// ---------------------------------------------------------------------------
// quadratic Gauss sums (Lemma 2.2)

/// G(eta) over F_{p^f} for the quadratic character eta, p odd:
/// (-1)^(f-1) sqrt(q) when p = 1 mod 4, (-1)^(f-1) i^f sqrt(q) otherwise.
pub fn quadratic_gauss(p: u64, f: u64) -> Result<QuadGaussValue> {
    if p == 2 {
        return Err(Error::Unsupported(
            "p = 2 has no quadratic multiplicative character".into(),
        ));
    }
    if !crate::arith::is_prime(p) {
        return Err(Error::InvalidInput(format!("p = {p} is not prime")));
    }
    let sign = if (f - 1) % 2 == 0 { 1 } else { -1 };
    let i_power = if p % 4 == 1 { 0 } else { (f % 4) as u32 };
    Ok(QuadGaussValue::new(p, f, sign, i_power))
}

// ---------------------------------------------------------------------------
// index-2 Gauss sums (Lemma 2.3)

/// G(chi^i) for the order-N character chi with chi(alpha) = zeta_N, writing
/// i = u l^t: the closed form for t, conjugated when u is outside <p>.
/// Membership in <p> is the square class of u mod l.
pub fn gauss_sum_index2_with(params: &Params, conv: &Convention, i: u64) -> Result<AlgNum> {
    let i = i % params.n;
    if i == 0 {
        return Err(Error::InvalidExponent(i));
    }
    let (t, u) = if i % params.l == 0 {
        (1u32, i / params.l)
    } else {
        (0u32, i)
    };
    let lt = params.l.pow(t);
    let scale = p_pow(params, (params.f - params.h as u64 * lt) / 2);
    let base = half_ab(params, conv).pow(lt).scale(&scale);
    if legendre_symbol((u % params.l) as i64, params.l) == 1 {
        Ok(base)
    } else {
        // value lies in Q(sqrt(-l)), where Galois flip and complex
        // conjugation agree
        Ok(base.galois_flip())
    }
}

pub fn gauss_sum_index2(params: &Params, i: u64) -> Result<AlgNum> {
    gauss_sum_index2_with(params, &Convention::standalone(params)?, i)
}

/// sum_{j=1}^{N-1} G(chi^j): the published b = 0 display,
/// (l-1)/2 (A + B + l p^((f-h)/2) a). Kept as the Gauss-sum identity it is.
pub fn character_sum_all_orders(params: &Params, conv: &Convention) -> AlgNum {
    let (a_val, b_val) = big_a_b(params, conv);
    let l = params.l as i64;
    let pa = AlgNum::from_bigint(params.p, params.l, params.a.clone())
        .scale(&p_pow(params, (params.f - params.h as u64) / 2))
        .scale_int(l);
    a_val.add(&b_val).add(&pa).scale(&rat(l - 1, 2))
}

// ---------------------------------------------------------------------------
// trace tables (Lemma 3.2)

/// The map class -> Tr_{q/p}(beta^i) for i in that class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceTable {
    pub p: u64,
    pub l: u64,
    pub zero: u64,
    pub lh1_0: u64,
    pub lh1_1: u64,
    /// Units always trace to 0.
    pub units: u64,
    pub epsilon: Option<u64>,
}

impl TraceTable {
    pub fn entry(&self, class: KClass) -> u64 {
        match class {
            KClass::Zero => self.zero,
            KClass::LH1_0 => self.lh1_0,
            KClass::LH1_1 => self.lh1_1,
            KClass::H2_0 | KClass::H2_1 => self.units,
        }
    }
}

pub fn trace_beta_table_with(params: &Params, conv: &Convention) -> TraceTable {
    let (p, l) = (params.p, params.l);
    match conv.anchor {
        TraceAnchor::Generic { epsilon } => {
            // eps solves x^2 + x + (1+l)/4 = 0 mod p
            debug_assert_eq!(
                {
                    let inv4 = mul_mod((p + 1) / 2, (p + 1) / 2, p);
                    let c = mul_mod((1 + l % p) % p, inv4, p);
                    (mul_mod(epsilon, epsilon, p) + epsilon + c) % p
                },
                0
            );
            let lm = l % p;
            TraceTable {
                p,
                l,
                zero: params.f % p,
                lh1_0: mul_mod(lm, epsilon, p),
                lh1_1: (p - mul_mod(lm, (1 + epsilon) % p, p)) % p,
                units: 0,
                epsilon: Some(epsilon),
            }
        }
        TraceAnchor::Special { delta } => TraceTable {
            p,
            l,
            zero: 1,
            lh1_0: if delta == -1 { 0 } else { 1 },
            lh1_1: if delta == -1 { 1 } else { 0 },
            units: 0,
            epsilon: None,
        },
    }
}

/// Table under the standalone convention (canonical root branch in the
/// generic case).
pub fn trace_beta_table(params: &Params) -> Result<TraceTable> {
    Ok(trace_beta_table_with(params, &Convention::standalone(params)?))
}

// ---------------------------------------------------------------------------
// I-sums (Lemmas 3.4, 3.5, 3.6)

/// The five exact sums entering the transform assembly for a class of k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ISums {
    pub k_class: KClass,
    pub i0: AlgNum,
    pub i1_0: AlgNum,
    pub i1_1: AlgNum,
    pub i2_0: AlgNum,
    pub i2_1: AlgNum,
}

/// I0 = sum_i psi(beta^i), independent of k.
pub fn i_zero(params: &Params, conv: &Convention) -> AlgNum {
    let l = params.l as i64;
    let table = trace_beta_table_with(params, conv);
    let z0 = zeta(params, table.zero);
    let zp = zeta(params, table.lh1_0);
    let zm = zeta(params, table.lh1_1);
    // z0 + (l-1)/2 (zp + zm) + l(l-1)
    z0.add(&zp.add(&zm).scale(&rat(l - 1, 2)))
        .add(&an_int(params, l * (l - 1)))
}

pub fn i_sums_with(params: &Params, conv: &Convention, k_class: KClass) -> ISums {
    let l = params.l as i64;
    let i0 = i_zero(params, conv);
    let half = rat(1, 2);
    let s = sqrt_neg_l(params);
    let cp = an_int(params, -1).add(&s).scale(&half); // (-1 + sqrt(-l))/2
    let cm = an_int(params, -1).sub(&s).scale(&half); // (-1 - sqrt(-l))/2
    let ep = an_int(params, 1).add(&s).scale(&half); // (1 + sqrt(-l))/2
    let em = an_int(params, 1).sub(&s).scale(&half); // (1 - sqrt(-l))/2

    match conv.anchor {
        TraceAnchor::Generic { .. } => {
            let table = trace_beta_table_with(params, conv);
            let z0 = zeta(params, table.zero);
            let zp = zeta(params, table.lh1_0);
            let zm = zeta(params, table.lh1_1);
            let zsum = zp.add(&zm);
            // shared by k = 0 and k in lH1
            let j_val = z0
                .scale(&rat(l - 1, 2))
                .add(&zsum.scale(&(rat(l - 1, 2) * rat(l - 1, 2))))
                .sub(&an_int(params, l * (l - 1) / 2));
            let dp = ep.mul(&ep);
            let dm = em.mul(&em);
            let (i1_0, i1_1, i2_0, i2_1) = match k_class {
                KClass::Zero => {
                    let w = rat(l * (l - 1), 2);
                    let i2_0 = z0
                        .add(&cm.mul(&zp))
                        .add(&cp.mul(&zm))
                        .scale(&w);
                    let i2_1 = z0
                        .add(&cp.mul(&zp))
                        .add(&cm.mul(&zm))
                        .scale(&w);
                    (j_val.clone(), j_val, i2_0, i2_1)
                }
                KClass::LH1_0 => {
                    let quarter = rat(l * l + l, 4);
                    let i2_0 = cm
                        .mul(&z0)
                        .scale_int(l)
                        .add(&zm.scale(&quarter))
                        .add(&dp.mul(&zp).scale_int(l));
                    let i2_1 = cp
                        .mul(&z0)
                        .scale_int(l)
                        .add(&zm.scale(&quarter))
                        .add(&dm.mul(&zp).scale_int(l));
                    (j_val.clone(), j_val, i2_0, i2_1)
                }
                KClass::LH1_1 => {
                    let quarter = rat(l * l + l, 4);
                    let i2_0 = cp
                        .mul(&z0)
                        .scale_int(l)
                        .add(&zp.scale(&quarter))
                        .add(&dm.mul(&zm).scale_int(l));
                    let i2_1 = cm
                        .mul(&z0)
                        .scale_int(l)
                        .add(&zp.scale(&quarter))
                        .add(&dp.mul(&zm).scale_int(l));
                    (j_val.clone(), j_val, i2_0, i2_1)
                }
                KClass::H2_0 => {
                    let i1_0 = ep
                        .scale_int(l)
                        .add(&cm.scale(&rat(l - 1, 2)).mul(&zsum))
                        .add(&cm.mul(&z0));
                    let i1_1 = em
                        .scale_int(l)
                        .add(&cp.scale(&rat(l - 1, 2)).mul(&zsum))
                        .add(&cp.mul(&z0));
                    let zero = AlgNum::zero(params.p, params.l);
                    (i1_0, i1_1, zero.clone(), zero)
                }
                KClass::H2_1 => {
                    let i1_0 = em
                        .scale_int(l)
                        .add(&cp.scale(&rat(l - 1, 2)).mul(&zsum))
                        .add(&cp.mul(&z0));
                    let i1_1 = ep
                        .scale_int(l)
                        .add(&cm.scale(&rat(l - 1, 2)).mul(&zsum))
                        .add(&cm.mul(&z0));
                    let zero = AlgNum::zero(params.p, params.l);
                    (i1_0, i1_1, zero.clone(), zero)
                }
            };
            ISums {
                k_class,
                i0,
                i1_0,
                i1_1,
                i2_0,
                i2_1,
            }
        }
        TraceAnchor::Special { delta } => {
            // w = zeta_p - 1 throughout; note (1 - zeta_p) = -w
            let w = zeta(params, 1).sub(&an_int(params, 1));
            let neg_w = w.neg();
            let i1_shared = w.scale(&rat(l * l - 1, 4));
            let dp = ep.mul(&ep);
            let dm = em.mul(&em);
            let (i1_0, i1_1, i2_0, i2_1) = match k_class {
                KClass::Zero => {
                    let scale = rat(l * (l - 1), 2);
                    let (first, second) = if delta == -1 { (&ep, &em) } else { (&em, &ep) };
                    (
                        i1_shared.clone(),
                        i1_shared.clone(),
                        first.mul(&w).scale(&scale),
                        second.mul(&w).scale(&scale),
                    )
                }
                KClass::LH1_0 => {
                    if delta == -1 {
                        (
                            i1_shared.clone(),
                            i1_shared.clone(),
                            dp.mul(&neg_w).scale_int(l),
                            dm.mul(&neg_w).scale_int(l),
                        )
                    } else {
                        let v = neg_w.scale(&rat(l * l + l, 4));
                        (i1_shared.clone(), i1_shared.clone(), v.clone(), v)
                    }
                }
                KClass::LH1_1 => {
                    if delta == -1 {
                        let v = neg_w.scale(&rat(l * l + l, 4));
                        (i1_shared.clone(), i1_shared.clone(), v.clone(), v)
                    } else {
                        (
                            i1_shared.clone(),
                            i1_shared.clone(),
                            dm.mul(&neg_w).scale_int(l),
                            dp.mul(&neg_w).scale_int(l),
                        )
                    }
                }
                KClass::H2_0 => {
                    let zero = AlgNum::zero(params.p, params.l);
                    (
                        ep.mul(&neg_w).scale(&rat(l + 1, 2)),
                        em.mul(&neg_w).scale(&rat(l + 1, 2)),
                        zero.clone(),
                        zero,
                    )
                }
                KClass::H2_1 => {
                    let zero = AlgNum::zero(params.p, params.l);
                    (
                        em.mul(&neg_w).scale(&rat(l + 1, 2)),
                        ep.mul(&neg_w).scale(&rat(l + 1, 2)),
                        zero.clone(),
                        zero,
                    )
                }
            };
            ISums {
                k_class,
                i0,
                i1_0,
                i1_1,
                i2_0,
                i2_1,
            }
        }
    }
}

pub fn i_sums(params: &Params, k_class: KClass) -> Result<ISums> {
    Ok(i_sums_with(params, &Convention::standalone(params)?, k_class))
}

// ---------------------------------------------------------------------------
// Walsh values

/// f_hat(0) = 1 + (q-1)/N * I0 (corrected b = 0 value; see module docs).
pub fn spectrum_at_zero_with(params: &Params, conv: &Convention) -> AlgNum {
    let m = params.q_minus_1() / BigUint::from(params.n);
    let scale = BigRational::from_integer(BigInt::from(m));
    an_int(params, 1).add(&i_zero(params, conv).scale(&scale))
}

pub fn spectrum_at_zero(params: &Params) -> Result<AlgNum> {
    Ok(spectrum_at_zero_with(params, &Convention::standalone(params)?))
}

/// Formula-level path: assemble f_hat(b) for b of class k from the I-sums,
/// f_hat = 1 - I0/N + p^((f-hl)/2)/N (C^l I1^(0) + Cbar^l I1^(1))
///       + p^((f-h)/2)/N (C I2^(0) + Cbar I2^(1)).
pub fn walsh_value_via_eq32_with(params: &Params, conv: &Convention, k_class: KClass) -> AlgNum {
    let sums = i_sums_with(params, conv, k_class);
    let n = params.n as i64;
    let c = half_ab(params, conv);
    let cbar = c.galois_flip();
    let f1 = p_pow(params, (params.f - params.h as u64 * params.l) / 2);
    let f2 = p_pow(params, (params.f - params.h as u64) / 2);
    let term1 = c
        .pow(params.l)
        .mul(&sums.i1_0)
        .add(&cbar.pow(params.l).mul(&sums.i1_1))
        .scale(&(f1 / rat(n, 1)));
    let term2 = c
        .mul(&sums.i2_0)
        .add(&cbar.mul(&sums.i2_1))
        .scale(&(f2 / rat(n, 1)));
    an_int(params, 1)
        .sub(&sums.i0.scale(&rat(1, n)))
        .add(&term1)
        .add(&term2)
}

pub fn walsh_value_via_eq32(params: &Params, k_class: KClass) -> Result<AlgNum> {
    Ok(walsh_value_via_eq32_with(
        params,
        &Convention::standalone(params)?,
        k_class,
    ))
}

/// Tabulated path: the theorem displays. In the generic case the two
/// unit-class rows carry the constant 1/l (the printed tables drop the
/// -l(l-1)/N part of I0) and pair A with the Delta whose constant term is
/// l(1+sqrt(-l))/2, matching the I-sum lemma.
pub fn theorem_value(params: &Params, conv: &Convention, k_class: KClass) -> AlgNum {
    match conv.anchor {
        TraceAnchor::Generic { .. } => theorem37_value(params, conv, k_class),
        TraceAnchor::Special { delta } => theorem38_value(params, conv, delta, k_class),
    }
}

fn theorem37_value(params: &Params, conv: &Convention, k_class: KClass) -> AlgNum {
    let l = params.l as i64;
    let n = params.n as i64;
    let table = trace_beta_table_with(params, conv);
    let z0 = zeta(params, table.zero);
    let zp = zeta(params, table.lh1_0);
    let zm = zeta(params, table.lh1_1);
    let zsum = zp.add(&zm);
    let s = sqrt_neg_l(params);
    let half = rat(1, 2);
    let cp = an_int(params, -1).add(&s).scale(&half);
    let cm = an_int(params, -1).sub(&s).scale(&half);
    let ep = an_int(params, 1).add(&s).scale(&half);
    let em = an_int(params, 1).sub(&s).scale(&half);
    let (a_val, b_val) = big_a_b(params, conv);
    let ab_sum = a_val.add(&b_val);
    let f2 = p_pow(params, (params.f - params.h as u64) / 2);

    let a_rat = BigRational::from_integer(params.a.clone());
    let b_rat = BigRational::from_integer(conv.b.clone());
    let delta1 = z0.add(&zsum.scale(&rat(l - 1, 2)));
    let delta2 = z0
        .scale(&a_rat)
        .add(&zp.scale(&((&b_rat * rat(l, 1) - &a_rat) * half.clone())))
        .add(&zm.scale(&((-&a_rat - &b_rat * rat(l, 1)) * half.clone())));
    let delta3 = z0
        .scale(&((&b_rat * rat(l, 1) - &a_rat) * half.clone()))
        .add(&zp.scale(&((&a_rat * rat(1 - l, 1) - &b_rat * rat(2 * l, 1)) * rat(1, 4))))
        .add(&zm.scale(&(&a_rat * rat(l + 1, 4))));
    let delta4 = z0
        .scale(&((-&a_rat - &b_rat * rat(l, 1)) * half.clone()))
        .add(&zp.scale(&(&a_rat * rat(l + 1, 4))))
        .add(&zm.scale(&((&a_rat * rat(1 - l, 1) + &b_rat * rat(2 * l, 1)) * rat(1, 4))));
    let delta5 = cp
        .mul(&z0)
        .add(&cp.scale(&rat(l - 1, 2)).mul(&zsum))
        .add(&em.scale_int(l));
    let delta6 = cm
        .mul(&z0)
        .add(&cm.scale(&rat(l - 1, 2)).mul(&zsum))
        .add(&ep.scale_int(l));

    match k_class {
        KClass::H2_0 => an_int(params, 1)
            .scale(&rat(1, l))
            .add(
                &delta1
                    .neg()
                    .add(&a_val.mul(&delta6))
                    .add(&b_val.mul(&delta5))
                    .scale(&rat(1, n)),
            ),
        KClass::H2_1 => an_int(params, 1)
            .scale(&rat(1, l))
            .add(
                &delta1
                    .neg()
                    .add(&a_val.mul(&delta5))
                    .add(&b_val.mul(&delta6))
                    .scale(&rat(1, n)),
            ),
        KClass::Zero | KClass::LH1_0 | KClass::LH1_1 => {
            let shared = an_int(params, 1)
                .add(
                    &ab_sum
                        .scale(&rat(l - 1, 2))
                        .sub(&an_int(params, 1))
                        .mul(&delta1)
                        .scale(&rat(1, n)),
                )
                .sub(&ab_sum.add(&an_int(params, 2)).scale(&rat(l - 1, 2 * l)));
            let middle = match k_class {
                KClass::Zero => delta2.scale(&(f2.clone() * rat(l - 1, 2 * l))),
                KClass::LH1_0 => delta3.scale(&(f2.clone() * rat(1, l))),
                KClass::LH1_1 => delta4.scale(&(f2.clone() * rat(1, l))),
                _ => unreachable!(),
            };
            shared.add(&middle)
        }
    }
}

fn theorem38_value(params: &Params, conv: &Convention, delta: i8, k_class: KClass) -> AlgNum {
    let l = params.l as i64;
    let n = params.n as i64;
    let s = sqrt_neg_l(params);
    let half = rat(1, 2);
    let ep = an_int(params, 1).add(&s).scale(&half);
    let em = an_int(params, 1).sub(&s).scale(&half);
    let (a_val, b_val) = big_a_b(params, conv);
    let ab_sum = a_val.add(&b_val);
    let f2 = p_pow(params, (params.f - params.h as u64) / 2);
    let one_minus_zeta = an_int(params, 1).sub(&zeta(params, 1));
    let a_rat = BigRational::from_integer(params.a.clone());
    let b_rat = BigRational::from_integer(conv.b.clone());
    let delta_rat = rat(delta as i64, 1);

    match k_class {
        KClass::H2_0 => one_minus_zeta
            .mul(
                &an_int(params, 1)
                    .add(&ep.mul(&a_val))
                    .add(&em.mul(&b_val)),
            )
            .scale(&rat(l + 1, 2 * n)),
        KClass::H2_1 => one_minus_zeta
            .mul(
                &an_int(params, 1)
                    .add(&em.mul(&a_val))
                    .add(&ep.mul(&b_val)),
            )
            .scale(&rat(l + 1, 2 * n)),
        KClass::Zero => {
            // l+1 - (l^2-1)/2 (A+B) - (l-1)(a + delta b l)/2 * l p^((f-h)/2)
            let lin = (&a_rat + &delta_rat * &b_rat * rat(l, 1)) * rat(l - 1, 2) * rat(l, 1);
            let inner = an_int(params, l + 1)
                .sub(&ab_sum.scale(&rat(l * l - 1, 2)))
                .sub(&an_int(params, 1).scale(&(lin * f2)));
            one_minus_zeta.mul(&inner).scale(&rat(1, 2 * n))
        }
        KClass::LH1_0 | KClass::LH1_1 => {
            // row with (a - al + 2 delta b l)/2 for the delta-selected class,
            // row with a(l+1)/2 for the other
            let selected = (delta == -1) == (k_class == KClass::LH1_0);
            let lin = if selected {
                (&a_rat * rat(1 - l, 1) + &delta_rat * &b_rat * rat(2 * l, 1)) * half * rat(l, 1)
            } else {
                &a_rat * rat(l + 1, 2) * rat(l, 1)
            };
            let inner = an_int(params, l + 1)
                .sub(&ab_sum.scale(&rat(l * l - 1, 2)))
                .add(&an_int(params, 1).scale(&(lin * f2)));
            one_minus_zeta.mul(&inner).scale(&rat(1, 2 * n))
        }
    }
}

// ---------------------------------------------------------------------------
// spectrum table

#[derive(Debug, Clone)]
pub struct SpectrumLine {
    pub labels: Vec<String>,
    pub value: AlgNum,
    pub approx: (f64, f64),
    pub frequency: BigUint,
}

#[derive(Debug, Clone)]
pub struct SpectrumTable {
    pub params: Params,
    pub convention: Convention,
    /// The six per-class lines in the fixed order b0, H2_0, H2_1, k0,
    /// lH1_0, lH1_1.
    pub class_lines: Vec<SpectrumLine>,
    /// Equal-valued lines merged (exact equality), first-occurrence order.
    pub lines: Vec<SpectrumLine>,
}

fn exact_div(num: BigUint, den: u64) -> BigUint {
    let (q, r) = num.div_rem(&BigUint::from(den));
    assert!(r.is_zero(), "non-exact frequency division");
    q
}

/// The six class frequencies 1, (l-1)(q-1)/(2l) twice, (q-1)/l^2,
/// (l-1)(q-1)/(2l^2) twice.
pub fn class_frequencies(params: &Params) -> [BigUint; 6] {
    let q1 = params.q_minus_1();
    let l = params.l;
    let f_h2 = exact_div(&q1 * BigUint::from(l - 1), 2 * l);
    let f_k0 = exact_div(q1.clone(), l * l);
    let f_lh1 = exact_div(&q1 * BigUint::from(l - 1), 2 * l * l);
    [
        BigUint::one(),
        f_h2.clone(),
        f_h2,
        f_k0,
        f_lh1.clone(),
        f_lh1,
    ]
}

/// Closed-form spectrum: six class lines via the theorem path, then the
/// post-pass merging equal exact values.
pub fn spectrum_with(params: &Params, conv: &Convention, digits: u32) -> SpectrumTable {
    let freqs = class_frequencies(params);
    let entries: [(String, AlgNum); 6] = [
        ("b0".to_string(), spectrum_at_zero_with(params, conv)),
        (
            KClass::H2_0.label().to_string(),
            theorem_value(params, conv, KClass::H2_0),
        ),
        (
            KClass::H2_1.label().to_string(),
            theorem_value(params, conv, KClass::H2_1),
        ),
        (
            KClass::Zero.label().to_string(),
            theorem_value(params, conv, KClass::Zero),
        ),
        (
            KClass::LH1_0.label().to_string(),
            theorem_value(params, conv, KClass::LH1_0),
        ),
        (
            KClass::LH1_1.label().to_string(),
            theorem_value(params, conv, KClass::LH1_1),
        ),
    ];
    let class_lines: Vec<SpectrumLine> = entries
        .into_iter()
        .zip(freqs)
        .map(|((label, value), frequency)| {
            let approx = embed_algnum(&value, digits).to_f64_pair();
            SpectrumLine {
                labels: vec![label],
                value,
                approx,
                frequency,
            }
        })
        .collect();
    let mut merged: Vec<SpectrumLine> = Vec::new();
    for line in &class_lines {
        match merged.iter_mut().find(|m| m.value == line.value) {
            Some(m) => {
                m.labels.extend(line.labels.iter().cloned());
                m.frequency += &line.frequency;
            }
            None => merged.push(line.clone()),
        }
    }
    SpectrumTable {
        params: params.clone(),
        convention: conv.clone(),
        class_lines,
        lines: merged,
    }
}

pub fn spectrum(params: &Params, digits: u32) -> Result<SpectrumTable> {
    Ok(spectrum_with(
        params,
        &Convention::standalone(params)?,
        digits,
    ))
}

impl SpectrumTable {
    /// Merged (value, frequency) multiset, comparable with the brute oracle.
    pub fn merged_multiset(&self) -> oracle::Multiset {
        let mut m = oracle::Multiset::new();
        for line in &self.lines {
            *m.entry(line.value.clone()).or_insert_with(BigUint::zero) += &line.frequency;
        }
        m
    }

    /// sum of frequency * value, which must equal q exactly.
    pub fn mean(&self) -> AlgNum {
        self.lines.iter().fold(
            AlgNum::zero(self.params.p, self.params.l),
            |acc, line| {
                acc.add(
                    &line
                        .value
                        .scale(&BigRational::from_integer(BigInt::from(line.frequency.clone()))),
                )
            },
        )
    }

    /// sum of frequency * |value|^2, which must equal q^2 exactly.
    pub fn parseval(&self) -> AlgNum {
        self.lines.iter().fold(
            AlgNum::zero(self.params.p, self.params.l),
            |acc, line| {
                acc.add(
                    &line
                        .value
                        .norm_squared()
                        .scale(&BigRational::from_integer(BigInt::from(line.frequency.clone()))),
                )
            },
        )
    }

    pub fn total_frequency(&self) -> BigUint {
        self.lines
            .iter()
            .fold(BigUint::zero(), |acc, line| acc + &line.frequency)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let p = &self.params;
        let case = match p.case {
            ArithCase::Generic => serde_json::json!({"tag": "generic"}),
            ArithCase::Special { delta } => {
                serde_json::json!({"tag": "special", "delta": delta})
            }
        };
        let convention = serde_json::json!({
            "b": self.convention.b.to_string(),
            "delta": self.convention.delta(),
            "epsilon": self.convention.epsilon().map(|e| e.to_string()),
            "source": match self.convention.source {
                ConventionSource::Standalone => "standalone",
                ConventionSource::Field => "field",
            },
        });
        let lines: Vec<serde_json::Value> = self
            .lines
            .iter()
            .map(|line| {
                serde_json::json!({
                    "k_class": line.labels.join("+"),
                    "value": serde_json::to_value(&line.value).unwrap(),
                    "approx": [finite_or_null(line.approx.0), finite_or_null(line.approx.1)],
                    "frequency": line.frequency.to_string(),
                })
            })
            .collect();
        serde_json::json!({
            "params": {
                "p": p.p,
                "l": p.l,
                "N": p.n,
                "f": p.f,
                "h": p.h,
                "a": p.a.to_string(),
                "b": p.b.to_string(),
                "case": case,
            },
            "convention": convention,
            "lines": lines,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k_class,value_symbolic,approx_re,approx_im,frequency\n");
        for line in &self.lines {
            out.push_str(&format!(
                "{},\"{}\",{},{},{}\n",
                line.labels.join("+"),
                line.value,
                line.approx.0,
                line.approx.1,
                line.frequency
            ));
        }
        out
    }
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else {
        serde_json::Value::Null
    }
}

// ---------------------------------------------------------------------------
// Corollary: the specialized five-row table for 1 + l = 4 p^h

/// The printed specialization branch: 1 + l = 4 p^h, l = 3 mod 8, under the
/// delta = -1 convention (so a = 1, b = -1). Returns the five (value,
/// frequency) rows; the two lH1 rows of the general table coincide and are
/// merged here. The b = 0 row carries the corrected transform value.
pub fn corollary39_rows(params: &Params) -> Result<Vec<(AlgNum, BigUint)>> {
    let l = params.l as i64;
    let one_plus_l = BigUint::from(params.l + 1);
    let four_ph = BigUint::from(4u32) * BigUint::from(params.p).pow(params.h);
    if one_plus_l != four_ph {
        return Err(Error::Unsupported(format!(
            "1 + l = {} differs from 4 p^h = {}",
            one_plus_l, four_ph
        )));
    }
    if params.l % 8 != 3 {
        return Err(Error::Unsupported(format!(
            "printed specialization branch needs l = 3 mod 8, got l = {} mod 8",
            params.l % 8
        )));
    }
    if params.a != BigInt::one() || params.b != BigInt::one() {
        return Err(Error::InternalInconsistency(
            "specialization expects a = 1 and |b| = 1".into(),
        ));
    }
    let conv = Convention {
        b: BigInt::from(-1),
        anchor: TraceAnchor::Special { delta: -1 },
        source: ConventionSource::Standalone,
    };
    let s = sqrt_neg_l(params);
    let half = rat(1, 2);
    let ep = an_int(params, 1).add(&s).scale(&half);
    let em = an_int(params, 1).sub(&s).scale(&half);
    let f1 = p_pow(params, (params.f - params.h as u64 * params.l) / 2);
    let f2 = p_pow(params, (params.f - params.h as u64) / 2);
    // A = p^((f-hl)/2) ((1 - sqrt(-l))/2)^l, B its conjugate
    let a_val = em.pow(params.l).scale(&f1);
    let b_val = ep.pow(params.l).scale(&f1);
    let ab_sum = a_val.add(&b_val);
    let one_minus_zeta = an_int(params, 1).sub(&zeta(params, 1));
    let n = params.n as i64;
    let lp = an_int(params, 1).scale(&(f2 * rat(l, 1)));

    let r1 = spectrum_at_zero_with(params, &conv);
    let r2 = one_minus_zeta
        .mul(&an_int(params, 1).add(&ep.mul(&a_val)).add(&em.mul(&b_val)))
        .scale(&rat(l + 1, 2 * n));
    let r3 = one_minus_zeta
        .mul(&an_int(params, 1).add(&em.mul(&a_val)).add(&ep.mul(&b_val)))
        .scale(&rat(l + 1, 2 * n));
    let r4 = one_minus_zeta
        .mul(
            &an_int(params, 2).sub(&ab_sum.add(&lp).scale(&rat(l - 1, 1))),
        )
        .scale(&rat(l + 1, 4 * n));
    let r5 = one_minus_zeta
        .mul(&an_int(params, 2).sub(&ab_sum.scale(&rat(l - 1, 1))).add(&lp))
        .scale(&rat(l + 1, 4 * n));

    let freqs = class_frequencies(params);
    Ok(vec![
        (r1, freqs[0].clone()),
        (r2, freqs[1].clone()),
        (r3, freqs[2].clone()),
        (r4, freqs[3].clone()),
        (r5, freqs[4].clone() + freqs[5].clone()),
    ])
}

/// Exactness check: the specialized rows equal the general table evaluated
/// under the corollary's convention.
pub fn corollary39_consistent(params: &Params, digits: u32) -> Result<bool> {
    let rows = corollary39_rows(params)?;
    let conv = Convention {
        b: BigInt::from(-1),
        anchor: TraceAnchor::Special { delta: -1 },
        source: ConventionSource::Standalone,
    };
    let general = spectrum_with(params, &conv, digits);
    // the general lH1 rows must coincide for the corollary merge to be valid
    let lh1_0 = &general.class_lines[4];
    let lh1_1 = &general.class_lines[5];
    if lh1_0.value != lh1_1.value {
        return Ok(false);
    }
    let expected = [
        (&general.class_lines[0], &rows[0]),
        (&general.class_lines[1], &rows[1]),
        (&general.class_lines[2], &rows[2]),
        (&general.class_lines[3], &rows[3]),
    ];
    for (line, (value, freq)) in expected {
        if line.value != *value || line.frequency != *freq {
            return Ok(false);
        }
    }
    let merged_freq = lh1_0.frequency.clone() + lh1_1.frequency.clone();
    Ok(lh1_0.value == rows[4].0 && merged_freq == rows[4].1)
}

// ---------------------------------------------------------------------------

/// q as an exact AlgNum, for the mean identity.
pub fn q_value(params: &Params) -> AlgNum {
    an_big(params, &params.q())
}

/// q^2 as an exact AlgNum, for Parseval.
pub fn q_squared_value(params: &Params) -> AlgNum {
    let q = params.q();
    an_big(params, &(&q * &q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_instance;

    fn flagship_conv(delta: i8) -> Convention {
        Convention {
            b: BigInt::from(-(delta as i64)),
            anchor: TraceAnchor::Special { delta },
            source: ConventionSource::Standalone,
        }
    }

    #[test]
    fn quadratic_gauss_branches() {
        let g = quadratic_gauss(5, 1).unwrap();
        assert_eq!((g.sign, g.i_power), (1, 0));
        let g = quadratic_gauss(3, 2).unwrap();
        // (-1)^1 i^2 sqrt(9) = +3
        assert_eq!((g.sign, g.i_power), (1, 0));
        let g = quadratic_gauss(7, 1).unwrap();
        assert_eq!((g.sign, g.i_power), (1, 1));
        assert!(matches!(quadratic_gauss(2, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn standalone_convention_pairing() {
        // (2,7): delta = +1 under the lex-smallest factor, so b = -1
        let params = validate_instance(2, 7).unwrap();
        let conv = Convention::standalone(&params).unwrap();
        assert_eq!(conv.delta(), Some(1));
        assert_eq!(conv.b, BigInt::from(-1));

        // (11,7) generic: canonical root sqrt(4) = 2, eps = 6, b stays +2
        let params = validate_instance(11, 7).unwrap();
        let conv = Convention::standalone(&params).unwrap();
        assert_eq!(conv.epsilon(), Some(6));
        assert_eq!(conv.b, BigInt::from(2));
    }

    #[test]
    fn gauss_sum_values_flagship() {
        let params = validate_instance(2, 7).unwrap();
        let conv = flagship_conv(-1); // b = +1 pairing
        // i = 1 (t = 0): 2^10 (-1 + sqrt(-7))/2
        let g1 = gauss_sum_index2_with(&params, &conv, 1).unwrap();
        let expect = AlgNum::from_int(2, 7, -1)
            .add(&AlgNum::sqrt_neg_l(2, 7))
            .scale(&rat(512, 1));
        assert_eq!(g1, expect);
        // i = 7 (t = 1): 2^7 ((-1 + sqrt(-7))/2)^7 = 64 (13 + 7 sqrt(-7))
        let g7 = gauss_sum_index2_with(&params, &conv, 7).unwrap();
        let expect7 = AlgNum::from_int(2, 7, 13)
            .add(&AlgNum::sqrt_neg_l(2, 7).scale_int(7))
            .scale(&rat(64, 1));
        assert_eq!(g7, expect7);
        // i = 3: u = 3 is a non-square mod 7, so the conjugate of G(chi)
        let g3 = gauss_sum_index2_with(&params, &conv, 3).unwrap();
        assert_eq!(g3, g1.galois_flip());
        // modulus: |G|^2 = q for sampled exponents
        for i in [1u64, 2, 3, 7, 14, 21, 48] {
            let g = gauss_sum_index2_with(&params, &conv, i).unwrap();
            assert_eq!(g.norm_squared(), q_value(&params), "i = {i}");
        }
        assert!(matches!(
            gauss_sum_index2_with(&params, &conv, 49),
            Err(Error::InvalidExponent(0))
        ));
    }

    #[test]
    fn trace_tables() {
        let params = validate_instance(2, 7).unwrap();
        let t = trace_beta_table_with(&params, &flagship_conv(-1));
        assert_eq!((t.zero, t.lh1_0, t.lh1_1, t.units), (1, 0, 1, 0));
        let t = trace_beta_table_with(&params, &flagship_conv(1));
        assert_eq!((t.zero, t.lh1_0, t.lh1_1, t.units), (1, 1, 0, 0));

        let params = validate_instance(11, 7).unwrap();
        let t = trace_beta_table(&params).unwrap();
        assert_eq!(t.epsilon, Some(6));
        assert_eq!((t.zero, t.lh1_0, t.lh1_1, t.units), (10, 9, 6, 0));
    }

    #[test]
    fn i_sums_flagship_examples() {
        let params = validate_instance(2, 7).unwrap();
        let conv = flagship_conv(-1);
        let sums = i_sums_with(&params, &conv, KClass::H2_0);
        assert!(sums.i2_0.is_zero());
        assert!(sums.i2_1.is_zero());
        let sums = i_sums_with(&params, &conv, KClass::Zero);
        // (l^2-1)/4 (zeta_2 - 1) = 12 * (-2) = -24
        assert_eq!(sums.i1_0, an_int(&params, -24));
        assert_eq!(sums.i1_1, an_int(&params, -24));
        assert_eq!(sums.i0, an_int(&params, 41));
    }

    #[test]
    fn path_equality_all_classes() {
        for (p, l) in [(2u64, 7u64), (11, 7), (5, 11)] {
            let params = validate_instance(p, l).unwrap();
            let conv = Convention::standalone(&params).unwrap();
            for class in KClass::ALL {
                let via_sums = walsh_value_via_eq32_with(&params, &conv, class);
                let via_table = theorem_value(&params, &conv, class);
                assert_eq!(via_sums, via_table, "({p},{l}) class {class:?}");
            }
        }
    }

    #[test]
    fn flagship_spectrum_frozen_values() {
        let params = validate_instance(2, 7).unwrap();
        let conv = flagship_conv(-1);
        let table = spectrum_with(&params, &conv, 30);
        // corrected b = 0 value: 1 + 42799 * 41
        assert_eq!(
            table.class_lines[0].value.as_integer().unwrap(),
            BigInt::from(1_754_760)
        );
        let expect: Vec<(i64, u64)> = vec![
            (1_754_760, 1),
            (-376, 898_779),
            (648, 898_779),
            (2_696, 42_799),
            (-1_400, 256_794),
        ];
        assert_eq!(table.lines.len(), 5);
        for (line, (v, f)) in table.lines.iter().zip(expect) {
            assert_eq!(line.value.as_integer().unwrap(), BigInt::from(v));
            assert_eq!(line.frequency, BigUint::from(f));
        }
        // the published sum of all order-N Gauss sums
        assert_eq!(
            character_sum_all_orders(&params, &conv).as_integer().unwrap(),
            BigInt::from(-16_512)
        );
    }

    #[test]
    fn joint_flip_gives_same_multiset() {
        let params = validate_instance(2, 7).unwrap();
        let m1 = spectrum_with(&params, &flagship_conv(-1), 30).merged_multiset();
        let m2 = spectrum_with(&params, &flagship_conv(1), 30).merged_multiset();
        assert_eq!(m1, m2);
    }

    #[test]
    fn mean_and_parseval_exact() {
        for (p, l) in [(2u64, 7u64), (11, 7), (5, 11), (2, 23)] {
            let params = validate_instance(p, l).unwrap();
            let conv = Convention::standalone(&params).unwrap();
            let table = spectrum_with(&params, &conv, 12);
            assert_eq!(table.total_frequency(), params.q(), "({p},{l})");
            assert_eq!(table.mean(), q_value(&params), "({p},{l})");
            assert_eq!(table.parseval(), q_squared_value(&params), "({p},{l})");
        }
    }

    #[test]
    fn corollary_consistency() {
        for (p, l) in [(5u64, 19u64), (3, 107)] {
            let params = validate_instance(p, l).unwrap();
            assert!(corollary39_consistent(&params, 12).unwrap(), "({p},{l})");
        }
        // (2,7) has 1 + l = 4 p^h but sits on the unprinted l = 7 mod 8 branch
        let params = validate_instance(2, 7).unwrap();
        assert!(matches!(
            corollary39_rows(&params),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn zero_value_is_freq_one_line() {
        let params = validate_instance(2, 7).unwrap();
        let conv = Convention::standalone(&params).unwrap();
        let table = spectrum_with(&params, &conv, 12);
        let z = spectrum_at_zero_with(&params, &conv);
        let line = table
            .lines
            .iter()
            .find(|line| line.labels.contains(&"b0".to_string()))
            .unwrap();
        assert_eq!(line.value, z);
    }
}
