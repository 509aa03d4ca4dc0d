//! Explicit construction of F_{p^f}: deterministic irreducible modulus,
//! certified primitive element, trace as a precomputed linear form, and the
//! table of beta powers used to classify N-th power residues.

use std::collections::HashMap;

use crate::arith::{factorize, mul_mod};
use crate::error::{Error, Result};
use crate::polyfp;

/// Element of F_{p^f} in the power basis of the modulus root; coordinates
/// reduced mod p, fixed length f.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElem(pub Vec<u64>);

impl FieldElem {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

/// An explicit F_{p^f} with primitive element and trace form.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    pub p: u64,
    pub f: usize,
    /// Monic irreducible modulus, low degree first, length f + 1.
    pub modulus: Vec<u64>,
    /// Smallest certified primitive element.
    pub alpha: FieldElem,
    /// q - 1 = p^f - 1 with its factorization.
    pub group_order: u64,
    pub group_factors: Vec<(u64, u32)>,
    /// trace_form[j] = Tr(theta^j), so Tr(x) = sum x_j trace_form[j].
    pub trace_form: Vec<u64>,
    /// alpha * theta^j, precomputed for the streaming multiply.
    mul_alpha: Vec<Vec<u64>>,
}

/// Beta power table for a fixed N | q - 1: beta = alpha^((q-1)/N).
#[derive(Debug, Clone)]
pub struct BetaTable {
    pub n: u64,
    pub powers: Vec<FieldElem>,
    index: HashMap<Vec<u64>, u64>,
}

impl BetaTable {
    pub fn beta(&self) -> &FieldElem {
        &self.powers[1]
    }

    pub fn index_of(&self, x: &FieldElem) -> Option<u64> {
        self.index.get(&x.0).copied()
    }
}

fn checked_q(p: u64, f: usize) -> Result<u64> {
    let mut q: u64 = 1;
    for _ in 0..f {
        q = q
            .checked_mul(p)
            .ok_or_else(|| Error::CannotCertifyPrimitive(format!("p^{f} exceeds u64")))?;
    }
    Ok(q)
}

impl FieldCtx {
    /// Deterministic field: the lexicographically first irreducible monic
    /// modulus of degree f, then the smallest primitive element. The seed is
    /// accepted for interface stability; the search itself is deterministic.
    pub fn build(p: u64, f: usize, _seed: u64) -> Result<Self> {
        if f == 0 || !crate::arith::is_prime(p) {
            return Err(Error::InvalidInput(format!(
                "field requires prime p and degree >= 1, got p = {p}, f = {f}"
            )));
        }
        let q = checked_q(p, f)?;
        let modulus = (0..q)
            .map(|c| {
                let mut m = to_base_p(c, p, f);
                m.push(1);
                m
            })
            .find(|m| m[0] != 0 && polyfp::is_irreducible(m, p))
            .ok_or_else(|| Error::InternalInconsistency("no irreducible modulus found".into()))?;
        Self::with_modulus(p, modulus)
    }

    /// Field on a caller-supplied irreducible monic modulus (used to anchor
    /// subfield computations to a chosen factor of a cyclotomic polynomial).
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Self> {
        let f = modulus.len() - 1;
        if modulus[f] != 1 {
            return Err(Error::InvalidInput("modulus must be monic".into()));
        }
        if !polyfp::is_irreducible(&modulus, p) {
            return Err(Error::InvalidInput("modulus is reducible".into()));
        }
        let q = checked_q(p, f)?;
        let group_order = q - 1;
        let group_factors = factorize(group_order);
        let trace_form = trace_form_from_modulus(&modulus, p);
        let mut ctx = FieldCtx {
            p,
            f,
            modulus,
            alpha: FieldElem(vec![0; f]),
            group_order,
            group_factors,
            trace_form,
            mul_alpha: Vec::new(),
        };
        let alpha = ctx.find_primitive()?;
        ctx.mul_alpha = (0..f)
            .map(|j| {
                let mut theta_j = vec![0u64; f];
                theta_j[j] = 1;
                ctx.mul(&FieldElem(theta_j), &alpha).0
            })
            .collect();
        ctx.alpha = alpha;
        Ok(ctx)
    }

    pub fn q(&self) -> u64 {
        self.group_order + 1
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem(vec![0; self.f])
    }

    pub fn one(&self) -> FieldElem {
        self.from_const(1)
    }

    pub fn from_const(&self, c: u64) -> FieldElem {
        let mut v = vec![0u64; self.f];
        v[0] = c % self.p;
        FieldElem(v)
    }

    /// Some(c) when the element lies in the prime field.
    pub fn as_const(&self, x: &FieldElem) -> Option<u64> {
        if x.0[1..].iter().all(|&c| c == 0) {
            Some(x.0[0])
        } else {
            None
        }
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| (x + y) % self.p)
                .collect(),
        )
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let p = self.p;
        let f = self.f;
        let mut prod = vec![0u64; 2 * f - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mul_mod(x, y, p)) % p;
            }
        }
        // reduce by the monic modulus
        for d in (f..2 * f - 1).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for (k, &mk) in self.modulus.iter().enumerate().take(f) {
                let idx = d - f + k;
                prod[idx] = (prod[idx] + p - mul_mod(c, mk, p)) % p;
            }
        }
        prod.truncate(f);
        FieldElem(prod)
    }

    /// Multiply by alpha using the precomputed table; the hot loop of the
    /// streaming pass.
    pub fn mul_by_alpha(&self, a: &FieldElem) -> FieldElem {
        let p = self.p;
        let mut out = vec![0u64; self.f];
        for (j, &c) in a.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (k, &t) in self.mul_alpha[j].iter().enumerate() {
                out[k] = (out[k] + mul_mod(c, t, p)) % p;
            }
        }
        FieldElem(out)
    }

    pub fn pow(&self, a: &FieldElem, mut e: u64) -> FieldElem {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Tr_{q/p}(x) via the precomputed linear form.
    pub fn trace(&self, x: &FieldElem) -> u64 {
        let mut t = 0u64;
        for (j, &c) in x.0.iter().enumerate() {
            t = (t + mul_mod(c, self.trace_form[j], self.p)) % self.p;
        }
        t
    }

    /// Naive trace x + x^p + ... + x^(p^(f-1)), for self-checks.
    pub fn trace_naive(&self, x: &FieldElem) -> u64 {
        let mut acc = self.zero();
        let mut t = x.clone();
        for _ in 0..self.f {
            acc = self.add(&acc, &t);
            t = self.pow(&t, self.p);
        }
        self.as_const(&acc).expect("trace lies in the prime field")
    }

    fn find_primitive(&self) -> Result<FieldElem> {
        let q = self.q();
        for m in 1..q {
            let cand = FieldElem(to_base_p(m, self.p, self.f));
            if self.is_primitive(&cand) {
                return Ok(cand);
            }
        }
        Err(Error::CannotCertifyPrimitive(format!(
            "no generator found in F_{{{}^{}}}",
            self.p, self.f
        )))
    }

    fn is_primitive(&self, x: &FieldElem) -> bool {
        if x.is_zero() {
            return false;
        }
        self.group_factors
            .iter()
            .all(|&(r, _)| self.pow(x, self.group_order / r) != self.one())
            && self.pow(x, self.group_order) == self.one()
    }

    /// beta = alpha^((q-1)/N) and its N powers.
    pub fn beta_table(&self, n: u64) -> Result<BetaTable> {
        if n == 0 || self.group_order % n != 0 {
            return Err(Error::InvalidInput(format!(
                "N = {n} does not divide q - 1 = {}",
                self.group_order
            )));
        }
        let beta = self.pow(&self.alpha, self.group_order / n);
        let mut powers = Vec::with_capacity(n as usize);
        let mut index = HashMap::new();
        let mut x = self.one();
        for i in 0..n {
            index.insert(x.0.clone(), i);
            powers.push(x.clone());
            x = self.mul(&x, &beta);
        }
        if x != self.one() || index.len() != n as usize {
            return Err(Error::InternalInconsistency(format!(
                "beta does not have exact order {n}"
            )));
        }
        Ok(BetaTable {
            n,
            powers,
            index,
        })
    }

    /// Class index of x: the i with x^((q-1)/N) = beta^i.
    pub fn classify(&self, table: &BetaTable, x: &FieldElem) -> Result<u64> {
        if x.is_zero() {
            return Err(Error::ZeroInput);
        }
        let y = self.pow(x, self.group_order / table.n);
        table
            .index_of(&y)
            .ok_or_else(|| Error::InternalInconsistency("power residue missing from table".into()))
    }

    /// Integer encoding of an element (base-p digits), used as a dense index.
    pub fn encode(&self, x: &FieldElem) -> u64 {
        let mut acc = 0u64;
        for &c in x.0.iter().rev() {
            acc = acc * self.p + c;
        }
        acc
    }
}

fn to_base_p(mut c: u64, p: u64, f: usize) -> Vec<u64> {
    let mut out = vec![0u64; f];
    for slot in out.iter_mut() {
        *slot = c % p;
        c /= p;
    }
    out
}

/// Power sums of the modulus roots via Newton's identities, in F_p:
/// trace_form[k] = Tr(theta^k) for k < f.
pub fn trace_form_from_modulus(modulus: &[u64], p: u64) -> Vec<u64> {
    let f = modulus.len() - 1;
    // e[i] = i-th elementary symmetric function of the roots
    let e: Vec<u64> = (0..=f)
        .map(|i| {
            let c = modulus[f - i] % p;
            if i % 2 == 0 {
                c
            } else {
                (p - c) % p
            }
        })
        .collect();
    let mut s = vec![0u64; f];
    s[0] = (f as u64) % p;
    for k in 1..f {
        // s_k = -(k e_k + sum_{i=1}^{k-1} e_i s_{k-i})
        let mut acc = mul_mod((k as u64) % p, e[k], p);
        for i in 1..k {
            acc = (acc + mul_mod(e[i], s[k - i], p)) % p;
        }
        s[k] = (p - acc) % p;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn degenerate_f2() {
        let ctx = FieldCtx::build(2, 1, 0).unwrap();
        assert_eq!(ctx.q(), 2);
        assert_eq!(ctx.alpha, ctx.one());
        assert_eq!(ctx.trace(&ctx.one()), 1);
    }

    #[test]
    fn f8_basics() {
        let ctx = FieldCtx::build(2, 3, 0).unwrap();
        // first irreducible cubic in lex order is x^3 + x + 1
        assert_eq!(ctx.modulus, vec![1, 1, 0, 1]);
        let a = &ctx.alpha;
        assert_eq!(ctx.pow(a, 7), ctx.one());
        assert_ne!(ctx.pow(a, 1), ctx.one());
        // Tr(1) = f mod p
        assert_eq!(ctx.trace(&ctx.one()), 1);
    }

    #[test]
    fn trace_matches_naive() {
        for (p, f) in [(2u64, 8usize), (3, 4), (11, 3), (7, 2)] {
            let ctx = FieldCtx::build(p, f, 0).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
            for _ in 0..200 {
                let x = FieldElem((0..f).map(|_| rng.gen_range(0..p)).collect());
                assert_eq!(ctx.trace(&x), ctx.trace_naive(&x), "p={p} f={f}");
            }
        }
    }

    #[test]
    fn mul_by_alpha_agrees_with_mul() {
        let ctx = FieldCtx::build(11, 3, 0).unwrap();
        let mut x = ctx.one();
        for _ in 0..50 {
            assert_eq!(ctx.mul_by_alpha(&x), ctx.mul(&x, &ctx.alpha));
            x = ctx.mul_by_alpha(&x);
        }
    }

    #[test]
    fn classify_depends_on_s_mod_n() {
        let ctx = FieldCtx::build(11, 3, 0).unwrap();
        let table = ctx.beta_table(7).unwrap();
        let mut x = ctx.alpha.clone();
        for s in 1..40u64 {
            x = ctx.mul(&x, &ctx.alpha);
            let _ = x.clone();
            let class = ctx.classify(&table, &ctx.pow(&ctx.alpha, s)).unwrap();
            assert_eq!(class, s % 7);
        }
        assert!(matches!(
            ctx.classify(&table, &ctx.zero()),
            Err(Error::ZeroInput)
        ));
    }

    #[test]
    fn flagship_field_is_constructible() {
        let ctx = FieldCtx::build(2, 21, 0).unwrap();
        assert_eq!(ctx.q(), 1 << 21);
        assert_eq!(ctx.group_factors, vec![(7, 2), (127, 1), (337, 1)]);
        let table = ctx.beta_table(49).unwrap();
        assert_eq!(table.powers.len(), 49);
        // beta^l is a primitive l-th root of unity
        let xi = &table.powers[7];
        assert_eq!(ctx.pow(xi, 7), ctx.one());
        assert_ne!(*xi, ctx.one());
    }
}
