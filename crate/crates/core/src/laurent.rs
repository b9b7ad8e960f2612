//! Truncated Laurent series over a finite field.
//!
//! An element is known modulo π^prec; coefficients are stored sparsely and
//! only below the precision.  Precision is propagated honestly: sums take
//! the min of the operand precisions, products lose precision when an
//! operand has negative valuation, and inversion of an element of valuation
//! v costs 2v digits.  "Zero at precision" (no nonzero coefficient below
//! prec) is reported as valuation `Val::Infinity`, never as exact zero.

use crate::error::{Error, Result};
use crate::fq::{FqElem, FqField};
use crate::val::Val;
use rand::Rng;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct Laurent {
    pub field: Arc<FqField>,
    coeffs: BTreeMap<i64, FqElem>,
    prec: i64,
}

impl Laurent {
    pub fn zero(field: Arc<FqField>, prec: i64) -> Laurent {
        Laurent {
            field,
            coeffs: BTreeMap::new(),
            prec,
        }
    }

    pub fn one(field: Arc<FqField>, prec: i64) -> Laurent {
        let c = field.one();
        Laurent::single(field, 0, c, prec)
    }

    /// c·π^n
    pub fn single(field: Arc<FqField>, n: i64, c: FqElem, prec: i64) -> Laurent {
        let mut coeffs = BTreeMap::new();
        if !field.is_zero(&c) && n < prec {
            coeffs.insert(n, c);
        }
        Laurent {
            field,
            coeffs,
            prec,
        }
    }

    pub fn constant(field: Arc<FqField>, c: FqElem, prec: i64) -> Laurent {
        Laurent::single(field, 0, c, prec)
    }

    pub fn pi_pow(field: Arc<FqField>, n: i64, prec: i64) -> Laurent {
        let c = field.one();
        Laurent::single(field, n, c, prec)
    }

    pub fn from_terms(field: Arc<FqField>, terms: &[(i64, FqElem)], prec: i64) -> Laurent {
        let mut out = Laurent::zero(field.clone(), prec);
        for (n, c) in terms {
            out.add_term(*n, c.clone());
        }
        out
    }

    fn add_term(&mut self, n: i64, c: FqElem) {
        if n >= self.prec || self.field.is_zero(&c) {
            return;
        }
        let f = self.field.clone();
        match self.coeffs.get_mut(&n) {
            Some(existing) => {
                let s = f.add(existing, &c);
                if f.is_zero(&s) {
                    self.coeffs.remove(&n);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.coeffs.insert(n, c);
            }
        }
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn val(&self) -> Val {
        match self.coeffs.keys().next() {
            Some(&n) => Val::Finite(n),
            None => Val::Infinity,
        }
    }

    pub fn is_zero_at_prec(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, n: i64) -> FqElem {
        self.coeffs.get(&n).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &FqElem)> {
        self.coeffs.iter()
    }

    /// Drop knowledge above a smaller precision.
    pub fn truncate(&self, prec: i64) -> Laurent {
        let prec = prec.min(self.prec);
        Laurent {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&n, _)| n < prec)
                .map(|(&n, c)| (n, c.clone()))
                .collect(),
            prec,
        }
    }

    pub fn add(&self, other: &Laurent) -> Laurent {
        let prec = self.prec.min(other.prec);
        let mut out = self.truncate(prec);
        for (&n, c) in &other.coeffs {
            out.add_term(n, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Laurent {
        Laurent {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(&n, c)| (n, self.field.neg(c)))
                .collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Laurent) -> Laurent {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Laurent) -> Laurent {
        // known error terms: (err_a)·b has valuation ≥ prec_a + v(b),
        // a·(err_b) ≥ v(a) + prec_b, err_a·err_b ≥ prec_a + prec_b.
        // For a zero-at-precision operand only the error term remains.
        let va = self.val().finite_or(self.prec);
        let vb = other.val().finite_or(other.prec);
        let prec = (self.prec + vb).min(other.prec + va);
        let mut out = Laurent::zero(self.field.clone(), prec);
        for (&na, ca) in &self.coeffs {
            for (&nb, cb) in &other.coeffs {
                let n = na + nb;
                if n < prec {
                    out.add_term(n, self.field.mul(ca, cb));
                }
            }
        }
        out
    }

    pub fn scalar_mul(&self, c: &FqElem) -> Laurent {
        if self.field.is_zero(c) {
            return Laurent::zero(self.field.clone(), self.prec);
        }
        Laurent {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(&n, a)| (n, self.field.mul(a, c)))
                .collect(),
            prec: self.prec,
        }
    }

    /// Multiply by π^n (exact shift; precision moves with it).
    pub fn shift(&self, n: i64) -> Laurent {
        Laurent {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|(&m, c)| (m + n, c.clone())).collect(),
            prec: self.prec + n,
        }
    }

    /// Inverse of a nonzero-at-precision element.  Valuation v costs 2v
    /// digits of precision: the result is known modulo π^{prec − 2v}.
    pub fn inv(&self) -> Result<Laurent> {
        let v = match self.val() {
            Val::Finite(v) => v,
            Val::Infinity => {
                return Err(Error::NotAUnit(
                    "zero at precision has no inverse".into(),
                ))
            }
        };
        let f = &self.field;
        // u = self·π^{-v} has valuation 0 and precision prec − v
        let u = self.shift(-v);
        let c0 = u.coeff(0);
        let c0_inv = f.inv(&c0)?;
        let target = u.prec();
        if target <= 0 {
            return Err(Error::PrecisionTooLow(format!(
                "inverting valuation {v} at precision {} leaves nothing",
                self.prec
            )));
        }
        // u = c0(1 + w) with v(w) ≥ 1; u^{-1} = c0^{-1}·Σ (−w)^i
        let w = u.scalar_mul(&c0_inv).sub(&Laurent::one(self.field.clone(), target));
        let mut acc = Laurent::one(self.field.clone(), target);
        let mut pw = Laurent::one(self.field.clone(), target);
        let neg_w = w.neg();
        for _ in 0..target {
            pw = pw.mul(&neg_w).truncate(target);
            if pw.is_zero_at_prec() {
                break;
            }
            acc = acc.add(&pw);
        }
        Ok(acc.scalar_mul(&c0_inv).shift(-v))
    }

    pub fn pow(&self, e: i64) -> Result<Laurent> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let mut acc = Laurent::one(self.field.clone(), self.prec + self.val().finite_or(0) * (e.max(1) - 1));
        let mut base = self.clone();
        let mut e = e as u64;
        // plain square-and-multiply; precision propagates through mul
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                acc = if first {
                    // avoid an artificial precision cap from the seed 1
                    first = false;
                    base.clone()
                } else {
                    acc.mul(&base)
                };
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        if first {
            acc = Laurent::one(self.field.clone(), self.prec);
        }
        Ok(acc)
    }

    /// Apply a map to every coefficient (e.g. a Frobenius power); fixes π.
    pub fn map_coeffs<F: Fn(&FqElem) -> FqElem>(&self, f: F) -> Laurent {
        let mut out = Laurent::zero(self.field.clone(), self.prec);
        for (&n, c) in &self.coeffs {
            out.add_term(n, f(c));
        }
        out
    }

    /// Equal as far as both are known (all coefficients below the shared
    /// precision agree).
    pub fn eq_at_shared_prec(&self, other: &Laurent) -> bool {
        self.sub(other).is_zero_at_prec()
    }

    pub fn random<R: Rng + ?Sized>(
        field: &Arc<FqField>,
        rng: &mut R,
        min_exp: i64,
        prec: i64,
    ) -> Laurent {
        let mut out = Laurent::zero(field.clone(), prec);
        for n in min_exp..prec {
            out.add_term(n, field.random(rng));
        }
        out
    }

    pub fn render(&self) -> String {
        let mut parts: Vec<String> = vec![];
        for (&n, c) in &self.coeffs {
            let cs = self.field.render(c);
            let cs = if cs.contains('+') {
                format!("({cs})")
            } else {
                cs
            };
            let term = match n {
                0 => cs,
                1 if cs == "1" => "pi".into(),
                1 => format!("{cs}*pi"),
                n if cs == "1" => format!("pi^{n}"),
                n => format!("{cs}*pi^{n}"),
            };
            parts.push(term);
        }
        parts.push(format!("O(pi^{})", self.prec));
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f2() -> Arc<FqField> {
        Arc::new(FqField::prime(2).unwrap())
    }

    #[test]
    fn valuation_basics() {
        let f = f2();
        assert_eq!(Laurent::pi_pow(f.clone(), 3, 8).val(), Val::Finite(3));
        assert_eq!(Laurent::zero(f.clone(), 8).val(), Val::Infinity);
        let x = Laurent::pi_pow(f.clone(), -2, 8).add(&Laurent::pi_pow(f.clone(), 5, 8));
        assert_eq!(x.val(), Val::Finite(-2));
    }

    #[test]
    fn valuation_is_multiplicative() {
        let f = Arc::new(FqField::with_lex_modulus(2, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = Laurent::random(&f, &mut rng, -3, 8);
            let b = Laurent::random(&f, &mut rng, -3, 8);
            if a.is_zero_at_prec() || b.is_zero_at_prec() {
                continue;
            }
            assert_eq!(a.mul(&b).val(), a.val() + b.val());
        }
    }

    #[test]
    fn precision_of_products() {
        let f = f2();
        // π^{-2}·(known mod π^8) is known mod π^6
        let a = Laurent::pi_pow(f.clone(), -2, 8);
        let b = Laurent::one(f.clone(), 8);
        assert_eq!(a.mul(&b).prec(), 6);
        // sum takes the min
        let c = Laurent::one(f.clone(), 5);
        assert_eq!(b.add(&c).prec(), 5);
    }

    #[test]
    fn inversion_geometric_series() {
        let f = f2();
        // (1 + π)^{-1} = 1 + π + π² + … in characteristic 2
        let one = Laurent::one(f.clone(), 8);
        let a = one.add(&Laurent::pi_pow(f.clone(), 1, 8));
        let ai = a.inv().unwrap();
        for n in 0..8 {
            assert_eq!(ai.coeff(n), f.one());
        }
        assert!(a.mul(&ai).eq_at_shared_prec(&one));
    }

    #[test]
    fn inversion_with_valuation_costs_precision() {
        let f = f2();
        let a = Laurent::pi_pow(f.clone(), 2, 8); // known mod π^8, val 2
        let ai = a.inv().unwrap();
        assert_eq!(ai.val(), Val::Finite(-2));
        assert_eq!(ai.prec(), 4); // 8 − 2·2
        assert!(a
            .mul(&ai)
            .eq_at_shared_prec(&Laurent::one(f.clone(), 2)));
    }

    #[test]
    fn random_inverses_multiply_back_to_one() {
        let f = Arc::new(FqField::with_lex_modulus(3, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = Laurent::random(&f, &mut rng, 0, 10);
            if a.is_zero_at_prec() {
                continue;
            }
            let ai = a.inv().unwrap();
            let prod = a.mul(&ai);
            assert!(prod.eq_at_shared_prec(&Laurent::one(f.clone(), prod.prec())));
        }
    }

    #[test]
    fn pow_and_negative_pow() {
        let f = f2();
        let a = Laurent::one(f.clone(), 8).add(&Laurent::pi_pow(f.clone(), 1, 8));
        let a3 = a.pow(3).unwrap();
        // (1+π)³ = 1 + 3π + 3π² + π³ = 1 + π + π² + π³ in char 2
        for n in 0..4 {
            assert_eq!(a3.coeff(n), f.one());
        }
        assert_eq!(a3.coeff(4), f.zero());
        let am3 = a.pow(-3).unwrap();
        assert!(a3
            .mul(&am3)
            .eq_at_shared_prec(&Laurent::one(f.clone(), 8)));
    }

    #[test]
    fn render_format() {
        let f = f2();
        let x = Laurent::one(f.clone(), 8).add(&Laurent::pi_pow(f.clone(), 2, 8));
        assert_eq!(x.render(), "1 + pi^2 + O(pi^8)");
        assert_eq!(Laurent::zero(f, 4).render(), "O(pi^4)");
    }
}
