//! Arithmetic in a finite field 𝔽_{p^k}, presented as 𝔽_p[X]/(modulus).
//!
//! Elements are plain coefficient vectors of length `k` (constant term
//! first); all operations go through the owning [`FqField`] context.  The
//! modulus is checked irreducible at construction for p^k ≤ 2^20; larger
//! fields are accepted with `unchecked` set, and callers that rely on field
//! axioms should refuse to proceed in that case.

use crate::error::{Error, Result};
use rand::Rng;

pub type FqElem = Vec<u64>;

pub const IRREDUCIBILITY_CAP: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqField {
    pub p: u64,
    pub k: usize,
    /// Monic modulus of degree k, length k+1, constant term first.
    pub modulus: Vec<u64>,
    /// True when the modulus was too large to check for irreducibility.
    pub unchecked: bool,
}

// ---- arithmetic mod p on raw coefficients ----

fn inv_mod(a: u64, p: u64) -> u64 {
    // extended Euclid; p is prime and a != 0 mod p
    let (mut r0, mut r1) = (p as i128, (a % p) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1);
    (s0.rem_euclid(p as i128)) as u64
}

// ---- dense polynomial helpers over F_p (used for the modulus only) ----

fn poly_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai * bj) % p;
        }
    }
    poly_trim(&mut out);
    out
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while r.len() > dm {
        let c = (r[r.len() - 1] * lead_inv) % p;
        let shift = r.len() - 1 - dm;
        for (j, &mj) in m.iter().enumerate() {
            let idx = shift + j;
            let sub = (c * mj) % p;
            r[idx] = (r[idx] + p - sub) % p;
        }
        poly_trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn poly_powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = poly_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(&poly_mul(&acc, &b, p), m, p);
        }
        b = poly_rem(&poly_mul(&b, &b, p), m, p);
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    poly_trim(&mut r0);
    poly_trim(&mut r1);
    while !r1.is_empty() {
        let r = poly_rem(&r0, &r1, p);
        r0 = r1;
        r1 = r;
    }
    r0
}

fn is_irreducible(modulus: &[u64], p: u64, k: usize) -> bool {
    // Rabin's test: X^{p^k} ≡ X mod f, and gcd(X^{p^{k/q}} − X, f) = 1
    // for every prime divisor q of k.
    let x = vec![0u64, 1];
    let size = (p as u128).pow(k as u32);
    debug_assert!(size <= IRREDUCIBILITY_CAP as u128);
    let xq = poly_powmod(&x, size as u64, modulus, p);
    if xq != x {
        return false;
    }
    let mut divisors = vec![];
    let mut n = k;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            divisors.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        divisors.push(n);
    }
    for q in divisors {
        let e = (p as u128).pow((k / q) as u32) as u64;
        let xe = poly_powmod(&x, e, modulus, p);
        // gcd(X^{p^{k/q}} − X, f)
        let mut diff = xe;
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = (diff[1] + p - 1) % p;
        poly_trim(&mut diff);
        let g = poly_gcd(modulus, &diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FqField {
    pub fn prime(p: u64) -> Result<FqField> {
        FqField::new(p, 1, vec![0, 1])
    }

    pub fn new(p: u64, k: usize, modulus: Vec<u64>) -> Result<FqField> {
        if !is_prime(p) {
            return Err(Error::Invalid(format!("p = {p} is not prime")));
        }
        if k == 0 || modulus.len() != k + 1 {
            return Err(Error::Invalid("modulus degree must equal k".into()));
        }
        let modulus: Vec<u64> = modulus.iter().map(|c| c % p).collect();
        if modulus[k] != 1 {
            return Err(Error::Invalid("modulus must be monic".into()));
        }
        let size = (p as u128).checked_pow(k as u32);
        let unchecked = match size {
            Some(s) if s <= IRREDUCIBILITY_CAP as u128 => {
                if k > 1 && !is_irreducible(&modulus, p, k) {
                    return Err(Error::Invalid("modulus is reducible".into()));
                }
                false
            }
            _ => true,
        };
        Ok(FqField {
            p,
            k,
            modulus,
            unchecked,
        })
    }

    /// The field 𝔽_{p^k} with the lexicographically least monic irreducible
    /// modulus (coefficients compared from the constant term up).  Keeps
    /// fixtures reproducible.
    pub fn with_lex_modulus(p: u64, k: usize) -> Result<FqField> {
        if k == 1 {
            return FqField::prime(p);
        }
        let size = (p as u128).checked_pow(k as u32);
        if !matches!(size, Some(s) if s <= IRREDUCIBILITY_CAP as u128) {
            return Err(Error::TooLarge(format!(
                "cannot search for a modulus with p^k > 2^20 (p={p}, k={k})"
            )));
        }
        // enumerate the k lower coefficients in lexicographic order
        let total = (p as u128).pow(k as u32) as u64;
        for idx in 0..total {
            let mut modulus = vec![0u64; k + 1];
            let mut rest = idx;
            for c in modulus.iter_mut().take(k) {
                *c = rest % p;
                rest /= p;
            }
            modulus[k] = 1;
            if is_irreducible(&modulus, p, k) {
                return FqField::new(p, k, modulus);
            }
        }
        unreachable!("an irreducible polynomial of every degree exists")
    }

    pub fn size(&self) -> u128 {
        (self.p as u128).pow(self.k as u32)
    }

    pub fn zero(&self) -> FqElem {
        vec![0; self.k]
    }

    pub fn one(&self) -> FqElem {
        self.from_u64(1)
    }

    pub fn from_u64(&self, n: u64) -> FqElem {
        let mut e = self.zero();
        e[0] = n % self.p;
        e
    }

    pub fn from_i64(&self, n: i64) -> FqElem {
        let r = n.rem_euclid(self.p as i64) as u64;
        self.from_u64(r)
    }

    /// The residue class of X — a generator of the field as an 𝔽_p-algebra.
    pub fn gen(&self) -> FqElem {
        if self.k == 1 {
            return self.one();
        }
        let mut e = self.zero();
        e[1] = 1;
        e
    }

    pub fn is_zero(&self, a: &FqElem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.p).collect()
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x + self.p - y) % self.p)
            .collect()
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        a.iter().map(|&x| (self.p - x) % self.p).collect()
    }

    pub fn scalar_mul(&self, c: u64, a: &FqElem) -> FqElem {
        let c = c % self.p;
        a.iter().map(|&x| (x * c) % self.p).collect()
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let prod = poly_mul(a, b, self.p);
        let mut r = poly_rem(&prod, &self.modulus, self.p);
        r.resize(self.k, 0);
        r
    }

    pub fn inv(&self, a: &FqElem) -> Result<FqElem> {
        if self.is_zero(a) {
            return Err(Error::NotAUnit("zero in Fq".into()));
        }
        // extended Euclid over F_p[X] against the modulus
        let p = self.p;
        let mut r0 = self.modulus.clone();
        let mut r1 = a.clone();
        poly_trim(&mut r0);
        poly_trim(&mut r1);
        let mut s0: Vec<u64> = vec![];
        let mut s1: Vec<u64> = vec![1];
        while !r1.is_empty() {
            // r0 = q*r1 + r
            let mut q = vec![0u64; r0.len().saturating_sub(r1.len()) + 1];
            let mut rem = r0.clone();
            let lead_inv = inv_mod(r1[r1.len() - 1], p);
            while rem.len() >= r1.len() && !rem.is_empty() {
                let c = (rem[rem.len() - 1] * lead_inv) % p;
                let shift = rem.len() - r1.len();
                q[shift] = c;
                for (j, &mj) in r1.iter().enumerate() {
                    let sub = (c * mj) % p;
                    rem[shift + j] = (rem[shift + j] + p - sub) % p;
                }
                poly_trim(&mut rem);
            }
            poly_trim(&mut q);
            // (s0, s1) = (s1, s0 - q*s1)
            let qs1 = poly_mul(&q, &s1, p);
            let mut s2 = s0.clone();
            s2.resize(s2.len().max(qs1.len()), 0);
            for (i, &c) in qs1.iter().enumerate() {
                s2[i] = (s2[i] + p - c) % p;
            }
            poly_trim(&mut s2);
            s0 = s1;
            s1 = s2;
            r0 = r1;
            r1 = rem;
        }
        // r0 is the gcd, a nonzero constant since the modulus is irreducible
        debug_assert_eq!(r0.len(), 1);
        let scale = inv_mod(r0[0], p);
        let mut out: Vec<u64> = s0.iter().map(|&c| (c * scale) % p).collect();
        out.resize(self.k, 0);
        Ok(out)
    }

    pub fn pow(&self, a: &FqElem, mut e: u128) -> FqElem {
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

    /// x ↦ x^p, the absolute Frobenius.
    pub fn frob(&self, a: &FqElem) -> FqElem {
        self.pow(a, self.p as u128)
    }

    /// x ↦ x^{p^r}, by r applications of Frobenius (avoids huge exponents).
    pub fn frob_iter(&self, a: &FqElem, r: u64) -> FqElem {
        let r = r % self.k as u64; // Frobenius has order k on 𝔽_{p^k}
        let mut x = a.clone();
        for _ in 0..r {
            x = self.frob(&x);
        }
        x
    }

    /// Iterator over all field elements in lexicographic coefficient order.
    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        let total = self.size();
        (0..total).map(move |idx| {
            let mut e = self.zero();
            let mut rest = idx;
            for c in e.iter_mut() {
                *c = (rest % self.p as u128) as u64;
                rest /= self.p as u128;
            }
            e
        })
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FqElem {
        (0..self.k).map(|_| rng.gen_range(0..self.p)).collect()
    }

    pub fn render(&self, a: &FqElem) -> String {
        if self.is_zero(a) {
            return "0".into();
        }
        let mut parts = vec![];
        for (i, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let term = match (i, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "w".into(),
                (1, c) => format!("{c}*w"),
                (i, 1) => format!("w^{i}"),
                (i, c) => format!("{c}*w^{i}"),
            };
            parts.push(term);
        }
        parts.join("+")
    }
}
