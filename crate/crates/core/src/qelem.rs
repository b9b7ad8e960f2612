//! Elements of Q = M_s(F) for F a truncated Laurent field, carrying the
//! matrix filtration u(q) = min over entries of the valuation.
//!
//! The valuation ring 𝒪 = u^{-1}([0,∞]) and its Jacobson radical
//! J(𝒪) = u^{-1}([1,∞]) are not separate types; membership is a predicate
//! on the filtration value.

use crate::error::{Error, Result};
use crate::fq::{FqElem, FqField};
use crate::laurent::Laurent;
use crate::val::Val;
use rand::Rng;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct QElem {
    pub s: usize,
    /// Row-major s×s entries.
    pub entries: Vec<Laurent>,
}

impl QElem {
    pub fn field(&self) -> &Arc<FqField> {
        &self.entries[0].field
    }

    pub fn zero(field: Arc<FqField>, s: usize, prec: i64) -> QElem {
        QElem {
            s,
            entries: (0..s * s).map(|_| Laurent::zero(field.clone(), prec)).collect(),
        }
    }

    pub fn identity(field: Arc<FqField>, s: usize, prec: i64) -> QElem {
        let mut q = QElem::zero(field.clone(), s, prec);
        for i in 0..s {
            *q.at_mut(i, i) = Laurent::one(field.clone(), prec);
        }
        q
    }

    pub fn scalar(x: Laurent, s: usize) -> QElem {
        let field = x.field.clone();
        let prec = x.prec();
        let mut q = QElem::zero(field, s, prec);
        for i in 0..s {
            *q.at_mut(i, i) = x.clone();
        }
        q
    }

    /// Matrix unit e_{ij} (1-based nowhere: i, j are 0-based indices).
    pub fn basis(field: Arc<FqField>, s: usize, i: usize, j: usize, prec: i64) -> QElem {
        let mut q = QElem::zero(field.clone(), s, prec);
        *q.at_mut(i, j) = Laurent::one(field, prec);
        q
    }

    pub fn from_entries(s: usize, entries: Vec<Laurent>) -> QElem {
        assert_eq!(entries.len(), s * s);
        QElem { s, entries }
    }

    pub fn at(&self, i: usize, j: usize) -> &Laurent {
        &self.entries[i * self.s + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Laurent {
        &mut self.entries[i * self.s + j]
    }

    /// The matrix filtration u(q) = min over entries of v.
    pub fn u(&self) -> Val {
        self.entries
            .iter()
            .map(|e| e.val())
            .fold(Val::Infinity, Val::min)
    }

    /// Smallest precision any entry is known to.
    pub fn prec(&self) -> i64 {
        self.entries.iter().map(|e| e.prec()).min().unwrap()
    }

    pub fn is_zero_at_prec(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero_at_prec())
    }

    pub fn truncate(&self, prec: i64) -> QElem {
        QElem {
            s: self.s,
            entries: self.entries.iter().map(|e| e.truncate(prec)).collect(),
        }
    }

    pub fn add(&self, other: &QElem) -> QElem {
        QElem {
            s: self.s,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &QElem) -> QElem {
        QElem {
            s: self.s,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn neg(&self) -> QElem {
        QElem {
            s: self.s,
            entries: self.entries.iter().map(|e| e.neg()).collect(),
        }
    }

    pub fn mul(&self, other: &QElem) -> QElem {
        let s = self.s;
        let field = self.field().clone();
        let mut entries = Vec::with_capacity(s * s);
        for i in 0..s {
            for j in 0..s {
                let mut acc: Option<Laurent> = None;
                for l in 0..s {
                    let term = self.at(i, l).mul(other.at(l, j));
                    acc = Some(match acc {
                        Some(a) => a.add(&term),
                        None => term,
                    });
                }
                entries.push(acc.unwrap_or_else(|| Laurent::zero(field.clone(), self.prec())));
            }
        }
        QElem { s, entries }
    }

    pub fn scale(&self, x: &Laurent) -> QElem {
        QElem {
            s: self.s,
            entries: self.entries.iter().map(|e| e.mul(x)).collect(),
        }
    }

    pub fn scale_fq(&self, c: &FqElem) -> QElem {
        QElem {
            s: self.s,
            entries: self.entries.iter().map(|e| e.scalar_mul(c)).collect(),
        }
    }

    /// Multiply every entry by π^n.
    pub fn shift(&self, n: i64) -> QElem {
        QElem {
            s: self.s,
            entries: self.entries.iter().map(|e| e.shift(n)).collect(),
        }
    }

    pub fn map_entries<F: Fn(&Laurent) -> Laurent>(&self, f: F) -> QElem {
        QElem {
            s: self.s,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn eq_at_shared_prec(&self, other: &QElem) -> bool {
        self.sub(other).is_zero_at_prec()
    }

    /// Residue matrix mod J(𝒪); only meaningful when u(q) ≥ 0.
    pub fn residue(&self) -> Vec<FqElem> {
        self.entries.iter().map(|e| e.coeff(0)).collect()
    }

    /// Constant matrix from a residue.
    pub fn from_residue(field: Arc<FqField>, s: usize, res: &[FqElem], prec: i64) -> QElem {
        QElem {
            s,
            entries: res
                .iter()
                .map(|c| Laurent::constant(field.clone(), c.clone(), prec))
                .collect(),
        }
    }

    /// Inverse of a unit of the valuation ring 𝒪: requires u(q) = 0 with
    /// invertible residue.  Computed by inverting the residue in M_s(k) and
    /// correcting with the geometric series 1 − y + y² − … where
    /// y = h₀q − 1 ∈ J(𝒪).
    pub fn invert_in_o(&self) -> Result<QElem> {
        if self.u() < Val::Finite(0) {
            return Err(Error::NotAUnit(format!(
                "u(q) = {} < 0, not in the valuation ring",
                self.u()
            )));
        }
        let field = self.field().clone();
        let s = self.s;
        let prec = self.prec();
        let res = self.residue();
        let res_inv = invert_residue_matrix(&field, s, &res).ok_or_else(|| {
            Error::NotAUnit("residue matrix is singular in M_s(k)".into())
        })?;
        let h0 = QElem::from_residue(field.clone(), s, &res_inv, prec);
        // h0·q = 1 + y with u(y) ≥ 1; (1+y)^{-1} = Σ (−y)^i
        let one = QElem::identity(field.clone(), s, prec);
        let y = h0.mul(self).sub(&one);
        debug_assert!(y.u() >= Val::Finite(1));
        let mut acc = one.clone();
        let mut pw = one.clone();
        let neg_y = y.neg();
        for _ in 0..prec {
            pw = pw.mul(&neg_y).truncate(prec);
            if pw.is_zero_at_prec() {
                break;
            }
            acc = acc.add(&pw);
        }
        Ok(acc.mul(&h0))
    }

    /// General inverse over the Laurent field by Gauss–Jordan elimination
    /// with minimal-valuation pivoting.  Precision degrades per the entry
    /// arithmetic; fails if some pivot is zero at precision.
    pub fn invert(&self) -> Result<QElem> {
        let s = self.s;
        let field = self.field().clone();
        let prec = self.prec();
        let mut a = self.clone();
        let mut inv = QElem::identity(field.clone(), s, prec);
        for col in 0..s {
            // pick the remaining row whose entry in this column has minimal
            // valuation (best conditioned pivot)
            let mut pivot: Option<(usize, Val)> = None;
            for row in col..s {
                let v = a.at(row, col).val();
                if v.is_finite() && pivot.map_or(true, |(_, pv)| v < pv) {
                    pivot = Some((row, v));
                }
            }
            let (prow, _) = pivot.ok_or_else(|| {
                Error::NotAUnit("matrix is singular at this precision".into())
            })?;
            if prow != col {
                for j in 0..s {
                    let tmp = a.at(col, j).clone();
                    *a.at_mut(col, j) = a.at(prow, j).clone();
                    *a.at_mut(prow, j) = tmp;
                    let tmp = inv.at(col, j).clone();
                    *inv.at_mut(col, j) = inv.at(prow, j).clone();
                    *inv.at_mut(prow, j) = tmp;
                }
            }
            let pinv = a.at(col, col).inv()?;
            for j in 0..s {
                *a.at_mut(col, j) = pinv.mul(a.at(col, j));
                *inv.at_mut(col, j) = pinv.mul(inv.at(col, j));
            }
            for row in 0..s {
                if row == col {
                    continue;
                }
                let factor = a.at(row, col).clone();
                if factor.is_zero_at_prec() {
                    continue;
                }
                for j in 0..s {
                    let t = factor.mul(a.at(col, j));
                    *a.at_mut(row, j) = a.at(row, j).sub(&t);
                    let t = factor.mul(inv.at(col, j));
                    *inv.at_mut(row, j) = inv.at(row, j).sub(&t);
                }
            }
        }
        Ok(inv)
    }

    pub fn pow(&self, e: i64) -> Result<QElem> {
        if e < 0 {
            return self.invert()?.pow(-e);
        }
        let field = self.field().clone();
        let mut acc: Option<QElem> = None;
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    Some(a) => a.mul(&base),
                    None => base.clone(),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc.unwrap_or_else(|| QElem::identity(field, self.s, self.prec())))
    }

    pub fn random<R: Rng + ?Sized>(
        field: &Arc<FqField>,
        s: usize,
        rng: &mut R,
        min_exp: i64,
        prec: i64,
    ) -> QElem {
        QElem {
            s,
            entries: (0..s * s)
                .map(|_| Laurent::random(field, rng, min_exp, prec))
                .collect(),
        }
    }

    /// A random element of 𝒪 (valuations ≥ 0).
    pub fn random_in_o<R: Rng + ?Sized>(
        field: &Arc<FqField>,
        s: usize,
        rng: &mut R,
        prec: i64,
    ) -> QElem {
        QElem::random(field, s, rng, 0, prec)
    }

    pub fn render(&self) -> String {
        let rows: Vec<String> = (0..self.s)
            .map(|i| {
                let cols: Vec<String> =
                    (0..self.s).map(|j| self.at(i, j).render()).collect();
                format!("[{}]", cols.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

/// Invert a matrix over the residue field k, or return None if singular.
pub fn invert_residue_matrix(
    field: &Arc<FqField>,
    s: usize,
    m: &[FqElem],
) -> Option<Vec<FqElem>> {
    let mut a: Vec<FqElem> = m.to_vec();
    let mut inv: Vec<FqElem> = (0..s * s)
        .map(|idx| {
            if idx / s == idx % s {
                field.one()
            } else {
                field.zero()
            }
        })
        .collect();
    for col in 0..s {
        let prow = (col..s).find(|&r| !field.is_zero(&a[r * s + col]))?;
        if prow != col {
            for j in 0..s {
                a.swap(col * s + j, prow * s + j);
                inv.swap(col * s + j, prow * s + j);
            }
        }
        let pinv = field.inv(&a[col * s + col]).ok()?;
        for j in 0..s {
            a[col * s + j] = field.mul(&a[col * s + j], &pinv);
            inv[col * s + j] = field.mul(&inv[col * s + j], &pinv);
        }
        for row in 0..s {
            if row == col || field.is_zero(&a[row * s + col]) {
                continue;
            }
            let factor = a[row * s + col].clone();
            for j in 0..s {
                let t = field.mul(&factor, &a[col * s + j]);
                a[row * s + j] = field.sub(&a[row * s + j], &t);
                let t = field.mul(&factor, &inv[col * s + j]);
                inv[row * s + j] = field.sub(&inv[row * s + j], &t);
            }
        }
    }
    Some(inv)
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
    fn matrix_filtration_examples() {
        let f = f2();
        let mut q = QElem::zero(f.clone(), 2, 8);
        *q.at_mut(0, 0) = Laurent::pi_pow(f.clone(), 1, 8);
        *q.at_mut(1, 1) = Laurent::pi_pow(f.clone(), -1, 8);
        assert_eq!(q.u(), Val::Finite(-1));
        assert_eq!(QElem::identity(f.clone(), 2, 8).u(), Val::Finite(0));
        assert_eq!(QElem::zero(f, 2, 8).u(), Val::Infinity);
    }

    #[test]
    fn filtration_axioms_random() {
        let f = Arc::new(FqField::with_lex_modulus(2, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let a = QElem::random(&f, 2, &mut rng, -3, 8);
            let b = QElem::random(&f, 2, &mut rng, -3, 8);
            assert!(a.mul(&b).u() >= a.u() + b.u());
            assert!(a.add(&b).u() >= a.u().min(b.u()));
        }
    }

    #[test]
    fn invert_in_o_identity_and_units() {
        let f = f2();
        let one = QElem::identity(f.clone(), 2, 8);
        assert!(one.invert_in_o().unwrap().eq_at_shared_prec(&one));

        // 1 + π·(random in 𝒪) is a unit of 𝒪
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let q = one.add(&QElem::random_in_o(&f, 2, &mut rng, 8).shift(1).truncate(8));
            let h = q.invert_in_o().unwrap();
            assert!(q.mul(&h).eq_at_shared_prec(&one));
            assert!(h.mul(&q).eq_at_shared_prec(&one));
        }
    }

    #[test]
    fn invert_in_o_rejects_non_units() {
        let f = f2();
        let mut q = QElem::identity(f.clone(), 2, 8);
        *q.at_mut(0, 0) = Laurent::pi_pow(f.clone(), 1, 8);
        // diag(π, 1): in 𝒪 but singular residue
        assert!(matches!(q.invert_in_o(), Err(Error::NotAUnit(_))));
        // π^{-1}·1: not in 𝒪 at all
        let q2 = QElem::identity(f.clone(), 2, 8).shift(-1);
        assert!(matches!(q2.invert_in_o(), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn general_inverse_handles_valuations() {
        let f = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            // π^{-1}-scaled unit: invert() must cope where invert_in_o cannot
            let one = QElem::identity(f.clone(), 2, 12);
            let q = one
                .add(&QElem::random_in_o(&f, 2, &mut rng, 12).shift(1).truncate(12))
                .shift(-1);
            let h = q.invert().unwrap();
            let prod = q.mul(&h);
            assert!(prod.eq_at_shared_prec(&QElem::identity(f.clone(), 2, prod.prec())));
        }
    }

    #[test]
    fn unit_regularity_of_scaled_units() {
        // Lemma: for a unit z with u(z^{-1}) = −u(z), u(zr) = u(z) + u(r).
        let f = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let one = QElem::identity(f.clone(), 2, 12);
        let z = one
            .add(&QElem::random_in_o(&f, 2, &mut rng, 12).shift(1).truncate(12))
            .shift(3);
        let zi = z.invert().unwrap();
        assert_eq!(z.u(), Val::Finite(3));
        assert_eq!(zi.u(), Val::Finite(-3));
        for _ in 0..50 {
            let r = QElem::random(&f, 2, &mut rng, -2, 8);
            if r.is_zero_at_prec() {
                continue;
            }
            assert_eq!(z.mul(&r).u(), z.u() + r.u());
        }
    }
}
