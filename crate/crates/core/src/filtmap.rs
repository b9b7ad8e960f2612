//! Filtered 𝔽_p-linear maps on Q = M_s(F), described structurally so that
//! degrees can be computed exactly.
//!
//! Every map built here fixes the uniformiser π (coefficientwise Frobenius
//! acts only on residue-field coefficients, inner conjugation is F-linear),
//! so a map is determined by its values on the finite 𝔽_p-basis
//! {w^b·e_{ij}} of the residue matrix ring — which makes
//! deg_u(f) = min over that basis of u(f(basis element)) exact rather than
//! a lower bound.

use crate::error::{Error, Result};
use crate::fq::FqField;
use crate::laurent::Laurent;
use crate::qelem::QElem;
use crate::val::Val;
use std::sync::Arc;

/// Ambient ring data shared by maps, series and pipelines: the coefficient
/// field k, the matrix size s, and the working π-precision.
#[derive(Clone, Debug)]
pub struct RingCtx {
    pub field: Arc<FqField>,
    pub s: usize,
    pub prec: i64,
}

impl RingCtx {
    pub fn new(field: Arc<FqField>, s: usize, prec: i64) -> RingCtx {
        RingCtx { field, s, prec }
    }

    pub fn one(&self) -> QElem {
        QElem::identity(self.field.clone(), self.s, self.prec)
    }

    pub fn zero(&self) -> QElem {
        QElem::zero(self.field.clone(), self.s, self.prec)
    }

    pub fn constant_i64(&self, n: i64) -> QElem {
        QElem::scalar(
            Laurent::constant(self.field.clone(), self.field.from_i64(n), self.prec),
            self.s,
        )
    }

    pub fn pi(&self) -> QElem {
        QElem::scalar(Laurent::pi_pow(self.field.clone(), 1, self.prec), self.s)
    }

    /// The 𝔽_p-basis {w^b·e_{ij}} of M_s(k) ⊂ 𝒪: enough to pin down any
    /// π-equivariant 𝔽_p-linear map.
    pub fn residue_basis(&self) -> Vec<QElem> {
        let mut out = vec![];
        let mut wpow = self.field.one();
        for _ in 0..self.field.k {
            for i in 0..self.s {
                for j in 0..self.s {
                    let mut q = QElem::zero(self.field.clone(), self.s, self.prec);
                    *q.at_mut(i, j) =
                        Laurent::constant(self.field.clone(), wpow.clone(), self.prec);
                    out.push(q);
                }
            }
            wpow = self.field.mul(&wpow, &self.field.gen());
        }
        out
    }
}

#[derive(Clone, Debug)]
pub enum FiltMap {
    Identity,
    /// Coefficientwise x ↦ x^{p^r}; fixes π.
    FrobeniusPower(u64),
    /// q ↦ u·q·u^{-1}.
    Inner { unit: QElem, unit_inv: QElem },
    /// Composition; the first listed map is applied first.
    Composite(Vec<FiltMap>),
    /// f − id (additive, not a ring map).
    SigmaMinusId(Box<FiltMap>),
    /// q ↦ tq − σ(q)t (a σ-derivation; additive, not a ring map).
    InnerDerivation { t: QElem, sigma: Box<FiltMap> },
    /// n-fold iterate of a map.
    Iterate(Box<FiltMap>, u64),
}

impl FiltMap {
    pub fn inner(unit: QElem) -> Result<FiltMap> {
        let unit_inv = unit.invert()?;
        Ok(FiltMap::Inner { unit, unit_inv })
    }

    pub fn apply(&self, q: &QElem) -> QElem {
        match self {
            FiltMap::Identity => q.clone(),
            FiltMap::FrobeniusPower(r) => {
                let field = q.field().clone();
                q.map_entries(|e| e.map_coeffs(|c| field.frob_iter(c, *r)))
            }
            FiltMap::Inner { unit, unit_inv } => unit.mul(q).mul(unit_inv),
            FiltMap::Composite(list) => {
                let mut x = q.clone();
                for f in list {
                    x = f.apply(&x);
                }
                x
            }
            FiltMap::SigmaMinusId(f) => f.apply(q).sub(q),
            FiltMap::InnerDerivation { t, sigma } => t.mul(q).sub(&sigma.apply(q).mul(t)),
            FiltMap::Iterate(f, n) => {
                let mut x = q.clone();
                for _ in 0..*n {
                    x = f.apply(&x);
                }
                x
            }
        }
    }

    /// Inverse of a ring-map description; the additive-only kinds have no
    /// structural inverse.
    pub fn inverse(&self, field: &FqField) -> Result<FiltMap> {
        match self {
            FiltMap::Identity => Ok(FiltMap::Identity),
            FiltMap::FrobeniusPower(r) => {
                let k = field.k as u64;
                Ok(FiltMap::FrobeniusPower((k - r % k) % k))
            }
            FiltMap::Inner { unit, unit_inv } => Ok(FiltMap::Inner {
                unit: unit_inv.clone(),
                unit_inv: unit.clone(),
            }),
            FiltMap::Composite(list) => {
                let mut out = Vec::with_capacity(list.len());
                for f in list.iter().rev() {
                    out.push(f.inverse(field)?);
                }
                Ok(FiltMap::Composite(out))
            }
            FiltMap::Iterate(f, n) => Ok(FiltMap::Iterate(Box::new(f.inverse(field)?), *n)),
            _ => Err(Error::NotAnAutomorphism),
        }
    }

    /// Whether this description is a ring homomorphism (as opposed to a
    /// merely additive filtered map).
    pub fn is_ring_map(&self) -> bool {
        match self {
            FiltMap::Identity | FiltMap::FrobeniusPower(_) | FiltMap::Inner { .. } => true,
            FiltMap::Composite(list) => list.iter().all(|f| f.is_ring_map()),
            FiltMap::Iterate(f, _) => f.is_ring_map(),
            FiltMap::SigmaMinusId(_) | FiltMap::InnerDerivation { .. } => false,
        }
    }
}

/// Exact degree of a filtered map: the largest d with u(f(q)) ≥ u(q) + d
/// for all q.  Computed as the minimum of u(f(b)) over the residue basis,
/// after confirming π-equivariance on that basis (π-equivariance plus
/// 𝔽_p-linearity reduce the infimum over all of Q to the basis).
///
/// A result of `Val::Infinity` means f vanishes on the basis at the working
/// precision, i.e. deg_u(f) ≥ prec.
pub fn degree_of_map(f: &FiltMap, ctx: &RingCtx) -> Result<Val> {
    let pi = Laurent::pi_pow(ctx.field.clone(), 1, ctx.prec);
    let mut deg = Val::Infinity;
    for b in ctx.residue_basis() {
        let fb = f.apply(&b);
        let f_pib = f.apply(&b.scale(&pi));
        if !f_pib.eq_at_shared_prec(&fb.scale(&pi)) {
            return Err(Error::NotPiEquivariant(
                "f(pi·b) != pi·f(b) on a basis element".into(),
            ));
        }
        deg = deg.min(fb.u());
    }
    Ok(deg)
}

/// Graded-regularity test: gr(q) is not a zero divisor in the associated
/// graded ring iff u(qs) = u(q) + u(s) for all s; checked on the supplied
/// samples (both sides).
pub fn graded_regular(q: &QElem, samples: &[QElem]) -> bool {
    let uq = q.u();
    samples.iter().all(|s| {
        q.mul(s).u() == uq + s.u() && s.mul(q).u() == s.u() + uq
    })
}
