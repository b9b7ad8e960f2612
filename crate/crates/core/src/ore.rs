//! Skew polynomials Q[x; σ, δ] in left normal form Σ qₙxⁿ, multiplied by
//! pushing x rightward past coefficients with xr = σ(r)x + δ(r).
//!
//! This is the exact (untruncated in x) model; the bounded series ring uses
//! it as the oracle for its convolution formula on polynomial inputs.

use crate::error::{Error, Result};
use crate::qelem::QElem;
use crate::skew::SkewDatum;
use crate::val::Val;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct OrePoly {
    pub datum: Arc<SkewDatum>,
    /// Left coefficients; index = x-degree.  Normalized: no trailing
    /// zero-at-precision coefficient.
    pub coeffs: Vec<QElem>,
}

impl OrePoly {
    pub fn zero(datum: Arc<SkewDatum>) -> OrePoly {
        OrePoly {
            datum,
            coeffs: vec![],
        }
    }

    pub fn constant(datum: Arc<SkewDatum>, q: QElem) -> OrePoly {
        OrePoly {
            datum,
            coeffs: vec![q],
        }
        .normalized()
    }

    pub fn one(datum: Arc<SkewDatum>) -> OrePoly {
        let q = datum.ctx.one();
        OrePoly::constant(datum, q)
    }

    pub fn monomial(datum: Arc<SkewDatum>, q: QElem, n: usize) -> OrePoly {
        let zero = datum.ctx.zero();
        let mut coeffs = vec![zero; n + 1];
        coeffs[n] = q;
        OrePoly { datum, coeffs }.normalized()
    }

    pub fn x(datum: Arc<SkewDatum>) -> OrePoly {
        let q = datum.ctx.one();
        OrePoly::monomial(datum, q, 1)
    }

    pub fn x_pow(datum: Arc<SkewDatum>, n: usize) -> OrePoly {
        let q = datum.ctx.one();
        OrePoly::monomial(datum, q, n)
    }

    /// g = x − t, the crossed-product generator.
    pub fn g(datum: Arc<SkewDatum>) -> OrePoly {
        let t = datum.t.clone();
        OrePoly {
            datum: datum.clone(),
            coeffs: vec![t.neg(), datum.ctx.one()],
        }
    }

    fn normalized(mut self) -> OrePoly {
        while self
            .coeffs
            .last()
            .map_or(false, |q| q.is_zero_at_prec())
        {
            self.coeffs.pop();
        }
        self
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .rposition(|q| !q.is_zero_at_prec())
    }

    pub fn coeff(&self, n: usize) -> QElem {
        self.coeffs
            .get(n)
            .cloned()
            .unwrap_or_else(|| self.datum.ctx.zero())
    }

    pub fn is_zero_at_prec(&self) -> bool {
        self.degree().is_none()
    }

    fn same_datum(&self, other: &OrePoly) -> Result<()> {
        if Arc::ptr_eq(&self.datum, &other.datum) {
            Ok(())
        } else {
            Err(Error::DatumMismatch)
        }
    }

    pub fn add(&self, other: &OrePoly) -> Result<OrePoly> {
        self.same_datum(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.coeff(i).add(&other.coeff(i)))
            .collect();
        Ok(OrePoly {
            datum: self.datum.clone(),
            coeffs,
        }
        .normalized())
    }

    pub fn sub(&self, other: &OrePoly) -> Result<OrePoly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> OrePoly {
        OrePoly {
            datum: self.datum.clone(),
            coeffs: self.coeffs.iter().map(|q| q.neg()).collect(),
        }
    }

    pub fn scale_left(&self, q: &QElem) -> OrePoly {
        OrePoly {
            datum: self.datum.clone(),
            coeffs: self.coeffs.iter().map(|c| q.mul(c)).collect(),
        }
        .normalized()
    }

    /// x·f, in left normal form: x·(Σ bⱼxʲ) = Σ (σ(bⱼ)x + δ(bⱼ))xʲ.
    pub fn x_times(&self) -> OrePoly {
        let d = &self.datum;
        let zero = d.ctx.zero();
        let mut out = vec![zero; self.coeffs.len() + 1];
        for (j, b) in self.coeffs.iter().enumerate() {
            out[j + 1] = out[j + 1].add(&d.apply_sigma(b));
            out[j] = out[j].add(&d.apply_delta(b));
        }
        OrePoly {
            datum: self.datum.clone(),
            coeffs: out,
        }
        .normalized()
    }

    pub fn mul(&self, other: &OrePoly) -> Result<OrePoly> {
        self.same_datum(other)?;
        let cap = 4 * (self.datum.deg_delta.len() - 1).max(8);
        let df = self.degree().unwrap_or(0);
        let dg = other.degree().unwrap_or(0);
        if df + dg > cap {
            return Err(Error::BadDegree(format!(
                "product degree {} exceeds the cap {cap}",
                df + dg
            )));
        }
        let mut acc = OrePoly::zero(self.datum.clone());
        // x^i·g computed incrementally
        let mut xig = other.clone();
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                xig = xig.x_times();
            }
            if a.is_zero_at_prec() {
                continue;
            }
            acc = acc.add(&xig.scale_left(a))?;
        }
        Ok(acc)
    }

    pub fn pow(&self, e: usize) -> Result<OrePoly> {
        let mut acc = OrePoly::one(self.datum.clone());
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Right-normal-form coefficients: f = Σ xⁱ·bᵢ.  Solved from the top
    /// degree down using bᵢ = σ^{-i}(leading part).
    pub fn to_right_coeffs(&self) -> Result<Vec<QElem>> {
        let field = &self.datum.ctx.field;
        let sigma_inv = self.datum.sigma.inverse(field)?;
        let mut rem = self.clone();
        let n = match rem.degree() {
            Some(n) => n,
            None => return Ok(vec![]),
        };
        let mut out = vec![self.datum.ctx.zero(); n + 1];
        for i in (0..=n).rev() {
            if rem.degree().map_or(true, |d| d < i) {
                continue;
            }
            let lead = rem.coeff(i);
            let mut b = lead;
            for _ in 0..i {
                b = sigma_inv.apply(&b);
            }
            let xi_b = OrePoly::x_pow(self.datum.clone(), i)
                .mul(&OrePoly::constant(self.datum.clone(), b.clone()))?;
            rem = rem.sub(&xi_b)?;
            out[i] = b;
        }
        if !rem.is_zero_at_prec() {
            return Err(Error::PrecisionExhausted("right-coefficient solve".into()));
        }
        Ok(out)
    }

    pub fn from_right_coeffs(datum: Arc<SkewDatum>, coeffs: &[QElem]) -> Result<OrePoly> {
        let mut acc = OrePoly::zero(datum.clone());
        for (i, b) in coeffs.iter().enumerate() {
            let term = OrePoly::x_pow(datum.clone(), i)
                .mul(&OrePoly::constant(datum.clone(), b.clone()))?;
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    pub fn eq_at_shared_prec(&self, other: &OrePoly) -> bool {
        match self.sub(other) {
            Ok(d) => d.is_zero_at_prec(),
            Err(_) => false,
        }
    }

    /// min over degrees of u(qₙ) + n — the restriction of the series
    /// filtration to polynomials.
    pub fn f_q(&self) -> Val {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, q)| q.u() + n as i64)
            .fold(Val::Infinity, Val::min)
    }

    pub fn render(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        let mut parts = vec![];
        for (n, q) in self.coeffs.iter().enumerate().rev() {
            if q.is_zero_at_prec() {
                continue;
            }
            let qs = q.render();
            parts.push(match n {
                0 => qs,
                1 => format!("{qs}*x"),
                n => format!("{qs}*x^{n}"),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Both sides of the p-power commutation relation
/// x^{p^n}·s = σ^{p^n}(s)·x^{p^n} + δ^{p^n}(s): the left side fully
/// expanded by iterated rewriting, the right side from the closed inner
/// formula t^{p^n}s − σ^{p^n}(s)t^{p^n}.  Also asserts the expanded left
/// side is supported on exactly the two stated monomial positions.
pub fn frobenius_power_relation(
    datum: &Arc<SkewDatum>,
    s: &QElem,
    n: u32,
) -> Result<(OrePoly, OrePoly)> {
    let pn = (datum.p as u128).pow(n);
    if pn > 1 << 12 {
        return Err(Error::TooLarge(format!("p^{n}")));
    }
    let pn = pn as usize;
    let lhs = OrePoly::x_pow(datum.clone(), pn)
        .mul(&OrePoly::constant(datum.clone(), s.clone()))?;
    let sig = datum.apply_sigma_pow(s, pn as u64);
    let tpn = datum.t.pow(pn as i64)?;
    let delta_closed = tpn.mul(s).sub(&sig.mul(&tpn));
    let mut rhs = OrePoly::monomial(datum.clone(), sig, pn);
    rhs = rhs.add(&OrePoly::constant(datum.clone(), delta_closed))?;
    for (i, c) in lhs.coeffs.iter().enumerate() {
        if i != 0 && i != pn && !c.is_zero_at_prec() {
            return Err(Error::HypothesisFail(format!(
                "unexpected monomial x^{i} in the expanded relation"
            )));
        }
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtmap::{FiltMap, RingCtx};
    use crate::fq::FqField;
    use crate::laurent::Laurent;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand::RngCore;

    /// M_2(𝔽_4((π))) mod π^8 with σ = Frobenius ∘ inner, t = −1.
    fn test_datum() -> Arc<SkewDatum> {
        let ctx = RingCtx::new(Arc::new(FqField::with_lex_modulus(2, 2).unwrap()), 2, 8);
        let mut unit = ctx.one();
        *unit.at_mut(0, 1) = Laurent::pi_pow(ctx.field.clone(), 1, 8);
        let sigma = FiltMap::Composite(vec![
            FiltMap::FrobeniusPower(1),
            FiltMap::inner(unit).unwrap(),
        ]);
        let t = ctx.one().neg();
        SkewDatum::with_defaults(ctx, sigma, t, 16).unwrap()
    }

    #[test]
    fn base_relation_x_times_scalar() {
        let d = test_datum();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let r = QElem::random(&d.ctx.field, 2, &mut rng, 0, 8);
            let lhs = OrePoly::x(d.clone())
                .mul(&OrePoly::constant(d.clone(), r.clone()))
                .unwrap();
            let rhs = OrePoly::monomial(d.clone(), d.apply_sigma(&r), 1)
                .add(&OrePoly::constant(d.clone(), d.apply_delta(&r)))
                .unwrap();
            assert!(lhs.eq_at_shared_prec(&rhs));
        }
    }

    #[test]
    fn associativity_and_distributivity() {
        let d = test_datum();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..60 {
            let polys: Vec<OrePoly> = (0..3)
                .map(|_| {
                    let deg = (rng.next_u32() % 4) as usize;
                    OrePoly {
                        datum: d.clone(),
                        coeffs: (0..=deg)
                            .map(|_| QElem::random(&d.ctx.field, 2, &mut rng, 0, 8))
                            .collect(),
                    }
                    .normalized()
                })
                .collect();
            let (f, g, h) = (&polys[0], &polys[1], &polys[2]);
            let a = f.mul(g).unwrap().mul(h).unwrap();
            let b = f.mul(&g.mul(h).unwrap()).unwrap();
            assert!(a.eq_at_shared_prec(&b), "associativity");
            let l = f.mul(&g.add(h).unwrap()).unwrap();
            let r = f.mul(g).unwrap().add(&f.mul(h).unwrap()).unwrap();
            assert!(l.eq_at_shared_prec(&r), "left distributivity");
            let l = f.add(g).unwrap().mul(h).unwrap();
            let r = f.mul(h).unwrap().add(&g.mul(h).unwrap()).unwrap();
            assert!(l.eq_at_shared_prec(&r), "right distributivity");
        }
    }

    #[test]
    fn frobenius_relation_n012() {
        let d = test_datum();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 0..3u32 {
            for _ in 0..30 {
                let s = QElem::random(&d.ctx.field, 2, &mut rng, 0, 8);
                let (lhs, rhs) = frobenius_power_relation(&d, &s, n).unwrap();
                assert!(lhs.eq_at_shared_prec(&rhs), "n = {n}");
            }
        }
    }

    #[test]
    fn sigma_fixed_central_s_commutes_with_x_powers() {
        let d = test_datum();
        // π·1 is central and σ-fixed: δ vanishes on it
        let s = d.ctx.pi();
        let (lhs, rhs) = frobenius_power_relation(&d, &s, 1).unwrap();
        assert!(lhs.eq_at_shared_prec(&rhs));
        assert!(lhs.coeff(0).is_zero_at_prec());
    }

    #[test]
    fn right_coefficient_round_trip() {
        let d = test_datum();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let f = OrePoly {
                datum: d.clone(),
                coeffs: (0..4)
                    .map(|_| QElem::random(&d.ctx.field, 2, &mut rng, 0, 8))
                    .collect(),
            }
            .normalized();
            let right = f.to_right_coeffs().unwrap();
            let back = OrePoly::from_right_coeffs(d.clone(), &right).unwrap();
            assert!(back.eq_at_shared_prec(&f));
        }
    }

    #[test]
    fn datum_mismatch_is_rejected() {
        let d1 = test_datum();
        let d2 = test_datum();
        let f = OrePoly::one(d1);
        let g = OrePoly::one(d2);
        assert!(matches!(f.mul(&g), Err(Error::DatumMismatch)));
    }

    #[test]
    fn render_shape() {
        let d = test_datum();
        let f = OrePoly::x_pow(d.clone(), 2)
            .add(&OrePoly::one(d.clone()))
            .unwrap();
        let s = f.render();
        assert!(s.contains("x^2"), "{s}");
    }
}
