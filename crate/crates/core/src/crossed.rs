//! Crossed-product structure on bounded series: with g = x − t the ring
//! splits as ⊕_{i<p^m} S·gⁱ over the subring S generated by x^{p^m}.
//! This module computes the splitting (a triangular solve against the
//! monic basis {x^{p^m k}·gⁱ}), normalizes the presentation when t is a
//! unit, and implements the formal derivative together with the
//! derivative-based component extraction and ideal extension.

use crate::error::{Error, Result};
use crate::ore::OrePoly;
use crate::qelem::QElem;
use crate::series::BoundedSeries;
use crate::skew::SkewDatum;
use crate::val::Val;
use std::sync::Arc;

/// Largest p^m a decomposition will attempt.
const MAX_COMPONENTS: u64 = 1 << 10;

#[derive(Clone, Debug)]
pub struct CrossedDecomp {
    pub m: u32,
    /// The ambient datum (variable x).
    pub datum: Arc<SkewDatum>,
    /// The subring datum (variable y = x^{p^m}, maps σ^{p^m}, δ^{p^m}).
    pub sub_datum: Arc<SkewDatum>,
    /// p^m series in the variable y; index i is the gⁱ-component.
    pub components: Vec<BoundedSeries>,
    /// Cached expansions of gⁱ for i < p^m.
    pub gpowers: Vec<OrePoly>,
    /// The x-window of the source series (recomposition target).
    pub xcap: usize,
}

fn g_powers(datum: &Arc<SkewDatum>, count: usize) -> Result<Vec<OrePoly>> {
    let g = OrePoly::g(datum.clone());
    let mut out = vec![OrePoly::one(datum.clone())];
    for _ in 1..count {
        let next = out.last().unwrap().mul(&g)?;
        out.push(next);
    }
    Ok(out)
}

/// Split f into its ⊕ S·gⁱ components by peeling the top x-degree against
/// the monic basis element x^{p^m k}·gⁱ of the same degree.
pub fn decompose(f: &BoundedSeries, m: u32) -> Result<CrossedDecomp> {
    let datum = f.datum.clone();
    let pm_big = (datum.p as u128).pow(m);
    if pm_big > MAX_COMPONENTS as u128 {
        return Err(Error::TooLarge(format!(
            "p^m = {pm_big} components exceeds the cap"
        )));
    }
    let pm = pm_big as usize;
    let sub_datum = datum.iterate(m)?;
    let sub_xcap = f.xcap / pm;
    let gpowers = g_powers(&datum, pm)?;

    // an error of f_Q value ≥ tail in x-degrees spreads, after the unit-
    // diagonal triangular solve, into component coefficients of valuation
    // ≥ tail − xcap; record the corresponding y-level floor
    let comp_tail = match f.tail {
        Val::Infinity => Val::Infinity,
        t => t + -(f.xcap as i64),
    };
    let mut components: Vec<BoundedSeries> = (0..pm)
        .map(|_| {
            let mut c = BoundedSeries::zero(sub_datum.clone(), sub_xcap);
            c.tail = comp_tail;
            c
        })
        .collect();

    let mut rem = f.to_poly();
    while let Some(top) = rem.degree() {
        let (k, i) = (top / pm, top % pm);
        if k > sub_xcap {
            return Err(Error::PrecisionExhausted(format!(
                "degree {top} does not fit the component window"
            )));
        }
        let q = rem.coeff(top);
        let basis = OrePoly::x_pow(datum.clone(), pm * k).mul(&gpowers[i])?;
        rem = rem.sub(&basis.scale_left(&q))?;
        if rem.degree().map_or(false, |d| d >= top) {
            return Err(Error::PrecisionExhausted(
                "leading term failed to cancel in the triangular solve".into(),
            ));
        }
        components[i].coeffs[k] = components[i].coeffs[k].add(&q);
    }

    Ok(CrossedDecomp {
        m,
        datum,
        sub_datum,
        components,
        gpowers,
        xcap: f.xcap,
    })
}

impl CrossedDecomp {
    /// Σ_i componentsᵢ(x^{p^m})·gⁱ, back in the ambient variable.
    pub fn recompose(&self) -> Result<BoundedSeries> {
        let pm = self.components.len();
        let mut acc = OrePoly::zero(self.datum.clone());
        let mut tail = Val::Infinity;
        for (i, comp) in self.components.iter().enumerate() {
            tail = tail.min(comp.tail);
            for (k, q) in comp.coeffs.iter().enumerate() {
                if q.is_zero_at_prec() {
                    continue;
                }
                let term = OrePoly::monomial(self.datum.clone(), q.clone(), pm * k)
                    .mul(&self.gpowers[i])?;
                acc = acc.add(&term)?;
            }
        }
        let mut out = BoundedSeries::from_poly(&acc, self.xcap);
        out.tail = out.tail.min(tail);
        Ok(out)
    }
}

/// Certificate for the diagonal change of basis g ↦ h = −t^{-1}·g, which
/// renormalizes the presentation to one with t₀ = −1 (so h = x₀ + 1 and
/// δ₀ = σ₀ − id by construction).
#[derive(Clone, Debug)]
pub struct IwasawaNormalization {
    /// Datum (σ₀, t₀ = −1) with σ₀ = conj_{t^{-1}} ∘ σ.
    pub datum0: Arc<SkewDatum>,
    /// The unit −t^{-1} with h = unit·g.
    pub unit: QElem,
}

pub fn iwasawa_normalize(datum: &Arc<SkewDatum>) -> Result<IwasawaNormalization> {
    let t_inv = datum.t.invert_in_o()?;
    let unit = t_inv.neg();
    let sigma0 = crate::filtmap::FiltMap::Composite(vec![
        datum.sigma.clone(),
        crate::filtmap::FiltMap::inner(t_inv)?,
    ]);
    let t0 = datum.ctx.one().neg();
    let j_max = datum.deg_delta.len().saturating_sub(1).max(1);
    let datum0 = SkewDatum::with_defaults(datum.ctx.clone(), sigma0, t0, j_max)?;
    Ok(IwasawaNormalization { datum0, unit })
}

/// A localized element (x − t)^{-r}·body with the denominator on the left.
#[derive(Clone, Debug)]
pub struct Localized {
    pub r: u32,
    pub body: BoundedSeries,
}

fn scale_fp(f: &BoundedSeries, c: u64) -> BoundedSeries {
    let cf = f.datum.ctx.field.from_u64(c);
    BoundedSeries {
        datum: f.datum.clone(),
        coeffs: f.coeffs.iter().map(|q| q.scale_fq(&cf)).collect(),
        xcap: f.xcap,
        tail: f.tail,
    }
}

/// The coefficientwise derivative Σ n qₙ x^{n−1} (the action of d/dx on a
/// plain series; left coefficients are untouched because they commute with
/// the Artin–Schreier commutator that defines the derivative).
pub fn naive_derivative(f: &BoundedSeries) -> BoundedSeries {
    let d = &f.datum;
    let p = d.p;
    let mut out = BoundedSeries::zero(d.clone(), f.xcap);
    for n in 1..=f.xcap {
        let c = (n as u64) % p;
        if c == 0 {
            continue;
        }
        out.coeffs[n - 1] = f.coeffs[n].scale_fq(&d.ctx.field.from_u64(c));
    }
    out.tail = f.tail + -1;
    out
}

/// d/dx of a localized element, in the canonical form with denominator
/// exponent r + 1: coefficient n of the new body is
/// n·σ(qₙ) − r·qₙ − (n+1)·σ(q_{n+1})·t.
pub fn formal_derivative(f: &Localized) -> Localized {
    let d = &f.body.datum;
    let p = d.p;
    let xcap = f.body.xcap;
    let r_mod = (f.r as u64) % p;
    let mut body = BoundedSeries::zero(d.clone(), xcap);
    for n in 0..=xcap {
        let mut c = d.ctx.zero();
        let cn = (n as u64) % p;
        if cn != 0 {
            c = c.add(&d.apply_sigma(&f.body.coeffs[n]).scale_fq(&d.ctx.field.from_u64(cn)));
        }
        if r_mod != 0 {
            c = c.sub(&f.body.coeffs[n].scale_fq(&d.ctx.field.from_u64(r_mod)));
        }
        if n + 1 <= xcap {
            let cn1 = ((n + 1) as u64) % p;
            if cn1 != 0 {
                let term = d
                    .apply_sigma(&f.body.coeffs[n + 1])
                    .scale_fq(&d.ctx.field.from_u64(cn1))
                    .mul(&d.t);
                c = c.sub(&term);
            }
        }
        body.coeffs[n] = c;
    }
    // the q_{xcap+1} cross term is lost at the window edge
    body.tail = f.body.tail.min(match f.body.tail {
        Val::Infinity => Val::Infinity,
        t => t + -1,
    });
    Localized { r: f.r + 1, body }
}

/// Check (g·f − f·g ... ) — precisely: with α central in Q and
/// σ(α) = α + i·1, the identity (f·α − α·f)·i^{-1}·(x−t)^{-1} = d/dx f,
/// verified without localizing by comparing (f·α − α·f)·i^{-1} against
/// (d/dx f)·(x − t).
pub fn derivative_invariance_check(f: &BoundedSeries, alpha: &QElem, i: u64) -> Result<bool> {
    let d = &f.datum;
    let p = d.p;
    let i = i % p;
    if i == 0 {
        return Err(Error::HypothesisFail("i must be nonzero mod p".into()));
    }
    let shift = d.ctx.one().scale_fq(&d.ctx.field.from_u64(i));
    if !d.apply_sigma(alpha).eq_at_shared_prec(&alpha.add(&shift)) {
        return Err(Error::HypothesisFail(
            "sigma(alpha) != alpha + i at precision".into(),
        ));
    }
    let a_series = BoundedSeries::constant(d.clone(), alpha.clone(), f.xcap);
    let comm = f.mul(&a_series)?.sub(&a_series.mul(f)?)?;
    let i_inv = mod_inverse(i, p);
    let lhs = scale_fp(&comm, i_inv);
    let g_series = BoundedSeries::from_poly(&OrePoly::g(d.clone()), f.xcap);
    let rhs = naive_derivative(f).mul(&g_series)?;
    Ok(lhs.eq_at_truncation(&rhs))
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // p prime, a ≠ 0 mod p
    let mut r = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    r
}

/// Split f = Σ_{i<p} fᵢ(x^p)·xⁱ by descending derivatives: the r-th
/// derivative of the part of degree-class ≤ r is r!·f_r(x^p).  Returns
/// the p series fᵢ(x^p) (each supported on p-multiple degrees).
pub fn extract_components_by_derivative(f: &BoundedSeries) -> Result<Vec<BoundedSeries>> {
    let d = &f.datum;
    let p = d.p as usize;
    let mut comps: Vec<BoundedSeries> = (0..p)
        .map(|_| BoundedSeries::zero(d.clone(), f.xcap))
        .collect();
    let mut rem = f.clone();
    for r in (0..p).rev() {
        let mut der = rem.clone();
        for _ in 0..r {
            der = naive_derivative(&der);
        }
        let mut rfact = 1u64;
        for j in 2..=(r as u64) {
            rfact = rfact * j % d.p;
        }
        let fr = scale_fp(&der, mod_inverse(rfact, d.p));
        if r > 0 {
            let xr = BoundedSeries::monomial(d.clone(), d.ctx.one(), r, f.xcap);
            rem = rem.sub(&fr.mul(&xr)?)?;
        }
        comps[r] = fr;
    }
    Ok(comps)
}

/// Extension Ψ(J) = J·R of an ideal of the x^p-subring given by a finite
/// σ-invariant generator list: returns generators {gen·xⁱ : i < p} after
/// checking σ̃-invariance and producing the two-sided witness
/// x·s = σ̃(s)·x + t·s − σ̃(s)·t for each generator.
pub fn extend_ideal_psi(gens: &[BoundedSeries]) -> Result<Vec<BoundedSeries>> {
    let mut out = vec![];
    for gen in gens {
        let d = &gen.datum;
        let p = d.p as usize;
        for (n, q) in gen.coeffs.iter().enumerate() {
            if n % p != 0 && !q.is_zero_at_prec() {
                return Err(Error::Invalid(format!(
                    "generator has a degree-{n} term outside the x^p-subring"
                )));
            }
        }
        let sg = gen.extend_map(&d.sigma)?;
        if !sg.eq_at_truncation(gen) {
            return Err(Error::NotSigmaInvariant);
        }
        // two-sided witness via the rewriting rule
        let x = BoundedSeries::x(d.clone(), gen.xcap);
        let lhs = x.mul(gen)?;
        let t_series = BoundedSeries::constant(d.clone(), d.t.clone(), gen.xcap);
        let rhs = sg
            .mul(&x)?
            .add(&t_series.mul(gen)?)?
            .sub(&sg.mul(&t_series)?)?;
        if !lhs.eq_at_truncation(&rhs) {
            return Err(Error::CommutationFail(
                "two-sided witness x·s = sigma(s)x + ts - sigma(s)t failed".into(),
            ));
        }
        for i in 0..p {
            let xi = BoundedSeries::monomial(d.clone(), d.ctx.one(), i, gen.xcap);
            out.push(gen.mul(&xi)?);
        }
    }
    Ok(out)
}
