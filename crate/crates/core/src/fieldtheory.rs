//! Finite-field Galois machinery: Frobenius orbits, fixed subfields with
//! explicit embeddings, Artin–Schreier splitting, and construction of
//! ramified/unramified extensions of a Laurent series centre with a
//! filtration-adapted basis.
//!
//! Everything is exhaustive over fields of size at most 2^16; splitting
//! fields and embeddings are chosen deterministically (lexicographically
//! least) so fixtures reproduce byte-for-byte.

use crate::error::{Error, Result};
use crate::fq::{FqElem, FqField};
use crate::laurent::Laurent;
use std::sync::Arc;

/// Exhaustive-enumeration size cap.
const ENUM_CAP: u128 = 1 << 16;

/// Orbit of x under y ↦ y^{p^d} until repetition.
pub fn frobenius_orbit(field: &FqField, x: &FqElem, base_degree: u64) -> Result<Vec<FqElem>> {
    if base_degree == 0 || field.k as u64 % base_degree != 0 {
        return Err(Error::Invalid(format!(
            "base degree {base_degree} does not divide {}",
            field.k
        )));
    }
    let mut orbit = vec![x.clone()];
    let mut cur = field.frob_iter(x, base_degree);
    while cur != *x {
        orbit.push(cur.clone());
        cur = field.frob_iter(&cur, base_degree);
    }
    Ok(orbit)
}

/// A subfield presented abstractly together with the image of its
/// generator inside the ambient field.
#[derive(Clone, Debug)]
pub struct FixedField {
    pub subfield: Arc<FqField>,
    /// Image in the ambient field of the abstract subfield generator.
    pub gen_image: FqElem,
    /// The fixed set itself, as ambient elements.
    pub elements: Vec<FqElem>,
}

impl FixedField {
    /// Embed an abstract subfield element into the ambient field.
    pub fn embed(&self, ambient: &FqField, x: &FqElem) -> FqElem {
        eval_poly(ambient, x, &self.gen_image)
    }
}

/// Evaluate a coefficient vector (an element of a smaller field, or any
/// 𝔽_p-polynomial) at a point of `field` by Horner.
pub fn eval_poly(field: &FqField, coeffs: &[u64], at: &FqElem) -> FqElem {
    let mut acc = field.zero();
    for &c in coeffs.iter().rev() {
        acc = field.mul(&acc, at);
        acc = field.add(&acc, &field.from_u64(c));
    }
    acc
}

/// Lexicographically least root of the monic 𝔽_p-polynomial `modulus`
/// inside `field`, i.e. a deterministic embedding generator.
fn lex_least_root(field: &FqField, modulus: &[u64]) -> Option<FqElem> {
    field
        .elements()
        .find(|x| field.is_zero(&eval_poly(field, modulus, x)))
}

/// Subfield of elements fixed by `auto`, found by exhaustive enumeration.
/// `auto` must be a field automorphism (checked on all pairs implicitly by
/// being a power of Frobenius; multiplicativity is sampled).
pub fn fixed_field<F: Fn(&FqElem) -> FqElem>(field: &Arc<FqField>, auto: F) -> Result<FixedField> {
    if field.size() > ENUM_CAP {
        return Err(Error::TooLarge(format!(
            "field of size {} exceeds the enumeration cap",
            field.size()
        )));
    }
    // sampled automorphism check: additive and multiplicative on pairs
    // drawn from a small deterministic set
    let probes: Vec<FqElem> = field.elements().take(8).collect();
    for a in &probes {
        for b in &probes {
            let lhs = auto(&field.mul(a, b));
            let rhs = field.mul(&auto(a), &auto(b));
            if lhs != rhs {
                return Err(Error::NotAnAutomorphism);
            }
            let lhs = auto(&field.add(a, b));
            let rhs = field.add(&auto(a), &auto(b));
            if lhs != rhs {
                return Err(Error::NotAnAutomorphism);
            }
        }
    }
    let elements: Vec<FqElem> = field.elements().filter(|x| auto(x) == *x).collect();
    // |fixed| = p^d for some d ≥ 1 (the fixed set always contains 𝔽_p)
    let mut d = 0usize;
    let mut size = 1u128;
    while size < elements.len() as u128 {
        size *= field.p as u128;
        d += 1;
    }
    if d == 0 || size != elements.len() as u128 {
        return Err(Error::NotAnAutomorphism);
    }
    let subfield = Arc::new(FqField::with_lex_modulus(field.p, d)?);
    let gen_image = if d == 1 {
        field.one()
    } else {
        // the subfield generator maps to a fixed element satisfying the
        // subfield's modulus; lex-least choice is deterministic
        elements
            .iter()
            .find(|x| field.is_zero(&eval_poly(field, &subfield.modulus, x)))
            .cloned()
            .ok_or(Error::RootNotFound)?
    };
    Ok(FixedField {
        subfield,
        gen_image,
        elements,
    })
}

/// The Artin–Schreier polynomial X^p − X − a together with its splitting
/// field and full root list.
#[derive(Clone, Debug)]
pub struct ArtinSchreier {
    pub base: Arc<FqField>,
    pub a: FqElem,
    pub splitting: Arc<FqField>,
    /// Image of the base generator in the splitting field (identity
    /// coefficients when splitting == base).
    pub embed_gen: FqElem,
    /// All p roots, in the splitting field, lex order.
    pub roots: Vec<FqElem>,
}

fn as_eval(field: &FqField, x: &FqElem, a: &FqElem) -> FqElem {
    // x^p − x − a
    let xp = field.pow(x, field.p as u128);
    field.sub(&field.sub(&xp, x), a)
}

pub fn artin_schreier_split(base: &Arc<FqField>, a: &FqElem) -> Result<ArtinSchreier> {
    if base.size() > ENUM_CAP {
        return Err(Error::TooLarge("base field too large to enumerate".into()));
    }
    let in_base: Vec<FqElem> = base
        .elements()
        .filter(|x| base.is_zero(&as_eval(base, x, a)))
        .collect();
    if !in_base.is_empty() {
        return Ok(ArtinSchreier {
            base: base.clone(),
            a: a.clone(),
            splitting: base.clone(),
            embed_gen: base.gen(),
            roots: in_base,
        });
    }
    // irreducible: split in the degree-p extension
    let deg = base.k * base.p as usize;
    let splitting = Arc::new(FqField::with_lex_modulus(base.p, deg)?);
    if splitting.size() > ENUM_CAP {
        return Err(Error::TooLarge("splitting field exceeds the cap".into()));
    }
    let embed_gen = if base.k == 1 {
        splitting.one()
    } else {
        lex_least_root(&splitting, &base.modulus).ok_or(Error::RootNotFound)?
    };
    let a_img = eval_poly(&splitting, a, &embed_gen);
    let roots: Vec<FqElem> = splitting
        .elements()
        .filter(|x| splitting.is_zero(&as_eval(&splitting, x, &a_img)))
        .collect();
    if roots.len() != base.p as usize {
        return Err(Error::RootNotFound);
    }
    Ok(ArtinSchreier {
        base: base.clone(),
        a: a.clone(),
        splitting,
        embed_gen,
        roots,
    })
}

/// A finite extension K = k'((ρ)) of Z = k₀((π)) with ρ^e = π, carrying a
/// distinguished element ζ₀ with ζ₀^C = z, the (e·f)-element basis
/// {αᵢ ρ^j}, and the integer-rescaled valuation (v_K = e·v_Z on Z).
#[derive(Clone, Debug)]
pub struct AdjoinedField {
    pub base: Arc<FqField>,
    pub field: Arc<FqField>,
    /// Image of the base residue generator in the extension residue field.
    pub embed_gen: FqElem,
    /// Ramification index: ρ^e = π.
    pub e: i64,
    /// Inertial degree [k' : k₀].
    pub f: usize,
    /// ζ₀ as a Laurent series in ρ (so its exponent is a v_K-value).
    pub zeta0: Laurent,
    /// Basis (αᵢ, j) of K over Z with filtration values j, 0 ≤ j < e.
    pub basis: Vec<(FqElem, i64)>,
}

impl AdjoinedField {
    /// Lift an element of Z = k₀((π)) into K (coefficient embedding plus
    /// π = ρ^e).
    pub fn lift(&self, z: &Laurent) -> Laurent {
        let mut out = Laurent::zero(self.field.clone(), z.prec() * self.e);
        for (&n, c) in z.terms() {
            let ci = eval_poly(&self.field, c, &self.embed_gen);
            out = out.add(&Laurent::single(
                self.field.clone(),
                n * self.e,
                ci,
                z.prec() * self.e,
            ));
        }
        out
    }
}

/// Adjoin a C'th root of the central monomial z = c·π^d (c ∈ k₀^×, d > 0):
/// with g = gcd(C, d) and e = C/g, K = k'((ρ)) where ρ^e = π and k' is the
/// smallest extension of k₀ containing a C'th root β of c; then
/// ζ₀ = β·ρ^{d/g} satisfies ζ₀^C = z.  The valuation is rescaled by e so
/// it stays ℤ-valued.
pub fn adjoin_root_of_unit_power(z: &Laurent, big_c: i64) -> Result<AdjoinedField> {
    let base = z.field.clone();
    let d = match z.val() {
        crate::val::Val::Finite(d) if d > 0 => d,
        _ => return Err(Error::BadDegree("v(z) must be positive".into())),
    };
    if big_c <= 0 {
        return Err(Error::BadDegree("root order must be positive".into()));
    }
    // monomial leading form required: the construction works on the
    // associated graded level
    let c = z.coeff(d);
    if z.terms().count() != 1 {
        return Err(Error::Invalid(
            "z must be a monomial c*pi^d (graded-level datum)".into(),
        ));
    }
    if base.is_zero(&c) {
        return Err(Error::BadDegree("zero leading coefficient".into()));
    }
    let g = gcd(big_c, d);
    let e = big_c / g;

    // smallest f with a C'th root of c in the degree-f extension of k₀:
    // exists iff c^((q^f − 1)/gcd(C, q^f − 1)) = 1
    let q = base.size();
    let mut f = 1usize;
    loop {
        let size = q
            .checked_pow(f as u32)
            .filter(|&s| s <= ENUM_CAP)
            .ok_or(Error::RootNotFound)?;
        let order = size - 1;
        let gdiv = gcd_u128(big_c as u128, order);
        // test in the extension by explicit construction below; the
        // criterion only needs c's multiplicative order, but building the
        // field is cheap at these sizes
        let ext = if f == 1 {
            base.clone()
        } else {
            Arc::new(FqField::with_lex_modulus(base.p, base.k * f)?)
        };
        let embed_gen = if f == 1 || base.k == 1 {
            if base.k == 1 {
                ext.one()
            } else {
                ext.gen()
            }
        } else {
            lex_least_root(&ext, &base.modulus).ok_or(Error::RootNotFound)?
        };
        let c_img = eval_poly(&ext, &c, &embed_gen);
        let crit = ext.pow(&c_img, order / gdiv);
        if crit == ext.one() {
            let beta = ext
                .elements()
                .find(|b| ext.pow(b, big_c as u128) == c_img)
                .ok_or(Error::RootNotFound)?;
            let prec = z.prec() * e;
            let zeta0 = Laurent::single(ext.clone(), d / g, beta, prec);
            let mut basis = vec![];
            let alphas: Vec<FqElem> = {
                // power basis of k' over k₀: 1, γ, …, γ^{f·k₀deg/k₀deg − 1}
                // where γ is the extension generator
                let mut out = vec![ext.one()];
                let mut cur = ext.one();
                for _ in 1..(ext.k / base.k) {
                    cur = ext.mul(&cur, &ext.gen());
                    out.push(cur.clone());
                }
                out
            };
            for j in 0..e {
                for a in &alphas {
                    basis.push((a.clone(), j));
                }
            }
            return Ok(AdjoinedField {
                base,
                field: ext,
                embed_gen,
                e,
                f: alphas.len(),
                zeta0,
                basis,
            });
        }
        f += 1;
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orbit_of_prime_field_element_is_trivial() {
        let f4 = FqField::with_lex_modulus(2, 2).unwrap();
        assert_eq!(frobenius_orbit(&f4, &f4.one(), 1).unwrap().len(), 1);
        assert_eq!(frobenius_orbit(&f4, &f4.zero(), 1).unwrap().len(), 1);
    }

    #[test]
    fn orbit_of_omega_in_f4() {
        let f4 = FqField::with_lex_modulus(2, 2).unwrap();
        let w = f4.gen();
        let orbit = frobenius_orbit(&f4, &w, 1).unwrap();
        assert_eq!(orbit.len(), 2);
        // ω² = ω + 1 under X² + X + 1
        assert_eq!(orbit[1], f4.add(&w, &f4.one()));
    }

    #[test]
    fn orbit_length_divides_relative_degree() {
        let f16 = Arc::new(FqField::with_lex_modulus(2, 4).unwrap());
        for x in f16.elements() {
            let l = frobenius_orbit(&f16, &x, 1).unwrap().len();
            assert_eq!(4 % l, 0);
            let l2 = frobenius_orbit(&f16, &x, 2).unwrap().len();
            assert_eq!(2 % l2, 0);
        }
    }

    #[test]
    fn fixed_field_of_frobenius_on_f4_is_f2() {
        let f4 = Arc::new(FqField::with_lex_modulus(2, 2).unwrap());
        let fx = fixed_field(&f4, |x| f4.frob(x)).unwrap();
        assert_eq!(fx.subfield.k, 1);
        assert_eq!(fx.elements.len(), 2);
    }

    #[test]
    fn fixed_field_of_identity_is_everything() {
        let f8 = Arc::new(FqField::with_lex_modulus(2, 3).unwrap());
        let fx = fixed_field(&f8, |x| x.clone()).unwrap();
        assert_eq!(fx.subfield.k, 3);
        assert_eq!(fx.elements.len(), 8);
    }

    #[test]
    fn fixed_field_of_frob2_on_f16_is_f4() {
        let f16 = Arc::new(FqField::with_lex_modulus(2, 4).unwrap());
        let fx = fixed_field(&f16, |x| f16.frob_iter(x, 2)).unwrap();
        assert_eq!(fx.subfield.k, 2);
        assert_eq!(fx.elements.len(), 4);
        // the embedding respects the subfield's multiplication
        let g = fx.gen_image.clone();
        // g satisfies the 𝔽_4 modulus inside 𝔽_16
        assert!(f16.is_zero(&eval_poly(&f16, &fx.subfield.modulus, &g)));
    }

    #[test]
    fn non_automorphism_rejected() {
        let f4 = Arc::new(FqField::with_lex_modulus(2, 2).unwrap());
        let r = fixed_field(&f4, |x| f4.add(x, &f4.one()));
        assert!(matches!(r, Err(Error::NotAnAutomorphism)));
    }

    #[test]
    fn artin_schreier_a_zero_splits_in_base() {
        for p in [2u64, 3, 5] {
            let base = Arc::new(FqField::prime(p).unwrap());
            let asr = artin_schreier_split(&base, &base.zero()).unwrap();
            assert!(Arc::ptr_eq(&asr.splitting, &base));
            assert_eq!(asr.roots.len(), p as usize);
        }
    }

    #[test]
    fn artin_schreier_a_one_over_f2_splits_in_f4() {
        let base = Arc::new(FqField::prime(2).unwrap());
        let asr = artin_schreier_split(&base, &base.one()).unwrap();
        assert_eq!(asr.splitting.k, 2);
        assert_eq!(asr.roots.len(), 2);
        for r in &asr.roots {
            let a_img = eval_poly(&asr.splitting, &asr.a, &asr.embed_gen);
            assert!(asr.splitting.is_zero(&as_eval(&asr.splitting, r, &a_img)));
        }
        // roots differ by 1
        let diff = asr.splitting.sub(&asr.roots[0], &asr.roots[1]);
        assert_eq!(diff, asr.splitting.one());
    }

    #[test]
    fn artin_schreier_roots_differ_by_prime_field() {
        // a selection of bases and right-hand sides
        let cases: Vec<(Arc<FqField>, Vec<FqElem>)> = vec![
            {
                let f = Arc::new(FqField::with_lex_modulus(2, 2).unwrap());
                let els = f.elements().collect();
                (f, els)
            },
            {
                let f = Arc::new(FqField::prime(3).unwrap());
                let els = f.elements().collect();
                (f, els)
            },
        ];
        for (base, els) in cases {
            for a in els {
                let asr = artin_schreier_split(&base, &a).unwrap();
                assert_eq!(asr.roots.len(), base.p as usize);
                let a_img = eval_poly(&asr.splitting, &asr.a, &asr.embed_gen);
                for r in &asr.roots {
                    assert!(asr.splitting.is_zero(&as_eval(&asr.splitting, r, &a_img)));
                }
                for r in &asr.roots[1..] {
                    let diff = asr.splitting.sub(r, &asr.roots[0]);
                    // in the prime field: Frobenius-fixed
                    assert_eq!(asr.splitting.frob(&diff), diff);
                }
            }
        }
    }

    #[test]
    fn adjoin_square_root_of_pi() {
        let f2 = Arc::new(FqField::prime(2).unwrap());
        let z = Laurent::pi_pow(f2.clone(), 1, 8);
        let k = adjoin_root_of_unit_power(&z, 2).unwrap();
        assert_eq!(k.e, 2);
        assert_eq!(k.f, 1);
        // ζ₀² = π, and v_K(π) = 2 after rescaling
        let sq = k.zeta0.mul(&k.zeta0);
        assert_eq!(sq.val(), crate::val::Val::Finite(2));
        assert_eq!(k.basis.len(), 2);
    }

    #[test]
    fn adjoin_trivial_root() {
        let f2 = Arc::new(FqField::prime(2).unwrap());
        let z = Laurent::pi_pow(f2.clone(), 1, 8);
        let k = adjoin_root_of_unit_power(&z, 1).unwrap();
        assert_eq!(k.e, 1);
        assert_eq!(k.f, 1);
        assert_eq!(k.basis.len(), 1);
        assert_eq!(k.zeta0.val(), crate::val::Val::Finite(1));
    }

    #[test]
    fn adjoin_cube_root_of_2pi_cubed_over_f3() {
        // z = 2π³, C = 3: gcd = 3, e = 1, so the extension is unramified
        // in ρ (the cube root is 2^{1/3}·π and 2 = 2³ in 𝔽_3, a cube
        // already): ζ₀ = 2π, which indeed satisfies (2π)³ = 8π³ = 2π³
        let f3 = Arc::new(FqField::prime(3).unwrap());
        let two = f3.from_u64(2);
        let z = Laurent::single(f3.clone(), 3, two, 8);
        let k = adjoin_root_of_unit_power(&z, 3).unwrap();
        assert_eq!(k.e, 1);
        assert_eq!(k.f, 1);
        let cube = k.zeta0.mul(&k.zeta0).mul(&k.zeta0);
        let z_lift = k.lift(&z);
        assert!(cube.sub(&z_lift).is_zero_at_prec());
        // ρ³/z-unit check: ζ₀³ has the same valuation as z
        assert_eq!(cube.val(), z_lift.val());
    }

    #[test]
    fn adjoin_needing_residue_extension() {
        // z = w·π over 𝔽_4, C = 2: w has no square root of the right kind?
        // w = ω: ω ^2 = ω² so ω has the square root ω²·ω... every element
        // of 𝔽_4 is a square (Frobenius is onto), so f = 1, e = 2
        let f4 = Arc::new(FqField::with_lex_modulus(2, 2).unwrap());
        let z = Laurent::single(f4.clone(), 1, f4.gen(), 8);
        let k = adjoin_root_of_unit_power(&z, 2).unwrap();
        assert_eq!(k.e, 2);
        assert_eq!(k.f, 1);
        let sq = k.zeta0.mul(&k.zeta0);
        assert!(sq.sub(&k.lift(&z)).is_zero_at_prec());

        // over 𝔽_3, z = 2π² with C = 2: e = 1 and 2 is not a square in
        // 𝔽_3, so the residue field must grow: f = 2
        let f3 = Arc::new(FqField::prime(3).unwrap());
        let z = Laurent::single(f3.clone(), 2, f3.from_u64(2), 8);
        let k = adjoin_root_of_unit_power(&z, 2).unwrap();
        assert_eq!(k.e, 1);
        assert_eq!(k.f, 2);
        let sq = k.zeta0.mul(&k.zeta0);
        assert!(sq.sub(&k.lift(&z)).is_zero_at_prec());
    }

    #[test]
    fn filt_basis_formula_on_random_vectors() {
        // K over Z with basis {αᵢ ρ^j}: the valuation of Σ z_{ij} αᵢ ρ^j
        // equals min{ e·φ(z_{ij}) + j }
        let f3 = Arc::new(FqField::prime(3).unwrap());
        let cases = vec![
            (Laurent::pi_pow(f3.clone(), 1, 8), 2),            // ramified quadratic
            (Laurent::single(f3.clone(), 2, f3.from_u64(2), 8), 2), // unramified quadratic
            (Laurent::pi_pow(f3.clone(), 1, 8), 3),            // ramified cubic
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for (z, c) in cases {
            let k = adjoin_root_of_unit_power(&z, c).unwrap();
            for _ in 0..100 {
                let mut total = Laurent::zero(k.field.clone(), 64);
                let mut expect = crate::val::Val::Infinity;
                for (alpha, j) in &k.basis {
                    // random z_{ij} ∈ Z with valuation in [-2, 3]
                    let v = rng.gen_range(-2..4i64);
                    if rng.gen_bool(0.25) {
                        continue; // sparse
                    }
                    let coeff = loop {
                        let c = f3.random(&mut rng);
                        if !f3.is_zero(&c) {
                            break c;
                        }
                    };
                    let zij = Laurent::single(f3.clone(), v, coeff, 8);
                    let lifted = k.lift(&zij);
                    let term = lifted
                        .mul(&Laurent::constant(k.field.clone(), alpha.clone(), 64))
                        .shift(*j);
                    total = total.add(&term);
                    expect = expect.min(crate::val::Val::Finite(k.e * v + j));
                }
                assert_eq!(total.val(), expect);
            }
        }
    }

    #[test]
    fn fixed_field_round_trip_on_extension() {
        // the fixed field of the full relative Frobenius of k'/k₀ is k₀
        let f3 = Arc::new(FqField::prime(3).unwrap());
        let z = Laurent::single(f3.clone(), 2, f3.from_u64(2), 8);
        let k = adjoin_root_of_unit_power(&z, 2).unwrap();
        assert_eq!(k.f, 2);
        let ext = k.field.clone();
        let base_k = k.base.k as u64;
        let fx = fixed_field(&ext, |x| ext.frob_iter(x, base_k)).unwrap();
        assert_eq!(fx.subfield.k, k.base.k);
        assert_eq!(fx.elements.len() as u128, k.base.size());
    }

    #[test]
    fn rejects_bad_degree() {
        let f2 = Arc::new(FqField::prime(2).unwrap());
        let unit = Laurent::one(f2.clone(), 8);
        assert!(matches!(
            adjoin_root_of_unit_power(&unit, 2),
            Err(Error::BadDegree(_))
        ));
        let z = Laurent::pi_pow(f2.clone(), 1, 8);
        assert!(matches!(
            adjoin_root_of_unit_power(&z, 0),
            Err(Error::BadDegree(_))
        ));
    }
}
