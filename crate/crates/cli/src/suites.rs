//! The verification-suite registry.
//!
//! Each suite takes a built instance and a suite-local seeded generator,
//! runs a batch of certified checks and returns a pass/fail outcome with
//! residual valuations and counters.  The registry is ordered by suite id
//! and that order is the execution and report order.

use crate::config::{parse_matrix, parse_monomial, ConfigError, Instance};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skewpow::{
    adjoin_root_of_unit_power, artin_schreier_split, build_extended_datum, converge_inner,
    decompose, derivative_invariance_check, enumerate_ideals, frobenius_power_relation,
    is_prime_fd, minimal_support_element, nilradical_fd, phi_contract, psi_extend, reduce_to_sfoh,
    subring_crossed, tensor_filtration, tensor_filtration_oracle, theta_map, AdjoinedField,
    BoundedSeries, Compat, Error, FdCrossed, FdIdeal, FiltMap, FqField, Laurent, OrePoly, QElem,
    Result, RingCtx, SfohInstance, SkewDatum, Val,
};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Debug, Default)]
pub struct SuiteOutcome {
    pub pass: bool,
    pub residuals: Vec<Val>,
    pub counters: BTreeMap<String, u64>,
    pub detail: String,
}

pub struct Suite {
    pub id: &'static str,
    pub citation: &'static str,
    pub run: fn(&Instance, &mut ChaCha8Rng) -> Result<SuiteOutcome>,
}

/// All suites, sorted by id.  The ordering here is the execution order of
/// `verify` and the record order in reports.
pub const REGISTRY: &[Suite] = &[
    Suite {
        id: "compat-certify",
        citation: "compat-cert Def.(2.5)",
        run: compat_certify,
    },
    Suite {
        id: "convergence",
        citation: "converge §5.4",
        run: convergence,
    },
    Suite {
        id: "decompose-roundtrip",
        citation: "crossed-decomp §3.1",
        run: decompose_roundtrip,
    },
    Suite {
        id: "derivative-invariance",
        citation: "derivative-invariance §3.2",
        run: derivative_invariance,
    },
    Suite {
        id: "fd-lattice",
        citation: "fd-lattice §3.5",
        run: fd_lattice,
    },
    Suite {
        id: "frobenius-relations",
        citation: "frob-relations Eq.(2.7)",
        run: frobenius_relations,
    },
    Suite {
        id: "mult-formula",
        citation: "mult-formula Eq.(2.5)",
        run: mult_formula,
    },
    Suite {
        id: "ore-axioms",
        citation: "ore-axioms §2.1",
        run: ore_axioms,
    },
    Suite {
        id: "relations",
        citation: "g-relations §3.1",
        run: relations,
    },
    Suite {
        id: "sfoh-pipeline",
        citation: "sfoh-pipeline §5.5",
        run: sfoh_pipeline,
    },
    Suite {
        id: "supp-lemma",
        citation: "supp-lemma §3.4",
        run: supp_lemma,
    },
    Suite {
        id: "tensor-valuation",
        citation: "tensor-filtration Prop.(4.1)",
        run: tensor_valuation,
    },
    Suite {
        id: "theta-morphism",
        citation: "theta-morphism Thm.(4.2)",
        run: theta_morphism,
    },
    Suite {
        id: "unit-inversion",
        citation: "unit-inversion Lem.(2.6)",
        run: unit_inversion,
    },
];

pub fn find(id: &str) -> Option<&'static Suite> {
    REGISTRY.iter().find(|s| s.id == id)
}

/// Check the selected suites exist and have the config sections they need.
pub fn validate_selection(cfg: &crate::config::InstanceConfig) -> std::result::Result<(), ConfigError> {
    for id in &cfg.suites {
        if find(id).is_none() {
            return Err(ConfigError(format!("unknown suite {id:?}")));
        }
        if id == "sfoh-pipeline" && cfg.pipeline.is_none() {
            return Err(ConfigError("suite \"sfoh-pipeline\" needs a [pipeline] table".into()));
        }
        if (id == "tensor-valuation" || id == "theta-morphism") && cfg.extension.is_none() {
            return Err(ConfigError(format!("suite {id:?} needs an [extension] table")));
        }
    }
    Ok(())
}

/// Per-suite generator: the instance seed mixed with an FNV-1a hash of the
/// suite id, so adding or removing suites never reshuffles the others.
pub fn suite_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn counters(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn build_extension(inst: &Instance) -> Result<AdjoinedField> {
    let spec = inst
        .cfg
        .extension
        .as_ref()
        .expect("selection validated before running");
    let z = crate::config::parse_laurent(&inst.field, &spec.z, inst.cfg.precision)
        .map_err(|e| Error::Invalid(e.0))?;
    adjoin_root_of_unit_power(&z, spec.root)
}

// ---------------------------------------------------------------------------
// suite bodies

fn compat_certify(inst: &Instance, _rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let datum = &inst.datum;
    let (label, m) = match datum.compat {
        Compat::Compatible => ("compatible".to_string(), 0),
        Compat::QuasiWith(m) => (format!("quasi-{m}"), m as u64),
        Compat::Uncertified => ("uncertified".to_string(), 0),
    };
    let mut pass = datum.compat != Compat::Uncertified;
    if let Some(expected) = &inst.cfg.expect_compat {
        pass = pass && *expected == label;
    }
    // degree collapse of the iterated deviation: deg(σ^{p^m} − id) for
    // m = 1, 2, recorded as residuals
    let mut residuals = vec![];
    for m in 1..=2u32 {
        let pm = (datum.p as u64).pow(m);
        let dev = FiltMap::SigmaMinusId(Box::new(FiltMap::Iterate(
            Box::new(datum.sigma.clone()),
            pm,
        )));
        residuals.push(skewpow::degree_of_map(&dev, &inst.ctx)?);
    }
    Ok(SuiteOutcome {
        pass,
        residuals,
        counters: counters(&[("quasi-exponent", m)]),
        detail: format!("certified {label}"),
    })
}

fn convergence(inst: &Instance, _rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let datum = &inst.datum;
    let ctx = &inst.ctx;
    let d = if datum.p == 2 { 3 } else { 2 };
    // c₁ = 1 + π is central, so τ = id satisfies τ^d = conj_{c₁}
    let c1 = ctx.one().add(&ctx.pi());
    let run = converge_inner(datum, &FiltMap::Identity, &c1, d)?;
    let mut pass = run.residual >= Val::Finite(1);
    let mut residuals = vec![];
    for (floor, observed) in &run.gaps {
        pass = pass && *observed >= Val::Finite(*floor);
        residuals.push(*observed);
    }
    residuals.push(run.residual);
    Ok(SuiteOutcome {
        pass,
        residuals,
        counters: counters(&[
            ("d", run.d),
            ("r", run.r as u64),
            ("steps", run.sj.len() as u64),
        ]),
        detail: format!("s_j = {:?}", run.sj),
    })
}

fn decompose_roundtrip(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let datum = &inst.datum;
    let xcap = inst.cfg.xcap;
    let mut trials = 0u64;
    let mut pass = true;
    for m in 1..=2u32 {
        for _ in 0..10 {
            let f = BoundedSeries::random_poly(datum, rng, 6, 0, xcap);
            let dec = decompose(&f, m)?;
            let back = dec.recompose()?;
            pass = pass && back.eq_at_truncation(&f);
            trials += 1;
        }
    }
    Ok(SuiteOutcome {
        pass,
        residuals: vec![],
        counters: counters(&[("trials", trials)]),
        detail: "component split against the g-power basis, then recomposed".into(),
    })
}

fn derivative_invariance(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    // the check needs σ(α) = α + 1, so it runs over the splitting field of
    // x^p − x − 1 (degree p over the prime field) with σ = Frobenius,
    // independent of the instance coefficient field
    let p = inst.cfg.p;
    let base = Arc::new(FqField::prime(p)?);
    let split = artin_schreier_split(&base, &base.one())?;
    let field = split.splitting.clone();
    let prec = inst.cfg.precision;
    let s = inst.cfg.s;
    let ctx = RingCtx::new(field.clone(), s, prec);
    let t = ctx.one().neg();
    let datum = SkewDatum::with_defaults(ctx, FiltMap::FrobeniusPower(1), t, 8)?;
    let alpha = QElem::scalar(
        Laurent::constant(field.clone(), split.roots[0].clone(), prec),
        s,
    );
    let mut pass = true;
    let trials = 10u64;
    for _ in 0..trials {
        let f = BoundedSeries::random_poly(&datum, rng, 5, 0, inst.cfg.xcap);
        pass = pass && derivative_invariance_check(&f, &alpha, 1)?;
    }
    Ok(SuiteOutcome {
        pass,
        residuals: vec![],
        counters: counters(&[("trials", trials), ("field-degree", field.k as u64)]),
        detail: format!("root of x^{p} - x - 1 over F_{p}, sigma = Frobenius"),
    })
}

fn fd_lattice(inst: &Instance, _rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let p = inst.cfg.p;
    let r = FdCrossed::group_algebra(p, 2)?;
    let ideals = enumerate_ideals(&r)?;
    let s = subring_crossed(&r)?;
    let sub_ideals = enumerate_ideals(&s)?;
    let mut pass = true;
    // contraction after extension is the identity on the subring lattice
    for i in &sub_ideals {
        let ext = psi_extend(&r, &s, i);
        let back = phi_contract(&r, &s, &ext);
        pass = pass && back.basis == i.basis;
    }
    let nil = nilradical_fd(&r)?;
    pass = pass && !nil.is_zero() && !is_prime_fd(&r)?;
    Ok(SuiteOutcome {
        pass,
        residuals: vec![],
        counters: counters(&[
            ("ideals", ideals.len() as u64),
            ("subring-ideals", sub_ideals.len() as u64),
            ("nilradical-rank", nil.rank() as u64),
        ]),
        detail: format!("group algebra F_{p}[Z/{}]", p * p),
    })
}

fn frobenius_relations(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let datum = &inst.datum;
    let mut pass = true;
    let mut trials = 0u64;
    for n in 0..=2u32 {
        for _ in 0..8 {
            let s = QElem::random_in_o(&inst.field, inst.cfg.s, rng, inst.cfg.precision);
            let (lhs, rhs) = frobenius_power_relation(datum, &s, n)?;
            pass = pass && lhs.eq_at_shared_prec(&rhs);
            trials += 1;
        }
    }
    Ok(SuiteOutcome {
        pass,
        residuals: vec![],
        counters: counters(&[("trials", trials)]),
        detail: "expanded x^{p^n}·s against the closed sigma/delta form, n = 0..2".into(),
    })
}

fn mult_formula(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let datum = &inst.datum;
    let xcap = inst.cfg.xcap;
    let mut pass = true;
    let trials = 8u64;
    for _ in 0..trials {
        let f = BoundedSeries::random_poly(datum, rng, 4, 0, xcap);
        let g = BoundedSeries::random_poly(datum, rng, 4, 0, xcap);
        let series = f.mul(&g)?;
        let ore = f.to_poly().mul(&g.to_poly())?;
        pass = pass && series.eq_at_truncation(&BoundedSeries::from_poly(&ore, xcap));
    }
    Ok(SuiteOutcome {
        pass,
        residuals: vec![],
        counters: counters(&[("trials", trials)]),
        detail: "series product agrees with the polynomial rewriting product".into(),
    })
}

fn ore_axioms(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let datum = &inst.datum;
    let xcap = inst.cfg.xcap;
    let mut pass = true;
    let trials = 8u64;
    let rand_poly =
        |rng: &mut ChaCha8Rng| BoundedSeries::random_poly(datum, rng, 3, 0, xcap).to_poly();
    for _ in 0..trials {
        let f = rand_poly(rng);
        let g = rand_poly(rng);
        let h = rand_poly(rng);
        let assoc = f.mul(&g.mul(&h)?)?.eq_at_shared_prec(&f.mul(&g)?.mul(&h)?);
        let distr = f
            .mul(&g.add(&h)?)?
            .eq_at_shared_prec(&f.mul(&g)?.add(&f.mul(&h)?)?);
        pass = pass && assoc && distr;
    }
    Ok(SuiteOutcome {
        pass,
        residuals: vec![],
        counters: counters(&[("trials", trials)]),
        detail: "associativity and distributivity on random polynomial triples".into(),
    })
}

fn relations(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let datum = &inst.datum;
    let g = OrePoly::g(datum.clone());
    let x = OrePoly::x(datum.clone());
    let mut pass = g.mul(&x)?.eq_at_shared_prec(&x.mul(&g)?);
    let trials = 15u64;
    for _ in 0..trials {
        let q = QElem::random_in_o(&inst.field, inst.cfg.s, rng, inst.cfg.precision);
        let sq = datum.apply_sigma(&q);
        // x·q = σ(q)·x + δ(q)
        let lhs = x.mul(&OrePoly::constant(datum.clone(), q.clone()))?;
        let rhs = OrePoly::monomial(datum.clone(), sq.clone(), 1)
            .add(&OrePoly::constant(datum.clone(), datum.apply_delta(&q)))?;
        pass = pass && lhs.eq_at_shared_prec(&rhs);
        // g·q = σ(q)·g, the exact commutation of the shifted variable
        let lhs = g.mul(&OrePoly::constant(datum.clone(), q))?;
        let rhs = OrePoly::constant(datum.clone(), sq).mul(&g)?;
        pass = pass && lhs.eq_at_shared_prec(&rhs);
    }
    Ok(SuiteOutcome {
        pass,
        residuals: vec![],
        counters: counters(&[("trials", trials)]),
        detail: "xq = sigma(q)x + delta(q), gq = sigma(q)g, gx = xg".into(),
    })
}

fn sfoh_pipeline(inst: &Instance, _rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let spec = inst
        .cfg
        .pipeline
        .as_ref()
        .expect("selection validated before running");
    let a = parse_matrix(&inst.field, &spec.witness, inst.cfg.s, inst.cfg.precision)
        .map_err(|e| Error::Invalid(e.0))?;
    let gap = match &spec.gap {
        Some(src) => Some(
            parse_monomial(&inst.field, src, inst.cfg.precision).map_err(|e| Error::Invalid(e.0))?,
        ),
        None => None,
    };
    let sfoh = SfohInstance {
        datum: inst.datum.clone(),
        a,
        n: spec.n,
        gap,
        k0_deg: spec.k0_deg,
        t_exp: spec.t_exp,
    };
    let rep = reduce_to_sfoh(&sfoh)?;
    let pass = rep.residual >= Val::Finite(1)
        && rep.unit.u() == Val::Finite(0)
        && rep.unit_inv.u() == Val::Finite(0);
    let mut residuals: Vec<Val> = rep.stages.iter().map(|st| st.residual).collect();
    residuals.push(rep.residual);
    let stages = rep
        .stages
        .iter()
        .map(|st| format!("{} [{}]: {}", st.stage, st.citation, st.detail))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(SuiteOutcome {
        pass,
        residuals,
        counters: counters(&[
            ("ell", rep.ell as u64),
            ("s-exp", rep.s_exp as u64),
            ("stages", rep.stages.len() as u64),
        ]),
        detail: format!("ell = {}; unit = {}; {stages}", rep.ell, rep.unit.render()),
    })
}

/// All elements of the span of an ideal basis, for exhaustive minimality
/// scans (the lattices involved stay below a few hundred elements).
fn span_elements(r: &FdCrossed, ideal: &FdIdeal) -> Vec<Vec<skewpow::FqElem>> {
    let field = r.field().clone();
    let p = field.p;
    let rank = ideal.rank();
    let total = (p as u128).pow(rank as u32) as u64;
    let mut out = vec![];
    for idx in 0..total {
        let mut v = r.zero();
        let mut rem = idx;
        for b in &ideal.basis {
            let c = field.from_u64(rem % p);
            rem /= p;
            for (slot, x) in v.iter_mut().zip(b.iter()) {
                *slot = field.add(slot, &field.mul(&c, x));
            }
        }
        out.push(v);
    }
    out
}

fn supp_lemma(inst: &Instance, _rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let p = inst.cfg.p;
    let mut rings = vec![(format!("F_{p}[Z/{}]", p * p), FdCrossed::group_algebra(p, 2)?)];
    if p == 2 {
        // the 256-element crossed product F_4 ⋊_Frob Z/4
        let f4 = FqField::with_lex_modulus(2, 2)?;
        let base = skewpow::FdAlgebra::from_finite_field(&f4, 1)?;
        let one = base.one();
        rings.push(("F_4 x| Z/4".into(), FdCrossed::new(base, 2, one)?));
    }
    let mut pass = true;
    let mut checked = 0u64;
    let mut names = vec![];
    for (name, r) in &rings {
        let field = r.field().clone();
        for ideal in enumerate_ideals(r)? {
            if ideal.is_zero() {
                continue;
            }
            let v = minimal_support_element(r, &ideal)?;
            pass = pass && ideal.contains(&field, &v);
            let vsize = r.support(&v).len();
            // exhaustive scan: nothing in the ideal beats the witness
            for w in span_elements(r, &ideal) {
                if !r.support(&w).is_empty() && r.support(&w).len() < vsize {
                    pass = false;
                }
            }
            checked += 1;
        }
        names.push(name.clone());
    }
    Ok(SuiteOutcome {
        pass,
        residuals: vec![],
        counters: counters(&[("ideals-checked", checked)]),
        detail: format!("minimal-support witnesses verified exhaustively in {}", names.join(", ")),
    })
}

fn tensor_valuation(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let ext = build_extension(inst)?;
    let prec_k = inst.cfg.precision * ext.e;
    let mut pass = true;
    let trials = 10u64;
    for _ in 0..trials {
        let x = QElem::random(&ext.field, inst.cfg.s, rng, -3 * ext.e, prec_k);
        let formula = tensor_filtration(&ext, &x)?;
        let oracle = tensor_filtration_oracle(&ext, &x, rng, 50)?;
        pass = pass && formula == oracle;
    }
    Ok(SuiteOutcome {
        pass,
        residuals: vec![],
        counters: counters(&[
            ("trials", trials),
            ("ramification", ext.e as u64),
            ("inertia", ext.f as u64),
        ]),
        detail: "closed filtration formula vs the representation supremum".into(),
    })
}

fn theta_morphism(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let ext = build_extension(inst)?;
    let ed = build_extended_datum(&inst.datum, ext)?;
    let xcap = inst.cfg.xcap;
    let mut pass = true;
    let trials = 8u64;
    for _ in 0..trials {
        let f = BoundedSeries::random_poly(&inst.datum, rng, 3, 0, xcap);
        let g = BoundedSeries::random_poly(&inst.datum, rng, 3, 0, xcap);
        let lifted_product = theta_map(&ed, &f.mul(&g)?);
        let product_of_lifts = theta_map(&ed, &f).mul(&theta_map(&ed, &g))?;
        pass = pass && lifted_product.eq_at_truncation(&product_of_lifts);
        if !f.is_zero_at_truncation() {
            pass = pass && !theta_map(&ed, &f).is_zero_at_truncation();
        }
    }
    Ok(SuiteOutcome {
        pass,
        residuals: vec![],
        counters: counters(&[("trials", trials)]),
        detail: "base change is multiplicative and kills nothing visible".into(),
    })
}

fn unit_inversion(inst: &Instance, rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let datum = &inst.datum;
    let xcap = inst.cfg.xcap;
    let prec = inst.cfg.precision;
    let one = BoundedSeries::one(datum.clone(), xcap);
    let mut pass = true;
    let mut residuals = vec![];
    let trials = 3u64;
    for _ in 0..trials {
        // 1 + (coefficients in J): a unit of the bounded ring
        let noise = BoundedSeries::random_poly(datum, rng, 4, 1, xcap);
        let g = one.add(&noise)?;
        let h = g.invert_unit()?;
        let residual = g.mul(&h)?.sub(&one)?.f_q_stored();
        pass = pass && residual >= Val::Finite(prec);
        residuals.push(residual);
    }
    Ok(SuiteOutcome {
        pass,
        residuals,
        counters: counters(&[("trials", trials)]),
        detail: "g·g^{-1} - 1 vanishes at working precision".into(),
    })
}
