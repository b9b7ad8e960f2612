//! TOML instance configuration and element-string parsing.
//!
//! Matrix entries, witnesses and gaps are written in a small monomial
//! grammar: terms separated by `+`/`-`, each term a `*`-product of an
//! integer, `w` / `w^j` (residue-field generator powers) and `pi` /
//! `pi^n`.  Examples: `"1"`, `"-pi"`, `"w*pi^2"`, `"pi + w^2*pi^4"`.

use serde::Deserialize;
use skewpow::{FiltMap, FqElem, FqField, Laurent, QElem, RingCtx, SkewDatum};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

/// An instance- or configuration-level problem; the CLI exits with
/// status 2 on these, as opposed to suite failures (status 1).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub id: String,
    pub p: u64,
    #[serde(default = "one_usize")]
    pub k: usize,
    #[serde(default = "two_usize")]
    pub s: usize,
    #[serde(default = "default_precision")]
    pub precision: i64,
    #[serde(default = "default_xcap")]
    pub xcap: usize,
    #[serde(default)]
    pub seed: u64,
    pub suites: Vec<String>,
    #[serde(default)]
    pub sigma: SigmaSpec,
    #[serde(default)]
    pub t: TSpec,
    pub extension: Option<ExtensionSpec>,
    pub pipeline: Option<PipelineSpec>,
    /// Optional expected certification outcome for the `compat-certify`
    /// suite: "compatible" or "quasi-<m>".
    pub expect_compat: Option<String>,
}

fn one_usize() -> usize {
    1
}
fn two_usize() -> usize {
    2
}
fn default_precision() -> i64 {
    16
}
fn default_xcap() -> usize {
    32
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaSpec {
    /// Coefficientwise power x ↦ x^{p^r}; 0 for none.
    #[serde(default)]
    pub frobenius: u64,
    /// Optional conjugating unit (applied after the Frobenius part).
    pub conjugator: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TSpec {
    /// "minus-one", "one" or "matrix".
    #[serde(default = "default_t_kind")]
    pub kind: String,
    pub entries: Option<Vec<Vec<String>>>,
}

fn default_t_kind() -> String {
    "minus-one".into()
}

impl Default for TSpec {
    fn default() -> TSpec {
        TSpec {
            kind: default_t_kind(),
            entries: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionSpec {
    /// The monomial z = c·π^d whose `root`-th root is adjoined.
    pub z: String,
    pub root: i64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSpec {
    /// Witness unit a with σ_τ^n = conjugation by a.
    pub witness: Vec<Vec<String>>,
    pub n: u64,
    /// Declared central monomial gap, e.g. "w*pi^2"; defaults to π.
    pub gap: Option<String>,
    #[serde(default = "one_u64")]
    pub k0_deg: u64,
    #[serde(default)]
    pub t_exp: u32,
}

fn one_u64() -> u64 {
    1
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// ---------------------------------------------------------------------------
// element strings

/// Parse one element string into a Laurent series at the given precision.
pub fn parse_laurent(
    field: &Arc<FqField>,
    src: &str,
    prec: i64,
) -> Result<Laurent, ConfigError> {
    let compact: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return cfg_err("empty element string");
    }
    // split into signed monomials; '-'/'+' directly after '^' belongs to
    // the exponent
    let mut terms: Vec<(i64, String)> = vec![];
    let mut buf = String::new();
    let mut sign = 1i64;
    for c in compact.chars() {
        if (c == '+' || c == '-') && !buf.ends_with('^') {
            if buf.is_empty() {
                if c == '-' {
                    sign = -sign;
                }
            } else {
                terms.push((sign, std::mem::take(&mut buf)));
                sign = if c == '-' { -1 } else { 1 };
            }
        } else {
            buf.push(c);
        }
    }
    if buf.is_empty() {
        return cfg_err(format!("dangling sign in element string {src:?}"));
    }
    terms.push((sign, buf));

    let mut out = Laurent::zero(field.clone(), prec);
    for (sign, mono) in terms {
        let mut coeff = field.one();
        let mut exp = 0i64;
        for factor in mono.split('*') {
            if factor == "pi" {
                exp += 1;
            } else if let Some(e) = factor.strip_prefix("pi^") {
                let e: i64 = e
                    .parse()
                    .map_err(|_| ConfigError(format!("bad exponent in {factor:?}")))?;
                exp += e;
            } else if factor == "w" {
                coeff = field.mul(&coeff, &field.gen());
            } else if let Some(j) = factor.strip_prefix("w^") {
                let j: u64 = j
                    .parse()
                    .map_err(|_| ConfigError(format!("bad exponent in {factor:?}")))?;
                coeff = field.mul(&coeff, &field.pow(&field.gen(), j as u128));
            } else if let Ok(n) = factor.parse::<u64>() {
                coeff = field.mul(&coeff, &field.from_u64(n));
            } else {
                return cfg_err(format!("unrecognized factor {factor:?} in element string"));
            }
        }
        if sign < 0 {
            coeff = field.neg(&coeff);
        }
        out = out.add(&Laurent::single(field.clone(), exp, coeff, prec));
    }
    Ok(out)
}

/// Parse a string that must be a single monomial c·π^d into (c, d).
pub fn parse_monomial(
    field: &Arc<FqField>,
    src: &str,
    prec: i64,
) -> Result<(FqElem, i64), ConfigError> {
    let z = parse_laurent(field, src, prec)?;
    let terms: Vec<(i64, FqElem)> = z.terms().map(|(n, c)| (*n, c.clone())).collect();
    match terms.as_slice() {
        [(n, c)] => Ok((c.clone(), *n)),
        _ => cfg_err(format!("{src:?} is not a single monomial")),
    }
}

pub fn parse_matrix(
    field: &Arc<FqField>,
    rows: &[Vec<String>],
    s: usize,
    prec: i64,
) -> Result<QElem, ConfigError> {
    if rows.len() != s || rows.iter().any(|r| r.len() != s) {
        return cfg_err(format!("matrix is not {s}x{s}"));
    }
    let mut entries = Vec::with_capacity(s * s);
    for row in rows {
        for cell in row {
            entries.push(parse_laurent(field, cell, prec)?);
        }
    }
    Ok(QElem::from_entries(s, entries))
}

// ---------------------------------------------------------------------------
// instance construction

/// A fully built instance: the coefficient field, ring context and the
/// certified skew datum shared by the suites.
pub struct Instance {
    pub cfg: InstanceConfig,
    pub field: Arc<FqField>,
    pub ctx: RingCtx,
    pub datum: Arc<SkewDatum>,
}

pub fn load_config(path: &Path) -> Result<InstanceConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

impl Instance {
    pub fn build(cfg: InstanceConfig) -> Result<Instance, ConfigError> {
        if !is_prime(cfg.p) {
            return cfg_err("p not prime");
        }
        if cfg.k == 0 || cfg.s == 0 {
            return cfg_err("k and s must be positive");
        }
        if cfg.precision < 4 {
            return cfg_err("precision must be at least 4");
        }
        if cfg.xcap < 2 {
            return cfg_err("x-cap must be at least 2");
        }
        if cfg.suites.is_empty() {
            return cfg_err("no suites selected");
        }
        let field = if cfg.k == 1 {
            FqField::prime(cfg.p)
        } else {
            FqField::with_lex_modulus(cfg.p, cfg.k)
        }
        .map_err(|e| ConfigError(e.to_string()))?;
        let field = Arc::new(field);
        let ctx = RingCtx::new(field.clone(), cfg.s, cfg.precision);

        let mut parts = vec![];
        if cfg.sigma.frobenius > 0 {
            parts.push(FiltMap::FrobeniusPower(cfg.sigma.frobenius));
        }
        if let Some(rows) = &cfg.sigma.conjugator {
            let unit = parse_matrix(&field, rows, cfg.s, cfg.precision)?;
            parts.push(
                FiltMap::inner(unit).map_err(|e| ConfigError(format!("conjugator: {e}")))?,
            );
        }
        let sigma = match parts.len() {
            0 => FiltMap::Identity,
            1 => parts.pop().unwrap(),
            _ => FiltMap::Composite(parts),
        };

        let t = match cfg.t.kind.as_str() {
            "minus-one" => ctx.one().neg(),
            "one" => ctx.one(),
            "matrix" => {
                let rows = cfg
                    .t
                    .entries
                    .as_ref()
                    .ok_or_else(|| ConfigError("t.kind = \"matrix\" needs t.entries".into()))?;
                parse_matrix(&field, rows, cfg.s, cfg.precision)?
            }
            other => return cfg_err(format!("unknown t.kind {other:?}")),
        };

        let datum = SkewDatum::with_defaults(ctx.clone(), sigma, t, 8)
            .map_err(|e| ConfigError(format!("cannot certify the skew datum: {e}")))?;
        Ok(Instance {
            cfg,
            field,
            ctx,
            datum,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4() -> Arc<FqField> {
        Arc::new(FqField::with_lex_modulus(2, 2).unwrap())
    }

    #[test]
    fn parses_signed_sums_and_generator_powers() {
        let field = f4();
        let z = parse_laurent(&field, "pi + w^2*pi^4", 16).unwrap();
        assert_eq!(z.coeff(1), field.one());
        assert_eq!(z.coeff(4), field.pow(&field.gen(), 2));
        let neg = parse_laurent(&field, "-pi^-2 + 1", 8).unwrap();
        assert_eq!(neg.coeff(-2), field.neg(&field.one()));
        assert_eq!(neg.coeff(0), field.one());
    }

    #[test]
    fn rejects_garbage_and_non_monomials() {
        let field = f4();
        assert!(parse_laurent(&field, "rho^2", 16).is_err());
        assert!(parse_monomial(&field, "1 + pi", 16).is_err());
        assert_eq!(parse_monomial(&field, "w*pi^2", 16).unwrap().1, 2);
    }

    #[test]
    fn nonprime_p_is_rejected_with_the_documented_message() {
        let cfg: InstanceConfig = toml::from_str(
            "id = \"bad\"\np = 4\nsuites = [\"relations\"]\n",
        )
        .unwrap();
        match Instance::build(cfg) {
            Err(err) => assert_eq!(err.0, "p not prime"),
            Ok(_) => panic!("p = 4 must be rejected"),
        }
    }
}
