//! Finite-dimensional crossed products R = ⊕_{i<p^m} A·gⁱ over 𝔽_p,
//! with exact linear-algebra ideal machinery: two-sided closure,
//! minimal-support elements, central minimal elements with p-nilpotence,
//! the nilradical, primality by exhaustion, and the contraction/extension
//! pair between R and its g^p-subring.
//!
//! Everything is coordinatized over the prime field: an algebra of
//! dimension n is a structure-constant table, elements are coordinate
//! vectors, and an element of the crossed product is a block vector
//! (block i = the coefficient of gⁱ).

use crate::error::{Error, Result};
use crate::fq::{FqElem, FqField};
use std::sync::Arc;

/// Exhaustive-enumeration caps.
const ELEMENT_CAP: u128 = 1 << 16;
const LATTICE_CAP: u128 = 1 << 12;

pub type Vector = Vec<FqElem>;

// ----- prime-field linear algebra -------------------------------------

/// Row-reduce in place; returns the nonzero rows in reduced echelon form.
pub fn rref(field: &FqField, mut rows: Vec<Vector>) -> Vec<Vector> {
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows.len() {
            break;
        }
        if let Some(pr) = (rank..rows.len()).find(|&r| !field.is_zero(&rows[r][c])) {
            rows.swap(rank, pr);
            let inv = field.inv(&rows[rank][c]).expect("pivot invertible");
            for x in rows[rank].iter_mut() {
                *x = field.mul(x, &inv);
            }
            for r in 0..rows.len() {
                if r != rank && !field.is_zero(&rows[r][c]) {
                    let f = rows[r][c].clone();
                    for j in 0..cols {
                        let t = field.mul(&f, &rows[rank][j]);
                        rows[r][j] = field.sub(&rows[r][j], &t);
                    }
                }
            }
            rank += 1;
        }
    }
    rows.truncate(rank);
    rows
}

/// Reduce v against an rref basis; returns the residual.
fn reduce(field: &FqField, basis: &[Vector], v: &Vector) -> Vector {
    let mut v = v.clone();
    for row in basis {
        let c = row
            .iter()
            .position(|x| !field.is_zero(x))
            .expect("rref rows nonzero");
        if !field.is_zero(&v[c]) {
            let f = v[c].clone();
            for j in 0..v.len() {
                let t = field.mul(&f, &row[j]);
                v[j] = field.sub(&v[j], &t);
            }
        }
    }
    v
}

fn in_span(field: &FqField, basis: &[Vector], v: &Vector) -> bool {
    reduce(field, basis, v).iter().all(|x| field.is_zero(x))
}

fn is_zero_vec(field: &FqField, v: &Vector) -> bool {
    v.iter().all(|x| field.is_zero(x))
}

/// Kernel basis of the linear map given by `rows` (each row is one linear
/// functional on an `ncols`-dimensional space).
pub fn kernel(field: &FqField, rows: &[Vector], ncols: usize) -> Vec<Vector> {
    let r = rref(field, rows.to_vec());
    let pivots: Vec<usize> = r
        .iter()
        .map(|row| row.iter().position(|x| !field.is_zero(x)).unwrap())
        .collect();
    let mut out = vec![];
    for c in 0..ncols {
        if pivots.contains(&c) {
            continue;
        }
        let mut v = vec![field.zero(); ncols];
        v[c] = field.one();
        for (row, &pc) in r.iter().zip(&pivots) {
            v[pc] = field.neg(&row[c]);
        }
        out.push(v);
    }
    out
}

// ----- the base algebra ------------------------------------------------

/// A finite-dimensional associative unital algebra over 𝔽_p with a ring
/// automorphism, both given by explicit tables.
#[derive(Clone, Debug)]
pub struct FdAlgebra {
    pub field: Arc<FqField>, // the prime field 𝔽_p (k = 1)
    pub dim: usize,
    /// e_i·e_j = Σ_k structure[i][j][k]·e_k
    pub structure: Vec<Vec<Vector>>,
    pub unit: Vector,
    /// σ(e_i) = sigma[i] (a coordinate vector)
    pub sigma: Vec<Vector>,
}

impl FdAlgebra {
    pub fn zero(&self) -> Vector {
        vec![self.field.zero(); self.dim]
    }

    pub fn one(&self) -> Vector {
        self.unit.clone()
    }

    pub fn basis_vec(&self, i: usize) -> Vector {
        let mut v = self.zero();
        v[i] = self.field.one();
        v
    }

    pub fn add(&self, a: &Vector, b: &Vector) -> Vector {
        a.iter().zip(b).map(|(x, y)| self.field.add(x, y)).collect()
    }

    pub fn sub(&self, a: &Vector, b: &Vector) -> Vector {
        a.iter().zip(b).map(|(x, y)| self.field.sub(x, y)).collect()
    }

    pub fn mul(&self, a: &Vector, b: &Vector) -> Vector {
        let mut out = self.zero();
        for (i, ai) in a.iter().enumerate() {
            if self.field.is_zero(ai) {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if self.field.is_zero(bj) {
                    continue;
                }
                let c = self.field.mul(ai, bj);
                for (k, s) in self.structure[i][j].iter().enumerate() {
                    if !self.field.is_zero(s) {
                        let t = self.field.mul(&c, s);
                        out[k] = self.field.add(&out[k], &t);
                    }
                }
            }
        }
        out
    }

    pub fn apply_sigma(&self, a: &Vector) -> Vector {
        let mut out = self.zero();
        for (i, ai) in a.iter().enumerate() {
            if self.field.is_zero(ai) {
                continue;
            }
            for (k, s) in self.sigma[i].iter().enumerate() {
                let t = self.field.mul(ai, s);
                out[k] = self.field.add(&out[k], &t);
            }
        }
        out
    }

    pub fn apply_sigma_pow(&self, a: &Vector, e: usize) -> Vector {
        let mut x = a.clone();
        for _ in 0..e {
            x = self.apply_sigma(&x);
        }
        x
    }

    /// Multiplicative inverse by solving a·x = 1 and x·a = 1; None for
    /// non-units.
    pub fn inverse(&self, a: &Vector) -> Option<Vector> {
        // right inverse: columns are a·e_j
        let mut rows = vec![vec![self.field.zero(); self.dim + 1]; self.dim];
        for j in 0..self.dim {
            let col = self.mul(a, &self.basis_vec(j));
            for (i, x) in col.iter().enumerate() {
                rows[i][j] = x.clone();
            }
        }
        for (i, u) in self.unit.iter().enumerate() {
            rows[i][self.dim] = u.clone();
        }
        let r = rref(&self.field, rows);
        // read the solution: each pivot row gives x[pivot] = rhs
        let mut x = vec![self.field.zero(); self.dim];
        for row in &r {
            let c = row.iter().position(|v| !self.field.is_zero(v))?;
            if c == self.dim {
                return None; // inconsistent
            }
            // row must be a unit vector in the first dim columns for a
            // unique solution; a free solution still yields an inverse
            x[c] = row[self.dim].clone();
        }
        let xr = self.mul(a, &x);
        let xl = self.mul(&x, a);
        if xr == self.unit && xl == self.unit {
            Some(x)
        } else {
            None
        }
    }

    /// Validate associativity on basis triples, the unit, and that σ is a
    /// ring automorphism fixing 1.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.dim {
            let e = self.basis_vec(i);
            if self.mul(&self.unit, &e) != e || self.mul(&e, &self.unit) != e {
                return Err(Error::Invalid("unit fails on a basis element".into()));
            }
            for j in 0..self.dim {
                let ej = self.basis_vec(j);
                let sij = self.apply_sigma(&self.mul(&e, &ej));
                let ssij = self.mul(&self.apply_sigma(&e), &self.apply_sigma(&ej));
                if sij != ssij {
                    return Err(Error::NotAnAutomorphism);
                }
                for k in 0..self.dim {
                    let ek = self.basis_vec(k);
                    let lhs = self.mul(&self.mul(&e, &ej), &ek);
                    let rhs = self.mul(&e, &self.mul(&ej, &ek));
                    if lhs != rhs {
                        return Err(Error::Invalid(format!(
                            "associativity fails on basis triple ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        if self.apply_sigma(&self.unit) != self.unit {
            return Err(Error::NotAnAutomorphism);
        }
        if rref(&self.field, self.sigma.clone()).len() != self.dim {
            return Err(Error::NotAnAutomorphism);
        }
        Ok(())
    }

    /// The field 𝔽_{p^k} viewed as an algebra over 𝔽_p, with σ = Frob^r.
    pub fn from_finite_field(ext: &FqField, frob_power: u64) -> Result<FdAlgebra> {
        let field = Arc::new(FqField::prime(ext.p)?);
        let dim = ext.k;
        let elem_to_vec = |x: &FqElem| -> Vector {
            let mut v = vec![field.zero(); dim];
            for (i, c) in x.iter().enumerate() {
                v[i] = field.from_u64(*c);
            }
            v
        };
        let mut structure = vec![vec![vec![]; dim]; dim];
        let mut wi = ext.one();
        for i in 0..dim {
            let mut wj = ext.one();
            for j in 0..dim {
                structure[i][j] = elem_to_vec(&ext.mul(&wi, &wj));
                wj = ext.mul(&wj, &ext.gen());
            }
            wi = ext.mul(&wi, &ext.gen());
        }
        let mut sigma = vec![];
        let mut w = ext.one();
        for _ in 0..dim {
            sigma.push(elem_to_vec(&ext.frob_iter(&w, frob_power)));
            w = ext.mul(&w, &ext.gen());
        }
        let unit = {
            let mut v = vec![field.zero(); dim];
            v[0] = field.one();
            v
        };
        let a = FdAlgebra {
            field,
            dim,
            structure,
            unit,
            sigma,
        };
        a.validate()?;
        Ok(a)
    }

    /// M_s(𝔽_p) with σ = id.
    pub fn matrix_algebra(p: u64, s: usize) -> Result<FdAlgebra> {
        let field = Arc::new(FqField::prime(p)?);
        let dim = s * s;
        let idx = |i: usize, j: usize| i * s + j;
        let mut structure = vec![vec![vec![field.zero(); dim]; dim]; dim];
        for i in 0..s {
            for j in 0..s {
                for k in 0..s {
                    for l in 0..s {
                        if j == k {
                            structure[idx(i, j)][idx(k, l)][idx(i, l)] = field.one();
                        }
                    }
                }
            }
        }
        let mut unit = vec![field.zero(); dim];
        for i in 0..s {
            unit[idx(i, i)] = field.one();
        }
        let sigma = (0..dim)
            .map(|i| {
                let mut v = vec![field.zero(); dim];
                v[i] = field.one();
                v
            })
            .collect();
        let a = FdAlgebra {
            field,
            dim,
            structure,
            unit,
            sigma,
        };
        a.validate()?;
        Ok(a)
    }
}

// ----- the crossed product ---------------------------------------------

/// R = ⊕_{i<n} A·gⁱ with n = p^m, g·a = σ(a)·g and g^n = gpow ∈ A.
#[derive(Clone, Debug)]
pub struct FdCrossed {
    pub base: FdAlgebra,
    pub m: u32,
    /// n = p^m group order.
    pub n: usize,
    pub gpow: Vector,
    /// gpow^{-1} (gpow must be a unit for g to be invertible).
    pub gpow_inv: Vector,
    /// Total 𝔽_p-dimension = base.dim · n.
    pub dim: usize,
}

impl FdCrossed {
    pub fn new(base: FdAlgebra, m: u32, gpow: Vector) -> Result<FdCrossed> {
        base.validate()?;
        let p = base.field.p;
        let n = (p as u128).pow(m);
        if n > 64 {
            return Err(Error::TooLarge("group order above 64".into()));
        }
        let n = n as usize;
        if base.apply_sigma(&gpow) != gpow {
            return Err(Error::HypothesisFail(
                "g^{p^m} must be sigma-fixed for associativity".into(),
            ));
        }
        let gpow_inv = base
            .inverse(&gpow)
            .ok_or_else(|| Error::NotAUnit("g^{p^m} must be a unit of A".into()))?;
        // σ^n = conjugation by gpow, on the basis
        for i in 0..base.dim {
            let e = base.basis_vec(i);
            let lhs = base.apply_sigma_pow(&e, n);
            let rhs = base.mul(&base.mul(&gpow, &e), &gpow_inv);
            if lhs != rhs {
                return Err(Error::HypothesisFail(
                    "sigma^{p^m} must be conjugation by g^{p^m}".into(),
                ));
            }
        }
        let dim = base.dim * n;
        Ok(FdCrossed {
            base,
            m,
            n,
            gpow,
            gpow_inv,
            dim,
        })
    }

    pub fn field(&self) -> &Arc<FqField> {
        &self.base.field
    }

    pub fn zero(&self) -> Vector {
        vec![self.base.field.zero(); self.dim]
    }

    pub fn one(&self) -> Vector {
        let mut v = self.zero();
        v[..self.base.dim].clone_from_slice(&self.base.unit);
        v
    }

    /// The element a·gⁱ.
    pub fn embed(&self, a: &Vector, i: usize) -> Vector {
        let mut v = self.zero();
        let d = self.base.dim;
        v[i * d..(i + 1) * d].clone_from_slice(a);
        v
    }

    pub fn g(&self) -> Vector {
        if self.n == 1 {
            self.embed(&self.gpow, 0)
        } else {
            self.embed(&self.base.unit, 1)
        }
    }

    pub fn block(&self, v: &Vector, i: usize) -> Vector {
        let d = self.base.dim;
        v[i * d..(i + 1) * d].to_vec()
    }

    pub fn add(&self, a: &Vector, b: &Vector) -> Vector {
        a.iter()
            .zip(b)
            .map(|(x, y)| self.base.field.add(x, y))
            .collect()
    }

    pub fn sub(&self, a: &Vector, b: &Vector) -> Vector {
        a.iter()
            .zip(b)
            .map(|(x, y)| self.base.field.sub(x, y))
            .collect()
    }

    pub fn mul(&self, a: &Vector, b: &Vector) -> Vector {
        let d = self.base.dim;
        let mut out = self.zero();
        for i in 0..self.n {
            let ai = self.block(a, i);
            if is_zero_vec(&self.base.field, &ai) {
                continue;
            }
            for j in 0..self.n {
                let bj = self.block(b, j);
                if is_zero_vec(&self.base.field, &bj) {
                    continue;
                }
                let mut c = self.base.mul(&ai, &self.base.apply_sigma_pow(&bj, i));
                let mut k = i + j;
                if k >= self.n {
                    k -= self.n;
                    c = self.base.mul(&c, &self.gpow);
                }
                for (t, x) in c.iter().enumerate() {
                    out[k * d + t] = self.base.field.add(&out[k * d + t], x);
                }
            }
        }
        out
    }

    pub fn pow(&self, a: &Vector, e: usize) -> Vector {
        let mut out = self.one();
        for _ in 0..e {
            out = self.mul(&out, a);
        }
        out
    }

    /// g·a·g^{-1}: blockwise σ.
    pub fn conj_by_g(&self, a: &Vector) -> Vector {
        let mut out = self.zero();
        let d = self.base.dim;
        for i in 0..self.n {
            let s = self.base.apply_sigma(&self.block(a, i));
            out[i * d..(i + 1) * d].clone_from_slice(&s);
        }
        out
    }

    /// Support: the set of g-indices with nonzero coefficient.
    pub fn support(&self, a: &Vector) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| !is_zero_vec(&self.base.field, &self.block(a, i)))
            .collect()
    }

    pub fn size(&self) -> u128 {
        (self.base.field.p as u128).saturating_pow(self.dim as u32)
    }

    /// All elements, in odometer order (deterministic).
    pub fn elements(&self) -> impl Iterator<Item = Vector> + '_ {
        let p = self.base.field.p;
        let dim = self.dim;
        let total = (p as u128).pow(dim as u32);
        (0..total).map(move |mut idx| {
            let mut v = Vec::with_capacity(dim);
            for _ in 0..dim {
                v.push(self.base.field.from_u64((idx % p as u128) as u64));
                idx /= p as u128;
            }
            v
        })
    }

    pub fn is_central(&self, a: &Vector) -> bool {
        if self.n > 1 {
            let g = self.g();
            if self.mul(&g, a) != self.mul(a, &g) {
                return false;
            }
        }
        for i in 0..self.base.dim {
            let q = self.embed(&self.base.basis_vec(i), 0);
            if self.mul(&q, a) != self.mul(a, &q) {
                return false;
            }
        }
        true
    }

    /// Named presets for configs: the untwisted group algebra 𝔽_p[ℤ/p^m].
    pub fn group_algebra(p: u64, m: u32) -> Result<FdCrossed> {
        let field = Arc::new(FqField::prime(p)?);
        let base = FdAlgebra {
            field: field.clone(),
            dim: 1,
            structure: vec![vec![vec![field.one()]]],
            unit: vec![field.one()],
            sigma: vec![vec![field.one()]],
        };
        let gpow = vec![field.one()];
        FdCrossed::new(base, m, gpow)
    }
}

// ----- ideals ----------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct FdIdeal {
    /// Reduced-echelon basis of the underlying 𝔽_p-subspace.
    pub basis: Vec<Vector>,
}

impl FdIdeal {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn contains(&self, field: &FqField, v: &Vector) -> bool {
        in_span(field, &self.basis, v)
    }
}

/// Smallest two-sided ideal containing the generators.
pub fn ideal_closure(r: &FdCrossed, gens: &[Vector]) -> FdIdeal {
    let field = r.field().clone();
    let mut basis = rref(&field, gens.to_vec());
    loop {
        let mut new = vec![];
        for v in &basis {
            for k in 0..r.dim {
                let b = r.base.basis_vec(k % r.base.dim);
                let e = r.embed(&b, k / r.base.dim);
                for prod in [r.mul(&e, v), r.mul(v, &e)] {
                    if !in_span(&field, &basis, &prod) {
                        new.push(prod);
                    }
                }
            }
        }
        if new.is_empty() {
            return FdIdeal { basis };
        }
        let mut all = basis;
        all.extend(new);
        basis = rref(&field, all);
    }
}

/// Masks over g-indices in breadth-first-by-size, lexicographic order.
fn support_masks(n: usize) -> Vec<u64> {
    let mut masks: Vec<u64> = (1..(1u64 << n)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

/// Nonzero elements of the subspace spanned by `basis` whose support is
/// contained in the block mask; returns an rref basis of that subspace.
fn restrict_to_mask(r: &FdCrossed, basis: &[Vector], mask: u64) -> Vec<Vector> {
    let field = r.field();
    // constraint matrix: rows indexed by coordinates in blocks outside the
    // mask (which must vanish), columns by basis coefficients
    let d = r.base.dim;
    let mut rows = vec![];
    let outside: Vec<usize> = (0..r.dim)
        .filter(|c| mask & (1 << (c / d)) == 0)
        .collect();
    for &c in &outside {
        rows.push(basis.iter().map(|b| b[c].clone()).collect::<Vector>());
    }
    let ker = if rows.is_empty() {
        // no constraints: everything qualifies
        (0..basis.len())
            .map(|i| {
                let mut v = vec![field.zero(); basis.len()];
                v[i] = field.one();
                v
            })
            .collect()
    } else {
        kernel(field, &rows, basis.len())
    };
    let lifted: Vec<Vector> = ker
        .iter()
        .map(|coeffs| {
            let mut v = r.zero();
            for (c, b) in coeffs.iter().zip(basis) {
                if field.is_zero(c) {
                    continue;
                }
                for (j, x) in b.iter().enumerate() {
                    let t = field.mul(c, x);
                    v[j] = field.add(&v[j], &t);
                }
            }
            v
        })
        .collect();
    rref(field, lifted)
}

/// A nonzero element of minimal support, breadth-first by support size
/// with lexicographic tie-break.
pub fn minimal_support_element(r: &FdCrossed, ideal: &FdIdeal) -> Result<Vector> {
    if ideal.is_zero() {
        return Err(Error::ZeroIdeal);
    }
    for mask in support_masks(r.n) {
        let sub = restrict_to_mask(r, &ideal.basis, mask);
        if let Some(v) = sub.first() {
            return Ok(v.clone());
        }
    }
    Err(Error::ZeroIdeal)
}

/// The minimal support size over the nonzero elements of the ideal.
pub fn minimal_support_size(r: &FdCrossed, ideal: &FdIdeal) -> Result<usize> {
    let v = minimal_support_element(r, ideal)?;
    Ok(r.support(&v).len())
}

/// Intersect an ideal with the σ-fixed subspace and the centre of A,
/// returning a nonzero witness if one exists.  `ideal_basis` spans an
/// ideal of the base algebra A (coordinates of length base.dim).
pub fn p1_witness(a: &FdAlgebra, ideal_basis: &[Vector]) -> Option<Vector> {
    let field = &a.field;
    let basis = rref(field, ideal_basis.to_vec());
    if basis.is_empty() {
        return None;
    }
    // constraints on coefficients c: σ(v) − v = 0 and e_i v − v e_i = 0
    let mut rows: Vec<Vector> = vec![];
    let images: Vec<Vec<Vector>> = basis
        .iter()
        .map(|b| {
            let mut imgs = vec![a.sub(&a.apply_sigma(b), b)];
            for i in 0..a.dim {
                let e = a.basis_vec(i);
                imgs.push(a.sub(&a.mul(&e, b), &a.mul(b, &e)));
            }
            imgs
        })
        .collect();
    let nconds = images[0].len();
    for cond in 0..nconds {
        for coord in 0..a.dim {
            rows.push(images.iter().map(|im| im[cond][coord].clone()).collect());
        }
    }
    let ker = kernel(field, &rows, basis.len());
    ker.first().map(|coeffs| {
        let mut v = a.zero();
        for (c, b) in coeffs.iter().zip(&basis) {
            for (j, x) in b.iter().enumerate() {
                let t = field.mul(c, x);
                v[j] = field.add(&v[j], &t);
            }
        }
        v
    })
}

/// σ-invariant ideals of the base algebra A (exhaustive, for the (P1)
/// property check).
fn sigma_invariant_base_ideals(a: &FdAlgebra) -> Result<Vec<Vec<Vector>>> {
    if (a.field.p as u128).pow(a.dim as u32) > LATTICE_CAP {
        return Err(Error::TooLarge("base algebra too large for (P1) check".into()));
    }
    // treat A as a crossed product with trivial group to reuse closure;
    // ideals do not depend on σ, so the wrapper carries σ = id
    let r = trivial_crossed(a)?;
    let lattice = enumerate_ideals(&r)?;
    Ok(lattice
        .into_iter()
        .filter(|i| {
            i.basis
                .iter()
                .all(|b| in_span(&a.field, &i.basis, &a.apply_sigma(b)))
        })
        .map(|i| i.basis)
        .collect())
}

/// Does (A, σ) satisfy (P1): every nonzero σ-invariant ideal contains a
/// nonzero σ-invariant central element?
pub fn p1_holds(a: &FdAlgebra) -> Result<bool> {
    for ideal in sigma_invariant_base_ideals(a)? {
        if ideal.is_empty() {
            continue;
        }
        if p1_witness(a, &ideal).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of the central-minimal-element search.
#[derive(Clone, Debug)]
pub enum CentralMinimalOutcome {
    Found(Vector),
    /// No qualifying element; the trace reports how many candidates each
    /// condition eliminated, flagging a hypothesis violation.
    Refuted(String),
}

/// Search for a central element of the ideal, minimal for it, with
/// a₀ ≠ 0, a^p = 0, supported on multiples of p^{m−1}.
pub fn central_minimal_with_p_nilpotence(
    r: &FdCrossed,
    ideal: &FdIdeal,
) -> Result<CentralMinimalOutcome> {
    if ideal.is_zero() {
        return Err(Error::ZeroIdeal);
    }
    let field = r.field().clone();
    // I ∩ A = 0
    let base_mask = 1u64;
    if !restrict_to_mask(r, &ideal.basis, base_mask).is_empty() {
        return Err(Error::HypothesisFail("ideal meets the base algebra".into()));
    }
    if !p1_holds(&r.base)? {
        return Err(Error::HypothesisFail("(P1) fails for (A, sigma)".into()));
    }
    let count = (field.p as u128).pow(ideal.rank() as u32);
    if count > LATTICE_CAP {
        return Err(Error::TooLarge("ideal too large to enumerate".into()));
    }
    let min_supp = minimal_support_size(r, ideal)?;
    let p = field.p as usize;
    let pm1 = r.n / p; // p^{m−1}
    let (mut n_minimal, mut n_central, mut n_a0, mut n_pnil) = (0u64, 0u64, 0u64, 0u64);
    // enumerate elements of the ideal in deterministic coefficient order
    let mut best: Option<Vector> = None;
    let mut idx = 1u128;
    while idx < count {
        let mut v = r.zero();
        let mut rem = idx;
        for b in &ideal.basis {
            let c = field.from_u64((rem % field.p as u128) as u64);
            rem /= field.p as u128;
            if field.is_zero(&c) {
                continue;
            }
            for (j, x) in b.iter().enumerate() {
                let t = field.mul(&c, x);
                v[j] = field.add(&v[j], &t);
            }
        }
        idx += 1;
        let supp = r.support(&v);
        if supp.len() != min_supp {
            continue;
        }
        n_minimal += 1;
        if !r.is_central(&v) {
            continue;
        }
        n_central += 1;
        if is_zero_vec(&field, &r.block(&v, 0)) {
            continue;
        }
        n_a0 += 1;
        if !is_zero_vec(&field, &r.pow(&v, p)) {
            continue;
        }
        n_pnil += 1;
        if supp.iter().all(|i| pm1 == 0 || i % pm1 == 0) {
            best = Some(v);
            break;
        }
    }
    match best {
        Some(v) => Ok(CentralMinimalOutcome::Found(v)),
        None => Ok(CentralMinimalOutcome::Refuted(format!(
            "no qualifying element: {n_minimal} minimal, {n_central} central, \
             {n_a0} with a_0 != 0, {n_pnil} p-nilpotent, 0 on the small subgroup"
        ))),
    }
}

/// Is the subspace J (an ideal basis) nilpotent as an ideal: Jᵏ = 0 for
/// some k ≤ dim?
fn is_nilpotent_ideal(r: &FdCrossed, basis: &[Vector]) -> bool {
    let field = r.field();
    let mut power = basis.to_vec();
    for _ in 0..=r.dim {
        if power.is_empty() {
            return true;
        }
        let mut next = vec![];
        for u in &power {
            for v in basis {
                next.push(r.mul(u, v));
            }
        }
        next = rref(field, next);
        if next.len() == power.len()
            && next.iter().all(|v| in_span(field, &power, v))
        {
            // stabilized at a nonzero subspace
            return false;
        }
        power = next;
    }
    power.is_empty()
}

/// A as a trivial crossed product (group order 1, σ reset to id).
fn trivial_crossed(a: &FdAlgebra) -> Result<FdCrossed> {
    let mut base = a.clone();
    base.sigma = (0..a.dim).map(|i| a.basis_vec(i)).collect();
    FdCrossed::new(base, 0, a.one())
}

/// Whether the base algebra A is prime (exhaustive xAy test).
pub fn base_is_prime(a: &FdAlgebra) -> Result<bool> {
    is_prime_fd(&trivial_crossed(a)?)
}

/// Largest nilpotent two-sided ideal of R (base A must be prime).
pub fn nilradical_fd(r: &FdCrossed) -> Result<FdIdeal> {
    if !base_is_prime(&r.base)? {
        return Err(Error::BaseNotPrime);
    }
    if r.size() > ELEMENT_CAP {
        return Err(Error::TooLarge("ring too large to enumerate".into()));
    }
    let field = r.field().clone();
    let mut basis: Vec<Vector> = vec![];
    for x in r.elements() {
        if is_zero_vec(&field, &x) || in_span(&field, &basis, &x) {
            continue;
        }
        let mut gens = basis.clone();
        gens.push(x);
        let candidate = ideal_closure(r, &gens);
        if is_nilpotent_ideal(r, &candidate.basis) {
            basis = candidate.basis;
        }
    }
    let nil = FdIdeal { basis };
    // structural guarantee: P ∩ A = 0 when A is prime
    if !restrict_to_mask(r, &nil.basis, 1).is_empty() && r.n > 1 {
        return Err(Error::HypothesisFail(
            "nilradical meets the prime base algebra".into(),
        ));
    }
    Ok(nil)
}

/// Exhaustive primality: for all nonzero x, there is no nonzero y with
/// x·R·y = 0.
pub fn is_prime_fd(r: &FdCrossed) -> Result<bool> {
    if r.size() > ELEMENT_CAP {
        return Err(Error::TooLarge("ring above the exhaustive cap".into()));
    }
    let field = r.field().clone();
    for x in r.elements() {
        if is_zero_vec(&field, &x) {
            continue;
        }
        // rows of the stacked linear maps y ↦ (x·e_k)·y
        let mut rows = vec![];
        for k in 0..r.dim {
            let e = r.embed(&r.base.basis_vec(k % r.base.dim), k / r.base.dim);
            let xe = r.mul(&x, &e);
            // columns indexed by basis of R
            let cols: Vec<Vector> = (0..r.dim)
                .map(|j| {
                    let ej = r.embed(&r.base.basis_vec(j % r.base.dim), j / r.base.dim);
                    r.mul(&xe, &ej)
                })
                .collect();
            for coord in 0..r.dim {
                rows.push(cols.iter().map(|c| c[coord].clone()).collect());
            }
        }
        if !kernel(&field, &rows, r.dim).is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All two-sided ideals: principal closures saturated under sums.
pub fn enumerate_ideals(r: &FdCrossed) -> Result<Vec<FdIdeal>> {
    if r.size() > LATTICE_CAP {
        return Err(Error::TooLarge("ring above the lattice cap".into()));
    }
    let field = r.field().clone();
    let mut lattice: Vec<Vec<Vector>> = vec![vec![]];
    for x in r.elements() {
        if is_zero_vec(&field, &x) {
            continue;
        }
        let i = ideal_closure(r, &[x]);
        if !lattice.contains(&i.basis) {
            lattice.push(i.basis);
        }
    }
    // saturate under sums (sum of ideals is an ideal)
    loop {
        let mut added = false;
        let snapshot = lattice.clone();
        for a in &snapshot {
            for b in &snapshot {
                let mut all = a.clone();
                all.extend(b.iter().cloned());
                let s = rref(&field, all);
                if !lattice.contains(&s) {
                    lattice.push(s);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    lattice.sort_by_key(|b| (b.len(), format!("{b:?}")));
    Ok(lattice.into_iter().map(|basis| FdIdeal { basis }).collect())
}

// ----- contraction / extension between R and the g^p-subring ------------

/// The subring S = ⊕_{i<p^{m−1}} A·(g^p)ⁱ as a crossed product in its own
/// right.
pub fn subring_crossed(r: &FdCrossed) -> Result<FdCrossed> {
    if r.m == 0 {
        return Err(Error::Invalid("no proper g^p-subring at m = 0".into()));
    }
    let p = r.field().p as usize;
    let mut sub_base = r.base.clone();
    // σ_S = σ^p
    sub_base.sigma = (0..r.base.dim)
        .map(|i| r.base.apply_sigma_pow(&r.base.basis_vec(i), p))
        .collect();
    FdCrossed::new(sub_base, r.m - 1, r.gpow.clone())
}

/// Coordinates of an S-element inside R (block j of S ↦ block j·p of R).
pub fn embed_sub_element(r: &FdCrossed, s: &FdCrossed, v: &Vector) -> Vector {
    let p = r.field().p as usize;
    let mut out = r.zero();
    for j in 0..s.n {
        let b = s.block(v, j);
        let d = r.base.dim;
        out[j * p * d..(j * p + 1) * d].clone_from_slice(&b);
    }
    out
}

/// Contraction Φ(I) = I ∩ S, as an ideal of S.
pub fn phi_contract(r: &FdCrossed, s: &FdCrossed, ideal: &FdIdeal) -> FdIdeal {
    let p = r.field().p as usize;
    let mut mask = 0u64;
    for i in (0..r.n).step_by(p) {
        mask |= 1 << i;
    }
    let inter = restrict_to_mask(r, &ideal.basis, mask);
    // re-coordinatize into S
    let d = r.base.dim;
    let basis: Vec<Vector> = inter
        .iter()
        .map(|v| {
            let mut out = s.zero();
            for j in 0..s.n {
                out[j * d..(j + 1) * d].clone_from_slice(&r.block(v, j * p));
            }
            out
        })
        .collect();
    FdIdeal {
        basis: rref(r.field(), basis),
    }
}

/// Extension Ψ(J) = J·R (two-sided closure of the embedded generators).
pub fn psi_extend(r: &FdCrossed, s: &FdCrossed, ideal: &FdIdeal) -> FdIdeal {
    let gens: Vec<Vector> = ideal
        .basis
        .iter()
        .map(|v| embed_sub_element(r, s, v))
        .collect();
    ideal_closure(r, &gens)
}

/// Product of two ideals (span of pairwise products, closed).
pub fn ideal_product(r: &FdCrossed, a: &FdIdeal, b: &FdIdeal) -> FdIdeal {
    let mut gens = vec![];
    for u in &a.basis {
        for v in &b.basis {
            gens.push(r.mul(u, v));
        }
    }
    ideal_closure(r, &gens)
}

/// Change-of-basis utility for twisted presentations: do the powers
/// ℓ⁰, …, ℓ^{n−1} of the given element, together with the base algebra,
/// span R (so that R = ⊕ A·ℓⁱ)?
pub fn powers_span(r: &FdCrossed, ell: &Vector) -> bool {
    let field = r.field();
    let mut rows = vec![];
    let mut li = r.one();
    for _ in 0..r.n {
        for k in 0..r.base.dim {
            let a = r.embed(&r.base.basis_vec(k), 0);
            rows.push(r.mul(&a, &li));
        }
        li = r.mul(&li, ell);
    }
    rref(field, rows).len() == r.dim
}
