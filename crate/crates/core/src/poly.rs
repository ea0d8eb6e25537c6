//! Sparse multivariate polynomials over `f64`.
//!
//! A polynomial in `n` variables is a canonical map from exponent vectors
//! (multi-indices) to nonzero coefficients. Terms are kept in a `BTreeMap`
//! under the graded ordering (total degree first, then `x1 > x2 > …`), so
//! iteration order is deterministic and matches the monomial basis listing
//! `1, x1, …, xn, x1^2, x1x2, …`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Largest number of monomials a generated basis may contain.
pub const MAX_BASIS_LEN: usize = 200_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected} variables, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("basis capacity exceeded: {requested} monomials (limit {limit})")]
    Capacity { requested: u128, limit: usize },
}

/// Exponent vector of a monomial, e.g. `[1, 2]` for `x1·x2²`.
///
/// Ordered by total degree first, then lexicographically with `x1` heaviest,
/// so `1 < x1 < x2 < x1² < x1x2 < x2²`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// Unit exponent vector for variable `i`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] += 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Componentwise sum (the exponent vector of the product monomial).
    pub fn sum(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Value of the monomial at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&e, &v)| v.powi(e as i32))
            .product()
    }

    /// Exponents extended with extra trailing zero entries.
    pub fn extended(&self, extra: usize) -> Self {
        let mut e = self.0.clone();
        e.extend(std::iter::repeat_n(0, extra));
        MultiIndex(e)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            // Within a degree, larger exponents on earlier variables sort
            // first: x1² < x1x2 < x2².
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

/// One term of the JSON encoding: coefficient plus exponent vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub c: f64,
    pub p: Vec<u32>,
}

/// Sparse multivariate polynomial in a fixed number of variables.
///
/// Canonical form: no stored coefficient is zero, and equal polynomials have
/// identical term maps. The zero polynomial has an empty map and degree 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(MultiIndex::zero(dim), c);
        p
    }

    /// Variable `xi` as a polynomial (`i` is zero-based).
    pub fn var(dim: usize, i: usize) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(MultiIndex::unit(dim, i), 1.0);
        p
    }

    /// Build from `(exponents, coefficient)` pairs; duplicate exponent
    /// vectors are summed, zero results dropped.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Self::zero(dim);
        for (exps, c) in terms {
            if exps.len() != dim {
                return Err(PolyError::DimensionMismatch {
                    expected: dim,
                    got: exps.len(),
                });
            }
            p.add_term(MultiIndex::new(exps), c);
        }
        Ok(p)
    }

    /// Build from JSON term records (`{"c": …, "p": […]}`).
    pub fn from_records(dim: usize, records: &[TermRecord]) -> Result<Self, PolyError> {
        Self::from_terms(dim, records.iter().map(|t| (t.p.clone(), t.c)))
    }

    /// Canonical term records, in graded order.
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(m, &c)| TermRecord {
                c,
                p: m.exponents().to_vec(),
            })
            .collect()
    }

    fn add_term(&mut self, m: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    /// Coefficient of the monomial `m` (zero if absent).
    pub fn coefficient(&self, m: &MultiIndex) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coefficient(&MultiIndex::zero(self.dim))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, PolyError> {
        if x.len() != self.dim {
            return Err(PolyError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.terms.iter().map(|(m, &c)| c * m.eval(x)).sum())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "polynomial dimensions differ");
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// Add a constant in place of building `constant(dim, c)` separately.
    pub fn add_constant(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.add_term(MultiIndex::zero(self.dim), c);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "polynomial dimensions differ");
        let mut out = Self::zero(self.dim);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                out.add_term(ma.sum(mb), ca * cb);
            }
        }
        out
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Partial derivative with respect to variable `i` (zero-based).
    pub fn partial(&self, i: usize) -> Self {
        assert!(i < self.dim, "variable index out of range");
        let mut out = Self::zero(self.dim);
        for (m, &c) in &self.terms {
            let e = m.exponents()[i];
            if e == 0 {
                continue;
            }
            let mut exps = m.exponents().to_vec();
            exps[i] -= 1;
            out.add_term(MultiIndex::new(exps), c * e as f64);
        }
        out
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.dim).map(|i| self.partial(i)).collect()
    }

    /// Hessian matrix; mixed partials are computed once and shared, so the
    /// result is exactly symmetric.
    pub fn hessian(&self) -> SymmetricMatrixPoly {
        let grad = self.gradient();
        let mut upper = Vec::with_capacity(self.dim * (self.dim + 1) / 2);
        for (i, gi) in grad.iter().enumerate() {
            for j in i..self.dim {
                upper.push(gi.partial(j));
            }
        }
        SymmetricMatrixPoly {
            dim: self.dim,
            size: self.dim,
            upper,
        }
    }

    /// Drop terms with `|coefficient| <= eps`.
    pub fn prune(&self, eps: f64) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, &c) in &self.terms {
            if c.abs() > eps {
                out.add_term(m.clone(), c);
            }
        }
        out
    }

    /// Largest absolute coefficient (0 for the zero polynomial).
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    /// Reinterpret in a larger variable space (extra variables unused).
    pub fn extended(&self, new_dim: usize) -> Self {
        assert!(new_dim >= self.dim);
        let extra = new_dim - self.dim;
        let mut out = Self::zero(new_dim);
        for (m, &c) in &self.terms {
            out.add_term(m.extended(extra), c);
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            if idx == 0 {
                if *c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            if m.is_constant() {
                write!(f, "{}", mag)?;
            } else if mag == 1.0 {
                write!(f, "{}", m)?;
            } else {
                write!(f, "{}*{}", mag, m)?;
            }
        }
        Ok(())
    }
}

/// Number of monomials in `n` variables of total degree at most `k`:
/// `C(n + k, k)`.
pub fn basis_len(n: usize, k: u32) -> u128 {
    let mut num: u128 = 1;
    for i in 1..=k as u128 {
        num = num.saturating_mul(n as u128 + i) / i;
    }
    num
}

/// Graded monomial basis of all monomials in `dim` variables with total
/// degree at most `degree`, starting at the constant monomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    pub dim: usize,
    pub degree: u32,
    pub monomials: Vec<MultiIndex>,
}

impl MonomialBasis {
    pub fn new(dim: usize, degree: u32) -> Result<Self, PolyError> {
        let expected = basis_len(dim, degree);
        if expected > MAX_BASIS_LEN as u128 {
            return Err(PolyError::Capacity {
                requested: expected,
                limit: MAX_BASIS_LEN,
            });
        }
        let mut monomials = Vec::with_capacity(expected as usize);
        let mut current = vec![0u32; dim];
        enumerate(&mut current, 0, degree, &mut monomials);
        monomials.sort();
        debug_assert_eq!(monomials.len() as u128, expected);
        Ok(MonomialBasis {
            dim,
            degree,
            monomials,
        })
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Evaluate every basis monomial at `x`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.monomials.iter().map(|m| m.eval(x)).collect()
    }
}

fn enumerate(current: &mut Vec<u32>, var: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if var == current.len() {
        out.push(MultiIndex::new(current.clone()));
        return;
    }
    for e in 0..=remaining {
        current[var] = e;
        enumerate(current, var + 1, remaining - e, out);
    }
    current[var] = 0;
}

/// Symmetric matrix with polynomial entries; entry `(i, j)` and `(j, i)`
/// are the same stored object, so symmetry is exact by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrixPoly {
    dim: usize,
    size: usize,
    /// Row-major upper triangle: `(i, j)` with `i <= j` at
    /// `i * size - i(i-1)/2 + (j - i)`.
    upper: Vec<Polynomial>,
}

impl SymmetricMatrixPoly {
    /// Build from the upper triangle listed row-major (`(0,0), (0,1), …`).
    pub fn from_upper(dim: usize, size: usize, upper: Vec<Polynomial>) -> Self {
        assert_eq!(upper.len(), size * (size + 1) / 2);
        assert!(upper.iter().all(|p| p.dim() == dim));
        SymmetricMatrixPoly { dim, size, upper }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.size - i * (i + 1) / 2 + j
    }

    pub fn entry(&self, i: usize, j: usize) -> &Polynomial {
        &self.upper[self.index(i, j)]
    }

    /// Largest total degree over all entries.
    pub fn degree(&self) -> u32 {
        self.upper.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    /// Dense row-major evaluation at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, PolyError> {
        let s = self.size;
        let mut out = vec![0.0; s * s];
        for i in 0..s {
            for j in i..s {
                let v = self.entry(i, j).eval(x)?;
                out[i * s + j] = v;
                out[j * s + i] = v;
            }
        }
        Ok(out)
    }

    /// The scalar polynomial `z' M(x) z` in `n + size` variables, with the
    /// `z` variables appended after the `x` variables.
    pub fn scalarize(&self) -> Polynomial {
        let total = self.dim + self.size;
        let mut out = Polynomial::zero(total);
        for i in 0..self.size {
            for j in i..self.size {
                let factor = if i == j { 1.0 } else { 2.0 };
                let entry = self.entry(i, j).extended(total);
                let zi = Polynomial::var(total, self.dim + i);
                let zj = Polynomial::var(total, self.dim + j);
                out = out.add(&entry.scale(factor).mul(&zi).mul(&zj));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(dim: usize, terms: &[(&[u32], f64)]) -> Polynomial {
        Polynomial::from_terms(dim, terms.iter().map(|(p, c)| (p.to_vec(), *c))).unwrap()
    }

    #[test]
    fn eval_univariate() {
        // 2x^4 - x at x = 1.
        let f = poly(1, &[(&[4], 2.0), (&[1], -1.0)]);
        assert_eq!(f.eval(&[1.0]).unwrap(), 1.0);
        assert_eq!(f.eval(&[2.0]).unwrap(), 30.0);
    }

    #[test]
    fn eval_dimension_mismatch() {
        let f = poly(2, &[(&[1, 1], 1.0)]);
        assert!(matches!(
            f.eval(&[1.0]),
            Err(PolyError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn zero_polynomial_degree() {
        assert_eq!(Polynomial::zero(3).degree(), 0);
        assert!(Polynomial::zero(3).is_zero());
        let cancelled = poly(1, &[(&[2], 1.0), (&[2], -1.0)]);
        assert!(cancelled.is_zero());
        assert_eq!(cancelled.degree(), 0);
    }

    #[test]
    fn duplicate_terms_summed() {
        let f = poly(1, &[(&[3], 1.5), (&[3], 2.5), (&[0], 1.0)]);
        assert_eq!(f.num_terms(), 2);
        assert_eq!(f.coefficient(&MultiIndex::new(vec![3])), 4.0);
    }

    #[test]
    fn canonical_equality() {
        let a = poly(2, &[(&[1, 0], 1.0), (&[0, 2], 2.0)]);
        let b = poly(2, &[(&[0, 2], 2.0), (&[1, 0], 1.0), (&[1, 1], 0.0)]);
        assert_eq!(a, b);
    }

    #[test]
    fn basis_ordering_matches_graded_listing() {
        let b = MonomialBasis::new(2, 2).unwrap();
        let got: Vec<&[u32]> = b.monomials.iter().map(|m| m.exponents()).collect();
        // 1, x1, x2, x1^2, x1x2, x2^2
        assert_eq!(
            got,
            vec![
                &[0, 0][..],
                &[1, 0][..],
                &[0, 1][..],
                &[2, 0][..],
                &[1, 1][..],
                &[0, 2][..]
            ]
        );
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(MonomialBasis::new(2, 4).unwrap().len(), 15);
        assert_eq!(MonomialBasis::new(3, 3).unwrap().len(), 20);
        assert_eq!(MonomialBasis::new(1, 7).unwrap().len(), 8);
        assert_eq!(MonomialBasis::new(4, 0).unwrap().len(), 1);
    }

    #[test]
    fn basis_capacity_error() {
        let err = MonomialBasis::new(10, 12).unwrap_err();
        assert!(matches!(err, PolyError::Capacity { .. }));
    }

    #[test]
    fn basis_len_binomial_identity() {
        for n in 1..=5usize {
            for k in 0..=6u32 {
                let b = MonomialBasis::new(n, k).unwrap();
                assert_eq!(b.len() as u128, basis_len(n, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn gradient_and_hessian_octic_example() {
        // f = x1^8 + x1^2 + x1 x2 + x2^2
        let f = poly(
            2,
            &[
                (&[8, 0], 1.0),
                (&[2, 0], 1.0),
                (&[1, 1], 1.0),
                (&[0, 2], 1.0),
            ],
        );
        let h = f.hessian();
        let expected_00 = poly(2, &[(&[6, 0], 56.0), (&[0, 0], 2.0)]);
        assert_eq!(h.entry(0, 0), &expected_00);
        assert_eq!(h.entry(0, 1), &Polynomial::constant(2, 1.0));
        assert_eq!(h.entry(1, 0), &Polynomial::constant(2, 1.0));
        assert_eq!(h.entry(1, 1), &Polynomial::constant(2, 2.0));
    }

    #[test]
    fn hessian_mixed_partials_commute() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(2..=4usize);
            let mut f = Polynomial::zero(n);
            for _ in 0..8 {
                let exps: Vec<u32> = (0..n).map(|_| rng.random_range(0..=3u32)).collect();
                f = f.add(&Polynomial::from_terms(
                    n,
                    [(exps, rng.random_range(-2.0..2.0))],
                )
                .unwrap());
            }
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(f.partial(i).partial(j), f.partial(j).partial(i));
                }
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let n = rng.random_range(1..=3usize);
            let mut f = Polynomial::zero(n);
            for _ in 0..6 {
                let exps: Vec<u32> = (0..n).map(|_| rng.random_range(0..=4u32)).collect();
                if exps.iter().sum::<u32>() > 8 {
                    continue;
                }
                f = f.add(&Polynomial::from_terms(
                    n,
                    [(exps, rng.random_range(-1.0..1.0))],
                )
                .unwrap());
            }
            let grad = f.gradient();
            for _ in 0..10 {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
                let h = 1e-5;
                for i in 0..n {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let fd = (f.eval(&xp).unwrap() - f.eval(&xm).unwrap()) / (2.0 * h);
                    let exact = grad[i].eval(&x).unwrap();
                    assert!(
                        (fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()),
                        "fd {fd} vs exact {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn extended_keeps_values() {
        let f = poly(1, &[(&[2], 3.0), (&[0], -1.0)]);
        let g = f.extended(3);
        assert_eq!(g.dim(), 3);
        assert_eq!(
            g.eval(&[2.0, 9.0, -4.0]).unwrap(),
            f.eval(&[2.0]).unwrap()
        );
    }

    #[test]
    fn scalarize_quadratic_form() {
        // M = [[2, 1], [1, 2]] constant in 1 variable x; z'Mz = 2z1^2 + 2z1z2 + 2z2^2.
        let m = SymmetricMatrixPoly::from_upper(
            1,
            2,
            vec![
                Polynomial::constant(1, 2.0),
                Polynomial::constant(1, 1.0),
                Polynomial::constant(1, 2.0),
            ],
        );
        let s = m.scalarize();
        assert_eq!(s.dim(), 3);
        // At x = 0, z = (1, 1): 2 + 2 + 2 = 6.
        assert_eq!(s.eval(&[0.0, 1.0, 1.0]).unwrap(), 6.0);
        // z = (1, -1): 2 - 2 + 2 = 2.
        assert_eq!(s.eval(&[0.0, 1.0, -1.0]).unwrap(), 2.0);
    }

    #[test]
    fn prune_drops_small_terms() {
        let f = poly(1, &[(&[1], 1e-12), (&[2], 1.0)]);
        let g = f.prune(1e-9);
        assert_eq!(g.num_terms(), 1);
        assert_eq!(g.degree(), 2);
    }

    #[test]
    fn display_formats() {
        let f = poly(2, &[(&[2, 0], 1.0), (&[1, 1], -2.0), (&[0, 0], 0.5)]);
        assert_eq!(format!("{f}"), "0.5 + x1^2 - 2*x1*x2");
    }
}
