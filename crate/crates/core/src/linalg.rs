//! Exact linear algebra over `F_q` on the coordinate space `F_q^{2m}`.
//!
//! Scalars are [`BaseField`] indices. Vectors are rows and matrices act
//! from the right: a vector `v` maps to `v·M`, so the matrix of the
//! composite "first `A`, then `B`" is `A·B`.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf::{BaseField, FFElem, TowerCtx};

pub type Scalar = u16;

/// A coordinate vector over `F_q`.
pub type VecQ = Vec<Scalar>;

/// A square matrix over `F_q`, row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatQ {
    n: usize,
    entries: Vec<Scalar>,
}

impl fmt::Debug for MatQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[Scalar]> = self.entries.chunks(self.n.max(1)).collect();
        write!(f, "MatQ{rows:?}")
    }
}

impl MatQ {
    pub fn zero(n: usize) -> Self {
        MatQ {
            n,
            entries: vec![0; n * n],
        }
    }

    pub fn scalar(n: usize, c: Scalar) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.entries[i * n + i] = c;
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1)
    }

    pub fn from_rows(rows: &[VecQ]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        MatQ {
            n,
            entries: rows.concat(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<VecQ> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Big-endian bytes of the entries; sorting by this encoding is the
    /// same as the derived `Ord`.
    pub fn byte_encoding(&self) -> Vec<u8> {
        self.entries.iter().flat_map(|e| e.to_be_bytes()).collect()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == u16::from(i == j)))
    }

    pub fn mul(&self, other: &MatQ, bf: &BaseField) -> MatQ {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = vec![0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0 {
                    continue;
                }
                let brow = &other.entries[k * n..(k + 1) * n];
                let orow = &mut out[i * n..(i + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    if b != 0 {
                        *o = bf.add(*o, bf.mul(a, b));
                    }
                }
            }
        }
        MatQ { n, entries: out }
    }

    pub fn add(&self, other: &MatQ, bf: &BaseField) -> MatQ {
        MatQ {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| bf.add(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &MatQ, bf: &BaseField) -> MatQ {
        MatQ {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| bf.sub(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: Scalar, bf: &BaseField) -> MatQ {
        MatQ {
            n: self.n,
            entries: self.entries.iter().map(|&a| bf.mul(a, c)).collect(),
        }
    }

    pub fn neg(&self, bf: &BaseField) -> MatQ {
        MatQ {
            n: self.n,
            entries: self.entries.iter().map(|&a| bf.neg(a)).collect(),
        }
    }

    pub fn transpose(&self) -> MatQ {
        let n = self.n;
        let mut out = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.entries[i * n + j];
            }
        }
        MatQ { n, entries: out }
    }

    pub fn pow(&self, mut e: u64, bf: &BaseField) -> MatQ {
        let mut acc = MatQ::identity(self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, bf);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, bf);
            }
        }
        acc
    }

    /// Multiplicative order, searching up to `limit`.
    pub fn order(&self, limit: u64, bf: &BaseField) -> Option<u64> {
        let mut x = self.clone();
        for k in 1..=limit {
            if x.is_identity() {
                return Some(k);
            }
            x = x.mul(self, bf);
        }
        None
    }

    pub fn inverse(&self, bf: &BaseField) -> Option<MatQ> {
        let n = self.n;
        let mut aug: Vec<VecQ> = (0..n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend((0..n).map(|j| u16::from(i == j)));
                r
            })
            .collect();
        let pivots = rref_in_place(&mut aug, n, bf);
        if pivots.len() < n {
            return None;
        }
        Some(MatQ::from_rows(
            &aug.into_iter().map(|r| r[n..].to_vec()).collect::<Vec<_>>(),
        ))
    }

    pub fn rank(&self, bf: &BaseField) -> usize {
        let mut rows = self.rows();
        rref_in_place(&mut rows, self.n, bf).len()
    }

    /// `v·M`.
    pub fn apply(&self, v: &[Scalar], bf: &BaseField) -> VecQ {
        vec_mat(v, self, bf)
    }
}

pub fn vec_mat(v: &[Scalar], m: &MatQ, bf: &BaseField) -> VecQ {
    let n = m.n;
    let mut out = vec![0; n];
    for (k, &a) in v.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (o, &b) in out.iter_mut().zip(m.row(k)) {
            *o = bf.add(*o, bf.mul(a, b));
        }
    }
    out
}

pub fn dot(u: &[Scalar], v: &[Scalar], bf: &BaseField) -> Scalar {
    u.iter()
        .zip(v)
        .fold(0, |acc, (&a, &b)| bf.add(acc, bf.mul(a, b)))
}

/// Reduces `rows` to reduced row-echelon form over the first `cols`
/// columns, drops zero rows and returns the pivot columns.
pub fn rref_in_place(rows: &mut Vec<VecQ>, cols: usize, bf: &BaseField) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let s = bf.inv(rows[r][c]);
        if s != 1 {
            for v in rows[r].iter_mut() {
                *v = bf.mul(*v, s);
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = bf.neg(row[c]);
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                if y != 0 {
                    *x = bf.add(*x, bf.mul(f, y));
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// Basis of `{c : Σ c_i rows[i] = 0}`.
pub fn left_kernel(rows: &[VecQ], cols: usize, bf: &BaseField) -> Vec<VecQ> {
    let k = rows.len();
    let mut aug: Vec<VecQ> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut a = r.clone();
            a.extend((0..k).map(|j| u16::from(i == j)));
            a
        })
        .collect();
    // Echelonize the left block only, keep the rows that became zero there.
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..k).find(|&i| aug[i][c] != 0) else {
            continue;
        };
        aug.swap(r, pr);
        let s = bf.inv(aug[r][c]);
        for v in aug[r].iter_mut() {
            *v = bf.mul(*v, s);
        }
        let pivot_row = aug[r].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = bf.neg(row[c]);
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                if y != 0 {
                    *x = bf.add(*x, bf.mul(f, y));
                }
            }
        }
        r += 1;
    }
    aug.into_iter()
        .skip(r)
        .map(|row| row[cols..].to_vec())
        .collect()
}

/// A subspace of `F_q^n`, held as its canonical reduced row-echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<VecQ>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn whole(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: MatQ::identity(ambient).rows(),
        }
    }

    /// Canonical span of `vectors`.
    pub fn span(ambient: usize, vectors: &[VecQ], bf: &BaseField) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient) {
            return Err(Error::DimensionMismatch {
                expected: ambient,
                got: v.len(),
            });
        }
        let mut rows = vectors.to_vec();
        rref_in_place(&mut rows, ambient, bf);
        Ok(Subspace {
            ambient,
            basis: rows,
        })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[VecQ] {
        &self.basis
    }

    pub fn contains(&self, v: &[Scalar], bf: &BaseField) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        rref_in_place(&mut rows, self.ambient, bf).len() == self.dim()
    }

    pub fn sum(&self, other: &Subspace, bf: &BaseField) -> Result<Subspace> {
        self.check_ambient(other)?;
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Subspace::span(self.ambient, &rows, bf)
    }

    pub fn intersect(&self, other: &Subspace, bf: &BaseField) -> Result<Subspace> {
        self.check_ambient(other)?;
        let mut stacked = self.basis.clone();
        stacked.extend(other.basis.iter().cloned());
        let k = self.dim();
        let vecs: Vec<VecQ> = left_kernel(&stacked, self.ambient, bf)
            .into_iter()
            .map(|c| {
                let mut v = vec![0; self.ambient];
                for (ci, row) in c[..k].iter().zip(&self.basis) {
                    for (x, &y) in v.iter_mut().zip(row) {
                        *x = bf.add(*x, bf.mul(*ci, y));
                    }
                }
                v
            })
            .collect();
        Subspace::span(self.ambient, &vecs, bf)
    }

    /// Image under `v ↦ v·M`.
    pub fn image(&self, m: &MatQ, bf: &BaseField) -> Subspace {
        let rows: Vec<VecQ> = self.basis.iter().map(|b| m.apply(b, bf)).collect();
        Subspace::span(self.ambient, &rows, bf).expect("matching dimension")
    }

    /// Whether `v·M ∈ self` for every `v ∈ self`.
    pub fn is_invariant(&self, m: &MatQ, bf: &BaseField) -> bool {
        self.basis
            .iter()
            .all(|b| self.contains(&m.apply(b, bf), bf))
    }

    /// Every vector of the subspace; only sensible for tiny fields.
    pub fn vectors(&self, bf: &BaseField) -> Vec<VecQ> {
        let q = bf.q();
        let mut out = vec![vec![0; self.ambient]];
        for b in &self.basis {
            let mut next = Vec::with_capacity(out.len() * q);
            for v in &out {
                for c in 0..q as u16 {
                    next.push(
                        v.iter()
                            .zip(b)
                            .map(|(&x, &y)| bf.add(x, bf.mul(c, y)))
                            .collect(),
                    );
                }
            }
            out = next;
        }
        out
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                got: other.ambient,
            });
        }
        Ok(())
    }
}

/// `{v : v·M = c·v}`.
pub fn eigenspace(m: &MatQ, c: Scalar, bf: &BaseField) -> Subspace {
    let shifted = m.sub(&MatQ::scalar(m.n(), c), bf);
    let ker = left_kernel(&shifted.rows(), m.n(), bf);
    Subspace::span(m.n(), &ker, bf).expect("matching dimension")
}

/// `dim_F_q {X : XM = MX}`.
pub fn commutant_dimension(m: &MatQ, bf: &BaseField) -> usize {
    let n = m.n();
    // Row (k, l) lists the coefficient of the unknown x_{kl} in each
    // equation (XM - MX)_{ij} = 0.
    let mut rows = vec![vec![0u16; n * n]; n * n];
    for k in 0..n {
        for l in 0..n {
            let row = &mut rows[k * n + l];
            for j in 0..n {
                // (XM)_{kj} gains x_{kl} M_{lj}.
                row[k * n + j] = bf.add(row[k * n + j], m.get(l, j));
            }
            for i in 0..n {
                // (MX)_{il} gains M_{ik} x_{kl}.
                row[i * n + l] = bf.sub(row[i * n + l], m.get(i, k));
            }
        }
    }
    let rank = rref_in_place(&mut rows, n * n, bf).len();
    n * n - rank
}

/// Polynomial over `F_q`, low degree first, with no trailing zeros (the
/// zero polynomial is empty).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly(Vec<Scalar>);

impl Poly {
    pub fn new(mut c: Vec<Scalar>) -> Self {
        while c.last() == Some(&0) {
            c.pop();
        }
        Poly(c)
    }

    pub fn one() -> Self {
        Poly(vec![1])
    }

    /// `x`.
    pub fn x() -> Self {
        Poly(vec![0, 1])
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn monic(&self, bf: &BaseField) -> Poly {
        match self.0.last() {
            None => self.clone(),
            Some(&lead) => {
                let s = bf.inv(lead);
                Poly(self.0.iter().map(|&c| bf.mul(c, s)).collect())
            }
        }
    }

    pub fn add(&self, other: &Poly, bf: &BaseField) -> Poly {
        let len = self.0.len().max(other.0.len());
        Poly::new(
            (0..len)
                .map(|i| bf.add(*self.0.get(i).unwrap_or(&0), *other.0.get(i).unwrap_or(&0)))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Poly, bf: &BaseField) -> Poly {
        let neg = Poly(other.0.iter().map(|&c| bf.neg(c)).collect());
        self.add(&neg, bf)
    }

    pub fn mul(&self, other: &Poly, bf: &BaseField) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly(vec![]);
        }
        let mut out = vec![0; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] = bf.add(out[i + j], bf.mul(a, b));
            }
        }
        Poly::new(out)
    }

    /// Quotient and remainder; `divisor` must be nonzero.
    pub fn div_rem(&self, divisor: &Poly, bf: &BaseField) -> (Poly, Poly) {
        let db = divisor.degree().expect("division by zero polynomial");
        let lead_inv = bf.inv(divisor.0[db]);
        let mut rem = self.0.clone();
        let mut quot = vec![0; self.0.len().saturating_sub(db)];
        while rem.len() > db {
            let top = rem.len() - 1;
            let f = bf.mul(rem[top], lead_inv);
            if f != 0 {
                for (i, &c) in divisor.0.iter().enumerate() {
                    let idx = top - db + i;
                    rem[idx] = bf.sub(rem[idx], bf.mul(f, c));
                }
                quot[top - db] = f;
            }
            rem.pop();
        }
        (Poly::new(quot), Poly::new(rem))
    }

    pub fn rem(&self, divisor: &Poly, bf: &BaseField) -> Poly {
        self.div_rem(divisor, bf).1
    }

    pub fn gcd(&self, other: &Poly, bf: &BaseField) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b, bf);
            a = b;
            b = r;
        }
        a.monic(bf)
    }

    pub fn lcm(&self, other: &Poly, bf: &BaseField) -> Poly {
        let g = self.gcd(other, bf);
        self.mul(other, bf).div_rem(&g, bf).0.monic(bf)
    }

    pub fn eval_matrix(&self, m: &MatQ, bf: &BaseField) -> MatQ {
        // Horner.
        let mut acc = MatQ::zero(m.n());
        for &c in self.0.iter().rev() {
            acc = acc.mul(m, bf).add(&MatQ::scalar(m.n(), c), bf);
        }
        acc
    }

    fn pow_mod(&self, mut e: u64, modulus: &Poly, bf: &BaseField) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.rem(modulus, bf);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, bf).rem(modulus, bf);
            }
            base = base.mul(&base, bf).rem(modulus, bf);
            e >>= 1;
        }
        acc
    }

    /// Ben-Or test over `F_q`.
    pub fn is_irreducible(&self, bf: &BaseField) -> bool {
        let Some(d) = self.degree() else {
            return false;
        };
        if d == 0 {
            return false;
        }
        let f = self.monic(bf);
        let mut xq = Poly::x();
        for _ in 1..=d / 2 {
            xq = xq.pow_mod(bf.q() as u64, &f, bf);
            if f.gcd(&xq.sub(&Poly::x(), bf), bf).degree() != Some(0) {
                return false;
            }
        }
        true
    }

    pub fn has_root(&self, bf: &BaseField) -> bool {
        (0..bf.q() as u16).any(|x| {
            self.0
                .iter()
                .rev()
                .fold(0, |acc, &c| bf.add(bf.mul(acc, x), c))
                == 0
        })
    }
}

/// Monic generator of `{s : s(M) = 0}`, by Krylov sequences of the
/// standard basis vectors combined with lcm.
pub fn minimal_polynomial(m: &MatQ, bf: &BaseField) -> Poly {
    let n = m.n();
    let mut acc = Poly::one();
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        let mut krylov = vec![e];
        loop {
            let next = m.apply(krylov.last().unwrap(), bf);
            krylov.push(next);
            let ker = left_kernel(&krylov, n, bf);
            if let Some(rel) = ker.into_iter().find(|c| *c.last().unwrap() != 0) {
                acc = acc.lcm(&Poly::new(rel).monic(bf), bf);
                break;
            }
        }
    }
    acc
}

/// Matrix of an `F_q`-linear map of `F_{q^{2m}}` in the power basis:
/// row `i` holds the coordinates of `f(ω^i)`.
pub fn matrix_of_field_map(ctx: &TowerCtx, f: impl Fn(FFElem) -> FFElem) -> MatQ {
    let bf = ctx.base();
    let rows: Vec<VecQ> = (0..ctx.dim())
        .map(|i| bf.coords(ctx, f(ctx.omega_pow(i as u64))))
        .collect();
    MatQ::from_rows(&rows)
}

/// The canonical square root of −1 in `F_q`: the one with smaller index.
pub fn i4_scalar(ctx: &TowerCtx) -> Result<Scalar> {
    let bf = ctx.base();
    let minus_one = bf.neg(1);
    (0..bf.q() as u16)
        .find(|&s| bf.mul(s, s) == minus_one)
        .ok_or(Error::NoSqrtMinusOne { q: ctx.q() })
}
