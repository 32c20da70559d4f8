//! The field tower `F_p ⊂ F_q ⊂ F_{q^m} ⊂ F_{q^{2m}}`.
//!
//! Only the top field `F_{q^{2m}}` is materialized. Every subfield is the
//! fixed set of a power of Frobenius inside it, and the base field `F_q`
//! used for linear algebra is a small index table over that fixed set
//! (see [`BaseField`]).
//!
//! Elements are encoded as integers `Σ c_i p^i` where `c_i` is the
//! coefficient of `x^i` in the residue modulo the defining polynomial.
//! Multiplication goes through discrete-log tables and addition through a
//! Zech table, so every operation is a handful of lookups.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::zsig::{is_prime, prime_factors};

/// Default bound on `p^{2am}`; keeps the three log tables around 12 MiB.
pub const DEFAULT_MAX_FIELD_SIZE: u64 = 1 << 20;

const NO_LOG: u32 = u32::MAX;

/// An element of `F_{q^{2m}}`, by its base-`p` coefficient encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FFElem(u32);

impl FFElem {
    pub const ZERO: FFElem = FFElem(0);
    pub const ONE: FFElem = FFElem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Raw encoding `Σ c_i p^i`.
    pub fn encoding(self) -> u32 {
        self.0
    }
}

/// The ambient arithmetic world for one parameter triple `(p, a, m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerCtx {
    p: u64,
    a: u32,
    m: u32,
    q: u64,
    /// Degree of the top field over `F_p`, `2am`.
    degree: usize,
    size: u64,
    /// Monic, low-degree first, length `degree + 1`.
    modulus: Vec<u32>,
    omega: FFElem,
    epsilon: FFElem,
    lambda: FFElem,
    mu: FFElem,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
    base: BaseField,
}

impl TowerCtx {
    /// Builds the tower with the default field-size cap.
    pub fn new(p: u64, a: u32, m: u32) -> Result<Self> {
        Self::with_cap(p, a, m, DEFAULT_MAX_FIELD_SIZE)
    }

    pub fn with_cap(p: u64, a: u32, m: u32, max_field_size: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p == 2 {
            return Err(Error::EvenCharacteristic(p));
        }
        if a == 0 {
            return Err(Error::ZeroParameter("a"));
        }
        if m == 0 {
            return Err(Error::ZeroParameter("m"));
        }
        let degree = 2 * a as usize * m as usize;
        let size = (p as u128).checked_pow(degree as u32).unwrap_or(u128::MAX);
        if size > max_field_size as u128 || size > u32::MAX as u128 {
            return Err(Error::FieldTooLarge {
                size,
                cap: max_field_size,
            });
        }
        let size = size as u64;
        let q = p.pow(a);
        let pp = p as u32;

        let modulus = smallest_irreducible(pp, degree);
        let omega_coeffs = smallest_primitive(pp, &modulus, size - 1);

        let order = (size - 1) as usize;
        let mut exp = Vec::with_capacity(order);
        let mut log = vec![NO_LOG; size as usize];
        let mut cur = vec![0u32; degree];
        cur[0] = 1;
        for k in 0..order {
            let e = encode(&cur, pp);
            exp.push(e);
            log[e as usize] = k as u32;
            cur = poly_mulmod(&cur, &omega_coeffs, &modulus, pp);
        }

        let mut zech = vec![NO_LOG; order];
        for (k, z) in zech.iter_mut().enumerate() {
            let s = add_encoded(1, exp[k], pp, degree);
            if s != 0 {
                *z = log[s as usize];
            }
        }

        let mut ctx = TowerCtx {
            p,
            a,
            m,
            q,
            degree,
            size,
            modulus,
            omega: FFElem(exp[1 % order]),
            epsilon: FFElem::ZERO,
            lambda: FFElem::ZERO,
            mu: FFElem::ZERO,
            exp,
            log,
            zech,
            base: BaseField::placeholder(),
        };
        let qm = q.pow(m);
        ctx.epsilon = ctx.omega_pow((qm + 1) / 2);
        ctx.lambda = ctx.omega_pow((q - 1) / 2);
        ctx.mu = ctx.omega_pow(qm - 1);
        ctx.base = BaseField::build(&ctx);
        Ok(ctx)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn a(&self) -> u32 {
        self.a
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    /// `q^m`.
    pub fn qm(&self) -> u64 {
        self.q.pow(self.m)
    }
    /// Dimension `2m` of the coordinate space over `F_q`.
    pub fn dim(&self) -> usize {
        2 * self.m as usize
    }
    /// `[F_{q^{2m}} : F_p]`.
    pub fn degree(&self) -> usize {
        self.degree
    }
    /// Number of elements of `F_{q^{2m}}`.
    pub fn size(&self) -> u64 {
        self.size
    }
    /// Order of the multiplicative group.
    pub fn group_order(&self) -> u64 {
        self.size - 1
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    pub fn omega(&self) -> FFElem {
        self.omega
    }
    pub fn epsilon(&self) -> FFElem {
        self.epsilon
    }
    pub fn lambda(&self) -> FFElem {
        self.lambda
    }
    pub fn mu(&self) -> FFElem {
        self.mu
    }
    pub fn base(&self) -> &BaseField {
        &self.base
    }

    /// Iterates all field elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = FFElem> {
        (0..self.size as u32).map(FFElem)
    }

    pub fn from_encoding(&self, e: u32) -> FFElem {
        assert!((e as u64) < self.size, "encoding {e} out of range");
        FFElem(e)
    }

    /// Coefficient vector (low degree first) of length `2am`.
    pub fn coeffs(&self, x: FFElem) -> Vec<u32> {
        decode(x.0, self.p as u32, self.degree)
    }

    pub fn from_coeffs(&self, c: &[u32]) -> FFElem {
        assert_eq!(c.len(), self.degree);
        let p = self.p as u32;
        FFElem(encode(&c.iter().map(|v| v % p).collect::<Vec<_>>(), p))
    }

    /// The prime-field element `k mod p`.
    pub fn from_int(&self, k: i64) -> FFElem {
        FFElem(k.rem_euclid(self.p as i64) as u32)
    }

    pub fn omega_pow(&self, k: u64) -> FFElem {
        let n = self.group_order();
        FFElem(self.exp[(k % n) as usize])
    }

    /// Discrete logarithm base ω; `None` for zero.
    pub fn dlog(&self, x: FFElem) -> Option<u64> {
        match self.log[x.0 as usize] {
            NO_LOG => None,
            l => Some(l as u64),
        }
    }

    pub fn add(&self, x: FFElem, y: FFElem) -> FFElem {
        if x.0 == 0 {
            return y;
        }
        if y.0 == 0 {
            return x;
        }
        let n = self.exp.len();
        let lx = self.log[x.0 as usize] as usize;
        let ly = self.log[y.0 as usize] as usize;
        let d = (ly + n - lx) % n;
        match self.zech[d] {
            NO_LOG => FFElem::ZERO,
            z => FFElem(self.exp[(lx + z as usize) % n]),
        }
    }

    pub fn neg(&self, x: FFElem) -> FFElem {
        if x.0 == 0 {
            return x;
        }
        let n = self.exp.len();
        let l = self.log[x.0 as usize] as usize;
        FFElem(self.exp[(l + n / 2) % n])
    }

    pub fn sub(&self, x: FFElem, y: FFElem) -> FFElem {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: FFElem, y: FFElem) -> FFElem {
        if x.0 == 0 || y.0 == 0 {
            return FFElem::ZERO;
        }
        let n = self.exp.len();
        let l = self.log[x.0 as usize] as usize + self.log[y.0 as usize] as usize;
        FFElem(self.exp[l % n])
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, x: FFElem) -> Option<FFElem> {
        let l = self.dlog(x)?;
        let n = self.group_order();
        Some(FFElem(self.exp[((n - l) % n) as usize]))
    }

    pub fn pow(&self, x: FFElem, e: u64) -> FFElem {
        if e == 0 {
            return FFElem::ONE;
        }
        match self.dlog(x) {
            None => FFElem::ZERO,
            Some(l) => {
                let n = self.group_order() as u128;
                FFElem(self.exp[((l as u128 * e as u128) % n) as usize])
            }
        }
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, x: FFElem) -> Option<u64> {
        let l = self.dlog(x)?;
        let n = self.group_order();
        Some(n / gcd(n, l))
    }

    /// `x^{q^k}` with `k` reduced modulo `2m`.
    pub fn frobenius(&self, x: FFElem, k: i64) -> FFElem {
        let k = k.rem_euclid(self.dim() as i64) as u32;
        let Some(l) = self.dlog(x) else {
            return FFElem::ZERO;
        };
        let n = self.group_order() as u128;
        let qk = (self.q as u128).pow(k) % n;
        FFElem(self.exp[((l as u128 * qk) % n) as usize])
    }

    /// `Tr(x) = Σ_{i<2m} x^{q^i}`, an element of the `F_q` subfield.
    pub fn trace_to_base(&self, x: FFElem) -> FFElem {
        (0..self.dim() as i64).fold(FFElem::ZERO, |acc, i| self.add(acc, self.frobenius(x, i)))
    }

    /// Relative trace down to `F_{q^d}`, `Σ_{i < 2m/d} x^{q^{di}}`.
    pub fn trace_to_subfield(&self, x: FFElem, d: u32) -> Result<FFElem> {
        let n = 2 * self.m;
        if d == 0 || n % d != 0 {
            return Err(Error::NotDivisor {
                d: d as u64,
                n: n as u64,
            });
        }
        Ok((0..(n / d) as i64).fold(FFElem::ZERO, |acc, i| {
            self.add(acc, self.frobenius(x, i * d as i64))
        }))
    }

    /// The `q^d` elements of `F_{q^d}`: zero followed by the powers of its
    /// canonical generator `ω^{(q^{2m}-1)/(q^d-1)}`.
    pub fn subfield_elements(&self, d: u32) -> Result<Vec<FFElem>> {
        let n = 2 * self.m;
        if d == 0 || n % d != 0 {
            return Err(Error::NotDivisor {
                d: d as u64,
                n: n as u64,
            });
        }
        let sub_order = self.q.pow(d) - 1;
        let step = self.group_order() / sub_order;
        let mut out = Vec::with_capacity(sub_order as usize + 1);
        out.push(FFElem::ZERO);
        out.extend((0..sub_order).map(|k| self.omega_pow(k * step)));
        Ok(out)
    }

    /// Generator `ω^{(q^{2m}-1)/(q^d-1)}` of `F_{q^d}^*`.
    pub fn subfield_generator(&self, d: u32) -> FFElem {
        self.omega_pow(self.group_order() / (self.q.pow(d) - 1))
    }

    /// Whether `x` lies in `F_{q^d}`.
    pub fn in_subfield(&self, x: FFElem, d: u32) -> bool {
        self.pow(x, self.q.pow(d)) == x
    }
}

/// The base field `F_q`, realized as the Frobenius-fixed subset of the top
/// field and indexed `0..q`.
///
/// Index `k` with base-`p` digits `d_j` stands for `Σ d_j ζ^j` where `ζ` is
/// the canonical generator of `F_q^*` inside the tower; indices below `p`
/// are the prime field. Arithmetic is by `q × q` tables. The same struct
/// also carries the coordinate map between the top field and `F_q^{2m}` in
/// the power basis `1, ω, …, ω^{2m-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseField {
    inner: Arc<BaseTables>,
}

#[derive(Debug, PartialEq, Eq)]
struct BaseTables {
    p: u32,
    a: usize,
    q: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    to_tower: Vec<FFElem>,
    /// `log_index[t]` is the index of `ζ^t`.
    log_index: Vec<u16>,
    log_step: u64,
    dim: usize,
    degree: usize,
    /// Rows `i*a + j` hold the coefficients of `ω^i ζ^j`.
    basis: Vec<Vec<u32>>,
    basis_inv: Vec<Vec<u32>>,
}

impl BaseField {
    fn placeholder() -> Self {
        BaseField {
            inner: Arc::new(BaseTables {
                p: 0,
                a: 0,
                q: 0,
                add: vec![],
                mul: vec![],
                neg: vec![],
                inv: vec![],
                to_tower: vec![],
                log_index: vec![],
                log_step: 0,
                dim: 0,
                degree: 0,
                basis: vec![],
                basis_inv: vec![],
            }),
        }
    }

    fn build(ctx: &TowerCtx) -> Self {
        let p = ctx.p as u32;
        let a = ctx.a as usize;
        let q = ctx.q as usize;
        let zeta = ctx.subfield_generator(1);
        let zeta_pows: Vec<FFElem> = (0..a).map(|j| ctx.pow(zeta, j as u64)).collect();

        let to_tower: Vec<FFElem> = (0..q)
            .map(|k| {
                let digits = decode(k as u32, p, a);
                digits
                    .iter()
                    .zip(&zeta_pows)
                    .fold(FFElem::ZERO, |acc, (&d, &z)| {
                        ctx.add(acc, ctx.mul(ctx.from_int(d as i64), z))
                    })
            })
            .collect();
        let log_step = ctx.group_order() / (q as u64 - 1);
        let mut log_index = vec![0u16; q - 1];
        for (k, &x) in to_tower.iter().enumerate().skip(1) {
            let l = ctx.dlog(x).expect("nonzero");
            debug_assert_eq!(l % log_step, 0);
            log_index[(l / log_step) as usize] = k as u16;
        }
        let index_of = |x: FFElem| -> u16 {
            match ctx.dlog(x) {
                None => 0,
                Some(l) => log_index[(l / log_step) as usize],
            }
        };
        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        for i in 0..q {
            for j in 0..q {
                add[i * q + j] = index_of(ctx.add(to_tower[i], to_tower[j]));
                mul[i * q + j] = index_of(ctx.mul(to_tower[i], to_tower[j]));
            }
        }
        let neg = (0..q).map(|i| index_of(ctx.neg(to_tower[i]))).collect();
        let inv = (0..q)
            .map(|i| ctx.inv(to_tower[i]).map(index_of).unwrap_or(0))
            .collect();

        let dim = ctx.dim();
        let degree = ctx.degree;
        let mut basis = Vec::with_capacity(degree);
        for i in 0..dim {
            let wi = ctx.omega_pow(i as u64);
            for z in &zeta_pows {
                basis.push(ctx.coeffs(ctx.mul(wi, *z)));
            }
        }
        let basis_inv = invert_mod_p(&basis, p).expect("power basis spans the field");

        BaseField {
            inner: Arc::new(BaseTables {
                p,
                a,
                q,
                add,
                mul,
                neg,
                inv,
                to_tower,
                log_index,
                log_step,
                dim,
                degree,
                basis,
                basis_inv,
            }),
        }
    }

    pub fn q(&self) -> usize {
        self.inner.q
    }
    pub fn p(&self) -> u32 {
        self.inner.p
    }
    /// Dimension `2m` of the coordinate space.
    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    #[inline]
    pub fn add(&self, x: u16, y: u16) -> u16 {
        self.inner.add[x as usize * self.inner.q + y as usize]
    }
    #[inline]
    pub fn mul(&self, x: u16, y: u16) -> u16 {
        self.inner.mul[x as usize * self.inner.q + y as usize]
    }
    #[inline]
    pub fn neg(&self, x: u16) -> u16 {
        self.inner.neg[x as usize]
    }
    #[inline]
    pub fn sub(&self, x: u16, y: u16) -> u16 {
        self.add(x, self.neg(y))
    }
    /// Inverse of a nonzero scalar.
    #[inline]
    pub fn inv(&self, x: u16) -> u16 {
        debug_assert!(x != 0, "inverse of zero");
        self.inner.inv[x as usize]
    }
    pub fn pow(&self, x: u16, mut e: u64) -> u16 {
        let mut base = x;
        let mut acc = 1u16;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Scalar for the integer `k mod p`.
    pub fn from_int(&self, k: i64) -> u16 {
        k.rem_euclid(self.inner.p as i64) as u16
    }

    pub fn to_tower(&self, x: u16) -> FFElem {
        self.inner.to_tower[x as usize]
    }

    /// Index of a tower element lying in `F_q`; `None` otherwise.
    pub fn from_tower(&self, ctx: &TowerCtx, x: FFElem) -> Option<u16> {
        match ctx.dlog(x) {
            None => Some(0),
            Some(l) if l % self.inner.log_step == 0 => {
                Some(self.inner.log_index[(l / self.inner.log_step) as usize])
            }
            Some(_) => None,
        }
    }

    /// Base-`p` digits of a scalar index, low first, length `a`.
    pub fn digits(&self, x: u16) -> Vec<u32> {
        decode(x as u32, self.inner.p, self.inner.a)
    }

    pub fn from_digits(&self, d: &[u32]) -> u16 {
        encode(d, self.inner.p) as u16
    }

    /// Coordinates of `x` over `F_q` in the basis `1, ω, …, ω^{2m-1}`.
    pub fn coords(&self, ctx: &TowerCtx, x: FFElem) -> Vec<u16> {
        let t = &self.inner;
        let c = ctx.coeffs(x);
        let y = vec_mat_mod_p(&c, &t.basis_inv, t.p);
        y.chunks(t.a).map(|d| encode(d, t.p) as u16).collect()
    }

    pub fn from_coords(&self, ctx: &TowerCtx, v: &[u16]) -> FFElem {
        let t = &self.inner;
        assert_eq!(v.len(), t.dim);
        let y: Vec<u32> = v.iter().flat_map(|&s| decode(s as u32, t.p, t.a)).collect();
        let c = vec_mat_mod_p(&y, &t.basis, t.p);
        debug_assert_eq!(c.len(), t.degree);
        ctx.from_coeffs(&c)
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn encode(c: &[u32], p: u32) -> u32 {
    c.iter().rev().fold(0u32, |acc, &d| acc * p + d)
}

fn decode(mut e: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = e % p;
        e /= p;
    }
    out
}

fn add_encoded(x: u32, y: u32, p: u32, len: usize) -> u32 {
    let (dx, dy) = (decode(x, p, len), decode(y, p, len));
    let s: Vec<u32> = dx.iter().zip(&dy).map(|(a, b)| (a + b) % p).collect();
    encode(&s, p)
}

fn vec_mat_mod_p(v: &[u32], m: &[Vec<u32>], p: u32) -> Vec<u32> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut out = vec![0u64; cols];
    for (&vi, row) in v.iter().zip(m) {
        if vi == 0 {
            continue;
        }
        for (o, &r) in out.iter_mut().zip(row) {
            *o = (*o + vi as u64 * r as u64) % p as u64;
        }
    }
    out.into_iter().map(|x| x as u32).collect()
}

fn inv_mod_p(x: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut base = x as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

fn invert_mod_p(m: &[Vec<u32>], p: u32) -> Option<Vec<Vec<u32>>> {
    let n = m.len();
    let mut a: Vec<Vec<u32>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| u32::from(i == j)));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] != 0)?;
        a.swap(col, piv);
        let s = inv_mod_p(a[col][col], p);
        for v in a[col].iter_mut() {
            *v = (*v as u64 * s as u64 % p as u64) as u32;
        }
        for r in 0..n {
            if r != col && a[r][col] != 0 {
                let f = a[r][col];
                for c in 0..2 * n {
                    let sub = (f as u64 * a[col][c] as u64 % p as u64) as u32;
                    a[r][c] = (a[r][c] + p - sub) % p;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

// Polynomials over F_p, low degree first.

fn trim(v: &mut Vec<u32>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut b = b.to_vec();
    trim(&mut b);
    let db = b.len() - 1;
    let lead_inv = inv_mod_p(b[db], p);
    while r.len() > db && !(r.len() == 1 && r[0] == 0) {
        let dr = r.len() - 1;
        let f = (r[dr] as u64 * lead_inv as u64 % p as u64) as u32;
        if f != 0 {
            for (i, &bi) in b.iter().enumerate() {
                let idx = dr - db + i;
                r[idx] = (r[idx] + p - (f as u64 * bi as u64 % p as u64) as u32) % p;
            }
        }
        r.pop();
        if r.is_empty() {
            r.push(0);
        }
        trim(&mut r);
    }
    r
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !(y.len() == 1 && y[0] == 0) {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

/// Product of two residues modulo the monic `modulus`; inputs and output
/// have length `deg(modulus)`.
fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let n = modulus.len() - 1;
    let mut r = vec![0u64; 2 * n];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    for d in (n..2 * n).rev() {
        let c = r[d];
        if c != 0 {
            for (k, &mk) in modulus.iter().enumerate() {
                let idx = d - n + k;
                r[idx] = (r[idx] + p as u64 * p as u64 - c * mk as u64) % p as u64;
            }
        }
    }
    r.truncate(n);
    r.into_iter().map(|x| x as u32).collect()
}

fn poly_powmod(base: &[u32], mut e: u128, modulus: &[u32], p: u32) -> Vec<u32> {
    let n = modulus.len() - 1;
    let mut acc = vec![0u32; n];
    acc[0] = 1;
    let mut b = base.to_vec();
    b.resize(n, 0);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, modulus, p);
        }
        b = poly_mulmod(&b, &b, modulus, p);
        e >>= 1;
    }
    acc
}

/// Ben-Or: `f` of degree `n` is irreducible iff `gcd(f, x^{p^k} - x) = 1`
/// for every `k ≤ n/2`.
pub(crate) fn is_irreducible_mod_p(f: &[u32], p: u32) -> bool {
    let n = f.len() - 1;
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let mut x = vec![0u32; n];
    x[1] = 1;
    let mut xp = x.clone();
    for _ in 1..=n / 2 {
        xp = poly_powmod(&xp, p as u128, f, p);
        let mut diff = xp.clone();
        diff[1] = (diff[1] + p - 1) % p;
        let g = poly_gcd(f, &diff, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

/// Coefficient vectors of length `len`, ordered lexicographically with the
/// constant term most significant.
fn lex_vectors(p: u32, len: usize) -> impl Iterator<Item = Vec<u32>> {
    let total = (p as u64).pow(len as u32);
    (0..total).map(move |mut t| {
        let mut v = vec![0u32; len];
        for i in (0..len).rev() {
            v[i] = (t % p as u64) as u32;
            t /= p as u64;
        }
        v
    })
}

fn smallest_irreducible(p: u32, degree: usize) -> Vec<u32> {
    lex_vectors(p, degree)
        .map(|mut c| {
            c.push(1);
            c
        })
        .find(|f| is_irreducible_mod_p(f, p))
        .expect("irreducible polynomials exist in every degree")
}

fn smallest_primitive(p: u32, modulus: &[u32], order: u64) -> Vec<u32> {
    let n = modulus.len() - 1;
    let primes = prime_factors(order);
    let one = {
        let mut v = vec![0u32; n];
        v[0] = 1;
        v
    };
    lex_vectors(p, n)
        .filter(|c| c.iter().any(|&x| x != 0))
        .find(|c| {
            primes
                .iter()
                .all(|&l| poly_powmod(c, (order / l) as u128, modulus, p) != one)
                && poly_powmod(c, order as u128, modulus, p) == one
        })
        .expect("the multiplicative group is cyclic")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_pow(ctx: &TowerCtx, x: FFElem, e: u64) -> FFElem {
        (0..e).fold(FFElem::ONE, |acc, _| ctx.mul(acc, x))
    }

    #[test]
    fn nine_element_field() {
        let ctx = TowerCtx::new(3, 1, 1).unwrap();
        assert_eq!(ctx.size(), 9);
        assert_eq!(ctx.order(ctx.omega()), Some(8));
        // x^2 + 1 and ω = 1 + x, from an exhaustive search.
        assert_eq!(ctx.modulus(), &[1, 0, 1]);
        assert_eq!(ctx.coeffs(ctx.omega()), vec![1, 1]);
    }

    #[test]
    fn mu_order_q5() {
        let ctx = TowerCtx::new(5, 1, 1).unwrap();
        assert_eq!(ctx.mu(), ctx.omega_pow(4));
        assert_eq!(ctx.order(ctx.mu()), Some(6));
        assert_eq!(ctx.modulus(), &[1, 1, 1]);
        assert_eq!(ctx.coeffs(ctx.omega()), vec![1, 3]);
    }

    #[test]
    fn quartic_modulus_over_f3() {
        // Brute force over all monic quartics mod 3 (divisor search by
        // exhaustive trial of every monic of degree 1 and 2) gives
        // 1 + x^2 + x^3 + x^4, and the first full-order element is x^2 + x^3.
        let ctx = TowerCtx::new(3, 1, 2).unwrap();
        assert_eq!(ctx.modulus(), &[1, 0, 1, 1, 1]);
        assert_eq!(ctx.coeffs(ctx.omega()), vec![0, 0, 1, 1]);
        assert_eq!(ctx.order(ctx.omega()), Some(80));
        let ctx9 = TowerCtx::new(3, 2, 1).unwrap();
        assert_eq!(ctx9.modulus(), ctx.modulus());
        let ctx5 = TowerCtx::new(5, 1, 2).unwrap();
        assert_eq!(ctx5.modulus(), &[1, 0, 1, 1, 1]);
        assert_eq!(ctx5.coeffs(ctx5.omega()), vec![0, 0, 1, 1]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(TowerCtx::new(4, 1, 1), Err(Error::NotPrime(4)));
        assert_eq!(TowerCtx::new(2, 1, 1), Err(Error::EvenCharacteristic(2)));
        assert_eq!(TowerCtx::new(3, 0, 1), Err(Error::ZeroParameter("a")));
        assert_eq!(TowerCtx::new(3, 1, 0), Err(Error::ZeroParameter("m")));
        assert!(matches!(
            TowerCtx::new(3, 1, 7),
            Err(Error::FieldTooLarge { .. })
        ));
        assert!(matches!(
            TowerCtx::with_cap(3, 1, 2, 80),
            Err(Error::FieldTooLarge { size: 81, cap: 80 })
        ));
    }

    #[test]
    fn constants_satisfy_their_identities() {
        for (p, a, m) in [
            (3, 1, 1),
            (5, 1, 1),
            (7, 1, 1),
            (3, 1, 2),
            (5, 1, 2),
            (3, 2, 1),
        ] {
            let ctx = TowerCtx::new(p, a, m).unwrap();
            let qm = ctx.qm();
            let eps = ctx.epsilon();
            assert_eq!(ctx.frobenius(eps, m as i64), ctx.neg(eps));
            assert_eq!(ctx.order(ctx.mu()), Some(qm + 1));
            let n = ctx.group_order();
            let half = (ctx.q() - 1) / 2;
            assert_eq!(ctx.order(ctx.lambda()), Some(n / gcd(n, half)));
        }
    }

    #[test]
    fn frobenius_examples() {
        let ctx = TowerCtx::new(5, 1, 1).unwrap();
        assert_eq!(ctx.frobenius(ctx.omega(), 1), ctx.omega_pow(5));
        for k in 0..5 {
            let x = ctx.from_int(k);
            for j in -3..4 {
                assert_eq!(ctx.frobenius(x, j), x);
            }
        }
        let ctx = TowerCtx::new(3, 1, 2).unwrap();
        for x in ctx.elements() {
            assert_eq!(ctx.frobenius(x, 1), naive_pow(&ctx, x, 3));
            assert_eq!(ctx.frobenius(ctx.frobenius(x, 1), 3), x);
            assert_eq!(ctx.frobenius(x, 4), x);
        }
    }

    #[test]
    fn trace_examples() {
        let ctx = TowerCtx::new(3, 1, 1).unwrap();
        assert_eq!(ctx.trace_to_base(FFElem::ONE), ctx.from_int(2));
        assert_eq!(ctx.trace_to_base(FFElem::ZERO), FFElem::ZERO);
        let mut counts = [0; 3];
        for x in ctx.elements() {
            let t = ctx.trace_to_base(x);
            counts[t.encoding() as usize] += 1;
        }
        assert_eq!(counts, [3, 3, 3]);
    }

    #[test]
    fn trace_matches_naive_frobenius_sum() {
        for (p, a, m) in [(3, 1, 1), (5, 1, 1), (3, 1, 2), (5, 1, 2), (3, 2, 1)] {
            let ctx = TowerCtx::new(p, a, m).unwrap();
            let q = ctx.q();
            let mut nonzero = false;
            for x in ctx.elements() {
                let mut acc = FFElem::ZERO;
                let mut y = x;
                for _ in 0..ctx.dim() {
                    acc = ctx.add(acc, y);
                    y = naive_pow(&ctx, y, q);
                }
                let t = ctx.trace_to_base(x);
                assert_eq!(t, acc);
                assert!(ctx.in_subfield(t, 1));
                nonzero |= !t.is_zero();
            }
            assert!(nonzero);
        }
    }

    #[test]
    fn subfields() {
        let ctx = TowerCtx::new(3, 1, 1).unwrap();
        let mut f3: Vec<u32> = ctx
            .subfield_elements(1)
            .unwrap()
            .iter()
            .map(|x| x.encoding())
            .collect();
        f3.sort();
        assert_eq!(f3, vec![0, 1, 2]);
        assert_eq!(ctx.subfield_elements(2).unwrap().len(), 9);
        assert!(matches!(
            ctx.subfield_elements(3),
            Err(Error::NotDivisor { d: 3, n: 2 })
        ));

        let ctx = TowerCtx::new(5, 1, 2).unwrap();
        let mut sub: Vec<FFElem> = ctx.subfield_elements(2).unwrap();
        sub.sort();
        let mut oracle: Vec<FFElem> = ctx
            .elements()
            .filter(|&x| naive_pow(&ctx, x, 25) == x)
            .collect();
        oracle.sort();
        assert_eq!(sub.len(), 25);
        assert_eq!(sub, oracle);
    }

    #[test]
    fn deterministic_construction() {
        assert_eq!(
            TowerCtx::new(5, 1, 2).unwrap(),
            TowerCtx::new(5, 1, 2).unwrap()
        );
    }

    #[test]
    fn base_field_tables() {
        for (p, a, m) in [(3, 1, 1), (3, 2, 1), (5, 1, 2)] {
            let ctx = TowerCtx::new(p, a, m).unwrap();
            let bf = ctx.base();
            let q = bf.q() as u16;
            for x in 0..q {
                let tx = bf.to_tower(x);
                assert!(ctx.in_subfield(tx, 1));
                assert_eq!(bf.from_tower(&ctx, tx), Some(x));
                for y in 0..q {
                    let ty = bf.to_tower(y);
                    assert_eq!(bf.to_tower(bf.add(x, y)), ctx.add(tx, ty));
                    assert_eq!(bf.to_tower(bf.mul(x, y)), ctx.mul(tx, ty));
                }
                if x != 0 {
                    assert_eq!(bf.mul(x, bf.inv(x)), 1);
                }
            }
            for k in 0..p as u16 {
                assert_eq!(bf.to_tower(k), ctx.from_int(k as i64));
            }
        }
    }

    #[test]
    fn coordinates_round_trip_and_power_basis() {
        for (p, a, m) in [(3, 1, 1), (3, 2, 1), (3, 1, 2)] {
            let ctx = TowerCtx::new(p, a, m).unwrap();
            let bf = ctx.base();
            for x in ctx.elements() {
                let c = bf.coords(&ctx, x);
                assert_eq!(c.len(), ctx.dim());
                assert_eq!(bf.from_coords(&ctx, &c), x);
            }
            for i in 0..ctx.dim() {
                let mut e = vec![0u16; ctx.dim()];
                e[i] = 1;
                assert_eq!(bf.coords(&ctx, ctx.omega_pow(i as u64)), e);
            }
        }
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn field_axioms(x in 0u32..625, y in 0u32..625, z in 0u32..625) {
            let ctx = ctx_5_1_2();
            let (x, y, z) = (ctx.from_encoding(x), ctx.from_encoding(y), ctx.from_encoding(z));
            prop_assert_eq!(ctx.mul(ctx.mul(x, y), z), ctx.mul(x, ctx.mul(y, z)));
            prop_assert_eq!(ctx.add(ctx.add(x, y), z), ctx.add(x, ctx.add(y, z)));
            prop_assert_eq!(ctx.mul(x, ctx.add(y, z)), ctx.add(ctx.mul(x, y), ctx.mul(x, z)));
            prop_assert_eq!(ctx.sub(ctx.add(x, y), y), x);
            if let Some(xi) = ctx.inv(x) {
                prop_assert_eq!(ctx.mul(x, xi), FFElem::ONE);
            }
            // Digit-wise addition as an oracle for the Zech table.
            let dx = ctx.coeffs(x);
            let dy = ctx.coeffs(y);
            let s: Vec<u32> = dx.iter().zip(&dy).map(|(a, b)| (a + b) % 5).collect();
            prop_assert_eq!(ctx.add(x, y), ctx.from_coeffs(&s));
        }

        #[test]
        fn frobenius_composes_to_identity(x in 0u32..625, k in -10i64..10) {
            let ctx = ctx_5_1_2();
            let x = ctx.from_encoding(x);
            prop_assert_eq!(ctx.frobenius(ctx.frobenius(x, k), -k), x);
            prop_assert_eq!(ctx.frobenius(ctx.frobenius(x, 1), 3), x);
        }
    }

    fn ctx_5_1_2() -> &'static TowerCtx {
        use std::sync::OnceLock;
        static CTX: OnceLock<TowerCtx> = OnceLock::new();
        CTX.get_or_init(|| TowerCtx::new(5, 1, 2).unwrap())
    }
}
