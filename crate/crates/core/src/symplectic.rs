//! The alternating trace form `f(x, y) = Tr(ε x y^{q^m})` and its isometries.

use crate::error::{Error, Result};
use crate::gf::{FFElem, TowerCtx};
use crate::grp::MatGroup;
use crate::linalg::{dot, MatQ, Scalar, Subspace, VecQ};

/// Gram matrix of a non-degenerate alternating form in the power basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramForm {
    gram: MatQ,
    gram_inv: MatQ,
}

impl GramForm {
    /// Validates that `gram` is alternating and invertible.
    pub fn new(gram: MatQ, ctx: &TowerCtx) -> Option<Self> {
        let bf = ctx.base();
        let n = gram.n();
        let alternating = (0..n).all(|i| {
            gram.get(i, i) == 0 && (0..n).all(|j| gram.get(i, j) == bf.neg(gram.get(j, i)))
        });
        if !alternating {
            return None;
        }
        let gram_inv = gram.inverse(bf)?;
        Some(GramForm { gram, gram_inv })
    }

    pub fn gram(&self) -> &MatQ {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.n()
    }

    /// `f(u, v) = u G vᵀ`.
    pub fn eval(&self, u: &[Scalar], v: &[Scalar], ctx: &TowerCtx) -> Scalar {
        let bf = ctx.base();
        dot(&self.gram.apply(u, bf), v, bf)
    }
}

/// Gram matrix of the trace form, `G[i][j] = Tr(ε ω^i (ω^j)^{q^m})`.
pub fn gram_from_trace_form(ctx: &TowerCtx) -> GramForm {
    let m = ctx.m() as i64;
    let eps = ctx.epsilon();
    gram_of(ctx, |x, y| {
        ctx.trace_to_base(ctx.mul(eps, ctx.mul(x, ctx.frobenius(y, m))))
    })
}

/// The same form reached by field reduction: `F(x, y) = ε(x ȳ − x̄ y)` is an
/// `F_{q^m}`-valued alternating form on the 2-dimensional `F_{q^m}`-space
/// `F_{q^{2m}}` (bar is `x ↦ x^{q^m}`), and the form is `Tr_{q^m → q} ∘ F`.
pub fn gram_via_field_reduction(ctx: &TowerCtx) -> GramForm {
    let m = ctx.m() as i64;
    gram_of(ctx, |x, y| {
        let k = field_reduction_form(ctx, x, y);
        (0..m).fold(FFElem::ZERO, |acc, i| ctx.add(acc, ctx.frobenius(k, i)))
    })
}

/// `F(x, y) = ε(x y^{q^m} − x^{q^m} y)`, valued in `F_{q^m}`.
pub fn field_reduction_form(ctx: &TowerCtx, x: FFElem, y: FFElem) -> FFElem {
    let m = ctx.m() as i64;
    let eps = ctx.epsilon();
    let a = ctx.mul(x, ctx.frobenius(y, m));
    let b = ctx.mul(ctx.frobenius(x, m), y);
    ctx.mul(eps, ctx.sub(a, b))
}

fn gram_of(ctx: &TowerCtx, f: impl Fn(FFElem, FFElem) -> FFElem) -> GramForm {
    let bf = ctx.base();
    let n = ctx.dim();
    let basis: Vec<FFElem> = (0..n).map(|i| ctx.omega_pow(i as u64)).collect();
    let rows: Vec<VecQ> = basis
        .iter()
        .map(|&x| {
            basis
                .iter()
                .map(|&y| {
                    bf.from_tower(ctx, f(x, y))
                        .expect("form values lie in the base field")
                })
                .collect()
        })
        .collect();
    GramForm::new(MatQ::from_rows(&rows), ctx)
        .expect("trace form is alternating and non-degenerate")
}

/// `M G Mᵀ = G`, i.e. `f(uM, vM) = f(u, v)` for all `u, v`.
pub fn is_isometry(m: &MatQ, form: &GramForm, ctx: &TowerCtx) -> bool {
    let bf = ctx.base();
    m.n() == form.dim() && m.mul(&form.gram, bf).mul(&m.transpose(), bf) == form.gram
}

/// `M* = G Mᵀ G⁻¹`, characterized by `f(u M*, v) = f(u, v M)`.
pub fn adjoint(m: &MatQ, form: &GramForm, ctx: &TowerCtx) -> MatQ {
    let bf = ctx.base();
    form.gram.mul(&m.transpose(), bf).mul(&form.gram_inv, bf)
}

pub fn is_totally_isotropic(u: &Subspace, form: &GramForm, ctx: &TowerCtx) -> bool {
    let b = u.basis();
    b.iter()
        .enumerate()
        .all(|(i, x)| b[i + 1..].iter().all(|y| form.eval(x, y, ctx) == 0))
}

/// `x ↦ x + c f(x, v) v`.
pub fn transvection(v: &[Scalar], c: Scalar, form: &GramForm, ctx: &TowerCtx) -> MatQ {
    let bf = ctx.base();
    let n = form.dim();
    let gv: VecQ = (0..n).map(|i| dot(form.gram.row(i), v, bf)).collect();
    let mut t = MatQ::identity(n);
    for i in 0..n {
        let coef = bf.mul(c, gv[i]);
        if coef == 0 {
            continue;
        }
        for (j, &vj) in v.iter().enumerate() {
            t.set(i, j, bf.add(t.get(i, j), bf.mul(coef, vj)));
        }
    }
    t
}

/// `|Sp(2m, q)| = q^{m²} ∏_{i=1}^{m} (q^{2i} − 1)`.
pub fn sp_order(q: u64, m: u32) -> u128 {
    let q = q as u128;
    let mut order = q.pow(m * m);
    for i in 1..=m {
        order = order.saturating_mul(q.pow(2 * i) - 1);
    }
    order
}

/// The full symplectic group of the trace form, as the closure of
/// symplectic transvections.
///
/// Transvections along the power basis with every nonzero scalar come
/// first; if their closure falls short of the classical order, directions
/// `e_i + e_j` and then all remaining vectors are added until it does not.
pub fn enumerate_sp(ctx: &TowerCtx, form: &GramForm, cap: usize) -> Result<MatGroup> {
    let required = sp_order(ctx.q(), ctx.m());
    if required > cap as u128 {
        return Err(Error::OrderOverCap { required, cap });
    }
    let bf = ctx.base();
    let n = ctx.dim();
    let scalars: Vec<Scalar> = (1..bf.q() as u16).collect();

    let mut directions: Vec<VecQ> = (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = 1;
            e
        })
        .collect();
    let pairs: Vec<VecQ> = (0..n)
        .flat_map(|i| {
            (i + 1..n).map(move |j| {
                let mut e = vec![0; n];
                e[i] = 1;
                e[j] = 1;
                e
            })
        })
        .collect();
    let rest: Vec<VecQ> = Subspace::whole(n)
        .vectors(bf)
        .into_iter()
        .filter(|v| v.iter().any(|&x| x != 0))
        .collect();

    let mut stages = vec![pairs, rest].into_iter();
    loop {
        let gens: Vec<MatQ> = directions
            .iter()
            .flat_map(|v| scalars.iter().map(move |&c| (v, c)))
            .map(|(v, c)| transvection(v, c, form, ctx))
            .collect();
        let group = MatGroup::closure(n, &gens, bf, cap)?;
        if group.order() as u128 == required {
            return Ok(group);
        }
        match stages.next() {
            Some(extra) => {
                for v in extra {
                    if !directions.contains(&v) {
                        directions.push(v);
                    }
                }
            }
            None => unreachable!("transvections generate Sp(2m, q)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_by_two_trace_form() {
        let ctx = TowerCtx::new(3, 1, 1).unwrap();
        let form = gram_from_trace_form(&ctx);
        let g = form.gram();
        assert_eq!(g.get(0, 0), 0);
        assert_eq!(g.get(1, 1), 0);
        assert_ne!(g.get(0, 1), 0);
        assert_eq!(g.get(1, 0), ctx.base().neg(g.get(0, 1)));
    }

    #[test]
    fn gram_4x4_oracle() {
        // Evaluate Tr(ε b_i b_j^{q^m}) by naive exponentiation.
        let ctx = TowerCtx::new(5, 1, 2).unwrap();
        let form = gram_from_trace_form(&ctx);
        let bf = ctx.base();
        let naive_pow = |x: FFElem, e: u64| (0..e).fold(FFElem::ONE, |acc, _| ctx.mul(acc, x));
        for i in 0..4 {
            for j in 0..4 {
                let x = ctx.omega_pow(i);
                let y = naive_pow(ctx.omega_pow(j), 25);
                let mut z = ctx.mul(ctx.epsilon(), ctx.mul(x, y));
                let mut tr = FFElem::ZERO;
                for _ in 0..4 {
                    tr = ctx.add(tr, z);
                    z = naive_pow(z, 5);
                }
                assert_eq!(bf.to_tower(form.gram().get(i as usize, j as usize)), tr);
            }
        }
        assert_eq!(form.gram().rank(bf), 4);
    }

    #[test]
    fn both_constructions_agree() {
        for (p, a, m) in [
            (3, 1, 1),
            (5, 1, 1),
            (7, 1, 1),
            (3, 1, 2),
            (5, 1, 2),
            (3, 2, 1),
        ] {
            let ctx = TowerCtx::new(p, a, m).unwrap();
            assert_eq!(gram_from_trace_form(&ctx), gram_via_field_reduction(&ctx));
        }
    }

    #[test]
    fn isometry_examples() {
        let ctx = TowerCtx::new(5, 1, 1).unwrap();
        let bf = ctx.base();
        let form = gram_from_trace_form(&ctx);
        assert!(is_isometry(&MatQ::identity(2), &form, &ctx));
        assert!(is_isometry(&MatQ::identity(2).neg(bf), &form, &ctx));
        assert!(!is_isometry(&MatQ::scalar(2, 2), &form, &ctx));
        assert_eq!(adjoint(&MatQ::identity(2), &form, &ctx), MatQ::identity(2));
    }

    #[test]
    fn adjoint_identity_exhaustive() {
        let ctx = TowerCtx::new(3, 1, 1).unwrap();
        let bf = ctx.base();
        let form = gram_from_trace_form(&ctx);
        let vecs = Subspace::whole(2).vectors(bf);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = MatQ::from_rows(&[
                vec![rng.gen_range(0..3), rng.gen_range(0..3)],
                vec![rng.gen_range(0..3), rng.gen_range(0..3)],
            ]);
            let adj = adjoint(&m, &form, &ctx);
            for u in &vecs {
                for v in &vecs {
                    assert_eq!(
                        form.eval(&adj.apply(u, bf), v, &ctx),
                        form.eval(u, &m.apply(v, bf), &ctx)
                    );
                }
            }
            assert_eq!(adjoint(&adj, &form, &ctx), m);
            assert_eq!(is_isometry(&m, &form, &ctx), m.mul(&adj, bf).is_identity());
        }
    }

    #[test]
    fn isotropy() {
        let ctx = TowerCtx::new(3, 1, 2).unwrap();
        let bf = ctx.base();
        let form = gram_from_trace_form(&ctx);
        assert!(is_totally_isotropic(&Subspace::zero(4), &form, &ctx));
        for v in Subspace::whole(4).vectors(bf).into_iter().skip(1) {
            let line = Subspace::span(4, &[v], bf).unwrap();
            assert!(is_totally_isotropic(&line, &form, &ctx));
        }
        assert!(!is_totally_isotropic(&Subspace::whole(4), &form, &ctx));
    }

    #[test]
    fn transvections_are_isometries() {
        let ctx = TowerCtx::new(3, 2, 1).unwrap();
        let bf = ctx.base();
        let form = gram_from_trace_form(&ctx);
        for v in Subspace::whole(2).vectors(bf) {
            for c in 0..9 {
                assert!(is_isometry(&transvection(&v, c, &form, &ctx), &form, &ctx));
            }
        }
    }

    #[test]
    fn small_symplectic_groups() {
        for (p, m, order) in [(3u64, 1u32, 24usize), (5, 1, 120), (7, 1, 336)] {
            let ctx = TowerCtx::new(p, 1, m).unwrap();
            let form = gram_from_trace_form(&ctx);
            let sp = enumerate_sp(&ctx, &form, 200_000).unwrap();
            assert_eq!(sp.order(), order);
            assert_eq!(sp_order(p, m), order as u128);
            assert!(sp.elements().iter().all(|x| is_isometry(x, &form, &ctx)));
        }
        let ctx = TowerCtx::new(5, 1, 2).unwrap();
        let form = gram_from_trace_form(&ctx);
        assert_eq!(
            enumerate_sp(&ctx, &form, 200_000),
            Err(Error::OrderOverCap {
                required: 9_360_000,
                cap: 200_000
            })
        );
    }
}
