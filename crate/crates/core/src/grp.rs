//! Finite matrix groups held as explicit, sorted element sets.
//!
//! Groups here are small (at most a few hundred thousand elements), so
//! every subgroup construction is closure plus filtering. Element order is
//! always the derived `Ord` on matrices, which is the order of their byte
//! encodings; results never depend on hash iteration order.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{BaseField, FFElem, TowerCtx};
use crate::linalg::{matrix_of_field_map, MatQ, Subspace};
use crate::spread::{map_spread, Spread, SpreadAction};
use crate::symplectic::field_reduction_form;
use crate::zsig::factorize;

/// Default closure cap; covers `Sp(4, 3)` of order 51 840.
pub const DEFAULT_MAX_GROUP_ORDER: usize = 200_000;
/// Default bound on `|G|` for exhaustive subgroup search.
pub const DEFAULT_MAX_SUBGROUP_SEARCH: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatGroup {
    bf: BaseField,
    n: usize,
    elements: Vec<MatQ>,
    index: HashMap<MatQ, usize>,
    generators: Vec<MatQ>,
}

impl MatGroup {
    /// The group generated by `gens`, by breadth-first right multiplication.
    pub fn closure(n: usize, gens: &[MatQ], bf: &BaseField, cap: usize) -> Result<MatGroup> {
        for (i, g) in gens.iter().enumerate() {
            if g.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: g.n(),
                });
            }
            if g.rank(bf) < n {
                return Err(Error::SingularGenerator(i));
            }
        }
        let mut generators: Vec<MatQ> = Vec::new();
        for g in gens {
            if !g.is_identity() && !generators.contains(g) {
                generators.push(g.clone());
            }
        }
        let identity = MatQ::identity(n);
        let mut seen: HashSet<MatQ> = HashSet::new();
        seen.insert(identity.clone());
        let mut queue = VecDeque::from([identity]);
        while let Some(x) = queue.pop_front() {
            for g in &generators {
                let y = x.mul(g, bf);
                if !seen.contains(&y) {
                    if seen.len() >= cap {
                        return Err(Error::ClosureOverCap {
                            partial: seen.len(),
                            cap,
                        });
                    }
                    seen.insert(y.clone());
                    queue.push_back(y);
                }
            }
        }
        let mut elements: Vec<MatQ> = seen.into_iter().collect();
        elements.sort_unstable();
        Ok(Self::assemble(n, bf.clone(), elements, generators))
    }

    fn assemble(n: usize, bf: BaseField, elements: Vec<MatQ>, generators: Vec<MatQ>) -> MatGroup {
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, x)| (x.clone(), i))
            .collect();
        MatGroup {
            bf,
            n,
            elements,
            index,
            generators,
        }
    }

    /// Subgroup from a set of elements known to be closed; generators are
    /// chosen greedily in element order.
    fn subgroup_on(&self, mut elements: Vec<MatQ>) -> MatGroup {
        elements.sort_unstable();
        elements.dedup();
        let mut gens: Vec<MatQ> = Vec::new();
        let mut current: HashSet<MatQ> = HashSet::from([MatQ::identity(self.n)]);
        for x in &elements {
            if current.contains(x) {
                continue;
            }
            gens.push(x.clone());
            current = MatGroup::closure(self.n, &gens, &self.bf, usize::MAX)
                .expect("elements of a group are invertible")
                .elements
                .into_iter()
                .collect();
            if current.len() == elements.len() {
                break;
            }
        }
        debug_assert_eq!(current.len(), elements.len(), "subset is not closed");
        Self::assemble(self.n, self.bf.clone(), elements, gens)
    }

    pub fn trivial(n: usize, bf: &BaseField) -> MatGroup {
        Self::assemble(n, bf.clone(), vec![MatQ::identity(n)], vec![])
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &BaseField {
        &self.bf
    }

    pub fn elements(&self) -> &[MatQ] {
        &self.elements
    }

    pub fn generators(&self) -> &[MatQ] {
        &self.generators
    }

    pub fn contains(&self, x: &MatQ) -> bool {
        self.index.contains_key(x)
    }

    pub fn index_of(&self, x: &MatQ) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn mul(&self, x: &MatQ, y: &MatQ) -> MatQ {
        x.mul(y, &self.bf)
    }

    pub fn inverse(&self, x: &MatQ) -> MatQ {
        x.inverse(&self.bf).expect("group elements are invertible")
    }

    pub fn conjugate(&self, x: &MatQ, by: &MatQ) -> MatQ {
        self.mul(&self.mul(&self.inverse(by), x), by)
    }

    pub fn element_order(&self, x: &MatQ) -> u64 {
        x.order(self.order() as u64, &self.bf)
            .expect("element order divides the group order")
    }

    pub fn is_subgroup_of(&self, other: &MatGroup) -> bool {
        self.elements.iter().all(|x| other.contains(x))
    }

    pub fn is_abelian(&self) -> bool {
        let g = &self.generators;
        g.iter()
            .enumerate()
            .all(|(i, x)| g[i + 1..].iter().all(|y| self.mul(x, y) == self.mul(y, x)))
    }

    pub fn is_cyclic(&self) -> bool {
        let n = self.order() as u64;
        self.elements.iter().any(|x| self.element_order(x) == n)
    }

    pub fn cyclic_subgroup(&self, x: &MatQ) -> MatGroup {
        MatGroup::closure(self.n, std::slice::from_ref(x), &self.bf, usize::MAX)
            .expect("group element")
    }

    pub fn intersection(&self, other: &MatGroup) -> MatGroup {
        let common: Vec<MatQ> = self
            .elements
            .iter()
            .filter(|x| other.contains(x))
            .cloned()
            .collect();
        self.subgroup_on(common)
    }

    /// `{x : x U = U}`.
    pub fn stabilizer(&self, u: &Subspace) -> MatGroup {
        let stab: Vec<MatQ> = self
            .elements
            .iter()
            .filter(|x| u.image(x, &self.bf) == *u)
            .cloned()
            .collect();
        self.subgroup_on(stab)
    }

    /// `C_self(h)`; `h` must be a subgroup.
    pub fn centralizer_in(&self, h: &MatGroup) -> Result<MatGroup> {
        if !h.is_subgroup_of(self) {
            return Err(Error::NotSubgroup);
        }
        let c: Vec<MatQ> = self
            .elements
            .iter()
            .filter(|x| {
                h.generators
                    .iter()
                    .all(|y| self.mul(x, y) == self.mul(y, x))
            })
            .cloned()
            .collect();
        Ok(self.subgroup_on(c))
    }

    /// `N_self(h)`; `h` must be a subgroup.
    pub fn normalizer_in(&self, h: &MatGroup) -> Result<MatGroup> {
        if !h.is_subgroup_of(self) {
            return Err(Error::NotSubgroup);
        }
        Ok(self.normalizer_unchecked(h))
    }

    fn normalizer_unchecked(&self, h: &MatGroup) -> MatGroup {
        let nrm: Vec<MatQ> = self
            .elements
            .iter()
            .filter(|x| {
                h.generators
                    .iter()
                    .all(|y| h.contains(&self.conjugate(y, x)))
            })
            .cloned()
            .collect();
        self.subgroup_on(nrm)
    }

    pub fn is_normal_in(&self, g: &MatGroup) -> bool {
        g.generators.iter().all(|x| {
            self.generators
                .iter()
                .all(|y| self.contains(&g.conjugate(y, x)))
        })
    }

    /// `[G, G]`: normal closure of the generator commutators.
    pub fn derived_subgroup(&self) -> MatGroup {
        let bf = &self.bf;
        let mut gens: Vec<MatQ> = Vec::new();
        for (i, x) in self.generators.iter().enumerate() {
            for y in &self.generators[i + 1..] {
                let c = self.mul(
                    &self.mul(&self.inverse(x), &self.inverse(y)),
                    &self.mul(x, y),
                );
                if !c.is_identity() && !gens.contains(&c) {
                    gens.push(c);
                }
            }
        }
        let mut sub = MatGroup::closure(self.n, &gens, bf, usize::MAX).expect("invertible");
        loop {
            let extra = self.generators.iter().find_map(|g| {
                sub.generators
                    .iter()
                    .map(|h| self.conjugate(h, g))
                    .find(|c| !sub.contains(c))
            });
            match extra {
                None => break,
                Some(c) => {
                    gens.push(c);
                    sub = MatGroup::closure(self.n, &gens, bf, usize::MAX).expect("invertible");
                }
            }
        }
        self.subgroup_on(sub.elements)
    }

    /// `G ≥ G' ≥ G'' ≥ …` until two consecutive terms coincide.
    pub fn derived_series(&self) -> Vec<MatGroup> {
        let mut series = vec![self.clone()];
        loop {
            let next = series.last().unwrap().derived_subgroup();
            if next.order() == series.last().unwrap().order() {
                return series;
            }
            let done = next.order() == 1;
            series.push(next);
            if done {
                return series;
            }
        }
    }

    pub fn is_solvable(&self) -> bool {
        self.derived_series().last().unwrap().order() == 1
    }

    /// A Sylow `r`-subgroup: start from an `r`-element of largest order and
    /// extend by `r`-elements of the normalizer until the order reaches the
    /// full `r`-part of `|G|`.
    pub fn sylow(&self, r: u64) -> Result<MatGroup> {
        let order = self.order();
        let r_part = factorize(order as u128)
            .into_iter()
            .find(|&(p, _)| p == r)
            .map(|(p, e)| p.pow(e) as usize)
            .ok_or(Error::NotPrimeDivisor { r, order })?;
        let r_orders: Vec<(u64, &MatQ)> = self
            .elements
            .iter()
            .map(|x| (self.element_order(x), x))
            .filter(|&(o, _)| is_power_of(o, r))
            .collect();
        let start = r_orders
            .iter()
            .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(a.1)))
            .map(|&(_, x)| x.clone())
            .expect("identity is an r-element");
        let mut p = self.cyclic_subgroup(&start);
        while p.order() < r_part {
            let nrm = self.normalizer_unchecked(&p);
            let y = r_orders
                .iter()
                .map(|&(_, x)| x)
                .find(|x| nrm.contains(x) && !p.contains(x))
                .expect("a non-Sylow r-subgroup has an r-element in its normalizer outside it")
                .clone();
            let mut gens = p.generators.clone();
            gens.push(y);
            p = MatGroup::closure(self.n, &gens, &self.bf, usize::MAX).expect("invertible");
        }
        assert_eq!(p.order(), r_part, "Sylow construction overshot");
        Ok(self.subgroup_on(p.elements))
    }

    pub fn order_histogram(&self) -> BTreeMap<u64, usize> {
        let mut h = BTreeMap::new();
        for x in &self.elements {
            *h.entry(self.element_order(x)).or_insert(0) += 1;
        }
        h
    }

    /// Distinct cyclic subgroups of order `k`, in order of their least
    /// generator.
    pub fn cyclic_subgroups_of_order(&self, k: u64) -> Vec<MatGroup> {
        let mut seen: HashSet<Vec<MatQ>> = HashSet::new();
        let mut out = Vec::new();
        for x in &self.elements {
            if self.element_order(x) == k {
                let c = self.cyclic_subgroup(x);
                if seen.insert(c.elements.clone()) {
                    out.push(c);
                }
            }
        }
        out
    }

    pub fn involutions(&self) -> Vec<MatQ> {
        self.elements
            .iter()
            .filter(|x| !x.is_identity() && self.mul(x, x).is_identity())
            .cloned()
            .collect()
    }

    pub fn structure_probe(&self) -> StructureReport {
        let involutions = self.involutions();
        let histogram = self.order_histogram();
        let (sylow2_order, sylow2_cyclic) = if self.order() % 2 == 0 {
            let s = self.sylow(2).expect("even order");
            (s.order(), s.is_cyclic())
        } else {
            (1, true)
        };
        let order4_normalizers = self
            .cyclic_subgroups_of_order(4)
            .iter()
            .map(|y| self.normalizer_unchecked(y).order())
            .collect();
        let is_cyclic = histogram.contains_key(&(self.order() as u64));
        StructureReport {
            order: self.order(),
            involution_count: involutions.len(),
            unique_involution_is_minus_identity: involutions.len() == 1
                && involutions[0] == MatQ::identity(self.n).neg(&self.bf),
            sylow2_order,
            sylow2_cyclic,
            is_cyclic,
            order_histogram: histogram,
            order4_normalizers,
        }
    }

    /// All subgroups of order `n` (as sets, not up to conjugacy).
    pub fn find_subgroups_of_order(&self, n: usize, cap: usize) -> Result<Vec<MatGroup>> {
        if self.order() % n != 0 {
            return Err(Error::NotDivisor {
                d: n as u64,
                n: self.order() as u64,
            });
        }
        Ok(self
            .subgroup_lattice(cap, |k| n % k == 0)?
            .into_iter()
            .filter(|h| h.order() == n)
            .collect())
    }

    /// Every subgroup, ordered by size and then by element set.
    pub fn all_subgroups(&self, cap: usize) -> Result<Vec<MatGroup>> {
        self.subgroup_lattice(cap, |_| true)
    }

    /// Joins of cyclic subgroups, keeping only subgroups whose order passes
    /// `keep`. Every subgroup is a join of its cyclic subgroups through a
    /// chain of its own subgroups, so any kept subgroup whose divisors are
    /// all kept is reached.
    fn subgroup_lattice(&self, cap: usize, keep: impl Fn(usize) -> bool) -> Result<Vec<MatGroup>> {
        if self.order() > cap {
            return Err(Error::SubgroupSearchCap {
                order: self.order(),
                cap,
            });
        }
        let table = CayleyTable::new(self);
        let mut cyclic: Vec<(Bits, usize)> = Vec::new();
        let mut seen_cyclic: HashSet<Bits> = HashSet::new();
        for x in 0..table.len {
            let b = table.closure(&[x]);
            if seen_cyclic.insert(b.clone()) {
                cyclic.push((b, x));
            }
        }
        let mut found: HashMap<Bits, Vec<usize>> = HashMap::new();
        let mut frontier: Vec<Bits> = Vec::new();
        for (b, x) in &cyclic {
            if keep(b.count()) {
                found.insert(b.clone(), vec![*x]);
                frontier.push(b.clone());
            }
        }
        while !frontier.is_empty() {
            frontier.sort();
            let mut next = Vec::new();
            for h in frontier {
                let hgens = found[&h].clone();
                for (c, x) in &cyclic {
                    if c.is_subset(&h) {
                        continue;
                    }
                    let mut gens = hgens.clone();
                    gens.push(*x);
                    let k = table.closure(&gens);
                    if keep(k.count()) && !found.contains_key(&k) {
                        found.insert(k.clone(), gens);
                        next.push(k);
                    }
                }
            }
            frontier = next;
        }
        let mut subs: Vec<(Bits, Vec<usize>)> = found.into_iter().collect();
        subs.sort_by(|a, b| a.0.count().cmp(&b.0.count()).then_with(|| a.0.cmp(&b.0)));
        Ok(subs
            .into_iter()
            .map(|(bits, gens)| {
                let elements = bits.iter().map(|i| self.elements[i].clone()).collect();
                let gens = gens.into_iter().map(|i| self.elements[i].clone()).collect();
                Self::assemble(self.n, self.bf.clone(), elements, gens)
            })
            .collect())
    }
}

fn is_power_of(mut x: u64, r: u64) -> bool {
    while x % r == 0 {
        x /= r;
    }
    x == 1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub order: usize,
    pub involution_count: usize,
    pub unique_involution_is_minus_identity: bool,
    pub sylow2_order: usize,
    /// Sylow 2-subgroups are conjugate, so one representative decides.
    pub sylow2_cyclic: bool,
    pub is_cyclic: bool,
    pub order_histogram: BTreeMap<u64, usize>,
    /// `|N_G(Y)|` for each cyclic subgroup `Y` of order 4.
    pub order4_normalizers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }
    fn set(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        let fresh = self.0[w] & b == 0;
        self.0[w] |= b;
        fresh
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            (0..64)
                .filter(move |b| word >> b & 1 == 1)
                .map(move |b| w * 64 + b)
        })
    }
}

struct CayleyTable {
    len: usize,
    identity: usize,
    mul: Vec<u32>,
}

impl CayleyTable {
    fn new(g: &MatGroup) -> Self {
        let len = g.order();
        let mut mul = vec![0u32; len * len];
        for (i, x) in g.elements.iter().enumerate() {
            for (j, y) in g.elements.iter().enumerate() {
                mul[i * len + j] = g.index[&g.mul(x, y)] as u32;
            }
        }
        let identity = g.index[&MatQ::identity(g.n)];
        CayleyTable { len, identity, mul }
    }

    fn closure(&self, gens: &[usize]) -> Bits {
        let mut bits = Bits::new(self.len);
        bits.set(self.identity);
        let mut queue = vec![self.identity];
        while let Some(x) = queue.pop() {
            for &g in gens {
                let y = self.mul[x * self.len + g] as usize;
                if bits.set(y) {
                    queue.push(y);
                }
            }
        }
        bits
    }
}

/// `π: x ↦ λ x^q`.
pub fn build_pi(ctx: &TowerCtx) -> MatQ {
    let lambda = ctx.lambda();
    matrix_of_field_map(ctx, |x| ctx.mul(lambda, ctx.frobenius(x, 1)))
}

/// `ρ: x ↦ μ x`.
pub fn build_rho(ctx: &TowerCtx) -> MatQ {
    let mu = ctx.mu();
    matrix_of_field_map(ctx, |x| ctx.mul(mu, x))
}

/// `G = ⟨π, ρ⟩`.
pub fn build_g(ctx: &TowerCtx, cap: usize) -> Result<MatGroup> {
    MatGroup::closure(ctx.dim(), &[build_pi(ctx), build_rho(ctx)], ctx.base(), cap)
}

/// The group generated by the `F_{q^m}`-linear transvections
/// `x ↦ x + c F(x, v) v` for `v ∈ {1, ω}` and `c` over an `F_p`-basis of
/// `F_{q^m}`, together with `π` and `ρ`. It preserves the form and permutes
/// the spread members, and has order `|SL(2, q^m)| · m`.
pub fn field_reduction_stabilizer(ctx: &TowerCtx, cap: usize) -> Result<MatGroup> {
    let m = ctx.m();
    let g = ctx.subfield_generator(m);
    let coeffs: Vec<FFElem> = (0..(ctx.a() * m) as u64).map(|k| ctx.pow(g, k)).collect();
    let mut gens = vec![build_pi(ctx), build_rho(ctx)];
    for v in [FFElem::ONE, ctx.omega()] {
        for &c in &coeffs {
            gens.push(matrix_of_field_map(ctx, |x| {
                let t = ctx.mul(c, field_reduction_form(ctx, x, v));
                ctx.add(x, ctx.mul(t, v))
            }));
        }
    }
    MatGroup::closure(ctx.dim(), &gens, ctx.base(), cap)
}

/// Orbit of `u` under the group generated by `gens`, in breadth-first
/// discovery order.
pub fn orbit_of_subspace(gens: &[MatQ], u: &Subspace, bf: &BaseField) -> Vec<Subspace> {
    let mut seen: HashSet<Subspace> = HashSet::from([u.clone()]);
    let mut orbit = vec![u.clone()];
    let mut i = 0;
    while i < orbit.len() {
        for g in gens {
            let w = orbit[i].image(g, bf);
            if seen.insert(w.clone()) {
                orbit.push(w);
            }
        }
        i += 1;
    }
    orbit
}

/// Orbits of `⟨gens⟩` on spread member indices, each sorted, ordered by
/// least member.
pub fn spread_orbits(gens: &[MatQ], s: &Spread, bf: &BaseField) -> Result<Vec<Vec<usize>>> {
    let perms: Vec<Vec<usize>> = gens
        .iter()
        .map(|g| match map_spread(g, s, bf) {
            SpreadAction::Permutation(p) => Ok(p),
            SpreadAction::NotStabilized { member } => Err(Error::NotStabilized { member }),
        })
        .collect::<Result<_>>()?;
    let n = s.len();
    let mut orbit_of = vec![usize::MAX; n];
    let mut orbits = Vec::new();
    for start in 0..n {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut orbit = vec![start];
        orbit_of[start] = id;
        let mut i = 0;
        while i < orbit.len() {
            for p in &perms {
                let j = p[orbit[i]];
                if orbit_of[j] == usize::MAX {
                    orbit_of[j] = id;
                    orbit.push(j);
                }
            }
            i += 1;
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    Ok(orbits)
}

/// Whether the orbit of member 0 is the whole spread; every generator must
/// stabilize the spread.
pub fn is_transitive_on_spread(g: &MatGroup, s: &Spread) -> Result<bool> {
    let orbits = spread_orbits(g.generators(), s, g.base())?;
    Ok(orbits[0].len() == s.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spread::build_spread;
    use crate::symplectic::{enumerate_sp, gram_from_trace_form, is_isometry};

    fn sp(p: u64, a: u32, m: u32) -> (TowerCtx, MatGroup) {
        let ctx = TowerCtx::new(p, a, m).unwrap();
        let form = gram_from_trace_form(&ctx);
        let g = enumerate_sp(&ctx, &form, DEFAULT_MAX_GROUP_ORDER).unwrap();
        (ctx, g)
    }

    #[test]
    fn closure_examples() {
        let ctx = TowerCtx::new(5, 1, 1).unwrap();
        let bf = ctx.base();
        let t = MatGroup::closure(2, &[MatQ::identity(2)], bf, 10).unwrap();
        assert_eq!(t.order(), 1);
        let m = MatGroup::closure(2, &[MatQ::identity(2).neg(bf)], bf, 10).unwrap();
        assert_eq!(m.order(), 2);
        let g = build_g(&ctx, 1000).unwrap();
        assert_eq!(g.order(), 12);
        assert_eq!(
            MatGroup::closure(2, &[MatQ::zero(2)], bf, 10),
            Err(Error::SingularGenerator(0))
        );
        assert!(matches!(
            MatGroup::closure(2, &[build_rho(&ctx), build_pi(&ctx)], bf, 5),
            Err(Error::ClosureOverCap { cap: 5, .. })
        ));
        let mut sorted = g.elements().to_vec();
        sorted.sort_by_key(|x| x.byte_encoding());
        assert_eq!(sorted, g.elements());
    }

    #[test]
    fn pi_and_rho() {
        for (p, a, m) in [
            (3, 1, 1),
            (5, 1, 1),
            (7, 1, 1),
            (3, 1, 2),
            (5, 1, 2),
            (3, 2, 1),
        ] {
            let ctx = TowerCtx::new(p, a, m).unwrap();
            let bf = ctx.base();
            let form = gram_from_trace_form(&ctx);
            let (pi, rho) = (build_pi(&ctx), build_rho(&ctx));
            assert!(is_isometry(&pi, &form, &ctx));
            assert!(is_isometry(&rho, &form, &ctx));
            let minus = MatQ::identity(ctx.dim()).neg(bf);
            let m = m as u64;
            assert_eq!(pi.order(1000, bf), Some(4 * m));
            assert_eq!(pi.pow(2 * m, bf), minus);
            let qm = ctx.qm();
            assert_eq!(rho.order(1000, bf), Some(qm + 1));
            assert_eq!(rho.pow((qm + 1) / 2, bf), minus);
            // Maps compose right to left, matrices left to right:
            // π∘ρ = ρ^q∘π becomes R·P = P·R^q.
            assert_eq!(rho.mul(&pi, bf), pi.mul(&rho.pow(ctx.q(), bf), bf));
        }
        let ctx = TowerCtx::new(3, 1, 2).unwrap();
        let bf = ctx.base();
        let rho = build_rho(&ctx);
        assert_eq!(rho.order(100, bf), Some(10));
        assert_eq!(rho.pow(5, bf), MatQ::identity(4).neg(bf));
    }

    #[test]
    fn orbits_and_stabilizers() {
        let ctx = TowerCtx::new(3, 1, 1).unwrap();
        let bf = ctx.base();
        let s = build_spread(&ctx);
        let g = build_g(&ctx, 1000).unwrap();
        assert_eq!(
            orbit_of_subspace(&[], s.member(0), bf),
            vec![s.member(0).clone()]
        );
        let orbit = orbit_of_subspace(g.generators(), s.member(0), bf);
        assert_eq!(orbit.len(), 4);
        assert!(is_transitive_on_spread(&g, &s).unwrap());
        let stab = g.stabilizer(s.member(0));
        assert_eq!(stab.order(), 2);
        assert_eq!(orbit.len() * stab.order(), g.order());
        let t = MatGroup::trivial(2, bf);
        assert_eq!(t.stabilizer(s.member(1)).order(), 1);

        let ctx = TowerCtx::new(5, 1, 1).unwrap();
        let bf = ctx.base();
        let s = build_spread(&ctx);
        let g = build_g(&ctx, 1000).unwrap();
        let orbit = orbit_of_subspace(g.generators(), s.member(0), bf);
        let mut idx: Vec<usize> = orbit.iter().map(|u| s.index_of(u).unwrap()).collect();
        idx.sort();
        assert_eq!(idx, vec![0, 2, 4]);
        assert!(!is_transitive_on_spread(&g, &s).unwrap());
        assert_eq!(
            spread_orbits(g.generators(), &s, bf).unwrap(),
            vec![vec![0, 2, 4], vec![1, 3, 5]]
        );
    }

    #[test]
    fn transitivity_at_even_m() {
        let ctx = TowerCtx::new(3, 1, 2).unwrap();
        let g = build_g(&ctx, 1000).unwrap();
        assert_eq!(g.order(), 40);
        assert!(is_transitive_on_spread(&g, &build_spread(&ctx)).unwrap());
    }

    #[test]
    fn solvability() {
        let (ctx, sp23) = sp(3, 1, 1);
        assert!(sp23.is_solvable());
        let g = build_g(&ctx, 1000).unwrap();
        assert!(g.derived_subgroup().is_abelian());
        let (_, sp25) = sp(5, 1, 1);
        let series = sp25.derived_series();
        assert_eq!(series.len(), 1);
        assert!(!sp25.is_solvable());
        let rho = MatGroup::closure(2, &[build_rho(&ctx)], ctx.base(), 100).unwrap();
        assert_eq!(rho.derived_series().len(), 2);
        assert!(rho.is_solvable());
    }

    #[test]
    fn sylow_subgroups() {
        let (ctx, sp25) = sp(5, 1, 1);
        let bf = ctx.base();
        let s3 = sp25.sylow(3).unwrap();
        assert_eq!(s3.order(), 3);
        assert!(s3.is_cyclic());
        let s2 = sp25.sylow(2).unwrap();
        assert_eq!(s2.order(), 8);
        assert!(!s2.is_cyclic());
        assert!(matches!(
            sp25.sylow(7),
            Err(Error::NotPrimeDivisor { r: 7, order: 120 })
        ));
        let c6 = MatGroup::closure(2, &[build_rho(&ctx)], bf, 100).unwrap();
        assert_eq!(c6.order(), 6);
        let c3 = c6.sylow(3).unwrap();
        assert_eq!(c3.order(), 3);
        assert!(c3.is_subgroup_of(&c6));
    }

    #[test]
    fn centralizer_and_normalizer_in_sp25() {
        let (ctx, sp25) = sp(5, 1, 1);
        let s3 = sp25.sylow(3).unwrap();
        let c = sp25.centralizer_in(&s3).unwrap();
        assert_eq!(c.order(), 6);
        assert!(c.is_cyclic());
        assert_eq!(sp25.normalizer_in(&s3).unwrap().order(), 12);
        let t = MatGroup::trivial(2, ctx.base());
        assert_eq!(sp25.centralizer_in(&t).unwrap().order(), 120);
        let g = build_g(&TowerCtx::new(3, 1, 1).unwrap(), 100).unwrap();
        assert_eq!(sp25.centralizer_in(&g), Err(Error::NotSubgroup));
    }

    #[test]
    fn structure_of_small_g() {
        let ctx = TowerCtx::new(5, 1, 1).unwrap();
        let g = build_g(&ctx, 1000).unwrap();
        let r = g.structure_probe();
        assert_eq!(r.order, 12);
        assert!(r.unique_involution_is_minus_identity);
        assert_eq!((r.sylow2_order, r.sylow2_cyclic), (4, true));
        let pi_group = g.cyclic_subgroup(&build_pi(&ctx));
        assert_eq!(g.normalizer_in(&pi_group).unwrap().order(), 4);
        assert!(r.order4_normalizers.iter().all(|&o| o == 4));

        let g = build_g(&TowerCtx::new(3, 1, 1).unwrap(), 1000).unwrap();
        let r = g.structure_probe();
        assert_eq!(r.involution_count, 1);
        assert_eq!((r.sylow2_order, r.sylow2_cyclic), (8, false));

        let g = build_g(&TowerCtx::new(3, 1, 2).unwrap(), 1000).unwrap();
        let r = g.structure_probe();
        assert!(r.unique_involution_is_minus_identity);
        assert_eq!((r.sylow2_order, r.sylow2_cyclic), (8, true));
    }

    #[test]
    fn subgroup_search() {
        let (ctx, sp25) = sp(5, 1, 1);
        let bf = ctx.base();
        let trivial = sp25.find_subgroups_of_order(1, 200).unwrap();
        assert_eq!(trivial.len(), 1);
        let whole = sp25.find_subgroups_of_order(120, 200).unwrap();
        assert_eq!(whole.len(), 1);
        assert_eq!(whole[0].elements(), sp25.elements());
        let s = build_spread(&ctx);
        let sl23 = sp25.find_subgroups_of_order(24, 200).unwrap();
        assert!(!sl23.is_empty());
        for h in &sl23 {
            let r = h.structure_probe();
            assert_eq!(r.involution_count, 1);
            assert_eq!((r.sylow2_order, r.sylow2_cyclic), (8, false));
            assert!(h.is_solvable());
            assert!(is_transitive_on_spread(h, &s).unwrap());
            assert_eq!(h.stabilizer(s.member(0)).order(), 4);
        }
        assert!(matches!(
            sp25.find_subgroups_of_order(7, 200),
            Err(Error::NotDivisor { .. })
        ));
        assert!(matches!(
            sp25.find_subgroups_of_order(24, 100),
            Err(Error::SubgroupSearchCap {
                order: 120,
                cap: 100
            })
        ));
        let all = sp25.all_subgroups(200).unwrap();
        // Every cyclic subgroup shows up.
        for x in sp25.elements() {
            let c = sp25.cyclic_subgroup(x);
            assert!(all.iter().any(|h| h.elements() == c.elements()));
        }
        let _ = bf;
    }

    #[test]
    fn field_reduction_stabilizer_orders() {
        for ((p, a, m), order) in [((5, 1, 1), 120), ((3, 1, 2), 1440), ((5, 1, 2), 31200)] {
            let ctx = TowerCtx::new(p, a, m).unwrap();
            let form = gram_from_trace_form(&ctx);
            let h = field_reduction_stabilizer(&ctx, DEFAULT_MAX_GROUP_ORDER).unwrap();
            assert_eq!(h.order(), order);
            let s = build_spread(&ctx);
            for x in h.generators() {
                assert!(is_isometry(x, &form, &ctx));
                assert!(matches!(
                    map_spread(x, &s, ctx.base()),
                    SpreadAction::Permutation(_)
                ));
            }
        }
    }

    #[test]
    fn sp43_normalizer_of_sylow5() {
        let (_, sp43) = sp(3, 1, 2);
        assert_eq!(sp43.order(), 51840);
        let s5 = sp43.sylow(5).unwrap();
        assert_eq!(s5.order(), 5);
        assert!(s5.is_cyclic());
        assert_eq!(sp43.normalizer_in(&s5).unwrap().order(), 40);
    }
}
