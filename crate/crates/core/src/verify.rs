//! Registry of named checks, each run against one tower and reported as
//! pass, fail or skipped with witnesses.

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::TowerCtx;
use crate::grp::{
    build_g, build_pi, build_rho, field_reduction_stabilizer, is_transitive_on_spread,
    spread_orbits, MatGroup, DEFAULT_MAX_GROUP_ORDER, DEFAULT_MAX_SUBGROUP_SEARCH,
};
use crate::linalg::{
    commutant_dimension, eigenspace, i4_scalar, minimal_polynomial, MatQ, Subspace,
};
use crate::spread::{
    build_spread, fixed_members, map_spread, validate_spread, Spread, SpreadAction,
};
use crate::symplectic::{
    enumerate_sp, gram_from_trace_form, gram_via_field_reduction, is_isometry,
    is_totally_isotropic, sp_order, GramForm,
};
use crate::zsig::{fermat_exception_check, zsigmondy_primes};

pub const REPORT_VERSION: &str = "1";

/// Check ids in registry order.
pub const CHECK_IDS: [&str; 16] = [
    "spread.valid",
    "form.nondegenerate",
    "pi_rho.isometry",
    "pi_rho.relation",
    "pi_rho.orders",
    "G.structure",
    "G.transitive",
    "zsig.irreducible",
    "zsig.commutant",
    "sp.centralizer",
    "sp.normalizer",
    "eig.decompose",
    "eig.dims",
    "fix.count",
    "exception.q5",
    "fermat.flag",
];

pub const DEFAULT_MATRIX: [(u64, u32, u32); 8] = [
    (3, 1, 1),
    (5, 1, 1),
    (7, 1, 1),
    (11, 1, 1),
    (13, 1, 1),
    (3, 1, 2),
    (5, 1, 2),
    (3, 2, 1),
];

/// How many `σ` with `σ² = −I` the eigenspace checks look at when there
/// are more than this.
pub const EIG_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_group_order: usize,
    pub max_subgroup_search: usize,
    /// Record wall-clock times; otherwise `elapsed_ms` is 0 so that reports
    /// are reproducible byte for byte.
    pub timings: bool,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_group_order: DEFAULT_MAX_GROUP_ORDER,
            max_subgroup_search: DEFAULT_MAX_SUBGROUP_SEARCH,
            timings: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub id: String,
    pub p: u64,
    pub a: u32,
    pub m: u32,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub witnesses: Vec<String>,
    pub elapsed_ms: u64,
}

impl VerifyReport {
    pub fn finished(
        id: &str,
        params: (u64, u32, u32),
        ok: bool,
        mut witnesses: Vec<String>,
    ) -> Self {
        if !ok && witnesses.is_empty() {
            witnesses.push("check failed without a recorded witness".into());
        }
        VerifyReport {
            id: id.into(),
            p: params.0,
            a: params.1,
            m: params.2,
            status: if ok { Status::Pass } else { Status::Fail },
            reason: None,
            witnesses,
            elapsed_ms: 0,
        }
    }

    pub fn skipped(
        id: &str,
        params: (u64, u32, u32),
        reason: String,
        witnesses: Vec<String>,
    ) -> Self {
        VerifyReport {
            id: id.into(),
            p: params.0,
            a: params.1,
            m: params.2,
            status: Status::Skipped,
            reason: Some(reason),
            witnesses,
            elapsed_ms: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Params {
    pub p: u64,
    pub a: u32,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FullReport {
    pub version: &'static str,
    pub params: Vec<Params>,
    pub checks: Vec<VerifyReport>,
}

impl FullReport {
    pub fn new(params: &[(u64, u32, u32)], checks: Vec<VerifyReport>) -> Self {
        FullReport {
            version: REPORT_VERSION,
            params: params.iter().map(|&(p, a, m)| Params { p, a, m }).collect(),
            checks,
        }
    }

    pub fn any_fail(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

enum Outcome {
    Done(bool, Vec<String>),
    Skip(String, Vec<String>),
}

use Outcome::{Done, Skip};

/// Lazily built objects shared by all checks on one tower.
pub struct Env {
    ctx: TowerCtx,
    caps: Caps,
    form: GramForm,
    spread: Spread,
    g: OnceCell<Result<MatGroup>>,
    sp: OnceCell<Result<MatGroup>>,
    fr_stab: OnceCell<Result<MatGroup>>,
}

impl Env {
    pub fn new(ctx: TowerCtx, caps: Caps) -> Env {
        let form = gram_from_trace_form(&ctx);
        let spread = build_spread(&ctx);
        Env {
            ctx,
            caps,
            form,
            spread,
            g: OnceCell::new(),
            sp: OnceCell::new(),
            fr_stab: OnceCell::new(),
        }
    }

    pub fn ctx(&self) -> &TowerCtx {
        &self.ctx
    }

    fn params(&self) -> (u64, u32, u32) {
        (self.ctx.p(), self.ctx.a(), self.ctx.m())
    }

    fn g(&self) -> std::result::Result<&MatGroup, String> {
        self.g
            .get_or_init(|| build_g(&self.ctx, self.caps.max_group_order))
            .as_ref()
            .map_err(|e| format!("G: {e}"))
    }

    fn sp(&self) -> std::result::Result<&MatGroup, String> {
        self.sp
            .get_or_init(|| enumerate_sp(&self.ctx, &self.form, self.caps.max_group_order))
            .as_ref()
            .map_err(|e| format!("Sp({}, {}): {e}", self.ctx.dim(), self.ctx.q()))
    }

    fn fr_stab(&self) -> std::result::Result<&MatGroup, String> {
        self.fr_stab
            .get_or_init(|| field_reduction_stabilizer(&self.ctx, self.caps.max_group_order))
            .as_ref()
            .map_err(|e| format!("field-reduction stabilizer: {e}"))
    }

    /// The spread stabilizer to search: inside `Sp(2m, q)` when that is
    /// enumerable, otherwise the field-reduction stabilizer. The string
    /// names the scope.
    fn spread_stabilizer(&self) -> std::result::Result<(Vec<MatQ>, String), String> {
        let bf = self.ctx.base();
        match self.sp() {
            Ok(sp) => {
                let stab: Vec<MatQ> = sp
                    .elements()
                    .iter()
                    .filter(|x| {
                        matches!(
                            map_spread(x, &self.spread, bf),
                            SpreadAction::Permutation(_)
                        )
                    })
                    .cloned()
                    .collect();
                let scope = format!(
                    "scope: full spread stabilizer in Sp({}, {}), order {}",
                    self.ctx.dim(),
                    self.ctx.q(),
                    stab.len()
                );
                Ok((stab, scope))
            }
            Err(sp_err) => {
                let h = self.fr_stab()?;
                let scope = format!(
                    "scope: {sp_err}; searched the field-reduction stabilizer SL(2, {})·⟨π⟩ of order {} instead",
                    self.ctx.qm(),
                    h.order()
                );
                Ok((h.elements().to_vec(), scope))
            }
        }
    }

    fn seed(&self) -> u64 {
        let (p, a, m) = self.params();
        p << 16 | (a as u64) << 8 | m as u64
    }
}

pub fn run_check(id: &str, ctx: &TowerCtx, caps: Caps) -> Result<VerifyReport> {
    let env = Env::new(ctx.clone(), caps);
    run_in(&env, id)
}

/// Runs one registered check against a prepared environment.
pub fn run_in(env: &Env, id: &str) -> Result<VerifyReport> {
    let start = Instant::now();
    let outcome = match id {
        "spread.valid" => {
            let mut r = validate_spread(&env.spread, &env.form, &env.ctx);
            if env.caps.timings {
                r.elapsed_ms = start.elapsed().as_millis() as u64;
            }
            return Ok(r);
        }
        "form.nondegenerate" => check_form(env),
        "pi_rho.isometry" => check_isometry(env),
        "pi_rho.relation" => check_relation(env),
        "pi_rho.orders" => check_orders(env),
        "G.structure" => check_g_structure(env),
        "G.transitive" => check_transitive(env),
        "zsig.irreducible" => check_zsig(env, false),
        "zsig.commutant" => check_zsig(env, true),
        "sp.centralizer" => check_sp_local(env, false),
        "sp.normalizer" => check_sp_local(env, true),
        "eig.decompose" => check_eig(env, false),
        "eig.dims" => check_eig(env, true),
        "fix.count" => check_fix_count(env),
        "exception.q5" => check_q5(env),
        "fermat.flag" => check_fermat(env),
        other => return Err(Error::UnknownCheck(other.into())),
    };
    let mut r = match outcome {
        Done(ok, w) => VerifyReport::finished(id, env.params(), ok, w),
        Skip(reason, w) => VerifyReport::skipped(id, env.params(), reason, w),
    };
    if env.caps.timings {
        r.elapsed_ms = start.elapsed().as_millis() as u64;
    }
    Ok(r)
}

/// Every registered check on every tower, in matrix then registry order.
/// A tower that cannot be built yields one failing report.
pub fn run_all(params: &[(u64, u32, u32)], caps: Caps) -> Vec<VerifyReport> {
    let mut out = Vec::new();
    for &(p, a, m) in params {
        match TowerCtx::new(p, a, m) {
            Ok(ctx) => {
                let env = Env::new(ctx, caps);
                out.extend(
                    CHECK_IDS
                        .iter()
                        .map(|id| run_in(&env, id).expect("registered id")),
                );
            }
            Err(e) => out.push(VerifyReport::finished(
                "tower",
                (p, a, m),
                false,
                vec![format!("cannot build tower: {e}")],
            )),
        }
    }
    out
}

struct Tally {
    ok: bool,
    witnesses: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            ok: true,
            witnesses: Vec::new(),
        }
    }

    fn check(&mut self, cond: bool, what: impl Into<String>) {
        let what = what.into();
        if cond {
            self.witnesses.push(what);
        } else {
            self.ok = false;
            self.witnesses.push(format!("FAILED: {what}"));
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.witnesses.push(what.into());
    }

    fn done(self) -> Outcome {
        Done(self.ok, self.witnesses)
    }
}

fn check_form(env: &Env) -> Outcome {
    let ctx = &env.ctx;
    let bf = ctx.base();
    let g = env.form.gram();
    let n = ctx.dim();
    let mut t = Tally::new();
    let alternating =
        (0..n).all(|i| g.get(i, i) == 0 && (0..n).all(|j| g.get(i, j) == bf.neg(g.get(j, i))));
    t.check(alternating, "Gram matrix is alternating");
    t.check(
        g.rank(bf) == n,
        format!("Gram matrix has rank {} = 2m", g.rank(bf)),
    );
    t.check(
        gram_via_field_reduction(ctx) == env.form,
        "trace form equals Tr_{q^m→q} of the field-reduction form",
    );
    t.done()
}

fn check_isometry(env: &Env) -> Outcome {
    let mut t = Tally::new();
    t.check(
        is_isometry(&build_pi(&env.ctx), &env.form, &env.ctx),
        "π preserves the form",
    );
    t.check(
        is_isometry(&build_rho(&env.ctx), &env.form, &env.ctx),
        "ρ preserves the form",
    );
    t.done()
}

fn check_relation(env: &Env) -> Outcome {
    let ctx = &env.ctx;
    let bf = ctx.base();
    let (pi, rho) = (build_pi(ctx), build_rho(ctx));
    let mut t = Tally::new();
    // Row vectors: the map π∘ρ has matrix R·P, and ρ^q∘π has P·R^q.
    t.check(
        rho.mul(&pi, bf) == pi.mul(&rho.pow(ctx.q(), bf), bf),
        format!("πρ = ρ^{}π", ctx.q()),
    );
    t.done()
}

fn check_orders(env: &Env) -> Outcome {
    let ctx = &env.ctx;
    let bf = ctx.base();
    let m = ctx.m() as u64;
    let qm = ctx.qm();
    let minus = MatQ::identity(ctx.dim()).neg(bf);
    let (pi, rho) = (build_pi(ctx), build_rho(ctx));
    let mut t = Tally::new();
    let eps = ctx.epsilon();
    t.check(ctx.frobenius(eps, m as i64) == ctx.neg(eps), "ε^{q^m} = −ε");
    let mu_order = ctx.order(ctx.mu());
    t.check(
        mu_order == Some(qm + 1),
        format!("order(μ) = {mu_order:?}, expected {}", qm + 1),
    );
    let po = pi.order(64 * m, bf);
    t.check(
        po == Some(4 * m),
        format!("order(π) = {po:?}, expected {}", 4 * m),
    );
    t.check(pi.pow(2 * m, bf) == minus, format!("π^{} = −I", 2 * m));
    let ro = rho.order(qm + 1, bf);
    t.check(
        ro == Some(qm + 1),
        format!("order(ρ) = {ro:?}, expected {}", qm + 1),
    );
    t.check(
        rho.pow((qm + 1) / 2, bf) == minus,
        format!("ρ^{} = −I", (qm + 1) / 2),
    );
    t.done()
}

fn check_g_structure(env: &Env) -> Outcome {
    let ctx = &env.ctx;
    let bf = ctx.base();
    let (q, m) = (ctx.q(), ctx.m() as u64);
    let g = match env.g() {
        Ok(g) => g,
        Err(e) => return Skip(e, vec![]),
    };
    let probe = g.structure_probe();
    let sylow_note = format!(
        "Sylow 2-subgroup of order {} is {}",
        probe.sylow2_order,
        if probe.sylow2_cyclic {
            "cyclic"
        } else {
            "not cyclic"
        }
    );
    if q % 4 != 1 && m % 2 != 0 {
        return Skip(
            "hypothesis excluded: q ≡ 3 mod 4 and m odd".into(),
            vec![
                format!("|G| = {}", g.order()),
                sylow_note,
                format!("{} involutions", probe.involution_count),
                format!("order-4 normalizer orders {:?}", probe.order4_normalizers),
            ],
        );
    }
    let mut t = Tally::new();
    let expected = 2 * m * (ctx.qm() + 1);
    t.check(
        g.order() as u64 == expected,
        format!("|G| = {} = 2m(q^m+1)", g.order()),
    );
    let rho = build_rho(ctx);
    let a = g.cyclic_subgroup(&rho.mul(&rho, bf));
    let b = g.cyclic_subgroup(&build_pi(ctx));
    t.check(
        a.order() as u64 == (ctx.qm() + 1) / 2 && a.order() % 2 == 1,
        format!("|A| = |⟨ρ²⟩| = {} is odd", a.order()),
    );
    t.check(
        b.order() as u64 == 4 * m,
        format!("|B| = |⟨π⟩| = {}", b.order()),
    );
    t.check(a.intersection(&b).order() == 1, "A ∩ B = 1");
    t.check(a.is_normal_in(g), "A is normal in G");
    t.check(a.order() * b.order() == g.order(), "|A||B| = |G|");
    t.check(probe.sylow2_cyclic, sylow_note);
    t.check(
        probe.unique_involution_is_minus_identity,
        format!(
            "{} involution(s); unique involution is −I",
            probe.involution_count
        ),
    );
    t.check(
        !probe.order4_normalizers.is_empty()
            && probe.order4_normalizers.iter().all(|&o| o as u64 == 4 * m),
        format!(
            "order-4 subgroup normalizers have orders {:?}, expected {}",
            probe.order4_normalizers,
            4 * m
        ),
    );
    t.done()
}

fn check_transitive(env: &Env) -> Outcome {
    let g = match env.g() {
        Ok(g) => g,
        Err(e) => return Skip(e, vec![]),
    };
    let expected = env.ctx.q() % 4 == 3;
    let orbits = match spread_orbits(g.generators(), &env.spread, env.ctx.base()) {
        Ok(o) => o,
        Err(e) => return Done(false, vec![e.to_string()]),
    };
    let observed = is_transitive_on_spread(g, &env.spread).expect("orbits computed");
    let sizes: Vec<usize> = orbits.iter().map(Vec::len).collect();
    let mut t = Tally::new();
    t.check(
        observed == expected,
        format!(
            "observed transitive = {observed}, expected = {expected} (q mod 4 = {})",
            env.ctx.q() % 4
        ),
    );
    t.note(format!("orbit sizes {sizes:?}"));
    if !observed {
        let half = (env.ctx.qm() as usize + 1) / 2;
        t.check(
            sizes.iter().all(|&s| s == half),
            format!("every orbit has size (q^m+1)/2 = {half}"),
        );
    }
    t.done()
}

/// Elements of order `r` to test: all of those in `⟨ρ⟩`, whose Sylow
/// `r`-subgroup is a full Sylow subgroup of `Sp(2m, q)`, plus those of a
/// Sylow `r`-subgroup of the enumerated `Sp(2m, q)` when it fits.
fn order_r_elements(env: &Env, r: u64) -> (Vec<MatQ>, String) {
    let ctx = &env.ctx;
    let bf = ctx.base();
    let rho = build_rho(ctx);
    let n = ctx.qm() + 1;
    let mut elems: Vec<MatQ> = (1..n)
        .filter(|k| n / crate::gf::gcd(*k, n) == r)
        .map(|k| rho.pow(k, bf))
        .collect();
    let scope = match env.sp() {
        Ok(sp) => {
            let s = sp.sylow(r).expect("r divides |Sp|");
            let extra: Vec<MatQ> = s
                .elements()
                .iter()
                .filter(|x| sp.element_order(x) == r)
                .cloned()
                .collect();
            let k = extra.len();
            elems.extend(extra);
            format!(
                "r = {r}: {} elements of order r in ⟨ρ⟩ and {k} in a Sylow {r}-subgroup of Sp",
                elems.len() - k
            )
        }
        Err(e) => format!("r = {r}: {} elements of order r in ⟨ρ⟩; {e}", elems.len()),
    };
    (elems, scope)
}

fn check_zsig(env: &Env, commutant: bool) -> Outcome {
    let ctx = &env.ctx;
    let bf = ctx.base();
    let n = ctx.dim();
    let z = match zsigmondy_primes(ctx.q(), n as u32) {
        Ok(z) => z,
        Err(e) => return Done(false, vec![e.to_string()]),
    };
    let sp_ord = sp_order(ctx.q(), ctx.m());
    let primes: Vec<u64> = z
        .primes()
        .into_iter()
        .filter(|&r| sp_ord % r as u128 == 0)
        .collect();
    if primes.is_empty() {
        return Done(
            true,
            vec![format!(
                "vacuous: q^{n} − 1 has no Zsigmondy prime dividing |Sp|"
            )],
        );
    }
    let mut t = Tally::new();
    for r in primes {
        let (elems, scope) = order_r_elements(env, r);
        t.note(scope);
        let mut bad = None;
        for x in &elems {
            let mp = minimal_polynomial(x, bf);
            let deg = mp.degree().unwrap_or(0);
            let good = if commutant {
                deg == n && commutant_dimension(x, bf) == n
            } else {
                deg == n && mp.is_irreducible(bf)
            };
            if !good {
                bad = Some((deg, x.clone()));
                break;
            }
        }
        let what = if commutant {
            "commutant dimension = deg(minimal polynomial) = 2m"
        } else {
            "minimal polynomial irreducible of degree 2m"
        };
        match bad {
            None => t.check(
                !elems.is_empty(),
                format!("r = {r}: {what} for all {} elements", elems.len()),
            ),
            Some((deg, x)) => t.check(false, format!("r = {r}: degree {deg} for {x:?}")),
        }
    }
    t.done()
}

fn check_sp_local(env: &Env, normalizer: bool) -> Outcome {
    let ctx = &env.ctx;
    let (q, m) = (ctx.q(), ctx.m() as u64);
    let z = match zsigmondy_primes(q, ctx.dim() as u32) {
        Ok(z) => z,
        Err(e) => return Done(false, vec![e.to_string()]),
    };
    if z.primes.is_empty() {
        return Done(
            true,
            vec![format!(
                "vacuous: q^{} − 1 has no Zsigmondy prime",
                ctx.dim()
            )],
        );
    }
    let sp = match env.sp() {
        Ok(sp) => sp,
        Err(e) => return Skip(e, vec![]),
    };
    let hypothesis = q % 4 == 1 || m % 2 == 0;
    let mut t = Tally::new();
    for r in z.primes() {
        let s = sp.sylow(r).expect("Zsigmondy primes divide |Sp|");
        let c = sp.centralizer_in(&s).expect("subgroup");
        if !normalizer {
            t.check(
                c.order() as u64 == ctx.qm() + 1 && c.is_cyclic(),
                format!(
                    "r = {r}: C(R) is cyclic of order {} (q^m+1 = {})",
                    c.order(),
                    ctx.qm() + 1
                ),
            );
            continue;
        }
        let nr = sp.normalizer_in(&s).expect("subgroup");
        let quot = nr.order() / c.order();
        t.check(
            nr.order() % c.order() == 0 && (2 * m) % quot as u64 == 0,
            format!("r = {r}: |N(R)/C(R)| = {quot} divides 2m = {}", 2 * m),
        );
        let full = 2 * m * (ctx.qm() + 1);
        if hypothesis {
            t.check(
                nr.order() as u64 == full,
                format!("r = {r}: |N(R)| = {} = 2m(q^m+1)", nr.order()),
            );
        } else {
            t.note(format!(
                "r = {r}: |N(R)| = {} (2m(q^m+1) = {full}; equality not claimed here)",
                nr.order()
            ));
        }
    }
    t.done()
}

/// `σ` with `σ² = −I` in `pool`; with `sample`, a seeded choice of
/// [`EIG_SAMPLES`] of them when there are more.
fn minus_one_roots(env: &Env, pool: &[MatQ], sample: bool) -> (Vec<MatQ>, usize) {
    let bf = env.ctx.base();
    let minus = MatQ::identity(env.ctx.dim()).neg(bf);
    let all: Vec<MatQ> = pool
        .iter()
        .filter(|x| x.mul(x, bf) == minus)
        .cloned()
        .collect();
    let total = all.len();
    if !sample || total <= EIG_SAMPLES {
        return (all, total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(env.seed());
    let picked = all
        .choose_multiple(&mut rng, EIG_SAMPLES)
        .cloned()
        .collect();
    (picked, total)
}

fn check_eig(env: &Env, dims: bool) -> Outcome {
    let ctx = &env.ctx;
    let bf = ctx.base();
    let (n, m) = (ctx.dim(), ctx.m() as usize);
    if ctx.q() % 4 != 1 {
        return Skip("requires q ≡ 1 mod 4".into(), vec![]);
    }
    let i4 = i4_scalar(ctx).expect("q ≡ 1 mod 4");
    let mi4 = bf.neg(i4);
    let (pool, scope) = match env.sp() {
        Ok(sp) => (
            sp.elements().to_vec(),
            format!("scope: Sp({n}, {}) of order {}", ctx.q(), sp.order()),
        ),
        Err(_) => match env.spread_stabilizer() {
            Ok(x) => x,
            Err(e) => return Skip(e, vec![]),
        },
    };
    let (sigmas, total) = minus_one_roots(env, &pool, true);
    let mut t = Tally::new();
    t.note(scope);
    t.note(format!(
        "examined {} of {total} elements with σ² = −I",
        sigmas.len()
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(env.seed() ^ 0x5eed);
    let nonzero: Vec<Vec<u16>> = Subspace::whole(n)
        .vectors(bf)
        .into_iter()
        .filter(|v| v.iter().any(|&x| x != 0))
        .collect();

    let mut first_bad: Option<String> = None;
    for s in &sigmas {
        let vp = eigenspace(s, i4, bf);
        let vm = eigenspace(s, mi4, bf);
        let err = if dims {
            (vp.dim() != m || vm.dim() != m)
                .then(|| format!("dim V_i = {}, dim V_-i = {} for {s:?}", vp.dim(), vm.dim()))
        } else {
            let mut err = None;
            let whole = vp.sum(&vm, bf).unwrap();
            if whole.dim() != n || vp.intersect(&vm, bf).unwrap().dim() != 0 {
                err = Some(format!("V ≠ V_i ⊕ V_-i for {s:?}"));
            } else if !is_totally_isotropic(&vp, &env.form, ctx)
                || !is_totally_isotropic(&vm, &env.form, ctx)
            {
                err = Some(format!("eigenspace not totally isotropic for {s:?}"));
            } else {
                // A σ-invariant U spanned by the σ-orbit of a random vector.
                let v = nonzero.choose(&mut rng).expect("nonzero vectors exist");
                let u = Subspace::span(n, &[v.clone(), s.apply(v, bf)], bf).unwrap();
                let up = u.intersect(&vp, bf).unwrap();
                let um = u.intersect(&vm, bf).unwrap();
                if up.sum(&um, bf).unwrap() != u {
                    err = Some(format!("U ≠ U_i ⊕ U_-i for U = {:?}", u.basis()));
                }
            }
            err
        };
        if let Some(e) = err {
            first_bad = Some(e);
            break;
        }
    }
    let what = if dims {
        format!("both eigenspaces of dimension m = {m}")
    } else {
        "V = V_i ⊕ V_-i, both totally isotropic; sampled σ-invariant U split likewise".to_string()
    };
    match first_bad {
        None => t.check(!sigmas.is_empty(), what),
        Some(e) => t.check(false, e),
    }

    if dims {
        // Fixed spread members of σ in the spread stabilizer.
        let (stab, scope) = match env.spread_stabilizer() {
            Ok(x) => x,
            Err(e) => return Skip(e, t.witnesses),
        };
        let (sigmas, total) = minus_one_roots(env, &stab, false);
        t.note(format!(
            "fixed members: {scope}; examined {} of {total}",
            sigmas.len()
        ));
        let mut bad = None;
        for s in &sigmas {
            let fixed = fixed_members(s, &env.spread, bf).expect("stabilizes the spread");
            let split: Vec<(usize, usize)> = fixed
                .iter()
                .map(|&i| {
                    let z = env.spread.member(i);
                    (
                        z.intersect(&eigenspace(s, i4, bf), bf).unwrap().dim(),
                        z.intersect(&eigenspace(s, mi4, bf), bf).unwrap().dim(),
                    )
                })
                .collect();
            if fixed.len() > 2 {
                if m % 2 != 0 || split.iter().any(|&(x, y)| x != m / 2 || y != m / 2) {
                    bad = Some(format!(
                        "{} fixed members with eigen-splits {split:?}",
                        fixed.len()
                    ));
                    break;
                }
            } else {
                // Pairwise: dim X_i = dim Y_-i.
                for (i, &(xi, _)) in split.iter().enumerate() {
                    for (j, &(_, ym)) in split.iter().enumerate() {
                        if i != j && xi != ym {
                            bad = Some(format!("dim X_i = {xi} ≠ dim Y_-i = {ym}"));
                        }
                    }
                }
            }
        }
        match bad {
            None => t.check(
                true,
                "fixed members split as X_i ⊕ X_-i with the expected dimensions",
            ),
            Some(e) => t.check(false, e),
        }
    }
    t.done()
}

fn check_fix_count(env: &Env) -> Outcome {
    let ctx = &env.ctx;
    let bf = ctx.base();
    let m = ctx.m();
    if ctx.q() % 4 != 1 {
        return Skip("requires q ≡ 1 mod 4".into(), vec![]);
    }
    let mut pools: Vec<(Vec<MatQ>, String)> = Vec::new();
    if let Ok(g) = env.g() {
        pools.push((g.elements().to_vec(), format!("G of order {}", g.order())));
    }
    match env.spread_stabilizer() {
        Ok(x) => pools.push(x),
        Err(e) => return Skip(e, vec![]),
    }
    let big = if m % 2 == 0 {
        Some(ctx.q().pow(m / 2) as usize + 1)
    } else {
        None
    };
    let minus = MatQ::identity(ctx.dim()).neg(bf);
    let mut t = Tally::new();
    for (pool, scope) in pools {
        let mut branches: BTreeMap<usize, usize> = BTreeMap::new();
        for s in pool.iter().filter(|x| x.mul(x, bf) == minus) {
            let fixed = fixed_members(s, &env.spread, bf).expect("pool stabilizes the spread");
            *branches.entry(fixed.len()).or_insert(0) += 1;
        }
        let ok = !branches.is_empty() && branches.keys().all(|&k| k == 2 || Some(k) == big);
        t.check(
            ok,
            format!(
                "{scope}: |Ω_σ| → count {branches:?}; allowed 2{}",
                big.map_or(String::new(), |b| format!(" or {b}"))
            ),
        );
    }
    t.done()
}

fn check_q5(env: &Env) -> Outcome {
    let ctx = &env.ctx;
    let q = ctx.q();
    if ctx.m() != 1 || q % 4 != 1 {
        return Skip("applies to m = 1 with q ≡ 1 mod 4".into(), vec![]);
    }
    let order = sp_order(q, 1);
    let cap = env.caps.max_subgroup_search;
    if order > cap as u128 {
        return Skip(
            format!("|Sp(2, {q})| = {order} exceeds the subgroup-search cap of {cap}"),
            vec![],
        );
    }
    let sp = match env.sp() {
        Ok(sp) => sp,
        Err(e) => return Skip(e, vec![]),
    };
    let subs = match sp.all_subgroups(cap) {
        Ok(s) => s,
        Err(e) => return Skip(e.to_string(), vec![]),
    };
    let mut t = Tally::new();
    t.note(format!("{} subgroups of Sp(2, {q}) enumerated", subs.len()));
    let mut transitive_solvable: Vec<usize> = Vec::new();
    for h in subs.iter().filter(|h| h.order() < sp.order()) {
        if h.is_solvable()
            && is_transitive_on_spread(h, &env.spread).expect("Sp stabilizes the spread")
        {
            transitive_solvable.push(h.order());
        }
    }
    transitive_solvable.sort_unstable();
    transitive_solvable.dedup();
    t.note(format!(
        "orders of transitive solvable proper subgroups: {transitive_solvable:?}"
    ));
    if q == 5 {
        let sl23: Vec<&MatGroup> = subs.iter().filter(|h| h.order() == 24).collect();
        t.check(
            !sl23.is_empty(),
            format!("{} subgroups of order 24", sl23.len()),
        );
        let all_sig = sl23.iter().all(|h| {
            let p = h.structure_probe();
            h.is_solvable()
                && p.involution_count == 1
                && p.sylow2_order == 8
                && !p.sylow2_cyclic
                && is_transitive_on_spread(h, &env.spread).unwrap()
                && h.stabilizer(env.spread.member(0)).order() == 4
        });
        t.check(
            all_sig,
            "each is solvable with SL(2,3) signature, transitive, member stabilizer of order 4",
        );
        t.check(
            transitive_solvable.iter().all(|o| o % 24 == 0),
            "every transitive solvable proper subgroup has order divisible by 24",
        );
    } else {
        t.check(
            transitive_solvable.is_empty(),
            "no solvable proper subgroup is transitive",
        );
    }
    t.done()
}

fn check_fermat(env: &Env) -> Outcome {
    let ctx = &env.ctx;
    let m = ctx.m();
    if !m.is_power_of_two() {
        return Skip(format!("m = {m} is not a power of 2"), vec![]);
    }
    let b = m.trailing_zeros();
    let r = fermat_exception_check(ctx.q(), b);
    let mut t = Tally::new();
    t.note(format!("q^m + 1 = {} = {:?}", r.value, r.factors));
    t.check(
        r.all_zsigmondy,
        format!(
            "odd prime factors {:?} are Zsigmondy for q^{} − 1",
            r.odd_primes,
            2 * m
        ),
    );
    t.note(format!(
        "Fermat candidate 2^{} + 1 = {} ({}); exceptional configuration: {}",
        b + 1,
        r.fermat_candidate,
        if r.fermat_is_prime {
            "prime"
        } else {
            "not prime"
        },
        r.exceptional
    ));
    if m >= 2 {
        t.check(
            !r.exceptional || (ctx.q(), m) == (3, 2),
            "for m ≥ 2 the exceptional configuration occurs only at (q, m) = (3, 2)",
        );
    }
    t.done()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(id: &str, p: u64, a: u32, m: u32) -> VerifyReport {
        run_check(id, &TowerCtx::new(p, a, m).unwrap(), Caps::default()).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(run("pi_rho.relation", 3, 1, 2).status, Status::Pass);
        let r = run("G.transitive", 5, 1, 1);
        assert_eq!(r.status, Status::Pass);
        assert!(r
            .witnesses
            .iter()
            .any(|w| w.contains("observed transitive = false, expected = false")));
        assert!(r.witnesses.iter().any(|w| w == "orbit sizes [3, 3]"));
        let r = run("sp.normalizer", 3, 1, 2);
        assert_eq!(r.status, Status::Pass, "{:?}", r.witnesses);
        assert!(r.witnesses.iter().any(|w| w.contains("|N(R)| = 40")));
    }

    #[test]
    fn unknown_and_empty() {
        let ctx = TowerCtx::new(3, 1, 1).unwrap();
        assert_eq!(
            run_check("nope", &ctx, Caps::default()),
            Err(Error::UnknownCheck("nope".into()))
        );
        assert!(run_all(&[], Caps::default()).is_empty());
    }

    #[test]
    fn over_cap_skips() {
        let r = run("sp.centralizer", 5, 1, 2);
        assert_eq!(r.status, Status::Skipped);
        assert!(r.reason.unwrap().contains("9360000"));
        let r = run("G.structure", 3, 1, 1);
        assert_eq!(r.status, Status::Skipped);
        assert!(r
            .witnesses
            .iter()
            .any(|w| w == "Sylow 2-subgroup of order 8 is not cyclic"));
    }

    #[test]
    fn report_invariants_and_json() {
        let reports = run_all(&[(3, 1, 1), (5, 1, 1)], Caps::default());
        assert_eq!(reports.len(), 2 * CHECK_IDS.len());
        for r in &reports {
            match r.status {
                Status::Fail => assert!(!r.witnesses.is_empty()),
                Status::Skipped => assert!(r.reason.is_some()),
                Status::Pass => assert!(r.reason.is_none()),
            }
            assert_ne!(r.status, Status::Fail, "{r:?}");
        }
        let full = FullReport::new(&[(3, 1, 1), (5, 1, 1)], reports);
        let v: serde_json::Value = serde_json::from_str(&full.to_json()).unwrap();
        assert_eq!(v["version"], "1");
        assert_eq!(v["params"][1]["p"], 5);
        let c = &v["checks"][0];
        for key in ["id", "p", "a", "m", "status", "witnesses", "elapsed_ms"] {
            assert!(c.get(key).is_some(), "{key}");
        }
        assert_eq!(c["elapsed_ms"], 0);
    }

    #[test]
    fn q5_exception() {
        let r = run("exception.q5", 5, 1, 1);
        assert_eq!(r.status, Status::Pass, "{:?}", r.witnesses);
    }
}
