//! The field-reduction spread `{ω^i · F_{q^m} : 0 ≤ i ≤ q^m}` as canonical
//! `F_q`-subspaces of `F_q^{2m}`, plus its text format.
//!
//! File format: a header line `p a m q`, then one line per member holding
//! the member index followed by its `m` reduced basis rows. A row is written
//! as `2m·a` comma-separated integers: each `F_q` coordinate expands into
//! its `a` base-`p` digits, low first.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gf::{BaseField, TowerCtx};
use crate::linalg::{MatQ, Subspace, VecQ};
use crate::symplectic::{is_totally_isotropic, GramForm};
use crate::verify::VerifyReport;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spread {
    p: u64,
    a: u32,
    m: u32,
    members: Vec<Subspace>,
    index: HashMap<Subspace, usize>,
}

impl Spread {
    /// Wraps a list of subspaces without checking any invariant; see
    /// [`validate_spread`]. Duplicates keep their first index for lookup.
    pub fn from_members(ctx: &TowerCtx, members: Vec<Subspace>) -> Spread {
        let mut index = HashMap::new();
        for (i, u) in members.iter().enumerate() {
            index.entry(u.clone()).or_insert(i);
        }
        Spread {
            p: ctx.p(),
            a: ctx.a(),
            m: ctx.m(),
            members,
            index,
        }
    }

    pub fn params(&self) -> (u64, u32, u32) {
        (self.p, self.a, self.m)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Subspace] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &Subspace {
        &self.members[i]
    }

    pub fn index_of(&self, u: &Subspace) -> Option<usize> {
        self.index.get(u).copied()
    }

    pub fn to_text(&self, ctx: &TowerCtx) -> String {
        let bf = ctx.base();
        let mut out = format!("{} {} {} {}\n", self.p, self.a, self.m, ctx.q());
        for (i, u) in self.members.iter().enumerate() {
            write!(out, "{i}").unwrap();
            for row in u.basis() {
                let digits: Vec<String> = row
                    .iter()
                    .flat_map(|&x| bf.digits(x))
                    .map(|d| d.to_string())
                    .collect();
                write!(out, " {}", digits.join(",")).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format, rebuilding the tower from the header.
    pub fn parse(text: &str) -> Result<(TowerCtx, Spread)> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let nums: Vec<u64> = header
            .split_whitespace()
            .map(|t| parse_int(t, hline))
            .collect::<Result<_>>()?;
        let [p, a, m, q] = nums[..] else {
            return Err(Error::Parse {
                line: hline,
                msg: "header must be `p a m q`".into(),
            });
        };
        let ctx = TowerCtx::new(p, a as u32, m as u32)?;
        if ctx.q() != q {
            return Err(Error::Parse {
                line: hline,
                msg: format!("q = {q} but p^a = {}", ctx.q()),
            });
        }
        let bf = ctx.base();
        let n = ctx.dim();
        let width = n * a as usize;
        let mut members = Vec::new();
        for (line, l) in lines {
            let mut tokens = l.split_whitespace();
            let idx = parse_int(tokens.next().unwrap(), line)?;
            if idx != members.len() as u64 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected member {}, found {idx}", members.len()),
                });
            }
            let rows: Vec<VecQ> = tokens
                .map(|t| {
                    let digits: Vec<u32> = t
                        .split(',')
                        .map(|d| match parse_int(d, line)? {
                            x if x < p => Ok(x as u32),
                            x => Err(Error::Parse {
                                line,
                                msg: format!("digit {x} out of range"),
                            }),
                        })
                        .collect::<Result<_>>()?;
                    if digits.len() != width {
                        return Err(Error::Parse {
                            line,
                            msg: format!("row has {} digits, expected {width}", digits.len()),
                        });
                    }
                    Ok(digits
                        .chunks(a as usize)
                        .map(|c| bf.from_digits(c))
                        .collect())
                })
                .collect::<Result<_>>()?;
            members.push(Subspace::span(n, &rows, bf)?);
        }
        let spread = Spread::from_members(&ctx, members);
        Ok((ctx, spread))
    }
}

fn parse_int(t: &str, line: usize) -> Result<u64> {
    t.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad integer `{t}`"),
    })
}

/// Member `i` is `ω^i · F_{q^m}`, for `i = 0, …, q^m`.
pub fn build_spread(ctx: &TowerCtx) -> Spread {
    let bf = ctx.base();
    let sub = ctx.subfield_elements(ctx.m()).expect("m divides 2m");
    let members = (0..=ctx.qm())
        .map(|i| {
            let w = ctx.omega_pow(i);
            let vecs: Vec<VecQ> = sub.iter().map(|&y| bf.coords(ctx, ctx.mul(w, y))).collect();
            Subspace::span(ctx.dim(), &vecs, bf).expect("coordinates have length 2m")
        })
        .collect();
    Spread::from_members(ctx, members)
}

/// Checks member count, dimension and isotropy, pairwise trivial
/// intersection, and the vector count of the union.
pub fn validate_spread(s: &Spread, form: &GramForm, ctx: &TowerCtx) -> VerifyReport {
    let bf = ctx.base();
    let (q, m) = (ctx.q() as u128, ctx.m());
    let mut witnesses = Vec::new();
    let mut ok = true;

    let expected = ctx.qm() as usize + 1;
    if s.len() == expected {
        witnesses.push(format!("member count {expected} = q^m + 1"));
    } else {
        ok = false;
        witnesses.push(format!("member count {} != q^m + 1 = {expected}", s.len()));
    }

    match s.members.iter().enumerate().find_map(|(i, u)| {
        if u.dim() != m as usize {
            return Some(format!("member {i} has dimension {} != m = {m}", u.dim()));
        }
        let b = u.basis();
        for (j, x) in b.iter().enumerate() {
            for y in &b[j + 1..] {
                let f = form.eval(x, y, ctx);
                if f != 0 {
                    return Some(format!(
                        "member {i} is not totally isotropic: f({x:?}, {y:?}) = {f}"
                    ));
                }
            }
        }
        debug_assert!(is_totally_isotropic(u, form, ctx));
        None
    }) {
        Some(w) => {
            ok = false;
            witnesses.push(w);
        }
        None => witnesses.push(format!("every member is a totally isotropic {m}-space")),
    }

    let clash = (0..s.len()).find_map(|i| {
        (i + 1..s.len()).find_map(|j| {
            let d = s.members[i]
                .intersect(&s.members[j], bf)
                .expect("same ambient")
                .dim();
            (d > 0).then(|| format!("members {i} and {j} meet in dimension {d}"))
        })
    });
    match clash {
        Some(w) => {
            ok = false;
            witnesses.push(w);
        }
        None => witnesses.push("pairwise intersections are zero".into()),
    }

    // Nonzero vectors of pairwise trivially meeting members are disjoint.
    let covered: u128 = 1 + s
        .members
        .iter()
        .map(|u| q.pow(u.dim() as u32) - 1)
        .sum::<u128>();
    let total = q.pow(2 * m);
    if covered == total {
        witnesses.push(format!("union covers {total} = q^(2m) vectors"));
    } else {
        ok = false;
        witnesses.push(format!("union count {covered} != q^(2m) = {total}"));
    }

    let (p, a, m) = s.params();
    VerifyReport::finished("spread.valid", (p, a, m), ok, witnesses)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpreadAction {
    /// `perm[i]` is the index of the image of member `i`.
    Permutation(Vec<usize>),
    NotStabilized {
        member: usize,
    },
}

pub fn map_spread(mat: &MatQ, s: &Spread, bf: &BaseField) -> SpreadAction {
    let mut perm = Vec::with_capacity(s.len());
    for (i, u) in s.members.iter().enumerate() {
        match s.index_of(&u.image(mat, bf)) {
            Some(j) => perm.push(j),
            None => return SpreadAction::NotStabilized { member: i },
        }
    }
    SpreadAction::Permutation(perm)
}

/// Indices of the members mapped onto themselves.
pub fn fixed_members(mat: &MatQ, s: &Spread, bf: &BaseField) -> Result<Vec<usize>> {
    match map_spread(mat, s, bf) {
        SpreadAction::Permutation(p) => Ok(p
            .iter()
            .enumerate()
            .filter(|(i, j)| i == *j)
            .map(|(i, _)| i)
            .collect()),
        SpreadAction::NotStabilized { member } => Err(Error::NotStabilized { member }),
    }
}
