//! Command-line front end. Exit codes: 0 when everything passes, 1 when a
//! check or validation fails, 2 for usage and construction errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::gf::TowerCtx;
use crate::grp::{build_g, DEFAULT_MAX_GROUP_ORDER, DEFAULT_MAX_SUBGROUP_SEARCH};
use crate::spread::{build_spread, validate_spread, Spread};
use crate::symplectic::gram_from_trace_form;
use crate::verify::{run_all, run_check, Caps, FullReport, Status, VerifyReport, DEFAULT_MATRIX};

#[derive(Debug, Parser)]
#[command(
    name = "symspread",
    version,
    about = "Symplectic spreads and their isometry groups"
)]
pub struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_GROUP_ORDER)]
    max_group_order: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_SUBGROUP_SEARCH)]
    max_subgroup_search: usize,
    /// Record wall-clock times in reports (makes output nondeterministic).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
struct Tower {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    a: u32,
    #[arg(long)]
    m: u32,
}

impl Tower {
    fn ctx(self) -> Result<TowerCtx> {
        TowerCtx::new(self.p, self.a, self.m)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the modulus, ω, ε, λ and μ.
    Tower(Tower),
    #[command(subcommand)]
    Spread(SpreadCmd),
    #[command(subcommand)]
    Group(GroupCmd),
    /// Run one check or the whole registry.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
enum SpreadCmd {
    /// Build the field-reduction spread and print or write it.
    Build {
        #[command(flatten)]
        tower: Tower,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a spread file.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum GroupCmd {
    /// Order and structure of G = ⟨π, ρ⟩.
    Info(Tower),
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, conflicts_with = "all", requires_all = ["p", "a", "m"])]
    check: Option<String>,
    #[arg(long, required_unless_present = "check")]
    all: bool,
    #[arg(long, requires = "all")]
    matrix: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    a: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
}

/// Runs the CLI and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let caps = Caps {
        max_group_order: cli.max_group_order,
        max_subgroup_search: cli.max_subgroup_search,
        timings: cli.timings,
    };
    let io = |e: std::io::Error| Error::Parse {
        line: 0,
        msg: e.to_string(),
    };
    match &cli.command {
        Command::Tower(t) => {
            let ctx = t.ctx()?;
            let c = |x| ctx.coeffs(x);
            if cli.json {
                let v = json!({
                    "p": ctx.p(), "a": ctx.a(), "m": ctx.m(), "q": ctx.q(),
                    "modulus": ctx.modulus(),
                    "omega": c(ctx.omega()),
                    "epsilon": c(ctx.epsilon()),
                    "lambda": c(ctx.lambda()),
                    "mu": c(ctx.mu()),
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap()).map_err(io)?;
            } else {
                writeln!(out, "F_{} ⊂ F_{} ⊂ F_{}", ctx.p(), ctx.q(), ctx.size()).map_err(io)?;
                writeln!(out, "modulus {:?}", ctx.modulus()).map_err(io)?;
                for (name, x) in [
                    ("omega", ctx.omega()),
                    ("epsilon", ctx.epsilon()),
                    ("lambda", ctx.lambda()),
                    ("mu", ctx.mu()),
                ] {
                    writeln!(out, "{name} {:?}", c(x)).map_err(io)?;
                }
            }
            Ok(0)
        }
        Command::Spread(SpreadCmd::Build { tower, out: path }) => {
            let ctx = tower.ctx()?;
            let text = build_spread(&ctx).to_text(&ctx);
            match path {
                Some(p) => std::fs::write(p, text).map_err(io)?,
                None => write!(out, "{text}").map_err(io)?,
            }
            Ok(0)
        }
        Command::Spread(SpreadCmd::Validate { input }) => {
            let text = std::fs::read_to_string(input).map_err(io)?;
            let (ctx, s) = Spread::parse(&text)?;
            let r = validate_spread(&s, &gram_from_trace_form(&ctx), &ctx);
            print_reports(out, cli.json, &[(ctx.p(), ctx.a(), ctx.m())], vec![r])
        }
        Command::Group(GroupCmd::Info(t)) => {
            let ctx = t.ctx()?;
            let g = build_g(&ctx, caps.max_group_order)?;
            let probe = g.structure_probe();
            if cli.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&probe).unwrap()).map_err(io)?;
            } else {
                writeln!(out, "|G| = {}", probe.order).map_err(io)?;
                writeln!(out, "element orders {:?}", probe.order_histogram).map_err(io)?;
                writeln!(out, "involutions {}", probe.involution_count).map_err(io)?;
                writeln!(
                    out,
                    "unique involution is -I: {}",
                    probe.unique_involution_is_minus_identity
                )
                .map_err(io)?;
                writeln!(
                    out,
                    "Sylow 2-subgroup order {}, cyclic: {}",
                    probe.sylow2_order, probe.sylow2_cyclic
                )
                .map_err(io)?;
                writeln!(out, "cyclic: {}", probe.is_cyclic).map_err(io)?;
                writeln!(
                    out,
                    "order-4 normalizer orders {:?}",
                    probe.order4_normalizers
                )
                .map_err(io)?;
            }
            Ok(0)
        }
        Command::Verify(v) => {
            if let Some(id) = &v.check {
                let params = (v.p.unwrap(), v.a.unwrap(), v.m.unwrap());
                let ctx = TowerCtx::new(params.0, params.1, params.2)?;
                let r = run_check(id, &ctx, caps)?;
                return print_reports(out, cli.json, &[params], vec![r]);
            }
            let matrix = match &v.matrix {
                Some(path) => parse_matrix(&std::fs::read_to_string(path).map_err(io)?)?,
                None => DEFAULT_MATRIX.to_vec(),
            };
            let reports = run_all(&matrix, caps);
            print_reports(out, cli.json, &matrix, reports)
        }
    }
}

fn print_reports(
    out: &mut dyn Write,
    json: bool,
    params: &[(u64, u32, u32)],
    reports: Vec<VerifyReport>,
) -> Result<i32> {
    let full = FullReport::new(params, reports);
    let io = |e: std::io::Error| Error::Parse {
        line: 0,
        msg: e.to_string(),
    };
    if json {
        writeln!(out, "{}", full.to_json()).map_err(io)?;
    } else {
        for r in &full.checks {
            let status = match r.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skipped => "skipped",
            };
            write!(out, "{:<20} ({},{},{}) {status}", r.id, r.p, r.a, r.m).map_err(io)?;
            if let Some(reason) = &r.reason {
                write!(out, ": {reason}").map_err(io)?;
            }
            writeln!(out).map_err(io)?;
            for w in &r.witnesses {
                writeln!(out, "    {w}").map_err(io)?;
            }
        }
    }
    Ok(if full.any_fail() { 1 } else { 0 })
}

/// One `p a m` triple per line; `#` starts a comment.
pub fn parse_matrix(text: &str) -> Result<Vec<(u64, u32, u32)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Parse {
            line: i + 1,
            msg: format!("expected `p a m`, got `{line}`"),
        };
        let nums: Vec<u64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match nums[..] {
            [p, a, m] => out.push((p, a as u32, m as u32)),
            _ => return Err(bad()),
        }
    }
    Ok(out)
}
