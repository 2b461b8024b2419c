//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 when a certificate is inconclusive, 1 on any
//! error (usage, diagnostics, unresolved targets, violated preconditions).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::apps::{certify_branched, certify_double, certify_gluing, Certificate, Conclusion};
use crate::develop::{self, ConcreteGraph, ConcretePolygon, Expected};
use crate::dsl::{self, Diagnostic, SourceModel};
use crate::engine::{BoundResult, DerivationNode, Engine, Invariant};
use crate::extnat::ExtNat;
use crate::facts::Family;
use crate::model::{prelude_model, Universe};

#[derive(Debug, Parser)]
#[command(name = "catbound", version, about = "Upper bounds for generalised LS category of groups")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Replace the bundled prelude with this file.
    #[arg(long, env = "CATBOUND_PRELUDE", global = true)]
    pub prelude: Option<PathBuf>,
    /// Print finite values one larger (the normalisation where cat of a
    /// point is 1). Traces are unchanged.
    #[arg(long, global = true)]
    pub literature_normalisation: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Cat,
    Gd,
    Cd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetupKind {
    Gluing,
    Double,
    Branched,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a model file.
    Validate { file: PathBuf },
    /// Bound cat_F, gd or cd of a group.
    Bound {
        file: PathBuf,
        /// Group name or expression.
        #[arg(long)]
        target: String,
        /// Family: tr, fin, am or a declared custom family.
        #[arg(long, default_value = "am")]
        family: String,
        #[arg(long, value_enum, default_value_t = Which::Cat)]
        invariant: Which,
    },
    /// Bound the topological complexity of a group.
    Tc {
        file: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// Build a ball in the Bass–Serre tree or polygon development.
    Develop {
        file: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 2)]
        radius: usize,
    },
    /// Check the curvature condition of a concrete polygon of groups.
    CheckCurvature {
        file: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// Check the hypotheses of a vanishing theorem for a manifold setup.
    Certify {
        #[arg(value_enum)]
        kind: SetupKind,
        file: PathBuf,
        #[arg(long)]
        target: String,
        /// Number of sheets, overriding the setup (branched only).
        #[arg(long)]
        d: Option<u32>,
    },
}

/// Reasons a command stops with exit status 1.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{}", render_diagnostics(.0))]
    Diagnostics(Vec<Diagnostic>),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Message(String),
}

fn render_diagnostics(ds: &[Diagnostic]) -> String {
    ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

fn msg(e: impl std::fmt::Display) -> CliError {
    CliError::Message(e.to_string())
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn parse_file(path: &Path) -> Result<SourceModel, CliError> {
    let bytes = read(path)?;
    dsl::parse_bytes(&path.display().to_string(), &bytes).map_err(CliError::Diagnostics)
}

fn load(cli: &Cli, file: &Path) -> Result<Universe, CliError> {
    let prelude = match &cli.prelude {
        Some(p) => parse_file(p)?,
        None => prelude_model(),
    };
    let user = parse_file(file)?;
    Universe::load(Some(&prelude), &user).map_err(CliError::Diagnostics)
}

/// Finite values shift by one under the literature normalisation.
fn shown(cli: &Cli, v: ExtNat) -> ExtNat {
    if cli.literature_normalisation {
        v.plus_one_saturating()
    } else {
        v
    }
}

fn emit_json(out: &mut dyn Write, v: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).map_err(msg)?;
    writeln!(out, "{text}").map_err(msg)
}

fn emit_text(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(msg)
}

#[derive(Serialize)]
struct BoundOutput<'a> {
    target: &'a str,
    invariant: Invariant,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<&'a Family>,
    value: ExtNat,
    normalisation: &'static str,
    assumed: &'a [String],
    trace: &'a DerivationNode,
}

fn assumed_block(assumptions: &[String]) -> String {
    if assumptions.is_empty() {
        return "ASSUMED: none\n".into();
    }
    let mut s = String::from("ASSUMED:\n");
    for a in assumptions {
        s.push_str(&format!("  - {a}\n"));
    }
    s
}

fn print_bound(cli: &Cli, out: &mut dyn Write, target: &str, r: &BoundResult) -> Result<(), CliError> {
    let value = shown(cli, r.value);
    match cli.format {
        Format::Json => emit_json(
            out,
            &BoundOutput {
                target,
                invariant: r.invariant,
                family: r.family.as_ref(),
                value,
                normalisation: if cli.literature_normalisation { "literature" } else { "native" },
                assumed: &r.trace.assumptions,
                trace: &r.trace,
            },
        ),
        Format::Text => {
            let name = match (&r.invariant, &r.family) {
                (Invariant::Cat, Some(f)) => format!("cat_{f}"),
                (i, _) => i.to_string(),
            };
            let mut s = format!("{name}({target}) <= {value}\n");
            s.push_str(&format!("by {} ({})\n", r.trace.rule, r.trace.cite));
            s.push_str(&assumed_block(&r.trace.assumptions));
            s.push_str("trace:\n");
            for line in r.trace.render().lines() {
                s.push_str(&format!("  {line}\n"));
            }
            emit_text(out, &s)
        }
    }
}

fn print_certificate(cli: &Cli, out: &mut dyn Write, c: &Certificate) -> Result<i32, CliError> {
    let mut c = c.clone();
    c.value = c.value.map(|v| shown(cli, v));
    match cli.format {
        Format::Json => emit_json(out, &c)?,
        Format::Text => {
            let mut s = c.render();
            if let Some(t) = &c.trace {
                s.push_str(&assumed_block(&t.assumptions));
            }
            emit_text(out, &s)?
        }
    }
    Ok(if c.conclusion == Conclusion::Inconclusive { 2 } else { 0 })
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Validate { file } => {
            let u = load(cli, file)?;
            match cli.format {
                Format::Json => emit_json(
                    out,
                    &serde_json::json!({
                        "valid": true,
                        "groups": u.atoms.len() + u.graphs.len() + u.polygons.len() + u.gcws.len(),
                        "setups": u.gluings.len() + u.doubles.len() + u.brancheds.len(),
                    }),
                )?,
                Format::Text => emit_text(out, &format!("{}: ok\n", file.display()))?,
            }
            Ok(0)
        }
        Command::Bound { file, target, family, invariant } => {
            let u = load(cli, file)?;
            let engine = Engine::new(&u);
            let g = dsl::parse_expr(target).map_err(msg)?;
            let r = match invariant {
                Which::Cat => engine.bound_cat(&g, &u.family(family).map_err(msg)?),
                Which::Gd => engine.bound_gd(&g),
                Which::Cd => engine.bound_cd(&g),
            }
            .map_err(msg)?;
            print_bound(cli, out, target, &r)?;
            Ok(0)
        }
        Command::Tc { file, target } => {
            let u = load(cli, file)?;
            let engine = Engine::new(&u);
            let g = dsl::parse_expr(target).map_err(msg)?;
            let r = engine.bound_tc(&g).map_err(msg)?;
            print_bound(cli, out, target, &r)?;
            Ok(0)
        }
        Command::Develop { file, target, radius } => {
            let u = load(cli, file)?;
            let (ball, report) = if let Some(g) = u.graphs.get(target) {
                let cg = ConcreteGraph::resolve(&u, g).map_err(msg)?;
                let ball = develop::bass_serre_ball(&u, g, *radius).map_err(msg)?;
                let report = develop::verify_stabilizers(&ball, Expected::Graph(&cg));
                (ball, report)
            } else if let Some(p) = u.polygons.get(target) {
                let cp = ConcretePolygon::resolve(&u, p).map_err(msg)?;
                let ball = develop::polygon_ball(&u, p, *radius).map_err(msg)?;
                let report = develop::verify_stabilizers(&ball, Expected::Polygon(&cp));
                (ball, report)
            } else {
                return Err(msg(format!("`{target}` is not a graph or polygon of groups")));
            };
            match cli.format {
                Format::Json => emit_json(out, &serde_json::json!({ "ball": ball, "stabilizers": report }))?,
                Format::Text => {
                    let counts: Vec<String> = (0..ball.cells.len()).map(|k| format!("{} {k}-cells", ball.count(k))).collect();
                    let mut s = format!("{} ball of radius {} around cell 0: {}\n", ball.kind, ball.radius, counts.join(", "));
                    s.push_str(&ball.adjacency_list());
                    s.push_str(&format!(
                        "stabilizers: {} checked, {}\n",
                        report.checked,
                        if report.ok() { "all match".to_string() } else { report.mismatches.join("; ") }
                    ));
                    emit_text(out, &s)?
                }
            }
            Ok(if report.ok() { 0 } else { 1 })
        }
        Command::CheckCurvature { file, target } => {
            let u = load(cli, file)?;
            let p = u.polygon(target).map_err(msg)?;
            let report = develop::check_curvature(&u, p).map_err(msg)?;
            match cli.format {
                Format::Json => emit_json(out, &report)?,
                Format::Text => {
                    let mut s = format!("curvature condition of {target}: {}\n", if report.holds { "holds" } else { "fails" });
                    for v in &report.vertices {
                        s.push_str(&format!(
                            "  vertex {}: edge groups meet in {:?}, face group image {:?}\n",
                            v.vertex, v.intersection, v.face_image
                        ));
                    }
                    if let Some((v, w)) = &report.witness {
                        s.push_str(&format!("witness: vertex {v}, intersection {w:?}\n"));
                    }
                    emit_text(out, &s)?
                }
            }
            Ok(0)
        }
        Command::Certify { kind, file, target, d } => {
            let u = load(cli, file)?;
            let engine = Engine::new(&u);
            let kind_name = format!("{kind:?}").to_lowercase();
            let missing = || msg(format!("no {kind_name} setup named `{target}`"));
            let cert = match kind {
                SetupKind::Gluing => certify_gluing(&engine, u.gluings.get(target).ok_or_else(missing)?),
                SetupKind::Double => certify_double(&engine, u.doubles.get(target).ok_or_else(missing)?),
                SetupKind::Branched => certify_branched(&engine, u.brancheds.get(target).ok_or_else(missing)?, *d),
            };
            print_certificate(cli, out, &cert.map_err(msg)?)
        }
    }
}
