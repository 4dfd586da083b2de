//! `coordhh` command line: one subcommand per result cluster, text/JSON/CSV reports.
//!
//! Exit codes: 0 all checks passed, 1 a guaranteed check failed (or a hypothesis failed
//! under `--strict`), 2 usage or parse error, 3 evaluation or I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::convexity::{
    check_coordinated_convexity, check_hypothesis, check_partial_convexity, hh_chain_1d, ConvexityVerdict,
    SamplingPlan, DEFAULT_SAMPLES, DEFAULT_SEED,
};
use crate::cubature::{composite_integrate, convergence_table, Reference};
use crate::error::Error;
use crate::expr::Expression;
use crate::hadamard::{
    self, conjugate, holder_coefficient, verify_bounds, BoundCheck, CHAIN_SLACK,
};
use crate::quadrature::{integrate_2d, QuadratureSpec, Rectangle};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Relative slack for the identity check.
pub const IDENTITY_SLACK: f64 = 1e-8;
/// Absolute slack for the cubature certificate check.
pub const CERTIFICATE_SLACK: f64 = 1e-9;
/// Slices per direction in the partial-convexity check.
pub const PARTIAL_LINES: usize = 9;
pub const DEFAULT_SWEEP: [f64; 10] = [1.01, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0, 50.0, 100.0];

#[derive(Debug, Parser)]
#[command(name = "coordhh", version, about = "Hermite-Hadamard inequalities for co-ordinated convex functions on rectangles")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Five-term chain from the center value to the corner average
    Chain,
    /// Corner/edge/integral identity against its kernel-integral form
    Identity,
    /// Corner-derivative bounds on the identity's left side
    Bounds,
    /// Sampling checks for co-ordinated and partial convexity
    Convexity,
    /// Certified composite cubature
    Integrate,
    /// Compare the Hölder and power-mean bounds over a grid of p
    SweepP,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Chain => "chain",
            Command::Identity => "identity",
            Command::Bounds => "bounds",
            Command::Convexity => "convexity",
            Command::Integrate => "integrate",
            Command::SweepP => "sweep-p",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, clap::Args)]
struct Options {
    /// Function of x and y, e.g. "x^2*y^2"
    #[arg(short = 'f', long = "function", global = true, allow_hyphen_values = true)]
    function: Option<String>,

    /// Rectangle as a,b,c,d for [a,b] x [c,d]
    #[arg(long, global = true, default_value = "0,1,0,1", allow_hyphen_values = true)]
    rect: String,

    /// Hölder exponents p > 1 (comma separated)
    #[arg(short = 'p', global = true, value_delimiter = ',', allow_negative_numbers = true)]
    p: Vec<f64>,

    /// Power-mean exponents q >= 1 (comma separated)
    #[arg(short = 'q', global = true, value_delimiter = ',', allow_negative_numbers = true)]
    q: Vec<f64>,

    /// Tile counts m,n for integrate
    #[arg(long, global = true, default_value = "4,4")]
    tiles: String,

    /// Convergence levels for integrate (m = n = 2^k, k < levels)
    #[arg(long, global = true)]
    levels: Option<usize>,

    /// Panels per axis for all quadratures
    #[arg(long, global = true)]
    panels: Option<usize>,

    /// Gauss-Legendre nodes per panel
    #[arg(long, global = true)]
    nodes: Option<usize>,

    /// Samples for convexity checks
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Write the report here instead of standard output
    #[arg(short = 'o', global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Treat failed hypothesis checks as failures (exit 1)
    #[arg(long, global = true)]
    strict: bool,
}

/// Fully resolved run configuration, echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub function: String,
    pub rect: [f64; 4],
    pub quadrature: QuadratureSpec,
    pub p_list: Vec<f64>,
    pub q_list: Vec<f64>,
    pub tiles: [usize; 2],
    pub levels: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Guaranteed by a verified hypothesis or unconditionally; failure exits 1.
    Check,
    /// Reported only; its hypothesis did not pass.
    Advisory,
    /// A hypothesis check; failure exits 1 only under `--strict`.
    Hypothesis,
}

/// `lhs <relation> rhs` within `slack`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub relation: &'static str,
    pub role: Role,
}

impl Verdict {
    fn le(name: impl Into<String>, lhs: f64, rhs: f64, slack: f64, role: Role) -> Self {
        Self {
            name: name.into(),
            pass: lhs <= rhs + slack,
            lhs,
            rhs,
            slack,
            relation: "<=",
            role,
        }
    }

    fn close(name: impl Into<String>, lhs: f64, rhs: f64, slack: f64, role: Role) -> Self {
        Self {
            name: name.into(),
            pass: (lhs - rhs).abs() <= slack,
            lhs,
            rhs,
            slack,
            relation: "==",
            role,
        }
    }

    fn convexity(name: impl Into<String>, v: &ConvexityVerdict, role: Role) -> Self {
        Self {
            name: name.into(),
            pass: v.passed,
            lhs: v.worst_violation,
            rhs: v.tolerance,
            slack: 0.0,
            relation: "<=",
            role,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub version: &'static str,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: RunConfig,
    pub results: Value,
    pub verdicts: Vec<Verdict>,
    pub meta: Meta,
    #[serde(skip)]
    lines: Vec<(String, String)>,
    #[serde(skip)]
    table: Option<Table>,
}

#[derive(Debug, Clone, PartialEq)]
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Cell {
    Count(usize),
    Num(f64),
}

impl Cell {
    fn full(self) -> String {
        match self {
            Cell::Count(n) => n.to_string(),
            Cell::Num(v) => full(v),
        }
    }

    fn short(self) -> String {
        match self {
            Cell::Count(n) => n.to_string(),
            Cell::Num(v) => short(v),
        }
    }
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        let strict = self.config.strict;
        let failed = self.verdicts.iter().any(|v| {
            !v.pass && (v.role == Role::Check || (strict && v.role == Role::Hypothesis))
        });
        if failed {
            EXIT_CHECK_FAILED
        } else {
            EXIT_OK
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.render_csv(),
            Format::Text => self.render_text(),
        }
    }

    fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if let Some(table) = &self.table {
            w.write_record(&table.header).expect("in-memory csv");
            for row in &table.rows {
                w.write_record(row.iter().map(|c| c.full())).expect("in-memory csv");
            }
        } else {
            w.write_record(["name", "pass", "lhs", "rhs", "slack", "relation", "role"])
                .expect("in-memory csv");
            for v in &self.verdicts {
                let role = match v.role {
                    Role::Check => "check",
                    Role::Advisory => "advisory",
                    Role::Hypothesis => "hypothesis",
                };
                w.write_record([
                    v.name.clone(),
                    v.pass.to_string(),
                    full(v.lhs),
                    full(v.rhs),
                    full(v.slack),
                    v.relation.to_string(),
                    role.to_string(),
                ])
                .expect("in-memory csv");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    fn render_text(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "{}: f(x, y) = {} on [{}, {}] x [{}, {}]\n",
            self.command, c.function, c.rect[0], c.rect[1], c.rect[2], c.rect[3]
        );
        let width = self.lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.lines {
            out.push_str(&format!("  {k:<width$}  {v}\n"));
        }
        if let Some(table) = &self.table {
            out.push('\n');
            let cells: Vec<Vec<String>> =
                table.rows.iter().map(|r| r.iter().map(|c| c.short()).collect()).collect();
            let widths: Vec<usize> = (0..table.header.len())
                .map(|k| cells.iter().map(|r| r[k].len()).chain([table.header[k].len()]).max().unwrap_or(0))
                .collect();
            let line = |items: Vec<&str>| {
                let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
                format!("  {}\n", padded.join("  "))
            };
            out.push_str(&line(table.header.clone()));
            for row in &cells {
                out.push_str(&line(row.iter().map(String::as_str).collect()));
            }
        }
        if !self.verdicts.is_empty() {
            out.push('\n');
        }
        for v in &self.verdicts {
            let status = match (v.pass, v.role) {
                (true, _) => "PASS",
                (false, Role::Check) => "FAIL",
                (false, Role::Advisory) => "FAIL (unguaranteed)",
                (false, Role::Hypothesis) => "FAIL (hypothesis)",
            };
            out.push_str(&format!(
                "  {status:<4}  {}: {} {} {}\n",
                v.name,
                short(v.lhs),
                v.relation,
                short(v.rhs)
            ));
        }
        out
    }
}

/// Shortest representation that parses back to the same double.
fn full(v: f64) -> String {
    format!("{v:?}")
}

/// Five significant digits for human-readable output.
pub fn short(v: f64) -> String {
    if v == 0.0 {
        return "0.0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{v:.4e}");
    }
    let decimals = (4 - mag).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.push('0');
        }
    } else {
        s.push_str(".0");
    }
    s
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(p) => CliError::Usage(format!("cannot parse function: {p}")),
            Error::InvalidArgument(m) => CliError::Usage(m),
            Error::Eval(ev) => CliError::Runtime(format!("evaluation failed: {ev}")),
        }
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, n: usize, what: &str) -> Result<Vec<T>, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(CliError::Usage(format!("{what} needs {n} comma-separated values, got \"{text}\"")));
    }
    parts
        .iter()
        .map(|p| p.parse::<T>().map_err(|_| CliError::Usage(format!("bad number \"{p}\" in {what}"))))
        .collect()
}

fn resolve(cli: &Cli) -> Result<(RunConfig, Expression, Rectangle, QuadratureSpec), CliError> {
    let o = &cli.opts;
    let function = o
        .function
        .clone()
        .ok_or_else(|| CliError::Usage("missing required option -f/--function".into()))?;
    let expr = Expression::parse(&function).map_err(|e| CliError::from(Error::from(e)))?;
    let r: Vec<f64> = parse_list(&o.rect, 4, "--rect")?;
    let rect = Rectangle::new(r[0], r[1], r[2], r[3])?;
    let t: Vec<usize> = parse_list(&o.tiles, 2, "--tiles")?;
    let mut spec = QuadratureSpec::default();
    if let Some(k) = o.panels {
        spec.panels_1d = k;
        spec.panels_2d_per_axis = k;
    }
    if let Some(k) = o.nodes {
        spec.nodes_per_panel = k;
    }
    spec.validate()?;
    if let Some(p) = o.p.iter().find(|p| !(**p > 1.0) || !p.is_finite()) {
        return Err(CliError::Usage(format!("-p values must be finite and > 1, got {p}")));
    }
    if let Some(q) = o.q.iter().find(|q| !(**q >= 1.0) || !q.is_finite()) {
        return Err(CliError::Usage(format!("-q values must be finite and >= 1, got {q}")));
    }
    if t[0] == 0 || t[1] == 0 {
        return Err(CliError::Usage("--tiles values must be >= 1".into()));
    }
    if o.samples == 0 {
        return Err(CliError::Usage("--samples must be >= 1".into()));
    }
    if o.levels == Some(0) {
        return Err(CliError::Usage("--levels must be >= 1".into()));
    }
    let config = RunConfig {
        subcommand: cli.command.name(),
        function: expr.to_string(),
        rect: [r[0], r[1], r[2], r[3]],
        quadrature: spec,
        p_list: o.p.clone(),
        q_list: o.q.clone(),
        tiles: [t[0], t[1]],
        levels: o.levels,
        samples: o.samples,
        seed: o.seed,
        output: o.output.clone(),
        format: o.format,
        strict: o.strict,
    };
    Ok((config, expr, rect, spec))
}

struct Outcome {
    results: Value,
    verdicts: Vec<Verdict>,
    lines: Vec<(String, String)>,
    table: Option<Table>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            results: json!({}),
            verdicts: Vec::new(),
            lines: Vec::new(),
            table: None,
        }
    }

    fn line(&mut self, key: impl Into<String>, v: f64) {
        self.lines.push((key.into(), short(v)));
    }
}

fn role_given(hypothesis_passed: bool) -> Role {
    if hypothesis_passed {
        Role::Check
    } else {
        Role::Advisory
    }
}

fn bound_role(b: &BoundCheck) -> Role {
    role_given(b.guaranteed())
}

fn run_chain(f: &Expression, rect: &Rectangle, spec: &QuadratureSpec, plan: &SamplingPlan) -> crate::Result<Outcome> {
    let convex = check_coordinated_convexity(f, rect, plan)?;
    let rep = hadamard::chain(f, rect, spec, CHAIN_SLACK)?;
    let mut out = Outcome::new();
    let labels = [
        "L1 center value",
        "L2 midline mean",
        "L3 integral mean",
        "L4 edge mean",
        "L5 corner average",
    ];
    for (label, v) in labels.iter().zip(rep.values()) {
        out.line(*label, v);
    }
    out.verdicts.push(Verdict::convexity("f is co-ordinated convex", &convex, Role::Hypothesis));
    let tol = rep.slack * (1.0 + rep.corner.abs());
    for (i, link) in rep.links.iter().enumerate() {
        out.verdicts.push(Verdict::le(
            format!("L{} <= L{}", i + 1, i + 2),
            link.lower,
            link.upper,
            tol,
            role_given(convex.passed),
        ));
    }
    out.results = json!({
        "L1": rep.center,
        "L2": rep.midline,
        "L3": rep.integral_mean,
        "L4": rep.edge_mean,
        "L5": rep.corner,
        "convexity": convex,
    });
    Ok(out)
}

fn run_identity(f: &Expression, rect: &Rectangle, spec: &QuadratureSpec) -> crate::Result<Outcome> {
    let lhs = hadamard::identity_lhs(f, rect, spec)?;
    let rhs = hadamard::identity_rhs(f, rect, spec)?;
    let mut out = Outcome::new();
    out.line("lhs (corners + mean - A)", lhs);
    out.line("rhs (area/4 * kernel integral)", rhs);
    out.line("|lhs - rhs|", (lhs - rhs).abs());
    out.verdicts.push(Verdict::close(
        "identity lhs == rhs",
        lhs,
        rhs,
        IDENTITY_SLACK * (1.0 + lhs.abs()),
        Role::Check,
    ));
    out.results = json!({ "lhs": lhs, "rhs": rhs, "abs_difference": (lhs - rhs).abs() });
    Ok(out)
}

fn run_bounds(
    f: &Expression,
    rect: &Rectangle,
    spec: &QuadratureSpec,
    p_list: &[f64],
    q_list: &[f64],
    plan: &SamplingPlan,
) -> crate::Result<Outcome> {
    let p_list: Vec<f64> = if p_list.is_empty() { vec![2.0] } else { p_list.to_vec() };
    let rep = verify_bounds(f, rect, spec, &p_list, q_list, Some(plan))?;
    let mut out = Outcome::new();
    out.line("lhs_abs", rep.lhs_abs);
    out.line("bound21", rep.bound21.value);
    for pair in &rep.pairs {
        out.line(format!("bound23 (q={})", short(pair.q)), pair.bound23.value);
        out.line(format!("bound22 (p={})", short(pair.p)), pair.bound22.value);
    }
    for extra in &rep.extra_q {
        out.line(format!("bound23 (q={})", short(extra.q)), extra.bound23.value);
    }

    let hyp = |q: f64, passed: Option<bool>| Verdict {
        name: format!("|f_xy|^{} is co-ordinated convex", short(q)),
        pass: passed.unwrap_or(false),
        lhs: if passed == Some(true) { 0.0 } else { 1.0 },
        rhs: 0.0,
        slack: 0.0,
        relation: "<=",
        role: Role::Hypothesis,
    };
    out.verdicts.push(hyp(1.0, rep.bound21.hypothesis_passed));
    out.verdicts.push(Verdict::le("lhs_abs <= bound21", rep.lhs_abs, rep.bound21.value, hadamard::BOUND_SLACK, bound_role(&rep.bound21)));
    for pair in &rep.pairs {
        let (p, q) = (short(pair.p), short(pair.q));
        if pair.q != 1.0 {
            out.verdicts.push(hyp(pair.q, pair.bound22.hypothesis_passed));
        }
        out.verdicts.push(Verdict::le(format!("lhs_abs <= bound23(q={q})"), rep.lhs_abs, pair.bound23.value, hadamard::BOUND_SLACK, bound_role(&pair.bound23)));
        out.verdicts.push(Verdict::le(format!("lhs_abs <= bound22(p={p})"), rep.lhs_abs, pair.bound22.value, hadamard::BOUND_SLACK, bound_role(&pair.bound22)));
        out.verdicts.push(Verdict::le(format!("ordering bound23(q={q}) <= bound22(p={p})"), pair.bound23.value, pair.bound22.value, 0.0, Role::Check));
    }
    for extra in &rep.extra_q {
        let q = short(extra.q);
        out.verdicts.push(hyp(extra.q, extra.bound23.hypothesis_passed));
        out.verdicts.push(Verdict::le(format!("lhs_abs <= bound23(q={q})"), rep.lhs_abs, extra.bound23.value, hadamard::BOUND_SLACK, bound_role(&extra.bound23)));
    }
    out.results = serde_json::to_value(&rep).expect("bound report serializes");
    Ok(out)
}

fn run_convexity(
    f: &Expression,
    rect: &Rectangle,
    spec: &QuadratureSpec,
    q_list: &[f64],
    plan: &SamplingPlan,
) -> crate::Result<Outcome> {
    let coordinated = check_coordinated_convexity(f, rect, plan)?;
    let partial = check_partial_convexity(f, rect, PARTIAL_LINES, &SamplingPlan {
        n_samples: plan.n_samples.div_ceil(2 * PARTIAL_LINES).max(1),
        ..*plan
    })?;
    let (mx, my) = rect.center();
    let slice_x = hh_chain_1d(|x| Ok(f.eval(x, my)?), rect.a(), rect.b(), spec)?;
    let slice_y = hh_chain_1d(|y| Ok(f.eval(mx, y)?), rect.c(), rect.d(), spec)?;

    let mut out = Outcome::new();
    out.line("co-ordinated: samples", coordinated.samples_tested as f64);
    out.line("co-ordinated: worst violation", coordinated.worst_violation);
    out.line("partial: samples", partial.samples_tested as f64);
    out.line("partial: worst violation", partial.worst_violation);
    out.verdicts.push(Verdict::convexity("f is co-ordinated convex", &coordinated, Role::Check));
    out.verdicts.push(Verdict::convexity("partial mappings of f are convex", &partial, Role::Check));
    let role = role_given(coordinated.passed);
    for (axis, c) in [("x", &slice_x), ("y", &slice_y)] {
        let (l, r) = c.holds(CHAIN_SLACK);
        let tol = CHAIN_SLACK * (1.0 + c.right.abs());
        out.verdicts.push(Verdict { pass: l, ..Verdict::le(format!("midline slice in {axis}: value at midpoint <= mean"), c.left, c.mid, tol, role) });
        out.verdicts.push(Verdict { pass: r, ..Verdict::le(format!("midline slice in {axis}: mean <= endpoint average"), c.mid, c.right, tol, role) });
    }
    let mut hypotheses = Vec::new();
    for &q in q_list {
        let v = check_hypothesis(f, rect, q, plan)?;
        out.verdicts.push(Verdict::convexity(format!("|f_xy|^{} is co-ordinated convex", short(q)), &v, Role::Check));
        hypotheses.push(json!({ "q": q, "verdict": v }));
    }
    out.results = json!({
        "coordinated": coordinated,
        "partial": partial,
        "midline_slice_x": slice_x,
        "midline_slice_y": slice_y,
        "hypotheses": hypotheses,
    });
    Ok(out)
}

fn run_integrate(
    f: &Expression,
    rect: &Rectangle,
    spec: &QuadratureSpec,
    tiles: [usize; 2],
    levels: Option<usize>,
    plan: &SamplingPlan,
) -> crate::Result<Outcome> {
    let reference = integrate_2d(f, rect, &spec.refined(4))?;
    let cert = composite_integrate(f, rect, tiles[0], tiles[1], spec, Some(plan))?;
    let error = (cert.estimate - reference).abs();
    let mut out = Outcome::new();
    out.line("estimate", cert.estimate);
    out.line("error_bound", cert.error_bound);
    out.line("reference (4x panels)", reference);
    out.line("|estimate - reference|", error);
    out.verdicts.push(Verdict {
        name: "|f_xy| is co-ordinated convex on every tile".into(),
        pass: cert.hypothesis_checked,
        lhs: if cert.hypothesis_checked { 0.0 } else { 1.0 },
        rhs: 0.0,
        slack: 0.0,
        relation: "<=",
        role: Role::Hypothesis,
    });
    let role = role_given(cert.hypothesis_checked);
    out.verdicts.push(Verdict::le(
        format!("certificate {}x{}", tiles[0], tiles[1]),
        error,
        cert.error_bound,
        CERTIFICATE_SLACK,
        role,
    ));
    let mut table_json = Value::Null;
    if let Some(levels) = levels {
        let rows = convergence_table(f, rect, levels, spec, Reference::Value(reference))?;
        let mut table = Table {
            header: vec!["m", "n", "estimate", "error_bound", "true_error"],
            rows: Vec::new(),
        };
        for r in &rows {
            let e = r.true_error.unwrap_or(f64::NAN);
            table.rows.push(vec![Cell::Count(r.m), Cell::Count(r.n), Cell::Num(r.estimate), Cell::Num(r.error_bound), Cell::Num(e)]);
            out.verdicts.push(Verdict::le(format!("convergence level {}x{}", r.m, r.n), e, r.error_bound, CERTIFICATE_SLACK, role));
        }
        table_json = serde_json::to_value(&rows).expect("rows serialize");
        out.table = Some(table);
    }
    out.results = json!({
        "certified": cert,
        "reference": reference,
        "true_error": error,
        "convergence": table_json,
    });
    Ok(out)
}

/// Rows `(p, q, 1/(p+1)^(2/p), bound22(p), bound23(q), bound23/bound22)`.
fn run_sweep(f: &Expression, rect: &Rectangle, p_list: &[f64]) -> crate::Result<Outcome> {
    let grid: Vec<f64> = if p_list.is_empty() { DEFAULT_SWEEP.to_vec() } else { p_list.to_vec() };
    let corners = hadamard::corner_derivatives(f, rect)?;
    let mut out = Outcome::new();
    let mut table = Table {
        header: vec!["p", "q", "coefficient", "bound22", "bound23", "ratio"],
        rows: Vec::new(),
    };
    let mut rows_json = Vec::new();
    for &p in &grid {
        let q = conjugate(p);
        let coefficient = holder_coefficient(p);
        let b22 = hadamard::bound22_from_corners(rect, &corners, p)?;
        let b23 = hadamard::bound23_from_corners(rect, &corners, q)?;
        let ratio = if b22 == 0.0 { f64::NAN } else { b23 / b22 };
        table.rows.push([p, q, coefficient, b22, b23, ratio].map(Cell::Num).to_vec());
        rows_json.push(json!({ "p": p, "q": q, "coefficient": coefficient, "bound22": b22, "bound23": b23, "ratio": ratio }));
        let ps = short(p);
        out.verdicts.push(Verdict {
            pass: coefficient > 0.25 && coefficient < 1.0,
            ..Verdict::le(format!("1/4 < coefficient(p={ps}) < 1"), coefficient, 1.0, 0.0, Role::Check)
        });
        out.verdicts.push(Verdict::le(format!("bound23(q) <= bound22(p={ps})"), b23, b22, 0.0, Role::Check));
    }
    out.results = json!({ "corner_derivatives": corners, "rows": rows_json });
    out.table = Some(table);
    Ok(out)
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.parse().ok()) {
        return t;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn build_report(cli: &Cli) -> Result<Report, CliError> {
    let (config, f, rect, spec) = resolve(cli)?;
    let plan = SamplingPlan::with_samples(config.samples, config.seed);
    let outcome = match cli.command {
        Command::Chain => run_chain(&f, &rect, &spec, &plan),
        Command::Identity => run_identity(&f, &rect, &spec),
        Command::Bounds => run_bounds(&f, &rect, &spec, &config.p_list, &config.q_list, &plan),
        Command::Convexity => run_convexity(&f, &rect, &spec, &config.q_list, &plan),
        Command::Integrate => run_integrate(&f, &rect, &spec, config.tiles, config.levels, &plan),
        Command::SweepP => run_sweep(&f, &rect, &config.p_list),
    }?;
    Ok(Report {
        command: cli.command.name(),
        config,
        results: outcome.results,
        verdicts: outcome.verdicts,
        meta: Meta {
            version: env!("CARGO_PKG_VERSION"),
            timestamp: timestamp(),
        },
        lines: outcome.lines,
        table: outcome.table,
    })
}

/// Parse `argv` (including the program name) and run, writing the report to `out` or the
/// `-o` path and diagnostics to `err`.
pub fn run_with<I, T, W, E>(argv: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let report = match build_report(&cli) {
        Ok(r) => r,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_USAGE;
        }
        Err(CliError::Runtime(m)) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_RUNTIME;
        }
    };
    let text = report.render(report.config.format);
    let written = match &report.config.output {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => out.write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write report: {e}");
        return EXIT_RUNTIME;
    }
    for v in &report.verdicts {
        if !v.pass {
            let note = match v.role {
                Role::Check => "check failed",
                Role::Advisory => "bound not guaranteed (hypothesis unverified)",
                Role::Hypothesis => "hypothesis unverified",
            };
            let _ = writeln!(err, "warning: {note}: {}", v.name);
        }
    }
    report.exit_code()
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
