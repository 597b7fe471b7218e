//! Command-line front end: parses arguments, runs one pipeline and renders
//! the run report as text or JSON.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use flatpencil::coxeter::{coxeter_pencil, MAX_RANK};
use flatpencil::exactalg::parse::parse_expr;
use flatpencil::exactalg::{fmt_rational, CheckMode, Matrix, QPoly};
use flatpencil::frobenius::{certify_forward, to_flat_pencil, FrobeniusData};
use flatpencil::geometry::{check_flat_pencil, check_quasihomogeneous, Connection, ContraMetric, PencilData};
use flatpencil::io::{frobenius_file, parse_frobenius, parse_pencil, pencil_file, to_json, PencilInput};
use flatpencil::loopspace::{
    bracket_from_metric, central_charge, check_compatibility, recursion_step, virasoro_check, HydroBracket,
};
use flatpencil::reconstruction::reconstruct_frobenius;
use flatpencil::report::{Certificate, Status};
use flatpencil::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "flatpencil",
    version,
    about = "Exact certificates for Frobenius manifolds and flat pencils of metrics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Sampled identity testing at seeded random points instead of exact normalization.
    #[arg(long, global = true, requires = "seed")]
    pub fast: bool,
    /// Seed for --fast.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for report.json and produced files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of the text summary.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Frobenius JSON inputs.
    #[command(subcommand)]
    Frobenius(FrobeniusCmd),
    /// Pencil JSON inputs.
    #[command(subcommand)]
    Pencil(PencilCmd),
    /// Flat pencil and Frobenius structure on the orbit space of a Coxeter group.
    Coxeter {
        #[arg(long = "type", value_enum)]
        group: GroupType,
        #[arg(long)]
        rank: usize,
    },
    /// Hydrodynamic Poisson brackets.
    #[command(subcommand)]
    Bracket(BracketCmd),
}

#[derive(Subcommand, Debug)]
pub enum FrobeniusCmd {
    /// WDVV, quasihomogeneity and every forward certificate.
    Check { file: PathBuf },
    /// Emit the flat pencil (intersection form, inverse of eta).
    Pencil { file: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum PencilCmd {
    /// Flat pencil conditions, and quasihomogeneity when tau is given.
    Check { file: PathBuf },
    /// Reconstruct the Frobenius structure of a quasihomogeneous pencil.
    Reconstruct { file: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum BracketCmd {
    /// Brackets of both members of a pencil.
    Emit { file: PathBuf },
    /// Compatibility of the two brackets of a pencil.
    Compat { file: PathBuf },
    /// Virasoro form of the brackets of T = 2 tau/(1-d) (Frobenius JSON).
    Virasoro { file: PathBuf },
    /// Iterate the bihamiltonian recursion from each flat coordinate, or from --h0.
    Recurse {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long)]
        h0: Option<String>,
    },
    /// Central charge from the spectrum of Lambda (Frobenius JSON).
    CentralCharge {
        file: PathBuf,
        /// Compare with 12 rho^2 for the root system A_k.
        #[arg(long)]
        coxeter_rank: Option<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum GroupType {
    #[value(name = "A", alias = "a")]
    A,
}

#[derive(Serialize, Debug, Clone)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub inputs_sha256: String,
    pub check: CheckMode,
    pub status: Status,
    pub certificates: Vec<Certificate>,
    pub results: Map<String, Value>,
    /// Produced documents, also written to `--out` when given.
    pub outputs: Map<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.status == Status::Fail {
            EXIT_FAIL
        } else {
            EXIT_PASS
        }
    }
}

/// A failure that stops the run before a report exists.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Io(m) => m,
        }
    }
}

#[derive(Default)]
struct Outcome {
    certificates: Vec<Certificate>,
    results: Map<String, Value>,
    outputs: Map<String, Value>,
}

impl Outcome {
    fn extend(&mut self, prefix: &str, certs: impl IntoIterator<Item = Certificate>) {
        self.certificates.extend(certs.into_iter().map(|mut c| {
            if !prefix.is_empty() {
                c.name = format!("{prefix}: {}", c.name);
            }
            c
        }));
    }

    /// Unwraps a pipeline stage; an error becomes a failing certificate.
    fn stage<T>(&mut self, name: &str, mode: CheckMode, r: flatpencil::Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.certificates.push(Certificate::fail(name, mode, e.to_string()));
                None
            }
        }
    }

    fn result(&mut self, key: &str, v: Value) {
        self.results.insert(key.into(), v);
    }
}

fn read_input(path: &Path, digest: &mut Sha256) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    digest.update(&bytes);
    String::from_utf8(bytes).map_err(|_| CliError::Input(format!("{}: not UTF-8", path.display())))
}

fn input_error(path: &Path, e: Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn load_frobenius(path: &Path, digest: &mut Sha256) -> Result<FrobeniusData, CliError> {
    parse_frobenius(&read_input(path, digest)?).map_err(|e| input_error(path, e))
}

fn load_pencil(path: &Path, digest: &mut Sha256) -> Result<PencilInput, CliError> {
    parse_pencil(&read_input(path, digest)?).map_err(|e| input_error(path, e))
}

fn mode_of(opts: &GlobalOpts) -> Result<CheckMode, CliError> {
    match (opts.fast, opts.seed) {
        (false, _) => Ok(CheckMode::Exact),
        (true, Some(seed)) => Ok(CheckMode::sampled(seed)),
        (true, None) => Err(CliError::Usage("--fast requires --seed".into())),
    }
}

fn rational_matrix(m: &Matrix) -> Value {
    Value::from(
        m.iter()
            .map(|r| r.iter().map(fmt_rational).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    )
}

fn metric_value(g: &ContraMetric) -> Value {
    Value::from(
        g.entries()
            .iter()
            .map(|r| r.iter().map(|p| p.to_string()).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    )
}

/// Nonzero `Γ_k^{ij}` keyed `"k,i,j"` (1-based).
fn connection_value(c: &Connection) -> Value {
    let n = c.n();
    let mut m = Map::new();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let v = c.get(k, i, j);
                if !v.is_zero() {
                    m.insert(format!("{},{},{}", k + 1, i + 1, j + 1), Value::from(v.to_string()));
                }
            }
        }
    }
    Value::Object(m)
}

fn doc<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn frobenius_check(m: &FrobeniusData, mode: CheckMode, out: &mut Outcome) {
    if let Some(r) = out.stage("forward construction", mode, certify_forward(m, mode)) {
        out.extend("", r.certificates);
        out.result("d", Value::from(fmt_rational(&m.d)));
        out.result("intersection_form", metric_value(&r.pencil.g1));
        out.result("charges_a", rational_matrix(&r.constants.a));
    }
}

fn frobenius_pencil(m: &FrobeniusData, mode: CheckMode, out: &mut Outcome) {
    if let Some(r) = out.stage("forward construction", mode, certify_forward(m, mode)) {
        out.extend("", r.certificates);
        out.outputs.insert("pencil.json".into(), doc(&pencil_file(&r.pencil)));
    }
}

fn pencil_check(p: &PencilData, mode: CheckMode, out: &mut Outcome) {
    if let Some(r) = out.stage("flat pencil", mode, check_flat_pencil(p, mode)) {
        out.extend("", r.certificates);
    }
    if p.tau.is_none() {
        out.certificates
            .push(Certificate::skipped("quasihomogeneity", "no tau given"));
        return;
    }
    if let Some(q) = out.stage("quasihomogeneity", mode, check_quasihomogeneous(p, mode)) {
        out.result("d", Value::from(fmt_rational(&q.d)));
        out.result("euler", Value::from(q.euler.to_string()));
        out.result("unity", Value::from(q.unity.to_string()));
        out.extend("", q.certificates);
    }
}

fn pencil_reconstruct(p: &PencilData, mode: CheckMode, out: &mut Outcome) {
    let Some(r) = out.stage("reconstruction", mode, reconstruct_frobenius(p, mode)) else {
        return;
    };
    out.extend("", r.certificates);
    out.result("mode", doc(&r.mode));
    out.result("d", Value::from(fmt_rational(&r.operators.d)));
    out.result("potential", Value::from(r.potential.to_string()));
    out.result("transform", rational_matrix(&r.transform));
    out.result("k", rational_matrix(&r.operators.k));
    out.result("r", rational_matrix(&r.operators.r));
    out.result("lambda", rational_matrix(&r.operators.lambda));
    if let Some(s) = &r.operators.spectrum {
        out.result("spectrum", doc(s));
    }
    out.outputs
        .insert("frobenius.json".into(), doc(&frobenius_file(&r.frobenius)));
}

fn coxeter(rank: usize, mode: CheckMode, out: &mut Outcome) {
    let Some((cp, r)) = out.stage("coxeter pipeline", mode, coxeter_pencil(rank, mode)) else {
        return;
    };
    out.extend("orbit space", cp.certificates);
    out.extend("reconstruction", r.certificates);
    out.result("h", Value::from(cp.chart.h));
    out.result("degrees", Value::from(cp.chart.degrees.clone()));
    out.result("d", Value::from(fmt_rational(&cp.d)));
    out.result("unity_scale", Value::from(fmt_rational(&cp.unity_scale)));
    out.result(
        "variables",
        Value::from("invariants in chart coordinates z_i written t_i; flat coordinates in p_a written t_a"),
    );
    out.result(
        "invariants",
        Value::from(cp.chart.invariants.iter().map(QPoly::to_string).collect::<Vec<_>>()),
    );
    out.result(
        "flat_coordinates",
        Value::from(cp.flat_coordinates.iter().map(QPoly::to_string).collect::<Vec<_>>()),
    );
    out.result("potential", Value::from(r.potential.to_string()));
    out.result("lambda", rational_matrix(&r.operators.lambda));
    out.outputs.insert("pencil.json".into(), doc(&pencil_file(&cp.pencil)));
    out.outputs
        .insert("frobenius.json".into(), doc(&frobenius_file(&r.frobenius)));
}

fn bracket_value(b: &HydroBracket) -> Value {
    json!({
        "degree": b.degree(),
        "g": metric_value(&b.g),
        "gamma": connection_value(&b.gamma),
    })
}

fn brackets(p: &PencilData, mode: CheckMode, out: &mut Outcome) -> Option<(HydroBracket, HydroBracket)> {
    let mut make = |label: &str, g: &ContraMetric| {
        let b = out.stage(
            &format!("{label}: curvature vanishes"),
            mode,
            bracket_from_metric(g, mode),
        )?;
        let mut c = b.flatness.clone();
        c.name = format!("{label}: {}", c.name);
        out.certificates.push(c);
        out.result(label, bracket_value(&b));
        Some(b)
    };
    let b1 = make("g1", &p.g1);
    let b2 = make("g2", &p.g2);
    Some((b1?, b2?))
}

fn bracket_compat(p: &PencilData, mode: CheckMode, out: &mut Outcome) {
    let Some((b1, b2)) = brackets(p, mode, out) else {
        return;
    };
    if let Some(r) = out.stage("compatibility", mode, check_compatibility(&b1, &b2, mode)) {
        out.extend("compatibility", r.certificates);
    }
}

fn bracket_virasoro(m: &FrobeniusData, mode: CheckMode, out: &mut Outcome) {
    let Some(p) = out.stage("pencil", mode, to_flat_pencil(m, mode)) else {
        return;
    };
    if let Some(certs) = out.stage("Virasoro form", mode, virasoro_check(m, &p, mode)) {
        out.extend("", certs);
        let k = flatpencil::exactalg::rat(2, 1) / (flatpencil::exactalg::rat(1, 1) - &m.d);
        out.result("T", Value::from(m.tau().scale(&k).to_string()));
    }
}

fn bracket_recurse(p: &PencilData, starts: Vec<QPoly>, steps: usize, mode: CheckMode, out: &mut Outcome) {
    let mut chains = Vec::new();
    for (a, h0) in starts.into_iter().enumerate() {
        let mut chain = vec![h0.to_string()];
        let mut h = h0;
        for s in 1..=steps {
            let name = format!("recursion chain {} step {s}", a + 1);
            let Some((next, mut cert)) = out.stage(&name, mode, recursion_step(p, &h, mode)) else {
                break;
            };
            cert.name = format!("{name}: {}", cert.name);
            out.certificates.push(cert);
            chain.push(next.to_string());
            h = next;
        }
        chains.push(chain);
    }
    out.result("chains", Value::from(chains));
}

fn bracket_central_charge(m: &FrobeniusData, rank: Option<usize>, mode: CheckMode, out: &mut Outcome) {
    let Some(r) = out.stage("central charge", mode, central_charge(m, rank)) else {
        return;
    };
    if let Some(eq) = r.equal {
        let lie = r.c_lie.as_ref().map(fmt_rational).unwrap_or_default();
        out.certificates
            .push(Certificate::from_bool("central charge equals 12 rho^2", eq, || {
                format!("formula gives {}, 12 rho^2 = {lie}", fmt_rational(&r.c_formula))
            }));
    }
    out.result("central_charge", doc(&r));
}

/// Runs one command. Produced files are written when `--out` is given.
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let mode = mode_of(&cli.opts)?;
    let mut digest = Sha256::new();
    let mut out = Outcome::default();
    let command = match &cli.command {
        Command::Frobenius(FrobeniusCmd::Check { file }) => {
            frobenius_check(&load_frobenius(file, &mut digest)?, mode, &mut out);
            "frobenius check".to_string()
        }
        Command::Frobenius(FrobeniusCmd::Pencil { file }) => {
            frobenius_pencil(&load_frobenius(file, &mut digest)?, mode, &mut out);
            "frobenius pencil".to_string()
        }
        Command::Pencil(PencilCmd::Check { file }) => {
            pencil_check(&load_pencil(file, &mut digest)?.pencil, mode, &mut out);
            "pencil check".to_string()
        }
        Command::Pencil(PencilCmd::Reconstruct { file }) => {
            pencil_reconstruct(&load_pencil(file, &mut digest)?.pencil, mode, &mut out);
            "pencil reconstruct".to_string()
        }
        Command::Coxeter {
            group: GroupType::A,
            rank,
        } => {
            if *rank == 0 || *rank > MAX_RANK {
                return Err(CliError::Usage(format!("--rank must be in 1..={MAX_RANK}")));
            }
            let command = format!("coxeter --type A --rank {rank}");
            digest.update(command.as_bytes());
            coxeter(*rank, mode, &mut out);
            command
        }
        Command::Bracket(BracketCmd::Emit { file }) => {
            brackets(&load_pencil(file, &mut digest)?.pencil, mode, &mut out);
            "bracket emit".to_string()
        }
        Command::Bracket(BracketCmd::Compat { file }) => {
            bracket_compat(&load_pencil(file, &mut digest)?.pencil, mode, &mut out);
            "bracket compat".to_string()
        }
        Command::Bracket(BracketCmd::Virasoro { file }) => {
            bracket_virasoro(&load_frobenius(file, &mut digest)?, mode, &mut out);
            "bracket virasoro".to_string()
        }
        Command::Bracket(BracketCmd::Recurse { file, steps, h0 }) => {
            let input = load_pencil(file, &mut digest)?;
            let n = input.pencil.n();
            let starts = match h0 {
                Some(src) => {
                    digest.update(src.as_bytes());
                    vec![parse_expr(src, n, &input.expgens).map_err(|e| CliError::Input(format!("--h0: {e}")))?]
                }
                None => (0..n).map(|a| QPoly::var(n, a)).collect(),
            };
            bracket_recurse(&input.pencil, starts, *steps, mode, &mut out);
            format!("bracket recurse --steps {steps}")
        }
        Command::Bracket(BracketCmd::CentralCharge { file, coxeter_rank }) => {
            bracket_central_charge(&load_frobenius(file, &mut digest)?, *coxeter_rank, mode, &mut out);
            match coxeter_rank {
                Some(k) => format!("bracket central-charge --coxeter-rank {k}"),
                None => "bracket central-charge".to_string(),
            }
        }
    };
    let mut certificates = out.certificates;
    certificates.sort_by(|a, b| a.name.cmp(&b.name));
    let status = if certificates.iter().any(|c| c.status == Status::Fail) {
        Status::Fail
    } else {
        Status::Pass
    };
    let mut report = RunReport {
        schema: 1,
        command,
        inputs_sha256: hex::encode(digest.finalize()),
        check: mode,
        status,
        certificates,
        results: out.results,
        outputs: out.outputs,
        artifacts: Vec::new(),
    };
    if let Some(dir) = &cli.opts.out {
        write_outputs(dir, &mut report)?;
    }
    Ok(report)
}

fn write_outputs(dir: &Path, report: &mut RunReport) -> Result<(), CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for (name, value) in &report.outputs {
        let path = dir.join(name);
        fs::write(&path, to_json(value)).map_err(|e| io(&path, e))?;
        report.artifacts.push(path.display().to_string());
    }
    let path = dir.join("report.json");
    report.artifacts.push(path.display().to_string());
    fs::write(&path, to_json(report)).map_err(|e| io(&path, e))?;
    Ok(())
}

/// Plain-text rendering. `elapsed` is shown here only, so that the JSON
/// report stays reproducible.
pub fn render_text(r: &RunReport, elapsed: std::time::Duration) -> String {
    let mut s = format!("flatpencil {}\n", r.command);
    s.push_str(&format!("input sha256 {}\n", r.inputs_sha256));
    for c in &r.certificates {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        s.push_str(&format!("  {tag}  {}  [{}]\n", c.name, c.proof));
        if let Some(w) = &c.witness {
            s.push_str(&format!("        {w}\n"));
        }
    }
    for (k, v) in &r.results {
        match v {
            Value::String(x) => s.push_str(&format!("{k}: {x}\n")),
            other => s.push_str(&format!("{k}: {other}\n")),
        }
    }
    for a in &r.artifacts {
        s.push_str(&format!("wrote {a}\n"));
    }
    let failed = r.certificates.iter().filter(|c| c.status == Status::Fail).count();
    let skipped = r.certificates.iter().filter(|c| c.status == Status::Skipped).count();
    s.push_str(&format!(
        "{}: {} certificates, {failed} failed, {skipped} skipped, {:.2} s\n",
        if r.status == Status::Fail { "FAIL" } else { "PASS" },
        r.certificates.len(),
        elapsed.as_secs_f64()
    ));
    s
}

/// Parses `args`, runs, and returns the exit code with the text for stdout
/// and stderr.
pub fn main_with_args<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            return if e.use_stderr() {
                (code, String::new(), text)
            } else {
                (code, text, String::new())
            };
        }
    };
    let start = Instant::now();
    match run(&cli) {
        Ok(report) => {
            let text = if cli.opts.json {
                to_json(&report)
            } else {
                render_text(&report, start.elapsed())
            };
            (report.exit_code(), text, String::new())
        }
        Err(e) => (e.exit_code(), String::new(), format!("error: {}\n", e.message())),
    }
}
