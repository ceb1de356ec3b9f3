//! `btcert`: command-line front end for the certificate computations.
//!
//! Exit codes: 0 every verdict passes, 1 a verdict fails, 2 usage or
//! parameter error, 3 the density table does not cover a requested cell.

mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use btcert::assembly::{build_table2, reference_rows, siegel_coefficient, siegel_psi_margin, AssemblyParams};
use btcert::density_second::{c2_with_form, g2_breakdown, C2Form, G2Options};
use btcert::density_third::{build_table1_with, DensityTable, Table1Spec};
use btcert::numerics::Maximizer;
use btcert::{bt_report, CharacterClass, Cell, Report, SiegelCaseParams, SieveWeights};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{ConfigError, Format, Settings};

#[derive(Parser, Debug)]
#[command(name = "btcert", version, about = "Numerical certificates for an explicit Brun-Titchmarsh bound")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// The G2 constant, its pieces and C2.
    G2,
    /// The N* density table.
    Table1,
    /// The ladder inequality for every range of lambda1.
    Table2,
    /// The exceptional-zero curve S(lambda) on 0.01..0.35.
    Siegel,
    /// The scalar inequality e^{-Mt} + 4t < 1 - t on (0, eta].
    PsiCheck,
    /// Prime counts in residue classes against the explicit bounds.
    VerifyPrimes,
    /// Every stage in order.
    All,
}

impl Command {
    fn stage(self) -> &'static str {
        match self {
            Command::G2 => "g2",
            Command::Table1 => "table1",
            Command::Table2 => "table2",
            Command::Siegel => "siegel",
            Command::PsiCheck => "psi-check",
            Command::VerifyPrimes => "verify-primes",
            Command::All => "all",
        }
    }
}

const STAGES: [Command; 6] =
    [Command::G2, Command::Table1, Command::Table2, Command::Siegel, Command::PsiCheck, Command::VerifyPrimes];

#[derive(Args, Debug, Default)]
struct Global {
    /// Output file; a directory for `all`. Standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Config file of `key = value` lines under `[section]` headers.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long = "K", global = true)]
    k: Option<f64>,
    /// 1/4 or 1/3.
    #[arg(long, global = true)]
    phi: Option<String>,
    /// M of the running stage; every stage for `all`.
    #[arg(long = "M", global = true)]
    m: Option<f64>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[arg(long = "B", global = true)]
    b: Option<f64>,
    /// Exponent slack of the exceptional-zero curve.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Slack added to C1.
    #[arg(long, global = true)]
    c1_delta: Option<f64>,
    #[arg(long, global = true)]
    w: Option<f64>,
    #[arg(long, global = true)]
    u0: Option<f64>,
    #[arg(long, global = true)]
    u1: Option<f64>,
    #[arg(long, global = true)]
    v: Option<f64>,
    #[arg(long, global = true)]
    x0: Option<f64>,
    #[arg(long, global = true)]
    x1: Option<f64>,
    #[arg(long, global = true)]
    lambda_min: Option<f64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    rhs_tol: Option<f64>,
    #[arg(long, global = true)]
    gamma_min: Option<f64>,
    #[arg(long, global = true)]
    gamma_max: Option<f64>,
    #[arg(long, global = true)]
    lambda_start: Option<f64>,
    #[arg(long, global = true)]
    lambda_end: Option<f64>,
    #[arg(long, global = true)]
    lambda_max: Option<f64>,
    /// Comma-separated moduli.
    #[arg(long, global = true)]
    q: Option<String>,
    #[arg(long, global = true)]
    x: Option<u64>,
    #[arg(long, global = true, value_parser = ["proof", "statement"])]
    c2_form: Option<String>,
    /// Use this C2 instead of computing it.
    #[arg(long, global = true)]
    c2: Option<f64>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] btcert::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(btcert::Error::Coverage { .. }) => 3,
            _ => 2,
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn settings(g: &Global, cmd: Command) -> Result<Settings, CliError> {
    let mut s = Settings::default();
    if let Some(path) = &g.config {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        s.apply_file(&text)?;
    }
    let real = |sec: &str, key: &str, v: Option<f64>, s: &mut Settings| -> Result<(), ConfigError> {
        match v {
            Some(x) => s.set(sec, key, &x.to_string()),
            None => Ok(()),
        }
    };
    real("kernel", "K", g.k, &mut s)?;
    if let Some(phi) = &g.phi {
        s.set("kernel", "phi", phi)?;
    }
    real("kernel", "c1_delta", g.c1_delta, &mut s)?;
    real("weights", "w", g.w, &mut s)?;
    real("weights", "u0", g.u0, &mut s)?;
    real("weights", "u1", g.u1, &mut s)?;
    real("weights", "v", g.v, &mut s)?;
    real("weights", "x0", g.x0, &mut s)?;
    real("weights", "x1", g.x1, &mut s)?;
    real("weights", "lambda_min", g.lambda_min, &mut s)?;
    real("search", "tol", g.tol, &mut s)?;
    real("search", "lambda_max", g.lambda_max, &mut s)?;
    real("search", "gamma_min", g.gamma_min, &mut s)?;
    real("search", "gamma_max", g.gamma_max, &mut s)?;
    real("table1", "lambda_start", g.lambda_start, &mut s)?;
    real("table1", "lambda_end", g.lambda_end, &mut s)?;
    real("assembly", "rhs_tolerance", g.rhs_tol, &mut s)?;
    real("assembly", "c2", g.c2, &mut s)?;
    if let Some(f) = &g.c2_form {
        s.set("assembly", "c2_form", f)?;
    }
    real("siegel", "B", g.b, &mut s)?;
    real("siegel", "delta", g.delta, &mut s)?;
    real("psi", "eta", g.eta, &mut s)?;
    if let Some(q) = &g.q {
        s.set("primes", "q", q)?;
    }
    if let Some(x) = g.x {
        s.set("primes", "x", &x.to_string())?;
    }
    if let Some(m) = g.m {
        let sections: &[&str] = match cmd {
            Command::Table2 => &["assembly"],
            Command::Siegel => &["siegel"],
            Command::PsiCheck => &["psi"],
            Command::All => &["assembly", "siegel", "psi"],
            _ => &[],
        };
        for sec in sections {
            real(sec, "M", Some(m), &mut s)?;
        }
    }
    if let Some(f) = &g.format {
        s.set("output", "format", f)?;
    }
    if let Some(o) = &g.out {
        s.out = Some(o.display().to_string());
    }
    Ok(s)
}

/// Shared inputs, computed once per run.
struct Context {
    s: Settings,
    weights: SieveWeights<f64>,
    cls: CharacterClass,
    g2: Option<(btcert::G2Breakdown<f64>, f64)>,
    table: Option<DensityTable>,
}

struct Outcome {
    report: Report,
    pass: bool,
}

impl Context {
    fn new(s: Settings) -> Result<Self, CliError> {
        let weights = SieveWeights::new(s.w, s.u0, s.u1, s.v, s.x0, s.x1, s.lambda_min)?;
        let cls = CharacterClass::from_phi(s.phi)?;
        Ok(Self { s, weights, cls, g2: None, table: None })
    }

    fn c2_form(&self) -> C2Form {
        if self.s.c2_form == "statement" {
            C2Form::Statement
        } else {
            C2Form::Proof
        }
    }

    fn g2(&mut self) -> Result<&(btcert::G2Breakdown<f64>, f64), CliError> {
        if self.g2.is_none() {
            let opts = G2Options { tol: self.s.tol, lambda_max: self.s.lambda_max, maximizer: Maximizer::default() };
            let b = g2_breakdown(&self.weights, &opts)?;
            let c2 = c2_with_form(&self.weights, b.total, self.c2_form());
            self.g2 = Some((b, c2));
        }
        Ok(self.g2.as_ref().expect("just computed"))
    }

    fn c2(&mut self) -> Result<f64, CliError> {
        match self.s.c2 {
            Some(c) => Ok(c),
            None => Ok(self.g2()?.1),
        }
    }

    fn table(&mut self) -> Result<&DensityTable, CliError> {
        if self.table.is_none() {
            let (l0, l1) = self.s.lambda_hundredths()?;
            let (g0, g1) = self.s.gamma_hundredths()?;
            let spec = Table1Spec {
                lambda_hundredths: l0..=l1,
                gamma_hundredths: g0..=g1,
                tol: self.s.tol,
                ..Table1Spec::default()
            };
            self.table = Some(build_table1_with::<f64>(&spec)?);
        }
        Ok(self.table.as_ref().expect("just computed"))
    }

    fn run(&mut self, cmd: Command) -> Result<Outcome, CliError> {
        let config = self.s.entries();
        match cmd {
            Command::G2 => {
                let g2_max = self.s.g2_max;
                let (b, c2) = self.g2()?.clone();
                let mut r = Report::new("g2", config, &["piece", "index", "value"]);
                r.push_row(vec![Cell::text("diagonal"), Cell::Int(0), Cell::Real(b.diagonal)]);
                for (i, &o) in b.offsets.iter().enumerate() {
                    r.push_row(vec![Cell::text("offset"), Cell::Int(i as i64 + 1), Cell::Real(o)]);
                }
                r.push_row(vec![Cell::text("middle"), Cell::Empty, Cell::Real(b.middle)]);
                r.push_row(vec![Cell::text("tail"), Cell::Empty, Cell::Real(b.tail)]);
                let pass = b.total <= g2_max;
                r.push_summary("g2", Cell::Real(b.total));
                r.push_summary("c2", Cell::Real(c2));
                r.push_summary("g2_max", Cell::Real(g2_max));
                r.push_summary("pass", Cell::Bool(pass));
                Ok(Outcome { report: r, pass })
            }
            Command::Table1 => {
                let table = self.table()?;
                let violations = table.invariant_violations();
                let mut r = table.to_report(config);
                let pass = violations.is_empty();
                r.push_summary("invariant_violations", Cell::Int(violations.len() as i64));
                for (i, v) in violations.iter().enumerate() {
                    r.push_summary(&format!("violation_{i}"), Cell::text(v.clone()));
                }
                r.push_summary("pass", Cell::Bool(pass));
                Ok(Outcome { report: r, pass })
            }
            Command::Table2 => {
                let c2 = self.c2()?;
                let params = AssemblyParams {
                    k: self.s.k,
                    cls: self.cls,
                    delta: self.s.c1_delta,
                    weights: self.weights,
                    c2,
                };
                let rows = reference_rows(self.s.assembly_m);
                let tol = self.s.rhs_tolerance;
                let cert = build_table2(&rows, self.table()?, &params, tol)?;
                let mut r = cert.to_report(config);
                r.push_summary("c2", Cell::Real(c2));
                Ok(Outcome { report: r, pass: cert.pass })
            }
            Command::Siegel => {
                let c2 = self.c2()?;
                let s = &self.s;
                let params = SiegelCaseParams::new(s.siegel_b, s.siegel_delta, s.k, s.siegel_m, &self.weights)?;
                let curve = siegel_coefficient(&params, self.cls, &self.weights, c2)?;
                let mut r = Report::new("siegel", config, &["lambda", "S", "pass"]);
                let mut pass = true;
                let mut worst = f64::NEG_INFINITY;
                for h in 1..=35u32 {
                    let lam = f64::from(h) / 100.0;
                    let v = curve.eval(lam);
                    pass &= v < 1.0;
                    worst = worst.max(v);
                    r.push_row(vec![Cell::Real(lam), Cell::Real(v), Cell::Bool(v < 1.0)]);
                }
                r.push_summary("c2", Cell::Real(c2));
                r.push_summary("coefficient", Cell::Real(curve.coeff));
                r.push_summary("exponent", Cell::Real(curve.exponent));
                r.push_summary("max_S", Cell::Real(worst));
                r.push_summary("pass", Cell::Bool(pass));
                Ok(Outcome { report: r, pass })
            }
            Command::PsiCheck => {
                let (m, eta) = (self.s.psi_m, self.s.eta);
                let margin = siegel_psi_margin(m, eta)?;
                let pass = margin > 0.0;
                let mut r = Report::new("psi_check", config, &["M", "eta", "grid_points", "margin", "pass"]);
                r.push_row(vec![
                    Cell::Real(m),
                    Cell::Real(eta),
                    Cell::Int(btcert::assembly::psi_grid_len(eta) as i64),
                    Cell::Real(margin),
                    Cell::Bool(pass),
                ]);
                r.push_summary("pass", Cell::Bool(pass));
                Ok(Outcome { report: r, pass })
            }
            Command::VerifyPrimes => {
                let mut merged: Option<Report> = None;
                let mut pass = true;
                for &q in &self.s.moduli {
                    let x = match self.s.prime_x {
                        Some(x) => x,
                        None => q.checked_pow(8).ok_or_else(|| {
                            btcert::Error::Resource(format!("q^8 overflows for q = {q}"))
                        })?,
                    };
                    let rep = bt_report(q, x)?;
                    pass &= rep.all_li() && rep.all_sieve() && rep.partition_identity();
                    let part = rep.to_report(config.clone());
                    let m = merged.get_or_insert_with(|| Report { rows: Vec::new(), summary: Vec::new(), ..part.clone() });
                    m.rows.extend(part.rows);
                    for (k, v) in part.summary {
                        m.summary.push((format!("q{q}.{k}"), v));
                    }
                }
                let mut r = merged.ok_or_else(|| ConfigError::BadValue {
                    key: "primes.q".into(),
                    msg: "no moduli given".into(),
                })?;
                r.push_summary("pass", Cell::Bool(pass));
                Ok(Outcome { report: r, pass })
            }
            Command::All => unreachable!("expanded by the caller"),
        }
    }
}

fn render(r: &Report, f: Format) -> String {
    match f {
        Format::Csv => r.to_csv_string(),
        Format::Json => r.to_json_string(),
    }
}

fn write_to(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn execute(cli: &Cli) -> Result<u8, CliError> {
    let s = settings(&cli.global, cli.command)?;
    let format = s.format;
    let out = s.out.clone().map(PathBuf::from);
    let mut ctx = Context::new(s)?;

    if cli.command != Command::All {
        let o = ctx.run(cli.command)?;
        let text = render(&o.report, format);
        match out {
            Some(p) => write_to(&p, &text)?,
            None => io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
        }
        return Ok(if o.pass { 0 } else { 1 });
    }

    if let Some(dir) = &out {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut any_fail = false;
    let mut coverage = false;
    let mut collected: Vec<(&str, Report)> = Vec::new();
    for cmd in STAGES {
        let o = match ctx.run(cmd) {
            Ok(o) => o,
            Err(e @ CliError::Core(btcert::Error::Coverage { .. })) => {
                eprintln!("btcert: {}: {e}", cmd.stage());
                coverage = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        eprintln!("btcert: {}: {}", cmd.stage(), if o.pass { "PASS" } else { "FAIL" });
        any_fail |= !o.pass;
        match &out {
            Some(dir) => write_to(&dir.join(format!("{}.{}", cmd.stage(), format.ext())), &render(&o.report, format))?,
            None => collected.push((cmd.stage(), o.report)),
        }
    }
    if out.is_none() {
        let text = match format {
            Format::Csv => collected.iter().map(|(_, r)| r.to_csv_string()).collect::<Vec<_>>().join("\n"),
            Format::Json => {
                let m: serde_json::Map<String, serde_json::Value> =
                    collected.iter().map(|(k, r)| (k.to_string(), r.to_json())).collect();
                serde_json::to_string_pretty(&m).map_err(|e| CliError::Io(e.to_string()))? + "\n"
            }
        };
        io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(if coverage {
        3
    } else if any_fail {
        1
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("btcert: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
