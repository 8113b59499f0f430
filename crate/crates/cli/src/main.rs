use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crc_core::codec::{make_code, simulate_noise, NoiseMode, SimulationConfig, SimulationReport};
use crc_core::export::{export_basis, export_projections, write_json};
use crc_core::report::{StructureReport, SCHEMA_VERSION};
use crc_core::structure::construct_irrep_basis;
use crc_core::{Budget, Decomposition, Error, HalfInt, System, Tol};

mod verify;

#[derive(Parser)]
#[command(
    name = "crc",
    version,
    about = "Collective rotation channels: block structure, checks, noiseless codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the (j, p, q) block table, totals and the weight staircase.
    Structure(Common),
    /// Run the numerical consistency checks; exits 1 if any fails.
    Verify(Common),
    /// Encode into a spin-j block, apply collective noise, report fidelities.
    Simulate(SimulateArgs),
    /// Write the structure table, basis and projections as files.
    Export(ExportArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Number of sites.
    #[arg(long)]
    n: usize,
    /// Local dimension (d = 2s + 1).
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Channel angles as x,y,z.
    #[arg(long, value_parser = parse_thetas)]
    thetas: Option<[f64; 3]>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output here instead of stdout (a directory for `export`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tol_rank: Option<f64>,
    #[arg(long)]
    tol_verify: Option<f64>,
    /// Largest Hilbert-space dimension allowed for the structure construction.
    #[arg(long, env = "CRC_BUDGET_DIM")]
    budget_dim: Option<usize>,
    /// Largest dimension for the dim^2-sized oracles (superoperator, brute-force commutant).
    #[arg(long, env = "CRC_BUDGET_ORACLE")]
    budget_oracle: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Spin of the code block, e.g. 1/2 or 1.
    #[arg(long, value_parser = parse_half)]
    j: HalfInt,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    mode: Mode,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    common: Common,
    /// Also write the central projections.
    #[arg(long)]
    projections: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Rotations,
    Channel,
    Both,
}

fn parse_thetas(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected three angles, got {}", v.len()))
}

fn parse_half(s: &str) -> Result<HalfInt, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure modes mapped to exit codes.
enum Failure {
    Verification(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Core(e) => match e {
                Error::DimensionBudgetExceeded { .. } => 3,
                Error::Io(_) => 4,
                Error::BadDimension(_)
                | Error::BadSystem(_)
                | Error::DegenerateAngle { .. }
                | Error::UnknownBlock(_)
                | Error::InvalidTolerance(_)
                | Error::InvalidLabel(_)
                | Error::OutOfRange { .. }
                | Error::Parse(_) => 2,
                _ => 1,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Verification(m) => format!("verification failed: {m}"),
            Failure::Core(e) => format!("error: {e}"),
        }
    }
}

struct Context {
    n: usize,
    d: usize,
    tol: Tol,
    budget: Budget,
}

impl Context {
    fn new(c: &Common) -> Result<Self, Failure> {
        if c.n == 0 {
            return Err(Error::BadSystem("n must be at least 1".into()).into());
        }
        if c.d < 2 {
            return Err(Error::BadDimension(c.d).into());
        }
        let mut tol = Tol::default();
        if let Some(t) = c.tol_rank {
            tol.rank_tol = t;
        }
        if let Some(t) = c.tol_verify {
            tol.verify_tol = t;
        }
        tol.validate()?;
        let mut budget = Budget::default();
        if let Some(b) = c.budget_dim {
            budget.max_dim = b;
        }
        if let Some(b) = c.budget_oracle {
            budget.max_oracle_dim = b;
        }
        if let Some(t) = c.thetas {
            let ns2 = (c.n * (c.d - 1)) as i64;
            crc_core::channel::check_thetas(&t, ns2)?;
        }
        Ok(Context {
            n: c.n,
            d: c.d,
            tol,
            budget,
        })
    }

    fn system(&self) -> Result<System, Failure> {
        Ok(crc_core::collective::build_collective_system(
            self.n,
            self.d,
            &self.budget,
        )?)
    }

    fn decompose(&self, sys: &System) -> Result<Decomposition, Failure> {
        Ok(construct_irrep_basis(sys, &self.tol, &self.budget)?)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Core(e.into())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<S: serde::Serialize>(v: &S) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn structure_report(ctx: &Context) -> Result<StructureReport, Failure> {
    let sys = ctx.system()?;
    let decomp = ctx.decompose(&sys)?;
    let report = StructureReport::from_decomposition(&decomp);
    let predicted = StructureReport::predicted(ctx.n, ctx.d)?;
    if !report.same_structure(&predicted) {
        return Err(Failure::Verification(
            "constructed census differs from the counting formula".into(),
        ));
    }
    Ok(report)
}

fn cmd_structure(c: &Common) -> Result<(), Failure> {
    let ctx = Context::new(c)?;
    let report = structure_report(&ctx)?;
    let text = match c.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json()? + "\n",
        Format::Csv => report.to_csv()?,
    };
    emit(c.out.as_deref(), &text)
}

fn cmd_verify(c: &Common) -> Result<(), Failure> {
    let ctx = Context::new(c)?;
    let sys = ctx.system()?;
    let decomp = ctx.decompose(&sys)?;
    let outcome = verify::run(&sys, &decomp, c.thetas, &ctx.tol, &ctx.budget)?;
    let text = match c.format {
        Format::Text => outcome.to_text(),
        Format::Json => json(&outcome)?,
        Format::Csv => outcome.to_csv()?,
    };
    emit(c.out.as_deref(), &text)?;
    match outcome.first_failure() {
        Some(name) => Err(Failure::Verification(format!("first failing check: {name}"))),
        None => Ok(()),
    }
}

#[derive(serde::Serialize)]
struct SimulationOutput {
    schema_version: u32,
    n: usize,
    d: usize,
    j2: i64,
    warning: Option<String>,
    runs: Vec<SimulationReport>,
}

fn simulation_text(o: &SimulationOutput) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let j = HalfInt::from_twice(o.j2);
    let first = &o.runs[0];
    let _ = writeln!(
        s,
        "code: n = {}, d = {}, j = {}, logical dim {}, gauge dim {}",
        o.n, o.d, j, first.logical_dim, first.gauge_dim
    );
    if let Some(w) = &o.warning {
        let _ = writeln!(s, "warning: {w}");
    }
    for r in &o.runs {
        let mode = match r.mode {
            NoiseMode::Channel => "channel",
            NoiseMode::RandomRotations => "random-rotations",
        };
        let _ = writeln!(s, "{mode}: trials {}, seed {}", r.trials, r.seed);
        let _ = writeln!(s, "  min fidelity          {:.15}", r.min_fidelity);
        let _ = writeln!(s, "  mean fidelity         {:.15}", r.mean_fidelity);
        let _ = writeln!(s, "  max leakage           {:.3e}", r.max_leakage);
        let _ = writeln!(s, "  gauge deviation       {:.3e}", r.gauge_deviation);
        match (r.control_min_fidelity, r.control_mean_fidelity) {
            (Some(lo), Some(mean)) => {
                let _ = writeln!(s, "  control min fidelity  {lo:.15}");
                let _ = writeln!(s, "  control mean fidelity {mean:.15}");
            }
            _ => {
                let _ = writeln!(s, "  control               n/a (logical dim exceeds d)");
            }
        }
    }
    s
}

fn cmd_simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let c = &a.common;
    let ctx = Context::new(c)?;
    if a.trials == 0 {
        return Err(Error::BadSystem("trials must be at least 1".into()).into());
    }
    let sys = ctx.system()?;
    let decomp = ctx.decompose(&sys)?;
    let code = make_code(&decomp, a.j)?;
    let modes: &[NoiseMode] = match a.mode {
        Mode::Rotations => &[NoiseMode::RandomRotations],
        Mode::Channel => &[NoiseMode::Channel],
        Mode::Both => &[NoiseMode::RandomRotations, NoiseMode::Channel],
    };
    let mut runs = Vec::new();
    for &mode in modes {
        let cfg = SimulationConfig {
            mode,
            trials: a.trials,
            seed: c.seed,
            logical: None,
            thetas: c.thetas,
        };
        runs.push(simulate_noise(&code, &sys, &cfg, &ctx.tol, &ctx.budget)?);
    }
    let out = SimulationOutput {
        schema_version: SCHEMA_VERSION,
        n: c.n,
        d: c.d,
        j2: a.j.twice(),
        warning: code.warning.clone(),
        runs,
    };
    let text = match c.format {
        Format::Text => simulation_text(&out),
        Format::Json => json(&out)?,
        Format::Csv => simulation_csv(&out),
    };
    emit(c.out.as_deref(), &text)
}

fn simulation_csv(o: &SimulationOutput) -> String {
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut s = String::from(
        "mode,trials,seed,min_fidelity,mean_fidelity,max_leakage,gauge_deviation,control_min_fidelity,control_mean_fidelity\n",
    );
    for r in &o.runs {
        let mode = match r.mode {
            NoiseMode::Channel => "channel",
            NoiseMode::RandomRotations => "random-rotations",
        };
        s.push_str(&format!(
            "{mode},{},{},{},{},{},{},{},{}\n",
            r.trials,
            r.seed,
            r.min_fidelity,
            r.mean_fidelity,
            r.max_leakage,
            r.gauge_deviation,
            opt(r.control_min_fidelity),
            opt(r.control_mean_fidelity)
        ));
    }
    s
}

fn cmd_export(a: &ExportArgs) -> Result<(), Failure> {
    let c = &a.common;
    let ctx = Context::new(c)?;
    let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let sys = ctx.system()?;
    let decomp = ctx.decompose(&sys)?;
    let basis = export_basis(&decomp, &ctx.budget)?;
    let projections = if a.projections {
        Some(export_projections(&decomp, &ctx.budget)?)
    } else {
        None
    };
    let report = StructureReport::from_decomposition(&decomp);
    let io = |e: std::io::Error| Failure::Core(e.into());
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut structure_json = report.to_json()?;
    structure_json.push('\n');
    std::fs::write(dir.join("structure.json"), structure_json).map_err(io)?;
    std::fs::write(dir.join("structure.csv"), report.to_csv()?).map_err(io)?;
    write_json(&dir.join("basis.json"), &basis)?;
    let mut written = vec!["structure.json", "structure.csv", "basis.json"];
    if let Some(p) = projections {
        write_json(&dir.join("projections.json"), &p)?;
        written.push("projections.json");
    }
    for f in written {
        println!("{}", dir.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Structure(c) => cmd_structure(c),
        Command::Verify(c) => cmd_verify(c),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message());
            ExitCode::from(f.code())
        }
    }
}
