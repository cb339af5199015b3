//! `polychron`: build Calogero chains, run driven iSWAP protocols and export
//! tables for plotting.

mod output;

use std::fmt;
use std::fs;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use polychron::analysis::{
    error_sweep, matrix_element_table, parse_grid, phase_alignment_diagnostic, printed_table,
    two_qubit_time_budget,
};
use polychron::driving::Integrator;
use polychron::model::spectrum_l0;
use polychron::protocol::{ProtocolMode, ResonantGate, RunOptions};
use polychron::{ChainGeometry, PauliString};

use output::{emit, fmt_sig, json_bytes, json_float, resolve_path, Cell, Format, Table};

#[derive(Parser, Debug)]
#[command(name = "polychron", version, about = "Calogero spin-chain eigengates and driven iSWAP gates")]
struct Cli {
    /// Output format; `protocol` defaults to json, everything else to csv.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write to this file instead of stdout. Relative paths are placed
    /// under $POLYCHRON_OUT_DIR when it is set.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Site positions (Hermite roots), one per line; residuals go to stderr.
    Positions {
        #[arg(long)]
        n: usize,
    },
    /// Matrix elements <t1|U^dag D U|t2> for a list of drives.
    Tables {
        #[arg(long)]
        n: usize,
        /// Comma-separated drive labels; an empty string gives no rows.
        #[arg(long)]
        drive: Option<String>,
    },
    /// Gate error against drive time, with and without halfway inversion.
    Sweep {
        #[command(flatten)]
        chain: ChainArgs,
        /// `lo:hi:step`, inclusive of `hi`.
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        run: RunArgs,
        /// Enforce the step-halving convergence check at every point.
        #[arg(long)]
        verify: bool,
    },
    /// One protocol run, reported as a JSON object.
    Protocol {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        td: f64,
        /// Drive phase of the first pulse.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        /// Split the pulse around an inversion (default).
        #[arg(long, overrides_with = "no_halfway")]
        halfway: bool,
        /// Single pulse followed by a free-evolution phase undo.
        #[arg(long)]
        no_halfway: bool,
        /// Frame of the phase undo when `--no-halfway` is given.
        #[arg(long, value_enum, default_value_t = UndoArg::Eigenbasis)]
        undo_frame: UndoArg,
        /// Drive amplitude; calibrated to a pi rotation when omitted.
        #[arg(long, allow_negative_numbers = true)]
        omega_p: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
        /// Skip the step-halving convergence check.
        #[arg(long)]
        no_verify: bool,
        /// Also write the total unitary as rows of [re, im] pairs.
        #[arg(long)]
        dump_unitary: Option<PathBuf>,
    },
    /// Eigenvalues of L_0^z with excitation counts and degeneracies.
    Spectrum {
        #[arg(long)]
        n: usize,
    },
    /// Detunings of the spectator transitions nearest resonance and their
    /// phases at half the drive time.
    Diagnostics {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        td: f64,
    },
    /// Direct pi/4 exchange times for every pair of sites.
    Timebudget {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args, Debug)]
struct ChainArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Drive label such as z2z3; defaults to z{N/2}z{N/2+1}.
    #[arg(long)]
    drive: Option<String>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Integrator step; chosen from the chain frequencies when omitted.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum, default_value_t = IntegratorArg::Magnus4)]
    integrator: IntegratorArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UndoArg {
    Eigenbasis,
    Computational,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IntegratorArg {
    Midpoint,
    Magnus4,
}

impl From<IntegratorArg> for Integrator {
    fn from(a: IntegratorArg) -> Self {
        match a {
            IntegratorArg::Midpoint => Integrator::Midpoint,
            IntegratorArg::Magnus4 => Integrator::Magnus4,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Model(polychron::Error),
    Usage(String),
    Io(io::Error),
    /// Every grid point of a sweep failed.
    SweepFailed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(e) if e.is_numerical() => 3,
            CliError::SweepFailed(_) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::SweepFailed(s) => write!(f, "every grid point failed; first failure: {s}"),
        }
    }
}

impl From<polychron::Error> for CliError {
    fn from(e: polychron::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Positions { n } => positions(*n, cli.format, out),
        Command::Tables { n, drive } => {
            let table = tables(*n, drive.as_deref())?;
            emit_table(&table, cli.format.unwrap_or(Format::Csv), out)
        }
        Command::Sweep { chain, grid, run, verify } => {
            let fmt = cli.format.unwrap_or(Format::Csv);
            sweep(chain, grid, run, *verify, fmt, out)
        }
        Command::Protocol {
            chain,
            td,
            phi,
            halfway: _,
            no_halfway,
            undo_frame,
            omega_p,
            run,
            no_verify,
            dump_unitary,
        } => {
            let mode = match (*no_halfway, undo_frame) {
                (false, _) => ProtocolMode::Halfway,
                (true, UndoArg::Eigenbasis) => ProtocolMode::PhaseUndoEigenbasis,
                (true, UndoArg::Computational) => ProtocolMode::PhaseUndoComputational,
            };
            let opts = RunOptions {
                step: run.dt,
                amplitude: *omega_p,
                integrator: run.integrator.into(),
                verify: !no_verify,
            };
            let req = ProtocolRequest {
                mode,
                t_d: *td,
                phi: *phi,
                opts,
                dump: dump_unitary.clone(),
            };
            protocol(chain, &req, cli.format.unwrap_or(Format::Json), out)
        }
        Command::Spectrum { n } => emit_table(&spectrum(*n)?, cli.format.unwrap_or(Format::Csv), out),
        Command::Diagnostics { chain, td } => {
            emit_table(&diagnostics(chain, *td)?, cli.format.unwrap_or(Format::Csv), out)
        }
        Command::Timebudget { n } => emit_table(&timebudget(*n)?, cli.format.unwrap_or(Format::Csv), out),
    }
}

fn emit_table(table: &Table, format: Format, out: Option<&std::path::Path>) -> CliResult<()> {
    let bytes = match format {
        Format::Csv => table.to_csv()?,
        Format::Json => json_bytes(&table.to_json()),
    };
    Ok(emit(&bytes, out)?)
}

fn default_drive(n: usize) -> String {
    format!("z{}z{}", n / 2, n / 2 + 1)
}

fn parse_drive(label: &str, n: usize) -> CliResult<PauliString> {
    PauliString::parse(label, n).map_err(|e| CliError::Usage(format!("drive {label:?}: {e}")))
}

fn chain_and_drive(chain: &ChainArgs) -> CliResult<(ChainGeometry, PauliString)> {
    let geom = ChainGeometry::calogero(chain.n)?;
    let label = chain.drive.clone().unwrap_or_else(|| default_drive(chain.n));
    let drive = parse_drive(&label, chain.n)?;
    Ok((geom, drive))
}

fn positions(n: usize, format: Option<Format>, out: Option<&std::path::Path>) -> CliResult<()> {
    let geom = ChainGeometry::calogero(n)?;
    let residuals = geom.hermite_residuals();
    match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut text = String::new();
            for x in geom.positions() {
                text.push_str(&fmt_sig(*x));
                text.push('\n');
            }
            for (j, r) in residuals.iter().enumerate() {
                eprintln!("# residual H_{n}(x_{}) = {r:e}", j + 1);
            }
            emit(text.as_bytes(), out)?;
        }
        Format::Json => {
            let value = json!({
                "n": n,
                "positions": geom.positions().iter().map(|&x| json_float(x)).collect::<Vec<_>>(),
                "residuals": residuals.iter().map(|&r| json_float(r)).collect::<Vec<_>>(),
            });
            emit(&json_bytes(&value), out)?;
        }
    }
    Ok(())
}

fn tables(n: usize, drives: Option<&str>) -> CliResult<Table> {
    let geom = ChainGeometry::calogero(n)?;
    let labels: Vec<String> = match drives {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect(),
        None => {
            let printed = printed_table(n);
            if printed.is_empty() {
                vec![format!("z{}", n / 2), default_drive(n), format!("x{}x{}", n / 2, n / 2 + 1)]
            } else {
                printed.iter().map(|r| r.resolved_label.to_string()).collect()
            }
        }
    };
    let parsed = labels
        .iter()
        .map(|l| parse_drive(l, n))
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(vec!["drive", "re", "im", "magnitude"]);
    for row in matrix_element_table(&geom, &parsed)? {
        table.push(vec![
            row.label.into(),
            row.value.re.into(),
            row.value.im.into(),
            row.value.norm().into(),
        ]);
    }
    Ok(table)
}

fn sweep(
    chain: &ChainArgs,
    grid: &str,
    run: &RunArgs,
    verify: bool,
    format: Format,
    out: Option<&std::path::Path>,
) -> CliResult<()> {
    let (geom, drive) = chain_and_drive(chain)?;
    let points = parse_grid(grid)?;
    let gate = ResonantGate::new(&geom, &drive)?;
    let opts = RunOptions {
        step: run.dt,
        amplitude: None,
        integrator: run.integrator.into(),
        verify,
    };
    let result = error_sweep(&gate, &points, &opts)?;
    for (t_d, reason) in &result.failures {
        eprintln!("warning: t_d = {}: {reason}", fmt_sig(*t_d));
    }
    if result.failures.len() == result.rows.len() {
        let first = result.failures.first().map(|f| f.1.clone()).unwrap_or_default();
        return Err(CliError::SweepFailed(first));
    }
    let mut table = Table::new(vec!["t_d", "error_halfway", "error_plain", "omega_p", "n_steps"]);
    for r in &result.rows {
        table.push(vec![
            r.t_d.into(),
            r.error_halfway.into(),
            r.error_plain.into(),
            r.omega_p.into(),
            r.n_steps.into(),
        ]);
    }
    let bytes = match format {
        Format::Csv => table.to_csv()?,
        Format::Json => json_bytes(&json!({
            "n": result.n_qubits,
            "drive": result.drive_label,
            "omega": json_float(result.omega),
            "grid": grid,
            "verify": verify,
            "rows": table.to_json(),
        })),
    };
    Ok(emit(&bytes, out)?)
}

struct ProtocolRequest {
    mode: ProtocolMode,
    t_d: f64,
    phi: f64,
    opts: RunOptions,
    dump: Option<PathBuf>,
}

fn protocol(chain: &ChainArgs, req: &ProtocolRequest, format: Format, out: Option<&std::path::Path>) -> CliResult<()> {
    if !(req.t_d > 0.0 && req.t_d.is_finite()) {
        return Err(CliError::Usage(format!("duration must be positive, got --td {}", req.t_d)));
    }
    let (geom, drive) = chain_and_drive(chain)?;
    let gate = ResonantGate::new(&geom, &drive)?;
    let report = gate.run(req.mode, req.t_d, req.phi, &req.opts)?;

    if let Some(path) = &req.dump {
        let u = &report.total_unitary;
        let rows: Vec<Value> = (0..u.nrows())
            .map(|r| {
                Value::Array(
                    (0..u.ncols())
                        .map(|c| json!([json_float(u[(r, c)].re), json_float(u[(r, c)].im)]))
                        .collect(),
                )
            })
            .collect();
        let path = resolve_path(path);
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, json_bytes(&Value::Array(rows)))?;
    }

    let populations = report.populations();
    let bytes = match format {
        Format::Json => json_bytes(&json!({
            "error": json_float(report.error),
            "omega": json_float(report.omega),
            "omega_p": json_float(report.omega_p),
            "t1": report.t1.to_string(),
            "t2": report.t2.to_string(),
            "mode": report.mode.as_str(),
            "unitarity_defect": json_float(report.unitarity_defect),
            "per_state_populations": populations.iter().map(|&p| json_float(p)).collect::<Vec<_>>(),
            "n": geom.n_qubits(),
            "drive": report.drive_label,
            "t_d": json_float(report.t_d),
            "phi": json_float(report.phase),
            "target_phase": json_float(report.target_phase),
            "coupling_re": json_float(report.coupling.re),
            "coupling_im": json_float(report.coupling.im),
            "dt": json_float(report.step),
            "n_steps": report.n_steps,
            "per_state_phase_defect": report.per_state_phase_defect.iter().map(|&p| json_float(p)).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let joined = populations.iter().map(|&p| fmt_sig(p)).collect::<Vec<_>>().join(";");
            let mut table = Table::new(vec![
                "error",
                "omega",
                "omega_p",
                "t1",
                "t2",
                "mode",
                "unitarity_defect",
                "per_state_populations",
            ]);
            table.push(vec![
                report.error.into(),
                report.omega.into(),
                report.omega_p.into(),
                report.t1.to_string().into(),
                report.t2.to_string().into(),
                report.mode.as_str().into(),
                report.unitarity_defect.into(),
                Cell::Text(joined),
            ]);
            table.to_csv()?
        }
    };
    Ok(emit(&bytes, out)?)
}

fn spectrum(n: usize) -> CliResult<Table> {
    let geom = ChainGeometry::calogero(n)?;
    let mut table = Table::new(vec!["bits", "energy", "excitations", "degeneracy"]);
    for e in spectrum_l0(&geom) {
        table.push(vec![
            e.label.to_string().into(),
            e.energy.into(),
            e.excitations.into(),
            e.degeneracy.into(),
        ]);
    }
    Ok(table)
}

fn diagnostics(chain: &ChainArgs, t_d: f64) -> CliResult<Table> {
    if !(t_d > 0.0 && t_d.is_finite()) {
        return Err(CliError::Usage(format!("duration must be positive, got --td {t_d}")));
    }
    let (geom, drive) = chain_and_drive(chain)?;
    let gate = ResonantGate::new(&geom, &drive)?;
    let mut table = Table::new(vec!["pair", "delta", "phase_at_half"]);
    for p in phase_alignment_diagnostic(&gate, t_d)? {
        table.push(vec![p.label.into(), p.delta.into(), p.phase_at_half.into()]);
    }
    Ok(table)
}

fn timebudget(n: usize) -> CliResult<Table> {
    let geom = ChainGeometry::calogero(n)?;
    let budget = two_qubit_time_budget(&geom)?;
    let mut table = Table::new(vec!["j", "k", "h_jk", "pi4_time"]);
    for p in budget.pairs {
        table.push(vec![p.j.into(), p.k.into(), p.coupling.into(), p.pi4_time.into()]);
    }
    Ok(table)
}
