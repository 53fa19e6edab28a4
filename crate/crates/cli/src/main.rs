//! `boundent`: generate, certify and sweep three-qubit bound entangled states.
//!
//! Exit codes: 0 success, 2 usage or parameter errors, 3 failed internal
//! cross-checks.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boundent::certify::{certify_counts, certify_family, CertReport, CountsOptions, Family};
use boundent::circuit::Circuit;
use boundent::io::{parse_state, to_json, MatrixJson, SCHEMA_VERSION};
use boundent::qmat::{max_norm_distance, DensityMatrix};
use boundent::states::{abls_network_circuit, dct_network_circuit, AblsParams, DctParams};
use boundent::tomo::{parse_shot_lines, sample_settings, to_shot_lines, Axis, MeasSetting};
use boundent::witness::{crossover, sweep, sweep_grid, write_sweep_csv};
use boundent::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Largest direct-vs-network distance `generate` accepts.
const NETWORK_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(
    name = "boundent",
    version,
    about = "Three-qubit bound entanglement toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a state directly and through its preparation network.
    Generate {
        #[command(flatten)]
        family: FamilyArgs,
        /// Write the network circuit as text to this file.
        #[arg(long, value_name = "FILE")]
        dump_circuit: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run the full certification pipeline on a family member or on counts.
    Certify {
        /// Family parameters; with --from-counts they select the witness
        /// (ABLS only, default optimal-abls).
        #[command(flatten)]
        family: FamilyArgs,
        /// JSON-lines shot data as written by `tomo-sim`.
        #[arg(long, value_name = "FILE")]
        from_counts: Option<PathBuf>,
        /// Project the reconstruction onto the PSD cone.
        #[arg(long, requires = "from_counts")]
        project: bool,
        /// Bootstrap resamples for the minimum PT eigenvalue interval
        /// (200 when given without a value).
        #[arg(
            long,
            value_name = "N",
            requires = "from_counts",
            num_args = 0..=1,
            default_missing_value = "200"
        )]
        bootstrap: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Tabulate ε(a) along a = b = 1/c as CSV.
    Sweep {
        #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
        start: f64,
        #[arg(long, default_value_t = 0.95, allow_negative_numbers = true)]
        stop: f64,
        #[arg(long, default_value_t = 0.005, allow_negative_numbers = true)]
        step: f64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Simulate counts for the 27 Pauli settings plus ppp and mmm.
    TomoSim {
        #[command(flatten)]
        family: FamilyArgs,
        /// Measure the state in this JSON file instead of a family member.
        #[arg(long, value_name = "FILE")]
        state: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    Abls,
    Dct,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    OptimalAbls,
    Eq24,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: Option<FamilyKind>,
    #[arg(long, value_enum, conflicts_with = "family")]
    preset: Option<Preset>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda0_plus: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda0_minus: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda01: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda10: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda11: Option<f64>,
}

impl FamilyArgs {
    fn given(&self) -> bool {
        self.family.is_some() || self.preset.is_some()
    }

    fn resolve(&self) -> Result<Family, Failure> {
        let explicit = [
            self.a,
            self.b,
            self.c,
            self.lambda0_plus,
            self.lambda0_minus,
            self.lambda01,
            self.lambda10,
            self.lambda11,
        ];
        if let Some(preset) = self.preset {
            if explicit.iter().any(Option::is_some) {
                return Err(Failure::usage(
                    "--preset cannot be combined with explicit parameters",
                ));
            }
            return Ok(match preset {
                Preset::OptimalAbls => Family::Abls(AblsParams::optimal()),
                Preset::Eq24 => Family::Dct(DctParams::eq24()),
            });
        }
        match self.family {
            None => Err(Failure::usage("one of --family or --preset is required")),
            Some(FamilyKind::Abls) => {
                if explicit[3..].iter().any(Option::is_some) {
                    return Err(Failure::usage("--lambda* flags belong to --family dct"));
                }
                Ok(Family::Abls(AblsParams::new(
                    required(self.a, "a")?,
                    required(self.b, "b")?,
                    required(self.c, "c")?,
                )?))
            }
            Some(FamilyKind::Dct) => {
                if explicit[..3].iter().any(Option::is_some) {
                    return Err(Failure::usage("--a/--b/--c belong to --family abls"));
                }
                Ok(Family::Dct(DctParams::new(
                    required(self.lambda0_plus, "lambda0-plus")?,
                    required(self.lambda0_minus, "lambda0-minus")?,
                    required(self.lambda01, "lambda01")?,
                    required(self.lambda10, "lambda10")?,
                    required(self.lambda11, "lambda11")?,
                )?))
            }
        }
    }
}

fn required(v: Option<f64>, name: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::usage(format!("missing --{name}")))
}

/// An error with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BadParams(_)
            | Error::Parse(_)
            | Error::MissingSetting(_)
            | Error::InvalidState(_)
            | Error::InvalidMatrix(_)
            | Error::NotHermitian(_)
            | Error::DimMismatch(..)
            | Error::BadIndex(_) => 2,
            _ => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Serialize)]
struct GenerateOutput {
    schema: u32,
    #[serde(flatten)]
    params: Family,
    direct: MatrixJson,
    network: MatrixJson,
    max_norm_distance: f64,
}

fn network_circuit(family: &Family) -> boundent::Result<Circuit> {
    match family {
        Family::Abls(p) => abls_network_circuit(p, None),
        Family::Dct(p) => dct_network_circuit(p),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or to stdout when absent.
fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::usage(format!("stdout: {e}"))),
    }
}

fn generate(family: &FamilyArgs, dump: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let family = family.resolve()?;
    let direct = family.direct();
    let circuit = network_circuit(&family)?;
    let network = family.network()?;
    let distance = max_norm_distance(direct.matrix(), network.matrix())?;
    if let Some(path) = dump {
        emit(Some(path), &circuit.to_text())?;
    }
    let doc = GenerateOutput {
        schema: SCHEMA_VERSION,
        params: family,
        direct: MatrixJson::from_state(&direct),
        network: MatrixJson::from_state(&network),
        max_norm_distance: distance,
    };
    emit(out, &(to_json(&doc)? + "\n"))?;
    if distance > NETWORK_TOL {
        return Err(Failure::internal(format!(
            "network deviates from direct construction by {distance:e} > {NETWORK_TOL:e}"
        )));
    }
    Ok(())
}

fn certify(
    family: &FamilyArgs,
    from_counts: Option<&Path>,
    project: bool,
    bootstrap: Option<usize>,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let report: CertReport = match from_counts {
        Some(path) => {
            let data = parse_shot_lines(&read(path)?)?;
            let witness_params = if family.given() {
                match family.resolve()? {
                    Family::Abls(p) => p,
                    Family::Dct(_) => {
                        return Err(Failure::usage("the witness needs ABLS parameters"))
                    }
                }
            } else {
                AblsParams::optimal()
            };
            let opts = CountsOptions {
                witness_params,
                project,
                bootstrap: bootstrap.map(|n| (n, seed)),
            };
            certify_counts(&data, &opts)?
        }
        None => certify_family(&family.resolve()?)?,
    };
    emit(out, &(to_json(&report)? + "\n"))?;
    let failed = report.failed_checks();
    if !failed.is_empty() {
        let names: Vec<String> = failed
            .iter()
            .map(|c| format!("{} ({:e} > {:e})", c.name, c.value, c.tolerance))
            .collect();
        return Err(Failure::internal(format!(
            "cross-checks failed: {}",
            names.join(", ")
        )));
    }
    Ok(())
}

fn run_sweep(start: f64, stop: f64, step: f64, out: Option<&Path>) -> Result<(), Failure> {
    let grid = sweep_grid(start, stop, step);
    if grid.is_empty() {
        return Err(Failure::usage(format!(
            "empty sweep range: start = {start}, stop = {stop}, step = {step}"
        )));
    }
    let rows = sweep(&grid)?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    emit(out, &String::from_utf8_lossy(&buf))?;
    if let Some(best) = rows.iter().max_by(|x, y| x.epsilon.total_cmp(&y.epsilon)) {
        eprintln!("max epsilon {:.6} at a = {:.6}", best.epsilon, best.a);
    }
    if let Some(a) = crossover(&rows) {
        eprintln!("branch switch at a = {a:.6}");
    }
    Ok(())
}

fn tomo_sim(
    family: &FamilyArgs,
    state: Option<&Path>,
    shots: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let rho: DensityMatrix = match state {
        Some(path) => {
            if family.given() {
                return Err(Failure::usage(
                    "--state cannot be combined with family flags",
                ));
            }
            parse_state(&read(path)?)?
        }
        None => family.resolve()?.direct(),
    };
    let mut settings = MeasSetting::tomography();
    settings.push(MeasSetting::uniform(Axis::P));
    settings.push(MeasSetting::uniform(Axis::M));
    let data = sample_settings(&rho, &settings, shots, seed)?;
    emit(out, &to_shot_lines(&data))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate {
            family,
            dump_circuit,
            out,
        } => generate(&family, dump_circuit.as_deref(), out.as_deref()),
        Command::Certify {
            family,
            from_counts,
            project,
            bootstrap,
            seed,
            out,
        } => certify(
            &family,
            from_counts.as_deref(),
            project,
            bootstrap,
            seed,
            out.as_deref(),
        ),
        Command::Sweep {
            start,
            stop,
            step,
            out,
        } => run_sweep(start, stop, step, out.as_deref()),
        Command::TomoSim {
            family,
            state,
            shots,
            seed,
            out,
        } => tomo_sim(&family, state.as_deref(), shots, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
