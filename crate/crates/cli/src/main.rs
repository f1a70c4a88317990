use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use deligne::delignedata::{ClassificationReport, ManifoldData, RepLabel};
use deligne::exactalg::GroupElement;
use deligne::finheis;
use deligne::selftest::{self, InducedParams, SelftestConfig, Suite};

/// Exit code for unreadable or invalid input.
const EXIT_INPUT: u8 = 1;
/// Exit code for a failed property.
const EXIT_PROPERTY: u8 = 2;

#[derive(Parser)]
#[command(name = "deligne", version, about = "Representations of Heisenberg groups of smooth Deligne cohomology")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List one representative per equivalence class of irreducibles.
    Classify {
        file: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        level: u64,
        #[arg(long)]
        json: bool,
    },
    /// Check a manifold data file and report every violation.
    Validate { file: PathBuf },
    /// Irreducible projective representations of the torsion group.
    Irreps {
        file: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        level: u64,
        #[arg(long)]
        json: bool,
    },
    /// Decide whether two labels give equivalent representations.
    Equiv {
        file: PathBuf,
        /// `l1,...,lb:i`; for b = 0 write `:i`.
        #[arg(long, allow_hyphen_values = true)]
        label1: RepLabel,
        #[arg(long, allow_hyphen_values = true)]
        label2: RepLabel,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        level: u64,
    },
    /// Relabel under a change of decomposition by theta.
    Transport {
        file: PathBuf,
        /// Torsion coordinates of theta(e_j), rows separated by `;`, entries
        /// by `,`.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        /// Transport a single label instead of every class.
        #[arg(long, allow_hyphen_values = true)]
        label: Option<RepLabel>,
    },
    /// Run seeded property batteries.
    Selftest {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[command(flatten)]
        common: CommonTest,
    },
    /// Run the induced-representation battery with explicit window and Fock parameters.
    InducedSelftest {
        /// Window radius; sections live on `{-R..R}^b`.
        #[arg(long, default_value_t = 4)]
        radius: i64,
        /// Spectral modes of the circle model.
        #[arg(long, default_value_t = 2)]
        modes: usize,
        /// Truncation degree of the Fock space.
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long, default_value_t = 20)]
        round_trips: usize,
        #[command(flatten)]
        common: CommonTest,
    },
}

#[derive(Args)]
struct CommonTest {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    json: bool,
    /// Negative control: perturb one reference constant per suite.
    #[arg(long, hide = true)]
    tamper: bool,
}

struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

fn load(path: &Path) -> Result<ManifoldData, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let data = ManifoldData::from_json_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let violations = data.validate();
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| format!("  - {v}")).collect();
        return Err(input_error(format!("{}: invalid manifold data\n{}", path.display(), lines.join("\n"))));
    }
    Ok(data)
}

fn data_error(e: impl std::fmt::Display) -> Failure {
    input_error(e.to_string())
}

fn classify(file: &Path, level: u64, json: bool) -> Result<(), Failure> {
    let data = load(file)?;
    let c = data.classify(level).map_err(data_error)?;
    if json {
        let report = ClassificationReport::new(&data, &c);
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
        return Ok(());
    }
    println!("# {} (b = {}, torsion {}), level {level}", name(&data, file), data.b, data.linking.group());
    println!("{:<16} {:>6} {:>5}", "lambda", "irrep", "dim");
    for l in &c.labels {
        println!("{:<16} {:>6} {:>5}", format!("{:?}", l.lambda), l.irrep_index, c.irreps[l.irrep_index].dim());
    }
    println!("total {}", c.count);
    Ok(())
}

fn name(data: &ManifoldData, file: &Path) -> String {
    data.name.clone().unwrap_or_else(|| file.display().to_string())
}

fn validate(file: &Path) -> Result<(), Failure> {
    let data = load(file)?;
    println!("{}: valid (k = {}, b = {}, torsion {})", name(&data, file), data.k, data.b, data.linking.group());
    Ok(())
}

fn irreps(file: &Path, level: u64, json: bool) -> Result<(), Failure> {
    let data = load(file)?;
    let reps = finheis::build_irreps_at_level(&data.linking, level).map_err(data_error)?;
    let g = data.linking.group();
    let rows: Vec<serde_json::Value> = reps
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let traces: Vec<[f64; 2]> = (0..g.rank())
                .map(|j| {
                    let t = r.matrix(&g.generator(j)).trace();
                    [round(t.re), round(t.im)]
                })
                .collect();
            serde_json::json!({ "index": i, "dim": r.dim(), "generator_traces": traces })
        })
        .collect();
    if json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("serializable"));
        return Ok(());
    }
    println!("# torsion {g}, level {level}: {} irreducible(s)", reps.len());
    for row in &rows {
        println!("irrep {}: dim {}, traces at generators {}", row["index"], row["dim"], row["generator_traces"]);
    }
    Ok(())
}

fn round(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn equiv(file: &Path, a: &RepLabel, b: &RepLabel, level: u64) -> Result<(), Failure> {
    let data = load(file)?;
    let same = data.labels_equivalent(level, a, b).map_err(data_error)?;
    println!("{a} and {b} are {}at level {level}", if same { "equivalent " } else { "not equivalent " });
    Ok(())
}

fn parse_theta(s: &str, data: &ManifoldData) -> Result<Vec<GroupElement>, Failure> {
    let g = data.linking.group();
    let rows: Vec<&str> = if s.trim().is_empty() { Vec::new() } else { s.split(';').collect() };
    if rows.len() != data.b {
        return Err(input_error(format!("theta has {} rows, expected b = {}", rows.len(), data.b)));
    }
    rows.iter()
        .map(|row| {
            let coords: Vec<i64> = row
                .split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|e| input_error(format!("theta entry {x:?}: {e}"))))
                .collect::<Result<_, _>>()?;
            g.element(&coords).map_err(data_error)
        })
        .collect()
}

fn transport(file: &Path, theta: &str, label: Option<&RepLabel>) -> Result<(), Failure> {
    let data = load(file)?;
    let theta = parse_theta(theta, &data)?;
    let irreps = finheis::build_irreps(&data.linking).map_err(data_error)?;
    let labels = match label {
        Some(l) => vec![l.clone()],
        None => data.classify(1).map_err(data_error)?.labels,
    };
    for l in labels {
        let pi = irreps.get(l.irrep_index).ok_or_else(|| {
            input_error(format!("irrep index {} out of range ({} irreps)", l.irrep_index, irreps.len()))
        })?;
        let t = data.transport_decomposition(&theta, &l.lambda, pi).map_err(data_error)?;
        let mut target = None;
        for (j, r) in irreps.iter().enumerate() {
            if finheis::are_equivalent(&t.rep, r).map_err(data_error)? {
                target = Some(j);
                break;
            }
        }
        let j = target.ok_or_else(|| input_error("twisted representation matches no canonical irreducible"))?;
        let mu: Vec<String> = t.mu.iter().map(|m| m.to_string()).collect();
        let new = RepLabel { lambda: l.lambda.clone(), irrep_index: j };
        println!("{l} -> {new}   mu = [{}]", mu.join(", "));
    }
    Ok(())
}

fn run_selftest(suite: Suite, common: &CommonTest, induced: InducedParams) -> Result<(), Failure> {
    if common.tol.is_some_and(|t| !(t > 0.0)) {
        return Err(input_error("--tol must be positive"));
    }
    let cfg = SelftestConfig { seed: common.seed, trials: common.trials, tol: common.tol, tamper: common.tamper, induced };
    let report = selftest::run(suite, &cfg);
    if common.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        for r in &report.results {
            println!("{r}");
        }
    }
    let failed: Vec<String> = report.failures().map(|r| format!("{}/{}", r.suite, r.name)).collect();
    if failed.is_empty() {
        if !common.json {
            println!("PASS: {} properties, seed {}", report.results.len(), report.seed);
        }
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_PROPERTY,
            message: format!("FAIL: {} (seed {}); rerun with the same seed to reproduce", failed.join(", "), report.seed),
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Classify { file, level, json } => classify(file, *level, *json),
        Command::Validate { file } => validate(file),
        Command::Irreps { file, level, json } => irreps(file, *level, *json),
        Command::Equiv { file, label1, label2, level } => equiv(file, label1, label2, *level),
        Command::Transport { file, theta, label } => transport(file, theta, label.as_ref()),
        Command::Selftest { suite, common } => run_selftest(*suite, common, InducedParams::default()),
        Command::InducedSelftest { radius, modes, degree, round_trips, common } => {
            let params = InducedParams { radius: *radius, modes: *modes, degree: *degree, round_trips: *round_trips };
            if params.radius < 3 || params.modes == 0 {
                Err(input_error("--radius must be at least 3 and --modes at least 1"))
            } else {
                run_selftest(Suite::Induced, common, params)
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
