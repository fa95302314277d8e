use clap::{Parser, Subcommand, ValueEnum};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thiserror::Error;
use transmod::domain::{CurveFamilySpec, DomainError, DomainSpec, QuotientGrid};
use transmod::gallery::corpus;
use transmod::geom::{is_tau_fat, quasiroundness, relative_distance};
use transmod::modsolve::{fmt17, modulus, ModulusResult, SolveError, SolverConfig, Status};
use transmod_cli::campaign::{self, CampaignConfig};
use transmod_cli::svg::density_svg;

const EXIT_OK: u8 = 0;
const EXIT_CAMPAIGN_FAILED: u8 = 1;
const EXIT_ITERATION_CAP: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "transmod", version, about = "Discrete transboundary modulus of curve families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Human,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Modulus of one curve family on one domain.
    Compute {
        #[arg(long)]
        domain: PathBuf,
        /// Family JSON, inline or as a path.
        #[arg(long)]
        family: String,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        svg: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_paths: Option<usize>,
        #[arg(long)]
        path_tol: Option<f64>,
        /// Solver configuration JSON; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run every verification suite and write campaign.csv.
    Campaign {
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplier on every reference grid spacing.
        #[arg(long)]
        h_scale: Option<f64>,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
        #[arg(long)]
        max_paths: Option<usize>,
        #[arg(long)]
        path_tol: Option<f64>,
        /// Campaign configuration JSON; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// List the gallery corpus, optionally exporting each case.
    GalleryList {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Validate a domain file and report the geometry of its continua.
    CheckGeometry {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("{0}: {1}")]
    Config(String, serde_json::Error),
    #[error("{0}")]
    Input(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(path.display().to_string(), e)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(io_err(path))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(path.display().to_string(), e))
}

fn load_family(arg: &str) -> Result<CurveFamilySpec, CliError> {
    if arg.trim_start().starts_with('{') {
        return Ok(CurveFamilySpec::from_json(arg)?);
    }
    let path = Path::new(arg);
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(CurveFamilySpec::from_json(&text)?)
}

fn solver_config(
    config: Option<&Path>,
    seed: Option<u64>,
    max_paths: Option<usize>,
    path_tol: Option<f64>,
) -> Result<SolverConfig, CliError> {
    let mut cfg = match config {
        Some(p) => read_json(p)?,
        None => SolverConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if max_paths.is_some() {
        cfg.max_paths = max_paths;
    }
    if let Some(t) = path_tol {
        cfg.path_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn human_result(label: &str, h: f64, r: &ModulusResult) -> String {
    format!(
        "{label}  h={h}\n  value  {:.8}\n  bounds [{:.8}, {:.8}]\n  status {} after {} iterations\n",
        r.value,
        r.lower_bound,
        r.upper_bound,
        r.status.as_str(),
        r.iterations
    )
}

fn compute(
    domain: &Path,
    family: &str,
    h: f64,
    out: &Path,
    format: Format,
    svg: bool,
    cfg: SolverConfig,
) -> Result<Status, CliError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(CliError::Input(format!("--h must be positive, got {h}")));
    }
    let spec = DomainSpec::load(domain)?;
    let fam = load_family(family)?;
    fam.validate(&spec)?;
    let grid = QuotientGrid::rasterize(&spec, h)?;
    let r = modulus(&grid, &fam, &cfg)?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let csv = format!("{}\n{}", ModulusResult::CSV_HEADER, r.csv_row(&spec.label, h));
    write(&out.join("result.csv"), &csv)?;
    write(&out.join("density.txt"), &r.density.dump(&grid))?;
    if svg {
        write(&out.join("density.svg"), &density_svg(&grid, &r.density))?;
    }
    match format {
        Format::Csv => print!("{csv}"),
        Format::Human => print!("{}", human_result(&spec.label, h, &r)),
    }
    Ok(r.status)
}

fn run_campaign(out: &Path, format: Format, cfg: &CampaignConfig) -> Result<bool, CliError> {
    let report = campaign::run(cfg);
    fs::create_dir_all(out).map_err(io_err(out))?;
    let path = out.join("campaign.csv");
    let mut buf = Vec::new();
    report.write_csv(&mut buf).map_err(|e| CliError::Input(e.to_string()))?;
    fs::write(&path, &buf).map_err(io_err(&path))?;
    match format {
        Format::Csv => print!("{}", String::from_utf8_lossy(&buf)),
        Format::Human => print!("{}", report.summary()),
    }
    for r in report.failures() {
        eprintln!(
            "FAIL {}  expected {}  observed {}  slack {}",
            r.id,
            fmt17(r.expected),
            fmt17(r.observed),
            fmt17(r.slack)
        );
    }
    Ok(report.all_pass())
}

fn gallery_list(out: Option<&Path>, format: Format) -> Result<(), CliError> {
    if matches!(format, Format::Csv) {
        println!("name,n,delta,h,bound_kind,bound");
    }
    for case in corpus() {
        match format {
            Format::Csv => println!(
                "{},{},{},{},{:?},{}",
                case.name,
                case.n,
                fmt17(case.delta),
                fmt17(case.h),
                case.reference_bound.kind,
                fmt17(case.reference_bound.value)
            ),
            Format::Human => println!(
                "{:<16} delta {:<10.6} h 1/{:<6} bound {:.6} ({})",
                case.name,
                case.delta,
                (1.0 / case.h).round(),
                case.reference_bound.value,
                case.reference_bound.source
            ),
        }
        if let Some(dir) = out {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            case.export(dir).map_err(|e| CliError::Input(e.to_string()))?;
        }
    }
    Ok(())
}

fn check_geometry(domain: &Path, format: Format) -> Result<(), CliError> {
    let spec = DomainSpec::load(domain)?;
    spec.validate()?;
    if matches!(format, Format::Csv) {
        println!("index,kind,diam,area,quasiround,tau_estimate,nearest_relative_distance");
    } else {
        println!("{}: {} continua, {} points", spec.label, spec.continua.len(), spec.points.len());
    }
    for (i, c) in spec.continua.iter().enumerate() {
        let q = quasiroundness(c).unwrap_or(f64::INFINITY);
        let tau = is_tau_fat(c, 0.25, 16).map_or(0.0, |r| r.tau_estimate);
        let sep = spec
            .continua
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .filter_map(|(_, d)| relative_distance(c, d).ok())
            .fold(f64::INFINITY, f64::min);
        let kind = serde_json::to_value(c)
            .ok()
            .and_then(|v| v.get("kind").and_then(|k| k.as_str().map(String::from)))
            .unwrap_or_default();
        match format {
            Format::Csv => println!(
                "{i},{kind},{},{},{},{},{}",
                fmt17(c.diam()),
                fmt17(c.area()),
                fmt17(q),
                fmt17(tau),
                fmt17(sep)
            ),
            Format::Human => println!(
                "  [{i}] {kind:<10} diam {:.6}  area {:.6}  quasiround {:.4}  fat {:.4}  nearest delta {:.4}",
                c.diam(),
                c.area(),
                q,
                tau,
                sep
            ),
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Compute {
            domain,
            family,
            h,
            out,
            format,
            svg,
            seed,
            max_paths,
            path_tol,
            config,
        } => {
            let cfg = solver_config(config.as_deref(), seed, max_paths, path_tol)?;
            Ok(match compute(&domain, &family, h, &out, format, svg, cfg)? {
                Status::IterationCap => EXIT_ITERATION_CAP,
                Status::Converged | Status::InfeasibleFamily => EXIT_OK,
            })
        }
        Command::Campaign {
            out,
            seed,
            h_scale,
            format,
            max_paths,
            path_tol,
            config,
        } => {
            let mut cfg: CampaignConfig = match &config {
                Some(p) => read_json(p)?,
                None => CampaignConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(s) = h_scale {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(CliError::Input(format!("--h-scale must be positive, got {s}")));
                }
                cfg.h_scale = s;
            }
            if max_paths.is_some() {
                cfg.solver.max_paths = max_paths;
            }
            if let Some(t) = path_tol {
                cfg.solver.path_tol = t;
            }
            cfg.solver.validate()?;
            Ok(if run_campaign(&out, format, &cfg)? { EXIT_OK } else { EXIT_CAMPAIGN_FAILED })
        }
        Command::GalleryList { out, format } => gallery_list(out.as_deref(), format).map(|_| EXIT_OK),
        Command::CheckGeometry { domain, format } => check_geometry(&domain, format).map(|_| EXIT_OK),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
