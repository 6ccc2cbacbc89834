use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use watermelon_cli::commands::{self, parse_grid, parse_list, HeightGrid};
use watermelon_cli::config::{self, parse_format, parse_precision, parse_tail_tol, Overrides, RunConfig};
use watermelon_cli::table::{emit, Format, Table};
use watermelon_cli::{exit, Failure};
use watermelon_core::dgop::Precision;
use watermelon_core::painleve::Which;
use watermelon_core::watermelon::{default_k_grid, Wall};

#[derive(Parser, Debug)]
#[command(name = "watermelon", version, about = "Maximal heights of nonintersecting Brownian excursions, discrete Gaussian orthogonal polynomials and Painleve II quantities")]
struct Cli {
    /// Configuration file of `key = value` lines (default: ./watermelon.conf if present).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Arithmetic for the orthogonal polynomial recurrences.
    #[arg(long, global = true, value_parser = parse_precision)]
    precision: Option<Precision>,
    /// Relative weight cutoff for the lattice window, in (0, 1e-10].
    #[arg(long, global = true, value_parser = parse_tail_tol)]
    tail_tol: Option<f64>,
    /// Directory for cached Painleve grids.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Output file; `-` or absent for standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Table format.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WhichArg {
    F1,
    F2,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WallArg {
    Absorbing,
    Reflecting,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tracy-Widom distribution functions on a regular grid.
    Tw {
        #[arg(long, value_enum, default_value = "f2")]
        which: WhichArg,
        #[arg(long, allow_negative_numbers = true, default_value_t = -6.0)]
        xmin: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 4.0)]
        xmax: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
    /// Exact CDF of the maximal height of N watermelons.
    Height {
        #[arg(long = "N")]
        n: usize,
        #[arg(long, value_parser = parse_wall)]
        wall: Wall,
        /// Edge-scaled grid `start:stop:step` (default -6:4:0.1).
        #[arg(long, value_parser = grid_arg, allow_hyphen_values = true, conflicts_with = "m_grid")]
        k_grid: Option<Grid>,
        /// Barrier heights `start:stop:step`.
        #[arg(long, value_parser = grid_arg, allow_hyphen_values = true)]
        m_grid: Option<Grid>,
    },
    /// Distance of the rescaled CDF from F1 as N grows.
    Converge {
        #[arg(long, value_enum, default_value = "both")]
        wall: WallArg,
        #[arg(long, value_parser = list_arg::<usize>, default_value = "8,16,32,64")]
        n_list: List<usize>,
        #[arg(long, value_parser = grid_arg, allow_hyphen_values = true, default_value = "-6:4:0.1")]
        k_grid: Grid,
    },
    /// Recurrence coefficients and norms of the discrete Gaussian polynomials.
    Dgop {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        kmax: usize,
    },
    /// Scaled Christoffel-Darboux kernel against the critical kernel.
    Kernel {
        #[arg(long)]
        n: usize,
        #[arg(long = "L", allow_negative_numbers = true, default_value_t = 1.0)]
        l: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, value_parser = list_arg::<f64>, allow_hyphen_values = true, default_value = "-1,-0.5,0.5,1")]
        points: List<f64>,
    },
    /// Free energy of the discrete ensemble against its expansion.
    FreeEnergy {
        #[arg(long, value_parser = list_arg::<usize>, default_value = "32,64")]
        n: List<usize>,
        #[arg(long = "L", value_parser = list_arg::<f64>, allow_hyphen_values = true, default_value = "-1,0,1")]
        l: List<f64>,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        alpha: f64,
    },
    /// Runs acceptance checks; exits 0 only if all pass.
    Validate {
        /// all, painleve, psikernel, dgop, watermelon or asym.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

fn parse_wall(s: &str) -> Result<Wall, String> {
    s.parse::<Wall>().map_err(|e| e.to_string())
}

/// `start:stop:step` grid, kept as one clap value.
#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

/// Comma-separated list, kept as one clap value.
#[derive(Clone, Debug)]
struct List<T>(Vec<T>);

fn grid_arg(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid)
}

fn list_arg<T: std::str::FromStr>(s: &str) -> Result<List<T>, String> {
    parse_list(s).map(List)
}

fn walls(w: WallArg) -> Vec<Wall> {
    match w {
        WallArg::Absorbing => vec![Wall::Absorbing],
        WallArg::Reflecting => vec![Wall::Reflecting],
        WallArg::Both => vec![Wall::Absorbing, Wall::Reflecting],
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    let flags = Overrides {
        precision: cli.precision,
        tail_tol: cli.tail_tol,
        cache_dir: cli.cache_dir,
        output: cli.output,
        format: cli.format,
    };
    let cfg: RunConfig = config::resolve(cli.config.as_deref(), std::env::var(config::CACHE_ENV).ok(), flags)?;
    let mut code = exit::OK;
    let table: Table = match cli.command {
        Command::Tw { which, xmin, xmax, step } => {
            let xs = parse_grid(&format!("{xmin}:{xmax}:{step}")).map_err(Failure::Value)?;
            let which = match which {
                WhichArg::F1 => Which::F1,
                WhichArg::F2 => Which::F2,
            };
            commands::tw(&cfg, which, &xs)?
        }
        Command::Height { n, wall, k_grid, m_grid } => {
            let grid = match (k_grid, m_grid) {
                (_, Some(m)) => HeightGrid::Barrier(m.0),
                (Some(k), None) => HeightGrid::Rescaled(k.0),
                (None, None) => HeightGrid::Rescaled(default_k_grid()),
            };
            commands::height(&cfg, n, wall, &grid)?
        }
        Command::Converge { wall, n_list, k_grid } => commands::converge(&cfg, &walls(wall), &n_list.0, &k_grid.0)?,
        Command::Dgop { n, alpha, a, kmax } => commands::dgop(&cfg, n, alpha, a, kmax)?,
        Command::Kernel { n, l, alpha, points } => commands::kernel(&cfg, n, l, alpha, &points.0)?,
        Command::FreeEnergy { n, l, alpha } => commands::free_energy(&cfg, &n.0, &l.0, alpha)?,
        Command::Validate { suite } => {
            let (table, all) = commands::validate(&cfg, &suite)?;
            if !all {
                code = exit::NUMERICAL;
            }
            table
        }
    };
    emit(&table, cfg.format, cfg.output.as_deref())?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    return ExitCode::from(if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        exit::USAGE as u8
                    } else {
                        exit::OK as u8
                    });
                }
                ErrorKind::ArgumentConflict => exit::CONFLICT,
                ErrorKind::InvalidValue | ErrorKind::ValueValidation | ErrorKind::InvalidUtf8 => exit::BAD_VALUE,
                _ => exit::USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("watermelon: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
