mod exit;
mod report;
mod store;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use orbit_census::counting::{compare_weighted, count_curves};
use orbit_census::solver::{build_database, solve_letters, DatabaseMeta};
use orbit_census::solver::database::fmt_f64;
use orbit_census::spectral::{
    entropy_estimate, g_series, series_csv, zeta_log_deriv, CutoffWindow, EntropyMethod, OrbitSet,
};
use orbit_census::symbolic::parse_letters;
use orbit_census::{BilliardTable, OrbitDatabase, SolveOptions, ZeroFilter};

use exit::{Failure, ResultExt, ASSUMPTIONS, PARSE};

#[derive(Parser)]
#[command(name = "orbit-census", version, about = "Periodic-orbit census for planar disk billiards")]
struct Cli {
    /// Seed for the solver's restart jitter.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for database builds (default: all cores).
    #[arg(long, global = true, env = "ORBIT_CENSUS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Obstacle configurations.
    #[command(subcommand)]
    Table(TableCmd),
    /// Periodic orbits.
    #[command(subcommand)]
    Orbits(OrbitsCmd),
    /// Orbit sums and counting functions over a database.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Write a TOML summary of a database.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum TableCmd {
    /// Check disjointness and the non-eclipse condition.
    Validate { table: PathBuf },
}

#[derive(Args)]
struct SolverArgs {
    /// Gradient tolerance of the Newton solve.
    #[arg(long, default_value_t = orbit_census::solver::orbit::DEFAULT_GRAD_TOL)]
    tol: f64,
    #[arg(long, default_value_t = orbit_census::solver::orbit::DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Subcommand)]
enum OrbitsCmd {
    /// Solve every primitive word up to a length and write the database.
    Enumerate {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        max_len: usize,
        /// `any`, `exactly:<k>` or `at_most:<k>` bounces on obstacle 0.
        #[arg(long, default_value = "any")]
        zeros: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Solve a single word, e.g. `--word 1,2,3`.
    Solve {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        word: String,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args)]
struct DbArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    db: PathBuf,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WindowArgs {
    /// Cutoff window configuration (TOML).
    #[arg(long)]
    window: Option<PathBuf>,
    /// Without `--window`: shrink the bounce-box window by this fraction per side.
    #[arg(long, default_value_t = 0.0)]
    shrink: f64,
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Counting curves `N(n,t)`.
    Count {
        #[command(flatten)]
        io: DbArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Largest period (default: just below the certificate).
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Add a weighted column with this window.
        #[arg(long)]
        window: Option<PathBuf>,
    },
    /// Entropy of the zero-free sub-billiard.
    Entropy {
        #[command(flatten)]
        io: DbArgs,
        #[arg(long, default_value = "both")]
        method: String,
    },
    /// `−∂_s log ζ(s)` of the zero-free sub-billiard.
    Zeta {
        #[command(flatten)]
        io: DbArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        #[arg(long)]
        cutoff: Option<f64>,
    },
    /// Weighted series `G_{n,ρ}(s)`.
    Gseries {
        #[command(flatten)]
        io: DbArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        #[arg(long)]
        cutoff: Option<f64>,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Weighted against plain counts and the short-interval census.
    Weighted {
        #[command(flatten)]
        io: DbArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Interval threshold between obstacle-0 bounces (default: 3 × min gap).
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[command(flatten)]
        window: WindowArgs,
    },
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    io: DbArgs,
    /// Largest number of obstacle-0 bounces to count.
    #[arg(long, default_value_t = 2)]
    n_max: usize,
    #[arg(long, default_value_t = 520)]
    points: usize,
    #[arg(long)]
    t0: Option<f64>,
    #[command(flatten)]
    window: WindowArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(PARSE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Table(TableCmd::Validate { table }) => validate(&table),
        Command::Orbits(OrbitsCmd::Enumerate { table, max_len, zeros, out, solver }) => {
            let opts = solve_options(&solver, cli.seed);
            enumerate(&table, max_len, &zeros, &out, &opts, cli.threads)
        }
        Command::Orbits(OrbitsCmd::Solve { table, word, solver }) => {
            solve(&table, &word, &solve_options(&solver, cli.seed))
        }
        Command::Analyze(cmd) => analyze(cmd),
        Command::Report(args) => write_report(args, cli.seed),
    }
}

fn solve_options(args: &SolverArgs, seed: u64) -> SolveOptions {
    SolveOptions { tol: args.tol, max_iter: args.max_iter, seed }
}

fn validate(path: &Path) -> Result<(), Failure> {
    let table = store::load_table(path)?;
    print!("{}", table.validation());
    table.ensure_valid().code(ASSUMPTIONS)
}

fn enumerate(
    table_path: &Path,
    max_len: usize,
    zeros: &str,
    out: &Path,
    opts: &SolveOptions,
    threads: Option<usize>,
) -> Result<(), Failure> {
    let table = store::load_valid_table(table_path)?;
    let filter: ZeroFilter = zeros.parse().code(PARSE)?;
    let outcome = build_database(&table, max_len, filter, opts, threads)?;
    let failures = store::failures_path(out);
    if !outcome.failures.is_empty() {
        let mut text = String::new();
        for f in &outcome.failures {
            text.push_str(&format!("{};{}\n", f.word, f.error));
        }
        store::write_atomic(&failures, text.as_bytes())?;
        return Err(Failure::msg(
            ASSUMPTIONS,
            format!("{} words failed, see {}", outcome.failures.len(), failures.display()),
        ));
    }
    let db = outcome.database;
    store::write_atomic(&store::meta_path(out), db.meta.to_toml_string().as_bytes())?;
    store::write_atomic(out, db.to_csv_string().as_bytes())?;
    if failures.exists() {
        std::fs::remove_file(&failures)
            .with_context(|| format!("removing stale {}", failures.display()))
            .code(PARSE)?;
    }
    eprintln!("{} orbits written to {}", db.len(), out.display());
    Ok(())
}

fn solve(table_path: &Path, word: &str, opts: &SolveOptions) -> Result<(), Failure> {
    let table = store::load_valid_table(table_path)?;
    let letters = parse_letters(word).code(PARSE)?;
    let orbit = solve_letters(&letters, &table, opts)?;
    let mut db = OrbitDatabase::new(DatabaseMeta {
        table_fingerprint: table.fingerprint(),
        max_word_len: orbit.word.len(),
        zeros: ZeroFilter::Any.to_string(),
        tol: opts.tol,
        max_iter: opts.max_iter,
        seed: opts.seed,
    });
    db.insert(orbit);
    print!("{}", db.to_csv_string());
    Ok(())
}

fn open(io: &DbArgs) -> Result<(BilliardTable, OrbitDatabase), Failure> {
    let table = store::load_table(&io.table)?;
    let db = store::load_database(&io.db, &table)?;
    Ok((table, db))
}

fn read_window(path: &Path) -> Result<CutoffWindow, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .code(PARSE)?;
    CutoffWindow::from_toml_str(&text).code(PARSE)
}

fn pick_window(args: &WindowArgs, set: &OrbitSet) -> Result<CutoffWindow, Failure> {
    match &args.window {
        Some(p) => read_window(p),
        None => set
            .box_window(args.shrink)
            .ok_or_else(|| Failure::msg(ASSUMPTIONS, "no bounces on obstacle 0 to build a window from")),
    }
}

fn below_certificate(set: &OrbitSet) -> f64 {
    set.certified_t * (1.0 - 1e-12)
}

fn linear_grid(t_max: f64, points: usize) -> Vec<f64> {
    (1..=points.max(1)).map(|i| t_max * i as f64 / points.max(1) as f64).collect()
}

fn default_t0(table: &BilliardTable) -> f64 {
    3.0 * table.min_gap(false)
}

fn analyze(cmd: AnalyzeCmd) -> Result<(), Failure> {
    match cmd {
        AnalyzeCmd::Count { io, n, tmax, points, window } => {
            let (table, db) = open(&io)?;
            let set = OrbitSet::from_database(&db, &table);
            let rho = window.as_deref().map(read_window).transpose()?;
            let grid = linear_grid(tmax.unwrap_or_else(|| below_certificate(&set)), points);
            let curve = count_curves(&set, n, &grid, rho.as_ref())?;
            store::emit(io.out.as_deref(), &curve.to_csv())
        }
        AnalyzeCmd::Entropy { io, method } => {
            let (table, db) = open(&io)?;
            let method: EntropyMethod = method.parse()?;
            let est = entropy_estimate(&OrbitSet::from_database(&db, &table).zero_free(&table), method)?;
            store::emit(io.out.as_deref(), &toml::to_string(&est).code(PARSE)?)
        }
        AnalyzeCmd::Zeta { io, s, cutoff } => {
            let (table, db) = open(&io)?;
            let set = OrbitSet::from_database(&db, &table).zero_free(&table);
            let cutoff = cutoff.unwrap_or_else(|| below_certificate(&set));
            let rows = s
                .iter()
                .map(|&s| zeta_log_deriv(s, &set, cutoff))
                .collect::<Result<Vec<_>, _>>()?;
            store::emit(io.out.as_deref(), &series_csv(&rows))
        }
        AnalyzeCmd::Gseries { io, n, s, cutoff, window } => {
            let (table, db) = open(&io)?;
            let set = OrbitSet::from_database(&db, &table);
            let rho = pick_window(&window, &set)?;
            let cutoff = cutoff.unwrap_or_else(|| below_certificate(&set));
            let rows = s
                .iter()
                .map(|&s| g_series(n, s, &set, &rho, cutoff))
                .collect::<Result<Vec<_>, _>>()?;
            store::emit(io.out.as_deref(), &series_csv(&rows))
        }
        AnalyzeCmd::Weighted { io, n, t0, points, window } => {
            let (table, db) = open(&io)?;
            let set = OrbitSet::from_database(&db, &table);
            let rho = pick_window(&window, &set)?;
            let grid = linear_grid(below_certificate(&set), points);
            let r = compare_weighted(&set, n, &grid, &rho, t0.unwrap_or_else(|| default_t0(&table)))?;
            let mut text = String::from("t;count;weighted;deficit;short_count\n");
            for k in 0..grid.len() {
                let d = r.deficit[k].map_or(String::new(), fmt_f64);
                text.push_str(&format!(
                    "{};{};{};{};{}\n",
                    fmt_f64(grid[k]),
                    r.counts[k],
                    fmt_f64(r.weighted[k]),
                    d,
                    r.short_counts[k]
                ));
            }
            store::emit(io.out.as_deref(), &text)
        }
    }
}

fn write_report(args: ReportArgs, seed: u64) -> Result<(), Failure> {
    let (table, db) = open(&args.io)?;
    let opts = report::ReportOptions {
        n_max: args.n_max,
        points: args.points,
        t0: args.t0.unwrap_or_else(|| default_t0(&table)),
        window: args.window.window.as_deref().map(read_window).transpose()?,
        shrink: args.window.shrink,
        seed,
    };
    let rep = report::build(&db, &table, &opts)?;
    store::emit(args.io.out.as_deref(), &toml::to_string(&rep).code(PARSE)?)
}
