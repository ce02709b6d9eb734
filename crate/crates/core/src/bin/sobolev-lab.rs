use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sobolev_lab::cli::{self, CliError, EXIT_FAILURE, OUTPUT_ENV};
use toml::{Table, Value};

#[derive(Parser)]
#[command(name = "sobolev-lab", version, about = "Extremal functions of Sobolev embeddings on grids")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// TOML experiment config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: config `output`, then $SOBOLEV_LAB_OUT, then ./sobolev-lab-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Gauss-Seidel or Jacobi sweeps for the infinity-Laplacian solver.
    #[arg(long, global = true)]
    mode: Option<Mode>,
    /// Shape shortcut when no config gives one: a unit square or a unit disk.
    #[arg(long, global = true)]
    shape: Option<ShapeArg>,
    #[arg(long, global = true)]
    h: Option<f64>,
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Distance function and its maximum set.
    Dist,
    /// Ridge (medial axis) indicator.
    Ridge,
    /// Extremal function for one (p, q).
    Solve {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        /// Also compute the sup-norm constant and sandwich bounds.
        #[arg(long)]
        sup_norm: bool,
    },
    /// Infinity-harmonic obstacle problem.
    Inflap,
    /// Ladder of p values under a q profile.
    Sweep {
        /// constant_r:R, proportional:Q, power:ALPHA or custom:COEFF,EXPONENT
        #[arg(long)]
        profile: Option<String>,
    },
    /// Recompute verdicts from an existing report.csv.
    Report {
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    GaussSeidel,
    Jacobi,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Square,
    Disk,
}

fn section<'a>(t: &'a mut Table, key: &str) -> &'a mut Table {
    t.entry(key).or_insert_with(|| Value::Table(Table::new())).as_table_mut().expect("table section")
}

fn build_config(args: &Args) -> Result<cli::RunConfig, CliError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?,
        None => String::new(),
    };
    // Malformed files get the line-numbered error from the real parser.
    let mut t: Table = match text.parse() {
        Ok(t) => t,
        Err(_) => return cli::parse_config(&text),
    };
    let original = t.clone();
    let name = match &args.command {
        Cmd::Dist => "dist",
        Cmd::Ridge => "ridge",
        Cmd::Solve { .. } => "solve",
        Cmd::Inflap => "inflap",
        Cmd::Sweep { .. } => "sweep",
        Cmd::Report { .. } => "report",
    };
    t.insert("command".into(), name.into());
    if let Some(shape) = args.shape {
        let mut s = Table::new();
        match shape {
            ShapeArg::Square => {
                s.insert("kind".into(), "rectangle".into());
                s.insert("width".into(), 1.0.into());
                s.insert("height".into(), 1.0.into());
            }
            ShapeArg::Disk => {
                s.insert("kind".into(), "disk".into());
                s.insert("radius".into(), 1.0.into());
            }
        }
        section(&mut t, "domain").insert("shape".into(), Value::Table(s));
    }
    if let Some(h) = args.h {
        section(&mut t, "domain").insert("h".into(), h.into());
    }
    if let Some(mode) = args.mode {
        let m = match mode {
            Mode::GaussSeidel => "gauss_seidel",
            Mode::Jacobi => "jacobi",
        };
        section(&mut t, "inflap").insert("mode".into(), m.into());
    }
    match &args.command {
        Cmd::Solve { p, q, sup_norm } => {
            let s = section(&mut t, "solve");
            if let Some(p) = p {
                s.insert("p".into(), (*p).into());
            }
            if let Some(q) = q {
                s.insert("q".into(), (*q).into());
            }
            if *sup_norm {
                s.insert("sup_norm".into(), true.into());
            }
        }
        Cmd::Sweep { profile: Some(spec) } => {
            let prof = cli::parse_profile(spec)?;
            let v = Value::try_from(prof).expect("profiles serialize");
            section(&mut t, "sweep").insert("profile".into(), v);
        }
        Cmd::Report { input: Some(path) } => {
            section(&mut t, "report").insert("input".into(), path.display().to_string().into());
        }
        _ => {}
    }
    if t == original {
        return cli::parse_config(&text);
    }
    // Line numbers would point into the merged document, not the user's file.
    cli::parse_config(&t.to_string()).map_err(|e| match e {
        CliError::Parse { message, .. } => CliError::Parse { line: None, message },
        other => other,
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let verbose = args.verbose;
    let result = build_config(&args).and_then(|cfg| {
        let out = cli::resolve_output(args.out.as_deref(), &cfg);
        cli::execute(&cfg, &out, |msg| {
            if verbose {
                eprintln!("{msg}");
            }
        })
    });
    match result {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.summary).expect("json"));
            eprintln!("wrote {} artifacts to {}", outcome.artifacts.len() + 1, outcome.out_dir.display());
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Io { .. }) {
                eprintln!("hint: set --out or ${OUTPUT_ENV} to a writable directory");
            }
            ExitCode::from(EXIT_FAILURE as u8)
        }
    }
}
