use clap::Parser;
use std::process::ExitCode;
use unihecke::cli::{run, Format, RunConfig, Suite};

/// Run verification suites for the Hecke algebras and diagrams of U(2,1).
#[derive(Parser, Debug)]
#[command(name = "unihecke", version)]
struct Args {
    /// Residue field size q = p^f, p odd.
    #[arg(long, default_value_t = 3)]
    q: u64,
    /// Characteristic of the coefficient field (default p).
    #[arg(long)]
    coeff_char: Option<u64>,
    /// Degree of the coefficient field over its prime field.
    #[arg(long)]
    coeff_deg: Option<u32>,
    /// Truncation precision for Laurent series.
    #[arg(long, default_value_t = unihecke::localfield::DEFAULT_PRECISION)]
    precision: usize,
    /// Depth of the ball in the tree.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Suites to run; all when omitted, none when given without values.
    #[arg(long, num_args = 0.., value_delimiter = ',')]
    suite: Option<Vec<Suite>>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match RunConfig::new(args.q) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    config.coeff_char = args.coeff_char;
    config.coeff_deg = args.coeff_deg;
    config.precision = args.precision;
    config.depth = args.depth;
    config.seed = args.seed;
    config.out = args.out.clone();
    config.format = args.format;
    if let Some(s) = args.suite {
        config.suites = s;
    }
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_config() { 2 } else { 1 });
        }
    };
    let text = match report.render(config.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {path}: {e}");
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    for s in &report.suites {
        eprintln!("{:<20} {:?}", s.name, s.verdict);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
