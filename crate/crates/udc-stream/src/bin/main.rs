//! Command-line front end: one experiment (or a seed sweep) per invocation,
//! JSON record per run, CSV in sweep mode.

use clap::Parser;
use udc_stream::error::{Error, Result};
use udc_stream::harness::{
    csv_row, parse_gen_spec, run_experiment, Algorithm, InputSpec, OracleMode, RunConfig,
    CSV_HEADER,
};
use udc_stream::window_solvers::DEFAULT_ORACLE_LIMIT;

#[derive(Parser, Debug)]
#[command(name = "udc-stream", about = "Streaming unit-ball cover cardinality estimation")]
struct Args {
    /// Algorithm: shift-l2, shift-linf, shift-1dstrips, twopass-linf,
    /// multipass-linf, lattice-l2, lattice-linf, lattice-l1, offline-exact,
    /// offline-shift
    #[arg(long)]
    algo: String,

    /// Accuracy parameter in (0, 1)
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,

    /// Shifting parameter (window side 2*ell); twopass-linf pins ell = 2
    #[arg(long, default_value_t = 5)]
    ell: i64,

    /// Ambient dimension; must match the algorithm (1 for shift-1dstrips)
    #[arg(long)]
    dim: Option<usize>,

    /// Norm; informational cross-check against the algorithm's norm
    #[arg(long, value_parser = ["l1", "l2", "linf"])]
    norm: Option<String>,

    /// RNG seed (first seed of the sweep in sweep mode)
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Independent estimator copies combined by minimum
    #[arg(long, default_value_t = 1)]
    copies: usize,

    /// Sampler-count override; guarantee "bound" field is omitted when this
    /// is below the formula value
    #[arg(long)]
    samplers: Option<usize>,

    /// Point file (text format, one point per line)
    #[arg(long, conflicts_with = "gen")]
    input: Option<std::path::PathBuf>,

    /// Generator spec, e.g. clusters:k=50,per=10,seed=1 or box:n=2000,size=100
    #[arg(long)]
    gen: Option<String>,

    /// Input format (text only)
    #[arg(long, default_value = "text", value_parser = ["text"])]
    format: String,

    /// Output file (stdout when absent)
    #[arg(long)]
    output: Option<std::path::PathBuf>,

    /// Exact-oracle comparison: auto (when certified or small) or off
    #[arg(long, default_value = "auto", value_parser = ["auto", "off"])]
    oracle: String,

    /// Max point count handed to the exact oracle
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,

    /// Sweep mode: run this many consecutive seeds and emit CSV
    #[arg(long)]
    sweep: Option<u64>,
}

fn build_config(args: &Args) -> Result<RunConfig> {
    let algo: Algorithm = args.algo.parse()?;
    if let Some(d) = args.dim {
        if d != algo.dim() {
            return Err(Error::ConfigError(format!(
                "--dim {d} does not match the algorithm's dimension {}",
                algo.dim()
            )));
        }
    }
    let input = match (&args.input, &args.gen) {
        (Some(path), None) => InputSpec::File(path.clone()),
        (None, Some(spec)) => InputSpec::Generated(parse_gen_spec(spec)?),
        _ => return Err(Error::ConfigError("exactly one of --input or --gen is required".into())),
    };
    Ok(RunConfig {
        algo,
        epsilon: args.epsilon,
        ell: args.ell,
        seed: args.seed,
        copies: args.copies,
        sampler_override: args.samplers,
        input,
        oracle: if args.oracle == "off" { OracleMode::Off } else { OracleMode::Auto },
        oracle_limit: args.oracle_limit,
    })
}

fn run(args: &Args) -> Result<String> {
    let mut cfg = build_config(args)?;
    match args.sweep {
        None => {
            let rec = run_experiment(&cfg)?;
            serde_json::to_string_pretty(&rec)
                .map_err(|e| Error::Serialization(e.to_string()))
        }
        Some(n) => {
            let mut out = String::from(CSV_HEADER);
            for s in 0..n {
                cfg.seed = args.seed + s;
                // re-seed generated instances too, so sweeps vary the data
                if let (InputSpec::Generated(spec), Some(gen)) = (&mut cfg.input, &args.gen) {
                    if !gen.contains("seed=") {
                        *spec = parse_gen_spec(&format!(
                            "{gen}{}seed={}",
                            if gen.contains(':') { "," } else { ":" },
                            cfg.seed
                        ))?;
                    }
                }
                let rec = run_experiment(&cfg)?;
                out.push('\n');
                out.push_str(&csv_row(&rec));
            }
            Ok(out)
        }
    }
}

fn main() {
    let args = Args::parse();
    match run(&args) {
        Ok(text) => match &args.output {
            Some(path) => {
                if let Err(e) = std::fs::write(path, text + "\n") {
                    eprintln!("error: {e}");
                    std::process::exit(1);
                }
            }
            None => println!("{text}"),
        },
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
