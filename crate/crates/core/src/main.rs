use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lassopeak::config::parse_config;
use lassopeak::cv::{
    cv_error_curve_with, fraction_grid, kfold_split, select_normalized, select_standard, Denominator,
    Selector, DEFAULT_GRID_POINTS,
};
use lassopeak::io::{
    describe_selections, emit_records_csv, emit_summary_csv, read_data_csv, read_records_csv, write_curve,
    write_knots,
};
use lassopeak::lars::{kkt_residual, lars_path};
use lassopeak::linalg::center_scale;
use lassopeak::simulation::{run_experiment_with, summarize};
use lassopeak::{Error, Result};

#[derive(Parser)]
#[command(name = "lassopeak", version, about = "Lasso paths and normalized cross-validated model selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectorFlag {
    Standard,
    Normalized,
    Both,
}

impl SelectorFlag {
    fn keeps(self, selector: Selector) -> bool {
        match self {
            SelectorFlag::Both => true,
            SelectorFlag::Standard => selector == Selector::Standard,
            SelectorFlag::Normalized => selector == Selector::Normalized,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum DenominatorFlag {
    PathEndpoint,
    PinvOls,
}

impl From<DenominatorFlag> for Denominator {
    fn from(flag: DenominatorFlag) -> Self {
        match flag {
            DenominatorFlag::PathEndpoint => Denominator::PathEndpoint,
            DenominatorFlag::PinvOls => Denominator::PinvOls,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the subsampling experiment and write one record per cell and selector.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Overrides `master_seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "both")]
        selector: SelectorFlag,
        #[arg(long, value_enum, default_value = "path_endpoint")]
        denominator_mode: DenominatorFlag,
    },
    /// Compute the Lasso path of a data set and write its knots.
    Path {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Recheck optimality at every knot.
        #[arg(long)]
        verify: bool,
    },
    /// Cross-validated error curve over the fraction grid.
    Cv {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "path_endpoint")]
        denominator_mode: DenominatorFlag,
    },
    /// Aggregate a records file into per (selector, n) means and deviations.
    Summary {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate { config, out, summary, seed, selector, denominator_mode } => {
            let mut config = parse_config(&std::fs::read_to_string(&config)?)?;
            if let Some(seed) = seed {
                config.master_seed = seed;
            }
            let mut records = run_experiment_with(&config, denominator_mode.into())?;
            records.retain(|r| selector.keeps(r.selector));
            emit_records_csv(&records, &out)?;
            if let Some(summary_path) = summary {
                emit_summary_csv(&summarize(&records)?, &summary_path)?;
            }
        }
        Command::Path { data, out, verify } => {
            let data = read_data_csv(&data)?;
            let (x, y) = center_scale(&data.x, &data.y)?;
            let path = lars_path(&x, &y)?;
            if verify {
                let scale = path.knots()[0].lambda.max(1.0);
                let worst = path
                    .knots()
                    .iter()
                    .map(|k| kkt_residual(&x, &y, &k.beta, k.lambda))
                    .fold(0.0, f64::max);
                eprintln!("max_kkt_residual={worst:e}");
                if worst > 1e-8 * scale {
                    return Err(Error::VerificationFailed(format!("KKT residual {worst:e} exceeds tolerance")));
                }
            }
            let mut writer = create(&out)?;
            write_knots(&path, &data.predictor_names, &mut writer)?;
            writer.flush()?;
        }
        Command::Cv { data, k, out, seed, denominator_mode } => {
            let data = read_data_csv(&data)?;
            let (x, y) = center_scale(&data.x, &data.y)?;
            let folds = kfold_split(x.nrows(), k, &mut ChaCha8Rng::seed_from_u64(seed))?;
            let grid = fraction_grid(DEFAULT_GRID_POINTS)?;
            let denominator: Denominator = denominator_mode.into();
            let curve = cv_error_curve_with(&x, &y, &folds, &grid, denominator)?;
            let path = lars_path(&x, &y)?;
            let full = denominator.reference_l1(&path, &x, &y)?;
            let standard = select_standard(&curve);
            let normalized = select_normalized(&curve, full)?;
            let mut writer = create(&out)?;
            write_curve(&curve, &mut writer)?;
            writer.flush()?;
            print!("{}", describe_selections(&standard, &normalized));
        }
        Command::Summary { records, out } => {
            let records = read_records_csv(&records)?;
            emit_summary_csv(&summarize(&records)?, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}: {}", err.class(), err);
            ExitCode::FAILURE
        }
    }
}
