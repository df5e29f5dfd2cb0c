use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use msfa_demosaic::classic::{bilinear_demosaic, ppi_demosaic};
use msfa_demosaic::io::{
    band_preview, import_band_images, pattern_sidecar, read_checkpoint, read_cube, read_pattern,
    write_checkpoint, write_cube, write_pattern, write_pgm, write_report, Checkpoint, CubeDirectory,
};
use msfa_demosaic::metrics::{format_db, PsnrConvention};
use msfa_demosaic::net::{init_params, network_forward, NetworkConfig};
use msfa_demosaic::synth::textured_cube;
use msfa_demosaic::train::{
    crossval_run_with, fit, training_pairs, AdamHyper, AdamState, Budget, Dataset, TrainPlan,
};
use msfa_demosaic::{apply_msfa, MosaicImage, MsfaPattern};

#[derive(Parser)]
#[command(name = "msfa", version, about = "Multispectral filter-array demosaicking toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stack per-band P5 graymaps into a cube file.
    Import {
        #[arg(long)]
        dir: PathBuf,
        /// Band file names in band order, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        bands: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate filter-array capture; writes a one-band cube plus `<out>.pattern`.
    Mosaic {
        #[arg(long = "in")]
        input: PathBuf,
        /// Pattern sidecar file; defaults to the 4×4 16-band layout.
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a full cube from a mosaic.
    Demosaic {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long = "in")]
        input: PathBuf,
        /// Overrides the mosaic's `.pattern` sidecar.
        #[arg(long)]
        pattern: Option<PathBuf>,
        /// Network checkpoint (required for `--method net`).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write an untrained checkpoint (identity refinement).
    Init {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the refinement network on every cube in a directory.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        common: TrainArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// k-fold cross-validation with a CSV PSNR report.
    Crossval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 8)]
        folds: usize,
        #[command(flatten)]
        common: TrainArgs,
        /// Average per-band dB instead of one whole-cube MSE.
        #[arg(long)]
        per_band: bool,
        #[arg(long)]
        report: PathBuf,
    },
    /// PSNR of a test cube against a reference, in dB.
    Psnr {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        per_band: bool,
    },
    /// Write a seeded synthetic textured cube.
    Synth {
        #[arg(long, default_value_t = 64)]
        height: usize,
        #[arg(long, default_value_t = 64)]
        width: usize,
        #[arg(long, default_value_t = 16)]
        bands: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// 8-bit graymap preview of one band.
    Preview {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        band: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct TrainArgs {
    #[arg(long)]
    pattern: Option<PathBuf>,
    /// Network config (TOML); defaults to the standard network.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 300)]
    epochs: usize,
    /// Count optimizer steps instead of epochs.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 8)]
    batch: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sub-image grid size per axis.
    #[arg(long, default_value_t = 4)]
    grid: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Bilinear,
    Ppi,
    Net,
}

type CliResult<T> = Result<T, String>;

fn ctx<T, E: std::fmt::Display>(r: Result<T, E>) -> CliResult<T> {
    r.map_err(|e| e.to_string())
}

fn load_pattern(path: Option<&Path>) -> CliResult<MsfaPattern> {
    match path {
        Some(p) => ctx(read_pattern(p)),
        None => Ok(MsfaPattern::default()),
    }
}

fn load_config(path: Option<&Path>) -> CliResult<NetworkConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            NetworkConfig::from_toml(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
        None => Ok(NetworkConfig::default()),
    }
}

impl TrainArgs {
    fn plan(&self, folds: usize) -> TrainPlan {
        TrainPlan {
            budget: match self.steps {
                Some(n) => Budget::Steps(n),
                None => Budget::Epochs(self.epochs),
            },
            batch_size: self.batch,
            seed: self.seed,
            folds,
            sub_grid: (self.grid, self.grid),
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Import { dir, bands, out } => {
            let cube = ctx(import_band_images(&dir, &bands))?;
            ctx(write_cube(&out, &cube))
        }
        Command::Mosaic { input, pattern, out } => {
            let cube = ctx(read_cube(&input))?;
            let pattern = load_pattern(pattern.as_deref())?;
            let mosaic = ctx(apply_msfa(&cube, &pattern))?;
            ctx(write_cube(&out, &mosaic.to_plane()))?;
            ctx(write_pattern(pattern_sidecar(&out), &pattern))
        }
        Command::Demosaic { method, input, pattern, checkpoint, out } => {
            let plane = ctx(read_cube(&input))?;
            let pattern = match pattern {
                Some(p) => ctx(read_pattern(p))?,
                None => ctx(read_pattern(pattern_sidecar(&input)))?,
            };
            let mosaic = ctx(MosaicImage::from_plane(&plane, pattern))?;
            let cube = match method {
                Method::Bilinear => ctx(bilinear_demosaic(&mosaic))?,
                Method::Ppi => ctx(ppi_demosaic(&mosaic))?,
                Method::Net => {
                    let path = checkpoint.ok_or("--method net requires --checkpoint")?;
                    let ck = ctx(read_checkpoint(path))?;
                    let initial = ctx(bilinear_demosaic(&mosaic))?;
                    ctx(network_forward(&ck.config, &ck.params, &initial))?.refined
                }
            };
            ctx(write_cube(&out, &cube))
        }
        Command::Init { config, seed, out } => {
            let config = load_config(config.as_deref())?;
            let params = ctx(init_params::<f32>(&config, seed))?;
            let ck = Checkpoint { config, params, adam: None, seed, epoch: 0 };
            ctx(write_checkpoint(&out, &ck))
        }
        Command::Train { data, common, out } => {
            let pattern = load_pattern(common.pattern.as_deref())?;
            let config = load_config(common.config.as_deref())?;
            let plan = common.plan(1);
            let dataset = ctx(CubeDirectory::open(&data))?;
            let mut pairs = Vec::new();
            for i in 0..dataset.len() {
                let truth = ctx(read_cube(&dataset.paths()[i]))?;
                pairs.extend(ctx(training_pairs(&truth, &pattern, plan.sub_grid))?);
            }
            let mut params = ctx(init_params::<f32>(&config, plan.seed))?;
            let mut state = AdamState::for_params(&params, AdamHyper::default());
            let report = ctx(fit(&config, &mut params, &mut state, &pairs, &plan, |epoch, loss| {
                eprintln!("epoch {:>4}  loss {loss:.6e}", epoch + 1);
            }))?;
            let ck = Checkpoint {
                config,
                params,
                adam: Some(state),
                seed: plan.seed,
                epoch: report.epoch_losses.len() as u32,
            };
            ctx(write_checkpoint(&out, &ck))
        }
        Command::Crossval { data, folds, common, per_band, report } => {
            let pattern = load_pattern(common.pattern.as_deref())?;
            let config = load_config(common.config.as_deref())?;
            let dataset = ctx(CubeDirectory::open(&data))?;
            let metric = if per_band { PsnrConvention::PerBandMean } else { PsnrConvention::WholeCube };
            let result = ctx(crossval_run_with(&dataset, &pattern, &config, &common.plan(folds), metric))?;
            println!(
                "average  bilinear {} dB  refined {} dB",
                format_db(result.mean_bilinear_db),
                format_db(result.mean_refined_db)
            );
            ctx(write_report(&report, &result))
        }
        Command::Psnr { reference, test, per_band } => {
            let a = ctx(read_cube(&reference))?;
            let b = ctx(read_cube(&test))?;
            let metric = if per_band { PsnrConvention::PerBandMean } else { PsnrConvention::WholeCube };
            println!("{}", format_db(ctx(metric.evaluate(&a, &b))?));
            Ok(())
        }
        Command::Synth { height, width, bands, seed, out } => {
            ctx(write_cube(&out, &ctx(textured_cube(height, width, bands, seed))?))
        }
        Command::Preview { input, band, out } => {
            let cube = ctx(read_cube(&input))?;
            ctx(write_pgm(&out, &ctx(band_preview(&cube, band))?))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {}", msg.lines().next().unwrap_or_default());
            ExitCode::from(2)
        }
    }
}
