use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rail::eval::report::load_matrix;
use rail::eval::sweep::sweep_csv;
use rail::eval::{
    compute_metrics, grid_search, read_order_file, run, sweep_ablation, write_synthetic, AdapterKind, DomainSuite,
    KernelKind, Mode, RunConfig, RunReport, SweepAxis,
};
use rail::store::format::{manifest_path, read_manifest};
use rail::store::{
    load_embeddings, load_text_table, save_embeddings, save_text_table, synthesize_domains, ManifestRole,
    SynthConfig,
};
use rail::{RailError, Result};

#[derive(Parser)]
#[command(name = "rail", version, about = "Recursive ridge adapters over frozen embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate embedding files and optionally write normalized copies.
    Ingest {
        files: Vec<PathBuf>,
        /// Directory for L2-normalized copies.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Generate a synthetic domain sequence.
    Synth(SynthArgs),
    /// Choose lambda and gamma on the first domain.
    GridSearch {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the X-TAIL or MTIL protocol and write the result JSON.
    TrainEval {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the accuracy matrix as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Recompute metrics from a saved result JSON or matrix CSV.
    Metrics { matrix: PathBuf },
    /// Rerun the protocol over a list of beta or RHL-dimension values.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// `beta` or `rhl_dim`.
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    domains: usize,
    #[arg(long, default_value_t = 5)]
    classes: usize,
    #[arg(long, default_value_t = 20)]
    train_samples: usize,
    #[arg(long, default_value_t = 20)]
    test_samples: usize,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    /// Minimum angle between class means, radians.
    #[arg(long, default_value_t = 0.8)]
    separation: f64,
    #[arg(long, default_value_t = 0.5)]
    noise: f64,
    /// Perturbation of class text vectors away from the class means.
    #[arg(long, default_value_t = 1.0)]
    text_noise: f64,
    /// Share of each text vector pointing at its class mean.
    #[arg(long, default_value_t = 0.03)]
    text_alignment: f64,
    #[arg(long, default_value_t = 0.3)]
    correlation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// File listing domain directories, one per line.
    #[arg(long)]
    order: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    #[arg(long, value_parser = parse_adapter)]
    adapter: Option<AdapterKind>,
    #[arg(long, value_parser = parse_kernel)]
    kernel: Option<KernelKind>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    rhl_dim: Option<usize>,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    match s {
        "xtail" => Ok(Mode::Xtail),
        "mtil" => Ok(Mode::Mtil),
        _ => Err(format!("expected xtail or mtil, got {s:?}")),
    }
}

fn parse_adapter(s: &str) -> std::result::Result<AdapterKind, String> {
    match s {
        "primal" => Ok(AdapterKind::Primal),
        "dual" => Ok(AdapterKind::Dual),
        _ => Err(format!("expected primal or dual, got {s:?}")),
    }
}

fn parse_kernel(s: &str) -> std::result::Result<KernelKind, String> {
    match s {
        "rbf" => Ok(KernelKind::Rbf),
        "linear" => Ok(KernelKind::Linear),
        _ => Err(format!("expected rbf or linear, got {s:?}")),
    }
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(order) = &self.order {
            cfg.domains = read_order_file(order)?;
        }
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.adapter {
            cfg.adapter = v;
        }
        if let Some(v) = self.kernel {
            cfg.kernel = v;
        }
        if let Some(v) = self.shots {
            cfg.shots = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.beta {
            cfg.fusion.beta = v;
        }
        if self.lambda.is_some() {
            cfg.lambda = self.lambda;
        }
        if self.gamma.is_some() {
            cfg.gamma = self.gamma;
        }
        if let Some(v) = self.rhl_dim {
            cfg.rhl_dim = v;
        }
        if cfg.domains.is_empty() {
            return Err(RailError::InvalidParameter(
                "no domains given; pass --order or a config with domains".into(),
            ));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn ingest(files: &[PathBuf], out_dir: Option<&Path>) -> Result<()> {
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
    }
    for path in files {
        let target = out_dir.map(|d| d.join(path.file_name().unwrap_or(path.as_os_str())));
        let manifest = read_manifest(&manifest_path(path))?;
        if manifest.role == ManifestRole::Text {
            let texts = load_text_table(path)?;
            println!(
                "{}: text table, {} classes, dim {}",
                path.display(),
                texts.class_names.len(),
                texts.vectors.ncols()
            );
            if let Some(t) = target {
                save_text_table(&t, &texts, &manifest.source)?;
            }
        } else {
            let mut ds = load_embeddings(path)?;
            println!(
                "{}: {} rows, dim {}, {} classes, normalized {}",
                path.display(),
                ds.n_samples(),
                ds.dim(),
                ds.n_classes(),
                ds.normalized
            );
            if let Some(t) = target {
                ds.l2_normalize();
                save_embeddings(&t, &ds, &manifest.source)?;
            }
        }
    }
    Ok(())
}

fn synth(a: &SynthArgs) -> Result<()> {
    let mut cfg = SynthConfig::new(a.domains, a.classes, a.train_samples, a.dim, a.separation, a.seed);
    cfg.test_samples_per_class = a.test_samples;
    cfg.noise = a.noise;
    cfg.text_noise = a.text_noise;
    cfg.text_alignment = a.text_alignment;
    cfg.domain_correlation = a.correlation;
    let suite = synthesize_domains(&cfg)?;
    let order = write_synthetic(&suite, &a.out)?;
    println!("{}", order.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { files, out_dir } => ingest(&files, out_dir.as_deref()),
        Command::Synth(a) => synth(&a),
        Command::GridSearch { run: args, out } => {
            let cfg = args.resolve()?;
            let suite = DomainSuite::load(&cfg.domains, cfg.normalize)?;
            let outcome = grid_search(&cfg, &suite)?;
            emit(out.as_deref(), &(serde_json::to_string_pretty(&outcome)? + "\n"))
        }
        Command::TrainEval { run: args, out, csv } => {
            let cfg = args.resolve()?;
            let suite = DomainSuite::load(&cfg.domains, cfg.normalize)?;
            let report = RunReport::new(cfg.clone(), run(&cfg, &suite)?)?;
            if let Some(path) = csv {
                fs::write(path, report.matrix.to_csv())?;
            }
            emit(out.as_deref(), &report.to_json()?)
        }
        Command::Metrics { matrix } => {
            let m = compute_metrics(&load_matrix(&matrix)?)?;
            println!("{}", serde_json::to_string_pretty(&m)?);
            Ok(())
        }
        Command::Sweep {
            run: args,
            axis,
            values,
            out,
        } => {
            let cfg = args.resolve()?;
            let suite = DomainSuite::load(&cfg.domains, cfg.normalize)?;
            let rows = sweep_ablation(&cfg, &suite, axis, &values)?;
            emit(out.as_deref(), &sweep_csv(axis, &rows))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
