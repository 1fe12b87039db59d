//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fnclust::clusterhead::Reduction;

use crate::config::{parse_list, parse_seeds, ExperimentConfig};

/// Environment variable consulted when no seed flag is given.
pub const SEED_ENV: &str = "FNCLUST_SEED";

#[derive(Debug, Parser)]
#[command(name = "fnclust", version, about = "Clustering functional data with sampling-based neural operators")]
pub struct Cli {
    /// Worker threads; 1 guarantees bitwise determinism. Defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an ODE benchmark dataset.
    Gen(GenArgs),
    /// Register trajectories into an image batch file.
    Render(RenderArgs),
    /// Write frozen encoder embeddings for every trajectory.
    Embed(EmbedArgs),
    /// Train the clustering head; writes checkpoints and loss history.
    Train(ExpArgs),
    /// Train (or load) and score on the test split, with optional baselines.
    Eval(EvalArgs),
    /// Score classical baselines only.
    Baseline(BaselineArgs),
    /// All seven on/off combinations of the loss terms.
    Ablate(ExpArgs),
    /// Metrics across registration resolutions.
    SweepRes(SweepArgs),
    /// Metrics across entropy weights α.
    Sensitivity(SensitivityArgs),
    /// Set-convergence diagnostics on finite kernel spaces.
    Kuratowski(KuratowskiArgs),
    /// PCA scatter of frozen features coloured by cluster.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenDataset {
    Ode6,
    Ode4,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub dataset: GenDataset,
    /// Samples per subclass (ode6) or per level (ode4).
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub levels: u32,
    /// Hidden width of the ode4 vector fields.
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also export the trajectories as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Options shared by every experiment command; they override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ExpArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset file (FNCDS1) instead of generating one.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Generated dataset: ode6 or ode4.
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub data_seed: Option<u64>,
    #[arg(long)]
    pub res: Option<usize>,
    #[arg(long)]
    pub spectrogram: bool,
    /// pixels, rff, frozen_mlp or external.
    #[arg(long)]
    pub encoder: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// RFF lengthscale; 0 selects the median heuristic.
    #[arg(long)]
    pub lengthscale: Option<f64>,
    #[arg(long)]
    pub no_standardize: bool,
    /// Embedding file (FNCEMB1) for the external encoder.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Hidden widths, e.g. 1024,768,512,1024.
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum)]
    pub reduction: Option<ReductionArg>,
    #[arg(long)]
    pub asymmetric_ce: bool,
    #[arg(long)]
    pub no_augment: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seed list `0,1,2` or range `0..5`.
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub kmeans_restarts: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReductionArg {
    Sum,
    Mean,
}

impl ExpArgs {
    /// The config file (or defaults) with every given flag applied, validated.
    pub fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(p) = &self.data {
            c.dataset.name = "file".into();
            c.dataset.path = Some(p.clone());
        }
        set(&mut c.dataset.name, self.dataset.clone());
        set(&mut c.dataset.n, self.n);
        set(&mut c.dataset.seed, self.data_seed);
        set(&mut c.registration.res, self.res);
        c.registration.spectrogram |= self.spectrogram;
        set(&mut c.encoder.kind, self.encoder.clone());
        set(&mut c.encoder.dim, self.dim);
        set(&mut c.encoder.lengthscale, self.lengthscale);
        c.encoder.standardize &= !self.no_standardize;
        if let Some(p) = &self.embeddings {
            c.encoder.kind = "external".into();
            c.encoder.path = Some(p.clone());
        }
        set(&mut c.train.alpha, self.alpha);
        set(&mut c.train.epochs, self.epochs);
        set(&mut c.train.batch_size, self.batch_size);
        set(&mut c.train.lr0, self.lr);
        set(&mut c.train.k, self.k);
        if let Some(h) = &self.hidden {
            c.train.hidden = parse_list(h)?;
        }
        set(&mut c.train.gamma, self.gamma);
        if let Some(r) = self.reduction {
            c.train.loss_reduction = match r {
                ReductionArg::Sum => Reduction::Sum,
                ReductionArg::Mean => Reduction::Mean,
            };
        }
        c.train.symmetric_ce &= !self.asymmetric_ce;
        c.train.augment &= !self.no_augment;
        set(&mut c.eval.kmeans_restarts, self.kmeans_restarts);
        if let Some(s) = &self.seeds {
            c.eval.seeds = parse_seeds(s)?;
        } else if let Some(s) = self.seed.or(env_seed()?) {
            c.eval.seeds = vec![s];
        }
        c.train.seed = c.eval.seeds.first().copied().unwrap_or(0);
        set(&mut c.eval.output, self.out.clone());
        c.validate()?;
        Ok(c)
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Seed from the environment fallback, if set.
pub fn env_seed() -> anyhow::Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => Ok(Some(s.trim().parse().map_err(|e| anyhow::anyhow!("{SEED_ENV}='{s}': {e}"))?)),
        Err(_) => Ok(None),
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub exp: ExpArgs,
    /// Image batch file (FNCIMG1).
    #[arg(long)]
    pub images: PathBuf,
    /// Also write the first N images as PGM files into the output directory.
    #[arg(long, default_value_t = 0)]
    pub pgm: usize,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub exp: ExpArgs,
    /// Embedding file (FNCEMB1).
    #[arg(long)]
    pub embeddings_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub exp: ExpArgs,
    /// Score a saved head instead of training one.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Comma-separated baselines: kmeans, fpca, bspline, dtw.
    #[arg(long)]
    pub baseline: Option<String>,
    /// Add a row scoring the generator labels against themselves.
    #[arg(long)]
    pub ground_truth: bool,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub exp: ExpArgs,
    /// Comma-separated baselines: kmeans, fpca, bspline, dtw.
    #[arg(long, default_value = "kmeans,fpca,bspline,dtw")]
    pub methods: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub exp: ExpArgs,
    /// Resolutions from {2,4,8,16,32,64,128,224}, at least two.
    #[arg(long, default_value = "4,64")]
    pub res_list: String,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub exp: ExpArgs,
    #[arg(long, default_value = "0,0.25,0.5,1,2")]
    pub alphas: String,
}

#[derive(Debug, Args)]
pub struct KuratowskiArgs {
    #[command(subcommand)]
    pub command: KuratowskiCommand,
}

#[derive(Debug, Subcommand)]
pub enum KuratowskiCommand {
    /// Empirical frame constants against the Gram eigenvalue bracket.
    FrameBounds {
        /// gridN, lineN, or random:M:D.
        #[arg(long, default_value = "grid9")]
        points: String,
        /// gaussian:<lengthscale> or laplacian:<lengthscale>.
        #[arg(long, default_value = "gaussian:1.0")]
        kernel: String,
        #[arg(long, default_value_t = 2000)]
        probes: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// False-positive membership rate against head width on the toy geometry.
    Fpr {
        #[arg(long, default_value = "8,32,128")]
        widths: String,
        #[arg(long, default_value = "0..5")]
        seeds: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        /// Margin as a fraction of the minimum center gap.
        #[arg(long, default_value_t = 0.05)]
        margin_frac: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub exp: ExpArgs,
    /// Colour by this head's clusters; ground-truth classes otherwise.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[train]\nalpha = 0.5\nepochs = 3\n[registration]\nres = 8\n").unwrap();
        let a = ExpArgs { config: Some(p), alpha: Some(0.0), seeds: Some("0..3".into()), ..Default::default() };
        let c = a.resolve().unwrap();
        assert_eq!((c.train.alpha, c.train.epochs, c.registration.res), (0.0, 3, 8));
        assert_eq!(c.eval.seeds, vec![0, 1, 2]);
    }

    #[test]
    fn invalid_flags_are_collected() {
        let a = ExpArgs { res: Some(1), k: Some(1), gamma: Some(2.0), ..Default::default() };
        let msg = a.resolve().unwrap_err().to_string();
        assert!(msg.contains("res") && msg.contains("k must") && msg.contains("gamma"), "{msg}");
    }
}
