//! Experiment configuration: a TOML file with one section per stage.
//! Command-line flags override file values.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use fnclust::clusterhead::{LossTerms, Reduction, TrainConfig};
use fnclust::featmap::{EncoderKind, EncoderSpec};
use fnclust::registration::{RegistrationSpec, StftParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SWEEP_RESOLUTIONS: [usize; 8] = [2, 4, 8, 16, 32, 64, 128, 224];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// `ode6`, `ode4`, or `file` (read from `path`).
    pub name: String,
    /// Samples per subclass (ODE-6) or per level (ODE-4).
    pub n: usize,
    pub levels: u32,
    pub width: usize,
    pub seed: u64,
    pub path: Option<PathBuf>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self { name: "ode6".into(), n: 100, levels: 20, width: 64, seed: 7, path: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegistrationConfig {
    pub res: usize,
    pub spectrogram: bool,
    pub stft_window: usize,
    pub stft_hop: usize,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        let stft = StftParams::default();
        Self { res: 64, spectrogram: false, stft_window: stft.window, stft_hop: stft.hop }
    }
}

impl RegistrationConfig {
    pub fn spec(&self) -> RegistrationSpec {
        RegistrationSpec {
            res: self.res,
            spectrogram: self.spectrogram,
            stft: StftParams { window: self.stft_window, hop: self.stft_hop },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    /// `pixels`, `rff`, `frozen_mlp` or `external`.
    pub kind: String,
    pub dim: usize,
    /// RFF lengthscale; `0` selects the median heuristic.
    pub lengthscale: f64,
    pub seed: u64,
    /// Frozen per-coordinate standardisation fitted on training images.
    pub standardize: bool,
    pub path: Option<PathBuf>,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self { kind: "rff".into(), dim: 2048, lengthscale: 0.0, seed: 0, standardize: true, path: None }
    }
}

impl EncoderConfig {
    pub fn kind(&self) -> anyhow::Result<EncoderKind> {
        Ok(match self.kind.as_str() {
            "pixels" => EncoderKind::Pixels,
            "rff" => EncoderKind::Rff,
            "frozen_mlp" | "mlp" => EncoderKind::FrozenMlp,
            "external" | "clip" => EncoderKind::External,
            other => bail!("unknown encoder '{other}'; valid encoders: pixels, rff, frozen_mlp, external"),
        })
    }

    /// Spec with the given lengthscale substituted for the heuristic placeholder.
    pub fn spec(&self, lengthscale: f64) -> anyhow::Result<EncoderSpec> {
        Ok(match self.kind()? {
            EncoderKind::Pixels => EncoderSpec::pixels(),
            EncoderKind::Rff => EncoderSpec::rff(self.dim, lengthscale, self.seed),
            EncoderKind::FrozenMlp => EncoderSpec::frozen_mlp(self.dim, self.seed),
            EncoderKind::External => {
                EncoderSpec::external(self.path.clone().context("external encoder needs [encoder] path")?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub k: usize,
    pub seed: u64,
    pub loss_reduction: Reduction,
    pub symmetric_ce: bool,
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub augment: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            epochs: 30,
            batch_size: 64,
            lr0: 1e-3,
            k: 6,
            seed: 0,
            loss_reduction: Reduction::Mean,
            symmetric_ce: true,
            hidden: vec![256, 192, 128, 256],
            gamma: 0.5,
            augment: true,
        }
    }
}

impl TrainSection {
    pub fn config(&self, seed: u64, terms: LossTerms) -> TrainConfig {
        TrainConfig {
            alpha: self.alpha,
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr0: self.lr0,
            k: self.k,
            seed,
            loss_reduction: self.loss_reduction,
            symmetric_ce: self.symmetric_ce,
            terms,
            hidden: self.hidden.clone(),
            augment: self.augment,
            ..TrainConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub seeds: Vec<u64>,
    pub baselines: Vec<String>,
    pub metrics: Vec<String>,
    pub kmeans_restarts: usize,
    /// Sakoe–Chiba half-width for DTW; unbanded when absent.
    pub dtw_window: Option<usize>,
    pub output: PathBuf,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            seeds: vec![0],
            baselines: vec![],
            metrics: vec!["acc".into(), "ari".into(), "nmi".into()],
            kmeans_restarts: 10,
            dtw_window: None,
            output: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub registration: RegistrationConfig,
    pub encoder: EncoderConfig,
    pub train: TrainSection,
    pub eval: EvalSection,
}

pub const BASELINES: [&str; 4] = ["kmeans", "fpca", "bspline", "dtw"];

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// First 12 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&json))[..12].to_string()
    }

    /// Every problem found, reported together.
    pub fn validate(&self) -> anyhow::Result<()> {
        let mut errs = Vec::new();
        match self.dataset.name.as_str() {
            "ode6" | "ode4" => {
                if self.dataset.n == 0 {
                    errs.push("dataset.n must be positive".to_string());
                }
            }
            "file" => match &self.dataset.path {
                Some(p) if p.exists() => {}
                Some(p) => errs.push(format!("dataset.path {} does not exist", p.display())),
                None => errs.push("dataset.name = \"file\" needs dataset.path".into()),
            },
            other => errs.push(format!("unknown dataset '{other}' (ode6, ode4, file)")),
        }
        if self.registration.res < 2 {
            errs.push("registration.res must be at least 2".into());
        }
        if self.registration.spectrogram && (self.registration.stft_window == 0 || self.registration.stft_hop == 0) {
            errs.push("stft_window and stft_hop must be positive".into());
        }
        if let Err(e) = self.encoder.kind() {
            errs.push(e.to_string());
        }
        if self.encoder.kind == "external" {
            match &self.encoder.path {
                Some(p) if p.exists() => {}
                Some(p) => errs.push(format!("encoder.path {} does not exist", p.display())),
                None => errs.push("external encoder needs encoder.path".into()),
            }
        }
        if self.encoder.lengthscale < 0.0 {
            errs.push("encoder.lengthscale must be non-negative (0 = median heuristic)".into());
        }
        if let Err(e) = self.train.config(0, LossTerms::default()).validate() {
            errs.push(e.to_string());
        }
        if !(self.train.gamma > 0.0 && self.train.gamma < 1.0) {
            errs.push(format!("train.gamma must lie in (0, 1), got {}", self.train.gamma));
        }
        if self.eval.seeds.is_empty() {
            errs.push("eval.seeds must not be empty".into());
        }
        for b in &self.eval.baselines {
            if !BASELINES.contains(&b.as_str()) {
                errs.push(format!("unknown baseline '{b}' (valid: {})", BASELINES.join(", ")));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            bail!("invalid configuration:\n  - {}", errs.join("\n  - "))
        }
    }
}

/// Parses `1,2,3` or a range `0..5`.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<T>().map_err(|e| anyhow::anyhow!("bad list item '{x}': {e}")))
        .collect()
}

pub fn parse_seeds(s: &str) -> anyhow::Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        return Ok((a..b).collect());
    }
    parse_list(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        let back: ExperimentConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn all_errors_are_listed() {
        let mut c = ExperimentConfig::default();
        c.dataset.name = "nope".into();
        c.train.k = 1;
        c.eval.baselines = vec!["svm".into()];
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("nope") && msg.contains("k must be") && msg.contains("svm"), "{msg}");
    }

    #[test]
    fn partial_files_fill_defaults() {
        let c: ExperimentConfig = toml::from_str("[train]\nalpha = 0.0\n[registration]\nres = 4\n").unwrap();
        assert_eq!(c.train.alpha, 0.0);
        assert_eq!(c.registration.res, 4);
        assert_eq!(c.train.epochs, 30);
        assert!(toml::from_str::<ExperimentConfig>("[train]\nalhpa = 1\n").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_list::<usize>("4, 64").unwrap(), vec![4, 64]);
        assert!(parse_list::<usize>("4,x").is_err());
    }
}
