//! Shared experiment stages: dataset, registration, frozen encoder, methods.

use std::time::Instant;

use anyhow::{bail, Context};
use fnclust::baselines::{self, dtw_kmedoids, kmeans, BSPLINE_BASIS, FPCA_COMPONENTS};
use fnclust::clusterhead::{encode_all, infer_features, train, EpochStats, HeadParams, LossTerms};
use fnclust::dynsys::{self, Dataset, Split};
use fnclust::featmap::{median_heuristic, Encoder, EncoderKind};
use fnclust::linalg::Matrix;
use fnclust::metrics::{score, Scores};
use fnclust::registration::{normalize, RasterImage, RegistrationSpec};

use crate::config::{DatasetConfig, EncoderConfig, ExperimentConfig};

/// Max-cluster share at or above which a run counts as collapsed.
pub const COLLAPSE_SHARE: f64 = 0.95;
/// Training images used for the lengthscale heuristic.
const HEURISTIC_SAMPLE: usize = 256;

pub fn load_dataset(cfg: &DatasetConfig) -> anyhow::Result<Dataset> {
    Ok(match cfg.name.as_str() {
        "ode6" => dynsys::gen_ode6(cfg.n, cfg.seed)?,
        "ode4" => dynsys::gen_ode4(cfg.n, cfg.levels, cfg.width, cfg.seed)?,
        "file" => {
            let p = cfg.path.as_ref().context("dataset.path is required")?;
            dynsys::io::load(p).with_context(|| format!("loading {}", p.display()))?
        }
        other => bail!("unknown dataset '{other}'"),
    })
}

/// A dataset registered at one resolution, with its split indices.
pub struct Prepared {
    pub ds: Dataset,
    pub images: Vec<RasterImage>,
    pub ids: Vec<u64>,
    pub labels: Vec<usize>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Prepared {
    pub fn new(ds: Dataset, reg: &RegistrationSpec) -> anyhow::Result<Self> {
        let images = ds.trajectories.iter().map(|t| reg.register(t)).collect::<fnclust::Result<Vec<_>>>()?;
        let ids = ds.trajectories.iter().map(|t| t.id).collect();
        let labels = ds.labels();
        let (train, test) = (ds.indices(Split::Train), ds.indices(Split::Test));
        if train.is_empty() || test.is_empty() {
            bail!("dataset needs both train and test trajectories");
        }
        Ok(Self { ds, images, ids, labels, train, test })
    }

    pub fn res(&self) -> usize {
        self.images[0].res
    }

    pub fn images_of(&self, idx: &[usize]) -> Vec<RasterImage> {
        idx.iter().map(|&i| self.images[i].clone()).collect()
    }

    pub fn ids_of(&self, idx: &[usize]) -> Vec<u64> {
        idx.iter().map(|&i| self.ids[i]).collect()
    }

    pub fn test_labels(&self) -> Vec<usize> {
        self.test.iter().map(|&i| self.labels[i]).collect()
    }
}

/// Builds the frozen encoder; an RFF lengthscale of 0 selects the median heuristic.
pub fn build_encoder(p: &Prepared, cfg: &EncoderConfig) -> anyhow::Result<Encoder> {
    let lengthscale = if cfg.kind()? == EncoderKind::Rff && cfg.lengthscale == 0.0 {
        let sample: Vec<&RasterImage> = p.train.iter().take(HEURISTIC_SAMPLE).map(|&i| &p.images[i]).collect();
        median_heuristic(&sample)
    } else {
        cfg.lengthscale
    };
    let enc = Encoder::build(&cfg.spec(lengthscale)?, p.res() * p.res())?;
    if !cfg.standardize {
        return Ok(enc);
    }
    let imgs: Vec<&RasterImage> = p.train.iter().map(|&i| &p.images[i]).collect();
    Ok(enc.standardized(&imgs, &p.ids_of(&p.train))?)
}

/// One scored clustering of the test split.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub scores: Scores,
    pub labels: Vec<usize>,
    pub max_share: f64,
    pub runtime_s: f64,
}

impl MethodRun {
    pub fn collapsed(&self) -> bool {
        self.max_share >= COLLAPSE_SHARE
    }
}

pub struct SnoRun {
    pub run: MethodRun,
    pub params: HeadParams,
    pub history: Vec<EpochStats>,
}

/// Trains the head on the train split and scores argmax assignments on the test split.
pub fn run_sno(p: &Prepared, enc: &Encoder, cfg: &ExperimentConfig, seed: u64, terms: LossTerms) -> anyhow::Result<SnoRun> {
    let start = Instant::now();
    let tc = cfg.train.config(seed, terms);
    let trained = train(&p.images_of(&p.train), &p.ids_of(&p.train), enc, &tc)?;
    let feats = encode_all(&p.images_of(&p.test), &p.ids_of(&p.test), enc)?;
    let inf = infer_features(&feats, &trained.params, cfg.train.gamma)?;
    let scores = score(&inf.labels, &p.test_labels())?;
    let run = MethodRun {
        scores,
        max_share: inf.max_cluster_share(),
        labels: inf.labels,
        runtime_s: start.elapsed().as_secs_f64(),
    };
    Ok(SnoRun { run, params: trained.params, history: trained.history })
}

/// Fraction of points carrying the most common label.
pub fn label_share(labels: &[usize]) -> f64 {
    let mut counts = std::collections::HashMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    counts.values().copied().max().unwrap_or(0) as f64 / labels.len().max(1) as f64
}

fn scored(labels: Vec<usize>, truth: &[usize], start: Instant) -> anyhow::Result<MethodRun> {
    Ok(MethodRun {
        scores: score(&labels, truth)?,
        max_share: label_share(&labels),
        labels,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

/// k-means on the frozen encoder features of the test split.
pub fn run_kmeans(p: &Prepared, enc: &Encoder, cfg: &ExperimentConfig, seed: u64) -> anyhow::Result<MethodRun> {
    let start = Instant::now();
    let feats = encode_all(&p.images_of(&p.test), &p.ids_of(&p.test), enc)?;
    let km = kmeans(&feats, cfg.train.k, cfg.eval.kmeans_restarts, seed)?;
    scored(km.labels, &p.test_labels(), start)
}

fn kmeans_on(points: &Matrix, p: &Prepared, cfg: &ExperimentConfig, seed: u64, start: Instant) -> anyhow::Result<MethodRun> {
    let km = kmeans(points, cfg.train.k, cfg.eval.kmeans_restarts, seed)?;
    scored(km.labels, &p.test_labels(), start)
}

/// FPCA scores of the raw test trajectories, clustered by k-means.
pub fn run_fpca(p: &Prepared, cfg: &ExperimentConfig, seed: u64) -> anyhow::Result<MethodRun> {
    let start = Instant::now();
    let f = baselines::fpca_features(&p.ds, &p.test, FPCA_COMPONENTS)?;
    kmeans_on(&f.scores, p, cfg, seed, start)
}

pub fn run_bspline(p: &Prepared, cfg: &ExperimentConfig, seed: u64) -> anyhow::Result<MethodRun> {
    let start = Instant::now();
    let coeffs = baselines::bspline_features(&p.ds, &p.test, BSPLINE_BASIS)?;
    kmeans_on(&coeffs, p, cfg, seed, start)
}

/// DTW k-medoids on test trajectories scaled to `[−1, 1]`.
pub fn run_dtw(p: &Prepared, cfg: &ExperimentConfig, seed: u64) -> anyhow::Result<MethodRun> {
    let start = Instant::now();
    let series: Vec<Vec<f64>> = p.test.iter().map(|&i| normalize(&p.ds.trajectories[i].values)).collect();
    let km = dtw_kmedoids(&series, cfg.train.k, cfg.eval.kmeans_restarts, seed, cfg.eval.dtw_window)?;
    scored(km.labels, &p.test_labels(), start)
}

pub fn run_baseline(name: &str, p: &Prepared, enc: &Encoder, cfg: &ExperimentConfig, seed: u64) -> anyhow::Result<MethodRun> {
    match name {
        "kmeans" => run_kmeans(p, enc, cfg, seed),
        "fpca" => run_fpca(p, cfg, seed),
        "bspline" => run_bspline(p, cfg, seed),
        "dtw" => run_dtw(p, cfg, seed),
        other => bail!("unknown baseline '{other}'"),
    }
}

/// The generator labels scored against themselves.
pub fn run_truth(p: &Prepared) -> anyhow::Result<MethodRun> {
    scored(p.test_labels(), &p.test_labels(), Instant::now())
}

/// Median of a non-empty slice.
pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

pub fn std_dev(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(std_dev(&[1.0, 1.0]), 0.0);
    }

    #[test]
    fn shares() {
        assert_eq!(label_share(&[0, 0, 1, 2]), 0.5);
        assert_eq!(label_share(&[3, 3, 3]), 1.0);
    }
}
