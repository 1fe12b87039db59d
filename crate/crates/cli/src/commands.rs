//! One function per subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use fnclust::baselines::fpca;
use fnclust::clusterhead::{checkpoint, encode_all, infer_features, LossTerms};
use fnclust::dynsys::{self, Dataset, Split};
use fnclust::featmap::{EmbeddingTable, FeatureVector};
use fnclust::kuratowski::{self, estimate_frame_bounds, fpr_curve, toy_geometry, FprConfig, Kernel, KernelSpace};
use fnclust::metrics::score;
use fnclust::registration::io as imgio;
use log::info;
use serde::Serialize;

use crate::args::*;
use crate::config::{parse_list, parse_seeds, ExperimentConfig, SWEEP_RESOLUTIONS};
use crate::pipeline::{self, median, std_dev, MethodRun, Prepared};
use crate::report::{self, format_table, line_plot, scatter_plot, MetricRow, Series};

pub fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring thread pool")?;
    }
    let force = cli.force;
    match cli.command {
        Command::Gen(a) => gen(&a, force),
        Command::Render(a) => render(&a, force),
        Command::Embed(a) => embed(&a, force),
        Command::Train(a) => train(&a, force),
        Command::Eval(a) => eval(&a, force),
        Command::Baseline(a) => baseline(&a, force),
        Command::Ablate(a) => ablate(&a, force),
        Command::SweepRes(a) => sweep_res(&a, force),
        Command::Sensitivity(a) => sensitivity(&a, force),
        Command::Kuratowski(a) => match a.command {
            KuratowskiCommand::FrameBounds { points, kernel, probes, seed } => frame_bounds(&points, &kernel, probes, seed),
            KuratowskiCommand::Fpr { widths, seeds, seed, epochs, gamma, margin_frac, out } => {
                fpr(&widths, &seeds, seed, epochs, gamma, margin_frac, &out, force)
            }
        },
        Command::Plot(a) => plot(&a, force),
    }
}

/// Refuses to clobber existing files unless forced; creates parent directories.
fn claim(paths: &[&Path], force: bool) -> anyhow::Result<()> {
    for p in paths {
        if p.exists() && !force {
            bail!("{} already exists; pass --force to overwrite", p.display());
        }
    }
    for p in paths {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    Ok(())
}

fn out_paths(cfg: &ExperimentConfig, names: &[&str], force: bool) -> anyhow::Result<Vec<PathBuf>> {
    let paths: Vec<PathBuf> = names.iter().map(|n| cfg.eval.output.join(n)).collect();
    claim(&paths.iter().map(PathBuf::as_path).collect::<Vec<_>>(), force)?;
    Ok(paths)
}

fn seed_or_env(seed: Option<u64>) -> anyhow::Result<u64> {
    Ok(seed.or(env_seed()?).unwrap_or(0))
}

fn dataset_label(cfg: &ExperimentConfig, ds: &Dataset) -> String {
    if cfg.dataset.name == "file" {
        ds.name.clone()
    } else {
        cfg.dataset.name.clone()
    }
}

fn gen(a: &GenArgs, force: bool) -> anyhow::Result<()> {
    let seed = seed_or_env(a.seed)?;
    let sidecar = dynsys::io::sidecar_path(&a.out);
    let mut targets = vec![a.out.as_path(), sidecar.as_path()];
    if let Some(c) = &a.csv {
        targets.push(c);
    }
    claim(&targets, force)?;
    let ds = match a.dataset {
        GenDataset::Ode6 => dynsys::gen_ode6(a.n, seed)?,
        GenDataset::Ode4 => dynsys::gen_ode4(a.n, a.levels, a.width, seed)?,
    };
    dynsys::io::save(&ds, &a.out)?;
    if let Some(c) = &a.csv {
        let mut f = std::io::BufWriter::new(fs::File::create(c)?);
        dynsys::io::write_csv(&ds, &mut f)?;
    }
    let mut per_class = vec![0usize; ds.num_classes];
    for t in &ds.trajectories {
        per_class[t.class_label as usize] += 1;
    }
    println!(
        "{}: N={} (train {}, test {}), T={}, classes {:?}",
        ds.name,
        ds.len(),
        ds.indices(Split::Train).len(),
        ds.indices(Split::Test).len(),
        ds.grid_size,
        per_class
    );
    println!("wrote {} and {}", a.out.display(), sidecar.display());
    Ok(())
}

fn prepare(cfg: &ExperimentConfig) -> anyhow::Result<Prepared> {
    let ds = pipeline::load_dataset(&cfg.dataset)?;
    info!("dataset {} with {} trajectories", ds.name, ds.len());
    Prepared::new(ds, &cfg.registration.spec())
}

fn render(a: &RenderArgs, force: bool) -> anyhow::Result<()> {
    let cfg = a.exp.resolve()?;
    claim(&[&a.images], force)?;
    let p = prepare(&cfg)?;
    fs::write(&a.images, imgio::encode_batch(&p.images)?)?;
    if a.pgm > 0 {
        let names: Vec<String> = p.ids.iter().take(a.pgm).map(|id| format!("img_{id:06}.pgm")).collect();
        let paths = out_paths(&cfg, &names.iter().map(String::as_str).collect::<Vec<_>>(), force)?;
        for (img, path) in p.images.iter().zip(&paths) {
            let mut f = std::io::BufWriter::new(fs::File::create(path)?);
            imgio::write_pgm(img, &mut f)?;
        }
    }
    println!("wrote {} images at {}x{} to {}", p.images.len(), p.res(), p.res(), a.images.display());
    Ok(())
}

fn embed(a: &EmbedArgs, force: bool) -> anyhow::Result<()> {
    let cfg = a.exp.resolve()?;
    claim(&[&a.embeddings_out], force)?;
    let p = prepare(&cfg)?;
    let enc = pipeline::build_encoder(&p, &cfg.encoder)?;
    let all: Vec<usize> = (0..p.images.len()).collect();
    let feats = encode_all(&p.images, &p.ids_of(&all), &enc)?;
    let rows = feats.iter_rows().zip(&p.ids).map(|(r, &id)| FeatureVector::new(r.to_vec(), id)).collect();
    let table = EmbeddingTable::new(feats.cols, rows)?;
    table.save(&a.embeddings_out)?;
    println!("wrote {} embeddings of dimension {} to {}", table.len(), table.dim(), a.embeddings_out.display());
    Ok(())
}

#[derive(Serialize)]
struct HistoryRow {
    seed: u64,
    epoch: usize,
    lr: f64,
    consistency: f64,
    confidence: f64,
    entropy: f64,
    total: f64,
    max_cluster_share: f64,
    config_hash: String,
}

fn train(a: &ExpArgs, force: bool) -> anyhow::Result<()> {
    let cfg = a.resolve()?;
    let hash = cfg.hash();
    let mut names = vec!["config.toml".to_string(), "history.csv".to_string()];
    names.extend(cfg.eval.seeds.iter().map(|s| format!("head_seed{s}.fnchead")));
    let paths = out_paths(&cfg, &names.iter().map(String::as_str).collect::<Vec<_>>(), force)?;
    fs::write(&paths[0], cfg.to_toml())?;
    let p = prepare(&cfg)?;
    let enc = pipeline::build_encoder(&p, &cfg.encoder)?;
    let mut history = Vec::new();
    for (i, &seed) in cfg.eval.seeds.iter().enumerate() {
        let run = pipeline::run_sno(&p, &enc, &cfg, seed, LossTerms::default())?;
        checkpoint::save(&paths[2 + i], &run.params, seed, serde_json::to_value(&cfg.train)?)?;
        for h in &run.history {
            history.push(HistoryRow {
                seed,
                epoch: h.epoch,
                lr: h.lr,
                consistency: h.loss.consistency,
                confidence: h.loss.confidence,
                entropy: h.loss.entropy,
                total: h.loss.total,
                max_cluster_share: h.max_cluster_share,
                config_hash: hash.clone(),
            });
        }
        let last = run.history.last().map(|h| h.loss.total).unwrap_or(f64::NAN);
        println!(
            "seed {seed}: final loss {last:.4}, test acc {:.3}, max share {:.3}{}",
            run.run.scores.acc,
            run.run.max_share,
            if run.run.collapsed() { " (collapse)" } else { "" }
        );
    }
    report::write_csv(&paths[1], &history)?;
    println!("wrote checkpoints and history to {}", cfg.eval.output.display());
    Ok(())
}

fn print_rows(rows: &[MetricRow]) {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.method.clone(),
                r.seed.to_string(),
                r.res.to_string(),
                format!("{:.4}", r.acc),
                format!("{:.4}", r.ari),
                format!("{:.4}", r.nmi),
                format!("{:.3}", r.max_share),
                format!("{:.1}", r.runtime_s),
                if r.collapsed { "collapse".into() } else { String::new() },
            ]
        })
        .collect();
    println!("{}", format_table(&["method", "seed", "res", "acc", "ari", "nmi", "share", "time_s", "flag"], &body));
}

fn baseline_names(list: &str) -> anyhow::Result<Vec<String>> {
    let names: Vec<String> = parse_list(list)?;
    if let Some(bad) = names.iter().find(|n| !crate::config::BASELINES.contains(&n.as_str())) {
        bail!("unknown baseline '{bad}' (valid: {})", crate::config::BASELINES.join(", "));
    }
    Ok(names)
}

fn eval(a: &EvalArgs, force: bool) -> anyhow::Result<()> {
    let mut cfg = a.exp.resolve()?;
    if let Some(b) = &a.baseline {
        cfg.eval.baselines = baseline_names(b)?;
    }
    let hash = cfg.hash();
    let paths = out_paths(&cfg, &["metrics.csv"], force)?;
    let p = prepare(&cfg)?;
    let enc = pipeline::build_encoder(&p, &cfg.encoder)?;
    let name = dataset_label(&cfg, &p.ds);
    let (res, alpha) = (p.res(), cfg.train.alpha);
    let mut rows = Vec::new();
    if a.ground_truth {
        rows.push(MetricRow::new("ground_truth", &name, 0, res, alpha, &pipeline::run_truth(&p)?, &hash));
    }
    for &seed in &cfg.eval.seeds {
        let run = match &a.checkpoint {
            Some(path) => {
                let start = std::time::Instant::now();
                let (_, params) = checkpoint::load(path)?;
                let feats = encode_all(&p.images_of(&p.test), &p.ids_of(&p.test), &enc)?;
                let inf = infer_features(&feats, &params, cfg.train.gamma)?;
                MethodRun {
                    scores: score(&inf.labels, &p.test_labels())?,
                    max_share: inf.max_cluster_share(),
                    labels: inf.labels,
                    runtime_s: start.elapsed().as_secs_f64(),
                }
            }
            None => pipeline::run_sno(&p, &enc, &cfg, seed, LossTerms::default())?.run,
        };
        rows.push(MetricRow::new("sno", &name, seed, res, alpha, &run, &hash));
        for b in &cfg.eval.baselines {
            let run = pipeline::run_baseline(b, &p, &enc, &cfg, seed)?;
            rows.push(MetricRow::new(b, &name, seed, res, alpha, &run, &hash));
        }
    }
    report::write_csv(&paths[0], &rows)?;
    print_rows(&rows);
    if rows.iter().any(|r| r.method == "sno" && r.collapsed) {
        println!("collapse: at least one run put >= {:.0}% of points in one cluster", 100.0 * pipeline::COLLAPSE_SHARE);
    }
    println!("wrote {}", paths[0].display());
    Ok(())
}

fn baseline(a: &BaselineArgs, force: bool) -> anyhow::Result<()> {
    let mut cfg = a.exp.resolve()?;
    cfg.eval.baselines = baseline_names(&a.methods)?;
    let hash = cfg.hash();
    let paths = out_paths(&cfg, &["baselines.csv"], force)?;
    let p = prepare(&cfg)?;
    let enc = pipeline::build_encoder(&p, &cfg.encoder)?;
    let name = dataset_label(&cfg, &p.ds);
    let mut rows = Vec::new();
    for &seed in &cfg.eval.seeds {
        for b in &cfg.eval.baselines {
            let run = pipeline::run_baseline(b, &p, &enc, &cfg, seed)?;
            rows.push(MetricRow::new(b, &name, seed, p.res(), cfg.train.alpha, &run, &hash));
        }
    }
    report::write_csv(&paths[0], &rows)?;
    print_rows(&rows);
    println!("wrote {}", paths[0].display());
    Ok(())
}

#[derive(Serialize)]
struct AblationRow {
    dataset: String,
    seed: u64,
    consistency: bool,
    confidence: bool,
    entropy: bool,
    acc: String,
    ari: String,
    nmi: String,
    max_share: f64,
    config_hash: String,
}

fn ablate(a: &ExpArgs, force: bool) -> anyhow::Result<()> {
    let cfg = a.resolve()?;
    let hash = cfg.hash();
    let paths = out_paths(&cfg, &["ablation.csv"], force)?;
    let p = prepare(&cfg)?;
    let enc = pipeline::build_encoder(&p, &cfg.encoder)?;
    let name = dataset_label(&cfg, &p.ds);
    let mut rows = Vec::new();
    for &seed in &cfg.eval.seeds {
        for terms in LossTerms::all_combinations() {
            let run = pipeline::run_sno(&p, &enc, &cfg, seed, terms)?.run;
            let cell = |v: f64| if run.collapsed() { "collapse".to_string() } else { format!("{v:.4}") };
            rows.push(AblationRow {
                dataset: name.clone(),
                seed,
                consistency: terms.consistency,
                confidence: terms.confidence,
                entropy: terms.entropy,
                acc: cell(run.scores.acc),
                ari: cell(run.scores.ari),
                nmi: cell(run.scores.nmi),
                max_share: run.max_share,
                config_hash: hash.clone(),
            });
        }
    }
    report::write_csv(&paths[0], &rows)?;
    let tick = |b: bool| if b { "yes" } else { "-" }.to_string();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.seed.to_string(),
                tick(r.consistency),
                tick(r.confidence),
                tick(r.entropy),
                r.acc.clone(),
                r.ari.clone(),
                r.nmi.clone(),
                format!("{:.3}", r.max_share),
            ]
        })
        .collect();
    println!("{}", format_table(&["seed", "L_con", "L_e", "H(Y)", "acc", "ari", "nmi", "share"], &body));
    println!("wrote {}", paths[0].display());
    Ok(())
}

fn series_of(rows: &[MetricRow], xs: &[f64], x_of: impl Fn(&MetricRow) -> f64) -> Vec<Series> {
    let metric = |name: &str, f: fn(&MetricRow) -> f64| {
        let (mut mid, mut spread) = (Vec::new(), Vec::new());
        for &x in xs {
            let v: Vec<f64> = rows.iter().filter(|r| x_of(r) == x).map(f).collect();
            mid.push(median(&v));
            spread.push(std_dev(&v));
        }
        Series { name: name.into(), x: xs.to_vec(), mid, spread }
    };
    vec![metric("ACC", |r| r.acc), metric("ARI", |r| r.ari), metric("NMI", |r| r.nmi)]
}

fn sweep_res(a: &SweepArgs, force: bool) -> anyhow::Result<()> {
    let resolutions: Vec<usize> = parse_list(&a.res_list)?;
    if resolutions.len() < 2 {
        bail!("sweep-res needs at least two resolutions, got {}", resolutions.len());
    }
    if let Some(r) = resolutions.iter().find(|r| !SWEEP_RESOLUTIONS.contains(r)) {
        bail!("resolution {r} is not one of {SWEEP_RESOLUTIONS:?}");
    }
    let base = a.exp.resolve()?;
    let hash = base.hash();
    let paths = out_paths(&base, &["sweep_res.csv", "sweep_res.svg"], force)?;
    let ds = pipeline::load_dataset(&base.dataset)?;
    let name = dataset_label(&base, &ds);
    let mut rows = Vec::new();
    for &res in &resolutions {
        let mut cfg = base.clone();
        cfg.registration.res = res;
        let p = Prepared::new(ds.clone(), &cfg.registration.spec())?;
        let enc = pipeline::build_encoder(&p, &cfg.encoder)?;
        for &seed in &cfg.eval.seeds {
            let run = pipeline::run_sno(&p, &enc, &cfg, seed, LossTerms::default())?.run;
            info!("res {res} seed {seed}: acc {:.3}", run.scores.acc);
            rows.push(MetricRow::new("sno", &name, seed, res, cfg.train.alpha, &run, &hash));
        }
    }
    report::write_csv(&paths[0], &rows)?;
    let xs: Vec<f64> = resolutions.iter().map(|&r| r as f64).collect();
    let series = series_of(&rows, &xs, |r| r.res as f64);
    fs::write(&paths[1], line_plot("Metrics by resolution", "resolution", "score", &series, true))?;
    print_rows(&rows);
    let (lo, hi) = (*resolutions.iter().min().unwrap(), *resolutions.iter().max().unwrap());
    let med = |res: usize| median(&rows.iter().filter(|r| r.res == res).map(|r| r.acc).collect::<Vec<_>>());
    let (a_lo, a_hi) = (med(lo), med(hi));
    println!(
        "trend: median ACC {a_hi:.4} at res {hi} vs {a_lo:.4} at res {lo}: {}",
        if a_hi >= a_lo { "non-decreasing" } else { "decreasing" }
    );
    println!("wrote {} and {}", paths[0].display(), paths[1].display());
    Ok(())
}

fn sensitivity(a: &SensitivityArgs, force: bool) -> anyhow::Result<()> {
    let alphas: Vec<f64> = parse_list(&a.alphas)?;
    if alphas.is_empty() || alphas.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        bail!("alphas must be a non-empty list of non-negative numbers");
    }
    let base = a.exp.resolve()?;
    let hash = base.hash();
    let paths = out_paths(&base, &["sensitivity.csv", "sensitivity.svg"], force)?;
    let p = prepare(&base)?;
    let enc = pipeline::build_encoder(&p, &base.encoder)?;
    let name = dataset_label(&base, &p.ds);
    let mut rows = Vec::new();
    for &alpha in &alphas {
        let mut cfg = base.clone();
        cfg.train.alpha = alpha;
        for &seed in &cfg.eval.seeds {
            let run = pipeline::run_sno(&p, &enc, &cfg, seed, LossTerms::default())?.run;
            rows.push(MetricRow::new("sno", &name, seed, p.res(), alpha, &run, &hash));
        }
    }
    report::write_csv(&paths[0], &rows)?;
    let series = series_of(&rows, &alphas, |r| r.alpha);
    fs::write(&paths[1], line_plot("Metrics by entropy weight", "alpha", "score", &series, false))?;
    print_rows(&rows);
    println!("wrote {} and {}", paths[0].display(), paths[1].display());
    Ok(())
}

fn parse_points(spec: &str, seed: u64) -> anyhow::Result<fnclust::linalg::Matrix> {
    if let Some(rest) = spec.strip_prefix("random:") {
        let (m, d) = rest.split_once(':').context("random points are given as random:M:D")?;
        return Ok(kuratowski::random_points(m.parse()?, d.parse()?, seed));
    }
    Ok(kuratowski::named_points(spec)?)
}

fn frame_bounds(points: &str, kernel: &str, probes: usize, seed: Option<u64>) -> anyhow::Result<()> {
    let seed = seed_or_env(seed)?;
    let kernel = Kernel::parse(kernel)?;
    let space = KernelSpace::new(parse_points(points, seed)?, kernel)?;
    let fb = estimate_frame_bounds(&space, probes, seed)?;
    const TOL: f64 = 1e-9;
    let inside = fb.c_low >= fb.exact_low - TOL && fb.c_high <= fb.exact_high + TOL;
    println!("points {points} (m = {}), kernel {kernel:?}", space.dim());
    println!("c_low  = {:.12}   sqrt(lambda_min) = {:.12}", fb.c_low, fb.exact_low);
    println!("c_high = {:.12}   sqrt(lambda_max) = {:.12}", fb.c_high, fb.exact_high);
    println!("sampling set: {}", fb.sampling);
    println!("within eigenvalue bracket: {inside}");
    if !inside {
        bail!("empirical frame constants fall outside the eigenvalue bracket");
    }
    Ok(())
}

#[derive(Serialize)]
struct FprRow {
    width: usize,
    seed: u64,
    fpr: f64,
    fnr: f64,
    pairs: usize,
    diverged: bool,
    config_hash: String,
}

#[allow(clippy::too_many_arguments)]
fn fpr(
    widths: &str,
    seeds: &str,
    seed: Option<u64>,
    epochs: Option<usize>,
    gamma: f64,
    margin_frac: f64,
    out: &Path,
    force: bool,
) -> anyhow::Result<()> {
    let seeds = match seed.or(env_seed()?) {
        Some(s) => vec![s],
        None => parse_seeds(seeds)?,
    };
    let mut cfg = FprConfig { widths: parse_list(widths)?, ..FprConfig::default() };
    if cfg.widths.is_empty() || cfg.widths.contains(&0) {
        bail!("widths must be a non-empty list of positive integers");
    }
    if let Some(e) = epochs {
        cfg.epochs = e;
    }
    let (space, geom) = toy_geometry(gamma)?;
    cfg.margin_eps = Some(margin_frac * geom.min_gap());
    let hash = {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(&(&cfg, gamma, &seeds))?;
        hex::encode(Sha256::digest(&json))[..12].to_string()
    };
    let (csv_path, svg_path) = (out.join("fpr.csv"), out.join("fpr.svg"));
    claim(&[&csv_path, &svg_path], force)?;
    let mut rows = Vec::new();
    for &s in &seeds {
        for pt in fpr_curve(&space, &geom, &cfg, s)? {
            rows.push(FprRow {
                width: pt.width,
                seed: s,
                fpr: pt.fpr,
                fnr: pt.fnr,
                pairs: pt.pairs,
                diverged: pt.diverged,
                config_hash: hash.clone(),
            });
        }
    }
    report::write_csv(&csv_path, &rows)?;
    let xs: Vec<f64> = cfg.widths.iter().map(|&w| w as f64).collect();
    let stat = |f: fn(&FprRow) -> f64| {
        let (mut mid, mut spread) = (Vec::new(), Vec::new());
        for &w in &cfg.widths {
            let v: Vec<f64> = rows.iter().filter(|r| r.width == w).map(f).collect();
            mid.push(median(&v));
            spread.push(std_dev(&v));
        }
        (mid, spread)
    };
    let (fpr_mid, fpr_sd) = stat(|r| r.fpr);
    let (fnr_mid, fnr_sd) = stat(|r| r.fnr);
    let series = [
        Series { name: "FPR".into(), x: xs.clone(), mid: fpr_mid.clone(), spread: fpr_sd },
        Series { name: "FNR".into(), x: xs, mid: fnr_mid.clone(), spread: fnr_sd },
    ];
    fs::write(&svg_path, line_plot("Membership error by head width", "width", "rate", &series, true))?;
    let body: Vec<Vec<String>> = cfg
        .widths
        .iter()
        .enumerate()
        .map(|(i, w)| vec![w.to_string(), format!("{:.5}", fpr_mid[i]), format!("{:.5}", fnr_mid[i])])
        .collect();
    println!("{}", format_table(&["width", "median_fpr", "median_fnr"], &body));
    let monotone = fpr_mid.windows(2).all(|w| w[1] <= w[0]);
    println!("median FPR non-increasing in width: {monotone}");
    println!("wrote {} and {}", csv_path.display(), svg_path.display());
    Ok(())
}

fn plot(a: &PlotArgs, force: bool) -> anyhow::Result<()> {
    let cfg = a.exp.resolve()?;
    let paths = out_paths(&cfg, &["pca_scatter.svg"], force)?;
    let p = prepare(&cfg)?;
    let enc = pipeline::build_encoder(&p, &cfg.encoder)?;
    let feats = encode_all(&p.images_of(&p.test), &p.ids_of(&p.test), &enc)?;
    let (labels, title) = match &a.checkpoint {
        Some(path) => {
            let (_, params) = checkpoint::load(path)?;
            (infer_features(&feats, &params, cfg.train.gamma)?.labels, "Test features by cluster")
        }
        None => (p.test_labels(), "Test features by class"),
    };
    let proj = fpca(&feats, 2)?;
    let pts: Vec<(f64, f64)> = proj.scores.iter_rows().map(|r| (r[0], r.get(1).copied().unwrap_or(0.0))).collect();
    fs::write(&paths[0], scatter_plot(title, &pts, &labels))?;
    println!("wrote {}", paths[0].display());
    Ok(())
}
