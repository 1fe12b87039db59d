use fnclust::baselines::{
    bspline_coefficients, bspline_reconstruct, dtw_distance, dtw_kmedoids, fpca, kmeans, objective,
};
use fnclust::dynsys::{integrate, linspace, FnField, IvpOptions};
use fnclust::linalg::{matmul_nn, Matrix};
use fnclust::metrics::ari;
use fnclust::registration::normalize;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum k-means objective over every assignment of points to `k` labels.
fn exhaustive_min(points: &Matrix, k: usize) -> f64 {
    let n = points.rows;
    let mut best = f64::INFINITY;
    let mut labels = vec![0usize; n];
    loop {
        let mut obj = 0.0;
        for c in 0..k {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
            if members.is_empty() {
                continue;
            }
            let sel = points.select_rows(&members);
            for d in 0..points.cols {
                let mean = sel.iter_rows().map(|r| r[d]).sum::<f64>() / members.len() as f64;
                obj += sel.iter_rows().map(|r| (r[d] - mean).powi(2)).sum::<f64>();
            }
        }
        best = best.min(obj);
        let mut i = 0;
        while i < n {
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
    }
}

#[test]
fn kmeans_reaches_exhaustive_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for inst in 0..50 {
        let n = rng.random_range(3..=8);
        let k = rng.random_range(1..=3);
        let d = rng.random_range(1..=2);
        let p = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.random_range(-5.0..5.0)).collect());
        let r = kmeans(&p, k, 64, inst).unwrap();
        let opt = exhaustive_min(&p, k);
        assert!((r.objective - opt).abs() <= 1e-9 * opt.max(1.0), "instance {inst}: {} vs {opt}", r.objective);
        assert!((r.objective - objective(&p, &r.centers)).abs() <= 1e-9);
    }
}

#[test]
fn lloyd_objective_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = Matrix::from_vec(300, 3, (0..900).map(|_| rng.random_range(-1.0..1.0)).collect());
    let r = kmeans(&p, 7, 3, 2).unwrap();
    assert!(r.trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert_eq!(r, kmeans(&p, 7, 3, 2).unwrap());
}

/// Minimum over all monotone alignments, by explicit path enumeration.
fn dtw_oracle(a: &[f64], b: &[f64]) -> f64 {
    fn walk(a: &[f64], b: &[f64], i: usize, j: usize) -> f64 {
        let here = (a[i] - b[j]).powi(2);
        if i + 1 == a.len() && j + 1 == b.len() {
            return here;
        }
        let mut best = f64::INFINITY;
        if i + 1 < a.len() {
            best = best.min(walk(a, b, i + 1, j));
        }
        if j + 1 < b.len() {
            best = best.min(walk(a, b, i, j + 1));
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            best = best.min(walk(a, b, i + 1, j + 1));
        }
        here + best
    }
    walk(a, b, 0, 0).sqrt()
}

proptest! {
    #[test]
    fn dtw_matches_path_enumeration(
        a in prop::collection::vec(-2.0f64..2.0, 1..6),
        b in prop::collection::vec(-2.0f64..2.0, 1..6),
    ) {
        prop_assert!((dtw_distance(&a, &b) - dtw_oracle(&a, &b)).abs() < 1e-12);
        prop_assert_eq!(dtw_distance(&a, &b), dtw_distance(&b, &a));
    }

    #[test]
    fn dtw_at_most_euclidean(pairs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..30)) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let eu = pairs.iter().map(|p| (p.0 - p.1).powi(2)).sum::<f64>().sqrt();
        prop_assert!(dtw_distance(&a, &b) <= eu + 1e-12);
    }
}

/// Two families, sin(2πt) and sin(10πt), with random phase and amplitude jitter.
pub fn sinusoid_families(per_family: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = linspace(0.0, 1.0, 64);
    let mut series = Vec::new();
    let mut labels = Vec::new();
    for (c, f) in [1.0, 5.0].into_iter().enumerate() {
        for _ in 0..per_family {
            let phase = rng.random_range(0.0..0.3);
            let amp = rng.random_range(0.9..1.1);
            series.push(t.iter().map(|&x| amp * (2.0 * std::f64::consts::PI * f * x + phase).sin()).collect());
            labels.push(c);
        }
    }
    (series, labels)
}

#[test]
fn dtw_kmedoids_separates_sinusoid_families() {
    for seed in 0..5 {
        let (series, labels) = sinusoid_families(15, seed);
        let r = dtw_kmedoids(&series, 2, 3, seed, None).unwrap();
        assert_eq!(ari(&r.labels, &labels).unwrap(), 1.0, "seed {seed}");
        assert_eq!(r, dtw_kmedoids(&series, 2, 3, seed, None).unwrap());
    }
}

#[test]
fn fpca_reconstructs_scaled_data_at_full_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = Matrix::from_vec(12, 8, (0..96).map(|_| rng.random_range(-1.0..1.0)).collect());
    let r = fpca(&x, 8).unwrap();
    assert!(!r.rank_deficient);
    let back = matmul_nn(&r.scores, &r.components);
    let scaled = r.scaler.transform(&x);
    for (a, b) in back.data.iter().zip(&scaled.data) {
        assert!((a - b).abs() < 1e-8);
    }
    let fewer = fpca(&x, 3).unwrap();
    assert_eq!((fewer.scores.rows, fewer.scores.cols), (12, 3));
    assert!(fewer.singular_values.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn bspline_fits_smooth_lotka_volterra() {
    let field = FnField::new(2, |_t: f64, u: &[f64], du: &mut [f64]| {
        du[0] = 1.5 * u[0] - u[0] * u[1];
        du[1] = -3.0 * u[1] + u[0] * u[1];
    });
    // About 1.7 periods; over the full 25-unit span (8 periods) forty
    // cubic pieces cannot follow the oscillation to this accuracy.
    let t = linspace(0.0, 5.0, 1001);
    let sol = integrate(&field, &[3.5, 1.8], &t, &IvpOptions::default()).unwrap();
    let y = normalize(&sol.component(0));
    let values = Matrix::from_vec(1, y.len(), y.clone());
    let c = bspline_coefficients(&values, &t, 40).unwrap();
    let fit = bspline_reconstruct(&c, &t).unwrap();
    let dev = fit.data.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(dev <= 1e-3, "max deviation {dev}");
}
