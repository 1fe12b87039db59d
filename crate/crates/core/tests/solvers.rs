use std::f64::consts::PI;

use fnclust::dynsys::{
    gen_ode6, integrate, linspace, solve_bratu, solve_linear_bvp, BratuOptions, FnField, IvpOptions,
};
use fnclust::featmap::{Encoder, EncoderSpec};
use fnclust::registration::{ImageKind, RasterImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `V = δu − γ ln u + βv − α ln v` for the parameters of one LV trajectory.
fn lv_invariant(p: [f64; 4], u: f64, v: f64) -> f64 {
    let [alpha, beta, delta, gamma] = p;
    delta * u - gamma * u.ln() + beta * v - alpha * v.ln()
}

fn lv_solve(p: [f64; 4], n: usize, opts: &IvpOptions) -> Vec<Vec<f64>> {
    let [alpha, beta, delta, gamma] = p;
    let field = FnField::new(2, move |_t, u: &[f64], du: &mut [f64]| {
        du[0] = alpha * u[0] - beta * u[0] * u[1];
        du[1] = delta * u[0] * u[1] - gamma * u[1];
    });
    integrate(&field, &[10.0, 5.0], &linspace(0.0, 25.0, n), opts).unwrap().states
}

fn max_drift(p: [f64; 4], states: &[Vec<f64>]) -> f64 {
    let v0 = lv_invariant(p, states[0][0], states[0][1]);
    states.iter().map(|s| ((lv_invariant(p, s[0], s[1]) - v0) / v0).abs()).fold(0.0, f64::max)
}

#[test]
fn lotka_volterra_conserves_first_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let p: [f64; 4] = std::array::from_fn(|j| [1.5, 1.0, 3.0, 1.0][j] * (1.0 + rng.random_range(-0.15..0.15)));
        let drift = max_drift(p, &lv_solve(p, 1001, &IvpOptions::tight()));
        assert!(drift <= 1e-6, "params {p:?}: relative drift {drift:e}");
    }
}

#[test]
fn generated_lotka_volterra_paths_conserve_first_integral() {
    let ds = gen_ode6(3, 5).unwrap();
    let mut checked = 0;
    for t in ds.trajectories.iter().filter(|t| t.class_label == 4) {
        let p = ["alpha", "beta", "delta", "gamma"].map(|k| t.params[k]);
        let opts = IvpOptions { abs_tol: 1e-14, rel_tol: 1e-12, ..IvpOptions::default() };
        let reference = lv_solve(p, t.len(), &opts);
        let drift = max_drift(p, &reference);
        assert!(drift <= 1e-6, "trajectory {}: relative drift {drift:e}", t.id);
        for (v, s) in t.values.iter().zip(&reference) {
            assert!((v - s[0]).abs() <= 1e-12 * s[0].abs().max(1.0), "trajectory {}: {v} vs {}", t.id, s[0]);
        }
        checked += 1;
    }
    assert_eq!(checked, 9);
}

fn bratu_exact(lambda: f64, x: f64) -> f64 {
    // Lower-branch θ of θ = √(2λ)·cosh(θ/4), by bisection below the fold.
    let g = |th: f64| th - (2.0 * lambda).sqrt() * (th / 4.0).cosh();
    let (mut lo, mut hi) = (0.0, 4.798_714_561);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    let th = 0.5 * (lo + hi);
    -2.0 * (((x - 0.5) * th / 2.0).cosh() / (th / 4.0).cosh()).ln()
}

#[test]
fn bratu_lower_branch_matches_closed_form() {
    let grid = linspace(0.0, 1.0, 201);
    for lambda in [0.5, 1.0, 2.0] {
        let u = solve_bratu(lambda, &grid, &BratuOptions::default()).unwrap();
        let worst = grid.iter().zip(&u.values).map(|(x, v)| (v - bratu_exact(lambda, *x)).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-6, "lambda {lambda}: max error {worst:e}");
    }
}

#[test]
fn linear_bvp_satisfies_equation_and_boundaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = linspace(0.0, 1.0, 101);
    for _ in 0..20 {
        let k = rng.random_range(0.5..6.0);
        let u = solve_linear_bvp(k, &grid).unwrap().values;
        assert_eq!((u[0], u[100]), (0.0, 0.0));
        // Fourth-order second difference against the forcing on interior points.
        let h = grid[1];
        for i in 2..99 {
            let d2 = (-u[i - 2] + 16.0 * u[i - 1] - 30.0 * u[i] + 16.0 * u[i + 1] - u[i + 2]) / (12.0 * h * h);
            let f = -k * (k * PI * grid[i]).sin();
            assert!((d2 - f).abs() < 1e-4 * (1.0 + k.powi(5)), "k={k} i={i}: {d2} vs {f}");
        }
    }
}

#[test]
fn random_features_approximate_the_gaussian_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (res, ls) = (6, 1.5);
    let imgs: Vec<RasterImage> = (0..12)
        .map(|_| RasterImage {
            res,
            pixels: (0..res * res).map(|_| rng.random_range(0.0..0.3f32)).collect(),
            kind: ImageKind::Trajectory,
        })
        .collect();
    let enc = Encoder::build(&EncoderSpec::rff(4096, ls, 4), res * res).unwrap();
    let refs: Vec<&RasterImage> = imgs.iter().collect();
    let f = enc.encode_batch(&refs, &(0..12).collect::<Vec<_>>()).unwrap();
    for i in 0..12 {
        for j in i..12 {
            let approx: f64 = f.row(i).iter().zip(f.row(j)).map(|(a, b)| a * b).sum();
            let d2: f64 = imgs[i].pixels.iter().zip(&imgs[j].pixels).map(|(a, b)| ((a - b) as f64).powi(2)).sum();
            let exact = (-d2 / (2.0 * ls * ls)).exp();
            assert!((approx - exact).abs() <= 0.05, "pair ({i},{j}): {approx} vs {exact}");
        }
    }
}
