//! ODE-6: six families of classical systems, three parameter tertiles each.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde_json::json;

use crate::error::{param_err, Error, Result};
use crate::rng::{self, Stream};

use super::bvp::{solve_bratu, solve_linear_bvp, BratuOptions};
use super::ivp::{solve_ivp, FnField, IvpOptions};
use super::{default_split, linspace, Dataset, Trajectory};

pub const ODE6_CLASS_NAMES: [&str; 6] = [
    "linear_bvp",
    "bratu_bvp",
    "linear_homogeneous",
    "linear_forced",
    "lotka_volterra",
    "forced_van_der_pol",
];

const SUBCLASSES: usize = 3;
const MAX_RESAMPLES: usize = 10;
/// Equiprobable tertile edges of trace(M) ~ N(0, 2): √2 · Φ⁻¹(2/3).
const TRACE_TERTILE: f64 = 0.609_140_388_347_971;
const LV_BASE: [f64; 4] = [1.5, 1.0, 3.0, 1.0];

#[derive(Debug, Clone)]
pub struct Ode6Config {
    pub n_per_subclass: usize,
    pub grid_size: usize,
    pub seed: u64,
    pub ivp: IvpOptions,
}

impl Ode6Config {
    pub fn new(n_per_subclass: usize, seed: u64) -> Self {
        Self { n_per_subclass, grid_size: 101, seed, ivp: IvpOptions::default() }
    }
}

/// Generate `6 × 3 × n_per_subclass` trajectories.
///
/// Trajectory `i` draws from its own stream seeded with `seed ^ i`, so the
/// output does not depend on the order in which items are produced.
pub fn gen_ode6(n_per_subclass: usize, seed: u64) -> Result<Dataset> {
    gen_ode6_with(&Ode6Config::new(n_per_subclass, seed))
}

pub fn gen_ode6_with(cfg: &Ode6Config) -> Result<Dataset> {
    if cfg.n_per_subclass == 0 {
        return param_err("n_per_subclass must be at least 1");
    }
    if cfg.grid_size < 2 {
        return param_err("grid_size must be at least 2");
    }
    let n = cfg.n_per_subclass;
    let total = ODE6_CLASS_NAMES.len() * SUBCLASSES * n;
    let trajectories = (0..total)
        .into_par_iter()
        .map(|idx| {
            let class = idx / (SUBCLASSES * n);
            let sub = (idx / n) % SUBCLASSES;
            let traj_seed = cfg.seed ^ idx as u64;
            let mut stream = rng::stream(traj_seed);
            let mut t = generate_one(class, sub, cfg, &mut stream)?;
            t.id = idx as u64;
            t.class_label = class as u32;
            t.subclass_label = sub as u32;
            t.seed = traj_seed;
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let split = (0..total).map(|i| default_split(i % n)).collect();
    let mut args = BTreeMap::new();
    args.insert("n_per_subclass".into(), json!(n));
    args.insert("grid_size".into(), json!(cfg.grid_size));
    args.insert("seed".into(), json!(cfg.seed));
    Ok(Dataset {
        name: "ode6".into(),
        trajectories,
        grid_size: cfg.grid_size,
        split,
        num_classes: ODE6_CLASS_NAMES.len(),
        args,
    })
}

fn tertile(lo: f64, hi: f64, sub: usize) -> (f64, f64) {
    let w = (hi - lo) / SUBCLASSES as f64;
    (lo + w * sub as f64, lo + w * (sub + 1) as f64)
}

fn uniform(rng: &mut Stream, lo: f64, hi: f64) -> f64 {
    Uniform::new(lo, hi).expect("valid range").sample(rng)
}

fn generate_one(class: usize, sub: usize, cfg: &Ode6Config, rng: &mut Stream) -> Result<Trajectory> {
    let mut last_err = None;
    for _ in 0..=MAX_RESAMPLES {
        let attempt = match class {
            0 => linear_bvp(sub, cfg, rng),
            1 => bratu(sub, cfg, rng),
            2 => linear_homogeneous(sub, cfg, rng),
            3 => linear_forced(sub, cfg, rng),
            4 => lotka_volterra(sub, cfg, rng),
            5 => van_der_pol(sub, cfg, rng),
            _ => unreachable!("ODE-6 has six classes"),
        };
        match attempt {
            Ok(t) => return Ok(t),
            Err(e @ (Error::Divergence { .. } | Error::Solver { .. })) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn ivp_trajectory(
    field: &dyn super::VectorField,
    u0: &[f64],
    t1: f64,
    cfg: &Ode6Config,
    params: BTreeMap<String, f64>,
) -> Result<Trajectory> {
    let sol = solve_ivp(field, u0, (0.0, t1), cfg.grid_size, &cfg.ivp)?;
    Ok(Trajectory {
        id: 0,
        values: sol.component(0),
        times: sol.times,
        class_label: 0,
        subclass_label: 0,
        params,
        seed: 0,
    })
}

fn linear_bvp(sub: usize, cfg: &Ode6Config, rng: &mut Stream) -> Result<Trajectory> {
    let (lo, hi) = tertile(0.5, 5.5, sub);
    let k = uniform(rng, lo, hi);
    solve_linear_bvp(k, &linspace(0.0, 1.0, cfg.grid_size))
}

fn bratu(sub: usize, cfg: &Ode6Config, rng: &mut Stream) -> Result<Trajectory> {
    let (lo, hi) = tertile(0.0, 3.5, sub);
    let lambda = uniform(rng, lo, hi);
    solve_bratu(lambda, &linspace(0.0, 1.0, cfg.grid_size), &BratuOptions::default())
}

fn linear_homogeneous(sub: usize, cfg: &Ode6Config, rng: &mut Stream) -> Result<Trajectory> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    // Rejection-sample (a,b,c,d) until trace(M) lands in the requested tertile.
    let [a, b, c, d] = loop {
        let m: [f64; 4] = std::array::from_fn(|_| normal.sample(rng));
        let tr = m[0] + m[3];
        let bin = if tr < -TRACE_TERTILE {
            0
        } else if tr < TRACE_TERTILE {
            1
        } else {
            2
        };
        if bin == sub {
            break m;
        }
    };
    let field = FnField::new(2, move |_t, u: &[f64], du: &mut [f64]| {
        du[0] = a * u[0] + b * u[1];
        du[1] = c * u[0] + d * u[1];
    });
    let params = [("a", a), ("b", b), ("c", c), ("d", d)];
    ivp_trajectory(&field, &[1.0, 1.0], 10.0, cfg, to_map(&params))
}

fn linear_forced(sub: usize, cfg: &Ode6Config, rng: &mut Stream) -> Result<Trajectory> {
    let a = uniform(rng, -0.5, -0.1);
    let d = uniform(rng, -0.5, -0.1);
    let b = uniform(rng, -1.0, 1.0);
    let c = uniform(rng, -1.0, 1.0);
    let (lo, hi) = tertile(0.1, 2.1, sub);
    let omega = uniform(rng, lo, hi);
    let field = FnField::new(2, move |t: f64, u: &[f64], du: &mut [f64]| {
        du[0] = a * u[0] + b * u[1] + (omega * t).sin();
        du[1] = c * u[0] + d * u[1] + (omega * t).cos();
    });
    let params = [("a", a), ("b", b), ("c", c), ("d", d), ("omega", omega)];
    ivp_trajectory(&field, &[1.0, 1.0], 10.0, cfg, to_map(&params))
}

fn lotka_volterra(sub: usize, cfg: &Ode6Config, rng: &mut Stream) -> Result<Trajectory> {
    // Perturbation vector ε ∈ [-0.15, 0.15]⁴; tertiles of ‖ε‖ over [0, 0.3].
    let (lo, hi) = tertile(0.0, 0.3, sub);
    let eps = loop {
        let e: [f64; 4] = std::array::from_fn(|_| rng.random_range(-0.15..0.15));
        let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm >= lo && (norm < hi || (sub == SUBCLASSES - 1 && norm <= hi)) {
            break e;
        }
    };
    let p: [f64; 4] = std::array::from_fn(|j| LV_BASE[j] * (1.0 + eps[j]));
    let [alpha, beta, delta, gamma] = p;
    let field = FnField::new(2, move |_t, u: &[f64], du: &mut [f64]| {
        du[0] = alpha * u[0] - beta * u[0] * u[1];
        du[1] = delta * u[0] * u[1] - gamma * u[1];
    });
    let params = [
        ("alpha", alpha),
        ("beta", beta),
        ("delta", delta),
        ("gamma", gamma),
        ("eps_0", eps[0]),
        ("eps_1", eps[1]),
        ("eps_2", eps[2]),
        ("eps_3", eps[3]),
    ];
    // The prey population dips to ~1e-12, so absolute tolerance must sit below it.
    let ivp = IvpOptions { abs_tol: cfg.ivp.abs_tol.min(1e-14), rel_tol: cfg.ivp.rel_tol.min(1e-12), ..cfg.ivp };
    ivp_trajectory(&field, &[10.0, 5.0], 25.0, &Ode6Config { ivp, ..cfg.clone() }, to_map(&params))
}

fn van_der_pol(sub: usize, cfg: &Ode6Config, rng: &mut Stream) -> Result<Trajectory> {
    let (lo, hi) = tertile(0.1, 2.1, sub);
    let mu = uniform(rng, lo, hi);
    let amp = uniform(rng, 0.1, 1.1);
    let omega = uniform(rng, 0.5, 2.5);
    let field = FnField::new(2, move |t: f64, u: &[f64], du: &mut [f64]| {
        du[0] = u[1];
        du[1] = mu * (1.0 - u[0] * u[0]) * u[1] - u[0] + amp * (omega * t).cos();
    });
    let params = [("mu", mu), ("A", amp), ("omega", omega)];
    ivp_trajectory(&field, &[1.0, 0.0], 50.0, cfg, to_map(&params))
}

fn to_map(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_per_subclass_gives_eighteen_balanced() {
        let ds = gen_ode6(1, 3).unwrap();
        assert_eq!(ds.len(), 18);
        for c in 0..6u32 {
            assert_eq!(ds.trajectories.iter().filter(|t| t.class_label == c).count(), 3);
        }
        ds.validate().unwrap();
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_ode6(2, 11).unwrap();
        let b = gen_ode6(2, 11).unwrap();
        assert_eq!(a, b);
        let c = gen_ode6(2, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn subclasses_follow_parameter_tertiles() {
        let ds = gen_ode6(4, 5).unwrap();
        for t in &ds.trajectories {
            let s = t.subclass_label as usize;
            match t.class_label {
                0 => {
                    let (lo, hi) = tertile(0.5, 5.5, s);
                    assert!((lo..hi).contains(&t.params["k"]));
                }
                1 => {
                    let (lo, hi) = tertile(0.0, 3.5, s);
                    assert!((lo..hi).contains(&t.params["lambda"]));
                }
                2 => {
                    let tr = t.params["a"] + t.params["d"];
                    let bin = if tr < -TRACE_TERTILE { 0 } else if tr < TRACE_TERTILE { 1 } else { 2 };
                    assert_eq!(bin, s);
                }
                5 => {
                    let (lo, hi) = tertile(0.1, 2.1, s);
                    assert!((lo..hi).contains(&t.params["mu"]));
                }
                _ => {}
            }
        }
    }

    #[test]
    fn trace_tertile_edge_is_equiprobable() {
        // P(N(0,2) < edge) should be 2/3; check with the error function series.
        let z = TRACE_TERTILE / 2f64.sqrt();
        // Φ(z) via a high-order Abramowitz–Stegun approximation.
        let t = 1.0 / (1.0 + 0.231_641_9 * z);
        let poly = t * (0.319_381_530 + t * (-0.356_563_782 + t * (1.781_477_937 + t * (-1.821_255_978 + t * 1.330_274_429))));
        let phi = 1.0 - (-z * z / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt() * poly;
        assert!((phi - 2.0 / 3.0).abs() < 1e-6, "{phi}");
    }
}
