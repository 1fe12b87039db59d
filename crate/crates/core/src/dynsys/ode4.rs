//! ODE-4: randomized neural vector fields `V(u) = A σ_r(Bu + c)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::error::{param_err, Error, Result};
use crate::rng::{self, Stream};

use super::ivp::{solve_ivp, FnField, IvpOptions};
use super::{default_split, Dataset, Trajectory};

pub const ODE4_CLASS_NAMES: [&str; 4] = [
    "first_order_homogeneous",
    "first_order_forced",
    "second_order_homogeneous",
    "second_order_forced",
];

const MAX_RESAMPLES: usize = 10;

#[derive(Debug, Clone)]
pub struct Ode4Config {
    pub n_per_level: usize,
    pub levels: u32,
    /// Hidden width `W` of the vector field.
    pub width: usize,
    /// State dimension `d`.
    pub dim: usize,
    pub grid_size: usize,
    pub t_end: f64,
    pub seed: u64,
    /// Weight scale `s(r) = scale_base + scale_slope · r`.
    pub scale_base: f64,
    pub scale_slope: f64,
    /// Damping `λ` of the forced first-order class.
    pub damping: f64,
    /// Adaptive damping `γ(u, u̇) = gamma0 + gamma_gain · |V(u)|`.
    pub gamma0: f64,
    pub gamma_gain: f64,
    pub ivp: IvpOptions,
}

impl Ode4Config {
    pub fn new(n_per_level: usize, levels: u32, width: usize, seed: u64) -> Self {
        Self {
            n_per_level,
            levels,
            width,
            dim: 2,
            grid_size: 101,
            t_end: 50.0,
            seed,
            scale_base: 1.0,
            scale_slope: 0.1,
            damping: 0.05,
            gamma0: 0.1,
            gamma_gain: 0.5,
            ivp: IvpOptions::default(),
        }
    }
}

/// Saturation level applied to the activation for orders above 8.
pub const SATURATION: f64 = 10.0;

/// Power activation `σ_r(z) = max(0, z/r)^r`, smoothly saturated for `r > 8`.
pub fn power_activation(z: f64, r: u32) -> f64 {
    let base = (z / r as f64).max(0.0).powi(r as i32);
    if r > 8 {
        SATURATION * (base / SATURATION).tanh()
    } else {
        base
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Basis {
    Sine { amp: f64, freq: f64, phase: f64 },
    Poly { amp: f64, degree: i32 },
    Decay { amp: f64, rate: f64 },
    Bump { amp: f64, center: f64, width: f64 },
}

/// Random mixture of sinusoid, polynomial, exponential-decay and Gaussian terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    terms: Vec<Basis>,
    t_end: f64,
}

impl Forcing {
    fn sample(rng: &mut Stream, t_end: f64) -> Self {
        let count = rng.random_range(1..=3);
        let terms = (0..count)
            .map(|_| {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let amp = sign * rng.random_range(0.1..1.0);
                match rng.random_range(0..4) {
                    0 => Basis::Sine {
                        amp,
                        freq: rng.random_range(0.1..2.0),
                        phase: rng.random_range(0.0..2.0 * PI),
                    },
                    1 => Basis::Poly { amp, degree: rng.random_range(1..=2) },
                    2 => Basis::Decay { amp, rate: rng.random_range(0.05..0.5) },
                    _ => Basis::Bump {
                        amp,
                        center: rng.random_range(0.0..t_end),
                        width: rng.random_range(1.0..10.0),
                    },
                }
            })
            .collect();
        Self { terms, t_end }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|b| match *b {
                Basis::Sine { amp, freq, phase } => amp * (freq * t + phase).sin(),
                Basis::Poly { amp, degree } => amp * (t / self.t_end).powi(degree),
                Basis::Decay { amp, rate } => amp * (-rate * t).exp(),
                Basis::Bump { amp, center, width } => {
                    amp * (-(t - center) * (t - center) / (2.0 * width * width)).exp()
                }
            })
            .sum()
    }

    fn record(&self, prefix: &str, out: &mut BTreeMap<String, f64>) {
        for (j, b) in self.terms.iter().enumerate() {
            let mut put = |k: &str, v: f64| {
                out.insert(format!("{prefix}_{j}_{k}"), v);
            };
            match *b {
                Basis::Sine { amp, freq, phase } => {
                    put("kind", 0.0);
                    put("amp", amp);
                    put("freq", freq);
                    put("phase", phase);
                }
                Basis::Poly { amp, degree } => {
                    put("kind", 1.0);
                    put("amp", amp);
                    put("degree", degree as f64);
                }
                Basis::Decay { amp, rate } => {
                    put("kind", 2.0);
                    put("amp", amp);
                    put("rate", rate);
                }
                Basis::Bump { amp, center, width } => {
                    put("kind", 3.0);
                    put("amp", amp);
                    put("center", center);
                    put("width", width);
                }
            }
        }
    }
}

struct NeuralField {
    a: Vec<f64>, // d × W
    b: Vec<f64>, // W × d
    c: Vec<f64>, // W
    dim: usize,
    width: usize,
    order: u32,
}

impl NeuralField {
    fn sample(rng: &mut Stream, dim: usize, width: usize, order: u32, scale: f64) -> Self {
        let bound = scale / (width as f64).sqrt();
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-bound..bound)).collect() };
        let a = draw(dim * width);
        let b = draw(width * dim);
        let c = draw(width);
        Self { a, b, c, dim, width, order }
    }

    fn eval(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for h in 0..self.width {
            let pre = self.c[h] + (0..self.dim).map(|j| self.b[h * self.dim + j] * u[j]).sum::<f64>();
            let act = power_activation(pre, self.order);
            if act != 0.0 {
                for (i, o) in out.iter_mut().enumerate() {
                    *o += self.a[i * self.width + h] * act;
                }
            }
        }
    }

    fn record(&self, out: &mut BTreeMap<String, f64>) {
        for i in 0..self.dim {
            for h in 0..self.width {
                out.insert(format!("A_{i}_{h}"), self.a[i * self.width + h]);
                out.insert(format!("B_{h}_{i}"), self.b[h * self.dim + i]);
            }
        }
        for h in 0..self.width {
            out.insert(format!("c_{h}"), self.c[h]);
        }
    }
}

/// Generate `4 × levels × n_per_level` trajectories on `t ∈ [0, 50]`.
pub fn gen_ode4(n_per_level: usize, levels: u32, width: usize, seed: u64) -> Result<Dataset> {
    gen_ode4_with(&Ode4Config::new(n_per_level, levels, width, seed))
}

pub fn gen_ode4_with(cfg: &Ode4Config) -> Result<Dataset> {
    if cfg.n_per_level == 0 || cfg.levels == 0 || cfg.width == 0 || cfg.dim == 0 {
        return param_err("n_per_level, levels, width and dim must all be positive");
    }
    if cfg.grid_size < 2 || !(cfg.t_end > 0.0) {
        return param_err("grid_size must be >= 2 and t_end positive");
    }
    let n = cfg.n_per_level;
    let levels = cfg.levels as usize;
    let total = ODE4_CLASS_NAMES.len() * levels * n;
    let trajectories = (0..total)
        .into_par_iter()
        .map(|idx| {
            let class = idx / (levels * n);
            let r = ((idx / n) % levels + 1) as u32;
            let traj_seed = cfg.seed ^ idx as u64;
            let mut stream = rng::stream(traj_seed);
            let mut t = generate_one(class, r, cfg, &mut stream)?;
            t.id = idx as u64;
            t.class_label = class as u32;
            t.subclass_label = r;
            t.seed = traj_seed;
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let split = (0..total).map(|i| default_split(i % n)).collect();
    let mut args = BTreeMap::new();
    args.insert("n_per_level".into(), json!(n));
    args.insert("levels".into(), json!(cfg.levels));
    args.insert("width".into(), json!(cfg.width));
    args.insert("dim".into(), json!(cfg.dim));
    args.insert("grid_size".into(), json!(cfg.grid_size));
    args.insert("t_end".into(), json!(cfg.t_end));
    args.insert("seed".into(), json!(cfg.seed));
    Ok(Dataset {
        name: "ode4".into(),
        trajectories,
        grid_size: cfg.grid_size,
        split,
        num_classes: ODE4_CLASS_NAMES.len(),
        args,
    })
}

fn generate_one(class: usize, r: u32, cfg: &Ode4Config, rng: &mut Stream) -> Result<Trajectory> {
    let mut last_err = None;
    for _ in 0..=MAX_RESAMPLES {
        match attempt(class, r, cfg, rng) {
            Ok(t) => return Ok(t),
            Err(e @ (Error::Divergence { .. } | Error::Solver { .. })) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn attempt(class: usize, r: u32, cfg: &Ode4Config, rng: &mut Stream) -> Result<Trajectory> {
    let d = cfg.dim;
    let scale = cfg.scale_base + cfg.scale_slope * r as f64;
    let field = NeuralField::sample(rng, d, cfg.width, r, scale);
    let u0: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let forced = class == 1 || class == 3;
    let forcing: Vec<Forcing> = if forced {
        (0..d).map(|_| Forcing::sample(rng, cfg.t_end)).collect()
    } else {
        Vec::new()
    };

    let mut params = BTreeMap::new();
    params.insert("r".to_string(), r as f64);
    params.insert("s".to_string(), scale);
    for (i, v) in u0.iter().enumerate() {
        params.insert(format!("u0_{i}"), *v);
    }
    field.record(&mut params);
    for (i, f) in forcing.iter().enumerate() {
        f.record(&format!("f{i}"), &mut params);
    }

    let (lambda, g0, gk) = (cfg.damping, cfg.gamma0, cfg.gamma_gain);
    let sol = if class < 2 {
        let rhs = FnField::new(d, |t: f64, u: &[f64], du: &mut [f64]| {
            field.eval(u, du);
            if forced {
                for i in 0..d {
                    du[i] += forcing[i].eval(t) - lambda * u[i];
                }
            }
        });
        solve_ivp(&rhs, &u0, (0.0, cfg.t_end), cfg.grid_size, &cfg.ivp)?
    } else {
        let rhs = FnField::new(2 * d, |t: f64, s: &[f64], ds: &mut [f64]| {
            let (u, v) = s.split_at(d);
            let (du, dv) = ds.split_at_mut(d);
            du.copy_from_slice(v);
            field.eval(u, dv);
            let gamma = g0 + gk * dv.iter().map(|x| x * x).sum::<f64>().sqrt();
            for i in 0..d {
                dv[i] = -dv[i] - gamma * v[i] + if forced { forcing[i].eval(t) } else { 0.0 };
            }
        });
        let mut s0 = u0.clone();
        s0.extend(std::iter::repeat_n(0.0, d));
        solve_ivp(&rhs, &s0, (0.0, cfg.t_end), cfg.grid_size, &cfg.ivp)?
    };
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn activation_values() {
        assert_eq!(power_activation(-2.0, 1), 0.0);
        assert_eq!(power_activation(3.0, 1), 3.0);
        assert!((power_activation(3.0, 2) - 2.25).abs() < 1e-15);
        assert_eq!(power_activation(0.0, 5), 0.0);
    }

    #[test]
    fn activation_saturates_above_order_eight() {
        let v = power_activation(1e3, 12);
        assert!(v <= SATURATION && v > 9.99);
    }

    #[test]
    fn small_dataset_shape_and_determinism() {
        let a = gen_ode4(2, 3, 16, 9).unwrap();
        assert_eq!(a.len(), 4 * 3 * 2);
        a.validate().unwrap();
        assert!(a.trajectories.iter().all(|t| (1..=3).contains(&t.subclass_label)));
        assert_eq!(a, gen_ode4(2, 3, 16, 9).unwrap());
    }

    #[test]
    fn params_cover_weights_and_forcing() {
        let ds = gen_ode4(1, 1, 4, 1).unwrap();
        let forced = &ds.trajectories[1];
        assert!(forced.params.contains_key("A_1_3"));
        assert!(forced.params.contains_key("c_3"));
        assert!(forced.params.keys().any(|k| k.starts_with("f0_0_")));
        assert!(!ds.trajectories[0].params.keys().any(|k| k.starts_with("f0_")));
    }
}
