//! Seeded generators for the ODE-6 and ODE-4 trajectory benchmarks.

mod bvp;
pub mod io;
mod ivp;
mod ode4;
mod ode6;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};

pub use bvp::{solve_bratu, solve_linear_bvp, BratuOptions};
pub use ivp::{integrate, solve_ivp, FnField, IvpOptions, Method, Solution, VectorField};
pub use ode4::{gen_ode4, gen_ode4_with, power_activation, Forcing, Ode4Config, ODE4_CLASS_NAMES};
pub use ode6::{gen_ode6, gen_ode6_with, Ode6Config, ODE6_CLASS_NAMES};

/// Sampled scalar path `u(t)` with its labels and generator provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: u64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub class_label: u32,
    /// Tertile index for ODE-6, complexity level `r` for ODE-4.
    pub subclass_label: u32,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let t = Self {
            id: 0,
            times,
            values,
            class_label: 0,
            subclass_label: 0,
            params: BTreeMap::new(),
            seed: 0,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.values.len() || self.values.len() < 2 {
            return param_err(format!(
                "trajectory {} needs matching times/values of length >= 2 (got {} and {})",
                self.id,
                self.times.len(),
                self.values.len()
            ));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return param_err(format!("trajectory {}: times not strictly increasing", self.id));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return param_err(format!("trajectory {}: non-finite value", self.id));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Every fifth member of a subclass is held out, so splits stay label-balanced.
pub fn default_split(index_within_group: usize) -> Split {
    if index_within_group % 5 == 4 {
        Split::Test
    } else {
        Split::Train
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub trajectories: Vec<Trajectory>,
    pub grid_size: usize,
    pub split: Vec<Split>,
    pub num_classes: usize,
    /// Generator arguments, echoed into the sidecar.
    pub args: BTreeMap<String, serde_json::Value>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.trajectories.iter().map(|t| t.class_label as usize).collect()
    }

    pub fn indices(&self, which: Split) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.split[i] == which).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.split.len() != self.trajectories.len() {
            return param_err("split tags do not match trajectory count");
        }
        let mut seen = vec![false; self.num_classes];
        for t in &self.trajectories {
            t.validate()?;
            if t.len() != self.grid_size {
                return param_err(format!(
                    "trajectory {} has {} samples, dataset grid is {}",
                    t.id,
                    t.len(),
                    self.grid_size
                ));
            }
            match seen.get_mut(t.class_label as usize) {
                Some(s) => *s = true,
                None => return param_err(format!("class label {} out of range", t.class_label)),
            }
        }
        if !self.is_empty() && seen.iter().any(|s| !s) {
            return param_err("class labels are not contiguous");
        }
        Ok(())
    }
}

/// `n` evenly spaced points on `[a, b]`, endpoints exact.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_hits_endpoints() {
        let g = linspace(0.0, 1.0, 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
        assert!((g[50] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn trajectory_validation_rejects_bad_input() {
        assert!(Trajectory::new(vec![0.0], vec![1.0]).is_err());
        assert!(Trajectory::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_ok());
    }
}
