//! The two boundary value problems of ODE-6.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{param_err, Error, Result};

use super::ivp::{integrate, FnField, IvpOptions};
use super::Trajectory;

fn check_unit_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid[0] != 0.0 || *grid.last().unwrap() != 1.0 {
        return param_err("BVP grid must start at 0 and end at 1");
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return param_err("BVP grid must be strictly increasing");
    }
    Ok(())
}

fn trajectory(grid: &[f64], values: Vec<f64>, key: &str, value: f64) -> Trajectory {
    let mut params = BTreeMap::new();
    params.insert(key.to_string(), value);
    Trajectory {
        id: 0,
        times: grid.to_vec(),
        values,
        class_label: 0,
        subclass_label: 0,
        params,
        seed: 0,
    }
}

/// `u'' = -k sin(kπx)`, `u(0) = u(1) = 0`, evaluated in closed form.
pub fn solve_linear_bvp(k: f64, grid: &[f64]) -> Result<Trajectory> {
    if !k.is_finite() || k == 0.0 {
        return param_err(format!("linear BVP frequency must be finite and nonzero, got {k}"));
    }
    check_unit_grid(grid)?;
    let scale = k * PI * PI;
    let tail = (k * PI).sin() / scale;
    let values = grid
        .iter()
        .map(|&x| {
            // Boundary values are imposed exactly.
            if x == 0.0 || x == 1.0 {
                0.0
            } else {
                (k * PI * x).sin() / scale - x * tail
            }
        })
        .collect();
    Ok(trajectory(grid, values, "k", k))
}

#[derive(Debug, Clone, Copy)]
pub struct BratuOptions {
    /// Refinement iterations on the initial slope once a root is bracketed.
    pub max_iter: usize,
    /// Target for `|u(1)|`.
    pub tol: f64,
    /// Slope step used to bracket the lower-branch root.
    pub scan_step: f64,
    pub scan_max: f64,
}

impl Default for BratuOptions {
    fn default() -> Self {
        Self { max_iter: 100, tol: 1e-13, scan_step: 0.25, scan_max: 12.0 }
    }
}

/// Lower-branch solution of `u'' + λ e^u = 0`, `u(0) = u(1) = 0`, by shooting
/// on the initial slope.
pub fn solve_bratu(lambda: f64, grid: &[f64], opts: &BratuOptions) -> Result<Trajectory> {
    if !lambda.is_finite() || lambda < 0.0 {
        return param_err(format!("Bratu parameter must be finite and nonnegative, got {lambda}"));
    }
    check_unit_grid(grid)?;
    let field = FnField::new(2, move |_x, u: &[f64], du: &mut [f64]| {
        du[0] = u[1];
        du[1] = -lambda * u[0].exp();
    });
    let ivp = IvpOptions::tight();
    let ends = [0.0, 1.0];
    let shoot = |s: f64| -> Result<f64> {
        let sol = integrate(&field, &[0.0, s], &ends, &ivp)?;
        Ok(sol.last()[0])
    };

    // Bracket: u(1; s) is negative at s = 0 and first crosses zero on the
    // lower branch.
    let mut lo = 0.0;
    let mut f_lo = shoot(lo)?;
    let mut bracket = None;
    if f_lo.abs() <= opts.tol {
        bracket = Some((lo, lo));
    } else {
        let mut s = opts.scan_step;
        while s <= opts.scan_max {
            let f = shoot(s)?;
            if f >= 0.0 {
                bracket = Some((lo, s));
                break;
            }
            lo = s;
            f_lo = f;
            s += opts.scan_step;
        }
    }
    let (mut a, mut b) = bracket.ok_or_else(|| Error::Solver {
        msg: format!("no lower-branch solution for lambda = {lambda}"),
        residual: f_lo.abs(),
    })?;

    let slope = if a == b {
        a
    } else {
        // Illinois regula falsi.
        let mut fa = f_lo;
        let mut fb = shoot(b)?;
        let mut side = 0i8;
        let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
        let mut converged = best.1.abs() <= opts.tol;
        for _ in 0..opts.max_iter {
            if converged {
                break;
            }
            let c = (a * fb - b * fa) / (fb - fa);
            let fc = shoot(c)?;
            if fc.abs() < best.1.abs() {
                best = (c, fc);
            }
            if fc.abs() <= opts.tol || (b - a).abs() <= 4.0 * f64::EPSILON * c.abs().max(1.0) {
                converged = true;
                break;
            }
            if (fc > 0.0) == (fb > 0.0) {
                b = c;
                fb = fc;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            } else {
                a = c;
                fa = fc;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            }
        }
        if !converged {
            return Err(Error::Solver {
                msg: format!("shooting for lambda = {lambda} exhausted {} iterations", opts.max_iter),
                residual: best.1.abs(),
            });
        }
        best.0
    };

    let sol = integrate(&field, &[0.0, slope], grid, &ivp)?;
    let mut values = sol.component(0);
    values[0] = 0.0;
    *values.last_mut().unwrap() = 0.0;
    Ok(trajectory(grid, values, "lambda", lambda))
}
