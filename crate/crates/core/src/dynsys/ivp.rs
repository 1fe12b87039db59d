//! Explicit Runge–Kutta integration sampled onto a uniform output grid.

use crate::error::{Error, Result};

use super::linspace;

/// Right-hand side `du/dt = F(t, u)`.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, u: &[f64], du: &mut [f64]);
}

/// Adapter turning a closure into a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, u: &[f64], du: &mut [f64]) {
        (self.f)(t, u, du)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical RK4 with `substeps` steps per output interval.
    Rk4Fixed,
    /// Dormand–Prince 5(4) with dense output.
    Rk45Adaptive,
}

#[derive(Debug, Clone, Copy)]
pub struct IvpOptions {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub rk4_substeps: usize,
    pub max_steps: usize,
    /// Any accepted state with a component above this magnitude is a blow-up.
    pub blowup: f64,
}

impl Default for IvpOptions {
    fn default() -> Self {
        Self {
            method: Method::Rk45Adaptive,
            abs_tol: 1e-9,
            rel_tol: 1e-7,
            rk4_substeps: 10,
            max_steps: 2_000_000,
            blowup: 1e12,
        }
    }
}

impl IvpOptions {
    pub fn rk4() -> Self {
        Self { method: Method::Rk4Fixed, ..Self::default() }
    }

    pub fn tight() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-12, ..Self::default() }
    }
}

/// States sampled on the uniform output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub times: Vec<f64>,
    /// `states[j]` is the full state at `times[j]`.
    pub states: Vec<Vec<f64>>,
}

impl Solution {
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("solution has at least one sample")
    }
}

pub fn solve_ivp(
    field: &dyn VectorField,
    u0: &[f64],
    t_span: (f64, f64),
    grid_size: usize,
    opts: &IvpOptions,
) -> Result<Solution> {
    let (t0, t1) = t_span;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Parameter(format!("invalid time span ({t0}, {t1})")));
    }
    if grid_size < 2 {
        return Err(Error::Parameter("grid_size must be at least 2".into()));
    }
    integrate(field, u0, &linspace(t0, t1, grid_size), opts)
}

/// Integrate from `grid[0]` and sample the state at every point of `grid`.
pub fn integrate(field: &dyn VectorField, u0: &[f64], grid: &[f64], opts: &IvpOptions) -> Result<Solution> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("output grid must be strictly increasing with >= 2 points".into()));
    }
    if u0.len() != field.dim() {
        return Err(Error::Shape(format!(
            "initial state has {} components, field expects {}",
            u0.len(),
            field.dim()
        )));
    }
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("initial state is not finite".into()));
    }
    match opts.method {
        Method::Rk4Fixed => rk4(field, u0, grid, opts),
        Method::Rk45Adaptive => dopri5(field, u0, grid, opts),
    }
}

fn blown_up(y: &[f64], limit: f64) -> bool {
    y.iter().any(|v| !v.is_finite() || v.abs() > limit)
}

fn rk4(field: &dyn VectorField, u0: &[f64], grid: &[f64], opts: &IvpOptions) -> Result<Solution> {
    let n = u0.len();
    let sub = opts.rk4_substeps.max(1);
    let mut y = u0.to_vec();
    let mut states = Vec::with_capacity(grid.len());
    states.push(y.clone());
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for w in grid.windows(2) {
        let h = (w[1] - w[0]) / sub as f64;
        for s in 0..sub {
            let t = w[0] + s as f64 * h;
            field.eval(t, &y, &mut k1);
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            field.eval(t + 0.5 * h, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            field.eval(t + 0.5 * h, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + h * k3[i];
            }
            field.eval(t + h, &tmp, &mut k4);
            for i in 0..n {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if blown_up(&y, opts.blowup) {
                return Err(Error::Divergence { t: t + h });
            }
        }
        states.push(y.clone());
    }
    Ok(Solution { times: grid.to_vec(), states })
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Difference between the 5th and embedded 4th order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Continuous extension: y(t + θh) = y + h Σ_i k_i Σ_j P[i][j] θ^(j+1).
const P: [[f64; 4]; 7] = [
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0],
];

fn rms_scaled(v: &[f64], y0: &[f64], y1: &[f64], opts: &IvpOptions) -> f64 {
    let s: f64 = v
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = opts.abs_tol + opts.rel_tol * a.abs().max(b.abs());
            (e / sc) * (e / sc)
        })
        .sum();
    (s / v.len() as f64).sqrt()
}

fn initial_step(
    field: &dyn VectorField,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    span: f64,
    opts: &IvpOptions,
) -> f64 {
    let n = y0.len();
    let d0 = rms_scaled(y0, y0, y0, opts);
    let d1 = rms_scaled(f0, y0, y0, opts);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<f64> = (0..n).map(|i| y0[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    field.eval(t0 + h0, &y1, &mut f1);
    let df: Vec<f64> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = rms_scaled(&df, y0, y0, opts) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(span)
}

fn dopri5(field: &dyn VectorField, u0: &[f64], grid: &[f64], opts: &IvpOptions) -> Result<Solution> {
    const SAFETY: f64 = 0.9;
    const MIN_FACTOR: f64 = 0.2;
    const MAX_FACTOR: f64 = 10.0;

    let n = u0.len();
    let t_end = *grid.last().unwrap();
    let mut t = grid[0];
    let mut y = u0.to_vec();
    let mut k = vec![vec![0.0; n]; 7];
    field.eval(t, &y, &mut k[0]);
    let mut h = initial_step(field, t, &y, &k[0], t_end - t, opts);

    let mut states = Vec::with_capacity(grid.len());
    states.push(y.clone());
    let mut next = 1;
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut steps = 0usize;

    while next < grid.len() {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Solver {
                msg: format!("step budget exhausted at t = {t}"),
                residual: f64::NAN,
            });
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::Divergence { t });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..s {
                    acc += h * A[s][j] * k[j][i];
                }
                stage[i] = acc;
            }
            field.eval(t + C[s] * h, &stage, &mut k[s]);
            if s == 6 {
                y_new.copy_from_slice(&stage);
            }
        }
        for i in 0..n {
            err[i] = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
        }
        let err_norm = rms_scaled(&err, &y, &y_new, opts);
        if err_norm.is_finite() && err_norm <= 1.0 {
            if blown_up(&y_new, opts.blowup) {
                return Err(Error::Divergence { t: t + h });
            }
            let t_new = if last { t_end } else { t + h };
            while next < grid.len() && grid[next] <= t_new {
                let theta = if last && next == grid.len() - 1 { 1.0 } else { (grid[next] - t) / h };
                states.push(dense(&y, &k, h, theta));
                next += 1;
            }
            t = t_new;
            y.copy_from_slice(&y_new);
            // FSAL: the last stage is the derivative at the new point.
            k.swap(0, 6);
            let factor = if err_norm == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            h *= factor;
        } else {
            let factor = if err_norm.is_finite() {
                (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
            } else {
                MIN_FACTOR
            };
            h *= factor;
        }
    }
    Ok(Solution { times: grid.to_vec(), states })
}

fn dense(y: &[f64], k: &[Vec<f64>], h: f64, theta: f64) -> Vec<f64> {
    let powers = [theta, theta * theta, theta.powi(3), theta.powi(4)];
    let weights: Vec<f64> = P
        .iter()
        .map(|row| row.iter().zip(&powers).map(|(p, q)| p * q).sum())
        .collect();
    (0..y.len())
        .map(|i| y[i] + h * (0..7).map(|j| weights[j] * k[j][i]).sum::<f64>())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_weights_at_theta_one_equal_fifth_order_weights() {
        for (i, row) in P.iter().enumerate() {
            let s: f64 = row.iter().sum();
            let b = if i < 6 { A[6][i] } else { 0.0 };
            assert!((s - b).abs() < 1e-14, "row {i}: {s} vs {b}");
        }
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let field = FnField::new(2, |_t, u: &[f64], du: &mut [f64]| {
            du[0] = -u[0];
            du[1] = -u[1];
        });
        for opts in [IvpOptions::default(), IvpOptions::rk4()] {
            let sol = solve_ivp(&field, &[1.0, 1.0], (0.0, 10.0), 101, &opts).unwrap();
            let worst = sol
                .times
                .iter()
                .zip(sol.component(0))
                .map(|(t, u)| (u - (-t).exp()).abs())
                .fold(0.0, f64::max);
            assert!(worst <= 1e-7, "{:?}: max error {worst:e}", opts.method);
        }
    }

    #[test]
    fn blow_up_is_reported_with_time() {
        // u' = u², u(0) = 1 explodes at t = 1.
        let field = FnField::new(1, |_t, u: &[f64], du: &mut [f64]| du[0] = u[0] * u[0]);
        match solve_ivp(&field, &[1.0], (0.0, 2.0), 11, &IvpOptions::default()) {
            Err(Error::Divergence { t }) => assert!(t > 0.9 && t < 1.001, "t = {t}"),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_span() {
        let field = FnField::new(1, |_t, _u: &[f64], du: &mut [f64]| du[0] = 0.0);
        assert!(solve_ivp(&field, &[0.0], (1.0, 1.0), 5, &IvpOptions::default()).is_err());
        assert!(solve_ivp(&field, &[f64::NAN], (0.0, 1.0), 5, &IvpOptions::default()).is_err());
    }
}
