//! Coverage-weighted polyline rasterization.

use crate::dynsys::Trajectory;
use crate::error::{param_err, Result};

use super::{normalized, ImageKind, RasterImage};

/// Normalize and rasterize in one step.
pub fn render(traj: &Trajectory, res: usize) -> Result<RasterImage> {
    rasterize(&normalized(traj), res)
}

/// Draw the polyline of an already-normalized trajectory.
///
/// Time is mapped onto columns `[0, res-1]` and value `+1 → row 0`,
/// `-1 → row res-1`. Each segment is sampled at the integer positions of its
/// major axis and its intensity split between the two nearest pixels of the
/// minor axis. Overlapping strokes combine by maximum.
pub fn rasterize(traj: &Trajectory, res: usize) -> Result<RasterImage> {
    if res < 2 {
        return param_err(format!("raster resolution must be >= 2, got {res}"));
    }
    traj.validate()?;
    if traj.values.iter().any(|v| v.abs() > 1.0 + 1e-9) {
        return param_err("rasterize expects values normalized to [-1, 1]");
    }
    let mut img = RasterImage::zeros(res, ImageKind::Trajectory);
    let t0 = traj.times[0];
    let span = traj.times[traj.len() - 1] - t0;
    let scale = (res - 1) as f64;
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.values)
        .map(|(&t, &v)| ((t - t0) / span * scale, (1.0 - v.clamp(-1.0, 1.0)) * 0.5 * scale))
        .collect();
    for w in pts.windows(2) {
        draw_segment(&mut img, w[0], w[1]);
    }
    Ok(img)
}

fn plot(img: &mut RasterImage, col: i64, row: i64, v: f64) {
    if v <= 0.0 || col < 0 || row < 0 || col >= img.res as i64 || row >= img.res as i64 {
        return;
    }
    let p = &mut img.pixels[row as usize * img.res + col as usize];
    *p = p.max(v.min(1.0) as f32);
}

fn draw_segment(img: &mut RasterImage, (mut x0, mut y0): (f64, f64), (mut x1, mut y1): (f64, f64)) {
    let steep = (y1 - y0).abs() > (x1 - x0).abs();
    if steep {
        std::mem::swap(&mut x0, &mut y0);
        std::mem::swap(&mut x1, &mut y1);
    }
    if x0 > x1 {
        std::mem::swap(&mut x0, &mut x1);
        std::mem::swap(&mut y0, &mut y1);
    }
    let dx = x1 - x0;
    let gradient = if dx == 0.0 { 0.0 } else { (y1 - y0) / dx };
    let mut put = |major: i64, minor: f64| {
        let base = minor.floor();
        let frac = minor - base;
        let (a, b) = (base as i64, base as i64 + 1);
        if steep {
            plot(img, a, major, 1.0 - frac);
            plot(img, b, major, frac);
        } else {
            plot(img, major, a, 1.0 - frac);
            plot(img, major, b, frac);
        }
    };
    let start = x0.ceil() as i64;
    let end = x1.floor() as i64;
    if start > end {
        // Sub-pixel segment between two pixel centers: nothing to sample.
        return;
    }
    for xi in start..=end {
        put(xi, y0 + gradient * (xi as f64 - x0));
    }
}
