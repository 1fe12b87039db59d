//! Sampling projection: trajectories to fixed-size grids, plus the stochastic
//! view transforms used to build positive pairs.

mod augment;
pub mod io;
mod raster;
mod stft;

use serde::{Deserialize, Serialize};

use crate::dynsys::Trajectory;

pub use augment::{augment, augment_with, AugmentParams, CROP_RANGE, SIGMA_RANGE};
pub use raster::{rasterize, render};
pub use stft::{spectrogram, stft_magnitude, StftParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageKind {
    Trajectory,
    Spectrogram,
}

impl ImageKind {
    pub fn code(self) -> u8 {
        match self {
            ImageKind::Trajectory => 0,
            ImageKind::Spectrogram => 1,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(ImageKind::Trajectory),
            1 => Some(ImageKind::Spectrogram),
            _ => None,
        }
    }
}

/// `res × res` grayscale grid with intensities in `[0, 1]`, row-major, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    pub res: usize,
    pub pixels: Vec<f32>,
    pub kind: ImageKind,
}

impl RasterImage {
    pub fn zeros(res: usize, kind: ImageKind) -> Self {
        Self { res, pixels: vec![0.0; res * res], kind }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.pixels[row * self.res + col]
    }

    /// Flattened length `S = res²`.
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPair {
    pub view_a: RasterImage,
    pub view_b: RasterImage,
    pub source_id: u64,
}

/// Affine map of `values` onto `[-1, 1]`; constant input maps to zeros.
pub fn normalize(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if values.is_empty() || !(hi > lo) {
        return vec![0.0; values.len()];
    }
    let span = hi - lo;
    values
        .iter()
        .map(|&v| {
            if v == lo {
                -1.0
            } else if v == hi {
                1.0
            } else {
                2.0 * (v - lo) / span - 1.0
            }
        })
        .collect()
}

/// A copy of `traj` with normalized values.
pub fn normalized(traj: &Trajectory) -> Trajectory {
    Trajectory { values: normalize(&traj.values), ..traj.clone() }
}

/// How trajectories are registered before encoding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegistrationSpec {
    pub res: usize,
    pub spectrogram: bool,
    pub stft: StftParams,
}

impl Default for RegistrationSpec {
    fn default() -> Self {
        Self { res: 64, spectrogram: false, stft: StftParams::default() }
    }
}

impl RegistrationSpec {
    pub fn register(&self, traj: &Trajectory) -> crate::Result<RasterImage> {
        if self.spectrogram {
            spectrogram(&normalized(traj), self.res, self.stft.window, self.stft.hop)
        } else {
            render(traj, self.res)
        }
    }
}
