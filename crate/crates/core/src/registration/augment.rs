//! Random crop (resized back to full size) followed by Gaussian blur.

use rand::Rng;

use super::RasterImage;

/// Crop side as a fraction of the image side.
pub const CROP_RANGE: (f64, f64) = (0.8, 1.0);
/// Blur standard deviation in pixels.
pub const SIGMA_RANGE: (f64, f64) = (0.1, 1.5);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentParams {
    pub crop_frac: f64,
    /// Top-left corner of the crop window, in pixel units.
    pub crop_row: f64,
    pub crop_col: f64,
    pub sigma: f64,
}

impl AugmentParams {
    pub fn identity() -> Self {
        Self { crop_frac: 1.0, crop_row: 0.0, crop_col: 0.0, sigma: 0.0 }
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R, res: usize) -> Self {
        let crop_frac = rng.random_range(CROP_RANGE.0..=CROP_RANGE.1);
        let slack = (1.0 - crop_frac) * (res - 1) as f64;
        let crop_row = rng.random_range(0.0..=slack);
        let crop_col = rng.random_range(0.0..=slack);
        let sigma = rng.random_range(SIGMA_RANGE.0..=SIGMA_RANGE.1);
        Self { crop_frac, crop_row, crop_col, sigma }
    }
}

pub fn augment<R: Rng + ?Sized>(img: &RasterImage, rng: &mut R) -> RasterImage {
    augment_with(img, &AugmentParams::sample(rng, img.res))
}

pub fn augment_with(img: &RasterImage, p: &AugmentParams) -> RasterImage {
    let cropped = crop_resize(img, p);
    let mut out = blur(&cropped, p.sigma);
    for v in &mut out.pixels {
        *v = v.clamp(0.0, 1.0);
    }
    out
}

fn crop_resize(img: &RasterImage, p: &AugmentParams) -> RasterImage {
    let n = img.res;
    if p.crop_frac >= 1.0 && p.crop_row == 0.0 && p.crop_col == 0.0 {
        return img.clone();
    }
    let step = p.crop_frac;
    let last = (n - 1) as f64;
    let taps = |offset: f64| -> Vec<(usize, usize, f64)> {
        (0..n)
            .map(|i| {
                let x = (offset + i as f64 * step).clamp(0.0, last);
                let x0 = x.floor() as usize;
                (x0, (x0 + 1).min(n - 1), x - x0 as f64)
            })
            .collect()
    };
    let (rows, cols) = (taps(p.crop_row), taps(p.crop_col));
    let mut out = RasterImage::zeros(n, img.kind);
    for (r, &(y0, y1, ty)) in rows.iter().enumerate() {
        let (a, b) = (&img.pixels[y0 * n..(y0 + 1) * n], &img.pixels[y1 * n..(y1 + 1) * n]);
        for (c, &(x0, x1, tx)) in cols.iter().enumerate() {
            let top = a[x0] as f64 * (1.0 - tx) + a[x1] as f64 * tx;
            let bot = b[x0] as f64 * (1.0 - tx) + b[x1] as f64 * tx;
            out.pixels[r * n + c] = (top * (1.0 - ty) + bot * ty) as f32;
        }
    }
    out
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let w: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Separable blur with replicated borders, so constant images stay constant.
fn blur(img: &RasterImage, sigma: f64) -> RasterImage {
    let k = gaussian_kernel(sigma);
    if k.len() == 1 {
        return img.clone();
    }
    let n = img.res;
    let r = k.len() / 2;
    // Horizontal pass over rows padded with replicated borders.
    let mut padded = vec![0f64; n + 2 * r];
    let mut tmp = vec![0f64; n * n];
    for row in 0..n {
        let src = &img.pixels[row * n..(row + 1) * n];
        for (i, v) in padded.iter_mut().enumerate() {
            *v = src[i.saturating_sub(r).min(n - 1)] as f64;
        }
        for (col, t) in tmp[row * n..(row + 1) * n].iter_mut().enumerate() {
            *t = k.iter().zip(&padded[col..col + k.len()]).map(|(w, v)| w * v).sum();
        }
    }
    // Vertical pass as weighted sums of whole rows.
    let mut acc = vec![0f64; n];
    let mut out = RasterImage::zeros(n, img.kind);
    for row in 0..n {
        acc.fill(0.0);
        for (j, w) in k.iter().enumerate() {
            let src = (row + j).saturating_sub(r).min(n - 1);
            for (a, v) in acc.iter_mut().zip(&tmp[src * n..(src + 1) * n]) {
                *a += w * v;
            }
        }
        for (o, a) in out.pixels[row * n..(row + 1) * n].iter_mut().zip(&acc) {
            *o = *a as f32;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registration::ImageKind;
    use crate::rng;

    fn random_image(seed: u64, res: usize) -> RasterImage {
        let mut s = rng::stream(seed);
        RasterImage {
            res,
            pixels: (0..res * res).map(|_| s.random_range(0.0..1.0)).collect(),
            kind: ImageKind::Trajectory,
        }
    }

    #[test]
    fn identity_limits() {
        let img = random_image(1, 16);
        let out = augment_with(&img, &AugmentParams { sigma: 1e-4, ..AugmentParams::identity() });
        for (a, b) in img.pixels.iter().zip(&out.pixels) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn constants_are_preserved() {
        let img = RasterImage { res: 12, pixels: vec![0.37; 144], kind: ImageKind::Trajectory };
        let mut s = rng::stream(5);
        for _ in 0..10 {
            let out = augment(&img, &mut s);
            assert!(out.pixels.iter().all(|v| (v - 0.37).abs() < 1e-6));
        }
    }

    #[test]
    fn same_stream_same_output() {
        let img = random_image(2, 20);
        let a = augment(&img, &mut rng::stream(9));
        let b = augment(&img, &mut rng::stream(9));
        assert_eq!(a, b);
        let c = augment(&img, &mut rng::stream(10));
        assert_ne!(a, c);
    }

    #[test]
    fn preserves_size_and_range() {
        let img = random_image(3, 17);
        let mut s = rng::stream(0);
        for _ in 0..20 {
            let out = augment(&img, &mut s);
            assert_eq!(out.res, 17);
            assert!(out.pixels.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn sampled_parameters_stay_in_range() {
        let mut s = rng::stream(4);
        for _ in 0..200 {
            let p = AugmentParams::sample(&mut s, 64);
            assert!((CROP_RANGE.0..=CROP_RANGE.1).contains(&p.crop_frac));
            assert!((SIGMA_RANGE.0..=SIGMA_RANGE.1).contains(&p.sigma));
            let slack = (1.0 - p.crop_frac) * 63.0;
            assert!(p.crop_row <= slack + 1e-12 && p.crop_col <= slack + 1e-12);
        }
    }
}
