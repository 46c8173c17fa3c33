use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;
use crate::seeds;

/// Row-major grayscale raster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrayImage<T> {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<T>,
}

impl<T: Scalar> GrayImage<T> {
    pub fn new(width: usize, height: usize, pixels: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config("image has a zero dimension".into()));
        }
        check_len("image pixels", width * height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.pixels[y * self.width + x]
    }

    /// Pixel value, or zero outside the frame.
    #[inline]
    fn get_or_zero(&self, x: i64, y: i64) -> T {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            T::zero()
        } else {
            self.get(x as usize, y as usize)
        }
    }

    fn bilinear(&self, x: f64, y: f64) -> T {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = T::lit(x - x0);
        let fy = T::lit(y - y0);
        let (xi, yi) = (x0 as i64, y0 as i64);
        let one = T::one();
        self.get_or_zero(xi, yi) * (one - fx) * (one - fy)
            + self.get_or_zero(xi + 1, yi) * fx * (one - fy)
            + self.get_or_zero(xi, yi + 1) * (one - fx) * fy
            + self.get_or_zero(xi + 1, yi + 1) * fx * fy
    }
}

/// Snaps coordinates that land within rounding noise of a grid point.
#[inline]
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r
    } else {
        v
    }
}

/// Rotates counter-clockwise about the image center by `degrees`.
///
/// Bilinear interpolation; source positions outside the frame read as 0.
pub fn rotate_single<T: Scalar>(image: &GrayImage<T>, degrees: f64) -> GrayImage<T> {
    if degrees == 0.0 {
        return image.clone();
    }
    let (sin, cos) = degrees.to_radians().sin_cos();
    let cx = (image.width as f64 - 1.0) / 2.0;
    let cy = (image.height as f64 - 1.0) / 2.0;
    let mut pixels = Vec::with_capacity(image.pixels.len());
    for y in 0..image.height {
        for x in 0..image.width {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            // inverse map: output pixel pulls from the source rotated by −θ
            let sx = snap(cx + cos * dx + sin * dy);
            let sy = snap(cy - sin * dx + cos * dy);
            pixels.push(image.bilinear(sx, sy));
        }
    }
    GrayImage {
        width: image.width,
        height: image.height,
        pixels,
    }
}

#[derive(Clone, Debug)]
pub struct RotationOutcome<T> {
    pub images: Vec<GrayImage<T>>,
    pub angles_deg: Vec<f64>,
}

/// Rotates each image by its own angle `180°·u`, `u ~ Beta(a, b)` i.i.d.
pub fn beta_rotation_shift<T: Scalar>(
    images: &[GrayImage<T>],
    a: f64,
    b: f64,
    seed: u64,
) -> Result<RotationOutcome<T>> {
    let beta = Beta::new(a, b)
        .map_err(|e| Error::Config(format!("invalid Beta({a}, {b}) parameters: {e}")))?;
    if images.iter().any(|im| im.width == 0 || im.height == 0) {
        return Err(Error::Config("image has a zero dimension".into()));
    }
    let mut rng = seeds::rng(seed);
    let angles_deg: Vec<f64> = images.iter().map(|_| 180.0 * beta.sample(&mut rng)).collect();
    let images = images
        .iter()
        .zip(&angles_deg)
        .map(|(im, &deg)| rotate_single(im, deg))
        .collect();
    Ok(RotationOutcome { images, angles_deg })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> GrayImage<f64> {
        GrayImage::new(w, h, (0..w * h).map(|i| (i % 7) as f64 / 6.0).collect()).unwrap()
    }

    #[test]
    fn zero_rotation_is_identity() {
        let im = ramp(6, 4);
        assert_eq!(rotate_single(&im, 0.0), im);
    }

    #[test]
    fn quarter_turns_compose() {
        let im = ramp(7, 7);
        let twice = rotate_single(&rotate_single(&im, 90.0), 90.0);
        let half = rotate_single(&im, 180.0);
        for (a, b) in twice.pixels.iter().zip(&half.pixels) {
            assert!((a - b).abs() < 1e-6);
        }
        // 180° on an odd grid is the point reflection through the center pixel
        for y in 0..7 {
            for x in 0..7 {
                assert!((half.get(x, y) - im.get(6 - x, 6 - y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quarter_turn_moves_pixels_counter_clockwise() {
        let mut px = vec![0.0; 9];
        px[5] = 1.0; // (x=2, y=1), right of center
        let im = GrayImage::new(3, 3, px).unwrap();
        let r = rotate_single(&im, 90.0);
        let lit: Vec<usize> = (0..9).filter(|&i| r.pixels[i] > 0.5).collect();
        assert_eq!(lit.len(), 1);
        assert!(lit[0] == 1 || lit[0] == 7);
    }

    #[test]
    fn beta_angles_have_expected_mean() {
        let im = vec![GrayImage::new(1, 1, vec![1.0f64]).unwrap(); 100_000];
        let out = beta_rotation_shift(&im, 2.0, 4.0, 17).unwrap();
        let mean = out.angles_deg.iter().sum::<f64>() / out.angles_deg.len() as f64;
        assert!((mean - 60.0).abs() < 0.5, "mean={mean}");
        let again = beta_rotation_shift(&im[..10], 2.0, 4.0, 17).unwrap();
        assert_eq!(again.angles_deg[..], out.angles_deg[..10]);
    }

    #[test]
    fn rotation_preserves_shape_and_range() {
        let ims: Vec<_> = (0..20).map(|_| ramp(9, 5)).collect();
        let out = beta_rotation_shift(&ims, 2.0, 5.0, 1).unwrap();
        assert_eq!(out.images.len(), 20);
        for im in &out.images {
            assert_eq!((im.width, im.height, im.pixels.len()), (9, 5, 45));
            assert!(im.pixels.iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
        }
    }

    #[test]
    fn zero_sized_image_is_rejected() {
        assert!(GrayImage::<f64>::new(0, 3, vec![]).is_err());
        let bad = GrayImage::<f64> {
            width: 0,
            height: 0,
            pixels: vec![],
        };
        assert!(beta_rotation_shift(&[bad], 2.0, 4.0, 0).is_err());
    }
}
