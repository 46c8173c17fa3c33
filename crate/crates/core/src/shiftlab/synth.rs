use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::GrayImage;
use crate::error::{Error, Result};
use crate::numcore::{Dataset, Matrix};
use crate::scalar::Scalar;
use crate::seeds;

fn blob_split<T: Scalar, R: Rng>(
    n: usize,
    d: usize,
    class_sep: f64,
    mean_shift: f64,
    rng: &mut R,
) -> Result<Dataset<T>> {
    let mut xs = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = i % 2;
        let center = if y == 1 { class_sep / 2.0 } else { -class_sep / 2.0 };
        for j in 0..d {
            let z: f64 = StandardNormal.sample(rng);
            let offset = if j == 0 { center + mean_shift } else { 0.0 };
            xs.push(T::lit(offset + z));
        }
        labels.push(y);
    }
    Dataset::new(Matrix::new(n, d, xs)?, labels, 2)
}

/// Two isotropic unit-variance Gaussian classes with means `±class_sep/2` on the first axis.
///
/// Classes alternate by row, so every split with two or more rows holds both labels.
/// The test split is translated by `test_mean_shift` along the first axis.
pub fn gen_gaussian_blobs<T: Scalar>(
    n_train: usize,
    n_test: usize,
    d: usize,
    class_sep: f64,
    test_mean_shift: f64,
    seed: u64,
) -> Result<(Dataset<T>, Dataset<T>)> {
    if d == 0 {
        return Err(Error::Config("blobs need d >= 1".into()));
    }
    if n_train < 2 || n_test < 2 {
        return Err(Error::Config("blobs need at least 2 rows per split".into()));
    }
    let mut train_rng = seeds::rng(seeds::derive(seed, seeds::stream::DATA, 0));
    let mut test_rng = seeds::rng(seeds::derive(seed, seeds::stream::DATA, 1));
    let train = blob_split(n_train, d, class_sep, 0.0, &mut train_rng)?;
    let test = blob_split(n_test, d, class_sep, test_mean_shift, &mut test_rng)?;
    Ok((train, test))
}

/// A labeled set of square rasters; features are the flattened pixels.
#[derive(Clone, Debug)]
pub struct BarImages<T> {
    pub images: Vec<GrayImage<T>>,
    pub labels: Vec<usize>,
    pub size: usize,
}

impl<T: Scalar> BarImages<T> {
    pub fn to_dataset(&self) -> Result<Dataset<T>> {
        images_to_dataset(&self.images, self.labels.clone(), self.size)
    }
}

pub(crate) fn images_to_dataset<T: Scalar>(
    images: &[GrayImage<T>],
    labels: Vec<usize>,
    size: usize,
) -> Result<Dataset<T>> {
    let mut xs = Vec::with_capacity(images.len() * size * size);
    for im in images {
        xs.extend_from_slice(&im.pixels);
    }
    Dataset::new(Matrix::new(images.len(), size * size, xs)?, labels, 2)
}

/// Horizontal (class 0) and vertical (class 1) bars on a `size × size` grid.
///
/// Each bar is offset by up to one pixel from the center line and gets a little
/// uniform background noise, so rotations move examples across the class boundary.
pub fn gen_bar_images<T: Scalar>(n: usize, size: usize, seed: u64) -> Result<BarImages<T>> {
    if size < 3 {
        return Err(Error::Config("bar images need size >= 3".into()));
    }
    let mut rng = seeds::rng(seeds::derive(seed, seeds::stream::DATA, 2));
    let mid = size / 2;
    let mut images = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = i % 2;
        let line = (mid as i64 + rng.random_range(-1i64..=1)) as usize;
        let mut px = Vec::with_capacity(size * size);
        for r in 0..size {
            for c in 0..size {
                let on = if y == 0 { r == line } else { c == line };
                let noise: f64 = rng.random_range(0.0..0.15);
                px.push(T::lit(if on { 1.0 - noise } else { noise }));
            }
        }
        images.push(GrayImage::new(size, size, px)?);
        labels.push(y);
    }
    Ok(BarImages {
        images,
        labels,
        size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shift_means_identical_generators() {
        let (tr, te) = gen_gaussian_blobs::<f64>(4000, 4000, 2, 3.0, 0.0, 1).unwrap();
        let m_tr = tr.features().column_means();
        let m_te = te.features().column_means();
        for (a, b) in m_tr.iter().zip(&m_te) {
            assert!((a - b).abs() < 0.1);
        }
    }

    #[test]
    fn shift_translates_first_axis() {
        let (tr, te) = gen_gaussian_blobs::<f64>(4000, 4000, 3, 2.0, 1.5, 2).unwrap();
        let d0 = te.features().column_means()[0] - tr.features().column_means()[0];
        assert!((d0 - 1.5).abs() < 0.1);
        let d1 = te.features().column_means()[1] - tr.features().column_means()[1];
        assert!(d1.abs() < 0.1);
    }

    #[test]
    fn both_labels_present() {
        let (tr, te) = gen_gaussian_blobs::<f64>(50, 50, 4, 1.0, 0.0, 3).unwrap();
        assert!(tr.class_counts().iter().all(|&c| c > 0));
        assert!(te.class_counts().iter().all(|&c| c > 0));
        assert!(gen_gaussian_blobs::<f64>(1, 10, 2, 1.0, 0.0, 0).is_err());
        assert!(gen_gaussian_blobs::<f64>(10, 10, 0, 1.0, 0.0, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let a = gen_gaussian_blobs::<f64>(20, 20, 2, 1.0, 0.5, 9).unwrap();
        let b = gen_gaussian_blobs::<f64>(20, 20, 2, 1.0, 0.5, 9).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn bar_images_shape() {
        let bars = gen_bar_images::<f64>(10, 7, 0).unwrap();
        let d = bars.to_dataset().unwrap();
        assert_eq!((d.len(), d.dim()), (10, 49));
        assert_eq!(d.class_counts(), vec![5, 5]);
    }
}
