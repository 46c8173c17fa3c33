use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numcore::Dataset;
use crate::scalar::Scalar;
use crate::seeds;

/// Adds independent `N(0, std²)` noise to every feature entry; labels are untouched.
pub fn gaussian_noise_inject<T: Scalar>(data: &Dataset<T>, std: f64, seed: u64) -> Result<Dataset<T>> {
    if !(std >= 0.0 && std.is_finite()) {
        return Err(Error::Config(format!("noise std must be >= 0, got {std}")));
    }
    if std == 0.0 {
        return Ok(data.clone());
    }
    let mut rng = seeds::rng(seed);
    let mut out = data.clone();
    for v in out.features_mut().as_mut_slice() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v += T::lit(std * z);
    }
    Ok(out)
}
