use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::targets::MirroredTarget;

/// One mirrored Langevin step `y <- y + h s(y) + sqrt(2h) xi` for every
/// particle, with noise drawn in row-major order.
pub fn mla_step<R: Rng>(ys: &Array2<f64>, mt: &MirroredTarget, h: f64, rng: &mut R) -> Result<Array2<f64>> {
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::config("stepper.lr", format!("step size must be non-negative, got {h}")));
    }
    let mut out = ys.clone();
    if h == 0.0 {
        return Ok(out);
    }
    let noise = (2.0 * h).sqrt();
    for mut row in out.rows_mut() {
        let s = mt.dual_score(&row.to_vec())?;
        for (v, sv) in row.iter_mut().zip(&s) {
            let xi: f64 = rng.sample(StandardNormal);
            *v += h * sv + noise * xi;
        }
    }
    Ok(out)
}
