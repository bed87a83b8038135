use crate::error::{Error, Result};
use crate::operators::Grid2D;
use crate::operators::Signal;

/// `‖x − x_true‖² / n`.
pub fn mse(x: &Grid2D, x_true: &Grid2D) -> Result<f64> {
    if !x.same_shape(x_true) {
        return Err(Error::invalid(format!(
            "mse: {} vs {}",
            x.shape_desc(),
            x_true.shape_desc()
        )));
    }
    Ok(x.distance(x_true).powi(2) / x.len() as f64)
}

/// Improvement in SNR, in dB, of `x_hat` over the observation `y`.
pub fn isnr(y: &Grid2D, x_hat: &Grid2D, x_true: &Grid2D) -> Result<f64> {
    if !y.same_shape(x_true) || !x_hat.same_shape(x_true) {
        return Err(Error::invalid("isnr: image shapes differ"));
    }
    Ok(10.0 * (y.distance(x_true).powi(2) / x_hat.distance(x_true).powi(2)).log10())
}
