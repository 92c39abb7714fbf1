use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::signals::SignalSpec;

/// KL divergence between the Gaussian observation laws under two signals:
/// `sum_i (f1(x_i) - f0(x_i))^2 / (2 sigma^2)` over the grid.
pub fn kl_product_gaussians(spec1: &SignalSpec, spec0: &SignalSpec, grid: GridSpec, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let f1 = spec1.sample_on_grid(grid)?;
    let f0 = spec0.sample_on_grid(grid)?;
    let ss: f64 = f1.values().iter().zip(f0.values()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(ss / (2.0 * sigma * sigma))
}
