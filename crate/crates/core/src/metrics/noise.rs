use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::estimator::Bandwidth;
use crate::grid::ScalarField;

/// Maximal standardised block mean of a noise field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NhStatistic {
    pub value: f64,
    pub h: f64,
    pub d: usize,
    /// Number of sample points per block, `b^d`.
    pub block_points: usize,
    /// Number of complete blocks entering the maximum.
    pub blocks: usize,
}

impl NhStatistic {
    /// `sqrt(2 log(1/h^d))`, the scale of the statistic.
    pub fn scale(&self) -> f64 {
        (2.0 * log_inv_volume(self.h, self.d)).sqrt()
    }
}

fn log_inv_volume(h: f64, d: usize) -> f64 {
    -(d as f64) * h.ln()
}

/// `N_h` for a pure-noise field `noise = sigma * eps`.
///
/// The value is `max_H |mean_H eps| / sqrt(2 log(1/h^d) / b^d)` over the
/// complete blocks `H`. A zero `sigma` requires a zero field and yields 0.
pub fn noise_statistic(noise: &ScalarField, sigma: f64, bw: Bandwidth) -> Result<NhStatistic> {
    let grid = noise.grid();
    if grid.side() != bw.source_side() {
        return Err(Error::DimensionMismatch { expected: bw.source_side(), got: grid.side() });
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    let h = bw.h();
    if h >= 1.0 {
        return Err(Error::Domain(format!("N_h needs h < 1, got h = {h}")));
    }
    let d = grid.dim();
    let b = bw.block();
    let per_axis = bw.complete_blocks_per_axis();
    let block_points = b.pow(d as u32);
    let blocks = per_axis.pow(d as u32);
    let mut stat = NhStatistic { value: 0.0, h, d, block_points, blocks };
    if sigma == 0.0 {
        if noise.values().iter().any(|&v| v != 0.0) {
            return Err(Error::Domain("sigma = 0 but the noise field is not zero".into()));
        }
        return Ok(stat);
    }

    // Separable block sums over complete blocks only.
    let n = grid.side();
    let mut cur = noise.values().to_vec();
    let mut shape = vec![n; d];
    for axis in 0..d {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let len = shape[axis];
        let mut next = vec![0.0; outer * per_axis * inner];
        for o in 0..outer {
            for j in 0..per_axis {
                let dst = (o * per_axis + j) * inner;
                for k in j * b..(j + 1) * b {
                    let src = (o * len + k) * inner;
                    for i in 0..inner {
                        next[dst + i] += cur[src + i];
                    }
                }
            }
        }
        shape[axis] = per_axis;
        cur = next;
    }
    let denom = sigma * (2.0 * log_inv_volume(h, d) / block_points as f64).sqrt();
    stat.value = cur.iter().map(|s| (s / block_points as f64).abs()).fold(0.0, f64::max) / denom;
    Ok(stat)
}

/// Tail bound `2 h^{-d} exp(-t^2 log(1/h^d))` on `P(N_h >= t)`.
pub fn nh_tail_bound(t: f64, h: f64, d: usize) -> f64 {
    let l = log_inv_volume(h, d);
    2.0 * (l - t * t * l).exp()
}

/// Exact CDF of `N_h` under Gaussian noise with `blocks` complete blocks:
/// `P(N_h <= t) = (2 Phi(t c) - 1)^blocks` with `c = sqrt(2 log(1/h^d))`.
pub fn nh_cdf(t: f64, h: f64, d: usize, blocks: usize) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let c = (2.0 * log_inv_volume(h, d)).sqrt();
    // 2 Phi(x) - 1 = erf(x / sqrt 2)
    erf(t * c / std::f64::consts::SQRT_2).powi(blocks as i32)
}
