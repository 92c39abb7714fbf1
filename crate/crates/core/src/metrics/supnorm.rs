use crate::error::{Error, Result};
use crate::estimator::BlockField;
use crate::signals::SignalSpec;

/// `max |f(x) - est(x)|` over the points `k / eval_n`, `k in {1..eval_n}^d`.
///
/// Each point is looked up in the block whose half-open cell contains it.
pub fn sup_norm_error(spec: &SignalSpec, est: &BlockField, eval_n: usize) -> Result<f64> {
    let d = est.dim();
    if spec.dim() != d {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: d });
    }
    let n = est.source().side();
    if eval_n < n {
        return Err(Error::Domain(format!("eval_n = {eval_n} below source resolution {n}")));
    }
    let b = est.bandwidth().block();
    let blocks = est.blocks_per_axis();
    // block of x = k / eval_n is ceil(k n / (eval_n b)), kept in range
    let axis_block: Vec<usize> = (1..=eval_n)
        .map(|k| (k * n).div_ceil(eval_n * b).clamp(1, blocks) - 1)
        .collect();
    let coords: Vec<f64> = (1..=eval_n).map(|k| k as f64 / eval_n as f64).collect();
    let values = est.values();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut worst: f64 = 0.0;
    loop {
        let mut lin = 0;
        for a in 0..d {
            x[a] = coords[idx[a]];
            lin = lin * blocks + axis_block[idx[a]];
        }
        worst = worst.max((spec.eval(&x) - values[lin]).abs());
        let mut a = d;
        loop {
            if a == 0 {
                return Ok(worst);
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < eval_n {
                break;
            }
            idx[a] = 0;
        }
    }
}
