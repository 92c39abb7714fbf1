//! Raster check of the sublevel-set sandwich
//! `F^{-r}_{lambda - s} ⊂ F̂_lambda ⊂ F^{r}_{lambda + s}` with
//! `r = sqrt(d) h` and `s = sqrt(2) sigma N_h h^alpha`.

use crate::error::{Error, Result};
use crate::estimator::{block_average, Bandwidth, BlockField};
use crate::grid::ScalarField;
use crate::metrics::edt::squared_distance_transform;
use crate::metrics::noise::{noise_statistic, NhStatistic};
use crate::signals::SignalSpec;

/// Outcome of one sandwich check.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport {
    pub lambda: f64,
    pub inner_ok: bool,
    pub outer_ok: bool,
    pub nh: NhStatistic,
    pub shift: f64,
    pub calibration_ok: bool,
    /// Raster points of the eroded set outside the estimator's sublevel set.
    pub inner_violations: usize,
    /// Raster points of the estimator's sublevel set outside the dilated set.
    pub outer_violations: usize,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.inner_ok && self.outer_ok
    }
}

/// True signal sampled on the closed raster `{0, 1/No, ..., 1}^d`.
#[derive(Clone, Debug)]
pub struct SandwichRaster {
    spec: SignalSpec,
    oracle_n: usize,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl SandwichRaster {
    pub fn new(spec: &SignalSpec, oracle_n: usize) -> Result<Self> {
        spec.validate()?;
        if oracle_n < 2 {
            return Err(Error::Domain(format!("oracle resolution must be >= 2, got {oracle_n}")));
        }
        let d = spec.dim();
        let side = oracle_n + 1;
        let shape = vec![side; d];
        let total = side.checked_pow(d as u32).ok_or_else(|| Error::Domain("raster too large".into()))?;
        let mut x = vec![0.0; d];
        let values = (0..total)
            .map(|mut i| {
                for a in (0..d).rev() {
                    x[a] = (i % side) as f64 / oracle_n as f64;
                    i /= side;
                }
                spec.eval(&x)
            })
            .collect();
        Ok(SandwichRaster { spec: spec.clone(), oracle_n, shape, values })
    }

    pub fn spec(&self) -> &SignalSpec {
        &self.spec
    }

    pub fn oracle_n(&self) -> usize {
        self.oracle_n
    }

    /// Raster membership of the estimator's sublevel set: a point belongs
    /// to it when some closed block containing it has value `<= lambda`.
    pub fn estimator_mask(&self, est: &BlockField, lambda: f64) -> Vec<bool> {
        let d = self.shape.len();
        let side = self.oracle_n + 1;
        let n = est.source().side();
        let b = est.bandwidth().block();
        let blocks = est.blocks_per_axis();
        // closed blocks containing i / No, 0-based: x in [j h, (j+1) h]
        let candidates: Vec<Vec<usize>> = (0..side)
            .map(|i| {
                let (q, den) = (i * n, self.oracle_n * b);
                let mut c = Vec::with_capacity(2);
                if q % den == 0 {
                    let j = q / den;
                    if j >= 1 {
                        c.push((j - 1).min(blocks - 1));
                    }
                    if j < blocks {
                        c.push(j);
                    }
                } else {
                    c.push((q / den).min(blocks - 1));
                }
                c.dedup();
                c
            })
            .collect();
        let low = crate::estimator::sublevel_mask(est, lambda);
        let mut out = vec![false; self.values.len()];
        let mut idx = vec![0usize; d];
        for (i, o) in out.iter_mut().enumerate() {
            let mut r = i;
            for a in (0..d).rev() {
                idx[a] = r % side;
                r /= side;
            }
            *o = any_block(&candidates, &idx, 0, 0, blocks, &low);
        }
        out
    }

    /// Squared raster distances to the points of `{f <= level}` (`inside`)
    /// or of its complement.
    fn distances(&self, level: f64, inside: bool) -> Vec<f64> {
        let feature: Vec<bool> = self.values.iter().map(|&v| (v <= level) == inside).collect();
        squared_distance_transform(&self.shape, &feature)
    }

    /// Runs the check for one observation field.
    pub fn check(&self, obs: &ScalarField, sigma: f64, bw: Bandwidth, lambda: f64) -> Result<SandwichReport> {
        let grid = obs.grid();
        if grid.dim() != self.shape.len() {
            return Err(Error::DimensionMismatch { expected: self.shape.len(), got: grid.dim() });
        }
        let truth = self.spec.sample_on_grid(grid)?;
        let noise = ScalarField::new(
            grid,
            obs.values().iter().zip(truth.values()).map(|(o, f)| o - f).collect(),
        )?;
        let nh = noise_statistic(&noise, sigma, bw)?;
        let alpha = self.spec.alpha();
        let d = grid.dim();
        let h = bw.h();
        let shift = std::f64::consts::SQRT_2 * sigma * nh.value * h.powf(alpha);
        let est = block_average(obs, bw)?;
        let radius_sq = squared_radius(d, bw.block(), grid.side(), self.oracle_n);

        let mine = self.estimator_mask(&est, lambda);
        let to_outside = self.distances(lambda - shift, false);
        let to_inside = self.distances(lambda + shift, true);
        let mut inner_violations = 0;
        let mut outer_violations = 0;
        for i in 0..mine.len() {
            let eroded = to_outside[i] > radius_sq;
            let dilated = to_inside[i] <= radius_sq;
            if eroded && !mine[i] {
                inner_violations += 1;
            }
            if mine[i] && !dilated {
                outer_violations += 1;
            }
        }
        Ok(SandwichReport {
            lambda,
            inner_ok: inner_violations == 0,
            outer_ok: outer_violations == 0,
            nh,
            shift,
            calibration_ok: bw.satisfies_calibration(d, alpha),
            inner_violations,
            outer_violations,
        })
    }
}

/// `(sqrt(d) h)^2` in raster units, `d (b No / N)^2`, rounded when integral.
fn squared_radius(d: usize, b: usize, n: usize, oracle_n: usize) -> f64 {
    let num = b * oracle_n;
    if num % n == 0 {
        let r = num / n;
        (d * r * r) as f64
    } else {
        let r = num as f64 / n as f64;
        d as f64 * r * r
    }
}

fn any_block(cands: &[Vec<usize>], idx: &[usize], axis: usize, lin: usize, blocks: usize, low: &[bool]) -> bool {
    if axis == idx.len() {
        return low[lin];
    }
    cands[idx[axis]]
        .iter()
        .any(|&j| any_block(cands, idx, axis + 1, lin * blocks + j, blocks, low))
}

/// One-shot version of [`SandwichRaster::check`] that rasterises the signal
/// at `oracle_n` first.
pub fn sandwich_check(
    spec: &SignalSpec,
    obs: &ScalarField,
    sigma: f64,
    bw: Bandwidth,
    lambda: f64,
    oracle_n: usize,
) -> Result<SandwichReport> {
    SandwichRaster::new(spec, oracle_n)?.check(obs, sigma, bw, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::rng::SeedStream;
    use crate::signals::NoiseModel;

    #[test]
    fn noiseless_smooth_signal_is_sandwiched() {
        let spec = SignalSpec::OneDimCos;
        let g = GridSpec::new(1, 40).unwrap();
        let obs = spec.sample_on_grid(g).unwrap();
        let raster = SandwichRaster::new(&spec, 800).unwrap();
        for lambda in [-0.5, -0.1, 0.0, 0.3] {
            let r = raster.check(&obs, 0.0, Bandwidth::new(4, 40).unwrap(), lambda).unwrap();
            assert!(r.holds(), "{r:?}");
            assert_eq!(r.shift, 0.0);
        }
    }

    #[test]
    fn far_below_minimum_is_trivial() {
        let spec = SignalSpec::CosSineDisc;
        let g = GridSpec::new(2, 20).unwrap();
        let obs = NoiseModel::new(0.1).unwrap().add_noise(&spec.sample_on_grid(g).unwrap(), &mut SeedStream::new(1).rng());
        let r = sandwich_check(&spec, &obs, 0.1, Bandwidth::new(4, 20).unwrap(), -50.0, 100).unwrap();
        assert!(r.holds());
        assert_eq!((r.inner_violations, r.outer_violations), (0, 0));
    }

    #[test]
    fn wrong_sigma_breaks_the_sandwich() {
        // claiming sigma = 0 while the observations are noisy drops the shift
        let spec = SignalSpec::OneDimCos;
        let g = GridSpec::new(1, 40).unwrap();
        let obs = NoiseModel::new(0.5).unwrap().add_noise(&spec.sample_on_grid(g).unwrap(), &mut SeedStream::new(2).rng());
        let raster = SandwichRaster::new(&spec, 800).unwrap();
        assert!(raster.check(&obs, 0.0, Bandwidth::new(4, 40).unwrap(), 0.0).is_err());
    }

    #[test]
    fn closed_block_lookup() {
        let spec = SignalSpec::OneDimCos;
        let g = GridSpec::new(1, 4).unwrap();
        let obs = ScalarField::new(g, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let est = block_average(&obs, Bandwidth::new(2, 4).unwrap()).unwrap();
        let raster = SandwichRaster::new(&spec, 4).unwrap();
        // raster 0, 1/4, 1/2, 3/4, 1; the point 1/2 is shared by both blocks
        assert_eq!(raster.estimator_mask(&est, 0.5), vec![true, true, true, false, false]);
    }
}
