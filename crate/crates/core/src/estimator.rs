//! Histogram (block-average) estimator of the signal.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{read_cpf, write_cpf, CpfHeader, GridSpec, ScalarField};

/// Block side `b` in samples for a grid of `N` samples per axis; `h = b / N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bandwidth {
    block: usize,
    n: usize,
}

impl Bandwidth {
    pub fn new(block: usize, n: usize) -> Result<Self> {
        if block < 1 || block > n {
            return Err(Error::Domain(format!("block size must lie in 1..={n}, got {block}")));
        }
        Ok(Bandwidth { block, n })
    }

    pub fn block(&self) -> usize {
        self.block
    }

    /// Samples per axis of the grid this bandwidth was built for.
    pub fn source_side(&self) -> usize {
        self.n
    }

    /// Side length `h = b / N`.
    pub fn h(&self) -> f64 {
        self.block as f64 / self.n as f64
    }

    pub fn blocks_per_axis(&self) -> usize {
        self.n.div_ceil(self.block)
    }

    /// Blocks per axis that hold a full `b` samples.
    pub fn complete_blocks_per_axis(&self) -> usize {
        self.n / self.block
    }

    /// The calibration condition `h^alpha > sqrt(log(1/h^d) / b^d)`.
    pub fn satisfies_calibration(&self, d: usize, alpha: f64) -> bool {
        let h = self.h();
        let count = (self.block as f64).powi(d as i32);
        h.powf(alpha) > ((1.0 / h.powi(d as i32)).ln() / count).sqrt()
    }
}

/// Block side from `h* = prefactor * (ln n / n)^(1 / (d + 2 alpha))`, `n = N^d`,
/// as `b = round(N h*)` clamped into `1..=N`.
pub fn calibrate_bandwidth(n: usize, d: usize, alpha: f64, prefactor: f64) -> Result<Bandwidth> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(prefactor > 0.0) || !prefactor.is_finite() {
        return Err(Error::Domain(format!("prefactor must be positive, got {prefactor}")));
    }
    let h = target_h(n, d, alpha, prefactor);
    let b = (n as f64 * h).round().clamp(1.0, n as f64) as usize;
    Bandwidth::new(b, n)
}

/// Unrounded target side length `h*`.
pub fn target_h(n: usize, d: usize, alpha: f64, prefactor: f64) -> f64 {
    let total = (n as f64).powi(d as i32);
    prefactor * (total.ln() / total).powf(1.0 / (d as f64 + 2.0 * alpha))
}

/// Smallest block side dividing `N` whose bandwidth satisfies the calibration
/// condition, if any.
pub fn smallest_calibrated_divisor(n: usize, d: usize, alpha: f64) -> Option<Bandwidth> {
    (1..n)
        .filter(|b| n % b == 0)
        .map(|b| Bandwidth::new(b, n).unwrap())
        .find(|bw| bw.satisfies_calibration(d, alpha))
}

/// Block means of an observed field. Blocks along the far edge are truncated
/// when `b` does not divide `N` and average over the samples they hold.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockField {
    source: GridSpec,
    bandwidth: Bandwidth,
    values: Vec<f64>,
}

impl BlockField {
    pub fn source(&self) -> GridSpec {
        self.source
    }

    pub fn bandwidth(&self) -> Bandwidth {
        self.bandwidth
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn blocks_per_axis(&self) -> usize {
        self.bandwidth.blocks_per_axis()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Zero-based block index holding the sample with one-based index `k`.
    pub fn block_of_sample(&self, k: &[usize]) -> Vec<usize> {
        k.iter().map(|&kj| (kj - 1) / self.bandwidth.block).collect()
    }

    /// Row-major position of a zero-based block index.
    pub fn block_linear(&self, idx: &[usize]) -> usize {
        let m = self.blocks_per_axis();
        idx.iter().fold(0, |acc, &i| acc * m + i)
    }

    /// Zero-based block index covering `x` along one axis: block `J` (1-based)
    /// covers `((J-1) b / N, J b / N]`, and 0 goes to the first block.
    pub fn axis_block(&self, x: f64) -> usize {
        let t = x * self.bandwidth.n as f64 / self.bandwidth.block as f64;
        (t.ceil() as usize).clamp(1, self.blocks_per_axis()) - 1
    }

    /// Estimator value at a point of `[0,1]^d`.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let idx: Vec<usize> = x.iter().map(|&xj| self.axis_block(xj)).collect();
        self.values[self.block_linear(&idx)]
    }

    /// As a plain field on a `blocks_per_axis^d` grid.
    pub fn to_field(&self) -> Result<ScalarField> {
        ScalarField::new(GridSpec::new(self.dim(), self.blocks_per_axis())?, self.values.clone())
    }

    pub fn write_cpf(&self, path: &Path) -> Result<()> {
        let mut header = CpfHeader::plain(self.dim(), self.blocks_per_axis());
        header.block = Some(self.bandwidth.block);
        header.source_n = Some(self.bandwidth.n);
        write_cpf(path, &header, &self.values)
    }

    pub fn read_cpf(path: &Path) -> Result<Self> {
        let (header, values) = read_cpf(path)?;
        let (Some(block), Some(source_n)) = (header.block, header.source_n) else {
            return Err(Error::Parse("block field sidecar must record block and source_n".into()));
        };
        let bandwidth = Bandwidth::new(block, source_n)?;
        if bandwidth.blocks_per_axis() != header.n {
            return Err(Error::Parse("block count disagrees with block and source_n".into()));
        }
        crate::grid::check_finite(&values)?;
        Ok(BlockField { source: GridSpec::new(header.d, source_n)?, bandwidth, values })
    }
}

/// Averages `obs` over the blocks of `bw`.
pub fn block_average(obs: &ScalarField, bw: Bandwidth) -> Result<BlockField> {
    let grid = obs.grid();
    if bw.n != grid.side() {
        return Err(Error::Domain(format!(
            "bandwidth built for N = {}, field has N = {}",
            bw.n,
            grid.side()
        )));
    }
    let d = grid.dim();
    let m = bw.blocks_per_axis();
    let nblocks = m.pow(d as u32);
    let mut sums = vec![0.0; nblocks];
    let mut counts = vec![0usize; nblocks];
    // block index along each axis, precomputed
    let axis_block: Vec<usize> = (0..grid.side()).map(|i| i / bw.block).collect();
    let mut k = vec![0usize; d];
    for &v in obs.values() {
        let lin = k.iter().fold(0, |acc, &i| acc * m + axis_block[i]);
        sums[lin] += v;
        counts[lin] += 1;
        for j in (0..d).rev() {
            k[j] += 1;
            if k[j] < grid.side() {
                break;
            }
            k[j] = 0;
        }
    }
    let values = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    Ok(BlockField { source: grid, bandwidth: bw, values })
}

/// `mask[J] = value[J] <= lambda`: the blocks whose closed union is the
/// estimated sublevel set.
pub fn sublevel_mask(est: &BlockField, lambda: f64) -> Vec<bool> {
    est.values.iter().map(|&v| v <= lambda).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn calibration_examples() {
        let bw = calibrate_bandwidth(50, 2, 1.0, 0.25).unwrap();
        assert!((target_h(50, 2, 1.0, 0.25) - 0.0591).abs() < 1e-4);
        assert_eq!(bw.block(), 3);
        assert!((bw.h() - 0.06).abs() < 1e-15);
        assert_eq!(calibrate_bandwidth(10, 2, 1.0, 1e9).unwrap().block(), 10);
        assert_eq!(calibrate_bandwidth(100, 2, 1.0, 1e-9).unwrap().block(), 1);
    }

    #[test]
    fn calibration_rejects_bad_parameters() {
        assert!(calibrate_bandwidth(50, 2, 0.0, 0.25).is_err());
        assert!(calibrate_bandwidth(50, 2, 1.5, 0.25).is_err());
        assert!(calibrate_bandwidth(50, 2, 1.0, -1.0).is_err());
    }

    #[test]
    fn block_average_one_dim() {
        let g = GridSpec::new(1, 4).unwrap();
        let f = ScalarField::new(g, vec![1.0, 3.0, 5.0, 7.0]).unwrap();
        let est = block_average(&f, Bandwidth::new(2, 4).unwrap()).unwrap();
        assert_eq!(est.values(), &[2.0, 6.0]);
        assert_eq!(sublevel_mask(&est, 4.0), vec![true, false]);
        assert_eq!(sublevel_mask(&est, f64::INFINITY), vec![true, true]);
        assert_eq!(sublevel_mask(&est, 1.0), vec![false, false]);
    }

    #[test]
    fn unit_block_is_identity() {
        let g = GridSpec::new(2, 5).unwrap();
        let f = ScalarField::new(g, (0..25).map(|i| (i as f64).sqrt()).collect()).unwrap();
        let est = block_average(&f, Bandwidth::new(1, 5).unwrap()).unwrap();
        assert_eq!(est.values(), f.values());
    }

    #[test]
    fn truncated_blocks_average_their_own_points() {
        // 4x4 grid, b = 3: blocks hold 9, 3, 3 and 1 samples
        let g = GridSpec::new(2, 4).unwrap();
        let vals: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let f = ScalarField::new(g, vals.clone()).unwrap();
        let est = block_average(&f, Bandwidth::new(3, 4).unwrap()).unwrap();
        assert_eq!(est.blocks_per_axis(), 2);
        let mean = |idx: &[usize]| idx.iter().map(|&i| vals[i]).sum::<f64>() / idx.len() as f64;
        assert_eq!(est.values()[0], mean(&[0, 1, 2, 4, 5, 6, 8, 9, 10]));
        assert_eq!(est.values()[1], mean(&[3, 7, 11]));
        assert_eq!(est.values()[2], mean(&[12, 13, 14]));
        assert_eq!(est.values()[3], 15.0);
    }

    #[test]
    fn mismatched_bandwidth_is_rejected() {
        let g = GridSpec::new(1, 4).unwrap();
        let f = ScalarField::new(g, vec![0.0; 4]).unwrap();
        assert!(block_average(&f, Bandwidth::new(2, 6).unwrap()).is_err());
        assert!(Bandwidth::new(0, 4).is_err());
        assert!(Bandwidth::new(5, 4).is_err());
    }

    #[test]
    fn point_lookup_uses_half_open_blocks() {
        let g = GridSpec::new(1, 6).unwrap();
        let f = ScalarField::new(g, vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0]).unwrap();
        let est = block_average(&f, Bandwidth::new(2, 6).unwrap()).unwrap();
        assert_eq!(est.value_at(&[0.0]), 0.0);
        assert_eq!(est.value_at(&[1.0 / 3.0]), 0.0);
        assert_eq!(est.value_at(&[0.34]), 1.0);
        assert_eq!(est.value_at(&[1.0]), 2.0);
    }

    #[test]
    fn block_field_cpf_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.cpf");
        let g = GridSpec::new(2, 7).unwrap();
        let f = ScalarField::new(g, (0..49).map(|i| i as f64).collect()).unwrap();
        let est = block_average(&f, Bandwidth::new(3, 7).unwrap()).unwrap();
        est.write_cpf(&path).unwrap();
        assert_eq!(BlockField::read_cpf(&path).unwrap(), est);
    }

    proptest! {
        #[test]
        fn masks_are_monotone_in_lambda(
            vals in proptest::collection::vec(-5.0f64..5.0, 36),
            b in 1usize..7,
            l1 in -6.0f64..6.0,
            l2 in -6.0f64..6.0,
        ) {
            let f = ScalarField::new(GridSpec::new(2, 6).unwrap(), vals).unwrap();
            let est = block_average(&f, Bandwidth::new(b, 6).unwrap()).unwrap();
            let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
            let (a, c) = (sublevel_mask(&est, lo), sublevel_mask(&est, hi));
            prop_assert!(a.iter().zip(&c).all(|(x, y)| !x || *y));
        }

        #[test]
        fn block_average_is_affine(
            vals in proptest::collection::vec(-5.0f64..5.0, 25),
            b in 1usize..6,
            scale in -3.0f64..3.0,
            shift in -3.0f64..3.0,
        ) {
            let f = ScalarField::new(GridSpec::new(2, 5).unwrap(), vals).unwrap();
            let bw = Bandwidth::new(b, 5).unwrap();
            let direct = block_average(&f.map(|v| scale * v + shift).unwrap(), bw).unwrap();
            let after = block_average(&f, bw).unwrap();
            for (x, y) in direct.values().iter().zip(after.values()) {
                prop_assert!((x - (scale * y + shift)).abs() < 1e-12);
            }
        }
    }
}
