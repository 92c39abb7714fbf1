use cubepersist::estimator::{block_average, calibrate_bandwidth, Bandwidth};
use cubepersist::grid::{GridSpec, ScalarField};
use cubepersist::rng::SeedStream;
use cubepersist::signals::NoiseModel;
use cubepersist::SignalSpec;
use proptest::prelude::*;

proptest! {
    #[test]
    fn block_average_is_affine(
        vals in prop::collection::vec(-10.0f64..10.0, 49),
        b in 1usize..=7,
        a in -3.0f64..3.0,
        c in -3.0f64..3.0,
    ) {
        let g = GridSpec::new(2, 7).unwrap();
        let bw = Bandwidth::new(b, 7).unwrap();
        let x = block_average(&ScalarField::new(g, vals.clone()).unwrap(), bw).unwrap();
        let y = block_average(&ScalarField::new(g, vals.iter().map(|v| a * v + c).collect()).unwrap(), bw).unwrap();
        for (p, q) in x.values().iter().zip(y.values()) {
            prop_assert!((a * p + c - q).abs() <= 1e-9);
        }
    }

    #[test]
    fn calibrated_block_stays_in_range(n in 2usize..400, d in 1usize..=3, alpha in 0.05f64..=1.0, pre in 0.001f64..100.0) {
        let bw = calibrate_bandwidth(n, d, alpha, pre).unwrap();
        prop_assert!(bw.block() >= 1 && bw.block() <= n);
    }
}

#[test]
fn block_noise_variance_is_sigma_squared_over_block_size() {
    let spec = SignalSpec::CosSineDisc;
    let n = 60;
    let b = 4;
    let clean = spec.sample_on_grid(GridSpec::new(2, n).unwrap()).unwrap();
    let bw = Bandwidth::new(b, n).unwrap();
    let base = block_average(&clean, bw).unwrap();
    let sigma = 0.3;
    let noise = NoiseModel::new(sigma).unwrap();
    let mut resid = Vec::new();
    for rep in 0..40 {
        let obs = noise.add_noise(&clean, &mut SeedStream::new(8).derive(&[rep]).rng());
        let est = block_average(&obs, bw).unwrap();
        resid.extend(est.values().iter().zip(base.values()).map(|(e, f)| e - f));
    }
    let var = resid.iter().map(|r| r * r).sum::<f64>() / resid.len() as f64;
    let expected = sigma * sigma / (b * b) as f64;
    assert!((var / expected - 1.0).abs() < 0.1, "variance ratio {}", var / expected);
}
