use super::*;
use crate::metrics::bottleneck;
use crate::rng::SeedStream;
use rand::Rng;

fn bump(m: usize) -> SignalSpec {
    SignalSpec::LowerBoundBump { bound: 1.0, lipschitz: 1.0, alpha: 1.0, dim: 1, h: 0.1, m }
}

fn base() -> SignalSpec {
    SignalSpec::LowerBoundBase { bound: 1.0, lipschitz: 1.0, alpha: 1.0, dim: 1 }
}

#[test]
fn frozen_layout_matches_generator() {
    let mut rng = SeedStream::new(DEFAULT_LAYOUT_SEED).rng();
    let discs = random_disc_layout(8, DEFAULT_RADIUS_RANGE, DEFAULT_MIN_GAP, &mut rng).unwrap();
    assert_eq!(discs, DEFAULT_DISC_LAYOUT.to_vec());
    SignalSpec::default_disc_bumps(1.0).validate().unwrap();
}

#[test]
fn eval_examples() {
    let spec = SignalSpec::default_disc_bumps(1.0);
    for (i, d) in DEFAULT_DISC_LAYOUT.iter().enumerate() {
        let expected = if (i + 1) % 2 == 0 { 2.0 } else { -2.0 };
        assert_eq!(spec.eval_exact(&d.center).unwrap(), expected);
    }
    assert_eq!(base().eval_exact(&[0.5]).unwrap(), 0.25);
    assert_eq!(SignalSpec::OneDimCos.eval_exact(&[0.0]).unwrap(), 0.0);
    assert!(matches!(
        SignalSpec::OneDimCos.eval_exact(&[0.0, 1.0]),
        Err(Error::DimensionMismatch { expected: 1, got: 2 })
    ));
}

#[test]
fn disc_boundaries_take_the_lower_limit() {
    let spec = SignalSpec::DiscBumps { discs: vec![Disc::new(0.25, 0.25, 0.125), Disc::new(0.75, 0.75, 0.125)], alpha: 0.5 };
    // exactly representable boundary points
    let neg = spec.eval(&[0.25, 0.375]);
    let pos = spec.eval(&[0.75, 0.875]);
    assert_eq!(neg, -1.0);
    assert_eq!(pos, 0.0);
    for (c, sign) in [((0.25, 0.25), -1.0), ((0.75, 0.75), 1.0)] {
        for k in 0..16 {
            let t = k as f64 * std::f64::consts::PI / 8.0;
            let at = |r: f64| spec.eval(&[c.0 + r * t.cos(), c.1 + r * t.sin()]);
            let inside = at(0.125 * (1.0 - 1e-9));
            let outside = at(0.125 * (1.0 + 1e-9));
            assert!((inside - sign).abs() < 1e-6);
            assert_eq!(outside, 0.0);
        }
    }
}

#[test]
fn nested_boundaries_take_the_lower_limit() {
    let spec = SignalSpec::NestedDiscs { center: [0.5, 0.5], radii: vec![0.125, 0.25, 0.375], alpha: 1.0 };
    // piece values just inside / just outside each radius
    // r1: -1 | +0.5 ; r2: +1 | -2/3 ; r3: -1 | 0.375
    let at = |r: f64| spec.eval(&[0.5 + r, 0.5]);
    assert_eq!(at(0.125), -1.0);
    assert_eq!(at(0.25), -(0.25f64 / 0.375));
    assert_eq!(at(0.375), -1.0);
    assert!((at(0.125 + 1e-12) - 0.5).abs() < 1e-9);
    assert!((at(0.25 - 1e-12) - 1.0).abs() < 1e-9);
    assert!((at(0.375 + 1e-12) - 0.375).abs() < 1e-9);
    assert_eq!(at(0.0), 0.0);
}

#[test]
fn values_respect_sup_bounds() {
    let specs = [
        SignalSpec::default_disc_bumps(1.0),
        SignalSpec::default_disc_bumps(0.5),
        SignalSpec::default_nested_discs(1.0),
        SignalSpec::default_nested_discs(0.5),
        SignalSpec::LowerBoundBase { bound: 1.0, lipschitz: 2.0, alpha: 0.5, dim: 2 },
        SignalSpec::LowerBoundBump { bound: 1.0, lipschitz: 2.0, alpha: 0.5, dim: 2, h: 0.1, m: 4 },
        SignalSpec::CosSineDisc,
        SignalSpec::OneDimCos,
    ];
    let mut rng = SeedStream::new(5).rng();
    for spec in &specs {
        let m = spec.sup_bound();
        for _ in 0..100_000 {
            let x: Vec<f64> = (0..spec.dim()).map(|_| rng.random::<f64>()).collect();
            let v = spec.eval(&x);
            assert!(v.abs() <= m + 1e-12, "{spec:?} at {x:?} = {v}");
        }
    }
}

#[test]
fn sampling_examples() {
    let f = base().sample_on_grid(GridSpec::new(1, 4).unwrap()).unwrap();
    assert_eq!(f.values(), &[0.125, 0.25, 0.375, 0.5]);

    let g = GridSpec::new(2, 2).unwrap();
    let f = SignalSpec::CosSineDisc.sample_on_grid(g).unwrap();
    for (i, v) in f.values().iter().enumerate() {
        assert_eq!(*v, SignalSpec::CosSineDisc.eval_exact(&g.point_at(i)).unwrap());
    }

    let f = SignalSpec::CosSineDisc.sample_on_grid(GridSpec::new(2, 50).unwrap()).unwrap();
    // indicator disc of radius sqrt(1/8) around the centre
    assert!(f.get(&[25, 25]).unwrap() > 0.5);
    assert!(f.get(&[1, 25]).unwrap().abs() <= 0.5);
    assert!(SignalSpec::CosSineDisc.sample_on_grid(GridSpec::new(1, 5).unwrap()).is_err());
}

#[test]
fn noise_examples() {
    let g = GridSpec::new(2, 500).unwrap();
    let f = SignalSpec::CosSineDisc.sample_on_grid(g).unwrap();
    let stream = SeedStream::new(11);

    let same = NoiseModel::new(0.0).unwrap().add_noise(&f, &mut stream.rng());
    assert_eq!(same, f);

    let noise = NoiseModel::new(0.1).unwrap();
    let a = noise.add_noise(&f, &mut stream.rng());
    let b = add_noise(&f, noise, &mut stream.rng());
    assert_eq!(a, b);

    let diffs: Vec<f64> = a.values().iter().zip(f.values()).map(|(x, y)| x - y).collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let tol = 3.0 / (2.0 * n).sqrt() * 0.1;
    assert!((sd - 0.1).abs() < tol, "sd = {sd}, tol = {tol}");
    assert!(NoiseModel::new(-1.0).is_err());
    assert!(NoiseModel::new(f64::NAN).is_err());
}

#[test]
fn closed_form_diagrams() {
    let d0 = base().true_diagram_closed_form().unwrap();
    assert_eq!(d0.points(), &[DiagramPoint::new(0, 0.0, f64::INFINITY)]);

    let d = bump(5).true_diagram_closed_form().unwrap();
    assert_eq!(d.len(), 2);
    let p = d.finite(0).next().unwrap();
    assert!((p.birth - 0.15).abs() < 1e-15 && (p.death - 0.20).abs() < 1e-15);

    assert!(matches!(SignalSpec::OneDimCos.true_diagram_closed_form(), Err(Error::Unsupported(_))));
}

#[test]
fn closed_form_persistence_is_nonnegative() {
    let mut rng = SeedStream::new(3).rng();
    for _ in 0..2000 {
        let h: f64 = rng.random_range(0.01..0.3);
        let k = (1.0 / h + 1e-9).floor() as usize;
        let spec = SignalSpec::LowerBoundBump {
            bound: rng.random_range(0.1..3.0),
            lipschitz: rng.random_range(0.1..3.0),
            alpha: rng.random_range(0.05..=1.0),
            dim: rng.random_range(1..4),
            h,
            m: rng.random_range(1..k),
        };
        let SignalSpec::LowerBoundBump { bound, lipschitz, alpha, dim, .. } = spec else { unreachable!() };
        let c = bound.min(lipschitz) / (2.0 * (dim as f64).sqrt());
        let gap = (lipschitz / (dim as f64).sqrt() - c) * h.powf(alpha);
        assert!(gap >= 0.0);
        let d = spec.true_diagram_closed_form().unwrap();
        let p = d.finite(0).next().copied();
        if let Some(p) = p {
            assert!((p.persistence() - gap).abs() < 1e-12);
        }
    }
}

#[test]
fn invalid_specs_are_rejected() {
    let overlap = SignalSpec::DiscBumps { discs: vec![Disc::new(0.4, 0.5, 0.15), Disc::new(0.6, 0.5, 0.15)], alpha: 1.0 };
    assert!(overlap.validate().is_err());
    let frame = SignalSpec::DiscBumps { discs: vec![Disc::new(0.05, 0.5, 0.1)], alpha: 1.0 };
    assert!(frame.validate().is_err());
    let unordered = SignalSpec::NestedDiscs { center: [0.5, 0.5], radii: vec![0.2, 0.1], alpha: 1.0 };
    assert!(unordered.validate().is_err());
    assert!(bump(0).validate().is_err());
    assert!(bump(10).validate().is_err());
    assert!(bump(9).validate().is_ok());
    assert!(SignalSpec::default_disc_bumps(1.5).validate().is_err());
}

#[test]
fn json_uses_a_variant_tag() {
    let spec = bump(5);
    let text = serde_json::to_string(&spec).unwrap();
    assert!(text.contains("\"variant\":\"lower_bound_bump\""));
    assert_eq!(SignalSpec::from_json(&text).unwrap(), spec);
    assert_eq!(SignalSpec::from_json(r#"{"variant":"cos_sine_disc"}"#).unwrap(), SignalSpec::CosSineDisc);
    assert!(SignalSpec::from_json(r#"{"variant":"lower_bound_bump","bound":1,"lipschitz":1,"alpha":1,"dim":1,"h":0.1,"m":12}"#).is_err());
}

#[test]
fn random_layouts_satisfy_margins() {
    for seed in 0..20 {
        let mut rng = SeedStream::new(seed).rng();
        let discs = random_disc_layout(6, (0.05, 0.12), 0.02, &mut rng).unwrap();
        for (i, a) in discs.iter().enumerate() {
            assert!(a.frame_margin() > 0.02);
            for b in &discs[i + 1..] {
                assert!(a.dist(&b.center) - a.radius - b.radius > 0.02);
            }
        }
    }
}

/// Local extrema of x cos(8 pi x) found by a dense scan, used as an
/// independent check of the oracle diagram.
#[test]
fn one_dim_cos_oracle() {
    let d = SignalSpec::OneDimCos.true_diagram_oracle(4000).unwrap();
    assert_eq!(d.essential(0).count(), 1);
    assert_eq!(d.degree(1).count(), 0);
    let finite: Vec<_> = d.finite(0).collect();
    // four interior minima pair with three interior maxima; the sample next to
    // x = 0 is a boundary minimum that dies at the small first maximum
    assert_eq!(finite.len(), 4);
    assert_eq!(finite.iter().filter(|p| p.persistence() > 0.1).count(), 3);

    let n = 4000;
    let v: Vec<f64> = (1..=n).map(|k| SignalSpec::OneDimCos.eval(&[k as f64 / n as f64])).collect();
    let mut minima: Vec<f64> = (0..n)
        .filter(|&i| (i == 0 || v[i] < v[i - 1]) && (i == n - 1 || v[i] < v[i + 1]))
        .map(|i| v[i])
        .collect();
    minima.sort_by(f64::total_cmp);
    let mut births: Vec<f64> = d.degree(0).map(|p| p.birth).collect();
    births.sort_by(f64::total_cmp);
    assert_eq!(births, minima);
}

#[test]
fn disc_bumps_oracle_matches_component_sweep() {
    let spec = SignalSpec::default_disc_bumps(1.0);
    let n = 800;
    let field = spec.sample_on_grid(GridSpec::new(2, n).unwrap()).unwrap();
    let d = spec.true_diagram_oracle(n).unwrap();
    // per-disc extreme sample values
    let extreme = |disc: &Disc, neg: bool| {
        let mut best = if neg { f64::INFINITY } else { f64::NEG_INFINITY };
        for (i, &v) in field.values().iter().enumerate() {
            if disc.dist(&field.grid().point_at(i)) <= disc.radius {
                best = if neg { best.min(v) } else { best.max(v) };
            }
        }
        best
    };
    let mut neg_births: Vec<f64> = DEFAULT_DISC_LAYOUT.iter().step_by(2).map(|c| extreme(c, true)).collect();
    let mut pos_deaths: Vec<f64> = DEFAULT_DISC_LAYOUT.iter().skip(1).step_by(2).map(|c| extreme(c, false)).collect();
    neg_births.sort_by(f64::total_cmp);
    pos_deaths.sort_by(f64::total_cmp);

    let mut births: Vec<f64> = d.degree(0).map(|p| p.birth).collect();
    births.sort_by(f64::total_cmp);
    assert_eq!(births, neg_births);
    assert!(births.iter().all(|b| *b < -1.9));
    let ess: Vec<_> = d.essential(0).collect();
    assert_eq!(ess.len(), 1);
    assert_eq!(ess[0].birth, neg_births[0]);
    assert!(d.finite(0).all(|p| p.death == 0.0));
    assert_eq!(d.finite(0).count(), 3);

    let mut h1: Vec<_> = d.degree(1).collect();
    h1.sort_by(|a, b| a.death.total_cmp(&b.death));
    assert_eq!(h1.len(), 4);
    assert!(h1.iter().all(|p| p.birth == 0.0));
    assert_eq!(h1.iter().map(|p| p.death).collect::<Vec<_>>(), pos_deaths);
}

#[test]
fn lower_bound_oracle_matches_closed_form() {
    let n = 2000;
    for m in 3..10 {
        let spec = bump(m);
        let oracle = spec.true_diagram_oracle(n).unwrap();
        let closed = spec.true_diagram_closed_form().unwrap();
        let tol = spec.oracle_tolerance(n);
        assert!(bottleneck::bottleneck_all_degrees(&oracle, &closed) <= tol, "m = {m}");
    }
    let oracle = base().true_diagram_oracle(n).unwrap();
    let closed = base().true_diagram_closed_form().unwrap();
    assert!(bottleneck::bottleneck_all_degrees(&oracle, &closed) <= base().oracle_tolerance(n));
    assert!(base().true_diagram_oracle(100).is_err());
}

#[test]
fn oracle_is_stable_in_resolution() {
    for spec in [SignalSpec::OneDimCos, bump(4)] {
        let a = spec.true_diagram_oracle(1600).unwrap();
        let b = spec.true_diagram_oracle(3200).unwrap();
        let bound = 2.0 * spec.oracle_tolerance(1600);
        assert!(bottleneck::bottleneck_all_degrees(&a, &b) <= bound);
    }
}
