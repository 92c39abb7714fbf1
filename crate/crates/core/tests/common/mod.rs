#![allow(dead_code)]

use cubepersist::rng::StreamRng;
use cubepersist::{DiagramPoint, PersistenceDiagram};
use rand::Rng;

/// Exhaustive bottleneck distance for one degree: every partial bijection
/// between finite points, unmatched points going to the diagonal, and every
/// permutation of the essential points.
pub fn brute_bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram, s: usize) -> f64 {
    let fin = |d: &PersistenceDiagram| -> Vec<(f64, f64)> { d.finite(s).map(|p| (p.birth, p.death)).collect() };
    let ess = |d: &PersistenceDiagram| -> Vec<f64> { d.essential(s).map(|p| p.birth).collect() };
    let (ea, eb) = (ess(d1), ess(d2));
    if ea.len() != eb.len() {
        return f64::INFINITY;
    }
    let essential = min_over_permutations(&ea, &eb);
    essential.max(brute_finite(&fin(d1), &fin(d2)))
}

fn min_over_permutations(a: &[f64], b: &[f64]) -> f64 {
    fn go(i: usize, a: &[f64], b: &[f64], used: &mut Vec<bool>, cur: f64, best: &mut f64) {
        if i == a.len() {
            *best = best.min(cur);
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                go(i + 1, a, b, used, cur.max((a[i] - b[j]).abs()), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
    if a.is_empty() {
        0.0
    } else {
        best
    }
}

pub fn brute_finite(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    fn diag(p: (f64, f64)) -> f64 {
        (p.1 - p.0) / 2.0
    }
    fn go(i: usize, a: &[(f64, f64)], b: &[(f64, f64)], used: &mut Vec<bool>, cur: f64, best: &mut f64) {
        if cur >= *best {
            return;
        }
        if i == a.len() {
            let rest = b.iter().zip(used.iter()).filter(|(_, &u)| !u).map(|(p, _)| diag(*p)).fold(cur, f64::max);
            *best = best.min(rest);
            return;
        }
        go(i + 1, a, b, used, cur.max(diag(a[i])), best);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                let c = (a[i].0 - b[j].0).abs().max((a[i].1 - b[j].1).abs());
                go(i + 1, a, b, used, cur.max(c), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
    best
}

/// Random diagram over degrees `0..degrees` with values on a coarse lattice
/// so that ties are common.
pub fn random_diagram(rng: &mut StreamRng, degrees: usize, max_finite: usize, max_essential: usize) -> PersistenceDiagram {
    let mut pts = Vec::new();
    for s in 0..degrees {
        for _ in 0..rng.random_range(0..=max_finite) {
            let b = rng.random_range(0..12) as f64 * 0.25;
            let d = b + rng.random_range(1..8) as f64 * 0.25;
            pts.push(DiagramPoint::new(s, b, d));
        }
        for _ in 0..rng.random_range(0..=max_essential) {
            pts.push(DiagramPoint::new(s, rng.random_range(0..12) as f64 * 0.25, f64::INFINITY));
        }
    }
    PersistenceDiagram::from_points(pts).unwrap()
}

/// Uniform values in `[0, 1)`, optionally quantised to create ties.
pub fn random_values(rng: &mut StreamRng, len: usize, levels: Option<u32>) -> Vec<f64> {
    (0..len)
        .map(|_| match levels {
            Some(l) => rng.random_range(0..l) as f64 / l as f64,
            None => rng.random::<f64>(),
        })
        .collect()
}

/// Number of points of degree `s` alive at `lambda`.
pub fn alive(d: &PersistenceDiagram, s: usize, lambda: f64) -> usize {
    d.degree(s).filter(|p| p.alive_at(lambda)).count()
}
