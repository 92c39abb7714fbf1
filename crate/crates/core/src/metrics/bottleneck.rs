//! Exact bottleneck distance between persistence diagrams.
//!
//! Finite points: binary search over the candidate costs (pairwise sup-norm
//! distances and half-persistences), each step a perfect-matching test on the
//! diagonal-augmented bipartite graph. Essential points match only each
//! other, in sorted order of birth.

use crate::diagram::PersistenceDiagram;

use super::matching::hopcroft_karp;

/// Sup-norm distance between two finite points.
pub fn pair_cost(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// Sup-norm distance from a point to the diagonal.
pub fn diagonal_cost(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

/// Bottleneck distance restricted to degree `degree`. Returns `+inf` when
/// the essential counts differ.
pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram, degree: usize) -> f64 {
    let fin = |d: &PersistenceDiagram| d.finite(degree).map(|p| (p.birth, p.death)).collect::<Vec<_>>();
    let ess = |d: &PersistenceDiagram| d.essential(degree).map(|p| p.birth).collect::<Vec<_>>();
    let e = essential_bottleneck(&ess(d1), &ess(d2));
    if e.is_infinite() {
        return e;
    }
    e.max(finite_bottleneck(&fin(d1), &fin(d2)))
}

/// Maximum of [`bottleneck`] over all degrees present in either diagram.
pub fn bottleneck_all_degrees(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> f64 {
    let top = d1.max_degree().max(d2.max_degree());
    match top {
        None => 0.0,
        Some(top) => (0..=top).map(|s| bottleneck(d1, d2, s)).fold(0.0, f64::max),
    }
}

/// Bottleneck distance between essential classes given by their births.
pub fn essential_bottleneck(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Bottleneck distance between finite point sets.
pub fn finite_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut candidates: Vec<f64> = Vec::with_capacity(a.len() * b.len() + a.len() + b.len());
    candidates.extend(a.iter().map(|&p| diagonal_cost(p)));
    candidates.extend(b.iter().map(|&p| diagonal_cost(p)));
    for &p in a {
        for &q in b {
            candidates.push(pair_cost(p, q));
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // the largest candidate always works: everything goes to the diagonal
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(a, b, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Whether a diagonal-augmented perfect matching of cost `<= eps` exists.
///
/// Left: points of `a`, then diagonal copies of `b`. Right: points of `b`,
/// then diagonal copies of `a`.
fn feasible(a: &[(f64, f64)], b: &[(f64, f64)], eps: f64) -> bool {
    let (m, n) = (a.len(), b.len());
    let mut adj: Vec<Vec<u32>> = Vec::with_capacity(m + n);
    for (i, &p) in a.iter().enumerate() {
        let mut row: Vec<u32> = (0..n).filter(|&j| pair_cost(p, b[j]) <= eps).map(|j| j as u32).collect();
        if diagonal_cost(p) <= eps {
            row.push((n + i) as u32);
        }
        if row.is_empty() {
            return false;
        }
        adj.push(row);
    }
    let diag_targets: Vec<u32> = (0..m).map(|i| (n + i) as u32).collect();
    for (j, &q) in b.iter().enumerate() {
        let mut row = Vec::with_capacity(m + 1);
        if diagonal_cost(q) <= eps {
            row.push(j as u32);
        }
        row.extend_from_slice(&diag_targets);
        adj.push(row);
    }
    hopcroft_karp(&adj, n + m) == n + m
}
