//! Z/2 persistence of a cubical filtration.
//!
//! Degree 0 is computed with a union-find sweep over vertices and edges
//! (elder rule). Higher degrees come from the standard column reduction,
//! run from the top dimension down so that pivot rows found in dimension
//! `k+1` clear the matching columns of dimension `k`.

use crate::diagram::{DiagramPoint, PersistenceDiagram};

use super::CubicalFiltration;

const NONE: u32 = u32::MAX;

/// How degree 0 is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Union-find for degree 0, reduction for the rest.
    UnionFind,
    /// Column reduction for every degree (slower; used for cross-checks).
    ReductionOnly,
}

/// A persistence pair by cell id. `death` is `None` for essential classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellPair {
    pub degree: usize,
    pub birth: usize,
    pub death: Option<usize>,
}

/// All pairs, including those of zero persistence.
#[derive(Clone, Debug)]
pub struct Pairing {
    pub pairs: Vec<CellPair>,
}

impl Pairing {
    /// The diagram, with zero-persistence pairs dropped.
    pub fn diagram(&self, filt: &CubicalFiltration) -> PersistenceDiagram {
        let mut dgm = PersistenceDiagram::new();
        for p in &self.pairs {
            let birth = filt.value(p.birth);
            let death = p.death.map_or(f64::INFINITY, |c| filt.value(c));
            if birth < death {
                dgm.push_unchecked(DiagramPoint::new(p.degree, birth, death));
            }
        }
        dgm
    }

    /// Partner of every cell (`None` for essential cells), indexed by cell id.
    pub fn partners(&self, num_cells: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; num_cells];
        for p in &self.pairs {
            if let Some(d) = p.death {
                out[p.birth] = Some(d);
                out[d] = Some(p.birth);
            }
        }
        out
    }
}

/// Diagram of all degrees with the default strategy.
pub fn compute_persistence(filt: &CubicalFiltration) -> PersistenceDiagram {
    compute_pairs(filt, Strategy::UnionFind).diagram(filt)
}

pub fn compute_pairs(filt: &CubicalFiltration, strategy: Strategy) -> Pairing {
    let n = filt.num_cells();
    let d = filt.dim();
    let lowest_reduced = match strategy {
        Strategy::UnionFind => 2,
        Strategy::ReductionOnly => 1,
    };

    // Cells sorted by position, bucketed by dimension.
    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); d + 1];
    for &c in filt.order() {
        by_dim[filt.cell_dim(c as usize)].push(c);
    }

    let mut negative = vec![false; n];
    let mut paired_birth = vec![false; n];
    let mut pairs = Vec::new();
    let mut reducer = Reducer::new(n);

    for k in (lowest_reduced..=d).rev() {
        for &cell in &by_dim[k] {
            let cell = cell as usize;
            if paired_birth[cell] {
                // cleared: this column reduces to zero
                continue;
            }
            if let Some(low) = reducer.reduce(filt, cell) {
                negative[cell] = true;
                paired_birth[low] = true;
                pairs.push(CellPair { degree: k - 1, birth: low, death: Some(cell) });
            }
        }
    }

    if strategy == Strategy::UnionFind {
        union_find_h0(filt, &by_dim, &mut negative, &mut paired_birth, &mut pairs);
    }

    for cells in &by_dim {
        for &c in cells {
            let c = c as usize;
            if !negative[c] && !paired_birth[c] {
                pairs.push(CellPair { degree: filt.cell_dim(c), birth: c, death: None });
            }
        }
    }
    Pairing { pairs }
}

/// Sparse Z/2 column reduction keyed by filtration position.
struct Reducer {
    pivot_col: Vec<u32>,
    slot: Vec<u32>,
    store: Vec<Vec<u32>>,
    scratch: Vec<u32>,
}

impl Reducer {
    fn new(n: usize) -> Self {
        Reducer { pivot_col: vec![NONE; n], slot: vec![NONE; n], store: Vec::new(), scratch: Vec::new() }
    }

    /// Reduces the boundary column of `cell`; returns the cell id of its
    /// pivot (lowest) row if the reduced column is non-zero.
    fn reduce(&mut self, filt: &CubicalFiltration, cell: usize) -> Option<usize> {
        let mut col: Vec<u32> = filt.boundary(cell).map(|f| filt.position(f) as u32).collect();
        col.sort_unstable();
        loop {
            let &low = col.last()?;
            let other = self.pivot_col[low as usize];
            if other == NONE {
                let pos = filt.position(cell);
                self.pivot_col[low as usize] = pos as u32;
                self.slot[pos] = self.store.len() as u32;
                self.store.push(col);
                return Some(filt.order()[low as usize] as usize);
            }
            let add = &self.store[self.slot[other as usize] as usize];
            sym_diff(&col, add, &mut self.scratch);
            std::mem::swap(&mut col, &mut self.scratch);
        }
    }
}

/// Symmetric difference of two ascending lists.
fn sym_diff(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

/// Elder-rule sweep: each merging edge kills the component whose oldest
/// vertex comes later in the filtration.
fn union_find_h0(
    filt: &CubicalFiltration,
    by_dim: &[Vec<u32>],
    negative: &mut [bool],
    paired_birth: &mut [bool],
    pairs: &mut Vec<CellPair>,
) {
    let n = filt.num_cells();
    // parent over cell ids of vertices; the root carries the oldest vertex
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let edges = by_dim.get(1).map(|v| v.as_slice()).unwrap_or(&[]);
    for &e in edges {
        let e = e as usize;
        let mut ends = filt.boundary(e);
        let (u, v) = (ends.next().unwrap() as u32, ends.next().unwrap() as u32);
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru == rv {
            continue;
        }
        let (elder, younger) = if filt.position(ru as usize) < filt.position(rv as usize) {
            (ru, rv)
        } else {
            (rv, ru)
        };
        parent[younger as usize] = elder;
        negative[e] = true;
        paired_birth[younger as usize] = true;
        pairs.push(CellPair { degree: 0, birth: younger as usize, death: Some(e) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dgm(shape: &[usize], vals: &[f64]) -> PersistenceDiagram {
        compute_persistence(&CubicalFiltration::new(shape, vals).unwrap()).sorted()
    }

    fn pts(p: &[(usize, f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::from_points(p.iter().map(|&(s, b, d)| DiagramPoint::new(s, b, d)))
            .unwrap()
            .sorted()
    }

    #[test]
    fn one_dim_example() {
        let inf = f64::INFINITY;
        assert_eq!(dgm(&[5], &[1.0, 0.0, 2.0, -1.0, 3.0]), pts(&[(0, -1.0, inf), (0, 0.0, 2.0)]));
    }

    #[test]
    fn constant_field_has_one_essential_component() {
        let inf = f64::INFINITY;
        assert_eq!(dgm(&[4, 3], &[0.5; 12]), pts(&[(0, 0.5, inf)]));
        assert_eq!(dgm(&[2, 2, 2], &[0.5; 8]), pts(&[(0, 0.5, inf)]));
    }

    #[test]
    fn ring_encloses_low_and_high_interiors() {
        let inf = f64::INFINITY;
        let k = 3.0;
        let mut vals = vec![k; 9];
        // interior below the ring: no hole ever opens
        vals[4] = 0.0;
        assert_eq!(dgm(&[3, 3], &vals), pts(&[(0, 0.0, inf)]));
        // interior above the ring: the hole lives on [K, 2K)
        vals[4] = 2.0 * k;
        assert_eq!(dgm(&[3, 3], &vals), pts(&[(0, k, inf), (1, k, 2.0 * k)]));
        // a zero frame around the ring is itself a loop from level 0
        let mut framed = vec![0.0; 25];
        for i in 1..4 {
            for j in 1..4 {
                framed[i * 5 + j] = if (i, j) == (2, 2) { 2.0 * k } else { k };
            }
        }
        assert_eq!(dgm(&[5, 5], &framed), pts(&[(0, 0.0, inf), (1, 0.0, 2.0 * k)]));
    }

    #[test]
    fn corner_adjacent_cells_are_connected() {
        let inf = f64::INFINITY;
        assert_eq!(dgm(&[2, 2], &[0.0, 1.0, 1.0, 0.0]), pts(&[(0, 0.0, inf)]));
    }

    #[test]
    fn strategies_agree_on_small_examples() {
        let vals: Vec<f64> = (0..36).map(|i| (((i * 17) % 11) as f64).sin()).collect();
        let f = CubicalFiltration::new(&[6, 6], &vals).unwrap();
        let a = compute_pairs(&f, Strategy::UnionFind).diagram(&f).sorted();
        let b = compute_pairs(&f, Strategy::ReductionOnly).diagram(&f).sorted();
        assert_eq!(a, b);
    }

    #[test]
    fn euler_characteristic_of_pairs() {
        // every cell appears in exactly one pair; the full cube leaves one essential vertex
        let vals: Vec<f64> = (0..27).map(|i| ((i * 5) % 7) as f64).collect();
        let f = CubicalFiltration::new(&[3, 3, 3], &vals).unwrap();
        let p = compute_pairs(&f, Strategy::UnionFind);
        let covered: usize = p.pairs.iter().map(|q| if q.death.is_some() { 2 } else { 1 }).sum();
        assert_eq!(covered, f.num_cells());
        let essential: Vec<_> = p.pairs.iter().filter(|q| q.death.is_none()).collect();
        assert_eq!(essential.len(), 1);
        assert_eq!(essential[0].degree, 0);
    }
}
