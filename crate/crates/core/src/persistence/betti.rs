//! Betti numbers of a single sublevel complex, computed directly from ranks
//! of boundary matrices. Shares no code with the persistence reduction and
//! serves as its cross-check.

use std::collections::HashMap;

use super::CubicalFiltration;

/// Betti numbers `beta_0..=beta_d` of the subcomplex of cells with value `<= lambda`.
pub fn betti_at(filt: &CubicalFiltration, lambda: f64) -> Vec<usize> {
    let d = filt.dim();
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); d + 1];
    for c in 0..filt.num_cells() {
        if filt.value(c) <= lambda {
            cells[filt.cell_dim(c)].push(c);
        }
    }
    let mut ranks = vec![0usize; d + 2];
    for k in 1..=d {
        ranks[k] = boundary_rank(filt, &cells[k], &cells[k - 1]);
    }
    let mut betti: Vec<usize> = (0..=d).map(|k| cells[k].len() - ranks[k] - ranks[k + 1]).collect();
    betti[0] = components(filt, &cells[0], cells.get(1).map_or(&[][..], |v| v.as_slice()));
    debug_assert_eq!(betti[0], cells[0].len() - ranks[1]);
    betti
}

/// GF(2) rank of the boundary map from `cols` to `rows`, by inserting each
/// column bitset into an XOR basis keyed by its highest set bit.
fn boundary_rank(filt: &CubicalFiltration, cols: &[usize], rows: &[usize]) -> usize {
    let row_index: HashMap<usize, usize> = rows.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let words = rows.len().div_ceil(64).max(1);
    let mut basis: HashMap<usize, Vec<u64>> = HashMap::new();
    for &c in cols {
        let mut v = vec![0u64; words];
        for f in filt.boundary(c) {
            let i = row_index[&f];
            v[i / 64] ^= 1 << (i % 64);
        }
        while let Some(top) = highest_bit(&v) {
            match basis.get(&top) {
                Some(b) => v.iter_mut().zip(b).for_each(|(x, y)| *x ^= y),
                None => {
                    basis.insert(top, v);
                    break;
                }
            }
        }
    }
    basis.len()
}

fn highest_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .rev()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
}

fn components(filt: &CubicalFiltration, vertices: &[usize], edges: &[usize]) -> usize {
    let index: HashMap<usize, usize> = vertices.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut parent: Vec<usize> = (0..vertices.len()).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    let mut count = vertices.len();
    for &e in edges {
        let ends: Vec<usize> = filt.boundary(e).map(|f| index[&f]).collect();
        let (a, b) = (root(&mut parent, ends[0]), root(&mut parent, ends[1]));
        if a != b {
            parent[a] = b;
            count -= 1;
        }
    }
    count
}
