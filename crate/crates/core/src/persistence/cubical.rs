use crate::error::{Error, Result};
use crate::estimator::BlockField;
use crate::grid::{check_finite, ScalarField};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 3;

/// Full cubical complex over a grid of top cells, with the T-construction
/// filtration: every cell takes the minimum value of the top cells it bounds.
/// The sublevel complex at `lambda` is then exactly the union of the closed
/// top cubes with value `<= lambda`.
///
/// Cells live on a grid with `2 s_j + 1` positions along axis `j`; odd
/// coordinates span an interval, even ones are a point. Cell ids are row-major
/// in that grid.
#[derive(Clone, Debug)]
pub struct CubicalFiltration {
    shape: Vec<usize>,
    extent: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<f64>,
    cell_dims: Vec<u8>,
    order: Vec<u32>,
    position: Vec<u32>,
}

impl CubicalFiltration {
    /// Builds the complex from top-cell values given row-major over `shape`.
    pub fn new(shape: &[usize], top_values: &[f64]) -> Result<Self> {
        let d = shape.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::Unsupported(format!(
                "cubical persistence supports dimensions 1..={MAX_DIM}, got {d}"
            )));
        }
        if shape.contains(&0) {
            return Err(Error::Domain("top-cell grid has an empty axis".into()));
        }
        let expected: usize = shape.iter().product();
        if top_values.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: top_values.len() });
        }
        check_finite(top_values)?;
        let extent: Vec<usize> = shape.iter().map(|s| 2 * s + 1).collect();
        let total: usize = extent.iter().product();
        if total > u32::MAX as usize - 1 {
            return Err(Error::Unsupported(format!("complex with {total} cells is too large")));
        }
        let mut strides = vec![1usize; d];
        for j in (0..d - 1).rev() {
            strides[j] = strides[j + 1] * extent[j + 1];
        }

        let values = expand_min(shape, top_values);
        let cell_dims: Vec<u8> = (0..total)
            .map(|id| {
                let mut rem = id;
                let mut dim = 0u8;
                for j in 0..d {
                    dim += ((rem / strides[j]) % 2) as u8;
                    rem %= strides[j];
                }
                dim
            })
            .collect();

        let mut order: Vec<u32> = (0..total as u32).collect();
        order.sort_unstable_by(|&a, &b| {
            let (a, b) = (a as usize, b as usize);
            values[a]
                .total_cmp(&values[b])
                .then(cell_dims[a].cmp(&cell_dims[b]))
                .then(a.cmp(&b))
        });
        let mut position = vec![0u32; total];
        for (p, &c) in order.iter().enumerate() {
            position[c as usize] = p as u32;
        }
        Ok(CubicalFiltration { shape: shape.to_vec(), extent, strides, values, cell_dims, order, position })
    }

    pub fn from_field(field: &ScalarField) -> Result<Self> {
        let g = field.grid();
        Self::new(&vec![g.side(); g.dim()], field.values())
    }

    pub fn from_blocks(blocks: &BlockField) -> Result<Self> {
        Self::new(&vec![blocks.blocks_per_axis(); blocks.dim()], blocks.values())
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    /// Top cells per axis.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn num_cells(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_dim(&self, cell: usize) -> usize {
        self.cell_dims[cell] as usize
    }

    /// Cell ids in filtration order: value, then dimension, then id.
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    /// Rank of `cell` in [`order`](Self::order).
    pub fn position(&self, cell: usize) -> usize {
        self.position[cell] as usize
    }

    pub fn coords(&self, cell: usize) -> Vec<usize> {
        let mut rem = cell;
        self.strides
            .iter()
            .map(|&s| {
                let c = rem / s;
                rem %= s;
                c
            })
            .collect()
    }

    pub fn cell_id(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    /// Codimension-one faces of `cell` (each with coefficient 1 over Z/2).
    pub fn boundary(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        let coords = self.coords(cell);
        (0..self.dim())
            .filter(move |&j| coords[j] % 2 == 1)
            .flat_map(move |j| [cell - self.strides[j], cell + self.strides[j]])
    }

    /// Cell id of the top cell with zero-based block index `idx`.
    pub fn top_cell(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| (2 * i + 1) * s).sum()
    }

    pub fn extent(&self) -> &[usize] {
        &self.extent
    }
}

/// Expands top values onto the `(2s+1)^d` cell grid, one axis at a time.
/// The minimum over a product of index sets factorises across axes.
fn expand_min(shape: &[usize], top: &[f64]) -> Vec<f64> {
    let d = shape.len();
    let mut cur_shape = shape.to_vec();
    let mut cur = top.to_vec();
    for axis in 0..d {
        let s = shape[axis];
        let outer: usize = cur_shape[..axis].iter().product();
        let inner: usize = cur_shape[axis + 1..].iter().product();
        let e = 2 * s + 1;
        let mut next = vec![0.0; outer * e * inner];
        for o in 0..outer {
            for c in 0..e {
                let dst = (o * e + c) * inner;
                if c % 2 == 1 {
                    let src = (o * s + c / 2) * inner;
                    next[dst..dst + inner].copy_from_slice(&cur[src..src + inner]);
                } else {
                    let left = (c / 2).checked_sub(1);
                    let right = if c / 2 < s { Some(c / 2) } else { None };
                    for i in 0..inner {
                        let l = left.map_or(f64::INFINITY, |k| cur[(o * s + k) * inner + i]);
                        let r = right.map_or(f64::INFINITY, |k| cur[(o * s + k) * inner + i]);
                        next[dst + i] = l.min(r);
                    }
                }
            }
        }
        cur_shape[axis] = e;
        cur = next;
    }
    cur
}
