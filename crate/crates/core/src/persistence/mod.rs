//! Sublevel-set persistence of block fields through cubical complexes.

mod betti;
mod cubical;
mod reduction;

pub use betti::betti_at;
pub use cubical::{CubicalFiltration, MAX_DIM};
pub use reduction::{compute_pairs, compute_persistence, CellPair, Pairing, Strategy};

use std::io;

use crate::diagram::PersistenceDiagram;
use crate::error::Result;
use crate::estimator::BlockField;
use crate::grid::ScalarField;

/// Diagram of the sublevel filtration of a sampled field, one top cell per sample.
pub fn field_diagram(field: &ScalarField) -> Result<PersistenceDiagram> {
    Ok(compute_persistence(&CubicalFiltration::from_field(field)?))
}

/// Diagram of the union-of-closed-blocks filtration of a block field.
pub fn block_diagram(blocks: &BlockField) -> Result<PersistenceDiagram> {
    Ok(compute_persistence(&CubicalFiltration::from_blocks(blocks)?))
}

/// Writes one line per cell: `cell,dim,value,partner` (`-1` when unpaired).
pub fn write_cell_dump<W: io::Write>(filt: &CubicalFiltration, pairing: &Pairing, out: W) -> Result<()> {
    let partners = pairing.partners(filt.num_cells());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cell", "dim", "value", "partner"])?;
    for &c in filt.order() {
        let c = c as usize;
        let partner = partners[c].map_or("-1".to_string(), |p| p.to_string());
        w.write_record([
            c.to_string(),
            filt.cell_dim(c).to_string(),
            crate::diagram::fmt_value(filt.value(c)),
            partner,
        ])?;
    }
    w.flush()?;
    Ok(())
}
