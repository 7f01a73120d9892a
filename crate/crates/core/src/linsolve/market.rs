use std::io::Write;

use super::CsrMatrix;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarketSymmetry {
    General,
    /// Only the lower triangle is written; the caller asserts symmetry.
    Symmetric,
}

/// Writes `m` in Matrix Market coordinate format (1-based indices).
pub fn write_matrix_market<W: Write>(mut w: W, m: &CsrMatrix, symmetry: MarketSymmetry) -> Result<()> {
    let entries: Vec<_> = m
        .triplets()
        .filter(|&(r, c, _)| symmetry == MarketSymmetry::General || c <= r)
        .collect();
    let kind = match symmetry {
        MarketSymmetry::General => "general",
        MarketSymmetry::Symmetric => "symmetric",
    };
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), entries.len())?;
    for (r, c, v) in entries {
        writeln!(w, "{} {} {:.17e}", r + 1, c + 1, v)?;
    }
    Ok(())
}

/// Writes a dense vector in Matrix Market array format.
pub fn write_vector_market<W: Write>(mut w: W, v: &[f64]) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{x:.17e}")?;
    }
    Ok(())
}
