//! Machine-readable dumps of the basis `U` and the central projections.
//!
//! Complex entries are `[re, im]` pairs. `serde_json` prints the shortest
//! decimal that parses back to the same `f64`, so [`import_basis`] recovers
//! `U` bit for bit.

use std::path::Path;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Budget, ComplexMatrix};
use crate::report::SCHEMA_VERSION;
use crate::structure::{central_projections, StructureDecomposition};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMapRow {
    pub j2: i64,
    /// 1-based copy index.
    pub mu: usize,
    /// Column of `U` holding `|j, -j, μ⟩`; the next `2j` columns follow in `m`.
    pub first_column: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnRecord {
    pub j2: i64,
    pub mu: usize,
    pub m2: i64,
    pub entries: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisExport {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub dim: usize,
    pub block_map: Vec<BlockMapRow>,
    pub columns: Vec<ColumnRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRecord {
    pub j2: i64,
    pub rank: usize,
    /// Row-major.
    pub rows: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionsExport {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub dim: usize,
    pub projections: Vec<ProjectionRecord>,
}

fn pair(z: Complex<f64>) -> [f64; 2] {
    [z.re, z.im]
}

pub fn block_map(decomp: &StructureDecomposition<f64>) -> Vec<BlockMapRow> {
    let mut out = Vec::new();
    let mut col = 0;
    for b in &decomp.blocks {
        for mu in 1..=b.p() {
            out.push(BlockMapRow {
                j2: b.j.twice(),
                mu,
                first_column: col,
            });
            col += b.q();
        }
    }
    out
}

pub fn export_basis(decomp: &StructureDecomposition<f64>, budget: &Budget) -> Result<BasisExport> {
    let u = decomp.unitary(budget)?;
    let columns = decomp
        .column_labels()
        .into_iter()
        .enumerate()
        .map(|(c, l)| ColumnRecord {
            j2: l.j.twice(),
            mu: l.mu,
            m2: l.m.twice(),
            entries: u.column(c).iter().copied().map(pair).collect(),
        })
        .collect();
    Ok(BasisExport {
        schema_version: SCHEMA_VERSION,
        n: decomp.n,
        d: decomp.d,
        dim: decomp.dim,
        block_map: block_map(decomp),
        columns,
    })
}

pub fn export_projections(decomp: &StructureDecomposition<f64>, budget: &Budget) -> Result<ProjectionsExport> {
    let projections = central_projections(decomp, budget)?
        .into_iter()
        .map(|(j, p)| {
            let rank = decomp.block(j).map_or(0, |b| b.p() * b.q());
            ProjectionRecord {
                j2: j.twice(),
                rank,
                rows: p.row_iter().map(|r| r.iter().copied().map(pair).collect()).collect(),
            }
        })
        .collect();
    Ok(ProjectionsExport {
        schema_version: SCHEMA_VERSION,
        n: decomp.n,
        d: decomp.d,
        dim: decomp.dim,
        projections,
    })
}

impl BasisExport {
    /// Rebuild `U`, checking that the record is complete.
    pub fn to_matrix(&self) -> Result<ComplexMatrix<f64>> {
        if self.columns.len() != self.dim {
            return Err(Error::Parse(format!(
                "basis file has {} columns for dimension {}",
                self.columns.len(),
                self.dim
            )));
        }
        let mut u = ComplexMatrix::zeros(self.dim, self.dim);
        for (c, col) in self.columns.iter().enumerate() {
            if col.entries.len() != self.dim {
                return Err(Error::Parse(format!("column {c} has {} entries", col.entries.len())));
            }
            for (r, [re, im]) in col.entries.iter().enumerate() {
                u[(r, c)] = Complex::new(*re, *im);
            }
        }
        Ok(u)
    }
}

pub fn import_basis(json: &str) -> Result<BasisExport> {
    let b: BasisExport = serde_json::from_str(json)?;
    if b.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!("unsupported schema version {}", b.schema_version)));
    }
    Ok(b)
}

pub fn import_basis_file(path: &Path) -> Result<BasisExport> {
    import_basis(&std::fs::read_to_string(path)?)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
