//! Structure tables: `(j, p_j, q_j)` rows with totals, rendered as text,
//! JSON or CSV, plus an ASCII picture of the weight-dimension staircase.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::collective::checked_dim;
use crate::error::Result;
use crate::half::HalfInt;
use crate::scalar::Real;
use crate::structure::{predicted_multiplicities, top_weight, weight_dims, StructureDecomposition};

/// Bumped on any breaking change to the JSON layouts in this crate.
pub const SCHEMA_VERSION: u32 = 1;

/// Largest `n` for which the staircase picture is drawn.
pub const STAIRCASE_MAX_N: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureRow {
    /// `2j`.
    pub j2: i64,
    pub p: u128,
    pub q: u128,
    pub pq: u128,
    pub p2: u128,
}

impl StructureRow {
    pub fn j(&self) -> HalfInt {
        HalfInt::from_twice(self.j2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub dim: u128,
    /// `2·ns`.
    pub ns2: i64,
    /// "constructed" or "predicted".
    pub source: String,
    pub rows: Vec<StructureRow>,
    /// `dim V_m` for `m = -ns, …, ns`.
    pub weight_dims: Vec<u128>,
    /// `Σ p_j q_j`, equal to `d^n`.
    pub total_pq: u128,
    /// `Σ p_j²`, the commutant dimension.
    pub total_p2: u128,
    /// `Σ q_j²`, the dimension of the algebra generated by the `J_k`.
    pub total_q2: u128,
    pub warnings: Vec<String>,
}

fn rows_from(pairs: impl Iterator<Item = (HalfInt, u128)>) -> Vec<StructureRow> {
    pairs
        .map(|(j, p)| {
            let q = j.irrep_dim() as u128;
            StructureRow {
                j2: j.twice(),
                p,
                q,
                pq: p * q,
                p2: p * p,
            }
        })
        .collect()
}

impl StructureReport {
    fn assemble(n: usize, d: usize, source: &str, rows: Vec<StructureRow>, weight_dims: Vec<u128>) -> Self {
        let total_pq = rows.iter().map(|r| r.pq).sum();
        let total_p2 = rows.iter().map(|r| r.p2).sum();
        let total_q2 = rows.iter().map(|r| r.q * r.q).sum();
        let warnings = rows
            .iter()
            .filter(|r| r.p == 1)
            .map(|r| format!("j = {} has p = 1 (no nontrivial protected subsystem)", r.j()))
            .collect();
        StructureReport {
            schema_version: SCHEMA_VERSION,
            n,
            d,
            dim: (d as u128).pow(n as u32),
            ns2: top_weight(n, d).twice(),
            source: source.into(),
            rows,
            weight_dims,
            total_pq,
            total_p2,
            total_q2,
            warnings,
        }
    }

    /// From the counting formula alone; no linear algebra.
    pub fn predicted(n: usize, d: usize) -> Result<Self> {
        checked_dim(n, d)?;
        let rows = rows_from(predicted_multiplicities(n, d).into_iter().map(|m| (m.j, m.p)));
        Ok(Self::assemble(n, d, "predicted", rows, weight_dims(n, d)))
    }

    /// From the blocks actually constructed.
    pub fn from_decomposition<T: Real>(decomp: &StructureDecomposition<T>) -> Self {
        let rows = rows_from(decomp.census().into_iter().map(|(j, p)| (j, p as u128)));
        let dims = decomp.weight_spaces.iter().map(|w| w.dim() as u128).collect();
        Self::assemble(decomp.n, decomp.d, "constructed", rows, dims)
    }

    /// Rows and weight dimensions agree (the source tag is ignored).
    pub fn same_structure(&self, other: &Self) -> bool {
        self.n == other.n && self.d == other.d && self.rows == other.rows && self.weight_dims == other.weight_dims
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One record per row: `j,p,q,pq,p2`, with `j` written as `"1/2"` etc.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["j", "p", "q", "pq", "p2"])?;
        for r in &self.rows {
            w.write_record([
                r.j().to_string(),
                r.p.to_string(),
                r.q.to_string(),
                r.pq.to_string(),
                r.p2.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let ns = HalfInt::from_twice(self.ns2);
        let _ = writeln!(s, "n = {}, d = {}, dim = {}, ns = {}", self.n, self.d, self.dim, ns);
        let _ = writeln!(s, "{:>6} {:>8} {:>6} {:>10} {:>10}", "j", "p", "q", "p*q", "p^2");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>6} {:>8} {:>6} {:>10} {:>10}",
                r.j().to_string(),
                r.p,
                r.q,
                r.pq,
                r.p2
            );
        }
        let _ = writeln!(
            s,
            "totals: sum p*q = {}, sum p^2 = {}, sum q^2 = {}",
            self.total_pq, self.total_p2, self.total_q2
        );
        let dims: Vec<String> = self.weight_dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(s, "weight dims (m = {}..{}): {}", -ns, ns, dims.join(" "));
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        if let Some(pic) = self.staircase() {
            s.push('\n');
            s.push_str(&pic);
        }
        s
    }

    /// Bars of `dim V_m` per weight; each `m ≥ 0` line carries the step
    /// `p_m = dim V_m - dim V_{m+1}` that starts the spin-`m` blocks.
    /// `None` when `n` exceeds [`STAIRCASE_MAX_N`].
    pub fn staircase(&self) -> Option<String> {
        if self.n > STAIRCASE_MAX_N || self.weight_dims.is_empty() {
            return None;
        }
        const WIDTH: u128 = 48;
        let top = *self.weight_dims.iter().max()?;
        let ns = HalfInt::from_twice(self.ns2);
        let mut s = String::new();
        for (k, &dm) in self.weight_dims.iter().enumerate() {
            let m = -ns + HalfInt::from_int(k as i64);
            let len = if top <= WIDTH { dm } else { (dm * WIDTH).div_ceil(top) };
            let bar = "#".repeat(len as usize);
            let _ = write!(s, "{:>6} | {:<w$} {:>6}", m.to_string(), bar, dm, w = WIDTH as usize);
            if let Some(r) = self.rows.iter().find(|r| r.j2 == m.twice()) {
                let _ = write!(s, "   j = {}: p = {}", m, r.p);
            }
            s.push('\n');
        }
        Some(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collective::CollectiveSystem;
    use crate::kernel::{Budget, Tolerances};
    use crate::structure::construct_irrep_basis;

    fn triples(r: &StructureReport) -> Vec<(i64, u128, u128)> {
        r.rows.iter().map(|x| (x.j2, x.p, x.q)).collect()
    }

    #[test]
    fn four_qubits() {
        let r = StructureReport::predicted(4, 2).unwrap();
        assert_eq!(triples(&r), vec![(0, 2, 1), (2, 3, 3), (4, 1, 5)]);
        assert_eq!(r.weight_dims, vec![1, 4, 6, 4, 1]);
        assert_eq!((r.total_pq, r.total_p2, r.total_q2), (16, 14, 35));
        let text = r.to_text();
        assert!(text.contains("sum p*q = 16, sum p^2 = 14"));
        assert!(text.contains("j = 1: p = 3"));
    }

    #[test]
    fn other_examples() {
        let r = StructureReport::predicted(1, 5).unwrap();
        assert_eq!(triples(&r), vec![(4, 1, 5)]);
        let r = StructureReport::predicted(3, 3).unwrap();
        assert_eq!(triples(&r), vec![(0, 1, 1), (2, 3, 3), (4, 2, 5), (6, 1, 7)]);
        let csv = StructureReport::predicted(5, 2).unwrap().to_csv().unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().nth(1).unwrap(), "1/2,5,2,10,25");
    }

    #[test]
    fn constructed_matches_predicted() {
        for (n, d) in [(4, 2), (3, 3), (5, 2)] {
            let sys = CollectiveSystem::<f64>::new(n, d).unwrap();
            let dec = construct_irrep_basis(&sys, &Tolerances::default(), &Budget::default()).unwrap();
            let c = StructureReport::from_decomposition(&dec);
            assert!(c.same_structure(&StructureReport::predicted(n, d).unwrap()));
        }
    }

    #[test]
    fn json_round_trip_and_staircase_cap() {
        let r = StructureReport::predicted(6, 2).unwrap();
        let back: StructureReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().unwrap().contains("\"schema_version\": 1"));
        assert!(StructureReport::predicted(12, 2).unwrap().staircase().is_some());
        assert!(StructureReport::predicted(13, 2).unwrap().staircase().is_none());
    }
}
