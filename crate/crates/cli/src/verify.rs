use std::fmt::Write as _;

use serde::Serialize;

use crc_core::channel::build_channel;
use crc_core::oracle::{brute_force_commutant, span_equal, structural_commutant_basis};
use crc_core::report::SCHEMA_VERSION;
use crc_core::structure::{linked_block_deviation, verify_basis};
use crc_core::{Budget, Decomposition, Error, Matrix, System, Tol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub dim: usize,
    pub checks: Vec<Check>,
    /// Measured by the brute-force oracle; absent when skipped.
    pub commutant_dim: Option<usize>,
    /// `Σ p_j²` from the constructed blocks.
    pub expected_commutant_dim: usize,
}

impl Outcome {
    pub fn first_failure(&self) -> Option<&'static str> {
        self.checks.iter().find(|c| c.status == Status::Fail).map(|c| c.name)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verify n = {}, d = {}, dim = {}", self.n, self.d, self.dim);
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIPPED",
            };
            let _ = write!(s, "{status:<8} {:<28}", c.name);
            if let (Some(r), Some(t)) = (c.residual, c.tolerance) {
                let _ = write!(s, " residual {r:.3e} (tol {t:.1e})");
            }
            if let Some(note) = &c.note {
                let _ = write!(s, " {note}");
            }
            s.push('\n');
        }
        match self.commutant_dim {
            Some(k) => {
                let _ = writeln!(s, "commutant dim: {k} (sum p^2 = {})", self.expected_commutant_dim);
            }
            None => {
                let _ = writeln!(
                    s,
                    "commutant dim: not measured (sum p^2 = {})",
                    self.expected_commutant_dim
                );
            }
        }
        s
    }

    pub fn to_csv(&self) -> Result<String, Error> {
        let mut s = String::from("check,status,residual,tolerance\n");
        for c in &self.checks {
            let status = serde_json::to_value(c.status)?;
            let f = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{}",
                c.name,
                status.as_str().unwrap_or_default(),
                f(c.residual),
                f(c.tolerance)
            );
        }
        Ok(s)
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn measured(&mut self, name: &'static str, residual: f64, tolerance: f64) {
        let status = if residual <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        self.0.push(Check {
            name,
            status,
            residual: Some(residual),
            tolerance: Some(tolerance),
            note: None,
        });
    }

    fn flag(&mut self, name: &'static str, ok: bool, note: String) {
        self.0.push(Check {
            name,
            status: if ok { Status::Pass } else { Status::Fail },
            residual: None,
            tolerance: None,
            note: Some(note),
        });
    }

    fn skipped(&mut self, name: &'static str, dim: usize, limit: usize) {
        self.0.push(Check {
            name,
            status: Status::Skipped,
            residual: None,
            tolerance: None,
            note: Some(format!("dimension {dim} exceeds budget {limit}")),
        });
    }
}

pub fn run(
    sys: &System,
    decomp: &Decomposition,
    thetas: Option<[f64; 3]>,
    tol: &Tol,
    budget: &Budget,
) -> Result<Outcome, Error> {
    let dim = sys.dim;
    let vt = tol.verify_tol;
    let op_tol = vt * dim as f64;
    let mut c = Checks(Vec::new());

    c.measured("su2-relations", sys.su2_residual()?, op_tol);
    c.measured("casimir-commutes", sys.casimir_commutator_residual()?, op_tol);

    let dense_ok = dim <= budget.max_dense_dim;
    let channel = if dense_ok {
        let ch = build_channel(sys.clone(), thetas, tol, budget)?;
        c.measured("trace-preservation", ch.trace_preservation_residual(), op_tol);
        c.measured("unitality", ch.unitality_residual(), op_tol);
        Some(ch)
    } else {
        c.skipped("trace-preservation", dim, budget.max_dense_dim);
        c.skipped("unitality", dim, budget.max_dense_dim);
        None
    };

    let inv = verify_basis(decomp, sys)?;
    c.flag(
        "block-census",
        inv.census_matches,
        format!("{} vectors in {} blocks", inv.vector_count, decomp.blocks.len()),
    );
    c.measured("orthonormality", inv.orthonormality, vt);
    if dense_ok {
        let u = decomp.unitary(budget)?;
        let dev = (u.adjoint() * &u - Matrix::identity(dim, dim)).camax();
        c.measured("unitarity", dev, op_tol);
    } else {
        c.skipped("unitarity", dim, budget.max_dense_dim);
    }
    c.measured("jz-eigenvalues", inv.jz_eigen, vt);
    c.measured("casimir-eigenvalues", inv.casimir_eigen, vt);
    c.measured("casimir-constancy", inv.casimir_variance, vt);
    c.measured(
        "ladder-shifts",
        inv.raising_shift.max(inv.lowering_shift).max(inv.max_shift_phase),
        vt,
    );
    c.flag(
        "shift-weights-positive",
        inv.min_shift_weight > 0.0,
        format!("min weight {:.6}", inv.min_shift_weight),
    );
    c.measured("annihilation", inv.annihilation, vt);

    let expected: usize = decomp.blocks.iter().map(|b| b.p() * b.p()).sum();
    let mut commutant_dim = None;
    match channel {
        Some(ch) if dim <= budget.max_oracle_dim => {
            let [x, y, z] = sys.dense_generators();
            let brute = brute_force_commutant(&[x, y, z], tol, budget)?;
            let fixed = ch.fixed_point_basis(tol, budget)?;
            let structural = structural_commutant_basis(decomp, budget)?;
            commutant_dim = Some(brute.len());
            let fb = span_equal(&fixed, &brute.elements, tol)?;
            let bs = span_equal(&brute.elements, &structural.elements, tol)?;
            let fs = span_equal(&fixed, &structural.elements, tol)?;
            let gap = fb.gap.max(bs.gap).max(fs.gap);
            let span_tol = vt * (expected.max(1) as f64).sqrt();
            let equal = fb.equal && bs.equal && fs.equal;
            c.0.push(Check {
                name: "fixed-points-equal-commutant",
                status: if equal { Status::Pass } else { Status::Fail },
                residual: Some(gap),
                tolerance: Some(span_tol),
                note: None,
            });
            c.flag(
                "commutant-dimension",
                brute.len() == expected && fixed.len() == expected && structural.len() == expected,
                format!(
                    "fixed {} / brute {} / structural {} / sum p^2 {}",
                    fixed.len(),
                    brute.len(),
                    structural.len(),
                    expected
                ),
            );
        }
        _ => {
            c.skipped("fixed-points-equal-commutant", dim, budget.max_oracle_dim);
            c.skipped("commutant-dimension", dim, budget.max_oracle_dim);
        }
    }

    if dense_ok {
        c.measured("linked-blocks", linked_block_deviation(decomp, sys, 3, 2)?, vt);
    } else {
        c.skipped("linked-blocks", dim, budget.max_dense_dim);
    }

    Ok(Outcome {
        schema_version: SCHEMA_VERSION,
        n: sys.n,
        d: sys.d,
        dim,
        checks: c.0,
        commutant_dim,
        expected_commutant_dim: expected,
    })
}
