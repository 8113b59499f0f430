//! Representation-free oracles: the commutant of a generator set by direct
//! linear algebra, algebra dimensions by rank growth, and span comparison.

use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::kernel::{
    column_space, commutator, frobenius_inner, identity, kron, null_space, unvectorize, vectorize, Budget,
    ComplexMatrix, Tolerances,
};
use crate::scalar::{cplx, modulus, Real};
use crate::structure::StructureDecomposition;

/// Frobenius-orthonormal basis of a commutant.
#[derive(Clone, Debug)]
pub struct CommutantBasis<T: Real> {
    pub elements: Vec<ComplexMatrix<T>>,
    /// Free-form tag of the generator set the basis was computed for.
    pub generators: String,
}

impl<T: Real> CommutantBasis<T> {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Max over elements and generators of `||[F, G]|| / (||F|| ||G||)`.
    pub fn commutation_residual(&self, generators: &[ComplexMatrix<T>]) -> T {
        let mut worst = T::zero();
        for f in &self.elements {
            for g in generators {
                let scale = f.norm() * g.norm();
                if scale > T::zero() {
                    worst = worst.max(commutator(f, g).norm() / scale);
                }
            }
        }
        worst
    }

    /// Largest distance from `F†` to the span, over basis elements `F`.
    pub fn adjoint_closure_residual(&self) -> T {
        let mut worst = T::zero();
        for f in &self.elements {
            let fd = f.adjoint();
            let mut r = fd.clone();
            for e in &self.elements {
                r -= e * frobenius_inner(e, &fd);
            }
            worst = worst.max(r.norm());
        }
        worst
    }
}

fn common_dim<T: Real>(mats: &[ComplexMatrix<T>], op: &'static str) -> Result<usize> {
    let n = mats.first().map_or(0, |m| m.nrows());
    for m in mats {
        if m.shape() != (n, n) {
            return Err(Error::ShapeMismatch {
                op,
                left: m.shape(),
                right: (n, n),
            });
        }
    }
    Ok(n)
}

/// Joint kernel of `X ↦ XG - GX` over all generators, through the stacked
/// column-stacked map `Gᵀ ⊗ I - I ⊗ G`.
pub fn brute_force_commutant<T: Real>(
    generators: &[ComplexMatrix<T>],
    tol: &Tolerances<T>,
    budget: &Budget,
) -> Result<CommutantBasis<T>> {
    let n = common_dim(generators, "brute_force_commutant")?;
    Budget::check(budget.max_oracle_dim, n)?;
    let id = identity::<T>(n);
    let nn = n * n;
    let mut stacked = ComplexMatrix::zeros(nn * generators.len(), nn);
    for (k, g) in generators.iter().enumerate() {
        let block = kron(&g.transpose(), &id) - kron(&id, g);
        stacked.view_mut((k * nn, 0), (nn, nn)).copy_from(&block);
    }
    let elements = if generators.is_empty() {
        crate::kernel::standard_basis(nn)
    } else {
        null_space(&stacked, tol)
    }
    .into_iter()
    .map(|v| unvectorize(&v, n))
    .collect();
    Ok(CommutantBasis {
        elements,
        generators: format!("{} generators", generators.len()),
    })
}

/// Result of [`algebra_dimension`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlgebraDimension {
    pub dim: usize,
    /// False when `max_degree` was reached while the span was still growing;
    /// `dim` is then only a lower bound.
    pub stabilized: bool,
    pub degree: usize,
}

/// Dimension of the unital algebra generated by `generators`: span of `I` and
/// all monomials, grown degree by degree until a degree adds nothing.
///
/// `max_degree = None` caps at `2·dim`.
pub fn algebra_dimension<T: Real>(
    generators: &[ComplexMatrix<T>],
    tol: &Tolerances<T>,
    max_degree: Option<usize>,
    budget: &Budget,
) -> Result<AlgebraDimension> {
    let n = common_dim(generators, "algebra_dimension")?.max(1);
    Budget::check(budget.max_oracle_dim, n)?;
    let cap = max_degree.unwrap_or(2 * n);
    let unit = identity::<T>(n) / cplx(T::from_usize_lossy(n).sqrt());
    let mut basis: Vec<ComplexMatrix<T>> = vec![unit.clone()];
    let mut frontier = vec![unit];
    let mut degree = 0;
    while degree < cap && !frontier.is_empty() {
        degree += 1;
        let mut fresh = Vec::new();
        for f in &frontier {
            for g in generators {
                let cand = g * f;
                let scale = cand.norm();
                if scale == T::zero() {
                    continue;
                }
                let mut r = cand;
                for _ in 0..2 {
                    for e in basis.iter().chain(fresh.iter()) {
                        let c = frobenius_inner(e, &r);
                        r -= e * c;
                    }
                }
                let rn = r.norm();
                if rn > tol.verify_tol * scale {
                    fresh.push(r / cplx(rn));
                }
            }
        }
        basis.extend(fresh.iter().cloned());
        frontier = fresh;
    }
    Ok(AlgebraDimension {
        dim: basis.len(),
        stabilized: frontier.is_empty(),
        degree,
    })
}

/// Outcome of [`span_equal`].
#[derive(Clone, Copy, Debug)]
pub struct SpanComparison<T> {
    pub equal: bool,
    /// `||Π_A - Π_B||_F` for the Frobenius-orthogonal projectors onto the spans.
    pub gap: T,
    pub rank_a: usize,
    pub rank_b: usize,
}

fn span_matrix<T: Real>(mats: &[ComplexMatrix<T>], tol: &Tolerances<T>) -> ComplexMatrix<T> {
    let n = mats.first().map_or(0, |m| m.nrows());
    let mut cols = ComplexMatrix::zeros(n * n, mats.len());
    for (i, m) in mats.iter().enumerate() {
        cols.set_column(i, &vectorize(m));
    }
    column_space(&cols, tol)
}

pub fn span_equal<T: Real>(
    a: &[ComplexMatrix<T>],
    b: &[ComplexMatrix<T>],
    tol: &Tolerances<T>,
) -> Result<SpanComparison<T>> {
    let mut all: Vec<ComplexMatrix<T>> = a.to_vec();
    all.extend(b.iter().cloned());
    common_dim(&all, "span_equal")?;
    let qa = span_matrix(a, tol);
    let qb = span_matrix(b, tol);
    // ||Π_A - Π_B||² = ||(I - Π_B) Q_A||² + ||(I - Π_A) Q_B||²
    let gap = if qa.ncols() == 0 || qb.ncols() == 0 {
        T::from_usize_lossy(qa.ncols() + qb.ncols()).sqrt()
    } else {
        let ra = &qa - &qb * (qb.adjoint() * &qa);
        let rb = &qb - &qa * (qa.adjoint() * &qb);
        (ra.norm_squared() + rb.norm_squared()).sqrt()
    };
    let rank = qa.ncols().max(qb.ncols()).max(1);
    Ok(SpanComparison {
        equal: qa.ncols() == qb.ncols() && gap <= tol.verify_tol * T::from_usize_lossy(rank).sqrt(),
        gap,
        rank_a: qa.ncols(),
        rank_b: qb.ncols(),
    })
}

/// The commutant predicted by the block structure: for each `j` and each pair
/// `(μ, μ')`, the matrix unit `Σ_m |j,m,μ⟩⟨j,m,μ'| / √q_j`.
pub fn structural_commutant_basis<T: Real>(
    decomp: &StructureDecomposition<T>,
    budget: &Budget,
) -> Result<CommutantBasis<T>> {
    Budget::check(budget.max_dense_dim, decomp.dim)?;
    let mut elements = Vec::new();
    for b in &decomp.blocks {
        let norm = cplx(T::one() / T::from_usize_lossy(b.q()).sqrt());
        let global: Vec<Vec<_>> = b
            .vectors
            .iter()
            .map(|chain| {
                chain
                    .iter()
                    .enumerate()
                    .map(|(k, v)| decomp.globalize(-b.j + HalfInt::from_int(k as i64), v))
                    .collect()
            })
            .collect();
        for left in &global {
            for right in &global {
                let mut e = ComplexMatrix::zeros(decomp.dim, decomp.dim);
                for (u, v) in left.iter().zip(right) {
                    e += u * v.adjoint();
                }
                elements.push(e * norm);
            }
        }
    }
    Ok(CommutantBasis {
        elements,
        generators: "structural".into(),
    })
}

/// Max `|⟨E_a, E_b⟩ - δ_ab|` over a list of matrices.
pub fn frobenius_orthonormality<T: Real>(elements: &[ComplexMatrix<T>]) -> T {
    let mut worst = T::zero();
    for (i, a) in elements.iter().enumerate() {
        for (j, b) in elements.iter().enumerate().skip(i) {
            let want = if i == j { T::one() } else { T::zero() };
            worst = worst.max(modulus(frobenius_inner(a, b) - cplx(want)));
        }
    }
    worst
}
