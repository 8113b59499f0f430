//! Weight spaces, multiplicity prediction and the ladder construction of the
//! `|j, m, μ⟩` basis.
//!
//! The sweep runs `m = -ns, …, ns`. At each weight it raises every vector
//! found at `m - 1` with `J_+` (normalizing as it goes), then takes the
//! orthocomplement of those raised vectors inside `V_m`; for `m ≤ 0` the
//! complement seeds the lowest-weight vectors of the `p_{-m}` new blocks with
//! `j = -m`. Vectors are stored in the local coordinates of their weight
//! space, so memory stays at `Σ_m (dim V_m)^2` instead of `(d^n)^2`.

use nalgebra::{Complex, ComplexField};

use crate::collective::{checked_dim, CollectiveSystem};
use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::kernel::{
    complement_in_coords, hermitian_eigen, Budget, ComplexMatrix, ComplexVector, SparseOperator, Tolerances,
};
use crate::scalar::{cplx, modulus, Real};

/// Eigenspace `V_m` of `J_z`: the computational states of total weight `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSpace {
    pub m: HalfInt,
    /// Sorted ascending.
    pub indices: Vec<usize>,
}

impl WeightSpace {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }
}

/// `n·s` as a half-integer.
pub fn top_weight(n: usize, d: usize) -> HalfInt {
    HalfInt::from_twice(n as i64 * (d as i64 - 1))
}

pub fn weight_decomposition(n: usize, d: usize, budget: &Budget) -> Result<Vec<WeightSpace>> {
    let dim = checked_dim(n, d)?;
    Budget::check(budget.max_dim, dim)?;
    let ns = top_weight(n, d);
    let count = ns.twice() as usize + 1;
    let mut spaces: Vec<WeightSpace> = (0..count)
        .map(|k| WeightSpace {
            m: HalfInt::from_int(k as i64) - ns,
            indices: Vec::new(),
        })
        .collect();
    for idx in 0..dim {
        let mut rest = idx;
        let mut level = 0usize;
        for _ in 0..n {
            level += rest % d;
            rest /= d;
        }
        spaces[level].indices.push(idx);
    }
    Ok(spaces)
}

/// Number of tuples `(i_1, …, i_n)` with `i_k ∈ {-s, …, s}` summing to each
/// weight, listed from `m = -ns` upward. Dynamic-programming convolution.
pub fn weight_dims(n: usize, d: usize) -> Vec<u128> {
    let mut counts = vec![1u128];
    for _ in 0..n {
        let mut next = vec![0u128; counts.len() + d - 1];
        for (k, &c) in counts.iter().enumerate() {
            for slot in next.iter_mut().skip(k).take(d) {
                *slot += c;
            }
        }
        counts = next;
    }
    counts
}

/// `dim V_m`.
pub fn weight_dim(n: usize, d: usize, m: HalfInt) -> Result<u128> {
    let ns = top_weight(n, d);
    let offset = (m + ns).twice();
    if m.abs() > ns || offset % 2 != 0 {
        return Err(Error::OutOfRange { m, ns });
    }
    Ok(weight_dims(n, d)[(offset / 2) as usize])
}

pub fn binomial(n: u64, k: i64) -> u128 {
    if k < 0 || k as u64 > n {
        return 0;
    }
    let k = (k as u64).min(n - k as u64);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Copies `p` and dimension `q = 2j + 1` of the spin-`j` irrep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Multiplicity {
    pub j: HalfInt,
    pub p: u128,
    pub q: u128,
}

/// `p_j = dim V_j - dim V_{j+1}` for `j` in `{ns mod 1, …, ns}`. Spins with
/// `p_j = 0` (possible for `d ≥ 3`) are omitted.
pub fn predicted_multiplicities(n: usize, d: usize) -> Vec<Multiplicity> {
    let dims = weight_dims(n, d);
    let ns = top_weight(n, d);
    let at = |m: HalfInt| -> u128 {
        let k = (m + ns).twice();
        if k < 0 || k as usize / 2 >= dims.len() {
            0
        } else {
            dims[k as usize / 2]
        }
    };
    let lowest = HalfInt::from_twice(ns.twice() % 2);
    lowest
        .range_to(ns)
        .map(|j| Multiplicity {
            j,
            p: at(j) - at(j + HalfInt::ONE),
            q: j.irrep_dim() as u128,
        })
        .filter(|mu| mu.p > 0)
        .collect()
}

/// One spin-`j` isotypic component: `p` orthonormal copies of the irrep.
#[derive(Clone, Debug)]
pub struct IrrepBlock<T: Real> {
    pub j: HalfInt,
    /// `vectors[μ][k]` is the unit vector with weight `m = -j + k`, in the
    /// local coordinates of that weight space.
    pub vectors: Vec<Vec<ComplexVector<T>>>,
}

impl<T: Real> IrrepBlock<T> {
    pub fn p(&self) -> usize {
        self.vectors.len()
    }

    pub fn q(&self) -> usize {
        self.j.irrep_dim()
    }
}

#[derive(Clone, Debug)]
pub struct StructureDecomposition<T: Real> {
    pub n: usize,
    pub d: usize,
    pub dim: usize,
    pub ns: HalfInt,
    pub weight_spaces: Vec<WeightSpace>,
    /// Ascending `j`.
    pub blocks: Vec<IrrepBlock<T>>,
    /// Number of weights at which the raised family had to be re-orthonormalized.
    pub reorthonormalizations: usize,
    pub tol: Tolerances<T>,
    position: Vec<usize>,
}

/// Local `J_+ : V_m → V_{m+1}` maps, indexed by the source weight.
fn local_raising<T: Real>(
    sys: &CollectiveSystem<T>,
    spaces: &[WeightSpace],
    position: &[usize],
) -> Vec<SparseOperator<T>> {
    let ns = sys.ns;
    let level = |idx: usize| ((sys.weight_of_index(idx) + ns).twice() / 2) as usize;
    let mut trip: Vec<Vec<(usize, usize, Complex<T>)>> = vec![Vec::new(); spaces.len()];
    for (r, c, v) in sys.jplus.entries() {
        trip[level(c)].push((position[r], position[c], v));
    }
    trip.into_iter()
        .enumerate()
        .map(|(k, t)| {
            let rows = spaces.get(k + 1).map_or(0, |s| s.dim());
            SparseOperator::from_triplets(rows, spaces[k].dim(), t, T::zero())
        })
        .collect()
}

/// Modified Gram–Schmidt (two passes) on an already nearly orthonormal family.
fn reorthonormalize<T: Real>(family: &mut [ComplexVector<T>]) {
    for i in 0..family.len() {
        for _ in 0..2 {
            for k in 0..i {
                let (head, tail) = family.split_at_mut(i);
                let proj = head[k].dotc(&tail[0]);
                tail[0] -= &head[k] * proj;
            }
        }
        let nrm = family[i].norm();
        family[i] /= cplx(nrm);
    }
}

fn gram_deviation<T: Real>(family: &[ComplexVector<T>]) -> T {
    let mut worst = T::zero();
    for (a, u) in family.iter().enumerate() {
        for (b, v) in family.iter().enumerate().skip(a) {
            let g = u.dotc(v);
            let target = if a == b { cplx(T::one()) } else { cplx(T::zero()) };
            worst = worst.max(modulus(g - target));
        }
    }
    worst
}

pub fn construct_irrep_basis<T: Real>(
    sys: &CollectiveSystem<T>,
    tol: &Tolerances<T>,
    budget: &Budget,
) -> Result<StructureDecomposition<T>> {
    tol.validate()?;
    let spaces = weight_decomposition(sys.n, sys.d, budget)?;
    let mut position = vec![0usize; sys.dim];
    for ws in &spaces {
        for (p, &idx) in ws.indices.iter().enumerate() {
            position[idx] = p;
        }
    }
    let raise = local_raising(sys, &spaces, &position);
    let predicted = predicted_multiplicities(sys.n, sys.d);
    let expected_new = |m: HalfInt| -> usize { predicted.iter().find(|mu| mu.j == -m).map_or(0, |mu| mu.p as usize) };

    // Blocks are opened from the top spin down; sorted at the end.
    let mut blocks: Vec<IrrepBlock<T>> = Vec::new();
    let mut reorth = 0usize;
    for (k, ws) in spaces.iter().enumerate() {
        let m = ws.m;
        let mut owners: Vec<(usize, usize)> = Vec::new();
        let mut lifted: Vec<ComplexVector<T>> = Vec::new();
        if k > 0 {
            for (b, block) in blocks.iter().enumerate() {
                if block.j < m {
                    continue;
                }
                for (mu, chain) in block.vectors.iter().enumerate() {
                    let prev = chain.last().expect("block chains are never empty");
                    let w = raise[k - 1].apply(prev)?;
                    let nrm = w.norm();
                    if nrm <= tol.rank_tol {
                        return Err(Error::LiftCollapse {
                            j: block.j,
                            m,
                            norm: nrm.to_f64_lossy(),
                        });
                    }
                    owners.push((b, mu));
                    lifted.push(w / cplx(nrm));
                }
            }
            if gram_deviation(&lifted) > tol.rank_tol {
                reorthonormalize(&mut lifted);
                reorth += 1;
            }
        }

        if m <= HalfInt::ZERO {
            let fresh = complement_in_coords(&lifted, ws.dim(), tol)?;
            let expected = expected_new(m);
            if fresh.len() != expected {
                return Err(Error::RankMismatch {
                    m,
                    expected,
                    found: fresh.len(),
                });
            }
            if !fresh.is_empty() {
                blocks.push(IrrepBlock {
                    j: -m,
                    vectors: fresh.into_iter().map(|v| vec![v]).collect(),
                });
            }
        } else if lifted.len() != ws.dim() {
            return Err(Error::RankMismatch {
                m,
                expected: 0,
                found: ws.dim().saturating_sub(lifted.len()),
            });
        }

        for ((b, mu), w) in owners.into_iter().zip(lifted) {
            blocks[b].vectors[mu].push(w);
        }
    }
    blocks.sort_by_key(|b| b.j);

    Ok(StructureDecomposition {
        n: sys.n,
        d: sys.d,
        dim: sys.dim,
        ns: sys.ns,
        weight_spaces: spaces,
        blocks,
        reorthonormalizations: reorth,
        tol: *tol,
        position,
    })
}

/// Position of a basis vector among the columns of `U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ColumnLabel {
    pub j: HalfInt,
    /// 1-based copy index.
    pub mu: usize,
    pub m: HalfInt,
}

impl<T: Real> StructureDecomposition<T> {
    pub fn block(&self, j: HalfInt) -> Option<&IrrepBlock<T>> {
        self.blocks.iter().find(|b| b.j == j)
    }

    /// `(j, p_j)` census of the constructed blocks.
    pub fn census(&self) -> Vec<(HalfInt, usize)> {
        self.blocks.iter().map(|b| (b.j, b.p())).collect()
    }

    pub fn vector_count(&self) -> usize {
        self.blocks.iter().map(|b| b.p() * b.q()).sum()
    }

    fn level(&self, m: HalfInt) -> usize {
        ((m + self.ns).twice() / 2) as usize
    }

    /// Local coordinate of computational index `idx` inside its weight space.
    pub fn local_position(&self, idx: usize) -> usize {
        self.position[idx]
    }

    /// Scatter a weight-local vector into the full `d^n` space.
    pub fn globalize(&self, m: HalfInt, local: &ComplexVector<T>) -> ComplexVector<T> {
        let ws = &self.weight_spaces[self.level(m)];
        let mut out = ComplexVector::zeros(self.dim);
        for (p, &idx) in ws.indices.iter().enumerate() {
            out[idx] = local[p];
        }
        out
    }

    /// `|j, m, μ⟩` with `μ` 1-based.
    pub fn vector(&self, j: HalfInt, mu: usize, m: HalfInt) -> Option<ComplexVector<T>> {
        let b = self.block(j)?;
        if mu == 0 || mu > b.p() || m.abs() > j || (m + j).twice() % 2 != 0 {
            return None;
        }
        let k = ((m + j).twice() / 2) as usize;
        Some(self.globalize(m, &b.vectors[mu - 1][k]))
    }

    /// Column labels of `U` in order: `j` ascending, then `μ`, then `m`.
    pub fn column_labels(&self) -> Vec<ColumnLabel> {
        let mut out = Vec::with_capacity(self.dim);
        for b in &self.blocks {
            for mu in 1..=b.p() {
                for m in (-b.j).range_to(b.j) {
                    out.push(ColumnLabel { j: b.j, mu, m });
                }
            }
        }
        out
    }

    /// All basis vectors of the spin-`j` block as columns, `(μ, m)` order.
    pub fn block_columns(&self, j: HalfInt) -> Result<ComplexMatrix<T>> {
        let b = self.block(j).ok_or(Error::UnknownBlock(j))?;
        let mut cols = ComplexMatrix::zeros(self.dim, b.p() * b.q());
        let mut c = 0;
        for chain in &b.vectors {
            for (k, v) in chain.iter().enumerate() {
                let m = -b.j + HalfInt::from_int(k as i64);
                cols.set_column(c, &self.globalize(m, v));
                c += 1;
            }
        }
        Ok(cols)
    }

    /// The unitary whose columns are the `|j, m, μ⟩` in [`Self::column_labels`] order.
    pub fn unitary(&self, budget: &Budget) -> Result<ComplexMatrix<T>> {
        Budget::check(budget.max_dense_dim, self.dim)?;
        let mut u = ComplexMatrix::zeros(self.dim, self.dim);
        let mut c = 0;
        for b in &self.blocks {
            let cols = self.block_columns(b.j)?;
            u.view_mut((0, c), (self.dim, cols.ncols())).copy_from(&cols);
            c += cols.ncols();
        }
        Ok(u)
    }

    /// Max `|⟨u, v⟩ - δ|` over all basis pairs. Distinct weights are orthogonal
    /// by construction, so only same-weight Gram matrices are formed.
    pub fn orthonormality_deviation(&self) -> T {
        let mut per_weight: Vec<Vec<&ComplexVector<T>>> = vec![Vec::new(); self.weight_spaces.len()];
        for b in &self.blocks {
            for chain in &b.vectors {
                for (k, v) in chain.iter().enumerate() {
                    let m = -b.j + HalfInt::from_int(k as i64);
                    per_weight[self.level(m)].push(v);
                }
            }
        }
        let mut worst = T::zero();
        for (level, family) in per_weight.iter().enumerate() {
            if family.len() != self.weight_spaces[level].dim() {
                return T::one();
            }
            let mut mat = ComplexMatrix::zeros(family.first().map_or(0, |v| v.len()), family.len());
            for (c, v) in family.iter().enumerate() {
                mat.set_column(c, v);
            }
            let gram = mat.adjoint() * &mat;
            for r in 0..gram.nrows() {
                for c in 0..gram.ncols() {
                    let target = if r == c { T::one() } else { T::zero() };
                    worst = worst.max(modulus(gram[(r, c)] - cplx(target)));
                }
            }
        }
        worst
    }
}

/// `P_j = Σ_{μ,m} |j,m,μ⟩⟨j,m,μ|` for every block.
pub fn central_projections<T: Real>(
    decomp: &StructureDecomposition<T>,
    budget: &Budget,
) -> Result<Vec<(HalfInt, ComplexMatrix<T>)>> {
    Budget::check(budget.max_dense_dim, decomp.dim)?;
    decomp
        .blocks
        .iter()
        .map(|b| {
            let cols = decomp.block_columns(b.j)?;
            Ok((b.j, &cols * cols.adjoint()))
        })
        .collect()
}

/// Spectral projection of the dense Casimir onto eigenvalue `j(j+1)`.
pub fn casimir_spectral_projection<T: Real>(
    sys: &CollectiveSystem<T>,
    j: HalfInt,
    budget: &Budget,
) -> Result<ComplexMatrix<T>> {
    Budget::check(budget.max_dense_dim, sys.dim)?;
    let (vals, vecs) = hermitian_eigen(&sys.casimir_by_definition());
    let jr: T = j.to_real();
    let target = jr * (jr + T::one());
    // Distinct Casimir eigenvalues differ by at least 3/4.
    let window = T::lit(0.25);
    let mut p = ComplexMatrix::zeros(sys.dim, sys.dim);
    for (i, &l) in vals.iter().enumerate() {
        if (l - target).abs() < window {
            let u = vecs.column(i);
            p += u * u.adjoint();
        }
    }
    Ok(p)
}

/// `U†AU` split along the spin blocks.
#[derive(Clone, Debug)]
pub struct BlockConjugation<T: Real> {
    /// Diagonal block for each `j`, of size `p_j q_j`, in `(μ, m)` order.
    pub blocks: Vec<(HalfInt, ComplexMatrix<T>)>,
    /// Frobenius norm of everything outside the block diagonal.
    pub residual: T,
    /// Max over `j` of the departure from the `1_{p_j} ⊗ B` pattern: unequal
    /// diagonal μ-sub-blocks or nonzero off-diagonal ones.
    pub ampliation_deviation: T,
}

pub fn conjugate_to_blocks<T: Real>(
    decomp: &StructureDecomposition<T>,
    a: &ComplexMatrix<T>,
    budget: &Budget,
) -> Result<BlockConjugation<T>> {
    if a.shape() != (decomp.dim, decomp.dim) {
        return Err(Error::ShapeMismatch {
            op: "conjugate_to_blocks",
            left: a.shape(),
            right: (decomp.dim, decomp.dim),
        });
    }
    let u = decomp.unitary(budget)?;
    let c = u.adjoint() * a * &u;
    let total_sq = c.norm_squared();
    let mut inside_sq = T::zero();
    let mut blocks = Vec::new();
    let mut ampl = T::zero();
    let mut start = 0;
    for b in &decomp.blocks {
        let (p, q) = (b.p(), b.q());
        let size = p * q;
        let blk = c.view((start, start), (size, size)).into_owned();
        inside_sq += blk.norm_squared();
        let sub = |x: usize, y: usize| blk.view((x * q, y * q), (q, q)).into_owned();
        let first = sub(0, 0);
        for x in 0..p {
            for y in 0..p {
                let dev = if x == y {
                    (sub(x, y) - &first).norm()
                } else {
                    sub(x, y).norm()
                };
                ampl = ampl.max(dev);
            }
        }
        blocks.push((b.j, blk));
        start += size;
    }
    let residual = (total_sq - inside_sq).max(T::zero()).sqrt();
    Ok(BlockConjugation {
        blocks,
        residual,
        ampliation_deviation: ampl,
    })
}

/// Measured residuals of the basis invariants.
#[derive(Clone, Debug)]
pub struct BasisInvariants<T> {
    pub census_matches: bool,
    pub vector_count: usize,
    pub orthonormality: T,
    /// Max `||J_z v - m v||`.
    pub jz_eigen: T,
    /// Max `||J² v - j(j+1) v||`.
    pub casimir_eigen: T,
    /// Max `||J_+ v_m - c v_{m+1}||` with `c = ⟨v_{m+1}, J_+ v_m⟩`.
    pub raising_shift: T,
    /// Max `||J_- v_m - c v_{m-1}||`.
    pub lowering_shift: T,
    /// Smallest real part and largest |imaginary part| of the raising weights `c`.
    pub min_shift_weight: T,
    pub max_shift_phase: T,
    /// Max of `||J_+ v_j||` and `||J_- v_{-j}||`.
    pub annihilation: T,
    /// Max over blocks of the spread of `⟨v, J² v⟩`.
    pub casimir_variance: T,
}

impl<T: Real> BasisInvariants<T> {
    /// All eigen/shift residuals within `tol`, census exact, shift weights positive.
    pub fn holds(&self, tol: T) -> bool {
        self.census_matches
            && self.orthonormality <= tol
            && self.jz_eigen <= tol
            && self.casimir_eigen <= tol
            && self.raising_shift <= tol
            && self.lowering_shift <= tol
            && self.min_shift_weight > T::zero()
            && self.max_shift_phase <= tol
            && self.annihilation <= tol
            && self.casimir_variance <= tol
    }
}

pub fn verify_basis<T: Real>(
    decomp: &StructureDecomposition<T>,
    sys: &CollectiveSystem<T>,
) -> Result<BasisInvariants<T>> {
    let predicted: Vec<(HalfInt, usize)> = predicted_multiplicities(decomp.n, decomp.d)
        .into_iter()
        .map(|m| (m.j, m.p as usize))
        .collect();
    let mut inv = BasisInvariants {
        census_matches: predicted == decomp.census() && decomp.vector_count() == decomp.dim,
        vector_count: decomp.vector_count(),
        orthonormality: decomp.orthonormality_deviation(),
        jz_eigen: T::zero(),
        casimir_eigen: T::zero(),
        raising_shift: T::zero(),
        lowering_shift: T::zero(),
        min_shift_weight: T::max_value().unwrap_or_else(T::one),
        max_shift_phase: T::zero(),
        annihilation: T::zero(),
        casimir_variance: T::zero(),
    };
    for b in &decomp.blocks {
        let jr: T = b.j.to_real();
        let cas = cplx(jr * (jr + T::one()));
        let mut lo = T::max_value().unwrap_or_else(T::one);
        let mut hi = T::min_value().unwrap_or_else(|| -T::one());
        for chain in &b.vectors {
            let global: Vec<ComplexVector<T>> = chain
                .iter()
                .enumerate()
                .map(|(k, v)| decomp.globalize(-b.j + HalfInt::from_int(k as i64), v))
                .collect();
            for (k, v) in global.iter().enumerate() {
                let m: T = (-b.j + HalfInt::from_int(k as i64)).to_real();
                let jz = sys.jz.apply(v)?;
                inv.jz_eigen = inv.jz_eigen.max((jz - v * cplx(m)).norm());
                let j2 = sys.jsq.apply(v)?;
                let expect = ComplexField::real(v.dotc(&j2));
                lo = lo.min(expect);
                hi = hi.max(expect);
                inv.casimir_eigen = inv.casimir_eigen.max((j2 - v * cas).norm());

                let up = sys.jplus.apply(v)?;
                match global.get(k + 1) {
                    Some(next) => {
                        let c = next.dotc(&up);
                        inv.min_shift_weight = inv.min_shift_weight.min(c.re);
                        inv.max_shift_phase = inv.max_shift_phase.max(c.im.abs());
                        inv.raising_shift = inv.raising_shift.max((up - next * c).norm());
                    }
                    None => inv.annihilation = inv.annihilation.max(up.norm()),
                }
                let down = sys.jminus.apply(v)?;
                match k.checked_sub(1) {
                    Some(prev) => {
                        let c = global[prev].dotc(&down);
                        inv.lowering_shift = inv.lowering_shift.max((down - &global[prev] * c).norm());
                    }
                    None => inv.annihilation = inv.annihilation.max(down.norm()),
                }
            }
        }
        inv.casimir_variance = inv.casimir_variance.max(hi - lo);
    }
    if decomp.blocks.iter().all(|b| b.j == HalfInt::ZERO) {
        inv.min_shift_weight = T::one();
    }
    Ok(inv)
}

/// Word over `{J_+, J_-, J_z}` applied right-to-left.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Raise,
    Lower,
    Z,
}

fn apply_word<T: Real>(sys: &CollectiveSystem<T>, word: &[Ladder], v: &ComplexVector<T>) -> Result<ComplexVector<T>> {
    let mut w = v.clone();
    for l in word.iter().rev() {
        w = match l {
            Ladder::Raise => sys.jplus.apply(&w)?,
            Ladder::Lower => sys.jminus.apply(&w)?,
            Ladder::Z => sys.jz.apply(&w)?,
        };
    }
    Ok(w)
}

/// All words of length `0..=max_len`.
pub fn ladder_words(max_len: usize) -> Vec<Vec<Ladder>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for l in [Ladder::Raise, Ladder::Lower, Ladder::Z] {
                let mut x: Vec<Ladder> = w.clone();
                x.push(l);
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Max over blocks, weights, words `A` (length ≤ `max_len`) and powers
/// `p1, p2 ≤ max_power` of the spread across `μ` of
/// `⟨j,m,μ| J_-^{p1} A J_+^{p2} |j,m,μ⟩`.
pub fn linked_block_deviation<T: Real>(
    decomp: &StructureDecomposition<T>,
    sys: &CollectiveSystem<T>,
    max_len: usize,
    max_power: usize,
) -> Result<T> {
    let words = ladder_words(max_len);
    let mut worst = T::zero();
    for b in &decomp.blocks {
        if b.p() < 2 {
            continue;
        }
        for k in 0..b.q() {
            let m = -b.j + HalfInt::from_int(k as i64);
            let vs: Vec<ComplexVector<T>> = b.vectors.iter().map(|chain| decomp.globalize(m, &chain[k])).collect();
            // bra side: J_+^{p1} v, ket side: J_+^{p2} v
            let mut powers: Vec<Vec<ComplexVector<T>>> = Vec::new();
            for v in &vs {
                let mut row = vec![v.clone()];
                for _ in 0..max_power {
                    let next = sys.jplus.apply(row.last().expect("nonempty"))?;
                    row.push(next);
                }
                powers.push(row);
            }
            for word in &words {
                for p2 in 0..=max_power {
                    let kets: Vec<ComplexVector<T>> = powers
                        .iter()
                        .map(|row| apply_word(sys, word, &row[p2]))
                        .collect::<Result<_>>()?;
                    for p1 in 0..=max_power {
                        let first = powers[0][p1].dotc(&kets[0]);
                        for (row, ket) in powers.iter().zip(&kets).skip(1) {
                            worst = worst.max(modulus(row[p1].dotc(ket) - first));
                        }
                    }
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::frobenius_dist;

    type Sys = CollectiveSystem<f64>;

    fn mults(n: usize, d: usize) -> Vec<(i64, u128, u128)> {
        predicted_multiplicities(n, d)
            .into_iter()
            .map(|m| (m.j.twice(), m.p, m.q))
            .collect()
    }

    /// Brute-force count of weight tuples, independent of the DP.
    fn enumerate_weight_dims(n: usize, d: usize) -> Vec<u128> {
        let mut counts = vec![0u128; n * (d - 1) + 1];
        for idx in 0..d.pow(n as u32) {
            let mut rest = idx;
            let mut lvl = 0;
            for _ in 0..n {
                lvl += rest % d;
                rest /= d;
            }
            counts[lvl] += 1;
        }
        counts
    }

    #[test]
    fn weight_decomposition_examples() {
        let b = Budget::default();
        let dims = |n, d| -> Vec<usize> {
            weight_decomposition(n, d, &b)
                .unwrap()
                .iter()
                .map(|w| w.dim())
                .collect()
        };
        assert_eq!(dims(4, 2), vec![1, 4, 6, 4, 1]);
        assert_eq!(dims(2, 3), vec![1, 2, 3, 2, 1]);
        for d in 2..6 {
            assert!(dims(1, d).iter().all(|&x| x == 1));
        }
        let ws = weight_decomposition(3, 3, &b).unwrap();
        let mut all: Vec<usize> = ws.iter().flat_map(|w| w.indices.clone()).collect();
        all.sort();
        assert_eq!(all, (0..27).collect::<Vec<_>>());
        assert!(ws.iter().all(|w| w.indices.windows(2).all(|p| p[0] < p[1])));
    }

    #[test]
    fn weight_dim_examples() {
        assert_eq!(weight_dim(4, 2, HalfInt::ZERO).unwrap(), 6);
        assert_eq!(weight_dim(3, 3, HalfInt::ZERO).unwrap(), 7);
        for (n, d) in [(3usize, 2usize), (4, 3), (5, 4)] {
            let ns = top_weight(n, d);
            assert_eq!(weight_dim(n, d, ns).unwrap(), 1);
            assert!(matches!(
                weight_dim(n, d, ns + HalfInt::ONE),
                Err(Error::OutOfRange { .. })
            ));
        }
        assert!(weight_dim(3, 2, HalfInt::ZERO).is_err());
        for (n, d) in [(1usize, 2usize), (5, 2), (3, 3), (4, 4), (3, 5)] {
            assert_eq!(weight_dims(n, d), enumerate_weight_dims(n, d));
        }
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(mults(4, 2), vec![(0, 2, 1), (2, 3, 3), (4, 1, 5)]);
        assert_eq!(mults(3, 2), vec![(1, 2, 2), (3, 1, 4)]);
        assert_eq!(mults(3, 3), vec![(0, 1, 1), (2, 3, 3), (4, 2, 5), (6, 1, 7)]);
        assert_eq!(mults(1, 5), vec![(4, 1, 5)]);
        for n in 1..=12usize {
            let total: u128 = predicted_multiplicities(n, 2).iter().map(|m| m.p * m.q).sum();
            assert_eq!(total, 1u128 << n);
        }
    }

    #[test]
    fn two_qubit_basis() {
        let sys = Sys::new(2, 2).unwrap();
        let dec = construct_irrep_basis(&sys, &Tolerances::default(), &Budget::default()).unwrap();
        assert_eq!(dec.census(), vec![(HalfInt::ZERO, 1), (HalfInt::ONE, 1)]);
        let r = 1.0 / 2f64.sqrt();
        let singlet = dec.vector(HalfInt::ZERO, 1, HalfInt::ZERO).unwrap();
        let want = ComplexVector::from_vec(
            vec![0.0, r, -r, 0.0]
                .into_iter()
                .map(|x| Complex::new(x, 0.0))
                .collect(),
        );
        assert!((singlet - want).norm() < 1e-12);
        let mid = dec.vector(HalfInt::ONE, 1, HalfInt::ZERO).unwrap();
        let want = ComplexVector::from_vec(vec![0.0, r, r, 0.0].into_iter().map(|x| Complex::new(x, 0.0)).collect());
        assert!((mid - want).norm() < 1e-12);
        let top = dec.vector(HalfInt::ONE, 1, HalfInt::ONE).unwrap();
        assert!((top[3] - Complex::new(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(dec.reorthonormalizations, 0);
    }

    #[test]
    fn single_qubit_is_identity() {
        let sys = Sys::new(1, 2).unwrap();
        let dec = construct_irrep_basis(&sys, &Tolerances::default(), &Budget::default()).unwrap();
        assert_eq!(dec.census(), vec![(HalfInt::HALF, 1)]);
        let u = dec.unitary(&Budget::default()).unwrap();
        assert!(frobenius_dist(&u, &crate::kernel::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn four_qubit_census_and_projections() {
        let sys = Sys::new(4, 2).unwrap();
        let b = Budget::default();
        let dec = construct_irrep_basis(&sys, &Tolerances::default(), &b).unwrap();
        assert_eq!(
            dec.census(),
            vec![(HalfInt::ZERO, 2), (HalfInt::ONE, 3), (HalfInt::from_int(2), 1)]
        );
        let proj = central_projections(&dec, &b).unwrap();
        let ranks: Vec<f64> = proj.iter().map(|(_, p)| p.trace().re).collect();
        for (r, want) in ranks.iter().zip([2.0, 9.0, 5.0]) {
            assert!((r - want).abs() < 1e-10);
        }
        let mut sum = ComplexMatrix::<f64>::zeros(16, 16);
        for (j, p) in &proj {
            sum += p;
            let spec = casimir_spectral_projection(&sys, *j, &b).unwrap();
            assert!(frobenius_dist(p, &spec).unwrap() < 1e-9);
            for (j2, p2) in &proj {
                if j2 != j {
                    assert!((p * p2).norm() < 1e-10);
                }
            }
        }
        assert!(frobenius_dist(&sum, &crate::kernel::identity(16)).unwrap() < 1e-10);
    }

    #[test]
    fn invariants_hold_small_systems() {
        for (n, d) in [(1usize, 2usize), (2, 2), (3, 2), (5, 2), (1, 3), (2, 3), (3, 3), (2, 4)] {
            let sys = Sys::new(n, d).unwrap();
            let dec = construct_irrep_basis(&sys, &Tolerances::default(), &Budget::default()).unwrap();
            let inv = verify_basis(&dec, &sys).unwrap();
            assert!(inv.holds(1e-9), "({n},{d}): {inv:?}");
            let u = dec.unitary(&Budget::default()).unwrap();
            let dev = frobenius_dist(&(u.adjoint() * &u), &crate::kernel::identity(sys.dim)).unwrap();
            assert!(dev < 1e-10 * sys.dim as f64);
        }
    }

    #[test]
    fn conjugation_examples() {
        let b = Budget::default();
        let sys = Sys::new(2, 2).unwrap();
        let dec = construct_irrep_basis(&sys, &Tolerances::default(), &b).unwrap();
        let id = conjugate_to_blocks(&dec, &crate::kernel::identity(4), &b).unwrap();
        assert!(id.residual < 1e-12);
        let jz = conjugate_to_blocks(&dec, &sys.jz.to_dense(), &b).unwrap();
        assert!(jz.residual < 1e-10);
        assert!(jz.blocks[0].1.norm() < 1e-12);
        let want = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![
            Complex::new(-1.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
        ]));
        assert!(frobenius_dist(&jz.blocks[1].1, &want).unwrap() < 1e-10);
        assert!(matches!(
            conjugate_to_blocks(&dec, &crate::kernel::identity(3), &b),
            Err(Error::ShapeMismatch { .. })
        ));

        let sys = Sys::new(3, 2).unwrap();
        let dec = construct_irrep_basis(&sys, &Tolerances::default(), &b).unwrap();
        let [x, y, z] = sys.dense_generators();
        let a = x * Complex::new(0.3, 0.0) + y * Complex::new(-1.2, 0.0) + z * Complex::new(0.7, 0.0);
        let conj = conjugate_to_blocks(&dec, &a, &b).unwrap();
        assert!(conj.residual < 1e-10);
        assert!(conj.ampliation_deviation < 1e-10);
    }

    #[test]
    fn linked_identity_small() {
        for (n, d) in [(3usize, 2usize), (4, 2), (2, 3)] {
            let sys = Sys::new(n, d).unwrap();
            let dec = construct_irrep_basis(&sys, &Tolerances::default(), &Budget::default()).unwrap();
            assert!(linked_block_deviation(&dec, &sys, 3, 2).unwrap() < 1e-9);
        }
        assert_eq!(ladder_words(2).len(), 1 + 3 + 9);
    }

    #[test]
    fn binomial_difference_matches() {
        for n in 1..=12u64 {
            for m in predicted_multiplicities(n as usize, 2) {
                let k = (m.j.twice() + n as i64) / 2;
                assert_eq!(m.p, binomial(n, k) - binomial(n, k + 1));
            }
        }
    }

    #[test]
    fn single_precision_construction() {
        let sys = CollectiveSystem::<f32>::new(3, 2).unwrap();
        let tol = Tolerances::<f32>::default();
        let dec = construct_irrep_basis(&sys, &tol, &Budget::default()).unwrap();
        assert_eq!(dec.vector_count(), 8);
        assert!(verify_basis(&dec, &sys).unwrap().holds(1e-4));
    }
}
