use nalgebra::{Complex, ComplexField, DMatrix, DVector};

use super::Tolerances;
use crate::error::{Error, Result};
use crate::scalar::{cis, cplx, modulus, Real};

pub type ComplexMatrix<T> = DMatrix<Complex<T>>;
pub type ComplexVector<T> = DVector<Complex<T>>;

/// Kronecker product in the standard block ordering: block `(k, l)` of the
/// result is `a[(k, l)] * b`.
pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for l in 0..ac {
        for k in 0..ar {
            let s = a[(k, l)];
            if s == Complex::new(T::zero(), T::zero()) {
                continue;
            }
            for jj in 0..bc {
                for ii in 0..br {
                    out[(k * br + ii, l * bc + jj)] = s * b[(ii, jj)];
                }
            }
        }
    }
    out
}

pub fn dagger<T: Real>(a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.adjoint()
}

/// `ab - ba`.
pub fn commutator<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a * b - b * a
}

pub fn frobenius_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    a.norm()
}

pub fn frobenius_dist<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            op: "frobenius_dist",
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok((a - b).norm())
}

pub fn identity<T: Real>(n: usize) -> ComplexMatrix<T> {
    ComplexMatrix::identity(n, n)
}

/// `||H - H†||_F / ||H||_F` (0 for the zero matrix).
pub fn hermitian_deviation<T: Real>(h: &ComplexMatrix<T>) -> T {
    let scale = h.norm();
    if scale == T::zero() {
        return T::zero();
    }
    (h - h.adjoint()).norm() / scale
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen<T: Real>(h: &ComplexMatrix<T>) -> (DVector<T>, ComplexMatrix<T>) {
    // Symmetrize first so the tridiagonalization sees an exactly Hermitian input.
    let half = cplx(T::lit(0.5));
    let sym = (h + h.adjoint()) * half;
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// `exp(iθH)` for Hermitian `H`, through `H = VΛV†`.
pub fn herm_expm<T: Real>(h: &ComplexMatrix<T>, theta: T, tol: &Tolerances<T>) -> Result<ComplexMatrix<T>> {
    if !h.is_square() {
        return Err(Error::ShapeMismatch {
            op: "herm_expm",
            left: h.shape(),
            right: (h.ncols(), h.ncols()),
        });
    }
    let dev = hermitian_deviation(h);
    if dev > tol.verify_tol {
        return Err(Error::NotHermitian {
            deviation: dev.to_f64_lossy(),
        });
    }
    let (vals, vecs) = hermitian_eigen(h);
    let phases = DVector::from_iterator(vals.len(), vals.iter().map(|&l| cis(theta * l)));
    Ok(scale_columns(&vecs, &phases) * vecs.adjoint())
}

fn scale_columns<T: Real>(m: &ComplexMatrix<T>, s: &ComplexVector<T>) -> ComplexMatrix<T> {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= s[j];
    }
    out
}

/// Principal square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues below roundoff level (relative to the largest) are treated as
/// zero, so rank-deficient inputs yield an exactly rank-deficient root.
pub fn psd_sqrt<T: Real>(h: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (vals, vecs) = hermitian_eigen(h);
    let n = vals.len();
    let top = vals.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
    let floor = T::default_epsilon() * T::from_usize_lossy(16 * n.max(1)) * top;
    let roots = DVector::from_iterator(
        n,
        vals.iter().map(|&l| cplx(if l > floor { l.sqrt() } else { T::zero() })),
    );
    scale_columns(&vecs, &roots) * vecs.adjoint()
}

pub fn trace<T: Real>(a: &ComplexMatrix<T>) -> Complex<T> {
    a.trace()
}

/// Rotate `v` by a global phase so its first significant coordinate is real
/// and positive. Coordinates below `rel_tol * max|v_i|` count as zero.
pub fn normalize_phase<T: Real>(v: &mut ComplexVector<T>, rel_tol: T) {
    let top = v.iter().fold(T::zero(), |acc, &z| acc.max(modulus(z)));
    if top == T::zero() {
        return;
    }
    if let Some(&lead) = v.iter().find(|&&z| modulus(z) > rel_tol * top) {
        let phase = lead.conjugate() / cplx(modulus(lead));
        *v *= phase;
    }
}

/// Orthonormal basis of the kernel of `m`: right singular vectors whose
/// singular value is at most `rank_tol * σ_max`.
pub fn null_space<T: Real>(m: &ComplexMatrix<T>, tol: &Tolerances<T>) -> Vec<ComplexVector<T>> {
    let (r, c) = m.shape();
    if c == 0 {
        return Vec::new();
    }
    if r == 0 {
        return standard_basis(c);
    }
    // nalgebra returns a thin V for wide inputs; pad to square so V is full.
    let padded;
    let work = if r < c {
        let mut p = ComplexMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        padded = p;
        &padded
    } else {
        m
    };
    // Tall inputs: R from a QR factorization has the same singular values and
    // right singular vectors, at a fraction of the SVD cost.
    let svd = if r > c {
        work.clone().qr().r().svd(false, true)
    } else {
        work.clone().svd(false, true)
    };
    let v_t = svd.v_t.expect("requested V");
    let sigma = &svd.singular_values;
    let top = sigma.iter().fold(T::zero(), |acc, &s| acc.max(s));
    let cutoff = tol.rank_tol * top;
    let mut out = Vec::new();
    for (i, &s) in sigma.iter().enumerate() {
        if top == T::zero() || s <= cutoff {
            let mut v: ComplexVector<T> = v_t.row(i).adjoint();
            normalize_phase(&mut v, tol.rank_tol);
            out.push(v);
        }
    }
    out
}

pub fn standard_basis<T: Real>(n: usize) -> Vec<ComplexVector<T>> {
    (0..n)
        .map(|i| {
            let mut e = ComplexVector::zeros(n);
            e[i] = cplx(T::one());
            e
        })
        .collect()
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_space<T: Real>(m: &ComplexMatrix<T>, tol: &Tolerances<T>) -> ComplexMatrix<T> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return ComplexMatrix::zeros(r, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let sigma = &svd.singular_values;
    let top = sigma.iter().fold(T::zero(), |acc, &s| acc.max(s));
    if top == T::zero() {
        return ComplexMatrix::zeros(r, 0);
    }
    let keep: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > tol.rank_tol * top).collect();
    let mut out = ComplexMatrix::zeros(r, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &u.column(i));
    }
    out
}

/// Numerical rank by relative singular-value threshold.
pub fn rank<T: Real>(m: &ComplexMatrix<T>, tol: &Tolerances<T>) -> usize {
    column_space(m, tol).ncols()
}

/// Orthonormal basis of the orthogonal complement of `span(vectors)` inside
/// `C^dim`, with the deterministic phase convention applied.
pub fn complement_in_coords<T: Real>(
    vectors: &[ComplexVector<T>],
    dim: usize,
    tol: &Tolerances<T>,
) -> Result<Vec<ComplexVector<T>>> {
    if vectors.is_empty() {
        return Ok(standard_basis(dim));
    }
    let mut rows = ComplexMatrix::zeros(vectors.len(), dim);
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::ShapeMismatch {
                op: "complement_in_coords",
                left: (v.len(), 1),
                right: (dim, 1),
            });
        }
        rows.set_row(i, &v.adjoint());
    }
    Ok(null_space(&rows, tol))
}

/// Orthonormal basis of `span(ambient) ⊖ span(vectors)`.
///
/// `ambient` must be orthonormal. Every input vector must lie in its span up
/// to a relative residual of `rank_tol`.
pub fn orthocomplement_basis<T: Real>(
    vectors: &[ComplexVector<T>],
    ambient: &[ComplexVector<T>],
    tol: &Tolerances<T>,
) -> Result<Vec<ComplexVector<T>>> {
    let k = ambient.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let n = ambient[0].len();
    let mut basis = ComplexMatrix::zeros(n, k);
    for (i, a) in ambient.iter().enumerate() {
        if a.len() != n {
            return Err(Error::ShapeMismatch {
                op: "orthocomplement_basis",
                left: (a.len(), 1),
                right: (n, 1),
            });
        }
        basis.set_column(i, a);
    }
    let mut coords = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.len() != n {
            return Err(Error::ShapeMismatch {
                op: "orthocomplement_basis",
                left: (v.len(), 1),
                right: (n, 1),
            });
        }
        let c = basis.adjoint() * v;
        let residual = (v - &basis * &c).norm();
        let scale = v.norm().max(T::one());
        if residual > tol.rank_tol * scale {
            return Err(Error::InconsistentSpan {
                residual: residual.to_f64_lossy(),
            });
        }
        coords.push(c);
    }
    let local = complement_in_coords(&coords, k, tol)?;
    Ok(local
        .into_iter()
        .map(|w| {
            let mut v = &basis * w;
            normalize_phase(&mut v, tol.rank_tol);
            v
        })
        .collect())
}

/// Column-stacking vectorization.
pub fn vectorize<T: Real>(a: &ComplexMatrix<T>) -> ComplexVector<T> {
    ComplexVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vectorize`] for a square `dim x dim` matrix.
pub fn unvectorize<T: Real>(v: &ComplexVector<T>, dim: usize) -> ComplexMatrix<T> {
    assert_eq!(v.len(), dim * dim, "unvectorize length");
    ComplexMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Frobenius inner product `tr(a† b)`.
pub fn frobenius_inner<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Complex<T> {
    a.iter()
        .zip(b.iter())
        .fold(cplx(T::zero()), |acc, (x, y)| acc + x.conjugate() * y)
}

pub fn all_finite<T: Real>(a: &ComplexMatrix<T>) -> bool {
    a.iter().all(|z| crate::scalar::is_finite(*z))
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc.max(ComplexField::modulus(*x - *y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::imag_unit;

    type M = ComplexMatrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// The spin-1/2 matrices exactly as displayed in the source literature
    /// (rows/columns in the order they are printed).
    fn displayed_paulis() -> [M; 3] {
        let h = 0.5;
        [
            M::from_row_slice(2, 2, &[c(0., 0.), c(h, 0.), c(h, 0.), c(0., 0.)]),
            M::from_row_slice(2, 2, &[c(0., 0.), c(0., -h), c(0., h), c(0., 0.)]),
            M::from_row_slice(2, 2, &[c(h, 0.), c(0., 0.), c(0., 0.), c(-h, 0.)]),
        ]
    }

    fn diag(xs: &[f64]) -> M {
        M::from_diagonal(&DVector::from_iterator(xs.len(), xs.iter().map(|&x| c(x, 0.))))
    }

    #[test]
    fn kron_examples() {
        let [sx, _, sz] = displayed_paulis();
        let one = M::from_element(1, 1, c(1., 0.));
        assert_eq!(kron(&one, &sx), sx);
        assert_eq!(kron(&sz, &identity(2)), diag(&[0.5, 0.5, -0.5, -0.5]));
        assert_eq!(kron(&identity(2), &sz), diag(&[0.5, -0.5, 0.5, -0.5]));
    }

    #[test]
    fn dagger_examples() {
        let [_, sy, _] = displayed_paulis();
        assert_eq!(dagger(&identity::<f64>(3)), identity(3));
        assert_eq!(dagger(&sy), sy);
    }

    #[test]
    fn frobenius_examples() {
        let [sx, sy, sz] = displayed_paulis();
        assert_eq!(frobenius_dist(&sx, &sx).unwrap(), 0.0);
        let d = frobenius_dist(&identity::<f64>(2), &M::zeros(2, 2)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        let lhs = commutator(&sx, &sy);
        let rhs = sz.map(|z| z * imag_unit());
        assert!(frobenius_dist(&lhs, &rhs).unwrap() < 1e-15);
        assert!(matches!(
            frobenius_dist(&sx, &identity(3)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn herm_expm_examples() {
        let tol = Tolerances::default();
        let [_, _, sz] = displayed_paulis();
        let h = M::from_fn(3, 3, |i, j| c((i + j) as f64, i as f64 - j as f64));
        let e0 = herm_expm(&h, 0.0, &tol).unwrap();
        assert!(frobenius_dist(&e0, &identity(3)).unwrap() < 1e-12);
        let e = herm_expm(&sz, 2.0 * std::f64::consts::PI, &tol).unwrap();
        assert!(frobenius_dist(&e, &(-identity::<f64>(2))).unwrap() < 1e-12);
        let nonherm = M::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(
            herm_expm(&nonherm, 1.0, &tol),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn herm_expm_inverse_pair() {
        let tol = Tolerances::default();
        let h = M::from_fn(5, 5, |i, j| {
            let a = c((i * 3 + j) as f64 % 7.0, (i as f64 - j as f64) * 0.3);
            if i == j {
                c(a.re, 0.)
            } else {
                a
            }
        });
        let h = (&h + h.adjoint()) * c(0.5, 0.);
        let a = herm_expm(&h, 0.7, &tol).unwrap();
        let b = herm_expm(&h, -0.7, &tol).unwrap();
        assert!(frobenius_dist(&(a.clone() * b), &identity(5)).unwrap() < 1e-9);
        assert!(frobenius_dist(&(a.adjoint() * &a), &identity(5)).unwrap() < 1e-9);
    }

    #[test]
    fn null_space_examples() {
        let tol = Tolerances::default();
        assert!(null_space(&identity::<f64>(4), &tol).is_empty());
        let z = null_space(&M::zeros(3, 3), &tol);
        assert_eq!(z.len(), 3);
        for (i, a) in z.iter().enumerate() {
            for (j, b) in z.iter().enumerate() {
                let ip = a.dotc(b);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c(want, 0.)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn null_space_of_pauli_commutator_map_is_identity() {
        // Stack X -> X G - G X for G in the three Paulis, column-stacked.
        let tol = Tolerances::default();
        let i2 = identity::<f64>(2);
        let mut stacked = M::zeros(12, 4);
        for (k, g) in displayed_paulis().iter().enumerate() {
            let block = kron(&g.transpose(), &i2) - kron(&i2, g);
            stacked.view_mut((4 * k, 0), (4, 4)).copy_from(&block);
        }
        let ns = null_space(&stacked, &tol);
        assert_eq!(ns.len(), 1);
        let want = vectorize(&i2) / c(2f64.sqrt(), 0.);
        assert!((&ns[0] - want).norm() < 1e-12);
    }

    #[test]
    fn null_space_wide_matrix() {
        let tol = Tolerances::default();
        let m = M::from_row_slice(1, 3, &[c(1., 0.), c(1., 0.), c(0., 0.)]);
        let ns = null_space(&m, &tol);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((&m * v).norm() < 1e-12);
        }
    }

    #[test]
    fn orthocomplement_examples() {
        let tol = Tolerances::default();
        let amb: Vec<ComplexVector<f64>> = standard_basis(3);
        assert_eq!(orthocomplement_basis(&[], &amb, &tol).unwrap().len(), 3);
        assert!(orthocomplement_basis(&amb, &amb, &tol).unwrap().is_empty());

        // Inside the m = 0 weight space of two qubits (indices 1 and 2 of C^4).
        let e = standard_basis::<f64>(4);
        let ambient = vec![e[1].clone(), e[2].clone()];
        let r = c(1.0 / 2f64.sqrt(), 0.);
        let raised = (&e[1] + &e[2]) * r;
        let comp = orthocomplement_basis(&[raised], &ambient, &tol).unwrap();
        assert_eq!(comp.len(), 1);
        let want = (&e[1] - &e[2]) * r;
        assert!((&comp[0] - want).norm() < 1e-12);

        let outside = e[0].clone();
        assert!(matches!(
            orthocomplement_basis(&[outside], &ambient, &tol),
            Err(Error::InconsistentSpan { .. })
        ));
    }

    #[test]
    fn psd_sqrt_of_pure_state_is_itself() {
        let v = ComplexVector::from_vec(vec![c(0.6, 0.), c(0., 0.8)]);
        let rho = &v * v.adjoint();
        let s = psd_sqrt(&rho);
        assert!(frobenius_dist(&s, &rho).unwrap() < 1e-14);
    }

    #[test]
    fn phase_convention() {
        let mut v = ComplexVector::from_vec(vec![c(0., 0.), c(0., -2.), c(1., 0.)]);
        normalize_phase(&mut v, 1e-10);
        assert_eq!(v[0], c(0., 0.));
        assert!((v[1] - c(2., 0.)).norm() < 1e-15);
        assert!((v[2] - c(0., 1.)).norm() < 1e-15);
    }

    #[test]
    fn vectorization_is_column_stacking() {
        let m = M::from_row_slice(2, 2, &[c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)]);
        let v = vectorize(&m);
        assert_eq!(v[1], c(3., 0.));
        assert_eq!(unvectorize(&v, 2), m);
    }

    #[test]
    fn works_in_single_precision() {
        let tol = Tolerances::<f32>::default();
        let h = ComplexMatrix::<f32>::from_diagonal(&DVector::from_vec(vec![
            Complex::new(0.5f32, 0.),
            Complex::new(-0.5, 0.),
        ]));
        let e = herm_expm(&h, std::f32::consts::PI * 2.0, &tol).unwrap();
        assert!(frobenius_dist(&e, &(-identity::<f32>(2))).unwrap() < 1e-5);
        assert_eq!(null_space(&h, &tol).len(), 0);
    }
}
