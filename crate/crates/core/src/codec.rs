//! Noiseless-subsystem codes: logical states live in the multiplicity factor
//! of one spin-`j` block and survive any collective rotation.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::channel::build_channel;
use crate::collective::CollectiveSystem;
use crate::error::{Error, Result};
use crate::half::HalfInt;
use crate::kernel::{herm_expm, hermitian_eigen, identity, psd_sqrt, Budget, ComplexMatrix, ComplexVector, Tolerances};
use crate::scalar::{cplx, modulus, Real};
use crate::structure::StructureDecomposition;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real>(ComplexMatrix<T>);

impl<T: Real> DensityMatrix<T> {
    /// Absolute slack for the Hermitian and trace checks.
    pub fn trace_tol() -> T {
        T::lit(1e-12).max(T::default_epsilon() * T::lit(100.0))
    }

    /// Most negative eigenvalue still accepted.
    pub fn eigen_tol() -> T {
        T::lit(1e-10).max(T::default_epsilon() * T::lit(100.0))
    }

    pub fn new(m: ComplexMatrix<T>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::NotDensity(format!("shape {:?}", m.shape())));
        }
        let herm = (&m - m.adjoint()).norm();
        if herm > Self::trace_tol() {
            return Err(Error::NotDensity(format!(
                "anti-Hermitian part {:e}",
                herm.to_f64_lossy()
            )));
        }
        let tr = m.trace();
        if modulus(tr - cplx(T::one())) > Self::trace_tol() {
            return Err(Error::NotDensity(format!(
                "trace {} + {}i",
                tr.re.to_f64_lossy(),
                tr.im.to_f64_lossy()
            )));
        }
        let (vals, _) = hermitian_eigen(&m);
        let low = vals.iter().fold(T::zero(), |a, &v| a.min(v));
        if low < -Self::eigen_tol() {
            return Err(Error::NotDensity(format!("eigenvalue {:e}", low.to_f64_lossy())));
        }
        Ok(DensityMatrix(m))
    }

    /// `|ψ⟩⟨ψ|` for `ψ` normalized here.
    pub fn pure(psi: &ComplexVector<T>) -> Result<Self> {
        let norm = psi.norm();
        if norm == T::zero() || !norm.is_finite() {
            return Err(Error::NotDensity("zero state vector".into()));
        }
        let v = psi / cplx(norm);
        Ok(DensityMatrix(&v * v.adjoint()))
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::NotDensity(format!("basis index {k} >= {dim}")));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(k, k)] = cplx(T::one());
        Ok(DensityMatrix(m))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(identity::<T>(dim) / cplx(T::from_usize_lossy(dim)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.0
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> T {
        self.0.norm_squared()
    }

    /// The state vector when `ρ` is pure to working precision.
    pub fn as_pure(&self) -> Option<ComplexVector<T>> {
        if (self.purity() - T::one()).abs() > Self::trace_tol() {
            return None;
        }
        let (vals, vecs) = hermitian_eigen(&self.0);
        let last = vals.len() - 1;
        Some(vecs.column(last).into_owned())
    }
}

/// `F(σ, ρ) = (tr √(√σ ρ √σ))²`.
pub fn fidelity<T: Real>(sigma: &ComplexMatrix<T>, rho: &ComplexMatrix<T>) -> Result<T> {
    if sigma.shape() != rho.shape() || !sigma.is_square() {
        return Err(Error::ShapeMismatch {
            op: "fidelity",
            left: sigma.shape(),
            right: rho.shape(),
        });
    }
    let s = psd_sqrt(sigma);
    let inner = &s * rho * &s;
    let (vals, _) = hermitian_eigen(&inner);
    let n = vals.len().max(1);
    let top = vals.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    let floor = T::default_epsilon() * T::from_usize_lossy(16 * n) * top;
    let tr = vals
        .iter()
        .filter(|&&l| l > floor)
        .fold(T::zero(), |a, &l| a + l.sqrt());
    Ok(tr * tr)
}

/// `⟨ψ|ρ|ψ⟩` for a unit vector `ψ`; equals [`fidelity`] of `|ψ⟩⟨ψ|` and `ρ`.
pub fn pure_fidelity<T: Real>(psi: &ComplexVector<T>, rho: &ComplexMatrix<T>) -> Result<T> {
    if rho.shape() != (psi.len(), psi.len()) {
        return Err(Error::ShapeMismatch {
            op: "pure_fidelity",
            left: (psi.len(), 1),
            right: rho.shape(),
        });
    }
    Ok((psi.adjoint() * rho * psi)[(0, 0)].re)
}

/// Fidelity with the overlap shortcut when `sigma` is pure.
pub fn state_fidelity<T: Real>(sigma: &DensityMatrix<T>, rho: &ComplexMatrix<T>) -> Result<T> {
    match sigma.as_pure() {
        Some(psi) => pure_fidelity(&psi, rho),
        None => fidelity(sigma.matrix(), rho),
    }
}

#[derive(Clone, Debug)]
pub struct NoiselessCode<T: Real> {
    pub n: usize,
    pub d: usize,
    pub j: HalfInt,
    /// Logical dimension `p_j`.
    pub p: usize,
    /// Gauge dimension `q_j = 2j + 1`.
    pub q: usize,
    /// Isometry `W`, columns `|j, m, μ⟩` with `μ` outer and `m` inner.
    pub encoder: ComplexMatrix<T>,
    /// Set when the block has no nontrivial logical space.
    pub warning: Option<String>,
}

pub fn make_code<T: Real>(decomp: &StructureDecomposition<T>, j: HalfInt) -> Result<NoiselessCode<T>> {
    let block = decomp.block(j).ok_or(Error::UnknownBlock(j))?;
    let encoder = decomp.block_columns(j)?;
    let p = block.p();
    let warning = (p == 1).then(|| format!("block j = {j} has p = 1: the logical space is one-dimensional"));
    Ok(NoiselessCode {
        n: decomp.n,
        d: decomp.d,
        j,
        p,
        q: block.q(),
        encoder,
        warning,
    })
}

/// Result of [`NoiselessCode::decode`].
#[derive(Clone, Debug)]
pub struct Decoded<T: Real> {
    pub logical: ComplexMatrix<T>,
    /// `1 - tr(P_j ρ)`.
    pub leakage: T,
}

impl<T: Real> NoiselessCode<T> {
    pub fn dim(&self) -> usize {
        self.encoder.nrows()
    }

    /// `P_j = W W†`.
    pub fn projector(&self) -> ComplexMatrix<T> {
        &self.encoder * self.encoder.adjoint()
    }

    /// `||W†W - I||_F`.
    pub fn isometry_deviation(&self) -> T {
        (self.encoder.adjoint() * &self.encoder - identity::<T>(self.p * self.q)).norm()
    }

    /// `W (σ ⊗ τ) W†`.
    pub fn encode(&self, logical: &DensityMatrix<T>, gauge: &DensityMatrix<T>) -> Result<ComplexMatrix<T>> {
        if logical.dim() != self.p || gauge.dim() != self.q {
            return Err(Error::ShapeMismatch {
                op: "encode",
                left: (logical.dim(), gauge.dim()),
                right: (self.p, self.q),
            });
        }
        let inner = crate::kernel::kron(logical.matrix(), gauge.matrix());
        Ok(&self.encoder * inner * self.encoder.adjoint())
    }

    /// Encode with the maximally mixed gauge state.
    pub fn encode_default(&self, logical: &DensityMatrix<T>) -> Result<ComplexMatrix<T>> {
        self.encode(logical, &DensityMatrix::maximally_mixed(self.q))
    }

    pub fn decode(&self, rho: &DensityMatrix<T>) -> Result<Decoded<T>> {
        self.decode_matrix(rho.matrix())
    }

    /// Compress by `W`, trace out the gauge factor and renormalize.
    /// Validation of `rho` is left to the caller.
    pub fn decode_matrix(&self, rho: &ComplexMatrix<T>) -> Result<Decoded<T>> {
        let n = self.dim();
        if rho.shape() != (n, n) {
            return Err(Error::ShapeMismatch {
                op: "decode",
                left: rho.shape(),
                right: (n, n),
            });
        }
        let comp = self.encoder.adjoint() * rho * &self.encoder;
        let (p, q) = (self.p, self.q);
        let mut logical = ComplexMatrix::zeros(p, p);
        for a in 0..p {
            for b in 0..p {
                let mut acc = cplx(T::zero());
                for m in 0..q {
                    acc += comp[(a * q + m, b * q + m)];
                }
                logical[(a, b)] = acc;
            }
        }
        let kept = logical.trace().re;
        let leakage = (T::one() - kept).max(T::zero());
        if leakage > T::lit(0.5) {
            return Err(Error::BlockLeakage(leakage.to_f64_lossy()));
        }
        Ok(Decoded {
            logical: logical / cplx(kept),
            leakage,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Repeated application of the three-Kraus rotation channel.
    Channel,
    /// Independent collective rotations `exp(-2πi r·J)`, `r` uniform in the unit ball.
    RandomRotations,
}

#[derive(Clone, Debug)]
pub struct SimulationConfig<T: Real> {
    pub mode: NoiseMode,
    pub trials: usize,
    pub seed: u64,
    /// Logical input; a seeded random pure state when absent.
    pub logical: Option<DensityMatrix<T>>,
    /// Channel angles; defaults when absent.
    pub thetas: Option<[T; 3]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub mode: NoiseMode,
    pub trials: usize,
    pub seed: u64,
    pub logical_dim: usize,
    pub gauge_dim: usize,
    pub min_fidelity: f64,
    pub mean_fidelity: f64,
    pub max_leakage: f64,
    /// Largest distance between decodes of the same noisy trial under the
    /// mixed gauge and the pure gauge `|0⟩⟨0|`.
    pub gauge_deviation: f64,
    /// Same noise applied to the logical state embedded in site 1 without
    /// encoding. Absent when `p > d`.
    pub control_min_fidelity: Option<f64>,
    pub control_mean_fidelity: Option<f64>,
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Output of a splitmix64 generator seeded with `master` after `step + 1` advances.
pub fn trial_seed(master: u64, step: u64) -> u64 {
    let mut z = master.wrapping_add(GOLDEN_GAMMA.wrapping_mul(step.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Haar-random unit vector in `C^dim`.
pub fn random_pure_state<T: Real>(dim: usize, rng: &mut ChaCha8Rng) -> ComplexVector<T> {
    let v = ComplexVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(T::lit(re), T::lit(im))
    });
    let n = v.norm();
    v / cplx(n)
}

/// Uniform point in the closed unit ball of `R^3`.
pub fn random_ball_point(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let g: [f64; 3] = [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ];
    let len = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
    let r = rng.random::<f64>().cbrt();
    if len == 0.0 {
        return [0.0; 3];
    }
    [r * g[0] / len, r * g[1] / len, r * g[2] / len]
}

/// `exp(-2πi r·J)` on the full space.
pub fn collective_rotation<T: Real>(
    system: &CollectiveSystem<T>,
    r: [T; 3],
    tol: &Tolerances<T>,
) -> Result<ComplexMatrix<T>> {
    let [x, y, z] = system.dense_generators();
    let h = x * cplx(r[0]) + y * cplx(r[1]) + z * cplx(r[2]);
    herm_expm(&h, -T::two_pi(), tol)
}

/// The logical state placed in the first `p` levels of site 1, every other
/// site in level 0. `None` when `p > d`.
pub fn unencoded_embedding<T: Real>(logical: &ComplexMatrix<T>, n: usize, d: usize) -> Option<ComplexMatrix<T>> {
    let p = logical.nrows();
    if p > d {
        return None;
    }
    let stride = d.pow(n as u32 - 1);
    let dim = stride * d;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for a in 0..p {
        for b in 0..p {
            out[(a * stride, b * stride)] = logical[(a, b)];
        }
    }
    Some(out)
}

/// Reduced state of site 1 restricted to its first `p` levels, renormalized.
fn unencoded_readout<T: Real>(rho: &ComplexMatrix<T>, n: usize, d: usize, p: usize) -> ComplexMatrix<T> {
    let stride = d.pow(n as u32 - 1);
    let mut out = ComplexMatrix::zeros(p, p);
    for a in 0..p {
        for b in 0..p {
            let mut acc = cplx(T::zero());
            for rest in 0..stride {
                acc += rho[(a * stride + rest, b * stride + rest)];
            }
            out[(a, b)] = acc;
        }
    }
    let tr = out.trace().re;
    if tr > T::zero() {
        out / cplx(tr)
    } else {
        out
    }
}

struct Accumulator {
    min: f64,
    sum: f64,
    count: usize,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            min: f64::INFINITY,
            sum: 0.0,
            count: 0,
        }
    }

    fn push(&mut self, f: f64) {
        self.min = self.min.min(f);
        self.sum += f;
        self.count += 1;
    }

    fn mean(&self) -> f64 {
        self.sum / self.count.max(1) as f64
    }
}

/// Run `trials` noise steps on an encoded logical state and report decoded
/// fidelities. Deterministic given `config.seed`: trial `i` draws from a
/// generator seeded with [`trial_seed`]`(seed, i + 1)`, the random logical
/// state (if any) from step 0.
pub fn simulate_noise<T: Real>(
    code: &NoiselessCode<T>,
    system: &CollectiveSystem<T>,
    config: &SimulationConfig<T>,
    tol: &Tolerances<T>,
    budget: &Budget,
) -> Result<SimulationReport> {
    if config.trials == 0 {
        return Err(Error::BadSystem("trials must be at least 1".into()));
    }
    if system.dim != code.dim() {
        return Err(Error::ShapeMismatch {
            op: "simulate_noise",
            left: (system.dim, system.dim),
            right: (code.dim(), code.dim()),
        });
    }
    Budget::check(budget.max_dense_dim, system.dim)?;
    let logical = match &config.logical {
        Some(l) => l.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, 0));
            DensityMatrix::pure(&random_pure_state(code.p, &mut rng))?
        }
    };
    let mixed = code.encode_default(&logical)?;
    let pure_gauge = code.encode(&logical, &DensityMatrix::basis(code.q, 0)?)?;
    let control = unencoded_embedding(logical.matrix(), code.n, code.d);

    let mut fid = Accumulator::new();
    let mut ctrl = Accumulator::new();
    let mut max_leak = 0.0f64;
    let mut gauge_dev = 0.0f64;
    let mut record = |a: &ComplexMatrix<T>, b: &ComplexMatrix<T>, c: Option<&ComplexMatrix<T>>| -> Result<()> {
        let da = code.decode_matrix(a)?;
        let db = code.decode_matrix(b)?;
        fid.push(state_fidelity(&logical, &da.logical)?.to_f64_lossy());
        fid.push(state_fidelity(&logical, &db.logical)?.to_f64_lossy());
        max_leak = max_leak.max(da.leakage.to_f64_lossy()).max(db.leakage.to_f64_lossy());
        gauge_dev = gauge_dev.max((&da.logical - &db.logical).norm().to_f64_lossy());
        if let Some(c) = c {
            let out = unencoded_readout(c, code.n, code.d, code.p);
            ctrl.push(state_fidelity(&logical, &out)?.to_f64_lossy());
        }
        Ok(())
    };

    match config.mode {
        NoiseMode::RandomRotations => {
            for i in 0..config.trials {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.seed, i as u64 + 1));
                let r = random_ball_point(&mut rng).map(T::lit);
                let u = collective_rotation(system, r, tol)?;
                let ud = u.adjoint();
                let conj = |m: &ComplexMatrix<T>| &u * m * &ud;
                let c = control.as_ref().map(conj);
                record(&conj(&mixed), &conj(&pure_gauge), c.as_ref())?;
            }
        }
        NoiseMode::Channel => {
            let channel = build_channel(system.clone(), config.thetas, tol, budget)?;
            let (mut a, mut b, mut c) = (mixed, pure_gauge, control);
            for _ in 0..config.trials {
                a = channel.apply(&a)?;
                b = channel.apply(&b)?;
                if let Some(cm) = c.as_mut() {
                    *cm = channel.apply(cm)?;
                }
                record(&a, &b, c.as_ref())?;
            }
        }
    }

    Ok(SimulationReport {
        mode: config.mode,
        trials: config.trials,
        seed: config.seed,
        logical_dim: code.p,
        gauge_dim: code.q,
        min_fidelity: fid.min,
        mean_fidelity: fid.mean(),
        max_leakage: max_leak,
        gauge_deviation: gauge_dev,
        control_min_fidelity: (ctrl.count > 0).then_some(ctrl.min),
        control_mean_fidelity: (ctrl.count > 0).then(|| ctrl.mean()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::frobenius_dist;
    use crate::structure::{central_projections, construct_irrep_basis};

    fn setup(n: usize, d: usize) -> (CollectiveSystem<f64>, StructureDecomposition<f64>) {
        let sys = CollectiveSystem::new(n, d).unwrap();
        let dec = construct_irrep_basis(&sys, &Tolerances::default(), &Budget::default()).unwrap();
        (sys, dec)
    }

    fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix<f64> {
        let a = ComplexMatrix::from_fn(dim, dim, |_, _| {
            Complex::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            )
        });
        let p = &a * a.adjoint();
        let tr = p.trace();
        let m = p / tr;
        DensityMatrix::new((&m + m.adjoint()) * Complex::new(0.5, 0.0)).unwrap()
    }

    #[test]
    fn code_dimensions() {
        let (_, dec) = setup(3, 2);
        let c = make_code(&dec, "1/2".parse().unwrap()).unwrap();
        assert_eq!((c.p, c.q), (2, 2));
        assert!(c.warning.is_none());
        assert!(c.isometry_deviation() < 1e-12);
        let (_, dec) = setup(4, 2);
        assert_eq!(make_code(&dec, HalfInt::ONE).unwrap().p, 3);
        let (_, dec) = setup(2, 2);
        let c = make_code(&dec, HalfInt::ZERO).unwrap();
        assert_eq!(c.p, 1);
        assert!(c.warning.is_some());
        assert!(matches!(make_code(&dec, HalfInt::HALF), Err(Error::UnknownBlock(_))));
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(identity::<f64>(2)).is_err());
        let mut m = ComplexMatrix::<f64>::zeros(2, 2);
        m[(0, 0)] = Complex::new(1.5, 0.0);
        m[(1, 1)] = Complex::new(-0.5, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        let mut h = DensityMatrix::<f64>::maximally_mixed(2).into_matrix();
        h[(0, 1)] = Complex::new(0.0, 0.1);
        assert!(DensityMatrix::new(h).is_err());
        assert!(DensityMatrix::<f64>::new(identity(3) / Complex::new(3.0, 0.0)).is_ok());
    }

    #[test]
    fn encode_basis_states_selects_first_column() {
        let (_, dec) = setup(3, 2);
        let j = HalfInt::HALF;
        let c = make_code(&dec, j).unwrap();
        let rho = c
            .encode(
                &DensityMatrix::basis(2, 0).unwrap(),
                &DensityMatrix::basis(2, 0).unwrap(),
            )
            .unwrap();
        let v = dec.vector(j, 1, -j).unwrap();
        assert!(frobenius_dist(&rho, &(&v * v.adjoint())).unwrap() < 1e-14);
        assert!(matches!(
            c.encode(
                &DensityMatrix::basis(3, 0).unwrap(),
                &DensityMatrix::basis(2, 0).unwrap()
            ),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn round_trip_every_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, d) in [(1, 2), (2, 2), (3, 2), (4, 2), (2, 3), (3, 3)] {
            let (_, dec) = setup(n, d);
            let projections = central_projections(&dec, &Budget::default()).unwrap();
            for b in &dec.blocks {
                let c = make_code(&dec, b.j).unwrap();
                let sigma = random_density(c.p, &mut rng);
                let tau = random_density(c.q, &mut rng);
                let rho = c.encode(&sigma, &tau).unwrap();
                assert!((rho.trace().re - 1.0).abs() < 1e-12);
                let pj = &projections.iter().find(|(j, _)| *j == b.j).unwrap().1;
                assert!(frobenius_dist(&(pj * &rho * pj), &rho).unwrap() < 1e-12);
                let out = c.decode(&DensityMatrix::new(rho).unwrap()).unwrap();
                assert!(frobenius_dist(&out.logical, sigma.matrix()).unwrap() < 1e-12);
                assert!(out.leakage < 1e-12);
            }
        }
    }

    #[test]
    fn decode_reports_leakage() {
        let (_, dec) = setup(2, 2);
        let c = make_code(&dec, HalfInt::ZERO).unwrap();
        // |00⟩ lies entirely in the triplet.
        let err = c.decode(&DensityMatrix::basis(4, 0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::BlockLeakage(l) if (l - 1.0).abs() < 1e-12));
        assert!(matches!(
            c.decode(&DensityMatrix::maximally_mixed(4)),
            Err(Error::BlockLeakage(_))
        ));
        let singlet = c.encoder.column(0).into_owned();
        let mix = &singlet * singlet.adjoint() * Complex::new(0.6, 0.0)
            + DensityMatrix::<f64>::basis(4, 0).unwrap().into_matrix() * Complex::new(0.4, 0.0);
        let out = c.decode(&DensityMatrix::new(mix).unwrap()).unwrap();
        assert!((out.leakage - 0.4).abs() < 1e-12);
        assert!((out.logical[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_shortcut_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in [2usize, 3, 5] {
            let psi = random_pure_state::<f64>(dim, &mut rng);
            let sigma = DensityMatrix::pure(&psi).unwrap();
            let rho = random_density(dim, &mut rng);
            let full = fidelity(sigma.matrix(), rho.matrix()).unwrap();
            let fast = pure_fidelity(&psi, rho.matrix()).unwrap();
            assert!((full - fast).abs() < 1e-12, "{full} vs {fast}");
            let self_f = fidelity(sigma.matrix(), sigma.matrix()).unwrap();
            assert!((self_f - 1.0).abs() < 1e-12);
        }
        let a = random_density(3, &mut rng);
        assert!((fidelity(a.matrix(), a.matrix()).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_rotation_is_identity() {
        let (sys, dec) = setup(3, 2);
        let c = make_code(&dec, HalfInt::HALF).unwrap();
        let u = collective_rotation(&sys, [0.0; 3], &Tolerances::default()).unwrap();
        assert_eq!(u, identity(8));
        let sigma = DensityMatrix::basis(2, 1).unwrap();
        let out = c.decode_matrix(&c.encode_default(&sigma).unwrap()).unwrap();
        assert!((state_fidelity(&sigma, &out.logical).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn immunity_both_modes() {
        let (sys, dec) = setup(3, 2);
        let c = make_code(&dec, HalfInt::HALF).unwrap();
        let tol = Tolerances::default();
        for mode in [NoiseMode::RandomRotations, NoiseMode::Channel] {
            let cfg = SimulationConfig {
                mode,
                trials: 20,
                seed: 42,
                logical: None,
                thetas: None,
            };
            let r = simulate_noise(&c, &sys, &cfg, &tol, &Budget::default()).unwrap();
            assert!(r.min_fidelity >= 1.0 - 1e-9, "{mode:?}: {}", r.min_fidelity);
            assert!(r.max_leakage <= 1e-9);
            assert!(r.gauge_deviation <= 1e-9);
            assert!(r.control_min_fidelity.unwrap() < 0.99);
            let again = simulate_noise(&c, &sys, &cfg, &tol, &Budget::default()).unwrap();
            assert_eq!(r.min_fidelity.to_bits(), again.min_fidelity.to_bits());
        }
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let seeds: std::collections::BTreeSet<_> = (0..1000).map(|i| trial_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(trial_seed(0, 0), trial_seed(1, 0));
    }

    #[test]
    fn ball_points_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let p = random_ball_point(&mut rng);
            assert!(p.iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-15);
        }
    }
}
