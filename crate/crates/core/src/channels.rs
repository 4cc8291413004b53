//! Dense states and channels: Kraus maps, composition, noise models, and the
//! distance/fidelity measures used throughout the experiments.
//!
//! Fidelity follows the squared-Uhlmann convention, `F = (tr sqrt(sqrt(r) s
//! sqrt(r)))^2`, which makes the saturation value of the Clifford-purification
//! bound come out exactly as `1 - p_y - p_z`.

use crate::linalg::{
    self, dagger, eigvalsh, frobenius_norm, haar_state, identity, kron, outer, sqrt_psd, trace,
    CMat, CVec, C64, ONE, ZERO,
};
use crate::pauli::PauliString;
use crate::{Result, ScvError};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HERMITICITY_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

/// Density operator, possibly sub-normalized after post-selection.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    n: usize,
    mat: CMat,
}

impl DensityOperator {
    pub fn new(mat: CMat) -> Result<Self> {
        let n = linalg::qubits_for_dim(mat.nrows())?;
        if mat.nrows() != mat.ncols() {
            return Err(ScvError::DimensionMismatch("density matrix must be square".into()));
        }
        let dev = linalg::hermiticity_deviation(&mat);
        if dev > HERMITICITY_TOL {
            return Err(ScvError::NotHermitian(dev));
        }
        let tr = trace(&mat).re;
        if !(tr > 0.0 && tr <= 1.0 + 1e-9) {
            return Err(ScvError::InvalidTrace(tr));
        }
        let min = linalg::min_eigenvalue(&mat)?;
        if min < -PSD_TOL {
            return Err(ScvError::NotPositive(min));
        }
        Ok(Self { n, mat })
    }

    pub fn from_pure(state: &CVec) -> Result<Self> {
        Self::new(outer(state, state))
    }

    /// Computational basis state `|index>` on `n` qubits.
    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        let dim = linalg::check_qubits(n)?;
        let mut v = CVec::zeros(dim);
        v[index] = ONE;
        Self::from_pure(&v)
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let dim = linalg::check_qubits(n)?;
        Ok(Self { n, mat: identity(dim).mapv(|v| v / dim as f64) })
    }

    pub fn haar_random(n: usize, seed: u64) -> Result<Self> {
        let dim = linalg::check_qubits(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_pure(&haar_state(dim, &mut rng))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        trace(&self.mat).re
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr < 1e-14 {
            return Err(ScvError::InvalidTrace(tr));
        }
        Ok(Self { n: self.n, mat: self.mat.mapv(|v| v / tr) })
    }

    pub fn expectation(&self, obs: &CMat) -> f64 {
        trace(&obs.dot(&self.mat)).re
    }
}

/// Completely positive map given by a list of Kraus operators. Trace
/// non-increasing in general; equality `sum K'K = I` marks trace preserving.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    n_in: usize,
    n_out: usize,
    kraus: Vec<CMat>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| {
            ScvError::DimensionMismatch("a channel needs at least one Kraus operator".into())
        })?;
        let n_out = linalg::qubits_for_dim(first.nrows())?;
        let n_in = linalg::qubits_for_dim(first.ncols())?;
        for k in &kraus {
            if k.dim() != first.dim() {
                return Err(ScvError::DimensionMismatch(
                    "all Kraus operators must share one shape".into(),
                ));
            }
        }
        let ch = Self { n_in, n_out, kraus };
        let excess = ch.completeness_excess()?;
        if excess > 1e-8 {
            return Err(ScvError::InvariantViolation(format!(
                "Kraus set is trace increasing (sum K'K exceeds I by {excess:.3e})"
            )));
        }
        Ok(ch)
    }

    /// Largest eigenvalue of `sum K'K - I`; <= 0 within tolerance for a valid
    /// trace non-increasing map, ~0 for trace preserving.
    fn completeness_excess(&self) -> Result<f64> {
        let dim = 1usize << self.n_in;
        let mut acc = CMat::zeros((dim, dim));
        for k in &self.kraus {
            acc = acc + dagger(k).dot(k);
        }
        let vals = eigvalsh(&(acc - identity(dim)))?;
        Ok(vals.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn identity(n: usize) -> Result<Self> {
        let dim = linalg::check_qubits(n)?;
        Ok(Self { n_in: n, n_out: n, kraus: vec![identity(dim)] })
    }

    pub fn from_unitary(u: &CMat) -> Result<Self> {
        let dev = linalg::unitarity_deviation(u);
        if dev > 1e-8 {
            return Err(ScvError::NotUnitary(dev));
        }
        let n = linalg::qubits_for_dim(u.nrows())?;
        Ok(Self { n_in: n, n_out: n, kraus: vec![u.clone()] })
    }

    /// Unchecked constructor for internally built Kraus data (e.g. supermap
    /// outputs) where completeness is guaranteed by construction.
    pub(crate) fn from_raw(n_in: usize, n_out: usize, kraus: Vec<CMat>) -> Self {
        Self { n_in, n_out, kraus }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn kraus_ops(&self) -> &[CMat] {
        &self.kraus
    }

    /// Apply to a density operator.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.n() != self.n_in {
            return Err(ScvError::DimensionMismatch(format!(
                "channel on {} qubits applied to {}-qubit state",
                self.n_in,
                rho.n()
            )));
        }
        let mat = self.apply_matrix(rho.matrix());
        let n = self.n_out;
        Ok(DensityOperator { n, mat })
    }

    /// Apply to an arbitrary (not necessarily Hermitian) matrix; the channel
    /// is a linear map on matrices.
    pub fn apply_matrix(&self, m: &CMat) -> CMat {
        let dim = 1usize << self.n_out;
        let mut out = CMat::zeros((dim, dim));
        for k in &self.kraus {
            out = out + k.dot(m).dot(&dagger(k));
        }
        out
    }

    /// `compose(a, b)` applies `b` first: `(a o b)(rho) = a(b(rho))`.
    pub fn compose(a: &Self, b: &Self) -> Result<Self> {
        if a.n_in != b.n_out {
            return Err(ScvError::DimensionMismatch(format!(
                "composing {}-qubit input with {}-qubit output",
                a.n_in, b.n_out
            )));
        }
        let mut kraus = Vec::with_capacity(a.kraus.len() * b.kraus.len());
        for ka in &a.kraus {
            for kb in &b.kraus {
                kraus.push(ka.dot(kb));
            }
        }
        let mut out = Self { n_in: b.n_in, n_out: a.n_out, kraus };
        out.prune(1e-12);
        Ok(out)
    }

    pub fn tensor(a: &Self, b: &Self) -> Result<Self> {
        linalg::check_qubits(a.n_in + b.n_in)?;
        let mut kraus = Vec::with_capacity(a.kraus.len() * b.kraus.len());
        for ka in &a.kraus {
            for kb in &b.kraus {
                kraus.push(kron(ka, kb));
            }
        }
        Ok(Self { n_in: a.n_in + b.n_in, n_out: a.n_out + b.n_out, kraus })
    }

    /// Drop Kraus operators with negligible Frobenius norm.
    pub fn prune(&mut self, tol: f64) {
        self.kraus.retain(|k| frobenius_norm(k) >= tol);
        if self.kraus.is_empty() {
            self.kraus.push(Array2::zeros((1usize << self.n_out, 1usize << self.n_in)));
        }
    }

    /// Unnormalized Choi matrix `C[(a,b),(a',b')] = <a|E(|b><b'|)|a'>`
    /// assembled from the Kraus vectors; trace `2^n_in` for a TP map.
    pub fn choi(&self) -> CMat {
        let din = 1usize << self.n_in;
        let dout = 1usize << self.n_out;
        let d = din * dout;
        let mut c = CMat::zeros((d, d));
        for k in &self.kraus {
            // row-major vec of K: index (a, b) -> a * din + b
            let mut v = CVec::zeros(d);
            for a in 0..dout {
                for b in 0..din {
                    v[a * din + b] = k[[a, b]];
                }
            }
            c = c + outer(&v, &v);
        }
        c
    }

    /// Choi state (normalized by `2^n_in`); PSD with unit trace for TP maps.
    pub fn choi_state(&self) -> CMat {
        let din = 1usize << self.n_in;
        self.choi().mapv(|v| v / din as f64)
    }

    pub fn is_trace_preserving(&self, tol: f64) -> Result<bool> {
        let dim = 1usize << self.n_in;
        let mut acc = CMat::zeros((dim, dim));
        for k in &self.kraus {
            acc = acc + dagger(k).dot(k);
        }
        Ok(linalg::max_abs(&(acc - identity(dim))) <= tol)
    }

    /// Rebuild a Kraus representation from a (PSD) Choi matrix.
    pub fn from_choi(choi: &CMat, n_in: usize, n_out: usize) -> Result<Self> {
        let din = 1usize << n_in;
        let dout = 1usize << n_out;
        if choi.nrows() != din * dout {
            return Err(ScvError::DimensionMismatch("Choi dimension mismatch".into()));
        }
        let (vals, vecs) = linalg::eigh(choi)?;
        let mut kraus = Vec::new();
        for (j, &l) in vals.iter().enumerate() {
            if l < -1e-8 {
                return Err(ScvError::NotPositive(l));
            }
            if l <= 1e-12 {
                continue;
            }
            let s = l.sqrt();
            let mut k = CMat::zeros((dout, din));
            for a in 0..dout {
                for b in 0..din {
                    k[[a, b]] = vecs[[a * din + b, j]] * s;
                }
            }
            kraus.push(k);
        }
        if kraus.is_empty() {
            kraus.push(CMat::zeros((dout, din)));
        }
        Ok(Self { n_in, n_out, kraus })
    }

    /// Random TP channel with `k` Kraus operators (isometry blocks from a
    /// Haar-random matrix); handy for randomized oracles.
    pub fn random(n: usize, k: usize, rng: &mut impl Rng) -> Result<Self> {
        let dim = linalg::check_qubits(n)?;
        linalg::check_qubits(n + (k.next_power_of_two().trailing_zeros() as usize).max(1))
            .map_err(|_| ScvError::QubitCapExceeded { got: n, cap: linalg::MAX_QUBITS })?;
        let big = linalg::haar_unitary(dim * k.next_power_of_two(), rng);
        let mut kraus = Vec::with_capacity(k);
        for i in 0..k {
            let mut m = CMat::zeros((dim, dim));
            for r in 0..dim {
                for c in 0..dim {
                    m[[r, c]] = big[[i * dim + r, c]];
                }
            }
            kraus.push(m);
        }
        Ok(Self { n_in: n, n_out: n, kraus })
    }
}

/// A sub-normalized map together with the post-selection success probability
/// it induces on each input.
#[derive(Clone, Debug)]
pub struct TraceNonIncreasingMap {
    inner: KrausChannel,
}

impl TraceNonIncreasingMap {
    pub fn new(inner: KrausChannel) -> Result<Self> {
        let excess = inner.completeness_excess()?;
        if excess > 1e-8 {
            return Err(ScvError::InvariantViolation(format!(
                "map is trace increasing by {excess:.3e}"
            )));
        }
        Ok(Self { inner })
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.inner
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.inner.apply(rho)
    }

    /// `tr[map(rho)]`, the probability of passing post-selection.
    pub fn success_probability(&self, rho: &DensityOperator) -> Result<f64> {
        Ok(self.inner.apply(rho)?.trace())
    }
}

/// Noise models used by the experiments.
#[derive(Clone, Debug)]
pub enum NoiseModel {
    /// `sum_i p_i P_i . P_i` over explicit Pauli terms; probabilities must be
    /// nonnegative and sum to at most 1 (remainder goes to identity).
    Pauli { terms: Vec<(f64, PauliString)> },
    /// Independent single-qubit depolarizing with rate `p` on every qubit.
    LocalDepolarizing { p: f64 },
    /// `rho -> (1-p) rho + p I/2^n`.
    GlobalDepolarizing { p: f64 },
}

/// Dense Kraus realization of a noise model on `n` qubits.
pub fn build_noise(model: &NoiseModel, n: usize) -> Result<KrausChannel> {
    let dim = linalg::check_qubits(n)?;
    match model {
        NoiseModel::Pauli { terms } => {
            let mut total = 0.0;
            let mut kraus = Vec::new();
            let mut p_id = 0.0;
            for (p, pauli) in terms {
                if *p < -1e-12 {
                    return Err(ScvError::InvalidProbability(format!("negative weight {p}")));
                }
                if pauli.n() != n {
                    return Err(ScvError::DimensionMismatch(format!(
                        "{}-qubit Pauli in {n}-qubit noise model",
                        pauli.n()
                    )));
                }
                total += p;
                if pauli.is_identity_class() {
                    p_id += p;
                } else if *p > 0.0 {
                    kraus.push(
                        pauli
                            .hermitian_canonical()
                            .to_matrix()?
                            .mapv(|v| v * C64::new(p.sqrt(), 0.0)),
                    );
                }
            }
            if total > 1.0 + 1e-9 {
                return Err(ScvError::InvalidProbability(format!(
                    "pauli probabilities sum to {total}"
                )));
            }
            p_id += 1.0 - total;
            if p_id > 0.0 {
                kraus.insert(0, identity(dim).mapv(|v| v * C64::new(p_id.sqrt(), 0.0)));
            }
            KrausChannel::new(kraus)
        }
        NoiseModel::LocalDepolarizing { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(ScvError::InvalidProbability(format!("depolarizing rate {p}")));
            }
            let single = single_qubit_depolarizing_kraus(*p);
            let mut ch = KrausChannel::from_raw(0, 0, vec![CMat::from_elem((1, 1), ONE)]);
            for _ in 0..n {
                ch = tensor_expand(&ch, &single)?;
            }
            ch.prune(1e-14);
            Ok(ch)
        }
        NoiseModel::GlobalDepolarizing { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(ScvError::InvalidProbability(format!("depolarizing rate {p}")));
            }
            // Pauli mixture realization: identity keeps (1-p) + p/4^n.
            let total = (1usize << (2 * n)) as f64;
            let mut kraus = Vec::new();
            for pauli in crate::pauli::enumerate_paulis(n) {
                let w = if pauli.is_identity_class() { 1.0 - p + p / total } else { p / total };
                if w > 0.0 {
                    kraus.push(pauli.to_matrix()?.mapv(|v| v * C64::new(w.sqrt(), 0.0)));
                }
            }
            KrausChannel::new(kraus)
        }
    }
}

fn single_qubit_depolarizing_kraus(p: f64) -> Vec<CMat> {
    let x = PauliString::parse("X").unwrap().to_matrix().unwrap();
    let y = PauliString::parse("Y").unwrap().to_matrix().unwrap();
    let z = PauliString::parse("Z").unwrap().to_matrix().unwrap();
    let w = C64::new((p / 3.0).sqrt(), 0.0);
    vec![
        identity(2).mapv(|v| v * C64::new((1.0 - p).sqrt(), 0.0)),
        x.mapv(|v| v * w),
        y.mapv(|v| v * w),
        z.mapv(|v| v * w),
    ]
}

fn tensor_expand(ch: &KrausChannel, single: &[CMat]) -> Result<KrausChannel> {
    let mut kraus = Vec::with_capacity(ch.kraus.len() * single.len());
    for k in &ch.kraus {
        for s in single {
            kraus.push(kron(k, s));
        }
    }
    let n = ch.n_in + 1;
    linalg::check_qubits(n)?;
    Ok(KrausChannel::from_raw(n, n, kraus))
}

/// Least-squares proportionality constant: `lambda >= 0` with
/// `||Choi(a) - lambda Choi(b)|| <= tol`, or `None` if no such scalar exists.
pub fn proportionality(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Option<f64> {
    if a.n_in != b.n_in || a.n_out != b.n_out {
        return None;
    }
    let ca = a.choi();
    let cb = b.choi();
    let denom: f64 = cb.iter().map(|v| v.norm_sqr()).sum();
    if denom < 1e-28 {
        return None;
    }
    let num: C64 = cb.iter().zip(ca.iter()).map(|(x, y)| x.conj() * y).sum();
    let lambda = num.re / denom;
    if lambda < -tol {
        return None;
    }
    let resid = frobenius_norm(&(ca - cb.mapv(|v| v * lambda)));
    if resid <= tol {
        Some(lambda.max(0.0))
    } else {
        None
    }
}

/// `1/2 ||rho - sigma||_1` on raw Hermitian matrices.
pub fn trace_distance_mat(rho: &CMat, sigma: &CMat) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(ScvError::DimensionMismatch("trace distance on mismatched dims".into()));
    }
    let vals = eigvalsh(&(rho - sigma))?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    trace_distance_mat(rho.matrix(), sigma.matrix())
}

/// Squared Uhlmann fidelity `(tr sqrt(sqrt(r) s sqrt(r)))^2`.
pub fn fidelity_mat(rho: &CMat, sigma: &CMat) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(ScvError::DimensionMismatch("fidelity on mismatched dims".into()));
    }
    let min = linalg::min_eigenvalue(rho)?.min(linalg::min_eigenvalue(sigma)?);
    if min < -1e-8 {
        return Err(ScvError::NotPositive(min));
    }
    let sr = sqrt_psd(rho)?;
    let inner = sr.dot(sigma).dot(&sr);
    let vals = eigvalsh(&inner)?;
    let root_sum: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0 + 1e-9).min(1.0))
}

pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    fidelity_mat(rho.matrix(), sigma.matrix())
}

/// Heuristic minimization of the channel fidelity
/// `min_psi F((I (x) E)(psi), (I (x) F)(psi))` over pure inputs on the doubled
/// space. Multi-start stochastic descent; the maximally entangled input is
/// always one of the starts, so the result never exceeds the Choi-state
/// fidelity. Returns an upper estimate of the true minimum.
pub fn worst_case_fidelity(
    a: &KrausChannel,
    b: &KrausChannel,
    restarts: usize,
    tol: f64,
) -> Result<f64> {
    if a.n_in != b.n_in || a.n_out != b.n_out {
        return Err(ScvError::DimensionMismatch("worst-case fidelity dims differ".into()));
    }
    let n = a.n_in;
    let dim = 1usize << n;
    linalg::check_qubits(2 * n)?;
    let ext_a = KrausChannel::tensor(&KrausChannel::identity(n)?, a)?;
    let ext_b = KrausChannel::tensor(&KrausChannel::identity(n)?, b)?;

    let eval = |psi: &CVec| -> Result<f64> {
        let rho = outer(psi, psi);
        fidelity_mat(&ext_a.apply_matrix(&rho), &ext_b.apply_matrix(&rho))
    };

    // maximally entangled start: the Choi state is always a feasible point
    let mut entangled = CVec::zeros(dim * dim);
    for i in 0..dim {
        entangled[i * dim + i] = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
    }
    let mut best = eval(&entangled)?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5cv_u64 ^ 0x77c5);
    for start in 0..restarts.max(1) {
        let mut psi = if start == 0 { entangled.clone() } else { haar_state(dim * dim, &mut rng) };
        let mut cur = eval(&psi)?;
        let mut step = 0.5;
        let mut stale = 0usize;
        while step > tol.max(1e-9) && stale < 60 {
            let mut cand = psi.clone();
            for v in cand.iter_mut() {
                *v += C64::new(
                    step * rng.sample::<f64, _>(rand_distr::StandardNormal),
                    step * rng.sample::<f64, _>(rand_distr::StandardNormal),
                );
            }
            let norm = cand.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            cand.mapv_inplace(|v| v / norm);
            let f = eval(&cand)?;
            if f < cur - 1e-15 {
                cur = f;
                psi = cand;
                stale = 0;
            } else {
                stale += 1;
                if stale % 12 == 0 {
                    step *= 0.5;
                }
            }
        }
        best = best.min(cur);
    }
    Ok(best)
}
