//! Dense complex linear algebra shared by the whole crate.
//!
//! Everything operates on `ndarray` matrices of `Complex64`. Hermitian
//! eigendecompositions go through LAPACK (`zheev`); matrix products go through
//! BLAS. Qubit counts are capped at [`MAX_QUBITS`] because every structure here
//! is dense.

use crate::{Result, ScvError};
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

/// Hard cap on total (system + ancilla) qubits for dense simulation.
pub const MAX_QUBITS: usize = 10;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const I_UNIT: C64 = C64::new(0.0, 1.0);

/// Number of qubits for a dense dimension, enforcing the power-of-two shape
/// and the global qubit cap.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(ScvError::NotPowerOfTwo(dim));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(ScvError::QubitCapExceeded { got: n, cap: MAX_QUBITS });
    }
    Ok(n)
}

pub fn check_qubits(n: usize) -> Result<usize> {
    if n > MAX_QUBITS {
        return Err(ScvError::QubitCapExceeded { got: n, cap: MAX_QUBITS });
    }
    Ok(1usize << n)
}

pub fn identity(dim: usize) -> CMat {
    Array2::eye(dim)
}

pub fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|x| x.conj())
}

pub fn trace(m: &CMat) -> C64 {
    m.diag().sum()
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Kronecker product with `a` on the high (leftmost) qubits.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for ia in 0..ra {
        for ja in 0..ca {
            let v = a[[ia, ja]];
            if v == ZERO {
                continue;
            }
            for ib in 0..rb {
                for jb in 0..cb {
                    out[[ia * rb + ib, ja * cb + jb]] = v * b[[ib, jb]];
                }
            }
        }
    }
    out
}

pub fn hermiticity_deviation(m: &CMat) -> f64 {
    let (r, c) = m.dim();
    if r != c {
        return f64::INFINITY;
    }
    let mut dev: f64 = 0.0;
    for i in 0..r {
        for j in i..c {
            dev = dev.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    dev
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    hermiticity_deviation(m) <= tol
}

/// Symmetrize `(m + m†)/2`; used before eigendecompositions to shed round-off.
pub fn hermitize(m: &CMat) -> CMat {
    (m + &dagger(m)).mapv(|x| x * 0.5)
}

pub fn unitarity_deviation(u: &CMat) -> f64 {
    let (r, c) = u.dim();
    if r != c {
        return f64::INFINITY;
    }
    let p = dagger(u).dot(u);
    let mut dev: f64 = 0.0;
    for i in 0..r {
        for j in 0..c {
            let expect = if i == j { ONE } else { ZERO };
            dev = dev.max((p[[i, j]] - expect).norm());
        }
    }
    dev
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching eigenvector columns.
pub fn eigh(m: &CMat) -> Result<(Array1<f64>, CMat)> {
    let (vals, vecs) = hermitize(m).eigh(UPLO::Lower)?;
    Ok((vals, vecs))
}

pub fn eigvalsh(m: &CMat) -> Result<Array1<f64>> {
    Ok(eigh(m)?.0)
}

pub fn min_eigenvalue(m: &CMat) -> Result<f64> {
    Ok(eigvalsh(m)?.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `exp(i t H)` for Hermitian `H` via eigendecomposition.
pub fn expi_hermitian(h: &CMat, t: f64) -> Result<CMat> {
    let (vals, vecs) = eigh(h)?;
    Ok(recompose_with(&vals, &vecs, |l| (I_UNIT * (l * t)).exp()))
}

/// Rebuild `V f(Λ) V†` from an eigendecomposition.
pub fn recompose_with(vals: &Array1<f64>, vecs: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let dim = vecs.nrows();
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let fv = f(l);
        for i in 0..dim {
            scaled[[i, j]] *= fv;
        }
    }
    scaled.dot(&dagger(vecs))
}

/// Principal square root of a PSD Hermitian matrix; small negative eigenvalues
/// from round-off are clamped to zero.
pub fn sqrt_psd(m: &CMat) -> Result<CMat> {
    let (vals, vecs) = eigh(m)?;
    Ok(recompose_with(&vals, &vecs, |l| C64::new(l.max(0.0).sqrt(), 0.0)))
}

/// Column-stacked outer product `|v><w|`.
pub fn outer(v: &CVec, w: &CVec) -> CMat {
    let d = v.len();
    let mut out = Array2::zeros((d, w.len()));
    for i in 0..d {
        for j in 0..w.len() {
            out[[i, j]] = v[i] * w[j].conj();
        }
    }
    out
}

/// Haar-random pure state on `dim` amplitudes.
pub fn haar_state<R: Rng>(dim: usize, rng: &mut R) -> CVec {
    let mut v: CVec = Array1::from_shape_fn(dim, |_| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|x| x / norm);
    v
}

/// Haar-random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn haar_unitary<R: Rng>(dim: usize, rng: &mut R) -> CMat {
    let mut cols: Vec<CVec> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = haar_state(dim, rng);
        for c in &cols {
            let ip: C64 = c.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            for i in 0..dim {
                let ci = c[i];
                v[i] -= ip * ci;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.mapv_inplace(|x| x / norm);
        cols.push(v);
    }
    let mut u = Array2::zeros((dim, dim));
    for (j, c) in cols.iter().enumerate() {
        for i in 0..dim {
            u[[i, j]] = c[i];
        }
    }
    u
}

/// In-place single-qubit depolarizing map on a (not necessarily Hermitian)
/// matrix: `m <- (1-p) m + p/3 (X m X + Y m Y + Z m Z)` on `qubit` of `n`.
///
/// Qubit 0 is the most significant bit of the basis index.
pub fn apply_single_qubit_depolarizing(m: &mut CMat, n: usize, qubit: usize, p: f64) {
    if p == 0.0 {
        return;
    }
    let dim = 1usize << n;
    debug_assert_eq!(m.nrows(), dim);
    let bit = 1usize << (n - 1 - qubit);
    let keep = 1.0 - p;
    let third = p / 3.0;
    let src = m.clone();
    for r in 0..dim {
        for c in 0..dim {
            let flipped = src[[r ^ bit, c ^ bit]];
            let sign = if ((r ^ c) & bit) != 0 { -1.0 } else { 1.0 };
            // X m X = flipped, Y m Y = sign*flipped, Z m Z = sign*m
            m[[r, c]] = keep * src[[r, c]] + third * (flipped * (1.0 + sign) + src[[r, c]] * sign);
        }
    }
}

/// In-place global depolarizing map `m <- (1-p) m + p tr(m) I / dim`.
pub fn apply_global_depolarizing(m: &mut CMat, p: f64) {
    if p == 0.0 {
        return;
    }
    let dim = m.nrows();
    let fill = trace(m) * (p / dim as f64);
    m.mapv_inplace(|x| x * (1.0 - p));
    for i in 0..dim {
        m[[i, i]] += fill;
    }
}
