//! Exact n-qubit Pauli-group arithmetic over the symplectic GF(2) encoding.
//!
//! A Pauli operator is stored as a pair of bit masks (X and Z components) plus
//! a power of `i`, with the convention `matrix = i^phase * prod_q X^x_q Z^z_q`
//! and `Y = i X Z`. Group-level computations (generated groups, commutants)
//! work on the phaseless quotient and scale to dozens of qubits; dense-matrix
//! conversions are capped by the simulator limit.

use crate::linalg::{self, CMat, C64, ONE, ZERO};
use crate::{Result, ScvError};
use std::collections::BTreeSet;
use std::fmt;

/// Largest qubit count representable by the bit-mask encoding.
pub const MAX_PAULI_QUBITS: usize = 64;

/// An n-qubit Pauli operator with tracked phase: `i^phase * X^x Z^z`.
///
/// Mask bit `1 << (n-1-q)` corresponds to qubit `q`, matching the basis-index
/// layout of the dense matrices (qubit 0 is the most significant bit).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliString {
    pub fn new(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        if n == 0 || n > MAX_PAULI_QUBITS {
            return Err(ScvError::DimensionMismatch(format!(
                "pauli qubit count {n} outside 1..={MAX_PAULI_QUBITS}"
            )));
        }
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if x & !mask != 0 || z & !mask != 0 {
            return Err(ScvError::DimensionMismatch(format!(
                "mask has bits beyond {n} qubits"
            )));
        }
        Ok(Self { n, x, z, phase: phase % 4 })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, x: 0, z: 0, phase: 0 }
    }

    /// Single-qubit X/Y/Z embedded at `qubit` (Hermitian, phase carried for Y).
    pub fn single(n: usize, qubit: usize, kind: char) -> Result<Self> {
        let bit = 1u64 << (n - 1 - qubit);
        match kind {
            'I' => Self::new(n, 0, 0, 0),
            'X' => Self::new(n, bit, 0, 0),
            'Y' => Self::new(n, bit, bit, 1),
            'Z' => Self::new(n, 0, bit, 0),
            other => Err(ScvError::Parse { line: 0, msg: format!("bad Pauli letter '{other}'") }),
        }
    }

    /// Parse a string over {I, X, Y, Z}, one letter per qubit, qubit 0 first.
    pub fn parse(s: &str) -> Result<Self> {
        let n = s.chars().count();
        if n == 0 || n > MAX_PAULI_QUBITS {
            return Err(ScvError::Parse { line: 0, msg: format!("bad Pauli length {n}") });
        }
        let mut x = 0u64;
        let mut z = 0u64;
        let mut phase = 0u8;
        for (q, c) in s.chars().enumerate() {
            let bit = 1u64 << (n - 1 - q);
            match c {
                'I' => {}
                'X' => x |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                    phase = (phase + 1) % 4;
                }
                'Z' => z |= bit,
                other => {
                    return Err(ScvError::Parse {
                        line: 0,
                        msg: format!("bad Pauli letter '{other}' in \"{s}\""),
                    })
                }
            }
        }
        Ok(Self { n, x, z, phase })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0 && self.phase == 0
    }

    /// Identity up to the {±1, ±i} phase quotient.
    pub fn is_identity_class(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Phase-quotient key: two Paulis are equal up to phase iff keys match.
    pub fn class_key(&self) -> (u64, u64) {
        (self.x, self.z)
    }

    /// The Hermitian representative of the phase class (phase = #Y mod 4).
    pub fn hermitian_canonical(&self) -> Self {
        Self { phase: ((self.x & self.z).count_ones() % 4) as u8, ..*self }
    }

    /// Exact product `self * other` with phase tracking.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(ScvError::DimensionMismatch(format!(
                "pauli product on {} vs {} qubits",
                self.n, other.n
            )));
        }
        // Z^a X^b = (-1)^(a.b) X^b Z^a picks up a sign per overlapping bit.
        let swaps = (self.z & other.x).count_ones() % 2;
        Ok(Self {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (self.phase + other.phase + 2 * swaps as u8) % 4,
        })
    }

    /// True iff the symplectic form `x_p.z_q + z_p.x_q` vanishes mod 2.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        if self.n != other.n {
            return Err(ScvError::DimensionMismatch(format!(
                "commutation on {} vs {} qubits",
                self.n, other.n
            )));
        }
        let form = ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2;
        Ok(form == 0)
    }

    pub fn phase_factor(&self) -> C64 {
        match self.phase {
            0 => ONE,
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// Dense matrix; requires the qubit count to fit the simulator cap.
    pub fn to_matrix(&self) -> Result<CMat> {
        let dim = linalg::check_qubits(self.n)?;
        let mut m = CMat::zeros((dim, dim));
        let ph = self.phase_factor();
        for k in 0..dim as u64 {
            let sign = if (self.z & k).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[[(k ^ self.x) as usize, k as usize]] = ph * sign;
        }
        Ok(m)
    }

    /// `P * m` without forming the dense Pauli.
    pub fn left_mul(&self, m: &CMat) -> CMat {
        let dim = m.nrows();
        let mut out = CMat::zeros(m.raw_dim());
        let ph = self.phase_factor();
        for r in 0..dim as u64 {
            let src = (r ^ self.x) as usize;
            let sign = if (self.z & src as u64).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            let f = ph * sign;
            for c in 0..m.ncols() {
                out[[r as usize, c]] = f * m[[src, c]];
            }
        }
        out
    }

    /// `m * P` without forming the dense Pauli.
    pub fn right_mul(&self, m: &CMat) -> CMat {
        let cols = m.ncols();
        let mut out = CMat::zeros(m.raw_dim());
        let ph = self.phase_factor();
        for c in 0..cols as u64 {
            let sign = if (self.z & c).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            let f = ph * sign;
            let src = (c ^ self.x) as usize;
            for r in 0..m.nrows() {
                out[[r, c as usize]] = f * m[[r, src]];
            }
        }
        out
    }

    /// `P m P†`; the tracked phase cancels, only mask data matters.
    pub fn conjugate(&self, m: &CMat) -> CMat {
        let dim = m.nrows();
        let mut out = CMat::zeros(m.raw_dim());
        for r in 0..dim as u64 {
            for c in 0..dim as u64 {
                let sign = if (self.z & (r ^ c)).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                out[[r as usize, c as usize]] = sign * m[[(r ^ self.x) as usize, (c ^ self.x) as usize]];
            }
        }
        out
    }

    /// `tr[m * P]` computed through the permutation structure of `P`.
    pub fn trace_against(&self, m: &CMat) -> C64 {
        let dim = m.nrows() as u64;
        let ph = self.phase_factor();
        let mut acc = ZERO;
        for k in 0..dim {
            let sign = if (self.z & k).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            acc += m[[k as usize, (k ^ self.x) as usize]] * sign;
        }
        acc * ph
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let canonical = ((self.x & self.z).count_ones() % 4) as u8;
        let rel = (4 + self.phase - canonical) % 4;
        let prefix = ["", "i", "-", "-i"][rel as usize];
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            let bit = 1u64 << (self.n - 1 - q);
            let c = match (self.x & bit != 0, self.z & bit != 0) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Deduplicated collection of Paulis with the phase quotiented out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliSet {
    n: usize,
    members: BTreeSet<(u64, u64)>,
}

impl PauliSet {
    pub fn new(n: usize) -> Self {
        Self { n, members: BTreeSet::new() }
    }

    pub fn from_paulis<'a>(n: usize, paulis: impl IntoIterator<Item = &'a PauliString>) -> Result<Self> {
        let mut set = Self::new(n);
        for p in paulis {
            set.insert(p)?;
        }
        Ok(set)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, p: &PauliString) -> Result<bool> {
        if p.n() != self.n {
            return Err(ScvError::DimensionMismatch(format!(
                "inserting {}-qubit Pauli into {}-qubit set",
                p.n(),
                self.n
            )));
        }
        Ok(self.members.insert(p.class_key()))
    }

    pub fn contains(&self, p: &PauliString) -> bool {
        self.members.contains(&p.class_key())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members as Hermitian canonical representatives, in deterministic order.
    pub fn iter(&self) -> impl Iterator<Item = PauliString> + '_ {
        let n = self.n;
        self.members.iter().map(move |&(x, z)| {
            PauliString { n, x, z, phase: ((x & z).count_ones() % 4) as u8 }
        })
    }

    pub fn intersects(&self, other: &PauliSet) -> bool {
        self.members.iter().any(|k| other.members.contains(k))
    }

    /// Set of phaseless pair products `{P_i P_j}` over `self` (with identity
    /// included among the factors), excluding the identity from the output.
    pub fn pair_products(&self) -> Result<PauliSet> {
        let mut out = PauliSet::new(self.n);
        let elems: Vec<PauliString> = self.iter().collect();
        let id = PauliString::identity(self.n);
        let mut with_id = elems.clone();
        if !self.contains(&id) {
            with_id.push(id);
        }
        for a in &with_id {
            for b in &with_id {
                let prod = a.multiply(b)?;
                if !prod.is_identity_class() {
                    out.insert(&prod)?;
                }
            }
        }
        Ok(out)
    }
}

/// GF(2)-independent generating set of a phaseless Pauli subgroup.
#[derive(Clone, Debug)]
pub struct GeneratingSet {
    n: usize,
    gens: Vec<PauliString>,
}

fn symplectic_vector(p: &PauliString) -> u128 {
    (p.x_mask() as u128) | ((p.z_mask() as u128) << 64)
}

impl GeneratingSet {
    pub fn empty(n: usize) -> Self {
        Self { n, gens: Vec::new() }
    }

    /// Reduce an arbitrary list of Paulis to an independent generating set via
    /// Gaussian elimination on the (x|z) vectors; phases are ignored.
    pub fn from_paulis<'a>(n: usize, paulis: impl IntoIterator<Item = &'a PauliString>) -> Result<Self> {
        let mut out = Self::empty(n);
        for p in paulis {
            out.try_extend(p)?;
        }
        Ok(out)
    }

    /// Add `p` if independent from the current generators; returns whether the
    /// rank grew.
    pub fn try_extend(&mut self, p: &PauliString) -> Result<bool> {
        if p.n() != self.n {
            return Err(ScvError::DimensionMismatch(format!(
                "generator on {} qubits, set on {}",
                p.n(),
                self.n
            )));
        }
        let mut v = symplectic_vector(p);
        for g in &self.gens {
            let gv = symplectic_vector(g);
            let pivot = 1u128 << (127 - gv.leading_zeros());
            if v & pivot != 0 {
                v ^= gv;
            }
        }
        if v == 0 {
            return Ok(false);
        }
        let x = (v & u64::MAX as u128) as u64;
        let z = (v >> 64) as u64;
        let reduced = PauliString::new(self.n, x, z, 0)?.hermitian_canonical();
        // keep generators sorted by descending pivot so reduction stays valid
        self.gens.push(reduced);
        self.gens.sort_by_key(|g| std::cmp::Reverse(symplectic_vector(g)));
        Ok(true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.gens
    }
}

/// Full phaseless group generated by an independent set; size `2^rank`.
pub fn generated_group(gens: &GeneratingSet) -> PauliSet {
    let mut elems: Vec<PauliString> = vec![PauliString::identity(gens.n())];
    for g in gens.generators() {
        let mut extended = Vec::with_capacity(elems.len() * 2);
        for e in &elems {
            extended.push(*e);
            extended.push(e.multiply(g).expect("matched dims").hermitian_canonical());
        }
        elems = extended;
    }
    PauliSet::from_paulis(gens.n(), elems.iter()).expect("matched dims")
}

/// Generating set of `{Q : [Q, P] = 0 for all P in s}`, computed as the GF(2)
/// null space of the symplectic-product matrix.
pub fn commutant(s: &PauliSet) -> GeneratingSet {
    let n = s.n();
    // Constraint row for P is (z_P | x_P): dot with (x_Q | z_Q) must vanish.
    let rows: Vec<u128> = s
        .iter()
        .map(|p| (p.z_mask() as u128) | ((p.x_mask() as u128) << 64))
        .collect();
    let ncols = 2 * n;
    // Gaussian elimination tracking pivot columns.
    let mut reduced: Vec<(usize, u128)> = Vec::new(); // (pivot col, row)
    for mut row in rows {
        for &(pc, r) in &reduced {
            if row & (1u128 << pc) != 0 {
                row ^= r;
            }
        }
        if row != 0 {
            let pivot = 127 - row.leading_zeros() as usize;
            reduced.push((pivot, row));
        }
    }
    let pivot_cols: BTreeSet<usize> = reduced.iter().map(|&(pc, _)| pc).collect();
    // Back-substitute one null vector per free column.
    let mut gens = GeneratingSet::empty(n);
    for free in (0..ncols).rev() {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = 1u128 << free;
        // eliminate from highest pivot down so each pivot bit is settled once
        let mut rows_sorted = reduced.clone();
        rows_sorted.sort_by_key(|&(pc, _)| std::cmp::Reverse(pc));
        for &(pc, r) in &rows_sorted {
            if (r & v).count_ones() % 2 == 1 {
                v ^= 1u128 << pc;
            }
        }
        let x = (v & u64::MAX as u128) as u64;
        let z = (v >> 64) as u64;
        let p = PauliString::new(n, x, z, 0).expect("masks in range").hermitian_canonical();
        gens.try_extend(&p).expect("matched dims");
    }
    gens
}

/// Iterate every phaseless n-qubit Pauli class (4^n of them), identity first,
/// in a deterministic order.
pub fn enumerate_paulis(n: usize) -> impl Iterator<Item = PauliString> {
    let total = 1u64 << (2 * n);
    (0..total).map(move |code| {
        let mut x = 0u64;
        let mut z = 0u64;
        for q in 0..n {
            let bits = (code >> (2 * q)) & 3;
            let bit = 1u64 << (n - 1 - q);
            match bits {
                1 => x |= bit,
                2 => z |= bit,
                3 => {
                    x |= bit;
                    z |= bit;
                }
                _ => {}
            }
        }
        PauliString { n, x, z, phase: ((x & z).count_ones() % 4) as u8 }
    })
}

/// Pauli expansion of a dense matrix: returns `(c_Q, Q)` with
/// `c_Q = tr[m Q] / 2^n`, keeping only `|c_Q| > tol`.
pub fn pauli_expansion(m: &CMat, tol: f64) -> Result<Vec<(C64, PauliString)>> {
    let n = linalg::qubits_for_dim(m.nrows())?;
    if m.nrows() != m.ncols() {
        return Err(ScvError::DimensionMismatch("pauli expansion needs a square matrix".into()));
    }
    let dim = m.nrows() as f64;
    let mut out = Vec::new();
    for p in enumerate_paulis(n) {
        let c = p.trace_against(m) / dim;
        if c.norm() > tol {
            out.push((c, p));
        }
    }
    Ok(out)
}

/// The set of Paulis with non-negligible coefficient in the expansion of a
/// unitary: `{Q : |tr[U Q]| > tol * 2^n}`.
pub fn q_u_prime(u: &CMat, tol: f64) -> Result<PauliSet> {
    let n = linalg::qubits_for_dim(u.nrows())?;
    let dev = linalg::unitarity_deviation(u);
    if dev > 100.0 * tol.max(1e-12) {
        return Err(ScvError::NotUnitary(dev));
    }
    let dim = u.nrows() as f64;
    let mut set = PauliSet::new(n);
    for p in enumerate_paulis(n) {
        if p.trace_against(u).norm() > tol * dim {
            set.insert(&p)?;
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dagger, identity, kron, max_abs};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense(p: &PauliString) -> CMat {
        p.to_matrix().unwrap()
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let x = PauliString::parse("X").unwrap();
        let z = PauliString::parse("Z").unwrap();
        let y = PauliString::parse("Y").unwrap();
        let prod = x.multiply(&z).unwrap();
        let expect = dense(&y).mapv(|v| v * C64::new(0.0, -1.0));
        assert!(max_abs(&(&dense(&prod) - &expect)) < 1e-15);
        assert_eq!(prod.to_string(), "-iY");
    }

    #[test]
    fn squares_are_identity_with_zero_phase() {
        for s in ["X", "Y", "Z", "XY", "YZ", "XYZ", "YYXZ"] {
            let p = PauliString::parse(s).unwrap();
            let sq = p.multiply(&p).unwrap();
            assert!(sq.is_identity(), "{s}^2 gave {sq}");
        }
    }

    #[test]
    fn xx_times_zz_is_minus_yy() {
        let xx = PauliString::parse("XX").unwrap();
        let zz = PauliString::parse("ZZ").unwrap();
        let prod = xx.multiply(&zz).unwrap();
        // oracle: 2x2 tensor-product matrix multiplication
        let expect = dense(&xx).dot(&dense(&zz));
        assert!(max_abs(&(&dense(&prod) - &expect)) < 1e-15);
        let minus_yy = dense(&PauliString::parse("YY").unwrap()).mapv(|v| -v);
        assert!(max_abs(&(&dense(&prod) - &minus_yy)) < 1e-15);
    }

    #[test]
    fn multiply_phase_exact_all_pairs_n3() {
        // every pair of phaseless classes at n=3 against the dense product
        let classes: Vec<PauliString> = enumerate_paulis(3).collect();
        for a in &classes {
            for b in &classes {
                let prod = a.multiply(b).unwrap();
                let oracle = dense(a).dot(&dense(b));
                assert!(
                    max_abs(&(&dense(&prod) - &oracle)) < 1e-14,
                    "{a} * {b} -> {prod}"
                );
            }
        }
    }

    #[test]
    fn commutes_matches_matrix_commutator() {
        let x = PauliString::parse("X").unwrap();
        let z = PauliString::parse("Z").unwrap();
        assert!(!x.commutes(&z).unwrap());
        let xx = PauliString::parse("XX").unwrap();
        let zz = PauliString::parse("ZZ").unwrap();
        assert!(xx.commutes(&zz).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = 1 + (rng.random::<u32>() % 4) as usize;
            let pick = |rng: &mut ChaCha8Rng| {
                let code = rng.random::<u64>() & ((1 << (2 * n)) - 1);
                enumerate_paulis(n).nth(code as usize).unwrap()
            };
            let p = pick(&mut rng);
            let q = pick(&mut rng);
            let comm = dense(&p).dot(&dense(&q)) - dense(&q).dot(&dense(&p));
            assert_eq!(p.commutes(&q).unwrap(), max_abs(&comm) < 1e-12, "{p} vs {q}");
        }
    }

    #[test]
    fn weight_counts_non_identity_factors() {
        assert_eq!(PauliString::parse("III").unwrap().weight(), 0);
        assert_eq!(PauliString::single(3, 0, 'X').unwrap().weight(), 1);
        assert_eq!(PauliString::parse("XZIY").unwrap().weight(), 3);
    }

    #[test]
    fn matrix_round_trip_recovers_masks_and_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = 1 + (rng.random::<u32>() % 3) as usize;
            let idx = (rng.random::<u64>() % (1 << (2 * n))) as usize;
            let p = enumerate_paulis(n).nth(idx).unwrap();
            let m = dense(&p);
            let terms = pauli_expansion(&m, 1e-10).unwrap();
            assert_eq!(terms.len(), 1);
            let (c, q) = &terms[0];
            assert_eq!(q.class_key(), p.class_key());
            assert!((c - ONE).norm() < 1e-12); // hermitian canonical phase
        }
    }

    #[test]
    fn expansion_of_pauli_exponential() {
        let theta = std::f64::consts::PI / 3.0;
        let z = dense(&PauliString::parse("Z").unwrap());
        let u = linalg::expi_hermitian(&z, theta).unwrap();
        let mut terms = pauli_expansion(&u, 1e-10).unwrap();
        terms.sort_by_key(|(_, p)| p.class_key());
        assert_eq!(terms.len(), 2);
        assert!((terms[0].0 - C64::new(theta.cos(), 0.0)).norm() < 1e-12); // I
        assert!((terms[1].0 - C64::new(0.0, theta.sin())).norm() < 1e-12); // Z
    }

    #[test]
    fn expansion_identity_case() {
        let terms = pauli_expansion(&identity(4), 1e-10).unwrap();
        assert_eq!(terms.len(), 1);
        assert!(terms[0].1.is_identity());
        assert!((terms[0].0 - ONE).norm() < 1e-14);
    }

    #[test]
    fn expansion_is_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 1..=3usize {
            let dim = 1 << n;
            let m = CMat::from_shape_fn((dim, dim), |_| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let terms = pauli_expansion(&m, 0.0).unwrap();
            let sum: f64 = terms.iter().map(|(c, _)| c.norm_sqr()).sum::<f64>() * dim as f64;
            let frob = m.iter().map(|v| v.norm_sqr()).sum::<f64>();
            assert!((sum - frob).abs() < 1e-10);
            // reconstruction
            let mut rebuilt = CMat::zeros((dim, dim));
            for (c, p) in &terms {
                rebuilt = rebuilt + dense(p).mapv(|v| v * c);
            }
            assert!(max_abs(&(&rebuilt - &m)) < 1e-10);
        }
    }

    #[test]
    fn generated_group_of_xx_zz() {
        let gens = GeneratingSet::from_paulis(
            2,
            [PauliString::parse("XX").unwrap(), PauliString::parse("ZZ").unwrap()].iter(),
        )
        .unwrap();
        assert_eq!(gens.rank(), 2);
        let group = generated_group(&gens);
        assert_eq!(group.len(), 4);
        for s in ["II", "XX", "YY", "ZZ"] {
            assert!(group.contains(&PauliString::parse(s).unwrap()), "missing {s}");
        }
    }

    #[test]
    fn empty_generating_set_gives_identity_group() {
        let group = generated_group(&GeneratingSet::empty(3));
        assert_eq!(group.len(), 1);
        assert!(group.contains(&PauliString::identity(3)));
    }

    fn heisenberg_terms(n: usize) -> Vec<PauliString> {
        let mut terms = Vec::new();
        for i in 0..n - 1 {
            for kind in ['X', 'Y', 'Z'] {
                let a = PauliString::single(n, i, kind).unwrap();
                let b = PauliString::single(n, i + 1, kind).unwrap();
                terms.push(a.multiply(&b).unwrap());
            }
        }
        terms
    }

    #[test]
    fn heisenberg_commutant_is_uniform_paulis() {
        let n = 4;
        let set = PauliSet::from_paulis(n, heisenberg_terms(n).iter()).unwrap();
        let com = commutant(&set);
        let group = generated_group(&com);
        assert_eq!(group.len(), 4);
        for s in ["IIII", "XXXX", "YYYY", "ZZZZ"] {
            assert!(group.contains(&PauliString::parse(s).unwrap()), "missing {s}");
        }
    }

    #[test]
    fn transverse_field_commutant() {
        let n = 3;
        let terms: Vec<PauliString> =
            (0..n).map(|i| PauliString::single(n, i, 'X').unwrap()).collect();
        let set = PauliSet::from_paulis(n, terms.iter()).unwrap();
        let group = generated_group(&commutant(&set));
        // {I, X}^(x)n
        assert_eq!(group.len(), 1 << n);
        for p in group.iter() {
            assert_eq!(p.z_mask(), 0);
        }
    }

    #[test]
    fn commutant_of_identity_is_everything() {
        let n = 3;
        let set = PauliSet::from_paulis(n, [PauliString::identity(n)].iter()).unwrap();
        let com = commutant(&set);
        assert_eq!(com.rank(), 2 * n);
        assert_eq!(generated_group(&com).len(), 1 << (2 * n));
    }

    #[test]
    fn double_commutant_contains_original_group() {
        let n = 4;
        let set = PauliSet::from_paulis(n, heisenberg_terms(n).iter()).unwrap();
        let original = generated_group(&GeneratingSet::from_paulis(n, heisenberg_terms(n).iter()).unwrap());
        let double = generated_group(&commutant(&generated_group(&commutant(&set))));
        for p in original.iter() {
            assert!(double.contains(&p), "double commutant lost {p}");
        }
    }

    #[test]
    fn q_u_prime_examples() {
        // exp(i theta Z): {I, Z}
        let z = dense(&PauliString::parse("Z").unwrap());
        let u = linalg::expi_hermitian(&z, std::f64::consts::PI / 5.0).unwrap();
        let set = q_u_prime(&u, 1e-10).unwrap();
        assert_eq!(set.len(), 2);
        assert!(set.contains(&PauliString::parse("I").unwrap()));
        assert!(set.contains(&PauliString::parse("Z").unwrap()));

        // Hadamard = (X + Z)/sqrt(2)
        let h = CMat::from_shape_vec(
            (2, 2),
            vec![ONE, ONE, ONE, C64::new(-1.0, 0.0)],
        )
        .unwrap()
        .mapv(|v| v / C64::new(2f64.sqrt(), 0.0));
        let set = q_u_prime(&h, 1e-10).unwrap();
        assert_eq!(set.len(), 2);
        assert!(set.contains(&PauliString::parse("X").unwrap()));
        assert!(set.contains(&PauliString::parse("Z").unwrap()));
    }

    #[test]
    fn q_u_prime_heisenberg_inside_generated_group() {
        let n = 3;
        let terms = heisenberg_terms(n);
        let mut h = CMat::zeros((1 << n, 1 << n));
        for t in &terms {
            h = h + dense(t);
        }
        let u = linalg::expi_hermitian(&h, 0.17).unwrap();
        let qup = q_u_prime(&u, 1e-10).unwrap();
        let qh = generated_group(&GeneratingSet::from_paulis(n, terms.iter()).unwrap());
        for p in qup.iter() {
            assert!(qh.contains(&p), "{p} outside the generated group");
        }
    }

    #[test]
    fn q_u_prime_rejects_non_unitary() {
        let m = identity(2).mapv(|v| v * 2.0);
        assert!(matches!(q_u_prime(&m, 1e-10), Err(ScvError::NotUnitary(_))));
    }

    #[test]
    fn left_right_mul_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 2;
        let dim = 4;
        let m = CMat::from_shape_fn((dim, dim), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        for p in enumerate_paulis(n) {
            let d = dense(&p);
            assert!(max_abs(&(&p.left_mul(&m) - &d.dot(&m))) < 1e-13);
            assert!(max_abs(&(&p.right_mul(&m) - &m.dot(&d))) < 1e-13);
            let conj = d.dot(&m).dot(&dagger(&d));
            assert!(max_abs(&(&p.conjugate(&m) - &conj)) < 1e-13);
        }
    }

    #[test]
    fn parse_display_round_trip() {
        for s in ["I", "XYZ", "IZXY", "YYYY"] {
            let p = PauliString::parse(s).unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!(PauliString::parse("XQ").is_err());
    }

    #[test]
    fn kron_convention_matches_single_embedding() {
        let x = dense(&PauliString::parse("X").unwrap());
        let embedded = dense(&PauliString::single(2, 0, 'X').unwrap());
        assert!(max_abs(&(&embedded - &kron(&x, &identity(2)))) < 1e-15);
    }
}
