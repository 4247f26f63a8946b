//! Signed n-qubit Pauli operators in the binary symplectic encoding.
//!
//! An operator is `i^phase · P_1 ⊗ … ⊗ P_n` where `P_j ∈ {I, X, Y, Z}` is
//! read off the bit pair `(x_j, z_j)`: `(1,0) = X`, `(1,1) = Y`, `(0,1) = Z`.
//! Note the phase is relative to `Y`, not to `XZ`; a Hermitian operator
//! therefore always has an even phase exponent.
//!
//! Dense matrices and statevectors index qubit 0 as the most significant bit
//! of a basis index, so `dense_matrix` equals the Kronecker product in qubit
//! order.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::gf2::BitVec;
use crate::Complex64;

/// Default largest qubit count for which dense 2ⁿ-dimensional objects are built.
pub const DEFAULT_DENSE_LIMIT: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli1 {
    I,
    X,
    Y,
    Z,
}

impl Pauli1 {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli1::I => (false, false),
            Pauli1::X => (true, false),
            Pauli1::Y => (true, true),
            Pauli1::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli1::I,
            (true, false) => Pauli1::X,
            (true, true) => Pauli1::Y,
            (false, true) => Pauli1::Z,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli1::I => 'I',
            Pauli1::X => 'X',
            Pauli1::Y => 'Y',
            Pauli1::Z => 'Z',
        }
    }

    pub fn matrix(self) -> DMatrix<Complex64> {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli1::I => DMatrix::from_row_slice(2, 2, &[one, o, o, one]),
            Pauli1::X => DMatrix::from_row_slice(2, 2, &[o, one, one, o]),
            Pauli1::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Pauli1::Z => DMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    n: usize,
    x: BitVec,
    z: BitVec,
    phase: u8,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        PauliOp { n, x: BitVec::zeros(n), z: BitVec::zeros(n), phase: 0 }
    }

    pub fn new(x: BitVec, z: BitVec, phase_exponent: u8) -> Result<Self> {
        check_dim(x.len(), z.len())?;
        Ok(PauliOp { n: x.len(), x, z, phase: phase_exponent % 4 })
    }

    /// `(-1)^negative · A_1 ⊗ … ⊗ A_n`, the form of a scheme table entry.
    pub fn signed(x: BitVec, z: BitVec, negative: bool) -> Result<Self> {
        Self::new(x, z, if negative { 2 } else { 0 })
    }

    pub fn from_paulis(paulis: &[Pauli1], negative: bool) -> Self {
        let n = paulis.len();
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        for (j, p) in paulis.iter().enumerate() {
            let (xb, zb) = p.bits();
            x.set(j, xb);
            z.set(j, zb);
        }
        PauliOp { n, x, z, phase: if negative { 2 } else { 0 } }
    }

    /// A single-qubit factor `p` on qubit `j`, identity elsewhere.
    pub fn single(n: usize, j: usize, p: Pauli1) -> Self {
        let mut ps = vec![Pauli1::I; n];
        ps[j] = p;
        Self::from_paulis(&ps, false)
    }

    /// Builds from a 2n-bit symplectic vector `(x || z)`.
    pub fn from_symplectic(v: &BitVec, phase_exponent: u8) -> Self {
        let n = v.len() / 2;
        PauliOp { n, x: v.slice(0, n), z: v.slice(n, n), phase: phase_exponent % 4 }
    }

    pub fn symplectic(&self) -> BitVec {
        self.x.concat(&self.z)
    }

    /// `(z || x)`: dotting with this gives the symplectic form against `self`.
    pub(crate) fn symplectic_dual(&self) -> BitVec {
        self.z.concat(&self.x)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> &BitVec {
        &self.x
    }

    pub fn z_bits(&self) -> &BitVec {
        &self.z
    }

    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn factor(&self, j: usize) -> Pauli1 {
        Pauli1::from_bits(self.x.get(j), self.z.get(j))
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    pub fn is_negative(&self) -> bool {
        self.phase == 2
    }

    /// True for `±I` and `±iI`.
    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn is_identity(&self) -> bool {
        self.is_identity_up_to_phase() && self.phase == 0
    }

    pub fn weight(&self) -> usize {
        let mut support = self.x.clone();
        for (a, b) in support.words_mut().iter_mut().zip(self.z.words()) {
            *a |= *b;
        }
        support.count_ones()
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.phase = (out.phase + 2) % 4;
        out
    }

    /// Same Pauli string with the phase dropped.
    pub fn unsigned(&self) -> Self {
        let mut out = self.clone();
        out.phase = 0;
        out
    }

    #[inline]
    pub(crate) fn symplectic_ip_unchecked(&self, other: &PauliOp) -> bool {
        let mut ones = 0u32;
        for i in 0..self.x.words().len() {
            ones += ((self.x.words()[i] & other.z.words()[i]) ^ (self.z.words()[i] & other.x.words()[i]))
                .count_ones();
        }
        ones & 1 == 1
    }

    /// `xᵀ(self)·z(other) + zᵀ(self)·x(other)` over GF(2); phases are ignored.
    pub fn symplectic_ip(&self, other: &PauliOp) -> Result<bool> {
        check_dim(self.n, other.n)?;
        Ok(self.symplectic_ip_unchecked(other))
    }

    pub fn commutes(&self, other: &PauliOp) -> Result<bool> {
        Ok(!self.symplectic_ip(other)?)
    }

    pub(crate) fn mul_unchecked(&self, other: &PauliOp) -> PauliOp {
        // Per qubit, P_a P_b = i^{±1} P_c exactly when the factors are distinct
        // non-identity Paulis: +1 for the cyclic orders XY, YZ, ZX.
        let mut plus = 0u32;
        let mut minus = 0u32;
        let words = self.x.words().len();
        let mut x = BitVec::zeros(self.n);
        let mut z = BitVec::zeros(self.n);
        for i in 0..words {
            let (x1, z1) = (self.x.words()[i], self.z.words()[i]);
            let (x2, z2) = (other.x.words()[i], other.z.words()[i]);
            let a_x = x1 & !z1;
            let a_y = x1 & z1;
            let a_z = !x1 & z1;
            let b_x = x2 & !z2;
            let b_y = x2 & z2;
            let b_z = !x2 & z2;
            plus += ((a_x & b_y) | (a_y & b_z) | (a_z & b_x)).count_ones();
            minus += ((a_y & b_x) | (a_z & b_y) | (a_x & b_z)).count_ones();
            x.words_mut()[i] = x1 ^ x2;
            z.words_mut()[i] = z1 ^ z2;
        }
        let phase = (self.phase as u32 + other.phase as u32 + plus + 3 * minus) % 4;
        PauliOp { n: self.n, x, z, phase: phase as u8 }
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliOp) -> Result<PauliOp> {
        check_dim(self.n, other.n)?;
        Ok(self.mul_unchecked(other))
    }

    /// Uniform over the `2·4ⁿ` signed Hermitian Paulis, optionally excluding `±I`.
    pub fn random<R: Rng + ?Sized>(n: usize, allow_identity: bool, rng: &mut R) -> Self {
        assert!(n >= 1, "random_pauli needs n >= 1");
        loop {
            let mut x = BitVec::zeros(n);
            let mut z = BitVec::zeros(n);
            fill_random(&mut x, rng);
            fill_random(&mut z, rng);
            let op = PauliOp { n, x, z, phase: if rng.gen::<bool>() { 2 } else { 0 } };
            if allow_identity || !op.is_identity_up_to_phase() {
                return op;
            }
        }
    }

    /// Dense `2ⁿ × 2ⁿ` matrix as a Kronecker product of single-qubit factors.
    pub fn dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.dense_matrix_with_limit(DEFAULT_DENSE_LIMIT)
    }

    pub fn dense_matrix_with_limit(&self, limit: usize) -> Result<DMatrix<Complex64>> {
        if self.n > limit {
            return Err(Error::Capacity { what: "dense Pauli matrix", n: self.n, limit });
        }
        let mut m = DMatrix::from_element(1, 1, phase_value(self.phase));
        for j in 0..self.n {
            m = m.kronecker(&self.factor(j).matrix());
        }
        Ok(m)
    }

    /// Basis-index masks `(x_mask, z_mask)` and the scalar `i^{phase + #Y}`,
    /// so that `P|b⟩ = scalar · (−1)^{popcount(b & z_mask)} |b ⊕ x_mask⟩`.
    pub(crate) fn index_action(&self) -> (u64, u64, Complex64) {
        assert!(self.n <= 63, "statevector action needs n <= 63");
        let mut xm = 0u64;
        let mut zm = 0u64;
        let mut ys = 0u32;
        for j in 0..self.n {
            let bit = 1u64 << (self.n - 1 - j);
            let (xb, zb) = (self.x.get(j), self.z.get(j));
            if xb {
                xm |= bit;
            }
            if zb {
                zm |= bit;
            }
            if xb && zb {
                ys += 1;
            }
        }
        (xm, zm, phase_value(((self.phase as u32 + ys) % 4) as u8))
    }

    /// `P|ψ⟩` without building the dense matrix.
    pub fn apply(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(1usize << self.n, psi.len())?;
        let (xm, zm, scalar) = self.index_action();
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        for (b, amp) in psi.iter().enumerate() {
            let sign = if (b as u64 & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[(b as u64 ^ xm) as usize] = scalar * *amp * sign;
        }
        Ok(out)
    }

    /// `⟨ψ|P|ψ⟩` (real part; exact for Hermitian `P`).
    pub fn expectation_in(&self, psi: &[Complex64]) -> Result<f64> {
        check_dim(1usize << self.n, psi.len())?;
        let (xm, zm, scalar) = self.index_action();
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, amp) in psi.iter().enumerate() {
            let sign = if (b as u64 & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            let target = (b as u64 ^ xm) as usize;
            acc += psi[target].conj() * scalar * *amp * sign;
        }
        Ok(acc.re)
    }
}

fn fill_random<R: Rng + ?Sized>(v: &mut BitVec, rng: &mut R) {
    let len = v.len();
    let words = v.words_mut();
    for w in words.iter_mut() {
        *w = rng.gen();
    }
    if !len.is_multiple_of(64) {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << (len % 64)) - 1;
        }
    }
}

pub(crate) fn phase_value(e: u8) -> Complex64 {
    match e % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })?;
        for j in 0..self.n {
            write!(f, "{}", self.factor(j).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliOp {
    type Err = Error;

    /// Accepts the canonical `+XYZI` / `-XYZI` form (and `−`, `+i`, `-i`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: &str| Error::Parse { line: 0, msg: format!("{msg}: {s:?}") };
        let (mut phase, rest) = if let Some(r) = s.strip_prefix('+') {
            (0u8, r)
        } else if let Some(r) = s.strip_prefix('-').or_else(|| s.strip_prefix('−')) {
            (2u8, r)
        } else {
            return Err(bad("missing sign"));
        };
        let rest = match rest.strip_prefix('i') {
            Some(r) => {
                phase += 1;
                r
            }
            None => rest,
        };
        let paulis = rest
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli1::I),
                'X' => Ok(Pauli1::X),
                'Y' => Ok(Pauli1::Y),
                'Z' => Ok(Pauli1::Z),
                _ => Err(bad("unexpected character")),
            })
            .collect::<Result<Vec<_>>>()?;
        if paulis.is_empty() {
            return Err(bad("empty operator"));
        }
        let mut op = PauliOp::from_paulis(&paulis, false);
        op.phase = phase % 4;
        Ok(op)
    }
}
