//! Stabilizer states as static generator sets with group-membership queries.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::gf2::{nullspace, BitVec, Echelon, Insert};
use crate::pauli::{PauliOp, DEFAULT_DENSE_LIMIT};
use crate::Complex64;

/// A pure stabilizer state on `n` qubits, held as `n` independent commuting
/// Hermitian generators in canonical (reduced echelon) order.
#[derive(Clone)]
pub struct StabilizerState {
    n: usize,
    generators: Vec<PauliOp>,
    // destabilizer[j] has symplectic product 1 with generator j and 0 with the rest
    destabilizers: Vec<BitVec>,
}

impl PartialEq for StabilizerState {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.generators == other.generators
    }
}

impl Eq for StabilizerState {}

impl std::fmt::Debug for StabilizerState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.generators.iter()).finish()
    }
}

impl StabilizerState {
    /// Validates and canonicalizes a full generator set.
    pub fn from_generators(generators: Vec<PauliOp>) -> Result<Self> {
        let n = generators.first().map(|g| g.num_qubits()).ok_or_else(|| {
            Error::Parameter("a stabilizer state needs at least one generator".into())
        })?;
        check_dim(n, generators.len())?;
        for (i, g) in generators.iter().enumerate() {
            check_dim(n, g.num_qubits())?;
            if !g.is_hermitian() {
                return Err(Error::Parameter(format!("generator {i} ({g}) is not Hermitian")));
            }
        }
        check_pairwise_commuting(&generators)?;
        let mut e = Echelon::new(2 * n, n);
        for (i, g) in generators.iter().enumerate() {
            if let Insert::Dependent(_) = e.insert(&g.symplectic()) {
                return Err(Error::Parameter(format!("generator {i} is not independent")));
            }
        }
        Ok(Self::build(n, canonical_form(generators)))
    }

    fn build(n: usize, generators: Vec<PauliOp>) -> Self {
        let destabilizers = dual_basis(n, &generators);
        StabilizerState { n, generators, destabilizers }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOp] {
        &self.generators
    }

    /// Computational basis state `|0…0⟩`, stabilized by `Z` on every qubit.
    pub fn zero_state(n: usize) -> Self {
        let gens = (0..n).map(|j| PauliOp::single(n, j, crate::pauli::Pauli1::Z)).collect();
        Self::build(n, canonical_form(gens))
    }

    /// Uniformly random stabilizer state.
    ///
    /// Each new generator is drawn uniformly from the symplectic complement of
    /// the span so far, minus the span itself; every Lagrangian subspace is
    /// then reached with the same probability and the signs are independent
    /// fair coins.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 1, "random stabilizer state needs n >= 1");
        let mut gens: Vec<PauliOp> = Vec::with_capacity(n);
        let mut span = Echelon::new(2 * n, n);
        while gens.len() < n {
            let constraints: Vec<BitVec> = gens.iter().map(|g| g.symplectic_dual()).collect();
            let basis = nullspace(&constraints, 2 * n);
            let v = loop {
                let mut v = BitVec::zeros(2 * n);
                for b in &basis {
                    if rng.gen::<bool>() {
                        v.xor_assign(b);
                    }
                }
                if !span.contains(&v) {
                    break v;
                }
            };
            span.insert(&v);
            gens.push(PauliOp::from_symplectic(&v, if rng.gen::<bool>() { 2 } else { 0 }));
        }
        Self::build(n, canonical_form(gens))
    }

    /// Product of a uniformly random subset of generators: a uniform element
    /// of the stabilizer group.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> PauliOp {
        let mut acc = PauliOp::identity(self.n);
        for g in &self.generators {
            if rng.gen::<bool>() {
                acc = acc.mul_unchecked(g);
            }
        }
        acc
    }

    /// Coefficients of `p` in the generator basis, if its Pauli string lies in
    /// the group (up to sign).
    fn decompose(&self, p: &PauliOp) -> Option<Vec<bool>> {
        if self.generators.iter().any(|g| g.symplectic_ip_unchecked(p)) {
            return None;
        }
        let pd = p.symplectic_dual();
        // ⟨p, d_j⟩ = coefficient of generator j
        Some(self.destabilizers.iter().map(|d| pd.dot(d)).collect())
    }

    /// `⟨ψ|P|ψ⟩ ∈ {−1, 0, +1}`.
    pub fn expectation(&self, p: &PauliOp) -> Result<i8> {
        check_dim(self.n, p.num_qubits())?;
        let Some(coeffs) = self.decompose(p) else { return Ok(0) };
        let mut acc = PauliOp::identity(self.n);
        for (g, c) in self.generators.iter().zip(coeffs) {
            if c {
                acc = acc.mul_unchecked(g);
            }
        }
        if acc.x_bits() != p.x_bits() || acc.z_bits() != p.z_bits() {
            return Ok(0);
        }
        Ok(match (p.phase_exponent() + 4 - acc.phase_exponent()) % 4 {
            0 => 1,
            2 => -1,
            // a non-Hermitian query on a Hermitian group element
            _ => 0,
        })
    }

    /// Smallest stabilizer state whose group contains every input operator
    /// with its sign; missing generators are filled in deterministically with
    /// sign `+1`.
    pub fn complete(ops: &[PauliOp]) -> Result<Self> {
        let n = ops
            .first()
            .map(|o| o.num_qubits())
            .ok_or_else(|| Error::Parameter("cannot complete an empty operator list".into()))?;
        for (i, o) in ops.iter().enumerate() {
            check_dim(n, o.num_qubits())?;
            if !o.is_hermitian() {
                return Err(Error::Parameter(format!("operator {i} ({o}) is not Hermitian")));
            }
        }
        check_pairwise_commuting(ops)?;
        let mut span = Echelon::new(2 * n, n);
        let mut independent: Vec<PauliOp> = Vec::new();
        for (i, o) in ops.iter().enumerate() {
            match span.insert(&o.symplectic()) {
                Insert::Added(_) => independent.push(o.clone()),
                Insert::Dependent(comb) => {
                    let mut acc = PauliOp::identity(n);
                    for k in comb.iter_ones() {
                        acc = acc.mul_unchecked(&independent[k]);
                    }
                    if acc.phase_exponent() != o.phase_exponent() {
                        return Err(Error::Contradiction(i));
                    }
                }
            }
        }
        while independent.len() < n {
            let constraints: Vec<BitVec> = independent.iter().map(|g| g.symplectic_dual()).collect();
            let v = nullspace(&constraints, 2 * n)
                .into_iter()
                .find(|v| !span.contains(v))
                .expect("an isotropic subspace below dimension n has a proper complement");
            span.insert(&v);
            independent.push(PauliOp::from_symplectic(&v, 0));
        }
        Ok(Self::build(n, canonical_form(independent)))
    }

    /// Like [`complete`](Self::complete), but an operator whose sign
    /// contradicts the ones accepted before it is skipped instead of failing.
    /// Returns the state and the indices of skipped operators.
    pub fn complete_dropping_conflicts(ops: &[PauliOp]) -> Result<(Self, Vec<usize>)> {
        let n = ops
            .first()
            .map(|o| o.num_qubits())
            .ok_or_else(|| Error::Parameter("cannot complete an empty operator list".into()))?;
        for o in ops {
            check_dim(n, o.num_qubits())?;
        }
        check_pairwise_commuting(ops)?;
        let mut span = Echelon::new(2 * n, n);
        let mut independent: Vec<PauliOp> = Vec::new();
        let mut dropped = Vec::new();
        for (i, o) in ops.iter().enumerate() {
            if !o.is_hermitian() {
                return Err(Error::Parameter(format!("operator {i} ({o}) is not Hermitian")));
            }
            let (residual, comb) = span.reduce(&o.symplectic());
            if residual.is_zero() {
                let mut acc = PauliOp::identity(n);
                for k in comb.iter_ones() {
                    acc = acc.mul_unchecked(&independent[k]);
                }
                if acc.phase_exponent() != o.phase_exponent() {
                    dropped.push(i);
                }
            } else {
                span.insert(&o.symplectic());
                independent.push(o.clone());
            }
        }
        let state = Self::complete(&independent)?;
        Ok((state, dropped))
    }

    /// `(1/2ⁿ) Π_k (I + g_k)`.
    pub fn density_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.n > DEFAULT_DENSE_LIMIT {
            return Err(Error::Capacity { what: "stabilizer projector", n: self.n, limit: DEFAULT_DENSE_LIMIT });
        }
        let dim = 1usize << self.n;
        let mut rho = DMatrix::<Complex64>::identity(dim, dim);
        for g in &self.generators {
            let gm = g.dense_matrix()?;
            rho = (&rho + &rho * gm) * Complex64::new(0.5, 0.0);
        }
        Ok(rho)
    }

    /// The stabilized statevector, fixed up to a global phase by making its
    /// largest-magnitude amplitude real and positive.
    pub fn statevector(&self) -> Result<Vec<Complex64>> {
        if self.n > DEFAULT_DENSE_LIMIT {
            return Err(Error::Capacity { what: "stabilizer statevector", n: self.n, limit: DEFAULT_DENSE_LIMIT });
        }
        let dim = 1usize << self.n;
        // project a basis state with nonzero overlap: try each until one survives
        for start in 0..dim {
            let mut psi = vec![Complex64::new(0.0, 0.0); dim];
            psi[start] = Complex64::new(1.0, 0.0);
            for g in &self.generators {
                let gp = g.apply(&psi)?;
                for (a, b) in psi.iter_mut().zip(gp) {
                    *a = (*a + b) * 0.5;
                }
            }
            let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                let v = DVector::from_vec(psi) / Complex64::new(norm, 0.0);
                return Ok(v.iter().copied().collect());
            }
        }
        unreachable!("a stabilizer projector has rank one")
    }
}

fn check_pairwise_commuting(ops: &[PauliOp]) -> Result<()> {
    for i in 0..ops.len() {
        for j in (i + 1)..ops.len() {
            if ops[i].symplectic_ip_unchecked(&ops[j]) {
                return Err(Error::Inconsistent(i, j));
            }
        }
    }
    Ok(())
}

/// Reduced row echelon form over the symplectic vectors, carrying signs
/// through the row multiplications. Input must be independent and commuting.
fn canonical_form(mut rows: Vec<PauliOp>) -> Vec<PauliOp> {
    let n = rows.first().map(|r| r.num_qubits()).unwrap_or(0);
    let vecs = |r: &PauliOp, col: usize| if col < n { r.x_bits().get(col) } else { r.z_bits().get(col - n) };
    let mut r = 0;
    for col in 0..2 * n {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| vecs(&rows[i], col)) else { continue };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && vecs(row, col) {
                *row = row.mul_unchecked(&pivot);
            }
        }
        r += 1;
    }
    rows.sort_by_key(|a| a.symplectic());
    rows
}

fn dual_basis(n: usize, generators: &[PauliOp]) -> Vec<BitVec> {
    // Rows w_i = (z_i || x_i) so that w_i · d = ⟨g_i, d⟩. The echelon keeps
    // reduced rows R = T·W; setting d at the pivot of row i to T[i][j]
    // solves W·d = e_j.
    let mut e = Echelon::new(2 * n, n);
    for g in generators {
        e.insert(&g.symplectic_dual());
    }
    let mut out = vec![BitVec::zeros(2 * n); n];
    for (pivot, comb) in e.pivot_rows() {
        for j in comb.iter_ones() {
            out[j].set(pivot, true);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliOp {
        s.parse().unwrap()
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 5, 20, 70] {
            let s = StabilizerState::random(n, &mut rng);
            // re-validating through the checked constructor must succeed
            let again = StabilizerState::from_generators(s.generators().to_vec()).unwrap();
            assert_eq!(again, s);
            for g in s.generators() {
                assert_eq!(s.expectation(g).unwrap(), 1);
                assert_eq!(s.expectation(&g.negated()).unwrap(), -1);
            }
        }
    }

    #[test]
    fn elements_are_stabilized() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = StabilizerState::random(9, &mut rng);
        for _ in 0..100 {
            let e = s.random_element(&mut rng);
            assert_eq!(s.expectation(&e).unwrap(), 1);
            assert!(s.generators().iter().all(|g| g.commutes(&e).unwrap()));
        }
    }

    #[test]
    fn anticommuting_query_has_zero_expectation() {
        let s = StabilizerState::zero_state(2);
        assert_eq!(s.expectation(&p("+XI")).unwrap(), 0);
        assert_eq!(s.expectation(&p("+ZZ")).unwrap(), 1);
        assert_eq!(s.expectation(&p("-IZ")).unwrap(), -1);
    }

    #[test]
    fn complete_examples() {
        let s = StabilizerState::complete(&[p("+ZI")]).unwrap();
        assert_eq!(s.expectation(&p("+ZI")).unwrap(), 1);
        assert!(matches!(
            StabilizerState::complete(&[p("+ZI"), p("-ZI")]),
            Err(Error::Contradiction(1))
        ));
        assert!(matches!(
            StabilizerState::complete(&[p("+XI"), p("+ZI")]),
            Err(Error::Inconsistent(0, 1))
        ));
        let full = StabilizerState::complete(&[p("+XX"), p("-ZZ")]).unwrap();
        assert_eq!(full, StabilizerState::from_generators(vec![p("-ZZ"), p("+XX")]).unwrap());
    }

    #[test]
    fn rejects_bad_generator_sets() {
        assert!(StabilizerState::from_generators(vec![p("+XI"), p("+ZI")]).is_err());
        assert!(StabilizerState::from_generators(vec![p("+ZI"), p("+ZI")]).is_err());
        assert!(StabilizerState::from_generators(vec![p("+ZI")]).is_err());
    }
}
