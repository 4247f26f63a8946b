//! Stabilizer money: bank-side generation of the secret states and the public
//! operator table, and the averaged-measurement verifier.

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::pauli::{PauliOp, DEFAULT_DENSE_LIMIT};
use crate::stabilizer::StabilizerState;
use crate::Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeParams {
    /// Qubits per register.
    pub n: usize,
    /// Operators per register.
    pub m: usize,
    /// Register count.
    pub l: usize,
    pub epsilon: f64,
}

impl SchemeParams {
    pub fn new(n: usize, m: usize, l: usize, epsilon: f64) -> Result<Self> {
        let p = SchemeParams { n, m, l, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.l == 0 {
            return Err(Error::Parameter(format!("n, m, l must be >= 1 (got {self:?})")));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Parameter(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        Ok(())
    }

    /// `l / ε² ≥ n`, the condition under which honest money is accepted with
    /// probability exponentially close to one.
    pub fn is_sound(&self) -> bool {
        self.epsilon > 0.0 && self.l as f64 / (self.epsilon * self.epsilon) >= self.n as f64
    }

    /// Expected planted clique size per register, `⌈εm⌉`.
    pub fn expected_planted(&self) -> usize {
        (self.epsilon * self.m as f64).ceil() as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecretKey {
    pub states: Vec<StabilizerState>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoneyScheme {
    pub params: SchemeParams,
    /// `table[i][j]` is operator `j` of register `i`.
    pub table: Vec<Vec<PauliOp>>,
}

impl MoneyScheme {
    /// Checks shapes and the no-`±I` rule.
    pub fn new(params: SchemeParams, table: Vec<Vec<PauliOp>>) -> Result<Self> {
        params.validate()?;
        check_dim(params.l, table.len())?;
        for row in &table {
            check_dim(params.m, row.len())?;
            for op in row {
                check_dim(params.n, op.num_qubits())?;
                if op.is_identity_up_to_phase() {
                    return Err(Error::Parameter("table entries may not be ±I".into()));
                }
                if !op.is_hermitian() {
                    return Err(Error::Parameter(format!("table entry {op} is not Hermitian")));
                }
            }
        }
        Ok(MoneyScheme { params, table })
    }

    pub fn register(&self, i: usize) -> &[PauliOp] {
        &self.table[i]
    }

    /// Pairs `(j, k)`, `j < k`, whose Pauli strings agree up to sign.
    pub fn duplicates(&self, i: usize) -> Vec<(usize, usize)> {
        let ops = &self.table[i];
        let mut keyed: Vec<(crate::gf2::BitVec, usize)> =
            ops.iter().enumerate().map(|(j, o)| (o.symplectic(), j)).collect();
        keyed.sort();
        let mut out = Vec::new();
        let mut start = 0;
        while start < keyed.len() {
            let mut end = start + 1;
            while end < keyed.len() && keyed[end].0 == keyed[start].0 {
                end += 1;
            }
            for a in start..end {
                for b in (a + 1)..end {
                    let (j, k) = (keyed[a].1, keyed[b].1);
                    out.push((j.min(k), j.max(k)));
                }
            }
            start = end;
        }
        out.sort();
        out
    }

    /// Entries of register `i` stabilizing the secret state (evaluation only).
    pub fn planted_indices(&self, secret: &SecretKey, i: usize) -> Vec<usize> {
        self.table[i]
            .iter()
            .enumerate()
            .filter(|(_, op)| secret.states[i].expectation(op) == Ok(1))
            .map(|(j, _)| j)
            .collect()
    }
}

/// Bank-side generation of a fresh secret and its public table.
pub fn gen_scheme<R: Rng + ?Sized>(params: SchemeParams, rng: &mut R) -> Result<(SecretKey, MoneyScheme)> {
    params.validate()?;
    if !params.is_sound() {
        log::warn!(
            "l/eps^2 = {:.3} is below n = {}; honest money may be rejected",
            params.l as f64 / (params.epsilon * params.epsilon),
            params.n
        );
    }
    let mut states = Vec::with_capacity(params.l);
    let mut table = Vec::with_capacity(params.l);
    for _ in 0..params.l {
        let state = StabilizerState::random(params.n, rng);
        let row = (0..params.m)
            .map(|_| {
                if rng.gen::<f64>() < params.epsilon {
                    // uniform over the group minus the identity
                    loop {
                        let e = state.random_element(rng);
                        if !e.is_identity_up_to_phase() {
                            break e;
                        }
                    }
                } else {
                    PauliOp::random(params.n, false, rng)
                }
            })
            .collect();
        states.push(state);
        table.push(row);
    }
    Ok((SecretKey { states }, MoneyScheme { params, table }))
}

/// One register of a money state.
#[derive(Clone, Debug, PartialEq)]
pub enum Register {
    Stabilizer(StabilizerState),
    /// `Σ w_k |v_k⟩⟨v_k|` over unit statevectors of length `2ⁿ`.
    DenseMixed(Vec<(f64, Vec<Complex64>)>),
    /// `I/2ⁿ` on `n` qubits.
    FullyMixed(usize),
}

impl Register {
    pub fn dense_mixed(components: Vec<(f64, Vec<Complex64>)>) -> Result<Self> {
        let dim = components
            .first()
            .map(|(_, v)| v.len())
            .ok_or_else(|| Error::Parameter("empty mixture".into()))?;
        if !dim.is_power_of_two() {
            return Err(Error::Parameter(format!("statevector length {dim} is not a power of two")));
        }
        let mut total = 0.0;
        for (w, v) in &components {
            check_dim(dim, v.len())?;
            if *w < 0.0 {
                return Err(Error::Parameter(format!("negative mixture weight {w}")));
            }
            let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::Parameter(format!("statevector norm² {norm} is not 1")));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!("mixture weights sum to {total}")));
        }
        Ok(Register::DenseMixed(components))
    }

    /// `I/2ⁿ`.
    pub fn fully_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("a register needs at least one qubit".into()));
        }
        Ok(Register::FullyMixed(n))
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            Register::Stabilizer(s) => s.num_qubits(),
            Register::DenseMixed(c) => c[0].1.len().trailing_zeros() as usize,
            Register::FullyMixed(n) => *n,
        }
    }

    /// `Tr[P ρ]`.
    pub fn expectation(&self, p: &PauliOp) -> Result<f64> {
        match self {
            Register::Stabilizer(s) => Ok(s.expectation(p)? as f64),
            Register::FullyMixed(n) => {
                check_dim(*n, p.num_qubits())?;
                // Tr[P]/2ⁿ vanishes unless P is a multiple of the identity
                Ok(if p.is_identity_up_to_phase() { crate::pauli::phase_value(p.phase_exponent()).re } else { 0.0 })
            }
            Register::DenseMixed(c) => {
                let n = self.num_qubits();
                if n > DEFAULT_DENSE_LIMIT {
                    return Err(Error::Capacity { what: "dense register", n, limit: DEFAULT_DENSE_LIMIT });
                }
                check_dim(n, p.num_qubits())?;
                c.iter().try_fold(0.0, |acc, (w, v)| Ok(acc + w * p.expectation_in(v)?))
            }
        }
    }
}

/// Samples the `±1` outcome of measuring `p` on one register.
pub fn measure_register<R: Rng + ?Sized>(register: &Register, p: &PauliOp, rng: &mut R) -> Result<i8> {
    let plus = (1.0 + register.expectation(p)?) / 2.0;
    Ok(if rng.gen::<f64>() < plus { 1 } else { -1 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoneyState {
    pub registers: Vec<Register>,
}

impl MoneyState {
    pub fn honest(secret: &SecretKey) -> Self {
        MoneyState { registers: secret.states.iter().cloned().map(Register::Stabilizer).collect() }
    }

    pub fn fully_mixed(n: usize, l: usize) -> Result<Self> {
        let r = Register::fully_mixed(n)?;
        Ok(MoneyState { registers: vec![r; l] })
    }
}

pub fn honest_money(secret: &SecretKey) -> MoneyState {
    MoneyState::honest(secret)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationOutcome {
    pub q_value: f64,
    pub accepted: bool,
    pub per_register_outcomes: Vec<i8>,
    pub chosen_indices: Vec<usize>,
}

/// `2·sum ≥ ε·l`, evaluated exactly on the binary expansion of `ε`.
pub(crate) fn meets_threshold(sum: i64, epsilon: f64, l: usize) -> bool {
    if sum <= 0 {
        return sum == 0 && epsilon == 0.0;
    }
    if epsilon == 0.0 {
        return true;
    }
    // ε = mant · 2^exp with exp < 0 for ε ∈ (0, 1]
    let bits = epsilon.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let (mant, exp) = if raw_exp == 0 {
        (bits & ((1u64 << 52) - 1), -1074i64)
    } else {
        ((bits & ((1u64 << 52) - 1)) | (1u64 << 52), raw_exp - 1075)
    };
    let rhs = mant as u128 * l as u128;
    let lhs_base = 2 * sum as u128;
    if exp >= 0 {
        return lhs_base >= rhs << exp;
    }
    let shift = (-exp) as u32;
    if shift >= lhs_base.leading_zeros() {
        // lhs ≥ 2^127 exceeds any rhs (< 2^117)
        return true;
    }
    (lhs_base << shift) >= rhs
}

/// Picks `j(i)` uniformly per register, measures, averages, and compares with `ε/2`.
pub fn verify<R: Rng + ?Sized>(scheme: &MoneyScheme, money: &MoneyState, rng: &mut R) -> Result<VerificationOutcome> {
    let p = &scheme.params;
    check_dim(p.l, money.registers.len())?;
    for r in &money.registers {
        check_dim(p.n, r.num_qubits())?;
    }
    let mut outcomes = Vec::with_capacity(p.l);
    let mut chosen = Vec::with_capacity(p.l);
    for (i, reg) in money.registers.iter().enumerate() {
        let j = rng.gen_range(0..p.m);
        outcomes.push(measure_register(reg, &scheme.table[i][j], rng)?);
        chosen.push(j);
    }
    let sum: i64 = outcomes.iter().map(|&o| o as i64).sum();
    Ok(VerificationOutcome {
        q_value: sum as f64 / p.l as f64,
        accepted: meets_threshold(sum, p.epsilon, p.l),
        per_register_outcomes: outcomes,
        chosen_indices: chosen,
    })
}

/// Expected `q_value` of `money` over the verifier's randomness.
pub fn expected_q(scheme: &MoneyScheme, money: &MoneyState) -> Result<f64> {
    check_dim(scheme.params.l, money.registers.len())?;
    let mut total = 0.0;
    for (row, reg) in scheme.table.iter().zip(&money.registers) {
        let mut s = 0.0;
        for op in row {
            s += reg.expectation(op)?;
        }
        total += s / row.len() as f64;
    }
    Ok(total / scheme.params.l as f64)
}
