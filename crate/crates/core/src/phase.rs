//! Low-ε forgery. Each register is prepared by repeatedly drawing an
//! eigenstate of `H = (1/m)Σ_j E_j`, estimating its phase under `e^{2πiH/4}`,
//! and keeping it when the estimate lands in the accept window.
//!
//! Phase estimation is simulated through its exact ideal outcome law
//! `P(z|φ) = sin²(πf) / (N² sin²(π(k − f)/N))` with `N = 2^q`, `f = frac(φN)`
//! and `k = z − ⌊φN⌋`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::money::{MoneyScheme, MoneyState, Register};
use crate::pauli::{PauliOp, DEFAULT_DENSE_LIMIT};
use crate::Complex64;

/// Dense `H = (1/m)Σ_j E_j` with its eigendecomposition.
#[derive(Clone, Debug)]
pub struct RegisterHamiltonian {
    n: usize,
    m: usize,
    h: DMatrix<Complex64>,
    /// Ascending.
    eigenvalues: Vec<f64>,
    /// Column `j` belongs to `eigenvalues[j]`.
    eigenvectors: DMatrix<Complex64>,
}

pub const RECONSTRUCTION_TOL: f64 = 1e-8;

impl RegisterHamiltonian {
    pub fn from_ops(ops: &[PauliOp]) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::Parameter("register has no operators".into()))?;
        let n = first.num_qubits();
        if n > DEFAULT_DENSE_LIMIT {
            return Err(Error::Capacity { what: "register Hamiltonian", n, limit: DEFAULT_DENSE_LIMIT });
        }
        let dim = 1usize << n;
        let m = ops.len();
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        for op in ops {
            check_dim(n, op.num_qubits())?;
            let (xm, zm, scalar) = op.index_action();
            let scalar = scalar / m as f64;
            for b in 0..dim {
                let sign = if (b as u64 & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                h[((b as u64 ^ xm) as usize, b)] += scalar * sign;
            }
        }
        Self::from_matrix(h, m)
    }

    /// Wraps an arbitrary Hermitian matrix; `m` is the operator count used by
    /// the attack thresholds.
    pub fn from_matrix(h: DMatrix<Complex64>, m: usize) -> Result<Self> {
        let dim = h.nrows();
        if dim != h.ncols() || !dim.is_power_of_two() {
            return Err(Error::Parameter(format!("Hamiltonian must be 2ⁿ×2ⁿ, got {}x{}", h.nrows(), h.ncols())));
        }
        if m == 0 {
            return Err(Error::Parameter("operator count must be positive".into()));
        }
        for i in 0..dim {
            for j in i..dim {
                if (h[(i, j)] - h[(j, i)].conj()).norm() > 1e-10 {
                    return Err(Error::Contract(format!("Hamiltonian is not Hermitian at ({i}, {j})")));
                }
            }
        }
        let eig = SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
        let out = RegisterHamiltonian { n: dim.trailing_zeros() as usize, m, h, eigenvalues, eigenvectors };
        let err = out.reconstruction_error();
        if err > RECONSTRUCTION_TOL {
            return Err(Error::Contract(format!("eigendecomposition residual {err:e}")));
        }
        if out.eigenvalues.iter().any(|l| l.abs() > 1.0 + 1e-9) {
            return Err(Error::Contract("eigenvalue outside [-1, 1]".into()));
        }
        Ok(out)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn num_ops(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.h
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, j: usize) -> Vec<Complex64> {
        self.eigenvectors.column(j).iter().copied().collect()
    }

    /// `max |(VΛV† − H)_{ab}|`.
    pub fn reconstruction_error(&self) -> f64 {
        let dim = self.h.nrows();
        let lambda = DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                Complex64::new(self.eigenvalues[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let rebuilt = &self.eigenvectors * lambda * self.eigenvectors.adjoint();
        (rebuilt - &self.h).iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    /// `(Tr H / 2ⁿ, Tr H² / 2ⁿ)` from the matrix entries.
    pub fn moments(&self) -> (f64, f64) {
        let dim = self.h.nrows() as f64;
        let tr = self.h.diagonal().iter().map(|z| z.re).sum::<f64>() / dim;
        let tr2 = self.h.iter().map(|z| z.norm_sqr()).sum::<f64>() / dim;
        (tr, tr2)
    }
}

pub fn register_hamiltonian(ops: &[PauliOp]) -> Result<RegisterHamiltonian> {
    RegisterHamiltonian::from_ops(ops)
}

/// `f` = fraction of eigenvalues with `|λ| ≥ 1/(2√m)`, `g` = fraction with
/// `λ ≥ 1/(2√m)`.
pub fn register_fractions(h: &RegisterHamiltonian, m: usize) -> (f64, f64) {
    let t = 0.5 / (m as f64).sqrt();
    let total = h.eigenvalues.len() as f64;
    let f = h.eigenvalues.iter().filter(|l| l.abs() >= t).count() as f64 / total;
    let g = h.eigenvalues.iter().filter(|&&l| l >= t).count() as f64 / total;
    (f, g)
}

/// Smallest `c` with `2^c ≥ x`, for `x > 0`.
fn ceil_log2(x: f64) -> u32 {
    let mut c = x.log2().ceil().max(0.0) as i32;
    while c > 0 && 2f64.powi(c - 1) >= x {
        c -= 1;
    }
    while 2f64.powi(c) < x {
        c += 1;
    }
    c as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimationParams {
    /// Precision bits.
    pub r: u32,
    /// Failure probability.
    pub delta: f64,
    /// Ancilla count `r + ⌈log₂(2 + 2/δ)⌉`.
    pub q: u32,
}

/// Largest supported ancilla count; keeps offsets exact in `i64` and `f64`.
pub const MAX_ANCILLAS: u32 = 52;

impl PhaseEstimationParams {
    pub fn new(r: u32, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Parameter(format!("delta must lie in (0, 1), got {delta}")));
        }
        let q = r + ceil_log2(2.0 + 2.0 / delta);
        if q > MAX_ANCILLAS {
            return Err(Error::Parameter(format!("q = {q} exceeds {MAX_ANCILLAS} ancillas")));
        }
        Ok(PhaseEstimationParams { r, delta, q })
    }

    /// `r = ⌈log₂(20m)⌉`, `δ = 1/m³`.
    pub fn for_register(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("m must be positive".into()));
        }
        Self::new(ceil_log2(20.0 * m as f64), 1.0 / (m as f64).powi(3))
    }

    pub fn outcomes(&self) -> u64 {
        1u64 << self.q
    }
}

/// `φN` split into `⌊φN⌋` and its fractional part.
fn split_phase(phi: f64, q: u32) -> (i64, f64) {
    let x = phi.rem_euclid(1.0) * (1u64 << q) as f64;
    let base = x.floor();
    (base as i64, x - base)
}

/// Offset of `k` in `(−N/2, N/2]`.
fn principal_offset(k: i64, n: i64) -> i64 {
    let r = k.rem_euclid(n);
    if r > n / 2 {
        r - n
    } else {
        r
    }
}

/// Kernel value for a principal offset.
fn kernel(f: f64, k: i64, n: f64) -> f64 {
    if f == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let s = (PI * f).sin();
    let d = (PI * (k as f64 - f) / n).sin();
    s * s / (n * n * d * d)
}

/// `Pr(z | φ)` for the ideal `q`-ancilla phase estimation.
pub fn pe_probability(phi: f64, q: u32, z: u64) -> f64 {
    let n = 1i64 << q;
    let (base, f) = split_phase(phi, q);
    kernel(f, principal_offset(z as i64 - base, n), n as f64)
}

/// Offsets enumerated exactly on each side of the peak.
const NEAR: i64 = 64;

/// Draws `z` from the ideal outcome law. The peak window is enumerated and
/// the two tails are drawn from a `1/(t − f)²` envelope with rejection.
pub fn pe_sample<R: Rng + ?Sized>(phi: f64, params: &PhaseEstimationParams, rng: &mut R) -> u64 {
    let n = 1i64 << params.q;
    let nf = n as f64;
    let (base, f) = split_phase(phi, params.q);
    let wrap = |k: i64| (base + k).rem_euclid(n) as u64;
    if f == 0.0 {
        return wrap(0);
    }
    if n <= 4 * NEAR {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let lo = -n / 2 + 1;
        for k in lo..=n / 2 {
            acc += kernel(f, k, nf);
            if u < acc {
                return wrap(k);
            }
        }
        return wrap(0);
    }
    let near: Vec<f64> = (-NEAR + 1..=NEAR).map(|k| kernel(f, k, nf)).collect();
    let near_mass: f64 = near.iter().sum();
    let u: f64 = rng.gen();
    if u < near_mass {
        let mut acc = 0.0;
        for (i, p) in near.iter().enumerate() {
            acc += p;
            if u < acc {
                return wrap(i as i64 - NEAR + 1);
            }
        }
        return wrap(0);
    }
    let s2 = (PI * f).sin().powi(2);
    let half = (n / 2) as f64;
    // positive tail k ∈ [NEAR+1, N/2]; negative tail k = −j, j ∈ [NEAR, N/2−1]
    let kp = NEAR as f64;
    let zp = 1.0 / (kp - f) - 1.0 / (half - f);
    let zn = 1.0 / (kp - 1.0 + f) - 1.0 / (half - 1.0 + f);
    loop {
        let side: f64 = rng.gen::<f64>() * (zp + zn);
        let v: f64 = rng.gen();
        let (k, envelope) = if side < zp {
            let t = f + 1.0 / (1.0 / (kp - f) - v * zp);
            let k = (t.ceil() as i64).clamp(NEAR + 1, n / 2);
            let kf = k as f64;
            (k, 0.25 * s2 * (1.0 / (kf - 1.0 - f) - 1.0 / (kf - f)))
        } else {
            let t = -f + 1.0 / (1.0 / (kp - 1.0 + f) - v * zn);
            let j = (t.ceil() as i64).clamp(NEAR, n / 2 - 1);
            let jf = j as f64;
            (-j, 0.25 * s2 * (1.0 / (jf - 1.0 + f) - 1.0 / (jf + f)))
        };
        let p = kernel(f, k, nf);
        if rng.gen::<f64>() * envelope <= p {
            return wrap(k);
        }
    }
}

/// `Σ_{k=a}^{b} P(k)` over principal offsets `−N/2 < a ≤ b ≤ N/2`.
fn offset_mass(f: f64, a: i64, b: i64, n: i64) -> f64 {
    const DIRECT: i64 = 4096;
    const CORE: i64 = 1000;
    let nf = n as f64;
    if f == 0.0 {
        return if a <= 0 && 0 <= b { 1.0 } else { 0.0 };
    }
    if b - a <= DIRECT {
        return (a..=b).map(|k| kernel(f, k, nf)).sum();
    }
    let mut total = 0.0;
    let (clo, chi) = (a.max(-CORE), b.min(CORE + 1));
    if clo <= chi {
        total += (clo..=chi).map(|k| kernel(f, k, nf)).sum::<f64>();
    }
    if a < -CORE {
        total += tail_sum(f, a, (-CORE - 1).min(b), nf);
    }
    if b > CORE + 1 {
        total += tail_sum(f, a.max(CORE + 2), b, nf);
    }
    total
}

/// Euler–Maclaurin sum of the kernel over `[a, b]`, both ends away from the peak.
fn tail_sum(f: f64, a: i64, b: i64, n: f64) -> f64 {
    if a > b {
        return 0.0;
    }
    let s2 = (PI * f).sin().powi(2);
    let c = PI / n;
    let u = |t: f64| c * (t - f);
    // g(t) = csc²(u(t)) and its derivatives in t
    let csc2 = |t: f64| 1.0 / u(t).sin().powi(2);
    let cot = |t: f64| 1.0 / u(t).tan();
    let g1 = |t: f64| -2.0 * csc2(t) * cot(t) * c;
    let g3 = |t: f64| {
        let (h, ct) = (csc2(t), cot(t));
        (-8.0 * h * ct.powi(3) - 16.0 * h * h * ct) * c.powi(3)
    };
    let (af, bf) = (a as f64, b as f64);
    let integral = (cot(af) - cot(bf)) / c;
    let sum = integral + 0.5 * (csc2(af) + csc2(bf)) + (g1(bf) - g1(af)) / 12.0 - (g3(bf) - g3(af)) / 720.0;
    s2 / (n * n) * sum
}

/// `Pr(lo ≤ z/N ≤ hi)` for `0 ≤ lo ≤ hi < 1`.
pub fn window_probability(phi: f64, params: &PhaseEstimationParams, lo: f64, hi: f64) -> f64 {
    let n = 1i64 << params.q;
    let (zlo, zhi) = window_bounds(params, lo, hi);
    if zlo > zhi {
        return 0.0;
    }
    let (base, f) = split_phase(phi, params.q);
    let (a, b) = (zlo - base, zhi - base);
    let mut total = 0.0;
    for shift in [-n, 0, n] {
        let lo_k = a.max(-n / 2 + 1 + shift);
        let hi_k = b.min(n / 2 + shift);
        if lo_k <= hi_k {
            total += offset_mass(f, lo_k - shift, hi_k - shift, n);
        }
    }
    total.clamp(0.0, 1.0)
}

/// Integer outcome range `[⌈lo·N⌉, ⌊hi·N⌋]`.
fn window_bounds(params: &PhaseEstimationParams, lo: f64, hi: f64) -> (i64, i64) {
    let nf = (1u64 << params.q) as f64;
    ((lo * nf).ceil() as i64, (hi * nf).floor() as i64)
}

/// Phase of `e^{2πiλ/4}` in `[0, 1)`; negative `λ` lands in `[3/4, 1)`.
pub fn eigenvalue_phase(lambda: f64) -> f64 {
    let p = lambda / 4.0;
    if p < 0.0 {
        1.0 + p
    } else {
        p
    }
}

/// Accept window `[1/(8√m) − 1/(20m), 1/2]` for the estimated phase.
pub fn accept_window(m: usize) -> (f64, f64) {
    let mf = m as f64;
    (1.0 / (8.0 * mf.sqrt()) - 1.0 / (20.0 * mf), 0.5)
}

/// Smallest `m` for which the accept window starts above zero with margin.
pub const MIN_OPERATORS: usize = 8;

fn check_m(m: usize) -> Result<()> {
    if m < MIN_OPERATORS {
        return Err(Error::Parameter(format!("the low-ε attack needs m >= {MIN_OPERATORS}, got {m}")));
    }
    Ok(())
}

/// One sampled run of the preparation loop.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RhoSample {
    /// Iteration at which the loop ended; `m² + 1` when it ran out.
    pub exit_iteration: usize,
    /// `None` when the fully mixed state was output.
    pub eigen_index: Option<usize>,
}

/// Sampling mode: returns one accepted eigenstate, or the fully mixed
/// register after `m²` rejections.
pub fn generate_rho<R: Rng + ?Sized>(h: &RegisterHamiltonian, m: usize, rng: &mut R) -> Result<(Register, RhoSample)> {
    check_m(m)?;
    let params = PhaseEstimationParams::for_register(m)?;
    let (lo, hi) = accept_window(m);
    let (zlo, zhi) = window_bounds(&params, lo, hi);
    let dim = h.eigenvalues.len();
    let cap = m * m;
    for k in 1..=cap {
        let j = rng.gen_range(0..dim);
        let z = pe_sample(eigenvalue_phase(h.eigenvalues[j]), &params, rng) as i64;
        if zlo <= z && z <= zhi {
            let reg = Register::dense_mixed(vec![(1.0, h.eigenvector(j))])?;
            return Ok((reg, RhoSample { exit_iteration: k, eigen_index: Some(j) }));
        }
    }
    Ok((Register::fully_mixed(h.n)?, RhoSample { exit_iteration: cap + 1, eigen_index: None }))
}

/// Closed-form output of the preparation loop.
#[derive(Clone, Debug)]
pub struct RhoAnalysis {
    /// Per-eigenstate acceptance probability in one iteration.
    pub accept: Vec<f64>,
    /// Output weight on each eigenstate, including the fully mixed share.
    pub weights: Vec<f64>,
    /// Acceptance probability of a single iteration.
    pub p_iteration: f64,
    /// Probability that all `m²` iterations reject.
    pub p_exhausted: f64,
    /// `Tr[Hρ]`.
    pub tr_h_rho: f64,
}

/// Analysis mode: exact output mixture, written in the eigenbasis.
pub fn analyze_rho(h: &RegisterHamiltonian, m: usize) -> Result<RhoAnalysis> {
    check_m(m)?;
    let params = PhaseEstimationParams::for_register(m)?;
    let (lo, hi) = accept_window(m);
    let accept: Vec<f64> =
        h.eigenvalues.iter().map(|&l| window_probability(eigenvalue_phase(l), &params, lo, hi)).collect();
    Ok(mixture_from_acceptance(&h.eigenvalues, accept, m * m))
}

/// Output weights of a loop that draws eigenstate `j` uniformly, keeps it
/// with probability `accept[j]`, and gives up after `cap` tries.
pub fn mixture_from_acceptance(eigenvalues: &[f64], accept: Vec<f64>, cap: usize) -> RhoAnalysis {
    let dim = accept.len() as f64;
    let p: f64 = accept.iter().sum::<f64>() / dim;
    let p_exhausted = (1.0 - p).powf(cap as f64);
    let weights: Vec<f64> = accept
        .iter()
        .map(|&a| {
            let accepted = if p > 0.0 { (a / dim) / p * (1.0 - p_exhausted) } else { 0.0 };
            accepted + p_exhausted / dim
        })
        .collect();
    let tr_h_rho = weights.iter().zip(eigenvalues).map(|(w, l)| w * l).sum();
    RhoAnalysis { accept, weights, p_iteration: p, p_exhausted, tr_h_rho }
}

impl RhoAnalysis {
    /// The analysed mixture as a dense register.
    pub fn register(&self, h: &RegisterHamiltonian) -> Result<Register> {
        let comps: Vec<(f64, Vec<Complex64>)> = self
            .weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(j, &w)| (w, h.eigenvector(j)))
            .collect();
        Register::dense_mixed(comps)
    }
}

/// Per-register analysis record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegisterAnalysis {
    pub register: usize,
    pub f: f64,
    pub g: f64,
    pub tr_h_rho: f64,
    pub p_iteration: f64,
    pub p_exhausted: f64,
}

/// Low-ε attacker with every register Hamiltonian diagonalized up front.
#[derive(Clone, Debug)]
pub struct LowEpsForger {
    m: usize,
    hamiltonians: Vec<RegisterHamiltonian>,
}

impl LowEpsForger {
    pub fn new(scheme: &MoneyScheme) -> Result<Self> {
        let m = scheme.params.m;
        check_m(m)?;
        if scheme.params.n > DEFAULT_DENSE_LIMIT {
            return Err(Error::Capacity { what: "register Hamiltonian", n: scheme.params.n, limit: DEFAULT_DENSE_LIMIT });
        }
        let hamiltonians = scheme.table.par_iter().map(|ops| RegisterHamiltonian::from_ops(ops)).collect::<Result<_>>()?;
        Ok(LowEpsForger { m, hamiltonians })
    }

    pub fn hamiltonians(&self) -> &[RegisterHamiltonian] {
        &self.hamiltonians
    }

    /// One forged note in sampling mode.
    pub fn forge<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(MoneyState, Vec<RhoSample>)> {
        let mut registers = Vec::with_capacity(self.hamiltonians.len());
        let mut samples = Vec::with_capacity(self.hamiltonians.len());
        for h in &self.hamiltonians {
            let (reg, s) = generate_rho(h, self.m, rng)?;
            registers.push(reg);
            samples.push(s);
        }
        Ok((MoneyState { registers }, samples))
    }

    /// Exact per-register mixtures.
    pub fn analyze(&self) -> Result<Vec<(RhoAnalysis, RegisterAnalysis)>> {
        self.hamiltonians
            .par_iter()
            .enumerate()
            .map(|(i, h)| {
                let a = analyze_rho(h, self.m)?;
                let (f, g) = register_fractions(h, self.m);
                let rec = RegisterAnalysis {
                    register: i,
                    f,
                    g,
                    tr_h_rho: a.tr_h_rho,
                    p_iteration: a.p_iteration,
                    p_exhausted: a.p_exhausted,
                };
                Ok((a, rec))
            })
            .collect()
    }

    /// The forged note in analysis mode: every register is its exact mixture.
    pub fn analysis_money(&self) -> Result<MoneyState> {
        let analyses = self.analyze()?;
        let registers = analyses
            .iter()
            .zip(&self.hamiltonians)
            .map(|((a, _), h)| a.register(h))
            .collect::<Result<_>>()?;
        Ok(MoneyState { registers })
    }
}

/// Diagonalizes every register and forges one note in sampling mode.
pub fn forge_low_eps<R: Rng + ?Sized>(scheme: &MoneyScheme, rng: &mut R) -> Result<MoneyState> {
    Ok(LowEpsForger::new(scheme)?.forge(rng)?.0)
}
