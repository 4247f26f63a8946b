//! Money by postselection: a note is the uniform superposition over all
//! strings sharing a hash label, verified by repeatedly applying a Markov
//! chain that moves only within label classes.

use std::collections::VecDeque;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{check_dim, Error, Result};
use crate::pauli::DEFAULT_DENSE_LIMIT;
use crate::Complex64;

pub const MAX_BITS: usize = 128;
pub const MAX_LABEL_BITS: usize = 64;
/// Subsets up to this size get a precomputed hash truth table.
const TABLE_LIMIT: usize = 20;

/// Label function `L`: bit `j` of `L(x)` is a keyed one-bit hash of `x`
/// restricted to subset `j`.
#[derive(Clone, Debug)]
pub struct LabelScheme {
    n: usize,
    s: usize,
    d: usize,
    seed: u64,
    /// Sorted bit indices; every bit lies in exactly `d` subsets.
    subsets: Vec<Vec<usize>>,
    keys: Vec<[u8; 32]>,
    tables: Vec<Option<Vec<u64>>>,
}

impl PartialEq for LabelScheme {
    fn eq(&self, other: &Self) -> bool {
        (self.n, self.s, self.d, self.seed) == (other.n, other.s, other.d, other.seed) && self.subsets == other.subsets
    }
}

/// Builds a random `d`-regular assignment of the `n` bits to `s` subsets.
pub fn make_label_scheme(n: usize, s: usize, d: usize, seed: u64) -> Result<LabelScheme> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    if n > MAX_BITS {
        return Err(Error::Capacity { what: "label scheme string", n, limit: MAX_BITS });
    }
    if s > MAX_LABEL_BITS {
        return Err(Error::Capacity { what: "label length", n: s, limit: MAX_LABEL_BITS });
    }
    if d > s {
        return Err(Error::Parameter(format!("each bit cannot join d = {d} of only s = {s} subsets")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subsets = regular_assignment(n, s, d, &mut rng);
    let keys: Vec<[u8; 32]> = (0..s)
        .map(|j| {
            let mut h = Sha256::new();
            h.update(b"qmoney-label-key");
            h.update(seed.to_le_bytes());
            h.update((j as u64).to_le_bytes());
            h.finalize().into()
        })
        .collect();
    let tables = subsets
        .iter()
        .zip(&keys)
        .map(|(sub, key)| {
            (sub.len() <= TABLE_LIMIT).then(|| {
                let size = 1usize << sub.len();
                let mut bits = vec![0u64; size.div_ceil(64)];
                for p in 0..size {
                    if keyed_bit(key, p as u128) {
                        bits[p / 64] |= 1 << (p % 64);
                    }
                }
                bits
            })
        })
        .collect();
    Ok(LabelScheme { n, s, d, seed, subsets, keys, tables })
}

fn keyed_bit(key: &[u8; 32], pattern: u128) -> bool {
    let mut h = Sha256::new();
    h.update(key);
    h.update(pattern.to_le_bytes());
    h.finalize()[0] & 1 == 1
}

/// Round-robin dealing of `d` copies of each bit (in random order), then
/// random degree-preserving switches between subsets.
fn regular_assignment(n: usize, s: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut subsets = vec![Vec::new(); s];
    if s == 0 || d == 0 {
        return subsets;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for (p, bit) in order.iter().flat_map(|&b| std::iter::repeat_n(b, d)).enumerate() {
        subsets[p % s].push(bit);
    }
    if s > 1 {
        for _ in 0..20 * n * d {
            let (a, b) = (rng.gen_range(0..s), rng.gen_range(0..s));
            if a == b || subsets[a].is_empty() || subsets[b].is_empty() {
                continue;
            }
            let (ia, ib) = (rng.gen_range(0..subsets[a].len()), rng.gen_range(0..subsets[b].len()));
            let (x, y) = (subsets[a][ia], subsets[b][ib]);
            if !subsets[b].contains(&x) && !subsets[a].contains(&y) {
                subsets[a][ia] = y;
                subsets[b][ib] = x;
            }
        }
    }
    for sub in &mut subsets {
        sub.sort_unstable();
    }
    subsets
}

impl LabelScheme {
    pub fn num_bits(&self) -> usize {
        self.n
    }

    pub fn num_subsets(&self) -> usize {
        self.s
    }

    pub fn memberships(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    fn check_string(&self, x: u128) -> Result<()> {
        if self.n < MAX_BITS && x >> self.n != 0 {
            return Err(Error::Dimension { expected: self.n, got: (128 - x.leading_zeros()) as usize });
        }
        Ok(())
    }

    fn hash_bit(&self, j: usize, x: u128) -> bool {
        let mut pattern = 0u128;
        for (t, &b) in self.subsets[j].iter().enumerate() {
            pattern |= ((x >> b) & 1) << t;
        }
        match &self.tables[j] {
            Some(bits) => (bits[(pattern / 64) as usize] >> (pattern % 64)) & 1 == 1,
            None => keyed_bit(&self.keys[j], pattern),
        }
    }

    /// `L(x)`; strings are little-endian bit sets of width `n`.
    pub fn label(&self, x: u128) -> Result<u64> {
        self.check_string(x)?;
        Ok(self.label_unchecked(x))
    }

    fn label_unchecked(&self, x: u128) -> u64 {
        (0..self.s).fold(0u64, |acc, j| acc | (self.hash_bit(j, x) as u64) << j)
    }

    /// `L(x)` for every `x < 2ⁿ`.
    pub fn label_table(&self) -> Result<Vec<u64>> {
        if self.n > DEFAULT_DENSE_LIMIT {
            return Err(Error::Capacity { what: "label table", n: self.n, limit: DEFAULT_DENSE_LIMIT });
        }
        Ok((0..1u128 << self.n).map(|x| self.label_unchecked(x)).collect())
    }
}

pub fn label(scheme: &LabelScheme, x: u128) -> Result<u64> {
    scheme.label(x)
}

/// `|ψ_ℓ⟩ = N_ℓ^{-1/2} Σ_{L(x)=ℓ} |x⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledMoney {
    pub label: u64,
    pub state: Vec<Complex64>,
    pub support_size: usize,
}

impl LabeledMoney {
    /// Honest note for `label` given the full label table.
    pub fn for_label(labels: &[u64], label: u64) -> Result<Self> {
        let support_size = labels.iter().filter(|&&l| l == label).count();
        if support_size == 0 {
            return Err(Error::Parameter(format!("no string carries label {label:#b}")));
        }
        let amp = Complex64::new(1.0 / (support_size as f64).sqrt(), 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let state = labels.iter().map(|&l| if l == label { amp } else { zero }).collect();
        Ok(LabeledMoney { label, state, support_size })
    }
}

/// Measures the label of the uniform superposition: `ℓ` occurs with
/// probability `N_ℓ/2ⁿ`.
pub fn mint<R: Rng + ?Sized>(scheme: &LabelScheme, rng: &mut R) -> Result<LabeledMoney> {
    mint_from_table(&scheme.label_table()?, rng)
}

pub fn mint_from_table<R: Rng + ?Sized>(labels: &[u64], rng: &mut R) -> Result<LabeledMoney> {
    let x = rng.gen_range(0..labels.len());
    LabeledMoney::for_label(labels, labels[x])
}

/// `M = (1/n)Σ_i P_i`, where `P_i` flips bit `i` when that keeps the label.
#[derive(Clone, Debug)]
pub struct MarkovVerifier {
    n: usize,
    r: usize,
    labels: Vec<u64>,
    /// Bit `i` set iff rule `i` moves the string.
    flippable: Vec<u32>,
}

pub fn build_verifier(scheme: &LabelScheme, r: usize) -> Result<MarkovVerifier> {
    MarkovVerifier::from_table(scheme.num_bits(), scheme.label_table()?, r)
}

impl MarkovVerifier {
    pub fn from_table(n: usize, labels: Vec<u64>, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::Parameter("verifier needs r >= 1".into()));
        }
        if n > DEFAULT_DENSE_LIMIT {
            return Err(Error::Capacity { what: "Markov verifier", n, limit: DEFAULT_DENSE_LIMIT });
        }
        check_dim(1 << n, labels.len())?;
        let flippable = (0..labels.len())
            .map(|x| (0..n).filter(|&i| labels[x ^ (1 << i)] == labels[x]).fold(0u32, |acc, i| acc | 1 << i))
            .collect();
        Ok(MarkovVerifier { n, r, labels, flippable })
    }

    pub fn num_bits(&self) -> usize {
        self.n
    }

    pub fn num_rules(&self) -> usize {
        self.n
    }

    pub fn iterations(&self) -> usize {
        self.r
    }

    pub fn with_iterations(&self, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::Parameter("verifier needs r >= 1".into()));
        }
        Ok(MarkovVerifier { r, ..self.clone() })
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// `P_i(x)`.
    pub fn rule(&self, i: usize, x: usize) -> usize {
        if (self.flippable[x] >> i) & 1 == 1 {
            x ^ (1 << i)
        } else {
            x
        }
    }

    /// Strings no rule can move.
    pub fn frozen_strings(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&x| self.flippable[x] == 0).collect()
    }

    /// `Mv`.
    pub fn apply_m(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        check_dim(self.labels.len(), v.len())?;
        let inv = 1.0 / self.n as f64;
        Ok((0..v.len())
            .map(|x| {
                let f = self.flippable[x];
                let stay = (self.n as u32 - f.count_ones()) as f64;
                let moved: Complex64 = (0..self.n).filter(|&i| (f >> i) & 1 == 1).map(|i| v[x ^ (1 << i)]).sum();
                (v[x] * stay + moved) * inv
            })
            .collect())
    }

    /// Dense `(1/n)Σ_i P_i` assembled from permutation matrices.
    pub fn m_matrix(&self) -> DMatrix<f64> {
        let dim = self.labels.len();
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..self.n {
            for x in 0..dim {
                m[(self.rule(i, x), x)] += 1.0 / self.n as f64;
            }
        }
        m
    }

    /// `‖M^r Π_ℓ v‖²`.
    pub fn acceptance_probability(&self, label: u64, state: &[Complex64]) -> Result<f64> {
        check_dim(self.labels.len(), state.len())?;
        let mut v: Vec<Complex64> = state
            .iter()
            .zip(&self.labels)
            .map(|(a, &l)| if l == label { *a } else { Complex64::new(0.0, 0.0) })
            .collect();
        for _ in 0..self.r {
            v = self.apply_m(&v)?;
        }
        Ok(v.iter().map(|a| a.norm_sqr()).sum())
    }
}

pub fn apply_m(verifier: &MarkovVerifier, v: &[Complex64]) -> Result<Vec<Complex64>> {
    verifier.apply_m(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoteVerification {
    pub accepted: bool,
    pub acceptance_probability: f64,
}

/// Exact acceptance probability, with the verdict sampled from it.
pub fn verify_money<R: Rng + ?Sized>(
    verifier: &MarkovVerifier,
    money: &LabeledMoney,
    rng: &mut R,
) -> Result<NoteVerification> {
    let p = verifier.acceptance_probability(money.label, &money.state)?;
    Ok(NoteVerification { accepted: rng.gen::<f64>() < p, acceptance_probability: p })
}

/// Measurement-by-measurement run: label measurement, then `r` two-outcome
/// steps whose success Kraus operator is `M`.
pub fn verify_money_sampled<R: Rng + ?Sized>(
    verifier: &MarkovVerifier,
    label: u64,
    state: &[Complex64],
    rng: &mut R,
) -> Result<bool> {
    check_dim(verifier.labels.len(), state.len())?;
    let mut v: Vec<Complex64> = state
        .iter()
        .zip(&verifier.labels)
        .map(|(a, &l)| if l == label { *a } else { Complex64::new(0.0, 0.0) })
        .collect();
    let total: f64 = state.iter().map(|a| a.norm_sqr()).sum();
    let mut norm2: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    if rng.gen::<f64>() * total >= norm2 {
        return Ok(false);
    }
    for _ in 0..verifier.r {
        let next = verifier.apply_m(&v)?;
        let next2: f64 = next.iter().map(|a| a.norm_sqr()).sum();
        if rng.gen::<f64>() * norm2 >= next2 {
            return Ok(false);
        }
        let scale = (1.0 / next2).sqrt();
        v = next.into_iter().map(|a| a * scale).collect();
        norm2 = 1.0;
    }
    Ok(true)
}

/// Largest supported `n` for the explicit two-register construction.
pub const KRAUS_LIMIT: usize = 6;

/// `(I ⊗ ⟨u|) U (I ⊗ |u⟩)` with `U = Σ_i P_i ⊗ |i⟩⟨i|` and `|u⟩` uniform
/// over the rule register.
pub fn kraus_element(verifier: &MarkovVerifier) -> Result<DMatrix<f64>> {
    let n = verifier.n;
    if n > KRAUS_LIMIT {
        return Err(Error::Capacity { what: "Kraus construction", n, limit: KRAUS_LIMIT });
    }
    let dim = 1usize << n;
    let rules = verifier.num_rules();
    let big = dim * rules;
    let mut u = DMatrix::<f64>::zeros(big, big);
    for i in 0..rules {
        for x in 0..dim {
            u[(verifier.rule(i, x) * rules + i, x * rules + i)] = 1.0;
        }
    }
    let amp = 1.0 / (rules as f64).sqrt();
    let embed = DMatrix::from_fn(big, dim, |row, col| if row / rules == col { amp } else { 0.0 });
    Ok(embed.transpose() * u * embed)
}

/// `max |K − M|` entrywise between the Kraus element and the rule average.
pub fn kraus_equivalence_check(verifier: &MarkovVerifier) -> Result<f64> {
    let k = kraus_element(verifier)?;
    Ok((k - verifier.m_matrix()).amax())
}

/// Structure of `M` on one label class.
#[derive(Clone, Debug)]
pub struct ComponentAnalysis {
    pub label: u64,
    pub class_size: usize,
    /// Connected components of the rule graph inside the class.
    pub components: Vec<Vec<usize>>,
    /// Eigenvalues of the class-restricted `M`, descending.
    pub eigenvalues: Vec<f64>,
    /// Multiplicity of the eigenvalue `1`.
    pub unit_eigenspace_dim: usize,
    /// Largest eigenvalue below `1`, if any.
    pub second_eigenvalue: Option<f64>,
}

pub const UNIT_TOL: f64 = 1e-9;

impl ComponentAnalysis {
    /// Smallest `r` with `λ₂^r ≤ 10⁻⁶`.
    pub fn default_iterations(&self) -> Option<usize> {
        match self.second_eigenvalue {
            None => Some(1),
            Some(l) if l.abs() < 1.0 - UNIT_TOL => {
                if l.abs() <= 1e-300 {
                    Some(1)
                } else {
                    Some(((1e-6f64).ln() / l.abs().ln()).ceil().max(1.0) as usize)
                }
            }
            Some(_) => None,
        }
    }
}

pub fn component_analysis(verifier: &MarkovVerifier, label: u64) -> Result<ComponentAnalysis> {
    let class: Vec<usize> = (0..verifier.labels.len()).filter(|&x| verifier.labels[x] == label).collect();
    let mut local = vec![usize::MAX; verifier.labels.len()];
    for (a, &x) in class.iter().enumerate() {
        local[x] = a;
    }
    let mut seen = vec![false; class.len()];
    let mut components = Vec::new();
    for start in 0..class.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![class[start]];
        let mut queue = VecDeque::from([class[start]]);
        while let Some(x) = queue.pop_front() {
            for i in 0..verifier.n {
                let y = verifier.rule(i, x);
                if !seen[local[y]] {
                    seen[local[y]] = true;
                    comp.push(y);
                    queue.push_back(y);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    let size = class.len();
    let mut mat = DMatrix::<f64>::zeros(size, size);
    for (a, &x) in class.iter().enumerate() {
        for i in 0..verifier.n {
            mat[(local[verifier.rule(i, x)], a)] += 1.0 / verifier.n as f64;
        }
    }
    let mut eigenvalues: Vec<f64> =
        if size == 0 { Vec::new() } else { SymmetricEigen::new(mat).eigenvalues.iter().copied().collect() };
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let unit_eigenspace_dim = eigenvalues.iter().filter(|&&l| l >= 1.0 - UNIT_TOL).count();
    let second_eigenvalue = eigenvalues.iter().copied().find(|&l| l < 1.0 - UNIT_TOL);
    Ok(ComponentAnalysis { label, class_size: size, components, eigenvalues, unit_eigenspace_dim, second_eigenvalue })
}

/// Lazy single-bit Metropolis chain with weight `e^{−βc(x)}`, where `c(x)` is
/// the Hamming distance from `L(x)` to the target label.
#[derive(Clone, Debug)]
pub struct BetaChain<'a> {
    scheme: &'a LabelScheme,
    target: u64,
    beta: f64,
    x: u128,
    cost: u32,
}

pub const BETA_CHAIN_MAX_BITS: usize = 24;

impl<'a> BetaChain<'a> {
    pub fn new(scheme: &'a LabelScheme, target: u64, beta: f64, start: u128) -> Result<Self> {
        if scheme.n > BETA_CHAIN_MAX_BITS {
            return Err(Error::Capacity { what: "beta chain", n: scheme.n, limit: BETA_CHAIN_MAX_BITS });
        }
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::Parameter(format!("beta must be nonnegative, got {beta}")));
        }
        let cost = (scheme.label(start)? ^ target).count_ones();
        Ok(BetaChain { scheme, target, beta, x: start, cost })
    }

    pub fn state(&self) -> u128 {
        self.x
    }

    pub fn cost(&self) -> u32 {
        self.cost
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Step {
        if rng.gen::<bool>() {
            return Step::Hold;
        }
        let i = rng.gen_range(0..self.scheme.n);
        let y = self.x ^ (1u128 << i);
        let cy = (self.scheme.label_unchecked(y) ^ self.target).count_ones();
        let accept = cy <= self.cost || rng.gen::<f64>() < (-self.beta * (cy as f64 - self.cost as f64)).exp();
        if accept {
            self.x = y;
            self.cost = cy;
            Step::Moved
        } else {
            Step::Rejected
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    /// The lazy coin kept the chain in place.
    Hold,
    Rejected,
    Moved,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaChainReport {
    pub beta: f64,
    pub steps: usize,
    /// Accepted moves over attempted (non-lazy) proposals.
    pub acceptance_rate: f64,
    /// Integrated autocorrelation time of the Hamming weight; infinite when
    /// the observable never varied.
    pub autocorrelation_time: f64,
    pub stalled: bool,
    /// Exact total-variation distance to the stationary law, for `n ≤ 12`.
    pub tv_distance: Option<f64>,
    pub final_cost: u32,
}

pub const TV_MAX_BITS: usize = 12;

/// Runs the chain from `start` and reports mixing diagnostics.
pub fn beta_chain_mixing<R: Rng + ?Sized>(
    scheme: &LabelScheme,
    target: u64,
    beta: f64,
    steps: usize,
    start: u128,
    rng: &mut R,
) -> Result<BetaChainReport> {
    let mut chain = BetaChain::new(scheme, target, beta, start)?;
    let mut series = Vec::with_capacity(steps + 1);
    series.push(chain.state().count_ones() as f64);
    let (mut proposals, mut moves) = (0usize, 0usize);
    for _ in 0..steps {
        match chain.step(rng) {
            Step::Hold => {}
            Step::Rejected => proposals += 1,
            Step::Moved => {
                proposals += 1;
                moves += 1;
            }
        }
        series.push(chain.state().count_ones() as f64);
    }
    let autocorrelation_time = integrated_autocorrelation(&series);
    let tv_distance = if scheme.n <= TV_MAX_BITS { Some(exact_tv_distance(scheme, target, beta, steps, start)?) } else { None };
    Ok(BetaChainReport {
        beta,
        steps,
        acceptance_rate: if proposals == 0 { 0.0 } else { moves as f64 / proposals as f64 },
        autocorrelation_time,
        stalled: autocorrelation_time.is_nan() || autocorrelation_time >= steps as f64,
        tv_distance,
        final_cost: chain.cost(),
    })
}

/// Sokal's self-consistent window: `τ = 1 + 2Σ_{t≤W} ρ(t)` with the
/// smallest `W ≥ 5τ(W)`.
pub fn integrated_autocorrelation(series: &[f64]) -> f64 {
    let len = series.len();
    if len < 2 {
        return f64::INFINITY;
    }
    let mean = series.iter().sum::<f64>() / len as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let var = centered.iter().map(|v| v * v).sum::<f64>() / len as f64;
    if var <= 0.0 {
        return f64::INFINITY;
    }
    let mut tau = 1.0;
    for t in 1..len {
        let cov = centered[..len - t].iter().zip(&centered[t..]).map(|(a, b)| a * b).sum::<f64>() / len as f64;
        tau += 2.0 * cov / var;
        if t as f64 >= 5.0 * tau {
            return tau.max(0.0);
        }
    }
    tau.max(len as f64)
}

/// Evolves the exact state distribution of the lazy chain for `steps` steps.
pub fn exact_tv_distance(scheme: &LabelScheme, target: u64, beta: f64, steps: usize, start: u128) -> Result<f64> {
    let n = scheme.n;
    if n > TV_MAX_BITS {
        return Err(Error::Capacity { what: "exact chain distribution", n, limit: TV_MAX_BITS });
    }
    scheme.check_string(start)?;
    let dim = 1usize << n;
    let costs: Vec<u32> = (0..dim).map(|x| (scheme.label_unchecked(x as u128) ^ target).count_ones()).collect();
    let weights: Vec<f64> = costs.iter().map(|&c| (-beta * c as f64).exp()).collect();
    let z: f64 = weights.iter().sum();
    // accept[x*n + i] = min(1, π(x⊕e_i)/π(x))
    let accept: Vec<f64> = (0..dim)
        .flat_map(|x| {
            let costs = &costs;
            (0..n).map(move |i| {
                let dc = costs[x ^ (1 << i)] as f64 - costs[x] as f64;
                if dc <= 0.0 {
                    1.0
                } else {
                    (-beta * dc).exp()
                }
            })
        })
        .collect();
    let mut p = vec![0.0; dim];
    p[start as usize] = 1.0;
    let mut next = vec![0.0; dim];
    let step_w = 0.5 / n as f64;
    for _ in 0..steps {
        next.iter_mut().for_each(|v| *v = 0.0);
        for x in 0..dim {
            let px = p[x];
            if px == 0.0 {
                continue;
            }
            let mut stay = 0.5;
            for i in 0..n {
                let a = accept[x * n + i];
                next[x ^ (1 << i)] += px * step_w * a;
                stay += step_w * (1.0 - a);
            }
            next[x] += px * stay;
        }
        std::mem::swap(&mut p, &mut next);
    }
    Ok(0.5 * p.iter().zip(&weights).map(|(a, w)| (a - w / z).abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_partition() {
        let s = make_label_scheme(4, 4, 1, 7).unwrap();
        let mut all: Vec<usize> = s.subsets().iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
        assert!(s.subsets().iter().all(|sub| sub.len() == 1));
    }

    #[test]
    fn infeasible_rejected() {
        assert!(matches!(make_label_scheme(10, 2, 3, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn constant_label_gives_full_superposition() {
        let s = make_label_scheme(5, 0, 0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let note = mint(&s, &mut rng).unwrap();
        assert_eq!(note.support_size, 32);
    }

    #[test]
    fn constant_label_second_eigenvalue() {
        let s = make_label_scheme(6, 0, 0, 1).unwrap();
        let v = build_verifier(&s, 1).unwrap();
        let a = component_analysis(&v, 0).unwrap();
        assert_eq!(a.components.len(), 1);
        assert!((a.second_eigenvalue.unwrap() - (1.0 - 2.0 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn single_rule_kraus_is_the_rule() {
        let s = make_label_scheme(1, 0, 0, 1).unwrap();
        let v = build_verifier(&s, 1).unwrap();
        let k = kraus_element(&v).unwrap();
        assert_eq!(k, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn autocorrelation_of_constant_series_is_infinite() {
        assert!(integrated_autocorrelation(&[3.0; 50]).is_infinite());
    }
}
