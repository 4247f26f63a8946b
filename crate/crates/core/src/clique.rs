//! High-ε forgery: in each register the bank's stabilizer elements commute
//! pairwise, so they form a clique in the commutation graph. Finding it and
//! completing it to a stabilizer state yields money that passes verification.

use std::ops::Deref;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen;
use crate::error::{check_dim, Error, Result};
use crate::gf2::BitVec;
use crate::money::{MoneyScheme, MoneyState, Register, SecretKey};
use crate::pauli::PauliOp;
use crate::stabilizer::StabilizerState;

/// Simple undirected graph stored as adjacency bit rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    rows: Vec<BitVec>,
}

impl Graph {
    pub fn empty(m: usize) -> Self {
        Graph { rows: vec![BitVec::zeros(m); m] }
    }

    pub fn complete(m: usize) -> Self {
        let mut g = Self::empty(m);
        for i in 0..m {
            for j in (i + 1)..m {
                g.add_edge(i, j);
            }
        }
        g
    }

    /// Erdős–Rényi `G(m, p)`.
    pub fn random<R: Rng + ?Sized>(m: usize, p: f64, rng: &mut R) -> Self {
        let mut g = Self::empty(m);
        for i in 0..m {
            for j in (i + 1)..m {
                if rng.gen::<f64>() < p {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Makes `vertices` pairwise adjacent.
    pub fn plant_clique(&mut self, vertices: &[usize]) {
        for (a, &i) in vertices.iter().enumerate() {
            for &j in &vertices[a + 1..] {
                self.add_edge(i, j);
            }
        }
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i != j, "self loops are not allowed");
        self.rows[i].set(j, true);
        self.rows[j].set(i, true);
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn neighbors(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.rows[i].count_ones()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(BitVec::count_ones).sum::<usize>() / 2
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices
            .iter()
            .enumerate()
            .all(|(a, &i)| vertices[a + 1..].iter().all(|&j| self.has_edge(i, j)))
    }

    /// Vertices adjacent to every member of `set` (members excluded).
    pub fn common_neighbors(&self, set: &[usize]) -> Vec<usize> {
        let m = self.order();
        let Some((&first, rest)) = set.split_first() else { return (0..m).collect() };
        let mut acc = self.rows[first].clone();
        for &v in rest {
            for (a, b) in acc.words_mut().iter_mut().zip(self.rows[v].words()) {
                *a &= *b;
            }
        }
        acc.iter_ones().collect()
    }

    /// Induced subgraph on `vertices`, relabelled `0..vertices.len()`.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut g = Graph::empty(vertices.len());
        for (a, &i) in vertices.iter().enumerate() {
            for (b, &j) in vertices.iter().enumerate().skip(a + 1) {
                if self.has_edge(i, j) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    /// 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let m = self.order();
        DMatrix::from_fn(m, m, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 })
    }
}

/// Commutation graph of one register's operators.
#[derive(Clone, Debug)]
pub struct MeasurementGraph {
    graph: Graph,
    source_ops: Vec<PauliOp>,
}

impl MeasurementGraph {
    pub fn source_ops(&self) -> &[PauliOp] {
        &self.source_ops
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }
}

impl Deref for MeasurementGraph {
    type Target = Graph;
    fn deref(&self) -> &Graph {
        &self.graph
    }
}

/// Edge `i ~ j` iff the operators commute.
pub fn build_graph(ops: &[PauliOp]) -> Result<MeasurementGraph> {
    let m = ops.len();
    if let Some(first) = ops.first() {
        for op in ops {
            check_dim(first.num_qubits(), op.num_qubits())?;
        }
    }
    let rows: Vec<BitVec> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut row = BitVec::zeros(m);
            for j in 0..m {
                if i != j && !ops[i].symplectic_ip_unchecked(&ops[j]) {
                    row.set(j, true);
                }
            }
            row
        })
        .collect();
    Ok(MeasurementGraph { graph: Graph { rows }, source_ops: ops.to_vec() })
}

/// `B(i,j) = +1` for commuting pairs, `−1` for anticommuting, zero diagonal.
pub fn signed_matrix(ops: &[PauliOp]) -> Result<DMatrix<f64>> {
    let g = build_graph(ops)?;
    let m = ops.len();
    Ok(DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            0.0
        } else if g.has_edge(i, j) {
            1.0
        } else {
            -1.0
        }
    }))
}

/// `λ_max` of the signed commutation matrix.
pub fn max_eigenvalue_check(ops: &[PauliOp]) -> Result<f64> {
    if ops.is_empty() {
        return Err(Error::Parameter("no operators".into()));
    }
    eigen::largest_eigenvalue(&signed_matrix(ops)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CliqueMethod {
    DegreeSort,
    Spectral,
    Bootstrap,
}

impl CliqueMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CliqueMethod::DegreeSort => "degree-sort",
            CliqueMethod::Spectral => "spectral",
            CliqueMethod::Bootstrap => "bootstrap",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CliqueResult {
    /// Sorted ascending; always a clique of the input graph.
    pub vertices: Vec<usize>,
    pub method: CliqueMethod,
    pub recovered_state: Option<StabilizerState>,
}

impl CliqueResult {
    fn new(mut vertices: Vec<usize>, method: CliqueMethod) -> Self {
        vertices.sort_unstable();
        CliqueResult { vertices, method, recovered_state: None }
    }

    pub fn size(&self) -> usize {
        self.vertices.len()
    }
}

/// Vertices by decreasing degree, ties by index.
fn degree_order(g: &Graph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.order()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    order
}

/// Walks `candidates` in order, keeping each vertex adjacent to all kept so far.
fn greedy_subclique(g: &Graph, candidates: &[usize]) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for &v in candidates {
        if kept.iter().all(|&u| g.has_edge(u, v)) {
            kept.push(v);
        }
    }
    kept
}

/// Takes vertices by decreasing degree until the next one breaks the clique.
pub fn degree_sort_clique(g: &Graph) -> CliqueResult {
    let mut kept: Vec<usize> = Vec::new();
    for v in degree_order(g) {
        if kept.iter().all(|&u| g.has_edge(u, v)) {
            kept.push(v);
        } else {
            break;
        }
    }
    CliqueResult::new(kept, CliqueMethod::DegreeSort)
}

/// Second-eigenvector recovery: `W` is the top `k` of `v₂` and the answer is
/// every vertex with at least `3k/4` neighbours in `W`, downgraded to a clique
/// and then refined to a maximal one.
pub fn spectral_clique(g: &Graph, k: usize) -> CliqueResult {
    let m = g.order();
    let k = k.clamp(1, m.max(1));
    if m <= 1 {
        return CliqueResult::new((0..m).collect(), CliqueMethod::Spectral);
    }
    let v2 = match eigen::second_eigenpair(&g.adjacency_matrix()) {
        Ok(p) => p.vector,
        Err(_) => return CliqueResult::new(vec![0], CliqueMethod::Spectral),
    };
    let scores: [Box<dyn Fn(f64) -> f64>; 3] = [Box::new(|x| x), Box::new(|x| -x), Box::new(f64::abs)];
    let mut best: Vec<usize> = Vec::new();
    for score in &scores {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| score(v2[b]).total_cmp(&score(v2[a])).then(a.cmp(&b)));
        let mut in_w = BitVec::zeros(m);
        for &v in &order[..k] {
            in_w.set(v, true);
        }
        let selected = downgrade(g, (0..m).filter(|&u| 4 * overlap(g.neighbors(u), &in_w) >= 3 * k).collect());
        if selected.len() > best.len() {
            best = selected;
        }
    }
    if best.is_empty() {
        best.push(degree_order(g)[0]);
    }
    CliqueResult::new(refine_clique(g, best), CliqueMethod::Spectral)
}

/// Largest subclique of `candidates`, taken greedily by in-set degree.
fn downgrade(g: &Graph, mut candidates: Vec<usize>) -> Vec<usize> {
    if g.is_clique(&candidates) {
        return candidates;
    }
    let snapshot = candidates.clone();
    candidates.sort_by_key(|&v| {
        let inside = snapshot.iter().filter(|&&u| g.has_edge(u, v)).count();
        (std::cmp::Reverse(inside), v)
    });
    greedy_subclique(g, &candidates)
}

/// Adds every vertex adjacent to the whole clique, lowest index first.
fn extend_to_maximal(g: &Graph, mut clique: Vec<usize>) -> Vec<usize> {
    let common = g.common_neighbors(&clique);
    for v in common {
        if clique.iter().all(|&u| g.has_edge(u, v)) {
            clique.push(v);
        }
    }
    clique
}

/// Repeats the `3k/4` selection with `W` set to the current clique until the
/// clique stops growing. The result is a maximal clique.
fn refine_clique(g: &Graph, clique: Vec<usize>) -> Vec<usize> {
    let m = g.order();
    let mut best = extend_to_maximal(g, clique);
    for _ in 0..REFINE_ROUNDS {
        let k = best.len();
        let mut in_w = BitVec::zeros(m);
        for &v in &best {
            in_w.set(v, true);
        }
        let selected: Vec<usize> = (0..m).filter(|&u| 4 * overlap(g.neighbors(u), &in_w) >= 3 * k).collect();
        let next = extend_to_maximal(g, downgrade(g, selected));
        if next.len() <= best.len() {
            break;
        }
        best = next;
    }
    best
}

const REFINE_ROUNDS: usize = 10;

fn overlap(a: &BitVec, b: &BitVec) -> usize {
    a.words().iter().zip(b.words()).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

/// Default cap on candidate seed sets examined by [`bootstrap_clique`].
pub const BOOTSTRAP_BUDGET: usize = 20_000;

/// Seed-set size `⌈log₂(100/c)⌉`, zero once `c ≥ 100`.
pub fn bootstrap_seed_size(c: f64) -> usize {
    if c >= 100.0 {
        0
    } else {
        (100.0 / c).log2().ceil() as usize
    }
}

/// Guesses a few clique members, restricts to their common neighbourhood and
/// runs [`spectral_clique`] there.
pub fn bootstrap_clique(g: &Graph, c: f64) -> CliqueResult {
    bootstrap_clique_with_budget(g, c, BOOTSTRAP_BUDGET)
}

pub fn bootstrap_clique_with_budget(g: &Graph, c: f64, budget: usize) -> CliqueResult {
    let m = g.order();
    let c = c.max(f64::MIN_POSITIVE);
    let target = ((c * (m as f64).sqrt()).ceil() as usize).clamp(1, m.max(1));
    let s = bootstrap_seed_size(c);
    if s == 0 {
        let mut r = spectral_clique(g, target);
        r.method = CliqueMethod::Bootstrap;
        return r;
    }
    let s = s.min(m);
    let order = degree_order(g);
    let mut best: Vec<usize> = if m > 0 { vec![order[0]] } else { Vec::new() };
    let mut idx: Vec<usize> = (0..s).collect();
    let mut examined = 0usize;
    // lexicographic s-subsets of positions in the degree order
    'outer: loop {
        examined += 1;
        let seed: Vec<usize> = idx.iter().map(|&p| order[p]).collect();
        if g.is_clique(&seed) {
            let common = g.common_neighbors(&seed);
            let mut found = seed.clone();
            if !common.is_empty() {
                let sub = g.induced(&common);
                let r = spectral_clique(&sub, target.saturating_sub(s).max(2));
                found.extend(r.vertices.iter().map(|&v| common[v]));
            }
            debug_assert!(g.is_clique(&found));
            if found.len() > best.len() {
                best = found;
                if best.len() >= target {
                    break;
                }
            }
        }
        if examined >= budget {
            break;
        }
        let mut i = s;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            if idx[i] < m - s + i {
                idx[i] += 1;
                for t in i + 1..s {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
    CliqueResult::new(best, CliqueMethod::Bootstrap)
}

/// Smallest clique accepted as a planted one; a random graph has cliques
/// near `2·log₂m`.
pub fn failure_floor(m: usize) -> usize {
    let log_floor = (2.0 * (m.max(1) as f64).log2()).ceil() as usize;
    log_floor.min(m).max(2)
}

/// How the attacker picks a clique finder for a register.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regime {
    DegreeSort,
    Spectral,
    Bootstrap { c: f64 },
    Scan,
}

/// Degree sort once `k ≥ 4√m·ln m`, spectral once `k ≥ 10√m`, bootstrap below
/// that, and a scan when the size is unknown.
pub fn select_regime(m: usize, expected_k: Option<usize>) -> Regime {
    let root = (m as f64).sqrt();
    match expected_k {
        Some(k) if k >= 2 => {
            let k = k as f64;
            if k >= 4.0 * root * (m as f64).ln() {
                Regime::DegreeSort
            } else if k >= 10.0 * root {
                Regime::Spectral
            } else {
                Regime::Bootstrap { c: k / root }
            }
        }
        _ => Regime::Scan,
    }
}

/// Per-register outcome of the high-ε attack.
#[derive(Clone, Debug)]
pub struct RegisterRecovery {
    pub clique: CliqueResult,
    pub state: StabilizerState,
    /// Clique members skipped because their sign contradicted earlier ones.
    pub dropped: Vec<usize>,
    /// Mean of `⟨E_j⟩` over the register's table in the recovered state.
    pub acceptance_estimate: f64,
}

pub fn find_clique(g: &Graph, expected_k: Option<usize>) -> CliqueResult {
    let m = g.order();
    match select_regime(m, expected_k) {
        Regime::DegreeSort => degree_sort_clique(g),
        Regime::Spectral => {
            let k = expected_k.unwrap_or(m);
            let r = spectral_clique(g, k);
            if 2 * r.size() < k {
                let b = bootstrap_clique(g, k as f64 / (m as f64).sqrt());
                if b.size() > r.size() {
                    return b;
                }
            }
            r
        }
        Regime::Bootstrap { c } => bootstrap_clique(g, c),
        Regime::Scan => {
            let step = ((m as f64).sqrt().ceil() as usize).max(1);
            let mut best = degree_sort_clique(g);
            let mut k = step;
            while k <= m {
                let r = spectral_clique(g, k);
                if r.size() > best.size() {
                    best = r;
                }
                k += step;
            }
            best
        }
    }
}

/// Builds the commutation graph, finds the planted clique and completes its
/// operators to a stabilizer state.
pub fn recover_register(ops: &[PauliOp], expected_k: Option<usize>) -> Result<RegisterRecovery> {
    let g = build_graph(ops)?;
    let m = ops.len();
    let mut clique = find_clique(&g, expected_k);
    if m == 0 || clique.size() < failure_floor(m) {
        return Err(Error::AttackFailure(format!(
            "largest commuting set has {} of {m} operators, below the floor {}",
            clique.size(),
            failure_floor(m)
        )));
    }
    let members: Vec<PauliOp> = clique.vertices.iter().map(|&v| ops[v].clone()).collect();
    let (state, dropped_pos) = StabilizerState::complete_dropping_conflicts(&members)?;
    let dropped = dropped_pos.into_iter().map(|p| clique.vertices[p]).collect();
    let acceptance_estimate = acceptance_estimate(&state, ops)?;
    clique.recovered_state = Some(state.clone());
    Ok(RegisterRecovery { clique, state, dropped, acceptance_estimate })
}

fn acceptance_estimate(state: &StabilizerState, ops: &[PauliOp]) -> Result<f64> {
    let mut sum = 0i64;
    for op in ops {
        sum += state.expectation(op)? as i64;
    }
    Ok(sum as f64 / ops.len() as f64)
}

/// Structured per-register attack record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegisterReport {
    pub register: usize,
    pub method: Option<CliqueMethod>,
    pub clique_size: usize,
    pub dropped: usize,
    pub failed: bool,
    pub acceptance_estimate: f64,
    /// Fraction of the planted indices inside the clique, when the secret is known.
    pub planted_overlap: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct HighEpsForgery {
    pub money: MoneyState,
    pub reports: Vec<RegisterReport>,
    /// Recovered clique per register; `None` where the attack failed.
    pub cliques: Vec<Option<Vec<usize>>>,
}

impl HighEpsForgery {
    pub fn failures(&self) -> usize {
        self.reports.iter().filter(|r| r.failed).count()
    }

    /// Fills `planted_overlap` from the bank's secret.
    pub fn evaluate_against(&mut self, scheme: &MoneyScheme, secret: &SecretKey) {
        for (report, clique) in self.reports.iter_mut().zip(&self.cliques) {
            let planted = scheme.planted_indices(secret, report.register);
            report.planted_overlap = clique.as_ref().map(|c| {
                if planted.is_empty() {
                    1.0
                } else {
                    planted.iter().filter(|p| c.binary_search(p).is_ok()).count() as f64 / planted.len() as f64
                }
            });
        }
    }
}

/// Runs [`recover_register`] on every register with `k = ⌈εm⌉` (scan mode
/// when that is below two). Failed registers get a uniformly random
/// stabilizer state and are flagged.
pub fn forge_high_eps<R: Rng + ?Sized>(scheme: &MoneyScheme, rng: &mut R) -> Result<HighEpsForgery> {
    let k = scheme.params.expected_planted();
    let hint = (k >= 2).then_some(k);
    let outcomes: Vec<Result<RegisterRecovery>> =
        scheme.table.par_iter().map(|ops| recover_register(ops, hint)).collect();
    let mut registers = Vec::with_capacity(outcomes.len());
    let mut reports = Vec::with_capacity(outcomes.len());
    let mut cliques = Vec::with_capacity(outcomes.len());
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(rec) => {
                reports.push(RegisterReport {
                    register: i,
                    method: Some(rec.clique.method),
                    clique_size: rec.clique.size(),
                    dropped: rec.dropped.len(),
                    failed: false,
                    acceptance_estimate: rec.acceptance_estimate,
                    planted_overlap: None,
                });
                cliques.push(Some(rec.clique.vertices));
                registers.push(Register::Stabilizer(rec.state));
            }
            Err(Error::AttackFailure(_)) => {
                let state = StabilizerState::random(scheme.params.n, rng);
                reports.push(RegisterReport {
                    register: i,
                    method: None,
                    clique_size: 0,
                    dropped: 0,
                    failed: true,
                    acceptance_estimate: acceptance_estimate(&state, &scheme.table[i])?,
                    planted_overlap: None,
                });
                cliques.push(None);
                registers.push(Register::Stabilizer(state));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(HighEpsForgery { money: MoneyState { registers }, reports, cliques })
}
