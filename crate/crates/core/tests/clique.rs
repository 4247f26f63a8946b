use nalgebra::DMatrix;
use qmoney::clique::{
    bootstrap_clique, bootstrap_seed_size, build_graph, degree_sort_clique, failure_floor, find_clique, forge_high_eps,
    max_eigenvalue_check, recover_register, select_regime, signed_matrix, spectral_clique, Graph, Regime,
};
use qmoney::eigen::{norm_estimate, residual, second_eigenpair};
use qmoney::{gen_scheme, verify, Error, PauliOp, SchemeParams, StabilizerState};
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn op(s: &str) -> PauliOp {
    s.parse().unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exhaustive maximum clique size.
fn max_clique(g: &Graph) -> usize {
    fn grow(g: &Graph, cand: Vec<usize>, size: usize, best: &mut usize) {
        if cand.is_empty() {
            *best = (*best).max(size);
            return;
        }
        for (i, &v) in cand.iter().enumerate() {
            if size + cand.len() - i <= *best {
                return;
            }
            let next: Vec<usize> = cand[i + 1..].iter().copied().filter(|&u| g.has_edge(u, v)).collect();
            grow(g, next, size + 1, best);
        }
    }
    let mut best = 0;
    grow(g, (0..g.order()).collect(), 0, &mut best);
    best
}

fn planted_graph(m: usize, k: usize, r: &mut ChaCha8Rng) -> (Graph, Vec<usize>) {
    let mut g = Graph::random(m, 0.5, r);
    let mut planted = sample(r, m, k).into_vec();
    planted.sort_unstable();
    g.plant_clique(&planted);
    (g, planted)
}

/// `k` stabilizers of a random state mixed with `m − k` random operators.
fn planted_register(n: usize, m: usize, k: usize, r: &mut ChaCha8Rng) -> (Vec<PauliOp>, Vec<usize>) {
    let state = StabilizerState::random(n, r);
    let mut ops: Vec<(bool, PauliOp)> = Vec::with_capacity(m);
    while ops.len() < k {
        let e = state.random_element(r);
        if !e.is_identity_up_to_phase() {
            ops.push((true, e));
        }
    }
    while ops.len() < m {
        ops.push((false, PauliOp::random(n, false, r)));
    }
    ops.shuffle(r);
    let planted = ops.iter().enumerate().filter(|(_, (p, _))| *p).map(|(i, _)| i).collect();
    (ops.into_iter().map(|(_, o)| o).collect(), planted)
}

fn pairwise_commuting(ops: &[PauliOp], vertices: &[usize]) -> bool {
    vertices.iter().all(|&a| vertices.iter().all(|&b| ops[a].commutes(&ops[b]).unwrap()))
}

#[test]
fn measurement_graph_examples() {
    let g = build_graph(&[op("+ZI"), op("+IZ"), op("+ZZ")]).unwrap();
    assert_eq!(g.edge_count(), 3);
    let g = build_graph(&[op("+X"), op("+Z")]).unwrap();
    assert!(!g.has_edge(0, 1));
    assert_eq!(g.source_ops().len(), 2);
    assert!(build_graph(&[op("+X"), op("+ZZ")]).is_err());
}

#[test]
fn random_operator_graphs_have_half_density() {
    let mut r = rng(1);
    let m = 200;
    let ops: Vec<PauliOp> = (0..m).map(|_| PauliOp::random(20, false, &mut r)).collect();
    let g = build_graph(&ops).unwrap();
    let density = g.edge_count() as f64 / (m * (m - 1) / 2) as f64;
    assert!((density - 0.5).abs() <= 0.02, "density {density}");
}

#[test]
fn degree_sort_examples() {
    assert_eq!(degree_sort_clique(&Graph::complete(7)).vertices, (0..7).collect::<Vec<_>>());
    assert_eq!(degree_sort_clique(&Graph::empty(7)).size(), 1);
}

#[test]
fn degree_sort_recovers_large_planted_commuting_sets() {
    // 4√m·log₁₀m at m = 256
    let m = 256;
    let k = (4.0 * 16.0 * (m as f64).log10()).ceil() as usize;
    let mut r = rng(2);
    let mut good = 0;
    for _ in 0..20 {
        let (ops, planted) = planted_register(32, m, k, &mut r);
        let g = build_graph(&ops).unwrap();
        let found = degree_sort_clique(&g).vertices;
        assert!(pairwise_commuting(&ops, &found));
        let covered = planted.iter().filter(|v| found.binary_search(v).is_ok()).count();
        if covered as f64 >= 0.9 * planted.len() as f64 {
            good += 1;
        }
    }
    assert!(good >= 18, "{good}/20");
}

#[test]
fn second_eigenpair_examples() {
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 1.0]));
    let p = second_eigenpair(&d).unwrap();
    assert!((p.value - 2.0).abs() < 1e-12);
    assert!((p.vector[1].abs() - 1.0).abs() < 1e-12);

    // K10 ⊔ K5 has spectrum {9, 4, −1, …}
    let mut g = Graph::empty(15);
    g.plant_clique(&(0..10).collect::<Vec<_>>());
    g.plant_clique(&(10..15).collect::<Vec<_>>());
    let p = second_eigenpair(&g.adjacency_matrix()).unwrap();
    assert!((p.value - 4.0).abs() < 1e-10);

    let mut r = rng(3);
    let m = 500;
    let mut a = DMatrix::from_fn(m, m, |_, _| r.gen_range(-1.0..1.0));
    a = &a + a.transpose();
    let p = second_eigenpair(&a).unwrap();
    assert!(residual(&a, &p) <= 1e-8 * norm_estimate(&a));

    assert!(matches!(second_eigenpair(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0])), Err(Error::Contract(_))));
}

#[test]
fn spectral_clique_on_a_complete_graph() {
    assert_eq!(spectral_clique(&Graph::complete(9), 9).size(), 9);
}

#[test]
fn spectral_clique_matches_exhaustive_search_on_small_graphs() {
    let mut r = rng(4);
    let mut exact = 0;
    let trials = 30;
    for _ in 0..trials {
        let (g, _) = planted_graph(30, 12, &mut r);
        let best = max_clique(&g);
        let found = spectral_clique(&g, 12);
        assert!(g.is_clique(&found.vertices));
        assert!(found.size() <= best);
        exact += (found.size() == best) as usize;
    }
    assert!(exact * 10 >= trials * 9, "{exact}/{trials} reach the maximum clique");
}

#[test]
fn spectral_clique_recovers_planted_sets() {
    let mut r = rng(5);
    let m = 600;
    let k = 10 * (m as f64).sqrt().ceil() as usize;
    let mut exact = 0;
    for _ in 0..5 {
        let (g, planted) = planted_graph(m, k, &mut r);
        exact += (spectral_clique(&g, k).vertices == planted) as usize;
    }
    assert!(exact >= 4, "{exact}/5");
}

#[test]
fn bootstrap_seed_sizes() {
    assert_eq!(bootstrap_seed_size(100.0), 0);
    assert_eq!(bootstrap_seed_size(50.0), 1);
    assert_eq!(bootstrap_seed_size(5.0), 5);
    let mut r = rng(6);
    let (g, _) = planted_graph(200, 150, &mut r);
    assert_eq!(bootstrap_clique(&g, 100.0).vertices, spectral_clique(&g, (100.0 * 200f64.sqrt()).ceil() as usize).vertices);
}

#[test]
fn seed_neighbourhood_keeps_the_rest_of_the_clique() {
    let mut r = rng(7);
    let (g, planted) = planted_graph(300, 40, &mut r);
    let seed = &planted[..3];
    let common = g.common_neighbors(seed);
    assert!(planted[3..].iter().all(|v| common.contains(v)));
}

#[test]
fn bootstrap_recovers_moderate_planted_cliques() {
    let mut r = rng(8);
    let m = 400;
    let k = 5 * (m as f64).sqrt().ceil() as usize;
    let mut exact = 0;
    for _ in 0..10 {
        let (g, planted) = planted_graph(m, k, &mut r);
        let found = bootstrap_clique(&g, 5.0);
        assert!(g.is_clique(&found.vertices));
        exact += (found.vertices == planted) as usize;
    }
    assert!(exact >= 7, "{exact}/10");
}

#[test]
fn regime_selection() {
    let m = 400;
    assert_eq!(select_regime(m, None), Regime::Scan);
    assert_eq!(select_regime(m, Some(1)), Regime::Scan);
    assert_eq!(select_regime(m, Some(200)), Regime::Spectral);
    assert_eq!(select_regime(m, Some(100)), Regime::Bootstrap { c: 5.0 });
    assert_eq!(select_regime(100_000, Some(90_000)), Regime::DegreeSort);
    assert_eq!(failure_floor(400), 18);
    assert_eq!(failure_floor(3), 3);
    assert_eq!(failure_floor(1), 2);
}

#[test]
fn find_clique_scan_mode_locates_planted_set() {
    let mut r = rng(9);
    let (g, planted) = planted_graph(400, 200, &mut r);
    assert_eq!(find_clique(&g, None).vertices, planted);
}

#[test]
fn signed_matrix_examples_and_trace_moment() {
    let b = signed_matrix(&[op("+ZI"), op("+IZ")]).unwrap();
    assert_eq!(b, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    assert!((max_eigenvalue_check(&[op("+ZI"), op("+IZ")]).unwrap() - 1.0).abs() < 1e-12);
    let mut r = rng(10);
    let m = 300;
    let trials = 10;
    let mut trace = 0.0;
    for _ in 0..trials {
        let ops: Vec<PauliOp> = (0..m).map(|_| PauliOp::random(32, false, &mut r)).collect();
        let b = signed_matrix(&ops).unwrap();
        trace += (&b * &b).trace();
        assert!(max_eigenvalue_check(&ops).unwrap() <= 10.0 * (m as f64).sqrt());
    }
    let want = (m * (m - 1)) as f64;
    assert!((trace / trials as f64 - want).abs() <= 0.01 * want);
}

#[test]
fn signed_matrix_moments_match_independent_signs() {
    // independent ±1 entries give E[(Bᵗ)_{ij}] = 0 for i ≠ j and every t
    let mut r = rng(11);
    let (m, n, samples) = (12, 16, 4000);
    let mut sums = [0.0f64; 3];
    let mut squares = [0.0f64; 3];
    for _ in 0..samples {
        let ops: Vec<PauliOp> = (0..m).map(|_| PauliOp::random(n, false, &mut r)).collect();
        let b = signed_matrix(&ops).unwrap();
        let mut power = b.clone();
        for t in 0..3 {
            power = &power * &b;
            let x = power[(0, 1)];
            sums[t] += x;
            squares[t] += x * x;
        }
    }
    for t in 0..3 {
        let mean = sums[t] / samples as f64;
        let sd = (squares[t] / samples as f64 - mean * mean).sqrt();
        assert!(mean.abs() <= 4.0 * sd / (samples as f64).sqrt(), "t = {}: mean {mean}, sd {sd}", t + 2);
    }
}

#[test]
fn epsilon_one_registers_recover_a_stabilizing_state() {
    let (_, scheme) = gen_scheme(SchemeParams::new(12, 60, 2, 1.0).unwrap(), &mut rng(12)).unwrap();
    for row in &scheme.table {
        let rec = recover_register(row, Some(60)).unwrap();
        assert!(row.iter().all(|o| rec.state.expectation(o).unwrap() == 1));
        assert_eq!(rec.acceptance_estimate, 1.0);
        assert!(rec.dropped.is_empty());
    }
}

#[test]
fn half_planted_registers_reach_the_acceptance_target() {
    let params = SchemeParams::new(50, 400, 4, 0.5).unwrap();
    let (secret, scheme) = gen_scheme(params, &mut rng(13)).unwrap();
    for (i, row) in scheme.table.iter().enumerate() {
        let rec = recover_register(row, Some(params.expected_planted())).unwrap();
        assert!(pairwise_commuting(row, &rec.clique.vertices));
        assert!(rec.acceptance_estimate >= 0.9 * 0.5, "register {i}: {}", rec.acceptance_estimate);
        let planted = scheme.planted_indices(&secret, i);
        assert!(planted.iter().all(|p| rec.clique.vertices.binary_search(p).is_ok()));
    }
}

#[test]
fn anticommuting_registers_fail() {
    let ops = [op("+XII"), op("+YII"), op("+ZII")];
    assert!(matches!(recover_register(&ops, Some(3)), Err(Error::AttackFailure(_))));
    assert!(matches!(recover_register(&ops, None), Err(Error::AttackFailure(_))));
}

#[test]
fn forged_money_for_epsilon_one_is_accepted() {
    let params = SchemeParams::new(10, 40, 8, 1.0).unwrap();
    let mut r = rng(14);
    let (secret, scheme) = gen_scheme(params, &mut r).unwrap();
    let mut forgery = forge_high_eps(&scheme, &mut r).unwrap();
    forgery.evaluate_against(&scheme, &secret);
    assert_eq!(forgery.failures(), 0);
    assert!(forgery.reports.iter().all(|rep| rep.planted_overlap == Some(1.0)));
    let out = verify(&scheme, &forgery.money, &mut r).unwrap();
    assert!(out.accepted);
    assert_eq!(out.q_value, 1.0);
}

#[test]
fn epsilon_zero_schemes_fail_on_nearly_all_registers() {
    let params = SchemeParams::new(20, 200, 20, 0.0).unwrap();
    let mut r = rng(15);
    let (_, scheme) = gen_scheme(params, &mut r).unwrap();
    let forgery = forge_high_eps(&scheme, &mut r).unwrap();
    assert!(forgery.failures() >= 18, "{} failures", forgery.failures());
    assert!(forgery.cliques.iter().filter(|c| c.is_none()).count() == forgery.failures());
}
