//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmoney::clique::{forge_high_eps, max_eigenvalue_check, spectral_clique, Graph};
use qmoney::harness::{run_experiment, summarize, ExperimentConfig, ExperimentKind};
use qmoney::money::{gen_scheme, verify, SchemeParams};
use qmoney::pauli::{Pauli1, PauliOp};
use qmoney::phase::{pe_probability, pe_sample, register_hamiltonian, PhaseEstimationParams};
use qmoney::postselect::{
    beta_chain_mixing, build_verifier, component_analysis, kraus_equivalence_check, make_label_scheme, LabeledMoney,
};
use qmoney::Complex64;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn all_paulis(n: usize) -> Vec<PauliOp> {
    let singles = [Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z];
    (0..4usize.pow(n as u32))
        .map(|mut code| {
            let factors: Vec<Pauli1> = (0..n)
                .map(|_| {
                    let p = singles[code % 4];
                    code /= 4;
                    p
                })
                .collect();
            PauliOp::from_paulis(&factors, false)
        })
        .collect()
}

fn c1_commutation() -> Verdict {
    let ops = all_paulis(2);
    let mut mismatches = 0;
    for a in &ops {
        let ma = a.dense_matrix().unwrap();
        for b in &ops {
            let mb = b.dense_matrix().unwrap();
            let dense = (&ma * &mb - &mb * &ma).iter().all(|z| z.norm() == 0.0);
            if a.commutes(b).unwrap() != dense {
                mismatches += 1;
            }
        }
    }
    verdict(mismatches == 0, format!("{} pairs, {mismatches} mismatches", ops.len() * ops.len()))
}

fn c2_honest_soundness() -> Verdict {
    let mut cfg = ExperimentConfig::new(ExperimentKind::HonestAcceptance);
    cfg.scheme = SchemeParams::new(8, 64, 1024, 0.25).unwrap();
    cfg.trials = 200;
    cfg.master_seed = 2;
    let recs = run_experiment(&cfg).unwrap();
    let s = summarize(&recs).unwrap();
    let honest = s.metrics["honest_accepted"].mean;
    let mixed = s.metrics["mixed_accepted"].mean;
    verdict(honest >= 0.99 && mixed <= 0.01, format!("honest acceptance {honest:.3}, fully mixed acceptance {mixed:.3}"))
}

fn c3_moments() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, m) = (6, 64);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut seen = HashSet::new();
        let mut ops = Vec::with_capacity(m);
        while ops.len() < m {
            let p = PauliOp::random(n, false, &mut rng);
            if seen.insert(p.unsigned().to_string()) {
                ops.push(if rng.gen() { p.negated() } else { p });
            }
        }
        let (t1, t2) = register_hamiltonian(&ops).unwrap().moments();
        worst = worst.max(t1.abs()).max((t2 - 1.0 / m as f64).abs());
    }
    verdict(worst <= 1e-12, format!("max moment deviation {worst:.2e} over 100 registers"))
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn c4_phase_estimation() -> Verdict {
    let params = PhaseEstimationParams::new(4, 0.125).unwrap();
    assert_eq!(params.q, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let outcomes = params.outcomes() as f64;
    let mut worst_tail: f64 = 0.0;
    for _ in 0..100 {
        let phi: f64 = rng.gen();
        let bad = (0..10_000)
            .filter(|_| circular_distance(phi, pe_sample(phi, &params, &mut rng) as f64 / outcomes) > 1.0 / 16.0)
            .count();
        worst_tail = worst_tail.max(bad as f64 / 1e4);
    }
    let mut worst_norm: f64 = 0.0;
    for q in 1..=12u32 {
        for _ in 0..10 {
            let phi: f64 = rng.gen();
            let total: f64 = (0..1u64 << q).map(|z| pe_probability(phi, q, z)).sum();
            worst_norm = worst_norm.max((total - 1.0).abs());
        }
    }
    verdict(
        worst_tail <= 0.125 && worst_norm <= 1e-10,
        format!("worst empirical tail {worst_tail:.4} (bound 0.125), worst normalization error {worst_norm:.1e}"),
    )
}

fn c5_low_eps() -> Verdict {
    let mut cfg = ExperimentConfig::new(ExperimentKind::LowEpsAttack);
    cfg.scheme = SchemeParams::new(6, 64, 512, 1.0 / 128.0).unwrap();
    cfg.trials = 50;
    cfg.master_seed = 5;
    let recs = run_experiment(&cfg).unwrap();
    let s = summarize(&recs).unwrap();
    let rate = s.pass_fraction;
    let bound = 0.5 + 1.0 / (8.0 * 8.0) - 0.01;
    let min_p_plus = s.metrics["mean_p_plus"].min;
    verdict(
        rate >= 0.75 && min_p_plus >= bound,
        format!("acceptance {rate:.2} over 50 trials; analysis Pr(+1) min over schemes {min_p_plus:.4} (bound {bound:.4})"),
    )
}

/// Largest clique size by exhaustive branch and bound.
fn max_clique(g: &Graph) -> usize {
    fn grow(g: &Graph, cand: Vec<usize>, size: usize, best: &mut usize) {
        if size + cand.len() <= *best {
            return;
        }
        if cand.is_empty() {
            *best = size;
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

fn c6_spectral_clique() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let m = 2000;
    let k = 10 * (m as f64).sqrt().ceil() as usize;
    let mut exact = 0;
    for _ in 0..25 {
        let mut g = Graph::random(m, 0.5, &mut rng);
        let mut planted: Vec<usize> = sample(&mut rng, m, k).into_vec();
        planted.sort_unstable();
        g.plant_clique(&planted);
        if spectral_clique(&g, k).vertices == planted {
            exact += 1;
        }
    }
    let mut oversize = 0;
    for t in 0..40 {
        let mm = 20 + t % 11;
        let mut g = Graph::random(mm, 0.5, &mut rng);
        let kk = 4 + t % 9;
        g.plant_clique(&sample(&mut rng, mm, kk).into_vec());
        let r = spectral_clique(&g, kk);
        if !g.is_clique(&r.vertices) || r.size() > max_clique(&g) {
            oversize += 1;
        }
    }
    verdict(
        exact >= 20 && oversize == 0,
        format!("exact recovery {exact}/25 at m={m}, k={k}; small-graph violations {oversize}/40"),
    )
}

fn c7_high_eps() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (_, scheme) = gen_scheme(SchemeParams::new(50, 400, 256, 0.5).unwrap(), &mut rng).unwrap();
    let forgery = forge_high_eps(&scheme, &mut rng).unwrap();
    let accepted = (0..50).filter(|_| verify(&scheme, &forgery.money, &mut rng).unwrap().accepted).count();
    verdict(
        accepted >= 45,
        format!("{accepted}/50 verifications accepted; {} of 256 registers failed recovery", forgery.failures()),
    )
}

fn c8_eigenvalue_bound() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (m, n) = (1000, 64);
    let bound = 10.0 * (m as f64).sqrt();
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..20 {
        let ops: Vec<PauliOp> = (0..m).map(|_| PauliOp::random(n, false, &mut rng)).collect();
        worst = worst.max(max_eigenvalue_check(&ops).unwrap());
    }
    verdict(worst <= bound, format!("largest λ_max {worst:.1} over 20 matrices (bound {bound:.1})"))
}

fn c9_postselection() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let scheme = make_label_scheme(12, 4, 2, 9).unwrap();
    let verifier = build_verifier(&scheme, 1).unwrap();
    let labels: Vec<u64> = {
        let mut v = verifier.labels().to_vec();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut worst_residual: f64 = 0.0;
    let mut eigenspace_mismatch = 0;
    for &l in &labels {
        let note = LabeledMoney::for_label(verifier.labels(), l).unwrap();
        let mv = verifier.apply_m(&note.state).unwrap();
        let res = mv.iter().zip(&note.state).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        worst_residual = worst_residual.max(res);
        let a = component_analysis(&verifier, l).unwrap();
        if a.unit_eigenspace_dim != a.components.len() {
            eigenspace_mismatch += 1;
        }
    }
    let mut worst_kraus: f64 = 0.0;
    for n in 1..=6 {
        for (s, d) in [(0, 0), (1, 1), (3, 2), (4, 2)] {
            let sch = make_label_scheme(n, s, d, 100 + n as u64).unwrap();
            worst_kraus = worst_kraus.max(kraus_equivalence_check(&build_verifier(&sch, 1).unwrap()).unwrap());
        }
    }
    let mut non_monotone = 0;
    for _ in 0..100 {
        let v: Vec<Complex64> = (0..1 << 12).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<Complex64> = v.into_iter().map(|a| a / norm).collect();
        let l = labels[rng.gen_range(0..labels.len())];
        let mut prev = f64::INFINITY;
        for r in 1..=30 {
            let p = verifier.with_iterations(r).unwrap().acceptance_probability(l, &v).unwrap();
            if p > prev + 1e-12 {
                non_monotone += 1;
                break;
            }
            prev = p;
        }
    }
    verdict(
        worst_residual <= 1e-10 && worst_kraus <= 1e-10 && eigenspace_mismatch == 0 && non_monotone == 0,
        format!(
            "{} classes: max ‖Mv−v‖ {worst_residual:.1e}, eigenspace/component mismatches {eigenspace_mismatch}; \
             Kraus deviation {worst_kraus:.1e}; non-monotone vectors {non_monotone}/100",
            labels.len()
        ),
    )
}

fn c10_beta_chain() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 10;
    let steps = (10.0 * n as f64 * (n as f64 * 2f64.ln())).ceil() as usize;
    let scheme = make_label_scheme(n, 4, 2, 10).unwrap();
    let start = rng.gen_range(0..1u128 << n);
    let target = scheme.label(start).unwrap();
    let mixing = beta_chain_mixing(&scheme, target, 0.0, steps, start, &mut rng).unwrap();
    let tv = mixing.tv_distance.unwrap();
    let verifier = build_verifier(&scheme, 1).unwrap();
    let frozen = verifier.frozen_strings();
    let mut stalled = 0;
    let tries = frozen.len().min(5);
    for &x in frozen.iter().take(tries) {
        let x = x as u128;
        let r = beta_chain_mixing(&scheme, scheme.label(x).unwrap(), 20.0, steps, x, &mut rng).unwrap();
        stalled += r.stalled as usize;
    }
    verdict(
        tv <= 0.05 && tries > 0 && stalled == tries,
        format!("β=0 TV {tv:.2e} after {steps} steps; β=20 stalled from {stalled}/{tries} frozen starts"),
    )
}

/// Name, check and wall-clock budget.
type Criterion = (&'static str, fn() -> Verdict, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 commutation correctness", c1_commutation, Duration::from_secs(1)),
        ("2 honest-money soundness", c2_honest_soundness, Duration::from_secs(60)),
        ("3 moment identities", c3_moments, Duration::from_secs(600)),
        ("4 phase-estimation bound", c4_phase_estimation, Duration::from_secs(600)),
        ("5 low-eps forgery", c5_low_eps, Duration::from_secs(600)),
        ("6 spectral clique recovery", c6_spectral_clique, Duration::from_secs(600)),
        ("7 high-eps secret recovery", c7_high_eps, Duration::from_secs(300)),
        ("8 eigenvalue bound", c8_eigenvalue_bound, Duration::from_secs(600)),
        ("9 postselection money", c9_postselection, Duration::from_secs(600)),
        ("10 beta-chain diagnostics", c10_beta_chain, Duration::from_secs(600)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let ok = v.pass && elapsed <= budget;
        failed += !ok as usize;
        println!(
            "criterion {name}: {} ({}; {:.2}s of {}s budget)",
            if ok { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
