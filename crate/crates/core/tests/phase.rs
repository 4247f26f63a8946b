use nalgebra::DMatrix;
use qmoney::money::expected_q;
use qmoney::phase::{
    accept_window, analyze_rho, eigenvalue_phase, generate_rho, pe_probability, pe_sample, register_fractions,
    register_hamiltonian, window_probability, LowEpsForger, PhaseEstimationParams, RegisterHamiltonian,
};
use qmoney::{gen_scheme, verify, Complex64, Error, PauliOp, SchemeParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `m` distinct non-identity signed Paulis on `n` qubits.
fn distinct_register(n: usize, m: usize, r: &mut ChaCha8Rng) -> Vec<PauliOp> {
    let mut ops: Vec<PauliOp> = Vec::with_capacity(m);
    while ops.len() < m {
        let p = PauliOp::random(n, false, r);
        if ops.iter().all(|o| o.symplectic() != p.symplectic()) {
            ops.push(p);
        }
    }
    ops
}

fn diagonal(eigenvalues: &[f64], m: usize) -> RegisterHamiltonian {
    let h = DMatrix::from_fn(eigenvalues.len(), eigenvalues.len(), |i, j| {
        Complex64::new(if i == j { eigenvalues[i] } else { 0.0 }, 0.0)
    });
    RegisterHamiltonian::from_matrix(h, m).unwrap()
}

fn chi_square_p(observed: &[f64], expected: &[f64]) -> f64 {
    let stat: f64 = observed.iter().zip(expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((observed.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn hamiltonian_moments_and_reconstruction() {
    let mut r = rng(1);
    for _ in 0..10 {
        let ops = distinct_register(6, 64, &mut r);
        let h = register_hamiltonian(&ops).unwrap();
        let (tr, tr2) = h.moments();
        assert!(tr.abs() < 1e-12);
        assert!((tr2 - 1.0 / 64.0).abs() < 1e-12);
        assert!(h.reconstruction_error() <= 1e-8);
        assert!(h.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        assert!(h.eigenvalues().iter().all(|l| l.abs() <= 1.0 + 1e-9));
        let from_eig = h.eigenvalues().iter().map(|l| l * l).sum::<f64>() / 64.0;
        assert!((from_eig - tr2).abs() < 1e-12);
    }
}

#[test]
fn hamiltonian_contracts() {
    assert!(register_hamiltonian(&[]).is_err());
    assert!(matches!(register_hamiltonian(&[PauliOp::random(15, false, &mut rng(0))]), Err(Error::Capacity { .. })));
    let skew = DMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
    );
    assert!(matches!(RegisterHamiltonian::from_matrix(skew, 1), Err(Error::Contract(_))));
    let too_big = DMatrix::from_element(2, 2, Complex64::new(1.5, 0.0));
    assert!(RegisterHamiltonian::from_matrix(too_big, 1).is_err());
}

#[test]
fn fraction_examples() {
    let h = diagonal(&[0.0; 4], 16);
    assert_eq!(register_fractions(&h, 16), (0.0, 0.0));
}

#[test]
fn good_state_fractions_on_random_registers() {
    let mut r = rng(2);
    let m = 64;
    let samples = 200;
    let mut with_g = 0;
    for _ in 0..samples {
        let (_, scheme) = gen_scheme(SchemeParams::new(6, m, 1, 0.0).unwrap(), &mut r).unwrap();
        let h = register_hamiltonian(scheme.register(0)).unwrap();
        let (f, g) = register_fractions(&h, m);
        assert!(f >= 3.0 / (4.0 * m as f64 - 1.0), "f = {f}");
        with_g += (g >= 3.0 / (8.0 * m as f64 - 2.0)) as usize;
    }
    let sigma = (0.25 / samples as f64).sqrt();
    assert!(with_g as f64 / samples as f64 >= 0.5 - 3.0 * sigma, "{with_g}/{samples}");
}

#[test]
fn phase_mapping_and_window() {
    assert_eq!(eigenvalue_phase(0.4), 0.1);
    assert_eq!(eigenvalue_phase(-0.4), 0.9);
    assert_eq!(eigenvalue_phase(0.0), 0.0);
    let (lo, hi) = accept_window(64);
    assert!((lo - (1.0 / 64.0 - 1.0 / 1280.0)).abs() < 1e-15);
    assert_eq!(hi, 0.5);
}

#[test]
fn sampler_matches_the_enumerated_kernel() {
    let params = PhaseEstimationParams::new(4, 0.125).unwrap();
    let n = params.outcomes();
    let mut r = rng(3);
    for phi in [0.123456, 0.5 + 1e-4, 0.9991] {
        let probs: Vec<f64> = (0..n).map(|z| pe_probability(phi, params.q, z)).collect();
        let samples = 20_000;
        let mut counts = vec![0.0; n as usize];
        for _ in 0..samples {
            counts[pe_sample(phi, &params, &mut r) as usize] += 1.0;
        }
        // cells with small expectation are pooled
        let (mut obs, mut exp) = (Vec::new(), Vec::new());
        let (mut pool_o, mut pool_e) = (0.0, 0.0);
        for (c, p) in counts.iter().zip(&probs) {
            let e = p * samples as f64;
            if e >= 5.0 {
                obs.push(*c);
                exp.push(e);
            } else {
                pool_o += c;
                pool_e += e;
            }
        }
        obs.push(pool_o);
        exp.push(pool_e);
        let p = chi_square_p(&obs, &exp);
        assert!(p > 1e-3, "phi = {phi}: p-value {p}");
    }
}

#[test]
fn sampler_tails_match_window_masses_at_large_q() {
    let params = PhaseEstimationParams::for_register(64).unwrap();
    let n = params.outcomes() as i64;
    let nf = n as f64;
    let base = n / 5;
    let phi = (base as f64 + 0.37) / nf;
    // mass of principal offsets [a, b] from the peak
    let mass = |a: i64, b: i64| {
        let span = |lo: i64, hi: i64| window_probability(phi, &params, lo as f64 / nf, hi as f64 / nf);
        let (lo, hi) = (base + a, base + b);
        if lo >= 0 {
            span(lo, hi)
        } else {
            span(lo + n, n - 1) + span(0, hi)
        }
    };
    let bins = [(0, 0), (1, 3), (4, 63), (64, n / 2)];
    let expected: Vec<f64> =
        bins.iter().map(|&(a, b)| if a == 0 { mass(0, 0) } else { mass(a, b) + mass(-b.min(n / 2 - 1), -a) }).collect();
    let covered: f64 = expected.iter().sum();
    assert!((covered - 1.0).abs() < 1e-6, "bins cover {covered}");

    let mut r = rng(4);
    let samples = 50_000;
    let mut counts = vec![0.0; bins.len()];
    for _ in 0..samples {
        let k = (pe_sample(phi, &params, &mut r) as i64 - base).rem_euclid(n);
        let d = k.min(n - k);
        counts[bins.iter().position(|&(a, b)| a <= d && d <= b).unwrap()] += 1.0;
    }
    let exp: Vec<f64> = expected.iter().map(|p| p * samples as f64).collect();
    let p = chi_square_p(&counts, &exp);
    assert!(p > 1e-3, "p-value {p}: observed {counts:?}, expected {exp:?}");
}

#[test]
fn bad_eigenstates_are_accepted_with_probability_at_most_delta() {
    let m = 64;
    let params = PhaseEstimationParams::for_register(m).unwrap();
    let (lo, hi) = accept_window(m);
    let tol = 0.5f64.powi(params.r as i32);
    let mut checked = 0;
    for k in 0..=2000 {
        let lambda = -1.0 + k as f64 / 1000.0;
        let phi = eigenvalue_phase(lambda);
        let outside = phi < lo - tol || phi > hi + tol;
        if outside {
            assert!(window_probability(phi, &params, lo, hi) <= params.delta, "λ = {lambda}");
            checked += 1;
        }
    }
    assert!(checked > 1000);

    // half good (λ = 1/2), half bad (λ = −0.3)
    let h = diagonal(&[-0.3, -0.3, 0.5, 0.5], m);
    let a = analyze_rho(&h, m).unwrap();
    assert!(a.accept[0] <= params.delta && a.accept[1] <= params.delta);
    assert!(a.accept[2] >= 1.0 - params.delta);
    assert!(a.weights[2] + a.weights[3] >= 1.0 - 2.0 * params.delta);
    assert!((a.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn zero_hamiltonian_always_exhausts() {
    let h = diagonal(&[0.0; 8], 16);
    let a = analyze_rho(&h, 16).unwrap();
    assert_eq!(a.p_exhausted, 1.0);
    assert!(a.tr_h_rho.abs() < 1e-15);
    let mut r = rng(5);
    for _ in 0..5 {
        let (_, s) = generate_rho(&h, 16, &mut r).unwrap();
        assert_eq!(s.eigen_index, None);
    }
}

#[test]
fn sampled_loop_matches_the_analysed_mixture() {
    // one eigenvalue placed a fraction of an outcome above the window edge
    let m = 8;
    let params = PhaseEstimationParams::for_register(m).unwrap();
    let (lo, _) = accept_window(m);
    let nf = params.outcomes() as f64;
    let edge = ((lo * nf).ceil() - 0.6) / nf;
    let h = diagonal(&[-0.5, 0.0, 4.0 * edge, 0.8], m);
    let a = analyze_rho(&h, m).unwrap();
    assert!(a.accept[2] > 0.05 && a.accept[2] < 0.95, "edge acceptance {}", a.accept[2]);

    let h_dead = diagonal(&[-0.5, 0.0, 4.0 * edge, -0.2], m);
    let dead = analyze_rho(&h_dead, m).unwrap();
    assert!(dead.p_exhausted > 0.003, "exhaustion {}", dead.p_exhausted);

    let mut r = rng(6);
    for (h, a) in [(&h, &a), (&h_dead, &dead)] {
        let samples = 20_000;
        let mut counts = [0.0; 5];
        for _ in 0..samples {
            let (_, s) = generate_rho(h, m, &mut r).unwrap();
            counts[s.eigen_index.unwrap_or(4)] += 1.0;
        }
        // outcome j: accepted eigenstate j; outcome 4: exhausted
        let mut expected: Vec<f64> = a.weights.iter().map(|w| (w - a.p_exhausted / 4.0) * samples as f64).collect();
        expected.push(a.p_exhausted * samples as f64);
        let keep: Vec<usize> = (0..5).filter(|&i| expected[i] >= 5.0).collect();
        for i in 0..5 {
            if expected[i] < 1e-3 {
                assert_eq!(counts[i], 0.0, "outcome {i}");
            }
        }
        let obs: Vec<f64> = keep.iter().map(|&i| counts[i]).collect();
        let exp: Vec<f64> = keep.iter().map(|&i| expected[i]).collect();
        let p = chi_square_p(&obs, &exp);
        assert!(p > 1e-3, "p-value {p}: {counts:?} vs {expected:?}");
    }
}

#[test]
fn analysed_mixture_reaches_the_energy_target() {
    let mut r = rng(7);
    let m = 64;
    let target = 1.0 / (4.0 * (m as f64).sqrt()) - 0.01;
    let (mut eligible, mut hits) = (0, 0);
    for _ in 0..60 {
        let (_, scheme) = gen_scheme(SchemeParams::new(6, m, 1, 0.0).unwrap(), &mut r).unwrap();
        let h = register_hamiltonian(scheme.register(0)).unwrap();
        let (_, g) = register_fractions(&h, m);
        if g >= 3.0 / (8.0 * m as f64 - 2.0) {
            eligible += 1;
            hits += (analyze_rho(&h, m).unwrap().tr_h_rho >= target) as usize;
        }
    }
    assert!(eligible >= 20);
    assert!(hits * 10 >= eligible * 9, "{hits}/{eligible}");
}

#[test]
fn fully_planted_registers_have_the_secret_as_top_eigenstate() {
    let m = 64;
    let params = SchemeParams::new(3, m, 20, 1.0).unwrap();
    let mut r = rng(8);
    let (secret, scheme) = gen_scheme(params, &mut r).unwrap();
    let forger = LowEpsForger::new(&scheme).unwrap();
    let analysis = forger.analyze().unwrap();
    for (i, h) in forger.hamiltonians().iter().enumerate() {
        let top = *h.eigenvalues().last().unwrap();
        assert!((top - 1.0).abs() < 1e-9);
        let v = h.eigenvector(h.eigenvalues().len() - 1);
        let overlap: f64 =
            v.iter().zip(secret.states[i].statevector().unwrap()).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm();
        assert!((overlap - 1.0).abs() < 1e-9, "register {i}: overlap {overlap}");
        assert!(analysis[i].0.tr_h_rho >= 1.0 / (4.0 * (m as f64).sqrt()));
    }
    // Q of the analysed mixture is the mean of Tr[Hρ] over registers
    let mean_tr = analysis.iter().map(|(a, _)| a.tr_h_rho).sum::<f64>() / analysis.len() as f64;
    let q = expected_q(&scheme, &forger.analysis_money().unwrap()).unwrap();
    assert!((q - mean_tr).abs() < 1e-9, "{q} vs {mean_tr}");
    assert_eq!(expected_q(&scheme, &qmoney::honest_money(&secret)).unwrap(), 1.0);
}

#[test]
fn low_epsilon_forgery_is_accepted() {
    let m = 64;
    let params = SchemeParams::new(6, m, 128, 1.0 / 128.0).unwrap();
    let mut r = rng(9);
    let (_, scheme) = gen_scheme(params, &mut r).unwrap();
    let forger = LowEpsForger::new(&scheme).unwrap();
    let analysis = forger.analyze().unwrap();
    let mean_plus = analysis.iter().map(|(a, _)| 0.5 + 0.5 * a.tr_h_rho).sum::<f64>() / analysis.len() as f64;
    assert!(mean_plus >= 0.5 + 1.0 / (8.0 * (m as f64).sqrt()) - 0.01, "mean Pr(+1) {mean_plus}");
    let mut accepted = 0;
    for _ in 0..4 {
        let (money, _) = forger.forge(&mut r).unwrap();
        accepted += (0..5).filter(|_| verify(&scheme, &money, &mut r).unwrap().accepted).count();
    }
    assert!(accepted >= 15, "{accepted}/20");
}

#[test]
fn small_operator_counts_are_rejected() {
    let (_, scheme) = gen_scheme(SchemeParams::new(2, 7, 2, 0.0).unwrap(), &mut rng(10)).unwrap();
    assert!(matches!(LowEpsForger::new(&scheme), Err(Error::Parameter(_))));
}
