//! Recovers a planted clique from G(m, 1/2) with each finder.

use qmoney::clique::{bootstrap_clique, degree_sort_clique, find_clique, spectral_clique, Graph};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = 1000;
    let k = 10 * (m as f64).sqrt().ceil() as usize;
    let mut g = Graph::random(m, 0.5, &mut rng);
    let mut planted = sample(&mut rng, m, k).into_vec();
    planted.sort_unstable();
    g.plant_clique(&planted);

    let report = |name: &str, found: &[usize]| {
        let hits = found.iter().filter(|v| planted.binary_search(v).is_ok()).count();
        println!("{name:>12}: size {:>4}, {hits}/{k} planted vertices, exact = {}", found.len(), found == planted);
    };
    report("degree sort", &degree_sort_clique(&g).vertices);
    report("spectral", &spectral_clique(&g, k).vertices);
    report("bootstrap", &bootstrap_clique(&g, k as f64 / (m as f64).sqrt()).vertices);
    let auto = find_clique(&g, Some(k));
    report(auto.method.as_str(), &auto.vertices);
}
