#![allow(dead_code)]

use glsn_core::{Glsn, WeightScheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const COUNTRY_CODES: [&str; 4] = ["AAA", "BBB", "CCC", "DDD"];

/// Erdős–Rényi graph on `n` ports spread over `countries` countries.
pub fn random_graph(seed: u64, n: usize, edge_prob: f64, countries: usize) -> Glsn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<(String, String)> = (0..n)
        .map(|i| {
            (
                format!("P{i:02}"),
                COUNTRY_CODES[rng.random_range(0..countries)].to_string(),
            )
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(edge_prob) {
                edges.push(((format!("P{i:02}"), format!("P{j:02}")), 1.0));
            }
        }
    }
    Glsn::new(WeightScheme::Unweighted, nodes, edges).unwrap()
}

/// The graph suite used across oracle checks: n in 2..=12, p = 0.3, 2-4 countries.
pub fn suite_graph(seed: u64) -> Glsn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = rng.random_range(2..=12);
    let countries = rng.random_range(2..=4);
    random_graph(seed, n, 0.3, countries)
}

pub fn graph(nodes: &[(&str, &str)], edges: &[(&str, &str)]) -> Glsn {
    Glsn::new(
        WeightScheme::Unweighted,
        nodes.iter().map(|(p, c)| (p.to_string(), c.to_string())),
        edges.iter().map(|(a, b)| ((a.to_string(), b.to_string()), 1.0)),
    )
    .unwrap()
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize, sd: f64) -> Vec<f64> {
    use rand_distr::{Distribution, Normal};
    let d = Normal::new(0.0, sd).unwrap();
    (0..n).map(|_| d.sample(rng)).collect()
}
