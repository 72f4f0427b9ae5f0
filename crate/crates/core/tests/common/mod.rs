#![allow(dead_code)]

use graph_shift::{gen_btm, gen_fdm, gen_pdm, AffinityMatrix, SimplexVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const FAMILIES: [&str; 3] = ["FDM", "PDM", "BTM"];

/// One of the three generator families, with block count capped for small n.
pub fn instance(family: usize, n: usize, seed: u64) -> AffinityMatrix {
    match family % 3 {
        0 => gen_fdm(n, seed).unwrap(),
        1 => gen_pdm(n, 0.263, seed).unwrap(),
        _ => gen_btm(n, 13.min(n / 3).max(2), seed).unwrap(),
    }
}

/// Random point on a random face of size `1..=max_support`, weights
/// exponential so the point is uniform on that face.
pub fn random_point(rng: &mut ChaCha8Rng, n: usize, max_support: usize) -> SimplexVector {
    let k = rng.gen_range(1..=max_support.min(n));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut raw = vec![0.0; n];
    for &i in &idx[..k] {
        raw[i] = -(1.0 - rng.gen::<f64>()).ln();
    }
    let total: f64 = raw.iter().sum();
    raw.iter_mut().for_each(|v| *v /= total);
    graph_shift::clamp_to_simplex(raw).unwrap()
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> AffinityMatrix {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    AffinityMatrix::from_triplets(n, edges).unwrap()
}

/// Bitmasks of all maximal cliques, by exhaustive subset scan.
pub fn maximal_cliques(a: &AffinityMatrix) -> Vec<u32> {
    let n = a.n();
    assert!(n <= 20);
    let adj: Vec<u32> = (0..n)
        .map(|i| (0..n).filter(|&j| a.get(i, j) > 0.0).fold(0, |m, j| m | 1 << j))
        .collect();
    let is_clique = |mask: u32| (0..n).all(|i| mask & 1 << i == 0 || mask & !(1 << i) & !adj[i] == 0);
    (1u32..1 << n)
        .filter(|&m| is_clique(m))
        .filter(|&m| (0..n).all(|j| m & 1 << j != 0 || !is_clique(m | 1 << j)))
        .collect()
}

pub fn mask_of(indices: &[usize]) -> u32 {
    indices.iter().fold(0, |m, &i| m | 1 << i)
}
