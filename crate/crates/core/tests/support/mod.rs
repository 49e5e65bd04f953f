//! Test-only oracles that share no code with the library's scoring path.
#![allow(dead_code)]

use mentionscope::graph::Snapshot;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense symmetrized adjacency `A + Aᵀ` over local node positions.
pub fn symmetric_dense(s: &Snapshot) -> Vec<Vec<f64>> {
    let n = s.num_nodes();
    let mut a = vec![vec![0.0; n]; n];
    for (src, dst, w) in s.edges() {
        let i = s.local_index(src).unwrap();
        let j = s.local_index(dst).unwrap();
        a[i][j] += w;
        a[j][i] += w;
    }
    a
}

/// Modularity by the literal double sum over all node pairs.
pub fn naive_modularity(s: &Snapshot, labels: &[usize]) -> f64 {
    let a = symmetric_dense(s);
    let n = a.len();
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Calls `f` with every set partition of `0..n` as a restricted growth string.
pub fn for_each_partition(n: usize, mut f: impl FnMut(&[usize])) {
    fn rec(pos: usize, max: usize, labels: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if pos == labels.len() {
            f(labels);
            return;
        }
        for c in 0..=max + 1 {
            labels[pos] = c;
            rec(pos + 1, max.max(c), labels, f);
        }
    }
    if n == 0 {
        f(&[]);
        return;
    }
    let mut labels = vec![0; n];
    rec(1, 0, &mut labels, &mut f);
}

/// Best modularity over all partitions, with one maximizing labelling.
pub fn exhaustive_optimum(s: &Snapshot) -> (f64, Vec<usize>) {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for_each_partition(s.num_nodes(), |labels| {
        let q = naive_modularity(s, labels);
        if q > best.0 {
            best = (q, labels.to_vec());
        }
    });
    best
}

/// Random directed weighted graph on up to `n` nodes, with occasional
/// self-loops. Always has at least one edge.
pub fn random_snapshot(n: u32, density: f64, seed: u64) -> Snapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let p = if i == j { density / 8.0 } else { density };
            if rng.gen_bool(p) {
                edges.push((i, j, rng.gen_range(1..=4) as f64));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1, 1.0));
    }
    Snapshot::from_edges(0, edges).unwrap()
}

/// Random labels over `n` nodes using at most `max_labels` distinct values.
pub fn random_labels(n: usize, max_labels: usize, rng: &mut impl Rng) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..max_labels.max(1))).collect()
}

pub fn undirected(edges: &[(u32, u32)]) -> Snapshot {
    Snapshot::from_edges(0, edges.iter().map(|&(a, b)| (a, b, 1.0))).unwrap()
}

pub fn clique_edges(nodes: std::ops::Range<u32>) -> Vec<(u32, u32)> {
    let v: Vec<u32> = nodes.collect();
    let mut out = Vec::new();
    for (x, &i) in v.iter().enumerate() {
        for &j in &v[x + 1..] {
            out.push((i, j));
        }
    }
    out
}

/// Planted-partition random graph: `n` nodes split round-robin into
/// `groups` blocks; each unordered pair is linked with probability `p_in`
/// inside a block and `p_out` across blocks, in a random direction with an
/// integer weight in 1..=3.
pub fn planted_snapshot(n: u32, groups: u32, p_in: f64, p_out: f64, seed: u64) -> Snapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if i % groups == j % groups { p_in } else { p_out };
            if rng.gen_bool(p) {
                let w = rng.gen_range(1..=3) as f64;
                if rng.gen_bool(0.5) {
                    edges.push((i, j, w));
                } else {
                    edges.push((j, i, w));
                }
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1, 1.0));
    }
    Snapshot::from_edges(0, edges).unwrap()
}
