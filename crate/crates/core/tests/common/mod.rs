#![allow(dead_code)]

use spnd_core::graph::{EdgeRecord, EdgeSet, MultiGraph, VertexId};

/// Minimum capacity of purchased edges crossing any s-t vertex bipartition.
pub fn min_cut_brute(g: &MultiGraph, set: &EdgeSet, caps: &[u64]) -> u64 {
    let n = g.vertex_count();
    let (s, t) = (g.source(), g.sink());
    let mut best = u64::MAX;
    for side in 0..1u64 << n {
        if side >> s & 1 == 0 || side >> t & 1 == 1 {
            continue;
        }
        let cut = set
            .iter()
            .filter(|&i| {
                let e = g.edge(i);
                (side >> e.u & 1) != (side >> e.v & 1)
            })
            .map(|i| caps[i])
            .sum();
        best = best.min(cut);
    }
    best
}

/// Series-parallel test by reductions on a bare edge list, trying every
/// terminal pair. Written independently of the library's recognizer.
pub fn naive_is_sp(n: usize, pairs: &[(VertexId, VertexId)]) -> bool {
    (0..n).any(|a| (a + 1..n).any(|b| naive_reduces(n, pairs, a, b)))
}

fn naive_reduces(n: usize, pairs: &[(VertexId, VertexId)], a: VertexId, b: VertexId) -> bool {
    let mut edges: Vec<(VertexId, VertexId)> = pairs.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    loop {
        edges.sort_unstable();
        let before = edges.len();
        edges.dedup();
        let mut changed = edges.len() != before;
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        if let Some(x) = (0..n).find(|&x| x != a && x != b && degree[x] == 2) {
            let inc: Vec<usize> = (0..edges.len()).filter(|&i| edges[i].0 == x || edges[i].1 == x).collect();
            let other = |(u, v): (VertexId, VertexId)| if u == x { v } else { u };
            let (p, q) = (other(edges[inc[0]]), other(edges[inc[1]]));
            edges.remove(inc[1]);
            edges.remove(inc[0]);
            edges.push((p.min(q), p.max(q)));
            changed = true;
        }
        if !changed {
            return edges == [(a.min(b), a.max(b))];
        }
    }
}

/// A graph on `n` vertices with unit costs and the given capacities.
pub fn graph_from(n: usize, pairs: &[(VertexId, VertexId)], caps: &[u64], s: VertexId, t: VertexId) -> MultiGraph {
    let edges = pairs
        .iter()
        .zip(caps)
        .enumerate()
        .map(|(i, (&(u, v), &c))| EdgeRecord::new(format!("e{}", i + 1), u, v, 1, c))
        .collect();
    MultiGraph::new(n, edges, s, t, None).unwrap()
}
