//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::BTreeSet;

use neurocausal::graph::{Dag, Variable};

/// Every labelled DAG on `n` nodes, as adjacency matrices `adj[p][c]`, by
/// filtering all subsets of the n(n-1) ordered pairs for acyclicity.
pub fn brute_force_dags(n: usize) -> Vec<Vec<Vec<bool>>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|p| (0..n).filter(move |&c| c != p).map(move |c| (p, c)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let mut adj = vec![vec![false; n]; n];
        for (k, &(p, c)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                adj[p][c] = true;
            }
        }
        if acyclic(&adj) {
            out.push(adj);
        }
    }
    out
}

fn acyclic(adj: &[Vec<bool>]) -> bool {
    // Kahn's algorithm.
    let n = adj.len();
    let mut indegree: Vec<usize> = (0..n)
        .map(|c| (0..n).filter(|&p| adj[p][c]).count())
        .collect();
    let mut stack: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for c in 0..n {
            if adj[v][c] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    stack.push(c);
                }
            }
        }
    }
    seen == n
}

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("V{i}")).collect()
}

pub fn to_dag(adj: &[Vec<bool>], variables: Vec<Variable>) -> Dag {
    let n = adj.len();
    let names: Vec<String> = variables.iter().map(|v| v.name.clone()).collect();
    let edges: Vec<(&str, &str)> = (0..n)
        .flat_map(|p| (0..n).filter(move |&c| adj[p][c]).map(move |c| (p, c)))
        .map(|(p, c)| (names[p].as_str(), names[c].as_str()))
        .collect();
    Dag::new(variables, edges).unwrap()
}

pub fn feature_dag(adj: &[Vec<bool>]) -> Dag {
    to_dag(
        adj,
        names(adj.len())
            .into_iter()
            .map(Variable::feature)
            .collect(),
    )
}

/// d-separation by the moral-graph criterion: restrict to the ancestors of
/// {a, b} ∪ z, marry co-parents, drop directions, delete z and test whether
/// a still reaches b.
pub fn moral_separated(adj: &[Vec<bool>], a: usize, b: usize, z: &BTreeSet<usize>) -> bool {
    let n = adj.len();
    let mut keep = vec![false; n];
    let mut stack: Vec<usize> = [a, b].into_iter().chain(z.iter().copied()).collect();
    while let Some(v) = stack.pop() {
        if !keep[v] {
            keep[v] = true;
            for p in 0..n {
                if adj[p][v] {
                    stack.push(p);
                }
            }
        }
    }
    let mut und = vec![vec![false; n]; n];
    for c in 0..n {
        if !keep[c] {
            continue;
        }
        let parents: Vec<usize> = (0..n).filter(|&p| adj[p][c]).collect();
        for &p in &parents {
            und[p][c] = true;
            und[c][p] = true;
        }
        for &p in &parents {
            for &q in &parents {
                if p != q {
                    und[p][q] = true;
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![a];
    while let Some(v) = stack.pop() {
        if v == b {
            return false;
        }
        if seen[v] {
            continue;
        }
        seen[v] = true;
        for w in 0..n {
            if und[v][w] && keep[w] && !z.contains(&w) && !seen[w] {
                stack.push(w);
            }
        }
    }
    true
}

pub fn has_path(adj: &[Vec<bool>], from: usize, to: usize) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        for c in 0..n {
            if adj[v][c] {
                if c == to {
                    return true;
                }
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
    }
    false
}

/// All subsets of `items`.
pub fn subsets(items: &[usize]) -> Vec<BTreeSet<usize>> {
    (0u32..(1 << items.len()))
        .map(|m| {
            (0..items.len())
                .filter(|b| m >> b & 1 == 1)
                .map(|b| items[b])
                .collect()
        })
        .collect()
}

pub fn edge_set(adj: &[Vec<bool>]) -> BTreeSet<(usize, usize)> {
    let n = adj.len();
    (0..n)
        .flat_map(|p| (0..n).filter(move |&c| adj[p][c]).map(move |c| (p, c)))
        .collect()
}

pub fn adjacency(dag: &Dag) -> Vec<Vec<bool>> {
    let n = dag.len();
    (0..n)
        .map(|p| (0..n).map(|c| dag.has_edge(p, c)).collect())
        .collect()
}
