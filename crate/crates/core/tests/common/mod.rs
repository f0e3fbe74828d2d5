//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use fabric_core::routing::{RoutePlan, SwitchSetting, SwitchState};
use fabric_core::topology::Network;
use fabric_core::Permutation;
use petgraph::algo::is_isomorphic_matching;
use petgraph::graph::{DiGraph, NodeIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn log2(n: usize) -> usize {
    n.trailing_zeros() as usize
}

/// All permutations of `0..n` in lexicographic order (next-permutation).
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

pub fn displacement(map: &[usize]) -> usize {
    map.iter()
        .enumerate()
        .map(|(i, &v)| i.abs_diff(v))
        .max()
        .unwrap_or(0)
}

/// Uniform permutation of `0..n` with displacement at most `k`, by
/// rejection for small `n` and by random adjacent transpositions otherwise.
pub fn sample_bounded(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Permutation {
    let mut map: Vec<usize> = (0..n).collect();
    if n <= 8 {
        loop {
            map.shuffle(rng);
            if displacement(&map) <= k {
                return Permutation::new(map).unwrap();
            }
        }
    }
    let steps = rng.gen_range(0..4 * n);
    for _ in 0..steps {
        let i = rng.gen_range(0..n - 1);
        map.swap(i, i + 1);
        if displacement(&map) > k {
            map.swap(i, i + 1);
        }
    }
    // Occasionally push a whole block to the band limit.
    if k > 0 && rng.gen_bool(0.5) {
        let start = rng.gen_range(0..n - k);
        let mut trial = map.clone();
        trial[start..=start + k].rotate_left(1);
        if displacement(&trial) <= k {
            map = trial;
        }
    }
    Permutation::new(map).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Output line reached by every input, following the plan's switch states
/// column by column. Columns absent from `route` are skipped. `None` where
/// a packet meets a switch with no state.
pub fn simulate(net: &Network, plan: &RoutePlan, route: &[usize]) -> Vec<Option<usize>> {
    let mut state: HashMap<(usize, usize), SwitchState> = HashMap::new();
    for &SwitchSetting(c, pos, s) in &plan.settings {
        state.insert((c, pos), s);
    }
    (0..net.n())
        .map(|input| {
            let mut line = input;
            for &c in route {
                let col = net.column(c);
                let Some(sw) = col.switches().iter().find(|s| s.lines().contains(&line)) else {
                    continue;
                };
                let [a, b] = sw.lines();
                match state.get(&(c, a)) {
                    Some(SwitchState::Straight) => {}
                    Some(SwitchState::Cross) => line = if line == a { b } else { a },
                    _ => return None,
                }
            }
            Some(line)
        })
        .collect()
}

/// Layered digraph of a network: terminals and switches as nodes, one edge
/// per line segment. Node weights tell terminals from switches.
pub fn network_graph(net: &Network) -> DiGraph<u8, ()> {
    let n = net.n();
    let mut g = DiGraph::new();
    let mut at: Vec<NodeIndex> = (0..n).map(|_| g.add_node(0)).collect();
    for col in net.columns() {
        let mut next = at.clone();
        for sw in col.switches() {
            let node = g.add_node(1);
            for line in sw.lines() {
                g.add_edge(at[line], node, ());
                next[line] = node;
            }
        }
        at = next;
    }
    for line in 0..n {
        let out = g.add_node(2);
        g.add_edge(at[line], out, ());
    }
    g
}

pub fn isomorphic(a: &Network, b: &Network) -> bool {
    let (ga, gb) = (network_graph(a), network_graph(b));
    ga.node_count() == gb.node_count()
        && ga.edge_count() == gb.edge_count()
        && is_isomorphic_matching(&ga, &gb, |x, y| x == y, |_, _| true)
}

/// Number of distinct input-to-output paths, by dynamic programming over
/// the layered graph.
pub fn path_counts(net: &Network) -> Vec<Vec<u64>> {
    let n = net.n();
    (0..n)
        .map(|input| {
            let mut ways = vec![0u64; n];
            ways[input] = 1;
            for col in net.columns() {
                let mut next = ways.clone();
                for (a, b) in col.pairs() {
                    let s = ways[a] + ways[b];
                    next[a] = s;
                    next[b] = s;
                }
                ways = next;
            }
            ways
        })
        .collect()
}
