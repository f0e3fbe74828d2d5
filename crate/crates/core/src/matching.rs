//! Permutation graphs, compatibility graphs and the matching inputs they
//! imply.
//!
//! Switches here are the first-column switches of a K-Benes (lines `2j` and
//! `2j + 1`) on the input side and the last-column switches on the output
//! side. A permutation graph joins input switch `S_i` to output switch
//! `S_π(i)` for every input `i`; each switch touches two such edges, so the
//! graph splits into alternating cycles. The looping algorithm sends the two
//! packets of every switch to opposite subnetworks, which makes subnetwork
//! assignments alternate along those cycles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::routing::{BandEmbedding, MatchingStage};
use crate::Permutation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwitchNode {
    Input(usize),
    Output(usize),
}

/// Permutation-graph edge between two switches, with the inputs carried.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermEdge {
    pub input_switch: usize,
    pub output_switch: usize,
    pub inputs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermutationGraph {
    pub n: usize,
    /// Sorted by `(input_switch, output_switch)`; parallel edges merged.
    pub edges: Vec<PermEdge>,
    #[serde(skip)]
    map: Vec<usize>,
    #[serde(skip)]
    inverse: Vec<usize>,
}

pub fn build_permutation_graph(p: &Permutation) -> Result<PermutationGraph> {
    let n = p.len();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidSize { n, min: 2 });
    }
    let mut merged: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        merged.entry((i / 2, p.apply(i) / 2)).or_default().push(i);
    }
    let edges = merged
        .into_iter()
        .map(|((input_switch, output_switch), inputs)| PermEdge {
            input_switch,
            output_switch,
            inputs,
        })
        .collect();
    Ok(PermutationGraph {
        n,
        edges,
        map: p.as_slice().to_vec(),
        inverse: p.inverse().into_vec(),
    })
}

impl PermutationGraph {
    pub fn out_degree(&self, input_switch: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.input_switch == input_switch)
            .count()
    }

    /// Inputs met walking the cycle through `start`: first `start` itself
    /// (input to output side), then the other input entering that output
    /// switch (output back to input side), then its companion, and so on.
    /// Consecutive inputs share a switch.
    pub fn cycle_from(&self, start: usize) -> Vec<usize> {
        let mut walk = vec![start];
        let mut q = start;
        let mut forward = true;
        loop {
            q = if forward {
                self.inverse[self.map[q] ^ 1]
            } else {
                q ^ 1
            };
            forward = !forward;
            if q == start && forward {
                break;
            }
            walk.push(q);
        }
        walk
    }

    /// Connected components as switch sequences in walk order, alternating
    /// input and output switches. A component listed once per cycle.
    pub fn components(&self) -> Vec<Vec<SwitchNode>> {
        let mut seen = vec![false; self.n / 2];
        let mut out = Vec::new();
        for s in 0..self.n / 2 {
            if seen[s] {
                continue;
            }
            let walk = self.cycle_from(2 * s);
            let mut nodes = Vec::with_capacity(walk.len());
            for (t, &q) in walk.iter().enumerate() {
                if t % 2 == 0 {
                    seen[q / 2] = true;
                    nodes.push(SwitchNode::Input(q / 2));
                    nodes.push(SwitchNode::Output(self.map[q] / 2));
                }
            }
            out.push(nodes);
        }
        out
    }

    /// Every component alternates sides and uses each switch once.
    pub fn is_alternating(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.components().iter().all(|c| {
            c.chunks(2)
                .all(|w| matches!(w, [SwitchNode::Input(_), SwitchNode::Output(_)]))
                && c.iter().all(|node| seen.insert(*node))
        }) && seen.len() == self.n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Cross,
    Straight,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompatEdge {
    /// Inputs identifying the two vertices, smaller first.
    pub ends: (usize, usize),
    pub kind: EdgeKind,
    /// Bands whose switches carry the path; sorted.
    pub labels: Vec<u8>,
}

/// Compatibility graph of a two-band permutation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompatibilityGraph {
    pub n: usize,
    /// `(a, π(a))` for inputs of band 0 bound for band 1.
    pub v1: Vec<(usize, usize)>,
    /// `(b, π(b))` for inputs of band 1 bound for band 0.
    pub v2: Vec<(usize, usize)>,
    pub edges: Vec<CompatEdge>,
}

fn two_bands(p: &Permutation, k: usize) -> Result<()> {
    let n = p.len();
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::InvalidSize { n, min: 4 });
    }
    if k != n / 2 {
        return Err(Error::OutOfDomain(format!(
            "compatibility graphs need exactly two bands (k = {}), got k = {k}",
            n / 2
        )));
    }
    Ok(())
}

/// Build the graph whose cross edges join oppositely migrating inputs that
/// an odd path inside one band links, and whose straight edges join inputs
/// of the same band that an even path inside one band links.
pub fn build_compatibility_graph(p: &Permutation, k: usize) -> Result<CompatibilityGraph> {
    two_bands(p, k)?;
    Ok(compatibility_graph(p.as_slice()))
}

fn compatibility_graph(map: &[usize]) -> CompatibilityGraph {
    let n = map.len();
    let half = n / 2;
    let mut inverse = vec![0; n];
    for (i, &t) in map.iter().enumerate() {
        inverse[t] = i;
    }
    let band = |x: usize| x / half;
    let migrating = |i: usize| band(i) != band(map[i]);

    let mut merged: BTreeMap<((usize, usize), EdgeKind), Vec<u8>> = BTreeMap::new();
    for label in 0..2 {
        let lo = label * half;
        // An end is a migrating input seen at one switch of this band: at
        // its own input switch, or at the output switch it enters.
        let mut ends: Vec<(usize, bool)> = Vec::new();
        for i in lo..lo + half {
            if migrating(i) {
                ends.push((i, true));
            }
            let arriving = inverse[i];
            if migrating(arriving) {
                ends.push((arriving, false));
            }
        }
        let mut done = BTreeSet::new();
        for &(start, at_input) in &ends {
            if done.contains(&(start, at_input)) {
                continue;
            }
            let (mut q, mut input_side) = (start, at_input);
            let finish = loop {
                // The other input at the current switch.
                let other = if input_side {
                    q ^ 1
                } else {
                    inverse[map[q] ^ 1]
                };
                if migrating(other) {
                    break (other, input_side);
                }
                // `other` is stationary in this band: cross to its other switch.
                q = other;
                input_side = !input_side;
            };
            done.insert((start, at_input));
            done.insert(finish);
            let (a, b) = (start.min(finish.0), start.max(finish.0));
            let kind = if band(a) == band(b) {
                EdgeKind::Straight
            } else {
                EdgeKind::Cross
            };
            merged.entry(((a, b), kind)).or_default().push(label as u8);
        }
    }

    let vertex = |i: usize| (i, map[i]);
    CompatibilityGraph {
        n,
        v1: (0..half).filter(|&i| migrating(i)).map(vertex).collect(),
        v2: (half..n).filter(|&i| migrating(i)).map(vertex).collect(),
        edges: merged
            .into_iter()
            .map(|((ends, kind), labels)| CompatEdge { ends, kind, labels })
            .collect(),
    }
}

impl CompatibilityGraph {
    pub fn edges_labeled(&self, label: u8) -> impl Iterator<Item = &CompatEdge> {
        self.edges.iter().filter(move |e| e.labels.contains(&label))
    }

    /// Straight edges with the given label among band-0 vertices and among
    /// band-1 vertices occur equally often.
    pub fn straight_pairs_balanced(&self, label: u8) -> bool {
        let half = self.n / 2;
        let (mut first, mut second) = (0, 0);
        for e in self
            .edges_labeled(label)
            .filter(|e| e.kind == EdgeKind::Straight)
        {
            if e.ends.0 < half {
                first += 1;
            } else {
                second += 1;
            }
        }
        first == second
    }

    /// Graphviz rendering; cross edges are dashed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph compatibility {\n");
        for &(a, t) in self.v1.iter().chain(&self.v2) {
            let _ = writeln!(out, "  v{a} [label=\"({a},{t})\"];");
        }
        for e in &self.edges {
            let labels: String = e.labels.iter().map(u8::to_string).collect();
            let style = match e.kind {
                EdgeKind::Cross => ", style=dashed",
                EdgeKind::Straight => "",
            };
            let _ = writeln!(
                out,
                "  v{} -- v{} [label=\"{labels}\"{style}];",
                e.ends.0, e.ends.1
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Matching inputs `(a, b)`: `a` migrates down, `b` up, and both leave their
/// matching networks at the same offset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchingAssignment {
    pub pairs: Vec<(usize, usize)>,
    /// Same-subnetwork pairs found at each matching stage; the last stage
    /// gives `pairs`.
    pub stages: Vec<Vec<(usize, usize)>>,
}

/// Pair the migrating inputs of a two-band local permutation that the
/// looping run sends to the same subnetwork. `subnet[i]` is the subnetwork
/// of local input `i`.
fn match_first_stage(map: &[usize], subnet: &[u8]) -> Result<Vec<(usize, usize)>> {
    let graph = compatibility_graph(map);
    let half = map.len() / 2;
    let mut inverse = vec![0; map.len()];
    for (i, &t) in map.iter().enumerate() {
        inverse[t] = i;
    }
    let violation = |what: &str, a: usize, b: usize| {
        Err(Error::TheoremViolation(format!(
            "{what}: local inputs {a} and {b}"
        )))
    };

    let mut pairs = Vec::new();
    let mut down_pairs = Vec::new();
    let mut up_pairs = Vec::new();
    for e in graph.edges_labeled(0) {
        let (a, b) = e.ends;
        match e.kind {
            EdgeKind::Cross => {
                if subnet[a] != subnet[b] {
                    return violation("cross edge splits subnetworks", a, b);
                }
                pairs.push((a, b));
            }
            EdgeKind::Straight => {
                if subnet[a] == subnet[b] {
                    return violation("straight edge shares a subnetwork", a, b);
                }
                if a < half {
                    down_pairs.push((a, b));
                } else {
                    up_pairs.push((a, b));
                }
            }
        }
    }
    for e in graph.edges_labeled(1) {
        let (a, b) = e.ends;
        let same = subnet[a] == subnet[b];
        if (e.kind == EdgeKind::Cross) != same {
            return violation("label-1 edge disagrees with the looping run", a, b);
        }
    }
    if down_pairs.len() != up_pairs.len() {
        return Err(Error::TheoremViolation(format!(
            "{} straight pairs in band 0 against {} in band 1",
            down_pairs.len(),
            up_pairs.len()
        )));
    }

    // Follow the cycle from one up-migrating input of each straight pair.
    // Inputs an even number of steps away share its subnetwork.
    let mut open: Vec<(usize, usize)> = down_pairs;
    let mut deferred = Vec::new();
    for (x1, x2) in up_pairs {
        let mut q = x1;
        let mut forward = true;
        let mut t = 0usize;
        let hit = loop {
            q = if forward { inverse[map[q] ^ 1] } else { q ^ 1 };
            forward = !forward;
            t += 1;
            if q == x2 || (q == x1 && forward) {
                break None;
            }
            if let Some(idx) = open.iter().position(|&(y1, y2)| q == y1 || q == y2) {
                break Some(idx);
            }
        };
        match hit {
            Some(idx) => {
                let (y1, y2) = open.remove(idx);
                let y = if t.is_multiple_of(2) {
                    q
                } else if q == y1 {
                    y2
                } else {
                    y1
                };
                let other = if y == y1 { y2 } else { y1 };
                if subnet[y] != subnet[x1] {
                    return violation("cycle parity disagrees with the looping run", y, x1);
                }
                pairs.push((y, x1));
                pairs.push((other, x2));
            }
            None => deferred.push((x1, x2)),
        }
    }
    // The remaining straight pairs lie on separate cycles, so either
    // assignment within a pair of pairs is possible; follow the looping run.
    for ((x1, x2), (y1, y2)) in deferred.into_iter().zip(open) {
        if subnet[y1] == subnet[x1] {
            pairs.extend([(y1, x1), (y2, x2)]);
        } else {
            pairs.extend([(y2, x1), (y1, x2)]);
        }
    }
    pairs.sort_unstable();
    Ok(pairs)
}

/// Matching inputs of a two-band permutation (`k = n/2`), found stage by
/// stage from compatibility graphs of the subpermutations each matching
/// column leaves to its subnetworks.
pub fn appendix_matching(p: &Permutation, k: usize) -> Result<MatchingAssignment> {
    two_bands(p, k)?;
    let stage = BandEmbedding::new(p.len(), k)?.matching_stage(p)?;
    appendix_matching_with(p, &stage)
}

pub(crate) fn appendix_matching_with(
    p: &Permutation,
    stage: &MatchingStage,
) -> Result<MatchingAssignment> {
    let n = p.len();
    let levels = stage.stages();
    let mut stages = Vec::with_capacity(levels);
    for level in 0..levels {
        let size = n >> level;
        let mask = (1 << level) - 1;
        let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for input in 0..n {
            blocks
                .entry(stage.line_after(level, input) & mask)
                .or_default()
                .push(input);
        }
        let mut found = Vec::new();
        for inputs in blocks.values() {
            let mut global = vec![0; size];
            let mut map = vec![0; size];
            let mut subnet = vec![0u8; size];
            for &input in inputs {
                let local = stage.line_after(level, input) >> level;
                global[local] = input;
                map[local] = p.apply(input) >> level;
                subnet[local] = ((stage.line_after(level + 1, input) >> level) & 1) as u8;
            }
            for (a, b) in match_first_stage(&map, &subnet)? {
                found.push((global[a], global[b]));
            }
        }
        found.sort_unstable();
        stages.push(found);
    }
    let pairs = stages.last().cloned().unwrap_or_default();
    Ok(MatchingAssignment { pairs, stages })
}

/// Migrating-input counts per band at one matching stage, split by the
/// output link (upper or lower) each input leaves its switch on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageCounts {
    pub stage: usize,
    pub up_top: Vec<usize>,
    pub up_bottom: Vec<usize>,
    pub down_top: Vec<usize>,
    pub down_bottom: Vec<usize>,
}

impl StageCounts {
    pub fn balanced(&self) -> bool {
        let bands = self.up_top.len();
        (1..bands).all(|i| {
            self.up_top[i] == self.down_top[i - 1] && self.up_bottom[i] == self.down_bottom[i - 1]
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lemma2Report {
    pub n: usize,
    pub k: usize,
    pub holds: bool,
    pub stages: Vec<StageCounts>,
}

/// Route the matching stage with the truncated looping run and count, per
/// band and stage, migrating inputs leaving on upper and lower links.
pub fn check_lemma2(p: &Permutation, k: usize) -> Result<Lemma2Report> {
    let n = p.len();
    if k != n / 2 && k > n / 4 {
        return Err(Error::UnsupportedBandWidth { n, k });
    }
    let stage = BandEmbedding::new(n, k)?.matching_stage(p)?;
    Ok(link_counts(p, &stage))
}

pub(crate) fn link_counts(p: &Permutation, stage: &MatchingStage) -> Lemma2Report {
    let n = p.len();
    let k = stage.k();
    let bands = n / k;
    let stages: Vec<StageCounts> = (0..stage.stages())
        .map(|l| {
            let mut c = StageCounts {
                stage: l,
                up_top: vec![0; bands],
                up_bottom: vec![0; bands],
                down_top: vec![0; bands],
                down_bottom: vec![0; bands],
            };
            for input in 0..n {
                let (from, to) = (input / k, p.apply(input) / k);
                let lower = (stage.line_after(l + 1, input) >> l) & 1 == 1;
                let slot = match (to.cmp(&from), lower) {
                    (std::cmp::Ordering::Less, false) => &mut c.up_top,
                    (std::cmp::Ordering::Less, true) => &mut c.up_bottom,
                    (std::cmp::Ordering::Greater, false) => &mut c.down_top,
                    (std::cmp::Ordering::Greater, true) => &mut c.down_bottom,
                    _ => continue,
                };
                slot[from] += 1;
            }
            c
        })
        .collect();
    Lemma2Report {
        n,
        k,
        holds: stages.iter().all(StageCounts::balanced),
        stages,
    }
}

/// Pairs of matching inputs across one band boundary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryMatching {
    /// Upper band of the boundary.
    pub band: usize,
    pub pairs: Vec<(usize, usize)>,
}

/// First-stage matching for any number of bands by peeling off the top
/// band: match its down-migrating inputs with up-migrating inputs of the
/// next band on the same subnetwork, let each matched up-migrating input
/// take over its partner's destination, drop the band and renumber the
/// remaining lines. Every reduced permutation must stay `k`-bounded.
pub fn inductive_matching(p: &Permutation, k: usize) -> Result<Vec<BoundaryMatching>> {
    let n = p.len();
    if k > n / 2 {
        return Err(Error::InvalidBandWidth { n, k });
    }
    let stage = BandEmbedding::new(n, k)?.matching_stage(p)?;
    if stage.stages() == 0 {
        return Err(Error::OutOfDomain(
            "band width 1 has no matching stage".into(),
        ));
    }
    let subnet = |input: usize| stage.line_after(1, input) & 1;
    let bands = n / k;
    // Current destination of each surviving input, in original numbering.
    let mut target: Vec<usize> = p.as_slice().to_vec();
    let mut out = Vec::with_capacity(bands - 1);
    for band in 0..bands - 1 {
        let offset = band * k;
        let downs: Vec<usize> = (offset..offset + k)
            .filter(|&i| target[i] / k == band + 1)
            .collect();
        let ups: Vec<usize> = (offset + k..offset + 2 * k)
            .filter(|&i| target[i] / k == band)
            .collect();
        let mut pairs = Vec::with_capacity(downs.len());
        let mut free: Vec<Option<usize>> = ups.iter().copied().map(Some).collect();
        for &y in &downs {
            let slot = free
                .iter_mut()
                .find(|x| x.is_some_and(|x| subnet(x) == subnet(y)))
                .ok_or_else(|| {
                    Error::TheoremViolation(format!(
                        "input {y} of band {band} has no partner on its subnetwork"
                    ))
                })?;
            let x = slot.take().expect("checked above");
            pairs.push((y, x));
            target[x] = target[y];
        }
        if free.iter().any(Option::is_some) {
            return Err(Error::TheoremViolation(format!(
                "unmatched up-migrating inputs in band {}",
                band + 1
            )));
        }
        // The reduced permutation on bands band+1.. renumbered from zero.
        let rest: Vec<usize> = (offset + k..n).map(|i| target[i] - (offset + k)).collect();
        let reduced = Permutation::new(rest).map_err(|e| {
            Error::TheoremViolation(format!(
                "reduction after band {band} is not a permutation: {e}"
            ))
        })?;
        if !reduced.is_k_bounded(k) {
            return Err(Error::TheoremViolation(format!(
                "reduction after band {band} is not {k}-bounded"
            )));
        }
        out.push(BoundaryMatching { band, pairs });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example8() -> Permutation {
        "4,5,0,6,1,2,7,3".parse().unwrap()
    }

    #[test]
    fn example_permutation_graph() {
        let g = build_permutation_graph(&example8()).unwrap();
        let first: Vec<_> = g.edges.iter().filter(|e| e.input_switch == 0).collect();
        assert_eq!(first.len(), 1);
        assert_eq!(first[0].output_switch, 2);
        assert_eq!(first[0].inputs, vec![0, 1]);
        assert!(g.is_alternating());
    }

    #[test]
    fn identity_graph_components() {
        let g = build_permutation_graph(&Permutation::identity(4)).unwrap();
        let comps = g.components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], vec![SwitchNode::Input(0), SwitchNode::Output(0)]);
        assert!(g.edges.iter().all(|e| g.out_degree(e.input_switch) == 1));
    }

    #[test]
    fn example_compatibility_edges() {
        let g = build_compatibility_graph(&example8(), 4).unwrap();
        assert_eq!(g.v1, vec![(0, 4), (1, 5), (3, 6)]);
        assert_eq!(g.v2, vec![(4, 1), (5, 2), (7, 3)]);
        let find = |a, b| g.edges.iter().find(|e| e.ends == (a, b)).unwrap();
        let e = find(3, 4);
        assert_eq!((e.kind, e.labels.clone()), (EdgeKind::Cross, vec![0]));
        let e = find(0, 1);
        assert_eq!((e.kind, e.labels.clone()), (EdgeKind::Straight, vec![0, 1]));
        assert!(g.straight_pairs_balanced(0) && g.straight_pairs_balanced(1));
        assert!(g.to_dot().contains("style=dashed"));
    }

    #[test]
    fn identity_has_no_vertices() {
        let g = build_compatibility_graph(&Permutation::identity(8), 4).unwrap();
        assert!(g.v1.is_empty() && g.v2.is_empty() && g.edges.is_empty());
        assert!(appendix_matching(&Permutation::identity(8), 4)
            .unwrap()
            .pairs
            .is_empty());
    }

    #[test]
    fn more_than_two_bands_rejected() {
        assert!(build_compatibility_graph(&Permutation::identity(8), 2).is_err());
    }

    #[test]
    fn example_matching_is_perfect() {
        let m = appendix_matching(&example8(), 4).unwrap();
        let downs: BTreeSet<_> = m.pairs.iter().map(|p| p.0).collect();
        let ups: BTreeSet<_> = m.pairs.iter().map(|p| p.1).collect();
        assert_eq!(downs, [0, 1, 3].into());
        assert_eq!(ups, [4, 5, 7].into());
    }

    #[test]
    fn link_counts_zero_on_identity() {
        let r = check_lemma2(&Permutation::identity(16), 4).unwrap();
        assert!(r.holds);
        assert!(r
            .stages
            .iter()
            .all(|s| s.up_top.iter().chain(&s.down_bottom).all(|&c| c == 0)));
    }

    #[test]
    fn pi1_splits_evenly_across_links() {
        let p = crate::verify::gen_pi1(16, 2).unwrap();
        let r = check_lemma2(&p, 2).unwrap();
        assert!(r.holds);
        let s = &r.stages[0];
        for band in (0..8).step_by(2) {
            assert_eq!((s.down_top[band], s.down_bottom[band]), (1, 1));
            assert_eq!((s.up_top[band + 1], s.up_bottom[band + 1]), (1, 1));
        }
    }

    #[test]
    fn inductive_matching_four_bands() {
        let p = crate::verify::gen_pi2(16, 4).unwrap();
        let m = inductive_matching(&p, 4).unwrap();
        assert_eq!(m.len(), 3);
        assert!(m[0].pairs.is_empty());
        assert_eq!(m[1].pairs.len(), 4);
    }
}
