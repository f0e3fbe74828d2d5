//! Network construction.
//!
//! Every network is a list of [`Column`]s over `n` lines. Line numbers are
//! preserved between columns; a column pairs lines into switches, and lines
//! left unpaired (only in odd band-exchange columns) pass straight through.

mod dot;
mod json;
pub(crate) mod relabel;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log2;

pub use dot::export_dot;
pub use relabel::{
    check_property1, find_bit_relabeling, find_network_relabeling, BitRelabeling, Property1Report,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkKind {
    Butterfly,
    InverseButterfly,
    Benes,
    BandExchange,
    KBenes,
    KrBenes,
}

impl NetworkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkKind::Butterfly => "butterfly",
            NetworkKind::InverseButterfly => "inverse-butterfly",
            NetworkKind::Benes => "benes",
            NetworkKind::BandExchange => "band-exchange",
            NetworkKind::KBenes => "k-benes",
            NetworkKind::KrBenes => "kr-benes",
        }
    }

    /// Whether the kind is parameterised by a band width.
    pub fn takes_band_width(self) -> bool {
        matches!(self, NetworkKind::BandExchange | NetworkKind::KBenes)
    }
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NetworkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "butterfly" => NetworkKind::Butterfly,
            "inverse-butterfly" => NetworkKind::InverseButterfly,
            "benes" => NetworkKind::Benes,
            "band-exchange" => NetworkKind::BandExchange,
            "k-benes" => NetworkKind::KBenes,
            "kr-benes" => NetworkKind::KrBenes,
            other => {
                return Err(Error::MalformedNetwork(format!(
                    "unknown network kind {other:?}"
                )))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnRole {
    Matching,
    BandExchangeEven,
    BandExchangeOdd,
    Routing,
    BenesCore,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    In,
    Out,
}

/// A port of the network: one line entering or leaving one column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortRef {
    pub column: usize,
    pub line: usize,
    pub side: Side,
}

impl PortRef {
    pub fn input(column: usize, line: usize) -> Self {
        Self {
            column,
            line,
            side: Side::In,
        }
    }

    pub fn output(column: usize, line: usize) -> Self {
        Self {
            column,
            line,
            side: Side::Out,
        }
    }
}

/// Switch identity: the column and the lowest line it carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SwitchId {
    pub column: usize,
    pub position: usize,
}

/// A 2x2 switching element. Its in-ports and out-ports are the same two lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Switch {
    column: usize,
    lines: [usize; 2],
}

impl Switch {
    pub fn id(&self) -> SwitchId {
        SwitchId {
            column: self.column,
            position: self.lines[0],
        }
    }

    pub fn lines(&self) -> [usize; 2] {
        self.lines
    }

    pub fn in_ports(&self) -> [PortRef; 2] {
        self.lines.map(|l| PortRef::input(self.column, l))
    }

    pub fn out_ports(&self) -> [PortRef; 2] {
        self.lines.map(|l| PortRef::output(self.column, l))
    }

    /// The line leaving this switch for a packet entering on `line`.
    pub fn exit_line(&self, line: usize, cross: bool) -> usize {
        if !cross {
            line
        } else if line == self.lines[0] {
            self.lines[1]
        } else {
            self.lines[0]
        }
    }
}

#[derive(Clone, Debug)]
pub struct Column {
    index: usize,
    role: ColumnRole,
    switches: Vec<Switch>,
    slot: Vec<Option<u32>>,
}

impl PartialEq for Column {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index && self.role == other.role && self.switches == other.switches
    }
}

impl Eq for Column {}

impl Column {
    pub(crate) fn from_pairs(
        index: usize,
        role: ColumnRole,
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut switches: Vec<Switch> = Vec::new();
        let mut seen = vec![false; n];
        for (a, b) in pairs {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if hi >= n || lo == hi {
                return Err(Error::MalformedNetwork(format!(
                    "column {index}: bad switch ({a},{b}) for n={n}"
                )));
            }
            for l in [lo, hi] {
                if std::mem::replace(&mut seen[l], true) {
                    return Err(Error::MalformedNetwork(format!(
                        "column {index}: line {l} appears in two switches"
                    )));
                }
            }
            switches.push(Switch {
                column: index,
                lines: [lo, hi],
            });
        }
        switches.sort_by_key(|s| s.lines[0]);
        let mut slot = vec![None; n];
        for (i, s) in switches.iter().enumerate() {
            slot[s.lines[0]] = Some(i as u32);
            slot[s.lines[1]] = Some(i as u32);
        }
        Ok(Self {
            index,
            role,
            switches,
            slot,
        })
    }

    /// Column pairing every line with the line that differs in `bit`.
    pub(crate) fn dimension(index: usize, role: ColumnRole, n: usize, bit: usize) -> Self {
        let d = 1 << bit;
        let pairs = (0..n).filter(|x| x & d == 0).map(|x| (x, x | d));
        Self::from_pairs(index, role, n, pairs).expect("dimension column is a perfect matching")
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn role(&self) -> ColumnRole {
        self.role
    }

    pub fn switches(&self) -> &[Switch] {
        &self.switches
    }

    pub fn lines(&self) -> usize {
        self.slot.len()
    }

    /// Index (within this column) of the switch carrying `line`.
    pub fn switch_of(&self, line: usize) -> Option<usize> {
        self.slot[line].map(|i| i as usize)
    }

    /// Index of the switch whose lowest line is `position`.
    pub fn switch_at(&self, position: usize) -> Option<usize> {
        let i = self.switch_of(position)?;
        (self.switches[i].lines[0] == position).then_some(i)
    }

    pub fn partner(&self, line: usize) -> Option<usize> {
        self.switch_of(line).map(|i| {
            let [a, b] = self.switches[i].lines;
            if a == line {
                b
            } else {
                a
            }
        })
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.switches.iter().map(|s| (s.lines[0], s.lines[1]))
    }

    /// `Some(bit)` when this column pairs every line `x` with `x ^ (1 << bit)`.
    pub fn dimension_bit(&self) -> Option<usize> {
        let first = self.switches.first()?;
        let diff = first.lines[0] ^ first.lines[1];
        if !diff.is_power_of_two() || self.switches.len() * 2 != self.lines() {
            return None;
        }
        self.switches
            .iter()
            .all(|s| s.lines[0] ^ s.lines[1] == diff)
            .then(|| log2(diff))
    }

    pub(crate) fn reindexed(&self, index: usize) -> Self {
        let mut c = self.clone();
        c.index = index;
        for s in &mut c.switches {
            s.column = index;
        }
        c
    }

    pub(crate) fn with_role(&self, role: ColumnRole) -> Self {
        let mut c = self.clone();
        c.role = role;
        c
    }

    pub(crate) fn relabeled(&self, index: usize, f: impl Fn(usize) -> usize) -> Self {
        let n = self.lines();
        Self::from_pairs(index, self.role, n, self.pairs().map(|(a, b)| (f(a), f(b))))
            .expect("relabeling a valid column under a bijection")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BypassKind {
    /// From the output of a band-exchange network to the routing stages.
    BandExit,
    /// Around a band-exchange network, from one Benes stage to the next.
    StageSkip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BypassEdge {
    pub from: PortRef,
    pub kind: BypassKind,
    pub to: PortRef,
}

/// Where the pieces of a KR-Benes sit among its columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KrLayout {
    /// Column index of each Benes stage; `stages[s - 1]` is stage `s`.
    pub stages: Vec<usize>,
    /// `(band width, even column, odd column)` for each inserted BE network.
    pub band_exchanges: Vec<(usize, usize, usize)>,
}

impl KrLayout {
    pub fn new(n: usize) -> Self {
        let m = log2(n);
        let inserted = m.saturating_sub(2);
        let stages = (1..=2 * m - 1)
            .map(|s| (s - 1) + 2 * (s - 1).min(inserted))
            .collect();
        let band_exchanges = (1..=inserted)
            .map(|i| (1 << i, 3 * i - 2, 3 * i - 1))
            .collect();
        Self {
            stages,
            band_exchanges,
        }
    }

    pub fn band_exchange(&self, k: usize) -> Option<(usize, usize)> {
        self.band_exchanges
            .iter()
            .find(|(w, _, _)| *w == k)
            .map(|&(_, e, o)| (e, o))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    kind: NetworkKind,
    n: usize,
    k: Option<usize>,
    columns: Vec<Column>,
    bypass_edges: Vec<BypassEdge>,
}

impl Network {
    pub(crate) fn from_columns(
        kind: NetworkKind,
        n: usize,
        k: Option<usize>,
        columns: Vec<Column>,
        bypass_edges: Vec<BypassEdge>,
    ) -> Self {
        let columns = columns
            .into_iter()
            .enumerate()
            .map(|(i, c)| if c.index == i { c } else { c.reindexed(i) })
            .collect();
        Self {
            kind,
            n,
            k,
            columns,
            bypass_edges,
        }
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> &Column {
        &self.columns[index]
    }

    pub fn bypass_edges(&self) -> &[BypassEdge] {
        &self.bypass_edges
    }

    pub fn switch_count(&self) -> usize {
        self.columns.iter().map(|c| c.switches.len()).sum()
    }

    pub fn switches(&self) -> impl Iterator<Item = &Switch> {
        self.columns.iter().flat_map(|c| c.switches.iter())
    }

    /// Stable identifier used by route plans to reference their network.
    pub fn id(&self) -> String {
        match self.k {
            Some(k) => format!("{}:{}:{}", self.kind, self.n, k),
            None => format!("{}:{}", self.kind, self.n),
        }
    }

    pub fn kr_layout(&self) -> Option<KrLayout> {
        (self.kind == NetworkKind::KrBenes).then(|| KrLayout::new(self.n))
    }

    /// A new network made of the given columns of this one, in order.
    pub fn select_columns(&self, kind: NetworkKind, k: Option<usize>, indices: &[usize]) -> Self {
        let columns = indices.iter().map(|&i| self.columns[i].clone()).collect();
        Self::from_columns(kind, self.n, k, columns, Vec::new())
    }

    /// Rebuild the canonical network for `(kind, n, k)`.
    pub fn build(kind: NetworkKind, n: usize, k: Option<usize>) -> Result<Self> {
        let need_k = || k.ok_or(Error::InvalidBandWidth { n, k: 0 });
        match kind {
            NetworkKind::Butterfly => build_butterfly(n),
            NetworkKind::InverseButterfly => build_inverse_butterfly(n),
            NetworkKind::Benes => build_benes(n),
            NetworkKind::BandExchange => build_band_exchange(n, need_k()?),
            NetworkKind::KBenes => build_k_benes(n, need_k()?),
            NetworkKind::KrBenes => build_kr_benes(n),
        }
    }
}

pub(crate) fn check_size(n: usize, min: usize) -> Result<usize> {
    if n < min || !n.is_power_of_two() {
        return Err(Error::InvalidSize { n, min });
    }
    Ok(log2(n))
}

fn check_band_width(n: usize, k: usize, max: usize) -> Result<usize> {
    if k == 0 || !k.is_power_of_two() || k > max {
        return Err(Error::InvalidBandWidth { n, k });
    }
    Ok(log2(k))
}

/// `log n` columns; column `c` pairs lines differing in bit `log n - 1 - c`.
pub fn build_butterfly(n: usize) -> Result<Network> {
    let m = check_size(n, 2)?;
    let columns = (0..m)
        .map(|c| Column::dimension(c, ColumnRole::Routing, n, m - 1 - c))
        .collect();
    Ok(Network::from_columns(
        NetworkKind::Butterfly,
        n,
        None,
        columns,
        Vec::new(),
    ))
}

/// Mirror image of the butterfly: column `c` pairs lines differing in bit `c`.
pub fn build_inverse_butterfly(n: usize) -> Result<Network> {
    let m = check_size(n, 2)?;
    let columns = (0..m)
        .map(|c| Column::dimension(c, ColumnRole::Matching, n, c))
        .collect();
    Ok(Network::from_columns(
        NetworkKind::InverseButterfly,
        n,
        None,
        columns,
        Vec::new(),
    ))
}

/// Butterfly then inverse butterfly sharing the middle column:
/// column `t` pairs lines differing in bit `|log n - 1 - t|`.
pub fn build_benes(n: usize) -> Result<Network> {
    let m = check_size(n, 2)?;
    let columns = (0..2 * m - 1)
        .map(|t| Column::dimension(t, ColumnRole::BenesCore, n, (m - 1).abs_diff(t)))
        .collect();
    Ok(Network::from_columns(
        NetworkKind::Benes,
        n,
        None,
        columns,
        Vec::new(),
    ))
}

fn band_exchange_columns(n: usize, k: usize, first_index: usize) -> [Column; 2] {
    let bands = n / k;
    let pairs = |parity: usize| {
        (parity..bands.saturating_sub(1))
            .step_by(2)
            .flat_map(move |band| (0..k).map(move |j| (band * k + j, (band + 1) * k + j)))
    };
    let even = Column::from_pairs(first_index, ColumnRole::BandExchangeEven, n, pairs(0))
        .expect("even band pairs are disjoint");
    let odd = Column::from_pairs(first_index + 1, ColumnRole::BandExchangeOdd, n, pairs(1))
        .expect("odd band pairs are disjoint");
    [even, odd]
}

/// `BE(n, k)`: an even column exchanging bands `(2i, 2i+1)` and an odd column
/// exchanging bands `(2i+1, 2i+2)`, both at equal offsets within the bands.
/// Lines of the first and last band pass the odd column unswitched.
pub fn build_band_exchange(n: usize, k: usize) -> Result<Network> {
    check_size(n, 2)?;
    check_band_width(n, k, n / 2)?;
    let columns = band_exchange_columns(n, k, 0).to_vec();
    Ok(Network::from_columns(
        NetworkKind::BandExchange,
        n,
        Some(k),
        columns,
        Vec::new(),
    ))
}

/// Matching stage, even band-exchange column and routing stage of a K-Benes,
/// i.e. everything except the odd band-exchange column. Valid for `k <= n/2`.
pub(crate) fn k_benes_core_columns(n: usize, k: usize) -> Vec<Column> {
    let kappa = log2(k);
    let mut columns: Vec<Column> = (0..kappa)
        .map(|c| Column::dimension(c, ColumnRole::Matching, n, c))
        .collect();
    let [even, _] = band_exchange_columns(n, k, kappa);
    columns.push(even);
    columns.extend(
        (0..kappa).map(|c| Column::dimension(kappa + 1 + c, ColumnRole::Routing, n, kappa - 1 - c)),
    );
    columns
}

/// `n/k` stacked `k x k` inverse butterflies, `BE(n, k)`, then `n/k` stacked
/// `k x k` butterflies: `2 log k + 2` columns. Bands are contiguous line blocks.
pub fn build_k_benes(n: usize, k: usize) -> Result<Network> {
    let m = check_size(n, 4)?;
    if k > n / 4 && k.is_power_of_two() && k <= n {
        return Err(Error::UnsupportedBandWidth { n, k });
    }
    let kappa = check_band_width(n, k, n / 4)?;
    debug_assert!(kappa <= m - 2);
    let mut columns = k_benes_core_columns(n, k);
    let [_, odd] = band_exchange_columns(n, k, kappa + 1);
    columns.insert(kappa + 1, odd);
    Ok(Network::from_columns(
        NetworkKind::KBenes,
        n,
        Some(k),
        columns,
        Vec::new(),
    ))
}

/// Benes frontplane with `BE(n, 2^i)` inserted after stage `i` for
/// `1 <= i <= log n - 2`, plus bypass edges: band-exit edges from each
/// `BE(n, 2^i)` output to stage `2 log n - i`, and stage-skip edges around
/// every inserted `BE`. `4 log n - 5` columns.
///
/// The frontplane is laid out in band coordinates (the relabeling that
/// embeds the widest K-Benes into the canonical Benes), so every inserted
/// `BE(n, 2^i)` and every K-Benes subgraph uses contiguous bands. For
/// `n = 4` nothing is inserted and the network is the canonical Benes.
pub fn build_kr_benes(n: usize) -> Result<Network> {
    let m = check_size(n, 4)?;
    let benes = build_benes(n)?;
    let frontplane: Vec<Column> = if n >= 8 {
        let sigma = relabel::band_relabeling(n, n / 4)
            .ok_or_else(|| Error::MalformedNetwork(format!("no band relabeling for n={n}")))?;
        benes
            .columns()
            .iter()
            .map(|c| c.relabeled(c.index(), |x| sigma.inverse(x)))
            .collect()
    } else {
        benes.columns().to_vec()
    };

    let layout = KrLayout::new(n);
    let mut columns = Vec::with_capacity(4 * m - 5);
    for (s, stage) in frontplane.into_iter().enumerate() {
        columns.push(stage);
        let stage_no = s + 1;
        if stage_no <= m.saturating_sub(2) {
            let k = 1 << stage_no;
            columns.extend(band_exchange_columns(n, k, 0));
        }
    }

    let mut bypass_edges = Vec::new();
    for (i, &(_, _, odd)) in layout.band_exchanges.iter().enumerate() {
        let stage_no = i + 1;
        let exit_to = layout.stages[2 * m - stage_no - 1];
        let from_stage = layout.stages[stage_no - 1];
        let next_stage = layout.stages[stage_no];
        for line in 0..n {
            bypass_edges.push(BypassEdge {
                from: PortRef::output(odd, line),
                kind: BypassKind::BandExit,
                to: PortRef::input(exit_to, line),
            });
            bypass_edges.push(BypassEdge {
                from: PortRef::output(from_stage, line),
                kind: BypassKind::StageSkip,
                to: PortRef::input(next_stage, line),
            });
        }
    }
    bypass_edges.sort();
    Ok(Network::from_columns(
        NetworkKind::KrBenes,
        n,
        None,
        columns,
        bypass_edges,
    ))
}
