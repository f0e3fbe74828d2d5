//! Route plans and the three control algorithms: looping (Benes),
//! band routing (K-Benes) and bypass selection (KR-Benes).

mod kbenes;
mod krbenes;
mod looping;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log2;
use crate::topology::{Network, NetworkKind, PortRef};
use crate::Permutation;

pub use kbenes::{
    decompose_bands, k_benes_route, BandDecomposition, BandEmbedding, KBenesRouter, MatchingStage,
};
pub use krbenes::{kr_benes_route, select_k_subgraph, KSubgraph, KrBenesRouter};
pub use looping::{looping_route, looping_route_truncated, TruncatedLooping};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchState {
    Straight,
    Cross,
    Unused,
}

impl SwitchState {
    pub fn from_cross(cross: bool) -> Self {
        if cross {
            SwitchState::Cross
        } else {
            SwitchState::Straight
        }
    }

    /// Straight <-> cross; `Unused` stays unused.
    pub fn flipped(self) -> Self {
        match self {
            SwitchState::Straight => SwitchState::Cross,
            SwitchState::Cross => SwitchState::Straight,
            SwitchState::Unused => SwitchState::Unused,
        }
    }
}

/// `[column, position, state]` where position is the switch's lowest line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SwitchSetting(pub usize, pub usize, pub SwitchState);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ControlCost {
    /// Terminal examinations made by the sequential looping procedure.
    pub terminal_visits: usize,
    /// Self-routing mark checks and bypass selection, one per line.
    pub overhead: usize,
    pub switches_set: usize,
}

/// Whether a KR-Benes band-exchange network carries traffic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BypassChoice {
    pub band_width: usize,
    pub used: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub network: String,
    pub permutation: Permutation,
    pub k_used: Option<usize>,
    pub settings: Vec<SwitchSetting>,
    pub bypass: Vec<BypassChoice>,
    pub cost: ControlCost,
}

/// Per-column switch states, indexed like `Column::switches`.
pub type StateTable = Vec<Vec<SwitchState>>;

pub(crate) fn empty_table(net: &Network) -> StateTable {
    net.columns()
        .iter()
        .map(|c| vec![SwitchState::Unused; c.switches().len()])
        .collect()
}

pub(crate) fn settings_from_table(net: &Network, table: &StateTable) -> Vec<SwitchSetting> {
    net.columns()
        .iter()
        .zip(table)
        .flat_map(|(col, states)| {
            col.switches()
                .iter()
                .zip(states)
                .map(move |(s, &st)| SwitchSetting(col.index(), s.lines()[0], st))
        })
        .collect()
}

pub(crate) fn count_set(table: &StateTable) -> usize {
    table
        .iter()
        .flatten()
        .filter(|s| **s != SwitchState::Unused)
        .count()
}

impl RoutePlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("route plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedPlan(e.to_string()))
    }

    /// Check that the plan refers to `net` and expand its settings into a
    /// state table. Switches the plan does not mention are unused.
    pub fn state_table(&self, net: &Network) -> Result<StateTable> {
        if self.network != net.id() {
            return Err(Error::MalformedPlan(format!(
                "plan is for network {}, not {}",
                self.network,
                net.id()
            )));
        }
        if self.permutation.len() != net.n() {
            return Err(Error::MalformedPlan(format!(
                "plan permutation has {} lines, network has {}",
                self.permutation.len(),
                net.n()
            )));
        }
        let mut table = empty_table(net);
        let mut seen = BTreeSet::new();
        for &SwitchSetting(column, position, state) in &self.settings {
            let idx = (column < net.depth())
                .then(|| net.column(column).switch_at(position))
                .flatten()
                .ok_or_else(|| {
                    Error::MalformedPlan(format!(
                        "no switch at column {column}, position {position}"
                    ))
                })?;
            if !seen.insert((column, position)) {
                return Err(Error::MalformedPlan(format!(
                    "switch ({column}, {position}) set twice"
                )));
            }
            table[column][idx] = state;
        }
        Ok(table)
    }

    /// Columns traversed by every packet, in order, after applying the
    /// plan's bypass choices.
    pub fn route_columns(&self, net: &Network) -> Result<Vec<usize>> {
        let Some(layout) = net.kr_layout() else {
            if !self.bypass.is_empty() {
                return Err(Error::MalformedPlan(format!(
                    "{} has no bypass edges",
                    net.kind()
                )));
            }
            return Ok((0..net.depth()).collect());
        };
        let widths: Vec<_> = layout.band_exchanges.iter().map(|&(w, _, _)| w).collect();
        let given: Vec<_> = self.bypass.iter().map(|b| b.band_width).collect();
        if widths != given {
            return Err(Error::MalformedPlan(format!(
                "bypass choices {given:?} do not match band-exchange networks {widths:?}"
            )));
        }
        if self.bypass.iter().filter(|b| b.used).count() > 1 {
            return Err(Error::MalformedPlan(
                "more than one band-exchange network used".into(),
            ));
        }
        let m = log2(net.n());
        let mut route = Vec::new();
        let mut stage = 1;
        while stage < 2 * m {
            route.push(layout.stages[stage - 1]);
            match self.bypass.get(stage.wrapping_sub(1)) {
                Some(choice) if choice.used => {
                    let (even, odd) = layout.band_exchange(choice.band_width).expect("listed");
                    route.extend([even, odd]);
                    stage = 2 * m - stage;
                }
                _ => stage += 1,
            }
        }
        Ok(route)
    }

    /// Full port path of every input, in input order.
    pub fn paths(&self, net: &Network) -> Result<Vec<Vec<PortRef>>> {
        let table = self.state_table(net)?;
        let route = self.route_columns(net)?;
        (0..net.n())
            .map(|i| trace_with(net, &table, &route, i))
            .collect()
    }
}

fn trace_with(
    net: &Network,
    table: &StateTable,
    route: &[usize],
    input: usize,
) -> Result<Vec<PortRef>> {
    let mut line = input;
    let mut path = Vec::with_capacity(2 * route.len());
    for &c in route {
        path.push(PortRef::input(c, line));
        let col = net.column(c);
        if let Some(i) = col.switch_of(line) {
            let cross = match table[c][i] {
                SwitchState::Straight => false,
                SwitchState::Cross => true,
                SwitchState::Unused => {
                    return Err(Error::CorruptPlan(format!(
                        "input {input} reaches unused switch ({c}, {})",
                        col.switches()[i].lines()[0]
                    )))
                }
            };
            line = col.switches()[i].exit_line(line, cross);
        }
        path.push(PortRef::output(c, line));
    }
    Ok(path)
}

/// Replay a plan from input terminal `input` to its output terminal.
pub fn trace_path(net: &Network, plan: &RoutePlan, input: usize) -> Result<Vec<PortRef>> {
    if input >= net.n() {
        return Err(Error::OutOfDomain(format!(
            "input {input} on {} lines",
            net.n()
        )));
    }
    let table = plan.state_table(net)?;
    let route = plan.route_columns(net)?;
    trace_with(net, &table, &route, input)
}

pub(crate) fn ensure_kind(net: &Network, kind: NetworkKind) -> Result<()> {
    if net.kind() != kind {
        return Err(Error::WrongNetworkKind {
            expected: kind.to_string(),
            found: net.kind().to_string(),
        });
    }
    Ok(())
}

pub(crate) fn ensure_size(net: &Network, p: &Permutation) -> Result<()> {
    if net.n() != p.len() {
        return Err(Error::SizeMismatch {
            expected: net.n(),
            found: p.len(),
        });
    }
    Ok(())
}
