//! KR-Benes control: pick the narrowest band width covering the
//! permutation, route through the K-Benes embedded at that width and bypass
//! every other band-exchange network. Permutations too wide for any
//! embedded K-Benes go through the Benes frontplane.

use serde::Serialize;

use super::kbenes::{BandEmbedding, KBenesRouter};
use super::looping::run_looping;
use super::{
    count_set, empty_table, ensure_kind, ensure_size, settings_from_table, BypassChoice,
    ControlCost, RoutePlan, SwitchSetting, SwitchState,
};
use crate::error::{Error, Result};
use crate::log2;
use crate::topology::{
    build_benes, find_bit_relabeling, BitRelabeling, Column, ColumnRole, KrLayout, Network,
    NetworkKind,
};
use crate::Permutation;

/// The columns of a KR-Benes that form its embedded K-Benes for one `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KSubgraph {
    pub n: usize,
    pub k: usize,
    /// KR-Benes column indices in traversal order.
    pub columns: Vec<usize>,
    /// Even and odd column of the band-exchange network in use.
    pub band_exchange: (usize, usize),
    /// Band widths of the band-exchange networks skipped on the way.
    pub bypassed: Vec<usize>,
}

impl KSubgraph {
    /// The selected columns as a stand-alone K-Benes.
    pub fn to_network(&self, net: &Network) -> Network {
        let kappa = log2(self.k);
        let columns: Vec<Column> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let col = net.column(c);
                match i {
                    i if i < kappa => col.with_role(ColumnRole::Matching),
                    i if i < kappa + 2 => col.clone(),
                    _ => col.with_role(ColumnRole::Routing),
                }
            })
            .collect();
        Network::from_columns(
            NetworkKind::KBenes,
            self.n,
            Some(self.k),
            columns,
            Vec::new(),
        )
    }

    /// Bypass flags with only this subgraph's band-exchange network in use.
    pub fn bypass_choices(&self, layout: &KrLayout) -> Vec<BypassChoice> {
        layout
            .band_exchanges
            .iter()
            .map(|&(w, _, _)| BypassChoice {
                band_width: w,
                used: w == self.k,
            })
            .collect()
    }
}

/// First `log k` Benes stages, `BE(n, k)`, then the last `log k` stages
/// reached through the band-exit bypass. Needs `2 <= k <= n/4`.
pub fn select_k_subgraph(net: &Network, k: usize) -> Result<KSubgraph> {
    ensure_kind(net, NetworkKind::KrBenes)?;
    let n = net.n();
    if k == 0 || !k.is_power_of_two() || k > n {
        return Err(Error::InvalidBandWidth { n, k });
    }
    let layout = net.kr_layout().expect("kr-benes has a layout");
    let band_exchange = layout
        .band_exchange(k)
        .ok_or(Error::UnsupportedBandWidth { n, k })?;
    let kappa = log2(k);
    let stages = layout.stages.len();
    let mut columns: Vec<usize> = layout.stages[..kappa].to_vec();
    columns.extend([band_exchange.0, band_exchange.1]);
    columns.extend(&layout.stages[stages - kappa..]);
    Ok(KSubgraph {
        n,
        k,
        columns,
        band_exchange,
        bypassed: (1..kappa).map(|i| 1 << i).collect(),
    })
}

struct Embedded {
    sub: KSubgraph,
    view: Network,
    embedding: BandEmbedding,
}

/// Routes permutations on one KR-Benes network.
pub struct KrBenesRouter<'a> {
    net: &'a Network,
    layout: KrLayout,
    /// Frontplane line -> canonical Benes line.
    frontplane: BitRelabeling,
    embedded: Vec<Embedded>,
}

impl<'a> KrBenesRouter<'a> {
    pub fn new(net: &'a Network) -> Result<Self> {
        ensure_kind(net, NetworkKind::KrBenes)?;
        let n = net.n();
        let layout = net.kr_layout().expect("kr-benes has a layout");
        let front: Vec<Column> = layout
            .stages
            .iter()
            .map(|&c| net.column(c).clone())
            .collect();
        let frontplane = find_bit_relabeling(&front, build_benes(n)?.columns())
            .ok_or_else(|| Error::MalformedNetwork("frontplane is not a relabeled Benes".into()))?;
        let embedded = layout
            .band_exchanges
            .iter()
            .map(|&(k, _, _)| {
                let sub = select_k_subgraph(net, k)?;
                let view = sub.to_network(net);
                Ok(Embedded {
                    sub,
                    view,
                    embedding: BandEmbedding::new(n, k)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            net,
            layout,
            frontplane,
            embedded,
        })
    }

    pub fn route(&self, p: &Permutation) -> Result<RoutePlan> {
        let net = self.net;
        ensure_size(net, p)?;
        let n = net.n();
        let k_used = p.max_displacement().max(1).next_power_of_two();
        let mut table = empty_table(net);
        let mut set = |column: usize, position: usize, state: SwitchState| {
            let i = net
                .column(column)
                .switch_at(position)
                .expect("selected switch exists");
            table[column][i] = state;
        };

        let width = k_used.max(2);
        let (visits, in_use) = match self.embedded.iter().find(|e| e.sub.k == width) {
            Some(e) => {
                let router = KBenesRouter::with_embedding(&e.view, e.embedding.clone());
                let plan = router.route(p)?;
                for SwitchSetting(c, pos, state) in plan.settings {
                    set(e.sub.columns[c], pos, state);
                }
                (plan.cost.terminal_visits, Some(width))
            }
            None => {
                let sigma = &self.frontplane;
                let m = log2(n);
                let run = run_looping(p.relabel(|x| sigma.forward(x)).as_slice(), m);
                for d in &run.decisions {
                    let bit = (m - 1).abs_diff(d.column);
                    let a = sigma.inverse(d.position);
                    let b = sigma.inverse(d.position ^ (1 << bit));
                    set(
                        self.layout.stages[d.column],
                        a.min(b),
                        SwitchState::from_cross(d.cross),
                    );
                }
                (run.visits, None)
            }
        };

        let bypass = self
            .layout
            .band_exchanges
            .iter()
            .map(|&(w, _, _)| BypassChoice {
                band_width: w,
                used: Some(w) == in_use,
            })
            .collect();
        Ok(RoutePlan {
            network: net.id(),
            permutation: p.clone(),
            k_used: Some(k_used),
            settings: settings_from_table(net, &table),
            bypass,
            cost: ControlCost {
                terminal_visits: visits,
                overhead: n,
                switches_set: count_set(&table),
            },
        })
    }
}

/// Route any permutation through the KR-Benes `net`.
pub fn kr_benes_route(net: &Network, p: &Permutation) -> Result<RoutePlan> {
    KrBenesRouter::new(net)?.route(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::trace_path;
    use crate::topology::{build_k_benes, build_kr_benes};

    fn delivered(net: &Network, plan: &RoutePlan) -> Vec<usize> {
        (0..net.n())
            .map(|i| trace_path(net, plan, i).unwrap().last().unwrap().line)
            .collect()
    }

    #[test]
    fn subgraph_selection() {
        let kr = build_kr_benes(8).unwrap();
        let sub = select_k_subgraph(&kr, 2).unwrap();
        assert_eq!(sub.columns, vec![0, 1, 2, 6]);
        assert_eq!(sub.to_network(&kr), build_k_benes(8, 2).unwrap());

        let kr = build_kr_benes(16).unwrap();
        let sub = select_k_subgraph(&kr, 4).unwrap();
        assert_eq!(sub.bypassed, vec![2]);
        assert_eq!(sub.columns, vec![0, 3, 4, 5, 9, 10]);
        assert_eq!(sub.to_network(&kr), build_k_benes(16, 4).unwrap());
        assert_eq!(
            select_k_subgraph(&kr, 2).unwrap().to_network(&kr),
            build_k_benes(16, 2).unwrap()
        );
    }

    #[test]
    fn subgraph_rejects_bad_widths() {
        let kr = build_kr_benes(16).unwrap();
        assert!(matches!(
            select_k_subgraph(&kr, 8),
            Err(Error::UnsupportedBandWidth { .. })
        ));
        assert!(matches!(
            select_k_subgraph(&kr, 1),
            Err(Error::UnsupportedBandWidth { .. })
        ));
        assert!(matches!(
            select_k_subgraph(&kr, 3),
            Err(Error::InvalidBandWidth { .. })
        ));
    }

    #[test]
    fn narrow_permutation_uses_narrow_band_exchange() {
        let kr = build_kr_benes(16).unwrap();
        let p: Permutation = "2,3,0,1,4,5,6,7,9,8,10,11,12,13,15,14".parse().unwrap();
        let plan = kr_benes_route(&kr, &p).unwrap();
        assert_eq!(plan.k_used, Some(2));
        assert_eq!(plan.bypass.iter().filter(|b| b.used).count(), 1);
        assert!(plan.bypass[0].used);
        assert_eq!(plan.route_columns(&kr).unwrap().len(), 4);
        assert_eq!(plan.cost.terminal_visits, 2 * 16);
        assert_eq!(delivered(&kr, &plan), p.as_slice());
    }

    #[test]
    fn identity_reports_unit_width() {
        let kr = build_kr_benes(16).unwrap();
        let plan = kr_benes_route(&kr, &Permutation::identity(16)).unwrap();
        assert_eq!(plan.k_used, Some(1));
        assert_eq!(delivered(&kr, &plan), (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn reversal_falls_back_to_benes() {
        let kr = build_kr_benes(16).unwrap();
        let p = Permutation::reversal(16);
        let plan = kr_benes_route(&kr, &p).unwrap();
        assert_eq!(plan.k_used, Some(16));
        assert!(plan.bypass.iter().all(|b| !b.used));
        assert_eq!(plan.cost.terminal_visits, 112);
        assert_eq!(delivered(&kr, &plan), p.as_slice());
    }

    #[test]
    fn four_lines_route_as_benes() {
        let kr = build_kr_benes(4).unwrap();
        let p: Permutation = "1,0,3,2".parse().unwrap();
        let plan = kr_benes_route(&kr, &p).unwrap();
        assert!(plan.bypass.is_empty());
        assert_eq!(delivered(&kr, &plan), p.as_slice());
    }
}
