//! The looping algorithm on the canonical Benes.
//!
//! At recursion level `L` the lines split into blocks of `s = n >> L`
//! consecutive lines. Column `L` and its mirror `2 log n - 2 - L` pair lines
//! `x` and `x + s/2` inside each block; the columns in between keep the two
//! halves of a block apart, so each half is a Benes on `s/2` lines.

use serde::Serialize;

use super::{
    count_set, empty_table, ensure_kind, ensure_size, settings_from_table, ControlCost, RoutePlan,
    SwitchSetting, SwitchState,
};
use crate::error::{Error, Result};
use crate::log2;
use crate::topology::{Network, NetworkKind};
use crate::Permutation;

/// One switch decision in Benes coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Decision {
    pub column: usize,
    pub position: usize,
    pub cross: bool,
}

pub(crate) struct LoopingRun {
    pub decisions: Vec<Decision>,
    pub visits: usize,
    /// After the last level run: `(first line, local permutation)` per block.
    pub residual: Vec<(usize, Vec<usize>)>,
}

/// Run `levels` recursion levels of the looping algorithm on `perm`
/// (`levels = log n` routes completely).
pub(crate) fn run_looping(perm: &[usize], levels: usize) -> LoopingRun {
    let n = perm.len();
    let m = log2(n);
    debug_assert!(levels <= m);
    let last = 2 * m - 2;
    let mut decisions = Vec::new();
    let mut visits = 0;
    let mut blocks = vec![(0usize, perm.to_vec())];

    for level in 0..levels {
        let mut next = Vec::with_capacity(2 * blocks.len());
        for (base, local) in blocks {
            let s = local.len();
            if s == 2 {
                visits += 2;
                decisions.push(Decision {
                    column: level,
                    position: base,
                    cross: local[0] == 1,
                });
                continue;
            }
            let h = s / 2;
            let mut inv = vec![0; s];
            for (x, &y) in local.iter().enumerate() {
                inv[y] = x;
            }
            // Subnetwork of the packet entering at each local input.
            let mut sub = vec![u8::MAX; s];
            for start in 0..h {
                if sub[start] != u8::MAX {
                    continue;
                }
                let mut x = start;
                loop {
                    sub[x] = 0;
                    sub[x ^ h] = 1;
                    visits += 4;
                    let w = inv[local[x] ^ h];
                    if sub[w] != u8::MAX {
                        break;
                    }
                    x = w ^ h;
                }
            }
            let mut top = vec![0; h];
            let mut bottom = vec![0; h];
            for x in 0..s {
                let y = local[x];
                if sub[x] == 0 {
                    top[x & (h - 1)] = y & (h - 1);
                } else {
                    bottom[x & (h - 1)] = y & (h - 1);
                }
            }
            for x in 0..h {
                decisions.push(Decision {
                    column: level,
                    position: base + x,
                    cross: sub[x] == 1,
                });
                decisions.push(Decision {
                    column: last - level,
                    position: base + x,
                    cross: sub[inv[x]] == 1,
                });
            }
            next.push((base, top));
            next.push((base + h, bottom));
        }
        blocks = next;
    }
    LoopingRun {
        decisions,
        visits,
        residual: blocks,
    }
}

/// Settings for the outer `levels` column pairs of an `n`-line Benes and the
/// subpermutations left for its inner `n >> levels`-line Benes blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncatedLooping {
    pub n: usize,
    pub levels: usize,
    /// Benes-coordinate settings, ordered by column then position.
    pub settings: Vec<SwitchSetting>,
    /// `residuals[b]` acts on lines `b * (n >> levels) ..` of the inner blocks.
    pub residuals: Vec<Permutation>,
    pub terminal_visits: usize,
}

/// Route `p` through the canonical Benes `net` with the looping algorithm.
/// Each loop starts at the lowest unset input switch and sends that input
/// to the upper subnetwork.
pub fn looping_route(net: &Network, p: &Permutation) -> Result<RoutePlan> {
    ensure_kind(net, NetworkKind::Benes)?;
    ensure_size(net, p)?;
    let run = run_looping(p.as_slice(), log2(net.n()));
    let mut table = empty_table(net);
    for d in &run.decisions {
        let i = net
            .column(d.column)
            .switch_at(d.position)
            .expect("benes switch");
        table[d.column][i] = SwitchState::from_cross(d.cross);
    }
    Ok(RoutePlan {
        network: net.id(),
        permutation: p.clone(),
        k_used: None,
        settings: settings_from_table(net, &table),
        bypass: Vec::new(),
        cost: ControlCost {
            terminal_visits: run.visits,
            overhead: 0,
            switches_set: count_set(&table),
        },
    })
}

/// The first `levels` recursion levels of [`looping_route`] on its own.
pub fn looping_route_truncated(p: &Permutation, levels: usize) -> Result<TruncatedLooping> {
    let n = p.len();
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::InvalidSize { n, min: 4 });
    }
    let m = log2(n);
    if levels == 0 || levels >= m {
        return Err(Error::OutOfDomain(format!(
            "levels must lie in 1..={} for n={n}, got {levels}",
            m - 1
        )));
    }
    let run = run_looping(p.as_slice(), levels);
    let mut settings: Vec<_> = run
        .decisions
        .iter()
        .map(|d| SwitchSetting(d.column, d.position, SwitchState::from_cross(d.cross)))
        .collect();
    settings.sort_by_key(|s| (s.0, s.1));
    let residuals = run
        .residual
        .into_iter()
        .map(|(_, local)| Permutation::new(local).expect("looping keeps blocks bijective"))
        .collect();
    Ok(TruncatedLooping {
        n,
        levels,
        settings,
        residuals,
        terminal_visits: run.visits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::trace_path;
    use crate::topology::build_benes;

    fn deliver(net: &Network, plan: &RoutePlan) -> Vec<usize> {
        (0..net.n())
            .map(|i| trace_path(net, plan, i).unwrap().last().unwrap().line)
            .collect()
    }

    #[test]
    fn identity_4() {
        let net = build_benes(4).unwrap();
        let plan = looping_route(&net, &Permutation::identity(4)).unwrap();
        assert_eq!(deliver(&net, &plan), vec![0, 1, 2, 3]);
    }

    #[test]
    fn reversal_8() {
        let net = build_benes(8).unwrap();
        let p = Permutation::reversal(8);
        let plan = looping_route(&net, &p).unwrap();
        assert_eq!(deliver(&net, &plan), p.as_slice());
    }

    #[test]
    fn two_band_example_cost_and_trace() {
        let net = build_benes(8).unwrap();
        let p: Permutation = "4,5,0,6,1,2,7,3".parse().unwrap();
        let plan = looping_route(&net, &p).unwrap();
        assert_eq!(plan.cost.terminal_visits, 40);
        assert_eq!(plan.cost.switches_set, 20);
        assert_eq!(trace_path(&net, &plan, 3).unwrap().last().unwrap().line, 6);
    }

    #[test]
    fn two_lines() {
        let net = build_benes(2).unwrap();
        let p = Permutation::reversal(2);
        let plan = looping_route(&net, &p).unwrap();
        assert_eq!(plan.settings, vec![SwitchSetting(0, 0, SwitchState::Cross)]);
        assert_eq!(plan.cost.terminal_visits, 2);
    }

    #[test]
    fn truncated_matches_full_outer_columns() {
        let p: Permutation = "2,0,3,1".parse().unwrap();
        let full = looping_route(&build_benes(4).unwrap(), &p).unwrap();
        let t = looping_route_truncated(&p, 1).unwrap();
        let outer: Vec<_> = full.settings.iter().copied().filter(|s| s.0 != 1).collect();
        assert_eq!(t.settings, outer);
    }

    #[test]
    fn truncated_visits() {
        let p: Permutation = "4,5,0,6,1,2,7,3".parse().unwrap();
        let t = looping_route_truncated(&p, 1).unwrap();
        assert_eq!(t.terminal_visits, 16);
        let cols: Vec<_> = t.settings.iter().map(|s| s.0).collect();
        assert!(cols.iter().all(|&c| c == 0 || c == 4));
        assert_eq!(t.residuals.len(), 2);

        let p = Permutation::reversal(16);
        assert_eq!(looping_route_truncated(&p, 2).unwrap().terminal_visits, 64);
    }

    #[test]
    fn truncated_rejects_levels() {
        let p = Permutation::identity(8);
        assert!(looping_route_truncated(&p, 0).is_err());
        assert!(looping_route_truncated(&p, 3).is_err());
    }

    #[test]
    fn wrong_kind_and_size() {
        let p = Permutation::identity(8);
        assert!(matches!(
            looping_route(&build_benes(4).unwrap(), &p),
            Err(Error::SizeMismatch { .. })
        ));
        let kb = crate::topology::build_k_benes(8, 2).unwrap();
        assert!(matches!(
            looping_route(&kb, &p),
            Err(Error::WrongNetworkKind { .. })
        ));
    }
}
