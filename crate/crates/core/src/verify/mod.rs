//! Plan checking and test permutation sources.

pub(crate) mod generate;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::routing::{RoutePlan, SwitchState};
use crate::topology::Network;
use crate::Permutation;

pub use generate::{
    enumerate_k_bounded, gen_pi1, gen_pi2, gen_pi3, gen_random_k_bounded, KBoundedPermutations,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    WrongOutput,
    PortCollision,
    InconsistentSwitch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Input terminal whose packet exposed the violation.
    pub input: usize,
    /// Column of the offending port or switch; `None` for output terminals.
    pub column: Option<usize>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    /// Output terminal reached by each input, if it got through.
    pub delivered: Vec<Option<usize>>,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Push every input through the plan at once and check edge-disjointness,
/// switch consistency and delivery. Structural problems (plan for another
/// network or permutation, unknown switches, bad bypass choices) are
/// returned as errors rather than violations.
pub fn verify_plan(net: &Network, plan: &RoutePlan, p: &Permutation) -> Result<VerifyReport> {
    let table = plan.state_table(net)?;
    let route = plan.route_columns(net)?;
    if plan.permutation != *p {
        return Err(Error::MalformedPlan(
            "plan was made for a different permutation".into(),
        ));
    }
    let n = net.n();
    let mut violations = Vec::new();
    let mut lines: Vec<Option<usize>> = (0..n).map(Some).collect();
    // Directed edge into each column input (or output terminal) -> first user.
    let mut used: HashMap<(Option<usize>, usize), usize> = HashMap::new();

    for &c in &route {
        let col = net.column(c);
        for input in 0..n {
            let Some(line) = lines[input] else { continue };
            if used.insert((Some(c), line), input).is_some() {
                violations.push(Violation {
                    kind: ViolationKind::PortCollision,
                    input,
                    column: Some(c),
                    line,
                });
            }
            let Some(i) = col.switch_of(line) else {
                continue;
            };
            let cross = match table[c][i] {
                SwitchState::Straight => false,
                SwitchState::Cross => true,
                SwitchState::Unused => {
                    violations.push(Violation {
                        kind: ViolationKind::InconsistentSwitch,
                        input,
                        column: Some(c),
                        line,
                    });
                    lines[input] = None;
                    continue;
                }
            };
            lines[input] = Some(col.switches()[i].exit_line(line, cross));
        }
    }

    for input in 0..n {
        let Some(line) = lines[input] else { continue };
        if used.insert((None, line), input).is_some() {
            violations.push(Violation {
                kind: ViolationKind::PortCollision,
                input,
                column: None,
                line,
            });
        }
        if line != p.apply(input) {
            violations.push(Violation {
                kind: ViolationKind::WrongOutput,
                input,
                column: None,
                line,
            });
        }
    }

    let ok = violations.is_empty()
        && lines
            .iter()
            .enumerate()
            .all(|(i, l)| *l == Some(p.apply(i)));
    Ok(VerifyReport {
        ok,
        delivered: lines,
        violations,
    })
}
