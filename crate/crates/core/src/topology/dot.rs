use std::fmt::Write;

use super::{BypassKind, Network};

fn node(column: usize, position: usize) -> String {
    format!("s{column}_{position}")
}

/// Last switch node on `line` at or before `column`, else the input terminal.
fn node_before(net: &Network, line: usize, column: usize) -> String {
    (0..=column)
        .rev()
        .find_map(|c| {
            let col = net.column(c);
            col.switch_of(line)
                .map(|i| node(c, col.switches()[i].lines()[0]))
        })
        .unwrap_or_else(|| format!("in{line}"))
}

/// First switch node on `line` at or after `column`, else the output terminal.
fn node_after(net: &Network, line: usize, column: usize) -> String {
    (column..net.depth())
        .find_map(|c| {
            let col = net.column(c);
            col.switch_of(line)
                .map(|i| node(c, col.switches()[i].lines()[0]))
        })
        .unwrap_or_else(|| format!("out{line}"))
}

/// Render a network as a Graphviz digraph. Switches are nodes, one ranked
/// subgraph per column; wires are edges labeled with their line number and
/// bypass edges are dashed. Output depends only on the network.
pub fn export_dot(net: &Network) -> String {
    let mut out = String::new();
    let n = net.n();
    // Writing to a String cannot fail.
    let _ = writeln!(out, "digraph \"{}\" {{", net.id());
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  node [shape=box, fontsize=10];");

    let _ = writeln!(out, "  subgraph inputs {{");
    let _ = writeln!(out, "    rank=same;");
    for line in 0..n {
        let _ = writeln!(out, "    in{line} [shape=point, xlabel=\"{line}\"];");
    }
    let _ = writeln!(out, "  }}");

    for col in net.columns() {
        let _ = writeln!(out, "  subgraph column_{} {{", col.index());
        let _ = writeln!(out, "    rank=same;");
        let _ = writeln!(out, "    label=\"{:?}\";", col.role());
        for s in col.switches() {
            let [a, b] = s.lines();
            let _ = writeln!(
                out,
                "    {} [label=\"{}:({a},{b})\"];",
                node(col.index(), a),
                col.index()
            );
        }
        let _ = writeln!(out, "  }}");
    }

    let _ = writeln!(out, "  subgraph outputs {{");
    let _ = writeln!(out, "    rank=same;");
    for line in 0..n {
        let _ = writeln!(out, "    out{line} [shape=point, xlabel=\"{line}\"];");
    }
    let _ = writeln!(out, "  }}");

    for line in 0..n {
        let mut prev = format!("in{line}");
        for col in net.columns() {
            if let Some(i) = col.switch_of(line) {
                let here = node(col.index(), col.switches()[i].lines()[0]);
                let _ = writeln!(out, "  {prev} -> {here} [label=\"{line}\"];");
                prev = here;
            }
        }
        let _ = writeln!(out, "  {prev} -> out{line} [label=\"{line}\"];");
    }

    for e in net.bypass_edges() {
        let from = node_before(net, e.from.line, e.from.column);
        let to = node_after(net, e.to.line, e.to.column);
        let kind = match e.kind {
            BypassKind::BandExit => "band-exit",
            BypassKind::StageSkip => "stage-skip",
        };
        let _ = writeln!(
            out,
            "  {from} -> {to} [style=dashed, color=blue, class=\"bypass\", tooltip=\"{kind}\"];"
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_benes, build_kr_benes};

    #[test]
    fn single_switch() {
        let dot = export_dot(&build_benes(2).unwrap());
        assert_eq!(dot.matches("[label=\"0:(0,1)\"]").count(), 1);
        assert_eq!(dot.matches("-> s0_0").count(), 2);
        assert_eq!(dot.matches("s0_0 -> out").count(), 2);
    }

    #[test]
    fn bypass_edges_are_marked() {
        let dot = export_dot(&build_kr_benes(8).unwrap());
        assert_eq!(dot.matches("class=\"bypass\"").count(), 16);
        assert!(dot.contains("style=dashed"));
    }

    #[test]
    fn deterministic() {
        let a = export_dot(&build_kr_benes(16).unwrap());
        let b = export_dot(&build_kr_benes(16).unwrap());
        assert_eq!(a, b);
    }
}
