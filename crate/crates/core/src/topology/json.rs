use serde::{Deserialize, Serialize};

use super::{BypassEdge, Column, ColumnRole, Network, NetworkKind};
use crate::error::{Error, Result};

// Field order is alphabetical so the emitted keys are sorted.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    bypass_edges: Vec<BypassEdge>,
    columns: Vec<ColumnDoc>,
    k: Option<usize>,
    kind: NetworkKind,
    n: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ColumnDoc {
    role: ColumnRole,
    switches: Vec<[usize; 2]>,
}

impl Network {
    pub fn to_json(&self) -> String {
        let doc = NetworkDoc {
            bypass_edges: self.bypass_edges.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| ColumnDoc {
                    role: c.role(),
                    switches: c.switches().iter().map(|s| s.lines()).collect(),
                })
                .collect(),
            k: self.k,
            kind: self.kind,
            n: self.n,
        };
        serde_json::to_string_pretty(&doc).expect("network document serializes")
    }

    /// Parse a network document. The document must describe exactly the
    /// canonical network for its `(kind, n, k)`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkDoc = serde_json::from_str(text)
            .map_err(|e| Error::MalformedNetwork(format!("unreadable network document: {e}")))?;
        let columns = doc
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                Column::from_pairs(i, c.role, doc.n, c.switches.iter().map(|&[a, b]| (a, b)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut bypass_edges = doc.bypass_edges;
        bypass_edges.sort();
        let parsed = Network::from_columns(doc.kind, doc.n, doc.k, columns, bypass_edges);
        let k = if doc.kind.takes_band_width() {
            doc.k
        } else {
            None
        };
        let canonical = Network::build(doc.kind, doc.n, k)
            .map_err(|e| Error::MalformedNetwork(format!("{}: {e}", parsed.id())))?;
        if parsed != canonical {
            return Err(Error::MalformedNetwork(format!(
                "document does not match the canonical {} wiring",
                canonical.id()
            )));
        }
        Ok(canonical)
    }
}
