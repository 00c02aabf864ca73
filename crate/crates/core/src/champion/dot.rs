use std::fmt::Write;

use crate::instance::Instance;
use crate::items::ItemSet;

use super::edge::{ChampionEdge, EdgeKind};

fn names(instance: &Instance, set: ItemSet) -> String {
    let inner: Vec<String> = set.iter().map(|i| instance.item_name(i)).collect();
    format!("{{{}}}", inner.join(","))
}

/// Graphviz rendering of champion edges. Envy edges are solid, basic edges
/// dashed and labelled by their good, generalized edges dotted and labelled
/// `H|S`. Output order is deterministic.
pub fn to_dot(instance: &Instance, edges: &[ChampionEdge]) -> String {
    let mut sorted = edges.to_vec();
    sorted.sort_by_key(|e| (e.source, e.target, e.kind, e.added, e.removed, e.discard));
    sorted.dedup();
    let mut out = String::from("digraph champions {\n");
    for a in 0..instance.agents() {
        let _ = writeln!(out, "  \"{}\";", instance.agent_name(a));
    }
    for e in &sorted {
        let (style, label) = match e.kind {
            EdgeKind::Envy => ("solid", String::new()),
            EdgeKind::Basic { good } => ("dashed", instance.item_name(good)),
            EdgeKind::Generalized => (
                "dotted",
                format!("{}|{}", names(instance, e.added), names(instance, e.removed)),
            ),
        };
        let _ = write!(
            out,
            "  \"{}\" -> \"{}\" [style={style}",
            instance.agent_name(e.source),
            instance.agent_name(e.target)
        );
        if !label.is_empty() {
            let _ = write!(out, ", label=\"{label}\"");
        }
        if !e.discard.is_empty() {
            let _ = write!(out, ", discard=\"{}\"", names(instance, e.discard));
        }
        out.push_str("];\n");
    }
    out.push_str("}\n");
    out
}
