use std::fmt::Write;

use super::{NetworkDiagram, NodeKind};
use crate::graph::dot_id;

pub(super) fn diagram_to_dot(d: &NetworkDiagram) -> String {
    let mut s = String::from("digraph D {\n  rankdir=BT;\n");
    for (k, w) in d.inputs.iter().enumerate() {
        let _ = writeln!(s, "  in{} [shape=point, xlabel={}];", k, dot_id(w));
    }
    for (k, n) in d.nodes.iter().enumerate() {
        let (label, shape) = match &n.kind {
            NodeKind::Mechanism(b) => (b.clone(), "box"),
            NodeKind::SharpState(v) => (format!("{}", v), "triangle"),
            NodeKind::SharpEffect(v) => (format!("{}", v), "invtriangle"),
            NodeKind::GenericState(b) => (b.clone(), "triangle"),
            NodeKind::GenericEffect(b) => (b.clone(), "invtriangle"),
        };
        let _ = writeln!(s, "  n{} [shape={}, label={}];", k, shape, dot_id(&label));
    }
    for (k, w) in d.outputs.iter().enumerate() {
        let _ = writeln!(s, "  out{} [shape=point, xlabel={}];", k, dot_id(w));
    }
    let source = |w: &str| -> Option<String> {
        if let Some(p) = d.producer(w) {
            return Some(format!("n{}", p));
        }
        d.inputs.iter().position(|i| i == w).map(|k| format!("in{}", k))
    };
    for (k, n) in d.nodes.iter().enumerate() {
        for w in &n.inputs {
            if let Some(src) = source(w) {
                let _ = writeln!(s, "  {} -> n{} [label={}];", src, k, dot_id(w));
            }
        }
    }
    for (k, w) in d.outputs.iter().enumerate() {
        if let Some(src) = source(w) {
            let _ = writeln!(s, "  {} -> out{} [label={}];", src, k, dot_id(w));
        }
    }
    s.push_str("}\n");
    s
}
