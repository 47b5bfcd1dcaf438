//! Plain-text graph files: a `#nodes:` header naming every node (so
//! isolated nodes survive round-trips) followed by one edge per line,
//! `NAME1 <marks> NAME2` with marks drawn from `-->`, `<->`, `o-o`,
//! `o->`, `---`.

use super::{Mark, MixedGraph};
use crate::error::{Error, Result};

fn mark_token(ma: Mark, mb: Mark) -> Option<&'static str> {
    match (ma, mb) {
        (Mark::Tail, Mark::Arrow) => Some("-->"),
        (Mark::Arrow, Mark::Arrow) => Some("<->"),
        (Mark::Circle, Mark::Circle) => Some("o-o"),
        (Mark::Circle, Mark::Arrow) => Some("o->"),
        (Mark::Tail, Mark::Tail) => Some("---"),
        _ => None,
    }
}

pub fn render_graph(g: &MixedGraph) -> String {
    let mut out = String::new();
    out.push_str("#nodes: ");
    out.push_str(&g.names().join(","));
    out.push('\n');
    for (a, b, ma, mb) in g.edges() {
        // normalize so the arrow points right and a circle endpoint comes
        // first in o-> edges
        let (x, y, mx, my) = match (ma, mb) {
            (Mark::Arrow, Mark::Tail) => (b, a, mb, ma),
            (Mark::Arrow, Mark::Circle) => (b, a, mb, ma),
            _ => (a, b, ma, mb),
        };
        let tok = mark_token(mx, my)
            .unwrap_or_else(|| panic!("unsupported mark pair {mx:?} {my:?}"));
        out.push_str(&format!("{} {} {}\n", g.name(x), tok, g.name(y)));
    }
    out
}

pub fn parse_graph(text: &str) -> Result<MixedGraph> {
    let mut names: Option<Vec<String>> = None;
    let mut edges: Vec<(String, String, Mark, Mark)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#nodes:") {
            names = Some(
                rest.split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect(),
            );
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "line {}: expected `NAME1 <marks> NAME2`, got {line:?}",
                lineno + 1
            )));
        }
        let (ma, mb) = match parts[1] {
            "-->" => (Mark::Tail, Mark::Arrow),
            "<--" => (Mark::Arrow, Mark::Tail),
            "<->" => (Mark::Arrow, Mark::Arrow),
            "o-o" => (Mark::Circle, Mark::Circle),
            "o->" => (Mark::Circle, Mark::Arrow),
            "<-o" => (Mark::Arrow, Mark::Circle),
            "---" => (Mark::Tail, Mark::Tail),
            other => {
                return Err(Error::Parse(format!(
                    "line {}: unknown edge marks {other:?}",
                    lineno + 1
                )))
            }
        };
        edges.push((parts[0].to_string(), parts[2].to_string(), ma, mb));
    }
    let names = names.unwrap_or_else(|| {
        // no header: infer node order from first appearance
        let mut seen = Vec::new();
        for (a, b, _, _) in &edges {
            for n in [a, b] {
                if !seen.contains(n) {
                    seen.push(n.clone());
                }
            }
        }
        seen
    });
    let mut g = MixedGraph::new(names);
    for (a, b, ma, mb) in edges {
        let ia = g
            .index_of(&a)
            .ok_or_else(|| Error::Parse(format!("edge references unknown node {a:?}")))?;
        let ib = g
            .index_of(&b)
            .ok_or_else(|| Error::Parse(format!("edge references unknown node {b:?}")))?;
        g.set_edge(ia, ib, ma, mb);
    }
    Ok(g)
}
