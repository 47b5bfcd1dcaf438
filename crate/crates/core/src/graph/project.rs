//! Latent projection of a DAG onto its observed variables, producing a MAG.
//!
//! Two observed nodes are adjacent in the MAG iff an inducing path relative
//! to the latent set connects them: every non-endpoint non-collider on the
//! path is latent, and every collider is an ancestor of an endpoint.
//! Adjacent pairs are oriented by ancestry in the full DAG.

use super::{MixedGraph, NodeId};
use crate::error::{Error, Result};
use std::collections::BTreeSet;

/// Project `dag` onto its non-latent nodes. Node order of the result is the
/// original order with latent nodes removed.
pub fn latent_project(dag: &MixedGraph, latents: &BTreeSet<NodeId>) -> Result<MixedGraph> {
    if !dag.is_dag() {
        return Err(Error::InvalidGraph("latent_project requires a DAG".into()));
    }
    if let Some(&v) = latents.iter().find(|&&v| v >= dag.node_count()) {
        return Err(Error::Domain(format!(
            "latent node index {v} out of range"
        )));
    }
    let observed: Vec<NodeId> = (0..dag.node_count())
        .filter(|v| !latents.contains(v))
        .collect();
    let ancestors: Vec<BTreeSet<NodeId>> = (0..dag.node_count())
        .map(|v| dag.ancestors(v))
        .collect();

    let mut mag = MixedGraph::new(
        observed.iter().map(|&v| dag.name(v).to_string()).collect(),
    );
    for i in 0..observed.len() {
        for j in i + 1..observed.len() {
            let (a, b) = (observed[i], observed[j]);
            if !has_inducing_path(dag, a, b, latents, &ancestors) {
                continue;
            }
            if ancestors[b].contains(&a) {
                mag.add_directed(i, j);
            } else if ancestors[a].contains(&b) {
                mag.add_directed(j, i);
            } else {
                mag.add_bidirected(i, j);
            }
        }
    }
    Ok(mag)
}

/// Reachability over states (node, arrived-with-arrowhead). A walk
/// satisfying the inducing conditions can always be shortened to a path, so
/// state reachability suffices.
fn has_inducing_path(
    dag: &MixedGraph,
    a: NodeId,
    b: NodeId,
    latents: &BTreeSet<NodeId>,
    ancestors: &[BTreeSet<NodeId>],
) -> bool {
    let anc_ab = |v: NodeId| ancestors[a].contains(&v) || ancestors[b].contains(&v);
    // edges incident to v as (other endpoint, edge points into v)
    let incident = |v: NodeId| -> Vec<(NodeId, bool)> {
        let mut out = Vec::new();
        for p in dag.parents(v) {
            out.push((p, true));
        }
        for c in dag.children(v) {
            out.push((c, false));
        }
        out.sort();
        out
    };

    let mut visited: BTreeSet<(NodeId, bool)> = BTreeSet::new();
    let mut stack: Vec<(NodeId, bool)> = Vec::new();
    for (w, _into_a) in incident(a) {
        if w == b {
            return true; // a single edge is always an inducing path
        }
        // arrived at w with an arrowhead iff the edge points into w,
        // i.e. w is a child of a
        let into_w = dag.has_directed_edge(a, w);
        stack.push((w, into_w));
    }
    while let Some((v, in_head)) = stack.pop() {
        if !visited.insert((v, in_head)) {
            continue;
        }
        for (w, points_into_v) in incident(v) {
            let collider = in_head && points_into_v;
            let passable = if collider {
                anc_ab(v)
            } else {
                latents.contains(&v)
            };
            if !passable {
                continue;
            }
            if w == b {
                return true;
            }
            if w == a {
                continue;
            }
            // the edge between v and w points into w iff w is a child of v
            stack.push((w, dag.has_directed_edge(v, w)));
        }
    }
    false
}
