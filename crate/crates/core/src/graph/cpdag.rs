//! DAG to CPDAG conversion via compelled-edge labeling (Chickering's
//! order-edges / label-edges procedure).

use super::{MixedGraph, NodeId};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    Unknown,
    Compelled,
    Reversible,
}

/// Convert a DAG to the CPDAG of its Markov equivalence class: compelled
/// edges stay directed, reversible edges become undirected.
pub fn dag_to_cpdag(dag: &MixedGraph) -> Result<MixedGraph> {
    if !dag.is_dag() {
        return Err(Error::InvalidGraph(
            "dag_to_cpdag requires an acyclic, fully directed graph".into(),
        ));
    }
    let topo = dag.topological_order()?;
    let mut pos = vec![0usize; dag.node_count()];
    for (i, &v) in topo.iter().enumerate() {
        pos[v] = i;
    }

    // order edges: y in topological order, x in pa(y) by descending order
    let mut ordered: Vec<(NodeId, NodeId)> = Vec::with_capacity(dag.edge_count());
    for &y in &topo {
        let mut pa = dag.parents(y);
        pa.sort_by_key(|&x| std::cmp::Reverse(pos[x]));
        for x in pa {
            ordered.push((x, y));
        }
    }

    let rank: BTreeMap<(NodeId, NodeId), usize> =
        ordered.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut label: BTreeMap<(NodeId, NodeId), Label> =
        ordered.iter().map(|&e| (e, Label::Unknown)).collect();

    while let Some(&(x, y)) = ordered.iter().find(|e| label[e] == Label::Unknown) {
        let mut decided = false;
        let mut wpa = dag.parents(x);
        wpa.sort_by_key(|&w| rank[&(w, x)]);
        for w in wpa {
            if label[&(w, x)] != Label::Compelled {
                continue;
            }
            if !dag.has_directed_edge(w, y) {
                for z in dag.parents(y) {
                    label.insert((z, y), Label::Compelled);
                }
                decided = true;
                break;
            } else {
                label.insert((w, y), Label::Compelled);
            }
        }
        if decided {
            continue;
        }
        let exists_z = dag
            .parents(y)
            .iter()
            .any(|&z| z != x && !dag.has_directed_edge(z, x));
        let verdict = if exists_z {
            Label::Compelled
        } else {
            Label::Reversible
        };
        for z in dag.parents(y) {
            if label[&(z, y)] == Label::Unknown {
                label.insert((z, y), verdict);
            }
        }
    }

    let mut out = MixedGraph::new(dag.names().to_vec());
    for (&(x, y), &l) in &label {
        match l {
            Label::Compelled => out.add_directed(x, y),
            Label::Reversible => out.add_undirected(x, y),
            Label::Unknown => unreachable!("unlabelled edge after label-edges"),
        }
    }
    Ok(out)
}
