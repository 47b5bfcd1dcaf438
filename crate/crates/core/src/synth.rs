//! Ground-truth networks, forward and perfect-intervention sampling,
//! latent masking and true-MAG export.

use crate::data::{DiscreteTable, VariableSpec};
use crate::error::{Error, Result};
use crate::graph::{latent_project, MixedGraph};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// A discrete Bayesian network: DAG plus one CPT row per parent
/// configuration. Rows are indexed mixed-radix over the parents in the
/// order listed, later parents least significant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BayesNetSpec {
    pub variables: Vec<VariableSpec>,
    #[serde(default)]
    pub parents: BTreeMap<String, Vec<String>>,
    pub cpts: BTreeMap<String, Vec<Vec<f64>>>,
}

impl BayesNetSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
        let spec: BayesNetSpec = serde_json::from_str(&text)
            .map_err(|e| Error::Validation(format!("bad network spec {}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn parent_indices(&self, node: usize) -> Vec<usize> {
        let name = &self.variables[node].name;
        self.parents
            .get(name)
            .map(|ps| {
                ps.iter()
                    .map(|p| self.index_of(p).expect("validated parent"))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// The network structure as a directed mixed graph.
    pub fn dag(&self) -> MixedGraph {
        let mut g = MixedGraph::new(self.variables.iter().map(|v| v.name.clone()).collect());
        for v in 0..self.variables.len() {
            for p in self.parent_indices(v) {
                g.add_directed(p, v);
            }
        }
        g
    }

    pub fn validate(&self) -> Result<()> {
        if self.variables.is_empty() {
            return Err(Error::Validation("network has no variables".into()));
        }
        for v in &self.variables {
            if v.cardinality() < 2 {
                return Err(Error::Validation(format!(
                    "variable {} needs at least 2 states",
                    v.name
                )));
            }
        }
        for (child, ps) in &self.parents {
            if self.index_of(child).is_none() {
                return Err(Error::Validation(format!("unknown node {child:?} in parents")));
            }
            for p in ps {
                if self.index_of(p).is_none() {
                    return Err(Error::Validation(format!(
                        "unknown parent {p:?} of {child}"
                    )));
                }
            }
        }
        if self.dag().has_directed_cycle() {
            return Err(Error::Validation("parent structure is cyclic".into()));
        }
        for (i, var) in self.variables.iter().enumerate() {
            let q: usize = self
                .parent_indices(i)
                .iter()
                .map(|&p| self.variables[p].cardinality())
                .product();
            let rows = self
                .cpts
                .get(&var.name)
                .ok_or_else(|| Error::Validation(format!("missing CPT for {}", var.name)))?;
            if rows.len() != q {
                return Err(Error::Validation(format!(
                    "CPT for {} has {} rows, expected {q}",
                    var.name,
                    rows.len()
                )));
            }
            for (j, row) in rows.iter().enumerate() {
                if row.len() != var.cardinality() {
                    return Err(Error::Validation(format!(
                        "CPT row {j} of {} has {} entries, expected {}",
                        var.name,
                        row.len(),
                        var.cardinality()
                    )));
                }
                let sum: f64 = row.iter().sum();
                if row.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::Validation(format!(
                        "CPT row {j} of {} does not sum to 1 (sum = {sum})",
                        var.name
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanEntry {
    #[serde(default)]
    pub targets: Vec<String>,
    pub n: usize,
    pub seed: u64,
}

/// Simulation plan: one observational entry plus interventional entries in
/// processing order, and the latent node set applied to every table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterventionPlan {
    #[serde(default)]
    pub latents: Vec<String>,
    pub observational: PlanEntry,
    #[serde(default)]
    pub interventional: Vec<PlanEntry>,
}

impl InterventionPlan {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Validation(format!("bad plan {}: {e}", path.display())))
    }

    pub fn validate(&self, spec: &BayesNetSpec) -> Result<()> {
        for l in &self.latents {
            if spec.index_of(l).is_none() {
                return Err(Error::Validation(format!("unknown latent node {l:?}")));
            }
        }
        if !self.observational.targets.is_empty() {
            return Err(Error::Validation(
                "observational entry must have no targets".into(),
            ));
        }
        for (i, entry) in self.interventional.iter().enumerate() {
            for t in &entry.targets {
                if spec.index_of(t).is_none() {
                    return Err(Error::Validation(format!(
                        "unknown target node {t:?} in interventional entry {i}"
                    )));
                }
                if self.latents.contains(t) {
                    return Err(Error::Validation(format!(
                        "target {t:?} in interventional entry {i} is latent"
                    )));
                }
            }
            if entry.n == 0 {
                return Err(Error::Validation(format!(
                    "interventional entry {i} has zero sample size"
                )));
            }
        }
        Ok(())
    }
}

/// Sample under perfect intervention: targets lose their incoming edges and
/// are drawn uniformly over their states; everything else follows its CPT.
/// With an empty target set the generator trajectory equals plain forward
/// sampling.
pub fn intervene_sample(
    spec: &BayesNetSpec,
    targets: &BTreeSet<usize>,
    n: usize,
    seed: u64,
) -> Result<DiscreteTable> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Validation("sample size must be positive".into()));
    }
    let order = spec.dag().topological_order()?;
    let nvars = spec.variables.len();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = vec![0u32; nvars];
        for &v in &order {
            let card = spec.variables[v].cardinality();
            let u: f64 = rng.gen();
            let state = if targets.contains(&v) {
                ((u * card as f64) as usize).min(card - 1)
            } else {
                let parents = spec.parent_indices(v);
                let mut cfg = 0usize;
                for &p in &parents {
                    cfg = cfg * spec.variables[p].cardinality() + row[p] as usize;
                }
                let probs = &spec.cpts[&spec.variables[v].name][cfg];
                let mut acc = 0.0;
                let mut picked = card - 1;
                for (k, &p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        picked = k;
                        break;
                    }
                }
                picked
            };
            row[v] = state as u32;
        }
        rows.push(row);
    }
    DiscreteTable::new(spec.variables.clone(), rows)
}

pub fn forward_sample(spec: &BayesNetSpec, n: usize, seed: u64) -> Result<DiscreteTable> {
    intervene_sample(spec, &BTreeSet::new(), n, seed)
}

/// Drop latent columns; remaining column order is preserved.
pub fn mask_latents(table: &DiscreteTable, latents: &BTreeSet<usize>) -> DiscreteTable {
    let keep: Vec<usize> = (0..table.variables.len())
        .filter(|c| !latents.contains(c))
        .collect();
    let variables: Vec<VariableSpec> = keep.iter().map(|&c| table.variables[c].clone()).collect();
    let rows: Vec<Vec<u32>> = (0..table.sample_size())
        .map(|r| keep.iter().map(|&c| table.value(r, c)).collect())
        .collect();
    DiscreteTable::new(variables, rows).expect("masked rows stay valid")
}

/// (true DAG over all nodes, true MAG over the observed nodes).
pub fn export_ground_truth(
    spec: &BayesNetSpec,
    latents: &BTreeSet<usize>,
) -> Result<(MixedGraph, MixedGraph)> {
    let dag = spec.dag();
    let mag = latent_project(&dag, latents)?;
    Ok((dag, mag))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_spec() -> BayesNetSpec {
        // A -> B with strong dependence
        serde_json::from_str(
            r#"{
            "variables": [
                {"name": "A", "states": ["0", "1"]},
                {"name": "B", "states": ["0", "1"]}
            ],
            "parents": {"B": ["A"]},
            "cpts": {
                "A": [[0.5, 0.5]],
                "B": [[0.9, 0.1], [0.1, 0.9]]
            }
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn deterministic_cpts_force_rows() {
        let spec: BayesNetSpec = serde_json::from_str(
            r#"{
            "variables": [
                {"name": "A", "states": ["0", "1"]},
                {"name": "B", "states": ["0", "1"]}
            ],
            "parents": {"B": ["A"]},
            "cpts": {"A": [[0.0, 1.0]], "B": [[1.0, 0.0], [0.0, 1.0]]}
        }"#,
        )
        .unwrap();
        let t = forward_sample(&spec, 50, 5).unwrap();
        for r in 0..50 {
            assert_eq!(t.value(r, 0), 1);
            assert_eq!(t.value(r, 1), 1);
        }
    }

    #[test]
    fn same_seed_same_table() {
        let spec = chain_spec();
        let a = forward_sample(&spec, 1000, 42).unwrap();
        let b = forward_sample(&spec, 1000, 42).unwrap();
        for r in 0..1000 {
            assert_eq!(a.value(r, 0), b.value(r, 0));
            assert_eq!(a.value(r, 1), b.value(r, 1));
        }
    }

    #[test]
    fn marginal_frequency_near_half() {
        let spec = chain_spec();
        let t = forward_sample(&spec, 10_000, 1).unwrap();
        let ones: usize = (0..10_000).filter(|&r| t.value(r, 0) == 1).count();
        let freq = ones as f64 / 10_000.0;
        assert!((freq - 0.5).abs() < 0.02, "freq = {freq}");
    }

    #[test]
    fn intervention_breaks_dependence() {
        let spec = chain_spec();
        let targets: BTreeSet<usize> = [1].into_iter().collect();
        let t = intervene_sample(&spec, &targets, 10_000, 3).unwrap();
        // B forced uniform: G2 against its former parent is insignificant
        let res = crate::indep::g2_test(
            &t,
            0,
            1,
            &BTreeSet::new(),
            &crate::indep::CiOptions::default(),
        )
        .unwrap()
        .unwrap();
        assert!(res.p_value > 0.05, "p = {}", res.p_value);
        // and roughly uniform
        let ones: usize = (0..10_000).filter(|&r| t.value(r, 1) == 1).count();
        assert!((ones as f64 / 10_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn empty_target_set_matches_forward_sampling() {
        let spec = chain_spec();
        let a = forward_sample(&spec, 500, 9).unwrap();
        let b = intervene_sample(&spec, &BTreeSet::new(), 500, 9).unwrap();
        for r in 0..500 {
            assert_eq!(a.value(r, 0), b.value(r, 0));
            assert_eq!(a.value(r, 1), b.value(r, 1));
        }
    }

    #[test]
    fn mask_drops_columns_in_order() {
        let spec = chain_spec();
        let t = forward_sample(&spec, 10, 2).unwrap();
        let masked = mask_latents(&t, &[0].into_iter().collect());
        assert_eq!(masked.variables.len(), 1);
        assert_eq!(masked.variables[0].name, "B");
        for r in 0..10 {
            assert_eq!(masked.value(r, 0), t.value(r, 1));
        }
    }

    #[test]
    fn bad_cpt_row_rejected() {
        let bad: BayesNetSpec = serde_json::from_str(
            r#"{
            "variables": [{"name": "A", "states": ["0", "1"]}],
            "parents": {},
            "cpts": {"A": [[0.7, 0.7]]}
        }"#,
        )
        .unwrap();
        assert!(bad.validate().is_err());
        assert!(forward_sample(&bad, 10, 1).is_err());
    }

    #[test]
    fn ground_truth_export() {
        let spec: BayesNetSpec = serde_json::from_str(
            r#"{
            "variables": [
                {"name": "A", "states": ["0", "1"]},
                {"name": "L", "states": ["0", "1"]},
                {"name": "B", "states": ["0", "1"]}
            ],
            "parents": {"A": ["L"], "B": ["L"]},
            "cpts": {
                "L": [[0.5, 0.5]],
                "A": [[0.8, 0.2], [0.2, 0.8]],
                "B": [[0.8, 0.2], [0.2, 0.8]]
            }
        }"#,
        )
        .unwrap();
        let latents: BTreeSet<usize> = [1].into_iter().collect();
        let (dag, mag) = export_ground_truth(&spec, &latents).unwrap();
        assert_eq!(dag.node_count(), 3);
        assert_eq!(mag.node_count(), 2);
        assert!(mag.has_bidirected_edge(0, 1));
    }
}
