//! Graph-comparison scoring of a learnt PAG against the true MAG:
//! penalty-weighted confusion tallies, precision/recall/F1 and BSF.

use crate::error::{Error, Result};
use crate::graph::{Mark, MixedGraph};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Fractional-credit confusion tally. `a` is the number of edges in the
/// true MAG, `i` the number of independencies N(N-1)/2 - a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionTally {
    pub tp: f64,
    pub fp: f64,
    pub fn_: f64,
    pub tn: f64,
    pub a: f64,
    pub i: f64,
    pub n: usize,
}

fn mark_token(m: Mark) -> &'static str {
    match m {
        Mark::Tail => "-",
        Mark::Arrow => ">",
        Mark::Circle => "o",
    }
}

fn pair_token(ma: Mark, mb: Mark) -> String {
    format!("{}{}", mark_token(ma), mark_token(mb))
}

/// True-positive credit per predicted edge. The default rule: a predicted
/// definite mark (tail or arrow) that contradicts the true mark scores 0;
/// otherwise each circle endpoint costs 0.25. A custom matrix loaded from
/// JSON overrides individual (true, predicted) combinations.
#[derive(Debug, Clone, Default)]
pub struct PenaltyMatrix {
    overrides: BTreeMap<(String, String), f64>,
}

impl PenaltyMatrix {
    /// JSON object keyed `"<true marks>|<predicted marks>"` with mark pairs
    /// written endpoint-wise (`-`, `>`, `o`), e.g. `"->|oo": 0.5`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, f64> = serde_json::from_str(text)?;
        let mut overrides = BTreeMap::new();
        for (key, credit) in raw {
            let Some((t, p)) = key.split_once('|') else {
                return Err(Error::Validation(format!(
                    "penalty key {key:?} is not of the form TRUE|PREDICTED"
                )));
            };
            if !(0.0..=1.0).contains(&credit) {
                return Err(Error::Validation(format!(
                    "penalty credit for {key:?} outside [0, 1]"
                )));
            }
            overrides.insert((t.to_string(), p.to_string()), credit);
        }
        Ok(PenaltyMatrix { overrides })
    }

    /// Credit for one adjacent pair; marks are given endpoint-aligned.
    pub fn credit(&self, truth: (Mark, Mark), predicted: (Mark, Mark)) -> Result<f64> {
        if truth.0 == Mark::Circle || truth.1 == Mark::Circle {
            return Err(Error::Domain(
                "true MAG edges cannot carry circle marks".into(),
            ));
        }
        let key = (
            pair_token(truth.0, truth.1),
            pair_token(predicted.0, predicted.1),
        );
        if let Some(&c) = self.overrides.get(&key) {
            return Ok(c);
        }
        let mut circles = 0u32;
        for (t, p) in [(truth.0, predicted.0), (truth.1, predicted.1)] {
            match p {
                Mark::Circle => circles += 1,
                _ if p != t => return Ok(0.0),
                _ => {}
            }
        }
        Ok(1.0 - 0.25 * circles as f64)
    }
}

/// Score one predicted edge against the true one with the default matrix.
pub fn score_edge(truth: (Mark, Mark), predicted: (Mark, Mark)) -> Result<f64> {
    PenaltyMatrix::default().credit(truth, predicted)
}

/// Per-pair confusion tally of a learnt graph against the true MAG. Node
/// sets must coincide (matched by name; order may differ).
pub fn compare(pag: &MixedGraph, mag: &MixedGraph, matrix: &PenaltyMatrix) -> Result<ConfusionTally> {
    let n = mag.node_count();
    if pag.node_count() != n {
        return Err(Error::Domain(format!(
            "node count mismatch: learnt {} vs true {}",
            pag.node_count(),
            n
        )));
    }
    let mut map = Vec::with_capacity(n);
    for v in 0..n {
        let name = mag.name(v);
        let idx = pag
            .index_of(name)
            .ok_or_else(|| Error::Domain(format!("node {name:?} missing from learnt graph")))?;
        map.push(idx);
    }

    let a = mag.edge_count() as f64;
    let i = (n * (n - 1) / 2) as f64 - a;
    let mut tally = ConfusionTally {
        tp: 0.0,
        fp: 0.0,
        fn_: 0.0,
        tn: 0.0,
        a,
        i,
        n,
    };
    for x in 0..n {
        for y in x + 1..n {
            let truth = mag.edge_between(x, y);
            let pred = pag.edge_between(map[x], map[y]);
            match (truth, pred) {
                (Some(t), Some(p)) => {
                    let credit = matrix.credit(t, p)?;
                    tally.tp += credit;
                    tally.fn_ += 1.0 - credit;
                }
                (Some(_), None) => tally.fn_ += 1.0,
                (None, Some(_)) => tally.fp += 1.0,
                (None, None) => tally.tn += 1.0,
            }
        }
    }
    Ok(tally)
}

/// (precision, recall, f1); zero denominators yield 0.
pub fn f1(tally: &ConfusionTally) -> (f64, f64, f64) {
    let precision = if tally.tp + tally.fp > 0.0 {
        tally.tp / (tally.tp + tally.fp)
    } else {
        0.0
    };
    let recall = if tally.a > 0.0 { tally.tp / tally.a } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f1)
}

/// Balanced scoring function in [-1, 1].
pub fn bsf(tally: &ConfusionTally) -> Result<f64> {
    if tally.a < 1.0 || tally.i < 1.0 {
        return Err(Error::Domain(
            "BSF is undefined for empty or complete true graphs".into(),
        ));
    }
    Ok(0.5 * (tally.tp / tally.a + tally.tn / tally.i - tally.fp / tally.i - tally.fn_ / tally.a))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub bsf: f64,
    pub tp: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
    pub tn: f64,
    pub learnt_edges: usize,
    pub true_edges: usize,
}

pub fn report(pag: &MixedGraph, mag: &MixedGraph, matrix: &PenaltyMatrix) -> Result<MetricsReport> {
    let tally = compare(pag, mag, matrix)?;
    let (precision, recall, f1v) = f1(&tally);
    Ok(MetricsReport {
        precision,
        recall,
        f1: f1v,
        bsf: bsf(&tally)?,
        tp: tally.tp,
        fp: tally.fp,
        fn_: tally.fn_,
        tn: tally.tn,
        learnt_edges: pag.edge_count(),
        true_edges: mag.edge_count(),
    })
}
