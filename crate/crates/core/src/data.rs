//! Discrete data tables, the observational + interventional bundle, and
//! contingency counting.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    /// category labels in fixed order, shared across the whole bundle
    pub states: Vec<String>,
}

impl VariableSpec {
    pub fn cardinality(&self) -> usize {
        self.states.len()
    }
}

static NEXT_TABLE_ID: AtomicU64 = AtomicU64::new(0);

/// Complete-case discrete data: `rows x variables` matrix of state indices.
#[derive(Debug, Clone)]
pub struct DiscreteTable {
    id: u64,
    pub variables: Vec<VariableSpec>,
    cells: Vec<u32>, // row-major
    n: usize,
}

impl DiscreteTable {
    pub fn new(variables: Vec<VariableSpec>, rows: Vec<Vec<u32>>) -> Result<Self> {
        let ncols = variables.len();
        let mut cells = Vec::with_capacity(rows.len() * ncols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::Validation(format!(
                    "row {r} has {} cells, expected {ncols}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                if v as usize >= variables[c].cardinality() {
                    return Err(Error::Validation(format!(
                        "row {r}, column {}: state index {v} out of range",
                        variables[c].name
                    )));
                }
                cells.push(v);
            }
        }
        Ok(DiscreteTable {
            id: NEXT_TABLE_ID.fetch_add(1, Ordering::Relaxed),
            n: rows.len(),
            variables,
            cells,
        })
    }

    /// Unique per-process identity, used as a cache key.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    pub fn value(&self, row: usize, col: usize) -> u32 {
        self.cells[row * self.variables.len() + col]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Render as CSV with category labels.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            &self
                .variables
                .iter()
                .map(|v| v.name.as_str())
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        for r in 0..self.n {
            let row: Vec<&str> = (0..self.variables.len())
                .map(|c| self.variables[c].states[self.value(r, c) as usize].as_str())
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// One observational table plus interventional tables in processing order.
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub observational: DiscreteTable,
    /// (table, intervention target columns)
    pub interventional: Vec<(DiscreteTable, BTreeSet<usize>)>,
}

impl DatasetBundle {
    pub fn variables(&self) -> &[VariableSpec] {
        &self.observational.variables
    }

    pub fn num_vars(&self) -> usize {
        self.observational.variables.len()
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub targets: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub observational: String,
    #[serde(default)]
    pub interventional: Vec<ManifestEntry>,
}

/// Raw CSV as label strings, pre state-space resolution.
struct RawTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_raw_csv(path: &Path) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row: Vec<String> = rec.iter().map(|s| s.trim().to_string()).collect();
        if row.len() != header.len() {
            return Err(Error::Validation(format!(
                "{}: row {} has {} cells, expected {}",
                path.display(),
                i + 1,
                row.len(),
                header.len()
            )));
        }
        if row.iter().any(|c| c.is_empty()) {
            return Err(Error::Validation(format!(
                "{}: row {} has a missing value",
                path.display(),
                i + 1
            )));
        }
        rows.push(row);
    }
    Ok(RawTable { header, rows })
}

/// Load a manifest and its referenced CSV files into a bundle.
///
/// State spaces are the sorted union of the labels observed per column
/// across all tables, so a table missing some state (e.g. after forcing a
/// target) still shares the bundle-wide space. Unequal sample sizes are
/// reported as a warning, not an error.
pub fn load_manifest(path: &Path) -> Result<DatasetBundle> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::Validation(format!("bad manifest {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &str| -> PathBuf {
        let pb = PathBuf::from(p);
        if pb.is_absolute() {
            pb
        } else {
            base.join(pb)
        }
    };

    let obs_raw = read_raw_csv(&resolve(&manifest.observational))?;
    let mut int_raws = Vec::new();
    for entry in &manifest.interventional {
        let raw = read_raw_csv(&resolve(&entry.path))?;
        if raw.header != obs_raw.header {
            return Err(Error::Validation(format!(
                "{}: column header does not match observational table",
                entry.path
            )));
        }
        int_raws.push(raw);
    }

    // bundle-wide state spaces
    let ncols = obs_raw.header.len();
    let mut label_sets: Vec<BTreeSet<String>> = vec![BTreeSet::new(); ncols];
    for raw in std::iter::once(&obs_raw).chain(int_raws.iter()) {
        for row in &raw.rows {
            for (c, label) in row.iter().enumerate() {
                label_sets[c].insert(label.clone());
            }
        }
    }
    let variables: Vec<VariableSpec> = obs_raw
        .header
        .iter()
        .zip(label_sets.iter())
        .map(|(name, labels)| VariableSpec {
            name: name.clone(),
            states: labels.iter().cloned().collect(),
        })
        .collect();
    for v in &variables {
        if v.cardinality() < 2 {
            return Err(Error::Validation(format!(
                "variable {} has fewer than 2 observed states",
                v.name
            )));
        }
    }

    let index_rows = |raw: &RawTable| -> Vec<Vec<u32>> {
        raw.rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(c, label)| {
                        variables[c]
                            .states
                            .iter()
                            .position(|s| s == label)
                            .expect("label in union") as u32
                    })
                    .collect()
            })
            .collect()
    };

    let observational = DiscreteTable::new(variables.clone(), index_rows(&obs_raw))?;
    let mut interventional = Vec::new();
    for (entry, raw) in manifest.interventional.iter().zip(int_raws.iter()) {
        let mut targets = BTreeSet::new();
        for t in &entry.targets {
            let col = obs_raw
                .header
                .iter()
                .position(|h| h == t)
                .ok_or_else(|| Error::Validation(format!("unknown target variable {t:?}")))?;
            targets.insert(col);
        }
        let table = DiscreteTable::new(variables.clone(), index_rows(raw))?;
        interventional.push((table, targets));
    }

    let n0 = observational.sample_size();
    if interventional.iter().any(|(t, _)| t.sample_size() != n0) {
        eprintln!(
            "warning: interventional sample sizes differ from the observational table ({n0}); \
             scores that assume equal sizes are computed anyway"
        );
    }
    Ok(DatasetBundle {
        observational,
        interventional,
    })
}

/// Counts n_ijk for one child and parent set. Parent configurations are
/// indexed mixed-radix over the parents in ascending column order, later
/// parents least significant; configurations never observed are absent.
#[derive(Debug, Clone)]
pub struct ContingencyCounts {
    pub child: usize,
    pub parents: Vec<usize>,
    pub child_card: usize,
    /// total parent configuration count q_i
    pub q: u64,
    /// parent config index -> per-child-state counts
    pub cells: BTreeMap<u64, Vec<u64>>,
    pub sample_size: u64,
}

impl ContingencyCounts {
    pub fn parent_marginal(&self, cfg: u64) -> u64 {
        self.cells.get(&cfg).map(|v| v.iter().sum()).unwrap_or(0)
    }
}

pub fn count(table: &DiscreteTable, child: usize, parents: &[usize]) -> Result<ContingencyCounts> {
    if parents.contains(&child) {
        return Err(Error::Domain(format!(
            "child {} appears in its own parent set",
            table.variables[child].name
        )));
    }
    let mut parents: Vec<usize> = parents.to_vec();
    parents.sort_unstable();
    parents.dedup();
    let child_card = table.variables[child].cardinality();
    let q: u64 = parents
        .iter()
        .map(|&p| table.variables[p].cardinality() as u64)
        .product();
    let mut cells: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for r in 0..table.sample_size() {
        let mut cfg = 0u64;
        for &p in &parents {
            cfg = cfg * table.variables[p].cardinality() as u64 + table.value(r, p) as u64;
        }
        let k = table.value(r, child) as usize;
        cells.entry(cfg).or_insert_with(|| vec![0; child_card])[k] += 1;
    }
    Ok(ContingencyCounts {
        child,
        parents,
        child_card,
        q,
        cells,
        sample_size: table.sample_size() as u64,
    })
}

/// Concurrent-safe memo of contingency counts keyed by
/// (table id, child, parent set).
type CountKey = (u64, usize, Vec<usize>);

#[derive(Default)]
pub struct CountCache {
    inner: Mutex<HashMap<CountKey, Arc<ContingencyCounts>>>,
}

impl CountCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(
        &self,
        table: &DiscreteTable,
        child: usize,
        parents: &[usize],
    ) -> Result<Arc<ContingencyCounts>> {
        let mut key_parents: Vec<usize> = parents.to_vec();
        key_parents.sort_unstable();
        key_parents.dedup();
        let key = (table.id(), child, key_parents);
        if let Some(hit) = self.inner.lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        let computed = Arc::new(count(table, child, parents)?);
        let mut guard = self.inner.lock().unwrap();
        let entry = guard.entry(key).or_insert_with(|| Arc::clone(&computed));
        Ok(Arc::clone(entry))
    }
}
