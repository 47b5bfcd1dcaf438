//! Posterior fusion of observational and interventional evidence into a
//! PAG: the three prior factors, the per-dataset posterior update, and
//! final graph construction with cycle repair.

use crate::data::{DatasetBundle, DiscreteTable};
use crate::error::Result;
use crate::graph::{render_graph, Mark, MixedGraph};
use crate::indep::{learn_skeleton, triple_sepset_ratio, CiOptions, SepsetCatalog, TripleRatio};
use crate::score::{relative_change, BdeuParams, PairMarginals, Scorer};
use crate::search::{learn_cpdag, SearchConfig};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct HyperParams {
    /// CI-test significance threshold
    pub t: f64,
    /// posterior cut-off for edge selection
    pub c: f64,
    /// maximum Sepset size
    pub k: usize,
    pub params: BdeuParams,
    /// which of the three prior factors participate (ablation variants)
    pub factor_mask: BTreeSet<u8>,
    pub ci: CiOptions,
    pub search: SearchConfig,
    /// restrict the score-change factor to pairs whose undirected edge
    /// appears in the interventional CPDAG; without this restriction,
    /// noise-level score changes push every 0.5 prior past the cut-off
    pub factor3_requires_edge: bool,
    /// score the intervention change with parents taken from the
    /// interventional CPDAG instead of the marginal distribution
    pub factor3_parents_from_cpdag: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            t: 0.05,
            c: 0.5,
            k: 10,
            params: BdeuParams::default(),
            factor_mask: [1, 2, 3].into_iter().collect(),
            ci: CiOptions::default(),
            search: SearchConfig::default(),
            factor3_requires_edge: true,
            factor3_parents_from_cpdag: false,
        }
    }
}

/// Evidence accumulated while processing data sets in order.
#[derive(Debug, Default, Clone)]
pub struct FactorLedger {
    /// learnt CPDAGs with their intervention targets; entry 0 is the
    /// observational CPDAG with an empty target set
    pub cpdags: Vec<(MixedGraph, BTreeSet<usize>)>,
    /// (source, child, dataset index, relative score change); sources are
    /// always targets of the named data set
    pub score_changes: Vec<(usize, usize, usize, f64)>,
}

/// Occurrence-rate factor of a directed edge over all learnt CPDAGs.
///
/// A directed edge counts fully; an undirected edge counts half for the
/// out-of-target direction when one endpoint was intervened on (and is
/// excluded entirely when neither was); 0/0 yields 0.
pub fn factor1(ledger: &FactorLedger, a: usize, b: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (cpdag, targets) in &ledger.cpdags {
        if cpdag.has_directed_edge(a, b) {
            num += 1.0;
            den += 1.0;
        } else if cpdag.has_directed_edge(b, a) {
            den += 1.0;
        } else if cpdag.has_undirected_edge(a, b) {
            if targets.contains(&a) {
                num += 0.5;
                den += 1.0;
            }
            if targets.contains(&b) {
                den += 1.0;
            }
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Per-ordered-pair probabilities from the Sepset ratios of unshielded
/// triples: edges into a collider candidate get 1 - ratio when the ratio
/// is below one half, 0.5 otherwise; reverse edges get 0.5; a pair seen in
/// several triples takes the maximum.
pub fn factor2_map(triples: &[TripleRatio]) -> BTreeMap<(usize, usize), f64> {
    let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut bump = |key: (usize, usize), v: f64| {
        let entry = map.entry(key).or_insert(0.0);
        if v > *entry {
            *entry = v;
        }
    };
    for tr in triples {
        let (a, b, c) = tr.triple;
        let into = match tr.ratio {
            Some(r) if r < 0.5 => 1.0 - r,
            Some(_) => 0.5,
            None => 0.5, // no Sepset at all: no evidence either way
        };
        bump((a, b), into);
        bump((c, b), into);
        bump((b, a), 0.5);
        bump((b, c), 0.5);
    }
    map
}

/// Accumulated relative score changes for a directed edge across all
/// processed interventional data sets where the source was a target.
pub fn factor3(ledger: &FactorLedger, a: usize, b: usize) -> f64 {
    ledger
        .score_changes
        .iter()
        .filter(|&&(src, dst, _, _)| src == a && dst == b)
        .map(|&(_, _, _, v)| v)
        .sum()
}

/// Fused prior: max of the first two factors plus the score-change sum,
/// clamped to [0, 1], never below the previous posterior.
pub fn combine_prior(f1: f64, f2: f64, f3_sum: f64, previous_posterior: f64) -> f64 {
    let raw = (f1.max(f2) + f3_sum).clamp(0.0, 1.0);
    raw.max(previous_posterior)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// A -> B
    Forward,
    /// A <- B
    Backward,
}

/// Bayes update of a directed-edge probability against the likelihood
/// ratio of the two competing orientations, computed in log space.
///
/// With a score-equivalent likelihood the two orientations score
/// identically and the posterior falls back to the prior exactly; the
/// probability mass separating the directions then comes entirely from the
/// prior factors. Sub-epsilon log ratios are treated as zero so floating
/// rounding in equivalent scores cannot tip a probability across the
/// strict selection cut-off.
pub fn posterior_update(p: f64, marginals: &PairMarginals, dir: Direction) -> f64 {
    assert!((0.0..=1.0).contains(&p), "prior out of range: {p}");
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    let d = match dir {
        Direction::Forward => marginals.log_ab - marginals.log_ba,
        Direction::Backward => marginals.log_ba - marginals.log_ab,
    };
    if d.abs() < 1e-6 {
        return p;
    }
    // posterior log-odds = prior log-odds + log likelihood ratio
    let x = (p / (1.0 - p)).ln() + d;
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct EdgeProb {
    pub factor1: f64,
    pub factor2: f64,
    pub factor3_sum: f64,
    pub prior: f64,
    pub posterior: f64,
}

/// Posterior state per ordered node pair.
#[derive(Debug, Clone, Default)]
pub struct EdgeProbTable {
    pub entries: BTreeMap<(usize, usize), EdgeProb>,
}

impl EdgeProbTable {
    pub fn posterior(&self, a: usize, b: usize) -> f64 {
        self.entries.get(&(a, b)).map(|e| e.posterior).unwrap_or(0.0)
    }

    pub fn to_json(&self, names: &[String]) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(&(a, b), e)| {
                serde_json::json!({
                    "source": names[a],
                    "target": names[b],
                    "factor1": e.factor1,
                    "factor2": e.factor2,
                    "factor3_sum": e.factor3_sum,
                    "prior": e.prior,
                    "posterior": e.posterior,
                })
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CpdagDiagnostic {
    pub graph: String,
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct Diagnostics {
    pub skeleton: String,
    /// unordered pair -> number of distinct separating sets found
    pub sepset_counts: BTreeMap<String, usize>,
    pub cpdags: Vec<CpdagDiagnostic>,
    pub stage_millis: BTreeMap<String, u128>,
}

#[derive(Debug, Clone)]
pub struct LearnOutput {
    pub pag: MixedGraph,
    pub probs: EdgeProbTable,
    pub diagnostics: Diagnostics,
}

/// Build the output PAG from posteriors: both directions above the cut-off
/// give a bidirected edge, one gives that directed edge, neither keeps a
/// circle edge where the skeleton had one. Directed or almost directed
/// cycles are then repaired by removing the weakest participating edge.
pub fn build_pag(probs: &EdgeProbTable, u: &MixedGraph, c: f64) -> MixedGraph {
    let n = u.node_count();
    let mut pag = MixedGraph::new(u.names().to_vec());
    for a in 0..n {
        for b in a + 1..n {
            let pab = probs.posterior(a, b);
            let pba = probs.posterior(b, a);
            if pab > c && pba > c {
                pag.add_bidirected(a, b);
            } else if pab > c {
                pag.add_directed(a, b);
            } else if pba > c {
                pag.add_directed(b, a);
            } else if u.adjacent(a, b) {
                pag.set_edge(a, b, Mark::Circle, Mark::Circle);
            }
        }
    }
    // cycle repair
    while let Some(cycle_edges) = find_cycle_edges(&pag) {
        let weakest = cycle_edges
            .iter()
            .map(|&(a, b)| {
                let support = if pag.has_bidirected_edge(a, b) {
                    probs.posterior(a, b).min(probs.posterior(b, a))
                } else {
                    probs.posterior(a, b)
                };
                (support, a.min(b), a.max(b), a, b)
            })
            .min_by(|x, y| x.partial_cmp(y).expect("finite posteriors"))
            .expect("nonempty cycle");
        pag.remove_edge(weakest.3, weakest.4);
    }
    pag
}

/// Edges participating in one directed or almost directed cycle, as
/// directed (from, to) pairs for directed edges or (a, b) for the
/// bidirected edge. Deterministic: lowest-index cycle found first.
fn find_cycle_edges(g: &MixedGraph) -> Option<Vec<(usize, usize)>> {
    let n = g.node_count();
    // directed cycle via DFS with an explicit stack path
    let mut color = vec![0u8; n]; // 0 white, 1 on stack, 2 done
    let mut path: Vec<usize> = Vec::new();
    fn dfs(
        v: usize,
        g: &MixedGraph,
        color: &mut [u8],
        path: &mut Vec<usize>,
    ) -> Option<Vec<(usize, usize)>> {
        color[v] = 1;
        path.push(v);
        for w in g.children(v) {
            if color[w] == 1 {
                let start = path.iter().position(|&x| x == w).unwrap();
                let mut edges = Vec::new();
                for i in start..path.len() - 1 {
                    edges.push((path[i], path[i + 1]));
                }
                edges.push((v, w));
                return Some(edges);
            }
            if color[w] == 0 {
                if let Some(found) = dfs(w, g, color, path) {
                    return Some(found);
                }
            }
        }
        path.pop();
        color[v] = 2;
        None
    }
    for v in 0..n {
        if color[v] == 0 {
            if let Some(found) = dfs(v, g, &mut color, &mut path) {
                return Some(found);
            }
        }
    }
    // almost directed cycle: bidirected a <-> b with a directed path
    // between the endpoints
    for (a, b, ma, mb) in g.edges() {
        if (ma, mb) != (Mark::Arrow, Mark::Arrow) {
            continue;
        }
        for (src, dst) in [(b, a), (a, b)] {
            if let Some(mut path_edges) = directed_path_edges(g, src, dst) {
                path_edges.push((a, b));
                return Some(path_edges);
            }
        }
    }
    None
}

fn directed_path_edges(g: &MixedGraph, from: usize, to: usize) -> Option<Vec<(usize, usize)>> {
    let n = g.node_count();
    let mut prev = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    let mut seen = vec![false; n];
    seen[from] = true;
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut edges = Vec::new();
            let mut cur = to;
            while cur != from {
                edges.push((prev[cur], cur));
                cur = prev[cur];
            }
            edges.reverse();
            return Some(edges);
        }
        for w in g.children(v) {
            if !seen[w] {
                seen[w] = true;
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

fn masked(mask: &BTreeSet<u8>, factor: u8, value: f64) -> f64 {
    if mask.contains(&factor) {
        value
    } else {
        0.0
    }
}

/// Marginal (or optionally CPDAG-conditioned) local score of `node` used by
/// the intervention change statistic.
fn factor3_local(
    scorer: &Scorer,
    table: &DiscreteTable,
    node: usize,
    cpdag: &MixedGraph,
    from_cpdag: bool,
) -> Result<f64> {
    let parents = if from_cpdag { cpdag.parents(node) } else { Vec::new() };
    scorer.local(table, node, &parents)
}

/// The full learning procedure over an ordered data-set bundle.
pub fn learn_pag(bundle: &DatasetBundle, hyper: &HyperParams) -> Result<LearnOutput> {
    let nvars = bundle.num_vars();
    let names: Vec<String> = bundle.variables().iter().map(|v| v.name.clone()).collect();
    let scorer = Scorer::new(hyper.params);
    let mut search = hyper.search;
    search.params = hyper.params;
    let mut diag = Diagnostics::default();
    let obs = &bundle.observational;

    // Step 1: skeleton and separating sets from observational data
    let t0 = Instant::now();
    let (u, mut catalog) = learn_skeleton(obs, hyper.t, hyper.k, &hyper.ci)?;
    diag.stage_millis
        .insert("skeleton".into(), t0.elapsed().as_millis());
    diag.skeleton = render_graph(&u);

    // Step 2: Sepset ratios of unshielded triples (skipped entirely when
    // the factor is masked out)
    let t0 = Instant::now();
    let mut triples = Vec::new();
    if hyper.factor_mask.contains(&2) {
        for triple in u.unshielded_triples() {
            triples.push(triple_sepset_ratio(
                obs,
                triple,
                &u,
                hyper.t,
                hyper.k,
                &hyper.ci,
                &mut catalog,
            )?);
        }
    }
    let f2map = factor2_map(&triples);
    record_sepsets(&mut diag, &catalog, &names);
    diag.stage_millis
        .insert("triples".into(), t0.elapsed().as_millis());

    // Step 3: observational CPDAG
    let t0 = Instant::now();
    let mut ledger = FactorLedger::default();
    let obs_cpdag = learn_cpdag(obs, &search, &scorer)?;
    push_cpdag_diag(&mut diag, &obs_cpdag, &BTreeSet::new(), &names);
    ledger.cpdags.push((obs_cpdag, BTreeSet::new()));
    diag.stage_millis
        .insert("cpdag_obs".into(), t0.elapsed().as_millis());

    // Step 4: initial priors and the first posterior pass
    let t0 = Instant::now();
    let mut probs = EdgeProbTable::default();
    let first_table: &DiscreteTable = bundle
        .interventional
        .first()
        .map(|(t, _)| t)
        .unwrap_or(obs);
    let mut marginal_cache: BTreeMap<(usize, usize), PairMarginals> = BTreeMap::new();
    for a in 0..nvars {
        for b in 0..nvars {
            if a == b {
                continue;
            }
            let f1v = masked(&hyper.factor_mask, 1, factor1(&ledger, a, b));
            let f2v = masked(
                &hyper.factor_mask,
                2,
                f2map.get(&(a, b)).copied().unwrap_or(0.0),
            );
            let prior = f1v.max(f2v);
            let key = (a.min(b), a.max(b));
            if let std::collections::btree_map::Entry::Vacant(e) = marginal_cache.entry(key) {
                e.insert(scorer.pair_marginals(first_table, key.0, key.1)?);
            }
            let m = marginal_cache[&key];
            let dir = if a < b { Direction::Forward } else { Direction::Backward };
            let posterior = posterior_update(prior, &m, dir);
            probs.entries.insert(
                (a, b),
                EdgeProb {
                    factor1: f1v,
                    factor2: f2v,
                    factor3_sum: 0.0,
                    prior,
                    posterior,
                },
            );
        }
    }
    diag.stage_millis
        .insert("initial_posteriors".into(), t0.elapsed().as_millis());

    // Step 5: iterate over the remaining interventional data sets; the
    // data set being scored never contributes to its own prior
    let t0 = Instant::now();
    let m_sets = bundle.interventional.len();
    for i in 1..m_sets {
        let (table_i, targets_i) = &bundle.interventional[i - 1];
        let cpdag_i = learn_cpdag(table_i, &search, &scorer)?;
        push_cpdag_diag(&mut diag, &cpdag_i, targets_i, &names);
        if hyper.factor_mask.contains(&3) {
            for &a in targets_i {
                for b in 0..nvars {
                    if b == a {
                        continue;
                    }
                    if hyper.factor3_requires_edge && !cpdag_i.has_undirected_edge(a, b) {
                        continue;
                    }
                    let z_obs = factor3_local(
                        &scorer,
                        obs,
                        b,
                        &cpdag_i,
                        hyper.factor3_parents_from_cpdag,
                    )?;
                    let z_int = factor3_local(
                        &scorer,
                        table_i,
                        b,
                        &cpdag_i,
                        hyper.factor3_parents_from_cpdag,
                    )?;
                    ledger
                        .score_changes
                        .push((a, b, i, relative_change(z_obs, z_int)));
                }
            }
        }
        ledger.cpdags.push((cpdag_i, targets_i.clone()));

        let (next_table, _) = &bundle.interventional[i];
        let mut next_marginals: BTreeMap<(usize, usize), PairMarginals> = BTreeMap::new();
        for a in 0..nvars {
            for b in 0..nvars {
                if a == b {
                    continue;
                }
                let f1v = masked(&hyper.factor_mask, 1, factor1(&ledger, a, b));
                let f2v = masked(
                    &hyper.factor_mask,
                    2,
                    f2map.get(&(a, b)).copied().unwrap_or(0.0),
                );
                let f3v = masked(&hyper.factor_mask, 3, factor3(&ledger, a, b));
                let prev = probs.posterior(a, b);
                let prior = combine_prior(f1v, f2v, f3v, prev);
                let key = (a.min(b), a.max(b));
                if let std::collections::btree_map::Entry::Vacant(e) = next_marginals.entry(key) {
                    e.insert(scorer.pair_marginals(next_table, key.0, key.1)?);
                }
                let m = next_marginals[&key];
                let dir = if a < b { Direction::Forward } else { Direction::Backward };
                let posterior = posterior_update(prior, &m, dir);
                probs.entries.insert(
                    (a, b),
                    EdgeProb {
                        factor1: f1v,
                        factor2: f2v,
                        factor3_sum: f3v,
                        prior,
                        posterior,
                    },
                );
            }
        }
    }
    diag.stage_millis
        .insert("interventional_passes".into(), t0.elapsed().as_millis());

    // Steps 6-7: final PAG
    let t0 = Instant::now();
    let pag = build_pag(&probs, &u, hyper.c);
    diag.stage_millis
        .insert("build_pag".into(), t0.elapsed().as_millis());

    Ok(LearnOutput {
        pag,
        probs,
        diagnostics: diag,
    })
}

fn record_sepsets(diag: &mut Diagnostics, catalog: &SepsetCatalog, names: &[String]) {
    for ((a, b), seps) in catalog.pairs() {
        diag.sepset_counts
            .insert(format!("{}|{}", names[a], names[b]), seps.len());
    }
}

fn push_cpdag_diag(
    diag: &mut Diagnostics,
    cpdag: &MixedGraph,
    targets: &BTreeSet<usize>,
    names: &[String],
) {
    diag.cpdags.push(CpdagDiagnostic {
        graph: render_graph(cpdag),
        targets: targets.iter().map(|&t| names[t].clone()).collect(),
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(names: &[&str]) -> MixedGraph {
        MixedGraph::new(names.iter().map(|s| s.to_string()).collect())
    }

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn factor1_directed_occurrence() {
        // X -> Y twice, X <- Y once over three CPDAGs
        let names = ["X", "Y"];
        let mut c1 = g(&names);
        c1.add_directed(0, 1);
        let mut c2 = g(&names);
        c2.add_directed(0, 1);
        let mut c3 = g(&names);
        c3.add_directed(1, 0);
        let ledger = FactorLedger {
            cpdags: vec![
                (c1, BTreeSet::new()),
                (c2, set(&[0])),
                (c3, set(&[1])),
            ],
            score_changes: vec![],
        };
        assert!((factor1(&ledger, 0, 1) - 2.0 / 3.0).abs() < 1e-12);
        assert!((factor1(&ledger, 1, 0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn factor1_undirected_with_target() {
        // W - V undirected in an observational CPDAG (no contribution), no
        // edge in a second, W - V with W targeted in a third
        let names = ["W", "V"];
        let mut c1 = g(&names);
        c1.add_undirected(0, 1);
        let c2 = g(&names);
        let mut c3 = g(&names);
        c3.add_undirected(0, 1);
        let ledger = FactorLedger {
            cpdags: vec![
                (c1, BTreeSet::new()),
                (c2, set(&[1])),
                (c3, set(&[0])),
            ],
            score_changes: vec![],
        };
        assert!((factor1(&ledger, 0, 1) - 0.5).abs() < 1e-12);
        assert_eq!(factor1(&ledger, 1, 0), 0.0);
    }

    #[test]
    fn factor1_absent_pair_is_zero() {
        let ledger = FactorLedger {
            cpdags: vec![(g(&["A", "B"]), BTreeSet::new())],
            score_changes: vec![],
        };
        assert_eq!(factor1(&ledger, 0, 1), 0.0);
    }

    #[test]
    fn factor1_directions_sum_below_one() {
        // property over a handful of hand ledgers
        let names = ["A", "B"];
        let mut c1 = g(&names);
        c1.add_undirected(0, 1);
        let mut c2 = g(&names);
        c2.add_directed(0, 1);
        let ledger = FactorLedger {
            cpdags: vec![(c1, set(&[0, 1])), (c2, set(&[1]))],
            score_changes: vec![],
        };
        let s = factor1(&ledger, 0, 1) + factor1(&ledger, 1, 0);
        assert!(s <= 1.0 + 1e-12, "sum = {s}");
    }

    #[test]
    fn factor2_reference_ratio() {
        // triple (V, X, Y) with Sepset ratio 1/3
        let triples = [TripleRatio {
            triple: (0, 1, 2),
            ratio: Some(1.0 / 3.0),
        }];
        let map = factor2_map(&triples);
        assert!((map[&(0, 1)] - 0.667).abs() < 1e-3);
        assert!((map[&(2, 1)] - 0.667).abs() < 1e-3);
        assert_eq!(map[&(1, 0)], 0.5);
        assert_eq!(map[&(1, 2)], 0.5);
    }

    #[test]
    fn factor2_majority_ratio_gives_half() {
        let triples = [TripleRatio {
            triple: (0, 1, 2),
            ratio: Some(0.6),
        }];
        let map = factor2_map(&triples);
        for key in [(0, 1), (2, 1), (1, 0), (1, 2)] {
            assert_eq!(map[&key], 0.5);
        }
    }

    #[test]
    fn factor2_undefined_ratio_neutral() {
        let triples = [TripleRatio {
            triple: (0, 1, 2),
            ratio: None,
        }];
        let map = factor2_map(&triples);
        assert_eq!(map[&(0, 1)], 0.5);
    }

    #[test]
    fn factor3_sums_entries() {
        let ledger = FactorLedger {
            cpdags: vec![],
            score_changes: vec![(0, 1, 1, 0.01), (0, 1, 2, 0.02), (1, 0, 1, 0.5)],
        };
        assert!((factor3(&ledger, 0, 1) - 0.03).abs() < 1e-12);
        assert_eq!(factor3(&ledger, 2, 0), 0.0);
    }

    #[test]
    fn combine_prior_reference_rows() {
        assert!((combine_prior(0.75, 0.67, 0.0119, 0.0) - 0.7619).abs() < 1e-9);
        assert!((combine_prior(0.5, 0.0, 0.0174, 0.0) - 0.5174).abs() < 1e-9);
        assert_eq!(combine_prior(0.0, 0.0, 0.0, 0.0), 0.0);
        // clamping and posterior folding
        assert_eq!(combine_prior(1.0, 0.0, 0.5, 0.0), 1.0);
        assert_eq!(combine_prior(0.1, 0.0, 0.0, 0.4), 0.4);
    }

    #[test]
    fn posterior_update_fixed_points() {
        let m = PairMarginals {
            log_empty: -100.0,
            log_ab: -96.0,
            log_ba: -98.0,
        };
        assert_eq!(posterior_update(0.0, &m, Direction::Forward), 0.0);
        assert_eq!(posterior_update(1.0, &m, Direction::Forward), 1.0);
        // score-equivalent likelihoods carry no directional information
        let flat = PairMarginals {
            log_empty: -55.0,
            log_ab: -50.0,
            log_ba: -50.0 + 1e-10,
        };
        for p in [0.1, 0.3, 0.5, 0.9] {
            let post = posterior_update(p, &flat, Direction::Forward);
            assert_eq!(post, p);
        }
        // p = 0.5 with log ratio 2: e^2 / (1 + e^2)
        let m2 = PairMarginals {
            log_empty: -12.0,
            log_ab: -8.0,
            log_ba: -10.0,
        };
        let post = posterior_update(0.5, &m2, Direction::Forward);
        let expect = (2f64).exp() / (1.0 + (2f64).exp());
        assert!((post - expect).abs() < 1e-12);
        assert!((post - 0.8808).abs() < 1e-4);
    }

    #[test]
    fn posterior_update_extreme_ratios_stay_in_range() {
        let m = PairMarginals {
            log_empty: -3e6,
            log_ab: -1.0,
            log_ba: -2e6,
        };
        let hi = posterior_update(0.5, &m, Direction::Forward);
        let lo = posterior_update(0.5, &m, Direction::Backward);
        assert!(hi > 0.999999 && hi <= 1.0);
        assert!((0.0..1e-6).contains(&lo));
    }

    fn put(probs: &mut EdgeProbTable, a: usize, b: usize, p: f64) {
        probs.entries.insert(
            (a, b),
            EdgeProb {
                posterior: p,
                ..Default::default()
            },
        );
    }

    #[test]
    fn build_pag_selection_rules() {
        let mut u = g(&["A", "B", "C"]);
        u.add_undirected(0, 1);
        let mut probs = EdgeProbTable::default();
        put(&mut probs, 0, 1, 0.9);
        put(&mut probs, 1, 0, 0.8);
        let pag = build_pag(&probs, &u, 0.5);
        assert!(pag.has_bidirected_edge(0, 1));

        put(&mut probs, 0, 1, 0.8);
        put(&mut probs, 1, 0, 0.2);
        let pag = build_pag(&probs, &u, 0.5);
        assert!(pag.has_directed_edge(0, 1));

        put(&mut probs, 0, 1, 0.3);
        put(&mut probs, 1, 0, 0.3);
        let pag = build_pag(&probs, &u, 0.5);
        assert_eq!(pag.edge_between(0, 1), Some((Mark::Circle, Mark::Circle)));
        // no skeleton edge for (0, 2): nothing emitted
        assert!(!pag.adjacent(0, 2));
    }

    #[test]
    fn build_pag_removes_weakest_cycle_edge() {
        let u = g(&["A", "B", "C"]);
        let mut probs = EdgeProbTable::default();
        put(&mut probs, 0, 1, 0.9);
        put(&mut probs, 1, 2, 0.8);
        put(&mut probs, 2, 0, 0.6);
        let pag = build_pag(&probs, &u, 0.5);
        assert!(pag.has_directed_edge(0, 1));
        assert!(pag.has_directed_edge(1, 2));
        assert!(!pag.adjacent(2, 0));
        assert!(!pag.has_almost_directed_cycle());
    }

    #[test]
    fn build_pag_repairs_almost_directed_cycle() {
        let u = g(&["A", "B", "C"]);
        let mut probs = EdgeProbTable::default();
        // A <-> B (weak) with B -> C -> A (strong)
        put(&mut probs, 0, 1, 0.55);
        put(&mut probs, 1, 0, 0.56);
        put(&mut probs, 1, 2, 0.9);
        put(&mut probs, 2, 0, 0.9);
        let pag = build_pag(&probs, &u, 0.5);
        assert!(!pag.has_almost_directed_cycle());
        assert!(pag.has_directed_edge(1, 2));
        assert!(pag.has_directed_edge(2, 0));
        assert!(!pag.adjacent(0, 1));
    }
}
