//! Shared oracles for integration tests: d-separation by moralization,
//! exhaustive DAG enumeration, brute-force skeleton search and inducing
//! path enumeration. Deliberately written against first principles rather
//! than the library's own graph algorithms.

#![allow(dead_code)]
// adjacency matrices are clearest with plain index loops
#![allow(clippy::needless_range_loop)]

use causalfuse::data::DiscreteTable;
use causalfuse::graph::MixedGraph;
use causalfuse::indep::{g2_test, CiOptions};
use std::collections::BTreeSet;

/// A DAG as an adjacency matrix: `adj[a][b]` means a -> b.
pub type AdjDag = Vec<Vec<bool>>;

pub fn to_mixed(adj: &AdjDag, names: &[String]) -> MixedGraph {
    let mut g = MixedGraph::new(names.to_vec());
    let n = adj.len();
    for a in 0..n {
        for b in 0..n {
            if adj[a][b] {
                g.add_directed(a, b);
            }
        }
    }
    g
}

fn is_acyclic(adj: &AdjDag) -> bool {
    let n = adj.len();
    let mut indeg = vec![0usize; n];
    for row in adj {
        for (b, &e) in row.iter().enumerate() {
            if e {
                indeg[b] += 1;
            }
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut done = 0;
    while let Some(v) = ready.pop() {
        done += 1;
        for b in 0..n {
            if adj[v][b] {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.push(b);
                }
            }
        }
    }
    done == n
}

/// Every DAG on n nodes, by choosing none / a->b / b->a per unordered pair
/// and filtering the cyclic candidates.
pub fn all_dags(n: usize) -> Vec<AdjDag> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    let total = 3usize.pow(pairs.len() as u32);
    for code in 0..total {
        let mut adj = vec![vec![false; n]; n];
        let mut c = code;
        for &(a, b) in &pairs {
            match c % 3 {
                1 => adj[a][b] = true,
                2 => adj[b][a] = true,
                _ => {}
            }
            c /= 3;
        }
        if is_acyclic(&adj) {
            out.push(adj);
        }
    }
    out
}

fn ancestral_closure(adj: &AdjDag, seed: &BTreeSet<usize>) -> BTreeSet<usize> {
    let n = adj.len();
    let mut out = seed.clone();
    loop {
        let mut grew = false;
        for a in 0..n {
            if !out.contains(&a) && (0..n).any(|b| adj[a][b] && out.contains(&b)) {
                out.insert(a);
                grew = true;
            }
        }
        if !grew {
            return out;
        }
    }
}

/// d-separation via the moralized ancestral graph: restrict to the
/// ancestral closure of {x, y} ∪ z, marry co-parents, drop directions, and
/// test undirected separation of x from y by z.
pub fn d_separated(adj: &AdjDag, x: usize, y: usize, z: &BTreeSet<usize>) -> bool {
    let n = adj.len();
    let mut seed = z.clone();
    seed.insert(x);
    seed.insert(y);
    let anc = ancestral_closure(adj, &seed);
    let mut undirected = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            if adj[a][b] && anc.contains(&a) && anc.contains(&b) {
                undirected[a][b] = true;
                undirected[b][a] = true;
            }
        }
    }
    for c in 0..n {
        if !anc.contains(&c) {
            continue;
        }
        let parents: Vec<usize> = (0..n).filter(|&p| adj[p][c] && anc.contains(&p)).collect();
        for i in 0..parents.len() {
            for j in i + 1..parents.len() {
                undirected[parents[i]][parents[j]] = true;
                undirected[parents[j]][parents[i]] = true;
            }
        }
    }
    // BFS from x avoiding z
    let mut seen = vec![false; n];
    let mut stack = vec![x];
    seen[x] = true;
    while let Some(v) = stack.pop() {
        if v == y {
            return false;
        }
        for w in 0..n {
            if undirected[v][w] && !seen[w] && !z.contains(&w) {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    true
}

fn subsets(items: &[usize], max_size: usize) -> Vec<BTreeSet<usize>> {
    let mut out = Vec::new();
    for code in 0u32..(1 << items.len()) {
        let s: BTreeSet<usize> = items
            .iter()
            .enumerate()
            .filter(|&(i, _)| code & (1 << i) != 0)
            .map(|(_, &v)| v)
            .collect();
        if s.len() <= max_size {
            out.push(s);
        }
    }
    out
}

/// The full conditional-independence signature of a DAG: every ordered-up
/// pair with every conditioning subset. Two DAGs are Markov equivalent iff
/// these signatures coincide.
pub fn dsep_signature(adj: &AdjDag) -> Vec<bool> {
    let n = adj.len();
    let mut sig = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
            for z in subsets(&rest, n) {
                sig.push(d_separated(adj, x, y, &z));
            }
        }
    }
    sig
}

/// Brute-force skeleton: keep the edge (a, b) unless some conditioning set
/// over all other variables up to size k makes the pair independent.
pub fn brute_force_skeleton(table: &DiscreteTable, t: f64, k: usize, opts: &CiOptions) -> MixedGraph {
    let n = table.variables.len();
    let names: Vec<String> = table.variables.iter().map(|v| v.name.clone()).collect();
    let mut g = MixedGraph::new(names);
    for a in 0..n {
        for b in a + 1..n {
            let rest: Vec<usize> = (0..n).filter(|&v| v != a && v != b).collect();
            let mut separated = false;
            for z in subsets(&rest, k) {
                if let Some(res) = g2_test(table, a, b, &z, opts).unwrap() {
                    if res.p_value > t {
                        separated = true;
                        break;
                    }
                }
            }
            if !separated {
                g.add_undirected(a, b);
            }
        }
    }
    g
}

/// All simple paths between two nodes, ignoring edge direction.
fn simple_paths(adj: &AdjDag, from: usize, to: usize) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut out = Vec::new();
    let mut path = vec![from];
    fn go(adj: &AdjDag, n: usize, to: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if v == to {
            out.push(path.clone());
            return;
        }
        for w in 0..n {
            if (adj[v][w] || adj[w][v]) && !path.contains(&w) {
                path.push(w);
                go(adj, n, to, path, out);
                path.pop();
            }
        }
    }
    go(adj, n, to, &mut path, &mut out);
    out
}

/// Inducing-path check by exhaustive simple-path enumeration: every
/// non-endpoint node must be a collider on the path and an ancestor of an
/// endpoint, or a non-collider and latent.
pub fn has_inducing_path_brute(
    adj: &AdjDag,
    a: usize,
    b: usize,
    latents: &BTreeSet<usize>,
) -> bool {
    let anc_a = ancestral_closure(adj, &[a].into_iter().collect());
    let anc_b = ancestral_closure(adj, &[b].into_iter().collect());
    'paths: for path in simple_paths(adj, a, b) {
        for i in 1..path.len() - 1 {
            let (p, v, q) = (path[i - 1], path[i], path[i + 1]);
            let collider = adj[p][v] && adj[q][v];
            if collider {
                if !(anc_a.contains(&v) || anc_b.contains(&v)) {
                    continue 'paths;
                }
            } else if !latents.contains(&v) {
                continue 'paths;
            }
        }
        return true;
    }
    false
}

/// MAG over the observed nodes built directly from the brute-force
/// inducing-path test plus ancestry.
pub fn latent_project_brute(adj: &AdjDag, latents: &BTreeSet<usize>, names: &[String]) -> MixedGraph {
    let n = adj.len();
    let observed: Vec<usize> = (0..n).filter(|v| !latents.contains(v)).collect();
    let obs_names: Vec<String> = observed.iter().map(|&v| names[v].clone()).collect();
    let mut mag = MixedGraph::new(obs_names);
    for (i, &a) in observed.iter().enumerate() {
        for (j, &b) in observed.iter().enumerate().skip(i + 1) {
            if !has_inducing_path_brute(adj, a, b, latents) {
                continue;
            }
            let anc_a = ancestral_closure(adj, &[a].into_iter().collect());
            let anc_b = ancestral_closure(adj, &[b].into_iter().collect());
            if anc_b.contains(&a) {
                mag.add_directed(i, j);
            } else if anc_a.contains(&b) {
                mag.add_directed(j, i);
            } else {
                mag.add_bidirected(i, j);
            }
        }
    }
    mag
}

use causalfuse::synth::BayesNetSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;

/// Random sparse binary network with strong parent effects, used as ground
/// truth for sampling-based tests.
pub fn random_net(n: usize, seed: u64) -> BayesNetSpec {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..n).map(|i| format!("X{i}")).collect();
    let mut parents: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut cpts: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    let mut parent_idx: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 1..n {
        for i in 0..j {
            if parent_idx[j].len() < 2 && rng.gen_bool(0.4) {
                parent_idx[j].push(i);
            }
        }
    }
    for v in 0..n {
        let pa = &parent_idx[v];
        parents.insert(names[v].clone(), pa.iter().map(|&p| names[p].clone()).collect());
        let base: f64 = rng.gen_range(0.25..0.75);
        let effects: Vec<f64> = pa.iter().map(|_| rng.gen_range(0.3..0.45)).collect();
        let q = 1usize << pa.len();
        let mut rows = Vec::with_capacity(q);
        for cfg in 0..q {
            let mut p1 = base;
            for (slot, &eff) in effects.iter().enumerate() {
                // first-listed parent is the most significant digit
                let bit = (cfg >> (pa.len() - 1 - slot)) & 1;
                p1 += if bit == 1 { eff } else { -eff };
            }
            let p1 = p1.clamp(0.04, 0.96);
            rows.push(vec![1.0 - p1, p1]);
        }
        cpts.insert(names[v].clone(), rows);
    }
    BayesNetSpec {
        variables: names
            .iter()
            .map(|nm| causalfuse::data::VariableSpec {
                name: nm.clone(),
                states: vec!["0".into(), "1".into()],
            })
            .collect(),
        parents,
        cpts,
    }
}

use causalfuse::data::DatasetBundle;
use causalfuse::synth::{intervene_sample, mask_latents};

/// Observational plus `sets` single-target interventional tables from one
/// network, with targets cycling through the observed nodes and all
/// randomness fixed by `seed`.
pub fn make_bundle(
    spec: &BayesNetSpec,
    latents: &BTreeSet<usize>,
    n: usize,
    sets: usize,
    seed: u64,
) -> DatasetBundle {
    let observable: Vec<usize> = (0..spec.variables.len())
        .filter(|v| !latents.contains(v))
        .collect();
    let obs = mask_latents(
        &intervene_sample(spec, &BTreeSet::new(), n, seed * 1000 + 1).unwrap(),
        latents,
    );
    let mut interventional = Vec::new();
    for s in 0..sets {
        let target = observable[s % observable.len()];
        let t: BTreeSet<usize> = [target].into_iter().collect();
        let table = mask_latents(
            &intervene_sample(spec, &t, n, seed * 1000 + 2 + s as u64).unwrap(),
            latents,
        );
        let masked: BTreeSet<usize> = [observable.iter().position(|&o| o == target).unwrap()]
            .into_iter()
            .collect();
        interventional.push((table, masked));
    }
    DatasetBundle {
        observational: obs,
        interventional,
    }
}
