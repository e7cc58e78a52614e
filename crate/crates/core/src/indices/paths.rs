//! Shortest-path machinery: valid-path counting and Brandes betweenness.
//!
//! A shortest `s`-`t` path is *valid* for a cut-off `l_max` when its length is at
//! most `l_max` and every intermediate port lies outside the countries of `s` and
//! `t`. Validity filters the shortest paths of the whole graph; longer valid
//! detours are never considered.
//!
//! Valid paths of one pair are counted on the layered subgraph
//! `layer_k = { v : d(s,v) = k, d(v,t) = d(s,t) - k, country(v) ∉ {c_s, c_t} }`
//! by dynamic programming. The number of valid paths touching country `c` is the
//! total minus the count obtained with `c`'s ports removed from the layers.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Glsn;
use crate::sum::CompensatedSum;

pub(crate) const UNREACHABLE: u32 = u32::MAX;

pub(crate) fn bfs_distances(g: &Glsn, source: usize) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; g.node_count()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if dist[v] == UNREACHABLE {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Hop distances between every pair of nodes, row-major.
pub(crate) struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    pub(crate) fn new(g: &Glsn) -> DistanceMatrix {
        let n = g.node_count();
        let rows: Vec<Vec<u32>> = (0..n).into_par_iter().map(|s| bfs_distances(g, s)).collect();
        DistanceMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    #[inline]
    pub(crate) fn get(&self, u: usize, v: usize) -> u32 {
        self.data[u * self.n + v]
    }
}

/// Valid shortest paths between one pair of ports.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathProfile {
    /// Number of valid shortest paths.
    pub n_st: u128,
    /// Per country, the number of valid shortest paths with at least one
    /// intermediate port in that country.
    pub delta: BTreeMap<String, u128>,
}

/// Country ids plus per-node country id, both in sorted code order.
pub(crate) struct CountryIndex {
    pub(crate) codes: Vec<String>,
    pub(crate) of_node: Vec<usize>,
}

impl CountryIndex {
    pub(crate) fn new(g: &Glsn) -> CountryIndex {
        let codes: Vec<String> = g.country_codes().into_iter().map(str::to_string).collect();
        let of_node = (0..g.node_count())
            .map(|v| codes.binary_search_by(|c| c.as_str().cmp(g.country(v))).unwrap())
            .collect();
        CountryIndex { codes, of_node }
    }
}

/// Scratch buffers reused across pairs of one source.
struct Scratch {
    count: Vec<u128>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl Scratch {
    fn new(n: usize) -> Scratch {
        Scratch {
            count: vec![0; n],
            stamp: vec![0; n],
            epoch: 0,
        }
    }
}

/// Layers of the valid shortest-path subgraph, excluding `s` and `t`.
fn valid_layers(
    g: &Glsn,
    dist: &DistanceMatrix,
    countries: &CountryIndex,
    s: usize,
    t: usize,
    d: u32,
    scratch: &mut Scratch,
) -> Vec<Vec<usize>> {
    let (cs, ct) = (countries.of_node[s], countries.of_node[t]);
    let mut layers: Vec<Vec<usize>> = Vec::with_capacity(d as usize - 1);
    let mut prev = vec![s];
    for k in 1..d {
        scratch.epoch = scratch.epoch.wrapping_add(1);
        if scratch.epoch == 0 {
            scratch.stamp.iter_mut().for_each(|x| *x = 0);
            scratch.epoch = 1;
        }
        let mut layer = Vec::new();
        for &u in &prev {
            for &v in g.neighbors(u) {
                if scratch.stamp[v] == scratch.epoch {
                    continue;
                }
                let cv = countries.of_node[v];
                if dist.get(s, v) == k && dist.get(v, t) == d - k && cv != cs && cv != ct {
                    scratch.stamp[v] = scratch.epoch;
                    layer.push(v);
                }
            }
        }
        if layer.is_empty() {
            return Vec::new();
        }
        layer.sort_unstable();
        prev = layer.clone();
        layers.push(layer);
    }
    layers
}

/// Counts `s`-`t` paths through the layers, skipping ports of `excluded`.
fn count_paths(
    g: &Glsn,
    countries: &CountryIndex,
    layers: &[Vec<usize>],
    s: usize,
    t: usize,
    excluded: Option<usize>,
    scratch: &mut Scratch,
) -> u128 {
    let allowed = |v: usize| Some(countries.of_node[v]) != excluded;
    let mut prev: &[usize] = std::slice::from_ref(&s);
    scratch.count[s] = 1;
    for layer in layers {
        for &v in layer {
            scratch.count[v] = 0;
        }
        for &u in prev {
            let cu = scratch.count[u];
            if cu == 0 {
                continue;
            }
            for &v in g.neighbors(u) {
                // layers are sorted
                if allowed(v) && layer.binary_search(&v).is_ok() {
                    scratch.count[v] += cu;
                }
            }
        }
        prev = layer;
    }
    let total = prev
        .iter()
        .filter(|&&u| g.has_edge(u, t))
        .map(|&u| scratch.count[u])
        .sum();
    for layer in layers {
        for &v in layer {
            scratch.count[v] = 0;
        }
    }
    scratch.count[s] = 0;
    total
}

/// `(n_st, [(country id, delta)])` for one cross-country pair.
fn pair_profile(
    g: &Glsn,
    dist: &DistanceMatrix,
    countries: &CountryIndex,
    s: usize,
    t: usize,
    l_max: u32,
    scratch: &mut Scratch,
) -> (u128, Vec<(usize, u128)>) {
    let d = dist.get(s, t);
    if d == UNREACHABLE || d == 0 || d > l_max {
        return (0, Vec::new());
    }
    if d == 1 {
        return (1, Vec::new());
    }
    let layers = valid_layers(g, dist, countries, s, t, d, scratch);
    if layers.is_empty() {
        return (0, Vec::new());
    }
    let n = count_paths(g, countries, &layers, s, t, None, scratch);
    if n == 0 {
        return (0, Vec::new());
    }
    let mut present: Vec<usize> = layers.iter().flatten().map(|&v| countries.of_node[v]).collect();
    present.sort_unstable();
    present.dedup();
    let delta = present
        .into_iter()
        .filter_map(|c| {
            let without = count_paths(g, countries, &layers, s, t, Some(c), scratch);
            let through = n - without;
            (through > 0).then_some((c, through))
        })
        .collect();
    (n, delta)
}

/// Valid shortest paths between ports `s` and `t` (node indices).
pub fn valid_shortest_path_profile(g: &Glsn, s: usize, t: usize, l_max: usize) -> Result<PathProfile> {
    if s >= g.node_count() || t >= g.node_count() {
        return Err(Error::InvalidArgument(format!("node index out of range: {s}, {t}")));
    }
    if g.country(s) == g.country(t) {
        return Err(Error::SameCountry {
            s: g.port_id(s).to_string(),
            t: g.port_id(t).to_string(),
            country: g.country(s).to_string(),
        });
    }
    let dist = DistanceMatrix::new(g);
    let countries = CountryIndex::new(g);
    let mut scratch = Scratch::new(g.node_count());
    let l_max = u32::try_from(l_max).unwrap_or(u32::MAX - 1);
    let (n_st, delta) = pair_profile(g, &dist, &countries, s, t, l_max, &mut scratch);
    Ok(PathProfile {
        n_st,
        delta: delta
            .into_iter()
            .map(|(c, k)| (countries.codes[c].clone(), k))
            .collect(),
    })
}

/// Country brokerage over valid shortest paths for several cut-offs at once.
///
/// Returns, for each requested `l_max`, a value for every country of `g`
/// (zero included), keyed by country code.
pub fn glsn_betweenness_multi(g: &Glsn, l_max: &[usize]) -> BTreeMap<usize, BTreeMap<String, f64>> {
    let mut cutoffs: Vec<usize> = l_max.to_vec();
    cutoffs.sort_unstable();
    cutoffs.dedup();
    let countries = CountryIndex::new(g);
    let nc = countries.codes.len();
    let n = g.node_count();
    let Some(&largest) = cutoffs.last() else {
        return BTreeMap::new();
    };
    let largest = u32::try_from(largest).unwrap_or(u32::MAX - 1);
    let dist = DistanceMatrix::new(g);

    // Per source: one compensated accumulator per (cut-off, country).
    let per_source: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut scratch = Scratch::new(n);
            let mut acc = vec![CompensatedSum::default(); cutoffs.len() * nc];
            for t in s + 1..n {
                if countries.of_node[s] == countries.of_node[t] {
                    continue;
                }
                let (n_st, delta) = pair_profile(g, &dist, &countries, s, t, largest, &mut scratch);
                if n_st == 0 || delta.is_empty() {
                    continue;
                }
                let d = dist.get(s, t) as usize;
                for (c, k) in delta {
                    let share = k as f64 / n_st as f64;
                    for (li, &l) in cutoffs.iter().enumerate() {
                        if d <= l {
                            acc[li * nc + c].add(share);
                        }
                    }
                }
            }
            acc.iter().map(CompensatedSum::value).collect()
        })
        .collect();

    let mut totals = vec![CompensatedSum::default(); cutoffs.len() * nc];
    for row in &per_source {
        for (t, v) in totals.iter_mut().zip(row) {
            t.add(*v);
        }
    }
    cutoffs
        .iter()
        .enumerate()
        .map(|(li, &l)| {
            let per_country = countries
                .codes
                .iter()
                .enumerate()
                .map(|(c, code)| (code.clone(), totals[li * nc + c].value()))
                .collect();
            (l, per_country)
        })
        .collect()
}

/// Country brokerage over valid shortest paths of length at most `l_max`.
pub fn glsn_betweenness(g: &Glsn, l_max: usize) -> BTreeMap<String, f64> {
    glsn_betweenness_multi(g, &[l_max]).remove(&l_max).unwrap_or_default()
}

/// Unnormalized shortest-path betweenness of every node over unordered pairs,
/// endpoints excluded, hop-count distances (Brandes' accumulation).
pub fn port_betweenness(g: &Glsn) -> Vec<f64> {
    let n = g.node_count();
    let per_source: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut order = Vec::with_capacity(n);
            let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
            let mut sigma = vec![0.0_f64; n];
            let mut dist = vec![UNREACHABLE; n];
            sigma[s] = 1.0;
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &w in g.neighbors(v) {
                    if dist[w] == UNREACHABLE {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                    if dist[w] == dist[v] + 1 {
                        sigma[w] += sigma[v];
                        preds[w].push(v);
                    }
                }
            }
            let mut dependency = vec![0.0_f64; n];
            while let Some(w) = order.pop() {
                for &v in &preds[w] {
                    dependency[v] += sigma[v] / sigma[w] * (1.0 + dependency[w]);
                }
            }
            dependency[s] = 0.0;
            dependency
        })
        .collect();

    let mut totals = vec![CompensatedSum::default(); n];
    for row in &per_source {
        for (t, v) in totals.iter_mut().zip(row) {
            t.add(*v);
        }
    }
    // Each unordered pair was visited from both endpoints.
    totals.iter().map(|t| t.value() / 2.0).collect()
}
