//! Port network built by clique projection of service routes.
//!
//! Every route links each pair of its distinct ports. A pair's weight is the sum
//! over all routes serving both ports of that route's per-pair weight, which
//! depends on the [`WeightScheme`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{PortTable, ServiceRoute};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightScheme {
    /// Binary network; every present edge has weight 1.
    Unweighted,
    /// 1 per route.
    One,
    /// 1/(n-1) per route.
    InvN1,
    /// 1/(n(n-1)/2) per route.
    InvPairs,
    /// C per route.
    Cap,
    /// C/(n-1) per route.
    CapN1,
    /// C/(n(n-1)/2) per route.
    CapPairs,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 7] = [
        WeightScheme::Unweighted,
        WeightScheme::One,
        WeightScheme::InvN1,
        WeightScheme::InvPairs,
        WeightScheme::Cap,
        WeightScheme::CapN1,
        WeightScheme::CapPairs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightScheme::Unweighted => "none",
            WeightScheme::One => "one",
            WeightScheme::InvN1 => "inv_n1",
            WeightScheme::InvPairs => "inv_pairs",
            WeightScheme::Cap => "cap",
            WeightScheme::CapN1 => "cap_n1",
            WeightScheme::CapPairs => "cap_pairs",
        }
    }

    pub fn uses_capacity(self) -> bool {
        matches!(self, WeightScheme::Cap | WeightScheme::CapN1 | WeightScheme::CapPairs)
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WeightScheme::ALL
            .into_iter()
            .find(|w| w.name() == s || (s == "unweighted" && *w == WeightScheme::Unweighted))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown weighting scheme `{s}`")))
    }
}

/// Per-pair weight a route with `n` distinct ports and capacity `capacity` contributes.
pub fn route_edge_weight(n: usize, capacity: Option<f64>, scheme: WeightScheme) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewPorts(n));
    }
    let n = n as f64;
    let pairs = n * (n - 1.0) / 2.0;
    let cap = || {
        capacity.ok_or(Error::MissingCapacity {
            scheme: scheme.name(),
            route: "?".into(),
        })
    };
    Ok(match scheme {
        WeightScheme::Unweighted | WeightScheme::One => 1.0,
        WeightScheme::InvN1 => 1.0 / (n - 1.0),
        WeightScheme::InvPairs => 1.0 / pairs,
        WeightScheme::Cap => cap()?,
        WeightScheme::CapN1 => cap()? / (n - 1.0),
        WeightScheme::CapPairs => cap()? / pairs,
    })
}

/// Undirected, loop-free port graph. Nodes are indexed in `port_id` order.
#[derive(Debug, Clone)]
pub struct Glsn {
    scheme: WeightScheme,
    port_ids: Vec<String>,
    countries: Vec<String>,
    index: HashMap<String, usize>,
    edges: BTreeMap<(usize, usize), f64>,
    adjacency: Vec<Vec<usize>>,
}

impl Glsn {
    /// Assembles a graph from `(port_id, country)` nodes and weighted port pairs.
    ///
    /// Nodes without edges are kept as isolated ports.
    pub fn new<N, E>(scheme: WeightScheme, nodes: N, edges: E) -> Result<Glsn>
    where
        N: IntoIterator<Item = (String, String)>,
        E: IntoIterator<Item = ((String, String), f64)>,
    {
        let mut node_map: BTreeMap<String, String> = BTreeMap::new();
        for (port, country) in nodes {
            if country.is_empty() {
                return Err(Error::Validation(format!("port `{port}` has no country")));
            }
            if node_map.insert(port.clone(), country).is_some() {
                return Err(Error::Duplicate {
                    kind: "port_id",
                    key: port,
                });
            }
        }
        let (port_ids, countries): (Vec<String>, Vec<String>) = node_map.into_iter().unzip();
        let index: HashMap<String, usize> = port_ids.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();

        let mut edge_map = BTreeMap::new();
        for ((a, b), w) in edges {
            let ia = *index.get(&a).ok_or_else(|| Error::UnknownPort(a.clone()))?;
            let ib = *index.get(&b).ok_or_else(|| Error::UnknownPort(b.clone()))?;
            if ia == ib {
                return Err(Error::Validation(format!("self-loop on port `{a}`")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::Validation(format!("invalid weight {w} on {a}-{b}")));
            }
            let key = (ia.min(ib), ia.max(ib));
            if edge_map.insert(key, w).is_some() {
                return Err(Error::Duplicate {
                    kind: "edge",
                    key: format!("{a}-{b}"),
                });
            }
        }

        let mut adjacency = vec![Vec::new(); port_ids.len()];
        for &(u, v) in edge_map.keys() {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Glsn {
            scheme,
            port_ids,
            countries,
            index,
            edges: edge_map,
            adjacency,
        })
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn node_count(&self) -> usize {
        self.port_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn port_id(&self, node: usize) -> &str {
        &self.port_ids[node]
    }

    pub fn country(&self, node: usize) -> &str {
        &self.countries[node]
    }

    pub fn index_of(&self, port_id: &str) -> Option<usize> {
        self.index.get(port_id).copied()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.edges.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v).is_some()
    }

    /// Edges as `(u, v, weight)` with `u < v`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    /// Distinct country codes in sorted order.
    pub fn country_codes(&self) -> Vec<&str> {
        let mut codes: Vec<&str> = self.countries.iter().map(String::as_str).collect();
        codes.sort_unstable();
        codes.dedup();
        codes
    }

    /// Node indices per country, both sorted.
    pub fn ports_by_country(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut map: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, c) in self.countries.iter().enumerate() {
            map.entry(c.as_str()).or_default().push(i);
        }
        map
    }

    /// Same graph with one more port that has no edges.
    pub fn with_isolated_port(&self, port_id: &str, country: &str) -> Result<Glsn> {
        let nodes = self
            .port_ids
            .iter()
            .cloned()
            .zip(self.countries.iter().cloned())
            .chain(std::iter::once((port_id.to_string(), country.to_string())));
        let edges = self
            .edges()
            .map(|(u, v, w)| ((self.port_ids[u].clone(), self.port_ids[v].clone()), w))
            .collect::<Vec<_>>();
        Glsn::new(self.scheme, nodes, edges)
    }
}

/// Projects every route onto a clique of its distinct ports and sums weights per pair.
///
/// Routes are processed in `route_id` order, so the floating-point sums do not
/// depend on input order. Under [`WeightScheme::Unweighted`] every edge ends up
/// with weight exactly 1. Capacity schemes keep an edge even if its routes all
/// report zero capacity, so every scheme shares the same edge set.
pub fn build_glsn(routes: &[ServiceRoute], ports: &PortTable, scheme: WeightScheme) -> Result<Glsn> {
    let mut ordered: Vec<&ServiceRoute> = routes.iter().collect();
    ordered.sort_by(|a, b| {
        a.route_id
            .cmp(&b.route_id)
            .then_with(|| a.port_calls.cmp(&b.port_calls))
    });

    let mut nodes: BTreeMap<String, String> = BTreeMap::new();
    let mut weights: BTreeMap<(String, String), f64> = BTreeMap::new();
    for route in ordered {
        let distinct = route.distinct_ports();
        let w = route_edge_weight(distinct.len(), route.capacity_teu, scheme).map_err(|e| match e {
            Error::MissingCapacity { scheme, .. } => Error::MissingCapacity {
                scheme,
                route: route.route_id.clone(),
            },
            e => e,
        })?;
        for p in &distinct {
            let country = ports.country_of(p).ok_or_else(|| Error::UnknownPort(p.to_string()))?;
            nodes.insert(p.to_string(), country.to_string());
        }
        // `distinct` is sorted, so (a, b) with a < b is already the canonical key.
        for (i, a) in distinct.iter().enumerate() {
            for b in &distinct[i + 1..] {
                *weights.entry((a.to_string(), b.to_string())).or_insert(0.0) += w;
            }
        }
    }
    if scheme == WeightScheme::Unweighted {
        for w in weights.values_mut() {
            *w = 1.0;
        }
    }
    Glsn::new(scheme, nodes, weights)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub ports_per_country: BTreeMap<String, usize>,
}

pub fn graph_stats(g: &Glsn) -> GraphStats {
    GraphStats {
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        ports_per_country: g
            .ports_by_country()
            .into_iter()
            .map(|(c, ps)| (c.to_string(), ps.len()))
            .collect(),
    }
}

/// Writes `port_u,port_v,weight` rows, pairs in lexicographic order.
pub fn write_edge_list<W: Write>(g: &Glsn, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["port_u", "port_v", "weight"])?;
    for (u, v, weight) in g.edges() {
        w.write_record([g.port_id(u), g.port_id(v), &weight.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
