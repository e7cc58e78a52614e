//! Exhaustive reference computations for small graphs.
//!
//! Every shortest path of every pair is materialized explicitly by depth-limited
//! search and the index definitions are applied to the literal path lists. This
//! shares no code with the layered counting in [`super::paths`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::Glsn;

pub const MAX_ORACLE_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    GlsnBetweenness { l_max: usize },
    Freeman,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutput {
    /// Per-country brokerage, every country of the graph present.
    GlsnBetweenness(BTreeMap<String, f64>),
    /// Per-node betweenness, indexed like the graph.
    Freeman(Vec<f64>),
}

pub fn brute_force_oracle(g: &Glsn, mode: OracleMode) -> Result<OracleOutput> {
    match mode {
        OracleMode::GlsnBetweenness { l_max } => oracle_glsn_betweenness(g, l_max).map(OracleOutput::GlsnBetweenness),
        OracleMode::Freeman => oracle_port_betweenness(g).map(OracleOutput::Freeman),
    }
}

fn check_size(g: &Glsn) -> Result<()> {
    if g.node_count() > MAX_ORACLE_NODES {
        return Err(Error::OracleTooLarge(g.node_count()));
    }
    Ok(())
}

fn hop_distance(g: &Glsn, s: usize, t: usize) -> Option<usize> {
    let mut seen = vec![false; g.node_count()];
    seen[s] = true;
    let mut frontier = VecDeque::from([(s, 0usize)]);
    while let Some((u, d)) = frontier.pop_front() {
        if u == t {
            return Some(d);
        }
        for &v in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                frontier.push_back((v, d + 1));
            }
        }
    }
    None
}

/// All simple `s`-`t` paths with exactly `len` edges.
fn paths_of_length(g: &Glsn, s: usize, t: usize, len: usize) -> Vec<Vec<usize>> {
    fn extend(g: &Glsn, t: usize, len: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().unwrap();
        if path.len() == len + 1 {
            if last == t {
                out.push(path.clone());
            }
            return;
        }
        for &v in g.neighbors(last) {
            if !path.contains(&v) {
                path.push(v);
                extend(g, t, len, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(g, t, len, &mut vec![s], &mut out);
    out
}

/// Every shortest path between `s` and `t`; empty when disconnected.
pub fn all_shortest_paths(g: &Glsn, s: usize, t: usize) -> Vec<Vec<usize>> {
    match hop_distance(g, s, t) {
        Some(d) if d > 0 => paths_of_length(g, s, t, d),
        _ => Vec::new(),
    }
}

pub fn oracle_glsn_betweenness(g: &Glsn, l_max: usize) -> Result<BTreeMap<String, f64>> {
    check_size(g)?;
    let mut gb: BTreeMap<String, f64> = g.country_codes().into_iter().map(|c| (c.to_string(), 0.0)).collect();
    let n = g.node_count();
    for s in 0..n {
        for t in s + 1..n {
            let (cs, ct) = (g.country(s), g.country(t));
            if cs == ct {
                continue;
            }
            let valid: Vec<Vec<usize>> = all_shortest_paths(g, s, t)
                .into_iter()
                .filter(|p| p.len() - 1 <= l_max)
                .filter(|p| {
                    p[1..p.len() - 1]
                        .iter()
                        .all(|&v| g.country(v) != cs && g.country(v) != ct)
                })
                .collect();
            if valid.is_empty() {
                continue;
            }
            let n_st = valid.len() as f64;
            for path in &valid {
                let through: BTreeSet<&str> = path[1..path.len() - 1].iter().map(|&v| g.country(v)).collect();
                for c in through {
                    *gb.get_mut(c).unwrap() += 1.0 / n_st;
                }
            }
        }
    }
    Ok(gb)
}

pub fn oracle_port_betweenness(g: &Glsn) -> Result<Vec<f64>> {
    check_size(g)?;
    let n = g.node_count();
    let mut b = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let paths = all_shortest_paths(g, s, t);
            if paths.is_empty() {
                continue;
            }
            let rho = paths.len() as f64;
            for (i, bi) in b.iter_mut().enumerate() {
                if i == s || i == t {
                    continue;
                }
                let sigma = paths.iter().filter(|p| p.contains(&i)).count() as f64;
                *bi += sigma / rho;
            }
        }
    }
    Ok(b)
}
