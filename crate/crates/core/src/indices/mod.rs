//! Country-level indices derived from the port network.
//!
//! - connectivity `gc`: total weight of edges joining the country's ports to
//!   foreign ports, and its per-port mean;
//! - brokerage `gb`: share of valid shortest paths between foreign port pairs
//!   that pass through the country (see [`paths`]);
//! - Freeman betweenness `fb`: sum and mean of port betweenness per country.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::error::Result;
use crate::graph::Glsn;
use crate::ingest::CountryEcon;
use crate::sum::compensated_sum;

pub mod oracle;
mod paths;

pub use oracle::{brute_force_oracle, OracleMode, OracleOutput};
pub use paths::{glsn_betweenness, glsn_betweenness_multi, port_betweenness, valid_shortest_path_profile, PathProfile};

/// Cut-offs always reported in `indices.csv`.
pub const STANDARD_L_MAX: [usize; 4] = [2, 3, 4, 5];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Connectivity {
    pub port_count: usize,
    pub gc: f64,
    pub gc_normalized: f64,
}

pub fn country_connectivity(g: &Glsn) -> BTreeMap<String, Connectivity> {
    let mut foreign: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (u, v, w) in g.edges() {
        let (cu, cv) = (g.country(u), g.country(v));
        if cu != cv {
            foreign.entry(cu).or_default().push(w);
            foreign.entry(cv).or_default().push(w);
        }
    }
    g.ports_by_country()
        .into_iter()
        .map(|(country, ports)| {
            let gc = foreign
                .get(country)
                .map(|ws| compensated_sum(ws.iter().copied()))
                .unwrap_or(0.0);
            let port_count = ports.len();
            (
                country.to_string(),
                Connectivity {
                    port_count,
                    gc,
                    gc_normalized: gc / port_count as f64,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Freeman {
    pub fb: f64,
    pub fb_normalized: f64,
}

/// Aggregates per-node betweenness (indexed like `g`) into country sums and means.
pub fn country_freeman(g: &Glsn, port_b: &[f64]) -> BTreeMap<String, Freeman> {
    g.ports_by_country()
        .into_iter()
        .map(|(country, ports)| {
            let fb = compensated_sum(ports.iter().map(|&p| port_b[p]));
            (
                country.to_string(),
                Freeman {
                    fb,
                    fb_normalized: fb / ports.len() as f64,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryIndices {
    pub country_code: String,
    pub port_count: usize,
    pub gc: f64,
    pub gc_normalized: f64,
    pub gb: BTreeMap<usize, f64>,
    pub fb: f64,
    pub fb_normalized: f64,
    pub lsci: Option<f64>,
}

/// Per-country indices, sorted by country code.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryIndexTable {
    pub l_max: Vec<usize>,
    pub rows: Vec<CountryIndices>,
}

impl CountryIndexTable {
    /// Computes every index of every country in `g`.
    ///
    /// `gc` follows the weighting scheme of `g`; `gb` and `fb` use hop counts
    /// only. `gb` is evaluated for the union of `l_max` and 2..=5.
    pub fn compute(g: &Glsn, l_max: &[usize], econ: &[CountryEcon]) -> CountryIndexTable {
        let cutoffs: BTreeSet<usize> = l_max
            .iter()
            .copied()
            .chain(STANDARD_L_MAX)
            .filter(|&l| l >= 1)
            .collect();
        let cutoffs: Vec<usize> = cutoffs.into_iter().collect();
        let connectivity = country_connectivity(g);
        let gb = glsn_betweenness_multi(g, &cutoffs);
        let freeman = country_freeman(g, &port_betweenness(g));
        let lsci: BTreeMap<&str, Option<f64>> = econ.iter().map(|e| (e.country_code.as_str(), e.lsci)).collect();

        let rows = connectivity
            .into_iter()
            .map(|(country, conn)| {
                let fb = freeman[&country];
                CountryIndices {
                    port_count: conn.port_count,
                    gc: conn.gc,
                    gc_normalized: conn.gc_normalized,
                    gb: gb.iter().map(|(&l, per)| (l, per[&country])).collect(),
                    fb: fb.fb,
                    fb_normalized: fb.fb_normalized,
                    lsci: lsci.get(country.as_str()).copied().flatten(),
                    country_code: country,
                }
            })
            .collect();
        CountryIndexTable { l_max: cutoffs, rows }
    }

    pub fn get(&self, country: &str) -> Option<&CountryIndices> {
        self.rows
            .binary_search_by(|r| r.country_code.as_str().cmp(country))
            .ok()
            .map(|i| &self.rows[i])
    }

    /// Writes `indices.csv`; cut-offs beyond 5 get extra `gb_l<k>` columns after `gb_l5`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["country_code", "port_count", "gc", "gc_norm"]
            .map(String::from)
            .to_vec();
        header.extend(self.l_max.iter().map(|l| format!("gb_l{l}")));
        header.extend(["fb", "fb_norm", "lsci"].map(String::from));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.country_code.clone(),
                r.port_count.to_string(),
                r.gc.to_string(),
                r.gc_normalized.to_string(),
            ];
            rec.extend(self.l_max.iter().map(|l| r.gb[l].to_string()));
            rec.push(r.fb.to_string());
            rec.push(r.fb_normalized.to_string());
            rec.push(r.lsci.map(|x| x.to_string()).unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
