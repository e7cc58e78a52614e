//! Synthetic datasets with planted structure.
//!
//! The generator draws ports, international routes and capitals, builds the
//! unweighted network, and then derives every economic quantity from it:
//!
//! * trade value `T = 1e9 (TRADE_BASE + TRADE_GC·Gc + TRADE_GB·Gb₂) + noise·1e9·TRADE_SD·z`
//! * exports are a uniform share of `T` in `[0.3, 0.7]`, imports the rest
//! * GDP is `T` times a uniform factor in `[2, 6]`
//! * LSCI is `5 + 30·Gc/max Gc` plus a uniform `[0, 40)` component
//! * later trade is `T + 1e9 (CHANGE_BASE + CHANGE_GB·Gb₂) + noise·1e9·CHANGE_SD·z`
//! * bilateral trade follows `ln BTV = β₀ + 0.8 ln(GDPᵢ GDPⱼ) − 1.1 ln d + noise·GRAVITY_SD·ε`,
//!   with `β₀` chosen so that the median country's bilateral total equals its trade value
//! * LSBCI of connected pairs is `exp(−1 + noise·LSBCI_SHARE·ε + 0.3 u)` capped at 1, so it
//!   carries part of the gravity residual
//!
//! Money is rounded to whole dollars, coordinates to 4 decimals. Everything the
//! planted laws read is rounded first, so `noise = 0` gives exact relationships
//! up to that rounding. The constants are also written to `truth.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use glsn_core::gravity::{connected_country_pairs, great_circle_km};
use glsn_core::ingest::{write_bilateral, write_country_econ, write_ports, write_routes, write_routes_meta, PortTable};
use glsn_core::{build_glsn, BilateralRecord, CountryEcon, CountryIndexTable, Port, ServiceRoute, WeightScheme};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::json;

use crate::inputs::{BILATERAL_FILE, COUNTRIES_FILE, PORTS_FILE, ROUTES_FILE, ROUTES_META_FILE};

pub const TRADE_BASE: f64 = 5.0;
pub const TRADE_GC: f64 = 1.0;
pub const TRADE_GB: f64 = 2.0;
pub const TRADE_SD: f64 = 2.0;
pub const CHANGE_BASE: f64 = 0.5;
pub const CHANGE_GB: f64 = 0.3;
pub const CHANGE_SD: f64 = 0.3;
pub const BETA_GDP: f64 = 0.8;
pub const BETA_DISTANCE: f64 = -1.1;
pub const GRAVITY_SD: f64 = 0.4;
pub const LSBCI_SHARE: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureParams {
    pub seed: u64,
    pub ports: usize,
    pub countries: usize,
    pub routes: usize,
    pub noise: f64,
}

impl Default for FixtureParams {
    fn default() -> Self {
        FixtureParams {
            seed: 42,
            ports: 30,
            countries: 6,
            routes: 12,
            noise: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub params: FixtureParams,
    pub ports: Vec<Port>,
    pub routes: Vec<ServiceRoute>,
    pub econ: Vec<CountryEcon>,
    pub bilateral: Vec<BilateralRecord>,
    /// Intercept of the planted gravity law.
    pub beta0: f64,
}

fn country_code(i: usize) -> String {
    let a = (b'A' + (i / 26) as u8) as char;
    let b = (b'A' + (i % 26) as u8) as char;
    format!("X{a}{b}")
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (x * f).round() / f
}

fn z(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn generate(params: FixtureParams) -> Result<Fixture> {
    let FixtureParams {
        seed,
        ports: n_ports,
        countries: n_countries,
        routes: n_routes,
        noise,
    } = params;
    if n_countries < 2 {
        bail!("a fixture needs at least 2 countries for international routes, got {n_countries}");
    }
    if n_countries > 26 * 26 {
        bail!("at most {} countries supported", 26 * 26);
    }
    if n_ports < n_countries {
        bail!("need at least one port per country ({n_ports} ports, {n_countries} countries)");
    }
    if n_routes == 0 {
        bail!("a fixture needs at least one route");
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        bail!("noise must be a finite non-negative number, got {noise}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let codes: Vec<String> = (0..n_countries).map(country_code).collect();
    let width = n_ports.to_string().len().max(2);
    let mut owner: Vec<usize> = (0..n_countries).collect();
    owner.extend((n_countries..n_ports).map(|_| rng.random_range(0..n_countries)));
    owner.shuffle(&mut rng);
    let ports: Vec<Port> = owner
        .iter()
        .enumerate()
        .map(|(i, &c)| Port {
            port_id: format!("P{:0width$}", i + 1),
            name: format!("Harbour {} {}", codes[c], i + 1),
            country_code: codes[c].clone(),
        })
        .collect();

    // Routes: a seed pair from two countries, then distinct extra calls.
    let mut calls: Vec<Vec<usize>> = Vec::with_capacity(n_routes);
    for _ in 0..n_routes {
        let len = rng.random_range(3..=6).min(n_ports);
        let first = rng.random_range(0..n_ports);
        let foreign: Vec<usize> = (0..n_ports).filter(|&p| owner[p] != owner[first]).collect();
        let second = foreign[rng.random_range(0..foreign.len())];
        let mut route = vec![first, second];
        while route.len() < len {
            let p = rng.random_range(0..n_ports);
            if !route.contains(&p) {
                route.push(p);
            }
        }
        calls.push(route);
    }
    let covered: BTreeSet<usize> = calls.iter().flatten().copied().collect();
    for p in (0..n_ports).filter(|p| !covered.contains(p)) {
        let r = rng.random_range(0..n_routes);
        calls[r].push(p);
    }
    let routes: Vec<ServiceRoute> = calls
        .into_iter()
        .enumerate()
        .map(|(i, mut c)| {
            c.shuffle(&mut rng);
            if rng.random_bool(0.25) {
                c.push(c[0]); // circular service returning to its first port
            }
            ServiceRoute {
                route_id: format!("R{:03}", i + 1),
                port_calls: c.iter().map(|&p| ports[p].port_id.clone()).collect(),
                capacity_teu: Some(rng.random_range(5..=200) as f64 * 100.0),
            }
        })
        .collect();

    let table = PortTable::new(ports.clone())?;
    let glsn = build_glsn(&routes, &table, WeightScheme::Unweighted)?;
    let indices = CountryIndexTable::compute(&glsn, &[2], &[]);
    let gc = |c: &str| indices.get(c).map_or(0.0, |r| r.gc);
    let gb = |c: &str| indices.get(c).map_or(0.0, |r| r.gb[&2]);
    let max_gc = codes.iter().map(|c| gc(c)).fold(0.0, f64::max).max(1.0);

    let mut econ = Vec::with_capacity(n_countries);
    for code in &codes {
        let signal = TRADE_BASE + TRADE_GC * gc(code) + TRADE_GB * gb(code);
        let trade = (1e9 * (signal + noise * TRADE_SD * z(&mut rng))).max(1e8).round();
        let export = (trade * rng.random_range(0.3..0.7)).round();
        let gdp = (trade * rng.random_range(2.0..6.0)).round();
        let lsci = round_to(5.0 + 30.0 * gc(code) / max_gc + rng.random_range(0.0..40.0), 2);
        let change = CHANGE_BASE + CHANGE_GB * gb(code) + noise * CHANGE_SD * z(&mut rng);
        let later = (trade + 1e9 * change).max(1e8).round();
        econ.push(CountryEcon {
            country_code: code.clone(),
            trade_value_usd: Some(trade),
            export_usd: Some(export),
            import_usd: Some(trade - export),
            gdp_usd: Some(gdp),
            lsci: Some(lsci),
            capital_lat: Some(round_to(rng.random_range(-55.0..65.0), 4)),
            capital_lon: Some(round_to(rng.random_range(-180.0..180.0), 4)),
            trade_value_later_usd: Some(later),
        });
    }

    // Gravity law without intercept, then the intercept that centres coverage on 1.
    let connected = connected_country_pairs(&glsn);
    let mut pairs = Vec::new();
    for i in 0..n_countries {
        for j in i + 1..n_countries {
            let (a, b) = (&econ[i], &econ[j]);
            let d = great_circle_km(
                a.capital_lat.unwrap(),
                a.capital_lon.unwrap(),
                b.capital_lat.unwrap(),
                b.capital_lon.unwrap(),
            )
            .max(1.0);
            let eps = z(&mut rng);
            let u = z(&mut rng);
            let ln_rest = BETA_GDP * (a.gdp_usd.unwrap().ln() + b.gdp_usd.unwrap().ln())
                + BETA_DISTANCE * d.ln()
                + noise * GRAVITY_SD * eps;
            let linked = connected.contains(&(codes[i].clone(), codes[j].clone()));
            let lsbci =
                linked.then(|| round_to((-1.0 + noise * LSBCI_SHARE * eps + 0.3 * u).exp().min(1.0), 4).max(1e-4));
            pairs.push((i, j, ln_rest, lsbci));
        }
    }
    let mut partner_sum = vec![0.0; n_countries];
    for &(i, j, ln_rest, _) in &pairs {
        partner_sum[i] += ln_rest.exp();
        partner_sum[j] += ln_rest.exp();
    }
    let mut ratios: Vec<f64> = (0..n_countries)
        .map(|i| (econ[i].trade_value_usd.unwrap() / partner_sum[i]).ln())
        .collect();
    ratios.sort_by(f64::total_cmp);
    let beta0 = round_to(ratios[n_countries / 2], 6);

    let bilateral = pairs
        .into_iter()
        .map(|(i, j, ln_rest, lsbci)| BilateralRecord {
            country_i: codes[i].clone(),
            country_j: codes[j].clone(),
            btv_usd: (beta0 + ln_rest).exp().round(),
            lsbci,
        })
        .collect();

    Ok(Fixture {
        params,
        ports,
        routes,
        econ,
        bilateral,
        beta0,
    })
}

impl Fixture {
    pub fn truth(&self) -> serde_json::Value {
        let p = &self.params;
        json!({
            "generator": {"seed": p.seed, "ports": p.ports, "countries": p.countries, "routes": p.routes, "noise": p.noise},
            "trade_value_usd": {
                "law": "1e9 * (base + gc * Gc + gb * Gb_L2) + noise * 1e9 * sd * z",
                "base": TRADE_BASE, "gc": TRADE_GC, "gb": TRADE_GB, "sd": TRADE_SD,
                "planted_regressors": ["Gc", "Gb"],
            },
            "trade_change_usd": {
                "law": "1e9 * (base + gb * Gb_L2) + noise * 1e9 * sd * z",
                "base": CHANGE_BASE, "gb": CHANGE_GB, "sd": CHANGE_SD,
            },
            "bilateral": {
                "law": "ln BTV = beta0 + beta_gdp * ln(GDP_i GDP_j) + beta_distance * ln d_km + noise * sd * eps",
                "beta0": self.beta0, "beta_gdp": BETA_GDP, "beta_distance": BETA_DISTANCE, "sd": GRAVITY_SD,
                "lsbci": "exp(-1 + noise * share * eps + 0.3 u), capped at 1, connected pairs only",
                "lsbci_share": LSBCI_SHARE,
            },
        })
    }

    /// Writes the standard input files plus `truth.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let put = |name: &str, bytes: Vec<u8>| {
            let path = dir.join(name);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
        };
        let mut buf = Vec::new();
        write_ports(&self.ports, &mut buf)?;
        put(PORTS_FILE, std::mem::take(&mut buf))?;
        write_routes(&self.routes, &mut buf)?;
        put(ROUTES_FILE, std::mem::take(&mut buf))?;
        write_routes_meta(&self.routes, &mut buf)?;
        put(ROUTES_META_FILE, std::mem::take(&mut buf))?;
        write_country_econ(&self.econ, &mut buf)?;
        put(COUNTRIES_FILE, std::mem::take(&mut buf))?;
        write_bilateral(&self.bilateral, &mut buf)?;
        put(BILATERAL_FILE, std::mem::take(&mut buf))?;
        let mut truth = serde_json::to_string_pretty(&self.truth())?;
        truth.push('\n');
        put("truth.json", truth.into_bytes())
    }
}

/// Trade value and the planted network indices behind it, per country.
pub fn planted_inputs(fixture: &Fixture) -> Result<BTreeMap<String, (f64, f64)>> {
    let table = PortTable::new(fixture.ports.clone())?;
    let g = build_glsn(&fixture.routes, &table, WeightScheme::Unweighted)?;
    let idx = CountryIndexTable::compute(&g, &[2], &[]);
    Ok(idx
        .rows
        .iter()
        .map(|r| (r.country_code.clone(), (r.gc, r.gb[&2])))
        .collect())
}
