//! Parsing, serialization and validation of the input tables.
//!
//! All CSV inputs are UTF-8 with a mandatory header row. Columns are located by
//! header name, blank cells are "missing" (never zero), and lines starting with
//! `#` are treated as comments so that files written by the CLI can be read back.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub port_id: String,
    pub name: String,
    pub country_code: String,
}

/// One liner service: the ordered port calls and the deployed capacity in TEU.
///
/// Repeated calls (circular services) are kept in `port_calls`; the network
/// builder collapses them to one node per port.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceRoute {
    pub route_id: String,
    pub port_calls: Vec<String>,
    pub capacity_teu: Option<f64>,
}

impl ServiceRoute {
    /// Distinct ports of the route in lexicographic order.
    pub fn distinct_ports(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.port_calls.iter().map(String::as_str).collect();
        set.into_iter().collect()
    }

    pub fn distinct_port_count(&self) -> usize {
        self.distinct_ports().len()
    }

    /// Ports called more than once, in lexicographic order.
    pub fn repeated_calls(&self) -> Vec<&str> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for p in &self.port_calls {
            *counts.entry(p.as_str()).or_default() += 1;
        }
        counts.into_iter().filter(|&(_, c)| c > 1).map(|(p, _)| p).collect()
    }

    pub fn has_repeated_calls(&self) -> bool {
        !self.repeated_calls().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountryEcon {
    pub country_code: String,
    pub trade_value_usd: Option<f64>,
    pub export_usd: Option<f64>,
    pub import_usd: Option<f64>,
    pub gdp_usd: Option<f64>,
    pub lsci: Option<f64>,
    pub capital_lat: Option<f64>,
    pub capital_lon: Option<f64>,
    /// Trade value of a later year, used for the trade-change response.
    pub trade_value_later_usd: Option<f64>,
}

impl CountryEcon {
    pub fn net_export_usd(&self) -> Option<f64> {
        Some(self.export_usd? - self.import_usd?)
    }

    pub fn trade_change_usd(&self) -> Option<f64> {
        Some(self.trade_value_later_usd? - self.trade_value_usd?)
    }

    pub fn capital(&self) -> Option<(f64, f64)> {
        Some((self.capital_lat?, self.capital_lon?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilateralRecord {
    pub country_i: String,
    pub country_j: String,
    pub btv_usd: f64,
    pub lsbci: Option<f64>,
}

impl BilateralRecord {
    /// The unordered pair as a lexicographically ordered tuple.
    pub fn key(&self) -> (&str, &str) {
        ordered_pair(&self.country_i, &self.country_j)
    }

    pub fn involves(&self, country: &str) -> bool {
        self.country_i == country || self.country_j == country
    }
}

pub(crate) fn ordered_pair<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Port lookup keyed by `port_id`.
#[derive(Debug, Clone, Default)]
pub struct PortTable {
    ports: BTreeMap<String, Port>,
}

impl PortTable {
    pub fn new(ports: impl IntoIterator<Item = Port>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for p in ports {
            if p.country_code.is_empty() {
                return Err(Error::Validation(format!(
                    "port `{}` has an empty country code",
                    p.port_id
                )));
            }
            if map.contains_key(&p.port_id) {
                return Err(Error::Duplicate {
                    kind: "port_id",
                    key: p.port_id,
                });
            }
            map.insert(p.port_id.clone(), p);
        }
        Ok(PortTable { ports: map })
    }

    pub fn get(&self, port_id: &str) -> Option<&Port> {
        self.ports.get(port_id)
    }

    pub fn country_of(&self, port_id: &str) -> Option<&str> {
        self.ports.get(port_id).map(|p| p.country_code.as_str())
    }

    pub fn len(&self) -> usize {
        self.ports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ports.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Port> {
        self.ports.values()
    }
}

// ---------------------------------------------------------------------------
// CSV plumbing

struct Table {
    columns: HashMap<String, usize>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read<R: Read>(reader: R, required: &[&str]) -> Result<Table> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        // An empty stream has no header at all; treat it as an empty table.
        if headers.is_empty() {
            return Ok(Table {
                columns: HashMap::new(),
                rows: Vec::new(),
            });
        }
        let columns: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim_start_matches('\u{feff}').to_string(), i))
            .collect();
        for name in required {
            if !columns.contains_key(*name) {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("missing required column `{name}`"),
                });
            }
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                Error::Parse {
                    line,
                    message: e.to_string(),
                }
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            rows.push((line, rec));
        }
        Ok(Table { columns, rows })
    }

    /// Cell value; `None` when blank or when the column is absent.
    fn cell<'r>(&self, rec: &'r csv::StringRecord, name: &str) -> Option<&'r str> {
        let idx = *self.columns.get(name)?;
        rec.get(idx).filter(|s| !s.is_empty())
    }

    fn required<'r>(&self, rec: &'r csv::StringRecord, line: u64, name: &str) -> Result<&'r str> {
        self.cell(rec, name).ok_or_else(|| Error::Parse {
            line,
            message: format!("missing value for `{name}`"),
        })
    }

    fn optional_f64(&self, rec: &csv::StringRecord, line: u64, name: &str) -> Result<Option<f64>> {
        match self.cell(rec, name) {
            None => Ok(None),
            Some(s) => parse_finite(s, line, name).map(Some),
        }
    }
}

fn parse_finite(s: &str, line: u64, name: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{name}` is not a number: `{s}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("`{name}` is not finite: `{s}`"),
        });
    }
    Ok(v)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// Routes

/// Parses `route_id,seq,port_id` rows plus an optional `route_id,capacity_teu` table.
///
/// Routes come back sorted by `route_id`, calls ordered by `seq`.
pub fn parse_routes<R: Read, M: Read>(routes: R, meta: Option<M>) -> Result<Vec<ServiceRoute>> {
    let table = Table::read(routes, &["route_id", "seq", "port_id"])?;
    let mut calls: BTreeMap<String, BTreeMap<u64, String>> = BTreeMap::new();
    for (line, rec) in &table.rows {
        let line = *line;
        let route_id = table.required(rec, line, "route_id")?;
        let seq_raw = table.required(rec, line, "seq")?;
        let port_id = table.required(rec, line, "port_id")?;
        let seq: u64 = seq_raw.parse().ok().filter(|&s| s >= 1).ok_or_else(|| Error::Parse {
            line,
            message: format!("`seq` must be a positive integer, got `{seq_raw}`"),
        })?;
        let entry = calls.entry(route_id.to_string()).or_default();
        if entry.insert(seq, port_id.to_string()).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("route `{route_id}` repeats seq {seq}"),
            });
        }
    }

    let mut capacity: BTreeMap<String, Option<f64>> = BTreeMap::new();
    if let Some(meta) = meta {
        let table = Table::read(meta, &["route_id", "capacity_teu"])?;
        for (line, rec) in &table.rows {
            let line = *line;
            let route_id = table.required(rec, line, "route_id")?;
            let cap = table.optional_f64(rec, line, "capacity_teu")?;
            if let Some(c) = cap {
                if c < 0.0 {
                    return Err(Error::Parse {
                        line,
                        message: format!("route `{route_id}` has negative capacity {c}"),
                    });
                }
            }
            if !calls.contains_key(route_id) {
                return Err(Error::Parse {
                    line,
                    message: format!("capacity given for unknown route `{route_id}`"),
                });
            }
            if capacity.insert(route_id.to_string(), cap).is_some() {
                return Err(Error::Duplicate {
                    kind: "route_id",
                    key: route_id.to_string(),
                });
            }
        }
    }

    Ok(calls
        .into_iter()
        .map(|(route_id, seqs)| {
            let capacity_teu = capacity.get(&route_id).copied().flatten();
            ServiceRoute {
                port_calls: seqs.into_values().collect(),
                capacity_teu,
                route_id,
            }
        })
        .collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct RouteJson {
    route_id: String,
    #[serde(default)]
    capacity_teu: Option<f64>,
    ports: Vec<String>,
}

/// Parses the JSON alternative: `[{"route_id", "capacity_teu", "ports": [...]}, ...]`.
pub fn parse_routes_json<R: Read>(reader: R) -> Result<Vec<ServiceRoute>> {
    let raw: Vec<RouteJson> = serde_json::from_reader(reader)?;
    let mut out: BTreeMap<String, ServiceRoute> = BTreeMap::new();
    for (i, r) in raw.into_iter().enumerate() {
        if let Some(c) = r.capacity_teu {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::Parse {
                    line: i as u64 + 1,
                    message: format!("route `{}` has invalid capacity {c}", r.route_id),
                });
            }
        }
        if out.contains_key(&r.route_id) {
            return Err(Error::Duplicate {
                kind: "route_id",
                key: r.route_id,
            });
        }
        out.insert(
            r.route_id.clone(),
            ServiceRoute {
                route_id: r.route_id,
                port_calls: r.ports,
                capacity_teu: r.capacity_teu,
            },
        );
    }
    Ok(out.into_values().collect())
}

pub fn write_routes<W: Write>(routes: &[ServiceRoute], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["route_id", "seq", "port_id"])?;
    for r in routes {
        for (i, p) in r.port_calls.iter().enumerate() {
            w.write_record([r.route_id.as_str(), &(i + 1).to_string(), p])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_routes_meta<W: Write>(routes: &[ServiceRoute], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["route_id", "capacity_teu"])?;
    for r in routes {
        w.write_record([r.route_id.clone(), fmt_opt(r.capacity_teu)])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Ports, countries, bilateral

pub fn parse_ports<R: Read>(reader: R) -> Result<Vec<Port>> {
    let table = Table::read(reader, &["port_id", "name", "country_code"])?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let line = *line;
        let port_id = table.required(rec, line, "port_id")?.to_string();
        let country_code = table.required(rec, line, "country_code")?.to_string();
        let name = table.cell(rec, "name").unwrap_or_default().to_string();
        if !seen.insert(port_id.clone()) {
            return Err(Error::Duplicate {
                kind: "port_id",
                key: port_id,
            });
        }
        out.push(Port {
            port_id,
            name,
            country_code,
        });
    }
    Ok(out)
}

pub fn write_ports<W: Write>(ports: &[Port], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["port_id", "name", "country_code"])?;
    for p in ports {
        w.write_record([&p.port_id, &p.name, &p.country_code])?;
    }
    w.flush()?;
    Ok(())
}

const ECON_COLUMNS: [&str; 9] = [
    "country_code",
    "trade_value_usd",
    "export_usd",
    "import_usd",
    "gdp_usd",
    "lsci",
    "capital_lat",
    "capital_lon",
    "trade_value_later_usd",
];

/// Parses `countries.csv`. The trailing `trade_value_later_usd` column is optional.
pub fn parse_country_econ<R: Read>(reader: R) -> Result<Vec<CountryEcon>> {
    let table = Table::read(reader, &ECON_COLUMNS[..8])?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let line = *line;
        let country_code = table.required(rec, line, "country_code")?.to_string();
        let f = |name| table.optional_f64(rec, line, name);
        let econ = CountryEcon {
            trade_value_usd: f("trade_value_usd")?,
            export_usd: f("export_usd")?,
            import_usd: f("import_usd")?,
            gdp_usd: f("gdp_usd")?,
            lsci: f("lsci")?,
            capital_lat: f("capital_lat")?,
            capital_lon: f("capital_lon")?,
            trade_value_later_usd: f("trade_value_later_usd")?,
            country_code: country_code.clone(),
        };
        if let Some(lat) = econ.capital_lat {
            if !(-90.0..=90.0).contains(&lat) {
                return Err(Error::Parse {
                    line,
                    message: format!("capital_lat {lat} outside [-90, 90]"),
                });
            }
        }
        if let Some(lon) = econ.capital_lon {
            if !(-180.0..=180.0).contains(&lon) {
                return Err(Error::Parse {
                    line,
                    message: format!("capital_lon {lon} outside [-180, 180]"),
                });
            }
        }
        if !seen.insert(country_code.clone()) {
            return Err(Error::Duplicate {
                kind: "country_code",
                key: country_code,
            });
        }
        out.push(econ);
    }
    Ok(out)
}

pub fn write_country_econ<W: Write>(econ: &[CountryEcon], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ECON_COLUMNS)?;
    for e in econ {
        w.write_record([
            e.country_code.clone(),
            fmt_opt(e.trade_value_usd),
            fmt_opt(e.export_usd),
            fmt_opt(e.import_usd),
            fmt_opt(e.gdp_usd),
            fmt_opt(e.lsci),
            fmt_opt(e.capital_lat),
            fmt_opt(e.capital_lon),
            fmt_opt(e.trade_value_later_usd),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_bilateral<R: Read>(reader: R) -> Result<Vec<BilateralRecord>> {
    let table = Table::read(reader, &["country_i", "country_j", "btv_usd", "lsbci"])?;
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let line = *line;
        let country_i = table.required(rec, line, "country_i")?.to_string();
        let country_j = table.required(rec, line, "country_j")?.to_string();
        if country_i == country_j {
            return Err(Error::Parse {
                line,
                message: format!("bilateral record pairs `{country_i}` with itself"),
            });
        }
        let btv_usd = parse_finite(table.required(rec, line, "btv_usd")?, line, "btv_usd")?;
        if btv_usd < 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("negative btv_usd {btv_usd}"),
            });
        }
        let lsbci = table.optional_f64(rec, line, "lsbci")?;
        let (a, b) = ordered_pair(&country_i, &country_j);
        if !seen.insert((a.to_string(), b.to_string())) {
            return Err(Error::Duplicate {
                kind: "country pair",
                key: format!("{a}/{b}"),
            });
        }
        out.push(BilateralRecord {
            country_i,
            country_j,
            btv_usd,
            lsbci,
        });
    }
    Ok(out)
}

pub fn write_bilateral<W: Write>(records: &[BilateralRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["country_i", "country_j", "btv_usd", "lsbci"])?;
    for r in records {
        w.write_record([
            r.country_i.clone(),
            r.country_j.clone(),
            r.btv_usd.to_string(),
            fmt_opt(r.lsbci),
        ])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub retained: Vec<ServiceRoute>,
    /// Routes whose calls all lie in one country.
    pub dropped_domestic: Vec<String>,
    /// Routes with fewer than two distinct ports.
    pub dropped_too_few_ports: Vec<String>,
    /// `(route_id, port_id)` for every call to a port missing from the port table.
    pub unresolved_ports: Vec<(String, String)>,
    /// Routes dropped because of unresolved port references.
    pub dropped_unresolved: Vec<String>,
    /// Countries of retained ports with no row in the economics table.
    pub countries_without_econ: Vec<String>,
    /// Countries named in bilateral records but absent from the economics table.
    pub bilateral_unknown_countries: Vec<String>,
}

impl ValidationReport {
    pub fn dropped_count(&self) -> usize {
        self.dropped_domestic.len() + self.dropped_too_few_ports.len() + self.dropped_unresolved.len()
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        for r in &self.dropped_unresolved {
            w.push(format!("route {r} dropped: unresolved port reference"));
        }
        for (r, p) in &self.unresolved_ports {
            w.push(format!("route {r} calls unknown port {p}"));
        }
        for r in &self.dropped_too_few_ports {
            w.push(format!("route {r} dropped: fewer than 2 distinct ports"));
        }
        for r in &self.dropped_domestic {
            w.push(format!("route {r} dropped: domestic"));
        }
        for c in &self.countries_without_econ {
            w.push(format!("country {c} has no economic data"));
        }
        for c in &self.bilateral_unknown_countries {
            w.push(format!("bilateral data names country {c} without economic data"));
        }
        w
    }
}

/// Keeps the international routes whose ports all resolve; reports everything dropped.
///
/// With `strict`, any dropped route turns into an error.
pub fn validate_dataset(
    routes: &[ServiceRoute],
    ports: &PortTable,
    econ: &[CountryEcon],
    bilateral: &[BilateralRecord],
    strict: bool,
) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let mut retained_countries: BTreeSet<&str> = BTreeSet::new();

    for route in routes {
        let missing: Vec<&String> = route.port_calls.iter().filter(|p| ports.get(p).is_none()).collect();
        if !missing.is_empty() {
            for p in missing {
                report.unresolved_ports.push((route.route_id.clone(), p.clone()));
            }
            report.dropped_unresolved.push(route.route_id.clone());
            continue;
        }
        let distinct = route.distinct_ports();
        if distinct.len() < 2 {
            report.dropped_too_few_ports.push(route.route_id.clone());
            continue;
        }
        let countries: BTreeSet<&str> = distinct.iter().filter_map(|p| ports.country_of(p)).collect();
        if countries.len() < 2 {
            report.dropped_domestic.push(route.route_id.clone());
            continue;
        }
        retained_countries.extend(countries);
        report.retained.push(route.clone());
    }

    let econ_codes: BTreeSet<&str> = econ.iter().map(|e| e.country_code.as_str()).collect();
    report.countries_without_econ = retained_countries
        .iter()
        .filter(|c| !econ_codes.contains(*c))
        .map(|c| c.to_string())
        .collect();
    let bilateral_countries: BTreeSet<&str> = bilateral
        .iter()
        .flat_map(|b| [b.country_i.as_str(), b.country_j.as_str()])
        .collect();
    report.bilateral_unknown_countries = bilateral_countries
        .into_iter()
        .filter(|c| !econ_codes.contains(c))
        .map(str::to_string)
        .collect();

    if strict && report.dropped_count() > 0 {
        return Err(Error::Validation(report.warnings().join("; ")));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn routes_from(csv_text: &str, meta: Option<&str>) -> Result<Vec<ServiceRoute>> {
        parse_routes(csv_text.as_bytes(), meta.map(str::as_bytes))
    }

    fn port(id: &str, country: &str) -> Port {
        Port {
            port_id: id.into(),
            name: id.into(),
            country_code: country.into(),
        }
    }

    fn route(id: &str, calls: &[&str]) -> ServiceRoute {
        ServiceRoute {
            route_id: id.into(),
            port_calls: calls.iter().map(|s| s.to_string()).collect(),
            capacity_teu: Some(100.0),
        }
    }

    #[test]
    fn single_route_with_capacity() {
        let r = routes_from(
            "route_id,seq,port_id\nR1,1,A\nR1,2,B\nR1,3,C\n",
            Some("route_id,capacity_teu\nR1,600\n"),
        )
        .unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].port_calls, ["A", "B", "C"]);
        assert_eq!(r[0].capacity_teu, Some(600.0));
    }

    #[test]
    fn circular_route_keeps_calls() {
        let r = routes_from("route_id,seq,port_id\nR2,1,A\nR2,2,B\nR2,3,C\nR2,4,A\n", None).unwrap();
        assert_eq!(r[0].port_calls, ["A", "B", "C", "A"]);
        assert_eq!(r[0].distinct_port_count(), 3);
        assert_eq!(r[0].repeated_calls(), ["A"]);
        assert_eq!(r[0].capacity_teu, None);
    }

    #[test]
    fn calls_are_ordered_by_seq() {
        let r = routes_from("route_id,seq,port_id\nR1,3,C\nR1,1,A\nR1,2,B\n", None).unwrap();
        assert_eq!(r[0].port_calls, ["A", "B", "C"]);
    }

    #[test]
    fn empty_inputs() {
        assert!(routes_from("", None).unwrap().is_empty());
        assert!(routes_from("route_id,seq,port_id\n", None).unwrap().is_empty());
    }

    #[test]
    fn malformed_row_names_line() {
        let err = routes_from("route_id,seq,port_id\nR1,1,A\nR1,x,B\n", None).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_capacity_rejected() {
        let err = routes_from(
            "route_id,seq,port_id\nR1,1,A\nR1,2,B\n",
            Some("route_id,capacity_teu\nR1,-5\n"),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn json_routes() {
        let r = parse_routes_json(
            r#"[{"route_id":"R2","capacity_teu":50,"ports":["B","C"]},
                {"route_id":"R1","ports":["A","B","A"]}]"#
                .as_bytes(),
        )
        .unwrap();
        assert_eq!(r[0].route_id, "R1");
        assert_eq!(r[0].capacity_teu, None);
        assert_eq!(r[1].capacity_teu, Some(50.0));
    }

    #[test]
    fn port_row() {
        let p = parse_ports("port_id,name,country_code\nSGSIN,Singapore,SGP\n".as_bytes()).unwrap();
        assert_eq!(p, [port_named("SGSIN", "Singapore", "SGP")]);
    }

    fn port_named(id: &str, name: &str, country: &str) -> Port {
        Port {
            port_id: id.into(),
            name: name.into(),
            country_code: country.into(),
        }
    }

    #[test]
    fn duplicate_port_rejected() {
        let err = parse_ports("port_id,name,country_code\nA,a,X\nA,b,Y\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Duplicate { .. }));
    }

    #[test]
    fn blank_lsci_is_missing() {
        let e = parse_country_econ(
            "country_code,trade_value_usd,export_usd,import_usd,gdp_usd,lsci,capital_lat,capital_lon\n\
             SGP,1e11,6e10,4e10,3e11,,1.29,103.85\n"
                .as_bytes(),
        )
        .unwrap();
        assert_eq!(e[0].lsci, None);
        assert_eq!(e[0].trade_value_usd, Some(1e11));
        assert_eq!(e[0].net_export_usd(), Some(2e10));
        assert_eq!(e[0].trade_value_later_usd, None);
    }

    #[test]
    fn non_numeric_money_rejected() {
        let err = parse_country_econ(
            "country_code,trade_value_usd,export_usd,import_usd,gdp_usd,lsci,capital_lat,capital_lon\n\
             SGP,lots,,,,,,\n"
                .as_bytes(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn latitude_out_of_range_rejected() {
        let err = parse_country_econ(
            "country_code,trade_value_usd,export_usd,import_usd,gdp_usd,lsci,capital_lat,capital_lon\n\
             SGP,,,,,,91,0\n"
                .as_bytes(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn duplicate_unordered_pair_rejected() {
        let err = parse_bilateral("country_i,country_j,btv_usd,lsbci\nX,Y,100,\nY,X,50,\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Duplicate { .. }));
    }

    #[test]
    fn self_pair_rejected() {
        assert!(parse_bilateral("country_i,country_j,btv_usd,lsbci\nX,X,1,\n".as_bytes()).is_err());
    }

    #[test]
    fn validation_drops_domestic_and_short_routes() {
        let ports = PortTable::new([port("A", "X"), port("B", "X"), port("C", "Y"), port("D", "Z")]).unwrap();
        let routes = [
            route("R1", &["A", "C"]),
            route("R2", &["A", "B"]),
            route("R3", &["A", "A"]),
            route("R4", &["B", "D", "C"]),
            route("R5", &["C", "D"]),
            route("R6", &["C", "Q"]),
        ];
        let report = validate_dataset(&routes, &ports, &[], &[], false).unwrap();
        let kept: Vec<&str> = report.retained.iter().map(|r| r.route_id.as_str()).collect();
        assert_eq!(kept, ["R1", "R4", "R5"]);
        assert_eq!(report.dropped_domestic, ["R2"]);
        assert_eq!(report.dropped_too_few_ports, ["R3"]);
        assert_eq!(report.dropped_unresolved, ["R6"]);
        assert_eq!(report.countries_without_econ, ["X", "Y", "Z"]);

        let again = validate_dataset(&report.retained, &ports, &[], &[], true).unwrap();
        assert_eq!(again.dropped_count(), 0);
        assert_eq!(again.retained, report.retained);

        assert!(validate_dataset(&routes, &ports, &[], &[], true).is_err());
    }

    #[test]
    fn retained_ports_exist() {
        let ports = PortTable::new([port("A", "X"), port("C", "Y")]).unwrap();
        let routes = [route("R1", &["A", "C"]), route("R2", &["A", "Z"])];
        let report = validate_dataset(&routes, &ports, &[], &[], false).unwrap();
        for r in &report.retained {
            assert!(r.port_calls.iter().all(|p| ports.get(p).is_some()));
        }
    }
}
