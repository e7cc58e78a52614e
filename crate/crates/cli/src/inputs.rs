use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use glsn_core::ingest::{
    parse_bilateral, parse_country_econ, parse_ports, parse_routes, parse_routes_json, validate_dataset, PortTable,
    ValidationReport,
};
use glsn_core::{BilateralRecord, CountryEcon, ServiceRoute};

use crate::args::InputArgs;
use crate::provenance::InputHash;

pub const PORTS_FILE: &str = "ports.csv";
pub const ROUTES_FILE: &str = "routes.csv";
pub const ROUTES_META_FILE: &str = "routes_meta.csv";
pub const COUNTRIES_FILE: &str = "countries.csv";
pub const BILATERAL_FILE: &str = "bilateral.csv";

#[derive(Debug, Clone, Default)]
pub struct InputPaths {
    pub ports: Option<PathBuf>,
    pub routes: Option<PathBuf>,
    pub routes_meta: Option<PathBuf>,
    pub countries: Option<PathBuf>,
    pub bilateral: Option<PathBuf>,
}

impl InputPaths {
    /// Explicit flags win; `--data` fills in whatever standard files exist.
    pub fn resolve(args: &InputArgs) -> InputPaths {
        let from_dir = |name: &str| args.data.as_ref().map(|d| d.join(name)).filter(|p| p.exists());
        InputPaths {
            ports: args.ports.clone().or_else(|| from_dir(PORTS_FILE)),
            routes: args
                .routes
                .clone()
                .or_else(|| from_dir(ROUTES_FILE))
                .or_else(|| from_dir("routes.json")),
            routes_meta: args.routes_meta.clone().or_else(|| from_dir(ROUTES_META_FILE)),
            countries: args.countries.clone().or_else(|| from_dir(COUNTRIES_FILE)),
            bilateral: args.bilateral.clone().or_else(|| from_dir(BILATERAL_FILE)),
        }
    }
}

/// Parsed, validated inputs.
#[derive(Debug)]
pub struct Dataset {
    pub ports: PortTable,
    /// Routes that survived validation.
    pub routes: Vec<ServiceRoute>,
    pub validation: ValidationReport,
    pub econ: Vec<CountryEcon>,
    pub bilateral: Vec<BilateralRecord>,
    pub has_econ: bool,
    pub has_bilateral: bool,
    /// Hashes in a fixed order: ports, routes, routes meta, countries, bilateral.
    pub inputs: Vec<InputHash>,
}

fn read(path: &Path, what: &str) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {what} file {}", path.display()))
}

pub fn load(paths: &InputPaths, strict: bool) -> Result<Dataset> {
    let mut inputs = Vec::new();
    let Some(ports_path) = &paths.ports else {
        bail!("no port table given (use --ports or --data)");
    };
    let Some(routes_path) = &paths.routes else {
        bail!("no route file given (use --routes or --data)");
    };

    let bytes = read(ports_path, "port")?;
    inputs.push(InputHash::of(ports_path, &bytes));
    let ports = parse_ports(bytes.as_slice())
        .and_then(PortTable::new)
        .with_context(|| format!("in {}", ports_path.display()))?;

    let bytes = read(routes_path, "route")?;
    inputs.push(InputHash::of(routes_path, &bytes));
    let is_json = routes_path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let routes = if is_json {
        parse_routes_json(bytes.as_slice()).with_context(|| format!("in {}", routes_path.display()))?
    } else {
        let meta = match &paths.routes_meta {
            Some(p) => {
                let m = read(p, "route metadata")?;
                inputs.push(InputHash::of(p, &m));
                Some((p, m))
            }
            None => None,
        };
        let context = match &meta {
            Some((p, _)) => format!("in {} / {}", routes_path.display(), p.display()),
            None => format!("in {}", routes_path.display()),
        };
        parse_routes(bytes.as_slice(), meta.as_ref().map(|(_, m)| m.as_slice())).context(context)?
    };

    let (econ, has_econ) = match &paths.countries {
        Some(p) => {
            let b = read(p, "country")?;
            inputs.push(InputHash::of(p, &b));
            (
                parse_country_econ(b.as_slice()).with_context(|| format!("in {}", p.display()))?,
                true,
            )
        }
        None => (Vec::new(), false),
    };
    let (bilateral, has_bilateral) = match &paths.bilateral {
        Some(p) => {
            let b = read(p, "bilateral")?;
            inputs.push(InputHash::of(p, &b));
            (
                parse_bilateral(b.as_slice()).with_context(|| format!("in {}", p.display()))?,
                true,
            )
        }
        None => (Vec::new(), false),
    };

    let validation = validate_dataset(&routes, &ports, &econ, &bilateral, strict)?;
    if validation.retained.is_empty() {
        bail!(
            "no retained routes ({} read, {} dropped)",
            routes.len(),
            validation.dropped_count()
        );
    }
    Ok(Dataset {
        ports,
        routes: validation.retained.clone(),
        validation,
        econ,
        bilateral,
        has_econ,
        has_bilateral,
        inputs,
    })
}
