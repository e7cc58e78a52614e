use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use glsn_core::econometrics::{
    pearson_screen, select_model, write_coefficients_csv, write_regression_report_csv, Correlation, DesignMatrix,
    Selection,
};
use glsn_core::graph::{graph_stats, write_edge_list};
use glsn_core::gravity::{
    assemble_pairs, coverage_filter, estimate_country_trade, fit_gravity, write_gravity_report_csv,
    write_pair_predictions_csv, Coverage, CoverageExclusion, GravityFit, GravityVariant, PairAssembly,
    TradeReconstruction,
};
use glsn_core::indices::country_connectivity;
use glsn_core::{build_glsn, CountryIndexTable, Glsn, WeightScheme};
use serde_json::{json, Value};

use crate::args::{Cli, Command, Dependent, GravityOptions, InputArgs, NetworkArgs, RegressOptions};
use crate::fixture::{generate, FixtureParams};
use crate::inputs::{load, Dataset, InputPaths};
use crate::provenance::{OutputDir, Provenance};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build(a) => {
            let (ds, net, out) = prepare("build", &a.input, &a.network, None, None, &a.out)?;
            write_build(&out, &ds, &net)
        }
        Command::Indices(a) => {
            let (_, net, out) = prepare("indices", &a.input, &a.network, None, None, &a.out)?;
            write_indices(&out, &net)
        }
        Command::Regress(a) => {
            let (ds, net, out) = prepare("regress", &a.input, &a.network, Some(&a.regress), None, &a.out)?;
            let reg = run_regression(&out, &ds, &net, &a.regress)?;
            out.write_text("summary.txt", &regression_summary(&reg, &a.regress))
        }
        Command::Gravity(a) => {
            let (ds, net, out) = prepare("gravity", &a.input, &a.network, None, Some(&a.gravity), &a.out)?;
            let grav = run_gravity(&out, &ds, &net, &a.gravity)?;
            out.write_text("summary.txt", &gravity_summary(&grav, &a.gravity))
        }
        Command::Report(a) => {
            let (ds, net, out) = prepare(
                "report",
                &a.input,
                &a.network,
                Some(&a.regress),
                Some(&a.gravity),
                &a.out,
            )?;
            write_build(&out, &ds, &net)?;
            write_indices(&out, &net)?;
            let reg = run_regression(&out, &ds, &net, &a.regress)?;
            let grav = run_gravity(&out, &ds, &net, &a.gravity)?;
            let mut text = network_summary(&ds, &net);
            text.push('\n');
            text.push_str(&regression_summary(&reg, &a.regress));
            text.push('\n');
            text.push_str(&gravity_summary(&grav, &a.gravity));
            out.write_text("summary.txt", &text)
        }
        Command::GenFixture(a) => {
            let fixture = generate(FixtureParams {
                seed: a.seed,
                ports: a.ports,
                countries: a.countries,
                routes: a.routes,
                noise: a.noise,
            })?;
            fixture.write(&a.out)
        }
    }
}

/// The configuration that is hashed into every header. Paths are left out on
/// purpose: the input hashes already pin the data.
fn config_json(
    command: &str,
    net: &NetworkArgs,
    reg: Option<&RegressOptions>,
    grav: Option<&GravityOptions>,
    strict: bool,
) -> Value {
    let mut cfg = json!({
        "command": command,
        "weighting": net.weighting.iter().map(|s| s.name()).collect::<Vec<_>>(),
        "lmax": net.lmax,
        "strict": strict,
    });
    if let Some(r) = reg {
        cfg["dependent"] = json!(r.dependent.name());
        cfg["vif_threshold"] = json!(r.vif_threshold);
        cfg["log_response"] = json!(r.log_response);
        cfg["raw"] = json!(r.raw);
    }
    if let Some(g) = grav {
        cfg["variant"] = json!(g.variant.name());
        cfg["coverage"] = json!(g.coverage);
    }
    cfg
}

fn prepare(
    command: &str,
    input: &InputArgs,
    net_args: &NetworkArgs,
    reg: Option<&RegressOptions>,
    grav: Option<&GravityOptions>,
    out: &std::path::Path,
) -> Result<(Dataset, Network, OutputDir)> {
    if let Some(r) = reg {
        if !(r.vif_threshold > 1.0) {
            bail!("--vif-threshold must exceed 1, got {}", r.vif_threshold);
        }
    }
    if let Some(g) = grav {
        if !(g.coverage > 0.0 && g.coverage <= 1.0) {
            bail!("--coverage must lie in (0, 1], got {}", g.coverage);
        }
    }
    let ds = load(&InputPaths::resolve(input), input.strict)?;
    for w in ds.validation.warnings() {
        if ds.has_econ || !w.contains("economic data") {
            eprintln!("warning: {w}");
        }
    }
    let net = Network::build(&ds, net_args)?;
    let provenance = Provenance::new(
        &config_json(command, net_args, reg, grav, input.strict),
        ds.inputs.clone(),
    );
    let out = OutputDir::create(out, provenance)?;
    Ok((ds, net, out))
}

pub struct Network {
    pub graphs: Vec<Glsn>,
    /// Indices over the first requested scheme.
    pub indices: CountryIndexTable,
    pub lmax: Vec<usize>,
}

impl Network {
    pub fn build(ds: &Dataset, args: &NetworkArgs) -> Result<Network> {
        let mut schemes = Vec::new();
        for s in &args.weighting {
            if !schemes.contains(s) {
                schemes.push(*s);
            }
        }
        let graphs = schemes
            .iter()
            .map(|&s| build_glsn(&ds.routes, &ds.ports, s).with_context(|| format!("building the {s} network")))
            .collect::<Result<Vec<_>>>()?;
        let indices = CountryIndexTable::compute(&graphs[0], &args.lmax, &ds.econ);
        Ok(Network {
            graphs,
            indices,
            lmax: args.lmax.clone(),
        })
    }

    /// Cut-off used wherever a single betweenness column is needed.
    pub fn primary_lmax(&self) -> usize {
        self.lmax[0]
    }
}

fn write_build(out: &OutputDir, ds: &Dataset, net: &Network) -> Result<()> {
    for g in &net.graphs {
        out.write_csv(&format!("edges_{}.csv", g.scheme()), |w| write_edge_list(g, w))?;
    }
    let stats = graph_stats(&net.graphs[0]);
    let v = &ds.validation;
    out.write_json(
        "stats.json",
        json!({
            "nodes": stats.node_count,
            "edges": stats.edge_count,
            "ports_per_country": stats.ports_per_country,
            "schemes": net.graphs.iter().map(|g| g.scheme().name()).collect::<Vec<_>>(),
            "routes_retained": ds.routes.len(),
            "routes_dropped": {
                "domestic": v.dropped_domestic,
                "too_few_ports": v.dropped_too_few_ports,
                "unresolved_ports": v.dropped_unresolved,
            },
        }),
    )
}

fn write_indices(out: &OutputDir, net: &Network) -> Result<()> {
    out.write_csv("indices.csv", |w| net.indices.write_csv(w))
}

// ---------------------------------------------------------------------------
// Regression

#[derive(Debug, Clone)]
pub struct RegressionSample {
    pub response_name: String,
    pub countries: Vec<String>,
    pub response: Vec<f64>,
    pub candidates: Vec<(String, Vec<f64>)>,
    /// `(country, reason)` for every indexed country left out.
    pub excluded: Vec<(String, String)>,
}

pub struct RegressionOutcome {
    pub sample: RegressionSample,
    pub selection: Selection,
    pub correlations: Vec<(String, Option<Correlation>)>,
    pub lmax: usize,
}

fn response_value(e: &glsn_core::CountryEcon, dep: Dependent) -> Option<f64> {
    match dep {
        Dependent::Trade => e.trade_value_usd,
        Dependent::Export => e.export_usd,
        Dependent::Import => e.import_usd,
        Dependent::NetExport => e.net_export_usd(),
        Dependent::Gdp => e.gdp_usd,
        Dependent::TradeChange => e.trade_change_usd(),
    }
}

/// Countries with every required value; candidates are Gc, Gb, Fb and LSCI
/// (plus the base-year trade value when explaining trade change).
pub fn regression_sample(ds: &Dataset, net: &Network, opts: &RegressOptions) -> Result<RegressionSample> {
    if !ds.has_econ {
        bail!("regression needs a country table (--countries)");
    }
    let econ: BTreeMap<&str, &glsn_core::CountryEcon> = ds.econ.iter().map(|e| (e.country_code.as_str(), e)).collect();
    let with_tv = opts.dependent == Dependent::TradeChange;
    let l = net.primary_lmax();
    let mut names = vec!["Gc", "Gb", "Fb", "L"];
    if with_tv {
        names.push("Tv");
    }
    let mut sample = RegressionSample {
        response_name: if opts.log_response {
            format!("ln_{}", opts.dependent.name())
        } else {
            opts.dependent.name().to_string()
        },
        countries: Vec::new(),
        response: Vec::new(),
        candidates: names.iter().map(|n| (n.to_string(), Vec::new())).collect(),
        excluded: Vec::new(),
    };
    for row in &net.indices.rows {
        let code = row.country_code.clone();
        let Some(e) = econ.get(code.as_str()) else {
            sample.excluded.push((code, "no economic data".into()));
            continue;
        };
        let Some(mut y) = response_value(e, opts.dependent) else {
            sample
                .excluded
                .push((code, format!("missing {}", opts.dependent.name())));
            continue;
        };
        let Some(lsci) = e.lsci else {
            sample.excluded.push((code, "missing LSCI".into()));
            continue;
        };
        let tv = e.trade_value_usd;
        if with_tv && tv.is_none() {
            sample.excluded.push((code, "missing trade value".into()));
            continue;
        }
        if opts.log_response {
            if !(y > 0.0) {
                sample
                    .excluded
                    .push((code, "non-positive response under --log-response".into()));
                continue;
            }
            y = y.ln();
        }
        let mut values = vec![row.gc, row.gb[&l], row.fb, lsci];
        if with_tv {
            values.push(tv.unwrap());
        }
        for ((_, col), v) in sample.candidates.iter_mut().zip(values) {
            col.push(v);
        }
        sample.response.push(y);
        sample.countries.push(code);
    }
    let need = names.len() + 2;
    if sample.countries.len() < need {
        bail!(
            "regression on {} candidates needs at least {need} countries with complete data, found {}",
            names.len(),
            sample.countries.len()
        );
    }
    Ok(sample)
}

/// Pearson screening of the response against every index and weighting.
fn correlations(ds: &Dataset, net: &Network, sample: &RegressionSample) -> Result<Vec<(String, Option<Correlation>)>> {
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let capacity_known = ds.routes.iter().all(|r| r.capacity_teu.is_some());
    for scheme in WeightScheme::ALL {
        if scheme.uses_capacity() && !capacity_known {
            continue;
        }
        let g = build_glsn(&ds.routes, &ds.ports, scheme)?;
        let conn = country_connectivity(&g);
        let pick = |f: fn(&glsn_core::indices::Connectivity) -> f64| {
            sample.countries.iter().map(|c| f(&conn[c])).collect::<Vec<f64>>()
        };
        columns.push((format!("gc[{scheme}]"), pick(|c| c.gc)));
        columns.push((format!("gc_norm[{scheme}]"), pick(|c| c.gc_normalized)));
    }
    let rows: Vec<_> = sample
        .countries
        .iter()
        .map(|c| net.indices.get(c).expect("sample countries are indexed"))
        .collect();
    for &l in &net.indices.l_max {
        columns.push((format!("gb_l{l}"), rows.iter().map(|r| r.gb[&l]).collect()));
    }
    columns.push(("fb".into(), rows.iter().map(|r| r.fb).collect()));
    columns.push(("fb_norm".into(), rows.iter().map(|r| r.fb_normalized).collect()));
    columns.push(("lsci".into(), rows.iter().map(|r| r.lsci.unwrap_or(f64::NAN)).collect()));
    Ok(pearson_screen(&sample.response, &columns))
}

fn run_regression(out: &OutputDir, ds: &Dataset, net: &Network, opts: &RegressOptions) -> Result<RegressionOutcome> {
    let sample = regression_sample(ds, net, opts)?;
    let design = DesignMatrix::new(
        sample.response_name.clone(),
        sample.response.clone(),
        sample.candidates.clone(),
    )?;
    let design = if opts.raw {
        design
    } else {
        design.standardize().context("standardizing the regression sample")?
    };
    let selection = select_model(&design, opts.vif_threshold)?;
    let correlations = correlations(ds, net, &sample)?;

    out.write_csv("regression_report.csv", |w| write_regression_report_csv(&selection, w))?;
    if let Some(best) = selection.best_report() {
        out.write_csv("coefficients.csv", |w| write_coefficients_csv(best, w))?;
    }
    out.write_csv("correlations.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["variable", "r", "p_value", "n"])?;
        for (name, corr) in &correlations {
            match corr {
                Some(k) => c.write_record([name.clone(), k.r.to_string(), k.p_value.to_string(), k.n.to_string()])?,
                None => c.write_record([name.as_str(), "NA", "NA", "NA"])?,
            }
        }
        c.flush()?;
        Ok(())
    })?;
    out.write_csv("scatter.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        let mut header = vec!["country_code".to_string(), sample.response_name.clone()];
        header.extend(sample.candidates.iter().map(|(n, _)| n.clone()));
        c.write_record(&header)?;
        for (i, code) in sample.countries.iter().enumerate() {
            let mut rec = vec![code.clone(), sample.response[i].to_string()];
            rec.extend(sample.candidates.iter().map(|(_, col)| col[i].to_string()));
            c.write_record(&rec)?;
        }
        c.flush()?;
        Ok(())
    })?;
    Ok(RegressionOutcome {
        sample,
        selection,
        correlations,
        lmax: net.primary_lmax(),
    })
}

// ---------------------------------------------------------------------------
// Gravity

pub struct GravityOutcome {
    pub sample_variant: GravityVariant,
    pub assembly: PairAssembly,
    pub rows: Vec<(GravityVariant, std::result::Result<GravityFit, String>)>,
    pub coverage: Coverage,
    pub reconstruction: TradeReconstruction,
    pub gb_lmax: usize,
}

fn run_gravity(out: &OutputDir, ds: &Dataset, net: &Network, opts: &GravityOptions) -> Result<GravityOutcome> {
    if !ds.has_econ || !ds.has_bilateral {
        bail!("gravity needs both a country table (--countries) and bilateral trade (--bilateral)");
    }
    // Every variant of a family is fitted on the sample of its most demanding member.
    let sample_variant = opts.variant.family_sample_variant();
    let gb_lmax = net.primary_lmax();
    let assembly = assemble_pairs(
        &ds.econ,
        &ds.bilateral,
        &net.indices,
        &net.graphs[0],
        sample_variant,
        gb_lmax,
    );
    let rows: Vec<(GravityVariant, std::result::Result<GravityFit, String>)> = opts
        .variant
        .family()
        .into_iter()
        .map(|v| (v, fit_gravity(&assembly.samples, v).map_err(|e| e.to_string())))
        .collect();
    let requested = rows
        .iter()
        .find(|(v, _)| *v == opts.variant)
        .map(|(_, f)| f)
        .expect("a variant belongs to its own family");
    let fit = match requested {
        Ok(f) => f,
        Err(e) => bail!(
            "gravity variant {} could not be fitted on {} pairs: {e}",
            opts.variant,
            assembly.samples.len()
        ),
    };

    let coverage = coverage_filter(&ds.econ, &ds.bilateral, opts.coverage)?;
    let empirical: BTreeMap<String, f64> = ds
        .econ
        .iter()
        .filter(|e| coverage.retained.contains(&e.country_code))
        .filter_map(|e| Some((e.country_code.clone(), e.trade_value_usd?)))
        .collect();
    let reconstruction = estimate_country_trade(fit, &assembly.samples, &empirical)?;

    out.write_csv("gravity_report.csv", |w| write_gravity_report_csv(&rows, w))?;
    out.write_csv("pair_predictions.csv", |w| {
        write_pair_predictions_csv(fit, &assembly.samples, w)
    })?;
    out.write_csv("country_trade.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["country_code", "empirical", "estimated"])?;
        for t in &reconstruction.countries {
            c.write_record([t.country_code.clone(), t.empirical.to_string(), t.estimated.to_string()])?;
        }
        c.flush()?;
        Ok(())
    })?;
    Ok(GravityOutcome {
        sample_variant,
        assembly,
        rows,
        coverage,
        reconstruction,
        gb_lmax,
    })
}

// ---------------------------------------------------------------------------
// Plain-text summary

fn network_summary(ds: &Dataset, net: &Network) -> String {
    let g = &net.graphs[0];
    let mut s = String::new();
    let _ = writeln!(s, "Network");
    let _ = writeln!(
        s,
        "  {} ports, {} edges, {} countries, {} routes retained, {} dropped",
        g.node_count(),
        g.edge_count(),
        net.indices.rows.len(),
        ds.routes.len(),
        ds.validation.dropped_count()
    );
    let _ = writeln!(
        s,
        "  indices use weighting {} and cut-offs {:?}",
        g.scheme(),
        net.indices.l_max
    );
    s
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.4}")
    }
}

fn regression_summary(reg: &RegressionOutcome, opts: &RegressOptions) -> String {
    let mut s = String::new();
    let scale = if opts.raw { "raw values" } else { "Z-scores" };
    let log = if opts.log_response {
        "log-transformed"
    } else {
        "not log-transformed (see --log-response)"
    };
    let _ = writeln!(
        s,
        "Regression of {} ({scale}; response {log})",
        reg.sample.response_name
    );
    let _ = writeln!(
        s,
        "  {} countries used, {} excluded; Gb uses L_max = {}; VIF threshold {}",
        reg.sample.countries.len(),
        reg.sample.excluded.len(),
        reg.lmax,
        opts.vif_threshold
    );
    for (c, why) in &reg.sample.excluded {
        let _ = writeln!(s, "  excluded {c}: {why}");
    }
    let _ = writeln!(
        s,
        "  {:<16} {:>10} {:>12} {:>10}  admissible",
        "variables", "adj_R2", "AIC", "max_VIF"
    );
    for row in &reg.selection.rows {
        let fit = row.fit.as_ref().ok();
        let _ = writeln!(
            s,
            "  {:<16} {:>10} {:>12} {:>10}  {}",
            row.label(),
            fit.map_or("NA".into(), |f| fmt(f.adjusted_r2)),
            fit.map_or("NA".into(), |f| fmt(f.aic)),
            fmt(row.max_vif),
            if row.admissible { "yes" } else { "no" }
        );
    }
    match (reg.selection.best(), reg.selection.best_report()) {
        (Some(row), Some(best)) => {
            let _ = writeln!(
                s,
                "  verdict: {} (AIC {}, adjusted R2 {})",
                row.label(),
                fmt(best.aic),
                fmt(best.adjusted_r2)
            );
        }
        _ => {
            let _ = writeln!(s, "  verdict: none admissible");
        }
    }
    let strongest = reg
        .correlations
        .iter()
        .filter_map(|(n, c)| c.map(|c| (n, c)))
        .max_by(|a, b| a.1.r.abs().total_cmp(&b.1.r.abs()));
    if let Some((name, c)) = strongest {
        let _ = writeln!(
            s,
            "  strongest correlate: {name} (r = {}, p = {})",
            fmt(c.r),
            fmt(c.p_value)
        );
    }
    s
}

fn gravity_summary(grav: &GravityOutcome, opts: &GravityOptions) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "Gravity models (ln BTV; shared sample of {} pairs meeting the {} requirements; Gb at L_max = {})",
        grav.assembly.samples.len(),
        grav.sample_variant,
        grav.gb_lmax
    );
    for (reason, n) in &grav.assembly.excluded {
        let _ = writeln!(s, "  excluded pairs, {}: {n}", reason.name());
    }
    let _ = writeln!(
        s,
        "  {:<10} {:>10} {:>12} {:>10}",
        "variant", "adj_R2", "AIC", "max_VIF"
    );
    for (v, fit) in &grav.rows {
        match fit {
            Ok(f) => {
                let _ = writeln!(
                    s,
                    "  {:<10} {:>10} {:>12} {:>10}",
                    v.name(),
                    fmt(f.report.adjusted_r2),
                    fmt(f.report.aic),
                    fmt(f.report.max_vif())
                );
            }
            Err(e) => {
                let _ = writeln!(s, "  {:<10} {:>10} {:>12} {:>10}  ({e})", v.name(), "NA", "NA", "NA");
            }
        }
    }
    let _ = writeln!(
        s,
        "Country trade reconstruction with {} (coverage > {}; exp of fitted ln BTV, no smearing correction)",
        opts.variant, opts.coverage
    );
    let _ = writeln!(
        s,
        "  {} countries retained by coverage, {} excluded, {} reconstructed",
        grav.coverage.retained.len(),
        grav.coverage.excluded.len(),
        grav.reconstruction.countries.len()
    );
    for (c, why) in &grav.coverage.excluded {
        match why {
            CoverageExclusion::NoTradeValue => {
                let _ = writeln!(s, "  excluded {c}: no trade value");
            }
            CoverageExclusion::InsufficientCoverage { share } => {
                let _ = writeln!(s, "  excluded {c}: bilateral share {}", fmt(*share));
            }
        }
    }
    match (grav.reconstruction.correlation, grav.reconstruction.implied_adjusted_r2) {
        (Some(c), Some(r2)) => {
            let _ = writeln!(
                s,
                "  pearson r = {}, p = {}, implied adjusted R2 = {}",
                fmt(c.r),
                fmt(c.p_value),
                fmt(r2)
            );
        }
        _ => {
            let _ = writeln!(s, "  too few countries for a correlation");
        }
    }
    s
}
