//! Subcommand implementations. Each returns a [`Document`].

use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};

use gthbe::costmodel::CostReport;
use gthbe::data::DATASET_VERSION;
use gthbe::interpolation::build_table;
use gthbe::lambda::interp_error_for;
use gthbe::nested_boxes::{inverse_square_weights, optimize_deltas, prep_weights_from_stats, PrepWeights};
use gthbe::{
    block_encoding_total, lambda_report, AlephConfig, AlephForm, AlephStrategy, BoxCount, BoxScheme, InterpSpec,
    LambdaOptions, LambdaReport, LocVariant, NonlocVariant, SystemSpec,
};

use crate::input::{Source, SystemArgs};
use crate::output::{Document, Table};
use crate::{progress, CliError};

/// λ evaluation options.
#[derive(Debug, Clone, Args)]
pub struct LambdaArgs {
    /// λ_loc evaluation: sum, integral, unseparated or unseparated-physical.
    #[arg(long, default_value = "sum")]
    pub loc: LocVariant,
    /// λ_nonloc evaluation: box, pointwise or integral.
    #[arg(long, default_value = "box")]
    pub nonloc: NonlocVariant,
    /// ℵ maximization: exact, brute, decimated or relaxation.
    #[arg(long, default_value = "exact")]
    pub strategy: AlephStrategy,
    /// Maximized quantity: separated, no-legendre or tight.
    #[arg(long, default_value = "separated")]
    pub form: AlephForm,
    /// Evaluate λ_nonloc on this grid instead of the system grid, e.g. 6,6,6.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub nonloc_bits: Option<Vec<u32>>,
    /// Also compute the interpolation-error contribution.
    #[arg(long)]
    pub interp_error: bool,
}

impl LambdaArgs {
    pub fn options(&self) -> Result<LambdaOptions, CliError> {
        let nonloc_grid = match &self.nonloc_bits {
            None => None,
            Some(v) => Some(<[u32; 3]>::try_from(v.as_slice()).map_err(|_| {
                CliError::Input(format!("--nonloc-bits needs three comma-separated values, got {}", v.len()))
            })?),
        };
        Ok(LambdaOptions {
            loc: self.loc,
            nonloc: self.nonloc,
            aleph: AlephConfig { strategy: self.strategy, form: self.form },
            interp_error: self.interp_error,
            nonloc_grid,
        })
    }
}

fn to_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::Output(e.to_string()))
}

fn provenance(source: &Source, command: &str, options: Value) -> Value {
    json!({
        "tool": concat!("gthbe ", env!("CARGO_PKG_VERSION")),
        "dataset": DATASET_VERSION,
        "command": command,
        "source": source,
        "options": options,
    })
}

fn system_summary(spec: &SystemSpec) -> Result<Value, CliError> {
    let species: Vec<Value> = spec
        .species
        .iter()
        .map(|s| json!({"label": s.species.label, "name": s.species.name, "count": s.count, "z": s.species.z()}))
        .collect();
    Ok(json!({
        "name": spec.name,
        "grid": spec.grid.n,
        "electrons": spec.electrons(),
        "nuclei": spec.nuclei(),
        "species": species,
        "deltas": spec.deltas,
        "b": spec.b,
        "b_r": spec.b_r,
        "interp": spec.interp.to_string(),
        "epsilon": spec.epsilon,
        "kinetic_bits": spec.kinetic_bits,
    }))
}

fn geometry_summary(spec: &SystemSpec) -> Result<Value, CliError> {
    let g = spec.geometry()?;
    Ok(json!({
        "lattice": spec.cell.rows(),
        "volume": g.volume,
        "reciprocal": g.g,
        "gramian": g.gramian,
        "arith_case": to_value(&spec.resolved_arith_case()?)?,
    }))
}

/// Preparation of 1/‖k_ν‖ over nested boxes with the spec's shifts.
fn coulomb_boxes(spec: &SystemSpec, how: BoxCount) -> Result<(BoxScheme, PrepWeights), CliError> {
    let scheme = BoxScheme::new(spec.grid, spec.deltas, false)?;
    let vals = inverse_square_weights(&spec.geometry()?, &spec.grid);
    let w = prep_weights_from_stats(&scheme, &scheme.shell_stats(&vals), how)?;
    Ok((scheme, w))
}

fn boxes_value(scheme: &BoxScheme, w: &PrepWeights) -> Value {
    json!({
        "deltas": scheme.deltas,
        "mu_min": scheme.mu_min,
        "mu_max": scheme.mu_max,
        "success_probability": w.success_probability,
        "psi": w.psi,
    })
}

fn compute_lambda(spec: &SystemSpec, opts: LambdaOptions) -> Result<LambdaReport, CliError> {
    progress(&format!(
        "{}: λ with loc = {}, nonloc = {} ({}, {})",
        spec.name, opts.loc, opts.nonloc, opts.aleph.strategy, opts.aleph.form
    ));
    Ok(lambda_report(spec, opts)?)
}

fn cost_summary(r: &CostReport, ledger: bool) -> Result<Value, CliError> {
    let mut v = json!({
        "total": r.total,
        "arith_case": to_value(&r.arith_case)?,
        "subtotals": {
            "prep": r.subtotal("prep."),
            "select": r.subtotal("select."),
            "shared": r.subtotal("shared."),
        },
        "qpe": to_value(&r.qpe)?,
    });
    if ledger {
        v["entries"] = to_value(&r.entries)?;
    }
    Ok(v)
}

pub fn estimate(sys: &SystemArgs, lam: &LambdaArgs) -> Result<Document, CliError> {
    let (spec, source) = sys.build()?;
    let opts = lam.options()?;
    let (scheme, w) = coulomb_boxes(&spec, BoxCount::Distinct)?;
    let lambda = compute_lambda(&spec, opts)?;
    let cost = block_encoding_total(&spec)?.with_qpe(lambda.total(), spec.epsilon)?;
    Ok(Document::new(json!({
        "provenance": provenance(&source, "estimate", to_value(&opts)?),
        "system": system_summary(&spec)?,
        "geometry": geometry_summary(&spec)?,
        "boxes": boxes_value(&scheme, &w),
        "lambda": to_value(&lambda)?,
        "lambda_total": lambda.total(),
        "cost": cost_summary(&cost, true)?,
    })))
}

pub fn lambda(sys: &SystemArgs, lam: &LambdaArgs, per_species: bool) -> Result<Document, CliError> {
    let (spec, source) = sys.build()?;
    let opts = lam.options()?;
    let report = compute_lambda(&spec, opts)?;
    let mut lv = to_value(&report)?;
    if !per_species {
        lv.as_object_mut().unwrap().remove("species");
    }
    let doc = Document::new(json!({
        "provenance": provenance(&source, "lambda", to_value(&opts)?),
        "lambda": lv,
        "lambda_total": report.total(),
    }));
    if !per_species {
        return Ok(doc);
    }
    let rows = report
        .species
        .iter()
        .map(|s| vec![json!(s.label), json!(s.count), json!(s.loc), json!(s.nonloc), to_value(&s.interp_error).unwrap()])
        .collect();
    Ok(doc.with_table(Table { headers: vec!["species", "count", "loc", "nonloc", "interp_error"], rows }))
}

pub fn cost(sys: &SystemArgs, ledger: bool) -> Result<Document, CliError> {
    let (spec, source) = sys.build()?;
    let r = block_encoding_total(&spec)?;
    let doc = Document::new(json!({
        "provenance": provenance(&source, "cost", Value::Null),
        "system": system_summary(&spec)?,
        "cost": cost_summary(&r, ledger)?,
    }));
    if !ledger {
        return Ok(doc);
    }
    let mut rows: Vec<Vec<Value>> = r
        .entries
        .iter()
        .map(|e| vec![json!(e.step), json!(e.label), json!(e.toffolis), to_value(&e.note).unwrap()])
        .collect();
    rows.push(vec![json!("total"), json!("block encoding"), json!(r.total), Value::Null]);
    Ok(doc.with_table(Table { headers: vec!["step", "label", "toffolis", "note"], rows }))
}

pub fn qpe(sys: &SystemArgs, lam: &LambdaArgs, lambda: Option<f64>) -> Result<Document, CliError> {
    let (spec, source) = sys.build()?;
    let opts = lam.options()?;
    let (lambda_value, report) = match lambda {
        Some(l) => (l, Value::Null),
        None => {
            let r = compute_lambda(&spec, opts)?;
            (r.total(), to_value(&r)?)
        }
    };
    let cost = block_encoding_total(&spec)?.with_qpe(lambda_value, spec.epsilon)?;
    Ok(Document::new(json!({
        "provenance": provenance(&source, "qpe", json!({"lambda": lambda, "options": to_value(&opts)?})),
        "lambda": report,
        "block_encoding": cost.total,
        "qpe": to_value(&cost.qpe)?,
    })))
}

pub fn boxes(sys: &SystemArgs, optimize: Option<u32>, signed: bool) -> Result<Document, CliError> {
    let (spec, source) = sys.build()?;
    let how = if signed { BoxCount::Signed } else { BoxCount::Distinct };
    let (scheme, w) = coulomb_boxes(&spec, how)?;
    let sizes: Vec<Value> = (scheme.mu_min..=scheme.mu_max)
        .map(|mu| {
            let (distinct, bitstrings) = scheme.box_sizes(mu).expect("μ within the scheme");
            json!({"mu": mu, "half_widths": scheme.half_widths(mu), "distinct": distinct, "bitstrings": bitstrings})
        })
        .collect();
    let optimized = match optimize {
        Some(m) => to_value(&optimize_deltas(&spec.grid, &spec.geometry()?, m)?)?,
        None => Value::Null,
    };
    Ok(Document::new(json!({
        "provenance": provenance(&source, "boxes", json!({"count": to_value(&how)?, "optimize": optimize})),
        "system": system_summary(&spec)?,
        "boxes": boxes_value(&scheme, &w),
        "sizes": sizes,
        "optimized": optimized,
    })))
}

#[derive(Debug, Clone, Args)]
pub struct InterpArgs {
    /// Interpolation specs to characterize.
    #[arg(long = "interp", default_values = ["linear:256", "quadratic:128"])]
    pub specs: Vec<InterpSpec>,
    /// Uniform samples per table for the measured error.
    #[arg(long, default_value_t = 1 << 20)]
    pub samples: usize,
    /// Arithmetic bits for the Toffoli cost column.
    #[arg(long, default_value_t = gthbe::system::DEFAULT_B)]
    pub b: u32,
    /// Also compute the interpolation-error λ for this cell.
    #[arg(long)]
    pub cell: Option<String>,
    /// Grid bits for --cell.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub bits: Option<Vec<u32>>,
}

pub fn interp_error(args: &InterpArgs) -> Result<Document, CliError> {
    let spec = match &args.cell {
        Some(cell) => {
            let sys = SystemArgs {
                cell: cell.clone(),
                bits: args.bits.clone(),
                b: None,
                b_r: None,
                interp: None,
                epsilon: None,
                deltas: None,
                kinetic_bits: None,
                extra: Vec::new(),
                species: None,
            };
            Some(sys.build()?.0)
        }
        None => None,
    };
    let mut rows = Vec::new();
    let mut tables = Vec::new();
    for &s in &args.specs {
        let t = build_table(s)?;
        let measured = t.verify_error(args.samples);
        let lambda = match &spec {
            Some(spec) => {
                progress(&format!("{}: interpolation-error λ for {s}", spec.name));
                Some(interp_error_for(spec, s)?)
            }
            None => None,
        };
        let cost = gthbe::interpolation::interp_toffoli_cost(s, args.b);
        rows.push(vec![json!(s.to_string()), json!(t.error_bound()), json!(measured), json!(cost), to_value(&lambda)?]);
        tables.push(json!({
            "interp": s.to_string(),
            "error_bound": t.error_bound(),
            "measured_max_error": measured,
            "toffolis": cost,
            "lambda_error": lambda,
        }));
    }
    let doc = Document::new(json!({
        "provenance": {
            "tool": concat!("gthbe ", env!("CARGO_PKG_VERSION")),
            "command": "interp-error",
            "samples": args.samples,
            "b": args.b,
            "cell": args.cell,
            "bits": args.bits,
        },
        "tables": tables,
    }));
    Ok(doc.with_table(Table {
        headers: vec!["interp", "error_bound", "measured_max_error", "toffolis", "lambda_error"],
        rows,
    }))
}
