//! Regression comparison against the bundled published tables.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use gthbe::golden::{self, SpeciesRow};
use gthbe::lambda::{
    interp_error_per_nucleus, lambda_loc_integral, lambda_loc_per_nucleus, lambda_loc_unseparated,
    lambda_nonloc_integral, lambda_nonloc_per_nucleus, lambda_t, lambda_v, LocalSign,
};
use gthbe::nested_boxes::{inverse_square_weights, prep_weights_from_stats};
use gthbe::{
    block_encoding_total, data, AlephConfig, BoxCount, BoxScheme, GthSpecies, InterpSpec, MillerGrid, NonlocVariant,
    ReciprocalGeometry, SystemSpec,
};

use crate::output::{Document, Table};
use crate::{progress, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoldenTable {
    /// Success probability of the 1/‖k‖ preparation at n = 5, 6, 7.
    SuccessProbabilities,
    /// Continuum λ_loc, unseparated and separated.
    LocalIntegrals,
    /// Continuum λ_nonloc.
    NonlocalIntegrals,
    /// Explicit λ_loc sums per nucleus at n = 6.
    LocalSums,
    /// Interpolation-error contribution per nucleus at n = 6 (×10⁹).
    InterpErrors,
    /// λ_nonloc per nucleus with pointwise maxima at n = 6.
    Pointwise,
    /// λ_nonloc per nucleus with nested-box maxima at n = 6.
    Box,
    /// Block-encoding Toffoli totals.
    BlockEncoding,
    /// λ_T and λ_V of the resource table.
    LambdaTv,
}

impl GoldenTable {
    fn tolerance(self) -> Tolerance {
        use GoldenTable::*;
        match self {
            SuccessProbabilities => Tolerance::Absolute(1e-4),
            LocalIntegrals => Tolerance::Absolute(1e-3),
            NonlocalIntegrals => Tolerance::Relative(1e-3),
            LocalSums => Tolerance::Relative(5e-3),
            InterpErrors => Tolerance::Relative(0.1),
            Pointwise => Tolerance::Relative(0.02),
            Box => Tolerance::Relative(0.01),
            BlockEncoding => Tolerance::Relative(0.03),
            LambdaTv => Tolerance::Relative(1e-6),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
}

impl Tolerance {
    fn accepts(self, expected: f64, computed: f64) -> bool {
        match self {
            Tolerance::Absolute(t) => (computed - expected).abs() <= t,
            Tolerance::Relative(t) => (computed - expected).abs() <= t * expected.abs(),
        }
    }
}

/// One compared cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenCell {
    pub row: String,
    pub column: String,
    pub expected: f64,
    pub computed: f64,
}

/// Cells of one table; also the input format of `--report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenReport {
    pub table: GoldenTable,
    pub cells: Vec<GoldenCell>,
}

#[derive(Debug, Clone, Args)]
pub struct GoldenArgs {
    /// Table to compare against.
    #[arg(value_enum)]
    pub table: GoldenTable,
    /// Restrict to these row keys (structure keys or species labels).
    #[arg(long, value_delimiter = ',')]
    pub rows: Option<Vec<String>>,
    /// Compare the computed values stored in this report instead of
    /// recomputing them.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn structure_spec(key: &str, n: [u32; 3]) -> Result<SystemSpec, CliError> {
    Ok(SystemSpec::bundled(key, n)?)
}

fn per_nucleus(
    table: &[SpeciesRow],
    keep: &dyn Fn(&str) -> bool,
    compute: &dyn Fn(&SystemSpec) -> Result<Vec<f64>, CliError>,
) -> Result<Vec<GoldenCell>, CliError> {
    let mut cells = Vec::new();
    for (key, row) in table.iter().filter(|(k, _)| keep(k)) {
        let spec = structure_spec(key, [6, 6, 6])?;
        progress(&format!("{key}: per-nucleus values at n = 6"));
        let values = compute(&spec)?;
        for (label, expected) in row.iter() {
            let k = spec.species.iter().position(|s| s.species.label == *label).expect("golden species exist");
            cells.push(GoldenCell { row: key.to_string(), column: label.to_string(), expected: *expected, computed: values[k] });
        }
    }
    Ok(cells)
}

fn species_of(spec: &SystemSpec) -> Vec<&GthSpecies> {
    spec.species.iter().map(|s| &s.species).collect()
}

fn nonloc_lattice(spec: &SystemSpec, variant: NonlocVariant) -> Result<Vec<f64>, CliError> {
    Ok(lambda_nonloc_per_nucleus(spec, variant, AlephConfig::default())?.0)
}

fn compute(table: GoldenTable, keep: &dyn Fn(&str) -> bool) -> Result<Vec<GoldenCell>, CliError> {
    use GoldenTable::*;
    let cell = |row: &str, column: &str, expected: f64, computed: f64| GoldenCell {
        row: row.to_string(),
        column: column.to_string(),
        expected,
        computed,
    };
    let mut cells = Vec::new();
    match table {
        SuccessProbabilities => {
            for r in golden::SUCCESS_PROBABILITIES.iter().filter(|r| keep(r.key)) {
                let geom = ReciprocalGeometry::new(&data::structure(r.key)?.cell())?;
                for (k, n) in [5u32, 6, 7].into_iter().enumerate() {
                    let grid = MillerGrid::cubic(n)?;
                    let scheme = BoxScheme::new(grid, r.deltas, false)?;
                    let stats = scheme.shell_stats(&inverse_square_weights(&geom, &grid));
                    let p = prep_weights_from_stats(&scheme, &stats, BoxCount::Distinct)?.success_probability;
                    cells.push(cell(r.key, &format!("n={n}"), r.probabilities[k], p));
                }
            }
        }
        LocalIntegrals => {
            for r in golden::LOCAL_INTEGRALS.iter().filter(|r| keep(r.label)) {
                let sp = data::species(r.label)?;
                cells.push(cell(r.label, "unseparated", r.unseparated, lambda_loc_unseparated(sp, LocalSign::Aligned)?));
                cells.push(cell(r.label, "separated", r.separated, lambda_loc_integral(sp)?));
            }
        }
        NonlocalIntegrals => {
            for &(label, expected) in golden::NONLOCAL_INTEGRALS.iter().filter(|(l, _)| keep(l)) {
                cells.push(cell(label, "nonloc", expected, lambda_nonloc_integral(data::species(label)?)?));
            }
        }
        LocalSums => {
            cells = per_nucleus(golden::LOCAL_SUMS, keep, &|spec| {
                Ok(lambda_loc_per_nucleus(&species_of(spec), &spec.geometry()?, &spec.grid))
            })?
        }
        InterpErrors => {
            let table = gthbe::interpolation::build_table(InterpSpec {
                order: gthbe::Order::Quadratic,
                panels: 64,
            })?;
            cells = per_nucleus(golden::INTERP_ERRORS, keep, &|spec| {
                let v = interp_error_per_nucleus(&species_of(spec), &spec.geometry()?, &spec.grid, |z| table.evaluate(z));
                Ok(v.into_iter().map(|x| x * 1e9).collect())
            })?
        }
        Pointwise => cells = per_nucleus(golden::NONLOCAL_POINTWISE, keep, &|s| nonloc_lattice(s, NonlocVariant::Pointwise))?,
        Box => cells = per_nucleus(golden::NONLOCAL_BOX, keep, &|s| nonloc_lattice(s, NonlocVariant::Box))?,
        BlockEncoding => {
            for r in golden::BLOCK_ENCODING_COSTS.iter().filter(|r| keep(r.system.key)) {
                let spec = r.system.spec()?;
                let total = block_encoding_total(&spec)?.total;
                cells.push(cell(&spec.name, &format!("{:?}", spec.grid.n), r.toffolis as f64, total as f64));
            }
        }
        LambdaTv => {
            for r in golden::LAMBDAS.iter().filter(|r| keep(r.system.key)) {
                let spec = r.system.spec()?;
                let row = format!("{} {:?}", spec.name, spec.grid.n);
                cells.push(cell(&row, "lambda_t", r.lambda_t, lambda_t(&spec)?));
                cells.push(cell(&row, "lambda_v", r.lambda_v, lambda_v(&spec)?));
            }
        }
    }
    Ok(cells)
}

/// Runs the comparison. Returns the document and the number of failing cells.
pub fn compare(args: &GoldenArgs) -> Result<(Document, usize), CliError> {
    let keep = |k: &str| args.rows.as_ref().map_or(true, |r| r.iter().any(|x| x.eq_ignore_ascii_case(k)));
    let report = match &args.report {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("cannot read {}: {e}", p.display())))?;
            let r: GoldenReport =
                serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            if r.table != args.table {
                return Err(CliError::Input(format!("report is for table {:?}, not {:?}", r.table, args.table)));
            }
            r
        }
        None => GoldenReport { table: args.table, cells: compute(args.table, &keep)? },
    };
    let tol = args.table.tolerance();
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for c in &report.cells {
        let pass = tol.accepts(c.expected, c.computed);
        if !pass {
            failures.push(format!("{}/{}", c.row, c.column));
        }
        let diff = c.computed - c.expected;
        rows.push(vec![json!(c.row), json!(c.column), json!(c.expected), json!(c.computed), json!(diff), json!(pass)]);
        cells.push(json!({
            "row": c.row,
            "column": c.column,
            "expected": c.expected,
            "computed": c.computed,
            "difference": diff,
            "pass": pass,
        }));
    }
    let doc = Document::new(json!({
        "table": report.table,
        "tolerance": tol,
        "pass": failures.is_empty(),
        "failed": failures,
        "cells": cells,
    }))
    .with_table(Table { headers: vec!["row", "column", "expected", "computed", "difference", "pass"], rows });
    let n = failures.len();
    Ok((doc, n))
}
