//! Resolution of cells, species and precision settings into a [`SystemSpec`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use gthbe::lattice::Atom;
use gthbe::pseudopotential::parse_gth_file;
use gthbe::system::SpeciesCount;
use gthbe::{data, GthSpecies, InterpSpec, MillerGrid, SimulationCell, SystemSpec};

use crate::CliError;

/// Environment variable naming a directory with extra cells (`<name>.toml`)
/// and species parameters (`gth.txt`) that take precedence over the
/// bundled dataset.
pub const DATA_DIR_ENV: &str = "GTHBE_DATA_DIR";

const BOHR_PER_ANGSTROM: f64 = 1.0 / 0.529_177_210_903;

/// Options shared by every command that works on one system.
#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Bundled structure key or path to a TOML cell file.
    #[arg(long)]
    pub cell: String,
    /// Grid bits per axis, e.g. 6,6,6 (falls back to `bits` in a TOML cell).
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub bits: Option<Vec<u32>>,
    /// Bits of coherent arithmetic.
    #[arg(long)]
    pub b: Option<u32>,
    /// Bits for rotation angles.
    #[arg(long)]
    pub b_r: Option<u32>,
    /// Interpolation of the exponential, `linear:<P>` or `quadratic:<P>`.
    #[arg(long)]
    pub interp: Option<InterpSpec>,
    /// Target phase-estimation precision in Hartree.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Nested-box shifts, e.g. 1,1,0 (defaults to the cell's own).
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub deltas: Option<Vec<u32>>,
    /// Bits of the kinetic equal-superposition register.
    #[arg(long)]
    pub kinetic_bits: Option<u32>,
    /// Extra nuclei as LABEL:COUNT, e.g. --add C:1 --add O:1.
    #[arg(long = "add", value_name = "LABEL:COUNT")]
    pub extra: Vec<String>,
    /// GTH parameter file whose species override the bundled ones.
    #[arg(long)]
    pub species: Option<PathBuf>,
}

/// A cell description read from TOML.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellFile {
    name: Option<String>,
    /// `bohr` (default) or `angstrom`.
    #[serde(default)]
    units: Units,
    /// Lattice rows a₁, a₂, a₃.
    lattice: [[f64; 3]; 3],
    /// Supercell repetitions applied to the lattice and atoms.
    repeat: Option<[usize; 3]>,
    bits: Option<[u32; 3]>,
    deltas: Option<[u32; 3]>,
    /// Nuclei per species; derived from `atoms` when omitted.
    species: Option<BTreeMap<String, usize>>,
    #[serde(default)]
    atoms: Vec<AtomEntry>,
    /// Whether atom positions are `cartesian` (default) or `fractional`.
    #[serde(default)]
    coordinates: Coordinates,
}

#[derive(Debug, Default, Clone, Copy, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Units {
    #[default]
    Bohr,
    Angstrom,
}

#[derive(Debug, Default, Clone, Copy, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Coordinates {
    #[default]
    Cartesian,
    Fractional,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomEntry {
    species: String,
    position: [f64; 3],
}

/// Species lookup: explicit overrides, then the data directory, then the
/// bundled table.
pub struct SpeciesResolver {
    overrides: Vec<GthSpecies>,
}

impl SpeciesResolver {
    pub fn new(path: Option<&Path>) -> Result<Self, CliError> {
        let mut overrides = Vec::new();
        if let Some(p) = path {
            overrides.extend(read_species_file(p)?);
        }
        if let Some(dir) = data_dir() {
            let p = dir.join("gth.txt");
            if p.exists() {
                overrides.extend(read_species_file(&p)?);
            }
        }
        Ok(Self { overrides })
    }

    pub fn resolve(&self, label: &str) -> gthbe::Result<GthSpecies> {
        match self.overrides.iter().find(|s| s.label == label) {
            Some(s) => Ok(s.clone()),
            None => data::species(label).cloned(),
        }
    }

    /// Labels supplied from outside the bundled dataset.
    pub fn override_labels(&self) -> Vec<String> {
        self.overrides.iter().map(|s| s.label.clone()).collect()
    }
}

fn data_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn read_species_file(path: &Path) -> Result<Vec<GthSpecies>, CliError> {
    parse_gth_file(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn triple(v: &Option<Vec<u32>>, what: &str) -> Result<Option<[u32; 3]>, CliError> {
    match v {
        None => Ok(None),
        Some(v) => <[u32; 3]>::try_from(v.as_slice())
            .map(Some)
            .map_err(|_| CliError::Input(format!("--{what} needs three comma-separated values, got {}", v.len()))),
    }
}

fn parse_extra(s: &str) -> Result<(String, usize), CliError> {
    let (label, count) = s
        .split_once(':')
        .ok_or_else(|| CliError::Input(format!("--add expects LABEL:COUNT, got `{s}`")))?;
    let count = count
        .parse()
        .map_err(|_| CliError::Input(format!("invalid count in --add `{s}`")))?;
    Ok((label.to_string(), count))
}

/// Locates a cell: an existing path, a TOML file in the data directory, or
/// a bundled key.
enum CellSource {
    File(PathBuf),
    Bundled(&'static data::BundledStructure),
}

fn locate(cell: &str) -> Result<CellSource, CliError> {
    let path = Path::new(cell);
    if path.extension().is_some_and(|e| e == "toml") || path.components().count() > 1 {
        return Ok(CellSource::File(path.to_path_buf()));
    }
    if let Some(dir) = data_dir() {
        let p = dir.join(format!("{cell}.toml"));
        if p.exists() {
            return Ok(CellSource::File(p));
        }
    }
    if path.exists() {
        return Ok(CellSource::File(path.to_path_buf()));
    }
    Ok(CellSource::Bundled(data::structure(cell)?))
}

/// What the spec was built from, echoed into reports.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Source {
    pub cell: String,
    pub bundled: bool,
    pub species_overrides: Vec<String>,
}

impl SystemArgs {
    /// Builds the system spec described by these options.
    pub fn build(&self) -> Result<(SystemSpec, Source), CliError> {
        let resolver = SpeciesResolver::new(self.species.as_deref())?;
        let bits = triple(&self.bits, "bits")?;
        let (mut spec, bundled) = match locate(&self.cell)? {
            CellSource::Bundled(s) => {
                let n = bits.ok_or_else(|| CliError::Input("--bits is required for bundled cells".into()))?;
                (SystemSpec::from_structure(s, n, |l| resolver.resolve(l))?, true)
            }
            CellSource::File(p) => (from_toml(&p, bits, &resolver)?, false),
        };
        for e in &self.extra {
            let (label, count) = parse_extra(e)?;
            spec.add_species(resolver.resolve(&label)?, count);
        }
        if let Some(d) = triple(&self.deltas, "deltas")? {
            spec.deltas = d;
        }
        if let Some(b) = self.b {
            spec.b = b;
        }
        if let Some(b) = self.b_r {
            spec.b_r = b;
        }
        if let Some(i) = self.interp {
            spec.interp = i;
        }
        if let Some(e) = self.epsilon {
            spec.epsilon = e;
        }
        if let Some(k) = self.kinetic_bits {
            spec.kinetic_bits = k;
        }
        spec.validate()?;
        let source = Source { cell: self.cell.clone(), bundled, species_overrides: resolver.override_labels() };
        Ok((spec, source))
    }
}

fn from_toml(path: &Path, bits: Option<[u32; 3]>, resolver: &SpeciesResolver) -> Result<SystemSpec, CliError> {
    let text = read(path)?;
    let file: CellFile = toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let scale = match file.units {
        Units::Bohr => 1.0,
        Units::Angstrom => BOHR_PER_ANGSTROM,
    };
    let rows = file.lattice.map(|r| r.map(|x| x * scale));
    let atoms = file
        .atoms
        .iter()
        .map(|a| {
            let pos = match file.coordinates {
                Coordinates::Cartesian => a.position.map(|x| x * scale),
                Coordinates::Fractional => {
                    std::array::from_fn(|c| (0..3).map(|i| a.position[i] * rows[i][c]).sum())
                }
            };
            Atom { species: a.species.clone(), pos }
        })
        .collect();
    let mut cell = SimulationCell::new(rows, atoms)?;
    let reps = file.repeat.unwrap_or([1, 1, 1]);
    if reps != [1, 1, 1] {
        cell = cell.tile(reps)?;
    }
    let counts: BTreeMap<String, usize> = match &file.species {
        Some(s) => s.iter().map(|(k, v)| (k.clone(), v * reps.iter().product::<usize>())).collect(),
        None => {
            let mut m = BTreeMap::new();
            for a in cell.atoms() {
                *m.entry(a.species.clone()).or_default() += 1;
            }
            m
        }
    };
    if counts.is_empty() {
        return Err(CliError::Input(format!("{}: no species or atoms given", path.display())));
    }
    let species = counts
        .into_iter()
        .map(|(label, count)| Ok(SpeciesCount { species: resolver.resolve(&label)?, count }))
        .collect::<gthbe::Result<Vec<_>>>()?;
    let n = bits.or(file.bits).ok_or_else(|| CliError::Input("no grid bits: pass --bits or set `bits`".into()))?;
    let name = file
        .name
        .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    let mut spec = SystemSpec::new(name, cell, species, MillerGrid::new(n)?)?;
    if let Some(d) = file.deltas {
        spec.deltas = d;
    }
    Ok(spec)
}
