//! Full description of one simulation: cell, species inventory, grid and
//! arithmetic precision.

use serde::Serialize;

use crate::costmodel::ArithCase;
use crate::data::{self, BundledStructure};
use crate::error::{Error, Result};
use crate::interpolation::InterpSpec;
use crate::lattice::{MillerGrid, ReciprocalGeometry, SimulationCell};
use crate::pseudopotential::GthSpecies;

/// Default bits of coherent arithmetic.
pub const DEFAULT_B: u32 = 20;
/// Default bits for rotation angles.
pub const DEFAULT_B_R: u32 = 7;
/// Default target precision (Hartree).
pub const DEFAULT_EPSILON: f64 = 1.6e-3;
/// Default bits of the kinetic equal-superposition size d.
pub const DEFAULT_KINETIC_BITS: u32 = 10;

/// A species together with its number of nuclei L_α.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeciesCount {
    pub species: GthSpecies,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSpec {
    pub name: String,
    pub cell: SimulationCell,
    pub species: Vec<SpeciesCount>,
    pub grid: MillerGrid,
    /// Box shifts used for the nested-box preparations.
    pub deltas: [u32; 3],
    pub b: u32,
    pub b_r: u32,
    pub interp: InterpSpec,
    pub epsilon: f64,
    /// Bits of the kinetic superposition size d.
    pub kinetic_bits: u32,
    /// Gramian arithmetic case; detected from the geometry when `None`.
    pub arith_case: Option<ArithCase>,
}

impl SystemSpec {
    /// Builds a spec with default precision settings.
    pub fn new(name: impl Into<String>, cell: SimulationCell, species: Vec<SpeciesCount>, grid: MillerGrid) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            cell,
            species,
            grid,
            deltas: [0, 0, 0],
            b: DEFAULT_B,
            b_r: DEFAULT_B_R,
            interp: InterpSpec::default(),
            epsilon: DEFAULT_EPSILON,
            kinetic_bits: DEFAULT_KINETIC_BITS,
            arith_case: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Spec for a bundled structure with embedded species and defaults.
    pub fn bundled(key: &str, n: [u32; 3]) -> Result<Self> {
        let s = data::structure(key)?;
        Self::from_structure(s, n, |label| data::species(label).cloned())
    }

    /// Spec for a bundled structure with a custom species resolver.
    pub fn from_structure(
        s: &BundledStructure,
        n: [u32; 3],
        resolve: impl Fn(&str) -> Result<GthSpecies>,
    ) -> Result<Self> {
        let species = s
            .composition
            .iter()
            .map(|&(label, count)| Ok(SpeciesCount { species: resolve(label)?, count }))
            .collect::<Result<Vec<_>>>()?;
        let mut spec = Self::new(s.key, s.cell(), species, MillerGrid::new(n)?)?;
        spec.deltas = s.deltas;
        spec.arith_case = s.arith_case;
        Ok(spec)
    }

    /// Adds `count` nuclei of a species, merging with an existing entry.
    pub fn add_species(&mut self, species: GthSpecies, count: usize) {
        match self.species.iter_mut().find(|s| s.species.label == species.label) {
            Some(s) => s.count += count,
            None => self.species.push(SpeciesCount { species, count }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.species.is_empty() || self.electrons() == 0 {
            return Err(Error::InvalidArgument("system has no electrons".into()));
        }
        let n_max = *self.grid.n.iter().max().unwrap();
        if self.b < n_max + 2 {
            return Err(Error::InvalidArgument(format!(
                "arithmetic precision b = {} must be at least max(n) + 2 = {}",
                self.b,
                n_max + 2
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("ε must be positive, got {}", self.epsilon)));
        }
        if self.b_r == 0 || self.kinetic_bits == 0 {
            return Err(Error::InvalidArgument("b_r and the kinetic bits must be positive".into()));
        }
        if !self.cell.atoms().is_empty() && self.cell.atoms().len() != self.nuclei() {
            return Err(Error::InvalidArgument(format!(
                "cell lists {} atoms but the species counts sum to {}",
                self.cell.atoms().len(),
                self.nuclei()
            )));
        }
        for s in &self.species {
            s.species.validate()?;
        }
        Ok(())
    }

    /// Electron count η = Σ_α L_α Z_α.
    pub fn electrons(&self) -> usize {
        self.species.iter().map(|s| s.count * s.species.z() as usize).sum()
    }

    /// Total number of nuclei L.
    pub fn nuclei(&self) -> usize {
        self.species.iter().map(|s| s.count).sum()
    }

    pub fn geometry(&self) -> Result<ReciprocalGeometry> {
        ReciprocalGeometry::new(&self.cell)
    }

    /// Arithmetic case: the stated override, else detected from the Gramian.
    pub fn resolved_arith_case(&self) -> Result<ArithCase> {
        match self.arith_case {
            Some(c) => Ok(c),
            None => Ok(ArithCase::classify(&self.geometry()?.gramian)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_specs_carry_structure_settings() {
        let s = SystemSpec::bundled("Pt-2x2", [5, 5, 7]).unwrap();
        assert_eq!(s.electrons(), 120);
        assert_eq!(s.nuclei(), 12);
        assert_eq!(s.deltas, [1, 1, 0]);
        assert_eq!(s.resolved_arith_case().unwrap(), ArithCase::Hexagonal);
    }

    #[test]
    fn adding_species_merges_counts() {
        let mut s = SystemSpec::bundled("Pt-2x2", [5, 5, 7]).unwrap();
        s.add_species(data::species("C").unwrap().clone(), 1);
        s.add_species(data::species("O").unwrap().clone(), 1);
        s.add_species(data::species("Pt").unwrap().clone(), 1);
        assert_eq!(s.electrons(), 120 + 4 + 6 + 10);
        assert_eq!(s.nuclei(), 15);
    }

    #[test]
    fn precision_must_cover_the_grid() {
        let mut s = SystemSpec::bundled("diamond", [6, 6, 6]).unwrap();
        s.b = 7;
        assert!(s.validate().is_err());
        s.b = 8;
        s.validate().unwrap();
    }
}
