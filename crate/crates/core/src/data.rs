//! Bundled species parameters and simulation cells.
//!
//! Lattice rows are stored in Bohr exactly as tabulated (8 decimals). The
//! published structures do not come with atomic coordinates, so bundled
//! cells carry the species inventory only.

use std::sync::OnceLock;

use serde::Serialize;

use crate::costmodel::ArithCase;
use crate::error::{Error, Result};
use crate::lattice::SimulationCell;
use crate::pseudopotential::{parse_gth_file, GthSpecies};

/// Version tag of the embedded dataset, echoed into reports.
pub const DATASET_VERSION: &str = "gth-lda-2024.1/cells-2024.1";

const GTH_LDA: &str = include_str!("../data/gth-lda.txt");

/// All embedded species.
pub fn bundled_species() -> &'static [GthSpecies] {
    static CELL: OnceLock<Vec<GthSpecies>> = OnceLock::new();
    CELL.get_or_init(|| parse_gth_file(GTH_LDA).expect("embedded GTH table is well formed"))
}

/// Looks up an embedded species by element label.
pub fn species(label: &str) -> Result<&'static GthSpecies> {
    bundled_species()
        .iter()
        .find(|s| s.label == label)
        .ok_or_else(|| Error::Unknown { kind: "species", name: label.to_string() })
}

/// Where a bundled cell comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    /// Lattice vectors as tabulated alongside the resource estimates.
    Tabulated,
    /// Standard crystallographic cell from the literature; the resource
    /// tables quote results for this material without listing its vectors.
    Literature,
}

/// A named simulation cell with its composition.
#[derive(Debug, Clone, Serialize)]
pub struct BundledStructure {
    pub key: &'static str,
    pub title: &'static str,
    /// Lattice rows a₁, a₂, a₃ in Bohr.
    pub rows: [[f64; 3]; 3],
    pub composition: &'static [(&'static str, usize)],
    /// Box shifts (δ_x, δ_y, δ_z) used for the nested-box preparation.
    pub deltas: [u32; 3],
    /// Gramian arithmetic case when it is stated rather than detected.
    pub arith_case: Option<ArithCase>,
    pub provenance: Provenance,
}

impl BundledStructure {
    pub fn cell(&self) -> SimulationCell {
        SimulationCell::new(self.rows, Vec::new()).expect("bundled cells are valid")
    }

    /// Total electron count η = Σ_α L_α Z_α.
    pub fn electrons(&self) -> Result<usize> {
        self.composition
            .iter()
            .map(|(s, n)| Ok(species(s)?.z() as usize * n))
            .sum()
    }

    /// Number of nuclei.
    pub fn nuclei(&self) -> usize {
        self.composition.iter().map(|(_, n)| n).sum()
    }
}

const BOHR_PER_ANGSTROM: f64 = 1.0 / 0.529_177_210_903;

/// All bundled structures.
pub fn structures() -> &'static [BundledStructure] {
    static CELL: OnceLock<Vec<BundledStructure>> = OnceLock::new();
    CELL.get_or_init(|| {
        use Provenance::*;
        const LNO: &[(&str, usize)] = &[("Li", 4), ("Ni", 4), ("O", 8)];
        vec![
            BundledStructure {
                key: "LNO-C2m",
                title: "LiNiO2 (C2/m)",
                rows: [
                    [10.86498265, 0.13075864, 1.33714130],
                    [-5.95793520, 9.08669104, -1.33714130],
                    [-4.24456632, 2.25965848, 8.24103381],
                ],
                composition: LNO,
                deltas: [0, 0, 0],
                arith_case: None,
                provenance: Tabulated,
            },
            BundledStructure {
                key: "LNO-P21c",
                title: "LiNiO2 (P2_1/c)",
                rows: [
                    [9.17881463, 0.0, 1.09817823],
                    [0.0, 10.96132916, 0.0],
                    [-3.81775899, 0.0, 8.37050671],
                ],
                composition: LNO,
                deltas: [0, 0, 0],
                arith_case: None,
                provenance: Tabulated,
            },
            BundledStructure {
                key: "LNO-P2c",
                title: "LiNiO2 (P2/c)",
                rows: [
                    [9.22368214, 0.0, -1.52693970],
                    [0.0, 10.88085803, 0.0],
                    [-1.65511564, 0.0, 9.12855033],
                ],
                composition: LNO,
                deltas: [0, 0, 0],
                arith_case: None,
                provenance: Tabulated,
            },
            BundledStructure {
                key: "Pd-3x3",
                title: "Pd (3x3)",
                rows: [[15.86273910, 0.0, 0.0], [7.93136955, 13.73753504, 0.0], [0.0, 0.0, 27.53179798]],
                composition: &[("Pd", 27)],
                deltas: [1, 1, 0],
                arith_case: None,
                provenance: Tabulated,
            },
            BundledStructure {
                key: "Pt-2x2",
                title: "Pt (2x2)",
                rows: [[10.58834339, 0.0, 0.0], [5.29417170, 9.16977436, 0.0], [0.0, 0.0, 24.89695283]],
                composition: &[("Pt", 12)],
                deltas: [1, 1, 0],
                arith_case: None,
                provenance: Tabulated,
            },
            BundledStructure {
                key: "Pt-3x3",
                title: "Pt (3x3)",
                rows: [[15.88252454, 0.0, 0.0], [7.94126227, 13.75466973, 0.0], [0.0, 0.0, 24.89695283]],
                composition: &[("Pt", 27)],
                deltas: [1, 1, 0],
                arith_case: None,
                provenance: Tabulated,
            },
            BundledStructure {
                key: "Pt-4x4",
                title: "Pt (4x4)",
                rows: [[21.18893221, 0.0, 0.0], [-10.59446611, 18.35015357, 0.0], [0.0, 0.0, 24.56643973]],
                composition: &[("Pt", 48)],
                deltas: [0, 0, 0],
                arith_case: None,
                provenance: Tabulated,
            },
            BundledStructure {
                key: "Rh-3x3",
                title: "Rh (3x3)",
                rows: [[15.40909145, 0.0, 0.0], [7.70454572, 13.34466464, 0.0], [0.0, 0.0, 27.28499974]],
                composition: &[("Rh", 27)],
                deltas: [1, 1, 0],
                arith_case: None,
                provenance: Tabulated,
            },
            BundledStructure {
                key: "Li0.5MnO3",
                title: "Li0.5MnO3",
                rows: [[18.93505585, 0.0, 0.0], [0.0, 32.73005662, 0.0], [-3.20289682, 0.0, 9.06974057]],
                composition: &[("Li", 8), ("Mn", 16), ("O", 48)],
                deltas: [1, 0, 2],
                arith_case: None,
                provenance: Tabulated,
            },
            BundledStructure {
                key: "LLNMO",
                title: "Li0.75[Li0.17Ni0.25Mn0.58]O2",
                rows: [[10.78674574, 0.0, 0.0], [-8.09010655, 14.01250825, 0.0], [0.0, 0.0, 37.09853652]],
                composition: &[("Li", 22), ("Mn", 14), ("Ni", 6), ("O", 48)],
                deltas: [2, 1, 0],
                arith_case: None,
                provenance: Tabulated,
            },
            BundledStructure {
                key: "Li0.75MnO2F",
                title: "Li0.75MnO2F",
                rows: [
                    [23.12230001, -0.01813051, -0.01224671],
                    [-0.02683881, 16.04617832, 0.00034827],
                    [-0.02005775, 0.00146633, 15.56081563],
                ],
                composition: &[("Li", 12), ("Mn", 16), ("O", 32), ("F", 16)],
                deltas: [0, 1, 1],
                // Costed as a diagonal Gramian with g22 = g33, as stated for
                // this material; the tabulated vectors are only approximately so.
                arith_case: Some(ArithCase::TwoEqualDiag { distinct: 0 }),
                provenance: Tabulated,
            },
            BundledStructure {
                key: "diamond",
                title: "C (diamond)",
                rows: [
                    [0.0, 10.11097963, 10.11097963],
                    [10.11097963, 0.0, 10.11097963],
                    [10.11097963, 10.11097963, 0.0],
                ],
                composition: &[("C", 54)],
                deltas: [0, 0, 0],
                arith_case: None,
                provenance: Tabulated,
            },
            BundledStructure {
                key: "AlN",
                title: "AlN (wurtzite)",
                rows: [[17.63114474, 0.0, 0.0], [-8.81557237, 15.26901924, 0.0], [0.0, 0.0, 28.23250830]],
                composition: &[("Al", 54), ("N", 54)],
                deltas: [1, 1, 0],
                arith_case: None,
                provenance: Tabulated,
            },
            BundledStructure {
                key: "CaTiO3",
                title: "CaTiO3 (Pnma)",
                // Orthorhombic cell of Sasaki, Prewitt, Bass & Liebermann (1987).
                rows: [
                    [5.3796 * BOHR_PER_ANGSTROM, 0.0, 0.0],
                    [0.0, 5.4423 * BOHR_PER_ANGSTROM, 0.0],
                    [0.0, 0.0, 7.6401 * BOHR_PER_ANGSTROM],
                ],
                composition: &[("Ca", 4), ("Ti", 4), ("O", 12)],
                deltas: [1, 1, 0],
                arith_case: None,
                provenance: Literature,
            },
        ]
    })
}

/// Looks up a bundled structure by key (case-insensitive).
pub fn structure(key: &str) -> Result<&'static BundledStructure> {
    structures()
        .iter()
        .find(|s| s.key.eq_ignore_ascii_case(key))
        .ok_or_else(|| Error::Unknown { kind: "structure", name: key.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudopotential::species_term_count;

    #[test]
    fn every_species_parses_and_validates() {
        let labels: Vec<_> = bundled_species().iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["Li", "C", "N", "O", "F", "Al", "Ca", "Ti", "Mn", "Ni", "Rh", "Pd", "Pt"]);
        for s in bundled_species() {
            s.validate().unwrap();
        }
    }

    #[test]
    fn every_structure_resolves_its_species() {
        for s in structures() {
            s.cell();
            for (label, _) in s.composition {
                species(label).unwrap();
            }
            assert!(s.deltas.contains(&0));
        }
        assert_eq!(structure("diamond").unwrap().electrons().unwrap(), 216);
        assert_eq!(structure("lno-c2m").unwrap().electrons().unwrap(), 92);
        assert!(structure("graphite").is_err());
    }

    #[test]
    fn term_counts() {
        let count = |l| species_term_count(species(l).unwrap());
        assert_eq!(count("C"), 4);
        assert_eq!(count("Li"), 5);
        assert_eq!(count("Ni"), 11);
        assert_eq!(count("Al"), 6);
        for l in ["N", "O", "F"] {
            assert_eq!(count(l), 4);
        }
        for l in ["Mn", "Pt", "Pd", "Rh"] {
            assert_eq!(count(l), 11);
        }
    }
}
