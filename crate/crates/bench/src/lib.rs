//! Fixtures shared by the criterion benchmarks.

use gthbe::{GthSpecies, MillerGrid, ReciprocalGeometry, SystemSpec};

/// A bundled system at the given grid.
pub fn system(key: &str, n: [u32; 3]) -> SystemSpec {
    SystemSpec::bundled(key, n).expect("bundled structure")
}

/// Geometry, grid and species references of a system.
pub fn parts(spec: &SystemSpec) -> (ReciprocalGeometry, MillerGrid, Vec<&GthSpecies>) {
    let geom = spec.geometry().expect("valid cell");
    (geom, spec.grid, spec.species.iter().map(|s| &s.species).collect())
}
