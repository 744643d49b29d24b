//! Simulation cells, reciprocal geometry and Miller-index grids.
//!
//! Plane waves are labelled by integer Miller vectors `p`; the physical
//! momentum is `k_p = p_x g⁽¹⁾ + p_y g⁽²⁾ + p_z g⁽³⁾`, so every norm and inner
//! product reduces to a quadratic form in the Gramian `g_ij = g⁽ⁱ⁾·g⁽ʲ⁾`.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer Miller vector.
pub type Miller = [i64; 3];

/// A nucleus inside the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub species: String,
    /// Cartesian position in Bohr.
    pub pos: [f64; 3],
}

/// A periodic simulation cell: three lattice rows (Bohr) plus its atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationCell {
    rows: [[f64; 3]; 3],
    atoms: Vec<Atom>,
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl SimulationCell {
    /// Builds a cell from lattice rows `a₁, a₂, a₃` (Bohr).
    ///
    /// The rows must form a right-handed basis with non-negligible volume and
    /// every atom position must be finite.
    pub fn new(rows: [[f64; 3]; 3], atoms: Vec<Atom>) -> Result<Self> {
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateCell("non-finite lattice entry".into()));
        }
        let det = det3(&rows);
        let scale: f64 = rows.iter().map(norm3).product();
        if !(det.abs() > 1e-12 * scale) {
            return Err(Error::DegenerateCell(format!("lattice rows are linearly dependent (det = {det:e})")));
        }
        if det < 0.0 {
            return Err(Error::DegenerateCell(format!("lattice rows are left-handed (det = {det:e})")));
        }
        if let Some(a) = atoms.iter().find(|a| a.pos.iter().any(|x| !x.is_finite())) {
            return Err(Error::DegenerateCell(format!("atom `{}` has a non-finite position", a.species)));
        }
        Ok(Self { rows, atoms })
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.rows
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Cell volume Ω = det(a) in Bohr³.
    pub fn volume(&self) -> f64 {
        det3(&self.rows)
    }

    /// Replicates the cell `reps = (i, j, k)` times along its three rows.
    pub fn tile(&self, reps: [usize; 3]) -> Result<Self> {
        if reps.contains(&0) {
            return Err(Error::InvalidArgument("supercell repetitions must be ≥ 1".into()));
        }
        let mut rows = self.rows;
        for (row, &r) in rows.iter_mut().zip(&reps) {
            for x in row.iter_mut() {
                *x *= r as f64;
            }
        }
        let mut atoms = Vec::with_capacity(self.atoms.len() * reps.iter().product::<usize>());
        for i in 0..reps[0] {
            for j in 0..reps[1] {
                for k in 0..reps[2] {
                    let shift: [f64; 3] = std::array::from_fn(|c| {
                        i as f64 * self.rows[0][c] + j as f64 * self.rows[1][c] + k as f64 * self.rows[2][c]
                    });
                    atoms.extend(self.atoms.iter().map(|a| Atom {
                        species: a.species.clone(),
                        pos: std::array::from_fn(|c| a.pos[c] + shift[c]),
                    }));
                }
            }
        }
        Self::new(rows, atoms)
    }
}

/// Reciprocal vectors (as rows), their Gramian and the cell volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalGeometry {
    pub g: [[f64; 3]; 3],
    pub gramian: [[f64; 3]; 3],
    pub volume: f64,
}

impl ReciprocalGeometry {
    /// Computes `g = 2π (a⁻¹)ᵀ`, the Gramian and Ω for a cell.
    pub fn new(cell: &SimulationCell) -> Result<Self> {
        let a = Matrix3::from_fn(|i, j| cell.rows[i][j]);
        let inv = a
            .try_inverse()
            .ok_or_else(|| Error::DegenerateCell("lattice matrix is singular".into()))?;
        let gm = inv.transpose() * (2.0 * std::f64::consts::PI);
        let g: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| gm[(i, j)]));
        // Exactly symmetric: each entry sums the same products in the same order.
        let gramian: [[f64; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|c| g[i][c] * g[j][c]).sum()));
        check_positive_definite(&gramian)?;
        Ok(Self { g, gramian, volume: cell.volume() })
    }

    /// ‖k_p‖² from the Gramian quadratic form.
    #[inline]
    pub fn norm_sq(&self, p: Miller) -> f64 {
        let g = &self.gramian;
        let (x, y, z) = (p[0] as f64, p[1] as f64, p[2] as f64);
        g[0][0] * x * x + g[1][1] * y * y + g[2][2] * z * z + 2.0 * (g[0][1] * x * y + g[1][2] * y * z + g[0][2] * x * z)
    }

    /// k_p · k_q from the Gramian bilinear form.
    #[inline]
    pub fn dot(&self, p: Miller, q: Miller) -> f64 {
        let g = &self.gramian;
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += g[i][j] * p[i] as f64 * q[j] as f64;
            }
        }
        s
    }

    /// Cartesian momentum vector k_p.
    pub fn k_vector(&self, p: Miller) -> [f64; 3] {
        std::array::from_fn(|c| (0..3).map(|i| p[i] as f64 * self.g[i][c]).sum())
    }
}

/// Cholesky-style positive-definiteness test with a relative pivot threshold.
fn check_positive_definite(m: &[[f64; 3]; 3]) -> Result<()> {
    let scale = m.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let tol = 1e-12 * scale;
    let mut l = [[0.0f64; 3]; 3];
    for j in 0..3 {
        let pivot = m[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if !(pivot > tol) {
            return Err(Error::NotPositiveDefinite { pivot });
        }
        l[j][j] = pivot.sqrt();
        for i in j + 1..3 {
            l[i][j] = (m[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>()) / l[j][j];
        }
    }
    Ok(())
}

/// Which set of Miller vectors to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// Basis grid: |p_a| ≤ 2^{n_a−1} − 1.
    G,
    /// Difference grid: |ν_a| ≤ 2^{n_a} − 2.
    Gd,
    /// Difference grid without the origin.
    G0,
    /// Full signed box addressed by the preparation registers: |ν_a| ≤ 2^{n_a} − 1.
    Box,
    /// Full signed box without the origin.
    Box0,
}

/// Plane-wave grid described by bits per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MillerGrid {
    pub n: [u32; 3],
}

impl MillerGrid {
    pub const MAX_BITS: u32 = 16;

    pub fn new(n: [u32; 3]) -> Result<Self> {
        if n.iter().any(|&b| b == 0 || b > Self::MAX_BITS) {
            return Err(Error::InvalidArgument(format!(
                "grid bits must lie in 1..={}, got {n:?}",
                Self::MAX_BITS
            )));
        }
        Ok(Self { n })
    }

    pub fn cubic(n: u32) -> Result<Self> {
        Self::new([n; 3])
    }

    /// Points per axis of the basis grid, N_a = 2^{n_a} − 1.
    pub fn points_per_axis(&self) -> [i64; 3] {
        self.n.map(|b| (1i64 << b) - 1)
    }

    /// Half-width of the region along each axis.
    pub fn half_range(&self, region: Region) -> [i64; 3] {
        self.n.map(|b| match region {
            Region::G => (1i64 << (b - 1)) - 1,
            Region::Gd | Region::G0 => (1i64 << b) - 2,
            Region::Box | Region::Box0 => (1i64 << b) - 1,
        })
    }

    fn excludes_origin(region: Region) -> bool {
        matches!(region, Region::G0 | Region::Box0)
    }

    /// Number of points in the region.
    pub fn count(&self, region: Region) -> usize {
        let h = self.half_range(region);
        let full: usize = h.iter().map(|&x| (2 * x + 1) as usize).product();
        full - usize::from(Self::excludes_origin(region))
    }

    /// Membership test.
    pub fn contains(&self, region: Region, p: Miller) -> bool {
        let h = self.half_range(region);
        (0..3).all(|a| p[a].abs() <= h[a]) && !(Self::excludes_origin(region) && p == [0, 0, 0])
    }

    /// Enumerates the region with x slowest and z fastest, each ascending.
    pub fn enumerate(&self, region: Region) -> impl Iterator<Item = Miller> {
        let h = self.half_range(region);
        let skip0 = Self::excludes_origin(region);
        (-h[0]..=h[0]).flat_map(move |x| {
            (-h[1]..=h[1]).flat_map(move |y| (-h[2]..=h[2]).map(move |z| [x, y, z]))
        })
        .filter(move |p| !(skip0 && *p == [0, 0, 0]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cubic(l: f64) -> SimulationCell {
        SimulationCell::new([[l, 0.0, 0.0], [0.0, l, 0.0], [0.0, 0.0, l]], vec![]).unwrap()
    }

    #[test]
    fn cubic_reciprocal_vectors() {
        let geom = ReciprocalGeometry::new(&cubic(3.0)).unwrap();
        let k = 2.0 * PI / 3.0;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { k } else { 0.0 };
                assert!((geom.g[i][j] - want).abs() < 1e-14);
                assert!((geom.gramian[i][j] - want * want * (i == j) as u8 as f64).abs() < 1e-14);
            }
        }
        assert!((geom.volume - 27.0).abs() < 1e-12);
        assert!((geom.norm_sq([1, 0, 0]) - k * k).abs() < 1e-14);
        assert_eq!(geom.norm_sq([0, 0, 0]), 0.0);
        assert_eq!(geom.dot([1, 0, 0], [0, 1, 0]), 0.0);
    }

    #[test]
    fn reciprocal_duality() {
        let cell = SimulationCell::new(
            [[4.0, 0.3, -0.2], [0.5, 5.0, 0.1], [-0.7, 0.2, 6.0]],
            vec![],
        )
        .unwrap();
        let geom = ReciprocalGeometry::new(&cell).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|c| geom.g[i][c] * cell.rows()[j][c]).sum();
                let want = if i == j { 2.0 * PI } else { 0.0 };
                assert!((d - want).abs() < 1e-10 * 2.0 * PI);
            }
        }
    }

    #[test]
    fn degenerate_and_left_handed_cells_are_rejected() {
        let flat = SimulationCell::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]], vec![]);
        assert!(matches!(flat, Err(Error::DegenerateCell(_))));
        let left = SimulationCell::new([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]], vec![]);
        assert!(matches!(left, Err(Error::DegenerateCell(_))));
    }

    #[test]
    fn grid_counts() {
        let g = MillerGrid::cubic(2).unwrap();
        assert_eq!(g.count(Region::G), 27);
        assert_eq!(g.count(Region::Gd), 125);
        assert_eq!(g.count(Region::G0), 124);
        assert_eq!(g.enumerate(Region::G).count(), 27);
        assert_eq!(g.enumerate(Region::Gd).count(), 125);
        assert_eq!(g.enumerate(Region::G0).count(), 124);
        assert_eq!(g.enumerate(Region::Box0).count(), 7 * 7 * 7 - 1);
    }

    #[test]
    fn enumeration_order_is_lexicographic_with_z_fastest() {
        let g = MillerGrid::cubic(2).unwrap();
        let pts: Vec<_> = g.enumerate(Region::G).take(4).collect();
        assert_eq!(pts, vec![[-1, -1, -1], [-1, -1, 0], [-1, -1, 1], [-1, 0, -1]]);
        let all: Vec<_> = g.enumerate(Region::Gd).collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn tiling_scales_rows_and_replicates_atoms() {
        let atoms = (0..4)
            .map(|i| Atom { species: "C".into(), pos: [0.5 * i as f64, 0.0, 0.0] })
            .collect();
        let cell = SimulationCell::new([[3.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 3.0]], atoms).unwrap();
        assert_eq!(cell.tile([1, 1, 1]).unwrap(), cell);
        let big = cell.tile([2, 2, 1]).unwrap();
        assert_eq!(big.atoms().len(), 16);
        assert!((big.volume() - 4.0 * cell.volume()).abs() < 1e-9);
        let g1 = ReciprocalGeometry::new(&cell).unwrap();
        let g2 = ReciprocalGeometry::new(&cell.tile([2, 1, 1]).unwrap()).unwrap();
        for c in 0..3 {
            assert!((g2.g[0][c] - 0.5 * g1.g[0][c]).abs() < 1e-14);
        }
        assert!(cell.tile([0, 1, 1]).is_err());
    }
}
