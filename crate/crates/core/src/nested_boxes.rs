//! Nested-box decomposition of momentum space for inequality-test state
//! preparation.
//!
//! Box μ along axis a is `|ν_a| ≤ min(2^{μ−δ_a−1}, 2^{n_a}) − 1` (only the
//! origin when μ − δ_a − 1 < 0). A register prepares a superposition over
//! μ, then a uniform superposition over box μ, then flags success with an
//! inequality test against the target amplitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Miller, MillerGrid, ReciprocalGeometry, Region};
use crate::sum::ExactSum;

/// Largest supported shift on any axis.
pub const MAX_DELTA: u32 = 4;

/// Which box size multiplies each telescoped amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BoxCount {
    /// Distinct Miller vectors in the box that belong to the prepared
    /// region (the origin is dropped when it is excluded).
    #[default]
    Distinct,
    /// Generated sign-magnitude bitstrings |B'_μ|, counting negative zeros.
    Signed,
}

/// Nested-box geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxScheme {
    pub grid: MillerGrid,
    pub deltas: [u32; 3],
    pub mu_min: u32,
    pub mu_max: u32,
}

impl BoxScheme {
    /// Builds the scheme. `include_origin` selects μ_min = 1 (origin is its
    /// own box, used for the nonlocal terms) instead of μ_min = 2.
    pub fn new(grid: MillerGrid, deltas: [u32; 3], include_origin: bool) -> Result<Self> {
        if deltas.iter().all(|&d| d > 0) {
            return Err(Error::InvalidArgument(format!("box shifts {deltas:?} must include a zero")));
        }
        if deltas.iter().any(|&d| d > MAX_DELTA) {
            return Err(Error::InvalidArgument(format!("box shifts {deltas:?} exceed {MAX_DELTA}")));
        }
        let mu_max = (0..3).map(|a| grid.n[a] + deltas[a]).max().unwrap() + 1;
        Ok(Self { grid, deltas, mu_min: if include_origin { 1 } else { 2 }, mu_max })
    }

    /// Half-widths of box μ (μ ≥ 1).
    pub fn half_widths(&self, mu: u32) -> [i64; 3] {
        std::array::from_fn(|a| {
            let e = mu as i64 - self.deltas[a] as i64 - 1;
            if e < 0 {
                0
            } else {
                (1i64 << e.min(self.grid.n[a] as i64)) - 1
            }
        })
    }

    /// Membership in B_μ (six inequalities).
    pub fn contains(&self, mu: u32, nu: Miller) -> bool {
        let w = self.half_widths(mu);
        (0..3).all(|a| -w[a] <= nu[a] && nu[a] <= w[a])
    }

    /// Smallest μ with ν ∈ B_μ, from the leading-one position of each component.
    pub fn mu_of(&self, nu: Miller) -> u32 {
        (0..3)
            .map(|a| axis_mu(nu[a], self.deltas[a]))
            .max()
            .unwrap()
    }

    /// (|B_μ|, |B'_μ|): distinct points and generated signed bitstrings.
    pub fn box_sizes(&self, mu: u32) -> Result<(u64, u64)> {
        if mu < 1 || mu > self.mu_max {
            return Err(Error::InvalidArgument(format!("box index {mu} outside 1..={}", self.mu_max)));
        }
        let w = self.half_widths(mu);
        let distinct = w.iter().map(|&x| (2 * x + 1) as u64).product();
        let signed = w.iter().map(|&x| 2 * (x + 1) as u64).product();
        Ok((distinct, signed))
    }

    /// Number of points in the shell B_μ ∖ B_{μ−1} (B₀ = ∅).
    pub fn shell_size(&self, mu: u32) -> u64 {
        let inner = if mu > 1 { self.box_sizes(mu - 1).unwrap().0 } else { 0 };
        self.box_sizes(mu).unwrap().0 - inner
    }

    /// Amplitude multiplier for box μ under the chosen counting convention.
    pub fn count(&self, mu: u32, how: BoxCount) -> u64 {
        let (d, s) = self.box_sizes(mu).unwrap();
        match how {
            BoxCount::Distinct => d - u64::from(self.mu_min == 2),
            BoxCount::Signed => s,
        }
    }

    /// The prepared region: the full signed box, minus the origin when μ_min = 2.
    pub fn region(&self) -> Region {
        if self.mu_min == 1 {
            Region::Box
        } else {
            Region::Box0
        }
    }

    /// Per-axis μ lookup tables for fast classification of box points.
    pub(crate) fn axis_tables(&self) -> [Vec<u32>; 3] {
        let h = self.grid.half_range(Region::Box);
        std::array::from_fn(|a| (-h[a]..=h[a]).map(|v| axis_mu(v, self.deltas[a])).collect())
    }

    /// Shell statistics of `values`, given over [`Region::Box`] in enumeration order.
    pub fn shell_stats(&self, values: &[f64]) -> Vec<ShellStat> {
        let h = self.grid.half_range(Region::Box);
        assert_eq!(values.len(), self.grid.count(Region::Box));
        let tabs = self.axis_tables();
        let mut stats = vec![ShellStat::default(); self.mu_max as usize + 1];
        let mut sums = vec![ExactSum::new(); self.mu_max as usize + 1];
        let (ny, nz) = ((2 * h[1] + 1) as usize, (2 * h[2] + 1) as usize);
        for (ix, &mx) in tabs[0].iter().enumerate() {
            for (iy, &my) in tabs[1].iter().enumerate() {
                let mxy = mx.max(my);
                let base = (ix * ny + iy) * nz;
                for (iz, &mz) in tabs[2].iter().enumerate() {
                    let mu = mxy.max(mz) as usize;
                    if mu < self.mu_min as usize {
                        continue;
                    }
                    let v = values[base + iz];
                    let s = &mut stats[mu];
                    s.size += 1;
                    s.max = s.max.max(v);
                    sums[mu].add(v);
                }
            }
        }
        for (s, t) in stats.iter_mut().zip(&sums) {
            s.sum = t.value();
        }
        stats
    }
}

fn axis_mu(v: i64, delta: u32) -> u32 {
    if v == 0 {
        1
    } else {
        (64 - v.unsigned_abs().leading_zeros()) + delta + 1
    }
}

/// Size, maximum and sum of a function over one shell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ShellStat {
    pub size: u64,
    pub max: f64,
    pub sum: f64,
}

/// Preparation amplitudes over μ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrepWeights {
    pub mu_min: u32,
    /// ψ̃²_μ for μ = μ_min..=μ_max.
    pub psi_tilde_sq: Vec<f64>,
    /// Normalized ψ_μ.
    pub psi: Vec<f64>,
    /// Σ_ν u(ν) over the prepared region.
    pub target_sum: f64,
    /// Probability that the inequality test succeeds.
    pub success_probability: f64,
}

fn sample(scheme: &BoxScheme, u: impl Fn(Miller) -> f64) -> Result<Vec<f64>> {
    let origin_excluded = scheme.mu_min == 2;
    let vals: Vec<f64> = scheme
        .grid
        .enumerate(Region::Box)
        .map(|nu| if origin_excluded && nu == [0, 0, 0] { 0.0 } else { u(nu) })
        .collect();
    if let Some(v) = vals.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidArgument(format!("target weights must be finite and non-negative, found {v}")));
    }
    Ok(vals)
}

fn finish(mu_min: u32, psi_tilde_sq: Vec<f64>, target_sum: f64) -> Result<PrepWeights> {
    let total = crate::sum::sum(psi_tilde_sq.iter().copied());
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("target weights are identically zero".into()));
    }
    let psi = psi_tilde_sq.iter().map(|w| (w / total).sqrt()).collect();
    Ok(PrepWeights { mu_min, psi_tilde_sq, psi, target_sum, success_probability: target_sum / total })
}

/// Telescoped preparation weights from precomputed shell statistics.
pub fn prep_weights_from_stats(scheme: &BoxScheme, stats: &[ShellStat], how: BoxCount) -> Result<PrepWeights> {
    let (lo, hi) = (scheme.mu_min as usize, scheme.mu_max as usize);
    // tail[μ] = max of u over B_max ∖ B_{μ−1}
    let mut tail = vec![0.0f64; hi + 2];
    for mu in (lo..=hi).rev() {
        tail[mu] = tail[mu + 1].max(stats[mu].max);
    }
    let psi_tilde_sq = (lo..=hi)
        .map(|mu| scheme.count(mu as u32, how) as f64 * (tail[mu] - tail[mu + 1]))
        .collect();
    let target_sum = crate::sum::sum(stats[lo..=hi].iter().map(|s| s.sum));
    finish(scheme.mu_min, psi_tilde_sq, target_sum)
}

/// Telescoped preparation weights for target u.
pub fn prep_weights(scheme: &BoxScheme, u: impl Fn(Miller) -> f64, how: BoxCount) -> Result<PrepWeights> {
    let vals = sample(scheme, u)?;
    prep_weights_from_stats(scheme, &scheme.shell_stats(&vals), how)
}

/// Pre-amplification success probability of the inequality-test preparation.
pub fn success_probability(scheme: &BoxScheme, u: impl Fn(Miller) -> f64, how: BoxCount) -> Result<f64> {
    Ok(prep_weights(scheme, u, how)?.success_probability)
}

/// Shell-disjoint variant: ψ̃'²_μ = |B_μ ∖ B_{μ−1}| · max over the shell.
pub fn shell_prep_weights(scheme: &BoxScheme, u: impl Fn(Miller) -> f64) -> Result<PrepWeights> {
    let vals = sample(scheme, u)?;
    let stats = scheme.shell_stats(&vals);
    let (lo, hi) = (scheme.mu_min as usize, scheme.mu_max as usize);
    let psi_tilde_sq = (lo..=hi).map(|mu| stats[mu].size as f64 * stats[mu].max).collect();
    let target_sum = crate::sum::sum(stats[lo..=hi].iter().map(|s| s.sum));
    finish(scheme.mu_min, psi_tilde_sq, target_sum)
}

/// The Coulomb-like weighting 1/‖k_ν‖² over the full box without the origin.
pub fn inverse_square_weights(geom: &ReciprocalGeometry, grid: &MillerGrid) -> Vec<f64> {
    grid.enumerate(Region::Box)
        .map(|nu| if nu == [0, 0, 0] { 0.0 } else { 1.0 / geom.norm_sq(nu) })
        .collect()
}

/// Result of the exhaustive δ search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaChoice {
    pub deltas: [u32; 3],
    pub success_probability: f64,
}

/// Exhaustive search over shifts 0..=max_delta (one component zero)
/// maximizing the success probability for u = 1/‖k_ν‖². Ties prefer the
/// smallest shift sum, then the lexicographically smallest triple.
pub fn optimize_deltas(grid: &MillerGrid, geom: &ReciprocalGeometry, max_delta: u32) -> Result<DeltaChoice> {
    if max_delta > MAX_DELTA {
        return Err(Error::InvalidArgument(format!("max shift {max_delta} exceeds {MAX_DELTA}")));
    }
    let vals = inverse_square_weights(geom, grid);
    let mut best: Option<(DeltaChoice, u32)> = None;
    for dx in 0..=max_delta {
        for dy in 0..=max_delta {
            for dz in 0..=max_delta {
                let deltas = [dx, dy, dz];
                if deltas.iter().all(|&d| d > 0) {
                    continue;
                }
                let scheme = BoxScheme::new(*grid, deltas, false)?;
                let p = prep_weights_from_stats(&scheme, &scheme.shell_stats(&vals), BoxCount::Distinct)?
                    .success_probability;
                let s = dx + dy + dz;
                let better = match &best {
                    None => true,
                    Some((b, bs)) => p > b.success_probability || (p == b.success_probability && s < *bs),
                };
                if better {
                    best = Some((DeltaChoice { deltas, success_probability: p }, s));
                }
            }
        }
    }
    Ok(best.unwrap().0)
}
