//! Maxima of nonlocal matrix elements over the basis grid.
//!
//! For a momentum transfer ν and a projector pair (l, i, j) the nonlocal
//! block-encoding weight needs
//!
//! ℵ_lij(ν) = max_{q ∈ G, q − ν ∈ G} |P_l(cos θ_pq) F̃ⁱ_l(r_l‖k_p‖) F̃ʲ_l(r_l‖k_q‖)|
//!
//! with p = q − ν. Writing W = 2q − ν turns the search into a walk over a
//! precomputed list of W (one list per parity class) sorted by ‖k_W‖²;
//! since ‖k_p‖² + ‖k_q‖² = (‖k_W‖² + ‖k_ν‖²)/2 grows along the list, a
//! monotone envelope of |F̃ⁱ(x)F̃ʲ(y)| over x² + y² ≥ s proves when no later
//! entry can beat the best value found.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::radial::{decay_bound, radial_poly, relaxation_table, DecayBound, RelaxationTable};
use crate::error::{Error, Result};
use crate::lattice::{Miller, MillerGrid, ReciprocalGeometry, Region};
use crate::nested_boxes::BoxScheme;
use crate::pseudopotential::{projector_constant_scaled, GthSpecies};
use crate::sum::ExactSum;

/// How ℵ is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AlephStrategy {
    /// Sorted lattice walk with a proven stopping rule; exact up to values
    /// below [`ALEPH_FLOOR`].
    #[default]
    Exact,
    /// Scan of every admissible q. Sweeps are limited to n ≤ 4.
    Brute,
    /// Even-q subgrid followed by local refinement; a lower bound.
    Decimated,
    /// Continuum envelope in ‖k_ν‖ only; an upper bound.
    Relaxation,
}

impl std::str::FromStr for AlephStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" | "bound" => Self::Exact,
            "brute" => Self::Brute,
            "decimated" => Self::Decimated,
            "relaxation" => Self::Relaxation,
            _ => return Err(Error::InvalidArgument(format!("unknown ℵ strategy `{s}`"))),
        })
    }
}

impl std::fmt::Display for AlephStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Brute => "brute",
            Self::Decimated => "decimated",
            Self::Relaxation => "relaxation",
        })
    }
}

/// Which quantity is maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AlephForm {
    /// One maximum per (l, i, j), including the Legendre factor.
    #[default]
    Separated,
    /// One maximum per (l, i, j) with the Legendre factor omitted.
    NoLegendre,
    /// A single maximum of the complete |u_non|·Ω over all channels.
    Tight,
}

/// Largest grid bit count supported by the list-based strategies.
pub const MAX_SWEEP_BITS: u32 = 7;
/// Largest grid bit count for brute-force sweeps.
pub const MAX_BRUTE_BITS: u32 = 4;
/// Values below this are not resolved further by the exact strategy; the
/// resulting λ error is below 10⁻²⁰ relative for any supported grid.
pub const ALEPH_FLOOR: f64 = 1e-28;
/// Upper limit on precomputed search-list entries.
const MAX_LIST_ENTRIES: usize = 60_000_000;

/// A maximized component and its λ weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlephTerm {
    pub l: usize,
    pub i: usize,
    pub j: usize,
    /// Multiplier turning Σ ℵ into Ω·λ: (2l+1)/(4π)·|E^{ij}_l|·C̃_li C̃_lj r_l³,
    /// doubled for i ≠ j since ℵ_ij = ℵ_ji. Unity for the tight form.
    pub weight: f64,
}

struct Channel {
    l: usize,
    r: f64,
    r2: f64,
    projectors: usize,
}

struct Component {
    ch: usize,
    i: usize,
    j: usize,
    coef: f64,
    bound: Arc<DecayBound>,
    relax: Arc<RelaxationTable>,
}

struct Target {
    term: AlephTerm,
    components: Vec<Component>,
}

/// Per-species evaluation data.
pub(crate) struct Kernel {
    channels: Vec<Channel>,
    targets: Vec<Target>,
    legendre: bool,
}

#[derive(Clone, Copy, Default)]
struct ChannelEval {
    a: [f64; 3],
    b: [f64; 3],
    pl: f64,
    g: f64,
}

impl Kernel {
    pub(crate) fn new(sp: &GthSpecies, form: AlephForm) -> Result<Self> {
        sp.validate()?;
        let channels: Vec<Channel> = sp
            .channels
            .iter()
            .enumerate()
            .map(|(l, ch)| Channel { l, r: ch.r, r2: ch.r * ch.r, projectors: ch.projectors })
            .collect();
        let component = |ch: usize, i: usize, j: usize, coef: f64| Component {
            ch,
            i,
            j,
            coef,
            bound: decay_bound(ch, i, j),
            relax: relaxation_table(ch, i, j),
        };
        let mut targets = Vec::new();
        match form {
            AlephForm::Separated | AlephForm::NoLegendre => {
                for (l, ch) in sp.channels.iter().enumerate() {
                    for i in 1..=ch.projectors {
                        for j in i..=ch.projectors {
                            let e = ch.e[i - 1][j - 1];
                            if e == 0.0 {
                                continue;
                            }
                            let mult = if i == j { 1.0 } else { 2.0 };
                            let weight = mult * (2 * l + 1) as f64 / (4.0 * PI)
                                * e.abs()
                                * projector_constant_scaled(l, i)?
                                * projector_constant_scaled(l, j)?
                                * ch.r.powi(3);
                            targets.push(Target {
                                term: AlephTerm { l, i, j, weight },
                                components: vec![component(l, i, j, 1.0)],
                            });
                        }
                    }
                }
            }
            AlephForm::Tight => {
                let mut components = Vec::new();
                for (l, ch) in sp.channels.iter().enumerate() {
                    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                    for i in 1..=ch.projectors {
                        for j in 1..=ch.projectors {
                            let e = ch.e[i - 1][j - 1];
                            if e == 0.0 {
                                continue;
                            }
                            let coef = sign * (2 * l + 1) as f64 / (4.0 * PI)
                                * e
                                * projector_constant_scaled(l, i)?
                                * projector_constant_scaled(l, j)?
                                * ch.r.powi(3);
                            components.push(component(l, i, j, coef));
                        }
                    }
                }
                if !components.is_empty() {
                    targets.push(Target { term: AlephTerm { l: 0, i: 0, j: 0, weight: 1.0 }, components });
                }
            }
        }
        Ok(Self { channels, targets, legendre: form != AlephForm::NoLegendre })
    }

    pub(crate) fn terms(&self) -> Vec<AlephTerm> {
        self.targets.iter().map(|t| t.term).collect()
    }

    fn min_radius(&self) -> f64 {
        self.channels.iter().map(|c| c.r).fold(f64::INFINITY, f64::min)
    }

    fn evaluate_channels(&self, p2: f64, q2: f64, pq: f64, out: &mut [ChannelEval; 3]) {
        for (c, ev) in self.channels.iter().zip(out.iter_mut()) {
            let (xp, xq) = ((c.r2 * p2).sqrt(), (c.r2 * q2).sqrt());
            for i in 1..=c.projectors {
                ev.a[i - 1] = radial_poly(c.l, i, xp);
                ev.b[i - 1] = radial_poly(c.l, i, xq);
            }
            ev.g = (-0.5 * c.r2 * (p2 + q2)).exp();
            ev.pl = if !self.legendre || c.l == 0 {
                1.0
            } else {
                let d = (p2 * q2).sqrt();
                let cos = if d > 0.0 { (pq / d).clamp(-1.0, 1.0) } else { 1.0 };
                if c.l == 1 {
                    cos
                } else {
                    0.5 * (3.0 * cos * cos - 1.0)
                }
            };
        }
    }

    fn value(&self, t: usize, ev: &[ChannelEval; 3]) -> f64 {
        self.targets[t]
            .components
            .iter()
            .map(|c| {
                let e = &ev[c.ch];
                c.coef * e.pl * e.a[c.i - 1] * e.b[c.j - 1] * e.g
            })
            .sum::<f64>()
            .abs()
    }

    /// Upper bound on the target over all (p, q) with ‖k_p‖² + ‖k_q‖² ≥ s.
    fn bound(&self, t: usize, s: f64) -> f64 {
        self.targets[t]
            .components
            .iter()
            .map(|c| c.coef.abs() * c.bound.at(self.channels[c.ch].r2 * s))
            .sum()
    }

    fn relaxation(&self, t: usize, knu: f64) -> f64 {
        self.targets[t]
            .components
            .iter()
            .map(|c| c.coef.abs() * c.relax.at(self.channels[c.ch].r * knu))
            .sum()
    }

    /// Smallest s beyond which every target is below the floor.
    fn cutoff(&self) -> f64 {
        let mut s = 0.0f64;
        for t in 0..self.targets.len() {
            let mut lo = 0.0;
            let mut hi = 1.0;
            while self.bound(t, hi) > ALEPH_FLOOR {
                hi *= 2.0;
                if hi > 1e12 {
                    break;
                }
            }
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if self.bound(t, mid) > ALEPH_FLOOR {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            s = s.max(hi);
        }
        s
    }
}

#[derive(Clone, Copy)]
struct WEntry {
    kw2: f64,
    w: [i16; 3],
}

/// Sorted W lists for one grid and geometry.
pub(crate) struct SearchLattice {
    gram: [[f64; 3]; 3],
    h: [i64; 3],
    lists: Vec<Vec<WEntry>>,
    /// Entries with ‖k_W‖² above this were dropped.
    kw2_max: f64,
}

fn parity_class(v: Miller) -> usize {
    (0..3).map(|a| ((v[a].rem_euclid(2)) as usize) << a).sum()
}

fn quad(g: &[[f64; 3]; 3], w: [f64; 3]) -> f64 {
    g[0][0] * w[0] * w[0]
        + g[1][1] * w[1] * w[1]
        + g[2][2] * w[2] * w[2]
        + 2.0 * (g[0][1] * w[0] * w[1] + g[1][2] * w[1] * w[2] + g[0][2] * w[0] * w[2])
}

impl SearchLattice {
    /// Builds lists of W with |W_a| ≤ 2h_a and ‖k_W‖² ≤ `kw2_max`.
    pub(crate) fn new(geom: &ReciprocalGeometry, grid: &MillerGrid, kw2_max: f64) -> Result<Self> {
        let h = grid.half_range(Region::G);
        let g = geom.gramian;
        let inv = Matrix3::from_fn(|i, j| g[i][j])
            .try_inverse()
            .ok_or_else(|| Error::DegenerateCell("singular Gramian".into()))?;
        let lim: [i64; 3] = std::array::from_fn(|a| {
            let e = if kw2_max.is_finite() { (kw2_max * inv[(a, a)]).sqrt().floor() as i64 + 1 } else { i64::MAX };
            e.min(2 * h[a])
        });
        let total: usize = lim.iter().map(|&x| (2 * x + 1) as usize).product();
        if total > 4 * MAX_LIST_ENTRIES {
            return Err(Error::Infeasible(format!("search lists would scan {total} candidates")));
        }
        let mut lists: Vec<Vec<WEntry>> = vec![Vec::new(); 8];
        for x in -lim[0]..=lim[0] {
            for y in -lim[1]..=lim[1] {
                for z in -lim[2]..=lim[2] {
                    let kw2 = quad(&g, [x as f64, y as f64, z as f64]);
                    if kw2 <= kw2_max {
                        lists[parity_class([x, y, z])].push(WEntry { kw2, w: [x as i16, y as i16, z as i16] });
                    }
                }
            }
        }
        let entries: usize = lists.iter().map(Vec::len).sum();
        if entries > MAX_LIST_ENTRIES {
            return Err(Error::Infeasible(format!("search lists would hold {entries} entries")));
        }
        for l in &mut lists {
            l.par_sort_unstable_by(|a, b| a.kw2.total_cmp(&b.kw2).then(a.w.cmp(&b.w)));
        }
        Ok(Self { gram: g, h, lists, kw2_max })
    }

    fn gram_times(&self, v: Miller) -> [f64; 3] {
        std::array::from_fn(|a| (0..3).map(|b| self.gram[a][b] * v[b] as f64).sum())
    }
}

/// Evaluation statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    /// Matrix-element evaluations performed.
    pub evaluations: u64,
    /// ν for which the search reached the end of a truncated list.
    pub exhausted: u64,
}

struct NuContext {
    nu: Miller,
    knu2: f64,
    gnu: [f64; 3],
    lim: [i64; 3],
}

impl NuContext {
    fn new(lat: &SearchLattice, nu: Miller) -> Self {
        let gnu = lat.gram_times(nu);
        let knu2 = quad(&lat.gram, nu.map(|x| x as f64));
        let lim = std::array::from_fn(|a| 2 * lat.h[a] - nu[a].abs());
        Self { nu, knu2, gnu, lim }
    }

    #[inline]
    fn feasible(&self, w: [i64; 3]) -> bool {
        (0..3).all(|a| w[a].abs() <= self.lim[a])
    }

    /// (‖k_p‖², ‖k_q‖², k_p·k_q) for q = (W + ν)/2, p = (W − ν)/2.
    #[inline]
    fn pq(&self, kw2: f64, w: [i64; 3]) -> (f64, f64, f64) {
        let dot: f64 = (0..3).map(|a| w[a] as f64 * self.gnu[a]).sum();
        let q2 = (0.25 * (kw2 + self.knu2 + 2.0 * dot)).max(0.0);
        let p2 = (0.25 * (kw2 + self.knu2 - 2.0 * dot)).max(0.0);
        (p2, q2, 0.25 * (kw2 - self.knu2))
    }
}

fn widen(w: [i16; 3]) -> [i64; 3] {
    w.map(i64::from)
}

/// ℵ for every target of `kernel` at one ν. `best` is overwritten.
fn aleph_at(
    kernel: &Kernel,
    lat: Option<&SearchLattice>,
    nu: Miller,
    strategy: AlephStrategy,
    best: &mut [f64],
    stats: &mut SearchStats,
) {
    best.iter_mut().for_each(|b| *b = 0.0);
    let nt = kernel.targets.len();
    if nt == 0 {
        return;
    }
    if strategy == AlephStrategy::Relaxation {
        let knu = match lat {
            Some(l) => quad(&l.gram, nu.map(|x| x as f64)).sqrt(),
            None => unreachable!("relaxation sweeps carry the Gramian"),
        };
        for (t, b) in best.iter_mut().enumerate() {
            *b = kernel.relaxation(t, knu);
        }
        return;
    }
    let lat = lat.expect("list strategies need a search lattice");
    let ctx = NuContext::new(lat, nu);
    let list = &lat.lists[parity_class(nu)];
    let terminate = strategy != AlephStrategy::Brute;
    let decimate = strategy == AlephStrategy::Decimated && lat.h.iter().any(|&h| h >= 15);
    let mut ev = [ChannelEval::default(); 3];
    let mut open = vec![true; nt];
    let mut n_open = nt;
    let mut arg: Vec<Option<[i64; 3]>> = vec![None; nt];
    let mut finished = false;
    for e in list {
        if terminate {
            let s = 0.5 * (e.kw2 + ctx.knu2);
            for t in 0..nt {
                if open[t] && kernel.bound(t, s) <= best[t].max(ALEPH_FLOOR) {
                    open[t] = false;
                    n_open -= 1;
                }
            }
            if n_open == 0 {
                finished = true;
                break;
            }
        }
        let w = widen(e.w);
        if !ctx.feasible(w) {
            continue;
        }
        if decimate && (0..3).any(|a| (w[a] + ctx.nu[a]).rem_euclid(4) != 0) {
            continue;
        }
        let (p2, q2, pq) = ctx.pq(e.kw2, w);
        kernel.evaluate_channels(p2, q2, pq, &mut ev);
        stats.evaluations += 1;
        for t in 0..nt {
            if open[t] {
                let v = kernel.value(t, &ev);
                if v > best[t] {
                    best[t] = v;
                    arg[t] = Some(w);
                }
            }
        }
    }
    if terminate && !finished && lat.kw2_max.is_finite() {
        stats.exhausted += 1;
    }
    if decimate {
        refine(kernel, lat, &ctx, best, &arg, stats);
    }
}

/// Steepest-ascent refinement of decimated maxima over unit steps in q.
fn refine(
    kernel: &Kernel,
    lat: &SearchLattice,
    ctx: &NuContext,
    best: &mut [f64],
    arg: &[Option<[i64; 3]>],
    stats: &mut SearchStats,
) {
    let mut ev = [ChannelEval::default(); 3];
    for t in 0..best.len() {
        let Some(mut w) = arg[t] else { continue };
        loop {
            let mut moved = false;
            for d in 0..27 {
                let step = [d / 9 - 1, (d / 3) % 3 - 1, d % 3 - 1];
                if step == [0, 0, 0] {
                    continue;
                }
                let cand: [i64; 3] = std::array::from_fn(|a| w[a] + 2 * step[a]);
                if !ctx.feasible(cand) {
                    continue;
                }
                let kw2 = quad(&lat.gram, cand.map(|x| x as f64));
                let (p2, q2, pq) = ctx.pq(kw2, cand);
                kernel.evaluate_channels(p2, q2, pq, &mut ev);
                stats.evaluations += 1;
                let v = kernel.value(t, &ev);
                if v > best[t] {
                    best[t] = v;
                    w = cand;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }
}

/// Maximization settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AlephConfig {
    pub strategy: AlephStrategy,
    pub form: AlephForm,
}

fn check_grid(grid: &MillerGrid, strategy: AlephStrategy) -> Result<()> {
    let n = *grid.n.iter().max().unwrap();
    match strategy {
        AlephStrategy::Brute if n > MAX_BRUTE_BITS => Err(Error::Infeasible(format!(
            "brute-force ℵ sweeps are limited to n ≤ {MAX_BRUTE_BITS} (got n = {n}); use the exact strategy"
        ))),
        AlephStrategy::Exact | AlephStrategy::Decimated if n > MAX_SWEEP_BITS => Err(Error::Infeasible(format!(
            "ℵ sweeps are limited to n ≤ {MAX_SWEEP_BITS} (got n = {n}); use the relaxation strategy"
        ))),
        _ => Ok(()),
    }
}

fn build_lattice(
    kernels: &[Kernel],
    geom: &ReciprocalGeometry,
    grid: &MillerGrid,
    strategy: AlephStrategy,
) -> Result<SearchLattice> {
    let kw2_max = match strategy {
        AlephStrategy::Brute => f64::INFINITY,
        AlephStrategy::Relaxation => 0.0,
        _ => {
            // ‖k_p‖² + ‖k_q‖² ≥ ‖k_W‖²/2, so W beyond this never matters.
            let s = kernels
                .iter()
                .filter(|k| !k.targets.is_empty())
                .map(|k| 2.0 * k.cutoff() / (k.min_radius() * k.min_radius()))
                .fold(0.0, f64::max);
            s * (1.0 + 1e-9)
        }
    };
    SearchLattice::new(geom, grid, kw2_max)
}

/// ℵ of one species at one ν, per target (see [`AlephTerm`] for the order).
pub fn aleph(
    sp: &GthSpecies,
    nu: Miller,
    geom: &ReciprocalGeometry,
    grid: &MillerGrid,
    config: AlephConfig,
) -> Result<(Vec<AlephTerm>, Vec<f64>)> {
    if !grid.contains(Region::Gd, nu) {
        return Err(Error::InvalidArgument(format!("ν = {nu:?} is outside the difference grid")));
    }
    if config.strategy != AlephStrategy::Brute {
        check_grid(grid, config.strategy)?;
    }
    let kernel = Kernel::new(sp, config.form)?;
    let lat = build_lattice(std::slice::from_ref(&kernel), geom, grid, config.strategy)?;
    let mut best = vec![0.0; kernel.targets.len()];
    aleph_at(&kernel, Some(&lat), nu, config.strategy, &mut best, &mut SearchStats::default());
    Ok((kernel.terms(), best))
}

/// Result of sweeping ν over the difference grid for one species.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlephSweep {
    pub label: String,
    pub config: AlephConfig,
    pub volume: f64,
    pub terms: Vec<AlephTerm>,
    /// Σ_ν ℵ_t(ν) per term.
    pub sums: Vec<f64>,
    /// Σ_ν ‖k_ν‖ ℵ_t(ν) per term.
    pub knu_sums: Vec<f64>,
    /// Shell sizes |{ν ∈ G_d : μ(ν) = μ}|, indexed by μ.
    pub shell_sizes: Vec<u64>,
    /// max_{μ(ν) = μ} ℵ_t(ν), indexed by [μ][t].
    pub shell_max: Vec<Vec<f64>>,
    pub stats: SearchStats,
}

impl AlephSweep {
    /// Per-nucleus λ from pointwise maxima: (1/Ω) Σ_t w_t Σ_ν ℵ_t(ν).
    pub fn lambda_pointwise(&self) -> f64 {
        self.terms.iter().zip(&self.sums).map(|(t, s)| t.weight * s).sum::<f64>() / self.volume
    }

    /// Per-nucleus λ when each shell is charged its maximum.
    pub fn lambda_box(&self) -> f64 {
        let mut total = 0.0;
        for (mu, size) in self.shell_sizes.iter().enumerate() {
            for (t, term) in self.terms.iter().enumerate() {
                total += term.weight * *size as f64 * self.shell_max[mu][t];
            }
        }
        total / self.volume
    }

    /// (1/Ω) Σ_t w_t Σ_ν ‖k_ν‖ ℵ_t(ν).
    pub fn knu_weighted(&self) -> f64 {
        self.terms.iter().zip(&self.knu_sums).map(|(t, s)| t.weight * s).sum::<f64>() / self.volume
    }
}

struct Partial {
    sums: Vec<ExactSum>,
    knu: Vec<ExactSum>,
    shell_max: Vec<f64>,
    shell_sizes: Vec<u64>,
    stats: Vec<SearchStats>,
}

impl Partial {
    fn new(nt: usize, nmu: usize, ns: usize) -> Self {
        Self {
            sums: vec![ExactSum::new(); nt],
            knu: vec![ExactSum::new(); nt],
            shell_max: vec![0.0; nt * nmu],
            shell_sizes: vec![0; nmu],
            stats: vec![SearchStats::default(); ns],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            a.merge(b);
        }
        for (a, b) in self.knu.iter_mut().zip(other.knu) {
            a.merge(b);
        }
        for (a, b) in self.shell_max.iter_mut().zip(other.shell_max) {
            *a = a.max(b);
        }
        for (a, b) in self.shell_sizes.iter_mut().zip(other.shell_sizes) {
            *a += b;
        }
        for (a, b) in self.stats.iter_mut().zip(other.stats) {
            a.evaluations += b.evaluations;
            a.exhausted += b.exhausted;
        }
        self
    }
}

/// Sweeps ν over the difference grid G_d for several species at once.
///
/// ℵ(−ν) = ℵ(ν), so only a half-space is visited. Sums are exact and maxima
/// are order independent, so results do not depend on the thread count.
/// Shells follow the nested boxes with shifts `deltas` and μ_min = 1.
pub fn aleph_sweep(
    species: &[&GthSpecies],
    geom: &ReciprocalGeometry,
    grid: &MillerGrid,
    deltas: [u32; 3],
    config: AlephConfig,
) -> Result<Vec<AlephSweep>> {
    check_grid(grid, config.strategy)?;
    let scheme = BoxScheme::new(*grid, deltas, true)?;
    let kernels = species.iter().map(|sp| Kernel::new(sp, config.form)).collect::<Result<Vec<_>>>()?;
    let lat = build_lattice(&kernels, geom, grid, config.strategy)?;
    let offsets: Vec<usize> = kernels
        .iter()
        .scan(0, |acc, k| {
            let o = *acc;
            *acc += k.targets.len();
            Some(o)
        })
        .collect();
    let nt: usize = kernels.iter().map(|k| k.targets.len()).sum();
    let nmu = scheme.mu_max as usize + 1;
    let ns = kernels.len();
    let h = grid.half_range(Region::Gd);
    let pairs: Vec<(i64, i64)> = (0..=h[0])
        .flat_map(|x| (if x == 0 { 0 } else { -h[1] }..=h[1]).map(move |y| (x, y)))
        .collect();
    let total = pairs
        .par_iter()
        .fold(
            || Partial::new(nt, nmu, ns),
            |mut acc, &(x, y)| {
                let mut best = Vec::new();
                let z0 = if x == 0 && y == 0 { 0 } else { -h[2] };
                for z in z0..=h[2] {
                    let nu = [x, y, z];
                    let mult = if nu == [0, 0, 0] { 1u64 } else { 2 };
                    let mu = scheme.mu_of(nu) as usize;
                    let knu = geom.norm_sq(nu).max(0.0).sqrt();
                    acc.shell_sizes[mu] += mult;
                    for (s, k) in kernels.iter().enumerate() {
                        best.resize(k.targets.len(), 0.0);
                        aleph_at(k, Some(&lat), nu, config.strategy, &mut best, &mut acc.stats[s]);
                        for (t, &v) in best.iter().enumerate() {
                            let idx = offsets[s] + t;
                            let m = mult as f64;
                            acc.sums[idx].add(m * v);
                            acc.knu[idx].add(m * knu * v);
                            let sm = &mut acc.shell_max[mu * nt + idx];
                            *sm = sm.max(v);
                        }
                    }
                }
                acc
            },
        )
        .reduce(|| Partial::new(nt, nmu, ns), Partial::merge);
    Ok(kernels
        .iter()
        .enumerate()
        .map(|(s, k)| {
            let range = offsets[s]..offsets[s] + k.targets.len();
            AlephSweep {
                label: species[s].label.clone(),
                config,
                volume: geom.volume,
                terms: k.terms(),
                sums: total.sums[range.clone()].iter().map(ExactSum::value).collect(),
                knu_sums: total.knu[range.clone()].iter().map(ExactSum::value).collect(),
                shell_sizes: total.shell_sizes.clone(),
                shell_max: (0..nmu).map(|mu| total.shell_max[mu * nt + range.start..mu * nt + range.end].to_vec()).collect(),
                stats: total.stats[s],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::lattice::SimulationCell;
    use crate::pseudopotential::{f_tilde, u_nonloc_element};

    fn skewed() -> (ReciprocalGeometry, MillerGrid) {
        let cell = SimulationCell::new([[6.1, 0.3, 0.0], [-1.2, 5.4, 0.4], [0.5, -0.7, 7.3]], vec![]).unwrap();
        (ReciprocalGeometry::new(&cell).unwrap(), MillerGrid::new([3, 3, 4]).unwrap())
    }

    /// Direct maximum over every admissible q.
    fn oracle(sp: &GthSpecies, geom: &ReciprocalGeometry, grid: &MillerGrid, nu: Miller, t: &AlephTerm) -> f64 {
        let r = sp.channels[t.l].r;
        grid.enumerate(Region::G)
            .filter(|q| grid.contains(Region::G, [q[0] - nu[0], q[1] - nu[1], q[2] - nu[2]]))
            .map(|q| {
                let p = [q[0] - nu[0], q[1] - nu[1], q[2] - nu[2]];
                let (p2, q2) = (geom.norm_sq(p), geom.norm_sq(q));
                let d = (p2 * q2).sqrt();
                let c = if d > 0.0 { geom.dot(p, q) / d } else { 1.0 };
                let pl = [1.0, c, 1.5 * c * c - 0.5][t.l];
                (pl * f_tilde(t.l, t.i, r * p2.sqrt()).unwrap() * f_tilde(t.l, t.j, r * q2.sqrt()).unwrap()).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn exact_and_brute_match_direct_maximum() {
        let (geom, grid) = skewed();
        let sp = data::species("Ni").unwrap();
        for nu in [[0, 0, 0], [1, -2, 3], [-6, 5, 0], [4, 4, -12], [6, -6, 14]] {
            for strategy in [AlephStrategy::Exact, AlephStrategy::Brute] {
                let (terms, vals) = aleph(sp, nu, &geom, &grid, AlephConfig { strategy, form: AlephForm::Separated }).unwrap();
                for (t, v) in terms.iter().zip(&vals) {
                    let o = oracle(sp, &geom, &grid, nu, t);
                    assert!((v - o).abs() <= 1e-13 * o.max(ALEPH_FLOOR * 1e13), "{strategy} {nu:?} {t:?}: {v} vs {o}");
                }
            }
        }
    }

    #[test]
    fn tight_form_matches_matrix_elements() {
        let (geom, grid) = skewed();
        let sp = data::species("Mn").unwrap();
        for nu in [[0, 0, 0], [2, -1, 1], [-5, 0, 7]] {
            let (_, v) = aleph(sp, nu, &geom, &grid, AlephConfig { strategy: AlephStrategy::Exact, form: AlephForm::Tight }).unwrap();
            let direct = grid
                .enumerate(Region::G)
                .filter(|q| grid.contains(Region::G, [q[0] - nu[0], q[1] - nu[1], q[2] - nu[2]]))
                .map(|q| u_nonloc_element(sp, q, nu, &geom).unwrap().abs() * geom.volume)
                .fold(0.0, f64::max);
            assert!((v[0] - direct).abs() <= 1e-12 * direct, "{nu:?}: {} vs {direct}", v[0]);
        }
    }

    #[test]
    fn strategies_bracket_the_exact_sweep() {
        let (geom, grid) = skewed();
        let sp = data::species("C").unwrap();
        let run = |strategy| {
            aleph_sweep(&[sp], &geom, &grid, [0, 0, 0], AlephConfig { strategy, form: AlephForm::Separated })
                .unwrap()
                .remove(0)
        };
        let exact = run(AlephStrategy::Exact);
        let brute = run(AlephStrategy::Brute);
        let relax = run(AlephStrategy::Relaxation);
        let dec = run(AlephStrategy::Decimated);
        let (e, b) = (exact.lambda_pointwise(), brute.lambda_pointwise());
        assert!((e - b).abs() <= 1e-12 * b, "{e} vs {b}");
        assert!(relax.lambda_pointwise() >= b);
        assert!(dec.lambda_pointwise() <= b * (1.0 + 1e-12));
        assert!(exact.lambda_box() >= e);
        assert_eq!(exact.shell_sizes.iter().sum::<u64>(), grid.count(Region::Gd) as u64);
    }

    #[test]
    fn brute_sweeps_refuse_large_grids() {
        let (geom, _) = skewed();
        let grid = MillerGrid::cubic(5).unwrap();
        let sp = data::species("C").unwrap();
        let r = aleph_sweep(&[sp], &geom, &grid, [0, 0, 0], AlephConfig { strategy: AlephStrategy::Brute, form: AlephForm::Separated });
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }
}
