//! Block-encoding normalizations λ_T, λ_V, λ_loc and λ_nonloc.
//!
//! Grid sums are split over rows of the grid and accumulated exactly, so
//! every λ is reproducible bit for bit regardless of the thread count.

pub mod aleph;
pub mod radial;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use aleph::{aleph, aleph_sweep, AlephConfig, AlephForm, AlephStrategy, AlephSweep, AlephTerm, SearchStats};

use crate::error::{Error, Result};
use crate::interpolation::{build_table, InterpSpec, InterpTable};
use crate::lattice::{Miller, MillerGrid, ReciprocalGeometry, Region};
use crate::nested_boxes::BoxScheme;
use crate::pseudopotential::{local_poly, u_loc_k, GthSpecies};
use crate::sum::ExactSum;
use crate::system::SystemSpec;

/// Upper limit of the radial integrals; every integrand is below 10⁻²⁰ there.
pub const RADIAL_CUTOFF: f64 = 12.0;
/// Target absolute error of each quadrature piece.
const QUAD_TOL: f64 = 1e-13;
/// Catalan's constant.
const CATALAN: f64 = 0.915_965_594_177_219_015_054_603_514_932_384_110_774;

/// Sums `f(‖k_ν‖², out)` over a region, one accumulator per output slot.
///
/// The region is symmetric and ‖k_{−ν}‖ = ‖k_ν‖ exactly, so only half of it
/// is visited and off-origin terms are doubled (exactly).
pub(crate) fn grid_sums<F>(geom: &ReciprocalGeometry, grid: &MillerGrid, region: Region, m: usize, f: F) -> Vec<f64>
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    let h = grid.half_range(region);
    let skip_origin = !grid.contains(region, [0, 0, 0]);
    let rows: Vec<(i64, i64)> = (0..=h[0])
        .flat_map(|x| (if x == 0 { 0 } else { -h[1] }..=h[1]).map(move |y| (x, y)))
        .collect();
    let sums = rows
        .par_iter()
        .fold(
            || vec![ExactSum::new(); m],
            |mut acc, &(x, y)| {
                let mut buf = vec![0.0; m];
                let z0 = if x == 0 && y == 0 { 0 } else { -h[2] };
                for z in z0..=h[2] {
                    let origin = x == 0 && y == 0 && z == 0;
                    if origin && skip_origin {
                        continue;
                    }
                    buf.iter_mut().for_each(|b| *b = 0.0);
                    f(geom.norm_sq([x, y, z]), &mut buf);
                    let mult = if origin { 1.0 } else { 2.0 };
                    for (a, &v) in acc.iter_mut().zip(&buf) {
                        a.add(mult * v);
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![ExactSum::new(); m],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.merge(y);
                }
                a
            },
        );
    sums.iter().map(ExactSum::value).collect()
}

/// Kinetic normalization λ_T = (η/2)·max_{q∈G} ‖k_q‖², attained at a corner
/// of the grid (the four sign patterns up to an overall sign).
pub fn lambda_t(spec: &SystemSpec) -> Result<f64> {
    let geom = spec.geometry()?;
    let h = spec.grid.half_range(Region::G);
    let max = [[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]]
        .iter()
        .map(|s: &[i64; 3]| geom.norm_sq([h[0] * s[0], h[1] * s[1], h[2] * s[2]]))
        .fold(0.0, f64::max);
    Ok(spec.electrons() as f64 / 2.0 * max)
}

/// Σ 1/‖k_ν‖² over the prepared region (full signed box without the origin).
pub fn inverse_square_sum(geom: &ReciprocalGeometry, grid: &MillerGrid) -> f64 {
    grid_sums(geom, grid, Region::Box0, 1, |k2, out| out[0] = 1.0 / k2)[0]
}

/// Electron–electron normalization λ_V = (2π/Ω)·η(η−1)·Σ_ν 1/‖k_ν‖².
pub fn lambda_v(spec: &SystemSpec) -> Result<f64> {
    let geom = spec.geometry()?;
    let eta = spec.electrons() as f64;
    Ok(2.0 * PI / geom.volume * eta * (eta - 1.0) * inverse_square_sum(&geom, &spec.grid))
}

/// Lewin's inverse-tangent integral Ti₂(x) for |x| < 1.
pub fn inverse_tangent_integral(x: f64) -> f64 {
    let mut s = 0.0;
    let mut p = x;
    for k in 0..200 {
        let d = (2 * k + 1) as f64;
        let t = p / (d * d);
        s += if k % 2 == 0 { t } else { -t };
        if t.abs() < 1e-18 * s.abs() {
            break;
        }
        p *= x * x;
    }
    s
}

/// ∫ d³x / ‖x‖² over [−1, 1]³, i.e. 24[π/2·ln(1+√2) + Ti₂(3−√8) − Catalan] ≈ 15.3482.
pub fn cube_inverse_square_constant() -> f64 {
    24.0 * (PI / 2.0 * (1.0 + 2f64.sqrt()).ln() + inverse_tangent_integral(3.0 - 8f64.sqrt()) - CATALAN)
}

/// Continuum estimate of λ_V: the lattice sum replaced by the integral over
/// a cube of the same volume as the box of half-widths h_a + ½. An upper
/// bound for cubic cells; a scale estimate otherwise.
pub fn lambda_v_cube_bound(spec: &SystemSpec) -> Result<f64> {
    let geom = spec.geometry()?;
    let eta = spec.electrons() as f64;
    let h = spec.grid.half_range(Region::Box);
    let n_eff = h.iter().map(|&x| x as f64 + 0.5).product::<f64>().cbrt();
    let sum = geom.volume.powf(2.0 / 3.0) / (4.0 * PI * PI) * cube_inverse_square_constant() * n_eff;
    Ok(2.0 * PI / geom.volume * eta * (eta - 1.0) * sum)
}

/// Momentum-space terms of one species' local potential, with every
/// Gaussian factor replaced through `gauss`.
struct LocalTerms {
    coulomb: f64,
    poly: f64,
    r2: f64,
    c: [f64; 4],
}

impl LocalTerms {
    fn new(sp: &GthSpecies, volume: f64) -> Self {
        Self {
            coulomb: 4.0 * PI * sp.z() as f64 / volume,
            poly: (8.0 * PI.powi(3)).sqrt() * sp.r_loc.powi(3) / volume,
            r2: sp.r_loc * sp.r_loc,
            c: sp.c,
        }
    }

    /// Separated magnitude with Gaussian factor `g` at x² = (r_loc‖k‖)².
    #[inline]
    fn value(&self, k2: f64, g: f64) -> f64 {
        let x2 = self.r2 * k2;
        let p: f64 = (0..4)
            .filter(|&j| self.c[j] != 0.0)
            .map(|j| (self.c[j] * local_poly(j + 1, x2)).abs())
            .sum();
        g * (self.coulomb / k2 + self.poly * p)
    }
}

/// Per-nucleus local sums Σ_ν [4πZ e^{−x²/2}/(Ω‖k‖²) + √(8π³) r³/Ω Σ_j |C_j F̃₀ʲ(x)|]
/// for each species, over the full signed box without the origin.
pub fn lambda_loc_per_nucleus(species: &[&GthSpecies], geom: &ReciprocalGeometry, grid: &MillerGrid) -> Vec<f64> {
    let terms: Vec<LocalTerms> = species.iter().map(|s| LocalTerms::new(s, geom.volume)).collect();
    grid_sums(geom, grid, Region::Box0, terms.len(), |k2, out| {
        for (t, o) in terms.iter().zip(out.iter_mut()) {
            *o = t.value(k2, (-0.5 * t.r2 * k2).exp());
        }
    })
}

/// The local sums with each e^{−z} replaced by |interp(z) − e^{−z}|.
pub fn interp_error_per_nucleus(
    species: &[&GthSpecies],
    geom: &ReciprocalGeometry,
    grid: &MillerGrid,
    approx: impl Fn(f64) -> f64 + Sync,
) -> Vec<f64> {
    let terms: Vec<LocalTerms> = species.iter().map(|s| LocalTerms::new(s, geom.volume)).collect();
    grid_sums(geom, grid, Region::Box0, terms.len(), |k2, out| {
        for (t, o) in terms.iter().zip(out.iter_mut()) {
            let z = 0.5 * t.r2 * k2;
            *o = t.value(k2, (approx(z) - (-z).exp()).abs());
        }
    })
}

/// Interpolation-error contribution to λ for a whole system, using the
/// spec's interpolation table.
pub fn interp_error_lambda(spec: &SystemSpec) -> Result<f64> {
    let table = build_table(spec.interp)?;
    interp_error_lambda_with(spec, &table)
}

pub fn interp_error_lambda_with(spec: &SystemSpec, table: &InterpTable) -> Result<f64> {
    let geom = spec.geometry()?;
    let sp: Vec<&GthSpecies> = spec.species.iter().map(|s| &s.species).collect();
    let per = interp_error_per_nucleus(&sp, &geom, &spec.grid, |z| table.evaluate(z));
    Ok(weighted_total(spec, &per))
}

fn weighted_total(spec: &SystemSpec, per_nucleus: &[f64]) -> f64 {
    spec.electrons() as f64
        * spec.species.iter().zip(per_nucleus).map(|(s, v)| s.count as f64 * v).sum::<f64>()
}

/// ∫_a^b |f(x)| dx, splitting at sign changes located on a fine grid.
pub fn integrate_abs(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    const STEP: f64 = 0.01;
    let n = ((b - a) / STEP).ceil().max(1.0) as usize;
    let mut cuts = vec![a];
    let mut prev = f(a);
    for k in 1..=n {
        let x = (a + k as f64 * STEP).min(b);
        let fx = f(x);
        if prev * fx < 0.0 {
            let (mut lo, mut hi) = (x - STEP, x);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if f(mid) * prev > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
        if fx != 0.0 {
            prev = fx;
        }
    }
    cuts.push(b);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let out = quadrature::double_exponential::integrate(&f, w[0], w[1], QUAD_TOL);
        if !out.integral.is_finite() || out.error_estimate > 1e-8 * out.integral.abs().max(1.0) {
            return Err(Error::Quadrature(format!(
                "piece [{}, {}] has error estimate {:e}",
                w[0], w[1], out.error_estimate
            )));
        }
        total += out.integral.abs();
    }
    Ok(total)
}

/// √(2/π) ∫₀^∞ x² |poly_j(x²)| e^{−x²/2} dx: the integral weight of |C_j|.
pub fn local_coefficient_weight(j: usize) -> Result<f64> {
    if !(1..=4).contains(&j) {
        return Err(Error::InvalidArgument(format!("local coefficient index {j} outside 1..=4")));
    }
    let v = integrate_abs(|x| x * x * local_poly(j, x * x) * (-0.5 * x * x).exp(), 0.0, RADIAL_CUTOFF)?;
    Ok((2.0 / PI).sqrt() * v)
}

/// Continuum λ_loc per nucleus with the terms implemented separately:
/// √(2/π)Z/r_loc + Σ_j w_j |C_j|.
pub fn lambda_loc_integral(sp: &GthSpecies) -> Result<f64> {
    let mut v = (2.0 / PI).sqrt() * sp.z() as f64 / sp.r_loc;
    for j in 1..=4 {
        if sp.c[j - 1] != 0.0 {
            v += local_coefficient_weight(j)? * sp.c[j - 1].abs();
        }
    }
    Ok(v)
}

/// Relative sign of the Coulomb-like term in the combined local integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LocalSign {
    /// The sign of u_loc itself: −4πZ e^{−x²/2}/(Ω‖k‖²) against +Σ_j C_j F̃₀ʲ.
    Physical,
    /// Both parts added with the same sign, the convention of the published
    /// per-atom integral table.
    #[default]
    Aligned,
}

/// Continuum λ_loc per nucleus with all terms in one absolute value:
/// 2∫₀^∞ |∓Z/(π r_loc) e^{−r²/2} + r²/√(2π) Σ_j C_j poly_j(r²) e^{−r²/2}| dr.
pub fn lambda_loc_unseparated(sp: &GthSpecies, sign: LocalSign) -> Result<f64> {
    let a = sp.z() as f64 / (PI * sp.r_loc)
        * match sign {
            LocalSign::Physical => 1.0,
            LocalSign::Aligned => -1.0,
        };
    let b = 1.0 / (2.0 * PI).sqrt();
    let c = sp.c;
    let f = |r: f64| {
        let r2 = r * r;
        let p: f64 = (0..4).map(|j| c[j] * local_poly(j + 1, r2)).sum();
        (-a + b * r2 * p) * (-0.5 * r2).exp()
    };
    Ok(2.0 * integrate_abs(f, 0.0, RADIAL_CUTOFF)?)
}

/// Continuum λ_nonloc per nucleus:
/// Σ_l (2l+1)/(8π³) Σ_ij |E^{ij}_l| C̃_li C̃_lj ∫₀^∞ r² ℵ̃_lij(r) dr.
pub fn lambda_nonloc_integral(sp: &GthSpecies) -> Result<f64> {
    use crate::pseudopotential::projector_constant_scaled;
    sp.validate()?;
    let mut total = 0.0;
    for (l, ch) in sp.channels.iter().enumerate() {
        for i in 1..=ch.projectors {
            for j in i..=ch.projectors {
                let e = ch.e[i - 1][j - 1];
                if e == 0.0 {
                    continue;
                }
                let mult = if i == j { 1.0 } else { 2.0 };
                let moment = radial::aleph_tilde(l, i, j).second_moment();
                total += mult * (2 * l + 1) as f64 / (8.0 * PI.powi(3))
                    * e.abs()
                    * projector_constant_scaled(l, i)?
                    * projector_constant_scaled(l, j)?
                    * moment;
            }
        }
    }
    Ok(total)
}

/// How λ_loc is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LocVariant {
    /// Explicit lattice sum of the separated terms.
    #[default]
    Sum,
    /// Continuum integral of the separated terms.
    Integral,
    /// Continuum integral with all terms inside one absolute value, in the
    /// published (aligned-sign) convention.
    Unseparated,
    /// As `Unseparated`, with the physical sign of the Coulomb-like term.
    UnseparatedPhysical,
}

/// How λ_nonloc is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NonlocVariant {
    /// Σ_ν of the pointwise maxima ℵ(ν).
    #[default]
    Pointwise,
    /// Each nested-box shell charged its maximum ℵ.
    Box,
    /// Continuum integral with the relaxed maximum ℵ̃(r).
    Integral,
}

macro_rules! str_enum {
    ($ty:ident { $($name:literal => $var:ident),+ $(,)? }) => {
        impl std::str::FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(Self::$var),)+
                    _ => Err(Error::InvalidArgument(format!("unknown {} `{s}`", stringify!($ty)))),
                }
            }
        }
        impl std::fmt::Display for $ty {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(match self { $(Self::$var => $name,)+ })
            }
        }
    };
}

str_enum!(LocVariant { "sum" => Sum, "integral" => Integral, "unseparated" => Unseparated, "unseparated-physical" => UnseparatedPhysical });
str_enum!(NonlocVariant { "pointwise" => Pointwise, "box" => Box, "integral" => Integral });
str_enum!(AlephForm { "separated" => Separated, "no-legendre" => NoLegendre, "tight" => Tight });

/// Options for [`lambda_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LambdaOptions {
    pub loc: LocVariant,
    pub nonloc: NonlocVariant,
    /// Maximization used by the pointwise and box variants.
    pub aleph: AlephConfig,
    /// Also evaluate the interpolation-error contribution.
    pub interp_error: bool,
    /// Grid for the λ_nonloc lattice variants when it differs from the
    /// system grid.
    pub nonloc_grid: Option<[u32; 3]>,
}

/// Per-species contributions, each per nucleus and without the factor η.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeciesLambda {
    pub label: String,
    pub count: usize,
    pub loc: f64,
    pub nonloc: f64,
    pub interp_error: Option<f64>,
}

/// All λ components of one system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaReport {
    pub name: String,
    pub grid: [u32; 3],
    pub electrons: usize,
    pub lambda_t: f64,
    pub lambda_v: f64,
    pub lambda_loc: f64,
    pub lambda_nonloc: f64,
    pub loc_variant: LocVariant,
    pub nonloc_variant: NonlocVariant,
    /// Grid on which λ_nonloc was evaluated.
    pub nonloc_grid: [u32; 3],
    /// Maximization used for λ_nonloc, when a lattice variant was chosen.
    pub aleph: Option<AlephConfig>,
    pub species: Vec<SpeciesLambda>,
    /// Interpolation-error contribution to the block-encoded energy scale.
    pub interp_error: Option<f64>,
    pub search: Option<SearchStats>,
}

impl LambdaReport {
    /// λ = λ_T + λ_V + λ_loc + λ_nonloc.
    pub fn total(&self) -> f64 {
        self.lambda_t + self.lambda_v + self.lambda_loc + self.lambda_nonloc
    }
}

/// Per-nucleus λ_nonloc of each species for a lattice variant.
pub fn lambda_nonloc_per_nucleus(
    spec: &SystemSpec,
    variant: NonlocVariant,
    config: AlephConfig,
) -> Result<(Vec<f64>, Option<SearchStats>)> {
    let sp: Vec<&GthSpecies> = spec.species.iter().map(|s| &s.species).collect();
    if variant == NonlocVariant::Integral {
        return Ok((sp.iter().map(|s| lambda_nonloc_integral(s)).collect::<Result<_>>()?, None));
    }
    let geom = spec.geometry()?;
    let sweeps = aleph_sweep(&sp, &geom, &spec.grid, spec.deltas, config)?;
    let mut stats = SearchStats::default();
    for s in &sweeps {
        stats.evaluations += s.stats.evaluations;
        stats.exhausted += s.stats.exhausted;
    }
    let per = sweeps
        .iter()
        .map(|s| match variant {
            NonlocVariant::Box => s.lambda_box(),
            _ => s.lambda_pointwise(),
        })
        .collect();
    Ok((per, Some(stats)))
}

/// Computes every λ component of a system.
pub fn lambda_report(spec: &SystemSpec, opts: LambdaOptions) -> Result<LambdaReport> {
    spec.validate()?;
    let geom = spec.geometry()?;
    let sp: Vec<&GthSpecies> = spec.species.iter().map(|s| &s.species).collect();
    let loc: Vec<f64> = match opts.loc {
        LocVariant::Sum => lambda_loc_per_nucleus(&sp, &geom, &spec.grid),
        LocVariant::Integral => sp.iter().map(|s| lambda_loc_integral(s)).collect::<Result<_>>()?,
        LocVariant::Unseparated => sp.iter().map(|s| lambda_loc_unseparated(s, LocalSign::Aligned)).collect::<Result<_>>()?,
        LocVariant::UnseparatedPhysical => {
            sp.iter().map(|s| lambda_loc_unseparated(s, LocalSign::Physical)).collect::<Result<_>>()?
        }
    };
    let (nonloc, search) = match opts.nonloc_grid {
        Some(n) if n != spec.grid.n => {
            let mut other = spec.clone();
            other.grid = MillerGrid::new(n)?;
            lambda_nonloc_per_nucleus(&other, opts.nonloc, opts.aleph)?
        }
        _ => lambda_nonloc_per_nucleus(spec, opts.nonloc, opts.aleph)?,
    };
    let interp = if opts.interp_error {
        let table = build_table(spec.interp)?;
        Some(interp_error_per_nucleus(&sp, &geom, &spec.grid, |z| table.evaluate(z)))
    } else {
        None
    };
    let species = spec
        .species
        .iter()
        .enumerate()
        .map(|(k, s)| SpeciesLambda {
            label: s.species.label.clone(),
            count: s.count,
            loc: loc[k],
            nonloc: nonloc[k],
            interp_error: interp.as_ref().map(|v| v[k]),
        })
        .collect();
    Ok(LambdaReport {
        name: spec.name.clone(),
        grid: spec.grid.n,
        electrons: spec.electrons(),
        lambda_t: lambda_t(spec)?,
        lambda_v: lambda_v(spec)?,
        lambda_loc: weighted_total(spec, &loc),
        lambda_nonloc: weighted_total(spec, &nonloc),
        loc_variant: opts.loc,
        nonloc_variant: opts.nonloc,
        nonloc_grid: opts.nonloc_grid.unwrap_or(spec.grid.n),
        aleph: (opts.nonloc != NonlocVariant::Integral).then_some(opts.aleph),
        species,
        interp_error: interp.as_ref().map(|v| weighted_total(spec, v)),
        search,
    })
}

/// Which quantity a Ψ table bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsiKind {
    /// e^{−(r_loc‖k‖)²/2}/‖k‖², the Coulomb-like local term.
    Coulomb,
    /// |F̃₀ʲ(r_loc‖k‖)| for the local coefficient C_j.
    LocalPoly { j: usize },
    /// ℵ_lij, optionally without the Legendre factor.
    Nonlocal { l: usize, i: usize, j: usize, legendre: bool },
}

/// Shell maxima Ψ_μ for μ = μ_min..=μ_max of the scheme.
///
/// The local kinds use the scheme's prepared region (the origin is skipped
/// when μ_min = 2, and contributes zero otherwise); the nonlocal kind uses
/// the difference grid with the scheme's shifts.
pub fn psi_bounds(
    sp: &GthSpecies,
    geom: &ReciprocalGeometry,
    scheme: &BoxScheme,
    kind: PsiKind,
    strategy: AlephStrategy,
) -> Result<Vec<f64>> {
    let range = scheme.mu_min as usize..=scheme.mu_max as usize;
    let r2 = sp.r_loc * sp.r_loc;
    let local = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let values: Vec<f64> = scheme
            .grid
            .enumerate(Region::Box)
            .map(|nu: Miller| {
                let k2 = geom.norm_sq(nu);
                if nu == [0, 0, 0] {
                    0.0
                } else {
                    f(k2)
                }
            })
            .collect();
        scheme.shell_stats(&values)[range.clone()].iter().map(|s| s.max).collect()
    };
    match kind {
        PsiKind::Coulomb => Ok(local(&|k2| (-0.5 * r2 * k2).exp() / k2)),
        PsiKind::LocalPoly { j } => {
            if !(1..=4).contains(&j) {
                return Err(Error::InvalidArgument(format!("local coefficient index {j} outside 1..=4")));
            }
            Ok(local(&|k2| (local_poly(j, r2 * k2) * (-0.5 * r2 * k2).exp()).abs()))
        }
        PsiKind::Nonlocal { l, i, j, legendre } => {
            let (i, j) = (i.min(j), i.max(j));
            let form = if legendre { AlephForm::Separated } else { AlephForm::NoLegendre };
            let sweep = aleph_sweep(&[sp], geom, &scheme.grid, scheme.deltas, AlephConfig { strategy, form })?.remove(0);
            let t = sweep
                .terms
                .iter()
                .position(|t| (t.l, t.i, t.j) == (l, i, j))
                .ok_or_else(|| Error::InvalidArgument(format!("{} has no nonzero E^{{{i}{j}}}_{l}", sp.label)))?;
            Ok(range.map(|mu| sweep.shell_max.get(mu).map_or(0.0, |m| m[t])).collect())
        }
    }
}

/// Heuristic effect of nuclear-position error δ_R:
/// (δ_R·λ_loc/min r_loc, δ_R·λ_nonloc/min r_l).
pub fn position_error_bound(spec: &SystemSpec, delta_r: f64, lambda_loc: f64, lambda_nonloc: f64) -> Result<(f64, f64)> {
    if !(delta_r >= 0.0) {
        return Err(Error::InvalidArgument(format!("δ_R must be non-negative, got {delta_r}")));
    }
    let r_loc = spec.species.iter().map(|s| s.species.r_loc).fold(f64::INFINITY, f64::min);
    let r_l = spec
        .species
        .iter()
        .flat_map(|s| s.species.channels.iter().map(|c| c.r))
        .fold(f64::INFINITY, f64::min);
    let nonloc = if r_l.is_finite() { delta_r * lambda_nonloc / r_l } else { 0.0 };
    Ok((delta_r * lambda_loc / r_loc, nonloc))
}

/// Summed bound η δ_R Σ_α L_α Σ_ν ‖k_ν‖ |u_α(ν)| for the local and nonlocal
/// parts; the nonlocal part uses max_q |u_non| at each ν.
pub fn position_error_rigorous(spec: &SystemSpec, delta_r: f64, strategy: AlephStrategy) -> Result<(f64, f64)> {
    if !(delta_r >= 0.0) {
        return Err(Error::InvalidArgument(format!("δ_R must be non-negative, got {delta_r}")));
    }
    let geom = spec.geometry()?;
    let sp: Vec<&GthSpecies> = spec.species.iter().map(|s| &s.species).collect();
    let loc = grid_sums(&geom, &spec.grid, Region::Box0, sp.len(), |k2, out| {
        for (s, o) in sp.iter().zip(out.iter_mut()) {
            *o = k2.sqrt() * u_loc_k(s, k2, geom.volume).expect("k ≠ 0 off the origin").abs();
        }
    });
    let sweeps = aleph_sweep(&sp, &geom, &spec.grid, spec.deltas, AlephConfig { strategy, form: AlephForm::Tight })?;
    let nonloc: Vec<f64> = sweeps.iter().map(AlephSweep::knu_weighted).collect();
    Ok((delta_r * weighted_total(spec, &loc), delta_r * weighted_total(spec, &nonloc)))
}

/// Convenience: λ_loc interpolation-error contribution for an interpolation
/// spec rather than a built table.
pub fn interp_error_for(spec: &SystemSpec, interp: InterpSpec) -> Result<f64> {
    interp_error_lambda_with(spec, &build_table(interp)?)
}
