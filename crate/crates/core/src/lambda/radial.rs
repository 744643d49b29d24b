//! One-dimensional envelopes of products of scaled projector functions.
//!
//! Three kinds of tables are built here, all cached per (l, i, j):
//!
//! * [`AlephTilde`]: the continuum relaxation
//!   ℵ̃(r) = max_a |F̃ⁱ(a)| · max{|F̃ʲ(b)| : |a − r| ≤ b ≤ a + r},
//!   used by the integral estimate of λ_nonloc.
//! * [`RelaxationTable`]: a rigorous upper bound on the same quantity with
//!   the triangle constraint a + b ≥ r, usable as a per-ν upper bound.
//! * [`DecayBound`]: a non-increasing bound on |F̃ⁱ(x)F̃ʲ(y)| over
//!   x² + y² ≥ s, used to terminate the exact lattice search.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::pseudopotential::projector_poly;

/// Sample spacing of the projector functions.
pub const SAMPLE_DX: f64 = 0.005;
/// Projector functions are sampled on [0, SAMPLE_XMAX].
pub const SAMPLE_XMAX: f64 = 12.0;
/// Step of the r grid (two sample spacings, so interval ends fall on samples).
pub const R_STEP: f64 = 2.0 * SAMPLE_DX;
/// Upper limit of the radial integral.
pub const R_INTEGRAL_MAX: f64 = 16.0;

/// x^l · poly_li(x²): the polynomial part of F̃ⁱ_l.
#[inline]
pub(crate) fn radial_poly(l: usize, i: usize, x: f64) -> f64 {
    let x2 = x * x;
    let p = projector_poly(l, i).expect("validated projector index");
    let poly = p.iter().rev().fold(0.0, |acc, &c| acc * x2 + c);
    poly * x.powi(l as i32)
}

#[inline]
fn f_abs(l: usize, i: usize, x: f64) -> f64 {
    (radial_poly(l, i, x) * (-0.5 * x * x).exp()).abs()
}

/// |F̃ⁱ_l| sampled on the uniform grid plus global constants.
struct Samples {
    vals: Vec<f64>,
    /// sup |F̃|.
    max: f64,
    /// Estimated Lipschitz constant of |F̃|, with a safety factor.
    lip: f64,
    /// sup_{x ≥ SAMPLE_XMAX} |F̃(x)|.
    tail: f64,
}

impl Samples {
    fn new(l: usize, i: usize) -> Self {
        let n = (SAMPLE_XMAX / SAMPLE_DX).round() as usize + 1;
        let vals: Vec<f64> = (0..n).map(|k| f_abs(l, i, k as f64 * SAMPLE_DX)).collect();
        let max = vals.iter().cloned().fold(0.0, f64::max);
        let slope = vals.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max) / SAMPLE_DX;
        // Past x = 12 the Gaussian dominates every monomial of degree ≤ 6, so
        // the magnitude is decreasing and bounded by the coefficient sum.
        let p = projector_poly(l, i).expect("validated projector index");
        let x = SAMPLE_XMAX;
        let tail = p
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * x.powi((l + 2 * k) as i32))
            .sum::<f64>()
            * (-0.5 * x * x).exp();
        Self { vals, max, lip: 1.25 * slope, tail }
    }
}

/// Sparse table answering range-maximum queries in O(1).
struct RangeMax {
    levels: Vec<Vec<f64>>,
}

impl RangeMax {
    fn new(v: &[f64]) -> Self {
        let mut levels = vec![v.to_vec()];
        let mut w = 1;
        while 2 * w <= v.len() {
            let prev = levels.last().unwrap();
            let next = (0..=v.len() - 2 * w).map(|k| prev[k].max(prev[k + w])).collect();
            levels.push(next);
            w *= 2;
        }
        Self { levels }
    }

    /// Maximum over the inclusive index range [lo, hi].
    fn query(&self, lo: usize, hi: usize) -> f64 {
        debug_assert!(lo <= hi);
        let k = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
        self.levels[k][lo].max(self.levels[k][hi + 1 - (1 << k)])
    }
}

type SampleCache = Mutex<HashMap<(usize, usize), Arc<Samples>>>;

fn samples(l: usize, i: usize) -> Arc<Samples> {
    static CACHE: OnceLock<SampleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(s) = cache.lock().unwrap().get(&(l, i)) {
        return s.clone();
    }
    let s = Arc::new(Samples::new(l, i));
    cache.lock().unwrap().insert((l, i), s.clone());
    s
}

/// Maximum over sample pairs (a, b) with lo(a) ≤ b ≤ hi(a) of
/// |F̃ⁱ(a)||F̃ʲ(b)|; bounds are in sample units and clipped to the grid.
fn pair_max(fi: &[f64], rj: &RangeMax, fj_max: f64, n: usize, bounds: impl Fn(i64) -> (i64, i64)) -> f64 {
    let mut best = 0.0f64;
    for (ia, &va) in fi.iter().enumerate() {
        if va * fj_max <= best {
            continue;
        }
        let (lo, hi) = bounds(ia as i64);
        let (lo, hi) = (lo.max(0), hi.min(n as i64 - 1));
        if lo > hi {
            continue;
        }
        best = best.max(va * rj.query(lo as usize, hi as usize));
    }
    best
}

/// ℵ̃(r) on the grid r_k = k·R_STEP, k = 0..=R_INTEGRAL_MAX/R_STEP.
#[derive(Debug, Clone)]
pub struct AlephTilde {
    pub values: Vec<f64>,
}

impl AlephTilde {
    pub fn new(l: usize, i: usize, j: usize) -> Self {
        let (si, sj) = (samples(l, i), samples(l, j));
        let rj = RangeMax::new(&sj.vals);
        let n = sj.vals.len();
        let steps = (R_INTEGRAL_MAX / R_STEP).round() as i64;
        let values = (0..=steps)
            .map(|k| pair_max(&si.vals, &rj, sj.max, n, |a| ((a - 2 * k).abs(), a + 2 * k)))
            .collect();
        Self { values }
    }

    /// ∫₀^{R_INTEGRAL_MAX} r² ℵ̃(r) dr by composite Simpson.
    pub fn second_moment(&self) -> f64 {
        let m = self.values.len() - 1;
        debug_assert!(m % 2 == 0);
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let r = k as f64 * R_STEP;
                let w = if k == 0 || k == m {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * r * r * v
            })
            .sum();
        s * R_STEP / 3.0
    }
}

/// Rigorous upper bound on max |F̃ⁱ(a)F̃ʲ(b)| subject to a + b ≥ r and
/// |a − b| ≤ r, piecewise constant on [r_k, r_{k+1}).
#[derive(Debug, Clone)]
pub struct RelaxationTable {
    bounds: Vec<f64>,
    tail: f64,
}

/// Range of the relaxation table; beyond it a + b ≥ r forces one argument
/// past the sampled interval.
const RELAX_R_MAX: f64 = 2.0 * SAMPLE_XMAX;

impl RelaxationTable {
    pub fn new(l: usize, i: usize, j: usize) -> Self {
        let (si, sj) = (samples(l, i), samples(l, j));
        let rj = RangeMax::new(&sj.vals);
        let n = sj.vals.len();
        // The nearest sample pair to any admissible (a, b) lies within half a
        // spacing per coordinate, so widening the constraints by two samples
        // keeps it admissible and the Lipschitz term covers the rounding.
        let slack = 0.5 * SAMPLE_DX * (si.lip * sj.max + si.max * sj.lip);
        let tail = si.tail * sj.max.max(sj.tail) + sj.tail * si.max;
        let steps = (RELAX_R_MAX / R_STEP).round() as i64;
        let bounds = (0..steps)
            .map(|k| {
                let m = pair_max(&si.vals, &rj, sj.max, n, |a| ((2 * k - 2 - a).max(a - 2 * k - 4), a + 2 * k + 4));
                m + slack + tail
            })
            .collect();
        Self { bounds, tail }
    }

    /// Upper bound at radius r ≥ 0.
    pub fn at(&self, r: f64) -> f64 {
        let k = (r / R_STEP) as usize;
        self.bounds.get(k).copied().unwrap_or(self.tail)
    }
}

/// Non-increasing bound h(s) ≥ sup_{x²+y² ≥ s} |F̃ⁱ(x)F̃ʲ(y)|.
#[derive(Debug, Clone)]
pub struct DecayBound {
    vals: Vec<f64>,
}

const DECAY_DS: f64 = 0.02;
const DECAY_SMAX: f64 = 1500.0;
const DECAY_ANGLES: usize = 256;
const DECAY_MARGIN: f64 = 1.02;

impl DecayBound {
    pub fn new(l: usize, i: usize, j: usize) -> Self {
        let n = (DECAY_SMAX / DECAY_DS) as usize + 1;
        let trig: Vec<(f64, f64)> = (0..=DECAY_ANGLES)
            .map(|t| {
                let th = t as f64 / DECAY_ANGLES as f64 * std::f64::consts::FRAC_PI_2;
                (th.cos(), th.sin())
            })
            .collect();
        // On the circle x² + y² = s the Gaussian factor is the constant e^{−s/2}.
        let mut vals: Vec<f64> = (0..n)
            .map(|k| {
                let s = k as f64 * DECAY_DS;
                let rho = s.sqrt();
                let m = trig
                    .iter()
                    .map(|&(c, sn)| (radial_poly(l, i, rho * c) * radial_poly(l, j, rho * sn)).abs())
                    .fold(0.0, f64::max);
                m * (-0.5 * s).exp()
            })
            .collect();
        for k in (0..n - 1).rev() {
            vals[k] = vals[k].max(vals[k + 1]);
        }
        for v in &mut vals {
            *v *= DECAY_MARGIN;
        }
        Self { vals }
    }

    /// Bound at s ≥ 0: the table entry at or below s (the table is
    /// non-increasing), and zero past its end where the Gaussian underflows.
    #[inline]
    pub fn at(&self, s: f64) -> f64 {
        let k = (s / DECAY_DS) as usize;
        self.vals.get(k).copied().unwrap_or(0.0)
    }
}

macro_rules! cached {
    ($name:ident, $ty:ty) => {
        pub fn $name(l: usize, i: usize, j: usize) -> Arc<$ty> {
            static CACHE: OnceLock<Mutex<HashMap<(usize, usize, usize), Arc<$ty>>>> = OnceLock::new();
            let cache = CACHE.get_or_init(Default::default);
            if let Some(t) = cache.lock().unwrap().get(&(l, i, j)) {
                return t.clone();
            }
            let t = Arc::new(<$ty>::new(l, i, j));
            cache.lock().unwrap().insert((l, i, j), t.clone());
            t
        }
    };
}

cached!(aleph_tilde, AlephTilde);
cached!(relaxation_table, RelaxationTable);
cached!(decay_bound, DecayBound);
