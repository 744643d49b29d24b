//! GTH/HGH pseudopotential parameters and their momentum-space functions.
//!
//! The local part enters through `u_loc(k)`; the nonlocal part through the
//! projector functions `F̃ᵢₗ(x) = x^l · (Σₓ c_{x,li} x^{2x}) · e^{−x²/2}` combined
//! with the per-species coupling matrices `E^{ij}_l`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Miller, MillerGrid, ReciprocalGeometry, Region, SimulationCell};

/// Largest supported angular momentum.
pub const MAX_L: usize = 2;
/// Largest supported number of projectors per channel.
pub const MAX_PROJECTORS: usize = 3;

/// One angular-momentum channel of the nonlocal part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlocalChannel {
    /// Projector radius r_l (Bohr).
    pub r: f64,
    /// Number of projectors (1..=3); entries of `e` beyond it are zero.
    pub projectors: usize,
    /// Symmetric coupling matrix E^{ij}_l (Hartree), zero padded to 3×3.
    pub e: [[f64; 3]; 3],
}

/// Parameters of one GTH species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GthSpecies {
    pub label: String,
    /// Optional parameter-set name from the element line (e.g. `GTH-LDA-q4`).
    pub name: String,
    /// Electron counts per angular momentum; their sum is the valence charge.
    pub electrons: Vec<u32>,
    pub r_loc: f64,
    /// Local coefficients C₁..C₄, zero padded.
    pub c: [f64; 4],
    /// Nonlocal channels, indexed by l.
    pub channels: Vec<NonlocalChannel>,
}

impl GthSpecies {
    /// Valence charge Z_α.
    pub fn z(&self) -> u32 {
        self.electrons.iter().sum()
    }

    /// Largest angular momentum with a projector channel.
    pub fn l_max(&self) -> Option<usize> {
        self.channels.len().checked_sub(1)
    }

    /// Largest projector index i (or j) with a nonzero coupling.
    pub fn max_projector(&self) -> usize {
        self.channels
            .iter()
            .flat_map(|ch| {
                (0..3).flat_map(move |i| (0..3).filter(move |&j| ch.e[i][j] != 0.0).map(move |j| i.max(j) + 1))
            })
            .max()
            .unwrap_or(0)
    }

    /// Validates the invariants documented on the type.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(format!("species {}: {msg}", self.label)));
        if !(self.r_loc > 0.0) {
            return bad(format!("r_loc must be positive, got {}", self.r_loc));
        }
        if self.channels.len() > MAX_L + 1 {
            return bad(format!("at most {} projector channels are supported", MAX_L + 1));
        }
        for (l, ch) in self.channels.iter().enumerate() {
            if !(ch.r > 0.0) {
                return bad(format!("r_{l} must be positive, got {}", ch.r));
            }
            if ch.projectors > MAX_PROJECTORS {
                return bad(format!("channel l={l} has {} projectors (max 3)", ch.projectors));
            }
            for i in 0..3 {
                for j in 0..3 {
                    if (i >= ch.projectors || j >= ch.projectors) && ch.e[i][j] != 0.0 {
                        return bad(format!("channel l={l} has E entries beyond its projector count"));
                    }
                    if (ch.e[i][j] - ch.e[j][i]).abs() > 1e-8 {
                        return bad(format!("E matrix for l={l} is not symmetric"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Writes the species as a CP2K-style text block.
    pub fn to_gth_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.label, self.name);
        let counts: Vec<String> = self.electrons.iter().map(|n| format!("{n:5}")).collect();
        let _ = writeln!(s, "{}", counts.join(""));
        let nc = self.c.iter().rposition(|&c| c != 0.0).map_or(0, |k| k + 1);
        let _ = write!(s, "  {:>17} {:4}", fmt_num(self.r_loc), nc);
        for c in &self.c[..nc] {
            let _ = write!(s, " {:>17}", fmt_num(*c));
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:5}", self.channels.len());
        for ch in &self.channels {
            let _ = write!(s, "  {:>17} {:4}", fmt_num(ch.r), ch.projectors);
            for i in 0..ch.projectors {
                if i > 0 {
                    let _ = write!(s, "{:24}", "");
                    let _ = write!(s, "{:width$}", "", width = 18 * i);
                }
                for j in i..ch.projectors {
                    let _ = write!(s, " {:>17}", fmt_num(ch.e[i][j]));
                }
                let _ = writeln!(s);
            }
            if ch.projectors == 0 {
                let _ = writeln!(s);
            }
        }
        s
    }
}

/// Shortest representation that round-trips through `f64` parsing.
fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

/// Parses a text containing exactly one species block.
pub fn parse_gth_text(text: &str) -> Result<GthSpecies> {
    let mut all = parse_gth_file(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => Err(Error::Parse { line: 1, msg: "no species block found".into() }),
        n => Err(Error::Parse { line: 1, msg: format!("expected one species block, found {n}") }),
    }
}

/// Parses every species block in a CP2K-style GTH parameter file.
///
/// Blank lines and `#` comments are ignored. Each projector matrix may be
/// given either as upper-triangular rows or as full rows; full rows are
/// checked for symmetry.
pub fn parse_gth_file(text: &str) -> Result<Vec<GthSpecies>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();
    let mut out = Vec::new();
    while lines.peek().is_some() {
        out.push(parse_block(&mut lines)?);
    }
    Ok(out)
}

type Lines<'a, I> = std::iter::Peekable<I>;

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn next_line<'a, I: Iterator<Item = (usize, &'a str)>>(lines: &mut Lines<'a, I>, what: &str) -> Result<(usize, Vec<&'a str>)> {
    match lines.next() {
        Some((n, l)) => Ok((n, l.split_whitespace().collect())),
        None => perr(0, format!("unexpected end of input while reading {what}")),
    }
}

fn num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse().or_else(|_| perr(line, format!("expected {what}, found `{tok}`")))
}

fn parse_block<'a, I: Iterator<Item = (usize, &'a str)>>(lines: &mut Lines<'a, I>) -> Result<GthSpecies> {
    let (ln, head) = next_line(lines, "element line")?;
    let label = head[0].to_string();
    if !label.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
        return perr(ln, format!("expected an element label, found `{label}`"));
    }
    let name = head.get(1).copied().unwrap_or("").to_string();

    let (ln, toks) = next_line(lines, "electron counts")?;
    let electrons = toks.iter().map(|t| num::<u32>(ln, t, "an electron count")).collect::<Result<Vec<_>>>()?;
    if electrons.is_empty() || electrons.len() > 4 {
        return perr(ln, "electron-count line must have 1 to 4 entries");
    }

    let (ln, toks) = next_line(lines, "local part")?;
    if toks.len() < 2 {
        return perr(ln, "local line needs r_loc and the number of C coefficients");
    }
    let r_loc: f64 = num(ln, toks[0], "r_loc")?;
    let nc: usize = num(ln, toks[1], "the number of C coefficients")?;
    if nc > 4 {
        return perr(ln, format!("at most 4 local coefficients are supported, got {nc}"));
    }
    if toks.len() != 2 + nc {
        return perr(ln, format!("expected {nc} local coefficients, found {}", toks.len() - 2));
    }
    let mut c = [0.0; 4];
    for (k, t) in toks[2..].iter().enumerate() {
        c[k] = num(ln, t, "a local coefficient")?;
    }

    let (ln, toks) = next_line(lines, "projector channel count")?;
    if toks.len() != 1 {
        return perr(ln, "projector channel count line must hold a single integer");
    }
    let nch: usize = num(ln, toks[0], "the number of projector channels")?;
    if nch > MAX_L + 1 {
        return perr(ln, format!("at most {} projector channels are supported, got {nch}", MAX_L + 1));
    }

    let mut channels = Vec::with_capacity(nch);
    for l in 0..nch {
        let (ln, toks) = next_line(lines, "projector channel")?;
        if toks.len() < 2 {
            return perr(ln, format!("channel l={l} needs r_l and the projector count"));
        }
        let r: f64 = num(ln, toks[0], "r_l")?;
        let np: usize = num(ln, toks[1], "the projector count")?;
        if np > MAX_PROJECTORS {
            return perr(ln, format!("channel l={l} has {np} projectors (max 3)"));
        }
        let mut e = [[0.0; 3]; 3];
        let mut given = [[false; 3]; 3];
        let mut row_toks = toks[2..].to_vec();
        let mut row_ln = ln;
        for i in 0..np {
            if i > 0 {
                let (n2, t2) = next_line(lines, "projector matrix row")?;
                row_ln = n2;
                row_toks = t2;
            }
            let vals = row_toks.iter().map(|t| num::<f64>(row_ln, t, "a projector coupling")).collect::<Result<Vec<_>>>()?;
            if vals.len() == np - i {
                for (k, v) in vals.into_iter().enumerate() {
                    e[i][i + k] = v;
                    given[i][i + k] = true;
                }
            } else if vals.len() == np && i > 0 {
                for (j, v) in vals.into_iter().enumerate() {
                    if given[i][j] || (j < i && given[j][i] && (e[j][i] - v).abs() > 1e-8) {
                        return perr(row_ln, format!("E matrix for l={l} is not symmetric"));
                    }
                    e[i][j] = v;
                    given[i][j] = true;
                }
            } else if vals.len() == np && i == 0 && np == 1 {
                e[0][0] = vals[0];
            } else {
                return perr(
                    row_ln,
                    format!("inconsistent projector count: row {} of l={l} has {} entries for {np} projectors", i + 1, vals.len()),
                );
            }
        }
        for i in 0..np {
            for j in 0..i {
                if !given[i][j] {
                    e[i][j] = e[j][i];
                } else if (e[i][j] - e[j][i]).abs() > 1e-8 {
                    return perr(ln, format!("E matrix for l={l} is not symmetric"));
                }
            }
        }
        channels.push(NonlocalChannel { r, projectors: np, e });
    }

    let sp = GthSpecies { label, name, electrons, r_loc, c, channels };
    sp.validate().map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
    Ok(sp)
}

/// Polynomial coefficients c_{x,li} of the projector functions, lowest power first.
pub fn projector_poly(l: usize, i: usize) -> Result<&'static [f64]> {
    Ok(match (l, i) {
        (0, 1) | (1, 1) | (2, 1) => &[1.0],
        (0, 2) => &[3.0, -1.0],
        (0, 3) => &[15.0, -10.0, 1.0],
        (1, 2) => &[5.0, -1.0],
        (1, 3) => &[35.0, -14.0, 1.0],
        (2, 2) => &[7.0, -1.0],
        (2, 3) => &[63.0, -18.0, 1.0],
        _ => return Err(Error::InvalidArgument(format!("projector (l={l}, i={i}) out of range"))),
    })
}

/// r_l-independent prefactor C̃_li = C_li / r_l^{l+3/2}.
pub fn projector_constant_scaled(l: usize, i: usize) -> Result<f64> {
    let k = match (l, i) {
        (0, 1) => 4.0 * 2f64.sqrt(),
        (0, 2) => 8.0 * (2.0f64 / 15.0).sqrt(),
        (0, 3) => 16.0 / 3.0 * (2.0f64 / 105.0).sqrt(),
        (1, 1) => 8.0 * (1.0f64 / 3.0).sqrt(),
        (1, 2) => 16.0 * (1.0f64 / 105.0).sqrt(),
        (1, 3) => 32.0 / 3.0 * (1.0f64 / 1155.0).sqrt(),
        (2, 1) => 8.0 * (2.0f64 / 15.0).sqrt(),
        (2, 2) => 16.0 / 3.0 * (2.0f64 / 105.0).sqrt(),
        (2, 3) => 32.0 / 3.0 * (2.0f64 / 15015.0).sqrt(),
        _ => return Err(Error::InvalidArgument(format!("projector (l={l}, i={i}) out of range"))),
    };
    Ok(k * PI.powf(1.25))
}

/// Projector normalization constant C_li for radius r_l.
pub fn projector_constant(l: usize, i: usize, r_l: f64) -> Result<f64> {
    Ok(projector_constant_scaled(l, i)? * r_l.powf(l as f64 + 1.5))
}

#[inline]
fn poly_in_x2(coef: &[f64], x2: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x2 + c)
}

/// Scaled projector function F̃ᵢₗ(x) for x ≥ 0.
pub fn f_tilde(l: usize, i: usize, x: f64) -> Result<f64> {
    let p = projector_poly(l, i)?;
    Ok(x.powi(l as i32) * poly_in_x2(p, x * x) * (-0.5 * x * x).exp())
}

/// Polynomial multiplying C_j in the local potential, as a function of x² = (r_loc‖k‖)².
pub fn local_poly(j: usize, x2: f64) -> f64 {
    match j {
        1 => 1.0,
        2 => 3.0 - x2,
        3 => 15.0 - 10.0 * x2 + x2 * x2,
        4 => 105.0 - 105.0 * x2 + 21.0 * x2 * x2 - x2 * x2 * x2,
        _ => 0.0,
    }
}

/// Local pseudopotential in momentum space, u_loc(k) (Hartree).
pub fn u_loc_k(sp: &GthSpecies, k_norm_sq: f64, volume: f64) -> Result<f64> {
    if !(k_norm_sq > 0.0) {
        return Err(Error::Divergent("local potential at k = 0"));
    }
    let x2 = sp.r_loc * sp.r_loc * k_norm_sq;
    let g = (-0.5 * x2).exp();
    let coulomb = -4.0 * PI * sp.z() as f64 / volume * g / k_norm_sq;
    let poly: f64 = (1..=4).map(|j| sp.c[j - 1] * local_poly(j, x2)).sum();
    Ok(coulomb + (8.0 * PI.powi(3)).sqrt() * sp.r_loc.powi(3) / volume * g * poly)
}

/// (‖k_p‖‖k_q‖)^l · P_l(cos θ) written in terms of dot products.
pub fn legendre_weighted_product(l: usize, pq: f64, p2: f64, q2: f64) -> Result<f64> {
    match l {
        0 => Ok(1.0),
        1 => Ok(pq),
        2 => Ok(0.5 * (3.0 * pq * pq - p2 * q2)),
        _ => Err(Error::InvalidArgument(format!("Legendre order {l} unsupported (max 2)"))),
    }
}

/// Nonlocal matrix element u_non(k_p, k_q) with p = q − ν (Hartree).
pub fn u_nonloc_element(sp: &GthSpecies, q: Miller, nu: Miller, geom: &ReciprocalGeometry) -> Result<f64> {
    let p = [q[0] - nu[0], q[1] - nu[1], q[2] - nu[2]];
    Ok(u_nonloc_pq(sp, p, q, geom))
}

pub(crate) fn u_nonloc_pq(sp: &GthSpecies, p: Miller, q: Miller, geom: &ReciprocalGeometry) -> f64 {
    let p2 = geom.norm_sq(p);
    let q2 = geom.norm_sq(q);
    let pq = geom.dot(p, q);
    let mut total = 0.0;
    for (l, ch) in sp.channels.iter().enumerate() {
        let r2 = ch.r * ch.r;
        let lw = legendre_weighted_product(l, pq, p2, q2).expect("l ≤ 2 by validation");
        let gauss = (-0.5 * r2 * (p2 + q2)).exp();
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        let mut s = 0.0;
        for i in 1..=ch.projectors {
            let ci = projector_constant(l, i, ch.r).unwrap() * poly_in_x2(projector_poly(l, i).unwrap(), r2 * p2);
            for j in 1..=ch.projectors {
                let e = ch.e[i - 1][j - 1];
                if e == 0.0 {
                    continue;
                }
                let cj = projector_constant(l, j, ch.r).unwrap() * poly_in_x2(projector_poly(l, j).unwrap(), r2 * q2);
                s += e * ci * cj;
            }
        }
        total += sign * (2 * l + 1) as f64 / (4.0 * PI) * s * lw * gauss;
    }
    total / geom.volume
}

/// Number of independently prepared terms for a species: the nonzero local
/// coefficients plus the Coulomb-like term, plus the independent nonzero
/// entries E^{ij}_l with i ≤ j.
pub fn species_term_count(sp: &GthSpecies) -> usize {
    let local = sp.c.iter().filter(|&&c| c != 0.0).count() + 1;
    let nonlocal: usize = sp
        .channels
        .iter()
        .map(|ch| (0..3).map(|i| (i..3).filter(|&j| ch.e[i][j] != 0.0).count()).sum::<usize>())
        .sum();
    local + nonlocal
}

/// Largest basis grid for which the dense matrix is assembled.
pub const DENSE_MAX_POINTS: usize = 1000;

/// One-electron pseudopotential matrix over the basis grid G.
///
/// Entry (q, q') is Σ_ℓ e^{−i k_ν·R_ℓ} (u_loc(k_ν) + u_non(k_q', k_q)) with
/// ν = q − q'. The divergent local term at ν = 0 is omitted. Rows and columns
/// follow [`MillerGrid::enumerate`] order.
pub fn dense_potential_matrix(
    cell: &SimulationCell,
    species: &[GthSpecies],
    grid: &MillerGrid,
) -> Result<Vec<Vec<Complex64>>> {
    let n = grid.count(Region::G);
    if n > DENSE_MAX_POINTS {
        return Err(Error::Infeasible(format!(
            "dense matrix over {n} basis states exceeds the {DENSE_MAX_POINTS}-state limit"
        )));
    }
    let geom = ReciprocalGeometry::new(cell)?;
    let atoms: Vec<(&GthSpecies, [f64; 3])> = cell
        .atoms()
        .iter()
        .map(|a| {
            species
                .iter()
                .find(|s| s.label == a.species)
                .map(|s| (s, a.pos))
                .ok_or_else(|| Error::Unknown { kind: "species", name: a.species.clone() })
        })
        .collect::<Result<_>>()?;
    let pts: Vec<Miller> = grid.enumerate(Region::G).collect();
    let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (a, &q) in pts.iter().enumerate() {
        for (b, &qp) in pts.iter().enumerate() {
            let nu = [q[0] - qp[0], q[1] - qp[1], q[2] - qp[2]];
            let k = geom.k_vector(nu);
            let k2 = geom.norm_sq(nu);
            let mut acc = Complex64::new(0.0, 0.0);
            for (sp, pos) in &atoms {
                let phase = -(k[0] * pos[0] + k[1] * pos[1] + k[2] * pos[2]);
                let mut u = u_nonloc_pq(sp, qp, q, &geom);
                if k2 > 0.0 {
                    u += u_loc_k(sp, k2, geom.volume)?;
                }
                acc += Complex64::from_polar(u, phase);
            }
            m[a][b] = acc;
        }
    }
    Ok(m)
}
