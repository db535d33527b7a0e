//! Exact finite-size thermodynamics of the 2D Ising model on an `L×L`
//! torus, and finite-size-scaling fits of the entropy Fisher information.
//!
//! Two exact backends compute `ln Z`:
//!
//! * [`Backend::Enumerate`] histograms the bond sum over all `2^{L²}`
//!   configurations (`L ≤ 4`);
//! * [`Backend::TransferMatrix`] evaluates `Tr(T^L)` for the `2^L`-state
//!   row-to-row transfer operator (`L ≤ 12`). The operator is never stored:
//!   it is applied as a diagonal intra-row factor followed by one 2×2
//!   butterfly per column. Diagonal elements of `T^L` are invariant under
//!   cyclic shifts and global flips of the row, so only one representative
//!   per orbit is propagated.
//!
//! Every bond factor is divided by `e^{β|J|}` before multiplication, so all
//! matrix entries lie in `(0, 1]` and the sum cannot overflow for `L ≤ 12`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::thermo::check_beta;

/// `T_c = 2/ln(1 + √2)` for `J = 1`.
pub fn critical_temperature() -> f64 {
    2.0 / (1.0 + 2f64.sqrt()).ln()
}

/// Below this total heat capacity the entropy Fisher information is
/// reported as undefined rather than returned as a huge number.
pub const MIN_HEAT_CAPACITY: f64 = 1e-14;

/// Largest disagreement between the last two Richardson levels, relative
/// to the extrapolated value, that is accepted as a stable derivative.
pub const DERIVATIVE_STABILITY: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Enumerate,
    TransferMatrix,
}

impl Backend {
    pub fn max_size(self) -> usize {
        match self {
            Backend::Enumerate => 4,
            Backend::TransferMatrix => 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsingLattice {
    size: usize,
    coupling: f64,
    backend: Backend,
}

impl IsingLattice {
    /// Ferromagnetic (`J = 1`) torus of linear size `size`.
    pub fn new(size: usize, backend: Backend) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidArgument(format!(
                "lattice size must be at least 2, got {size}"
            )));
        }
        if size > backend.max_size() {
            return Err(Error::InvalidArgument(format!(
                "{backend:?} backend supports L <= {}, got {size}",
                backend.max_size()
            )));
        }
        Ok(Self {
            size,
            coupling: 1.0,
            backend,
        })
    }

    pub fn with_coupling(mut self, coupling: f64) -> Result<Self> {
        if !coupling.is_finite() || coupling == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "coupling must be finite and nonzero, got {coupling}"
            )));
        }
        self.coupling = coupling;
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn sites(&self) -> usize {
        self.size * self.size
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }
}

/// Exact `ln Z(β)` with energy `E = −J Σ_⟨ij⟩ s_i s_j` over the `2L²`
/// nearest-neighbour bonds of the torus.
pub fn ising_ln_z(lattice: &IsingLattice, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let ln_z = match lattice.backend {
        Backend::Enumerate => enumerate_ln_z(lattice, beta),
        Backend::TransferMatrix => transfer_ln_z(lattice, beta),
    };
    if !ln_z.is_finite() {
        return Err(Error::Range(format!("ln Z not finite at beta = {beta}")));
    }
    Ok(ln_z)
}

/// Number of configurations for each bond sum `Σ s_i s_j`, indexed by
/// `(sum + 2L²)/2`.
fn bond_sum_histogram(size: usize) -> Vec<u64> {
    let sites = size * size;
    let bonds = 2 * sites;
    let mut counts = vec![0u64; bonds + 1];
    let neighbours: Vec<(usize, usize)> = (0..sites)
        .flat_map(|i| {
            let (r, c) = (i / size, i % size);
            [
                (i, r * size + (c + 1) % size),
                (i, ((r + 1) % size) * size + c),
            ]
        })
        .collect();
    for config in 0u64..(1u64 << sites) {
        let disagree = neighbours
            .iter()
            .filter(|(a, b)| ((config >> a) ^ (config >> b)) & 1 == 1)
            .count();
        // sum = bonds − 2·disagree
        counts[bonds - disagree] += 1;
    }
    counts
}

fn enumerate_ln_z(lattice: &IsingLattice, beta: f64) -> f64 {
    let bonds = 2 * lattice.sites();
    let counts = bond_sum_histogram(lattice.size);
    let terms: Vec<f64> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| {
            let sum = 2.0 * k as f64 - bonds as f64;
            (c as f64).ln() + beta * lattice.coupling * sum
        })
        .collect();
    log_sum_exp(&terms)
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Representatives of row configurations under cyclic shifts and global
/// spin flip, with orbit sizes, in ascending order.
fn row_orbits(size: usize) -> Vec<(usize, u64)> {
    let states = 1usize << size;
    let mask = states - 1;
    let rotate = |s: usize| ((s << 1) | (s >> (size - 1))) & mask;
    let mut canonical = vec![0usize; states];
    for s in 0..states {
        let mut best = s;
        let mut r = s;
        for _ in 0..size {
            r = rotate(r);
            best = best.min(r).min(r ^ mask);
        }
        canonical[s] = best.min(s ^ mask);
    }
    let mut counts = vec![0u64; states];
    for &c in &canonical {
        counts[c] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .collect()
}

fn transfer_ln_z(lattice: &IsingLattice, beta: f64) -> f64 {
    let size = lattice.size;
    let states = 1usize << size;
    let j = lattice.coupling;
    let ja = j.abs();
    // Intra-row factor: Π_c e^{β(J s_c s_{c+1} − |J|)}.
    let row_factor: Vec<f64> = (0..states)
        .map(|s| {
            let sum: f64 = (0..size)
                .map(|c| {
                    let a = (s >> c) & 1;
                    let b = (s >> ((c + 1) % size)) & 1;
                    if a == b {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .sum();
            (beta * (j * sum - size as f64 * ja)).exp()
        })
        .collect();
    // Vertical bond factors for aligned and anti-aligned spins.
    let same = (beta * (j - ja)).exp();
    let flip = (beta * (-j - ja)).exp();

    let apply = |v: &mut [f64]| {
        for (x, f) in v.iter_mut().zip(&row_factor) {
            *x *= f;
        }
        for c in 0..size {
            let bit = 1usize << c;
            for a in 0..states {
                if a & bit == 0 {
                    let b = a | bit;
                    let (xa, xb) = (v[a], v[b]);
                    v[a] = same * xa + flip * xb;
                    v[b] = flip * xa + same * xb;
                }
            }
        }
    };

    let orbits = row_orbits(size);
    let diagonal: Vec<f64> = orbits
        .par_iter()
        .map_init(
            || vec![0.0; states],
            |v, &(s, count)| {
                v.fill(0.0);
                v[s] = 1.0;
                for _ in 0..size {
                    apply(v);
                }
                count as f64 * v[s]
            },
        )
        .collect();
    let trace: f64 = diagonal.iter().sum();
    2.0 * (size * size) as f64 * beta * ja + trace.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsingThermo {
    pub size: usize,
    pub temperature: f64,
    pub c_v_total: f64,
    pub c_v_per_spin: f64,
    /// `1/C_v` with the total (extensive) heat capacity.
    pub f_s: f64,
}

/// Heat capacity `β² d²ln Z/dβ²` by central differences with two levels of
/// Richardson extrapolation.
pub fn ising_thermo(lattice: &IsingLattice, temperature: f64) -> Result<IsingThermo> {
    check_beta(temperature)?;
    let beta = 1.0 / temperature;
    let ln_z = |b: f64| ising_ln_z(lattice, b);
    let f0 = ln_z(beta)?;
    let h0 = 0.02 * beta.min(1.0);
    let second =
        |h: f64| -> Result<f64> { Ok((ln_z(beta + h)? - 2.0 * f0 + ln_z(beta - h)?) / (h * h)) };
    let d = [second(h0)?, second(0.5 * h0)?, second(0.25 * h0)?];
    let r1 = [(4.0 * d[1] - d[0]) / 3.0, (4.0 * d[2] - d[1]) / 3.0];
    let r2 = (16.0 * r1[1] - r1[0]) / 15.0;
    let c_v_total = beta * beta * r2;
    if c_v_total.abs() < MIN_HEAT_CAPACITY {
        return Err(Error::Degenerate(format!(
            "C_v = {c_v_total:e} below {MIN_HEAT_CAPACITY:e} at T = {temperature}: F_S undefined"
        )));
    }
    if !((r2 - r1[1]).abs() <= DERIVATIVE_STABILITY * r2.abs()) {
        return Err(Error::NoConvergence(format!(
            "heat-capacity derivative unstable at T = {temperature}: Richardson levels {} and {r2}",
            r1[1]
        )));
    }
    Ok(IsingThermo {
        size: lattice.size,
        temperature,
        c_v_total,
        c_v_per_spin: c_v_total / lattice.sites() as f64,
        f_s: 1.0 / c_v_total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingEntry {
    pub size: usize,
    pub temperature: f64,
    /// Reduced temperature `(T − T_c)/T_c`.
    pub reduced_temperature: f64,
    pub c_v_total: f64,
    pub c_v_per_spin: f64,
    pub f_s: f64,
}

impl From<IsingThermo> for ScalingEntry {
    fn from(t: IsingThermo) -> Self {
        let tc = critical_temperature();
        Self {
            size: t.size,
            temperature: t.temperature,
            reduced_temperature: (t.temperature - tc) / tc,
            c_v_total: t.c_v_total,
            c_v_per_spin: t.c_v_per_spin,
            f_s: t.f_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingSeries {
    pub entries: Vec<ScalingEntry>,
}

/// One entry per lattice size at a common temperature, in the given order.
pub fn scaling_series(
    sizes: &[usize],
    temperature: f64,
    backend: Backend,
) -> Result<ScalingSeries> {
    let entries = sizes
        .iter()
        .map(|&l| {
            let lattice = IsingLattice::new(l, backend)?;
            ising_thermo(&lattice, temperature).map(ScalingEntry::from)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalingSeries { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMode {
    /// `ln F_S` against `ln L`; the slope estimates `−α/ν`.
    PowerLaw,
    /// `C_v` per spin against `ln L`, the `α = 0` case.
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FssFit {
    pub mode: FitMode,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fss_fit(series: &ScalingSeries, mode: FitMode) -> Result<FssFit> {
    let entries = &series.entries;
    if entries.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "finite-size fit needs at least 3 sizes, got {}",
            entries.len()
        )));
    }
    let t0 = entries[0].temperature;
    if entries.iter().any(|e| e.temperature != t0) {
        return Err(Error::InvalidArgument(
            "finite-size fit needs a common temperature".into(),
        ));
    }
    let points: Vec<(f64, f64)> = entries
        .iter()
        .map(|e| {
            let x = (e.size as f64).ln();
            match mode {
                FitMode::PowerLaw => (x, e.f_s.ln()),
                FitMode::Logarithmic => (x, e.c_v_per_spin),
            }
        })
        .collect();
    let (slope, intercept, r_squared) = least_squares(&points)?;
    Ok(FssFit {
        mode,
        slope,
        intercept,
        r_squared,
    })
}

fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument(
            "singular fit: all lattice sizes are equal".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok((slope, intercept, r_squared))
}
