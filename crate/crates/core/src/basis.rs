//! Rovibrational eigenbasis of the boxed Morse oscillator.
//!
//! The radial problem for each partial wave `l` is discretized on a uniform
//! grid `r_i = i·h`, `i = 1..n`, with hard walls at `r = 0` and `r = L = (n+1)·h`.
//! The kinetic operator uses the sine discrete variable representation, which
//! is exact for the free particle in the box and converges spectrally for
//! smooth potentials. The Hamiltonian matrix is dense, real and symmetric.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;

/// Morse potential truncated by a hard wall at `box_length`. All fields in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorseParams {
    pub well_depth: f64,
    /// Inverse range α.
    pub alpha: f64,
    pub r_eq: f64,
    pub box_length: f64,
}

impl MorseParams {
    pub fn new(well_depth: f64, alpha: f64, r_eq: f64, box_length: f64) -> Result<Self> {
        let p = Self { well_depth, alpha, r_eq, box_length };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.well_depth > 0.0 && self.alpha > 0.0 && self.r_eq > 0.0 && self.r_eq < self.box_length) {
            return Err(Error::Config(format!(
                "Morse parameters require D_e > 0, alpha > 0, 0 < r_e < L; got {self:?}"
            )));
        }
        Ok(())
    }

    /// Morse form without the wall.
    pub fn morse(&self, r: f64) -> f64 {
        let x = (-self.alpha * (r - self.r_eq)).exp();
        self.well_depth * (x * x - 2.0 * x)
    }

    /// Harmonic frequency ω₀ = α√(2D_e/m).
    pub fn harmonic_frequency(&self, reduced_mass: f64) -> f64 {
        self.alpha * (2.0 * self.well_depth / reduced_mass).sqrt()
    }

    /// Closed-form level energy of the untruncated Morse oscillator.
    pub fn analytic_level(&self, reduced_mass: f64, v: usize) -> f64 {
        let w = self.harmonic_frequency(reduced_mass) * (v as f64 + 0.5);
        -self.well_depth + w - w * w / (4.0 * self.well_depth)
    }

    /// Number of bound levels of the untruncated oscillator, ⌊λ − ½⌋ + 1 with λ = √(2mD_e)/α.
    pub fn analytic_bound_count(&self, reduced_mass: f64) -> usize {
        let lambda = (2.0 * reduced_mass * self.well_depth).sqrt() / self.alpha;
        if lambda <= 0.5 {
            0
        } else {
            (lambda - 0.5).floor() as usize + 1
        }
    }
}

/// V(r) for `0 < r <= L`. Beyond the wall the potential is infinite, which is
/// imposed through the grid boundary condition rather than returned here.
pub fn potential_value(p: &MorseParams, r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= p.box_length) {
        return Err(Error::Domain(format!("r = {r} outside (0, {}]", p.box_length)));
    }
    Ok(p.morse(r))
}

/// Uniform interior grid `r_i = i·spacing`, `i = 1..=n_points`; `(n_points + 1)·spacing = L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub n_points: usize,
    pub spacing: f64,
}

impl RadialGrid {
    pub fn new(box_length: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 || !(box_length > 0.0) {
            return Err(Error::Config(format!(
                "radial grid needs >= 2 points and L > 0 (n = {n_points}, L = {box_length})"
            )));
        }
        Ok(Self { n_points, spacing: box_length / (n_points + 1) as f64 })
    }

    /// Grid whose spacing does not exceed `max_spacing`.
    pub fn with_max_spacing(box_length: f64, max_spacing: f64) -> Result<Self> {
        let intervals = (box_length / max_spacing).ceil() as usize;
        Self::new(box_length, intervals.max(3) - 1)
    }

    pub fn box_length(&self) -> f64 {
        (self.n_points + 1) as f64 * self.spacing
    }

    pub fn r(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.spacing
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.r(i))
    }

    /// Same box, spacing halved.
    pub fn refined(&self) -> Self {
        Self { n_points: 2 * self.n_points + 1, spacing: self.spacing / 2.0 }
    }
}

/// Sine-DVR kinetic matrix −(1/2m) d²/dr² with Dirichlet walls at both grid ends.
pub fn kinetic_matrix(grid: &RadialGrid, reduced_mass: f64) -> Mat<f64> {
    let n = grid.n_points;
    let intervals = (n + 1) as f64;
    let len = grid.box_length();
    let pref = PI * PI / (2.0 * len * len) / (2.0 * reduced_mass);
    let inv_sin2 = |x: f64| {
        let s = x.sin();
        1.0 / (s * s)
    };
    Mat::from_fn(n, n, |a, b| {
        let (i, j) = ((a + 1) as f64, (b + 1) as f64);
        if a == b {
            pref * ((2.0 * intervals * intervals + 1.0) / 3.0 - inv_sin2(PI * i / intervals))
        } else {
            let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            pref * sign
                * (inv_sin2(PI * (i - j) / (2.0 * intervals)) - inv_sin2(PI * (i + j) / (2.0 * intervals)))
        }
    })
}

/// Lowest eigenpairs of one partial wave.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialChannel {
    pub l: usize,
    /// Ascending.
    pub energies: Vec<f64>,
    /// `n_points × N`; column `k` holds φ_k(r_i)·√h, so columns are orthonormal
    /// in the plain Euclidean sense and ∫φ_k φ_k' dr = Σ_i col_k[i]·col_k'[i].
    pub vectors: Mat<f64>,
    pub bound_count: usize,
}

impl RadialChannel {
    /// φ_k(r_i) in a.u. (bohr^-1/2).
    pub fn wavefunction(&self, k: usize, grid: &RadialGrid) -> Vec<f64> {
        let scale = 1.0 / grid.spacing.sqrt();
        (0..self.vectors.nrows()).map(|i| self.vectors[(i, k)] * scale).collect()
    }

    pub fn levels(&self) -> usize {
        self.energies.len()
    }
}

/// Solve the radial problem for an arbitrary potential `v(r)` including the
/// centrifugal term l(l+1)/(2m r²).
pub fn solve_radial_with<F: Fn(f64) -> f64>(
    potential: F,
    grid: &RadialGrid,
    l: usize,
    reduced_mass: f64,
    n_levels: usize,
) -> Result<RadialChannel> {
    if n_levels == 0 || n_levels > grid.n_points {
        return Err(Error::Config(format!(
            "requested {n_levels} levels on a {}-point grid",
            grid.n_points
        )));
    }
    let mut h = kinetic_matrix(grid, reduced_mass);
    let centrifugal = (l * (l + 1)) as f64 / (2.0 * reduced_mass);
    for i in 0..grid.n_points {
        let r = grid.r(i);
        h[(i, i)] += potential(r) + centrifugal / (r * r);
    }
    let evd = sym_eigen(h.as_ref()).map_err(|e| {
        Error::Numerical(format!(
            "radial eigensolver failed for l = {l} on {} points (h = {:.4e} bohr): {e}",
            grid.n_points, grid.spacing
        ))
    })?;
    let mut vectors = evd.vectors.subcols(0, n_levels).to_owned();
    for k in 0..n_levels {
        fix_sign(&mut vectors, k);
    }
    let energies = evd.values[..n_levels].to_vec();
    let bound_count = energies.iter().take_while(|&&e| e < 0.0).count();
    Ok(RadialChannel { l, energies, vectors, bound_count })
}

/// Make the first lobe of column `k` positive.
fn fix_sign(v: &mut Mat<f64>, k: usize) {
    let n = v.nrows();
    let peak = (0..n).map(|i| v[(i, k)].abs()).fold(0.0, f64::max);
    let first = (0..n).map(|i| v[(i, k)]).find(|x| x.abs() > 1e-6 * peak).unwrap_or(0.0);
    if first < 0.0 {
        for i in 0..n {
            v[(i, k)] = -v[(i, k)];
        }
    }
}

pub fn solve_radial(
    p: &MorseParams,
    grid: &RadialGrid,
    l: usize,
    reduced_mass: f64,
    n_levels: usize,
) -> Result<RadialChannel> {
    p.validate()?;
    if (grid.box_length() - p.box_length).abs() > 1e-9 * p.box_length {
        return Err(Error::Config(format!(
            "grid spans {} bohr but the wall is at {} bohr",
            grid.box_length(),
            p.box_length
        )));
    }
    solve_radial_with(|r| p.morse(r), grid, l, reduced_mass, n_levels)
}

/// Bound or scattering level inside one partial wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    /// Vibrational quantum number ν, zero-based.
    Bound(usize),
    /// Scattering index n, one-based.
    Unbound(usize),
}

/// Truncated rovibrational basis: `N` radial levels for each `l = 0..=l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RovibBasis {
    pub morse: MorseParams,
    pub reduced_mass: f64,
    pub grid: RadialGrid,
    pub n_levels: usize,
    pub channels: Vec<RadialChannel>,
}

impl RovibBasis {
    pub fn l_max(&self) -> usize {
        self.channels.len() - 1
    }

    /// N_D = N·(l_max + 1).
    pub fn dimension(&self) -> usize {
        self.n_levels * self.channels.len()
    }

    pub fn bound_count(&self, l: usize) -> usize {
        self.channels[l].bound_count
    }

    /// Zero-based flat index of a level.
    pub fn index(&self, l: usize, level: Level) -> Result<usize> {
        if l > self.l_max() {
            return Err(Error::Config(format!("l = {l} exceeds l_max = {}", self.l_max())));
        }
        let nb = self.bound_count(l);
        let k = match level {
            Level::Bound(v) if v < nb => v,
            Level::Unbound(n) if n >= 1 && nb + n - 1 < self.n_levels => nb + n - 1,
            _ => {
                return Err(Error::Config(format!(
                    "{level:?} does not exist for l = {l} (N_b = {nb}, N = {})",
                    self.n_levels
                )))
            }
        };
        Ok(l * self.n_levels + k)
    }

    /// Inverse of [`RovibBasis::index`].
    pub fn level_of(&self, index: usize) -> Result<(usize, Level)> {
        if index >= self.dimension() {
            return Err(Error::Dimension { expected: self.dimension(), got: index });
        }
        let l = index / self.n_levels;
        let k = index % self.n_levels;
        let nb = self.bound_count(l);
        Ok((l, if k < nb { Level::Bound(k) } else { Level::Unbound(k - nb + 1) }))
    }

    /// Partial wave of a flat index.
    pub fn l_of(&self, index: usize) -> usize {
        index / self.n_levels
    }

    /// Diagonal of H₀ in flat-index order.
    pub fn energies(&self) -> Vec<f64> {
        self.channels.iter().flat_map(|c| c.energies.iter().copied()).collect()
    }

    pub fn is_bound(&self, index: usize) -> bool {
        let l = index / self.n_levels;
        index % self.n_levels < self.bound_count(l)
    }

    /// Restrict to partial waves `0..=l_max`.
    pub fn truncated(&self, l_max: usize) -> Result<Self> {
        if l_max > self.l_max() {
            return Err(Error::Config(format!("cannot extend basis from l_max = {} to {l_max}", self.l_max())));
        }
        Ok(Self { channels: self.channels[..=l_max].to_vec(), ..self.clone() })
    }

    /// Keep only the lowest `n_levels` radial levels of every partial wave.
    pub fn with_levels(&self, n_levels: usize) -> Result<Self> {
        if n_levels == 0 || n_levels > self.n_levels {
            return Err(Error::Config(format!("cannot keep {n_levels} of {} levels", self.n_levels)));
        }
        let channels = self
            .channels
            .iter()
            .map(|c| {
                let energies = c.energies[..n_levels].to_vec();
                let bound_count = energies.iter().take_while(|&&e| e < 0.0).count();
                RadialChannel { l: c.l, energies, vectors: c.vectors.subcols(0, n_levels).to_owned(), bound_count }
            })
            .collect();
        Ok(Self { n_levels, channels, ..self.clone() })
    }

    /// Cache key over every input that determines the basis.
    pub fn cache_key(p: &MorseParams, grid: &RadialGrid, l_max: usize, reduced_mass: f64, n_levels: usize) -> [u8; 32] {
        let mut h = Sha256::new();
        for x in [p.well_depth, p.alpha, p.r_eq, p.box_length, grid.spacing, reduced_mass] {
            h.update(x.to_bits().to_le_bytes());
        }
        for n in [grid.n_points, l_max, n_levels] {
            h.update((n as u64).to_le_bytes());
        }
        h.update(b"sine-dvr-v1");
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest[..]);
        key
    }

    /// Write the basis cache file. Layout (all little-endian):
    ///
    /// ```text
    /// magic  b"RVBASIS1"
    /// key    [u8; 32]       cache_key of the inputs
    /// f64 ×6 well_depth alpha r_eq box_length spacing reduced_mass
    /// u64 ×3 n_points l_max n_levels
    /// per l: u64 bound_count, f64 × n_levels energies,
    ///        f64 × (n_points·n_levels) vectors, column-major
    /// ```
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&Self::cache_key(&self.morse, &self.grid, self.l_max(), self.reduced_mass, self.n_levels))?;
        for x in [
            self.morse.well_depth,
            self.morse.alpha,
            self.morse.r_eq,
            self.morse.box_length,
            self.grid.spacing,
            self.reduced_mass,
        ] {
            w.write_all(&x.to_le_bytes())?;
        }
        for n in [self.grid.n_points, self.l_max(), self.n_levels] {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        for c in &self.channels {
            w.write_all(&(c.bound_count as u64).to_le_bytes())?;
            for e in &c.energies {
                w.write_all(&e.to_le_bytes())?;
            }
            for k in 0..self.n_levels {
                for i in 0..self.grid.n_points {
                    w.write_all(&c.vectors[(i, k)].to_le_bytes())?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Read a cache file; `expected_key` guards against stale caches.
    pub fn load(path: &Path, expected_key: Option<[u8; 32]>) -> Result<Self> {
        let bad = |reason: &str| Error::Format { path: path.to_path_buf(), reason: reason.to_string() };
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(bad("not a basis cache"));
        }
        let mut key = [0u8; 32];
        r.read_exact(&mut key)?;
        if let Some(k) = expected_key {
            if k != key {
                return Err(bad("cache key does not match the requested parameters"));
            }
        }
        let mut f = [0.0; 6];
        for x in f.iter_mut() {
            *x = read_f64(&mut r)?;
        }
        let n_points = read_u64(&mut r)? as usize;
        let l_max = read_u64(&mut r)? as usize;
        let n_levels = read_u64(&mut r)? as usize;
        if n_levels > n_points || l_max > 10_000 {
            return Err(bad("inconsistent header"));
        }
        let morse = MorseParams { well_depth: f[0], alpha: f[1], r_eq: f[2], box_length: f[3] };
        let grid = RadialGrid { n_points, spacing: f[4] };
        let mut channels = Vec::with_capacity(l_max + 1);
        for l in 0..=l_max {
            let bound_count = read_u64(&mut r)? as usize;
            let energies = (0..n_levels).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
            let mut vectors = Mat::zeros(n_points, n_levels);
            for k in 0..n_levels {
                for i in 0..n_points {
                    vectors[(i, k)] = read_f64(&mut r)?;
                }
            }
            channels.push(RadialChannel { l, energies, vectors, bound_count });
        }
        if Self::cache_key(&morse, &grid, l_max, f[5], n_levels) != key {
            return Err(bad("cache key does not match stored parameters"));
        }
        Ok(Self { morse, reduced_mass: f[5], grid, n_levels, channels })
    }
}

const CACHE_MAGIC: &[u8; 8] = b"RVBASIS1";

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Solve every partial wave `0..=l_max` and keep the lowest `n_levels` of each.
pub fn build_basis(
    p: &MorseParams,
    grid: &RadialGrid,
    l_max: usize,
    reduced_mass: f64,
    n_levels: usize,
) -> Result<RovibBasis> {
    let channels = (0..=l_max)
        .map(|l| solve_radial(p, grid, l, reduced_mass, n_levels))
        .collect::<Result<Vec<_>>>()?;
    Ok(RovibBasis { morse: *p, reduced_mass, grid: *grid, n_levels, channels })
}

/// [`build_basis`] backed by an on-disk cache in `dir`.
pub fn build_basis_cached(
    dir: &Path,
    p: &MorseParams,
    grid: &RadialGrid,
    l_max: usize,
    reduced_mass: f64,
    n_levels: usize,
) -> Result<RovibBasis> {
    let key = RovibBasis::cache_key(p, grid, l_max, reduced_mass, n_levels);
    let name: String = key[..12].iter().map(|b| format!("{b:02x}")).collect();
    let path = dir.join(format!("basis-{name}.bin"));
    if path.exists() {
        if let Ok(b) = RovibBasis::load(&path, Some(key)) {
            return Ok(b);
        }
        log::warn!("ignoring unreadable basis cache {}", path.display());
    }
    let basis = build_basis(p, grid, l_max, reduced_mass, n_levels)?;
    std::fs::create_dir_all(dir)?;
    basis.save(&path)?;
    Ok(basis)
}
