//! Initial collision wavepacket and second-order split-operator propagation of
//! the coefficient vector, iħ dΨ/dt = (H₀ − μ u(t)) Ψ.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{MorseParams, RovibBasis};
use crate::control::ControlField;
use crate::error::{Error, Result};
use crate::linalg::mul_into;
use crate::operators::{DipoleOperator, DipoleParams, TargetObservable};

/// Gaussian ξ(r) = (2/πd²)^¼ exp(i k₀ r − (r − r₀)²/d²), atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavepacketParams {
    pub center: f64,
    /// Relative wavenumber; negative for an incoming packet.
    pub wavenumber: f64,
    pub width: f64,
}

impl WavepacketParams {
    /// Packet with collision energy `energy` = k₀²/2m moving inward.
    pub fn incoming(center: f64, width: f64, energy: f64, reduced_mass: f64) -> Self {
        Self { center, width, wavenumber: -(2.0 * reduced_mass * energy).sqrt() }
    }

    pub fn validate(&self, morse: &MorseParams, dipole: &DipoleParams) -> Result<()> {
        if !(self.wavenumber < 0.0) {
            return Err(Error::Config(format!("wavepacket must be incoming (k0 < 0), got {}", self.wavenumber)));
        }
        if !(self.width > 0.0) {
            return Err(Error::Config(format!("wavepacket width must be positive, got {}", self.width)));
        }
        if self.center >= morse.box_length {
            return Err(Error::Config("wavepacket center lies beyond the wall".into()));
        }
        if morse.morse(self.center).abs() >= 1e-6 * morse.well_depth {
            return Err(Error::Config(format!(
                "wavepacket starts inside the potential: |V(r0)| = {:.3e} >= 1e-6 D_e",
                morse.morse(self.center).abs()
            )));
        }
        if self.center <= 10.0 * dipole.range {
            return Err(Error::Config("wavepacket center must exceed 10 r_d".into()));
        }
        Ok(())
    }

    pub fn amplitude(&self, r: f64) -> Complex64 {
        let norm = (2.0 / (std::f64::consts::PI * self.width * self.width)).powf(0.25);
        let x = (r - self.center) / self.width;
        Complex64::from_polar(norm * (-x * x).exp(), self.wavenumber * r)
    }
}

/// Coefficients over the flat rovibrational index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub coefficients: Vec<Complex64>,
    pub time: f64,
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        Self { coefficients: vec![Complex64::new(0.0, 0.0); dim], time: 0.0 }
    }

    /// Unit vector on flat index `i`.
    pub fn basis_state(dim: usize, i: usize) -> Self {
        let mut s = Self::zeros(dim);
        s.coefficients[i] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn dimension(&self) -> usize {
        self.coefficients.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.coefficients.iter_mut().for_each(|c| *c /= n);
        }
    }

    /// Snapshot layout: `b"RVSTATE1"`, u64 dimension, f64 time, then (re, im) f64 pairs; little-endian.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(b"RVSTATE1")?;
        w.write_all(&(self.dimension() as u64).to_le_bytes())?;
        w.write_all(&self.time.to_le_bytes())?;
        for c in &self.coefficients {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let bad = |reason: &str| Error::Format { path: path.to_path_buf(), reason: reason.into() };
        if bytes.len() < 24 || &bytes[..8] != b"RVSTATE1" {
            return Err(bad("not a state snapshot"));
        }
        let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        if bytes.len() != 24 + 16 * n {
            return Err(bad("truncated state snapshot"));
        }
        let coefficients = (0..n).map(|k| Complex64::new(f(24 + 16 * k), f(32 + 16 * k))).collect();
        Ok(Self { coefficients, time: f(16) })
    }
}

/// Result of projecting a radial function onto the l = 0 channel.
#[derive(Debug, Clone)]
pub struct Projection {
    pub state: StateVector,
    /// ∫|ξ|²dr − Σ|c|², norm missing from the truncated basis.
    pub truncation_defect: f64,
    /// Σ_ν |a_ν0|².
    pub bound_content: f64,
}

/// Coefficients c_k = ∫ φ_{k0}(r) ξ(r) dr on the grid, renormalized.
pub fn project_l0<F: Fn(f64) -> Complex64>(basis: &RovibBasis, xi: F) -> Projection {
    let grid = &basis.grid;
    let h = grid.spacing;
    let samples: Vec<Complex64> = grid.points().map(&xi).collect();
    let total: f64 = h * samples.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let ch = &basis.channels[0];
    let mut state = StateVector::zeros(basis.dimension());
    for k in 0..basis.n_levels {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, s) in samples.iter().enumerate() {
            acc += s * ch.vectors[(i, k)];
        }
        state.coefficients[k] = acc * h.sqrt();
    }
    let kept = state.norm_sqr();
    let bound_content: f64 = state.coefficients[..ch.bound_count].iter().map(|c| c.norm_sqr()).sum();
    state.normalize();
    Projection { state, truncation_defect: total - kept, bound_content }
}

/// Expand the Gaussian collision packet in the basis.
pub fn initial_wavepacket(p: &WavepacketParams, basis: &RovibBasis) -> Result<Projection> {
    let proj = project_l0(basis, |r| p.amplitude(r));
    if proj.truncation_defect > 1e-6 {
        return Err(Error::Config(format!(
            "wavepacket loses {:.3e} of its norm to levels above N = {}; raise N or narrow the momentum spread",
            proj.truncation_defect, basis.n_levels
        )));
    }
    if proj.bound_content > 1e-10 {
        return Err(Error::Config(format!(
            "initial packet has bound content {:.3e}; move r0 further out",
            proj.bound_content
        )));
    }
    Ok(proj)
}

/// ⟨Ψ|O|Ψ⟩ for a real symmetric O.
pub fn expectation(state: &StateVector, target: &TargetObservable) -> f64 {
    expectation_matrix(state, &target.matrix)
}

pub fn expectation_matrix(state: &StateVector, o: &Mat<f64>) -> f64 {
    let n = state.dimension();
    assert_eq!(o.nrows(), n, "observable dimension mismatch");
    let mut re = 0.0;
    let mut im = 0.0;
    for j in 0..n {
        let cj = state.coefficients[j];
        if cj == Complex64::new(0.0, 0.0) {
            continue;
        }
        let col = o.col(j);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            acc += state.coefficients[i].conj() * col[i];
        }
        let z = acc * cj;
        re += z.re;
        im += z.im;
    }
    debug_assert!(im.abs() < 1e-12 * re.abs().max(1.0), "imaginary residue {im}");
    re
}

/// Σ_i E_i |c_i|².
pub fn energy(state: &StateVector, energies: &[f64]) -> f64 {
    state.coefficients.iter().zip(energies).map(|(c, e)| c.norm_sqr() * e).sum()
}

/// Several states stored side by side: columns `0..k` real parts, `k..2k` imaginary parts.
#[derive(Debug, Clone)]
pub(crate) struct StateBlock {
    pub data: Mat<f64>,
    pub k: usize,
    scratch: Mat<f64>,
}

impl StateBlock {
    pub fn zeros(n: usize, k: usize) -> Self {
        Self { data: Mat::zeros(n, 2 * k), k, scratch: Mat::zeros(n, 2 * k) }
    }

    pub fn from_states(states: &[&StateVector]) -> Self {
        let n = states.first().map_or(0, |s| s.dimension());
        let mut b = Self::zeros(n, states.len());
        for (c, s) in states.iter().enumerate() {
            b.set(c, s);
        }
        b
    }

    /// Real column vectors as states.
    pub fn from_real_columns(m: &Mat<f64>) -> Self {
        let mut b = Self::zeros(m.nrows(), m.ncols());
        for c in 0..m.ncols() {
            for i in 0..m.nrows() {
                b.data[(i, c)] = m[(i, c)];
            }
        }
        b
    }

    pub fn set(&mut self, c: usize, s: &StateVector) {
        for (i, z) in s.coefficients.iter().enumerate() {
            self.data[(i, c)] = z.re;
            self.data[(i, self.k + c)] = z.im;
        }
    }

    pub fn get(&self, c: usize) -> StateVector {
        let coefficients =
            (0..self.data.nrows()).map(|i| Complex64::new(self.data[(i, c)], self.data[(i, self.k + c)])).collect();
        StateVector { coefficients, time: 0.0 }
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn re(&self, i: usize, c: usize) -> f64 {
        self.data[(i, c)]
    }

    #[inline]
    pub fn im(&self, i: usize, c: usize) -> f64 {
        self.data[(i, self.k + c)]
    }

    /// Copy columns of `src` (states `from..from+count`) into states starting at `to`.
    pub fn copy_states_from(&mut self, src: &StateBlock, from: usize, to: usize, count: usize) {
        for c in 0..count {
            for i in 0..self.data.nrows() {
                self.data[(i, to + c)] = src.data[(i, from + c)];
                self.data[(i, self.k + to + c)] = src.data[(i, src.k + from + c)];
            }
        }
    }

    /// Multiply states `cols` elementwise by phases (cos, sin).
    fn rotate(&mut self, phases: &[(f64, f64)], cols: std::ops::Range<usize>) {
        let k = self.k;
        for c in cols {
            for (i, &(cs, sn)) in phases.iter().enumerate() {
                let re = self.data[(i, c)];
                let im = self.data[(i, k + c)];
                self.data[(i, c)] = re * cs - im * sn;
                self.data[(i, k + c)] = re * sn + im * cs;
            }
        }
    }

    fn apply(&mut self, m: faer::MatRef<'_, f64>) {
        mul_into(self.scratch.as_mut(), m, self.data.as_ref());
        std::mem::swap(&mut self.data, &mut self.scratch);
    }
}

/// Split-operator propagator e^{−iH₀Δt/2} e^{iμuΔt} e^{−iH₀Δt/2} with both
/// exponentials evaluated exactly: H₀ is diagonal and μ = QΛQᵀ.
#[derive(Debug, Clone)]
pub struct SplitOperator {
    energies: Vec<f64>,
    lambda: Vec<f64>,
    q: Mat<f64>,
    dt: f64,
    half_forward: Vec<(f64, f64)>,
    half_backward: Vec<(f64, f64)>,
}

impl SplitOperator {
    pub fn new(energies: Vec<f64>, dipole: &DipoleOperator, dt: f64) -> Result<Self> {
        if energies.len() != dipole.dimension() {
            return Err(Error::Dimension { expected: dipole.dimension(), got: energies.len() });
        }
        if !(dt >= 0.0) {
            return Err(Error::Config(format!("time step must be non-negative, got {dt}")));
        }
        let half_forward = energies.iter().map(|e| phase(-e * dt / 2.0)).collect();
        let half_backward = energies.iter().map(|e| phase(e * dt / 2.0)).collect();
        Ok(Self {
            energies,
            lambda: dipole.eigen.values.clone(),
            q: dipole.eigen.vectors.clone(),
            dt,
            half_forward,
            half_backward,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub(crate) fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    fn dipole_phases(&self, u: f64, sign: f64) -> Vec<(f64, f64)> {
        self.lambda.iter().map(|l| phase(sign * l * u * self.dt)).collect()
    }

    pub(crate) fn half_h0(&self, b: &mut StateBlock, forward: bool, cols: std::ops::Range<usize>) {
        b.rotate(if forward { &self.half_forward } else { &self.half_backward }, cols);
    }

    pub(crate) fn to_eigenbasis(&self, b: &mut StateBlock) {
        b.apply(self.q.transpose());
    }

    pub(crate) fn from_eigenbasis(&self, b: &mut StateBlock) {
        b.apply(self.q.as_ref());
    }

    /// e^{±iΛuΔt} on states `cols` (block must be in the dipole eigenbasis).
    pub(crate) fn dipole_kick(&self, b: &mut StateBlock, u: f64, forward: bool, cols: std::ops::Range<usize>) {
        let phases = self.dipole_phases(u, if forward { 1.0 } else { -1.0 });
        b.rotate(&phases, cols);
    }

    pub(crate) fn step_block(&self, b: &mut StateBlock, u: f64) {
        let all = 0..b.k;
        self.half_h0(b, true, all.clone());
        self.to_eigenbasis(b);
        self.dipole_kick(b, u, true, all.clone());
        self.from_eigenbasis(b);
        self.half_h0(b, true, all);
    }

    /// Exact inverse of [`SplitOperator::step_block`].
    pub(crate) fn step_back_block(&self, b: &mut StateBlock, u: f64) {
        let all = 0..b.k;
        self.half_h0(b, false, all.clone());
        self.to_eigenbasis(b);
        self.dipole_kick(b, u, false, all.clone());
        self.from_eigenbasis(b);
        self.half_h0(b, false, all);
    }

    /// One step Ψ(t+Δt) = U(t+Δt, t) Ψ(t) with field value `u`.
    pub fn step(&self, state: &StateVector, u: f64) -> StateVector {
        let mut b = StateBlock::from_states(&[state]);
        self.step_block(&mut b, u);
        let mut out = b.get(0);
        out.time = state.time + self.dt;
        out
    }

    /// One step backward in time, Ψ(t−Δt) = U(t−Δt, t) Ψ(t).
    pub fn step_back(&self, state: &StateVector, u: f64) -> StateVector {
        let mut b = StateBlock::from_states(&[state]);
        self.step_back_block(&mut b, u);
        let mut out = b.get(0);
        out.time = state.time - self.dt;
        out
    }
}

fn phase(angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    (c, s)
}

/// What to record while propagating.
#[derive(Debug, Clone)]
pub struct Observers<'a> {
    pub targets: Vec<(String, &'a TargetObservable)>,
    /// Record every `stride` steps (plus the first and last time).
    pub stride: usize,
    /// Keep full states every `n` steps.
    pub snapshot_stride: Option<usize>,
}

impl Default for Observers<'_> {
    fn default() -> Self {
        Self { targets: Vec::new(), stride: 200, snapshot_stride: None }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// |c_i|² per recorded time, flat-index order.
    pub populations: Vec<Vec<f64>>,
    pub observable_names: Vec<String>,
    /// `observables[j][t]` is observable `j` at `times[t]`.
    pub observables: Vec<Vec<f64>>,
    pub snapshots: Vec<StateVector>,
    pub final_state: StateVector,
}

impl Trajectory {
    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observable_names.iter().position(|n| n == name).map(|j| self.observables[j].as_slice())
    }
}

/// Propagate `initial` through every step of `field`, recording observers.
pub fn propagate(
    prop: &SplitOperator,
    initial: &StateVector,
    field: &ControlField,
    observers: &Observers<'_>,
) -> Result<Trajectory> {
    if initial.dimension() != prop.dimension() {
        return Err(Error::Dimension { expected: prop.dimension(), got: initial.dimension() });
    }
    if (field.dt - prop.dt).abs() > 1e-12 * prop.dt.max(1e-300) {
        return Err(Error::Config(format!("field step {} differs from propagator step {}", field.dt, prop.dt)));
    }
    let stride = observers.stride.max(1);
    let mut traj = Trajectory {
        times: Vec::new(),
        populations: Vec::new(),
        observable_names: observers.targets.iter().map(|(n, _)| n.clone()).collect(),
        observables: vec![Vec::new(); observers.targets.len()],
        snapshots: Vec::new(),
        final_state: initial.clone(),
    };
    let mut block = StateBlock::from_states(&[initial]);
    let t0 = initial.time;
    let steps = field.steps();
    let record = |traj: &mut Trajectory, block: &StateBlock, i: usize| -> Result<()> {
        let mut s = block.get(0);
        s.time = t0 + i as f64 * prop.dt;
        let norm = s.norm_sqr();
        if !norm.is_finite() {
            return Err(Error::Numerical(format!("state became non-finite at step {i} (t = {:.6e} au)", s.time)));
        }
        traj.times.push(s.time);
        traj.populations.push(s.populations());
        for (j, (_, o)) in observers.targets.iter().enumerate() {
            traj.observables[j].push(expectation(&s, o));
        }
        if let Some(n) = observers.snapshot_stride {
            if n > 0 && i % n == 0 {
                traj.snapshots.push(s);
            }
        }
        Ok(())
    };
    record(&mut traj, &block, 0)?;
    for i in 0..steps {
        prop.step_block(&mut block, field.values[i]);
        if (i + 1) % stride == 0 || i + 1 == steps {
            record(&mut traj, &block, i + 1)?;
        }
    }
    let mut fin = block.get(0);
    fin.time = t0 + steps as f64 * prop.dt;
    if !fin.norm_sqr().is_finite() {
        return Err(Error::Numerical("final state is non-finite".into()));
    }
    traj.final_state = fin;
    Ok(traj)
}

/// Propagate without recording anything; returns Ψ(t_f).
pub fn propagate_final(prop: &SplitOperator, initial: &StateVector, field: &ControlField) -> StateVector {
    let mut block = StateBlock::from_states(&[initial]);
    for &u in &field.values {
        prop.step_block(&mut block, u);
    }
    let mut fin = block.get(0);
    fin.time = initial.time + field.steps() as f64 * prop.dt;
    fin
}
