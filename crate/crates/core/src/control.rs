//! Monotonic field optimization (TBQCP).
//!
//! Each iteration propagates the eigenstates |k⟩ of the target observable
//! backward under the previous field, then propagates the initial state
//! forward while the field is corrected on the fly from
//!
//! ```text
//! f(t) = −2 Im Σ_k σ_k ⟨ψ(t)|χ_k(t)⟩⟨χ_k(t)|μ|ψ(t)⟩
//! ```
//!
//! The gradient is evaluated between the first H₀ half step and the dipole
//! kick of every split-operator step, in the dipole eigenbasis. There it is the
//! exact derivative of the discrete propagator, so the first-order update keeps
//! J non-decreasing up to O(η²).
//!
//! Backward states are kept as checkpoints every `stride` steps and
//! re-propagated forward (under the old field) alongside ψ.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{expectation, propagate_final, SplitOperator, StateBlock, StateVector};
use crate::error::{Error, Result};
use crate::operators::{TargetKind, TargetObservable};

/// Field sampled once per propagation step at the step midpoint t_i + Δt/2.
/// The propagator holds `values[i]` constant over step i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlField {
    pub dt: f64,
    pub values: Vec<f64>,
    /// s(t) at the same midpoints.
    pub envelope: Vec<f64>,
}

/// s(t) = sin²(πt/t_f) on [0, t_f], zero elsewhere.
pub fn sin2_envelope(t: f64, t_f: f64) -> f64 {
    if !(0.0..=t_f).contains(&t) {
        return 0.0;
    }
    let s = (PI * t / t_f).sin();
    s * s
}

/// u⁽⁰⁾(t) = s(t)·V·sin(ω_c t).
pub fn trial_field_value(t: f64, amplitude: f64, omega: f64, t_f: f64) -> f64 {
    sin2_envelope(t, t_f) * amplitude * (omega * t).sin()
}

fn step_count(t_f: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && t_f > 0.0) {
        return Err(Error::Config(format!("need t_f > 0 and dt > 0 (t_f = {t_f}, dt = {dt})")));
    }
    let m = (t_f / dt).round();
    if (m * dt - t_f).abs() > 1e-6 * dt {
        return Err(Error::Config(format!("t_f = {t_f} is not a whole number of steps dt = {dt}")));
    }
    Ok(m as usize)
}

pub fn trial_field(amplitude: f64, omega: f64, t_f: f64, dt: f64) -> Result<ControlField> {
    if !(amplitude >= 0.0 && omega > 0.0) {
        return Err(Error::Config(format!("trial field needs V >= 0 and omega > 0 (V = {amplitude}, omega = {omega})")));
    }
    let m = step_count(t_f, dt)?;
    Ok(ControlField::from_fn(m, dt, |t| trial_field_value(t, amplitude, omega, t_f)))
}

impl ControlField {
    /// Field `f(t)` sampled at midpoints with a sin² envelope over `steps·dt`.
    pub fn from_fn<F: Fn(f64) -> f64>(steps: usize, dt: f64, f: F) -> Self {
        let t_f = steps as f64 * dt;
        let mid = |i: usize| (i as f64 + 0.5) * dt;
        Self {
            dt,
            values: (0..steps).map(|i| f(mid(i))).collect(),
            envelope: (0..steps).map(|i| sin2_envelope(mid(i), t_f)).collect(),
        }
    }

    pub fn zeros(steps: usize, dt: f64) -> Self {
        Self::from_fn(steps, dt, |_| 0.0)
    }

    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn t_f(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    /// Sample times (step midpoints).
    pub fn times(&self) -> Vec<f64> {
        (0..self.steps()).map(|i| (i as f64 + 0.5) * self.dt).collect()
    }

    /// Same field played backwards in time.
    pub fn reversed(&self) -> Self {
        let mut r = self.clone();
        r.values.reverse();
        r.envelope.reverse();
        r
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// u⁽ʲ⁺¹⁾ = u⁽ʲ⁾ + η s f⁽ʲ⁺¹⁾
    FirstOrder,
    /// u⁽ʲ⁺¹⁾ = u⁽ʲ⁾ + η s (2f⁽ʲ⁺¹⁾ − f⁽ʲ⁾) after a first-order first iteration.
    Accelerated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaChoice {
    Fixed(f64),
    /// Pick η from the decade grid `10^lo ..= 10^hi` by one trial iteration each.
    Bracket { lo: i32, hi: i32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TbqcpConfig {
    pub eta: EtaChoice,
    pub n_iterations: usize,
    pub scheme: Scheme,
    /// Backward-state checkpoint spacing in steps; raised automatically to fit `memory_budget`.
    pub checkpoint_stride: usize,
    /// Bytes available for backward checkpoints.
    pub memory_budget: usize,
    /// An accelerated iteration losing more than this reduces η and is redone first-order.
    pub safeguard: f64,
    /// A first-order iteration losing more than this reduces η and is redone.
    pub monotonic_tolerance: f64,
    /// Factor applied to η on every rejected update.
    pub eta_backoff: f64,
    /// Rejections per iteration before the field is left unchanged.
    pub max_backoffs: usize,
    /// Factor applied to η after an update accepted without any rejection (1 keeps η fixed).
    pub eta_growth: f64,
    /// Iterations whose field is kept in the record.
    pub snapshot_iterations: Vec<usize>,
}

impl Default for TbqcpConfig {
    fn default() -> Self {
        Self {
            eta: EtaChoice::Bracket { lo: -4, hi: 2 },
            n_iterations: 100,
            scheme: Scheme::Accelerated,
            checkpoint_stride: 10,
            memory_budget: 512 << 20,
            safeguard: 1e-4,
            monotonic_tolerance: 1e-6,
            eta_backoff: 0.5,
            max_backoffs: 40,
            eta_growth: 1.0,
            snapshot_iterations: Vec::new(),
        }
    }
}

impl TbqcpConfig {
    pub fn validate(&self) -> Result<()> {
        match self.eta {
            EtaChoice::Fixed(e) if !(e >= 0.0) => {
                return Err(Error::Config(format!("eta must be >= 0, got {e}")));
            }
            EtaChoice::Bracket { lo, hi } if lo > hi => {
                return Err(Error::Config(format!("empty eta bracket 1e{lo}..1e{hi}")));
            }
            _ => {}
        }
        if !(self.eta_growth >= 1.0 && self.eta_growth.is_finite()) {
            return Err(Error::Config(format!("eta growth must be a finite factor >= 1, got {}", self.eta_growth)));
        }
        if !(self.eta_backoff > 0.0 && self.eta_backoff < 1.0) {
            return Err(Error::Config(format!("eta backoff must lie in (0, 1), got {}", self.eta_backoff)));
        }
        if self.checkpoint_stride == 0 {
            return Err(Error::Config("checkpoint stride must be positive".into()));
        }
        Ok(())
    }
}

/// Everything the optimizer propagates against.
#[derive(Clone, Copy)]
pub struct ControlProblem<'a> {
    pub propagator: &'a SplitOperator,
    pub initial: &'a StateVector,
    pub target: &'a TargetObservable,
}

impl ControlProblem<'_> {
    /// J = ⟨ψ(t_f)|O|ψ(t_f)⟩ under `field`.
    pub fn objective(&self, field: &ControlField) -> f64 {
        expectation(&propagate_final(self.propagator, self.initial, field), self.target)
    }

    fn check(&self, field: &ControlField) -> Result<()> {
        let n = self.propagator.dimension();
        if self.initial.dimension() != n {
            return Err(Error::Dimension { expected: n, got: self.initial.dimension() });
        }
        if self.target.dimension() != n {
            return Err(Error::Dimension { expected: n, got: self.target.dimension() });
        }
        if (field.dt - self.propagator.dt()).abs() > 1e-12 * field.dt {
            return Err(Error::Config("field and propagator time steps differ".into()));
        }
        if field.envelope.len() != field.values.len() {
            return Err(Error::Dimension { expected: field.values.len(), got: field.envelope.len() });
        }
        Ok(())
    }

    fn fingerprint(&self, field: &ControlField) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.propagator.dimension() as u64).to_le_bytes());
        h.update(self.propagator.dt().to_bits().to_le_bytes());
        h.update((field.steps() as u64).to_le_bytes());
        for e in self.propagator.energies() {
            h.update(e.to_bits().to_le_bytes());
        }
        for c in &self.initial.coefficients {
            h.update(c.re.to_bits().to_le_bytes());
            h.update(c.im.to_bits().to_le_bytes());
        }
        for s in &self.target.sigmas {
            h.update(s.to_bits().to_le_bytes());
        }
        h.update(format!("{:?}", self.target.kind).as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Backward-propagated target eigenstates χ_k(t_i) = U(t_i, t_f)|k⟩, kept at checkpoints.
pub struct BackwardTargets {
    stride: usize,
    /// `checkpoints[c]` holds all χ_k at step `c·stride`.
    checkpoints: Vec<StateBlock>,
    sigmas: Vec<f64>,
    steps: usize,
}

impl BackwardTargets {
    pub fn rank(&self) -> usize {
        self.sigmas.len()
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// χ_k(t_i) for every kept eigenstate, recomputed from the nearest checkpoint.
    pub fn states_at(&self, prop: &SplitOperator, field: &ControlField, i: usize) -> Vec<StateVector> {
        assert!(i <= self.steps);
        let c = (i / self.stride).min(self.checkpoints.len().saturating_sub(1));
        let mut block = self.checkpoints[c].clone();
        for s in c * self.stride..i {
            prop.step_block(&mut block, field.values[s]);
        }
        (0..self.rank())
            .map(|k| {
                let mut s = block.get(k);
                s.time = i as f64 * prop.dt();
                s
            })
            .collect()
    }
}

/// Checkpoint spacing that fits `rank` backward states of dimension `dim` in `budget` bytes.
fn effective_stride(config_stride: usize, steps: usize, rank: usize, dim: usize, budget: usize) -> usize {
    let per_checkpoint = (16 * rank * dim).max(1);
    let max_checkpoints = (budget / per_checkpoint).max(1);
    let needed = steps.div_ceil(max_checkpoints).max(1);
    config_stride.max(needed)
}

pub fn backward_propagate_targets(
    prop: &SplitOperator,
    target: &TargetObservable,
    field: &ControlField,
    stride: usize,
) -> BackwardTargets {
    let steps = field.steps();
    let stride = stride.max(1);
    let mut block = StateBlock::from_real_columns(&target.states);
    let mut checkpoints = Vec::with_capacity(steps / stride + 1);
    for i in (0..steps).rev() {
        prop.step_back_block(&mut block, field.values[i]);
        if i % stride == 0 {
            checkpoints.push(block.clone());
        }
    }
    if steps == 0 {
        checkpoints.push(block);
    }
    checkpoints.reverse();
    BackwardTargets { stride, checkpoints, sigmas: target.sigmas.clone(), steps }
}

/// f_μ = −2 Im Σ_k σ_k ⟨ψ|χ_k⟩⟨χ_k|μ|ψ⟩ with a dense dipole matrix (ħ = 1).
pub fn f_mu(psi: &StateVector, chis: &[StateVector], sigmas: &[f64], dipole: &faer::Mat<f64>) -> Result<f64> {
    let n = psi.dimension();
    if dipole.nrows() != n || chis.iter().any(|c| c.dimension() != n) {
        return Err(Error::Dimension { expected: n, got: dipole.nrows() });
    }
    if chis.len() != sigmas.len() {
        return Err(Error::Dimension { expected: chis.len(), got: sigmas.len() });
    }
    let mu_psi: Vec<num_complex::Complex64> = (0..n)
        .map(|i| (0..n).map(|j| psi.coefficients[j] * dipole[(i, j)]).sum())
        .collect();
    let mut acc = 0.0;
    for (chi, &s) in chis.iter().zip(sigmas) {
        let ov = psi.inner(chi);
        let m: num_complex::Complex64 = chi.coefficients.iter().zip(&mu_psi).map(|(c, v)| c.conj() * v).sum();
        acc += s * (ov * m).im;
    }
    Ok(-2.0 * acc)
}

/// The same quantity from a block already in the dipole eigenbasis: ψ in state 0, χ_k in state k+1.
fn f_mu_eigenbasis(block: &StateBlock, lambda: &[f64], sigmas: &[f64]) -> f64 {
    let n = block.nrows();
    let mut acc = 0.0;
    for (k, &s) in sigmas.iter().enumerate() {
        let c = k + 1;
        // ⟨a|c⟩ and ⟨c|Λ|a⟩
        let (mut ov_re, mut ov_im, mut m_re, mut m_im) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let (ar, ai) = (block.re(i, 0), block.im(i, 0));
            let (cr, ci) = (block.re(i, c), block.im(i, c));
            ov_re += ar * cr + ai * ci;
            ov_im += ar * ci - ai * cr;
            let l = lambda[i];
            m_re += l * (cr * ar + ci * ai);
            m_im += l * (cr * ai - ci * ar);
        }
        acc += s * (ov_re * m_im + ov_im * m_re);
    }
    -2.0 * acc
}

/// Outcome of one forward sweep.
struct Sweep {
    field: ControlField,
    gradient: Vec<f64>,
    j: f64,
}

fn forward_sweep(
    problem: &ControlProblem<'_>,
    old: &ControlField,
    backward: &BackwardTargets,
    eta: f64,
    previous_gradient: Option<&[f64]>,
) -> Sweep {
    let prop = problem.propagator;
    let k = backward.rank();
    let n = prop.dimension();
    let steps = old.steps();
    let mut block = StateBlock::zeros(n, k + 1);
    block.set(0, problem.initial);
    let mut field = old.clone();
    let mut gradient = vec![0.0; steps];
    for i in 0..steps {
        if i % backward.stride == 0 && k > 0 {
            block.copy_states_from(&backward.checkpoints[i / backward.stride], 0, 1, k);
        }
        prop.half_h0(&mut block, true, 0..k + 1);
        prop.to_eigenbasis(&mut block);
        let g = if k > 0 { f_mu_eigenbasis(&block, prop.lambda(), &backward.sigmas) } else { 0.0 };
        gradient[i] = g;
        let direction = match previous_gradient {
            Some(prev) => 2.0 * g - prev[i],
            None => g,
        };
        field.values[i] = old.values[i] + eta * old.envelope[i] * direction;
        prop.dipole_kick(&mut block, field.values[i], true, 0..1);
        prop.dipole_kick(&mut block, old.values[i], true, 1..k + 1);
        prop.from_eigenbasis(&mut block);
        prop.half_h0(&mut block, true, 0..k + 1);
    }
    let psi = block.get(0);
    Sweep { j: expectation(&psi, problem.target), field, gradient }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub j: f64,
    pub eta: f64,
    /// Scheme of the accepted update.
    pub scheme: Scheme,
    /// Times η was reduced before the update was accepted.
    pub backoffs: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRecord {
    /// J of the trial field.
    pub initial_j: f64,
    pub iterations: Vec<IterationStats>,
    /// (iteration, field values) for the configured snapshot iterations.
    pub field_snapshots: Vec<(usize, Vec<f64>)>,
    /// f_μ of the last completed iteration, per step.
    pub last_gradient: Vec<f64>,
    /// (η, J after one first-order iteration) for every bracket candidate.
    pub eta_scan: Vec<(f64, f64)>,
}

impl OptimizationRecord {
    /// J for iterations 0 (trial), 1, 2, …
    pub fn j_history(&self) -> Vec<f64> {
        std::iter::once(self.initial_j).chain(self.iterations.iter().map(|s| s.j)).collect()
    }

    pub fn final_j(&self) -> f64 {
        self.iterations.last().map_or(self.initial_j, |s| s.j)
    }
}

/// Resumable optimizer state. Serialized as JSON; f64 values round-trip exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    /// Hash of dimension, time grid, energies, initial state and target spectrum.
    pub fingerprint: String,
    /// Completed iterations.
    pub iteration: usize,
    pub eta: f64,
    pub field: ControlField,
    pub previous_gradient: Option<Vec<f64>>,
    pub record: OptimizationRecord,
}

const CHECKPOINT_FORMAT: &str = "tbqcp-checkpoint-v1";

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)
            .map_err(|e| Error::Format { path: path.to_path_buf(), reason: e.to_string() })?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let c: Self =
            serde_json::from_str(&text).map_err(|e| Error::Format { path: path.to_path_buf(), reason: e.to_string() })?;
        if c.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unknown checkpoint format {:?}", c.format)));
        }
        Ok(c)
    }
}

/// Choose η from the bracket: one first-order iteration per decade from the
/// trial field, keeping the η with the largest J among those that do not lower J.
pub fn scan_eta(
    problem: &ControlProblem<'_>,
    trial: &ControlField,
    backward: &BackwardTargets,
    lo: i32,
    hi: i32,
) -> (f64, Vec<(f64, f64)>) {
    let j0 = problem.objective(trial);
    let mut scan = Vec::new();
    let mut best = (0.0, j0);
    for e in lo..=hi {
        let eta = 10f64.powi(e);
        let j = forward_sweep(problem, trial, backward, eta, None).j;
        scan.push((eta, j));
        if j.is_finite() && j >= j0 && j > best.1 {
            best = (eta, j);
        }
    }
    if best.0 == 0.0 {
        best.0 = 10f64.powi(lo);
    }
    (best.0, scan)
}

/// Optimizer state after a completed iteration.
pub struct Progress<'a> {
    pub stats: &'a IterationStats,
    pub eta: f64,
    pub field: &'a ControlField,
    pub previous_gradient: Option<&'a [f64]>,
    pub record: &'a OptimizationRecord,
}

/// Progress hook invoked after every iteration.
pub trait Monitor {
    fn iteration(&mut self, _progress: &Progress<'_>) {}
}

impl Monitor for () {}

/// Run TBQCP from `trial` (or from `resume`) and return the optimized field.
pub fn tbqcp_run(
    problem: &ControlProblem<'_>,
    config: &TbqcpConfig,
    trial: &ControlField,
    resume: Option<Checkpoint>,
    monitor: &mut dyn Monitor,
) -> Result<(ControlField, OptimizationRecord)> {
    config.validate()?;
    problem.check(trial)?;
    let prop = problem.propagator;
    let stride = effective_stride(
        config.checkpoint_stride,
        trial.steps(),
        problem.target.rank(),
        prop.dimension(),
        config.memory_budget,
    );

    let (mut field, mut eta, mut previous, mut record, start) = match resume {
        Some(c) => {
            if c.fingerprint != problem.fingerprint(trial) {
                return Err(Error::Checkpoint(
                    "checkpoint was written for a different basis, time grid, initial state or target".into(),
                ));
            }
            if c.field.steps() != trial.steps() {
                return Err(Error::Checkpoint("checkpoint field has a different number of steps".into()));
            }
            (c.field, c.eta, c.previous_gradient, c.record, c.iteration)
        }
        None => {
            let record = OptimizationRecord { initial_j: problem.objective(trial), ..Default::default() };
            let eta = match config.eta {
                EtaChoice::Fixed(e) => e,
                EtaChoice::Bracket { .. } => f64::NAN,
            };
            (trial.clone(), eta, None, record, 0)
        }
    };

    let mut j_old = record.final_j();
    for it in start..config.n_iterations {
        let t0 = Instant::now();
        let backward = backward_propagate_targets(prop, problem.target, &field, stride);
        if eta.is_nan() {
            if let EtaChoice::Bracket { lo, hi } = config.eta {
                let (e, scan) = scan_eta(problem, &field, &backward, lo, hi);
                log::info!("eta bracket scan {scan:?} -> {e:e}");
                record.eta_scan = scan;
                eta = e;
            }
        }
        let accelerated = config.scheme == Scheme::Accelerated && previous.is_some();
        let mut scheme = if accelerated { Scheme::Accelerated } else { Scheme::FirstOrder };
        let mut sweep = forward_sweep(problem, &field, &backward, eta, if accelerated { previous.as_deref() } else { None });
        let mut backoffs = 0;
        loop {
            if !sweep.j.is_finite() {
                return Err(Error::Numerical(format!("objective became non-finite at iteration {}", it + 1)));
            }
            let tolerance = if scheme == Scheme::Accelerated { config.safeguard } else { config.monotonic_tolerance };
            if sweep.j >= j_old - tolerance {
                break;
            }
            if backoffs == config.max_backoffs {
                log::warn!("iteration {}: no eta down to {eta:e} raises J; field left unchanged", it + 1);
                sweep = Sweep { field: field.clone(), gradient: sweep.gradient, j: j_old };
                break;
            }
            backoffs += 1;
            log::warn!(
                "iteration {}: {scheme:?} update moved J from {j_old:.6} to {:.6}; eta {eta:e} -> {:e}",
                it + 1,
                sweep.j,
                eta * config.eta_backoff
            );
            eta *= config.eta_backoff;
            scheme = Scheme::FirstOrder;
            sweep = forward_sweep(problem, &field, &backward, eta, None);
        }
        field = sweep.field;
        previous = Some(sweep.gradient);
        j_old = sweep.j;
        let stats =
            IterationStats { iteration: it + 1, j: sweep.j, eta, scheme, backoffs, seconds: t0.elapsed().as_secs_f64() };
        log::info!("iteration {:>4}  J = {:.8}  eta = {:.3e}  ({:?}, {:.2}s)", stats.iteration, stats.j, eta, scheme, stats.seconds);
        record.iterations.push(stats);
        if backoffs == 0 {
            eta *= config.eta_growth;
        }
        if config.snapshot_iterations.contains(&(it + 1)) {
            record.field_snapshots.push((it + 1, field.values.clone()));
        }
        monitor.iteration(&Progress {
            stats: &stats,
            eta,
            field: &field,
            previous_gradient: previous.as_deref(),
            record: &record,
        });
    }
    record.last_gradient = previous.clone().unwrap_or_default();
    Ok((field, record))
}

impl Progress<'_> {
    /// Resumable snapshot of this state. `trial` must be the field the run started from.
    pub fn checkpoint(&self, problem: &ControlProblem<'_>, trial: &ControlField) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            fingerprint: problem.fingerprint(trial),
            iteration: self.stats.iteration,
            eta: self.eta,
            field: self.field.clone(),
            previous_gradient: self.previous_gradient.map(|g| g.to_vec()),
            record: self.record.clone(),
        }
    }
}

/// Target label used in reports.
pub fn target_label(kind: TargetKind) -> &'static str {
    match kind {
        TargetKind::Projector => "projector",
        TargetKind::Orientation => "orientation",
        TargetKind::RestrictedOrientation => "restricted_orientation",
    }
}
