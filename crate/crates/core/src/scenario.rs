//! Scenario configuration and batch runs.
//!
//! Configuration is flat TOML; every physical key carries its unit in the name.
//! Values are resolved in this order, later sources winning:
//! scenario defaults, the desk-scale preset (if requested), the file, command-line overrides.
//!
//! ```toml
//! scenario = "photoassociation"
//! De_eV = 5.42
//! tf_ps = 120.0
//! iterations = 100
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{self, aggregate_populations, field_spectrum, spectrum_difference};
use crate::basis::{build_basis, build_basis_cached, MorseParams, RadialGrid, RovibBasis};
use crate::control::{
    tbqcp_run, trial_field, Checkpoint, ControlField, ControlProblem, EtaChoice, Monitor, OptimizationRecord, Progress,
    Scheme, TbqcpConfig,
};
use crate::dynamics::{initial_wavepacket, propagate, Observers, SplitOperator, StateVector, WavepacketParams};
use crate::error::{Error, Result};
use crate::operators::{
    assemble_dipole, build_cos_theta, build_projector, build_restricted_orientation, write_matrix_binary,
    write_matrix_csv, DipoleOperator, DipoleParams, LevelSet, TargetObservable,
};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Rotational orientation from |ν=0, l=0⟩, target cos θ.
    Orientation,
    /// Collision wavepacket, target Σ_l |0 l⟩⟨0 l|.
    Photoassociation,
    /// Collision wavepacket, target Σ_{ν ≤ ν_max, l} |ν l⟩⟨ν l|.
    PhotoassociationBand,
    /// Collision wavepacket, target cos θ restricted to ν = 0.
    Combined,
}

impl ScenarioKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "orientation" => Ok(Self::Orientation),
            "photoassociation" | "pa" => Ok(Self::Photoassociation),
            "photoassociation_band" | "band" => Ok(Self::PhotoassociationBand),
            "combined" => Ok(Self::Combined),
            other => Err(Error::Config(format!(
                "unknown scenario {other:?} (expected orientation, photoassociation, photoassociation_band or combined)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Orientation => "orientation",
            Self::Photoassociation => "photoassociation",
            Self::PhotoassociationBand => "photoassociation_band",
            Self::Combined => "combined",
        }
    }

    pub fn starts_from_collision(self) -> bool {
        self != Self::Orientation
    }
}

/// Flat configuration file. Every key is optional.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Option<ScenarioKind>,

    #[serde(rename = "De_eV")]
    pub de_ev: Option<f64>,
    pub alpha_inv_A: Option<f64>,
    pub re_A: Option<f64>,
    pub box_A: Option<f64>,
    pub mr_amu: Option<f64>,
    pub q_e: Option<f64>,
    pub rd_A: Option<f64>,
    pub l_max: Option<usize>,
    pub n_levels: Option<usize>,
    pub grid_spacing_bohr: Option<f64>,

    pub r0_A: Option<f64>,
    pub width_A: Option<f64>,
    pub collision_energy_cm1: Option<f64>,

    #[serde(rename = "V_MV_per_cm")]
    pub v_mv_per_cm: Option<f64>,
    pub omega_c_cm1: Option<f64>,
    pub tf_ps: Option<f64>,
    pub dt_fs: Option<f64>,

    pub target_nu_max: Option<usize>,
    pub iterations: Option<usize>,
    pub scheme: Option<Scheme>,
    pub eta: Option<f64>,
    pub eta_bracket_lo: Option<i32>,
    pub eta_bracket_hi: Option<i32>,
    pub eta_backoff: Option<f64>,
    pub eta_growth: Option<f64>,
    pub max_backoffs: Option<usize>,
    pub safeguard: Option<f64>,
    pub monotonic_tolerance: Option<f64>,
    pub checkpoint_stride_steps: Option<usize>,
    pub memory_budget_MiB: Option<usize>,

    pub observer_stride_steps: Option<usize>,
    pub snapshot_stride_steps: Option<usize>,
    pub basis_cache_dir: Option<PathBuf>,
    pub dump_operators: Option<bool>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    /// Copy every key set in `other` over `self`.
    pub fn overlay(&mut self, other: &ScenarioConfig) {
        overlay!(self, other;
            scenario, de_ev, alpha_inv_A, re_A, box_A, mr_amu, q_e, rd_A, l_max, n_levels, grid_spacing_bohr,
            r0_A, width_A, collision_energy_cm1, v_mv_per_cm, omega_c_cm1, tf_ps, dt_fs, target_nu_max,
            iterations, scheme, eta, eta_bracket_lo, eta_bracket_hi, eta_backoff, eta_growth, max_backoffs, safeguard,
            monotonic_tolerance, checkpoint_stride_steps, memory_budget_MiB, observer_stride_steps,
            snapshot_stride_steps, basis_cache_dir, dump_operators);
    }

    /// Full-scale defaults of a scenario.
    pub fn defaults(kind: ScenarioKind) -> Self {
        let mut c = Self {
            scenario: Some(kind),
            de_ev: Some(5.42),
            alpha_inv_A: Some(0.445),
            re_A: Some(0.9697),
            box_A: Some(48.0),
            mr_amu: Some(0.94),
            q_e: Some(1.634),
            rd_A: Some(0.6),
            l_max: Some(4),
            n_levels: Some(172),
            grid_spacing_bohr: Some(0.06),
            r0_A: Some(24.0),
            width_A: Some(2.0),
            collision_energy_cm1: Some(300.0),
            v_mv_per_cm: Some(1063.0),
            omega_c_cm1: Some(360.0),
            tf_ps: Some(120.0),
            dt_fs: Some(0.05),
            target_nu_max: Some(0),
            iterations: Some(100),
            scheme: Some(Scheme::Accelerated),
            eta: None,
            eta_bracket_lo: Some(0),
            eta_bracket_hi: Some(13),
            eta_backoff: Some(0.1),
            eta_growth: Some(1.0),
            max_backoffs: Some(40),
            safeguard: Some(1e-4),
            monotonic_tolerance: Some(1e-6),
            checkpoint_stride_steps: Some(10),
            memory_budget_MiB: Some(1024),
            observer_stride_steps: Some(200),
            snapshot_stride_steps: Some(0),
            basis_cache_dir: None,
            dump_operators: Some(false),
        };
        match kind {
            ScenarioKind::Orientation => {
                // Only the lowest vibrational levels take part when starting from |00⟩.
                c.n_levels = Some(8);
                c.tf_ps = Some(1.7);
                c.eta_bracket_lo = Some(-3);
                c.eta_bracket_hi = Some(3);
                c.eta_backoff = Some(0.5);
            }
            ScenarioKind::PhotoassociationBand => c.target_nu_max = Some(9),
            ScenarioKind::Combined => c.iterations = Some(200),
            ScenarioKind::Photoassociation => {}
        }
        c
    }

    /// Reduced parameter set used by the acceptance suite: same physics, smaller box and basis, shorter pulse.
    pub fn desk_scale(kind: ScenarioKind) -> Self {
        let mut c = Self::default();
        match kind {
            ScenarioKind::Orientation => {
                c.n_levels = Some(5);
                c.box_A = Some(6.0);
            }
            _ => {
                c.n_levels = Some(56);
                c.box_A = Some(16.0);
                c.r0_A = Some(10.0);
                c.width_A = Some(1.5);
                c.tf_ps = Some(4.0);
                c.iterations = Some(25);
                // Below 1e6 the first update moves J by less than 1e-12 at this scale.
                c.eta_bracket_lo = Some(6);
            }
        }
        c
    }
}

/// Fully resolved run parameters in atomic units.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub scenario: ScenarioKind,
    pub morse: MorseParams,
    pub reduced_mass: f64,
    pub dipole: DipoleParams,
    pub l_max: usize,
    pub n_levels: usize,
    pub grid_spacing: f64,
    pub wavepacket: WavepacketParams,
    pub amplitude: f64,
    pub omega: f64,
    pub steps: usize,
    pub dt: f64,
    pub target_nu_max: usize,
    pub control: TbqcpConfig,
    pub observer_stride: usize,
    pub snapshot_stride: Option<usize>,
    pub basis_cache_dir: Option<PathBuf>,
    pub dump_operators: bool,
    /// The merged configuration the settings came from.
    pub config: ScenarioConfig,
}

fn need<T: Clone>(v: &Option<T>, key: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Config(format!("missing key {key}")))
}

fn positive(v: f64, key: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("{key} must be positive, got {v}")))
    }
}

impl RunSettings {
    /// Merge defaults, preset, file and overrides, then validate.
    pub fn resolve(file: &ScenarioConfig, overrides: &ScenarioConfig, desk_scale: bool) -> Result<Self> {
        let kind = overrides.scenario.or(file.scenario).ok_or_else(|| {
            Error::Config("no scenario given (set `scenario` in the config or pass --scenario)".into())
        })?;
        let mut c = ScenarioConfig::defaults(kind);
        if desk_scale {
            c.overlay(&ScenarioConfig::desk_scale(kind));
        }
        c.overlay(file);
        c.overlay(overrides);
        c.scenario = Some(kind);
        Self::from_merged(c)
    }

    fn from_merged(c: ScenarioConfig) -> Result<Self> {
        let kind = need(&c.scenario, "scenario")?;
        let morse = MorseParams::new(
            units::ev(positive(need(&c.de_ev, "De_eV")?, "De_eV")?),
            1.0 / units::angstrom(positive(need(&c.alpha_inv_A, "alpha_inv_A")?, "alpha_inv_A")?),
            units::angstrom(need(&c.re_A, "re_A")?),
            units::angstrom(need(&c.box_A, "box_A")?),
        )?;
        let reduced_mass = units::amu(positive(need(&c.mr_amu, "mr_amu")?, "mr_amu")?);
        let dipole = DipoleParams::new(need(&c.q_e, "q_e")?, units::angstrom(need(&c.rd_A, "rd_A")?))?;
        let l_max = need(&c.l_max, "l_max")?;
        let n_levels = need(&c.n_levels, "n_levels")?;
        if n_levels == 0 {
            return Err(Error::Config("n_levels must be at least 1".into()));
        }
        let grid_spacing = positive(need(&c.grid_spacing_bohr, "grid_spacing_bohr")?, "grid_spacing_bohr")?;
        let wavepacket = WavepacketParams::incoming(
            units::angstrom(need(&c.r0_A, "r0_A")?),
            units::angstrom(positive(need(&c.width_A, "width_A")?, "width_A")?),
            units::cm1(positive(need(&c.collision_energy_cm1, "collision_energy_cm1")?, "collision_energy_cm1")?),
            reduced_mass,
        );
        if kind.starts_from_collision() {
            wavepacket.validate(&morse, &dipole)?;
        }
        let amplitude = units::mv_per_cm(need(&c.v_mv_per_cm, "V_MV_per_cm")?);
        if amplitude < 0.0 {
            return Err(Error::Config(format!("V_MV_per_cm must be >= 0, got {amplitude}")));
        }
        let omega = units::wavenumber_to_angular_frequency(positive(need(&c.omega_c_cm1, "omega_c_cm1")?, "omega_c_cm1")?)?;
        let dt = units::fs(positive(need(&c.dt_fs, "dt_fs")?, "dt_fs")?);
        let t_f = units::ps(positive(need(&c.tf_ps, "tf_ps")?, "tf_ps")?);
        let steps = (t_f / dt).round() as usize;
        if steps == 0 || ((steps as f64) * dt - t_f).abs() > 1e-6 * dt {
            return Err(Error::Config(format!("tf_ps = {} is not a whole number of dt_fs steps", c.tf_ps.unwrap_or(0.0))));
        }
        let eta = match c.eta {
            Some(e) => EtaChoice::Fixed(e),
            None => EtaChoice::Bracket { lo: need(&c.eta_bracket_lo, "eta_bracket_lo")?, hi: need(&c.eta_bracket_hi, "eta_bracket_hi")? },
        };
        let control = TbqcpConfig {
            eta,
            n_iterations: need(&c.iterations, "iterations")?,
            scheme: need(&c.scheme, "scheme")?,
            checkpoint_stride: need(&c.checkpoint_stride_steps, "checkpoint_stride_steps")?,
            memory_budget: need(&c.memory_budget_MiB, "memory_budget_MiB")? << 20,
            safeguard: need(&c.safeguard, "safeguard")?,
            monotonic_tolerance: need(&c.monotonic_tolerance, "monotonic_tolerance")?,
            eta_backoff: need(&c.eta_backoff, "eta_backoff")?,
            max_backoffs: need(&c.max_backoffs, "max_backoffs")?,
            eta_growth: need(&c.eta_growth, "eta_growth")?,
            snapshot_iterations: Vec::new(),
        };
        control.validate()?;
        let snapshot = need(&c.snapshot_stride_steps, "snapshot_stride_steps")?;
        Ok(Self {
            scenario: kind,
            morse,
            reduced_mass,
            dipole,
            l_max,
            n_levels,
            grid_spacing,
            wavepacket,
            amplitude,
            omega,
            steps,
            dt,
            target_nu_max: need(&c.target_nu_max, "target_nu_max")?,
            control,
            observer_stride: need(&c.observer_stride_steps, "observer_stride_steps")?.max(1),
            snapshot_stride: (snapshot > 0).then_some(snapshot),
            basis_cache_dir: c.basis_cache_dir.clone(),
            dump_operators: need(&c.dump_operators, "dump_operators")?,
            config: c,
        })
    }

    pub fn t_f(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::with_max_spacing(self.morse.box_length, self.grid_spacing)
    }

    /// Level set S of the target (ν ≤ ν_max, every l).
    pub fn target_levels(&self) -> LevelSet {
        LevelSet::grid(0..=self.target_nu_max, 0..=self.l_max)
    }
}

/// Everything a scenario needs before optimizing.
pub struct Setup {
    pub settings: RunSettings,
    pub basis: RovibBasis,
    pub dipole: DipoleOperator,
    pub cos_theta: TargetObservable,
    pub target: TargetObservable,
    pub propagator: SplitOperator,
    pub initial: StateVector,
    pub trial: ControlField,
}

impl Setup {
    pub fn new(settings: RunSettings) -> Result<Self> {
        let grid = settings.grid()?;
        let basis = match &settings.basis_cache_dir {
            Some(dir) => build_basis_cached(dir, &settings.morse, &grid, settings.l_max, settings.reduced_mass, settings.n_levels)?,
            None => build_basis(&settings.morse, &grid, settings.l_max, settings.reduced_mass, settings.n_levels)?,
        };
        let dipole = assemble_dipole(&basis, &settings.dipole)?;
        let cos_theta = build_cos_theta(&basis)?;
        let target = match settings.scenario {
            ScenarioKind::Orientation => cos_theta.clone(),
            ScenarioKind::Photoassociation | ScenarioKind::PhotoassociationBand => {
                build_projector(&basis, &settings.target_levels())?
            }
            ScenarioKind::Combined => build_restricted_orientation(&basis, &settings.target_levels())?,
        };
        let initial = if settings.scenario.starts_from_collision() {
            initial_wavepacket(&settings.wavepacket, &basis)?.state
        } else {
            StateVector::basis_state(basis.dimension(), 0)
        };
        let propagator = SplitOperator::new(basis.energies(), &dipole, settings.dt)?;
        let trial = trial_field(settings.amplitude, settings.omega, settings.t_f(), settings.dt)?;
        Ok(Self { settings, basis, dipole, cos_theta, target, propagator, initial, trial })
    }

    pub fn problem(&self) -> ControlProblem<'_> {
        ControlProblem { propagator: &self.propagator, initial: &self.initial, target: &self.target }
    }
}

/// Headline numbers of a finished run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: ScenarioKind,
    pub dimension: usize,
    pub target_rank: usize,
    /// Largest eigenvalue of the target operator.
    pub target_ceiling: f64,
    pub j_history: Vec<f64>,
    pub final_j: f64,
    pub final_cos_theta: f64,
    pub final_per_l: Vec<f64>,
    pub final_bound_total: f64,
    /// Bound population in ν ≤ target ν_max, summed over l.
    pub final_band_population: f64,
    /// η of the first iteration (the bracket choice unless η is fixed).
    pub initial_eta: f64,
    /// η of the last iteration.
    pub eta: f64,
    pub backoffs: usize,
}

struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Outputs<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }
}

pub const CHECKPOINT_FILE: &str = "checkpoint.json";

struct CheckpointWriter<'a> {
    problem: ControlProblem<'a>,
    trial: &'a ControlField,
    path: PathBuf,
    error: Option<Error>,
}

impl Monitor for CheckpointWriter<'_> {
    fn iteration(&mut self, p: &Progress<'_>) {
        if self.error.is_none() {
            if let Err(e) = p.checkpoint(&self.problem, self.trial).save(&self.path) {
                self.error = Some(e);
            }
        }
    }
}

/// Run a scenario and write its outputs into `out`.
pub fn run(settings: RunSettings, out: &Path, resume: Option<&Path>) -> Result<RunSummary> {
    let started = Instant::now();
    std::fs::create_dir_all(out)?;
    let resume = resume.map(Checkpoint::load).transpose()?;
    let setup = Setup::new(settings)?;
    let s = &setup.settings;
    let setup_seconds = started.elapsed().as_secs_f64();
    log::info!(
        "{}: N_D = {}, target rank {}, {} steps of {:.4} fs",
        s.scenario.name(),
        setup.basis.dimension(),
        setup.target.rank(),
        s.steps,
        units::convert(s.dt, units::Unit::AtomicTime, units::Unit::Femtosecond)?
    );

    let mut outputs = Outputs { dir: out, files: Vec::new() };
    std::fs::write(outputs.path("config.resolved.toml"), s.config.to_toml_string())?;
    if s.dump_operators {
        write_matrix_csv(&setup.dipole.matrix, &outputs.path("dipole.csv"))?;
        write_matrix_binary(&setup.dipole.matrix, &outputs.path("dipole.bin"))?;
        write_matrix_csv(&setup.target.matrix, &outputs.path("target.csv"))?;
        write_matrix_binary(&setup.target.matrix, &outputs.path("target.bin"))?;
    }

    let problem = setup.problem();
    let mut writer =
        CheckpointWriter { problem, trial: &setup.trial, path: out.join(CHECKPOINT_FILE), error: None };
    let optimize_started = Instant::now();
    let (field, record) = tbqcp_run(&problem, &s.control, &setup.trial, resume, &mut writer)?;
    if let Some(e) = writer.error {
        return Err(e);
    }
    let optimize_seconds = optimize_started.elapsed().as_secs_f64();
    if !record.iterations.is_empty() {
        outputs.files.push(CHECKPOINT_FILE.into());
    }

    analysis::write_history_csv(&record.j_history(), &outputs.path("history.csv"))?;
    analysis::write_field_csv(&setup.trial, &outputs.path("field_trial.csv"))?;
    analysis::write_field_csv(&field, &outputs.path("field_optimized.csv"))?;
    let trial_spectrum = field_spectrum(&setup.trial)?;
    let optimized_spectrum = field_spectrum(&field)?;
    trial_spectrum.write_csv(&outputs.path("spectrum_trial.csv"))?;
    optimized_spectrum.write_csv(&outputs.path("spectrum_optimized.csv"))?;
    spectrum_difference(&trial_spectrum, &optimized_spectrum)?.write_csv(&outputs.path("spectrum_difference.csv"))?;

    let observers = Observers {
        targets: vec![("J_observable".into(), &setup.target), ("cos_theta".into(), &setup.cos_theta)],
        stride: s.observer_stride,
        snapshot_stride: s.snapshot_stride,
    };
    let trajectory = propagate(&setup.propagator, &setup.initial, &field, &observers)?;
    write_populations(&setup.basis, &trajectory, &outputs.path("populations.csv"))?;
    write_observables(&trajectory, &outputs.path("observables.csv"))?;
    let fin = aggregate_populations(&setup.basis, &trajectory.final_state.populations())?;
    write_vibrational(&fin, &outputs.path("final_levels.csv"))?;
    trajectory.final_state.save(&outputs.path("final_state.bin"))?;
    for (i, snap) in trajectory.snapshots.iter().enumerate() {
        snap.save(&outputs.path(&format!("snapshot_{i:05}.bin")))?;
    }

    let final_j = *trajectory.observable("J_observable").and_then(|o| o.last()).unwrap_or(&record.initial_j);
    let summary = RunSummary {
        scenario: s.scenario,
        dimension: setup.basis.dimension(),
        target_rank: setup.target.rank(),
        target_ceiling: setup.target.max_eigenvalue(),
        j_history: record.j_history(),
        final_j,
        final_cos_theta: *trajectory.observable("cos_theta").and_then(|o| o.last()).unwrap_or(&0.0),
        final_per_l: fin.per_l.clone(),
        final_bound_total: fin.bound_total,
        final_band_population: (0..=s.target_nu_max).map(|nu| fin.bound_vibrational(nu)).sum(),
        initial_eta: record.iterations.first().map_or(f64::NAN, |st| st.eta),
        eta: record.iterations.last().map_or(f64::NAN, |st| st.eta),
        backoffs: record.iterations.iter().map(|st| st.backoffs).sum(),
    };
    write_summary(&summary, &outputs.path("summary.json"))?;
    write_manifest(&outputs, &summary, &record, setup_seconds, optimize_seconds, started.elapsed().as_secs_f64())?;
    Ok(summary)
}

/// Population table `time_ps,l0..l4,bound_total,J_observable`.
fn write_populations(basis: &RovibBasis, trajectory: &crate::dynamics::Trajectory, path: &Path) -> Result<()> {
    let mut only_j = trajectory.clone();
    only_j.observable_names.truncate(1);
    only_j.observables.truncate(1);
    analysis::write_population_csv(basis, &only_j, 5, path)
}

fn write_observables(trajectory: &crate::dynamics::Trajectory, path: &Path) -> Result<()> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "time_ps,norm,{}", trajectory.observable_names.join(","))?;
    for (row, &t) in trajectory.times.iter().enumerate() {
        let norm: f64 = trajectory.populations[row].iter().sum();
        let vals: Vec<String> = trajectory.observables.iter().map(|o| format!("{:.10e}", o[row])).collect();
        writeln!(w, "{:.10e},{norm:.15e},{}", units::to_ps(t), vals.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn write_vibrational(s: &analysis::PopulationSummary, path: &Path) -> Result<()> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "nu,l,population")?;
    for (l, levels) in s.bound.iter().enumerate() {
        for (nu, p) in levels.iter().enumerate() {
            writeln!(w, "{nu},{l},{p:.10e}")?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_summary(summary: &RunSummary, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(summary)
        .map_err(|e| Error::Format { path: path.to_path_buf(), reason: e.to_string() })?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Serialize)]
struct Manifest<'a> {
    program: &'static str,
    version: &'static str,
    scenario: &'static str,
    parameters: &'a ScenarioConfig,
    final_j: f64,
    iterations: usize,
    timings_s: BTreeMap<&'static str, f64>,
    iteration_seconds: Vec<f64>,
    files: BTreeMap<String, String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn write_manifest(
    outputs: &Outputs<'_>,
    summary: &RunSummary,
    record: &OptimizationRecord,
    setup_s: f64,
    optimize_s: f64,
    total_s: f64,
) -> Result<()> {
    let parameters = ScenarioConfig::load(&outputs.dir.join("config.resolved.toml"))?;
    let mut files = BTreeMap::new();
    for name in &outputs.files {
        files.insert(name.clone(), sha256_file(&outputs.dir.join(name))?);
    }
    let manifest = Manifest {
        program: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        scenario: summary.scenario.name(),
        parameters: &parameters,
        final_j: summary.final_j,
        iterations: record.iterations.len(),
        timings_s: BTreeMap::from([("setup", setup_s), ("optimize", optimize_s), ("total", total_s)]),
        iteration_seconds: record.iterations.iter().map(|s| s.seconds).collect(),
        files,
    };
    let path = outputs.dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Format { path: path.clone(), reason: e.to_string() })?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_per_scenario() {
        let o = RunSettings::resolve(&ScenarioConfig::default(), &ScenarioConfig { scenario: Some(ScenarioKind::Orientation), ..Default::default() }, false).unwrap();
        assert!((units::to_ps(o.t_f()) - 1.7).abs() < 1e-12);
        let p = RunSettings::resolve(&ScenarioConfig { scenario: Some(ScenarioKind::Combined), ..Default::default() }, &ScenarioConfig::default(), false).unwrap();
        assert!((units::to_ps(p.t_f()) - 120.0).abs() < 1e-9);
        assert_eq!(p.n_levels, 172);
        assert_eq!(p.n_levels * (p.l_max + 1), 860);
        let b = RunSettings::resolve(&ScenarioConfig { scenario: Some(ScenarioKind::PhotoassociationBand), ..Default::default() }, &ScenarioConfig::default(), false).unwrap();
        assert_eq!(b.target_levels().len(), 50);
    }

    #[test]
    fn precedence() {
        let file = ScenarioConfig::from_toml_str("scenario = \"photoassociation\"\nn_levels = 60\niterations = 7\n").unwrap();
        let flags = ScenarioConfig { iterations: Some(3), ..Default::default() };
        let s = RunSettings::resolve(&file, &flags, true).unwrap();
        assert_eq!(s.n_levels, 60);
        assert_eq!(s.control.n_iterations, 3);
        assert!((units::to_ps(s.t_f()) - 4.0).abs() < 1e-12);
        let flags = ScenarioConfig { scenario: Some(ScenarioKind::Orientation), ..Default::default() };
        assert_eq!(RunSettings::resolve(&file, &flags, false).unwrap().scenario, ScenarioKind::Orientation);
    }

    #[test]
    fn config_errors_are_reported() {
        let e = ScenarioConfig::from_toml_str("scenario = \"orientation\"\nDe_ev = 5.42\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("De_ev") && msg.contains("line 2"), "{msg}");
        assert!(ScenarioConfig::from_toml_str("tf_ps = \"long\"").is_err());
        assert!(ScenarioKind::parse("bogus").is_err());
        assert_eq!(ScenarioKind::parse("Photoassociation-Band").unwrap(), ScenarioKind::PhotoassociationBand);
        let bad = ScenarioConfig { scenario: Some(ScenarioKind::Orientation), dt_fs: Some(-1.0), ..Default::default() };
        assert!(RunSettings::resolve(&bad, &ScenarioConfig::default(), false).is_err());
        let odd = ScenarioConfig { scenario: Some(ScenarioKind::Orientation), dt_fs: Some(0.07), ..Default::default() };
        assert!(RunSettings::resolve(&odd, &ScenarioConfig::default(), false).is_err());
        assert!(RunSettings::resolve(&ScenarioConfig::default(), &ScenarioConfig::default(), false).is_err());
    }

    #[test]
    fn wavepacket_inside_well_rejected() {
        let c = ScenarioConfig { scenario: Some(ScenarioKind::Photoassociation), r0_A: Some(2.0), ..Default::default() };
        assert!(RunSettings::resolve(&c, &ScenarioConfig::default(), false).is_err());
        let o = ScenarioConfig { scenario: Some(ScenarioKind::Orientation), r0_A: Some(2.0), ..Default::default() };
        assert!(RunSettings::resolve(&o, &ScenarioConfig::default(), false).is_ok());
    }

    #[test]
    fn resolved_config_round_trips() {
        let s = RunSettings::resolve(&ScenarioConfig { scenario: Some(ScenarioKind::Photoassociation), ..Default::default() }, &ScenarioConfig::default(), true).unwrap();
        let text = s.config.to_toml_string();
        assert!(text.contains("De_eV = 5.42"));
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), s.config);
    }
}
