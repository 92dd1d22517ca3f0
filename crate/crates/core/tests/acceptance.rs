//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so every line is printed even when
//! everything passes. Pass criterion numbers as arguments to run a subset:
//! `cargo test --release --test acceptance -- 1 3 12`.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use faer::Mat;
use polar_orient::analysis::{field_spectrum, power_spectrum, spectrum_difference};
use polar_orient::basis::{solve_radial, MorseParams, RadialGrid};
use polar_orient::control::{
    tbqcp_run, trial_field, ControlField, ControlProblem, EtaChoice, OptimizationRecord, Scheme, TbqcpConfig,
};
use polar_orient::dynamics::{propagate_final, SplitOperator, StateVector};
use polar_orient::operators::{
    angular_coupling, assemble_dipole, radial_matrix_elements, DipoleOperator, DipoleParams, TargetKind,
    TargetObservable,
};
use polar_orient::scenario::{run, RunSettings, RunSummary, ScenarioConfig, ScenarioKind, Setup};
use polar_orient::units::{amu, angstrom, cm1, ev, fs, mv_per_cm, ps, wavenumber_to_angular_frequency};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn morse() -> MorseParams {
    MorseParams::new(ev(5.42), 1.0 / angstrom(0.445), angstrom(0.9697), angstrom(48.0)).unwrap()
}

fn reduced_mass() -> f64 {
    amu(0.94)
}

fn settings(kind: ScenarioKind, desk: bool, tweak: impl FnOnce(&mut ScenarioConfig)) -> RunSettings {
    let mut c = ScenarioConfig { scenario: Some(kind), ..Default::default() };
    tweak(&mut c);
    RunSettings::resolve(&c, &ScenarioConfig::default(), desk).unwrap()
}

/// Cyclic Jacobi eigenvalues of a small dense symmetric matrix.
fn jacobi_eigenvalues(a: &Mat<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn legendre(n: usize, x: f64) -> f64 {
    legendre_with_derivative(n, x).0
}

// 1
fn bound_state_count() -> Outcome {
    let p = morse();
    let grid = RadialGrid::with_max_spacing(p.box_length, 0.06).unwrap();
    let ch = solve_radial(&p, &grid, 0, reduced_mass(), 30).unwrap();
    let negative = ch.energies.iter().filter(|&&e| e < 0.0).count();
    let analytic = p.analytic_bound_count(reduced_mass());
    outcome(
        negative == 22 && ch.bound_count == 22 && analytic == 22,
        format!("{negative} negative eigenvalues for l = 0 (analytic Morse count {analytic})"),
    )
}

// 2
fn morse_spectrum() -> Outcome {
    let p = morse();
    let m = reduced_mass();
    let grid = RadialGrid::with_max_spacing(p.box_length, 0.06).unwrap();
    let coarse = solve_radial(&p, &grid, 0, m, 22).unwrap();
    let fine = solve_radial(&p, &grid.refined(), 0, m, 22).unwrap();
    // Closed form, independent of the library's own helper.
    let omega0 = p.alpha * (2.0 * p.well_depth / m).sqrt();
    let mut worst_analytic = 0.0f64;
    let mut worst_halving = 0.0f64;
    for v in 0..22 {
        let x = omega0 * (v as f64 + 0.5);
        let exact = -p.well_depth + x - x * x / (4.0 * p.well_depth);
        worst_analytic = worst_analytic.max(((fine.energies[v] - exact) / exact).abs());
        worst_halving = worst_halving.max(((fine.energies[v] - coarse.energies[v]) / fine.energies[v]).abs());
    }
    outcome(
        worst_analytic < 1e-6 && worst_halving < 1e-8,
        format!("max rel. deviation from Morse formula {worst_analytic:.2e}; halving spacing shifts levels by {worst_halving:.2e}"),
    )
}

// 3
fn angular_couplings() -> Outcome {
    let nodes = gauss_legendre(40);
    let mut worst_formula = 0.0f64;
    let mut worst_quadrature = 0.0f64;
    for l in 0..=20usize {
        let lf = l as f64;
        let formula = (lf + 1.0) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0)).sqrt();
        // ⟨Y_{l+1}⁰|cos θ|Y_l⁰⟩ = ½√((2l+1)(2l+3)) ∫ P_{l+1}(x) x P_l(x) dx
        let integral: f64 = nodes.iter().map(|&(x, w)| w * legendre(l + 1, x) * x * legendre(l, x)).sum();
        let quadrature = 0.5 * ((2.0 * lf + 1.0) * (2.0 * lf + 3.0)).sqrt() * integral;
        worst_formula = worst_formula.max((angular_coupling(l) - formula).abs());
        worst_quadrature = worst_quadrature.max((angular_coupling(l) - quadrature).abs());
    }
    let p0 = (angular_coupling(0) - 1.0 / 3f64.sqrt()).abs();
    outcome(
        worst_formula < 1e-14 && worst_quadrature < 1e-14 && p0 < 1e-15,
        format!("max |p_l − formula| = {worst_formula:.1e}, vs Gauss–Legendre integral {worst_quadrature:.1e}, |p_0 − 1/√3| = {p0:.1e}"),
    )
}

// 4
fn dipole_structure() -> Outcome {
    let p = morse();
    let m = reduced_mass();
    let grid = RadialGrid::with_max_spacing(p.box_length, 0.06).unwrap();
    let basis = polar_orient::basis::build_basis(&p, &grid, 2, m, 172).unwrap();
    let dp = DipoleParams::new(1.634, angstrom(0.6)).unwrap();
    let d = assemble_dipole(&basis, &dp).unwrap();
    let n = d.dimension();
    let mut symmetric = true;
    let mut selection = true;
    for i in 0..n {
        for j in 0..n {
            symmetric &= d.matrix[(i, j)] == d.matrix[(j, i)];
            if basis.l_of(i).abs_diff(basis.l_of(j)) != 1 {
                selection &= d.matrix[(i, j)] == 0.0;
            }
        }
    }
    let radial = radial_matrix_elements(&basis, |r| polar_orient::operators::dipole_function(&dp, r), 0, 1).unwrap();
    let ch1 = &basis.channels[1];
    let cols: Vec<usize> =
        (ch1.bound_count..basis.n_levels).filter(|&k| (0.0..=cm1(7000.0)).contains(&ch1.energies[k])).collect();
    let peak = |nu: usize| cols.iter().map(|&k| radial[(nu, k)].abs()).fold(0.0, f64::max);
    let (p19, p14, p9, p0) = (peak(19), peak(14), peak(9), peak(0));
    outcome(
        symmetric && selection && p19 > 3.0 * p14 && p9 < 0.01 * p19 && p0 < 0.01 * p19,
        format!(
            "symmetric {symmetric}, |Δl| ≠ 1 blocks zero {selection}; peak couplings to {} l=1 scattering states in [0, 7000] cm⁻¹: ν=19 {p19:.3e}, ν=14 {p14:.3e} (ratio {:.1}), ν=9 {:.1e}·peak, ν=0 {:.1e}·peak",
            cols.len(),
            p19 / p14,
            p9 / p19,
            p0 / p19
        ),
    )
}

// 5
fn propagator_unitarity_and_order() -> Outcome {
    let s = settings(ScenarioKind::Orientation, true, |_| {});
    let setup = Setup::new(s).unwrap();
    let energies = setup.basis.energies();
    let amplitude = mv_per_cm(1063.0);
    let omega = wavenumber_to_angular_frequency(360.0).unwrap();

    // Norm over 10⁶ steps.
    let dt = fs(0.05);
    let steps = 1_000_000;
    let prop = SplitOperator::new(energies.clone(), &setup.dipole, dt).unwrap();
    let long = trial_field(amplitude, omega, steps as f64 * dt, dt).unwrap();
    let fin = propagate_final(&prop, &setup.initial, &long);
    let drift = (1.0 - fin.norm_sqr()).abs();

    // Global error of a 1 ps trial-field run against a fine reference.
    let t_f = ps(1.0);
    let u = |t: f64| polar_orient::control::trial_field_value(t, amplitude, omega, t_f);
    let run_with = |dt: f64| {
        let steps = (t_f / dt).round() as usize;
        let prop = SplitOperator::new(energies.clone(), &setup.dipole, dt).unwrap();
        propagate_final(&prop, &setup.initial, &ControlField::from_fn(steps, dt, u))
    };
    let reference = run_with(fs(0.025) / 8.0);
    let err = |s: &StateVector| {
        s.coefficients.iter().zip(&reference.coefficients).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    };
    let e: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&d| err(&run_with(fs(d)))).collect();
    let r1 = e[0] / e[1];
    let r2 = e[1] / e[2];
    let second_order = |r: f64| (3.5..4.5).contains(&r);
    outcome(
        drift < 1e-9 && second_order(r1) && second_order(r2),
        format!(
            "norm drift {drift:.1e} after 10⁶ steps; errors at Δt = 0.2/0.1/0.05 fs: {:.2e}/{:.2e}/{:.2e}, ratios {r1:.2} and {r2:.2}",
            e[0], e[1], e[2]
        ),
    )
}

fn toy_problem() -> (SplitOperator, StateVector, TargetObservable) {
    let energies = vec![0.0, 0.11, 0.25, 0.42];
    let mu = Mat::from_fn(4, 4, |i, j| match i.abs_diff(j) {
        1 => 0.7 + 0.15 * (i + j) as f64,
        2 => 0.1,
        _ => 0.0,
    });
    let d = DipoleOperator::from_matrix(mu).unwrap();
    let target = Mat::from_fn(4, 4, |i, j| match (i, j) {
        (3, 3) => 1.0,
        (2, 2) => 0.4,
        (2, 3) | (3, 2) => 0.2,
        _ => 0.0,
    });
    (
        SplitOperator::new(energies, &d, 0.4).unwrap(),
        StateVector::basis_state(4, 0),
        TargetObservable::from_matrix(TargetKind::Orientation, target).unwrap(),
    )
}

fn history_is_monotone(h: &[f64], tol: f64) -> (bool, f64) {
    let worst = h.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max);
    (worst <= tol, worst)
}

// 6
fn tbqcp_monotonicity() -> Outcome {
    let mut s = settings(ScenarioKind::Orientation, true, |c| c.iterations = Some(50));
    s.control.scheme = Scheme::FirstOrder;
    let setup = Setup::new(s).unwrap();
    let (_, rec) = tbqcp_run(&setup.problem(), &setup.settings.control, &setup.trial, None, &mut ()).unwrap();
    let h = rec.j_history();
    let (mono, worst) = history_is_monotone(&h, 1e-6);
    let backoffs: usize = rec.iterations.iter().map(|s| s.backoffs).sum();

    // Gradient consistency on a 4-level toy: bumps localized on a few steps.
    let (prop, psi0, target) = toy_problem();
    let problem = ControlProblem { propagator: &prop, initial: &psi0, target: &target };
    let field = ControlField::from_fn(300, 0.4, |t| 0.05 * (0.13 * t).sin() + 0.03 * (0.31 * t).cos());
    let cfg = TbqcpConfig { eta: EtaChoice::Fixed(0.0), n_iterations: 1, ..Default::default() };
    let (_, grad) = tbqcp_run(&problem, &cfg, &field, None, &mut ()).unwrap();
    let f = grad.last_gradient;
    let mut worst_rel = 0.0f64;
    for centre in [20usize, 75, 150, 222, 280] {
        let bump = |i: usize| (-((i as f64 - centre as f64) / 3.0).powi(2)).exp();
        let predicted: f64 = (0..300).map(|i| f[i] * bump(i) * field.dt).sum();
        let h = 1e-5;
        let shifted = |sign: f64| {
            let mut g = field.clone();
            for i in 0..300 {
                g.values[i] += sign * h * bump(i);
            }
            problem.objective(&g)
        };
        let fd = (shifted(1.0) - shifted(-1.0)) / (2.0 * h);
        worst_rel = worst_rel.max((predicted - fd).abs() / fd.abs().max(1e-12));
    }
    outcome(
        mono && worst_rel < 0.01,
        format!(
            "first order, η = {:.1e} from bracket: J {:.4} → {:.4} over 50 iterations, largest drop {worst:.1e} ({backoffs} η reductions); toy gradient vs finite differences: max rel. error {worst_rel:.1e}",
            rec.iterations[0].eta,
            h[0],
            h[h.len() - 1]
        ),
    )
}

struct OrientationRuns {
    /// (l_max, ceiling from the independent eigen-solver, record)
    runs: Vec<(usize, f64, OptimizationRecord)>,
    spectrum_check: Option<(f64, Vec<f64>)>,
}

fn orientation_runs(l_values: &[usize], iterations: usize, keep_spectrum_for: Option<usize>) -> OrientationRuns {
    let mut runs = Vec::new();
    let mut spectrum_check = None;
    for &l in l_values {
        let s = settings(ScenarioKind::Orientation, true, |c| {
            c.l_max = Some(l);
            c.iterations = Some(iterations);
        });
        let setup = Setup::new(s).unwrap();
        let ceiling = *jacobi_eigenvalues(&setup.cos_theta.matrix).last().unwrap();
        let t0 = Instant::now();
        let (field, rec) = tbqcp_run(&setup.problem(), &setup.settings.control, &setup.trial, None, &mut ()).unwrap();
        println!(
            "    l_max = {l}: J = {:.4} after {iterations} iterations (ceiling {ceiling:.5}, {:.0}s)",
            rec.final_j(),
            t0.elapsed().as_secs_f64()
        );
        if keep_spectrum_for == Some(l) {
            let diff = spectrum_difference(&field_spectrum(&setup.trial).unwrap(), &field_spectrum(&field).unwrap()).unwrap();
            let mut bins: Vec<(f64, f64)> = diff.frequencies_cm1.iter().copied().zip(diff.power.iter().copied()).collect();
            bins.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            spectrum_check = Some((diff.frequencies_cm1[1], bins.iter().take(10).map(|b| b.0).collect()));
        }
        runs.push((l, ceiling, rec));
    }
    OrientationRuns { runs, spectrum_check }
}

// 7
fn orientation_ceiling(orient: &OrientationRuns) -> Outcome {
    let extra = orientation_runs(&[5, 6, 7, 8], 20, None);
    let mut ok = true;
    let mut parts = Vec::new();
    for (l, ceiling, rec) in orient.runs.iter().chain(extra.runs.iter()) {
        let top = rec.j_history().into_iter().fold(f64::NEG_INFINITY, f64::max);
        ok &= top <= ceiling + 1e-9;
        parts.push(format!("l_max={l}: max J {top:.4} ≤ {ceiling:.4}"));
    }
    let first = orient.runs.iter().find(|r| r.0 == 1).map(|r| r.1).unwrap_or(f64::NAN);
    ok &= (first - 1.0 / 3f64.sqrt()).abs() < 1e-4;
    outcome(ok, format!("{}; l_max = 1 ceiling {first:.5}", parts.join(", ")))
}

// 8
fn orientation_plateaus(orient: &OrientationRuns) -> Outcome {
    let reference = [0.50, 0.72, 0.82, 0.88];
    let finals: Vec<f64> = orient.runs.iter().map(|r| r.2.final_j()).collect();
    let within = finals.iter().zip(reference).all(|(j, p)| (j - p).abs() <= 0.08);
    let ordered = finals.windows(2).all(|w| w[1] >= w[0]);
    outcome(
        within && ordered,
        format!(
            "final J for l_max = 1..4: {} (reference 0.50/0.72/0.82/0.88 ± 0.08), non-decreasing in l_max: {ordered}",
            finals.iter().map(|j| format!("{j:.3}")).collect::<Vec<_>>().join("/")
        ),
    )
}

fn desk_run(kind: ScenarioKind, dir: &Path, tweak: impl FnOnce(&mut ScenarioConfig)) -> (RunSummary, f64) {
    let s = settings(kind, true, tweak);
    let t0 = Instant::now();
    let summary = run(s, dir, None).unwrap();
    (summary, t0.elapsed().as_secs_f64())
}

fn first_reaching(h: &[f64], level: f64) -> Option<usize> {
    h.iter().position(|&j| j >= level)
}

// 9
fn photoassociation(pa: &RunSummary, seconds: f64) -> Outcome {
    let h = &pa.j_history;
    let reached = first_reaching(h, 0.5);
    let (mono, worst) = history_is_monotone(h, 1e-4);
    outcome(
        reached.is_some_and(|i| i <= 25) && mono,
        format!(
            "desk-scale run of {} iterations (initial η {:.0e}): J at iteration 5/10/15/20/25 = {}; first J ≥ 0.5 at iteration {}; smallest step-to-step change {:+.1e} ({seconds:.0}s)",
            h.len() - 1,
            pa.initial_eta,
            [5, 10, 15, 20, 25].iter().map(|&i| h.get(i).map_or("-".into(), |j| format!("{j:.3}"))).collect::<Vec<_>>().join("/"),
            reached.map_or("never".into(), |i| i.to_string()),
            -worst
        ),
    )
}

// 10
fn partial_orientation(pa: &RunSummary) -> Outcome {
    let c = pa.final_cos_theta;
    outcome(c.abs() > 0.1, format!("final <cos θ> after photoassociation alone = {c:+.4} (sign {})", if c >= 0.0 { "+" } else { "−" }))
}

// 11
fn band_target(pa: &RunSummary, band: &RunSummary) -> Outcome {
    let a = first_reaching(&band.j_history, 0.8);
    let b = first_reaching(&pa.j_history, 0.8);
    let faster = match (a, b) {
        (Some(x), Some(y)) => x <= y,
        (Some(_), None) => true,
        _ => false,
    };
    let show = |v: Option<usize>| v.map_or("not within the run".into(), |i| format!("iteration {i}"));
    outcome(
        faster,
        format!(
            "J ≥ 0.8: band target {} (final {:.3}, initial η {:.0e}), ν = 0 target {} (final {:.3}, initial η {:.0e})",
            show(a),
            band.final_j,
            band.initial_eta,
            show(b),
            pa.final_j,
            pa.initial_eta
        ),
    )
}

// 12
fn spectra(orient: &OrientationRuns) -> Outcome {
    let dt = fs(0.05);
    let field = trial_field(mv_per_cm(1063.0), wavenumber_to_angular_frequency(360.0).unwrap(), ps(1.7), dt).unwrap();
    let s = field_spectrum(&field).unwrap();
    let bin = s.frequencies_cm1[1];
    let peak = s.dominant_frequency();
    let raw = power_spectrum(&field.values, dt).unwrap();
    let (bin_o, top) = orient.spectrum_check.clone().unwrap_or((f64::NAN, vec![]));
    let low = !top.is_empty() && top.iter().all(|&f| f < 1163.0);
    outcome(
        (peak - 360.0).abs() <= bin && raw.power == s.power && low,
        format!(
            "trial peak {peak:.1} cm⁻¹ (bin {bin:.1}); ten largest |ΔP| bins of the l_max = 4 orientation run at {} cm⁻¹ (bin {bin_o:.1})",
            top.iter().map(|f| format!("{f:.0}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

// 13
fn combined(c: &RunSummary, seconds: f64) -> Outcome {
    let band = c.final_band_population;
    let gap = c.target_ceiling - c.final_j;
    outcome(
        band >= 0.95 && gap <= 0.05,
        format!(
            "desk-scale combined run: ν = 0 population {band:.3}, J = {:.4} vs ceiling {:.4} (gap {gap:.3}); per-l {} ({seconds:.0}s)",
            c.final_j,
            c.target_ceiling,
            c.final_per_l.iter().map(|p| format!("{p:.2}")).collect::<Vec<_>>().join("/")
        ),
    )
}

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: usize| args.is_empty() || args.contains(&k);
    let started = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |k: usize, name: &'static str, o: Outcome| {
        println!("[{}] criterion {k:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((k, name, o));
    };

    if wanted(1) {
        report(1, "bound-state count", bound_state_count());
    }
    if wanted(2) {
        report(2, "Morse spectrum", morse_spectrum());
    }
    if wanted(3) {
        report(3, "angular couplings", angular_couplings());
    }
    if wanted(4) {
        report(4, "dipole structure", dipole_structure());
    }
    if wanted(5) {
        report(5, "propagator unitarity and order", propagator_unitarity_and_order());
    }
    if wanted(6) {
        report(6, "TBQCP monotonicity", tbqcp_monotonicity());
    }
    if wanted(7) || wanted(8) || wanted(12) {
        let orient = orientation_runs(&[1, 2, 3, 4], 100, Some(4));
        if wanted(7) {
            report(7, "orientation ceiling", orientation_ceiling(&orient));
        }
        if wanted(8) {
            report(8, "orientation plateaus", orientation_plateaus(&orient));
        }
        if wanted(12) {
            report(12, "spectra", spectra(&orient));
        }
    }
    if wanted(9) || wanted(10) || wanted(11) {
        let dir = tempfile::tempdir().unwrap();
        let (pa, secs) = desk_run(ScenarioKind::Photoassociation, &dir.path().join("pa"), |_| {});
        if wanted(9) {
            report(9, "photoassociation", photoassociation(&pa, secs));
        }
        if wanted(10) {
            report(10, "partial orientation", partial_orientation(&pa));
        }
        if wanted(11) {
            let (band, _) = desk_run(ScenarioKind::PhotoassociationBand, &dir.path().join("band"), |_| {});
            report(11, "band target", band_target(&pa, &band));
        }
    }
    if wanted(13) {
        let dir = tempfile::tempdir().unwrap();
        let (c, secs) = desk_run(ScenarioKind::Combined, dir.path(), |_| {});
        report(13, "combined scenario", combined(&c, secs));
    }

    let failed: Vec<String> = results.iter().filter(|r| !r.2.pass).map(|r| r.0.to_string()).collect();
    println!(
        "acceptance: {} passed, {} failed{} ({:.0}s)",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" (criteria {})", failed.join(", ")) },
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
