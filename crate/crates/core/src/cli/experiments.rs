//! One function per experiment; each fills a [`Report`] with verdicts, results and tables.

use std::time::Instant;

use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::RunConfig;
use super::report::Report;
use crate::center::{from_center, q_sq_of_z_sq, reduced_mass, to_center, z_sq_of_q_sq, TwoBodyReduction};
use crate::dynamics::moeller::{central_support, modulus_deviation, wrap_angle};
use crate::dynamics::{
    build_free_mass, build_interacting_mass, MassOperator, commuting_hamiltonian_demo, difference_norms, intertwining_residual, moeller, phase_shifts_stationary,
    s_matrix_time_dependent, s_phases, square_well_phase, Direction, LimitVerdict, PacketSpec, Potential, RadialChannel, RelativeWavePacket,
};
use crate::error::{Error, Result};
use crate::fourvec::{wigner_rotation, FourVector, LorentzMatrix};
use crate::observables::{
    cross_section_band, cross_section_mc, factorization, flat_top, luminosity, scattering_probability, transverse_overlap, ElasticKernel, Evolution,
    FactorizationConfig, MomentumGaussian, PositionPacket, Region, SamplingBox, TimeWindow,
};
use crate::poincare_rep::{
    closure_table, hermiticity_residual, hermiticity_states, momentum_translate, observer_translate, CenterGrid, CenterWaveFunction, Generator,
    GeneratorSpec, MassFunction, Spin, AnalyticState,
};

/// Wall-clock seconds per stage, kept apart from the deterministic results.
pub type Timings = Vec<(String, f64)>;

pub fn run_experiment(cfg: &RunConfig, report: &mut Report, timings: &mut Timings) -> Result<()> {
    use super::config::Experiment::*;
    match cfg.experiment {
        Kinematics => kinematics(cfg, report, timings),
        RepCheck => rep_check(cfg, report, timings),
        Phaseshift => phaseshift(cfg, report),
        Moeller => moeller_run(cfg, report, timings),
        DemoNogo => demo_nogo(cfg, report),
        Xsection => xsection(cfg, report, timings),
        Luminosity => luminosity_run(cfg, report),
        Factorization => factorization_run(cfg, report, timings),
    }
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumInput {
    pub masses: Vec<f64>,
    /// (E, px, py, pz) per particle.
    pub momenta: Vec<[f64; 4]>,
}

impl MomentumInput {
    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("kinematics.input: cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("kinematics.input: {}: {e}", path.display())))
    }
}

fn random_configuration(rng: &mut ChaCha8Rng, n: usize) -> (Vec<FourVector>, Vec<f64>) {
    let masses: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
    let p = masses
        .iter()
        .map(|&m| FourVector::on_shell(m, Vector3::from_fn(|_, _| rng.random_range(-3.0..3.0))))
        .collect();
    (p, masses)
}

fn random_lorentz(rng: &mut ChaCha8Rng) -> LorentzMatrix {
    let axis = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let angle = rng.random_range(-3.0..3.0);
    let u = Vector3::from_fn(|_, _| rng.random_range(-1.5..1.5));
    LorentzMatrix::rotation(axis, angle) * LorentzMatrix::boost_spatial(&u)
}

/// z² with q²(z²) = q², by bisection on the forward map.
pub fn z_sq_bisection(q_sq: f64, m1: f64, m2: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, 1.0f64);
    while q_sq_of_z_sq(hi, m1, m2)? < q_sq {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q_sq_of_z_sq(mid, m1, m2)? < q_sq {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn kinematics(cfg: &RunConfig, r: &mut Report, timings: &mut Timings) -> Result<()> {
    let k = &cfg.kinematics;
    let mut rng = ChaCha8Rng::seed_from_u64(k.seed);

    if let Some(path) = &k.input {
        r.stage("input decomposition");
        let input = MomentumInput::read(path)?;
        let p: Vec<FourVector> = input.momenta.iter().map(|x| FourVector(*x)).collect();
        let d = to_center(&p, &input.masses)?;
        r.result("input_invariant_mass", d.invariant_mass()?);
        r.result("input_decomposition", &d);
        r.document("decomposition", &d);
        r.below("kinematics.input_constraint_residual", d.constraint_residual(), 1e-10);
    }

    r.stage("round-trip");
    let start = Instant::now();
    let (mut round, mut constraint) = (0.0f64, 0.0f64);
    let mut rows = vec![];
    for i in 0..k.samples {
        let n = 2 + i % 3;
        let (p, m) = random_configuration(&mut rng, n);
        let d = to_center(&p, &m)?;
        let back = from_center(&d)?;
        let scale = p.iter().map(|x| x.euclid_norm()).fold(0.0, f64::max);
        let err = p.iter().zip(&back).map(|(a, b)| (*a - *b).euclid_norm()).fold(0.0, f64::max) / scale;
        round = round.max(err);
        constraint = constraint.max(d.constraint_residual());
        rows.push(vec![n as f64, err, d.constraint_residual()]);
    }
    timings.push(("round_trip".into(), start.elapsed().as_secs_f64()));
    r.below("kinematics.round_trip_relative", round, 1e-10);
    r.below("kinematics.constraint_residual", constraint, 1e-10);
    r.table("round_trip", &["n", "relative_error", "constraint_residual"], rows, false);

    r.stage("covariance");
    let (mut cov, mut cocycle) = (0.0f64, 0.0f64);
    for i in 0..k.covariance_samples {
        let (p, m) = random_configuration(&mut rng, 2 + i % 3);
        let lam = random_lorentz(&mut rng);
        let d = to_center(&p, &m)?;
        let pl: Vec<FourVector> = p.iter().map(|x| lam.apply(x)).collect();
        let dl = to_center(&pl, &m)?;
        let w = wigner_rotation(&lam, &d.u)?;
        let mut err = (dl.u - lam.apply(&d.u)).euclid_norm() / lam.apply(&d.u).euclid_norm();
        let qs = d.q.iter().map(|q| q.euclid_norm()).fold(1.0, f64::max);
        for (a, b) in d.q.iter().zip(&dl.q) {
            err = err.max((b.spatial() - w.apply(&a.spatial())).norm() / qs);
        }
        cov = cov.max(err);
        let lam2 = random_lorentz(&mut rng);
        let lhs = wigner_rotation(&(lam2 * lam), &d.u)?;
        let rhs = wigner_rotation(&lam2, &lam.apply(&d.u))?.compose(&w);
        cocycle = cocycle.max((lhs.0 - rhs.0).abs().max());
    }
    r.below("kinematics.center_covariance", cov, 1e-9);
    r.below("kinematics.wigner_cocycle", cocycle, 1e-10);

    r.stage("two-body mass relation");
    let pairs = [(1.0, 1.0), (1.0, 2.0), (0.5, 3.0), (0.1, 10.0), (938.272, 139.570)];
    let (mut rel, mut inv) = (0.0f64, 0.0f64);
    let mut rows = vec![];
    for (m1, m2) in pairs {
        let mu = reduced_mass(m1, m2);
        for i in 0..k.mass_points {
            // z²/(2μ) from 1e-6 to 1e2 in units of m₁+m₂, log spaced.
            let frac = 10f64.powf(-6.0 + 8.0 * i as f64 / (k.mass_points.max(2) - 1) as f64);
            let z_sq = frac * (m1 + m2) * 2.0 * mu;
            let t = TwoBodyReduction::from_z_sq(z_sq, m1, m2)?;
            let e = t.defining_residual() / t.mass();
            let z_bis = z_sq_bisection(t.q_sq, m1, m2)?;
            let z_exp = z_sq_of_q_sq(t.q_sq, m1, m2)?;
            let e_inv = ((z_bis - z_sq).abs() / z_sq).max((z_exp - z_sq).abs() / z_sq);
            rel = rel.max(e);
            inv = inv.max(e_inv);
            rows.push(vec![m1, m2, z_sq, t.q_sq, e, e_inv]);
        }
    }
    r.below("kinematics.mass_relation_relative", rel, 1e-10);
    r.below("kinematics.inverse_round_trip_relative", inv, 1e-10);
    r.table("mass_relation", &["m1", "m2", "z_sq", "q_sq", "relative_residual", "inverse_error"], rows, true);
    Ok(())
}

fn single_point_grid(u: [f64; 3], r: Vec<f64>) -> CenterGrid {
    let n = r.len();
    CenterGrid { u_axes: [vec![u[0]], vec![u[1]], vec![u[2]]], r_nodes: r, r_weights: vec![1.0; n], u_spacing: [1.0; 3] }
}

fn relative_phase(w: &CenterWaveFunction) -> f64 {
    (w.value(0, 0, 0) / w.value(0, 1, 0)).arg()
}

fn rep_check(cfg: &RunConfig, r: &mut Report, timings: &mut Timings) -> Result<()> {
    let rc = &cfg.rep_check;
    let names = Generator::all();
    let index = |g: &Generator| names.iter().position(|x| x == g).unwrap_or(usize::MAX) as f64;
    for &twice in &rc.spins {
        let spin = Spin { twice };
        r.stage(&format!("closure, spin {twice}/2"));
        let start = Instant::now();
        let table = closure_table(spin, rc.test_functions, rc.seed)?;
        timings.push((format!("closure_spin{twice}"), start.elapsed().as_secs_f64()));
        let residual = table.iter().map(|c| c.residual).fold(0.0, f64::max);
        let stability = table.iter().map(|c| c.stability).fold(0.0, f64::max);
        let irrational = table.iter().filter(|c| !c.rational).count();
        r.below(&format!("closure.spin{twice}.residual"), residual, 1e-8);
        r.below(&format!("closure.spin{twice}.stability"), stability, 1e-8);
        r.below(&format!("closure.spin{twice}.non_rational_constants"), irrational as f64, 0.0);
        r.result(
            &format!("closure_spin{twice}"),
            table.iter().map(|c| format!("[{}, {}] = {}", c.a, c.b, c.expression())).collect::<Vec<_>>(),
        );
        r.table(
            &format!("closure_spin{twice}"),
            &["a", "b", "residual", "stability"],
            table.iter().map(|c| vec![index(&c.a), index(&c.b), c.residual, c.stability]).collect(),
            false,
        );

        r.stage(&format!("hermiticity, spin {twice}/2"));
        let states = hermiticity_states(spin, 2, rc.seed);
        let mut worst: f64 = 0.0;
        for g in Generator::all() {
            worst = worst.max(hermiticity_residual(&GeneratorSpec::new(g, spin)?, &states[0], &states[1])?);
        }
        r.below(&format!("hermiticity.spin{twice}"), worst, 1e-8);
    }

    r.stage("degenerate-representation phases");
    let mut rng = ChaCha8Rng::seed_from_u64(rc.seed);
    let mass = MassFunction { m1: cfg.masses.m1, m2: cfg.masses.m2 };
    let (mut v_change, mut u_error) = (0.0f64, 0.0f64);
    let mut rows = vec![];
    for _ in 0..50 {
        let u = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let radii = vec![rng.random_range(0.2..1.0), rng.random_range(1.2..2.5)];
        let psi = AnalyticState::gaussian(0.5).sample(&single_point_grid(u, radii.clone()), mass);
        let a = FourVector::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let v = observer_translate(&a, &psi)?;
        let t = momentum_translate(&a, &psi)?;
        let dv = wrap_angle(relative_phase(&v) - relative_phase(&psi)).abs();
        let ua = FourVector::velocity(Vector3::from(u)).dot(&a);
        let expected = (mass.eval(radii[0]) - mass.eval(radii[1])) * ua;
        let du = wrap_angle(relative_phase(&t) - relative_phase(&psi) - expected).abs();
        v_change = v_change.max(dv);
        u_error = u_error.max(du);
        rows.push(vec![ua, expected, dv, du]);
    }
    r.below("phases.observer_translation_change", v_change, 1e-12);
    r.below("phases.momentum_translation_error", u_error, 1e-10);
    r.table("translation_phases", &["u_dot_a", "expected_shift", "observer_change", "momentum_error"], rows, false);
    Ok(())
}

fn phaseshift(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let ps = &cfg.phaseshift;
    let grid: Vec<f64> = (0..ps.points).map(|i| ps.z_min + (ps.z_max - ps.z_min) * i as f64 / (ps.points - 1) as f64).collect();
    let mu = reduced_mass(cfg.masses.m1, cfg.masses.m2);
    let mut rows = vec![];
    let mut worst_closed: f64 = 0.0;
    let mut worst_zero: f64 = 0.0;
    for l in 0..=ps.lmax {
        r.stage(&format!("stationary solve, l = {l}"));
        let ch = RadialChannel { l, n: 1, dr: 1.0, m1: cfg.masses.m1, m2: cfg.masses.m2 };
        let t = phase_shifts_stationary(&ch, &cfg.potential, &grid)?;
        for (z, d) in t.z.iter().zip(&t.delta) {
            let mut row = vec![*z, l as f64, *d];
            match cfg.potential {
                Potential::SquareWell { depth, radius } => {
                    let c = square_well_phase(l, *z, mu, depth, radius);
                    let x = (d - c).rem_euclid(std::f64::consts::PI);
                    worst_closed = worst_closed.max(x.min(std::f64::consts::PI - x));
                    row.push(c);
                }
                Potential::Zero => worst_zero = worst_zero.max(d.abs()),
                Potential::Gaussian { .. } => {}
            }
            rows.push(row);
        }
    }
    match cfg.potential {
        Potential::SquareWell { .. } => {
            r.below("phaseshift.closed_form_mod_pi", worst_closed, 1e-6);
            r.table("phase_shifts", &["z", "l", "delta", "closed_form"], rows, true);
        }
        Potential::Zero => {
            r.below("phaseshift.zero_potential_max_abs", worst_zero, 0.0);
            r.table("phase_shifts", &["z", "l", "delta"], rows, true);
        }
        Potential::Gaussian { .. } => r.table("phase_shifts", &["z", "l", "delta"], rows, true),
    }
    Ok(())
}

/// Largest |arg S − 2δ| over the central 90% of the packet's weight, and the compared points.
fn phase_error(ch: &RadialChannel, v: &Potential, free: &MassOperator, psi: &RelativeWavePacket, out: &RelativeWavePacket) -> Result<(f64, Vec<Vec<f64>>)> {
    let pts = central_support(&s_phases(free, psi, out), 0.05, 0.95);
    let z: Vec<f64> = pts.iter().map(|p| p.z).collect();
    let table = phase_shifts_stationary(ch, v, &z)?;
    let mut worst: f64 = 0.0;
    let mut rows = vec![];
    for p in &pts {
        let d = table.interpolate(p.z)?;
        let e = wrap_angle(p.phase - 2.0 * d).abs();
        worst = worst.max(e);
        rows.push(vec![p.z, p.phase, wrap_angle(2.0 * d), e, p.weight]);
    }
    Ok((worst, rows))
}

fn moeller_run(cfg: &RunConfig, r: &mut Report, timings: &mut Timings) -> Result<()> {
    let start = Instant::now();
    let ch = cfg.channel()?;
    let opts = cfg.limit.options();
    r.stage("decompositions");
    let free = build_free_mass(&ch)?;
    let int = build_interacting_mass(&ch, &cfg.potential)?;
    let psi = RelativeWavePacket::gaussian(&free, cfg.packet)?;

    r.stage("moeller limit");
    let run = moeller(&free, &int, &psi, Direction::Past, &opts)?;
    r.below("moeller.last_increment", run.trace.last_increment(), opts.epsilon);
    r.result("moeller_trace", &run.trace);
    r.result("bound_state_overlap", run.bound_overlap);
    r.table("moeller_trace", &["t", "increment"], run.trace.points.iter().map(|p| vec![p.t, p.increment]).collect(), true);

    r.stage("intertwining");
    let inter = intertwining_residual(&free, &int, &psi, Direction::Past, &opts)?;
    r.below("moeller.intertwining_residual", inter, 5e-4);

    r.stage("time-dependent S");
    let s = s_matrix_time_dependent(&free, &int, &psi, &opts)?;
    r.below("smatrix.norm_deviation", (s.norm_ratio - 1.0).abs(), 1e-6);
    r.below("smatrix.last_increment", s.trace.last_increment(), opts.epsilon);
    let pts = s_phases(&free, &psi, &s.state);
    r.result("smatrix_modulus_deviation", modulus_deviation(&central_support(&pts, 0.05, 0.95)));
    timings.push(("moeller_and_s".into(), start.elapsed().as_secs_f64()));

    r.stage("stationary phase comparison");
    let (err, rows) = phase_error(&ch, &cfg.potential, &free, &psi, &s.state)?;
    r.below("smatrix.phase_vs_stationary", err, 1e-3);
    r.table("s_phases", &["z", "arg_s", "two_delta", "abs_error", "weight"], rows, true);
    if cfg.grid.refine {
        // Refinement n/2 → n: the run's own grid is the fine one.
        r.stage("half-resolution grid");
        let start = Instant::now();
        let coarse = RadialChannel::with_radius(ch.l, ch.n / 2, ch.radius(), ch.m1, ch.m2)?;
        let free = build_free_mass(&coarse)?;
        let int = build_interacting_mass(&coarse, &cfg.potential)?;
        let psi = RelativeWavePacket::gaussian(&free, cfg.packet)?;
        let s = s_matrix_time_dependent(&free, &int, &psi, &opts)?;
        let (err_coarse, _) = phase_error(&coarse, &cfg.potential, &free, &psi, &s.state)?;
        timings.push(("half_resolution".into(), start.elapsed().as_secs_f64()));
        r.result("phase_error_half_resolution", err_coarse);
        r.flag("smatrix.refinement_ratio", err_coarse / err >= 2.0, err_coarse / err, 2.0);
    }
    Ok(())
}

fn demo_nogo(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let ch = cfg.channel()?;
    let opts = cfg.limit.options();
    let c = cfg.nogo.shift;
    r.stage("free decomposition");
    let free = build_free_mass(&ch)?;
    let shifted = free.spectral_map(|l| l + c);
    let psi = RelativeWavePacket::gaussian(&free, cfg.packet)?;
    r.stage("commuting limit");
    let (trace, verdict) = commuting_hamiltonian_demo(&free, &shifted, &psi, &opts)?;
    r.result("verdict", verdict);
    r.flag("nogo.verdict_no_limit", verdict == LimitVerdict::NoLimit, trace.last_increment(), opts.epsilon);
    let mut ratio = f64::INFINITY;
    let mut rows = vec![];
    for (p, w) in trace.points.iter().zip(opts.schedule.windows(2)) {
        let scale = (2.0 * (c * (w[1] - w[0]) / 2.0).sin()).abs();
        ratio = ratio.min(p.increment / scale);
        rows.push(vec![p.t, p.increment, scale]);
    }
    r.flag("nogo.increment_over_oscillation", ratio >= 0.5, ratio, 0.5);
    let floor = trace.points.iter().map(|p| p.increment).fold(f64::INFINITY, f64::min);
    r.flag("nogo.increments_never_decay", floor > opts.epsilon, floor, opts.epsilon);
    r.table("nogo_trace", &["t", "increment", "oscillation_scale"], rows, true);

    r.stage("difference norms");
    let int = build_interacting_mass(&ch, &cfg.potential)?;
    let phi = RelativeWavePacket::gaussian(&free, PacketSpec { z0: cfg.packet.z0 * 1.3, ..cfg.packet })?;
    let mut times = vec![0.0];
    times.extend(&opts.schedule);
    let norms = difference_norms(&int, &psi, &phi, &times);
    let n0 = norms[0].1;
    let spread = norms.iter().map(|(_, n)| (n - n0).abs()).fold(0.0, f64::max);
    r.below("nogo.difference_norm_spread", spread, 1e-12);
    r.table("difference_norms", &["t", "norm"], norms.iter().map(|(t, n)| vec![*t, *n]).collect(), true);
    Ok(())
}

/// Central momenta for a fixed target: p₁ at rest, p₂ along x̂, relative momentum z₀.
fn fixed_target(m1: f64, m2: f64, z0: f64) -> [FourVector; 2] {
    FactorizationConfig { m1, m2, z0, ..Default::default() }.central_momenta()
}

fn xsection(cfg: &RunConfig, r: &mut Report, timings: &mut Timings) -> Result<()> {
    let xs = &cfg.xsection;
    let (m1, m2) = (cfg.masses.m1, cfg.masses.m2);
    r.stage("phase-shift tables");
    let zs: Vec<f64> = (0..9).map(|i| xs.z0 * (0.9 + 0.025 * i as f64)).collect();
    let tables = (0..=xs.lmax)
        .map(|l| phase_shifts_stationary(&RadialChannel { l, n: 1, dr: 1.0, m1, m2 }, &cfg.potential, &zs))
        .collect::<Result<Vec<_>>>()?;
    let kernel = ElasticKernel::new(m1, m2, tables)?;
    let region = Region::parse(&xs.region)?;
    let p = fixed_target(m1, m2, xs.z0);

    r.stage("monte carlo");
    let start = Instant::now();
    let est = cross_section_mc(&kernel, p, [m1, m2], &region, xs.samples, xs.seed)?;
    timings.push(("mc".into(), start.elapsed().as_secs_f64()));
    r.result("sigma_mc", est);
    let d = to_center(&p, &[m1, m2])?;
    let s = (p[0] + p[1]).square();
    let oracle = match &region {
        Region::Full => Some(kernel.partial_wave_total(xs.z0)?),
        Region::CenterBand { axis, cos_min, cos_max } => Some(cross_section_band(&kernel, s, d.q[0].spatial(), *axis, *cos_min, *cos_max, 200)?),
        _ => None,
    };
    if let Some(o) = oracle {
        r.result("sigma_oracle", o);
        r.below("xsection.oracle_deviation_sigmas", (est.sigma - o).abs() / est.error.max(1e-300), 3.0);
    }

    r.stage("boosted frame");
    let u = Vector3::new(0.3, xs.boost_rapidity.sinh(), -0.2);
    let lam = LorentzMatrix::rotation(Vector3::new(1.0, 1.0, 1.0), 0.7) * LorentzMatrix::boost_spatial(&u);
    let pb = [lam.apply(&p[0]), lam.apply(&p[1])];
    let boosted = cross_section_mc(&kernel, pb, [m1, m2], &region.clone().boosted(lam), xs.samples, xs.seed.wrapping_add(1))?;
    r.result("sigma_boosted", boosted);
    let comb = (est.error.powi(2) + boosted.error.powi(2)).sqrt();
    r.below("xsection.boost_deviation_sigmas", (est.sigma - boosted.sigma).abs() / comb.max(1e-300), 3.0);
    let deltas = kernel.phase_shifts(xs.z0)?;
    r.table(
        "partial_waves",
        &["l", "delta", "sin2_delta"],
        deltas.iter().enumerate().map(|(l, d)| vec![l as f64, *d, d.sin().powi(2)]).collect(),
        false,
    );
    Ok(())
}

fn luminosity_run(cfg: &RunConfig, r: &mut Report) -> Result<()> {
    let lu = &cfg.luminosity;
    let (m1, m2) = (cfg.masses.m1, cfg.masses.m2);
    let grid = SamplingBox::new([0.0; 3], lu.r#box, lu.spacing)?;
    let window = TimeWindow::symmetric(lu.window, lu.time_step);
    let gamma = 1.0 / (1.0 - lu.speed * lu.speed).sqrt();
    let p1 = FourVector::new(m1, 0.0, 0.0, 0.0);
    let p2 = FourVector::on_shell(m2, Vector3::new(m2 * gamma * lu.speed, 0.0, 0.0));
    let target = MomentumGaussian::new(m1, Vector3::zeros(), 0.5 / lu.target_width);

    r.stage("fixed-target gaussians");
    let beam_g = MomentumGaussian::new(m2, p2.spatial(), 0.5 / lu.target_width).translated(Vector3::new(0.0, 0.5 * lu.target_width, 0.0));
    let t_rigid = PositionPacket::from_momentum(&target, grid, Evolution::Rigid)?;
    let b_rigid = PositionPacket::from_momentum(&beam_g, grid, Evolution::Rigid)?;
    let l_rigid = luminosity(&t_rigid, &b_rigid, &p1, &p2, &window)?;
    let oracle = transverse_overlap(&t_rigid, &b_rigid, 0.0)?;
    r.result("gaussian_luminosity", l_rigid.value);
    r.result("gaussian_reduction", oracle);
    r.below("luminosity.fixed_target_relative", (l_rigid.value - oracle).abs() / oracle, 1e-4);
    r.table("overlap_rate", &["t", "rate"], l_rigid.rate.iter().map(|(t, x)| vec![*t, *x]).collect(), true);
    let t_free = PositionPacket::from_momentum(&target, grid, Evolution::Free)?;
    let b_free = PositionPacket::from_momentum(&beam_g, grid, Evolution::Free)?;
    // Informational: with exact dispersion the packets may outgrow the box before the window closes.
    match luminosity(&t_free, &b_free, &p1, &p2, &window) {
        Ok(l_free) => {
            r.result("gaussian_luminosity_with_spreading", l_free.value);
            r.result("spreading_relative_difference", (l_free.value - l_rigid.value) / l_rigid.value);
        }
        Err(e) => r.result("spreading_relative_difference", format!("not resolved: {e}")),
    }
    r.result("quadrature_error", l_rigid.quadrature_error);

    r.stage("flat-top beam");
    let (w, e, bl) = (lu.beam_width, lu.beam_edge, lu.beam_length);
    let beam = PositionPacket::from_position(grid, m2, p2.spatial(), Evolution::Rigid, |x| {
        let rho = (-x[0] * x[0] / (2.0 * bl * bl)).exp() * flat_top(x[1], w, e) * flat_top(x[2], w, e);
        C64::new(rho.sqrt(), 0.0)
    })?;
    let l_flat = luminosity(&t_rigid, &beam, &p1, &p2, &window)?;
    let area = w * w;
    r.result("flat_top_luminosity", l_flat.value);
    r.result("inverse_area", 1.0 / area);
    r.below("luminosity.flat_top_relative", (l_flat.value * area - 1.0).abs(), 1e-2);
    let prob = scattering_probability(lu.cross_section, l_flat.value);
    r.result("scattering_probability", prob);
    r.below("luminosity.probability_vs_sigma_over_area", (prob.w * area / lu.cross_section.max(f64::MIN_POSITIVE) - 1.0).abs(), 1e-2);
    Ok(())
}

fn factorization_run(cfg: &RunConfig, r: &mut Report, timings: &mut Timings) -> Result<()> {
    let fr = &cfg.factorization;
    let mut ratios = fr.width_ratios.clone();
    ratios.sort_by(|a, b| b.total_cmp(a));
    let mut rows = vec![];
    let mut errors = vec![];
    for &w in &ratios {
        r.stage(&format!("factorization at width ratio {w}"));
        let c = FactorizationConfig { width_ratio: w, m1: cfg.masses.m1, m2: cfg.masses.m2, potential: cfg.potential, ..fr.base.clone() };
        let start = Instant::now();
        let res = factorization(&c)?;
        timings.push((format!("factorization_{w}"), start.elapsed().as_secs_f64()));
        errors.push((res.ratio - 1.0).abs());
        rows.push(vec![w, res.w, res.w_error, res.sigma, res.luminosity.value, res.luminosity.quadrature_error, res.sigma_l, res.ratio, res.ratio_error]);
        r.result(&format!("width_{w}"), &res);
    }
    r.below("factorization.first_ratio_deviation", errors[0], 0.1);
    let monotone = errors.windows(2).all(|e| e[1] < e[0]);
    let worst_step = errors.windows(2).map(|e| e[1] / e[0]).fold(0.0, f64::max);
    r.flag("factorization.strictly_decreasing_error", monotone, worst_step, 1.0);
    r.table("factorization", &["width_ratio", "w", "w_error", "sigma", "luminosity", "luminosity_error", "sigma_l", "ratio", "ratio_error"], rows, true);
    Ok(())
}
