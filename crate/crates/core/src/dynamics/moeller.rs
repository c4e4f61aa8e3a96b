//! Numerical Moeller operators, the time-dependent S-matrix and the no-limit demonstrations.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::mass::MassOperator;
use super::packet::{distance, edge_amplitude, norm, RelativeWavePacket};
use crate::error::{Error, Result};

pub const EPS_OMEGA: f64 = 1e-4;
pub const EDGE_FRACTION: f64 = 0.05;
pub const EDGE_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// t → −∞, the in-asymptote (Ω₋).
    Past,
    /// t → +∞, the out-asymptote (Ω₊).
    Future,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Past => -1.0,
            Direction::Future => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub increment: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub points: Vec<TracePoint>,
    pub converged: bool,
}

impl ConvergenceTrace {
    fn from_states(times: &[f64], states: &[Vec<C64>], eps: f64) -> Self {
        let points: Vec<TracePoint> = times
            .windows(2)
            .zip(states.windows(2))
            .map(|(t, s)| TracePoint { t: t[0], increment: distance(&s[1], &s[0]) })
            .collect();
        let converged = points.last().is_some_and(|p| p.increment < eps);
        ConvergenceTrace { points, converged }
    }

    pub fn last_increment(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.increment)
    }
}

/// Controls for the limit t → ±∞.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitOptions {
    /// Increasing positive times, typically doubling.
    pub schedule: Vec<f64>,
    pub epsilon: f64,
    pub edge_fraction: f64,
    pub edge_threshold: f64,
    /// u⁰: evolution by H = u⁰M at times t/u⁰.
    pub scale: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            schedule: doubling_schedule(2.0, 5),
            epsilon: EPS_OMEGA,
            edge_fraction: EDGE_FRACTION,
            edge_threshold: EDGE_THRESHOLD,
            scale: 1.0,
        }
    }
}

impl LimitOptions {
    pub fn validate(&self) -> Result<()> {
        if self.schedule.len() < 2 {
            return Err(Error::Config("schedule needs at least two times".into()));
        }
        if self.schedule.windows(2).any(|w| !(w[1] > w[0])) || self.schedule[0] <= 0.0 {
            return Err(Error::Config("schedule must be positive and increasing".into()));
        }
        if !(self.scale >= 1.0) {
            return Err(Error::Config(format!("u0 scale must be >= 1, got {}", self.scale)));
        }
        Ok(())
    }

    fn check_edge(&self, state: &[C64], t: f64) -> Result<()> {
        let a = edge_amplitude(state, self.edge_fraction);
        if a > self.edge_threshold {
            return Err(Error::Reflection { t, amplitude: a });
        }
        Ok(())
    }
}

/// t₀, 2t₀, …, 2^{count−1}t₀
pub fn doubling_schedule(t0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| t0 * 2f64.powi(k as i32)).collect()
}

#[derive(Clone, Debug)]
pub struct MoellerRun {
    pub state: RelativeWavePacket,
    pub trace: ConvergenceTrace,
    /// Norm of the component removed by the bound-state projection.
    pub bound_overlap: f64,
    /// Ω(t)Ψ at every scheduled time.
    pub history: Vec<Vec<C64>>,
}

/// Removes the components along eigenvectors of `op` below threshold; returns the removed norm.
pub fn project_scattering(op: &MassOperator, psi: &[C64]) -> (Vec<C64>, f64) {
    let bound = op.bound_states();
    if bound.is_empty() {
        return (psi.to_vec(), 0.0);
    }
    let mut out = psi.to_vec();
    let mut removed = 0.0;
    for a in bound {
        let e = op.eigenvector(a);
        let c: C64 = e.iter().zip(psi).map(|(v, p)| p * v).sum();
        removed += c.norm_sqr();
        for (o, v) in out.iter_mut().zip(e) {
            *o -= c * v;
        }
    }
    (out, removed.sqrt())
}

/// Ω(t)Ψ = e^{iH′t}e^{−iHt}Ψ over the schedule, t → ±∞ according to `direction`.
pub fn moeller(free: &MassOperator, int: &MassOperator, psi: &RelativeWavePacket, direction: Direction, opts: &LimitOptions) -> Result<MoellerRun> {
    opts.validate()?;
    let (input, bound_overlap) = project_scattering(int, &psi.amplitudes);
    let sign = direction.sign();
    let s = opts.scale;
    let c_free = free.coefficients(&input);
    let mut history = Vec::with_capacity(opts.schedule.len());
    for &t in &opts.schedule {
        let ts = sign * t / s;
        let mut c = c_free.clone();
        free.phase_coefficients(&mut c, ts, s);
        let out_free = free.synthesize(&c);
        opts.check_edge(&out_free, sign * t)?;
        let mut ci = int.coefficients(&out_free);
        int.phase_coefficients(&mut ci, -ts, s);
        history.push(int.synthesize(&ci));
    }
    // Intermediate interacting states may carry fast lattice transients from the
    // potential's edge; only the free asymptote and the final state are checked.
    let last = *opts.schedule.last().expect("schedule is non-empty");
    opts.check_edge(history.last().expect("schedule is non-empty"), sign * last)?;
    let trace = ConvergenceTrace::from_states(&opts.schedule, &history, opts.epsilon);
    let state = psi.with_amplitudes(history.last().expect("schedule is non-empty").clone());
    Ok(MoellerRun { state, trace, bound_overlap, history })
}

/// ‖M′Ω(t)Ψ − Ω(t)MΨ‖ at the largest scheduled time.
pub fn intertwining_residual(free: &MassOperator, int: &MassOperator, psi: &RelativeWavePacket, direction: Direction, opts: &LimitOptions) -> Result<f64> {
    let omega = moeller(free, int, psi, direction, opts)?;
    let m_psi = psi.with_amplitudes(free.apply(&psi.amplitudes));
    let lim_opts = LimitOptions { edge_threshold: f64::INFINITY, ..opts.clone() };
    let omega_m = moeller(free, int, &m_psi, direction, &lim_opts)?;
    let lhs = int.apply(&omega.state.amplitudes);
    Ok(distance(&lhs, &omega_m.state.amplitudes))
}

#[derive(Clone, Debug)]
pub struct SMatrixRun {
    pub state: RelativeWavePacket,
    pub trace: ConvergenceTrace,
    pub norm_ratio: f64,
    pub bound_overlap: f64,
}

/// Ψ_out = lim e^{iMt}e^{−iM′2t}e^{iMt}Ψ_in over the schedule.
pub fn s_matrix_time_dependent(free: &MassOperator, int: &MassOperator, psi_in: &RelativeWavePacket, opts: &LimitOptions) -> Result<SMatrixRun> {
    opts.validate()?;
    let s = opts.scale;
    let c_in = free.coefficients(&psi_in.amplitudes);
    let mut history = Vec::with_capacity(opts.schedule.len());
    let mut bound_overlap: f64 = 0.0;
    let last = *opts.schedule.last().expect("schedule is non-empty");
    for &t in &opts.schedule {
        let ts = t / s;
        let mut c = c_in.clone();
        free.phase_coefficients(&mut c, -ts, s);
        let past = free.synthesize(&c);
        opts.check_edge(&past, -t)?;
        let (past, removed) = project_scattering(int, &past);
        bound_overlap = bound_overlap.max(removed);
        let mut ci = int.coefficients(&past);
        int.phase_coefficients(&mut ci, 2.0 * ts, s);
        let future = int.synthesize(&ci);
        if t == last {
            opts.check_edge(&future, t)?;
        }
        let mut co = free.coefficients(&future);
        free.phase_coefficients(&mut co, -ts, s);
        history.push(co);
    }
    let trace = ConvergenceTrace::from_states(&opts.schedule, &history, opts.epsilon);
    let out = free.synthesize(history.last().expect("schedule is non-empty"));
    let norm_ratio = norm(&out) / psi_in.norm();
    Ok(SMatrixRun { state: psi_in.with_amplitudes(out), trace, norm_ratio, bound_overlap })
}

/// Per-eigenvalue comparison of Ψ_out against Ψ_in in the free eigenbasis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SPhasePoint {
    pub z: f64,
    /// arg(c_out/c_in) in (−π, π]
    pub phase: f64,
    /// |c_in|²
    pub weight: f64,
    pub modulus_in: f64,
    pub modulus_out: f64,
}

pub fn s_phases(free: &MassOperator, psi_in: &RelativeWavePacket, psi_out: &RelativeWavePacket) -> Vec<SPhasePoint> {
    let cin = free.coefficients(&psi_in.amplitudes);
    let cout = free.coefficients(&psi_out.amplitudes);
    free.momenta()
        .into_iter()
        .zip(cin.iter().zip(&cout))
        .map(|(z, (a, b))| SPhasePoint { z, phase: (b / a).arg(), weight: a.norm_sqr(), modulus_in: a.norm(), modulus_out: b.norm() })
        .collect()
}

/// Points whose cumulative weight (ordered by z) lies within [lo, hi].
pub fn central_support(points: &[SPhasePoint], lo: f64, hi: f64) -> Vec<SPhasePoint> {
    let total: f64 = points.iter().map(|p| p.weight).sum();
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.z.total_cmp(&b.z));
    let mut acc = 0.0;
    let mut out = Vec::new();
    for p in sorted {
        let before = acc / total;
        acc += p.weight;
        let after = acc / total;
        if after >= lo && before <= hi {
            out.push(p);
        }
    }
    out
}

/// max_a ||c_out| − |c_in|| / max_a |c_in|
pub fn modulus_deviation(points: &[SPhasePoint]) -> f64 {
    let peak = points.iter().map(|p| p.modulus_in).fold(0.0, f64::max);
    points.iter().map(|p| (p.modulus_out - p.modulus_in).abs()).fold(0.0, f64::max) / peak
}

/// Wraps an angle to (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let y = x.rem_euclid(tau);
    if y > std::f64::consts::PI {
        y - tau
    } else {
        y
    }
}

/// Verdict for the commuting-operator demonstration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitVerdict {
    Converged,
    NoLimit,
}

/// Ω(t) = e^{iM′t}e^{−iMt} for M′ = f(M) commuting with M, evaluated spectrally.
/// Returns the trace and the verdict: "no limit" when every increment over the
/// second half of the schedule stays above ε.
pub fn commuting_hamiltonian_demo(free: &MassOperator, shifted: &MassOperator, psi: &RelativeWavePacket, opts: &LimitOptions) -> Result<(ConvergenceTrace, LimitVerdict)> {
    opts.validate()?;
    if shifted.dim() != free.dim() {
        return Err(Error::Config("operators live on different grids".into()));
    }
    let c = free.coefficients(&psi.amplitudes);
    let history: Vec<Vec<C64>> = opts
        .schedule
        .iter()
        .map(|&t| {
            c.iter()
                .zip(free.eigenvalues().iter().zip(shifted.eigenvalues()))
                .map(|(ca, (l, lp))| ca * C64::from_polar(1.0, (lp - l) * t))
                .collect()
        })
        .collect();
    let trace = ConvergenceTrace::from_states(&opts.schedule, &history, opts.epsilon);
    let half = trace.points.len() / 2;
    let verdict = if trace.points[half..].iter().all(|p| p.increment > opts.epsilon) {
        LimitVerdict::NoLimit
    } else if trace.converged {
        LimitVerdict::Converged
    } else {
        LimitVerdict::NoLimit
    };
    Ok((trace, verdict))
}

/// ‖U′(t)(Ψ−Φ)‖ at every scheduled time.
pub fn difference_norms(op: &MassOperator, psi: &RelativeWavePacket, phi: &RelativeWavePacket, times: &[f64]) -> Vec<(f64, f64)> {
    let diff: Vec<C64> = psi.amplitudes.iter().zip(&phi.amplitudes).map(|(a, b)| a - b).collect();
    times.iter().map(|&t| (t, norm(&op.propagate(&diff, t, 1.0)))).collect()
}
