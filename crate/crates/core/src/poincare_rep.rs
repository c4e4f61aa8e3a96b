//! Generator action on center wave functions Ψ(u,r), numerical closure of the
//! resulting algebra, and the observer (degenerate) translations.

use std::fmt;

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::center::reduced_mass;
use crate::error::{Error, Result};
use crate::fourvec::FourVector;
use crate::jet::{aberration_jet, gamma_jet, Jet};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Fit residual above which the algebra is declared not to close.
pub const CLOSURE_FAIL: f64 = 1e-6;
/// Required agreement of structure constants across test functions.
pub const STABILITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Spin {
    /// 2s
    pub twice: u32,
}

impl Spin {
    pub const ZERO: Spin = Spin { twice: 0 };
    pub const HALF: Spin = Spin { twice: 1 };

    pub fn multiplicity(&self) -> usize {
        self.twice as usize + 1
    }

    /// Standard spin matrices S_x, S_y, S_z in the |s, m⟩ basis, m descending.
    pub fn matrices(&self) -> [DMatrix<C64>; 3] {
        let d = self.multiplicity();
        let s = self.twice as f64 / 2.0;
        let mut sz = DMatrix::zeros(d, d);
        let mut sp = DMatrix::<C64>::zeros(d, d);
        for k in 0..d {
            let m = s - k as f64;
            sz[(k, k)] = C64::new(m, 0.0);
            if k > 0 {
                // S+ |m⟩ = √(s(s+1) − m(m+1)) |m+1⟩
                sp[(k - 1, k)] = C64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
            }
        }
        let sm = sp.adjoint();
        let sx = (&sp + &sm) * C64::new(0.5, 0.0);
        let sy = (&sp - &sm) * C64::new(0.0, -0.5);
        [sx, sy, sz]
    }

    /// Γ_ij = −i ε_ijk S_k for spatial indices 1..=3.
    pub fn gamma(&self, i: usize, j: usize) -> DMatrix<C64> {
        let s = self.matrices();
        let d = self.multiplicity();
        let mut out = DMatrix::zeros(d, d);
        for k in 1..=3 {
            let e = levi_civita(i, j, k);
            if e != 0.0 {
                out += &s[k - 1] * C64::new(0.0, -e);
            }
        }
        out
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
        _ => 0.0,
    }
}

/// M(r) = m₁ + m₂ + r²/(2μ) for one invariant argument r = |z⃗|.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MassFunction {
    pub m1: f64,
    pub m2: f64,
}

impl MassFunction {
    pub fn eval(&self, r: f64) -> f64 {
        self.m1 + self.m2 + r * r / (2.0 * reduced_mass(self.m1, self.m2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Generator {
    /// P^m, m = 0..=3
    Momentum(usize),
    /// M_ij, 1 ≤ i < j ≤ 3
    Rotation(usize, usize),
    /// M_0i, i = 1..=3
    Boost(usize),
    /// U^m, m = 0..=3
    Velocity(usize),
    /// M
    Mass,
}

impl Generator {
    /// The fifteen generators in a fixed order.
    pub fn all() -> Vec<Generator> {
        let mut g = Vec::with_capacity(15);
        g.extend((0..4).map(Generator::Momentum));
        g.extend([(1, 2), (1, 3), (2, 3)].map(|(i, j)| Generator::Rotation(i, j)));
        g.extend((1..4).map(Generator::Boost));
        g.extend((0..4).map(Generator::Velocity));
        g.push(Generator::Mass);
        g
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Generator::Momentum(m) | Generator::Velocity(m) => m < 4,
            Generator::Rotation(i, j) => (1..=3).contains(&i) && i < j && j <= 3,
            Generator::Boost(i) => (1..=3).contains(&i),
            Generator::Mass => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnsupportedGenerator(self.to_string()))
        }
    }

    pub fn parse(s: &str) -> Result<Generator> {
        let bad = || Error::UnsupportedGenerator(s.to_string());
        let digits: Vec<usize> = s.chars().skip(1).map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad)).collect::<Result<_>>()?;
        let g = match (s.chars().next(), digits.as_slice()) {
            (Some('M'), []) => Generator::Mass,
            (Some('P'), [m]) => Generator::Momentum(*m),
            (Some('U'), [m]) => Generator::Velocity(*m),
            (Some('M'), [0, i]) => Generator::Boost(*i),
            (Some('M'), [i, j]) => Generator::Rotation(*i, *j),
            _ => return Err(bad()),
        };
        g.validate()?;
        Ok(g)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Momentum(m) => write!(f, "P{m}"),
            Generator::Rotation(i, j) => write!(f, "M{i}{j}"),
            Generator::Boost(i) => write!(f, "M0{i}"),
            Generator::Velocity(m) => write!(f, "U{m}"),
            Generator::Mass => write!(f, "M"),
        }
    }
}

/// Generator kind together with the spin matrices it uses.
#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    pub kind: Generator,
    pub spin: Spin,
    gammas: [[DMatrix<C64>; 3]; 3],
}

impl GeneratorSpec {
    pub fn new(kind: Generator, spin: Spin) -> Result<Self> {
        kind.validate()?;
        let gammas = std::array::from_fn(|a| std::array::from_fn(|b| spin.gamma(a + 1, b + 1)));
        Ok(GeneratorSpec { kind, spin, gammas })
    }

    /// Γ_ij with spatial indices 1..=3.
    pub fn gamma(&self, i: usize, j: usize) -> &DMatrix<C64> {
        &self.gammas[i - 1][j - 1]
    }
}

/// Sample nodes: a box of u⃗ values times a list of invariant arguments r.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterGrid {
    pub u_axes: [Vec<f64>; 3],
    pub r_nodes: Vec<f64>,
    /// Quadrature weights per node along r.
    pub r_weights: Vec<f64>,
    /// Uniform spacing along each u axis, if the axis is uniform (used for trapezoid weights).
    pub u_spacing: [f64; 3],
}

impl CenterGrid {
    /// Uniform box [−h, h]³ with `n` nodes per axis.
    pub fn uniform(half_width: f64, n: usize, r_nodes: Vec<f64>) -> Self {
        let step = if n > 1 { 2.0 * half_width / (n - 1) as f64 } else { 0.0 };
        let axis: Vec<f64> = (0..n).map(|k| -half_width + step * k as f64).collect();
        let r_weights = vec![1.0; r_nodes.len()];
        CenterGrid { u_axes: [axis.clone(), axis.clone(), axis], r_nodes, r_weights, u_spacing: [step; 3] }
    }

    pub fn u_count(&self) -> usize {
        self.u_axes.iter().map(|a| a.len()).product()
    }

    pub fn u_point(&self, index: usize) -> [f64; 3] {
        let n1 = self.u_axes[1].len();
        let n2 = self.u_axes[2].len();
        let (a, rest) = (index / (n1 * n2), index % (n1 * n2));
        [self.u_axes[0][a], self.u_axes[1][rest / n2], self.u_axes[2][rest % n2]]
    }

    /// Trapezoid weight of a u node for the invariant measure d³u/u⁰.
    fn u_weight(&self, index: usize) -> f64 {
        let n1 = self.u_axes[1].len();
        let n2 = self.u_axes[2].len();
        let idx = [index / (n1 * n2), (index % (n1 * n2)) / n2, index % n2];
        let mut w = 1.0;
        for ax in 0..3 {
            let n = self.u_axes[ax].len();
            let edge = idx[ax] == 0 || idx[ax] + 1 == n;
            w *= self.u_spacing[ax] * if edge && n > 1 { 0.5 } else { 1.0 };
        }
        let u = self.u_point(index);
        w / (1.0 + u.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }
}

/// Sampled wave function; every node carries one jet per spin component.
#[derive(Clone, Debug)]
pub struct CenterWaveFunction {
    pub grid: CenterGrid,
    pub spin: Spin,
    pub mass: MassFunction,
    /// Layout: [u node][r node][spin component].
    pub jets: Vec<Jet>,
}

impl CenterWaveFunction {
    fn index(&self, iu: usize, ir: usize, s: usize) -> usize {
        (iu * self.grid.r_nodes.len() + ir) * self.spin.multiplicity() + s
    }

    pub fn values(&self) -> Vec<C64> {
        self.jets.iter().map(|j| j.v).collect()
    }

    pub fn value(&self, iu: usize, ir: usize, s: usize) -> C64 {
        self.jets[self.index(iu, ir, s)].v
    }

    /// Σ |ψ|² over nodes, without quadrature weights.
    pub fn node_norm(&self) -> f64 {
        self.jets.iter().map(|j| j.v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨φ,ψ⟩ = ∫ d³u/u⁰ dr Σ_s φ̄ ψ under trapezoid quadrature.
    pub fn inner(&self, other: &CenterWaveFunction) -> C64 {
        let nr = self.grid.r_nodes.len();
        let d = self.spin.multiplicity();
        let mut acc = C64::new(0.0, 0.0);
        for iu in 0..self.grid.u_count() {
            let wu = self.grid.u_weight(iu);
            for ir in 0..nr {
                let w = wu * self.grid.r_weights[ir];
                for s in 0..d {
                    let k = self.index(iu, ir, s);
                    acc += self.jets[k].v.conj() * other.jets[k].v * w;
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }

    fn map_nodes(&self, f: impl Fn([f64; 3], f64, &[Jet]) -> Result<Vec<Jet>>) -> Result<CenterWaveFunction> {
        let nr = self.grid.r_nodes.len();
        let d = self.spin.multiplicity();
        let mut jets = Vec::with_capacity(self.jets.len());
        for iu in 0..self.grid.u_count() {
            let u = self.grid.u_point(iu);
            for ir in 0..nr {
                let k = self.index(iu, ir, 0);
                jets.extend(f(u, self.grid.r_nodes[ir], &self.jets[k..k + d])?);
            }
        }
        Ok(CenterWaveFunction { grid: self.grid.clone(), spin: self.spin, mass: self.mass, jets })
    }

    pub fn combine(&self, other: &CenterWaveFunction, a: C64, b: C64) -> CenterWaveFunction {
        let jets = self.jets.iter().zip(&other.jets).map(|(x, y)| x.scale(a) + y.scale(b)).collect();
        CenterWaveFunction { grid: self.grid.clone(), spin: self.spin, mass: self.mass, jets }
    }
}

fn velocity_jet(m: usize, u: [f64; 3]) -> Jet {
    if m == 0 {
        gamma_jet(u)
    } else {
        Jet::coordinate(m - 1, u[m - 1])
    }
}

fn mat_apply(g: &DMatrix<C64>, comps: &[Jet]) -> Vec<Jet> {
    let d = comps.len();
    (0..d)
        .map(|a| (0..d).fold(Jet::zero(comps[0].order), |acc, b| acc + comps[b].scale(g[(a, b)])))
        .collect()
}

/// Applies a generator to a sampled wave function.
///
/// −iM_ij = −(u_i∂_j − u_j∂_i) + Γ_ij,  −iM_0i = u⁰∂_i + Γ_ij u_j/(1+u⁰),
/// P^m = U^m M with U^m multiplying by u^m and M by M(r).
pub fn apply_generator(spec: &GeneratorSpec, psi: &CenterWaveFunction) -> Result<CenterWaveFunction> {
    spec.kind.validate()?;
    if spec.spin != psi.spin {
        return Err(Error::UnsupportedGenerator(format!("{} built for spin {}/2, state has {}/2", spec.kind, spec.spin.twice, psi.spin.twice)));
    }
    let mass = psi.mass;
    match spec.kind {
        Generator::Mass => psi.map_nodes(|_, r, c| Ok(c.iter().map(|j| j.scale(C64::new(mass.eval(r), 0.0))).collect())),
        Generator::Velocity(m) => psi.map_nodes(|u, _, c| {
            let um = velocity_jet(m, u);
            Ok(c.iter().map(|j| um * *j).collect())
        }),
        Generator::Momentum(m) => psi.map_nodes(|u, r, c| {
            let um = velocity_jet(m, u).scale(C64::new(mass.eval(r), 0.0));
            Ok(c.iter().map(|j| um * *j).collect())
        }),
        Generator::Rotation(i, j) => {
            let gam = spec.gamma(i, j).clone();
            psi.map_nodes(move |u, _, c| {
                let ui = Jet::coordinate(i - 1, u[i - 1]);
                let uj = Jet::coordinate(j - 1, u[j - 1]);
                let spin = mat_apply(&gam, c);
                c.iter()
                    .zip(spin)
                    .map(|(f, s)| {
                        let orbital = ui * f.derivative(j - 1)? - uj * f.derivative(i - 1)?;
                        Ok((s - orbital).scale(I))
                    })
                    .collect()
            })
        }
        Generator::Boost(i) => {
            let spec = spec.clone();
            psi.map_nodes(move |u, _, c| {
                let w = gamma_jet(u);
                let h = aberration_jet(u);
                let mut spin_part: Vec<Jet> = vec![Jet::zero(2); c.len()];
                for j in 1..=3 {
                    if j == i {
                        continue;
                    }
                    let coef = Jet::coordinate(j - 1, u[j - 1]) * h;
                    for (acc, t) in spin_part.iter_mut().zip(mat_apply(spec.gamma(i, j), c)) {
                        *acc = *acc + coef * t;
                    }
                }
                c.iter()
                    .zip(spin_part)
                    .map(|(f, s)| Ok((w * f.derivative(i - 1)? + s).scale(I)))
                    .collect()
            })
        }
    }
}

/// [A,B]Ψ by nested application.
pub fn commutator(a: &GeneratorSpec, b: &GeneratorSpec, psi: &CenterWaveFunction) -> Result<CenterWaveFunction> {
    let ab = apply_generator(a, &apply_generator(b, psi)?)?;
    let ba = apply_generator(b, &apply_generator(a, psi)?)?;
    Ok(ab.combine(&ba, ONE, -ONE))
}

/// One analytic component: spinor amplitude × polynomial × Gaussian in u⃗.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticComponent {
    pub spinor: Vec<C64>,
    pub center: Vector3<f64>,
    /// Diagonal of the Gaussian's inverse-width matrix.
    pub widths: Vector3<f64>,
    pub linear: Vector3<C64>,
    pub quadratic: [[f64; 3]; 3],
}

/// Closed-form test function Σ_c χ_c p_c(u⃗) e^{−(u⃗−c)ᵀA(u⃗−c)} g(r),
/// with g(r) = e^{−(r−r₀)²/(2s²)}.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticState {
    pub spin: Spin,
    pub components: Vec<AnalyticComponent>,
    pub radial_center: f64,
    pub radial_width: f64,
}

impl AnalyticState {
    /// Spin-0 Gaussian exp(−a u⃗²) with flat radial profile.
    pub fn gaussian(a: f64) -> Self {
        AnalyticState {
            spin: Spin::ZERO,
            components: vec![AnalyticComponent {
                spinor: vec![ONE],
                center: Vector3::zeros(),
                widths: Vector3::repeat(a),
                linear: Vector3::zeros(),
                quadratic: [[0.0; 3]; 3],
            }],
            radial_center: 0.0,
            radial_width: f64::INFINITY,
        }
    }

    fn radial(&self, r: f64) -> f64 {
        if self.radial_width.is_finite() {
            (-(r - self.radial_center).powi(2) / (2.0 * self.radial_width.powi(2))).exp()
        } else {
            1.0
        }
    }

    /// Closed-form value at (u⃗, r), one entry per spin component.
    pub fn value_at(&self, u: [f64; 3], r: f64) -> Vec<C64> {
        let d = self.spin.multiplicity();
        let mut out = vec![C64::new(0.0, 0.0); d];
        for c in &self.components {
            let x = Vector3::from(u) - c.center;
            let e = (-(0..3).map(|i| c.widths[i] * x[i] * x[i]).sum::<f64>()).exp();
            let mut p = ONE;
            for i in 0..3 {
                p += c.linear[i] * u[i];
                for j in 0..3 {
                    p += C64::new(c.quadratic[i][j] * u[i] * u[j], 0.0);
                }
            }
            for (o, s) in out.iter_mut().zip(&c.spinor) {
                *o += s * p * e;
            }
        }
        let g = self.radial(r);
        out.iter().map(|v| v * g).collect()
    }

    fn jets_at(&self, u: [f64; 3], r: f64) -> Vec<Jet> {
        let d = self.spin.multiplicity();
        let mut out = vec![Jet::zero(2); d];
        let coords: [Jet; 3] = std::array::from_fn(|i| Jet::coordinate(i, u[i]));
        for c in &self.components {
            let mut expo = Jet::zero(2);
            let mut poly = Jet::constant(ONE);
            for i in 0..3 {
                let x = coords[i] - Jet::constant(C64::new(c.center[i], 0.0));
                expo = expo - (x * x).scale(C64::new(c.widths[i], 0.0));
                poly = poly + coords[i].scale(c.linear[i]);
                for j in 0..3 {
                    poly = poly + (coords[i] * coords[j]).scale(C64::new(c.quadratic[i][j], 0.0));
                }
            }
            let f = poly * expo.exp();
            for (o, s) in out.iter_mut().zip(&c.spinor) {
                *o = *o + f.scale(*s);
            }
        }
        let g = C64::new(self.radial(r), 0.0);
        out.into_iter().map(|j| j.scale(g)).collect()
    }

    pub fn sample(&self, grid: &CenterGrid, mass: MassFunction) -> CenterWaveFunction {
        let mut jets = Vec::with_capacity(grid.u_count() * grid.r_nodes.len() * self.spin.multiplicity());
        for iu in 0..grid.u_count() {
            let u = grid.u_point(iu);
            for &r in &grid.r_nodes {
                jets.extend(self.jets_at(u, r));
            }
        }
        CenterWaveFunction { grid: grid.clone(), spin: self.spin, mass, jets }
    }
}

/// Random analytic states: Gaussians near the origin with polynomial prefactors.
pub fn test_family(count: usize, spin: Spin, seed: u64) -> Vec<AnalyticState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = spin.multiplicity();
    let cplx = |rng: &mut ChaCha8Rng, s: f64| C64::new(rng.random_range(-s..s), rng.random_range(-s..s));
    (0..count)
        .map(|_| {
            let components = (0..2)
                .map(|_| AnalyticComponent {
                    spinor: (0..d).map(|_| cplx(&mut rng, 1.0)).collect(),
                    center: Vector3::from_fn(|_, _| rng.random_range(-0.4..0.4)),
                    widths: Vector3::from_fn(|_, _| rng.random_range(0.4..1.2)),
                    linear: Vector3::from_fn(|_, _| cplx(&mut rng, 0.6)),
                    quadratic: {
                        let mut q = [[0.0; 3]; 3];
                        for i in 0..3 {
                            for j in i..3 {
                                let v = rng.random_range(-0.3..0.3);
                                q[i][j] = v;
                                q[j][i] = v;
                            }
                        }
                        q
                    },
                })
                .collect();
            AnalyticState { spin, components, radial_center: rng.random_range(0.5..1.5), radial_width: rng.random_range(0.5..1.0) }
        })
        .collect()
}

/// Nodes where closure is checked: a small box in u⃗ and several r values.
pub fn closure_grid() -> CenterGrid {
    CenterGrid::uniform(1.2, 4, vec![0.2, 0.7, 1.3, 1.9])
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub a: Generator,
    pub b: Generator,
    /// Fitted coefficients of [A,B] in the basis [`Generator::all`].
    pub constants: Vec<(f64, f64)>,
    /// Largest relative fit residual over the test set.
    pub residual: f64,
    /// Largest deviation of constants refitted on each test function.
    pub stability: f64,
    /// Constants are i·(small-denominator rational).
    pub rational: bool,
}

impl ClosureReport {
    /// Human-readable combination, e.g. "-1i*M13".
    pub fn expression(&self) -> String {
        let names = Generator::all();
        let terms: Vec<String> = self
            .constants
            .iter()
            .zip(&names)
            .filter(|((re, im), _)| re.abs() > 1e-9 || im.abs() > 1e-9)
            .map(|((re, im), g)| {
                if re.abs() > 1e-9 {
                    format!("({re:+.6}{im:+.6}i)*{g}")
                } else {
                    format!("{im:+}i*{g}")
                }
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" ")
        }
    }
}

fn fit(target: &CenterWaveFunction, basis: &[CenterWaveFunction]) -> Result<(DVector<C64>, f64)> {
    let rows = target.jets.len();
    let a = DMatrix::from_fn(rows, basis.len(), |r, c| basis[c].jets[r].v);
    let b = DVector::from_iterator(rows, target.jets.iter().map(|j| j.v));
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-13).map_err(|e| Error::Domain(e.to_string()))?;
    let scale = b.norm().max(target.jets.len() as f64 * f64::MIN_POSITIVE).max(basis.iter().map(|g| g.node_norm()).fold(0.0, f64::max));
    let res = (&a * &x - &b).norm() / scale;
    Ok((x, res))
}

fn is_small_rational(x: f64) -> bool {
    (1..=12).any(|q| {
        let p = (x * q as f64).round();
        (x * q as f64 - p).abs() < 1e-8 * q as f64
    })
}

/// Fits [A,B] on the first test function and checks the fit on all of them.
pub fn algebra_closure_residual(a: &GeneratorSpec, b: &GeneratorSpec, testset: &[CenterWaveFunction]) -> Result<ClosureReport> {
    if testset.len() < 10 {
        return Err(Error::Domain(format!("closure check needs at least 10 test functions, got {}", testset.len())));
    }
    let specs: Vec<GeneratorSpec> = Generator::all().into_iter().map(|g| GeneratorSpec::new(g, a.spin)).collect::<Result<_>>()?;
    let mut reference: Option<DVector<C64>> = None;
    let mut residual: f64 = 0.0;
    let mut stability: f64 = 0.0;
    for psi in testset {
        let target = commutator(a, b, psi)?;
        let basis: Vec<CenterWaveFunction> = specs.iter().map(|g| apply_generator(g, psi)).collect::<Result<_>>()?;
        let (x, r) = fit(&target, &basis)?;
        match &reference {
            None => {
                residual = residual.max(r);
                reference = Some(x);
            }
            Some(c0) => {
                stability = stability.max(max_abs((&x - c0).iter()));
                // Residual of the reference constants on this function.
                let mut pred = target.combine(&target, C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for (g, c) in basis.iter().zip(c0.iter()) {
                    pred = pred.combine(g, ONE, *c);
                }
                let diff = target.combine(&pred, ONE, -ONE).node_norm();
                let scale = target.node_norm().max(basis.iter().map(|g| g.node_norm()).fold(0.0, f64::max));
                residual = residual.max(diff / scale);
            }
        }
    }
    let c = reference.expect("non-empty test set");
    if residual > CLOSURE_FAIL {
        return Err(Error::ClosureFailure { residual });
    }
    let rational = c.iter().all(|z| z.re.abs() < STABILITY_TOL && is_small_rational(z.im));
    Ok(ClosureReport { a: a.kind, b: b.kind, constants: c.iter().map(|z| (clean(z.re), clean(z.im))).collect(), residual, stability, rational })
}

fn max_abs<'a>(it: impl Iterator<Item = &'a C64>) -> f64 {
    it.map(|z| z.norm()).fold(0.0, f64::max)
}

fn clean(x: f64) -> f64 {
    let r = (x * 12.0).round() / 12.0;
    if (x - r).abs() < 1e-9 {
        r
    } else {
        x
    }
}

/// Closure reports for every unordered generator pair.
pub fn closure_table(spin: Spin, count: usize, seed: u64) -> Result<Vec<ClosureReport>> {
    let grid = closure_grid();
    let mass = MassFunction { m1: 1.0, m2: 1.0 };
    let testset: Vec<CenterWaveFunction> = test_family(count, spin, seed).iter().map(|s| s.sample(&grid, mass)).collect();
    let gens = Generator::all();
    let mut out = Vec::new();
    for (ia, ga) in gens.iter().enumerate() {
        for gb in &gens[ia + 1..] {
            let a = GeneratorSpec::new(*ga, spin)?;
            let b = GeneratorSpec::new(*gb, spin)?;
            out.push(algebra_closure_residual(&a, &b, &testset)?);
        }
    }
    Ok(out)
}

/// |⟨φ,Gψ⟩ − ⟨Gφ,ψ⟩| relative to ‖φ‖‖Gψ‖ + ‖Gφ‖‖ψ‖, under the grid's d³u/u⁰ quadrature.
/// Small only when both functions decay well inside the u box.
pub fn hermiticity_residual(spec: &GeneratorSpec, phi: &CenterWaveFunction, psi: &CenterWaveFunction) -> Result<f64> {
    let gpsi = apply_generator(spec, psi)?;
    let gphi = apply_generator(spec, phi)?;
    let lhs = phi.inner(&gpsi);
    let rhs = gphi.inner(psi);
    let scale = phi.norm() * gpsi.norm() + gphi.norm() * psi.norm();
    Ok(if scale > 0.0 { (lhs - rhs).norm() / scale } else { 0.0 })
}

/// Grid and states for hermiticity checks: wide Gaussians on a fine box so the trapezoid rule is spectrally accurate.
pub fn hermiticity_states(spin: Spin, count: usize, seed: u64) -> Vec<CenterWaveFunction> {
    let grid = CenterGrid::uniform(5.0, 41, vec![0.8, 1.6]);
    let mass = MassFunction { m1: 1.0, m2: 1.0 };
    test_family(count, spin, seed)
        .into_iter()
        .map(|mut s| {
            for c in &mut s.components {
                c.widths += Vector3::repeat(0.6);
            }
            s.sample(&grid, mass)
        })
        .collect()
}

/// Observer translation V_{a,1}: multiplies by e^{i u·a}, the same phase for every mass component.
pub fn observer_translate(a: &FourVector, psi: &CenterWaveFunction) -> Result<CenterWaveFunction> {
    psi.map_nodes(|u, _, c| {
        let phase = phase_jet(a, u, 1.0);
        Ok(c.iter().map(|j| phase * *j).collect())
    })
}

/// Momentum translation U_{a,1} generated by P = U·M: multiplies by e^{i M(r) u·a}.
pub fn momentum_translate(a: &FourVector, psi: &CenterWaveFunction) -> Result<CenterWaveFunction> {
    let mass = psi.mass;
    psi.map_nodes(|u, r, c| {
        let phase = phase_jet(a, u, mass.eval(r));
        Ok(c.iter().map(|j| phase * *j).collect())
    })
}

/// e^{i s u·a} as a jet in u⃗.
fn phase_jet(a: &FourVector, u: [f64; 3], s: f64) -> Jet {
    let mut ua = gamma_jet(u).scale(C64::new(a.t(), 0.0));
    for i in 0..3 {
        ua = ua - Jet::coordinate(i, u[i]).scale(C64::new(a[i + 1], 0.0));
    }
    ua.scale(C64::new(0.0, s)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_point(u: [f64; 3], r: Vec<f64>) -> CenterGrid {
        let n = r.len();
        CenterGrid { u_axes: [vec![u[0]], vec![u[1]], vec![u[2]]], r_nodes: r, r_weights: vec![1.0; n], u_spacing: [1.0; 3] }
    }

    #[test]
    fn spin_half_gamma_algebra() {
        let s = Spin::HALF;
        let g12 = s.gamma(1, 2);
        let g23 = s.gamma(2, 3);
        let g13 = s.gamma(1, 3);
        let comm = &g12 * &g23 - &g23 * &g12;
        assert!(max_abs((comm + &g13).iter()) < 1e-15);
        // skew-hermitian
        assert!(max_abs((&g12 + g12.adjoint()).iter()) < 1e-15);
        let one = Spin { twice: 2 };
        let c = &one.gamma(1, 2) * &one.gamma(2, 3) - &one.gamma(2, 3) * &one.gamma(1, 2);
        assert!(max_abs((c + one.gamma(1, 3)).iter()) < 1e-14);
    }

    #[test]
    fn mass_is_pointwise() {
        let grid = CenterGrid::uniform(1.0, 3, vec![0.5, 1.5]);
        let mass = MassFunction { m1: 1.0, m2: 2.0 };
        let psi = AnalyticState::gaussian(0.7).sample(&grid, mass);
        let out = apply_generator(&GeneratorSpec::new(Generator::Mass, Spin::ZERO).unwrap(), &psi).unwrap();
        for (iu, _) in (0..grid.u_count()).enumerate() {
            for (ir, r) in grid.r_nodes.iter().enumerate() {
                let expected = psi.value(iu, ir, 0) * mass.eval(*r);
                assert!((out.value(iu, ir, 0) - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rotation_kills_invariant_scalars() {
        let grid = CenterGrid::uniform(1.5, 5, vec![1.0]);
        let psi = AnalyticState::gaussian(0.9).sample(&grid, MassFunction { m1: 1.0, m2: 1.0 });
        let out = apply_generator(&GeneratorSpec::new(Generator::Rotation(1, 2), Spin::ZERO).unwrap(), &psi).unwrap();
        assert!(out.node_norm() < 1e-15);
    }

    #[test]
    fn boost_on_gaussian() {
        let grid = single_point([1.0, 0.0, 0.0], vec![1.0]);
        let psi = AnalyticState::gaussian(1.0).sample(&grid, MassFunction { m1: 1.0, m2: 1.0 });
        let out = apply_generator(&GeneratorSpec::new(Generator::Boost(1), Spin::ZERO).unwrap(), &psi).unwrap();
        let expected = 2f64.sqrt() * -2.0 * (-1f64).exp();
        let got = out.value(0, 0, 0) * C64::new(0.0, -1.0);
        assert!((got - C64::new(expected, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn unsupported_generators() {
        assert!(GeneratorSpec::new(Generator::Rotation(2, 1), Spin::ZERO).is_err());
        assert!(GeneratorSpec::new(Generator::Momentum(4), Spin::ZERO).is_err());
        assert!(Generator::parse("Q1").is_err());
        assert_eq!(Generator::parse("M03").unwrap(), Generator::Boost(3));
        assert_eq!(Generator::parse("M23").unwrap(), Generator::Rotation(2, 3));
        for g in Generator::all() {
            assert_eq!(Generator::parse(&g.to_string()).unwrap(), g);
        }
    }

    #[test]
    fn analytic_samples_match_closed_form() {
        let grid = CenterGrid::uniform(1.0, 3, vec![0.4, 1.1]);
        for st in test_family(3, Spin::HALF, 5) {
            let psi = st.sample(&grid, MassFunction { m1: 1.0, m2: 1.0 });
            for iu in 0..grid.u_count() {
                for (ir, r) in grid.r_nodes.iter().enumerate() {
                    let exact = st.value_at(grid.u_point(iu), *r);
                    for s in 0..2 {
                        assert!((psi.value(iu, ir, s) - exact[s]).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn rotation_commutator_fit() {
        let grid = closure_grid();
        let mass = MassFunction { m1: 1.0, m2: 1.0 };
        let set: Vec<_> = test_family(10, Spin::ZERO, 1).iter().map(|s| s.sample(&grid, mass)).collect();
        let a = GeneratorSpec::new(Generator::Rotation(1, 2), Spin::ZERO).unwrap();
        let b = GeneratorSpec::new(Generator::Rotation(1, 3), Spin::ZERO).unwrap();
        let rep = algebra_closure_residual(&a, &b, &set).unwrap();
        assert!(rep.residual < 1e-8, "{}", rep.residual);
        assert!(rep.stability < 1e-8);
        assert!(rep.rational);
        let idx = Generator::all().iter().position(|g| *g == Generator::Rotation(2, 3)).unwrap();
        assert!(rep.constants[idx].1.abs() == 1.0);
        assert_eq!(rep.constants.iter().filter(|c| c.0 != 0.0 || c.1 != 0.0).count(), 1);
    }

    #[test]
    fn generators_are_hermitian() {
        for spin in [Spin::ZERO, Spin::HALF] {
            let states = hermiticity_states(spin, 2, 5);
            for g in Generator::all() {
                let spec = GeneratorSpec::new(g, spin).unwrap();
                let r = hermiticity_residual(&spec, &states[0], &states[1]).unwrap();
                assert!(r < 1e-8, "{g} spin {}/2: {r:e}", spin.twice);
            }
        }
    }

    #[test]
    fn phases_of_two_mass_components() {
        let u = [0.3, -0.5, 0.8];
        let grid = single_point(u, vec![0.6, 1.4]);
        let mass = MassFunction { m1: 1.0, m2: 1.0 };
        let psi = AnalyticState::gaussian(0.5).sample(&grid, mass);
        let a = FourVector::new(2.5, 0.4, -1.0, 0.3);
        let v = observer_translate(&a, &psi).unwrap();
        let rel = |w: &CenterWaveFunction| (w.value(0, 0, 0) / w.value(0, 1, 0)).arg();
        assert!((rel(&v) - rel(&psi)).abs() < 1e-12);
        let t = momentum_translate(&a, &psi).unwrap();
        let ua = FourVector::velocity(Vector3::from(u)).dot(&a);
        let dm = mass.eval(0.6) - mass.eval(1.4);
        let shift = (rel(&t) - rel(&psi) - dm * ua).rem_euclid(std::f64::consts::TAU);
        assert!(shift.min(std::f64::consts::TAU - shift) < 1e-10);
        let zero = observer_translate(&FourVector::default(), &psi).unwrap();
        assert_eq!(zero.values(), psi.values());
    }
}
