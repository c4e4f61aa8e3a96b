use covscat::center::{q_sq_of_z_sq, to_center};
use covscat::dynamics::{phase_shifts_stationary, Potential, RadialChannel};
use covscat::fourvec::FourVector;
use covscat::observables::{
    cross_section_band, cross_section_mc, luminosity, transverse_overlap, ElasticKernel, Evolution, MomentumGaussian, PositionPacket, Region, SamplingBox,
    TimeWindow,
};
use nalgebra::Vector3;

fn well_kernel(z0: f64) -> ElasticKernel {
    let v = Potential::SquareWell { depth: 0.5, radius: 1.0 };
    let zs: Vec<f64> = (0..9).map(|i| z0 * (0.9 + 0.025 * i as f64)).collect();
    let tables = (0..=3).map(|l| phase_shifts_stationary(&RadialChannel { l, n: 1, dr: 1.0, m1: 1.0, m2: 1.0 }, &v, &zs).unwrap()).collect();
    ElasticKernel::new(1.0, 1.0, tables).unwrap()
}

/// Head-on unit-mass momenta along x with relative momentum z.
fn head_on(z: f64) -> [FourVector; 2] {
    let k = q_sq_of_z_sq(z * z, 1.0, 1.0).unwrap().sqrt();
    [FourVector::on_shell(1.0, Vector3::new(k, 0.0, 0.0)), FourVector::on_shell(1.0, Vector3::new(-k, 0.0, 0.0))]
}

#[test]
fn fixed_target_luminosity_at_three_widths() {
    let grid = SamplingBox::new([0.0; 3], [128, 64, 64], 0.35).unwrap();
    let speed: f64 = 0.6;
    let gamma = 1.0 / (1.0 - speed * speed).sqrt();
    let p1 = FourVector::new(1.0, 0.0, 0.0, 0.0);
    let p2 = FourVector::on_shell(1.0, Vector3::new(gamma * speed, 0.0, 0.0));
    let window = TimeWindow::symmetric(20.0, 0.5);
    let mut values = vec![];
    for width in [0.7, 1.0, 1.3] {
        let sigma_p = 0.5 / width;
        let target = MomentumGaussian::new(1.0, Vector3::zeros(), sigma_p);
        let beam = MomentumGaussian::new(1.0, p2.spatial(), sigma_p).translated(Vector3::new(0.0, 0.4 * width, -0.3 * width));
        let t = PositionPacket::from_momentum(&target, grid, Evolution::Rigid).unwrap();
        let b = PositionPacket::from_momentum(&beam, grid, Evolution::Rigid).unwrap();
        let l = luminosity(&t, &b, &p1, &p2, &window).unwrap();
        let oracle = transverse_overlap(&t, &b, 0.0).unwrap();
        assert!((l.value - oracle).abs() < 1e-4 * oracle, "width {width}: {} vs {oracle}", l.value);
        // Two unit Gaussians of width w offset by d: e^{−d²/(4w²)}/(4πw²)
        let d_sq = (0.4f64.powi(2) + 0.3f64.powi(2)) * width * width;
        let closed = (-d_sq / (4.0 * width * width)).exp() / (4.0 * std::f64::consts::PI * width * width);
        assert!((l.value - closed).abs() < 1e-4 * closed, "width {width}: {} vs closed form {closed}", l.value);
        values.push(l.value * width * width);
    }
    // L·w² is width-independent for this geometry.
    assert!(values.windows(2).all(|v| (v[0] - v[1]).abs() < 1e-4 * v[0]));
}

#[test]
fn mc_error_halves_when_samples_quadruple() {
    let kernel = well_kernel(1.0);
    let p = head_on(1.0);
    let region = Region::CenterBand { axis: Vector3::x(), cos_min: -0.5, cos_max: 0.7 };
    let mean_error = |n: usize| (0..6).map(|s| cross_section_mc(&kernel, p, [1.0, 1.0], &region, n, 100 + s).unwrap().error).sum::<f64>() / 6.0;
    let ratio = mean_error(20_000) / mean_error(80_000);
    assert!((ratio - 2.0).abs() < 0.1, "error ratio {ratio}");
}

#[test]
fn mc_band_matches_quadrature_over_seeds() {
    let kernel = well_kernel(1.0);
    let p = head_on(1.0);
    let d = to_center(&p, &[1.0, 1.0]).unwrap();
    let s = (p[0] + p[1]).square();
    let oracle = cross_section_band(&kernel, s, d.q[0].spatial(), Vector3::x(), -0.5, 0.7, 200).unwrap();
    let region = Region::CenterBand { axis: Vector3::x(), cos_min: -0.5, cos_max: 0.7 };
    let mut chi2 = 0.0;
    for seed in 0..8 {
        let e = cross_section_mc(&kernel, p, [1.0, 1.0], &region, 50_000, seed).unwrap();
        chi2 += ((e.sigma - oracle) / e.error).powi(2);
    }
    // χ² with 8 degrees of freedom; 26.1 is its 0.999 quantile.
    assert!(chi2 < 26.1, "chi2 {chi2}");
}

#[test]
fn full_sphere_matches_partial_waves_in_any_frame() {
    let kernel = well_kernel(1.3);
    let p = head_on(1.3);
    let total = kernel.partial_wave_total(1.3).unwrap();
    let e = cross_section_mc(&kernel, p, [1.0, 1.0], &Region::Full, 200_000, 5).unwrap();
    assert!((e.sigma - total).abs() < 3.0 * e.error);
    let lam = covscat::fourvec::LorentzMatrix::boost_spatial(&Vector3::new(0.2, -1.1, 0.4));
    let pb = [lam.apply(&p[0]), lam.apply(&p[1])];
    let b = cross_section_mc(&kernel, pb, [1.0, 1.0], &Region::Full.boosted(lam), 200_000, 6).unwrap();
    assert!((b.sigma - total).abs() < 3.0 * b.error);
}
