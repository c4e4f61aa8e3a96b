use covscat::center::{from_center, q_sq_of_z_sq, reduced_mass, to_center, z_sq_of_q_sq, TwoBodyReduction};
use covscat::cli::RunConfig;
use covscat::dynamics::stationary::phase_shift_principal;
use covscat::dynamics::{square_well_phase, Potential};
use covscat::fourvec::{wigner_rotation, FourVector, LorentzMatrix};
use covscat::observables::{flux_factor, legendre, Region};
use nalgebra::Vector3;
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    prop::array::uniform3(-r..r).prop_map(Vector3::from)
}

fn particles(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (Vec<FourVector>, Vec<f64>)> {
    prop::collection::vec((0.1f64..5.0, vec3(4.0)), n).prop_map(|v| {
        let masses: Vec<f64> = v.iter().map(|(m, _)| *m).collect();
        let p = v.iter().map(|(m, p)| FourVector::on_shell(*m, *p)).collect();
        (p, masses)
    })
}

fn lorentz() -> impl Strategy<Value = LorentzMatrix> {
    (vec3(1.0), -3.1f64..3.1, vec3(2.0))
        .prop_filter("axis", |(a, _, _)| a.norm() > 1e-3)
        .prop_map(|(axis, angle, u)| LorentzMatrix::rotation(axis, angle) * LorentzMatrix::boost_spatial(&u))
}

fn wrapped_pi(x: f64) -> f64 {
    let y = x.rem_euclid(std::f64::consts::PI);
    y.min(std::f64::consts::PI - y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn center_round_trip((p, m) in particles(2..=4)) {
        let d = to_center(&p, &m).unwrap();
        prop_assert!(d.constraint_residual() < 1e-10);
        prop_assert!((d.u.square() - 1.0).abs() < 1e-12);
        prop_assert!(d.q.iter().all(|q| q.t() == 0.0));
        let back = from_center(&d).unwrap();
        let scale = p.iter().map(|x| x.euclid_norm()).fold(0.0, f64::max);
        for (a, b) in p.iter().zip(&back) {
            prop_assert!((*a - *b).euclid_norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn invariant_mass_is_frame_independent((p, m) in particles(2..=4), lam in lorentz()) {
        let total: FourVector = p.iter().copied().sum();
        let d = to_center(&p, &m).unwrap();
        let mass = d.invariant_mass().unwrap();
        prop_assert!((mass - total.square().sqrt()).abs() < 1e-9 * mass);
        let pl: Vec<FourVector> = p.iter().map(|x| lam.apply(x)).collect();
        let dl = to_center(&pl, &m).unwrap();
        prop_assert!((dl.invariant_mass().unwrap() - mass).abs() < 1e-9 * mass);
    }

    #[test]
    fn relative_momenta_rotate_by_wigner((p, m) in particles(2..=3), lam in lorentz()) {
        let d = to_center(&p, &m).unwrap();
        let pl: Vec<FourVector> = p.iter().map(|x| lam.apply(x)).collect();
        let dl = to_center(&pl, &m).unwrap();
        let w = wigner_rotation(&lam, &d.u).unwrap();
        prop_assert!(w.orthogonality_residual() < 1e-10);
        prop_assert!((w.0.determinant() - 1.0).abs() < 1e-10);
        let scale = d.q.iter().map(|q| q.euclid_norm()).fold(1.0, f64::max);
        for (a, b) in d.q.iter().zip(&dl.q) {
            prop_assert!((b.spatial() - w.apply(&a.spatial())).norm() < 1e-9 * scale);
        }
    }

    #[test]
    fn wigner_cocycle(u in vec3(2.0), l1 in lorentz(), l2 in lorentz()) {
        let u = FourVector::velocity(u);
        let lhs = wigner_rotation(&(l2 * l1), &u).unwrap();
        let rhs = wigner_rotation(&l2, &l1.apply(&u)).unwrap().compose(&wigner_rotation(&l1, &u).unwrap());
        prop_assert!((lhs.0 - rhs.0).abs().max() < 1e-10);
    }

    #[test]
    fn lorentz_matrices_preserve_metric(lam in lorentz()) {
        prop_assert!(lam.metric_residual() < 1e-10);
        prop_assert!(lam.is_proper_orthochronous(1e-10));
        let id = lam * lam.inverse();
        prop_assert!((id.0 - LorentzMatrix::identity().0).abs().max() < 1e-10);
    }

    #[test]
    fn mass_relation_round_trip(m1 in 0.05f64..20.0, m2 in 0.05f64..20.0, log_z in -6.0f64..3.0) {
        let z_sq = 10f64.powf(log_z);
        let t = TwoBodyReduction::from_z_sq(z_sq, m1, m2).unwrap();
        prop_assert!(t.defining_residual() < 1e-12 * t.mass());
        let back = z_sq_of_q_sq(t.q_sq, m1, m2).unwrap();
        prop_assert!((back - z_sq).abs() < 1e-10 * z_sq);
        // √(m²+q²) − m < q²/2m, so matching the nonrelativistic mass needs q² ≥ z²
        prop_assert!(q_sq_of_z_sq(z_sq, m1, m2).unwrap() >= z_sq * (1.0 - 1e-12));
        prop_assert!(reduced_mass(m1, m2) <= m1.min(m2));
    }

    #[test]
    fn flux_factor_is_invariant((p, _) in particles(2..=2), lam in lorentz()) {
        let f = flux_factor(&p[0], &p[1]).unwrap();
        let fl = flux_factor(&lam.apply(&p[0]), &lam.apply(&p[1])).unwrap();
        prop_assert!((f - fl).abs() < 1e-9 * f.max(1.0));
        prop_assert!(f >= 0.0);
    }

    #[test]
    fn boosted_region_is_lorentz_invariant((p, m) in particles(2..=2), lam in lorentz(), c in -1.0f64..1.0) {
        let region = Region::LabCone { axis: Vector3::x(), cos_min: c };
        let inside = region.contains(&p[0], &p[1], [m[0], m[1]]);
        let moved = region.clone().boosted(lam);
        prop_assert_eq!(moved.contains(&lam.apply(&p[0]), &lam.apply(&p[1]), [m[0], m[1]]), inside);
        let band = Region::CenterBand { axis: Vector3::y(), cos_min: c, cos_max: 1.0 };
        let inside = band.contains(&p[0], &p[1], [m[0], m[1]]);
        prop_assert_eq!(band.boosted(lam).contains(&lam.apply(&p[0]), &lam.apply(&p[1]), [m[0], m[1]]), inside);
    }

    #[test]
    fn legendre_bounded_and_normalized(l in 0usize..12, x in -1.0f64..1.0) {
        let p = legendre(l, x);
        prop_assert_eq!(p.len(), l + 1);
        prop_assert!(p.iter().all(|v| v.abs() <= 1.0 + 1e-12));
        let ends = legendre(l, 1.0);
        prop_assert!(ends.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn cell_average_bounded_by_depth(depth in -3.0f64..3.0, len in 0.2f64..4.0, a in 0.0f64..6.0, w in 1e-3f64..1.0) {
        for v in [Potential::SquareWell { depth, radius: len }, Potential::Gaussian { depth, width: len }] {
            let avg = v.cell_average(a, a + w);
            prop_assert!(avg.abs() <= depth.abs() * (1.0 + 1e-12));
            prop_assert!(avg * depth <= 0.0);
        }
    }

    #[test]
    fn config_overrides_round_trip(samples in 2usize..1_000_000, seed in 0u64..1000, depth in 0.01f64..2.0) {
        let mut c = RunConfig::default();
        let d0 = c.digest();
        c.set(&format!("xsection.samples={samples}")).unwrap();
        c.set(&format!("xsection.seed={seed}")).unwrap();
        c.set(&format!("potential.depth={depth:e}")).unwrap();
        prop_assert_eq!(c.xsection.samples, samples);
        prop_assert_eq!(c.potential, Potential::SquareWell { depth, radius: 1.0 });
        let back = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.digest(), c.digest());
        if c != RunConfig::default() {
            prop_assert_ne!(c.digest(), d0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stationary_matches_square_well(l in 0u32..4, z in 0.2f64..5.0, depth in 0.1f64..2.0, radius in 0.5f64..2.0) {
        let mu = 0.5;
        let v = Potential::SquareWell { depth, radius };
        let d = phase_shift_principal(l, mu, &v, z).unwrap();
        prop_assert!(wrapped_pi(d - square_well_phase(l, z, mu, depth, radius)) < 1e-6);
    }
}
