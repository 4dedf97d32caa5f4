use fsi_bem::material::{MaterialTemplate, PlaneWave};
use fsi_bem::oracle::{find_jones_frequencies, find_neumann_eigenfrequencies, mode_matrix, solve_oracle};
use proptest::prelude::*;

const UNIT: MaterialTemplate = MaterialTemplate { lambda: 1.0, mu: 2.0, rho: 1.0, rho_f: 0.5, c: 1.0 };

fn aluminium() -> MaterialTemplate {
    MaterialTemplate::from_wave_speeds(3122.0, 6198.0, 2700.0, 1000.0, 1500.0).unwrap()
}

#[test]
fn aluminium_disc_satisfies_transmission_conditions() {
    let m = aluminium().at(50.0e3 * std::f64::consts::PI).unwrap();
    let wave = PlaneWave::new([1.0, 0.0], m.k).unwrap();
    let sol = solve_oracle(&m, 0.01, &wave, 40).unwrap();
    let (normal, traction) = sol.transmission_residuals(100);
    assert!(normal < 1e-10 && traction < 1e-10, "{normal:e} {traction:e}");
}

#[test]
fn scattered_pressure_decays_like_inverse_square_root() {
    let m = UNIT.at(6.0).unwrap();
    let wave = PlaneWave::new([1.0, 0.0], m.k).unwrap();
    let sol = solve_oracle(&m, 1.0, &wave, 40).unwrap();
    let amp = |r: f64| sol.pressure(r, 0.7).0.norm() * r.sqrt();
    let (a, b) = (amp(200.0), amp(800.0));
    assert!((a - b).abs() < 1e-2 * b, "{a} vs {b}");
}

#[test]
fn unit_disc_finders_match_known_frequencies() {
    let jones = find_jones_frequencies(&UNIT, 1.0, 5.0, 10.0, 20).unwrap();
    assert_eq!(jones.len(), 1, "{jones:?}");
    assert!((jones[0] - 7.2629).abs() < 5e-4);
    let neumann = find_neumann_eigenfrequencies(1.0, 1.0, 5.0, 10.0, 12);
    assert_eq!(neumann.len(), 12, "{neumann:?}");
    assert!((neumann[0] - 5.3175).abs() < 5e-4 && (neumann[11] - 9.9695).abs() < 5e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn structural_zeros_are_exact(n in 0u32..40, omega in 0.5f64..12.0) {
        let s = mode_matrix(n, &UNIT.at(omega).unwrap(), 1.0).unwrap();
        prop_assert_eq!(s.en_matrix[1][0].norm(), 0.0);
        prop_assert_eq!(s.en[1].norm(), 0.0);
    }

    #[test]
    fn pressure_is_mirror_symmetric_for_axial_incidence(theta in 0.0f64..std::f64::consts::PI, r in 1.0f64..5.0) {
        let m = UNIT.at(6.0).unwrap();
        let sol = solve_oracle(&m, 1.0, &PlaneWave::new([1.0, 0.0], m.k).unwrap(), 40).unwrap();
        let (a, _) = sol.pressure(r, theta);
        let (b, _) = sol.pressure(r, -theta);
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }
}
