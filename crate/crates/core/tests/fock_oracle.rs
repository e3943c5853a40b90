mod common;

use common::fock;
use hqrc::gaussian::{fidelity, squeezed_thermal_covariance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_params(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    (
        rng.random_range(0.0..=5.0),
        rng.random_range(0.0..=0.75),
        rng.random_range(0.0..std::f64::consts::TAU),
    )
}

#[test]
fn squeezer_is_unitary_on_low_block() {
    let s = fock::squeeze(0.75, 1.1, fock::WORK_DIM);
    let top = s.rows(0, 60);
    let gram = top.clone() * top.adjoint();
    for i in 0..60 {
        for j in 0..60 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((gram[(i, j)].re - expect).abs() < 1e-10 && gram[(i, j)].im.abs() < 1e-10);
        }
    }
}

#[test]
fn oracle_states_have_the_expected_covariance() {
    for &(n, r, phi) in &[(0.0, 0.0, 0.0), (0.3, 0.5, 0.7), (1.0, 0.75, 4.0), (2.0, 0.2, 2.5)] {
        let rho = fock::squeezed_thermal_state(n, r, phi, 200);
        assert!((rho.trace().re - 1.0).abs() < 1e-10);
        let got = fock::covariance_of(&rho);
        let want = squeezed_thermal_covariance(n, r, phi);
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (got[i][j] - want.as_matrix()[(i, j)]).abs() < 1e-9 * (1.0 + want.as_matrix()[(i, j)].abs()),
                    "({n}, {r}, {phi}) element {i}{j}: {} vs {}",
                    got[i][j],
                    want.as_matrix()[(i, j)]
                );
            }
        }
    }
}

#[test]
fn oracle_reproduces_pure_state_overlap() {
    // Vacuum against squeezed vacuum: F = 1 / cosh r.
    let f = fock::fidelity((0.0, 0.0, 0.0), (0.0, 0.6, 1.3), 60);
    assert!((f - 1.0 / 0.6f64.cosh()).abs() < 1e-12);
    // Two thermal states: F = 1 / (√((n₁+1)(n₂+1)) − √(n₁n₂))².
    let (n1, n2) = (0.7f64, 2.2f64);
    let expect = 1.0 / (((n1 + 1.0) * (n2 + 1.0)).sqrt() - (n1 * n2).sqrt()).powi(2);
    assert!((fock::fidelity((n1, 0.0, 0.0), (n2, 0.0, 0.0), 200) - expect).abs() < 1e-12);
}

#[test]
fn closed_form_fidelity_matches_density_matrix_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = random_params(&mut rng);
        let b = random_params(&mut rng);
        let closed = fidelity(
            &squeezed_thermal_covariance(a.0, a.1, a.2),
            &squeezed_thermal_covariance(b.0, b.1, b.2),
        )
        .unwrap();
        worst = worst.max((closed - fock::fidelity(a, b, 80)).abs());
    }
    assert!(worst < 1e-4, "worst deviation {worst:e}");
}

#[test]
fn oracle_is_symmetric() {
    let a = (1.5, 0.4, 0.3);
    let b = (0.5, 0.7, 2.0);
    assert!((fock::fidelity(a, b, 80) - fock::fidelity(b, a, 80)).abs() < 1e-14);
}
