use std::f64::consts::PI;

use pt_sinh::contour::{optimal_shift, FamilySelector};
use pt_sinh::discretization::{build_hamiltonian, GridPolicy, GridSpec};
use pt_sinh::potential::PotentialParams;
use pt_sinh::reproduce::{extrapolated_log_derivative, family_levels, ground_state, merged_rank};
use pt_sinh::spectral::{confirmed_real_eigenvalues, eigenvector, find_real_eigenvalues, solve_alpha_for_energy};

fn params(a: f64) -> PotentialParams<f64> {
    PotentialParams::new(a, 0.0).unwrap()
}

#[test]
fn quartic_ground_state_extrapolates() {
    let l = ground_state(&params(2.0), FamilySelector::PRIMARY, 1000).unwrap();
    assert!((l.extrapolated - 1.21141098417527).abs() < 1e-9, "{l:?}");
    assert!((l.order - 2.0).abs() < 0.2, "{l:?}");
    assert!(l.est_error < 1e-5);
}

#[test]
fn shifted_ground_state_is_pt_symmetric() {
    let p = params(3.0);
    let grid = GridPolicy::new(801).resolve(&p, FamilySelector::PRIMARY).unwrap();
    assert!((grid.y() + PI / 6.0).abs() < 1e-15);
    let op = build_hamiltonian(&p, grid).unwrap();
    assert_eq!(op.pt_defect(), 0.0);
    let e = find_real_eigenvalues(&op, 0.5, 2.0, 0.05).unwrap()[0];
    let psi = eigenvector(&op, e).unwrap();
    assert!(psi.pt_defect() < 1e-6);
    assert!(psi.residual(&op) < 1e-8);
    assert!(psi.log_derivative_at_origin().is_err());
}

#[test]
fn alpha_four_needs_the_shift() {
    let p = params(4.0);
    let on_axis = confirmed_real_eigenvalues(&p, GridSpec::new(8.0, 1000, 0.0).unwrap(), -20.0, 30.0, 0.05).unwrap();
    assert!(on_axis.is_empty(), "{on_axis:?}");
    let shifted = family_levels(&p, FamilySelector::PRIMARY, 1000, 12.0).unwrap();
    assert_eq!(shifted.len(), 3);
    assert!((optimal_shift(&p, FamilySelector::PRIMARY).unwrap().y + PI / 4.0).abs() < 1e-15);
}

#[test]
fn real_axis_log_derivatives() {
    let (e, ld) = extrapolated_log_derivative(&params(3.0), 1.35, 501).unwrap();
    assert!((e - 1.35014099).abs() < 1e-7);
    assert!((ld + 0.477152).abs() < 1e-5, "{ld}");
    let (e, ld) = extrapolated_log_derivative(&params(1.0), 1.77, 501).unwrap();
    assert!((e - 1.76515725).abs() < 1e-7);
    assert!((ld - 1.0951374).abs() < 1e-5, "{ld}");
}

#[test]
fn other_family_sits_above_at_alpha_three() {
    let p = params(3.0);
    let fams = [FamilySelector::PRIMARY, FamilySelector::ALT];
    let alt = ground_state(&p, FamilySelector::ALT, 1000).unwrap();
    assert!((alt.extrapolated - 2.59524605).abs() < 1e-6, "{alt:?}");
    assert_eq!(merged_rank(&p, alt.extrapolated, &fams, 1000).unwrap(), 1);
    assert_eq!(merged_rank(&p, 1.3501409, &fams, 1000).unwrap(), 0);
}

#[test]
fn inverse_mode_recovers_alpha() {
    let policy = GridPolicy::new(600);
    let p = params(2.5);
    let e = family_levels(&p, FamilySelector::PRIMARY, 600, 5.0).unwrap()[0].energy;
    let a = solve_alpha_for_energy(0.0, FamilySelector::PRIMARY, &policy, e, 2.3, 2.7).unwrap();
    assert!((a - 2.5).abs() < 1e-3, "{a}");
}

#[test]
fn single_precision_pipeline() {
    let p = PotentialParams::new(2.0f32, 0.0).unwrap();
    let op = build_hamiltonian(&p, GridSpec::new(6.0f32, 300, 0.0).unwrap()).unwrap();
    let e = find_real_eigenvalues(&op, 0.5f32, 2.0, 0.05).unwrap()[0];
    assert!((e - 1.2114).abs() < 2e-3, "{e}");
}
