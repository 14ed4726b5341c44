#![allow(dead_code)]

use num_complex::Complex64;
use num_traits::Signed;
use proptest::prelude::*;
use pt_sinh::contour::{optimal_shift, FamilySelector};
use pt_sinh::discretization::GridSpec;
use pt_sinh::potential::PotentialParams;
use pt_sinh::{FieldScalar, Hp};

pub fn params() -> impl Strategy<Value = PotentialParams<f64>> {
    (0.5f64..6.0, -0.5f64..0.5).prop_map(|(a, b)| PotentialParams::new(a, b).unwrap())
}

/// A random potential and a grid inside its admissible shift window.
pub fn pt_grid() -> impl Strategy<Value = (PotentialParams<f64>, GridSpec<f64>)> {
    (params(), 3.0f64..8.0, 10usize..400, 0.0f64..1.0).prop_map(|(p, x_max, n, t)| {
        let c = optimal_shift(&p, FamilySelector::PRIMARY).unwrap();
        let y = c.y_minus + t * (c.y_plus - c.y_minus);
        (p, GridSpec::new(x_max, n, y).unwrap())
    })
}

/// Laplace expansion along the first row.
pub fn cofactor_det(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..n {
        if m[0][j] == Complex64::new(0.0, 0.0) {
            continue;
        }
        let minor: Vec<Vec<Complex64>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, v)| *v).collect())
            .collect();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += m[0][j] * cofactor_det(&minor) * sign;
    }
    total
}

fn decimals(printed: &str) -> usize {
    printed.split_once('.').map_or(0, |(_, f)| f.len())
}

/// True when `printed` is `ours` rounded or truncated to the printed number of decimals.
pub fn matches_printed(ours: &Hp, printed: &str) -> bool {
    let p = Hp::from_decimal(printed).expect("bad literal");
    let ulp = Hp::from_decimal(&format!("1e-{}", decimals(printed))).unwrap();
    let half = ulp.clone() / Hp::from_f64_lossy(2.0);
    let rounded = (ours.clone() - p.clone()).abs() <= half;
    let excess = ours.abs() - p.abs();
    let truncated = excess >= Hp::from_f64_lossy(0.0) && excess < ulp;
    rounded || truncated
}

#[test]
fn printed_matching_rule() {
    let x = Hp::from_decimal("1.23456789").unwrap();
    assert!(matches_printed(&x, "1.2346"));
    assert!(matches_printed(&x, "1.2345"));
    assert!(!matches_printed(&x, "1.2344"));
    let y = Hp::from_decimal("-0.47715206").unwrap();
    assert!(matches_printed(&y, "-0.4771521"));
    assert!(matches_printed(&y, "-0.4771520"));
    assert!(!matches_printed(&y, "-0.4771522"));
}
