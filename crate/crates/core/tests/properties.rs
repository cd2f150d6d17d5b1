//! Property tests: ring axioms for the truncated series arithmetic,
//! inverse round trips, evaluation consistency, serialization round trips,
//! and the coefficient symmetry of structure-map images.

use std::collections::BTreeMap;

use jacform::jacobi::{structure_map, Classification, JacobiSeries};
use jacform::modular::{eisenstein, modular_form_basis, ModularForm};
use jacform::qseries::{QSeries, EXP_DEN};
use jacform::rat::{rat, rat_int, Rat};
use num::complex::Complex64;
use num::Zero;
use proptest::prelude::*;

fn rat_strategy() -> impl Strategy<Value = Rat> {
    (-9i64..10, 1i64..5).prop_map(|(n, d)| rat(n, d))
}

fn qseries_strategy() -> impl Strategy<Value = QSeries> {
    (
        proptest::collection::btree_map(-24i64..72, rat_strategy(), 0..10),
        72i64..96,
    )
        .prop_map(|(m, trunc)| QSeries::from_coeffs(EXP_DEN, m, Some(trunc)))
}

fn invertible_qseries_strategy() -> impl Strategy<Value = QSeries> {
    (qseries_strategy(), -6i64..7, rat_strategy())
        .prop_map(|(s, lead_exp, lead)| {
            let lead = if lead.is_zero() { rat_int(1) } else { lead };
            let mono = QSeries::monomial(lead, lead_exp, EXP_DEN).truncate(96);
            // shift the tail above the leading monomial so it stays leading
            let tail = s.shift(lead_exp + 1 - s.min_key().unwrap_or(0), EXP_DEN).truncate(96);
            mono.add(&tail)
        })
}

fn jacobi_strategy() -> impl Strategy<Value = JacobiSeries> {
    (
        proptest::collection::btree_map((0i64..4, -3i64..4), rat_strategy(), 0..8),
        1i64..4,
    )
        .prop_map(|(entries, index)| {
            let mut layers: BTreeMap<i64, jacform::jacobi::Layer> = BTreeMap::new();
            for ((n, r), c) in entries {
                layers.entry(n * EXP_DEN).or_default().insert(r, c);
            }
            JacobiSeries::from_coeffs(rat_int(0), rat_int(index), EXP_DEN, layers, Some(5 * EXP_DEN))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in qseries_strategy(), b in qseries_strategy(), c in qseries_strategy()) {
        let ab = a.mul(&b);
        let ba = b.mul(&a);
        prop_assert_eq!(&ab, &ba);
        let abc1 = ab.mul(&c);
        let abc2 = a.mul(&b.mul(&c));
        prop_assert_eq!(abc1, abc2);
        let dist1 = a.mul(&b.add(&c));
        let dist2 = a.mul(&b).add(&a.mul(&c));
        // distributivity up to the (possibly differing) truncation bound
        let t = dist1.trunc().unwrap().min(dist2.trunc().unwrap());
        prop_assert_eq!(dist1.truncate(t), dist2.truncate(t));
    }

    #[test]
    fn addition_group_axioms(a in qseries_strategy(), b in qseries_strategy()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        let zero = QSeries::zero(EXP_DEN, None);
        prop_assert_eq!(a.add(&zero), a.clone());
        let diff = a.sub(&a);
        prop_assert!(diff.is_zero());
    }

    #[test]
    fn inverse_round_trip(a in invertible_qseries_strategy()) {
        let inv = a.pow(-1).unwrap();
        let one = a.mul(&inv);
        prop_assert_eq!(one.coeff(0), rat_int(1));
        prop_assert_eq!(one.num_terms(), 1);
    }

    #[test]
    fn eval_is_additive_and_multiplicative(
        a in qseries_strategy(),
        b in qseries_strategy(),
        im in 0.9f64..1.4,
        re in -0.4f64..0.4,
    ) {
        let tau = Complex64::new(re, im);
        let ea = a.eval(tau);
        let eb = b.eval(tau);
        let sum = a.add(&b).eval(tau);
        let add_slack = 1e-9 * (1.0 + ea.value.norm() + eb.value.norm());
        prop_assert!(
            (sum.value - (ea.value + eb.value)).norm()
                <= ea.error + eb.error + sum.error + add_slack
        );
        let prod = a.mul(&b).eval(tau);
        let mul_slack = 1e-9 * (1.0 + ea.value.norm() * eb.value.norm());
        let budget = prod.error
            + ea.error * eb.value.norm()
            + eb.error * ea.value.norm()
            + ea.error * eb.error
            + mul_slack;
        prop_assert!(
            (prod.value - ea.value * eb.value).norm() <= budget,
            "residual {} > budget {}",
            (prod.value - ea.value * eb.value).norm(),
            budget
        );
    }

    #[test]
    fn qseries_json_round_trip(a in qseries_strategy()) {
        let js = serde_json::to_string(&a).unwrap();
        let back: QSeries = serde_json::from_str(&js).unwrap();
        prop_assert_eq!(a, back);
    }

    #[test]
    fn jacobi_json_round_trip(a in jacobi_strategy()) {
        let js = serde_json::to_string(&a).unwrap();
        let back: JacobiSeries = serde_json::from_str(&js).unwrap();
        prop_assert_eq!(a, back);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn structure_map_images_are_symmetric_weak_forms(
        coeffs in proptest::collection::vec(rat_strategy(), 3),
        weight in prop_oneof![Just(4i64), Just(6)],
        index in 1i64..3,
    ) {
        let order = 5;
        let mut forms: Vec<ModularForm> = Vec::new();
        for i in 0..=index {
            let k_i = weight + 2 * i;
            let basis = modular_form_basis(k_i, order + 1).unwrap();
            let c = coeffs.get(i as usize).cloned().unwrap_or_else(|| rat_int(1));
            match basis.into_iter().next() {
                Some(f) => forms.push(f.scalar_mul(&c)),
                None => forms.push(ModularForm::zero(k_i, order + 1)),
            }
        }
        let phi = structure_map(&forms, weight, index, order).unwrap();
        let rep = phi.elliptic_coefficient_symmetry(&[-2, -1, 0, 1, 2]).unwrap();
        prop_assert!(rep.passed(), "violation {:?}", rep.violation);
        let class = phi.classify().unwrap();
        let violates = matches!(class, Classification::ViolatesWeakBound { .. });
        prop_assert!(!violates);
    }
}

#[test]
fn eisenstein_slots_span_images_of_full_rank() {
    // Injectivity of the structure map on the Eisenstein slots at (4, 2):
    // coefficient vectors of the three images are independent.
    let images = jacform::jacobi::x_power_basis(4, 2, 6).unwrap();
    let mut rows = Vec::new();
    for p in &images {
        let mut row = Vec::new();
        for n in 0..4i64 {
            for r in -4..=4i64 {
                row.push(p.coeff_nr(n, r));
            }
        }
        rows.push(row);
    }
    assert!(jacform::linalg::RatMat::from_rows(rows).rows_independent());
}

#[test]
fn eisenstein_is_exactly_the_divisor_formula() {
    // pin the q^2 coefficients used throughout: sigma_3(2) = 9, sigma_5(2) = 33
    assert_eq!(eisenstein(4, 4).unwrap().coeff(2), rat_int(240 * 9));
    assert_eq!(eisenstein(6, 4).unwrap().coeff(2), rat_int(-504 * 33));
}
