//! Randomized property tests for the algebraic layer: graded antisymmetry
//! and associativity of the wedge, the contraction Leibniz rule, torus
//! integration, profile parity, and the ε-scaling law.

use bmsymp::forms::{contract, ChartPoint, FormValue, Harmonic, TrigPoly, VectorValue};
use bmsymp::profile::{build_even_profile, build_odd_profile, TailMode};
use proptest::prelude::*;

const DIM: usize = 4;

fn arb_form_value(degree: usize) -> impl Strategy<Value = FormValue> {
    // enumerate the index tuples once, then draw one coefficient per tuple
    let tuples: Vec<Vec<usize>> = index_tuples(DIM, degree);
    let n = tuples.len();
    prop::collection::vec(-3.0f64..3.0, n).prop_map(move |coeffs| {
        let mut v = FormValue::zero(DIM, degree);
        for (t, c) in tuples.iter().zip(coeffs) {
            v.set(t, c);
        }
        v
    })
}

fn index_tuples(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(i + 1, dim, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, dim, degree, &mut Vec::new(), &mut out);
    out
}

fn arb_vector() -> impl Strategy<Value = VectorValue> {
    prop::collection::vec(-3.0f64..3.0, DIM).prop_map(VectorValue::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_antisymmetry_odd_degrees(a in arb_form_value(1), b in arb_form_value(1)) {
        // deg 1 ∧ deg 1: a∧b = -b∧a
        let diff = a.wedge(&b).unwrap().add(&b.wedge(&a).unwrap()).norm_max();
        prop_assert!(diff <= 1e-12, "antisymmetry defect {diff}");
    }

    #[test]
    fn wedge_symmetry_mixed_degrees(a in arb_form_value(1), b in arb_form_value(2)) {
        // deg 1 ∧ deg 2: a∧b = +b∧a
        let diff = a.wedge(&b).unwrap().sub(&b.wedge(&a).unwrap()).norm_max();
        prop_assert!(diff <= 1e-12, "graded symmetry defect {diff}");
    }

    #[test]
    fn wedge_associativity(
        a in arb_form_value(1),
        b in arb_form_value(1),
        c in arb_form_value(2),
    ) {
        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert!(left.sub(&right).norm_max() <= 1e-12);
    }

    #[test]
    fn wedge_bilinearity(
        a in arb_form_value(1),
        b in arb_form_value(1),
        c in arb_form_value(1),
        s in -2.0f64..2.0,
    ) {
        let lhs = a.add(&b.scaled(s)).wedge(&c).unwrap();
        let rhs = a.wedge(&c).unwrap().add(&b.wedge(&c).unwrap().scaled(s));
        prop_assert!(lhs.sub(&rhs).norm_max() <= 1e-11);
    }

    #[test]
    fn wedge_power_matches_repeated_wedge(a in arb_form_value(2), p in 0usize..=2) {
        let pow = a.wedge_power(p).unwrap();
        let mut folded = FormValue::constant(DIM, 1.0);
        for _ in 0..p {
            folded = folded.wedge(&a).unwrap();
        }
        prop_assert!(pow.sub(&folded).norm_max() <= 1e-10);
    }

    #[test]
    fn contraction_graded_leibniz(
        v in arb_vector(),
        a in arb_form_value(1),
        b in arb_form_value(2),
    ) {
        let lhs = contract(&v, &a.wedge(&b).unwrap()).unwrap();
        let rhs = contract(&v, &a)
            .unwrap()
            .wedge(&b)
            .unwrap()
            // deg a = 1, so the second term carries a minus sign
            .add(&a.wedge(&contract(&v, &b).unwrap()).unwrap().scaled(-1.0));
        prop_assert!(lhs.sub(&rhs).norm_max() <= 1e-11);
    }

    #[test]
    fn contraction_squares_to_zero(v in arb_vector(), a in arb_form_value(2)) {
        let once = contract(&v, &a).unwrap();
        let twice = contract(&v, &once).unwrap();
        prop_assert!(twice.norm_max() <= 1e-12);
    }

    #[test]
    fn torus_integral_kills_nonconstant_harmonics(
        axis in 1usize..=3,
        freq in 1u32..=3,
        amp in -2.0f64..2.0,
        phase_cos in any::<bool>(),
    ) {
        let h = if phase_cos { Harmonic::Cos(freq) } else { Harmonic::Sin(freq) };
        let t = TrigPoly::harmonic(axis, h, amp).add(&TrigPoly::constant(1.25));
        let integral = t.integrate_torus(3);
        let volume = (std::f64::consts::TAU).powi(3);
        prop_assert!((integral - 1.25 * volume).abs() <= 1e-9 * volume);
    }

    #[test]
    fn trig_product_matches_pointwise(
        f1 in 1u32..=2,
        f2 in 1u32..=2,
        x in -0.9f64..0.9,
        th in 0.0f64..6.28,
    ) {
        let a = TrigPoly::harmonic(1, Harmonic::Sin(f1), 1.3);
        let b = TrigPoly::harmonic(1, Harmonic::Cos(f2), -0.7);
        let p = ChartPoint::new(x, &[th]).unwrap();
        let lhs = a.mul(&b).eval(&p);
        prop_assert!((lhs - a.eval(&p) * b.eval(&p)).abs() <= 1e-12);
    }

    #[test]
    fn even_profile_is_odd_function(k in 1usize..=2, t in -3.0f64..3.0) {
        let p = build_even_profile(k, 2 * k + 2).unwrap();
        let f_pos = p.eval(t, 0).unwrap();
        let f_neg = p.eval(-t, 0).unwrap();
        prop_assert!((f_pos + f_neg).abs() <= 1e-12 * f_pos.abs().max(1.0));
    }

    #[test]
    fn odd_profile_is_even_function(k in 0usize..=1, t in -3.0f64..3.0) {
        let p = build_odd_profile(k, 2 * k + 2, TailMode::Corrected).unwrap();
        let f_pos = p.eval(t, 0).unwrap();
        let f_neg = p.eval(-t, 0).unwrap();
        prop_assert!((f_pos - f_neg).abs() <= 1e-12 * f_pos.abs().max(1.0));
    }

    #[test]
    fn scaling_law_relates_scaled_and_unscaled(
        k in 1usize..=2,
        r in 0usize..=1,
        t in -2.5f64..2.5,
        eps in 0.05f64..0.4,
    ) {
        // f_eps(x) = eps^{-(2k-1)} f(x/eps)  =>
        // f_eps^{(r)}(eps t) = eps^{-(2k-1)-r} f^{(r)}(t)
        let p = build_even_profile(k, 2 * k + 2).unwrap();
        let scaled = p.eval_scaled(eps, eps * t, r).unwrap();
        let direct = eps.powi(-((2 * k - 1 + r) as i32)) * p.eval(t, r).unwrap();
        let denom = direct.abs().max(1.0);
        prop_assert!((scaled - direct).abs() <= 1e-10 * denom);
    }
}
