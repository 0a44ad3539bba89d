//! Cross-module invariants.

use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

use selfaction_core::densities::{bilinear, volume_reduce, Bispinor, Gamma};
use selfaction_core::loglaurent::rat;
use selfaction_core::mass::{condition_audit, solve_eq29, solve_exact_condition, MassCondition, RootSearch};
use selfaction_core::potentials::PhysicalConstants;
use selfaction_core::quadrature::{exp_integral_e1, weighted_integral, QuadTolerance};
use selfaction_core::series::{iterate_first_family, iterate_second_family, product_density};
use selfaction_core::{Execution, LogLaurentPoly};

fn ratio() -> impl Strategy<Value = BigRational> {
    (-40i64..40, 1i64..20).prop_filter("non-zero", |(n, _)| *n != 0).prop_map(|(n, d)| rat(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn families_are_linear_in_their_norm(a0 in ratio(), k in 1usize..4) {
        let unit = iterate_first_family(BigRational::one(), k);
        let scaled = iterate_first_family(a0.clone(), k);
        for j in 0..=k {
            prop_assert_eq!(&scaled.upper[j], &unit.upper[j].scale(&a0));
            prop_assert_eq!(&scaled.lower[j], &unit.lower[j].scale(&a0));
        }
        prop_assert!(scaled.satisfies_recurrence() && scaled.satisfies_boundary());
        let second = iterate_second_family(a0.clone(), k);
        prop_assert!(second.satisfies_recurrence() && second.satisfies_boundary());
    }

    #[test]
    fn product_density_is_bilinear(a0 in ratio(), b0 in ratio()) {
        let unit = product_density(&iterate_first_family(BigRational::one(), 2), &iterate_second_family(BigRational::one(), 2), 2).unwrap();
        let scaled = product_density(&iterate_first_family(a0.clone(), 2), &iterate_second_family(b0.clone(), 2), 2).unwrap();
        let norm = &a0 * &b0;
        for (u, s) in unit.xi.iter().zip(&scaled.xi) {
            prop_assert_eq!(&u.scale(&norm), s);
        }
        prop_assert_eq!(unit.per_unit_norm(), scaled.per_unit_norm());
    }

    #[test]
    fn weighted_integral_is_linear(eta in 1e-3f64..2.0, e1 in -3i32..3, e2 in -3i32..3, l in 0u32..2, c in -5i64..5) {
        let tol = QuadTolerance::default();
        let p = LogLaurentPoly::monomial(rat(c, 3), e1, l);
        let q = LogLaurentPoly::power(e2);
        let sum = weighted_integral(eta, &(&p + &q), &tol).unwrap();
        let parts = weighted_integral(eta, &p, &tol).unwrap() + weighted_integral(eta, &q, &tol).unwrap();
        prop_assert!((sum - parts).abs() <= 1e-9 * (sum.abs() + parts.abs()).max(1e-12));
    }

    #[test]
    fn e1_is_decreasing_and_convex(x in 1e-4f64..20.0, d in 1e-3f64..1.0) {
        let (a, b, c) = (exp_integral_e1(x).unwrap(), exp_integral_e1(x + d).unwrap(), exp_integral_e1(x + 2.0 * d).unwrap());
        prop_assert!(a > b && b > c);
        prop_assert!(a - b >= b - c);
    }

    #[test]
    fn time_density_is_symmetric_in_its_arguments(first_a in any::<bool>(), first_b in any::<bool>()) {
        let make = |first: bool, u: &str, l: &str| if first { Bispinor::first(u, l) } else { Bispinor::second(u, l) };
        let (a, b) = (make(first_a, "F", "G"), make(first_b, "f", "g"));
        for g in [Gamma::T, Gamma::Five, Gamma::XY, Gamma::XY5] {
            prop_assert_eq!(bilinear(&a, &b, g), bilinear(&b, &a, g));
        }
        let reduced = volume_reduce(&bilinear(&a, &b, Gamma::T));
        prop_assert!(reduced.is_real());
    }

    #[test]
    fn closed_form_mass_grows_with_alpha(alpha in 1e-4f64..2e-2) {
        let c = PhysicalConstants { alpha, ..PhysicalConstants::default() };
        let lo = solve_eq29(alpha, -0.51, &c, &RootSearch::closed_form(), Execution::Sequential).unwrap();
        let c2 = PhysicalConstants { alpha: alpha * 1.1, ..c };
        let hi = solve_eq29(alpha * 1.1, -0.51, &c2, &RootSearch::closed_form(), Execution::Sequential).unwrap();
        prop_assert!(hi.m_nu_ev > lo.m_nu_ev);
    }
}

#[test]
fn exact_root_is_independent_of_norm_and_execution() {
    let c = PhysicalConstants::default();
    let tol = QuadTolerance::default();
    let solve = |a0: BigRational, b0: BigRational, exec| {
        let first = iterate_first_family(a0, 3);
        let second = iterate_second_family(b0, 3);
        solve_exact_condition(&first, &second, c.alpha, 3, &c, &RootSearch::default(), tol, exec).unwrap()
    };
    let reference = solve(BigRational::one(), BigRational::one(), Execution::Sequential);
    let scaled = solve(rat(-7, 3), rat(5, 2), Execution::Parallel);
    assert_eq!(reference.eta_root, scaled.eta_root);
    assert_eq!(reference.m_nu_ev, scaled.m_nu_ev);
    assert!((reference.m_nu_ev - 1.7725).abs() < 1e-3);
}

#[test]
fn audit_contributions_sum_to_condition() {
    let c = PhysicalConstants::default();
    let tol = QuadTolerance::default();
    let first = iterate_first_family(BigRational::one(), 3);
    let second = iterate_second_family(BigRational::one(), 3);
    let eta = 2e-3;
    let rows = condition_audit(&first, &second, c.alpha, eta, 3, tol).unwrap();
    let total: f64 = rows.iter().map(|r| r.contribution).sum();
    let phi = MassCondition::new(&first, &second, c.alpha, 3, tol).unwrap().phi(eta).unwrap();
    assert!((total - phi).abs() <= 1e-12 * phi.abs().max(rows.iter().map(|r| r.contribution.abs()).fold(0.0, f64::max)));
}
