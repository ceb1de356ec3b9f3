use btcert::assembly::leading_ratio;
use btcert::density_second::{g2_closed_term, g2_tail};
use btcert::kernels::{kernel_g, laplace_g, majorant_g4, smooth_cutoff_f};
use btcert::numerics::{integrate, max1d, Maximizer};
use btcert::*;
use proptest::prelude::*;

fn bumpy(a: f64, b: f64, c: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| (a * x).sin() + b * (c * x).cos() - 0.1 * x * x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn max1d_is_deterministic_and_dominates_probes(
        a in 0.5f64..6.0, b in -1.0f64..1.0, c in 0.5f64..4.0,
        probes in prop::collection::vec(0.0f64..1.0, 1..20),
    ) {
        let f = bumpy(a, b, c);
        let r1 = max1d(&f, -3.0, 3.0, 1e-8).unwrap();
        let r2 = max1d(&f, -3.0, 3.0, 1e-8).unwrap();
        prop_assert_eq!(r1.value.to_bits(), r2.value.to_bits());
        prop_assert_eq!(&r1.argmax, &r2.argmax);
        for u in probes {
            prop_assert!(r1.value >= f(-3.0 + 6.0 * u) - 1e-12);
        }
    }

    #[test]
    fn max1d_stable_under_grid_doubling(a in 0.5f64..6.0, b in -1.0f64..1.0, c in 0.5f64..4.0) {
        let f = bumpy(a, b, c);
        let base = Maximizer::default().max1d(&f, -3.0, 3.0, 1e-8).unwrap();
        let fine = Maximizer { grid_1d: 20_001, ..Maximizer::default() }.max1d(&f, -3.0, 3.0, 1e-8).unwrap();
        prop_assert!((base.value - fine.value).abs() < 1e-8);
    }

    #[test]
    fn integrate_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0.1f64..3.0) {
        let f = |t: f64| (k * t).sin();
        let g = |t: f64| (t * t + 1.0).ln();
        let lhs = integrate(|t| a * f(t) + b * g(t), 0.0, 2.0, 1e-12).unwrap();
        let rhs = a * integrate(f, 0.0, 2.0, 1e-12).unwrap() + b * integrate(g, 0.0, 2.0, 1e-12).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn ramp_stays_in_unit_interval(t in -2.0f64..3.0, log_x in 5.0f64..100.0, eps in 0.01f64..1.0) {
        let p = RampParams64::new(log_x, eps).unwrap();
        let v = smooth_cutoff_f(t, &p);
        prop_assert!((0.0..=1.0).contains(&v));
        if t >= 0.5 + eps / log_x && t <= 1.0 {
            prop_assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn quintic_kernel_is_nonnegative(gamma in 0.5f64..2.0, u in 0.0f64..1.2) {
        let p = QuinticKernelParams64::new(gamma).unwrap();
        prop_assert!(kernel_g(u * 2.0 * gamma, &p).unwrap() >= -1e-12);
    }

    #[test]
    fn g4_majorizes_and_decreases(x in -1.5f64..1.5, y in 0.05f64..20.0, dy in 0.01f64..5.0, gamma in 1.0f64..1.6) {
        let p = QuinticKernelParams64::new(gamma).unwrap();
        let g4 = majorant_g4(x, y, &p).unwrap();
        prop_assert!(laplace_g(Complex64::new(x, y), &p).re.abs() <= g4 * (1.0 + 1e-12));
        prop_assert!(majorant_g4(x, y + dy, &p).unwrap() <= g4);
    }

    #[test]
    fn b2_decreasing(l in 0.0f64..5.0, dl in 1e-3f64..2.0) {
        let w = SieveWeights64::default();
        prop_assert!(b2(l + dl, &w).unwrap() < b2(l, &w).unwrap());
        prop_assert!(b2(l, &w).unwrap() <= b2(0.0, &w).unwrap());
    }

    #[test]
    fn c1_orders_and_dominates_b1(l in 1e-3f64..3.0, k in 0.3f64..1.0) {
        let q = c1(l, k, CharacterClass::Quarter, 0.0).unwrap();
        let t = c1(l, k, CharacterClass::Third, 0.0).unwrap();
        prop_assert!(q < t);
        prop_assert!(b1(l, k).unwrap() <= q);
    }

    #[test]
    fn c1_decreasing(l in 0.0f64..3.0, dl in 1e-3f64..1.0) {
        prop_assert!(
            c1(l + dl, 0.66, CharacterClass::Third, 0.0).unwrap() < c1(l, 0.66, CharacterClass::Third, 0.0).unwrap()
        );
    }

    #[test]
    fn siegel_curve_is_convex(coeff in 0.5f64..5.0, exponent in 1.0f64..1.2, m in 7.0f64..9.0, l in 0.02f64..0.34) {
        let s = SiegelCurve64 { coeff, exponent, m };
        let h = 0.005;
        prop_assert!(s.eval(l - h) + s.eval(l + h) - 2.0 * s.eval(l) >= -1e-12);
    }

    #[test]
    fn closed_g2_terms_non_increasing(c in 7usize..100_000, lmin in 0.1f64..2.0) {
        let w = SieveWeights64::default().with_lambda_min(lmin).unwrap();
        prop_assert!(g2_closed_term(c + 1, &w) <= g2_closed_term(c, &w));
    }

    #[test]
    fn partition_identity_holds(q in 3u64..60, x in 100u64..20_000) {
        prop_assume!(x > q);
        let r = bt_report(q, x).unwrap();
        prop_assert!(r.partition_identity());
    }

    #[test]
    fn psi_minus_theta_is_prime_power_excess(q in 3u64..30, a in 1u64..30, x in 2u64..50_000) {
        prop_assume!(a < q && (2..=a).all(|d| !(a % d == 0 && q % d == 0)));
        let excess: f64 = sieve_primes(x).unwrap().iter().map(|&p| {
            let mut s = 0.0;
            let mut pe = p * p;
            while pe <= x {
                if pe % q == a {
                    s += (p as f64).ln();
                }
                pe *= p;
            }
            s
        }).sum();
        let diff = psi_ap(x, q, a).unwrap() - theta_ap(x, q, a).unwrap();
        prop_assert!(diff >= -1e-9);
        prop_assert!((diff - excess).abs() < 1e-8);
    }

    #[test]
    fn li_envelope_and_growth(x in 100.0f64..1e9) {
        let v = li(x).unwrap();
        let base = x / x.ln();
        prop_assert!(v >= base && v <= 1.2 * base + 10.0);
        prop_assert!(li(x + 1.0).unwrap() > v);
    }
}

#[test]
fn tail_partial_sums_below_arctan_bound() {
    for &lmin in &[0.35, 0.5, 1.0] {
        let w = SieveWeights64::default().with_lambda_min(lmin).unwrap();
        let partial: f64 = (102..=100_000).map(|c| g2_closed_term(c, &w)).sum();
        assert!(partial <= g2_tail(&w), "lambda_min {lmin}");
    }
}

#[test]
fn leading_ratio_decreasing_for_large_m() {
    let w = SieveWeights64::default();
    for &m in &[7.5, 7.999] {
        let p = AssemblyParams64 { k: 0.66, cls: CharacterClass::Third, delta: 0.0, weights: w, c2: 1.0 };
        let ratio = |l: f64| (-(m * l)).exp() * c1(l, 0.66, CharacterClass::Third, 0.0).unwrap() / b1(l, 0.66).unwrap();
        let mut prev = f64::INFINITY;
        let mut prev_e = f64::INFINITY;
        for i in 0..=270 {
            let l = 0.3 + 0.01 * i as f64;
            let r = ratio(l);
            let e = leading_ratio(l, m, &p).unwrap();
            assert!(r < prev && e < prev_e, "M={m} lambda={l}");
            prev = r;
            prev_e = e;
        }
    }
}

#[test]
fn monotone_helpers_on_grids() {
    let w = SieveWeights64::default();
    let mut prev_b = f64::INFINITY;
    let mut prev_x = f64::INFINITY;
    for i in 0..=490 {
        let l = 0.1 + 0.01 * i as f64;
        let kb = (-0.66 * l).exp() / b1(l, 0.66).unwrap();
        let xb = (-2.0 * 1.623 * l).exp() / b2(l, &w).unwrap();
        assert!(kb < prev_b && xb < prev_x, "lambda={l}");
        prev_b = kb;
        prev_x = xb;
    }
}

#[test]
fn g2_decreases_with_lambda_min() {
    let w = SieveWeights64::default();
    let a = g2_total(&w).unwrap();
    let b = g2_total(&w.with_lambda_min(0.5).unwrap()).unwrap();
    assert!(b < a);
    assert_eq!(a.to_bits(), g2_total(&w).unwrap().to_bits());
}
