use std::f64::consts::PI;

use eo_core::arith::{lacunary, IntPolynomial};
use eo_core::averaging::{birkhoff, signal_avg, AverageSpec};
use eo_core::dynsys::{coboundary, orbit_values, FiniteSystem, Observable};
use eo_core::maximal::{hl_window_max, poly_maximal, shift_maximal, MaximalIndex};
use eo_core::oscillation::{block_sup, corner_blocks, oscillation_sum, AverageFamily, BlockPartition, CornerConfig};
use eo_core::signal::Signal;
use eo_core::spectral::{bourgain_identity_check, kernel_tail_sum, periodogram};
use eo_core::transference::{finite_j_factor, orbit_cauchy_schwarz_check};
use eo_core::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b))
}

fn signal(max_len: usize) -> impl Strategy<Value = Signal> {
    (-40i64..40, prop::collection::vec(complex(), 1..max_len)).prop_map(|(o, v)| Signal::new(o, v))
}

fn permutation(max_m: usize) -> impl Strategy<Value = FiniteSystem> {
    (1..=max_m, any::<u64>()).prop_map(|(m, seed)| FiniteSystem::random(m, seed).unwrap())
}

fn system_and_observable(max_m: usize) -> impl Strategy<Value = (FiniteSystem, Observable)> {
    permutation(max_m).prop_flat_map(|sys| {
        let m = sys.size();
        (Just(sys), prop::collection::vec(complex(), m).prop_map(Observable::new))
    })
}

/// `C(n, j)` for any integer `n` from the falling factorial.
fn binomial_oracle(n: i64, j: usize) -> i128 {
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for i in 0..j as i128 {
        num *= n as i128 - i;
        den *= i + 1;
    }
    num / den
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(s in signal(60), extra in 0usize..50) {
        let g = s.dft(2 * s.len() + extra).unwrap();
        let e = s.norm(2.0).unwrap().powi(2);
        prop_assert!((g.quadrature_abs2() / (2.0 * PI) - e).abs() <= 1e-10 * e.max(1e-300));
    }

    #[test]
    fn convolution_theorem(a in signal(50), b in signal(50)) {
        let c = a.convolve(&b);
        let size = 2 * c.len().max(a.len()).max(b.len()) + 2;
        let lhs = c.dft(size).unwrap();
        let rhs = a.dft(size).unwrap().mul(&b.dft(size).unwrap()).unwrap();
        let err = lhs.samples().iter().zip(rhs.samples()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-9 * a.norm(1.0).unwrap() * b.norm(1.0).unwrap());
    }

    #[test]
    fn shift_and_modulate_preserve_norms(s in signal(40), k in -100i64..100, theta in -PI..PI) {
        for r in [1.0, 2.0, 4.0, f64::INFINITY] {
            let n = s.norm(r).unwrap();
            prop_assert_eq!(s.shift(k).norm(r).unwrap(), n);
            prop_assert!((s.modulate(theta).norm(r).unwrap() - n).abs() <= 1e-12 * n);
        }
    }

    #[test]
    fn measure_preservation((sys, f) in system_and_observable(40), ints in prop::collection::vec(-1000i32..1000, 40)) {
        let fc = f.compose(&sys);
        prop_assert!((fc.mean() - f.mean()).norm() <= 1e-14);
        // integer values sum exactly in any order
        let m = sys.size();
        let g = Observable::from_real(&ints[..m].iter().map(|&v| v as f64).collect::<Vec<_>>());
        prop_assert_eq!(g.compose(&sys).mean(), g.mean());
    }

    #[test]
    fn telescoping((sys, g) in system_and_observable(32), x in any::<prop::sample::Index>(), n in 1u64..300) {
        let x = x.index(sys.size());
        let h = coboundary(&sys, &g).unwrap();
        // zero-based form: (1/N)·Σ_{n=0}^{N−1} h(T^n x) = (g(x) − g(T^N x))/N
        let zero_based: Complex64 = (0..n as i64).map(|k| h.at(sys.power(x, k))).sum::<Complex64>() / n as f64;
        let want = (g.at(x) - g.at(sys.power(x, n as i64))) / n as f64;
        prop_assert!((zero_based - want).norm() <= 1e-12);
        let b = birkhoff(&sys, &h, x, n).unwrap();
        prop_assert!(b.norm() <= 2.0 * g.sup_abs() / n as f64 + 1e-15);
    }

    #[test]
    fn orbits_are_periodic((sys, f) in system_and_observable(24), x in any::<prop::sample::Index>()) {
        let x = x.index(sys.size());
        let len = sys.cycle_len(x) as i64;
        let orbit = orbit_values(&sys, &f, x, 80).unwrap();
        for n in -80..=80 - len {
            prop_assert_eq!(orbit.get(n), orbit.get(n + len));
        }
        // the single-cycle shift is m-periodic
        let cyc = FiniteSystem::cyclic(sys.size()).unwrap();
        let o = orbit_values(&cyc, &f, x, 80).unwrap();
        let m = sys.size() as i64;
        for n in -80..=80 - m {
            prop_assert_eq!(o.get(n), o.get(n + m));
        }
    }

    #[test]
    fn periodic_limit_error(f in prop::collection::vec(complex(), 1..20), x in any::<prop::sample::Index>(), n in 1u64..2000) {
        let m = f.len();
        let sys = FiniteSystem::cyclic(m).unwrap();
        let f = Observable::new(f);
        let b = birkhoff(&sys, &f, x.index(m), n).unwrap();
        prop_assert!((b - f.mean()).norm() <= m as f64 * f.sup_abs() / n as f64 + 1e-12);
    }

    #[test]
    fn lacunary_tail_ratio(rho in 1.1f64..4.0) {
        let set = lacunary(rho, 1 << 40).unwrap();
        for w in set.members().windows(2).filter(|w| w[0] > 1000) {
            let ratio = w[1] as f64 / w[0] as f64;
            prop_assert!((ratio - rho).abs() <= 0.1 * rho);
        }
    }

    #[test]
    fn cesaro_average_is_a_convolution(s in signal(30), n in 1u64..20, x in -60i64..60) {
        let spec = AverageSpec::linear(IntPolynomial::identity());
        let got = signal_avg(&s, x, n, &spec).unwrap();
        // A_N s(x) = (s * k)(x) with k = (1/N)·1_{[−N, −1]}
        let kernel = Signal::new(-(n as i64), vec![Complex64::new(1.0 / n as f64, 0.0); n as usize]);
        let want = s.convolve(&kernel).get(x);
        prop_assert!((got - want).norm() <= 1e-12);
    }

    #[test]
    fn hl_window_inequality(a in prop::collection::vec(0.0f64..10.0, 1..256), r in prop::sample::select(vec![1.5, 2.0, 3.0])) {
        prop_assert!(hl_window_max(&a, r).unwrap().pass);
    }

    #[test]
    fn shift_maximal_bound_and_monotonicity(s in signal(40), r in prop::sample::select(vec![1.5, 2.0, 4.0]), n in 1u64..40) {
        let small = shift_maximal(&s, MaximalIndex::Full, n).unwrap();
        let large = shift_maximal(&s, MaximalIndex::Full, n + 7).unwrap();
        for x in s.offset() - n as i64 - 8..s.end() + 2 {
            prop_assert!(small.at(x) <= large.at(x));
        }
        let c = 2f64.powf(1.0 / r) * r / (r - 1.0);
        prop_assert!(large.norm(r).unwrap() <= c * s.norm(r).unwrap());
        let poly = poly_maximal(&s, &IntPolynomial::identity(), n).unwrap();
        prop_assert_eq!(poly.values, small.values);
    }

    #[test]
    fn kernel_tail_even_and_zero_at_origin(theta in 0.0f64..PI, rho in 1.2f64..5.0) {
        prop_assert_eq!(kernel_tail_sum(0.0, rho, 1 << 16).unwrap(), 0.0);
        let a = kernel_tail_sum(theta, rho, 1 << 16).unwrap();
        prop_assert_eq!(a, kernel_tail_sum(-theta, rho, 1 << 16).unwrap());
    }

    #[test]
    fn periodogram_mass_and_herglotz(v in prop::collection::vec(complex(), 2..80), extra in 0usize..64) {
        let n = v.len() - 1;
        let s = Signal::new(0, v);
        let est = periodogram(&s, n, 2 * n + extra, n - 1).unwrap();
        prop_assert!(est.mass_residual() <= 1e-10);
        prop_assert!(est.herglotz_residual() <= 1e-9);
    }

    #[test]
    fn bourgain_identity(f in signal(32), g in signal(32), x in -20i64..20, n in 1u64..64) {
        let m = 2 * (f.max_abs_index() as usize + n as usize + x.unsigned_abs() as usize) + 1;
        prop_assert!(bourgain_identity_check(&f, &g, x, n, m, 1e-8).unwrap().pass);
    }

    #[test]
    fn oscillation_of_zero_and_refinement(s in signal(50), rho_pow in 1u32..3, k in 2usize..6, cut_m in 1u32..9) {
        let rho = 2f64.powi(rho_pow as i32);
        let blocks = BlockPartition::powers(rho, k).unwrap();
        let zero = Signal::new(s.offset(), vec![Complex64::new(0.0, 0.0); s.len()]);
        prop_assert_eq!(oscillation_sum(&zero, &blocks, rho).unwrap().total, 0.0);
        let base = oscillation_sum(&s, &blocks, rho).unwrap();
        prop_assert!(base.per_block.iter().all(|&v| v >= 0.0));
        // inserting an admissible cut never decreases the total
        let cut = (rho as u64).pow(cut_m);
        if let Some(fine) = blocks.refine(cut) {
            let refined = oscillation_sum(&s, &fine, rho).unwrap();
            prop_assert!(refined.total >= base.total * (1.0 - 1e-12));
        }
    }

    #[test]
    fn block_sup_monotone_in_range(avgs in prop::collection::vec(prop::option::of(complex()), 64), lo in 1u64..30, mid in 0u64..30) {
        let set = lacunary(1.3, 64).unwrap();
        let hi = 64;
        let sub_hi = (lo + mid).min(hi);
        // same reference A_hi, smaller range
        let sub = set.between(lo, sub_hi).iter().filter_map(|&n| avgs[n as usize - 1])
            .filter_map(|a| avgs[hi as usize - 1].map(|r| (a - r).norm()))
            .fold(0.0, f64::max);
        prop_assert!(sub <= block_sup(&avgs, lo, hi, &set));
    }

    #[test]
    fn corner_bound_holds_when_nonempty(values in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 40), 1..6), eps in 0.05f64..1.0) {
        let fam = AverageFamily::new(values.iter().map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)).collect()).collect()).unwrap();
        let r = corner_blocks(&fam, &CornerConfig::new(eps)).unwrap();
        if !r.blocks.is_empty() {
            prop_assert!(r.lower_bound > r.threshold);
            prop_assert!(r.block_measures.iter().all(|&mu| mu > r.gamma));
        }
    }

    #[test]
    fn orbit_cauchy_schwarz((sys, f) in system_and_observable(20), j in 1u64..100) {
        let g = f.compose(&sys).product(&f);
        let r = orbit_cauchy_schwarz_check(&sys, &f, &g, j).unwrap();
        prop_assert!(r.pass);
        prop_assert!(r.params["identity_residual"].as_f64().unwrap() <= 1e-12);
    }

    #[test]
    fn finite_j_factor_decreases(n_bar in 1u64..50, j in 8u64..1000) {
        let j = j * n_bar;
        prop_assert!(finite_j_factor(j + 1, n_bar) < finite_j_factor(j, n_bar));
        prop_assert!(finite_j_factor(j, n_bar) > 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn binomial_integrality(coeffs in prop::collection::vec(-50i64..50, 1..5), n in -1_000_000i64..=1_000_000) {
        let p = IntPolynomial::from_binomial(coeffs.clone());
        let want: i128 = coeffs.iter().enumerate().map(|(j, &c)| c as i128 * binomial_oracle(n, j)).sum();
        match p.eval(n) {
            Ok(v) => prop_assert_eq!(v as i128, want),
            Err(_) => prop_assert!(i64::try_from(want).is_err()),
        }
    }
}
