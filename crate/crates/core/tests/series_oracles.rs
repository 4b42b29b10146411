use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpspine::quad::{integrate_to_infinity, Options};
use wpspine::real::{rel_diff, Real};
use wpspine::series::*;
use wpspine::trees::CuspMask;
use wpspine::wp_poly::{rat, wp_volume, PiPoly, Route};
use wpspine::Exec;

fn random_weight(rng: &mut ChaCha8Rng) -> AtomicWeight {
    let k = rng.gen_range(1..=3);
    let atoms: Vec<(BigRational, BigRational)> =
        (0..k).map(|_| (rat(rng.gen_range(1..20), rng.gen_range(1..10)), rat(rng.gen_range(0..30), rng.gen_range(1..8)))).collect();
    AtomicWeight::from_rationals(&atoms).unwrap()
}

#[test]
fn string_residual_vanishes_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let mu = random_weight(&mut rng);
        let r = solve_string::<PiPoly>(&mu, 12).unwrap();
        let z = z_series(&r, &mu).unwrap();
        assert!(z.coeffs().iter().all(|c| c.is_zero()), "{mu:?}");
        let mass: BigRational = mu.atoms().iter().map(|a| a.exact.clone().unwrap().0).sum();
        assert_eq!(r.coeff(1), PiPoly::constant(mass));
    }
}

#[test]
fn string_residual_small_in_real_mode() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let mu = random_weight(&mut rng);
        let r = solve_string::<Real>(&mu, 12).unwrap();
        let z = z_series(&r, &mu).unwrap();
        let scale = r.coeffs().iter().map(|c| c.abs().to_f64()).fold(1.0, f64::max);
        for c in z.coeffs() {
            assert!(c.abs().to_f64() < 1e-25 * scale, "{c:?}");
        }
        // exact and real modes agree
        let exact = solve_string::<PiPoly>(&mu, 12).unwrap().to_real();
        for k in 0..=12 {
            assert!(rel_diff(&r.coeff(k), &exact.coeff(k)) < 1e-90);
        }
    }
}

#[test]
fn eta_of_zero_weight_is_sinc() {
    for u in [0.0, 0.1, 0.25, 0.4, -0.3] {
        let e = eta(u, &AtomicWeight::zero(), 4).unwrap();
        assert!(rel_diff(&e.coeff(0), &sinc_2pi(u)) < 1e-90, "u={u}");
        assert!((1..=4).all(|k| e.coeff(k).is_zero()));
    }
}

fn order_one_closed_form(u: f64, l: f64) -> f64 {
    2.0 * PI / u * ((l * u).cosh() - (2.0 * PI * u).cos()) / (2.0 * PI * u).sin()
}

#[test]
fn order_one_coefficients() {
    for u in [0.1, 0.25, 0.4] {
        for l in [0i64, 1, 3] {
            let mu = AtomicWeight::from_rationals(&[(rat(1, 1), rat(l, 1))]).unwrap();
            let e = eta(u, &mu, 2).unwrap();
            let lf = l as f64;
            let want = ((2.0 * PI * u).cos() - (lf * u).cosh()) / (u * u);
            assert!((e.coeff(1).to_f64() - want).abs() < 1e-12 * want.abs().max(1.0));
            let x = xhat(u, &mu, 2).unwrap();
            assert!(rel_diff(&x.coeff(0), &Real::one()) < 1e-90);
            let want = order_one_closed_form(u, lf);
            assert!(((x.coeff(1).to_f64() - want) / want).abs() < 1e-12, "u={u} L={l}");
        }
    }
}

#[test]
fn xhat_is_even_in_u() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..5 {
        let mu = random_weight(&mut rng);
        let u: f64 = rng.gen_range(0.01..0.49);
        let a = xhat(u, &mu, 6).unwrap();
        let b = xhat(-u, &mu, 6).unwrap();
        for k in 0..=6 {
            assert!(rel_diff(&a.coeff(k), &b.coeff(k)) < 1e-12);
        }
    }
}

/// `(1/n!) Σ_{tuples} Π x · V₀,₃₊ₙ(0,0,0,K…)` from the exact volumes.
fn volume_generating_coefficient(atoms: &[(i64, i64)], n: usize) -> f64 {
    let vol = wp_volume(n + 2, &CuspMask::parse(&format!("11{}", "0".repeat(n))).unwrap(), Route::Anti, Exec::Sequential).unwrap();
    let mut total = 0.0;
    let mut idx = vec![0usize; n];
    loop {
        let mut lengths = vec![0.0, 0.0];
        let mut w = 1.0;
        for &i in &idx {
            lengths.push(atoms[i].1 as f64);
            w *= atoms[i].0 as f64;
        }
        total += w * vol.evaluate_numeric(&lengths).unwrap();
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < atoms.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    total / (1..=n).product::<usize>() as f64
}

#[test]
fn small_u_limit_matches_volumes() {
    let grids: [&[(i64, i64)]; 3] = [&[(1, 0)], &[(2, 1), (1, 3)], &[(1, 2), (3, 1), (1, 5)]];
    for atoms in grids {
        let mu = AtomicWeight::from_rationals(&atoms.iter().map(|&(x, k)| (rat(x, 1), rat(k, 1))).collect::<Vec<_>>()).unwrap();
        let x0 = xhat(0.0, &mu, 3).unwrap();
        let x_small = xhat(1e-7, &mu, 3).unwrap();
        for n in 1..=3 {
            let want = volume_generating_coefficient(atoms, n);
            let got = x0.coeff(n).to_f64();
            assert!(((got - want) / want).abs() < 1e-9, "n={n} {got} vs {want}");
            assert!(((x_small.coeff(n).to_f64() - want) / want).abs() < 1e-9);
        }
    }
}

fn opts() -> Options {
    Options { abs_tol: 1e-11, rel_tol: 1e-14, ..Options::default() }
}

#[test]
fn density_integrates_to_volume() {
    for l in [0.0, 1.0, 3.0] {
        let half = integrate_to_infinity(|p| x1_density(p.from_lo, l), 0.0, |x| x1_tail_bound(x.max(2.0), l), opts()).unwrap();
        let want = 2.0 * PI * PI + l * l / 2.0;
        assert!(((2.0 * half - want) / want).abs() < 1e-8, "L={l}");
    }
}

#[test]
fn density_laplace_transform() {
    for u in [0.1f64, 0.25, 0.4] {
        for l in [0.0f64, 1.0, 3.0] {
            let tail = |x: f64| 16.0 * (1.0 + (0.5 * l).cosh()) * ((2.0 * u - 1.0) * x.max(2.0)).exp() / (1.0 - 2.0 * u);
            let half =
                integrate_to_infinity(|p| (2.0 * u * p.x).cosh() * x1_density(p.from_lo, l), 0.0, tail, opts()).unwrap();
            let want = order_one_closed_form(u, l);
            assert!(((2.0 * half - want) / want).abs() < 1e-7, "u={u} L={l}");
        }
    }
}

#[test]
fn moment_relations() {
    let mu = AtomicWeight::from_rationals(&[(rat(1, 1), rat(0, 1))]).unwrap();
    let n = 30;
    let sol = solve_string_full::<Real>(&mu, n).unwrap();
    let m0 = m_series(0, &sol, &mu).unwrap();
    let m1 = m_series(1, &sol, &mu).unwrap();
    assert!(rel_diff(&m0.coeff(0), &Real::one()) < 1e-100);
    // Z(R(x)) = 0 with ∂Z/∂x = -1 gives M₀ = 1/R' and M₁ = -R''/R'³
    let d1 = sol.r.derivative();
    let d2 = d1.derivative();
    let inv = d1.reciprocal().unwrap();
    for k in 0..n - 2 {
        assert!(rel_diff(&m0.coeff(k), &inv.coeff(k)) < 1e-80);
        let want = d2.mul(&inv).mul(&inv).mul(&inv).neg();
        assert!(rel_diff(&m1.coeff(k), &want.coeff(k)) < 1e-80);
    }
    // M₁(x) < 0 for small x > 0
    for x in [1e-4f64, 1e-3, 1e-2] {
        let v: f64 = m1.coeffs().iter().enumerate().map(|(k, c)| c.to_f64() * x.powi(k as i32)).sum();
        assert!(v < 0.0);
    }
}

#[test]
fn second_moment_closed_form() {
    // E[D²] for one boundary of length L: u²-coefficient of the order-1 X̂ over twice its value
    for l in [0i64, 1, 3] {
        let lf = l as f64;
        let vol = 2.0 * PI.powi(2) + lf * lf / 2.0;
        let c2 = (lf.powi(4) - 16.0 * PI.powi(4)) / 24.0 + 2.0 * PI * PI / 3.0 * vol;
        let mu = AtomicWeight::from_rationals(&[(rat(1, 1), rat(l, 1))]).unwrap();
        let z = xhat_at_zero(&mu, 2).unwrap();
        let got = second_moment(&z, 1).to_f64();
        assert!((got - c2 / (2.0 * vol)).abs() < 1e-12, "L={l}: {got}");
    }
    assert!((second_moment(&xhat_at_zero(&AtomicWeight::parse("1:0").unwrap(), 2).unwrap(), 1).to_f64() - PI * PI / 6.0).abs() < 1e-13);
}

#[test]
fn variance_trend() {
    let rows = variance_pipeline(200).unwrap();
    assert_eq!(rows[0].variance, 0.0);
    let r50 = (rows[50].ratio - 1.0).abs();
    let r200 = (rows[200].ratio - 1.0).abs();
    assert!(r200 < r50 && r200 < 0.15, "{r50} {r200}");
    assert!((c0() - 2.404_825_557_695_773).abs() < 1e-10);
    // leading digits 2.3392…
    assert_eq!((c_wp() * 1e4).floor(), 23392.0);
}

fn series_from(v: &[i64], den: i64, order: usize) -> TruncatedSeries<BigRational> {
    TruncatedSeries::new(v.iter().map(|&x| BigRational::new(BigInt::from(x), BigInt::from(den))).collect(), order)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reciprocal_is_inverse(mut v in proptest::collection::vec(-9i64..10, 1..9), den in 1i64..5) {
        if v[0] == 0 { v[0] = 1; }
        let order = v.len() - 1;
        let f = series_from(&v, den, order);
        let prod = f.mul(&f.reciprocal().unwrap());
        prop_assert_eq!(prod, TruncatedSeries::constant(rat(1, 1), order));
    }

    #[test]
    fn reversion_inverts_composition(mut v in proptest::collection::vec(-9i64..10, 2..9), den in 1i64..5) {
        v[0] = 0;
        if v[1] == 0 { v[1] = 2; }
        let order = v.len() - 1;
        let f = series_from(&v, den, order);
        let g = f.reversion().unwrap();
        prop_assert_eq!(f.compose(&g).unwrap(), TruncatedSeries::variable(order));
        prop_assert_eq!(g.compose(&f).unwrap(), TruncatedSeries::variable(order));
    }

    #[test]
    fn product_is_commutative_and_distributive(
        a in proptest::collection::vec(-9i64..10, 5),
        b in proptest::collection::vec(-9i64..10, 5),
        c in proptest::collection::vec(-9i64..10, 5),
    ) {
        let (a, b, c) = (series_from(&a, 1, 4), series_from(&b, 1, 4), series_from(&c, 1, 4));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }
}
