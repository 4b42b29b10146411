use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpspine::trees::{enumerate_delaunay, CuspMask};
use wpspine::wp_poly::{delaunay_polytope_volume, rat, wp_volume, Monomial, Route, WPPolynomial};
use wpspine::Exec;

#[test]
fn routes_agree_and_are_homogeneous() {
    for n in 2..=6 {
        for bits in 0..(1u64 << n) {
            let mask = CuspMask::from_bits(n, bits).unwrap();
            let anti = wp_volume(n, &mask, Route::Anti, Exec::Parallel).unwrap();
            let ie = wp_volume(n, &mask, Route::InclusionExclusion, Exec::Parallel).unwrap();
            assert_eq!(anti, ie, "n={n} mask={bits:b}");
            assert_eq!(anti.homogeneous_degree(), Some(n as u32 - 2), "n={n} mask={bits:b}");
        }
    }
}

#[test]
fn mask_consistency() {
    for n in 2..=5 {
        let full = wp_volume(n, &CuspMask::all_positive(n).unwrap(), Route::Anti, Exec::Sequential).unwrap();
        for bits in 0..(1u64 << n) {
            let mask = CuspMask::from_bits(n, bits).unwrap();
            let direct = wp_volume(n, &mask, Route::InclusionExclusion, Exec::Sequential).unwrap();
            assert_eq!(full.apply_mask(&mask), direct);
        }
    }
}

#[test]
fn known_small_values() {
    // V_{0,5}(0,0,0,0,0) = 10 π⁴, V_{0,6}(0,...) = 244/3 π⁶
    let v5 = wp_volume(4, &CuspMask::all_cusps(4).unwrap(), Route::Anti, Exec::Sequential).unwrap();
    assert_eq!(v5, WPPolynomial::term(4, rat(10, 1), Monomial::from_dense(2, &[0; 4])));
    let v6 = wp_volume(5, &CuspMask::all_cusps(5).unwrap(), Route::Anti, Exec::Sequential).unwrap();
    assert_eq!(v6, WPPolynomial::term(5, rat(244, 3), Monomial::from_dense(3, &[0; 5])));
}

#[test]
fn per_tree_volumes_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 2..=6 {
        for bits in 0..(1u64 << n) {
            let mask = CuspMask::from_bits(n, bits).unwrap();
            for t in enumerate_delaunay(n, &mask).unwrap() {
                let vol = delaunay_polytope_volume(&t);
                let lengths: Vec<f64> =
                    (1..=n).map(|l| if mask.is_cusp(l) { 0.0 } else { rng.gen_range(0.01..5.0) }).collect();
                assert!(vol.evaluate_numeric(&lengths).unwrap() > 0.0);
            }
        }
    }
}

/// Hit rate of the Delaunay condition on the product of two uniform
/// triangles of angle sum π.
#[test]
fn caterpillar_monte_carlo_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 2_000_000;
    let angle = |rng: &mut ChaCha8Rng| {
        // one angle of a uniform point of the size-π 2-simplex
        let (a, b): (f64, f64) = (rng.gen(), rng.gen());
        std::f64::consts::PI * a.min(b)
    };
    let hits = (0..trials).filter(|_| angle(&mut rng) + angle(&mut rng) < std::f64::consts::PI).count();
    let estimate = hits as f64 / trials as f64;
    let t = &enumerate_delaunay(4, &CuspMask::all_cusps(4).unwrap()).unwrap()[0];
    let exact = delaunay_polytope_volume(t).coefficient(&Monomial::from_dense(2, &[0; 4])).to_f64().unwrap();
    // product volume 2² (π²/2)² = π⁴, so the π⁴ coefficient is the hit rate
    assert!((estimate - exact).abs() < 1e-3, "{estimate} vs {exact}");
}
