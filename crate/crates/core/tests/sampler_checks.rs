use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wpspine::geometry::{validate, Mode};
use wpspine::sampler::*;
use wpspine::series::{second_moment, x1_density, xhat_at_zero, AtomicWeight};
use wpspine::trees::{enumerate_delaunay, CuspMask};
use wpspine::wp_poly::delaunay_polytope_volume;
use wpspine::Exec;

#[test]
fn two_boundaries_give_one_tree() {
    let p = tree_probabilities(2, &[0.0, 0.0]).unwrap();
    assert_eq!(p.len(), 1);
    assert_eq!(p[0].1, 1.0);
}

#[test]
fn three_boundary_weights() {
    let l: f64 = 1.3;
    let p = tree_probabilities(3, &[0.0, 0.0, l]).unwrap();
    let total = 2.0 * PI * PI + 0.5 * l * l;
    let mut got: Vec<f64> = p.iter().map(|(_, w)| w * total).collect();
    got.sort_by(f64::total_cmp);
    let mut expect = vec![PI * PI, PI * PI, 0.5 * l * l];
    expect.sort_by(f64::total_cmp);
    for (g, e) in got.iter().zip(&expect) {
        assert!((g - e).abs() < 1e-12 * total);
    }
    for n in 2..=5 {
        let lengths: Vec<f64> = (0..n).map(|i| if i < 2 { 0.0 } else { 0.7 * i as f64 }).collect();
        let s: f64 = tree_probabilities(n, &lengths).unwrap().iter().map(|(_, w)| w).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn decorations_are_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let lengths = [0.0, 0.0, 1.5, 0.0, 2.5];
    for (t, _) in tree_probabilities(5, &lengths).unwrap() {
        for _ in 0..20 {
            let (d, _) = sample_decoration(&t, &lengths, &mut rng, 1_000_000).unwrap();
            let v = validate(&t, &d, &lengths, &Mode::Delaunay).unwrap();
            assert!(v.is_valid(), "{:?}", v.violation);
        }
    }
}

#[test]
fn star_always_accepted() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ts = enumerate_delaunay(3, &CuspMask::all_cusps(3).unwrap()).unwrap();
    let star = ts.iter().find(|t| t.num_vertices() == 4).unwrap();
    for _ in 0..1000 {
        assert_eq!(sample_decoration(star, &[0.0; 3], &mut rng, 0).unwrap().1, 1);
    }
}

#[test]
fn single_edge_accepted_immediately() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = &enumerate_delaunay(2, &CuspMask::all_cusps(2).unwrap()).unwrap()[0];
    let (d, proposals) = sample_decoration(t, &[0.0, 0.0], &mut rng, 0).unwrap();
    assert_eq!(proposals, 1);
    assert!(d.angles.iter().all(|&a| a == 0.0));
}

#[test]
fn four_leaf_acceptance_matches_volume_ratio() {
    let lengths = [0.0; 4];
    let ts = enumerate_delaunay(4, &CuspMask::all_cusps(4).unwrap()).unwrap();
    let t = ts.iter().find(|t| t.inner_edges().len() == 1 && (0..4).all(|v| t.deg(v) == 1)).unwrap();
    let ratio = delaunay_polytope_volume(t).evaluate_numeric(&lengths).unwrap() / product_volume(t, &lengths);
    assert!(ratio > 0.0 && ratio < 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut accepted, mut proposals) = (0u64, 0u64);
    while proposals < 100_000 {
        proposals += sample_decoration(t, &lengths, &mut rng, 1_000_000).unwrap().1;
        accepted += 1;
    }
    let rate = accepted as f64 / proposals as f64;
    let se = (ratio * (1.0 - ratio) / proposals as f64).sqrt();
    assert!((rate - ratio).abs() < 3.0 * se, "rate {rate} vs {ratio} (se {se})");
}

#[test]
fn exceeding_max_rejections_is_a_sampling_error() {
    let lengths = [0.0; 4];
    let ts = enumerate_delaunay(4, &CuspMask::all_cusps(4).unwrap()).unwrap();
    let t = ts.iter().find(|t| !t.inner_edges().is_empty()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let failed = (0..200).any(|_| matches!(sample_decoration(t, &lengths, &mut rng, 0), Err(wpspine::Error::Sampling(_))));
    assert!(failed);
}

#[test]
fn acceptance_times_product_volume_gives_polytope_volume() {
    let lengths = [0.0, 0.0, 0.8, 1.6, 0.0];
    let config = SampleConfig::new(lengths.to_vec(), 20_000, 8);
    let stats = sample_d(&config, Exec::default()).unwrap();
    let trees = tree_probabilities(5, &lengths).unwrap();
    for ((t, _), acc) in trees.iter().zip(&stats.acceptance) {
        if acc.samples < 200 {
            continue;
        }
        let exact = delaunay_polytope_volume(t).evaluate_numeric(&lengths).unwrap();
        let prod = product_volume(t, &lengths);
        let p = exact / prod;
        let se = (p * (1.0 - p) / acc.proposals as f64).sqrt();
        assert!((acc.rate() - p).abs() < 4.0 * se + 1e-12, "{} vs {}", acc.rate() * prod, exact);
    }
}

#[test]
fn two_boundaries_give_zero_distance() {
    let stats = sample_d(&SampleConfig::new(vec![0.0, 0.0], 500, 9), Exec::Sequential).unwrap();
    assert!(stats.values.iter().all(|&x| x == 0.0));
    assert_eq!(stats.count, 500);
}

#[test]
fn deterministic_across_policies() {
    let config = SampleConfig::new(vec![0.0, 0.0, 1.0, 0.5], 10_000, 42);
    let a = sample_d(&config, Exec::Sequential).unwrap();
    let b = sample_d(&config, Exec::Parallel).unwrap();
    let c = sample_d(&config, Exec::Sequential).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other = sample_d(&SampleConfig { seed: 43, ..config }, Exec::Sequential).unwrap();
    assert_ne!(a.values, other.values);
}

#[test]
fn config_errors() {
    assert!(sample_d(&SampleConfig::new(vec![0.0, 1.0, 0.0], 10, 1), Exec::Sequential).is_err());
    assert!(sample_d(&SampleConfig::new(vec![0.0, 0.0, 0.0], 0, 1), Exec::Sequential).is_err());
    assert!(tree_probabilities(3, &[0.0, -1.0, 0.0]).is_err());
}

#[test]
fn histogram_accounts_for_every_sample() {
    let config = SampleConfig { range: 1.0, ..SampleConfig::new(vec![0.0, 0.0, 1.0], 5_000, 10) };
    let stats = sample_d(&config, Exec::default()).unwrap();
    assert_eq!(stats.bins.len(), 40);
    let inside: u64 = stats.bins.iter().sum();
    assert_eq!(inside + stats.underflow + stats.overflow, stats.count);
    let rows = stats.histogram_rows();
    assert!((rows[0].0 + 1.0).abs() < 1e-15 && (rows[39].1 - 1.0).abs() < 1e-12);
}

#[test]
fn merge_matches_sequential_accumulation() {
    let xs = [0.3, -1.2, 2.5, 0.0, -0.7, 11.0];
    let mut whole = EmpiricalStats::new(0.05, 10.0, 1).unwrap();
    let mut a = EmpiricalStats::new(0.05, 10.0, 1).unwrap();
    let mut b = EmpiricalStats::new(0.05, 10.0, 1).unwrap();
    for (i, &x) in xs.iter().enumerate() {
        whole.push(x);
        if i < 2 { a.push(x) } else { b.push(x) }
    }
    a.merge(&b).unwrap();
    assert_eq!(a.bins, whole.bins);
    assert_eq!(a.overflow, 1);
    for k in 1..=4 {
        assert!((a.moment(k) - whole.moment(k)).abs() < 1e-12 * whole.moment(k).abs().max(1.0));
    }
}

#[test]
fn law_of_d_for_three_boundaries() {
    let l = 1.0;
    let stats = sample_d(&SampleConfig::new(vec![0.0, 0.0, l], 100_000, 2024), Exec::default()).unwrap();
    let ks = ks_against_x1(&stats, l).unwrap();
    assert!(ks < 0.006, "KS {ks}");
    assert!(stats.moment(1).abs() < 3.0 * stats.mean_std_error());
    let mu = AtomicWeight::parse(&format!("1:{l}")).unwrap();
    let m2 = second_moment(&xhat_at_zero(&mu, 2).unwrap(), 1).to_f64();
    assert!((stats.moment(2) - m2).abs() < 3.0 * stats.second_moment_std_error(), "{} vs {m2}", stats.moment(2));
    // wrong length in the reference law
    assert!(ks_against_x1(&stats, 6.0).unwrap() > 0.02);
}

#[test]
fn ks_statistic_of_exact_cdf_is_small() {
    let values: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
    assert!(ks_statistic(&values, |x| x) <= 0.0005 + 1e-12);
    assert!(ks_statistic(&values, |x| x * x) > 0.2);
    assert!(x1_density(1.0, 1.0) > 0.0);
}
