//! Monte Carlo sampling of Weil–Petersson random surfaces through decorated
//! trees, and statistics of the distance difference `D`.
//!
//! A sample picks a tree with probability proportional to its polytope
//! volume, then a uniform point of that polytope by rejection from the
//! product of simplices. Every sample owns the ChaCha stream `index` of the
//! configured seed, and samples are accumulated in fixed-size chunks merged
//! in order, so results do not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::geometry::{distance_difference, Decoration};
use crate::quad::{integrate, Options};
use crate::series::x1_density;
use crate::trees::{enumerate_delaunay, CuspMask, PlaneTree};
use crate::wp_poly::delaunay_polytope_volume;

const CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n: usize,
    pub lengths: Vec<f64>,
    pub sample_count: usize,
    pub seed: u64,
    /// Rejected proposals allowed per decoration before giving up.
    pub max_rejections: u64,
    pub bin_width: f64,
    /// Histogram covers `[-range, range)`.
    pub range: f64,
}

impl SampleConfig {
    pub fn new(lengths: Vec<f64>, sample_count: usize, seed: u64) -> Self {
        SampleConfig { n: lengths.len(), lengths, sample_count, seed, max_rejections: 1_000_000, bin_width: 0.05, range: 10.0 }
    }
}

fn mask_of(lengths: &[f64]) -> Result<CuspMask> {
    if lengths.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return invalid("lengths must be finite and non-negative");
    }
    CuspMask::new(lengths.iter().map(|&l| l == 0.0).collect())
}

/// Delaunay trees with probabilities proportional to their polytope volumes.
pub fn tree_probabilities(n: usize, lengths: &[f64]) -> Result<Vec<(PlaneTree, f64)>> {
    if lengths.len() != n {
        return invalid(format!("{} lengths for n = {n}", lengths.len()));
    }
    let mask = mask_of(lengths)?;
    let mut out = Vec::new();
    for t in enumerate_delaunay(n, &mask)? {
        let w = delaunay_polytope_volume(&t).evaluate_numeric(lengths)?;
        if w > 0.0 {
            out.push((t, w));
        }
    }
    let total: f64 = out.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut out {
        *w /= total;
    }
    Ok(out)
}

/// Lebesgue volume of the product of simplices containing the polytope of
/// `t`, with the same `2^{n−2}` normalization as the polytope volumes.
pub fn product_volume(t: &PlaneTree, lengths: &[f64]) -> f64 {
    let pi = std::f64::consts::PI;
    let mut v = 2f64.powi(t.n() as i32 - 2);
    for u in t.inner_vertices() {
        let k = t.deg(u) as i32;
        v *= pi.powi(k - 1) / (1..k).map(f64::from).product::<f64>();
    }
    for label in 1..=t.n() {
        let l = lengths[label - 1];
        if l > 0.0 {
            let k = t.deg(label - 1) as i32;
            let s = (0.5 * l).powi(k - 1) / (1..k).map(f64::from).product::<f64>();
            v *= s * s;
        }
    }
    v
}

/// Uniform point of the simplex `{x_i > 0, Σx = size}` with `k` entries.
fn simplex_point<R: Rng>(rng: &mut R, k: usize, size: f64) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| size * x / s).collect()
}

/// A uniform decoration of `t` and the number of proposals it took.
pub fn sample_decoration<R: Rng>(
    t: &PlaneTree,
    lengths: &[f64],
    rng: &mut R,
    max_rejections: u64,
) -> Result<(Decoration, u64)> {
    let mut boundary_w = Vec::with_capacity(t.n());
    let mut boundary_v = Vec::with_capacity(t.n());
    for label in 1..=t.n() {
        let k = t.deg(label - 1);
        let l = lengths[label - 1];
        if l == 0.0 {
            boundary_w.push(simplex_point(rng, k, 1.0));
            boundary_v.push(Vec::new());
        } else {
            boundary_w.push(simplex_point(rng, k, 0.5 * l));
            boundary_v.push(simplex_point(rng, k, 0.5 * l));
        }
    }
    let inner_edges = t.inner_edges();
    let mut angles = vec![0.0; t.num_oriented_edges()];
    let mut proposals = 0u64;
    loop {
        proposals += 1;
        for v in t.inner_vertices() {
            let phi = simplex_point(rng, t.deg(v), std::f64::consts::PI);
            for (&h, a) in t.rotation(v).iter().zip(phi) {
                angles[h] = a;
            }
        }
        if inner_edges.iter().all(|&e| angles[2 * e] + angles[2 * e + 1] < std::f64::consts::PI) {
            return Ok((Decoration { angles, boundary_w, boundary_v }, proposals));
        }
        if proposals > max_rejections {
            return Err(Error::Sampling(format!(
                "no Delaunay decoration after {proposals} proposals (acceptance below {:.2e})",
                1.0 / proposals as f64
            )));
        }
    }
}

/// Neumaier-compensated sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.comp);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Acceptance {
    pub samples: u64,
    pub proposals: u64,
}

impl Acceptance {
    pub fn rate(&self) -> f64 {
        self.samples as f64 / self.proposals as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub count: u64,
    /// Compensated sums of `D^k`, `k = 1..4`.
    pub power_sums: [CompensatedSum; 4],
    pub bin_width: f64,
    pub range: f64,
    /// Bin `i` covers `[-range + i·width, -range + (i+1)·width)`.
    pub bins: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
    /// Indexed like the output of [`tree_probabilities`].
    pub acceptance: Vec<Acceptance>,
    /// Raw values in sample order.
    pub values: Vec<f64>,
}

impl EmpiricalStats {
    pub fn new(bin_width: f64, range: f64, trees: usize) -> Result<Self> {
        if !(bin_width > 0.0 && range > 0.0) {
            return invalid("bin width and range must be positive");
        }
        let nbins = (2.0 * range / bin_width).round() as usize;
        Ok(EmpiricalStats {
            count: 0,
            power_sums: Default::default(),
            bin_width,
            range,
            bins: vec![0; nbins],
            underflow: 0,
            overflow: 0,
            acceptance: vec![Acceptance::default(); trees],
            values: Vec::new(),
        })
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let mut p = 1.0;
        for s in &mut self.power_sums {
            p *= x;
            s.add(p);
        }
        let pos = ((x + self.range) / self.bin_width).floor();
        if pos < 0.0 {
            self.underflow += 1;
        } else if pos as usize >= self.bins.len() {
            self.overflow += 1;
        } else {
            self.bins[pos as usize] += 1;
        }
        self.values.push(x);
    }

    /// Appends `other`; the result equals accumulating both in sequence up
    /// to floating-point summation order.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.bins.len() != other.bins.len() || self.acceptance.len() != other.acceptance.len() {
            return invalid("cannot merge statistics with different shapes");
        }
        self.count += other.count;
        for (a, b) in self.power_sums.iter_mut().zip(&other.power_sums) {
            a.merge(b);
        }
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        for (a, b) in self.acceptance.iter_mut().zip(&other.acceptance) {
            a.samples += b.samples;
            a.proposals += b.proposals;
        }
        self.values.extend_from_slice(&other.values);
        Ok(())
    }

    /// Raw moment `E[D^k]`, `k = 1..=4`.
    pub fn moment(&self, k: usize) -> f64 {
        self.power_sums[k - 1].value() / self.count as f64
    }

    pub fn mean_std_error(&self) -> f64 {
        let m1 = self.moment(1);
        ((self.moment(2) - m1 * m1) / self.count as f64).sqrt()
    }

    pub fn second_moment_std_error(&self) -> f64 {
        let m2 = self.moment(2);
        ((self.moment(4) - m2 * m2) / self.count as f64).sqrt()
    }

    /// `(bin_left, bin_right, count)` rows.
    pub fn histogram_rows(&self) -> Vec<(f64, f64, u64)> {
        self.bins
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let lo = -self.range + i as f64 * self.bin_width;
                (lo, lo + self.bin_width, c)
            })
            .collect()
    }
}

/// Distance differences `D` between cusps 1 and 2 over `sample_count`
/// independent random surfaces.
pub fn sample_d(config: &SampleConfig, exec: Exec) -> Result<EmpiricalStats> {
    if config.sample_count == 0 {
        return invalid("sample_count must be at least 1");
    }
    if config.lengths.len() != config.n || config.n < 2 {
        return invalid("lengths must have n >= 2 entries");
    }
    if config.lengths[0] != 0.0 || config.lengths[1] != 0.0 {
        return invalid("labels 1 and 2 must be cusps");
    }
    let trees = tree_probabilities(config.n, &config.lengths)?;
    let mut cumulative = Vec::with_capacity(trees.len());
    let mut acc = 0.0;
    for (_, w) in &trees {
        acc += w;
        cumulative.push(acc);
    }
    let chunks = config.sample_count.div_ceil(CHUNK);
    let parts = exec.map_range(chunks, |c| -> Result<EmpiricalStats> {
        let mut stats = EmpiricalStats::new(config.bin_width, config.range, trees.len())?;
        let end = ((c + 1) * CHUNK).min(config.sample_count);
        for index in c * CHUNK..end {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(index as u64);
            let x: f64 = rng.gen::<f64>() * acc;
            let k = cumulative.partition_point(|&c| c <= x).min(trees.len() - 1);
            let t = &trees[k].0;
            let (d, proposals) = sample_decoration(t, &config.lengths, &mut rng, config.max_rejections)?;
            stats.acceptance[k].samples += 1;
            stats.acceptance[k].proposals += proposals;
            stats.push(distance_difference(t, &d, &config.lengths, 1, 2)?);
        }
        Ok(stats)
    });
    let mut total = EmpiricalStats::new(config.bin_width, config.range, trees.len())?;
    for p in parts {
        total.merge(&p?)?;
    }
    Ok(total)
}

/// Two-sided Kolmogorov–Smirnov statistic of `values` against `cdf`.
pub fn ks_statistic<F: FnMut(f64) -> f64>(values: &[f64], mut cdf: F) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        worst = worst.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    worst
}

/// KS statistic of the sampled `D` against the law with density
/// `X₁(x; L) / (2π² + L²/2)`.
pub fn ks_against_x1(stats: &EmpiricalStats, length: f64) -> Result<f64> {
    let total = 2.0 * std::f64::consts::PI.powi(2) + 0.5 * length * length;
    let mut abs: Vec<f64> = stats.values.iter().map(|x| x.abs()).collect();
    abs.sort_by(f64::total_cmp);
    abs.dedup();
    // G(a) = ∫_0^a X₁, accumulated over consecutive sample magnitudes
    let first = Options { abs_tol: 1e-12, rel_tol: 1e-12, ..Options::default() };
    let smooth = Options { grades: 1, ..first };
    let mut g = Vec::with_capacity(abs.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &a in &abs {
        if a > prev {
            let opts = if prev == 0.0 { first } else { smooth };
            acc += integrate(|p| x1_density(p.x, length), prev, a, opts)?;
        }
        g.push(acc);
        prev = a;
    }
    let cdf = |x: f64| {
        let i = abs.partition_point(|&a| a < x.abs());
        let half = if i < g.len() && abs[i] == x.abs() { g[i] } else { 0.0 };
        0.5 + x.signum() * half / total
    };
    Ok(ks_statistic(&stats.values, cdf))
}
