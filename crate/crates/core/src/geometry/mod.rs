//! Tree decorations, shear coordinates, the Poisson bracket in the
//! decoration chart, and distance differences between cusps.
//!
//! A decoration stores the angle `φ(e⃗)` at the tail of every oriented edge
//! and, per boundary label, the lists `w` and `v` in the counterclockwise
//! order of the rotation at that vertex. Corner `j` sits between rotation
//! entries `j` and `j + 1` (cyclically).

pub mod conventions;
pub mod identities;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::trees::PlaneTree;

/// `w` below this at a positive-length boundary is degenerate.
pub const MIN_W: f64 = 1e-12;

/// Central-difference step of [`Derivatives::FiniteDifference`].
pub const FD_STEP: f64 = 1e-6;

const SUM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decoration {
    /// `φ(e⃗)` indexed by oriented edge.
    pub angles: Vec<f64>,
    /// Indexed by `label - 1`; one entry per incident edge.
    pub boundary_w: Vec<Vec<f64>>,
    /// Indexed by `label - 1`; one entry per corner, empty at cusps.
    pub boundary_v: Vec<Vec<f64>>,
}

fn is_cusp(lengths: &[f64], label: usize) -> bool {
    lengths[label - 1] == 0.0
}

impl Decoration {
    /// Center of the product of simplices: equal angles and equal `w`, `v`.
    pub fn barycentric(t: &PlaneTree, lengths: &[f64]) -> Result<Self> {
        check_lengths(t, lengths)?;
        let mut angles = vec![0.0; t.num_oriented_edges()];
        for v in t.inner_vertices() {
            let a = PI / t.deg(v) as f64;
            for &h in t.rotation(v) {
                angles[h] = a;
            }
        }
        let mut boundary_w = Vec::new();
        let mut boundary_v = Vec::new();
        for label in 1..=t.n() {
            let k = t.deg(label - 1);
            if is_cusp(lengths, label) {
                boundary_w.push(vec![1.0 / k as f64; k]);
                boundary_v.push(Vec::new());
            } else {
                let x = lengths[label - 1] / (2 * k) as f64;
                boundary_w.push(vec![x; k]);
                boundary_v.push(vec![x; k]);
            }
        }
        Ok(Decoration { angles, boundary_w, boundary_v })
    }

    fn check_shape(&self, t: &PlaneTree, lengths: &[f64]) -> Result<()> {
        check_lengths(t, lengths)?;
        if self.angles.len() != t.num_oriented_edges() {
            return invalid(format!("{} angles for {} oriented edges", self.angles.len(), t.num_oriented_edges()));
        }
        if self.boundary_w.len() != t.n() || self.boundary_v.len() != t.n() {
            return invalid("boundary_w and boundary_v need one list per label");
        }
        for label in 1..=t.n() {
            let k = t.deg(label - 1);
            let kv = if is_cusp(lengths, label) { 0 } else { k };
            if self.boundary_w[label - 1].len() != k || self.boundary_v[label - 1].len() != kv {
                return invalid(format!("boundary {label}: expected {k} w and {kv} v entries"));
            }
        }
        Ok(())
    }
}

fn check_lengths(t: &PlaneTree, lengths: &[f64]) -> Result<()> {
    if lengths.len() != t.n() {
        return invalid(format!("{} lengths for n = {}", lengths.len(), t.n()));
    }
    if lengths.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return invalid("lengths must be finite and non-negative");
    }
    Ok(())
}

/// Which edge inequality [`validate`] enforces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `φ(e⃗) + φ(e⃖) < π` on every edge.
    Delaunay,
    /// `φ(e⃗) + φ(e⃖) > π` on the listed edges, nothing elsewhere.
    Anti(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    /// First violated constraint, `None` when the decoration is valid.
    pub violation: Option<String>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

/// Membership of `d` in the polytope of `t`. Shape mismatches are errors,
/// violated constraints are reported in the returned diagnostics.
pub fn validate(t: &PlaneTree, d: &Decoration, lengths: &[f64], mode: &Mode) -> Result<Validation> {
    d.check_shape(t, lengths)?;
    let fail = |msg: String| Ok(Validation { violation: Some(msg) });
    for h in 0..t.num_oriented_edges() {
        let a = d.angles[h];
        if t.is_inner(t.tail(h)) {
            if !(a > 0.0 && a < PI) {
                return fail(format!("angle {a} of oriented edge {h} outside (0, π)"));
            }
        } else if a != 0.0 {
            return fail(format!("oriented edge {h} starts at a boundary vertex but has angle {a}"));
        }
    }
    for v in t.inner_vertices() {
        let s: f64 = t.rotation(v).iter().map(|&h| d.angles[h]).sum();
        if (s - PI).abs() > SUM_TOL {
            return fail(format!("angles at inner vertex {v} sum to {s}"));
        }
    }
    match mode {
        Mode::Delaunay => {
            for e in 0..t.num_edges() {
                let s = d.angles[2 * e] + d.angles[2 * e + 1];
                if s >= PI {
                    return fail(format!("edge {e} violates the Delaunay condition: angle sum {s}"));
                }
            }
        }
        Mode::Anti(a) => {
            for &e in a {
                if e >= t.num_edges() {
                    return invalid(format!("edge {e} out of range"));
                }
                let s = d.angles[2 * e] + d.angles[2 * e + 1];
                if s <= PI {
                    return fail(format!("edge {e} violates the anti-Delaunay condition: angle sum {s}"));
                }
            }
        }
    }
    for label in 1..=t.n() {
        let w = &d.boundary_w[label - 1];
        let v = &d.boundary_v[label - 1];
        if w.iter().chain(v).any(|x| !(*x > 0.0)) {
            return fail(format!("boundary {label} has a non-positive w or v entry"));
        }
        let target = if is_cusp(lengths, label) { 1.0 } else { 0.5 * lengths[label - 1] };
        let tol = SUM_TOL * target.max(1.0);
        let sw: f64 = w.iter().sum();
        if (sw - target).abs() > tol {
            return fail(format!("boundary {label}: w sums to {sw}, expected {target}"));
        }
        if !is_cusp(lengths, label) {
            let sv: f64 = v.iter().sum();
            if (sv - target).abs() > tol {
                return fail(format!("boundary {label}: v sums to {sv}, expected {target}"));
            }
        }
    }
    Ok(Validation { violation: None })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeShear {
    pub total: f64,
    /// Half-shear of oriented edge `2e`.
    pub forward: f64,
    /// Half-shear of oriented edge `2e + 1`.
    pub backward: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearAssignment {
    pub edge_shears: Vec<EdgeShear>,
    /// Indexed by `label - 1`, then corner index.
    pub corner_shears: Vec<Vec<f64>>,
}

impl ShearAssignment {
    pub fn half(&self, h: usize) -> f64 {
        let e = &self.edge_shears[h / 2];
        if h % 2 == 0 {
            e.forward
        } else {
            e.backward
        }
    }

    /// `Σ_j z_{c_{b,j}} − BOUNDARY_CORNER_SIGN · L_b`.
    pub fn boundary_residual(&self, label: usize, lengths: &[f64]) -> f64 {
        let s: f64 = self.corner_shears[label - 1].iter().sum();
        s - conventions::BOUNDARY_CORNER_SIGN * lengths[label - 1]
    }

    /// Weighted shear sum over the arcs at the origin cusp.
    pub fn origin_residual(&self) -> f64 {
        self.origin_sum(conventions::ORIGIN_EDGE_WEIGHT, conventions::ORIGIN_CORNER_WEIGHT)
    }

    pub fn origin_sum(&self, edge_weight: f64, corner_weight: f64) -> f64 {
        let e: f64 = self.edge_shears.iter().map(|s| s.total).sum();
        let c: f64 = self.corner_shears.iter().flatten().sum();
        edge_weight * e + corner_weight * c
    }

    /// All shears in the order of [`shear_ids`].
    pub fn values(&self) -> Vec<f64> {
        self.edge_shears.iter().map(|s| s.total).chain(self.corner_shears.iter().flatten().copied()).collect()
    }
}

fn half_shear(t: &PlaneTree, d: &Decoration, lengths: &[f64], h: usize) -> Result<f64> {
    let v = t.tail(h);
    if t.is_inner(v) {
        let rot = t.rotation(v);
        if rot.len() != 3 {
            return invalid(format!("inner vertex {v} has degree {}, shears need degree 3", rot.len()));
        }
        let p = t.position(h);
        Ok((d.angles[rot[(p + 1) % 3]].sin() / d.angles[rot[(p + 2) % 3]].sin()).ln())
    } else {
        let label = v + 1;
        if is_cusp(lengths, label) {
            Ok(0.0)
        } else {
            Ok(d.boundary_w[v][t.position(h)])
        }
    }
}

fn corner_shear(d: &Decoration, lengths: &[f64], label: usize, j: usize) -> Result<f64> {
    let w = &d.boundary_w[label - 1];
    let next = w[(j + 1) % w.len()];
    if is_cusp(lengths, label) {
        return Ok((w[j] / next).ln());
    }
    if w[j] < MIN_W || next < MIN_W {
        return invalid(format!("boundary {label}: w below {MIN_W} is degenerate"));
    }
    Ok(-d.boundary_v[label - 1][j] + (-(-w[j]).exp_m1()).ln() - next.exp_m1().ln())
}

/// Half-shears, edge shears and corner shears of a valid Delaunay decoration.
pub fn shears(t: &PlaneTree, d: &Decoration, lengths: &[f64]) -> Result<ShearAssignment> {
    d.check_shape(t, lengths)?;
    let edge_shears = (0..t.num_edges())
        .map(|e| {
            let forward = half_shear(t, d, lengths, 2 * e)?;
            let backward = half_shear(t, d, lengths, 2 * e + 1)?;
            Ok(EdgeShear { total: forward + backward, forward, backward })
        })
        .collect::<Result<Vec<_>>>()?;
    let corner_shears = (1..=t.n())
        .map(|label| (0..t.deg(label - 1)).map(|j| corner_shear(d, lengths, label, j)).collect())
        .collect::<Result<Vec<_>>>()?;
    Ok(ShearAssignment { edge_shears, corner_shears })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShearId {
    Edge(usize),
    Corner { label: usize, j: usize },
}

/// Edge shears by edge index, then corner shears by label and corner index.
pub fn shear_ids(t: &PlaneTree) -> Vec<ShearId> {
    let mut ids: Vec<ShearId> = (0..t.num_edges()).map(ShearId::Edge).collect();
    for label in 1..=t.n() {
        ids.extend((0..t.deg(label - 1)).map(|j| ShearId::Corner { label, j }));
    }
    ids
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coord {
    /// `φ` of rotation entry `k ∈ {0, 1}` at inner vertex `v`.
    Angle { v: usize, k: usize },
    W { label: usize, j: usize },
    V { label: usize, j: usize },
}

/// The canonical chart: two angles per inner vertex and `(w_j, v_j)` for
/// `j < deg − 1` per positive-length boundary vertex.
#[derive(Clone, Debug)]
pub struct Chart {
    pub coords: Vec<Coord>,
    angle: Vec<Option<usize>>,
    w: Vec<Vec<usize>>,
    v: Vec<Vec<usize>>,
}

/// Sparse gradient in chart coordinates.
type Grad = Vec<(usize, f64)>;

impl Chart {
    pub fn new(t: &PlaneTree, lengths: &[f64]) -> Result<Self> {
        check_lengths(t, lengths)?;
        let mut coords = Vec::new();
        let mut angle = vec![None; t.num_vertices()];
        for v in t.inner_vertices() {
            if t.deg(v) != 3 {
                return invalid(format!("inner vertex {v} has degree {}", t.deg(v)));
            }
            angle[v] = Some(coords.len());
            coords.push(Coord::Angle { v, k: 0 });
            coords.push(Coord::Angle { v, k: 1 });
        }
        let mut w = vec![Vec::new(); t.n()];
        let mut vv = vec![Vec::new(); t.n()];
        for label in 1..=t.n() {
            let k = t.deg(label - 1);
            if is_cusp(lengths, label) {
                if k != 1 {
                    return invalid(format!("cusp {label} has degree {k}"));
                }
                continue;
            }
            for j in 0..k - 1 {
                w[label - 1].push(coords.len());
                coords.push(Coord::W { label, j });
                vv[label - 1].push(coords.len());
                coords.push(Coord::V { label, j });
            }
        }
        Ok(Chart { coords, angle, w, v: vv })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `{x_a, x_b}` for the chart coordinates.
    pub fn poisson_matrix(&self, t: &PlaneTree) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut p = vec![vec![0.0; n]; n];
        let mut set = |a: usize, b: usize| {
            p[a][b] += 0.5;
            p[b][a] -= 0.5;
        };
        for v in t.inner_vertices() {
            let a = self.angle[v].expect("inner vertex in chart");
            set(a, a + 1);
        }
        for (w, v) in self.w.iter().zip(&self.v) {
            for j in 0..w.len() {
                set(w[j], v[j]);
                if j + 1 < w.len() {
                    set(v[j], w[j + 1]);
                }
            }
        }
        p
    }

    pub fn read(&self, d: &Decoration, t: &PlaneTree) -> Vec<f64> {
        self.coords
            .iter()
            .map(|c| match *c {
                Coord::Angle { v, k } => d.angles[t.rotation(v)[k]],
                Coord::W { label, j } => d.boundary_w[label - 1][j],
                Coord::V { label, j } => d.boundary_v[label - 1][j],
            })
            .collect()
    }

    /// Decoration with chart values `x`; dependent entries follow from the
    /// sum constraints, everything else is copied from `base`.
    pub fn write(&self, base: &Decoration, t: &PlaneTree, lengths: &[f64], x: &[f64]) -> Decoration {
        let mut d = base.clone();
        for (c, &val) in self.coords.iter().zip(x) {
            match *c {
                Coord::Angle { v, k } => d.angles[t.rotation(v)[k]] = val,
                Coord::W { label, j } => d.boundary_w[label - 1][j] = val,
                Coord::V { label, j } => d.boundary_v[label - 1][j] = val,
            }
        }
        for v in t.inner_vertices() {
            let r = t.rotation(v);
            d.angles[r[2]] = PI - d.angles[r[0]] - d.angles[r[1]];
        }
        for label in 1..=t.n() {
            let k = t.deg(label - 1);
            if is_cusp(lengths, label) {
                continue;
            }
            let half = 0.5 * lengths[label - 1];
            let w = &mut d.boundary_w[label - 1];
            w[k - 1] = half - w[..k - 1].iter().sum::<f64>();
            let v = &mut d.boundary_v[label - 1];
            v[k - 1] = half - v[..k - 1].iter().sum::<f64>();
        }
        d
    }

    fn d_angle(&self, t: &PlaneTree, h: usize) -> Grad {
        let v = t.tail(h);
        let a = self.angle[v].expect("inner vertex in chart");
        match t.position(h) {
            0 => vec![(a, 1.0)],
            1 => vec![(a + 1, 1.0)],
            _ => vec![(a, -1.0), (a + 1, -1.0)],
        }
    }

    fn d_simplex(idx: &[usize], j: usize) -> Grad {
        if j < idx.len() {
            vec![(idx[j], 1.0)]
        } else {
            idx.iter().map(|&i| (i, -1.0)).collect()
        }
    }

    fn d_w(&self, label: usize, j: usize) -> Grad {
        Self::d_simplex(&self.w[label - 1], j)
    }

    fn d_v(&self, label: usize, j: usize) -> Grad {
        Self::d_simplex(&self.v[label - 1], j)
    }
}

fn axpy(out: &mut Grad, c: f64, g: Grad) {
    out.extend(g.into_iter().map(|(i, x)| (i, c * x)));
}

fn half_shear_grad(chart: &Chart, t: &PlaneTree, d: &Decoration, lengths: &[f64], h: usize) -> Grad {
    let v = t.tail(h);
    let mut g = Vec::new();
    if t.is_inner(v) {
        let rot = t.rotation(v);
        let p = t.position(h);
        let (h2, h3) = (rot[(p + 1) % 3], rot[(p + 2) % 3]);
        axpy(&mut g, 1.0 / d.angles[h2].tan(), chart.d_angle(t, h2));
        axpy(&mut g, -1.0 / d.angles[h3].tan(), chart.d_angle(t, h3));
    } else if !is_cusp(lengths, v + 1) {
        axpy(&mut g, 1.0, chart.d_w(v + 1, t.position(h)));
    }
    g
}

fn corner_shear_grad(chart: &Chart, d: &Decoration, lengths: &[f64], label: usize, j: usize) -> Grad {
    let mut g = Vec::new();
    if is_cusp(lengths, label) {
        return g;
    }
    let w = &d.boundary_w[label - 1];
    let k = w.len();
    let jn = (j + 1) % k;
    axpy(&mut g, -1.0, chart.d_v(label, j));
    axpy(&mut g, 1.0 / w[j].exp_m1(), chart.d_w(label, j));
    axpy(&mut g, 1.0 / (-w[jn]).exp_m1(), chart.d_w(label, jn));
    g
}

fn dense(g: &Grad, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for &(i, x) in g {
        out[i] += x;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivatives {
    Analytic,
    /// Central differences with step [`FD_STEP`], for cross-validation.
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub a: ShearId,
    pub b: ShearId,
    pub value: f64,
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonTable {
    /// One entry per unordered pair `a < b` in [`shear_ids`] order.
    pub brackets: Vec<Bracket>,
}

impl PoissonTable {
    pub fn max_deviation(&self) -> f64 {
        self.brackets.iter().map(|b| (b.value - b.target).abs()).fold(0.0, f64::max)
    }
}

/// Expected brackets between shears, indexed like [`shear_ids`]: `+1/2` for
/// ccw-consecutive edges at an inner vertex, `−1/2` between `e_{b,j}` and
/// `c_{b,j}`, `+1/2` between `e_{b,j+1}` and `c_{b,j}`, `+1/2` between
/// `c_{b,j}` and `c_{b,j+1}`. Contributions are summed, so degree 1 and 2
/// boundary vertices cancel to 0 where required.
pub fn bracket_targets(t: &PlaneTree) -> Vec<Vec<f64>> {
    let ids = shear_ids(t);
    let n = ids.len();
    let corner_base: Vec<usize> = (1..=t.n())
        .scan(t.num_edges(), |acc, label| {
            let b = *acc;
            *acc += t.deg(label - 1);
            Some(b)
        })
        .collect();
    let mut m = vec![vec![0.0; n]; n];
    let mut add = |a: usize, b: usize, x: f64| {
        m[a][b] += x;
        m[b][a] -= x;
    };
    for v in t.inner_vertices() {
        let r = t.rotation(v);
        for p in 0..r.len() {
            add(r[p] / 2, r[(p + 1) % r.len()] / 2, 0.5);
        }
    }
    for label in 1..=t.n() {
        let r = t.rotation(label - 1);
        let k = r.len();
        for j in 0..k {
            let c = corner_base[label - 1] + j;
            add(r[j] / 2, c, -0.5);
            add(r[(j + 1) % k] / 2, c, 0.5);
            add(c, corner_base[label - 1] + (j + 1) % k, 0.5);
        }
    }
    m
}

/// Brackets of all shear pairs with analytic chart derivatives.
pub fn poisson_check(t: &PlaneTree, d: &Decoration, lengths: &[f64]) -> Result<PoissonTable> {
    poisson_check_with(t, d, lengths, Derivatives::Analytic)
}

pub fn poisson_check_with(t: &PlaneTree, d: &Decoration, lengths: &[f64], how: Derivatives) -> Result<PoissonTable> {
    d.check_shape(t, lengths)?;
    let chart = Chart::new(t, lengths)?;
    let dim = chart.dim();
    let ids = shear_ids(t);
    let grads: Vec<Vec<f64>> = match how {
        Derivatives::Analytic => ids
            .iter()
            .map(|id| match *id {
                ShearId::Edge(e) => {
                    let mut g = half_shear_grad(&chart, t, d, lengths, 2 * e);
                    g.extend(half_shear_grad(&chart, t, d, lengths, 2 * e + 1));
                    dense(&g, dim)
                }
                ShearId::Corner { label, j } => dense(&corner_shear_grad(&chart, d, lengths, label, j), dim),
            })
            .collect(),
        Derivatives::FiniteDifference => {
            let x0 = chart.read(d, t);
            let mut cols = Vec::with_capacity(dim);
            for a in 0..dim {
                let mut x = x0.clone();
                x[a] = x0[a] + FD_STEP;
                let plus = shears(t, &chart.write(d, t, lengths, &x), lengths)?.values();
                x[a] = x0[a] - FD_STEP;
                let minus = shears(t, &chart.write(d, t, lengths, &x), lengths)?.values();
                cols.push(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * FD_STEP)).collect::<Vec<_>>());
            }
            (0..ids.len()).map(|s| (0..dim).map(|a| cols[a][s]).collect()).collect()
        }
    };
    let p = chart.poisson_matrix(t);
    let targets = bracket_targets(t);
    let mut brackets = Vec::new();
    for a in 0..ids.len() {
        let pa: Vec<f64> = (0..dim).map(|j| (0..dim).map(|i| grads[a][i] * p[i][j]).sum()).collect();
        for b in a + 1..ids.len() {
            let value = pa.iter().zip(&grads[b]).map(|(x, y)| x * y).sum();
            brackets.push(Bracket { a: ids[a], b: ids[b], value, target: targets[a][b] });
        }
    }
    Ok(PoissonTable { brackets })
}

/// `d_exit − d_entrance` across a positive-length boundary vertex, walking
/// counterclockwise from rotation entry `entrance` to `exit`.
pub fn passage_increment(w: &[f64], v: &[f64], entrance: usize, exit: usize) -> f64 {
    let k = w.len();
    let mut s = 0.0;
    let mut m = entrance;
    while m != exit {
        let next = (m + 1) % k;
        s += v[m] - w[m].exp_m1().ln() + (-(-w[next]).exp_m1()).ln();
        m = next;
    }
    s
}

/// `D = d(h_i, h_0) − d(h_j, h_0)` for cusps `i`, `j`, computed from
/// differences of edge distances along the tree path.
pub fn distance_difference(t: &PlaneTree, d: &Decoration, lengths: &[f64], i: usize, j: usize) -> Result<f64> {
    d.check_shape(t, lengths)?;
    for label in [i, j] {
        if label == 0 || label > t.n() {
            return invalid(format!("label {label} out of range"));
        }
        if !is_cusp(lengths, label) || t.deg(label - 1) != 1 {
            return invalid(format!("label {label} is not a cusp of degree 1"));
        }
    }
    if i > j {
        // one summation order for both directions keeps the antisymmetry exact
        return Ok(-distance_difference(t, d, lengths, j, i)?);
    }
    let path = t.boundary_path(i, j)?;
    let mut total = 0.0;
    for step in &path.steps {
        let rot = t.rotation(step.vertex);
        if t.is_inner(step.vertex) {
            total += d.angles[rot[step.entrance]].sin().ln() - d.angles[rot[step.exit]].sin().ln();
        } else {
            let b = step.vertex;
            if is_cusp(lengths, b + 1) {
                return invalid(format!("path passes through cusp {}", b + 1));
            }
            total -= passage_increment(&d.boundary_w[b], &d.boundary_v[b], step.entrance, step.exit);
        }
    }
    Ok(total)
}

/// `I_{k,ℓ}(u, L) = Σ_m u^m L^{k+m−1} 2^{1−k} / (k+m−1)! · C(ℓ+m−2, m)`.
///
/// The ratio of consecutive terms decreases in `m`, so the tail after a term
/// `t` with ratio `ρ < 1` is at most `t ρ / (1 − ρ)`; summation stops once
/// that bound is below `1e-17` of the partial sum.
pub fn i_kl(k: usize, l: usize, u: f64, length: f64) -> Result<f64> {
    if k < 2 || l < 2 || l > k {
        return invalid(format!("need 2 <= l <= k, got k = {k}, l = {l}"));
    }
    if !(length >= 0.0) || !length.is_finite() {
        return invalid("L must be finite and non-negative");
    }
    let mut term = length.powi(k as i32 - 1) * 0.5f64.powi(k as i32 - 1) / (1..k).map(|x| x as f64).product::<f64>();
    let mut sum = term;
    for m in 0..100_000usize {
        let ratio = u * length * (l + m - 1) as f64 / ((m + 1) * (k + m)) as f64;
        term *= ratio;
        sum += term;
        let r = ratio.abs();
        if r < 1.0 && term.abs() * r / (1.0 - r) <= 1e-17 * sum.abs() {
            return Ok(sum);
        }
        if term == 0.0 {
            return Ok(sum);
        }
    }
    Err(crate::Error::Range(format!("I_(k,l) series did not converge for u L = {}", u * length)))
}

/// `E_{k,ℓ}(L, u) = 2^{k−1} I_{k,ℓ}(u, L) · (2πu / sin 2πu) I_{k,ℓ}(−u, L)`.
pub fn quad_e(k: usize, l: usize, length: f64, u: f64) -> Result<f64> {
    if !(u.abs() < 0.5) {
        return invalid(format!("need |u| < 1/2, got {u}"));
    }
    let refl = if u == 0.0 { 1.0 } else { 2.0 * PI * u / (2.0 * PI * u).sin() };
    Ok(2f64.powi(k as i32 - 1) * i_kl(k, l, u, length)? * refl * i_kl(k, l, -u, length)?)
}
