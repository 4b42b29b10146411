//! Bicolored plane trees: the Delaunay class `𝔗ₙ(𝐋)` and the anti-Delaunay
//! class `𝔗̃ₙ(𝐋)`.
//!
//! Boundary (white) vertex with label `i` is stored at vertex index `i - 1`;
//! inner (red) vertices follow. Oriented edges are dense integers with the
//! reverse of `h` equal to `h ^ 1`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Which labeled boundaries are cusps (`L_i = 0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CuspMask {
    flags: Vec<bool>,
}

impl CuspMask {
    pub fn new(flags: Vec<bool>) -> Result<Self> {
        if flags.len() < 2 {
            return invalid(format!("cusp mask needs n >= 2 entries, got {}", flags.len()));
        }
        Ok(CuspMask { flags })
    }

    pub fn all_positive(n: usize) -> Result<Self> {
        Self::new(vec![false; n])
    }

    pub fn all_cusps(n: usize) -> Result<Self> {
        Self::new(vec![true; n])
    }

    /// Bit `i` of `bits` set iff label `i + 1` is a cusp.
    pub fn from_bits(n: usize, bits: u64) -> Result<Self> {
        Self::new((0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    /// Parses a string of `0`/`1` characters, first character is label 1.
    pub fn parse(s: &str) -> Result<Self> {
        let flags = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => invalid(format!("cusp mask must be a 0/1 string, got {s:?}")),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(flags)
    }

    pub fn n(&self) -> usize {
        self.flags.len()
    }

    /// True iff label `label` (1-based) is a cusp.
    pub fn is_cusp(&self, label: usize) -> bool {
        self.flags[label - 1]
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Inner,
    Boundary(usize),
}

/// Embedded tree with counterclockwise rotation systems.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlaneTree {
    n: usize,
    kinds: Vec<VertexKind>,
    rot: Vec<Vec<usize>>,
    tail: Vec<usize>,
}

/// The tree class a tree is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeClass {
    Delaunay,
    Anti,
}

impl PlaneTree {
    /// Builds a tree from rotation systems. Vertices `0..n` are the boundary
    /// vertices with labels `1..=n`, the rest are inner.
    pub fn from_rotations(n: usize, rot: Vec<Vec<usize>>) -> Result<Self> {
        if n < 2 || rot.len() < n {
            return invalid("tree needs at least two boundary vertices");
        }
        let half_edges: usize = rot.iter().map(Vec::len).sum();
        if half_edges != 2 * (rot.len() - 1) {
            return invalid("edge count is not |V| - 1");
        }
        let mut tail = vec![usize::MAX; half_edges];
        for (v, hs) in rot.iter().enumerate() {
            for &h in hs {
                if h >= half_edges || tail[h] != usize::MAX {
                    return invalid(format!("oriented edge {h} repeated or out of range"));
                }
                tail[h] = v;
            }
        }
        let kinds = (0..rot.len())
            .map(|v| if v < n { VertexKind::Boundary(v + 1) } else { VertexKind::Inner })
            .collect();
        let t = PlaneTree { n, kinds, rot, tail };
        for v in 0..t.num_vertices() {
            if t.deg(v) == 0 {
                return invalid(format!("vertex {v} is isolated"));
            }
            if t.is_inner(v) && t.deg(v) < 3 {
                return invalid(format!("inner vertex {v} has degree {}", t.deg(v)));
            }
        }
        // connectivity; with |E| = |V| - 1 this makes it a tree
        let mut seen = vec![false; t.num_vertices()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &h in &t.rot[v] {
                let w = t.head(h);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return invalid("graph is not connected");
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_edges(&self) -> usize {
        self.tail.len() / 2
    }

    pub fn num_oriented_edges(&self) -> usize {
        self.tail.len()
    }

    pub fn kind(&self, v: usize) -> VertexKind {
        self.kinds[v]
    }

    pub fn is_inner(&self, v: usize) -> bool {
        self.kinds[v] == VertexKind::Inner
    }

    /// Vertex index of the boundary vertex with label `label`.
    pub fn boundary_vertex(&self, label: usize) -> usize {
        debug_assert!((1..=self.n).contains(&label));
        label - 1
    }

    pub fn inner_vertices(&self) -> std::ops::Range<usize> {
        self.n..self.num_vertices()
    }

    pub fn deg(&self, v: usize) -> usize {
        self.rot[v].len()
    }

    /// Counterclockwise outgoing oriented edges at `v`.
    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rot[v]
    }

    pub fn tail(&self, h: usize) -> usize {
        self.tail[h]
    }

    pub fn head(&self, h: usize) -> usize {
        self.tail[h ^ 1]
    }

    /// Index of oriented edge `h` in the rotation at its tail.
    pub fn position(&self, h: usize) -> usize {
        let v = self.tail[h];
        self.rot[v].iter().position(|&x| x == h).expect("oriented edge missing from rotation")
    }

    /// The oriented edge following `h` counterclockwise around its tail.
    pub fn next_ccw(&self, h: usize) -> usize {
        let v = self.tail[h];
        let i = self.position(h);
        self.rot[v][(i + 1) % self.rot[v].len()]
    }

    /// True iff both endpoints of undirected edge `e` are inner vertices.
    pub fn is_inner_edge(&self, e: usize) -> bool {
        self.is_inner(self.tail[2 * e]) && self.is_inner(self.tail[2 * e + 1])
    }

    /// Undirected edges with two inner endpoints.
    pub fn inner_edges(&self) -> Vec<usize> {
        (0..self.num_edges()).filter(|&e| self.is_inner_edge(e)).collect()
    }

    /// Σ_v (2 − deg v); equals 2 for every tree.
    pub fn euler_sum(&self) -> i64 {
        (0..self.num_vertices()).map(|v| 2 - self.deg(v) as i64).sum()
    }

    /// Checks class membership for the given cusp mask.
    pub fn check_class(&self, mask: &CuspMask, class: TreeClass) -> Result<()> {
        if mask.n() != self.n {
            return invalid(format!("mask has {} entries, tree has n = {}", mask.n(), self.n));
        }
        for label in 1..=self.n {
            let d = self.deg(label - 1);
            if mask.is_cusp(label) && d != 1 {
                return invalid(format!("cusp {label} has degree {d}"));
            }
        }
        for v in self.inner_vertices() {
            let d = self.deg(v);
            let ok = match class {
                TreeClass::Delaunay => d == 3,
                TreeClass::Anti => d >= 3,
            };
            if !ok {
                return invalid(format!("inner vertex {v} has degree {d}"));
            }
        }
        Ok(())
    }

    fn code_from(&self, v: usize, parent_edge: Option<usize>, out: &mut String) {
        match self.kinds[v] {
            VertexKind::Boundary(l) => {
                let _ = write!(out, "b{l}(");
            }
            VertexKind::Inner => out.push_str("r("),
        }
        for h in self.children(v, parent_edge) {
            self.code_from(self.head(h), Some(h ^ 1), out);
        }
        out.push(')');
    }

    /// Outgoing edges at `v` in ccw order starting after `parent_edge`
    /// (the outgoing edge towards the parent), excluding it.
    fn children(&self, v: usize, parent_edge: Option<usize>) -> Vec<usize> {
        let r = &self.rot[v];
        match parent_edge {
            None => r.clone(),
            Some(p) => {
                let i = r.iter().position(|&x| x == p).expect("parent edge not at vertex");
                (1..r.len()).map(|k| r[(i + k) % r.len()]).collect()
            }
        }
    }

    /// Code with the root rotation starting at position `start`.
    fn code_rotated(&self, start: usize) -> String {
        let r = &self.rot[0];
        let mut out = String::from("b1(");
        for k in 0..r.len() {
            let h = r[(start + k) % r.len()];
            self.code_from(self.head(h), Some(h ^ 1), &mut out);
        }
        out.push(')');
        out
    }

    fn canonical_start(&self) -> (usize, String) {
        let r = &self.rot[0];
        let parts: Vec<String> = r
            .iter()
            .map(|&h| {
                let mut out = String::new();
                self.code_from(self.head(h), Some(h ^ 1), &mut out);
                out
            })
            .collect();
        let parts = &parts;
        let rotated = |s: usize| (0..parts.len()).flat_map(move |k| parts[(s + k) % parts.len()].bytes());
        let best = (1..parts.len()).fold(0, |best, s| if rotated(s).lt(rotated(best)) { s } else { best });
        let mut code = String::from("b1(");
        for k in 0..parts.len() {
            code.push_str(&parts[(best + k) % parts.len()]);
        }
        code.push(')');
        (best, code)
    }

    /// Depth-first parenthesis/color/label string rooted at boundary vertex 1,
    /// minimized over the starting edge at vertex 1.
    pub fn canonical_code(&self) -> String {
        self.canonical_start().1
    }

    /// The same tree renumbered by the canonical depth-first traversal:
    /// inner vertices and edges in visiting order, the edge towards the root
    /// first in every non-root rotation.
    pub fn canonical_form(&self) -> PlaneTree {
        let (start, _) = self.canonical_start();
        let nv = self.num_vertices();
        let mut new_index: Vec<usize> = (0..nv).map(|v| if v < self.n { v } else { usize::MAX }).collect();
        let mut next_inner = self.n;
        let mut edge_id = vec![usize::MAX; self.num_oriented_edges()];
        let mut next_edge = 0;
        let mut parent_edge = vec![None; nv];
        let r0 = &self.rot[0];
        let root_seq: Vec<usize> = (0..r0.len()).map(|k| r0[(start + k) % r0.len()]).collect();
        let mut stack: Vec<usize> = root_seq.iter().rev().copied().collect();
        while let Some(h) = stack.pop() {
            edge_id[h] = next_edge;
            edge_id[h ^ 1] = next_edge + 1;
            next_edge += 2;
            let w = self.head(h);
            if new_index[w] == usize::MAX {
                new_index[w] = next_inner;
                next_inner += 1;
            }
            parent_edge[w] = Some(h ^ 1);
            stack.extend(self.children(w, Some(h ^ 1)).into_iter().rev());
        }
        let mut rot = vec![Vec::new(); nv];
        for v in 0..nv {
            let seq = match parent_edge[v] {
                None => root_seq.clone(),
                Some(p) => {
                    let mut s = vec![p];
                    s.extend(self.children(v, Some(p)));
                    s
                }
            };
            rot[new_index[v]] = seq.iter().map(|&h| edge_id[h]).collect();
        }
        PlaneTree::from_rotations(self.n, rot).expect("relabeling preserves validity")
    }

    /// Unique simple path between boundary vertices `i` and `j`.
    pub fn boundary_path(&self, i: usize, j: usize) -> Result<TreePath> {
        if i == j || i == 0 || j == 0 || i > self.n || j > self.n {
            return invalid(format!("boundary_path needs distinct labels in 1..={}, got {i}, {j}", self.n));
        }
        let (src, dst) = (i - 1, j - 1);
        let mut via = vec![usize::MAX; self.num_vertices()];
        let mut stack = vec![src];
        let mut seen = vec![false; self.num_vertices()];
        seen[src] = true;
        while let Some(v) = stack.pop() {
            for &h in &self.rot[v] {
                let w = self.head(h);
                if !seen[w] {
                    seen[w] = true;
                    via[w] = h;
                    stack.push(w);
                }
            }
        }
        let mut edges = Vec::new();
        let mut v = dst;
        while v != src {
            let h = via[v];
            edges.push(h);
            v = self.tail(h);
        }
        edges.reverse();
        let mut vertices = vec![src];
        vertices.extend(edges.iter().map(|&h| self.head(h)));
        let steps = (1..edges.len())
            .map(|k| {
                let v = vertices[k];
                PathStep {
                    vertex: v,
                    entrance: self.position(edges[k - 1] ^ 1),
                    exit: self.position(edges[k]),
                }
            })
            .collect();
        Ok(TreePath { vertices, edges, steps })
    }

    /// Contracts the undirected edges `a`, each joining two inner vertices.
    pub fn contract_edges(&self, a: &[usize]) -> Result<Contraction> {
        let mut in_a = vec![false; self.num_edges()];
        for &e in a {
            if e >= self.num_edges() {
                return invalid(format!("edge {e} out of range"));
            }
            if !self.is_inner_edge(e) {
                return invalid(format!("edge {e} touches a boundary vertex"));
            }
            in_a[e] = true;
        }
        let nv = self.num_vertices();
        // union-find over contracted edges
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let z = p[y];
                p[y] = r;
                y = z;
            }
            r
        }
        for (e, &c) in in_a.iter().enumerate() {
            if c {
                let (x, y) = (find(&mut parent, self.tail[2 * e]), find(&mut parent, self.tail[2 * e + 1]));
                parent[x.max(y)] = x.min(y);
            }
        }
        let mut vertex_map = vec![usize::MAX; nv];
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in self.n..nv {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        for v in 0..self.n {
            vertex_map[v] = v;
        }
        let mut merged = Vec::new();
        for (k, (_, members)) in groups.iter().enumerate() {
            for &m in members {
                vertex_map[m] = self.n + k;
            }
            let internal: Vec<usize> =
                (0..self.num_edges()).filter(|&e| in_a[e] && members.contains(&self.tail[2 * e])).collect();
            merged.push(MergedVertex { members: members.clone(), internal_edges: internal, degree: 0 });
        }
        let mut edge_map = vec![usize::MAX; self.num_oriented_edges()];
        let mut next = 0;
        for e in 0..self.num_edges() {
            if !in_a[e] {
                edge_map[2 * e] = next;
                edge_map[2 * e + 1] = next + 1;
                next += 2;
            }
        }
        let mut rot = vec![Vec::new(); self.n + merged.len()];
        for v in 0..self.n {
            rot[v] = self.rot[v].iter().map(|&h| edge_map[h]).collect();
        }
        for (k, g) in merged.iter_mut().enumerate() {
            let start = g
                .members
                .iter()
                .flat_map(|&m| self.rot[m].iter().copied())
                .find(|&h| !in_a[h / 2]);
            let Some(start) = start else {
                return invalid("contracted component has no external edge");
            };
            let mut seq = vec![start];
            let mut h = self.next_ccw(start);
            loop {
                while in_a[h / 2] {
                    h = self.next_ccw(h ^ 1);
                }
                if h == start {
                    break;
                }
                seq.push(h);
                h = self.next_ccw(h);
            }
            g.degree = seq.len();
            rot[self.n + k] = seq.iter().map(|&h| edge_map[h]).collect();
        }
        let tree = PlaneTree::from_rotations(self.n, rot)?;
        Ok(Contraction { tree, merged, vertex_map, edge_map })
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            n: self.n,
            inner: self.inner_vertices().map(|v| InnerJson { deg: self.deg(v) }).collect(),
            boundary: (0..self.n).map(|v| BoundaryJson { label: v + 1, deg: self.deg(v) }).collect(),
            ccw_orders: self.rot.clone(),
            code: self.canonical_code(),
        }
    }

    pub fn from_json(j: &TreeJson) -> Result<Self> {
        if j.ccw_orders.len() != j.n + j.inner.len() {
            return invalid("ccw_orders length does not match the vertex lists");
        }
        let t = PlaneTree::from_rotations(j.n, j.ccw_orders.clone())?;
        let degs_ok = j.boundary.iter().all(|b| b.label >= 1 && b.label <= j.n && t.deg(b.label - 1) == b.deg)
            && j.inner.iter().enumerate().all(|(k, i)| t.deg(j.n + k) == i.deg);
        if !degs_ok {
            return invalid("declared degrees do not match ccw_orders");
        }
        if t.canonical_code() != j.code {
            return invalid("code does not match the tree");
        }
        Ok(t)
    }
}

/// A boundary-to-boundary path; `edges[k]` is oriented from `vertices[k]` to
/// `vertices[k + 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePath {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    /// One entry per intermediate vertex.
    pub steps: Vec<PathStep>,
}

/// Entrance and exit positions in the ccw rotation of an intermediate vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathStep {
    pub vertex: usize,
    pub entrance: usize,
    pub exit: usize,
}

#[derive(Clone, Debug)]
pub struct MergedVertex {
    /// Inner vertices of the original tree forming the subtree `𝔱_v`.
    pub members: Vec<usize>,
    /// Contracted edges inside the subtree.
    pub internal_edges: Vec<usize>,
    /// Degree of the merged vertex, i.e. the number of leaves of `𝔱_v`.
    pub degree: usize,
}

#[derive(Clone, Debug)]
pub struct Contraction {
    pub tree: PlaneTree,
    /// Indexed by `new vertex - n`.
    pub merged: Vec<MergedVertex>,
    /// Old vertex to new vertex.
    pub vertex_map: Vec<usize>,
    /// Old oriented edge to new oriented edge, `usize::MAX` when contracted.
    pub edge_map: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnerJson {
    pub deg: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryJson {
    pub label: usize,
    pub deg: usize,
}

/// Serialized tree. `ccw_orders[i]` lists the outgoing oriented edges of
/// boundary label `i + 1` for `i < n`, then of the inner vertices in order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub n: usize,
    pub inner: Vec<InnerJson>,
    pub boundary: Vec<BoundaryJson>,
    pub ccw_orders: Vec<Vec<usize>>,
    pub code: String,
}

/// Rooted plane subtree hanging from a parent edge.
enum Planted {
    White(usize, Vec<Rc<Planted>>),
    Red(Vec<Rc<Planted>>),
}

struct Generator<'a> {
    mask: &'a CuspMask,
    class: TreeClass,
    planted: HashMap<u64, Rc<Vec<Rc<Planted>>>>,
    seqs: HashMap<(u64, usize), Rc<Vec<Vec<Rc<Planted>>>>>,
}

impl Generator<'_> {
    /// All planted subtrees whose label set is exactly `set` (bit `i` = label `i + 1`).
    fn planted(&mut self, set: u64) -> Rc<Vec<Rc<Planted>>> {
        if let Some(p) = self.planted.get(&set) {
            return p.clone();
        }
        let mut out = Vec::new();
        for i in bits(set) {
            let rest = set & !(1 << i);
            let label = i + 1;
            let max_children = if self.mask.is_cusp(label) { 0 } else { rest.count_ones() as usize };
            for k in 0..=max_children {
                for s in self.seqs(rest, k).iter() {
                    out.push(Rc::new(Planted::White(label, s.clone())));
                }
            }
        }
        let (lo, hi) = match self.class {
            TreeClass::Delaunay => (2, 2),
            TreeClass::Anti => (2, set.count_ones() as usize),
        };
        for k in lo..=hi {
            for s in self.seqs(set, k).iter() {
                out.push(Rc::new(Planted::Red(s.clone())));
            }
        }
        let out = Rc::new(out);
        self.planted.insert(set, out.clone());
        out
    }

    /// Sequences of `k` planted subtrees whose label sets partition `set`.
    fn seqs(&mut self, set: u64, k: usize) -> Rc<Vec<Vec<Rc<Planted>>>> {
        if let Some(s) = self.seqs.get(&(set, k)) {
            return s.clone();
        }
        let mut out = Vec::new();
        if k == 0 {
            if set == 0 {
                out.push(Vec::new());
            }
        } else if (set.count_ones() as usize) >= k {
            for first in subsets(set) {
                let rest = set & !first;
                if (rest.count_ones() as usize) < k - 1 {
                    continue;
                }
                let heads = self.planted(first);
                if heads.is_empty() {
                    continue;
                }
                let tails = self.seqs(rest, k - 1);
                for h in heads.iter() {
                    for t in tails.iter() {
                        let mut s = Vec::with_capacity(k);
                        s.push(h.clone());
                        s.extend(t.iter().cloned());
                        out.push(s);
                    }
                }
            }
        }
        let out = Rc::new(out);
        self.seqs.insert((set, k), out.clone());
        out
    }
}

fn bits(set: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| set >> i & 1 == 1)
}

/// Nonempty subsets of `set`.
fn subsets(set: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut s = set;
    while s != 0 {
        out.push(s);
        s = (s - 1) & set;
    }
    out
}

struct Builder {
    n: usize,
    rot: Vec<Vec<usize>>,
    next_edge: usize,
}

impl Builder {
    /// Attaches `p` below vertex `parent`, returning nothing; edges get ids in preorder.
    fn attach(&mut self, parent: usize, p: &Planted) {
        let h = self.next_edge;
        self.next_edge += 2;
        self.rot[parent].push(h);
        let (v, children) = match p {
            Planted::White(label, c) => (label - 1, c),
            Planted::Red(c) => {
                self.rot.push(Vec::new());
                (self.rot.len() - 1, c)
            }
        };
        debug_assert!(v >= self.n || self.rot[v].is_empty());
        self.rot[v].push(h + 1);
        for c in children {
            self.attach(v, c);
        }
    }
}

fn enumerate(n: usize, mask: &CuspMask, class: TreeClass) -> Result<Vec<PlaneTree>> {
    if n < 2 {
        return invalid(format!("n must be at least 2, got {n}"));
    }
    if mask.n() != n {
        return invalid(format!("mask has {} entries, expected {n}", mask.n()));
    }
    if n > 16 {
        return invalid("n above 16 is outside the enumeration envelope");
    }
    let mut g = Generator { mask, class, planted: HashMap::new(), seqs: HashMap::new() };
    let rest: u64 = ((1u64 << n) - 1) & !1;
    let max_deg = if mask.is_cusp(1) { 1 } else { n - 1 };
    let mut trees = Vec::new();
    for k in 1..=max_deg {
        for s in g.seqs(rest, k).iter() {
            // one rotation per class: the subtree containing label 2 first
            if !contains_label(&s[0], 2) {
                continue;
            }
            let mut b = Builder { n, rot: vec![Vec::new(); n], next_edge: 0 };
            for p in s {
                b.attach(0, p);
            }
            let t = PlaneTree::from_rotations(n, b.rot)?.canonical_form();
            // the canonical start of a canonical form is rotation entry 0
            let code = t.code_rotated(0);
            trees.push((code, t));
        }
    }
    trees.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    Ok(trees.into_iter().map(|(_, t)| t).collect())
}

fn contains_label(p: &Planted, label: usize) -> bool {
    match p {
        Planted::White(l, c) => *l == label || c.iter().any(|x| contains_label(x, label)),
        Planted::Red(c) => c.iter().any(|x| contains_label(x, label)),
    }
}

/// All trees of `𝔗ₙ(𝐋)`, sorted by canonical code.
pub fn enumerate_delaunay(n: usize, mask: &CuspMask) -> Result<Vec<PlaneTree>> {
    enumerate(n, mask, TreeClass::Delaunay)
}

/// All trees of `𝔗̃ₙ(𝐋)`, sorted by canonical code.
pub fn enumerate_anti(n: usize, mask: &CuspMask) -> Result<Vec<PlaneTree>> {
    enumerate(n, mask, TreeClass::Anti)
}

/// Catalan number `C_k`.
pub fn catalan(k: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(s: &str) -> CuspMask {
        CuspMask::parse(s).unwrap()
    }

    #[test]
    fn single_edge() {
        for m in ["11", "00", "10"] {
            let d = enumerate_delaunay(2, &mask(m)).unwrap();
            assert_eq!(d.len(), 1);
            assert_eq!(d[0].num_edges(), 1);
            assert_eq!(enumerate_anti(2, &mask(m)).unwrap().len(), 1);
        }
    }

    #[test]
    fn three_labels_two_cusps() {
        let d = enumerate_delaunay(3, &mask("110")).unwrap();
        assert_eq!(d.len(), 3);
        let stars = d.iter().filter(|t| t.num_vertices() == 4).count();
        assert_eq!(stars, 2);
        assert_eq!(enumerate_anti(3, &mask("110")).unwrap().len(), 3);
    }

    #[test]
    fn three_positive_has_five() {
        assert_eq!(enumerate_anti(3, &mask("000")).unwrap().len(), 5);
        assert_eq!(enumerate_delaunay(3, &mask("000")).unwrap().len(), 5);
    }

    #[test]
    fn rejects_small_n() {
        assert!(CuspMask::parse("1").is_err());
    }

    #[test]
    fn star_orientations_differ() {
        let d = enumerate_delaunay(3, &mask("111")).unwrap();
        assert_eq!(d.len(), 2);
        assert_ne!(d[0].canonical_code(), d[1].canonical_code());
    }

    #[test]
    fn catalan_numbers() {
        let c: Vec<u128> = (0..7).map(catalan).collect();
        assert_eq!(c, vec![1, 1, 2, 5, 14, 42, 132]);
    }

    #[test]
    fn caterpillar_contraction() {
        let d = enumerate_delaunay(4, &mask("1111")).unwrap();
        let t = &d[0];
        let e = t.inner_edges();
        assert_eq!(e.len(), 1);
        let c = t.contract_edges(&e).unwrap();
        assert_eq!(c.tree.num_vertices(), 5);
        assert_eq!(c.tree.deg(4), 4);
        assert_eq!(c.merged[0].members.len(), 2);
        let same = t.contract_edges(&[]).unwrap();
        assert_eq!(same.tree.canonical_code(), t.canonical_code());
    }

    #[test]
    fn contraction_rejects_boundary_edge() {
        let d = enumerate_delaunay(3, &mask("111")).unwrap();
        assert!(d[0].contract_edges(&[0]).is_err());
    }

    #[test]
    fn path_through_middle_vertex() {
        let d = enumerate_delaunay(3, &mask("110")).unwrap();
        let path = d.iter().find(|t| t.num_vertices() == 3).unwrap();
        let p = path.boundary_path(1, 2).unwrap();
        assert_eq!(p.edges.len(), 2);
        assert_eq!(p.steps.len(), 1);
        assert_eq!(p.steps[0].vertex, 2);
        assert_ne!(p.steps[0].entrance, p.steps[0].exit);
        let star = d.iter().find(|t| t.num_vertices() == 4).unwrap();
        assert_eq!(star.boundary_path(1, 2).unwrap().edges.len(), 2);
        assert!(star.boundary_path(1, 1).is_err());
    }
}
