use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;
use wpspine::trees::{catalan, enumerate_anti, enumerate_delaunay, CuspMask, PlaneTree, TreeClass};

/// Brute force: every labeled tree on `n + m` vertices (Prüfer sequences),
/// every rotation system, deduplicated by canonical code.
fn brute_force(n: usize, mask: &CuspMask, class: TreeClass) -> BTreeSet<String> {
    let mut codes = BTreeSet::new();
    for m in 0..=n.saturating_sub(2) {
        let nv = n + m;
        let seqs = if nv == 2 { vec![vec![]] } else { prufer_sequences(nv) };
        for seq in seqs {
            let edges = prufer_decode(nv, &seq);
            let mut deg = vec![0; nv];
            for &(a, b) in &edges {
                deg[a] += 1;
                deg[b] += 1;
            }
            let ok_boundary = (0..n).all(|v| !mask.is_cusp(v + 1) || deg[v] == 1);
            let ok_inner = (n..nv).all(|v| match class {
                TreeClass::Delaunay => deg[v] == 3,
                TreeClass::Anti => deg[v] >= 3,
            });
            if !ok_boundary || !ok_inner {
                continue;
            }
            let mut incident = vec![Vec::new(); nv];
            for (e, &(a, b)) in edges.iter().enumerate() {
                incident[a].push(2 * e);
                incident[b].push(2 * e + 1);
            }
            for rot in all_rotations(&incident) {
                codes.insert(PlaneTree::from_rotations(n, rot).unwrap().canonical_code());
            }
        }
    }
    codes
}

fn prufer_sequences(nv: usize) -> Vec<Vec<usize>> {
    let len = nv - 2;
    let mut out = Vec::new();
    let mut cur = vec![0; len];
    loop {
        out.push(cur.clone());
        let mut i = 0;
        while i < len {
            cur[i] += 1;
            if cur[i] < nv {
                break;
            }
            cur[i] = 0;
            i += 1;
        }
        if i == len {
            return out;
        }
    }
}

fn prufer_decode(nv: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    let mut deg = vec![1; nv];
    for &x in seq {
        deg[x] += 1;
    }
    let mut edges = Vec::new();
    for &x in seq {
        let leaf = (0..nv).find(|&v| deg[v] == 1).unwrap();
        edges.push((leaf, x));
        deg[leaf] -= 1;
        deg[x] -= 1;
    }
    let rest: Vec<usize> = (0..nv).filter(|&v| deg[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// All cyclic orders per vertex (first element fixed).
fn all_rotations(incident: &[Vec<usize>]) -> Vec<Vec<Vec<usize>>> {
    let mut out = vec![Vec::new()];
    for inc in incident {
        let perms = cyclic_orders(inc);
        let mut next = Vec::new();
        for partial in &out {
            for p in &perms {
                let mut x: Vec<Vec<usize>> = partial.clone();
                x.push(p.clone());
                next.push(x);
            }
        }
        out = next;
    }
    out
}

fn cyclic_orders(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 2 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    permute(&items[1..], &mut Vec::new(), &mut vec![false; items.len() - 1], &mut |p| {
        let mut v = vec![items[0]];
        v.extend_from_slice(p);
        out.push(v);
    });
    out
}

fn permute(items: &[usize], cur: &mut Vec<usize>, used: &mut Vec<bool>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == items.len() {
        f(cur);
        return;
    }
    for i in 0..items.len() {
        if !used[i] {
            used[i] = true;
            cur.push(items[i]);
            permute(items, cur, used, f);
            cur.pop();
            used[i] = false;
        }
    }
}

fn codes(trees: &[PlaneTree]) -> BTreeSet<String> {
    trees.iter().map(PlaneTree::canonical_code).collect()
}

#[test]
fn enumeration_matches_brute_force() {
    for n in 2..=5 {
        for bits in 0..(1u64 << n) {
            let mask = CuspMask::from_bits(n, bits).unwrap();
            for class in [TreeClass::Delaunay, TreeClass::Anti] {
                // the n=5 anti-Delaunay oracle is only affordable with few positive lengths
                if n == 5 && class == TreeClass::Anti && bits.count_ones() < 3 {
                    continue;
                }
                let trees = match class {
                    TreeClass::Delaunay => enumerate_delaunay(n, &mask).unwrap(),
                    TreeClass::Anti => enumerate_anti(n, &mask).unwrap(),
                };
                let got = codes(&trees);
                assert_eq!(got.len(), trees.len(), "duplicate trees for n={n} mask={bits:b}");
                assert_eq!(got, brute_force(n, &mask, class), "n={n} mask={bits:b} {class:?}");
            }
        }
    }
}

#[test]
fn frozen_counts() {
    // brute-force oracle counts
    let all_pos = |n| CuspMask::all_positive(n).unwrap();
    let all_cusp = |n| CuspMask::all_cusps(n).unwrap();
    assert_eq!(enumerate_anti(3, &all_pos(3)).unwrap().len(), 5);
    assert_eq!(enumerate_delaunay(4, &all_cusp(4)).unwrap().len(), 12);
    assert_eq!(enumerate_anti(4, &all_cusp(4)).unwrap().len(), 18);
    assert_eq!(enumerate_anti(4, &all_pos(4)).unwrap().len(), 62);
}

#[test]
fn tree_invariants_up_to_six() {
    for n in 2..=6 {
        for bits in 0..(1u64 << n) {
            let mask = CuspMask::from_bits(n, bits).unwrap();
            let del = enumerate_delaunay(n, &mask).unwrap();
            let anti = enumerate_anti(n, &mask).unwrap();
            for t in del.iter().chain(&anti) {
                assert_eq!(t.euler_sum(), 2);
            }
            for t in &del {
                t.check_class(&mask, TreeClass::Delaunay).unwrap();
            }
            for t in &anti {
                t.check_class(&mask, TreeClass::Anti).unwrap();
            }
            assert!(codes(&del).is_subset(&codes(&anti)));
            let sorted: Vec<String> = anti.iter().map(PlaneTree::canonical_code).collect();
            assert!(sorted.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

#[test]
fn catalan_preimages_per_anti_tree() {
    for n in 2..=6 {
        for bits in 0..(1u64 << n) {
            let mask = CuspMask::from_bits(n, bits).unwrap();
            let mut count: HashMap<String, u128> = HashMap::new();
            let mut pairs = 0u128;
            for t in enumerate_delaunay(n, &mask).unwrap() {
                let inner = t.inner_edges();
                for sub in 0..(1u64 << inner.len()) {
                    let a: Vec<usize> =
                        inner.iter().enumerate().filter(|(i, _)| sub >> i & 1 == 1).map(|(_, &e)| e).collect();
                    let c = t.contract_edges(&a).unwrap();
                    c.tree.check_class(&mask, TreeClass::Anti).unwrap();
                    *count.entry(c.tree.canonical_code()).or_default() += 1;
                    pairs += 1;
                }
            }
            let anti = enumerate_anti(n, &mask).unwrap();
            let mut total = 0u128;
            for t in &anti {
                let want: u128 = t.inner_vertices().map(|v| catalan(t.deg(v) - 2)).product();
                assert_eq!(count.get(&t.canonical_code()).copied().unwrap_or(0), want);
                total += want;
            }
            assert_eq!(total, pairs);
            assert_eq!(count.len(), anti.len());
        }
    }
}

#[test]
fn json_round_trip() {
    for t in enumerate_anti(4, &CuspMask::parse("1000").unwrap()).unwrap() {
        let j = serde_json::to_string(&t.to_json()).unwrap();
        let back = PlaneTree::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, t);
    }
}

/// Same plane tree with every rotation cyclically shifted and edges renamed.
fn scramble(t: &PlaneTree, shifts: &[usize], perm: &[usize]) -> PlaneTree {
    let rename = |h: usize| 2 * perm[h / 2] + (h & 1);
    let rot = (0..t.num_vertices())
        .map(|v| {
            let r = t.rotation(v);
            let s = shifts[v] % r.len();
            (0..r.len()).map(|k| rename(r[(s + k) % r.len()])).collect()
        })
        .collect();
    PlaneTree::from_rotations(t.n(), rot).unwrap()
}

proptest! {
    #[test]
    fn code_independent_of_presentation(
        idx in 0usize..64,
        shifts in proptest::collection::vec(0usize..8, 16),
        keys in proptest::collection::vec(0u32..1000, 16),
    ) {
        let trees = enumerate_anti(4, &CuspMask::all_positive(4).unwrap()).unwrap();
        let t = &trees[idx % trees.len()];
        let mut perm: Vec<usize> = (0..t.num_edges()).collect();
        perm.sort_by_key(|&e| (keys[e], e));
        let s = scramble(t, &shifts, &perm);
        prop_assert_eq!(s.canonical_code(), t.canonical_code());
        prop_assert_eq!(s.canonical_form(), t.clone());
    }
}
