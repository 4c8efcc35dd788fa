//! Enumeration of homotopy diagrams by graft decomposition: choose a
//! multiset of labeled unitrivalent trees, then every order of the legs
//! along each segment, and deduplicate by canonical key.

use std::collections::BTreeSet;

use super::{canonicalize, CanonicalKey, Diagram, VertexId};

/// A unitrivalent tree with distinct leaf labels. Nodes `0..labels.len()`
/// are the leaves (carrying `labels[i]`), higher nodes are internal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TreeShape {
    pub labels: Vec<usize>,
    pub internal: usize,
    pub edges: Vec<(usize, usize)>,
}

impl TreeShape {
    pub fn order(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn num_free(&self) -> usize {
        self.internal
    }
}

/// All trivalent trees on leaves `0..l`, as edge lists, by inserting each new
/// leaf on every edge of the previous trees. There are `(2l-5)!!` for `l >= 3`.
fn leaf_trees(l: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(l >= 2);
    // Internal nodes are numbered from `l` upward in creation order.
    let mut trees = vec![vec![(0usize, 1usize)]];
    for leaf in 2..l {
        let mut next = Vec::new();
        for t in &trees {
            let internal = l + leaf - 2;
            for e in 0..t.len() {
                let (a, b) = t[e];
                let mut nt: Vec<(usize, usize)> = t.clone();
                nt[e] = (a, internal);
                nt.push((internal, b));
                nt.push((leaf, internal));
                next.push(nt);
            }
        }
        trees = next;
    }
    trees
}

/// All trees with one leaf per label in `labels` (distinct, ascending).
pub fn tree_shapes(labels: &[usize]) -> Vec<TreeShape> {
    let l = labels.len();
    leaf_trees(l)
        .into_iter()
        .map(|edges| TreeShape { labels: labels.to_vec(), internal: l.saturating_sub(2), edges })
        .collect()
}

/// Every tree shape on every label subset of `1..=m` of size at least two.
pub fn graft_types(m: usize) -> Vec<TreeShape> {
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << m) {
        if mask.count_ones() < 2 {
            continue;
        }
        let labels: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).map(|i| i + 1).collect();
        out.extend(tree_shapes(&labels));
    }
    out.sort();
    out
}

/// Assemble a diagram from grafts and, per segment, the order in which the
/// grafts' legs appear. `leg_order[s]` lists graft indices touching segment
/// `s + 1`, each exactly once.
pub(crate) fn assemble(m: usize, grafts: &[&TreeShape], leg_order: &[Vec<usize>]) -> Diagram {
    let mut id: VertexId = 0;
    let mut seg_vertices = vec![Vec::new(); m];
    // Vertex id of each (graft, node).
    let mut node_id: Vec<Vec<VertexId>> = grafts.iter().map(|g| vec![0; g.labels.len() + g.internal]).collect();
    for (s, order) in leg_order.iter().enumerate() {
        for &g in order {
            let leaf = grafts[g].labels.iter().position(|&l| l == s + 1).expect("graft touches segment");
            id += 1;
            node_id[g][leaf] = id;
            seg_vertices[s].push(id);
        }
    }
    let mut free_vertices = Vec::new();
    for (g, t) in grafts.iter().enumerate() {
        for k in 0..t.internal {
            id += 1;
            node_id[g][t.labels.len() + k] = id;
            free_vertices.push(id);
        }
    }
    let mut edges = Vec::new();
    for (g, t) in grafts.iter().enumerate() {
        for &(a, b) in &t.edges {
            edges.push((node_id[g][a], node_id[g][b]));
        }
    }
    Diagram::new(m, seg_vertices, free_vertices, edges)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Keys of every diagram built from the given grafts, over all leg orders.
pub(crate) fn all_leg_orders(m: usize, grafts: &[&TreeShape], out: &mut BTreeSet<CanonicalKey>) {
    let per_segment: Vec<Vec<Vec<usize>>> = (1..=m)
        .map(|s| {
            let touching: Vec<usize> =
                grafts.iter().enumerate().filter(|(_, g)| g.labels.contains(&s)).map(|(i, _)| i).collect();
            permutations(&touching)
        })
        .collect();
    let mut choice = vec![0usize; m];
    loop {
        let orders: Vec<Vec<usize>> = (0..m).map(|s| per_segment[s][choice[s]].clone()).collect();
        let d = assemble(m, grafts, &orders);
        let (key, sign) = canonicalize(&d).expect("assembled diagrams are valid");
        debug_assert_ne!(sign, 0);
        out.insert(key);
        let mut s = 0;
        loop {
            if s == m {
                return;
            }
            choice[s] += 1;
            if choice[s] < per_segment[s].len() {
                break;
            }
            choice[s] = 0;
            s += 1;
        }
    }
}

fn multisets<'a>(
    types: &'a [TreeShape],
    start: usize,
    order_left: usize,
    free_left: usize,
    current: &mut Vec<&'a TreeShape>,
    emit: &mut dyn FnMut(&[&'a TreeShape]),
) {
    if order_left == 0 {
        emit(current);
        return;
    }
    for i in start..types.len() {
        let t = &types[i];
        if t.order() <= order_left && t.num_free() <= free_left {
            current.push(t);
            multisets(types, i, order_left - t.order(), free_left - t.num_free(), current, emit);
            current.pop();
        }
    }
}

/// All trivalent homotopy diagrams of order `n` on `m` segments with at most
/// `max_free` free vertices (clamped to `n - 1`), sorted by key.
pub fn enumerate_trivalent(n: usize, m: usize, max_free: usize) -> Vec<CanonicalKey> {
    let max_free = max_free.min(n.saturating_sub(1));
    let types = graft_types(m);
    let mut out = BTreeSet::new();
    let mut current = Vec::new();
    multisets(&types, 0, n, max_free, &mut current, &mut |grafts| {
        all_leg_orders(m, grafts, &mut out);
    });
    out.into_iter().collect()
}

/// All homotopy chord diagrams of order `n` on `m` segments.
pub fn enumerate_chord(n: usize, m: usize) -> Vec<CanonicalKey> {
    enumerate_trivalent(n, m, 0)
}

/// Connected diagrams: a single tree with one leaf on each segment in
/// `labels`, drawn on `m` segments.
pub fn enumerate_trees(labels: &[usize], m: usize) -> Vec<CanonicalKey> {
    let mut labels = labels.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let mut out = BTreeSet::new();
    for shape in tree_shapes(&labels) {
        all_leg_orders(m, &[&shape], &mut out);
    }
    out.into_iter().collect()
}
