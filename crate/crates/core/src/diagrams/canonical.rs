use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Diagram, Layout, VertexId, VertexKind, Violation};
use crate::error::DiagramError;

/// Serialization of a diagram after canonical relabeling.
///
/// Segment vertices get ids `1..=S` in (segment, position) order and free
/// vertices follow; every edge is directed from the smaller id to the larger
/// and the edge list is sorted. Field order gives the basis order used by
/// every matrix: fewer free vertices first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey {
    num_free: usize,
    seg_counts: Vec<usize>,
    edges: Vec<(VertexId, VertexId)>,
}

impl CanonicalKey {
    /// The diagram with no vertices.
    pub fn empty(m: usize) -> Self {
        CanonicalKey { num_free: 0, seg_counts: vec![0; m], edges: Vec::new() }
    }

    pub fn m(&self) -> usize {
        self.seg_counts.len()
    }

    pub fn seg_counts(&self) -> &[usize] {
        &self.seg_counts
    }

    pub fn num_free(&self) -> usize {
        self.num_free
    }

    pub fn num_segment_vertices(&self) -> usize {
        self.seg_counts.iter().sum()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_segment_vertices() + self.num_free
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn order(&self) -> i64 {
        self.edges.len() as i64 - self.num_free as i64
    }

    pub fn defect(&self) -> i64 {
        2 * self.edges.len() as i64 - self.num_segment_vertices() as i64 - 3 * self.num_free as i64
    }

    /// Segment (1-based) of each canonical segment vertex id `1..=S`.
    pub fn segment_of(&self, id: VertexId) -> Option<usize> {
        let mut upto = 0;
        for (s, &c) in self.seg_counts.iter().enumerate() {
            upto += c;
            if (id as usize) <= upto {
                return Some(s + 1);
            }
        }
        None
    }

    /// Number of distinct segments carrying a vertex.
    pub fn touched_segments(&self) -> usize {
        self.seg_counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn touches_all_segments(&self) -> bool {
        self.seg_counts.iter().all(|&c| c > 0)
    }

    /// Whether the diagram together with its segments is connected, i.e. the
    /// segments and grafts form one piece.
    pub fn is_connected(&self) -> bool {
        let m = self.m();
        let nv = self.num_vertices();
        // Nodes: vertices 0..nv, then segments nv..nv+m.
        let mut uf: Vec<usize> = (0..nv + m).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        let join = |uf: &mut Vec<usize>, a: usize, b: usize| {
            let (a, b) = (find(uf, a), find(uf, b));
            if a != b {
                uf[a] = b;
            }
        };
        let mut id = 0;
        for (s, &c) in self.seg_counts.iter().enumerate() {
            for _ in 0..c {
                join(&mut uf, id, nv + s);
                id += 1;
            }
        }
        for &(t, h) in &self.edges {
            join(&mut uf, t as usize - 1, h as usize - 1);
        }
        let mut roots = BTreeSet::new();
        for v in 0..nv {
            roots.insert(find(&mut uf, v));
        }
        for s in 0..m {
            if self.seg_counts[s] > 0 {
                roots.insert(find(&mut uf, nv + s));
            }
        }
        roots.len() <= 1
    }

    pub fn is_chord_diagram(&self) -> bool {
        self.num_free == 0
    }

    /// The diagram with canonical ids and sign `+1`.
    pub fn to_diagram(&self) -> Diagram {
        let mut seg = Vec::with_capacity(self.m());
        let mut id: VertexId = 0;
        for &c in &self.seg_counts {
            seg.push((0..c).map(|_| {
                id += 1;
                id
            }).collect());
        }
        let free = (0..self.num_free).map(|_| {
            id += 1;
            id
        }).collect();
        Diagram::new(self.m(), seg, free, self.edges.clone())
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let counts: Vec<String> = self.seg_counts.iter().map(|c| c.to_string()).collect();
        let edges: Vec<String> = self.edges.iter().map(|(t, h)| format!("{t}-{h}")).collect();
        write!(f, "{};{}|{}", counts.join(","), self.num_free, edges.join(","))
    }
}

impl FromStr for CanonicalKey {
    type Err = DiagramError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DiagramError::BadKey(s.to_string());
        let (head, edge_part) = s.split_once('|').ok_or_else(bad)?;
        let (counts, free) = head.split_once(';').ok_or_else(bad)?;
        let seg_counts = counts
            .split(',')
            .map(|c| c.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        let num_free = free.trim().parse::<usize>().map_err(|_| bad())?;
        let mut edges = Vec::new();
        if !edge_part.trim().is_empty() {
            for e in edge_part.split(',') {
                let (t, h) = e.split_once('-').ok_or_else(bad)?;
                let t = t.trim().parse::<VertexId>().map_err(|_| bad())?;
                let h = h.trim().parse::<VertexId>().map_err(|_| bad())?;
                edges.push((t, h));
            }
        }
        let key = CanonicalKey { num_free, seg_counts, edges };
        // Only accept strings that are genuinely canonical.
        let (again, sign) = canonicalize_forest(&key.to_diagram()).map_err(|_| bad())?.ok_or_else(bad)?;
        if again != key || sign != 1 {
            return Err(bad());
        }
        Ok(key)
    }
}

impl Serialize for CanonicalKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CanonicalKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

enum Canon {
    Key(CanonicalKey, i8),
    /// Repeated edge or edge cycle: the zero element.
    Zero,
    SameSegment(Violation),
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

fn has_repeat_or_cycle(d: &Diagram) -> bool {
    let nv = d.num_vertices();
    let mut uf: Vec<usize> = (0..nv).collect();
    let mut seen = BTreeSet::new();
    for &(t, h) in &d.edges {
        if t == h || !seen.insert((t.min(h), t.max(h))) {
            return true;
        }
        let (a, b) = (find(&mut uf, t as usize - 1), find(&mut uf, h as usize - 1));
        if a == b {
            return true;
        }
        uf[a] = b;
    }
    false
}

pub(crate) fn permutation_parity(perm: &[usize]) -> i8 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1i8;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = perm[x];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

fn seg_new_ids(layout: &Layout, d: &Diagram) -> Vec<Option<usize>> {
    let mut offsets = Vec::with_capacity(d.m);
    let mut acc = 0;
    for list in &d.seg_vertices {
        offsets.push(acc);
        acc += list.len();
    }
    layout
        .kinds
        .iter()
        .map(|k| match *k {
            VertexKind::Segment { segment, position } => Some(offsets[segment] + position),
            VertexKind::Free => None,
        })
        .collect()
}

fn canon(d: &Diagram, forest: bool) -> Result<Canon, DiagramError> {
    let layout = d.layout()?;
    if has_repeat_or_cycle(d) {
        return Ok(Canon::Zero);
    }
    let nv = layout.kinds.len();
    let num_seg = d.num_segment_vertices();
    let seg_id = seg_new_ids(&layout, d);

    let comps = Diagram::components(&layout);
    let mut roots = Vec::with_capacity(comps.len());
    for comp in &comps {
        let mut by_segment: BTreeMap<usize, usize> = BTreeMap::new();
        let mut root: Option<usize> = None;
        for &v in comp {
            if let VertexKind::Segment { segment, .. } = layout.kinds[v] {
                if let Some(&prev) = by_segment.get(&segment).filter(|_| !forest) {
                    return Ok(Canon::SameSegment(Violation::SameSegmentPath {
                        first: prev as VertexId + 1,
                        second: v as VertexId + 1,
                    }));
                }
                by_segment.insert(segment, v);
                if root.is_none_or(|r| seg_id[v] < seg_id[r]) {
                    root = Some(v);
                }
            }
        }
        match root {
            Some(r) => roots.push(r),
            None => {
                return Err(DiagramError::Invalid {
                    violations: comp.iter().map(|&v| Violation::Unanchored { vertex: v as VertexId + 1 }).collect(),
                })
            }
        }
    }
    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by_key(|&c| seg_id[roots[c]]);
    let roots: Vec<usize> = order.iter().map(|&c| roots[c]).collect();

    let mut new_id: Vec<usize> = (0..nv).map(|v| seg_id[v].unwrap_or(usize::MAX)).collect();
    let mut next_free = num_seg;
    for &root in &roots {
        // Rooted traversal: parent pointers and a top-down order.
        let mut parent = vec![usize::MAX; nv];
        let mut topo = vec![root];
        parent[root] = root;
        let mut i = 0;
        while i < topo.len() {
            let v = topo[i];
            for &w in &layout.adj[v] {
                if parent[w] == usize::MAX {
                    parent[w] = v;
                    topo.push(w);
                }
            }
            i += 1;
        }
        // Least segment id below each vertex.
        let mut below: BTreeMap<usize, usize> = BTreeMap::new();
        for &v in topo.iter().rev() {
            let mut best = seg_id[v].unwrap_or(usize::MAX);
            for &w in &layout.adj[v] {
                if parent[w] == v && w != root {
                    best = best.min(below[&w]);
                }
            }
            below.insert(v, best);
        }
        // Preorder with children sorted by least segment id below them.
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            if seg_id[v].is_none() {
                new_id[v] = next_free;
                next_free += 1;
            }
            let mut kids: Vec<usize> =
                layout.adj[v].iter().copied().filter(|&w| parent[w] == v && w != root).collect();
            kids.sort_by_key(|w| below[w]);
            if kids.iter().any(|w| below[w] == usize::MAX) {
                return Err(DiagramError::Invalid {
                    violations: vec![Violation::Valence {
                        vertex: v as VertexId + 1,
                        valence: layout.valence(v),
                    }],
                });
            }
            for &w in kids.iter().rev() {
                stack.push(w);
            }
        }
    }
    debug_assert_eq!(next_free, nv);

    let parity = permutation_parity(&new_id);
    let mut flips = 0;
    let mut edges: Vec<(VertexId, VertexId)> = d
        .edges
        .iter()
        .map(|&(t, h)| {
            let (a, b) = (new_id[t as usize - 1] as VertexId + 1, new_id[h as usize - 1] as VertexId + 1);
            if a < b {
                (a, b)
            } else {
                flips += 1;
                (b, a)
            }
        })
        .collect();
    edges.sort_unstable();
    let sign = d.sign * parity * if flips % 2 == 0 { 1 } else { -1 };
    let key = CanonicalKey {
        num_free: d.free_vertices.len(),
        seg_counts: d.seg_vertices.iter().map(Vec::len).collect(),
        edges,
    };
    Ok(Canon::Key(key, sign))
}

/// Key of a zero diagram: segment vertices relabeled canonically, free
/// vertices kept in id order. Not an isomorphism invariant.
fn raw_key(d: &Diagram) -> Result<CanonicalKey, DiagramError> {
    let layout = d.layout()?;
    let seg_id = seg_new_ids(&layout, d);
    let num_seg = d.num_segment_vertices();
    let mut free: Vec<usize> = (0..layout.kinds.len()).filter(|&v| seg_id[v].is_none()).collect();
    free.sort_unstable();
    let mut new_id: Vec<usize> = seg_id.iter().map(|s| s.unwrap_or(0)).collect();
    for (k, &v) in free.iter().enumerate() {
        new_id[v] = num_seg + k;
    }
    let mut edges: Vec<(VertexId, VertexId)> = d
        .edges
        .iter()
        .map(|&(t, h)| {
            let (a, b) = (new_id[t as usize - 1] as VertexId + 1, new_id[h as usize - 1] as VertexId + 1);
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort_unstable();
    Ok(CanonicalKey {
        num_free: d.free_vertices.len(),
        seg_counts: d.seg_vertices.iter().map(Vec::len).collect(),
        edges,
    })
}

/// Canonical key and the sign relating `d` to the canonical diagram:
/// `d = sign * key.to_diagram()`.
///
/// Sign 0 marks the zero element (a repeated edge or an edge cycle); its key
/// is then only a relabeled copy of `d`. Same-segment paths and unanchored
/// free vertices are errors.
pub fn canonicalize(d: &Diagram) -> Result<(CanonicalKey, i8), DiagramError> {
    match canon(d, false)? {
        Canon::Key(k, s) => Ok((k, s)),
        Canon::Zero => Ok((raw_key(d)?, 0)),
        Canon::SameSegment(v) => Err(DiagramError::Invalid { violations: vec![v] }),
    }
}

/// Canonical form in the larger complex of forest diagrams, where a graft
/// may meet a segment more than once. `None` is the zero element.
///
/// Such diagrams vanish as homotopy trivalent diagrams, but the differential
/// of a trivalent diagram can land on them in defect one, and keeping them
/// there is what makes closed cochains agree with the STU conditions.
pub fn canonicalize_forest(d: &Diagram) -> Result<Option<(CanonicalKey, i8)>, DiagramError> {
    match canon(d, true)? {
        Canon::Key(k, s) => Ok(Some((k, s))),
        Canon::Zero => Ok(None),
        Canon::SameSegment(_) => unreachable!("forest mode accepts same-segment paths"),
    }
}

/// Whether some graft meets one segment twice.
pub fn has_same_segment_path(key: &CanonicalKey) -> bool {
    let d = key.to_diagram();
    let layout = d.layout().expect("keys describe well-formed diagrams");
    Diagram::components(&layout).iter().any(|comp| {
        let mut seen = BTreeSet::new();
        comp.iter().any(|&v| match layout.kinds[v] {
            VertexKind::Segment { segment, .. } => !seen.insert(segment),
            VertexKind::Free => false,
        })
    })
}

/// Number of graph automorphisms fixing every segment vertex. Free vertices
/// may be permuted; the edge multiset (undirected) must be preserved.
pub fn automorphism_count(d: &Diagram) -> Result<u64, DiagramError> {
    let layout = d.layout()?;
    let nv = layout.kinds.len();
    let free: Vec<usize> = (0..nv).filter(|&v| layout.kinds[v] == VertexKind::Free).collect();
    let mut mult: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(t, h) in &d.edges {
        let (a, b) = (t as usize - 1, h as usize - 1);
        *mult.entry((a.min(b), a.max(b))).or_default() += 1;
    }
    let mut image: Vec<Option<usize>> =
        (0..nv).map(|v| if layout.kinds[v] == VertexKind::Free { None } else { Some(v) }).collect();
    let mut used = vec![false; nv];

    fn consistent(
        v: usize,
        g: usize,
        layout: &Layout,
        image: &[Option<usize>],
        mult: &BTreeMap<(usize, usize), usize>,
    ) -> bool {
        if layout.adj[v].len() != layout.adj[g].len() {
            return false;
        }
        for &w in &layout.adj[v] {
            if let Some(iw) = if w == v { Some(g) } else { image[w] } {
                let m1 = mult.get(&(v.min(w), v.max(w))).copied().unwrap_or(0);
                let m2 = mult.get(&(g.min(iw), g.max(iw))).copied().unwrap_or(0);
                if m1 != m2 {
                    return false;
                }
            }
        }
        true
    }

    fn search(
        i: usize,
        free: &[usize],
        layout: &Layout,
        image: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        mult: &BTreeMap<(usize, usize), usize>,
    ) -> u64 {
        if i == free.len() {
            let mapped: BTreeMap<(usize, usize), usize> = mult
                .iter()
                .map(|(&(a, b), &c)| {
                    let (x, y) = (image[a].unwrap(), image[b].unwrap());
                    ((x.min(y), x.max(y)), c)
                })
                .collect();
            return u64::from(&mapped == mult);
        }
        let v = free[i];
        let mut total = 0;
        for &g in free {
            if used[g] || !consistent(v, g, layout, image, mult) {
                continue;
            }
            used[g] = true;
            image[v] = Some(g);
            total += search(i + 1, free, layout, image, used, mult);
            image[v] = None;
            used[g] = false;
        }
        total
    }

    Ok(search(0, &free, &layout, &mut image, &mut used, &mult))
}

/// Underlying unitrivalent forest: each graft written as a tree of segment
/// labels rooted at its least label, children sorted by least label below.
/// Diagrams differing only in leg order along segments share the class.
pub fn forest_class(d: &Diagram) -> Result<String, DiagramError> {
    let layout = d.layout()?;
    let label = |v: usize| match layout.kinds[v] {
        VertexKind::Segment { segment, .. } => Some(segment + 1),
        VertexKind::Free => None,
    };
    fn least(v: usize, p: usize, layout: &Layout, label: &dyn Fn(usize) -> Option<usize>) -> usize {
        let mut best = label(v).unwrap_or(usize::MAX);
        for &w in &layout.adj[v] {
            if w != p {
                best = best.min(least(w, v, layout, label));
            }
        }
        best
    }
    fn write(v: usize, p: usize, layout: &Layout, label: &dyn Fn(usize) -> Option<usize>) -> String {
        let mut kids: Vec<(usize, usize)> = layout.adj[v]
            .iter()
            .filter(|&&w| w != p)
            .map(|&w| (least(w, v, layout, label), w))
            .collect();
        kids.sort_unstable();
        let inner: Vec<String> = kids.iter().map(|&(_, w)| write(w, v, layout, label)).collect();
        match label(v) {
            Some(l) if inner.is_empty() => l.to_string(),
            Some(l) => format!("{l}({})", inner.join(",")),
            None => format!("({})", inner.join(",")),
        }
    }
    let mut parts = Vec::new();
    for comp in Diagram::components(&layout) {
        let root = comp
            .iter()
            .copied()
            .filter(|&v| label(v).is_some())
            .min_by_key(|&v| label(v))
            .ok_or_else(|| DiagramError::Invalid {
                violations: vec![Violation::Unanchored { vertex: comp[0] as VertexId + 1 }],
            })?;
        parts.push(write(root, usize::MAX, &layout, &label));
    }
    parts.sort();
    Ok(format!("{}:{}", d.m, parts.join(" ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tripod_key_text() {
        let (k, s) = canonicalize(&Diagram::tripod(3, 1, 2, 3)).unwrap();
        assert_eq!(s, 1);
        assert_eq!(k.to_string(), "1,1,1;1|1-4,2-4,3-4");
        assert_eq!(k.to_string().parse::<CanonicalKey>().unwrap(), k);
        assert_eq!(k.order(), 2);
    }

    #[test]
    fn idempotent() {
        let d = Diagram::new(3, vec![vec![5], vec![2], vec![3]], vec![1, 4], vec![(1, 5), (4, 2), (1, 4), (3, 4)]);
        let (k, _) = canonicalize(&d).unwrap();
        let (k2, s2) = canonicalize(&k.to_diagram()).unwrap();
        assert_eq!(k, k2);
        assert_eq!(s2, 1);
    }

    #[test]
    fn transposition_of_segment_vertices() {
        // Swap ids 1 and 2 (on different segments).
        let t = Diagram::new(3, vec![vec![2], vec![1], vec![3]], vec![4], vec![(2, 4), (1, 4), (3, 4)]);
        let (k, s) = canonicalize(&t).unwrap();
        assert_eq!(k, canonicalize(&Diagram::tripod(3, 1, 2, 3)).unwrap().0);
        assert_eq!(s, -1);
    }

    #[test]
    fn edge_reversal() {
        let t = Diagram::new(3, vec![vec![1], vec![2], vec![3]], vec![4], vec![(4, 1), (2, 4), (3, 4)]);
        assert_eq!(canonicalize(&t).unwrap().1, -1);
    }

    #[test]
    fn zero_elements() {
        let d = Diagram::new(2, vec![vec![1], vec![2]], vec![], vec![(1, 2), (2, 1)]);
        assert_eq!(canonicalize(&d).unwrap().1, 0);
    }

    #[test]
    fn bad_keys_rejected() {
        for s in ["", "1,1;0", "1,1;0|2-1", "1,1;0|1-2,1-2x", "2;0|1-2,1-2"] {
            assert!(s.parse::<CanonicalKey>().is_err(), "{s}");
        }
        assert!("1,1;0|1-2".parse::<CanonicalKey>().is_ok());
        assert!("0,0;0|".parse::<CanonicalKey>().is_ok());
        // Same-segment chords occur in the complex above defect zero.
        assert!("2;0|1-2".parse::<CanonicalKey>().is_ok());
    }

    #[test]
    fn automorphisms() {
        assert_eq!(automorphism_count(&Diagram::tripod(3, 1, 2, 3)).unwrap(), 1);
        assert_eq!(automorphism_count(&Diagram::empty(2)).unwrap(), 1);
        // Two free vertices with no anchoring: a cyclic swap is a symmetry.
        let loose = Diagram::new(1, vec![vec![]], vec![1, 2], vec![(1, 2)]);
        assert_eq!(automorphism_count(&loose).unwrap(), 2);
    }

    #[test]
    fn forest_class_ignores_leg_order() {
        let l = Diagram::from_chords(3, &[(1, 2), (1, 3)]);
        let lp = Diagram::from_chords(3, &[(1, 3), (1, 2)]);
        assert_eq!(forest_class(&l).unwrap(), forest_class(&lp).unwrap());
        let m = Diagram::from_chords(3, &[(1, 2), (2, 3)]);
        assert_ne!(forest_class(&l).unwrap(), forest_class(&m).unwrap());
    }
}
