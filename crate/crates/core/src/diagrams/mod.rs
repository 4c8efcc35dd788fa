//! Homotopy link diagrams: segments carrying ordered segment vertices, free
//! vertices off the segments, and edges forming a forest whose components
//! (grafts) each reach the segments at most once per segment.
//!
//! Vertex ids run over `1..=|V|`; their numeric order is the vertex order of
//! the integration orientation, and every edge is directed `(tail, head)`.
//! Reordering vertices by a permutation multiplies a diagram by the sign of
//! the permutation; reversing one edge multiplies it by `-1`.

mod canonical;
pub mod enumerate;
mod lie;
mod lincomb;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::DiagramError;

pub use canonical::{
    automorphism_count, canonicalize, canonicalize_forest, forest_class, has_same_segment_path, CanonicalKey,
};
pub use enumerate::{enumerate_chord, enumerate_trees, enumerate_trivalent, TreeShape};
pub use lie::{lie_to_integration, LieDiagram};
pub use lincomb::LinComb;

pub type VertexId = u32;

fn default_sign() -> i8 {
    1
}

/// A homotopy link diagram with an integration orientation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagram {
    pub m: usize,
    pub seg_vertices: Vec<Vec<VertexId>>,
    pub free_vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
    #[serde(default = "default_sign")]
    pub sign: i8,
}

/// Where a vertex sits. Segments and positions are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexKind {
    Segment { segment: usize, position: usize },
    Free,
}

/// A violated constraint of the trivalent diagram definition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "kebab-case")]
pub enum Violation {
    /// Vertex valence (edges plus segment sides) is not three.
    Valence { vertex: VertexId, valence: usize },
    /// A free vertex has no edge path to any segment.
    Unanchored { vertex: VertexId },
    /// Two vertices on one segment are joined by an edge path.
    SameSegmentPath { first: VertexId, second: VertexId },
    /// The edges contain a closed loop.
    Cycle,
    /// Two edges join the same pair of vertices.
    RepeatedEdge { first: VertexId, second: VertexId },
    /// The vertex count is odd, so there is no integral order.
    OddVertexCount,
}

/// Resolved vertex data, indexed by `id - 1`.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub kinds: Vec<VertexKind>,
    /// Multigraph adjacency over indices; one entry per edge end.
    pub adj: Vec<Vec<usize>>,
}

impl Layout {
    pub fn valence(&self, v: usize) -> usize {
        match self.kinds[v] {
            VertexKind::Segment { .. } => self.adj[v].len() + 2,
            VertexKind::Free => self.adj[v].len(),
        }
    }
}

impl Diagram {
    pub fn new(
        m: usize,
        seg_vertices: Vec<Vec<VertexId>>,
        free_vertices: Vec<VertexId>,
        edges: Vec<(VertexId, VertexId)>,
    ) -> Self {
        Diagram { m, seg_vertices, free_vertices, edges, sign: 1 }
    }

    /// The diagram with no vertices on `m` segments.
    pub fn empty(m: usize) -> Self {
        Diagram::new(m, vec![Vec::new(); m], Vec::new(), Vec::new())
    }

    /// Single chord between segments `i` and `j` (1-based) on `m` segments.
    pub fn chord(m: usize, i: usize, j: usize) -> Self {
        let mut seg = vec![Vec::new(); m];
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        seg[lo - 1].push(1);
        seg[hi - 1].push(2);
        Diagram::new(m, seg, Vec::new(), vec![(1, 2)])
    }

    /// The tripod on segments `a < b < c` of `m`: one leg per segment, all
    /// meeting at a free vertex, edges directed into the free vertex.
    pub fn tripod(m: usize, a: usize, b: usize, c: usize) -> Self {
        let mut seg = vec![Vec::new(); m];
        seg[a - 1].push(1);
        seg[b - 1].push(2);
        seg[c - 1].push(3);
        Diagram::new(m, seg, vec![4], vec![(1, 4), (2, 4), (3, 4)])
    }

    /// Chord diagram from a list of chords given as `(segment, segment)`
    /// pairs in order of their endpoints along every segment: chords listed
    /// earlier sit earlier on each segment they touch.
    pub fn from_chords(m: usize, chords: &[(usize, usize)]) -> Self {
        let mut seg: Vec<Vec<VertexId>> = vec![Vec::new(); m];
        let mut ends = Vec::new();
        for &(a, b) in chords {
            ends.push((a - 1, b - 1));
        }
        // Assign ids segment by segment so the id order is the canonical one.
        let mut slot: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
        for (c, &(a, b)) in ends.iter().enumerate() {
            slot[a].push((c, 0));
            slot[b].push((c, 1));
        }
        let mut id = 0;
        let mut endpoint = vec![[0u32; 2]; chords.len()];
        for (s, list) in slot.iter().enumerate() {
            for &(c, side) in list {
                id += 1;
                seg[s].push(id);
                endpoint[c][side] = id;
            }
        }
        let edges = endpoint
            .iter()
            .map(|e| if e[0] < e[1] { (e[0], e[1]) } else { (e[1], e[0]) })
            .collect();
        Diagram::new(m, seg, Vec::new(), edges)
    }

    pub fn with_sign(mut self, sign: i8) -> Self {
        self.sign = sign;
        self
    }

    pub fn num_vertices(&self) -> usize {
        self.seg_vertices.iter().map(Vec::len).sum::<usize>() + self.free_vertices.len()
    }

    pub fn num_segment_vertices(&self) -> usize {
        self.seg_vertices.iter().map(Vec::len).sum()
    }

    pub fn num_free(&self) -> usize {
        self.free_vertices.len()
    }

    /// `|E| - |V_free|`; equals `|V| / 2` on trivalent diagrams.
    pub fn order(&self) -> i64 {
        self.edges.len() as i64 - self.free_vertices.len() as i64
    }

    /// `2|E| - |V_seg| - 3|V_free|`; zero exactly on trivalent diagrams.
    pub fn defect(&self) -> i64 {
        2 * self.edges.len() as i64 - self.num_segment_vertices() as i64 - 3 * self.free_vertices.len() as i64
    }

    pub fn is_chord_diagram(&self) -> bool {
        self.free_vertices.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("diagram serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, DiagramError> {
        serde_json::from_str(s).map_err(|e| DiagramError::Malformed(e.to_string()))
    }

    /// Checks id bookkeeping and resolves vertex kinds.
    pub(crate) fn layout(&self) -> Result<Layout, DiagramError> {
        if self.seg_vertices.len() != self.m {
            return Err(DiagramError::Malformed(format!(
                "{} segment lists for m = {}",
                self.seg_vertices.len(),
                self.m
            )));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(DiagramError::Malformed(format!("sign {} is not +1 or -1", self.sign)));
        }
        let nv = self.num_vertices();
        let mut kinds: Vec<Option<VertexKind>> = vec![None; nv];
        let mut place = |id: VertexId, kind: VertexKind| -> Result<(), DiagramError> {
            let idx = (id as usize).checked_sub(1).filter(|&i| i < nv).ok_or_else(|| {
                DiagramError::Malformed(format!("vertex id {id} outside 1..={nv}"))
            })?;
            if kinds[idx].replace(kind).is_some() {
                return Err(DiagramError::Malformed(format!("vertex id {id} used twice")));
            }
            Ok(())
        };
        for (s, list) in self.seg_vertices.iter().enumerate() {
            for (p, &id) in list.iter().enumerate() {
                place(id, VertexKind::Segment { segment: s, position: p })?;
            }
        }
        for &id in &self.free_vertices {
            place(id, VertexKind::Free)?;
        }
        let kinds: Vec<VertexKind> = kinds.into_iter().map(|k| k.expect("all ids placed")).collect();
        let mut adj = vec![Vec::new(); nv];
        for &(t, h) in &self.edges {
            for id in [t, h] {
                if id == 0 || id as usize > nv {
                    return Err(DiagramError::Malformed(format!("edge endpoint {id} outside 1..={nv}")));
                }
            }
            let (t, h) = (t as usize - 1, h as usize - 1);
            adj[t].push(h);
            if t != h {
                adj[h].push(t);
            }
        }
        Ok(Layout { kinds, adj })
    }

    /// Connected components of the edge graph (segments removed), as vertex
    /// index lists sorted ascending, ordered by least index.
    pub(crate) fn components(layout: &Layout) -> Vec<Vec<usize>> {
        let nv = layout.kinds.len();
        let mut seen = vec![false; nv];
        let mut out = Vec::new();
        for start in 0..nv {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                for &w in &layout.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    fn check(&self, exact_trivalent: bool) -> Result<Vec<Violation>, DiagramError> {
        let layout = self.layout()?;
        let mut out = Vec::new();
        let nv = layout.kinds.len();
        for v in 0..nv {
            let val = layout.valence(v);
            if (exact_trivalent && val != 3) || val < 3 {
                out.push(Violation::Valence { vertex: v as VertexId + 1, valence: val });
            }
        }
        let mut pairs = BTreeSet::new();
        let mut has_cycle = false;
        let mut uf: Vec<usize> = (0..nv).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        for &(t, h) in &self.edges {
            let key = (t.min(h), t.max(h));
            if !pairs.insert(key) {
                out.push(Violation::RepeatedEdge { first: key.0, second: key.1 });
            }
            let (a, b) = (find(&mut uf, t as usize - 1), find(&mut uf, h as usize - 1));
            if a == b {
                has_cycle = true;
            } else {
                uf[a] = b;
            }
        }
        if has_cycle {
            out.push(Violation::Cycle);
        }
        for comp in Diagram::components(&layout) {
            let mut by_segment: std::collections::BTreeMap<usize, usize> = Default::default();
            let mut anchored = false;
            for &v in &comp {
                if let VertexKind::Segment { segment, .. } = layout.kinds[v] {
                    anchored = true;
                    if let Some(&prev) = by_segment.get(&segment) {
                        out.push(Violation::SameSegmentPath {
                            first: prev as VertexId + 1,
                            second: v as VertexId + 1,
                        });
                    } else {
                        by_segment.insert(segment, v);
                    }
                }
            }
            if !anchored {
                for &v in &comp {
                    out.push(Violation::Unanchored { vertex: v as VertexId + 1 });
                }
            }
        }
        if exact_trivalent && nv % 2 == 1 {
            out.push(Violation::OddVertexCount);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Violations of the trivalent homotopy diagram definition; empty means
    /// valid. Malformed ids are a hard error rather than a violation.
    pub fn validate(&self) -> Result<Vec<Violation>, DiagramError> {
        self.check(true)
    }

    /// Like [`Diagram::validate`] but allowing valence at least three, as in
    /// the full diagram complex.
    pub fn validate_graded(&self) -> Result<Vec<Violation>, DiagramError> {
        self.check(false)
    }

    /// The grafts: connected components left after deleting the segments.
    pub fn grafts(&self) -> Result<Vec<Graft>, DiagramError> {
        let layout = self.layout()?;
        let comps = Diagram::components(&layout);
        let mut out = Vec::new();
        for comp in comps {
            let members: BTreeSet<usize> = comp.iter().copied().collect();
            let edges = self
                .edges
                .iter()
                .filter(|(t, _)| members.contains(&(*t as usize - 1)))
                .copied()
                .collect::<Vec<_>>();
            let mut leaves = Vec::new();
            let mut free = Vec::new();
            for &v in &comp {
                match layout.kinds[v] {
                    VertexKind::Segment { segment, position } => leaves.push(Leaf {
                        vertex: v as VertexId + 1,
                        segment: segment + 1,
                        position,
                    }),
                    VertexKind::Free => free.push(v as VertexId + 1),
                }
            }
            out.push(Graft { free_vertices: free, edges, leaves });
        }
        Ok(out)
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

/// A leaf of a graft: a segment vertex with a 1-based segment label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leaf {
    pub vertex: VertexId,
    pub segment: usize,
    pub position: usize,
}

/// A connected component of a diagram with its segments removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graft {
    pub free_vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
    pub leaves: Vec<Leaf>,
}

impl Graft {
    pub fn is_single_edge(&self) -> bool {
        self.free_vertices.is_empty() && self.edges.len() == 1
    }

    pub fn labels(&self) -> Vec<usize> {
        let mut l: Vec<usize> = self.leaves.iter().map(|x| x.segment).collect();
        l.sort_unstable();
        l
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tripod_is_valid() {
        let t = Diagram::tripod(3, 1, 2, 3);
        assert_eq!(t.validate().unwrap(), vec![]);
        assert_eq!(t.order(), 2);
        assert_eq!(t.defect(), 0);
    }

    #[test]
    fn same_segment_chord_is_rejected() {
        let d = Diagram::new(1, vec![vec![1, 2]], vec![], vec![(1, 2)]);
        let v = d.validate().unwrap();
        assert_eq!(v, vec![Violation::SameSegmentPath { first: 1, second: 2 }]);
    }

    #[test]
    fn parallel_free_edges() {
        let d = Diagram::new(1, vec![vec![]], vec![1, 2], vec![(1, 2), (1, 2)]);
        let v = d.validate().unwrap();
        assert!(v.contains(&Violation::Cycle));
        assert!(v.contains(&Violation::RepeatedEdge { first: 1, second: 2 }));
    }

    #[test]
    fn malformed_ids_are_errors() {
        let d = Diagram::new(2, vec![vec![1], vec![3]], vec![], vec![(1, 3)]);
        assert!(matches!(d.validate(), Err(DiagramError::Malformed(_))));
        let d = Diagram::new(2, vec![vec![1], vec![1]], vec![], vec![(1, 2)]);
        assert!(matches!(d.validate(), Err(DiagramError::Malformed(_))));
        let d = Diagram::new(3, vec![vec![1], vec![2]], vec![], vec![(1, 2)]);
        assert!(matches!(d.validate(), Err(DiagramError::Malformed(_))));
    }

    #[test]
    fn json_is_compact_and_round_trips() {
        let text = r#"{"m":3,"segVertices":[[1,2],[3],[4]],"freeVertices":[5],"edges":[[1,5],[3,5]],"sign":1}"#;
        let d = Diagram::from_json(text).unwrap();
        assert_eq!(d.to_json(), text);
        let spaced = r#"{"m": 3, "segVertices": [[1,2],[3],[4]], "freeVertices": [5], "edges": [[1,5],[3,5]], "sign": 1}"#;
        assert_eq!(Diagram::from_json(spaced).unwrap(), d);
    }

    #[test]
    fn grafts_of_tripod_and_chord_pair() {
        let t = Diagram::tripod(3, 1, 2, 3);
        let g = t.grafts().unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].labels(), vec![1, 2, 3]);
        assert_eq!(g[0].free_vertices, vec![4]);

        let two = Diagram::from_chords(2, &[(1, 2), (1, 2)]);
        let g = two.grafts().unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.iter().all(Graft::is_single_edge));
    }

    #[test]
    fn from_chords_orders_ids_by_segment() {
        // L: segment 1 carries the chord to 2 first, then the chord to 3.
        let l = Diagram::from_chords(3, &[(1, 2), (1, 3)]);
        assert_eq!(l.seg_vertices, vec![vec![1, 2], vec![3], vec![4]]);
        assert_eq!(l.edges, vec![(1, 3), (2, 4)]);
    }
}
