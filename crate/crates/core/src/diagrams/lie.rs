use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::canonical::permutation_parity;
use super::{Diagram, VertexId, VertexKind};
use crate::error::DiagramError;

/// A diagram with undirected edges and a cyclic order of the three
/// neighbors at each free vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LieDiagram {
    pub m: usize,
    pub seg_vertices: Vec<Vec<VertexId>>,
    pub free_vertices: Vec<VertexId>,
    pub links: Vec<(VertexId, VertexId)>,
    pub cyclic: BTreeMap<VertexId, [VertexId; 3]>,
}

impl LieDiagram {
    /// The planar tripod on segments `1, 2, 3` with the free vertex ordered
    /// `(1, 2, 3)`.
    pub fn tripod() -> Self {
        LieDiagram {
            m: 3,
            seg_vertices: vec![vec![1], vec![2], vec![3]],
            free_vertices: vec![4],
            links: vec![(1, 4), (2, 4), (3, 4)],
            cyclic: BTreeMap::from([(4, [1, 2, 3])]),
        }
    }

    pub fn from_json(s: &str) -> Result<Self, DiagramError> {
        serde_json::from_str(s).map_err(|e| DiagramError::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("diagram serializes")
    }

    fn skeleton(&self) -> Diagram {
        Diagram::new(self.m, self.seg_vertices.clone(), self.free_vertices.clone(), self.links.clone())
    }
}

/// Integration orientation induced by a Lie orientation.
///
/// Vertices are renumbered with segment vertices first in (segment, position)
/// order, then free vertices by id. Half-edges are listed vertex by vertex,
/// each free vertex contributing its three in cyclic order from the least
/// neighbor id; regrouping them edge by edge (edges in order of first
/// appearance, tail = earlier half-edge) is a permutation whose sign is
/// returned. The Lie diagram equals `sign` times the returned diagram.
pub fn lie_to_integration(d: &LieDiagram) -> Result<(Diagram, i8), DiagramError> {
    let skel = d.skeleton();
    let violations = skel.validate()?;
    if !violations.is_empty() {
        return Err(DiagramError::Invalid { violations });
    }
    let layout = skel.layout()?;
    let nv = layout.kinds.len();

    // New vertex order.
    let mut order: Vec<usize> = Vec::with_capacity(nv);
    for list in &d.seg_vertices {
        order.extend(list.iter().map(|&id| id as usize - 1));
    }
    let mut free: Vec<usize> = d.free_vertices.iter().map(|&id| id as usize - 1).collect();
    free.sort_unstable();
    order.extend(free);
    let mut new_id = vec![0usize; nv];
    for (k, &v) in order.iter().enumerate() {
        new_id[v] = k;
    }

    // Half-edges as (vertex, neighbor) in old indices.
    let mut half: Vec<(usize, usize)> = Vec::with_capacity(2 * d.links.len());
    for &v in &order {
        match layout.kinds[v] {
            VertexKind::Segment { .. } => {
                half.extend(layout.adj[v].iter().map(|&w| (v, w)));
            }
            VertexKind::Free => {
                let id = v as VertexId + 1;
                let cyc = d
                    .cyclic
                    .get(&id)
                    .ok_or_else(|| DiagramError::Malformed(format!("free vertex {id} has no cyclic order")))?;
                let mut nbrs: Vec<usize> = layout.adj[v].clone();
                nbrs.sort_unstable();
                let mut given: Vec<usize> = cyc.iter().map(|&c| c as usize - 1).collect();
                let mut sorted = given.clone();
                sorted.sort_unstable();
                if sorted != nbrs {
                    return Err(DiagramError::Malformed(format!(
                        "cyclic order at {id} is not a permutation of its neighbors"
                    )));
                }
                let start = (0..3).min_by_key(|&k| given[k]).unwrap();
                given.rotate_left(start);
                half.extend(given.iter().map(|&w| (v, w)));
            }
        }
    }
    for v in d.cyclic.keys() {
        if !d.free_vertices.contains(v) {
            return Err(DiagramError::Malformed(format!("cyclic order given for non-free vertex {v}")));
        }
    }

    // Pair half-edges into edges, ordered by first appearance.
    let mut partner: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut perm = Vec::with_capacity(half.len());
    let mut edges = Vec::with_capacity(d.links.len());
    for (p, &(v, w)) in half.iter().enumerate() {
        if partner.contains_key(&(w, v)) {
            continue;
        }
        let q = half
            .iter()
            .enumerate()
            .skip(p + 1)
            .find(|(_, &h)| h == (w, v))
            .map(|(q, _)| q)
            .ok_or_else(|| DiagramError::Malformed("unpaired half-edge".into()))?;
        partner.insert((v, w), q);
        perm.push(p);
        perm.push(q);
        edges.push((new_id[v] as VertexId + 1, new_id[w] as VertexId + 1));
    }
    let sign = permutation_parity(&perm);

    let mut seg = Vec::with_capacity(d.m);
    for list in &d.seg_vertices {
        seg.push(list.iter().map(|&id| new_id[id as usize - 1] as VertexId + 1).collect());
    }
    let num_seg: usize = d.seg_vertices.iter().map(Vec::len).sum();
    let free_ids = (num_seg as VertexId + 1..=nv as VertexId).collect();
    Ok((Diagram::new(d.m, seg, free_ids, edges), sign))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagrams::canonicalize;

    #[test]
    fn planar_tripod_sign() {
        let (d, s) = lie_to_integration(&LieDiagram::tripod()).unwrap();
        assert_eq!(s, -1);
        assert_eq!(d.edges, vec![(1, 4), (2, 4), (3, 4)]);
        assert_eq!(canonicalize(&d).unwrap().1, 1);
    }

    #[test]
    fn chord_has_positive_sign() {
        let l = LieDiagram {
            m: 2,
            seg_vertices: vec![vec![1], vec![2]],
            free_vertices: vec![],
            links: vec![(2, 1)],
            cyclic: BTreeMap::new(),
        };
        let (d, s) = lie_to_integration(&l).unwrap();
        assert_eq!(s, 1);
        assert_eq!(d.edges, vec![(1, 2)]);
    }

    #[test]
    fn rotation_and_transposition() {
        let signed = |c: [VertexId; 3]| {
            let mut t = LieDiagram::tripod();
            t.cyclic.insert(4, c);
            let (d, s) = lie_to_integration(&t).unwrap();
            let (k, cs) = canonicalize(&d).unwrap();
            (k, s * cs)
        };
        let base = signed([1, 2, 3]);
        assert_eq!(signed([2, 3, 1]), base);
        assert_eq!(signed([3, 1, 2]), base);
        let (k, s) = signed([2, 1, 3]);
        assert_eq!((k, -s), base);
    }

    #[test]
    fn json_round_trip() {
        let t = LieDiagram::tripod();
        let text = t.to_json();
        assert!(text.contains(r#""cyclic":{"4":[1,2,3]}"#), "{text}");
        assert_eq!(LieDiagram::from_json(&text).unwrap(), t);
    }
}
