//! Differential and shuffle product on the diagram complex.
//!
//! Diagrams of any defect are plain [`Diagram`] values whose vertices have
//! valence at least three; `defect` and `order` come from
//! [`Diagram::defect`] and [`Diagram::order`].

use num_traits::One;

use crate::diagrams::{canonicalize_forest, LinComb, VertexId};
use crate::diagrams::{CanonicalKey, Diagram, Violation};
use crate::error::DiagramError;
use crate::exactla::Rational;

/// Where a vertex lives after contraction.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Place {
    Segment(usize, usize),
    Free,
}

fn places(d: &Diagram) -> Vec<Place> {
    let mut p = vec![Place::Free; d.num_vertices()];
    for (s, list) in d.seg_vertices.iter().enumerate() {
        for (k, &id) in list.iter().enumerate() {
            p[id as usize - 1] = Place::Segment(s, k);
        }
    }
    p
}

fn parity_to_front(n: usize, tail: usize, head: usize) -> i8 {
    // Order [tail, head, rest...] as a permutation of 0..n.
    let mut perm: Vec<usize> = vec![tail, head];
    perm.extend((0..n).filter(|&v| v != tail && v != head));
    let mut inv = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    if inv.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Contract `tail`/`head` (indices) into one vertex placed first in the
/// vertex order; `drop_edge` is removed from the edge list.
fn contract(d: &Diagram, tail: usize, head: usize, drop_edge: Option<usize>) -> Diagram {
    let n = d.num_vertices();
    let place = places(d);
    // New ids: merged = 1, the rest in their old order.
    let mut new_id = vec![0 as VertexId; n];
    new_id[tail] = 1;
    new_id[head] = 1;
    let mut next = 2;
    for v in 0..n {
        if v != tail && v != head {
            new_id[v] = next;
            next += 1;
        }
    }
    let merged_place = match (place[tail], place[head]) {
        (Place::Segment(s, k), _) | (_, Place::Segment(s, k)) => Place::Segment(s, k),
        _ => Place::Free,
    };
    let mut seg_vertices: Vec<Vec<VertexId>> = Vec::with_capacity(d.m);
    for list in &d.seg_vertices {
        let mut out = Vec::with_capacity(list.len());
        for &id in list {
            let v = id as usize - 1;
            if v == tail || v == head {
                if !out.contains(&1) {
                    out.push(1);
                }
            } else {
                out.push(new_id[v]);
            }
        }
        seg_vertices.push(out);
    }
    let mut free_vertices: Vec<VertexId> = Vec::new();
    if merged_place == Place::Free {
        free_vertices.push(1);
    }
    for &id in &d.free_vertices {
        let v = id as usize - 1;
        if v != tail && v != head {
            free_vertices.push(new_id[v]);
        }
    }
    let edges = d
        .edges
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != drop_edge)
        .map(|(_, &(t, h))| (new_id[t as usize - 1], new_id[h as usize - 1]))
        .collect();
    let sign = d.sign * parity_to_front(n, tail, head);
    Diagram { m: d.m, seg_vertices, free_vertices, edges, sign }
}

/// Signed sum over contractions of every edge with at least one free end and
/// of every arc between adjacent segment vertices.
///
/// Contracting `(tail, head)` first reorders the vertices as
/// `[tail, head, rest...]`, picking up that permutation's sign, and the merged
/// vertex takes the first place. An arc is contracted the same way with its
/// earlier vertex as tail. Results with repeated edges or edge cycles are
/// zero; results whose graft meets a segment twice are kept (see
/// [`canonicalize_forest`]).
pub fn differential(d: &Diagram) -> Result<LinComb, DiagramError> {
    let violations = d.validate_graded()?;
    if let Some(v) = violations.iter().find(|v| matches!(v, Violation::Unanchored { .. } | Violation::Valence { .. })) {
        return Err(DiagramError::Invalid { violations: vec![v.clone()] });
    }
    let place = places(d);
    let mut out = LinComb::new();
    let mut push = |c: Diagram| -> Result<(), DiagramError> {
        if let Some((key, sign)) = canonicalize_forest(&c)? {
            out.add_key(key, Rational::from_integer(sign.into()));
        }
        Ok(())
    };
    for (i, &(t, h)) in d.edges.iter().enumerate() {
        let (t, h) = (t as usize - 1, h as usize - 1);
        if matches!(place[t], Place::Segment(..)) && matches!(place[h], Place::Segment(..)) {
            continue;
        }
        push(contract(d, t, h, Some(i)))?;
    }
    for list in &d.seg_vertices {
        for w in list.windows(2) {
            push(contract(d, w[0] as usize - 1, w[1] as usize - 1, None))?;
        }
    }
    Ok(out)
}

/// Differential extended linearly.
pub fn differential_comb(c: &LinComb) -> Result<LinComb, DiagramError> {
    let mut out = LinComb::new();
    for (k, coef) in c.iter() {
        out.add_scaled(&differential(&k.to_diagram())?, coef);
    }
    Ok(out)
}

/// Sum of all shuffles with the vertex order `a`'s vertices then `b`'s.
/// Valid for any defect; the trivalent product is [`shuffle`].
pub fn shuffle_oriented(a: &Diagram, b: &Diagram) -> Result<LinComb, DiagramError> {
    if a.m != b.m {
        return Err(DiagramError::SegmentMismatch(a.m, b.m));
    }
    a.layout()?;
    b.layout()?;
    let shift = a.num_vertices() as VertexId;
    let free_vertices: Vec<VertexId> =
        a.free_vertices.iter().copied().chain(b.free_vertices.iter().map(|&v| v + shift)).collect();
    let edges: Vec<(VertexId, VertexId)> =
        a.edges.iter().copied().chain(b.edges.iter().map(|&(t, h)| (t + shift, h + shift))).collect();
    let per_segment: Vec<Vec<Vec<VertexId>>> = (0..a.m)
        .map(|s| {
            let bs: Vec<VertexId> = b.seg_vertices[s].iter().map(|&v| v + shift).collect();
            interleavings(&a.seg_vertices[s], &bs)
        })
        .collect();
    let mut out = LinComb::new();
    let mut choice = vec![0usize; a.m];
    loop {
        let seg_vertices = (0..a.m).map(|s| per_segment[s][choice[s]].clone()).collect();
        let d = Diagram {
            m: a.m,
            seg_vertices,
            free_vertices: free_vertices.clone(),
            edges: edges.clone(),
            sign: a.sign * b.sign,
        };
        if let Some((key, sign)) = canonicalize_forest(&d)? {
            out.add_key(key, Rational::from_integer(sign.into()));
        }
        let mut s = 0;
        loop {
            if s == a.m {
                return Ok(out);
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

fn interleavings(a: &[VertexId], b: &[VertexId]) -> Vec<Vec<VertexId>> {
    if a.is_empty() {
        return vec![b.to_vec()];
    }
    if b.is_empty() {
        return vec![a.to_vec()];
    }
    let mut out = Vec::new();
    for mut rest in interleavings(&a[1..], b) {
        rest.insert(0, a[0]);
        out.push(rest);
    }
    for mut rest in interleavings(a, &b[1..]) {
        rest.insert(0, b[0]);
        out.push(rest);
    }
    out
}

/// Shuffle product of trivalent diagrams.
pub fn shuffle(a: &Diagram, b: &Diagram) -> Result<LinComb, DiagramError> {
    for d in [a, b] {
        if d.defect() != 0 {
            return Err(DiagramError::NotTrivalent { defect: d.defect() });
        }
    }
    shuffle_oriented(a, b)
}

/// Bilinear extension of [`shuffle`].
pub fn shuffle_comb(a: &LinComb, b: &LinComb) -> Result<LinComb, DiagramError> {
    let mut out = LinComb::new();
    for (ka, ca) in a.iter() {
        for (kb, cb) in b.iter() {
            let p = shuffle(&ka.to_diagram(), &kb.to_diagram())?;
            out.add_scaled(&p, &(ca * cb));
        }
    }
    Ok(out)
}

/// Bilinear extension of [`shuffle_oriented`].
pub fn shuffle_oriented_comb(a: &LinComb, b: &LinComb) -> Result<LinComb, DiagramError> {
    let mut out = LinComb::new();
    for (ka, ca) in a.iter() {
        for (kb, cb) in b.iter() {
            let p = shuffle_oriented(&ka.to_diagram(), &kb.to_diagram())?;
            out.add_scaled(&p, &(ca * cb));
        }
    }
    Ok(out)
}

/// Whether a trivalent combination is closed under the differential.
pub fn is_cocycle(c: &LinComb) -> Result<bool, DiagramError> {
    Ok(differential_comb(c)?.is_zero())
}

/// Convenience: the combination `sum sign_i * key_i`.
pub fn signed_sum(terms: &[(CanonicalKey, i64)]) -> LinComb {
    terms.iter().map(|(k, s)| (k.clone(), Rational::from_integer((*s).into()))).collect()
}

/// `1 * key` as a combination.
pub fn unit(key: &CanonicalKey) -> LinComb {
    LinComb::from_key(key.clone(), Rational::one())
}
