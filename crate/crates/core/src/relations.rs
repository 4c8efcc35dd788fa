//! STU and IHX condition systems, cocycle spaces, the free-vertex filtration
//! and completion of tree data to cocycles.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde_json::json;

use crate::dgalgebra::{differential, shuffle_comb};
use crate::diagrams::enumerate::{enumerate_trees, enumerate_trivalent};
use crate::diagrams::{canonicalize, canonicalize_forest, forest_class, has_same_segment_path, lie_to_integration};
use crate::diagrams::{CanonicalKey, Diagram, LieDiagram, LinComb, VertexId};
use crate::error::{DiagramError, RelationError};
use crate::exactla::{kernel_basis, rank, solve_affine, RatMatrix, Rational, SparseVec, Subspace};

/// A canonical key with the sign of the Lie-oriented diagram it stands for:
/// the Lie diagram equals `sign * key`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SignedKey {
    pub key: CanonicalKey,
    pub sign: i8,
}

/// One local STU move. `s` has the free vertex; `t` has its two legs in the
/// order of the planar picture, `u` the swapped order. `s` is `None` when
/// joining the legs makes a graft meet a segment twice: that diagram is zero,
/// and the condition reduces to `<T - U, alpha> = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StuTriple {
    pub s: Option<SignedKey>,
    pub t: SignedKey,
    pub u: SignedKey,
}

impl StuTriple {
    fn terms(&self) -> Vec<(&SignedKey, i64)> {
        let mut v = vec![(&self.t, -1), (&self.u, 1)];
        if let Some(s) = &self.s {
            v.insert(0, (s, 1));
        }
        v
    }

    /// The condition `<S - T + U, alpha> = 0` as a sparse row over `basis`.
    pub fn row(&self, basis: &Basis) -> Option<SparseVec> {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (sk, c) in self.terms() {
            let i = basis.index_of(&sk.key)?;
            *acc.entry(i).or_insert_with(Rational::zero) += Rational::from_integer((c * sk.sign as i64).into());
        }
        Some(acc.into_iter().filter(|(_, v)| !v.is_zero()).collect())
    }

    pub fn combination(&self) -> LinComb {
        let mut c = LinComb::new();
        for (sk, k) in self.terms() {
            c.add_key(sk.key.clone(), Rational::from_integer((k * sk.sign as i64).into()));
        }
        c
    }
}

/// Ordered list of canonical keys indexing matrix columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    keys: Vec<CanonicalKey>,
    index: BTreeMap<CanonicalKey, usize>,
}

impl Basis {
    pub fn new(mut keys: Vec<CanonicalKey>) -> Self {
        keys.sort();
        keys.dedup();
        let index = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Basis { keys, index }
    }

    /// Every trivalent diagram of order `n` on `m` segments.
    pub fn trivalent(n: usize, m: usize) -> Self {
        Basis::new(enumerate_trivalent(n, m, n.saturating_sub(1)))
    }

    pub fn keys(&self) -> &[CanonicalKey] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn index_of(&self, k: &CanonicalKey) -> Option<usize> {
        self.index.get(k).copied()
    }

    /// Number of leading keys with at most `k` free vertices. Keys sort by
    /// free-vertex count first, so these form a prefix.
    pub fn prefix_upto(&self, k: usize) -> usize {
        self.keys.partition_point(|key| key.num_free() <= k)
    }

    pub fn vector(&self, c: &LinComb) -> Option<SparseVec> {
        let mut v: SparseVec = Vec::with_capacity(c.len());
        for (k, x) in c.iter() {
            v.push((self.index_of(k)?, x.clone()));
        }
        v.sort_by_key(|e| e.0);
        Some(v)
    }

    pub fn comb(&self, v: &[(usize, Rational)]) -> LinComb {
        LinComb::from_sparse(&self.keys, v)
    }
}

/// The planar convention for the free vertex of `S`: with `T` listing the
/// legs to `a` then `b` along the segment, the half-edges at the free vertex
/// are ordered `(v, b, a)` where `v` is the segment neighbor.
const S_ORDER_VBA: bool = true;

fn lie_of(d: &Diagram, special: Option<(VertexId, [VertexId; 3])>) -> LieDiagram {
    let mut nbrs: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for &(t, h) in &d.edges {
        nbrs.entry(t).or_default().push(h);
        nbrs.entry(h).or_default().push(t);
    }
    let mut cyclic = BTreeMap::new();
    for &f in &d.free_vertices {
        let order = match special {
            Some((w, c)) if w == f => c,
            _ => {
                let mut n = nbrs[&f].clone();
                n.sort_unstable();
                [n[0], n[1], n[2]]
            }
        };
        cyclic.insert(f, order);
    }
    LieDiagram {
        m: d.m,
        seg_vertices: d.seg_vertices.clone(),
        free_vertices: d.free_vertices.clone(),
        links: d.edges.clone(),
        cyclic,
    }
}

fn signed(l: &LieDiagram) -> Result<SignedKey, DiagramError> {
    let (d, s) = lie_to_integration(l)?;
    let (key, cs) = canonicalize(&d)?;
    Ok(SignedKey { key, sign: s * cs })
}

/// Like [`signed`] for an `S` that may violate the homotopy condition.
fn signed_s(l: &LieDiagram) -> Option<SignedKey> {
    let skel = Diagram::new(l.m, l.seg_vertices.clone(), l.free_vertices.clone(), l.links.clone());
    let (key, _) = canonicalize_forest(&skel).ok()??;
    if has_same_segment_path(&key) {
        return None;
    }
    Some(signed(l).expect("homotopy S converts"))
}

/// Replace free vertex `w` (adjacent to segment vertex `v`, other neighbors
/// `a`, `b`) by two legs on `v`'s segment in the order `first`, `second`.
fn split_legs(l: &LieDiagram, v: VertexId, w: VertexId, first: VertexId, second: VertexId) -> LieDiagram {
    // `v` keeps the first leg, `w`'s id is reused for the second.
    let mut out = l.clone();
    for list in out.seg_vertices.iter_mut() {
        if let Some(p) = list.iter().position(|&x| x == v) {
            list.insert(p + 1, w);
        }
    }
    out.free_vertices.retain(|&x| x != w);
    out.cyclic.remove(&w);
    out.links.retain(|&(x, y)| x != w && y != w);
    out.links.push((v, first));
    out.links.push((w, second));
    if let Some(c) = out.cyclic.get_mut(&first) {
        for x in c.iter_mut() {
            if *x == w {
                *x = v;
            }
        }
    }
    out
}

/// Join the legs at adjacent segment vertices `p`, `q` (p first) into a
/// free vertex: `p` becomes the segment vertex `v`, `q` becomes the free
/// vertex `w`.
fn join_legs(d: &Diagram, p: VertexId, q: VertexId) -> (Diagram, VertexId, VertexId) {
    let a = d.edges.iter().find_map(|&(x, y)| if x == p { Some(y) } else if y == p { Some(x) } else { None });
    let b = d.edges.iter().find_map(|&(x, y)| if x == q { Some(y) } else if y == q { Some(x) } else { None });
    let (a, b) = (a.expect("trivalent leg"), b.expect("trivalent leg"));
    let mut out = d.clone();
    for list in out.seg_vertices.iter_mut() {
        list.retain(|&x| x != q);
    }
    out.free_vertices.push(q);
    out.edges.retain(|&(x, y)| x != p && y != p && x != q && y != q);
    out.edges.push((p, q));
    out.edges.push((q, a));
    out.edges.push((q, b));
    (out, a, b)
}

/// Every STU triple among trivalent diagrams of order `n` on `m` segments:
/// one per unordered pair of diagrams differing by a swap of adjacent legs
/// on one segment.
pub fn stu_triples(n: usize, m: usize) -> Vec<StuTriple> {
    let basis = Basis::trivalent(n, m);
    let mut out = Vec::new();
    for key in basis.keys() {
        let d = key.to_diagram();
        for list in &d.seg_vertices {
            for pq in list.windows(2) {
                let (p, q) = (pq[0], pq[1]);
                let (s_diag, a, b) = join_legs(&d, p, q);
                let (v, w) = (p, q);
                let cyc = if S_ORDER_VBA { [v, b, a] } else { [v, a, b] };
                let s_lie = lie_of(&s_diag, Some((w, cyc)));
                let t_lie = split_legs(&s_lie, v, w, a, b);
                let u_lie = split_legs(&s_lie, v, w, b, a);
                let t = signed(&t_lie).expect("T is valid");
                let u = signed(&u_lie).expect("U is valid");
                debug_assert_eq!(&t.key, key);
                if t.key < u.key {
                    out.push(StuTriple { s: signed_s(&s_lie), t, u });
                }
            }
        }
    }
    out
}

/// STU-condition matrix: one row per triple, columns over `basis`.
pub fn stu_matrix(triples: &[StuTriple], basis: &Basis) -> RatMatrix {
    let mut mtx = RatMatrix::new(0, basis.len());
    for t in triples {
        let row = t.row(basis).expect("triple keys lie in the basis");
        mtx.push_row(&row);
    }
    mtx
}

fn has_four_valent_free(key: &CanonicalKey) -> bool {
    let mut deg = vec![0usize; key.num_vertices()];
    for &(t, h) in key.edges() {
        deg[t as usize - 1] += 1;
        deg[h as usize - 1] += 1;
    }
    (key.num_segment_vertices()..key.num_vertices()).any(|v| deg[v] == 4)
}

/// IHX conditions among the given trivalent keys: for each defect-one
/// diagram with a four-valent free vertex, the coefficients with which it
/// appears in the differentials of the keys.
pub fn ihx_combinations(keys: &[CanonicalKey]) -> Vec<LinComb> {
    let mut by_image: BTreeMap<CanonicalKey, LinComb> = BTreeMap::new();
    for k in keys.iter().filter(|k| k.num_free() >= 2) {
        let dk = differential(&k.to_diagram()).expect("canonical diagrams are valid");
        for (img, c) in dk.iter() {
            if has_four_valent_free(img) {
                by_image.entry(img.clone()).or_default().add_key(k.clone(), c.clone());
            }
        }
    }
    by_image.into_values().filter(|c| !c.is_zero()).collect()
}

/// Cocycles of order `n` on `m` segments.
#[derive(Clone, Debug)]
pub struct CocycleSpace {
    pub n: usize,
    pub m: usize,
    pub basis: Basis,
    pub space: Subspace,
}

impl CocycleSpace {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn elements(&self) -> Vec<LinComb> {
        self.space.basis().iter().map(|v| self.basis.comb(v)).collect()
    }

    pub fn contains(&self, c: &LinComb) -> bool {
        match self.basis.vector(c) {
            Some(v) => self.space.contains(&v),
            None => false,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let basis: Vec<serde_json::Value> = self.elements().iter().map(LinComb::to_json_value).collect();
        json!({ "n": self.n, "m": self.m, "basis": basis })
    }
}

/// Kernel of the STU-condition matrix over all trivalent diagrams.
pub fn cocycle_basis(n: usize, m: usize) -> CocycleSpace {
    let basis = Basis::trivalent(n, m);
    let triples = stu_triples(n, m);
    let mtx = stu_matrix(&triples, &basis);
    CocycleSpace { n, m, space: kernel_basis(&mtx), basis }
}

/// Kernel of the differential on trivalent diagrams of `(n, m)`, in the
/// coordinates of [`Basis::trivalent`].
pub fn differential_kernel(n: usize, m: usize) -> Result<(Basis, Subspace), DiagramError> {
    let basis = Basis::trivalent(n, m);
    let mut rows: BTreeMap<CanonicalKey, Vec<(usize, Rational)>> = BTreeMap::new();
    for (j, k) in basis.keys().iter().enumerate() {
        for (img, c) in differential(&k.to_diagram())?.iter() {
            rows.entry(img.clone()).or_default().push((j, c.clone()));
        }
    }
    let mut mtx = RatMatrix::new(0, basis.len());
    for r in rows.values() {
        mtx.push_row(r);
    }
    let space = kernel_basis(&mtx);
    Ok((basis, space))
}

/// Trees with leaves on the segments `labels` together with the subspace of
/// coefficient vectors satisfying every IHX condition.
#[derive(Clone, Debug)]
pub struct TreeSpace {
    pub labels: Vec<usize>,
    pub basis: Basis,
    pub space: Subspace,
}

impl TreeSpace {
    pub fn elements(&self) -> Vec<LinComb> {
        self.space.basis().iter().map(|v| self.basis.comb(v)).collect()
    }
}

pub fn tree_cocycle_space(labels: &[usize], m: usize) -> Result<TreeSpace, RelationError> {
    let mut labels = labels.to_vec();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() < 2 {
        return Err(RelationError::Argument("a tree needs at least two leaf labels".into()));
    }
    if labels.iter().any(|&l| l == 0 || l > m) {
        return Err(RelationError::Argument(format!("labels {labels:?} outside 1..={m}")));
    }
    let basis = Basis::new(enumerate_trees(&labels, m));
    let mut mtx = RatMatrix::new(0, basis.len());
    for c in ihx_combinations(basis.keys()) {
        mtx.push_row(&basis.vector(&c).expect("IHX terms among trees are trees"));
    }
    Ok(TreeSpace { labels, space: kernel_basis(&mtx), basis })
}

/// The filtration by number of free vertices.
#[derive(Clone, Debug)]
pub struct Filtration {
    pub n: usize,
    pub m: usize,
    pub basis: Basis,
    /// `levels[k]` is the space of cocycles supported on diagrams with at
    /// most `k` free vertices, inside the full coefficient space.
    pub levels: Vec<Subspace>,
}

impl Filtration {
    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(Subspace::dim).collect()
    }

    pub fn quotient_dims(&self) -> Vec<usize> {
        let d = self.dims();
        (0..d.len()).map(|k| if k == 0 { d[0] } else { d[k] - d[k - 1] }).collect()
    }
}

fn level_kernel(mtx: &RatMatrix, basis: &Basis, k: usize) -> Subspace {
    let cols: Vec<usize> = (0..basis.prefix_upto(k)).collect();
    let sub = kernel_basis(&mtx.select_columns(&cols));
    // Columns are a prefix, so indices embed unchanged.
    Subspace::span(basis.len(), sub.basis().iter().cloned())
}

pub fn filtration(n: usize, m: usize) -> Filtration {
    let basis = Basis::trivalent(n, m);
    let mtx = stu_matrix(&stu_triples(n, m), &basis);
    let top = n.saturating_sub(1);
    let levels = (0..=top).map(|k| level_kernel(&mtx, &basis, k)).collect();
    Filtration { n, m, basis, levels }
}

/// A full cocycle whose part on diagrams with `k` free vertices is the
/// given tree part, where `k` is the free-vertex count of the tree part
/// (`n - 1` when it is zero).
#[derive(Clone, Debug)]
pub struct Completion {
    pub cocycle: LinComb,
    /// Cocycles supported below level `k`; any two completions differ by
    /// an element of this space.
    pub indeterminacy: Subspace,
    pub basis: Basis,
    pub level: usize,
}

impl Completion {
    pub fn indeterminacy_elements(&self) -> Vec<LinComb> {
        self.indeterminacy.basis().iter().map(|v| self.basis.comb(v)).collect()
    }

    /// Whether `c - self.cocycle` lies in the indeterminacy.
    pub fn congruent(&self, c: &LinComb) -> bool {
        match self.basis.vector(&c.sub(&self.cocycle)) {
            Some(v) => self.indeterminacy.contains(&v),
            None => false,
        }
    }
}

pub fn complete_tree_to_cocycle(n: usize, m: usize, tree_part: &LinComb) -> Result<Completion, RelationError> {
    if n == 0 {
        return Err(RelationError::Argument("order must be positive".into()));
    }
    let mut level: Option<usize> = None;
    for k in tree_part.keys() {
        if k.m() != m || k.order() != n as i64 || k.defect() != 0 {
            return Err(RelationError::Argument(format!("{k} is not a trivalent diagram of order {n} on {m} segments")));
        }
        match level {
            None => level = Some(k.num_free()),
            Some(l) if l != k.num_free() => return Err(RelationError::MixedFreeCounts(l, k.num_free())),
            _ => {}
        }
    }
    let level = level.unwrap_or(n - 1);

    let basis = Basis::trivalent(n, m);
    // IHX first, among diagrams at the tree level.
    let top_keys: Vec<CanonicalKey> = basis.keys().iter().filter(|k| k.num_free() == level).cloned().collect();
    for c in ihx_combinations(&top_keys) {
        let pairing: Rational = c.iter().map(|(k, x)| x * tree_part.coefficient(k)).sum();
        if !pairing.is_zero() {
            return Err(RelationError::IhxViolation { terms: c.to_string() });
        }
    }

    let mtx = stu_matrix(&stu_triples(n, m), &basis);
    let lo = if level == 0 { 0 } else { basis.prefix_upto(level - 1) };
    let hi = basis.prefix_upto(level);
    let unknown_cols: Vec<usize> = (0..lo).collect();
    let top_cols: Vec<usize> = (lo..hi).collect();
    let top_vec: Vec<Rational> = top_cols.iter().map(|&c| tree_part.coefficient(&basis.keys()[c])).collect();
    let rhs: Vec<Rational> = mtx.select_columns(&top_cols).mul_vec(&top_vec).into_iter().map(|x| -x).collect();
    // Rows whose S lies above the level have S = 0 and constrain only the
    // tree part; an inconsistent one makes the system unsolvable.
    let sub = mtx.select_columns(&unknown_cols);
    let (particular, homogeneous) = solve_affine(&sub, &rhs).ok_or(RelationError::NoCompletion)?;
    let indeterminacy = Subspace::span(basis.len(), homogeneous.basis().iter().cloned());
    let mut full: SparseVec =
        particular.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect();
    full = indeterminacy.reduce(&full);
    for (i, x) in top_vec.iter().enumerate() {
        if !x.is_zero() {
            full.push((lo + i, x.clone()));
        }
    }
    full.sort_by_key(|e| e.0);
    let cocycle = basis.comb(&full);
    Ok(Completion { cocycle, indeterminacy, basis, level })
}

/// Sign `s` with `Γ_Lie = s · key` for a chord diagram key; chord
/// diagrams carry no cyclic data, so this is their only orientation.
pub fn chord_lie_sign(key: &CanonicalKey) -> Result<i8, DiagramError> {
    if !key.is_chord_diagram() {
        return Err(DiagramError::NotTrivalent { defect: key.defect() });
    }
    let d = key.to_diagram();
    Ok(signed(&lie_of(&d, None))?.sign)
}

/// Extend values on the chord diagrams of order `n` to a vector on all
/// trivalent diagrams satisfying every STU condition. `chord_part` holds
/// canonical-key coordinates; keys missing from it count as zero. Returns
/// `None` when no extension exists.
pub fn extend_weight_system(n: usize, m: usize, chord_part: &LinComb) -> Option<LinComb> {
    let basis = Basis::trivalent(n, m);
    if chord_part.keys().any(|k| basis.index_of(k).is_none_or(|_| !k.is_chord_diagram())) {
        return None;
    }
    let mtx = stu_matrix(&stu_triples(n, m), &basis);
    let chord_cols = basis.prefix_upto(0);
    let known: Vec<usize> = (0..chord_cols).collect();
    let unknown: Vec<usize> = (chord_cols..basis.len()).collect();
    let vals: Vec<Rational> = known.iter().map(|&c| chord_part.coefficient(&basis.keys()[c])).collect();
    let rhs: Vec<Rational> = mtx.select_columns(&known).mul_vec(&vals).into_iter().map(|x| -x).collect();
    let (rest, _) = solve_affine(&mtx.select_columns(&unknown), &rhs)?;
    let mut out = chord_part.clone();
    for (i, x) in rest.into_iter().enumerate() {
        out.add_key(basis.keys()[chord_cols + i].clone(), x);
    }
    Some(out)
}

/// Connected components of the graph on diagrams sharing `class`'s
/// underlying unitrivalent forest, joined by the `T`, `U` pairs of STU triples.
pub fn stu_graph_components(class: &Diagram, n: usize, m: usize) -> Result<usize, RelationError> {
    let target = forest_class(class)?;
    let basis = Basis::trivalent(n, m);
    let members: Vec<CanonicalKey> = basis
        .keys()
        .iter()
        .filter(|k| forest_class(&k.to_diagram()).map(|c| c == target).unwrap_or(false))
        .cloned()
        .collect();
    if members.is_empty() {
        return Err(RelationError::Argument(format!("no diagram of order {n} on {m} segments has class {target}")));
    }
    let index: BTreeMap<&CanonicalKey, usize> = members.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut uf: Vec<usize> = (0..members.len()).collect();
    fn find(uf: &mut [usize], mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    for t in stu_triples(n, m) {
        if let (Some(&a), Some(&b)) = (index.get(&t.t.key), index.get(&t.u.key)) {
            let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
            if ra != rb {
                uf[ra] = rb;
            }
        }
    }
    let roots: BTreeSet<usize> = (0..members.len()).map(|i| find(&mut uf, i)).collect();
    Ok(roots.len())
}

/// Every underlying forest class among trivalent diagrams of `(n, m)`, with
/// one representative each.
pub fn forest_classes(n: usize, m: usize) -> Vec<(String, CanonicalKey)> {
    let mut seen: BTreeMap<String, CanonicalKey> = BTreeMap::new();
    for k in Basis::trivalent(n, m).keys() {
        let c = forest_class(&k.to_diagram()).expect("canonical diagrams are valid");
        seen.entry(c).or_insert_with(|| k.clone());
    }
    seen.into_iter().collect()
}

/// Multisets of label subsets whose trees have total order `n` and total
/// free-vertex count `k`.
fn factor_types(m: usize, n: usize, k: usize) -> Vec<Vec<Vec<usize>>> {
    let mut subsets: Vec<Vec<usize>> = (1u32..(1 << m))
        .filter(|mask| mask.count_ones() >= 2)
        .map(|mask| (0..m).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect())
        .collect();
    subsets.sort();
    let mut out = Vec::new();
    fn rec(
        subsets: &[Vec<usize>],
        start: usize,
        n_left: usize,
        k_left: usize,
        cur: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if n_left == 0 {
            if k_left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for i in start..subsets.len() {
            let (o, f) = (subsets[i].len() - 1, subsets[i].len() - 2);
            if o <= n_left && f <= k_left {
                cur.push(subsets[i].clone());
                rec(subsets, i, n_left - o, k_left - f, cur, out);
                cur.pop();
            }
        }
    }
    rec(&subsets, 0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Report of comparing shuffles of tree cocycles with a filtration quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShuffleSpan {
    pub shuffle_rank: usize,
    pub quotient_dim: usize,
    pub union_rank: usize,
}

impl ShuffleSpan {
    pub fn spans(&self) -> bool {
        self.shuffle_rank == self.quotient_dim && self.union_rank == self.quotient_dim
    }
}

/// Compares the span of shuffle products of IHX-satisfying tree
/// combinations (total free vertices `k`) with `HW^k / HW^{k-1}`, realized as
/// the projection of `HW^k` onto diagrams with exactly `k` free vertices.
pub fn shuffle_span(n: usize, m: usize, k: usize) -> Result<ShuffleSpan, RelationError> {
    if n == 0 || k >= n {
        return Err(RelationError::Argument(format!("need 0 <= k < n, got k = {k}, n = {n}")));
    }
    let filt = filtration(n, m);
    shuffle_span_in(&filt, k)
}

pub(crate) fn shuffle_span_in(filt: &Filtration, k: usize) -> Result<ShuffleSpan, RelationError> {
    let (n, m) = (filt.n, filt.m);
    let basis = &filt.basis;
    let lo = if k == 0 { 0 } else { basis.prefix_upto(k - 1) };
    let hi = basis.prefix_upto(k);
    let coords: Vec<usize> = (lo..hi).collect();
    let quotient = filt.levels[k].project(&coords);

    let mut tree_cache: BTreeMap<Vec<usize>, Vec<LinComb>> = BTreeMap::new();
    let mut products: Vec<SparseVec> = Vec::new();
    for factors in factor_types(m, n, k) {
        for f in &factors {
            if !tree_cache.contains_key(f) {
                tree_cache.insert(f.clone(), tree_cocycle_space(f, m)?.elements());
            }
        }
        // Choose one basis element per factor; repeated factors take
        // nondecreasing indices.
        let sizes: Vec<usize> = factors.iter().map(|f| tree_cache[f].len()).collect();
        let mut choice = vec![0usize; factors.len()];
        'outer: loop {
            let valid = (1..factors.len()).all(|i| factors[i] != factors[i - 1] || choice[i] >= choice[i - 1]);
            if valid && sizes.iter().all(|&s| s > 0) {
                let mut prod = LinComb::from_key(CanonicalKey::empty(m), Rational::one());
                for (f, &c) in factors.iter().zip(&choice) {
                    prod = shuffle_comb(&prod, &tree_cache[f][c])?;
                }
                let v = basis.vector(&prod).expect("shuffle terms are trivalent diagrams of order n");
                products.push(v.into_iter().map(|(c, x)| (c - lo, x)).collect());
            }
            let mut i = 0;
            loop {
                if i == factors.len() {
                    break 'outer;
                }
                choice[i] += 1;
                if choice[i] < sizes[i] {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }
    let span = Subspace::span(coords.len(), products);
    let union = span.sum(&quotient);
    Ok(ShuffleSpan { shuffle_rank: span.dim(), quotient_dim: quotient.dim(), union_rank: union.dim() })
}

pub fn shuffle_span_check(n: usize, m: usize, k: usize) -> Result<bool, RelationError> {
    Ok(shuffle_span(n, m, k)?.spans())
}

/// Four-term combinations of chord diagrams obtained by eliminating `S`
/// from the two STU triples at a tripod-shaped free vertex with two segment
/// neighbors. Every cocycle pairs to zero with each of them.
pub fn four_term_combinations(n: usize, m: usize) -> Vec<LinComb> {
    let mut by_s: BTreeMap<CanonicalKey, Vec<StuTriple>> = BTreeMap::new();
    for t in stu_triples(n, m) {
        if let Some(s) = t.s.clone().filter(|s| s.key.num_free() == 1) {
            by_s.entry(s.key).or_default().push(t);
        }
    }
    let mut out = Vec::new();
    for ts in by_s.values() {
        for i in 0..ts.len() {
            for j in i + 1..ts.len() {
                let (a, b) = (&ts[i], &ts[j]);
                // Scale so that both triples carry the same S coefficient.
                let (sa, sb) = (a.s.as_ref().unwrap().sign, b.s.as_ref().unwrap().sign);
                let scale = Rational::from_integer((sa as i64 * sb as i64).into());
                let c = a.combination().sub(&b.combination().scaled(&scale));
                if !c.is_zero() {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Rank of the STU-condition matrix for `(n, m)`.
pub fn stu_rank(n: usize, m: usize) -> usize {
    let basis = Basis::trivalent(n, m);
    rank(&stu_matrix(&stu_triples(n, m), &basis))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_triples_at_order_one() {
        assert!(stu_triples(1, 2).is_empty());
        assert!(stu_triples(1, 3).is_empty());
    }

    #[test]
    fn single_chord_space() {
        let c = cocycle_basis(1, 2);
        assert_eq!(c.dim(), 1);
        assert_eq!(c.basis.len(), 1);
    }

    #[test]
    fn triples_pair_equal_free_counts() {
        for t in stu_triples(2, 3) {
            assert_eq!(t.t.key.num_free(), t.u.key.num_free());
            if let Some(s) = &t.s {
                assert_eq!(s.key.num_free(), t.t.key.num_free() + 1);
            }
            assert_ne!(t.t.key, t.u.key);
        }
        // Three at the tripod, two leg swaps for each doubled pair of chords.
        let all = stu_triples(2, 3);
        assert_eq!(all.len(), 9);
        assert_eq!(all.iter().filter(|t| t.s.is_none()).count(), 6);
    }
}
