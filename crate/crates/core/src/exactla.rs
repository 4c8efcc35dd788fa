//! Exact sparse linear algebra over the rationals.
//!
//! Rows are eliminated fraction-free: every working row is kept as a
//! primitive integer vector (content divided out, leading entry positive),
//! so intermediate growth stays bounded by the size of the actual minors.
//! Rational numbers only appear when a reduced echelon form is read back.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational coefficient.
pub type Rational = BigRational;

/// Sparse vector: strictly increasing column indices, no stored zeros.
pub type SparseVec = Vec<(usize, Rational)>;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Sparse rational matrix.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Rational>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::new(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = RatMatrix::new(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged dense matrix");
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, rat(v));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Sets an entry; storing zero removes it.
    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    /// Adds `v` to an entry.
    pub fn add(&mut self, r: usize, c: usize, v: Rational) {
        let cur = self.get(r, c);
        self.set(r, c, cur + v);
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        self.entries.get(&(r, c)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Appends a row given as a sparse vector.
    pub fn push_row(&mut self, row: &[(usize, Rational)]) {
        let r = self.rows;
        self.rows += 1;
        for (c, v) in row {
            self.add(r, *c, v.clone());
        }
    }

    pub fn row(&self, r: usize) -> SparseVec {
        self.entries
            .range((r, 0)..(r + 1, 0))
            .map(|(&(_, c), v)| (c, v.clone()))
            .collect()
    }

    /// Restriction to a subset of columns, renumbered in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> RatMatrix {
        let index: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut m = RatMatrix::new(self.rows, cols.len());
        for (&(r, c), v) in &self.entries {
            if let Some(&nc) = index.get(&c) {
                m.entries.insert((r, nc), v.clone());
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![Rational::zero(); self.rows];
        for (&(r, c), a) in &self.entries {
            out[r] += a * &v[c];
        }
        out
    }

    pub fn mul_sparse(&self, v: &[(usize, Rational)]) -> Vec<Rational> {
        let mut dense = vec![Rational::zero(); self.cols];
        for (c, x) in v {
            dense[*c] = x.clone();
        }
        self.mul_vec(&dense)
    }

    fn sparse_rows(&self) -> Vec<SparseVec> {
        let mut rows = vec![Vec::new(); self.rows];
        for (&(r, c), v) in &self.entries {
            rows[r].push((c, v.clone()));
        }
        rows
    }
}

/// Primitive integer row used during fraction-free elimination.
type IntRow = Vec<(usize, BigInt)>;

fn to_primitive(row: &[(usize, Rational)]) -> IntRow {
    let mut lcm = BigInt::one();
    for (_, v) in row {
        lcm = lcm.lcm(v.denom());
    }
    let ints: IntRow = row
        .iter()
        .map(|(c, v)| (*c, v.numer() * (&lcm / v.denom())))
        .filter(|(_, v)| !v.is_zero())
        .collect();
    normalize_int(ints)
}

fn normalize_int(mut row: IntRow) -> IntRow {
    if row.is_empty() {
        return row;
    }
    let mut g = BigInt::zero();
    for (_, v) in &row {
        g = g.gcd(v);
    }
    if row[0].1.is_negative() {
        g = -g;
    }
    if !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v = &*v / &g;
        }
    }
    row
}

/// a*x - b*y on sparse integer rows.
fn combine(a: &BigInt, x: &IntRow, b: &BigInt, y: &IntRow) -> IntRow {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let ci = x.get(i).map(|e| e.0);
        let cj = y.get(j).map(|e| e.0);
        match (ci, cj) {
            (Some(p), Some(q)) if p == q => {
                let v = a * &x[i].1 - b * &y[j].1;
                if !v.is_zero() {
                    out.push((p, v));
                }
                i += 1;
                j += 1;
            }
            (Some(p), Some(q)) if p < q => {
                out.push((p, a * &x[i].1));
                i += 1;
            }
            (Some(p), None) => {
                out.push((p, a * &x[i].1));
                i += 1;
            }
            (_, Some(q)) => {
                out.push((q, -(b * &y[j].1)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Incremental row echelon form keyed by pivot column.
#[derive(Clone, Debug, Default)]
struct Echelon {
    pivots: BTreeMap<usize, IntRow>,
}

impl Echelon {
    /// Reduces the leading entries of `row` against existing pivots and
    /// stores the remainder as a new pivot row. Returns whether rank grew.
    fn insert(&mut self, row: IntRow) -> bool {
        let mut row = normalize_int(row);
        while let Some(&(lead, _)) = row.first() {
            match self.pivots.get(&lead) {
                Some(p) => {
                    let a = p[0].1.clone();
                    let b = row[0].1.clone();
                    let g = a.gcd(&b);
                    row = normalize_int(combine(&(&a / &g), &row, &(&b / &g), p));
                }
                None => {
                    self.pivots.insert(lead, row);
                    return true;
                }
            }
        }
        false
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Fully reduced echelon form with unit pivots, ordered by pivot column.
    fn reduced(&self) -> Vec<SparseVec> {
        let cols: Vec<usize> = self.pivots.keys().copied().collect();
        let mut rows: BTreeMap<usize, IntRow> = self.pivots.clone();
        // Clear each pivot column from the rows above it, last pivot first.
        for &pc in cols.iter().rev() {
            let prow = rows[&pc].clone();
            let a = prow[0].1.clone();
            for &oc in cols.iter().filter(|&&c| c < pc) {
                let other = &rows[&oc];
                if let Ok(pos) = other.binary_search_by_key(&pc, |e| e.0) {
                    let b = other[pos].1.clone();
                    let g = a.gcd(&b);
                    let next = normalize_int(combine(&(&a / &g), other, &(&b / &g), &prow));
                    rows.insert(oc, next);
                }
            }
        }
        rows.into_values()
            .map(|r| {
                let lead = r[0].1.clone();
                r.into_iter()
                    .map(|(c, v)| (c, Rational::new(v, lead.clone())))
                    .collect()
            })
            .collect()
    }
}

/// Span of a set of vectors, stored as a reduced row echelon basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<SparseVec>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: (0..ambient_dim).map(|i| vec![(i, Rational::one())]).collect(),
        }
    }

    /// Span of sparse vectors.
    pub fn span<I>(ambient_dim: usize, vectors: I) -> Self
    where
        I: IntoIterator<Item = SparseVec>,
    {
        let mut ech = Echelon::default();
        for v in vectors {
            debug_assert!(v.iter().all(|(c, _)| *c < ambient_dim));
            ech.insert(to_primitive(&v));
        }
        Subspace { ambient_dim, basis: ech.reduced() }
    }

    pub fn span_dense(ambient_dim: usize, vectors: &[Vec<Rational>]) -> Self {
        Subspace::span(ambient_dim, vectors.iter().map(|v| dense_to_sparse(v)))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[SparseVec] {
        &self.basis
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.basis.iter().map(|v| v[0].0).collect()
    }

    pub fn dense_basis(&self) -> Vec<Vec<Rational>> {
        self.basis.iter().map(|v| sparse_to_dense(v, self.ambient_dim)).collect()
    }

    /// Reduces `v` against the basis; the result has zeros at every pivot.
    pub fn reduce(&self, v: &[(usize, Rational)]) -> SparseVec {
        let mut acc: BTreeMap<usize, Rational> = v.iter().cloned().collect();
        for b in &self.basis {
            let p = b[0].0;
            if let Some(coef) = acc.get(&p).cloned() {
                for (c, x) in b {
                    let e = acc.entry(*c).or_insert_with(Rational::zero);
                    *e -= &coef * x;
                    if e.is_zero() {
                        acc.remove(c);
                    }
                }
            }
        }
        acc.into_iter().collect()
    }

    pub fn contains(&self, v: &[(usize, Rational)]) -> bool {
        self.reduce(v).is_empty()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    /// Sum of two subspaces of the same ambient space.
    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        Subspace::span(self.ambient_dim, self.basis.iter().chain(other.basis.iter()).cloned())
    }

    /// Projection onto a set of coordinates, renumbered in the given order.
    pub fn project(&self, coords: &[usize]) -> Subspace {
        let index: BTreeMap<usize, usize> = coords.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Subspace::span(
            coords.len(),
            self.basis.iter().map(|v| {
                v.iter()
                    .filter_map(|(c, x)| index.get(c).map(|&nc| (nc, x.clone())))
                    .collect::<SparseVec>()
            }),
        )
    }
}

pub fn dense_to_sparse(v: &[Rational]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

pub fn sparse_to_dense(v: &[(usize, Rational)], dim: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); dim];
    for (c, x) in v {
        out[*c] = x.clone();
    }
    out
}

fn echelon_of(m: &RatMatrix) -> Echelon {
    let mut ech = Echelon::default();
    for row in m.sparse_rows() {
        if !row.is_empty() {
            ech.insert(to_primitive(&row));
        }
    }
    ech
}

/// Rank over the rationals.
pub fn rank(m: &RatMatrix) -> usize {
    echelon_of(m).rank()
}

/// Basis of the right kernel `{v : m v = 0}`.
pub fn kernel_basis(m: &RatMatrix) -> Subspace {
    let rref = echelon_of(m).reduced();
    kernel_from_rref(&rref, m.cols())
}

fn kernel_from_rref(rref: &[SparseVec], cols: usize) -> Subspace {
    let pivots: BTreeMap<usize, usize> = rref.iter().enumerate().map(|(i, r)| (r[0].0, i)).collect();
    let mut vectors = Vec::with_capacity(cols - pivots.len());
    // Column f of the reduced rows, collected once.
    let mut by_col: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
    for r in rref {
        let p = r[0].0;
        for (c, x) in &r[1..] {
            by_col.entry(*c).or_default().push((p, x.clone()));
        }
    }
    for f in (0..cols).filter(|c| !pivots.contains_key(c)) {
        let mut v: SparseVec = by_col
            .get(&f)
            .map(|es| es.iter().map(|(p, x)| (*p, -x.clone())).collect())
            .unwrap_or_default();
        v.push((f, Rational::one()));
        v.sort_by_key(|e| e.0);
        vectors.push(v);
    }
    Subspace::span(cols, vectors)
}

/// Particular solution plus the homogeneous solution space of `m x = b`,
/// or `None` when the system is inconsistent. Free variables of the
/// particular solution are zero.
pub fn solve_affine(m: &RatMatrix, b: &[Rational]) -> Option<(Vec<Rational>, Subspace)> {
    assert_eq!(b.len(), m.rows(), "right-hand side length must equal row count");
    let cols = m.cols();
    let mut ech = Echelon::default();
    for (r, mut row) in m.sparse_rows().into_iter().enumerate() {
        if !b[r].is_zero() {
            row.push((cols, b[r].clone()));
        }
        if !row.is_empty() {
            ech.insert(to_primitive(&row));
        }
    }
    if ech.pivots.contains_key(&cols) {
        return None;
    }
    let rref = ech.reduced();
    let mut particular = vec![Rational::zero(); cols];
    for r in &rref {
        if let Some((c, x)) = r.last() {
            if *c == cols {
                particular[r[0].0] = x.clone();
            }
        }
    }
    let homogeneous: Vec<SparseVec> = rref
        .into_iter()
        .map(|r| r.into_iter().filter(|(c, _)| *c < cols).collect())
        .collect();
    Some((particular, kernel_from_rref(&homogeneous, cols)))
}

/// Whether `v` lies in the span of `s`.
pub fn membership(s: &Subspace, v: &[Rational]) -> bool {
    assert_eq!(v.len(), s.ambient_dim(), "vector length must equal ambient dimension");
    s.contains(&dense_to_sparse(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn identity_has_full_rank_and_trivial_kernel() {
        let id = RatMatrix::identity(2);
        assert_eq!(rank(&id), 2);
        assert_eq!(kernel_basis(&id).dim(), 0);
    }

    #[test]
    fn zero_matrix() {
        let z = RatMatrix::new(3, 5);
        assert_eq!(rank(&z), 0);
        assert_eq!(kernel_basis(&z).dim(), 5);
    }

    #[test]
    fn single_difference_row() {
        let m = RatMatrix::from_dense(&[vec![1, -1]]);
        let k = kernel_basis(&m);
        assert_eq!(k.dim(), 1);
        assert!(membership(&k, &rv(&[1, 1])));
        assert!(!membership(&k, &rv(&[1, -1])));
        assert!(membership(&k, &rv(&[0, 0])));
    }

    #[test]
    fn solve_identity_and_inconsistent() {
        let id = RatMatrix::identity(3);
        let b = rv(&[4, -2, 7]);
        let (x, h) = solve_affine(&id, &b).unwrap();
        assert_eq!(x, b);
        assert_eq!(h.dim(), 0);
        let z = RatMatrix::new(2, 2);
        assert!(solve_affine(&z, &rv(&[1, 0])).is_none());
    }

    #[test]
    fn rational_entries_and_fill_in() {
        let mut m = RatMatrix::new(3, 4);
        m.set(0, 0, Rational::new(1.into(), 2.into()));
        m.set(0, 1, rat(3));
        m.set(1, 0, rat(2));
        m.set(1, 3, Rational::new((-5).into(), 3.into()));
        m.set(2, 1, rat(12));
        m.set(2, 3, Rational::new(5.into(), 3.into()));
        // row2 = 4 row0 - row1
        assert_eq!(rank(&m), 2);
        let k = kernel_basis(&m);
        assert_eq!(k.dim(), 2);
        for v in k.dense_basis() {
            assert!(m.mul_vec(&v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn reduced_basis_is_echelon() {
        let s = Subspace::span_dense(4, &[rv(&[0, 2, 4, 2]), rv(&[1, 1, 1, 1]), rv(&[1, 2, 3, 2])]);
        assert_eq!(s.dim(), 2);
        let piv = s.pivots();
        assert!(piv.windows(2).all(|w| w[0] < w[1]));
        for b in s.basis() {
            assert!(b[0].1.is_one());
        }
    }

    use proptest::prelude::*;

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..6, 1usize..7).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(-3i64..=3, c), r)
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(rows in small_matrix()) {
            let m = RatMatrix::from_dense(&rows);
            let k = kernel_basis(&m);
            prop_assert_eq!(rank(&m) + k.dim(), m.cols());
            for v in k.dense_basis() {
                prop_assert!(m.mul_vec(&v).iter().all(Zero::is_zero));
            }
            // deterministic
            prop_assert_eq!(kernel_basis(&m), k);
        }

        #[test]
        fn solve_affine_solves(rows in small_matrix(), x in proptest::collection::vec(-4i64..=4, 7)) {
            let m = RatMatrix::from_dense(&rows);
            let x: Vec<Rational> = x[..m.cols()].iter().map(|&v| rat(v)).collect();
            let b = m.mul_vec(&x);
            let (p, h) = solve_affine(&m, &b).expect("consistent by construction");
            prop_assert_eq!(m.mul_vec(&p), b);
            let diff: Vec<Rational> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
            prop_assert!(membership(&h, &diff));
        }
    }
}
