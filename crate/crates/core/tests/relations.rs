use linkgraph::dgalgebra::is_cocycle;
use linkgraph::diagrams::{canonicalize, lie_to_integration, Diagram, LieDiagram, LinComb};
use linkgraph::exactla::{kernel_basis, rat, RatMatrix, Rational, Subspace};
use linkgraph::relations::*;
use num_traits::Zero;

fn lie_chords(chords: &[(usize, usize)]) -> LinComb {
    let d = Diagram::from_chords(3, chords);
    let l = LieDiagram {
        m: d.m,
        seg_vertices: d.seg_vertices.clone(),
        free_vertices: vec![],
        links: d.edges.clone(),
        cyclic: Default::default(),
    };
    let (d, s) = lie_to_integration(&l).unwrap();
    let (k, cs) = canonicalize(&d).unwrap();
    LinComb::from_key(k, Rational::from_integer((s * cs).into()))
}

fn d_kernel(n: usize, m: usize) -> (Basis, Subspace) {
    differential_kernel(n, m).unwrap()
}

#[test]
fn stu_kernel_equals_differential_kernel() {
    for (n, m) in [(2, 2), (2, 3), (3, 3), (3, 4)] {
        let stu = cocycle_basis(n, m);
        let (basis, dk) = d_kernel(n, m);
        assert_eq!(basis, stu.basis);
        assert_eq!(stu.space, dk, "(n, m) = ({n}, {m})");
    }
}

#[test]
fn alpha_123_lies_in_stu_kernel() {
    let space = cocycle_basis(2, 3);
    let l = lie_chords(&[(1, 2), (1, 3)]);
    let m = lie_chords(&[(1, 2), (2, 3)]);
    let r = lie_chords(&[(1, 3), (2, 3)]);
    let (td, ts) = lie_to_integration(&LieDiagram::tripod()).unwrap();
    let (tk, tcs) = canonicalize(&td).unwrap();
    let t = LinComb::from_key(tk, Rational::from_integer((ts * tcs).into()));
    let mut alpha = l.clone();
    alpha.add_assign(&m.scaled(&rat(-1)));
    alpha.add_assign(&r);
    alpha.add_assign(&t.scaled(&rat(-1)));
    assert!(space.contains(&alpha));
    assert!(is_cocycle(&alpha).unwrap());
}

#[test]
fn cocycle_dimensions() {
    assert_eq!(cocycle_basis(1, 2).dim(), 1);
    assert_eq!(cocycle_basis(2, 3).dim(), 7);
}

#[test]
fn tree_dimensions() {
    for (l, d) in [(2, 1), (3, 1), (4, 2), (5, 6)] {
        let labels: Vec<usize> = (1..=l).collect();
        assert_eq!(tree_cocycle_space(&labels, l).unwrap().space.dim(), d, "{l} labels");
    }
    // Labels need not be a prefix.
    assert_eq!(tree_cocycle_space(&[1, 3, 4, 5], 5).unwrap().space.dim(), 2);
}

#[test]
fn ihx_on_three_four_leaf_trees_has_two_dim_kernel() {
    let keys = linkgraph::diagrams::enumerate_trees(&[1, 2, 3, 4], 4);
    assert_eq!(keys.len(), 3);
    let combos = ihx_combinations(&keys);
    let basis = Basis::new(keys);
    let mut mtx = RatMatrix::new(0, 3);
    for c in &combos {
        mtx.push_row(&basis.vector(c).unwrap());
        assert_eq!(c.len(), 3);
    }
    assert_eq!(kernel_basis(&mtx).dim(), 2);
}

#[test]
fn filtration_small() {
    let f = filtration(2, 3);
    assert_eq!(f.dims(), vec![6, 7]);
    assert_eq!(f.quotient_dims(), vec![6, 1]);
    assert_eq!(f.levels.last().unwrap(), &cocycle_basis(2, 3).space);
}

#[test]
fn stu_implies_ihx_and_four_term() {
    for (n, m) in [(2, 3), (3, 4)] {
        let space = cocycle_basis(n, m);
        let elements = space.elements();
        let ihx = ihx_combinations(space.basis.keys());
        let four_t = four_term_combinations(n, m);
        assert!(!four_t.is_empty());
        for alpha in &elements {
            for c in ihx.iter().chain(&four_t) {
                let pairing: Rational = c.iter().map(|(k, x)| x * alpha.coefficient(k)).sum();
                assert!(pairing.is_zero());
            }
        }
    }
}

#[test]
fn tripod_completion_and_indeterminacy() {
    let (td, ts) = lie_to_integration(&LieDiagram::tripod()).unwrap();
    let (tk, tcs) = canonicalize(&td).unwrap();
    // Coefficient -1 on the Lie-oriented tripod.
    let tree = LinComb::from_key(tk, Rational::from_integer((-(ts * tcs)).into()));
    let c = complete_tree_to_cocycle(2, 3, &tree).unwrap();
    assert_eq!(c.indeterminacy.dim(), 6);
    assert!(is_cocycle(&c.cocycle).unwrap());

    let zero = complete_tree_to_cocycle(2, 3, &LinComb::new()).unwrap();
    assert!(zero.cocycle.is_zero());
    assert_eq!(zero.indeterminacy, filtration(2, 3).levels[0]);
}

#[test]
fn ihx_violation_is_rejected() {
    let keys = linkgraph::diagrams::enumerate_trees(&[1, 2, 3, 4], 4);
    let single = LinComb::from_key(keys[0].clone(), rat(1));
    assert!(matches!(complete_tree_to_cocycle(3, 4, &single), Err(linkgraph::RelationError::IhxViolation { .. })));
}

#[test]
fn stu_graphs_small() {
    let l = Diagram::from_chords(3, &[(1, 2), (1, 3)]);
    assert_eq!(stu_graph_components(&l, 2, 3).unwrap(), 1);
    assert_eq!(stu_graph_components(&Diagram::chord(2, 1, 2), 1, 2).unwrap(), 1);
}

#[test]
fn shuffle_span_small() {
    assert!(shuffle_span_check(2, 3, 0).unwrap());
    assert!(shuffle_span_check(2, 3, 1).unwrap());
}

#[test]
fn cocycle_json_schema() {
    let v = cocycle_basis(1, 2).to_json();
    assert_eq!(v["n"], 1);
    assert_eq!(v["m"], 2);
    assert_eq!(v["basis"][0]["coeffs"]["1,1;0|1-2"], "1");
}

#[test]
fn filtration_order_three() {
    let f = filtration(3, 4);
    assert_eq!(f.dims(), vec![56, 80, 82]);
}
