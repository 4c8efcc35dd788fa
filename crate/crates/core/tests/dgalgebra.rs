use linkgraph::dgalgebra::*;
use linkgraph::diagrams::{enumerate_trivalent, CanonicalKey, Diagram, LinComb};
use linkgraph::exactla::rat;
use linkgraph::relations::cocycle_basis;
use proptest::prelude::*;

fn trivalent(max_order: usize, m: usize) -> Vec<CanonicalKey> {
    (1..=max_order).flat_map(|n| enumerate_trivalent(n, m, n)).collect()
}

/// Trivalent keys with their defect-one images.
fn graded(max_order: usize, m: usize) -> Vec<CanonicalKey> {
    let mut out = std::collections::BTreeSet::new();
    for k in trivalent(max_order, m) {
        out.extend(differential(&k.to_diagram()).unwrap().keys().cloned());
        out.insert(k);
    }
    out.into_iter().collect()
}

fn leibniz_holds(a: &Diagram, b: &Diagram) -> bool {
    let lhs = differential_comb(&shuffle_oriented(a, b).unwrap()).unwrap();
    let mut rhs = LinComb::new();
    for (k, c) in differential(a).unwrap().iter() {
        rhs.add_scaled(&shuffle_oriented(&k.to_diagram(), b).unwrap(), c);
    }
    let sign = if a.num_vertices().is_multiple_of(2) { rat(1) } else { rat(-1) };
    for (k, c) in differential(b).unwrap().iter() {
        rhs.add_scaled(&shuffle_oriented(a, &k.to_diagram()).unwrap(), &(c * &sign));
    }
    lhs == rhs
}

#[test]
fn differential_squares_to_zero() {
    for m in 2..=4 {
        for k in graded(3, m) {
            let dd = differential_comb(&differential(&k.to_diagram()).unwrap()).unwrap();
            assert!(dd.is_zero(), "{k}: {dd}");
        }
    }
}

#[test]
fn chords_are_closed_and_tripod_is_not() {
    assert!(differential(&Diagram::chord(2, 1, 2)).unwrap().is_zero());
    assert!(!differential(&Diagram::tripod(3, 1, 2, 3)).unwrap().is_zero());
}

#[test]
fn leibniz_with_a_nonclosed_factor_of_each_degree() {
    // Order four on three segments: the defect-one factor meets a factor
    // with nonzero differential, which pins the sign.
    let a_side = graded(2, 3);
    let tripod = Diagram::tripod(3, 1, 2, 3);
    let mut with_defect = 0;
    for a in &a_side {
        if a.order() == 2 {
            assert!(leibniz_holds(&a.to_diagram(), &tripod), "{a}");
            assert!(leibniz_holds(&tripod, &a.to_diagram()), "{a}");
            with_defect += (a.defect() == 1) as usize;
        }
    }
    assert!(with_defect > 0);
}

#[test]
fn cocycle_iff_stu() {
    for (n, m) in [(1, 2), (2, 2), (2, 3), (3, 3)] {
        let space = cocycle_basis(n, m);
        for (i, k) in space.basis.keys().iter().enumerate() {
            let e = LinComb::from_key(k.clone(), rat(1));
            assert_eq!(is_cocycle(&e).unwrap(), space.space.contains(&[(i, rat(1))]), "{k}");
        }
        for c in space.elements() {
            assert!(is_cocycle(&c).unwrap());
        }
    }
}

#[test]
fn shuffle_commutes_for_trivalent_diagrams() {
    for m in 2..=3 {
        let keys = trivalent(2, m);
        for a in &keys {
            for b in &keys {
                let (da, db) = (a.to_diagram(), b.to_diagram());
                assert_eq!(shuffle(&da, &db).unwrap(), shuffle(&db, &da).unwrap(), "{a} {b}");
            }
        }
    }
}

#[test]
fn shuffle_of_cocycles_is_a_cocycle() {
    let space = cocycle_basis(1, 3);
    let elems = space.elements();
    for a in &elems {
        for b in &elems {
            assert!(is_cocycle(&shuffle_comb(a, b).unwrap()).unwrap());
        }
    }
}

#[test]
fn non_trivalent_shuffle_is_rejected() {
    let d = differential(&Diagram::tripod(3, 1, 2, 3)).unwrap();
    let (k, _) = d.iter().next().unwrap();
    assert!(shuffle(&k.to_diagram(), &Diagram::chord(3, 1, 2)).is_err());
}

fn arb_pair() -> impl Strategy<Value = (CanonicalKey, CanonicalKey)> {
    let keys = graded(2, 3);
    let small: Vec<CanonicalKey> = keys.iter().filter(|k| k.order() == 1).cloned().collect();
    (prop::sample::select(keys), prop::sample::select(small))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn leibniz_rule((a, b) in arb_pair(), swap in any::<bool>()) {
        let (a, b) = if swap { (b, a) } else { (a, b) };
        prop_assert!(leibniz_holds(&a.to_diagram(), &b.to_diagram()));
    }
}
