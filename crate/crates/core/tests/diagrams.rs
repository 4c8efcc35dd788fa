use linkgraph::diagrams::*;
use proptest::prelude::*;

fn parity(perm: &[usize]) -> i8 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1;
    for i in 0..perm.len() {
        let mut len = 0;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        if len > 0 && len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// Renames vertex `v` to `perm[v - 1] + 1`.
fn relabel(d: &Diagram, perm: &[usize]) -> Diagram {
    let f = |v: VertexId| perm[v as usize - 1] as VertexId + 1;
    Diagram {
        m: d.m,
        seg_vertices: d.seg_vertices.iter().map(|s| s.iter().map(|&v| f(v)).collect()).collect(),
        free_vertices: d.free_vertices.iter().map(|&v| f(v)).collect(),
        edges: d.edges.iter().map(|&(a, b)| (f(a), f(b))).collect(),
        sign: d.sign,
    }
}

#[test]
fn counts_at_order_three_on_four_segments() {
    let chords = enumerate_chord(3, 4);
    assert_eq!(chords.len(), 296);
    assert_eq!(chords.iter().filter(|k| k.touches_all_segments()).count(), 84);
    assert_eq!(chords.iter().filter(|k| k.touches_all_segments() && k.is_connected()).count(), 72);
    let one: Vec<_> = enumerate_trivalent(3, 4, 1).into_iter().filter(|k| k.num_free() == 1).collect();
    assert_eq!(one.len(), 72);
    assert_eq!(one.iter().filter(|k| k.touches_all_segments()).count(), 24);
    assert_eq!(enumerate_trees(&[1, 2, 3, 4], 4).len(), 3);
}

#[test]
fn tripod_is_the_only_free_diagram_at_order_two() {
    let free: Vec<_> = enumerate_trivalent(2, 3, 1).into_iter().filter(|k| k.num_free() > 0).collect();
    assert_eq!(free.len(), 1);
    assert_eq!(free[0], canonicalize(&Diagram::tripod(3, 1, 2, 3)).unwrap().0);
}

#[test]
fn enumerated_diagrams_are_rigid_and_valid() {
    for n in 1..=3 {
        for k in enumerate_trivalent(n, 3, n) {
            let d = k.to_diagram();
            assert!(d.validate().unwrap().is_empty(), "{k}");
            assert_eq!(automorphism_count(&d).unwrap(), 1, "{k}");
            assert_eq!(canonicalize(&d).unwrap(), (k.clone(), 1));
        }
    }
}

#[test]
fn violations_are_reported() {
    let same = Diagram::new(2, vec![vec![1, 2], vec![]], vec![], vec![(1, 2)]);
    assert!(same.validate().unwrap().iter().any(|v| matches!(v, Violation::SameSegmentPath { .. })));
    let loose = Diagram::new(2, vec![vec![1], vec![2]], vec![3], vec![(1, 2)]);
    assert!(!loose.validate().unwrap().is_empty());
}

#[test]
fn json_is_bit_exact() {
    let d = Diagram::tripod(3, 1, 2, 3).with_sign(-1);
    let text = d.to_json();
    assert!(text.contains("segVertices") && text.contains("freeVertices"));
    let back = Diagram::from_json(&text).unwrap();
    assert_eq!(back, d);
    assert_eq!(back.to_json(), text);
    assert!(Diagram::from_json("{\"m\":1}").is_err());
}

#[test]
fn lincomb_json_round_trip() {
    let mut c = LinComb::new();
    c.add_diagram(&Diagram::tripod(3, 1, 2, 3), linkgraph::exactla::rat(3)).unwrap();
    c.add_diagram(&Diagram::from_chords(3, &[(1, 2), (2, 3)]), "-1/2".parse().unwrap()).unwrap();
    let back = LinComb::from_json(&c.to_json()).unwrap();
    assert_eq!(back, c);
}

fn arb_key() -> impl Strategy<Value = CanonicalKey> {
    let keys: Vec<CanonicalKey> = (1..=3).flat_map(|n| enumerate_trivalent(n, 3, n)).collect();
    prop::sample::select(keys)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn canonical_key_ignores_relabeling(key in arb_key(), seed in any::<u64>()) {
        let d = key.to_diagram();
        let n = d.num_vertices();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let (k, sign) = canonicalize(&relabel(&d, &perm)).unwrap();
        prop_assert_eq!(k, key);
        prop_assert_eq!(sign, parity(&perm));
    }

    #[test]
    fn edge_reversals_multiply_signs(key in arb_key(), mask in any::<u16>()) {
        let mut d = key.to_diagram();
        let mut expected = 1;
        for (i, e) in d.edges.iter_mut().enumerate() {
            if mask & (1 << i) != 0 {
                *e = (e.1, e.0);
                expected = -expected;
            }
        }
        prop_assert_eq!(canonicalize(&d).unwrap(), (key, expected));
    }

    #[test]
    fn key_text_round_trips(key in arb_key()) {
        prop_assert_eq!(key.to_string().parse::<CanonicalKey>().unwrap(), key);
    }
}
