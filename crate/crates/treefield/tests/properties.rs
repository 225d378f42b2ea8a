use proptest::prelude::*;
use space_core::{EquivRelation, FiniteSpace, Graphing, PointSet};
use treefield::{
    bass_serre_free, contract, extract_treeing, from_graphing, fundamental_subforest, is_treefield,
    treeing_from_fd_section, GraphField,
};

/// A random forest on `n` points: point `i > 0` hangs below an earlier point or
/// starts a new tree, and each edge goes to factor 1 or 2.
fn forest(max: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize, bool)>)> {
    (1..=max).prop_flat_map(|n| {
        let parents = proptest::collection::vec((any::<prop::sample::Index>(), any::<bool>(), 0..4u8), n - 1);
        (Just(n), parents).prop_map(|(n, ps)| {
            let edges = ps
                .into_iter()
                .enumerate()
                .filter(|(_, (_, _, skip))| *skip != 0)
                .map(|(i, (p, side, _))| (p.index(i + 1), i + 1, side))
                .collect();
            (n, edges)
        })
    })
}

fn factors(n: usize, edges: &[(usize, usize, bool)]) -> (EquivRelation, EquivRelation, EquivRelation) {
    let space = FiniteSpace::new(n).unwrap();
    let full = PointSet::full(space);
    let pick = |side: bool| {
        EquivRelation::generated_by(&full, edges.iter().filter(|e| e.2 == side).flat_map(|&(a, b, _)| [(a, b), (b, a)]))
            .unwrap()
    };
    let (r1, r2) = (pick(false), pick(true));
    let r = EquivRelation::join([&r1, &r2]).unwrap();
    (r, r1, r2)
}

fn sub_of(r: &EquivRelation, labels: &[u8]) -> EquivRelation {
    let space = r.space();
    let pairs = r.pairs().into_iter().filter(|&(x, y)| labels[x % labels.len()] == labels[y % labels.len()]);
    EquivRelation::generated_by(&PointSet::full(space), pairs).unwrap()
}

fn check_distances(field: &GraphField) {
    let (vact, _) = field.actions().unwrap();
    let rel = vact.relation();
    for u in field.vertices().points() {
        let d = field.distances_from(u);
        let x = field.vertices().proj(u);
        for v in field.vertices().fiber(x).iter().copied() {
            for y in rel.class_members(x) {
                let (u2, v2) = (vact.apply(y, x, u).unwrap(), vact.apply(y, x, v).unwrap());
                assert_eq!(field.distances_from(u2)[v2], d[v]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_products_give_tree_fields((n, edges) in forest(8)) {
        let (r, r1, r2) = factors(n, &edges);
        let a = bass_serre_free(&r, &r1, &r2).unwrap();
        prop_assert!(is_treefield(&a.field).is_ok());
        for x in 0..n {
            prop_assert_eq!(a.field.vertices().fiber(x).len(), a.field.edges_over(x).len() + 1);
        }
        check_distances(&a.field);
    }

    #[test]
    fn subforest_is_a_fundamental_subtree((n, edges) in forest(8), labels in proptest::collection::vec(0..3u8, 1..5)) {
        let (r, r1, r2) = factors(n, &edges);
        let s = sub_of(&r, &labels);
        let field = bass_serre_free(&r, &r1, &r2).unwrap().field.restrict_action(&s).unwrap();
        let sub = fundamental_subforest(&field).unwrap();
        let (vact, _) = field.actions().unwrap();
        for v in field.vertices().points() {
            let hits = vact.orbit(v).into_iter().filter(|&u| sub.vertices[u]).count();
            prop_assert_eq!(hits, 1);
        }
        for x in sub.domain.iter() {
            let nv = field.vertices().fiber(x).iter().filter(|&&v| sub.vertices[v]).count();
            let ne = field.edges_over(x).iter().filter(|&&e| sub.edges[e]).count();
            prop_assert_eq!(ne + 1, nv);
            for &e in field.edges_over(x).iter().filter(|&&e| sub.edges[e]) {
                prop_assert!(sub.vertices[field.origin(e)] && sub.vertices[field.terminus(e)]);
            }
        }
        let (c, sec) = contract(&field, &sub).unwrap();
        prop_assert!(is_treefield(&c).is_ok());
        let t = treeing_from_fd_section(&c, &sec).unwrap();
        prop_assert!(t.is_treeing_of(&s));
    }

    #[test]
    fn extracted_treeing_matches_acting_relation((n, edges) in forest(9), labels in proptest::collection::vec(0..3u8, 1..5)) {
        let (r, r1, r2) = factors(n, &edges);
        let s = sub_of(&r, &labels);
        let field = bass_serre_free(&r, &r1, &r2).unwrap().field.restrict_action(&s).unwrap();
        let t = extract_treeing(&field).unwrap();
        prop_assert_eq!(t.treeing_violation(&s), None);
    }

    #[test]
    fn graphing_fields_round_trip((n, edges) in forest(9)) {
        let space = FiniteSpace::new(n).unwrap();
        let phi = Graphing::from_edges(space, edges.iter().map(|&(a, b, _)| (a, b))).unwrap();
        let (r, field, d) = from_graphing(&phi).unwrap();
        prop_assert!(is_treefield(&field).is_ok());
        prop_assert_eq!(treeing_from_fd_section(&field, &d).unwrap(), phi.clone());
        prop_assert!(extract_treeing(&field).unwrap().is_treeing_of(&r));
    }
}
