use decomp::{
    check_certificate, desingularize, find_closing_tuple, generation_split, geodesic_amalgam, is_reduced, kurosh,
    restrict_decomposition, validate_desingularization, verify_amalgam, verify_free_product, Certificate, CheckContext,
};
use proptest::prelude::*;
use space_core::{EquivRelation, FiniteSpace, PointSet};
use treefield::{bass_serre_free, Start};

fn labels_rel(space: FiniteSpace, labels: &[usize]) -> EquivRelation {
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); space.size()];
    for (x, &l) in labels.iter().enumerate() {
        classes[l % space.size()].push(x);
    }
    EquivRelation::from_classes(space, classes.into_iter().filter(|c| !c.is_empty())).unwrap()
}

/// Forest edges `(parent, child, factor)`; factor classes are the components of
/// each color, which makes the factors free by construction.
fn free_product(n: usize, m: usize, links: &[(usize, usize, bool)]) -> (EquivRelation, Vec<EquivRelation>) {
    let space = FiniteSpace::new(n).unwrap();
    let edges: Vec<(usize, usize, usize)> = (1..n)
        .filter_map(|c| {
            let (p, k, keep) = links[c - 1];
            keep.then_some((p % c, c, k % m))
        })
        .collect();
    let all = PointSet::full(space);
    let r = EquivRelation::generated_by(&all, edges.iter().flat_map(|&(p, c, _)| [(p, c), (c, p)])).unwrap();
    let fs = (0..m)
        .map(|k| {
            let pairs = edges.iter().filter(|e| e.2 == k).flat_map(|&(p, c, _)| [(p, c), (c, p)]);
            EquivRelation::generated_by(&all, pairs).unwrap()
        })
        .collect();
    (r, fs)
}

fn instance(max_n: usize, max_m: usize) -> impl Strategy<Value = (EquivRelation, Vec<EquivRelation>, Vec<usize>)> {
    (1..=max_n, 1..=max_m).prop_flat_map(move |(n, m)| {
        (
            prop::collection::vec((0..n, 0..m, prop::bool::weighted(0.8)), n.saturating_sub(1)),
            prop::collection::vec(0..n, n),
        )
            .prop_map(move |(links, labels)| {
                let (r, fs) = free_product(n, m, &links);
                (r, fs, labels)
            })
    })
}

fn sub_of(r: &EquivRelation, labels: &[usize]) -> EquivRelation {
    r.intersect(&labels_rel(r.space(), labels)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn incidence_method_matches_the_tuple_search(
        n in 1usize..8,
        raw in prop::collection::vec(prop::collection::vec(0usize..8, 8), 1..4),
    ) {
        let space = FiniteSpace::new(n).unwrap();
        let fs: Vec<EquivRelation> = raw.iter().map(|l| labels_rel(space, &l[..n])).collect();
        let r = EquivRelation::join(fs.iter()).unwrap();
        let v = verify_free_product(&r, &fs).unwrap();
        let oracle = find_closing_tuple(&fs, None, 2 * n);
        prop_assert_eq!(v.is_accept(), oracle.is_none());
        if let Some(t) = v.tuple() {
            prop_assert!(t.is_closing() && is_reduced(t, &fs, None).unwrap());
        }
        if fs.len() == 2 {
            let trivial = EquivRelation::trivial(space);
            prop_assert_eq!(verify_amalgam(&r, &fs[0], &fs[1], &trivial).unwrap().is_accept(), v.is_accept());
        }
    }

    #[test]
    fn generated_products_are_free((r, fs, _) in instance(9, 4)) {
        prop_assert!(verify_free_product(&r, &fs).unwrap().is_accept());
    }

    #[test]
    fn desingularizations_are_valid((r, fs, labels) in instance(7, 2)) {
        prop_assume!(fs.len() == 2);
        let s = sub_of(&r, &labels);
        let a = bass_serre_free(&r, &fs[0], &fs[1]).unwrap();
        let field = a.field.restrict_action(&s).unwrap();
        let d = desingularize(&field, Start::Edge(a.edge_section.clone())).unwrap();
        prop_assert_eq!(validate_desingularization(&field, &d), Ok(()));
        let split = generation_split(&field, &d).unwrap();
        prop_assert!(split.all_passed());
        for p in 0..d.node_count() {
            for q in p + 1..d.node_count() {
                match geodesic_amalgam(&field, &d, p, q) {
                    Ok(v) => prop_assert!(v.is_accept()),
                    Err(decomp::DecompError::EmptyIntersection) => {}
                    Err(e) => prop_assert!(false, "{e}"),
                }
            }
        }
    }

    #[test]
    fn kurosh_certificates_check((r, fs, labels) in instance(8, 3)) {
        let s = sub_of(&r, &labels);
        let k = kurosh(&r, &fs, &s).unwrap();
        let cert = Certificate::kurosh(&k);
        let ctx = CheckContext { relation: &r, factors: &fs, core: None, sub: Some(&s), subset: None };
        prop_assert_eq!(check_certificate(&cert, &ctx), Ok(()));
    }

    #[test]
    fn restriction_certificates_check((r, fs, labels) in instance(8, 3)) {
        let y = PointSet::from_points(r.space(), labels.iter().enumerate().filter(|(x, l)| (*x + **l) % 3 != 0).map(|(x, _)| x)).unwrap();
        let d = restrict_decomposition(&r, &fs, &y).unwrap();
        let cert = Certificate::restriction(&y, &d);
        let ctx = CheckContext { relation: &r, factors: &fs, core: None, sub: None, subset: Some(&y) };
        prop_assert_eq!(check_certificate(&cert, &ctx), Ok(()));
    }
}
