use fibered::*;
use proptest::prelude::*;
use space_core::{EquivRelation, FiniteSpace, PointSet};

/// A relation on the whole space and a sub-relation on a complete domain.
fn pair() -> impl Strategy<Value = (EquivRelation, EquivRelation)> {
    (1usize..9).prop_flat_map(|n| {
        (prop::collection::vec(0..n, n), prop::collection::vec(0..3usize, n), prop::collection::vec(any::<bool>(), n))
            .prop_map(move |(labels, sub, keep)| {
                let space = FiniteSpace::new(n).unwrap();
                let group = |pred: &dyn Fn(usize) -> bool, key: &dyn Fn(usize) -> usize| {
                    let mut classes = std::collections::BTreeMap::<usize, Vec<usize>>::new();
                    for x in (0..n).filter(|&x| pred(x)) {
                        classes.entry(key(x)).or_default().push(x);
                    }
                    EquivRelation::from_classes(space, classes.into_values()).unwrap()
                };
                let r = group(&|_| true, &|x| labels[x]);
                let s = group(&|x| keep[x] || r.class_id(x) == Some(x), &|x| r.class_id(x).unwrap() * 3 + sub[x]);
                (r, s)
            })
    })
}

proptest! {
    #[test]
    fn quotient_contract((r, s) in pair()) {
        let (f, act, d) = quotient(&r, &s).unwrap();
        validate_action(&f, &act).unwrap();
        prop_assert_eq!(stabilizer(&f, &act, &d).unwrap(), s.clone());
        prop_assert!(act.is_saturating(&d));
        let orbits = orbit_relation(&f, &act).unwrap();
        for class in r.classes() {
            let over: Vec<_> = f.points().filter(|&t| class.contains(&f.proj(t))).collect();
            let count = over.iter().filter(|&&t| orbits.class_id(t) == Some(t)).count();
            let s_classes = class.iter().filter(|&&x| s.class_id(x) == Some(x)).count();
            prop_assert_eq!(count, s_classes);
        }
        let swap = right_quotient_symmetry(&r, &s).unwrap();
        prop_assert!(swap.is_bijective());
    }

    #[test]
    fn transport_is_invertible((r, s) in pair()) {
        let (f, act, _) = quotient(&r, &s).unwrap();
        for t in f.points() {
            let x = f.proj(t);
            for y in r.class_members(x) {
                let u = act.apply(y, x, t).unwrap();
                prop_assert_eq!(act.apply(x, y, u), Some(t));
            }
        }
    }

    #[test]
    fn exhaustion_partitions_carrier((r, s) in pair()) {
        let (f, act, _) = quotient(&r, &s).unwrap();
        let mut owner = vec![0usize; f.len()];
        for sec in exhaust_sections(&f, &act).unwrap() {
            prop_assert!(!sec.is_empty());
            for (t, hit) in act.saturate(sec.image()).into_iter().enumerate() {
                owner[t] += hit as usize;
            }
        }
        prop_assert!(owner.iter().all(|&c| c == 1));
        let fd = rf_fundamental_domain(&f, &act).unwrap();
        let orbits = orbit_relation(&f, &act).unwrap();
        prop_assert_eq!(fd.len(), orbits.num_classes());
        let fd_set = PointSet::from_points(f.carrier_space(), fd).unwrap();
        prop_assert_eq!(orbits.classify_domain(&fd_set).unwrap(), space_core::DomainKind::Both);
    }

    #[test]
    fn stabilizers_sit_inside_the_relation((r, s) in pair(), picks in prop::collection::vec(any::<(bool, usize)>(), 8)) {
        let (f, act, _) = quotient(&r, &s).unwrap();
        let pairs = f.base().points().filter_map(|x| {
            let (on, k) = picks[x];
            on.then(|| (x, f.fiber(x)[k % f.fiber(x).len()]))
        });
        let sec = PartialSection::new(&f, pairs).unwrap();
        let stab = stabilizer(&f, &act, &sec).unwrap();
        prop_assert!(stab.is_subrelation(&r.restrict(&sec.domain()).unwrap()).unwrap());
    }

    #[test]
    fn canonical_iso_round_trips((r, _) in pair()) {
        let (f, act, d) = canonical_left(&r).unwrap();
        let iso = canonical_iso(&f, &act, &d).unwrap();
        let inv = iso.inverse().unwrap();
        prop_assert_eq!(inv.compose(&iso).unwrap(), FiberedMorphism::identity(&f));
    }

    #[test]
    fn reductions_satisfy_their_formula((r, s) in pair(), shift in 0usize..8) {
        let (f, act, d) = quotient(&r, &s).unwrap();
        let other = PartialSection::new(&f, f.base().points().map(|x| {
            let fiber = f.fiber(x);
            (x, fiber[(f.position(d.get(x).unwrap_or(fiber[0])) + shift) % fiber.len()])
        })).unwrap();
        if act.is_saturating(&other) && act.is_saturating(&d) {
            let red = stable_conjugacy_witness(&f, &act, &d, &other).unwrap();
            for (x, y) in &red.pairs {
                prop_assert_eq!(act.apply(*y, *x, d.get(*x).unwrap()), other.get(*y));
            }
        }
    }
}
