use decomp::{verify_amalgam, verify_free_product};
use harness_cli::gen::{self, GeneratorConfig};
use harness_cli::{digest, parse_instance, serialize_instance};
use proptest::prelude::*;

fn config() -> impl Strategy<Value = GeneratorConfig> {
    (any::<u64>(), 1usize..=12, 1usize..=4, 1usize..=12, 0.0f64..=1.0).prop_map(
        |(seed, size, factors, max_class, density)| GeneratorConfig { seed, size, factors, max_class, density },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn canonical_text_round_trips(cfg in config()) {
        let mut inst = gen::gen_free_product(&cfg);
        let r = inst.ambient().unwrap();
        inst.insert_relation("S", &gen::gen_subrelation(cfg.seed, &r, cfg.density));
        inst.structure.sub = Some("S".into());
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_instance(&back), text);
        prop_assert_eq!(digest(&back), digest(&inst));
    }

    #[test]
    fn generators_match_their_labels(cfg in config()) {
        let free = gen::gen_free_product(&cfg);
        prop_assert!(verify_free_product(&free.ambient().unwrap(), &free.factors().unwrap()).unwrap().is_accept());
        let am = gen::gen_amalgam(&cfg);
        let fs = am.factors().unwrap();
        prop_assert!(verify_amalgam(&am.ambient().unwrap(), &fs[0], &fs[1], &am.core().unwrap()).unwrap().is_accept());
    }

    #[test]
    fn subrelations_stay_inside(cfg in config()) {
        let r = gen::gen_free_product(&cfg).ambient().unwrap();
        let s = gen::gen_subrelation(cfg.seed, &r, cfg.density);
        prop_assert!(s.is_subrelation(&r).unwrap());
        prop_assert_eq!(s.domain(), r.domain());
    }
}
