//! Seeded instance generators. Every output is a function of the seed alone.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use space_core::{EquivRelation, FiniteSpace, Graphing, PointSet};

use crate::instance::InstanceFile;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub size: usize,
    pub factors: usize,
    /// Upper bound on the size of an ambient class.
    pub max_class: usize,
    /// Probability of keeping a spanning-tree edge in a sampled sub-relation.
    pub density: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig { seed: 0, size: 6, factors: 2, max_class: 6, density: 0.5 }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn space(n: usize) -> FiniteSpace {
    FiniteSpace::new(n.max(1)).expect("nonempty")
}

/// Shuffles `points` and cuts them into runs of length `1..=max_class`.
fn random_partition(rng: &mut ChaCha8Rng, points: &[usize], max_class: usize) -> Vec<Vec<usize>> {
    let mut pts = points.to_vec();
    pts.shuffle(rng);
    let mut out = Vec::new();
    let mut rest = &pts[..];
    while !rest.is_empty() {
        let k = rng.random_range(1..=max_class.max(1).min(rest.len()));
        out.push(rest[..k].to_vec());
        rest = &rest[k..];
    }
    out
}

/// A uniformly attached random spanning tree of `class`.
fn random_tree(rng: &mut ChaCha8Rng, class: &[usize]) -> Vec<(usize, usize)> {
    let mut order = class.to_vec();
    order.shuffle(rng);
    (1..order.len()).map(|i| (order[rng.random_range(0..i)], order[i])).collect()
}

fn components(space: FiniteSpace, edges: impl IntoIterator<Item = (usize, usize)>) -> EquivRelation {
    let pairs: Vec<(usize, usize)> = edges.into_iter().flat_map(|(x, y)| [(x, y), (y, x)]).collect();
    EquivRelation::generated_by(&PointSet::full(space), pairs).expect("pairs in range")
}

/// Ambient relation and factors, free by construction: each ambient class gets a
/// random spanning tree whose edges are dealt to random factors, and factor
/// classes are the components of each factor's edges.
pub fn random_free_product(
    rng: &mut ChaCha8Rng,
    size: usize,
    m: usize,
    max_class: usize,
) -> (EquivRelation, Vec<EquivRelation>) {
    let sp = space(size);
    let points: Vec<usize> = sp.points().collect();
    let mut dealt: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m.max(1)];
    let mut all = Vec::new();
    for class in random_partition(rng, &points, max_class) {
        for e in random_tree(rng, &class) {
            dealt[rng.random_range(0..m.max(1))].push(e);
            all.push(e);
        }
    }
    let r = components(sp, all);
    let fs = dealt.into_iter().map(|es| components(sp, es)).collect();
    (r, fs)
}

fn write_product(size: usize, r: &EquivRelation, fs: &[EquivRelation]) -> InstanceFile {
    let mut inst = InstanceFile::new(size.max(1));
    inst.insert_relation("R", r);
    for (i, f) in fs.iter().enumerate() {
        let name = format!("R{}", i + 1);
        inst.insert_relation(&name, f);
        inst.structure.factors.push(name);
    }
    inst.structure.relation = Some("R".into());
    inst
}

pub fn gen_free_product(cfg: &GeneratorConfig) -> InstanceFile {
    let mut rng = rng(cfg.seed);
    let (r, fs) = random_free_product(&mut rng, cfg.size, cfg.factors, cfg.max_class);
    write_product(cfg.size, &r, &fs)
}

/// Merges two classes of one factor inside one ambient class. Inside a connected
/// ambient class this always closes a reduced tuple; returns `false` when no
/// factor has two classes in a common ambient class.
pub fn perturb(rng: &mut ChaCha8Rng, r: &EquivRelation, fs: &mut [EquivRelation]) -> bool {
    let mut options = Vec::new();
    for (k, f) in fs.iter().enumerate() {
        for x in r.space().points() {
            for y in r.class_members(x) {
                if x < y && f.class_id(x) == Some(x) && f.class_id(y) == Some(y) {
                    options.push((k, x, y));
                }
            }
        }
    }
    if options.is_empty() {
        return false;
    }
    let (k, x, y) = options[rng.random_range(0..options.len())];
    fs[k] = EquivRelation::generated_by(&fs[k].domain(), fs[k].pairs().into_iter().chain([(x, y), (y, x)]))
        .expect("in range");
    true
}

pub fn gen_non_free(cfg: &GeneratorConfig) -> InstanceFile {
    let mut rng = rng(cfg.seed);
    let (r, mut fs) = random_free_product(&mut rng, cfg.size, cfg.factors.max(2), cfg.max_class);
    perturb(&mut rng, &r, &mut fs);
    write_product(cfg.size, &r, &fs)
}

/// An amalgam over a random core: a free product of the core blocks, blown up.
pub fn random_amalgam(
    rng: &mut ChaCha8Rng,
    size: usize,
    max_class: usize,
) -> (EquivRelation, EquivRelation, EquivRelation, EquivRelation) {
    let sp = space(size);
    let points: Vec<usize> = sp.points().collect();
    let blocks = random_partition(rng, &points, 2);
    let (br, bfs) = random_free_product(rng, blocks.len(), 2, max_class.div_ceil(2).max(1));
    let blow = |rel: &EquivRelation| {
        EquivRelation::from_classes(
            sp,
            rel.classes()
                .into_iter()
                .map(|c| c.into_iter().flat_map(|b| blocks[b].iter().copied()).collect::<Vec<_>>()),
        )
        .expect("blocks partition the space")
    };
    let core = EquivRelation::from_classes(sp, blocks.clone()).expect("partition");
    (blow(&br), blow(&bfs[0]), blow(&bfs[1]), core)
}

fn write_amalgam(
    size: usize,
    r: &EquivRelation,
    r1: &EquivRelation,
    r2: &EquivRelation,
    c: &EquivRelation,
) -> InstanceFile {
    let mut inst = write_product(size, r, &[r1.clone(), r2.clone()]);
    inst.insert_relation("C", c);
    inst.structure.core = Some("C".into());
    inst
}

pub fn gen_amalgam(cfg: &GeneratorConfig) -> InstanceFile {
    let mut rng = rng(cfg.seed);
    let (r, r1, r2, c) = random_amalgam(&mut rng, cfg.size, cfg.max_class);
    write_amalgam(cfg.size, &r, &r1, &r2, &c)
}

pub fn gen_non_amalgam(cfg: &GeneratorConfig) -> InstanceFile {
    let mut rng = rng(cfg.seed);
    let (r, r1, r2, c) = random_amalgam(&mut rng, cfg.size, cfg.max_class);
    let mut fs = [r1, r2];
    perturb(&mut rng, &r, &mut fs);
    let [r1, r2] = fs;
    write_amalgam(cfg.size, &r, &r1, &r2, &c)
}

/// Keeps each edge of a random spanning tree of every class with probability `density`.
pub fn gen_subrelation(seed: u64, r: &EquivRelation, density: f64) -> EquivRelation {
    let mut rng = rng(seed);
    let mut kept = Vec::new();
    for class in r.classes() {
        for e in random_tree(&mut rng, &class) {
            if rng.random_bool(density.clamp(0.0, 1.0)) {
                kept.push(e);
            }
        }
    }
    let pairs: Vec<(usize, usize)> = kept.into_iter().flat_map(|(x, y)| [(x, y), (y, x)]).collect();
    EquivRelation::generated_by(&r.domain(), pairs).expect("pairs inside the domain")
}

/// A random forest with components of size at most `max_class`.
pub fn gen_treeing(cfg: &GeneratorConfig) -> Graphing {
    let mut rng = rng(cfg.seed);
    let sp = space(cfg.size);
    let points: Vec<usize> = sp.points().collect();
    let edges: Vec<(usize, usize)> =
        random_partition(&mut rng, &points, cfg.max_class).iter().flat_map(|c| random_tree(&mut rng, c)).collect();
    Graphing::from_edges(sp, edges).expect("tree edges are proper")
}

/// A random subset where each point is kept with probability `density`.
pub fn gen_subset(seed: u64, space: FiniteSpace, density: f64) -> PointSet {
    let mut rng = rng(seed);
    let pts: Vec<usize> = space.points().filter(|_| rng.random_bool(density.clamp(0.0, 1.0))).collect();
    PointSet::from_points(space, pts).expect("in range")
}

#[cfg(test)]
mod tests {
    use decomp::{verify_amalgam, verify_free_product};

    use super::*;
    use crate::instance::serialize_instance;

    #[test]
    fn free_products_verify_and_repeat() {
        let cfg = GeneratorConfig { seed: 0, size: 4, factors: 2, ..Default::default() };
        let inst = gen_free_product(&cfg);
        assert!(verify_free_product(&inst.ambient().unwrap(), &inst.factors().unwrap()).unwrap().is_accept());
        assert_eq!(serialize_instance(&inst), serialize_instance(&gen_free_product(&cfg)));
    }

    #[test]
    fn single_point_is_trivial() {
        let inst = gen_free_product(&GeneratorConfig { size: 1, ..Default::default() });
        assert!(inst.ambient().unwrap().is_trivial());
    }

    #[test]
    fn subrelation_density_extremes() {
        let inst = gen_free_product(&GeneratorConfig { seed: 3, size: 8, ..Default::default() });
        let r = inst.ambient().unwrap();
        assert!(gen_subrelation(1, &r, 0.0).is_trivial());
        assert_eq!(gen_subrelation(1, &r, 1.0), r);
        assert!(gen_subrelation(1, &r, 0.5).is_subrelation(&r).unwrap());
    }

    #[test]
    fn amalgams_verify() {
        for seed in 0..20 {
            let inst = gen_amalgam(&GeneratorConfig { seed, size: 8, ..Default::default() });
            let fs = inst.factors().unwrap();
            let v = verify_amalgam(&inst.ambient().unwrap(), &fs[0], &fs[1], &inst.core().unwrap()).unwrap();
            assert!(v.is_accept(), "seed {seed}");
        }
    }

    #[test]
    fn perturbation_breaks_freeness_when_possible() {
        let mut rng = rng(5);
        for _ in 0..30 {
            let (r, mut fs) = random_free_product(&mut rng, 7, 2, 7);
            if perturb(&mut rng, &r, &mut fs) {
                assert!(!verify_free_product(&r, &fs).unwrap().is_accept());
            }
        }
    }
}
