//! Seeded workloads shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use structlti::graph::SparsityPattern;
use structlti::random::{self, Spectrum};
use structlti::synthesis::structured_stabilizability_test;
use structlti::{StateSpaceSystem, StructuredRealization, Tolerances, Verdict};

/// A lower-triangular chain with `nodes` nodes and `order` states per node,
/// in scrambled coordinates without a state index.
pub fn scrambled_chain(nodes: usize, order: usize, seed: u64) -> StateSpaceSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chain = SparsityPattern::lower_triangular(nodes);
    let k = structlti::IndexSet::uniform(nodes, 1);
    let n = structlti::IndexSet::uniform(nodes, order);
    let sys = random::structured_system(&mut rng, &chain, &k, &k, &n, Spectrum::Mixed, 0.5);
    let t = random::similarity(&mut rng, sys.n_states());
    sys.similarity(&t).unwrap().with_states(None).unwrap()
}

/// First seeded structured plant over a random lower-triangular pattern
/// whose diagonal blocks pass the PBH test.
pub fn stabilizable_plant(nodes: usize, order: usize, seed: u64) -> StructuredRealization {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let sparsity = random::lower_triangular_pattern(&mut rng, nodes, 0.6);
        let k = random::index_set(&mut rng, nodes, 1, 2);
        let m = random::index_set(&mut rng, nodes, 1, 2);
        let n = structlti::IndexSet::uniform(nodes, order);
        let d_scale = if rng.random_bool(0.5) { 0.5 } else { 0.0 };
        let sys = random::structured_system(&mut rng, &sparsity, &k, &m, &n, Spectrum::Mixed, d_scale);
        let pattern = sys.io_pattern(&sparsity).unwrap();
        if let Ok(r) = StructuredRealization::verified(sys, pattern, &tol) {
            if structured_stabilizability_test(&r, &tol).unwrap().stabilizable == Verdict::Yes {
                return r;
            }
        }
    }
}
