//! Seeded generators of random structured instances, for property tests and
//! benchmarks.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::graph::{adjacency, transitive_closure, Graph, SparsityPattern};
use crate::numerics::{spectral_abscissa, Mat};
use crate::system::{IndexSet, StateSpaceSystem, StructuredPattern};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

/// Random valid pattern with lower-triangular mask: each edge `j -> i`
/// (`j < i`) is drawn with probability `p`, then closed transitively.
pub fn lower_triangular_pattern<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> SparsityPattern {
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    for i in 0..n {
        for j in 0..i {
            if rng.random_bool(p) {
                edges.push((j, i));
            }
        }
    }
    let g = Graph::new(n, edges).expect("edges in range");
    adjacency(&transitive_closure(&g)).expect("closed acyclic graph")
}

pub fn index_set<R: Rng + ?Sized>(rng: &mut R, n_nodes: usize, lo: usize, hi: usize) -> IndexSet {
    IndexSet::new((0..n_nodes).map(|_| rng.random_range(lo..=hi)).collect())
}

/// Gaussian entries in allowed blocks, exact zeros elsewhere.
pub fn structured_matrix<R: Rng + ?Sized>(rng: &mut R, pattern: &StructuredPattern) -> Mat {
    let mut m = gaussian(rng, pattern.rows().total(), pattern.cols().total());
    pattern.project(&mut m);
    m
}

/// How the diagonal state blocks are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spectrum {
    /// Every block Hurwitz.
    Stable,
    /// Each block independently stable or unstable with equal odds.
    Mixed,
}

/// Random structured system with every diagonal block of `A` shifted so
/// its spectral abscissa lies in `[-1.5, -0.3]` (stable) or `[0.2, 1]`
/// (unstable). `d_scale` scales the feedthrough.
#[allow(clippy::too_many_arguments)]
pub fn structured_system<R: Rng + ?Sized>(
    rng: &mut R,
    sparsity: &SparsityPattern,
    k: &IndexSet,
    m: &IndexSet,
    n: &IndexSet,
    spectrum: Spectrum,
    d_scale: f64,
) -> StateSpaceSystem {
    let pat = |r: &IndexSet, c: &IndexSet| {
        StructuredPattern::new(sparsity.clone(), r.clone(), c.clone()).expect("matching node counts")
    };
    let mut a = structured_matrix(rng, &pat(n, n));
    for i in 0..n.n_nodes() {
        let r = n.range(i);
        if r.is_empty() {
            continue;
        }
        let blk = a.view((r.start, r.start), (r.len(), r.len())).into_owned();
        let abscissa = spectral_abscissa(&blk).expect("finite block");
        let unstable = spectrum == Spectrum::Mixed && rng.random_bool(0.5);
        let target = if unstable {
            rng.random_range(0.2..1.0)
        } else {
            -rng.random_range(0.3..1.5)
        };
        for p in r {
            a[(p, p)] += target - abscissa;
        }
    }
    let b = structured_matrix(rng, &pat(n, m));
    let c = structured_matrix(rng, &pat(k, n));
    let d = structured_matrix(rng, &pat(k, m)) * d_scale;
    StateSpaceSystem::partitioned(a, b, c, d, k.clone(), m.clone(), Some(n.clone()))
        .expect("consistent dimensions")
}

/// Orthogonal factor of a Gaussian matrix.
pub fn orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    gaussian(rng, n, n).qr().q()
}

/// Well-conditioned random similarity `U diag(e^t) V` with `|t| <= 0.5`.
pub fn similarity<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    let s = nalgebra::DVector::from_fn(n, |_, _| rng.random_range(-0.5f64..0.5).exp());
    orthogonal(rng, n) * Mat::from_diagonal(&s) * orthogonal(rng, n)
}
