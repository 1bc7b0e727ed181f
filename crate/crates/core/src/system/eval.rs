//! Transfer-matrix evaluation and probe-line comparisons.
//!
//! Two transfer matrices are compared on a vertical line `Re s = sigma` to
//! the right of every pole, at the fixed frequencies below plus seeded
//! pseudorandom ones. A rational matrix whose McMillan degree is bounded by
//! the combined state dimension and which vanishes at more than that many
//! points is identically zero; the probe count is kept above twice the
//! combined dimension.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BlockViolation, StateSpaceSystem, StructureCheck, StructuredPattern};
use crate::error::{Error, Result};
use crate::numerics::{eigenvalues, to_complex, CMat, Mat, Tolerances};

const FIXED_FREQUENCIES: [f64; 11] = [0.0, 0.37, -0.37, 1.0, -1.0, 2.9, -2.9, 17.0, -17.0, 101.0, -101.0];
const SEEDED_EXTRA: usize = 8;

/// `D`, the value at infinity.
pub fn feedthrough(sys: &StateSpaceSystem) -> Mat {
    sys.d().clone()
}

pub(crate) fn eval_unchecked(sys: &StateSpaceSystem, s: Complex64) -> Result<CMat> {
    let n = sys.n_states();
    let d = to_complex(sys.d());
    if n == 0 {
        return Ok(d);
    }
    let mut resolvent = -to_complex(sys.a());
    for i in 0..n {
        resolvent[(i, i)] += s;
    }
    let x = resolvent
        .lu()
        .solve(&to_complex(sys.b()))
        .ok_or_else(|| Error::Numerical(format!("sI - A is singular at s = {s}")))?;
    Ok(d + to_complex(sys.c()) * x)
}

/// `D + C (sI - A)^{-1} B`. Fails within `1e-10` of an eigenvalue of `A`.
pub fn evaluate(sys: &StateSpaceSystem, s: Complex64) -> Result<CMat> {
    if let Some((pole, distance)) = eigenvalues(sys.a())?
        .into_iter()
        .map(|p| (p, (p - s).norm()))
        .min_by(|x, y| x.1.total_cmp(&y.1))
    {
        if distance <= 1e-10 {
            return Err(Error::NearPole {
                point: s,
                pole,
                distance,
            });
        }
    }
    eval_unchecked(sys, s)
}

fn abscissa_or_zero(sys: &StateSpaceSystem) -> Result<f64> {
    Ok(eigenvalues(sys.a())?
        .iter()
        .map(|z| z.re)
        .fold(0.0f64, f64::max))
}

/// Probe points on `Re s = sigma` for a combined state dimension `n_total`.
pub fn probe_points(sigma: f64, n_total: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut omegas: Vec<f64> = FIXED_FREQUENCIES.to_vec();
    let draw = |rng: &mut ChaCha8Rng| -> f64 {
        let mag = 10f64.powf(rng.random_range(-1.0..2.5));
        if rng.random_bool(0.5) {
            mag
        } else {
            -mag
        }
    };
    for _ in 0..SEEDED_EXTRA {
        omegas.push(draw(&mut rng));
    }
    while omegas.len() <= 2 * n_total {
        omegas.push(draw(&mut rng));
    }
    omegas.into_iter().map(|w| Complex64::new(sigma, w)).collect()
}

fn scaled_gap(g1: &CMat, g2: &CMat) -> f64 {
    let scale = g1
        .iter()
        .chain(g2.iter())
        .fold(1.0f64, |a, z| a.max(z.norm()));
    g1.iter()
        .zip(g2.iter())
        .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()))
        / scale
}

/// Largest scaled entrywise gap between two transfer matrices over the
/// probe set and at infinity. Infinite when the dimensions differ.
pub fn transfer_deviation(s1: &StateSpaceSystem, s2: &StateSpaceSystem, tol: &Tolerances) -> Result<f64> {
    if s1.n_outputs() != s2.n_outputs() || s1.n_inputs() != s2.n_inputs() {
        return Ok(f64::INFINITY);
    }
    let sigma = 1.0 + abscissa_or_zero(s1)?.max(abscissa_or_zero(s2)?);
    let mut worst = scaled_gap(&to_complex(s1.d()), &to_complex(s2.d()));
    for s in probe_points(sigma, s1.n_states() + s2.n_states(), tol.probe_seed) {
        worst = worst.max(scaled_gap(&eval_unchecked(s1, s)?, &eval_unchecked(s2, s)?));
    }
    Ok(worst)
}

/// Transfer-matrix equality within `match_tol` at the probe set.
pub fn systems_equal(s1: &StateSpaceSystem, s2: &StateSpaceSystem, tol: &Tolerances) -> Result<bool> {
    Ok(transfer_deviation(s1, s2, tol)? <= tol.match_tol)
}

/// Checks that every forbidden block of the transfer matrix vanishes
/// identically: its feedthrough and its values on the probe set.
pub fn is_structured_tf(
    sys: &StateSpaceSystem,
    pattern: &StructuredPattern,
    tol: &Tolerances,
) -> Result<StructureCheck> {
    if sys.outputs() != pattern.rows() || sys.inputs() != pattern.cols() {
        return Err(Error::Dimension(format!(
            "system partitions k={:?}, m={:?} differ from the pattern's {:?}, {:?}",
            sys.outputs().dims(),
            sys.inputs().dims(),
            pattern.rows().dims(),
            pattern.cols().dims()
        )));
    }
    let sigma = 1.0 + abscissa_or_zero(sys)?;
    let mut values = vec![to_complex(sys.d())];
    for s in probe_points(sigma, sys.n_states(), tol.probe_seed) {
        values.push(eval_unchecked(sys, s)?);
    }
    let n = pattern.sparsity().n_nodes();
    let mut violations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if pattern.allows(i, j) {
                continue;
            }
            let (r, c) = (pattern.rows().range(i), pattern.cols().range(j));
            let mut worst = 0.0f64;
            for g in &values {
                let scale = g.iter().fold(1.0f64, |a, z| a.max(z.norm()));
                let blk = g.view((r.start, c.start), (r.len(), c.len()));
                worst = worst.max(blk.iter().fold(0.0f64, |a, z| a.max(z.norm())) / scale);
            }
            if worst > tol.match_tol {
                violations.push(BlockViolation {
                    row_node: i,
                    col_node: j,
                    magnitude: worst,
                });
            }
        }
    }
    Ok(StructureCheck::from_violations(violations))
}
