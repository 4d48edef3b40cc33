use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Chart, Expr};
use crate::error::{Error, Result};

/// A point is rejected when any guard evaluates within this distance of zero.
pub const DEFAULT_GUARD_EPS: f64 = 1e-6;

/// Redraw budget per point before sampling gives up.
pub const MAX_REDRAWS: usize = 100;

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `n` points uniformly from the chart box.
///
/// Point `i` comes from its own counter-based stream `(seed, i)`, so the
/// result does not depend on evaluation order. Points where a guard is
/// within [`DEFAULT_GUARD_EPS`] of zero (or fails to evaluate) are redrawn.
pub fn sample_points(chart: &Chart, n: usize, seed: u64, guards: &[Expr]) -> Result<Vec<Vec<f64>>> {
    (0..n as u64)
        .map(|i| {
            let mut rng = stream(seed, i);
            for _ in 0..=MAX_REDRAWS {
                let p: Vec<f64> = chart.bounds().iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
                let ok = guards
                    .iter()
                    .all(|g| g.eval(&p).map(|v| v.abs() >= DEFAULT_GUARD_EPS).unwrap_or(false));
                if ok {
                    return Ok(p);
                }
            }
            Err(Error::SamplingExhausted { chart: chart.name().to_string() })
        })
        .collect()
}

/// A deterministic vector with entries uniform in `[-1, 1)`, from stream `(seed, index)`.
pub fn uniform_vector(len: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = stream(seed ^ 0x9e37_79b9_7f4a_7c15, index);
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// A seeded test function on a `dim`-dimensional chart: a quadratic
/// polynomial plus a small sine term, so that every derivative order is
/// nonzero.
pub fn random_scalar(dim: usize, seed: u64, index: u64) -> Expr {
    let c = uniform_vector(2 + 2 * dim + dim * dim, seed, index);
    let x = |i: usize| Expr::var(i);
    let mut e = Expr::constant(c[0]);
    let mut lin = Expr::zero();
    for i in 0..dim {
        e = e.add(&x(i).scale(c[1 + i]));
        lin = lin.add(&x(i).scale(c[1 + dim + i]));
        for j in i..dim {
            e = e.add(&x(i).mul(&x(j)).scale(0.5 * c[1 + 2 * dim + i * dim + j]));
        }
    }
    e.add(&Expr::call(super::Func::Sin, &lin).scale(0.5 * c[1 + 2 * dim + dim * dim]))
}
