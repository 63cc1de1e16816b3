use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::IntegralOperator;
use crate::error::Result;
use crate::measure::{FiniteMeasureSpace, KernelMatrix};

/// A random finite operator together with test functions on its domain.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub op: IntegralOperator,
    pub functions: Vec<Vec<f64>>,
}

/// Random nonnegative `rows × cols` kernel with random weights and
/// `functions` random test functions. Kernel entries mix uniform, heavy-tailed
/// and sparse draws so that both rearrangement profiles vary in shape.
pub fn random_instance(rng: &mut ChaCha8Rng, rows: usize, cols: usize, functions: usize) -> Result<RandomInstance> {
    let weights = |rng: &mut ChaCha8Rng, k: usize| -> Vec<f64> { (0..k).map(|_| rng.random_range(0.05..1.0)).collect() };
    let wm = weights(rng, cols);
    let wn = weights(rng, rows);
    let style = rng.random_range(0..3);
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| match style {
            0 => rng.random_range(0.0..1.0),
            1 => {
                let u: f64 = rng.random_range(1e-3..1.0);
                u.powf(-0.7)
            }
            _ => {
                if rng.random_bool(0.4) {
                    0.0
                } else {
                    rng.random_range(0.0..5.0)
                }
            }
        })
        .collect();
    let op = IntegralOperator::new(
        KernelMatrix::new(rows, cols, data)?,
        FiniteMeasureSpace::atomic(wm)?,
        FiniteMeasureSpace::atomic(wn)?,
    )?;
    let functions = (0..functions)
        .map(|_| {
            let sparse = rng.random_bool(0.3);
            (0..cols)
                .map(|_| {
                    if sparse && rng.random_bool(0.5) {
                        0.0
                    } else {
                        rng.random_range(-2.0..2.0)
                    }
                })
                .collect()
        })
        .collect();
    Ok(RandomInstance { op, functions })
}
