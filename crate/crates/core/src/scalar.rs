//! Floating point abstraction shared by every algorithm in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar usable by the optimizers: `f32` or `f64`.
///
/// The `LinalgScalar` bound lets dense kernels dispatch to the
/// single/double precision GEMM paths of `ndarray`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + LinalgScalar
    + ScalarOperand
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, used for literals and configuration values.
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 is representable")
    }

    fn of_usize(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Left-to-right sum; the summation order is part of the reproducibility contract.
pub fn ordered_sum<F: Scalar>(values: impl IntoIterator<Item = F>) -> F {
    let mut acc = F::zero();
    for v in values {
        acc += v;
    }
    acc
}

/// Left-to-right arithmetic mean. Returns `None` for an empty input.
pub fn ordered_mean<F: Scalar>(values: impl IntoIterator<Item = F>) -> Option<F> {
    let mut acc = F::zero();
    let mut n = 0usize;
    for v in values {
        acc += v;
        n += 1;
    }
    (n > 0).then(|| acc / F::of_usize(n))
}

/// Index of the largest entry, ties to the lowest index. `None` if empty.
pub fn argmax_lowest<F: Scalar>(values: &[F]) -> Option<usize> {
    let mut best: Option<(usize, F)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Index of the smallest entry, ties to the lowest index. `None` if empty.
pub fn argmin_lowest<F: Scalar>(values: &[F]) -> Option<usize> {
    let mut best: Option<(usize, F)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v >= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arg_extrema_break_ties_low() {
        assert_eq!(argmax_lowest(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmin_lowest(&[2.0f32, 1.0, 1.0]), Some(1));
        assert_eq!(argmax_lowest::<f64>(&[]), None);
    }

    #[test]
    fn mean_of_empty_is_none() {
        assert_eq!(ordered_mean::<f64>(std::iter::empty()), None);
        assert_eq!(ordered_mean([1.0, 2.0, 6.0]), Some(3.0));
    }
}
