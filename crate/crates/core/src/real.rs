//! Scalar abstraction for the floating-point side of the library.
//!
//! Geometry is exact rational throughout; everything that is a *value*
//! (function levels, norms, curve samples) goes through [`Real`] so the
//! library works over `f32` or `f64`. The concrete aliases at the crate
//! root fix `f64`, which is what the command line tool uses.

use crate::rational::Rat;
use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumCast
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Nearest representable value of an exact rational.
    fn from_rat(r: &Rat) -> Self {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        Self::from_f64c(n / d)
    }

    fn from_f64c(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 conversion")
    }

    fn to_f64c(self) -> f64 {
        self.to_f64().expect("f64 conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Default comparison slack for "equal up to roundoff" checks: the spec
/// tolerance when the scalar can honour it, a small multiple of epsilon
/// otherwise (so `f32` instantiations stay usable).
pub fn roundoff_tol<T: Real>() -> T {
    let pinned = T::from_f64c(1e-12);
    let floor = T::epsilon() * T::from_f64c(64.0);
    if pinned > floor {
        pinned
    } else {
        floor
    }
}

/// Neumaier compensated accumulator. Sums stay deterministic because every
/// call site feeds it in a canonical order; compensation keeps the result
/// within a few ulps of the exact sum regardless of term count.
#[derive(Clone, Copy, Debug)]
pub struct Accumulator<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Default for Accumulator<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Accumulator<T> {
    pub fn new() -> Self {
        Accumulator {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum + self.comp
    }
}

pub fn neumaier_sum<T: Real, I: IntoIterator<Item = T>>(it: I) -> T {
    let mut acc = Accumulator::new();
    for v in it {
        acc.add(v);
    }
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn rational_conversion_is_exact_for_dyadics() {
        let r = BigRational::new(3.into(), 8.into());
        assert_eq!(f64::from_rat(&r), 0.375);
        assert_eq!(f32::from_rat(&r), 0.375f32);
    }

    #[test]
    fn compensated_sum_beats_naive_on_cancellation() {
        let xs = [1.0f64, 1e16, 1.0, -1e16];
        let naive: f64 = xs.iter().sum();
        let comp = neumaier_sum(xs.iter().copied());
        assert_eq!(comp, 2.0);
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn tolerance_is_spec_pinned_for_f64() {
        assert_eq!(roundoff_tol::<f64>(), 1e-12);
        assert!(roundoff_tol::<f32>() > 1e-6);
    }
}
