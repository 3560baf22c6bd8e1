//! Sampled one-dimensional layer for convolution statements. Convolving
//! two step functions leaves the exact piecewise-constant class, so this
//! module works on uniform midpoint samples and reports quadrature-sized
//! tolerances instead of exact flags.
//!
//! A `SampledFunction` stores midpoint values on the cells
//! `[origin + i h, origin + (i+1) h)`. Discrete convolution scaled by
//! `h` approximates the continuum integral to first order in `h`, and
//! the dilation identity
//! `(St_(rho) f) * phi = St_(rho) (f * St1_(1/rho) phi)` holds exactly
//! at the sample level, so decomposition transport can be tested to
//! machine precision even in this approximate layer.

use crate::error::{Error, Result};
use crate::exponents::{Exponent, Exponents};
use crate::rational::rat_from_f64;
use crate::real::{Accumulator, Real};
use crate::simple::SimpleFunction;
use rayon::prelude::*;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct SampledFunction<T> {
    origin: T,
    step: T,
    samples: Vec<T>,
}

impl<T: Real> SampledFunction<T> {
    pub fn new(origin: T, step: T, samples: Vec<T>) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() {
            return Err(Error::NonPositiveStep(step.to_f64c()));
        }
        let mut f = SampledFunction {
            origin,
            step,
            samples,
        };
        f.trim();
        Ok(f)
    }

    fn trim(&mut self) {
        while self.samples.last().map_or(false, |v| *v == T::zero()) {
            self.samples.pop();
        }
        let lead = self
            .samples
            .iter()
            .take_while(|v| **v == T::zero())
            .count();
        if lead > 0 {
            self.samples.drain(..lead);
            self.origin = self.origin + T::from_f64c(lead as f64) * self.step;
        }
        if self.samples.is_empty() {
            self.origin = T::zero();
        }
    }

    pub fn origin(&self) -> T {
        self.origin
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Midpoint of cell `i`.
    pub fn position(&self, i: usize) -> T {
        self.origin + (T::from_f64c(i as f64) + T::from_f64c(0.5)) * self.step
    }

    /// Signed mass `h * sum(samples)`.
    pub fn mass(&self) -> T {
        let mut acc = Accumulator::new();
        for v in &self.samples {
            acc.add(*v);
        }
        acc.total() * self.step
    }

    pub fn l1_norm(&self) -> T {
        let mut acc = Accumulator::new();
        for v in &self.samples {
            acc.add(v.abs());
        }
        acc.total() * self.step
    }

    pub fn max_abs(&self) -> T {
        self.samples
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// One-dimensional `St_(rho)` with exponent `beta`: positions scale
    /// by `rho`, values by `rho^(-1/beta)`. Exact on the sample level.
    pub fn dilate(&self, rho: T, beta: &Exponent) -> Result<Self> {
        if !(rho > T::zero()) || !rho.is_finite() {
            return Err(Error::NonPositiveScale(rat_from_f64(rho.to_f64c())?));
        }
        let factor = match beta {
            Exponent::Infinite => T::one(),
            Exponent::Finite(b) => rho.powf(-T::from_rat(b).recip()),
        };
        SampledFunction::new(
            self.origin * rho,
            self.step * rho,
            self.samples.iter().map(|v| *v * factor).collect(),
        )
    }

    fn require_same_step(&self, other: &Self) -> Result<()> {
        let tol = T::from_f64c(1e-9) * self.step;
        if (self.step - other.step).abs() > tol {
            return Err(Error::StepMismatch(
                self.step.to_f64c(),
                other.step.to_f64c(),
            ));
        }
        Ok(())
    }

    /// Pointwise `self + c * other` after snapping `other`'s grid onto
    /// this one (origins may differ by any amount; the offset is rounded
    /// to the nearest whole cell, at most half a step of displacement).
    pub fn add_scaled(&self, other: &Self, c: T) -> Result<Self> {
        if self.is_empty() {
            return SampledFunction::new(
                other.origin,
                if other.is_empty() { self.step } else { other.step },
                other.samples.iter().map(|v| c * *v).collect(),
            );
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        self.require_same_step(other)?;
        let offset = ((other.origin - self.origin) / self.step)
            .to_f64c()
            .round() as i64;
        let lo = 0i64.min(offset);
        let hi = (self.samples.len() as i64).max(offset + other.samples.len() as i64);
        let mut out = vec![T::zero(); (hi - lo) as usize];
        for (i, v) in self.samples.iter().enumerate() {
            out[(i as i64 - lo) as usize] = *v;
        }
        for (i, v) in other.samples.iter().enumerate() {
            let slot = (offset + i as i64 - lo) as usize;
            out[slot] = out[slot] + c * *v;
        }
        SampledFunction::new(
            self.origin + T::from_f64c(lo as f64) * self.step,
            self.step,
            out,
        )
    }
}

/// Midpoint sampling of a one-dimensional step function on a grid of
/// step `h` aligned to multiples of `h` and covering the support.
pub fn sample<T: Real>(f: &SimpleFunction<T>, h: T) -> Result<SampledFunction<T>> {
    if f.dim() != 1 {
        return Err(Error::NotOneDimensional(f.dim()));
    }
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::NonPositiveStep(h.to_f64c()));
    }
    if f.is_zero() {
        return SampledFunction::new(T::zero(), h, vec![]);
    }
    let extent = f.support_extent()?;
    let lo = T::from_rat(&extent.lo()[0]);
    let hi = T::from_rat(&extent.hi()[0]);
    let i0 = (lo / h).floor();
    let origin = i0 * h;
    let n = ((hi - origin) / h).ceil().to_f64c() as usize;
    let half = T::from_f64c(0.5);
    let samples: Vec<T> = (0..n)
        .map(|i| {
            let mid = origin + (T::from_f64c(i as f64) + half) * h;
            Ok(f.value_at(&[rat_from_f64(mid.to_f64c())?]))
        })
        .collect::<Result<_>>()?;
    SampledFunction::new(origin, h, samples)
}

/// Discrete convolution scaled by the step, the Riemann approximation
/// of `int F(y) G(x - y) dy`. Output cell `k` sits at position
/// `F.origin + G.origin + (k + 1) h`, hence the `h/2` origin shift.
pub fn convolve<T: Real>(
    f: &SampledFunction<T>,
    g: &SampledFunction<T>,
) -> Result<SampledFunction<T>> {
    if f.is_empty() || g.is_empty() {
        return SampledFunction::new(T::zero(), f.step(), vec![]);
    }
    f.require_same_step(g)?;
    let h = f.step();
    let n = f.len() + g.len() - 1;
    let mut out = vec![T::zero(); n];
    for (i, a) in f.samples().iter().enumerate() {
        if *a == T::zero() {
            continue;
        }
        for (j, b) in g.samples().iter().enumerate() {
            out[i + j] = out[i + j] + *a * *b;
        }
    }
    for v in &mut out {
        *v = *v * h;
    }
    let half = T::from_f64c(0.5);
    SampledFunction::new(f.origin() + g.origin() + half * h, h, out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MollifierKind {
    /// `phi = chi_[0,1)`.
    Box,
    /// Tent of height 1 peaking at 1, supported on `[0,2)`.
    Triangle,
}

impl MollifierKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "box" => Ok(MollifierKind::Box),
            "triangle" | "tent" => Ok(MollifierKind::Triangle),
            other => Err(Error::Parse(format!("unknown mollifier kind '{other}'"))),
        }
    }
}

/// The scaled mollifier `phi_eps = eps^(-1) phi(./eps)` sampled at step
/// `h` and renormalized so the signed mass is exactly 1. Requires
/// `eps >= h` so the bump is resolved by at least one sample.
pub fn mollifier<T: Real>(kind: MollifierKind, eps: T, h: T) -> Result<SampledFunction<T>> {
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(Error::NonPositiveWidth(eps.to_f64c()));
    }
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::NonPositiveStep(h.to_f64c()));
    }
    if eps < h {
        return Err(Error::WidthBelowStep {
            width: eps.to_f64c(),
            step: h.to_f64c(),
        });
    }
    let support = match kind {
        MollifierKind::Box => eps,
        MollifierKind::Triangle => T::from_f64c(2.0) * eps,
    };
    let n = (support / h).ceil().to_f64c() as usize;
    let half = T::from_f64c(0.5);
    let inv_eps = eps.recip();
    let samples: Vec<T> = (0..n)
        .map(|i| {
            let t = (T::from_f64c(i as f64) + half) * h * inv_eps;
            match kind {
                MollifierKind::Box => {
                    if t < T::one() {
                        inv_eps
                    } else {
                        T::zero()
                    }
                }
                MollifierKind::Triangle => {
                    inv_eps * (T::one() - (t - T::one()).abs()).max(T::zero())
                }
            }
        })
        .collect();
    let raw = SampledFunction::new(T::zero(), h, samples)?;
    let mass = raw.mass();
    if !(mass > T::zero()) {
        return Err(Error::WidthBelowStep {
            width: eps.to_f64c(),
            step: h.to_f64c(),
        });
    }
    SampledFunction::new(
        raw.origin(),
        h,
        raw.samples().iter().map(|v| *v / mass).collect(),
    )
}

/// Amalgam norm of a sampled function with per-cube midpoint quadrature
/// over the scale-`rho` lattice; accurate to O(h) for piecewise-smooth
/// data.
pub fn approx_amalgam_norm<T: Real>(
    f: &SampledFunction<T>,
    q: &Exponent,
    p: &Exponent,
    rho: T,
) -> Result<T> {
    if !(rho > T::zero()) || !rho.is_finite() {
        return Err(Error::NonPositiveScale(rat_from_f64(rho.to_f64c())?));
    }
    if f.is_empty() {
        return Ok(T::zero());
    }
    let h = f.step();
    let mut cubes: BTreeMap<i64, Accumulator<T>> = BTreeMap::new();
    for i in 0..f.len() {
        let v = f.samples()[i].abs();
        if v == T::zero() {
            continue;
        }
        let k = (f.position(i) / rho).floor().to_f64c() as i64;
        let acc = cubes.entry(k).or_insert_with(Accumulator::new);
        match q {
            Exponent::Infinite => {
                let cur = acc.total();
                if v > cur {
                    acc.add(v - cur);
                }
            }
            Exponent::Finite(qr) => {
                let qe = T::from_rat(qr);
                if qe == T::one() {
                    acc.add(v * h);
                } else {
                    acc.add(v.powf(qe) * h);
                }
            }
        }
    }
    let cube_norms: Vec<T> = cubes
        .values()
        .map(|acc| match q {
            Exponent::Infinite => acc.total(),
            Exponent::Finite(qr) => {
                let qe = T::from_rat(qr);
                if qe == T::one() {
                    acc.total()
                } else {
                    acc.total().powf(qe.recip())
                }
            }
        })
        .collect();
    match p {
        Exponent::Infinite => Ok(cube_norms
            .into_iter()
            .fold(T::zero(), |m, v| m.max(v))),
        Exponent::Finite(pr) => {
            let pe = T::from_rat(pr);
            let mut acc = Accumulator::new();
            for v in cube_norms {
                if pe == T::one() {
                    acc.add(v);
                } else {
                    acc.add(v.powf(pe));
                }
            }
            if pe == T::one() {
                Ok(acc.total())
            } else {
                Ok(acc.total().powf(pe.recip()))
            }
        }
    }
}

/// Total variation of a one-dimensional step function, counting the
/// jumps up from and back down to zero at the ends and across gaps.
pub fn total_variation<T: Real>(f: &SimpleFunction<T>) -> Result<T> {
    if f.dim() != 1 {
        return Err(Error::NotOneDimensional(f.dim()));
    }
    let mut acc = Accumulator::new();
    let mut prev_end: Option<&crate::rational::Rat> = None;
    let mut prev_val = T::zero();
    for t in f.terms() {
        let lo = &t.region.lo()[0];
        let adjacent = prev_end.map_or(false, |e| e == lo);
        if !adjacent {
            acc.add(prev_val.abs());
            prev_val = T::zero();
        }
        acc.add((t.value - prev_val).abs());
        prev_val = t.value;
        prev_end = Some(&t.region.hi()[0]);
    }
    acc.add(prev_val.abs());
    Ok(acc.total())
}

/// Quadrature tolerance for convolution-layer comparisons at step `h`:
/// scales with the roughness and size of `f`, and with the dual cube
/// exponent since per-cube powers amplify sampling error.
pub fn convolution_tolerance<T: Real>(
    f: &SimpleFunction<T>,
    exps: &Exponents,
    h: T,
) -> Result<T> {
    let tv = total_variation(f)?;
    let peak = T::one() + f.max_abs_value();
    let e = match exps.q_conj() {
        Exponent::Infinite => T::one(),
        Exponent::Finite(qr) => T::from_rat(&qr).min(T::from_f64c(4.0)).max(T::one()),
    };
    let extent = if f.is_zero() {
        T::one()
    } else {
        let ext = f.support_extent()?;
        T::one() + T::from_rat(&(&ext.hi()[0] - &ext.lo()[0]))
    };
    Ok(T::from_f64c(10.0) * h * (T::one() + tv) * peak.powf(e) * extent)
}

/// For each `eps`, the residual `||f * phi_eps - f||_(q',p';1)` in the
/// dual amalgam norm. This norm dominates the decomposition norm, so
/// observed decay certifies mollifier convergence there as well.
pub fn mollifier_convergence<T: Real>(
    f: &SimpleFunction<T>,
    exps: &Exponents,
    kind: MollifierKind,
    eps_list: &[T],
    h: T,
) -> Result<Vec<(T, T)>> {
    if f.dim() != 1 {
        return Err(Error::NotOneDimensional(f.dim()));
    }
    if !(exps.q() > &Exponent::one()) {
        return Err(Error::InvalidExponent(
            "mollifier convergence requires q > 1".into(),
        ));
    }
    exps.require_ordered()?;
    let dual = exps.dual();
    let sampled = sample(f, h)?;
    eps_list
        .par_iter()
        .map(|eps| {
            let phi = mollifier(kind, *eps, h)?;
            let conv = convolve(&sampled, &phi)?;
            let residual = conv.add_scaled(&sampled, -T::one())?;
            let err = approx_amalgam_norm(&residual, dual.q(), dual.p(), T::one())?;
            Ok((*eps, err))
        })
        .collect()
}
