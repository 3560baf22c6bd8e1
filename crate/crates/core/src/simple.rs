//! Piecewise-constant functions with exact rational support geometry.
//!
//! A [`SimpleFunction`] is a finite sum `sum_i v_i 1_{B_i}` held in
//! canonical form: the boxes are pairwise disjoint, every stored value is
//! nonzero, and terms are sorted by box corner. Canonical form is what
//! makes products, pairings and norms straightforward: they only ever see
//! disjoint constant pieces.
//!
//! Canonicalisation is a per-axis refinement sweep. Collect the corner
//! coordinates of all input boxes on each axis, cut space into the product
//! grid of elementary cells, and accumulate each input value over the
//! cells its box covers. Cells that sum to zero are dropped. No merging is
//! attempted afterwards; the result is the coarsest refinement generated
//! by the input corners.

use crate::error::{Error, Result};
use crate::exponents::Exponent;
use crate::geometry::{Aabb, MAX_DIM};
use crate::rational::{rat_int, require_positive, Rat};
use crate::real::{Accumulator, Real};
use std::collections::HashMap;

#[derive(Clone, Debug)]
pub struct Term<T> {
    pub value: T,
    pub region: Aabb,
}

#[derive(Clone, Debug)]
pub struct SimpleFunction<T> {
    dim: usize,
    terms: Vec<Term<T>>,
}

impl<T: Real> SimpleFunction<T> {
    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(SimpleFunction { dim, terms: vec![] })
    }

    /// Characteristic function of a box.
    pub fn indicator(region: Aabb) -> Self {
        SimpleFunction {
            dim: region.dim(),
            terms: vec![Term {
                value: T::one(),
                region,
            }],
        }
    }

    /// Builds the canonical form of `sum value * 1_region` over the given
    /// raw terms. Overlapping boxes are allowed; their values add where
    /// they overlap.
    pub fn from_terms(dim: usize, raw: Vec<(T, Aabb)>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        for (_, b) in &raw {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: b.dim(),
                });
            }
        }
        Ok(SimpleFunction {
            dim,
            terms: refine_sweep(dim, raw),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs_value(&self) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |m, t| m.max(t.value.abs()))
    }

    pub fn value_at(&self, p: &[Rat]) -> T {
        for t in &self.terms {
            if t.region.contains_point(p) {
                return t.value;
            }
        }
        T::zero()
    }

    pub fn scaled(&self, c: T) -> Self {
        if c.is_zero() {
            return SimpleFunction {
                dim: self.dim,
                terms: vec![],
            };
        }
        SimpleFunction {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    value: t.value * c,
                    region: t.region.clone(),
                })
                .collect(),
        }
    }

    /// Canonical form of `sum_i c_i f_i`.
    pub fn linear_combination(parts: &[(T, &SimpleFunction<T>)]) -> Result<Self> {
        let dim = parts
            .first()
            .map(|(_, f)| f.dim)
            .ok_or(Error::UnsupportedDimension(0))?;
        let mut raw = Vec::new();
        for (c, f) in parts {
            if f.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: f.dim,
                });
            }
            if c.is_zero() {
                continue;
            }
            for t in &f.terms {
                raw.push((*c * t.value, t.region.clone()));
            }
        }
        SimpleFunction::from_terms(dim, raw)
    }

    pub fn add(&self, other: &SimpleFunction<T>) -> Result<Self> {
        SimpleFunction::linear_combination(&[(T::one(), self), (T::one(), other)])
    }

    pub fn sub(&self, other: &SimpleFunction<T>) -> Result<Self> {
        SimpleFunction::linear_combination(&[(T::one(), self), (-T::one(), other)])
    }

    /// Pointwise product. Both inputs are canonical, so the pairwise box
    /// intersections are already disjoint and only need sorting.
    pub fn product(&self, other: &SimpleFunction<T>) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                if let Some(region) = a.region.intersect(&b.region) {
                    let value = a.value * b.value;
                    if !value.is_zero() {
                        terms.push(Term { value, region });
                    }
                }
            }
        }
        terms.sort_by(|a, b| a.region.lex_cmp(&b.region));
        Ok(SimpleFunction {
            dim: self.dim,
            terms,
        })
    }

    /// Exact-measure integral `int f`: each piece contributes value times
    /// rational volume, summed with compensation in term order.
    pub fn integral(&self) -> T {
        let mut acc = Accumulator::new();
        for t in &self.terms {
            acc.add(t.value * T::from_rat(&t.region.volume()));
        }
        acc.total()
    }

    /// `int f g` without materialising the product function.
    pub fn pairing(&self, other: &SimpleFunction<T>) -> Result<T> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut acc = Accumulator::new();
        for a in &self.terms {
            for b in &other.terms {
                if let Some(cap) = a.region.intersect(&b.region) {
                    acc.add(a.value * b.value * T::from_rat(&cap.volume()));
                }
            }
        }
        Ok(acc.total())
    }

    /// Dilation `x -> rho^(-d/beta) f(x / rho)`: supports scale by `rho`,
    /// values by `rho^(-d/beta)`. Isometric on `L^beta`. `rho = 1` is the
    /// identity for every `beta`, exactly. When `d/beta` is an integer the
    /// value factor is computed as an exact rational power, so dilating
    /// back and forth reproduces bitwise-identical values.
    pub fn dilate(&self, rho: &Rat, beta: &Exponent) -> Result<Self> {
        require_positive(rho)?;
        if rho == &rat_int(1) {
            return Ok(self.clone());
        }
        let e = -beta.reciprocal() * rat_int(self.dim as i64);
        let factor: T = if e.is_integer() {
            let k = e.to_integer();
            let k64 = i64::try_from(k).expect("dilation exponent fits in i64");
            T::from_rat(&crate::rational::rat_pow_i(rho, k64))
        } else {
            T::from_rat(rho).powf(T::from_rat(&e))
        };
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(Term {
                    value: t.value * factor,
                    region: t.region.scaled(rho)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SimpleFunction {
            dim: self.dim,
            terms,
        })
    }

    /// Smallest box containing the support. Errors on the zero function.
    pub fn support_extent(&self) -> Result<Aabb> {
        let mut it = self.terms.iter();
        let first = it.next().ok_or(Error::EmptySupport)?;
        let mut hull = first.region.clone();
        for t in it {
            hull = hull.hull(&t.region)?;
        }
        Ok(hull)
    }

    /// Restriction `f 1_window`.
    pub fn restrict(&self, window: &Aabb) -> Result<Self> {
        if window.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: window.dim(),
            });
        }
        let mut terms: Vec<Term<T>> = self
            .terms
            .iter()
            .filter_map(|t| {
                t.region.intersect(window).map(|region| Term {
                    value: t.value,
                    region,
                })
            })
            .collect();
        terms.sort_by(|a, b| a.region.lex_cmp(&b.region));
        Ok(SimpleFunction {
            dim: self.dim,
            terms,
        })
    }

    /// Supremum norm of `f - g`, exact refinement underneath.
    pub fn sup_abs_diff(&self, other: &SimpleFunction<T>) -> Result<T> {
        Ok(self.sub(other)?.max_abs_value())
    }
}

/// The refinement sweep behind [`SimpleFunction::from_terms`].
fn refine_sweep<T: Real>(dim: usize, raw: Vec<(T, Aabb)>) -> Vec<Term<T>> {
    let live: Vec<&(T, Aabb)> = raw.iter().filter(|(v, _)| !v.is_zero()).collect();
    if live.is_empty() {
        return vec![];
    }

    // Per-axis sorted corner coordinates; consecutive pairs bound the
    // elementary cells of the product grid.
    let mut cuts: Vec<Vec<Rat>> = vec![Vec::new(); dim];
    for (_, b) in &live {
        for j in 0..dim {
            cuts[j].push(b.lo()[j].clone());
            cuts[j].push(b.hi()[j].clone());
        }
    }
    for axis in &mut cuts {
        axis.sort();
        axis.dedup();
    }

    let counts: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
    let mut strides = vec![1usize; dim];
    for j in 1..dim {
        strides[j] = strides[j - 1] * counts[j - 1];
    }

    // Box corners are members of the cut sets, so the exact binary search
    // always hits.
    let idx_of = |axis: usize, x: &Rat| -> usize {
        cuts[axis].binary_search(x).expect("corner is a cut point")
    };

    let mut cells: HashMap<usize, T> = HashMap::new();
    for (v, b) in &live {
        let ranges: Vec<(usize, usize)> = (0..dim)
            .map(|j| (idx_of(j, &b.lo()[j]), idx_of(j, &b.hi()[j])))
            .collect();
        let mut cursor: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        loop {
            let lin: usize = cursor
                .iter()
                .zip(&strides)
                .map(|(c, s)| c * s)
                .sum();
            *cells.entry(lin).or_insert_with(T::zero) += *v;
            // odometer advance over the covered cell ranges
            let mut j = 0;
            loop {
                cursor[j] += 1;
                if cursor[j] < ranges[j].1 {
                    break;
                }
                cursor[j] = ranges[j].0;
                j += 1;
                if j == dim {
                    break;
                }
            }
            if j == dim {
                break;
            }
        }
    }

    let mut keys: Vec<usize> = cells
        .iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(k, _)| *k)
        .collect();
    keys.sort_unstable();

    keys.into_iter()
        .map(|lin| {
            let mut rem = lin;
            let mut lo = Vec::with_capacity(dim);
            let mut hi = Vec::with_capacity(dim);
            for j in 0..dim {
                let c = rem / strides[dim - 1 - j];
                rem %= strides[dim - 1 - j];
                let axis = dim - 1 - j;
                lo.push((axis, cuts[axis][c].clone()));
                hi.push((axis, cuts[axis][c + 1].clone()));
            }
            lo.sort_by_key(|(a, _)| *a);
            hi.sort_by_key(|(a, _)| *a);
            let region = Aabb::new(
                lo.into_iter().map(|(_, x)| x).collect(),
                hi.into_iter().map(|(_, x)| x).collect(),
            )
            .expect("elementary cell is nondegenerate");
            Term {
                value: cells[&lin],
                region,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn interval(lo: i64, hi: i64) -> Aabb {
        Aabb::interval(rat_int(lo), rat_int(hi)).unwrap()
    }

    #[test]
    fn overlapping_boxes_refine_and_accumulate() {
        let f: SimpleFunction<f64> = SimpleFunction::from_terms(
            1,
            vec![(1.0, interval(0, 2)), (1.0, interval(1, 3))],
        )
        .unwrap();
        let got: Vec<(f64, Rat, Rat)> = f
            .terms()
            .iter()
            .map(|t| (t.value, t.region.lo()[0].clone(), t.region.hi()[0].clone()))
            .collect();
        assert_eq!(
            got,
            vec![
                (1.0, rat_int(0), rat_int(1)),
                (2.0, rat_int(1), rat_int(2)),
                (1.0, rat_int(2), rat_int(3)),
            ]
        );
    }

    #[test]
    fn cancelling_overlap_drops_cells() {
        let f: SimpleFunction<f64> = SimpleFunction::from_terms(
            1,
            vec![(1.0, interval(0, 2)), (-1.0, interval(1, 2))],
        )
        .unwrap();
        assert_eq!(f.terms().len(), 1);
        assert_eq!(f.terms()[0].region.hi()[0], rat_int(1));
        let z: SimpleFunction<f64> =
            SimpleFunction::from_terms(1, vec![(0.0, interval(0, 5))]).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn refinement_preserves_integral() {
        let raw = vec![
            (2.0, interval(0, 2)),
            (-0.5, interval(1, 4)),
            (1.0, interval(3, 5)),
        ];
        let direct: f64 = raw
            .iter()
            .map(|(v, b)| v * f64::from_rat(&b.volume()))
            .sum();
        let f: SimpleFunction<f64> = SimpleFunction::from_terms(1, raw).unwrap();
        assert!((f.integral() - direct).abs() < 1e-14);
    }

    #[test]
    fn two_dimensional_refinement_keeps_geometry_exact() {
        let a = Aabb::new(vec![rat_int(0), rat_int(0)], vec![rat_int(2), rat_int(2)]).unwrap();
        let b = Aabb::new(vec![rat_int(1), rat_int(1)], vec![rat_int(3), rat_int(3)]).unwrap();
        let f: SimpleFunction<f64> =
            SimpleFunction::from_terms(2, vec![(1.0, a), (1.0, b)]).unwrap();
        assert_eq!(f.integral(), 8.0);
        assert_eq!(f.value_at(&[rat(3, 2), rat(3, 2)]), 2.0);
        assert_eq!(f.value_at(&[rat(1, 2), rat(5, 2)]), 0.0);
        // terms tile the union: volumes add to 7 exactly
        let vol: Rat = f
            .terms()
            .iter()
            .map(|t| t.region.volume())
            .fold(rat_int(0), |s, v| s + v);
        assert_eq!(vol, rat_int(7));
    }

    #[test]
    fn product_and_pairing_agree_and_commute() {
        let f: SimpleFunction<f64> = SimpleFunction::from_terms(
            1,
            vec![(2.0, interval(0, 2)), (3.0, interval(2, 4))],
        )
        .unwrap();
        let g: SimpleFunction<f64> =
            SimpleFunction::from_terms(1, vec![(0.5, interval(1, 3))]).unwrap();
        let fg = f.product(&g).unwrap();
        assert_eq!(fg.integral(), 2.5);
        assert!((f.pairing(&g).unwrap() - 2.5).abs() < 1e-15);
        assert!((f.pairing(&g).unwrap() - g.pairing(&f).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn dilation_identity_group_law_and_mass() {
        let f: SimpleFunction<f64> = SimpleFunction::from_terms(
            1,
            vec![(1.0, interval(0, 1)), (-2.0, interval(1, 3))],
        )
        .unwrap();
        let beta = Exponent::from_int(2).unwrap();

        let same = f.dilate(&rat_int(1), &beta).unwrap();
        assert_eq!(same.sup_abs_diff(&f).unwrap(), 0.0);

        let twice = f
            .dilate(&rat(1, 2), &beta)
            .unwrap()
            .dilate(&rat_int(6), &beta)
            .unwrap();
        let once = f.dilate(&rat_int(3), &beta).unwrap();
        assert!(twice.sup_abs_diff(&once).unwrap() < 1e-15);

        // mass-preserving normalisation at beta = 1
        let m1 = f.dilate(&rat(7, 3), &Exponent::one()).unwrap();
        assert!((m1.integral() - f.integral()).abs() < 1e-14);

        assert!(f.dilate(&rat_int(0), &beta).is_err());
        assert!(f.dilate(&rat(-1, 2), &beta).is_err());
    }

    #[test]
    fn support_extent_and_restrict() {
        let f: SimpleFunction<f64> = SimpleFunction::from_terms(
            1,
            vec![(1.0, interval(-2, -1)), (4.0, interval(3, 5))],
        )
        .unwrap();
        let ext = f.support_extent().unwrap();
        assert_eq!(ext.lo()[0], rat_int(-2));
        assert_eq!(ext.hi()[0], rat_int(5));

        let clipped = f.restrict(&interval(4, 10)).unwrap();
        assert_eq!(clipped.integral(), 4.0);

        let z: SimpleFunction<f64> = SimpleFunction::zero(1).unwrap();
        assert!(matches!(z.support_extent(), Err(Error::EmptySupport)));
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let f1: SimpleFunction<f64> = SimpleFunction::indicator(interval(0, 1));
        let f2: SimpleFunction<f64> =
            SimpleFunction::indicator(Aabb::unit_cube(2).unwrap());
        assert!(f1.product(&f2).is_err());
        assert!(f1.pairing(&f2).is_err());
        assert!(f1.add(&f2).is_err());
        assert!(SimpleFunction::<f64>::zero(0).is_err());
        assert!(SimpleFunction::<f64>::zero(4).is_err());
    }
}
