//! Axis-aligned boxes with exact rational corners.
//!
//! Every box is half-open, `[lo_1, hi_1) x ... x [lo_d, hi_d)`, so boxes
//! that share a face are disjoint as point sets and measures add up with
//! no boundary double counting. Corners are `BigRational`: intersection,
//! scaling and lattice clipping never round.

use crate::error::{Error, Result};
use crate::rational::{rat_int, require_positive, Rat};
use num_traits::Signed;
use std::cmp::Ordering;
use std::fmt;

pub const MAX_DIM: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Aabb {
    lo: Vec<Rat>,
    hi: Vec<Rat>,
}

impl Aabb {
    /// Invariants checked here and relied on everywhere else:
    /// `1 <= dim <= 3` and `lo[j] < hi[j]` on every axis.
    pub fn new(lo: Vec<Rat>, hi: Vec<Rat>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() || lo.len() > MAX_DIM {
            return Err(Error::UnsupportedDimension(lo.len()));
        }
        for (axis, (a, b)) in lo.iter().zip(hi.iter()).enumerate() {
            if a >= b {
                return Err(Error::DegenerateBox {
                    axis,
                    lo: a.clone(),
                    hi: b.clone(),
                });
            }
        }
        Ok(Aabb { lo, hi })
    }

    pub fn interval(lo: Rat, hi: Rat) -> Result<Self> {
        Aabb::new(vec![lo], vec![hi])
    }

    pub fn unit_cube(dim: usize) -> Result<Self> {
        Aabb::new(vec![rat_int(0); dim], vec![rat_int(1); dim])
    }

    /// Lattice cell `I_k = prod_j [k_j rho, (k_j + 1) rho)`.
    pub fn lattice_cell(k: &[i64], rho: &Rat) -> Result<Self> {
        require_positive(rho)?;
        let lo = k.iter().map(|&kj| rat_int(kj) * rho).collect();
        let hi = k.iter().map(|&kj| rat_int(kj + 1) * rho).collect();
        Aabb::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[Rat] {
        &self.lo
    }

    pub fn hi(&self) -> &[Rat] {
        &self.hi
    }

    pub fn edge(&self, axis: usize) -> Rat {
        &self.hi[axis] - &self.lo[axis]
    }

    pub fn edges(&self) -> Vec<Rat> {
        (0..self.dim()).map(|j| self.edge(j)).collect()
    }

    pub fn volume(&self) -> Rat {
        let mut v = rat_int(1);
        for j in 0..self.dim() {
            v *= self.edge(j);
        }
        v
    }

    pub fn contains_point(&self, p: &[Rat]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lo.iter().zip(self.hi.iter()))
                .all(|(x, (a, b))| a <= x && x < b)
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        other.dim() == self.dim()
            && (0..self.dim())
                .all(|j| self.lo[j] <= other.lo[j] && other.hi[j] <= self.hi[j])
    }

    /// `None` when the interiors miss each other; touching faces count as
    /// empty because the boxes are half-open.
    pub fn intersect(&self, other: &Aabb) -> Option<Aabb> {
        if other.dim() != self.dim() {
            return None;
        }
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let a = self.lo[j].clone().max(other.lo[j].clone());
            let b = self.hi[j].clone().min(other.hi[j].clone());
            if a >= b {
                return None;
            }
            lo.push(a);
            hi.push(b);
        }
        Some(Aabb { lo, hi })
    }

    pub fn hull(&self, other: &Aabb) -> Result<Aabb> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let lo = (0..self.dim())
            .map(|j| self.lo[j].clone().min(other.lo[j].clone()))
            .collect();
        let hi = (0..self.dim())
            .map(|j| self.hi[j].clone().max(other.hi[j].clone()))
            .collect();
        Aabb::new(lo, hi)
    }

    /// Image under `x -> rho x`, `rho > 0`.
    pub fn scaled(&self, rho: &Rat) -> Result<Aabb> {
        require_positive(rho)?;
        Ok(Aabb {
            lo: self.lo.iter().map(|a| a * rho).collect(),
            hi: self.hi.iter().map(|b| b * rho).collect(),
        })
    }

    /// Image under `x -> x + shift`.
    pub fn translated(&self, shift: &[Rat]) -> Result<Aabb> {
        if shift.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: shift.len(),
            });
        }
        Ok(Aabb {
            lo: self.lo.iter().zip(shift).map(|(a, s)| a + s).collect(),
            hi: self.hi.iter().zip(shift).map(|(b, s)| b + s).collect(),
        })
    }

    /// Largest absolute corner coordinate: the support of the box lies in
    /// the cube `[-m, m]^d` for the returned `m`.
    pub fn max_abs_coord(&self) -> Rat {
        let mut m = rat_int(0);
        for j in 0..self.dim() {
            m = m.max(self.lo[j].abs()).max(self.hi[j].abs());
        }
        m
    }

    pub fn in_positive_orthant(&self) -> bool {
        self.lo.iter().all(|a| !a.is_negative())
    }

    /// Lexicographic corner order, a stable total order used to keep
    /// canonical term lists deterministic.
    pub fn lex_cmp(&self, other: &Aabb) -> Ordering {
        self.lo
            .iter()
            .cmp(other.lo.iter())
            .then_with(|| self.hi.iter().cmp(other.hi.iter()))
    }
}

impl fmt::Display for Aabb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.dim() {
            if j > 0 {
                write!(f, " x ")?;
            }
            write!(f, "[{}, {})", self.lo[j], self.hi[j])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn rejects_degenerate_and_oversized_boxes() {
        assert!(matches!(
            Aabb::interval(rat_int(1), rat_int(1)),
            Err(Error::DegenerateBox { .. })
        ));
        assert!(matches!(
            Aabb::interval(rat_int(2), rat_int(1)),
            Err(Error::DegenerateBox { .. })
        ));
        assert!(matches!(
            Aabb::new(vec![rat_int(0); 4], vec![rat_int(1); 4]),
            Err(Error::UnsupportedDimension(4))
        ));
        assert!(Aabb::new(vec![], vec![]).is_err());
    }

    #[test]
    fn half_open_boxes_sharing_a_face_do_not_intersect() {
        let a = Aabb::interval(rat_int(0), rat_int(1)).unwrap();
        let b = Aabb::interval(rat_int(1), rat_int(2)).unwrap();
        assert!(a.intersect(&b).is_none());
        assert!(a.contains_point(&[rat_int(0)]));
        assert!(!a.contains_point(&[rat_int(1)]));
    }

    #[test]
    fn intersection_and_volume_are_exact() {
        let a = Aabb::new(vec![rat_int(0), rat_int(0)], vec![rat(3, 2), rat_int(1)]).unwrap();
        let b = Aabb::new(vec![rat(1, 2), rat(1, 3)], vec![rat_int(2), rat_int(2)]).unwrap();
        let c = a.intersect(&b).unwrap();
        assert_eq!(c.lo(), &[rat(1, 2), rat(1, 3)]);
        assert_eq!(c.hi(), &[rat(3, 2), rat_int(1)]);
        assert_eq!(c.volume(), rat(2, 3));
    }

    #[test]
    fn lattice_cell_scaling_and_extent_helpers() {
        let cell = Aabb::lattice_cell(&[-1, 2], &rat(1, 2)).unwrap();
        assert_eq!(cell.lo(), &[rat(-1, 2), rat_int(1)]);
        assert_eq!(cell.hi(), &[rat_int(0), rat(3, 2)]);
        assert_eq!(cell.max_abs_coord(), rat(3, 2));
        assert!(!cell.in_positive_orthant());

        let doubled = cell.scaled(&rat_int(2)).unwrap();
        assert_eq!(doubled.volume(), rat_int(1));
        assert!(Aabb::lattice_cell(&[0], &rat_int(0)).is_err());
    }
}
