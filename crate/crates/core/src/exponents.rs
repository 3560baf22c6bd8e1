//! Lebesgue exponents as exact rationals in `[1, inf]`.
//!
//! Keeping `q`, `p`, `alpha` rational means conjugates (`q' = q/(q-1)`)
//! and the scaling exponent `d(1/alpha - 1/q)` are exact; in particular
//! the scaling exponent is *exactly* zero in the degenerate case
//! `alpha = q`, which several norm identities rely on.

use crate::error::{Error, Result};
use crate::rational::{parse_rat, rat_int, Rat};
use crate::real::Real;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Rat),
    Infinite,
}

impl Exponent {
    pub fn finite(r: Rat) -> Result<Self> {
        if r < rat_int(1) {
            return Err(Error::InvalidExponent(format!(
                "exponents live in [1, inf], got {r}"
            )));
        }
        Ok(Exponent::Finite(r))
    }

    pub fn one() -> Self {
        Exponent::Finite(rat_int(1))
    }

    pub fn from_int(n: i64) -> Result<Self> {
        Exponent::finite(rat_int(n))
    }

    /// Accepts "inf", "infinity", a fraction "a/b", an integer or a
    /// decimal literal.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Exponent::Infinite);
        }
        Exponent::finite(parse_rat(t)?)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Exponent::Finite(r) if r.is_one())
    }

    /// `1/q` as an exact rational, zero for `q = inf`.
    pub fn reciprocal(&self) -> Rat {
        match self {
            Exponent::Finite(r) => r.recip(),
            Exponent::Infinite => Rat::zero(),
        }
    }

    /// Conjugate exponent: `1/q + 1/q' = 1`, with `1' = inf` and `inf' = 1`.
    pub fn conjugate(&self) -> Exponent {
        match self {
            Exponent::Infinite => Exponent::one(),
            Exponent::Finite(r) if r.is_one() => Exponent::Infinite,
            Exponent::Finite(r) => Exponent::Finite(r / (r - rat_int(1))),
        }
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Exponent::Finite(r) => Some(r),
            Exponent::Infinite => None,
        }
    }

    pub fn as_real<T: Real>(&self) -> T {
        match self {
            Exponent::Finite(r) => T::from_rat(r),
            Exponent::Infinite => T::infinity(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.as_real()
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Exponent::Infinite, Exponent::Infinite) => Ordering::Equal,
            (Exponent::Infinite, _) => Ordering::Greater,
            (_, Exponent::Infinite) => Ordering::Less,
            (Exponent::Finite(a), Exponent::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(r) => write!(f, "{r}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

/// The triple `(q, p, alpha)` that parametrises the amalgam and Fofana
/// norms. Construction does not force an ordering; call
/// [`Exponents::require_ordered`] where `q <= alpha <= p` is a
/// precondition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exponents {
    q: Exponent,
    p: Exponent,
    alpha: Exponent,
}

impl Exponents {
    pub fn new(q: Exponent, p: Exponent, alpha: Exponent) -> Self {
        Exponents { q, p, alpha }
    }

    pub fn from_ints(q: i64, p: i64, alpha: i64) -> Result<Self> {
        Ok(Exponents::new(
            Exponent::from_int(q)?,
            Exponent::from_int(p)?,
            Exponent::from_int(alpha)?,
        ))
    }

    pub fn q(&self) -> &Exponent {
        &self.q
    }

    pub fn p(&self) -> &Exponent {
        &self.p
    }

    pub fn alpha(&self) -> &Exponent {
        &self.alpha
    }

    pub fn q_conj(&self) -> Exponent {
        self.q.conjugate()
    }

    pub fn p_conj(&self) -> Exponent {
        self.p.conjugate()
    }

    pub fn alpha_conj(&self) -> Exponent {
        self.alpha.conjugate()
    }

    /// Conjugate triple `(q', p', alpha')`.
    pub fn dual(&self) -> Exponents {
        Exponents::new(self.q_conj(), self.p_conj(), self.alpha_conj())
    }

    pub fn is_ordered(&self) -> bool {
        self.q <= self.alpha && self.alpha <= self.p
    }

    pub fn require_ordered(&self) -> Result<()> {
        if self.is_ordered() {
            Ok(())
        } else {
            Err(Error::ExponentOrder {
                q: self.q.to_string(),
                alpha: self.alpha.to_string(),
                p: self.p.to_string(),
            })
        }
    }

    /// `d (1/alpha - 1/q)`, exact. Nonpositive whenever `q <= alpha`.
    pub fn scaling_exponent(&self, dim: usize) -> Rat {
        (self.alpha.reciprocal() - self.q.reciprocal()) * rat_int(dim as i64)
    }
}

impl fmt::Display for Exponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q={}, p={}, alpha={})", self.q, self.p, self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn conjugates_cover_the_endpoints_and_involute() {
        assert_eq!(Exponent::one().conjugate(), Exponent::Infinite);
        assert_eq!(Exponent::Infinite.conjugate(), Exponent::one());
        assert_eq!(
            Exponent::from_int(4).unwrap().conjugate(),
            Exponent::Finite(rat(4, 3))
        );
        for e in [
            Exponent::one(),
            Exponent::Infinite,
            Exponent::Finite(rat(7, 3)),
        ] {
            assert_eq!(e.conjugate().conjugate(), e);
        }
    }

    #[test]
    fn parse_accepts_inf_fractions_and_decimals() {
        assert_eq!(Exponent::parse("inf").unwrap(), Exponent::Infinite);
        assert_eq!(
            Exponent::parse("3/2").unwrap(),
            Exponent::Finite(rat(3, 2))
        );
        assert_eq!(
            Exponent::parse("2.5").unwrap(),
            Exponent::Finite(rat(5, 2))
        );
        assert!(Exponent::parse("1/2").is_err());
        assert!(Exponent::parse("0.5").is_err());
    }

    #[test]
    fn ordering_treats_inf_as_top() {
        assert!(Exponent::Infinite > Exponent::from_int(1000).unwrap());
        let e = Exponents::new(
            Exponent::from_int(2).unwrap(),
            Exponent::Infinite,
            Exponent::from_int(3).unwrap(),
        );
        assert!(e.is_ordered());
        let bad = Exponents::from_ints(3, 4, 2).unwrap();
        assert!(matches!(
            bad.require_ordered(),
            Err(Error::ExponentOrder { .. })
        ));
    }

    #[test]
    fn scaling_exponent_is_exact_and_vanishes_at_alpha_eq_q() {
        let e = Exponents::from_ints(2, 4, 3).unwrap();
        assert_eq!(e.scaling_exponent(1), rat(-1, 6));
        assert_eq!(e.scaling_exponent(2), rat(-1, 3));
        let deg = Exponents::from_ints(2, 4, 2).unwrap();
        assert!(deg.scaling_exponent(3).is_zero());
    }

    #[test]
    fn dual_triple_conjugates_componentwise() {
        let e = Exponents::from_ints(2, 4, 3).unwrap();
        let d = e.dual();
        assert_eq!(d.q(), &Exponent::from_int(2).unwrap());
        assert_eq!(d.p(), &Exponent::Finite(rat(4, 3)));
        assert_eq!(d.alpha(), &Exponent::Finite(rat(3, 2)));
    }
}
