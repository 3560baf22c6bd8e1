//! Norm evaluators over canonical piecewise-constant functions.
//!
//! The amalgam norm at scale `rho` groups mass over the origin-anchored
//! lattice of half-open cubes `prod_j [k_j rho, (k_j + 1) rho)`, takes the
//! local `L^q` norm on each cube, then the `l^p` norm of those numbers
//! over `k`. Lattice clipping is exact: each piece meets a contiguous
//! block of cubes per axis, with full overlap `rho` everywhere except the
//! two boundary cubes, so the split costs O(1) rational arithmetic per
//! axis and the cube accumulation runs in pure floating point.

use crate::error::{Error, Result};
use crate::exponents::Exponent;
use crate::geometry::Aabb;
use crate::rational::{rat_ceil, rat_floor_i64, rat_from_f64, rat_int, require_positive, Rat};
use crate::real::{roundoff_tol, Accumulator, Real};
use crate::simple::SimpleFunction;
use num_traits::{One, Signed, ToPrimitive};

/// Hard cap on materialised lattice cells per norm evaluation.
const MAX_CELLS: usize = 1 << 26;

/// Cap on candidate windows enumerated by the Morrey search before
/// deterministic thinning kicks in.
const MAX_WINDOWS: usize = 20_000;

/// Location at which a supremum-type norm was (approximately) attained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Lattice scale, for suprema over `rho`.
    Scale(Rat),
    /// Cube window `prod_j [c_j - r, c_j + r)`, for suprema over balls.
    Window { center: Vec<Rat>, radius: Rat },
}

/// Result of a supremum search. `value` is a certified lower bound for
/// the supremum: it equals an evaluation of the underlying functional at
/// `witness`. `exact` marks the cases where a structural argument pins
/// the supremum itself, not just a lower bound.
#[derive(Clone, Debug)]
pub struct NormEstimate<T> {
    pub value: T,
    pub witness: Witness,
    pub evaluated: usize,
    pub exact: bool,
}

pub fn lebesgue_norm<T: Real>(f: &SimpleFunction<T>, q: &Exponent) -> T {
    match q {
        Exponent::Infinite => f.max_abs_value(),
        Exponent::Finite(r) if r.is_one() => {
            let mut acc = Accumulator::new();
            for t in f.terms() {
                acc.add(t.value.abs() * T::from_rat(&t.region.volume()));
            }
            acc.total()
        }
        Exponent::Finite(r) => {
            let qt = T::from_rat(r);
            let mut acc = Accumulator::new();
            for t in f.terms() {
                acc.add(t.value.abs().powf(qt) * T::from_rat(&t.region.volume()));
            }
            acc.total().powf(T::from_rat(&r.recip()))
        }
    }
}

/// Weak Lebesgue quasi-norm `sup_t t |{x : |f(x)| > t}|^{1/alpha}`. For a
/// simple function the supremum is attained at one of the finitely many
/// level values, with the superlevel measure computed exactly.
pub fn weak_norm<T: Real>(f: &SimpleFunction<T>, alpha: &Exponent) -> Result<T> {
    let a = alpha
        .as_rat()
        .ok_or_else(|| Error::InvalidExponent("weak norm requires finite alpha".into()))?;
    if f.is_zero() {
        return Ok(T::zero());
    }
    let inv_a = T::from_rat(&a.recip());
    let mut pieces: Vec<(T, Rat)> = f
        .terms()
        .iter()
        .map(|t| (t.value.abs(), t.region.volume()))
        .collect();
    pieces.sort_by(|x, y| y.0.partial_cmp(&x.0).expect("finite values"));
    let mut cum = rat_int(0);
    let mut best = T::zero();
    for (v, vol) in pieces {
        cum += vol;
        best = best.max(v * T::from_rat(&cum).powf(inv_a));
    }
    Ok(best)
}

/// Cube cover of one axis interval `[lo, hi)` by the lattice of step
/// `rho`: cube indices with the overlap length of each, already rounded
/// to the floating scalar. Only the two boundary cubes can have partial
/// overlap, so rational work is constant.
fn axis_cover<T: Real>(lo: &Rat, hi: &Rat, rho: &Rat, full: T) -> Vec<(i64, T)> {
    let k0 = rat_floor_i64(&(lo / rho));
    let k1 = rat_ceil(&(hi / rho))
        .to_integer()
        .to_i64()
        .expect("lattice index fits in i64")
        - 1;
    if k0 == k1 {
        return vec![(k0, T::from_rat(&(hi - lo)))];
    }
    let first = T::from_rat(&(rat_int(k0 + 1) * rho - lo));
    let last = T::from_rat(&(hi - rat_int(k1) * rho));
    let mut out = Vec::with_capacity((k1 - k0 + 1) as usize);
    out.push((k0, first));
    for k in k0 + 1..k1 {
        out.push((k, full));
    }
    out.push((k1, last));
    out
}

/// Dense per-cube accumulator over the lattice cells meeting the support
/// of `f`. `fold` receives the slot and the piece contribution
/// `(value, piece_volume)` and updates the slot in place.
struct CubeGrid<T> {
    k_lo: Vec<i64>,
    counts: Vec<usize>,
    cells: Vec<T>,
}

impl<T: Real> CubeGrid<T> {
    fn build(
        f: &SimpleFunction<T>,
        rho: &Rat,
        init: T,
        fold: impl Fn(&mut T, T, T),
    ) -> Result<Self> {
        require_positive(rho)?;
        let d = f.dim();
        let extent = f.support_extent()?;
        let mut k_lo = Vec::with_capacity(d);
        let mut counts = Vec::with_capacity(d);
        for j in 0..d {
            let a = rat_floor_i64(&(&extent.lo()[j] / rho));
            let b = rat_ceil(&(&extent.hi()[j] / rho))
                .to_integer()
                .to_i64()
                .expect("lattice index fits in i64")
                - 1;
            k_lo.push(a);
            counts.push((b - a + 1) as usize);
        }
        let total: usize = counts.iter().product();
        if total > MAX_CELLS {
            return Err(Error::LatticeScale(total));
        }
        let mut cells = vec![init; total];
        let full = T::from_rat(rho);
        let mut strides = vec![1usize; d];
        for j in 1..d {
            strides[j] = strides[j - 1] * counts[j - 1];
        }
        for t in f.terms() {
            let covers: Vec<Vec<(i64, T)>> = (0..d)
                .map(|j| axis_cover(&t.region.lo()[j], &t.region.hi()[j], rho, full))
                .collect();
            let mut cursor = vec![0usize; d];
            loop {
                let mut lin = 0usize;
                let mut vol = T::one();
                for j in 0..d {
                    let (k, len) = &covers[j][cursor[j]];
                    lin += ((k - k_lo[j]) as usize) * strides[j];
                    vol = vol * *len;
                }
                fold(&mut cells[lin], t.value, vol);
                let mut j = 0;
                loop {
                    cursor[j] += 1;
                    if cursor[j] < covers[j].len() {
                        break;
                    }
                    cursor[j] = 0;
                    j += 1;
                    if j == d {
                        break;
                    }
                }
                if j == d {
                    break;
                }
            }
        }
        Ok(CubeGrid { k_lo, counts, cells })
    }

    fn index_of(&self, lin: usize) -> Vec<i64> {
        let mut rem = lin;
        let mut idx = Vec::with_capacity(self.counts.len());
        for (j, c) in self.counts.iter().enumerate() {
            idx.push(self.k_lo[j] + (rem % c) as i64);
            rem /= c;
        }
        idx
    }
}

/// Amalgam norm: `l^p` over lattice cubes of side `rho` of the per-cube
/// `L^q` norms.
pub fn amalgam_norm<T: Real>(
    f: &SimpleFunction<T>,
    q: &Exponent,
    p: &Exponent,
    rho: &Rat,
) -> Result<T> {
    require_positive(rho)?;
    if f.is_zero() {
        return Ok(T::zero());
    }
    match q {
        Exponent::Finite(qr) => {
            let qt = T::from_rat(qr);
            let q_is_one = qr.is_one();
            // slot = integral of |f|^q over the cube
            let grid = CubeGrid::build(f, rho, T::zero(), |slot, v, vol| {
                let w = if q_is_one { v.abs() } else { v.abs().powf(qt) };
                *slot += w * vol;
            })?;
            match p {
                Exponent::Infinite => {
                    let inv_q = T::from_rat(&qr.recip());
                    let mut best = T::zero();
                    for &c in &grid.cells {
                        if c > T::zero() {
                            best = best.max(pow_or_id(c, inv_q));
                        }
                    }
                    Ok(best)
                }
                Exponent::Finite(pr) => {
                    // one power per cube: (int |f|^q)^(p/q), then ^(1/p)
                    let r = T::from_rat(&(pr / qr));
                    let mut acc = Accumulator::new();
                    for &c in &grid.cells {
                        if c > T::zero() {
                            acc.add(pow_or_id(c, r));
                        }
                    }
                    Ok(pow_or_id(acc.total(), T::from_rat(&pr.recip())))
                }
            }
        }
        Exponent::Infinite => {
            // slot = essential sup of |f| on the cube
            let grid = CubeGrid::build(f, rho, T::zero(), |slot, v, _vol| {
                *slot = slot.max(v.abs());
            })?;
            match p {
                Exponent::Infinite => Ok(grid
                    .cells
                    .iter()
                    .fold(T::zero(), |m, &c| m.max(c))),
                Exponent::Finite(pr) => {
                    let pt = T::from_rat(pr);
                    let mut acc = Accumulator::new();
                    for &c in &grid.cells {
                        if c > T::zero() {
                            acc.add(pow_or_id(c, pt));
                        }
                    }
                    Ok(pow_or_id(acc.total(), T::from_rat(&pr.recip())))
                }
            }
        }
    }
}

/// `x^r`, skipping the call when `r = 1` so degenerate exponent choices
/// collapse to the plain Lebesgue sum bit for bit.
fn pow_or_id<T: Real>(x: T, r: T) -> T {
    if r == T::one() {
        x
    } else {
        x.powf(r)
    }
}

/// Integral of `f` over each lattice cube of side `rho`; cubes with zero
/// accumulated integral are kept only if touched. Sorted by cube index.
pub fn lattice_cell_integrals<T: Real>(
    f: &SimpleFunction<T>,
    rho: &Rat,
) -> Result<Vec<(Vec<i64>, T)>> {
    if f.is_zero() {
        return Ok(vec![]);
    }
    let grid = CubeGrid::build(f, rho, T::zero(), |slot, v, vol| {
        *slot += v * vol;
    })?;
    Ok(grid
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(lin, c)| (grid.index_of(lin), *c))
        .collect())
}

/// Two sides of the amalgam Hoelder inequality at scale `rho`:
/// `lhs = ||f g||_1`, `rhs = ||f||_{q,p;rho} ||g||_{q',p';rho}`.
#[derive(Clone, Debug)]
pub struct HolderCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub ok: bool,
}

pub fn holder_check<T: Real>(
    f: &SimpleFunction<T>,
    g: &SimpleFunction<T>,
    q: &Exponent,
    p: &Exponent,
    rho: &Rat,
) -> Result<HolderCheck<T>> {
    let lhs = lebesgue_norm(&f.product(g)?, &Exponent::one());
    let rhs = amalgam_norm(f, q, p, rho)? * amalgam_norm(g, &q.conjugate(), &p.conjugate(), rho)?;
    let tol = roundoff_tol::<T>();
    let ok = lhs <= rhs + tol * (T::one() + rhs);
    Ok(HolderCheck { lhs, rhs, ok })
}

/// Morrey norm `sup over windows of r^((lambda - d)/q) ||f||_{L^q(W)}`
/// where `W` runs over cube windows `prod_j [c_j - r, c_j + r)`
/// (intervals when `d = 1`). Candidate windows come from support corner
/// pairs; a cyclic golden-section pass then polishes the best one.
pub fn morrey_norm<T: Real>(
    f: &SimpleFunction<T>,
    q: &Exponent,
    lambda: &Rat,
    refine_iters: u32,
) -> Result<NormEstimate<T>> {
    let qr = q
        .as_rat()
        .ok_or_else(|| Error::InvalidExponent("Morrey norm requires finite q".into()))?;
    let d = f.dim();
    if !lambda.is_positive() || lambda >= &rat_int(d as i64) {
        return Err(Error::LambdaRange(lambda.clone()));
    }
    if f.is_zero() {
        return Ok(NormEstimate {
            value: T::zero(),
            witness: Witness::Window {
                center: vec![rat_int(0); d],
                radius: rat_int(1),
            },
            evaluated: 0,
            exact: true,
        });
    }
    let weight_exp = (lambda - rat_int(d as i64)) / qr;
    let weight_exp_t = T::from_rat(&weight_exp);

    let eval = |center: &[Rat], radius: &Rat| -> Result<T> {
        let lo = center.iter().map(|c| c - radius).collect();
        let hi = center.iter().map(|c| c + radius).collect();
        let window = Aabb::new(lo, hi)?;
        let local = lebesgue_norm(&f.restrict(&window)?, q);
        Ok(T::from_rat(radius).powf(weight_exp_t) * local)
    };

    // per-axis sorted corner sets
    let mut corners: Vec<Vec<Rat>> = vec![Vec::new(); d];
    for t in f.terms() {
        for j in 0..d {
            corners[j].push(t.region.lo()[j].clone());
            corners[j].push(t.region.hi()[j].clone());
        }
    }
    for c in &mut corners {
        c.sort();
        c.dedup();
    }

    let mut candidates: Vec<(Vec<Rat>, Rat)> = Vec::new();
    if d == 1 {
        let e = &corners[0];
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                let center = vec![(&e[i] + &e[j]) / rat_int(2)];
                let radius = (&e[j] - &e[i]) / rat_int(2);
                candidates.push((center, radius));
            }
        }
    } else {
        let mut radii: Vec<Rat> = Vec::new();
        for e in &corners {
            for i in 0..e.len() {
                for j in i + 1..e.len() {
                    radii.push((&e[j] - &e[i]) / rat_int(2));
                }
            }
        }
        radii.sort();
        radii.dedup();
        for r in &radii {
            // centers that put a window face on a support corner
            let per_axis: Vec<Vec<Rat>> = corners
                .iter()
                .map(|e| {
                    let mut xs: Vec<Rat> =
                        e.iter().map(|a| a + r).chain(e.iter().map(|b| b - r)).collect();
                    xs.sort();
                    xs.dedup();
                    xs
                })
                .collect();
            let mut cursor = vec![0usize; d];
            loop {
                let center: Vec<Rat> = (0..d)
                    .map(|j| per_axis[j][cursor[j]].clone())
                    .collect();
                candidates.push((center, r.clone()));
                let mut j = 0;
                loop {
                    cursor[j] += 1;
                    if cursor[j] < per_axis[j].len() {
                        break;
                    }
                    cursor[j] = 0;
                    j += 1;
                    if j == d {
                        break;
                    }
                }
                if j == d {
                    break;
                }
            }
        }
    }

    let stride = candidates.len().div_ceil(MAX_WINDOWS).max(1);
    let mut best_value = T::neg_infinity();
    let mut best: Option<(Vec<Rat>, Rat)> = None;
    let mut evaluated = 0usize;
    for (center, radius) in candidates.iter().step_by(stride) {
        let v = eval(center, radius)?;
        evaluated += 1;
        if v > best_value {
            best_value = v;
            best = Some((center.clone(), radius.clone()));
        }
    }
    let (mut center, mut radius) = best.expect("at least one candidate window");

    let single_box_exact = d == 1 && f.terms().len() == 1;

    if !single_box_exact && refine_iters > 0 {
        // coordinate-wise golden polish on (center, radius) in floats
        let mut coords: Vec<f64> = center
            .iter()
            .map(|c| T::from_rat(c).to_f64c())
            .chain(std::iter::once(T::from_rat(&radius).to_f64c()))
            .collect();
        let r0 = coords[d];
        let budget = refine_iters as usize;
        let mut spent = 0usize;
        let mut axis = 0usize;
        let eval_f = |xs: &[f64]| -> T {
            let rad = xs[d];
            if rad <= 0.0 {
                return T::neg_infinity();
            }
            let c: Vec<Rat> = (0..d)
                .map(|j| rat_from_f64(xs[j]).expect("finite center"))
                .collect();
            let r = rat_from_f64(rad).expect("finite radius");
            eval(&c, &r).unwrap_or_else(|_| T::neg_infinity())
        };
        while spent < budget {
            let spent_before = spent;
            let width = r0 * 0.5;
            let (mut a, mut b) = (coords[axis] - width, coords[axis] + width);
            const PHI: f64 = 0.618_033_988_749_894_9;
            let mut x1 = b - PHI * (b - a);
            let mut x2 = a + PHI * (b - a);
            let probe = |x: f64, xs: &mut Vec<f64>| {
                let old = xs[axis];
                xs[axis] = x;
                let v = eval_f(xs);
                xs[axis] = old;
                v
            };
            let mut f1 = probe(x1, &mut coords);
            let mut f2 = probe(x2, &mut coords);
            spent += 2;
            for _ in 0..6 {
                if spent >= budget {
                    break;
                }
                if f1 < f2 {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + PHI * (b - a);
                    f2 = probe(x2, &mut coords);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - PHI * (b - a);
                    f1 = probe(x1, &mut coords);
                }
                spent += 1;
            }
            let (x_best, f_best) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
            if f_best > best_value {
                coords[axis] = x_best;
                best_value = f_best;
                center = (0..d)
                    .map(|j| rat_from_f64(coords[j]).expect("finite center"))
                    .collect();
                radius = rat_from_f64(coords[d]).expect("finite radius");
            }
            evaluated += spent - spent_before;
            axis = (axis + 1) % (d + 1);
        }
    }

    Ok(NormEstimate {
        value: best_value,
        witness: Witness::Window { center, radius },
        evaluated,
        exact: single_box_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn step_fn() -> SimpleFunction<f64> {
        SimpleFunction::from_terms(
            1,
            vec![
                (2.0, Aabb::interval(rat_int(0), rat(1, 2)).unwrap()),
                (1.0, Aabb::interval(rat(1, 2), rat_int(1)).unwrap()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn lebesgue_matches_hand_values() {
        let f = step_fn();
        assert!((lebesgue_norm(&f, &Exponent::one()) - 1.5).abs() < 1e-15);
        assert!(
            (lebesgue_norm(&f, &Exponent::from_int(2).unwrap()) - 2.5f64.sqrt()).abs() < 1e-15
        );
        assert_eq!(lebesgue_norm(&f, &Exponent::Infinite), 2.0);
        let z = SimpleFunction::<f64>::zero(1).unwrap();
        assert_eq!(lebesgue_norm(&z, &Exponent::from_int(3).unwrap()), 0.0);
    }

    #[test]
    fn weak_norm_scans_level_values() {
        let f = step_fn();
        // t=2: measure 1/2 -> 2 sqrt(1/2) = sqrt 2; t=1: measure 1 -> 1
        let w = weak_norm(&f, &Exponent::from_int(2).unwrap()).unwrap();
        assert!((w - 2.0f64.sqrt()).abs() < 1e-15);
        assert!(weak_norm(&f, &Exponent::Infinite).is_err());
        // weak alpha=1 never exceeds L1
        let w1 = weak_norm(&f, &Exponent::one()).unwrap();
        assert!(w1 <= lebesgue_norm(&f, &Exponent::one()) + 1e-15);
    }

    #[test]
    fn amalgam_norm_oracle_values() {
        let f = SimpleFunction::<f64>::indicator(
            Aabb::interval(rat_int(0), rat_int(3)).unwrap(),
        );
        let q2 = Exponent::from_int(2).unwrap();
        let p4 = Exponent::from_int(4).unwrap();
        // side 1: three cubes each with local L2 norm 1 -> 3^(1/4)
        let a1 = amalgam_norm(&f, &q2, &p4, &rat_int(1)).unwrap();
        assert!((a1 - 3.0f64.powf(0.25)).abs() < 1e-14);
        // side 2: cubes [0,2) and [2,4) -> (sqrt(2)^4 + 1^4)^(1/4) = 5^(1/4)
        let a2 = amalgam_norm(&f, &q2, &p4, &rat_int(2)).unwrap();
        assert!((a2 - 5.0f64.powf(0.25)).abs() < 1e-14);
        // side 3: single cube -> sqrt(3)
        let a3 = amalgam_norm(&f, &q2, &p4, &rat_int(3)).unwrap();
        assert!((a3 - 3.0f64.sqrt()).abs() < 1e-14);
        // q = inf, p = 1 sums the per-cube sups
        let ainf = amalgam_norm(&f, &Exponent::Infinite, &Exponent::one(), &rat_int(1)).unwrap();
        assert!((ainf - 3.0).abs() < 1e-14);
        assert!(amalgam_norm(&f, &q2, &p4, &rat_int(0)).is_err());
    }

    #[test]
    fn amalgam_with_equal_exponents_is_lebesgue() {
        let f = SimpleFunction::from_terms(
            1,
            vec![
                (1.5, Aabb::interval(rat(-3, 4), rat(1, 3)).unwrap()),
                (-0.25, Aabb::interval(rat(1, 3), rat(7, 2)).unwrap()),
            ],
        )
        .unwrap();
        for q in [Exponent::one(), Exponent::from_int(2).unwrap(), Exponent::Infinite] {
            for rho in [rat_int(1), rat(1, 3), rat(5, 2)] {
                let a = amalgam_norm(&f, &q, &q, &rho).unwrap();
                let l = lebesgue_norm(&f, &q);
                assert!((a - l).abs() <= 1e-12 * (1.0 + l), "q={q} rho={rho}");
            }
        }
    }

    #[test]
    fn lattice_integrals_split_mass_by_cube() {
        let f = SimpleFunction::<f64>::indicator(
            Aabb::interval(rat_int(0), rat_int(3)).unwrap(),
        );
        let cells = lattice_cell_integrals(&f, &rat_int(2)).unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0], (vec![0], 2.0));
        assert_eq!(cells[1], (vec![1], 1.0));
    }

    #[test]
    fn holder_products_stay_below_split_norms() {
        let f = step_fn();
        let g = SimpleFunction::<f64>::indicator(
            Aabb::interval(rat(1, 4), rat(5, 4)).unwrap(),
        );
        let q2 = Exponent::from_int(2).unwrap();
        let chk = holder_check(&f, &g, &q2, &Exponent::from_int(4).unwrap(), &rat_int(1)).unwrap();
        assert!(chk.ok, "lhs={} rhs={}", chk.lhs, chk.rhs);
        assert!(chk.lhs > 0.0);
    }

    #[test]
    fn morrey_single_interval_is_exact() {
        let f = SimpleFunction::<f64>::indicator(Aabb::unit_cube(1).unwrap());
        let est = morrey_norm(&f, &Exponent::one(), &rat(1, 2), 40).unwrap();
        assert!((est.value - 2.0f64.sqrt()).abs() < 1e-14);
        assert!(est.exact);
        match &est.witness {
            Witness::Window { center, radius } => {
                assert_eq!(center, &vec![rat(1, 2)]);
                assert_eq!(radius, &rat(1, 2));
            }
            w => panic!("unexpected witness {w:?}"),
        }
        assert!(morrey_norm(&f, &Exponent::one(), &rat_int(1), 0).is_err());
        assert!(morrey_norm(&f, &Exponent::Infinite, &rat(1, 2), 0).is_err());
    }

    #[test]
    fn morrey_two_dimensional_cube_windows() {
        let f = SimpleFunction::<f64>::indicator(Aabb::unit_cube(2).unwrap());
        let est = morrey_norm(&f, &Exponent::one(), &rat_int(1), 0).unwrap();
        // window = the unit cube itself: r = 1/2, weight r^(1-2) = 2, mass 1
        assert!(est.value >= 2.0 - 1e-12, "value={}", est.value);
    }
}
