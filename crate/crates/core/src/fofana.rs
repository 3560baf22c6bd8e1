//! The scale-supremum norm
//! `sup_{rho > 0} rho^(d(1/alpha - 1/q)) * ||f||_{q,p;rho}`
//! over amalgam norms at every lattice scale, reported as a certified
//! lower bound with a witness scale.
//!
//! The supremum runs over a continuum, so the search evaluates the curve
//! `Phi(rho)` on a geometric grid plus mandatory scales, then polishes
//! local maxima by golden section in log scale. Three structural rules
//! recognise cases where the supremum is attained at an evaluated scale
//! and promote the estimate to exact:
//!
//! * `f` a single lattice-aligned cube of side `s`: the supremum is
//!   `|v| s^(d/alpha)`, attained at `rho = s`.
//! * `alpha = q`, support in the positive orthant, some evaluated scale
//!   covers the support with one cube: the supremum is `||f||_q`.
//! * `alpha = p`, some evaluated scale divides every box corner: the
//!   supremum is `||f||_p`.

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::norms::{amalgam_norm, lebesgue_norm, NormEstimate, Witness};
use crate::rational::{
    common_denominator, is_integer_multiple, rat_ceil, rat_from_f64, rat_int, Rat,
};
use crate::real::Real;
use crate::simple::SimpleFunction;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::BTreeSet;

#[derive(Clone, Debug)]
pub struct GridConfig {
    pub points_per_decade: u32,
    /// Harmonic mandatory scales `1/(n D)` are generated for `n` up to
    /// this bound, `D` the common denominator of the box corners.
    pub harmonic_max: u32,
    pub refine_iters: u32,
    /// Harmonics are skipped when `D` exceeds this, since exact division
    /// of the support is then out of reach anyway.
    pub lcd_cap: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points_per_decade: 64,
            harmonic_max: 8,
            refine_iters: 40,
            lcd_cap: 4096,
        }
    }
}

/// Geometric evaluation grid for scale suprema. `mandatory` scales are
/// always evaluated exactly as given; the rest of the grid is a
/// geometric fill of `[rho_min, rho_max]`.
#[derive(Clone, Debug)]
pub struct ScaleGrid {
    rho_min: Rat,
    rho_max: Rat,
    points_per_decade: u32,
    mandatory: Vec<Rat>,
    /// Set on grids derived by exact scaling: overrides the geometric
    /// fill so scaled grids correspond point by point.
    explicit: Option<Vec<Rat>>,
}

impl ScaleGrid {
    pub fn new(
        rho_min: Rat,
        rho_max: Rat,
        points_per_decade: u32,
        mandatory: Vec<Rat>,
    ) -> Result<Self> {
        if !rho_min.is_positive() || rho_min >= rho_max {
            return Err(Error::GridRange);
        }
        if points_per_decade < 4 {
            return Err(Error::GridDensity);
        }
        let mut mandatory: Vec<Rat> = mandatory
            .into_iter()
            .filter(|r| r.is_positive())
            .collect();
        mandatory.sort();
        mandatory.dedup();
        Ok(ScaleGrid {
            rho_min,
            rho_max,
            points_per_decade,
            mandatory,
            explicit: None,
        })
    }

    pub fn rho_min(&self) -> &Rat {
        &self.rho_min
    }

    pub fn rho_max(&self) -> &Rat {
        &self.rho_max
    }

    pub fn points_per_decade(&self) -> u32 {
        self.points_per_decade
    }

    pub fn mandatory(&self) -> &[Rat] {
        &self.mandatory
    }

    /// All evaluation scales, ascending and deduplicated: the geometric
    /// fill with exact endpoints, plus every mandatory scale.
    pub fn points(&self) -> Vec<Rat> {
        if let Some(pts) = &self.explicit {
            return pts.clone();
        }
        let mut set: BTreeSet<Rat> = BTreeSet::new();
        set.insert(self.rho_min.clone());
        set.insert(self.rho_max.clone());
        for m in &self.mandatory {
            set.insert(m.clone());
        }
        let lo = rat_to_f64(&self.rho_min).ln();
        let hi = rat_to_f64(&self.rho_max).ln();
        let decades = (hi - lo) / std::f64::consts::LN_10;
        let n = ((self.points_per_decade as f64) * decades).ceil().max(1.0) as usize;
        for i in 1..n {
            let x = (lo + (hi - lo) * (i as f64) / (n as f64)).exp();
            if let Ok(r) = rat_from_f64(x) {
                if r.is_positive() {
                    set.insert(r);
                }
            }
        }
        set.into_iter().collect()
    }

    /// The image grid under `rho -> rho0 rho`: every evaluation point is
    /// exactly `rho0` times a point of `self`, which is what makes
    /// dilation-invariance checks sharp.
    pub fn scaled(&self, rho0: &Rat) -> Result<ScaleGrid> {
        crate::rational::require_positive(rho0)?;
        let pts: Vec<Rat> = self.points().iter().map(|r| r * rho0).collect();
        Ok(ScaleGrid {
            rho_min: &self.rho_min * rho0,
            rho_max: &self.rho_max * rho0,
            points_per_decade: self.points_per_decade,
            mandatory: self.mandatory.iter().map(|r| r * rho0).collect(),
            explicit: Some(pts),
        })
    }

    /// Same grid with extra always-evaluated scales.
    pub fn with_mandatory<I: IntoIterator<Item = Rat>>(&self, extra: I) -> ScaleGrid {
        let mut g = self.clone();
        let added: Vec<Rat> = extra.into_iter().filter(|r| r.is_positive()).collect();
        if let Some(pts) = &mut g.explicit {
            pts.extend(added.iter().cloned());
            pts.sort();
            pts.dedup();
        }
        g.mandatory.extend(added);
        g.mandatory.sort();
        g.mandatory.dedup();
        g
    }
}

fn rat_to_f64(r: &Rat) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Builds the evaluation grid adapted to `f`: geometric span
/// `[h/4, 4M]` for `h` the smallest box edge and `M` the largest
/// absolute support coordinate, with mandatory scales at 1, at `M`
/// rounded up to the next integer (one cube then covers a
/// positive-orthant support), at every distinct box edge length, and at
/// the harmonics `1/(n D)` of the corner common denominator `D` (scales
/// that divide every corner exactly). The degenerate exponent choices
/// stretch the span so their attainment scales always lie inside it.
pub fn auto_grid<T: Real>(
    f: &SimpleFunction<T>,
    exps: &Exponents,
    cfg: &GridConfig,
) -> Result<ScaleGrid> {
    let extent = f.support_extent()?;
    let m = extent.max_abs_coord();
    let mut h: Option<Rat> = None;
    let mut edges: BTreeSet<Rat> = BTreeSet::new();
    let mut corners: Vec<Rat> = Vec::new();
    for t in f.terms() {
        for j in 0..f.dim() {
            let e = t.region.edge(j);
            h = Some(match h {
                None => e.clone(),
                Some(cur) => cur.min(e.clone()),
            });
            edges.insert(e);
            corners.push(t.region.lo()[j].clone());
            corners.push(t.region.hi()[j].clone());
        }
    }
    let h = h.expect("nonzero function has at least one box");

    let mut mandatory: Vec<Rat> = vec![rat_int(1), rat_ceil(&m)];
    mandatory.extend(edges);

    let lcd = common_denominator(corners.iter());
    let mut smallest_harmonic: Option<Rat> = None;
    if lcd <= BigInt::from(cfg.lcd_cap) {
        for n in 1..=cfg.harmonic_max.max(1) {
            let s = Rat::new(BigInt::from(1), &lcd * BigInt::from(n));
            smallest_harmonic = Some(s.clone());
            mandatory.push(s);
        }
    }

    let mut rho_min = &h / rat_int(4);
    let mut rho_max = rat_int(4) * &m;
    if exps.alpha() == exps.q() {
        rho_max = rho_max.max(rat_ceil(&m));
    }
    if exps.alpha() == exps.p() {
        if let Some(s) = smallest_harmonic {
            rho_min = rho_min.min(s);
        }
    }
    ScaleGrid::new(rho_min, rho_max, cfg.points_per_decade, mandatory)
}

/// One sample of the scale curve: the amalgam norm at `rho` and the
/// weighted value `phi = rho^(d(1/alpha - 1/q)) * amalgam`.
#[derive(Clone, Debug)]
pub struct PhiPoint<T> {
    pub rho: Rat,
    pub amalgam: T,
    pub phi: T,
}

/// Evaluates the curve at every grid scale, ascending. A zero `f` gives
/// an all-zero curve.
pub fn phi_curve<T: Real>(
    f: &SimpleFunction<T>,
    exps: &Exponents,
    grid: &ScaleGrid,
) -> Result<Vec<PhiPoint<T>>> {
    let e = exps.scaling_exponent(f.dim());
    let et = T::from_rat(&e);
    let weight_one = e.is_zero();
    grid.points()
        .into_par_iter()
        .map(|rho| {
            let amalgam = amalgam_norm(f, exps.q(), exps.p(), &rho)?;
            let phi = if weight_one {
                amalgam
            } else {
                T::from_rat(&rho).powf(et) * amalgam
            };
            Ok(PhiPoint { rho, amalgam, phi })
        })
        .collect()
}

/// Certified lower bound for the scale supremum, with grid search, local
/// golden-section polish and the exact attainment rules.
pub fn fofana_norm<T: Real>(
    f: &SimpleFunction<T>,
    exps: &Exponents,
    grid: &ScaleGrid,
    refine_iters: u32,
) -> Result<NormEstimate<T>> {
    exps.require_ordered()?;
    if f.is_zero() {
        return Ok(NormEstimate {
            value: T::zero(),
            witness: Witness::Scale(rat_int(1)),
            evaluated: 0,
            exact: true,
        });
    }

    let curve = phi_curve(f, exps, grid)?;
    let mut evaluated = curve.len();

    let mut best_idx = 0usize;
    for (i, pt) in curve.iter().enumerate() {
        if pt.phi > curve[best_idx].phi {
            best_idx = i;
        }
    }
    let mut best_value = curve[best_idx].phi;
    let mut best_rho = curve[best_idx].rho.clone();

    if refine_iters > 0 && curve.len() >= 3 {
        let e = exps.scaling_exponent(f.dim());
        let et = T::from_rat(&e);
        let weight_one = e.is_zero();
        let eval_phi = |x: f64| -> T {
            let rho = match rat_from_f64(x.exp()) {
                Ok(r) if r.is_positive() => r,
                _ => return T::neg_infinity(),
            };
            match amalgam_norm(f, exps.q(), exps.p(), &rho) {
                Ok(a) => {
                    if weight_one {
                        a
                    } else {
                        T::from_rat(&rho).powf(et) * a
                    }
                }
                Err(_) => T::neg_infinity(),
            }
        };

        // strict-or-flat local maxima, best five first
        let n = curve.len();
        let mut peaks: Vec<usize> = (0..n)
            .filter(|&i| {
                (i == 0 || curve[i].phi >= curve[i - 1].phi)
                    && (i == n - 1 || curve[i].phi >= curve[i + 1].phi)
            })
            .collect();
        peaks.sort_by(|&a, &b| {
            curve[b]
                .phi
                .partial_cmp(&curve[a].phi)
                .expect("finite phi")
                .then_with(|| curve[a].rho.cmp(&curve[b].rho))
        });
        peaks.truncate(5);

        const PHI_RATIO: f64 = 0.618_033_988_749_894_9;
        for &i in &peaks {
            let lo = if i == 0 { i } else { i - 1 };
            let hi = if i == n - 1 { i } else { i + 1 };
            let mut a = rat_to_f64(&curve[lo].rho).ln();
            let mut b = rat_to_f64(&curve[hi].rho).ln();
            let mut x1 = b - PHI_RATIO * (b - a);
            let mut x2 = a + PHI_RATIO * (b - a);
            let mut f1 = eval_phi(x1);
            let mut f2 = eval_phi(x2);
            let mut spent = 2u32;
            while spent < refine_iters {
                if f1 < f2 {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + PHI_RATIO * (b - a);
                    f2 = eval_phi(x2);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - PHI_RATIO * (b - a);
                    f1 = eval_phi(x1);
                }
                spent += 1;
            }
            evaluated += spent as usize;
            let (xb, fb) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
            if fb > best_value {
                if let Ok(r) = rat_from_f64(xb.exp()) {
                    best_value = fb;
                    best_rho = r;
                }
            }
        }
    }

    // Exact attainment rules; each one pins the supremum analytically
    // and names the scale that attains it.
    if let Some((value, rho)) = exact_rule(f, exps, grid) {
        return Ok(NormEstimate {
            value,
            witness: Witness::Scale(rho),
            evaluated,
            exact: true,
        });
    }

    Ok(NormEstimate {
        value: best_value,
        witness: Witness::Scale(best_rho),
        evaluated,
        exact: false,
    })
}

fn exact_rule<T: Real>(
    f: &SimpleFunction<T>,
    exps: &Exponents,
    grid: &ScaleGrid,
) -> Option<(T, Rat)> {
    let d = f.dim();

    // Single lattice-aligned cube of side s: Phi peaks at rho = s with
    // value |v| s^(d/alpha). Phi(rho) <= that everywhere: for rho >= s
    // the l^p sum is dominated by the l^q sum (= ||f||_q), for rho <= s
    // interpolate the per-cube norms between the sup and L^q bounds; the
    // sign of the remaining rho exponent closes each side.
    if f.terms().len() == 1 {
        let t = &f.terms()[0];
        let s = t.region.edge(0);
        let cubical = (1..d).all(|j| t.region.edge(j) == s);
        let aligned = (0..d).all(|j| is_integer_multiple(&t.region.lo()[j], &s));
        if cubical && aligned {
            let e = exps.alpha().reciprocal() * rat_int(d as i64);
            let value = t.value.abs() * pow_rat(T::from_rat(&s), &e);
            return Some((value, s));
        }
    }

    // alpha = q: the weight is identically 1 and Phi(rho) <= ||f||_q,
    // with equality once a single cube [0, rho)^d swallows the support.
    if exps.alpha() == exps.q() {
        let extent = f.support_extent().ok()?;
        if extent.in_positive_orthant() {
            let need = extent
                .hi()
                .iter()
                .cloned()
                .fold(rat_int(0), |m, x| m.max(x));
            if let Some(rho) = grid.points().into_iter().find(|r| r >= &need) {
                return Some((lebesgue_norm(f, exps.q()), rho));
            }
        }
    }

    // alpha = p: Phi(rho) <= ||f||_p by per-cube Hoelder, with equality
    // at any scale dividing every box corner (f is then cube-constant).
    if exps.alpha() == exps.p() {
        let divides_all = |rho: &Rat| {
            f.terms().iter().all(|t| {
                (0..d).all(|j| {
                    is_integer_multiple(&t.region.lo()[j], rho)
                        && is_integer_multiple(&t.region.hi()[j], rho)
                })
            })
        };
        if let Some(rho) = grid.points().into_iter().rev().find(divides_all) {
            return Some((lebesgue_norm(f, exps.p()), rho));
        }
    }

    None
}

fn pow_rat<T: Real>(x: T, e: &Rat) -> T {
    if e.is_zero() {
        T::one()
    } else {
        x.powf(T::from_rat(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Aabb;
    use crate::rational::rat;

    fn grid_for<T: Real>(f: &SimpleFunction<T>, exps: &Exponents) -> ScaleGrid {
        auto_grid(f, exps, &GridConfig::default()).unwrap()
    }

    #[test]
    fn auto_grid_spans_and_mandatory_points() {
        let e = Exponents::from_ints(2, 4, 3).unwrap();
        let f = SimpleFunction::<f64>::indicator(Aabb::unit_cube(1).unwrap());
        let g = grid_for(&f, &e);
        assert!(g.rho_min() <= &rat(1, 4) && g.rho_max() >= &rat_int(4));
        assert!(g.points().contains(&rat_int(1)));

        let f3 = SimpleFunction::<f64>::indicator(
            Aabb::interval(rat_int(0), rat_int(3)).unwrap(),
        );
        let g3 = grid_for(&f3, &e);
        assert!(g3.mandatory().contains(&rat_int(3)));

        let fq = SimpleFunction::<f64>::indicator(
            Aabb::interval(rat(1, 4), rat(3, 4)).unwrap(),
        );
        let gq = grid_for(&fq, &e);
        assert!(gq.points().contains(&rat(1, 4)));
        assert!(gq.points().contains(&rat(1, 8)));

        let z = SimpleFunction::<f64>::zero(1).unwrap();
        assert!(auto_grid(&z, &e, &GridConfig::default()).is_err());
    }

    #[test]
    fn phi_curve_matches_closed_forms() {
        let f = SimpleFunction::<f64>::indicator(Aabb::unit_cube(1).unwrap());
        let e = Exponents::new(
            crate::Exponent::one(),
            crate::Exponent::Infinite,
            crate::Exponent::from_int(2).unwrap(),
        );
        let grid = ScaleGrid::new(
            rat(1, 4),
            rat_int(4),
            8,
            vec![rat(1, 2), rat_int(1), rat_int(2)],
        )
        .unwrap();
        let curve = phi_curve(&f, &e, &grid).unwrap();
        let at = |rho: &Rat| {
            curve
                .iter()
                .find(|pt| &pt.rho == rho)
                .map(|pt| pt.phi)
                .unwrap()
        };
        assert!((at(&rat_int(1)) - 1.0).abs() < 1e-14);
        assert!((at(&rat(1, 2)) - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((at(&rat_int(2)) - 0.5f64.sqrt()).abs() < 1e-14);

        // (2,4,3): Phi(1/n) = n^(-1/12)
        let e2 = Exponents::from_ints(2, 4, 3).unwrap();
        let grid2 = ScaleGrid::new(rat(1, 8), rat_int(2), 8, vec![rat(1, 3)]).unwrap();
        let curve2 = phi_curve(&f, &e2, &grid2).unwrap();
        let got = curve2
            .iter()
            .find(|pt| pt.rho == rat(1, 3))
            .map(|pt| pt.phi)
            .unwrap();
        assert!((got - 3.0f64.powf(-1.0 / 12.0)).abs() < 1e-14);

        let z = SimpleFunction::<f64>::zero(1).unwrap();
        assert!(phi_curve(&z, &e2, &grid2)
            .unwrap()
            .iter()
            .all(|pt| pt.phi == 0.0));
    }

    #[test]
    fn unit_cube_norm_is_one_with_witness_at_one() {
        let e = Exponents::from_ints(2, 4, 3).unwrap();
        let f = SimpleFunction::<f64>::indicator(Aabb::unit_cube(1).unwrap());
        let grid = grid_for(&f, &e);
        let est = fofana_norm(&f, &e, &grid, 40).unwrap();
        assert_eq!(est.value, 1.0);
        assert!(est.exact);
        assert_eq!(est.witness, Witness::Scale(rat_int(1)));
    }

    #[test]
    fn two_cube_indicator_matches_dilation_value() {
        // chi_[0,2) at (1, inf, 2): sqrt(2) by scaling from the unit cube
        let e = Exponents::new(
            crate::Exponent::one(),
            crate::Exponent::Infinite,
            crate::Exponent::from_int(2).unwrap(),
        );
        let f = SimpleFunction::<f64>::indicator(
            Aabb::interval(rat_int(0), rat_int(2)).unwrap(),
        );
        let grid = grid_for(&f, &e);
        let est = fofana_norm(&f, &e, &grid, 40).unwrap();
        assert!((est.value - 2.0f64.sqrt()).abs() < 1e-12);
        assert!(est.exact);
        assert_eq!(est.witness, Witness::Scale(rat_int(2)));
    }

    #[test]
    fn ordering_violation_is_rejected() {
        let e = Exponents::from_ints(3, 4, 2).unwrap();
        let f = SimpleFunction::<f64>::indicator(Aabb::unit_cube(1).unwrap());
        let grid = ScaleGrid::new(rat(1, 2), rat_int(2), 8, vec![]).unwrap();
        assert!(fofana_norm(&f, &e, &grid, 0).is_err());
    }

    #[test]
    fn degenerate_alpha_q_snaps_to_lebesgue() {
        let e = Exponents::from_ints(2, 4, 2).unwrap();
        let f: SimpleFunction<f64> = SimpleFunction::from_terms(
            1,
            vec![
                (2.0, Aabb::interval(rat(1, 4), rat(3, 4)).unwrap()),
                (1.0, Aabb::interval(rat(3, 4), rat(5, 2)).unwrap()),
            ],
        )
        .unwrap();
        let grid = grid_for(&f, &e);
        let est = fofana_norm(&f, &e, &grid, 40).unwrap();
        assert!(est.exact);
        assert_eq!(est.value, lebesgue_norm(&f, e.q()));
        // every curve point stays below the certified value
        for pt in phi_curve(&f, &e, &grid).unwrap() {
            assert!(pt.phi <= est.value + 1e-12 * (1.0 + est.value));
        }
    }

    #[test]
    fn degenerate_alpha_p_snaps_to_lebesgue() {
        let e = Exponents::from_ints(2, 4, 4).unwrap();
        let f: SimpleFunction<f64> = SimpleFunction::from_terms(
            1,
            vec![
                (1.0, Aabb::interval(rat(-1, 2), rat(1, 4)).unwrap()),
                (-3.0, Aabb::interval(rat(1, 4), rat(1, 1)).unwrap()),
            ],
        )
        .unwrap();
        let grid = grid_for(&f, &e);
        let est = fofana_norm(&f, &e, &grid, 40).unwrap();
        assert!(est.exact);
        assert_eq!(est.value, lebesgue_norm(&f, e.p()));
        for pt in phi_curve(&f, &e, &grid).unwrap() {
            assert!(pt.phi <= est.value + 1e-12 * (1.0 + est.value));
        }
    }

    #[test]
    fn scaled_grid_points_correspond_exactly() {
        let grid = ScaleGrid::new(rat(1, 4), rat_int(4), 16, vec![rat_int(1)]).unwrap();
        let scaled = grid.scaled(&rat(3, 2)).unwrap();
        let a = grid.points();
        let b = scaled.points();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x * rat(3, 2), *y);
        }
    }

    #[test]
    fn dilation_invariance_on_matched_grids() {
        let e = Exponents::from_ints(2, 4, 3).unwrap();
        let f: SimpleFunction<f64> = SimpleFunction::from_terms(
            1,
            vec![
                (1.0, Aabb::interval(rat_int(0), rat_int(1)).unwrap()),
                (-2.0, Aabb::interval(rat(3, 2), rat_int(3)).unwrap()),
            ],
        )
        .unwrap();
        let grid = grid_for(&f, &e);
        let base = fofana_norm(&f, &e, &grid, 24).unwrap();
        for rho0 in [rat(1, 2), rat_int(3), rat(5, 4)] {
            let fd = f.dilate(&rho0, e.alpha()).unwrap();
            let gd = grid.scaled(&rho0).unwrap();
            let est = fofana_norm(&fd, &e, &gd, 24).unwrap();
            let rel = (est.value - base.value).abs() / base.value;
            assert!(rel < 1e-10, "rho0={rho0} rel={rel}");
        }
    }
}
