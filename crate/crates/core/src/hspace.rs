//! Decompositions `f = sum_n c_n St_(rho_n) f_n` with unit-amalgam atoms
//! (the dilation exponent is the conjugate `alpha'`), the decomposition
//! cost `sum |c_n|` as an upper bound for the predual norm, duality
//! witnesses for the lower bound, and the resulting two-sided sandwich.
//!
//! The true norm is the infimum of `sum |c_n|` over all countable
//! decompositions; only finite decompositions are searched here, so every
//! reported upper bound is a true bound and the lower bound comes from
//! the pairing inequality `|int f g| <= ||f||_H ||g||_(q,p,alpha)`. A
//! lower bound is *certified* only when the witness norm in the divisor
//! is itself exact, since dividing by an underestimate would overshoot.

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::fofana::{auto_grid, fofana_norm, GridConfig, ScaleGrid};
use crate::geometry::{Aabb, MAX_DIM};
use crate::norms::{amalgam_norm, lattice_cell_integrals, lebesgue_norm};
use crate::rational::{rat_int, Rat};
use crate::real::{roundoff_tol, Accumulator, Real};
use crate::simple::SimpleFunction;
use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct HTerm<T> {
    pub coef: T,
    pub rho: Rat,
    pub atom: SimpleFunction<T>,
}

/// A finite decomposition candidate. Whether it actually satisfies the
/// unit-atom constraint is a question for [`validate`]; the type itself
/// only pins dimensions so synthesis is well defined.
#[derive(Clone, Debug)]
pub struct HDecomposition<T> {
    exps: Exponents,
    dim: usize,
    terms: Vec<HTerm<T>>,
}

impl<T: Real> HDecomposition<T> {
    pub fn new(exps: Exponents, dim: usize, terms: Vec<HTerm<T>>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        for t in &terms {
            if t.atom.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: t.atom.dim(),
                });
            }
        }
        Ok(HDecomposition { exps, dim, terms })
    }

    pub fn exps(&self) -> &Exponents {
        &self.exps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[HTerm<T>] {
        &self.terms
    }

    pub fn coef_abs_sum(&self) -> T {
        let mut acc = Accumulator::new();
        for t in &self.terms {
            acc.add(t.coef.abs());
        }
        acc.total()
    }

    /// Same decomposition with every scale multiplied by `rho0`. It
    /// decomposes the dilate of the original function at identical cost.
    pub fn transported(&self, rho0: &Rat) -> Result<Self> {
        crate::rational::require_positive(rho0)?;
        Ok(HDecomposition {
            exps: self.exps.clone(),
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| HTerm {
                    coef: t.coef,
                    rho: &t.rho * rho0,
                    atom: t.atom.clone(),
                })
                .collect(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct TermCheck<T> {
    pub atom_norm: T,
    pub rho_positive: bool,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct ValidationReport<T> {
    pub terms: Vec<TermCheck<T>>,
    pub coef_abs_sum: T,
    pub valid: bool,
}

/// Checks the decomposition constraints: every scale positive, every
/// atom within the unit amalgam ball `||atom||_(q',p';1) <= 1` up to
/// roundoff slack. Failures are reported, not raised.
pub fn validate<T: Real>(dec: &HDecomposition<T>) -> ValidationReport<T> {
    let dual = dec.exps.dual();
    let slack = roundoff_tol::<T>();
    let unit = T::one() + slack;
    let terms: Vec<TermCheck<T>> = dec
        .terms
        .iter()
        .map(|t| {
            let rho_positive = t.rho.is_positive();
            let atom_norm = amalgam_norm(&t.atom, dual.q(), dual.p(), &rat_int(1))
                .unwrap_or_else(|_| T::infinity());
            TermCheck {
                atom_norm,
                rho_positive,
                ok: rho_positive && atom_norm <= unit,
            }
        })
        .collect();
    ValidationReport {
        valid: terms.iter().all(|c| c.ok),
        coef_abs_sum: dec.coef_abs_sum(),
        terms,
    }
}

/// Exact finite sum `sum_n c_n St_(rho_n) atom_n`, dilation exponent
/// `alpha'`.
pub fn synthesize<T: Real>(dec: &HDecomposition<T>) -> Result<SimpleFunction<T>> {
    let alpha_conj = dec.exps.alpha_conj();
    let mut parts: Vec<(T, SimpleFunction<T>)> = Vec::with_capacity(dec.terms.len());
    for t in &dec.terms {
        parts.push((t.coef, t.atom.dilate(&t.rho, &alpha_conj)?));
    }
    if parts.is_empty() {
        return SimpleFunction::zero(dec.dim);
    }
    let refs: Vec<(T, &SimpleFunction<T>)> = parts.iter().map(|(c, f)| (*c, f)).collect();
    SimpleFunction::linear_combination(&refs)
}

/// The one-term decomposition `f = ||f||_(q',p') * (f / ||f||_(q',p'))`
/// at scale 1; its cost is the amalgam norm of `f` itself, which is the
/// universal fallback upper bound.
pub fn trivial_decomposition<T: Real>(
    f: &SimpleFunction<T>,
    exps: &Exponents,
) -> Result<HDecomposition<T>> {
    if f.is_zero() {
        return Err(Error::EmptySupport);
    }
    let dual = exps.dual();
    let c = amalgam_norm(f, dual.q(), dual.p(), &rat_int(1))?;
    let atom = f.scaled(c.recip());
    HDecomposition::new(
        exps.clone(),
        f.dim(),
        vec![HTerm {
            coef: c,
            rho: rat_int(1),
            atom,
        }],
    )
}

/// How `scale_optimized_bound` splits `f` into pieces before optimising
/// each piece's scale separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionStrategy {
    /// Whole function as one piece.
    Identity,
    /// One midpoint bisection of the support box per axis (up to `2^d`
    /// pieces).
    DyadicBlocks,
    /// Pieces grouped by dyadic bands of `|value|`.
    LevelSets,
}

pub const ALL_STRATEGIES: [PartitionStrategy; 3] = [
    PartitionStrategy::Identity,
    PartitionStrategy::DyadicBlocks,
    PartitionStrategy::LevelSets,
];

fn split_pieces<T: Real>(
    f: &SimpleFunction<T>,
    strategy: PartitionStrategy,
) -> Result<Vec<SimpleFunction<T>>> {
    match strategy {
        PartitionStrategy::Identity => Ok(vec![f.clone()]),
        PartitionStrategy::DyadicBlocks => {
            let extent = f.support_extent()?;
            let d = f.dim();
            let mids: Vec<Rat> = (0..d)
                .map(|j| (&extent.lo()[j] + &extent.hi()[j]) / rat_int(2))
                .collect();
            let mut pieces = Vec::new();
            for mask in 0..(1usize << d) {
                let mut lo = Vec::with_capacity(d);
                let mut hi = Vec::with_capacity(d);
                for j in 0..d {
                    if mask & (1 << j) == 0 {
                        lo.push(extent.lo()[j].clone());
                        hi.push(mids[j].clone());
                    } else {
                        lo.push(mids[j].clone());
                        hi.push(extent.hi()[j].clone());
                    }
                }
                let block = Aabb::new(lo, hi)?;
                let piece = f.restrict(&block)?;
                if !piece.is_zero() {
                    pieces.push(piece);
                }
            }
            Ok(pieces)
        }
        PartitionStrategy::LevelSets => {
            let mut bands: std::collections::BTreeMap<i32, Vec<(T, Aabb)>> =
                std::collections::BTreeMap::new();
            for t in f.terms() {
                let band = t.value.abs().to_f64c().log2().floor() as i32;
                bands
                    .entry(band)
                    .or_default()
                    .push((t.value, t.region.clone()));
            }
            bands
                .into_values()
                .map(|terms| SimpleFunction::from_terms(f.dim(), terms))
                .collect()
        }
    }
}

/// For each partition strategy and each piece `h`, picks the scale
/// `rho*` minimising the dilated amalgam norm
/// `c(rho) = ||St_(1/rho) h||_(q',p';1)` over the grid (smallest
/// minimiser on ties) and emits the term `(c, rho*, St_(1/rho*) h / c)`.
/// Returns the cheapest strategy. The identity strategy at `rho = 1`
/// reproduces the trivial bound, so the result never exceeds it.
pub fn scale_optimized_bound<T: Real>(
    f: &SimpleFunction<T>,
    exps: &Exponents,
    grid: &ScaleGrid,
    strategies: &[PartitionStrategy],
) -> Result<(HDecomposition<T>, T)> {
    if f.is_zero() {
        return Err(Error::EmptySupport);
    }
    exps.require_ordered()?;
    let dual = exps.dual();
    let alpha_conj = dual.alpha().clone();
    let mut points = grid.points();
    if !points.contains(&rat_int(1)) {
        points.push(rat_int(1));
        points.sort();
    }

    let mut best: Option<(HDecomposition<T>, T)> = None;
    for &strategy in strategies {
        let pieces = split_pieces(f, strategy)?;
        let mut terms = Vec::with_capacity(pieces.len());
        let mut cost = Accumulator::new();
        for piece in &pieces {
            let costs: Vec<T> = points
                .par_iter()
                .map(|rho| {
                    let shrunk = piece.dilate(&rho.recip(), &alpha_conj)?;
                    amalgam_norm(&shrunk, dual.q(), dual.p(), &rat_int(1))
                })
                .collect::<Result<_>>()?;
            let mut bi = 0usize;
            for (i, c) in costs.iter().enumerate() {
                if *c < costs[bi] {
                    bi = i;
                }
            }
            let c = costs[bi];
            let rho_star = points[bi].clone();
            let atom = piece
                .dilate(&rho_star.recip(), &alpha_conj)?
                .scaled(c.recip());
            cost.add(c);
            terms.push(HTerm {
                coef: c,
                rho: rho_star,
                atom,
            });
        }
        let total = cost.total();
        let dec = HDecomposition::new(exps.clone(), f.dim(), terms)?;
        match &best {
            Some((_, b)) if *b <= total => {}
            _ => best = Some((dec, total)),
        }
    }
    best.ok_or_else(|| Error::InvalidExponent("no partition strategy supplied".into()))
}

/// Result of the duality lower bound. `lower` is the best quotient
/// `|<f,g>| / fofana(g)` over the witnesses; it is only a true lower
/// bound when `certified` (the winning witness norm was exact).
/// `certified_lower` carries the best quotient among exact-norm
/// witnesses regardless of which quotient is globally largest.
#[derive(Clone, Debug)]
pub struct DualBound<T> {
    pub lower: T,
    pub certified: bool,
    pub best_witness: Option<usize>,
    pub certified_lower: Option<(T, usize)>,
}

pub fn dual_lower_bound<T: Real>(
    f: &SimpleFunction<T>,
    exps: &Exponents,
    witnesses: &[SimpleFunction<T>],
    grid: &ScaleGrid,
) -> Result<DualBound<T>> {
    dual_lower_bound_refined(f, exps, witnesses, grid, 12)
}

fn dual_lower_bound_refined<T: Real>(
    f: &SimpleFunction<T>,
    exps: &Exponents,
    witnesses: &[SimpleFunction<T>],
    grid: &ScaleGrid,
    refine_iters: u32,
) -> Result<DualBound<T>> {
    exps.require_ordered()?;
    let cfg = GridConfig::default();
    let quotients: Vec<Option<(T, bool)>> = witnesses
        .par_iter()
        .map(|g| {
            if g.is_zero() || g.dim() != f.dim() {
                return Ok(None);
            }
            // extend the grid by the witness's own natural scales so the
            // exact-attainment rules can fire for it
            let wgrid = match auto_grid(g, exps, &cfg) {
                Ok(ag) => grid.with_mandatory(ag.mandatory().iter().cloned()),
                Err(_) => grid.clone(),
            };
            let est = fofana_norm(g, exps, &wgrid, refine_iters)?;
            if est.value <= T::zero() {
                return Ok(None);
            }
            let quotient = f.pairing(g)?.abs() / est.value;
            Ok(Some((quotient, est.exact)))
        })
        .collect::<Result<_>>()?;

    let mut lower = T::zero();
    let mut best_witness = None;
    let mut certified = false;
    let mut certified_lower: Option<(T, usize)> = None;
    for (i, q) in quotients.iter().enumerate() {
        let Some((value, exact)) = q else { continue };
        if *value > lower {
            lower = *value;
            best_witness = Some(i);
            certified = *exact;
        }
        if *exact {
            match &certified_lower {
                Some((v, _)) if v >= value => {}
                _ => certified_lower = Some((*value, i)),
            }
        }
    }
    Ok(DualBound {
        lower,
        certified,
        best_witness,
        certified_lower,
    })
}

/// Deterministic witness family for the duality lower bound: `f` itself,
/// a handful of its dilates, the best-mass lattice cube indicator at each
/// mandatory scale, the signed power `sign(f) |f|^(q-1)`, and a few
/// seeded random lattice cubes inside the support.
pub fn generate_witnesses<T: Real>(
    f: &SimpleFunction<T>,
    exps: &Exponents,
    grid: &ScaleGrid,
    seed: u64,
) -> Result<Vec<SimpleFunction<T>>> {
    let mut out = vec![f.clone()];

    if let Some(qr) = exps.q().as_rat() {
        if !qr.is_one() {
            let e = T::from_rat(&(qr - rat_int(1)));
            let powered: Vec<(T, Aabb)> = f
                .terms()
                .iter()
                .map(|t| (t.value.signum() * t.value.abs().powf(e), t.region.clone()))
                .collect();
            out.push(SimpleFunction::from_terms(f.dim(), powered)?);
        } else {
            let signs: Vec<(T, Aabb)> = f
                .terms()
                .iter()
                .map(|t| (t.value.signum(), t.region.clone()))
                .collect();
            out.push(SimpleFunction::from_terms(f.dim(), signs)?);
        }
    }

    let mut dilate_scales: Vec<Rat> = grid
        .mandatory()
        .iter()
        .filter(|r| **r != rat_int(1))
        .take(2)
        .cloned()
        .collect();
    dilate_scales.extend(dilate_scales.clone().iter().map(|r| r.recip()));
    for rho in dilate_scales {
        out.push(f.dilate(&rho, exps.alpha())?);
    }

    for s in grid.mandatory().iter().take(8) {
        let cells = lattice_cell_integrals(f, s)?;
        let best = cells.iter().max_by(|a, b| {
            a.1.abs()
                .partial_cmp(&b.1.abs())
                .expect("finite integrals")
        });
        if let Some((k, mass)) = best {
            if !mass.is_zero() {
                out.push(SimpleFunction::indicator(Aabb::lattice_cell(k, s)?));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extent = f.support_extent()?;
    for _ in 0..4 {
        let j: i64 = rng.gen_range(-3..=2);
        let s = if j >= 0 {
            rat_int(1 << j as u32)
        } else {
            Rat::new(BigInt::one(), BigInt::from(1i64 << (-j) as u32))
        };
        let k: Vec<i64> = (0..f.dim())
            .map(|axis| {
                let lo = crate::rational::rat_floor_i64(&(&extent.lo()[axis] / &s));
                let hi = crate::rational::rat_floor_i64(&(&extent.hi()[axis] / &s));
                rng.gen_range(lo..=hi.max(lo))
            })
            .collect();
        out.push(SimpleFunction::indicator(Aabb::lattice_cell(&k, &s)?));
    }

    Ok(out)
}

/// Two-sided estimate of the decomposition norm.
#[derive(Clone, Debug)]
pub struct SandwichResult<T> {
    pub lower: T,
    /// Whether `lower` came from a witness with an exact norm. When no
    /// certified witness produced a positive quotient, `lower` is the
    /// best heuristic quotient clamped to `upper`.
    pub lower_certified: bool,
    pub upper: T,
    pub best_decomposition: HDecomposition<T>,
    pub best_witness: Option<SimpleFunction<T>>,
}

#[derive(Clone, Debug)]
pub struct SandwichConfig {
    pub grid: GridConfig,
    pub strategies: Vec<PartitionStrategy>,
    pub refine_iters: u32,
    pub seed: u64,
}

impl Default for SandwichConfig {
    fn default() -> Self {
        SandwichConfig {
            grid: GridConfig::default(),
            strategies: ALL_STRATEGIES.to_vec(),
            refine_iters: 16,
            seed: 0,
        }
    }
}

pub fn hnorm_sandwich<T: Real>(
    f: &SimpleFunction<T>,
    exps: &Exponents,
    cfg: &SandwichConfig,
) -> Result<SandwichResult<T>> {
    if f.is_zero() {
        return Err(Error::EmptySupport);
    }
    exps.require_ordered()?;
    let grid = auto_grid(f, exps, &cfg.grid)?;

    let trivial = trivial_decomposition(f, exps)?;
    let trivial_cost = trivial.coef_abs_sum();
    let (opt_dec, opt_cost) = scale_optimized_bound(f, exps, &grid, &cfg.strategies)?;
    let (best_decomposition, upper) = if opt_cost <= trivial_cost {
        (opt_dec, opt_cost)
    } else {
        (trivial, trivial_cost)
    };

    let witnesses = generate_witnesses(f, exps, &grid, cfg.seed)?;
    let dual = dual_lower_bound_refined(f, exps, &witnesses, &grid, cfg.refine_iters)?;

    let (lower, lower_certified, widx) = match dual.certified_lower {
        Some((v, i)) => (v, true, Some(i)),
        None => (dual.lower.min(upper), false, dual.best_witness),
    };
    Ok(SandwichResult {
        lower,
        lower_certified,
        upper,
        best_decomposition,
        best_witness: widx.map(|i| witnesses[i].clone()),
    })
}

#[derive(Clone, Debug)]
pub struct PairingTermCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct PairingReport<T> {
    pub terms: Vec<PairingTermCheck<T>>,
    pub aggregate_lhs: T,
    pub aggregate_rhs: T,
    pub ok: bool,
}

/// Term-by-term duality chain for a decomposition against a fixed `g`:
/// `|c_n| |<St_(rho_n) atom_n, g>|
///  <= |c_n| ||atom_n||_(q',p') ||St_(1/rho_n) g||_(q,p)`
/// and in aggregate
/// `|<synthesize(dec), g>| <= sum|c_n| * max_n ||St_(1/rho_n) g||_(q,p)`.
pub fn pairing_bound_check<T: Real>(
    dec: &HDecomposition<T>,
    g: &SimpleFunction<T>,
) -> Result<PairingReport<T>> {
    if g.dim() != dec.dim {
        return Err(Error::DimensionMismatch {
            expected: dec.dim,
            got: g.dim(),
        });
    }
    let exps = &dec.exps;
    let dual = exps.dual();
    let alpha_conj = exps.alpha_conj();
    let tol = roundoff_tol::<T>();
    let one = rat_int(1);

    let mut terms = Vec::with_capacity(dec.terms.len());
    let mut max_g_norm = T::zero();
    for t in &dec.terms {
        let dilated = t.atom.dilate(&t.rho, &alpha_conj)?;
        let lhs = t.coef.abs() * dilated.pairing(g)?.abs();
        let atom_norm = amalgam_norm(&t.atom, dual.q(), dual.p(), &one)?;
        let g_norm = amalgam_norm(
            &g.dilate(&t.rho.recip(), exps.alpha())?,
            exps.q(),
            exps.p(),
            &one,
        )?;
        max_g_norm = max_g_norm.max(g_norm);
        let rhs = t.coef.abs() * atom_norm * g_norm;
        terms.push(PairingTermCheck {
            lhs,
            rhs,
            ok: lhs <= rhs + tol * (T::one() + rhs),
        });
    }

    let aggregate_lhs = synthesize(dec)?.pairing(g)?.abs();
    let aggregate_rhs = dec.coef_abs_sum() * max_g_norm;
    let ok = terms.iter().all(|t| t.ok)
        && aggregate_lhs <= aggregate_rhs + tol * (T::one() + aggregate_rhs);
    Ok(PairingReport {
        terms,
        aggregate_lhs,
        aggregate_rhs,
        ok,
    })
}

/// A Morrey-type atom: `coef * a` with `a` supported in the interval
/// around `center` of the given `radius` and obeying the size bound
/// `||a||_(q') <= |B|^(-(d - lambda)/(d q))`, `lambda = d q / alpha`.
#[derive(Clone, Debug)]
pub struct ZorkoAtom<T> {
    pub coef: T,
    pub atom: SimpleFunction<T>,
    pub center: Rat,
    pub radius: Rat,
}

/// Converts Morrey-type atoms (d = 1, `p = inf`, `q < alpha < inf`) into
/// a decomposition: each atom `a_k` becomes the term
/// `(2^d C c_k, r_k, 2^(-d) C^(-1) St_(1/r_k) a_k)` with
/// `C = |B(0,1)|^(1/alpha - 1/q)`. Synthesis reproduces
/// `sum c_k a_k` by the dilation group law, and each produced atom lands
/// inside the unit `(q', 1)` amalgam ball.
pub fn zorko_to_h<T: Real>(atoms: &[ZorkoAtom<T>], exps: &Exponents) -> Result<HDecomposition<T>> {
    if !exps.p().is_infinite() {
        return Err(Error::InvalidExponent(
            "atom conversion requires p = inf".into(),
        ));
    }
    let alpha = exps
        .alpha()
        .as_rat()
        .ok_or_else(|| Error::InvalidExponent("atom conversion requires finite alpha".into()))?;
    let q = exps
        .q()
        .as_rat()
        .ok_or_else(|| Error::InvalidExponent("atom conversion requires finite q".into()))?;
    if q >= alpha {
        return Err(Error::InvalidExponent(format!(
            "atom conversion requires q < alpha, got q={q}, alpha={alpha}"
        )));
    }
    let d = 1usize;
    let q_conj = exps.q_conj();
    let alpha_conj = exps.alpha_conj();

    // C = |B(0,1)|^(1/alpha - 1/q); in d = 1 the unit ball has measure 2
    let c_exp = alpha.recip() - q.recip();
    let c_const: T = T::from_f64c(2.0).powf(T::from_rat(&c_exp));
    let two_d = T::from_f64c((1u32 << d) as f64);
    let atom_scale = two_d.recip() * c_const.recip();
    // lambda = d q / alpha; size bound |B|^(-(d - lambda)/(d q))
    let lambda = q / alpha;
    let bound_exp = -(rat_int(d as i64) - lambda) / (rat_int(d as i64) * q);
    let slack = roundoff_tol::<T>();

    let mut terms = Vec::new();
    for (index, zk) in atoms.iter().enumerate() {
        if zk.atom.dim() != d {
            return Err(Error::NotOneDimensional(zk.atom.dim()));
        }
        if !zk.radius.is_positive() {
            return Err(Error::InvalidAtom {
                index,
                reason: format!("radius must be positive, got {}", zk.radius),
            });
        }
        if zk.atom.is_zero() || zk.coef.is_zero() {
            continue;
        }
        let ext = zk.atom.support_extent()?;
        let lo_ok = ext.lo()[0] >= &zk.center - &zk.radius;
        let hi_ok = ext.hi()[0] <= &zk.center + &zk.radius;
        if !lo_ok || !hi_ok {
            return Err(Error::InvalidAtom {
                index,
                reason: format!(
                    "support {} escapes the interval around {} of radius {}",
                    ext, zk.center, zk.radius
                ),
            });
        }
        let ball_measure = T::from_rat(&(rat_int(2) * &zk.radius));
        let size_bound = ball_measure.powf(T::from_rat(&bound_exp));
        let a_norm = lebesgue_norm(&zk.atom, &q_conj);
        if a_norm > size_bound * (T::one() + slack) {
            return Err(Error::InvalidAtom {
                index,
                reason: format!(
                    "norm {a_norm} exceeds the size bound {size_bound} for radius {}",
                    zk.radius
                ),
            });
        }
        let u = zk.atom.dilate(&zk.radius.recip(), &alpha_conj)?;
        terms.push(HTerm {
            coef: two_d * c_const * zk.coef,
            rho: zk.radius.clone(),
            atom: u.scaled(atom_scale),
        });
    }
    HDecomposition::new(exps.clone(), d, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::Exponent;
    use crate::rational::rat;

    fn exps243() -> Exponents {
        Exponents::from_ints(2, 4, 3).unwrap()
    }

    fn unit_chi() -> SimpleFunction<f64> {
        SimpleFunction::indicator(Aabb::unit_cube(1).unwrap())
    }

    fn chi02() -> SimpleFunction<f64> {
        SimpleFunction::indicator(Aabb::interval(rat_int(0), rat_int(2)).unwrap())
    }

    #[test]
    fn validate_flags_oversized_atoms() {
        let e = exps243();
        let good = HDecomposition::new(
            e.clone(),
            1,
            vec![HTerm {
                coef: 1.0,
                rho: rat_int(1),
                atom: unit_chi(),
            }],
        )
        .unwrap();
        let rep = validate(&good);
        assert!(rep.valid);
        assert_eq!(rep.coef_abs_sum, 1.0);

        let bad = HDecomposition::new(
            e.clone(),
            1,
            vec![HTerm {
                coef: 1.0,
                rho: rat_int(1),
                atom: unit_chi().scaled(2.0),
            }],
        )
        .unwrap();
        let rep = validate(&bad);
        assert!(!rep.valid);
        assert!((rep.terms[0].atom_norm - 2.0).abs() < 1e-12);

        let empty = HDecomposition::<f64>::new(e, 1, vec![]).unwrap();
        let rep = validate(&empty);
        assert!(rep.valid);
        assert_eq!(rep.coef_abs_sum, 0.0);
        assert!(synthesize(&empty).unwrap().is_zero());
    }

    #[test]
    fn synthesize_applies_conjugate_dilation() {
        // exps (1, inf, 2): alpha' = 2; sqrt(2) St_2 chi_[0,1) = chi_[0,2)
        let e = Exponents::new(
            Exponent::one(),
            Exponent::Infinite,
            Exponent::from_int(2).unwrap(),
        );
        let dec = HDecomposition::new(
            e,
            1,
            vec![HTerm {
                coef: 2.0f64.sqrt(),
                rho: rat_int(2),
                atom: unit_chi(),
            }],
        )
        .unwrap();
        let s = synthesize(&dec).unwrap();
        assert!(s.sup_abs_diff(&chi02()).unwrap() < 1e-15);

        let plain = HDecomposition::new(
            exps243(),
            1,
            vec![HTerm {
                coef: 3.0,
                rho: rat_int(1),
                atom: unit_chi(),
            }],
        )
        .unwrap();
        assert!(synthesize(&plain)
            .unwrap()
            .sup_abs_diff(&unit_chi().scaled(3.0))
            .unwrap()
            .abs()
            < 1e-15);

        let cancel = HDecomposition::new(
            exps243(),
            1,
            vec![
                HTerm {
                    coef: 1.0,
                    rho: rat_int(1),
                    atom: unit_chi(),
                },
                HTerm {
                    coef: -1.0,
                    rho: rat_int(1),
                    atom: unit_chi(),
                },
            ],
        )
        .unwrap();
        assert!(synthesize(&cancel).unwrap().is_zero());
    }

    #[test]
    fn trivial_decomposition_normalises_and_reconstructs() {
        let e = exps243();
        let f = unit_chi().scaled(3.0);
        let dec = trivial_decomposition(&f, &e).unwrap();
        assert_eq!(dec.terms().len(), 1);
        assert!((dec.terms()[0].coef - 3.0).abs() < 1e-12);
        assert!(validate(&dec).valid);
        assert!(synthesize(&dec).unwrap().sup_abs_diff(&f).unwrap() < 1e-12);

        // chi_[0,2): ||.||_{2,4/3} = 2^(3/4)
        let dec2 = trivial_decomposition(&chi02(), &e).unwrap();
        assert!((dec2.terms()[0].coef - 2.0f64.powf(0.75)).abs() < 1e-12);

        assert!(trivial_decomposition(&SimpleFunction::<f64>::zero(1).unwrap(), &e).is_err());
    }

    #[test]
    fn scale_optimized_beats_trivial_on_wide_support() {
        let e = exps243();
        let grid = auto_grid(&chi02(), &e, &GridConfig::default()).unwrap();
        let (dec, upper) =
            scale_optimized_bound(&chi02(), &e, &grid, &ALL_STRATEGIES).unwrap();
        let expect = 2.0f64.powf(2.0 / 3.0);
        assert!((upper - expect).abs() < 1e-10, "upper={upper}");
        assert!(validate(&dec).valid);
        // winning term sits at scale 2
        assert_eq!(dec.terms()[0].rho, rat_int(2));
        assert!(synthesize(&dec).unwrap().sup_abs_diff(&chi02()).unwrap() < 1e-12);

        let grid_unit = auto_grid(&unit_chi(), &e, &GridConfig::default()).unwrap();
        let (_, u1) = scale_optimized_bound(&unit_chi(), &e, &grid_unit, &ALL_STRATEGIES).unwrap();
        assert!((u1 - 1.0).abs() < 1e-12);

        let scaledf = unit_chi().scaled(2.5);
        let gs = auto_grid(&scaledf, &e, &GridConfig::default()).unwrap();
        let (_, us) = scale_optimized_bound(&scaledf, &e, &gs, &ALL_STRATEGIES).unwrap();
        assert!((us - 2.5).abs() < 1e-10);
    }

    #[test]
    fn dual_lower_bound_certifies_exact_witnesses() {
        let e = exps243();
        let grid = auto_grid(&unit_chi(), &e, &GridConfig::default()).unwrap();
        let d = dual_lower_bound(&unit_chi(), &e, &[unit_chi()], &grid).unwrap();
        assert!((d.lower - 1.0).abs() < 1e-12);
        assert!(d.certified);
        assert_eq!(d.best_witness, Some(0));

        // witness 2^(-1/3) chi_[0,2) has exact norm 1; pairing 2^(2/3)
        let w = chi02().scaled(2.0f64.powf(-1.0 / 3.0));
        let g2 = auto_grid(&chi02(), &e, &GridConfig::default()).unwrap();
        let d2 = dual_lower_bound(&chi02(), &e, &[w], &g2).unwrap();
        assert!((d2.lower - 2.0f64.powf(2.0 / 3.0)).abs() < 1e-10);
        assert!(d2.certified);

        // orthogonal witness contributes zero
        let far = SimpleFunction::indicator(Aabb::interval(rat_int(5), rat_int(6)).unwrap());
        let d3 = dual_lower_bound(&unit_chi(), &e, &[far], &grid).unwrap();
        assert_eq!(d3.lower, 0.0);
        assert_eq!(d3.best_witness, None);
    }

    #[test]
    fn sandwich_is_tight_on_cube_indicators() {
        let e = exps243();
        let cfg = SandwichConfig::default();
        let s1 = hnorm_sandwich(&unit_chi(), &e, &cfg).unwrap();
        assert!((s1.lower - 1.0).abs() < 1e-10);
        assert!((s1.upper - 1.0).abs() < 1e-10);
        assert!(s1.lower_certified);

        let s2 = hnorm_sandwich(&chi02(), &e, &cfg).unwrap();
        let expect = 2.0f64.powf(2.0 / 3.0);
        assert!((s2.lower - expect).abs() < 1e-10, "lower={}", s2.lower);
        assert!((s2.upper - expect).abs() < 1e-10, "upper={}", s2.upper);

        let s3 = hnorm_sandwich(&unit_chi().scaled(3.0), &e, &cfg).unwrap();
        assert!((s3.lower - 3.0).abs() < 1e-10);
        assert!((s3.upper - 3.0).abs() < 1e-10);

        for s in [&s1, &s2, &s3] {
            assert!(s.lower <= s.upper + 1e-10);
            assert!(validate(&s.best_decomposition).valid);
        }
    }

    #[test]
    fn transported_decompositions_stay_valid_at_equal_cost() {
        let e = exps243();
        let f: SimpleFunction<f64> = SimpleFunction::from_terms(
            1,
            vec![
                (1.0, Aabb::interval(rat_int(0), rat_int(1)).unwrap()),
                (-0.5, Aabb::interval(rat_int(1), rat_int(3)).unwrap()),
            ],
        )
        .unwrap();
        let grid = auto_grid(&f, &e, &GridConfig::default()).unwrap();
        let (dec, cost) = scale_optimized_bound(&f, &e, &grid, &ALL_STRATEGIES).unwrap();
        let rho0 = rat(3, 2);
        let moved = dec.transported(&rho0).unwrap();
        assert_eq!(moved.coef_abs_sum(), cost);
        assert!(validate(&moved).valid);
        let target = f.dilate(&rho0, &e.alpha_conj()).unwrap();
        let synth = synthesize(&moved).unwrap();
        assert!(synth.sup_abs_diff(&target).unwrap() < 1e-12 * (1.0 + 1.0));
    }

    #[test]
    fn pairing_bounds_hold_with_exact_cases() {
        let e = exps243();
        let dec = trivial_decomposition(&unit_chi(), &e).unwrap();
        let rep = pairing_bound_check(&dec, &unit_chi()).unwrap();
        assert!(rep.ok);
        assert!((rep.terms[0].lhs - 1.0).abs() < 1e-12);
        assert!((rep.terms[0].rhs - 1.0).abs() < 1e-12);

        // the worked two-sided example: both sides equal 2
        let e2 = Exponents::new(
            Exponent::one(),
            Exponent::Infinite,
            Exponent::from_int(2).unwrap(),
        );
        let dec2 = HDecomposition::new(
            e2,
            1,
            vec![HTerm {
                coef: 2.0f64.sqrt(),
                rho: rat_int(2),
                atom: unit_chi(),
            }],
        )
        .unwrap();
        let rep2 = pairing_bound_check(&dec2, &chi02()).unwrap();
        assert!(rep2.ok);
        assert!((rep2.terms[0].lhs - 2.0).abs() < 1e-12);
        assert!((rep2.terms[0].rhs - 2.0).abs() < 1e-12);

        // orthogonal g
        let far = SimpleFunction::indicator(Aabb::interval(rat_int(7), rat_int(8)).unwrap());
        let rep3 = pairing_bound_check(&dec, &far).unwrap();
        assert!(rep3.ok);
        assert_eq!(rep3.aggregate_lhs, 0.0);
    }

    #[test]
    fn zorko_conversion_matches_worked_example() {
        // d=1, q=2, alpha=4, p=inf; a = 2^(-3/4) chi_[-1,1), c=1, r=1
        let e = Exponents::new(
            Exponent::from_int(2).unwrap(),
            Exponent::Infinite,
            Exponent::from_int(4).unwrap(),
        );
        let a = SimpleFunction::<f64>::indicator(
            Aabb::interval(rat_int(-1), rat_int(1)).unwrap(),
        )
        .scaled(2.0f64.powf(-0.75));
        let atoms = vec![ZorkoAtom {
            coef: 1.0,
            atom: a.clone(),
            center: rat_int(0),
            radius: rat_int(1),
        }];
        let dec = zorko_to_h(&atoms, &e).unwrap();
        assert_eq!(dec.terms().len(), 1);
        let rep = validate(&dec);
        assert!(rep.valid);
        assert!((rep.terms[0].atom_norm - 2.0f64.powf(-0.5)).abs() < 1e-9);
        // coefficient 2^d C = 2 * 2^(-1/4) = 2^(3/4)
        assert!((dec.terms()[0].coef - 2.0f64.powf(0.75)).abs() < 1e-12);
        // synthesis reproduces sum c_k a_k
        assert!(synthesize(&dec).unwrap().sup_abs_diff(&a).unwrap() < 1e-12);

        // support escape
        let bad = vec![ZorkoAtom {
            coef: 1.0,
            atom: a.clone(),
            center: rat_int(0),
            radius: rat(1, 2),
        }];
        assert!(matches!(
            zorko_to_h(&bad, &e),
            Err(Error::InvalidAtom { .. })
        ));

        // size bound violated
        let fat = vec![ZorkoAtom {
            coef: 1.0,
            atom: a.scaled(10.0),
            center: rat_int(0),
            radius: rat_int(1),
        }];
        assert!(matches!(
            zorko_to_h(&fat, &e),
            Err(Error::InvalidAtom { .. })
        ));

        // zero atom contributes nothing
        let zero = vec![ZorkoAtom {
            coef: 1.0,
            atom: SimpleFunction::<f64>::zero(1).unwrap(),
            center: rat_int(0),
            radius: rat_int(1),
        }];
        assert!(zorko_to_h(&zero, &e).unwrap().terms().is_empty());

        // exponent gates
        let badp = exps243();
        assert!(zorko_to_h::<f64>(&[], &badp).is_err());
    }
}
