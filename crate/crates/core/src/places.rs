//! Places of K = Q(α) relevant to the contracting space: the contracting
//! archimedean places, the finite places at primes dividing (α), the map
//! Φ′ into the contracting space, the metric d_K, and the product formula
//! self-check.
//!
//! Finite-place arithmetic works in the order Z[α] and is only offered at
//! primes where the Dedekind criterion certifies p ∤ [𝔒_K : Z[α]]; other
//! primes raise an explicit "unsupported field" error.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use num::Integer;

use crate::error::{Error, Result};
use crate::exact::{Disk, RatInterval};
use crate::modp::{factor_mod_p, PrimePoly};
use crate::nfield::{FieldElem, NumberField};
use crate::poly::IntPoly;

/// A finite place 𝔭 = (p, g(α)) with v_𝔭(α) = nu ≥ 1.
#[derive(Clone, Debug)]
pub struct FinitePlace {
    pub p: u64,
    pub residue_degree: usize,
    pub ramification: usize,
    /// monic lift of the irreducible factor of the minimal polynomial mod p
    pub generator: IntPoly,
    /// 𝔑(𝔭) = p^residue_degree
    pub norm_q: BigInt,
    /// v_𝔭(α)
    pub nu: i64,
}

/// Memoized norms and ideal-power lattices used by valuation computations.
#[derive(Debug, Default)]
pub struct FieldNormCache {
    norms: Mutex<HashMap<FieldElem, BigRational>>,
    lattices: Mutex<HashMap<(u64, Vec<BigInt>, usize), Arc<Vec<Vec<BigInt>>>>>,
}

/// The contracting place system 𝔐 (plus the recorded expanding place v₁).
#[derive(Debug)]
pub struct PlaceSystem {
    pub field: Arc<NumberField>,
    /// index into field.roots.locs of the Perron root (the expanding place)
    pub expanding_root: usize,
    /// contracting archimedean places as root indices (a conjugate pair is
    /// a single place)
    pub arch_contracting: Vec<usize>,
    pub finite: Vec<FinitePlace>,
    cache: FieldNormCache,
}

/// A point of the contracting space K_σ: archimedean coordinates with error
/// disks, finite coordinates as (partial sum, precision level). Level None
/// means the coordinate is exact; level m means the true value differs by an
/// element of valuation ≥ ν·m.
#[derive(Clone, Debug)]
pub struct RepPoint {
    pub arch: Vec<Disk>,
    pub fin: Vec<FinCoord>,
}

#[derive(Clone, Debug)]
pub struct FinCoord {
    pub partial: FieldElem,
    pub level: Option<u64>,
}

fn lift_monic(f: &PrimePoly) -> IntPoly {
    IntPoly::new(f.coeffs.iter().map(|&c| BigInt::from(c)).collect())
}

fn prime_mul_all(p: u64, fs: &[PrimePoly]) -> PrimePoly {
    let mut out = PrimePoly::one(p);
    for f in fs {
        out = out.mul(f);
    }
    out
}

/// Dedekind criterion + factorization: all prime ideals of 𝔒_K above p,
/// with v_𝔭(α) computed for each. Errors if p may divide the index.
pub fn places_above(field: &NumberField, cache: &FieldNormCache, p: u64) -> Result<Vec<FinitePlace>> {
    let fbar = PrimePoly::from_int(&field.minpoly, p);
    if fbar.deg() != field.n {
        // minpoly is monic so this cannot happen
        return Err(Error::UnsupportedField(p));
    }
    let factors = factor_mod_p(&fbar);
    // Dedekind: f ≡ g*·h* mod p with g* the radical; p is index-free iff
    // gcd((g*h* - f)/p, g*, h*) = 1 mod p
    let gbar = prime_mul_all(p, &factors.iter().map(|(g, _)| g.clone()).collect::<Vec<_>>());
    let hbar = fbar.div_rem(&gbar).0;
    let g_lift = lift_monic(&gbar);
    let h_lift = lift_monic(&hbar);
    let prod = g_lift.mul(&h_lift);
    let diff = prod.sub(&field.minpoly);
    let t = IntPoly::new(
        diff.coeffs
            .iter()
            .map(|c| {
                debug_assert!(c.is_multiple_of(&BigInt::from(p)));
                c / BigInt::from(p)
            })
            .collect(),
    );
    let tbar = PrimePoly::from_int(&t, p);
    let d = tbar.gcd(&gbar).gcd(&hbar);
    if d.deg() > 0 {
        return Err(Error::UnsupportedField(p));
    }
    let mut out = vec![];
    for (g, e) in &factors {
        let generator = lift_monic(g);
        let f_deg = g.deg();
        let mut place = FinitePlace {
            p,
            residue_degree: f_deg,
            ramification: *e,
            generator,
            norm_q: BigInt::from(p).pow(f_deg as u32),
            nu: 0,
        };
        place.nu = valuation_int(field, cache, &place, &alpha_vec(field))?;
        out.push(place);
    }
    Ok(out)
}

fn alpha_vec(field: &NumberField) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); field.n];
    v[1] = BigInt::one();
    v
}

/// Column-style Hermite reduction: returns n pivot columns, where pivot i
/// has its first nonzero entry at row i (full rank is required and asserted).
fn hnf_basis(n: usize, mut cols: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let mut pivots: Vec<Vec<BigInt>> = vec![];
    for row in 0..n {
        loop {
            // pick the column with smallest nonzero |entry| at this row
            let mut best: Option<usize> = None;
            for (j, c) in cols.iter().enumerate() {
                if !c[row].is_zero()
                    && best.is_none_or(|b| c[row].abs() < cols[b][row].abs())
                {
                    best = Some(j);
                }
            }
            let Some(b) = best else { break };
            let others: Vec<usize> = (0..cols.len())
                .filter(|&j| j != b && !cols[j][row].is_zero())
                .collect();
            if others.is_empty() {
                // b becomes the pivot for this row
                let piv = cols.swap_remove(b);
                pivots.push(piv);
                break;
            }
            for j in others {
                let q = &cols[j][row] / &cols[b][row];
                for i in 0..n {
                    let t = &cols[b][i] * &q;
                    cols[j][i] -= t;
                }
            }
        }
    }
    assert_eq!(pivots.len(), n, "ideal lattice must have full rank");
    // normalize pivot signs
    for (i, p) in pivots.iter_mut().enumerate() {
        if p[i].is_negative() {
            for x in p.iter_mut() {
                *x = -x.clone();
            }
        }
    }
    pivots
}

fn in_lattice(n: usize, basis: &[Vec<BigInt>], x: &[BigInt]) -> bool {
    let mut rem = x.to_vec();
    for (i, b) in basis.iter().enumerate() {
        if rem[i].is_zero() {
            continue;
        }
        if !rem[i].is_multiple_of(&b[i]) {
            return false;
        }
        let q = &rem[i] / &b[i];
        for k in i..n {
            let t = &b[k] * &q;
            rem[k] -= t;
        }
    }
    rem.iter().all(|c| c.is_zero())
}

/// HNF basis of 𝔭^k as a sublattice of Z[α] ≅ Z^n.
fn ideal_power_basis(
    field: &NumberField,
    cache: &FieldNormCache,
    place: &FinitePlace,
    k: usize,
) -> Arc<Vec<Vec<BigInt>>> {
    let key = (place.p, place.generator.coeffs.clone(), k);
    if let Some(b) = cache.lattices.lock().unwrap().get(&key) {
        return b.clone();
    }
    let n = field.n;
    // generators p^i · g(α)^(k-i) · α^j
    let g_elem = FieldElem(
        place
            .generator
            .coeffs
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect::<Vec<_>>()
            .into_iter()
            .chain(std::iter::repeat(BigRational::zero()))
            .take(n)
            .collect(),
    );
    let mut g_pows = vec![field.one()];
    for _ in 0..k {
        let last = g_pows.last().unwrap().clone();
        g_pows.push(field.mul(&last, &g_elem));
    }
    let alpha = field.alpha();
    let mut cols = vec![];
    let pb = BigInt::from(place.p);
    for i in 0..=k {
        let scale = BigRational::from_integer(pb.pow(i as u32));
        let base = field.scale(&g_pows[k - i], &scale);
        let mut cur = base;
        for _ in 0..n {
            cols.push(
                cur.0
                    .iter()
                    .map(|c| {
                        debug_assert!(c.is_integer());
                        c.to_integer()
                    })
                    .collect(),
            );
            cur = field.mul(&cur, &alpha);
        }
    }
    let basis = Arc::new(hnf_basis(n, cols));
    cache
        .lattices
        .lock()
        .unwrap()
        .insert(key, basis.clone());
    basis
}

fn cached_norm(field: &NumberField, cache: &FieldNormCache, x: &FieldElem) -> BigRational {
    if let Some(v) = cache.norms.lock().unwrap().get(x) {
        return v.clone();
    }
    let v = field.norm(x);
    cache.norms.lock().unwrap().insert(x.clone(), v.clone());
    v
}

fn vp_int(mut x: BigInt, p: u64) -> i64 {
    let pb = BigInt::from(p);
    let mut v = 0;
    while !x.is_zero() && x.is_multiple_of(&pb) {
        x /= &pb;
        v += 1;
    }
    v
}

/// v_𝔭(x) for x ∈ Z[α] given by an integer coefficient vector, x ≠ 0.
fn valuation_int(
    field: &NumberField,
    cache: &FieldNormCache,
    place: &FinitePlace,
    x: &[BigInt],
) -> Result<i64> {
    if x.iter().all(|c| c.is_zero()) {
        return Err(Error::Hypothesis("valuation of zero".into()));
    }
    let xe = FieldElem(x.iter().map(|c| BigRational::from_integer(c.clone())).collect());
    let nrm = cached_norm(field, cache, &xe);
    debug_assert!(nrm.is_integer());
    let cap = vp_int(nrm.to_integer().abs(), place.p);
    let mut v = 0i64;
    while v < cap + 1 {
        let basis = ideal_power_basis(field, cache, place, (v + 1) as usize);
        if in_lattice(field.n, &basis, x) {
            v += 1;
        } else {
            break;
        }
    }
    Ok(v)
}

impl PlaceSystem {
    /// Build 𝔐 from the field and det M_σ: contracting archimedean places
    /// plus the finite places with v_𝔭(α) ≥ 1 at primes dividing |det|.
    pub fn build(field: Arc<NumberField>, det_m: &BigInt) -> Result<PlaceSystem> {
        let expanding_root = field.perron_index();
        let arch_contracting: Vec<usize> = (0..field.roots.locs.len())
            .filter(|&i| i != expanding_root)
            .collect();
        let cache = FieldNormCache::default();
        let mut finite = vec![];
        let det_abs = det_m.abs();
        debug_assert_eq!(det_abs, field.minpoly.constant_term().abs());
        if det_abs > BigInt::one() {
            for (p, _) in trial_factor(&det_abs)? {
                for place in places_above(&field, &cache, p)? {
                    if place.nu >= 1 {
                        finite.push(place);
                    }
                }
            }
            // N((α)) = ∏ q^ν must reproduce |det M|
            let prod: BigInt = finite
                .iter()
                .map(|pl| pl.norm_q.pow(pl.nu as u32))
                .product();
            if prod != det_abs {
                return Err(Error::Hypothesis(format!(
                    "ideal factorization of (α) has norm {}, expected {}",
                    prod, det_abs
                )));
            }
        }
        Ok(PlaceSystem {
            field,
            expanding_root,
            arch_contracting,
            finite,
            cache,
        })
    }

    /// v_𝔭(x) for a nonzero x with any rational denominators.
    pub fn finite_valuation(&self, x: &FieldElem, place_idx: usize) -> Result<i64> {
        let place = &self.finite[place_idx];
        finite_valuation_at(&self.field, &self.cache, place, x)
    }

    /// |x|_v = q^{-v(x)} at a finite place, as an exact rational.
    pub fn finite_abs(&self, x: &FieldElem, place_idx: usize) -> Result<BigRational> {
        if x.is_zero() {
            return Ok(BigRational::zero());
        }
        let v = self.finite_valuation(x, place_idx)?;
        let q = BigRational::from_integer(self.finite[place_idx].norm_q.clone());
        Ok(pow_rat(&q, -v))
    }

    /// Φ′(x): all contracting coordinates of a field element.
    pub fn phi_prime(&self, x: &FieldElem) -> RepPoint {
        let arch = self
            .arch_contracting
            .iter()
            .map(|&i| self.field.embed(x, &self.field.roots.locs[i]))
            .collect();
        let fin = self
            .finite
            .iter()
            .map(|_| FinCoord {
                partial: x.clone(),
                level: None,
            })
            .collect();
        RepPoint { arch, fin }
    }

    /// The metric d_K: max over contracting places of the coordinate
    /// distances, as an interval (exact at finite places).
    pub fn dk(&self, x: &RepPoint, y: &RepPoint) -> Result<RatInterval> {
        if x.arch.len() != self.arch_contracting.len() || x.fin.len() != self.finite.len() {
            return Err(Error::Hypothesis("place system mismatch".into()));
        }
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        for (a, b) in x.arch.iter().zip(&y.arch) {
            let d = a.sub(b);
            lo = lo.max(d.abs_lower());
            hi = hi.max(d.abs_upper());
        }
        for (i, (a, b)) in x.fin.iter().zip(&y.fin).enumerate() {
            let place = &self.finite[i];
            let nu = place.nu;
            let level_bound = match (a.level, b.level) {
                (None, None) => None,
                (la, lb) => {
                    let m = la.unwrap_or(u64::MAX).min(lb.unwrap_or(u64::MAX));
                    Some(nu * m as i64)
                }
            };
            let diff = self.field.sub(&a.partial, &b.partial);
            let v = if diff.is_zero() {
                match level_bound {
                    None => continue, // exactly equal at this place
                    Some(b) => b,
                }
            } else {
                let vd = self.finite_valuation(&diff, i)?;
                match level_bound {
                    None => vd,
                    Some(b) => vd.min(b),
                }
            };
            let q = BigRational::from_integer(place.norm_q.clone());
            let d = pow_rat(&q, -v);
            lo = lo.max(d.clone());
            hi = hi.max(d);
        }
        Ok(RatInterval::new(lo, hi))
    }

    /// Normalized |α|_v per contracting place (complex places squared,
    /// finite places exact): the Haar scaling factors.
    pub fn haar_factors(&self) -> Vec<RatInterval> {
        let alpha = self.field.alpha();
        let mut out = vec![];
        for &i in &self.arch_contracting {
            let loc = &self.field.roots.locs[i];
            let d = self.field.embed(&alpha, loc);
            let (lo, hi) = (d.abs_lower(), d.abs_upper());
            if loc.is_real() {
                out.push(RatInterval::new(lo, hi));
            } else {
                out.push(RatInterval::new(&lo * &lo, &hi * &hi));
            }
        }
        for pl in &self.finite {
            let q = BigRational::from_integer(pl.norm_q.clone());
            out.push(RatInterval::point(pow_rat(&q, -pl.nu)));
        }
        out
    }

    /// Plain (unnormalized) contraction factor per contracting place, as
    /// used by the metric d_K: archimedean modulus, finite q^{-ν}.
    pub fn metric_contractions(&self) -> Vec<RatInterval> {
        let alpha = self.field.alpha();
        let mut out = vec![];
        for &i in &self.arch_contracting {
            let d = self.field.embed(&alpha, &self.field.roots.locs[i]);
            out.push(RatInterval::new(d.abs_lower(), d.abs_upper()));
        }
        for pl in &self.finite {
            let q = BigRational::from_integer(pl.norm_q.clone());
            out.push(RatInterval::point(pow_rat(&q, -pl.nu)));
        }
        out
    }

    /// Number of contracting places (arch + finite).
    pub fn contracting_count(&self) -> usize {
        self.arch_contracting.len() + self.finite.len()
    }

    /// ∏_v |x|_v over ALL places of 𝔐′ plus every finite place dividing
    /// the norm of x; encloses 1 for any nonzero x by the product formula.
    pub fn product_formula_check(&self, x: &FieldElem) -> Result<RatInterval> {
        if x.is_zero() {
            return Err(Error::Hypothesis("product formula needs x != 0".into()));
        }
        let mut lo = BigRational::one();
        let mut hi = BigRational::one();
        for loc in &self.field.roots.locs {
            let d = self.field.embed(x, loc);
            let (l, h) = (d.abs_lower(), d.abs_upper());
            if loc.is_real() {
                lo *= &l;
                hi *= &h;
            } else {
                lo *= &l * &l;
                hi *= &h * &h;
            }
        }
        let nrm = cached_norm(&self.field, &self.cache, x);
        let mut primes: Vec<u64> = vec![];
        for part in [nrm.numer().abs(), nrm.denom().abs()] {
            if part > BigInt::one() {
                for (p, _) in trial_factor(&part)? {
                    if !primes.contains(&p) {
                        primes.push(p);
                    }
                }
            }
        }
        for p in primes {
            for place in places_above(&self.field, &self.cache, p)? {
                let v = finite_valuation_at(&self.field, &self.cache, &place, x)?;
                let q = BigRational::from_integer(place.norm_q.clone());
                let f = pow_rat(&q, -v);
                lo *= &f;
                hi *= &f;
            }
        }
        Ok(RatInterval::new(lo, hi))
    }
}

fn finite_valuation_at(
    field: &NumberField,
    cache: &FieldNormCache,
    place: &FinitePlace,
    x: &FieldElem,
) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::Hypothesis("valuation of zero".into()));
    }
    let mut m = BigInt::one();
    for c in &x.0 {
        m = m.lcm(c.denom());
    }
    let ints: Vec<BigInt> = x
        .0
        .iter()
        .map(|c| c.numer() * (&m / c.denom()))
        .collect();
    let v = valuation_int(field, cache, place, &ints)?;
    Ok(v - place.ramification as i64 * vp_int(m, place.p))
}

fn pow_rat(q: &BigRational, e: i64) -> BigRational {
    let mut out = BigRational::one();
    let base = if e < 0 { q.recip() } else { q.clone() };
    for _ in 0..e.unsigned_abs() {
        out *= &base;
    }
    out
}

/// Factor a positive integer by trial division (desk scale: errors out if a
/// cofactor above 10^12 survives division by primes up to 10^6).
pub fn trial_factor(x: &BigInt) -> Result<Vec<(u64, u32)>> {
    let mut x = x.abs();
    let mut out = vec![];
    let mut p = 2u64;
    while BigInt::from(p) * BigInt::from(p) <= x && p <= 1_000_000 {
        let pb = BigInt::from(p);
        let mut e = 0u32;
        while x.is_multiple_of(&pb) {
            x /= &pb;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if x > BigInt::one() {
        match u64::try_from(&x) {
            Ok(p) if BigInt::from(p) < BigInt::from(1_000_000_000_000u64) => out.push((p, 1)),
            _ => return Err(Error::Cap(format!("cannot factor residual {}", x))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int, to_f64};
    use crate::nfield::{eigen_data, NumberField};
    use crate::subst::parse_substitution;

    fn tribo() -> Arc<NumberField> {
        Arc::new(NumberField::new(IntPoly::from_i64(&[-1, -1, -1, 1])).unwrap())
    }

    fn quad() -> Arc<NumberField> {
        // x^2 - 3x - 2, det = -2
        Arc::new(NumberField::new(IntPoly::from_i64(&[-2, -3, 1])).unwrap())
    }

    fn fib() -> Arc<NumberField> {
        Arc::new(NumberField::new(IntPoly::from_i64(&[-1, -1, 1])).unwrap())
    }

    #[test]
    fn enumerate_tribonacci() {
        let ps = PlaceSystem::build(tribo(), &BigInt::from(1)).unwrap();
        assert_eq!(ps.arch_contracting.len(), 1);
        assert!(ps.finite.is_empty());
        assert!(!ps.field.roots.locs[ps.arch_contracting[0]].is_real());
    }

    #[test]
    fn enumerate_fibonacci() {
        let ps = PlaceSystem::build(fib(), &BigInt::from(-1)).unwrap();
        assert_eq!(ps.arch_contracting.len(), 1);
        assert!(ps.finite.is_empty());
        assert!(ps.field.roots.locs[ps.arch_contracting[0]].is_real());
    }

    #[test]
    fn enumerate_quadratic_det2() {
        let f = quad();
        let ps = PlaceSystem::build(f.clone(), &BigInt::from(-2)).unwrap();
        assert_eq!(ps.arch_contracting.len(), 1);
        assert_eq!(ps.finite.len(), 1);
        let pl = &ps.finite[0];
        assert_eq!(pl.p, 2);
        assert_eq!(pl.norm_q, BigInt::from(2));
        assert_eq!(pl.nu, 1);
        // both primes above 2 exist; only one sees α
        let all = places_above(&f, &FieldNormCache::default(), 2).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all.iter().filter(|p| p.nu >= 1).count(), 1);
    }

    #[test]
    fn valuations_quadratic() {
        let f = quad();
        let ps = PlaceSystem::build(f.clone(), &BigInt::from(-2)).unwrap();
        let alpha = f.alpha();
        assert_eq!(ps.finite_valuation(&alpha, 0).unwrap(), 1);
        let a3 = f.mul(&alpha, &f.mul(&alpha, &alpha));
        assert_eq!(ps.finite_valuation(&a3, 0).unwrap(), 3);
        // v(2) = 1 at each of the two (unramified, split) primes above 2
        let two = f.from_rat(rat_int(2));
        for place in places_above(&f, &FieldNormCache::default(), 2).unwrap() {
            assert_eq!(place.ramification, 1);
            assert_eq!(
                finite_valuation_at(&f, &FieldNormCache::default(), &place, &two).unwrap(),
                1
            );
        }
        // denominators: v(α/2) = 1 - 1 = 0, v(1/2) = -1
        let half_alpha = f.scale(&alpha, &rat(1, 2));
        assert_eq!(ps.finite_valuation(&half_alpha, 0).unwrap(), 0);
        let half = f.from_rat(rat(1, 2));
        assert_eq!(ps.finite_valuation(&half, 0).unwrap(), -1);
    }

    #[test]
    fn phi_prime_and_dk() {
        let f = tribo();
        let ps = PlaceSystem::build(f.clone(), &BigInt::from(1)).unwrap();
        let zero = ps.phi_prime(&f.zero());
        assert!(zero.arch[0].abs_upper().is_zero());
        let one = ps.phi_prime(&f.one());
        assert_eq!(one.arch[0].re, rat_int(1));
        // dK(x, x) = 0
        let d = ps.dk(&one, &one).unwrap();
        assert!(d.hi.is_zero());
        // dK(Φ'(0), Φ'(1)) = 1 at the single complex place
        let d = ps.dk(&zero, &one).unwrap();
        assert!(d.contains(&rat_int(1)) || (d.lo <= rat_int(1) && d.hi >= rat_int(1)));
        // phi_prime(α): complex coordinate is a conjugate root ≈ -0.4196 ± 0.6063i
        let pa = ps.phi_prime(&f.alpha());
        let (re, im) = pa.arch[0].to_f64();
        assert!((re - (-0.41964337)).abs() < 1e-6);
        assert!((im.abs() - 0.60629073).abs() < 1e-6);
    }

    #[test]
    fn dk_finite_levels() {
        let f = quad();
        let ps = PlaceSystem::build(f.clone(), &BigInt::from(-2)).unwrap();
        let x = ps.phi_prime(&f.alpha());
        let mut y = ps.phi_prime(&f.alpha());
        // same partial sums but y only known to level 3: distance ≤ 2^-3
        y.fin[0].level = Some(3);
        let d = ps.dk(&x, &y).unwrap();
        assert_eq!(d.hi, rat(1, 8));
    }

    #[test]
    fn product_formula() {
        let f = quad();
        let ps = PlaceSystem::build(f.clone(), &BigInt::from(-2)).unwrap();
        let chk = ps.product_formula_check(&f.alpha()).unwrap();
        let tol = rat(1, 10_000_000_000i64);
        assert!(chk.lo <= rat_int(1) + tol.clone() && chk.hi >= rat_int(1) - tol.clone());
        assert!(to_f64(&chk.hi) - to_f64(&chk.lo) < 1e-9);
        // exact for rationals
        let chk = ps.product_formula_check(&f.one()).unwrap();
        assert_eq!(chk.lo, rat_int(1));
        assert_eq!(chk.hi, rat_int(1));
        // tribonacci: α |α₂|² = 1
        let t = tribo();
        let pst = PlaceSystem::build(t.clone(), &BigInt::from(1)).unwrap();
        let chk = pst.product_formula_check(&t.alpha()).unwrap();
        assert!(chk.lo <= rat_int(1) && chk.hi >= rat_int(1));
        assert!(to_f64(&chk.hi) - to_f64(&chk.lo) < 1e-9);
    }

    #[test]
    fn haar_product_is_inverse_alpha() {
        for (field, det) in [
            (tribo(), BigInt::from(1)),
            (fib(), BigInt::from(-1)),
            (quad(), BigInt::from(-2)),
        ] {
            let ps = PlaceSystem::build(field.clone(), &det).unwrap();
            let mut lo = BigRational::one();
            let mut hi = BigRational::one();
            for f in ps.haar_factors() {
                lo *= &f.lo;
                hi *= &f.hi;
            }
            let perron = field.perron_interval();
            let inv_lo = rat_int(1) / &perron.hi;
            let inv_hi = rat_int(1) / &perron.lo;
            // intervals for ∏|α|_v and 1/α must overlap tightly
            assert!(lo <= inv_hi && hi >= inv_lo);
            assert!((to_f64(&hi) - to_f64(&inv_lo)).abs() < 1e-9);
        }
    }

    #[test]
    fn lattice_injectivity() {
        // ⟨w, v⟩ = 0 with integer w forces w = 0 (v has independent coords)
        let s = parse_substitution("1->12;2->13;3->1").unwrap();
        let m = s.incidence_matrix();
        let f = Arc::new(NumberField::from_matrix(&m).unwrap());
        let e = eigen_data(&f, &m).unwrap();
        let mut x = 12345u64;
        for _ in 0..1000 {
            let mut w = [0i64; 3];
            for wi in &mut w {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *wi = ((x >> 33) % 21) as i64 - 10;
            }
            if w == [0, 0, 0] {
                continue;
            }
            let mut ip = f.zero();
            for (i, &wi) in w.iter().enumerate() {
                ip = f.add(&ip, &f.scale(&e.v[i], &rat_int(wi)));
            }
            assert!(!ip.is_zero());
        }
    }
}
