//! Ergodic-arithmetic toolkit: the special cylinder 𝒞, d-neighborhood
//! radii, polynomial parts and the adelic Garsia bound, the
//! vanish-or-escape dichotomy, first entry times τ₂ (exact DP and sampled),
//! entry series with b(N_k) counts, and the s_j convergence check.

use std::collections::HashMap;

use num::{BigInt, BigRational, One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::exact::to_f64;
use crate::fractal::{psi_partial, FractalContext};
use crate::markov::{ParryChain, PathState, TransitionMatrix};
use crate::nfield::FieldElem;
use crate::subst::{IntVector, Word};
use crate::tiling::LatticeVec;

/// Cap on the L-sweep when constructing the special cylinder.
pub const L_SEARCH_CAP: usize = 10_000;

/// Cap on the product state space (D·(L+2))² of the τ₂ dynamic program.
pub const TAU2_STATE_CAP: usize = 4_000_000;

/// The special cylinder ⟨I⋯I⟩ of L+1 repeats of the self-looping state
/// I = (u₀:∅), with the primitivity exponent N (A^{N+1} > 0) it was built
/// against.
#[derive(Clone, Debug)]
pub struct SpecialCylinder {
    /// id of the state (u₀:∅)
    pub state: usize,
    pub l: usize,
    pub n_prim: usize,
}

/// The self-looping empty-prefix state (u₀:∅): σ(u₀) starts with u₀.
pub fn fixed_state(states: &[PathState]) -> Result<usize> {
    states
        .iter()
        .position(|st| st.rep.prefix.0.is_empty() && st.rep.source == st.rep.core)
        .ok_or_else(|| {
            Error::Hypothesis("no letter a with σ(a) starting with a; raise the power".into())
        })
}

/// Smallest N with A^{N+1} entrywise positive.
pub fn primitivity_exponent(a: &TransitionMatrix) -> Result<usize> {
    let mut pw = a.0.clone();
    for n in 0..64usize {
        // pw = A^{n+1}
        if pw.is_entrywise_positive() {
            return Ok(n);
        }
        pw = pw.mul(&a.0);
    }
    Err(Error::Hypothesis("A^{n+1} not positive for n ≤ 64".into()))
}

fn rat_pow(q: &BigRational, e: i64) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        out *= q;
    }
    if e < 0 {
        out.recip()
    } else {
        out
    }
}

/// Rational upper bound on x^(1/k) for x ≥ 0 (through f64 with slack).
fn root_upper(x: &BigRational, k: usize) -> BigRational {
    let f = to_f64(x).max(0.0).powf(1.0 / k as f64) * (1.0 + 1e-9) + 1e-300;
    BigRational::from_float(f).unwrap()
}

/// Rational lower bound on x^(1/k) for x ≥ 0.
fn root_lower(x: &BigRational, k: usize) -> BigRational {
    let f = to_f64(x).max(0.0).powf(1.0 / k as f64) * (1.0 - 1e-9);
    BigRational::from_float(f.max(0.0)).unwrap()
}

/// Upper bound on M_v = max |⟨f(p), v(α_v)⟩| over all prefixes, at the
/// root location `ri`.
fn mv_upper(ctx: &FractalContext, ri: usize) -> BigRational {
    let loc = &ctx.field.roots.locs[ri];
    ctx.prefix_coords
        .iter()
        .map(|c| ctx.field.embed(c, loc).abs_upper())
        .fold(BigRational::zero(), |a, b| a.max(b))
}

/// ‖·‖∞ of a field element's power-basis coordinates, rounded up to an
/// integer.
fn coeff_norm(e: &FieldElem) -> BigInt {
    e.0.iter()
        .map(|q| q.abs().ceil().to_integer())
        .fold(BigInt::zero(), |a, b| a.max(b))
}

/// Upper bound M for the coefficients of every polynomial part F(α):
/// writing v = B·(1,α,…,α^{n−1}) with integer B, the α^k summands have
/// coefficient vectors ᵗB(f(p)−f(q)), and the ⟨w,v⟩ term contributes its
/// own power-basis coordinates. M = max prefix-difference norm + max
/// translate norm (at least 1).
pub fn coefficient_bound(ctx: &FractalContext, z0: &[(IntVector, i64)]) -> Result<BigInt> {
    let mut pref = BigInt::zero();
    for i in &ctx.prefix_coords {
        for j in &ctx.prefix_coords {
            pref = pref.max(coeff_norm(&ctx.field.sub(i, j)));
        }
    }
    let mut trans = BigInt::zero();
    for (base, level) in z0 {
        let wv = crate::tiling::lattice_inner(
            ctx,
            &LatticeVec {
                base: base.clone(),
                level: *level as usize,
            },
        )?;
        trans = trans.max(coeff_norm(&wv));
    }
    Ok((pref + trans).max(BigInt::one()))
}

/// Smallest L ≥ N+1 such that for every contracting archimedean place
/// 2|α_v|^{L−n+3}·M_v/(1−|α_v|)·(M/(1−α⁻¹))^{1/(n−1)} + |α_v| < 1
/// and for every finite place 2q^{−ν(L−n+3)} + q^{−ν} < 1, with every
/// quantity replaced by a certified rational upper bound (so the strict
/// inequalities are certified, never straddled).
pub fn special_cylinder(ctx: &FractalContext, m_bound: &BigInt) -> Result<SpecialCylinder> {
    let state = fixed_state(&ctx.states)?;
    let n_prim = primitivity_exponent(&ctx.a)?;
    let n = ctx.field.n;
    let alpha_lo = {
        let iv = ctx.field.perron_interval();
        iv.mid() - iv.radius()
    };
    // upper bound of (M/(1−α⁻¹))^{1/(n−1)}
    let one = BigRational::one();
    let denom_lo = &one - alpha_lo.recip();
    if !denom_lo.is_positive() {
        return Err(Error::Hypothesis("α ≤ 1 after interval widening".into()));
    }
    let g_up = root_upper(
        &(BigRational::from_integer(m_bound.clone()) / denom_lo),
        n - 1,
    );
    // per-place constants
    let arch: Vec<(BigRational, BigRational)> = ctx
        .ps
        .arch_contracting
        .iter()
        .map(|&ri| {
            let au = ctx.field.roots.locs[ri].abs_upper();
            let mv = mv_upper(ctx, ri);
            let c = BigRational::from_integer(BigInt::from(2)) * &mv / (&one - &au) * &g_up;
            (au, c)
        })
        .collect();
    for (au, _) in &arch {
        if au >= &one {
            return Err(Error::Hypothesis(
                "contracting place with |α_v| ≥ 1".into(),
            ));
        }
    }
    let two = BigRational::from_integer(BigInt::from(2));
    for l in (n_prim + 1)..=L_SEARCH_CAP {
        let e = l as i64 - n as i64 + 3;
        let arch_ok = arch
            .iter()
            .all(|(au, c)| c * rat_pow(au, e) + au < one);
        let fin_ok = ctx.ps.finite.iter().all(|pl| {
            let qinv = BigRational::from_integer(pl.norm_q.clone()).recip();
            &two * rat_pow(&qinv, pl.nu * e) + rat_pow(&qinv, pl.nu) < one
        });
        if arch_ok && fin_ok {
            return Ok(SpecialCylinder {
                state,
                l,
                n_prim,
            });
        }
    }
    Err(Error::Cap(format!("no admissible L ≤ {L_SEARCH_CAP}")))
}

/// Certified interval radii of the d-neighborhood O_d: archimedean
/// R_v = |α_v|^{d+n−2}·((1−α⁻¹)/M)^{1/(n−1)} (the proof's exponent), finite
/// R_v = q^{−(d+n−2)ν} exactly.
#[derive(Clone, Debug)]
pub struct NeighborhoodRadii {
    pub d: usize,
    /// (lower, upper) per contracting archimedean place
    pub arch: Vec<(BigRational, BigRational)>,
    pub fin: Vec<BigRational>,
}

pub fn neighborhood_radii(ctx: &FractalContext, d: usize, m_bound: &BigInt) -> NeighborhoodRadii {
    let n = ctx.field.n;
    let iv = ctx.field.perron_interval();
    let (alpha_lo, alpha_hi) = (iv.mid() - iv.radius(), iv.mid() + iv.radius());
    let one = BigRational::one();
    let m = BigRational::from_integer(m_bound.clone());
    let base_lo = root_lower(&((&one - alpha_hi.recip()) / &m), n - 1);
    let base_up = root_upper(&((&one - alpha_lo.recip()) / &m), n - 1);
    let e = d as i64 + n as i64 - 2;
    let arch = ctx
        .ps
        .arch_contracting
        .iter()
        .map(|&ri| {
            let loc = &ctx.field.roots.locs[ri];
            let lo = rat_pow(&loc.abs_lower(), e) * &base_lo;
            let hi = rat_pow(&loc.abs_upper(), e) * &base_up;
            (lo, hi)
        })
        .collect();
    let fin = ctx
        .ps
        .finite
        .iter()
        .map(|pl| rat_pow(&BigRational::from_integer(pl.norm_q.clone()).recip(), pl.nu * e))
        .collect();
    NeighborhoodRadii { d, arch, fin }
}

/// The polynomial part F(α) = Σ_{k<d} α^k(⟨f(p_k),v⟩−⟨f(q_k),v⟩) − ⟨w,v⟩
/// together with its integer-coefficient representative of degree
/// ≤ d+n−2 (the unreduced polynomial Garsia's bound applies to).
#[derive(Clone, Debug)]
pub struct PolyPart {
    pub value: FieldElem,
    pub coeffs: Vec<BigInt>,
    pub d: usize,
}

fn integral_coords(e: &FieldElem) -> Result<Vec<BigInt>> {
    e.0.iter()
        .map(|q| {
            if q.is_integer() {
                Ok(q.to_integer())
            } else {
                Err(Error::Hypothesis(
                    "coordinate not integral after scaling".into(),
                ))
            }
        })
        .collect()
}

pub fn polynomial_part(
    ctx: &FractalContext,
    path1: &[usize],
    path2: &[usize],
    w: &LatticeVec,
    d: usize,
) -> Result<PolyPart> {
    assert!(path1.len() >= d && path2.len() >= d);
    let n = ctx.field.n;
    let wv = crate::tiling::lattice_inner(ctx, w)?;
    let wc = integral_coords(&wv)?;
    let mut coeffs = vec![BigInt::zero(); d + n.max(1) - 1 + 1];
    let mut value = ctx.field.neg(&wv);
    for j in 0..n {
        coeffs[j] -= &wc[j];
    }
    let alpha = ctx.field.alpha();
    let mut ak = ctx.field.one();
    for k in 0..d {
        let dif = ctx
            .field
            .sub(&ctx.prefix_coords[path1[k]], &ctx.prefix_coords[path2[k]]);
        value = ctx.field.add(&value, &ctx.field.mul(&ak, &dif));
        let dc = integral_coords(&dif)?;
        for j in 0..n {
            coeffs[k + j] += &dc[j];
        }
        ak = ctx.field.mul(&ak, &alpha);
    }
    while coeffs.len() > 1 && coeffs.last().unwrap().is_zero() {
        coeffs.pop();
    }
    // the representative must evaluate back to the reduced value
    let mut check = ctx.field.zero();
    for c in coeffs.iter().rev() {
        check = ctx.field.mul(&check, &alpha);
        check = ctx.field.add(
            &check,
            &ctx.field.from_rat(BigRational::from_integer(c.clone())),
        );
    }
    assert_eq!(check, value, "polynomial representative mismatch");
    Ok(PolyPart { value, coeffs, d })
}

/// Outcome of the adelic Garsia bound for one nonzero F: the certified
/// product interval over contracting places, the bound interval
/// (1−α⁻¹)/(α^deg·M) with M = max |coefficient|, and ok = no certified
/// violation at tolerance factor (1−10⁻⁹).
#[derive(Clone, Debug)]
pub struct GarsiaReport {
    pub product: (BigRational, BigRational),
    pub bound: (BigRational, BigRational),
    pub deg: usize,
    pub ok: bool,
}

pub fn garsia_check(ctx: &FractalContext, coeffs: &[BigInt]) -> Result<GarsiaReport> {
    let deg = coeffs
        .iter()
        .rposition(|c| !c.is_zero())
        .ok_or_else(|| Error::Hypothesis("F vanishes".into()))?;
    let m_coef = coeffs
        .iter()
        .map(|c| c.abs())
        .fold(BigInt::zero(), |a, b| a.max(b));
    let alpha = ctx.field.alpha();
    let mut f = ctx.field.zero();
    for c in coeffs.iter().rev() {
        f = ctx.field.mul(&f, &alpha);
        f = ctx
            .field
            .add(&f, &ctx.field.from_rat(BigRational::from_integer(c.clone())));
    }
    if f.is_zero() {
        return Err(Error::Hypothesis("F(α) = 0".into()));
    }
    let mut lo = BigRational::one();
    let mut hi = BigRational::one();
    for &ri in &ctx.ps.arch_contracting {
        let loc = &ctx.field.roots.locs[ri];
        let d = ctx.field.embed(&f, loc);
        let (al, ah) = (d.abs_lower(), d.abs_upper());
        // complex places carry the square of the modulus
        if loc.is_real() {
            lo *= al;
            hi *= ah;
        } else {
            lo *= &al * &al;
            hi *= &ah * &ah;
        }
    }
    for (i, pl) in ctx.ps.finite.iter().enumerate() {
        let val = ctx.ps.finite_valuation(&f, i)?;
        let q = BigRational::from_integer(pl.norm_q.clone());
        lo *= rat_pow(&q, -val);
        hi *= rat_pow(&q, -val);
    }
    let iv = ctx.field.perron_interval();
    let (a_lo, a_hi) = (iv.mid() - iv.radius(), iv.mid() + iv.radius());
    let one = BigRational::one();
    let m = BigRational::from_integer(m_coef);
    let b_lo = (&one - a_hi.recip()) / (rat_pow(&a_hi, deg as i64) * &m);
    let b_hi = (&one - a_lo.recip()) / (rat_pow(&a_lo, deg as i64) * &m);
    let tol = &one - BigRational::new(BigInt::one(), BigInt::from(1_000_000_000u64));
    let ok = hi >= &b_lo * &tol;
    Ok(GarsiaReport {
        product: (lo, hi),
        bound: (b_lo, b_hi),
        deg,
        ok,
    })
}

/// Outcome of the vanish-or-escape dichotomy for a co-visiting pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EitherVerdict {
    PolyVanishes,
    EscapesNeighborhood,
    Indeterminate,
    Violation,
}

fn check_covisit(cyl: &SpecialCylinder, path: &[usize], d: usize) -> Result<()> {
    if path.len() < d + cyl.l + 1 {
        return Err(Error::Hypothesis("path too short for the cylinder".into()));
    }
    if path[d..=d + cyl.l].iter().any(|&s| s != cyl.state) {
        return Err(Error::Hypothesis(
            "path does not visit the special cylinder at d".into(),
        ));
    }
    Ok(())
}

/// Decides the dichotomy: F vanishes exactly, or Ψ(ω₂)+γ is certified
/// outside O_{d+1}(Ψ(ω₁)) at some place, or (never, by the theorem) is
/// certified inside at every place. Straddling intervals → Indeterminate.
pub fn either_check(
    ctx: &FractalContext,
    cyl: &SpecialCylinder,
    m_bound: &BigInt,
    path1: &[usize],
    path2: &[usize],
    w: &LatticeVec,
    d: usize,
) -> Result<EitherVerdict> {
    check_covisit(cyl, path1, d)?;
    check_covisit(cyl, path2, d)?;
    let f = polynomial_part(ctx, path1, path2, w, d)?;
    if f.value.is_zero() {
        return Ok(EitherVerdict::PolyVanishes);
    }
    let radii = neighborhood_radii(ctx, d + 1, m_bound);
    let wv = crate::tiling::lattice_inner(ctx, w)?;
    let (acc1, rep1) = psi_partial(ctx, path1)?;
    let (acc2, rep2) = psi_partial(ctx, path2)?;
    let one = BigRational::one();
    let mut outside = false;
    let mut all_inside = true;
    for (k, &ri) in ctx.ps.arch_contracting.iter().enumerate() {
        let loc = &ctx.field.roots.locs[ri];
        let au = loc.abs_upper();
        let mv = mv_upper(ctx, ri);
        let tail = |len: usize| rat_pow(&au, len as i64) * &mv / (&one - &au);
        let slack = tail(path1.len()) + tail(path2.len());
        let diff = rep1.arch[k]
            .sub(&rep2.arch[k])
            .sub(&ctx.field.embed(&wv, loc));
        let lo = (diff.abs_lower() - &slack).max(BigRational::zero());
        let hi = diff.abs_upper() + &slack;
        let (r_lo, r_hi) = &radii.arch[k];
        if &lo >= r_hi {
            outside = true;
        }
        if !(&hi < r_lo) {
            all_inside = false;
        }
    }
    let minlen = path1.len().min(path2.len());
    let ediff = ctx.field.sub(&ctx.field.sub(&acc1, &acc2), &wv);
    for (i, pl) in ctx.ps.finite.iter().enumerate() {
        let q = BigRational::from_integer(pl.norm_q.clone());
        let tail = rat_pow(&q.recip(), pl.nu * minlen as i64);
        let (lo, hi) = if ediff.is_zero() {
            (BigRational::zero(), tail)
        } else {
            let a = ctx.ps.finite_abs(&ediff, i)?;
            if a > tail {
                (a.clone(), a)
            } else {
                (BigRational::zero(), tail)
            }
        };
        let r = &radii.fin[i];
        if &lo >= r {
            outside = true;
        }
        if !(&hi < r) {
            all_inside = false;
        }
    }
    if outside {
        Ok(EitherVerdict::EscapesNeighborhood)
    } else if all_inside {
        Ok(EitherVerdict::Violation)
    } else {
        Ok(EitherVerdict::Indeterminate)
    }
}

/// Seeded sampler of a pair of paths that co-visit 𝒞×𝒞 at d: each path is
/// built backward from the forced I-run (uniform admissible predecessors)
/// and extended forward past the run (uniform admissible successors).
pub fn sample_covisiting(
    ctx: &FractalContext,
    cyl: &SpecialCylinder,
    d: usize,
    total: usize,
    rng: &mut ChaCha12Rng,
) -> (Vec<usize>, Vec<usize>) {
    assert!(total >= d + cyl.l + 1);
    let dim = ctx.a.dim();
    let preds: Vec<Vec<usize>> = (0..dim)
        .map(|j| (0..dim).filter(|&i| ctx.a.allows(i, j)).collect())
        .collect();
    let succs: Vec<Vec<usize>> = (0..dim)
        .map(|i| (0..dim).filter(|&j| ctx.a.allows(i, j)).collect())
        .collect();
    let one = |rng: &mut ChaCha12Rng| {
        let mut path = vec![cyl.state; cyl.l + 1];
        let mut head = cyl.state;
        for _ in 0..d {
            let ps = &preds[head];
            head = ps[rng.random_range(0..ps.len())];
            path.insert(0, head);
        }
        let mut tail = *path.last().unwrap();
        while path.len() < total {
            let ss = &succs[tail];
            tail = ss[rng.random_range(0..ss.len())];
            path.push(tail);
        }
        path
    };
    (one(rng), one(rng))
}

/// First simultaneous entry to 𝒞×𝒞: smallest k ≤ horizon with states
/// k..k+L equal to I in both paths.
pub fn tau2(
    path1: &[usize],
    path2: &[usize],
    cyl: &SpecialCylinder,
    horizon: usize,
) -> Result<Option<usize>> {
    let need = horizon + cyl.l + 1;
    if path1.len() < need || path2.len() < need {
        return Err(Error::Hypothesis("paths shorter than horizon + L + 1".into()));
    }
    let runs = |p: &[usize]| -> Vec<usize> {
        // run[t] = length of the trailing I-run ending at t, capped
        let mut out = vec![0usize; p.len()];
        let mut r = 0usize;
        for (t, &s) in p.iter().enumerate() {
            r = if s == cyl.state { (r + 1).min(cyl.l + 1) } else { 0 };
            out[t] = r;
        }
        out
    };
    let (r1, r2) = (runs(path1), runs(path2));
    for k in 0..=horizon {
        let t = k + cyl.l;
        if r1[t] == cyl.l + 1 && r2[t] == cyl.l + 1 {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Exact-DP distribution of τ₂ under the product Parry chain, truncated
/// at k_max: pmf[k] = P(τ₂ = k), plus the tail mass P(τ₂ > k_max).
#[derive(Clone, Debug)]
pub struct Tau2Dist {
    pub pmf: Vec<f64>,
    pub tail: f64,
}

/// Dynamic program over product states (state, run)²: run tracks the
/// trailing I-run capped at L+1; at each time t ≥ L the mass with both
/// runs at L+1 is the first-hit probability P(τ₂ = t−L) and is removed.
pub fn tau2_distribution(
    chain: &ParryChain,
    cyl: &SpecialCylinder,
    k_max: usize,
) -> Result<Tau2Dist> {
    let dim = chain.states.len();
    let s = dim * (cyl.l + 2);
    if s * s > TAU2_STATE_CAP {
        return Err(Error::Cap(format!(
            "product state space {} exceeds cap {TAU2_STATE_CAP}",
            s * s
        )));
    }
    let idx = |st: usize, r: usize| st * (cyl.l + 2) + r;
    let succ: Vec<Vec<(usize, f64)>> = (0..dim)
        .map(|i| {
            (0..dim)
                .filter(|&j| chain.pmat_num[i][j] > 0.0)
                .map(|j| (j, chain.pmat_num[i][j]))
                .collect()
        })
        .collect();
    // single-chain step on a vector over (state, run)
    let step = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; s];
        for st in 0..dim {
            for r in 0..=cyl.l + 1 {
                let m = v[idx(st, r)];
                if m == 0.0 {
                    continue;
                }
                for &(j, p) in &succ[st] {
                    let r2 = if j == cyl.state { (r + 1).min(cyl.l + 1) } else { 0 };
                    out[idx(j, r2)] += m * p;
                }
            }
        }
        out
    };
    // joint distribution as an s×s matrix; the kernel factorizes, so a step
    // is one single-chain step applied to the rows, then to the columns
    let mut joint = vec![0.0f64; s * s];
    for s1 in 0..dim {
        let r1 = if s1 == cyl.state { 1 } else { 0 };
        for s2 in 0..dim {
            let r2 = if s2 == cyl.state { 1 } else { 0 };
            joint[idx(s1, r1) * s + idx(s2, r2)] = chain.p_num[s1] * chain.p_num[s2];
        }
    }
    let full = cyl.l + 1;
    let mut pmf = vec![0.0f64; k_max + 1];
    let mut extract = |joint: &mut Vec<f64>, t: usize| {
        if t < cyl.l {
            return;
        }
        let k = t - cyl.l;
        if k > k_max {
            return;
        }
        let mut mass = 0.0;
        for s1 in 0..dim {
            for s2 in 0..dim {
                let c = &mut joint[idx(s1, full) * s + idx(s2, full)];
                mass += *c;
                *c = 0.0;
            }
        }
        pmf[k] = mass;
    };
    extract(&mut joint, 0);
    for t in 1..=k_max + cyl.l {
        // rows: chain 2; columns: chain 1
        let mut next = vec![0.0f64; s * s];
        for i in 0..s {
            let row = &joint[i * s..(i + 1) * s];
            if row.iter().all(|&x| x == 0.0) {
                continue;
            }
            let stepped = step(row);
            for (j, &x) in stepped.iter().enumerate() {
                next[i * s + j] = x;
            }
        }
        let mut cols = vec![0.0f64; s];
        let mut out = vec![0.0f64; s * s];
        for j in 0..s {
            for i in 0..s {
                cols[i] = next[i * s + j];
            }
            let stepped = step(&cols);
            for (i, &x) in stepped.iter().enumerate() {
                out[i * s + j] = x;
            }
        }
        joint = out;
        extract(&mut joint, t);
    }
    let tail: f64 = joint.iter().sum();
    Ok(Tau2Dist { pmf, tail })
}

/// Seeded Monte Carlo of τ₂ over independent stationary pairs; None means
/// no entry within the horizon.
pub fn tau2_empirical(
    chain: &ParryChain,
    cyl: &SpecialCylinder,
    pairs: usize,
    horizon: usize,
    seed: u64,
) -> Vec<Option<usize>> {
    let dim = chain.states.len();
    let len = horizon + cyl.l + 1;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let draw_path = |rng: &mut ChaCha12Rng| -> Vec<usize> {
        let mut path = Vec::with_capacity(len);
        let mut x: f64 = rng.random();
        let mut st = dim - 1;
        let mut acc = 0.0;
        for (i, &p) in chain.p_num.iter().enumerate() {
            acc += p;
            if x < acc {
                st = i;
                break;
            }
        }
        path.push(st);
        for _ in 1..len {
            x = rng.random();
            acc = 0.0;
            let mut nx = dim - 1;
            for (j, &p) in chain.pmat_num[st].iter().enumerate() {
                acc += p;
                if x < acc {
                    nx = j;
                    break;
                }
            }
            st = nx;
            path.push(st);
        }
        path
    };
    (0..pairs)
        .map(|_| {
            let p1 = draw_path(&mut rng);
            let p2 = draw_path(&mut rng);
            tau2(&p1, &p2, cyl, horizon).unwrap()
        })
        .collect()
}

/// Total-variation distance between the DP pmf (with tail bucket) and the
/// empirical distribution of sampled τ₂ values (None → tail bucket).
pub fn tv_distance(dist: &Tau2Dist, samples: &[Option<usize>]) -> f64 {
    let n = samples.len() as f64;
    let mut emp = vec![0.0f64; dist.pmf.len()];
    let mut emp_tail = 0.0;
    for s in samples {
        match s {
            Some(k) if *k < emp.len() => emp[*k] += 1.0 / n,
            _ => emp_tail += 1.0 / n,
        }
    }
    let mut tv = (emp_tail - dist.tail).abs();
    for (e, p) in emp.iter().zip(&dist.pmf) {
        tv += (e - p).abs();
    }
    tv / 2.0
}

/// N₀ and the strictly increasing entry times N₁ < N₂ < ⋯ of a reference
/// path to 𝒞 (symbolically verified), with N₀ chosen so that the N+2
/// positions N₀−(N+1)..N₀ all avoid 𝒞.
#[derive(Clone, Debug)]
pub struct EntrySeries {
    pub n0: usize,
    pub times: Vec<usize>,
}

pub fn entry_series(
    path: &[usize],
    cyl: &SpecialCylinder,
    count: usize,
) -> Result<EntrySeries> {
    if path.len() < cyl.l + 2 {
        return Err(Error::Hypothesis("path too short".into()));
    }
    let last = path.len() - cyl.l - 1;
    let mark: Vec<bool> = (0..=last)
        .map(|t| path[t..=t + cyl.l].iter().all(|&st| st == cyl.state))
        .collect();
    let np = cyl.n_prim;
    let n0 = (np + 1..=last)
        .find(|&t| (t - (np + 1)..=t).all(|i| !mark[i]))
        .ok_or_else(|| Error::Hypothesis("no 𝒞-free window of length N+2".into()))?;
    let times: Vec<usize> = (n0 + 1..=last).filter(|&t| mark[t]).take(count).collect();
    if times.len() < count {
        return Err(Error::Hypothesis(format!(
            "only {} entries after N₀ within the path",
            times.len()
        )));
    }
    Ok(EntrySeries { n0, times })
}

/// b(N_k) counts and the partial sums s_j, normalized by the reference
/// cylinder measure: s_ratio[j] = s_j / m(⟨z₀…z_{N₀}⟩)
/// = Σ_{k≤j} b(N_k)·α^{−(N_k−N₀+L)}.
#[derive(Clone, Debug)]
pub struct EntryAnalysis {
    pub b: Vec<BigInt>,
    pub s_ratio: Vec<f64>,
}

/// Computes b(N_k) two ways and insists they agree exactly:
/// (i) a forward DP over (state, trailing-I-run) starting from z_{N₀} = I,
/// extracting and killing the full-run mass at each window end N_i + L;
/// (ii) the recursion b(N_k) = a^{(N_k−N₀)}_{II} − Σ_{i<k} c_i·b(N_i) with
/// c_i = 1 when N_k−N_i ≤ L and c_i = a^{(N_k−N_i−L)}_{II} otherwise.
pub fn b_counts_and_s(
    ctx: &FractalContext,
    cyl: &SpecialCylinder,
    series: &EntrySeries,
    j_max: usize,
) -> Result<EntryAnalysis> {
    assert!(j_max < series.times.len() + 1);
    let dim = ctx.a.dim();
    let full = cyl.l + 1;
    let idx = |st: usize, r: usize| st * (cyl.l + 2) + r;
    // times[0] plays the role of N₀ in the DP clock
    let mut all_times = vec![series.n0];
    all_times.extend(series.times.iter().take(j_max).copied());
    let window_end: HashMap<usize, usize> = all_times
        .iter()
        .enumerate()
        .map(|(k, &t)| (t + cyl.l, k))
        .collect();
    let mut mass = vec![BigInt::zero(); dim * (cyl.l + 2)];
    mass[idx(cyl.state, 1)] = BigInt::one();
    let mut b_dp = vec![BigInt::zero(); all_times.len()];
    let t_end = all_times[all_times.len() - 1] + cyl.l;
    for t in series.n0 + 1..=t_end {
        let mut next = vec![BigInt::zero(); dim * (cyl.l + 2)];
        for st in 0..dim {
            for r in 0..=cyl.l + 1 {
                let m = &mass[idx(st, r)];
                if m.is_zero() {
                    continue;
                }
                for j in 0..dim {
                    if ctx.a.allows(st, j) {
                        let r2 = if j == cyl.state { (r + 1).min(full) } else { 0 };
                        next[idx(j, r2)] += m;
                    }
                }
            }
        }
        mass = next;
        if let Some(&k) = window_end.get(&t) {
            let mut tot = BigInt::zero();
            for st in 0..dim {
                let c = &mut mass[idx(st, full)];
                tot += &*c;
                *c = BigInt::zero();
            }
            b_dp[k] = tot;
        }
    }
    // special case: the k=0 window ends at N₀+L, handled above only when
    // N₀+L > N₀; the run needs L more I steps after z_{N₀}=I, which the DP
    // performs — except L=0, where the window is just {N₀}
    if cyl.l == 0 {
        b_dp[0] = BigInt::one();
    }
    // recursion oracle
    let i_id = cyl.state;
    let a_pow_ii = |k: usize| -> BigInt { ctx.a.0.pow(k).at(i_id, i_id).clone() };
    let mut b_rec = vec![BigInt::zero(); all_times.len()];
    for k in 0..all_times.len() {
        let mut val = a_pow_ii(all_times[k] - all_times[0]);
        for i in 0..k {
            let gap = all_times[k] - all_times[i];
            let c = if gap <= cyl.l {
                BigInt::one()
            } else {
                a_pow_ii(gap - cyl.l)
            };
            val -= c * &b_rec[i];
        }
        b_rec[k] = val;
    }
    if b_dp != b_rec {
        return Err(Error::Hypothesis(format!(
            "entry-count recursion disagrees with the direct DP: {b_rec:?} vs {b_dp:?}"
        )));
    }
    if b_rec[0] != BigInt::one() {
        return Err(Error::Hypothesis("b(N₀) ≠ 1".into()));
    }
    let alpha = to_f64(&ctx.field.perron_interval().mid());
    let mut acc = 0.0f64;
    let s_ratio = all_times
        .iter()
        .zip(&b_rec)
        .map(|(&nk, b)| {
            let bf = to_f64(&BigRational::from_integer(b.clone()));
            acc += bf * alpha.powi(-((nk - all_times[0] + cyl.l) as i32));
            acc
        })
        .collect();
    Ok(EntryAnalysis { b: b_rec, s_ratio })
}

/// Case analysis when the polynomial part vanishes: reconstructs both
/// expanded prefixes σ^{d−1}(p_{d−1})⋯p₀, verifies
/// f(expanded₁) = f(expanded₂) + w, and classifies by prefix order.
/// Cases II and III contradict the Γ predicates, so they are reported as
/// theorem violations (expected never).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoincidenceVerdict {
    /// equal expanded prefixes, equal states, w = 0
    CaseI,
    TheoremViolation(String),
}

pub fn coincidence_from_vanishing(
    ctx: &FractalContext,
    path1: &[usize],
    path2: &[usize],
    w: &LatticeVec,
    d: usize,
) -> Result<CoincidenceVerdict> {
    let f = polynomial_part(ctx, path1, path2, w, d)?;
    if !f.value.is_zero() {
        return Err(Error::Hypothesis("polynomial part does not vanish".into()));
    }
    if w.level != 0 {
        return Err(Error::Hypothesis(
            "w must be an integer vector (level 0) when F vanishes".into(),
        ));
    }
    let expand = |path: &[usize]| -> Result<Word> {
        let mut out = vec![];
        for k in (0..d).rev() {
            let p = &ctx.states[path[k]].rep.prefix;
            let img = ctx.subst.iterate_word(p, k, crate::subst::WORD_CAP)?;
            out.extend_from_slice(&img.0);
        }
        Ok(Word(out))
    };
    let u = expand(path1)?;
    let v = expand(path2)?;
    let n = ctx.subst.n;
    let fu = crate::subst::abelianize(&u, n);
    let fv = crate::subst::abelianize(&v, n);
    let sum: Vec<BigInt> = fv.iter().zip(&w.base).map(|(a, b)| a + b).collect();
    if fu != sum {
        return Err(Error::Hypothesis(
            "abelianized prefix identity fails for vanishing F".into(),
        ));
    }
    if u == v {
        let states_equal = path1[..d] == path2[..d];
        let w_zero = w.base.iter().all(|x| x.is_zero());
        if states_equal && w_zero {
            Ok(CoincidenceVerdict::CaseI)
        } else {
            Ok(CoincidenceVerdict::TheoremViolation(
                "equal expanded prefixes but unequal states or w ≠ 0".into(),
            ))
        }
    } else if v.0.len() > u.0.len() && v.0[..u.0.len()] == u.0[..] {
        Ok(CoincidenceVerdict::TheoremViolation(
            "case II: strictly shorter first prefix".into(),
        ))
    } else if u.0.len() > v.0.len() && u.0[..v.0.len()] == v.0[..] {
        Ok(CoincidenceVerdict::TheoremViolation(
            "case III: strictly longer first prefix".into(),
        ))
    } else {
        Err(Error::Hypothesis(
            "expanded prefixes are not comparable".into(),
        ))
    }
}

/// Summary report of a full analysis run.
#[allow(clippy::too_many_arguments)]
pub fn analysis_report(
    ctx: &FractalContext,
    cyl: &SpecialCylinder,
    m_bound: &BigInt,
    garsia_trials: usize,
    garsia_violations: usize,
    either_verdicts: &HashMap<String, usize>,
    tau2_dist: Option<&Tau2Dist>,
    tau2_tv: Option<f64>,
    s_ratio: &[f64],
) -> serde_json::Value {
    json!({
        "minpoly": ctx.field.minpoly.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "degree": ctx.field.n,
        "cylinder": { "state": cyl.state, "l": cyl.l, "n_prim": cyl.n_prim },
        "coefficient_bound": m_bound.to_string(),
        "garsia": { "trials": garsia_trials, "violations": garsia_violations },
        "either": either_verdicts,
        "tau2": tau2_dist.map(|d| json!({
            "pmf_head": d.pmf.iter().take(32).collect::<Vec<_>>(),
            "tail": d.tail,
            "tv": tau2_tv,
        })),
        "s_ratio": s_ratio,
    })
}
