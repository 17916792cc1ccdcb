//! Polynomial arithmetic over F_p and irreducibility testing over Q.
//!
//! The irreducibility test first tries cheap certificates (rational roots,
//! degree-set analysis modulo several primes) and falls back to a full
//! Zassenhaus factor-recombination argument with quadratic Hensel lifting.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use num::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::poly::IntPoly;

/// Dense polynomial over F_p for a small odd prime p (< 2^31).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimePoly {
    pub p: u64,
    pub coeffs: Vec<u64>,
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod_u(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut out = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            out = mulmod(out, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    out
}

fn invmod(a: u64, p: u64) -> u64 {
    powmod_u(a, p - 2, p)
}

impl PrimePoly {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Self {
        for c in &mut coeffs {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        PrimePoly { p, coeffs }
    }

    pub fn zero(p: u64) -> Self {
        PrimePoly { p, coeffs: vec![] }
    }

    pub fn one(p: u64) -> Self {
        PrimePoly { p, coeffs: vec![1] }
    }

    pub fn x(p: u64) -> Self {
        PrimePoly {
            p,
            coeffs: vec![0, 1],
        }
    }

    pub fn from_int(f: &IntPoly, p: u64) -> Self {
        let pb = BigInt::from(p);
        let coeffs = f
            .coeffs
            .iter()
            .map(|c| {
                let r = c.mod_floor(&pb);
                r.to_string().parse::<u64>().unwrap()
            })
            .collect();
        PrimePoly::new(p, coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn deg(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> u64 {
        *self.coeffs.last().unwrap_or(&0)
    }

    pub fn monic(&self) -> PrimePoly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = invmod(self.leading(), self.p);
        PrimePoly::new(
            self.p,
            self.coeffs.iter().map(|&c| mulmod(c, inv, self.p)).collect(),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut out = vec![0u64; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] = c;
        }
        for (i, &c) in o.coeffs.iter().enumerate() {
            out[i] = (out[i] + c) % self.p;
        }
        PrimePoly::new(self.p, out)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut out = vec![0u64; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] = c;
        }
        for (i, &c) in o.coeffs.iter().enumerate() {
            out[i] = (out[i] + self.p - c) % self.p;
        }
        PrimePoly::new(self.p, out)
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.p);
        }
        let mut out = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + mulmod(a, b, self.p)) % self.p;
            }
        }
        PrimePoly::new(self.p, out)
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero());
        let p = self.p;
        if self.coeffs.len() < d.coeffs.len() {
            return (Self::zero(p), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dd = d.deg();
        let lc_inv = invmod(d.leading(), p);
        let mut quo = vec![0u64; rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let coef = mulmod(rem[k], lc_inv, p);
            if coef != 0 {
                quo[k - dd] = coef;
                for (i, &c) in d.coeffs.iter().enumerate() {
                    let idx = k - dd + i;
                    rem[idx] = (rem[idx] + p - mulmod(c, coef, p)) % p;
                }
            }
        }
        rem.truncate(dd);
        (PrimePoly::new(p, quo), PrimePoly::new(p, rem))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.div_rem(d).1
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Extended gcd: returns (g, s, t) with s*self + t*o = g, g monic.
    pub fn xgcd(&self, o: &Self) -> (Self, Self, Self) {
        let p = self.p;
        let (mut a, mut b) = (self.clone(), o.clone());
        let (mut sa, mut sb) = (Self::one(p), Self::zero(p));
        let (mut ta, mut tb) = (Self::zero(p), Self::one(p));
        while !b.is_zero() {
            let (q, r) = a.div_rem(&b);
            let ns = sa.sub(&q.mul(&sb));
            let nt = ta.sub(&q.mul(&tb));
            a = b;
            b = r;
            sa = sb;
            sb = ns;
            ta = tb;
            tb = nt;
        }
        if a.is_zero() {
            return (a, sa, ta);
        }
        let inv = invmod(a.leading(), p);
        let scale = PrimePoly::new(p, vec![inv]);
        (a.monic(), sa.mul(&scale), ta.mul(&scale))
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero(self.p);
        }
        PrimePoly::new(
            self.p,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| mulmod(c, i as u64 % self.p, self.p))
                .collect(),
        )
    }

    /// self^e mod m.
    pub fn pow_mod(&self, e: &BigInt, m: &Self) -> Self {
        let mut base = self.rem(m);
        let mut out = Self::one(self.p);
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                out = out.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
        }
        out
    }
}

/// Distinct-degree factorization of a squarefree monic polynomial.
/// Returns (product of all irreducible factors of degree d, d) pairs.
pub fn distinct_degree(f: &PrimePoly) -> Vec<(PrimePoly, usize)> {
    let p = f.p;
    let mut out = vec![];
    let mut f = f.monic();
    let mut h = PrimePoly::x(p); // x^(p^d) mod f, iterated
    let mut d = 0usize;
    while f.deg() >= 1 {
        d += 1;
        if 2 * d > f.deg() {
            out.push((f.clone(), f.deg()));
            break;
        }
        h = h.pow_mod(&BigInt::from(p), &f);
        let g = h.sub(&PrimePoly::x(p)).gcd(&f);
        if g.deg() >= 1 {
            out.push((g.clone(), d));
            f = f.div_rem(&g).0;
            h = h.rem(&f);
        }
    }
    out
}

/// Cantor–Zassenhaus equal-degree splitting: f is a product of r = deg/d
/// distinct monic irreducibles of degree d.
fn equal_degree(f: &PrimePoly, d: usize, rng: &mut ChaCha12Rng, out: &mut Vec<PrimePoly>) {
    if f.deg() == d {
        out.push(f.monic());
        return;
    }
    let p = f.p;
    // exponent (p^d - 1) / 2
    let e = (BigInt::from(p).pow(d as u32) - 1) / 2;
    loop {
        let coeffs: Vec<u64> = (0..f.deg()).map(|_| rng.random_range(0..p)).collect();
        let a = PrimePoly::new(p, coeffs);
        if a.deg() < 1 && a.is_zero() {
            continue;
        }
        let g0 = a.gcd(f);
        let g = if g0.deg() >= 1 && g0.deg() < f.deg() {
            g0
        } else {
            let b = a.pow_mod(&e, f).sub(&PrimePoly::one(p));
            let g = b.gcd(f);
            if g.deg() < 1 || g.deg() == f.deg() {
                continue;
            }
            g
        };
        let h = f.div_rem(&g).0;
        equal_degree(&g, d, rng, out);
        equal_degree(&h, d, rng, out);
        return;
    }
}

/// Full factorization of a squarefree monic polynomial over F_p, p odd.
/// Deterministic: the internal sampler is seeded from (p, deg).
pub fn factor_squarefree(f: &PrimePoly) -> Vec<PrimePoly> {
    let mut rng = ChaCha12Rng::seed_from_u64(f.p.wrapping_mul(0x9e3779b97f4a7c15) ^ f.deg() as u64);
    let mut out = vec![];
    for (g, d) in distinct_degree(f) {
        equal_degree(&g, d, &mut rng, &mut out);
    }
    out.sort_by(|a, b| a.deg().cmp(&b.deg()).then(a.coeffs.cmp(&b.coeffs)));
    out
}

/// Factor a squarefree monic polynomial over F_2 by trial division
/// (Cantor–Zassenhaus needs odd p; for p = 2 exhaustion is cheap).
fn factor_squarefree_f2(f: &PrimePoly) -> Vec<PrimePoly> {
    let mut out = vec![];
    let mut work = f.monic();
    let mut d = 1usize;
    while work.deg() >= 1 {
        if 2 * d > work.deg() {
            out.push(work.clone());
            break;
        }
        let mut found = false;
        for bits in 0..(1u32 << d) {
            let mut coeffs: Vec<u64> = (0..d).map(|i| ((bits >> i) & 1) as u64).collect();
            coeffs.push(1);
            let cand = PrimePoly::new(2, coeffs);
            let (q, r) = work.div_rem(&cand);
            if r.is_zero() {
                out.push(cand);
                work = q;
                found = true;
                break;
            }
        }
        if !found {
            d += 1;
        }
    }
    out.sort_by(|a, b| a.deg().cmp(&b.deg()).then(a.coeffs.cmp(&b.coeffs)));
    out
}

/// Full factorization over F_p with multiplicities: monic irreducible
/// factors (sorted) with exponents. Handles repeated factors and p-th
/// powers; p may be 2.
pub fn factor_mod_p(f: &PrimePoly) -> Vec<(PrimePoly, usize)> {
    let p = f.p;
    let mut out: Vec<(PrimePoly, usize)> = vec![];
    let mut work = f.monic();
    let mut outer_mult = 1usize;
    while work.deg() >= 1 {
        let der = work.derivative();
        if der.is_zero() {
            // work = u(x)^p over F_p
            let coeffs: Vec<u64> = work
                .coeffs
                .iter()
                .step_by(p as usize)
                .copied()
                .collect();
            work = PrimePoly::new(p, coeffs);
            outer_mult *= p as usize;
            continue;
        }
        let g = work.gcd(&der);
        let s = if g.deg() == 0 {
            work.clone()
        } else {
            work.div_rem(&g).0
        };
        let irs = if p == 2 {
            factor_squarefree_f2(&s)
        } else {
            factor_squarefree(&s)
        };
        for fac in irs {
            let mut e = 0usize;
            loop {
                let (q, r) = work.div_rem(&fac);
                if r.is_zero() {
                    work = q;
                    e += 1;
                } else {
                    break;
                }
            }
            debug_assert!(e >= 1);
            out.push((fac, e * outer_mult));
        }
    }
    out.sort_by(|a, b| {
        a.0.deg()
            .cmp(&b.0.deg())
            .then(a.0.coeffs.cmp(&b.0.coeffs))
    });
    out
}

/// Degrees of the irreducible factors of f mod p (f squarefree mod p).
pub fn factor_degrees(f: &PrimePoly) -> Vec<usize> {
    let mut out = vec![];
    for (g, d) in distinct_degree(f) {
        for _ in 0..g.deg() / d {
            out.push(d);
        }
    }
    out.sort_unstable();
    out
}

fn subset_sums(degs: &[usize], total: usize) -> Vec<bool> {
    let mut reach = vec![false; total + 1];
    reach[0] = true;
    for &d in degs {
        for s in (d..=total).rev() {
            if reach[s - d] {
                reach[s] = true;
            }
        }
    }
    reach
}

const PRIMES: [u64; 12] = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

fn symmetric_mod(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

/// Integer polynomial arithmetic modulo m (coefficients reduced into [0, m)).
fn zm_mul(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    for c in &mut out {
        *c = c.mod_floor(m);
    }
    zm_trim(out)
}

fn zm_trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

fn zm_sub(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    let mut out = vec![BigInt::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] -= x;
    }
    for c in &mut out {
        *c = c.mod_floor(m);
    }
    zm_trim(out)
}

fn zm_add(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    let mut out = vec![BigInt::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    for c in &mut out {
        *c = c.mod_floor(m);
    }
    zm_trim(out)
}

/// Division by a monic polynomial over Z/m.
fn zm_div_rem_monic(a: &[BigInt], d: &[BigInt], m: &BigInt) -> (Vec<BigInt>, Vec<BigInt>) {
    debug_assert!(d.last().is_some_and(|c| c.is_one()));
    if a.len() < d.len() {
        return (vec![], a.to_vec());
    }
    let mut rem = a.to_vec();
    let dd = d.len() - 1;
    let mut quo = vec![BigInt::zero(); rem.len() - dd];
    for k in (dd..rem.len()).rev() {
        let coef = rem[k].clone();
        if !coef.is_zero() {
            quo[k - dd] = coef.clone();
            for (i, c) in d.iter().enumerate() {
                let idx = k - dd + i;
                rem[idx] = (&rem[idx] - c * &coef).mod_floor(m);
            }
        }
    }
    rem.truncate(dd);
    (zm_trim(quo), zm_trim(rem))
}

fn prime_to_zm(f: &PrimePoly) -> Vec<BigInt> {
    f.coeffs.iter().map(|&c| BigInt::from(c)).collect()
}

fn int_to_zm(f: &IntPoly, m: &BigInt) -> Vec<BigInt> {
    zm_trim(f.coeffs.iter().map(|c| c.mod_floor(m)).collect())
}

/// One quadratic Hensel step: given f = g*h (mod m) with g monic and
/// s*g + t*h = 1 (mod m), produce the corresponding data mod m^2.
#[allow(clippy::type_complexity)]
fn hensel_step(
    f: &IntPoly,
    g: &[BigInt],
    h: &[BigInt],
    s: &[BigInt],
    t: &[BigInt],
    m: &BigInt,
) -> (Vec<BigInt>, Vec<BigInt>, Vec<BigInt>, Vec<BigInt>) {
    let m2 = m * m;
    let fm = int_to_zm(f, &m2);
    let e = zm_sub(&fm, &zm_mul(g, h, &m2), &m2);
    // s*g + t*h = 1, so e = (te)g + (se)h; reduce te mod g and fold the
    // quotient into the h-correction
    let (q, r) = zm_div_rem_monic(&zm_mul(t, &e, &m2), g, &m2);
    let g1 = zm_add(g, &r, &m2);
    let h1 = zm_add(h, &zm_add(&zm_mul(s, &e, &m2), &zm_mul(&q, h, &m2), &m2), &m2);
    let one = vec![BigInt::one()];
    let b = zm_sub(
        &zm_add(&zm_mul(s, &g1, &m2), &zm_mul(t, &h1, &m2), &m2),
        &one,
        &m2,
    );
    let (c, d) = zm_div_rem_monic(&zm_mul(s, &b, &m2), &h1, &m2);
    let s1 = zm_sub(s, &d, &m2);
    let t1 = zm_sub(t, &zm_add(&zm_mul(t, &b, &m2), &zm_mul(&c, &g1, &m2), &m2), &m2);
    (g1, h1, s1, t1)
}

/// Lift the monic mod-p factors of a monic integer polynomial f to factors
/// modulo a power p^(2^j) >= target, pairwise via a factor tree.
fn hensel_lift_tree(
    f: &IntPoly,
    factors: &[PrimePoly],
    p: u64,
    target: &BigInt,
) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut modulus = BigInt::from(p);
    while &modulus < target {
        modulus = &modulus * &modulus;
    }
    let lifted = lift_rec(f, factors, p, &modulus);
    (lifted, modulus)
}

fn lift_rec(f: &IntPoly, factors: &[PrimePoly], p: u64, modulus: &BigInt) -> Vec<Vec<BigInt>> {
    if factors.len() == 1 {
        return vec![int_to_zm(f, modulus)];
    }
    let half = factors.len() / 2;
    let pbig = BigInt::from(p);
    let mut gmod = PrimePoly::one(p);
    for fac in &factors[..half] {
        gmod = gmod.mul(fac);
    }
    let mut hmod = PrimePoly::one(p);
    for fac in &factors[half..] {
        hmod = hmod.mul(fac);
    }
    let (one, s0, t0) = gmod.xgcd(&hmod);
    debug_assert_eq!(one.deg(), 0);
    let (mut g, mut h) = (prime_to_zm(&gmod), prime_to_zm(&hmod));
    let (mut s, mut t) = (prime_to_zm(&s0), prime_to_zm(&t0));
    let mut m = pbig;
    while &m < modulus {
        let (g1, h1, s1, t1) = hensel_step(f, &g, &h, &s, &t, &m);
        g = g1;
        h = h1;
        s = s1;
        t = t1;
        m = &m * &m;
    }
    // g, h are now correct mod `modulus` (m >= modulus and modulus | m since
    // both are powers of p^2^k starting from the same base).
    let g_int = IntPoly::new(g.iter().map(|c| c.mod_floor(modulus)).collect());
    let h_int = IntPoly::new(h.iter().map(|c| c.mod_floor(modulus)).collect());
    let mut out = lift_rec(&g_int, &factors[..half], p, modulus);
    out.extend(lift_rec(&h_int, &factors[half..], p, modulus));
    out
}

/// Landau–Mignotte style bound on |coefficients| of any monic factor of f.
fn factor_coeff_bound(f: &IntPoly) -> BigInt {
    let n = f.deg() as u32;
    let norm_sq: BigInt = f.coeffs.iter().map(|c| c * c).sum();
    let norm = norm_sq.sqrt() + 1;
    (BigInt::one() << n) * norm
}

fn has_rational_root(f: &IntPoly) -> bool {
    // roots are p/q with p | constant, q | leading
    let a0 = f.constant_term();
    let an = f.leading();
    if a0.is_zero() {
        return true;
    }
    let divisors = |x: &BigInt| -> Vec<BigInt> {
        let x = x.abs();
        let mut out = vec![];
        let mut d = BigInt::one();
        while &d * &d <= x {
            if x.is_multiple_of(&d) {
                out.push(d.clone());
                out.push(&x / &d);
            }
            d += 1;
        }
        out
    };
    for p in divisors(&a0) {
        for q in divisors(&an) {
            for sign in [1i64, -1] {
                let cand = BigRational::new(&p * BigInt::from(sign), q.clone());
                if f.eval_rat(&cand).is_zero() {
                    return true;
                }
            }
        }
    }
    false
}

/// True if f, viewed over Q, is irreducible. Degree 0 and constants are not
/// irreducible; degree 1 always is. The decision is exact.
pub fn is_irreducible_over_q(f: &IntPoly) -> bool {
    let f = f.primitive_part();
    let n = match f.degree() {
        None | Some(0) => return false,
        Some(1) => return true,
        Some(n) => n,
    };
    // squarefree over Q?
    let g = f.to_rat().gcd(&f.derivative().to_rat());
    if g.deg() >= 1 {
        return false;
    }
    if has_rational_root(&f) {
        return false;
    }
    if n <= 3 {
        // degrees 2 and 3: any factorization has a linear factor
        return true;
    }
    // make monic via y = lc * x
    let monic = if f.is_monic() {
        f.clone()
    } else {
        // g(y) = lc^(n-1) f(y/lc) is monic with coeff of y^i = a_i lc^(n-1-i)
        let lc = f.leading();
        let mut coeffs = vec![BigInt::zero(); n + 1];
        for (i, a) in f.coeffs.iter().enumerate().take(n) {
            coeffs[i] = a * lc.pow((n - 1 - i) as u32);
        }
        coeffs[n] = BigInt::one();
        IntPoly::new(coeffs)
    };

    // degree-set analysis mod several good primes
    let mut possible: Option<Vec<bool>> = None;
    let mut best: Option<(u64, Vec<PrimePoly>)> = None;
    let mut good = 0;
    for &p in &PRIMES {
        if monic.leading().is_multiple_of(&BigInt::from(p)) {
            continue;
        }
        let fp = PrimePoly::from_int(&monic, p);
        if fp.deg() != n {
            continue;
        }
        if fp.gcd(&fp.derivative()).deg() != 0 {
            continue; // not squarefree mod p
        }
        let degs = factor_degrees(&fp);
        if degs.len() == 1 {
            return true; // irreducible mod p
        }
        let reach = subset_sums(&degs, n);
        possible = Some(match possible {
            None => reach,
            Some(prev) => prev.iter().zip(&reach).map(|(a, b)| *a && *b).collect(),
        });
        if best.as_ref().is_none_or(|(_, fs)| degs.len() < fs.len()) {
            best = Some((p, factor_squarefree(&fp)));
        }
        good += 1;
        if good >= 4 {
            break;
        }
    }
    if let Some(reach) = &possible {
        if !reach[1..n].iter().any(|&b| b) {
            return true;
        }
    }

    // Zassenhaus recombination on the best prime
    let (p, factors) = best.expect("no usable prime for irreducibility test");
    let bound = factor_coeff_bound(&monic);
    let target = &bound * 2 + 1;
    let (lifted, modulus) = hensel_lift_tree(&monic, &factors, p, &target);
    let r = lifted.len();
    // try all proper subsets up to half size; if none yields a true factor,
    // monic (hence f) is irreducible
    for mask in 1u32..(1 << r) - 1 {
        if (mask.count_ones() as usize) > r / 2 {
            continue;
        }
        if r % 2 == 0 && mask.count_ones() as usize == r / 2 && mask & 1 == 0 {
            continue; // complements are equivalent
        }
        let mut prod = vec![BigInt::one()];
        for (i, fac) in lifted.iter().enumerate() {
            if mask & (1 << i) != 0 {
                prod = zm_mul(&prod, fac, &modulus);
            }
        }
        let cand = IntPoly::new(prod.iter().map(|c| symmetric_mod(c, &modulus)).collect());
        if cand.deg() == 0 {
            continue;
        }
        // does cand divide monic over Q?
        let rem = monic.to_rat().rem(&cand.to_rat());
        if rem.is_zero() {
            return false;
        }
    }
    true
}
