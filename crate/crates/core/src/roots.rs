//! Certified isolation of polynomial roots.
//!
//! Real roots are isolated with Sturm sequences and bisection, so each comes
//! with an exact rational bracket. Complex roots start from a floating-point
//! Durand–Kerner pass and are then polished by Newton iteration in exact
//! rational complex arithmetic; the certificate is the classical bound
//! |z - root| <= n |p(z)/p'(z)| evaluated exactly at the rational center.

use num::rational::BigRational;
use num::traits::{Signed, Zero};

use crate::exact::{rat_int, round_dyadic, sqrt_upper, to_f64, Disk, RatInterval};
use crate::poly::{count_roots, sturm_chain, IntPoly, RatPoly};

/// Location of one root (complex roots are reported once, with the
/// positive-imaginary-part representative; the conjugate is implied).
#[derive(Clone, Debug)]
pub enum RootLoc {
    Real(RatInterval),
    ComplexPair(Disk),
}

impl RootLoc {
    /// Upper bound on |root|.
    pub fn abs_upper(&self) -> BigRational {
        match self {
            RootLoc::Real(iv) => iv.abs_upper(),
            RootLoc::ComplexPair(d) => d.abs_upper(),
        }
    }

    /// Lower bound on |root|.
    pub fn abs_lower(&self) -> BigRational {
        match self {
            RootLoc::Real(iv) => iv.abs_lower(),
            RootLoc::ComplexPair(d) => d.abs_lower(),
        }
    }

    /// Enclosing disk (real intervals become flat disks).
    pub fn disk(&self) -> Disk {
        match self {
            RootLoc::Real(iv) => Disk::from_interval(iv),
            RootLoc::ComplexPair(d) => d.clone(),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, RootLoc::Real(_))
    }
}

/// All roots of a squarefree integer polynomial, certified to a requested
/// enclosure radius. Real roots come first, in increasing order.
#[derive(Clone, Debug)]
pub struct Roots {
    pub poly: IntPoly,
    pub locs: Vec<RootLoc>,
}

struct CRat {
    re: BigRational,
    im: BigRational,
}

impl CRat {
    fn sub(&self, o: &CRat) -> CRat {
        CRat {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
    fn mul(&self, o: &CRat) -> CRat {
        CRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    fn div(&self, o: &CRat) -> CRat {
        let d = &o.re * &o.re + &o.im * &o.im;
        CRat {
            re: (&self.re * &o.re + &self.im * &o.im) / &d,
            im: (&self.im * &o.re - &self.re * &o.im) / &d,
        }
    }
    fn abs_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

fn eval_crat(p: &IntPoly, z: &CRat) -> CRat {
    let mut acc = CRat {
        re: BigRational::zero(),
        im: BigRational::zero(),
    };
    for c in p.coeffs.iter().rev() {
        acc = acc.mul(z);
        acc.re += BigRational::from_integer(c.clone());
    }
    acc
}

/// Isolate and refine the real roots to intervals of width <= prec.
pub fn isolate_real_roots(p: &IntPoly, prec: &BigRational) -> Vec<RatInterval> {
    let rp = p.to_rat();
    if rp.deg() == 1 {
        let root = -&rp.coeffs[0] / &rp.coeffs[1];
        return vec![RatInterval::point(root)];
    }
    let chain = sturm_chain(&rp);
    let b = p.root_bound();
    let mut stack = vec![RatInterval::new(-b.clone(), b)];
    let mut isolated = vec![];
    while let Some(iv) = stack.pop() {
        let n = count_roots(&chain, &iv.lo, &iv.hi);
        match n {
            0 => {}
            1 => isolated.push(iv),
            _ => {
                let mid = iv.mid();
                stack.push(RatInterval::new(iv.lo.clone(), mid.clone()));
                stack.push(RatInterval::new(mid, iv.hi.clone()));
            }
        }
    }
    let mut out: Vec<RatInterval> = isolated
        .into_iter()
        .map(|iv| refine_real(p, &chain, iv, prec))
        .collect();
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    out
}

fn refine_real(p: &IntPoly, chain: &[RatPoly], mut iv: RatInterval, prec: &BigRational) -> RatInterval {
    // switch to sign bisection once endpoint signs are strict and opposite
    let sign = |x: &BigRational| -> i32 {
        let v = p.eval_rat(x);
        if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        }
    };
    let (mut slo, mut shi) = (sign(&iv.lo), sign(&iv.hi));
    while &iv.width() > prec {
        let mid = iv.mid();
        let sm = sign(&mid);
        if sm == 0 {
            return RatInterval::point(mid);
        }
        if slo != 0 && shi != 0 && slo != shi {
            if sm == slo {
                iv = RatInterval::new(mid, iv.hi);
            } else {
                iv = RatInterval::new(iv.lo, mid);
                shi = sm;
            }
        } else {
            // fall back to Sturm counting when an endpoint sign is zero
            let left = RatInterval::new(iv.lo.clone(), mid.clone());
            if count_roots(chain, &left.lo, &left.hi) == 1 {
                iv = left;
                shi = sm;
            } else {
                iv = RatInterval::new(mid, iv.hi);
                slo = sm;
            }
        }
    }
    iv
}

/// Continue bisecting an existing real bracket down to width <= prec.
pub fn refine_real_interval(p: &IntPoly, iv: &RatInterval, prec: &BigRational) -> RatInterval {
    let chain = sturm_chain(&p.to_rat());
    refine_real(p, &chain, iv.clone(), prec)
}

fn durand_kerner(p: &IntPoly) -> Vec<(f64, f64)> {
    let n = p.deg();
    let lc = to_f64(&BigRational::from_integer(p.leading()));
    let cs: Vec<f64> = p
        .coeffs
        .iter()
        .map(|c| to_f64(&BigRational::from_integer(c.clone())) / lc)
        .collect();
    let eval = |z: (f64, f64)| -> (f64, f64) {
        let mut acc = (0.0f64, 0.0f64);
        for c in cs.iter().rev() {
            acc = (acc.0 * z.0 - acc.1 * z.1 + c, acc.0 * z.1 + acc.1 * z.0);
        }
        acc
    };
    let mut zs: Vec<(f64, f64)> = Vec::with_capacity(n);
    let (mut re, mut im) = (0.4f64, 0.9f64);
    for _ in 0..n {
        zs.push((re, im));
        let (nr, ni) = (re * 0.4 - im * 0.9, re * 0.9 + im * 0.4);
        re = nr;
        im = ni;
    }
    for _ in 0..400 {
        let mut next = zs.clone();
        for i in 0..n {
            let mut denom = (1.0f64, 0.0f64);
            for j in 0..n {
                if j != i {
                    let d = (zs[i].0 - zs[j].0, zs[i].1 - zs[j].1);
                    denom = (denom.0 * d.0 - denom.1 * d.1, denom.0 * d.1 + denom.1 * d.0);
                }
            }
            let v = eval(zs[i]);
            let ds = denom.0 * denom.0 + denom.1 * denom.1;
            if ds == 0.0 {
                continue;
            }
            let q = (
                (v.0 * denom.0 + v.1 * denom.1) / ds,
                (v.1 * denom.0 - v.0 * denom.1) / ds,
            );
            next[i] = (zs[i].0 - q.0, zs[i].1 - q.1);
        }
        zs = next;
    }
    zs
}

/// Newton-polish a rational complex point and certify the enclosure.
/// Returns a disk guaranteed to contain exactly the nearest root.
pub fn certify_complex(p: &IntPoly, re: BigRational, im: BigRational, bits: u32, iters: usize) -> Disk {
    let dp = p.derivative();
    let n = rat_int(p.deg() as i64);
    let mut z = CRat { re, im };
    for _ in 0..iters {
        let v = eval_crat(p, &z);
        let d = eval_crat(&dp, &z);
        if d.abs_sq().is_zero() {
            break;
        }
        let step = v.div(&d);
        z = z.sub(&step);
        z.re = round_dyadic(&z.re, bits);
        z.im = round_dyadic(&z.im, bits);
    }
    let v = eval_crat(p, &z);
    let d = eval_crat(&dp, &z);
    let num = sqrt_upper(&v.abs_sq());
    let d2 = d.abs_sq();
    let rad = if d2.is_zero() {
        p.root_bound() * rat_int(2)
    } else {
        // lower bound on |p'(z)|: d2 / sqrt_upper(d2)
        &n * &num * sqrt_upper(&d2) / &d2
    };
    Disk {
        re: z.re,
        im: z.im,
        rad,
    }
}

/// Isolate all roots of a squarefree integer polynomial with enclosures of
/// radius <= prec, certifying pairwise disjointness.
pub fn isolate_roots(p: &IntPoly, prec: &BigRational) -> Roots {
    let n = p.deg();
    let reals = isolate_real_roots(p, prec);
    let pairs = (n - reals.len()) / 2;
    let mut locs: Vec<RootLoc> = reals.iter().cloned().map(RootLoc::Real).collect();
    if pairs > 0 {
        let approx = durand_kerner(p);
        // take the `pairs` approximations with the largest imaginary parts
        let mut upper: Vec<(f64, f64)> = approx.into_iter().filter(|z| z.1 > 0.0).collect();
        upper.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        upper.truncate(pairs);
        upper.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut bits = 64u32;
        loop {
            let mut disks = vec![];
            for &(re, im) in &upper {
                let re = BigRational::from_float(re).unwrap_or_else(BigRational::zero);
                let im = BigRational::from_float(im).unwrap_or_else(BigRational::zero);
                disks.push(certify_complex(p, re, im, bits, 60));
            }
            let small = disks.iter().all(|d| &d.rad <= prec && d.im > d.rad);
            let mut all_disks: Vec<Disk> = reals.iter().map(Disk::from_interval).collect();
            all_disks.extend(disks.iter().cloned());
            all_disks.extend(disks.iter().map(|d| d.conj()));
            let disjoint = (0..all_disks.len()).all(|i| {
                (i + 1..all_disks.len()).all(|j| all_disks[i].disjoint(&all_disks[j]))
            });
            if small && disjoint {
                locs.extend(disks.into_iter().map(RootLoc::ComplexPair));
                break;
            }
            bits *= 2;
            assert!(bits <= 1 << 16, "complex root certification failed to converge");
        }
    }
    Roots {
        poly: p.clone(),
        locs,
    }
}

impl Roots {
    /// Re-isolate to a finer enclosure radius.
    pub fn refine(&self, prec: &BigRational) -> Roots {
        isolate_roots(&self.poly, prec)
    }

    /// Number of roots counted with conjugates: r1 + 2 r2.
    pub fn total_count(&self) -> usize {
        self.locs
            .iter()
            .map(|l| if l.is_real() { 1 } else { 2 })
            .sum()
    }

    /// Index of the real root of largest absolute value (the Perron root
    /// for the matrices this crate cares about).
    pub fn dominant_real(&self) -> Option<usize> {
        let mut best: Option<(usize, BigRational)> = None;
        for (i, l) in self.locs.iter().enumerate() {
            if let RootLoc::Real(iv) = l {
                let a = iv.abs_lower();
                if best.as_ref().is_none_or(|(_, b)| &a > b) {
                    best = Some((i, a));
                }
            }
        }
        best.map(|(i, _)| i)
    }

    /// Pisot test: one real root > 1 and every other conjugate strictly
    /// inside the unit circle, certified from the enclosures.
    pub fn is_pisot(&self) -> bool {
        let Some(dom) = self.dominant_real() else {
            return false;
        };
        let one = rat_int(1);
        for (i, l) in self.locs.iter().enumerate() {
            if i == dom {
                match l {
                    RootLoc::Real(iv) => {
                        if iv.lo <= one {
                            return false;
                        }
                    }
                    _ => unreachable!(),
                }
            } else if l.abs_upper() >= one {
                return false;
            }
        }
        true
    }
}
