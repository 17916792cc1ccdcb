//! Exact rational interval and disk arithmetic.
//!
//! All certified numeric bounds in this crate are rational: intervals have
//! exact rational endpoints and disks have exact rational centers and radii,
//! so no rounding error can enter a certification. Values are converted to
//! `f64` only at reporting boundaries.

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::Integer;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// 10^-k as an exact rational.
pub fn rat_pow10_neg(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u32).pow(k))
}

/// 2^-k as an exact rational.
pub fn rat_pow2_neg(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

/// Nearest dyadic k/2^bits, used to keep Newton iterates from blowing up
/// in denominator size.
pub fn round_dyadic(x: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    let scaled = x * BigRational::from_integer(scale.clone());
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    // round half away from zero
    let q = if (&r.abs() * 2u32) >= *scaled.denom() {
        if x.is_negative() {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    };
    BigRational::new(q, scale)
}

fn ceil_sqrt(x: &BigInt) -> BigInt {
    debug_assert!(!x.is_negative());
    let s = x.sqrt();
    if &(&s * &s) < x {
        s + 1
    } else {
        s
    }
}

/// Upper bound on sqrt(x) for x >= 0, within a factor (1 + 2^-32).
pub fn sqrt_upper(x: &BigRational) -> BigRational {
    debug_assert!(!x.is_negative());
    if x.is_zero() {
        return BigRational::zero();
    }
    // sqrt(n/d) = sqrt(n*d)/d; scale by 4^k for precision
    const K: u32 = 32;
    let nd = x.numer() * x.denom();
    let scaled = &nd << (2 * K);
    BigRational::new(ceil_sqrt(&scaled), x.denom() << K)
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Closed interval with exact rational endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct RatInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RatInterval {
    pub fn point(x: BigRational) -> Self {
        RatInterval { lo: x.clone(), hi: x }
    }

    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi);
        RatInterval { lo, hi }
    }

    pub fn zero() -> Self {
        Self::point(BigRational::zero())
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / rat_int(2)
    }

    pub fn radius(&self) -> BigRational {
        self.width() / rat_int(2)
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Sign of every point in the interval, if uniform.
    pub fn sign(&self) -> Option<i32> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        RatInterval::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn sub(&self, o: &Self) -> Self {
        RatInterval::new(&self.lo - &o.hi, &self.hi - &o.lo)
    }

    pub fn neg(&self) -> Self {
        RatInterval::new(-self.hi.clone(), -self.lo.clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let cands = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        RatInterval { lo, hi }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_negative() {
            RatInterval::new(&self.hi * c, &self.lo * c)
        } else {
            RatInterval::new(&self.lo * c, &self.hi * c)
        }
    }

    pub fn abs_upper(&self) -> BigRational {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn abs_lower(&self) -> BigRational {
        if self.contains_zero() {
            BigRational::zero()
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// |self| as an interval.
    pub fn abs(&self) -> Self {
        RatInterval::new(self.abs_lower(), self.abs_upper())
    }

    pub fn to_f64_mid(&self) -> f64 {
        to_f64(&self.mid())
    }
}

/// Complex disk: exact rational center, rational radius upper bound.
#[derive(Clone, Debug)]
pub struct Disk {
    pub re: BigRational,
    pub im: BigRational,
    pub rad: BigRational,
}

impl Disk {
    pub fn point(re: BigRational, im: BigRational) -> Self {
        Disk {
            re,
            im,
            rad: BigRational::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::point(BigRational::zero(), BigRational::zero())
    }

    pub fn from_interval(iv: &RatInterval) -> Self {
        Disk {
            re: iv.mid(),
            im: BigRational::zero(),
            rad: iv.radius(),
        }
    }

    pub fn center_abs_upper(&self) -> BigRational {
        sqrt_upper(&(&self.re * &self.re + &self.im * &self.im))
    }

    pub fn center_abs_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Upper bound on |z| over the disk.
    pub fn abs_upper(&self) -> BigRational {
        self.center_abs_upper() + &self.rad
    }

    /// Lower bound on |z| over the disk (clamped at zero).
    pub fn abs_lower(&self) -> BigRational {
        // sqrt_upper overestimates, so subtract a tiny slack via squared compare:
        // |center| >= sqrt(c2) >= floor bound; use sqrt_upper of c2 scaled down.
        let c2 = self.center_abs_sq();
        if c2.is_zero() {
            return BigRational::zero();
        }
        // lower bound on sqrt(c2): c2 / sqrt_upper(c2)
        let lower = &c2 / sqrt_upper(&c2);
        let out = lower - &self.rad;
        if out.is_negative() {
            BigRational::zero()
        } else {
            out
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Disk {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
            rad: &self.rad + &o.rad,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Disk {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
            rad: &self.rad + &o.rad,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = &self.re * &o.re - &self.im * &o.im;
        let im = &self.re * &o.im + &self.im * &o.re;
        let rad = self.center_abs_upper() * &o.rad
            + o.center_abs_upper() * &self.rad
            + &self.rad * &o.rad;
        Disk { re, im, rad }
    }

    pub fn add_rat(&self, x: &BigRational) -> Self {
        Disk {
            re: &self.re + x,
            im: self.im.clone(),
            rad: self.rad.clone(),
        }
    }

    pub fn scale_rat(&self, c: &BigRational) -> Self {
        Disk {
            re: &self.re * c,
            im: &self.im * c,
            rad: &self.rad * c.abs(),
        }
    }

    pub fn conj(&self) -> Self {
        Disk {
            re: self.re.clone(),
            im: -self.im.clone(),
            rad: self.rad.clone(),
        }
    }

    /// True if the two disks are certifiably disjoint.
    pub fn disjoint(&self, o: &Self) -> bool {
        let dr = &self.re - &o.re;
        let di = &self.im - &o.im;
        let d2 = &dr * &dr + &di * &di;
        let rsum = &self.rad + &o.rad;
        d2 > &rsum * &rsum
    }

    pub fn contains_zero_maybe(&self) -> bool {
        self.center_abs_sq() <= &self.rad * &self.rad
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (to_f64(&self.re), to_f64(&self.im))
    }
}

pub fn bigint_sign(x: &BigInt) -> i32 {
    match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}
