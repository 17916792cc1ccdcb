//! Exact arithmetic in K = Q(α) for α an algebraic integer, plus the
//! eigen-machinery a Pisot incidence matrix carries: characteristic
//! polynomial, Pisot certification, exact eigenvectors over K, embeddings
//! with certified error bounds, and the integer scaling constant c.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Zero};
use num::Integer;

use crate::error::{Error, Result};
use crate::exact::{rat_int, rat_pow10_neg, Disk, RatInterval};
use crate::modp::is_irreducible_over_q;
use crate::poly::{resultant, IntPoly, RatPoly};
use crate::roots::{isolate_roots, refine_real_interval, RootLoc, Roots};
use crate::subst::IntMatrix;

pub const MAX_FIELD_DEGREE: usize = 12;

/// Element of Q(α) in the power basis 1, α, ..., α^(n-1).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem(pub Vec<BigRational>);

impl FieldElem {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.0[1..].iter().all(|c| c.is_zero())
    }

    pub fn as_poly(&self) -> RatPoly {
        RatPoly::new(self.0.clone())
    }
}

/// The field Q(α) with certified enclosures of every conjugate of α.
/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct NumberField {
    pub minpoly: IntPoly,
    pub n: usize,
    pub roots: Roots,
    /// reductions of α^k mod minpoly for k = n .. 2n-2
    high_powers: Vec<Vec<BigRational>>,
}

/// Exact characteristic polynomial det(xI - M) by Faddeev–LeVerrier.
pub fn char_poly(m: &IntMatrix) -> IntPoly {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mq: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BigRational::from_integer(m.at(i, j).clone()))
                .collect()
        })
        .collect();
    let mat_mul = |a: &Vec<Vec<BigRational>>, b: &Vec<Vec<BigRational>>| -> Vec<Vec<BigRational>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum())
                    .collect()
            })
            .collect()
    };
    let trace = |a: &Vec<Vec<BigRational>>| -> BigRational { (0..n).map(|i| a[i][i].clone()).sum() };
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut a = mq.clone();
    for k in 1..=n {
        let c = -trace(&a) / rat_int(k as i64);
        coeffs[n - k] = c.clone();
        if k < n {
            // A <- M (A + c I)
            let mut shifted = a.clone();
            for (i, row) in shifted.iter_mut().enumerate() {
                row[i] += &c;
            }
            a = mat_mul(&mq, &shifted);
        }
    }
    let ints: Vec<BigInt> = coeffs
        .iter()
        .map(|c| {
            assert!(c.is_integer(), "characteristic polynomial must be integral");
            c.to_integer()
        })
        .collect();
    IntPoly::new(ints)
}

/// Irreducibility over Q, with the configured degree ceiling.
pub fn is_irreducible_over_q_checked(p: &IntPoly) -> Result<bool> {
    if p.deg() > MAX_FIELD_DEGREE {
        return Err(Error::Cap(format!(
            "irreducibility test supports degree <= {}, got {}",
            MAX_FIELD_DEGREE,
            p.deg()
        )));
    }
    Ok(is_irreducible_over_q(p))
}

/// Isolate roots with relative radius <= 10^-12.
fn isolate_tight(p: &IntPoly) -> Roots {
    let mut prec = rat_pow10_neg(13);
    loop {
        let roots = isolate_roots(p, &prec);
        let tol = rat_pow10_neg(12);
        let ok = roots.locs.iter().all(|l| {
            let rad = match l {
                RootLoc::Real(iv) => iv.radius(),
                RootLoc::ComplexPair(d) => d.rad.clone(),
            };
            rad <= &tol * l.abs_lower().max(rat_int(1))
        });
        if ok {
            return roots;
        }
        prec = prec / rat_int(1000);
    }
}

/// Pisot test on an irreducible polynomial: exactly one real root > 1 and
/// all other conjugates certified strictly inside the unit circle.
pub fn pisot_check(p: &IntPoly) -> (bool, Roots) {
    let roots = isolate_tight(p);
    (roots.is_pisot(), roots)
}

impl NumberField {
    pub fn new(minpoly: IntPoly) -> Result<NumberField> {
        let n = minpoly.deg();
        if n < 2 {
            return Err(Error::Hypothesis(format!(
                "field degree must be >= 2, got {}",
                n
            )));
        }
        if !minpoly.is_monic() {
            return Err(Error::Hypothesis("minimal polynomial must be monic".into()));
        }
        if !is_irreducible_over_q_checked(&minpoly)? {
            return Err(Error::Hypothesis(format!(
                "{} is reducible over Q",
                minpoly
            )));
        }
        let roots = isolate_tight(&minpoly);
        // α^n = -(a_0 + a_1 α + ... + a_{n-1} α^{n-1}); extend to 2n-2
        let mut high_powers: Vec<Vec<BigRational>> = vec![];
        let base: Vec<BigRational> = (0..n)
            .map(|i| -BigRational::from_integer(minpoly.coeffs[i].clone()))
            .collect();
        high_powers.push(base.clone());
        for _ in n + 1..=2 * n.saturating_sub(1) {
            let prev = high_powers.last().unwrap();
            // multiply by α: shift, then reduce the overflow coefficient
            let top = prev[n - 1].clone();
            let mut next = vec![BigRational::zero(); n];
            for i in 1..n {
                next[i] = prev[i - 1].clone();
            }
            for i in 0..n {
                next[i] += &top * &base[i];
            }
            high_powers.push(next);
        }
        Ok(NumberField {
            minpoly,
            n,
            roots,
            high_powers,
        })
    }

    pub fn from_matrix(m: &IntMatrix) -> Result<NumberField> {
        NumberField::new(char_poly(m))
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem(vec![BigRational::zero(); self.n])
    }

    pub fn one(&self) -> FieldElem {
        self.from_rat(BigRational::one())
    }

    pub fn from_rat(&self, q: BigRational) -> FieldElem {
        let mut v = vec![BigRational::zero(); self.n];
        v[0] = q;
        FieldElem(v)
    }

    pub fn alpha(&self) -> FieldElem {
        let mut v = vec![BigRational::zero(); self.n];
        v[1] = BigRational::one();
        FieldElem(v)
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect())
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem(a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect())
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        FieldElem(a.0.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, a: &FieldElem, q: &BigRational) -> FieldElem {
        FieldElem(a.0.iter().map(|x| x * q).collect())
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let n = self.n;
        let mut full = vec![BigRational::zero(); 2 * n - 1];
        for (i, x) in a.0.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.0.iter().enumerate() {
                full[i + j] += x * y;
            }
        }
        let mut out = full[..n].to_vec();
        for k in n..2 * n - 1 {
            if full[k].is_zero() {
                continue;
            }
            let red = &self.high_powers[k - n];
            for i in 0..n {
                out[i] += &full[k] * &red[i];
            }
        }
        FieldElem(out)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in Q[x].
    pub fn inv(&self, a: &FieldElem) -> Result<FieldElem> {
        if a.is_zero() {
            return Err(Error::Hypothesis("division by zero in Q(alpha)".into()));
        }
        let p = self.minpoly.to_rat();
        let ap = a.as_poly();
        // s*ap + t*p = gcd = 1 (minpoly irreducible, a nonzero)
        let (mut r0, mut r1) = (p, ap);
        let (mut s0, mut s1) = (RatPoly::zero(), RatPoly::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let ns = s0.sub(&q.mul(&s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = ns;
        }
        debug_assert_eq!(r0.deg(), 0);
        let lead = r0.leading();
        let inv_poly = s0.scale(&(BigRational::one() / lead));
        let mut coeffs = inv_poly.coeffs;
        coeffs.resize(self.n, BigRational::zero());
        Ok(FieldElem(coeffs))
    }

    pub fn div(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &FieldElem, k: i64) -> Result<FieldElem> {
        let base = if k < 0 { self.inv(a)? } else { a.clone() };
        let mut out = self.one();
        for _ in 0..k.unsigned_abs() {
            out = self.mul(&out, &base);
        }
        Ok(out)
    }

    /// Exact field norm N_{K/Q}(a) = prod of a over all conjugates.
    pub fn norm(&self, a: &FieldElem) -> BigRational {
        if a.is_zero() {
            return BigRational::zero();
        }
        // monic minpoly: resultant(minpoly, a) = prod a(alpha_i)
        resultant(&self.minpoly.to_rat(), &a.as_poly())
    }

    /// Evaluate a at a real conjugate enclosure.
    pub fn embed_real(&self, a: &FieldElem, iv: &RatInterval) -> RatInterval {
        let mut acc = RatInterval::zero();
        for c in a.0.iter().rev() {
            acc = acc.mul(iv).add(&RatInterval::point(c.clone()));
        }
        acc
    }

    /// Evaluate a at any conjugate enclosure (real intervals become disks).
    pub fn embed(&self, a: &FieldElem, loc: &RootLoc) -> Disk {
        let d = loc.disk();
        let mut acc = Disk::zero();
        for c in a.0.iter().rev() {
            acc = acc.mul(&d).add_rat(c);
        }
        acc
    }

    /// Index into roots.locs of the Perron root enclosure.
    pub fn perron_index(&self) -> usize {
        self.roots.dominant_real().expect("no real root")
    }

    pub fn perron_interval(&self) -> RatInterval {
        match &self.roots.locs[self.perron_index()] {
            RootLoc::Real(iv) => iv.clone(),
            _ => unreachable!(),
        }
    }

    /// Exact sign of the real number a(α) at the Perron root.
    pub fn sign_at_perron(&self, a: &FieldElem) -> i32 {
        if a.is_zero() {
            return 0;
        }
        let mut iv = self.perron_interval();
        loop {
            if let Some(s) = self.embed_real(a, &iv).sign() {
                // a(α) = 0 is impossible for nonzero a: minpoly is irreducible
                // with degree > deg a, so the enclosure eventually decides
                if s != 0 {
                    return s;
                }
            }
            let target = iv.width() / rat_int(1 << 20);
            iv = refine_real_interval(&self.minpoly, &iv, &target);
        }
    }

    /// Compare two field elements as real numbers at the Perron place.
    pub fn cmp_at_perron(&self, a: &FieldElem, b: &FieldElem) -> std::cmp::Ordering {
        match self.sign_at_perron(&self.sub(a, b)) {
            x if x < 0 => std::cmp::Ordering::Less,
            0 => std::cmp::Ordering::Equal,
            _ => std::cmp::Ordering::Greater,
        }
    }
}

/// Perron eigen-data: right and left eigenvectors over Q(α), first
/// coordinates normalized to 1, and the integer scaling constant c
/// (1 until rescaled against a Z0 set).
#[derive(Clone, Debug)]
pub struct EigenData {
    pub u: Vec<FieldElem>,
    pub v: Vec<FieldElem>,
    pub c: BigInt,
}

/// Kernel vector of a singular matrix over Q(α) with kernel dimension 1.
fn kernel_vector(field: &NumberField, mut m: Vec<Vec<FieldElem>>) -> Result<Vec<FieldElem>> {
    let n = m.len();
    let mut pivot_cols = vec![];
    let mut row = 0;
    for col in 0..n {
        // find a pivot
        let Some(r) = (row..n).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, r);
        let inv = field.inv(&m[row][col].clone())?;
        for c in 0..n {
            m[row][c] = field.mul(&m[row][c], &inv);
        }
        for r2 in 0..n {
            if r2 != row && !m[r2][col].is_zero() {
                let f = m[r2][col].clone();
                for c in 0..n {
                    let t = field.mul(&f, &m[row][c]);
                    m[r2][c] = field.sub(&m[r2][c], &t);
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == n {
            break;
        }
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    if free.len() != 1 {
        return Err(Error::Hypothesis(format!(
            "eigenvalue not simple: kernel dimension {}",
            free.len()
        )));
    }
    let fc = free[0];
    let mut x = vec![field.zero(); n];
    x[fc] = field.one();
    for (r, &pc) in pivot_cols.iter().enumerate() {
        x[pc] = field.neg(&m[r][fc]);
    }
    Ok(x)
}

fn normalize_first(field: &NumberField, mut x: Vec<FieldElem>) -> Result<Vec<FieldElem>> {
    let first = x[0].clone();
    if first.is_zero() {
        return Err(Error::Hypothesis(
            "eigenvector has zero first coordinate; cannot normalize".into(),
        ));
    }
    let inv = field.inv(&first)?;
    for e in &mut x {
        *e = field.mul(e, &inv);
    }
    Ok(x)
}

/// Exact Perron eigenvectors: (M - αI)u = 0 and (tM - αI)v = 0.
pub fn eigen_data(field: &NumberField, m: &IntMatrix) -> Result<EigenData> {
    let n = m.rows;
    assert_eq!(n, field.n);
    let build = |mm: &IntMatrix| -> Vec<Vec<FieldElem>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut e =
                            field.from_rat(BigRational::from_integer(mm.at(i, j).clone()));
                        if i == j {
                            e = field.sub(&e, &field.alpha());
                        }
                        e
                    })
                    .collect()
            })
            .collect()
    };
    let u = normalize_first(field, kernel_vector(field, build(m))?)?;
    let v = normalize_first(field, kernel_vector(field, build(&m.transpose()))?)?;
    Ok(EigenData {
        u,
        v,
        c: BigInt::one(),
    })
}

/// Least positive integer c with c·v and all ⟨w, c·v⟩ in Z[α], over the
/// level-decorated vectors w = M^(-level)·base of a Z0 candidate set.
pub fn scale_v(
    field: &NumberField,
    eigen: &EigenData,
    z0: &[(Vec<BigInt>, i64)],
) -> Result<EigenData> {
    let mut c = BigInt::one();
    let mut fold = |q: &BigRational| {
        c = c.lcm(q.denom());
    };
    for e in &eigen.v {
        for q in &e.0 {
            fold(q);
        }
    }
    let alpha = field.alpha();
    for (base, level) in z0 {
        // <M^(-level) base, v> = α^(-level) <base, v>
        let mut ip = field.zero();
        for (i, b) in base.iter().enumerate() {
            let t = field.scale(&eigen.v[i], &BigRational::from_integer(b.clone()));
            ip = field.add(&ip, &t);
        }
        let scaled = field.mul(&ip, &field.pow(&alpha, -level)?);
        for q in &scaled.0 {
            fold(q);
        }
    }
    let cq = BigRational::from_integer(c.clone());
    Ok(EigenData {
        u: eigen.u.clone(),
        v: eigen.v.iter().map(|e| field.scale(e, &cq)).collect(),
        c,
    })
}
