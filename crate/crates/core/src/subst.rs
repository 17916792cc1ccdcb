//! Substitutions on a finite alphabet {1, ..., n}: parsing, abelianization,
//! incidence matrices, iteration, primitivity, prefix-suffix representations,
//! fixed points and the strong coincidence check.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Letter = u32;

/// Finite word; the empty word is a valid value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(vec![])
    }

    pub fn single(a: Letter) -> Self {
        Word(vec![a])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        let multi = self.0.iter().any(|&a| a >= 10);
        let mut first = true;
        for &a in &self.0 {
            if multi && !first {
                write!(f, ",")?;
            }
            write!(f, "{}", a)?;
            first = false;
        }
        Ok(())
    }
}

pub type IntVector = Vec<BigInt>;

/// Dense integer matrix (exact BigInt entries).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                *m.at_mut(i, j) = BigInt::from(v);
            }
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }

    pub fn mul(&self, o: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, o.rows);
        let mut out = IntMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let v = a * o.at(k, j);
                    *out.at_mut(i, j) += v;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> IntVector {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn pow(&self, k: usize) -> IntMatrix {
        assert_eq!(self.rows, self.cols);
        let mut out = IntMatrix::identity(self.rows);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        out
    }

    pub fn is_entrywise_positive(&self) -> bool {
        self.data.iter().all(|x| x.is_positive())
    }
}

/// Prefix-suffix representation σ^k(source) = prefix · core · suffix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PSRep {
    pub source: Letter,
    pub prefix: Word,
    pub core: Letter,
    pub suffix: Word,
    pub power: usize,
}

/// Substitution over {1, ..., n}; `images[a-1]` is σ(a).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    pub n: usize,
    pub images: Vec<Word>,
}

/// Default cap on enumerated word lengths.
pub const WORD_CAP: usize = 10_000_000;

pub fn parse_substitution(text: &str) -> Result<Substitution> {
    let mut rules: HashMap<Letter, Vec<Letter>> = HashMap::new();
    let mut max_letter: Letter = 0;
    for rule in text.split(';') {
        let rule: String = rule.chars().filter(|c| !c.is_whitespace()).collect();
        if rule.is_empty() {
            continue;
        }
        let (lhs, rhs) = rule
            .split_once("->")
            .ok_or_else(|| Error::Parse(format!("rule '{}' has no '->'", rule)))?;
        let l: Letter = lhs
            .parse()
            .map_err(|_| Error::Parse(format!("bad letter '{}'", lhs)))?;
        if l == 0 {
            return Err(Error::Parse("letter 0 is out of range".into()));
        }
        let letters: Vec<Letter> = if rhs.contains(',') {
            rhs.split(',')
                .map(|t| {
                    t.parse::<Letter>()
                        .map_err(|_| Error::Parse(format!("bad letter '{}'", t)))
                })
                .collect::<Result<_>>()?
        } else {
            rhs.chars()
                .map(|c| {
                    c.to_digit(10)
                        .filter(|&d| d >= 1)
                        .ok_or_else(|| Error::Parse(format!("bad letter '{}'", c)))
                })
                .collect::<Result<_>>()?
        };
        if letters.is_empty() {
            return Err(Error::Parse(format!("empty image for letter {}", l)));
        }
        if rules.insert(l, letters.clone()).is_some() {
            return Err(Error::Parse(format!("duplicate rule for letter {}", l)));
        }
        max_letter = max_letter.max(l).max(*letters.iter().max().unwrap());
    }
    if rules.is_empty() {
        return Err(Error::Parse("no rules".into()));
    }
    let n = max_letter as usize;
    if n < 2 {
        return Err(Error::Parse("alphabet must have at least 2 letters".into()));
    }
    let mut images = Vec::with_capacity(n);
    for a in 1..=max_letter {
        match rules.remove(&a) {
            Some(w) => images.push(Word(w)),
            None => return Err(Error::Parse(format!("missing rule for letter {}", a))),
        }
    }
    Ok(Substitution { n, images })
}

pub fn abelianize(w: &Word, n: usize) -> IntVector {
    let mut v = vec![BigInt::zero(); n];
    for &a in &w.0 {
        v[(a - 1) as usize] += 1;
    }
    v
}

impl Substitution {
    pub fn image(&self, a: Letter) -> &Word {
        &self.images[(a - 1) as usize]
    }

    /// M_σ: column j is f(σ(j)).
    pub fn incidence_matrix(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            let col = abelianize(&self.images[j], self.n);
            for i in 0..self.n {
                *m.at_mut(i, j) = col[i].clone();
            }
        }
        m
    }

    pub fn apply(&self, w: &Word) -> Word {
        let mut out = Vec::new();
        for &a in &w.0 {
            out.extend_from_slice(&self.image(a).0);
        }
        Word(out)
    }

    /// σ^k(w), refusing to build words longer than `cap`.
    pub fn iterate_word(&self, w: &Word, k: usize, cap: usize) -> Result<Word> {
        // predict |σ^k(w)| = <1, M^k f(w)> before allocating anything
        let m = self.incidence_matrix().pow(k);
        let len: BigInt = m.mul_vec(&abelianize(w, self.n)).iter().sum();
        if len > BigInt::from(cap) {
            return Err(Error::Cap(format!(
                "word length {} exceeds cap {}",
                len, cap
            )));
        }
        let mut out = w.clone();
        for _ in 0..k {
            out = self.apply(&out);
        }
        Ok(out)
    }

    /// Smallest N <= n_max with M^N entrywise positive.
    pub fn is_primitive(&self, n_max: usize) -> (bool, Option<usize>) {
        let m = self.incidence_matrix();
        let mut p = IntMatrix::identity(self.n);
        for k in 1..=n_max {
            p = p.mul(&m);
            if p.is_entrywise_positive() {
                return (true, Some(k));
            }
        }
        (false, None)
    }

    /// All representations σ^k(b) = p·a·s with core letter a = target.
    pub fn prefix_suffix_reps(&self, k: usize, target: Letter, cap: usize) -> Result<Vec<PSRep>> {
        let mut out = vec![];
        for b in 1..=self.n as Letter {
            let img = self.iterate_word(&Word::single(b), k, cap)?;
            for (i, &c) in img.0.iter().enumerate() {
                if c == target {
                    out.push(PSRep {
                        source: b,
                        prefix: Word(img.0[..i].to_vec()),
                        core: c,
                        suffix: Word(img.0[i + 1..].to_vec()),
                        power: k,
                    });
                }
            }
        }
        Ok(out)
    }

    /// All k=1 representations, in source order then position order. These
    /// index the states of the prefix-suffix automaton.
    pub fn all_prefix_reps(&self) -> Vec<PSRep> {
        let mut out = vec![];
        for b in 1..=self.n as Letter {
            let img = self.image(b);
            for (i, &c) in img.0.iter().enumerate() {
                out.push(PSRep {
                    source: b,
                    prefix: Word(img.0[..i].to_vec()),
                    core: c,
                    suffix: Word(img.0[i + 1..].to_vec()),
                    power: 1,
                });
            }
        }
        out
    }
}

/// Two-sided fixed point seed and a central window. The right half is fixed
/// by σ^q for the smallest q admitting a starter letter; the left half may
/// need a multiple of q (`left_power`), since an ending letter can appear
/// only at a higher power. The whole two-sided point is fixed by σ^left_power.
#[derive(Clone, Debug)]
pub struct FixedPoint {
    pub q: usize,
    pub left_power: usize,
    pub u_minus1: Letter,
    pub u0: Letter,
    /// letters u_{-radius} .. u_{-1}
    pub left: Word,
    /// letters u_0 .. u_{radius-1}
    pub right: Word,
}

pub fn fixed_point_window(s: &Substitution, radius: usize) -> Result<FixedPoint> {
    let cap_q = s.n * s.n;
    let starter = |q: usize| -> Result<Vec<Letter>> {
        let mut out = vec![];
        for a in 1..=s.n as Letter {
            let img = s.iterate_word(&Word::single(a), q, WORD_CAP)?;
            if img.0.first() == Some(&a) && img.len() > 1 {
                out.push(a);
            }
        }
        Ok(out)
    };
    for q in 1..=cap_q {
        let starters = starter(q)?;
        if starters.is_empty() {
            continue;
        }
        // left seed: σ^(q m)(b) must end with b, and the pair (b, u_0) must
        // occur in the language
        for m in 1..=cap_q {
            let r = q * m;
            let mut enders = vec![];
            for b in 1..=s.n as Letter {
                let img = s.iterate_word(&Word::single(b), r, WORD_CAP)?;
                if img.0.last() == Some(&b) && img.len() > 1 {
                    enders.push(b);
                }
            }
            for &a in &starters {
                for &b in &enders {
                    if pair_occurs(s, q, b, a)? {
                        let (left, right) = grow_window(s, q, r, b, a, radius)?;
                        return Ok(FixedPoint {
                            q,
                            left_power: r,
                            u_minus1: b,
                            u0: a,
                            left,
                            right,
                        });
                    }
                }
            }
        }
    }
    Err(Error::Cap(format!(
        "no two-sided fixed point seed up to power {}",
        cap_q
    )))
}

fn pair_occurs(s: &Substitution, q: usize, b: Letter, a: Letter) -> Result<bool> {
    // occurrences of "ba" in σ^{q m}(c) for any letter c stabilize quickly
    let mut words: Vec<Word> = (1..=s.n as Letter).map(Word::single).collect();
    for _ in 0..(s.n * s.n + 2) {
        for w in &mut words {
            if w.len() < WORD_CAP / (s.n + 1) {
                *w = s.iterate_word(w, q, WORD_CAP)?;
            }
        }
        for w in &words {
            if w.0.windows(2).any(|p| p[0] == b && p[1] == a) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn grow_window(
    s: &Substitution,
    q: usize,
    left_power: usize,
    b: Letter,
    a: Letter,
    radius: usize,
) -> Result<(Word, Word)> {
    let mut right = Word::single(a);
    while right.len() < radius {
        right = s.iterate_word(&right, q, WORD_CAP)?;
    }
    right.0.truncate(radius);
    let mut left = Word::single(b);
    while left.len() < radius {
        left = s.iterate_word(&left, left_power, WORD_CAP)?;
    }
    let skip = left.len() - radius;
    left.0.drain(..skip);
    Ok((left, right))
}

/// Witness for the strong coincidence of a pair of letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoincidenceWitness {
    pub k: usize,
    pub core: Letter,
    pub prefix_vector: IntVector,
}

/// For every unordered pair, the smallest k <= k_max with
/// σ^k(a) = p·i·s, σ^k(b) = p'·i·s' and f(p) = f(p').
pub fn strong_coincidence(
    s: &Substitution,
    k_max: usize,
) -> Result<HashMap<(Letter, Letter), Option<CoincidenceWitness>>> {
    let mut out = HashMap::new();
    for a in 1..=s.n as Letter {
        for b in a..=s.n as Letter {
            out.insert((a, b), coincidence_pair(s, a, b, k_max)?);
        }
    }
    Ok(out)
}

fn coincidence_pair(
    s: &Substitution,
    a: Letter,
    b: Letter,
    k_max: usize,
) -> Result<Option<CoincidenceWitness>> {
    if a == b {
        return Ok(Some(CoincidenceWitness {
            k: 1,
            core: s.image(a).0[0],
            prefix_vector: vec![BigInt::zero(); s.n],
        }));
    }
    let mut wa = Word::single(a);
    let mut wb = Word::single(b);
    for k in 1..=k_max {
        wa = s.iterate_word(&wa, 1, WORD_CAP)?;
        wb = s.iterate_word(&wb, 1, WORD_CAP)?;
        let seen: HashSet<(IntVector, Letter)> = prefix_pairs(&wb, s.n).collect();
        for (v, c) in prefix_pairs(&wa, s.n) {
            if seen.contains(&(v.clone(), c)) {
                return Ok(Some(CoincidenceWitness {
                    k,
                    core: c,
                    prefix_vector: v,
                }));
            }
        }
    }
    Ok(None)
}

fn prefix_pairs(w: &Word, n: usize) -> impl Iterator<Item = (IntVector, Letter)> + '_ {
    let mut acc = vec![BigInt::zero(); n];
    w.0.iter().map(move |&c| {
        let v = acc.clone();
        acc[(c - 1) as usize] += 1;
        (v, c)
    })
}
