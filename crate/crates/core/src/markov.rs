//! Prefix-suffix automaton and its Parry measure.
//!
//! States are the one-step prefix-suffix representations σ(b) = p·a·s,
//! written (b:p). The transition matrix allows I → J exactly when the core
//! letter of J equals the source letter of I. The Perron eigenvectors of the
//! incidence matrix lift to eigenvectors of the transition matrix, and the
//! associated Parry measure is computed exactly in Q(α).

use num::{BigInt, BigRational, One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::nfield::{EigenData, FieldElem, NumberField};
use crate::roots::RootLoc;
use crate::subst::{IntMatrix, PSRep, Substitution};

/// Name of the pseudorandom generator used by [`sample_path`], recorded in
/// reports for reproducibility.
pub const GENERATOR: &str = "chacha12";

/// A state (b:p) of the prefix-suffix automaton, with its dense index.
///
/// Ids follow the canonical ordering: by source letter, then by prefix
/// length (equivalently, position of the core letter in σ(b)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathState {
    pub rep: PSRep,
    pub id: usize,
}

/// D×D 0/1 transition matrix: a_{IJ} = 1 iff core(J) = source(I).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMatrix(pub IntMatrix);

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.0.at(i, j).is_one()
    }
}

/// A sequence of state ids with every consecutive pair allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissiblePath(pub Vec<usize>);

pub fn is_admissible(a: &TransitionMatrix, path: &[usize]) -> bool {
    path.windows(2).all(|w| a.allows(w[0], w[1]))
}

/// Build the automaton: all one-step representations in canonical order and
/// the 0/1 transition matrix.
pub fn build_automaton(s: &Substitution) -> (Vec<PathState>, TransitionMatrix) {
    let states: Vec<PathState> = s
        .all_prefix_reps()
        .into_iter()
        .enumerate()
        .map(|(id, rep)| PathState { rep, id })
        .collect();
    let d = states.len();
    let mut a = IntMatrix::zeros(d, d);
    for i in &states {
        for j in &states {
            if j.rep.core == i.rep.source {
                *a.at_mut(i.id, j.id) = BigInt::one();
            }
        }
    }
    (states, TransitionMatrix(a))
}

/// True iff A^{N+1} is entrywise positive (exact integer power).
pub fn verify_primitive_a(a: &TransitionMatrix, n: usize) -> bool {
    a.0.pow(n + 1).is_entrywise_positive()
}

/// Lift eigenvectors of the incidence matrix to the automaton. The right
/// vector lifts by source letter, [u]_J = u_b for J = (b:p), giving
/// A[u] = α[u]. The left vector lifts by core letter, [v]_J = v_a for
/// J = (b:pas): summing v over sources with a fixed core letter a gives
/// (ᵗM v)_a, so ᵗA[v] = α[v]. Returns (lifted u, lifted v).
pub fn lift_vectors(
    states: &[PathState],
    eigen: &EigenData,
) -> (Vec<FieldElem>, Vec<FieldElem>) {
    let u = states
        .iter()
        .map(|st| eigen.u[(st.rep.source - 1) as usize].clone())
        .collect();
    let v = states
        .iter()
        .map(|st| eigen.v[(st.rep.core - 1) as usize].clone())
        .collect();
    (u, v)
}

/// dim Ker A over the rationals (D minus the rank of A).
pub fn kernel_dimension(a: &TransitionMatrix) -> usize {
    let d = a.dim();
    let mut m: Vec<Vec<BigRational>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| BigRational::from_integer(a.0.at(i, j).clone()))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..d {
        let Some(r) = (rank..d).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, r);
        let pivot = m[rank][col].clone();
        for c in 0..d {
            m[rank][c] = &m[rank][c] / &pivot;
        }
        for r2 in 0..d {
            if r2 != rank && !m[r2][col].is_zero() {
                let f = m[r2][col].clone();
                for c in 0..d {
                    let t = &f * &m[rank][c];
                    m[r2][c] = &m[r2][c] - t;
                }
            }
        }
        rank += 1;
    }
    d - rank
}

/// The Parry measure of the automaton: exact stationary vector p and
/// stochastic matrix P over Q(α), with cached f64 copies for sampling.
#[derive(Clone, Debug)]
pub struct ParryChain {
    pub field: NumberField,
    pub states: Vec<PathState>,
    pub a: TransitionMatrix,
    pub lifted_u: Vec<FieldElem>,
    pub lifted_v: Vec<FieldElem>,
    /// ⟨[u₁],[v₁]⟩ as an exact field element.
    pub gram: FieldElem,
    pub p: Vec<FieldElem>,
    pub pmat: Vec<Vec<FieldElem>>,
    pub p_num: Vec<f64>,
    pub pmat_num: Vec<Vec<f64>>,
}

/// Construct the Parry chain: p_I = [u]_I[v]_I/⟨[u],[v]⟩ and
/// p_IJ = a_IJ[u]_J/(α[u]_I). Verifies A[u] = α[u], row-stochasticity and
/// stationarity pP = p as exact identities in Q(α).
pub fn parry_chain(
    field: &NumberField,
    states: &[PathState],
    a: &TransitionMatrix,
    eigen: &EigenData,
) -> Result<ParryChain> {
    let d = states.len();
    let (lu, lv) = lift_vectors(states, eigen);
    let alpha = field.alpha();

    // A[u] = α[u] exactly
    for i in 0..d {
        let mut row = field.zero();
        for j in 0..d {
            if a.allows(i, j) {
                row = field.add(&row, &lu[j]);
            }
        }
        if row != field.mul(&alpha, &lu[i]) {
            return Err(Error::Hypothesis(
                "lifted Perron vector is not an eigenvector of the automaton".into(),
            ));
        }
    }
    // tA[v] = α[v] exactly
    for j in 0..d {
        let mut col = field.zero();
        for i in 0..d {
            if a.allows(i, j) {
                col = field.add(&col, &lv[i]);
            }
        }
        if col != field.mul(&alpha, &lv[j]) {
            return Err(Error::Hypothesis(
                "lifted left Perron vector is not a left eigenvector of the automaton".into(),
            ));
        }
    }

    let mut gram = field.zero();
    for j in 0..d {
        gram = field.add(&gram, &field.mul(&lu[j], &lv[j]));
    }
    let gram_inv = field.inv(&gram)?;
    let p: Vec<FieldElem> = (0..d)
        .map(|i| field.mul(&field.mul(&lu[i], &lv[i]), &gram_inv))
        .collect();
    let mut pmat = vec![vec![field.zero(); d]; d];
    for i in 0..d {
        let denom_inv = field.inv(&field.mul(&alpha, &lu[i]))?;
        for j in 0..d {
            if a.allows(i, j) {
                pmat[i][j] = field.mul(&lu[j], &denom_inv);
            }
        }
    }

    // row-stochastic and stationary, exactly
    for i in 0..d {
        let mut row = field.zero();
        for j in 0..d {
            row = field.add(&row, &pmat[i][j]);
        }
        if row != field.one() {
            return Err(Error::Hypothesis(format!("row {} of P does not sum to 1", i)));
        }
    }
    for j in 0..d {
        let mut col = field.zero();
        for i in 0..d {
            col = field.add(&col, &field.mul(&p[i], &pmat[i][j]));
        }
        if col != p[j] {
            return Err(Error::Hypothesis(format!("pP differs from p at state {}", j)));
        }
    }

    let iv = field.perron_interval();
    let num = |e: &FieldElem| field.embed_real(e, &iv).to_f64_mid();
    let p_num: Vec<f64> = p.iter().map(&num).collect();
    let pmat_num: Vec<Vec<f64>> = pmat
        .iter()
        .map(|row| row.iter().map(&num).collect())
        .collect();

    Ok(ParryChain {
        field: field.clone(),
        states: states.to_vec(),
        a: a.clone(),
        lifted_u: lu,
        lifted_v: lv,
        gram,
        p,
        pmat,
        p_num,
        pmat_num,
    })
}

/// Exact measure of a cylinder ⟨c₀c₁⋯c_k⟩ = p_{c₀}p_{c₀c₁}⋯p_{c_{k−1}c_k},
/// with its numeric value.
pub fn cylinder_measure(chain: &ParryChain, path: &AdmissiblePath) -> Result<(FieldElem, f64)> {
    if path.0.is_empty() {
        return Err(Error::Parse("empty cylinder".into()));
    }
    if !is_admissible(&chain.a, &path.0) {
        return Err(Error::Hypothesis("inadmissible path".into()));
    }
    let mut m = chain.p[path.0[0]].clone();
    for w in path.0.windows(2) {
        m = chain.field.mul(&m, &chain.pmat[w[0]][w[1]]);
    }
    let num = chain
        .field
        .embed_real(&m, &chain.field.perron_interval())
        .to_f64_mid();
    Ok((m, num))
}

/// Entry a^{(k)}_{IJ}, both exactly (integer matrix power) and from the
/// spectral expansion over all eigenvalues of the incidence matrix:
/// a^{(k)}_{IJ} = Σ_i α_i^k [u(α_i)]_I [v(α_i)]_J / S(α_i) where
/// S(z) = Σ_L u(z)_L v(z)_L, complex pairs contributing twice the real part.
/// The expansion omits the kernel projection, so it represents A^k only for
/// k ≥ 1; A⁰ is the identity and is returned directly.
pub fn spectral_entry(chain: &ParryChain, k: usize, i: usize, j: usize) -> (BigInt, f64) {
    let exact = chain.a.0.pow(k).at(i, j).clone();
    if k == 0 {
        return (exact, if i == j { 1.0 } else { 0.0 });
    }
    let field = &chain.field;
    let d = chain.states.len();
    let mut spectral = 0.0;
    for loc in &field.roots.locs {
        let at = |e: &FieldElem| field.embed(e, loc).to_f64();
        let (zr, zi) = loc.disk().to_f64();
        // z^k, u_I(z)·v_J(z) and S(z) in complex f64 arithmetic
        let cmul = |(ar, ai): (f64, f64), (br, bi): (f64, f64)| (ar * br - ai * bi, ar * bi + ai * br);
        let mut zk = (1.0, 0.0);
        for _ in 0..k {
            zk = cmul(zk, (zr, zi));
        }
        let mut s = (0.0, 0.0);
        for l in 0..d {
            let t = cmul(at(&chain.lifted_u[l]), at(&chain.lifted_v[l]));
            s = (s.0 + t.0, s.1 + t.1);
        }
        let num = cmul(zk, cmul(at(&chain.lifted_u[i]), at(&chain.lifted_v[j])));
        let den = s.0 * s.0 + s.1 * s.1;
        let term = (num.0 * s.0 + num.1 * s.1) / den; // Re(num / s)
        match loc {
            RootLoc::Real(_) => spectral += term,
            RootLoc::ComplexPair(_) => spectral += 2.0 * term,
        }
    }
    (exact, spectral)
}

/// Sample a path of `length` states: initial state from p, transitions from
/// P, using the f64 copies and a ChaCha12 generator seeded with `seed`.
pub fn sample_path(chain: &ParryChain, length: usize, seed: u64) -> AdmissiblePath {
    assert!(length >= 1);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let draw = |weights: &[f64], rng: &mut ChaCha12Rng| -> usize {
        let x: f64 = rng.random();
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if x < acc {
                return i;
            }
        }
        weights.len() - 1
    };
    let mut path = Vec::with_capacity(length);
    path.push(draw(&chain.p_num, &mut rng));
    for _ in 1..length {
        let cur = *path.last().unwrap();
        path.push(draw(&chain.pmat_num[cur], &mut rng));
    }
    AdmissiblePath(path)
}

/// All admissible paths of a given length (number of states).
pub fn enumerate_paths(a: &TransitionMatrix, length: usize) -> Vec<AdmissiblePath> {
    assert!(length >= 1);
    let d = a.dim();
    let mut paths: Vec<Vec<usize>> = (0..d).map(|i| vec![i]).collect();
    for _ in 1..length {
        let mut next = vec![];
        for p in &paths {
            let last = *p.last().unwrap();
            for j in 0..d {
                if a.allows(last, j) {
                    let mut q = p.clone();
                    q.push(j);
                    next.push(q);
                }
            }
        }
        paths = next;
    }
    paths.into_iter().map(AdmissiblePath).collect()
}

/// Automaton as JSON: states with source letter and prefix, edges as id
/// pairs [from, to].
pub fn automaton_json(states: &[PathState], a: &TransitionMatrix) -> serde_json::Value {
    let d = states.len();
    let states_json: Vec<_> = states
        .iter()
        .map(|st| {
            json!({
                "id": st.id,
                "b": st.rep.source,
                "p": st.rep.prefix.0,
                "core": st.rep.core,
            })
        })
        .collect();
    let mut edges = vec![];
    for i in 0..d {
        for j in 0..d {
            if a.allows(i, j) {
                edges.push(json!([i, j]));
            }
        }
    }
    json!({ "states": states_json, "edges": edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::to_f64;
    use crate::nfield::{char_poly, eigen_data};
    use crate::poly::IntPoly;
    use crate::subst::parse_substitution;

    fn rauzy() -> Substitution {
        parse_substitution("1->12;2->13;3->1").unwrap()
    }

    fn fib() -> Substitution {
        parse_substitution("1->12;2->1").unwrap()
    }

    fn chain_for(s: &Substitution) -> ParryChain {
        let field = NumberField::from_matrix(&s.incidence_matrix()).unwrap();
        let eigen = eigen_data(&field, &s.incidence_matrix()).unwrap();
        let (states, a) = build_automaton(s);
        parry_chain(&field, &states, &a, &eigen).unwrap()
    }

    #[test]
    fn rauzy_automaton() {
        let (states, a) = build_automaton(&rauzy());
        assert_eq!(states.len(), 5);
        let tags: Vec<(u32, usize)> = states
            .iter()
            .map(|st| (st.rep.source, st.rep.prefix.len()))
            .collect();
        assert_eq!(tags, vec![(1, 0), (1, 1), (2, 0), (2, 1), (3, 0)]);
        let expected = IntMatrix::from_rows(&[
            &[1, 0, 1, 0, 1],
            &[1, 0, 1, 0, 1],
            &[0, 1, 0, 0, 0],
            &[0, 1, 0, 0, 0],
            &[0, 0, 0, 1, 0],
        ]);
        assert_eq!(a.0, expected);
    }

    #[test]
    fn fibonacci_automaton() {
        let (states, a) = build_automaton(&fib());
        assert_eq!(states.len(), 3);
        let tags: Vec<(u32, usize)> = states
            .iter()
            .map(|st| (st.rep.source, st.rep.prefix.len()))
            .collect();
        assert_eq!(tags, vec![(1, 0), (1, 1), (2, 0)]);
        let expected = IntMatrix::from_rows(&[&[1, 0, 1], &[1, 0, 1], &[0, 1, 0]]);
        assert_eq!(a.0, expected);
    }

    #[test]
    fn primitivity() {
        let s = rauzy();
        let (_, a) = build_automaton(&s);
        let (prim, n) = s.is_primitive(50);
        assert!(prim);
        assert_eq!(n, Some(3));
        assert!(verify_primitive_a(&a, 3));

        let s = fib();
        let (_, a) = build_automaton(&s);
        let (prim, n) = s.is_primitive(50);
        assert!(prim);
        assert_eq!(n, Some(2));
        assert!(verify_primitive_a(&a, 2));

        // reducible block-diagonal matrix is never primitive
        let block = TransitionMatrix(IntMatrix::from_rows(&[&[1, 0], &[0, 1]]));
        assert!(!verify_primitive_a(&block, 5));
    }

    #[test]
    fn lifted_vectors_rauzy() {
        let s = rauzy();
        let field = NumberField::from_matrix(&s.incidence_matrix()).unwrap();
        let eigen = eigen_data(&field, &s.incidence_matrix()).unwrap();
        let (states, a) = build_automaton(&s);
        let (lu, lv) = lift_vectors(&states, &eigen);
        // [u] = (u1, u1, u2, u2, u3) under the canonical order (by source);
        // [v] = (v1, v2, v1, v3, v1) (by core letter)
        assert_eq!(lu[0], eigen.u[0]);
        assert_eq!(lu[1], eigen.u[0]);
        assert_eq!(lu[2], eigen.u[1]);
        assert_eq!(lu[3], eigen.u[1]);
        assert_eq!(lu[4], eigen.u[2]);
        assert_eq!(lv[0], eigen.v[0]);
        assert_eq!(lv[1], eigen.v[1]);
        assert_eq!(lv[2], eigen.v[0]);
        assert_eq!(lv[3], eigen.v[2]);
        assert_eq!(lv[4], eigen.v[0]);
        assert_eq!(kernel_dimension(&a), 2); // D - n = 5 - 3

        // nonzero spectrum of A equals the spectrum of the incidence matrix:
        // char(A) = x^(D-n) · char(M)
        let ca = char_poly(&a.0);
        let cm = char_poly(&s.incidence_matrix());
        let mut shifted = vec![BigInt::zero(); 2];
        shifted.extend(cm.coeffs.iter().cloned());
        assert_eq!(ca, IntPoly::new(shifted));
    }

    #[test]
    fn parry_rauzy_values() {
        let chain = chain_for(&rauzy());
        // <[u1],[v1]> = u1v1 + u1v2 + u2v1 + u2v3 + u3v1 = 1 + (α−1) + 3/α²
        // ≈ 2.97417 (the left vector lifts by core letter)
        let g = to_f64(
            &chain
                .field
                .embed_real(&chain.gram, &chain.field.perron_interval())
                .mid(),
        );
        assert!((g - 2.97417).abs() < 1e-3, "gram = {}", g);
        assert!((chain.p_num[0] - 0.336228).abs() < 1e-4, "p0 = {}", chain.p_num[0]);

        // m(<c0>) = p_{c0}
        let (m, num) = cylinder_measure(&chain, &AdmissiblePath(vec![0])).unwrap();
        assert_eq!(m, chain.p[0]);
        assert!((num - chain.p_num[0]).abs() < 1e-12);

        // p_00 = 1/α, so m(<(1:ε)(1:ε)>) = p_0 / α ≈ 0.18280
        let (m2, num2) = cylinder_measure(&chain, &AdmissiblePath(vec![0, 0])).unwrap();
        let expect = chain
            .field
            .div(&chain.p[0], &chain.field.alpha())
            .unwrap();
        assert_eq!(m2, expect);
        assert!((num2 - 0.18280).abs() < 1e-4, "m2 = {}", num2);

        // inadmissible: (1:ε) -> (1:1) has core 2 != source 1
        assert!(cylinder_measure(&chain, &AdmissiblePath(vec![0, 1])).is_err());
    }

    #[test]
    fn depth_two_partition_exact() {
        for s in [rauzy(), fib(), parse_substitution("1->1112;2->11").unwrap()] {
            let chain = chain_for(&s);
            let paths = enumerate_paths(&chain.a, 2);
            let mut total = chain.field.zero();
            for path in &paths {
                if !is_admissible(&chain.a, &path.0) {
                    continue;
                }
                let (m, _) = cylinder_measure(&chain, path).unwrap();
                assert!(chain.field.sign_at_perron(&m) > 0);
                total = chain.field.add(&total, &m);
            }
            assert_eq!(total, chain.field.one());

            // cylinders starting with core letter a partition the fiber over
            // a, so their measures sum to sum of p over those start states
            for a in 1..=s.n as u32 {
                let mut part = chain.field.zero();
                for path in &paths {
                    if chain.states[path.0[0]].rep.core != a
                        || !is_admissible(&chain.a, &path.0)
                    {
                        continue;
                    }
                    let (m, _) = cylinder_measure(&chain, path).unwrap();
                    part = chain.field.add(&part, &m);
                }
                let mut direct = chain.field.zero();
                for st in &chain.states {
                    if st.rep.core == a {
                        direct = chain.field.add(&direct, &chain.p[st.id]);
                    }
                }
                assert_eq!(part, direct);
            }
        }
    }

    #[test]
    fn spectral_expansion() {
        let chain = chain_for(&rauzy());
        let d = chain.states.len();
        // k = 0: identity
        for i in 0..d {
            for j in 0..d {
                let (e, s) = spectral_entry(&chain, 0, i, j);
                assert_eq!(e, BigInt::from((i == j) as u32));
                assert!((to_f64(&BigRational::from_integer(e)) - s).abs() < 1e-8);
            }
        }
        // k = 1: within 1e-8 of the 0/1 entries
        for i in 0..d {
            for j in 0..d {
                let (e, s) = spectral_entry(&chain, 1, i, j);
                assert!((to_f64(&BigRational::from_integer(e)) - s).abs() < 1e-8);
            }
        }
        // rounding recovers the exact integer for all k <= 25
        for k in [2, 5, 10, 15, 20, 25] {
            for i in 0..d {
                for j in 0..d {
                    let (e, s) = spectral_entry(&chain, k, i, j);
                    let ef = to_f64(&BigRational::from_integer(e.clone()));
                    assert!(
                        (ef - s).abs() < 0.5,
                        "k={} I={} J={}: exact {} vs spectral {}",
                        k,
                        i,
                        j,
                        e,
                        s
                    );
                }
            }
        }
    }

    #[test]
    fn spectral_expansion_nonunimodular() {
        let chain = chain_for(&parse_substitution("1->1112;2->11").unwrap());
        assert_eq!(chain.states.len(), 6);
        let d = chain.states.len();
        for k in [1, 5, 10, 15] {
            for i in 0..d {
                for j in 0..d {
                    let (e, s) = spectral_entry(&chain, k, i, j);
                    let ef = to_f64(&BigRational::from_integer(e));
                    assert!((ef - s).abs() < 0.5, "k={} I={} J={}", k, i, j);
                }
            }
        }
    }

    #[test]
    fn sampling_statistics() {
        let chain = chain_for(&rauzy());
        let n = 1_000_000usize;
        let path = sample_path(&chain, n, 1);
        assert!(is_admissible(&chain.a, &path.0));
        // determinism
        assert_eq!(sample_path(&chain, 100, 7), sample_path(&chain, 100, 7));
        assert_ne!(sample_path(&chain, 100, 7), sample_path(&chain, 100, 8));

        let d = chain.states.len();
        let mut counts = vec![0usize; d];
        let mut trans = vec![vec![0usize; d]; d];
        for w in path.0.windows(2) {
            trans[w[0]][w[1]] += 1;
        }
        for &i in &path.0 {
            counts[i] += 1;
        }
        // state frequencies: successive samples are correlated, so allow a
        // wider multiple of the i.i.d. binomial deviation than transitions get
        for i in 0..d {
            let p = chain.p_num[i];
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            let freq = counts[i] as f64 / n as f64;
            assert!(
                (freq - p).abs() < 4.0 * sigma,
                "state {}: freq {} vs p {}",
                i,
                freq,
                p
            );
        }
        // transition frequencies conditioned on the source state are i.i.d.
        for i in 0..d {
            let total: usize = trans[i].iter().sum();
            for j in 0..d {
                let p = chain.pmat_num[i][j];
                if p == 0.0 {
                    assert_eq!(trans[i][j], 0);
                    continue;
                }
                if (p - 1.0).abs() < 1e-12 {
                    assert_eq!(trans[i][j], total);
                    continue;
                }
                let sigma = (p * (1.0 - p) / total as f64).sqrt();
                let freq = trans[i][j] as f64 / total as f64;
                assert!(
                    (freq - p).abs() < 3.0 * sigma,
                    "transition {}->{}: freq {} vs p {}",
                    i,
                    j,
                    freq,
                    p
                );
            }
        }
    }

    #[test]
    fn automaton_export() {
        let (states, a) = build_automaton(&fib());
        let v = automaton_json(&states, &a);
        assert_eq!(v["states"].as_array().unwrap().len(), 3);
        assert_eq!(v["edges"].as_array().unwrap().len(), 5);
        assert_eq!(v["states"][1]["b"], 1);
        assert_eq!(v["states"][1]["p"].as_array().unwrap().len(), 1);
        assert_eq!(v["edges"][0], json!([0, 0]));
    }
}
