//! Subtile point clouds and the digit-series map into the contracting space.
//!
//! A depth-m cloud for a letter a holds one exact coordinate
//! ⟨f(σ^{m−1}(p_{m−1})⋯p₀), v⟩ ∈ Z[α] per admissible path of length m ending
//! at a. Clouds satisfy the set equation: the depth-m cloud of a is the
//! disjoint union over edges b→^p a of α·cloud_{m−1}(b) + ⟨f(p),v⟩. The left
//! Perron vector v is rescaled to have integer coordinates, so every exact
//! coordinate is an algebraic integer with integer coefficient vector.

use std::collections::HashMap;
use std::sync::Arc;

use num::{BigRational, One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::exact::{to_f64, Disk};
use crate::markov::{build_automaton, is_admissible, PathState, TransitionMatrix};
use crate::nfield::{eigen_data, scale_v, EigenData, FieldElem, NumberField};
use crate::places::{FinCoord, PlaceSystem, RepPoint};
use crate::subst::{Letter, Substitution, WORD_CAP};

/// Default cap on the total number of points (paths) per cloud.
pub const CLOUD_CAP: u64 = 10_000_000;

/// Everything needed to evaluate the digit series: automaton, exact Perron
/// data with v scaled integral, and the contracting place system.
pub struct FractalContext {
    pub subst: Substitution,
    pub field: Arc<NumberField>,
    pub eigen: EigenData,
    pub states: Vec<PathState>,
    pub a: TransitionMatrix,
    pub ps: PlaceSystem,
    /// ⟨f(p_J), v⟩ for the prefix of each state J
    pub prefix_coords: Vec<FieldElem>,
}

impl FractalContext {
    pub fn new(s: &Substitution) -> Result<FractalContext> {
        let m = s.incidence_matrix();
        let field = Arc::new(NumberField::from_matrix(&m)?);
        let eigen = eigen_data(&field, &m)?;
        // clear denominators so every cloud coordinate is an algebraic integer
        let eigen = scale_v(&field, &eigen, &[])?;
        let (states, a) = build_automaton(s);
        // det M = (−1)^n · charpoly(0)
        let c0 = field.minpoly.constant_term();
        let det = if field.n % 2 == 0 { c0 } else { -c0 };
        let ps = PlaceSystem::build(field.clone(), &det)?;
        let prefix_coords = states
            .iter()
            .map(|st| word_coord(&field, &eigen, &st.rep.prefix.0))
            .collect();
        Ok(FractalContext {
            subst: s.clone(),
            field,
            eigen,
            states,
            a,
            ps,
            prefix_coords,
        })
    }
}

/// ⟨f(w), v⟩ = Σ_{letters l of w} v_l.
fn word_coord(field: &NumberField, eigen: &EigenData, w: &[Letter]) -> FieldElem {
    let mut acc = field.zero();
    for &l in w {
        acc = field.add(&acc, &eigen.v[(l - 1) as usize]);
    }
    acc
}

/// Partial digit series of a finite path: Σ_{i<m} ⟨f(p_i),v⟩·α^i exactly,
/// plus its embedding with finite-place precision level m.
pub fn psi_partial(ctx: &FractalContext, path: &[usize]) -> Result<(FieldElem, RepPoint)> {
    if !is_admissible(&ctx.a, path) {
        return Err(Error::Hypothesis("inadmissible path".into()));
    }
    let alpha = ctx.field.alpha();
    let mut acc = ctx.field.zero();
    for &st in path.iter().rev() {
        acc = ctx.field.add(&ctx.field.mul(&alpha, &acc), &ctx.prefix_coords[st]);
    }
    // Embed by Horner over the path digits: the canonical reduced form has
    // coefficients of size ~α^m, whose evaluation on the root disk would
    // inflate the enclosure radius far beyond the actual tiny value.
    let arch = ctx
        .ps
        .arch_contracting
        .iter()
        .map(|&ri| {
            let loc = &ctx.field.roots.locs[ri];
            let root = loc.disk();
            let mut d = Disk::zero();
            for &st in path.iter().rev() {
                d = d.mul(&root).add(&ctx.field.embed(&ctx.prefix_coords[st], loc));
            }
            d
        })
        .collect();
    let fin = ctx
        .ps
        .finite
        .iter()
        .map(|_| FinCoord {
            partial: acc.clone(),
            level: Some(path.len() as u64),
        })
        .collect();
    Ok((acc, RepPoint { arch, fin }))
}

/// Multiset of exact subtile coordinates at a fixed depth, with per-place
/// diameter bounds for the unresolved α^m·R_σ(b) residues.
#[derive(Clone, Debug)]
pub struct PointCloud {
    pub letter: Letter,
    pub depth: usize,
    /// distinct coordinates in canonical (coefficient-lexicographic) order
    pub coords: Vec<FieldElem>,
    /// multiplicity per coordinate
    pub counts: Vec<u64>,
    /// upper diameter bound per contracting place (arch order, then finite)
    pub delta: Vec<BigRational>,
}

impl PointCloud {
    pub fn total_points(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn sorted_cloud(
    letter: Letter,
    depth: usize,
    map: HashMap<Vec<BigRational>, u64>,
    delta: Vec<BigRational>,
) -> PointCloud {
    let mut entries: Vec<(Vec<BigRational>, u64)> = map.into_iter().collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    PointCloud {
        letter,
        depth,
        coords: entries.iter().map(|(c, _)| FieldElem(c.clone())).collect(),
        counts: entries.into_iter().map(|(_, n)| n).collect(),
        delta,
    }
}

/// Upper bound on the archimedean prefix-coordinate spread
/// C_v = max_{p,q} |⟨f(p)−f(q), v(α_v)⟩| at a contracting root location.
fn prefix_spread(ctx: &FractalContext, root_idx: usize) -> BigRational {
    let loc = &ctx.field.roots.locs[root_idx];
    let mut c = BigRational::zero();
    for i in &ctx.prefix_coords {
        for j in &ctx.prefix_coords {
            let d = ctx.field.embed(&ctx.field.sub(i, j), loc).abs_upper();
            c = c.max(d);
        }
    }
    c
}

/// Per-place diameter bound of α^m·R_σ(b): archimedean
/// |α_v|^m · C_v/(1−|α_v|), finite q^{−ν·m} (the residue has valuation ≥ νm).
pub fn delta_bounds(ctx: &FractalContext, m: usize) -> Vec<BigRational> {
    let alpha = ctx.field.alpha();
    let mut out = vec![];
    for &ri in &ctx.ps.arch_contracting {
        let amax = ctx
            .field
            .embed(&alpha, &ctx.field.roots.locs[ri])
            .abs_upper();
        assert!(amax < BigRational::one(), "contracting place not contracting");
        let diam = prefix_spread(ctx, ri) / (BigRational::one() - &amax);
        let mut pow = BigRational::one();
        for _ in 0..m {
            pow *= &amax;
        }
        out.push(pow * diam);
    }
    for pl in &ctx.ps.finite {
        let q = BigRational::from_integer(pl.norm_q.clone());
        let e = (pl.nu as usize) * m;
        let mut pow = BigRational::one();
        for _ in 0..e {
            pow *= &q;
        }
        out.push(pow.recip());
    }
    out
}

/// Depth-m clouds for every letter, built by the set-equation recursion
/// cloud_m(a) = ⨄_{states J=(b:pas), core a} α·cloud_{m−1}(b) + ⟨f(p),v⟩,
/// starting from cloud_0 = {0}. Errors if any cloud would exceed `cap`
/// points.
pub fn subtile_clouds_at(
    ctx: &FractalContext,
    m: usize,
    cap: u64,
) -> Result<Vec<PointCloud>> {
    let n = ctx.subst.n;
    let alpha = ctx.field.alpha();
    let zero_key = ctx.field.zero().0;
    let mut cur: Vec<HashMap<Vec<BigRational>, u64>> = (0..n)
        .map(|_| HashMap::from([(zero_key.clone(), 1u64)]))
        .collect();
    for _ in 0..m {
        let mut next: Vec<HashMap<Vec<BigRational>, u64>> =
            (0..n).map(|_| HashMap::new()).collect();
        for st in &ctx.states {
            let a_idx = (st.rep.core - 1) as usize;
            let b_idx = (st.rep.source - 1) as usize;
            for (key, cnt) in &cur[b_idx] {
                let pt = ctx.field.add(
                    &ctx.field.mul(&alpha, &FieldElem(key.clone())),
                    &ctx.prefix_coords[st.id],
                );
                *next[a_idx].entry(pt.0).or_insert(0) += cnt;
            }
        }
        for map in &next {
            let total: u64 = map.values().sum();
            if total > cap {
                return Err(Error::Cap(format!(
                    "cloud would hold {} points, cap {}",
                    total, cap
                )));
            }
        }
        cur = next;
    }
    let delta = delta_bounds(ctx, m);
    Ok((0..n)
        .map(|i| {
            sorted_cloud(
                (i + 1) as Letter,
                m,
                std::mem::take(&mut cur[i]),
                delta.clone(),
            )
        })
        .collect())
}

pub fn subtile_cloud(ctx: &FractalContext, a: Letter, m: usize, cap: u64) -> Result<PointCloud> {
    let mut all = subtile_clouds_at(ctx, m, cap)?;
    Ok(all.swap_remove((a - 1) as usize))
}

/// Independent oracle for the depth-m cloud of a: scan σ^m(b) for every
/// source letter b and record ⟨f(w[..i]), v⟩ at every position i carrying a.
fn cloud_by_word_scan(
    ctx: &FractalContext,
    a: Letter,
    m: usize,
) -> Result<HashMap<Vec<BigRational>, u64>> {
    let mut map: HashMap<Vec<BigRational>, u64> = HashMap::new();
    for b in 1..=ctx.subst.n as Letter {
        let w = ctx
            .subst
            .iterate_word(&crate::subst::Word::single(b), m, WORD_CAP)?;
        let mut acc = ctx.field.zero();
        for &l in &w.0 {
            if l == a {
                *map.entry(acc.0.clone()).or_insert(0) += 1;
            }
            acc = ctx.field.add(&acc, &ctx.eigen.v[(l - 1) as usize]);
        }
    }
    Ok(map)
}

/// Verify the set equation at depth m for letter a: the recursion-built
/// cloud must equal, as an exact multiset, the direct enumeration of the
/// prefix decompositions of σ^m(b) over all b.
pub fn set_equation_check(ctx: &FractalContext, a: Letter, m: usize, cap: u64) -> Result<bool> {
    let cloud = subtile_cloud(ctx, a, m, cap)?;
    let oracle = cloud_by_word_scan(ctx, a, m)?;
    if cloud.coords.len() != oracle.len() {
        return Ok(false);
    }
    for (c, &n) in cloud.coords.iter().zip(&cloud.counts) {
        if oracle.get(&c.0) != Some(&n) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact multiset verification of the set equation for every letter at
/// every depth 1..=max_depth in a single incremental pass. Coordinates are
/// algebraic integers whose coefficient vectors grow like α^m, far inside
/// i64 at practical depths; they are tracked in machine words (checked,
/// erroring on overflow) so that million-point clouds stay cheap. The slow
/// exact-rational path (`set_equation_check`) is the reference this fast
/// path is tested against.
pub fn set_equation_suite(ctx: &FractalContext, max_depth: usize, cap: u64) -> Result<bool> {
    use num::ToPrimitive;
    let n = ctx.subst.n;
    let deg = ctx.field.n;
    let int_coords = |e: &FieldElem| -> Result<Vec<i64>> {
        e.0.iter()
            .map(|q| {
                if !q.is_integer() {
                    return Err(Error::Hypothesis("non-integral coordinate".into()));
                }
                q.to_integer()
                    .to_i64()
                    .ok_or_else(|| Error::Cap("coordinate exceeds i64".into()))
            })
            .collect()
    };
    // monic minpoly x^deg + a_{deg−1}x^{deg−1} + ⋯ + a_0: multiplication by
    // α shifts coordinates and folds the overflowing one back via −a_i
    if !ctx.field.minpoly.is_monic() {
        return Err(Error::Hypothesis("minimal polynomial not monic".into()));
    }
    let tail: Vec<i128> = ctx.field.minpoly.coeffs[..deg]
        .iter()
        .map(|c| c.to_i128().ok_or_else(|| Error::Cap("minpoly coefficient exceeds i128".into())))
        .collect::<Result<_>>()?;
    let alpha_mul = |c: &[i64]| -> Result<Vec<i64>> {
        let top = c[deg - 1] as i128;
        (0..deg)
            .map(|i| {
                let shifted = if i == 0 { 0i128 } else { c[i - 1] as i128 };
                i64::try_from(shifted - top * tail[i])
                    .map_err(|_| Error::Cap("cloud coordinate exceeds i64".into()))
            })
            .collect()
    };
    let prefixes: Vec<Vec<i64>> = ctx
        .prefix_coords
        .iter()
        .map(int_coords)
        .collect::<Result<_>>()?;
    let vrows: Vec<Vec<i64>> = ctx
        .eigen
        .v
        .iter()
        .map(int_coords)
        .collect::<Result<_>>()?;
    let mut cur: Vec<HashMap<Vec<i64>, u64>> = (0..n)
        .map(|_| HashMap::from([(vec![0i64; deg], 1u64)]))
        .collect();
    let mut words: Vec<crate::subst::Word> = (1..=n as Letter)
        .map(crate::subst::Word::single)
        .collect();
    for _m in 1..=max_depth {
        // recursion side
        let mut next: Vec<HashMap<Vec<i64>, u64>> = (0..n).map(|_| HashMap::new()).collect();
        for st in &ctx.states {
            let a_idx = (st.rep.core - 1) as usize;
            let b_idx = (st.rep.source - 1) as usize;
            let t = &prefixes[st.id];
            for (key, cnt) in &cur[b_idx] {
                let mut pt = alpha_mul(key)?;
                for (p, &tv) in pt.iter_mut().zip(t) {
                    *p = p
                        .checked_add(tv)
                        .ok_or_else(|| Error::Cap("cloud coordinate exceeds i64".into()))?;
                }
                *next[a_idx].entry(pt).or_insert(0) += cnt;
            }
        }
        for map in &next {
            let total: u64 = map.values().sum();
            if total > cap {
                return Err(Error::Cap(format!(
                    "cloud would hold {total} points, cap {cap}"
                )));
            }
        }
        // oracle side: direct scan of σ^m(b) for every b
        let mut oracle: Vec<HashMap<Vec<i64>, u64>> = (0..n).map(|_| HashMap::new()).collect();
        for w in words.iter_mut() {
            *w = ctx.subst.apply(w);
            if w.len() > WORD_CAP {
                return Err(Error::Cap("word cap exceeded".into()));
            }
            let mut acc = vec![0i64; deg];
            for &l in &w.0 {
                *oracle[(l - 1) as usize].entry(acc.clone()).or_insert(0) += 1;
                for (a, &v) in acc.iter_mut().zip(&vrows[(l - 1) as usize]) {
                    *a = a
                        .checked_add(v)
                        .ok_or_else(|| Error::Cap("cloud coordinate exceeds i64".into()))?;
                }
            }
        }
        if next != oracle {
            return Ok(false);
        }
        cur = next;
    }
    Ok(true)
}

/// Embedded archimedean coordinates of a cloud: per point, one (re, im)
/// pair per contracting archimedean place, and the largest enclosure radius.
pub fn embed_cloud(ctx: &FractalContext, cloud: &PointCloud) -> (Vec<Vec<(f64, f64)>>, f64) {
    let mut max_rad = 0.0f64;
    let pts = cloud
        .coords
        .iter()
        .map(|c| {
            ctx.ps
                .arch_contracting
                .iter()
                .map(|&ri| {
                    let d = ctx.field.embed(c, &ctx.field.roots.locs[ri]);
                    max_rad = max_rad.max(to_f64(&d.rad));
                    d.to_f64()
                })
                .collect()
        })
        .collect();
    (pts, max_rad)
}

fn point_dist(x: &[(f64, f64)], y: &[(f64, f64)]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
        .fold(0.0, f64::max)
}

/// Two-sided Hausdorff distance between the archimedean embeddings of two
/// clouds, as an interval folding in the enclosure radii. When finite places
/// exist, q^{−ν·min(depth)} is added to the upper end (any two partial sums
/// truncated at those depths are at most that far apart at the place).
pub fn hausdorff_estimate(
    ctx: &FractalContext,
    c1: &PointCloud,
    c2: &PointCloud,
) -> (f64, f64) {
    let (p1, r1) = embed_cloud(ctx, c1);
    let (p2, r2) = embed_cloud(ctx, c2);
    let rho = |a: &Vec<Vec<(f64, f64)>>, b: &Vec<Vec<(f64, f64)>>| -> f64 {
        a.iter()
            .map(|x| {
                b.iter()
                    .map(|y| point_dist(x, y))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    let d = rho(&p1, &p2).max(rho(&p2, &p1));
    let err = 2.0 * (r1 + r2);
    let mut hi = d + err;
    let depth = c1.depth.min(c2.depth);
    for pl in &ctx.ps.finite {
        let q = to_f64(&BigRational::from_integer(pl.norm_q.clone()));
        hi = hi.max(q.powi(-((pl.nu as usize * depth) as i32)));
    }
    ((d - err).max(0.0), hi)
}

/// How to flatten a cloud to the plane: one archimedean place (complex →
/// (re, im); real → (value, 0)), a square raster resolution, and an optional
/// bounding box (min_x, min_y, max_x, max_y).
#[derive(Clone, Debug)]
pub struct ProjectionSpec {
    pub place: usize,
    pub resolution: u32,
    pub bbox: Option<(f64, f64, f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub width: u32,
    pub height: u32,
    pub grid: Vec<bool>,
    pub points: Vec<(f64, f64)>,
    pub bbox: (f64, f64, f64, f64),
}

/// Deterministic rasterization of the chosen archimedean coordinate.
pub fn project(ctx: &FractalContext, cloud: &PointCloud, spec: &ProjectionSpec) -> Result<Projection> {
    if cloud.coords.is_empty() {
        return Err(Error::Hypothesis("empty cloud".into()));
    }
    if spec.place >= ctx.ps.arch_contracting.len() {
        return Err(Error::Parse(format!(
            "no archimedean place {}",
            spec.place
        )));
    }
    assert!(spec.resolution >= 16, "resolution too small");
    let (pts, _) = embed_cloud(ctx, cloud);
    let points: Vec<(f64, f64)> = pts.iter().map(|p| p[spec.place]).collect();
    let bbox = spec.bbox.unwrap_or_else(|| {
        let (mut x0, mut y0, mut x1, mut y1) =
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &points {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        let mx = 0.05 * (x1 - x0).max(1e-9);
        let my = 0.05 * (y1 - y0).max(1e-9);
        (x0 - mx, y0 - my, x1 + mx, y1 + my)
    });
    let res = spec.resolution;
    let mut grid = vec![false; (res * res) as usize];
    let (x0, y0, x1, y1) = bbox;
    for &(x, y) in &points {
        let gx = ((x - x0) / (x1 - x0) * res as f64) as i64;
        let gy = ((y - y0) / (y1 - y0) * res as f64) as i64;
        if (0..res as i64).contains(&gx) && (0..res as i64).contains(&gy) {
            grid[(gy * res as i64 + gx) as usize] = true;
        }
    }
    Ok(Projection {
        width: res,
        height: res,
        grid,
        points,
        bbox,
    })
}

/// Binary PPM (P6), black points on white.
pub fn ppm_bytes(p: &Projection) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", p.width, p.height).into_bytes();
    for row in 0..p.height {
        // flip vertically so increasing y points up
        let r = p.height - 1 - row;
        for col in 0..p.width {
            let occ = p.grid[(r * p.width + col) as usize];
            let v = if occ { 0u8 } else { 255u8 };
            out.extend_from_slice(&[v, v, v]);
        }
    }
    out
}

/// Plain SVG with one small circle per point.
pub fn svg_string(p: &Projection) -> String {
    let (x0, y0, x1, y1) = p.bbox;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
        x0,
        -y1,
        x1 - x0,
        y1 - y0
    );
    let r = 0.002 * (x1 - x0).max(y1 - y0);
    for &(x, y) in &p.points {
        s.push_str(&format!(
            "<circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\"/>\n",
            x, -y, r
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// CSV export: letter, depth, multiplicity, exact coefficients as fractions,
/// embedded archimedean coordinates.
pub fn cloud_csv(ctx: &FractalContext, cloud: &PointCloud) -> String {
    let nplaces = ctx.ps.arch_contracting.len();
    let mut s = String::from("letter,depth,count");
    for i in 0..ctx.field.n {
        s.push_str(&format!(",c{}", i));
    }
    for i in 0..nplaces {
        s.push_str(&format!(",re{},im{}", i, i));
    }
    s.push('\n');
    let (pts, _) = embed_cloud(ctx, cloud);
    for (i, c) in cloud.coords.iter().enumerate() {
        s.push_str(&format!("{},{},{}", cloud.letter, cloud.depth, cloud.counts[i]));
        for q in &c.0 {
            s.push_str(&format!(",{}", q));
        }
        for &(re, im) in &pts[i] {
            s.push_str(&format!(",{:.12e},{:.12e}", re, im));
        }
        s.push('\n');
    }
    s
}

/// Check the continuity modulus of the digit series on random path pairs:
/// paths agreeing on their first k states have partial sums within
/// max(C_v·|α_v|^k/(1−|α_v|), q^{−νk}) in the max metric.
pub fn continuity_modulus_check(ctx: &FractalContext, trials: usize, seed: u64) -> Result<bool> {
    assert!(trials >= 1);
    let d = ctx.states.len();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let succ: Vec<Vec<usize>> = (0..d)
        .map(|i| (0..d).filter(|&j| ctx.a.allows(i, j)).collect())
        .collect();
    let extend = |path: &mut Vec<usize>, upto: usize, rng: &mut ChaCha12Rng| {
        while path.len() < upto {
            let cur = *path.last().unwrap();
            let s = &succ[cur];
            path.push(s[rng.random_range(0..s.len())]);
        }
    };
    // per-place modulus constants
    let alpha = ctx.field.alpha();
    let arch: Vec<(BigRational, BigRational)> = ctx
        .ps
        .arch_contracting
        .iter()
        .map(|&ri| {
            let amax = ctx
                .field
                .embed(&alpha, &ctx.field.roots.locs[ri])
                .abs_upper();
            (prefix_spread(ctx, ri), amax)
        })
        .collect();
    for _ in 0..trials {
        let k = rng.random_range(1..=10usize);
        let len = k + 15;
        let mut p1 = vec![rng.random_range(0..d)];
        extend(&mut p1, len, &mut rng);
        let mut p2 = p1[..k].to_vec();
        extend(&mut p2, len, &mut rng);
        let (_, r1) = psi_partial(ctx, &p1)?;
        let (_, r2) = psi_partial(ctx, &p2)?;
        let dist = ctx.ps.dk(&r1, &r2)?;
        let mut bound = BigRational::zero();
        for (c, amax) in &arch {
            let mut pow = BigRational::one();
            for _ in 0..k {
                pow *= amax;
            }
            bound = bound.max(c * pow / (BigRational::one() - amax));
        }
        for pl in &ctx.ps.finite {
            let q = BigRational::from_integer(pl.norm_q.clone());
            let mut pow = BigRational::one();
            for _ in 0..(pl.nu as usize * k) {
                pow *= &q;
            }
            bound = bound.max(pow.recip());
        }
        if dist.hi > bound {
            if p1 == p2 && !dist.hi.is_zero() {
                return Err(Error::Hypothesis("identical paths at distance > 0".into()));
            }
            return Ok(false);
        }
    }
    Ok(true)
}

/// Boundary-pixel fraction of a projection: occupied cells with at least one
/// unoccupied 4-neighbour, over all occupied cells.
pub fn boundary_fraction(p: &Projection) -> f64 {
    let (w, h) = (p.width as i64, p.height as i64);
    let occ = |x: i64, y: i64| -> bool {
        (0..w).contains(&x) && (0..h).contains(&y) && p.grid[(y * w + x) as usize]
    };
    let mut total = 0u64;
    let mut boundary = 0u64;
    for y in 0..h {
        for x in 0..w {
            if !occ(x, y) {
                continue;
            }
            total += 1;
            if !(occ(x - 1, y) && occ(x + 1, y) && occ(x, y - 1) && occ(x, y + 1)) {
                boundary += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        boundary as f64 / total as f64
    }
}
