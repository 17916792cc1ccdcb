//! pisot-lab: analyze substitutions, render Rauzy fractals, verify tilings,
//! check strong coincidence, and run the ergodic-arithmetic simulations.
//!
//! Exit codes: 0 ok, 1 parse, 2 hypothesis-failure, 3 unsupported-field,
//! 4 cap exceeded.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use num::{BigInt, BigRational, One, Zero};
use serde_json::{json, Value};

use pisot_core::analysis::{
    b_counts_and_s, coefficient_bound, either_check, entry_series, fixed_state, garsia_check,
    primitivity_exponent, sample_covisiting, special_cylinder, tau2_distribution, tau2_empirical,
    tv_distance, EitherVerdict, SpecialCylinder,
};
use pisot_core::exact::to_f64;
use pisot_core::fractal::{cloud_csv, embed_cloud, subtile_clouds_at};
use pisot_core::markov::{automaton_json, parry_chain, sample_path, spectral_entry, ParryChain};
use pisot_core::nfield::{char_poly, is_irreducible_over_q_checked};
use pisot_core::roots::RootLoc;
use pisot_core::subst::{parse_substitution, strong_coincidence, Substitution};
use pisot_core::tiling::{
    candidate_z0, central_region, delone_radii, patch_json, tiling_statistics, translation_patch,
    LatticeVec,
};
use pisot_core::{Error, FractalContext};

const SCHEMA: &str = "pisot-lab/1";

#[derive(Parser)]
#[command(name = "pisot-lab", version, about = "Pisot substitution laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Field, automaton, places and Parry-measure report
    Analyze(CommonArgs),
    /// Subtile point clouds as SVG/PPM/CSV
    Render(CommonArgs),
    /// Translation patch, covering statistics, Delone radii
    Tile(CommonArgs),
    /// Strong-coincidence witnesses per letter pair
    Coincide(CommonArgs),
    /// Garsia fuzz, dichotomy corpus, entry times and entry series
    Simulate(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Substitution rules "1->12;2->13;3->1", or @file to read them
    #[arg(long)]
    sub: Option<String>,
    /// Optional JSON config file; explicit flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Depth m (render/tile clouds, coincide k_max, simulate horizon base)
    #[arg(long)]
    depth: Option<usize>,
    /// Lattice tower level cap i_max
    #[arg(long)]
    levels: Option<usize>,
    /// Sample / trial counts
    #[arg(long)]
    samples: Option<usize>,
    /// RNG seed recorded in every artifact
    #[arg(long)]
    seed: Option<u64>,
    /// Root-isolation precision in bits
    #[arg(long)]
    precision_bits: Option<u32>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: json | csv | svg | ppm
    #[arg(long)]
    format: Option<String>,
}

#[derive(Clone)]
struct JobConfig {
    sub: String,
    depth: usize,
    levels: usize,
    samples: usize,
    seed: u64,
    precision_bits: u32,
    out: PathBuf,
    format: String,
}

impl JobConfig {
    fn to_json(&self) -> Value {
        json!({
            "sub": self.sub,
            "depth": self.depth,
            "levels": self.levels,
            "samples": self.samples,
            "seed": self.seed,
            "precision_bits": self.precision_bits,
            "out": self.out.display().to_string(),
            "format": self.format,
        })
    }
}

fn resolve_config(args: &CommonArgs, default_depth: usize) -> anyhow::Result<JobConfig> {
    let file: Value = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("config {}: {e}", p.display())))?
        }
        None => json!({}),
    };
    let gs = |k: &str| file.get(k).and_then(|v| v.as_str().map(String::from));
    let gu = |k: &str| file.get(k).and_then(Value::as_u64);
    let sub_raw = args
        .sub
        .clone()
        .or_else(|| gs("sub"))
        .ok_or_else(|| Error::Parse("no substitution given (--sub or config)".into()))?;
    let sub = if let Some(path) = sub_raw.strip_prefix('@') {
        fs::read_to_string(path)
            .with_context(|| format!("reading substitution file {path}"))?
            .trim()
            .to_string()
    } else {
        sub_raw
    };
    Ok(JobConfig {
        sub,
        depth: args
            .depth
            .or(gu("depth").map(|v| v as usize))
            .unwrap_or(default_depth),
        levels: args.levels.or(gu("levels").map(|v| v as usize)).unwrap_or(0),
        samples: args
            .samples
            .or(gu("samples").map(|v| v as usize))
            .unwrap_or(1000),
        seed: args.seed.or(gu("seed")).unwrap_or(1),
        precision_bits: args
            .precision_bits
            .or(gu("precision_bits").map(|v| v as u32))
            .unwrap_or(64),
        out: args
            .out
            .clone()
            .or_else(|| gs("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(".")),
        format: args
            .format
            .clone()
            .or_else(|| gs("format"))
            .unwrap_or_else(|| "json".into()),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Analyze(a) => resolve_config(a, 10).and_then(cmd_analyze),
        Cmd::Render(a) => resolve_config(a, 12).and_then(cmd_render),
        Cmd::Tile(a) => resolve_config(a, 10).and_then(cmd_tile),
        Cmd::Coincide(a) => resolve_config(a, 8).and_then(cmd_coincide),
        Cmd::Simulate(a) => resolve_config(a, 40).and_then(cmd_simulate),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(match e.downcast_ref::<Error>() {
                Some(Error::Parse(_)) | None => 1u8,
                Some(Error::Hypothesis(_)) => 2,
                Some(Error::UnsupportedField(_)) => 3,
                Some(Error::Cap(_)) => 4,
            })
        }
    }
}

fn context_for(cfg: &JobConfig) -> anyhow::Result<(Substitution, FractalContext)> {
    let s = parse_substitution(&cfg.sub)?;
    if !s.is_primitive(64).0 {
        return Err(Error::Hypothesis("not primitive".into()).into());
    }
    let ctx = FractalContext::new(&s)?;
    Ok((s, ctx))
}

fn write_artifact(cfg: &JobConfig, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))?;
    let path = cfg.out.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn write_report(cfg: &JobConfig, name: &str, body: Value) -> anyhow::Result<PathBuf> {
    let mut report = json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.to_json(),
        "seed": cfg.seed,
    });
    report
        .as_object_mut()
        .unwrap()
        .extend(body.as_object().cloned().unwrap_or_default());
    let mut text = serde_json::to_string_pretty(&report).expect("serializable report");
    text.push('\n');
    write_artifact(cfg, name, text.as_bytes())
}

fn root_json(loc: &RootLoc) -> Value {
    let d = loc.disk();
    let (re, im) = d.to_f64();
    json!({
        "re": re,
        "im": im,
        "radius": to_f64(&d.rad),
        "real": loc.is_real(),
    })
}

fn cmd_analyze(cfg: JobConfig) -> anyhow::Result<()> {
    let (s, ctx) = context_for(&cfg)?;
    let m = s.incidence_matrix();
    let cp = char_poly(&m);
    let irreducible = is_irreducible_over_q_checked(&cp)?;
    let bits = cfg.precision_bits.min(256);
    let prec = BigRational::new(BigInt::one(), BigInt::from(2u8).pow(bits));
    let roots = ctx.field.roots.refine(&prec);
    let chain = parry_chain(&ctx.field, &ctx.states, &ctx.a, &ctx.eigen)?;
    // spectral sanity: worst absolute gap between exact entries of A^k and
    // the eigen-expansion, k ≤ 10
    let mut spectral_gap = 0.0f64;
    for k in 1..=10usize {
        for i in 0..ctx.a.dim() {
            for j in 0..ctx.a.dim() {
                let (exact, approx) = spectral_entry(&chain, k, i, j);
                let e = to_f64(&BigRational::from_integer(exact));
                spectral_gap = spectral_gap.max((e - approx).abs());
            }
        }
    }
    let (_, prim_k) = s.is_primitive(64);
    let body = json!({
        "substitution": cfg.sub,
        "alphabet_size": s.n,
        "incidence": matrix_rows(&m),
        "char_poly": cp.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "irreducible": irreducible,
        "pisot": true,
        "perron": to_f64(&ctx.field.perron_interval().mid()),
        "roots": roots.locs.iter().map(root_json).collect::<Vec<_>>(),
        "places": {
            "arch_contracting": ctx.ps.arch_contracting.iter().map(|&ri| {
                json!({"index": ri, "abs": to_f64(&ctx.field.roots.locs[ri].abs_upper())})
            }).collect::<Vec<_>>(),
            "finite": ctx.ps.finite.iter().map(|pl| {
                json!({"p": pl.p.to_string(), "q": pl.norm_q.to_string(), "nu": pl.nu})
            }).collect::<Vec<_>>(),
        },
        "automaton": automaton_json(&ctx.states, &ctx.a),
        "d_states": ctx.states.len(),
        "primitivity": {
            "substitution_k": prim_k,
            "automaton_n": primitivity_exponent(&ctx.a)?,
        },
        "parry": {
            "p": chain.p_num,
            "pmat": chain.pmat_num,
            "gram": to_f64(&ctx.field.embed_real(&chain.gram, &ctx.field.perron_interval()).mid()),
        },
        "spectral_gap_k_le_10": spectral_gap,
    });
    write_report(&cfg, "analysis.json", body)?;
    Ok(())
}

fn matrix_rows(m: &pisot_core::IntMatrix) -> Vec<Vec<String>> {
    (0..m.rows)
        .map(|i| (0..m.cols).map(|j| m.at(i, j).to_string()).collect())
        .collect()
}

const PALETTE: [(u8, u8, u8); 6] = [
    (214, 69, 65),
    (31, 119, 180),
    (44, 160, 44),
    (148, 103, 189),
    (255, 127, 14),
    (23, 190, 207),
];

fn cmd_render(cfg: JobConfig) -> anyhow::Result<()> {
    let (_, ctx) = context_for(&cfg)?;
    let clouds = subtile_clouds_at(&ctx, cfg.depth, pisot_core::fractal::CLOUD_CAP)?;
    // shared bounding box over every letter at the first archimedean place
    let mut bbox = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut embedded: Vec<Vec<(f64, f64)>> = vec![];
    for c in &clouds {
        let (pts, _) = embed_cloud(&ctx, c);
        let flat: Vec<(f64, f64)> = pts.iter().map(|p| p[0]).collect();
        for &(x, y) in &flat {
            bbox.0 = bbox.0.min(x);
            bbox.1 = bbox.1.min(y);
            bbox.2 = bbox.2.max(x);
            bbox.3 = bbox.3.max(y);
        }
        embedded.push(flat);
    }
    let pad = 0.03 * ((bbox.2 - bbox.0).max(bbox.3 - bbox.1)).max(1e-9);
    let bbox = (bbox.0 - pad, bbox.1 - pad, bbox.2 + pad, bbox.3 + pad);
    let body = json!({
        "depth": cfg.depth,
        "letters": clouds.iter().map(|c| json!({
            "letter": c.letter,
            "points": c.coords.len(),
            "total": c.total_points().to_string(),
            "delta": c.delta.iter().map(to_f64).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "bbox": [bbox.0, bbox.1, bbox.2, bbox.3],
    });
    write_report(&cfg, "render.json", body)?;
    match cfg.format.as_str() {
        "json" => {}
        "csv" => {
            let mut csv = String::new();
            for (i, c) in clouds.iter().enumerate() {
                let s = cloud_csv(&ctx, c);
                if i == 0 {
                    csv.push_str(&s);
                } else {
                    // skip the repeated header line
                    csv.push_str(s.split_once('\n').map(|x| x.1).unwrap_or(""));
                }
            }
            write_artifact(&cfg, "clouds.csv", csv.as_bytes())?;
        }
        "svg" => {
            let mut svg = String::new();
            let w = 800.0;
            let h = w * (bbox.3 - bbox.1) / (bbox.2 - bbox.0);
            svg.push_str(&format!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            ));
            let r = (0.9 * w / 800.0).max(0.6);
            for (li, flat) in embedded.iter().enumerate() {
                let (cr, cg, cb) = PALETTE[li % PALETTE.len()];
                svg.push_str(&format!("<g fill=\"rgb({cr},{cg},{cb})\">\n"));
                for &(x, y) in flat {
                    let px = (x - bbox.0) / (bbox.2 - bbox.0) * w;
                    let py = (bbox.3 - y) / (bbox.3 - bbox.1) * h;
                    svg.push_str(&format!(
                        "<circle cx=\"{px:.3}\" cy=\"{py:.3}\" r=\"{r:.2}\"/>\n"
                    ));
                }
                svg.push_str("</g>\n");
            }
            svg.push_str("</svg>\n");
            write_artifact(&cfg, "fractal.svg", svg.as_bytes())?;
        }
        "ppm" => {
            let res = 800usize;
            let hres = ((res as f64) * (bbox.3 - bbox.1) / (bbox.2 - bbox.0))
                .round()
                .max(1.0) as usize;
            let mut img = vec![255u8; res * hres * 3];
            for (li, flat) in embedded.iter().enumerate() {
                let (cr, cg, cb) = PALETTE[li % PALETTE.len()];
                for &(x, y) in flat {
                    let px = (((x - bbox.0) / (bbox.2 - bbox.0) * res as f64) as usize)
                        .min(res - 1);
                    let py = (((bbox.3 - y) / (bbox.3 - bbox.1) * hres as f64) as usize)
                        .min(hres - 1);
                    let o = (py * res + px) * 3;
                    img[o] = cr;
                    img[o + 1] = cg;
                    img[o + 2] = cb;
                }
            }
            let mut out = format!("P6\n{res} {hres}\n255\n").into_bytes();
            out.extend_from_slice(&img);
            write_artifact(&cfg, "fractal.ppm", &out)?;
        }
        other => {
            return Err(Error::Parse(format!("unknown format {other} (json|csv|svg|ppm)")).into())
        }
    }
    Ok(())
}

fn cmd_tile(cfg: JobConfig) -> anyhow::Result<()> {
    let (s, ctx) = context_for(&cfg)?;
    let letters: Vec<u32> = (1..=s.n as u32).collect();
    let region = central_region(&ctx, 2);
    let patch = translation_patch(&ctx, &region, &letters, cfg.levels)?;
    let mut warnings: Vec<String> = vec![];
    if patch.items.len() < 2 * s.n {
        warnings.push(format!(
            "small patch ({} items); statistics may be uninformative",
            patch.items.len()
        ));
    }
    let stats = tiling_statistics(&ctx, &patch, cfg.samples, cfg.depth, cfg.seed)?;
    let delone: Vec<Value> = letters
        .iter()
        .map(|&a| match delone_radii(&ctx, &patch, a, 8) {
            Ok((r1, r2)) => json!({"letter": a, "r1": r1, "r2": r2}),
            Err(e) => {
                warnings.push(format!("delone letter {a}: {e}"));
                json!({"letter": a, "r1": Value::Null, "r2": Value::Null})
            }
        })
        .collect();
    let body = json!({
        "depth": stats.m,
        "samples": stats.samples,
        "histogram": stats.histogram,
        "unstable": stats.unstable,
        "patch": patch_json(&patch),
        "delone": delone,
        "warnings": warnings,
    });
    write_report(&cfg, "tiling.json", body)?;
    Ok(())
}

fn cmd_coincide(cfg: JobConfig) -> anyhow::Result<()> {
    let s = parse_substitution(&cfg.sub)?;
    if !s.is_primitive(64).0 {
        return Err(Error::Hypothesis("not primitive".into()).into());
    }
    let k_max = cfg.depth;
    let res = strong_coincidence(&s, k_max.max(1))?;
    let mut pairs: Vec<Value> = vec![];
    let mut unresolved = 0usize;
    for a in 1..=s.n as u32 {
        for b in a..=s.n as u32 {
            let w = res.get(&(a, b)).and_then(|o| o.as_ref());
            match w {
                Some(wit) if wit.k <= k_max => pairs.push(json!({
                    "pair": [a, b],
                    "k": wit.k,
                    "core": wit.core,
                    "prefix_vector": wit.prefix_vector.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                })),
                _ => {
                    unresolved += 1;
                    pairs.push(json!({"pair": [a, b], "unresolved_at_k_max": k_max}));
                }
            }
        }
    }
    let body = json!({
        "k_max": k_max,
        "pairs": pairs,
        "unresolved": unresolved,
        "cap_notice": if unresolved > 0 {
            Some(format!("{unresolved} pair(s) unresolved at k_max={k_max}; raise --depth"))
        } else { None },
    });
    write_report(&cfg, "coincide.json", body)?;
    Ok(())
}

fn cmd_simulate(cfg: JobConfig) -> anyhow::Result<()> {
    let (_, ctx) = context_for(&cfg)?;
    let chain: ParryChain = parry_chain(&ctx.field, &ctx.states, &ctx.a, &ctx.eigen)?;
    let m_bound = coefficient_bound(&ctx, &candidate_z0(&ctx, cfg.levels)?)?;
    let cyl = special_cylinder(&ctx, &m_bound)?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    // Garsia fuzz
    let mut garsia_trials = 0usize;
    let mut garsia_violations = 0usize;
    while garsia_trials < cfg.samples {
        let deg = rng.random_range(0..=10usize);
        let coeffs: Vec<BigInt> = (0..=deg)
            .map(|_| BigInt::from(rng.random_range(-5i64..=5)))
            .collect();
        if coeffs.iter().all(|c| c.is_zero()) {
            continue;
        }
        match garsia_check(&ctx, &coeffs) {
            Ok(r) => {
                garsia_trials += 1;
                if !r.ok {
                    garsia_violations += 1;
                }
            }
            Err(_) => continue,
        }
    }
    // dichotomy corpus on co-visiting pairs
    let zero_w = LatticeVec {
        base: vec![BigInt::zero(); ctx.field.n],
        level: 0,
    };
    let (mut vanish, mut escape, mut indet, mut violation) = (0usize, 0, 0, 0);
    for _ in 0..cfg.samples {
        let d = rng.random_range(0..=6usize);
        let len = d + cyl.l + 1 + 30;
        let (p1, p2) = sample_covisiting(&ctx, &cyl, d, len, &mut rng);
        match either_check(&ctx, &cyl, &m_bound, &p1, &p2, &zero_w, d)? {
            EitherVerdict::PolyVanishes => vanish += 1,
            EitherVerdict::EscapesNeighborhood => escape += 1,
            EitherVerdict::Indeterminate => indet += 1,
            EitherVerdict::Violation => violation += 1,
        }
    }
    // τ₂ with a tractable cylinder length (the certified L makes the state
    // space and the hit probabilities astronomically small; both lengths
    // are recorded)
    let l_used = cyl.l.min(2);
    let cyl_used = SpecialCylinder {
        state: fixed_state(&ctx.states)?,
        l: l_used,
        n_prim: cyl.n_prim,
    };
    let horizon = cfg.depth.max(10);
    let dist = tau2_distribution(&chain, &cyl_used, horizon)?;
    let emp = tau2_empirical(&chain, &cyl_used, cfg.samples, horizon, cfg.seed);
    let not_found = emp.iter().filter(|x| x.is_none()).count();
    let tv = tv_distance(&dist, &emp);
    // entry series
    let path = sample_path(&chain, 60_000, cfg.seed.wrapping_add(1)).0;
    let entries = match entry_series(&path, &cyl_used, 120) {
        Ok(series) => {
            let ea = b_counts_and_s(&ctx, &cyl_used, &series, 120)?;
            json!({
                "n0": series.n0,
                "entries": series.times.len(),
                "b_head": ea.b.iter().take(16).map(|x| x.to_string()).collect::<Vec<_>>(),
                "s_ratio_last": ea.s_ratio.last(),
                "s_ratio_head": ea.s_ratio.iter().take(16).collect::<Vec<_>>(),
            })
        }
        Err(e) => json!({"warning": format!("entry series unavailable: {e}")}),
    };
    let body = json!({
        "cylinder": {"state": cyl.state, "l_certified": cyl.l, "l_used": l_used, "n_prim": cyl.n_prim},
        "coefficient_bound": m_bound.to_string(),
        "garsia": {"trials": garsia_trials, "violations": garsia_violations},
        "either": {"vanishes": vanish, "escapes": escape, "indeterminate": indet, "violation": violation},
        "tau2": {
            "horizon": horizon,
            "pmf_mass": dist.pmf.iter().sum::<f64>() + dist.tail,
            "pmf_head": dist.pmf.iter().take(16).collect::<Vec<_>>(),
            "tail": dist.tail,
            "empirical_pairs": cfg.samples,
            "empirical_not_found": not_found,
            "tv": tv,
        },
        "entry_series": entries,
    });
    write_report(&cfg, "simulate.json", body)?;
    Ok(())
}
