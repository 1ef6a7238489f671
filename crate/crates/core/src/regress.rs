//! Built-in reference suite.
//!
//! Each row reproduces one known closed-form value or structural fact about
//! the bundled corpus of norms (weighted l1 pairs, the quadratic pair and its
//! sum/max combinations, lp exponent families) and checks it against the
//! library at a pinned tolerance. The CLI `paper` subcommand prints one
//! pass/fail line per row and exits nonzero if any fails.

use crate::equiv::{
    check_sum_identity, divergence_probe, diverging_verdict, scan_constant, tan_ratio,
    topological_constants, wielandt_bound, ProbeSchedule, ScanConfig,
};
use crate::error::Result;
use crate::geometry::{
    angle_modulus, compare_extreme_rays, convexity_modulus, strict_convexity_witness,
    vertex_angles,
};
use crate::gfunc::{self, GOptions, Side};
use crate::norms::{dualize, parse_norm, NormExpr, Vector};
use crate::plane::{g_planar, phi_pair, radial, sigma, PolarProfile};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// One reference check: `pass` iff `value` lies in `[lo, hi]`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RegressRow {
    pub id: &'static str,
    pub label: String,
    #[serde(serialize_with = "crate::equiv::serialize_extended")]
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

fn row(id: &'static str, label: impl Into<String>, value: f64, lo: f64, hi: f64) -> RegressRow {
    RegressRow { id, label: label.into(), value, lo, hi, pass: value >= lo && value <= hi }
}

fn near(id: &'static str, label: impl Into<String>, value: f64, expect: f64, tol: f64) -> RegressRow {
    row(id, label, value, expect - tol, expect + tol)
}

/// Sampling controls for the suite.
#[derive(Debug, Clone)]
pub struct RegressOptions {
    pub seed: u64,
    pub grid: usize,
    pub samples: usize,
    pub refine_rounds: usize,
    /// Randomized-property case count per property.
    pub cases: usize,
    /// Seeded SPD pairs for the pencil-bound rows.
    pub spd_pairs: usize,
}

impl Default for RegressOptions {
    fn default() -> Self {
        RegressOptions {
            seed: 0,
            grid: 720,
            samples: 10_000,
            refine_rounds: 3,
            cases: 10_000,
            spd_pairs: 20,
        }
    }
}

impl RegressOptions {
    fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            grid: self.grid,
            samples: self.samples,
            refine_rounds: self.refine_rounds,
            seed: self.seed,
            ..ScanConfig::default()
        }
    }
}

fn v(coords: &[f64]) -> Vector {
    Vector::new(coords.to_vec()).unwrap()
}

pub fn quad_31() -> NormExpr {
    parse_norm("quad([[3,0],[0,1]])").unwrap()
}

pub fn quad_13() -> NormExpr {
    parse_norm("quad([[1,0],[0,3]])").unwrap()
}

pub fn max_pair() -> NormExpr {
    parse_norm("max(quad([[3,0],[0,1]]),quad([[1,0],[0,3]]))").unwrap()
}

pub fn sum_pair() -> NormExpr {
    parse_norm("sum(quad([[3,0],[0,1]]),quad([[1,0],[0,3]]))").unwrap()
}

pub fn weighted_l1_a() -> NormExpr {
    parse_norm("lp(1, w=[2,1])").unwrap()
}

pub fn weighted_l1_b() -> NormExpr {
    parse_norm("lp(1, w=[1,2])").unwrap()
}

/// The 2D norms exercised by the structural suites.
pub fn corpus_2d() -> Vec<(&'static str, NormExpr)> {
    vec![
        ("quad-identity", parse_norm("quad([[1,0],[0,1]])").unwrap()),
        ("quad-3-1", quad_31()),
        ("l1", parse_norm("lp(1)").unwrap()),
        ("linf", parse_norm("lp(inf)").unwrap()),
        ("l3", parse_norm("lp(3)").unwrap()),
        ("weighted-l1", weighted_l1_a()),
        ("sum-quad", sum_pair()),
        ("max-quad", max_pair()),
    ]
}

/// Norm pairs whose scan/topology interplay the suite checks.
pub fn corpus_pairs() -> Vec<(&'static str, NormExpr, NormExpr)> {
    vec![
        ("weighted-l1-pair", weighted_l1_a(), weighted_l1_b()),
        ("quad-pair", quad_31(), quad_13()),
        ("sum-vs-quad", sum_pair(), quad_31()),
        ("l1-vs-linf", parse_norm("lp(1)").unwrap(), parse_norm("lp(inf)").unwrap()),
        ("quad-vs-max", quad_31(), max_pair()),
    ]
}

/// All suite ids accepted by `--only`.
pub const GROUP_IDS: [&str; 10] = [
    "example-2.6",
    "example-2.7",
    "example-5.4",
    "wielandt",
    "lp-divergence",
    "sum-rule",
    "planar-formulas",
    "polar-structure",
    "geometry",
    "g-properties",
];

/// Run the suite, optionally restricted to one group id.
pub fn run(only: Option<&str>, opts: &RegressOptions) -> Result<Vec<RegressRow>> {
    let mut rows = Vec::new();
    let want = |id: &str| only.is_none_or(|o| o == id);
    if want("example-2.6") {
        rows.extend(quadratic_pair_rows(opts)?);
    }
    if want("example-2.7") {
        rows.extend(max_pair_rows()?);
    }
    if want("example-5.4") {
        rows.extend(weighted_pair_rows(opts)?);
    }
    if want("wielandt") {
        rows.extend(pencil_rows(opts)?);
    }
    if want("lp-divergence") {
        rows.extend(divergence_rows()?);
    }
    if want("sum-rule") {
        rows.extend(sum_rule_rows(opts)?);
    }
    if want("planar-formulas") {
        rows.extend(planar_rows()?);
    }
    if want("polar-structure") {
        rows.extend(polar_rows(opts)?);
    }
    if want("geometry") {
        rows.extend(geometry_rows(opts)?);
    }
    if want("g-properties") {
        rows.extend(property_rows(opts)?);
    }
    Ok(rows)
}

fn quadratic_pair_rows(opts: &RegressOptions) -> Result<Vec<RegressRow>> {
    const ID: &str = "example-2.6";
    let mut rows = Vec::new();
    let q1 = quad_31();
    for s in [0.1, 0.01] {
        let x = v(&[1.0, 1.0]);
        let y = v(&[1.0 - s, 1.0 + s]);
        let pair = gfunc::g_functional(&q1, &x, &y)?;
        rows.push(near(
            ID,
            format!("quadratic g at collapsing pair, s = {s}"),
            pair.g,
            4.0 - 2.0 * s,
            1e-12,
        ));
    }
    // The sum norm fails the parallelogram law at (1,0), (0,1): it is not an
    // inner-product norm even though it is angularly tied to one.
    let n3 = sum_pair();
    let plus = n3.eval_unchecked(&[1.0, 1.0]);
    let minus = n3.eval_unchecked(&[1.0, -1.0]);
    let e1 = n3.eval_unchecked(&[1.0, 0.0]);
    let e2 = n3.eval_unchecked(&[0.0, 1.0]);
    let defect = plus * plus + minus * minus - 2.0 * (e1 * e1 + e2 * e2);
    rows.push(near(
        ID,
        "parallelogram defect of the sum norm",
        defect,
        16.0 - 8.0 * 3f64.sqrt(),
        1e-9,
    ));
    let report = scan_constant(&quad_31(), &quad_13(), 2, &opts.scan_config())?;
    rows.push(row(
        ID,
        "scanned constant of the quadratic pair",
        report.c_hat,
        0.9 * 3.0,
        3.0 * (1.0 + 1e-6),
    ));
    Ok(rows)
}

fn max_pair_rows() -> Result<Vec<RegressRow>> {
    const ID: &str = "example-2.7";
    let mut rows = Vec::new();
    let q1 = quad_31();
    let n4 = max_pair();
    for s in [0.1, 0.01] {
        let x = v(&[1.0, 1.0]);
        let y = v(&[1.0 - s, 1.0 + s]);
        let g1 = gfunc::g_functional(&q1, &x, &y)?;
        rows.push(near(ID, format!("g1, s = {s}"), g1.g, 4.0 - 2.0 * s, 1e-12));
        let (gp, _) = gfunc::g_one_sided(&n4, &x, &y, Side::Plus)?;
        let (gm, _) = gfunc::g_one_sided(&n4, &x, &y, Side::Minus)?;
        rows.push(near(ID, format!("g4 plus side, s = {s}"), gp, 4.0 + 2.0 * s, 1e-12));
        rows.push(near(ID, format!("g4 minus side, s = {s}"), gm, 4.0 - 2.0 * s, 1e-12));
        let g4 = gfunc::g_functional(&n4, &x, &y)?;
        rows.push(near(ID, format!("g4 average, s = {s}"), g4.g, 4.0, 1e-12));
        let numeric = GOptions { force_numeric: true, ..GOptions::default() };
        let g4n = gfunc::g_functional_with(&n4, &x, &y, &numeric)?;
        rows.push(near(ID, format!("numeric g4 agreement, s = {s}"), g4n.g, 4.0, 1e-5));
        let g1n = gfunc::g_functional_with(&q1, &x, &y, &numeric)?;
        rows.push(near(ID, format!("numeric g1 agreement, s = {s}"), g1n.g, 4.0 - 2.0 * s, 1e-5));
        let root = (1.0 - s + s * s).sqrt();
        let tan1_expect = 3.0 * s * s / (4.0 * (1.0 - s / 2.0 + root) * (1.0 - s / 2.0 + root));
        rows.push(near(ID, format!("tan^2 half-angle, quadratic norm, s = {s}"), g1.tan_half_sq, tan1_expect, 1e-9));
        let root4 = (1.0 + s + s * s).sqrt();
        let tan4_expect = (s + s * s) / ((1.0 + root4) * (1.0 + root4));
        rows.push(near(ID, format!("tan^2 half-angle, max norm, s = {s}"), g4.tan_half_sq, tan4_expect, 1e-9));
    }
    Ok(rows)
}

fn weighted_pair_rows(opts: &RegressOptions) -> Result<Vec<RegressRow>> {
    const ID: &str = "example-5.4";
    let mut rows = Vec::new();
    let n1 = weighted_l1_a();
    let n2 = weighted_l1_b();
    let witness = tan_ratio(&n1, &n2, &v(&[1.0, 1.0]), &v(&[1.0, -1.0]))?.unwrap_or(f64::NAN);
    rows.push(near(ID, "tan ratio at the witness pair", witness, 2.0, 1e-9));
    let report = scan_constant(&n1, &n2, 2, &opts.scan_config())?;
    rows.push(row(ID, "scanned constant of the weighted-l1 pair", report.c_hat, 1.999, 2.001));
    rows.push(row(
        ID,
        "weighted-l1 scan flags no divergence",
        f64::from(u8::from(report.diverging)),
        0.0,
        0.0,
    ));
    let d1 = dualize(&n1)?;
    let d2 = dualize(&n2)?;
    let cmp = compare_extreme_rays(&d1, &d2, 1e-3)?;
    rows.push(row(
        ID,
        "dual balls put corner rays on different lines",
        f64::from(u8::from(cmp.consistent)),
        0.0,
        0.0,
    ));
    let rays = vertex_angles(&d1, 1e-3)?.vertex_angles;
    let first = rays.first().copied().unwrap_or(f64::NAN);
    rows.push(near(ID, "first dual corner ray angle", first, 0.5f64.atan(), 1e-4));
    let primal = compare_extreme_rays(&n1, &n2, 1e-3)?;
    rows.push(row(
        ID,
        "primal balls share all corner rays",
        f64::from(u8::from(primal.consistent)),
        1.0,
        1.0,
    ));
    Ok(rows)
}

/// Random SPD matrix with eigenvalues in `[0.3, 3]`, rotated by a seeded
/// orthogonal transform.
pub fn random_spd(rng: &mut StdRng, dim: usize) -> NormExpr {
    let eigs: Vec<f64> = (0..dim).map(|_| rng.random_range(0.3..3.0)).collect();
    let mut q = nalgebra::DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let qr = q.clone().qr();
    q = qr.q();
    let d = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eigs));
    let a = &q * d * q.transpose();
    let rows: Vec<Vec<f64>> =
        (0..dim).map(|i| (0..dim).map(|j| 0.5 * (a[(i, j)] + a[(j, i)])).collect()).collect();
    NormExpr::quad(rows).expect("constructed SPD")
}

fn pencil_rows(opts: &RegressOptions) -> Result<Vec<RegressRow>> {
    const ID: &str = "wielandt";
    let mut rows = Vec::new();
    rows.push(near(
        ID,
        "pencil bound of the diagonal pair",
        wielandt_bound(&quad_31(), &quad_13())?,
        3.0,
        1e-10,
    ));
    let q1 = quad_31();
    rows.push(near(ID, "pencil bound of a norm against itself", wielandt_bound(&q1, &q1)?, 1.0, 1e-12));

    let mut rng = StdRng::seed_from_u64(opts.seed.wrapping_add(0x57d1));
    let mut violations = 0usize;
    let mut min_tightness = f64::INFINITY;
    let sampler2 = crate::sample::DirectionPairs::new(2, opts.seed);
    let sampler3 = crate::sample::DirectionPairs::new(3, opts.seed);
    for k in 0..opts.spd_pairs {
        let dim = if k % 2 == 0 { 2 } else { 3 };
        let n1 = random_spd(&mut rng, dim);
        let n2 = random_spd(&mut rng, dim);
        let bound = wielandt_bound(&n1, &n2)?;
        let sampler = if dim == 2 { &sampler2 } else { &sampler3 };
        for i in 0..400u64 {
            let (dx, dy) = sampler.pair(i);
            let x = v(&dx);
            let y = v(&dy);
            if let Some(r) = tan_ratio(&n1, &n2, &x, &y)? {
                if r > bound * (1.0 + 1e-6) {
                    violations += 1;
                }
            }
        }
        let cfg = ScanConfig {
            grid: opts.grid.min(360),
            samples: opts.samples.min(4000),
            refine_rounds: opts.refine_rounds,
            seed: opts.seed,
            ..ScanConfig::default()
        };
        let report = scan_constant(&n1, &n2, dim, &cfg)?;
        min_tightness = min_tightness.min(report.c_hat / bound);
    }
    rows.push(row(ID, "sampled ratios within the pencil bound", violations as f64, 0.0, 0.0));
    rows.push(row(
        ID,
        "scan recovers at least 90% of the pencil bound",
        min_tightness,
        0.9,
        1.0 + 1e-6,
    ));
    Ok(rows)
}

fn divergence_rows() -> Result<Vec<RegressRow>> {
    const ID: &str = "lp-divergence";
    let mut rows = Vec::new();
    let l2 = parse_norm("lp(2)").unwrap();
    let l4 = parse_norm("lp(4)").unwrap();
    let sched = divergence_probe(
        &l2,
        &l4,
        &v(&[1.0, 0.0]),
        &v(&[0.0, 1.0]),
        &ProbeSchedule { s0: 0.1, factor: 0.1, steps: 4 },
    )?;
    let mut max_dev: f64 = 0.0;
    for &(s, ratio) in sched.iter().filter(|(s, _)| *s <= 1e-2 + 1e-15) {
        let expect = 2f64.sqrt() / s;
        max_dev = max_dev.max((ratio - expect).abs() / expect);
    }
    rows.push(row(ID, "exponent-pair ratios track sqrt(2)/s", max_dev, 0.0, 0.05));
    let mut min_growth = f64::INFINITY;
    for w in sched.windows(2) {
        min_growth = min_growth.min(w[1].1 / w[0].1);
    }
    rows.push(row(ID, "ratio growth per decade", min_growth, 8.0, f64::INFINITY));
    rows.push(row(
        ID,
        "diverging verdict for exponents (2, 4)",
        f64::from(u8::from(diverging_verdict(&sched))),
        1.0,
        1.0,
    ));
    let same = divergence_probe(
        &l4,
        &l4,
        &v(&[1.0, 0.0]),
        &v(&[0.0, 1.0]),
        &ProbeSchedule::default(),
    )?;
    let worst = same.iter().map(|&(_, r)| (r - 1.0).abs()).fold(0.0f64, f64::max);
    rows.push(row(ID, "identical exponents stay at ratio one", worst, 0.0, 0.01));
    Ok(rows)
}

fn sum_rule_rows(opts: &RegressOptions) -> Result<Vec<RegressRow>> {
    const ID: &str = "sum-rule";
    let mut rows = Vec::new();
    let pairs = [
        (quad_31(), quad_13()),
        (quad_31(), parse_norm("lp(3)").unwrap()),
        (parse_norm("lp(1)").unwrap(), parse_norm("lp(2)").unwrap()),
        (weighted_l1_a(), weighted_l1_b()),
    ];
    let mut rng = StdRng::seed_from_u64(opts.seed.wrapping_add(0x25));
    let mut worst: f64 = 0.0;
    let mut used = 0usize;
    while used < 1000 {
        let (n1, n2) = &pairs[rng.random_range(0..pairs.len())];
        let x = v(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
        let y = v(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
        if x.is_zero() || y.is_zero() {
            continue;
        }
        let p1 = gfunc::g_functional(n1, &x, &y)?;
        let p2 = gfunc::g_functional(n2, &x, &y)?;
        let s1 = n1.eval_unchecked(&x) * n1.eval_unchecked(&y);
        let s2 = n2.eval_unchecked(&x) * n2.eval_unchecked(&y);
        if p1.nonsmoothness() > 1e-6 * s1 || p2.nonsmoothness() > 1e-6 * s2 {
            continue;
        }
        let y3 = n1.eval_unchecked(&y) + n2.eval_unchecked(&y);
        let residual = check_sum_identity(n1, n2, &x, &y)?;
        worst = worst.max(residual.abs() / y3);
        used += 1;
    }
    rows.push(row(ID, "sum-rule residual over random smooth pairs", worst, 0.0, 1e-8));

    let cfg = opts.scan_config();
    let c12 = scan_constant(&quad_31(), &quad_13(), 2, &cfg)?.c_hat;
    let c31 = scan_constant(&sum_pair(), &quad_31(), 2, &cfg)?.c_hat;
    let bound = (1.0 + c12 * c12).sqrt() * 1.001;
    rows.push(row(ID, "sum norm constant against the stability bound", c31 / bound, 0.0, 1.0));
    Ok(rows)
}

fn planar_rows() -> Result<Vec<RegressRow>> {
    const ID: &str = "planar-formulas";
    let mut rows = Vec::new();
    for (name, n) in [("quad-3-1", quad_31()), ("l3", parse_norm("lp(3)").unwrap())] {
        let alphas = 360usize;
        let betas = 359usize;
        let worst = (0..alphas)
            .map(|i| {
                let alpha = 2.0 * PI * i as f64 / alphas as f64;
                let mut local: f64 = 0.0;
                for j in 0..betas {
                    let beta = alpha + PI * (j as f64 + 0.5) / betas as f64
                        - FRAC_PI_2 * 0.998;
                    if (alpha - beta).abs() < 1e-9 {
                        continue;
                    }
                    let planar = g_planar(&n, alpha, beta, 1.0, 1.0).unwrap();
                    let x = v(&[alpha.cos(), alpha.sin()]);
                    let y = v(&[beta.cos(), beta.sin()]);
                    let direct = gfunc::g_functional(&n, &x, &y).unwrap();
                    let scale = 1.0
                        / (radial(&n, alpha).unwrap() * radial(&n, beta).unwrap());
                    local = local.max((planar.g - direct.g).abs() / scale);
                }
                local
            })
            .fold(0.0f64, f64::max);
        rows.push(row(
            ID,
            format!("closed planar form matches the direct limit ({name})"),
            worst,
            0.0,
            1e-6,
        ));
    }
    Ok(rows)
}

fn polar_rows(opts: &RegressOptions) -> Result<Vec<RegressRow>> {
    const ID: &str = "polar-structure";
    let mut rows = Vec::new();
    let mut reversal_worst: f64 = 0.0;
    let mut mono_violations = 0usize;
    let mut bound_violations = 0usize;
    let mut order_violations = 0usize;
    let mut slope_worst: f64 = 0.0;
    for (_, n) in corpus_2d() {
        let profile = PolarProfile::sample(&n, opts.grid)?;
        let (r_min, r_max) = (profile.r_min(), profile.r_max());
        let floor = (r_min / r_max).atan();
        let mut rng = StdRng::seed_from_u64(opts.seed.wrapping_add(0x3a));
        for _ in 0..opts.cases {
            let alpha = rng.random_range(0.0..2.0 * PI);
            let d = rng.random_range(-1.0f64..1.0).signum()
                * rng.random_range(1e-4..PI - 1e-4);
            let beta = alpha - d;
            let s = sigma(&n, alpha, beta)?;
            let rev = sigma(&n, beta, alpha)?;
            reversal_worst = reversal_worst.max((s + alpha - (rev + beta)).abs());
            if d.abs() <= FRAC_PI_2 && (s < floor - 1e-9 || s > PI - floor + 1e-9) {
                bound_violations += 1;
            }
            // Monotonicity in the second argument.
            let beta2 = alpha - d * rng.random_range(0.2..0.9);
            let s2 = sigma(&n, alpha, beta2)?;
            if d > 0.0 {
                // beta < beta2 < alpha
                if s > s2 + 1e-9 {
                    mono_violations += 1;
                }
            } else if s2 > s + 1e-9 {
                mono_violations += 1;
            }
        }
        // One-sided ordering along the boundary and slope agreement.
        let k = 64;
        let mut prev: Option<(f64, crate::plane::PhiPair)> = None;
        for i in 0..=k {
            let alpha = 2.0 * PI * i as f64 / k as f64;
            let p = phi_pair(&n, alpha)?;
            if p.phi_minus > p.phi_plus + 1e-8 {
                order_violations += 1;
            }
            if let Some((pa, pp)) = prev {
                if pp.phi_plus + pa > p.phi_minus + alpha + 1e-8 {
                    order_violations += 1;
                }
            }
            prev = Some((alpha, p));
            let r = radial(&n, alpha)?;
            let h = 1e-7;
            let left = (r - radial(&n, alpha - h)?) / h;
            let right = (radial(&n, alpha + h)?) / h - r / h;
            let tol = 3.0 * r * p.width + 1e-4;
            slope_worst = slope_worst
                .max(((left - r / p.phi_minus.tan()).abs() - tol).max(0.0))
                .max(((right - r / p.phi_plus.tan()).abs() - tol).max(0.0));
        }
    }
    rows.push(row(ID, "angle reversal identity", reversal_worst, 0.0, 1e-9));
    rows.push(row(ID, "monotonicity of the comparison angle", mono_violations as f64, 0.0, 0.0));
    rows.push(row(ID, "aspect-ratio bounds on the comparison angle", bound_violations as f64, 0.0, 0.0));
    rows.push(row(ID, "one-sided limit ordering along the boundary", order_violations as f64, 0.0, 0.0));
    rows.push(row(ID, "radial one-sided slopes match the cotangent law", slope_worst, 0.0, 1e-9));
    Ok(rows)
}

fn geometry_rows(opts: &RegressOptions) -> Result<Vec<RegressRow>> {
    const ID: &str = "geometry";
    let mut rows = Vec::new();
    let l1 = parse_norm("lp(1)").unwrap();
    let rays = vertex_angles(&l1, 1e-3)?.vertex_angles;
    let expect = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2];
    let worst = if rays.len() == 4 {
        rays.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max)
    } else {
        f64::INFINITY
    };
    rows.push(row(ID, "diamond corner rays on the axes", worst, 0.0, 1e-4));
    let linf = parse_norm("lp(inf)").unwrap();
    let rays = vertex_angles(&linf, 1e-3)?.vertex_angles;
    let expect = [FRAC_PI_4, 3.0 * FRAC_PI_4, 5.0 * FRAC_PI_4, 7.0 * FRAC_PI_4];
    let worst = if rays.len() == 4 {
        rays.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max)
    } else {
        f64::INFINITY
    };
    rows.push(row(ID, "square corner rays on the diagonals", worst, 0.0, 1e-4));
    let id_norm = parse_norm("quad([[1,0],[0,1]])").unwrap();
    let circle = vertex_angles(&id_norm, 1e-3)?;
    rows.push(row(
        ID,
        "round ball has no corners or faces",
        (circle.vertex_angles.len() + circle.flat_intervals.len()) as f64,
        0.0,
        0.0,
    ));
    let delta = convexity_modulus(&id_norm, 2, &[1.0], opts.grid.min(720), opts.seed)?;
    rows.push(near(ID, "round chord modulus at eps = 1", delta[0].1, 1.0 - 3f64.sqrt() / 2.0, 2e-3));
    let dtheta = angle_modulus(&id_norm, 2, &[1.0], opts.grid.min(720), opts.seed)?;
    rows.push(near(ID, "round angle modulus at eps = 1", dtheta[0].1, 1.0 / 3f64.sqrt(), 2e-3));
    let flat = convexity_modulus(&l1, 2, &[0.5], opts.grid.min(720), opts.seed)?;
    rows.push(near(ID, "diamond modulus vanishes on faces", flat[0].1, 0.0, 1e-6));
    let witness = strict_convexity_witness(&l1, 2, 2000, 1e-9, opts.seed)?;
    let tan = match &witness {
        Some((y, z)) => gfunc::g_functional(&l1, y, z)?.tan_half_sq.sqrt(),
        None => f64::INFINITY,
    };
    rows.push(row(ID, "flat-face witness for the diamond", tan, 0.0, 1e-9));

    // Shape diagnostics transfer across the equivalent corpus pairs and at
    // least one discriminator separates each non-equivalent pair.
    let equivalent = [
        (weighted_l1_a(), weighted_l1_b()),
        (quad_31(), quad_13()),
        (sum_pair(), quad_31()),
    ];
    let mut mismatches = 0usize;
    for (a, b) in &equivalent {
        if !compare_extreme_rays(a, b, 1e-3)?.consistent {
            mismatches += 1;
        }
        let wa = strict_convexity_witness(a, 2, 4000, 1e-9, opts.seed)?.is_some();
        let wb = strict_convexity_witness(b, 2, 4000, 1e-9, opts.seed)?.is_some();
        if wa != wb {
            mismatches += 1;
        }
    }
    rows.push(row(ID, "diagnostics agree on equivalent pairs", mismatches as f64, 0.0, 0.0));
    let inequivalent =
        [(parse_norm("lp(1)").unwrap(), parse_norm("lp(inf)").unwrap()), (quad_31(), max_pair())];
    let mut silent = 0usize;
    for (a, b) in &inequivalent {
        let rays_differ = !compare_extreme_rays(a, b, 1e-3)?.consistent;
        let wa = strict_convexity_witness(a, 2, 4000, 1e-9, opts.seed)?.is_some();
        let wb = strict_convexity_witness(b, 2, 4000, 1e-9, opts.seed)?.is_some();
        if !(rays_differ || wa != wb) {
            silent += 1;
        }
    }
    rows.push(row(ID, "a discriminator fires on non-equivalent pairs", silent as f64, 0.0, 0.0));

    // The chord modulus and the angle modulus vanish together on the corpus.
    let eps_grid = [0.1, 0.25, 0.5, 1.0, 1.5];
    let mut sign_disagreements = 0usize;
    for (_, n) in corpus_2d() {
        let delta = convexity_modulus(&n, 2, &eps_grid, 240, opts.seed)?;
        let dtheta = angle_modulus(&n, 2, &eps_grid, 240, opts.seed)?;
        for (&(_, dv), &(_, tv)) in delta.iter().zip(&dtheta) {
            if (dv > 1e-6) != (tv > 1e-6) {
                sign_disagreements += 1;
            }
        }
    }
    rows.push(row(
        ID,
        "chord and angle moduli vanish together",
        sign_disagreements as f64,
        0.0,
        0.0,
    ));
    Ok(rows)
}

fn property_rows(opts: &RegressOptions) -> Result<Vec<RegressRow>> {
    const ID: &str = "g-properties";
    let mut rows = Vec::new();
    let corpus = corpus_2d();
    let mut rng = StdRng::seed_from_u64(opts.seed.wrapping_add(0x6b));
    let mut mono = 0usize;
    let mut anti = 0usize;
    let mut homo = 0usize;
    let mut chain = 0usize;
    let mut topo_worst: f64 = 0.0;
    for _ in 0..opts.cases {
        let (_, n) = &corpus[rng.random_range(0..corpus.len())];
        let x = v(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
        let y = v(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
        if x.is_zero() || y.is_zero() || n.eval_unchecked(&x) < 1e-3 {
            continue;
        }
        let nx = n.eval_unchecked(&x);
        let ny = n.eval_unchecked(&y);
        let scale = nx * ny;
        // Monotone quotient; |t| stays off zero where quotient evaluation
        // is cancellation-dominated.
        let t1 = rng.random_range(0.05f64..2.0) * rng.random_range(-1.0f64..1.0).signum();
        let t2 = rng.random_range(0.05f64..2.0) * rng.random_range(-1.0f64..1.0).signum();
        if t1 != 0.0 && t2 != 0.0 && t1 != t2 {
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            let q1 = gfunc::diff_quotient(n, &x, &y, lo)?;
            let q2 = gfunc::diff_quotient(n, &x, &y, hi)?;
            if q1 > q2 + 1e-12 {
                mono += 1;
            }
        }
        // Antisymmetry.
        let pair = gfunc::g_functional(n, &x, &y)?;
        let neg = v(&[-y[0], -y[1]]);
        let pair_neg = gfunc::g_functional(n, &x, &neg)?;
        let anti_tol = 1e-9 * scale + pair.bracket_width + pair_neg.bracket_width;
        if (pair_neg.g + pair.g).abs() > anti_tol {
            anti += 1;
        }
        // Homogeneity.
        let a = rng.random_range(0.1..4.0);
        let b = rng.random_range(0.1..4.0);
        let scaled =
            gfunc::g_functional(n, &v(&[a * x[0], a * x[1]]), &v(&[b * y[0], b * y[1]]))?;
        let homo_tol = 1e-9 * a * b * scale + a * b * pair.bracket_width + scaled.bracket_width;
        if (scaled.g - a * b * pair.g).abs() > homo_tol {
            homo += 1;
        }
        // Outer and inner bound chain.
        let tol = 1e-9 * scale;
        let diff: Vec<f64> = x.iter().zip(y.iter()).map(|(p, q)| p - q).collect();
        let sum: Vec<f64> = x.iter().zip(y.iter()).map(|(p, q)| p + q).collect();
        let inner_low = nx * (nx - n.eval_unchecked(&diff));
        let inner_high = nx * (n.eval_unchecked(&sum) - nx);
        let ok = pair.g_minus <= pair.g_plus + 1e-12 * scale
            && -scale - tol <= pair.g_minus
            && pair.g_plus <= scale + tol
            && inner_low <= pair.g_minus + tol
            && pair.g_plus <= inner_high + tol;
        if !ok {
            chain += 1;
        }
    }
    rows.push(row(ID, "monotone quotient violations", mono as f64, 0.0, 0.0));
    rows.push(row(ID, "antisymmetry violations", anti as f64, 0.0, 0.0));
    rows.push(row(ID, "two-argument homogeneity violations", homo as f64, 0.0, 0.0));
    rows.push(row(ID, "bound-chain violations", chain as f64, 0.0, 0.0));

    // Finite scanned constants force finite topological spread (desk-scale
    // version of the order-of-equivalences fact), checked on the pair corpus.
    let cfg = ScanConfig {
        grid: opts.grid.min(480),
        samples: opts.samples.min(4000),
        refine_rounds: opts.refine_rounds,
        seed: opts.seed,
        ..ScanConfig::default()
    };
    for (name, n1, n2) in corpus_pairs() {
        let report = scan_constant(&n1, &n2, 2, &cfg)?;
        if report.c_hat.is_finite() && !report.diverging {
            let (m_hat, big_m) = topological_constants(&n1, &n2, 2, cfg.grid)?;
            let spread = big_m / m_hat;
            let cap = 40.0 * report.c_hat * report.c_hat;
            topo_worst = topo_worst.max(spread / cap);
            if !spread.is_finite() {
                topo_worst = f64::INFINITY;
            }
            let _ = name;
        }
    }
    rows.push(row(ID, "topological spread within 40 c^2", topo_worst, 0.0, 1.0));
    Ok(rows)
}
