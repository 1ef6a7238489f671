//! Angular-equivalence diagnostics between two norms.
//!
//! Two norms are angularly equivalent when `tan(theta_2/2) <= C tan(theta_1/2)`
//! over all non-zero pairs; the best such `C` is at least 1 and the relation
//! is symmetric with the same constant. [`scan_constant`] estimates `C` from
//! below by a deterministic grid/low-discrepancy scan with local refinement,
//! excluding exceptional (non-smooth) pairs, which loses nothing: it suffices
//! to verify the inequality on pairs where both g-functionals are two-sided
//! differentiable. The reported `c_hat` is an empirical supremum, never a
//! certified constant.

use crate::error::{Error, Result};
use crate::gfunc::{self, GOptions};
use crate::norms::{NormExpr, Vector};
use crate::sample::{par_top_k, splitmix64, DirectionPairs};
use rand::Rng;
use rand::SeedableRng;
use serde::ser::SerializeSeq;
use serde::Serializer;

/// Serialize an extended real: plain number when finite, `"inf"`/`"-inf"` otherwise.
pub fn serialize_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn serialize_schedule<S: Serializer>(
    sched: &Vec<(f64, f64)>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(serde::Serialize)]
    struct Entry(f64, #[serde(serialize_with = "serialize_extended")] f64);
    let mut seq = s.serialize_seq(Some(sched.len()))?;
    for &(step, ratio) in sched {
        seq.serialize_element(&Entry(step, ratio))?;
    }
    seq.end()
}

/// Scan controls; defaults follow the built-in reference suite.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    /// Angle-grid density for 2-dimensional scans.
    pub grid: usize,
    /// Direction-pair count for scans in dimension >= 3.
    pub samples: usize,
    /// Local refinement rounds around the running maxima (10x zoom each).
    pub refine_rounds: usize,
    pub seed: u64,
    /// Pairs whose g-computation shows non-smoothness above this (relative
    /// to `||x|| ||y||`) for either norm are excluded from the supremum.
    pub smooth_tol: f64,
    pub g_opts: GOptions,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            grid: 720,
            samples: 10_000,
            refine_rounds: 3,
            seed: 0,
            smooth_tol: 1e-6,
            g_opts: GOptions::default(),
        }
    }
}

/// Scan outcome. `c_hat` is the sampled supremum of the tan ratio (a lower
/// bound on the true constant), `witness` the pair attaining it, `m_hat` /
/// `M_hat` the sampled topological constants, and `divergence_schedule` the
/// probe run at the witness that backs the `diverging` verdict.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EquivReport {
    #[serde(serialize_with = "serialize_extended")]
    pub c_hat: f64,
    pub witness: (Vector, Vector),
    pub m_hat: f64,
    #[serde(rename = "M_hat")]
    pub big_m_hat: f64,
    pub diverging: bool,
    #[serde(rename = "schedule", serialize_with = "serialize_schedule")]
    pub divergence_schedule: Vec<(f64, f64)>,
    pub seed: u64,
    pub samples_used: usize,
}

/// Tolerance below which a tan value counts as zero in ratio bookkeeping.
const TAN_ZERO: f64 = 1e-12;
/// A numerator at least this large over a zero denominator is a genuine blow-up.
const TAN_BLOWUP: f64 = 1e-6;

/// `tan(theta_2/2) / tan(theta_1/2)` for the pair `(x, y)`.
///
/// `None` (undefined) when both tans vanish — collinear-like pairs where the
/// defining inequality holds trivially; `+inf` when only the denominator
/// vanishes against a numerator above the blow-up threshold.
pub fn tan_ratio(n1: &NormExpr, n2: &NormExpr, x: &Vector, y: &Vector) -> Result<Option<f64>> {
    let t1 = gfunc::g_functional(n1, x, y)?.tan_half_sq.sqrt();
    let t2 = gfunc::g_functional(n2, x, y)?.tan_half_sq.sqrt();
    Ok(ratio_of_tans(t1, t2))
}

fn ratio_of_tans(t1: f64, t2: f64) -> Option<f64> {
    if t1 < TAN_ZERO {
        if t2 < TAN_ZERO {
            None
        } else if t2 >= TAN_BLOWUP {
            Some(f64::INFINITY)
        } else {
            None
        }
    } else if t1.is_infinite() && t2.is_infinite() {
        None
    } else {
        Some(t2 / t1)
    }
}

/// Ratio evaluation used by scans: smoothness-gated on both norms.
fn scan_ratio(
    n1: &NormExpr,
    n2: &NormExpr,
    x: &[f64],
    y: &[f64],
    cfg: &ScanConfig,
) -> Option<f64> {
    let x = Vector::new(x.to_vec()).ok()?;
    let y = Vector::new(y.to_vec()).ok()?;
    let p1 = gfunc::g_functional_with(n1, &x, &y, &cfg.g_opts).ok()?;
    let s1 = n1.eval_unchecked(&x) * n1.eval_unchecked(&y);
    if p1.nonsmoothness() > cfg.smooth_tol * s1 {
        return None;
    }
    let p2 = gfunc::g_functional_with(n2, &x, &y, &cfg.g_opts).ok()?;
    let s2 = n2.eval_unchecked(&x) * n2.eval_unchecked(&y);
    if p2.nonsmoothness() > cfg.smooth_tol * s2 {
        return None;
    }
    ratio_of_tans(p1.tan_half_sq.sqrt(), p2.tan_half_sq.sqrt())
}

fn check_dims(n1: &NormExpr, n2: &NormExpr, dim: usize) -> Result<()> {
    for n in [n1, n2] {
        if let Some(d) = n.dim() {
            if d != dim {
                return Err(Error::DimMismatch { expected: dim, got: d });
            }
        }
    }
    if dim < 2 {
        return Err(Error::Domain("scans need dimension >= 2".into()));
    }
    Ok(())
}

/// Estimate the angular-equivalence constant of `(n1, n2)` on `R^dim`.
pub fn scan_constant(
    n1: &NormExpr,
    n2: &NormExpr,
    dim: usize,
    cfg: &ScanConfig,
) -> Result<EquivReport> {
    check_dims(n1, n2, dim)?;
    let (c_hat, witness_x, witness_y, samples_used) = if dim == 2 {
        scan_2d(n1, n2, cfg)
    } else {
        scan_nd(n1, n2, dim, cfg)
    };
    let (m_hat, big_m_hat) = topological_constants(n1, n2, dim, cfg.grid.max(cfg.samples))?;
    let wx = Vector::new(witness_x).expect("witness coords are finite");
    let wy = Vector::new(witness_y).expect("witness coords are finite");
    // Probe for geometric ratio growth along a genuinely collapsing family
    // u + s v, v perpendicular to u. The launch ray is polished first:
    // the witness maximizes the ratio at the scan resolution, but the
    // blow-up ray (when one exists) can sit a fraction of a cell away.
    let schedule_cfg = ProbeSchedule::default();
    let launch = polish_probe_launch(n1, n2, &wx, &wy, cfg, &schedule_cfg);
    let (schedule, diverging) = match perpendicular_component(&launch, &wy) {
        Some(v) => match divergence_probe(n1, n2, &launch, &v, &schedule_cfg) {
            Ok(schedule) => {
                let verdict = diverging_verdict(&schedule);
                (schedule, verdict)
            }
            Err(_) => (Vec::new(), false),
        },
        None => (Vec::new(), false),
    };
    Ok(EquivReport {
        c_hat,
        witness: (wx, wy),
        m_hat,
        big_m_hat,
        diverging,
        divergence_schedule: schedule,
        seed: cfg.seed,
        samples_used,
    })
}

fn unit_dir(t: f64) -> [f64; 2] {
    [t.cos(), t.sin()]
}

fn scan_2d(n1: &NormExpr, n2: &NormExpr, cfg: &ScanConfig) -> (f64, Vec<f64>, Vec<f64>, usize) {
    let grid = cfg.grid.max(8);
    let two_pi = 2.0 * std::f64::consts::PI;
    let angles: Vec<f64> = (0..grid).map(|i| two_pi * i as f64 / grid as f64).collect();
    let total = grid * grid;
    let eval_cell = |idx: usize| -> Option<f64> {
        let (i, j) = (idx / grid, idx % grid);
        if i == j {
            return None;
        }
        scan_ratio(n1, n2, &unit_dir(angles[i]), &unit_dir(angles[j]), cfg)
    };
    let top = par_top_k(total, 10, eval_cell);
    let samples = total - grid;
    let mut best = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    let mut extra = 0usize;
    for &(idx, value) in &top {
        let (i, j) = (idx / grid, idx % grid);
        let (refined, alpha, beta, used) =
            refine_2d(n1, n2, cfg, value, angles[i], angles[j], two_pi / grid as f64);
        extra += used;
        if refined > best.0 {
            best = (refined, alpha, beta);
        }
    }
    if best.0 == f64::NEG_INFINITY {
        // Every pair was undefined or excluded; fall back to the axes.
        best = (1.0, 0.0, std::f64::consts::FRAC_PI_2);
    }
    let x = unit_dir(best.1).to_vec();
    let y = unit_dir(best.2).to_vec();
    (best.0, x, y, samples + extra)
}

fn refine_2d(
    n1: &NormExpr,
    n2: &NormExpr,
    cfg: &ScanConfig,
    value: f64,
    alpha0: f64,
    beta0: f64,
    cell: f64,
) -> (f64, f64, f64, usize) {
    let m = 15usize;
    let mut best = (value, alpha0, beta0);
    let mut half = cell / 2.0;
    let mut used = 0usize;
    for _ in 0..cfg.refine_rounds {
        let (c_alpha, c_beta) = (best.1, best.2);
        let step = 2.0 * half / (m - 1) as f64;
        let local = par_top_k(m * m, 1, |idx| {
            let (ai, bi) = (idx / m, idx % m);
            let alpha = c_alpha - half + step * ai as f64;
            let beta = c_beta - half + step * bi as f64;
            scan_ratio(n1, n2, &unit_dir(alpha), &unit_dir(beta), cfg)
        });
        used += m * m;
        if let Some(&(idx, v)) = local.first() {
            if v > best.0 {
                let (ai, bi) = (idx / m, idx % m);
                best = (v, c_alpha - half + step * ai as f64, c_beta - half + step * bi as f64);
            }
        }
        half /= 10.0;
    }
    (best.0, best.1, best.2, used)
}

fn scan_nd(
    n1: &NormExpr,
    n2: &NormExpr,
    dim: usize,
    cfg: &ScanConfig,
) -> (f64, Vec<f64>, Vec<f64>, usize) {
    let sampler = DirectionPairs::new(dim, cfg.seed);
    // Each index covers (x, y) and (x, -y); the mirrored ratio is the
    // reciprocal, so together they keep the supremum >= 1.
    let eval = |idx: usize| -> Option<f64> {
        let (x, y) = sampler.pair(idx as u64);
        let r1 = scan_ratio(n1, n2, &x, &y, cfg);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let r2 = scan_ratio(n1, n2, &x, &neg, cfg);
        match (r1, r2) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    };
    let top = par_top_k(cfg.samples, 10, eval);
    let mut used = 2 * cfg.samples;
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for &(idx, _) in &top {
        let (x, y) = sampler.pair(idx as u64);
        for y_dir in [y.clone(), y.iter().map(|v| -v).collect()] {
            if let Some(r) = scan_ratio(n1, n2, &x, &y_dir, cfg) {
                if best.as_ref().is_none_or(|b| r > b.0) {
                    best = Some((r, x.clone(), y_dir));
                }
            }
        }
    }
    let mut best = match best {
        Some(b) => b,
        None => (1.0, sampler.direction(0, 0), sampler.direction(1, 1)),
    };
    // Local hill climb with shrinking Gaussian steps, deterministic per seed.
    let mut sigma = 0.3;
    for round in 0..cfg.refine_rounds {
        let trials = 200usize;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(splitmix64(
            &mut (cfg.seed ^ (round as u64).wrapping_mul(0x9e37_79b9)),
        ));
        let proposals: Vec<(Vec<f64>, Vec<f64>)> = (0..trials)
            .map(|_| {
                let mut perturb = |v: &[f64]| -> Vec<f64> {
                    let moved: Vec<f64> = v
                        .iter()
                        .map(|&c| c + sigma * rng.sample::<f64, _>(rand::distr::StandardUniform)
                            - sigma * 0.5)
                        .collect();
                    let norm = moved.iter().map(|c| c * c).sum::<f64>().sqrt();
                    moved.iter().map(|c| c / norm.max(1e-12)).collect()
                };
                (perturb(&best.1), perturb(&best.2))
            })
            .collect();
        let local = par_top_k(trials, 1, |i| {
            scan_ratio(n1, n2, &proposals[i].0, &proposals[i].1, cfg)
        });
        used += trials;
        if let Some(&(i, v)) = local.first() {
            if v > best.0 {
                best = (v, proposals[i].0.clone(), proposals[i].1.clone());
            }
        }
        sigma /= 10.0;
    }
    (best.0, best.1, best.2, used)
}

/// Sampled topological constants: extremes of `||u||_2 / ||u||_1` over unit
/// directions, sharpened by local refinement.
pub fn topological_constants(
    n1: &NormExpr,
    n2: &NormExpr,
    dim: usize,
    samples: usize,
) -> Result<(f64, f64)> {
    check_dims(n1, n2, dim)?;
    let ratio = |u: &[f64]| -> f64 { n2.eval_unchecked(u) / n1.eval_unchecked(u) };
    if dim == 2 {
        let grid = samples.max(16);
        let two_pi = 2.0 * std::f64::consts::PI;
        let vals: Vec<f64> =
            (0..grid).map(|i| ratio(&unit_dir(two_pi * i as f64 / grid as f64))).collect();
        let (mut i_min, mut i_max) = (0usize, 0usize);
        for (i, &v) in vals.iter().enumerate() {
            if v < vals[i_min] {
                i_min = i;
            }
            if v > vals[i_max] {
                i_max = i;
            }
        }
        let cell = two_pi / grid as f64;
        let refine = |i: usize, sign: f64| -> f64 {
            let mut lo = two_pi * i as f64 / grid as f64 - cell;
            let mut hi = two_pi * i as f64 / grid as f64 + cell;
            for _ in 0..90 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if sign * ratio(&unit_dir(m1)) < sign * ratio(&unit_dir(m2)) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            ratio(&unit_dir(0.5 * (lo + hi)))
        };
        Ok((vals[i_min].min(refine(i_min, 1.0)), vals[i_max].max(refine(i_max, -1.0))))
    } else {
        let sampler = DirectionPairs::new(dim, 1);
        let dirs: Vec<Vec<f64>> = (0..samples).map(|i| sampler.direction(i as u64, 0)).collect();
        let lo = par_top_k(samples, 3, |i| Some(-ratio(&dirs[i])));
        let hi = par_top_k(samples, 3, |i| Some(ratio(&dirs[i])));
        let climb = |start: &[f64], sign: f64| -> f64 {
            let mut best_dir = start.to_vec();
            let mut best = sign * ratio(&best_dir);
            let mut sigma = 0.2;
            let mut state = 0xfeed_beef_u64;
            for _ in 0..3 {
                for _ in 0..200 {
                    let moved: Vec<f64> = best_dir
                        .iter()
                        .map(|&c| {
                            let u = (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64;
                            c + sigma * (u - 0.5)
                        })
                        .collect();
                    let norm = moved.iter().map(|c| c * c).sum::<f64>().sqrt();
                    if norm < 1e-9 {
                        continue;
                    }
                    let cand: Vec<f64> = moved.iter().map(|c| c / norm).collect();
                    let v = sign * ratio(&cand);
                    if v > best {
                        best = v;
                        best_dir = cand;
                    }
                }
                sigma /= 10.0;
            }
            sign * best
        };
        let mut m_hat = f64::INFINITY;
        for &(i, _) in &lo {
            m_hat = m_hat.min(climb(&dirs[i], -1.0));
        }
        let mut big_m = f64::NEG_INFINITY;
        for &(i, _) in &hi {
            big_m = big_m.max(climb(&dirs[i], 1.0));
        }
        Ok((m_hat, big_m))
    }
}

/// Sharp angular-equivalence constant `M/m` for two inner-product norms:
/// the square root of the extreme generalized eigenvalue ratio of the pencil
/// `(A2, A1)`, computed by Cholesky whitening plus a symmetric eigensolve.
pub fn wielandt_bound(q1: &NormExpr, q2: &NormExpr) -> Result<f64> {
    let (a1, a2) = match (q1, q2) {
        (NormExpr::Quad { matrix: a1 }, NormExpr::Quad { matrix: a2 }) => (a1, a2),
        _ => return Err(Error::Domain("wielandt_bound requires two quad norms".into())),
    };
    if a1.dim() != a2.dim() {
        return Err(Error::DimMismatch { expected: a1.dim(), got: a2.dim() });
    }
    let dim = a1.dim();
    let chol = a1.cholesky().expect("SPD by construction");
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Domain("Cholesky factor is singular".into()))?;
    let a2_na = nalgebra::DMatrix::from_fn(dim, dim, |i, j| a2.entry(i, j));
    let b = &l_inv * a2_na * l_inv.transpose();
    let sym = nalgebra::DMatrix::from_fn(dim, dim, |i, j| 0.5 * (b[(i, j)] + b[(j, i)]));
    let eigen = sym.symmetric_eigenvalues();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &l in eigen.iter() {
        lo = lo.min(l);
        hi = hi.max(l);
    }
    if lo <= 0.0 {
        return Err(Error::Domain("pencil has non-positive eigenvalue".into()));
    }
    Ok((hi / lo).sqrt())
}

/// Probe steps: `s_k = s0 * factor^k`, `k = 0..steps`.
#[derive(Debug, Clone)]
pub struct ProbeSchedule {
    pub s0: f64,
    pub factor: f64,
    pub steps: usize,
}

impl Default for ProbeSchedule {
    fn default() -> Self {
        ProbeSchedule { s0: 0.1, factor: 0.1, steps: 5 }
    }
}

/// Direction-symmetric ratio along the collapsing family `y = u + s v`.
///
/// The reported value is `max(R, 1/R)` with `R = tan_ratio(n1, n2, u, y)`:
/// equivalence fails if either orientation of the ratio blows up, and the
/// symmetric form makes the `p != q` divergence visible regardless of which
/// norm flattens faster.
pub fn divergence_probe(
    n1: &NormExpr,
    n2: &NormExpr,
    u: &Vector,
    v: &Vector,
    schedule: &ProbeSchedule,
) -> Result<Vec<(f64, f64)>> {
    if u.is_zero() || v.is_zero() {
        return Err(Error::ZeroVector("divergence_probe requires u, v != 0"));
    }
    if !independent(u, v) {
        return Err(Error::Domain("divergence_probe requires independent u, v".into()));
    }
    let mut out = Vec::with_capacity(schedule.steps);
    let mut s = schedule.s0;
    for _ in 0..schedule.steps {
        let y: Vec<f64> = u.iter().zip(v.iter()).map(|(a, b)| a + s * b).collect();
        let y = Vector::new(y)?;
        if let Some(r) = tan_ratio(n1, n2, u, &y)? {
            let sym = if r > 0.0 { r.max(1.0 / r) } else { f64::INFINITY };
            out.push((s, sym));
        }
        s *= schedule.factor;
    }
    Ok(out)
}

/// Growth rule backing the `diverging` flag: the per-decade growth factor of
/// the ratio must be at least 4 across the last three decades of `s`.
pub fn diverging_verdict(schedule: &[(f64, f64)]) -> bool {
    if schedule.len() < 4 {
        return false;
    }
    let tail = &schedule[schedule.len() - 4..];
    for w in tail.windows(2) {
        let (s_prev, r_prev) = w[0];
        let (s_next, r_next) = w[1];
        let decades = (s_prev / s_next).log10();
        if decades <= 0.0 {
            return false;
        }
        if r_next.is_infinite() && r_prev.is_finite() {
            continue;
        }
        let growth = (r_next / r_prev).powf(1.0 / decades);
        if !(growth >= 4.0) {
            return false;
        }
    }
    true
}

/// Move the probe launch direction to the local maximizer of the
/// smallest-scale symmetric ratio. Bounded ratios leave the launch near the
/// witness and the probe stays flat; a genuine blow-up ray pulls the launch
/// onto itself so the probe keeps growing through its last decade.
fn polish_probe_launch(
    n1: &NormExpr,
    n2: &NormExpr,
    wx: &Vector,
    wy: &Vector,
    cfg: &ScanConfig,
    schedule: &ProbeSchedule,
) -> Vector {
    let s_min = schedule.s0 * schedule.factor.powi(schedule.steps.saturating_sub(1) as i32);
    let objective = |u: &[f64]| -> f64 {
        let Ok(uv) = Vector::new(u.to_vec()) else { return f64::NEG_INFINITY };
        let Some(v) = perpendicular_component(&uv, wy) else { return f64::NEG_INFINITY };
        let y: Vec<f64> = u.iter().zip(v.iter()).map(|(a, b)| a + s_min * b).collect();
        let Ok(yv) = Vector::new(y) else { return f64::NEG_INFINITY };
        match tan_ratio(n1, n2, &uv, &yv) {
            Ok(Some(r)) if r > 0.0 => r.max(1.0 / r),
            Ok(Some(_)) | Ok(None) | Err(_) => f64::NEG_INFINITY,
        }
    };
    let dim = wx.dim();
    let mut best = wx.coords().to_vec();
    let mut best_val = objective(&best);
    if dim == 2 {
        let mut center = wx[1].atan2(wx[0]);
        let mut window = 2.0 * std::f64::consts::PI / cfg.grid.max(8) as f64;
        for _ in 0..4 {
            let m = 41;
            for k in 0..m {
                let t = center - window + 2.0 * window * k as f64 / (m - 1) as f64;
                let cand = [t.cos(), t.sin()];
                let val = objective(&cand);
                if val > best_val {
                    best_val = val;
                    best = cand.to_vec();
                }
            }
            center = best[1].atan2(best[0]);
            window /= 8.0;
        }
    } else {
        let mut state = cfg.seed ^ 0x70b7_a3c1;
        let mut sigma = 0.1;
        for _ in 0..4 {
            for _ in 0..100 {
                let moved: Vec<f64> = best
                    .iter()
                    .map(|&c| {
                        let u = (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64;
                        c + sigma * (u - 0.5)
                    })
                    .collect();
                let len = moved.iter().map(|c| c * c).sum::<f64>().sqrt();
                if len < 1e-9 {
                    continue;
                }
                let cand: Vec<f64> = moved.iter().map(|c| c / len).collect();
                let val = objective(&cand);
                if val > best_val {
                    best_val = val;
                    best = cand;
                }
            }
            sigma /= 8.0;
        }
    }
    Vector::new(best).unwrap_or_else(|_| wx.clone())
}

/// Euclidean-unit component of `y` orthogonal to `u`; falls back to an
/// orthogonalized coordinate direction when the pair is collinear.
fn perpendicular_component(u: &[f64], y: &[f64]) -> Option<Vector> {
    let uu: f64 = u.iter().map(|a| a * a).sum();
    if uu == 0.0 {
        return None;
    }
    let project = |w: &[f64]| -> Vec<f64> {
        let coef = w.iter().zip(u.iter()).map(|(a, b)| a * b).sum::<f64>() / uu;
        w.iter().zip(u.iter()).map(|(a, b)| a - coef * b).collect()
    };
    let mut perp = project(y);
    let mut len = perp.iter().map(|a| a * a).sum::<f64>().sqrt();
    if len < 1e-9 {
        let k = (0..u.len())
            .min_by(|&i, &j| u[i].abs().partial_cmp(&u[j].abs()).unwrap())
            .expect("nonempty");
        let mut basis = vec![0.0; u.len()];
        basis[k] = 1.0;
        perp = project(&basis);
        len = perp.iter().map(|a| a * a).sum::<f64>().sqrt();
        if len < 1e-12 {
            return None;
        }
    }
    perp.iter_mut().for_each(|a| *a /= len);
    Vector::new(perp).ok()
}

fn independent(x: &[f64], y: &[f64]) -> bool {
    let mx = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let my = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if mx == 0.0 || my == 0.0 {
        return false;
    }
    let tol = 1e-12 * mx * my;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            if (x[i] * y[j] - x[j] * y[i]).abs() > tol {
                return true;
            }
        }
    }
    false
}

/// Residual of the sum rule `||y||_3 cos t3 = ||y||_1 cos t1 + ||y||_2 cos t2`
/// with `n3 = sum(n1, n2)`; near zero on smooth pairs.
pub fn check_sum_identity(n1: &NormExpr, n2: &NormExpr, x: &Vector, y: &Vector) -> Result<f64> {
    let n3 = NormExpr::sum(vec![n1.clone(), n2.clone()])?;
    let c1 = gfunc::g_functional(n1, x, y)?.cos_theta;
    let c2 = gfunc::g_functional(n2, x, y)?.cos_theta;
    let c3 = gfunc::g_functional(&n3, x, y)?.cos_theta;
    let y1 = n1.eval_unchecked(y);
    let y2 = n2.eval_unchecked(y);
    let y3 = n3.eval_unchecked(y);
    Ok(y3 * c3 - y1 * c1 - y2 * c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::parse_norm;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn v(coords: &[f64]) -> Vector {
        Vector::new(coords.to_vec()).unwrap()
    }

    fn small_cfg(seed: u64) -> ScanConfig {
        ScanConfig { grid: 240, samples: 1500, seed, ..ScanConfig::default() }
    }

    #[test]
    fn identical_norms_have_unit_ratio() {
        let n = parse_norm("quad([[2,0.5],[0.5,1]])").unwrap();
        let r = tan_ratio(&n, &n, &v(&[1.0, 0.2]), &v(&[-0.3, 1.0])).unwrap().unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn weighted_l1_pair_ratio_at_witness() {
        let n1 = parse_norm("lp(1, w=[2,1])").unwrap();
        let n2 = parse_norm("lp(1, w=[1,2])").unwrap();
        let r = tan_ratio(&n1, &n2, &v(&[1.0, 1.0]), &v(&[1.0, -1.0])).unwrap().unwrap();
        assert_abs_diff_eq!(r, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn ratio_reciprocal_laws() {
        let mut rng = StdRng::seed_from_u64(5);
        let n1 = parse_norm("quad([[3,0],[0,1]])").unwrap();
        let n2 = parse_norm("lp(3)").unwrap();
        for _ in 0..200 {
            let x = v(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
            let y = v(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let neg = v(&[-y[0], -y[1]]);
            let (Some(r), Some(r_neg)) = (
                tan_ratio(&n1, &n2, &x, &y).unwrap(),
                tan_ratio(&n1, &n2, &x, &neg).unwrap(),
            ) else {
                continue;
            };
            if !r.is_finite() || !r_neg.is_finite() || r < 1e-6 {
                continue;
            }
            // Mirroring y inverts the ratio...
            assert_abs_diff_eq!(r_neg, 1.0 / r, epsilon = 1e-9 * (1.0 + 1.0 / r));
            // ...and equals the reciprocal of the norms-swapped mirrored ratio:
            // R12(x, -y) * R21(x, -y) = 1.
            let swapped = tan_ratio(&n2, &n1, &x, &neg).unwrap().unwrap();
            assert_abs_diff_eq!(r_neg * swapped, 1.0, epsilon = 1e-9 * (1.0 + r_neg * swapped));
        }
    }

    #[test]
    fn scan_identical_norms_gives_one() {
        let n = parse_norm("quad([[1,0],[0,1]])").unwrap();
        let report = scan_constant(&n, &n, 2, &small_cfg(3)).unwrap();
        assert_eq!(report.c_hat, 1.0);
        assert!(!report.diverging);
        assert_abs_diff_eq!(report.m_hat, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.big_m_hat, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn scan_weighted_l1_pair_finds_two() {
        let n1 = parse_norm("lp(1, w=[2,1])").unwrap();
        let n2 = parse_norm("lp(1, w=[1,2])").unwrap();
        let report = scan_constant(&n1, &n2, 2, &small_cfg(7)).unwrap();
        assert!(report.c_hat >= 1.999 && report.c_hat <= 2.001, "c_hat {}", report.c_hat);
        assert!(!report.diverging);
    }

    #[test]
    fn topological_constant_examples() {
        let q1 = parse_norm("quad([[3,0],[0,1]])").unwrap();
        let q2 = parse_norm("quad([[1,0],[0,3]])").unwrap();
        let (m, big) = topological_constants(&q1, &q2, 2, 720).unwrap();
        assert_abs_diff_eq!(m, 1.0 / 3f64.sqrt(), epsilon = 1e-6);
        assert_abs_diff_eq!(big, 3f64.sqrt(), epsilon = 1e-6);

        let (m, big) = topological_constants(&q1, &q1, 2, 360).unwrap();
        assert_abs_diff_eq!(m, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(big, 1.0, epsilon = 1e-12);

        let l1 = parse_norm("lp(1)").unwrap();
        let linf = parse_norm("lp(inf)").unwrap();
        let (m, big) = topological_constants(&l1, &linf, 2, 720).unwrap();
        assert_abs_diff_eq!(m, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(big, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn wielandt_examples() {
        let q1 = parse_norm("quad([[3,0],[0,1]])").unwrap();
        let q2 = parse_norm("quad([[1,0],[0,3]])").unwrap();
        assert_abs_diff_eq!(wielandt_bound(&q1, &q2).unwrap(), 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(wielandt_bound(&q1, &q1).unwrap(), 1.0, epsilon = 1e-12);
        let scaled = parse_norm("quad([[7.5,0],[0,2.5]])").unwrap();
        assert_abs_diff_eq!(wielandt_bound(&q1, &scaled).unwrap(), 1.0, epsilon = 1e-10);
        let l1 = parse_norm("lp(1)").unwrap();
        assert!(wielandt_bound(&q1, &l1).is_err());
    }

    #[test]
    fn probe_detects_lp_divergence() {
        let l2 = parse_norm("lp(2)").unwrap();
        let l4 = parse_norm("lp(4)").unwrap();
        let sched = divergence_probe(
            &l2,
            &l4,
            &v(&[1.0, 0.0]),
            &v(&[0.0, 1.0]),
            &ProbeSchedule { s0: 0.1, factor: 0.1, steps: 4 },
        )
        .unwrap();
        assert_eq!(sched.len(), 4);
        for &(s, ratio) in &sched[1..] {
            let expect = 2f64.sqrt() / s;
            assert!(
                (ratio - expect).abs() <= 0.05 * expect,
                "ratio {ratio} vs sqrt(2)/s = {expect} at s = {s}"
            );
        }
        assert!(diverging_verdict(&sched));
    }

    #[test]
    fn probe_is_flat_for_identical_norms() {
        let l3 = parse_norm("lp(3)").unwrap();
        let sched = divergence_probe(
            &l3,
            &l3,
            &v(&[1.0, 0.0]),
            &v(&[0.0, 1.0]),
            &ProbeSchedule::default(),
        )
        .unwrap();
        for &(_, ratio) in &sched {
            assert!((0.99..=1.01).contains(&ratio));
        }
        assert!(!diverging_verdict(&sched));
    }

    #[test]
    fn probe_grows_on_max_combination() {
        let q1 = parse_norm("quad([[3,0],[0,1]])").unwrap();
        let m = parse_norm("max(quad([[3,0],[0,1]]),quad([[1,0],[0,3]]))").unwrap();
        let sched = divergence_probe(
            &q1,
            &m,
            &v(&[1.0, 1.0]),
            &v(&[-1.0, 1.0]),
            &ProbeSchedule { s0: 0.1, factor: 0.1, steps: 6 },
        )
        .unwrap();
        for w in sched.windows(2) {
            assert!(w[1].1 > w[0].1 * 2.0, "expected steady growth: {sched:?}");
        }
    }

    #[test]
    fn probe_rejects_dependent_directions() {
        let l2 = parse_norm("lp(2)").unwrap();
        assert!(matches!(
            divergence_probe(
                &l2,
                &l2,
                &v(&[1.0, 2.0]),
                &v(&[2.0, 4.0]),
                &ProbeSchedule::default()
            ),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sum_identity_residuals() {
        let q1 = parse_norm("quad([[3,0],[0,1]])").unwrap();
        let q2 = parse_norm("quad([[1,0],[0,3]])").unwrap();
        // Closed-form case from the quadratic pair.
        let r = check_sum_identity(&q1, &q2, &v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        assert!(r.abs() <= 1e-12, "residual {r}");
        // Collinear pairs cancel to summation rounding.
        let r = check_sum_identity(&q1, &q2, &v(&[1.0, 2.0]), &v(&[2.0, 4.0])).unwrap();
        assert!(r.abs() <= 1e-14, "residual {r}");
        // Random smooth pairs.
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..200 {
            let x = v(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
            let y = v(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let y3 = q1.eval_unchecked(&y) + q2.eval_unchecked(&y);
            let r = check_sum_identity(&q1, &q2, &x, &y).unwrap();
            assert!(r.abs() <= 1e-8 * y3, "residual {r} too large");
        }
    }

    #[test]
    fn report_serializes_with_stable_field_names() {
        let n = parse_norm("quad([[1,0],[0,1]])").unwrap();
        let cfg = ScanConfig { grid: 64, refine_rounds: 1, ..ScanConfig::default() };
        let report = scan_constant(&n, &n, 2, &cfg).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        for key in ["c_hat", "witness", "m_hat", "M_hat", "diverging", "schedule", "seed", "samples_used"]
        {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
    }
}
