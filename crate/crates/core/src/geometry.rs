//! Unit-ball shape diagnostics: corners, flat faces, strict-convexity
//! witnesses and convexity moduli.
//!
//! Vertices are detected in the boundary-angle vocabulary of [`crate::plane`]:
//! a corner at `alpha` is a jump `phi+(alpha) - phi-(alpha) > tol`, and the
//! monotone map `t -> phi(t) + t` localizes off-grid corners by bisection.
//! Flat faces are probed with chord-midpoint tests. Moduli are sampled
//! infima, hence upper bounds on the true values; tables carry a "sampled"
//! qualifier.

use crate::error::{Error, Result};
use crate::gfunc::{self};
use crate::norms::{NormExpr, Vector};
use crate::plane::{phi_pair, PhiPair};
use crate::sample::{par_top_k, DirectionPairs};
use rayon::prelude::*;

/// Corner rays and flat stretches of a planar unit ball.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExtremeRays {
    /// Corner angles, sorted, in `[0, 2 pi)`; pi-symmetric by construction.
    pub vertex_angles: Vec<f64>,
    /// Maximal closed angle ranges over which the boundary is affine.
    pub flat_intervals: Vec<(f64, f64)>,
    /// Jump threshold (radians) used for detection.
    pub tol: f64,
}

/// Outcome of matching the corner rays of two planar balls.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RayComparison {
    pub matched: Vec<(f64, f64)>,
    pub unmatched_first: Vec<f64>,
    pub unmatched_second: Vec<f64>,
    /// All rays matched in both directions: consistent with angular equivalence.
    pub consistent: bool,
}

/// Convexity diagnostics for one norm.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvexityReport {
    pub strictly_convex: bool,
    pub witness: Option<(Vector, Vector)>,
    /// `eps -> delta(eps)`: sampled infimum of `1 - ||(x+y)/2||`.
    pub delta_table: Vec<(f64, f64)>,
    /// `eps -> delta_theta(eps)`: sampled infimum of `tan(theta(x,y)/2)`.
    pub delta_theta_table: Vec<(f64, f64)>,
    /// Sampled infima are upper bounds on the true moduli.
    pub qualifier: &'static str,
    pub samples: usize,
    pub seed: u64,
}

fn check_planar(n: &NormExpr) -> Result<()> {
    match n.dim() {
        Some(2) | None => Ok(()),
        Some(d) => Err(Error::DimMismatch { expected: 2, got: d }),
    }
}

fn boundary_point(n: &NormExpr, t: f64) -> [f64; 2] {
    let r = 1.0 / n.eval_unchecked(&[t.cos(), t.sin()]);
    [r * t.cos(), r * t.sin()]
}

/// Chord-midpoint probe: `1 - ||(P(alpha-h) + P(alpha+h)) / 2||`.
/// Zero on a locally flat boundary, positive where strictly curved.
pub fn flatness(n: &NormExpr, alpha: f64, h: f64) -> Result<f64> {
    check_planar(n)?;
    if !(h > 0.0 && h < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("flatness window must lie in (0, pi/2), got {h}")));
    }
    let a = boundary_point(n, alpha - h);
    let b = boundary_point(n, alpha + h);
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    Ok(1.0 - n.eval_unchecked(&mid))
}

/// Default angle grid for boundary scans.
const DEFAULT_GRID: usize = 720;
/// Bisection stops once a corner is localized to this width (radians).
const VERTEX_RESOLUTION: f64 = 1e-5;

/// Detect corner rays and flat stretches of the unit ball of `n`.
///
/// `tol` is the phi-jump threshold in radians (reference default 1e-3).
pub fn vertex_angles(n: &NormExpr, tol: f64) -> Result<ExtremeRays> {
    vertex_angles_with(n, tol, DEFAULT_GRID)
}

pub fn vertex_angles_with(n: &NormExpr, tol: f64, grid: usize) -> Result<ExtremeRays> {
    check_planar(n)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("vertex tolerance must be positive, got {tol}")));
    }
    // r is pi-periodic: scan [0, pi), mirror by +pi afterwards.
    let cells = (grid / 2).max(8);
    let pi = std::f64::consts::PI;
    let ts: Vec<f64> = (0..=cells).map(|i| pi * i as f64 / cells as f64).collect();
    let phis: Vec<PhiPair> =
        ts.par_iter().map(|&t| phi_pair(n, t).expect("dim checked")).collect();
    let mut half_vertices: Vec<f64> = Vec::new();
    for i in 0..cells {
        if phis[i].width > tol {
            half_vertices.push(ts[i]);
        }
        hunt_corners(n, ts[i], &phis[i], ts[i + 1], &phis[i + 1], tol, &mut half_vertices);
    }
    half_vertices.sort_by(|a, b| a.partial_cmp(b).unwrap());
    half_vertices.dedup_by(|a, b| (*a - *b).abs() < 10.0 * VERTEX_RESOLUTION);
    let mut vertex_angles: Vec<f64> = half_vertices
        .iter()
        .flat_map(|&v| [v, v + pi])
        .map(|v| v.rem_euclid(2.0 * pi))
        .collect();
    vertex_angles.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Flat runs: chord-midpoint test at each cell, split at detected corners.
    let h = 0.5 * pi / cells as f64;
    let flat: Vec<bool> = (0..cells)
        .into_par_iter()
        .map(|i| {
            let mid = 0.5 * (ts[i] + ts[i + 1]);
            flatness(n, mid, h).expect("dim checked") < tol * h * h
        })
        .collect();
    let mut half_intervals: Vec<(f64, f64)> = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 0..=cells {
        let is_flat = i < cells && flat[i];
        if is_flat && run_start.is_none() {
            run_start = Some(i);
        }
        if !is_flat {
            if let Some(s) = run_start.take() {
                half_intervals.push((ts[s], ts[i]));
            }
        }
    }
    let mut split: Vec<(f64, f64)> = Vec::new();
    for (a, b) in half_intervals {
        let mut cuts: Vec<f64> =
            half_vertices.iter().copied().filter(|&v| v > a && v < b).collect();
        cuts.push(b);
        let mut lo = a;
        for c in cuts {
            if c - lo > 2.0 * h {
                split.push((lo, c));
            }
            lo = c;
        }
    }
    let flat_intervals: Vec<(f64, f64)> =
        split.iter().flat_map(|&(a, b)| [(a, b), (a + pi, b + pi)]).collect();
    Ok(ExtremeRays { vertex_angles, flat_intervals, tol })
}

/// The map `t -> phi(t) + t` is non-decreasing and gains at least the jump of
/// every interior corner, so a cell whose gain exceeds `tol` is bisected
/// until its corners are pinned down.
fn hunt_corners(
    n: &NormExpr,
    a: f64,
    phi_a: &PhiPair,
    b: f64,
    phi_b: &PhiPair,
    tol: f64,
    out: &mut Vec<f64>,
) {
    let gain = (phi_b.phi_minus + b) - (phi_a.phi_plus + a);
    if gain <= tol {
        return;
    }
    if b - a <= VERTEX_RESOLUTION {
        out.push(0.5 * (a + b));
        return;
    }
    let m = 0.5 * (a + b);
    let phi_m = phi_pair(n, m).expect("dim checked");
    if phi_m.width > tol {
        out.push(m);
    }
    hunt_corners(n, a, phi_a, m, &phi_m, tol, out);
    hunt_corners(n, m, &phi_m, b, phi_b, tol, out);
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let d = (a - b).rem_euclid(two_pi);
    d.min(two_pi - d)
}

/// Match the corner rays of two planar unit balls within angular `tol`.
pub fn compare_extreme_rays(n1: &NormExpr, n2: &NormExpr, tol: f64) -> Result<RayComparison> {
    let v1 = vertex_angles(n1, 1e-3)?.vertex_angles;
    let v2 = vertex_angles(n2, 1e-3)?.vertex_angles;
    let mut taken = vec![false; v2.len()];
    let mut matched = Vec::new();
    let mut unmatched_first = Vec::new();
    for &a in &v1 {
        let best = v2
            .iter()
            .enumerate()
            .filter(|(j, _)| !taken[*j])
            .map(|(j, &b)| (j, circular_distance(a, b)))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
        match best {
            Some((j, d)) if d <= tol => {
                taken[j] = true;
                matched.push((a, v2[j]));
            }
            _ => unmatched_first.push(a),
        }
    }
    let unmatched_second: Vec<f64> =
        v2.iter().zip(&taken).filter(|(_, &t)| !t).map(|(&b, _)| b).collect();
    let consistent = unmatched_first.is_empty() && unmatched_second.is_empty();
    Ok(RayComparison { matched, unmatched_first, unmatched_second, consistent })
}

fn unit_vector(n: &NormExpr, dir: &[f64]) -> Option<Vec<f64>> {
    let len = n.eval_unchecked(dir);
    if len <= 0.0 || !len.is_finite() {
        return None;
    }
    Some(dir.iter().map(|c| c / len).collect())
}

/// Search for a pair of independent unit vectors with `tan(theta/2) <= tol`;
/// such a pair certifies the ball is not strictly convex.
///
/// In the plane the search is seeded from the detected flat stretches
/// before any random sampling.
pub fn strict_convexity_witness(
    n: &NormExpr,
    dim: usize,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<Option<(Vector, Vector)>> {
    if let Some(d) = n.dim() {
        if d != dim {
            return Err(Error::DimMismatch { expected: dim, got: d });
        }
    }
    let tan_of = |x: &[f64], y: &[f64]| -> Option<f64> {
        let xv = Vector::new(x.to_vec()).ok()?;
        let yv = Vector::new(y.to_vec()).ok()?;
        let pair = gfunc::g_functional(n, &xv, &yv).ok()?;
        Some(pair.tan_half_sq.sqrt())
    };
    if dim == 2 {
        let rays = vertex_angles(n, 1e-3)?;
        for &(a, b) in &rays.flat_intervals {
            let mid = 0.5 * (a + b);
            for other in [a, b, a + 0.25 * (b - a), b - 0.25 * (b - a)] {
                if (other - mid).abs() < 1e-9 {
                    continue;
                }
                let y = boundary_point(n, mid);
                let z = boundary_point(n, other);
                if let Some(t) = tan_of(&y, &z) {
                    if t <= tol {
                        return Ok(Some((
                            Vector::new(y.to_vec()).unwrap(),
                            Vector::new(z.to_vec()).unwrap(),
                        )));
                    }
                }
            }
        }
    }
    let sampler = DirectionPairs::new(dim, seed);
    let hit = (0..samples)
        .into_par_iter()
        .filter_map(|i| {
            let (dx, dy) = sampler.pair(i as u64);
            let x = unit_vector(n, &dx)?;
            let y = unit_vector(n, &dy)?;
            let t = tan_of(&x, &y)?;
            (t <= tol).then_some((i, x, y))
        })
        .min_by_key(|(i, _, _)| *i);
    Ok(hit.map(|(_, x, y)| (Vector::new(x).unwrap(), Vector::new(y).unwrap())))
}

/// Find `y` on the unit sphere at prescribed self-norm distance from `x` by
/// bisecting along the normalized path `x cos t + w sin t`, which runs from
/// `x` (distance 0) to `-x` (distance 2).
fn point_at_separation(n: &NormExpr, x: &[f64], w: &[f64], eps: f64) -> Option<Vec<f64>> {
    let sep = |t: f64| -> Option<(f64, Vec<f64>)> {
        let dir: Vec<f64> =
            x.iter().zip(w.iter()).map(|(a, b)| a * t.cos() + b * t.sin()).collect();
        let y = unit_vector(n, &dir)?;
        let d: Vec<f64> = x.iter().zip(y.iter()).map(|(a, b)| a - b).collect();
        Some((n.eval_unchecked(&d), y))
    };
    let mut lo = 0.0f64;
    let mut hi = std::f64::consts::PI;
    let (end, _) = sep(hi)?;
    if end < eps {
        return None;
    }
    let mut y_best = None;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (d, y) = sep(mid)?;
        if d < eps {
            lo = mid;
        } else {
            hi = mid;
            y_best = Some(y);
        }
    }
    y_best
}

/// Sampled convexity modulus `delta(eps) = inf { 1 - ||(x+y)/2|| }` over unit
/// pairs with `||x - y|| >= eps`, separation measured in `n`'s own norm.
pub fn convexity_modulus(
    n: &NormExpr,
    dim: usize,
    eps_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    sampled_infimum(n, dim, eps_grid, samples, seed, |n, x, y| {
        let mid: Vec<f64> = x.iter().zip(y.iter()).map(|(a, b)| 0.5 * (a + b)).collect();
        Some(1.0 - n.eval_unchecked(&mid))
    })
}

/// Sampled angle modulus `delta_theta(eps) = inf tan(theta(x, y)/2)` over the
/// same constraint set as [`convexity_modulus`].
pub fn angle_modulus(
    n: &NormExpr,
    dim: usize,
    eps_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    sampled_infimum(n, dim, eps_grid, samples, seed, |n, x, y| {
        let xv = Vector::new(x.to_vec()).ok()?;
        let yv = Vector::new(y.to_vec()).ok()?;
        let pair = gfunc::g_functional(n, &xv, &yv).ok()?;
        Some(pair.tan_half_sq.sqrt())
    })
}

fn sampled_infimum<F>(
    n: &NormExpr,
    dim: usize,
    eps_grid: &[f64],
    samples: usize,
    seed: u64,
    objective: F,
) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&NormExpr, &[f64], &[f64]) -> Option<f64> + Sync,
{
    if let Some(d) = n.dim() {
        if d != dim {
            return Err(Error::DimMismatch { expected: dim, got: d });
        }
    }
    for &eps in eps_grid {
        if !(eps > 0.0 && eps <= 2.0) {
            return Err(Error::Domain(format!("eps grid must lie in (0, 2], got {eps}")));
        }
    }
    let sampler = DirectionPairs::new(dim, seed);
    let pair_at = |i: usize| -> Option<(Vec<f64>, Vec<f64>)> {
        if dim == 2 {
            let t = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
            let x = unit_vector(n, &[t.cos(), t.sin()])?;
            let w = vec![-t.sin(), t.cos()];
            Some((x, w))
        } else {
            let (dx, dw) = sampler.pair(i as u64);
            Some((unit_vector(n, &dx)?, dw))
        }
    };
    // Infimum over separation = eps' for each grid eps', then a suffix
    // minimum converts the tables to the ">= eps" constraint.
    let mut at_eps: Vec<f64> = eps_grid
        .iter()
        .map(|&eps| {
            let best = par_top_k(samples, 5, |i| {
                let (x, w) = pair_at(i)?;
                let y = point_at_separation(n, &x, &w, eps)?;
                objective(n, &x, &y).map(|v| -v)
            });
            let mut min_val = best.first().map_or(f64::INFINITY, |&(_, v)| -v);
            // Local polish around the best starting directions.
            for &(i, _) in &best {
                if let Some((x, w)) = pair_at(i) {
                    min_val = min_val.min(polish(n, &x, &w, eps, seed, &objective));
                }
            }
            min_val
        })
        .collect();
    for i in (0..at_eps.len().saturating_sub(1)).rev() {
        if at_eps[i + 1] < at_eps[i] {
            at_eps[i] = at_eps[i + 1];
        }
    }
    Ok(eps_grid.iter().copied().zip(at_eps).collect())
}

fn polish<F>(n: &NormExpr, x0: &[f64], w0: &[f64], eps: f64, seed: u64, objective: &F) -> f64
where
    F: Fn(&NormExpr, &[f64], &[f64]) -> Option<f64> + Sync,
{
    let mut best = f64::INFINITY;
    let mut x = x0.to_vec();
    let mut w = w0.to_vec();
    let mut state = seed ^ 0x5bd1_e995;
    let mut sigma = 0.1;
    for _ in 0..2 {
        for _ in 0..60 {
            let jitter = |v: &[f64], state: &mut u64| -> Vec<f64> {
                v.iter()
                    .map(|&c| {
                        let u = (crate::sample::splitmix64(state) >> 11) as f64
                            / (1u64 << 53) as f64;
                        c + sigma * (u - 0.5)
                    })
                    .collect()
            };
            let xc = jitter(&x, &mut state);
            let wc = jitter(&w, &mut state);
            let Some(xu) = unit_vector(n, &xc) else { continue };
            let Some(y) = point_at_separation(n, &xu, &wc, eps) else { continue };
            if let Some(v) = objective(n, &xu, &y) {
                if v < best {
                    best = v;
                    x = xu;
                    w = wc;
                }
            }
        }
        sigma /= 10.0;
    }
    best
}

/// Controls for [`convexity_report`].
#[derive(Debug, Clone)]
pub struct ConvexityConfig {
    pub eps_grid: Vec<f64>,
    pub samples: usize,
    pub witness_samples: usize,
    pub witness_tol: f64,
    pub seed: u64,
}

impl Default for ConvexityConfig {
    fn default() -> Self {
        ConvexityConfig {
            eps_grid: vec![0.1, 0.25, 0.5, 1.0, 1.5],
            samples: 720,
            witness_samples: 20_000,
            witness_tol: 1e-9,
            seed: 0,
        }
    }
}

/// Full convexity diagnostics: strict-convexity verdict with witness plus
/// both sampled moduli tables.
pub fn convexity_report(n: &NormExpr, dim: usize, cfg: &ConvexityConfig) -> Result<ConvexityReport> {
    let witness =
        strict_convexity_witness(n, dim, cfg.witness_samples, cfg.witness_tol, cfg.seed)?;
    let delta_table = convexity_modulus(n, dim, &cfg.eps_grid, cfg.samples, cfg.seed)?;
    let delta_theta_table = angle_modulus(n, dim, &cfg.eps_grid, cfg.samples, cfg.seed)?;
    Ok(ConvexityReport {
        strictly_convex: witness.is_none(),
        witness,
        delta_table,
        delta_theta_table,
        qualifier: "sampled",
        samples: cfg.samples,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::parse_norm;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn flatness_examples() {
        let id = parse_norm("quad([[1,0],[0,1]])").unwrap();
        for alpha in [0.0, 1.1, 3.0] {
            let f = flatness(&id, alpha, 0.1).unwrap();
            assert_abs_diff_eq!(f, 1.0 - 0.1f64.cos(), epsilon = 1e-12);
        }
        let linf = parse_norm("lp(inf)").unwrap();
        assert_abs_diff_eq!(flatness(&linf, 0.0, 0.2).unwrap(), 0.0, epsilon = 1e-14);
        let l1 = parse_norm("lp(1)").unwrap();
        assert_abs_diff_eq!(flatness(&l1, FRAC_PI_4, 0.1).unwrap(), 0.0, epsilon = 1e-14);
    }

    fn assert_angle_set(got: &[f64], expect: &[f64], tol: f64) {
        assert_eq!(got.len(), expect.len(), "vertex count: got {got:?}, expected {expect:?}");
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() <= tol, "vertex {g} vs {e}");
        }
    }

    #[test]
    fn diamond_and_square_vertices() {
        let l1 = parse_norm("lp(1)").unwrap();
        let rays = vertex_angles(&l1, 1e-3).unwrap();
        assert_angle_set(
            &rays.vertex_angles,
            &[0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2],
            1e-4,
        );
        assert!(!rays.flat_intervals.is_empty());

        let linf = parse_norm("lp(inf)").unwrap();
        let rays = vertex_angles(&linf, 1e-3).unwrap();
        assert_angle_set(
            &rays.vertex_angles,
            &[FRAC_PI_4, 3.0 * FRAC_PI_4, 5.0 * FRAC_PI_4, 7.0 * FRAC_PI_4],
            1e-4,
        );
    }

    #[test]
    fn circle_has_no_features() {
        let id = parse_norm("quad([[1,0],[0,1]])").unwrap();
        let rays = vertex_angles(&id, 1e-3).unwrap();
        assert!(rays.vertex_angles.is_empty(), "vertices {:?}", rays.vertex_angles);
        assert!(rays.flat_intervals.is_empty());
    }

    #[test]
    fn off_grid_polygon_vertices_are_found() {
        // Ball of max(|x|/2, |y|): vertices at (+-2, +-1), angles atan(1/2) etc.
        let n = parse_norm("lp(inf, w=[0.5, 1])").unwrap();
        let rays = vertex_angles(&n, 1e-3).unwrap();
        let base = 0.5f64.atan();
        assert_angle_set(
            &rays.vertex_angles,
            &[base, PI - base, PI + base, 2.0 * PI - base],
            1e-4,
        );
    }

    #[test]
    fn vertex_invariants() {
        for src in ["lp(1)", "lp(inf, w=[0.5, 1])", "polygon([[2,1],[-1,2],[-2,-1],[1,-2]])"] {
            let n = parse_norm(src).unwrap();
            let rays = vertex_angles(&n, 1e-3).unwrap();
            let k = rays.vertex_angles.len();
            assert_eq!(k % 2, 0);
            for i in 0..k / 2 {
                let a = rays.vertex_angles[i];
                let b = rays.vertex_angles[i + k / 2];
                assert_abs_diff_eq!(b - a, PI, epsilon = 1e-6);
            }
            for &(lo, hi) in &rays.flat_intervals {
                for &v in &rays.vertex_angles {
                    assert!(
                        v <= lo + 1e-9 || v >= hi - 1e-9,
                        "vertex {v} inside flat interval ({lo}, {hi})"
                    );
                }
            }
        }
    }

    #[test]
    fn ray_comparison_examples() {
        let l1 = parse_norm("lp(1)").unwrap();
        let linf = parse_norm("lp(inf)").unwrap();
        let cmp = compare_extreme_rays(&l1, &linf, 1e-3).unwrap();
        assert!(!cmp.consistent);
        assert_eq!(cmp.unmatched_first.len(), 4);
        assert_eq!(cmp.unmatched_second.len(), 4);

        let a = parse_norm("lp(1, w=[2,1])").unwrap();
        let b = parse_norm("lp(1, w=[1,2])").unwrap();
        let cmp = compare_extreme_rays(&a, &b, 1e-3).unwrap();
        assert!(cmp.consistent, "unmatched: {:?} {:?}", cmp.unmatched_first, cmp.unmatched_second);
        assert_eq!(cmp.matched.len(), 4);
    }

    #[test]
    fn dual_pair_rays_mismatch() {
        let n1 = parse_norm("lp(1, w=[2,1])").unwrap();
        let n2 = parse_norm("lp(1, w=[1,2])").unwrap();
        let d1 = crate::norms::dualize(&n1).unwrap();
        let d2 = crate::norms::dualize(&n2).unwrap();
        let cmp = compare_extreme_rays(&d1, &d2, 1e-3).unwrap();
        assert!(!cmp.consistent);
        // One family of rays at atan(1/2), the other at atan(2).
        let r1 = vertex_angles(&d1, 1e-3).unwrap().vertex_angles;
        assert_abs_diff_eq!(r1[0], 0.5f64.atan(), epsilon = 1e-4);
        let r2 = vertex_angles(&d2, 1e-3).unwrap().vertex_angles;
        assert_abs_diff_eq!(r2[0], 2.0f64.atan(), epsilon = 1e-4);
    }

    #[test]
    fn witness_found_for_l1_but_not_round_norms() {
        let l1 = parse_norm("lp(1)").unwrap();
        let witness = strict_convexity_witness(&l1, 2, 1000, 1e-9, 0).unwrap();
        let (y, z) = witness.expect("l1 has flat faces");
        let pair = gfunc::g_functional(&l1, &y, &z).unwrap();
        assert!(pair.tan_half_sq.sqrt() <= 1e-9);

        let quad = parse_norm("quad([[2,0.5],[0.5,1]])").unwrap();
        assert!(strict_convexity_witness(&quad, 2, 10_000, 1e-9, 0).unwrap().is_none());
        let l4 = parse_norm("lp(4)").unwrap();
        assert!(strict_convexity_witness(&l4, 2, 10_000, 1e-9, 0).unwrap().is_none());
    }

    #[test]
    fn circle_moduli_match_chord_geometry() {
        let id = parse_norm("quad([[1,0],[0,1]])").unwrap();
        let delta = convexity_modulus(&id, 2, &[1.0], 360, 0).unwrap();
        assert_abs_diff_eq!(delta[0].1, 1.0 - 3f64.sqrt() / 2.0, epsilon = 2e-3);
        let dtheta = angle_modulus(&id, 2, &[1.0], 360, 0).unwrap();
        assert_abs_diff_eq!(dtheta[0].1, 1.0 / 3f64.sqrt(), epsilon = 2e-3);
    }

    #[test]
    fn l1_moduli_vanish_on_flat_faces() {
        let l1 = parse_norm("lp(1)").unwrap();
        let delta = convexity_modulus(&l1, 2, &[0.5], 360, 0).unwrap();
        assert!(delta[0].1.abs() <= 1e-6, "delta {}", delta[0].1);
        let dtheta = angle_modulus(&l1, 2, &[0.25, 0.5], 360, 0).unwrap();
        for &(_, v) in &dtheta {
            assert!(v.abs() <= 1e-6, "delta_theta {v}");
        }
    }

    #[test]
    fn moduli_tables_are_monotone() {
        let grid = [0.1, 0.25, 0.5, 1.0, 1.5];
        for src in ["quad([[3,0],[0,1]])", "lp(3)"] {
            let n = parse_norm(src).unwrap();
            let table = convexity_modulus(&n, 2, &grid, 240, 0).unwrap();
            for w in table.windows(2) {
                assert!(w[1].1 >= w[0].1 - 1e-3, "not monotone: {table:?}");
            }
        }
    }

    #[test]
    fn near_diameter_separation_bounds_delta_by_one() {
        let n = parse_norm("lp(3)").unwrap();
        let table = convexity_modulus(&n, 2, &[2.0 * (1.0 - 1e-9)], 120, 0).unwrap();
        assert!(table[0].1 <= 1.0 + 1e-9);
    }

    #[test]
    fn report_aggregates_and_serializes() {
        let l1 = parse_norm("lp(1)").unwrap();
        let cfg = ConvexityConfig { samples: 120, witness_samples: 500, ..Default::default() };
        let report = convexity_report(&l1, 2, &cfg).unwrap();
        assert!(!report.strictly_convex);
        assert!(report.witness.is_some());
        let json = serde_json::to_value(&report).unwrap();
        assert!(json.get("delta_table").is_some());
        assert_eq!(json["qualifier"], "sampled");
    }
}
