//! Planar unit-ball machinery.
//!
//! For a norm on `R^2` the boundary of the unit ball is the polar graph of
//! `r(t) = 1 / ||(cos t, sin t)||`, a strictly positive pi-periodic function.
//! With `P_t = r(t) (cos t, sin t)` the comparison angle
//!
//! ```text
//! sigma(alpha, beta) = angle O P_alpha P_beta        (alpha > beta)
//!                      pi - angle O P_alpha P_beta   (alpha < beta)
//! ```
//!
//! is non-decreasing in `beta` on `(alpha - pi, alpha) u (alpha, alpha + pi)`,
//! and its one-sided limits `phi-(alpha)`, `phi+(alpha)` encode the one-sided
//! boundary slopes: `r'(alpha +-) = r(alpha) cot phi+-(alpha)`. The
//! g-functional of two boundary directions has a closed form in `r`, `sigma`
//! and `phi+-`, implemented by [`g_planar`] and cross-checked against the
//! direct limit in `gfunc`.
//!
//! Angle arguments are plain reals; `sigma` requires `0 < |alpha - beta| < pi`
//! of the raw arguments, which keeps the one-sided-limit logic free of
//! wrap-around bookkeeping.

use crate::error::{Error, Result};
use crate::gfunc::{GPair, Method};
use crate::norms::NormExpr;
use std::io::Write;

fn check_planar(n: &NormExpr) -> Result<()> {
    match n.dim() {
        Some(2) | None => Ok(()),
        Some(d) => Err(Error::DimMismatch { expected: 2, got: d }),
    }
}

/// Polar radius `r(t) = 1 / ||(cos t, sin t)||`.
pub fn radial(n: &NormExpr, t: f64) -> Result<f64> {
    check_planar(n)?;
    Ok(radial_unchecked(n, t))
}

fn radial_unchecked(n: &NormExpr, t: f64) -> f64 {
    1.0 / n.eval_unchecked(&[t.cos(), t.sin()])
}

/// Comparison angle `sigma(alpha, beta)`, inverted from
/// `r(alpha)/r(beta) = cos(alpha-beta) + sin(alpha-beta) cot sigma`
/// with the arccot branch fixed to `(0, pi)`.
pub fn sigma(n: &NormExpr, alpha: f64, beta: f64) -> Result<f64> {
    check_planar(n)?;
    let d = alpha - beta;
    if d == 0.0 || d.abs() >= std::f64::consts::PI {
        return Err(Error::Domain(format!(
            "sigma requires 0 < |alpha - beta| < pi, got |{d}|"
        )));
    }
    Ok(sigma_cached(n, radial_unchecked(n, alpha), alpha, beta))
}

fn sigma_cached(n: &NormExpr, r_alpha: f64, alpha: f64, beta: f64) -> f64 {
    let d = alpha - beta;
    let z = (r_alpha / radial_unchecked(n, beta) - d.cos()) / d.sin();
    std::f64::consts::FRAC_PI_2 - z.atan()
}

/// Schedule for the one-sided limits of `sigma(alpha, .)`.
#[derive(Debug, Clone)]
pub struct PhiOptions {
    pub h0: f64,
    pub max_steps: u32,
    /// Below this offset the sigma evaluation is cancellation-dominated.
    pub h_floor: f64,
    pub target_width: f64,
}

impl Default for PhiOptions {
    fn default() -> Self {
        PhiOptions { h0: 1e-2, max_steps: 30, h_floor: 1e-5, target_width: 1e-9 }
    }
}

/// One-sided limits of `sigma(alpha, .)` at `alpha`.
///
/// `sigma(alpha, alpha - h)` increases and `sigma(alpha, alpha + h)`
/// decreases as `h` shrinks, so running envelopes bracket `[phi-, phi+]`
/// from the outside. The reported values sharpen the final envelope by a
/// two-point Richardson step (the one-sided error is linear in `h`), clamped
/// back into the envelope so they never leave the certified bracket; `width`
/// estimates the jump `phi+ - phi-`, which vanishes at smooth boundary points.
#[derive(Debug, Clone, Copy)]
pub struct PhiPair {
    pub phi_minus: f64,
    pub phi_plus: f64,
    pub width: f64,
}

impl PhiPair {
    /// Smoothness tag for scan exclusions: no detectable corner at this angle.
    pub fn is_smooth(&self, tol: f64) -> bool {
        self.width <= tol
    }
}

pub fn phi_pair(n: &NormExpr, alpha: f64) -> Result<PhiPair> {
    phi_pair_with(n, alpha, &PhiOptions::default())
}

pub fn phi_pair_with(n: &NormExpr, alpha: f64, opts: &PhiOptions) -> Result<PhiPair> {
    check_planar(n)?;
    let r_alpha = radial_unchecked(n, alpha);
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let (mut lo_prev, mut lo_last) = (f64::NAN, f64::NAN);
    let (mut hi_prev, mut hi_last) = (f64::NAN, f64::NAN);
    let mut h = opts.h0;
    for k in 0..=opts.max_steps {
        if k > 0 && h < opts.h_floor {
            break;
        }
        let s_lo = sigma_cached(n, r_alpha, alpha, alpha - h);
        let s_hi = sigma_cached(n, r_alpha, alpha, alpha + h);
        lo = lo.max(s_lo);
        hi = hi.min(s_hi);
        (lo_prev, lo_last) = (lo_last, s_lo);
        (hi_prev, hi_last) = (hi_last, s_hi);
        if hi - lo <= opts.target_width {
            break;
        }
        h *= 0.5;
    }
    // Noise can invert a collapsed envelope by an ulp; restore ordering.
    if lo > hi {
        let mid = 0.5 * (lo + hi);
        lo = mid;
        hi = mid;
    }
    // With h halving each step, 2 s(h) - s(2h) cancels the linear error term.
    let extrapolate = |last: f64, prev: f64| if prev.is_nan() { last } else { 2.0 * last - prev };
    let mut phi_minus = extrapolate(lo_last, lo_prev).clamp(lo, hi);
    let mut phi_plus = extrapolate(hi_last, hi_prev).clamp(lo, hi);
    if phi_minus > phi_plus {
        let mid = 0.5 * (phi_minus + phi_plus);
        phi_minus = mid;
        phi_plus = mid;
    }
    Ok(PhiPair { phi_minus, phi_plus, width: (phi_plus - phi_minus).max(0.0) })
}

/// One side of [`phi_pair`]; returns `(value, bracket_width)`.
pub fn phi_one_sided(n: &NormExpr, alpha: f64, side: crate::gfunc::Side) -> Result<(f64, f64)> {
    let pair = phi_pair(n, alpha)?;
    let value = match side {
        crate::gfunc::Side::Minus => pair.phi_minus,
        crate::gfunc::Side::Plus => pair.phi_plus,
    };
    Ok((value, pair.width))
}

/// Reduce an angle difference to `(-pi, pi]`.
fn reduce_angle(d: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut r = d % two_pi;
    if r > std::f64::consts::PI {
        r -= two_pi;
    } else if r <= -std::f64::consts::PI {
        r += two_pi;
    }
    r
}

/// Closed-form g-functional and angle for the boundary directions
/// `x = a Q_alpha`, `y = b Q_beta` (`Q_t = (cos t, sin t)`, `a, b > 0`):
///
/// ```text
/// g   = (a b / r(alpha)^2) (cos(alpha-beta) + (cot phi- + cot phi+)/2 sin(alpha-beta))
/// cos theta = (cot(alpha-beta) + (cot phi- + cot phi+)/2) / (cot(alpha-beta) + cot sigma)
/// tan^2(theta/2) = (cot sigma - A) / (2 cot(alpha-beta) + cot sigma + A)
/// ```
///
/// Collapsing differences (`sin(alpha-beta)` within 1e-12 of zero) route to
/// the exact aligned/opposite formulas.
pub fn g_planar(n: &NormExpr, alpha: f64, beta: f64, a: f64, b: f64) -> Result<GPair> {
    check_planar(n)?;
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Domain(format!("g_planar requires a, b > 0, got {a}, {b}")));
    }
    let r_alpha = radial_unchecked(n, alpha);
    let d = reduce_angle(alpha - beta);
    let base = a * b / (r_alpha * r_alpha);
    if d.sin().abs() < 1e-12 {
        let aligned = d.cos() > 0.0;
        let g = if aligned { base } else { -base };
        let (one_minus, one_plus) = if aligned { (0.0, 2.0) } else { (2.0, 0.0) };
        return Ok(planar_pair(g, g, base, one_minus, one_plus, 0.0));
    }
    let phi = phi_pair(n, alpha)?;
    let cot_minus = cot(phi.phi_minus);
    let cot_plus = cot(phi.phi_plus);
    let mid = 0.5 * (cot_minus + cot_plus);
    let half_gap = 0.5 * (cot_minus - cot_plus).max(0.0);
    let g = base * (d.cos() + mid * d.sin());
    let g_minus = g - base * half_gap * d.sin().abs();
    let g_plus = g + base * half_gap * d.sin().abs();
    let sig = sigma_cached(n, r_alpha, alpha, alpha - d);
    let cot_sig = cot(sig);
    let cot_d = cot(d);
    let cos_theta = ((cot_d + mid) / (cot_d + cot_sig)).clamp(-1.0, 1.0);
    let tan_den = 2.0 * cot_d + cot_sig + mid;
    let tan_half_sq = if tan_den == 0.0 {
        f64::INFINITY
    } else {
        ((cot_sig - mid) / tan_den).max(0.0)
    };
    // First-order propagation of the phi bracket through cot.
    let width = base
        * d.sin().abs()
        * 0.5
        * phi.width
        * (csc_sq(phi.phi_minus) + csc_sq(phi.phi_plus));
    Ok(GPair {
        g_minus,
        g_plus,
        g: 0.5 * (g_minus + g_plus),
        cos_theta,
        tan_half_sq,
        bracket_width: width,
        method: Method::Numeric,
        cos_clamp_excess: 0.0,
    })
}

fn planar_pair(
    g_minus: f64,
    g_plus: f64,
    _scale: f64,
    one_minus: f64,
    one_plus: f64,
    width: f64,
) -> GPair {
    let cos_theta = (0.5 * (one_plus - one_minus)).clamp(-1.0, 1.0);
    let tan_half_sq = if one_plus <= 0.0 { f64::INFINITY } else { one_minus / one_plus };
    GPair {
        g_minus,
        g_plus,
        g: 0.5 * (g_minus + g_plus),
        cos_theta,
        tan_half_sq,
        bracket_width: width,
        method: Method::Analytic,
        cos_clamp_excess: 0.0,
    }
}

fn cot(t: f64) -> f64 {
    t.cos() / t.sin()
}

fn csc_sq(t: f64) -> f64 {
    let s = t.sin();
    1.0 / (s * s)
}

/// Sampled boundary profile of a planar unit ball.
#[derive(Debug, Clone)]
pub struct PolarProfile {
    norm: NormExpr,
    grid: Vec<f64>,
    r_values: Vec<f64>,
    r_min: f64,
    r_max: f64,
}

impl PolarProfile {
    /// Sample `r` on a uniform grid over `[0, 2 pi)`; the extremes are
    /// sharpened by local ternary refinement around the best cells.
    pub fn sample(n: &NormExpr, grid_size: usize) -> Result<Self> {
        check_planar(n)?;
        let grid_size = grid_size.max(8);
        let two_pi = 2.0 * std::f64::consts::PI;
        let grid: Vec<f64> = (0..grid_size).map(|i| two_pi * i as f64 / grid_size as f64).collect();
        let r_values: Vec<f64> = grid.iter().map(|&t| radial_unchecked(n, t)).collect();
        let (mut i_min, mut i_max) = (0usize, 0usize);
        for (i, &r) in r_values.iter().enumerate() {
            if r < r_values[i_min] {
                i_min = i;
            }
            if r > r_values[i_max] {
                i_max = i;
            }
        }
        let cell = two_pi / grid_size as f64;
        let refine = |i: usize, sign: f64| -> f64 {
            let mut lo = grid[i] - cell;
            let mut hi = grid[i] + cell;
            for _ in 0..90 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if sign * radial_unchecked(n, m1) < sign * radial_unchecked(n, m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            radial_unchecked(n, 0.5 * (lo + hi))
        };
        let r_min = r_values[i_min].min(refine(i_min, 1.0));
        let r_max = r_values[i_max].max(refine(i_max, -1.0));
        Ok(PolarProfile { norm: n.clone(), grid, r_values, r_min, r_max })
    }

    pub fn norm(&self) -> &NormExpr {
        &self.norm
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn r_values(&self) -> &[f64] {
        &self.r_values
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// CSV export: `t, r, phi_minus, phi_plus, smooth_flag` per grid angle.
    pub fn write_csv<W: Write>(&self, out: &mut W, smooth_tol: f64) -> std::io::Result<()> {
        writeln!(out, "t,r,phi_minus,phi_plus,smooth_flag")?;
        for (&t, &r) in self.grid.iter().zip(&self.r_values) {
            let phi = phi_pair(&self.norm, t).expect("dim validated at construction");
            writeln!(
                out,
                "{t},{r},{},{},{}",
                phi.phi_minus,
                phi.phi_plus,
                u8::from(phi.is_smooth(smooth_tol))
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfunc::{g_functional, Side};
    use crate::norms::parse_norm;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn radial_examples() {
        let id = parse_norm("quad([[1,0],[0,1]])").unwrap();
        for t in [0.0, 0.3, 2.0, 5.5] {
            assert_abs_diff_eq!(radial(&id, t).unwrap(), 1.0, epsilon = 1e-15);
        }
        let l1 = parse_norm("lp(1)").unwrap();
        assert_abs_diff_eq!(radial(&l1, FRAC_PI_4).unwrap(), 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        let linf = parse_norm("lp(inf)").unwrap();
        assert_abs_diff_eq!(radial(&linf, FRAC_PI_4).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn sigma_circle_closed_form() {
        // Substituting r = 1 into the inversion gives sigma = pi/2 - (alpha-beta)/2.
        let id = parse_norm("quad([[1,0],[0,1]])").unwrap();
        for (alpha, beta) in [(0.4, 0.1), (1.0, 2.5), (0.0, -1.2), (3.0, 3.9)] {
            let s = sigma(&id, alpha, beta).unwrap();
            assert_abs_diff_eq!(s, FRAC_PI_2 - (alpha - beta) / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sigma_reversal_law() {
        let norms = [
            parse_norm("quad([[3,0],[0,1]])").unwrap(),
            parse_norm("lp(1, w=[2, 1])").unwrap(),
            parse_norm("lp(inf)").unwrap(),
        ];
        for n in &norms {
            for (alpha, beta) in [(0.7, 0.2), (0.1, 1.9), (-0.3, 0.5), (2.0, 4.4)] {
                let lhs = sigma(n, alpha, beta).unwrap() + alpha;
                let rhs = sigma(n, beta, alpha).unwrap() + beta;
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn sigma_at_square_vertex() {
        // Triangle-geometry oracle at the vertex P_{pi/4} = (1, 1) of the
        // sup-norm square: going backwards along the face x = 1 the angle at
        // the vertex between the ray to O and the boundary is pi/4; going
        // forwards along y = 1 it is pi - pi/4.
        let linf = parse_norm("lp(inf)").unwrap();
        let s = sigma(&linf, FRAC_PI_4, 0.0).unwrap();
        assert_abs_diff_eq!(s, FRAC_PI_4, epsilon = 1e-12);
        let s = sigma(&linf, FRAC_PI_4, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(s, 3.0 * FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn sigma_rejects_degenerate_differences() {
        let id = parse_norm("quad([[1,0],[0,1]])").unwrap();
        assert!(sigma(&id, 1.0, 1.0).is_err());
        assert!(sigma(&id, 1.0 + PI, 1.0).is_err());
        assert!(sigma(&id, 5.0, 1.0).is_err());
    }

    #[test]
    fn phi_circle_is_right_angle() {
        let id = parse_norm("quad([[1,0],[0,1]])").unwrap();
        for alpha in [0.0, 0.7, 2.9, 4.4] {
            let p = phi_pair(&id, alpha).unwrap();
            assert_abs_diff_eq!(p.phi_minus, FRAC_PI_2, epsilon = 1e-6);
            assert_abs_diff_eq!(p.phi_plus, FRAC_PI_2, epsilon = 1e-6);
            assert!(p.is_smooth(1e-6));
        }
    }

    #[test]
    fn phi_square_vertex_and_edge() {
        let linf = parse_norm("lp(inf)").unwrap();
        let vertex = phi_pair(&linf, FRAC_PI_4).unwrap();
        assert_abs_diff_eq!(vertex.phi_minus, FRAC_PI_4, epsilon = 1e-6);
        assert_abs_diff_eq!(vertex.phi_plus, 3.0 * FRAC_PI_4, epsilon = 1e-6);
        assert!(!vertex.is_smooth(1e-3));

        let edge = phi_pair(&linf, 0.0).unwrap();
        assert_abs_diff_eq!(edge.phi_minus, FRAC_PI_2, epsilon = 1e-6);
        assert_abs_diff_eq!(edge.phi_plus, FRAC_PI_2, epsilon = 1e-6);
        assert!(edge.is_smooth(1e-6));
        let (value, _) = phi_one_sided(&linf, FRAC_PI_4, Side::Minus).unwrap();
        assert_abs_diff_eq!(value, FRAC_PI_4, epsilon = 1e-6);
    }

    #[test]
    fn phi_ordering_along_the_boundary() {
        // phi-(a) <= phi+(a), and a < b implies phi+(a) + a <= phi-(b) + b.
        let norms = [
            parse_norm("quad([[3,0],[0,1]])").unwrap(),
            parse_norm("lp(1)").unwrap(),
            parse_norm("lp(3)").unwrap(),
        ];
        for n in &norms {
            let mut prev: Option<(f64, PhiPair)> = None;
            for k in 0..40 {
                let alpha = 2.0 * PI * k as f64 / 40.0;
                let p = phi_pair(n, alpha).unwrap();
                assert!(p.phi_minus <= p.phi_plus + 1e-8);
                if let Some((pa, pp)) = prev {
                    assert!(
                        pp.phi_plus + pa <= p.phi_minus + alpha + 1e-8,
                        "ordering violated at {pa} -> {alpha}"
                    );
                }
                prev = Some((alpha, p));
            }
        }
    }

    #[test]
    fn radial_one_sided_slopes_match_phi() {
        // r'(alpha +-) = r(alpha) cot phi+-(alpha).
        let norms = [
            parse_norm("quad([[3,0],[0,1]])").unwrap(),
            parse_norm("lp(inf)").unwrap(),
            parse_norm("lp(3, w=[1, 2])").unwrap(),
        ];
        for n in &norms {
            for alpha in [0.2, 1.1, 2.0, FRAC_PI_4] {
                let p = phi_pair(n, alpha).unwrap();
                let r = radial(n, alpha).unwrap();
                let h = 1e-7;
                let left = (r - radial(n, alpha - h).unwrap()) / h;
                let right = (radial(n, alpha + h).unwrap() - r) / h;
                let tol = p.width * r * 3.0 + 1e-5;
                assert!((left - r / p.phi_minus.tan()).abs() <= tol, "left slope at {alpha}");
                assert!((right - r / p.phi_plus.tan()).abs() <= tol, "right slope at {alpha}");
            }
        }
    }

    #[test]
    fn planar_circle_angle_is_euclidean() {
        let id = parse_norm("quad([[1,0],[0,1]])").unwrap();
        for (alpha, beta) in [(0.3, 1.2), (2.0, 0.4), (5.9, 0.3)] {
            let pair = g_planar(&id, alpha, beta, 1.3, 0.7).unwrap();
            let d = super::reduce_angle(alpha - beta);
            assert_abs_diff_eq!(pair.cos_theta, d.cos(), epsilon = 1e-6);
        }
    }

    #[test]
    fn planar_special_cases() {
        let n = parse_norm("quad([[3,0],[0,1]])").unwrap();
        let r = radial(&n, 0.8).unwrap();
        let same = g_planar(&n, 0.8, 0.8, 2.0, 3.0).unwrap();
        assert_abs_diff_eq!(same.g, 6.0 / (r * r), epsilon = 1e-12);
        assert_eq!(same.tan_half_sq, 0.0);
        assert_eq!(same.cos_theta, 1.0);
        let opposite = g_planar(&n, 0.8, 0.8 + PI, 2.0, 3.0).unwrap();
        assert_abs_diff_eq!(opposite.g, -6.0 / (r * r), epsilon = 1e-12);
        assert_eq!(opposite.cos_theta, -1.0);
        assert_eq!(opposite.tan_half_sq, f64::INFINITY);
    }

    #[test]
    fn planar_matches_direct_g() {
        let norms =
            [parse_norm("quad([[3,0],[0,1]])").unwrap(), parse_norm("lp(3)").unwrap()];
        for n in &norms {
            for (alpha, beta, a, b) in
                [(0.3, 1.0, 1.0, 1.0), (2.2, 0.9, 0.5, 2.0), (4.0, 5.1, 3.0, 0.25)]
            {
                let planar = g_planar(n, alpha, beta, a, b).unwrap();
                let x = crate::norms::Vector::new(vec![a * alpha.cos(), a * alpha.sin()]).unwrap();
                let y = crate::norms::Vector::new(vec![b * beta.cos(), b * beta.sin()]).unwrap();
                let direct = g_functional(n, &x, &y).unwrap();
                let scale = a * b / (radial(n, alpha).unwrap() * radial(n, beta).unwrap());
                assert!(
                    (planar.g - direct.g).abs() <= 1e-6 * scale,
                    "planar {} vs direct {} (scale {scale})",
                    planar.g,
                    direct.g
                );
                assert_abs_diff_eq!(planar.cos_theta, direct.cos_theta, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn profile_is_pi_periodic_and_positive() {
        let n = parse_norm("max(quad([[3,0],[0,1]]),quad([[1,0],[0,3]]))").unwrap();
        let profile = PolarProfile::sample(&n, 360).unwrap();
        assert!(profile.r_min() > 0.0);
        assert!(profile.r_min() <= profile.r_max());
        let half = profile.grid().len() / 2;
        for i in 0..half {
            assert_abs_diff_eq!(
                profile.r_values()[i],
                profile.r_values()[i + half],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn profile_extremes_for_ellipse() {
        let n = parse_norm("quad([[3,0],[0,1]])").unwrap();
        let profile = PolarProfile::sample(&n, 720).unwrap();
        assert_abs_diff_eq!(profile.r_min(), 1.0 / 3f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(profile.r_max(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn csv_has_expected_columns() {
        let id = parse_norm("quad([[1,0],[0,1]])").unwrap();
        let profile = PolarProfile::sample(&id, 16).unwrap();
        let mut buf = Vec::new();
        profile.write_csv(&mut buf, 1e-6).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,r,phi_minus,phi_plus,smooth_flag");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 5);
        assert_eq!(first[0], "0");
        assert_eq!(first[1], "1");
        assert_eq!(first[4], "1");
    }
}
