//! One-sided g-functionals and norm angles.
//!
//! For a norm `||.||` and vectors `x != 0`, `y`, the difference quotient
//! `t -> (||x + t y|| - ||x||) / t` is non-decreasing on the punctured line,
//! so both one-sided limits at 0 exist. Scaled by `||x||` they give the
//! one-sided functionals `g-` and `g+`; their average `g` defines the norm
//! angle `theta(x, y)` through `cos theta = g / (||x|| ||y||)`.
//!
//! Closed forms are used for `quad`, weighted `lp`, and `sum`/`max`/`scale`
//! combinations of those; everything else falls back to a monotone numeric
//! bracket on the schedule `t_k = t0 * 4^-k`.

use crate::error::{Error, Result};
use crate::norms::{NormExpr, Vector};

/// Which one-sided limit of the difference quotient is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// How a [`GPair`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Numeric,
}

/// Result of a g-functional query.
///
/// Invariants maintained by construction:
/// - `g_minus <= g_plus` (up to the numeric bracket),
/// - `g = (g_minus + g_plus) / 2` exactly as stored,
/// - `cos_theta` is clamped to `[-1, 1]`; the clamped amount is reported in
///   `cos_clamp_excess`,
/// - `tan_half_sq = (1 - cos_theta) / (1 + cos_theta)`, `+inf` at `cos_theta = -1`,
///   computed through cancellation-free forms on analytic paths.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GPair {
    pub g_minus: f64,
    pub g_plus: f64,
    pub g: f64,
    pub cos_theta: f64,
    #[serde(serialize_with = "crate::equiv::serialize_extended")]
    pub tan_half_sq: f64,
    pub bracket_width: f64,
    pub method: Method,
    /// Amount trimmed from `|g| / scale` when it exceeded 1 (floating error
    /// near collinear pairs); 0 whenever no clamping occurred.
    pub cos_clamp_excess: f64,
}

impl GPair {
    fn assemble(
        g_minus: f64,
        g_plus: f64,
        scale: f64,
        stable: Option<(f64, f64)>,
        bracket_width: f64,
        method: Method,
    ) -> GPair {
        let g = 0.5 * (g_minus + g_plus);
        let raw = g / scale;
        let cos_clamp_excess = (raw.abs() - 1.0).max(0.0);
        let (a, b, cos_theta) = match stable {
            Some((a, b)) => {
                let (a, b) = (a.max(0.0), b.max(0.0));
                (a, b, (0.5 * (b - a)).clamp(-1.0, 1.0))
            }
            None => {
                let c = raw.clamp(-1.0, 1.0);
                (1.0 - c, 1.0 + c, c)
            }
        };
        let tan_half_sq = if b <= 0.0 { f64::INFINITY } else { a / b };
        GPair {
            g_minus,
            g_plus,
            g,
            cos_theta,
            tan_half_sq,
            bracket_width,
            method,
            cos_clamp_excess,
        }
    }

    /// Gap between the one-sided values plus any numeric bracket slack;
    /// the pair `(x, y)` is smooth for the norm when this is small
    /// relative to `||x|| ||y||`.
    pub fn nonsmoothness(&self) -> f64 {
        (self.g_plus - self.g_minus).max(0.0) + self.bracket_width
    }
}

/// Controls for the numeric limit schedule.
#[derive(Debug, Clone)]
pub struct GOptions {
    /// `t0 = t0_factor * ||x|| / ||y||` starts the schedule; default 0.1.
    pub t0_factor: f64,
    /// Steps `t_k = t0 * 4^-k`, `k <= max_steps`; default 24.
    pub max_steps: u32,
    /// Early stop once the bracket width falls below this times `||y||`.
    pub target_rel_width: f64,
    /// Skip analytic fast paths (used to cross-check them).
    pub force_numeric: bool,
}

impl Default for GOptions {
    fn default() -> Self {
        GOptions { t0_factor: 0.1, max_steps: 24, target_rel_width: 1e-7, force_numeric: false }
    }
}

/// Relative tolerance for argmax ties in `max`-type norms.
const TIE_TOL: f64 = 1e-12;
/// Relative tolerance for the collinearity shortcut.
const COLLINEAR_TOL: f64 = 1e-14;

/// `(||x + t y|| - ||x||) / t`.
pub fn diff_quotient(n: &NormExpr, x: &Vector, y: &Vector, t: f64) -> Result<f64> {
    if x.is_zero() {
        return Err(Error::ZeroVector("diff_quotient requires x != 0"));
    }
    if t == 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("diff_quotient requires nonzero finite t, got {t}")));
    }
    n.check_dim(x)?;
    if x.dim() != y.dim() {
        return Err(Error::DimMismatch { expected: x.dim(), got: y.dim() });
    }
    let shifted: Vec<f64> = x.iter().zip(y.iter()).map(|(xi, yi)| xi + t * yi).collect();
    Ok((n.eval_unchecked(&shifted) - n.eval_unchecked(x)) / t)
}

/// If `y = c x` within tolerance, return `c`.
fn collinear_factor(x: &[f64], y: &[f64]) -> Option<f64> {
    let mx = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let my = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if my == 0.0 {
        return Some(0.0);
    }
    let tol = COLLINEAR_TOL * mx * my;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            if (x[i] * y[j] - x[j] * y[i]).abs() > tol {
                return None;
            }
        }
    }
    let k = (0..x.len())
        .max_by(|&i, &j| x[i].abs().partial_cmp(&x[j].abs()).unwrap())
        .expect("nonempty");
    Some(y[k] / x[k])
}

/// Norm value at `x` together with both one-sided derivatives of
/// `t -> ||x + t y||` at 0, where a closed form exists for the whole tree.
fn analytic_value_derivs(n: &NormExpr, x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    match n {
        NormExpr::Lp { p, weights } => {
            let w = |i: usize| weights.as_ref().map_or(1.0, |w| w[i]);
            if *p == 1.0 {
                let mut nx = 0.0;
                let mut base = 0.0;
                let mut off = 0.0;
                for i in 0..x.len() {
                    nx += w(i) * x[i].abs();
                    if x[i] != 0.0 {
                        base += w(i) * x[i].signum() * y[i];
                    } else {
                        off += w(i) * y[i].abs();
                    }
                }
                Some((nx, base - off, base + off))
            } else if p.is_infinite() {
                let nx = (0..x.len()).map(|i| w(i) * x[i].abs()).fold(0.0f64, f64::max);
                let mut d_minus = f64::INFINITY;
                let mut d_plus = f64::NEG_INFINITY;
                for i in 0..x.len() {
                    if w(i) * x[i].abs() >= nx * (1.0 - TIE_TOL) {
                        let slope = w(i) * x[i].signum() * y[i];
                        d_minus = d_minus.min(slope);
                        d_plus = d_plus.max(slope);
                    }
                }
                Some((nx, d_minus, d_plus))
            } else {
                let nx = n.eval_unchecked(x);
                let mut s = 0.0;
                for i in 0..x.len() {
                    if x[i] != 0.0 {
                        s += w(i) * x[i].abs().powf(p - 1.0) * x[i].signum() * y[i];
                    }
                }
                let d = nx.powf(1.0 - p) * s;
                Some((nx, d, d))
            }
        }
        NormExpr::Quad { matrix } => {
            let nx = matrix.norm(x);
            let d = matrix.pairing(x, y) / nx;
            Some((nx, d, d))
        }
        NormExpr::Sum { children } => {
            let mut nx = 0.0;
            let mut dm = 0.0;
            let mut dp = 0.0;
            for c in children {
                let (v, m, p) = analytic_value_derivs(c, x, y)?;
                nx += v;
                dm += m;
                dp += p;
            }
            Some((nx, dm, dp))
        }
        NormExpr::Max { children } => {
            let parts: Vec<(f64, f64, f64)> = children
                .iter()
                .map(|c| analytic_value_derivs(c, x, y))
                .collect::<Option<_>>()?;
            let nx = parts.iter().map(|p| p.0).fold(0.0f64, f64::max);
            let mut d_minus = f64::INFINITY;
            let mut d_plus = f64::NEG_INFINITY;
            for (v, m, p) in &parts {
                if *v >= nx * (1.0 - TIE_TOL) {
                    d_minus = d_minus.min(*m);
                    d_plus = d_plus.max(*p);
                }
            }
            Some((nx, d_minus, d_plus))
        }
        NormExpr::Scale { factor, child } => {
            let (v, m, p) = analytic_value_derivs(child, x, y)?;
            Some((factor * v, factor * m, factor * p))
        }
        NormExpr::Polygon { .. } => None,
        NormExpr::Dual { child } => {
            let resolved = crate::norms::dualize(child).ok()?;
            analytic_value_derivs(&resolved, x, y)
        }
    }
}

/// Cancellation-free `(1 - cos theta, 1 + cos theta)`.
///
/// Each arm rewrites the two quantities as sums of non-negative terms
/// (difference/sum vectors for quadratic norms, per-coordinate convexity
/// gaps for `lp`), so tiny angles survive with full relative precision.
fn stable_ab(n: &NormExpr, x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    match n {
        NormExpr::Quad { matrix } => {
            let nx = matrix.norm(x);
            let ny = matrix.norm(y);
            let dim = x.len();
            let mut diff = vec![0.0; dim];
            let mut sum = vec![0.0; dim];
            for i in 0..dim {
                let xh = x[i] / nx;
                let yh = y[i] / ny;
                diff[i] = xh - yh;
                sum[i] = xh + yh;
            }
            let a = 0.5 * matrix.pairing(&diff, &diff).max(0.0);
            let b = 0.5 * matrix.pairing(&sum, &sum).max(0.0);
            Some((a, b))
        }
        NormExpr::Lp { p, weights } => {
            let w = |i: usize| weights.as_ref().map_or(1.0, |w| w[i]);
            let nx = n.eval_unchecked(x);
            let ny = n.eval_unchecked(y);
            if *p == 1.0 {
                let mut a = 0.0;
                let mut b = 0.0;
                for i in 0..x.len() {
                    let yh = y[i] / ny;
                    if x[i] != 0.0 {
                        let s = x[i].signum() * yh;
                        a += w(i) * (yh.abs() - s).max(0.0);
                        b += w(i) * (yh.abs() + s).max(0.0);
                    } else {
                        a += w(i) * yh.abs();
                        b += w(i) * yh.abs();
                    }
                }
                Some((a, b))
            } else if p.is_infinite() {
                None
            } else {
                // Per-coordinate Young gap: |a|^p/q + |b|^p/p - |a|^(p-1) sgn(a) b >= 0.
                let q = p / (p - 1.0);
                let mut a = 0.0;
                let mut b = 0.0;
                for i in 0..x.len() {
                    let xh = x[i] / nx;
                    let yh = y[i] / ny;
                    let xa = xh.abs().powf(*p) / q;
                    let grad = xh.abs().powf(p - 1.0) * xh.signum();
                    let yp = yh.abs().powf(*p) / p;
                    a += w(i) * (xa + yp - grad * yh).max(0.0);
                    b += w(i) * (xa + yp + grad * yh).max(0.0);
                }
                Some((a, b))
            }
        }
        NormExpr::Sum { children } => {
            let ny_total: f64 = children.iter().map(|c| c.eval_unchecked(y)).sum();
            let mut a = 0.0;
            let mut b = 0.0;
            for c in children {
                let (ca, cb) = stable_ab(c, x, y)?;
                let frac = c.eval_unchecked(y) / ny_total;
                a += frac * ca;
                b += frac * cb;
            }
            Some((a, b))
        }
        NormExpr::Max { children } => {
            // Strict-leader delegation; ties fall back to the plain path.
            let values: Vec<f64> = children.iter().map(|c| c.eval_unchecked(x)).collect();
            let nx = values.iter().fold(0.0f64, |m, &v| m.max(v));
            let mut leader = None;
            for (j, &v) in values.iter().enumerate() {
                if v >= nx * (1.0 - TIE_TOL) {
                    if leader.is_some() {
                        return None;
                    }
                    leader = Some(j);
                }
            }
            let j = leader?;
            let (ca, cb) = stable_ab(&children[j], x, y)?;
            let ny = children.iter().map(|c| c.eval_unchecked(y)).fold(0.0f64, f64::max);
            let ny_j = children[j].eval_unchecked(y);
            let excess = (ny - ny_j).max(0.0);
            Some(((excess + ny_j * ca) / ny, (excess + ny_j * cb) / ny))
        }
        NormExpr::Scale { child, .. } => stable_ab(child, x, y),
        NormExpr::Polygon { .. } => None,
        NormExpr::Dual { child } => {
            let resolved = crate::norms::dualize(child).ok()?;
            stable_ab(&resolved, x, y)
        }
    }
}

/// Certified envelope for both one-sided derivatives of `t -> ||x + t y||`.
///
/// Quotients at `t > 0` decrease to the right limit and at `t < 0` increase
/// to the left limit, so running min/max envelopes bracket `[d-, d+]` from
/// the outside. Descent stops at the cancellation floor where evaluating
/// the quotient stops being meaningful.
fn numeric_derivs(n: &NormExpr, x: &[f64], y: &[f64], opts: &GOptions) -> (f64, f64, f64) {
    let nx = n.eval_unchecked(x);
    let ny = n.eval_unchecked(y);
    if ny == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let t0 = opts.t0_factor * nx / ny;
    let target_w = opts.target_rel_width * ny;
    let t_floor = 64.0 * f64::EPSILON * nx / target_w;
    let mut shifted = vec![0.0; x.len()];
    let mut quotient = |t: f64| {
        for i in 0..x.len() {
            shifted[i] = x[i] + t * y[i];
        }
        (n.eval_unchecked(&shifted) - nx) / t
    };
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut t = t0;
    for k in 0..=opts.max_steps {
        if k > 0 && t < t_floor {
            break;
        }
        upper = upper.min(quotient(t));
        lower = lower.max(quotient(-t));
        if upper - lower <= target_w {
            break;
        }
        t *= 0.25;
    }
    (lower, upper, (upper - lower).max(0.0))
}

fn check_pair(n: &NormExpr, x: &Vector, y: &Vector) -> Result<()> {
    n.check_dim(x)?;
    if x.dim() != y.dim() {
        return Err(Error::DimMismatch { expected: x.dim(), got: y.dim() });
    }
    Ok(())
}

/// One-sided functional `g+` or `g-`, with a certified error bound
/// (0 on analytic paths, the residual bracket width on numeric ones).
pub fn g_one_sided(n: &NormExpr, x: &Vector, y: &Vector, side: Side) -> Result<(f64, f64)> {
    g_one_sided_with(n, x, y, side, &GOptions::default())
}

pub fn g_one_sided_with(
    n: &NormExpr,
    x: &Vector,
    y: &Vector,
    side: Side,
    opts: &GOptions,
) -> Result<(f64, f64)> {
    if x.is_zero() {
        return Err(Error::ZeroVector("g functional requires x != 0"));
    }
    check_pair(n, x, y)?;
    let nx = n.eval_unchecked(x);
    if let Some(c) = collinear_factor(x, y) {
        return Ok((c * nx * nx, 0.0));
    }
    if !opts.force_numeric {
        if let Some((nx, d_minus, d_plus)) = analytic_value_derivs(n, x, y) {
            let d = if side == Side::Plus { d_plus } else { d_minus };
            return Ok((nx * d, 0.0));
        }
    }
    let (lower, upper, width) = numeric_derivs(n, x, y, opts);
    let d = if side == Side::Plus { upper } else { lower };
    Ok((nx * d, nx * width))
}

/// Full g-functional query: `g-`, `g+`, `g`, `cos theta`, `tan^2(theta/2)`.
pub fn g_functional(n: &NormExpr, x: &Vector, y: &Vector) -> Result<GPair> {
    g_functional_with(n, x, y, &GOptions::default())
}

pub fn g_functional_with(
    n: &NormExpr,
    x: &Vector,
    y: &Vector,
    opts: &GOptions,
) -> Result<GPair> {
    if x.is_zero() || y.is_zero() {
        return Err(Error::ZeroVector("g functional requires x != 0 and y != 0"));
    }
    check_pair(n, x, y)?;
    let nx = n.eval_unchecked(x);
    let ny = n.eval_unchecked(y);
    let scale = nx * ny;
    // Collinear inputs short-circuit: theta is exactly 0 or pi.
    if let Some(c) = collinear_factor(x, y) {
        let g = c * nx * nx;
        let stable = if c > 0.0 { (0.0, 2.0) } else { (2.0, 0.0) };
        return Ok(GPair::assemble(g, g, scale, Some(stable), 0.0, Method::Analytic));
    }
    if !opts.force_numeric {
        if let Some((nx, d_minus, d_plus)) = analytic_value_derivs(n, x, y) {
            let stable = stable_ab(n, x, y);
            return Ok(GPair::assemble(
                nx * d_minus,
                nx * d_plus,
                scale,
                stable,
                0.0,
                Method::Analytic,
            ));
        }
    }
    let (lower, upper, width) = numeric_derivs(n, x, y, opts);
    Ok(GPair::assemble(nx * lower, nx * upper, scale, None, nx * width, Method::Numeric))
}

/// Norm angle `theta(x, y)` in `[0, pi]` and `tan(theta / 2)`, with
/// `tan(pi / 2) = +inf` for opposite-pointing pairs.
pub fn norm_angle(n: &NormExpr, x: &Vector, y: &Vector) -> Result<(f64, f64)> {
    let pair = g_functional(n, x, y)?;
    Ok((pair.cos_theta.acos(), pair.tan_half_sq.sqrt()))
}
