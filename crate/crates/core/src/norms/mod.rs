//! Norm expressions on `R^n`: construction, evaluation and duals.
//!
//! A [`NormExpr`] is a symbolic description of a norm built from weighted
//! `l^p` norms, inner-product (quadratic-form) norms, sums and maxima of
//! norms, positive scalings, polygonal gauges in the plane, and closed-form
//! duals. Expressions are immutable after construction and evaluation is
//! pure, so values can be shared freely across threads.

mod parse;

pub use parse::parse_norm;

use crate::error::{Error, Result};
use std::fmt;

/// A point of `R^n` with finite coordinates, `n >= 1`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct Vector {
    coords: Vec<f64>,
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidNorm("vector must have dimension >= 1".into()));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidNorm(format!("non-finite coordinate {bad}")));
        }
        Ok(Vector { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }
}

impl std::ops::Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.coords
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;
    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Vector::new(coords)
    }
}

/// Symmetric positive-definite matrix backing a `quad(...)` norm.
///
/// Stored row-major after symmetrization; definiteness is established at
/// construction by attempting a Cholesky factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

/// Relative asymmetry tolerated before a quad matrix is rejected.
const SYM_TOL: f64 = 1e-12;

impl SymMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidNorm("quad matrix must be non-empty".into()));
        }
        for row in &rows {
            if row.len() != dim {
                return Err(Error::InvalidNorm(format!(
                    "quad matrix must be square, row has {} entries, expected {dim}",
                    row.len()
                )));
            }
        }
        let mut scale: f64 = 0.0;
        for row in &rows {
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::InvalidNorm(format!("non-finite matrix entry {v}")));
                }
                scale = scale.max(v.abs());
            }
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (rows[i][j] - rows[j][i]).abs() > SYM_TOL * scale.max(1.0) {
                    return Err(Error::InvalidNorm(format!(
                        "matrix not symmetric at ({i},{j}): {} vs {}",
                        rows[i][j], rows[j][i]
                    )));
                }
            }
        }
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = 0.5 * (rows[i][j] + rows[j][i]);
            }
        }
        let m = SymMatrix { dim, data };
        if m.cholesky().is_none() {
            return Err(Error::InvalidNorm(
                "matrix is not positive definite (factorization failed)".into(),
            ));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Bilinear form `x^T A y`.
    pub fn pairing(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.data[i * n + j] * y[j];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// `sqrt(x^T A x)`, clamping the tiny negative values rounding can produce.
    pub fn norm(&self, x: &[f64]) -> f64 {
        self.pairing(x, x).max(0.0).sqrt()
    }

    fn to_na(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub(crate) fn cholesky(&self) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
        self.to_na().cholesky()
    }

    /// Inverse via the Cholesky factor (valid because construction proved SPD).
    pub fn inverse(&self) -> SymMatrix {
        let inv = self
            .cholesky()
            .expect("SPD invariant established at construction")
            .inverse();
        let mut data = vec![0.0; self.dim * self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                data[i * self.dim + j] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            }
        }
        SymMatrix { dim: self.dim, data }
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let mut rows = vec![vec![0.0; dim]; dim];
        for (i, &d) in diag.iter().enumerate() {
            rows[i][i] = d;
        }
        SymMatrix::new(rows)
    }
}

/// Exponent of an `lp` norm: a real in `[1, inf]`, where `inf` is the
/// distinguished grammar token, not a parsed float.
pub const P_INF: f64 = f64::INFINITY;

/// Symbolic norm on `R^n`.
///
/// Use the checked constructors ([`NormExpr::lp`], [`NormExpr::quad`], ...)
/// or [`parse_norm`]; both enforce the structural invariants (p >= 1,
/// positive weights, SPD matrix, symmetric convex polygon, matching child
/// dimensions), so a constructed value is always a genuine norm.
#[derive(Debug, Clone, PartialEq)]
pub enum NormExpr {
    /// `(sum_i w_i |x_i|^p)^(1/p)` for finite p; `max_i w_i |x_i|` for p = inf.
    Lp { p: f64, weights: Option<Vec<f64>> },
    /// `sqrt(x^T A x)` for SPD `A`.
    Quad { matrix: SymMatrix },
    /// Sum of two or more norms of equal dimension.
    Sum { children: Vec<NormExpr> },
    /// Pointwise maximum of two or more norms of equal dimension.
    Max { children: Vec<NormExpr> },
    /// `c * ||x||` for `c > 0`.
    Scale { factor: f64, child: Box<NormExpr> },
    /// Minkowski gauge of an origin-symmetric convex polygon (dim 2 only).
    /// Vertices are stored sorted by polar angle, counter-clockwise.
    Polygon { vertices: Vec<[f64; 2]> },
    /// Dual norm `sup { <x,y> : ||y|| <= 1 }` of a dualizable child.
    Dual { child: Box<NormExpr> },
}

impl NormExpr {
    pub fn lp(p: f64, weights: Option<Vec<f64>>) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidNorm(format!("lp exponent must satisfy p >= 1, got {p}")));
        }
        if let Some(w) = &weights {
            if w.is_empty() {
                return Err(Error::InvalidNorm("lp weight list must be non-empty".into()));
            }
            if let Some(bad) = w.iter().find(|&&wi| !(wi > 0.0) || !wi.is_finite()) {
                return Err(Error::InvalidNorm(format!("lp weights must be positive, got {bad}")));
            }
        }
        Ok(NormExpr::Lp { p, weights })
    }

    pub fn quad(rows: Vec<Vec<f64>>) -> Result<Self> {
        Ok(NormExpr::Quad { matrix: SymMatrix::new(rows)? })
    }

    pub fn sum(children: Vec<NormExpr>) -> Result<Self> {
        Self::check_children("sum", &children)?;
        Ok(NormExpr::Sum { children })
    }

    pub fn max(children: Vec<NormExpr>) -> Result<Self> {
        Self::check_children("max", &children)?;
        Ok(NormExpr::Max { children })
    }

    pub fn scale(factor: f64, child: NormExpr) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::InvalidNorm(format!("scale factor must be positive, got {factor}")));
        }
        Ok(NormExpr::Scale { factor, child: Box::new(child) })
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        Ok(NormExpr::Polygon { vertices: validate_polygon(vertices)? })
    }

    pub fn dual(child: NormExpr) -> Result<Self> {
        // Reject non-dualizable children up front rather than at evaluation.
        dualize(&child)?;
        Ok(NormExpr::Dual { child: Box::new(child) })
    }

    fn check_children(kind: &str, children: &[NormExpr]) -> Result<()> {
        if children.len() < 2 {
            return Err(Error::InvalidNorm(format!("{kind} needs at least 2 children")));
        }
        let mut dim: Option<usize> = None;
        for c in children {
            match (dim, c.dim()) {
                (Some(d), Some(cd)) if d != cd => {
                    return Err(Error::InvalidNorm(format!(
                        "{kind} children disagree on dimension: {d} vs {cd}"
                    )));
                }
                (None, Some(cd)) => dim = Some(cd),
                _ => {}
            }
        }
        Ok(())
    }

    /// Dimension of the space the norm acts on. `None` means the expression
    /// is dimension-polymorphic (an unweighted `lp`), usable in any `R^n`.
    pub fn dim(&self) -> Option<usize> {
        match self {
            NormExpr::Lp { weights, .. } => weights.as_ref().map(|w| w.len()),
            NormExpr::Quad { matrix } => Some(matrix.dim()),
            NormExpr::Sum { children } | NormExpr::Max { children } => {
                children.iter().find_map(|c| c.dim())
            }
            NormExpr::Scale { child, .. } => child.dim(),
            NormExpr::Polygon { .. } => Some(2),
            NormExpr::Dual { child } => child.dim(),
        }
    }

    /// Check that `x` is acceptable for this norm.
    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        match self.dim() {
            Some(d) if d != x.len() => Err(Error::DimMismatch { expected: d, got: x.len() }),
            _ => Ok(()),
        }
    }

    /// `||x||` without the dimension precheck; used by hot paths after one
    /// up-front `check_dim`.
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            NormExpr::Lp { p, weights } => lp_eval(*p, weights.as_deref(), x),
            NormExpr::Quad { matrix } => matrix.norm(x),
            NormExpr::Sum { children } => children.iter().map(|c| c.eval_unchecked(x)).sum(),
            NormExpr::Max { children } => children
                .iter()
                .map(|c| c.eval_unchecked(x))
                .fold(0.0f64, f64::max),
            NormExpr::Scale { factor, child } => factor * child.eval_unchecked(x),
            NormExpr::Polygon { vertices } => polygon_gauge(vertices, x),
            NormExpr::Dual { child } => dualize(child)
                .expect("dualizability established at construction")
                .eval_unchecked(x),
        }
    }
}

/// Evaluate `||x||_n`.
pub fn evaluate(n: &NormExpr, x: &Vector) -> Result<f64> {
    n.check_dim(x)?;
    Ok(n.eval_unchecked(x))
}

fn lp_eval(p: f64, weights: Option<&[f64]>, x: &[f64]) -> f64 {
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    if p.is_infinite() {
        return (0..x.len()).map(|i| w(i) * x[i].abs()).fold(0.0f64, f64::max);
    }
    if p == 1.0 {
        return (0..x.len()).map(|i| w(i) * x[i].abs()).sum();
    }
    // Factor out the largest term so large p cannot overflow.
    let m = (0..x.len()).map(|i| x[i].abs()).fold(0.0f64, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let sum: f64 = (0..x.len()).map(|i| w(i) * (x[i].abs() / m).powf(p)).sum();
    m * sum.powf(1.0 / p)
}

/// Gauge of a convex origin-symmetric polygon: the max over edges of the
/// edge functional, each edge contributing `cross(w - v, x)`-style terms.
fn polygon_gauge(vertices: &[[f64; 2]], x: &[f64]) -> f64 {
    let mut gauge = 0.0f64;
    let k = vertices.len();
    for i in 0..k {
        let v = vertices[i];
        let w = vertices[(i + 1) % k];
        // Outward normal (dy, -dx); c = <n, v> > 0 because the origin is interior.
        let n = [w[1] - v[1], v[0] - w[0]];
        let c = n[0] * v[0] + n[1] * v[1];
        gauge = gauge.max((n[0] * x[0] + n[1] * x[1]) / c);
    }
    gauge
}

/// Tolerance for the origin-symmetry check on polygon vertex sets.
const POLY_SYM_TOL: f64 = 1e-9;

fn validate_polygon(vertices: Vec<[f64; 2]>) -> Result<Vec<[f64; 2]>> {
    if vertices.len() < 4 {
        return Err(Error::InvalidNorm(format!(
            "polygon needs at least 4 vertices, got {}",
            vertices.len()
        )));
    }
    if vertices.len() % 2 != 0 {
        return Err(Error::InvalidNorm(
            "origin-symmetric polygon must have an even vertex count".into(),
        ));
    }
    let mut scale = 0.0f64;
    for v in &vertices {
        if !v[0].is_finite() || !v[1].is_finite() {
            return Err(Error::InvalidNorm("non-finite polygon vertex".into()));
        }
        scale = scale.max(v[0].abs()).max(v[1].abs());
    }
    if scale == 0.0 {
        return Err(Error::InvalidNorm("polygon vertices are all zero".into()));
    }
    // Every vertex needs its antipode present.
    for v in &vertices {
        let ok = vertices
            .iter()
            .any(|u| (u[0] + v[0]).abs() <= POLY_SYM_TOL && (u[1] + v[1]).abs() <= POLY_SYM_TOL);
        if !ok {
            return Err(Error::InvalidNorm(format!(
                "polygon is not origin-symmetric: no antipode for ({}, {})",
                v[0], v[1]
            )));
        }
    }
    let mut sorted = vertices;
    sorted.sort_by(|a, b| {
        let ta = a[1].atan2(a[0]);
        let tb = b[1].atan2(b[0]);
        ta.partial_cmp(&tb).expect("finite angles")
    });
    // Distinct polar angles, strict convexity at each corner, origin interior.
    let k = sorted.len();
    for i in 0..k {
        let a = sorted[i];
        let b = sorted[(i + 1) % k];
        let c = sorted[(i + 2) % k];
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross <= 1e-12 * scale * scale {
            return Err(Error::InvalidNorm(
                "polygon vertices are not in strictly convex position".into(),
            ));
        }
        let edge_c = (b[1] - a[1]) * -a[0] + (a[0] - b[0]) * -a[1];
        // <outward normal, origin - a> must be negative: origin strictly inside.
        if edge_c >= -1e-12 * scale * scale {
            return Err(Error::InvalidNorm("origin is not strictly interior to polygon".into()));
        }
    }
    Ok(sorted)
}

/// Closed-form dual norm.
///
/// Supported: `lp` (conjugate exponent, reciprocal-power weights), `quad`
/// (inverse matrix), `polygon` (polar polygon), `scale` of a dualizable
/// child, and `dual` itself (the bidual is the original). `sum` and `max`
/// have no closed-form dual here and are rejected.
pub fn dualize(n: &NormExpr) -> Result<NormExpr> {
    match n {
        NormExpr::Lp { p, weights } => {
            let (q, wq) = if p.is_infinite() {
                (1.0, weights.as_ref().map(|w| w.iter().map(|wi| 1.0 / wi).collect()))
            } else if *p == 1.0 {
                (P_INF, weights.as_ref().map(|w| w.iter().map(|wi| 1.0 / wi).collect()))
            } else {
                let q = p / (p - 1.0);
                (q, weights.as_ref().map(|w| w.iter().map(|wi| wi.powf(-q / p)).collect()))
            };
            NormExpr::lp(q, wq)
        }
        NormExpr::Quad { matrix } => Ok(NormExpr::Quad { matrix: matrix.inverse() }),
        NormExpr::Polygon { vertices } => {
            // Polar polygon: one vertex per edge, solving <u, v> = <u, w> = 1.
            let k = vertices.len();
            let mut polar = Vec::with_capacity(k);
            for i in 0..k {
                let v = vertices[i];
                let w = vertices[(i + 1) % k];
                let det = v[0] * w[1] - v[1] * w[0];
                polar.push([(w[1] - v[1]) / det, (v[0] - w[0]) / det]);
            }
            NormExpr::polygon(polar)
        }
        NormExpr::Scale { factor, child } => NormExpr::scale(1.0 / factor, dualize(child)?),
        NormExpr::Dual { child } => Ok((**child).clone()),
        NormExpr::Sum { .. } => Err(Error::NotDualizable("sum of norms".into())),
        NormExpr::Max { .. } => Err(Error::NotDualizable("max of norms".into())),
    }
}

fn fmt_f64(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v == f64::INFINITY {
        write!(f, "inf")
    } else {
        write!(f, "{v}")
    }
}

/// Canonical printer. Printing then re-parsing reproduces the expression
/// exactly; equality of printed forms is the crate's notion of spec equality.
impl fmt::Display for NormExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormExpr::Lp { p, weights } => {
                write!(f, "lp(")?;
                fmt_f64(*p, f)?;
                if let Some(w) = weights {
                    write!(f, ", w=[")?;
                    for (i, wi) in w.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        fmt_f64(*wi, f)?;
                    }
                    write!(f, "]")?;
                }
                write!(f, ")")
            }
            NormExpr::Quad { matrix } => {
                write!(f, "quad([")?;
                for i in 0..matrix.dim() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "[")?;
                    for j in 0..matrix.dim() {
                        if j > 0 {
                            write!(f, ", ")?;
                        }
                        fmt_f64(matrix.entry(i, j), f)?;
                    }
                    write!(f, "]")?;
                }
                write!(f, "])")
            }
            NormExpr::Sum { children } => fmt_children(f, "sum", children),
            NormExpr::Max { children } => fmt_children(f, "max", children),
            NormExpr::Scale { factor, child } => {
                write!(f, "scale(")?;
                fmt_f64(*factor, f)?;
                write!(f, ", {child})")
            }
            NormExpr::Polygon { vertices } => {
                write!(f, "polygon([")?;
                for (i, v) in vertices.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "[")?;
                    fmt_f64(v[0], f)?;
                    write!(f, ", ")?;
                    fmt_f64(v[1], f)?;
                    write!(f, "]")?;
                }
                write!(f, "])")
            }
            NormExpr::Dual { child } => write!(f, "dual({child})"),
        }
    }
}

fn fmt_children(f: &mut fmt::Formatter<'_>, name: &str, children: &[NormExpr]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, c) in children.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{c}")?;
    }
    write!(f, ")")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(coords: &[f64]) -> Vector {
        Vector::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn weighted_l1_matches_closed_form() {
        let n = NormExpr::lp(1.0, Some(vec![2.0, 1.0])).unwrap();
        assert_eq!(evaluate(&n, &v(&[1.0, 1.0])).unwrap(), 3.0);
        assert_eq!(evaluate(&n, &v(&[-1.0, 0.5])).unwrap(), 2.5);
    }

    #[test]
    fn any_norm_vanishes_at_origin() {
        let exprs = [
            NormExpr::lp(1.5, None).unwrap(),
            NormExpr::quad(vec![vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            NormExpr::polygon(vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]).unwrap(),
        ];
        for n in &exprs {
            assert_eq!(evaluate(n, &v(&[0.0, 0.0])).unwrap(), 0.0);
        }
    }

    #[test]
    fn diamond_polygon_equals_l1_gauge() {
        // Oracle: the polygon with vertices (+-1,0),(0,+-1) is the l1 unit ball.
        let poly =
            NormExpr::polygon(vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]).unwrap();
        let l1 = NormExpr::lp(1.0, None).unwrap();
        assert!((evaluate(&poly, &v(&[0.3, 0.2])).unwrap() - 0.5).abs() < 1e-15);
        for &(a, b) in &[(0.7, -0.4), (-2.0, 1.0), (0.05, 0.0), (3.0, 3.0)] {
            let x = v(&[a, b]);
            let d = evaluate(&poly, &x).unwrap() - evaluate(&l1, &x).unwrap();
            assert!(d.abs() < 1e-12, "gauge mismatch at ({a},{b}): {d}");
        }
    }

    #[test]
    fn dual_of_weighted_l1_is_weighted_linf() {
        let n = NormExpr::lp(1.0, Some(vec![2.0, 1.0])).unwrap();
        let d = dualize(&n).unwrap();
        assert_eq!(d.to_string(), "lp(inf, w=[0.5, 1])");
        // max(|x|/2, |y|) at a few points
        assert_eq!(evaluate(&d, &v(&[4.0, 1.0])).unwrap(), 2.0);
        assert_eq!(evaluate(&d, &v(&[1.0, 1.0])).unwrap(), 1.0);
    }

    #[test]
    fn euclidean_norm_is_self_dual() {
        let id = NormExpr::quad(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let d = dualize(&id).unwrap();
        assert_eq!(d.to_string(), id.to_string());
    }

    #[test]
    fn dual_of_diag_quad_inverts_diagonal() {
        // Oracle: sampled sup of <x,y> over the unit ball of quad(diag(3,1)).
        let n = NormExpr::quad(vec![vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let d = dualize(&n).unwrap();
        let expect = NormExpr::quad(vec![vec![1.0 / 3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        for &(a, b) in &[(1.0, 0.0), (0.3, -0.8), (2.0, 5.0)] {
            let x = v(&[a, b]);
            let lhs = evaluate(&d, &x).unwrap();
            let mut sup = 0.0f64;
            let m = 10_000;
            for k in 0..m {
                let t = 2.0 * std::f64::consts::PI * (k as f64) / (m as f64);
                let dir = [t.cos(), t.sin()];
                let nn = n.eval_unchecked(&dir);
                sup = sup.max((dir[0] * a + dir[1] * b) / nn);
            }
            assert!((lhs - evaluate(&expect, &x).unwrap()).abs() <= 1e-12 * lhs.abs());
            assert!(sup <= lhs * (1.0 + 1e-6) && sup >= 0.99 * lhs, "sup {sup} vs dual {lhs}");
        }
    }

    #[test]
    fn dual_pairing_consistency() {
        // For x on the dual unit sphere, sup <x, y> over boundary points of
        // the primal ball is 1 up to sampling resolution.
        let duals = [
            NormExpr::lp(1.0, Some(vec![2.0, 1.0])).unwrap(),
            NormExpr::lp(3.0, Some(vec![1.0, 2.0])).unwrap(),
            NormExpr::quad(vec![vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap(),
            NormExpr::polygon(vec![[2.0, 1.0], [-1.0, 2.0], [-2.0, -1.0], [1.0, -2.0]]).unwrap(),
        ];
        for n in &duals {
            let dual = dualize(n).unwrap();
            for k in 0..7 {
                let t = 0.3 + 0.8 * k as f64;
                let dir = [t.cos(), t.sin()];
                let len = dual.eval_unchecked(&dir);
                let x = [dir[0] / len, dir[1] / len];
                let mut sup = f64::NEG_INFINITY;
                let m = 10_000;
                for j in 0..m {
                    let s = 2.0 * std::f64::consts::PI * (j as f64) / (m as f64);
                    let d = [s.cos(), s.sin()];
                    let nn = n.eval_unchecked(&d);
                    sup = sup.max((d[0] * x[0] + d[1] * x[1]) / nn);
                }
                assert!(sup <= 1.0 + 1e-6, "sup {sup} too large for {n}");
                assert!(sup >= 0.99, "sup {sup} too small for {n}");
            }
        }
    }

    #[test]
    fn bidual_returns_original() {
        let n = NormExpr::lp(3.0, Some(vec![2.0, 1.0])).unwrap();
        let dd = dualize(&dualize(&n).unwrap()).unwrap();
        let x = v(&[0.4, -1.7]);
        let a = evaluate(&n, &x).unwrap();
        let b = evaluate(&dd, &x).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn sum_and_max_are_not_dualizable() {
        let q1 = NormExpr::quad(vec![vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let q2 = NormExpr::quad(vec![vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let s = NormExpr::sum(vec![q1.clone(), q2.clone()]).unwrap();
        let m = NormExpr::max(vec![q1, q2]).unwrap();
        assert!(matches!(dualize(&s), Err(Error::NotDualizable(_))));
        assert!(matches!(dualize(&m), Err(Error::NotDualizable(_))));
    }

    #[test]
    fn rejects_invalid_structures() {
        assert!(NormExpr::lp(0.5, None).is_err());
        assert!(NormExpr::lp(2.0, Some(vec![1.0, -1.0])).is_err());
        // not positive definite
        assert!(NormExpr::quad(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        // not symmetric
        assert!(NormExpr::quad(vec![vec![1.0, 0.5], vec![0.0, 1.0]]).is_err());
        // asymmetric polygon
        assert!(NormExpr::polygon(vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.5, -0.5]]).is_err());
        // dimension mismatch between children
        let a = NormExpr::quad(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let b = NormExpr::quad(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!(NormExpr::sum(vec![a, b]).is_err());
    }

    #[test]
    fn scale_of_dual_chain_evaluates() {
        let inner = NormExpr::lp(1.0, Some(vec![2.0, 1.0])).unwrap();
        let n = NormExpr::dual(NormExpr::scale(2.0, inner).unwrap()).unwrap();
        // dual of 2*||.|| is 0.5*dual(||.||): max(|x|/2,|y|)/2 at (4, 1) -> 1
        assert!((evaluate(&n, &v(&[4.0, 1.0])).unwrap() - 1.0).abs() < 1e-15);
    }

    mod properties {
        use super::super::*;
        use super::v;
        use proptest::prelude::*;

        fn corpus() -> Vec<NormExpr> {
            vec![
                NormExpr::lp(1.0, Some(vec![2.0, 1.0])).unwrap(),
                NormExpr::lp(2.5, None).unwrap(),
                NormExpr::lp(f64::INFINITY, Some(vec![0.5, 1.0])).unwrap(),
                NormExpr::quad(vec![vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap(),
                NormExpr::sum(vec![
                    NormExpr::quad(vec![vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap(),
                    NormExpr::quad(vec![vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap(),
                ])
                .unwrap(),
                NormExpr::max(vec![
                    NormExpr::quad(vec![vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap(),
                    NormExpr::quad(vec![vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap(),
                ])
                .unwrap(),
                NormExpr::polygon(vec![[2.0, 1.0], [-1.0, 2.0], [-2.0, -1.0], [1.0, -2.0]])
                    .unwrap(),
            ]
        }

        fn coord() -> impl Strategy<Value = f64> {
            prop_oneof![-100.0..100.0f64, -1.0..1.0f64, Just(0.0)]
        }

        proptest! {
            #[test]
            fn homogeneity(i in 0usize..7, a in coord(), b in coord(), c in -50.0..50.0f64) {
                let n = &corpus()[i];
                let x = v(&[a, b]);
                let cx = v(&[c * a, c * b]);
                let lhs = evaluate(n, &cx).unwrap();
                let rhs = c.abs() * evaluate(n, &x).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
            }

            #[test]
            fn triangle_inequality(
                i in 0usize..7,
                a in coord(), b in coord(), c in coord(), d in coord(),
            ) {
                let n = &corpus()[i];
                let x = v(&[a, b]);
                let y = v(&[c, d]);
                let sum = v(&[a + c, b + d]);
                let lhs = evaluate(n, &sum).unwrap();
                let rhs = evaluate(n, &x).unwrap() + evaluate(n, &y).unwrap();
                prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs));
            }

            #[test]
            fn symmetry_and_positivity(i in 0usize..7, a in coord(), b in coord()) {
                let n = &corpus()[i];
                let x = v(&[a, b]);
                let neg = v(&[-a, -b]);
                prop_assert_eq!(evaluate(n, &x).unwrap(), evaluate(n, &neg).unwrap());
                if a != 0.0 || b != 0.0 {
                    prop_assert!(evaluate(n, &x).unwrap() > 0.0);
                }
            }

            #[test]
            fn print_parse_roundtrip_weighted_lp(
                p in 1.0..20.0f64,
                w1 in 0.01..100.0f64,
                w2 in 0.01..100.0f64,
            ) {
                let n = NormExpr::lp(p, Some(vec![w1, w2])).unwrap();
                let reparsed = parse_norm(&n.to_string()).unwrap();
                prop_assert_eq!(&n, &reparsed);
            }
        }
    }
}
