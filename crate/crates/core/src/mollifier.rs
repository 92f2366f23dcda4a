//! `x`-dependent mollification
//!
//! ```text
//! phi(x, y) = ∫∫ rho(x', y') phi~(x (1 - x'), y - x y') dx' dy'
//! ```
//!
//! with `rho` a smooth bump supported in `(0, 1) x {|y'| <= 1}`. For `x > 0`
//! the integrand only samples `phi~` at `x (1 - x') > 0`, where the raw
//! extensions are finite; at `x = 0` the value is `phi~(0, y) = Phi(y)`.
//!
//! The integral is a tensor-product rule with positive weights, so the
//! discrete mollification of a convex `phi~` is itself convex.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::extension::HalfSpaceFn;
use crate::quadrature::GaussLegendre;
use crate::vecops::norm_sq;

/// `exp(-1 / (t (1 - t)))` on `(0, 1)`, zero outside.
pub fn bump_x(t: f64) -> f64 {
    if t > 0.0 && t < 1.0 {
        (-1.0 / (t * (1.0 - t))).exp()
    } else {
        0.0
    }
}

/// Radial bump `exp(-1 / (1 - |y|^2))` on the open unit ball, zero outside.
pub fn bump_y(y: &[f64]) -> f64 {
    let r2 = norm_sq(y);
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

/// Quadrature for `rho(x', y') = bump_x(x') bump_y(y') / Z`.
#[derive(Debug, Clone)]
pub struct MollifierConfig {
    dim: usize,
    quad_nodes_x: usize,
    quad_nodes_y: usize,
    /// `(x', weight * bump_x(x'))`
    x_rule: Vec<(f64, f64)>,
    /// `(y', weight * bump_y(y'))`, nodes flattened with stride `dim`
    y_nodes: Vec<f64>,
    y_weights: Vec<f64>,
    normalization: f64,
}

impl MollifierConfig {
    pub const DEFAULT_NODES: usize = 32;

    pub fn new(dim: usize) -> Result<Self> {
        Self::with_nodes(dim, Self::DEFAULT_NODES, Self::DEFAULT_NODES)
    }

    /// Node counts per axis. The ball is integrated in polar (`n = 2`) or
    /// spherical (`n = 3`) coordinates, and on a clipped product grid for
    /// `n >= 4`.
    pub fn with_nodes(dim: usize, quad_nodes_x: usize, quad_nodes_y: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("mollifier dimension must be >= 1".into()));
        }
        if quad_nodes_x < 2 || quad_nodes_y < 2 {
            return Err(Error::Config("need at least 2 quadrature nodes per axis".into()));
        }
        let gx = GaussLegendre::on(quad_nodes_x, 0.0, 1.0);
        let x_rule: Vec<(f64, f64)> =
            gx.nodes.iter().zip(&gx.weights).map(|(t, w)| (*t, w * bump_x(*t))).filter(|p| p.1 > 0.0).collect();
        let (y_nodes, y_weights) = ball_rule(dim, quad_nodes_y);
        let zx: f64 = x_rule.iter().map(|p| p.1).sum();
        let zy: f64 = y_weights.iter().sum();
        Ok(MollifierConfig {
            dim,
            quad_nodes_x,
            quad_nodes_y,
            x_rule,
            y_nodes,
            y_weights,
            normalization: zx * zy,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn quad_nodes(&self) -> (usize, usize) {
        (self.quad_nodes_x, self.quad_nodes_y)
    }

    /// `Z = ∫∫ bump_x bump_y` as computed by this rule.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `rho(x', y')`.
    pub fn rho(&self, xp: f64, yp: &[f64]) -> f64 {
        bump_x(xp) * bump_y(yp) / self.normalization
    }

    pub fn node_count(&self) -> usize {
        self.x_rule.len() * self.y_weights.len()
    }

    /// `∫∫ rho(x', y') f(x', y')` under this rule.
    pub fn integrate(&self, mut f: impl FnMut(f64, &[f64]) -> f64) -> f64 {
        let mut total = 0.0;
        for &(xp, wx) in &self.x_rule {
            let mut inner = 0.0;
            for (yp, wy) in self.y_nodes.chunks_exact(self.dim).zip(&self.y_weights) {
                inner += wy * f(xp, yp);
            }
            total += wx * inner;
        }
        total / self.normalization
    }
}

/// Nodes and `weight * bump_y` for the unit ball in `R^n`; zero-weight nodes dropped.
fn ball_rule(n: usize, m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut push = |p: &[f64], w: f64| {
        let w = w * bump_y(p);
        if w > 0.0 {
            nodes.extend_from_slice(p);
            weights.push(w);
        }
    };
    let radial = GaussLegendre::on(m, 0.0, 1.0);
    let azimuth: Vec<f64> = (0..2 * m).map(|k| 2.0 * PI * (k as f64 + 0.5) / (2 * m) as f64).collect();
    let dphi = PI / m as f64;
    match n {
        1 => {
            // mirrored radial rule; the bump is flat only at |y| = 1
            for (r, w) in radial.nodes.iter().zip(&radial.weights) {
                push(&[-r], *w);
                push(&[*r], *w);
            }
        }
        2 => {
            for (r, wr) in radial.nodes.iter().zip(&radial.weights) {
                for phi in &azimuth {
                    push(&[r * phi.cos(), r * phi.sin()], wr * r * dphi);
                }
            }
        }
        3 => {
            let polar = GaussLegendre::new(m);
            for (r, wr) in radial.nodes.iter().zip(&radial.weights) {
                for (c, wc) in polar.nodes.iter().zip(&polar.weights) {
                    let s = (1.0 - c * c).sqrt();
                    for phi in &azimuth {
                        push(&[r * s * phi.cos(), r * s * phi.sin(), r * c], wr * r * r * wc * dphi);
                    }
                }
            }
        }
        _ => {
            let g = GaussLegendre::new(m);
            let mut idx = vec![0usize; n];
            let mut p = vec![0.0; n];
            'outer: loop {
                let mut w = 1.0;
                for (k, i) in idx.iter().enumerate() {
                    p[k] = g.nodes[*i];
                    w *= g.weights[*i];
                }
                push(&p, w);
                for k in 0..n {
                    idx[k] += 1;
                    if idx[k] < m {
                        continue 'outer;
                    }
                    idx[k] = 0;
                }
                break;
            }
        }
    }
    (nodes, weights)
}

/// A raw extension smoothed by [`MollifierConfig`].
#[derive(Clone)]
pub struct MollifiedExtension {
    base: Arc<dyn HalfSpaceFn>,
    cfg: Arc<MollifierConfig>,
}

impl MollifiedExtension {
    pub fn new(base: Arc<dyn HalfSpaceFn>, cfg: MollifierConfig) -> Result<Self> {
        if base.dim() != cfg.dim() {
            return Err(Error::Dimension { expected: cfg.dim(), got: base.dim() });
        }
        Ok(MollifiedExtension { base, cfg: Arc::new(cfg) })
    }

    pub fn base(&self) -> &Arc<dyn HalfSpaceFn> {
        &self.base
    }

    pub fn config(&self) -> &MollifierConfig {
        &self.cfg
    }
}

/// `phi(x, y)`; exactly `base(0, y)` at `x = 0`.
pub fn mollify_eval(m: &MollifiedExtension, x: f64, y: &[f64]) -> Result<ExtReal> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("x must be finite and >= 0, got {x}")));
    }
    if y.len() != m.cfg.dim {
        return Err(Error::Dimension { expected: m.cfg.dim, got: y.len() });
    }
    if x == 0.0 {
        return m.base.eval(0.0, y);
    }
    let n = m.cfg.dim;
    let mut point = vec![0.0; n];
    let mut total = 0.0;
    for &(xp, wx) in &m.cfg.x_rule {
        let xs = x * (1.0 - xp);
        let mut inner = 0.0;
        for (yp, wy) in m.cfg.y_nodes.chunks_exact(n).zip(&m.cfg.y_weights) {
            for ((p, yi), ypi) in point.iter_mut().zip(y).zip(yp) {
                *p = yi - x * ypi;
            }
            match m.base.eval(xs, &point)? {
                ExtReal::Finite(v) => inner += wy * v,
                ExtReal::Infinity => {
                    return Err(Error::Precondition(format!(
                        "{} is +inf at ({xs}, {point:?}) with x > 0",
                        m.base.label()
                    )))
                }
            }
        }
        total += wx * inner;
    }
    Ok(ExtReal::Finite(total / m.cfg.normalization))
}

impl HalfSpaceFn for MollifiedExtension {
    fn dim(&self) -> usize {
        self.cfg.dim
    }

    fn eval(&self, x: f64, y: &[f64]) -> Result<ExtReal> {
        mollify_eval(self, x, y)
    }

    fn label(&self) -> String {
        format!("mollified[{}x{}]({})", self.cfg.quad_nodes_x, self.cfg.quad_nodes_y, self.base.label())
    }
}

/// Central-difference estimates of one partial derivative at three step sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionProbe {
    /// 0 is the `x` direction, `i >= 1` is `y_i`.
    pub direction: usize,
    /// Estimates at `h`, `h/2`, `h/4`.
    pub estimates: [f64; 3],
    /// `(D(h) - D(h/2)) / (D(h/2) - D(h/4))`; about 4 for a smooth function.
    /// `None` when both differences are at rounding level.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessReport {
    pub x: f64,
    pub y: Vec<f64>,
    pub h: f64,
    pub directions: Vec<DirectionProbe>,
}

impl SmoothnessReport {
    /// Gradient estimate at the smallest step.
    pub fn gradient(&self) -> Vec<f64> {
        self.directions.iter().map(|d| d.estimates[2]).collect()
    }

    /// Every direction has its ratio in `[lo, hi]` or is exact to rounding.
    pub fn passes(&self, lo: f64, hi: f64) -> bool {
        self.directions.iter().all(|d| d.ratio.map_or(true, |r| (lo..=hi).contains(&r)))
    }
}

/// Richardson-style smoothness probe: for a `C^3` function central
/// differences converge at `O(h^2)`, so successive differences shrink by 4.
pub fn smoothness_probe(f: &dyn HalfSpaceFn, x: f64, y: &[f64], h: f64) -> Result<SmoothnessReport> {
    if !(h > 0.0) || !(x - 2.0 * h > 0.0) {
        return Err(Error::Domain(format!("step h = {h} leaves the open half-space at x = {x}")));
    }
    let n = y.len();
    let val = |px: f64, py: &[f64]| -> Result<f64> {
        f.eval(px, py)?
            .finite()
            .ok_or_else(|| Error::Precondition(format!("{} is +inf inside the half-space", f.label())))
    };
    let f0 = val(x, y)?.abs().max(1.0);
    let mut directions = Vec::with_capacity(n + 1);
    for dir in 0..=n {
        let mut estimates = [0.0; 3];
        let mut scale = f0;
        for (k, est) in estimates.iter_mut().enumerate() {
            let s = h / f64::from(1u32 << k);
            let (fp, fm) = if dir == 0 {
                (val(x + s, y)?, val(x - s, y)?)
            } else {
                let mut yp = y.to_vec();
                let mut ym = y.to_vec();
                yp[dir - 1] += s;
                ym[dir - 1] -= s;
                (val(x, &yp)?, val(x, &ym)?)
            };
            scale = scale.max(fp.abs()).max(fm.abs());
            *est = (fp - fm) / (2.0 * s);
        }
        let d1 = estimates[0] - estimates[1];
        let d2 = estimates[1] - estimates[2];
        let floor = 1e3 * f64::EPSILON * scale / (h / 4.0);
        let ratio = if d1.abs() <= floor && d2.abs() <= floor { None } else { Some(d1 / d2) };
        directions.push(DirectionProbe { direction: dir, estimates, ratio });
    }
    Ok(SmoothnessReport { x, y: y.to_vec(), h, directions })
}

/// `Phi^(j)(y) = phi(1/j, y)`, a smooth convex approximation of `Phi`.
pub fn approximating_sequence(m: &MollifiedExtension, j: u64, y: &[f64]) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("j must be >= 1".into()));
    }
    mollify_eval(m, 1.0 / j as f64, y)?
        .finite()
        .ok_or_else(|| Error::Precondition("mollified value is +inf at x > 0".into()))
}
