//! Convex-function oracles, built-in convex functions and affine minorants.
//!
//! A [`ConvexOracle`] is a proper lower semicontinuous convex function
//! `Phi: R^n -> (-inf, +inf]` seen through evaluation, an optional
//! subgradient, and one point where it is finite.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::vecops::{dist_sq, dot, norm, norm_sq};

pub trait ConvexOracle: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn eval(&self, y: &[f64]) -> ExtReal;

    /// One element of the subdifferential at `y`, if the oracle knows one.
    ///
    /// At nonsmooth points any element may be returned.
    fn subgradient(&self, _y: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// A point with finite value.
    fn witness(&self) -> Vec<f64>;

    /// A closed convex set `K` with `dom Phi` contained in `K`, when `K` is
    /// known and `Phi` is finite on all of `K`. Inner solvers project onto it.
    fn domain(&self) -> Option<&ConvexSet> {
        None
    }

    fn name(&self) -> String;
}

pub type Oracle = Arc<dyn ConvexOracle>;

/// Exactly described nonempty closed convex sets.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Point(Vec<f64>),
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{ y : normal . y <= offset }`
    HalfSpace { normal: Vec<f64>, offset: f64 },
}

impl ConvexSet {
    /// Validates the descriptor, rejecting empty or malformed sets.
    pub fn validated(self) -> Result<Self> {
        let bad = |m: &str| Err(Error::Construction(m.to_string()));
        match &self {
            ConvexSet::Point(p) if p.is_empty() => return bad("point of dimension 0"),
            ConvexSet::Ball { center, radius } => {
                if center.is_empty() {
                    return bad("ball of dimension 0");
                }
                if !(*radius >= 0.0) || !radius.is_finite() {
                    return bad("ball radius must be finite and nonnegative");
                }
            }
            ConvexSet::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return bad("box bounds must be nonempty and of equal length");
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                    return bad("box is empty (lo > hi in some coordinate)");
                }
            }
            ConvexSet::HalfSpace { normal, offset } => {
                if normal.is_empty() {
                    return bad("half-space of dimension 0");
                }
                if norm(normal) == 0.0 && *offset < 0.0 {
                    return bad("half-space with zero normal and negative offset is empty");
                }
            }
            _ => {}
        }
        if self.coords().any(|v| !v.is_finite()) {
            return bad("non-finite coordinate in set descriptor");
        }
        Ok(self)
    }

    fn coords(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match self {
            ConvexSet::Point(p) => Box::new(p.iter().copied()),
            ConvexSet::Ball { center, .. } => Box::new(center.iter().copied()),
            ConvexSet::Box { lo, hi } => Box::new(lo.iter().chain(hi).copied()),
            ConvexSet::HalfSpace { normal, offset } => {
                Box::new(normal.iter().copied().chain(std::iter::once(*offset)))
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Point(p) => p.len(),
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Box { lo, .. } => lo.len(),
            ConvexSet::HalfSpace { normal, .. } => normal.len(),
        }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        match self {
            ConvexSet::Point(p) => p.as_slice() == y,
            ConvexSet::Ball { center, radius } => dist_sq(center, y) <= radius * radius,
            ConvexSet::Box { lo, hi } => {
                y.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
            }
            ConvexSet::HalfSpace { normal, offset } => dot(normal, y) <= *offset,
        }
    }

    /// Euclidean projection. The result is guaranteed to satisfy `contains`.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        match self {
            ConvexSet::Point(p) => p.clone(),
            ConvexSet::Ball { center, radius } => {
                let d = dist_sq(center, y).sqrt();
                if d <= *radius {
                    return y.to_vec();
                }
                let mut s = radius / d;
                loop {
                    let p: Vec<f64> = center.iter().zip(y).map(|(c, v)| c + s * (v - c)).collect();
                    if self.contains(&p) {
                        return p;
                    }
                    s *= 1.0 - 4.0 * f64::EPSILON;
                }
            }
            ConvexSet::Box { lo, hi } => y
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| v.clamp(*l, *h))
                .collect(),
            ConvexSet::HalfSpace { normal, offset } => {
                let excess = dot(normal, y) - offset;
                if excess <= 0.0 {
                    return y.to_vec();
                }
                let nn = norm_sq(normal);
                let mut s = excess / nn;
                loop {
                    let p: Vec<f64> = y.iter().zip(normal).map(|(v, a)| v - s * a).collect();
                    if self.contains(&p) {
                        return p;
                    }
                    s += s.abs() * 4.0 * f64::EPSILON + f64::MIN_POSITIVE;
                }
            }
        }
    }

    /// Some point of the set.
    pub fn any_point(&self) -> Vec<f64> {
        match self {
            ConvexSet::Point(p) => p.clone(),
            ConvexSet::Ball { center, .. } => center.clone(),
            ConvexSet::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
            ConvexSet::HalfSpace { normal, .. } => self.project(&vec![0.0; normal.len()]),
        }
    }

    /// True when `y` is an interior point.
    pub fn interior(&self, y: &[f64]) -> bool {
        match self {
            ConvexSet::Point(_) => false,
            ConvexSet::Ball { center, radius } => dist_sq(center, y) < radius * radius,
            ConvexSet::Box { lo, hi } => {
                y.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l < *v && *v < *h)
            }
            ConvexSet::HalfSpace { normal, offset } => dot(normal, y) < *offset,
        }
    }
}

/// `i_K`: zero on `K`, `+inf` elsewhere.
#[derive(Debug, Clone)]
pub struct Indicator {
    set: ConvexSet,
}

impl Indicator {
    pub fn set(&self) -> &ConvexSet {
        &self.set
    }
}

impl ConvexOracle for Indicator {
    fn dim(&self) -> usize {
        self.set.dim()
    }

    fn eval(&self, y: &[f64]) -> ExtReal {
        if self.set.contains(y) {
            ExtReal::ZERO
        } else {
            ExtReal::Infinity
        }
    }

    /// Zero on all of `K`: it lies in the normal cone at every point of `K`,
    /// interior or boundary.
    fn subgradient(&self, y: &[f64]) -> Option<Vec<f64>> {
        self.set.contains(y).then(|| vec![0.0; y.len()])
    }

    fn witness(&self) -> Vec<f64> {
        self.set.any_point()
    }

    fn domain(&self) -> Option<&ConvexSet> {
        Some(&self.set)
    }

    fn name(&self) -> String {
        match &self.set {
            ConvexSet::Point(_) => "indicator(point)".into(),
            ConvexSet::Ball { radius, .. } => format!("indicator(ball r={radius})"),
            ConvexSet::Box { .. } => "indicator(box)".into(),
            ConvexSet::HalfSpace { .. } => "indicator(halfspace)".into(),
        }
    }
}

pub fn builtin_indicator(set: ConvexSet) -> Result<Indicator> {
    Ok(Indicator { set: set.validated()? })
}

/// `i_{0}` on `R^n`.
pub fn point_indicator(n: usize) -> Indicator {
    builtin_indicator(ConvexSet::Point(vec![0.0; n])).expect("origin is a valid point")
}

/// `-ln y` on `(0, inf)`, `+inf` on `(-inf, 0]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NegLog;

impl ConvexOracle for NegLog {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, y: &[f64]) -> ExtReal {
        if y[0] > 0.0 {
            ExtReal::Finite(-y[0].ln())
        } else {
            ExtReal::Infinity
        }
    }

    fn subgradient(&self, y: &[f64]) -> Option<Vec<f64>> {
        (y[0] > 0.0).then(|| vec![-1.0 / y[0]])
    }

    fn witness(&self) -> Vec<f64> {
        vec![1.0]
    }

    fn name(&self) -> String {
        "neglog".into()
    }
}

pub fn builtin_neglog() -> NegLog {
    NegLog
}

/// `alpha + b . y`
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub alpha: f64,
    pub b: Vec<f64>,
}

impl ConvexOracle for Affine {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn eval(&self, y: &[f64]) -> ExtReal {
        ExtReal::Finite(self.alpha + dot(&self.b, y))
    }

    fn subgradient(&self, _y: &[f64]) -> Option<Vec<f64>> {
        Some(self.b.clone())
    }

    fn witness(&self) -> Vec<f64> {
        vec![0.0; self.b.len()]
    }

    fn name(&self) -> String {
        if self.alpha == 0.0 && self.b.iter().all(|v| *v == 0.0) {
            "zero".into()
        } else {
            "affine".into()
        }
    }
}

pub fn builtin_affine(alpha: f64, b: Vec<f64>) -> Affine {
    Affine { alpha, b }
}

/// The zero function on `R^n`.
pub fn zero(n: usize) -> Affine {
    builtin_affine(0.0, vec![0.0; n])
}

/// `scale * |y - center|^2`, strictly convex for `scale > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub scale: f64,
    pub center: Vec<f64>,
}

impl Quadratic {
    pub fn new(scale: f64, center: Vec<f64>) -> Result<Self> {
        if !(scale >= 0.0) || center.is_empty() {
            return Err(Error::Construction("quadratic needs scale >= 0 and n >= 1".into()));
        }
        Ok(Quadratic { scale, center })
    }
}

impl ConvexOracle for Quadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn eval(&self, y: &[f64]) -> ExtReal {
        ExtReal::Finite(self.scale * dist_sq(y, &self.center))
    }

    fn subgradient(&self, y: &[f64]) -> Option<Vec<f64>> {
        Some(y.iter().zip(&self.center).map(|(v, c)| 2.0 * self.scale * (v - c)).collect())
    }

    fn witness(&self) -> Vec<f64> {
        self.center.clone()
    }

    fn name(&self) -> String {
        "square".into()
    }
}

/// Euclidean norm `|y|`. Returns the subgradient `0` at the kink.
#[derive(Debug, Clone, Copy)]
pub struct EuclideanNorm {
    pub dim: usize,
}

impl ConvexOracle for EuclideanNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, y: &[f64]) -> ExtReal {
        ExtReal::Finite(norm(y))
    }

    fn subgradient(&self, y: &[f64]) -> Option<Vec<f64>> {
        let r = norm(y);
        if r == 0.0 {
            Some(vec![0.0; y.len()])
        } else {
            Some(y.iter().map(|v| v / r).collect())
        }
    }

    fn witness(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }

    fn name(&self) -> String {
        "abs".into()
    }
}

type EvalFn = dyn Fn(&[f64]) -> ExtReal + Send + Sync;
type SubgradFn = dyn Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync;

/// Oracle from closures, for user-supplied functions.
#[derive(Clone)]
pub struct FnOracle {
    dim: usize,
    name: String,
    eval: Arc<EvalFn>,
    subgrad: Option<Arc<SubgradFn>>,
    witness: Vec<f64>,
}

impl FnOracle {
    pub fn new(
        name: impl Into<String>,
        witness: Vec<f64>,
        eval: impl Fn(&[f64]) -> ExtReal + Send + Sync + 'static,
    ) -> Result<Self> {
        if witness.is_empty() {
            return Err(Error::Construction("witness must have dimension >= 1".into()));
        }
        let oracle = FnOracle {
            dim: witness.len(),
            name: name.into(),
            eval: Arc::new(eval),
            subgrad: None,
            witness,
        };
        if oracle.eval(&oracle.witness).is_infinite() {
            return Err(Error::Construction("oracle is +inf at its witness (not proper)".into()));
        }
        Ok(oracle)
    }

    pub fn with_subgradient(
        mut self,
        subgrad: impl Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.subgrad = Some(Arc::new(subgrad));
        self
    }
}

impl fmt::Debug for FnOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnOracle").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

impl ConvexOracle for FnOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, y: &[f64]) -> ExtReal {
        (self.eval)(y)
    }

    fn subgradient(&self, y: &[f64]) -> Option<Vec<f64>> {
        self.subgrad.as_ref().and_then(|s| s(y))
    }

    fn witness(&self) -> Vec<f64> {
        self.witness.clone()
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

/// `alpha + b . y`, required to lie below `Phi` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMinorant {
    pub alpha: f64,
    pub b: Vec<f64>,
}

impl AffineMinorant {
    pub fn at(&self, y: &[f64]) -> f64 {
        self.alpha + dot(&self.b, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinorantSource {
    UserSupplied,
    GeneratedFromSubgradients,
}

/// A finite nonempty family of affine minorants. Its pointwise supremum
/// under-approximates `Phi` and is exact at every generation point.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMinorantSet {
    minorants: Vec<AffineMinorant>,
    source: MinorantSource,
}

impl AffineMinorantSet {
    pub fn new(minorants: Vec<AffineMinorant>, source: MinorantSource) -> Result<Self> {
        let Some(first) = minorants.first() else {
            return Err(Error::Construction("affine minorant set must be nonempty".into()));
        };
        let n = first.b.len();
        if n == 0 {
            return Err(Error::Construction("minorant slope of dimension 0".into()));
        }
        if let Some(m) = minorants.iter().find(|m| m.b.len() != n) {
            return Err(Error::Dimension { expected: n, got: m.b.len() });
        }
        if minorants.iter().any(|m| !m.alpha.is_finite() || m.b.iter().any(|v| !v.is_finite())) {
            return Err(Error::Construction("non-finite minorant coefficient".into()));
        }
        Ok(AffineMinorantSet { minorants, source })
    }

    pub fn user(minorants: Vec<AffineMinorant>) -> Result<Self> {
        Self::new(minorants, MinorantSource::UserSupplied)
    }

    pub fn minorants(&self) -> &[AffineMinorant] {
        &self.minorants
    }

    pub fn source(&self) -> MinorantSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.minorants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minorants.is_empty()
    }

    fn argmax(&self, y: &[f64]) -> (usize, f64) {
        self.minorants
            .iter()
            .map(|m| m.at(y))
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
    }
}

/// The pointwise maximum `max_{(alpha, b) in S} alpha + b . y`.
pub fn minorant_sup(set: &AffineMinorantSet, y: &[f64]) -> ExtReal {
    ExtReal::Finite(set.argmax(y).1)
}

impl ConvexOracle for AffineMinorantSet {
    fn dim(&self) -> usize {
        self.minorants[0].b.len()
    }

    fn eval(&self, y: &[f64]) -> ExtReal {
        minorant_sup(self, y)
    }

    fn subgradient(&self, y: &[f64]) -> Option<Vec<f64>> {
        Some(self.minorants[self.argmax(y).0].b.clone())
    }

    fn witness(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    fn name(&self) -> String {
        format!("minorant-sup({})", self.len())
    }
}

/// Exact affine minorants `(Phi(y0) - b(y0) . y0, b(y0))`, one per sample
/// point `y0` in `dom dPhi`. Rejected samples are all reported.
pub fn build_minorant_set(phi: &dyn ConvexOracle, samples: &[Vec<f64>]) -> Result<AffineMinorantSet> {
    if samples.is_empty() {
        return Err(Error::Construction("no sample points".into()));
    }
    let n = phi.dim();
    let mut minorants = Vec::with_capacity(samples.len());
    let mut rejected = Vec::new();
    for (i, y0) in samples.iter().enumerate() {
        if y0.len() != n {
            rejected.push((i, format!("dimension {} != {}", y0.len(), n)));
            continue;
        }
        let Some(value) = phi.eval(y0).finite() else {
            rejected.push((i, "Phi(y0) = +inf".to_string()));
            continue;
        };
        let Some(b) = phi.subgradient(y0) else {
            rejected.push((i, "no subgradient available at y0".to_string()));
            continue;
        };
        minorants.push(AffineMinorant { alpha: value - dot(&b, y0), b });
    }
    if !rejected.is_empty() {
        return Err(Error::RejectedSamples(rejected));
    }
    AffineMinorantSet::new(minorants, MinorantSource::GeneratedFromSubgradients)
}
