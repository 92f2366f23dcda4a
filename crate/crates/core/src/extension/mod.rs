//! Convex extensions of a boundary datum `Phi` on `{x = 0}` to the half-space
//! `[0, inf) x R^n`.
//!
//! Two general constructions are provided:
//!
//! * [`sup_extension`]: `sup_{(alpha, b) in S} alpha + b.y - psi(|alpha| + |b|) x`
//!   for a family `S` of affine minorants and a superlinear penalty `psi`;
//! * [`inf_convolution`]: `inf_{y'} Phi(y') + theta(x, y - y')` with the
//!   perspective kernel [`theta`].
//!
//! plus closed-form reference extensions for `i_{0}` and `-ln`, and the
//! strictifier `-x / (x + 1)`.

pub mod solver;

use std::fmt;
use std::sync::Arc;

use crate::convex::{point_indicator, AffineMinorantSet, ConvexOracle, NegLog, Oracle};
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::vecops::{norm, norm_sq};

pub use solver::{InnerSolverConfig, ProxSolution, SolverMethod};

/// A function on `[0, inf) x R^n`, evaluated pointwise.
pub trait HalfSpaceFn: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: f64, y: &[f64]) -> Result<ExtReal>;
    fn label(&self) -> String;
}

impl<T: HalfSpaceFn + ?Sized> HalfSpaceFn for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: f64, y: &[f64]) -> Result<ExtReal> {
        (**self).eval(x, y)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

type HalfSpaceClosure = dyn Fn(f64, &[f64]) -> Result<ExtReal> + Send + Sync;

/// Ad-hoc [`HalfSpaceFn`] from a closure.
#[derive(Clone)]
pub struct FnExtension {
    dim: usize,
    label: String,
    f: Arc<HalfSpaceClosure>,
}

impl FnExtension {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        f: impl Fn(f64, &[f64]) -> Result<ExtReal> + Send + Sync + 'static,
    ) -> Self {
        FnExtension { dim, label: label.into(), f: Arc::new(f) }
    }
}

impl HalfSpaceFn for FnExtension {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: f64, y: &[f64]) -> Result<ExtReal> {
        (self.f)(x, y)
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

fn check_x(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("x must be finite and >= 0, got {x}")))
    }
}

fn check_dim(expected: usize, y: &[f64]) -> Result<()> {
    if y.len() == expected {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got: y.len() })
    }
}

/// `|y|^2 / x` for `x > 0`, `0` at the origin, `+inf` elsewhere.
pub fn theta(x: f64, y: &[f64]) -> Result<ExtReal> {
    check_x(x)?;
    if x > 0.0 {
        Ok(ExtReal::Finite(norm_sq(y) / x))
    } else if y.iter().all(|v| *v == 0.0) {
        Ok(ExtReal::ZERO)
    } else {
        Ok(ExtReal::Infinity)
    }
}

fn finite_theta(x: f64, y: &[f64]) -> f64 {
    norm_sq(y) / x
}

fn check_gap_args(lam: f64, p1: (f64, &[f64]), p2: (f64, &[f64])) -> Result<()> {
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::Domain(format!("lambda must lie in [0, 1], got {lam}")));
    }
    if !(p1.0 > 0.0 && p2.0 > 0.0) {
        return Err(Error::Domain("both points need x > 0".into()));
    }
    check_dim(p1.1.len(), p2.1)
}

/// `lam theta(p1) + (1 - lam) theta(p2) - theta(lam p1 + (1 - lam) p2)`,
/// computed directly from `theta`.
pub fn theta_convexity_gap(lam: f64, p1: (f64, &[f64]), p2: (f64, &[f64])) -> Result<f64> {
    check_gap_args(lam, p1, p2)?;
    let xm = lam * p1.0 + (1.0 - lam) * p2.0;
    let ym = crate::vecops::lerp(lam, p1.1, p2.1);
    Ok(lam * finite_theta(p1.0, p1.1) + (1.0 - lam) * finite_theta(p2.0, p2.1) - finite_theta(xm, &ym))
}

/// The same gap in its manifestly nonnegative form
/// `lam (1 - lam) / (lam x1 + (1 - lam) x2) * |sqrt(x1/x2) y2 - sqrt(x2/x1) y1|^2`.
pub fn theta_convexity_gap_closed_form(lam: f64, p1: (f64, &[f64]), p2: (f64, &[f64])) -> Result<f64> {
    check_gap_args(lam, p1, p2)?;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let (r12, r21) = ((x1 / x2).sqrt(), (x2 / x1).sqrt());
    let d: f64 = y1.iter().zip(y2).map(|(a, b)| (r12 * b - r21 * a).powi(2)).sum();
    Ok(lam * (1.0 - lam) / (lam * x1 + (1.0 - lam) * x2) * d)
}

/// Superlinear penalty `psi(t) = c_p t^(p/(p-1))` with `c_p = (p-1) p^(-p/(p-1))`,
/// normalized so that the sup-construction over `{(0, b)}` reproduces
/// `|y|^p / x^(p-1)` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyFn {
    p: f64,
    c_p: f64,
}

impl PenaltyFn {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!("penalty exponent p must be finite and > 1, got {p}")));
        }
        let c_p = (p - 1.0) * p.powf(-p / (p - 1.0));
        Ok(PenaltyFn { p, c_p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn c_p(&self) -> f64 {
        self.c_p
    }

    /// Conjugate exponent `p / (p - 1)`.
    pub fn exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        self.c_p * t.powf(self.exponent())
    }
}

/// Maximum over the finite family of `alpha + b.y - psi(|alpha| + |b|) x`.
///
/// With a finite sample `S` of minorants this under-approximates the
/// extension built from the full family.
pub fn sup_extension(set: &AffineMinorantSet, psi: &PenaltyFn, x: f64, y: &[f64]) -> Result<ExtReal> {
    check_x(x)?;
    if set.is_empty() {
        return Err(Error::Construction("empty minorant set".into()));
    }
    check_dim(set.minorants()[0].b.len(), y)?;
    if x == 0.0 {
        return Ok(crate::convex::minorant_sup(set, y));
    }
    let best = set
        .minorants()
        .iter()
        .map(|m| m.at(y) - psi.eval(m.alpha.abs() + norm(&m.b)) * x)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ExtReal::Finite(best))
}

/// `inf_{y'} Phi(y') + theta(x, y - y')`; equals `Phi(y)` at `x = 0`.
pub fn inf_convolution(phi0: &dyn ConvexOracle, cfg: &InnerSolverConfig, x: f64, y: &[f64]) -> Result<ExtReal> {
    Ok(match inf_convolution_solution(phi0, cfg, x, y)? {
        Some(sol) => ExtReal::Finite(sol.value),
        None => phi0.eval(y),
    })
}

/// Like [`inf_convolution`] but also returns the minimizer and the
/// optimality certificate (`None` at `x = 0`).
pub fn inf_convolution_solution(
    phi0: &dyn ConvexOracle,
    cfg: &InnerSolverConfig,
    x: f64,
    y: &[f64],
) -> Result<Option<ProxSolution>> {
    check_x(x)?;
    check_dim(phi0.dim(), y)?;
    if x == 0.0 {
        return Ok(None);
    }
    solver::solve(phi0, x, y, cfg).map(Some)
}

/// `|y|^p / x^(p-1)` for `x > 0`, `i_{0}(y)` at `x = 0`.
pub fn closed_form_indicator_ext(p: f64, x: f64, y: &[f64]) -> Result<ExtReal> {
    check_x(x)?;
    if !(p > 1.0) {
        return Err(Error::Domain(format!("p must be > 1, got {p}")));
    }
    if x == 0.0 {
        return Ok(point_indicator(y.len()).eval(y));
    }
    Ok(ExtReal::Finite(norm(y).powf(p) / x.powf(p - 1.0)))
}

/// Perspective `x eta(y / x)` for `x > 0`, `i_{0}(y)` at `x = 0`. The caller
/// asserts that `eta` is finite, convex and superlinear.
pub fn closed_form_eta_ext(eta: &dyn ConvexOracle, x: f64, y: &[f64]) -> Result<ExtReal> {
    check_x(x)?;
    check_dim(eta.dim(), y)?;
    if x == 0.0 {
        return Ok(point_indicator(y.len()).eval(y));
    }
    let scaled: Vec<f64> = y.iter().map(|v| v / x).collect();
    match eta.eval(&scaled) {
        ExtReal::Finite(v) => Ok(ExtReal::Finite(x * v)),
        ExtReal::Infinity => Err(Error::Precondition(format!("{} is not finite everywhere", eta.name()))),
    }
}

/// Closed form of the inf-convolution of `-ln` with `theta`:
/// `-ln((y + s)/2) + (s - y)^2 / (4x)` with `s = sqrt(y^2 + 2x)`.
///
/// Both `y + s` and `s - y` are evaluated without cancellation via
/// `(s + y)(s - y) = 2x`.
pub fn closed_form_log_ext(x: f64, y: f64) -> Result<ExtReal> {
    check_x(x)?;
    if x == 0.0 {
        return Ok(NegLog.eval(&[y]));
    }
    let s = (y * y + 2.0 * x).sqrt();
    let (half_sum, diff) = if y >= 0.0 {
        (0.5 * (y + s), 2.0 * x / (s + y))
    } else {
        (x / (s - y), s - y)
    };
    Ok(ExtReal::Finite(-half_sum.ln() + diff * diff / (4.0 * x)))
}

/// The convex, strictly decreasing strictifier `-x / (x + 1)`, zero at `x = 0`.
pub fn strictifier(x: f64) -> f64 {
    -x / (x + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructionKind {
    SupMinorant,
    InfConvolution,
    ClosedForm,
}

#[derive(Clone)]
pub enum ClosedForm {
    /// `theta`, the extension of `i_{0}` on `R^n`.
    Theta { dim: usize },
    /// `|y|^p / x^(p-1)`.
    IndicatorPower { p: f64, dim: usize },
    /// `x eta(y / x)`.
    Perspective { eta: Oracle },
    /// Inf-convolution of `-ln` with `theta`.
    NegLog,
}

impl fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedForm::Theta { dim } => write!(f, "Theta(n={dim})"),
            ClosedForm::IndicatorPower { p, dim } => write!(f, "IndicatorPower(p={p}, n={dim})"),
            ClosedForm::Perspective { eta } => write!(f, "Perspective({})", eta.name()),
            ClosedForm::NegLog => f.write_str("NegLog"),
        }
    }
}

#[derive(Clone)]
pub enum Construction {
    SupMinorant { set: Arc<AffineMinorantSet>, penalty: PenaltyFn },
    InfConvolution { phi0: Oracle, solver: InnerSolverConfig },
    ClosedForm(ClosedForm),
}

/// A configured extension of a boundary datum, optionally strictified.
#[derive(Clone)]
pub struct HalfSpaceExtension {
    construction: Construction,
    strictify_count: u32,
    clamp_nonnegative: bool,
}

impl fmt::Debug for HalfSpaceExtension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl HalfSpaceExtension {
    fn from_construction(construction: Construction) -> Self {
        HalfSpaceExtension { construction, strictify_count: 0, clamp_nonnegative: false }
    }

    pub fn sup_minorant(set: AffineMinorantSet, penalty: PenaltyFn) -> Self {
        Self::from_construction(Construction::SupMinorant { set: Arc::new(set), penalty })
    }

    pub fn inf_convolution(phi0: Oracle, solver: InnerSolverConfig) -> Result<Self> {
        if solver.method == SolverMethod::Bisection1d && phi0.dim() != 1 {
            return Err(Error::Config("bisection-1d needs a 1-D boundary datum".into()));
        }
        if phi0.eval(&phi0.witness()).is_infinite() {
            return Err(Error::Construction("boundary datum is +inf at its witness".into()));
        }
        Ok(Self::from_construction(Construction::InfConvolution { phi0, solver }))
    }

    pub fn closed_form(form: ClosedForm) -> Result<Self> {
        match &form {
            ClosedForm::IndicatorPower { p, .. } if !(*p > 1.0) => {
                return Err(Error::Domain(format!("p must be > 1, got {p}")));
            }
            ClosedForm::Theta { dim } | ClosedForm::IndicatorPower { dim, .. } if *dim == 0 => {
                return Err(Error::Construction("dimension must be >= 1".into()));
            }
            _ => {}
        }
        Ok(Self::from_construction(Construction::ClosedForm(form)))
    }

    /// Adds `-x / (x + 1)`. Boundary values are unchanged.
    pub fn strictify(mut self) -> Self {
        self.strictify_count += 1;
        self
    }

    /// Replaces the value by `max(value, 0)` (before strictification).
    pub fn clamp_nonnegative(mut self) -> Self {
        self.clamp_nonnegative = true;
        self
    }

    pub fn is_strictified(&self) -> bool {
        self.strictify_count > 0
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    pub fn kind(&self) -> ConstructionKind {
        match self.construction {
            Construction::SupMinorant { .. } => ConstructionKind::SupMinorant,
            Construction::InfConvolution { .. } => ConstructionKind::InfConvolution,
            Construction::ClosedForm(_) => ConstructionKind::ClosedForm,
        }
    }

    /// Whether values are only a lower approximation of the exact construction
    /// (true for a sampled sup-construction).
    pub fn under_approximates(&self) -> bool {
        self.kind() == ConstructionKind::SupMinorant
    }

    /// The boundary datum: `eval(0, y) = phi0().eval(y)`.
    pub fn phi0(&self) -> Oracle {
        match &self.construction {
            Construction::SupMinorant { set, .. } => set.clone(),
            Construction::InfConvolution { phi0, .. } => phi0.clone(),
            Construction::ClosedForm(ClosedForm::Theta { dim })
            | Construction::ClosedForm(ClosedForm::IndicatorPower { dim, .. }) => Arc::new(point_indicator(*dim)),
            Construction::ClosedForm(ClosedForm::Perspective { eta }) => Arc::new(point_indicator(eta.dim())),
            Construction::ClosedForm(ClosedForm::NegLog) => Arc::new(NegLog),
        }
    }

    fn raw(&self, x: f64, y: &[f64]) -> Result<ExtReal> {
        match &self.construction {
            Construction::SupMinorant { set, penalty } => sup_extension(set, penalty, x, y),
            Construction::InfConvolution { phi0, solver } => inf_convolution(phi0.as_ref(), solver, x, y),
            Construction::ClosedForm(form) => match form {
                ClosedForm::Theta { .. } => theta(x, y),
                ClosedForm::IndicatorPower { p, .. } => closed_form_indicator_ext(*p, x, y),
                ClosedForm::Perspective { eta } => closed_form_eta_ext(eta.as_ref(), x, y),
                ClosedForm::NegLog => closed_form_log_ext(x, y[0]),
            },
        }
    }
}

impl HalfSpaceFn for HalfSpaceExtension {
    fn dim(&self) -> usize {
        match &self.construction {
            Construction::SupMinorant { set, .. } => set.dim(),
            Construction::InfConvolution { phi0, .. } => phi0.dim(),
            Construction::ClosedForm(ClosedForm::Theta { dim })
            | Construction::ClosedForm(ClosedForm::IndicatorPower { dim, .. }) => *dim,
            Construction::ClosedForm(ClosedForm::Perspective { eta }) => eta.dim(),
            Construction::ClosedForm(ClosedForm::NegLog) => 1,
        }
    }

    fn eval(&self, x: f64, y: &[f64]) -> Result<ExtReal> {
        check_x(x)?;
        check_dim(self.dim(), y)?;
        let mut v = self.raw(x, y)?;
        if self.clamp_nonnegative {
            v = v.max(ExtReal::ZERO);
        }
        Ok(v + self.strictify_count as f64 * strictifier(x))
    }

    fn label(&self) -> String {
        let base = match &self.construction {
            Construction::SupMinorant { set, penalty } => format!("sup(|S|={}, p={})", set.len(), penalty.p()),
            Construction::InfConvolution { phi0, .. } => format!("infconv({})", phi0.name()),
            Construction::ClosedForm(form) => match form {
                ClosedForm::Theta { .. } => "theta".to_string(),
                ClosedForm::IndicatorPower { p, .. } => format!("closed-indicator(p={p})"),
                ClosedForm::Perspective { eta } => format!("perspective({})", eta.name()),
                ClosedForm::NegLog => "closed-log".to_string(),
            },
        };
        let base = if self.clamp_nonnegative { format!("max({base},0)") } else { base };
        match self.strictify_count {
            0 => base,
            1 => format!("strict({base})"),
            k => format!("strict^{k}({base})"),
        }
    }
}

/// The family `{(0, b)}` with `b` on a uniform grid of `[-radius, radius]^n`
/// (`per_axis` points per coordinate): a finite sample of the exact minorants
/// of `i_{0}`, all of which have slope in `dPhi(0) = R^n`.
pub fn point_indicator_minorants(n: usize, radius: f64, per_axis: usize) -> Result<AffineMinorantSet> {
    if n == 0 || per_axis < 2 || !(radius > 0.0) {
        return Err(Error::Construction("need n >= 1, per_axis >= 2, radius > 0".into()));
    }
    let axis: Vec<f64> =
        (0..per_axis).map(|i| -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<f64>| {
                axis.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    let mut minorants: Vec<_> = out.into_iter().map(|b| crate::convex::AffineMinorant { alpha: 0.0, b }).collect();
    if per_axis % 2 == 0 {
        // keep the exact minorant 0 so that eval(x, 0) = 0
        minorants.push(crate::convex::AffineMinorant { alpha: 0.0, b: vec![0.0; n] });
    }
    AffineMinorantSet::user(minorants)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{builtin_affine, zero, AffineMinorant, EuclideanNorm, Quadratic};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: ExtReal, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol
    }

    #[test]
    fn theta_branches() {
        assert_eq!(theta(1.0, &[2.0, 0.0]).unwrap(), ExtReal::Finite(4.0));
        assert_eq!(theta(0.0, &[0.0, 0.0]).unwrap(), ExtReal::ZERO);
        assert_eq!(theta(0.0, &[1.0, 0.0]).unwrap(), ExtReal::Infinity);
        assert!(matches!(theta(-1.0, &[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn theta_gap_examples() {
        let g = theta_convexity_gap(0.5, (1.0, &[1.0]), (1.0, &[-1.0])).unwrap();
        let c = theta_convexity_gap_closed_form(0.5, (1.0, &[1.0]), (1.0, &[-1.0])).unwrap();
        assert!((g - 1.0).abs() < 1e-15 && (c - 1.0).abs() < 1e-15);
        assert_eq!(theta_convexity_gap(0.0, (0.3, &[1.0]), (2.0, &[-4.0])).unwrap(), 0.0);
        assert_eq!(theta_convexity_gap(0.4, (0.3, &[1.0, 2.0]), (0.3, &[1.0, 2.0])).unwrap(), 0.0);
        assert!(theta_convexity_gap(0.5, (0.0, &[1.0]), (1.0, &[1.0])).is_err());
        assert!(theta_convexity_gap(1.5, (1.0, &[1.0]), (1.0, &[1.0])).is_err());
    }

    #[test]
    fn penalty_constants() {
        let psi = PenaltyFn::new(2.0).unwrap();
        assert!((psi.c_p() - 0.25).abs() < 1e-16);
        assert_eq!(psi.eval(0.0), 0.0);
        assert!(PenaltyFn::new(1.0).is_err());
        // superlinear: psi(t)/t strictly increasing on t = 2^k
        for p in [1.5, 2.0, 3.0, 4.0, 10.0] {
            let psi = PenaltyFn::new(p).unwrap();
            let ratios: Vec<f64> = (1..=40).map(|k| {
                let t = 2f64.powi(k);
                psi.eval(t) / t
            }).collect();
            assert!(ratios.windows(2).all(|w| w[1] > w[0]), "p = {p}");
        }
    }

    #[test]
    fn sup_extension_examples() {
        let psi = PenaltyFn::new(2.0).unwrap();
        let s = AffineMinorantSet::user(vec![AffineMinorant { alpha: 0.0, b: vec![0.0, 0.0] }]).unwrap();
        assert_eq!(sup_extension(&s, &psi, 3.0, &[1.0, -7.0]).unwrap(), ExtReal::ZERO);
        let s = AffineMinorantSet::user(vec![AffineMinorant { alpha: 0.0, b: vec![1.0, 0.0] }]).unwrap();
        assert_eq!(sup_extension(&s, &psi, 1.0, &[3.0, 0.0]).unwrap(), ExtReal::Finite(2.75));
        assert_eq!(sup_extension(&s, &psi, 0.0, &[3.0, 0.0]).unwrap(), ExtReal::Finite(3.0));
    }

    #[test]
    fn sup_extension_of_point_indicator_refines_toward_power_law() {
        // sup_b (b y - c_p |b|^q x) = |y|^p / x^(p-1) with maximizer b = p y^(p-1) / x^(p-1)
        let psi = PenaltyFn::new(2.0).unwrap();
        let (x, y) = (1.0, [0.7]);
        let exact = 0.49;
        let mut prev_err = f64::INFINITY;
        for per_axis in [5, 17, 65, 257] {
            let s = point_indicator_minorants(1, 4.0, per_axis).unwrap();
            let v = sup_extension(&s, &psi, x, &y).unwrap().to_f64();
            assert!(v <= exact + 1e-15);
            let err = exact - v;
            assert!(err <= prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-4);
        let psi4 = PenaltyFn::new(4.0).unwrap();
        let s = point_indicator_minorants(2, 6.0, 121).unwrap();
        let v = sup_extension(&s, &psi4, 0.5, &[0.5, 0.3]).unwrap().to_f64();
        let exact = closed_form_indicator_ext(4.0, 0.5, &[0.5, 0.3]).unwrap().to_f64();
        assert!(v <= exact + 1e-12 && exact - v < 2e-3, "{v} {exact}");
    }

    #[test]
    fn inf_convolution_examples() {
        let cfg2 = InnerSolverConfig::for_dim(2);
        let v = inf_convolution(&point_indicator(2), &cfg2, 1.0, &[2.0, 0.0]).unwrap();
        assert!(close(v, 4.0, 1e-12));
        assert_eq!(inf_convolution(&point_indicator(2), &cfg2, 0.0, &[2.0, 0.0]).unwrap(), ExtReal::Infinity);
        let a = builtin_affine(0.5, vec![1.0, -3.0]);
        let v = inf_convolution(&a, &cfg2, 0.4, &[0.2, 0.1]).unwrap();
        assert!(close(v, 0.5 + 0.2 - 0.3 - 10.0 * 0.4 / 4.0, 1e-12));
        let v = inf_convolution(&zero(3), &InnerSolverConfig::for_dim(3), 2.0, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(v, ExtReal::ZERO);
        assert!(inf_convolution(&zero(1), &InnerSolverConfig::for_dim(1), -1.0, &[0.0]).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_form_indicator_ext(4.0, 1.0, &[1.0, 0.0]).unwrap(), ExtReal::Finite(1.0));
        assert_eq!(closed_form_indicator_ext(2.0, 2.0, &[0.0, 0.0]).unwrap(), ExtReal::ZERO);
        assert_eq!(closed_form_indicator_ext(3.0, 0.0, &[1.0, 0.0]).unwrap(), ExtReal::Infinity);

        let sq = Quadratic::new(1.0, vec![0.0]).unwrap();
        assert!(close(closed_form_eta_ext(&sq, 1.0, &[3.0]).unwrap(), 9.0, 1e-14));
        assert_eq!(closed_form_eta_ext(&sq, 0.0, &[0.0]).unwrap(), ExtReal::ZERO);
        let quartic = crate::convex::FnOracle::new("quartic", vec![0.0], |y| ExtReal::Finite(y[0].powi(4))).unwrap();
        assert!(close(closed_form_eta_ext(&quartic, 2.0, &[2.0]).unwrap(), 2.0, 1e-14));

        let v = closed_form_log_ext(1.0, 0.0).unwrap().to_f64();
        assert!((v - (0.5 * 2f64.ln() + 0.5)).abs() < 1e-15);
        assert!((v - 0.846574).abs() < 1e-6);
        assert_eq!(closed_form_log_ext(0.0, 1.0).unwrap(), ExtReal::ZERO);
        assert_eq!(closed_form_log_ext(0.0, -1.0).unwrap(), ExtReal::Infinity);
        // monotone approach to -ln 1 = 0 from below
        let vals: Vec<f64> = (1..=40).map(|k| closed_form_log_ext(2f64.powi(-k), 1.0).unwrap().to_f64()).collect();
        assert!(vals.iter().all(|v| *v <= 0.0));
        assert!(vals.windows(2).all(|w| w[1] >= w[0]));
        assert!(vals[39].abs() < 1e-11);
    }

    #[test]
    fn log_closed_form_is_stable_against_the_naive_formula() {
        let naive = |x: f64, y: f64| {
            let s = (y * y + 2.0 * x).sqrt();
            -(0.5 * (y + s)).ln() + (s - y).powi(2) / (4.0 * x)
        };
        for (x, y) in [(1.0, 0.3), (0.5, -1.0), (2.0, 2.5), (0.1, 0.2)] {
            let v = closed_form_log_ext(x, y).unwrap().to_f64();
            assert!((v - naive(x, y)).abs() < 1e-13);
        }
    }

    #[test]
    fn strictify_examples() {
        let c = HalfSpaceExtension::inf_convolution(Arc::new(zero(1)), InnerSolverConfig::for_dim(1))
            .unwrap()
            .strictify();
        assert!(c.is_strictified());
        assert!(close(c.eval(1.0, &[0.3]).unwrap(), -0.5, 1e-15));
        assert_eq!(c.eval(0.0, &[0.3]).unwrap(), ExtReal::ZERO);
        // midpoint gap along (1,y)-(3,y) is at least the gap of -x/(x+1), 1/24
        let f = |x: f64| c.eval(x, &[0.3]).unwrap().to_f64();
        let gap = 0.5 * f(1.0) + 0.5 * f(3.0) - f(2.0);
        assert!((gap - 1.0 / 24.0).abs() < 1e-15);
        let sq = HalfSpaceExtension::inf_convolution(
            Arc::new(Quadratic::new(1.0, vec![0.0]).unwrap()),
            InnerSolverConfig::for_dim(1),
        )
        .unwrap()
        .strictify();
        let f = |x: f64| sq.eval(x, &[0.7]).unwrap().to_f64();
        assert!(0.5 * f(1.0) + 0.5 * f(3.0) - f(2.0) >= 1.0 / 24.0 - 1e-12);
    }

    #[test]
    fn extension_object_boundary_values_and_labels() {
        let ext = HalfSpaceExtension::closed_form(ClosedForm::NegLog).unwrap();
        assert_eq!(ext.phi0().name(), "neglog");
        assert_eq!(ext.eval(0.0, &[1.0]).unwrap(), ExtReal::ZERO);
        assert_eq!(ext.label(), "closed-log");
        let s = point_indicator_minorants(1, 2.0, 4).unwrap();
        let sup = HalfSpaceExtension::sup_minorant(s, PenaltyFn::new(2.0).unwrap());
        assert!(sup.under_approximates());
        assert_eq!(sup.eval(0.5, &[0.0]).unwrap(), ExtReal::ZERO);
        assert!(HalfSpaceExtension::inf_convolution(Arc::new(point_indicator(2)), InnerSolverConfig::for_dim(1)).is_err());
        assert!(ext.eval(-0.1, &[1.0]).is_err());
        assert!(ext.eval(0.1, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn clamp_keeps_values_nonnegative() {
        let ext = HalfSpaceExtension::closed_form(ClosedForm::NegLog).unwrap().clamp_nonnegative();
        assert_eq!(ext.eval(1.0, &[5.0]).unwrap(), ExtReal::ZERO);
    }

    /// Affine lower bound and witness upper bound around the inf-convolution.
    #[test]
    fn inf_convolution_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let phi = crate::convex::NegLog;
        let minorants = crate::convex::build_minorant_set(&phi, &[vec![0.3], vec![1.0], vec![4.0]]).unwrap();
        let cfg = InnerSolverConfig::for_dim(1);
        for _ in 0..2000 {
            let x = rng.gen_range(1e-3..3.0);
            let y = rng.gen_range(-3.0..5.0);
            let v = inf_convolution(&phi, &cfg, x, &[y]).unwrap().to_f64();
            for m in minorants.minorants() {
                assert!(v >= m.at(&[y]) - m.b[0] * m.b[0] * x / 4.0 - 1e-10);
            }
            assert!(v <= 0.0 + (y - 1.0) * (y - 1.0) / x + 1e-10);
        }
    }

    #[test]
    fn inf_convolution_of_abs_is_huber() {
        let cfg = InnerSolverConfig::for_dim(1);
        let phi = EuclideanNorm { dim: 1 };
        for (x, y) in [(1.0, 0.2), (1.0, 3.0), (0.2, -0.05), (4.0, -5.0)] {
            let v = inf_convolution(&phi, &cfg, x, &[y]).unwrap().to_f64();
            let huber = if y.abs() <= x / 2.0 { y * y / x } else { y.abs() - x / 4.0 };
            assert!((v - huber).abs() < 1e-11, "{x} {y}: {v} vs {huber}");
        }
    }
}
