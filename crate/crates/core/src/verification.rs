//! Randomized property harness for half-space extensions.
//!
//! Every check is deterministic in `(seed, trials, region)`: trial `i` draws
//! from its own ChaCha stream, so reports do not depend on evaluation order.
//! Convexity-type violations are measured on the scale `max(1, |values|)`,
//! which makes the tolerance absolute for values of order one and relative
//! for large ones.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convex::ConvexOracle;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::extension::HalfSpaceFn;
use crate::vecops::{dist_sq, lerp};

/// Values beyond this count as divergence to `+inf`.
pub const DIVERGENCE_BOUND: f64 = 1e6;

const RESAMPLE_BUDGET: usize = 1000;

/// Axis-aligned box in `[0, inf) x R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub x: (f64, f64),
    pub y: Vec<(f64, f64)>,
}

impl Region {
    pub fn new(x: (f64, f64), y: Vec<(f64, f64)>) -> Result<Self> {
        if !(x.0 >= 0.0 && x.0 <= x.1 && x.1.is_finite()) {
            return Err(Error::Config(format!("bad x-range {x:?}")));
        }
        if y.is_empty() || y.iter().any(|r| !(r.0 <= r.1) || !r.0.is_finite() || !r.1.is_finite()) {
            return Err(Error::Config(format!("bad y-ranges {y:?}")));
        }
        Ok(Region { x, y })
    }

    /// `[x_lo, x_hi] x [y_lo, y_hi]^n`
    pub fn cube(x: (f64, f64), y: (f64, f64), n: usize) -> Result<Self> {
        Self::new(x, vec![y; n])
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Point {
        (uniform(rng, self.x), self.y.iter().map(|r| uniform(rng, *r)).collect())
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

pub type Point = (f64, Vec<f64>);

pub(crate) fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

/// A segment with the convex weights tested on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSample {
    pub p1: Point,
    pub p2: Point,
    pub lambdas: Vec<f64>,
}

impl SegmentSample {
    pub fn new(p1: Point, p2: Point, lambdas: Vec<f64>) -> Result<Self> {
        if p1 == p2 {
            return Err(Error::Precondition("degenerate segment".into()));
        }
        if lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::Precondition("weights must lie in [0, 1]".into()));
        }
        Ok(SegmentSample { p1, p2, lambdas })
    }

    pub fn at(&self, lam: f64) -> Point {
        (lam * self.p1.0 + (1.0 - lam) * self.p2.0, lerp(lam, &self.p1.1, &self.p2.1))
    }

    pub fn length_sq(&self) -> f64 {
        let dx = self.p1.0 - self.p2.0;
        dx * dx + dist_sq(&self.p1.1, &self.p2.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Property {
    Convexity,
    StrictConvexity,
    Nonincreasing,
    StrictlyDecreasing,
    BoundaryLimit,
    SequenceLsc,
    SequenceContinuity,
    Agreement,
    Bound,
    XOnlyDependence,
    FrameIndifference,
    Isotropy,
    ZeroHull,
    Named(String),
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Property::Convexity => "convexity",
            Property::StrictConvexity => "strict-convexity",
            Property::Nonincreasing => "nonincreasing-in-x",
            Property::StrictlyDecreasing => "strictly-decreasing-in-x",
            Property::BoundaryLimit => "boundary-limit",
            Property::SequenceLsc => "sequence-lsc",
            Property::SequenceContinuity => "sequence-continuity",
            Property::Agreement => "agreement",
            Property::Bound => "bound",
            Property::XOnlyDependence => "x-only-dependence",
            Property::FrameIndifference => "frame-indifference",
            Property::Isotropy => "isotropy",
            Property::ZeroHull => "zero-hull",
            Property::Named(s) => s,
        };
        f.write_str(s)
    }
}

/// The offending sample of a failed (or worst) trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub points: Vec<Point>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub property: Property,
    pub subject: String,
    pub trials: usize,
    pub worst_violation: f64,
    pub tolerance: f64,
    /// Strict properties pass only when `worst_violation < tolerance`.
    pub strict: bool,
    pub witness: Option<Witness>,
    pub passed: bool,
}

impl PropertyReport {
    pub fn new(
        property: Property,
        subject: impl Into<String>,
        trials: usize,
        worst_violation: f64,
        tolerance: f64,
        strict: bool,
        witness: Option<Witness>,
    ) -> Self {
        let passed = if strict { worst_violation < tolerance } else { worst_violation <= tolerance };
        PropertyReport {
            property,
            subject: subject.into(),
            trials,
            worst_violation,
            tolerance,
            strict,
            witness: if passed { None } else { witness },
            passed,
        }
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} [{}] trials={} worst={:.6e} tol{}{:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.property,
            self.subject,
            self.trials,
            self.worst_violation,
            if self.strict { "<" } else { "<=" },
            self.tolerance
        )?;
        if let Some(w) = &self.witness {
            write!(f, "\n    witness: {}", w.detail)?;
            for (x, y) in &w.points {
                write!(f, "\n      (x={x:.17e}, y={y:?})")?;
            }
        }
        Ok(())
    }
}

struct Worst {
    value: f64,
    witness: Option<Witness>,
}

impl Worst {
    fn new() -> Self {
        Worst { value: f64::NEG_INFINITY, witness: None }
    }

    fn offer(&mut self, v: f64, w: impl FnOnce() -> Witness) {
        if v > self.value || (v.is_nan() && !self.value.is_nan()) {
            self.value = v;
            self.witness = Some(w());
        }
    }
}

fn finite_at(f: &dyn HalfSpaceFn, p: &Point) -> Result<Option<f64>> {
    Ok(f.eval(p.0, &p.1)?.finite())
}

fn check_region(f: &dyn HalfSpaceFn, region: &Region, trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be >= 1".into()));
    }
    if f.dim() != region.dim() {
        return Err(Error::Dimension { expected: f.dim(), got: region.dim() });
    }
    Ok(())
}

/// Draws two distinct points with finite values, resampling up to a budget.
fn finite_pair(f: &dyn HalfSpaceFn, region: &Region, rng: &mut ChaCha8Rng) -> Result<(Point, f64, Point, f64)> {
    for _ in 0..RESAMPLE_BUDGET {
        let p1 = region.sample(rng);
        let p2 = region.sample(rng);
        if p1 == p2 {
            continue;
        }
        if let (Some(f1), Some(f2)) = (finite_at(f, &p1)?, finite_at(f, &p2)?) {
            return Ok((p1, f1, p2, f2));
        }
    }
    Err(Error::Sampling(format!(
        "no segment with finite endpoint values of {} after {RESAMPLE_BUDGET} draws",
        f.label()
    )))
}

/// Worst `f(l p1 + (1-l) p2) - l f(p1) - (1-l) f(p2)` over random segments.
pub fn check_convexity(
    f: &dyn HalfSpaceFn,
    region: &Region,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<PropertyReport> {
    check_region(f, region, trials)?;
    let mut worst = Worst::new();
    for i in 0..trials {
        let mut rng = trial_rng(seed, i);
        let (p1, f1, p2, f2) = finite_pair(f, region, &mut rng)?;
        let lam: f64 = rng.gen_range(0.0..=1.0);
        let seg = SegmentSample::new(p1, p2, vec![lam])?;
        let mid = seg.at(lam);
        let chord = lam * f1 + (1.0 - lam) * f2;
        let v = match f.eval(mid.0, &mid.1)? {
            ExtReal::Finite(fm) => (fm - chord) / (lam * f1.abs() + (1.0 - lam) * f2.abs()).max(fm.abs()).max(1.0),
            ExtReal::Infinity => f64::INFINITY,
        };
        worst.offer(v, || Witness {
            points: vec![seg.p1.clone(), seg.p2.clone(), mid.clone()],
            detail: format!("lambda={lam:.17e} f(p1)={f1:e} f(p2)={f2:e}"),
        });
    }
    Ok(PropertyReport::new(Property::Convexity, f.label(), trials, worst.value, tol, false, worst.witness))
}

/// Requires the midpoint gap to exceed `gap_floor * |p1 - p2|^2` on every
/// sampled segment. The reported violation is `gap_floor |p1-p2|^2 - gap`.
pub fn check_strict_convexity(
    f: &dyn HalfSpaceFn,
    region: &Region,
    trials: usize,
    gap_floor: f64,
    seed: u64,
) -> Result<PropertyReport> {
    check_region(f, region, trials)?;
    if !(region.x.0 > 0.0) {
        return Err(Error::Precondition("strict convexity is only tested on x > 0".into()));
    }
    let mut worst = Worst::new();
    for i in 0..trials {
        let mut rng = trial_rng(seed, i);
        let (p1, f1, p2, f2) = finite_pair(f, region, &mut rng)?;
        let seg = SegmentSample::new(p1, p2, vec![0.5])?;
        let mid = seg.at(0.5);
        let gap = match f.eval(mid.0, &mid.1)? {
            ExtReal::Finite(fm) => 0.5 * (f1 + f2) - fm,
            ExtReal::Infinity => f64::NEG_INFINITY,
        };
        let v = gap_floor * seg.length_sq() - gap;
        worst.offer(v, || Witness {
            points: vec![seg.p1.clone(), seg.p2.clone()],
            detail: format!("midpoint gap {gap:e}, |p1-p2|^2 = {:e}", seg.length_sq()),
        });
    }
    Ok(PropertyReport::new(Property::StrictConvexity, f.label(), trials, worst.value, 0.0, true, worst.witness))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Nonincreasing,
    StrictlyDecreasing,
}

/// For random `y` and `x1 < x2`, requires `f(x2, y) <= f(x1, y) + tol`, or
/// `f(x2, y) < f(x1, y)` in strict mode.
pub fn check_monotone_in_x(
    f: &dyn HalfSpaceFn,
    region: &Region,
    trials: usize,
    tol: f64,
    seed: u64,
    mode: Monotonicity,
) -> Result<PropertyReport> {
    let worst = monotone_worst(f, region, trials, seed)?;
    Ok(monotone_report(f, trials, tol, mode, worst))
}

/// Both monotonicity reports from one set of samples (the samples are those
/// of [`check_monotone_in_x`] with the same seed).
pub fn check_monotonicity(
    f: &dyn HalfSpaceFn,
    region: &Region,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<(PropertyReport, PropertyReport)> {
    let worst = monotone_worst(f, region, trials, seed)?;
    let copy = Worst { value: worst.value, witness: worst.witness.clone() };
    Ok((
        monotone_report(f, trials, tol, Monotonicity::Nonincreasing, worst),
        monotone_report(f, trials, tol, Monotonicity::StrictlyDecreasing, copy),
    ))
}

fn monotone_report(f: &dyn HalfSpaceFn, trials: usize, tol: f64, mode: Monotonicity, worst: Worst) -> PropertyReport {
    let (property, tolerance, strict) = match mode {
        Monotonicity::Nonincreasing => (Property::Nonincreasing, tol, false),
        Monotonicity::StrictlyDecreasing => (Property::StrictlyDecreasing, 0.0, true),
    };
    PropertyReport::new(property, f.label(), trials, worst.value, tolerance, strict, worst.witness)
}

/// Largest relative `f(x2, y) - f(x1, y)` over random `y`, `x1 < x2`.
fn monotone_worst(f: &dyn HalfSpaceFn, region: &Region, trials: usize, seed: u64) -> Result<Worst> {
    check_region(f, region, trials)?;
    if region.x.0 == region.x.1 {
        return Err(Error::Precondition("x-range must be nondegenerate".into()));
    }
    let mut worst = Worst::new();
    for i in 0..trials {
        let mut rng = trial_rng(seed, i);
        let (a, y) = region.sample(&mut rng);
        let mut b = uniform(&mut rng, region.x);
        while b == a {
            b = uniform(&mut rng, region.x);
        }
        let (x1, x2) = if a < b { (a, b) } else { (b, a) };
        let (v1, v2) = (f.eval(x1, &y)?, f.eval(x2, &y)?);
        let v = match (v1, v2) {
            (ExtReal::Finite(f1), ExtReal::Finite(f2)) => (f2 - f1) / f1.abs().max(f2.abs()).max(1.0),
            (ExtReal::Infinity, ExtReal::Finite(_)) => f64::NEG_INFINITY,
            (ExtReal::Finite(_), ExtReal::Infinity) => f64::INFINITY,
            (ExtReal::Infinity, ExtReal::Infinity) => 0.0,
        };
        worst.offer(v, || Witness {
            points: vec![(x1, y.clone()), (x2, y.clone())],
            detail: format!("f(x1,y)={v1} f(x2,y)={v2}"),
        });
    }
    Ok(worst)
}

/// Boundary behaviour along `x = 2^-k`, `k = 0..=k_max`.
///
/// Where `Phi(y)` is finite the error `|f(2^-k, y) - Phi(y)|` must reach `tol`
/// and be nonincreasing (up to `tol`) over the second half of the sequence;
/// where `Phi(y) = +inf` the values must exceed [`DIVERGENCE_BOUND`].
pub fn check_boundary_limit(
    f: &dyn HalfSpaceFn,
    phi0: &dyn ConvexOracle,
    y_points: &[Vec<f64>],
    k_max: u32,
    tol: f64,
) -> Result<PropertyReport> {
    if k_max < 4 {
        return Err(Error::Precondition("k_max must be >= 4".into()));
    }
    if y_points.is_empty() {
        return Err(Error::Precondition("no boundary points".into()));
    }
    let mut worst = Worst::new();
    for y in y_points {
        let xs: Vec<f64> = (0..=k_max).map(|k| 2f64.powi(-(k as i32))).collect();
        let vals = xs.iter().map(|x| f.eval(*x, y)).collect::<Result<Vec<_>>>()?;
        match phi0.eval(y) {
            ExtReal::Finite(target) => {
                let errs: Vec<f64> = vals.iter().map(|v| (v.to_f64() - target).abs()).collect();
                let reached = errs.iter().copied().fold(f64::INFINITY, f64::min);
                let tail = (k_max / 2) as usize;
                let rise = errs[tail..].windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
                let v = reached.max(rise);
                worst.offer(v, || Witness {
                    points: vec![(xs[k_max as usize], y.clone())],
                    detail: format!("Phi(y)={target:e}, min error {reached:e}, largest tail increase {rise:e}"),
                });
            }
            ExtReal::Infinity => {
                let top = vals.iter().map(|v| v.to_f64()).fold(f64::NEG_INFINITY, f64::max);
                let v = if top > DIVERGENCE_BOUND { 0.0 } else { f64::INFINITY };
                worst.offer(v, || Witness {
                    points: vec![(xs[k_max as usize], y.clone())],
                    detail: format!("Phi(y)=inf but largest value {top:e} <= {DIVERGENCE_BOUND:e}"),
                });
            }
        }
    }
    Ok(PropertyReport::new(Property::BoundaryLimit, f.label(), y_points.len(), worst.value, tol, false, worst.witness))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    /// `liminf f(x_j, y_j) >= Phi(y) - tol`
    Lsc,
    /// `f(x_j, y_j) -> Phi(y)` within `tol`
    Continuity,
}

/// Checks the behaviour of `f` along a sequence converging to `(0, y)`.
///
/// The liminf is estimated by the minimum over the second half of the
/// sequence and the limit by its last element.
pub fn check_sequence_lsc(
    f: &dyn HalfSpaceFn,
    sequence: &[Point],
    y: &[f64],
    phi0: &dyn ConvexOracle,
    tol: f64,
    mode: LimitMode,
) -> Result<PropertyReport> {
    if sequence.len() < 2 {
        return Err(Error::Precondition("sequence needs at least two points".into()));
    }
    let vals = sequence.iter().map(|(x, yy)| f.eval(*x, yy).map(|v| v.to_f64())).collect::<Result<Vec<_>>>()?;
    let tail = &vals[vals.len() / 2..];
    let last = *vals.last().expect("nonempty");
    let property = match mode {
        LimitMode::Lsc => Property::SequenceLsc,
        LimitMode::Continuity => Property::SequenceContinuity,
    };
    let v = match (phi0.eval(y), mode) {
        (ExtReal::Infinity, _) => {
            if last > DIVERGENCE_BOUND {
                0.0
            } else {
                f64::INFINITY
            }
        }
        (ExtReal::Finite(target), LimitMode::Lsc) => {
            let liminf = tail.iter().copied().fold(f64::INFINITY, f64::min);
            target - liminf
        }
        (ExtReal::Finite(target), LimitMode::Continuity) => (last - target).abs(),
    };
    let witness = Witness {
        points: vec![sequence.last().cloned().expect("nonempty")],
        detail: format!("Phi(y)={}, last value {last:e}", phi0.eval(y)),
    };
    Ok(PropertyReport::new(property, f.label(), sequence.len(), v, tol, false, Some(witness)))
}

/// `max |f - g|` over the given points (both must be finite or both `+inf`).
pub fn check_agreement(
    f: &dyn HalfSpaceFn,
    g: &dyn HalfSpaceFn,
    points: &[Point],
    tol: f64,
) -> Result<PropertyReport> {
    let mut worst = Worst::new();
    for p in points {
        let (a, b) = (f.eval(p.0, &p.1)?, g.eval(p.0, &p.1)?);
        let v = match (a, b) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs(),
            (ExtReal::Infinity, ExtReal::Infinity) => 0.0,
            _ => f64::INFINITY,
        };
        worst.offer(v, || Witness { points: vec![p.clone()], detail: format!("{a} vs {b}") });
    }
    let subject = format!("{} vs {}", f.label(), g.label());
    Ok(PropertyReport::new(Property::Agreement, subject, points.len(), worst.value, tol, false, worst.witness))
}

/// `f >= lower - tol` on all points.
pub fn check_lower_bound(
    f: &dyn HalfSpaceFn,
    lower: &dyn HalfSpaceFn,
    points: &[Point],
    tol: f64,
) -> Result<PropertyReport> {
    let mut worst = Worst::new();
    for p in points {
        let (a, b) = (f.eval(p.0, &p.1)?, lower.eval(p.0, &p.1)?);
        let v = match (a, b) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => b - a,
            (ExtReal::Infinity, _) => f64::NEG_INFINITY,
            (ExtReal::Finite(_), ExtReal::Infinity) => f64::INFINITY,
        };
        worst.offer(v, || Witness { points: vec![p.clone()], detail: format!("{a} < {b}") });
    }
    let subject = format!("{} >= {}", f.label(), lower.label());
    Ok(PropertyReport::new(Property::Bound, subject, points.len(), worst.value, tol, false, worst.witness))
}

/// For each `x` in `xs`, the largest `|f(x, y) - f(x, y')|` over random pairs
/// in the region's `y`-box.
pub fn check_x_only_dependence(
    f: &dyn HalfSpaceFn,
    region: &Region,
    xs: &[f64],
    pairs: usize,
    tol: f64,
    seed: u64,
) -> Result<PropertyReport> {
    check_region(f, region, pairs)?;
    let mut worst = Worst::new();
    for (ix, &x) in xs.iter().enumerate() {
        for i in 0..pairs {
            let mut rng = trial_rng(seed, ix * pairs + i);
            let (_, y1) = region.sample(&mut rng);
            let (_, y2) = region.sample(&mut rng);
            let (a, b) = (f.eval(x, &y1)?, f.eval(x, &y2)?);
            let v = match (a, b) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs(),
                (ExtReal::Infinity, ExtReal::Infinity) => 0.0,
                _ => f64::INFINITY,
            };
            worst.offer(v, || Witness { points: vec![(x, y1.clone()), (x, y2.clone())], detail: format!("{a} vs {b}") });
        }
    }
    Ok(PropertyReport::new(
        Property::XOnlyDependence,
        f.label(),
        xs.len() * pairs,
        worst.value,
        tol,
        false,
        worst.witness,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{point_indicator, zero, NegLog, Quadratic};
    use crate::extension::{ClosedForm, FnExtension, HalfSpaceExtension, InnerSolverConfig};
    use std::sync::Arc;

    fn theta(n: usize) -> HalfSpaceExtension {
        HalfSpaceExtension::closed_form(ClosedForm::Theta { dim: n }).unwrap()
    }

    fn infconv(phi: crate::convex::Oracle) -> HalfSpaceExtension {
        let n = phi.dim();
        HalfSpaceExtension::inf_convolution(phi, InnerSolverConfig::for_dim(n)).unwrap()
    }

    #[test]
    fn theta_is_convex() {
        let r = Region::cube((0.0, 2.0), (-2.0, 2.0), 1).unwrap();
        let rep = check_convexity(&theta(1), &r, 10_000, 1e-10, 1).unwrap();
        assert!(rep.passed, "{rep}");
        assert!(rep.worst_violation <= 1e-10);
    }

    #[test]
    fn concave_function_fails_with_witness() {
        let f = FnExtension::new(1, "-|y|", |_, y| Ok(ExtReal::Finite(-y[0].abs())));
        let r = Region::cube((0.0, 2.0), (-2.0, 2.0), 1).unwrap();
        let rep = check_convexity(&f, &r, 500, 1e-10, 1).unwrap();
        assert!(!rep.passed);
        let w = rep.witness.as_ref().unwrap();
        assert_eq!(w.points.len(), 3);
        assert!(rep.to_string().starts_with("FAIL convexity"));
    }

    #[test]
    fn affine_has_zero_violation() {
        let f = FnExtension::new(2, "affine", |x, y| Ok(ExtReal::Finite(1.0 + 2.0 * x - y[0] + 0.5 * y[1])));
        let r = Region::cube((0.0, 2.0), (-2.0, 2.0), 2).unwrap();
        let rep = check_convexity(&f, &r, 2000, 1e-12, 9).unwrap();
        assert!(rep.passed && rep.worst_violation.abs() < 1e-14, "{rep}");
    }

    #[test]
    fn reports_are_deterministic() {
        let r = Region::cube((0.0, 2.0), (-2.0, 2.0), 1).unwrap();
        let a = check_convexity(&theta(1), &r, 300, 1e-10, 42).unwrap();
        let b = check_convexity(&theta(1), &r, 300, 1e-10, 42).unwrap();
        assert_eq!(a, b);
        let c = check_convexity(&theta(1), &r, 300, 1e-10, 43).unwrap();
        assert_ne!(a.worst_violation, c.worst_violation);
    }

    #[test]
    fn all_infinite_region_is_an_error() {
        let f = FnExtension::new(1, "inf", |_, _| Ok(ExtReal::Infinity));
        let r = Region::cube((0.0, 1.0), (-1.0, 1.0), 1).unwrap();
        assert!(matches!(check_convexity(&f, &r, 3, 0.0, 0), Err(Error::Sampling(_))));
    }

    #[test]
    fn strict_convexity_examples() {
        let sq = infconv(Arc::new(Quadratic::new(1.0, vec![0.0]).unwrap())).strictify();
        let r = Region::cube((0.1, 2.0), (-2.0, 2.0), 1).unwrap();
        let rep = check_strict_convexity(&sq, &r, 2000, 1e-8, 3).unwrap();
        assert!(rep.passed, "{rep}");

        // Phi = 0: depends on x only, so segments varying y have zero gap
        let z = infconv(Arc::new(zero(1))).strictify();
        let r_y = Region::new((1.0, 1.0), vec![(-2.0, 2.0)]).unwrap();
        let rep = check_strict_convexity(&z, &r_y, 50, 1e-8, 3).unwrap();
        assert!(!rep.passed);

        // theta is linear along rays through the origin
        let ray = FnExtension::new(1, "theta on a ray", |x, _| theta(1).eval(x, &[2.0 * x]));
        let r_ray = Region::new((0.1, 2.0), vec![(0.0, 0.0)]).unwrap();
        let rep = check_strict_convexity(&ray, &r_ray, 50, 1e-8, 3).unwrap();
        assert!(!rep.passed);

        assert!(check_strict_convexity(&sq, &Region::cube((0.0, 1.0), (0.0, 1.0), 1).unwrap(), 5, 1e-8, 0).is_err());
    }

    #[test]
    fn monotonicity_examples() {
        let r = Region::cube((0.0, 2.0), (-2.0, 3.0), 1).unwrap();
        let ln = infconv(Arc::new(NegLog));
        assert!(check_monotone_in_x(&ln, &r, 2000, 1e-12, 5, Monotonicity::Nonincreasing).unwrap().passed);
        let strict = ln.clone().strictify();
        assert!(check_monotone_in_x(&strict, &r, 2000, 0.0, 5, Monotonicity::StrictlyDecreasing).unwrap().passed);
        // without the strictifier Phi = 0 is constant in x
        let z = infconv(Arc::new(zero(1)));
        assert!(!check_monotone_in_x(&z, &r, 100, 0.0, 5, Monotonicity::StrictlyDecreasing).unwrap().passed);
        let (a, b) = check_monotonicity(&strict, &r, 500, 1e-12, 5).unwrap();
        assert_eq!(a, check_monotone_in_x(&strict, &r, 500, 1e-12, 5, Monotonicity::Nonincreasing).unwrap());
        assert_eq!(b, check_monotone_in_x(&strict, &r, 500, 1e-12, 5, Monotonicity::StrictlyDecreasing).unwrap());
        let inc = FnExtension::new(1, "x", |x, _| Ok(ExtReal::Finite(x)));
        assert!(!check_monotone_in_x(&inc, &r, 100, 1e-12, 5, Monotonicity::Nonincreasing).unwrap().passed);
    }

    #[test]
    fn boundary_limit_examples() {
        let log = HalfSpaceExtension::closed_form(ClosedForm::NegLog).unwrap();
        let rep = check_boundary_limit(&log, &NegLog, &[vec![1.0]], 20, 1e-5).unwrap();
        assert!(rep.passed, "{rep}");
        let th = theta(2);
        let i0 = point_indicator(2);
        let rep = check_boundary_limit(&th, &i0, &[vec![0.0, 0.0], vec![1.0, 0.0]], 30, 1e-12).unwrap();
        assert!(rep.passed, "{rep}");
        // 2^k stays below 10^6 up to k = 19
        let rep = check_boundary_limit(&th, &i0, &[vec![1.0, 0.0]], 19, 1e-12).unwrap();
        assert!(!rep.passed);
        assert!(check_boundary_limit(&th, &i0, &[vec![1.0, 0.0]], 3, 1e-12).is_err());
    }

    #[test]
    fn sequence_examples() {
        let ln = infconv(Arc::new(NegLog));
        let seq: Vec<Point> = (1..=2000).map(|j| (1.0 / j as f64, vec![1.0 + 1.0 / j as f64])).collect();
        let rep = check_sequence_lsc(&ln, &seq, &[1.0], &NegLog, 1e-3, LimitMode::Continuity).unwrap();
        assert!(rep.passed, "{rep}");

        let th = theta(1);
        let i0 = point_indicator(1);
        let seq: Vec<Point> = (1..=1000).map(|j| (1.0 / j as f64, vec![1.0 / j as f64])).collect();
        assert!(check_sequence_lsc(&th, &seq, &[0.0], &i0, 1e-2, LimitMode::Continuity).unwrap().passed);

        let seq: Vec<Point> = (1..=1000).map(|j| (1.0 / (j * j) as f64, vec![1.0 / j as f64])).collect();
        assert!(check_sequence_lsc(&th, &seq, &[0.0], &i0, 1e-6, LimitMode::Lsc).unwrap().passed);
        assert!(!check_sequence_lsc(&th, &seq, &[0.0], &i0, 1e-6, LimitMode::Continuity).unwrap().passed);
    }

    #[test]
    fn x_only_dependence_for_zero_datum() {
        let z = infconv(Arc::new(zero(3)));
        let r = Region::cube((0.0, 1.0), (-5.0, 5.0), 3).unwrap();
        let rep = check_x_only_dependence(&z, &r, &[0.1, 1.0, 3.0], 100, 1e-8, 2).unwrap();
        assert!(rep.passed && rep.worst_violation == 0.0, "{rep}");
        let rep = check_x_only_dependence(&theta(3), &r, &[1.0], 10, 1e-8, 2).unwrap();
        assert!(!rep.passed);
    }
}
