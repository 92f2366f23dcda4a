//! Inner solvers for the Moreau-type subproblem
//!
//! ```text
//! minimize  h(z) = Phi(z) + |y - z|^2 / x     over z in R^n,  x > 0
//! ```
//!
//! `h` is strongly convex with modulus `2/x`, which gives the stopping
//! certificates used below:
//!
//! * 1-D bracketing: if `z*` lies in `[a, b]` and `g` is a subgradient of `h`
//!   at an endpoint `e`, then `h(e) - h* <= |g| (b - a)`.
//! * n-D first-order: `h(z) - h* <= x |G|^2 / 4` with `G` the (projected)
//!   gradient at `z`.

use crate::convex::{ConvexOracle, ConvexSet};
use crate::error::{Error, Result};
use crate::vecops::{axpy, dist_sq, dot, norm_sq};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    /// Bracketing on the monotone slope `b(z) + 2 (z - y) / x` (1-D only).
    Bisection1d,
    /// Projected gradient steps with backtracking.
    ProjectedSubgradient,
    /// Accelerated projected gradient with backtracking and adaptive restart.
    AcceleratedProximal,
}

impl SolverMethod {
    pub fn tag(self) -> &'static str {
        match self {
            SolverMethod::Bisection1d => "bisection-1d",
            SolverMethod::ProjectedSubgradient => "projected-subgradient",
            SolverMethod::AcceleratedProximal => "accelerated-proximal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSolverConfig {
    pub abs_tol: f64,
    pub max_iters: usize,
    pub method: SolverMethod,
}

impl InnerSolverConfig {
    pub fn new(abs_tol: f64, max_iters: usize, method: SolverMethod) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(Error::Config(format!("abs_tol must be > 0, got {abs_tol}")));
        }
        if max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        Ok(InnerSolverConfig { abs_tol, max_iters, method })
    }

    /// Bracketing in 1-D, accelerated first-order otherwise.
    pub fn for_dim(n: usize) -> Self {
        let method =
            if n == 1 { SolverMethod::Bisection1d } else { SolverMethod::AcceleratedProximal };
        InnerSolverConfig { abs_tol: 1e-12, max_iters: 20_000, method }
    }

    pub fn with_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxSolution {
    pub value: f64,
    pub minimizer: Vec<f64>,
    /// Upper bound on `value - min h`.
    pub residual: f64,
    pub iters: usize,
}

pub fn solve(phi: &dyn ConvexOracle, x: f64, y: &[f64], cfg: &InnerSolverConfig) -> Result<ProxSolution> {
    debug_assert!(x > 0.0);
    match cfg.method {
        SolverMethod::Bisection1d => {
            if y.len() != 1 {
                return Err(Error::Config("bisection-1d needs n = 1".into()));
            }
            bracket_1d(phi, x, y[0], cfg)
        }
        SolverMethod::ProjectedSubgradient => first_order(phi, x, y, cfg, false),
        SolverMethod::AcceleratedProximal => first_order(phi, x, y, cfg, true),
    }
}

fn converged(residual: f64, value: f64, cfg: &InnerSolverConfig) -> bool {
    residual <= cfg.abs_tol || residual <= 4.0 * f64::EPSILON * value.abs()
}

/// Closed interval `K ∩ R` for a 1-D domain descriptor.
fn interval(set: Option<&ConvexSet>) -> (f64, f64) {
    match set {
        None => (f64::NEG_INFINITY, f64::INFINITY),
        Some(ConvexSet::Point(p)) => (p[0], p[0]),
        Some(ConvexSet::Ball { center, radius }) => (center[0] - radius, center[0] + radius),
        Some(ConvexSet::Box { lo, hi }) => (lo[0], hi[0]),
        Some(ConvexSet::HalfSpace { normal, offset }) => {
            let a = normal[0];
            if a > 0.0 {
                (f64::NEG_INFINITY, offset / a)
            } else if a < 0.0 {
                (offset / a, f64::INFINITY)
            } else {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
        }
    }
}

/// Slope of `h` at a point of the line.
#[derive(Debug, Clone, Copy)]
enum Slope {
    /// `h(z)` finite with subgradient `g`.
    Finite { value: f64, g: f64 },
    /// `Phi(z) = +inf`; the sign says on which side of `dom Phi` `z` lies.
    Outside(f64),
}

impl Slope {
    fn sign(self) -> f64 {
        match self {
            Slope::Finite { g, .. } => g,
            Slope::Outside(s) => s,
        }
    }
}

struct Line<'a> {
    phi: &'a dyn ConvexOracle,
    x: f64,
    y: f64,
    witness: f64,
}

impl Line<'_> {
    fn h(&self, z: f64) -> Option<f64> {
        self.phi.eval(&[z]).finite().map(|v| v + (self.y - z) * (self.y - z) / self.x)
    }

    fn slope(&self, z: f64) -> Slope {
        let Some(value) = self.h(z) else {
            // dom Phi is an interval containing the witness
            return Slope::Outside(if z > self.witness { 1.0 } else { -1.0 });
        };
        let quad = 2.0 * (z - self.y) / self.x;
        let g = match self.phi.subgradient(&[z]) {
            Some(b) => b[0] + quad,
            None => {
                let eps = 1e-7 * z.abs().max(1.0);
                match (self.h(z + eps), self.h(z - eps)) {
                    (Some(hp), Some(hm)) => (hp - hm) / (2.0 * eps),
                    (Some(hp), None) => (hp - value) / eps,
                    (None, Some(hm)) => (value - hm) / eps,
                    (None, None) => 0.0,
                }
            }
        };
        Slope::Finite { value, g }
    }
}

fn bracket_1d(phi: &dyn ConvexOracle, x: f64, y: f64, cfg: &InnerSolverConfig) -> Result<ProxSolution> {
    let line = Line { phi, x, y, witness: phi.witness()[0] };
    let (lo, hi) = interval(phi.domain());
    let done = |z: f64, value: f64, residual: f64, iters: usize| {
        Ok(ProxSolution { value, minimizer: vec![z], residual, iters })
    };

    let z0 = y.clamp(lo, hi);
    let s0 = line.slope(z0);
    if let Slope::Finite { value, g } = s0 {
        if g == 0.0 || (g > 0.0 && z0 == lo) || (g < 0.0 && z0 == hi) {
            return done(z0, value, 0.0, 0);
        }
    }

    // Expand a bracket [a, b] with slope(a) <= 0 <= slope(b).
    let mut iters = 0;
    let (mut a, mut sa, mut b, mut sb);
    let mut step = x.sqrt().max(1e-3 * y.abs().max(1.0));
    if s0.sign() > 0.0 {
        b = z0;
        sb = s0;
        loop {
            iters += 1;
            let cand = (z0 - step).max(lo);
            let s = line.slope(cand);
            if s.sign() <= 0.0 {
                a = cand;
                sa = s;
                break;
            }
            if cand == lo {
                let Slope::Finite { value, .. } = s else { unreachable!("lo lies in dom") };
                return done(lo, value, 0.0, iters);
            }
            b = cand;
            sb = s;
            step *= 2.0;
            if iters > cfg.max_iters {
                return Err(budget(iters, sb, b - z0));
            }
        }
    } else {
        a = z0;
        sa = s0;
        loop {
            iters += 1;
            let cand = (z0 + step).min(hi);
            let s = line.slope(cand);
            if s.sign() >= 0.0 {
                b = cand;
                sb = s;
                break;
            }
            if cand == hi {
                let Slope::Finite { value, .. } = s else { unreachable!("hi lies in dom") };
                return done(hi, value, 0.0, iters);
            }
            a = cand;
            sa = s;
            step *= 2.0;
            if iters > cfg.max_iters {
                return Err(budget(iters, sa, z0 - a));
            }
        }
    }
    for (z, s) in [(a, sa), (b, sb)] {
        if let Slope::Finite { value, g: 0.0 } = s {
            return done(z, value, 0.0, iters);
        }
    }

    // Illinois false position, falling back to bisection when an endpoint is
    // outside dom Phi or the bracket stops shrinking fast enough.
    let (mut wa, mut wb) = (1.0, 1.0);
    let mut last_side = 0i8;
    let mut width_ref = b - a;
    let mut since_halving = 0;
    loop {
        let width = b - a;
        let best = [(a, sa), (b, sb)]
            .into_iter()
            .filter_map(|(z, s)| match s {
                Slope::Finite { value, g } => Some((z, value, g.abs() * width)),
                Slope::Outside(_) => None,
            })
            .min_by(|p, q| p.2.total_cmp(&q.2));
        if let Some((z, value, cert)) = best {
            if converged(cert, value, cfg) || width <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) {
                return done(z, value, cert, iters);
            }
        }
        if iters >= cfg.max_iters {
            return Err(match best {
                Some((_, value, cert)) => Error::SolverBudget { iters, best: value, residual: cert },
                None => Error::SolverBudget { iters, best: f64::NAN, residual: f64::INFINITY },
            });
        }
        iters += 1;

        let mid = 0.5 * (a + b);
        let c = match (sa, sb) {
            (Slope::Finite { g: ga, .. }, Slope::Finite { g: gb, .. }) if since_halving < 3 => {
                let (fa, fb) = (wa * ga, wb * gb);
                let c = b - fb * (b - a) / (fb - fa);
                if c > a && c < b {
                    c
                } else {
                    mid
                }
            }
            _ => mid,
        };
        let c = if c == a || c == b { mid } else { c };
        if c <= a || c >= b {
            // no representable point strictly inside
            let (z, s) = if matches!(sa, Slope::Finite { .. }) { (a, sa) } else { (b, sb) };
            if let Slope::Finite { value, g } = s {
                return done(z, value, g.abs() * width, iters);
            }
            return Err(Error::SolverBudget { iters, best: f64::NAN, residual: f64::INFINITY });
        }
        let sc = line.slope(c);
        match sc {
            Slope::Finite { value, g } if g == 0.0 => return done(c, value, 0.0, iters),
            _ => {}
        }
        if sc.sign() < 0.0 {
            a = c;
            sa = sc;
            wa = 1.0;
            if last_side == -1 {
                wb *= 0.5;
            }
            last_side = -1;
        } else {
            b = c;
            sb = sc;
            wb = 1.0;
            if last_side == 1 {
                wa *= 0.5;
            }
            last_side = 1;
        }
        if b - a <= 0.5 * width_ref {
            width_ref = b - a;
            since_halving = 0;
        } else {
            since_halving += 1;
            if since_halving > 3 {
                since_halving = 0;
                width_ref = b - a;
            }
        }
    }
}

fn budget(iters: usize, s: Slope, width: f64) -> Error {
    match s {
        Slope::Finite { value, g } => {
            Error::SolverBudget { iters, best: value, residual: g.abs() * width.abs() }
        }
        Slope::Outside(_) => Error::SolverBudget { iters, best: f64::NAN, residual: f64::INFINITY },
    }
}

struct Problem<'a> {
    phi: &'a dyn ConvexOracle,
    x: f64,
    y: &'a [f64],
    set: Option<&'a ConvexSet>,
}

impl Problem<'_> {
    fn h(&self, z: &[f64]) -> Option<f64> {
        self.phi.eval(z).finite().map(|v| v + dist_sq(self.y, z) / self.x)
    }

    fn grad(&self, z: &[f64]) -> Result<Vec<f64>> {
        let b = self.phi.subgradient(z).ok_or_else(|| {
            Error::Precondition(format!("{} has no subgradient at an iterate", self.phi.name()))
        })?;
        Ok(b.iter().zip(z.iter().zip(self.y)).map(|(bi, (zi, yi))| bi + 2.0 * (zi - yi) / self.x).collect())
    }

    fn project(&self, z: Vec<f64>) -> Vec<f64> {
        match self.set {
            Some(k) => k.project(&z),
            None => z,
        }
    }

    /// Gradient mapping at `z` for step `t`, which reduces to the gradient
    /// when there is no constraint set.
    fn mapping(&self, z: &[f64], g: &[f64], t: f64) -> Vec<f64> {
        match self.set {
            None => g.to_vec(),
            Some(k) => {
                let p = k.project(&axpy(z, -t, g));
                z.iter().zip(&p).map(|(a, b)| (a - b) / t).collect()
            }
        }
    }
}

fn first_order(
    phi: &dyn ConvexOracle,
    x: f64,
    y: &[f64],
    cfg: &InnerSolverConfig,
    accelerate: bool,
) -> Result<ProxSolution> {
    let pb = Problem { phi, x, y, set: phi.domain() };
    let mut z = match pb.set {
        Some(k) => k.project(y),
        None if phi.eval(y).is_finite() => y.to_vec(),
        None => phi.witness(),
    };
    let mut hz = pb.h(&z).ok_or_else(|| Error::Precondition("no finite starting point".into()))?;
    let mut gz = pb.grad(&z)?;
    let t_quad = 0.5 * x;
    let mut t = t_quad;
    let mut z_prev = z.clone();
    let mut k: f64 = 0.0;
    let mut best_res = f64::INFINITY;

    for iter in 0..cfg.max_iters {
        let res = x * norm_sq(&pb.mapping(&z, &gz, t)) / 4.0;
        best_res = best_res.min(res);
        if converged(res, hz, cfg) {
            return Ok(ProxSolution { value: hz, minimizer: z, residual: res, iters: iter });
        }

        // extrapolated point, dropped if it leaves dom Phi
        let beta = if accelerate { k / (k + 3.0) } else { 0.0 };
        let (v, hv, gv) = if beta > 0.0 {
            let v: Vec<f64> = z.iter().zip(&z_prev).map(|(a, b)| a + beta * (a - b)).collect();
            let v = pb.project(v);
            match pb.h(&v) {
                Some(hv) => {
                    let gv = pb.grad(&v)?;
                    (v, hv, gv)
                }
                None => (z.clone(), hz, gz.clone()),
            }
        } else {
            (z.clone(), hz, gz.clone())
        };

        // backtracking on the quadratic upper model
        let mut accepted = None;
        for _ in 0..200 {
            let cand = pb.project(axpy(&v, -t, &gv));
            if let Some(hc) = pb.h(&cand) {
                let d: Vec<f64> = cand.iter().zip(&v).map(|(a, b)| a - b).collect();
                let model = hv + dot(&gv, &d) + norm_sq(&d) / (2.0 * t);
                if hc <= model + 1e-14 * hv.abs().max(1.0) {
                    accepted = Some((cand, hc));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((cand, hc)) = accepted else {
            return Err(Error::SolverBudget { iters: iter, best: hz, residual: best_res });
        };

        if hc > hz {
            // function-value restart
            k = 0.0;
            z_prev = z.clone();
            continue;
        }
        z_prev = std::mem::replace(&mut z, cand);
        hz = hc;
        gz = pb.grad(&z)?;
        k += 1.0;
        t = (t * 1.5).min(t_quad);
    }
    Err(Error::SolverBudget { iters: cfg.max_iters, best: hz, residual: best_res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{builtin_affine, point_indicator, ConvexSet, EuclideanNorm, NegLog, Quadratic};

    #[test]
    fn config_validation() {
        assert!(InnerSolverConfig::new(0.0, 10, SolverMethod::Bisection1d).is_err());
        assert!(InnerSolverConfig::new(1e-9, 0, SolverMethod::Bisection1d).is_err());
        assert_eq!(InnerSolverConfig::for_dim(1).method, SolverMethod::Bisection1d);
        assert_eq!(InnerSolverConfig::for_dim(3).method, SolverMethod::AcceleratedProximal);
    }

    #[test]
    fn bisection_rejects_nd() {
        let cfg = InnerSolverConfig::for_dim(1);
        assert!(solve(&point_indicator(2), 1.0, &[0.0, 0.0], &cfg).is_err());
    }

    #[test]
    fn neglog_minimizer_matches_quadratic_root() {
        // -1/z + 2 (z - y)/x = 0  =>  z = (y + sqrt(y^2 + 2x)) / 2
        let cfg = InnerSolverConfig::for_dim(1);
        for (x, y) in [(1.0, 0.0), (0.05, -2.0), (0.05, 3.0), (2.0, -2.0), (1e-9, 1.0)] {
            let sol = solve(&NegLog, x, &[y], &cfg).unwrap();
            let z = 0.5 * (y + (y * y + 2.0 * x as f64).sqrt());
            assert!((sol.minimizer[0] - z).abs() <= 1e-6 * z.max(1.0), "{x} {y} {:?}", sol);
            let exact = crate::extension::closed_form_log_ext(x, y).unwrap().to_f64();
            assert!((sol.value - exact).abs() <= 1e-11 * exact.abs().max(1.0));
            assert!(sol.residual <= 1e-12 || sol.residual <= 4.0 * f64::EPSILON * sol.value.abs());
        }
    }

    #[test]
    fn abs_kink_is_handled_in_1d() {
        // prox of |.| is soft thresholding with threshold x/2
        let cfg = InnerSolverConfig::for_dim(1);
        let sol = solve(&EuclideanNorm { dim: 1 }, 1.0, &[0.3], &cfg).unwrap();
        assert!(sol.minimizer[0].abs() < 1e-9);
        assert!((sol.value - 0.09).abs() < 1e-12);
        let sol = solve(&EuclideanNorm { dim: 1 }, 1.0, &[2.0], &cfg).unwrap();
        assert!((sol.minimizer[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn projection_handles_indicators_in_nd() {
        for method in [SolverMethod::ProjectedSubgradient, SolverMethod::AcceleratedProximal] {
            let cfg = InnerSolverConfig::new(1e-12, 1000, method).unwrap();
            let sol = solve(&point_indicator(2), 0.5, &[1.0, 1.0], &cfg).unwrap();
            assert_eq!(sol.minimizer, vec![0.0, 0.0]);
            assert!((sol.value - 4.0).abs() < 1e-14);
            let ball = crate::convex::builtin_indicator(ConvexSet::Ball { center: vec![0.0, 0.0], radius: 1.0 })
                .unwrap();
            let sol = solve(&ball, 2.0, &[3.0, 0.0], &cfg).unwrap();
            assert!((sol.value - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_nd_matches_closed_form() {
        // c|z|^2 + |y - z|^2 / x has minimum c|y|^2 / (1 + c x)
        let q = Quadratic::new(3.0, vec![0.0; 4]).unwrap();
        let y = [1.0, -2.0, 0.5, 0.25];
        for method in [SolverMethod::ProjectedSubgradient, SolverMethod::AcceleratedProximal] {
            let cfg = InnerSolverConfig::new(1e-13, 5000, method).unwrap();
            for x in [0.01, 0.7, 5.0] {
                let sol = solve(&q, x, &y, &cfg).unwrap();
                let exact = 3.0 * norm_sq(&y) / (1.0 + 3.0 * x);
                assert!((sol.value - exact).abs() < 1e-10, "{method:?} {x}: {} vs {exact}", sol.value);
            }
        }
    }

    #[test]
    fn affine_is_solved_in_one_step() {
        let a = builtin_affine(0.5, vec![1.0, -1.0, 2.0]);
        let cfg = InnerSolverConfig::for_dim(3);
        let sol = solve(&a, 0.8, &[0.1, 0.2, 0.3], &cfg).unwrap();
        let exact = 0.5 + (0.1 - 0.2 + 0.6) - 6.0 * 0.8 / 4.0;
        assert!((sol.value - exact).abs() < 1e-12);
        assert!(sol.iters <= 2);
    }

    #[test]
    fn budget_error_carries_best_value() {
        let q = Quadratic::new(1000.0, vec![0.0; 3]).unwrap();
        let cfg = InnerSolverConfig::new(1e-30, 2, SolverMethod::ProjectedSubgradient).unwrap();
        match solve(&q, 1.0, &[1.0, 1.0, 1.0], &cfg) {
            Err(Error::SolverBudget { best, residual, .. }) => {
                assert!(best.is_finite() && residual > 0.0);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}
