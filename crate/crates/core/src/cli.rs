//! Command-line front end: grid evaluation to CSV, verification suites and
//! the elasticity demonstrations.
//!
//! Exit codes: 0 on success, 1 when a property fails or a run aborts, 2 on
//! usage or configuration errors.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::convex::{
    build_minorant_set, builtin_affine, builtin_indicator, point_indicator, zero, ConvexSet, EuclideanNorm, NegLog,
    Oracle, Quadratic,
};
use crate::elasticity::{
    fiex_psi, haar_sample, so3_average, theorem_pc_psi, zero_hull_readings, BarrierExtension, Mat3,
    PolyconvexSplit, SplitFn,
};
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::extension::{
    point_indicator_minorants, ClosedForm, HalfSpaceExtension, HalfSpaceFn, InnerSolverConfig, PenaltyFn,
};
use crate::mollifier::{MollifiedExtension, MollifierConfig};
use crate::suites::{self, Suite, SuiteOutcome, DEFAULT_SEED, DEFAULT_TRIALS};
use crate::verification::Region;

pub const DEFAULT_MAX_POINTS: usize = 10_000_000;

#[derive(Debug, Parser)]
#[command(name = "convext", version, about = "Convex extensions to the half-space x >= 0")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate an extension on a grid and write CSV.
    Eval {
        #[command(flatten)]
        construction: ConstructionArgs,
        /// Grid "x:lo:hi:steps;y1:lo:hi:steps;..."
        #[arg(long)]
        grid: String,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_POINTS)]
        max_points: usize,
    },
    /// Run a verification suite: theorem11, prop21, elasticity, all, or
    /// custom (the configured extension against --phi0 on the --grid box).
    Verify {
        #[arg(long)]
        suite: String,
        #[command(flatten)]
        construction: ConstructionArgs,
        #[arg(long, default_value = "x:0:2:2;y1:-2:2:9")]
        grid: String,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Elasticity demonstrations and checks.
    Elasticity {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructionName {
    Sup,
    Infconv,
    ClosedLog,
    ClosedIndicator,
    Theta,
}

#[derive(Debug, Clone, Args)]
pub struct ConstructionArgs {
    #[arg(long, value_enum, default_value = "infconv")]
    pub construction: ConstructionName,
    /// Boundary datum: zero, neglog, point, abs, square[:scale],
    /// ball:radius, box:lo:hi, halfspace:offset, affine:alpha:b1,b2,...
    #[arg(long, default_value = "point")]
    pub phi0: String,
    /// Penalty exponent of the sup-construction and closed-indicator.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Inner-solver absolute tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Inner-solver iteration budget.
    #[arg(long, default_value_t = 20_000)]
    pub iters: usize,
    /// Mollify with this many quadrature nodes per direction.
    #[arg(long)]
    pub mollify_nodes: Option<usize>,
    #[arg(long)]
    pub strictify: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

/// Boundary datum by name and parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Phi0Spec {
    Zero,
    NegLog,
    Point,
    Abs,
    Square(f64),
    Ball(f64),
    Box(f64, f64),
    HalfSpace(f64),
    Affine(f64, Vec<f64>),
}

impl FromStr for Phi0Spec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let num = |t: &str| -> Result<f64> {
            t.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number '{t}' in --phi0 {s}")))
        };
        let arity = |k: usize| -> Result<()> {
            if args.len() == k {
                Ok(())
            } else {
                Err(Error::Config(format!("--phi0 {name} takes {k} parameter(s), got '{s}'")))
            }
        };
        Ok(match name {
            "zero" => arity(0).map(|_| Phi0Spec::Zero)?,
            "neglog" => arity(0).map(|_| Phi0Spec::NegLog)?,
            "point" => arity(0).map(|_| Phi0Spec::Point)?,
            "abs" => arity(0).map(|_| Phi0Spec::Abs)?,
            "square" if args.is_empty() => Phi0Spec::Square(1.0),
            "square" => arity(1).and_then(|_| num(args[0])).map(Phi0Spec::Square)?,
            "ball" => arity(1).and_then(|_| num(args[0])).map(Phi0Spec::Ball)?,
            "box" => {
                arity(2)?;
                Phi0Spec::Box(num(args[0])?, num(args[1])?)
            }
            "halfspace" => arity(1).and_then(|_| num(args[0])).map(Phi0Spec::HalfSpace)?,
            "affine" => {
                arity(2)?;
                let b = args[1].split(',').map(num).collect::<Result<Vec<_>>>()?;
                Phi0Spec::Affine(num(args[0])?, b)
            }
            other => return Err(Error::Config(format!("unknown boundary datum '{other}'"))),
        })
    }
}

impl Phi0Spec {
    /// The oracle on `R^n`. Sets are centered at the origin; the half-space is
    /// `y1 <= offset`.
    pub fn oracle(&self, n: usize) -> Result<Oracle> {
        Ok(match self {
            Phi0Spec::Zero => Arc::new(zero(n)),
            Phi0Spec::NegLog if n == 1 => Arc::new(NegLog),
            Phi0Spec::NegLog => return Err(Error::Config("neglog is one-dimensional".into())),
            Phi0Spec::Point => Arc::new(point_indicator(n)),
            Phi0Spec::Abs => Arc::new(EuclideanNorm { dim: n }),
            Phi0Spec::Square(c) => Arc::new(Quadratic::new(*c, vec![0.0; n])?),
            Phi0Spec::Ball(r) => Arc::new(builtin_indicator(ConvexSet::Ball { center: vec![0.0; n], radius: *r })?),
            Phi0Spec::Box(lo, hi) => {
                Arc::new(builtin_indicator(ConvexSet::Box { lo: vec![*lo; n], hi: vec![*hi; n] })?)
            }
            Phi0Spec::HalfSpace(offset) => {
                let mut normal = vec![0.0; n];
                normal[0] = 1.0;
                Arc::new(builtin_indicator(ConvexSet::HalfSpace { normal, offset: *offset })?)
            }
            Phi0Spec::Affine(alpha, b) => {
                if b.len() != n {
                    return Err(Error::Dimension { expected: n, got: b.len() });
                }
                Arc::new(builtin_affine(*alpha, b.clone()))
            }
        })
    }
}

/// Validated configuration of one extension.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub construction: ConstructionName,
    pub phi0: Phi0Spec,
    pub p: f64,
    pub tol: f64,
    pub iters: usize,
    pub mollify_nodes: Option<usize>,
    pub strictify: bool,
    pub seed: u64,
}

impl TryFrom<&ConstructionArgs> for RunConfig {
    type Error = Error;

    fn try_from(a: &ConstructionArgs) -> Result<Self> {
        if !(a.p > 1.0) {
            return Err(Error::Config(format!("--p must be > 1, got {}", a.p)));
        }
        if !(a.tol > 0.0) || a.iters == 0 {
            return Err(Error::Config("--tol must be > 0 and --iters >= 1".into()));
        }
        if matches!(a.mollify_nodes, Some(k) if k < 2) {
            return Err(Error::Config("--mollify-nodes must be >= 2".into()));
        }
        Ok(RunConfig {
            construction: a.construction,
            phi0: a.phi0.parse()?,
            p: a.p,
            tol: a.tol,
            iters: a.iters,
            mollify_nodes: a.mollify_nodes,
            strictify: a.strictify,
            seed: a.seed,
        })
    }
}

/// A built extension and the datum it is meant to extend.
pub struct Built {
    pub ext: Arc<dyn HalfSpaceFn>,
    pub phi0: Oracle,
    pub mollified: bool,
}

/// Subgradient sample for the sup-construction of a general datum:
/// `per_axis` points per coordinate of `[-3, 3]^n`.
fn sup_samples(n: usize) -> Vec<Vec<f64>> {
    let per_axis = match n {
        1 => 61,
        2 => 17,
        3 => 9,
        _ => 5,
    };
    let axis: Vec<f64> = (0..per_axis).map(|i| -3.0 + 6.0 * i as f64 / (per_axis - 1) as f64).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    out
}

impl RunConfig {
    pub fn solver(&self, n: usize) -> Result<InnerSolverConfig> {
        let method = InnerSolverConfig::for_dim(n).method;
        InnerSolverConfig::new(self.tol, self.iters, method)
    }

    pub fn build(&self, n: usize) -> Result<Built> {
        if n == 0 {
            return Err(Error::Config("the grid needs at least one y-coordinate".into()));
        }
        let phi0 = self.phi0.oracle(n)?;
        let ext = match self.construction {
            ConstructionName::Infconv => HalfSpaceExtension::inf_convolution(phi0.clone(), self.solver(n)?)?,
            ConstructionName::Sup => {
                let set = if self.phi0 == Phi0Spec::Point {
                    let per_axis = if n == 1 { 65 } else { 17 };
                    point_indicator_minorants(n, 8.0, per_axis)?
                } else {
                    let samples: Vec<Vec<f64>> = sup_samples(n)
                        .into_iter()
                        .filter(|y| phi0.eval(y).is_finite() && phi0.subgradient(y).is_some())
                        .collect();
                    if samples.is_empty() {
                        return Err(Error::Config(format!("no subgradient samples for {}", phi0.name())));
                    }
                    build_minorant_set(phi0.as_ref(), &samples)?
                };
                HalfSpaceExtension::sup_minorant(set, PenaltyFn::new(self.p)?)
            }
            ConstructionName::ClosedLog if n == 1 => HalfSpaceExtension::closed_form(ClosedForm::NegLog)?,
            ConstructionName::ClosedLog => return Err(Error::Config("closed-log is one-dimensional".into())),
            ConstructionName::ClosedIndicator => {
                HalfSpaceExtension::closed_form(ClosedForm::IndicatorPower { p: self.p, dim: n })?
            }
            ConstructionName::Theta => HalfSpaceExtension::closed_form(ClosedForm::Theta { dim: n })?,
        };
        // closed forms carry their own datum
        let phi0 = match self.construction {
            ConstructionName::Infconv | ConstructionName::Sup => phi0,
            _ => ext.phi0(),
        };
        let ext = if self.strictify { ext.strictify() } else { ext };
        let ext: Arc<dyn HalfSpaceFn> = Arc::new(ext);
        let Some(nodes) = self.mollify_nodes else {
            return Ok(Built { ext, phi0, mollified: false });
        };
        let probe = vec![0.0; n];
        if !ext.eval(1.0, &probe)?.is_finite() {
            return Err(Error::Config(format!("{} is not finite on x > 0; cannot mollify", ext.label())));
        }
        let m = MollifiedExtension::new(ext, MollifierConfig::with_nodes(n, nodes, nodes)?)?;
        Ok(Built { ext: Arc::new(m), phi0, mollified: true })
    }
}

/// One axis of the grid: `steps` equally spaced points from `lo` to `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl AxisRange {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub x: AxisRange,
    pub y: Vec<AxisRange>,
}

impl GridSpec {
    pub fn parse(s: &str, max_points: usize) -> Result<Self> {
        let mut axes = Vec::new();
        for (k, part) in s.split(';').map(str::trim).filter(|p| !p.is_empty()).enumerate() {
            let f: Vec<&str> = part.split(':').collect();
            let want = if k == 0 { "x".to_string() } else { format!("y{k}") };
            if f.len() != 4 || f[0] != want {
                return Err(Error::Config(format!("grid axis #{k} must be '{want}:lo:hi:steps', got '{part}'")));
            }
            let num = |t: &str| t.parse::<f64>().map_err(|_| Error::Config(format!("bad number '{t}' in grid")));
            let (lo, hi) = (num(f[1])?, num(f[2])?);
            let steps: usize = f[3].parse().map_err(|_| Error::Config(format!("bad step count '{}'", f[3])))?;
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) || steps == 0 {
                return Err(Error::Config(format!("axis '{part}' needs finite lo <= hi and steps >= 1")));
            }
            if k == 0 && lo < 0.0 {
                return Err(Error::Config("x must be >= 0".into()));
            }
            axes.push(AxisRange { lo, hi, steps });
        }
        if axes.len() < 2 {
            return Err(Error::Config("grid needs an x axis and at least one y axis".into()));
        }
        let y = axes.split_off(1);
        let grid = GridSpec { x: axes[0], y };
        let total = grid.y.iter().try_fold(grid.x.steps, |acc, a| acc.checked_mul(a.steps));
        match total {
            Some(t) if t <= max_points => Ok(grid),
            _ => Err(Error::Config(format!("grid has more than {max_points} points"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn len(&self) -> usize {
        self.y.iter().fold(self.x.steps, |acc, a| acc * a.steps)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All `y` lattice points, last coordinate fastest.
    pub fn y_points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in &self.y {
            let pts = axis.points();
            out = out
                .into_iter()
                .flat_map(|p: Vec<f64>| {
                    pts.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        out
    }

    pub fn region(&self) -> Result<Region> {
        Region::new((self.x.lo, self.x.hi), self.y.iter().map(|a| (a.lo, a.hi)).collect())
    }
}

/// Real number with 17 significant digits, or `inf`. Negative zero prints as zero.
pub fn format_value(v: ExtReal) -> String {
    match v {
        ExtReal::Finite(x) if x == 0.0 => format!("{:.16e}", 0.0),
        ExtReal::Finite(x) => format!("{x:.16e}"),
        ExtReal::Infinity => "inf".into(),
    }
}

/// Writes `x,y1,...,yn,value` rows in grid order (x outermost).
pub fn cmd_eval(cfg: &RunConfig, grid: &GridSpec, out: &mut dyn Write) -> Result<usize> {
    let built = cfg.build(grid.dim())?;
    let f = built.ext.as_ref();
    let io = |e: io::Error| Error::Config(format!("write failed: {e}"));
    let mut header = String::from("x");
    for k in 1..=grid.dim() {
        write!(header, ",y{k}").expect("write to string");
    }
    header.push_str(",value\n");
    out.write_all(header.as_bytes()).map_err(io)?;
    let ys = grid.y_points();
    let mut rows = 0;
    let mut line = String::new();
    for x in grid.x.points() {
        for y in &ys {
            let v = f.eval(x, y)?;
            line.clear();
            line.push_str(&format_value(ExtReal::Finite(x)));
            for c in y {
                line.push(',');
                line.push_str(&format_value(ExtReal::Finite(*c)));
            }
            line.push(',');
            line.push_str(&format_value(v));
            line.push('\n');
            out.write_all(line.as_bytes()).map_err(io)?;
            rows += 1;
        }
    }
    out.flush().map_err(io)?;
    Ok(rows)
}

pub fn cmd_verify(suite: Suite, seed: u64, trials: usize) -> Result<SuiteOutcome> {
    suites::run_suite(suite, seed, trials)
}

/// The configured extension against its datum on the grid's box, with the
/// grid's `y` lattice (first 64 points) as boundary points.
pub fn cmd_verify_custom(cfg: &RunConfig, grid: &GridSpec, trials: usize) -> Result<SuiteOutcome> {
    let built = cfg.build(grid.dim())?;
    let mut y_points = grid.y_points();
    y_points.truncate(64);
    suites::custom(built.ext, built.phi0, grid.region()?, y_points, cfg.strictify, !built.mollified, cfg.seed, trials)
}

/// Text report of the elasticity demonstrations and whether all checks pass.
pub fn cmd_elasticity(seed: u64, trials: usize) -> Result<(String, bool)> {
    let mut s = String::new();
    let w = |s: &mut String, line: String| s.push_str(&(line + "\n"));
    w(&mut s, "density |A|^2/det A".into());
    for (name, a) in [("1", Mat3::IDENTITY), ("diag(2,1,1)", Mat3::diag(2.0, 1.0, 1.0)), ("diag(-1,1,1)", Mat3::diag(-1.0, 1.0, 1.0))] {
        w(&mut s, format!("  psi({name}) = {}", format_value(fiex_psi(&a))));
    }
    w(&mut s, "readings of R_0 = 1, R_1, R_2, R_3".into());
    for r in zero_hull_readings() {
        w(&mut s, format!("  {r}"));
    }
    let ext = BarrierExtension::default();
    w(&mut s, format!("barrier density, g = {}", PolyconvexSplit::label(&ext)));
    for k in (0..=40).step_by(4) {
        let a = Mat3::diag(2f64.powi(-k), 1.0, 1.0);
        let g = ext.g(&Mat3::IDENTITY, &Mat3::IDENTITY, 2f64.powi(-k))?;
        w(&mut s, format!("  k={k:2}  psi(diag(2^-k,1,1)) = {}  g(1,1,2^-k) = {}", format_value(theorem_pc_psi(&a)?), format_value(g)));
    }
    let rotations = haar_sample(seed, trials.max(1))?;
    let lin = SplitFn::new("A11 + delta", |a, _, d| Ok(ExtReal::Finite(a.0[0][0] + d)));
    let avg = so3_average(&lin, &Mat3::IDENTITY, &Mat3::IDENTITY, 0.25, &rotations)?;
    w(&mut s, format!("SO(3) average of A11 + delta at (1, 1, 0.25) over {} rotations: {}", rotations.len(), format_value(avg)));
    let out = suites::elasticity(seed, trials)?;
    s.push_str(&out.render());
    Ok((s, out.passed()))
}

fn open_out(path: &Option<PathBuf>) -> std::result::Result<Box<dyn Write>, String> {
    match path {
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn emit(path: &Option<PathBuf>, text: &str) -> std::result::Result<(), String> {
    let mut out = open_out(path)?;
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| format!("write failed: {e}"))
}

/// Runs the parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let usage = |e: Error| {
        eprintln!("error: {e}");
        2
    };
    let failed = |e: String| {
        eprintln!("error: {e}");
        1
    };
    match cli.command {
        Command::Eval { construction, grid, out, max_points } => {
            let cfg = match RunConfig::try_from(&construction) {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            let grid = match GridSpec::parse(&grid, max_points) {
                Ok(g) => g,
                Err(e) => return usage(e),
            };
            // build once up front so configuration errors exit with 2
            if let Err(e) = cfg.build(grid.dim()) {
                return usage(e);
            }
            let mut w = match open_out(&out) {
                Ok(w) => w,
                Err(e) => return usage(Error::Config(e)),
            };
            match cmd_eval(&cfg, &grid, &mut *w) {
                Ok(_) => 0,
                Err(e) => failed(e.to_string()),
            }
        }
        Command::Verify { suite, construction, grid, trials, out } => {
            if trials == 0 {
                return usage(Error::Config("--trials must be >= 1".into()));
            }
            let outcome = if suite == "custom" {
                let cfg = match RunConfig::try_from(&construction) {
                    Ok(c) => c,
                    Err(e) => return usage(e),
                };
                let grid = match GridSpec::parse(&grid, DEFAULT_MAX_POINTS) {
                    Ok(g) => g,
                    Err(e) => return usage(e),
                };
                if let Err(e) = cfg.build(grid.dim()) {
                    return usage(e);
                }
                cmd_verify_custom(&cfg, &grid, trials)
            } else {
                match Suite::from_str(&suite) {
                    Ok(s) => cmd_verify(s, construction.seed, trials),
                    Err(e) => return usage(e),
                }
            };
            match outcome {
                Ok(o) => match emit(&out, &o.render()) {
                    Ok(()) if o.passed() => 0,
                    Ok(()) => 1,
                    Err(e) => failed(e),
                },
                Err(e) => failed(e.to_string()),
            }
        }
        Command::Elasticity { seed, trials, out } => {
            if trials == 0 {
                return usage(Error::Config("--trials must be >= 1".into()));
            }
            match cmd_elasticity(seed, trials) {
                Ok((text, passed)) => match emit(&out, &text) {
                    Ok(()) if passed => 0,
                    Ok(()) => 1,
                    Err(e) => failed(e),
                },
                Err(e) => failed(e.to_string()),
            }
        }
    }
}

/// Parses `args` (including the program name); clap reports usage errors
/// with exit code 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(construction: ConstructionName, phi0: &str) -> RunConfig {
        RunConfig {
            construction,
            phi0: phi0.parse().unwrap(),
            p: 2.0,
            tol: 1e-12,
            iters: 20_000,
            mollify_nodes: None,
            strictify: false,
            seed: 1,
        }
    }

    fn csv(c: &RunConfig, grid: &str) -> String {
        let g = GridSpec::parse(grid, DEFAULT_MAX_POINTS).unwrap();
        let mut buf = Vec::new();
        cmd_eval(c, &g, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn grid_parsing() {
        let g = GridSpec::parse("x:0:1:3;y1:-1:1:2;y2:0:0:1", 100).unwrap();
        assert_eq!(g.x.points(), vec![0.0, 0.5, 1.0]);
        assert_eq!(g.dim(), 2);
        assert_eq!(g.len(), 6);
        assert_eq!(g.y_points(), vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
        for bad in ["x:0:1:3", "x:1:0:2;y1:0:1:1", "x:-1:0:2;y1:0:1:1", "x:0:1:0;y1:0:1:1", "y1:0:1:1;x:0:1:1", "x:0:1:2;y2:0:1:1"] {
            assert!(GridSpec::parse(bad, 100).is_err(), "{bad}");
        }
        assert!(GridSpec::parse("x:0:1:100;y1:0:1:100", 9999).is_err());
        assert!(GridSpec::parse("x:0:1:100;y1:0:1:100", 10_000).is_ok());
    }

    #[test]
    fn phi0_parsing() {
        assert_eq!("square".parse::<Phi0Spec>().unwrap(), Phi0Spec::Square(1.0));
        assert_eq!("affine:1:2,3".parse::<Phi0Spec>().unwrap(), Phi0Spec::Affine(1.0, vec![2.0, 3.0]));
        assert_eq!("box:-1:2".parse::<Phi0Spec>().unwrap(), Phi0Spec::Box(-1.0, 2.0));
        for bad in ["nope", "ball", "ball:x", "zero:1", "affine:1"] {
            assert!(bad.parse::<Phi0Spec>().is_err(), "{bad}");
        }
        assert!(Phi0Spec::NegLog.oracle(2).is_err());
        assert!(Phi0Spec::Affine(0.0, vec![1.0]).oracle(2).is_err());
    }

    #[test]
    fn negative_zero_is_normalised() {
        assert_eq!(format_value(ExtReal::Finite(-0.0)), format_value(ExtReal::ZERO));
        assert_eq!(format_value(ExtReal::Finite(-1.5)), "-1.5000000000000000e0");
    }

    #[test]
    fn theta_rows() {
        let out = csv(&cfg(ConstructionName::Theta, "point"), "x:0:1:2;y1:0:0:1");
        let z = format_value(ExtReal::ZERO);
        let one = format_value(ExtReal::Finite(1.0));
        assert_eq!(out, format!("x,y1,value\n{z},{z},{z}\n{one},{z},{z}\n"));
    }

    #[test]
    fn closed_log_and_indicator_rows() {
        let out = csv(&cfg(ConstructionName::ClosedLog, "neglog"), "x:1:1:1;y1:0:0:1");
        let v: f64 = out.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
        // -ln((sqrt 2)/2) + 1/2
        assert!((v - (0.5 - (0.5f64.sqrt()).ln())).abs() < 1e-15);
        assert!((v - 0.846574).abs() < 1e-6);

        let out = csv(&cfg(ConstructionName::ClosedIndicator, "point"), "x:0:0:1;y1:1:1:1");
        assert!(out.lines().nth(1).unwrap().ends_with(",inf"));
    }

    #[test]
    fn rows_reevaluate_through_the_library() {
        let mut c = cfg(ConstructionName::Infconv, "neglog");
        c.strictify = true;
        let out = csv(&c, "x:0:2:5;y1:-1:2:7");
        let ext = c.build(1).unwrap().ext;
        for row in out.lines().skip(1) {
            let f: Vec<&str> = row.split(',').collect();
            let (x, y): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
            assert_eq!(f[2], format_value(ext.eval(x, &[y]).unwrap()));
        }
        assert_eq!(out.lines().count(), 36);
    }

    #[test]
    fn build_variants() {
        for (c, phi) in [
            (ConstructionName::Sup, "point"),
            (ConstructionName::Sup, "neglog"),
            (ConstructionName::Sup, "square:2"),
            (ConstructionName::Infconv, "ball:1"),
            (ConstructionName::Infconv, "halfspace:0.5"),
            (ConstructionName::Infconv, "abs"),
        ] {
            let b = cfg(c, phi).build(1).unwrap();
            assert!(b.ext.eval(0.5, &[0.3]).unwrap().is_finite(), "{c:?} {phi}");
        }
        let mut m = cfg(ConstructionName::Infconv, "point");
        m.mollify_nodes = Some(8);
        let b = m.build(2).unwrap();
        assert!(b.mollified && b.ext.label().starts_with("mollified"));
        assert!(cfg(ConstructionName::ClosedLog, "neglog").build(2).is_err());
    }

    #[test]
    fn custom_suite_passes_and_fails_honestly() {
        let grid = GridSpec::parse("x:0:2:2;y1:-2:2:9", DEFAULT_MAX_POINTS).unwrap();
        let good = cmd_verify_custom(&cfg(ConstructionName::Infconv, "square"), &grid, 300).unwrap();
        assert!(good.passed(), "{}", good.render());
        // a finite minorant sample cannot reach +inf off the origin
        let bad = cmd_verify_custom(&cfg(ConstructionName::Sup, "point"), &grid, 300).unwrap();
        assert!(!bad.passed());
        assert!(bad.render().contains("FAIL boundary-limit"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["convext", "verify", "--suite", "nope"]), 2);
        assert_eq!(main_with_args(["convext", "eval", "--grid", "x:0:1:2"]), 2);
        assert_eq!(main_with_args(["convext", "bogus"]), 2);
        assert_eq!(main_with_args(["convext", "eval", "--construction", "closed-log", "--grid", "x:0:1:2;y1:0:1:2;y2:0:1:2"]), 2);
    }
}
