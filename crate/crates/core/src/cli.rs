//! Command-line front end: `verify`, `orbit`, `scan`, `spectrum`, `params`.
//!
//! Every command resolves a scene file plus flag overrides into a
//! [`VerificationConfig`] and a [`Scene`], and logs their joint hash.
//! CSV artifacts start with a `# config_hash=...` line; JSON artifacts carry
//! a `config_hash` field.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extalg4::{conorm, norm, spectrum, wedge3, ExtAlgError, Vec4};
use crate::maps4d::DiffeoMap4;
use crate::scene::{LambdaSpec, Model, ModelError, Region, Scene, SceneError, SceneFile};
use crate::verifier::{auto_tune_lambda, run_all, VerificationConfig, VerifyError};

/// Thread count for the rayon pool; `RAYON_NUM_THREADS` works as well.
pub const THREADS_ENV: &str = "WILDCLASS_THREADS";

/// Largest grid `scan` accepts.
pub const MAX_SCAN_POINTS: u128 = 100_000_000;

const SCAN_CHUNK: usize = 1 << 15;

#[derive(Debug, Parser)]
#[command(name = "wildclass", version, about = "Build and certify the wild heterodimensional-cycle diffeomorphism of R^4")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every check and write the report.
    Verify(Common),
    /// Iterate a point forward or backward and write the orbit as CSV.
    Orbit {
        #[command(flatten)]
        common: Common,
        /// start point `x,y,z,w`
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        start: Vec4,
        #[arg(long, value_enum, default_value_t = OrbitDirection::Forward)]
        direction: OrbitDirection,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Sample a quantity on a grid (`--grid` points per axis) and write CSV.
    Scan {
        #[command(flatten)]
        common: Common,
        /// `A`, `B`, `Bp`, `C`, `D`, `BlP`, `BlQ` or `box:x0,x1,y0,y1,z0,z1,w0,w1`
        #[arg(long, value_parser = parse_region, allow_hyphen_values = true)]
        region: ScanRegion,
        #[arg(long, value_enum)]
        quantity: Quantity,
    },
    /// Jacobian of `Omega` at a point, its eigenvalues and index, as JSON.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// point `x,y,z,w`
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: Vec4,
    },
    /// Validate a scene, solve its coefficients and write the resolved file.
    Params(Common),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// scene JSON; the default scene when absent
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// a number or `auto`
    #[arg(long, value_parser = parse_lambda)]
    pub lambda: Option<LambdaSpec>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// points per axis of the 4D grids
    #[arg(long)]
    pub grid: Option<usize>,
    /// orbit convergence tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// verification config JSON, applied before the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrbitDirection {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Quantity {
    /// `m(wedge3(d Omega))`
    ConormWedge3,
    /// operator norm of `d Omega`
    JacobianNorm,
    /// sup-norm distance to `D`
    #[value(name = "distance_to_D")]
    #[serde(rename = "distance_to_D")]
    DistanceToD,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::ConormWedge3 => "conorm_wedge3",
            Quantity::JacobianNorm => "jacobian_norm",
            Quantity::DistanceToD => "distance_to_D",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanRegion {
    Named(String),
    Box([[f64; 2]; 4]),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("eigensolver: {0}")]
    Eigen(#[from] ExtAlgError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("config {path}: {message}")]
    Config { path: String, message: String },
    #[error("scan grid has {points} points, above the limit of {MAX_SCAN_POINTS}")]
    GridTooLarge { points: u128 },
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("{0}")]
    Usage(String),
}

fn parse_numbers<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {}", parts.len()));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse::<f64>().map_err(|e| format!("`{p}`: {e}"))?;
        if !o.is_finite() {
            return Err(format!("`{p}` is not finite"));
        }
    }
    Ok(out)
}

pub fn parse_point(s: &str) -> Result<Vec4, String> {
    parse_numbers::<4>(s)
}

pub fn parse_lambda(s: &str) -> Result<LambdaSpec, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(LambdaSpec::AUTO);
    }
    let l: f64 = s.parse().map_err(|_| format!("`{s}` is neither a number nor `auto`"))?;
    if !l.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(LambdaSpec::Fixed(l))
}

pub fn parse_region(s: &str) -> Result<ScanRegion, String> {
    match s.strip_prefix("box:") {
        Some(rest) => {
            let v = parse_numbers::<8>(rest)?;
            let b = [[v[0], v[1]], [v[2], v[3]], [v[4], v[5]], [v[6], v[7]]];
            if b.iter().any(|[lo, hi]| lo > hi) {
                return Err("box bounds must satisfy lo <= hi on every axis".into());
            }
            Ok(ScanRegion::Box(b))
        }
        None => Ok(ScanRegion::Named(s.to_string())),
    }
}

/// Scene file, config and scene after applying every override.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub file: SceneFile,
    pub config: VerificationConfig,
    /// At the fixed `lambda`, or at `tune_start` when tuning is pending.
    pub scene: Scene,
    pub config_hash: String,
}

impl Resolved {
    pub fn new(common: &Common) -> Result<Self, CliError> {
        let file = match &common.scene {
            Some(p) => SceneFile::load(p)?,
            None => SceneFile::default(),
        };
        let mut config = match &common.config {
            Some(p) => load_config(p)?,
            None => VerificationConfig::default(),
        };
        if let Some(s) = common.seed {
            config.seed = s;
        }
        if let Some(g) = common.grid {
            config.grid = g;
        }
        if let Some(t) = common.tol {
            config.orbit_tol = t;
        }
        let spec = common.lambda.unwrap_or(file.lambda);
        config.lambda = spec.fixed();
        config.validate()?;
        let scene = Scene::new(file.params(Some(config.lambda.unwrap_or(config.tune_start)))?)?;
        let config_hash = config.hash_with(scene.params());
        Ok(Self { file, config, scene, config_hash })
    }

    /// The scene at its final `lambda`, tuning first if needed.
    pub fn final_scene(&self) -> Result<Scene, CliError> {
        if self.config.lambda.is_some() {
            return Ok(self.scene.clone());
        }
        let t = auto_tune_lambda(&self.scene, &self.config)?;
        eprintln!("tuned lambda {} (success: {})", t.lambda, t.success);
        let s = self.scene.at_lambda(t.lambda)?;
        Ok(match t.k {
            Some(k) => s.with_tuning(t.lambda, k),
            None => s,
        })
    }
}

fn load_config(path: &Path) -> Result<VerificationConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
        path: path.display().to_string(),
        message: format!("at `{}`: {}", e.path(), e.inner()),
    })
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|source| CliError::Io { path: p.display().to_string(), source })?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(out: &Option<PathBuf>) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: out.as_ref().map_or("<stdout>".into(), |p| p.display().to_string()), source }
}

/// Shortest round-trip text; scientific outside `[1e-4, 1e15)`.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn euclid(a: Vec4, b: Vec4) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Runs the suite; `Ok(true)` iff every non-evidence check passed.
pub fn cmd_verify(common: &Common) -> Result<bool, CliError> {
    let r = Resolved::new(common)?;
    eprintln!("config_hash={}", r.config_hash);
    let report = run_all(&r.scene, &r.config)?;
    if let Some(p) = &common.out {
        std::fs::write(p, report.to_json() + "\n").map_err(io_err(&common.out))?;
    }
    print!("{}", report.summary());
    Ok(report.passed)
}

/// Writes `n,x,y,z,w,distance_to_P,distance_to_Q,in_D` rows for `steps`
/// iterates; an inversion failure truncates with a `# truncated` note.
pub fn write_orbit(
    out: &mut dyn Write,
    scene: &Scene,
    map: &dyn DiffeoMap4,
    config_hash: &str,
    start: Vec4,
    direction: OrbitDirection,
    steps: usize,
) -> io::Result<()> {
    let pts = scene.points();
    let d = &scene.regions().d;
    writeln!(out, "# config_hash={config_hash}")?;
    writeln!(out, "n,x,y,z,w,distance_to_P,distance_to_Q,in_D")?;
    let mut x = start;
    for n in 0..=steps {
        let cols = [x[0], x[1], x[2], x[3], euclid(x, pts.p), euclid(x, pts.q)].map(fmt_num);
        writeln!(out, "{n},{},{}", cols.join(","), u8::from(d.contains(x)))?;
        if n == steps {
            break;
        }
        let next = match direction {
            OrbitDirection::Forward => Ok(map.eval(x)),
            OrbitDirection::Backward => map.inverse(x).map_err(|e| e.to_string()),
        };
        match next {
            Ok(y) if y.iter().all(|c| c.is_finite()) => x = y,
            Ok(_) => {
                writeln!(out, "# truncated after step {n}: non-finite iterate")?;
                break;
            }
            Err(e) => {
                writeln!(out, "# truncated after step {n}: {e}")?;
                break;
            }
        }
    }
    out.flush()
}

pub fn cmd_orbit(common: &Common, start: Vec4, direction: OrbitDirection, steps: usize) -> Result<(), CliError> {
    let r = Resolved::new(common)?;
    eprintln!("config_hash={}", r.config_hash);
    let scene = r.final_scene()?;
    let model = Model::build(&scene)?;
    let mut out = sink(&common.out)?;
    write_orbit(&mut *out, &scene, &model.omega, &r.config_hash, start, direction, steps).map_err(io_err(&common.out))
}

/// Axis bounds of a named region or an explicit box.
pub fn region_bounds(scene: &Scene, region: &ScanRegion) -> Result<[[f64; 2]; 4], CliError> {
    let rs = scene.regions();
    let ball = |c: Vec4| Region::ball(c, scene.radii().theta.small_box()).bounding_box();
    Ok(match region {
        ScanRegion::Box(b) => *b,
        ScanRegion::Named(n) => match n.as_str() {
            "A" => rs.a.bounding_box(),
            "B" => rs.b.bounding_box(),
            "Bp" => rs.bp.bounding_box(),
            "C" => rs.c.bounding_box(),
            "D" => rs.d.bounding_box(),
            "BlP" => ball(scene.points().p),
            "BlQ" => ball(scene.points().q),
            other => return Err(CliError::UnknownRegion(other.to_string())),
        },
    })
}

/// Grid of `n` cell-centred points per axis; a degenerate axis gets one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub bounds: [[f64; 2]; 4],
    pub counts: [usize; 4],
}

impl ScanGrid {
    pub fn new(bounds: [[f64; 2]; 4], n: usize) -> Result<Self, CliError> {
        let counts = bounds.map(|[lo, hi]| if lo == hi { 1 } else { n });
        let points: u128 = counts.iter().map(|&c| c as u128).product();
        if points > MAX_SCAN_POINTS {
            return Err(CliError::GridTooLarge { points });
        }
        Ok(Self { bounds, counts })
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// First axis slowest.
    pub fn point(&self, mut k: usize) -> Vec4 {
        let mut x = [0.0; 4];
        for i in (0..4).rev() {
            let c = self.counts[i];
            let j = k % c;
            k /= c;
            let [lo, hi] = self.bounds[i];
            x[i] = if c == 1 { lo } else { lo + (hi - lo) * (j as f64 + 0.5) / c as f64 };
        }
        x
    }
}

pub fn quantity_at(q: Quantity, map: &dyn DiffeoMap4, scene: &Scene, x: Vec4) -> f64 {
    match q {
        Quantity::ConormWedge3 => conorm(&wedge3(&map.jacobian(x))),
        Quantity::JacobianNorm => norm(&map.jacobian(x)),
        Quantity::DistanceToD => scene.regions().d.distance(x),
    }
}

/// Streams `x,y,z,w,<quantity>` rows in grid-index order, evaluating each
/// chunk in parallel.
pub fn write_scan(
    out: &mut dyn Write,
    scene: &Scene,
    map: &dyn DiffeoMap4,
    config_hash: &str,
    grid: &ScanGrid,
    q: Quantity,
) -> io::Result<()> {
    writeln!(out, "# config_hash={config_hash}")?;
    writeln!(out, "x,y,z,w,{}", q.name())?;
    let total = grid.len();
    let mut start = 0;
    while start < total {
        let end = (start + SCAN_CHUNK).min(total);
        let rows: Vec<String> = (start..end)
            .into_par_iter()
            .map(|k| {
                let x = grid.point(k);
                [x[0], x[1], x[2], x[3], quantity_at(q, map, scene, x)].map(fmt_num).join(",")
            })
            .collect();
        for r in rows {
            writeln!(out, "{r}")?;
        }
        start = end;
    }
    out.flush()
}

pub fn cmd_scan(common: &Common, region: &ScanRegion, q: Quantity) -> Result<(), CliError> {
    let r = Resolved::new(common)?;
    eprintln!("config_hash={}", r.config_hash);
    let scene = r.final_scene()?;
    let grid = ScanGrid::new(region_bounds(&scene, region)?, r.config.grid)?;
    let model = Model::build(&scene)?;
    let mut out = sink(&common.out)?;
    write_scan(&mut *out, &scene, &model.omega, &r.config_hash, &grid, q).map_err(io_err(&common.out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    pub non_real: bool,
}

/// Output of `spectrum`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub config_hash: String,
    pub lambda: f64,
    pub point: Vec4,
    pub image: Vec4,
    /// `|Omega(x) - x|` in sup norm
    pub displacement: f64,
    pub jacobian: [[f64; 4]; 4],
    /// sorted by modulus
    pub eigenvalues: Vec<EigenEntry>,
    pub contracting: usize,
    pub expanding: usize,
    pub non_real: usize,
    pub hyperbolic: bool,
    /// unstable dimension, when hyperbolic
    pub index: Option<usize>,
}

impl SpectrumReport {
    pub fn new(map: &dyn DiffeoMap4, lambda: f64, point: Vec4, config_hash: &str) -> Result<Self, CliError> {
        let image = map.eval(point);
        let j = map.jacobian(point);
        let s = spectrum(&j)?;
        let hyperbolic = s.contracting + s.expanding == 4;
        Ok(Self {
            config_hash: config_hash.to_string(),
            lambda,
            point,
            image,
            displacement: (0..4).map(|i| (image[i] - point[i]).abs()).fold(0.0, f64::max),
            jacobian: j.0,
            eigenvalues: s
                .eigenvalues
                .iter()
                .map(|z| EigenEntry { re: z.re, im: z.im, modulus: z.norm(), non_real: crate::extalg4::is_non_real(*z) })
                .collect(),
            contracting: s.contracting,
            expanding: s.expanding,
            non_real: s.non_real,
            hyperbolic,
            index: hyperbolic.then_some(s.expanding),
        })
    }
}

pub fn cmd_spectrum(common: &Common, point: Vec4) -> Result<(), CliError> {
    let r = Resolved::new(common)?;
    eprintln!("config_hash={}", r.config_hash);
    let scene = r.final_scene()?;
    let model = Model::build(&scene)?;
    let rep = SpectrumReport::new(&model.omega, scene.lambda(), point, &r.config_hash)?;
    let mut out = sink(&common.out)?;
    let text = serde_json::to_string_pretty(&rep).expect("spectrum serializes");
    writeln!(out, "{text}").and_then(|_| out.flush()).map_err(io_err(&common.out))
}

pub fn cmd_params(common: &Common) -> Result<(), CliError> {
    let r = Resolved::new(common)?;
    eprintln!("config_hash={}", r.config_hash);
    let scene = r.final_scene()?;
    let model = Model::build(&scene)?;
    for e in scene.ledger() {
        eprintln!("ledger {} {}", e.id, if e.satisfied { "ok" } else { "VIOLATED" });
    }
    let mut file = SceneFile::from_scene(&scene, Some(model.solved_coefficients()));
    file.config_hash = Some(r.config_hash);
    let mut out = sink(&common.out)?;
    writeln!(out, "{}", file.to_json()).and_then(|_| out.flush()).map_err(io_err(&common.out))
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::Usage(format!("{THREADS_ENV}=`{v}` is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

/// Runs a parsed invocation; `Ok(false)` means verification failed.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    init_threads()?;
    match &cli.command {
        Command::Verify(c) => cmd_verify(c),
        Command::Orbit { common, start, direction, steps } => cmd_orbit(common, *start, *direction, *steps).map(|_| true),
        Command::Scan { common, region, quantity } => cmd_scan(common, region, *quantity).map(|_| true),
        Command::Spectrum { common, point } => cmd_spectrum(common, *point).map(|_| true),
        Command::Params(c) => cmd_params(c).map(|_| true),
    }
}

/// Exit 0 on success, 1 on a failed verification, 2 on errors.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flags_are_rejected() {
        assert!(Cli::try_parse_from(["wildclass", "verify", "--frobnicate"]).is_err());
        assert!(Cli::try_parse_from(["wildclass", "verify", "--seed", "7"]).is_ok());
    }

    #[test]
    fn lambda_accepts_numbers_and_auto() {
        assert_eq!(parse_lambda("auto").unwrap(), LambdaSpec::AUTO);
        assert_eq!(parse_lambda("250").unwrap(), LambdaSpec::Fixed(250.0));
        assert!(parse_lambda("nan").is_err());
        assert!(parse_lambda("fast").is_err());
    }

    #[test]
    fn points_need_four_finite_numbers() {
        assert_eq!(parse_point("0,-5,1e-3,2").unwrap(), [0.0, -5.0, 1e-3, 2.0]);
        assert!(parse_point("1,2,3").is_err());
        assert!(parse_point("1,2,3,inf").is_err());
    }

    #[test]
    fn boxes_parse_and_reject_inverted_axes() {
        let b = parse_region("box:0,0,0,10,-1,1,0,0").unwrap();
        assert_eq!(b, ScanRegion::Box([[0.0, 0.0], [0.0, 10.0], [-1.0, 1.0], [0.0, 0.0]]));
        assert!(parse_region("box:1,0,0,1,0,1,0,1").is_err());
        assert_eq!(parse_region("C").unwrap(), ScanRegion::Named("C".into()));
    }

    #[test]
    fn scan_grid_orders_first_axis_slowest() {
        let g = ScanGrid::new([[0.0, 2.0], [0.0, 0.0], [0.0, 0.0], [0.0, 4.0]], 2).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.point(0), [0.5, 0.0, 0.0, 1.0]);
        assert_eq!(g.point(1), [0.5, 0.0, 0.0, 3.0]);
        assert_eq!(g.point(2), [1.5, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 10.0, -5e-8, 6.661338147750939e-15, 1e20, 0.1 + 0.2, 31.622776601683793] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_num(1e-9), "1e-9");
        assert_eq!(fmt_num(12.5), "12.5");
    }

    #[test]
    fn oversize_grid_is_refused() {
        let b = [[0.0, 1.0]; 4];
        assert!(ScanGrid::new(b, 100).is_ok());
        assert!(matches!(ScanGrid::new(b, 101), Err(CliError::GridTooLarge { .. })));
    }
}
