//! Experiment orchestration: point-file ingestion, algorithm dispatch,
//! space/pass accounting, and machine-readable run records.

use crate::error::{Error, Result};
use crate::generators::{generate, normalized_points, Instance, InstanceSpec};
use crate::geometry::{l1_to_linf, Norm, Point};
use crate::practical::{lattice_estimate, LatticeOutcome};
use crate::shifting::{
    estimate_cover, offline_shift_cover, sampler_count, Combiner, CoverEstimate, RunOutcome,
    ShiftConfig, ShiftMode, StreamSource, VecSource,
};
use crate::window_solvers::{
    exact_udc_l2, exact_udc_linf, WindowSolverKind, WindowSolverSpec, DEFAULT_ORACLE_LIMIT,
};
use serde::Serialize;
use std::io::{BufRead, BufReader, Seek, SeekFrom};
use std::time::Instant;

/// Output schema version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    ShiftL2,
    ShiftLinf,
    Shift1dStrips,
    TwopassLinf,
    MultipassLinf,
    LatticeL2,
    LatticeLinf,
    LatticeL1,
    OfflineExact,
    OfflineShift,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Algorithm> {
        Ok(match s {
            "shift-l2" => Algorithm::ShiftL2,
            "shift-linf" => Algorithm::ShiftLinf,
            "shift-1dstrips" => Algorithm::Shift1dStrips,
            "twopass-linf" => Algorithm::TwopassLinf,
            "multipass-linf" => Algorithm::MultipassLinf,
            "lattice-l2" => Algorithm::LatticeL2,
            "lattice-linf" => Algorithm::LatticeLinf,
            "lattice-l1" => Algorithm::LatticeL1,
            "offline-exact" => Algorithm::OfflineExact,
            "offline-shift" => Algorithm::OfflineShift,
            other => return Err(Error::ConfigError(format!("unknown algorithm {other}"))),
        })
    }
}

impl Algorithm {
    pub fn dim(&self) -> usize {
        match self {
            Algorithm::Shift1dStrips => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub enum InputSpec {
    File(std::path::PathBuf),
    Generated(InstanceSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    Auto,
    Off,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algo: Algorithm,
    pub epsilon: f64,
    pub ell: i64,
    pub seed: u64,
    pub copies: usize,
    pub sampler_override: Option<usize>,
    pub input: InputSpec,
    pub oracle: OracleMode,
    pub oracle_limit: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::ConfigError(format!("epsilon {} must be in (0,1)", self.epsilon)));
        }
        if self.ell < 1 {
            return Err(Error::ConfigError(format!("ell {} must be >= 1", self.ell)));
        }
        if self.copies == 0 {
            return Err(Error::ConfigError("copies must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub algo: Algorithm,
    pub epsilon: f64,
    pub ell: i64,
    pub seed: u64,
    pub copies: usize,
    pub samplers: Option<usize>,
}

/// One run's machine-readable result.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub schema: u32,
    pub config: ConfigEcho,
    pub estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_opt: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// Worst-case ratio bound; omitted when the sampler count was
    /// overridden below the formula value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub space_bits: u64,
    pub passes: usize,
    pub points_processed: u64,
    pub wall_ms: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_copy: Vec<CoverEstimate>,
}

// ---------------------------------------------------------------------------
// Point ingestion
// ---------------------------------------------------------------------------

/// Streaming text-format reader: one point per line, whitespace-separated
/// decimal coordinates; lines starting with '#' are ignored, except that a
/// `# radius R` directive before the first point sets the normalization
/// radius. Malformed lines or dimension drift abort with the line number.
pub struct PointReader<R> {
    reader: R,
    line_no: usize,
    dim: Option<usize>,
    radius: f64,
    saw_point: bool,
}

impl<R: BufRead> PointReader<R> {
    pub fn new(reader: R) -> Self {
        PointReader { reader, line_no: 0, dim: None, radius: 1.0, saw_point: false }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Next point, already normalized to unit radius.
    pub fn next_point(&mut self) -> Result<Option<Point>> {
        let mut line = String::new();
        loop {
            line.clear();
            self.line_no += 1;
            if self.reader.read_line(&mut line)? == 0 {
                return Ok(None);
            }
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                if it.next() == Some("radius") {
                    if self.saw_point {
                        return Err(Error::InputError {
                            line: self.line_no,
                            msg: "radius directive after points".into(),
                        });
                    }
                    let r: f64 = it
                        .next()
                        .and_then(|t| t.parse().ok())
                        .filter(|r| *r > 0.0)
                        .ok_or_else(|| Error::InputError {
                            line: self.line_no,
                            msg: "bad radius directive".into(),
                        })?;
                    self.radius = r;
                }
                continue;
            }
            let coords: std::result::Result<Vec<f64>, _> =
                trimmed.split_whitespace().map(str::parse).collect();
            let coords = coords.map_err(|e| Error::InputError {
                line: self.line_no,
                msg: format!("parse error: {e}"),
            })?;
            match self.dim {
                None => self.dim = Some(coords.len()),
                Some(d) if d != coords.len() => {
                    return Err(Error::InputError {
                        line: self.line_no,
                        msg: format!("dimension drift: expected {d}, got {}", coords.len()),
                    })
                }
                _ => {}
            }
            self.saw_point = true;
            let p = Point::new(coords).map_err(|e| Error::InputError {
                line: self.line_no,
                msg: e.to_string(),
            })?;
            return Ok(Some(p.scaled(1.0 / self.radius)));
        }
    }
}

/// Seekable file stream source (multi-pass capable).
pub struct FileSource {
    file: std::fs::File,
    reader: PointReader<BufReader<std::fs::File>>,
}

impl FileSource {
    pub fn open(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let reader = PointReader::new(BufReader::new(file.try_clone()?));
        Ok(FileSource { file, reader })
    }
}

impl StreamSource for FileSource {
    fn rewind(&mut self) -> Result<()> {
        let mut f = self.file.try_clone()?;
        f.seek(SeekFrom::Start(0))?;
        self.reader = PointReader::new(BufReader::new(f));
        Ok(())
    }
    fn next_point(&mut self) -> Result<Option<Point>> {
        self.reader.next_point()
    }
}

/// Writes the harness point-file format.
pub fn write_points<W: std::io::Write>(w: &mut W, inst: &Instance) -> Result<()> {
    if inst.radius != 1.0 {
        writeln!(w, "# radius {}", inst.radius)?;
    }
    if let Some(opt) = inst.certified_opt {
        writeln!(w, "# certified-opt {opt}")?;
    }
    for p in &inst.points {
        let coords: Vec<String> = p.coords().iter().map(|c| format!("{c}")).collect();
        writeln!(w, "{}", coords.join(" "))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Generator spec strings
// ---------------------------------------------------------------------------

/// Parses `kind:key=val,...` generator specs, e.g.
/// `clusters:k=50,per=10,seed=1` or `box:n=2000,size=100,seed=7` or
/// `circle:n=64,seed=3,probe=1` or `grid:corners=20,ell=4,seed=0`.
pub fn parse_gen_spec(s: &str) -> Result<InstanceSpec> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut kv = std::collections::HashMap::new();
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::ConfigError(format!("bad generator parameter {part}")))?;
        kv.insert(k.to_string(), v.to_string());
    }
    let get_u = |k: &str, default: u64| -> Result<u64> {
        kv.get(k)
            .map(|v| v.parse().map_err(|_| Error::ConfigError(format!("bad value for {k}"))))
            .unwrap_or(Ok(default))
    };
    let get_f = |k: &str, default: f64| -> Result<f64> {
        kv.get(k)
            .map(|v| v.parse().map_err(|_| Error::ConfigError(format!("bad value for {k}"))))
            .unwrap_or(Ok(default))
    };
    match kind {
        "box" => Ok(InstanceSpec::UniformBox {
            n: get_u("n", 1000)? as usize,
            size: get_f("size", 100.0)?,
            seed: get_u("seed", 0)?,
        }),
        "clusters" => Ok(InstanceSpec::SeparatedClusters {
            clusters: get_u("k", 50)? as usize,
            points_per: get_u("per", 10)? as usize,
            diameter: get_f("diameter", 0.1)?,
            separation: get_f("separation", 50.0)?,
            seed: get_u("seed", 0)?,
        }),
        "grid" => Ok(InstanceSpec::GridAdversarial {
            corners: get_u("corners", 20)? as usize,
            ell: get_u("ell", 4)? as i64,
            seed: get_u("seed", 0)?,
        }),
        "circle" => {
            let n = get_u("n", 64)? as usize;
            let seed = get_u("seed", 0)?;
            let index = get_u("index", n as u64)? as usize;
            let probe = get_u("probe", 1)? != 0;
            let bits = match kv.get("bits") {
                Some(b) if b.len() == n => b.chars().map(|c| c == '1').collect(),
                Some(_) => return Err(Error::ConfigError("bits length must equal n".into())),
                None => {
                    use rand::Rng;
                    use rand::SeedableRng;
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    (0..n).map(|_| rng.gen_bool(0.5)).collect()
                }
            };
            Ok(InstanceSpec::IndexCircle { n, bits, index, probe })
        }
        other => Err(Error::ConfigError(format!("unknown generator kind {other}"))),
    }
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

fn load_points(input: &InputSpec) -> Result<(Vec<Point>, Option<u32>)> {
    match input {
        InputSpec::File(path) => {
            let mut src = FileSource::open(path)?;
            let mut pts = Vec::new();
            while let Some(p) = src.next_point()? {
                pts.push(p);
            }
            Ok((pts, None))
        }
        InputSpec::Generated(spec) => {
            let inst = generate(spec)?;
            Ok((normalized_points(&inst), inst.certified_opt))
        }
    }
}

fn shift_run(cfg: &RunConfig, algo_kind: WindowSolverKind, mode: ShiftMode, points: Vec<Point>) -> Result<(RunOutcome, ShiftConfig)> {
    let ell = if algo_kind == WindowSolverKind::TwopassBboxLinf { 2 } else { cfg.ell };
    let spec = WindowSolverSpec::with_delta(
        algo_kind,
        ell,
        crate::window_solvers::DEFAULT_DELTA,
        cfg.oracle_limit,
    )?;
    let dim = spec.dim();
    let shift_cfg = ShiftConfig {
        ell,
        dim,
        epsilon: cfg.epsilon,
        solver: spec,
        mode,
        copies: cfg.copies,
        seed: cfg.seed,
        sampler_override: cfg.sampler_override,
        combiner: Combiner::Min,
    };
    let mut src = VecSource::new(points);
    let out = estimate_cover(&mut src, &shift_cfg)?;
    Ok((out, shift_cfg))
}

fn exact_opt_for(points: &[Point], norm: Norm, limit: usize) -> Result<u32> {
    match norm {
        Norm::L2 => exact_udc_l2(points, limit),
        Norm::Linf => exact_udc_linf(points, limit),
        Norm::L1 => {
            let rotated: Vec<Point> = points.iter().map(l1_to_linf).collect::<Result<_>>()?;
            exact_udc_linf(&rotated, limit)
        }
    }
}

fn algo_norm(algo: Algorithm) -> Norm {
    match algo {
        Algorithm::ShiftL2 | Algorithm::LatticeL2 | Algorithm::OfflineExact | Algorithm::OfflineShift => Norm::L2,
        Algorithm::LatticeL1 => Norm::L1,
        _ => Norm::Linf,
    }
}

/// Executes one experiment and returns its record. Deterministic given the
/// seed (wall time aside).
pub fn run_experiment(cfg: &RunConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let (points, certified) = load_points(&cfg.input)?;
    let n_points = points.len() as u64;
    if cfg.algo.dim() == 1 && points.first().is_some_and(|p| p.dim() != 1) {
        return Err(Error::ConfigError("shift-1dstrips requires 1-dimensional input".into()));
    }

    let mut per_copy = Vec::new();
    let mut passes = 1;
    let mut space_bits = 0;
    let mut bound = None;
    let formula_r = |t_max: u32| sampler_count(cfg.epsilon, t_max) as usize;

    let estimate = match cfg.algo {
        Algorithm::ShiftL2 | Algorithm::ShiftLinf | Algorithm::Shift1dStrips
        | Algorithm::TwopassLinf | Algorithm::MultipassLinf => {
            let (kind, mode) = match cfg.algo {
                Algorithm::ShiftL2 => (WindowSolverKind::GridCoresetL2, ShiftMode::RandomShift),
                Algorithm::ShiftLinf => (WindowSolverKind::GridCoresetLinf, ShiftMode::RandomShift),
                Algorithm::Shift1dStrips => (WindowSolverKind::Greedy1dWindow, ShiftMode::RandomShift),
                Algorithm::TwopassLinf => (WindowSolverKind::TwopassBboxLinf, ShiftMode::AllShifts),
                Algorithm::MultipassLinf => (WindowSolverKind::Multipass1dStrips, ShiftMode::RandomShift),
                _ => unreachable!(),
            };
            let (out, shift_cfg) = shift_run(cfg, kind, mode, points.clone())?;
            passes = out.per_copy.iter().map(|c| c.passes).max().unwrap_or(1);
            space_bits = out.total_space_bits;
            let r_formula = formula_r(shift_cfg.solver.t_max());
            if shift_cfg.sampler_count_effective() >= r_formula {
                let d = shift_cfg.dim as f64;
                let shift_factor = match mode {
                    ShiftMode::RandomShift => 1.0 + 4.0 * d / shift_cfg.ell as f64,
                    ShiftMode::AllShifts => (1.0 + 1.0 / shift_cfg.ell as f64).powf(d),
                };
                bound = Some((1.0 + cfg.epsilon) * shift_factor * shift_cfg.solver.ratio_f64());
            }
            per_copy = out.per_copy;
            out.value
        }
        Algorithm::LatticeL2 | Algorithm::LatticeLinf | Algorithm::LatticeL1 => {
            let norm = algo_norm(cfg.algo);
            let mut src = VecSource::new(points.clone());
            let out: LatticeOutcome = lattice_estimate(&mut src, norm, cfg.epsilon, cfg.copies, cfg.seed)?;
            space_bits = out.space_bits;
            bound = Some(match norm {
                Norm::L2 => 2.0 * std::f64::consts::PI * (1.0 + cfg.epsilon),
                _ => 4.0 * (1.0 + cfg.epsilon),
            });
            out.value
        }
        Algorithm::OfflineExact => {
            let opt = exact_opt_for(&points, Norm::L2, cfg.oracle_limit)?;
            bound = Some(1.0);
            opt as f64
        }
        Algorithm::OfflineShift => {
            let spec = WindowSolverSpec::with_delta(
                WindowSolverKind::GridCoresetL2,
                cfg.ell,
                crate::window_solvers::DEFAULT_DELTA,
                cfg.oracle_limit,
            )?;
            let shift_cfg = ShiftConfig {
                ell: cfg.ell,
                dim: 2,
                epsilon: cfg.epsilon,
                solver: spec,
                mode: ShiftMode::AllShifts,
                copies: 1,
                seed: cfg.seed,
                sampler_override: None,
                combiner: Combiner::Min,
            };
            offline_shift_cover(&points, &shift_cfg)? as f64
        }
    };

    let exact_opt = match cfg.oracle {
        OracleMode::Off => None,
        OracleMode::Auto => {
            if let Some(c) = certified {
                Some(c)
            } else if points.len() <= cfg.oracle_limit {
                exact_opt_for(&points, algo_norm(cfg.algo), cfg.oracle_limit).ok()
            } else {
                None
            }
        }
    };
    let ratio = exact_opt
        .filter(|&o| o > 0)
        .map(|o| estimate / o as f64);

    Ok(RunRecord {
        schema: SCHEMA_VERSION,
        config: ConfigEcho {
            algo: cfg.algo,
            epsilon: cfg.epsilon,
            ell: cfg.ell,
            seed: cfg.seed,
            copies: cfg.copies,
            samplers: cfg.sampler_override,
        },
        estimate,
        exact_opt,
        ratio,
        bound,
        space_bits,
        passes,
        points_processed: n_points,
        wall_ms: start.elapsed().as_secs_f64() * 1000.0,
        per_copy,
    })
}

/// CSV header for sweep mode.
pub const CSV_HEADER: &str =
    "algo,epsilon,ell,seed,copies,estimate,exact_opt,ratio,space_bits,passes,points,wall_ms";

pub fn csv_row(rec: &RunRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{:.3}",
        serde_json::to_value(rec.config.algo).unwrap().as_str().unwrap(),
        rec.config.epsilon,
        rec.config.ell,
        rec.config.seed,
        rec.config.copies,
        rec.estimate,
        rec.exact_opt.map_or(String::new(), |o| o.to_string()),
        rec.ratio.map_or(String::new(), |r| format!("{r}")),
        rec.space_bits,
        rec.passes,
        rec.points_processed,
        rec.wall_ms,
    )
}

pub fn default_run_config(algo: Algorithm, input: InputSpec) -> RunConfig {
    RunConfig {
        algo,
        epsilon: 0.2,
        ell: 5,
        seed: 0,
        copies: 1,
        sampler_override: None,
        input,
        oracle: OracleMode::Auto,
        oracle_limit: DEFAULT_ORACLE_LIMIT,
    }
}
