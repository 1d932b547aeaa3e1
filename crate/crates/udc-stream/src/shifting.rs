//! The shifting framework: offline reference implementations over all (or
//! one random) shifted partitions, and the streaming estimator combining a
//! distinct-elements sketch (occupied-window count) with min-wise sampled
//! window solvers (the tail fractions eta_t).
//!
//! The streamed estimate is `gamma1_hat * (1 + sum_{t>=2} eta_hat_t)`,
//! which telescopes to the total cover computed by running the window
//! solver on every window of the partition.

use crate::error::{Error, Result};
use crate::geometry::{window_id, Point, Shift, WindowId};
use crate::hashing::{
    draw_hash, encode_window, window_key_universe, HashFamilyParams, MinWiseSampler,
};
use crate::sketches::DistinctSketch;
use crate::window_solvers::{run_solver_offline, SolverInstance, WindowSolver, WindowSolverSpec};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ShiftMode {
    /// One (or `copies`) uniformly random shifts; ratio (1 + 4d/ell) w.p. 1/2.
    RandomShift,
    /// All ell^d shifts; ratio (1 + 1/ell)^d at ell^d times the space.
    AllShifts,
}

/// How per-copy estimates are combined. Each copy's underlying quantity
/// dominates a valid cover, so the minimum keeps the upper-bound character
/// while tightening toward OPT; the median is kept for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Combiner {
    Min,
    Median,
}

#[derive(Debug, Clone)]
pub struct ShiftConfig {
    pub ell: i64,
    pub dim: usize,
    pub epsilon: f64,
    pub solver: WindowSolverSpec,
    pub mode: ShiftMode,
    pub copies: usize,
    pub seed: u64,
    /// Overrides the Hoeffding-derived sampler count; guarantee claims are
    /// suppressed downstream when this is below the formula value.
    pub sampler_override: Option<usize>,
    pub combiner: Combiner,
}

impl ShiftConfig {
    pub fn new(ell: i64, dim: usize, epsilon: f64, solver: WindowSolverSpec) -> Result<Self> {
        let cfg = ShiftConfig {
            ell,
            dim,
            epsilon,
            solver,
            mode: ShiftMode::RandomShift,
            copies: 1,
            seed: 0,
            sampler_override: None,
            combiner: Combiner::Min,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon {} must be in (0,1)",
                self.epsilon
            )));
        }
        if self.copies == 0 {
            return Err(Error::InvalidArgument("copies must be >= 1".into()));
        }
        if self.solver.ell != self.ell {
            return Err(Error::InvalidArgument(format!(
                "solver ell {} differs from config ell {}",
                self.solver.ell, self.ell
            )));
        }
        if self.solver.dim() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "solver dimension {} differs from config dimension {}",
                self.solver.dim(),
                self.dim
            )));
        }
        if self.mode == ShiftMode::RandomShift && self.ell < 2 * self.dim as i64 {
            return Err(Error::InvalidArgument(format!(
                "random shifting requires ell >= 2d ({} < {})",
                self.ell,
                2 * self.dim
            )));
        }
        Ok(())
    }

    pub fn sampler_count_effective(&self) -> usize {
        self.sampler_override
            .unwrap_or_else(|| sampler_count(self.epsilon, self.solver.t_max()) as usize)
    }
}

/// Sampler count making every eta_hat_t accurate to eps/T w.p. 1 - 1/(100T):
/// `r = ceil(T^2 * ln(200 T) / (2 eps^2))` from the Hoeffding tail
/// `2 exp(-2 r eps^2 / T^2) <= 1/(100 T)`.
pub fn sampler_count(epsilon: f64, t_max: u32) -> u64 {
    let t = t_max as f64;
    (t * t * (200.0 * t).ln() / (2.0 * epsilon * epsilon)).ceil() as u64
}

/// Result of one finalized estimator (or combined run).
#[derive(Debug, Clone, serde::Serialize)]
pub struct CoverEstimate {
    pub value: f64,
    pub gamma1_hat: f64,
    /// eta_hat_t for t = 2..=T, nonincreasing, each in [0,1].
    pub eta_hat: Vec<f64>,
    pub shift_offsets: Vec<i64>,
    pub space_bits: u64,
    pub points_processed: u64,
    pub passes: usize,
    pub samplers: usize,
}

/// One shift's streaming state: a distinct sketch plus r min-wise samplers
/// observing the identical shift.
pub struct ShiftEstimator {
    shift: Shift,
    sketch: DistinctSketch,
    samplers: Vec<MinWiseSampler<SolverInstance>>,
    t_max: u32,
    pass: usize,
    needs_more: bool,
    points_processed: u64,
}

impl ShiftEstimator {
    pub fn new<R: Rng>(cfg: &ShiftConfig, shift: Shift, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        if shift.dim() != cfg.dim || shift.ell() != cfg.ell {
            return Err(Error::InvalidArgument("shift does not match config".into()));
        }
        let universe = window_key_universe(cfg.dim)?;
        let sketch = DistinctSketch::new(cfg.epsilon, universe, rng)?;
        let params = HashFamilyParams::for_minwise(cfg.epsilon, universe)?;
        let r = cfg.sampler_count_effective();
        let samplers = (0..r)
            .map(|_| MinWiseSampler::new(draw_hash(&params, rng), cfg.solver.build()))
            .collect();
        Ok(ShiftEstimator {
            shift,
            sketch,
            samplers,
            t_max: cfg.solver.t_max(),
            pass: 0,
            needs_more: false,
            points_processed: 0,
        })
    }

    pub fn shift(&self) -> &Shift {
        &self.shift
    }

    /// Streams one point: on pass 0 the window key feeds the sketch and may
    /// be adopted by samplers; on later passes samplers only feed their
    /// frozen window.
    pub fn process(&mut self, p: &Point) -> Result<()> {
        let id = window_id(p, &self.shift)?;
        let key = encode_window(&id)?;
        if self.pass == 0 {
            self.sketch.insert(key)?;
            self.points_processed += 1;
        }
        for sampler in &mut self.samplers {
            sampler.offer(key, &id, p)?;
        }
        Ok(())
    }

    /// Ends the current pass; freezes sampler windows after pass 0. Returns
    /// true iff any sampler's solver requests another pass.
    pub fn end_pass(&mut self) -> bool {
        let mut more = false;
        for sampler in &mut self.samplers {
            sampler.freeze();
            more |= sampler.solver_mut().end_pass();
        }
        self.pass += 1;
        self.needs_more = more;
        more
    }

    pub fn finalize(&self) -> Result<CoverEstimate> {
        if self.pass == 0 && self.points_processed > 0 {
            return Err(Error::NotReady("stream pass not ended".into()));
        }
        if self.needs_more {
            return Err(Error::NotReady("samplers have a pending pass".into()));
        }
        let r = self.samplers.len();
        let mut outputs = Vec::with_capacity(r);
        for sampler in &self.samplers {
            outputs.push(if sampler.current_window().is_some() {
                sampler.solver().finalize()?
            } else {
                0
            });
        }
        let gamma1_hat = self.sketch.estimate();
        let eta_hat = eta_from_outputs(&outputs, self.t_max);
        let value = estimate_value(gamma1_hat, &eta_hat);
        Ok(CoverEstimate {
            value,
            gamma1_hat,
            eta_hat,
            shift_offsets: self.shift.offsets().to_vec(),
            space_bits: self.space_bits(),
            points_processed: self.points_processed,
            passes: self.pass.max(1),
            samplers: r,
        })
    }

    pub fn space_bits(&self) -> u64 {
        self.sketch.space_bits() + self.samplers.iter().map(|s| s.space_bits()).sum::<u64>()
    }
}

fn eta_from_outputs(outputs: &[u32], t_max: u32) -> Vec<f64> {
    let r = outputs.len().max(1) as f64;
    (2..=t_max)
        .map(|t| outputs.iter().filter(|&&o| o >= t).count() as f64 / r)
        .collect()
}

fn estimate_value(gamma1_hat: f64, eta_hat: &[f64]) -> f64 {
    gamma1_hat * (1.0 + eta_hat.iter().sum::<f64>())
}

// ---------------------------------------------------------------------------
// Offline reference path
// ---------------------------------------------------------------------------

/// Per-window solver outputs for one shift, in first-occurrence stream
/// order: (key, window, output, passes used).
pub fn window_covers(
    points: &[Point],
    shift: &Shift,
    spec: &WindowSolverSpec,
) -> Result<Vec<(u64, WindowId, u32, usize)>> {
    let mut order: Vec<(u64, WindowId, Vec<usize>)> = Vec::new();
    let mut index: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
    for (i, p) in points.iter().enumerate() {
        let id = window_id(p, shift)?;
        let key = encode_window(&id)?;
        match index.get(&key) {
            Some(&slot) => order[slot].2.push(i),
            None => {
                index.insert(key, order.len());
                order.push((key, id, vec![i]));
            }
        }
    }
    order
        .into_iter()
        .map(|(key, id, idxs)| {
            let mut solver = spec.build();
            solver.bind(shift.clone(), id.clone());
            let pts: Vec<Point> = idxs.iter().map(|&i| points[i].clone()).collect();
            let out = run_solver_offline(&mut solver, &pts)?;
            Ok((key, id, out, solver.passes_used()))
        })
        .collect()
}

/// Total cover from running the window solver on every window of one shift.
pub fn offline_shift_total(points: &[Point], shift: &Shift, spec: &WindowSolverSpec) -> Result<u64> {
    Ok(window_covers(points, shift, spec)?
        .iter()
        .map(|&(_, _, c, _)| c as u64)
        .sum())
}

/// The sketch-free reference: ALL_SHIFTS minimizes the per-shift total over
/// all ell^d partitions; RANDOM_SHIFT evaluates one uniformly drawn shift.
pub fn offline_shift_cover(points: &[Point], cfg: &ShiftConfig) -> Result<u64> {
    cfg.validate()?;
    if points.is_empty() {
        return Ok(0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.mode {
        ShiftMode::AllShifts => Shift::enumerate(cfg.ell, cfg.dim)?
            .iter()
            .map(|s| offline_shift_total(points, s, &cfg.solver))
            .try_fold(u64::MAX, |acc, t| Ok(acc.min(t?))),
        ShiftMode::RandomShift => {
            let s = Shift::random(cfg.ell, cfg.dim, &mut rng)?;
            offline_shift_total(points, &s, &cfg.solver)
        }
    }
}

// ---------------------------------------------------------------------------
// Grouped fast path
// ---------------------------------------------------------------------------

/// Canonical reduction of a lazy dot-product accumulator modulo the
/// Mersenne prime 2^61 - 1, using 2^61 = 1 (mod p) twice.
#[inline]
fn fold_mersenne(a: u128) -> u64 {
    let p = crate::hashing::MERSENNE_P;
    let m = p as u128;
    let x = (a >> 61) + (a & m); // < 2^67
    let mut r = ((x >> 61) + (x & m)) as u64; // < p + 2^6
    while r >= p {
        r -= p;
    }
    r
}

/// Computes the same estimate as the streaming path from precomputed
/// per-window covers, exploiting two exact equivalences: the sketch state
/// depends only on the set of occupied window keys, and each sampler ends
/// holding the hash-argmin over occupied windows with exactly that window's
/// substream fed to its solver. Hash argmins are evaluated sampler-parallel.
pub fn estimate_from_window_covers<R: Rng>(
    cfg: &ShiftConfig,
    shift: &Shift,
    covers: &[(u64, WindowId, u32, usize)],
    rng: &mut R,
) -> Result<CoverEstimate> {
    cfg.validate()?;
    let universe = window_key_universe(cfg.dim)?;
    let mut sketch = DistinctSketch::new(cfg.epsilon, universe, rng)?;
    for &(key, _, _, _) in covers {
        sketch.insert(key)?;
    }
    let params = HashFamilyParams::for_minwise(cfg.epsilon, universe)?;
    let r = cfg.sampler_count_effective();
    let hashes: Vec<_> = (0..r).map(|_| draw_hash(&params, rng)).collect();
    let keys: Vec<u64> = covers.iter().map(|&(k, _, _, _)| k).collect();

    // Per-sampler winner; strict < with first-occurrence order matches the
    // incumbent-wins tie rule of the streaming protocol. All hashes share
    // the key set, so each hash is a coefficient-by-key-powers dot product;
    // lazy u128 accumulation defers the Mersenne fold to once per value
    // (exact same field element as Horner evaluation).
    let winner_counts: Vec<u64> = if keys.is_empty() {
        Vec::new()
    } else {
        let w = keys.len();
        debug_assert_eq!(params.prime, crate::hashing::MERSENNE_P);
        let degree = params.degree as usize;
        // pows[j*w + i] = keys[i]^j mod p, j-major for sequential access
        let p = crate::hashing::MERSENNE_P;
        let mut pows = vec![0u64; degree * w];
        for (i, &k) in keys.iter().enumerate() {
            let mut kp = 1u64 % p;
            for j in 0..degree {
                pows[j * w + i] = kp;
                kp = ((kp as u128 * k as u128) % p as u128) as u64;
            }
        }
        let counts = hashes
            .par_iter()
            .fold(
                || (vec![0u64; w], vec![0u128; w]),
                |(mut wins, mut acc), h| {
                    acc.iter_mut().for_each(|a| *a = 0);
                    for (j, &c) in h.coeffs().iter().enumerate() {
                        let c = c as u128;
                        // 19 terms of < 2^122 each: no u128 overflow
                        for (a, &kp) in acc.iter_mut().zip(&pows[j * w..(j + 1) * w]) {
                            *a += c * kp as u128;
                        }
                    }
                    let mut best = (u64::MAX, usize::MAX);
                    for (i, &a) in acc.iter().enumerate() {
                        let v = fold_mersenne(a);
                        if v < best.0 {
                            best = (v, i);
                        }
                    }
                    wins[best.1] += 1;
                    (wins, acc)
                },
            )
            .map(|(wins, _)| wins)
            .reduce(
                || vec![0u64; w],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        counts
    };

    let t_max = cfg.solver.t_max();
    let eta_hat: Vec<f64> = (2..=t_max)
        .map(|t| {
            let hits: u64 = covers
                .iter()
                .zip(&winner_counts)
                .filter(|((_, _, c, _), _)| *c >= t)
                .map(|(_, &n)| n)
                .sum();
            hits as f64 / r as f64
        })
        .collect();
    let gamma1_hat = sketch.estimate();
    let value = estimate_value(gamma1_hat, &eta_hat);
    let passes = covers.iter().map(|&(_, _, _, p)| p).max().unwrap_or(1);
    let hash_bits = hashes.first().map_or(0, |h| h.space_bits());
    Ok(CoverEstimate {
        value,
        gamma1_hat,
        eta_hat,
        shift_offsets: shift.offsets().to_vec(),
        space_bits: sketch.space_bits() + r as u64 * (hash_bits + 64),
        points_processed: 0, // not tracked on the precomputed-covers path
        passes,
        samplers: r,
    })
}

// ---------------------------------------------------------------------------
// End-to-end driver
// ---------------------------------------------------------------------------

/// A replayable point stream.
pub trait StreamSource {
    fn rewind(&mut self) -> Result<()>;
    fn next_point(&mut self) -> Result<Option<Point>>;
    fn seekable(&self) -> bool {
        true
    }
}

pub struct VecSource {
    points: Vec<Point>,
    pos: usize,
}

impl VecSource {
    pub fn new(points: Vec<Point>) -> Self {
        VecSource { points, pos: 0 }
    }
}

impl StreamSource for VecSource {
    fn rewind(&mut self) -> Result<()> {
        self.pos = 0;
        Ok(())
    }
    fn next_point(&mut self) -> Result<Option<Point>> {
        let p = self.points.get(self.pos).cloned();
        self.pos += 1;
        Ok(p)
    }
}

/// Combined outcome of a multi-copy run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunOutcome {
    pub value: f64,
    pub combiner: Combiner,
    pub total_space_bits: u64,
    pub per_copy: Vec<CoverEstimate>,
}

/// Runs the full streaming estimator: RANDOM_SHIFT maintains `copies`
/// independent estimators (independent shifts, hashes, sketches) in one
/// joint pass-set; ALL_SHIFTS maintains one estimator per shift. Copies are
/// combined by the configured combiner (minimum by default).
pub fn estimate_cover<S: StreamSource>(source: &mut S, cfg: &ShiftConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shifts: Vec<Shift> = match cfg.mode {
        ShiftMode::AllShifts => Shift::enumerate(cfg.ell, cfg.dim)?,
        ShiftMode::RandomShift => (0..cfg.copies)
            .map(|_| Shift::random(cfg.ell, cfg.dim, &mut rng))
            .collect::<Result<_>>()?,
    };
    if !cfg.solver.single_pass() && !source.seekable() {
        return Err(Error::UnsupportedSource);
    }
    let mut estimators: Vec<ShiftEstimator> = shifts
        .into_iter()
        .map(|s| ShiftEstimator::new(cfg, s, &mut rng))
        .collect::<Result<_>>()?;

    loop {
        while let Some(p) = source.next_point()? {
            for est in &mut estimators {
                est.process(&p)?;
            }
        }
        let mut more = false;
        for est in &mut estimators {
            more |= est.end_pass();
        }
        if !more {
            break;
        }
        source.rewind()?;
    }

    let per_copy: Vec<CoverEstimate> = estimators.iter().map(|e| e.finalize()).collect::<Result<_>>()?;
    Ok(combine(per_copy, cfg.combiner))
}

pub fn combine(per_copy: Vec<CoverEstimate>, combiner: Combiner) -> RunOutcome {
    let mut values: Vec<f64> = per_copy.iter().map(|c| c.value).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let value = match combiner {
        Combiner::Min => values.first().copied().unwrap_or(0.0),
        Combiner::Median => values.get(values.len() / 2).copied().unwrap_or(0.0),
    };
    RunOutcome {
        value,
        combiner,
        total_space_bits: per_copy.iter().map(|c| c.space_bits).sum(),
        per_copy,
    }
}

/// gamma_t for t = 1..=T from an assignment of cover sizes to windows.
pub fn telescope_gamma(covers: &[u32], t_max: u32) -> Vec<u64> {
    (1..=t_max)
        .map(|t| covers.iter().filter(|&&c| c >= t).count() as u64)
        .collect()
}
