//! Within-window streaming solvers and the exact offline oracles used to
//! validate them.
//!
//! Every solver returns an over-approximation `u` with
//! `OPT_w <= u <= r_A * OPT_w` for its window, so the shifting framework's
//! summed estimate is a valid upper bound on a realizable cover. The lower
//! witness (e.g. `|C|` for the coreset solvers) is exposed separately for
//! diagnostics.

use crate::error::{Error, Result};
use crate::geometry::{window_id, Norm, Point, Shift, WindowId, MEMBERSHIP_TOL};
use std::collections::HashMap;

/// Default coreset cell side, below the (2/sqrt(3) - 1)/sqrt(2) bound.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Largest delta admissible for the L2 coreset solver.
pub fn max_delta_l2() -> f64 {
    (2.0 / 3.0_f64.sqrt() - 1.0) / 2.0_f64.sqrt()
}

/// Default cap on oracle input size.
pub const DEFAULT_ORACLE_LIMIT: usize = 30;

/// Hard cap imposed by the u128 cover bitmasks.
pub const ORACLE_HARD_LIMIT: usize = 100;

const EPS: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Exact oracles
// ---------------------------------------------------------------------------

fn dedup_points(points: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| q == p) {
            out.push(p.clone());
        }
    }
    out
}

/// Candidate unit-disc masks for the L2 oracle: one disc centered at each
/// point, plus for every pair at distance <= 2 the two unit circles through
/// both points. Deterministic lexicographic ordering by center.
pub fn candidate_masks_l2(points: &[Point]) -> Result<(Vec<u128>, usize)> {
    let pts = dedup_points(points);
    let n = pts.len();
    let mut centers: Vec<(f64, f64)> = Vec::new();
    for p in &pts {
        centers.push((p.coord(0), p.coord(1)));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (ax, ay) = (pts[i].coord(0), pts[i].coord(1));
            let (bx, by) = (pts[j].coord(0), pts[j].coord(1));
            let d = ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt();
            if d > 2.0 * (1.0 + MEMBERSHIP_TOL) || d == 0.0 {
                continue;
            }
            let h = (1.0 - (d / 2.0).powi(2)).max(0.0).sqrt();
            let (mx, my) = ((ax + bx) / 2.0, (ay + by) / 2.0);
            let (ux, uy) = ((by - ay) / d, (ax - bx) / d);
            centers.push((mx + h * ux, my + h * uy));
            centers.push((mx - h * ux, my - h * uy));
        }
    }
    centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    centers.dedup();
    let masks = centers
        .iter()
        .map(|&(cx, cy)| {
            let mut m = 0u128;
            for (k, p) in pts.iter().enumerate() {
                let d = ((p.coord(0) - cx).powi(2) + (p.coord(1) - cy).powi(2)).sqrt();
                if d <= 1.0 + MEMBERSHIP_TOL {
                    m |= 1 << k;
                }
            }
            m
        })
        .filter(|&m| m != 0)
        .collect();
    Ok((masks, n))
}

/// Candidate 2x2-square masks for the Linf oracle: left edge at some
/// point's x, bottom edge at some point's y.
pub fn candidate_masks_linf(points: &[Point]) -> Result<(Vec<u128>, usize)> {
    let pts = dedup_points(points);
    let n = pts.len();
    let mut anchors: Vec<(f64, f64)> = Vec::new();
    for a in &pts {
        for b in &pts {
            anchors.push((a.coord(0), b.coord(1)));
        }
    }
    anchors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    anchors.dedup();
    let masks = anchors
        .iter()
        .map(|&(x, y)| {
            let mut m = 0u128;
            for (k, p) in pts.iter().enumerate() {
                let (px, py) = (p.coord(0), p.coord(1));
                if px >= x - EPS && px <= x + 2.0 + EPS && py >= y - EPS && py <= y + 2.0 + EPS {
                    m |= 1 << k;
                }
            }
            m
        })
        .filter(|&m| m != 0)
        .collect();
    Ok((masks, n))
}

/// Branch-and-bound minimum set cover over candidate masks. Greedy upper
/// bound for pruning, branching on the uncovered point with the fewest
/// covering candidates.
pub fn min_set_cover(masks: &[u128], n_points: usize) -> u32 {
    if n_points == 0 {
        return 0;
    }
    let full: u128 = if n_points == 128 { !0 } else { (1u128 << n_points) - 1 };

    // dominance pruning: a candidate whose point set is contained in
    // another's can never be needed in a minimum cover
    let mut sorted: Vec<u128> = masks.to_vec();
    sorted.sort_unstable_by_key(|m| std::cmp::Reverse(m.count_ones()));
    let mut pruned: Vec<u128> = Vec::with_capacity(sorted.len());
    for m in sorted {
        if !pruned.iter().any(|&k| m & !k == 0) {
            pruned.push(m);
        }
    }
    let masks: &[u128] = &pruned;

    // greedy upper bound
    let mut covered = 0u128;
    let mut ub = 0u32;
    while covered != full {
        let best = masks
            .iter()
            .max_by_key(|&&m| (m & !covered).count_ones())
            .copied()
            .unwrap_or(0);
        if best & !covered == 0 {
            break; // uncoverable point; caller guarantees this cannot happen
        }
        covered |= best;
        ub += 1;
    }

    // per-point candidate lists
    let mut covering: Vec<Vec<usize>> = vec![Vec::new(); n_points];
    for (i, &m) in masks.iter().enumerate() {
        let mut bits = m;
        while bits != 0 {
            let k = bits.trailing_zeros() as usize;
            covering[k].push(i);
            bits &= bits - 1;
        }
    }
    let max_cover = masks.iter().map(|m| m.count_ones()).max().unwrap_or(1).max(1);

    fn dfs(
        covered: u128,
        depth: u32,
        best: &mut u32,
        full: u128,
        masks: &[u128],
        covering: &[Vec<usize>],
        max_cover: u32,
    ) {
        if covered == full {
            *best = (*best).min(depth);
            return;
        }
        let uncovered = (full & !covered).count_ones();
        let lb = depth + uncovered.div_ceil(max_cover);
        if lb >= *best {
            return;
        }
        // branch on the uncovered point with fewest candidates
        let mut pick = usize::MAX;
        let mut pick_count = usize::MAX;
        let mut bits = full & !covered;
        while bits != 0 {
            let k = bits.trailing_zeros() as usize;
            if covering[k].len() < pick_count {
                pick = k;
                pick_count = covering[k].len();
            }
            bits &= bits - 1;
        }
        let mut options: Vec<usize> = covering[pick].clone();
        options.sort_by_key(|&i| std::cmp::Reverse((masks[i] & !covered).count_ones()));
        for i in options {
            dfs(covered | masks[i], depth + 1, best, full, masks, covering, max_cover);
        }
    }

    let mut best = ub;
    dfs(0, 0, &mut best, full, masks, &covering, max_cover);
    best
}

/// Independent exhaustive minimum set cover: tries all candidate subsets by
/// increasing size. Exponential; test oracle for small inputs only.
pub fn exhaustive_min_cover(masks: &[u128], n_points: usize) -> u32 {
    if n_points == 0 {
        return 0;
    }
    let full: u128 = (1u128 << n_points) - 1;
    for k in 1..=n_points as u32 {
        if cover_of_size_exists(masks, 0, full, k, 0) {
            return k;
        }
    }
    unreachable!("per-point candidates always exist")
}

fn cover_of_size_exists(masks: &[u128], start: usize, remaining: u128, k: u32, covered: u128) -> bool {
    if remaining & !covered == 0 {
        return true;
    }
    if k == 0 {
        return false;
    }
    for i in start..masks.len() {
        if masks[i] & remaining & !covered != 0
            && cover_of_size_exists(masks, i + 1, remaining, k - 1, covered | masks[i])
        {
            return true;
        }
    }
    false
}

fn check_oracle_input(points: &[Point], limit: usize) -> Result<()> {
    let limit = limit.min(ORACLE_HARD_LIMIT);
    if points.len() > limit {
        return Err(Error::OracleLimitExceeded { points: points.len(), limit });
    }
    for p in points {
        if p.dim() != 2 {
            return Err(Error::UnsupportedDimension(p.dim()));
        }
    }
    Ok(())
}

/// Minimum number of unit L2 discs covering the points.
pub fn exact_udc_l2(points: &[Point], limit: usize) -> Result<u32> {
    check_oracle_input(points, limit)?;
    if points.is_empty() {
        return Ok(0);
    }
    let (masks, n) = candidate_masks_l2(points)?;
    Ok(min_set_cover(&masks, n))
}

/// Minimum number of 2x2 axis-aligned squares covering the points.
pub fn exact_udc_linf(points: &[Point], limit: usize) -> Result<u32> {
    check_oracle_input(points, limit)?;
    if points.is_empty() {
        return Ok(0);
    }
    let (masks, n) = candidate_masks_linf(points)?;
    Ok(min_set_cover(&masks, n))
}

/// Exact minimum number of length-2 intervals covering sorted reals:
/// place `[x, x+2]` at each leftmost uncovered `x`.
pub fn greedy_1d(points: &[f64]) -> Result<u32> {
    if points.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::ContractViolation("greedy_1d input must be sorted".into()));
    }
    let mut count = 0u32;
    let mut cover_end = f64::NEG_INFINITY;
    for &x in points {
        if x > cover_end + EPS {
            count += 1;
            cover_end = x + 2.0;
        }
    }
    Ok(count)
}

/// Three unit-disc centers at distance 1/sqrt(3) from the origin, angles
/// 0, 120, 240 degrees. The three unit discs cover the disc of radius
/// `1 + delta*sqrt(2)` centered at the origin, provided that radius does
/// not exceed 2/sqrt(3).
pub fn cover_expanded_disc(delta: f64) -> Result<[Point; 3]> {
    let expanded = 1.0 + delta * 2.0_f64.sqrt();
    if delta < 0.0 || expanded > 2.0 / 3.0_f64.sqrt() + 1e-12 {
        return Err(Error::InvalidDelta(delta));
    }
    let r = 1.0 / 3.0_f64.sqrt();
    let mk = |deg: f64| {
        let a = deg.to_radians();
        Point::p2(r * a.cos(), r * a.sin())
    };
    Ok([mk(0.0), mk(120.0), mk(240.0)])
}

// ---------------------------------------------------------------------------
// Solver specs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WindowSolverKind {
    GridCoresetL2,
    GridCoresetLinf,
    Multipass1dStrips,
    TwopassBboxLinf,
    Greedy1dWindow,
}

/// Static description of a within-window solver: kind, shifting parameter,
/// coreset cell side, declared approximation ratio and output bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSolverSpec {
    pub kind: WindowSolverKind,
    pub ell: i64,
    pub delta: f64,
    pub oracle_limit: usize,
}

impl WindowSolverSpec {
    pub fn new(kind: WindowSolverKind, ell: i64) -> Result<Self> {
        Self::with_delta(kind, ell, DEFAULT_DELTA, DEFAULT_ORACLE_LIMIT)
    }

    pub fn with_delta(kind: WindowSolverKind, ell: i64, delta: f64, oracle_limit: usize) -> Result<Self> {
        if ell < 1 {
            return Err(Error::InvalidArgument(format!("ell {ell} must be >= 1")));
        }
        match kind {
            WindowSolverKind::GridCoresetL2 => {
                if !(delta > 0.0 && delta < max_delta_l2()) {
                    return Err(Error::InvalidDelta(delta));
                }
            }
            WindowSolverKind::GridCoresetLinf => {
                if !(delta > 0.0 && delta <= 1.0) {
                    return Err(Error::InvalidDelta(delta));
                }
            }
            WindowSolverKind::TwopassBboxLinf => {
                // Output 4 stands in for "at least 3"; the 4/3 ratio and the
                // T bound both require 4x4 windows.
                if ell != 2 {
                    return Err(Error::InvalidArgument(format!(
                        "two-pass bbox solver requires ell = 2, got {ell}"
                    )));
                }
            }
            _ => {}
        }
        Ok(WindowSolverSpec { kind, ell, delta, oracle_limit })
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            WindowSolverKind::Greedy1dWindow => 1,
            _ => 2,
        }
    }

    /// Trivial-cover bound on a solver's output: 4*ell^2 in 2D, ell+1 in 1D.
    pub fn t_max(&self) -> u32 {
        match self.dim() {
            1 => (self.ell + 1) as u32,
            _ => (4 * self.ell * self.ell) as u32,
        }
    }

    /// Declared approximation ratio as a rational (num, den).
    pub fn ratio(&self) -> (u32, u32) {
        match self.kind {
            WindowSolverKind::GridCoresetL2 => (3, 1),
            WindowSolverKind::GridCoresetLinf => (4, 1),
            WindowSolverKind::Multipass1dStrips => (2, 1),
            WindowSolverKind::TwopassBboxLinf => (4, 3),
            WindowSolverKind::Greedy1dWindow => (1, 1),
        }
    }

    pub fn ratio_f64(&self) -> f64 {
        let (n, d) = self.ratio();
        n as f64 / d as f64
    }

    /// Upper bound on passes the solver may request.
    pub fn max_passes(&self) -> usize {
        match self.kind {
            WindowSolverKind::Multipass1dStrips | WindowSolverKind::Greedy1dWindow => {
                self.ell as usize + 1
            }
            WindowSolverKind::TwopassBboxLinf => 2,
            _ => 1,
        }
    }

    pub fn single_pass(&self) -> bool {
        self.max_passes() == 1
    }

    pub fn build(&self) -> SolverInstance {
        let inner = match self.kind {
            WindowSolverKind::GridCoresetL2 => Inner::GridCoreset(GridCoresetSolver::new(
                Norm::L2,
                self.delta,
                self.oracle_limit,
            )),
            WindowSolverKind::GridCoresetLinf => Inner::GridCoreset(GridCoresetSolver::new(
                Norm::Linf,
                self.delta,
                self.oracle_limit,
            )),
            WindowSolverKind::Multipass1dStrips => Inner::Strips(MultipassStripsSolver::new(false)),
            WindowSolverKind::TwopassBboxLinf => Inner::Bbox(TwoPassBboxSolver::new()),
            WindowSolverKind::Greedy1dWindow => Inner::Strips(MultipassStripsSolver::new(true)),
        };
        SolverInstance { inner, bound: None }
    }
}

// ---------------------------------------------------------------------------
// Solver trait and instances
// ---------------------------------------------------------------------------

/// A streaming algorithm restricted to one window's substream.
pub trait WindowSolver {
    fn process(&mut self, p: &Point) -> Result<()>;
    /// Marks the end of one full pass; returns true iff another pass is
    /// requested.
    fn end_pass(&mut self) -> bool;
    /// Cover estimate `u` with `OPT_w <= u <= r_A * OPT_w`; 0 iff the window
    /// received no points.
    fn finalize(&self) -> Result<u32>;
    fn reset(&mut self);
    fn space_bits(&self) -> u64;
    fn passes_used(&self) -> usize;
}

#[derive(Debug, Clone)]
enum Inner {
    GridCoreset(GridCoresetSolver),
    Strips(MultipassStripsSolver),
    Bbox(TwoPassBboxSolver),
}

/// A live solver, optionally bound to a specific window for contract
/// checking (the offline driver binds; the sampler path feeds only matching
/// points by construction).
#[derive(Debug, Clone)]
pub struct SolverInstance {
    inner: Inner,
    bound: Option<(Shift, WindowId)>,
}

impl SolverInstance {
    pub fn bind(&mut self, shift: Shift, id: WindowId) {
        self.bound = Some((shift, id));
    }

    /// Lower witness for diagnostics (the raw exact-cover size on retained
    /// points for coreset solvers; equals the output for the others).
    pub fn witness(&self) -> Result<u32> {
        match &self.inner {
            Inner::GridCoreset(s) => s.witness(),
            _ => self.finalize(),
        }
    }
}

impl WindowSolver for SolverInstance {
    fn process(&mut self, p: &Point) -> Result<()> {
        if let Some((shift, id)) = &self.bound {
            if &window_id(p, shift)? != id {
                return Err(Error::ContractViolation("point outside bound window".into()));
            }
        }
        match &mut self.inner {
            Inner::GridCoreset(s) => s.process(p),
            Inner::Strips(s) => s.process(p),
            Inner::Bbox(s) => s.process(p),
        }
    }

    fn end_pass(&mut self) -> bool {
        match &mut self.inner {
            Inner::GridCoreset(s) => s.end_pass(),
            Inner::Strips(s) => s.end_pass(),
            Inner::Bbox(s) => s.end_pass(),
        }
    }

    fn finalize(&self) -> Result<u32> {
        match &self.inner {
            Inner::GridCoreset(s) => s.finalize(),
            Inner::Strips(s) => s.finalize(),
            Inner::Bbox(s) => s.finalize(),
        }
    }

    fn reset(&mut self) {
        match &mut self.inner {
            Inner::GridCoreset(s) => s.reset(),
            Inner::Strips(s) => s.reset(),
            Inner::Bbox(s) => s.reset(),
        }
    }

    fn space_bits(&self) -> u64 {
        match &self.inner {
            Inner::GridCoreset(s) => s.space_bits(),
            Inner::Strips(s) => s.space_bits(),
            Inner::Bbox(s) => s.space_bits(),
        }
    }

    fn passes_used(&self) -> usize {
        match &self.inner {
            Inner::GridCoreset(s) => s.passes_used(),
            Inner::Strips(s) => s.passes_used(),
            Inner::Bbox(s) => s.passes_used(),
        }
    }
}

// ---------------------------------------------------------------------------
// Grid coreset (single pass, L2 and Linf)
// ---------------------------------------------------------------------------

/// Keeps the first streamed point of every delta-cell, then solves the
/// cover problem exactly on the retained points. Output is `3*|C|` (L2) or
/// `4*|C|` (Linf): expanding each disc of `C` by the coreset radius covers
/// every discarded point, and the expanded ball is coverable by 3 unit
/// discs resp. 4 unit squares.
#[derive(Debug, Clone)]
pub struct GridCoresetSolver {
    norm: Norm,
    delta: f64,
    oracle_limit: usize,
    cells: HashMap<(i64, i64), Point>,
}

impl GridCoresetSolver {
    fn new(norm: Norm, delta: f64, oracle_limit: usize) -> Self {
        GridCoresetSolver { norm, delta, oracle_limit, cells: HashMap::new() }
    }

    pub fn retained(&self) -> Vec<Point> {
        let mut pts: Vec<Point> = self.cells.values().cloned().collect();
        pts.sort_by(|a, b| a.coords().partial_cmp(b.coords()).unwrap());
        pts
    }

    fn witness(&self) -> Result<u32> {
        let pts = self.retained();
        match self.norm {
            Norm::L2 => exact_udc_l2(&pts, self.oracle_limit),
            _ => exact_udc_linf(&pts, self.oracle_limit),
        }
    }
}

impl WindowSolver for GridCoresetSolver {
    fn process(&mut self, p: &Point) -> Result<()> {
        if p.dim() != 2 {
            return Err(Error::UnsupportedDimension(p.dim()));
        }
        let cell = (
            (p.coord(0) / self.delta).floor() as i64,
            (p.coord(1) / self.delta).floor() as i64,
        );
        self.cells.entry(cell).or_insert_with(|| p.clone());
        Ok(())
    }

    fn end_pass(&mut self) -> bool {
        false
    }

    fn finalize(&self) -> Result<u32> {
        if self.cells.is_empty() {
            return Ok(0);
        }
        let factor = match self.norm {
            Norm::L2 => 3,
            _ => 4,
        };
        Ok(factor * self.witness()?)
    }

    fn reset(&mut self) {
        self.cells.clear();
    }

    fn space_bits(&self) -> u64 {
        // one retained point (2 x f64) + cell index (2 x 20 bits) per cell
        self.cells.len() as u64 * (2 * 64 + 2 * 20)
    }

    fn passes_used(&self) -> usize {
        1
    }
}

// ---------------------------------------------------------------------------
// Two-pass bounding-rectangle classifier (Linf, ell = 2)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TwoPassBboxSolver {
    bbox: Option<[f64; 4]>, // minx, miny, maxx, maxy
    pass: usize,
    /// Candidate two-square placements from pass 0; each flag stays true
    /// while every pass-1 point is covered by the placement.
    placements: Vec<([f64; 2], [f64; 2])>,
    placement_ok: Vec<bool>,
    done: bool,
}

impl TwoPassBboxSolver {
    fn new() -> Self {
        TwoPassBboxSolver {
            bbox: None,
            pass: 0,
            placements: Vec::new(),
            placement_ok: Vec::new(),
            done: false,
        }
    }

    fn square_covers(anchor: &[f64; 2], p: &Point) -> bool {
        let (x, y) = (p.coord(0), p.coord(1));
        x >= anchor[0] - EPS && x <= anchor[0] + 2.0 + EPS && y >= anchor[1] - EPS && y <= anchor[1] + 2.0 + EPS
    }
}

impl WindowSolver for TwoPassBboxSolver {
    fn process(&mut self, p: &Point) -> Result<()> {
        if p.dim() != 2 {
            return Err(Error::UnsupportedDimension(p.dim()));
        }
        let (x, y) = (p.coord(0), p.coord(1));
        if self.pass == 0 {
            let b = self.bbox.get_or_insert([x, y, x, y]);
            b[0] = b[0].min(x);
            b[1] = b[1].min(y);
            b[2] = b[2].max(x);
            b[3] = b[3].max(y);
        } else {
            for (i, (a, b)) in self.placements.iter().enumerate() {
                if self.placement_ok[i] && !Self::square_covers(a, p) && !Self::square_covers(b, p) {
                    self.placement_ok[i] = false;
                }
            }
        }
        Ok(())
    }

    fn end_pass(&mut self) -> bool {
        if self.pass > 0 || self.done {
            self.done = true;
            return false;
        }
        self.pass = 1;
        match self.bbox {
            None => {
                self.done = true;
                false
            }
            Some([minx, miny, maxx, maxy]) => {
                if maxx - minx <= 2.0 + EPS && maxy - miny <= 2.0 + EPS {
                    self.done = true;
                    return false;
                }
                // squares anchored inward at each bbox corner
                let corners = [
                    [minx, miny],
                    [maxx - 2.0, miny],
                    [minx, maxy - 2.0],
                    [maxx - 2.0, maxy - 2.0],
                ];
                self.placements.clear();
                for i in 0..4 {
                    for j in (i + 1)..4 {
                        self.placements.push((corners[i], corners[j]));
                    }
                }
                self.placement_ok = vec![true; self.placements.len()];
                true
            }
        }
    }

    /// Classification 0, 1, 2, or 4 ("at least 3"); ratio 4/3 on 4x4 windows.
    fn finalize(&self) -> Result<u32> {
        if !self.done {
            return Err(Error::NotReady("bbox solver has a pending pass".into()));
        }
        match self.bbox {
            None => Ok(0),
            Some([minx, miny, maxx, maxy]) => {
                if maxx - minx <= 2.0 + EPS && maxy - miny <= 2.0 + EPS {
                    Ok(1)
                } else if self.placement_ok.iter().any(|&ok| ok) {
                    Ok(2)
                } else {
                    Ok(4)
                }
            }
        }
    }

    fn reset(&mut self) {
        *self = TwoPassBboxSolver::new();
    }

    fn space_bits(&self) -> u64 {
        4 * 64 + self.placements.len() as u64 * (4 * 64 + 1)
    }

    fn passes_used(&self) -> usize {
        if self.placements.is_empty() {
            1
        } else {
            2
        }
    }
}

// ---------------------------------------------------------------------------
// Multi-pass greedy strips (Linf; also the 1D window solver)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
struct Strip {
    committed: Vec<f64>, // strictly increasing interval starts, gaps > 2
    pending: Option<f64>,
}

/// Per strip of height 2, simulates the greedy offline interval covering:
/// each pass finds the leftmost uncovered x, each pass end commits one
/// interval `[x, x+2]` per strip. A pass committing nothing terminates, so
/// the total pass count is (max per-strip cover) + 1.
#[derive(Debug, Clone)]
pub struct MultipassStripsSolver {
    one_dim: bool,
    strips: HashMap<i64, Strip>,
    passes: usize,
    done: bool,
}

impl MultipassStripsSolver {
    fn new(one_dim: bool) -> Self {
        MultipassStripsSolver { one_dim, strips: HashMap::new(), passes: 0, done: false }
    }

    pub fn strip_counts(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.strips.values().map(|s| s.committed.len()).collect();
        v.sort_unstable();
        v
    }
}

impl WindowSolver for MultipassStripsSolver {
    fn process(&mut self, p: &Point) -> Result<()> {
        let expected = if self.one_dim { 1 } else { 2 };
        if p.dim() != expected {
            return Err(Error::UnsupportedDimension(p.dim()));
        }
        let x = p.coord(0);
        let strip_idx = if self.one_dim { 0 } else { (p.coord(1) / 2.0).floor() as i64 };
        let strip = self.strips.entry(strip_idx).or_default();
        let idx = strip.committed.partition_point(|&s| s <= x);
        let covered = idx > 0 && x <= strip.committed[idx - 1] + 2.0 + EPS;
        if !covered {
            strip.pending = Some(strip.pending.map_or(x, |m: f64| m.min(x)));
        }
        Ok(())
    }

    fn end_pass(&mut self) -> bool {
        self.passes += 1;
        let mut any = false;
        for strip in self.strips.values_mut() {
            if let Some(x) = strip.pending.take() {
                strip.committed.push(x);
                any = true;
            }
        }
        self.done = !any;
        any
    }

    fn finalize(&self) -> Result<u32> {
        if !self.done {
            return Err(Error::NotReady("strips solver has a pending pass".into()));
        }
        Ok(self.strips.values().map(|s| s.committed.len() as u32).sum())
    }

    fn reset(&mut self) {
        self.strips.clear();
        self.passes = 0;
        self.done = false;
    }

    fn space_bits(&self) -> u64 {
        self.strips
            .values()
            .map(|s| 64 + s.committed.len() as u64 * 64 + 64)
            .sum()
    }

    fn passes_used(&self) -> usize {
        self.passes
    }
}

/// Drives a solver over a full (already window-filtered) point list for as
/// many passes as it requests; returns the final output.
pub fn run_solver_offline(solver: &mut SolverInstance, points: &[Point]) -> Result<u32> {
    loop {
        for p in points {
            solver.process(p)?;
        }
        if !solver.end_pass() {
            break;
        }
    }
    solver.finalize()
}
