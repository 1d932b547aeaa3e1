//! Single-pass lattice-cover estimators: cover the plane with a fixed
//! arrangement of unit balls, assign each streamed point to one covering
//! ball, and count occupied balls with a distinct sketch. The occupied
//! balls always form a valid cover, so the true occupied count is >= OPT;
//! the approximation factor is the mean number of lattice balls an optimal
//! ball can intersect (2*pi for L2 under a random shift, 4 for Linf/L1).

use crate::error::{Error, Result};
use crate::geometry::{l1_to_linf, Norm, Point};
use crate::sketches::DistinctSketch;
use crate::shifting::StreamSource;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Universe of packed lattice-ball ids: two 20-bit indices plus one
/// sublattice bit.
pub const LATTICE_KEY_UNIVERSE: u64 = 1 << 41;

const IDX_OFFSET: i64 = 1 << 19;

/// One lattice arrangement. For L2, unit discs centered at
/// `{(2i, 2j)} U {(2i+1, 2j+1)}` translated by `shift_offset` (covering
/// radius exactly 1). For Linf/L1, the deterministic tiling by side-2
/// axis-aligned squares (no shift needed).
#[derive(Debug, Clone)]
pub struct LatticeSpec {
    pub norm: Norm,
    pub shift_offset: [f64; 2],
}

impl LatticeSpec {
    pub fn new(norm: Norm, shift_offset: [f64; 2]) -> Result<Self> {
        match norm {
            Norm::L2 => {
                if shift_offset.iter().any(|&o| !(0.0..2.0).contains(&o)) {
                    return Err(Error::InvalidArgument(format!(
                        "L2 lattice offset {shift_offset:?} must lie in [0,2)^2"
                    )));
                }
            }
            _ => {
                if shift_offset != [0.0, 0.0] {
                    return Err(Error::InvalidArgument(
                        "Linf/L1 lattices are deterministic; offset must be zero".into(),
                    ));
                }
            }
        }
        Ok(LatticeSpec { norm, shift_offset })
    }

    pub fn deterministic(norm: Norm) -> Result<Self> {
        Self::new(norm, [0.0, 0.0])
    }
}

fn pack_id(i: i64, j: i64, sub: u8) -> Result<u64> {
    for v in [i, j] {
        if !(-IDX_OFFSET..IDX_OFFSET).contains(&v) {
            return Err(Error::InvalidArgument(format!("lattice index {v} out of range")));
        }
    }
    Ok(((i + IDX_OFFSET) as u64) | (((j + IDX_OFFSET) as u64) << 20) | ((sub as u64) << 40))
}

/// Deterministically assigns a point to one covering lattice ball and
/// returns its packed id. L2 picks the nearest center (lexicographic
/// tie-break by center); Linf/L1 pick the floor-indexed tile, L1 after the
/// rotation onto Linf.
pub fn lattice_assign(spec: &LatticeSpec, p: &Point) -> Result<u64> {
    if p.dim() != 2 {
        return Err(Error::UnsupportedDimension(p.dim()));
    }
    match spec.norm {
        Norm::Linf => {
            let i = (p.coord(0) / 2.0).floor() as i64;
            let j = (p.coord(1) / 2.0).floor() as i64;
            pack_id(i, j, 0)
        }
        Norm::L1 => lattice_assign(
            &LatticeSpec { norm: Norm::Linf, shift_offset: [0.0, 0.0] },
            &l1_to_linf(p)?,
        ),
        Norm::L2 => {
            let qx = p.coord(0) - spec.shift_offset[0];
            let qy = p.coord(1) - spec.shift_offset[1];
            let mut best: Option<(f64, (f64, f64), (i64, i64, u8))> = None;
            for sub in 0..2u8 {
                let off = sub as f64;
                let bi = ((qx - off) / 2.0).round() as i64;
                let bj = ((qy - off) / 2.0).round() as i64;
                for i in (bi - 1)..=(bi + 1) {
                    for j in (bj - 1)..=(bj + 1) {
                        let cx = 2.0 * i as f64 + off;
                        let cy = 2.0 * j as f64 + off;
                        let d2 = (qx - cx).powi(2) + (qy - cy).powi(2);
                        let cand = (d2, (cx, cy), (i, j, sub));
                        let better = match &best {
                            None => true,
                            Some((bd2, bc, _)) => {
                                d2 < bd2 - 1e-12
                                    || ((d2 - bd2).abs() <= 1e-12 && (cand.1 < *bc))
                            }
                        };
                        if better {
                            best = Some(cand);
                        }
                    }
                }
            }
            let (d2, _, (i, j, sub)) = best.unwrap();
            debug_assert!(d2.sqrt() <= 1.0 + 1e-9, "covering radius exceeded: {}", d2.sqrt());
            pack_id(i, j, sub)
        }
    }
}

/// Diagnostics of one multi-copy lattice run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LatticeOutcome {
    pub value: f64,
    pub per_copy: Vec<f64>,
    pub space_bits: u64,
}

/// Runs `copies` independent lattice estimators in one pass (independent
/// random offsets for L2, deterministic for Linf/L1), each with its own
/// distinct sketch over assigned ball ids, and returns the minimum.
pub fn lattice_estimate<S: StreamSource>(
    source: &mut S,
    norm: Norm,
    epsilon: f64,
    copies: usize,
    seed: u64,
) -> Result<LatticeOutcome> {
    if copies == 0 {
        return Err(Error::InvalidArgument("copies must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let effective_copies = if norm == Norm::L2 { copies } else { 1 };
    let mut units: Vec<(LatticeSpec, DistinctSketch)> = (0..effective_copies)
        .map(|_| {
            let spec = if norm == Norm::L2 {
                LatticeSpec::new(norm, [rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)])?
            } else {
                LatticeSpec::deterministic(norm)?
            };
            let sketch = DistinctSketch::new(epsilon, LATTICE_KEY_UNIVERSE, &mut rng)?;
            Ok((spec, sketch))
        })
        .collect::<Result<_>>()?;

    while let Some(p) = source.next_point()? {
        for (spec, sketch) in &mut units {
            sketch.insert(lattice_assign(spec, &p)?)?;
        }
    }
    let per_copy: Vec<f64> = units.iter().map(|(_, s)| s.estimate()).collect();
    let value = per_copy.iter().copied().fold(f64::INFINITY, f64::min);
    let value = if value.is_finite() { value } else { 0.0 };
    Ok(LatticeOutcome {
        value,
        space_bits: units.iter().map(|(_, s)| s.space_bits()).sum(),
        per_copy,
    })
}

/// Exact occupied-ball count (sketch swapped for a hash set); the validity
/// lower bound `occupied >= OPT` holds for this quantity on every instance.
pub fn exact_occupied(points: &[Point], spec: &LatticeSpec) -> Result<u64> {
    let mut set = std::collections::HashSet::new();
    for p in points {
        set.insert(lattice_assign(spec, p)?);
    }
    Ok(set.len() as u64)
}

/// Number of L2 lattice centers within `radius` of `loc` for a given
/// offset; drives the 2*pi mean-intersection check.
pub fn l2_centers_within(loc: (f64, f64), offset: (f64, f64), radius: f64) -> u32 {
    let mut count = 0;
    let range = radius.ceil() as i64 + 2;
    let bi = ((loc.0 - offset.0) / 2.0).round() as i64;
    let bj = ((loc.1 - offset.1) / 2.0).round() as i64;
    for sub in 0..2 {
        let off = sub as f64;
        for i in (bi - range)..=(bi + range) {
            for j in (bj - range)..=(bj + range) {
                let cx = 2.0 * i as f64 + off + offset.0;
                let cy = 2.0 * j as f64 + off + offset.1;
                if ((loc.0 - cx).powi(2) + (loc.1 - cy).powi(2)).sqrt() <= radius {
                    count += 1;
                }
            }
        }
    }
    count
}
