//! Coordinate substrate: points, norms, balls, shifted window partitions,
//! and the L1 -> Linf rotation.
//!
//! Windows are axis-aligned boxes of side `2*ell`, half-open on the high
//! side of every axis, with anchors at even integer coordinates. A `Shift`
//! selects one of the `ell^d` translated partitions.

use crate::error::{Error, Result};
use rand::Rng;

/// Default bound on the absolute value of any input coordinate.
pub const COORD_BOUND: f64 = 1e9;

/// Relative tolerance for ball membership. A point within this relative
/// distance of the boundary counts as inside, so cover verification is
/// robust to floating-point construction of candidate centers.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A d-dimensional input point. All points of one run share a dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Validates finiteness and the coordinate bound.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        Self::with_bound(coords, COORD_BOUND)
    }

    pub fn with_bound(coords: Vec<f64>, bound: f64) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("point must have dimension >= 1".into()));
        }
        for &c in &coords {
            if !c.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite coordinate {c}")));
            }
            if c.abs() > bound {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {c} exceeds bound {bound}"
                )));
            }
        }
        Ok(Point { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i]
    }

    /// Scales every coordinate by `1/r`; used to normalize radius-r
    /// instances to unit radius at ingestion.
    pub fn scaled(&self, inv_r: f64) -> Point {
        Point {
            coords: self.coords.iter().map(|c| c * inv_r).collect(),
        }
    }

    pub fn p2(x: f64, y: f64) -> Point {
        Point { coords: vec![x, y] }
    }

    pub fn p1(x: f64) -> Point {
        Point { coords: vec![x] }
    }
}

/// The three supported norms. L1 is closed under the rotation to Linf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub fn dist(&self, a: &Point, b: &Point) -> Result<f64> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        let it = a.coords.iter().zip(&b.coords).map(|(x, y)| (x - y).abs());
        Ok(match self {
            Norm::L1 => it.sum(),
            Norm::L2 => it.map(|d| d * d).sum::<f64>().sqrt(),
            Norm::Linf => it.fold(0.0_f64, f64::max),
        })
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Norm> {
        match s {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::Linf),
            other => Err(Error::InvalidArgument(format!("unknown norm {other}"))),
        }
    }
}

/// A closed ball of positive radius under one of the supported norms.
#[derive(Debug, Clone)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
    pub norm: Norm,
}

impl Ball {
    pub fn new(center: Point, radius: f64, norm: Norm) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("radius {radius} must be > 0")));
        }
        Ok(Ball { center, radius, norm })
    }

    /// Closed membership with the module tolerance policy.
    pub fn contains(&self, p: &Point) -> Result<bool> {
        let d = self.norm.dist(&self.center, p)?;
        Ok(d <= self.radius * (1.0 + MEMBERSHIP_TOL))
    }
}

/// One of the `ell^d` shifted partitions: an offset in `{0..ell-1}^d`.
/// Window anchors derived from a shift are even integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shift {
    offsets: Vec<i64>,
    ell: i64,
}

impl Shift {
    pub fn new(offsets: Vec<i64>, ell: i64) -> Result<Self> {
        if ell < 1 {
            return Err(Error::InvalidArgument(format!("ell {ell} must be >= 1")));
        }
        if offsets.is_empty() {
            return Err(Error::InvalidArgument("shift must have dimension >= 1".into()));
        }
        if offsets.iter().any(|&o| o < 0 || o >= ell) {
            return Err(Error::InvalidArgument(format!(
                "shift offsets {offsets:?} must lie in 0..{ell}"
            )));
        }
        Ok(Shift { offsets, ell })
    }

    pub fn zero(ell: i64, dim: usize) -> Result<Self> {
        Shift::new(vec![0; dim], ell)
    }

    pub fn dim(&self) -> usize {
        self.offsets.len()
    }

    pub fn ell(&self) -> i64 {
        self.ell
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    /// All `ell^d` shifts in lexicographic order.
    pub fn enumerate(ell: i64, dim: usize) -> Result<Vec<Shift>> {
        Shift::zero(ell, dim)?; // validate
        let mut out = Vec::with_capacity((ell as usize).pow(dim as u32));
        let mut cur = vec![0i64; dim];
        loop {
            out.push(Shift {
                offsets: cur.clone(),
                ell,
            });
            let mut axis = dim;
            loop {
                if axis == 0 {
                    return Ok(out);
                }
                axis -= 1;
                cur[axis] += 1;
                if cur[axis] < ell {
                    break;
                }
                cur[axis] = 0;
            }
        }
    }

    pub fn random<R: Rng>(ell: i64, dim: usize, rng: &mut R) -> Result<Shift> {
        let offsets = (0..dim).map(|_| rng.gen_range(0..ell)).collect();
        Shift::new(offsets, ell)
    }
}

/// The grid index of one window under a fixed shift. Each point maps to
/// exactly one window id per shift.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WindowId {
    index: Vec<i64>,
}

impl WindowId {
    pub fn index(&self) -> &[i64] {
        &self.index
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }
}

/// Maps a point to its window under shift `s`:
/// `index_i = floor((p_i - 2*offset_i) / (2*ell))`. Windows are closed on
/// the low edge of every axis and open on the high edge.
pub fn window_id(p: &Point, s: &Shift) -> Result<WindowId> {
    if p.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: p.dim(),
        });
    }
    let side = (2 * s.ell) as f64;
    let index = p
        .coords
        .iter()
        .zip(&s.offsets)
        .map(|(&c, &o)| ((c - 2.0 * o as f64) / side).floor() as i64)
        .collect();
    Ok(WindowId { index })
}

/// Low-edge anchor of a window: `anchor_i = 2*ell*index_i + 2*offset_i`.
/// Always a vector of even integers.
pub fn window_anchor(id: &WindowId, s: &Shift) -> Vec<f64> {
    id.index
        .iter()
        .zip(&s.offsets)
        .map(|(&i, &o)| (2 * s.ell * i + 2 * o) as f64)
        .collect()
}

/// The rotation `(x, y) -> (x+y, x-y)`, mapping the L1 unit ball onto the
/// Linf unit ball. Cover cardinalities are preserved under the induced
/// bijection on balls.
pub fn l1_to_linf(p: &Point) -> Result<Point> {
    if p.dim() != 2 {
        return Err(Error::UnsupportedDimension(p.dim()));
    }
    let (x, y) = (p.coords[0], p.coords[1]);
    Ok(Point { coords: vec![x + y, x - y] })
}
