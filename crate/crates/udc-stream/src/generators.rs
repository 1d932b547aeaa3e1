//! Synthetic and adversarial instance generation, with certified optimal
//! values where the construction permits.

use crate::error::{Error, Result};
use crate::geometry::Point;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What to generate. All kinds are deterministic given their seed.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    /// n points uniform in [0, size]^2.
    UniformBox { n: usize, size: f64, seed: u64 },
    /// `clusters` point groups of diameter <= `diameter`, pairwise center
    /// separation >= `separation`, `points_per` points each. OPT is
    /// certified to equal `clusters` when diameter <= 0.1 and
    /// separation >= 10.
    SeparatedClusters {
        clusters: usize,
        points_per: usize,
        diameter: f64,
        separation: f64,
        seed: u64,
    },
    /// Small point groups straddling the corners of the ell-window grid;
    /// adversarial for a single badly-chosen shift.
    GridAdversarial { corners: usize, ell: i64, seed: u64 },
    /// The communication-complexity construction: points on the unit circle
    /// at angles 2*j*pi/n for set bits of z, plus (optionally) the probe
    /// point for `index`. The implied balls have radius 2, recorded in the
    /// instance metadata and normalized away at ingestion.
    IndexCircle {
        n: usize,
        bits: Vec<bool>,
        index: usize,
        probe: bool,
    },
}

/// A generated point list plus metadata.
#[derive(Debug, Clone)]
pub struct Instance {
    pub points: Vec<Point>,
    /// Ball radius the instance was built for; divide coordinates by this
    /// at ingestion to reduce to unit radius.
    pub radius: f64,
    pub certified_opt: Option<u32>,
}

pub fn generate(spec: &InstanceSpec) -> Result<Instance> {
    match *spec {
        InstanceSpec::UniformBox { n, size, seed } => {
            if !(size > 0.0) {
                return Err(Error::InvalidArgument(format!("box size {size} must be > 0")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let points = (0..n)
                .map(|_| Point::p2(rng.gen_range(0.0..size), rng.gen_range(0.0..size)))
                .collect();
            Ok(Instance { points, radius: 1.0, certified_opt: None })
        }
        InstanceSpec::SeparatedClusters { clusters, points_per, diameter, separation, seed } => {
            if clusters == 0 || points_per == 0 {
                return Err(Error::InvalidArgument("clusters and points_per must be >= 1".into()));
            }
            if !(diameter >= 0.0) || !(separation > diameter) {
                return Err(Error::InvalidArgument(format!(
                    "separation {separation} must exceed diameter {diameter}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // cluster centers on a coarse grid with the requested spacing
            let side = (clusters as f64).sqrt().ceil() as usize;
            let mut points = Vec::with_capacity(clusters * points_per);
            for c in 0..clusters {
                let cx = (c % side) as f64 * separation;
                let cy = (c / side) as f64 * separation;
                for _ in 0..points_per {
                    let r = diameter / 2.0;
                    points.push(Point::p2(
                        cx + rng.gen_range(-r..=r),
                        cy + rng.gen_range(-r..=r),
                    ));
                }
            }
            let certified = (diameter <= 0.1 && separation >= 10.0).then_some(clusters as u32);
            Ok(Instance { points, radius: 1.0, certified_opt: certified })
        }
        InstanceSpec::GridAdversarial { corners, ell, seed } => {
            if ell < 1 {
                return Err(Error::InvalidArgument(format!("ell {ell} must be >= 1")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let side = (corners as f64).sqrt().ceil() as i64 + 1;
            let mut points = Vec::with_capacity(corners * 4);
            // four points hugging each chosen grid corner, one per quadrant,
            // so every axis-aligned window boundary through the corner splits
            // the group
            let w = (2 * ell) as f64;
            for c in 0..corners as i64 {
                let cx = (c % side) as f64 * w;
                let cy = (c / side) as f64 * w;
                for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                    let d = rng.gen_range(0.01..0.05);
                    points.push(Point::p2(cx + sx * d, cy + sy * d));
                }
            }
            Ok(Instance { points, radius: 1.0, certified_opt: Some(corners as u32) })
        }
        InstanceSpec::IndexCircle { n, ref bits, index, probe } => {
            if n == 0 || bits.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "bit vector length {} must equal n = {n}",
                    bits.len()
                )));
            }
            if index == 0 || index > n {
                return Err(Error::InvalidArgument(format!("index {index} must be in 1..={n}")));
            }
            // rotate so the probed coordinate lands at angle 0, reducing any
            // index to the index = n case
            let rot = 2.0 * std::f64::consts::PI * (n - index) as f64 / n as f64;
            let (rc, rs) = (rot.cos(), rot.sin());
            let rotate = |x: f64, y: f64| Point::p2(x * rc - y * rs, x * rs + y * rc);
            let mut points = Vec::new();
            for (j0, &bit) in bits.iter().enumerate() {
                if bit {
                    let a = 2.0 * std::f64::consts::PI * (j0 as f64 + 1.0) / n as f64;
                    points.push(rotate(a.cos(), a.sin()));
                }
            }
            if probe {
                // the rotation brings index `index` to angle 0; the probe
                // sits on the negative x-axis of that frame, unrotated
                let theta = 2.0 * std::f64::consts::PI / n as f64;
                points.push(Point::p2((1.0 + theta.cos()) / 2.0 - 4.0, 0.0));
            }
            Ok(Instance { points, radius: 2.0, certified_opt: None })
        }
    }
}

/// Divides all coordinates by the instance radius, reducing it to the
/// unit-radius form every downstream algorithm assumes.
pub fn normalized_points(inst: &Instance) -> Vec<Point> {
    let inv = 1.0 / inst.radius;
    inst.points.iter().map(|p| p.scaled(inv)).collect()
}
