//! Distinct-elements estimation over encoded window ids.
//!
//! A t-smallest-values estimator with median amplification: each of m
//! repetitions hashes keys into the field and keeps its t smallest distinct
//! hash values; the per-repetition estimate is `(t-1) * p / v_t` once t
//! values are held, or the exact count below that. The median of the m
//! repetitions gives a (1 +- eps) estimate with probability >= 0.99.

use crate::error::{Error, Result};
use crate::hashing::{draw_hash, HashFamilyParams, PolyHashFn, MERSENNE_P};
use rand::Rng;

/// Default numerator of t = ceil(c_k / eps^2).
pub const DEFAULT_CK: f64 = 48.0;
/// Default repetition count (odd, for a clean median).
pub const DEFAULT_REPS: usize = 9;

const SERIAL_MAGIC: u32 = 0x4453_4b31; // "DSK1"

#[derive(Debug, Clone, PartialEq)]
struct Repetition {
    hash: PolyHashFn,
    /// The t smallest distinct hash values seen, sorted ascending.
    values: Vec<u64>,
}

/// (1 +- eps) cardinality estimator over integer keys.
#[derive(Debug, Clone, PartialEq)]
pub struct DistinctSketch {
    epsilon: f64,
    t: usize,
    universe: u64,
    reps: Vec<Repetition>,
}

impl DistinctSketch {
    pub fn new<R: Rng>(epsilon: f64, universe: u64, rng: &mut R) -> Result<Self> {
        Self::with_params(epsilon, universe, DEFAULT_CK, DEFAULT_REPS, rng)
    }

    pub fn with_params<R: Rng>(
        epsilon: f64,
        universe: u64,
        ck: f64,
        m: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be in (0,1)")));
        }
        if m == 0 || m % 2 == 0 {
            return Err(Error::InvalidArgument(format!("repetitions {m} must be odd")));
        }
        let t = (ck / (epsilon * epsilon)).ceil() as usize;
        let params = HashFamilyParams::new(MERSENNE_P, 2, universe)?;
        let reps = (0..m)
            .map(|_| Repetition { hash: draw_hash(&params, rng), values: Vec::new() })
            .collect();
        Ok(DistinctSketch { epsilon, t, universe, reps })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Inserts one key; idempotent for repeated keys.
    pub fn insert(&mut self, key: u64) -> Result<()> {
        if key >= self.universe {
            return Err(Error::InvalidKey { key, universe: self.universe });
        }
        for rep in &mut self.reps {
            let h = rep.hash.eval_unchecked(key);
            match rep.values.binary_search(&h) {
                Ok(_) => {}
                Err(idx) => {
                    if rep.values.len() < self.t {
                        rep.values.insert(idx, h);
                    } else if idx < self.t {
                        rep.values.insert(idx, h);
                        rep.values.pop();
                    }
                }
            }
        }
        Ok(())
    }

    /// Median over repetitions of the per-repetition estimator.
    pub fn estimate(&self) -> f64 {
        let mut ests: Vec<f64> = self
            .reps
            .iter()
            .map(|rep| {
                if rep.values.len() < self.t {
                    rep.values.len() as f64
                } else {
                    let vt = rep.values[self.t - 1];
                    (self.t as f64 - 1.0) * MERSENNE_P as f64 / vt as f64
                }
            })
            .collect();
        ests.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ests[ests.len() / 2]
    }

    /// Per-repetition union truncated to the t smallest values. Requires
    /// identical parameters and hash functions on both sides.
    pub fn merge(&self, other: &DistinctSketch) -> Result<DistinctSketch> {
        if self.epsilon != other.epsilon
            || self.t != other.t
            || self.universe != other.universe
            || self.reps.len() != other.reps.len()
        {
            return Err(Error::IncompatibleSketch("parameter mismatch".into()));
        }
        let mut out = self.clone();
        for (rep, orep) in out.reps.iter_mut().zip(&other.reps) {
            if rep.hash != orep.hash {
                return Err(Error::IncompatibleSketch("hash function mismatch".into()));
            }
            let mut merged: Vec<u64> = rep
                .values
                .iter()
                .chain(&orep.values)
                .copied()
                .collect();
            merged.sort_unstable();
            merged.dedup();
            merged.truncate(self.t);
            rep.values = merged;
        }
        Ok(out)
    }

    /// Structural size: m * (t stored values + one degree-2 hash).
    pub fn space_bits(&self) -> u64 {
        let hash_bits = self.reps.first().map_or(0, |r| r.hash.space_bits());
        self.reps.len() as u64 * (self.t as u64 * 61 + hash_bits)
    }

    /// Versioned little-endian binary blob: header, parameters,
    /// per-repetition hash coefficients and value arrays.
    pub fn serialize(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(&SERIAL_MAGIC.to_le_bytes());
        buf.extend_from_slice(&self.epsilon.to_le_bytes());
        buf.extend_from_slice(&(self.t as u64).to_le_bytes());
        buf.extend_from_slice(&self.universe.to_le_bytes());
        buf.extend_from_slice(&(self.reps.len() as u32).to_le_bytes());
        for rep in &self.reps {
            let coeffs = rep.hash.coeffs();
            buf.extend_from_slice(&(coeffs.len() as u32).to_le_bytes());
            for &c in coeffs {
                buf.extend_from_slice(&c.to_le_bytes());
            }
            buf.extend_from_slice(&(rep.values.len() as u64).to_le_bytes());
            for &v in &rep.values {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        buf
    }

    pub fn deserialize(data: &[u8]) -> Result<DistinctSketch> {
        let mut cur = Cursor { data, pos: 0 };
        if cur.u32()? != SERIAL_MAGIC {
            return Err(Error::Serialization("bad magic".into()));
        }
        let epsilon = cur.f64()?;
        let t = cur.u64()? as usize;
        let universe = cur.u64()?;
        let m = cur.u32()? as usize;
        let params = HashFamilyParams::new(MERSENNE_P, 2, universe)?;
        let mut reps = Vec::with_capacity(m);
        for _ in 0..m {
            let nc = cur.u32()? as usize;
            if nc != params.degree as usize {
                return Err(Error::Serialization("unexpected coefficient count".into()));
            }
            let mut coeffs = Vec::with_capacity(nc);
            for _ in 0..nc {
                coeffs.push(cur.u64()?);
            }
            let hash = PolyHashFn::from_coeffs(MERSENNE_P, universe, coeffs)
                .map_err(|e| Error::Serialization(e.to_string()))?;
            let n = cur.u64()? as usize;
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                values.push(cur.u64()?);
            }
            reps.push(Repetition { hash, values });
        }
        Ok(DistinctSketch { epsilon, t, universe, reps })
    }
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::Serialization("truncated blob".into()));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
