//! Polynomial hash families over a prime field and the min-wise window
//! sampler.
//!
//! A degree-(r-1) polynomial with uniform coefficients realizes an r-wise
//! independent family; with r >= c' * log2(1/eps) coefficients it is also
//! eps-min-wise independent, which is what lets the sampler's minimum-hash
//! window act as a near-uniform sample of the occupied windows.

use crate::error::{Error, Result};
use crate::geometry::{Point, WindowId};
use crate::window_solvers::WindowSolver;
use rand::Rng;

/// Field prime 2^61 - 1. Large enough that the packed window-id universe
/// (20 bits per coordinate, up to d = 3) fits below it.
pub const MERSENNE_P: u64 = (1 << 61) - 1;

/// Bits reserved per window-index coordinate in the packed key.
pub const KEY_BITS_PER_COORD: u32 = 20;

const KEY_COORD_OFFSET: i64 = 1 << (KEY_BITS_PER_COORD - 1);

/// Default min-wise degree constant c'.
pub const DEFAULT_MINWISE_C: f64 = 8.0;

/// Parameters of a polynomial hash family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashFamilyParams {
    /// Field prime.
    pub prime: u64,
    /// Number of coefficients; the family is `degree`-wise independent.
    pub degree: u32,
    /// Universe size k; keys must lie in `0..universe`, and `universe <= prime`.
    pub universe: u64,
}

impl HashFamilyParams {
    pub fn new(prime: u64, degree: u32, universe: u64) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidArgument(format!("degree {degree} must be >= 2")));
        }
        if universe == 0 || universe > prime {
            return Err(Error::InvalidArgument(format!(
                "universe {universe} must be in 1..={prime}"
            )));
        }
        Ok(HashFamilyParams { prime, degree, universe })
    }

    /// Family suitable for eps-min-wise sampling over `universe` keys:
    /// degree `ceil(c' * log2(1/eps))`, at least 2.
    pub fn for_minwise(epsilon: f64, universe: u64) -> Result<Self> {
        Self::for_minwise_with_c(epsilon, universe, DEFAULT_MINWISE_C)
    }

    pub fn for_minwise_with_c(epsilon: f64, universe: u64, c: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be in (0,1)")));
        }
        let degree = (c * (1.0 / epsilon).log2()).ceil().max(2.0) as u32;
        Self::new(MERSENNE_P, degree, universe)
    }
}

/// Required min-wise polynomial degree for accuracy `epsilon`.
pub fn minwise_degree(epsilon: f64, c: f64) -> u32 {
    (c * (1.0 / epsilon).log2()).ceil().max(2.0) as u32
}

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    if p == MERSENNE_P {
        let m = a as u128 * b as u128;
        let mut r = (m & MERSENNE_P as u128) as u64 + (m >> 61) as u64;
        if r >= MERSENNE_P {
            r -= MERSENNE_P;
        }
        r
    } else {
        ((a as u128 * b as u128) % p as u128) as u64
    }
}

#[inline]
fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b; // both < p <= 2^61, no overflow
    if s >= p {
        s - p
    } else {
        s
    }
}

/// One member of the family: coefficients `a_0..a_{r-1}` of
/// `h(x) = a_{r-1} x^{r-1} + ... + a_0` over the field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyHashFn {
    prime: u64,
    universe: u64,
    coeffs: Vec<u64>,
}

impl PolyHashFn {
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Rebuilds a function from explicit coefficients (deserialization).
    pub fn from_coeffs(prime: u64, universe: u64, coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.len() < 2 || coeffs.iter().any(|&c| c >= prime) || universe > prime {
            return Err(Error::InvalidArgument("bad hash coefficients".into()));
        }
        Ok(PolyHashFn { prime, universe, coeffs })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// Horner evaluation modulo the field prime.
    #[inline]
    pub fn eval(&self, x: u64) -> Result<u64> {
        if x >= self.universe {
            return Err(Error::InvalidKey { key: x, universe: self.universe });
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: u64) -> u64 {
        let p = self.prime;
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = addmod(mulmod(acc, x, p), c, p);
        }
        acc
    }

    /// Structural size: r coefficients of log2(p) bits each.
    pub fn space_bits(&self) -> u64 {
        self.coeffs.len() as u64 * (64 - (self.prime - 1).leading_zeros()) as u64
    }

    /// All `p^degree` functions of a small family, for exhaustive
    /// independence checks on toy fields.
    pub fn enumerate_all(params: &HashFamilyParams) -> Vec<PolyHashFn> {
        let p = params.prime;
        let r = params.degree as usize;
        let total = (p as usize).pow(r as u32);
        let mut out = Vec::with_capacity(total);
        for mut n in 0..total {
            let mut coeffs = Vec::with_capacity(r);
            for _ in 0..r {
                coeffs.push((n % p as usize) as u64);
                n /= p as usize;
            }
            out.push(PolyHashFn { prime: p, universe: params.universe, coeffs });
        }
        out
    }
}

/// Draws one function uniformly: r i.i.d. uniform field coefficients.
pub fn draw_hash<R: Rng>(params: &HashFamilyParams, rng: &mut R) -> PolyHashFn {
    let coeffs = (0..params.degree).map(|_| rng.gen_range(0..params.prime)).collect();
    PolyHashFn {
        prime: params.prime,
        universe: params.universe,
        coeffs,
    }
}

/// Packs a window index into a single integer key: each coordinate is
/// offset to be non-negative, masked to 20 bits, and concatenated
/// little-endian. Out-of-range indices are a hard error.
pub fn encode_window(id: &WindowId) -> Result<u64> {
    let d = id.dim();
    if d == 0 || d as u32 * KEY_BITS_PER_COORD > 60 {
        return Err(Error::UnsupportedDimension(d));
    }
    let mut key = 0u64;
    for (axis, &i) in id.index().iter().enumerate() {
        let shifted = i + KEY_COORD_OFFSET;
        if !(0..(1 << KEY_BITS_PER_COORD)).contains(&shifted) {
            return Err(Error::InvalidArgument(format!(
                "window index {i} out of encodable range"
            )));
        }
        key |= (shifted as u64) << (axis as u32 * KEY_BITS_PER_COORD);
    }
    Ok(key)
}

/// Universe size of packed window keys in dimension d.
pub fn window_key_universe(dim: usize) -> Result<u64> {
    if dim == 0 || dim as u32 * KEY_BITS_PER_COORD > 60 {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(1 << (dim as u32 * KEY_BITS_PER_COORD))
}

/// Outcome of offering one point to a sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Point belongs to the sampler's current window; forwarded to the solver.
    Feed,
    /// New window hashes below the incumbent; window replaced, solver reset,
    /// point forwarded.
    AdoptReset,
    Ignore,
}

/// One min-wise sampling unit: a hash function, the current minimum-hash
/// window, and a live window-solver instance fed with that window's
/// substream. Starts on a dummy window with hash value +infinity.
#[derive(Debug, Clone)]
pub struct MinWiseSampler<S> {
    hash: PolyHashFn,
    current: Option<CurrentWindow>,
    solver: S,
    frozen: bool,
}

#[derive(Debug, Clone)]
struct CurrentWindow {
    key: u64,
    hash_value: u64,
    id: WindowId,
}

impl<S: WindowSolver> MinWiseSampler<S> {
    pub fn new(hash: PolyHashFn, solver: S) -> Self {
        MinWiseSampler { hash, current: None, solver, frozen: false }
    }

    /// Offers a point in window `id` (pre-encoded as `key`). Incumbent wins
    /// ties: a strict hash decrease is required to evict.
    pub fn offer(&mut self, key: u64, id: &WindowId, p: &Point) -> Result<Action> {
        if let Some(cur) = &self.current {
            if cur.key == key {
                self.solver.process(p)?;
                return Ok(Action::Feed);
            }
            if self.frozen {
                return Ok(Action::Ignore);
            }
            let hv = self.hash.eval(key)?;
            if hv < cur.hash_value {
                self.adopt(key, hv, id.clone(), p)?;
                return Ok(Action::AdoptReset);
            }
            Ok(Action::Ignore)
        } else {
            if self.frozen {
                return Ok(Action::Ignore);
            }
            let hv = self.hash.eval(key)?;
            self.adopt(key, hv, id.clone(), p)?;
            Ok(Action::AdoptReset)
        }
    }

    fn adopt(&mut self, key: u64, hash_value: u64, id: WindowId, p: &Point) -> Result<()> {
        self.solver.reset();
        self.solver.process(p)?;
        self.current = Some(CurrentWindow { key, hash_value, id });
        Ok(())
    }

    /// Freezes the adopted window. The argmin over occupied windows is final
    /// after one complete pass, so later passes of a multi-pass solver only
    /// feed the matching window.
    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn current_window(&self) -> Option<&WindowId> {
        self.current.as_ref().map(|c| &c.id)
    }

    pub fn current_key(&self) -> Option<u64> {
        self.current.as_ref().map(|c| c.key)
    }

    pub fn current_hash_value(&self) -> Option<u64> {
        self.current.as_ref().map(|c| c.hash_value)
    }

    pub fn solver(&self) -> &S {
        &self.solver
    }

    pub fn solver_mut(&mut self) -> &mut S {
        &mut self.solver
    }

    pub fn space_bits(&self) -> u64 {
        self.hash.space_bits() + 64 + self.solver.space_bits()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{window_id, Shift};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    #[test]
    fn eval_hand_arithmetic() {
        // p=5, coefficients [a0=3, a1=2], x=4 -> (2*4+3) mod 5 = 1
        let h = PolyHashFn { prime: 5, universe: 5, coeffs: vec![3, 2] };
        assert_eq!(h.eval(4).unwrap(), 1);
        assert_eq!(h.eval(4).unwrap(), h.eval(4).unwrap());
        assert!(matches!(h.eval(5), Err(Error::InvalidKey { .. })));
    }

    #[test]
    fn draw_is_seed_deterministic() {
        let params = HashFamilyParams::new(MERSENNE_P, 3, 1 << 20).unwrap();
        let a = draw_hash(&params, &mut ChaCha8Rng::seed_from_u64(42));
        let b = draw_hash(&params, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
        assert_eq!(a.coeffs().len(), 3);
        let c = draw_hash(&params, &mut ChaCha8Rng::seed_from_u64(43));
        assert_ne!(a, c);
    }

    #[test]
    fn distinct_seeds_rarely_collide() {
        let params = HashFamilyParams::new(MERSENNE_P, 3, 1 << 20).unwrap();
        let mut collisions = 0;
        for s in 0..100u64 {
            let a = draw_hash(&params, &mut ChaCha8Rng::seed_from_u64(2 * s));
            let b = draw_hash(&params, &mut ChaCha8Rng::seed_from_u64(2 * s + 1));
            if a == b {
                collisions += 1;
            }
        }
        assert_eq!(collisions, 0);
    }

    #[test]
    fn pairwise_independence_exhaustive_small_field() {
        // Over all 25 degree-2 functions mod 5, each (x1,x2)->(y1,y2)
        // assignment of two distinct inputs is hit exactly once.
        for p in [5u64, 7] {
            let params = HashFamilyParams::new(p, 2, p).unwrap();
            let fns = PolyHashFn::enumerate_all(&params);
            assert_eq!(fns.len(), (p * p) as usize);
            for x1 in 0..p {
                for x2 in 0..p {
                    if x1 == x2 {
                        continue;
                    }
                    let mut counts: HashMap<(u64, u64), usize> = HashMap::new();
                    for h in &fns {
                        *counts.entry((h.eval(x1).unwrap(), h.eval(x2).unwrap())).or_default() += 1;
                    }
                    assert_eq!(counts.len(), (p * p) as usize);
                    assert!(counts.values().all(|&c| c == 1));
                }
            }
        }
    }

    #[test]
    fn triplewise_independence_exhaustive() {
        let p = 5u64;
        let params = HashFamilyParams::new(p, 3, p).unwrap();
        let fns = PolyHashFn::enumerate_all(&params);
        let mut counts: HashMap<(u64, u64, u64), usize> = HashMap::new();
        for h in &fns {
            *counts
                .entry((h.eval(0).unwrap(), h.eval(1).unwrap(), h.eval(2).unwrap()))
                .or_default() += 1;
        }
        assert_eq!(counts.len(), (p * p * p) as usize);
        assert!(counts.values().all(|&c| c == 1));
    }

    #[test]
    fn encode_window_packs_coordinates() {
        let s = Shift::zero(2, 2).unwrap();
        let a = encode_window(&window_id(&Point::p2(0.0, 0.0), &s).unwrap()).unwrap();
        let b = encode_window(&window_id(&Point::p2(4.0, 0.0), &s).unwrap()).unwrap();
        let c = encode_window(&window_id(&Point::p2(0.0, 4.0), &s).unwrap()).unwrap();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(b - a, 1);
        assert_eq!(c - a, 1 << KEY_BITS_PER_COORD);
    }

    #[test]
    fn space_accounting_scales_with_degree() {
        let bits61 = |deg| {
            let params = HashFamilyParams::new(MERSENNE_P, deg, 1 << 20).unwrap();
            draw_hash(&params, &mut ChaCha8Rng::seed_from_u64(0)).space_bits()
        };
        assert_eq!(bits61(4), 4 * 61);
        assert_eq!(bits61(8), 8 * 61);
    }

    #[test]
    fn minwise_frequency_sanity() {
        // Small-scale version of the min-wise acceptance check.
        let keys: Vec<u64> = (0..50).map(|i| i * 37 + 5).collect();
        let params = HashFamilyParams::for_minwise(0.25, 1 << 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 20_000;
        let mut wins = vec![0usize; keys.len()];
        for _ in 0..draws {
            let h = draw_hash(&params, &mut rng);
            let mut best = (u64::MAX, 0usize);
            for (i, &k) in keys.iter().enumerate() {
                let v = h.eval(k).unwrap();
                if v < best.0 {
                    best = (v, i);
                }
            }
            wins[best.1] += 1;
        }
        let expected = draws as f64 / keys.len() as f64;
        let ok = wins
            .iter()
            .filter(|&&w| (w as f64) > expected * 0.6 && (w as f64) < expected * 1.4)
            .count();
        assert!(ok >= 48, "only {ok}/50 keys near uniform frequency");
    }
}
