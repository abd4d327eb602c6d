//! Query interface to the model under explanation, plus the seeded samplers
//! every explainer consumes.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cube::{
    check_dim_supported, subsets_up_to, BooleanFunction, SignedPoint, SparseSpectrum, TruthTable,
};
use crate::error::{Error, Result};
use crate::external::ExternalProcess;

/// Largest Hamming ball [`enumerate_neighborhood`] will list.
pub const BALL_ENUMERATION_CAP: u128 = 2_000_000;

pub(crate) fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed from a master seed and a tag.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

enum OracleKind {
    Polynomial(SparseSpectrum),
    Table(TruthTable),
    External(Mutex<ExternalProcess>),
}

/// The function `f: {-1,+1}^n → R` being explained.
///
/// Every evaluation goes through [`Oracle::query`] and bumps the query
/// counter; there is no caching.
pub struct Oracle {
    n: usize,
    kind: OracleKind,
    queries: AtomicU64,
}

impl Oracle {
    pub fn polynomial(spectrum: SparseSpectrum) -> Self {
        Self {
            n: spectrum.dim(),
            kind: OracleKind::Polynomial(spectrum),
            queries: AtomicU64::new(0),
        }
    }

    pub fn table(table: TruthTable) -> Self {
        Self {
            n: table.dim(),
            kind: OracleKind::Table(table),
            queries: AtomicU64::new(0),
        }
    }

    /// Spawns `command` and speaks the line protocol over its standard streams.
    pub fn external(command: &[String], n: usize, timeout: Duration) -> Result<Self> {
        check_dim_supported(n)?;
        let process = ExternalProcess::spawn(command, n, timeout)?;
        Ok(Self {
            n,
            kind: OracleKind::External(Mutex::new(process)),
            queries: AtomicU64::new(0),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn query(&self, x: &SignedPoint) -> Result<f64> {
        Error::check_dim(self.n, x.dim())?;
        self.queries.fetch_add(1, Ordering::Relaxed);
        match &self.kind {
            OracleKind::Polynomial(g) => Ok(g.eval_mask(x.mask())),
            OracleKind::Table(t) => Ok(t.values()[x.mask() as usize]),
            OracleKind::External(p) => p
                .lock()
                .map_err(|_| Error::Oracle {
                    request: x.to_string(),
                    reason: "oracle session poisoned by an earlier panic".into(),
                })?
                .query(x),
        }
    }

    pub fn query_batch(&self, points: &[SignedPoint]) -> Result<Vec<f64>> {
        points.iter().map(|x| self.query(x)).collect()
    }

    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    /// Polynomial and table oracles may be queried from many threads at once.
    pub fn is_concurrent_safe(&self) -> bool {
        !matches!(self.kind, OracleKind::External(_))
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            OracleKind::Polynomial(_) => "polynomial",
            OracleKind::Table(_) => "table",
            OracleKind::External(_) => "external",
        }
    }

    /// The exact spectrum when the oracle is a polynomial.
    pub fn as_polynomial(&self) -> Option<&SparseSpectrum> {
        match &self.kind {
            OracleKind::Polynomial(g) => Some(g),
            _ => None,
        }
    }
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Oracle")
            .field("kind", &self.kind_name())
            .field("n", &self.n)
            .field("queries", &self.query_count())
            .finish()
    }
}

impl BooleanFunction for Oracle {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &SignedPoint) -> Result<f64> {
        self.query(x)
    }
}

/// The Hamming ball of radius `radius` around `base`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeighborhoodSpec {
    pub base: SignedPoint,
    pub radius: usize,
}

impl NeighborhoodSpec {
    /// Ball around the fully retained input.
    pub fn around_full_input(n: usize, radius: usize) -> Result<Self> {
        Self::new(SignedPoint::all_retained(n), radius)
    }

    pub fn new(base: SignedPoint, radius: usize) -> Result<Self> {
        if radius > base.dim() {
            return Err(Error::InvalidArgument(format!(
                "radius {radius} exceeds n={}",
                base.dim()
            )));
        }
        Ok(Self { base, radius })
    }

    /// `r = ∞` convention: the whole cube.
    pub fn whole_cube(base: SignedPoint) -> Self {
        Self {
            base,
            radius: base.dim(),
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn contains(&self, x: &SignedPoint) -> bool {
        x.dim() == self.dim() && self.base.hamming(x) as usize <= self.radius
    }

    /// Number of points in each layer `j = 0..=radius`.
    pub fn layer_sizes(&self) -> Vec<u128> {
        let n = self.dim() as u128;
        let mut sizes = Vec::with_capacity(self.radius + 1);
        let mut c: u128 = 1;
        for j in 0..=self.radius as u128 {
            sizes.push(c);
            c = c * (n - j) / (j + 1);
        }
        sizes
    }

    pub fn size(&self) -> u128 {
        self.layer_sizes().iter().sum()
    }
}

/// Points and their oracle values.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub points: Vec<SignedPoint>,
    pub values: Vec<f64>,
    pub seed: Option<u64>,
}

impl SampleBatch {
    pub fn evaluate(f: &Oracle, points: Vec<SignedPoint>, seed: Option<u64>) -> Result<Self> {
        let values = f.query_batch(&points)?;
        Ok(Self {
            points,
            values,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    Ok(())
}

/// `count` i.i.d. uniform points of `{-1,+1}^n`.
pub fn sample_uniform(n: usize, count: usize, seed: u64) -> Result<Vec<SignedPoint>> {
    check_dim_supported(n)?;
    check_count(count)?;
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut rng = rng_from(seed);
    Ok((0..count)
        .map(|_| SignedPoint::from_mask_unchecked(n, rng.random::<u64>() & mask))
        .collect())
}

/// `count` i.i.d. points uniform over the Hamming ball.
///
/// A layer `j` is drawn with probability `C(n,j)/|ball|`, then a uniform
/// `j`-subset of coordinates is flipped.
pub fn sample_neighborhood(spec: &NeighborhoodSpec, count: usize, seed: u64) -> Result<Vec<SignedPoint>> {
    check_count(count)?;
    let n = spec.dim();
    let layers = spec.layer_sizes();
    let total: u128 = layers.iter().sum();
    let mut rng = rng_from(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut ticket = rng.random_range(0..total);
        let mut j = 0;
        while ticket >= layers[j] {
            ticket -= layers[j];
            j += 1;
        }
        let flip = index::sample(&mut rng, n, j)
            .iter()
            .fold(0u64, |m, i| m | 1 << i);
        out.push(SignedPoint::from_mask_unchecked(n, spec.base.mask() ^ flip));
    }
    Ok(out)
}

/// Every point of the ball, ordered by flip count and then by flipped subset.
pub fn enumerate_neighborhood(spec: &NeighborhoodSpec) -> Result<Vec<SignedPoint>> {
    let size = spec.size();
    if size > BALL_ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            what: "the Hamming ball",
            size,
            cap: BALL_ENUMERATION_CAP,
        });
    }
    Ok(subsets_up_to(spec.dim(), spec.radius)
        .into_iter()
        .map(|s| spec.base.flipped(s))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::Subset;
    use crate::reference;
    use std::collections::{HashMap, HashSet};

    #[test]
    fn polynomial_oracle_counts_queries() {
        let f = Oracle::polynomial(reference::f1());
        let x = SignedPoint::new(&[1, -1, 1]).unwrap();
        assert!((f.query(&x).unwrap() - 1.083).abs() < 1e-3);
        assert_eq!(f.query_count(), 1);
        assert!(f.query(&SignedPoint::all_retained(2)).is_err());
        assert!(f.is_concurrent_safe());
    }

    #[test]
    fn table_oracle_indexing() {
        let t = TruthTable::new(3, (0..8).map(|v| v as f64 * 0.5).collect()).unwrap();
        let f = Oracle::table(t);
        assert_eq!(f.query(&SignedPoint::all_retained(3)).unwrap(), 3.5);
    }

    #[test]
    fn uniform_sampling_is_deterministic() {
        assert_eq!(sample_uniform(9, 50, 3).unwrap(), sample_uniform(9, 50, 3).unwrap());
        assert_ne!(sample_uniform(9, 50, 3).unwrap(), sample_uniform(9, 50, 4).unwrap());
        assert!(sample_uniform(3, 0, 1).is_err());
    }

    #[test]
    fn uniform_sampling_moments() {
        // 4 sigma of a mean of 1e5 signs is 0.0126
        let pts = sample_uniform(8, 100_000, 11).unwrap();
        let t = pts.len() as f64;
        let mean = |i: usize| pts.iter().map(|x| x.sign(i) as f64).sum::<f64>() / t;
        for i in 0..8 {
            assert!(mean(i).abs() < 0.02, "coordinate {i}: {}", mean(i));
        }
        for i in 0..8 {
            for j in i + 1..8 {
                let c = pts.iter().map(|x| (x.sign(i) * x.sign(j)) as f64).sum::<f64>() / t;
                assert!((c - mean(i) * mean(j)).abs() < 0.02);
            }
        }
    }

    #[test]
    fn radius_zero_returns_base() {
        let base = SignedPoint::new(&[1, -1, 1, 1]).unwrap();
        let spec = NeighborhoodSpec::new(base, 0).unwrap();
        assert!(sample_neighborhood(&spec, 20, 1).unwrap().iter().all(|x| *x == base));
    }

    #[test]
    fn radius_one_is_uniform_over_ball() {
        let spec = NeighborhoodSpec::around_full_input(3, 1).unwrap();
        let pts = sample_neighborhood(&spec, 10_000, 5).unwrap();
        let mut counts: HashMap<SignedPoint, usize> = HashMap::new();
        for p in &pts {
            assert!(spec.contains(p));
            *counts.entry(*p).or_default() += 1;
        }
        assert_eq!(counts.len(), 4);
        for c in counts.values() {
            assert!((*c as f64 / 1e4 - 0.25).abs() < 0.02);
        }
    }

    #[test]
    fn neighborhood_rejects_large_radius() {
        assert!(NeighborhoodSpec::around_full_input(3, 4).is_err());
    }

    #[test]
    fn enumeration_sizes_and_order() {
        let size = |n, r| {
            enumerate_neighborhood(&NeighborhoodSpec::around_full_input(n, r).unwrap())
                .unwrap()
                .len()
        };
        assert_eq!(size(3, 1), 4);
        assert_eq!(size(5, 2), 16);
        assert_eq!(size(3, 3), 8);
        let spec = NeighborhoodSpec::around_full_input(4, 2).unwrap();
        let pts = enumerate_neighborhood(&spec).unwrap();
        assert_eq!(pts[0], SignedPoint::all_retained(4));
        assert_eq!(pts[1], SignedPoint::all_retained(4).flipped(Subset::singleton(0)));
        assert_eq!(pts.iter().collect::<HashSet<_>>().len(), pts.len());
    }

    #[test]
    fn enumeration_cap() {
        let spec = NeighborhoodSpec::around_full_input(40, 10).unwrap();
        assert!(matches!(
            enumerate_neighborhood(&spec),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 1), derive_seed(1, 2));
        assert_ne!(derive_seed(1, 1), derive_seed(2, 1));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
