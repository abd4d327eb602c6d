//! Exact Fourier analysis over the Boolean cube `{-1,+1}^n`.
//!
//! Points and subsets are both packed into a `u64` bitmask, so the ambient
//! dimension is limited to [`MAX_DIM`]. For a point, bit `i` is set exactly
//! when `x_i = +1` (feature retained); this is also the truth-table index
//! convention and the coalition encoding used by the Shapley baselines.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported number of features.
pub const MAX_DIM: usize = 64;

/// Largest dimension for which exact operations enumerate the whole cube.
pub const ENUMERATION_CAP: usize = 20;

/// Absolute tolerance under which a value or coefficient counts as zero.
pub const ZERO_TOL: f64 = 1e-12;

pub(crate) fn check_dim_supported(n: usize) -> Result<()> {
    if n > MAX_DIM {
        return Err(Error::UnsupportedDimension { n, max: MAX_DIM });
    }
    Ok(())
}

pub(crate) fn check_enumerable(n: usize) -> Result<()> {
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            what: "the Boolean cube",
            size: 1u128 << n,
            cap: 1u128 << ENUMERATION_CAP,
        });
    }
    Ok(())
}

#[inline]
fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// `χ_S(x)` on packed masks: `-1` to the number of removed coordinates in `S`.
#[inline]
pub(crate) fn chi(subset: u64, retained: u64) -> f64 {
    if (subset & !retained).count_ones() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// An assignment in `{-1,+1}^n`; `-1` marks a removed feature.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignedPoint {
    n: u8,
    retained: u64,
}

impl SignedPoint {
    pub fn new(signs: &[i8]) -> Result<Self> {
        check_dim_supported(signs.len())?;
        let mut retained = 0u64;
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => retained |= 1 << i,
                -1 => {}
                other => {
                    return Err(Error::InvalidPoint(format!(
                        "coordinate {i} is {other}, expected -1 or +1"
                    )))
                }
            }
        }
        Ok(Self {
            n: signs.len() as u8,
            retained,
        })
    }

    /// Builds a point from its retained-feature bitmask.
    pub fn from_mask(n: usize, retained: u64) -> Result<Self> {
        check_dim_supported(n)?;
        if retained & !full_mask(n) != 0 {
            return Err(Error::InvalidPoint(format!(
                "mask {retained:#x} has bits at or above n={n}"
            )));
        }
        Ok(Self {
            n: n as u8,
            retained,
        })
    }

    pub(crate) fn from_mask_unchecked(n: usize, retained: u64) -> Self {
        debug_assert!(n <= MAX_DIM && retained & !full_mask(n) == 0);
        Self {
            n: n as u8,
            retained,
        }
    }

    /// The fully retained input `(+1, ..., +1)`.
    pub fn all_retained(n: usize) -> Self {
        Self::from_mask_unchecked(n, full_mask(n))
    }

    /// The fully removed input `(-1, ..., -1)`.
    pub fn all_removed(n: usize) -> Self {
        Self::from_mask_unchecked(n, 0)
    }

    pub fn dim(&self) -> usize {
        self.n as usize
    }

    /// Bitmask of coordinates equal to `+1`. Equals the truth-table index.
    pub fn mask(&self) -> u64 {
        self.retained
    }

    pub fn sign(&self, i: usize) -> i8 {
        assert!(i < self.dim(), "coordinate {i} out of range for n={}", self.n);
        if self.retained >> i & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.dim()).map(|i| self.sign(i)).collect()
    }

    pub fn hamming(&self, other: &SignedPoint) -> u32 {
        (self.retained ^ other.retained).count_ones()
    }

    /// Flips every coordinate in `subset`.
    pub fn flipped(&self, subset: Subset) -> Self {
        Self::from_mask_unchecked(self.dim(), self.retained ^ (subset.mask() & full_mask(self.dim())))
    }
}

impl fmt::Debug for SignedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignedPoint({self})")
    }
}

/// Space-separated `+1`/`-1` tokens, as used by the external-oracle protocol.
impl fmt::Display for SignedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(if self.sign(i) == 1 { "+1" } else { "-1" })?;
        }
        Ok(())
    }
}

impl FromStr for SignedPoint {
    type Err = Error;

    /// Accepts `+1`/`-1`/`1` tokens separated by whitespace or commas.
    fn from_str(s: &str) -> Result<Self> {
        let signs = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| match t {
                "+1" | "1" => Ok(1),
                "-1" => Ok(-1),
                other => Err(Error::InvalidPoint(format!("bad sign token `{other}`"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        SignedPoint::new(&signs)
    }
}

/// A set `S ⊆ [n]` indexing the Fourier basis function `χ_S`.
///
/// Ordered canonically: by size, then lexicographically by sorted indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Subset(u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    /// Builds a subset from strictly increasing indices.
    pub fn new(indices: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        let mut prev: Option<usize> = None;
        for &i in indices {
            if i >= MAX_DIM {
                return Err(Error::InvalidSubset(format!("index {i} exceeds {MAX_DIM}")));
            }
            if prev.is_some_and(|p| p >= i) {
                return Err(Error::InvalidSubset(format!(
                    "indices must be strictly increasing: {indices:?}"
                )));
            }
            prev = Some(i);
            mask |= 1 << i;
        }
        Ok(Subset(mask))
    }

    pub fn from_mask(mask: u64) -> Self {
        Subset(mask)
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_DIM);
        Subset(1 << i)
    }

    pub fn mask(&self) -> u64 {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < MAX_DIM && self.0 >> i & 1 == 1
    }

    pub fn is_subset_of(&self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// Whether every index is below `n`.
    pub fn fits(&self, n: usize) -> bool {
        self.0 & !full_mask(n) == 0
    }

    pub(crate) fn check_fits(&self, n: usize) -> Result<()> {
        if self.fits(n) {
            Ok(())
        } else {
            Err(Error::InvalidSubset(format!(
                "{{{self}}} has an index outside [0, {n})"
            )))
        }
    }
}

impl Ord for Subset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            let diff = self.0 ^ other.0;
            if diff == 0 {
                Ordering::Equal
            } else if self.0 >> diff.trailing_zeros() & 1 == 1 {
                // the smallest differing index belongs to self, so self sorts first
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

/// Comma-separated indices; the empty set prints as the empty string.
impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.indices().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl FromStr for Subset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Subset::EMPTY);
        }
        let indices = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidSubset(format!("bad index `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Subset::new(&indices)
    }
}

/// `χ_S(x)`; always `+1` or `-1`.
pub fn eval_basis(subset: Subset, x: &SignedPoint) -> Result<i8> {
    subset.check_fits(x.dim())?;
    Ok(chi(subset.mask(), x.mask()) as i8)
}

/// Every subset of `[n]` with size at most `degree`, in canonical order.
pub fn subsets_up_to(n: usize, degree: usize) -> Vec<Subset> {
    let mut out = Vec::new();
    let mut combo = Vec::with_capacity(degree);
    for size in 0..=degree.min(n) {
        combo.clear();
        combo.extend(0..size);
        loop {
            out.push(Subset(combo.iter().fold(0u64, |m, &i| m | 1 << i)));
            // advance to the next combination in lexicographic order
            let mut pos = size;
            while pos > 0 && combo[pos - 1] == n - size + pos - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            combo[pos - 1] += 1;
            for j in pos..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    out
}

/// An ordered, duplicate-free family of readable bases `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisFamily {
    n: usize,
    members: Vec<Subset>,
}

impl BasisFamily {
    /// `C^d`: all subsets of size at most `degree`.
    pub fn up_to_degree(n: usize, degree: usize) -> Result<Self> {
        check_dim_supported(n)?;
        Ok(Self {
            n,
            members: subsets_up_to(n, degree),
        })
    }

    pub fn from_subsets(n: usize, members: Vec<Subset>) -> Result<Self> {
        check_dim_supported(n)?;
        let mut seen = HashSet::with_capacity(members.len());
        for s in &members {
            s.check_fits(n)?;
            if !seen.insert(*s) {
                return Err(Error::InvalidSubset(format!("duplicate basis {{{s}}}")));
            }
        }
        Ok(Self { n, members })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Subset] {
        &self.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Subset> {
        self.members.iter()
    }

    /// `Some(d)` when the family is exactly the canonical `C^d`.
    pub fn canonical_degree(&self) -> Option<usize> {
        let d = self.members.iter().map(Subset::len).max()?;
        (self.members == subsets_up_to(self.n, d)).then_some(d)
    }
}

/// A sparse polynomial `Σ_S c_S χ_S` over `{-1,+1}^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSpectrum {
    n: usize,
    terms: BTreeMap<Subset, f64>,
}

impl SparseSpectrum {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_DIM);
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Subset, f64)>,
    {
        check_dim_supported(n)?;
        let mut out = Self::zero(n);
        for (s, c) in terms {
            out.add_term(s, c)?;
        }
        Ok(out)
    }

    /// Coefficients aligned with the members of `basis`.
    pub fn from_dense(basis: &BasisFamily, coefficients: &[f64]) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a basis of size {}",
                coefficients.len(),
                basis.len()
            )));
        }
        Self::from_terms(basis.dim(), basis.iter().copied().zip(coefficients.iter().copied()))
    }

    /// Adds `coefficient` to the term on `subset`.
    pub fn add_term(&mut self, subset: Subset, coefficient: f64) -> Result<()> {
        subset.check_fits(self.n)?;
        if !coefficient.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite coefficient {coefficient} on {{{subset}}}"
            )));
        }
        *self.terms.entry(subset).or_insert(0.0) += coefficient;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, subset: Subset) -> f64 {
        self.terms.get(&subset).copied().unwrap_or(0.0)
    }

    /// Terms in canonical subset order.
    pub fn iter(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.terms.iter().map(|(s, c)| (*s, *c))
    }

    /// Drops every term with `|c| < tol`; `tol = 0` keeps everything.
    pub fn normalized(mut self, tol: f64) -> Self {
        self.terms.retain(|_, c| c.abs() >= tol);
        self
    }

    /// Largest subset size among stored terms.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Subset::len).max().unwrap_or(0)
    }

    /// Coefficients on `basis`, in basis order (missing terms are zero).
    pub fn to_dense(&self, basis: &BasisFamily) -> Vec<f64> {
        basis.iter().map(|s| self.get(*s)).collect()
    }

    /// Keeps only the terms on members of `basis`.
    pub fn restricted_to(&self, basis: &BasisFamily) -> Self {
        let keep: HashSet<Subset> = basis.iter().copied().collect();
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(s, _)| keep.contains(s))
                .map(|(s, c)| (*s, *c))
                .collect(),
        }
    }

    /// Termwise `self - other`.
    pub fn minus(&self, other: &SparseSpectrum) -> Result<Self> {
        Error::check_dim(self.n, other.n)?;
        let mut out = self.clone();
        for (s, c) in other.iter() {
            *out.terms.entry(s).or_insert(0.0) -= c;
        }
        Ok(out)
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    /// `Σ_S c_S χ_S(x)` without dimension checks.
    #[inline]
    pub(crate) fn eval_mask(&self, retained: u64) -> f64 {
        self.terms
            .iter()
            .map(|(s, c)| c * chi(s.mask(), retained))
            .sum()
    }
}

/// `g(x) = Σ_S ĝ_S χ_S(x)`.
pub fn eval_spectrum(g: &SparseSpectrum, x: &SignedPoint) -> Result<f64> {
    Error::check_dim(g.dim(), x.dim())?;
    Ok(g.eval_mask(x.mask()))
}

/// A function `{-1,+1}^n → R` that can be evaluated pointwise.
///
/// Implemented by oracles, spectra, tables, explanations and the Shapley
/// global extensions, so metrics can compare any pair of them.
pub trait BooleanFunction {
    fn dim(&self) -> usize;
    fn value(&self, x: &SignedPoint) -> Result<f64>;
}

impl<T: BooleanFunction + ?Sized> BooleanFunction for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &SignedPoint) -> Result<f64> {
        (**self).value(x)
    }
}

impl BooleanFunction for SparseSpectrum {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &SignedPoint) -> Result<f64> {
        eval_spectrum(self, x)
    }
}

/// Dense values over all `2^n` points, indexed by retained-feature mask.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthTable {
    n: usize,
    values: Vec<f64>,
}

impl TruthTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_enumerable(n)?;
        if values.len() != 1usize << n {
            return Err(Error::InvalidArgument(format!(
                "truth table for n={n} needs {} values, got {}",
                1usize << n,
                values.len()
            )));
        }
        Ok(Self { n, values })
    }

    /// Tabulates `f` by querying every point of the cube in index order.
    pub fn tabulate<F: BooleanFunction + ?Sized>(f: &F) -> Result<Self> {
        let n = f.dim();
        check_enumerable(n)?;
        let values = (0..1u64 << n)
            .map(|m| f.value(&SignedPoint::from_mask_unchecked(n, m)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, values })
    }

    /// Inverse transform: the table of `Σ_S ĝ_S χ_S`.
    pub fn from_spectrum(g: &SparseSpectrum) -> Result<Self> {
        let n = g.dim();
        check_enumerable(n)?;
        let mut values = vec![0.0; 1usize << n];
        for (s, c) in g.iter() {
            values[s.mask() as usize] += c;
        }
        inverse_butterfly(&mut values);
        Ok(Self { n, values })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn point(&self, index: usize) -> SignedPoint {
        SignedPoint::from_mask_unchecked(self.n, index as u64)
    }

    /// Dense normalized coefficients `f̂_S = 2^{-n} Σ_x f(x) χ_S(x)`, indexed by subset mask.
    pub fn walsh_hadamard(&self) -> Vec<f64> {
        let mut a = self.values.clone();
        forward_butterfly(&mut a);
        let scale = 1.0 / a.len() as f64;
        a.iter_mut().for_each(|v| *v *= scale);
        a
    }

    pub fn minus(&self, other: &TruthTable) -> Result<TruthTable> {
        Error::check_dim(self.n, other.n)?;
        Ok(TruthTable {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Writes `n=<n>` followed by one value per line in index order.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n={}", self.n)?;
        for v in &self.values {
            writeln!(w, "{v:?}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty truth-table file"))?;
        let header = header?;
        let n: usize = header
            .trim()
            .strip_prefix("n=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::parse(1, format!("expected `n=<int>`, got `{header}`")))?;
        check_enumerable(n)?;
        let mut values = Vec::with_capacity(1 << n);
        for (i, line) in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let v: f64 = t
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad float `{t}`")))?;
            values.push(v);
        }
        TruthTable::new(n, values)
    }
}

impl BooleanFunction for TruthTable {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &SignedPoint) -> Result<f64> {
        Error::check_dim(self.n, x.dim())?;
        Ok(self.values[x.mask() as usize])
    }
}

/// In-place butterfly mapping values to unnormalized `Σ_x f(x) χ_S(x)`.
fn forward_butterfly(a: &mut [f64]) {
    let mut h = 1;
    while h < a.len() {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (removed, kept) in lo.iter_mut().zip(hi.iter_mut()) {
                let (r, k) = (*removed, *kept);
                *removed = r + k;
                *kept = k - r;
            }
        }
        h *= 2;
    }
}

/// In-place butterfly mapping coefficients to values `Σ_S ĝ_S χ_S(x)`.
fn inverse_butterfly(a: &mut [f64]) {
    let mut h = 1;
    while h < a.len() {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (without, with) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a0, a1) = (*without, *with);
                *without = a0 - a1;
                *with = a0 + a1;
            }
        }
        h *= 2;
    }
}

/// `⟨f, g⟩ = 2^{-n} Σ_x f(x) g(x)` by full enumeration.
pub fn inner_product_exact<F, G>(f: &F, g: &G, n: usize) -> Result<f64>
where
    F: BooleanFunction + ?Sized,
    G: BooleanFunction + ?Sized,
{
    Error::check_dim(n, f.dim())?;
    Error::check_dim(n, g.dim())?;
    check_enumerable(n)?;
    let mut acc = 0.0;
    for m in 0..1u64 << n {
        let x = SignedPoint::from_mask_unchecked(n, m);
        acc += f.value(&x)? * g.value(&x)?;
    }
    Ok(acc / (1u64 << n) as f64)
}

/// Every Fourier coefficient of `f`, with entries below [`ZERO_TOL`] dropped.
pub fn fourier_transform_exact<F: BooleanFunction + ?Sized>(f: &F, n: usize) -> Result<SparseSpectrum> {
    Error::check_dim(n, f.dim())?;
    let table = TruthTable::tabulate(f)?;
    Ok(spectrum_of_table(&table))
}

pub fn spectrum_of_table(table: &TruthTable) -> SparseSpectrum {
    let coefficients = table.walsh_hadamard();
    SparseSpectrum {
        n: table.dim(),
        terms: coefficients
            .into_iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > ZERO_TOL)
            .map(|(m, c)| (Subset(m as u64), c))
            .collect(),
    }
}

/// `(|supp f|, |supp f̂|)` with zero meaning `|v| <= ZERO_TOL`.
pub fn support_sizes(f: &TruthTable) -> Result<(usize, usize)> {
    let points = f.values().iter().filter(|v| v.abs() > ZERO_TOL).count();
    if points == 0 {
        return Err(Error::ZeroFunction);
    }
    let spectral = f
        .walsh_hadamard()
        .iter()
        .filter(|c| c.abs() > ZERO_TOL)
        .count();
    Ok((points, spectral))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(s: &[i8]) -> SignedPoint {
        SignedPoint::new(s).unwrap()
    }

    fn set(ix: &[usize]) -> Subset {
        Subset::new(ix).unwrap()
    }

    #[test]
    fn basis_evaluation() {
        assert_eq!(eval_basis(Subset::EMPTY, &pt(&[-1, 1, -1])).unwrap(), 1);
        assert_eq!(eval_basis(set(&[0, 1]), &pt(&[1, -1, 1])).unwrap(), -1);
        assert_eq!(eval_basis(set(&[0, 1, 2]), &pt(&[-1, -1, -1])).unwrap(), -1);
        assert!(eval_basis(set(&[3]), &pt(&[1, 1, 1])).is_err());
    }

    #[test]
    fn point_validation_and_display() {
        assert!(SignedPoint::new(&[1, 0]).is_err());
        let x: SignedPoint = "+1 -1 +1".parse().unwrap();
        assert_eq!(x.signs(), vec![1, -1, 1]);
        assert_eq!(x.to_string(), "+1 -1 +1");
        assert_eq!(x.mask(), 0b101);
    }

    #[test]
    fn subset_validation() {
        assert!(Subset::new(&[1, 1]).is_err());
        assert!(Subset::new(&[2, 1]).is_err());
        assert_eq!("".parse::<Subset>().unwrap(), Subset::EMPTY);
        assert_eq!("0,2".parse::<Subset>().unwrap(), set(&[0, 2]));
        assert_eq!(set(&[0, 2]).to_string(), "0,2");
    }

    #[test]
    fn canonical_order_is_size_then_lexicographic() {
        let got = subsets_up_to(4, 2);
        let mut want = vec![Subset::EMPTY];
        for i in 0..4 {
            want.push(set(&[i]));
        }
        for i in 0..4 {
            for j in i + 1..4 {
                want.push(set(&[i, j]));
            }
        }
        assert_eq!(got, want);
        let mut sorted = got.clone();
        sorted.sort();
        assert_eq!(sorted, got);
        assert!(set(&[0, 3]) < set(&[1, 2]));
        assert!(set(&[2]) < set(&[0, 1]));
    }

    #[test]
    fn family_sizes() {
        assert_eq!(BasisFamily::up_to_degree(25, 3).unwrap().len(), 1 + 25 + 300 + 2300);
        assert_eq!(subsets_up_to(3, 5).len(), 8);
        let c = BasisFamily::up_to_degree(5, 2).unwrap();
        assert_eq!(c.canonical_degree(), Some(2));
        assert!(BasisFamily::from_subsets(3, vec![set(&[0]), set(&[0])]).is_err());
        assert!(BasisFamily::from_subsets(3, vec![set(&[3])]).is_err());
    }

    #[test]
    fn empty_spectrum_is_zero() {
        let g = SparseSpectrum::zero(3);
        assert_eq!(eval_spectrum(&g, &pt(&[1, -1, 1])).unwrap(), 0.0);
        assert!(eval_spectrum(&g, &pt(&[1, -1])).is_err());
    }

    #[test]
    fn transform_of_single_character() {
        let chi1 = SparseSpectrum::from_terms(3, [(set(&[1]), 1.0)]).unwrap();
        let t = fourier_transform_exact(&chi1, 3).unwrap();
        assert_eq!(t.iter().collect::<Vec<_>>(), vec![(set(&[1]), 1.0)]);
    }

    #[test]
    fn inverse_matches_pointwise_evaluation() {
        let g = SparseSpectrum::from_terms(
            4,
            [(Subset::EMPTY, 0.3), (set(&[0, 3]), -1.5), (set(&[1, 2, 3]), 0.25)],
        )
        .unwrap();
        let table = TruthTable::from_spectrum(&g).unwrap();
        for m in 0..16 {
            let x = table.point(m);
            assert!((table.values()[m] - eval_spectrum(&g, &x).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn support_of_parity_and_point_mass() {
        let parity = TruthTable::from_spectrum(
            &SparseSpectrum::from_terms(3, [(set(&[0, 1, 2]), 1.0)]).unwrap(),
        )
        .unwrap();
        assert_eq!(support_sizes(&parity).unwrap(), (8, 1));
        let mut delta = vec![0.0; 8];
        delta[5] = 1.0;
        assert_eq!(support_sizes(&TruthTable::new(3, delta).unwrap()).unwrap(), (1, 8));
        assert!(matches!(
            support_sizes(&TruthTable::new(2, vec![0.0; 4]).unwrap()),
            Err(Error::ZeroFunction)
        ));
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let g = SparseSpectrum::zero(21);
        assert!(matches!(
            fourier_transform_exact(&g, 21),
            Err(Error::EnumerationCap { .. })
        ));
        assert!(inner_product_exact(&g, &g, 21).is_err());
    }

    #[test]
    fn truth_table_file_round_trip() {
        let t = TruthTable::new(2, vec![0.1, -2.5, 1e-30, 3.0]).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n=2\n"));
        let back = TruthTable::read_from(&buf[..]).unwrap();
        assert_eq!(back, t);
        assert!(TruthTable::read_from(&b"n=2\n1\n2\n"[..]).is_err());
        assert!(TruthTable::read_from(&b"m=2\n"[..]).is_err());
    }

    #[test]
    fn all_retained_is_last_table_entry() {
        let t = TruthTable::new(3, (0..8).map(f64::from).collect()).unwrap();
        assert_eq!(t.value(&SignedPoint::all_retained(3)).unwrap(), 7.0);
        assert_eq!(t.value(&SignedPoint::all_removed(3)).unwrap(), 0.0);
    }
}
