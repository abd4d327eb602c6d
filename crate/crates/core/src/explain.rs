//! Explanation algorithms: Harmonica and its local and anchored variants,
//! the Low-degree estimator, and surrogate prediction.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::cube::{BasisFamily, BooleanFunction, SignedPoint, SparseSpectrum, Subset};
use crate::error::{Error, Result};
use crate::oracle::{derive_seed, sample_neighborhood, sample_uniform, NeighborhoodSpec, Oracle, SampleBatch};
use crate::solver::{solve_joint, solve_lasso, DesignProblem, JointConfig, JointInit, JointLoss, LassoConfig};

/// Sub-stream tag for anchor draws, so samples match plain Harmonica.
const ANCHOR_STREAM: u64 = 0x616e_6368;
/// Sub-stream tag for the joint solver's random initialization.
const INIT_STREAM: u64 = 0x696e_6974;
/// Half-width of the uniform initialization of the joint solver.
pub const JOINT_INIT_HALF_WIDTH: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Harmonica,
    HarmonicaLocal,
    LowDegree,
    HarmonicaAnchor,
    HarmonicaAnchorConstrained,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Harmonica,
        Method::HarmonicaLocal,
        Method::LowDegree,
        Method::HarmonicaAnchor,
        Method::HarmonicaAnchorConstrained,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Harmonica => "harmonica",
            Method::HarmonicaLocal => "harmonica-local",
            Method::LowDegree => "low-degree",
            Method::HarmonicaAnchor => "harmonica-anchor",
            Method::HarmonicaAnchorConstrained => "harmonica-anchor-constrained",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }
}

/// Provenance of an explanation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExplanationMeta {
    pub seed: Option<u64>,
    pub samples: usize,
    pub lambda: Option<f64>,
    pub joint: Option<JointConfig>,
    pub radius: Option<usize>,
    pub queries: u64,
    /// Anchors that received no samples.
    pub empty_anchors: Vec<usize>,
    /// Joint-solver losses; not part of the text record.
    pub trajectory: Vec<JointLoss>,
}

/// One or more anchored polynomials over a shared basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Explanation {
    pub method: Method,
    pub basis: BasisFamily,
    pub anchors: Vec<SignedPoint>,
    pub spectra: Vec<SparseSpectrum>,
    pub meta: ExplanationMeta,
}

impl Explanation {
    pub fn new(
        method: Method,
        basis: BasisFamily,
        anchors: Vec<SignedPoint>,
        spectra: Vec<SparseSpectrum>,
        meta: ExplanationMeta,
    ) -> Result<Self> {
        if anchors.is_empty() || anchors.len() != spectra.len() {
            return Err(Error::InvalidArgument(format!(
                "{} anchors for {} spectra",
                anchors.len(),
                spectra.len()
            )));
        }
        let n = basis.dim();
        for a in &anchors {
            Error::check_dim(n, a.dim())?;
        }
        for s in &spectra {
            Error::check_dim(n, s.dim())?;
        }
        Ok(Self {
            method,
            basis,
            anchors,
            spectra,
            meta,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn k(&self) -> usize {
        self.anchors.len()
    }

    /// The single model of a consistent explanation.
    pub fn spectrum(&self) -> &SparseSpectrum {
        &self.spectra[0]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method={}", self.method);
        let _ = writeln!(out, "n={}", self.dim());
        let _ = writeln!(out, "k={}", self.k());
        match self.basis.canonical_degree() {
            Some(d) => {
                let _ = writeln!(out, "basis=degree:{d}");
            }
            None => {
                let _ = writeln!(out, "basis=explicit:{}", self.basis.len());
                for s in self.basis.iter() {
                    let _ = writeln!(out, "member S={s}");
                }
            }
        }
        let m = &self.meta;
        let mut meta = format!("meta T={} queries={}", m.samples, m.queries);
        if let Some(seed) = m.seed {
            let _ = write!(meta, " seed={seed}");
        }
        if let Some(l) = m.lambda {
            let _ = write!(meta, " lambda={l:?}");
        }
        if let Some(j) = m.joint {
            let _ = write!(
                meta,
                " lambda1={:?} lambda2={:?} eta={:?} epochs={}",
                j.lambda1, j.lambda2, j.eta, j.epochs
            );
        }
        if let Some(r) = m.radius {
            let _ = write!(meta, " radius={r}");
        }
        if !m.empty_anchors.is_empty() {
            let list: Vec<String> = m.empty_anchors.iter().map(|a| a.to_string()).collect();
            let _ = write!(meta, " empty={}", list.join(","));
        }
        out.push_str(&meta);
        out.push('\n');
        for (i, (a, g)) in self.anchors.iter().zip(&self.spectra).enumerate() {
            let _ = writeln!(out, "anchor={i} x={a}");
            for (s, c) in g.iter() {
                let _ = writeln!(out, "S={s} coeff={c:?}");
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut header = |key: &str| -> Result<(usize, String)> {
            let (no, line) = lines
                .next()
                .ok_or_else(|| Error::parse(0, format!("missing `{key}=` line")))?;
            let value = line
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| Error::parse(no, format!("expected `{key}=`")))?;
            Ok((no, value.to_string()))
        };
        let (no, method) = header("method")?;
        let method: Method = method.parse().map_err(|e: Error| Error::parse(no, e.to_string()))?;
        let (no, n) = header("n")?;
        let n: usize = n.parse().map_err(|_| Error::parse(no, "bad n"))?;
        let (no, k) = header("k")?;
        let k: usize = k.parse().map_err(|_| Error::parse(no, "bad k"))?;
        let (no, basis_spec) = header("basis")?;

        let mut rest: Vec<(usize, &str)> = lines.collect();
        rest.reverse();
        let mut next = || rest.pop();

        let basis = if let Some(d) = basis_spec.strip_prefix("degree:") {
            let d: usize = d.parse().map_err(|_| Error::parse(no, "bad basis degree"))?;
            BasisFamily::up_to_degree(n, d).map_err(|e| Error::parse(no, e.to_string()))?
        } else if let Some(len) = basis_spec.strip_prefix("explicit:") {
            let len: usize = len.parse().map_err(|_| Error::parse(no, "bad basis size"))?;
            let mut members = Vec::with_capacity(len);
            for _ in 0..len {
                let (no, line) = next().ok_or_else(|| Error::parse(no, "truncated basis list"))?;
                let s = line
                    .strip_prefix("member S=")
                    .ok_or_else(|| Error::parse(no, "expected `member S=`"))?;
                members.push(s.parse::<Subset>().map_err(|e| Error::parse(no, e.to_string()))?);
            }
            BasisFamily::from_subsets(n, members).map_err(|e| Error::parse(no, e.to_string()))?
        } else {
            return Err(Error::parse(no, format!("unknown basis `{basis_spec}`")));
        };

        let (no, meta_line) = next().ok_or_else(|| Error::parse(0, "missing meta line"))?;
        let meta = parse_meta(no, meta_line)?;

        let mut anchors = Vec::with_capacity(k);
        let mut spectra: Vec<SparseSpectrum> = Vec::with_capacity(k);
        while let Some((no, line)) = next() {
            if let Some(rest) = line.strip_prefix("anchor=") {
                let (idx, x) = rest
                    .split_once(" x=")
                    .ok_or_else(|| Error::parse(no, "expected `anchor=<i> x=<signs>`"))?;
                if idx.parse::<usize>().ok() != Some(anchors.len()) {
                    return Err(Error::parse(no, "anchors out of order"));
                }
                let x: SignedPoint = x.parse().map_err(|e: Error| Error::parse(no, e.to_string()))?;
                if x.dim() != n {
                    return Err(Error::parse(no, "anchor dimension mismatch"));
                }
                anchors.push(x);
                spectra.push(SparseSpectrum::zero(n));
            } else if let Some(rest) = line.strip_prefix("S=") {
                let (s, c) = rest
                    .split_once(" coeff=")
                    .ok_or_else(|| Error::parse(no, "expected `S=<indices> coeff=<float>`"))?;
                let s: Subset = s.parse().map_err(|e: Error| Error::parse(no, e.to_string()))?;
                let c: f64 = c.parse().map_err(|_| Error::parse(no, format!("bad coefficient `{c}`")))?;
                let g = spectra
                    .last_mut()
                    .ok_or_else(|| Error::parse(no, "term before any anchor"))?;
                g.add_term(s, c).map_err(|e| Error::parse(no, e.to_string()))?;
            } else {
                return Err(Error::parse(no, format!("unexpected line `{line}`")));
            }
        }
        if anchors.len() != k {
            return Err(Error::parse(0, format!("k={k} but {} anchors", anchors.len())));
        }
        Explanation::new(method, basis, anchors, spectra, meta)
    }
}

fn parse_meta(no: usize, line: &str) -> Result<ExplanationMeta> {
    let body = line
        .strip_prefix("meta")
        .ok_or_else(|| Error::parse(no, "expected `meta` line"))?;
    let mut meta = ExplanationMeta::default();
    let mut joint = [None::<f64>; 3];
    let mut epochs = None;
    for field in body.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::parse(no, format!("bad meta field `{field}`")))?;
        let bad = || Error::parse(no, format!("bad value for `{key}`"));
        let float = || value.parse::<f64>().map_err(|_| bad());
        match key {
            "T" => meta.samples = value.parse().map_err(|_| bad())?,
            "queries" => meta.queries = value.parse().map_err(|_| bad())?,
            "seed" => meta.seed = Some(value.parse().map_err(|_| bad())?),
            "lambda" => meta.lambda = Some(float()?),
            "lambda1" => joint[0] = Some(float()?),
            "lambda2" => joint[1] = Some(float()?),
            "eta" => joint[2] = Some(float()?),
            "epochs" => epochs = Some(value.parse().map_err(|_| bad())?),
            "radius" => meta.radius = Some(value.parse().map_err(|_| bad())?),
            "empty" => {
                meta.empty_anchors = value
                    .split(',')
                    .map(|a| a.parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?
            }
            _ => return Err(Error::parse(no, format!("unknown meta field `{key}`"))),
        }
    }
    if let ([Some(lambda1), Some(lambda2), Some(eta)], Some(epochs)) = (joint, epochs) {
        meta.joint = Some(JointConfig {
            lambda1,
            lambda2,
            eta,
            epochs,
        });
    }
    Ok(meta)
}

impl BooleanFunction for Explanation {
    fn dim(&self) -> usize {
        Explanation::dim(self)
    }

    fn value(&self, x: &SignedPoint) -> Result<f64> {
        predict(self, x)
    }
}

/// Index of the Hamming-nearest anchor, lowest index on ties.
pub fn nearest_anchor(anchors: &[SignedPoint], x: &SignedPoint) -> usize {
    let mut best = 0;
    let mut best_d = u32::MAX;
    for (i, a) in anchors.iter().enumerate() {
        let d = a.hamming(x);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Nearest-anchor assignment of every point.
pub fn assign_nearest(anchors: &[SignedPoint], points: &[SignedPoint]) -> Result<Vec<usize>> {
    let first = anchors
        .first()
        .ok_or_else(|| Error::InvalidArgument("at least one anchor is required".into()))?;
    for x in points.iter().chain(anchors) {
        Error::check_dim(first.dim(), x.dim())?;
    }
    Ok(points.iter().map(|x| nearest_anchor(anchors, x)).collect())
}

/// Evaluates the model of the anchor nearest to `x`.
pub fn predict(e: &Explanation, x: &SignedPoint) -> Result<f64> {
    Error::check_dim(e.dim(), x.dim())?;
    let i = nearest_anchor(&e.anchors, x);
    Ok(e.spectra[i].eval_mask(x.mask()))
}

/// `log₂ k`, the inconsistency of an explanation made of `k` models.
pub fn inconsistency(e: &Explanation) -> f64 {
    (e.k() as f64).log2()
}

fn spectrum_from_coefficients(basis: &BasisFamily, alpha: &[f64]) -> Result<SparseSpectrum> {
    SparseSpectrum::from_terms(
        basis.dim(),
        basis
            .iter()
            .zip(alpha)
            .filter(|(_, a)| **a != 0.0)
            .map(|(s, a)| (*s, *a)),
    )
}

fn check_batch(basis: &BasisFamily, batch: &SampleBatch) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    if batch.points.len() != batch.values.len() {
        return Err(Error::InvalidArgument("sample batch has mismatched lengths".into()));
    }
    for x in &batch.points {
        Error::check_dim(basis.dim(), x.dim())?;
    }
    Ok(())
}

fn lasso_spectrum(basis: &BasisFamily, points: &[SignedPoint], values: &[f64], cfg: &LassoConfig) -> Result<SparseSpectrum> {
    let problem = DesignProblem::new(basis.clone(), points, values.to_vec())?;
    let alpha = solve_lasso(&problem, cfg)?.into_converged()?;
    spectrum_from_coefficients(basis, &alpha)
}

/// Harmonica on `t` uniform samples.
pub fn harmonica(f: &Oracle, basis: &BasisFamily, t: usize, lambda: f64, seed: u64) -> Result<Explanation> {
    Error::check_dim(basis.dim(), f.dim())?;
    let points = sample_uniform(f.dim(), t, seed)?;
    let batch = SampleBatch::evaluate(f, points, Some(seed))?;
    harmonica_on(&batch, basis, &LassoConfig::new(lambda))
}

/// Harmonica on an already evaluated batch.
pub fn harmonica_on(batch: &SampleBatch, basis: &BasisFamily, cfg: &LassoConfig) -> Result<Explanation> {
    check_batch(basis, batch)?;
    let g = lasso_spectrum(basis, &batch.points, &batch.values, cfg)?;
    let meta = ExplanationMeta {
        seed: batch.seed,
        samples: batch.len(),
        lambda: Some(cfg.lambda),
        queries: batch.len() as u64,
        ..Default::default()
    };
    Explanation::new(
        Method::Harmonica,
        basis.clone(),
        vec![SignedPoint::all_retained(basis.dim())],
        vec![g],
        meta,
    )
}

/// Harmonica restricted to samples from a Hamming ball.
pub fn harmonica_local(
    f: &Oracle,
    spec: &NeighborhoodSpec,
    basis: &BasisFamily,
    t: usize,
    lambda: f64,
    seed: u64,
) -> Result<Explanation> {
    Error::check_dim(basis.dim(), f.dim())?;
    Error::check_dim(f.dim(), spec.dim())?;
    let points = sample_neighborhood(spec, t, seed)?;
    let batch = SampleBatch::evaluate(f, points, Some(seed))?;
    harmonica_local_on(&batch, spec, basis, &LassoConfig::new(lambda))
}

pub fn harmonica_local_on(
    batch: &SampleBatch,
    spec: &NeighborhoodSpec,
    basis: &BasisFamily,
    cfg: &LassoConfig,
) -> Result<Explanation> {
    if let Some(x) = batch.points.iter().find(|x| !spec.contains(x)) {
        return Err(Error::InvalidArgument(format!("sample {x} lies outside the neighborhood")));
    }
    let mut e = harmonica_on(batch, basis, cfg)?;
    e.method = Method::HarmonicaLocal;
    e.anchors = vec![spec.base];
    e.meta.radius = Some(spec.radius);
    Ok(e)
}

/// Empirical correlations `(1/T) Σ_i f(x_i) χ_S(x_i)` on `t` uniform samples.
pub fn low_degree(f: &Oracle, basis: &BasisFamily, t: usize, seed: u64) -> Result<Explanation> {
    Error::check_dim(basis.dim(), f.dim())?;
    let points = sample_uniform(f.dim(), t, seed)?;
    let batch = SampleBatch::evaluate(f, points, Some(seed))?;
    low_degree_on(&batch, basis)
}

pub fn low_degree_on(batch: &SampleBatch, basis: &BasisFamily) -> Result<Explanation> {
    check_batch(basis, batch)?;
    let t = batch.len() as f64;
    let alpha: Vec<f64> = basis
        .iter()
        .map(|s| {
            batch
                .points
                .iter()
                .zip(&batch.values)
                .map(|(x, y)| y * crate::cube::chi(s.mask(), x.mask()))
                .sum::<f64>()
                / t
        })
        .collect();
    let meta = ExplanationMeta {
        seed: batch.seed,
        samples: batch.len(),
        queries: batch.len() as u64,
        ..Default::default()
    };
    Explanation::new(
        Method::LowDegree,
        basis.clone(),
        vec![SignedPoint::all_retained(basis.dim())],
        vec![spectrum_from_coefficients(basis, &alpha)?],
        meta,
    )
}

/// `k` uniform anchors drawn from a sub-stream of `seed`, without querying.
pub fn draw_anchors(n: usize, k: usize, seed: u64) -> Result<Vec<SignedPoint>> {
    sample_uniform(n, k, derive_seed(seed, ANCHOR_STREAM))
}

fn check_k(k: usize, t: usize) -> Result<()> {
    if k == 0 || k > t {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= T, got k={k}, T={t}")));
    }
    Ok(())
}

/// One LASSO per anchor over the samples nearest to it.
pub fn harmonica_anchor(
    f: &Oracle,
    k: usize,
    basis: &BasisFamily,
    t: usize,
    lambda: f64,
    seed: u64,
) -> Result<Explanation> {
    Error::check_dim(basis.dim(), f.dim())?;
    check_k(k, t)?;
    let anchors = draw_anchors(f.dim(), k, seed)?;
    let points = sample_uniform(f.dim(), t, seed)?;
    let batch = SampleBatch::evaluate(f, points, Some(seed))?;
    harmonica_anchor_on(&batch, anchors, basis, &LassoConfig::new(lambda))
}

pub fn harmonica_anchor_on(
    batch: &SampleBatch,
    anchors: Vec<SignedPoint>,
    basis: &BasisFamily,
    cfg: &LassoConfig,
) -> Result<Explanation> {
    check_batch(basis, batch)?;
    check_k(anchors.len(), batch.len())?;
    let assignment = assign_nearest(&anchors, &batch.points)?;
    let mut members = vec![Vec::new(); anchors.len()];
    for (i, a) in assignment.iter().enumerate() {
        members[*a].push(i);
    }
    let solve = |rows: &Vec<usize>| -> Result<Option<SparseSpectrum>> {
        if rows.is_empty() {
            return Ok(None);
        }
        let points: Vec<SignedPoint> = rows.iter().map(|&i| batch.points[i]).collect();
        let values: Vec<f64> = rows.iter().map(|&i| batch.values[i]).collect();
        lasso_spectrum(basis, &points, &values, cfg).map(Some)
    };
    // anchors share only the immutable batch, so their solves run side by side
    let solved: Vec<Result<Option<SparseSpectrum>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = members.iter().map(|rows| scope.spawn(move || solve(rows))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("anchor solve panicked"))
            .collect()
    });
    let mut spectra = Vec::with_capacity(anchors.len());
    let mut empty = Vec::new();
    for (i, r) in solved.into_iter().enumerate() {
        match r? {
            Some(g) => spectra.push(g),
            None => {
                log::warn!("anchor {i} received no samples; its model is zero");
                empty.push(i);
                spectra.push(SparseSpectrum::zero(basis.dim()));
            }
        }
    }
    let meta = ExplanationMeta {
        seed: batch.seed,
        samples: batch.len(),
        lambda: Some(cfg.lambda),
        queries: batch.len() as u64,
        empty_anchors: empty,
        ..Default::default()
    };
    Explanation::new(Method::HarmonicaAnchor, basis.clone(), anchors, spectra, meta)
}

/// Anchored models fitted jointly under sparsity and consensus penalties.
pub fn harmonica_anchor_constrained(
    f: &Oracle,
    k: usize,
    basis: &BasisFamily,
    t: usize,
    cfg: &JointConfig,
    seed: u64,
) -> Result<Explanation> {
    Error::check_dim(basis.dim(), f.dim())?;
    check_k(k, t)?;
    let anchors = draw_anchors(f.dim(), k, seed)?;
    let points = sample_uniform(f.dim(), t, seed)?;
    let batch = SampleBatch::evaluate(f, points, Some(seed))?;
    let init = JointInit::Uniform {
        seed: derive_seed(seed, INIT_STREAM),
        half_width: JOINT_INIT_HALF_WIDTH,
    };
    harmonica_anchor_constrained_on(&batch, anchors, basis, cfg, &init)
}

pub fn harmonica_anchor_constrained_on(
    batch: &SampleBatch,
    anchors: Vec<SignedPoint>,
    basis: &BasisFamily,
    cfg: &JointConfig,
    init: &JointInit,
) -> Result<Explanation> {
    check_batch(basis, batch)?;
    check_k(anchors.len(), batch.len())?;
    let assignment = assign_nearest(&anchors, &batch.points)?;
    let mut empty: Vec<usize> = (0..anchors.len()).filter(|a| !assignment.contains(a)).collect();
    empty.dedup();
    let problem = DesignProblem::new(basis.clone(), &batch.points, batch.values.clone())?;
    let result = solve_joint(&assignment, anchors.len(), &problem, cfg, init)?;
    let spectra = result
        .coefficients
        .iter()
        .map(|a| spectrum_from_coefficients(basis, a))
        .collect::<Result<Vec<_>>>()?;
    let meta = ExplanationMeta {
        seed: batch.seed,
        samples: batch.len(),
        joint: Some(*cfg),
        queries: batch.len() as u64,
        empty_anchors: empty,
        trajectory: result.trajectory,
        ..Default::default()
    };
    Explanation::new(Method::HarmonicaAnchorConstrained, basis.clone(), anchors, spectra, meta)
}

/// Every point of the cube exactly once, as a derandomized batch.
pub fn full_cube_batch(f: &Oracle) -> Result<SampleBatch> {
    crate::cube::check_enumerable(f.dim())?;
    let n = f.dim();
    let points: Vec<SignedPoint> = (0..1u64 << n).map(|m| SignedPoint::from_mask_unchecked(n, m)).collect();
    SampleBatch::evaluate(f, points, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{eval_spectrum, TruthTable};
    use crate::reference;

    fn pt(s: &[i8]) -> SignedPoint {
        SignedPoint::new(s).unwrap()
    }

    #[test]
    fn harmonica_fits_f2() {
        let f = Oracle::polynomial(reference::f2());
        let basis = BasisFamily::up_to_degree(3, 2).unwrap();
        let e = harmonica(&f, &basis, 64, 1e-6, 3).unwrap();
        assert_eq!(f.query_count(), 64);
        assert_eq!(e.meta.queries, 64);
        for (s, c) in reference::f2().iter() {
            assert!((e.spectrum().get(s) - c).abs() < 1e-6);
        }
        for (x, want) in reference::column_points().iter().zip(reference::F2.ground_truth) {
            assert!((predict(&e, x).unwrap() - want).abs() < 1e-3);
        }
    }

    #[test]
    fn constant_function() {
        let g = SparseSpectrum::from_terms(3, [(Subset::EMPTY, 5.0)]).unwrap();
        let f = Oracle::polynomial(g);
        let basis = BasisFamily::up_to_degree(3, 1).unwrap();
        let batch = full_cube_batch(&f).unwrap();
        let e = harmonica_on(&batch, &basis, &LassoConfig::new(0.16)).unwrap();
        assert!((e.spectrum().get(Subset::EMPTY) - (5.0 - 0.16 / 16.0)).abs() < 1e-12);
        assert_eq!(e.spectrum().len(), 1);
    }

    #[test]
    fn low_degree_full_cube_is_exact() {
        let f = Oracle::polynomial(reference::f3());
        let basis = BasisFamily::up_to_degree(3, 3).unwrap();
        let e = low_degree_on(&full_cube_batch(&f).unwrap(), &basis).unwrap();
        for (s, c) in reference::f3().iter() {
            assert!((e.spectrum().get(s) - c).abs() < 1e-15);
        }
        let zero = Oracle::polynomial(SparseSpectrum::zero(3));
        let e = low_degree(&zero, &basis, 50, 1).unwrap();
        assert!(e.spectrum().is_empty());
    }

    #[test]
    fn local_radius_zero_interpolates_base() {
        let f = Oracle::polynomial(reference::f2());
        let base = pt(&[1, -1, 1]);
        let spec = NeighborhoodSpec::new(base, 0).unwrap();
        let basis = BasisFamily::up_to_degree(3, 2).unwrap();
        let e = harmonica_local(&f, &spec, &basis, 10, 0.0, 5).unwrap();
        assert_eq!(e.anchors, vec![base]);
        let want = eval_spectrum(&reference::f2(), &base).unwrap();
        assert!((predict(&e, &base).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn anchor_assignment_rules() {
        let anchors = [pt(&[1, 1, 1]), pt(&[-1, -1, -1])];
        assert_eq!(nearest_anchor(&anchors, &pt(&[1, 1, -1])), 0);
        assert_eq!(nearest_anchor(&anchors, &pt(&[-1, -1, 1])), 1);
        let tie = [pt(&[1, 1]), pt(&[-1, -1])];
        assert_eq!(nearest_anchor(&tie, &pt(&[1, -1])), 0);
        assert!(assign_nearest(&[], &[pt(&[1])]).is_err());
    }

    #[test]
    fn single_anchor_matches_harmonica() {
        let f = Oracle::polynomial(reference::f3());
        let basis = BasisFamily::up_to_degree(3, 2).unwrap();
        let a = harmonica(&f, &basis, 40, 0.01, 11).unwrap();
        let b = harmonica_anchor(&f, 1, &basis, 40, 0.01, 11).unwrap();
        assert_eq!(a.spectra, b.spectra);
    }

    #[test]
    fn predict_routes_to_nearest() {
        let n = 2;
        let basis = BasisFamily::up_to_degree(n, 0).unwrap();
        let one = SparseSpectrum::from_terms(n, [(Subset::EMPTY, 1.0)]).unwrap();
        let two = SparseSpectrum::from_terms(n, [(Subset::EMPTY, 2.0)]).unwrap();
        let e = Explanation::new(
            Method::HarmonicaAnchor,
            basis,
            vec![pt(&[1, 1]), pt(&[-1, -1])],
            vec![one, two],
            ExplanationMeta::default(),
        )
        .unwrap();
        assert_eq!(predict(&e, &pt(&[-1, -1])).unwrap(), 2.0);
        assert_eq!(predict(&e, &pt(&[1, 1])).unwrap(), 1.0);
        assert!(predict(&e, &pt(&[1])).is_err());
        assert_eq!(inconsistency(&e), 1.0);
    }

    #[test]
    fn inconsistency_is_log2_k() {
        let n = 4;
        let basis = BasisFamily::up_to_degree(n, 1).unwrap();
        let make = |k: usize| {
            let anchors = draw_anchors(n, k, 0).unwrap();
            let spectra = vec![SparseSpectrum::zero(n); k];
            Explanation::new(Method::HarmonicaAnchor, basis.clone(), anchors, spectra, Default::default()).unwrap()
        };
        assert_eq!(inconsistency(&make(1)), 0.0);
        assert_eq!(inconsistency(&make(8)), 3.0);
        assert!((inconsistency(&make(9)) - 3.169925).abs() < 1e-6);
    }

    #[test]
    fn empty_anchor_gets_zero_model() {
        let f = Oracle::polynomial(reference::f1());
        let basis = BasisFamily::up_to_degree(3, 1).unwrap();
        let batch = SampleBatch::evaluate(&f, vec![pt(&[1, 1, 1]), pt(&[1, 1, -1])], None).unwrap();
        let anchors = vec![pt(&[1, 1, 1]), pt(&[-1, -1, -1])];
        let e = harmonica_anchor_on(&batch, anchors, &basis, &LassoConfig::new(0.0)).unwrap();
        assert_eq!(e.meta.empty_anchors, vec![1]);
        assert!(e.spectra[1].is_empty());
    }

    #[test]
    fn constrained_rejects_zero_epochs() {
        let f = Oracle::polynomial(reference::f1());
        let basis = BasisFamily::up_to_degree(3, 1).unwrap();
        let cfg = JointConfig {
            lambda1: 0.0,
            lambda2: 0.0,
            eta: 0.1,
            epochs: 0,
        };
        assert!(harmonica_anchor_constrained(&f, 2, &basis, 16, &cfg, 0).is_err());
        assert!(harmonica_anchor(&f, 0, &basis, 16, 0.0, 0).is_err());
        assert!(harmonica_anchor(&f, 17, &basis, 16, 0.0, 0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let f = Oracle::polynomial(reference::f3());
        let basis = BasisFamily::up_to_degree(3, 2).unwrap();
        let cfg = JointConfig {
            lambda1: 0.001,
            lambda2: 0.5,
            eta: 0.05,
            epochs: 30,
        };
        let e = harmonica_anchor_constrained(&f, 3, &basis, 32, &cfg, 9).unwrap();
        let text = e.to_text();
        let back = Explanation::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.spectra, e.spectra);
        assert_eq!(back.meta.joint, Some(cfg));

        let explicit = BasisFamily::from_subsets(3, vec![Subset::new(&[0, 2]).unwrap(), Subset::EMPTY]).unwrap();
        let table = TruthTable::from_spectrum(&reference::f2()).unwrap();
        let batch = full_cube_batch(&Oracle::table(table)).unwrap();
        let e = harmonica_on(&batch, &explicit, &LassoConfig::new(0.0)).unwrap();
        let back = Explanation::from_text(&e.to_text()).unwrap();
        assert_eq!(back.basis, explicit);
        assert_eq!(back, Explanation { meta: back.meta.clone(), ..e });
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "method=harmonica\nn=3\nk=1\nbasis=degree:1\nmeta T=1 queries=1\nanchor=0 x=+1 +1 +1\nS=0 coeff=abc\n";
        match Explanation::from_text(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Explanation::from_text("method=bogus\n").is_err());
    }
}
