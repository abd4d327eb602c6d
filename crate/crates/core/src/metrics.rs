//! Explanation quality: interpretation error, truthful gap, spectrum
//! distance and the uncertainty-principle checks.

use serde::Serialize;

use crate::cube::{
    check_enumerable, chi, support_sizes, BasisFamily, BooleanFunction, SignedPoint, SparseSpectrum, TruthTable,
    ZERO_TOL,
};
use crate::error::{Error, Result};
use crate::oracle::{enumerate_neighborhood, sample_neighborhood, sample_uniform, NeighborhoodSpec};

/// Cut-off of the experimental `L⁰` error: a point counts when `|f - g| >= 0.1`.
pub const L0_THRESHOLD: f64 = 0.1;
/// A surrogate is truthful on `C` when its gap is below this.
pub const TRUTHFUL_TOL: f64 = 1e-10;
/// Slack on the entropic uncertainty inequality.
pub const ENTROPY_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    UniformCube,
    UniformBall(NeighborhoodSpec),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Evaluation {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// A measure `μ` together with how integrals against it are computed.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSpec {
    pub support: Support,
    pub evaluation: Evaluation,
}

impl MeasureSpec {
    pub fn cube_exact() -> Self {
        Self {
            support: Support::UniformCube,
            evaluation: Evaluation::Exact,
        }
    }

    pub fn ball_exact(spec: NeighborhoodSpec) -> Self {
        Self {
            support: Support::UniformBall(spec),
            evaluation: Evaluation::Exact,
        }
    }

    fn points(&self, n: usize) -> Result<Vec<SignedPoint>> {
        match (&self.support, self.evaluation) {
            (Support::UniformCube, Evaluation::Exact) => {
                check_enumerable(n)?;
                Ok((0..1u64 << n).map(|m| SignedPoint::from_mask_unchecked(n, m)).collect())
            }
            (Support::UniformCube, Evaluation::MonteCarlo { samples, seed }) => sample_uniform(n, samples, seed),
            (Support::UniformBall(spec), ev) => {
                Error::check_dim(n, spec.dim())?;
                match ev {
                    Evaluation::Exact => enumerate_neighborhood(spec),
                    Evaluation::MonteCarlo { samples, seed } => sample_neighborhood(spec, samples, seed),
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Norm {
    /// `(E|f - g|^p)^{1/p}` for `p >= 1`.
    Lp(f64),
    /// Fraction of points with `|f - g| >= 0.1`.
    L0Thresholded,
    /// Fraction of points where `f` and `g` differ at all.
    L0Exact,
}

impl Norm {
    pub fn label(&self) -> String {
        match self {
            Norm::Lp(p) => format!("{p}"),
            Norm::L0Thresholded => "0-thresholded".into(),
            Norm::L0Exact => "0-exact".into(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "0" | "0-thresholded" => Ok(Norm::L0Thresholded),
            "0-exact" => Ok(Norm::L0Exact),
            _ => match s.parse::<f64>() {
                Ok(p) if p >= 1.0 && p.is_finite() => Ok(Norm::Lp(p)),
                _ => Err(Error::InvalidArgument(format!("unsupported norm `{s}`"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub norm: String,
    pub value: f64,
    /// Monte Carlo standard error; `None` for exact enumeration.
    pub stderr: Option<f64>,
    pub threshold: Option<f64>,
    /// Points enumerated or sampled.
    pub points: usize,
    pub exact: bool,
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let t = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / t;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (t - 1.0);
    (mean, var)
}

/// The interpretation error `I_{p,μ}(f, g)`.
///
/// Monte Carlo `L^p` errors carry a delta-method standard error built from
/// the sample variance of `|f - g|^p`.
pub fn interpretation_error<F, G>(f: &F, g: &G, mu: &MeasureSpec, norm: Norm) -> Result<ErrorReport>
where
    F: BooleanFunction + ?Sized,
    G: BooleanFunction + ?Sized,
{
    let n = f.dim();
    Error::check_dim(n, g.dim())?;
    if let Norm::Lp(p) = norm {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("p must be >= 1, got {p}")));
        }
    }
    let points = mu.points(n)?;
    let mut terms = Vec::with_capacity(points.len());
    for x in &points {
        let d = (f.value(x)? - g.value(x)?).abs();
        terms.push(match norm {
            Norm::Lp(p) => d.powf(p),
            Norm::L0Thresholded => f64::from(d >= L0_THRESHOLD),
            Norm::L0Exact => f64::from(d > ZERO_TOL),
        });
    }
    let (mean, var) = mean_and_var(&terms);
    let exact = mu.evaluation == Evaluation::Exact;
    let se_mean = (var / terms.len() as f64).sqrt();
    let (value, stderr) = match norm {
        Norm::Lp(p) => {
            let value = mean.powf(1.0 / p);
            let se = if mean > 0.0 {
                se_mean * mean.powf(1.0 / p - 1.0) / p
            } else {
                0.0
            };
            (value, se)
        }
        _ => (mean, se_mean),
    };
    Ok(ErrorReport {
        norm: norm.label(),
        value,
        stderr: (!exact).then_some(stderr),
        threshold: (norm == Norm::L0Thresholded).then_some(L0_THRESHOLD),
        points: points.len(),
        exact,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GapMode {
    Exact,
    /// One shared batch of uniform samples for every basis function.
    Sampled { samples: usize, seed: u64 },
}

/// The truthful gap `Σ_{S∈C} ⟨f - g, χ_S⟩²`.
///
/// The sampled estimate squares each empirical correlation and subtracts
/// its estimated variance `Var̂/T`, so it is unbiased but may dip below zero.
pub fn truthful_gap<F: BooleanFunction + ?Sized>(
    f: &F,
    g: &SparseSpectrum,
    basis: &BasisFamily,
    mode: GapMode,
) -> Result<f64> {
    let n = f.dim();
    Error::check_dim(n, g.dim())?;
    Error::check_dim(n, basis.dim())?;
    match mode {
        GapMode::Exact => {
            let table = TruthTable::tabulate(f)?;
            let coeffs = table.walsh_hadamard();
            Ok(basis
                .iter()
                .map(|s| {
                    let d = coeffs[s.mask() as usize] - g.get(*s);
                    d * d
                })
                .sum())
        }
        GapMode::Sampled { samples, seed } => {
            if samples < 2 {
                return Err(Error::InvalidArgument("sampled truthful gap needs T >= 2".into()));
            }
            if samples < 10 * basis.len() {
                log::warn!(
                    "truthful gap over {} basis functions from only {samples} samples",
                    basis.len()
                );
            }
            let points = sample_uniform(n, samples, seed)?;
            let mut resid = Vec::with_capacity(samples);
            for x in &points {
                resid.push(f.value(x)? - g.eval_mask(x.mask()));
            }
            let t = samples as f64;
            let mut gap = 0.0;
            let mut prods = vec![0.0; samples];
            for s in basis.iter() {
                for ((p, r), x) in prods.iter_mut().zip(&resid).zip(&points) {
                    *p = r * chi(s.mask(), x.mask());
                }
                let (mean, var) = mean_and_var(&prods);
                gap += mean * mean - var / t;
            }
            Ok(gap)
        }
    }
}

pub fn is_truthful(gap: f64) -> bool {
    gap < TRUTHFUL_TOL
}

/// `D_p(g, h) = (Σ_S |ĝ_S - ĥ_S|^p)^{1/p}`; `p = 0` counts differing coefficients.
pub fn spectrum_distance(g: &SparseSpectrum, h: &SparseSpectrum, p: f64) -> Result<f64> {
    Error::check_dim(g.dim(), h.dim())?;
    let diff = g.minus(h)?;
    if p == 0.0 {
        return Ok(diff.iter().filter(|(_, c)| c.abs() > ZERO_TOL).count() as f64);
    }
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("p must be >= 0, got {p}")));
    }
    if p.is_infinite() {
        return Ok(diff.iter().map(|(_, c)| c.abs()).fold(0.0, f64::max));
    }
    Ok(diff.iter().map(|(_, c)| c.abs().powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Shannon entropy (bits) of `v_i² / Σ v_j²`, with `0 log 0 = 0`.
pub fn squared_entropy(values: &[f64]) -> f64 {
    let total: f64 = values.iter().map(|v| v * v).sum();
    values
        .iter()
        .map(|v| v * v / total)
        .filter(|q| *q > 0.0)
        .map(|q| -q * q.log2())
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub n: usize,
    pub support: usize,
    pub spectral_support: usize,
    /// `|supp f| · |supp f̂| >= 2^n`.
    pub support_product_holds: bool,
    pub entropy: f64,
    pub spectral_entropy: f64,
    /// `H[f] + H[f̂] >= n`.
    pub entropy_sum_holds: bool,
}

impl UncertaintyReport {
    pub fn holds(&self) -> bool {
        self.support_product_holds && self.entropy_sum_holds
    }
}

pub fn uncertainty_report(f: &TruthTable) -> Result<UncertaintyReport> {
    let n = f.dim();
    let (support, spectral_support) = support_sizes(f)?;
    let entropy = squared_entropy(f.values());
    let spectral_entropy = squared_entropy(&f.walsh_hadamard());
    Ok(UncertaintyReport {
        n,
        support,
        spectral_support,
        support_product_holds: support as u128 * spectral_support as u128 >= 1u128 << n,
        entropy,
        spectral_entropy,
        entropy_sum_holds: entropy + spectral_entropy >= n as f64 - ENTROPY_SLACK,
    })
}

/// Exact-mismatch `I₀(f, g)` and `D₀(f̂, ĝ)` from the difference table.
///
/// For `f != g` their product is at least 1.
pub fn mismatch_product(f: &TruthTable, g: &TruthTable) -> Result<(f64, usize)> {
    let diff = f.minus(g)?;
    let (points, spectral) = support_sizes(&diff)?;
    Ok((points as f64 / diff.values().len() as f64, spectral))
}

/// One cell of a metric table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricRow {
    pub method: String,
    pub function: String,
    pub metric: String,
    /// Ball radius, `inf` for the whole cube, empty when not applicable.
    pub radius: String,
    pub p: String,
    pub value: f64,
    pub stderr: Option<f64>,
    #[serde(rename = "T")]
    pub samples: usize,
    pub seed: Option<u64>,
    pub queries: u64,
}

pub const CSV_HEADER: &str = "method,function,metric,radius,p,value,stderr,T,seed,queries";

/// Writes rows as CSV under [`CSV_HEADER`].
pub fn write_csv<W: std::io::Write>(rows: &[MetricRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if rows.is_empty() {
        out.write_record(CSV_HEADER.split(','))
            .map_err(|e| Error::Io(e.into()))?;
    }
    for r in rows {
        out.serialize(r).map_err(|e| Error::Io(e.into()))?;
    }
    out.flush()?;
    Ok(())
}
