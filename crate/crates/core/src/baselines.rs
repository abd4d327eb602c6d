//! Shapley-family attributions by exhaustive enumeration, their global
//! extension to a surrogate, and an unweighted local linear fit.
//!
//! The coalition game of `f` is `v(S) = f(x_S)` where `x_S` retains exactly
//! the features in `S` (`+1`) and removes the rest (`-1`). With the
//! point-mask encoding, `v(S)` is the truth-table entry at index `S`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::cube::{check_dim_supported, subsets_up_to, BooleanFunction, SignedPoint, SparseSpectrum, Subset};
use crate::error::{Error, Result};
use crate::oracle::{sample_neighborhood, NeighborhoodSpec, Oracle, SampleBatch};

/// Largest player count for exact Shapley values.
pub const SHAPLEY_CAP: usize = 25;
/// Largest player count for the interaction indices.
pub const INTERACTION_CAP: usize = 20;

/// A characteristic function over all `2^n` coalitions.
#[derive(Clone, Debug, PartialEq)]
pub struct CoalitionGame {
    n: usize,
    values: Vec<f64>,
}

fn check_players(n: usize, cap: usize, what: &'static str) -> Result<()> {
    if n > cap {
        return Err(Error::EnumerationCap {
            what,
            size: 1u128 << n.min(127),
            cap: 1u128 << cap,
        });
    }
    Ok(())
}

impl CoalitionGame {
    /// `values[S]` is `v(S)` for the coalition with bitmask `S`.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_players(n, SHAPLEY_CAP, "the coalition game")?;
        if values.len() != 1 << n {
            return Err(Error::InvalidArgument(format!(
                "a game on {n} players needs {} values, got {}",
                1u64 << n,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("game values must be finite".into()));
        }
        Ok(Self { n, values })
    }

    /// Queries `f` on every retain/remove pattern.
    pub fn of<F: BooleanFunction + ?Sized>(f: &F) -> Result<Self> {
        let n = f.dim();
        check_players(n, SHAPLEY_CAP, "the coalition game")?;
        let values = (0..1u64 << n)
            .map(|m| f.value(&SignedPoint::from_mask_unchecked(n, m)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, values)
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn v(&self, coalition: Subset) -> f64 {
        self.values[coalition.mask() as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Discrete derivative `δ_S v(T) = Σ_{W⊆S} (-1)^{|S|-|W|} v(T ∪ W)`.
    pub fn derivative(&self, s: Subset, t: Subset) -> f64 {
        let s = s.mask();
        let t = t.mask() & !s;
        let mut sum = 0.0;
        let mut w = s;
        loop {
            let sign = if (s.count_ones() - w.count_ones()).is_multiple_of(2) { 1.0 } else { -1.0 };
            sum += sign * self.values[(t | w) as usize];
            if w == 0 {
                break;
            }
            w = (w - 1) & s;
        }
        sum
    }

    /// The Möbius transform (Harsanyi dividends) `m(S) = δ_S v(∅)`.
    pub fn mobius(&self) -> Vec<f64> {
        let mut m = self.values.clone();
        for i in 0..self.n {
            let bit = 1usize << i;
            for mask in 0..m.len() {
                if mask & bit != 0 {
                    m[mask] -= m[mask ^ bit];
                }
            }
        }
        m
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact Shapley values `φ_i = Σ_{S⊆N∖i} s!(n-s-1)!/n! · [v(S∪i) - v(S)]`.
pub fn shapley_exact(game: &CoalitionGame) -> Result<Vec<f64>> {
    let n = game.n;
    check_players(n, SHAPLEY_CAP, "exact Shapley enumeration")?;
    if n == 0 {
        return Ok(Vec::new());
    }
    // s!(n-s-1)!/n! = 1 / (n · C(n-1, s))
    let weights: Vec<f64> = (0..n).map(|s| 1.0 / (n as f64 * binomial(n - 1, s))).collect();
    let mut phi = vec![0.0; n];
    for (mask, &vs) in game.values.iter().enumerate() {
        let s = mask.count_ones() as usize;
        if s == n {
            continue;
        }
        let w = weights[s];
        for (i, p) in phi.iter_mut().enumerate() {
            if mask & (1 << i) == 0 {
                *p += w * (game.values[mask | 1 << i] - vs);
            }
        }
    }
    Ok(phi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndexKind {
    Shapley,
    Interaction,
    Taylor,
}

impl IndexKind {
    pub fn tag(self) -> &'static str {
        match self {
            IndexKind::Shapley => "shapley",
            IndexKind::Interaction => "interaction",
            IndexKind::Taylor => "taylor",
        }
    }
}

impl FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [IndexKind::Shapley, IndexKind::Interaction, IndexKind::Taylor]
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown index kind `{s}`")))
    }
}

/// Index values on every nonempty subset of size at most `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionIndex {
    pub n: usize,
    pub order: usize,
    pub kind: IndexKind,
    pub values: BTreeMap<Subset, f64>,
}

impl InteractionIndex {
    pub fn get(&self, s: Subset) -> f64 {
        self.values.get(&s).copied().unwrap_or(0.0)
    }

    /// Sum over all stored subsets; generalized efficiency makes this `v(N) - v(∅)`.
    pub fn total(&self) -> f64 {
        self.values.values().sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("kind={} order={} n={}\n", self.kind.tag(), self.order, self.n);
        for (s, v) in &self.values {
            let _ = writeln!(out, "S={s} value={v:?}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (no, header) = lines.next().ok_or_else(|| Error::parse(0, "empty index record"))?;
        let (mut kind, mut order, mut n) = (None, None, None);
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("kind", v)) => kind = Some(v.parse::<IndexKind>().map_err(|e| Error::parse(no, e.to_string()))?),
                Some(("order", v)) => order = v.parse::<usize>().ok(),
                Some(("n", v)) => n = v.parse::<usize>().ok(),
                _ => return Err(Error::parse(no, format!("bad header field `{field}`"))),
            }
        }
        let (Some(kind), Some(order), Some(n)) = (kind, order, n) else {
            return Err(Error::parse(no, "header needs kind=, order= and n="));
        };
        check_dim_supported(n).map_err(|e| Error::parse(no, e.to_string()))?;
        let mut values = BTreeMap::new();
        for (no, line) in lines {
            let (s, v) = line
                .strip_prefix("S=")
                .and_then(|r| r.split_once(" value="))
                .ok_or_else(|| Error::parse(no, "expected `S=<indices> value=<float>`"))?;
            let s: Subset = s.parse().map_err(|e: Error| Error::parse(no, e.to_string()))?;
            if !s.fits(n) || s.is_empty() || s.len() > order {
                return Err(Error::parse(no, format!("subset {{{s}}} outside the index")));
            }
            let v: f64 = v.parse().map_err(|_| Error::parse(no, format!("bad value `{v}`")))?;
            values.insert(s, v);
        }
        Ok(Self { n, order, kind, values })
    }
}

impl fmt::Display for InteractionIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn check_order(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("order must be in 1..={n}, got {k}")));
    }
    Ok(())
}

/// Shapley values as an order-1 index.
pub fn shapley_index(game: &CoalitionGame) -> Result<InteractionIndex> {
    let phi = shapley_exact(game)?;
    Ok(InteractionIndex {
        n: game.n,
        order: 1,
        kind: IndexKind::Shapley,
        values: phi.into_iter().enumerate().map(|(i, p)| (Subset::singleton(i), p)).collect(),
    })
}

/// The Shapley-Taylor index of order `k`.
///
/// Below the top order the value is the discrete derivative at the empty
/// coalition; at `|S| = k` it is `(k/n) Σ_{T⊆N∖S} δ_S v(T) / C(n-1, |T|)`.
pub fn shapley_taylor(game: &CoalitionGame, k: usize) -> Result<InteractionIndex> {
    let n = game.n;
    check_players(n, INTERACTION_CAP, "Shapley-Taylor enumeration")?;
    check_order(n, k)?;
    let full = (1u64 << n) - 1;
    let weights: Vec<f64> = (0..n).map(|t| k as f64 / n as f64 / binomial(n - 1, t)).collect();
    let mut values = BTreeMap::new();
    for s in subsets_up_to(n, k).into_iter().filter(|s| !s.is_empty()) {
        let value = if s.len() < k {
            game.derivative(s, Subset::EMPTY)
        } else {
            let rest = full & !s.mask();
            let mut sum = 0.0;
            let mut t = rest;
            loop {
                sum += weights[t.count_ones() as usize] * game.derivative(s, Subset::from_mask(t));
                if t == 0 {
                    break;
                }
                t = (t - 1) & rest;
            }
            sum
        };
        values.insert(s, value);
    }
    Ok(InteractionIndex {
        n,
        order: k,
        kind: IndexKind::Taylor,
        values,
    })
}

/// The Shapley interaction index on every nonempty `S` with `|S| <= k`:
/// `Σ_{T⊆N∖S} (n-t-s)! t! / (n-s+1)! · δ_S v(T)`.
pub fn shapley_interaction(game: &CoalitionGame, k: usize) -> Result<InteractionIndex> {
    let n = game.n;
    check_players(n, INTERACTION_CAP, "Shapley interaction enumeration")?;
    check_order(n, k)?;
    let full = (1u64 << n) - 1;
    let mut values = BTreeMap::new();
    for s in subsets_up_to(n, k).into_iter().filter(|s| !s.is_empty()) {
        let m = n - s.len();
        // (m-t)! t! / (m+1)! = 1 / ((m+1) C(m, t))
        let weights: Vec<f64> = (0..=m).map(|t| 1.0 / ((m + 1) as f64 * binomial(m, t))).collect();
        let rest = full & !s.mask();
        let mut sum = 0.0;
        let mut t = rest;
        loop {
            sum += weights[t.count_ones() as usize] * game.derivative(s, Subset::from_mask(t));
            if t == 0 {
                break;
            }
            t = (t - 1) & rest;
        }
        values.insert(s, sum);
    }
    Ok(InteractionIndex {
        n,
        order: k,
        kind: IndexKind::Interaction,
        values,
    })
}

/// `g(x) = v(∅) + Σ I_S` over the index subsets whose members are all retained in `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalExtension {
    pub index: InteractionIndex,
    pub v_empty: f64,
}

impl GlobalExtension {
    pub fn new(index: InteractionIndex, v_empty: f64) -> Self {
        Self { index, v_empty }
    }

    pub fn of_game(index: InteractionIndex, game: &CoalitionGame) -> Self {
        Self::new(index, game.v(Subset::EMPTY))
    }

    pub(crate) fn eval_mask(&self, retained: u64) -> f64 {
        self.v_empty
            + self
                .index
                .values
                .iter()
                .filter(|(s, _)| s.mask() & !retained == 0)
                .map(|(_, v)| v)
                .sum::<f64>()
    }
}

impl BooleanFunction for GlobalExtension {
    fn dim(&self) -> usize {
        self.index.n
    }

    fn value(&self, x: &SignedPoint) -> Result<f64> {
        Error::check_dim(self.index.n, x.dim())?;
        Ok(self.eval_mask(x.mask()))
    }
}

/// Ordinary least squares over `{∅} ∪ singletons` on `t` neighborhood samples.
pub fn linear_fit_baseline(f: &Oracle, spec: &NeighborhoodSpec, t: usize, seed: u64) -> Result<SparseSpectrum> {
    Error::check_dim(f.dim(), spec.dim())?;
    if t < f.dim() + 1 {
        return Err(Error::InvalidArgument(format!(
            "a linear fit on {} features needs T >= {}, got {t}",
            f.dim(),
            f.dim() + 1
        )));
    }
    let points = sample_neighborhood(spec, t, seed)?;
    let batch = SampleBatch::evaluate(f, points, Some(seed))?;
    linear_fit_on(&batch)
}

/// OLS on the degree-1 basis for an evaluated batch.
pub fn linear_fit_on(batch: &SampleBatch) -> Result<SparseSpectrum> {
    let first = batch
        .points
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty sample batch".into()))?;
    let n = first.dim();
    let rows = batch.len();
    let x = DMatrix::from_fn(rows, n + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            batch.points[i].sign(j - 1) as f64
        }
    });
    let y = DVector::from_column_slice(&batch.values);
    let svd = x.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-10;
    let rank = svd.rank(eps);
    if rank < n + 1 {
        return Err(Error::RankDeficient(format!(
            "linear design on {rows} samples has rank {rank} < {}",
            n + 1
        )));
    }
    let beta = svd.solve(&y, eps).map_err(|e| Error::RankDeficient(e.to_string()))?;
    SparseSpectrum::from_terms(
        n,
        std::iter::once((Subset::EMPTY, beta[0])).chain((0..n).map(|i| (Subset::singleton(i), beta[i + 1]))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{fourier_transform_exact, TruthTable};
    use crate::reference;

    fn game_of(g: &SparseSpectrum) -> CoalitionGame {
        CoalitionGame::of(g).unwrap()
    }

    #[test]
    fn shapley_of_linear_is_twice_coefficients() {
        let phi = shapley_exact(&game_of(&reference::f1())).unwrap();
        let want = [1.0, -2.0 / 3.0, 0.5];
        for (p, w) in phi.iter().zip(want) {
            assert!((p - w).abs() < 1e-12);
        }
    }

    #[test]
    fn efficiency_on_f3() {
        let game = game_of(&reference::f3());
        let phi = shapley_exact(&game).unwrap();
        let total: f64 = phi.iter().sum();
        assert!((total - 1.083).abs() < 0.002);
        let exact = game.v(Subset::from_mask(7)) - game.v(Subset::EMPTY);
        assert!((total - exact).abs() < 1e-12);
    }

    #[test]
    fn dummy_player_gets_zero() {
        let g = SparseSpectrum::from_terms(4, [(Subset::new(&[0, 2]).unwrap(), 1.5), (Subset::singleton(1), -0.5)]).unwrap();
        let phi = shapley_exact(&game_of(&g)).unwrap();
        assert_eq!(phi[3], 0.0);
    }

    #[test]
    fn mobius_matches_derivative_at_empty() {
        let game = game_of(&reference::f3());
        let m = game.mobius();
        for mask in 0..8u64 {
            assert!((m[mask as usize] - game.derivative(Subset::from_mask(mask), Subset::EMPTY)).abs() < 1e-12);
        }
    }

    #[test]
    fn taylor_order2_extension_reproduces_f2() {
        let game = game_of(&reference::f2());
        let idx = shapley_taylor(&game, 2).unwrap();
        let g = GlobalExtension::of_game(idx, &game);
        let f2 = reference::f2();
        for m in 0..8u64 {
            let x = SignedPoint::from_mask(3, m).unwrap();
            assert!((g.value(&x).unwrap() - f2.value(&x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn taylor_top_order_matches_mobius_oracle() {
        // top-order Shapley-Taylor = Σ_{U⊇S} m(U) / C(|U|, k)
        let g = crate::synthetic::random_sparse(6, 4, 12, 0.1, 1.0, 17).unwrap();
        let game = game_of(&g);
        let m = game.mobius();
        let k = 2;
        let idx = shapley_taylor(&game, k).unwrap();
        for (s, v) in &idx.values {
            if s.len() < k {
                assert!((v - m[s.mask() as usize]).abs() < 1e-12);
                continue;
            }
            let want: f64 = (0..64u64)
                .filter(|u| u & s.mask() == s.mask())
                .map(|u| m[u as usize] / binomial(u.count_ones() as usize, k))
                .sum();
            assert!((v - want).abs() < 1e-10, "{s:?}: {v} vs {want}");
        }
    }

    #[test]
    fn interaction_matches_mobius_oracle() {
        // Shapley interaction = Σ_{U⊇S} m(U) / (|U| - |S| + 1)
        let g = crate::synthetic::random_sparse(5, 3, 10, 0.1, 1.0, 23).unwrap();
        let game = game_of(&g);
        let m = game.mobius();
        let idx = shapley_interaction(&game, 3).unwrap();
        for (s, v) in &idx.values {
            let want: f64 = (0..32u64)
                .filter(|u| u & s.mask() == s.mask())
                .map(|u| m[u as usize] / (u.count_ones() as usize - s.len() + 1) as f64)
                .sum();
            assert!((v - want).abs() < 1e-10);
        }
        let phi = shapley_exact(&game).unwrap();
        for (i, p) in phi.iter().enumerate() {
            assert!((idx.get(Subset::singleton(i)) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_game_has_no_pair_interactions() {
        let idx = shapley_interaction(&game_of(&reference::f1()), 2).unwrap();
        for (s, v) in &idx.values {
            if s.len() == 2 {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn f2_interaction_extension_at_full_input() {
        // f2 has no third-order dividend, so every pair index is its dividend
        // and the extension at the full input is v(N) + Σ_{pairs} m.
        let game = game_of(&reference::f2());
        let g = GlobalExtension::of_game(shapley_interaction(&game, 2).unwrap(), &game);
        let got = g.value(&SignedPoint::all_retained(3)).unwrap();
        let m = game.mobius();
        let want = game.v(Subset::from_mask(7)) + m[3] + m[5] + m[6];
        assert!((got - want).abs() < 1e-12);
        assert!((got + 0.465).abs() < 1e-3);
    }

    #[test]
    fn order_validation_and_caps() {
        let game = game_of(&reference::f1());
        assert!(shapley_taylor(&game, 0).is_err());
        assert!(shapley_taylor(&game, 4).is_err());
        assert!(shapley_interaction(&game, 4).is_err());
        assert!(CoalitionGame::new(3, vec![0.0; 7]).is_err());
        assert!(CoalitionGame::new(26, vec![]).is_err());
    }

    #[test]
    fn extension_endpoints() {
        let game = game_of(&reference::f3());
        let g = GlobalExtension::of_game(shapley_index(&game).unwrap(), &game);
        assert_eq!(g.value(&SignedPoint::all_removed(3)).unwrap(), game.v(Subset::EMPTY));
        let full = g.value(&SignedPoint::all_retained(3)).unwrap();
        assert!((full - game.v(Subset::from_mask(7))).abs() < 1e-12);
    }

    #[test]
    fn index_text_round_trip() {
        let idx = shapley_taylor(&game_of(&reference::f3()), 2).unwrap();
        let back = InteractionIndex::from_text(&idx.to_text()).unwrap();
        assert_eq!(back, idx);
        assert!(InteractionIndex::from_text("kind=odd order=1 n=2\n").is_err());
    }

    #[test]
    fn linear_fit_projects_onto_degree_one() {
        let f2 = reference::f2();
        let table = TruthTable::from_spectrum(&f2).unwrap();
        let f = Oracle::table(table);
        let batch = crate::explain::full_cube_batch(&f).unwrap();
        let fit = linear_fit_on(&batch).unwrap();
        let exact = fourier_transform_exact(&f2, 3).unwrap();
        for i in 0..3 {
            let s = Subset::singleton(i);
            assert!((fit.get(s) - exact.get(s)).abs() < 1e-10);
        }
        assert!(fit.get(Subset::EMPTY).abs() < 1e-10);

        let spec = NeighborhoodSpec::around_full_input(3, 3).unwrap();
        let lin = Oracle::polynomial(reference::f1());
        let fit = linear_fit_baseline(&lin, &spec, 40, 2).unwrap();
        for (s, c) in reference::f1().iter() {
            assert!((fit.get(s) - c).abs() < 1e-8);
        }
        assert!(linear_fit_baseline(&lin, &spec, 3, 2).is_err());
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let f = Oracle::polynomial(reference::f1());
        let x = SignedPoint::all_retained(3);
        let batch = SampleBatch::evaluate(&f, vec![x; 6], None).unwrap();
        assert!(matches!(linear_fit_on(&batch), Err(Error::RankDeficient(_))));
    }
}
