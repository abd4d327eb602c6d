//! Hand-derived and published values checked through the public API.

use spectral_xai::baselines::{linear_fit_baseline, shapley_interaction, CoalitionGame};
use spectral_xai::cube::{
    fourier_transform_exact, inner_product_exact, support_sizes, BasisFamily, BooleanFunction, SignedPoint,
    SparseSpectrum, Subset, TruthTable,
};
use spectral_xai::experiment::{cmd_bench_samples, ExperimentConfig};
use spectral_xai::explain::{
    draw_anchors, harmonica, harmonica_anchor_constrained_on, harmonica_anchor_on, harmonica_local_on, harmonica_on,
    inconsistency, low_degree, Explanation, ExplanationMeta, Method,
};
use spectral_xai::metrics::{interpretation_error, truthful_gap, GapMode, MeasureSpec, Norm};
use spectral_xai::oracle::{
    enumerate_neighborhood, sample_neighborhood, sample_uniform, NeighborhoodSpec, Oracle, SampleBatch,
};
use spectral_xai::reference;
use spectral_xai::solver::{solve_joint, solve_lasso, DesignProblem, JointConfig, JointInit, LassoConfig};
use spectral_xai::synthetic::random_sparse;
use spectral_xai::Error;

use statrs::distribution::{ChiSquared, ContinuousCDF};

fn cube(n: usize) -> Vec<SignedPoint> {
    (0..1u64 << n).map(|m| SignedPoint::from_mask(n, m).unwrap()).collect()
}

fn s(ix: &[usize]) -> Subset {
    Subset::new(ix).unwrap()
}

#[test]
fn f2_correlation_with_pair_character() {
    let chi01 = SparseSpectrum::from_terms(3, [(s(&[0, 1]), 1.0)]).unwrap();
    let v = inner_product_exact(&reference::f2(), &chi01, 3).unwrap();
    assert!((v + 0.2).abs() < 1e-15);
}

#[test]
fn f3_transform_has_its_seven_coefficients() {
    let g = fourier_transform_exact(&reference::f3(), 3).unwrap();
    let want = [
        (s(&[0]), 0.5),
        (s(&[1]), -1.0 / 3.0),
        (s(&[2]), 0.25),
        (s(&[0, 1]), -0.2),
        (s(&[0, 2]), 1.0 / 6.0),
        (s(&[1, 2]), -1.0 / 7.0),
        (s(&[0, 1, 2]), 0.125),
    ];
    assert_eq!(g.len(), 7);
    for (sub, c) in want {
        assert!((g.get(sub) - c).abs() < 1e-15, "{sub}");
    }
}

#[test]
fn f2_supports() {
    let t = TruthTable::from_spectrum(&reference::f2()).unwrap();
    assert_eq!(support_sizes(&t).unwrap(), (8, 6));
}

#[test]
fn ball_of_full_radius_is_uniform_cube() {
    let n = 4;
    let spec = NeighborhoodSpec::around_full_input(n, n).unwrap();
    let t = 50_000;
    let mut counts = [0usize; 16];
    for x in sample_neighborhood(&spec, t, 41).unwrap() {
        counts[x.mask() as usize] += 1;
    }
    let expected = t as f64 / 16.0;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new(15.0).unwrap().cdf(stat);
    assert!(p > 1e-3, "chi-square {stat}, p = {p}");
}

#[test]
fn ball_sizes() {
    let count = |n, r| enumerate_neighborhood(&NeighborhoodSpec::around_full_input(n, r).unwrap()).unwrap().len();
    assert_eq!(count(3, 1), 4);
    assert_eq!(count(5, 2), 16);
    assert_eq!(count(3, 3), 8);
}

fn random_problem(n: usize, degree: usize, t: usize, seed: u64) -> DesignProblem {
    // a degree-3 target so the degree-2 fit leaves a residual
    let f = random_sparse(n, 3, 8, 0.1, 1.0, seed).unwrap();
    let points = sample_uniform(n, t, seed + 1).unwrap();
    let y: Vec<f64> = points.iter().map(|x| f.value(x).unwrap()).collect();
    DesignProblem::new(BasisFamily::up_to_degree(n, degree).unwrap(), &points, y).unwrap()
}

#[test]
fn joint_without_penalties_reaches_least_squares() {
    let problem = random_problem(6, 2, 300, 5);
    let ols = solve_lasso(&problem, &LassoConfig::new(0.0)).unwrap().into_converged().unwrap();
    let t = problem.rows() as f64;
    let ols_fit: f64 = problem.residuals(&ols).iter().map(|r| r * r).sum::<f64>() / t;
    let cfg = JointConfig {
        lambda1: 0.0,
        lambda2: 0.0,
        eta: 0.2,
        epochs: 3000,
    };
    let init = JointInit::Uniform {
        seed: 6,
        half_width: 0.01,
    };
    let out = solve_joint(&vec![0; problem.rows()], 1, &problem, &cfg, &init).unwrap();
    assert_eq!(out.trajectory.len(), cfg.epochs + 1);
    let last = out.trajectory.last().unwrap();
    assert!((last.fit - ols_fit).abs() < 1e-4, "{} vs {ols_fit}", last.fit);
    assert!(last.fit >= ols_fit - 1e-12);
}

/// f = x_0 x_1 restricted to the halves x_1 = +1 and x_1 = -1.
fn two_regime_problem() -> (DesignProblem, Vec<usize>) {
    let n = 4;
    let points = cube(n);
    let y: Vec<f64> = points.iter().map(|x| (x.sign(0) * x.sign(1)) as f64).collect();
    let assign = points.iter().map(|x| usize::from(x.sign(1) < 0)).collect();
    (DesignProblem::new(BasisFamily::up_to_degree(n, 1).unwrap(), &points, y).unwrap(), assign)
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn consensus_penalty_ties_anchor_models() {
    let (problem, assign) = two_regime_problem();
    let run = |lambda2| {
        let cfg = JointConfig {
            lambda1: 0.0,
            lambda2,
            eta: 1e-6,
            epochs: 200_000,
        };
        let out = solve_joint(&assign, 2, &problem, &cfg, &JointInit::Zero).unwrap();
        l2(&out.coefficients[0], &out.coefficients[1])
    };
    let tied = run(1e3);
    let free = run(0.0);
    assert!(tied < 1e-2, "{tied}");
    assert!(free > 10.0 * tied, "{free} vs {tied}");
}

#[test]
fn decoupled_joint_matches_per_anchor_lasso() {
    let n = 6;
    let k = 2;
    let t = 400;
    let target = random_sparse(n, 2, 6, 0.2, 1.0, 31).unwrap();
    let f = Oracle::polynomial(target);
    let basis = BasisFamily::up_to_degree(n, 2).unwrap();
    let batch = SampleBatch::evaluate(&f, sample_uniform(n, t, 32).unwrap(), Some(32)).unwrap();
    let anchors = draw_anchors(n, k, 33).unwrap();
    let lambda1 = 0.01;
    // (1/T)Σr² + (λ₁/k)|α|₁ per anchor is Σr² + (Tλ₁/k)|α|₁ up to scale
    let lasso = harmonica_anchor_on(
        &batch,
        anchors.clone(),
        &basis,
        &LassoConfig::new(t as f64 * lambda1 / k as f64),
    )
    .unwrap();
    let cfg = JointConfig {
        lambda1,
        lambda2: 0.0,
        eta: 0.1,
        epochs: 20_000,
    };
    let init = JointInit::Uniform {
        seed: 34,
        half_width: 0.01,
    };
    let joint = harmonica_anchor_constrained_on(&batch, anchors, &basis, &cfg, &init).unwrap();
    for a in 0..k {
        let d = lasso.spectra[a].to_dense(&basis);
        let j = joint.spectra[a].to_dense(&basis);
        let worst = d.iter().zip(&j).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-3, "anchor {a}: {worst}");
    }
}

#[test]
fn harmonica_recovers_f2_and_f3() {
    for (g, d) in [(reference::f2(), 2), (reference::f3(), 3)] {
        let f = Oracle::polynomial(g.clone());
        let basis = BasisFamily::up_to_degree(3, d).unwrap();
        let e = harmonica(&f, &basis, 64, 1e-6, 7).unwrap();
        for (sub, c) in g.iter() {
            assert!((e.spectrum().get(sub) - c).abs() < 1e-6, "{sub}");
        }
        for x in cube(3) {
            assert!((e.value(&x).unwrap() - g.value(&x).unwrap()).abs() < 1e-3);
        }
    }
}

#[test]
fn degree_two_fit_of_f3_misses_exactly_the_top_coefficient() {
    let f3 = reference::f3();
    let f = Oracle::polynomial(f3);
    let e = harmonica_on(
        &spectral_xai::explain::full_cube_batch(&f).unwrap(),
        &BasisFamily::up_to_degree(3, 2).unwrap(),
        &LassoConfig::new(0.0),
    )
    .unwrap();
    let gap = truthful_gap(&f, e.spectrum(), &BasisFamily::up_to_degree(3, 3).unwrap(), GapMode::Exact).unwrap();
    assert!((gap - 0.015625).abs() < 1e-12);
}

#[test]
fn local_fit_of_f2_on_radius_one() {
    let f2 = reference::f2();
    let f = Oracle::polynomial(f2.clone());
    let spec = NeighborhoodSpec::around_full_input(3, 1).unwrap();
    let basis = BasisFamily::up_to_degree(3, 2).unwrap();
    let batch = SampleBatch::evaluate(&f, sample_neighborhood(&spec, 64, 8).unwrap(), Some(8)).unwrap();
    // four distinct rows for seven columns: only the L1 term moves the
    // coefficients along the null space, about λ/2T per sweep
    let cfg = LassoConfig::new(1e-6);
    let explained = harmonica_local_on(&batch, &spec, &basis, &cfg);
    assert!(matches!(explained, Err(Error::NotConverged { .. })));
    let problem = DesignProblem::new(basis.clone(), &batch.points, batch.values.clone()).unwrap();
    let flagged = solve_lasso(&problem, &cfg).unwrap();
    assert!(!flagged.converged);
    let e = SparseSpectrum::from_dense(&basis, &flagged.coefficients).unwrap();
    let err = interpretation_error(&f2, &e, &MeasureSpec::ball_exact(spec), Norm::Lp(2.0)).unwrap();
    assert!(err.value <= 1e-6, "{}", err.value);
}

#[test]
fn local_fit_on_full_radius_equals_harmonica() {
    let f = Oracle::polynomial(reference::f2());
    let basis = BasisFamily::up_to_degree(3, 2).unwrap();
    let spec = NeighborhoodSpec::around_full_input(3, 3).unwrap();
    let batch = SampleBatch::evaluate(&f, sample_uniform(3, 64, 9).unwrap(), Some(9)).unwrap();
    let cfg = LassoConfig::new(1e-3);
    let local = harmonica_local_on(&batch, &spec, &basis, &cfg).unwrap();
    let global = harmonica_on(&batch, &basis, &cfg).unwrap();
    assert_eq!(local.spectra, global.spectra);
}

#[test]
fn low_degree_estimates_f1() {
    let f = Oracle::polynomial(reference::f1());
    let e = low_degree(&f, &BasisFamily::up_to_degree(3, 1).unwrap(), 100_000, 10).unwrap();
    for (sub, c) in [(s(&[0]), 0.5), (s(&[1]), -1.0 / 3.0), (s(&[2]), 0.25)] {
        assert!((e.spectrum().get(sub) - c).abs() < 0.02, "{sub}");
    }
    assert!(e.spectrum().get(Subset::EMPTY).abs() < 0.02);
}

#[test]
fn low_degree_of_zero_is_zero() {
    let f = Oracle::polynomial(SparseSpectrum::zero(4));
    let e = low_degree(&f, &BasisFamily::up_to_degree(4, 2).unwrap(), 50, 1).unwrap();
    assert!(e.spectrum().is_empty());
}

#[test]
fn inconsistency_of_nine_anchors() {
    let anchors: Vec<SignedPoint> = (0..9).map(|m| SignedPoint::from_mask(4, m).unwrap()).collect();
    let spectra = vec![SparseSpectrum::zero(4); 9];
    let e = Explanation::new(
        Method::HarmonicaAnchor,
        BasisFamily::up_to_degree(4, 1).unwrap(),
        anchors,
        spectra,
        ExplanationMeta::default(),
    )
    .unwrap();
    assert!((inconsistency(&e) - 9f64.log2()).abs() < 1e-15);
    assert!((inconsistency(&e) - 3.1699).abs() < 1e-4);
}

#[test]
fn swapping_interchangeable_players_swaps_interaction_values() {
    let n = 4;
    let values: Vec<f64> = (0..16).map(|m| ((m * 7 + 3) % 11) as f64 / 5.0).collect();
    let swap = |m: usize| (m & !0b11) | ((m & 1) << 1) | ((m >> 1) & 1);
    let swapped: Vec<f64> = (0..16).map(|m| values[swap(m)]).collect();
    let a = shapley_interaction(&CoalitionGame::new(n, values).unwrap(), 2).unwrap();
    let b = shapley_interaction(&CoalitionGame::new(n, swapped).unwrap(), 2).unwrap();
    for mask in 1..16u64 {
        let sub = Subset::from_mask(mask);
        if sub.len() > 2 {
            continue;
        }
        let image = Subset::from_mask(swap(mask as usize) as u64);
        assert!((a.get(sub) - b.get(image)).abs() < 1e-12, "{sub}");
    }
}

#[test]
fn linear_baseline_on_linear_and_constant_functions() {
    let spec = NeighborhoodSpec::around_full_input(3, 3).unwrap();
    let fit = linear_fit_baseline(&Oracle::polynomial(reference::f1()), &spec, 64, 11).unwrap();
    for (sub, c) in reference::f1().iter() {
        assert!((fit.get(sub) - c).abs() < 1e-8);
    }
    assert!(fit.get(Subset::EMPTY).abs() < 1e-8);

    let constant = SparseSpectrum::from_terms(5, [(Subset::EMPTY, 2.5)]).unwrap();
    let spec5 = NeighborhoodSpec::around_full_input(5, 5).unwrap();
    let fit = linear_fit_baseline(&Oracle::polynomial(constant), &spec5, 64, 12).unwrap();
    assert!((fit.get(Subset::EMPTY) - 2.5).abs() < 1e-10);
    for i in 0..5 {
        assert!(fit.get(Subset::singleton(i)).abs() < 1e-10);
    }
}

#[test]
fn thresholded_l0_against_enumeration() {
    let f2 = reference::f2();
    let trunc = f2.restricted_to(&BasisFamily::up_to_degree(3, 1).unwrap());
    let by_hand = cube(3)
        .iter()
        .filter(|x| (f2.value(x).unwrap() - trunc.value(x).unwrap()).abs() >= 0.1)
        .count() as f64
        / 8.0;
    let r = interpretation_error(&f2, &trunc, &MeasureSpec::cube_exact(), Norm::L0Thresholded).unwrap();
    assert_eq!(r.value, by_hand);
}

#[test]
fn low_degree_error_does_not_grow_with_samples() {
    let cfg = ExperimentConfig::from_toml(
        "seed = 13\n[bench]\nn = 10\ndegree = 2\nsparsity = 5\nsamples = [250, 500, 1000, 2000]\nrepetitions = 20\n",
    )
    .unwrap();
    let rows = cmd_bench_samples(&cfg).unwrap().rows;
    let low: Vec<_> = rows.iter().filter(|r| r.method == "low-degree").collect();
    assert_eq!(low.len(), 4);
    for w in low.windows(2) {
        assert!(
            w[1].mean_distance <= w[0].mean_distance + w[0].stderr,
            "T={} {} > T={} {}",
            w[1].samples,
            w[1].mean_distance,
            w[0].samples,
            w[0].mean_distance
        );
    }
}
