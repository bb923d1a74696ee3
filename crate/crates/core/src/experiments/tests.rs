use super::consistency::log_slope;
use super::*;
use crate::dynamics::{run_trajectory, Scheme, SolverConfig};
use crate::model::LesModel;
use crate::noise::{make_shell_coefficients, BrownianDriver, NoiseCoefficients};
use crate::spectral::{sobolev_norm, GridSpec, Mode, Spectral};
use crate::testing::band_limited;

fn grid() -> GridSpec {
    GridSpec::with_n(32).unwrap()
}

fn small(scheme: Scheme, horizon: f64) -> SolverConfig {
    let mut cfg = SolverConfig::deterministic(grid(), 0.01, 1e-3, horizon, LesModel::smagorinsky(0.05));
    cfg.record_stride = 5;
    if scheme.is_stochastic() {
        cfg.scheme = scheme;
        cfg.noise = Some(make_shell_coefficients(2, &grid()).unwrap());
    }
    cfg
}

fn omega0() -> crate::spectral::SpectralField {
    band_limited(&Spectral::new(grid()), 4, 2).scaled(0.5)
}

#[test]
fn mean_std_examples() {
    assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
    let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(m, 2.5);
    assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert!(mean_std(&[]).0.is_nan());
}

#[test]
fn log_slope_recovers_power_laws() {
    let pts = [1e-3, 2e-3, 4e-3].map(|x: f64| (x, 3.0 * x.powf(0.5)));
    assert!((log_slope(pts.into_iter()).unwrap() - 0.5).abs() < 1e-12);
    assert!(log_slope([(1.0, 1.0), (1.0, 2.0)].into_iter()).is_none());
    assert!(log_slope([(1.0, 0.0), (2.0, 2.0)].into_iter()).is_none());
}

#[test]
fn first_two_shells() {
    let modes = first_shells(2);
    assert_eq!(modes.len(), 8);
    assert!(modes[..4].iter().all(|l| l.norm_sq() == 1));
    assert!(modes[4..].iter().all(|l| l.norm_sq() == 2));
    // |l|² = 3 is not a sum of two squares
    assert!(first_shells(3)[8..].iter().all(|l| l.norm_sq() == 4));
}

#[test]
fn increment_statistic_by_hand() {
    let times = [0.0, 0.5, 1.0];
    let modes = [Mode::new(1, 0), Mode::new(1, 1)];
    // samples[path][time][mode]
    let samples = vec![
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 4.0]],
        vec![vec![0.0, 0.0], vec![-1.0, 0.0], vec![-1.0, 0.0]],
    ];
    let stat = increment_statistic(&times, &modes, &samples).unwrap();
    // mode (1,0) over [0, 0.5]: E = 1, weight 1 · 0.5 → 2
    // mode (1,1) over [0.5, 1]: E = 8, weight 4 · 0.5 → 4
    assert_eq!(stat.value, 4.0);
    assert_eq!(stat.mode, Mode::new(1, 1));
    assert_eq!((stat.s, stat.t), (0.5, 1.0));
    assert!(increment_statistic(&times, &modes, &[]).is_none());
}

fn scaling_spec(shells: Vec<u32>) -> ScalingStudySpec {
    ScalingStudySpec {
        base: small(Scheme::ItoEm, 0.02),
        shells,
        paths_per_shell: 3,
        delta: 1.0,
        reference: None,
        master_seed: 11,
        self_check: true,
    }
}

#[test]
fn scaling_study_is_reproducible_and_path_exact() {
    let spec = scaling_spec(vec![1, 2]);
    let w0 = omega0();
    let a = scaling_study(&spec, &w0).unwrap();
    let b = scaling_study(&spec, &w0).unwrap();
    assert_eq!(a.rows.len(), 2);
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.status, RowStatus::Ok);
        assert_eq!(x.per_path, y.per_path);
        assert_eq!(x.mean_dist_l2h, y.mean_dist_l2h);
        assert_eq!(x.linf_theta, make_shell_coefficients(x.n, &grid()).unwrap().linf());
    }
    assert!(a.reference_self_check.unwrap() >= 0.0);

    // path 2 of the second shell, recomputed alone
    let theta = make_shell_coefficients(2, &grid()).unwrap();
    let cfg = SolverConfig { noise: Some(theta.clone()), keep_snapshots: true, ..spec.base.clone() };
    let path = run_trajectory(&cfg, &w0, Some(BrownianDriver::new(11, 2, &theta))).unwrap();
    let reference = run_trajectory(&SolverConfig { keep_snapshots: true, ..cfg.deterministic_limit() }, &w0, None).unwrap();
    let sup = path
        .snapshots
        .iter()
        .zip(&reference.snapshots)
        .map(|(x, y)| sobolev_norm(&x.difference(y).unwrap(), -1.0))
        .fold(0.0, f64::max);
    assert_eq!(a.rows[1].per_path[2], sup);
}

#[test]
fn scaling_spec_validation() {
    let bad = |f: &dyn Fn(&mut ScalingStudySpec)| {
        let mut s = scaling_spec(vec![1, 2]);
        f(&mut s);
        match s.validate() {
            Err(ExperimentError::Invalid { key, .. }) => key,
            other => panic!("{other:?}"),
        }
    };
    assert_eq!(bad(&|s| s.shells = vec![2, 1]), "shells");
    assert_eq!(bad(&|s| s.shells.clear()), "shells");
    assert_eq!(bad(&|s| s.paths_per_shell = 0), "paths_per_shell");
    assert_eq!(bad(&|s| s.delta = 0.0), "delta");
    assert_eq!(bad(&|s| s.base = s.base.deterministic_limit()), "base");
    assert_eq!(bad(&|s| s.reference = Some(s.base.deterministic_limit().with_dt(2e-3))), "reference");
    assert!(scaling_spec(vec![1]).validate().is_ok());
}

#[test]
fn scaling_row_aborts_on_unstable_paths() {
    let mut spec = scaling_spec(vec![1]);
    spec.reference = Some(spec.base.deterministic_limit());
    // only the stochastic paths see a model too stiff for the step
    spec.base.model = LesModel::smagorinsky(2.0);
    let table = scaling_study(&spec, &omega0()).unwrap();
    let row = &table.rows[0];
    assert!(matches!(row.status, RowStatus::Aborted { path: 0, .. }), "{:?}", row.status);
    assert!(row.mean_dist_hm.is_nan());
}

#[test]
fn consistency_study_shrinks_with_dt() {
    let cfg = small(Scheme::ItoEm, 0.04);
    let table = scheme_consistency_study(&cfg, &omega0(), &[2e-3, 1e-3, 5e-4], 4, 5).unwrap();
    assert_eq!(table.rows.len(), 3);
    assert!(table.is_monotone(), "{:?}", table.rows);
    assert!(table.order.unwrap() > 0.3, "{:?}", table.order);
    let err = scheme_consistency_study(&cfg, &omega0(), &[3e-3, 2e-3], 2, 5).unwrap_err();
    assert!(matches!(err, ExperimentError::Invalid { key: "dt", .. }));
    let err = scheme_consistency_study(&cfg.deterministic_limit(), &omega0(), &[1e-3], 2, 5).unwrap_err();
    assert!(matches!(err, ExperimentError::Invalid { key: "noise", .. }));
}

#[test]
fn uniqueness_identical_resolutions_agree() {
    let cfg = small(Scheme::Deterministic, 0.02);
    let table = uniqueness_probe(&cfg, &omega0(), &[32, 32]).unwrap();
    assert_eq!(table.distance(32, 32), Some(0.0));
    assert!(table.model_monotone, "{}", table.model_detail);
}

#[test]
fn uniqueness_refinement_is_cauchy() {
    let cfg = small(Scheme::Deterministic, 0.05);
    let table = uniqueness_probe(&cfg, &omega0(), &[24, 32, 48]).unwrap();
    assert_eq!(table.pairs.len(), 3);
    assert!(table.cauchy, "{:?}", table.pairs);
    assert!(uniqueness_probe(&cfg, &omega0(), &[32]).is_err());
    // a band-4 state is lost on an 8-point grid
    assert!(uniqueness_probe(&cfg, &omega0(), &[8, 32]).is_err());
}

#[test]
fn invariant_suite_passes_on_a_healthy_configuration() {
    let cfg = small(Scheme::ItoEm, 0.02);
    let opts = SuiteOptions::default();
    let report = invariant_suite(&cfg, &omega0(), &opts).unwrap();
    for name in ["model_bounds", "trilinear", "flux_dissipativity", "covariance", "enstrophy_channel", "a_priori_bound", "increment_moments"] {
        let c = report.check(name).unwrap_or_else(|| panic!("missing {name}"));
        assert!(c.passed, "{c:?}");
    }
    assert!(report.all_passed);

    let det = invariant_suite(&cfg.deterministic_limit(), &omega0(), &opts).unwrap();
    assert!(det.check("energy_inequality").unwrap().passed);
    assert!(det.check("covariance").is_none());
}

#[test]
fn invariant_suite_flags_non_radial_noise() {
    let cfg = small(Scheme::ItoEm, 0.01);
    let lopsided = NoiseCoefficients::from_entries_unchecked([(Mode::new(1, 0), 0.5f64.sqrt())]).unwrap();
    let opts = SuiteOptions { quadrature: 256, paths: 1, theta_override: Some(lopsided), ..SuiteOptions::default() };
    let report = invariant_suite(&cfg, &omega0(), &opts).unwrap();
    let c = report.check("covariance").unwrap();
    assert!(!c.passed && c.residual > 0.1, "{c:?}");
    assert!(!report.all_passed);
}

#[test]
fn invariant_suite_flags_flipped_corrector() {
    let mut cfg = small(Scheme::ItoEm, 0.5);
    cfg.model = LesModel::smagorinsky(0.1);
    cfg.stability_safety = 1e-6;
    let opts = SuiteOptions { quadrature: 256, paths: 1, corrector_sign: -1.0, ..SuiteOptions::default() };
    let report = invariant_suite(&cfg, &omega0().scaled(0.6), &opts).unwrap();
    assert!(!report.check("a_priori_bound").unwrap().passed);
}
