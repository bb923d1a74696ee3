use smag_core::dynamics::{random_band, Scheme, SolverConfig};
use smag_core::experiments::{scaling_study, scheme_consistency_study, uniqueness_probe, ScalingStudySpec};
use smag_core::model::LesModel;
use smag_core::noise::{make_shell_coefficients, NoiseCoefficients};
use smag_core::spectral::{GridSpec, Mode, Spectral, SpectralField};

fn small_stochastic(model: LesModel) -> SolverConfig {
    let grid = GridSpec::with_n(32).unwrap();
    let mut cfg = SolverConfig::deterministic(grid, 0.01, 1e-3, 0.05, model);
    cfg.scheme = Scheme::ItoEm;
    cfg.noise = Some(make_shell_coefficients(2, &grid).unwrap());
    cfg.record_stride = 5;
    cfg
}

fn small_initial() -> SpectralField {
    random_band(&Spectral::new(GridSpec::with_n(32).unwrap()), 3, 1.0, 8).unwrap()
}

#[test]
fn annulus_sup_weight_is_inverse_root_cardinality() {
    for n in 1..=8i64 {
        let count = (-2 * n..=2 * n)
            .flat_map(|a| (-2 * n..=2 * n).map(move |b| a * a + b * b))
            .filter(|&q| q >= n * n && q <= 4 * n * n)
            .count();
        let theta = NoiseCoefficients::annulus(n as u32).unwrap();
        assert_eq!(theta.entries().count(), count);
        assert!((theta.linf() * (count as f64).sqrt() - 1.0).abs() < 1e-14, "N = {n}");
    }
}

#[test]
fn constant_model_has_no_scheme_discrepancy() {
    let cfg = small_stochastic(LesModel::constant());
    let table = scheme_consistency_study(&cfg, &small_initial(), &[2e-3, 1e-3], 3, 4).unwrap();
    for row in &table.rows {
        assert!(row.mean_sup <= 1e-12, "dt {}: {}", row.dt, row.mean_sup);
    }
}

#[test]
fn heat_flow_is_resolution_independent() {
    let grid = GridSpec::with_n(32).unwrap();
    let cfg = SolverConfig::deterministic(grid, 0.01, 1e-3, 0.1, LesModel::constant());
    let w0 = Spectral::new(grid).field([(Mode::new(2, -1), 1.0)]).unwrap();
    let table = uniqueness_probe(&cfg, &w0, &[32, 48, 64]).unwrap();
    for pair in &table.pairs {
        assert!(pair.distance <= 1e-10, "{pair:?}");
    }
}

#[test]
fn doubling_paths_moves_the_mean_by_less_than_two_standard_errors() {
    let spec = |paths| ScalingStudySpec {
        base: small_stochastic(LesModel::smagorinsky(0.05)),
        shells: vec![2],
        paths_per_shell: paths,
        delta: 1.0,
        reference: None,
        master_seed: 31,
        self_check: false,
    };
    let w0 = small_initial();
    let few = scaling_study(&spec(8), &w0).unwrap();
    let many = scaling_study(&spec(16), &w0).unwrap();
    let (a, b) = (&few.rows[0], &many.rows[0]);
    assert_eq!(a.per_path[..], b.per_path[..8]);
    assert!((a.mean_dist_hm - b.mean_dist_hm).abs() < 2.0 * b.standard_error(), "{a:?} vs {b:?}");
}
