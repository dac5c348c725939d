use vdsim_core::noise::{NoiseKind, NoiseModel};
use vdsim_core::qaoa::{erdos_renyi, optimize, NelderMeadOptions, Objective, ALPHA_MAX, BETA_MAX, GRID_POINTS};
use vdsim_core::seed::{derive_seed, stream_rng, GRAPH_STREAM};

// Cold starts at a noisy level run the full 100×100 grid on the noisy
// objective, so keep the instance count small.
#[test]
fn warm_start_matches_cold_start() {
    let opts = NelderMeadOptions::default();
    for k in 0..5 {
        let g = erdos_renyi(6, 0.5, &mut stream_rng(derive_seed(77, k), GRAPH_STREAM)).unwrap();
        for kind in NoiseKind::BOTH {
            let prev = optimize(&g, None, Objective::Mitigated, None, opts).unwrap();
            let model = NoiseModel::new(kind, 0.005).unwrap();
            let warm = optimize(&g, Some(&model), Objective::Mitigated, Some(&prev.params), opts).unwrap();
            let cold = optimize(&g, Some(&model), Objective::Mitigated, None, opts).unwrap();
            assert!(
                (warm.value - cold.value).abs() <= 1e-8,
                "instance {k} {kind}: warm {} cold {}",
                warm.value,
                cold.value
            );
            // Optimal angles barely move between neighbouring noise levels.
            let da = (warm.params.alpha[0] - prev.params.alpha[0]).abs();
            let db = (warm.params.beta[0] - prev.params.beta[0]).abs();
            assert!(da <= ALPHA_MAX / (GRID_POINTS - 1) as f64 && db <= BETA_MAX / (GRID_POINTS - 1) as f64);
        }
    }
}
