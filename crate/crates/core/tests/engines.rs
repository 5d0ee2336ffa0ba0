use densest_core::fixtures::{planted_block, random_digraph};
use densest_core::graph::density;
use densest_core::harness::{run_engine, Engine, ExperimentConfig};
use densest_core::ingest::IngestStats;

fn mpc_cfg(engine: Engine) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(engine, "", "");
    cfg.delta = Some(0.8);
    cfg.epsilon = 0.6;
    cfg
}

#[test]
fn mpc_rounds_csv_on_gnp() {
    let el = random_digraph(200, 0.1, 7);
    let g = el.to_bipartite();
    let mpc = run_engine(&mpc_cfg(Engine::Mpc), &el, IngestStats::default()).unwrap();
    let base = run_engine(&mpc_cfg(Engine::BaselineMpc), &el, IngestStats::default()).unwrap();
    let rows = mpc.rounds_rows.unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().any(|r| r.early_return));
    assert_eq!(density(&g, &mpc.pair).value, mpc.summary.density);
    assert!(mpc.summary.density >= base.summary.density / (2.0 * 1.6f64.powi(6)));
}

/// At this size t = 1, so a phase simulates one peeling step at a cost of
/// several rounds, while average-degree peeling on a near-regular graph
/// needs only a handful of passes.
#[test]
#[ignore = "does not hold at desk scale; measured rounds are recorded in the project notes"]
fn mpc_uses_fewer_rounds_than_baseline_on_gnp() {
    let el = random_digraph(200, 0.1, 7);
    let mpc = run_engine(&mpc_cfg(Engine::Mpc), &el, IngestStats::default()).unwrap();
    let base = run_engine(&mpc_cfg(Engine::BaselineMpc), &el, IngestStats::default()).unwrap();
    assert!(
        mpc.summary.cost < base.summary.cost,
        "mpc {} rounds, baseline {} rounds",
        mpc.summary.cost,
        base.summary.cost
    );
}

#[test]
fn stream_max_density_tracks_baseline_on_planted_block() {
    let el = planted_block(400, 2_000, 12, 20, 3);
    let stream = run_engine(&ExperimentConfig::new(Engine::Stream, "", ""), &el, IngestStats::default()).unwrap();
    let base = run_engine(
        &ExperimentConfig::new(Engine::BaselineStream, "", ""),
        &el,
        IngestStats::default(),
    )
    .unwrap();
    assert!(
        stream.summary.max_density_over_z >= 0.5 * base.summary.max_density_over_z,
        "stream {} baseline {}",
        stream.summary.max_density_over_z,
        base.summary.max_density_over_z
    );
}

#[test]
fn base_peel_and_baseline_agree_within_guarantees() {
    for seed in 0..5 {
        let el = random_digraph(60, 0.1, seed);
        let peel = run_engine(&ExperimentConfig::new(Engine::BasePeel, "", ""), &el, IngestStats::default()).unwrap();
        let mut b = ExperimentConfig::new(Engine::BaselineMpc, "", "");
        b.delta = Some(0.5);
        b.epsilon = 0.2;
        let base = run_engine(&b, &el, IngestStats::default()).unwrap();
        // both approximate the same optimum: 2(1+e)^3 and 2+e
        let (p, q) = (peel.summary.density, base.summary.density);
        assert!(p * 2.0 * 1.2f64.powi(3) >= q && q * 2.21 >= p, "{p} vs {q}");
    }
}
