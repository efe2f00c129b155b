use circleflow_core::jko::{evolve, SolverConfig};
use circleflow_core::measure::InitialData;
use circleflow_core::{dper2_quantile, CellMeasure};

fn main() {
    let tau = 2.0 * std::f64::consts::PI;
    let a1 = 0.1 * (1.0 / tau) / 0.15;
    let m0 = InitialData::Cosine { a1 }.build(128).unwrap();
    let cfg = SolverConfig::new(0.1, 0.02, 20.0, 128);
    let t0 = std::time::Instant::now();
    let traj = evolve(&m0, &cfg).unwrap();
    let el = t0.elapsed();
    let iters: u32 = traj.inner_iterations().iter().sum();
    let u = CellMeasure::uniform(128).unwrap();
    let d_end = dper2_quantile(traj.final_measure(), &u).sqrt();
    // monotonicity of the distance column
    let mut worst_rise = 0.0f64;
    let mut prev = f64::INFINITY;
    for snap in traj.snapshots() {
        let d = dper2_quantile(snap, &u).sqrt();
        worst_rise = worst_rise.max(d - prev);
        prev = d;
    }
    println!(
        "1000 steps in {el:?} ({} inner iters); d(t=20)={d_end:.4e}; worst distance rise {worst_rise:.2e}; converged: {}",
        iters,
        traj.first_failed_step().is_none()
    );
}
