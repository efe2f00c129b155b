use circleflow_core::jko::{evolve, SolverConfig};
use circleflow_core::measure::CellMeasure;

fn main() {
    let m0 = CellMeasure::uniform(16).unwrap();
    let cfg = SolverConfig::new(0.2, 0.05, 0.25, 16);
    let traj = evolve(&m0, &cfg).unwrap();
    for k in 0..traj.len() {
        let s = &traj.snapshots()[k];
        println!(
            "k={k} iters={} energy={:.17e} base={:.17e} w0={:.17e} w8={:.17e}",
            traj.inner_iterations()[k],
            traj.energies()[k].total,
            s.base(),
            s.widths()[0],
            s.widths()[8]
        );
    }
}
