use circleflow_core::jko::{jko_objective, jko_step, CellParams, SolverConfig};
use circleflow_core::measure::InitialData;

fn main() {
    let m0 = InitialData::Dirac { eps: 1e-3 }.build(64).unwrap();
    let cfg = SolverConfig::new(0.0, 1e-3, 5e-3, 64);
    let p = CellParams::from_measure(&m0);
    let eval = jko_objective(cfg.tau, &m0, &p, cfg.nu, cfg.coeff, None);
    let ginf = eval.grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    println!("warm start: value={:.6} grad_inf={:.3e} sup_disp={:.4}", eval.value, ginf, eval.sup_displacement);
    let t0 = std::time::Instant::now();
    let out = jko_step(cfg.tau, &m0, &cfg);
    println!(
        "step: iters={} converged={} grad_norm={:.3e} sup_disp={:.4} min_width {:.3e} -> {:.3e}  [{:?}]",
        out.iterations, out.converged, out.grad_norm, out.sup_displacement,
        m0.min_width(), out.measure.min_width(), t0.elapsed()
    );
}
