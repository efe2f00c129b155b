use circleflow_core::energy::weak_form_residual;
use circleflow_core::jko::{evolve, SolverConfig};
use circleflow_core::measure::InitialData;

fn run(a1: f64, tau: f64, n: usize, t_end: f64) -> circleflow_core::jko::FlowTrajectory {
    let m0 = InitialData::Cosine { a1 }.build(n).unwrap();
    let cfg = SolverConfig::new(0.5, tau, t_end, n);
    evolve(&m0, &cfg).unwrap()
}

fn main() {
    for &(a1, tau, n) in &[(0.08, 0.02, 32), (0.08, 0.01, 64), (0.05, 0.02, 32), (0.05, 0.04, 32)] {
        for &t in &[0.08, 0.1, 0.16, 0.2] {
            let coarse = run(a1, tau, n, 0.4);
            let fine = run(a1, tau / 2.0, 2 * n, 0.4);
            let mut line = format!("a1={a1} tau={tau} n={n} t={t}: ");
            for k in 1..=3 {
                let rc = weak_form_residual(&coarse, k, t).unwrap();
                let rf = weak_form_residual(&fine, k, t).unwrap();
                line.push_str(&format!("k{k}: {:.2e}/{:.2e} ord {:.2}  ", rc, rf, (rc / rf).log2()));
            }
            println!("{line}");
        }
    }
}
