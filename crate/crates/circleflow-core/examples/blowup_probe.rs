use circleflow_core::measure::GridDensity;
use circleflow_core::spectral::spectral_evolve;

fn probe(a1: f64, nu: f64, m: usize, t_end: f64) {
    let tau = 2.0 * std::f64::consts::PI;
    let u0 = GridDensity::from_fn(m, |x| 1.0 / tau + a1 * x.cos()).unwrap();
    let run = spectral_evolve(&u0, nu, f64::INFINITY, t_end, t_end / 200.0).unwrap();
    let l2 = &run.l2_norms;
    let grew = l2.windows(2).filter(|w| w[1] > w[0] + 1e-14).count();
    let max_l2 = l2.iter().cloned().fold(0.0f64, f64::max);
    println!(
        "a1={a1:<8} nu={nu:<7} m={m} range=[{:.5},{:.5}] final={:.5} grew_steps={grew}/{} outcome={:?}",
        l2.iter().cloned().fold(f64::INFINITY, f64::min), max_l2, l2.last().unwrap(), l2.len()-1, run.outcome
    );
}

fn main() {
    probe(0.1, 0.01, 256, 8.0);
    probe(0.15, 0.01, 256, 8.0);
    probe(0.158, 0.001, 256, 8.0);
    probe(0.159, 0.0005, 512, 8.0);
    probe(0.155, 0.005, 256, 12.0);
    probe(0.12, 0.001, 256, 20.0);
}
