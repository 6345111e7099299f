// scratch convergence check
use duffing::fock::{build_hamiltonian, diagonalize, ModelSpec};
use duffing::field::{frequency_components, g2_zero_delay, Quadrature};
use duffing::thermal::canonical_state;

fn main() {
    let u = 0.012;
    let t = 0.56;
    for (dim_work, keep) in [(80usize, 12usize), (120, 16), (200, 24), (300, 30)] {
        let spec = ModelSpec::quartic(1.0, u, dim_work);
        let h = build_hamiltonian(&spec).unwrap();
        let es = diagonalize(&h, keep).unwrap();
        let rho = canonical_state(&es, t).unwrap();
        let gx = g2_zero_delay(&rho, &frequency_components(&es, Quadrature::X)).unwrap();
        let gp = g2_zero_delay(&rho, &frequency_components(&es, Quadrature::P)).unwrap();
        println!("dim_work={dim_work:4} keep={keep:3}  g2_X = {gx:.6}  g2_P = {gp:.6}");
    }
    // scan U at fixed T to see where P exceeds 2
    for iu in 0..12 {
        let u = (-6.0 + iu as f64 * 0.5).exp();
        let spec = ModelSpec::quartic(1.0, u, 160);
        let h = build_hamiltonian(&spec).unwrap();
        let es = diagonalize(&h, 20).unwrap();
        if let Ok(rho) = canonical_state(&es, 0.56) {
            let gx = g2_zero_delay(&rho, &frequency_components(&es, Quadrature::X)).unwrap();
            let gp = g2_zero_delay(&rho, &frequency_components(&es, Quadrature::P)).unwrap();
            println!("U={u:.5}  g2_X = {gx:.4}  g2_P = {gp:.4}");
        }
    }
}
