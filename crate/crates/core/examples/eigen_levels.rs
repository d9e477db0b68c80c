//! Nonlinear levels at a few detunings of well 1, with their stability and
//! the index sum of the classical Hamiltonian.

use tripwell::model::{chemical_potential, classical_hamiltonian, to_canonical, ModelParams};
use tripwell::stationary::{find_stationary_states, SearchConfig};

fn main() -> tripwell::Result<()> {
    let search = SearchConfig::default();
    for g in [0.0, -0.4] {
        println!("g = {g}");
        for eps in [-0.6, -0.4, -0.2, 0.0, 0.4] {
            let params = ModelParams::new(eps, -0.4, 0.1, 0.2, g)?;
            let found = find_stationary_states(&params, &search);
            print!("  eps = {eps:5.2}: {} states, index sum {}; mu =", found.states.len(), found.index_sum());
            for s in &found.states {
                print!(" {:.5} ({})", s.mu, &s.classification.as_str()[..1]);
            }
            println!();
        }
    }

    // mu and the classical energy differ by the interaction term
    let params = ModelParams::new(-0.25, -0.4, 0.1, 0.2, -0.4)?;
    for s in find_stationary_states(&params, &search).states {
        if let Ok(coords) = to_canonical(&s.state) {
            let e = classical_hamiltonian(&coords, &params);
            let p = s.populations();
            let interaction: f64 = p.iter().map(|x| x * x).sum::<f64>() * params.g / 2.0;
            println!(
                "mu = {:.6}  H = {:.6}  H + g/2 sum|psi|^4 = {:.6}",
                chemical_potential(&s.state, &params),
                e,
                e + interaction
            );
        }
    }
    Ok(())
}
