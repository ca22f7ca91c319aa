//! The scripted source controller on the nominal pendulum and on heavier
//! ones: the adaptation gap the continuous methods try to close.

use pada::envs::{evaluate_returns, median, scripted_source_policy, ContinuousEnv, EnvSpec, PerturbationConfig};

fn main() -> pada::Result<()> {
    let spec = EnvSpec::pendulum();
    let pi = scripted_source_policy(&spec);
    for mass in [1.0, 1.25, 1.5, 2.0] {
        let env = ContinuousEnv::new(spec.clone(), PerturbationConfig::with_mass(mass))?;
        let returns = evaluate_returns(&env, &pi, 10, 0, "example")?;
        println!("mass x{mass:.2}: median return {:.1}", median(&returns));
    }
    Ok(())
}
