//! Empirical mean squared error of block Kaczmarz against its bound.

use kaczmarz::bounds::lemma1_audit;
use kaczmarz::{add_noise, build_random_paving, gen_gaussian_system};

fn main() -> kaczmarz::Result<()> {
    let sys = add_noise(&gen_gaussian_system(100, 20, 5)?, 0.1, 6)?;
    let paving = build_random_paving(sys.a(), 4, 7)?;
    let audit = lemma1_audit(&sys, &paving, 100, 60, 8)?;
    println!(
        "coefficient {:.4}, noise floor {:.4}, {} runs",
        audit.bound.coefficient, audit.bound.noise_floor, audit.runs
    );
    for s in audit.steps.iter().step_by(10) {
        println!(
            "j {:>3}  mean err^2 {:>9.4}  recursion {:>9.4}  closed form {:>9.4}",
            s.j, s.mean_err_sq, s.recursion_bound, s.closed_form_bound
        );
    }
    println!("bound holds at every step: {}", audit.holds());
    Ok(())
}
