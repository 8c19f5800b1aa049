//! Elliptic-helix tracking under disturbances, with and without the robust terms.

use std::time::Instant;

use robust_se3::sim::{run, Scenario};

fn main() -> robust_se3::Result<()> {
    for robust in [true, false] {
        let mut sc = Scenario::case1();
        sc.robust = robust;
        let started = Instant::now();
        let log = run(&sc)?;
        println!(
            "robust {:<5}  terminal |e_x| {:.4} m  initial Psi {:.4}  ({:.1} ms)",
            robust,
            log.terminal_position_error(),
            log.initial_psi(),
            started.elapsed().as_secs_f64() * 1e3
        );
    }
    Ok(())
}
