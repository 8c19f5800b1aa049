//! Recovery to hover from an almost inverted attitude: attitude tracking of
//! the computed attitude until Psi drops below psi1, then position tracking.

use robust_se3::sim::{run, Scenario};

fn main() -> robust_se3::Result<()> {
    let sc = Scenario::case2();
    let log = run(&sc)?;
    println!("initial Psi {:.5}", log.initial_psi());
    match log.switch_time {
        Some(t) => println!("switched to position tracking at t = {t:.3} s"),
        None => println!("never switched to position tracking"),
    }
    for r in log.records.iter().step_by(500).take(8) {
        println!(
            "t {:4.2}  Psi {:.4}  |e_x| {:.4}  position phase {}",
            r.t,
            r.errors.psi,
            r.errors.e_x.norm(),
            r.position_phase
        );
    }
    println!("terminal |e_x| {:.4} m", log.terminal_position_error());
    Ok(())
}
