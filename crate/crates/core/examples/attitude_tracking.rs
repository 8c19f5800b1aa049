//! Attitude-only tracking of a spinning command under torque disturbance,
//! compared against the certified ultimate bound.

use robust_se3::certify::certify_attitude;
use robust_se3::sim::{run, Scenario};

fn main() -> robust_se3::Result<()> {
    let mut sc = Scenario::attitude_demo();
    // Small enough for the attitude certificate to hold.
    sc.gains.eps_r = 1e-4;
    let cert = certify_attitude(&sc.gains, &sc.params)?;
    let log = run(&sc)?;
    for r in log.records.iter().step_by(1000) {
        println!(
            "t {:5.2}  Psi {:.3e}  |e_R| {:.3e}  |e_Omega| {:.3e}  V2 {:.3e}",
            r.t,
            r.errors.psi,
            r.errors.e_r.norm(),
            r.errors.e_omega.norm(),
            r.monitors.v2
        );
    }
    let e = &log.last().errors;
    println!(
        "terminal |e_R|^2+|e_Omega|^2 = {:.3e}, certified bound {:.3e} (certificate holds: {})",
        e.e_r.norm_squared() + e.e_omega.norm_squared(),
        cert.ultimate_bound,
        cert.is_satisfied()
    );
    Ok(())
}
