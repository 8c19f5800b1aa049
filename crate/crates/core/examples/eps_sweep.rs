//! Terminal tracking error of the attitude demo as eps_R varies, in parallel.

use rayon::prelude::*;
use robust_se3::certify::certify_attitude;
use robust_se3::sim::{run, Scenario};

fn main() -> robust_se3::Result<()> {
    let values = [1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 1e-2, 4e-2];
    let rows = values
        .par_iter()
        .map(|&eps| {
            let mut sc = Scenario::attitude_demo();
            sc.gains.eps_r = eps;
            let log = run(&sc)?;
            let cert = certify_attitude(&sc.gains, &sc.params)?;
            Ok((eps, log.terminal_attitude_error(), cert.ultimate_bound.sqrt(), cert.is_satisfied()))
        })
        .collect::<robust_se3::Result<Vec<_>>>()?;
    println!("{:>10} {:>14} {:>14} certified", "eps_R", "terminal", "bound");
    for (eps, err, bound, ok) in rows {
        println!("{eps:>10.1e} {err:>14.4e} {bound:>14.4e} {ok}");
    }
    Ok(())
}
