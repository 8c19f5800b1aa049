//! Evaluate the sufficient gain conditions for the reference gains and for a
//! gain set tuned to satisfy the attitude certificate.

use robust_se3::certify::{certify_attitude, certify_large_angle, certify_position};
use robust_se3::control::Gains;
use robust_se3::model::QuadrotorParams;

fn show(label: &str, g: &Gains, p: &QuadrotorParams) -> robust_se3::Result<()> {
    println!("== {label}");
    let att = certify_attitude(g, p)?;
    let pos = certify_position(g, p)?;
    let conds = att.conditions.iter().chain(&pos.conditions);
    for c in conds {
        println!("  {:<44} margin {:+.4e}", c.name, c.margin);
    }
    if let Ok(l) = certify_large_angle(g, p) {
        println!("  {:<44} margin {:+.4e}", l.condition.name, l.condition.margin);
    }
    println!(
        "  attitude bound {:.4e}, position bound {:.4e}",
        att.ultimate_bound, pos.ultimate_bound
    );
    Ok(())
}

fn main() -> robust_se3::Result<()> {
    let p = QuadrotorParams::reference();
    show("reference gains", &Gains::reference(), &p)?;
    let tuned = Gains {
        psi2: 1.0,
        eps_r: 1e-4,
        ..Gains::reference()
    };
    show("psi2 = 1, eps_R = 1e-4", &tuned, &p)?;
    Ok(())
}
