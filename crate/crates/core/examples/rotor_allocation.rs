//! Map a thrust/moment wrench to the four rotor thrusts and back.

use robust_se3::geometry::Vec3;
use robust_se3::model::{allocate_rotors, allocation_matrix, wrench_from_rotors, QuadrotorParams, Wrench};

fn main() -> robust_se3::Result<()> {
    let p = QuadrotorParams::reference();
    println!("allocation matrix:{}", allocation_matrix(&p));
    let wrench = Wrench {
        thrust: p.mass * p.gravity,
        moment: Vec3::new(0.2, -0.1, 0.05),
    };
    let rotors = allocate_rotors(&wrench, &p)?;
    println!("rotor thrusts (N): {:?}", rotors.0);
    let back = wrench_from_rotors(&rotors, &p);
    println!(
        "round trip error: thrust {:.2e}, moment {:.2e}",
        (back.thrust - wrench.thrust).abs(),
        (back.moment - wrench.moment).norm()
    );
    Ok(())
}
