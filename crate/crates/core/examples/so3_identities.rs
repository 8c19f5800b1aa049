//! Attitude error quantities between two rotations, and the exp/log round trip.

use robust_se3::geometry::{
    attitude_error_function, attitude_error_vector, error_jacobian, exp_so3, hat, log_so3,
    vee, Rotation, Vec3,
};

fn main() -> robust_se3::Result<()> {
    let rd = Rotation::identity();
    for angle in [0.1, 1.0, 2.0, 3.0] {
        let r = Rotation::from_axis_angle(&Vec3::new(1.0, 1.0, 0.0).normalize(), angle);
        let psi = attitude_error_function(&r, &rd);
        let e_r = attitude_error_vector(&r, &rd);
        let e = error_jacobian(&r, &rd);
        println!(
            "angle {angle:.1}: Psi {psi:.6}  |e_R| {:.6}  sqrt(Psi(2-Psi)) {:.6}  |E|_2 {:.6}",
            e_r.norm(),
            (psi * (2.0 - psi)).sqrt(),
            e.svd(false, false).singular_values.max()
        );
    }

    let w = Vec3::new(0.3, -1.2, 0.7);
    let back = log_so3(&exp_so3(&w));
    println!("log(exp(w)) - w = {:.3e}", (back - w).norm());
    println!("vee(hat(w)) - w = {:.3e}", (vee(&hat(&w))? - w).norm());
    Ok(())
}
