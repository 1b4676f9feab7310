//! Quadrature-based error norms against exact fields.

use super::assembly::Discretization;

/// `‖∇(u − u_h)‖` for an exact gradient `grad[c][d] = ∂_d u_c`.
pub fn velocity_h1_error<G>(disc: &Discretization, coeffs: &[f64], grad: G) -> f64
where
    G: Fn(f64, f64) -> [[f64; 2]; 2],
{
    let mut sum = 0.0;
    for t in 0..disc.dofmap().num_elements() {
        for pd in disc.points(t) {
            let (_, du) = disc.eval_velocity(coeffs, t, pd);
            let ex = grad(pd.xy[0], pd.xy[1]);
            let mut e2 = 0.0;
            for c in 0..2 {
                for d in 0..2 {
                    e2 += (du[c][d] - ex[c][d]).powi(2);
                }
            }
            sum += pd.jw * e2;
        }
    }
    sum.sqrt()
}

/// `‖∇v‖` by direct element quadrature, independent of the stiffness matrix.
pub fn velocity_h1_seminorm_by_quadrature(disc: &Discretization, coeffs: &[f64]) -> f64 {
    velocity_h1_error(disc, coeffs, |_, _| [[0.0; 2]; 2])
}

/// `‖p − p_h‖_{L²}`.
pub fn pressure_l2_error<P>(disc: &Discretization, coeffs: &[f64], pressure: P) -> f64
where
    P: Fn(f64, f64) -> f64,
{
    let mut sum = 0.0;
    for t in 0..disc.dofmap().num_elements() {
        for pd in disc.points(t) {
            let ph = disc.eval_pressure(coeffs, t, pd);
            sum += pd.jw * (ph - pressure(pd.xy[0], pd.xy[1])).powi(2);
        }
    }
    sum.sqrt()
}
