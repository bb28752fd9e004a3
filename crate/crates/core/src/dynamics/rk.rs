//! Explicit Runge-Kutta steppers for `dr/dt = f(t, r)` on `R^3`.

use nalgebra::Vector3;

pub(crate) type V3 = Vector3<f64>;

pub(crate) fn rk4_step<F: Fn(f64, &V3) -> V3>(f: &F, t: f64, y: &V3, h: f64) -> V3 {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &(y + k1 * (0.5 * h)));
    let k3 = f(t + 0.5 * h, &(y + k2 * (0.5 * h)));
    let k4 = f(t + h, &(y + k3 * h));
    y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
}

// Dormand-Prince 5(4).
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand-Prince step. `k1 = f(t, y)` is passed in and the derivative at
/// the new point is returned (first-same-as-last).
pub(crate) fn dopri_step<F: Fn(f64, &V3) -> V3>(f: &F, t: f64, y: &V3, k1: &V3, h: f64) -> (V3, V3, f64) {
    let k2 = f(t + C2 * h, &(y + k1 * (A21 * h)));
    let k3 = f(t + C3 * h, &(y + (k1 * A31 + k2 * A32) * h));
    let k4 = f(t + C4 * h, &(y + (k1 * A41 + k2 * A42 + k3 * A43) * h));
    let k5 = f(t + C5 * h, &(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h));
    let k6 = f(t + h, &(y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h));
    let y_new = y + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * h;
    let k7 = f(t + h, &y_new);
    let err = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
    (y_new, k7, err.amax())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation(_t: f64, y: &V3) -> V3 {
        V3::new(-y.y, y.x, 0.0)
    }

    #[test]
    fn rk4_is_fourth_order() {
        let exact = V3::new(1f64.cos(), 1f64.sin(), 0.0);
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let mut y = V3::x();
            for k in 0..n {
                y = rk4_step(&rotation, k as f64 * h, &y, h);
            }
            (y - exact).norm()
        };
        let ratio = err(20) / err(40);
        assert!((ratio - 16.0).abs() < 0.5, "{ratio}");
    }

    #[test]
    fn dopri_error_estimate_is_fifth_order_local() {
        let y = V3::x();
        let k1 = rotation(0.0, &y);
        let (_, _, e1) = dopri_step(&rotation, 0.0, &y, &k1, 0.2);
        let (_, _, e2) = dopri_step(&rotation, 0.0, &y, &k1, 0.1);
        // Local error of the embedded pair scales as h^5.
        assert!((e1 / e2).log2() > 4.5);
        let (y1, k, _) = dopri_step(&rotation, 0.0, &y, &k1, 0.1);
        assert!((y1 - V3::new(0.1f64.cos(), 0.1f64.sin(), 0.0)).norm() < 1e-9);
        assert_eq!(k, rotation(0.1, &y1));
    }
}
