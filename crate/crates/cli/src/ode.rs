//! Adaptive Dormand-Prince 5(4) integration of the 2x2 mode system; the
//! independent oracle against which the closed-form propagator is checked.

use lagns_core::propagator::LinearParams;
use num_complex::Complex64;

type State = [Complex64; 2];

fn rhs(p: &LinearParams, s: f64, y: &State) -> State {
    // a' = -alpha s u, u' = beta s a - mu s^2 u
    [
        -p.alpha * s * y[1],
        p.beta * s * y[0] - p.mu * s * s * y[1],
    ]
}

fn axpy(y: &State, c: f64, d: &State) -> State {
    [y[0] + c * d[0], y[1] + c * d[1]]
}

/// Integrate the mode ODE from 0 to `t_end` with adaptive steps.
pub fn integrate_mode(
    a0: Complex64,
    u0: Complex64,
    s: f64,
    t_end: f64,
    params: &LinearParams,
    rtol: f64,
    atol: f64,
) -> (Complex64, Complex64) {
    // Dormand-Prince coefficients
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] =
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut y: State = [a0, u0];
    let mut t = 0.0;
    if t_end == 0.0 {
        return (y[0], y[1]);
    }
    // initial step from the stiffest scale of the symbol
    let stiff = (params.mu * s * s).max((params.alpha * params.beta).abs().sqrt() * s);
    let mut h = (0.01 / stiff).min(t_end);
    let mut k: [State; 7] = [[Complex64::new(0.0, 0.0); 2]; 7];

    for _ in 0..2_000_000 {
        if t >= t_end {
            break;
        }
        h = h.min(t_end - t);
        k[0] = rhs(params, s, &y);
        for stage in 0..6 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                if A[stage][j] != 0.0 {
                    yi = axpy(&yi, h * A[stage][j], kj);
                }
            }
            k[stage + 1] = rhs(params, s, &yi);
        }
        let mut y5 = y;
        let mut y4 = y;
        for (j, kj) in k.iter().enumerate() {
            if B5[j] != 0.0 {
                y5 = axpy(&y5, h * B5[j], kj);
            }
            if B4[j] != 0.0 {
                y4 = axpy(&y4, h * B4[j], kj);
            }
        }
        let scale0 = atol + rtol * y[0].norm().max(y5[0].norm());
        let scale1 = atol + rtol * y[1].norm().max(y5[1].norm());
        let err = ((y5[0] - y4[0]).norm() / scale0).max((y5[1] - y4[1]).norm() / scale1);
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let factor = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        h *= factor;
    }
    (y[0], y[1])
}
