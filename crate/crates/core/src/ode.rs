//! Dormand-Prince 5(4) integration of second-order linear ODEs written as
//! first-order systems `y' = F(t, y)`, `y = (f, f')`.

use crate::error::{FbmsError, Result};

pub type State = [f64; 2];

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (propagated solution).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Embedded fourth-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Trajectory {
    pub end: State,
    /// Largest `|f|` seen at accepted step endpoints.
    pub max_abs: f64,
    pub accepted: usize,
    pub rejected: usize,
}

/// One Dormand-Prince step; returns the fifth-order update and the error
/// estimate.
fn step(rhs: &impl Fn(f64, &State) -> State, t: f64, y: &State, h: f64) -> (State, State) {
    let mut k = [[0.0; 2]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            ys[0] += h * A[s][j] * kj[0];
            ys[1] += h * A[s][j] * kj[1];
        }
        k[s] = rhs(t + C[s] * h, &ys);
    }
    let mut y5 = *y;
    let mut err = [0.0; 2];
    for s in 0..7 {
        for i in 0..2 {
            y5[i] += h * B5[s] * k[s][i];
            err[i] += h * (B5[s] - B4[s]) * k[s][i];
        }
    }
    (y5, err)
}

/// Adaptive integration from `t0` to `t1` (either direction).
pub fn integrate(
    rhs: impl Fn(f64, &State) -> State,
    t0: f64,
    y0: State,
    t1: f64,
    tol: Tolerances,
) -> Result<Trajectory> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(Trajectory {
            end: y0,
            max_abs: y0[0].abs(),
            accepted: 0,
            rejected: 0,
        });
    }
    let dir = span.signum();
    let mut h = span.abs() * 1e-3;
    let mut t = t0;
    let mut y = y0;
    let mut max_abs = y0[0].abs();
    let (mut accepted, mut rejected) = (0usize, 0usize);
    while (t1 - t) * dir > 0.0 {
        if accepted + rejected > 1_000_000 {
            return Err(FbmsError::solver("ODE integration exceeded step budget"));
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        let hs = if last { remaining } else { h };
        let (y5, e) = step(&rhs, t, &y, dir * hs);
        let mut norm = 0.0f64;
        for i in 0..2 {
            let sc = tol.atol + tol.rtol * y[i].abs().max(y5[i].abs());
            norm = norm.max((e[i] / sc).abs());
        }
        if norm <= 1.0 {
            t = if last { t1 } else { t + dir * hs };
            y = y5;
            max_abs = max_abs.max(y[0].abs());
            accepted += 1;
        } else {
            rejected += 1;
        }
        let factor = if norm == 0.0 {
            5.0
        } else {
            (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = hs * factor;
        if h < 1e-14 * span.abs() {
            return Err(FbmsError::solver("ODE step size underflow"));
        }
    }
    Ok(Trajectory {
        end: y,
        max_abs,
        accepted,
        rejected,
    })
}

/// Fixed-step integration with the fifth-order Dormand-Prince update.
pub fn integrate_fixed(
    rhs: impl Fn(f64, &State) -> State,
    t0: f64,
    y0: State,
    t1: f64,
    steps: usize,
) -> State {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    for i in 0..steps {
        y = step(&rhs, t0 + i as f64 * h, &y, h).0;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(_: f64, y: &State) -> State {
        [y[1], -y[0]]
    }

    #[test]
    fn harmonic_oscillator_to_tolerance() {
        let tol = Tolerances {
            atol: 1e-12,
            rtol: 1e-10,
        };
        let tr = integrate(harmonic, 0.0, [1.0, 0.0], 3.0, tol).unwrap();
        assert!((tr.end[0] - 3f64.cos()).abs() < 1e-9);
        assert!((tr.end[1] + 3f64.sin()).abs() < 1e-9);
        let back = integrate(harmonic, 3.0, tr.end, 0.0, tol).unwrap();
        assert!((back.end[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_step_converges_at_fifth_order() {
        let err = |n| {
            let y = integrate_fixed(harmonic, 0.0, [1.0, 0.0], 2.0, n);
            (y[0] - 2f64.cos()).hypot(y[1] + 2f64.sin())
        };
        let order = (err(40) / err(80)).log2();
        assert!((4.5..5.8).contains(&order), "order {order}");
    }
}
