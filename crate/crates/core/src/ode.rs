//! Fixed-step classical Runge-Kutta integration over small fixed-size states.

/// Advances `state` by one RK4 step of size `dt` for the autonomous system
/// `dy/dt = f(y)`. Inputs that vary over the step must be captured by `f`.
pub fn rk4_step<const N: usize, F>(state: [f64; N], dt: f64, mut f: F) -> [f64; N]
where
    F: FnMut(&[f64; N]) -> [f64; N],
{
    let k1 = f(&state);
    let k2 = f(&axpy(&state, 0.5 * dt, &k1));
    let k3 = f(&axpy(&state, 0.5 * dt, &k2));
    let k4 = f(&axpy(&state, dt, &k3));
    let mut out = state;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Same as [`rk4_step`] for systems with an explicit time argument, where `t`
/// is the offset into the step.
pub fn rk4_step_timed<const N: usize, F>(state: [f64; N], dt: f64, mut f: F) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(0.0, &state);
    let k2 = f(0.5 * dt, &axpy(&state, 0.5 * dt, &k1));
    let k3 = f(0.5 * dt, &axpy(&state, 0.5 * dt, &k2));
    let k4 = f(dt, &axpy(&state, dt, &k3));
    let mut out = state;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += h * k[i];
    }
    out
}
