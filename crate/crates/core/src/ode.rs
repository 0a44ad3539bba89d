//! Classical fourth-order Runge–Kutta, fixed step or with step-doubling
//! error control. The accepted value is the two-half-step result, so the
//! scheme stays fourth order.

use crate::error::{invalid, Error, Result};

pub type Rhs<'a, const N: usize> = dyn Fn(f64, &[f64; N]) -> [f64; N] + 'a;

/// Per-component error scale from the old and new state.
pub type ErrorScale<'a, const N: usize> = dyn Fn(&[f64; N], &[f64; N]) -> [f64; N] + 'a;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerance {
    pub rel: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            h_init: 1e-3,
            h_min: 1e-12,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub rejected: usize,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> &[f64; N] {
        self.y.last().expect("trajectory holds its initial point")
    }

    pub fn steps(&self) -> usize {
        self.t.len() - 1
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

pub fn rk4_step<const N: usize>(f: &Rhs<N>, t: f64, y: &[f64; N], h: f64) -> [f64; N] {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn check_finite<const N: usize>(t: f64, y: &[f64; N]) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Integration {
            at: t.exp(),
            reason: "non-finite state".into(),
        })
    }
}

/// `steps` equal steps from `t0` to `t1` (either direction).
pub fn integrate_fixed<const N: usize>(f: &Rhs<N>, t0: f64, t1: f64, y0: [f64; N], steps: usize) -> Result<Trajectory<N>> {
    if steps == 0 {
        return Err(invalid("steps", "need at least one step"));
    }
    let h = (t1 - t0) / steps as f64;
    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0],
        rejected: 0,
    };
    let mut y = y0;
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        y = rk4_step(f, t, &y, h);
        check_finite(t + h, &y)?;
        traj.t.push(if i + 1 == steps { t1 } else { t + h });
        traj.y.push(y);
    }
    Ok(traj)
}

/// Adaptive integration from `t0` to `t1`. `scale(old, new)` gives the
/// per-component magnitude the local error is measured against.
pub fn integrate_adaptive<const N: usize>(
    f: &Rhs<N>,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    tol: &OdeTolerance,
    scale: &ErrorScale<N>,
) -> Result<Trajectory<N>> {
    if !(tol.rel > 0.0) || !(tol.h_init > 0.0) || !(tol.h_min > 0.0) {
        return Err(invalid("ode tolerance", "rel, h_init and h_min must be positive"));
    }
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0],
        rejected: 0,
    };
    let (mut t, mut y) = (t0, y0);
    let mut h = tol.h_init.min((t1 - t0).abs());
    while (t1 - t) * dir > 0.0 {
        if traj.t.len() > tol.max_steps {
            return Err(Error::Integration {
                at: t.exp(),
                reason: format!("exceeded {} steps", tol.max_steps),
            });
        }
        let last = (t1 - t).abs() <= h;
        let step = if last { t1 - t } else { dir * h };
        let full = rk4_step(f, t, &y, step);
        let mid = rk4_step(f, t, &y, 0.5 * step);
        let two = rk4_step(f, t + 0.5 * step, &mid, 0.5 * step);
        let sc = scale(&y, &two);
        let mut ratio: f64 = 0.0;
        for i in 0..N {
            let err = (two[i] - full[i]).abs() / 15.0;
            ratio = ratio.max(err / (tol.rel * sc[i] + f64::MIN_POSITIVE));
        }
        if !ratio.is_finite() {
            return Err(Error::Integration {
                at: t.exp(),
                reason: "non-finite error estimate".into(),
            });
        }
        let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        if ratio <= 1.0 {
            t = if last { t1 } else { t + step };
            y = two;
            traj.t.push(t);
            traj.y.push(y);
            h *= grow;
        } else {
            traj.rejected += 1;
            h = step.abs() * grow;
            if h < tol.h_min {
                return Err(Error::Integration {
                    at: t.exp(),
                    reason: format!("step fell below {:e}", tol.h_min),
                });
            }
        }
    }
    Ok(traj)
}

/// `log₂(|c − m| / |m − f|)` for results at step counts `N, 2N, 4N`.
pub fn observed_order(coarse: f64, mid: f64, fine: f64) -> f64 {
    ((coarse - mid) / (mid - fine)).abs().log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_: f64, y: &[f64; 1]) -> [f64; 1] {
        [-y[0]]
    }

    fn oscillator(_: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn fixed_step_is_fourth_order() {
        let run = |n| integrate_fixed(&decay, 0.0, 2.0, [1.0], n).unwrap().last()[0];
        let p = observed_order(run(20), run(40), run(80));
        assert!((p - 4.0).abs() < 0.1, "{p}");
    }

    #[test]
    fn adaptive_meets_tolerance_both_directions() {
        let tol = OdeTolerance::default();
        let rel = |_: &[f64; 2], n: &[f64; 2]| [n[0].abs().max(1.0), n[1].abs().max(1.0)];
        let fwd = integrate_adaptive(&oscillator, 0.0, 10.0, [0.0, 1.0], &tol, &rel).unwrap();
        let e = (fwd.last()[0] - 10f64.sin()).abs();
        assert!(e < 1e-7, "{e}");
        let back = integrate_adaptive(&oscillator, 10.0, 0.0, *fwd.last(), &tol, &rel).unwrap();
        assert!(back.last()[0].abs() < 2e-7);
        assert_eq!(*back.t.last().unwrap(), 0.0);
    }

    #[test]
    fn zero_state_is_accepted() {
        let tol = OdeTolerance::default();
        let rel = |o: &[f64; 1], n: &[f64; 1]| [o[0].abs().max(n[0].abs())];
        let tr = integrate_adaptive(&decay, 0.0, 1.0, [0.0], &tol, &rel).unwrap();
        assert_eq!(tr.last()[0], 0.0);
    }

    #[test]
    fn blow_up_is_reported() {
        let f = |_: f64, y: &[f64; 1]| [y[0] * y[0]];
        let tol = OdeTolerance {
            max_steps: 10_000,
            ..OdeTolerance::default()
        };
        let rel = |o: &[f64; 1], n: &[f64; 1]| [o[0].abs().max(n[0].abs())];
        assert!(integrate_adaptive(&f, 0.0, 2.0, [1.0], &tol, &rel).is_err());
    }
}
