//! Dormand–Prince 5(4) embedded pair with FSAL and the standard continuous
//! extension of order 4.

use crate::error::{IfflError, Result};
use crate::scalar::Scalar;

pub(crate) trait VectorField<T: Scalar, const N: usize> {
    fn eval(&self, t: T, y: &[T; N]) -> [T; N];

    /// Whether a proposed state may be accepted (positivity, finiteness).
    fn admissible(&self, y: &[T; N]) -> bool;

    /// Components measured in log space get an error scale of `atol + rtol`
    /// instead of `atol + rtol |y|`.
    fn log_component(&self, _i: usize) -> bool {
        false
    }
}

// Butcher tableau.
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// 5th minus embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct StepControl<T> {
    pub rtol: T,
    pub atol: T,
    pub max_step: T,
    /// Absolute step-size floor; going below it is reported as stiffness.
    pub h_min: T,
    /// Budget of attempted steps across all segments of one run.
    pub max_steps: usize,
}

/// An accepted step `[t0, t0 + h]` with enough data for dense output.
#[derive(Debug, Clone)]
pub(crate) struct AcceptedStep<T, const N: usize> {
    pub t0: T,
    pub h: T,
    pub y0: [T; N],
    pub y1: [T; N],
    /// Derivative at `(t0 + h, y1)`.
    pub f1: [T; N],
    cont: [[T; N]; 4],
}

impl<T: Scalar, const N: usize> AcceptedStep<T, N> {
    pub fn t1(&self) -> T {
        self.t0 + self.h
    }

    /// Interpolated state at `t` in `[t0, t0 + h]`.
    pub fn dense(&self, t: T) -> [T; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = T::one() - theta;
        let mut out = [T::zero(); N];
        for (i, slot) in out.iter_mut().enumerate() {
            let ydiff = self.cont[0][i];
            let bspl = self.cont[1][i];
            let r4 = self.cont[2][i];
            let r5 = self.cont[3][i];
            *slot = self.y0[i]
                + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)));
        }
        out
    }
}

/// What the observer wants after each accepted step.
pub(crate) enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Counters {
    pub accepted: usize,
    pub rejected: usize,
    pub positivity_rejections: usize,
    pub evaluations: usize,
}

pub(crate) struct SegmentOutcome<T, const N: usize> {
    #[cfg_attr(not(test), allow(dead_code))]
    pub t: T,
    pub y: [T; N],
    pub stopped: bool,
}

fn lin<T: Scalar, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for (coef, k) in terms {
        let c = T::lit(*coef) * h;
        for i in 0..N {
            out[i] = out[i] + c * k[i];
        }
    }
    out
}

fn scale<T: Scalar, const N: usize, F: VectorField<T, N>>(
    field: &F,
    ctl: &StepControl<T>,
    i: usize,
    a: T,
    b: T,
) -> T {
    if field.log_component(i) {
        ctl.atol + ctl.rtol
    } else {
        ctl.atol + ctl.rtol * a.abs().max(b.abs())
    }
}

fn initial_step<T: Scalar, const N: usize, F: VectorField<T, N>>(
    field: &F,
    ctl: &StepControl<T>,
    t0: T,
    y0: &[T; N],
    f0: &[T; N],
    span: T,
    counters: &mut Counters,
) -> T {
    let n = T::from_usize_lossy(N);
    let mut d0 = T::zero();
    let mut d1 = T::zero();
    for i in 0..N {
        let sc = scale(field, ctl, i, y0[i], y0[i]);
        d0 = d0 + (y0[i] / sc).powi(2);
        d1 = d1 + (f0[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let small = T::lit(1e-5);
    let mut h0 = if d0 < small || d1 < small {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    h0 = h0.min(span).min(ctl.max_step);
    let y1 = lin(y0, h0, &[(1.0, f0)]);
    let f1 = field.eval(t0 + h0, &y1);
    counters.evaluations += 1;
    let mut d2 = T::zero();
    for i in 0..N {
        let sc = scale(field, ctl, i, y0[i], y0[i]);
        d2 = d2 + ((f1[i] - f0[i]) / sc).powi(2);
    }
    let d2 = (d2 / n).sqrt() / h0;
    let dmax = d1.max(d2);
    let h1 = if !dmax.is_finite() {
        h0 * T::lit(1e-3)
    } else if dmax <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / dmax).powf(T::lit(0.2))
    };
    (h0 * T::lit(100.0))
        .min(h1)
        .min(span)
        .min(ctl.max_step)
        .max(ctl.h_min * T::lit(2.0))
}

/// Integrates `field` over `[t0, t1]` from `y0`, handing every accepted step to
/// `observer`. Returns early when the observer asks to stop.
pub(crate) fn solve_segment<T, const N: usize, F, O>(
    field: &F,
    ctl: &StepControl<T>,
    t0: T,
    t1: T,
    y0: [T; N],
    counters: &mut Counters,
    mut observer: O,
) -> Result<SegmentOutcome<T, N>>
where
    T: Scalar,
    F: VectorField<T, N>,
    O: FnMut(&AcceptedStep<T, N>) -> Control,
{
    let mut t = t0;
    let mut y = y0;
    if t1 <= t0 {
        return Ok(SegmentOutcome { t, y, stopped: false });
    }
    let mut k1 = field.eval(t, &y);
    counters.evaluations += 1;
    let mut h = initial_step(field, ctl, t, &y, &k1, t1 - t0, counters);
    let mut last_rejected = false;
    let safety = T::lit(0.9);
    let fac_min = T::lit(0.2);
    let fac_max = T::lit(10.0);
    let eps_t = T::epsilon() * T::lit(16.0) * t1.abs().max(T::one());

    loop {
        if t1 - t <= eps_t {
            return Ok(SegmentOutcome { t: t1, y, stopped: false });
        }
        if counters.accepted + counters.rejected >= ctl.max_steps {
            return Err(IfflError::NotConverged(format!(
                "step budget of {} exhausted at t = {}",
                ctl.max_steps, t
            )));
        }
        if h < ctl.h_min {
            return Err(IfflError::Stiffness {
                t: t.as_f64(),
                h: h.as_f64(),
            });
        }
        let last = t + h >= t1 - eps_t;
        if last {
            h = t1 - t;
        }

        let k2 = field.eval(t + T::lit(C2) * h, &lin(&y, h, &[(A21, &k1)]));
        let k3 = field.eval(t + T::lit(C3) * h, &lin(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = field.eval(
            t + T::lit(C4) * h,
            &lin(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = field.eval(
            t + T::lit(C5) * h,
            &lin(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = field.eval(
            t + h,
            &lin(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = lin(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        counters.evaluations += 5;

        let finite = y_new.iter().all(|v| v.is_finite());
        if !finite || !field.admissible(&y_new) {
            counters.rejected += 1;
            counters.positivity_rejections += usize::from(finite);
            h = h * T::lit(0.5);
            last_rejected = true;
            continue;
        }

        let k7 = field.eval(t + h, &y_new);
        counters.evaluations += 1;

        let mut err = T::zero();
        for i in 0..N {
            let e = h
                * (T::lit(E1) * k1[i]
                    + T::lit(E3) * k3[i]
                    + T::lit(E4) * k4[i]
                    + T::lit(E5) * k5[i]
                    + T::lit(E6) * k6[i]
                    + T::lit(E7) * k7[i]);
            let sc = scale(field, ctl, i, y[i], y_new[i]);
            err = err + (e / sc).powi(2);
        }
        let err = (err / T::from_usize_lossy(N)).sqrt();

        if !err.is_finite() || !k7.iter().all(|v| v.is_finite()) {
            counters.rejected += 1;
            h = h * T::lit(0.5);
            last_rejected = true;
            continue;
        }

        if err > T::one() {
            counters.rejected += 1;
            let fac = (safety * err.powf(T::lit(-0.2))).max(fac_min);
            h = h * fac;
            last_rejected = true;
            continue;
        }

        // accepted
        counters.accepted += 1;
        let mut cont = [[T::zero(); N]; 4];
        for i in 0..N {
            let ydiff = y_new[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            cont[0][i] = ydiff;
            cont[1][i] = bspl;
            cont[2][i] = ydiff - h * k7[i] - bspl;
            cont[3][i] = h
                * (T::lit(D1) * k1[i]
                    + T::lit(D3) * k3[i]
                    + T::lit(D4) * k4[i]
                    + T::lit(D5) * k5[i]
                    + T::lit(D6) * k6[i]
                    + T::lit(D7) * k7[i]);
        }
        let step = AcceptedStep {
            t0: t,
            h,
            y0: y,
            y1: y_new,
            f1: k7,
            cont,
        };
        t = if last { t1 } else { t + h };
        y = y_new;
        k1 = k7;

        if let Control::Stop = observer(&step) {
            return Ok(SegmentOutcome { t, y, stopped: true });
        }

        let mut fac = if err == T::zero() {
            fac_max
        } else {
            (safety * err.powf(T::lit(-0.2))).min(fac_max).max(fac_min)
        };
        if last_rejected {
            fac = fac.min(T::one());
        }
        last_rejected = false;
        h = (h * fac).min(ctl.max_step);
    }
}
