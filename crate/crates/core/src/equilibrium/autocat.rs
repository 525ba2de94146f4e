use crate::error::{IfflError, Result};
use crate::model::{hill_derivative, reaction_term_f, ModelParams, Variant};
use crate::scalar::Scalar;

use super::roots::{all_roots, mixed_grid, SCAN_POINTS};
use super::{EquilibriumReport, EquilibriumSource};

const WIDEN_ATTEMPTS: usize = 4;

fn require_production<T: Scalar>(params: &ModelParams<T>, operation: &'static str) -> Result<()> {
    params.validate()?;
    if params.variant != Variant::ProductionInhibition {
        return Err(IfflError::UnsupportedVariant {
            operation,
            variant: params.variant.name(),
        });
    }
    Ok(())
}

fn root_tol<T: Scalar>(scale: T) -> T {
    T::lit(1e-12) * (T::one() + scale.abs())
}

/// Positive roots of `h` on `(0, hi]` where `h(0+) > 0`. The lower end of the
/// grid is pushed towards zero until `h` is positive there.
fn positive_roots<T: Scalar>(h: impl Fn(T) -> T, hi: T, ftol: T, what: &str) -> Result<Vec<T>> {
    let mut lo = hi * T::lit(1e-12);
    for _ in 0..=WIDEN_ATTEMPTS {
        if h(lo) > ftol {
            let grid = mixed_grid(lo, hi, SCAN_POINTS);
            return Ok(all_roots(&h, &grid, ftol));
        }
        lo = lo * T::lit(1e-6);
        if lo <= T::min_positive_value() {
            break;
        }
    }
    Err(IfflError::RootScan(format!(
        "{what}: root at the lower end of the scan interval, down to y = {lo}"
    )))
}

/// Interior equilibria `p, y > 0` of the reduced system with the Hill term.
///
/// Roots of `g(y) = a + lambda - kappa y + (b/c) f(y)` on `(0, (a + lambda)/kappa]`,
/// each mapped to `p = (a + lambda - kappa y) / b`. Empty when `a + lambda <= 0`
/// (the origin is then the only equilibrium, see [`super::origin_report`]).
/// Works for `V = 0` too, returning the single linear equilibrium.
pub fn equilibria_autocat<T: Scalar>(params: &ModelParams<T>) -> Result<Vec<EquilibriumReport<T>>> {
    require_production(params, "equilibria_autocat")?;
    let growth = params.a + params.lambda;
    if !(growth > T::zero()) {
        return Ok(Vec::new());
    }
    let b_over_c = params.b / params.c;
    let g = |y: T| growth - params.kappa * y + b_over_c * reaction_term_f(params, y);
    let y_max = growth / params.kappa;
    let roots = positive_roots(g, y_max, root_tol(growth), "equilibria_autocat")?;
    let p_floor = T::lit(1e-12) * (T::one() + growth / params.b);
    Ok(roots
        .into_iter()
        .filter_map(|y| {
            let p = (growth - params.kappa * y) / params.b;
            (p > p_floor).then(|| EquilibriumReport::at(params, p, y, EquilibriumSource::RootScan))
        })
        .collect())
}

/// Equilibria on the `p = 0` axis: the origin and every `y > 0` with `f(y) = 0`.
/// At these `u` decays or grows at rate `lambda - kappa y` while `x` keeps pace.
pub fn boundary_equilibria<T: Scalar>(params: &ModelParams<T>) -> Result<Vec<EquilibriumReport<T>>> {
    require_production(params, "boundary_equilibria")?;
    let mut out = vec![EquilibriumReport::at(
        params,
        T::zero(),
        T::zero(),
        EquilibriumSource::ClosedForm,
    )];
    if params.autocatalytic() {
        // f(y) = y (H(y)/y - delta); H(y)/y -> V/K at 0+ when n = 1, 0 when n > 1
        let hi = params.v_max / params.delta * T::lit(1.01);
        let per_y = |y: T| reaction_term_f(params, y) / y;
        let grid = mixed_grid(hi * T::lit(1e-12), hi, SCAN_POINTS);
        for y in all_roots(per_y, &grid, root_tol(params.delta)) {
            out.push(EquilibriumReport::at(params, T::zero(), y, EquilibriumSource::RootScan));
        }
    }
    Ok(out)
}

/// Stable levels of the driven output `y' = q + f(y)`, ascending.
pub fn stable_output_levels<T: Scalar>(params: &ModelParams<T>, q: T) -> Result<Vec<T>> {
    require_production(params, "stable_output_levels")?;
    if !(q > T::zero()) || !q.is_finite() {
        return Err(IfflError::InvalidInput(format!(
            "drive q must be positive and finite, got {q}"
        )));
    }
    let h = |y: T| q + reaction_term_f(params, y);
    let hi = (q + params.v_max) / params.delta * T::lit(1.01);
    let roots = positive_roots(h, hi, root_tol(q), "stable_output_levels")?;
    Ok(roots
        .into_iter()
        .filter(|&y| hill_derivative(params, y) - params.delta < T::zero())
        .collect())
}

/// Values of `lambda` in `[lo, hi]` at which an interior equilibrium has
/// `mu = 0`: roots of `f(y) = -ac/b`, mapped through
/// `lambda = kappa y - (b/c) f(y) - a`. Sorted ascending.
pub fn switch_lambdas<T: Scalar>(params: &ModelParams<T>, range: (T, T)) -> Result<Vec<T>> {
    require_production(params, "switch_lambdas")?;
    let (lo, hi) = range;
    if !(lo <= hi) {
        return Err(IfflError::InvalidInput(format!(
            "lambda range must satisfy lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let target = params.a * params.c / params.b;
    let h = |y: T| target + reaction_term_f(params, y);
    let y_hi = (target + params.v_max) / params.delta * T::lit(1.01);
    let roots = positive_roots(h, y_hi, root_tol(target), "switch_lambdas")?;
    let b_over_c = params.b / params.c;
    let mut lambdas: Vec<T> = roots
        .into_iter()
        .map(|y| params.kappa * y - b_over_c * reaction_term_f(params, y) - params.a)
        .filter(|&l| l >= lo && l <= hi)
        .collect();
    lambdas.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    Ok(lambdas)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Uniqueness {
    /// `g` is strictly decreasing, so there is at most one interior root.
    Guaranteed,
    /// The slope bound fails; several roots are possible.
    NotGuaranteed,
    /// `n <= 1`: the Hill slope is largest at `y = 0+`, the test does not apply.
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessCheck<T> {
    pub status: Uniqueness,
    /// `y` at which the Hill slope peaks, `((n-1)/(n+1))^(1/n) K`.
    pub y_star: Option<T>,
    /// Peak Hill slope `H'(y_star)`.
    pub max_hill_slope: Option<T>,
    /// `kappa + b delta / c`.
    pub bound: T,
    /// `bound - (b/c) H'(y_star)`; positive when uniqueness is guaranteed.
    pub margin: Option<T>,
}

impl<T> UniquenessCheck<T> {
    pub fn unique(&self) -> bool {
        self.status == Uniqueness::Guaranteed
    }
}

/// Sufficient condition for a single interior equilibrium.
///
/// `g'(y) = -kappa - b delta / c + (b/c) H'(y)`, so `g` decreases strictly
/// when `(b/c) max H' < kappa + b delta / c`.
pub fn uniqueness_condition<T: Scalar>(params: &ModelParams<T>) -> Result<UniquenessCheck<T>> {
    params.validate()?;
    let bound = params.kappa + params.b * params.delta / params.c;
    if !params.autocatalytic() {
        return Ok(UniquenessCheck {
            status: Uniqueness::Guaranteed,
            y_star: None,
            max_hill_slope: Some(T::zero()),
            bound,
            margin: Some(bound),
        });
    }
    let n = params.n_hill;
    if n <= T::one() {
        return Ok(UniquenessCheck {
            status: Uniqueness::NotApplicable,
            y_star: None,
            max_hill_slope: None,
            bound,
            margin: None,
        });
    }
    let y_star = ((n - T::one()) / (n + T::one())).powf(n.recip()) * params.k_half;
    let slope = hill_derivative(params, y_star);
    let margin = bound - params.b / params.c * slope;
    Ok(UniquenessCheck {
        status: if margin > T::zero() {
            Uniqueness::Guaranteed
        } else {
            Uniqueness::NotGuaranteed
        },
        y_star: Some(y_star),
        max_hill_slope: Some(slope),
        bound,
        margin: Some(margin),
    })
}
