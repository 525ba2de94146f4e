//! Nullclines of the reduced `(p, y)` system for phase-plane plots.

use crate::equilibrium::roots::{all_roots, mixed_grid};
use crate::error::{IfflError, Result};
use crate::model::{reaction_term_f, ModelParams, Variant};
use crate::scalar::Scalar;

/// Grid used per abscissa when solving the implicit `y` nullcline.
const Y_SCAN_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NullclineComponent {
    /// `p = 0`, part of the `p` nullcline.
    PAxis,
    /// `y = (a + lambda - b p) / kappa`, the other part of the `p` nullcline.
    PLine,
    /// `c p + f(y) = 0`.
    YCurve,
}

impl NullclineComponent {
    pub fn name(self) -> &'static str {
        match self {
            NullclineComponent::PAxis => "p_axis",
            NullclineComponent::PLine => "p_line",
            NullclineComponent::YCurve => "y_nullcline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullclinePoint<T> {
    pub component: NullclineComponent,
    pub p: T,
    pub y: T,
}

/// Samples each nullcline component at `points` abscissae over the window
/// `[0, p_max] x [0, y_max]`. The `y` nullcline may have several branches; every
/// root in `(0, y_max]` is reported.
pub fn nullclines<T: Scalar>(
    params: &ModelParams<T>,
    p_max: T,
    y_max: T,
    points: usize,
) -> Result<Vec<NullclinePoint<T>>> {
    params.validate()?;
    if params.variant != Variant::ProductionInhibition {
        return Err(IfflError::UnsupportedVariant {
            operation: "nullclines",
            variant: params.variant.name(),
        });
    }
    if points < 2 || !(p_max > T::zero()) || !(y_max > T::zero()) {
        return Err(IfflError::InvalidConfig(format!(
            "nullcline window needs positive extents and >= 2 points (p_max = {p_max}, y_max = {y_max}, points = {points})"
        )));
    }
    let at = |i: usize, hi: T| hi * T::from_usize_lossy(i) / T::from_usize_lossy(points - 1);
    let mut out = Vec::with_capacity(4 * points);
    for i in 0..points {
        out.push(NullclinePoint {
            component: NullclineComponent::PAxis,
            p: T::zero(),
            y: at(i, y_max),
        });
    }
    for i in 0..points {
        let p = at(i, p_max);
        let y = (params.a + params.lambda - params.b * p) / params.kappa;
        if y >= T::zero() {
            out.push(NullclinePoint {
                component: NullclineComponent::PLine,
                p,
                y,
            });
        }
    }
    let grid = mixed_grid(y_max * T::lit(1e-9), y_max, Y_SCAN_POINTS);
    let ftol = T::lit(1e-12) * (T::one() + params.c * p_max);
    for i in 0..points {
        let p = at(i, p_max);
        if p == T::zero() {
            out.push(NullclinePoint {
                component: NullclineComponent::YCurve,
                p,
                y: T::zero(),
            });
        }
        for y in all_roots(|y| params.c * p + reaction_term_f(params, y), &grid, ftol) {
            out.push(NullclinePoint {
                component: NullclineComponent::YCurve,
                p,
                y,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_ref_nullclines_are_straight_lines() {
        let params = ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 2.0, 1.0);
        let pts = nullclines(&params, 2.0, 2.0, 512).unwrap();
        let count = |c| pts.iter().filter(|q| q.component == c).count();
        assert_eq!(count(NullclineComponent::PAxis), 512);
        assert_eq!(count(NullclineComponent::PLine), 512);
        for q in &pts {
            match q.component {
                NullclineComponent::PAxis => assert_eq!(q.p, 0.0),
                NullclineComponent::PLine => assert!((q.y - (2.0 - q.p) / 2.0).abs() < 1e-15),
                NullclineComponent::YCurve => assert!((q.y - q.p).abs() < 1e-10, "{q:?}"),
            }
        }
        // y = cp/delta stays inside the window for p <= 2
        assert_eq!(count(NullclineComponent::YCurve), 512);
    }

    #[test]
    fn hill_nullcline_has_three_branches_somewhere() {
        let params = ModelParams::<f64>::new(1.0, 1.0, 1.0, 3.0, 0.01, 0.0).with_autocatalysis(10.0, 2.0, 2.0);
        let pts = nullclines(&params, 2.0, 5.0, 64).unwrap();
        let mut max_branches = 0;
        for i in 0..64 {
            let p = 2.0 * i as f64 / 63.0;
            let n = pts
                .iter()
                .filter(|q| q.component == NullclineComponent::YCurve && q.p == p)
                .count();
            max_branches = max_branches.max(n);
        }
        assert_eq!(max_branches, 3);
        for q in pts.iter().filter(|q| q.component == NullclineComponent::YCurve && q.y > 0.0) {
            assert!((q.p + reaction_term_f(&params, q.y)).abs() < 1e-9);
        }
    }
}
