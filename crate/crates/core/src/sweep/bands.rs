use rayon::prelude::*;

use crate::equilibrium::switch_lambdas;
use crate::error::{IfflError, Result};
use crate::model::{ModelParams, ParamName};
use crate::scalar::Scalar;

use super::cell::{algebraic_cell, simulated_cell};
use super::{SweepLabel, SweepMethod, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryMethod {
    Algebraic,
    Simulation,
}

impl BoundaryMethod {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryMethod::Algebraic => "algebraic",
            BoundaryMethod::Simulation => "simulation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary<T> {
    pub value: T,
    pub method: BoundaryMethod,
}

/// Classification of one grid value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint<T> {
    pub value: T,
    pub label: SweepLabel,
    /// `mu` of the equilibrium (algebraic, single root only) or fitted `ln u`
    /// slope (simulation).
    pub rate: Option<T>,
}

/// Outcome bands along `lambda`: `labels[i]` holds between `boundaries[i-1]`
/// and `boundaries[i]`. Adjacent labels always differ.
#[derive(Debug, Clone, PartialEq)]
pub struct BandReport<T> {
    pub method: BoundaryMethod,
    pub boundaries: Vec<Boundary<T>>,
    pub labels: Vec<SweepLabel>,
    pub points: Vec<SweepPoint<T>>,
}

impl<T: Scalar> BandReport<T> {
    pub fn boundary_values(&self) -> Vec<T> {
        self.boundaries.iter().map(|b| b.value).collect()
    }
}

/// Result of [`lambda_sweep`]; a report per requested method.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSweep<T> {
    pub algebraic: Option<BandReport<T>>,
    pub simulation: Option<BandReport<T>>,
    /// Grid values where both methods gave a determinate label and they differ.
    pub disagreements: Vec<T>,
}

/// Sweeps `lambda` over `spec.axis1` and reports outcome bands.
///
/// Algebraic bands come from the switch locus plus any label change between
/// grid points (bisected on the equilibrium labels); every band is labelled
/// by its midpoint. Simulation bands classify each grid point from
/// `spec.initial_state` and bisect every label change down to
/// `span * spec.bisect_fraction`; indeterminate points are skipped.
pub fn lambda_sweep<T: Scalar>(params: &ModelParams<T>, spec: &SweepSpec<T>) -> Result<LambdaSweep<T>> {
    spec.validate()?;
    if spec.axis1.param != ParamName::Lambda {
        return Err(IfflError::InvalidConfig(format!(
            "lambda_sweep needs lambda as the first axis, got {}",
            spec.axis1.param
        )));
    }
    params.validate()?;
    let algebraic = if spec.method.algebraic() {
        Some(algebraic_bands(params, spec)?)
    } else {
        None
    };
    let simulation = if spec.method.simulation() {
        Some(simulation_bands(params, spec))
    } else {
        None
    };
    let disagreements = match (&algebraic, &simulation) {
        (Some(a), Some(s)) => a
            .points
            .iter()
            .zip(&s.points)
            .filter(|(pa, ps)| {
                pa.label.determinate() && ps.label.determinate() && pa.label != ps.label
            })
            .map(|(pa, _)| pa.value)
            .collect(),
        _ => Vec::new(),
    };
    Ok(LambdaSweep {
        algebraic,
        simulation,
        disagreements,
    })
}

fn algebraic_label<T: Scalar>(params: &ModelParams<T>, lambda: T) -> (SweepLabel, Option<T>) {
    match algebraic_cell(&params.with_lambda(lambda)) {
        Ok(cell) => {
            let rate = (cell.mus.len() == 1).then(|| cell.mus[0]);
            (cell.label, rate)
        }
        Err(_) => (SweepLabel::Indeterminate, None),
    }
}

fn bisect_labels<T: Scalar>(
    label_at: impl Fn(T) -> SweepLabel,
    mut lo: T,
    mut hi: T,
    lo_label: SweepLabel,
    hi_label: SweepLabel,
    width: T,
) -> T {
    while hi - lo > width {
        let mid = lo + (hi - lo) * T::lit(0.5);
        let l = label_at(mid);
        if l == lo_label {
            lo = mid;
        } else if l == hi_label {
            hi = mid;
        } else {
            break;
        }
    }
    lo + (hi - lo) * T::lit(0.5)
}

/// Collapses runs of equal labels, keeping the boundary list consistent.
fn merge_bands<T: Scalar>(
    labels: Vec<SweepLabel>,
    boundaries: Vec<Boundary<T>>,
) -> (Vec<SweepLabel>, Vec<Boundary<T>>) {
    let mut out_labels = Vec::with_capacity(labels.len());
    let mut out_bounds = Vec::with_capacity(boundaries.len());
    for (i, label) in labels.into_iter().enumerate() {
        if let Some(&prev) = out_labels.last() {
            if prev == label {
                continue;
            }
            out_bounds.push(boundaries[i - 1]);
        }
        out_labels.push(label);
    }
    (out_labels, out_bounds)
}

fn algebraic_bands<T: Scalar>(params: &ModelParams<T>, spec: &SweepSpec<T>) -> Result<BandReport<T>> {
    let axis = &spec.axis1;
    let values = axis.values();
    let points: Vec<SweepPoint<T>> = values
        .par_iter()
        .map(|&lambda| {
            let (label, rate) = algebraic_label(params, lambda);
            SweepPoint {
                value: lambda,
                label,
                rate,
            }
        })
        .collect();

    let mut cuts = switch_lambdas(params, (axis.min, axis.max))?;
    let width = axis.span() * spec.bisect_fraction;
    for pair in points.windows(2) {
        let (l, r) = (pair[0], pair[1]);
        let covered = cuts.iter().any(|&s| s >= l.value && s <= r.value);
        if l.label != r.label && !covered {
            cuts.push(bisect_labels(
                |x| algebraic_label(params, x).0,
                l.value,
                r.value,
                l.label,
                r.label,
                width,
            ));
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

    let mut edges = vec![axis.min];
    edges.extend(cuts.iter().copied());
    edges.push(axis.max);
    let labels: Vec<SweepLabel> = edges
        .windows(2)
        .map(|e| algebraic_label(params, e[0] + (e[1] - e[0]) * T::lit(0.5)).0)
        .collect();
    let boundaries = cuts
        .into_iter()
        .map(|value| Boundary {
            value,
            method: BoundaryMethod::Algebraic,
        })
        .collect();
    let (labels, boundaries) = merge_bands(labels, boundaries);
    Ok(BandReport {
        method: BoundaryMethod::Algebraic,
        boundaries,
        labels,
        points,
    })
}

fn simulation_bands<T: Scalar>(params: &ModelParams<T>, spec: &SweepSpec<T>) -> BandReport<T> {
    let axis = &spec.axis1;
    let label_at = |lambda: T| simulated_cell(&params.with_lambda(lambda), spec);
    let points: Vec<SweepPoint<T>> = axis
        .values()
        .par_iter()
        .map(|&lambda| {
            let cell = label_at(lambda);
            SweepPoint {
                value: lambda,
                label: cell.label,
                rate: cell.slope,
            }
        })
        .collect();

    let determinate: Vec<SweepPoint<T>> =
        points.iter().copied().filter(|p| p.label.determinate()).collect();
    let changes: Vec<(SweepPoint<T>, SweepPoint<T>)> = determinate
        .windows(2)
        .filter(|w| w[0].label != w[1].label)
        .map(|w| (w[0], w[1]))
        .collect();
    let width = axis.span() * spec.bisect_fraction;
    let boundaries: Vec<Boundary<T>> = changes
        .par_iter()
        .map(|(l, r)| Boundary {
            value: bisect_labels(
                |x| label_at(x).label,
                l.value,
                r.value,
                l.label,
                r.label,
                width,
            ),
            method: BoundaryMethod::Simulation,
        })
        .collect();
    let labels = match determinate.first() {
        None => vec![SweepLabel::Indeterminate],
        Some(first) => std::iter::once(first.label)
            .chain(changes.iter().map(|(_, r)| r.label))
            .collect(),
    };
    BandReport {
        method: BoundaryMethod::Simulation,
        boundaries,
        labels,
        points,
    }
}

/// Extent of one band. `lo`/`hi` are `None` for the half-infinite edge bands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandWidth<T> {
    pub label: SweepLabel,
    pub lo: Option<T>,
    pub hi: Option<T>,
    /// `hi / lo`; `None` (unbounded) for edge bands or when `lo <= 0`.
    pub fold: Option<T>,
}

/// Fold widths of all bands of a report; empty when there are no boundaries.
pub fn band_widths<T: Scalar>(report: &BandReport<T>) -> Vec<BandWidth<T>> {
    if report.boundaries.is_empty() {
        return Vec::new();
    }
    let last = report.labels.len() - 1;
    report
        .labels
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let lo = (i > 0).then(|| report.boundaries[i - 1].value);
            let hi = (i < last).then(|| report.boundaries[i].value);
            let fold = match (lo, hi) {
                (Some(l), Some(h)) if l > T::zero() => Some(h / l),
                _ => None,
            };
            BandWidth { label, lo, hi, fold }
        })
        .collect()
}

/// Band fold widths from the algebraic band structure over `lambda_range`.
pub fn band_width_report<T: Scalar>(
    params: &ModelParams<T>,
    lambda_range: (T, T),
) -> Result<Vec<BandWidth<T>>> {
    let spec = SweepSpec::lambda(lambda_range.0, lambda_range.1, 401)
        .with_method(SweepMethod::Algebraic);
    let sweep = lambda_sweep(params, &spec)?;
    Ok(sweep.algebraic.as_ref().map(band_widths).unwrap_or_default())
}
