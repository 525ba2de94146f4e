use rayon::prelude::*;

use crate::equilibrium::{boundary_equilibria, EquilibriumReport};
use crate::error::{IfflError, Result};
use crate::model::ModelParams;
use crate::scalar::Scalar;

use super::cell::{algebraic_cell, simulated_cell, AlgebraicCell, SimulatedCell};
use super::{Axis, SweepLabel, SweepSpec};

/// Relative distance within which a simulated end state is attributed to an equilibrium.
/// Loose because degenerate equilibria are approached only algebraically in time.
const SELECT_TOL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapCell<T> {
    pub row: usize,
    pub col: usize,
    /// Value of the first axis parameter.
    pub v1: T,
    /// Value of the second axis parameter.
    pub v2: T,
    pub algebraic: Option<AlgebraicCell<T>>,
    pub simulated: Option<SimulatedCell<T>>,
    /// `mu` of the equilibrium the simulation settled on, or of the only
    /// equilibrium when no simulation was run.
    pub selected_mu: Option<T>,
    /// Simulation label when simulated, else the algebraic label.
    pub label: SweepLabel,
    pub error: Option<String>,
}

/// Row-major grid: rows follow `axis1`, columns `axis2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap<T> {
    pub axis1: Axis<T>,
    pub axis2: Axis<T>,
    pub cells: Vec<HeatmapCell<T>>,
}

impl<T: Scalar> Heatmap<T> {
    pub fn rows(&self) -> usize {
        self.axis1.count
    }

    pub fn cols(&self) -> usize {
        self.axis2.count
    }

    pub fn cell(&self, row: usize, col: usize) -> &HeatmapCell<T> {
        &self.cells[row * self.axis2.count + col]
    }
}

/// Evaluates every `(axis1, axis2)` cell; per-cell failures are recorded in
/// the cell and never abort the grid.
pub fn heatmap<T: Scalar>(params: &ModelParams<T>, spec: &SweepSpec<T>) -> Result<Heatmap<T>> {
    spec.validate()?;
    let axis2 = spec
        .axis2
        .ok_or_else(|| IfflError::InvalidConfig("heatmap needs a second sweep axis".into()))?;
    let axis1 = spec.axis1;
    let (v1s, v2s) = (axis1.values(), axis2.values());
    let jobs: Vec<(usize, usize)> = (0..v1s.len())
        .flat_map(|r| (0..v2s.len()).map(move |c| (r, c)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(row, col)| {
            let cell_params = params
                .with(axis1.param, v1s[row])
                .with(axis2.param, v2s[col]);
            evaluate_cell(&cell_params, spec, row, col, v1s[row], v2s[col])
        })
        .collect();
    Ok(Heatmap {
        axis1,
        axis2,
        cells,
    })
}

fn evaluate_cell<T: Scalar>(
    params: &ModelParams<T>,
    spec: &SweepSpec<T>,
    row: usize,
    col: usize,
    v1: T,
    v2: T,
) -> HeatmapCell<T> {
    let mut cell = HeatmapCell {
        row,
        col,
        v1,
        v2,
        algebraic: None,
        simulated: None,
        selected_mu: None,
        label: SweepLabel::Indeterminate,
        error: None,
    };
    if let Err(e) = params.validate() {
        cell.error = Some(e.to_string());
        return cell;
    }
    if spec.method.algebraic() {
        match algebraic_cell(params) {
            Ok(a) => {
                cell.label = a.label;
                if a.mus.len() == 1 {
                    cell.selected_mu = Some(a.mus[0]);
                }
                cell.algebraic = Some(a);
            }
            Err(e) => cell.error = Some(e.to_string()),
        }
    }
    if spec.method.simulation() {
        let sim = simulated_cell(params, spec);
        cell.label = sim.label;
        cell.selected_mu = sim
            .final_py
            .and_then(|end| select_equilibrium(params, cell.algebraic.as_ref(), end))
            .map(|e| e.mu);
        if let Some(msg) = &sim.error {
            cell.error.get_or_insert_with(|| msg.clone());
        }
        cell.simulated = Some(sim);
    }
    cell
}

/// The equilibrium (interior or on the `p = 0` axis) closest to the
/// simulated end state, if it is close enough to have been reached.
fn select_equilibrium<T: Scalar>(
    params: &ModelParams<T>,
    algebraic: Option<&AlgebraicCell<T>>,
    (p, y): (T, T),
) -> Option<EquilibriumReport<T>> {
    let mut candidates: Vec<EquilibriumReport<T>> = match algebraic {
        Some(a) => a.equilibria.clone(),
        None => crate::equilibrium::equilibria_autocat(params).unwrap_or_default(),
    };
    candidates.extend(boundary_equilibria(params).unwrap_or_default());
    candidates
        .into_iter()
        .map(|e| ((e.p_bar - p).hypot(e.y_bar - y), e))
        .filter(|(d, e)| *d <= T::lit(SELECT_TOL) * (T::one() + e.p_bar.hypot(e.y_bar)))
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(_, e)| e)
}

#[cfg(test)]
mod tests {
    use super::super::SweepMethod;
    use super::*;
    use crate::equilibrium::closed_loop_equilibrium_linear;
    use crate::model::ParamName;

    fn band_grid_model() -> ModelParams<f64> {
        ModelParams::<f64>::new(0.8, 1.0, 0.1, 1.0, 20.0, 0.0).with_autocatalysis(1.95, 1.0, 2.0)
    }

    #[test]
    fn band_grid_column_has_four_bands() {
        let spec = SweepSpec::new(Axis::new(ParamName::Kappa, 20.0, 20.0, 1))
            .with_axis2(Axis::new(ParamName::Lambda, 0.0, 30.0, 31))
            .with_method(SweepMethod::Algebraic);
        let h = heatmap(&band_grid_model(), &spec).unwrap();
        assert_eq!((h.rows(), h.cols()), (1, 31));
        let mut signs: Vec<bool> = Vec::new();
        for c in &h.cells {
            let positive = c.selected_mu.unwrap() > 0.0;
            if signs.last() != Some(&positive) {
                signs.push(positive);
            }
        }
        assert_eq!(signs, vec![false, true, false, true]);
    }

    #[test]
    fn linear_grid_boundary_follows_threshold_line() {
        // mu changes sign where c a kappa = b delta lambda, i.e. lambda = (ca/(b delta)) kappa
        let params = ModelParams::<f64>::new(0.5, 1.0, 2.0, 1.0, 1.0, 0.0);
        let spec = SweepSpec::new(Axis::new(ParamName::Kappa, 0.5, 3.0, 11))
            .with_axis2(Axis::new(ParamName::Lambda, 0.0, 4.0, 401))
            .with_method(SweepMethod::Algebraic);
        let h = heatmap(&params, &spec).unwrap();
        let mut ks = Vec::new();
        let mut ls = Vec::new();
        for row in 0..h.rows() {
            let cross = (0..h.cols() - 1)
                .find(|&c| h.cell(row, c).selected_mu.unwrap() < 0.0 && h.cell(row, c + 1).selected_mu.unwrap() >= 0.0)
                .unwrap();
            let (a, b) = (h.cell(row, cross), h.cell(row, cross + 1));
            let (ma, mb) = (a.selected_mu.unwrap(), b.selected_mu.unwrap());
            ks.push(a.v1);
            ls.push(a.v2 + (b.v2 - a.v2) * ma / (ma - mb));
        }
        let n = ks.len() as f64;
        let (mk, ml) = (ks.iter().sum::<f64>() / n, ls.iter().sum::<f64>() / n);
        let slope = ks.iter().zip(&ls).map(|(k, l)| (k - mk) * (l - ml)).sum::<f64>()
            / ks.iter().map(|k| (k - mk).powi(2)).sum::<f64>();
        let want = params.c * params.a / (params.b * params.delta);
        assert!((slope - want).abs() < 0.01 * want, "slope {slope} vs {want}");
    }

    #[test]
    fn single_cell_equals_equilibrium_report() {
        let params = ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 2.0, 1.0);
        let spec = SweepSpec::new(Axis::new(ParamName::Kappa, 2.0, 2.0, 1))
            .with_axis2(Axis::new(ParamName::Lambda, 1.0, 1.0, 1));
        let h = heatmap(&params, &spec).unwrap();
        assert_eq!(h.cells.len(), 1);
        let c = &h.cells[0];
        let eq = closed_loop_equilibrium_linear(&params).unwrap();
        let alg = c.algebraic.as_ref().unwrap();
        assert!((alg.equilibria[0].y_bar - eq.y_bar).abs() < 1e-12);
        assert!((c.selected_mu.unwrap() - eq.mu).abs() < 1e-9);
        assert_eq!(c.label, SweepLabel::Elimination);
    }

    #[test]
    fn bad_cells_are_flagged_not_fatal() {
        let params = ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0, 2.0, 1.0);
        let spec = SweepSpec::new(Axis::new(ParamName::Kappa, -1.0, 1.0, 3))
            .with_axis2(Axis::new(ParamName::Lambda, 0.0, 1.0, 2))
            .with_method(SweepMethod::Algebraic);
        let h = heatmap(&params, &spec).unwrap();
        assert!(h.cell(0, 0).error.is_some());
        assert_eq!(h.cell(0, 0).label, SweepLabel::Indeterminate);
        assert!(h.cell(2, 1).error.is_none());
    }

    #[test]
    fn simulation_selects_boundary_equilibrium() {
        // a = 0.1 set: from x = y = u = 1 the run is captured by (p, y) = (0, 1)
        let params = ModelParams::<f64>::new(0.1, 1.0, 0.1, 1.0, 20.0, 10.0).with_autocatalysis(2.0, 1.0, 2.0);
        let spec = SweepSpec::new(Axis::new(ParamName::Lambda, 10.0, 10.0, 1))
            .with_axis2(Axis::new(ParamName::Kappa, 20.0, 20.0, 1))
            .with_method(SweepMethod::Both);
        let h = heatmap(&params, &spec).unwrap();
        let c = &h.cells[0];
        assert_eq!(c.label, SweepLabel::Elimination);
        assert_eq!(c.algebraic.as_ref().unwrap().label, SweepLabel::Proliferation);
        assert!((c.selected_mu.unwrap() + 10.0).abs() < 0.2, "{:?}", c.selected_mu);
    }
}
