use std::panic::{self, AssertUnwindSafe};

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use super::lp::LinearProgram;

/// Largest accepted `‖A·x − b‖∞` and bound violation of an optimal point.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The solver failed or returned a point outside the tolerances.
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FluxSolution {
    pub status: LpStatus,
    /// Objective value; `0` unless optimal.
    pub objective: f64,
    /// Value of every LP variable, in variable order; empty unless optimal.
    pub fluxes: Vec<f64>,
    /// `‖A·x − b‖∞` of the returned point.
    pub residual: f64,
    pub bound_violation: f64,
}

impl FluxSolution {
    fn failed(status: LpStatus) -> Self {
        Self { status, objective: 0.0, fluxes: Vec::new(), residual: 0.0, bound_violation: 0.0 }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solves `lp` with a bounded dual simplex.
///
/// Empty boxes (`l > u`) and empty rows with a non-zero right-hand side are
/// reported as infeasible without calling the solver. An optimal point whose
/// residual or bound violation exceeds [`FEASIBILITY_TOLERANCE`] after
/// snapping near-bound values onto their bounds is reported as
/// [`LpStatus::NumericalFailure`], never as optimal.
pub fn solve_lp(lp: &LinearProgram) -> FluxSolution {
    if lp.variables.iter().any(|v| v.lower.is_nan() || v.upper.is_nan() || v.objective.is_nan()) {
        return FluxSolution::failed(LpStatus::NumericalFailure);
    }
    if lp.variables.iter().any(|v| v.lower > v.upper) {
        return FluxSolution::failed(LpStatus::Infeasible);
    }
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = lp.variables.iter().map(|v| problem.add_var(v.objective, (v.lower, v.upper))).collect();
    for row in &lp.rows {
        let mut terms: Vec<(usize, f64)> = row.coefficients.iter().copied().filter(|&(_, a)| a != 0.0).collect();
        terms.sort_by_key(|&(j, _)| j);
        // Merge repeated variables; the solver requires distinct entries.
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (j, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        if merged.is_empty() {
            if row.rhs != 0.0 {
                return FluxSolution::failed(LpStatus::Infeasible);
            }
            continue;
        }
        let expr: Vec<_> = merged.iter().map(|&(j, a)| (vars[j], a)).collect();
        problem.add_constraint(expr.as_slice(), ComparisonOp::Eq, row.rhs);
    }

    let outcome = panic::catch_unwind(AssertUnwindSafe(|| problem.solve()));
    let solution = match outcome {
        Err(_) => {
            log::warn!("LP solver panicked on `{}`", lp.name);
            return FluxSolution::failed(LpStatus::NumericalFailure);
        }
        Ok(Err(minilp::Error::Infeasible)) => return FluxSolution::failed(LpStatus::Infeasible),
        Ok(Err(minilp::Error::Unbounded)) => return FluxSolution::failed(LpStatus::Unbounded),
        Ok(Ok(s)) => s,
    };

    let mut x: Vec<f64> = vars.iter().map(|&v| solution[v]).collect();
    // The solver may hand back infinite values instead of reporting an
    // unbounded ray.
    if x.iter().any(|v| v.is_infinite()) || solution.objective().is_infinite() {
        return FluxSolution::failed(LpStatus::Unbounded);
    }
    snap_to_bounds(lp, &mut x);
    let residual = lp.row_residual(&x);
    let bound_violation = lp.bound_violation(&x);
    if !(residual <= FEASIBILITY_TOLERANCE && bound_violation <= FEASIBILITY_TOLERANCE) {
        log::warn!("LP `{}`: solution outside tolerance (residual {residual:e}, bounds {bound_violation:e})", lp.name);
        return FluxSolution {
            status: LpStatus::NumericalFailure,
            objective: 0.0,
            fluxes: x,
            residual,
            bound_violation,
        };
    }
    let objective = lp.objective_value(&x);
    FluxSolution { status: LpStatus::Optimal, objective, fluxes: x, residual, bound_violation }
}

/// Moves values that sit within solver tolerance of a bound onto it, and
/// near-zero values onto zero, when doing so does not increase the residual.
fn snap_to_bounds(lp: &LinearProgram, x: &mut [f64]) {
    const SNAP: f64 = 1e-8;
    let before = lp.row_residual(x);
    let original = x.to_vec();
    for (xi, v) in x.iter_mut().zip(&lp.variables) {
        if (*xi - v.lower).abs() <= SNAP {
            *xi = v.lower;
        } else if (*xi - v.upper).abs() <= SNAP {
            *xi = v.upper;
        } else if xi.abs() <= SNAP * 1e-3 {
            *xi = 0.0;
        }
    }
    if lp.row_residual(x) > before.max(FEASIBILITY_TOLERANCE) {
        x.copy_from_slice(&original);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(uptake: f64) -> LinearProgram {
        let mut lp = LinearProgram::new("chain");
        let ex = lp.add_variable("ex_A", 0.0, uptake, 0.0);
        let r1 = lp.add_variable("r1", 0.0, 100.0, 0.0);
        let bm = lp.add_variable("biomass", 0.0, 100.0, 1.0);
        lp.add_row("A", vec![(ex, 1.0), (r1, -1.0)], 0.0);
        lp.add_row("B", vec![(r1, 1.0), (bm, -1.0)], 0.0);
        lp
    }

    #[test]
    fn chain_is_uptake_limited() {
        let s = solve_lp(&chain(10.0));
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 10.0).abs() <= 1e-9);
        assert!(s.residual <= FEASIBILITY_TOLERANCE);
    }

    #[test]
    fn empty_box_is_infeasible() {
        let mut lp = chain(10.0);
        lp.variables[1].lower = 1.0;
        lp.variables[1].upper = 0.0;
        assert_eq!(solve_lp(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = chain(10.0);
        lp.variables[2].lower = 20.0;
        assert_eq!(solve_lp(&lp).status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new("free");
        let a = lp.add_variable("a", 0.0, f64::INFINITY, 1.0);
        let b = lp.add_variable("b", 0.0, f64::INFINITY, 0.0);
        lp.add_row("r", vec![(a, 1.0), (b, -1.0)], 0.0);
        assert_eq!(solve_lp(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn repeated_terms_are_merged() {
        let mut lp = LinearProgram::new("dup");
        let a = lp.add_variable("a", 0.0, 5.0, 1.0);
        let b = lp.add_variable("b", 0.0, 4.0, 0.0);
        lp.add_row("r", vec![(a, 0.5), (b, -1.0), (a, 0.5)], 0.0);
        let s = solve_lp(&lp);
        assert!((s.objective - 4.0).abs() < 1e-9);
    }

    #[test]
    fn no_rows() {
        let mut lp = LinearProgram::new("box");
        lp.add_variable("a", -1.0, 3.0, -2.0);
        let s = solve_lp(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, 2.0);
    }
}
