use std::collections::HashSet;
use std::io::{self, Write};

use serde::Serialize;

/// A maximization problem `max c·x  s.t.  A·x = b,  l ≤ x ≤ u`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearProgram {
    pub name: String,
    pub variables: Vec<LpVariable>,
    pub rows: Vec<LpRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpVariable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

/// An equality row `Σ coefficient·x[var] = rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpRow {
    pub name: String,
    /// Sparse `(variable index, coefficient)` pairs.
    pub coefficients: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl LinearProgram {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), variables: Vec::new(), rows: Vec::new() }
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64, objective: f64) -> usize {
        self.variables.push(LpVariable { name: name.into(), lower, upper, objective });
        self.variables.len() - 1
    }

    pub fn add_row(&mut self, name: impl Into<String>, coefficients: Vec<(usize, f64)>, rhs: f64) {
        self.rows.push(LpRow { name: name.into(), coefficients, rhs });
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.variables.iter().zip(x).map(|(v, xi)| v.objective * xi).sum()
    }

    /// `‖A·x − b‖∞`.
    pub fn row_residual(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.coefficients.iter().map(|&(j, a)| a * x[j]).sum::<f64>() - r.rhs).abs())
            .fold(0.0, f64::max)
    }

    /// Largest distance of any `x[j]` outside `[l_j, u_j]`.
    pub fn bound_violation(&self, x: &[f64]) -> f64 {
        self.variables.iter().zip(x).map(|(v, &xi)| (v.lower - xi).max(xi - v.upper).max(0.0)).fold(0.0, f64::max)
    }

    /// Writes the program in CPLEX LP format. Variable names become `v_<name>`
    /// and row names `c_<name>`, with every character outside `[A-Za-z0-9_]`
    /// replaced by `_` (and a numeric suffix where that creates a clash).
    pub fn write_lp(&self, mut w: impl Write) -> io::Result<()> {
        let vars = unique_names("v_", self.variables.iter().map(|v| v.name.as_str()));
        let rows = unique_names("c_", self.rows.iter().map(|r| r.name.as_str()));
        writeln!(w, "\\ {}", self.name.replace('\n', " "))?;
        writeln!(w, "Maximize")?;
        let obj: Vec<(usize, f64)> = self
            .variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.objective != 0.0)
            .map(|(j, v)| (j, v.objective))
            .collect();
        write!(w, " obj:")?;
        if obj.is_empty() {
            write!(w, " 0 {}", vars.first().map(String::as_str).unwrap_or("v_none"))?;
        }
        write_terms(&mut w, &obj, &vars)?;
        writeln!(w)?;
        writeln!(w, "Subject To")?;
        for (r, name) in self.rows.iter().zip(&rows) {
            write!(w, " {name}:")?;
            if r.coefficients.is_empty() {
                write!(w, " 0 {}", vars.first().map(String::as_str).unwrap_or("v_none"))?;
            }
            write_terms(&mut w, &r.coefficients, &vars)?;
            writeln!(w, " = {}", num(r.rhs))?;
        }
        writeln!(w, "Bounds")?;
        for (v, name) in self.variables.iter().zip(&vars) {
            if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
                writeln!(w, " {name} free")?;
            } else {
                writeln!(w, " {} <= {name} <= {}", num(v.lower), num(v.upper))?;
            }
        }
        writeln!(w, "End")
    }

    pub fn to_lp_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_lp(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("LP text is UTF-8")
    }
}

fn write_terms(w: &mut impl Write, terms: &[(usize, f64)], vars: &[String]) -> io::Result<()> {
    for &(j, a) in terms {
        let sign = if a < 0.0 { '-' } else { '+' };
        write!(w, " {sign} {} {}", num(a.abs()), vars[j])?;
    }
    Ok(())
}

fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn unique_names<'a>(prefix: &str, names: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = HashSet::new();
    names
        .map(|n| {
            let clean: String =
                n.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
            let base = format!("{prefix}{clean}");
            let mut name = base.clone();
            let mut k = 2;
            while !seen.insert(name.clone()) {
                name = format!("{base}_{k}");
                k += 1;
            }
            name
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_text() {
        let mut lp = LinearProgram::new("demo");
        let a = lp.add_variable("ex A", 0.0, 10.0, 0.0);
        let b = lp.add_variable("r-1", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        let c = lp.add_variable("ex_A", 0.0, f64::INFINITY, 0.0);
        lp.add_row("A[c]", vec![(a, 1.0), (b, -2.5)], 0.0);
        lp.add_row("B", vec![(c, 1.0)], 0.0);
        let text = lp.to_lp_string();
        assert_eq!(
            text,
            "\\ demo\nMaximize\n obj: + 1 v_r_1\nSubject To\n c_A_c_: + 1 v_ex_A - 2.5 v_r_1 = 0\n c_B: + 1 v_ex_A_2 = 0\nBounds\n 0 <= v_ex_A <= 10\n v_r_1 free\n 0 <= v_ex_A_2 <= +inf\nEnd\n"
        );
        assert_eq!(lp.row_residual(&[2.5, 1.0, 0.0]), 0.0);
        assert_eq!(lp.bound_violation(&[11.0, 0.0, -1.0]), 1.0);
    }
}
