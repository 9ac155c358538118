use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use crate::error::{domain, Result};
use crate::geometry::norm;
use crate::trajectory::Trajectory;
use crate::variation::Partition;

/// A point mass at `t` produced by the partition cell `[t, t_next]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub t: f64,
    pub t_next: f64,
    pub weight: Vec<f64>,
}

/// Finitely many atoms on `[S, T]`, in time order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    pub schema_version: u32,
    pub span: (f64, f64),
    pub dim: usize,
    pub atoms: Vec<Atom>,
    /// Sum of the Euclidean norms of the weights.
    pub total_variation: f64,
}

/// Where `ξ_i` is taken on the cell `[t_i, t_{i+1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiRule {
    /// `x̄(t_i)`.
    Left,
    /// `x̄(t_{i+1})`.
    Right,
    /// `x̄(t_i + λ (t_{i+1} - t_i))`.
    Fraction(f64),
    /// `x̄(t_i + λ (t_{i+1} - t_i)) + ρ u` with `u` the unit vector along `direction`.
    Offset { fraction: f64, direction: Vec<f64> },
}

/// Which endpoint atoms an integral keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// `[S, T]`: every atom.
    Closed,
    /// `(S, T]`: drops the atom of the cell starting at `S`.
    LeftOpen,
    /// `[S, T)`: drops the atom of the cell ending at `T`.
    RightOpen,
}

impl DiscreteMeasure {
    pub fn new(span: (f64, f64), dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        if atoms.windows(2).any(|w| w[0].t > w[1].t) {
            return domain("atom times must be nondecreasing");
        }
        if atoms.iter().any(|a| a.weight.len() != dim || a.weight.iter().any(|w| !w.is_finite())) {
            return domain("atom weights must be finite vectors of the measure dimension");
        }
        if atoms.iter().any(|a| a.t < span.0 || a.t > span.1) {
            return domain("atom outside the time interval");
        }
        let total_variation = atoms.iter().map(|a| norm(&a.weight)).sum();
        Ok(DiscreteMeasure {
            schema_version: 1,
            span,
            dim,
            atoms,
            total_variation,
        })
    }

    /// Unit-free total mass `Σ w_i`.
    pub fn total_mass(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for a in &self.atoms {
            for (o, w) in out.iter_mut().zip(&a.weight) {
                *o += w;
            }
        }
        out
    }

    fn keeps(&self, a: &Atom, window: Window) -> bool {
        let (s, e) = self.span;
        match window {
            Window::Closed => true,
            Window::LeftOpen => a.t > s,
            Window::RightOpen => a.t_next < e,
        }
    }

    /// Atoms whose cell meets `[a, b]`, i.e. `t_next >= a` and `t <= b`.
    ///
    /// With `a` and `b` among the partition points this is the discrete
    /// counterpart of the mass of the closed interval: jumps located at `a`
    /// or `b` from either side are included.
    pub fn interval_mass(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for atom in self.atoms.iter().filter(|x| x.t_next >= a && x.t <= b) {
            for (o, w) in out.iter_mut().zip(&atom.weight) {
                *o += w;
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for k in 1..=self.dim {
            out.push_str(&format!(",w_{k}"));
        }
        out.push('\n');
        for a in &self.atoms {
            out.push_str(&a.t.to_string());
            for w in &a.weight {
                out.push_str(&format!(",{w}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("measure serializes")
    }
}

/// `Σ g(t_i)ᵀ w_i` over the atoms kept by `window`.
pub fn integrate(g: impl Fn(f64) -> Vec<f64>, mu: &DiscreteMeasure, window: Window) -> f64 {
    mu.atoms
        .iter()
        .filter(|a| mu.keeps(a, window))
        .map(|a| g(a.t).iter().zip(&a.weight).map(|(x, y)| x * y).sum::<f64>())
        .sum()
}

fn unit(v: &[f64]) -> Result<Vec<f64>> {
    let n = norm(v);
    if !(n > 0.0) || !n.is_finite() {
        return domain("offset direction must be a nonzero finite vector");
    }
    Ok(v.iter().map(|x| x / n).collect())
}

fn xi_point(xbar: &Trajectory, rule: &XiRule, t0: f64, t1: f64, rho: f64) -> Result<Vec<f64>> {
    Ok(match rule {
        XiRule::Left => xbar.eval(t0),
        XiRule::Right => xbar.eval(t1),
        XiRule::Fraction(l) => {
            if !(0.0..=1.0).contains(l) {
                return domain(format!("fraction {l} outside [0, 1]"));
            }
            xbar.eval(t0 + l * (t1 - t0))
        }
        XiRule::Offset { fraction, direction } => {
            if !(0.0..=1.0).contains(fraction) {
                return domain(format!("fraction {fraction} outside [0, 1]"));
            }
            let u = unit(direction)?;
            if u.len() != xbar.dim() {
                return domain("offset direction has the wrong dimension");
            }
            xbar.eval(t0 + fraction * (t1 - t0))
                .iter()
                .zip(&u)
                .map(|(x, d)| x + rho * d)
                .collect()
        }
    })
}

/// `μ = Σ_i [m(t_{i+1}, ξ_i) - m(t_i, ξ_i)] δ_{t_i}` with `ξ_i` from `rule`.
pub fn discrete_measure(m: &ScalarField, xbar: &Trajectory, p: &Partition, rule: &XiRule, rho: f64) -> Result<DiscreteMeasure> {
    m.validate(xbar)?;
    let xis = p
        .cells()
        .map(|(t0, t1)| xi_point(xbar, rule, t0, t1, rho))
        .collect::<Result<Vec<_>>>()?;
    discrete_measure_at(m, xbar, p, &xis, rho)
}

/// Same as [`discrete_measure`] with explicit `ξ_i`, each of which must lie
/// within `rho` of the arc `x̄([t_i, t_{i+1}])`.
pub fn discrete_measure_at(
    m: &ScalarField,
    xbar: &Trajectory,
    p: &Partition,
    xis: &[Vec<f64>],
    rho: f64,
) -> Result<DiscreteMeasure> {
    m.validate(xbar)?;
    let (s, e) = m.span();
    if p.start() < s || p.end() > e {
        return domain("partition leaves the field's time interval");
    }
    if xis.len() != p.len_cells() {
        return domain(format!("{} points given for {} cells", xis.len(), p.len_cells()));
    }
    if !(rho >= 0.0) {
        return domain("rho must be nonnegative");
    }
    let cells: Vec<(f64, f64)> = p.cells().collect();
    for ((t0, t1), xi) in cells.iter().zip(xis) {
        let d = xbar.distance_to_arc(xi, *t0, *t1);
        if d > rho * (1.0 + 1e-9) + 1e-12 {
            return domain(format!(
                "xi {xi:?} is {d} from the arc on [{t0}, {t1}], more than rho = {rho}"
            ));
        }
    }
    let atoms: Vec<Atom> = cells
        .par_iter()
        .zip(xis.par_iter())
        .map(|(&(t0, t1), xi)| {
            let hi = m.eval(t1, xi);
            let lo = m.eval(t0, xi);
            Atom {
                t: t0,
                t_next: t1,
                weight: hi.iter().zip(&lo).map(|(a, b)| a - b).collect(),
            }
        })
        .collect();
    DiscreteMeasure::new((s, e), m.out_dim(), atoms)
}
