use super::discretize::hessian_at;
use super::grid::ScalarField;
use super::problem::ProblemSpec;
use super::report::Diagnostics;

fn gradient_norm(u: &ScalarField, node: usize) -> f64 {
    let grid = u.grid();
    let v = u.values();
    let idx = grid.index_of(node);
    let last = grid.m() - 1;
    (0..grid.n())
        .map(|a| {
            let s = grid.stride(a);
            let h = grid.h()[a];
            let d = if idx[a] == 0 {
                (-3.0 * v[node] + 4.0 * v[node + s] - v[node + 2 * s]) / (2.0 * h)
            } else if idx[a] == last {
                (3.0 * v[node] - 4.0 * v[node - s] + v[node - 2 * s]) / (2.0 * h)
            } else {
                (v[node + s] - v[node - s]) / (2.0 * h)
            };
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Second-order one-sided second difference along an outward axis.
fn double_normal(u: &ScalarField, node: usize, axis: usize, sign: f64) -> f64 {
    let grid = u.grid();
    let v = u.values();
    let s = grid.stride(axis) as isize * if sign > 0.0 { -1 } else { 1 };
    let at = |k: isize| v[(node as isize + k * s) as usize];
    let h = grid.h()[axis];
    (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / (h * h)
}

/// Gradient, second-derivative and double-normal sizes of `u`.
pub fn diagnostics(u: &ScalarField, _spec: &ProblemSpec) -> Diagnostics {
    field_diagnostics(u)
}

/// Same as [`diagnostics`]; needs only the field.
pub fn field_diagnostics(u: &ScalarField) -> Diagnostics {
    let grid = u.grid();
    let mut sup_gradient = 0.0f64;
    let mut sup_hessian_eigenvalue = f64::NEG_INFINITY;
    let mut sup_double_normal = 0.0f64;
    for node in 0..grid.len() {
        sup_gradient = sup_gradient.max(gradient_norm(u, node));
        let axes = grid.outward_axes(node);
        if axes.is_empty() {
            let lmax = hessian_at(u, node)
                .and_then(|h| h.eigen())
                .map(|(ev, _)| ev.into_iter().fold(f64::NEG_INFINITY, f64::max))
                .unwrap_or(f64::NAN);
            sup_hessian_eigenvalue = sup_hessian_eigenvalue.max(lmax);
        } else {
            for (a, s) in axes {
                sup_double_normal = sup_double_normal.max(double_normal(u, node, a, s).abs());
            }
        }
    }
    Diagnostics {
        sup_gradient,
        sup_hessian_eigenvalue,
        sup_double_normal,
    }
}
