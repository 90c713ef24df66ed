use hn_core::operator::OperatorSpec;
use hn_core::solver::{
    continuation_solve, field_diagnostics, hessian_at, jacobian, manufactured_problem,
    newton_solve, normal_derivative, residual, starting_problem, BoxGrid, LinearSolverKind,
    ManufacturedCase, NewtonOptions, Paraboloid, ProblemSpec, Quadratic, ScalarField, Schedule,
};
use hn_core::Error;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn perturbed_start(spec: &ProblemSpec, amplitude: f64, seed: u64) -> ScalarField {
    let (_, u0) = starting_problem(spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = spec.grid().h()[0];
    let values = u0
        .values()
        .iter()
        .map(|v| v + amplitude * h * h * (rng.random::<f64>() - 0.5))
        .collect();
    ScalarField::new(spec.grid().clone(), values).unwrap()
}

#[test]
fn jacobian_matches_finite_differences() {
    let cases = [
        (2, OperatorSpec::pure(2, 1).unwrap()),
        (3, OperatorSpec::pure(3, 1).unwrap()),
        (3, OperatorSpec::pure(3, 2).unwrap()),
        (3, OperatorSpec::quotient(3, 2, 1).unwrap()),
    ];
    for (c, (n, op)) in cases.into_iter().enumerate() {
        let grid = BoxGrid::cube(n, -0.5, 0.5, 9).unwrap();
        let (spec, _) = manufactured_problem(&Paraboloid::unit(n), &grid, op, 1.3).unwrap();
        let u = perturbed_start(&spec, 0.2, c as u64);
        let j = jacobian(&u, &spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + c as u64);
        for _ in 0..5 {
            let d: Vec<f64> = (0..grid.len()).map(|_| rng.random::<f64>() - 0.5).collect();
            let eps = 1e-6;
            let shifted = |s: f64| {
                let v = u.values().iter().zip(&d).map(|(a, b)| a + s * eps * b).collect();
                residual(&ScalarField::new(grid.clone(), v).unwrap(), &spec).unwrap()
            };
            let (rp, rm) = (shifted(1.0), shifted(-1.0));
            let fd: Vec<f64> = rp.values().iter().zip(rm.values()).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
            let jd = j.mul_vec(&d);
            let diff = fd.iter().zip(&jd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = jd.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(diff < 1e-5 * scale, "{op:?}: {diff:e} vs {scale:e}");
        }
    }
}

#[test]
fn quadratics_are_reproduced_by_the_stencils() {
    let grid = BoxGrid::cube(3, 0.0, 1.0, 9).unwrap();
    let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.2, 0.3, 1.5, 0.1, -0.2, 0.1, 1.0]);
    let q = Quadratic { a: a.clone(), b: vec![0.1, -0.4, 0.7], c: 0.25 };
    let op = OperatorSpec::pure(3, 2).unwrap();
    let (spec, exact) = manufactured_problem(&q, &grid, op, 2.0).unwrap();
    let r = residual(&exact, &spec).unwrap();
    assert!(r.max_abs() < 1e-12, "{:e}", r.max_abs());
    for node in grid.interior_nodes() {
        let h = hessian_at(&exact, node).unwrap();
        assert!((h.matrix() - &a).amax() < 1e-11);
    }
    assert!(matches!(hessian_at(&exact, 0), Err(Error::Domain(_))));
    for node in grid.boundary_nodes() {
        let x = grid.coords(node);
        let g = {
            use hn_core::solver::ClosedForm;
            q.gradient(&x)
        };
        let axes = grid.outward_axes(node);
        let expect: f64 = axes.iter().map(|&(ax, s)| s * g[ax]).sum::<f64>() / axes.len() as f64;
        assert!((normal_derivative(&exact, node).unwrap() - expect).abs() < 1e-12);
    }
}

/// `(n−1)Δ_h u = ψ` inside, averaged Robin rows on the boundary, assembled
/// independently of the solver and solved densely.
fn linear_reference(spec: &ProblemSpec) -> Vec<f64> {
    let grid = spec.grid();
    let (n, len) = (grid.n(), grid.len());
    let mut a = DMatrix::<f64>::zeros(len, len);
    let mut b = DVector::<f64>::zeros(len);
    for node in 0..len {
        let idx = grid.index_of(node);
        let axes = grid.outward_axes(node);
        if axes.is_empty() {
            for ax in 0..n {
                let (s, h2) = (grid.stride(ax), grid.h()[ax] * grid.h()[ax]);
                let c = (n - 1) as f64 / h2;
                a[(node, node - s)] += c;
                a[(node, node)] -= 2.0 * c;
                a[(node, node + s)] += c;
            }
            b[node] = spec.psi()[node];
        } else {
            let w = 1.0 / axes.len() as f64;
            for &(ax, sign) in &axes {
                let s = grid.stride(ax) as isize;
                let inward = if sign > 0.0 { -s } else { s };
                let h = grid.h()[ax];
                let at = |k: isize| (node as isize + k * inward) as usize;
                a[(node, at(0))] += w * 3.0 / (2.0 * h);
                a[(node, at(1))] -= w * 4.0 / (2.0 * h);
                a[(node, at(2))] += w * 1.0 / (2.0 * h);
            }
            let _ = idx;
            a[(node, node)] += spec.beta();
            b[node] = spec.phi()[node];
        }
    }
    a.lu().solve(&b).expect("nonsingular").as_slice().to_vec()
}

#[test]
fn first_order_case_is_the_linear_problem() {
    let grid = BoxGrid::cube(2, 0.0, 1.0, 17).unwrap();
    let op = OperatorSpec::pure(2, 1).unwrap();
    let psi = ScalarField::from_fn(&grid, |x| 2.0 + x[0] * x[1]).unwrap();
    let phi = ScalarField::from_fn(&grid, |x| (3.0 * x[0]).sin() + x[1]).unwrap();
    let spec = ProblemSpec::new(op, 0.7, psi, phi).unwrap();
    let (u, _) = continuation_solve(&spec, &Schedule::default(), &NewtonOptions::default()).unwrap();
    let reference = linear_reference(&spec);
    let err = u.values().iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn distinct_starts_reach_one_solution() {
    let (spec, _) = ManufacturedCase::PerturbedParaboloid.problem(9).unwrap();
    let opts = NewtonOptions::default();
    let (a, _) = continuation_solve(&spec, &Schedule::default(), &opts).unwrap();
    let c = spec.grid().center();
    let b_start = ScalarField::from_fn(spec.grid(), |x| {
        0.8 * x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + 0.3 * x[0] - 0.5
    })
    .unwrap();
    assert!(a.max_abs_diff(&b_start) > 0.1);
    let (b, _) = newton_solve(&b_start, &spec, &opts).unwrap();
    assert!(a.max_abs_diff(&b) < 1e-6);
}

#[test]
fn linear_solvers_agree() {
    let (spec, _) = ManufacturedCase::PerturbedParaboloid.problem(9).unwrap();
    let (_, u0) = starting_problem(&spec).unwrap();
    let run = |kind| {
        let opts = NewtonOptions { linear_solver: kind, ..NewtonOptions::default() };
        continuation_solve(&spec, &Schedule::default(), &opts).unwrap().0
    };
    let direct = run(LinearSolverKind::Direct);
    let gmres = run(LinearSolverKind::Gmres);
    assert!(direct.max_abs_diff(&gmres) < 1e-9);
    assert!(direct.max_abs_diff(&u0) > 1e-3);
}

#[test]
fn inadmissible_start_is_a_precondition_error() {
    let (spec, _) = ManufacturedCase::Paraboloid.problem(9).unwrap();
    let flat = ScalarField::constant(spec.grid(), 0.0);
    assert!(matches!(
        newton_solve(&flat, &spec, &NewtonOptions::default()),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn paraboloid_diagnostics() {
    let grid = BoxGrid::cube(3, 0.0, 1.0, 9).unwrap();
    let (_, u) = manufactured_problem(&Paraboloid::centered(grid.center()), &grid, OperatorSpec::pure(3, 2).unwrap(), 1.0).unwrap();
    let d = field_diagnostics(&u);
    assert!((d.sup_hessian_eigenvalue - 1.0).abs() < 1e-12);
    assert!((d.sup_double_normal - 1.0).abs() < 1e-10);
    assert!((d.sup_gradient - 0.75f64.sqrt()).abs() < 1e-12);
}
