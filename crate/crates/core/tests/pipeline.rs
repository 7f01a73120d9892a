//! End-to-end checks through the public API.

use mixed_nitsche::assembly::{assemble, assemble_with, AssemblyOptions};
use mixed_nitsche::condense::{condense, solve_condensed, solve_full_saddle};
use mixed_nitsche::linsolve::{cg_solve, CgOptions};
use mixed_nitsche::mesh::build_structured_unit_square;
use mixed_nitsche::problems::{example1, example2, ExampleId};
use mixed_nitsche::study::{run_study, StudyConfig};
use mixed_nitsche::Execution;

#[test]
fn condensed_solution_satisfies_all_block_rows() {
    let mesh = build_structured_unit_square(6).unwrap();
    let sys = assemble(&mesh, &example2(), 10.0).unwrap();
    let r = 0.5;
    let (sol, rep) = solve_condensed(&sys, r, &CgOptions { tol: 1e-14, max_iter: 5000 }).unwrap();
    assert!(rep.converged);

    // row 1: ((1-r)S + αC) u - A σ - B φ = f1
    let su = sys.stiffness.spmv(&sol.u).unwrap();
    let cu = sys.penalty.spmv(&sol.u).unwrap();
    let as_ = sys.boundary.spmv(&sol.sigma).unwrap();
    let bp = sys.gradient.spmv(&sol.phi).unwrap();
    let scale = sys.f1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..sys.n {
        let res = (1.0 - r) * su[i] + sys.alpha * cu[i] - as_[i] - bp[i] - sys.f1[i];
        assert!(res.abs() <= 1e-10 * scale, "row {i}: {res}");
    }
}

#[test]
fn full_saddle_agrees_at_level_16() {
    let mesh = build_structured_unit_square(16).unwrap();
    let sys = assemble(&mesh, &example1(), 10.0).unwrap();
    let full = solve_full_saddle(&sys, 0.5).unwrap();
    let (sol, _) = solve_condensed(&sys, 0.5, &CgOptions { tol: 1e-13, max_iter: 5000 }).unwrap();
    let max_u = full.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = sol.u.iter().zip(&full.u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff <= 1e-9 * max_u);
}

#[test]
fn other_valid_parameters_stay_definite_and_converge() {
    let mesh = build_structured_unit_square(16).unwrap();
    for (r, alpha) in [(0.25, 20.0), (0.75, 10.0), (0.5, 100.0)] {
        let sys = assemble(&mesh, &example2(), alpha).unwrap();
        let k = condense(&sys, r).unwrap();
        let (_, rep) = cg_solve(&k.matrix, &k.rhs, &CgOptions::default()).unwrap();
        assert!(rep.converged, "r={r} alpha={alpha}");
    }
}

#[test]
fn sequential_and_parallel_studies_agree_bitwise() {
    let base = StudyConfig::for_example(ExampleId::Example2, &[4, 8, 16]);
    let seq = run_study(&StudyConfig { execution: Execution::Sequential, ..base.clone() }).unwrap();
    let par = run_study(&StudyConfig { execution: Execution::Parallel, ..base }).unwrap();
    assert_eq!(seq.table, par.table);
}

#[test]
fn higher_assembly_quadrature_keeps_rates() {
    let mesh_levels = [8, 16, 32];
    let mut errs = Vec::new();
    for n in mesh_levels {
        let mesh = build_structured_unit_square(n).unwrap();
        let opts = AssemblyOptions { element_degree: 6, edge_degree: 5, ..AssemblyOptions::default() };
        let sys = assemble_with(&mesh, &example2(), &opts).unwrap();
        let (sol, _) = solve_condensed(&sys, 0.5, &CgOptions::default()).unwrap();
        let ex = example2().exact.unwrap();
        errs.push(mixed_nitsche::analysis::l2_error_u(&mesh, &sol.u, &ex.u));
    }
    let rates = mixed_nitsche::analysis::convergence_rates(&errs);
    assert!(rates.iter().all(|r| r.unwrap() > 1.7), "{rates:?}");
}
