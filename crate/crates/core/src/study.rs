//! The convergence-study driver: mesh → assemble → condense → CG → recover →
//! errors, over a sequence of refinement levels.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{ErrorEvaluator, ErrorTable, LevelErrors};
use crate::assembly::{assemble_with, AssemblyOptions, BlockSystem};
use crate::condense::{condense_with, recover_phi, recover_sigma, solve_full_saddle, CondensedSystem, ReducedLoad, Solution};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linsolve::{cg_solve, norm_inf, write_matrix_market, write_vector_market, CgOptions, CsrMatrix, MarketSymmetry, SolveReport};
use crate::mesh::{build_structured_unit_square, Mesh};
use crate::problems::{ExampleId, ProblemData};

/// Oracle checks are limited to levels whose dense 5N x 5N system stays small.
pub const ORACLE_MAX_LEVEL: usize = 16;
/// Maximum relative max-norm discrepancy accepted by the oracle check.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Markdown,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureDegrees {
    pub assembly: usize,
    pub edge: usize,
    pub error: usize,
    pub error_edge: usize,
}

impl Default for QuadratureDegrees {
    fn default() -> Self {
        QuadratureDegrees {
            assembly: 2,
            edge: 3,
            error: 6,
            error_edge: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub example: ExampleId,
    pub levels: Vec<usize>,
    pub r: f64,
    pub alpha: f64,
    pub cg_tol: f64,
    pub cg_maxit: usize,
    pub quadrature: QuadratureDegrees,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub oracle: bool,
    pub export_matrices: Option<PathBuf>,
    pub export_mesh: Option<PathBuf>,
    pub execution: Execution,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            example: ExampleId::Example1,
            levels: vec![2, 4, 8, 16, 32, 64],
            r: 0.5,
            alpha: 10.0,
            cg_tol: 1e-12,
            cg_maxit: 20_000,
            quadrature: QuadratureDegrees::default(),
            format: OutputFormat::Markdown,
            out: None,
            oracle: false,
            export_matrices: None,
            export_mesh: None,
            execution: Execution::default(),
        }
    }
}

impl StudyConfig {
    pub fn for_example(example: ExampleId, levels: &[usize]) -> Self {
        StudyConfig {
            example,
            levels: levels.to_vec(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.r > 0.0 && self.r < 1.0) {
            return bad(format!("r must lie in (0, 1), got {}", self.r));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.levels.is_empty() || self.levels[0] == 0 {
            return bad("levels must be a non-empty list of positive integers".into());
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("levels must be strictly increasing, got {:?}", self.levels));
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return bad(format!("cg tolerance must lie in (0, 1), got {}", self.cg_tol));
        }
        if self.cg_maxit == 0 {
            return bad("cg iteration cap must be positive".into());
        }
        Ok(())
    }

    pub fn cg_options(&self) -> CgOptions {
        CgOptions {
            tol: self.cg_tol,
            max_iter: self.cg_maxit,
        }
    }

    fn assembly_options(&self) -> AssemblyOptions {
        AssemblyOptions {
            alpha: self.alpha,
            element_degree: self.quadrature.assembly,
            edge_degree: self.quadrature.edge,
            dual_scale: 1.0,
            execution: self.execution,
        }
    }

    fn problem(&self) -> Result<ProblemData> {
        ProblemData::builtin(self.example)
            .ok_or_else(|| Error::InvalidArgument("custom problems must be passed programmatically".into()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelSolve {
    pub level: usize,
    pub elements: usize,
    pub dofs: usize,
    pub nnz: usize,
    pub solver: SolveReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub table: ErrorTable,
    pub solves: Vec<LevelSolve>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
}

impl StudyReport {
    pub fn render(&self, format: OutputFormat) -> Result<String> {
        Ok(match format {
            OutputFormat::Csv => self.table.to_csv(),
            OutputFormat::Markdown => {
                let mut s = format!(
                    "{} with r = {}, alpha = {}\n\n",
                    self.config.example, self.config.r, self.config.alpha
                );
                s.push_str(&self.table.to_markdown());
                s
            }
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self)?;
                s.push('\n');
                s
            }
        })
    }
}

/// Everything produced for one level.
pub struct LevelOutcome {
    pub mesh: Mesh,
    pub blocks: BlockSystem,
    pub condensed: CondensedSystem,
    pub solution: Solution,
    pub report: SolveReport,
}

/// Runs the solve pipeline on one level. CG non-convergence is an error.
pub fn solve_level(config: &StudyConfig, data: &ProblemData, level: usize, load: ReducedLoad) -> Result<LevelOutcome> {
    let mesh = build_structured_unit_square(level)?;
    let blocks = assemble_with(&mesh, data, &config.assembly_options())?;
    let condensed = condense_with(&blocks, config.r, load, config.execution)?;
    let (u, report) = cg_solve(&condensed.matrix, &condensed.rhs, &config.cg_options())?;
    if !report.converged {
        return Err(Error::NotConverged {
            level,
            iterations: report.iterations,
            residual: report.relative_residual,
        });
    }
    let sigma = recover_sigma(&blocks, &u)?;
    let phi = recover_phi(&blocks, &u, &sigma, config.r)?;
    Ok(LevelOutcome {
        mesh,
        blocks,
        condensed,
        solution: Solution { u, sigma, phi },
        report,
    })
}

pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    let data = config.problem()?;
    run_study_with(config, &data)
}

/// Runs the study for programmatically supplied data, which must carry an
/// exact solution.
pub fn run_study_with(config: &StudyConfig, data: &ProblemData) -> Result<StudyReport> {
    config.validate()?;
    let exact = data
        .exact
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("the study needs an exact solution".into()))?;
    let evaluator = ErrorEvaluator::new(config.quadrature.error, config.quadrature.error_edge, Execution::Sequential)?;

    let outcomes = config.execution.map(config.levels.len(), |k| -> Result<(LevelErrors, LevelSolve)> {
        let level = config.levels[k];
        let out = solve_level(config, data, level, ReducedLoad::Eliminated)?;
        export_level(config, level, &out)?;
        let errors = LevelErrors {
            level,
            elements: out.mesh.num_triangles(),
            l2_u: evaluator.l2_u(&out.mesh, &out.solution.u, &exact.u),
            h1h_u: evaluator.h1h_u(&out.mesh, &out.solution.u, &exact.u, &exact.grad),
            l2_sigma: evaluator.l2_sigma(&out.mesh, &out.solution.sigma, &exact.grad),
        };
        let solve = LevelSolve {
            level,
            elements: out.mesh.num_triangles(),
            dofs: out.blocks.n,
            nnz: out.condensed.matrix.nnz(),
            solver: out.report,
        };
        Ok((errors, solve))
    });
    let mut levels = Vec::with_capacity(outcomes.len());
    let mut solves = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let (e, s) = o?;
        levels.push(e);
        solves.push(s);
    }

    let oracle = if config.oracle {
        Some(run_oracle_check_with(config, data, ReducedLoad::Eliminated)?)
    } else {
        None
    };
    Ok(StudyReport {
        config: config.clone(),
        table: ErrorTable::from_levels(&levels),
        solves,
        oracle,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleLevel {
    pub level: usize,
    pub u: f64,
    pub sigma: f64,
    pub phi: f64,
}

impl OracleLevel {
    pub fn max(&self) -> f64 {
        self.u.max(self.sigma).max(self.phi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub tolerance: f64,
    pub levels: Vec<OracleLevel>,
    /// Levels above the dense-solve limit that were not checked.
    pub skipped: Vec<usize>,
    pub passed: bool,
}

impl OracleReport {
    /// The first level and field exceeding the tolerance.
    pub fn first_failure(&self) -> Option<Error> {
        self.levels.iter().find_map(|l| {
            [("u", l.u), ("sigma", l.sigma), ("phi", l.phi)]
                .into_iter()
                .find(|&(_, d)| !(d <= self.tolerance))
                .map(|(field, discrepancy)| Error::OracleMismatch {
                    level: l.level,
                    field,
                    discrepancy,
                })
        })
    }
}

fn relative_discrepancy(a: &[f64], reference: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(reference).map(|(x, y)| x - y).collect();
    let scale = norm_inf(reference);
    if scale == 0.0 {
        norm_inf(&diff)
    } else {
        norm_inf(&diff) / scale
    }
}

pub fn run_oracle_check(config: &StudyConfig) -> Result<OracleReport> {
    config.validate()?;
    run_oracle_check_with(config, &config.problem()?, ReducedLoad::Eliminated)
}

/// Compares the condensed pipeline against a dense solve of the full block
/// system on every configured level up to [`ORACLE_MAX_LEVEL`].
pub fn run_oracle_check_with(config: &StudyConfig, data: &ProblemData, load: ReducedLoad) -> Result<OracleReport> {
    config.validate()?;
    let (checked, skipped): (Vec<usize>, Vec<usize>) = config.levels.iter().partition(|&&n| n <= ORACLE_MAX_LEVEL);
    let levels = config.execution.map(checked.len(), |k| -> Result<OracleLevel> {
        let level = checked[k];
        let out = solve_level(config, data, level, load)?;
        let full = solve_full_saddle(&out.blocks, config.r)?;
        Ok(OracleLevel {
            level,
            u: relative_discrepancy(&out.solution.u, &full.u),
            sigma: relative_discrepancy(&out.solution.sigma, &full.sigma),
            phi: relative_discrepancy(&out.solution.phi, &full.phi),
        })
    });
    let levels = levels.into_iter().collect::<Result<Vec<_>>>()?;
    let passed = levels.iter().all(|l| l.max() <= ORACLE_TOLERANCE);
    Ok(OracleReport {
        tolerance: ORACLE_TOLERANCE,
        levels,
        skipped,
        passed,
    })
}

fn export_level(config: &StudyConfig, level: usize, out: &LevelOutcome) -> Result<()> {
    if let Some(dir) = &config.export_mesh {
        fs::create_dir_all(dir)?;
        out.mesh.write_nodes(BufWriter::new(File::create(dir.join(format!("mesh_n{level}.nodes")))?))?;
        out.mesh.write_elements(BufWriter::new(File::create(dir.join(format!("mesh_n{level}.elems")))?))?;
    }
    if let Some(dir) = &config.export_matrices {
        export_matrices(dir, level, out)?;
    }
    Ok(())
}

fn export_matrices(dir: &Path, level: usize, out: &LevelOutcome) -> Result<()> {
    fs::create_dir_all(dir)?;
    let b = &out.blocks;
    let pairing = CsrMatrix::from_diagonal(&b.pairing);
    let matrices: [(&str, &CsrMatrix, MarketSymmetry); 7] = [
        ("S", &b.stiffness, MarketSymmetry::Symmetric),
        ("M", &b.mass, MarketSymmetry::Symmetric),
        ("D", &pairing, MarketSymmetry::Symmetric),
        ("A", &b.boundary, MarketSymmetry::General),
        ("B", &b.gradient, MarketSymmetry::General),
        ("C", &b.penalty, MarketSymmetry::Symmetric),
        ("K", &out.condensed.matrix, MarketSymmetry::General),
    ];
    for (name, m, sym) in matrices {
        let f = File::create(dir.join(format!("{name}_n{level}.mtx")))?;
        write_matrix_market(BufWriter::new(f), m, sym)?;
    }
    for (name, v) in [("f1", &b.f1), ("f2", &b.f2), ("F", &out.condensed.rhs)] {
        let f = File::create(dir.join(format!("{name}_n{level}.mtx")))?;
        write_vector_market(BufWriter::new(f), v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(StudyConfig::default().validate().is_ok());
        let bad = [
            StudyConfig { r: 1.0, ..Default::default() },
            StudyConfig { alpha: 0.0, ..Default::default() },
            StudyConfig { levels: vec![4, 2], ..Default::default() },
            StudyConfig { levels: vec![], ..Default::default() },
            StudyConfig { levels: vec![0, 2], ..Default::default() },
            StudyConfig { cg_tol: 0.0, ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(run_study(&c), Err(Error::InvalidArgument(_))), "{c:?}");
        }
        let custom = StudyConfig { example: ExampleId::Custom, ..Default::default() };
        assert!(run_study(&custom).is_err());
    }

    #[test]
    fn patch_study_is_exact() {
        let config = StudyConfig::for_example(ExampleId::LinearPatch, &[4]);
        let report = run_study(&config).unwrap();
        let e = report.table.rows[0].errors;
        assert!(e.l2_u <= 1e-10 && e.h1h_u <= 1e-10 && e.l2_sigma <= 1e-10);
    }

    #[test]
    fn single_level_json_has_no_rates() {
        let config = StudyConfig {
            format: OutputFormat::Json,
            ..StudyConfig::for_example(ExampleId::Example1, &[2])
        };
        let report = run_study(&config).unwrap();
        let json: serde_json::Value = serde_json::from_str(&report.render(OutputFormat::Json).unwrap()).unwrap();
        let rows = json["table"]["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0]["rate_l2_u"].is_null());
        assert_eq!(rows[0]["elements"], 8);
        assert_eq!(json["config"]["levels"], serde_json::json!([2]));
        assert_eq!(json["config"]["example"], "example1");
    }

    #[test]
    fn non_convergence_is_an_error() {
        let config = StudyConfig {
            cg_maxit: 2,
            ..StudyConfig::for_example(ExampleId::Example1, &[8])
        };
        assert!(matches!(run_study(&config), Err(Error::NotConverged { level: 8, .. })));
    }

    #[test]
    fn oracle_passes_and_detects_uninverted_load() {
        let config = StudyConfig::for_example(ExampleId::Example2, &[2, 4]);
        let good = run_oracle_check(&config).unwrap();
        assert!(good.passed, "{good:?}");
        assert!(good.first_failure().is_none());

        let data = ProblemData::builtin(ExampleId::Example2).unwrap();
        let bad = run_oracle_check_with(&config, &data, ReducedLoad::UninvertedPairing).unwrap();
        assert!(!bad.passed);
        assert!(bad.levels.iter().all(|l| l.u > 1e-2));
        assert!(matches!(bad.first_failure(), Some(Error::OracleMismatch { level: 2, .. })));
    }

    #[test]
    fn oracle_skips_large_levels() {
        let config = StudyConfig::for_example(ExampleId::Example1, &[2, 32]);
        let report = run_oracle_check(&config).unwrap();
        assert_eq!(report.skipped, vec![32]);
        assert_eq!(report.levels.len(), 1);
    }

    #[test]
    fn exports_write_files() {
        let dir = tempfile::tempdir().unwrap();
        let config = StudyConfig {
            export_matrices: Some(dir.path().join("mtx")),
            export_mesh: Some(dir.path().join("mesh")),
            ..StudyConfig::for_example(ExampleId::Example2, &[2])
        };
        run_study(&config).unwrap();
        for name in ["S", "M", "D", "A", "B", "C", "K", "f1", "f2", "F"] {
            let p = dir.path().join("mtx").join(format!("{name}_n2.mtx"));
            let s = fs::read_to_string(&p).unwrap();
            assert!(s.starts_with("%%MatrixMarket"), "{p:?}");
        }
        let nodes = fs::read_to_string(dir.path().join("mesh/mesh_n2.nodes")).unwrap();
        assert_eq!(nodes.lines().count(), 9);
        let elems = fs::read_to_string(dir.path().join("mesh/mesh_n2.elems")).unwrap();
        assert_eq!(elems.lines().count(), 8);
    }

    #[test]
    fn output_is_deterministic() {
        let config = StudyConfig::for_example(ExampleId::Example2, &[2, 4, 8]);
        let a = run_study(&config).unwrap();
        let b = run_study(&config).unwrap();
        let seq = run_study(&StudyConfig { execution: Execution::Sequential, ..config.clone() }).unwrap();
        for fmt in [OutputFormat::Csv, OutputFormat::Json, OutputFormat::Markdown] {
            assert_eq!(a.render(fmt).unwrap(), b.render(fmt).unwrap());
        }
        assert_eq!(a.table, seq.table);
    }
}
