//! Convergence sweeps over the registered problems, emitted as CSV or as an
//! aligned text table.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use c1pg::analysis::{
    convergence_rates_with_floor, sample_errors, solution_scale, sup_diff, ErrorKind, ErrorReport, RateFlag, RateRow,
    FP_FLOOR,
};
use c1pg::assembly::{assemble_collocation, assemble_pg, default_quad_points, solve, LinearSystem};
use c1pg::problems::{lookup, ConstantCoefficients};
use c1pg::{build_mesh, C1Function, MeshSpec, Method, Problem};
use clap::{Parser, ValueEnum};

pub use c1pg::problems::{registry, PROBLEM_IDS};

pub const CSV_HEADER: &str = "method,k,N,error_kind,error,order";

/// Interior-node perturbation used by `--mesh perturbed`, as a fraction of `1/N`.
pub const PERTURBATION: f64 = 0.01;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] c1pg::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Pg,
    Gauss,
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Pg => vec![Method::PetrovGalerkin],
            MethodChoice::Gauss => vec![Method::Collocation],
            MethodChoice::Both => vec![Method::PetrovGalerkin, Method::Collocation],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeshKind {
    Uniform,
    Perturbed,
    Piecewise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Table,
}

/// Command-line flags.
#[derive(Debug, Clone, Parser)]
#[command(
    name = "c1pg",
    version,
    allow_negative_numbers = true,
    about = "Convergence sweeps for C1 Petrov-Galerkin and Gauss collocation solvers"
)]
pub struct Args {
    #[arg(long, value_enum, default_value = "pg")]
    pub method: MethodChoice,
    /// Polynomial degree (at least 3).
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "perturbed")]
    pub mesh: MeshKind,
    /// Breakpoint of the piecewise-uniform mesh.
    #[arg(long, default_value_t = 2.0 / 3.0)]
    pub breakpoint: f64,
    /// Comma-separated, strictly increasing element counts.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32")]
    pub n: Vec<usize>,
    /// Seed of the node perturbation.
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, default_value = "example1")]
    pub problem: String,
    /// Constant α of example1.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Constant β of example1.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Constant γ of example1.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Gauss points per element for Petrov-Galerkin assembly (default k+4).
    #[arg(long)]
    pub quad_points: Option<usize>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for mesh, matrix, right-hand side and coefficient dumps.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

/// Validated sweep configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub methods: Vec<Method>,
    pub k: usize,
    pub mesh: MeshKind,
    pub breakpoint: f64,
    pub ns: Vec<usize>,
    pub seed: u64,
    pub problem: String,
    pub coefficients: ConstantCoefficients,
    pub quad_points: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub dump: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(args: Args) -> Result<Self, CliError> {
        let cfg = Self {
            methods: args.method.methods(),
            k: args.k,
            mesh: args.mesh,
            breakpoint: args.breakpoint,
            ns: args.n,
            seed: args.seed,
            problem: args.problem,
            coefficients: ConstantCoefficients {
                alpha: args.alpha,
                beta: args.beta,
                gamma: args.gamma,
            },
            quad_points: args.quad_points,
            format: args.format,
            out: args.out,
            dump: args.dump,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.k < 3 {
            return Err(CliError::Config(format!("k must be at least 3, got {}", self.k)));
        }
        if self.ns.is_empty() {
            return Err(CliError::Config("empty element-count list".into()));
        }
        if self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config(format!(
                "element counts {:?} are not strictly increasing",
                self.ns
            )));
        }
        if self.methods.is_empty() {
            return Err(CliError::Config("no method selected".into()));
        }
        if let Some(q) = self.quad_points {
            if q < self.k + 2 {
                return Err(CliError::Config(format!(
                    "--quad-points {q} is below k+2 = {}",
                    self.k + 2
                )));
            }
        }
        lookup(&self.problem, self.coefficients)?;
        for &n in &self.ns {
            build_mesh(&self.mesh_spec(n))?;
        }
        Ok(())
    }

    pub fn mesh_spec(&self, n: usize) -> MeshSpec {
        match self.mesh {
            MeshKind::Uniform => MeshSpec::Uniform { a: 0.0, b: 1.0, n },
            MeshKind::Perturbed => MeshSpec::Perturbed {
                a: 0.0,
                b: 1.0,
                n,
                amplitude: PERTURBATION,
                seed: self.seed,
            },
            MeshKind::Piecewise => MeshSpec::PiecewiseUniform {
                a: 0.0,
                b: 1.0,
                breakpoint: self.breakpoint,
                n,
            },
        }
    }
}

/// Error history of one method across the sweep.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub reports: Vec<ErrorReport>,
}

type Column = (ErrorKind, Vec<RateRow>);

#[derive(Debug)]
pub struct SweepReport {
    pub k: usize,
    pub runs: Vec<MethodRun>,
    /// `(N, max |u_h - ū_h|)` when both methods ran.
    pub gap: Vec<(usize, f64)>,
    pub warnings: Vec<String>,
    /// Errors below this are flagged as round-off.
    pub floor: f64,
    /// Set when the sweep stopped early; the tables hold the completed rows.
    pub failure: Option<CliError>,
}

impl SweepReport {
    pub fn exit_code(&self) -> i32 {
        if self.failure.is_some() {
            1
        } else if !self.warnings.is_empty() {
            2
        } else {
            0
        }
    }

    /// Every emitted series with its method label, in output order.
    pub fn series(&self) -> Vec<(String, ErrorKind, Vec<RateRow>)> {
        let mut out = Vec::new();
        for run in &self.runs {
            for kind in ErrorKind::REPORTED {
                let pts: Vec<(usize, f64)> = run
                    .reports
                    .iter()
                    .filter_map(|r| r.get(kind).map(|e| (r.n_elements, e)))
                    .collect();
                if pts.is_empty() && !run.reports.is_empty() {
                    continue;
                }
                out.push((run.method.tag().to_string(), kind, emitted_rates(&pts, self.floor)));
            }
        }
        if !self.gap.is_empty() {
            out.push((
                "both".to_string(),
                ErrorKind::MethodGap,
                emitted_rates(&self.gap, self.floor),
            ));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for (method, kind, rows) in self.series() {
            for r in rows {
                let order = r.order.map(format_order).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{method},{},{},{kind},{},{order}",
                    self.k,
                    r.n,
                    format_error(r.error)
                );
            }
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut by_method: Vec<(String, Vec<Column>)> = Vec::new();
        for (method, kind, rows) in self.series() {
            match by_method.iter_mut().find(|(m, _)| *m == method) {
                Some((_, v)) => v.push((kind, rows)),
                None => by_method.push((method, vec![(kind, rows)])),
            }
        }
        let mut s = String::new();
        for (method, cols) in by_method {
            let ns: Vec<usize> = cols
                .first()
                .map(|(_, r)| r.iter().map(|r| r.n).collect())
                .unwrap_or_default();
            let _ = writeln!(s, "method {method}, k = {}", self.k);
            let mut header = format!("{:>5}", "N");
            for (kind, _) in &cols {
                let _ = write!(header, "  {:>w$} {:>7}", kind.tag(), "order", w = column_width(*kind));
            }
            let _ = writeln!(s, "{header}");
            for (i, n) in ns.iter().enumerate() {
                let mut line = format!("{n:>5}");
                for (kind, rows) in &cols {
                    let r = &rows[i];
                    let order = match (r.order, r.flag) {
                        (_, RateFlag::Saturated) => "sat".to_string(),
                        (Some(o), RateFlag::FpFloor) => format!("{}*", format_order(o)),
                        (Some(o), _) => format_order(o),
                        (None, _) => "-".to_string(),
                    };
                    let _ = write!(
                        line,
                        "  {:>w$} {order:>7}",
                        format_error(r.error),
                        w = column_width(*kind)
                    );
                }
                let _ = writeln!(s, "{line}");
            }
            s.push('\n');
        }
        if s.contains('*') {
            s.push_str("* error at round-off level\n");
        }
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Table => self.to_table(),
        }
    }
}

fn column_width(kind: ErrorKind) -> usize {
    kind.tag().len().max(12)
}

pub fn format_error(e: f64) -> String {
    format!("{e:.6e}")
}

pub fn format_order(o: f64) -> String {
    format!("{o:.4}")
}

/// Orders computed from the errors as they are printed, so every order cell
/// can be recomputed from the error cells.
pub fn emitted_rates(pts: &[(usize, f64)], floor: f64) -> Vec<RateRow> {
    let rounded: Vec<(usize, f64)> = pts
        .iter()
        .map(|&(n, e)| (n, format_error(e).parse().expect("formatted float parses")))
        .collect();
    convergence_rates_with_floor(&rounded, floor).expect("sweep rows are ordered and finite")
}

fn assemble(p: &Problem, mesh: &c1pg::Mesh1D, cfg: &RunConfig, method: Method) -> c1pg::Result<LinearSystem> {
    match method {
        Method::PetrovGalerkin => assemble_pg(
            p,
            mesh,
            cfg.k,
            cfg.quad_points.unwrap_or_else(|| default_quad_points(cfg.k)),
        ),
        Method::Collocation => assemble_collocation(p, mesh, cfg.k),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs the sweep; a failure stops it and is stored alongside the completed rows.
pub fn run_sweep(cfg: &RunConfig) -> SweepReport {
    let mut report = SweepReport {
        k: cfg.k,
        runs: cfg
            .methods
            .iter()
            .map(|&method| MethodRun {
                method,
                reports: Vec::new(),
            })
            .collect(),
        gap: Vec::new(),
        warnings: Vec::new(),
        floor: 0.0,
        failure: None,
    };
    if let Err(e) = sweep_into(cfg, &mut report) {
        report.failure = Some(e);
    }
    report
}

fn sweep_into(cfg: &RunConfig, report: &mut SweepReport) -> Result<(), CliError> {
    cfg.validate()?;
    let p = lookup(&cfg.problem, cfg.coefficients)?;
    report.floor = FP_FLOOR * solution_scale(&p);
    if let Some(dir) = &cfg.dump {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
    }
    for &n in &cfg.ns {
        let mesh = build_mesh(&cfg.mesh_spec(n))?;
        if let Some(dir) = &cfg.dump {
            write_file(&dir.join(format!("mesh_N{n}.txt")), &mesh.dump())?;
        }
        let mut solutions: Vec<C1Function> = Vec::new();
        let mut rows = Vec::new();
        for &method in &cfg.methods {
            let sys = assemble(&p, &mesh, cfg, method)?;
            let sol = solve(&sys)?;
            if let Some(w) = &sol.warning {
                report.warnings.push(w.clone());
            }
            let uh = C1Function::new(mesh.clone(), cfg.k, sol.coeffs)?;
            if let Some(dir) = &cfg.dump {
                let tag = method.tag();
                write_file(&dir.join(format!("matrix_{tag}_N{n}.txt")), &sys.dump_matrix())?;
                write_file(&dir.join(format!("rhs_{tag}_N{n}.txt")), &sys.dump_rhs())?;
                write_file(&dir.join(format!("coeffs_{tag}_N{n}.csv")), &uh.dump_csv())?;
            }
            rows.push(sample_errors(&uh, &p, method)?);
            solutions.push(uh);
        }
        // commit the N row only once every method succeeded
        let gap = match solutions.as_slice() {
            [a, b] => Some(sup_diff(a, b, 10 * (cfg.k + 1))?),
            _ => None,
        };
        for (run, r) in report.runs.iter_mut().zip(rows) {
            run.reports.push(r);
        }
        if let Some(g) = gap {
            report.gap.push((n, g));
        }
    }
    Ok(())
}

/// Renders and writes the report, returning the process exit code.
pub fn emit(cfg: &RunConfig, report: &SweepReport) -> i32 {
    let text = report.render(cfg.format);
    let written = match &cfg.out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(e) = &report.failure {
        eprintln!("error: {e}");
    }
    match written {
        Ok(()) => report.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(method: MethodChoice, ns: &[usize]) -> RunConfig {
        let mut args = Args::parse_from(["c1pg", "--format", "csv"]);
        args.method = method;
        args.n = ns.to_vec();
        RunConfig::from_args(args).unwrap()
    }

    #[test]
    fn flags_parse() {
        let args = Args::parse_from([
            "c1pg",
            "--method",
            "both",
            "--k",
            "4",
            "--mesh",
            "piecewise",
            "--breakpoint",
            "0.5",
            "--n",
            "4,8,16",
            "--seed",
            "7",
            "--problem",
            "example2-case2",
            "--alpha",
            "2",
            "--beta",
            "0",
            "--gamma",
            "3",
            "--quad-points",
            "9",
            "--format",
            "csv",
            "--out",
            "x.csv",
        ]);
        let cfg = RunConfig::from_args(args).unwrap();
        assert_eq!(cfg.methods.len(), 2);
        assert_eq!(cfg.k, 4);
        assert_eq!(cfg.ns, vec![4, 8, 16]);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.quad_points, Some(9));
        assert_eq!(cfg.coefficients.gamma, 3.0);
        assert_eq!(cfg.format, Format::Csv);
        assert_eq!(cfg.out.as_deref(), Some(Path::new("x.csv")));
        assert!(matches!(cfg.mesh_spec(4), MeshSpec::PiecewiseUniform { breakpoint, .. } if breakpoint == 0.5));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for argv in [
            vec!["c1pg", "--k", "2"],
            vec!["c1pg", "--n", "8,4"],
            vec!["c1pg", "--n", "8,8"],
            vec!["c1pg", "--problem", "nope"],
            vec!["c1pg", "--mesh", "piecewise", "--n", "3,6"],
            vec!["c1pg", "--quad-points", "4"],
            vec!["c1pg", "--alpha", "-1"],
        ] {
            assert!(RunConfig::from_args(Args::parse_from(&argv)).is_err(), "{argv:?}");
        }
        let err = RunConfig::from_args(Args::parse_from(["c1pg", "--problem", "nope"])).unwrap_err();
        assert!(err.to_string().contains("example2-case3"));
    }

    #[test]
    fn csv_layout() {
        let report = run_sweep(&cfg(MethodChoice::Pg, &[4, 8]));
        assert_eq!(report.exit_code(), 0);
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        // k = 3 has no e_u series
        assert_eq!(lines.len(), 1 + 5 * 2);
        assert!(lines[1].starts_with("pg,3,4,e_un,"));
        assert!(lines[1].ends_with(','));
        assert!(!csv.contains("e_u,"));
    }

    #[test]
    fn both_adds_gap_series() {
        let report = run_sweep(&cfg(MethodChoice::Both, &[4, 8]));
        let csv = report.to_csv();
        assert!(csv.contains("\ngauss,3,8,h2_diff,"));
        assert!(csv.contains("\nboth,3,8,uh_minus_ubar,"));
        let table = report.to_table();
        assert!(table.contains("method pg") && table.contains("method gauss") && table.contains("method both"));
    }

    #[test]
    fn failure_keeps_completed_rows() {
        let mut c = cfg(MethodChoice::Pg, &[4, 8]);
        c.problem = "missing".into();
        let report = run_sweep(&c);
        assert_eq!(report.exit_code(), 1);
        assert_eq!(report.to_csv(), format!("{CSV_HEADER}\n"));

        // a dump directory that cannot be created stops after the first row
        let dir = std::env::temp_dir().join(format!("c1pg-blocker-{}", std::process::id()));
        fs::write(&dir, "").unwrap();
        let mut c = cfg(MethodChoice::Pg, &[4, 8]);
        c.dump = Some(dir.join("sub"));
        let report = run_sweep(&c);
        fs::remove_file(&dir).unwrap();
        assert_eq!(report.exit_code(), 1);
        assert!(report.runs[0].reports.is_empty());
    }

    #[test]
    fn emitted_orders_match_rounded_errors() {
        let rows = emitted_rates(&[(16, 2.91e-07), (32, 1.80e-08)], 0.0);
        assert_eq!(format_order(rows[1].order.unwrap()), "4.0150");
    }

    #[test]
    fn table_marks_saturation() {
        let report = SweepReport {
            k: 3,
            runs: vec![],
            gap: vec![(4, 1e-3), (8, 0.0)],
            warnings: vec!["w".into()],
            floor: 0.0,
            failure: None,
        };
        assert!(report.to_table().contains("sat"));
        assert_eq!(report.exit_code(), 2);
    }
}
