//! Petrov-Galerkin and Gauss collocation systems for
//! `-(α u')' + β u' + γ u = f` with homogeneous Dirichlet conditions.
//!
//! Both methods use the C1 trial space with `N (k - 1)` free DOFs. The
//! divergence-form operator is expanded as `-α u'' - α' u' + β u' + γ u`, so
//! `α'` must be supplied with the problem. Petrov-Galerkin tests against the
//! Legendre polynomials `L_0..L_{k-2}` on every element; collocation enforces
//! the strong equation at the `k - 1` Gauss points of every element. Rows are
//! ordered element-major.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::c1space::{local_shape_unchecked, C1Function, DofLayout, SpaceConfig};
use crate::error::{invalid, Error, Result};
use crate::mesh::Mesh1D;
use crate::orthopoly::{gauss_rule, legendre_table, QuadratureRule};
use crate::projection::{ScalarFn, SmoothFunction};

/// Condition estimates above this attach a warning to the solution.
pub const CONDITION_WARNING: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    PetrovGalerkin,
    Collocation,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::PetrovGalerkin => "pg",
            Method::Collocation => "gauss",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Default Petrov-Galerkin quadrature size for degree `k`.
pub fn default_quad_points(k: usize) -> usize {
    k + 4
}

/// Coefficient functions `α, α', β, γ`.
#[derive(Clone)]
pub struct Coefficients {
    pub alpha: ScalarFn,
    pub dalpha: ScalarFn,
    pub beta: ScalarFn,
    pub gamma: ScalarFn,
}

impl Coefficients {
    pub fn constant(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            alpha: Arc::new(move |_| alpha),
            dalpha: Arc::new(|_| 0.0),
            beta: Arc::new(move |_| beta),
            gamma: Arc::new(move |_| gamma),
        }
    }

    /// `-α u'' - α' u' + β u' + γ u` evaluated from pointwise derivatives.
    pub fn apply(&self, x: f64, u: f64, du: f64, d2u: f64) -> f64 {
        -(self.alpha)(x) * d2u + ((self.beta)(x) - (self.dalpha)(x)) * du + (self.gamma)(x) * u
    }
}

/// A registered two-point boundary value problem with known solution.
#[derive(Clone)]
pub struct Problem {
    name: String,
    domain: (f64, f64),
    coeffs: Coefficients,
    f: ScalarFn,
    exact: SmoothFunction,
    constant_coeff: bool,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("constant_coeff", &self.constant_coeff)
            .finish_non_exhaustive()
    }
}

impl Problem {
    /// Validates `α > 0` on a 1000-point grid and, when `constant_coeff` is
    /// set, that `α, β, γ` really are constant.
    pub fn new(
        name: impl Into<String>,
        domain: (f64, f64),
        coeffs: Coefficients,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        exact: SmoothFunction,
        constant_coeff: bool,
    ) -> Result<Self> {
        let name = name.into();
        let (a, b) = domain;
        let fail = |reason: String| Error::InvalidProblem {
            id: name.clone(),
            reason,
        };
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(fail(format!("empty domain ({a}, {b})")));
        }
        let alpha_min = (0..1000)
            .map(|i| (coeffs.alpha)(a + (b - a) * i as f64 / 999.0))
            .fold(f64::INFINITY, f64::min);
        if alpha_min.is_nan() || alpha_min <= 0.0 {
            return Err(fail(format!("alpha not bounded away from zero (min {alpha_min})")));
        }
        if constant_coeff {
            let x0 = a;
            for i in 0..100 {
                let x = a + (b - a) * crate::mesh::node_uniform(0x5eed, i);
                for (label, c) in [
                    ("alpha", &coeffs.alpha),
                    ("beta", &coeffs.beta),
                    ("gamma", &coeffs.gamma),
                ] {
                    if c(x) != c(x0) {
                        return Err(fail(format!("{label} is not constant")));
                    }
                }
                if (coeffs.dalpha)(x) != 0.0 {
                    return Err(fail("alpha' must vanish for constant coefficients".into()));
                }
            }
        }
        Ok(Self {
            name,
            domain,
            coeffs,
            f: Arc::new(f),
            exact,
            constant_coeff,
        })
    }

    /// Builds `f` from the exact solution through the operator itself.
    pub fn manufactured(
        name: impl Into<String>,
        domain: (f64, f64),
        coeffs: Coefficients,
        exact: SmoothFunction,
        constant_coeff: bool,
    ) -> Result<Self> {
        let c = coeffs.clone();
        let u = exact.clone();
        let f = move |x: f64| c.apply(x, u.value(x), u.d1(x), u.d2(x));
        Self::new(name, domain, coeffs, f, exact, constant_coeff)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn coeffs(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn alpha(&self, x: f64) -> f64 {
        (self.coeffs.alpha)(x)
    }

    pub fn dalpha(&self, x: f64) -> f64 {
        (self.coeffs.dalpha)(x)
    }

    pub fn beta(&self, x: f64) -> f64 {
        (self.coeffs.beta)(x)
    }

    pub fn gamma(&self, x: f64) -> f64 {
        (self.coeffs.gamma)(x)
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn exact(&self) -> &SmoothFunction {
        &self.exact
    }

    pub fn is_constant_coeff(&self) -> bool {
        self.constant_coeff
    }

    /// Strong-form residual `-(α u')' + β u' + γ u - f` of a function given pointwise.
    pub fn residual(&self, x: f64, u: f64, du: f64, d2u: f64) -> f64 {
        self.coeffs.apply(x, u, du, d2u) - self.f(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowLabel {
    pub element: usize,
    /// Legendre test degree (Petrov-Galerkin) or Gauss point index (collocation).
    pub index: usize,
}

/// Dense square system together with the bookkeeping needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub rows: Vec<RowLabel>,
    pub method: Method,
    pub n_elements: usize,
    pub k: usize,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Non-zero matrix entries as `row col value` lines, 17 significant digits.
    pub fn dump_matrix(&self) -> String {
        let mut out = String::new();
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                let v = self.matrix[(i, j)];
                if v != 0.0 {
                    let _ = writeln!(out, "{i} {j} {v:.16e}");
                }
            }
        }
        out
    }

    /// Right-hand side as `row value` lines.
    pub fn dump_rhs(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.rhs.iter().enumerate() {
            let _ = writeln!(out, "{i} {v:.16e}");
        }
        out
    }
}

/// Shape values at fixed reference points, shared by all elements.
struct ShapeTable {
    /// `[point][order][local]`
    shapes: Vec<[Vec<f64>; 3]>,
}

impl ShapeTable {
    fn new(k: usize, points: &[f64]) -> Self {
        let shapes = points
            .iter()
            .map(|&s| {
                [
                    local_shape_unchecked(k, s, 0),
                    local_shape_unchecked(k, s, 1),
                    local_shape_unchecked(k, s, 2),
                ]
            })
            .collect();
        Self { shapes }
    }

    /// Operator applied to each local shape at point `q` of element `e`,
    /// already scaled to global DOF units.
    fn operator_row(&self, p: &Problem, mesh: &Mesh1D, e: usize, q: usize, x: f64) -> Vec<f64> {
        let h = mesh.h(e);
        let [v, d1, d2] = &self.shapes[q];
        let (alpha, drift, gamma) = (p.alpha(x), p.beta(x) - p.dalpha(x), p.gamma(x));
        let j1 = 2.0 / h;
        let j2 = j1 * j1;
        (0..v.len())
            .map(|a| {
                let op = -alpha * j2 * d2[a] + drift * j1 * d1[a] + gamma * v[a];
                op * DofLayout::local_scale(a, h)
            })
            .collect()
    }
}

fn check_setup(p: &Problem, mesh: &Mesh1D, k: usize) -> Result<DofLayout> {
    let config = SpaceConfig::new(k)?;
    let (a, b) = p.domain();
    if mesh.a() != a || mesh.b() != b {
        return invalid(format!(
            "mesh spans [{}, {}] but problem `{}` lives on [{a}, {b}]",
            mesh.a(),
            mesh.b(),
            p.name()
        ));
    }
    Ok(DofLayout::new(config, mesh.n_elements()))
}

/// Petrov-Galerkin system with a `quad_points`-point Gauss rule per element.
/// Requires `quad_points >= k + 2`.
pub fn assemble_pg(p: &Problem, mesh: &Mesh1D, k: usize, quad_points: usize) -> Result<LinearSystem> {
    if quad_points < k + 2 {
        return invalid(format!(
            "Petrov-Galerkin quadrature needs at least k + 2 = {} points, got {quad_points}",
            k + 2
        ));
    }
    assemble_pg_with_rule(p, mesh, k, &gauss_rule(quad_points)?)
}

/// Petrov-Galerkin assembly with an arbitrary rule, including under-integrated
/// ones such as the `(k - 1)`-point rule that links it to collocation.
pub fn assemble_pg_with_rule(p: &Problem, mesh: &Mesh1D, k: usize, rule: &QuadratureRule) -> Result<LinearSystem> {
    let layout = check_setup(p, mesh, k)?;
    let n = layout.n_dofs();
    let tests = k - 1;
    let table = ShapeTable::new(k, rule.nodes());
    let legendre: Vec<Vec<[f64; 3]>> = rule.nodes().iter().map(|&s| legendre_table(k - 2, s)).collect();

    let mut matrix = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let mut rows = Vec::with_capacity(n);
    for e in 0..mesh.n_elements() {
        let dofs = layout.local_dofs(e);
        let h = mesh.h(e);
        let row0 = e * tests;
        for j in 0..tests {
            rows.push(RowLabel { element: e, index: j });
        }
        for (q, (s, w)) in rule.iter().enumerate() {
            let x = mesh.from_reference(e, s);
            let wq = 0.5 * h * w;
            let op = table.operator_row(p, mesh, e, q, x);
            let fq = p.f(x);
            for j in 0..tests {
                let lj = wq * legendre[q][j][0];
                for (a, dof) in dofs.iter().enumerate() {
                    if let Some(col) = dof {
                        matrix[(row0 + j, *col)] += lj * op[a];
                    }
                }
                rhs[row0 + j] += lj * fq;
            }
        }
    }
    Ok(LinearSystem {
        matrix,
        rhs,
        rows,
        method: Method::PetrovGalerkin,
        n_elements: mesh.n_elements(),
        k,
    })
}

/// Collocation at the `k - 1` Gauss points of every element.
pub fn assemble_collocation(p: &Problem, mesh: &Mesh1D, k: usize) -> Result<LinearSystem> {
    let layout = check_setup(p, mesh, k)?;
    let n = layout.n_dofs();
    let rule = gauss_rule(k - 1)?;
    let table = ShapeTable::new(k, rule.nodes());

    let mut matrix = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let mut rows = Vec::with_capacity(n);
    for e in 0..mesh.n_elements() {
        let dofs = layout.local_dofs(e);
        for (m, &s) in rule.nodes().iter().enumerate() {
            let row = rows.len();
            rows.push(RowLabel { element: e, index: m });
            let x = mesh.from_reference(e, s);
            let op = table.operator_row(p, mesh, e, m, x);
            for (a, dof) in dofs.iter().enumerate() {
                if let Some(col) = dof {
                    matrix[(row, *col)] += op[a];
                }
            }
            rhs[row] = p.f(x);
        }
    }
    Ok(LinearSystem {
        matrix,
        rhs,
        rows,
        method: Method::Collocation,
        n_elements: mesh.n_elements(),
        k,
    })
}

/// Weights every collocation row by its Gauss weight and sums against the
/// Legendre test functions, giving the discrete Petrov-Galerkin form.
pub fn collocation_as_petrov_galerkin(colloc: &LinearSystem, mesh: &Mesh1D) -> Result<LinearSystem> {
    if colloc.method != Method::Collocation {
        return invalid("expected a collocation system");
    }
    if colloc.n_elements != mesh.n_elements() {
        return Err(Error::Mismatch("collocation system and mesh differ".into()));
    }
    let k = colloc.k;
    let tests = k - 1;
    let rule = gauss_rule(k - 1)?;
    let n = colloc.dim();
    let mut matrix = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let mut rows = Vec::with_capacity(n);
    for e in 0..mesh.n_elements() {
        let h = mesh.h(e);
        for j in 0..tests {
            let row = e * tests + j;
            rows.push(RowLabel { element: e, index: j });
            for (m, (s, w)) in rule.iter().enumerate() {
                let src = e * tests + m;
                let scale = 0.5 * h * w * legendre_table(j, s)[j][0];
                for c in 0..n {
                    matrix[(row, c)] += scale * colloc.matrix[(src, c)];
                }
                rhs[row] += scale * colloc.rhs[src];
            }
        }
    }
    Ok(LinearSystem {
        matrix,
        rhs,
        rows,
        method: Method::PetrovGalerkin,
        n_elements: colloc.n_elements,
        k,
    })
}

/// Output of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub coeffs: Vec<f64>,
    /// 1-norm condition estimate of the row-equilibrated matrix.
    pub condition: f64,
    pub warning: Option<String>,
}

/// Dense LU with partial pivoting after row equilibration.
pub fn solve(sys: &LinearSystem) -> Result<Solution> {
    let n = sys.dim();
    if sys.matrix.nrows() != n || sys.matrix.ncols() != n {
        return invalid(format!(
            "system is {}x{} with {} right-hand side entries",
            sys.matrix.nrows(),
            sys.matrix.ncols(),
            n
        ));
    }
    let singular = || Error::Singular {
        method: sys.method.tag().to_string(),
        n_elements: sys.n_elements,
    };
    let mut a = sys.matrix.clone();
    let mut b = sys.rhs.clone();
    for i in 0..n {
        let scale = a.row(i).amax();
        if scale == 0.0 || !scale.is_finite() {
            return Err(singular());
        }
        a.row_mut(i).scale_mut(1.0 / scale);
        b[i] /= scale;
    }
    let norm_a = one_norm(&a);
    let lu = a.lu();
    let x = lu.solve(&b).ok_or_else(singular)?;
    let inv = lu.try_inverse().ok_or_else(singular)?;
    let condition = norm_a * one_norm(&inv);
    if !x.iter().all(|v| v.is_finite()) {
        return Err(singular());
    }
    let warning = (condition > CONDITION_WARNING).then(|| {
        format!(
            "{} system with N={} is ill-conditioned (condition estimate {condition:.3e})",
            sys.method, sys.n_elements
        )
    });
    Ok(Solution {
        coeffs: x.iter().copied().collect(),
        condition,
        warning,
    })
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Assembles and solves one method, returning the discrete solution.
pub fn solve_problem(
    p: &Problem,
    mesh: &Mesh1D,
    k: usize,
    method: Method,
    quad_points: Option<usize>,
) -> Result<(C1Function, Solution)> {
    let sys = match method {
        Method::PetrovGalerkin => assemble_pg(p, mesh, k, quad_points.unwrap_or_else(|| default_quad_points(k)))?,
        Method::Collocation => assemble_collocation(p, mesh, k)?,
    };
    let sol = solve(&sys)?;
    let f = C1Function::new(mesh.clone(), k, sol.coeffs.clone())?;
    Ok((f, sol))
}
