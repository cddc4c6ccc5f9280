//! Error sampling at the superconvergence point families and observed
//! convergence orders.

use std::fmt;

use crate::assembly::{Method, Problem};
use crate::c1space::C1Function;
use crate::error::{invalid, Error, Result};
use crate::orthopoly::{gauss_rule, interior_lobatto_points, jacobi_m2_roots};
use crate::projection::truncated_projection;

/// Errors below `FP_FLOOR * solution scale` are treated as round-off.
pub const FP_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorKind {
    /// max |u - u_h| over the mesh nodes
    NodalValue,
    /// max |u' - u_h'| over the mesh nodes
    NodalSlope,
    /// max |u - u_h| at the interior roots of `J_{k+1}^{-2,-2}`
    JacobiRoots,
    /// max |u' - u_h'| at the interior Lobatto points
    LobattoSlope,
    /// max |u'' - u_h''| at the Gauss points
    GaussCurvature,
    /// `‖u_h - u_I‖_{H²}`
    H2Diff,
    /// max |u_h - ū_h| between the Petrov-Galerkin and collocation solutions
    MethodGap,
}

impl ErrorKind {
    pub const REPORTED: [ErrorKind; 6] = [
        ErrorKind::NodalValue,
        ErrorKind::NodalSlope,
        ErrorKind::JacobiRoots,
        ErrorKind::LobattoSlope,
        ErrorKind::GaussCurvature,
        ErrorKind::H2Diff,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            ErrorKind::NodalValue => "e_un",
            ErrorKind::NodalSlope => "e_dun",
            ErrorKind::JacobiRoots => "e_u",
            ErrorKind::LobattoSlope => "e_du",
            ErrorKind::GaussCurvature => "e_d2u",
            ErrorKind::H2Diff => "h2_diff",
            ErrorKind::MethodGap => "uh_minus_ubar",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Superconvergence errors of one discrete solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub method: Method,
    pub k: usize,
    pub n_elements: usize,
    pub e_un: f64,
    pub e_dun: f64,
    /// Absent for `k = 3`, which has no interior Jacobi roots.
    pub e_u: Option<f64>,
    pub e_du: f64,
    pub e_d2u: f64,
    pub h2_diff: f64,
}

impl ErrorReport {
    pub fn get(&self, kind: ErrorKind) -> Option<f64> {
        match kind {
            ErrorKind::NodalValue => Some(self.e_un),
            ErrorKind::NodalSlope => Some(self.e_dun),
            ErrorKind::JacobiRoots => self.e_u,
            ErrorKind::LobattoSlope => Some(self.e_du),
            ErrorKind::GaussCurvature => Some(self.e_d2u),
            ErrorKind::H2Diff => Some(self.h2_diff),
            ErrorKind::MethodGap => None,
        }
    }
}

/// Max of `|∂^d (u - v)|` over reference points mapped into every element.
fn max_family_error(v: &C1Function, exact: impl Fn(f64, usize) -> f64, points: &[f64], d: usize) -> f64 {
    let mesh = v.mesh();
    let mut worst: f64 = 0.0;
    for e in 0..mesh.n_elements() {
        for &s in points {
            let x = mesh.from_reference(e, s);
            worst = worst.max((exact(x, d) - v.eval_in(e, s, d)).abs());
        }
    }
    worst
}

/// Samples `u - v` at the nodes and at the three interior point families.
pub fn sample_against(v: &C1Function, exact: impl Fn(f64, usize) -> f64) -> Result<[Option<f64>; 5]> {
    let k = v.k();
    let mesh = v.mesh();
    let mut e_un: f64 = 0.0;
    let mut e_dun: f64 = 0.0;
    for (j, &x) in mesh.nodes().iter().enumerate() {
        e_un = e_un.max((exact(x, 0) - v.node_value(j)).abs());
        e_dun = e_dun.max((exact(x, 1) - v.node_slope(j)).abs());
    }
    let roots = jacobi_m2_roots(k)?;
    let e_u = (!roots.is_empty()).then(|| max_family_error(v, &exact, &roots, 0));
    let e_du = max_family_error(v, &exact, &interior_lobatto_points(k)?, 1);
    let e_d2u = max_family_error(v, &exact, gauss_rule(k - 1)?.nodes(), 2);
    Ok([Some(e_un), Some(e_dun), e_u, Some(e_du), Some(e_d2u)])
}

/// Errors of `u_h` against the exact solution of `p`, plus `‖u_h - u_I‖_{H²}`.
pub fn sample_errors(u_h: &C1Function, p: &Problem, method: Method) -> Result<ErrorReport> {
    let exact = p.exact();
    let [e_un, e_dun, e_u, e_du, e_d2u] = sample_against(u_h, |x, d| exact.eval(x, d))?;
    let u_i = truncated_projection(exact, u_h.mesh(), u_h.k())?;
    Ok(ErrorReport {
        method,
        k: u_h.k(),
        n_elements: u_h.mesh().n_elements(),
        e_un: e_un.unwrap_or_default(),
        e_dun: e_dun.unwrap_or_default(),
        e_u,
        e_du: e_du.unwrap_or_default(),
        e_d2u: e_d2u.unwrap_or_default(),
        h2_diff: h2_norm_diff(u_h, &u_i)?,
    })
}

/// `(Σ_{d=0..2} ‖∂^d (a - b)‖²_{L²})^{1/2}`, exact for degree-`k` pieces.
pub fn h2_norm_diff(a: &C1Function, b: &C1Function) -> Result<f64> {
    a.check_compatible(b)?;
    let rule = gauss_rule(a.k() + 1)?;
    let mesh = a.mesh();
    let mut total = 0.0;
    for e in 0..mesh.n_elements() {
        let h = mesh.h(e);
        for (s, w) in rule.iter() {
            for d in 0..=2 {
                let diff = a.eval_in(e, s, d) - b.eval_in(e, s, d);
                total += 0.5 * h * w * diff * diff;
            }
        }
    }
    Ok(total.sqrt())
}

/// Max |a - b| over `per_element` equispaced points (ends included) of each element.
pub fn sup_diff(a: &C1Function, b: &C1Function, per_element: usize) -> Result<f64> {
    a.check_compatible(b)?;
    if per_element < 2 {
        return invalid("need at least two sample points per element");
    }
    let mut worst: f64 = 0.0;
    for e in 0..a.mesh().n_elements() {
        for i in 0..per_element {
            let s = -1.0 + 2.0 * i as f64 / (per_element - 1) as f64;
            worst = worst.max((a.eval_in(e, s, 0) - b.eval_in(e, s, 0)).abs());
        }
    }
    Ok(worst)
}

/// Max |u| on 1001 equispaced points of the problem domain.
pub fn solution_scale(p: &Problem) -> f64 {
    let (a, b) = p.domain();
    (0..=1000)
        .map(|i| p.exact().value(a + (b - a) * i as f64 / 1000.0).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateFlag {
    Ok,
    /// The error or its predecessor is exactly zero; no order is reported.
    Saturated,
    /// The error sits at round-off level and is excluded from order checks.
    FpFloor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub n: usize,
    pub error: f64,
    /// Blank on the first row and on saturated rows.
    pub order: Option<f64>,
    pub flag: RateFlag,
}

/// `log(e_{j-1}/e_j) / log(N_j/N_{j-1})` between consecutive rows.
pub fn convergence_rates(errors: &[(usize, f64)]) -> Result<Vec<RateRow>> {
    convergence_rates_with_floor(errors, 0.0)
}

/// Like [`convergence_rates`], flagging errors below `floor` as [`RateFlag::FpFloor`].
pub fn convergence_rates_with_floor(errors: &[(usize, f64)], floor: f64) -> Result<Vec<RateRow>> {
    if errors.windows(2).any(|w| w[0].0 >= w[1].0) {
        return invalid("element counts must be strictly increasing");
    }
    if let Some(&(n, e)) = errors.iter().find(|(_, e)| !e.is_finite() || *e < 0.0) {
        return invalid(format!("error {e} at N={n} is negative or not finite"));
    }
    let mut rows = Vec::with_capacity(errors.len());
    for (j, &(n, e)) in errors.iter().enumerate() {
        let mut flag = if e == 0.0 {
            RateFlag::Saturated
        } else if e < floor {
            RateFlag::FpFloor
        } else {
            RateFlag::Ok
        };
        let order = match j.checked_sub(1).map(|i| errors[i]) {
            None => None,
            Some((_, prev)) if prev == 0.0 || e == 0.0 => {
                flag = RateFlag::Saturated;
                None
            }
            Some((np, prev)) => {
                if prev < floor && flag == RateFlag::Ok {
                    flag = RateFlag::FpFloor;
                }
                Some((prev / e).ln() / (n as f64 / np as f64).ln())
            }
        };
        rows.push(RateRow {
            n,
            error: e,
            order,
            flag,
        });
    }
    Ok(rows)
}

/// Least-squares slope of `-log e` against `log N`.
pub fn fitted_order(errors: &[(usize, f64)]) -> Result<f64> {
    if errors.len() < 2 {
        return invalid("need at least two points to fit an order");
    }
    if errors.iter().any(|(_, e)| e.is_nan() || *e <= 0.0) {
        return Err(Error::InvalidArgument("cannot fit an order through zero errors".into()));
    }
    let lx: Vec<f64> = errors.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|(_, e)| -e.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(num / den)
}

/// Error history of one kind across a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub kind: ErrorKind,
    pub rows: Vec<RateRow>,
}

impl RateTable {
    pub fn new(kind: ErrorKind, errors: &[(usize, f64)], floor: f64) -> Result<Self> {
        Ok(Self {
            kind,
            rows: convergence_rates_with_floor(errors, floor)?,
        })
    }

    /// Order fitted through the rows whose `N` is in `ns`, skipping flagged rows.
    pub fn fitted_order_over(&self, ns: &[usize]) -> Option<f64> {
        let pts: Vec<(usize, f64)> = self
            .rows
            .iter()
            .filter(|r| ns.contains(&r.n) && r.flag == RateFlag::Ok)
            .map(|r| (r.n, r.error))
            .collect();
        fitted_order(&pts).ok()
    }
}
