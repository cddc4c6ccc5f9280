//! The C1 trial space: piecewise polynomials of degree `k` whose values and
//! first derivatives are continuous across nodes.
//!
//! On each element the local basis is the four reference Hermite cubics
//! followed by the bubbles `J_n^{-2,-2}(s)`, `n = 4..=k`. Value and slope
//! degrees of freedom live on nodes and are shared by the neighbouring
//! elements, bubble coefficients belong to one element. Slope DOFs hold the
//! physical derivative `u'(x_j)`; the factor `h/2` that turns it into a
//! reference Hermite coefficient is applied whenever an element is touched.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::mesh::Mesh1D;
use crate::orthopoly::{jacobi_eval, JacobiIndex};

/// Polynomial degree of the trial space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceConfig {
    k: usize,
}

impl SpaceConfig {
    pub fn new(k: usize) -> Result<Self> {
        if k < 3 {
            return invalid(format!("C1 space needs degree k >= 3, got {k}"));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn local_dim(&self) -> usize {
        self.k + 1
    }

    /// Number of free DOFs on `n` elements, `n (k - 1)`.
    pub fn free_dofs(&self, n_elements: usize) -> usize {
        n_elements * (self.k - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    Value { node: usize },
    Slope { node: usize },
    Bubble { element: usize, degree: usize },
}

/// Global numbering of the free DOFs.
///
/// Ordering walks the mesh left to right: the slope at `x_0`, then for each
/// element its bubbles followed by the value and slope at its right node. The
/// value DOFs at `x_0` and `x_N` are eliminated by the boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    config: SpaceConfig,
    n_elements: usize,
    value_ids: Vec<Option<usize>>,
    slope_ids: Vec<usize>,
    bubble_ids: Vec<Vec<usize>>,
    kinds: Vec<DofKind>,
}

impl DofLayout {
    pub fn new(config: SpaceConfig, n_elements: usize) -> Self {
        let k = config.k();
        let mut kinds = Vec::with_capacity(config.free_dofs(n_elements));
        let mut value_ids = vec![None; n_elements + 1];
        let mut slope_ids = vec![0; n_elements + 1];
        let mut bubble_ids = Vec::with_capacity(n_elements);

        slope_ids[0] = kinds.len();
        kinds.push(DofKind::Slope { node: 0 });
        for e in 0..n_elements {
            let mut ids = Vec::with_capacity(k - 3);
            for degree in 4..=k {
                ids.push(kinds.len());
                kinds.push(DofKind::Bubble { element: e, degree });
            }
            bubble_ids.push(ids);
            let node = e + 1;
            if node < n_elements {
                value_ids[node] = Some(kinds.len());
                kinds.push(DofKind::Value { node });
            }
            slope_ids[node] = kinds.len();
            kinds.push(DofKind::Slope { node });
        }
        debug_assert_eq!(kinds.len(), config.free_dofs(n_elements));
        Self {
            config,
            n_elements,
            value_ids,
            slope_ids,
            bubble_ids,
            kinds,
        }
    }

    pub fn config(&self) -> SpaceConfig {
        self.config
    }

    pub fn k(&self) -> usize {
        self.config.k()
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_dofs(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, id: usize) -> DofKind {
        self.kinds[id]
    }

    pub fn value_id(&self, node: usize) -> Option<usize> {
        self.value_ids[node]
    }

    pub fn slope_id(&self, node: usize) -> usize {
        self.slope_ids[node]
    }

    pub fn bubble_ids(&self, e: usize) -> &[usize] {
        &self.bubble_ids[e]
    }

    /// Global ids of the `k + 1` local basis functions of element `e`, in
    /// local-shape order. `None` marks an eliminated boundary value.
    pub fn local_dofs(&self, e: usize) -> Vec<Option<usize>> {
        let mut out = Vec::with_capacity(self.k() + 1);
        out.push(self.value_ids[e]);
        out.push(Some(self.slope_ids[e]));
        out.push(self.value_ids[e + 1]);
        out.push(Some(self.slope_ids[e + 1]));
        out.extend(self.bubble_ids[e].iter().map(|&id| Some(id)));
        out
    }

    /// Factor mapping a global DOF value to the coefficient of local shape `a`
    /// on an element of size `h`.
    pub fn local_scale(a: usize, h: f64) -> f64 {
        if a == 1 || a == 3 {
            0.5 * h
        } else {
            1.0
        }
    }
}

fn hermite(s: f64, d: usize) -> [f64; 4] {
    match d {
        0 => [
            (2.0 - 3.0 * s + s * s * s) / 4.0,
            (1.0 - s - s * s + s * s * s) / 4.0,
            (2.0 + 3.0 * s - s * s * s) / 4.0,
            (-1.0 - s + s * s + s * s * s) / 4.0,
        ],
        1 => [
            (-3.0 + 3.0 * s * s) / 4.0,
            (-1.0 - 2.0 * s + 3.0 * s * s) / 4.0,
            (3.0 - 3.0 * s * s) / 4.0,
            (-1.0 + 2.0 * s + 3.0 * s * s) / 4.0,
        ],
        _ => [1.5 * s, (-1.0 + 3.0 * s) / 2.0, -1.5 * s, (1.0 + 3.0 * s) / 2.0],
    }
}

/// Reference-coordinate derivatives of the `k + 1` local shape functions:
/// value-left, slope-left, value-right, slope-right Hermite cubics, then
/// `J_n^{-2,-2}` for `n = 4..=k`.
pub fn local_shape(k: usize, s: f64, d: usize) -> Result<Vec<f64>> {
    if d > 2 {
        return invalid(format!("derivative order {d} not supported (max 2)"));
    }
    SpaceConfig::new(k)?;
    Ok(local_shape_unchecked(k, s, d))
}

pub(crate) fn local_shape_unchecked(k: usize, s: f64, d: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.extend_from_slice(&hermite(s, d));
    for n in 4..=k {
        out.push(jacobi_eval(n, JacobiIndex::BUBBLE, s, d).expect("bubble degree >= 4"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A member of the C1 space on a given mesh.
///
/// Solver outputs have zero boundary values; projections of functions that
/// do not vanish at the ends keep their boundary values in `boundary`.
#[derive(Debug, Clone, PartialEq)]
pub struct C1Function {
    mesh: Mesh1D,
    layout: DofLayout,
    coeffs: Vec<f64>,
    boundary: (f64, f64),
}

impl C1Function {
    pub fn new(mesh: Mesh1D, k: usize, coeffs: Vec<f64>) -> Result<Self> {
        Self::with_boundary(mesh, k, coeffs, (0.0, 0.0))
    }

    pub fn with_boundary(mesh: Mesh1D, k: usize, coeffs: Vec<f64>, boundary: (f64, f64)) -> Result<Self> {
        let layout = DofLayout::new(SpaceConfig::new(k)?, mesh.n_elements());
        if coeffs.len() != layout.n_dofs() {
            return invalid(format!(
                "expected {} coefficients, got {}",
                layout.n_dofs(),
                coeffs.len()
            ));
        }
        Ok(Self {
            mesh,
            layout,
            coeffs,
            boundary,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn layout(&self) -> &DofLayout {
        &self.layout
    }

    pub fn k(&self) -> usize {
        self.layout.k()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn boundary(&self) -> (f64, f64) {
        self.boundary
    }

    /// Nodal value `u(x_j)`.
    pub fn node_value(&self, j: usize) -> f64 {
        match self.layout.value_id(j) {
            Some(id) => self.coeffs[id],
            None if j == 0 => self.boundary.0,
            None => self.boundary.1,
        }
    }

    /// Nodal slope `u'(x_j)`.
    pub fn node_slope(&self, j: usize) -> f64 {
        self.coeffs[self.layout.slope_id(j)]
    }

    /// Coefficients of the local shape functions on element `e`.
    pub fn local_coeffs(&self, e: usize) -> Vec<f64> {
        let h = self.mesh.h(e);
        let mut out = Vec::with_capacity(self.k() + 1);
        out.push(self.node_value(e));
        out.push(0.5 * h * self.node_slope(e));
        out.push(self.node_value(e + 1));
        out.push(0.5 * h * self.node_slope(e + 1));
        out.extend(self.layout.bubble_ids(e).iter().map(|&id| self.coeffs[id]));
        out
    }

    /// `d`-th physical derivative at reference point `s` of element `e`.
    pub fn eval_in(&self, e: usize, s: f64, d: usize) -> f64 {
        let shapes = local_shape_unchecked(self.k(), s, d.min(2));
        let local = self.local_coeffs(e);
        let scale = (2.0 / self.mesh.h(e)).powi(d as i32);
        scale * shapes.iter().zip(&local).map(|(p, c)| p * c).sum::<f64>()
    }

    fn check_order(d: usize) -> Result<()> {
        if d > 2 {
            return invalid(format!("derivative order {d} not supported (max 2)"));
        }
        Ok(())
    }

    /// `d`-th derivative at `x`. Interior nodes are evaluated from the left element.
    pub fn eval(&self, x: f64, d: usize) -> Result<f64> {
        Ok(self.eval_reporting_side(x, d)?.0)
    }

    /// Like [`eval`](Self::eval), and for `d = 2` at an interior node also
    /// reports which element's polynomial produced the value.
    pub fn eval_reporting_side(&self, x: f64, d: usize) -> Result<(f64, Option<Side>)> {
        Self::check_order(d)?;
        let e = self.mesh.locate(x)?;
        let s = self.mesh.to_reference(e, x)?;
        let at_interior_node = x == self.mesh.nodes()[e + 1] && e + 1 < self.mesh.n_elements();
        let side = (d == 2 && at_interior_node).then_some(Side::Left);
        Ok((self.eval_in(e, s, d), side))
    }

    /// Evaluates from a chosen side at a node, or anywhere inside an element.
    pub fn eval_on_side(&self, x: f64, d: usize, side: Side) -> Result<f64> {
        Self::check_order(d)?;
        let mut e = self.mesh.locate(x)?;
        if side == Side::Right && x == self.mesh.nodes()[e + 1] && e + 1 < self.mesh.n_elements() {
            e += 1;
        }
        let s = self.mesh.to_reference(e, x)?;
        Ok(self.eval_in(e, s, d))
    }

    /// CSV with header `dof,kind,index,coefficient`.
    pub fn dump_csv(&self) -> String {
        let mut out = String::from("dof,kind,index,coefficient\n");
        for (id, c) in self.coeffs.iter().enumerate() {
            let (kind, index) = match self.layout.kind(id) {
                DofKind::Value { node } => ("value".to_string(), node),
                DofKind::Slope { node } => ("slope".to_string(), node),
                DofKind::Bubble { element, degree } => (format!("bubble-{degree}"), element),
            };
            let _ = writeln!(out, "{id},{kind},{index},{c:.16e}");
        }
        out
    }

    /// Errors unless `other` lives on the same mesh with the same degree.
    pub fn check_compatible(&self, other: &C1Function) -> Result<()> {
        if self.k() != other.k() {
            return Err(Error::Mismatch(format!("degree {} vs {}", self.k(), other.k())));
        }
        if self.mesh != other.mesh {
            return Err(Error::Mismatch("meshes differ".into()));
        }
        Ok(())
    }
}
