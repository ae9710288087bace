//! Continuous P1 finite elements on [`Mesh`]: assembly, subdomain mass,
//! L² projection and norms.

use std::sync::OnceLock;

use nalgebra_sparse::{CooMatrix, CsrMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{bilinear, SpdSolver};
use crate::mesh::Mesh;

/// Nodal coefficients of one P1 function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeField(pub Vec<f64>);

impl FeField {
    pub fn zeros(n: usize) -> Self {
        FeField(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        FeField(vec![c; n])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, a: f64) -> FeField {
        FeField(self.0.iter().map(|v| a * v).collect())
    }

    /// `a·self + b·other`
    pub fn lin_comb(&self, a: f64, other: &FeField, b: f64) -> FeField {
        FeField(self.0.iter().zip(&other.0).map(|(x, y)| a * x + b * y).collect())
    }
}

pub struct FemSpace {
    mesh: Mesh,
    mass: CsrMatrix<f64>,
    stiffness: CsrMatrix<f64>,
    mass_solver: OnceLock<SpdSolver>,
}

impl std::fmt::Debug for FemSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FemSpace")
            .field("dim", &self.mesh.dim())
            .field("n", &self.mesh.n())
            .field("dofs", &self.dof_count())
            .finish()
    }
}

fn element_mass(dim: usize, measure: f64) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    match dim {
        1 => {
            let s = measure / 6.0;
            m[0][0] = 2.0 * s;
            m[1][1] = 2.0 * s;
            m[0][1] = s;
            m[1][0] = s;
        }
        _ => {
            let s = measure / 12.0;
            for (i, row) in m.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = if i == j { 2.0 * s } else { s };
                }
            }
        }
    }
    m
}

fn element_stiffness(mesh: &Mesh, c: usize, measure: f64) -> [[f64; 3]; 3] {
    let v = mesh.cell(c);
    let mut k = [[0.0; 3]; 3];
    match mesh.dim() {
        1 => {
            let s = 1.0 / measure;
            k[0][0] = s;
            k[1][1] = s;
            k[0][1] = -s;
            k[1][0] = -s;
        }
        _ => {
            let p: Vec<&[f64]> = v.iter().map(|&i| mesh.node(i)).collect();
            let two_a = 2.0 * measure;
            let grads = [
                [(p[1][1] - p[2][1]) / two_a, (p[2][0] - p[1][0]) / two_a],
                [(p[2][1] - p[0][1]) / two_a, (p[0][0] - p[2][0]) / two_a],
                [(p[0][1] - p[1][1]) / two_a, (p[1][0] - p[0][0]) / two_a],
            ];
            for i in 0..3 {
                for j in 0..3 {
                    k[i][j] = measure * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                }
            }
        }
    }
    k
}

/// Assembles exact P1 mass and stiffness matrices.
pub fn assemble(mesh: Mesh) -> Result<FemSpace> {
    let n = mesh.node_count();
    let mut mass = CooMatrix::new(n, n);
    let mut stiff = CooMatrix::new(n, n);
    for c in 0..mesh.cell_count() {
        let meas = mesh.measure(c);
        if !(meas > 0.0) {
            return Err(Error::invalid("mesh", format!("cell {c} has measure {meas}")));
        }
        let me = element_mass(mesh.dim(), meas);
        let ke = element_stiffness(&mesh, c, meas);
        let v = mesh.cell(c);
        for (a, &i) in v.iter().enumerate() {
            for (b, &j) in v.iter().enumerate() {
                mass.push(i, j, me[a][b]);
                stiff.push(i, j, ke[a][b]);
            }
        }
    }
    Ok(FemSpace {
        mesh,
        mass: CsrMatrix::from(&mass),
        stiffness: CsrMatrix::from(&stiff),
        mass_solver: OnceLock::new(),
    })
}

// Degree-4 rule on the reference triangle: (barycentric point, weight).
const TRI_RULE: [([f64; 3], f64); 6] = [
    ([0.445_948_490_915_965, 0.445_948_490_915_965, 0.108_103_018_168_070], 0.223_381_589_678_011),
    ([0.445_948_490_915_965, 0.108_103_018_168_070, 0.445_948_490_915_965], 0.223_381_589_678_011),
    ([0.108_103_018_168_070, 0.445_948_490_915_965, 0.445_948_490_915_965], 0.223_381_589_678_011),
    ([0.091_576_213_509_771, 0.091_576_213_509_771, 0.816_847_572_980_459], 0.109_951_743_655_322),
    ([0.091_576_213_509_771, 0.816_847_572_980_459, 0.091_576_213_509_771], 0.109_951_743_655_322),
    ([0.816_847_572_980_459, 0.091_576_213_509_771, 0.091_576_213_509_771], 0.109_951_743_655_322),
];

// 3-point Gauss-Legendre on [0, 1]: (barycentric point, weight).
const SEG_RULE: [([f64; 3], f64); 3] = [
    ([0.887_298_334_620_741_7, 0.112_701_665_379_258_3, 0.0], 5.0 / 18.0),
    ([0.5, 0.5, 0.0], 8.0 / 18.0),
    ([0.112_701_665_379_258_3, 0.887_298_334_620_741_7, 0.0], 5.0 / 18.0),
];

impl FemSpace {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn dof_count(&self) -> usize {
        self.mesh.node_count()
    }

    pub fn mass(&self) -> &CsrMatrix<f64> {
        &self.mass
    }

    pub fn stiffness(&self) -> &CsrMatrix<f64> {
        &self.stiffness
    }

    fn quadrature(&self) -> &'static [([f64; 3], f64)] {
        if self.dim() == 1 {
            &SEG_RULE
        } else {
            &TRI_RULE
        }
    }

    fn mass_solver(&self) -> Result<&SpdSolver> {
        if let Some(s) = self.mass_solver.get() {
            return Ok(s);
        }
        let s = SpdSolver::factor(self.mass.clone())?;
        Ok(self.mass_solver.get_or_init(|| s))
    }

    /// Load vector `∫ g φ_i` by per-cell quadrature.
    pub fn load<G: Fn(&[f64]) -> f64>(&self, g: G) -> Vec<f64> {
        let mut b = vec![0.0; self.dof_count()];
        let dim = self.dim();
        for c in 0..self.mesh.cell_count() {
            let v = self.mesh.cell(c);
            let meas = self.mesh.measure(c);
            for (bary, w) in self.quadrature() {
                let mut x = [0.0; 2];
                for (a, &i) in v.iter().enumerate() {
                    let p = self.mesh.node(i);
                    for (k, xk) in x.iter_mut().take(dim).enumerate() {
                        *xk += bary[a] * p[k];
                    }
                }
                let gx = g(&x[..dim]) * w * meas;
                for (a, &i) in v.iter().enumerate() {
                    b[i] += gx * bary[a];
                }
            }
        }
        b
    }

    /// L² projection onto the P1 space.
    pub fn l2_project<G: Fn(&[f64]) -> f64>(&self, g: G) -> Result<FeField> {
        let b = self.load(g);
        Ok(FeField(self.mass_solver()?.solve(&b)?))
    }

    /// Solves `mass · x = b`.
    pub fn solve_mass(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.mass_solver()?.solve(b)
    }

    /// Nodal interpolant.
    pub fn interpolate<G: Fn(&[f64]) -> f64>(&self, g: G) -> FeField {
        FeField(self.mesh.nodes().map(g).collect())
    }

    /// Point evaluation of a P1 function.
    pub fn evaluate(&self, field: &FeField, x: &[f64]) -> f64 {
        let c = self.mesh.locate(x);
        let v = self.mesh.cell(c);
        let p0 = self.mesh.node(v[0]);
        let u = field.coeffs();
        match self.dim() {
            1 => {
                let p1 = self.mesh.node(v[1]);
                let s = (x[0] - p0[0]) / (p1[0] - p0[0]);
                (1.0 - s) * u[v[0]] + s * u[v[1]]
            }
            _ => {
                let (p1, p2) = (self.mesh.node(v[1]), self.mesh.node(v[2]));
                let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
                let dx = [x[0] - p0[0], x[1] - p0[1]];
                let l1 = (dx[0] * (p2[1] - p0[1]) - dx[1] * (p2[0] - p0[0])) / det;
                let l2 = ((p1[0] - p0[0]) * dx[1] - (p1[1] - p0[1]) * dx[0]) / det;
                (1.0 - l1 - l2) * u[v[0]] + l1 * u[v[1]] + l2 * u[v[2]]
            }
        }
    }

    pub fn check(&self, field: &FeField) -> Result<()> {
        ensure_len("field", self.dof_count(), field.len())
    }

    /// `(u, v)_{L²(Ω)}`
    pub fn inner(&self, u: &FeField, v: &FeField) -> f64 {
        bilinear(&self.mass, u.coeffs(), v.coeffs())
    }

    pub fn l2_norm(&self, u: &FeField) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    /// `(‖u‖_{L²}, ‖∇u‖_{L²})`
    pub fn norms(&self, u: &FeField) -> (f64, f64) {
        let h1 = bilinear(&self.stiffness, u.coeffs(), u.coeffs()).max(0.0).sqrt();
        (self.l2_norm(u), h1)
    }
}

/// Axis-aligned closed box; one `[lo, hi]` pair per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Observation region `Ω \ B`, or the whole domain when `exclude` is absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoxComplement {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclude: Option<AxisBox>,
}

impl BoxComplement {
    pub fn full() -> Self {
        BoxComplement { exclude: None }
    }

    /// Excludes the same interval on every axis.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self::boxed(vec![lo; dim], vec![hi; dim])
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        BoxComplement {
            exclude: Some(AxisBox { lo, hi }),
        }
    }

    /// Compact label such as `Omega\[0.05,0.95]x[0.05,0.95]`.
    pub fn label(&self) -> String {
        match &self.exclude {
            None => "Omega".to_string(),
            Some(b) => {
                let parts: Vec<String> = b
                    .lo
                    .iter()
                    .zip(&b.hi)
                    .map(|(l, h)| format!("[{l},{h}]"))
                    .collect();
                format!("Omega\\{}", parts.join("x"))
            }
        }
    }

    pub fn validate(&self, dim: usize, n: usize) -> Result<()> {
        let Some(b) = &self.exclude else {
            return Ok(());
        };
        if b.lo.len() != dim || b.hi.len() != dim {
            return Err(Error::invalid(
                "omega",
                format!("box needs {dim} bounds per side, got {} and {}", b.lo.len(), b.hi.len()),
            ));
        }
        for (l, h) in b.lo.iter().zip(&b.hi) {
            if !(0.0 <= *l && l <= h && *h <= 1.0) {
                return Err(Error::invalid("omega", format!("[{l}, {h}] is not inside [0, 1]")));
            }
            for v in [l, h] {
                let k = v * n as f64;
                if (k - k.round()).abs() > 1e-9 {
                    return Err(Error::invalid(
                        "omega",
                        format!("box bound {v} does not fall on the {n}-cell grid"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn excludes(&self, p: &[f64]) -> bool {
        match &self.exclude {
            None => false,
            Some(b) => p
                .iter()
                .zip(b.lo.iter().zip(&b.hi))
                .all(|(x, (l, h))| *l <= *x && *x <= *h),
        }
    }
}

/// Mass matrix restricted to the observation region.
#[derive(Debug, Clone)]
pub struct SubdomainMask {
    spec: BoxComplement,
    omega_mass: CsrMatrix<f64>,
    in_omega: Vec<bool>,
    measure: f64,
}

/// Assembles `∫_ω φ_i φ_j` over the cells lying in `ω = Ω \ B`.
pub fn omega_mass(space: &FemSpace, spec: &BoxComplement) -> Result<SubdomainMask> {
    let mesh = space.mesh();
    spec.validate(mesh.dim(), mesh.n())?;
    let n = space.dof_count();
    let mut coo = CooMatrix::new(n, n);
    let mut in_omega = Vec::with_capacity(mesh.cell_count());
    let mut measure = 0.0;
    for c in 0..mesh.cell_count() {
        // aligned boxes never cut a cell, so the centroid decides membership
        let centroid = mesh.centroid(c);
        let keep = !spec.excludes(&centroid[..mesh.dim()]);
        in_omega.push(keep);
        if !keep {
            continue;
        }
        let meas = mesh.measure(c);
        measure += meas;
        let me = element_mass(mesh.dim(), meas);
        let v = mesh.cell(c);
        for (a, &i) in v.iter().enumerate() {
            for (b, &j) in v.iter().enumerate() {
                coo.push(i, j, me[a][b]);
            }
        }
    }
    if measure == 0.0 {
        return Err(Error::invalid("omega", format!("{} contains no cells", spec.label())));
    }
    Ok(SubdomainMask {
        spec: spec.clone(),
        omega_mass: CsrMatrix::from(&coo),
        in_omega,
        measure,
    })
}

impl SubdomainMask {
    pub fn spec(&self) -> &BoxComplement {
        &self.spec
    }

    pub fn matrix(&self) -> &CsrMatrix<f64> {
        &self.omega_mass
    }

    /// `|ω|`
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn cell_in_omega(&self, c: usize) -> bool {
        self.in_omega[c]
    }

    /// `(u, v)_{L²(ω)}`
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        bilinear(&self.omega_mass, u, v)
    }
}
