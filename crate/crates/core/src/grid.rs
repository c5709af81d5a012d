//! Rectangular Dirichlet grids, nodal fields, staggered gradients, and
//! discrete Orlicz-norm machinery.
//!
//! Fields store interior nodal values only; the boundary is identically 0
//! and evaluation outside the box uses that zero extension. Gradients live
//! on cells indexed by their low-corner lattice node, one forward
//! difference per axis, so the discrete divergence below is the exact
//! negative adjoint and summation by parts holds to round-off. All
//! integrals are midpoint/cell sums, which pairs with that gradient.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::young1d::YoungFunction1D;
use crate::youngnd::{ConjugateHandle, NFunction};

/// Axis-aligned box `[0, L_1] x ... x [0, L_n]` with a tensor node lattice
/// and zero Dirichlet boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    extents: Vec<f64>,
    nodes: Vec<usize>,
}

impl GridDomain {
    /// `nodes[d]` counts lattice nodes per axis including both boundary
    /// nodes, so the spacing is `extents[d] / (nodes[d] - 1)`.
    pub fn new(extents: Vec<f64>, nodes: Vec<usize>) -> Result<Arc<Self>> {
        if extents.is_empty() || extents.len() > 3 || extents.len() != nodes.len() {
            return Err(Error::invalid("domain needs 1 to 3 matching extents/node counts"));
        }
        if extents.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::invalid("extents must be positive and finite"));
        }
        if nodes.iter().any(|&m| m < 3) {
            return Err(Error::invalid("need at least 3 nodes per axis"));
        }
        Ok(Arc::new(Self { extents, nodes }))
    }

    pub fn unit_square(nodes_per_axis: usize) -> Result<Arc<Self>> {
        Self::new(vec![1.0, 1.0], vec![nodes_per_axis, nodes_per_axis])
    }

    pub fn unit_interval(nodes: usize) -> Result<Arc<Self>> {
        Self::new(vec![1.0], vec![nodes])
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extents[axis] / (self.nodes[axis] - 1) as f64
    }

    pub fn interior_counts(&self) -> Vec<usize> {
        self.nodes.iter().map(|&m| m - 2).collect()
    }

    pub fn cell_counts(&self) -> Vec<usize> {
        self.nodes.iter().map(|&m| m - 1).collect()
    }

    pub fn num_interior(&self) -> usize {
        self.interior_counts().iter().product()
    }

    pub fn num_cells(&self) -> usize {
        self.cell_counts().iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|d| self.spacing(d)).product()
    }

    pub fn measure(&self) -> f64 {
        self.extents.iter().product()
    }

    /// Coordinates of an interior node given its flat index.
    pub fn interior_coords(&self, flat: usize) -> Vec<f64> {
        let idx = unflatten(flat, &self.interior_counts());
        idx.iter()
            .enumerate()
            .map(|(d, &i)| (i + 1) as f64 * self.spacing(d))
            .collect()
    }
}

fn unflatten(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0usize; shape.len()];
    for d in (0..shape.len()).rev() {
        idx[d] = flat % shape[d];
        flat /= shape[d];
    }
    idx
}

fn flatten(idx: &[usize], shape: &[usize]) -> usize {
    let mut flat = 0usize;
    for (d, &i) in idx.iter().enumerate() {
        flat = flat * shape[d] + i;
    }
    flat
}

fn advance(idx: &mut [usize], shape: &[usize]) {
    for d in (0..idx.len()).rev() {
        idx[d] += 1;
        if idx[d] < shape[d] {
            return;
        }
        idx[d] = 0;
    }
}

/// Scalar field on the interior nodes of a [`GridDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    domain: Arc<GridDomain>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(domain: Arc<GridDomain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.num_interior() {
            return Err(Error::invalid(format!(
                "field length {} does not match {} interior nodes",
                values.len(),
                domain.num_interior()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("field entries must be finite"));
        }
        Ok(Self { domain, values })
    }

    pub fn zeros(domain: Arc<GridDomain>) -> Self {
        let n = domain.num_interior();
        Self { domain, values: vec![0.0; n] }
    }

    /// Fills from a closure of the interior node coordinates.
    pub fn from_fn(domain: Arc<GridDomain>, f: impl Fn(&[f64]) -> f64) -> Self {
        let n = domain.num_interior();
        let values = (0..n).map(|i| f(&domain.interior_coords(i))).collect();
        Self { domain, values }
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field {
            domain: self.domain.clone(),
            values: self.values.iter().map(|&v| s * v).collect(),
        }
    }

    pub fn axpy(&self, t: f64, dir: &Field) -> Field {
        debug_assert_eq!(self.domain, dir.domain);
        Field {
            domain: self.domain.clone(),
            values: self
                .values
                .iter()
                .zip(&dir.values)
                .map(|(&u, &d)| u + t * d)
                .collect(),
        }
    }

    /// Discrete L2 pairing `sum u_a v_a * cell_volume`; with the zero
    /// boundary this is the tensor trapezoid rule.
    pub fn dot(&self, other: &Field) -> f64 {
        debug_assert_eq!(self.domain, other.domain);
        let w = self.domain.cell_volume();
        self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).sum::<f64>() * w
    }

    /// `integral of f(u)` over the domain by the nodal rule.
    pub fn integrate_composed(&self, f: impl Fn(f64) -> f64) -> f64 {
        let w = self.domain.cell_volume();
        self.values.iter().map(|&v| f(v)).sum::<f64>() * w
    }

    /// Value on the full lattice (zero on and beyond the boundary).
    fn lattice_value(&self, idx: &[usize]) -> f64 {
        let mut flat = 0usize;
        for (d, &i) in idx.iter().enumerate() {
            let m = self.domain.nodes[d] - 2;
            if i == 0 || i > m {
                return 0.0;
            }
            flat = flat * m + (i - 1);
        }
        self.values[flat]
    }
}

/// Cell-wise gradient vectors: one n-vector per cell, stored row-major by
/// the cell's low-corner lattice index.
#[derive(Debug, Clone)]
pub struct GradField {
    domain: Arc<GridDomain>,
    vectors: Vec<f64>,
}

impl GradField {
    pub fn new(domain: Arc<GridDomain>, vectors: Vec<f64>) -> Result<Self> {
        if vectors.len() != domain.num_cells() * domain.dim() {
            return Err(Error::invalid("gradient storage does not match cell count"));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("gradient entries must be finite"));
        }
        Ok(Self { domain, vectors })
    }

    pub fn zeros(domain: Arc<GridDomain>) -> Self {
        let n = domain.num_cells() * domain.dim();
        Self { domain, vectors: vec![0.0; n] }
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn cell(&self, cell: usize) -> &[f64] {
        let n = self.domain.dim();
        &self.vectors[cell * n..(cell + 1) * n]
    }

    pub fn cell_mut(&mut self, cell: usize) -> &mut [f64] {
        let n = self.domain.dim();
        &mut self.vectors[cell * n..(cell + 1) * n]
    }

    pub fn num_cells(&self) -> usize {
        self.domain.num_cells()
    }

    pub fn raw(&self) -> &[f64] {
        &self.vectors
    }

    pub fn raw_mut(&mut self) -> &mut [f64] {
        &mut self.vectors
    }

    pub fn is_zero(&self) -> bool {
        self.vectors.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, s: f64) -> GradField {
        GradField {
            domain: self.domain.clone(),
            vectors: self.vectors.iter().map(|&v| s * v).collect(),
        }
    }

    pub fn add(&self, other: &GradField) -> GradField {
        debug_assert_eq!(self.domain, other.domain);
        GradField {
            domain: self.domain.clone(),
            vectors: self
                .vectors
                .iter()
                .zip(&other.vectors)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    /// `sum over cells of U_c . V_c * cell_volume`.
    pub fn dot(&self, other: &GradField) -> f64 {
        debug_assert_eq!(self.domain, other.domain);
        let w = self.domain.cell_volume();
        self.vectors.iter().zip(&other.vectors).map(|(&a, &b)| a * b).sum::<f64>() * w
    }

    /// `integral of f(U)` over cells.
    pub fn integrate_composed(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        let n = self.domain.dim();
        let w = self.domain.cell_volume();
        self.vectors.chunks_exact(n).map(|c| f(c)).sum::<f64>() * w
    }
}

/// Forward-difference gradient of the zero-extended field. Component `d`
/// of cell `c` is `(u(c + e_d) - u(c)) / h_d` with `c` the low-corner node.
pub fn gradient(u: &Field) -> GradField {
    let domain = u.domain().clone();
    let n = domain.dim();
    let cells = domain.cell_counts();
    let num_cells = domain.num_cells();
    let spacing: Vec<f64> = (0..n).map(|d| domain.spacing(d)).collect();
    let mut vectors = vec![0.0; num_cells * n];
    let mut idx = vec![0usize; n];
    for cell in 0..num_cells {
        let base = u.lattice_value(&idx);
        for d in 0..n {
            idx[d] += 1;
            let ahead = u.lattice_value(&idx);
            idx[d] -= 1;
            vectors[cell * n + d] = (ahead - base) / spacing[d];
        }
        advance(&mut idx, &cells);
    }
    GradField { domain, vectors }
}

/// Negative adjoint of [`gradient`] under the cell/node pairings: returns
/// the nodal field `g` with `g.dot(v) = W.dot(gradient(v))` for every `v`.
pub fn divergence_adjoint(w: &GradField) -> Field {
    let domain = w.domain().clone();
    let n = domain.dim();
    let cells = domain.cell_counts();
    let interior = domain.interior_counts();
    let spacing: Vec<f64> = (0..n).map(|d| domain.spacing(d)).collect();
    let mut values = vec![0.0; domain.num_interior()];
    let mut idx = vec![0usize; n];
    let mut cell_idx = vec![0usize; n];
    for value in values.iter_mut() {
        // the node's lattice index doubles as the cell at the node
        for (c, &i) in cell_idx.iter_mut().zip(idx.iter()) {
            *c = i + 1;
        }
        let here = flatten(&cell_idx, &cells);
        let mut acc = 0.0;
        for d in 0..n {
            cell_idx[d] -= 1;
            let behind = flatten(&cell_idx, &cells);
            cell_idx[d] += 1;
            acc += (w.vectors[behind * n + d] - w.vectors[here * n + d]) / spacing[d];
        }
        *value = acc;
        advance(&mut idx, &interior);
    }
    Field { domain, values }
}

/// `sum values * cell_volume` for cell-wise data.
pub fn integrate_cells(domain: &GridDomain, values: &[f64]) -> f64 {
    assert_eq!(values.len(), domain.num_cells());
    values.iter().sum::<f64>() * domain.cell_volume()
}

/// Luxemburg norm of a gradient field: `inf { k > 0 : ∫ Φ(U/k) <= 1 }`.
///
/// Bisection on `k` with a geometric bracket grown/shrunk by factor 4 from
/// `k = 1`; the modular is monotone nonincreasing in `k`.
pub fn luxemburg_norm_grad(u: &GradField, phi: &NFunction, tol: f64) -> f64 {
    assert_eq!(u.domain().dim(), phi.dim(), "dimension mismatch");
    if u.is_zero() {
        return 0.0;
    }
    let n = u.domain().dim();
    let mut scratch = vec![0.0; n];
    let modular = |k: f64| {
        u.integrate_composed(|cell| {
            for (s, &c) in scratch.iter_mut().zip(cell) {
                *s = c / k;
            }
            phi.eval(&scratch)
        })
    };
    luxemburg_bisect(modular, tol)
}

/// Luxemburg norm of a scalar field under a 1-D N-function.
pub fn luxemburg_norm_field(u: &Field, b: &YoungFunction1D, tol: f64) -> f64 {
    if u.is_zero() {
        return 0.0;
    }
    let modular = |k: f64| u.integrate_composed(|v| b.eval(v / k));
    luxemburg_bisect(modular, tol)
}

fn luxemburg_bisect(mut modular: impl FnMut(f64) -> f64, tol: f64) -> f64 {
    assert!(tol > 0.0);
    let mut k = 1.0f64;
    let (mut lo, mut hi);
    if modular(k) > 1.0 {
        loop {
            let next = k * 4.0;
            if modular(next) <= 1.0 {
                lo = k;
                hi = next;
                break;
            }
            k = next;
            assert!(k.is_finite(), "modular never drops below 1");
        }
    } else {
        loop {
            let next = k / 4.0;
            if modular(next) > 1.0 {
                lo = next;
                hi = k;
                break;
            }
            k = next;
            if k < 1e-300 {
                return 0.0;
            }
        }
    }
    // modular(lo) > 1 >= modular(hi)
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HolderReport {
    pub pairing: f64,
    pub norm_u: f64,
    pub conjugate_norm_v: f64,
    pub holds: bool,
}

/// Checks `∫ U·V <= 2 ||U||_Φ ||V||_Φ*` with `1e-9` relative slack.
pub fn holder_check(u: &GradField, v: &GradField, phi: &NFunction, tol: f64) -> Result<HolderReport> {
    assert_eq!(u.domain(), v.domain(), "fields live on different domains");
    let pairing = u.dot(v);
    let norm_u = luxemburg_norm_grad(u, phi, tol);
    let conjugate_norm_v = luxemburg_conjugate_norm(v, phi, tol)?;
    let bound = 2.0 * norm_u * conjugate_norm_v;
    let holds = pairing <= bound + 1e-9 * (1.0 + pairing.abs());
    Ok(HolderReport { pairing, norm_u, conjugate_norm_v, holds })
}

/// Luxemburg norm of `V` under the Young conjugate of `phi`.
pub fn luxemburg_conjugate_norm(v: &GradField, phi: &NFunction, tol: f64) -> Result<f64> {
    if v.is_zero() {
        return Ok(0.0);
    }
    let mut handle = ConjugateHandle::new(phi);
    let n = v.domain().dim();
    let mut scratch = vec![0.0; n];
    let mut failure = None;
    let modular = |k: f64| {
        v.integrate_composed(|cell| {
            for (s, &c) in scratch.iter_mut().zip(cell) {
                *s = c / k;
            }
            match handle.eval(&scratch) {
                Ok(value) => value,
                Err(e) => {
                    failure = Some(e);
                    f64::INFINITY
                }
            }
        })
    };
    let norm = luxemburg_bisect(modular, tol);
    match failure {
        Some(e) => Err(e),
        None => Ok(norm),
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SupRepresentationReport {
    pub lhs_best: f64,
    pub rhs: f64,
    pub relative_gap: f64,
    pub candidates: usize,
}

/// Duality representation check: the supremum of `∫ U·V − ∫ Φ*(U)` over
/// candidate fields `U` equals `∫ Φ(V)`.
///
/// Candidates are `U = Φ_ξ(V_h)` for magnitude truncations `V_h` of `V`
/// (`V_h = V` where `|V| <= h`, else 0), plus seeded random perturbations
/// of the full-gradient candidate. The untruncated gradient candidate
/// attains the supremum up to conjugation error.
pub fn sup_representation_check(
    v: &GradField,
    phi: &NFunction,
    trials: usize,
    seed: u64,
) -> Result<SupRepresentationReport> {
    use rand::Rng as _;
    use rand::SeedableRng as _;
    assert!(trials >= 1);
    let n = v.domain().dim();
    let mut handle = ConjugateHandle::new(phi);
    let rhs = v.integrate_composed(|cell| phi.eval(cell));
    if v.is_zero() {
        return Ok(SupRepresentationReport {
            lhs_best: 0.0,
            rhs: 0.0,
            relative_gap: 0.0,
            candidates: 1,
        });
    }

    let magnitudes: Vec<f64> = (0..v.num_cells())
        .map(|c| v.cell(c).iter().map(|&x| x * x).sum::<f64>().sqrt())
        .collect();
    let max_mag = magnitudes.iter().copied().fold(0.0f64, f64::max);

    let mut score = |u: &GradField| -> Result<f64> {
        let pairing = u.dot(v);
        let mut modular = 0.0;
        for c in 0..u.num_cells() {
            modular += handle.eval(u.cell(c))?;
        }
        modular *= u.domain().cell_volume();
        Ok(pairing - modular)
    };

    let truncated_gradient = |h: f64| -> GradField {
        let mut g = GradField::zeros(v.domain().clone());
        let mut scratch = vec![0.0; n];
        for c in 0..v.num_cells() {
            if magnitudes[c] <= h {
                phi.grad_into(v.cell(c), &mut scratch);
                g.cell_mut(c).copy_from_slice(&scratch);
            }
        }
        g
    };

    let mut best = f64::NEG_INFINITY;
    let mut candidates = 0usize;
    // truncation ladder ending above the full field
    let ladder = trials.max(2);
    for k in 1..=ladder {
        let h = max_mag * k as f64 / ladder as f64;
        best = best.max(score(&truncated_gradient(h * 1.000001))?);
        candidates += 1;
    }
    // random perturbations of the equality-case candidate
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let full = truncated_gradient(max_mag * 2.0);
    for _ in 0..trials {
        let mut pert = full.clone();
        for x in pert.raw_mut() {
            *x *= 1.0 + 0.1 * rng.gen_range(-1.0..1.0);
        }
        best = best.max(score(&pert)?);
        candidates += 1;
    }
    let relative_gap = (rhs - best) / (1.0 + rhs.abs());
    Ok(SupRepresentationReport { lhs_best: best, rhs, relative_gap, candidates })
}

/// Writes a field as CSV: one row per lattice node (boundary included),
/// columns `x_1, ..., x_n, value`.
pub fn write_field_csv(field: &Field, out: &mut impl Write) -> Result<()> {
    let domain = field.domain().clone();
    let n = domain.dim();
    let header: Vec<String> = (1..=n)
        .map(|d| format!("x{d}"))
        .chain(std::iter::once("value".to_string()))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    let nodes = domain.nodes().to_vec();
    let total: usize = nodes.iter().product();
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let coords: Vec<String> = idx
            .iter()
            .enumerate()
            .map(|(d, &i)| format!("{}", i as f64 * domain.spacing(d)))
            .collect();
        let v = field.lattice_value(&idx);
        writeln!(out, "{},{v}", coords.join(","))?;
        advance(&mut idx, &nodes);
    }
    Ok(())
}

const FIELD_MAGIC: &[u8; 4] = b"ANF1";

/// Compact binary layout: magic, u32 dims, extents (f64 LE), node counts
/// (u32 LE), then interior values row-major (f64 LE).
pub fn write_field_binary(field: &Field, out: &mut impl Write) -> Result<()> {
    let domain = field.domain();
    out.write_all(FIELD_MAGIC)?;
    out.write_all(&(domain.dim() as u32).to_le_bytes())?;
    for &l in domain.extents() {
        out.write_all(&l.to_le_bytes())?;
    }
    for &m in domain.nodes() {
        out.write_all(&(m as u32).to_le_bytes())?;
    }
    for &v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field_binary(input: &mut impl Read) -> Result<Field> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(Error::invalid("not a field binary (bad magic)"));
    }
    let mut b4 = [0u8; 4];
    input.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    if dim == 0 || dim > 3 {
        return Err(Error::invalid("field binary dimension out of range"));
    }
    let mut extents = Vec::with_capacity(dim);
    let mut b8 = [0u8; 8];
    for _ in 0..dim {
        input.read_exact(&mut b8)?;
        extents.push(f64::from_le_bytes(b8));
    }
    let mut nodes = Vec::with_capacity(dim);
    for _ in 0..dim {
        input.read_exact(&mut b4)?;
        nodes.push(u32::from_le_bytes(b4) as usize);
    }
    let domain = GridDomain::new(extents, nodes)?;
    let mut values = Vec::with_capacity(domain.num_interior());
    for _ in 0..domain.num_interior() {
        input.read_exact(&mut b8)?;
        values.push(f64::from_le_bytes(b8));
    }
    Field::new(domain, values)
}
