use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::field::StateField;
use super::symbol::SymbolSpec;
use crate::error::{FracError, Result};

/// Largest mode count accepted by the dense path.
pub const DENSE_CAP: usize = 4096;

/// Threshold on `|a_k|` below which the operator counts as non-injective.
pub const INJECTIVITY_THRESHOLD: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-10;

/// Real collocation values of the static potentials `q` and `V`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl Potential {
    pub fn zero(n: usize) -> Self {
        Potential { q: vec![0.0; n], v: vec![0.0; n] }
    }
}

#[derive(Clone)]
struct FftPair {
    side: usize,
    dim: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FftPair {
    fn new(side: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            side,
            dim,
            fwd: planner.plan_fft_forward(side),
            inv: planner.plan_fft_inverse(side),
        }
    }

    /// Unitary DFT (forward or inverse) over all axes, in place.
    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.inv } else { &self.fwd };
        let n = self.side;
        plan.process(data);
        if self.dim == 2 {
            let mut t = vec![Complex64::new(0.0, 0.0); n * n];
            transpose(data, &mut t, n);
            plan.process(&mut t);
            transpose(&t, data, n);
        }
        let s = (data.len() as f64).sqrt().recip();
        data.iter_mut().for_each(|c| *c *= s);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            dst[j * n + i] = src[i * n + j];
        }
    }
}

#[derive(Clone)]
enum Basis {
    Fourier(FftPair),
    Dense(DMatrix<Complex64>),
}

/// Finite selfadjoint operator given by real eigenvalues and a unitary map.
///
/// The Fourier path keeps coefficients in FFT order with unitary scaling; the
/// dense path stores the eigenvector matrix `U` with eigenvalues ascending.
/// Physical arrays are row-major over the grid `x_j = j L / N` per axis.
#[derive(Clone)]
pub struct DiagonalizedOperator {
    symbol: Option<SymbolSpec>,
    side: usize,
    length: f64,
    eigenvalues: Vec<f64>,
    basis: Basis,
    potential: Option<Potential>,
    /// Volume per grid point; 1 for an abstract matrix.
    cell: f64,
}

impl fmt::Debug for DiagonalizedOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiagonalizedOperator")
            .field("symbol", &self.symbol)
            .field("modes", &self.eigenvalues.len())
            .field("length", &self.length)
            .field("dense", &self.is_dense())
            .finish()
    }
}

/// Signed torus frequencies in FFT order for one axis.
pub fn frequencies(side: usize, length: f64) -> Vec<f64> {
    (0..side)
        .map(|k| {
            let s = if k < side / 2 { k as f64 } else { k as f64 - side as f64 };
            2.0 * PI * s / length
        })
        .collect()
}

fn check_grid(side: usize, length: f64) -> Result<()> {
    if side < 2 || !side.is_power_of_two() {
        return Err(FracError::invalid(format!("N must be a power of two >= 2, got {side}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(FracError::invalid(format!("domain length must be positive, got {length}")));
    }
    Ok(())
}

fn symbol_values(symbol: &SymbolSpec, side: usize, length: f64) -> Result<Vec<f64>> {
    symbol.validate()?;
    let n_modes = side.pow(symbol.dim() as u32);
    if let SymbolSpec::Custom { values, .. } = symbol {
        if values.len() != n_modes {
            return Err(FracError::Shape { expected: n_modes, got: values.len() });
        }
        return Ok(values.clone());
    }
    Ok(wavevectors(symbol.dim(), side, length)
        .iter()
        .map(|xi| symbol.eval(xi).expect("analytic symbol"))
        .collect())
}

/// Wave vectors for every mode in row-major FFT order.
pub fn wavevectors(dim: usize, side: usize, length: f64) -> Vec<Vec<f64>> {
    let f = frequencies(side, length);
    match dim {
        1 => f.iter().map(|&x| vec![x]).collect(),
        _ => f.iter().flat_map(|&y| f.iter().map(move |&x| vec![x, y])).collect(),
    }
}

impl DiagonalizedOperator {
    /// `A = P(D)` on the periodic torus, diagonal in the Fourier basis.
    pub fn build_diagonal(symbol: SymbolSpec, side: usize, length: f64) -> Result<Self> {
        check_grid(side, length)?;
        let eigenvalues = symbol_values(&symbol, side, length)?;
        let symbol_dim = symbol.dim();
        Ok(DiagonalizedOperator {
            basis: Basis::Fourier(FftPair::new(side, symbol.dim())),
            symbol: Some(symbol),
            side,
            length,
            eigenvalues,
            potential: None,
            cell: (length / side as f64).powi(symbol_dim as i32),
        })
    }

    /// `A = P(D) + q + V` through dense Hermitian diagonalization.
    pub fn build_perturbed(symbol: SymbolSpec, potential: Potential, side: usize, length: f64) -> Result<Self> {
        let diag: Vec<Complex64> = potential
            .q
            .iter()
            .zip(&potential.v)
            .map(|(q, v)| Complex64::new(q + v, 0.0))
            .collect();
        if potential.q.len() != potential.v.len() {
            return Err(FracError::Shape { expected: potential.q.len(), got: potential.v.len() });
        }
        let mut op = Self::perturbed_impl(symbol, &diag, side, length)?;
        op.potential = Some(potential);
        Ok(op)
    }

    /// Same as [`build_perturbed`](Self::build_perturbed) but accepting complex
    /// potentials; anything with a non-negligible imaginary part is rejected.
    pub fn build_perturbed_complex(
        symbol: SymbolSpec,
        q: &[Complex64],
        v: &[Complex64],
        side: usize,
        length: f64,
    ) -> Result<Self> {
        if q.len() != v.len() {
            return Err(FracError::Shape { expected: q.len(), got: v.len() });
        }
        let diag: Vec<Complex64> = q.iter().zip(v).map(|(a, b)| a + b).collect();
        let mut op = Self::perturbed_impl(symbol, &diag, side, length)?;
        op.potential = Some(Potential {
            q: q.iter().map(|c| c.re).collect(),
            v: v.iter().map(|c| c.re).collect(),
        });
        Ok(op)
    }

    fn perturbed_impl(symbol: SymbolSpec, diag: &[Complex64], side: usize, length: f64) -> Result<Self> {
        let base = Self::build_diagonal(symbol.clone(), side, length)?;
        let n = base.modes();
        if diag.len() != n {
            return Err(FracError::Shape { expected: n, got: diag.len() });
        }
        if n > DENSE_CAP {
            return Err(FracError::invalid(format!("dense path limited to {DENSE_CAP} modes, got {n}")));
        }
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            col[j] = Complex64::new(1.0, 0.0);
            let c = base.apply_a(&base.from_physical(&col).expect("length checked"));
            let phys = base.to_physical(&c);
            for (i, v) in phys.into_iter().enumerate() {
                h[(i, j)] = v;
            }
            h[(j, j)] += diag[j];
        }
        let mut op = Self::from_hermitian(h)?;
        op.symbol = Some(symbol);
        op.side = side;
        op.length = length;
        op.cell = base.cell;
        Ok(op)
    }

    /// Diagonalizes an explicit matrix, which must be Hermitian to 1e-10
    /// relative to its largest entry.
    pub fn from_hermitian(h: DMatrix<Complex64>) -> Result<Self> {
        let n = h.nrows();
        if n == 0 || h.ncols() != n {
            return Err(FracError::Shape { expected: n, got: h.ncols() });
        }
        let scale = h.iter().fold(1.0f64, |m, c| m.max(c.norm()));
        let residue = (&h - h.adjoint()).iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let tol = HERMITIAN_TOL * scale;
        if residue > tol {
            return Err(FracError::NonHermitian { residue, tol });
        }
        let sym = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let u = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(DiagonalizedOperator {
            symbol: None,
            side: n,
            length: 2.0 * PI,
            eigenvalues,
            basis: Basis::Dense(u),
            potential: None,
            cell: 1.0,
        })
    }

    pub fn symbol(&self) -> Option<&SymbolSpec> {
        self.symbol.as_ref()
    }

    pub fn potential(&self) -> Option<&Potential> {
        self.potential.as_ref()
    }

    /// Grid points per axis.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.symbol.as_ref().map_or(1, |s| s.dim())
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Volume per grid point. Physical values from [`to_physical`](Self::to_physical)
    /// are `u(x_j) sqrt(cell)`, so pointwise maps must undo this scaling.
    pub fn cell_volume(&self) -> f64 {
        self.cell
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.basis, Basis::Dense(_))
    }

    pub fn min_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(f64::INFINITY, |m, a| m.min(a.abs()))
    }

    pub fn is_injective(&self) -> bool {
        self.min_abs_eigenvalue() > INJECTIVITY_THRESHOLD
    }

    /// Wave vectors of the Fourier basis; `None` on the dense path.
    pub fn wavevectors(&self) -> Option<Vec<Vec<f64>>> {
        match self.basis {
            Basis::Fourier(_) => Some(wavevectors(self.dim(), self.side, self.length)),
            Basis::Dense(_) => None,
        }
    }

    /// Collocation points, one row per point.
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let h = self.length / self.side as f64;
        let axis: Vec<f64> = (0..self.side).map(|j| j as f64 * h).collect();
        match self.dim() {
            1 => axis.iter().map(|&x| vec![x]).collect(),
            _ => axis.iter().flat_map(|&y| axis.iter().map(move |&x| vec![x, y])).collect(),
        }
    }

    /// `‖U*U − I‖_max`; exactly zero for the Fourier path.
    pub fn unitary_defect(&self) -> f64 {
        match &self.basis {
            Basis::Fourier(_) => 0.0,
            Basis::Dense(u) => {
                let g = u.adjoint() * u;
                let n = g.nrows();
                (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| {
                        let id = if i == j { 1.0 } else { 0.0 };
                        (g[(i, j)] - id).norm()
                    })
                    .fold(0.0, f64::max)
            }
        }
    }

    pub fn zeros(&self) -> StateField {
        StateField::zeros(self.modes())
    }

    /// Coefficients of a physical-space array.
    pub fn from_physical(&self, values: &[Complex64]) -> Result<StateField> {
        if values.len() != self.modes() {
            return Err(FracError::Shape { expected: self.modes(), got: values.len() });
        }
        Ok(StateField::new(match &self.basis {
            Basis::Fourier(p) => {
                let mut d = values.to_vec();
                p.transform(&mut d, false);
                d
            }
            Basis::Dense(u) => (u.adjoint() * DVector::from_column_slice(values)).as_slice().to_vec(),
        }))
    }

    pub fn to_physical(&self, f: &StateField) -> Vec<Complex64> {
        match &self.basis {
            Basis::Fourier(p) => {
                let mut d = f.coeffs().to_vec();
                p.transform(&mut d, true);
                d
            }
            Basis::Dense(u) => (u * DVector::from_column_slice(f.coeffs())).as_slice().to_vec(),
        }
    }

    pub fn apply_a(&self, f: &StateField) -> StateField {
        f.scaled_by(&self.eigenvalues)
    }

    /// `g(A) f` for a scalar function of the eigenvalue.
    pub fn apply_fn(&self, f: &StateField, g: impl Fn(f64) -> Complex64) -> StateField {
        f.map(|k, c| c * g(self.eigenvalues[k]))
    }

    /// The same basis with every eigenvalue multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> DiagonalizedOperator {
        let mut op = self.clone();
        op.eigenvalues.iter_mut().for_each(|a| *a *= factor);
        op.symbol = None;
        op
    }

    /// `A^{-1} f`, refused when the operator is not injective.
    pub fn apply_inverse(&self, f: &StateField) -> Result<StateField> {
        if !self.is_injective() {
            return Err(FracError::NotInjective { min_abs: self.min_abs_eigenvalue() });
        }
        Ok(f.map(|k, c| c / self.eigenvalues[k]))
    }

    pub fn graph_norm(&self, f: &StateField) -> f64 {
        f.graph_norm(&self.eigenvalues)
    }

    /// Coefficient-wise multiplication by `m_k`.
    pub fn apply_multiplier(&self, f: &StateField, m: &[Complex64]) -> StateField {
        f.map(|k, c| c * m[k])
    }

    /// Mode-space derivative `∂_x` along the first axis (Fourier path only).
    pub fn derivative_multiplier(&self) -> Option<Vec<Complex64>> {
        self.wavevectors()
            .map(|w| w.iter().map(|xi| Complex64::new(0.0, xi[0])).collect())
    }
}
