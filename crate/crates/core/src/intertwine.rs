//! Numerical intertwiners: commutant null spaces, irreducibility, polar
//! unitarization and spectral resolutions of equivariant Hermitian operators.

use nalgebra::{SymmetricEigen, SVD};
use thiserror::Error;

use crate::linalg::{frobenius, CMatrix, C64};

/// Relative singular-value threshold below which a direction counts as null.
pub const NULL_THRESHOLD: f64 = 1e-9;

/// Minimum ratio by which every singular value must clear the threshold
/// before a rank decision is trusted.
pub const GAP_FACTOR: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntertwineError {
    #[error("representations have {0} and {1} generators")]
    GeneratorCount(usize, usize),
    #[error("generator {index} is {rows}x{cols}, expected {dim}x{dim}")]
    GeneratorShape { index: usize, rows: usize, cols: usize, dim: usize },
    #[error("ambiguous rank: singular values {null:.3e} and {kept:.3e} sit within a factor {ratio:.3} of the threshold")]
    AmbiguousGap { null: f64, kept: f64, ratio: f64 },
    #[error("operator does not intertwine: relative residual {0:.3e}")]
    NotIntertwiner(f64),
    #[error("operator is singular: condition number {0:.3e}")]
    Singular(f64),
    #[error("operator must be square with size {expected}, got {rows}x{cols}")]
    Shape { expected: usize, rows: usize, cols: usize },
    #[error("operator is not Hermitian: residual {0:.3e}")]
    NotHermitian(f64),
}

/// A representation given by matrices for a generating set.
#[derive(Clone, Debug)]
pub struct MatrixRep {
    pub dim: usize,
    pub generators: Vec<CMatrix>,
}

impl MatrixRep {
    pub fn new(dim: usize, generators: Vec<CMatrix>) -> Result<Self, IntertwineError> {
        for (index, g) in generators.iter().enumerate() {
            if g.nrows() != dim || g.ncols() != dim {
                return Err(IntertwineError::GeneratorShape { index, rows: g.nrows(), cols: g.ncols(), dim });
            }
        }
        Ok(MatrixRep { dim, generators })
    }

    pub fn direct_sum(&self, other: &MatrixRep) -> Result<MatrixRep, IntertwineError> {
        if self.generators.len() != other.generators.len() {
            return Err(IntertwineError::GeneratorCount(self.generators.len(), other.generators.len()));
        }
        let gens = self
            .generators
            .iter()
            .zip(&other.generators)
            .map(|(a, b)| crate::linalg::direct_sum(&[a, b]))
            .collect();
        MatrixRep::new(self.dim + other.dim, gens)
    }

    /// `W rho(g) W^{-1}` for a unitary `W`.
    pub fn conjugate(&self, w: &CMatrix) -> MatrixRep {
        let wi = w.adjoint();
        MatrixRep { dim: self.dim, generators: self.generators.iter().map(|g| w * g * &wi).collect() }
    }
}

/// Orthonormal basis (Frobenius inner product) of `Hom_G(V1, V2)`.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub basis: Vec<CMatrix>,
    /// All singular values of the constraint system, ascending.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    /// Separation of the singular values from the threshold, as a ratio on
    /// the nearer side.
    pub gap: f64,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Null space of `F -> rho2(g) F - F rho1(g)` over all generators.
pub fn hom_space(r1: &MatrixRep, r2: &MatrixRep) -> Result<HomSpace, IntertwineError> {
    if r1.generators.len() != r2.generators.len() {
        return Err(IntertwineError::GeneratorCount(r1.generators.len(), r2.generators.len()));
    }
    let (d1, d2) = (r1.dim, r2.dim);
    let n = d1 * d2;
    if n == 0 {
        return Ok(HomSpace { basis: vec![], singular_values: vec![], threshold: 0.0, gap: f64::INFINITY });
    }
    let block = n;
    let rows = (r1.generators.len() * block).max(n);
    let mut k = CMatrix::zeros(rows, n);
    // vec(F) is column major: F[p, q] sits at p + q * d2.
    for (g, (a, b)) in r1.generators.iter().zip(&r2.generators).enumerate() {
        let off = g * block;
        for i in 0..d2 {
            for j in 0..d1 {
                let row = off + i + j * d2;
                for p in 0..d2 {
                    k[(row, p + j * d2)] += b[(i, p)];
                }
                for q in 0..d1 {
                    k[(row, i + q * d2)] -= a[(q, j)];
                }
            }
        }
    }
    let svd = SVD::new(k, false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    // Relative to the size of the operators, so that an all-null system is
    // not judged against its own rounding noise.
    let op_scale = r1
        .generators
        .iter()
        .zip(&r2.generators)
        .map(|(a, b)| frobenius(a) + frobenius(b))
        .fold(0.0, f64::max);
    let scale = sv.last().copied().unwrap_or(0.0).max(op_scale);
    let threshold = NULL_THRESHOLD * scale.max(f64::MIN_POSITIVE);
    let null_count = if scale == 0.0 { sv.len() } else { sv.iter().take_while(|&&s| s <= threshold).count() };
    let above = sv.get(null_count).map_or(f64::INFINITY, |&k| k / threshold);
    let below = match null_count {
        0 => f64::INFINITY,
        _ if sv[null_count - 1] == 0.0 => f64::INFINITY,
        _ => threshold / sv[null_count - 1],
    };
    let gap = above.min(below);
    if scale > 0.0 && gap < GAP_FACTOR {
        let null = if null_count > 0 { sv[null_count - 1] } else { 0.0 };
        let kept = sv.get(null_count).copied().unwrap_or(0.0);
        return Err(IntertwineError::AmbiguousGap { null, kept, ratio: gap });
    }
    let basis = order[..null_count]
        .iter()
        .map(|&i| {
            let v = v_t.row(i).adjoint();
            CMatrix::from_fn(d2, d1, |p, q| v[p + q * d2])
        })
        .collect();
    Ok(HomSpace { basis, singular_values: sv, threshold, gap })
}

/// Schur's criterion: the commutant is one-dimensional.
pub fn is_irreducible(r: &MatrixRep) -> Result<bool, IntertwineError> {
    Ok(hom_space(r, r)?.dim() == 1)
}

/// Whether some invertible intertwiner exists.
pub fn are_equivalent(r1: &MatrixRep, r2: &MatrixRep) -> Result<bool, IntertwineError> {
    if r1.dim != r2.dim {
        return Ok(false);
    }
    let h = hom_space(r1, r2)?;
    if h.dim() == 0 {
        return Ok(false);
    }
    // A generic element of the hom space is invertible iff one element is.
    let mut m = CMatrix::zeros(r2.dim, r1.dim);
    for (i, b) in h.basis.iter().enumerate() {
        let t = 1.0 + i as f64;
        m += b * C64::new((0.37 * t).cos(), (1.13 * t).sin());
    }
    let sv = m.singular_values();
    let max = sv.max();
    Ok(max > 0.0 && sv.min() > 1e-6 * max)
}

/// Result of [`unitarize`].
#[derive(Clone, Debug)]
pub struct Unitarized {
    pub unitary: CMatrix,
    pub condition_number: f64,
    pub unitarity_residual: f64,
    pub intertwining_residual: f64,
}

fn intertwining_residual(theta: &CMatrix, r1: &MatrixRep, r2: &MatrixRep) -> f64 {
    let norm = frobenius(theta).max(f64::MIN_POSITIVE);
    r1.generators
        .iter()
        .zip(&r2.generators)
        .map(|(a, b)| frobenius(&(b * theta - theta * a)) / norm)
        .fold(0.0, f64::max)
}

/// `U = Theta (Theta^* Theta)^{-1/2}`: the unitary part of an invertible
/// intertwiner, itself an intertwiner.
pub fn unitarize(theta: &CMatrix, r1: &MatrixRep, r2: &MatrixRep, tol: f64) -> Result<Unitarized, IntertwineError> {
    let n = r1.dim;
    if theta.nrows() != n || theta.ncols() != n || r2.dim != n {
        return Err(IntertwineError::Shape { expected: n, rows: theta.nrows(), cols: theta.ncols() });
    }
    let res = intertwining_residual(theta, r1, r2);
    if res > tol {
        return Err(IntertwineError::NotIntertwiner(res));
    }
    let sv = theta.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if smax == 0.0 || smin <= 1e-12 * smax {
        return Err(IntertwineError::Singular(if smin == 0.0 { f64::INFINITY } else { smax / smin }));
    }
    let gram = theta.adjoint() * theta;
    let eig = SymmetricEigen::new(gram);
    let floor = f64::EPSILON * eig.eigenvalues.max();
    let inv_sqrt = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(1.0 / l.max(floor).sqrt(), 0.0)));
    let u = theta * (&eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint());
    let unitarity_residual = frobenius(&(u.adjoint() * &u - CMatrix::identity(n, n)));
    let intertwining_residual = intertwining_residual(&u, r1, r2);
    Ok(Unitarized { unitary: u, condition_number: smax / smin, unitarity_residual, intertwining_residual })
}

/// Spectral resolution `A = sum_i lambda_i P_i` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct SpectralResolution {
    /// Distinct eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthogonal projection onto each eigenspace.
    pub projections: Vec<CMatrix>,
    dim: usize,
}

impl SpectralResolution {
    /// `E(lambda) = sum over eigenvalues <= lambda of P_i`.
    pub fn e(&self, lambda: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (l, p) in self.eigenvalues.iter().zip(&self.projections) {
            if *l <= lambda {
                out += p;
            }
        }
        out
    }

    /// `sum_i lambda_i (E(lambda_i) - E(lambda_{i-1}))`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        let mut prev = CMatrix::zeros(self.dim, self.dim);
        for &l in &self.eigenvalues {
            let cur = self.e(l);
            out += (&cur - &prev) * C64::new(l, 0.0);
            prev = cur;
        }
        out
    }
}

/// Eigenvalues closer than `1e-9 * max(1, |A|)` are merged.
pub fn spectral_resolution(a: &CMatrix) -> Result<SpectralResolution, IntertwineError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(IntertwineError::Shape { expected: n, rows: n, cols: a.ncols() });
    }
    let scale = frobenius(a).max(1.0);
    let herm = frobenius(&(a - a.adjoint()));
    if herm > 1e-10 * scale {
        return Err(IntertwineError::NotHermitian(herm));
    }
    let eig = SymmetricEigen::new(a.clone());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let merge = 1e-9 * scale;
    let mut eigenvalues: Vec<f64> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &idx {
        let l = eig.eigenvalues[i];
        match groups.last_mut() {
            Some(g) if (l - eig.eigenvalues[*g.last().unwrap()]).abs() <= merge => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let mut projections = Vec::new();
    for g in &groups {
        let mean = g.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / g.len() as f64;
        eigenvalues.push(mean);
        let mut p = CMatrix::zeros(n, n);
        for &i in g {
            let v = eig.eigenvectors.column(i);
            p += &v * v.adjoint();
        }
        projections.push(p);
    }
    Ok(SpectralResolution { eigenvalues, projections, dim: n })
}

/// `(1/|G|) sum_g rho(g) B rho(g)^*` over a list of group elements.
pub fn group_average(elements: &[CMatrix], b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(b.nrows(), b.ncols());
    for g in elements {
        out += g * b * g.adjoint();
    }
    out / C64::new(elements.len() as f64, 0.0)
}
