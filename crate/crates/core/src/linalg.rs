//! Complex dense matrices and a few helpers shared across modules.

use nalgebra::DMatrix;
use rand::Rng;

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// `exp(2 pi i x)`.
pub fn cis_turns(x: f64) -> C64 {
    let a = std::f64::consts::TAU * x;
    C64::new(a.cos(), a.sin())
}

/// `exp(2 pi i p / n)` with the angle reduced exactly before conversion.
pub fn root_of_unity(p: u64, n: u64) -> C64 {
    cis_turns((p % n) as f64 / n as f64)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `max |a_ij - b_ij|`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; two uniforms per draw keeps the stream simple to reproduce.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

/// Haar-distributed unitary via QR with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let z = random_complex_matrix(rng, n, n);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let z = random_complex_matrix(rng, n, n);
    (&z + z.adjoint()) * C64::new(0.5, 0.0)
}

/// Block-diagonal sum.
pub fn direct_sum(blocks: &[&CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(n, m);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..6 {
            let u = random_unitary(&mut rng, n);
            let e = max_abs_diff(&(u.adjoint() * &u), &CMatrix::identity(n, n));
            assert!(e < 1e-12, "{e}");
        }
    }

    #[test]
    fn roots_of_unity() {
        assert!((root_of_unity(1, 4) - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((root_of_unity(5, 4) - root_of_unity(1, 4)).norm() < 1e-15);
    }
}
