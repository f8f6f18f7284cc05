use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;

fn numerical_rank(m: &CMatrix) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.max();
    if !top.is_finite() || top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > top * RANK_TOL).count()
}

/// Least-squares channel estimate `Y P⁻¹` from received pilot columns `Y`
/// and the square pilot matrix `P`.
pub fn ls_estimate_equivalent_channel(received: &CMatrix, pilot: &CMatrix) -> Result<CMatrix> {
    if !pilot.is_square() || pilot.ncols() != received.ncols() {
        return Err(Error::SingularPilot);
    }
    if numerical_rank(pilot) < pilot.nrows() {
        return Err(Error::SingularPilot);
    }
    let inv = pilot.clone().try_inverse().ok_or(Error::SingularPilot)?;
    Ok(received * inv)
}

/// Zero-forcing: the left pseudo-inverse of `channel` applied to every
/// received column, computed through a QR factorization.
pub fn zf_decode(received: &CMatrix, channel: &CMatrix) -> Result<CMatrix> {
    let (rows, cols) = channel.shape();
    if rows < cols || numerical_rank(channel) < cols {
        return Err(Error::RankDeficient { rows, cols });
    }
    let qr = channel.clone().qr();
    let rhs = qr.q().adjoint() * received;
    qr.r()
        .solve_upper_triangular(&rhs)
        .ok_or(Error::RankDeficient { rows, cols })
}

/// `log₂ det(I + G Gᴴ)`.
pub fn log2_det_gram(g: &CMatrix) -> f64 {
    if g.ncols() == 0 {
        return 0.0;
    }
    // det(I + G Gᴴ) = det(I + Gᴴ G); use the smaller side.
    let gram = if g.ncols() <= g.nrows() {
        g.adjoint() * g
    } else {
        g * g.adjoint()
    };
    let n = gram.nrows();
    let m = CMatrix::identity(n, n) + gram;
    match m.cholesky() {
        Some(ch) => 2.0 * ch.l().diagonal().iter().map(|d| d.re.ln()).sum::<f64>() / std::f64::consts::LN_2,
        None => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_pilot_returns_the_channel() {
        let h = CMatrix::from_fn(3, 2, |i, j| c(i as f64 + 1.0, j as f64 - 0.5));
        let est = ls_estimate_equivalent_channel(&h, &CMatrix::identity(2, 2)).unwrap();
        assert!((est - h).norm() < 1e-12);
    }

    #[test]
    fn superposed_pilot_yields_the_equivalent_channel() {
        let h = CMatrix::from_fn(3, 2, |i, j| c((i * 2 + j) as f64, 1.0));
        let u = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(1.0, 0.0), c(1.0, 1.0), c(-1.0, 0.5)]);
        // The destination sees H·U through an identity pilot and cannot undo U.
        let est = ls_estimate_equivalent_channel(&(&h * &u), &CMatrix::identity(2, 2)).unwrap();
        assert!((&est - &h * &u).norm() < 1e-12);
        assert!((est - &h).norm() > 1e-3);
    }

    #[test]
    fn singular_pilot_is_rejected() {
        let p = CMatrix::from_element(2, 2, c(1.0, 0.0));
        let y = CMatrix::zeros(3, 2);
        assert_eq!(ls_estimate_equivalent_channel(&y, &p), Err(Error::SingularPilot));
    }

    #[test]
    fn zf_inverts_a_square_channel() {
        let h = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(1.0, 1.0), c(3.0, 0.0)]);
        let x = CMatrix::from_row_slice(2, 1, &[c(1.0, -1.0), c(0.5, 2.0)]);
        let est = zf_decode(&(&h * &x), &h).unwrap();
        assert!((est - x).norm() < 1e-12);
    }

    #[test]
    fn rank_deficient_channel_is_flagged() {
        let h = CMatrix::from_row_slice(3, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0), c(0.0, 1.0), c(0.0, 2.0)]);
        let y = CMatrix::zeros(3, 1);
        assert_eq!(zf_decode(&y, &h), Err(Error::RankDeficient { rows: 3, cols: 2 }));
        let wide = CMatrix::zeros(2, 3);
        assert!(zf_decode(&CMatrix::zeros(2, 1), &wide).is_err());
    }

    #[test]
    fn log_det_of_scaled_identity() {
        let g = CMatrix::identity(2, 2) * c(3.0, 0.0);
        assert!((log2_det_gram(&g) - 2.0 * 10f64.log2()).abs() < 1e-12);
        assert_eq!(log2_det_gram(&CMatrix::zeros(3, 0)), 0.0);
    }
}
