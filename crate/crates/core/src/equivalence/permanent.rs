//! Matrix permanents: a direct permutation sum and Ryser's inclusion-exclusion
//! formula walked in Gray-code order.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Largest dimension accepted by [`permanent_naive`] (9! terms).
pub const NAIVE_LIMIT: usize = 9;

/// Largest dimension accepted by [`permanent_ryser`].
pub const RYSER_LIMIT: usize = 24;

fn check_square(m: &ComplexMatrix, limit: usize) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() > limit {
        return Err(Error::DimensionLimit {
            dim: m.nrows(),
            limit,
        });
    }
    Ok(m.nrows())
}

/// `Σ_σ Π_i M[i][σ(i)]` over every permutation σ.
pub fn permanent_naive(m: &ComplexMatrix) -> Result<Complex64> {
    let n = check_square(m, NAIVE_LIMIT)?;
    let mut used = vec![false; n];
    Ok(expand_row(m, 0, &mut used))
}

fn expand_row(m: &ComplexMatrix, row: usize, used: &mut [bool]) -> Complex64 {
    if row == used.len() {
        return Complex64::new(1.0, 0.0);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for col in 0..used.len() {
        if !used[col] {
            used[col] = true;
            total += m[(row, col)] * expand_row(m, row + 1, used);
            used[col] = false;
        }
    }
    total
}

/// `Per(M) = (−1)^n Σ_{S ⊆ cols} (−1)^{|S|} Π_i Σ_{j∈S} M[i][j]`.
///
/// Subsets are visited in Gray-code order so each step adds or removes one
/// column from the running row sums: `O(2^n · n)`.
pub fn permanent_ryser(m: &ComplexMatrix) -> Result<Complex64> {
    let n = check_square(m, RYSER_LIMIT)?;
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u32 = 0;
    for k in 1u32..(1u32 << n) {
        let col = k.trailing_zeros() as usize;
        gray ^= 1 << col;
        if gray & (1 << col) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += m[(i, col)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= m[(i, col)];
            }
        }
        let product: Complex64 = row_sums.iter().product();
        if gray.count_ones().is_multiple_of(2) {
            total += product;
        } else {
            total -= product;
        }
    }
    if n % 2 == 1 {
        total = -total;
    }
    Ok(total)
}
