use std::ops::{Index, IndexMut};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Panics on ragged input; intended for literals.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn row_vector(values: &[f64]) -> Self {
        Matrix { rows: 1, cols: values.len(), data: values.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks(0) panics, and a zero-column matrix still has rows.
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn zip_map(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        self.same_shape(other, "zip_map")?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Matrix {
        self.map(|x| x * s)
    }

    pub fn add_assign(&mut self, other: &Matrix) -> Result<()> {
        self.same_shape(other, "add_assign")?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    /// Adds `bias` (a 1×cols row) to every row.
    pub fn add_row_broadcast(&mut self, bias: &Matrix) -> Result<()> {
        if bias.rows != 1 || bias.cols != self.cols {
            return Err(Error::Dimension(format!(
                "bias {}x{} does not broadcast over {}x{}",
                bias.rows, bias.cols, self.rows, self.cols
            )));
        }
        let cols = self.cols;
        if cols == 0 {
            return Ok(());
        }
        for row in self.data.chunks_mut(cols) {
            for (x, b) in row.iter_mut().zip(&bias.data) {
                *x += b;
            }
        }
        Ok(())
    }

    /// Column sums as a 1×cols row, accumulated top to bottom.
    pub fn column_sums(&self) -> Matrix {
        let mut out = vec![0.0; self.cols];
        for row in self.iter_rows() {
            for (o, x) in out.iter_mut().zip(row) {
                *o += x;
            }
        }
        Matrix { rows: 1, cols: self.cols, data: out }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Copies the listed rows in order.
    pub fn gather_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix { rows: indices.len(), cols: self.cols, data }
    }

    fn same_shape(&self, other: &Matrix, op: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!(
                "{op}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

// Below this many multiply-adds a product runs on the calling thread.
const PAR_THRESHOLD: usize = 1 << 20;
const ROW_BLOCK: usize = 16;

/// `a · b`. Each output row is accumulated over `k` in ascending order;
/// zero entries of `a` are skipped, which leaves finite results unchanged and
/// makes products with sparse rating matrices cheap.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::Dimension(format!(
            "matmul: {}x{} · {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    let n = b.cols;
    if n == 0 {
        return Ok(out);
    }
    let kernel = |(i, out_row): (usize, &mut [f64])| {
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            for (o, &bkj) in out_row.iter_mut().zip(b.row(k)) {
                *o += aik * bkj;
            }
        }
    };
    if a.rows * a.cols * n >= PAR_THRESHOLD {
        out.data.par_chunks_mut(n).enumerate().for_each(kernel);
    } else {
        out.data.chunks_mut(n).enumerate().for_each(kernel);
    }
    Ok(out)
}

/// `aᵀ · b` without materializing the transpose. Output entry `(i, j)` is
/// accumulated over `k` ascending, so the bits match `matmul(&a.transpose(), b)`.
pub fn matmul_tn(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows != b.rows {
        return Err(Error::Dimension(format!(
            "matmul_tn: ({}x{})ᵀ · {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Matrix::zeros(a.cols, b.cols);
    let n = b.cols;
    if n == 0 || a.cols == 0 {
        return Ok(out);
    }
    let kernel = |(blk, out_block): (usize, &mut [f64])| {
        let i0 = blk * ROW_BLOCK;
        let rows_here = out_block.len() / n;
        for k in 0..a.rows {
            let a_row = &a.row(k)[i0..i0 + rows_here];
            let b_row = b.row(k);
            for (di, &aki) in a_row.iter().enumerate() {
                if aki == 0.0 {
                    continue;
                }
                let o = &mut out_block[di * n..(di + 1) * n];
                for (o, &bkj) in o.iter_mut().zip(b_row) {
                    *o += aki * bkj;
                }
            }
        }
    };
    if a.rows * a.cols * n >= PAR_THRESHOLD {
        out.data.par_chunks_mut(ROW_BLOCK * n).enumerate().for_each(kernel);
    } else {
        out.data.chunks_mut(ROW_BLOCK * n).enumerate().for_each(kernel);
    }
    Ok(out)
}

/// `a · bᵀ` as row-by-row dot products, each summed left to right.
pub fn matmul_nt(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.cols {
        return Err(Error::Dimension(format!(
            "matmul_nt: {}x{} · ({}x{})ᵀ",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Matrix::zeros(a.rows, b.rows);
    let n = b.rows;
    if n == 0 {
        return Ok(out);
    }
    let kernel = |(i, out_row): (usize, &mut [f64])| {
        let a_row = a.row(i);
        for (j, o) in out_row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (x, y) in a_row.iter().zip(b.row(j)) {
                acc += x * y;
            }
            *o = acc;
        }
    };
    if a.rows * a.cols * n >= PAR_THRESHOLD {
        out.data.par_chunks_mut(n).enumerate().for_each(kernel);
    } else {
        out.data.chunks_mut(n).enumerate().for_each(kernel);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng, sparsity: f64) -> Matrix {
        let data = (0..rows * cols)
            .map(|_| if rng.random::<f64>() < sparsity { 0.0 } else { rng.random_range(-2.0..2.0) })
            .collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    /// Textbook triple loop, no skipping.
    fn naive(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = 0.0;
                for k in 0..a.cols() {
                    acc += a[(i, k)] * b[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    #[test]
    fn identity_and_hand_product() {
        let x = Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.5]]);
        assert_eq!(matmul(&Matrix::identity(3), &x).unwrap(), x);
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = Matrix::from_rows(&[&[1.0], &[1.0]]);
        assert_eq!(matmul(&a, &b).unwrap(), Matrix::from_rows(&[&[3.0], &[7.0]]));
    }

    #[test]
    fn shape_mismatch() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(matmul(&a, &a), Err(Error::Dimension(_))));
        assert!(matmul_tn(&Matrix::zeros(2, 3), &Matrix::zeros(3, 3)).is_err());
        assert!(matmul_nt(&Matrix::zeros(2, 3), &Matrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn skipping_zeros_matches_naive_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (n, k, m) = (rng.random_range(1..12), rng.random_range(1..12), rng.random_range(1..12));
            let a = random(n, k, &mut rng, 0.6);
            let b = random(k, m, &mut rng, 0.0);
            assert_eq!(matmul(&a, &b).unwrap(), naive(&a, &b));
            let c = random(n, m, &mut rng, 0.5);
            assert_eq!(matmul_tn(&a, &c).unwrap(), naive(&a.transpose(), &c));
            let d = random(m, k, &mut rng, 0.0);
            assert_eq!(matmul_nt(&a, &d).unwrap(), naive(&a, &d.transpose()));
        }
    }

    #[test]
    fn parallel_path_is_bit_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(150, 120, &mut rng, 0.8);
        let b = random(120, 90, &mut rng, 0.0);
        assert_eq!(matmul(&a, &b).unwrap(), naive(&a, &b));
        let c = random(150, 90, &mut rng, 0.3);
        assert_eq!(matmul_tn(&a, &c).unwrap(), naive(&a.transpose(), &c));
        assert_eq!(matmul_nt(&a, &a).unwrap(), naive(&a, &a.transpose()));
    }

    #[test]
    fn broadcast_and_sums() {
        let mut m = Matrix::zeros(2, 2);
        m.add_row_broadcast(&Matrix::row_vector(&[1.0, 2.0])).unwrap();
        assert_eq!(m.column_sums().as_slice(), &[2.0, 4.0]);
        assert!(m.add_row_broadcast(&Matrix::row_vector(&[1.0])).is_err());
        assert_eq!(Matrix::zeros(3, 0).iter_rows().count(), 3);
    }
}
