//! Small dense complex matrices and exact-ish elimination helpers.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Column-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            m.column_mut(j).copy_from_slice(col);
        }
        m
    }

    /// Row-major construction, convenient in tests.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// `A − μI`.
    pub fn shifted(&self, mu: Complex64) -> DenseMatrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= mu;
        }
        m
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![ZERO; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            for (yi, &a) in y.iter_mut().zip(self.column(j)) {
                *yi += a * xj;
            }
        }
        y
    }

    /// `A^* x`.
    pub fn adjoint_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols)
            .map(|j| self.column(j).iter().zip(x).map(|(a, &xi)| a.conj() * xi).sum())
            .collect()
    }

    pub fn adjoint(&self) -> DenseMatrix {
        let mut m = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let col = self.matvec(other.column(j));
            out.column_mut(j).copy_from_slice(&col);
        }
        out
    }

    /// Lower and upper bandwidths (structural, exact zeros excluded).
    pub fn bandwidths(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for j in 0..self.cols {
            for (i, &a) in self.column(j).iter().enumerate() {
                if a != ZERO {
                    if i > j {
                        kl = kl.max(i - j);
                    } else {
                        ku = ku.max(j - i);
                    }
                }
            }
        }
        (kl, ku)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.norm()))
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[j * self.rows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[j * self.rows + i]
    }
}

/// Reduced row echelon form by Gauss-Jordan elimination with partial
/// pivoting. Returns the reduced matrix and its pivot columns. Entries below
/// `tol · max|A|` are treated as zero.
pub fn rref(a: &DenseMatrix, rel_tol: f64) -> (DenseMatrix, Vec<usize>) {
    let mut m = a.clone();
    let tol = rel_tol * m.max_abs().max(f64::MIN_POSITIVE);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        let (best, best_abs) = (row..m.rows)
            .map(|i| (i, m[(i, col)].norm()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_abs <= tol {
            continue;
        }
        if best != row {
            for j in 0..m.cols {
                let tmp = m[(row, j)];
                m[(row, j)] = m[(best, j)];
                m[(best, j)] = tmp;
            }
        }
        let inv = recip(m[(row, col)]);
        for j in 0..m.cols {
            m[(row, j)] *= inv;
        }
        for i in 0..m.rows {
            if i != row {
                let f = m[(i, col)];
                if f != ZERO {
                    for j in 0..m.cols {
                        let t = m[(row, j)];
                        m[(i, j)] -= f * t;
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (m, pivots)
}

pub fn rank(a: &DenseMatrix, rel_tol: f64) -> usize {
    rref(a, rel_tol).1.len()
}

/// Basis of the null space of `a` from its RREF, ordered by free column.
pub fn null_space(a: &DenseMatrix, rel_tol: f64) -> Vec<Vec<Complex64>> {
    let (r, pivots) = rref(a, rel_tol);
    let free: Vec<usize> = (0..a.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![ZERO; a.cols];
            v[f] = ONE;
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r[(row, f)];
            }
            v
        })
        .collect()
}

/// Inverse of a square matrix by Gauss-Jordan; `None` when singular at `rel_tol`.
pub fn inverse(a: &DenseMatrix, rel_tol: f64) -> Option<DenseMatrix> {
    assert!(a.is_square());
    let n = a.rows;
    let mut aug = DenseMatrix::zeros(n, 2 * n);
    for j in 0..n {
        for i in 0..n {
            aug[(i, j)] = a[(i, j)];
        }
        aug[(j, n + j)] = ONE;
    }
    let (r, pivots) = rref(&aug, rel_tol);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    let mut inv = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            inv[(i, j)] = r[(i, n + j)];
        }
    }
    Some(inv)
}

/// `a / b` by Smith's method, safe when `|b|²` over- or underflows.
pub fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    if b.im == 0.0 {
        return Complex64::new(a.re / b.re, a.im / b.re);
    }
    if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let d = b.re + b.im * r;
        Complex64::new((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    } else {
        let r = b.re / b.im;
        let d = b.re * r + b.im;
        Complex64::new((a.re * r + a.im) / d, (a.im * r - a.re) / d)
    }
}

/// `1 / b`, see [`cdiv`].
pub fn recip(b: Complex64) -> Complex64 {
    cdiv(Complex64::new(1.0, 0.0), b)
}

pub fn l2_norm(x: &[Complex64]) -> f64 {
    let scale = x.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * x.iter().map(|c| (c.norm() / scale).powi(2)).sum::<f64>().sqrt()
}
