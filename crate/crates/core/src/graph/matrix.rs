use crate::error::{Error, Result};

/// Symmetric matrix with exact integer entries.
///
/// The canonical storage is the upper triangle as `(row, col, value)` with
/// `row <= col`, sorted and with zeros dropped. A full row-compressed copy is
/// kept alongside for products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymMatrix {
    dim: usize,
    upper: Vec<(usize, usize, i64)>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<i64>,
}

impl SymMatrix {
    /// Builds from upper-triangle triplets. Repeated positions are summed.
    pub fn from_upper_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, i64)>,
    ) -> Result<Self> {
        let mut upper: Vec<(usize, usize, i64)> = Vec::new();
        for (r, c, v) in triplets {
            if r > c {
                return Err(Error::InvalidInput(format!(
                    "triplet ({r}, {c}) is below the diagonal"
                )));
            }
            if c >= dim {
                return Err(Error::InvalidInput(format!(
                    "triplet ({r}, {c}) outside dimension {dim}"
                )));
            }
            upper.push((r, c, v));
        }
        upper.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, i64)> = Vec::with_capacity(upper.len());
        for (r, c, v) in upper {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != 0);

        let mut rows: Vec<Vec<(usize, i64)>> = vec![Vec::new(); dim];
        for &(r, c, v) in &merged {
            rows[r].push((c, v));
            if r != c {
                rows[c].push((r, v));
            }
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(SymMatrix {
            dim,
            upper: merged,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix::from_upper_triplets(dim, []).expect("empty triplets")
    }

    pub fn diagonal_matrix(diag: &[i64]) -> Self {
        SymMatrix::from_upper_triplets(diag.len(), diag.iter().enumerate().map(|(i, &d)| (i, i, d)))
            .expect("diagonal triplets are in range")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Upper-triangle entries `(row, col, value)` with `row <= col`.
    pub fn entries(&self) -> &[(usize, usize, i64)] {
        &self.upper
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[lo..hi].binary_search(&j) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[lo..hi]
            .iter()
            .copied()
            .zip(self.vals[lo..hi].iter().copied())
    }

    pub fn row_sum(&self, i: usize) -> i64 {
        self.row(i).map(|(_, v)| v).sum()
    }

    pub fn diagonal(&self) -> Vec<i64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Largest Gershgorin disc edge, an upper bound on the spectral radius.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).map(|(_, v)| v.unsigned_abs()).sum::<u64>() as f64)
            .fold(0.0, f64::max)
    }

    /// `out = self * x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (i, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.vals[k] as f64 * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// Quadratic form `x^T M x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Exact entrywise sum.
    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch {} vs {}",
                self.dim, other.dim
            )));
        }
        SymMatrix::from_upper_triplets(
            self.dim,
            self.upper.iter().chain(other.upper.iter()).copied(),
        )
    }

    pub fn to_dense_i64(&self) -> Vec<Vec<i64>> {
        let mut d = vec![vec![0; self.dim]; self.dim];
        for &(r, c, v) in &self.upper {
            d[r][c] = v;
            d[c][r] = v;
        }
        d
    }

    /// Row-major dense copy as floating point.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim * self.dim];
        for &(r, c, v) in &self.upper {
            d[r * self.dim + c] = v as f64;
            d[c * self.dim + r] = v as f64;
        }
        d
    }

    /// Whether the off-diagonal pattern, viewed as a graph, is connected.
    pub(crate) fn pattern_components(&self) -> Vec<Vec<usize>> {
        let edges = self
            .upper
            .iter()
            .filter(|&&(r, c, _)| r != c)
            .map(|&(r, c, _)| (r, c));
        super::Graph::new(self.dim.max(1), edges)
            .map(|g| g.components())
            .unwrap_or_default()
    }
}
