use super::{NumericError, NumericFormat};

#[derive(Debug, Clone, PartialEq)]
enum Store {
    Dense(Vec<f64>),
    /// Compressed sparse rows; column indices ascending within each row.
    Sparse {
        row_ptr: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
    },
}

/// Row-major matrix of scalars in some [`NumericFormat`].
///
/// Storage is either dense or compressed-sparse-row. The two are
/// interchangeable: every operation yields the same entries regardless of
/// storage, because exact zeros contribute nothing to a product sum.
#[derive(Debug, Clone)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    store: Store,
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && (0..self.rows).all(|i| self.row(i) == other.row(i))
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            store: Store::Dense(vec![0.0; rows * cols]),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumericError> {
        if data.len() != rows * cols {
            return Err(NumericError::DimensionMismatch {
                op: "from_vec",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(NumericError::NonFinite);
        }
        Ok(Self {
            rows,
            cols,
            store: Store::Dense(data),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NumericError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(NumericError::Ragged);
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn row_vector(v: &[f64]) -> Result<Self, NumericError> {
        Self::from_vec(1, v.len(), v.to_vec())
    }

    /// Sparse matrix from `(row, col, value)` triplets. Later duplicates
    /// overwrite earlier ones; explicit zeros are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, NumericError> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(NumericError::IndexOutOfRange { index: (i, j), shape: (rows, cols) });
            }
            if !v.is_finite() {
                return Err(NumericError::NonFinite);
            }
            entries.push((i, j, v));
        }
        // stable sort keeps insertion order among duplicates; keep the last
        entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut dedup: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for e in entries {
            match dedup.last_mut() {
                Some(last) if last.0 == e.0 && last.1 == e.1 => *last = e,
                _ => dedup.push(e),
            }
        }
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for (i, j, v) in dedup.into_iter().filter(|e| e.2 != 0.0) {
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            vals.push(v);
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            rows,
            cols,
            store: Store::Sparse {
                row_ptr,
                cols: col_idx,
                vals,
            },
        })
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

    pub fn is_sparse(&self) -> bool {
        matches!(self.store, Store::Sparse { .. })
    }

    pub fn nnz(&self) -> usize {
        match &self.store {
            Store::Dense(d) => d.iter().filter(|x| **x != 0.0).count(),
            Store::Sparse { vals, .. } => vals.len(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        match &self.store {
            Store::Dense(d) => d[i * self.cols + j],
            Store::Sparse { row_ptr, cols, vals } => {
                let span = row_ptr[i]..row_ptr[i + 1];
                match cols[span.clone()].binary_search(&j) {
                    Ok(k) => vals[span.start + k],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// Writes one entry, densifying sparse storage first.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        self.densify();
        if let Store::Dense(d) = &mut self.store {
            d[i * self.cols + j] = v;
        }
    }

    fn densify(&mut self) {
        if self.is_sparse() {
            *self = self.to_dense();
        }
    }

    pub fn to_dense(&self) -> Self {
        let data = (0..self.rows).flat_map(|i| self.row(i)).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            store: Store::Dense(data),
        }
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        match &self.store {
            Store::Dense(d) => d[i * self.cols..(i + 1) * self.cols].to_vec(),
            Store::Sparse { .. } => {
                let mut out = vec![0.0; self.cols];
                for (j, v) in self.row_nonzeros(i) {
                    out[j] = v;
                }
                out
            }
        }
    }

    /// Nonzero entries of row `i` in ascending column order.
    pub fn row_nonzeros(&self, i: usize) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match &self.store {
            Store::Dense(d) => Box::new(
                d[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .copied()
                    .enumerate()
                    .filter(|(_, v)| *v != 0.0),
            ),
            Store::Sparse { row_ptr, cols, vals } => {
                let span = row_ptr[i]..row_ptr[i + 1];
                Box::new(cols[span.clone()].iter().copied().zip(vals[span].iter().copied()))
            }
        }
    }

    /// All nonzero entries as `(row, col, value)`, row-major.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.rows)
            .flat_map(|i| self.row_nonzeros(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().into_iter().map(|(i, j, v)| (j, i, v));
        let sparse = Self::from_triplets(self.cols, self.rows, t).expect("transpose keeps bounds");
        if self.is_sparse() {
            sparse
        } else {
            sparse.to_dense()
        }
    }

    /// Rows `range` as a new dense matrix.
    pub fn slice_rows(&self, start: usize, end: usize) -> Self {
        let data = (start..end).flat_map(|i| self.row(i)).collect();
        Self {
            rows: end - start,
            cols: self.cols,
            store: Store::Dense(data),
        }
    }

    /// Columns `start..end` as a new dense matrix.
    pub fn slice_cols(&self, start: usize, end: usize) -> Self {
        let data = (0..self.rows)
            .flat_map(|i| self.row(i)[start..end].to_vec())
            .collect();
        Self {
            rows: self.rows,
            cols: end - start,
            store: Store::Dense(data),
        }
    }

    /// Horizontal concatenation.
    pub fn hcat(parts: &[Matrix]) -> Result<Self, NumericError> {
        let rows = parts.first().map_or(0, |m| m.rows);
        if parts.iter().any(|m| m.rows != rows) {
            return Err(NumericError::Ragged);
        }
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for m in parts {
                data.extend(m.row(i));
            }
        }
        Self::from_vec(rows, cols, data)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        match &self.store {
            Store::Dense(d) => Self {
                rows: self.rows,
                cols: self.cols,
                store: Store::Dense(d.iter().map(|&x| f(x)).collect()),
            },
            Store::Sparse { .. } => self.to_dense().map(f),
        }
    }

    pub fn try_map(&self, f: impl Fn(f64) -> Result<f64, NumericError>) -> Result<Self, NumericError> {
        match &self.store {
            Store::Dense(d) => Ok(Self {
                rows: self.rows,
                cols: self.cols,
                store: Store::Dense(d.iter().map(|&x| f(x)).collect::<Result<_, _>>()?),
            }),
            Store::Sparse { row_ptr, cols, vals } => {
                if f(0.0)? != 0.0 {
                    return self.to_dense().try_map(f);
                }
                Ok(Self {
                    rows: self.rows,
                    cols: self.cols,
                    store: Store::Sparse {
                        row_ptr: row_ptr.clone(),
                        cols: cols.clone(),
                        vals: vals.iter().map(|&x| f(x)).collect::<Result<_, _>>()?,
                    },
                })
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        (0..self.rows)
            .flat_map(|i| {
                self.row(i)
                    .into_iter()
                    .zip(other.row(i))
                    .map(|(a, b)| (a - b).abs())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }
}

/// Error-free product: `a*b = p + e` exactly.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Error-free sum: `a+b = s + e` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl NumericFormat {
    /// Matrix product.
    ///
    /// Entry `(i,j)` accumulates products in ascending inner index. Under
    /// `Float53` the sum is compensated (twice the working precision, then
    /// one final rounding); under fixed point the sum is exact in 128-bit
    /// integers and rounded once.
    pub fn matmul(&self, a: &Matrix, b: &Matrix) -> Result<Matrix, NumericError> {
        if a.cols != b.rows {
            return Err(NumericError::DimensionMismatch {
                op: "matmul",
                left: a.shape(),
                right: b.shape(),
            });
        }
        if a.is_sparse() && b.is_sparse() {
            return self.matmul_sparse(a, b);
        }
        let mut out = Vec::with_capacity(a.rows * b.cols);
        match self {
            NumericFormat::Float53 => {
                let mut sum = vec![0.0f64; b.cols];
                let mut comp = vec![0.0f64; b.cols];
                for i in 0..a.rows {
                    sum.iter_mut().for_each(|x| *x = 0.0);
                    comp.iter_mut().for_each(|x| *x = 0.0);
                    for (k, av) in a.row_nonzeros(i) {
                        for (j, bv) in b.row_nonzeros(k) {
                            let (p, pe) = two_prod(av, bv);
                            let (s, se) = two_sum(sum[j], p);
                            sum[j] = s;
                            comp[j] += pe + se;
                        }
                    }
                    for j in 0..b.cols {
                        let v = sum[j] + comp[j];
                        if !v.is_finite() {
                            return Err(NumericError::NonFinite);
                        }
                        // normalise -0.0 so sparse and dense paths agree bitwise
                        out.push(if v == 0.0 { 0.0 } else { v });
                    }
                }
            }
            NumericFormat::Fixed { .. } => {
                let mut acc = vec![0i128; b.cols];
                for i in 0..a.rows {
                    acc.iter_mut().for_each(|x| *x = 0);
                    for (k, av) in a.row_nonzeros(i) {
                        let ra = self.raw(av);
                        for (j, bv) in b.row_nonzeros(k) {
                            acc[j] += ra * self.raw(bv);
                        }
                    }
                    for &s in &acc {
                        out.push(self.rescale_product(s)?);
                    }
                }
            }
        }
        Matrix::from_vec(a.rows, b.cols, out)
    }

    /// Sparse × sparse product with the same per-entry arithmetic as
    /// [`NumericFormat::matmul`], touching only structurally nonzero outputs.
    fn matmul_sparse(&self, a: &Matrix, b: &Matrix) -> Result<Matrix, NumericError> {
        let mut sum = vec![0.0f64; b.cols];
        let mut comp = vec![0.0f64; b.cols];
        let mut acc = vec![0i128; b.cols];
        let mut seen = vec![false; b.cols];
        let mut touched = Vec::new();
        let mut trips = Vec::new();
        for i in 0..a.rows {
            for (k, av) in a.row_nonzeros(i) {
                for (j, bv) in b.row_nonzeros(k) {
                    if !seen[j] {
                        seen[j] = true;
                        touched.push(j);
                    }
                    match self {
                        NumericFormat::Float53 => {
                            let (p, pe) = two_prod(av, bv);
                            let (s, se) = two_sum(sum[j], p);
                            sum[j] = s;
                            comp[j] += pe + se;
                        }
                        NumericFormat::Fixed { .. } => acc[j] += self.raw(av) * self.raw(bv),
                    }
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                let v = match self {
                    NumericFormat::Float53 => {
                        let v = sum[j] + comp[j];
                        if !v.is_finite() {
                            return Err(NumericError::NonFinite);
                        }
                        v
                    }
                    NumericFormat::Fixed { .. } => self.rescale_product(acc[j])?,
                };
                if v != 0.0 {
                    trips.push((i, j, v));
                }
                sum[j] = 0.0;
                comp[j] = 0.0;
                acc[j] = 0;
                seen[j] = false;
            }
            touched.clear();
        }
        Matrix::from_triplets(a.rows, b.cols, trips)
    }

    /// Entrywise sum.
    pub fn add_matrix(&self, a: &Matrix, b: &Matrix) -> Result<Matrix, NumericError> {
        if a.shape() != b.shape() {
            return Err(NumericError::DimensionMismatch {
                op: "add",
                left: a.shape(),
                right: b.shape(),
            });
        }
        let mut data = Vec::with_capacity(a.rows * a.cols);
        for i in 0..a.rows {
            for (x, y) in a.row(i).into_iter().zip(b.row(i)) {
                data.push(self.add(x, y)?);
            }
        }
        Matrix::from_vec(a.rows, a.cols, data)
    }

    /// Adds `bias` to every row (`X + 1 bᵀ`).
    pub fn add_row_bias(&self, a: &Matrix, bias: &[f64]) -> Result<Matrix, NumericError> {
        if bias.len() != a.cols {
            return Err(NumericError::DimensionMismatch {
                op: "add_row_bias",
                left: a.shape(),
                right: (1, bias.len()),
            });
        }
        let mut data = Vec::with_capacity(a.rows * a.cols);
        for i in 0..a.rows {
            for (x, y) in a.row(i).into_iter().zip(bias) {
                data.push(self.add(x, *y)?);
            }
        }
        Matrix::from_vec(a.rows, a.cols, data)
    }

    /// Divides every entry by `d`.
    pub fn div_scalar(&self, a: &Matrix, d: f64) -> Result<Matrix, NumericError> {
        a.try_map(|x| self.div(x, d))
    }

    /// Numerically stable softmax. `-inf` marks a masked entry and maps to
    /// exactly zero; it may not appear anywhere else.
    pub fn softmax_row(&self, v: &[f64]) -> Result<Vec<f64>, NumericError> {
        if v.is_empty() {
            return Err(NumericError::Empty);
        }
        if v.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(NumericError::NonFinite);
        }
        let max = v
            .iter()
            .copied()
            .filter(|x| x.is_finite())
            .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))))
            .ok_or(NumericError::AllMasked)?;
        match self {
            NumericFormat::Float53 => {
                let exps: Vec<f64> = v
                    .iter()
                    .map(|&x| if x.is_finite() { (x - max).exp() } else { 0.0 })
                    .collect();
                let total = compensated_sum(&exps);
                Ok(exps.into_iter().map(|e| e / total).collect())
            }
            NumericFormat::Fixed { frac_bits, .. } => {
                let mut raws = Vec::with_capacity(v.len());
                for &x in v {
                    if x.is_finite() {
                        let z = self.add(x, -max)?;
                        raws.push(self.raw(self.exp(z)?));
                    } else {
                        raws.push(0);
                    }
                }
                let total: i128 = raws.iter().sum();
                if total == 0 {
                    return Err(NumericError::AllMasked);
                }
                // Largest-remainder rounding: each entry is within one unit of
                // its exact value and the units sum to exactly one.
                let one = 1i128 << frac_bits;
                let mut q: Vec<i128> = raws.iter().map(|&r| (r << frac_bits) / total).collect();
                let deficit = one - q.iter().sum::<i128>();
                let mut order: Vec<usize> = (0..q.len()).collect();
                order.sort_by_key(|&i| (std::cmp::Reverse((raws[i] << frac_bits) % total), i));
                for &i in order.iter().take(deficit as usize) {
                    q[i] += 1;
                }
                Ok(q.into_iter().map(|x| x as f64 / 2f64.powi(*frac_bits as i32)).collect())
            }
        }
    }
}

/// Neumaier-compensated sum, accumulated left to right.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let (s, e) = two_sum(sum, x);
        sum = s;
        comp += e;
    }
    sum + comp
}

/// Entrywise `max(0, x)`.
pub fn relu(m: &Matrix) -> Matrix {
    m.map(|x| if x > 0.0 { x } else { 0.0 })
}

/// Index of the first maximal entry.
///
/// # Panics
/// On an empty slice.
pub fn argmax_first(v: &[f64]) -> usize {
    assert!(!v.is_empty(), "argmax of an empty vector");
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    const F: NumericFormat = NumericFormat::Float53;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_and_zero_products() {
        let a = m(&[&[1.5, -2.0, 0.25], &[3.0, 4.0, 5.0], &[-1.0, 0.0, 9.0]]);
        assert_eq!(F.matmul(&Matrix::identity(3), &a).unwrap(), a);
        assert_eq!(F.matmul(&Matrix::zeros(3, 3), &a).unwrap(), Matrix::zeros(3, 3));
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let err = F.matmul(&Matrix::zeros(2, 3), &Matrix::zeros(2, 3)).unwrap_err();
        assert!(matches!(err, NumericError::DimensionMismatch { .. }));
    }

    #[test]
    fn sparse_and_dense_agree() {
        let dense = m(&[&[0.0, 2.0, 0.0], &[1.0, 0.0, -3.5]]);
        let sparse = Matrix::from_triplets(2, 3, dense.triplets()).unwrap();
        assert!(sparse.is_sparse());
        let x = m(&[&[0.3, -0.7]]);
        let fx = NumericFormat::fixed(16, 40).unwrap();
        for fmt in [F, fx] {
            let x = x.try_map(|v| fmt.round(v)).unwrap();
            assert_eq!(fmt.matmul(&x, &dense).unwrap(), fmt.matmul(&x, &sparse).unwrap());
        }
        assert_eq!(sparse.transpose().get(2, 1), -3.5);
    }

    #[test]
    fn triplet_duplicates_keep_last() {
        let s = Matrix::from_triplets(1, 2, [(0, 1, 1.0), (0, 1, 4.0)]).unwrap();
        assert_eq!(s.get(0, 1), 4.0);
        assert!(Matrix::from_triplets(1, 2, [(1, 0, 1.0)]).is_err());
    }

    #[test]
    fn fixed_matmul_overflow_reported() {
        let f = NumericFormat::fixed(4, 8).unwrap();
        let a = m(&[&[4.0, 4.0]]);
        let b = m(&[&[1.0], &[1.0]]);
        assert!(matches!(f.matmul(&a, &b), Err(NumericError::Overflow { .. })));
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(F.softmax_row(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        let p = F.softmax_row(&[1.0, 0.0]).unwrap();
        let e = std::f64::consts::E;
        assert!((p[0] - e / (e + 1.0)).abs() < 1e-15);
        assert!((p[0] - 0.7310586).abs() < 1e-7);
        assert!((p[1] - 0.2689414).abs() < 1e-7);
        let masked = F.softmax_row(&[2.0, f64::NEG_INFINITY]).unwrap();
        assert_eq!(masked, vec![1.0, 0.0]);
        assert_eq!(
            F.softmax_row(&[f64::NEG_INFINITY; 3]).unwrap_err(),
            NumericError::AllMasked
        );
        assert_eq!(F.softmax_row(&[]).unwrap_err(), NumericError::Empty);
    }

    #[test]
    fn fixed_softmax_masks_exactly() {
        let f = NumericFormat::fixed(20, 32).unwrap();
        let p = f.softmax_row(&[0.0, f64::NEG_INFINITY, 0.0]).unwrap();
        assert_eq!(p, vec![0.5, 0.0, 0.5]);
    }

    #[test]
    fn relu_examples() {
        assert_eq!(relu(&m(&[&[-1.0, 2.0]])), m(&[&[0.0, 2.0]]));
        assert_eq!(relu(&Matrix::zeros(2, 2)), Matrix::zeros(2, 2));
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax_first(&[0.0, 1.0, 0.0]), 1);
        assert_eq!(argmax_first(&[0.5, 0.5]), 0);
    }
}
