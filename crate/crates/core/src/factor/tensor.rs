use nalgebra::DMatrix;

/// Dense three-way array, row-major (`k` fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Tensor3 {
            dims,
            data: vec![0.0; dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Tensor3::zeros(dims);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    t[(i, j, k)] = f(i, j, k);
                }
            }
        }
        t
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Tensor3 {
            dims: self.dims,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Mode-`n` unfolding: a `dims[n] × (product of the other dims)` matrix.
    pub fn unfold(&self, mode: usize) -> DMatrix<f64> {
        let [a, b, c] = self.dims;
        match mode {
            0 => DMatrix::from_fn(a, b * c, |i, col| self[(i, col / c, col % c)]),
            1 => DMatrix::from_fn(b, a * c, |j, col| self[(col / c, j, col % c)]),
            2 => DMatrix::from_fn(c, a * b, |k, col| self[(col / b, col % b, k)]),
            _ => panic!("mode {mode} out of range"),
        }
    }

    /// Mode-`n` product with `m`: mode `n` of size `dims[n]` becomes `m.nrows()`.
    pub fn mode_product(&self, mode: usize, m: &DMatrix<f64>) -> Tensor3 {
        assert_eq!(m.ncols(), self.dims[mode]);
        let mut dims = self.dims;
        dims[mode] = m.nrows();
        let mut out = Tensor3::zeros(dims);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let mut s = 0.0;
                    for r in 0..self.dims[mode] {
                        let x = match mode {
                            0 => self[(r, j, k)],
                            1 => self[(i, r, k)],
                            _ => self[(i, j, r)],
                        };
                        let row = [i, j, k][mode];
                        s += m[(row, r)] * x;
                    }
                    out[(i, j, k)] = s;
                }
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.data[(i * self.dims[1] + j) * self.dims[2] + k]
    }
}

impl std::ops::IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        &mut self.data[(i * self.dims[1] + j) * self.dims[2] + k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unfold_matches_mode_product() {
        let t = Tensor3::from_fn([2, 3, 4], |i, j, k| (i * 12 + j * 4 + k) as f64);
        let m = DMatrix::from_fn(5, 3, |r, c| (r + 2 * c) as f64 - 1.0);
        let p = t.mode_product(1, &m);
        assert_eq!(p.dims(), [2, 5, 4]);
        assert_eq!(p.unfold(1), &m * t.unfold(1));
        for mode in 0..3 {
            let u = t.unfold(mode);
            assert_eq!(u.nrows(), t.dims()[mode]);
            assert!((u.norm_squared() - t.norm_squared()).abs() < 1e-9);
        }
    }
}
