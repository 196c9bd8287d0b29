use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    pub fn identity(n: usize, kl: usize, ku: usize) -> Self {
        let mut m = Self::zeros(n, kl, ku);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + (j + self.kl - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i < self.n && j < self.n && self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Panics when `(i, j)` lies outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.n && j < self.n && self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.n && j < self.n && self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Column range of row `i` inside the band.
    #[inline]
    pub fn row_span(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row_span(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `alpha * self + beta * I`.
    pub fn scaled_plus_identity(&self, alpha: f64, beta: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= alpha);
        for i in 0..self.n {
            out.add(i, i, beta);
        }
        out
    }

    /// Copy with `shift[i]` added to each diagonal entry.
    pub fn with_diagonal_shift(&self, shift: &[f64]) -> Self {
        assert_eq!(shift.len(), self.n);
        let mut out = self.clone();
        for (i, s) in shift.iter().enumerate() {
            out.add(i, i, *s);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Trailing principal block `rows/cols first..n`.
    pub fn trailing_block(&self, first: usize) -> Self {
        let m = self.n - first;
        let mut out = Self::zeros(m, self.kl, self.ku);
        for i in 0..m {
            for j in self.row_span(i + first) {
                if j >= first {
                    out.set(i, j - first, self.get(i + first, j));
                }
            }
        }
        out
    }

    pub fn factor(&self) -> Result<BandLu> {
        BandLu::new(self)
    }
}

/// LU factorization with scaled partial pivoting; the upper factor has
/// bandwidth `ku + kl`. Pivot candidates are compared relative to their row
/// maxima, so a row carrying a large penalty shift is not promoted into a row
/// where it would cancel catastrophically.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn new(a: &BandMatrix) -> Result<Self> {
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        let width = 2 * kl + ku + 1;
        let mut lu = Self { n, kl, width, data: vec![0.0; n * width], pivots: vec![0; n] };
        for i in 0..n {
            for j in a.row_span(i) {
                let k = lu.idx(i, j);
                lu.data[k] = a.get(i, j);
            }
        }
        let tiny = f64::EPSILON * n.max(1) as f64 * a.max_abs();
        let mut scale: Vec<f64> =
            (0..n).map(|i| a.row_span(i).map(|j| a.get(i, j).abs()).fold(0.0, f64::max)).collect();
        let uw = kl + ku;
        for i in 0..n {
            let last_row = (i + kl).min(n - 1);
            let last_col = (i + uw).min(n - 1);
            let rel = |r: usize, v: f64| if scale[r] > 0.0 { v / scale[r] } else { 0.0 };
            let mut p = i;
            let mut best = rel(i, lu.at(i, i).abs());
            for r in i + 1..=last_row {
                let v = rel(r, lu.at(r, i).abs());
                if v > best {
                    best = v;
                    p = r;
                }
            }
            let pivot = lu.at(p, i).abs();
            if !(pivot > tiny) {
                return Err(Error::Singular { row: i, pivot });
            }
            lu.pivots[i] = p;
            if p != i {
                for c in i..=last_col {
                    let (a_idx, b_idx) = (lu.idx(i, c), lu.idx(p, c));
                    lu.data.swap(a_idx, b_idx);
                }
                scale.swap(i, p);
            }
            let piv = lu.at(i, i);
            for r in i + 1..=last_row {
                let l = lu.at(r, i) / piv;
                let k = lu.idx(r, i);
                lu.data[k] = l;
                if l != 0.0 {
                    for c in i + 1..=last_col {
                        let u = lu.at(i, c);
                        let k = lu.idx(r, c);
                        lu.data[k] -= l * u;
                    }
                }
            }
        }
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: rhs.len() });
        }
        let n = self.n;
        let mut x = rhs.to_vec();
        for i in 0..n {
            let p = self.pivots[i];
            if p != i {
                x.swap(i, p);
            }
            let xi = x[i];
            if xi != 0.0 {
                for r in i + 1..=(i + self.kl).min(n - 1) {
                    x[r] -= self.at(r, i) * xi;
                }
            }
        }
        let uw = self.width - self.kl - 1;
        for i in (0..n).rev() {
            let mut s = x[i];
            for c in i + 1..=(i + uw).min(n - 1) {
                s -= self.at(i, c) * x[c];
            }
            x[i] = s / self.at(i, i);
        }
        Ok(x)
    }
}

/// Solve `a x = rhs` by banded LU.
pub fn solve_banded(a: &BandMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    a.factor()?.solve(rhs)
}
