//! Orthonormal DCT-II of small fixed sizes via a precomputed basis matrix.

/// `basis[k * n + i] = c_k · cos(π (2i + 1) k / 2n)`.
#[derive(Debug, Clone)]
pub struct Dct {
    n: usize,
    basis: Vec<f64>,
}

impl Dct {
    pub fn new(n: usize) -> Self {
        assert!(n > 0);
        let mut basis = vec![0.0; n * n];
        for k in 0..n {
            let c = if k == 0 {
                (1.0 / n as f64).sqrt()
            } else {
                (2.0 / n as f64).sqrt()
            };
            for i in 0..n {
                basis[k * n + i] = c * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos();
            }
        }
        Self { n, basis }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// 1-D forward transform of `n` samples taken at `stride`.
    fn forward_strided(&self, data: &mut [f64], offset: usize, stride: usize, tmp: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let row = &self.basis[k * n..(k + 1) * n];
            tmp[k] = (0..n).map(|i| row[i] * data[offset + i * stride]).sum();
        }
        for k in 0..n {
            data[offset + k * stride] = tmp[k];
        }
    }

    fn inverse_strided(&self, data: &mut [f64], offset: usize, stride: usize, tmp: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            tmp[i] = (0..n).map(|k| self.basis[k * n + i] * data[offset + k * stride]).sum();
        }
        for i in 0..n {
            data[offset + i * stride] = tmp[i];
        }
    }

    pub fn forward_1d(&self, data: &mut [f64]) {
        let mut tmp = vec![0.0; self.n];
        self.forward_strided(data, 0, 1, &mut tmp);
    }

    pub fn inverse_1d(&self, data: &mut [f64]) {
        let mut tmp = vec![0.0; self.n];
        self.inverse_strided(data, 0, 1, &mut tmp);
    }

    /// In-place separable 2-D transform of a row-major `n × n` block.
    pub fn forward_2d(&self, block: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(block.len(), n * n);
        let mut tmp = vec![0.0; n];
        for r in 0..n {
            self.forward_strided(block, r * n, 1, &mut tmp);
        }
        for c in 0..n {
            self.forward_strided(block, c, n, &mut tmp);
        }
    }

    pub fn inverse_2d(&self, block: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(block.len(), n * n);
        let mut tmp = vec![0.0; n];
        for c in 0..n {
            self.inverse_strided(block, c, n, &mut tmp);
        }
        for r in 0..n {
            self.inverse_strided(block, r * n, 1, &mut tmp);
        }
    }

    /// Transform along the slowest axis of `depth` stacked `plane`-sized
    /// slices (`self.len() == depth`).
    pub fn forward_across(&self, data: &mut [f64], plane: usize) {
        let mut tmp = vec![0.0; self.n];
        for p in 0..plane {
            self.forward_strided(data, p, plane, &mut tmp);
        }
    }

    pub fn inverse_across(&self, data: &mut [f64], plane: usize) {
        let mut tmp = vec![0.0; self.n];
        for p in 0..plane {
            self.inverse_strided(data, p, plane, &mut tmp);
        }
    }
}
