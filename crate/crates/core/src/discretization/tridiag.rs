use crate::error::{Error, Result};

/// Tridiagonal system `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
///
/// All four vectors have the system length; `sub[0]` and `sup[n-1]` are unused
/// and kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn zeros(n: usize) -> Self {
        Self {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Matrix-vector product with the assembled matrix.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.sub[i] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.sup[i] * x[i + 1];
                }
                v
            })
            .collect()
    }
}

/// Thomas algorithm. Fails on the first vanishing pivot.
pub fn thomas_solve(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let n = sys.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];

    let mut pivot = sys.diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::ZeroPivot { row: 0 });
    }
    c_prime[0] = sys.sup[0] / pivot;
    d_prime[0] = sys.rhs[0] / pivot;
    for i in 1..n {
        pivot = sys.diag[i] - sys.sub[i] * c_prime[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::ZeroPivot { row: i });
        }
        c_prime[i] = if i + 1 < n { sys.sup[i] / pivot } else { 0.0 };
        d_prime[i] = (sys.rhs[i] - sys.sub[i] * d_prime[i - 1]) / pivot;
    }

    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        x[i] -= c_prime[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(sys: &TridiagonalSystem) -> Vec<f64> {
        let n = sys.len();
        let mut a = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            a[i][i] = sys.diag[i];
            if i > 0 {
                a[i][i - 1] = sys.sub[i];
            }
            if i + 1 < n {
                a[i][i + 1] = sys.sup[i];
            }
            a[i][n] = sys.rhs[i];
        }
        for col in 0..n {
            let p = (col..n)
                .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
                .unwrap();
            a.swap(col, p);
            for r in col + 1..n {
                let m = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= m * a[col][c];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (a[i][n] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn identity() {
        let mut sys = TridiagonalSystem::zeros(3);
        sys.diag = vec![1.0; 3];
        sys.rhs = vec![4.0, 5.0, 6.0];
        assert_eq!(thomas_solve(&sys).unwrap(), vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn two_by_two() {
        let sys = TridiagonalSystem {
            sub: vec![0.0, -1.0],
            diag: vec![2.0, 2.0],
            sup: vec![-1.0, 0.0],
            rhs: vec![1.0, 1.0],
        };
        let x = thomas_solve(&sys).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matches_dense_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let n = 6;
            let mut sys = TridiagonalSystem::zeros(n);
            for i in 0..n {
                if i > 0 {
                    sys.sub[i] = rng.gen_range(-1.0..1.0);
                }
                if i + 1 < n {
                    sys.sup[i] = rng.gen_range(-1.0..1.0);
                }
                sys.diag[i] = sys.sub[i].abs() + sys.sup[i].abs() + rng.gen_range(0.1..2.0);
                if rng.gen_bool(0.5) {
                    sys.diag[i] = -sys.diag[i];
                }
                sys.rhs[i] = rng.gen_range(-3.0..3.0);
            }
            let x = thomas_solve(&sys).unwrap();
            let oracle = dense_solve(&sys);
            for (a, b) in x.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_pivot_names_row() {
        let sys = TridiagonalSystem {
            sub: vec![0.0, 1.0, 0.0],
            diag: vec![1.0, 1.0, 1.0],
            sup: vec![1.0, 0.0, 0.0],
            rhs: vec![0.0; 3],
        };
        assert!(matches!(thomas_solve(&sys), Err(Error::ZeroPivot { row: 1 })));
    }
}
