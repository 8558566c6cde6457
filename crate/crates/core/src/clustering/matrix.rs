use rayon::prelude::*;

/// Symmetric pairwise distances with a zero diagonal, stored as the strict
/// upper triangle in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds the matrix by evaluating `f(i, j)` for every `i < j`. Rows are
    /// computed in parallel; the result does not depend on scheduling.
    pub fn from_fn<F>(n: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| ((i + 1)..n).map(|j| f(i, j)).collect())
            .collect();
        DistanceMatrix { n, upper: rows.concat() }
    }

    /// Builds from a full square matrix; only the upper triangle is read.
    pub fn from_square(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "distance matrix must be square");
            upper.extend_from_slice(&row[i + 1..]);
        }
        DistanceMatrix { n, upper }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // Row a starts after the a preceding rows of lengths n-1, n-2, ...
        let offset = a * (2 * self.n - a - 1) / 2;
        self.upper[offset + (b - a - 1)]
    }

    /// True when every stored distance is a whole number.
    pub fn is_integer_valued(&self) -> bool {
        self.upper.iter().all(|d| d.fract() == 0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.upper.iter().copied().fold(0.0, f64::max)
    }
}
