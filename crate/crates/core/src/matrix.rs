/// Dense symmetric matrix with a fixed (unused) diagonal.
///
/// Stored full `n * n` so that row slices are contiguous; every write goes to
/// both `(i, j)` and `(j, i)`, which keeps the matrix exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Unordered pairs `(i, j)` with `i < j`, in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
    }

    pub fn upper_values(&self) -> Vec<f64> {
        self.pairs().map(|(i, j)| self.get(i, j)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs()
            .all(|(i, j)| self.data[i * self.n + j].to_bits() == self.data[j * self.n + i].to_bits())
    }
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_are_mirrored() {
        let mut m = SymMatrix::zeros(3);
        m.set(2, 0, 0.25);
        assert_eq!(m.get(0, 2), 0.25);
        assert!(m.is_symmetric());
        assert_eq!(m.pairs().count(), pair_count(3));
    }
}
