use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize};

use super::{ArithError, Matrix};

/// A bijection on `{0, …, n−1}` stored as its image array: `π(j) = map[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self, ArithError> {
        let mut seen = vec![false; map.len()];
        for &image in &map {
            if image >= map.len() {
                return Err(ArithError::InvalidPermutation(format!(
                    "index {image} out of range for length {}",
                    map.len()
                )));
            }
            if std::mem::replace(&mut seen[image], true) {
                return Err(ArithError::InvalidPermutation(format!(
                    "index {image} repeated"
                )));
            }
        }
        Ok(Self(map))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Self(map)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self, j: usize) -> usize {
        self.0[j]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (j, &image) in self.0.iter().enumerate() {
            inv[image] = j;
        }
        Self(inv)
    }

    /// Gathers `out[j] = items[π(j)]`.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Result<Vec<T>, ArithError> {
        if items.len() != self.len() {
            return Err(ArithError::DimensionMismatch {
                expected: self.len(),
                actual: items.len(),
            });
        }
        Ok(self.0.iter().map(|&i| items[i].clone()).collect())
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Permutation::new(Vec::<usize>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Reorders columns so that column `j` of the result is column `π(j)` of `m`.
pub fn apply_perm_columns(m: &Matrix, perm: &Permutation) -> Result<Matrix, ArithError> {
    if perm.len() != m.cols() {
        return Err(ArithError::DimensionMismatch {
            expected: m.cols(),
            actual: perm.len(),
        });
    }
    let rows = (0..m.rows())
        .map(|r| perm.apply(m.row(r)))
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{sample_invertible, EntryRange};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert!(Permutation::new(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn identity_leaves_matrix_unchanged() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let m = sample_invertible(4, &mut rng, EntryRange::default()).unwrap();
        assert_eq!(
            apply_perm_columns(&m, &Permutation::identity(4)).unwrap(),
            m
        );
    }

    #[test]
    fn length_mismatch() {
        let m = Matrix::identity(3);
        assert!(apply_perm_columns(&m, &Permutation::identity(4)).is_err());
    }

    #[test]
    fn apply_then_inverse_restores() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for n in 1..10 {
            let m = sample_invertible(n, &mut rng, EntryRange::default()).unwrap();
            let p = Permutation::random(n, &mut rng);
            let there = apply_perm_columns(&m, &p).unwrap();
            assert_eq!(apply_perm_columns(&there, &p.inverse()).unwrap(), m);
        }
    }

    proptest::proptest! {
        #[test]
        fn inverse_composes_to_identity(seed in 0u64..10_000, n in 1usize..40) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let p = Permutation::random(n, &mut rng);
            let items: Vec<usize> = (0..n).collect();
            let back = p.inverse().apply(&p.apply(&items).unwrap()).unwrap();
            proptest::prop_assert_eq!(p.apply(&p.inverse().apply(&items).unwrap()).unwrap(), items.clone());
            proptest::prop_assert_eq!(back, items);
        }
    }
}
