//! Orthonormal description of the affine subspace cut out by the marginal
//! and normalization constraints on the tendency-vector law.

use crate::error::{CmcError, Result};
use crate::model::NondeteriorationProbs;
use crate::model::ChiDistribution;
use crate::scalar::{dot, norm, Scalar};

/// Affine subspace `origin + span(vectors)` with orthonormal `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineBasis<T> {
    origin: Vec<T>,
    vectors: Vec<Vec<T>>,
    /// Normals of the equality constraints defining the subspace; may be empty
    /// for subspaces built from spanning vectors.
    normals: Vec<Vec<T>>,
}

/// Constraint normals in `R^(2^M)`: one indicator per marginal, then the all-ones
/// normalization row.
pub fn constraint_normals<T: Scalar>(classes: usize) -> Vec<Vec<T>> {
    let dim = 1usize << classes;
    let mut rows: Vec<Vec<T>> = (0..classes)
        .map(|i| {
            (0..dim)
                .map(|k| if k >> i & 1 == 1 { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    rows.push(vec![T::one(); dim]);
    rows
}

fn subtract_projection<T: Scalar>(v: &mut [T], onto: &[Vec<T>]) {
    // two passes of modified Gram-Schmidt keep the residual orthogonal to
    // working precision
    for _ in 0..2 {
        for u in onto {
            let c = dot(v, u);
            for (a, &b) in v.iter_mut().zip(u) {
                *a = *a - c * b;
            }
        }
    }
}

/// Orthonormal basis of the orthogonal complement of `span(fixed)` in `R^dim`,
/// built by Gram-Schmidt over the coordinate vectors, always taking the
/// candidate with the largest residual next.
fn orthonormal_complement<T: Scalar>(fixed: &[Vec<T>], dim: usize) -> Vec<Vec<T>> {
    let mut ortho: Vec<Vec<T>> = Vec::new();
    for f in fixed {
        let mut v = f.clone();
        subtract_projection(&mut v, &ortho);
        let n = norm(&v);
        if n > T::of(1e-10) {
            ortho.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    let rank = ortho.len();
    let mut candidates: Vec<Vec<T>> = (0..dim)
        .map(|j| (0..dim).map(|k| if k == j { T::one() } else { T::zero() }).collect())
        .collect();
    for c in candidates.iter_mut() {
        subtract_projection(c, &ortho);
    }
    let mut out = Vec::with_capacity(dim - rank);
    while out.len() < dim - rank {
        let (best, n) = candidates
            .iter()
            .enumerate()
            .map(|(j, c)| (j, norm(c)))
            .fold((usize::MAX, T::zero()), |acc, (j, n)| if n > acc.1 { (j, n) } else { acc });
        if best == usize::MAX || n <= T::of(1e-10) {
            break;
        }
        let mut v = candidates.swap_remove(best);
        subtract_projection(&mut v, &ortho);
        subtract_projection(&mut v, &out);
        let n = norm(&v);
        let v: Vec<T> = v.into_iter().map(|a| a / n).collect();
        for c in candidates.iter_mut() {
            let k = dot(c, &v);
            for (a, &b) in c.iter_mut().zip(&v) {
                *a = *a - k * b;
            }
        }
        out.push(v);
    }
    out
}

impl<T: Scalar> AffineBasis<T> {
    /// Subspace of laws on `{0,1}^M` with the marginals of `np`; the origin is
    /// the independent law, which is feasible.
    pub fn for_marginals(np: &NondeteriorationProbs<T>) -> Result<Self> {
        let classes = np.classes();
        let normals = constraint_normals::<T>(classes);
        let vectors = orthonormal_complement(&normals, 1 << classes);
        let expected = (1usize << classes) - (classes + 1);
        if vectors.len() != expected {
            return Err(CmcError::Degenerate(format!(
                "constraint subspace has dimension {} instead of {expected}",
                vectors.len()
            )));
        }
        let origin = ChiDistribution::independent(np).into_vec();
        Ok(AffineBasis { origin, vectors, normals })
    }

    /// Subspace through `origin` spanned by `spanning` (need not be
    /// orthonormal or independent).
    pub fn from_spanning(origin: Vec<T>, spanning: &[Vec<T>]) -> Result<Self> {
        let dim = origin.len();
        if spanning.iter().any(|v| v.len() != dim) {
            return Err(CmcError::InvalidConfig("spanning vectors have the wrong length".into()));
        }
        let null = orthonormal_complement(spanning, dim);
        let vectors = orthonormal_complement(&null, dim);
        Ok(AffineBasis { origin, vectors, normals: null })
    }

    pub fn origin(&self) -> &[T] {
        &self.origin
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    pub fn normals(&self) -> &[Vec<T>] {
        &self.normals
    }

    /// Dimension of the linear part.
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Dimension of the ambient space.
    pub fn ambient(&self) -> usize {
        self.origin.len()
    }

    /// Orthogonal projection onto the linear part.
    pub fn project(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); v.len()];
        for e in &self.vectors {
            let c = dot(e, v);
            for (o, &b) in out.iter_mut().zip(e) {
                *o = *o + c * b;
            }
        }
        out
    }

    /// Maps coordinates in the basis into the ambient space (without origin).
    pub fn embed(&self, coords: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.ambient()];
        for (e, &c) in self.vectors.iter().zip(coords) {
            for (o, &b) in out.iter_mut().zip(e) {
                *o = *o + c * b;
            }
        }
        out
    }
}

/// Unit normal, inside the subspace, of the intersection of the subspace with
/// the hyperplane `<x, normal> = c`: the projection of `normal` onto the
/// linear part, rescaled to unit length.
pub fn subspace_normal_of<T: Scalar>(normal: &[T], basis: &AffineBasis<T>) -> Result<Vec<T>> {
    let p = basis.project(normal);
    let n = norm(&p);
    if n <= T::zero_tol() * (T::one() + norm(normal)) {
        return Err(CmcError::Degenerate(
            "hyperplane is parallel to the subspace".into(),
        ));
    }
    Ok(p.into_iter().map(|a| a / n).collect())
}

/// [`subspace_normal_of`] for the coordinate facet `x_i = const`.
pub fn subspace_normal<T: Scalar>(i: usize, basis: &AffineBasis<T>) -> Result<Vec<T>> {
    let mut e = vec![T::zero(); basis.ambient()];
    e[i] = T::one();
    subspace_normal_of(&e, basis)
}

/// Offset `c'` such that a point `y` of the subspace lies on `<x, normal> = c`
/// exactly when `<y, unit_normal> = c'`.
pub fn facet_offset<T: Scalar>(normal: &[T], c: T, basis: &AffineBasis<T>) -> Result<T> {
    let p = basis.project(normal);
    let n = norm(&p);
    if n <= T::zero_tol() * (T::one() + norm(normal)) {
        return Err(CmcError::Degenerate(
            "hyperplane is parallel to the subspace".into(),
        ));
    }
    let o = basis.origin();
    Ok((c - dot(o, normal) + dot(o, &p)) / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn np(p: &[f64]) -> NondeteriorationProbs<f64> {
        NondeteriorationProbs::new(p.to_vec()).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(AffineBasis::for_marginals(&np(&[0.3])).unwrap().dim(), 0);
        assert_eq!(AffineBasis::for_marginals(&np(&[0.3, 0.6])).unwrap().dim(), 1);
        let b = AffineBasis::for_marginals(&np(&[0.9191, 0.9293, 0.9308, 0.9603, 0.787])).unwrap();
        assert_eq!(b.dim(), 26);
        assert_eq!(b.ambient(), 32);
    }

    #[test]
    fn basis_is_orthonormal_and_tangent() {
        let b = AffineBasis::for_marginals(&np(&[0.2, 0.5, 0.7, 0.9])).unwrap();
        for (i, u) in b.vectors().iter().enumerate() {
            for (j, v) in b.vectors().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(u, v) - want).abs() < 1e-10);
            }
            for n in b.normals() {
                assert!(dot(u, n).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn full_space_normal_is_identity() {
        let b = AffineBasis::<f64>::from_spanning(
            vec![0.0; 3],
            &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        )
        .unwrap();
        let n = subspace_normal(1, &b).unwrap();
        assert!((n[0]).abs() < 1e-15 && (n[1] - 1.0).abs() < 1e-15 && n[2].abs() < 1e-15);
    }

    #[test]
    fn parallel_facet_is_reported() {
        let b = AffineBasis::from_spanning(vec![0.0; 2], &[vec![1.0, 0.0]]).unwrap();
        assert!(subspace_normal(1, &b).is_err());
    }
}
