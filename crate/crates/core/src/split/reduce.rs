use alloc::vec;
use alloc::vec::Vec;

use super::rng;
use super::SplitError;

/// Component-wise mean of equally sized vectors.
pub fn mean_embedding(vectors: &[Vec<f32>]) -> Result<Vec<f32>, SplitError> {
    let first = vectors.first().ok_or(SplitError::EmptyInput)?;
    let dim = first.len();
    let mut sum = vec![0f64; dim];
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(SplitError::DimensionMismatch { index, expected: dim, found: v.len() });
        }
        for (s, x) in sum.iter_mut().zip(v) {
            *s += *x as f64;
        }
    }
    let n = vectors.len() as f64;
    Ok(sum.into_iter().map(|s| (s / n) as f32).collect())
}

/// Gaussian random projection to `target_dim` dimensions, seeded.
///
/// Vectors already at or below `target_dim` are returned unchanged. With
/// fewer vectors than `target_dim` the result is
/// [`SplitError::DegenerateInput`] carrying the truncated vectors.
pub fn random_projection(
    vectors: &[Vec<f32>],
    target_dim: usize,
    seed: u64,
) -> Result<Vec<Vec<f32>>, SplitError> {
    let Some(first) = vectors.first() else { return Ok(Vec::new()) };
    let dim = first.len();
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(SplitError::DimensionMismatch { index, expected: dim, found: v.len() });
        }
    }
    if dim <= target_dim {
        return Ok(vectors.to_vec());
    }
    if vectors.len() < target_dim {
        let fallback = vectors.iter().map(|v| v[..target_dim].to_vec()).collect();
        return Err(SplitError::DegenerateInput { vectors: vectors.len(), target_dim, fallback });
    }
    let mut r = rng::seeded(seed);
    let scale = 1.0 / libm::sqrt(target_dim as f64);
    // Row-major dim x target_dim.
    let matrix: Vec<f64> = (0..dim * target_dim).map(|_| rng::normal(&mut r) * scale).collect();
    Ok(vectors
        .iter()
        .map(|v| {
            let mut out = vec![0f64; target_dim];
            for (i, x) in v.iter().enumerate() {
                let row = &matrix[i * target_dim..(i + 1) * target_dim];
                for (o, m) in out.iter_mut().zip(row) {
                    *o += *x as f64 * m;
                }
            }
            out.into_iter().map(|x| x as f32).collect()
        })
        .collect())
}
