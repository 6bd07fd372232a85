//! Surrogate models: discrete hypothesis posteriors, exact Gaussian
//! processes, and pairwise-probit preference models.

pub mod discrete;
pub mod gp;
pub mod pref;

/// Per-dimension affine standardization (running mean/std of observed data).
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Identity transform for `dim` dimensions.
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    /// Fits mean and standard deviation per dimension. Degenerate dimensions
    /// (fewer than two points, or zero spread) fall back to unit scale.
    pub fn fit(data: &[Vec<f64>]) -> Self {
        let dim = data.first().map_or(0, |r| r.len());
        let n = data.len();
        if n < 2 {
            let mean = data
                .first()
                .cloned()
                .unwrap_or_else(|| vec![0.0; dim]);
            return Self {
                mean,
                std: vec![1.0; dim],
            };
        }
        let mut mean = vec![0.0; dim];
        for row in data {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut var = vec![0.0; dim];
        for row in data {
            for d in 0..dim {
                let diff = row[d] - mean[d];
                var[d] += diff * diff;
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n as f64).sqrt();
                if s > 1e-12 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn transform(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn inverse(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardizer_roundtrip() {
        let data = vec![vec![1.0, 10.0], vec![3.0, 30.0], vec![5.0, 20.0]];
        let s = Standardizer::fit(&data);
        let z = s.transform(&data[1]);
        let back = s.inverse(&z);
        assert!((back[0] - 3.0).abs() < 1e-12);
        assert!((back[1] - 30.0).abs() < 1e-12);
        // Standardized data has mean ~0.
        let zs: Vec<Vec<f64>> = data.iter().map(|r| s.transform(r)).collect();
        let m0: f64 = zs.iter().map(|r| r[0]).sum::<f64>() / 3.0;
        assert!(m0.abs() < 1e-12);
    }

    #[test]
    fn standardizer_degenerate_cases() {
        let s = Standardizer::fit(&[vec![2.0, 2.0]]);
        assert_eq!(s.std, vec![1.0, 1.0]);
        let s = Standardizer::fit(&[vec![5.0], vec![5.0]]);
        assert_eq!(s.std, vec![1.0]);
        assert_eq!(s.transform(&[5.0]), vec![0.0]);
    }
}
