//! Synthetic data following the sparse model `Y = D*·X*`.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded with a 64-bit value, so a
//! given `(params, seed)` produces the same bits on every platform.
//! Independent streams for one experiment are obtained with [`derive_seed`].

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dims, HrpError, Result};
use crate::manifold::OrthoDict;
use crate::metrics::ObservationMask;

/// Parameters of a Bernoulli-Gaussian code matrix 𝒢ℬ(θ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgParams {
    pub n: usize,
    pub l: usize,
    pub theta: f64,
    pub seed: u64,
}

impl BgParams {
    pub fn new(n: usize, l: usize, theta: f64, seed: u64) -> Result<Self> {
        let p = Self { n, l, theta, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.l == 0 {
            return Err(HrpError::InvalidInput(format!(
                "dimensions must be positive, got n = {}, l = {}",
                self.n, self.l
            )));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(HrpError::InvalidInput(format!(
                "theta must lie in [0, 1], got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// N×L code matrix, one code per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCodeMatrix(pub DMatrix<f64>);

impl SparseCodeMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(HrpError::InvalidInput(
                "code matrix has non-finite entries".into(),
            ));
        }
        Ok(Self(data))
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn nnz(&self) -> usize {
        self.0.iter().filter(|v| **v != 0.0).count()
    }
}

/// N×L sample matrix, one sample per column, with an optional observation
/// mask (`true` = observed; `None` means everything is observed).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    data: DMatrix<f64>,
    mask: Option<ObservationMask>,
}

impl DataMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(HrpError::InvalidInput(
                "data matrix has non-finite entries".into(),
            ));
        }
        Ok(Self { data, mask: None })
    }

    /// Values at unobserved positions are not checked.
    pub fn with_mask(data: DMatrix<f64>, mask: ObservationMask) -> Result<Self> {
        check_dims("mask", data.shape(), mask.as_matrix().shape())?;
        let bad = data
            .iter()
            .zip(mask.as_matrix().iter())
            .any(|(v, &seen)| seen && !v.is_finite());
        if bad {
            return Err(HrpError::InvalidInput(
                "data matrix has non-finite observed entries".into(),
            ));
        }
        Ok(Self {
            data,
            mask: Some(mask),
        })
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.data
    }

    pub fn mask(&self) -> Option<&ObservationMask> {
        self.mask.as_ref()
    }

    /// The mask, materializing an all-true mask when none is stored.
    pub fn observed(&self) -> ObservationMask {
        self.mask
            .clone()
            .unwrap_or_else(|| ObservationMask::all_observed(self.nrows(), self.ncols()))
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }
}

/// SplitMix64 finalizer applied to `seed + stream`; gives decorrelated
/// seeds for the independent random streams of one run.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entrywise `b·g` with `b ~ Ber(θ)` and `g ~ N(0, 1)`.
///
/// Entries are drawn in column-major order, one uniform and one normal
/// variate per entry regardless of θ.
pub fn gen_bernoulli_gaussian(p: &BgParams) -> Result<SparseCodeMatrix> {
    p.validate()?;
    let mut rng = rng_from_seed(p.seed);
    let mut x = DMatrix::zeros(p.n, p.l);
    for j in 0..p.l {
        for i in 0..p.n {
            let keep = rng.random::<f64>() < p.theta;
            let g: f64 = StandardNormal.sample(&mut rng);
            if keep {
                x[(i, j)] = g;
            }
        }
    }
    Ok(SparseCodeMatrix(x))
}

/// i.i.d. standard normal n×m matrix.
pub fn gaussian_matrix(n: usize, m: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |_, _| StandardNormal.sample(rng))
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of diag(R) absorbed into the columns of Q.
pub fn gen_random_orthogonal(n: usize, seed: u64) -> Result<OrthoDict> {
    if n == 0 {
        return Err(HrpError::InvalidInput(
            "dimension must be at least 1".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    random_orthogonal_with(n, &mut rng)
}

pub(crate) fn random_orthogonal_with(n: usize, rng: &mut impl Rng) -> Result<OrthoDict> {
    let g = gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    OrthoDict::new(q)
}

/// `Y = D·X`, fully observed.
pub fn gen_observations(d: &OrthoDict, x: &SparseCodeMatrix) -> Result<DataMatrix> {
    check_dims("codes", (d.n(), x.0.ncols()), x.0.shape())?;
    DataMatrix::new(d.as_matrix() * &x.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_extremes() {
        let zero = gen_bernoulli_gaussian(&BgParams::new(5, 40, 0.0, 1).unwrap()).unwrap();
        assert_eq!(zero.nnz(), 0);
        let full = gen_bernoulli_gaussian(&BgParams::new(5, 40, 1.0, 1).unwrap()).unwrap();
        assert_eq!(full.nnz(), 200);
    }

    #[test]
    fn nonzero_fraction_within_six_sigma() {
        let x = gen_bernoulli_gaussian(&BgParams::new(20, 5000, 0.2, 42).unwrap()).unwrap();
        let frac = x.nnz() as f64 / 100_000.0;
        assert!((0.186..=0.214).contains(&frac), "fraction {frac}");
    }

    #[test]
    fn bg_params_validation() {
        assert!(BgParams::new(0, 3, 0.1, 0).is_err());
        assert!(BgParams::new(3, 0, 0.1, 0).is_err());
        assert!(BgParams::new(3, 3, 1.5, 0).is_err());
        assert!(BgParams::new(3, 3, -0.1, 0).is_err());
    }

    #[test]
    fn random_orthogonal_contract() {
        for n in 2..=32 {
            for seed in 0..100u64 {
                if n > 8 && seed % 10 != 0 {
                    continue;
                }
                let q = gen_random_orthogonal(n, seed).unwrap();
                assert!(q.residual() <= 1e-10);
            }
        }
        let a = gen_random_orthogonal(7, 99).unwrap();
        let b = gen_random_orthogonal(7, 99).unwrap();
        assert_eq!(a.as_matrix(), b.as_matrix());
    }

    #[test]
    fn one_dimensional_orthogonal_is_a_sign() {
        let mut seen = [false, false];
        for seed in 0..64 {
            let v = gen_random_orthogonal(1, seed).unwrap().as_matrix()[(0, 0)];
            assert!(v == 1.0 || v == -1.0);
            seen[(v > 0.0) as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn haar_first_entry_has_zero_mean() {
        let mean: f64 = (0..2000u64)
            .map(|s| gen_random_orthogonal(2, s).unwrap().as_matrix()[(0, 0)])
            .sum::<f64>()
            / 2000.0;
        assert!(mean.abs() <= 0.05, "mean {mean}");
    }

    #[test]
    fn observations_cases() {
        let x = gen_bernoulli_gaussian(&BgParams::new(6, 30, 0.3, 5).unwrap()).unwrap();
        let y = gen_observations(&OrthoDict::identity(6), &x).unwrap();
        assert_eq!(y.as_matrix(), x.as_matrix());
        assert!(y.mask().is_none());

        let d = gen_random_orthogonal(6, 8).unwrap();
        let zero = SparseCodeMatrix(DMatrix::zeros(6, 4));
        assert!(gen_observations(&d, &zero).unwrap().is_zero());

        let y = gen_observations(&d, &x).unwrap();
        assert!((y.as_matrix().norm() - x.as_matrix().norm()).abs() < 1e-10);
        for j in 0..30 {
            let (a, b) = (
                y.as_matrix().column(j).norm(),
                x.as_matrix().column(j).norm(),
            );
            assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
        let bad = SparseCodeMatrix(DMatrix::zeros(5, 4));
        assert!(gen_observations(&d, &bad).is_err());
    }

    #[test]
    fn derived_seeds_differ_per_stream() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(0, 1), derive_seed(1, 0));
        assert_eq!(derive_seed(3, 4), derive_seed(3, 4));
    }
}
