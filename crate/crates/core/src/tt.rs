//! Tensor-Train (MPS) vectors and Matrix-Product-Operator weight matrices.
//!
//! A [`TtVector`] stores an order-N tensor as N cores of shape
//! `(R_{n-1}, K_n, R_n)` with `R_0 = R_N = 1`. A [`TtMatrix`] stores the
//! `(prod J_n) x (prod I_n)` matrix whose entry at row `(j_1..j_N)` and
//! column `(i_1..i_N)` is the matrix product of the slices
//! `G_1(i_1, j_1) ... G_N(i_N, j_N)`; cores have shape
//! `(R_{n-1}, I_n, J_n, R_n)`.

use nalgebra::{DMatrix, SVD};
use thiserror::Error;

use crate::tensor::{contract, DenseTensor, TensorError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TtError {
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("invalid rank: {0}")]
    InvalidRank(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("empty train")]
    Empty,
    #[error("svd did not converge")]
    SvdFailed,
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, TtError>;

fn check_chain(cores: &[DenseTensor], order: usize) -> Result<Vec<usize>> {
    if cores.is_empty() {
        return Err(TtError::Empty);
    }
    let mut ranks = Vec::with_capacity(cores.len() + 1);
    for (n, core) in cores.iter().enumerate() {
        if core.order() != order {
            return Err(TtError::RankMismatch(format!(
                "core {} has order {}, expected {}",
                n + 1,
                core.order(),
                order
            )));
        }
        let dims = core.dims();
        if n == 0 {
            ranks.push(dims[0]);
        } else if *ranks.last().unwrap() != dims[0] {
            return Err(TtError::RankMismatch(format!(
                "core {} has leading rank {} but core {} has trailing rank {}",
                n + 1,
                dims[0],
                n,
                ranks.last().unwrap()
            )));
        }
        ranks.push(dims[order - 1]);
    }
    if ranks[0] != 1 || *ranks.last().unwrap() != 1 {
        return Err(TtError::RankMismatch(format!("boundary ranks must be 1, got {ranks:?}")));
    }
    Ok(ranks)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TtVector {
    cores: Vec<DenseTensor>,
    ranks: Vec<usize>,
}

impl TtVector {
    pub fn new(cores: Vec<DenseTensor>) -> Result<Self> {
        let ranks = check_chain(&cores, 3)?;
        Ok(TtVector { cores, ranks })
    }

    pub fn cores(&self) -> &[DenseTensor] {
        &self.cores
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.dims()[1]).collect()
    }

    pub fn param_count(&self) -> usize {
        self.cores.iter().map(DenseTensor::len).sum()
    }

    /// Single entry via the product of core slices `G_1(k_1) ... G_N(k_N)`.
    pub fn entry(&self, index: &[usize]) -> f64 {
        assert_eq!(index.len(), self.cores.len());
        // row vector of length R_n, starting from R_0 = 1
        let mut row = vec![1.0];
        for (core, &k) in self.cores.iter().zip(index) {
            let d = core.dims();
            let (r0, kk, r1) = (d[0], d[1], d[2]);
            let mut next = vec![0.0; r1];
            for (b, out) in next.iter_mut().enumerate() {
                for (a, &x) in row.iter().enumerate() {
                    *out += x * core.data()[a + r0 * (k + kk * b)];
                }
            }
            row = next;
        }
        row[0]
    }

    /// Full tensor via the contraction chain
    /// `G_1 x^1_2 G_2 x^1_3 G_3 ... x^1_3 G_N`.
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let mut acc = self.cores[0].clone();
        for core in &self.cores[1..] {
            acc = contract(&acc, acc.order(), core, 1)?;
        }
        Ok(acc.into_reshaped(self.dims())?)
    }
}

pub fn tt_reconstruct(v: &TtVector) -> Result<DenseTensor> {
    v.reconstruct()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TtMatrix {
    cores: Vec<DenseTensor>,
    ranks: Vec<usize>,
}

impl TtMatrix {
    pub fn new(cores: Vec<DenseTensor>) -> Result<Self> {
        let ranks = check_chain(&cores, 4)?;
        Ok(TtMatrix { cores, ranks })
    }

    pub fn zeros(in_dims: &[usize], out_dims: &[usize], ranks: &[usize]) -> Result<Self> {
        validate_layout(in_dims, out_dims, ranks)?;
        let cores = (0..in_dims.len())
            .map(|n| DenseTensor::zeros(vec![ranks[n], in_dims[n], out_dims[n], ranks[n + 1]]))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        TtMatrix::new(cores)
    }

    pub fn cores(&self) -> &[DenseTensor] {
        &self.cores
    }

    pub fn cores_mut(&mut self) -> &mut [DenseTensor] {
        &mut self.cores
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn num_modes(&self) -> usize {
        self.cores.len()
    }

    pub fn in_dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.dims()[1]).collect()
    }

    pub fn out_dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.dims()[2]).collect()
    }

    /// Number of input entries `P = prod I_n`.
    pub fn in_size(&self) -> usize {
        self.in_dims().iter().product()
    }

    /// Number of output entries `M = prod J_n`.
    pub fn out_size(&self) -> usize {
        self.out_dims().iter().product()
    }

    pub fn param_count(&self) -> usize {
        self.cores.iter().map(DenseTensor::len).sum()
    }

    /// Entry of the operator at multi-indices `(i_n, j_n)` via slice products.
    pub fn entry(&self, in_index: &[usize], out_index: &[usize]) -> f64 {
        let mut row = vec![1.0];
        for ((core, &i), &j) in self.cores.iter().zip(in_index).zip(out_index) {
            let d = core.dims();
            let (r0, ii, jj, r1) = (d[0], d[1], d[2], d[3]);
            let mut next = vec![0.0; r1];
            for (b, out) in next.iter_mut().enumerate() {
                for (a, &x) in row.iter().enumerate() {
                    *out += x * core.data()[a + r0 * (i + ii * (j + jj * b))];
                }
            }
            row = next;
        }
        row[0]
    }

    /// Order-2N tensor with modes `(I_1, J_1, I_2, J_2, ..., I_N, J_N)`.
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let mut acc = self.cores[0].clone();
        for core in &self.cores[1..] {
            acc = contract(&acc, acc.order(), core, 1)?;
        }
        let dims: Vec<usize> = self
            .cores
            .iter()
            .flat_map(|c| [c.dims()[1], c.dims()[2]])
            .collect();
        Ok(acc.into_reshaped(dims)?)
    }

    /// Dense `M x P` matrix: rows enumerate `(j_1..j_N)`, columns `(i_1..i_N)`,
    /// both in Little-Endian order.
    pub fn to_matrix(&self) -> Result<DenseTensor> {
        let n = self.cores.len();
        let full = self.reconstruct()?;
        let perm: Vec<usize> = (0..n).map(|k| 2 * k + 1).chain((0..n).map(|k| 2 * k)).collect();
        Ok(full.permute(&perm)?.into_reshaped(vec![self.out_size(), self.in_size()])?)
    }
}

pub fn mpo_reconstruct(w: &TtMatrix) -> Result<DenseTensor> {
    w.reconstruct()
}

fn validate_layout(in_dims: &[usize], out_dims: &[usize], ranks: &[usize]) -> Result<()> {
    if in_dims.is_empty() {
        return Err(TtError::Empty);
    }
    if in_dims.len() != out_dims.len() || ranks.len() != in_dims.len() + 1 {
        return Err(TtError::LengthMismatch(format!(
            "{} input modes, {} output modes, {} ranks",
            in_dims.len(),
            out_dims.len(),
            ranks.len()
        )));
    }
    if ranks[0] != 1 || ranks[ranks.len() - 1] != 1 {
        return Err(TtError::InvalidRank(format!("boundary ranks must be 1, got {ranks:?}")));
    }
    if ranks.iter().chain(in_dims).chain(out_dims).any(|&d| d == 0) {
        return Err(TtError::InvalidRank("zero-sized rank or mode".into()));
    }
    Ok(())
}

/// Parameter count of a TT-matrix: `sum_n I_n J_n R_{n-1} R_n`.
pub fn tt_param_count(in_dims: &[usize], out_dims: &[usize], ranks: &[usize]) -> Result<usize> {
    validate_layout(in_dims, out_dims, ranks)?;
    Ok((0..in_dims.len())
        .map(|n| in_dims[n] * out_dims[n] * ranks[n] * ranks[n + 1])
        .sum())
}

/// Truncation policy for [`tt_svd`].
#[derive(Clone, Debug, PartialEq)]
pub enum Truncation {
    /// Keep every non-degenerate singular direction.
    Full,
    /// Rank caps `(R_0, ..., R_N)` with `R_0 = R_N = 1`.
    MaxRanks(Vec<usize>),
    /// The same cap on every inner rank.
    MaxRank(usize),
    /// Relative Frobenius error budget, split as `eps / sqrt(N - 1)` per unfolding.
    Tolerance(f64),
}

#[derive(Clone, Debug)]
pub struct TtSvd {
    pub tt: TtVector,
    /// Squared norm of the singular values dropped at each of the `N - 1` splits.
    pub discarded_sq: Vec<f64>,
}

impl TtSvd {
    /// Exact Frobenius reconstruction error of the sequential construction.
    pub fn error(&self) -> f64 {
        self.discarded_sq.iter().sum::<f64>().sqrt()
    }
}

/// Sequential-SVD construction of a TT representation.
pub fn tt_svd(t: &DenseTensor, truncation: &Truncation) -> Result<TtVector> {
    tt_svd_detailed(t, truncation).map(|r| r.tt)
}

pub fn tt_svd_detailed(t: &DenseTensor, truncation: &Truncation) -> Result<TtSvd> {
    let dims = t.dims().to_vec();
    let order = dims.len();
    if order == 0 {
        return Err(TtError::Empty);
    }
    let caps: Option<&[usize]> = match truncation {
        Truncation::MaxRanks(r) => {
            if r.len() != order + 1 {
                return Err(TtError::InvalidRank(format!(
                    "expected {} ranks for an order-{} tensor, got {}",
                    order + 1,
                    order,
                    r.len()
                )));
            }
            if r[0] != 1 || r[order] != 1 || r.contains(&0) {
                return Err(TtError::InvalidRank(format!("{r:?}")));
            }
            Some(r)
        }
        Truncation::MaxRank(0) => return Err(TtError::InvalidRank("rank cap must be positive".into())),
        Truncation::Tolerance(eps) if !(*eps >= 0.0) => {
            return Err(TtError::InvalidRank(format!("tolerance {eps} must be non-negative")));
        }
        _ => None,
    };
    let delta = match truncation {
        Truncation::Tolerance(eps) if order > 1 => eps / ((order - 1) as f64).sqrt() * t.frobenius_norm(),
        _ => 0.0,
    };

    let mut cores = Vec::with_capacity(order);
    let mut discarded_sq = Vec::with_capacity(order.saturating_sub(1));
    let mut rank = 1;
    let mut rest: Vec<f64> = t.data().to_vec();
    let mut rest_cols = t.len();

    for n in 0..order - 1 {
        let rows = rank * dims[n];
        rest_cols /= dims[n];
        // LE buffer of (rank, K_n, remaining) is a column-major rows x cols matrix
        let c = DMatrix::from_column_slice(rows, rest_cols, &rest);
        let svd = SVD::try_new_unordered(c, true, true, f64::EPSILON, 0).ok_or(TtError::SvdFailed)?;
        let u = svd.u.as_ref().ok_or(TtError::SvdFailed)?;
        let v_t = svd.v_t.as_ref().ok_or(TtError::SvdFailed)?;
        let sigma = &svd.singular_values;

        let mut order_idx: Vec<usize> = (0..sigma.len()).collect();
        // stable: equal singular values keep their original column order
        order_idx.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
        let sorted: Vec<f64> = order_idx.iter().map(|&k| sigma[k]).collect();

        let mut keep = match (caps, truncation) {
            (Some(r), _) => r[n + 1].min(sorted.len()),
            (None, Truncation::MaxRank(r)) => (*r).min(sorted.len()),
            _ => sorted.len(),
        };
        if matches!(truncation, Truncation::Tolerance(_)) {
            // smallest rank whose tail norm stays within the per-split budget
            let mut tail = 0.0;
            let mut k = sorted.len();
            while k > 1 {
                let next = tail + sorted[k - 1] * sorted[k - 1];
                if next.sqrt() > delta {
                    break;
                }
                tail = next;
                k -= 1;
            }
            keep = k;
        }
        keep = keep.max(1);
        discarded_sq.push(sorted[keep..].iter().map(|s| s * s).sum());

        let mut core = Vec::with_capacity(rows * keep);
        for &k in &order_idx[..keep] {
            core.extend(u.column(k).iter());
        }
        cores.push(DenseTensor::new(vec![rank, dims[n], keep], core)?);

        // S V^T restricted to kept directions, column-major keep x rest_cols
        let mut next = vec![0.0; keep * rest_cols];
        for col in 0..rest_cols {
            for (r, &k) in order_idx[..keep].iter().enumerate() {
                next[r + keep * col] = sigma[k] * v_t[(k, col)];
            }
        }
        rest = next;
        rank = keep;
    }
    cores.push(DenseTensor::new(vec![rank, dims[order - 1], 1], rest)?);
    Ok(TtSvd {
        tt: TtVector::new(cores)?,
        discarded_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random(dims: &[usize], rng: &mut impl Rng) -> DenseTensor {
        let n = dims.iter().product();
        DenseTensor::new(dims.to_vec(), (0..n).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
    }

    fn random_tt(dims: &[usize], ranks: &[usize], rng: &mut impl Rng) -> TtVector {
        let cores = (0..dims.len())
            .map(|n| random(&[ranks[n], dims[n], ranks[n + 1]], rng))
            .collect();
        TtVector::new(cores).unwrap()
    }

    #[test]
    fn single_core_is_the_vector() {
        let core = DenseTensor::new(vec![1, 4, 1], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let v = TtVector::new(vec![core]).unwrap();
        let full = v.reconstruct().unwrap();
        assert_eq!(full.dims(), &[4]);
        assert_eq!(full.data(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn rank_one_is_outer_product() {
        let a = [1.0, 2.0];
        let b = [3.0, -1.0, 0.5];
        let c = [2.0, 4.0];
        let v = TtVector::new(vec![
            DenseTensor::new(vec![1, 2, 1], a.to_vec()).unwrap(),
            DenseTensor::new(vec![1, 3, 1], b.to_vec()).unwrap(),
            DenseTensor::new(vec![1, 2, 1], c.to_vec()).unwrap(),
        ])
        .unwrap();
        let full = v.reconstruct().unwrap();
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..2 {
                    assert_eq!(full.get(&[i, j, k]), a[i] * b[j] * c[k]);
                }
            }
        }
    }

    #[test]
    fn slice_product_agrees_with_contraction_chain() {
        let mut rng = crate::rng::stream(1, "test");
        let v = random_tt(&[3, 2, 4, 2], &[1, 2, 3, 2, 1], &mut rng);
        let full = v.reconstruct().unwrap();
        for k in 0..full.len() {
            let ix = full.shape().unravel(k);
            assert!((full.data()[k] - v.entry(&ix)).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_mismatch_detected() {
        let a = DenseTensor::zeros(vec![1, 2, 2]).unwrap();
        let b = DenseTensor::zeros(vec![3, 2, 1]).unwrap();
        assert!(matches!(TtVector::new(vec![a, b]), Err(TtError::RankMismatch(_))));
        let c = DenseTensor::zeros(vec![2, 2, 1]).unwrap();
        assert!(matches!(TtVector::new(vec![c]), Err(TtError::RankMismatch(_))));
    }

    #[test]
    fn single_mode_mpo_is_transposed_slice() {
        let core = DenseTensor::from_fn(vec![1, 2, 3, 1], |ix| (ix[1] * 10 + ix[2]) as f64).unwrap();
        let w = TtMatrix::new(vec![core.clone()]).unwrap();
        assert_eq!(w.reconstruct().unwrap().dims(), &[2, 3]);
        let m = w.to_matrix().unwrap();
        assert_eq!(m.dims(), &[3, 2]);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(m.get(&[j, i]), core.get(&[0, i, j, 0]));
            }
        }
    }

    #[test]
    fn identity_cores_give_identity_matrix() {
        let eye = |n: usize| DenseTensor::from_fn(vec![1, n, n, 1], |ix| (ix[1] == ix[2]) as u8 as f64).unwrap();
        let w = TtMatrix::new(vec![eye(2), eye(3), eye(2)]).unwrap();
        let m = w.to_matrix().unwrap();
        assert_eq!(m, DenseTensor::identity(12).unwrap());
    }

    #[test]
    fn mpo_matrix_matches_brute_force_multi_index() {
        let mut rng = crate::rng::stream(2, "test");
        let ranks = [1, 2, 2, 1];
        let cores = (0..3).map(|n| random(&[ranks[n], 2, 2, ranks[n + 1]], &mut rng)).collect();
        let w = TtMatrix::new(cores).unwrap();
        let m = w.to_matrix().unwrap();
        let le = |ix: &[usize]| ix[0] + 2 * ix[1] + 4 * ix[2];
        let mut checked = 0;
        for p in 0..8 {
            for q in 0..8 {
                let i = [p % 2, (p / 2) % 2, p / 4];
                let j = [q % 2, (q / 2) % 2, q / 4];
                // explicit slice products, independent of TtMatrix::entry
                let mut s = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        s += w.cores()[0].get(&[0, i[0], j[0], a])
                            * w.cores()[1].get(&[a, i[1], j[1], b])
                            * w.cores()[2].get(&[b, i[2], j[2], 0]);
                    }
                }
                assert!((m.get(&[le(&j), le(&i)]) - s).abs() < 1e-12);
                assert!((w.entry(&i, &j) - s).abs() < 1e-12);
                checked += 1;
            }
        }
        assert_eq!(checked, 64);
    }

    #[test]
    fn param_counts() {
        let full = tt_param_count(&[2, 2, 5, 6, 4], &[4, 4, 4, 4, 4], &[1, 6, 6, 6, 6, 1]).unwrap();
        assert_eq!(full, 48 + 288 + 720 + 864 + 96);
        assert_eq!(full, 2016);
        assert_eq!(480 * 1024, 491_520);
        assert_eq!(tt_param_count(&[2, 2], &[2, 2], &[1, 1, 1]).unwrap(), 8);
        assert_eq!(tt_param_count(&[7], &[3], &[1, 1]).unwrap(), 21);
        assert!(matches!(
            tt_param_count(&[2, 2], &[2], &[1, 1, 1]),
            Err(TtError::LengthMismatch(_))
        ));
        let w = TtMatrix::zeros(&[2, 2, 5], &[3, 1, 2], &[1, 4, 2, 1]).unwrap();
        assert_eq!(w.param_count(), tt_param_count(&[2, 2, 5], &[3, 1, 2], &[1, 4, 2, 1]).unwrap());
    }

    #[test]
    fn rank_one_tensor_decomposes_exactly() {
        let a = [1.0, -2.0, 0.5];
        let b = [2.0, 1.0];
        let c = [0.3, 0.7, -1.1, 2.0];
        let t = DenseTensor::from_fn(vec![3, 2, 4], |ix| a[ix[0]] * b[ix[1]] * c[ix[2]]).unwrap();
        let res = tt_svd_detailed(&t, &Truncation::Tolerance(1e-12)).unwrap();
        assert_eq!(res.tt.ranks(), &[1, 1, 1, 1]);
        let back = res.tt.reconstruct().unwrap();
        assert!(back.sub(&t).unwrap().frobenius_norm() < 1e-12 * t.frobenius_norm());
    }

    #[test]
    fn full_rank_round_trip() {
        let mut rng = crate::rng::stream(3, "test");
        let t = random(&[4, 4, 4], &mut rng);
        let tt = tt_svd(&t, &Truncation::Full).unwrap();
        assert_eq!(tt.ranks(), &[1, 4, 4, 1]);
        let err = tt.reconstruct().unwrap().sub(&t).unwrap().frobenius_norm() / t.frobenius_norm();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn uniform_cap_equals_explicit_caps() {
        let mut rng = crate::rng::stream(4, "test");
        let t = random(&[3, 4, 4, 3], &mut rng);
        let a = tt_svd(&t, &Truncation::MaxRank(2)).unwrap();
        let b = tt_svd(&t, &Truncation::MaxRanks(vec![1, 2, 2, 2, 1])).unwrap();
        assert_eq!(a, b);
        assert!(tt_svd(&t, &Truncation::MaxRank(0)).is_err());
    }

    #[test]
    fn invalid_ranks_rejected() {
        let t = DenseTensor::zeros(vec![2, 2]).unwrap();
        assert!(matches!(
            tt_svd(&t, &Truncation::MaxRanks(vec![1, 1])),
            Err(TtError::InvalidRank(_))
        ));
        assert!(matches!(
            tt_svd(&t, &Truncation::MaxRanks(vec![1, 0, 1])),
            Err(TtError::InvalidRank(_))
        ));
        assert!(matches!(
            tt_svd(&t, &Truncation::MaxRanks(vec![2, 1, 1])),
            Err(TtError::InvalidRank(_))
        ));
    }
}
