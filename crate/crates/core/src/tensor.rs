//! Nonnegative Kruskal tensor approximation by cyclic rank-one residue
//! updates.
//!
//! A d-way nonnegative tensor `T` is approximated by
//! `S = sum_i sigma_i u_{1i} * u_{2i} * ... * u_{di}` with unit nonnegative
//! factors and nonnegative scales. For each term and mode, the residue
//! `R_k = T - sum_{i != k} ...` is contracted with the term's other factors,
//! and the positive part of that vector is the optimal scaled factor. As in
//! the matrix case the residue is never materialized: the contraction of `T`
//! is corrected by Gram products of the factors, keeping a sweep at
//! `O(r * prod(n_t))`.

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, DenseMatrix, DenseVector};
use crate::rng::Lcg64;

/// Dense d-way tensor, generalized column-major: the first index varies
/// fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(dims: &[usize]) -> Self {
        let len = dims.iter().product();
        DenseTensor {
            dims: dims.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn from_vec(dims: &[usize], data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.iter().product::<usize>() {
            return Err(Error::InvalidArg {
                msg: "tensor data length does not match its extents".into(),
            });
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite { what: "tensor data" });
        }
        Ok(DenseTensor {
            dims: dims.to_vec(),
            data,
        })
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn norm_fro_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&x| x >= 0.0)
    }

    fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut lin = 0;
        let mut stride = 1;
        for (i, &d) in idx.iter().zip(&self.dims) {
            debug_assert!(*i < d);
            lin += i * stride;
            stride *= d;
        }
        lin
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.linear_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let lin = self.linear_index(idx);
        self.data[lin] = v;
    }

    /// A matrix viewed as a 2-way tensor (same column-major layout).
    pub fn from_matrix(m: &DenseMatrix) -> Self {
        DenseTensor {
            dims: vec![m.rows(), m.cols()],
            data: m.data().to_vec(),
        }
    }

    /// Contract one mode with a vector, dropping that mode.
    fn contract_mode(&self, mode: usize, v: &[f64]) -> DenseTensor {
        debug_assert_eq!(v.len(), self.dims[mode]);
        let stride: usize = self.dims[..mode].iter().product();
        let extent = self.dims[mode];
        let block = stride * extent;
        let outer = self.data.len() / block;
        let mut out_dims = self.dims.clone();
        out_dims.remove(mode);
        let mut out = vec![0.0; stride * outer];
        for o in 0..outer {
            let src = &self.data[o * block..(o + 1) * block];
            let dst = &mut out[o * stride..(o + 1) * stride];
            for (j, &vj) in v.iter().enumerate() {
                if vj == 0.0 {
                    continue;
                }
                let slice = &src[j * stride..(j + 1) * stride];
                for (d, &s) in dst.iter_mut().zip(slice) {
                    *d += vj * s;
                }
            }
        }
        DenseTensor {
            dims: out_dims,
            data: out,
        }
    }
}

/// Contract every mode except `keep_mode` with the given vectors, in
/// increasing mode order; `factors[s]` pairs with mode `s` and the entry at
/// `keep_mode` is ignored. Leaves a vector of length `dims[keep_mode]`.
pub fn contract_except(t: &DenseTensor, factors: &[&[f64]], keep_mode: usize) -> Result<DenseVector> {
    if factors.len() != t.order() || keep_mode >= t.order() {
        return Err(Error::InvalidArg {
            msg: "one factor per mode is required".into(),
        });
    }
    for (s, f) in factors.iter().enumerate() {
        if s != keep_mode && f.len() != t.dims[s] {
            return Err(Error::ShapeMismatch {
                op: "contract_except",
                lhs: (t.dims[s], 1),
                rhs: (f.len(), 1),
            });
        }
    }
    let mut cur = t.clone();
    let mut removed = 0;
    for s in 0..t.order() {
        if s == keep_mode {
            continue;
        }
        cur = cur.contract_mode(s - removed, factors[s]);
        removed += 1;
    }
    Ok(DenseVector(cur.data))
}

/// Rank-r Kruskal tensor: scales plus one factor matrix per mode, columns
/// indexed by term. Every factor column with a positive scale has unit norm.
#[derive(Debug, Clone)]
pub struct KruskalTensor {
    pub scales: DenseVector,
    pub factors: Vec<DenseMatrix>,
}

impl KruskalTensor {
    pub fn rank(&self) -> usize {
        self.scales.len()
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    /// Random unit nonnegative factor columns; scales start at zero and are
    /// fitted by the first sweep.
    pub fn init_random(dims: &[usize], r: usize, seed: u64) -> Self {
        let mut rng = Lcg64::new(seed);
        let factors = dims
            .iter()
            .map(|&n| {
                let mut f = DenseMatrix::zeros(n, r);
                for i in 0..r {
                    let mut col: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
                    let nrm = norm2(&col);
                    col.iter_mut().for_each(|x| *x /= nrm);
                    f.set_col(i, &col);
                }
                f
            })
            .collect();
        KruskalTensor {
            scales: DenseVector::zeros(r),
            factors,
        }
    }

    /// Materialize `sum_i sigma_i u_{1i} * ... * u_{di}`.
    pub fn to_dense(&self, dims: &[usize]) -> DenseTensor {
        let mut out = DenseTensor::zeros(dims);
        let total = out.data.len();
        for term in 0..self.rank() {
            let s = self.scales[term];
            if s == 0.0 {
                continue;
            }
            for lin in 0..total {
                let mut rest = lin;
                let mut prod = s;
                for (mode, &d) in dims.iter().enumerate() {
                    let idx = rest % d;
                    rest /= d;
                    prod *= self.factors[mode][(idx, term)];
                }
                out.data[lin] += prod;
            }
        }
        out
    }

    /// `||T - S||_F^2` without materializing S twice.
    pub fn residual_sq(&self, t: &DenseTensor) -> f64 {
        let s = self.to_dense(&t.dims);
        t.data
            .iter()
            .zip(&s.data)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum()
    }
}

/// The contraction of the residue `R_k` for term `k` leaving `mode`, using
/// Gram corrections instead of materializing the residue:
/// `contract(T) - sum_{i != k} sigma_i prod_{s != mode}(u_{si}^T u_{sk}) u_{mode,i}`.
fn residue_contraction(t: &DenseTensor, s: &KruskalTensor, k: usize, mode: usize) -> DenseVector {
    let refs: Vec<&[f64]> = (0..s.order()).map(|m| s.factors[m].col(k)).collect();
    let mut y = contract_except(t, &refs, mode).expect("shapes fixed by construction");
    for i in 0..s.rank() {
        if i == k || s.scales[i] == 0.0 {
            continue;
        }
        let mut c = s.scales[i];
        for m in 0..s.order() {
            if m == mode {
                continue;
            }
            c *= dot(s.factors[m].col(i), s.factors[m].col(k));
        }
        if c == 0.0 {
            continue;
        }
        for (yj, &uj) in y.iter_mut().zip(s.factors[mode].col(i)) {
            *yj -= c * uj;
        }
    }
    y
}

/// One sweep: for each term `k`, cycle the modes in order; each step sets
/// `sigma_k = ||[y]_+||` and `u_{mode,k} = [y]_+ / sigma_k`, leaving the
/// factor untouched when the positive part vanishes.
pub fn tensor_rri_sweep(t: &DenseTensor, s: &KruskalTensor) -> KruskalTensor {
    let mut out = s.clone();
    for k in 0..out.rank() {
        for mode in 0..out.order() {
            update_term_mode(t, &mut out, k, mode);
        }
    }
    out
}

fn update_term_mode(t: &DenseTensor, s: &mut KruskalTensor, k: usize, mode: usize) {
    let y = residue_contraction(t, s, k, mode);
    let yp = y.project_nonneg();
    let sigma = yp.norm2();
    if sigma == 0.0 {
        s.scales[k] = 0.0;
        return;
    }
    s.scales[k] = sigma;
    let unit: Vec<f64> = yp.iter().map(|&x| x / sigma).collect();
    s.factors[mode].set_col(k, &unit);
}

/// Revive a dead term by seeding its mode-1 factor with the basis vector
/// whose residue contraction keeps the most positive energy, then refitting
/// the remaining modes. No-op when no basis vector helps.
fn substitute_zero_term(t: &DenseTensor, s: &mut KruskalTensor, k: usize) -> bool {
    let n0 = t.dims[0];
    let mut best: Option<(usize, f64)> = None;
    for i in 0..n0 {
        let mut probe = s.clone();
        let mut e = vec![0.0; n0];
        e[i] = 1.0;
        probe.factors[0].set_col(k, &e);
        probe.scales[k] = 0.0;
        let y = residue_contraction(t, &probe, k, 1);
        let gain = y.project_nonneg().norm2_sq();
        if gain > best.map_or(0.0, |(_, g)| g) {
            best = Some((i, gain));
        }
    }
    let Some((i_star, _)) = best else {
        return false;
    };
    let mut e = vec![0.0; n0];
    e[i_star] = 1.0;
    s.factors[0].set_col(k, &e);
    s.scales[k] = 0.0;
    for mode in 1..s.order() {
        update_term_mode(t, s, k, mode);
    }
    s.scales[k] > 0.0
}

/// Report of a tensor factorization run: final Kruskal tensor and the
/// residual-norm-squared trace (entry 0 = initial point).
#[derive(Debug, Clone)]
pub struct TensorReport {
    pub kruskal: KruskalTensor,
    pub trace: Vec<f64>,
    pub substitutions_used: usize,
}

/// Run cyclic rank-one residue sweeps with dead-term substitution under a
/// budget of `r`, stopping on `max_sweeps` or a vanishing relative decrease.
pub fn run_tensor_rri(
    t: &DenseTensor,
    r: usize,
    max_sweeps: usize,
    seed: u64,
) -> Result<TensorReport> {
    if !t.is_nonnegative() {
        return Err(Error::NegativeInput {
            what: "input tensor",
        });
    }
    if r < 1 {
        return Err(Error::RankOutOfRange { rank: r, max: 0 });
    }
    let mut s = KruskalTensor::init_random(t.dims(), r, seed);
    let mut trace = vec![s.residual_sq(t)];
    let mut substitutions_used = 0usize;
    for _ in 0..max_sweeps {
        s = tensor_rri_sweep(t, &s);
        for k in 0..r {
            if substitutions_used < r && s.scales[k] == 0.0 && substitute_zero_term(t, &mut s, k) {
                substitutions_used += 1;
            }
        }
        let res = s.residual_sq(t);
        let prev = *trace.last().unwrap();
        trace.push(res);
        if prev - res < 1e-15 * prev.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(TensorReport {
        kruskal: s,
        trace,
        substitutions_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank_one_tensor(a: &[f64], b: &[f64], c: &[f64], sigma: f64) -> DenseTensor {
        let dims = [a.len(), b.len(), c.len()];
        let mut t = DenseTensor::zeros(&dims);
        for k in 0..c.len() {
            for j in 0..b.len() {
                for i in 0..a.len() {
                    t.set(&[i, j, k], sigma * a[i] * b[j] * c[k]);
                }
            }
        }
        t
    }

    #[test]
    fn matrix_case_contractions() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let t = DenseTensor::from_matrix(&m);
        let v = [1.0, -1.0];
        let u = [1.0, 0.0, 2.0];
        // keep mode 0: T contracted with v over columns = M v.
        let y = contract_except(&t, &[&[], &v], 0).unwrap();
        let mv = m.matvec(&v);
        assert_eq!(y.as_slice(), mv.as_slice());
        // keep mode 1: M^T u.
        let y = contract_except(&t, &[&u, &[]], 1).unwrap();
        let mtu = m.matvec_t(&u);
        assert_eq!(y.as_slice(), mtu.as_slice());
    }

    #[test]
    fn rank_one_identity_contraction() {
        let a = [0.6, 0.8];
        let b = [1.0 / 2.0f64.sqrt(); 2];
        let c = [0.5, 0.5, 0.5, 0.5];
        let t = rank_one_tensor(&a, &b, &c, 1.0);
        // contracting modes 0 and 1 with unit a and b leaves exactly c.
        let y = contract_except(&t, &[&a, &b, &[]], 2).unwrap();
        for (got, want) in y.iter().zip(&c) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn contraction_matches_triple_loop_oracle() {
        let mut rng = Lcg64::new(81);
        let dims = [2usize, 2, 2];
        let data: Vec<f64> = (0..8).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
        let t = DenseTensor::from_vec(&dims, data).unwrap();
        let u: Vec<f64> = (0..2).map(|_| rng.next_f64()).collect();
        let w: Vec<f64> = (0..2).map(|_| rng.next_f64()).collect();
        let y = contract_except(&t, &[&u, &[], &w], 1).unwrap();
        for j in 0..2 {
            let mut want = 0.0;
            for i in 0..2 {
                for k in 0..2 {
                    want += t.get(&[i, j, k]) * u[i] * w[k];
                }
            }
            assert!((y[j] - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn kruskal_to_dense_cases() {
        let dims = [3usize, 2, 2];
        let zero = KruskalTensor {
            scales: DenseVector::zeros(2),
            factors: vec![
                DenseMatrix::zeros(3, 2),
                DenseMatrix::zeros(2, 2),
                DenseMatrix::zeros(2, 2),
            ],
        };
        assert_eq!(zero.to_dense(&dims), DenseTensor::zeros(&dims));

        // Unit basis factors give a single-entry indicator tensor.
        let mut f0 = DenseMatrix::zeros(3, 1);
        f0[(1, 0)] = 1.0;
        let mut f1 = DenseMatrix::zeros(2, 1);
        f1[(0, 0)] = 1.0;
        let mut f2 = DenseMatrix::zeros(2, 1);
        f2[(1, 0)] = 1.0;
        let spike = KruskalTensor {
            scales: DenseVector::from_slice(&[1.0]),
            factors: vec![f0, f1, f2],
        };
        let dense = spike.to_dense(&dims);
        for i in 0..3 {
            for j in 0..2 {
                for k in 0..2 {
                    let want = if (i, j, k) == (1, 0, 1) { 1.0 } else { 0.0 };
                    assert_eq!(dense.get(&[i, j, k]), want);
                }
            }
        }
    }

    #[test]
    fn kruskal_to_dense_matches_entrywise_formula() {
        let mut rng = Lcg64::new(82);
        let dims = [3usize, 2, 2];
        let s = KruskalTensor::init_random(&dims, 2, rng.next_u64());
        let mut s = s;
        s.scales = DenseVector::from_slice(&[0.7, 1.3]);
        let dense = s.to_dense(&dims);
        for i in 0..3 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut want = 0.0;
                    for term in 0..2 {
                        want += s.scales[term]
                            * s.factors[0][(i, term)]
                            * s.factors[1][(j, term)]
                            * s.factors[2][(k, term)];
                    }
                    assert!((dense.get(&[i, j, k]) - want).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn exact_rank_one_recovered_within_five_sweeps() {
        let mut rng = Lcg64::new(83);
        for trial in 0..20 {
            let a: Vec<f64> = (0..5).map(|_| rng.next_f64() + 0.05).collect();
            let b: Vec<f64> = (0..4).map(|_| rng.next_f64() + 0.05).collect();
            let c: Vec<f64> = (0..3).map(|_| rng.next_f64() + 0.05).collect();
            let t = rank_one_tensor(&a, &b, &c, 2.0);
            let rep = run_tensor_rri(&t, 1, 5, rng.next_u64()).unwrap();
            let res = rep.kruskal.residual_sq(&t).sqrt();
            assert!(res <= 1e-10, "trial {trial}: residual {res}");
        }
    }

    #[test]
    fn residual_trace_nonincreasing() {
        let mut rng = Lcg64::new(84);
        for _ in 0..10 {
            let dims = [4usize, 4, 4];
            let data: Vec<f64> = (0..64).map(|_| rng.next_f64()).collect();
            let t = DenseTensor::from_vec(&dims, data).unwrap();
            let rep = run_tensor_rri(&t, 3, 40, rng.next_u64()).unwrap();
            let slack = 1e-12 * t.norm_fro_sq();
            for w in rep.trace.windows(2) {
                assert!(w[1] <= w[0] + slack, "trace increased: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn factors_stay_unit_when_scaled() {
        let mut rng = Lcg64::new(85);
        let dims = [4usize, 3, 3];
        let data: Vec<f64> = (0..36).map(|_| rng.next_f64()).collect();
        let t = DenseTensor::from_vec(&dims, data).unwrap();
        let rep = run_tensor_rri(&t, 2, 25, 7).unwrap();
        for term in 0..2 {
            if rep.kruskal.scales[term] > 0.0 {
                for mode in 0..3 {
                    let nrm = norm2(rep.kruskal.factors[mode].col(term));
                    assert!((nrm - 1.0).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn per_update_optimality_under_perturbation() {
        let mut rng = Lcg64::new(86);
        let dims = [4usize, 3, 3];
        let data: Vec<f64> = (0..36).map(|_| rng.next_f64()).collect();
        let t = DenseTensor::from_vec(&dims, data).unwrap();
        let mut s = KruskalTensor::init_random(&dims, 2, 11);
        for _ in 0..3 {
            s = tensor_rri_sweep(&t, &s);
        }
        // Re-run the update for term 0, mode 1 and probe around it.
        update_term_mode(&t, &mut s, 0, 1);
        let base = s.residual_sq(&t);
        for _ in 0..100 {
            let mut probe = s.clone();
            let col: Vec<f64> = probe.factors[1]
                .col(0)
                .iter()
                .map(|&x| (x + 1e-3 * (rng.next_f64() * 2.0 - 1.0)).max(0.0))
                .collect();
            let nrm = norm2(&col);
            if nrm == 0.0 {
                continue;
            }
            let unit: Vec<f64> = col.iter().map(|&x| x / nrm).collect();
            probe.factors[1].set_col(0, &unit);
            // Refit the scale optimally for the probe direction.
            let y = residue_contraction(&t, &probe, 0, 1);
            let fit = dot(&y, probe.factors[1].col(0)).max(0.0);
            probe.scales[0] = fit;
            assert!(probe.residual_sq(&t) >= base - 1e-12);
        }
    }

    #[test]
    fn dead_term_substitution_revives_and_descends() {
        let mut rng = Lcg64::new(87);
        let dims = [4usize, 3, 3];
        let data: Vec<f64> = (0..36).map(|_| rng.next_f64() + 0.1).collect();
        let t = DenseTensor::from_vec(&dims, data).unwrap();
        let mut s = KruskalTensor::init_random(&dims, 2, 5);
        s.scales = DenseVector::from_slice(&[0.4, 0.0]);
        let before = s.residual_sq(&t);
        assert!(substitute_zero_term(&t, &mut s, 1));
        assert!(s.scales[1] > 0.0);
        assert!(s.residual_sq(&t) < before);
        // Basis seed: mode-1 factor of the revived term is a unit basis
        // vector direction only if it survived the refit, so just check the
        // factors stayed unit.
        for mode in 0..3 {
            let nrm = norm2(s.factors[mode].col(1));
            assert!((nrm - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_negative_tensor() {
        let t = DenseTensor::from_vec(&[2, 2], vec![1.0, -0.1, 0.2, 0.3]).unwrap();
        assert!(matches!(
            run_tensor_rri(&t, 1, 5, 0),
            Err(Error::NegativeInput { .. })
        ));
    }
}
