//! Multiplicative update rules.

use crate::error::Result;
use crate::matrix::DenseMatrix;
use crate::model::FactorPair;

/// One multiplicative sweep:
/// `U <- U o (A V) / (U V^T V)` followed by `V <- V o (A^T U) / (V U^T U)`
/// using the freshly updated `U`. Zero denominators are guarded, so the
/// sweep is NaN-free; entries at zero stay zero (the rule cannot leave the
/// boundary, which is exactly how it gets trapped).
pub fn mult_sweep(a: &DenseMatrix, fp: &FactorPair) -> Result<FactorPair> {
    let av = a.matmul(&fp.v)?;
    let u_vtv = fp.u.matmul(&fp.v.gram())?;
    let u = fp.u.hadamard(&av.hadamard_div(&u_vtv)?)?;

    let atu = a.matmul_t_left(&u)?;
    let v_utu = fp.v.matmul(&u.gram())?;
    let v = fp.v.hadamard(&atu.hadamard_div(&v_utu)?)?;

    FactorPair::new(u, v)
}
