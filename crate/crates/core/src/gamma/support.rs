//! Restriction of an operator to the local indices it actually touches. Bounds are computed
//! on the restricted operator so that padding a state with unused local levels leaves every
//! computation unchanged.

use crate::error::Result;
use crate::linalg::{CMatrix, FactorDims};

use super::witness::TensorDecomposition;

const ZERO: f64 = 1e-14;

#[derive(Debug, Clone)]
pub(crate) struct LocalSupport {
    dims: FactorDims,
    kept: Vec<Vec<usize>>,
    trimmed: FactorDims,
    indices: Vec<usize>,
}

impl LocalSupport {
    pub(crate) fn of(m: &CMatrix, dims: &FactorDims) -> Result<Self> {
        dims.check_matrix(m)?;
        let n = dims.total();
        let digits: Vec<Vec<usize>> = (0..n).map(|i| dims.digits(i)).collect();
        let mut kept = Vec::with_capacity(dims.parties());
        for k in 0..dims.parties() {
            let d = dims.get(k);
            let mut weight = vec![0.0f64; d];
            for (i, dg) in digits.iter().enumerate() {
                weight[dg[k]] += m[(i, i)].norm();
            }
            let mut keep: Vec<usize> = (0..d)
                .filter(|&level| {
                    if weight[level] > ZERO {
                        return true;
                    }
                    // any entry in a row or column carrying this level keeps it
                    (0..n).filter(|&i| digits[i][k] == level).any(|i| {
                        (0..n).any(|j| m[(i, j)].norm() > ZERO || m[(j, i)].norm() > ZERO)
                    })
                })
                .collect();
            if keep.is_empty() {
                keep = (0..d).collect();
            }
            kept.push(keep);
        }
        let trimmed = FactorDims::new(kept.iter().map(Vec::len).collect())?;
        let indices = (0..trimmed.total())
            .map(|t| {
                let td = trimmed.digits(t);
                let full: Vec<usize> = td.iter().zip(&kept).map(|(&x, lv)| lv[x]).collect();
                dims.index(&full)
            })
            .collect();
        Ok(LocalSupport { dims: dims.clone(), kept, trimmed, indices })
    }

    pub(crate) fn is_full(&self) -> bool {
        self.trimmed == self.dims
    }

    pub(crate) fn trimmed_dims(&self) -> &FactorDims {
        &self.trimmed
    }

    pub(crate) fn restrict(&self, m: &CMatrix) -> CMatrix {
        if self.is_full() {
            return m.clone();
        }
        let idx = &self.indices;
        CMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
    }

    /// Pads every factor of a witness on the trimmed dims back to the full dims.
    pub(crate) fn extend(&self, w: TensorDecomposition) -> TensorDecomposition {
        if self.is_full() {
            return w;
        }
        let cost = w.cost();
        let terms = w
            .terms()
            .iter()
            .map(|t| {
                t.iter()
                    .enumerate()
                    .map(|(k, f)| {
                        let d = self.dims.get(k);
                        let lv = &self.kept[k];
                        let mut out = CMatrix::zeros(d, d);
                        for (a, &ra) in lv.iter().enumerate() {
                            for (b, &rb) in lv.iter().enumerate() {
                                out[(ra, rb)] = f[(a, b)];
                            }
                        }
                        out
                    })
                    .collect()
            })
            .collect();
        TensorDecomposition::from_parts(self.dims.clone(), terms, cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{embed_state, make_state, Generator};

    #[test]
    fn full_support_is_untouched() {
        let dims = FactorDims::bipartite(2, 3).unwrap();
        let rho = make_state(&Generator::RandomDensity { dims: dims.clone(), seed: 1 }).unwrap().density();
        let s = LocalSupport::of(rho.matrix(), &dims).unwrap();
        assert!(s.is_full());
        assert_eq!(&s.restrict(rho.matrix()), rho.matrix());
    }

    #[test]
    fn embedding_is_trimmed_back_exactly() {
        let dims = FactorDims::bipartite(2, 2).unwrap();
        let rho = make_state(&Generator::RandomDensity { dims, seed: 2 }).unwrap().density();
        let big = embed_state(&rho, &FactorDims::bipartite(3, 4).unwrap()).unwrap();
        let s = LocalSupport::of(big.matrix(), big.dims()).unwrap();
        assert_eq!(s.trimmed_dims().as_slice(), &[2, 2]);
        assert_eq!(&s.restrict(big.matrix()), rho.matrix());
    }

    #[test]
    fn extended_witness_reconstructs_the_padded_operator() {
        let dims = FactorDims::bipartite(2, 2).unwrap();
        let rho = make_state(&Generator::RandomDensity { dims: dims.clone(), seed: 3 }).unwrap().density();
        let big = embed_state(&rho, &FactorDims::bipartite(3, 2).unwrap()).unwrap();
        let s = LocalSupport::of(big.matrix(), big.dims()).unwrap();
        let os = crate::decompositions::operator_schmidt(&rho).unwrap();
        let terms = (0..os.values.len())
            .map(|k| vec![os.left[k].scale(os.values[k]), os.right[k].clone()])
            .collect();
        let w = TensorDecomposition::new(dims, terms).unwrap();
        let e = s.extend(w.clone());
        assert_eq!(e.cost(), w.cost());
        assert!(e.certify(big.matrix()).unwrap() < 1e-12);
    }
}
