//! Truncated Fock space of the modes `a₁, a₂, b₁, b₂` with a two-dimensional internal factor.
//! Basis index is `fock·2 + sector`, sector 0 being the `+i` eigenspace of `i_eff`.

use nalgebra::DVector;
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;

use super::{IEffStructure, MatrixError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    A1 = 0,
    A2 = 1,
    B1 = 2,
    B2 = 3,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::A1, Mode::A2, Mode::B1, Mode::B2];
}

pub type Occupation = [usize; 4];

#[derive(Clone, Debug)]
pub struct FockSpace {
    cutoff: usize,
    ieff: IEffStructure,
    emergent: bool,
    ladders: [CsrMatrix<Complex64>; 4],
    ladders_adj: [CsrMatrix<Complex64>; 4],
}

pub(crate) fn adjoint(m: &CsrMatrix<Complex64>) -> CsrMatrix<Complex64> {
    let mut t = m.transpose();
    for v in t.values_mut() {
        *v = v.conj();
    }
    t
}

pub(crate) fn matvec(m: &CsrMatrix<Complex64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    let mut out = DVector::zeros(m.nrows());
    for (r, row) in m.row_iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, x) in row.col_indices().iter().zip(row.values()) {
            acc += x * v[*c];
        }
        out[r] = acc;
    }
    out
}

impl FockSpace {
    /// Canonical ladders `a ⊗ 1`, or with `emergent` set `a ⊗ P₊ + a† ⊗ P₋`, so that
    /// `[a, a†] = 1_eff` below the cutoff.
    pub fn new(cutoff: usize, emergent: bool) -> Result<Self, MatrixError> {
        if cutoff < 4 {
            return Err(MatrixError::CutoffTooSmall(cutoff));
        }
        let fock = cutoff.pow(4);
        let ieff = IEffStructure::new(2 * fock)?;
        let mut ladders = Vec::with_capacity(4);
        for mode in Mode::ALL {
            let mut coo = CooMatrix::new(2 * fock, 2 * fock);
            for f in 0..fock {
                let occ = Self::occupation_of(cutoff, f);
                let n = occ[mode as usize];
                if n == 0 {
                    continue;
                }
                let mut lower = occ;
                lower[mode as usize] -= 1;
                let g = Self::fock_index_of(cutoff, &lower);
                let amp = Complex64::new((n as f64).sqrt(), 0.0);
                coo.push(2 * g, 2 * f, amp);
                if emergent {
                    coo.push(2 * f + 1, 2 * g + 1, amp);
                } else {
                    coo.push(2 * g + 1, 2 * f + 1, amp);
                }
            }
            ladders.push(CsrMatrix::from(&coo));
        }
        let ladders: [CsrMatrix<Complex64>; 4] = ladders.try_into().expect("four modes");
        let ladders_adj = [0, 1, 2, 3].map(|k| adjoint(&ladders[k]));
        Ok(Self { cutoff, ieff, emergent, ladders, ladders_adj })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dimension(&self) -> usize {
        self.ieff.dimension()
    }

    pub fn ieff(&self) -> &IEffStructure {
        &self.ieff
    }

    pub fn is_emergent(&self) -> bool {
        self.emergent
    }

    pub fn ladder(&self, mode: Mode) -> &CsrMatrix<Complex64> {
        &self.ladders[mode as usize]
    }

    pub fn ladder_adj(&self, mode: Mode) -> &CsrMatrix<Complex64> {
        &self.ladders_adj[mode as usize]
    }

    fn occupation_of(cutoff: usize, mut f: usize) -> Occupation {
        let mut occ = [0; 4];
        for k in (0..4).rev() {
            occ[k] = f % cutoff;
            f /= cutoff;
        }
        occ
    }

    fn fock_index_of(cutoff: usize, occ: &Occupation) -> usize {
        occ.iter().fold(0, |acc, n| acc * cutoff + n)
    }

    /// Full basis index, if the occupation fits below the cutoff.
    pub fn index(&self, occ: &Occupation, sector: usize) -> Option<usize> {
        if sector > 1 || occ.iter().any(|&n| n >= self.cutoff) {
            return None;
        }
        Some(2 * Self::fock_index_of(self.cutoff, occ) + sector)
    }

    pub fn state(&self, p: usize) -> (Occupation, usize) {
        (Self::occupation_of(self.cutoff, p / 2), p % 2)
    }

    /// Basis indices whose total occupation is at most `n`, in increasing order.
    pub fn window(&self, n: usize) -> Vec<usize> {
        (0..self.dimension()).filter(|&p| self.state(p).0.iter().sum::<usize>() <= n).collect()
    }

    /// Fock vacuum in the `+i` sector.
    pub fn vacuum(&self) -> DVector<Complex64> {
        let mut v = DVector::zeros(self.dimension());
        v[0] = Complex64::new(1.0, 0.0);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trips() {
        let f = FockSpace::new(4, false).unwrap();
        for p in [0, 1, 17, 300, f.dimension() - 1] {
            let (occ, s) = f.state(p);
            assert_eq!(f.index(&occ, s), Some(p));
        }
        assert_eq!(f.index(&[4, 0, 0, 0], 0), None);
    }

    #[test]
    fn ladder_lowers_one_quantum() {
        let f = FockSpace::new(4, false).unwrap();
        let mut v = DVector::zeros(f.dimension());
        v[f.index(&[0, 2, 0, 0], 1).unwrap()] = Complex64::new(1.0, 0.0);
        let w = matvec(f.ladder(Mode::A2), &v);
        let q = f.index(&[0, 1, 0, 0], 1).unwrap();
        assert!((w[q].re - 2f64.sqrt()).abs() < 1e-15);
        assert!(matvec(f.ladder(Mode::B1), &f.vacuum()).norm() == 0.0);
    }

    #[test]
    fn small_cutoff_rejected() {
        assert_eq!(FockSpace::new(3, false).unwrap_err(), MatrixError::CutoffTooSmall(3));
    }
}
