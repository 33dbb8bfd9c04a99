//! Per-antenna binary least squares: choose `s ∈ {0,1}^W` minimizing
//! `‖f − s^T·A‖²` for a row target `f` and atom rows `A`.

use nalgebra::{DMatrix, DVector};

use crate::linalg::CMat;

/// Widths up to this many bits are solved by enumeration.
pub const EXHAUSTIVE_MAX_WIDTH: usize = 14;

/// `obj(s) = energy − 2·lin·s + s^T·gram·s` with `gram = Re(A A^H)` and
/// `lin = Re(A f^H)`.
#[derive(Debug, Clone)]
pub struct RowProblem {
    pub gram: DMatrix<f64>,
    pub lin: DVector<f64>,
    pub energy: f64,
}

impl RowProblem {
    pub fn new(atoms: &CMat, gram: &DMatrix<f64>, target: &nalgebra::RowDVector<crate::linalg::C64>) -> Self {
        let lin = DVector::from_iterator(
            atoms.nrows(),
            atoms.row_iter().map(|a| a.iter().zip(target.iter()).map(|(x, y)| (x * y.conj()).re).sum()),
        );
        Self { gram: gram.clone(), lin, energy: target.norm_squared() }
    }

    pub fn gram_of(atoms: &CMat) -> DMatrix<f64> {
        (atoms * atoms.adjoint()).map(|z| z.re)
    }

    pub fn width(&self) -> usize {
        self.lin.len()
    }

    pub fn objective(&self, bits: &[u8]) -> f64 {
        let s = DVector::from_iterator(bits.len(), bits.iter().map(|&b| b as f64));
        self.energy - 2.0 * self.lin.dot(&s) + (s.transpose() * &self.gram * &s)[(0, 0)]
    }
}

/// Global row optimum by Gray-code enumeration of all `2^W` patterns.
/// Ties keep the earliest pattern in enumeration order (the all-zero row first).
pub fn exhaustive_row(p: &RowProblem) -> (Vec<u8>, f64) {
    let w = p.width();
    assert!(w < usize::BITS as usize, "row width too large to enumerate");
    let mut bits = vec![0u8; w];
    let mut qs = DVector::<f64>::zeros(w);
    let mut obj = p.energy;
    let mut best = (bits.clone(), obj);
    for k in 1..(1usize << w) {
        let b = k.trailing_zeros() as usize;
        let delta = if bits[b] == 0 {
            -2.0 * p.lin[b] + 2.0 * qs[b] + p.gram[(b, b)]
        } else {
            2.0 * p.lin[b] - 2.0 * qs[b] + p.gram[(b, b)]
        };
        let sign = if bits[b] == 0 { 1.0 } else { -1.0 };
        bits[b] ^= 1;
        qs.axpy(sign, &p.gram.column(b), 1.0);
        obj += delta;
        if obj < best.1 {
            best = (bits.clone(), obj);
        }
    }
    // Recompute to shed the accumulated update error.
    let exact = p.objective(&best.0);
    (best.0, exact)
}

/// Round the real-relaxed least-squares solution at 0.5.
pub fn relaxed_start(p: &RowProblem) -> Vec<u8> {
    let w = p.width();
    let svd = p.gram.clone().svd(true, true);
    let x = svd.solve(&p.lin, 1e-12 * svd.singular_values.max().max(f64::MIN_POSITIVE)).unwrap_or_else(|_| DVector::zeros(w));
    x.iter().map(|&v| u8::from(v > 0.5)).collect()
}

/// Best-improvement bit-flip descent from each start; the best local
/// optimum wins, earlier starts on ties.
pub fn greedy_row(p: &RowProblem, starts: &[Vec<u8>]) -> (Vec<u8>, f64) {
    let mut best: Option<(Vec<u8>, f64)> = None;
    for start in starts {
        let local = descend(p, start.clone());
        if best.as_ref().is_none_or(|b| local.1 < b.1) {
            best = Some(local);
        }
    }
    best.unwrap_or_else(|| descend(p, vec![0; p.width()]))
}

fn descend(p: &RowProblem, mut bits: Vec<u8>) -> (Vec<u8>, f64) {
    let w = p.width();
    let s = DVector::from_iterator(w, bits.iter().map(|&b| b as f64));
    let mut qs = &p.gram * s;
    let mut obj = p.objective(&bits);
    let tol = 1e-14 * p.energy.max(1e-300);
    // Each accepted flip strictly decreases a bounded objective over a
    // finite set, so the loop terminates; the cap guards rounding cycles.
    for _ in 0..(w * w + 16) {
        let mut best = (0.0, usize::MAX);
        for b in 0..w {
            let delta = if bits[b] == 0 {
                -2.0 * p.lin[b] + 2.0 * qs[b] + p.gram[(b, b)]
            } else {
                2.0 * p.lin[b] - 2.0 * qs[b] + p.gram[(b, b)]
            };
            if delta < best.0 - tol {
                best = (delta, b);
            }
        }
        if best.1 == usize::MAX {
            break;
        }
        let b = best.1;
        let sign = if bits[b] == 0 { 1.0 } else { -1.0 };
        bits[b] ^= 1;
        qs.axpy(sign, &p.gram.column(b), 1.0);
        obj += best.0;
    }
    let exact = p.objective(&bits);
    debug_assert!((exact - obj).abs() <= 1e-8 * p.energy.max(1.0));
    (bits, exact)
}
