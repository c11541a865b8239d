//! Operators on truncated tensor-product spaces.

use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};
use crate::space::{Factor, SpaceLayout};
use crate::sparse::CsrMatrix;

/// Relative tolerance used when a Hermitian claim is verified.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A sparse matrix tagged with the layout it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    layout: SpaceLayout,
    matrix: CsrMatrix,
    hermitian: bool,
}

impl Operator {
    pub fn new(layout: SpaceLayout, matrix: CsrMatrix) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return invalid(format!("matrix is {}x{}, layout dimension is {d}", matrix.nrows(), matrix.ncols()));
        }
        Ok(Self { layout, matrix, hermitian: false })
    }

    /// Same as [`Operator::new`] but verifies and records Hermiticity.
    pub fn new_hermitian(layout: SpaceLayout, matrix: CsrMatrix) -> Result<Self> {
        Self::new(layout, matrix)?.claim_hermitian()
    }

    /// Verifies `max|A - A†| <= 1e-12 · max|A|` and sets the flag.
    pub fn claim_hermitian(mut self) -> Result<Self> {
        let defect = self.matrix.hermitian_defect();
        let scale = self.matrix.max_abs().max(1.0);
        if defect > HERMITIAN_TOL * scale {
            return invalid(format!("operator is not Hermitian: defect {defect:e}"));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn identity(layout: &SpaceLayout) -> Self {
        Self { matrix: CsrMatrix::identity(layout.dim()), layout: layout.clone(), hermitian: true }
    }

    pub fn zero(layout: &SpaceLayout) -> Self {
        let d = layout.dim();
        Self { matrix: CsrMatrix::zeros(d, d), layout: layout.clone(), hermitian: true }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return invalid(format!("layout mismatch: {:?} vs {:?}", self.layout, other.layout));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self { layout: self.layout.clone(), matrix: self.matrix.adjoint(), hermitian: self.hermitian }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { layout: self.layout.clone(), matrix: self.matrix.scale(s), hermitian: self.hermitian && s.im == 0.0 }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            matrix: self.matrix.add(&other.matrix),
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale_real(-1.0))
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self { layout: self.layout.clone(), matrix: self.matrix.matmul(&other.matrix), hermitian: false })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// `A + A†`, flagged Hermitian.
    pub fn plus_adjoint(&self) -> Self {
        Self { layout: self.layout.clone(), matrix: self.matrix.add(&self.matrix.adjoint()), hermitian: true }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    pub fn to_dense(&self) -> Vec<C64> {
        self.matrix.to_dense()
    }
}

/// Annihilation operator on `|0⟩ … |cutoff⟩`.
pub fn destroy_op(cutoff: usize) -> Result<Operator> {
    let layout = SpaceLayout::single(Factor::Boson { cutoff })?;
    let t = (1..=cutoff).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))).collect();
    Operator::new(layout, CsrMatrix::from_triplets(cutoff + 1, cutoff + 1, t))
}

/// Collective spin operators on the `l = n/2` Dicke ladder.
#[derive(Debug, Clone)]
pub struct SpinOps {
    pub sx: Operator,
    pub sy: Operator,
    pub sz: Operator,
    pub sp: Operator,
    pub sm: Operator,
}

pub fn spin_ops(n: usize) -> Result<SpinOps> {
    let layout = SpaceLayout::single(Factor::Spin { n })?;
    let l = n as f64 / 2.0;
    let d = n + 1;
    let m_of = |k: usize| k as f64 - l;
    let sp_t = (0..n)
        .map(|k| {
            let m = m_of(k);
            (k + 1, k, C64::new((l * (l + 1.0) - m * (m + 1.0)).sqrt(), 0.0))
        })
        .collect();
    let sp = Operator::new(layout.clone(), CsrMatrix::from_triplets(d, d, sp_t))?;
    let sm = sp.adjoint();
    let sz =
        Operator::new(layout.clone(), CsrMatrix::diag(&(0..d).map(|k| C64::new(m_of(k), 0.0)).collect::<Vec<_>>()))?
            .claim_hermitian()?;
    let sx = sp.add(&sm)?.scale_real(0.5).claim_hermitian()?;
    let sy = sp.sub(&sm)?.scale(C64::new(0.0, -0.5)).claim_hermitian()?;
    Ok(SpinOps { sx, sy, sz, sp, sm })
}

/// Lifts a single-factor operator into `layout` at position `slot`.
pub fn embed(op: &Operator, layout: &SpaceLayout, slot: usize) -> Result<Operator> {
    if slot >= layout.factors().len() {
        return invalid(format!("slot {slot} outside layout with {} factors", layout.factors().len()));
    }
    if op.dim() != layout.factor_dim(slot) {
        return invalid(format!(
            "operator dimension {} does not match factor dimension {}",
            op.dim(),
            layout.factor_dim(slot)
        ));
    }
    let (left, right) = layout.split_dims(slot);
    let m = CsrMatrix::identity(left).kron(op.matrix()).kron(&CsrMatrix::identity(right));
    Ok(Operator { layout: layout.clone(), matrix: m, hermitian: op.hermitian })
}

/// Embedded annihilation operator of the bosonic factor at `slot`.
pub fn destroy_in(layout: &SpaceLayout, slot: usize) -> Result<Operator> {
    match layout.factors().get(slot) {
        Some(Factor::Boson { cutoff }) => embed(&destroy_op(*cutoff)?, layout, slot),
        _ => invalid(format!("slot {slot} is not a bosonic factor")),
    }
}

/// Embedded spin operators of the spin factor of `layout`.
pub fn spin_ops_in(layout: &SpaceLayout) -> Result<SpinOps> {
    let slot = layout.spin_slot().ok_or_else(|| crate::Error::InvalidArgument("layout has no spin factor".into()))?;
    let s = spin_ops(layout.atom_count().unwrap())?;
    Ok(SpinOps {
        sx: embed(&s.sx, layout, slot)?,
        sy: embed(&s.sy, layout, slot)?,
        sz: embed(&s.sz, layout, slot)?,
        sp: embed(&s.sp, layout, slot)?,
        sm: embed(&s.sm, layout, slot)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_commutator(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[i * n + j] += a[i * n + k] * b[k * n + j] - b[i * n + k] * a[k * n + j];
                }
            }
        }
        out
    }

    fn basis(d: usize, k: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); d];
        v[k] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn destroy_lowers_fock_states() {
        let a = destroy_op(2).unwrap();
        let mut y = vec![C64::new(0.0, 0.0); 3];
        a.matrix().matvec(&basis(3, 2), &mut y);
        assert!((y[1] - C64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(y[0], C64::new(0.0, 0.0));
        assert_eq!(y[2], C64::new(0.0, 0.0));
        a.matrix().matvec(&basis(3, 0), &mut y);
        assert!(y.iter().all(|v| v.norm() == 0.0));
        assert!(destroy_op(0).is_err());
    }

    #[test]
    fn bosonic_commutator_on_low_span() {
        let a = destroy_op(3).unwrap().to_dense();
        let ad = destroy_op(3).unwrap().adjoint().to_dense();
        let c = dense_commutator(&a, &ad, 4);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((c[i * 4 + j] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn raising_coefficient_for_two_atoms() {
        let s = spin_ops(2).unwrap();
        let mut y = vec![C64::new(0.0, 0.0); 3];
        s.sp.matrix().matvec(&basis(3, 0), &mut y);
        assert!((y[1] - C64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
        let sz = spin_ops(1).unwrap().sz.to_dense();
        assert_eq!(sz[0].re, -0.5);
        assert_eq!(sz[3].re, 0.5);
        assert!(spin_ops(0).is_err());
    }

    #[test]
    fn su2_commutator_dense_oracle() {
        let s = spin_ops(4).unwrap();
        let c = dense_commutator(&s.sx.to_dense(), &s.sy.to_dense(), 5);
        let isz: Vec<C64> = s.sz.to_dense().iter().map(|v| v * C64::i()).collect();
        let dev = c.iter().zip(&isz).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn embed_acts_on_one_factor() {
        let layout = SpaceLayout::new(vec![Factor::Boson { cutoff: 2 }, Factor::Spin { n: 1 }]).unwrap();
        let a = destroy_in(&layout, 0).unwrap();
        // |1⟩ ⊗ |↓⟩ has index 1 * 2 + 0
        let mut y = vec![C64::new(0.0, 0.0); 6];
        a.matrix().matvec(&basis(6, 2), &mut y);
        assert_eq!(y, basis(6, 0));
        let id = embed(&Operator::identity(&SpaceLayout::single(Factor::Spin { n: 1 }).unwrap()), &layout, 1).unwrap();
        assert_eq!(id.matrix(), Operator::identity(&layout).matrix());
        assert!(embed(&destroy_op(3).unwrap(), &layout, 0).is_err());
    }

    #[test]
    fn embedded_trace_is_multiplicative() {
        let layout = SpaceLayout::new(vec![Factor::Boson { cutoff: 1 }, Factor::Spin { n: 2 }]).unwrap();
        let sz = embed(&spin_ops(2).unwrap().sz, &layout, 1).unwrap();
        let d = sz.to_dense();
        let tr: C64 = (0..6).map(|i| d[i * 6 + i]).sum();
        assert!(tr.norm() < 1e-15);
    }

    #[test]
    fn algebra_identities() {
        let s = spin_ops(3).unwrap();
        let dp = s.sp.adjoint().to_dense();
        let dm = s.sm.to_dense();
        assert_eq!(dp, dm);
        let ia = s.sx.scale(C64::i());
        let lhs = ia.adjoint();
        let rhs = s.sx.adjoint().scale(-C64::i());
        assert_eq!(lhs.to_dense(), rhs.to_dense());
        let z = Operator::zero(s.sx.layout());
        assert_eq!(s.sx.add(&z).unwrap().to_dense(), s.sx.to_dense());
        let other = destroy_op(3).unwrap();
        assert!(s.sx.add(&other).is_err());
    }

    #[test]
    fn non_hermitian_claim_rejected() {
        let s = spin_ops(2).unwrap();
        assert!(s.sp.clone().claim_hermitian().is_err());
    }
}
