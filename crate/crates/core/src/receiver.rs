//! Optimal widely linear receiver and the two MSE evaluators.
//!
//! For a fixed transmit spectrum the quadratic objective in the two receive
//! waveforms is minimized per bin by the solve
//! `w(f) = Rbar(f)^{-1} Hbar(f) Mbar(fT) sbar(f)` on the augmented
//! (frequency, mirror-frequency) system; the upper block of `w` filters the
//! received signal, the lower block filters its complex conjugate. Two
//! independent evaluators compute the residual MSE: the block-matrix form
//! straight from the augmented quadratic, and the reduced scalar form that
//! only needs the per-side noise-whitened channel gain
//! `c(f) = M(fT) s(f)^H H(f)^H R_N(f)^{-1} H(f) s(f) / T` together with the
//! impropriety `k(fT)`. Their agreement is one of the main self-checks.

use crate::link::{BinModel, LinkError, LinkModel, SideModel, TxSpectrum};
use crate::numerics::{conj_reversed, hermitian_solve, CMatrix, C64};
use crate::spectra::{augment, Vft};

/// Transmit samples of a mirrored pair stacked as `[s(f); J s(-f)*]`.
#[derive(Debug, Clone)]
pub struct AugmentedVft {
    pub freq: f64,
    /// Length of the upper (own-frequency) block.
    pub upper_len: usize,
    pub values: Vec<C64>,
}

impl AugmentedVft {
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Stack a mirrored pair of transmit sample vectors: the lower block is the
/// reversed conjugate of the mirror side.
pub fn augment_tx(s_pos: &Vft, s_neg: &Vft) -> AugmentedVft {
    let mut values = s_pos.values.clone();
    values.extend(conj_reversed(&s_neg.values));
    AugmentedVft { freq: s_pos.freq, upper_len: s_pos.values.len(), values }
}

/// Receiver samples for one bin pair, at both signed frequencies.
///
/// `w1_*` filters the received signal, `w2_*` filters its conjugate; the `w2`
/// vector at frequency `f` has the length of the mirror side `-f`.
#[derive(Debug, Clone)]
pub struct ReceiverBin {
    pub xi: f64,
    pub w1_pos: Vec<C64>,
    pub w2_pos: Vec<C64>,
    pub w1_neg: Vec<C64>,
    pub w2_neg: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct ReceiverSolution {
    pub bins: Vec<ReceiverBin>,
}

impl ReceiverSolution {
    /// Largest conjugate-branch magnitude across all bins.
    pub fn max_w2(&self) -> f64 {
        self.bins
            .iter()
            .flat_map(|b| b.w2_pos.iter().chain(&b.w2_neg))
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Signed direction through a bin pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Pos,
    Neg,
}

/// The augmented per-bin system at one signed frequency: the block density
/// `Rbar`, the solve target `Hbar Mbar sbar`, and the stacked transmit vector.
struct AugmentedSystem {
    rbar: CMatrix,
    target: Vec<C64>,
    upper_len: usize,
    /// `T M(fT)` for this direction, the no-receiver MSE density.
    tm: f64,
}

fn build_system(
    model: &LinkModel,
    bin: &BinModel,
    s_pair: &(Vec<C64>, Vec<C64>),
    side: Side,
) -> Result<AugmentedSystem, LinkError> {
    let t = model.symbol_period();
    let (this, other, s_this, s_other, m_tilde) = match side {
        Side::Pos => (&bin.pos, &bin.neg, &s_pair.0, &s_pair.1, bin.m_tilde),
        // the complementary spectrum is even in f, so the mirror direction
        // reuses the same value
        Side::Neg => (&bin.neg, &bin.pos, &s_pair.1, &s_pair.0, bin.m_tilde),
    };
    check_len(this, s_this)?;
    check_len(other, s_other)?;

    let p_this: Vec<C64> = this.h.iter().zip(s_this).map(|(h, s)| h * s).collect();
    let p_other: Vec<C64> = other.h.iter().zip(s_other).map(|(h, s)| h * s).collect();

    // signal auto/complementary densities at this direction
    let inv_t = 1.0 / t;
    let auto_this = CMatrix::outer(&p_this, &p_this).scale(C64::new(this.m * inv_t, 0.0));
    let auto_other = CMatrix::outer(&p_other, &p_other).scale(C64::new(other.m * inv_t, 0.0));
    let comp = CMatrix::outer(&p_this, &conj_reversed(&p_other)).scale(m_tilde * inv_t);

    let r_this = this.rn.add(&auto_this);
    let r_other = other.rn.add(&auto_other);
    let rbar = augment(&r_this, &r_other, &comp)?;

    // Hbar Mbar sbar = [ M(fT) h(f)∘s(f) ; M~(fT)* J (h(-f)∘s(-f))* ]
    let mut target: Vec<C64> = p_this.iter().map(|p| p * this.m).collect();
    target.extend(conj_reversed(&p_other).iter().map(|p| p * m_tilde.conj()));

    Ok(AugmentedSystem { rbar, target, upper_len: this.h.len(), tm: t * this.m })
}

fn check_len(side: &SideModel, s: &[C64]) -> Result<(), LinkError> {
    if side.h.len() != s.len() {
        return Err(LinkError::ShapeMismatch(format!(
            "transmit samples have length {} but the side holds {} shifts",
            s.len(),
            side.h.len()
        )));
    }
    Ok(())
}

/// Whitened-channel transmit gain of one side:
/// `c = M(fT) (h∘s)^H R_N^{-1} (h∘s) / T`, clamped to be nonnegative.
fn side_c(side: &SideModel, s: &[C64], t: f64) -> Result<f64, LinkError> {
    let p: Vec<C64> = side.h.iter().zip(s).map(|(h, s)| h * s).collect();
    if p.iter().all(|z| z.norm_sqr() == 0.0) {
        return Ok(0.0);
    }
    let x = hermitian_solve(&side.rn, &p)?;
    let q: C64 = p.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
    Ok((side.m * q.re / t).max(0.0))
}

/// Per-pair whitened gains `(c(+xi), c(-xi))` for a transmit spectrum.
pub fn c_values(model: &LinkModel, s: &TxSpectrum) -> Result<Vec<(f64, f64)>, LinkError> {
    let t = model.symbol_period();
    model
        .bins
        .iter()
        .zip(&s.pairs)
        .map(|(bin, pair)| Ok((side_c(&bin.pos, &pair.0, t)?, side_c(&bin.neg, &pair.1, t)?)))
        .collect()
}

/// Solve for the minimum-MSE widely linear receiver given the transmit
/// spectrum. Each signed frequency gets its own augmented solve.
pub fn optimal_receiver(
    model: &LinkModel,
    s: &TxSpectrum,
) -> Result<ReceiverSolution, LinkError> {
    let mut bins = Vec::with_capacity(model.bins.len());
    for (bin, pair) in model.bins.iter().zip(&s.pairs) {
        let sys_pos = build_system(model, bin, pair, Side::Pos)?;
        let w_pos = hermitian_solve(&sys_pos.rbar, &sys_pos.target)?;
        let sys_neg = build_system(model, bin, pair, Side::Neg)?;
        let w_neg = hermitian_solve(&sys_neg.rbar, &sys_neg.target)?;
        let (w1_pos, w2_pos) = w_pos.split_at(sys_pos.upper_len);
        let (w1_neg, w2_neg) = w_neg.split_at(sys_neg.upper_len);
        bins.push(ReceiverBin {
            xi: bin.xi,
            w1_pos: w1_pos.to_vec(),
            w2_pos: w2_pos.to_vec(),
            w1_neg: w1_neg.to_vec(),
            w2_neg: w2_neg.to_vec(),
        });
    }
    Ok(ReceiverSolution { bins })
}

/// Which evaluator produced an MSE report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MseMethod {
    Matrix,
    Scalar,
}

/// Total MSE with the per-pair integrand split by sign.
#[derive(Debug, Clone)]
pub struct MseReport {
    pub total: f64,
    /// `(integrand at +xi, at -xi)` per pair; the total is their paired sum
    /// times the bin width.
    pub per_bin: Vec<(f64, f64)>,
    pub method: MseMethod,
}

/// MSE of the optimal receiver from the augmented block form:
/// per direction `T M(fT) - target^H Rbar^{-1} target`.
pub fn mse_matrix(model: &LinkModel, s: &TxSpectrum) -> Result<MseReport, LinkError> {
    let mut per_bin = Vec::with_capacity(model.bins.len());
    let mut total = 0.0;
    for (bin, pair) in model.bins.iter().zip(&s.pairs) {
        let mut eps = [0.0f64; 2];
        for (slot, side) in [Side::Pos, Side::Neg].into_iter().enumerate() {
            let sys = build_system(model, bin, pair, side)?;
            let x = hermitian_solve(&sys.rbar, &sys.target)?;
            let q: C64 = sys.target.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
            let val = sys.tm - q.re;
            if val < -1e-10 * (1.0 + sys.tm) {
                let freq = if side == Side::Pos { bin.xi } else { -bin.xi };
                return Err(LinkError::NegativeIntegrand { freq, value: val });
            }
            eps[slot] = val.max(0.0);
        }
        total += (eps[0] + eps[1]) * model.delta_f();
        per_bin.push((eps[0], eps[1]));
    }
    Ok(MseReport { total, per_bin, method: MseMethod::Matrix })
}

/// Reduced scalar MSE from per-pair whitened gains.
///
/// Per direction the integrand is `T M(fT) / (1 + k^T D k)` with
/// `D = diag(c(f), c(-f) / (1 + c(-f)(1 - k^2)))` and `k = (1, k(fT))`;
/// directions with `M(fT) = 0` contribute nothing.
pub fn mse_scalar(model: &LinkModel, c: &[(f64, f64)]) -> MseReport {
    let t = model.symbol_period();
    let mut per_bin = Vec::with_capacity(model.bins.len());
    let mut total = 0.0;
    for (bin, &(c_pos, c_neg)) in model.bins.iter().zip(c) {
        let kbar = 1.0 - bin.k * bin.k;
        let eps = |m_this: f64, c_this: f64, c_other: f64| -> f64 {
            if m_this == 0.0 {
                return 0.0;
            }
            let d11 = c_this;
            let d22 = c_other / (1.0 + c_other * kbar);
            t * m_this / (1.0 + d11 + bin.k * bin.k * d22)
        };
        let e_pos = eps(bin.pos.m, c_pos, c_neg);
        let e_neg = eps(bin.neg.m, c_neg, c_pos);
        total += (e_pos + e_neg) * model.delta_f();
        per_bin.push((e_pos, e_neg));
    }
    MseReport { total, per_bin, method: MseMethod::Scalar }
}

/// Scalar MSE computed directly from a transmit spectrum.
pub fn mse_scalar_from_s(model: &LinkModel, s: &TxSpectrum) -> Result<MseReport, LinkError> {
    Ok(mse_scalar(model, &c_values(model, s)?))
}

/// The quadratic receiver objective
/// `sum over signed bins of (T M + w^H Rbar w - 2 Re(w^H target)) df`
/// evaluated at an arbitrary receiver. At the optimal receiver this equals
/// the block-form MSE; any perturbation increases it.
pub fn wl_objective(
    model: &LinkModel,
    s: &TxSpectrum,
    w: &ReceiverSolution,
) -> Result<f64, LinkError> {
    let mut total = 0.0;
    for ((bin, pair), rbin) in model.bins.iter().zip(&s.pairs).zip(&w.bins) {
        for side in [Side::Pos, Side::Neg] {
            let sys = build_system(model, bin, pair, side)?;
            let wvec: Vec<C64> = match side {
                Side::Pos => rbin.w1_pos.iter().chain(&rbin.w2_pos).copied().collect(),
                Side::Neg => rbin.w1_neg.iter().chain(&rbin.w2_neg).copied().collect(),
            };
            if wvec.len() != sys.rbar.rows() {
                return Err(LinkError::ShapeMismatch(format!(
                    "receiver vector has length {} but the augmented system is {}",
                    wvec.len(),
                    sys.rbar.rows()
                )));
            }
            let rw = sys.rbar.mul_vec(&wvec);
            let quad: C64 = wvec.iter().zip(&rw).map(|(a, b)| a.conj() * b).sum();
            let cross: C64 = wvec.iter().zip(&sys.target).map(|(a, b)| a.conj() * b).sum();
            total += (sys.tm + quad.re - 2.0 * cross.re) * model.delta_f();
        }
    }
    Ok(total)
}
