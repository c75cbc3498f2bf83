//! Achievable-rate functions and their inversion.
//!
//! Rates are written as `W * phi(snr)` where `phi` is the spectral
//! efficiency in bits/s/Hz and `snr = c*P/W` for a link with received
//! SNR-bandwidth product `c*P` (see [`LinkBudget::snr_bandwidth_hz`]). Both
//! rate models are positively homogeneous in `(W, P)`, which the solver
//! relies on.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channel::{snr_linear, LinkBudget};
use crate::error::{Error, Result};
use crate::numeric::{bisect_increasing, golden_section_max, Tolerance};

/// Golden-section settings for the pilot ratio.
const PILOT_REL_TOL: f64 = 1e-9;
const PILOT_MAX_ITER: usize = 200;
/// Pilot ratios are searched on the open interval `(PILOT_EPS, 1 - PILOT_EPS)`.
const PILOT_EPS: f64 = 1e-12;

/// Default bisection rule for [`required_bandwidth`]: 1 Hz absolute or 1e-9
/// relative, whichever is looser.
pub const BANDWIDTH_TOL: Tolerance = Tolerance::new(1.0, 1e-9);
const BISECT_MAX_ITER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateModel {
    /// AWGN capacity at the link SNR.
    Ideal,
    /// AWGN capacity at the SNR left after MMSE channel estimation, with the
    /// pilot ratio optimized per link.
    PilotPenalized {
        /// Symbols per independent channel coefficient, `B_c * T_c`.
        coherence_length: f64,
    },
}

impl RateModel {
    pub fn pilot(coherence_length: f64) -> Result<Self> {
        if !(coherence_length > 1.0) || !coherence_length.is_finite() {
            return Err(Error::Domain(format!("coherence length {coherence_length} must exceed 1")));
        }
        Ok(RateModel::PilotPenalized { coherence_length })
    }

    /// Pilot-penalized model from coherence bandwidth (Hz) and time (s).
    pub fn pilot_from_coherence(bandwidth_hz: f64, time_s: f64) -> Result<Self> {
        Self::pilot(bandwidth_hz * time_s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RateModel::Ideal => Ok(()),
            RateModel::PilotPenalized { coherence_length } => Self::pilot(coherence_length).map(|_| ()),
        }
    }
}

/// Pilot-penalized spectral efficiency `log2(1 + a*L*s^2 / (1 + s + a*L*s))`.
fn penalized_efficiency(snr: f64, alpha: f64, coherence_length: f64) -> f64 {
    let pilots = alpha * coherence_length;
    let eff = pilots * snr * snr / (1.0 + snr + pilots * snr);
    eff.ln_1p() / LN_2
}

/// Partial derivatives of the penalized efficiency.
struct PenalizedPartials {
    s: f64,
    ss: f64,
    alpha: f64,
    alpha_alpha: f64,
    s_alpha: f64,
}

fn penalized_partials(snr: f64, alpha: f64, coherence_length: f64) -> PenalizedPartials {
    // psi = [ln(N) - ln(D)] / ln2 with D = 1 + s + a s, N = D + a s^2, a = alpha*L
    let a = alpha * coherence_length;
    let s = snr;
    let d = 1.0 + s + a * s;
    let n = d + a * s * s;
    let (d_s, n_s) = (1.0 + a, 1.0 + a + 2.0 * a * s);
    let n_ss = 2.0 * a;
    let (d_a, n_a) = (s, s + s * s);
    let (d_sa, n_sa) = (1.0, 1.0 + 2.0 * s);
    let psi_s = (n_s / n - d_s / d) / LN_2;
    let psi_ss = (n_ss / n - (n_s / n).powi(2) + (d_s / d).powi(2)) / LN_2;
    let psi_a = (n_a / n - d_a / d) / LN_2;
    let psi_aa = (-(n_a / n).powi(2) + (d_a / d).powi(2)) / LN_2;
    let psi_sa = (n_sa / n - n_s * n_a / (n * n) - d_sa / d + d_s * d_a / (d * d)) / LN_2;
    PenalizedPartials {
        s: psi_s,
        ss: psi_ss,
        alpha: psi_a * coherence_length,
        alpha_alpha: psi_aa * coherence_length * coherence_length,
        s_alpha: psi_sa * coherence_length,
    }
}

/// Maximizing pilot ratio and efficiency at a given SNR.
fn optimal_pilot_efficiency(snr: f64, coherence_length: f64) -> (f64, f64) {
    if snr <= 0.0 {
        return (0.5, 0.0);
    }
    // concave in alpha: a rising slope at the upper end puts the maximum there
    let top = 1.0 - PILOT_EPS;
    if penalized_partials(snr, top, coherence_length).alpha >= 0.0 {
        return (top, penalized_efficiency(snr, top, coherence_length));
    }
    let best = golden_section_max(
        |a| penalized_efficiency(snr, a, coherence_length),
        PILOT_EPS,
        1.0 - PILOT_EPS,
        PILOT_REL_TOL,
        PILOT_MAX_ITER,
    );
    let (mut alpha, mut value) = (best.x, best.value);
    // one Newton polish, kept only if it stays inside (0,1) and improves
    let p = penalized_partials(snr, alpha, coherence_length);
    if p.alpha_alpha < 0.0 {
        let cand = alpha - p.alpha / p.alpha_alpha;
        if cand > PILOT_EPS && cand < 1.0 - PILOT_EPS {
            let v = penalized_efficiency(snr, cand, coherence_length);
            if v > value {
                alpha = cand;
                value = v;
            }
        }
    }
    (alpha, value)
}

/// Spectral efficiency `phi(snr)` in bits/s/Hz and its first two derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Efficiency {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

pub fn efficiency(model: RateModel, snr: f64) -> Efficiency {
    match model {
        RateModel::Ideal => {
            let one = 1.0 + snr;
            Efficiency { value: snr.ln_1p() / LN_2, d1: 1.0 / (one * LN_2), d2: -1.0 / (one * one * LN_2) }
        }
        RateModel::PilotPenalized { coherence_length } => {
            let (alpha, value) = optimal_pilot_efficiency(snr, coherence_length);
            let p = penalized_partials(snr, alpha, coherence_length);
            // envelope theorem; curvature picks up the alpha response only
            // when the optimum is interior
            let interior = alpha > 1e-6 && alpha < 1.0 - 1e-6 && p.alpha_alpha < 0.0;
            let d2 = if interior { p.ss - p.s_alpha * p.s_alpha / p.alpha_alpha } else { p.ss };
            Efficiency { value, d1: p.s, d2 }
        }
    }
}

fn efficiency_value(model: RateModel, snr: f64) -> f64 {
    match model {
        RateModel::Ideal => snr.ln_1p() / LN_2,
        RateModel::PilotPenalized { coherence_length } => optimal_pilot_efficiency(snr, coherence_length).1,
    }
}

/// AWGN rate `W log2(1 + SNR(W))` in bits/s.
pub fn ideal_rate(budget: &LinkBudget, w_hz: f64) -> Result<f64> {
    let snr = snr_linear(budget, w_hz)?;
    Ok(w_hz * snr.ln_1p() / LN_2)
}

/// Power-limited asymptote of [`ideal_rate`] as `W -> inf`.
pub fn ideal_rate_limit(budget: &LinkBudget) -> f64 {
    budget.snr_bandwidth_hz() / LN_2
}

/// Rate with a fraction `alpha` of symbols spent on pilots.
pub fn penalized_rate(budget: &LinkBudget, w_hz: f64, alpha: f64, coherence_length: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("pilot ratio {alpha} must lie in (0, 1)")));
    }
    RateModel::pilot(coherence_length)?;
    let snr = snr_linear(budget, w_hz)?;
    Ok(w_hz * penalized_efficiency(snr, alpha, coherence_length))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PilotOptimum {
    pub rate_bps: f64,
    pub alpha: f64,
}

/// Penalized rate maximized over the pilot ratio.
pub fn optimal_pilot_rate(budget: &LinkBudget, w_hz: f64, coherence_length: f64) -> Result<PilotOptimum> {
    RateModel::pilot(coherence_length)?;
    let snr = snr_linear(budget, w_hz)?;
    let (alpha, eff) = optimal_pilot_efficiency(snr, coherence_length);
    Ok(PilotOptimum { rate_bps: w_hz * eff, alpha })
}

/// Achievable rate under `model`.
pub fn rate(budget: &LinkBudget, w_hz: f64, model: RateModel) -> Result<f64> {
    match model {
        RateModel::Ideal => ideal_rate(budget, w_hz),
        RateModel::PilotPenalized { coherence_length } => Ok(optimal_pilot_rate(budget, w_hz, coherence_length)?.rate_bps),
    }
}

/// Outcome of a bandwidth inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Requirement {
    Bandwidth { hz: f64 },
    Infeasible { max_rate_bps: f64 },
}

impl Requirement {
    pub fn hz(&self) -> Option<f64> {
        match *self {
            Requirement::Bandwidth { hz } => Some(hz),
            Requirement::Infeasible { .. } => None,
        }
    }
}

/// Rate curve of one link as a function of bandwidth and transmit power.
///
/// `gain_hz_per_w` is the SNR-bandwidth product per watt, so the SNR at
/// `(W, P)` is `gain_hz_per_w * P / W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkCurve {
    pub gain_hz_per_w: f64,
    pub model: RateModel,
    /// SNR at which `phi(s)/s` peaks; zero when the rate grows without
    /// bound toward the power-limited asymptote.
    peak_snr: f64,
    /// Supremum over `W` of `rate(W, P) / (gain * P)`.
    peak_efficiency_ratio: f64,
}

/// Bandwidth and its derivatives with respect to `(R, P)`.
#[derive(Debug, Clone, Copy)]
pub struct BandwidthDerivs {
    pub w: f64,
    pub d_r: f64,
    pub d_p: f64,
    pub d_rr: f64,
    pub d_rp: f64,
    pub d_pp: f64,
}

impl LinkCurve {
    pub fn new(gain_hz_per_w: f64, model: RateModel) -> Self {
        let (peak_snr, peak_efficiency_ratio) = match model {
            RateModel::Ideal => (0.0, 1.0 / LN_2),
            RateModel::PilotPenalized { .. } => peak_ratio(model),
        };
        Self { gain_hz_per_w, model, peak_snr, peak_efficiency_ratio }
    }

    pub fn from_budget(budget: &LinkBudget, model: RateModel) -> Self {
        Self::new(budget.snr_bandwidth_per_watt(), model)
    }

    pub fn rate(&self, w_hz: f64, p_w: f64) -> f64 {
        if w_hz <= 0.0 || p_w <= 0.0 {
            return 0.0;
        }
        w_hz * efficiency_value(self.model, self.gain_hz_per_w * p_w / w_hz)
    }

    /// Supremum of the rate over all bandwidths, per watt.
    pub fn max_rate_per_watt(&self) -> f64 {
        self.gain_hz_per_w * self.peak_efficiency_ratio
    }

    /// Bandwidth at which the rate peaks for power `p_w` (infinite for the
    /// ideal model).
    pub fn peak_bandwidth(&self, p_w: f64) -> f64 {
        if self.peak_snr > 0.0 {
            self.gain_hz_per_w * p_w / self.peak_snr
        } else {
            f64::INFINITY
        }
    }

    /// Smallest bandwidth delivering `r_bps` at power `p_w`, on the
    /// increasing branch of the rate curve.
    pub fn required_bandwidth(&self, r_bps: f64, p_w: f64, tol: Tolerance) -> Requirement {
        let sup = self.max_rate_per_watt() * p_w;
        if r_bps <= 0.0 {
            return Requirement::Bandwidth { hz: 0.0 };
        }
        if !(r_bps < sup) || p_w <= 0.0 {
            return Requirement::Infeasible { max_rate_bps: sup.max(0.0) };
        }
        let f = |w: f64| self.rate(w, p_w);
        let mut hi = self.peak_bandwidth(p_w);
        if !hi.is_finite() {
            hi = r_bps.max(1.0);
            while f(hi) < r_bps {
                hi *= 4.0;
            }
        } else if f(hi) < r_bps {
            // numerically at the peak
            return Requirement::Bandwidth { hz: hi };
        }
        let mut lo = hi * 1e-3;
        while f(lo) >= r_bps && lo > f64::MIN_POSITIVE * 1e6 {
            lo *= 1e-3;
        }
        let (w, _) = bisect_increasing(f, r_bps, lo, hi, tol, BISECT_MAX_ITER);
        Requirement::Bandwidth { hz: w }
    }

    /// [`required_bandwidth`](Self::required_bandwidth) refined to near machine
    /// precision with Newton steps. Returns `None` when infeasible.
    pub fn bandwidth_exact(&self, r_bps: f64, p_w: f64) -> Option<f64> {
        let w0 = self.required_bandwidth(r_bps, p_w, Tolerance::new(0.0, 1e-10)).hz()?;
        if w0 == 0.0 {
            return Some(0.0);
        }
        let c = self.gain_hz_per_w * p_w;
        let mut w = w0;
        for _ in 0..4 {
            let s = c / w;
            let e = efficiency(self.model, s);
            let g = w * e.value - r_bps;
            let dg = e.value - s * e.d1;
            if !(dg > 0.0) {
                break;
            }
            let next = w - g / dg;
            if !(next > 0.0) || (next - w0).abs() > 1e-8 * w0 {
                break;
            }
            let done = (next - w).abs() <= 1e-15 * w;
            w = next;
            if done {
                break;
            }
        }
        Some(w)
    }

    /// Bandwidth needed for `(r_bps, p_w)` with gradient and Hessian.
    pub fn bandwidth_derivs(&self, r_bps: f64, p_w: f64) -> Option<BandwidthDerivs> {
        let w = self.bandwidth_exact(r_bps, p_w)?;
        if !(w > 0.0) {
            return None;
        }
        let c = self.gain_hz_per_w;
        let s = c * p_w / w;
        let e = efficiency(self.model, s);
        let f_w = e.value - s * e.d1;
        if !(f_w > 0.0) {
            return None;
        }
        let f_p = c * e.d1;
        let f_ww = s * s * e.d2 / w;
        let f_pp = c * c * e.d2 / w;
        let f_wp = -c * s * e.d2 / w;
        let d_r = 1.0 / f_w;
        let d_p = -f_p / f_w;
        let d_rr = -f_ww * d_r * d_r / f_w;
        let d_rp = -(f_ww * d_p + f_wp) * d_r / f_w;
        let d_pp = -(f_ww * d_p * d_p + 2.0 * f_wp * d_p + f_pp) / f_w;
        Some(BandwidthDerivs { w, d_r, d_p, d_rr, d_rp, d_pp })
    }
}

/// Locates the peak of `phi(s)/s` over log-spaced SNR: grid scan, then
/// golden section between the neighbours of the best grid point.
fn peak_ratio(model: RateModel) -> (f64, f64) {
    let ratio = |ln_s: f64| {
        let s = ln_s.exp();
        efficiency_value(model, s) / s
    };
    let (lo, hi) = (-60.0f64, 20.0f64);
    let n = 320usize;
    let step = (hi - lo) / n as f64;
    let mut best = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=n {
        let v = ratio(lo + step * i as f64);
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    let a = lo + step * best.saturating_sub(1) as f64;
    let b = lo + step * (best + 1).min(n) as f64;
    let m = golden_section_max(ratio, a, b, 1e-12, 200);
    (m.x.exp(), m.value)
}

/// Smallest bandwidth with `rate(W) >= target` under `model`, or
/// [`Requirement::Infeasible`] when the target exceeds the supremum of the
/// rate over all bandwidths.
pub fn required_bandwidth(target_bps: f64, budget: &LinkBudget, model: RateModel) -> Result<Requirement> {
    required_bandwidth_with(target_bps, budget, model, BANDWIDTH_TOL)
}

pub fn required_bandwidth_with(target_bps: f64, budget: &LinkBudget, model: RateModel, tol: Tolerance) -> Result<Requirement> {
    if !(target_bps > 0.0) {
        return Err(Error::Domain(format!("target rate {target_bps} must be positive")));
    }
    model.validate()?;
    let curve = LinkCurve::from_budget(budget, model);
    Ok(curve.required_bandwidth(target_bps, budget.tx_power_w, tol))
}

/// Supremum of the rate over bandwidth for this budget.
pub fn max_rate(budget: &LinkBudget, model: RateModel) -> f64 {
    LinkCurve::from_budget(budget, model).max_rate_per_watt() * budget.tx_power_w
}
