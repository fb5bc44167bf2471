//! Closed-form transition densities.
//!
//! Everything here reduces to the skew Brownian kernel
//!
//! ```text
//! p^Z(t, u, v) = (2 pi t)^{-1/2} [ exp(-(u-v)^2 / 2t)
//!                + gamma sign(v) exp(-(|u|+|v|)^2 / 2t) ] ,
//! ```
//!
//! a Gaussian plus a partially reflected image charge of strength
//! `gamma in (-1, 1)`. A diffusion with one volatility discontinuity is
//! carried onto a skew Brownian motion by its piecewise-linear scale map,
//! so its density is the kernel above evaluated in scale coordinates and
//! weighted by the inverse left-derivative of the inverse scale map. The
//! two-interface diffusion admits the same reduction exactly when
//! `beta = 1 - q/r` (the matching condition); otherwise no closed form is
//! known and callers fall back on the expansion or Monte Carlo modules.
//!
//! Densities are almost-everywhere objects; at the interface points
//! themselves this crate consistently uses the left-closed branch
//! (`sign(0) = -1`, weights from the region `y <= interface`), matching
//! the region convention of the coefficient functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{PhysicalMedium, Region, SdeParams};

/// Which closed form produced a density value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    SkewBm,
    SingleAt0,
    SingleAtA,
    TwoInterfaceSpecial,
    MSymmetric,
}

impl KernelForm {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelForm::SkewBm => "skew_bm",
            KernelForm::SingleAt0 => "single_at_0",
            KernelForm::SingleAtA => "single_at_a",
            KernelForm::TwoInterfaceSpecial => "two_interface_special",
            KernelForm::MSymmetric => "m_symmetric",
        }
    }
}

impl std::str::FromStr for KernelForm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "skew_bm" => Ok(KernelForm::SkewBm),
            "single_at_0" => Ok(KernelForm::SingleAt0),
            "single_at_a" => Ok(KernelForm::SingleAtA),
            "two_interface_special" => Ok(KernelForm::TwoInterfaceSpecial),
            "m_symmetric" => Ok(KernelForm::MSymmetric),
            _ => Err(format!("unknown kernel form `{s}`")),
        }
    }
}

/// Branch convention actually applied at the evaluation point `y`.
/// Only interesting when `y` sits exactly on an interface, where the
/// left-closed branch is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfaceBranch {
    /// `y` away from every interface point.
    Off,
    /// `y` exactly at 0, treated as the `y <= 0` branch.
    AtZeroLeft,
    /// `y` exactly at `a`, treated as the `y <= a` branch.
    AtALeft,
}

/// A transition-density value with provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    pub value: f64,
    pub form: KernelForm,
    pub convention: InterfaceBranch,
}

/// A diffusion with a single volatility interface: coefficient `lo` below
/// `at`, `hi` above, and local-time drift weight `skew < 1` at `at`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleInterface {
    pub lo: f64,
    pub hi: f64,
    pub skew: f64,
    pub at: f64,
}

impl SingleInterface {
    /// Reflection coefficient `(lo + hi(skew-1)) / (lo - hi(skew-1))`.
    pub fn gamma(&self) -> f64 {
        (self.lo + self.hi * (self.skew - 1.0)) / (self.lo - self.hi * (self.skew - 1.0))
    }

    /// Scale coordinate of `x`, centred so the interface maps to 0.
    pub fn scale_to(&self, x: f64) -> f64 {
        let d = x - self.at;
        if d <= 0.0 {
            d / self.lo
        } else {
            d / self.hi
        }
    }

    /// Inverse of [`Self::scale_to`].
    pub fn scale_from(&self, z: f64) -> f64 {
        if z <= 0.0 {
            self.at + self.lo * z
        } else {
            self.at + self.hi * z
        }
    }

    /// Density weight `1/sigma'_l` at `y` (left-closed branch).
    fn weight(&self, y: f64) -> f64 {
        if y <= self.at {
            1.0 / self.lo
        } else {
            1.0 / self.hi
        }
    }

    /// Transition density at time `t > 0` from `x` to `y`.
    pub fn density(&self, t: f64, x: f64, y: f64) -> f64 {
        debug_assert!(t > 0.0);
        self.weight(y) * skew_gauss(self.gamma(), t, self.scale_to(x), self.scale_to(y))
    }

    /// Cumulative distribution `P(X_t <= y | X_0 = x)`, assembled from
    /// complementary-error-function terms.
    pub fn cdf(&self, t: f64, x: f64, y: f64) -> f64 {
        debug_assert!(t > 0.0);
        skew_bm_cdf(self.gamma(), t, self.scale_to(x), self.scale_to(y))
    }

    /// Physical window outside which the transition density from `x`
    /// carries less than ~1e-31 of its mass, image charge included.
    pub fn mass_window(&self, t: f64, x: f64) -> (f64, f64) {
        let z0 = self.scale_to(x);
        let m = 12.0 * t.sqrt();
        (self.scale_from((z0 - m).min(-m)), self.scale_from((z0 + m).max(m)))
    }
}

/// Standard normal CDF via the order-0 tail integral.
fn norm_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u / std::f64::consts::SQRT_2)
}

/// Heat kernel `(2 pi t)^{-1/2} exp(-d^2/2t)`.
fn gauss(t: f64, d: f64) -> f64 {
    (2.0 * std::f64::consts::PI * t).sqrt().recip() * (-d * d / (2.0 * t)).exp()
}

/// Skew Brownian kernel in scale coordinates; `sign(0) = -1`.
fn skew_gauss(gamma: f64, t: f64, u: f64, v: f64) -> f64 {
    let sign = if v <= 0.0 { -1.0 } else { 1.0 };
    gauss(t, u - v) + gamma * sign * gauss(t, u.abs() + v.abs())
}

/// CDF of the skew Brownian motion started at `z0`, evaluated at `v`.
fn skew_bm_cdf(gamma: f64, t: f64, z0: f64, v: f64) -> f64 {
    let rt = t.sqrt();
    let mut cdf = norm_cdf((v - z0) / rt) - gamma * norm_cdf((v.min(0.0) - z0.abs()) / rt);
    if v > 0.0 {
        cdf += gamma * (norm_cdf((v + z0.abs()) / rt) - norm_cdf(z0.abs() / rt));
    }
    cdf
}

fn branch_at(y: f64, a: Option<f64>) -> InterfaceBranch {
    if y == 0.0 {
        InterfaceBranch::AtZeroLeft
    } else if Some(y) == a {
        InterfaceBranch::AtALeft
    } else {
        InterfaceBranch::Off
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::NonFinite { name: "t", value: t });
    }
    if t <= 0.0 {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(())
}

fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFinite { name, value: v });
    }
    Ok(())
}

/// Skew Brownian transition density with reflection coefficient
/// `gamma in (-1, 1)`.
pub fn skew_bm_density(gamma: f64, t: f64, x: f64, y: f64) -> Result<KernelEval> {
    check_time(t)?;
    check_finite("x", x)?;
    check_finite("y", y)?;
    if !gamma.is_finite() || gamma.abs() >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            constraint: "must lie in (-1, 1)",
        });
    }
    Ok(KernelEval {
        value: skew_gauss(gamma, t, x, y),
        form: KernelForm::SkewBm,
        convention: branch_at(y, None),
    })
}

/// Transition density of the diffusion with a single interface at 0
/// (volatility `p` below, `q` above, drift weight `alpha`). This is the
/// law of the full two-interface diffusion when `q = r` and `beta = 0`.
pub fn kernel_single_0(params: &SdeParams, t: f64, x: f64, y: f64) -> Result<KernelEval> {
    check_time(t)?;
    check_finite("x", x)?;
    check_finite("y", y)?;
    Ok(KernelEval {
        value: params.interface_at_zero().density(t, x, y),
        form: KernelForm::SingleAt0,
        convention: branch_at(y, None),
    })
}

/// Transition density of the diffusion with a single interface at `a`
/// (volatility `q` below, `r` above, drift weight `beta`); the image of
/// [`kernel_single_0`] under translation by `a` and the relabeling
/// `(p, q, alpha) -> (q, r, beta)`. This is the law of the two-interface
/// diffusion when `p = q` and `alpha = 0`.
pub fn kernel_single_a(params: &SdeParams, t: f64, x: f64, y: f64) -> Result<KernelEval> {
    check_time(t)?;
    check_finite("x", x)?;
    check_finite("y", y)?;
    Ok(KernelEval {
        value: params.interface_at_a().density(t, x, y),
        form: KernelForm::SingleAtA,
        convention: branch_at(y, Some(params.a)),
    })
}

/// Transition density of the two-interface diffusion under the matching
/// condition `beta = 1 - q/r`: the full scale map `s` straightens both
/// interfaces onto a single skew point, giving
///
/// ```text
/// p(t,x,y) = w(y) [ exp(-(s(x)-s(y))^2/2t)
///            + gamma sign(y) exp(-(|s(x)|+|s(y)|)^2/2t) ] / sqrt(2 pi t)
/// ```
///
/// with `w(y)` the piecewise weight `1/p, 1/q, 1/r` and `gamma` the
/// reflection coefficient of the interface at 0. Returns an error when
/// the matching condition fails (no closed form is available then).
pub fn kernel_two_interface(params: &SdeParams, t: f64, x: f64, y: f64) -> Result<KernelEval> {
    check_time(t)?;
    check_finite("x", x)?;
    check_finite("y", y)?;
    if !params.is_beta_matched() {
        return Err(Error::MatchingCondition {
            beta: params.beta,
            expected: 1.0 - params.q / params.r,
        });
    }
    let sc = params.scale();
    let weight = match Region::classify(y, params.a) {
        Region::Lower => 1.0 / params.p,
        Region::Middle => 1.0 / params.q,
        Region::Upper => 1.0 / params.r,
    };
    let sign = if y <= 0.0 { -1.0 } else { 1.0 };
    let (u, v) = (sc.s(x), sc.s(y));
    let value =
        weight * (gauss(t, u - v) + params.gamma_at_zero() * sign * gauss(t, u.abs() + v.abs()));
    Ok(KernelEval {
        value,
        form: KernelForm::TwoInterfaceSpecial,
        convention: branch_at(y, Some(params.a)),
    })
}

/// Fundamental solution with respect to the weighted measure
/// `m(dy) = rho(y) dy`: `q(t,x,y) = p(t,x,y) / rho(y)`, which is
/// symmetric in `x` and `y`. Requires the matching condition
/// `rho2 sqrt(a2) = rho3 sqrt(a3)`.
pub fn kernel_m_symmetric(m: &PhysicalMedium, t: f64, x: f64, y: f64) -> Result<KernelEval> {
    let params = m.to_sde_params();
    if !m.is_beta_matched() {
        return Err(Error::MatchingCondition {
            beta: params.beta,
            expected: 1.0 - params.q / params.r,
        });
    }
    let lebesgue = kernel_two_interface(&params, t, x, y)?;
    Ok(KernelEval {
        value: lebesgue.value / m.density_at(y),
        form: KernelForm::MSymmetric,
        convention: lebesgue.convention,
    })
}

/// Physical-coordinate window outside which a kernel from `x` at time `t`
/// carries less than ~1e-31 of its mass: `|s(y) - s(x)| <= 12 sqrt(t)`.
pub fn integration_window(params: &SdeParams, x: f64, t: f64) -> (f64, f64) {
    let sc = params.scale();
    let u = sc.s(x);
    let m = 12.0 * t.sqrt();
    (sc.sigma(u - m), sc.sigma(u + m))
}

/// Everything needed to integrate a two-sided tail: window that also
/// covers the image charge at the interface.
pub fn integration_window_with_images(params: &SdeParams, x: f64, t: f64) -> (f64, f64) {
    let (lo, hi) = integration_window(params, x, t);
    let sc = params.scale();
    let m = 12.0 * t.sqrt();
    (lo.min(sc.sigma(-m)), hi.max(sc.sigma(m)))
}

/// Moments of Gaussian type needed to sanity-check Aronson-type bounds:
/// search constants `c1, c2` bracketing `kern` between
/// `c1^{-1} t^{-1/2} exp(-c2 d^2/t)` and `c1 t^{-1/2} exp(-d^2/(c2 t))`.
/// Returns the smallest workable `(c1, c2)` from a fixed ladder, or
/// `None` if none below the cap works.
pub fn gaussian_bracket(
    samples: &[(f64, f64, f64, f64)], // (t, x, y, kernel value)
    cap: f64,
) -> Option<(f64, f64)> {
    let ladder = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];
    for &c2 in &ladder {
        if c2 > cap {
            break;
        }
        let mut c1_needed: f64 = 1.0;
        let mut feasible = true;
        for &(t, x, y, k) in samples {
            if k <= 0.0 {
                feasible = false;
                break;
            }
            let d2 = (x - y) * (x - y);
            let upper = k * t.sqrt() * (d2 / (c2 * t)).exp();
            let lower = (-c2 * d2 / t).exp() / (t.sqrt() * k);
            if !upper.is_finite() || !lower.is_finite() {
                feasible = false;
                break;
            }
            c1_needed = c1_needed.max(upper).max(lower);
        }
        if feasible && c1_needed <= cap {
            return Some((c1_needed, c2));
        }
    }
    None
}
