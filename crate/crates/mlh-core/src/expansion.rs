//! Exact moments and the small-time expansion of `u(t, x) = E[h(Y_t)]`.
//!
//! For initial data `h` that is piecewise smooth across the layers,
//!
//! ```text
//! u(t, x) = sum_{k=0}^{N} b_k(x) t^{k/2} + O(t^{(N+1)/2})   as t -> 0,
//! ```
//!
//! valid for every `x`, including the interface points, and for every
//! admissible parameter set -- no matching condition required. The
//! coefficients come from Taylor-expanding `h` around `x` and feeding in
//! the exact moments of the nearest one-interface diffusion, which are
//! finite combinations of `erfc_k` tail integrals:
//!
//! * away from an interface only the full-line Gaussian moments
//!   `D_k(x) = (1+(-1)^k) Gamma((k+1)/2) / sqrt(pi) * vol(x)^k` survive,
//!   so odd orders vanish and `b_k = 2^{k/2-1} D_k(x) h^(k)(x) / k!`;
//! * at an interface the two one-sided Taylor halves carry asymmetric
//!   weights built from the reflection coefficient, and odd orders do
//!   contribute (the `sqrt(t)` term is the signature of the interface).
//!
//! Replacing the two-interface diffusion by its nearest one-interface
//! surrogate costs only `O(exp(-c a^2 / t))`, below any power of `t`, so
//! the expansion holds for the full process. Every closed form here is
//! cross-checked in the tests by quadrature against the corresponding
//! one-interface kernel.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{Region, SdeParams};
use crate::special::{self, erfc_k, gamma_half};

/// Exact binomial coefficient in integer arithmetic (valid for k <= 64).
fn binomial(k: usize, j: usize) -> f64 {
    let j = j.min(k - j);
    let mut c: u128 = 1;
    for i in 1..=j {
        c = c * (k - j + i) as u128 / i as u128;
    }
    c as f64
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// A dense polynomial with ascending coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial { coeffs: vec![c] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Exact order-th derivative at `x`.
    pub fn derivative_at(&self, order: usize, x: f64) -> f64 {
        if order >= self.coeffs.len() {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in (order..self.coeffs.len()).rev() {
            // falling factorial i (i-1) ... (i-order+1)
            let mut fall = 1.0;
            for m in 0..order {
                fall *= (i - m) as f64;
            }
            acc = acc * x + self.coeffs[i] * fall;
        }
        acc
    }
}

/// One piece of the initial data: a polynomial (the canonical corpus) or
/// a user-supplied analytic function with exact derivative callbacks
/// (`callback(order, x)` returns the order-th derivative at `x`; order 0
/// is the value itself).
#[derive(Clone)]
pub enum Piece {
    Poly(Polynomial),
    Analytic(Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Piece::Poly(p) => write!(f, "Poly({p:?})"),
            Piece::Analytic(_) => write!(f, "Analytic(..)"),
        }
    }
}

impl Piece {
    fn derivative_at(&self, order: usize, x: f64) -> f64 {
        match self {
            Piece::Poly(p) => p.derivative_at(order, x),
            Piece::Analytic(f) => f(order, x),
        }
    }
}

/// Initial data `h` given piece by piece over the three regions
/// (`x <= 0`, `0 < x <= a`, `x > a`), with exact derivatives up to order
/// `N + 1` where `N >= 1` is the expansion order.
///
/// Polynomial pieces of degree at most `N + 1` keep the Taylor data
/// exact. Polynomials are unbounded in the large; the optional clamp
/// window `[lo, hi]` bounds point evaluation (derivatives are never
/// clamped) and should be chosen wide enough that it never binds on the
/// working window -- at desk-scale times essentially all diffusion mass
/// stays within a few volatility lengths of the start point.
#[derive(Debug, Clone)]
pub struct PiecewiseInitialData {
    pieces: [Piece; 3],
    order: usize,
    clamp: Option<(f64, f64)>,
}

impl PiecewiseInitialData {
    pub fn new(pieces: [Piece; 3], order: usize, clamp: Option<(f64, f64)>) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidConfig(format!(
                "expansion order must be >= 1, got {order}"
            )));
        }
        if order + 1 > special::MAX_ORDER {
            return Err(Error::OrderCap { order, cap: special::MAX_ORDER - 1 });
        }
        for (i, piece) in pieces.iter().enumerate() {
            if let Piece::Poly(p) = piece {
                if p.degree() > order + 1 {
                    return Err(Error::DerivativeOrder { piece: i, order: p.degree() });
                }
            }
        }
        if let Some((lo, hi)) = clamp {
            if !(lo < hi) {
                return Err(Error::InvalidConfig(format!(
                    "clamp window must satisfy lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(PiecewiseInitialData { pieces, order, clamp })
    }

    pub fn from_polynomials(
        coeffs: [Vec<f64>; 3],
        order: usize,
        clamp: Option<(f64, f64)>,
    ) -> Result<Self> {
        let [c1, c2, c3] = coeffs;
        PiecewiseInitialData::new(
            [
                Piece::Poly(Polynomial::new(c1)),
                Piece::Poly(Polynomial::new(c2)),
                Piece::Poly(Polynomial::new(c3)),
            ],
            order,
            clamp,
        )
    }

    /// Constant initial data.
    pub fn constant(c: f64, order: usize) -> Self {
        PiecewiseInitialData::new(
            [
                Piece::Poly(Polynomial::constant(c)),
                Piece::Poly(Polynomial::constant(c)),
                Piece::Poly(Polynomial::constant(c)),
            ],
            order.max(1),
            None,
        )
        .expect("constant data is always valid")
    }

    /// Expansion order `N`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Point evaluation with the closed-left region convention; applies
    /// the clamp window when present.
    pub fn eval(&self, a: f64, x: f64) -> f64 {
        let v = self.pieces[Region::classify(x, a).index()].derivative_at(0, x);
        match self.clamp {
            Some((lo, hi)) => v.clamp(lo, hi),
            None => v,
        }
    }

    /// Exact derivative of the piece owning `region`, one-sided at the
    /// interface points. Orders above `N + 1` are unavailable.
    pub fn derivative(&self, region: Region, order: usize, x: f64) -> Result<f64> {
        if order > self.order + 1 {
            return Err(Error::DerivativeOrder { piece: region.index(), order });
        }
        Ok(self.pieces[region.index()].derivative_at(order, x))
    }
}

/// Which branch of the coefficient formula applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionBranch {
    InteriorLower,
    InteriorMiddle,
    InteriorUpper,
    AtZero,
    AtA,
}

impl ExpansionBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            ExpansionBranch::InteriorLower => "interior_left",
            ExpansionBranch::InteriorMiddle => "interior_mid",
            ExpansionBranch::InteriorUpper => "interior_right",
            ExpansionBranch::AtZero => "x0",
            ExpansionBranch::AtA => "xa",
        }
    }

    fn classify(x: f64, a: f64) -> ExpansionBranch {
        if x == 0.0 {
            ExpansionBranch::AtZero
        } else if x == a {
            ExpansionBranch::AtA
        } else {
            match Region::classify(x, a) {
                Region::Lower => ExpansionBranch::InteriorLower,
                Region::Middle => ExpansionBranch::InteriorMiddle,
                Region::Upper => ExpansionBranch::InteriorUpper,
            }
        }
    }
}

/// Coefficients `b_0 .. b_N` at a point plus the evaluated partial sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionResult {
    pub x: f64,
    pub coefficients: Vec<f64>,
    pub partial_sum: f64,
    pub branch: ExpansionBranch,
}

impl ExpansionResult {
    /// `sum_k b_k t^{k/2}` at another time.
    pub fn partial_sum_at(&self, t: f64) -> f64 {
        let rt = t.sqrt();
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, b)| b * rt.powi(k as i32))
            .sum()
    }
}

/// An interface point of the medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterfacePoint {
    Zero,
    A,
}

fn check_moment_order(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            value: 0.0,
            constraint: "moment order must be >= 1",
        });
    }
    if k > special::MAX_ORDER {
        return Err(Error::OrderCap { order: k, cap: special::MAX_ORDER });
    }
    Ok(())
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

fn sign_pow(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `E[(Xi_t^x - x)^k]` for `x` away from the interfaces, where `Xi` is
/// the one-interface diffusion owning `x` (interface at 0 for `x < a`,
/// interface at `a` for `x > a`).
///
/// Each case is the same shape: a leading same-side tail moment plus a
/// binomial sum whose coefficients carry the geometric weights of the
/// direct and reflected Gaussian images across the interface.
pub fn moment_exact(params: &SdeParams, k: usize, x: f64, t: f64) -> Result<f64> {
    check_moment_order(k)?;
    check_time(t)?;
    if x == 0.0 || x == params.a {
        return Err(Error::AtInterface(x));
    }
    let (p, q, r) = (params.p, params.q, params.r);
    let (alpha, beta) = (params.alpha, params.beta);
    let rt2 = (2.0 * t).sqrt();
    let half_pow = |e: f64| (2.0f64).powf(e);

    let assemble = |lead_sign: f64,
                    vol: f64,
                    lead_arg: f64,
                    sum_arg: f64,
                    coeff: &dyn Fn(usize) -> f64|
     -> Result<f64> {
        let lead = lead_sign
            * vol.powi(k as i32)
            * half_pow(k as f64 / 2.0 - 1.0)
            * t.powf(k as f64 / 2.0)
            * erfc_k(k, lead_arg)?;
        let mut acc = 0.0;
        for j in 0..=k {
            acc += binomial(k, j)
                * half_pow(j as f64 / 2.0 - 1.0)
                * t.powf(j as f64 / 2.0)
                * coeff(j)
                * erfc_k(j, sum_arg)?;
        }
        Ok(lead + acc)
    };

    match Region::classify(x, params.a) {
        Region::Lower => {
            let denom = p - q * (alpha - 1.0);
            let z = x / (p * rt2);
            let coeff = |j: usize| {
                x.powi((k - j) as i32) / denom
                    * ((p + q * (alpha - 1.0))
                        * p.powi(j as i32)
                        * sign_pow(k + 1)
                        * (2.0f64).powi((k - j) as i32)
                        + 2.0 * p * q.powi(j as i32) * (q / p - 1.0).powi((k - j) as i32))
            };
            assemble(sign_pow(k), p, z, -z, &coeff)
        }
        Region::Middle => {
            let denom = p - q * (alpha - 1.0);
            let z = x / (q * rt2);
            let coeff = |j: usize| {
                x.powi((k - j) as i32) / denom
                    * (-2.0
                        * q
                        * (alpha - 1.0)
                        * sign_pow(j)
                        * p.powi(j as i32)
                        * (p / q - 1.0).powi((k - j) as i32)
                        + (p + q * (alpha - 1.0))
                            * q.powi(j as i32)
                            * (-2.0f64).powi((k - j) as i32))
            };
            assemble(1.0, q, -z, z, &coeff)
        }
        Region::Upper => {
            let denom = q - r * (beta - 1.0);
            let xi = x - params.a;
            let z = xi / (r * rt2);
            let coeff = |j: usize| {
                xi.powi((k - j) as i32) / denom
                    * (-2.0
                        * r
                        * (beta - 1.0)
                        * sign_pow(j)
                        * q.powi(j as i32)
                        * (q / r - 1.0).powi((k - j) as i32)
                        + (q + r * (beta - 1.0))
                            * r.powi(j as i32)
                            * (-2.0f64).powi((k - j) as i32))
            };
            assemble(1.0, r, -z, z, &coeff)
        }
    }
}

/// Region-restricted moment `E[(Xi_t^x - x)^k 1_region]` at an interface
/// point, computed from the one-interface diffusion owning that point.
/// The far-side entries (`Lower` at `a`, `Upper` at 0, and the
/// `erfc_k(a / (q sqrt(2t)))` corrections) vanish faster than any power
/// of `t`.
pub fn moment_interface(
    params: &SdeParams,
    k: usize,
    point: InterfacePoint,
    region: Region,
    t: f64,
) -> Result<f64> {
    check_moment_order(k)?;
    check_time(t)?;
    let (p, q, r) = (params.p, params.q, params.r);
    let (alpha, beta) = (params.alpha, params.beta);
    let gh = gamma_half(k)? * special::INV_SQRT_PI;
    let two_t_k = (2.0 * t).powf(k as f64 / 2.0);
    let far = erfc_k(k, params.a / (q * (2.0 * t).sqrt()))?;
    let value = match point {
        InterfacePoint::Zero => {
            let denom = p - q * (alpha - 1.0);
            match region {
                Region::Lower => {
                    q * (1.0 - alpha) / denom * sign_pow(k) * p.powi(k as i32) * two_t_k * gh
                }
                Region::Middle => p / denom * q.powi(k as i32) * two_t_k * (gh - far),
                Region::Upper => p / denom * q.powi(k as i32) * two_t_k * far,
            }
        }
        InterfacePoint::A => {
            let denom = q - r * (beta - 1.0);
            match region {
                Region::Lower => {
                    r * (1.0 - beta) / denom * sign_pow(k) * q.powi(k as i32) * two_t_k * far
                }
                Region::Middle => {
                    r * (1.0 - beta) * sign_pow(k) / denom * q.powi(k as i32) * two_t_k * (gh - far)
                }
                Region::Upper => q / denom * r.powi(k as i32) * two_t_k * gh,
            }
        }
    };
    Ok(value)
}

/// Full-line Gaussian moment weight
/// `D_k(x) = (1+(-1)^k) Gamma((k+1)/2)/sqrt(pi) * vol(x)^k`: zero for
/// odd `k`, and the exact small-time limit of
/// `E[(Xi_t^x-x)^k] / (2^{k/2-1} t^{k/2})` away from the interfaces.
pub fn d_k(params: &SdeParams, k: usize, x: f64) -> Result<f64> {
    if k > special::MAX_ORDER {
        return Err(Error::OrderCap { order: k, cap: special::MAX_ORDER });
    }
    if x == 0.0 || x == params.a {
        return Err(Error::AtInterface(x));
    }
    if k % 2 == 1 {
        return Ok(0.0);
    }
    let vol = match Region::classify(x, params.a) {
        Region::Lower => params.p,
        Region::Middle => params.q,
        Region::Upper => params.r,
    };
    Ok(2.0 * gamma_half(k)? * special::INV_SQRT_PI * vol.powi(k as i32))
}

/// Expansion coefficient `b_k(x)`.
///
/// Away from the interfaces, `b_k = 2^{k/2-1} D_k(x) h^(k)(x) / k!` and
/// odd orders are exactly zero (returned as literal `0.0`, not floating
/// noise). At an interface the one-sided derivatives of the two
/// neighbouring pieces enter with asymmetric weights; in particular
/// `b_0` there is the average of the one-sided limits of `h`, weighted
/// by `rho sqrt(A)` on each side.
pub fn b_k(params: &SdeParams, h: &PiecewiseInitialData, k: usize, x: f64) -> Result<f64> {
    if k > h.order() {
        return Err(Error::DerivativeOrder {
            piece: Region::classify(x, params.a).index(),
            order: k,
        });
    }
    let (p, q, r) = (params.p, params.q, params.r);
    let (alpha, beta) = (params.alpha, params.beta);
    let scale = |denom: f64| -> Result<f64> {
        Ok((2.0f64).powf(k as f64 / 2.0) * gamma_half(k)? * special::INV_SQRT_PI
            / (factorial(k) * denom))
    };
    match ExpansionBranch::classify(x, params.a) {
        ExpansionBranch::AtZero => {
            let d1 = h.derivative(Region::Lower, k, 0.0)?;
            let d2 = h.derivative(Region::Middle, k, 0.0)?;
            Ok(scale(p - q * (alpha - 1.0))?
                * (d1 * q * (1.0 - alpha) * sign_pow(k) * p.powi(k as i32)
                    + d2 * p * q.powi(k as i32)))
        }
        ExpansionBranch::AtA => {
            let d2 = h.derivative(Region::Middle, k, params.a)?;
            let d3 = h.derivative(Region::Upper, k, params.a)?;
            Ok(scale(q - r * (beta - 1.0))?
                * (d2 * r * (1.0 - beta) * sign_pow(k) * q.powi(k as i32)
                    + d3 * q * r.powi(k as i32)))
        }
        _ => {
            if k % 2 == 1 {
                return Ok(0.0);
            }
            let region = Region::classify(x, params.a);
            let deriv = h.derivative(region, k, x)?;
            Ok((2.0f64).powf(k as f64 / 2.0 - 1.0) * d_k(params, k, x)? * deriv / factorial(k))
        }
    }
}

/// Evaluate the expansion `sum_{k<=N} b_k(x) t^{k/2}` at `(x, t)`.
pub fn expand_u(
    params: &SdeParams,
    h: &PiecewiseInitialData,
    x: f64,
    t: f64,
) -> Result<ExpansionResult> {
    check_time(t)?;
    let n = h.order();
    let mut coefficients = Vec::with_capacity(n + 1);
    for k in 0..=n {
        coefficients.push(b_k(params, h, k, x)?);
    }
    let mut result = ExpansionResult {
        x,
        coefficients,
        partial_sum: 0.0,
        branch: ExpansionBranch::classify(x, params.a),
    };
    result.partial_sum = result.partial_sum_at(t);
    Ok(result)
}

/// A centred-moment closed form bound to `(params, k, x)`, exposing the
/// moment as a function of time.
#[derive(Debug, Clone, Copy)]
pub struct MomentTable {
    params: SdeParams,
    pub k: usize,
    pub x: f64,
    pub region: Region,
}

impl MomentTable {
    pub fn new(params: &SdeParams, k: usize, x: f64) -> Result<Self> {
        check_moment_order(k)?;
        if x == 0.0 || x == params.a {
            return Err(Error::AtInterface(x));
        }
        Ok(MomentTable { params: *params, k, x, region: Region::classify(x, params.a) })
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        moment_exact(&self.params, self.k, self.x, t)
    }
}
