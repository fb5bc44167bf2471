//! The three-layer medium, its SDE parametrization, and the piecewise
//! scale transforms connecting the two.
//!
//! A medium is the pair of piecewise-constant coefficient functions
//!
//! ```text
//! A(x)   = a1 (x <= 0) + a2 (0 < x <= a) + a3 (x > a)      diffusivity
//! rho(x) = rho1 (x <= 0) + rho2 (0 < x <= a) + rho3 (x > a)  density
//! ```
//!
//! The associated diffusion solves
//!
//! ```text
//! dY = ( p 1{Y<=0} + q 1{0<Y<=a} + r 1{Y>a} ) dB
//!      + alpha/2 dL^0(Y) + beta/2 dL^a(Y)
//! ```
//!
//! with `p = sqrt(a1)`, `q = sqrt(a2)`, `r = sqrt(a3)`,
//! `alpha = 1 - rho1 a1 / (rho2 a2)` and `beta = 1 - rho2 a2 / (rho3 a3)`,
//! where `L^w` is the (one-sided) semimartingale local time at `w`. The
//! densities only enter through those two ratios, so the map from physics
//! to SDE parameters has a one-parameter gauge: scaling all `rho_i` by a
//! common factor changes nothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::SingleInterface;

/// Relative tolerance used when testing the matching condition
/// `rho2 sqrt(a2) = rho3 sqrt(a3)` (equivalently `beta = 1 - q/r`).
pub const MATCHING_TOL: f64 = 1e-12;

/// One material layer: diffusivity `a_i` and density `rho_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub diffusivity: f64,
    pub density: f64,
}

/// The physical description: interface position `a > 0` plus three layers
/// ordered left to right (`x <= 0`, `0 < x <= a`, `x > a`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalMedium {
    pub a: f64,
    pub layers: [Layer; 3],
}

/// Which of the three regions a point belongs to. Region boundaries
/// follow the closed-left convention of the coefficient functions:
/// `x <= 0`, `0 < x <= a`, `x > a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Lower,
    Middle,
    Upper,
}

impl Region {
    pub fn classify(x: f64, a: f64) -> Region {
        if x <= 0.0 {
            Region::Lower
        } else if x <= a {
            Region::Middle
        } else {
            Region::Upper
        }
    }

    pub fn index(self) -> usize {
        match self {
            Region::Lower => 0,
            Region::Middle => 1,
            Region::Upper => 2,
        }
    }
}

impl PhysicalMedium {
    pub fn new(a: f64, diffusivities: [f64; 3], densities: [f64; 3]) -> Result<Self> {
        let layers = [
            Layer { diffusivity: diffusivities[0], density: densities[0] },
            Layer { diffusivity: diffusivities[1], density: densities[1] },
            Layer { diffusivity: diffusivities[2], density: densities[2] },
        ];
        let medium = PhysicalMedium { a, layers };
        medium.validate()?;
        Ok(medium)
    }

    /// Parse the canonical JSON descriptor
    /// `{"a": ..., "layers": [{"diffusivity": ..., "density": ...} x3]}`,
    /// validating all invariants.
    pub fn from_json(text: &str) -> Result<Self> {
        let medium: PhysicalMedium = serde_json::from_str(text)?;
        medium.validate()?;
        Ok(medium)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("a", self.a)?;
        for layer in &self.layers {
            check_positive("diffusivity", layer.diffusivity)?;
            check_positive("density", layer.density)?;
        }
        Ok(())
    }

    pub fn diffusivity_at(&self, x: f64) -> f64 {
        self.layers[Region::classify(x, self.a).index()].diffusivity
    }

    pub fn density_at(&self, x: f64) -> f64 {
        self.layers[Region::classify(x, self.a).index()].density
    }

    /// `rho_2 sqrt(a_2) = rho_3 sqrt(a_3)` up to [`MATCHING_TOL`]; exactly
    /// when the two-interface transition density has a closed form.
    pub fn is_beta_matched(&self) -> bool {
        let lhs = self.layers[1].density * self.layers[1].diffusivity.sqrt();
        let rhs = self.layers[2].density * self.layers[2].diffusivity.sqrt();
        (lhs - rhs).abs() <= MATCHING_TOL * lhs.abs().max(rhs.abs())
    }

    /// The SDE parametrization of this medium.
    pub fn to_sde_params(&self) -> SdeParams {
        let [l1, l2, l3] = self.layers;
        let kappa1 = l1.density * l1.diffusivity;
        let kappa2 = l2.density * l2.diffusivity;
        let kappa3 = l3.density * l3.diffusivity;
        SdeParams::new(
            l1.diffusivity.sqrt(),
            l2.diffusivity.sqrt(),
            l3.diffusivity.sqrt(),
            1.0 - kappa1 / kappa2,
            1.0 - kappa2 / kappa3,
            self.a,
        )
        .expect("valid medium always yields valid SDE parameters")
    }
}

/// SDE-level description: region volatilities `p, q, r`, local-time drift
/// weights `alpha, beta < 1`, and the interface position `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
}

impl SdeParams {
    pub fn new(p: f64, q: f64, r: f64, alpha: f64, beta: f64, a: f64) -> Result<Self> {
        check_positive("p", p)?;
        check_positive("q", q)?;
        check_positive("r", r)?;
        check_positive("a", a)?;
        if !alpha.is_finite() || alpha >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                constraint: "must be finite and < 1",
            });
        }
        if !beta.is_finite() || beta >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                constraint: "must be finite and < 1",
            });
        }
        let params = SdeParams { p, q, r, alpha, beta, a };
        // Automatic given positivity and alpha, beta < 1.
        assert!(params.p - params.q * (params.alpha - 1.0) > 0.0);
        assert!(params.q - params.r * (params.beta - 1.0) > 0.0);
        Ok(params)
    }

    /// Reflection coefficient of the interface at 0:
    /// `(p + q(alpha-1)) / (p - q(alpha-1))`, always in (-1, 1).
    pub fn gamma_at_zero(&self) -> f64 {
        (self.p + self.q * (self.alpha - 1.0)) / (self.p - self.q * (self.alpha - 1.0))
    }

    /// Reflection coefficient of the interface at `a`:
    /// `(q + r(beta-1)) / (q - r(beta-1))`.
    pub fn gamma_at_a(&self) -> f64 {
        (self.q + self.r * (self.beta - 1.0)) / (self.q - self.r * (self.beta - 1.0))
    }

    /// `beta = 1 - q/r` up to [`MATCHING_TOL`].
    pub fn is_beta_matched(&self) -> bool {
        (self.beta - (1.0 - self.q / self.r)).abs() <= MATCHING_TOL
    }

    pub fn scale(&self) -> ScaleFunctions {
        ScaleFunctions { p: self.p, q: self.q, r: self.r, a: self.a }
    }

    /// The one-interface diffusion at 0 with volatility `p` below and `q`
    /// above (the nearest-interface surrogate for points left of `a/2`).
    pub fn interface_at_zero(&self) -> SingleInterface {
        SingleInterface { lo: self.p, hi: self.q, skew: self.alpha, at: 0.0 }
    }

    /// The one-interface diffusion at `a` with volatility `q` below and
    /// `r` above (the surrogate for points right of `a/2`).
    pub fn interface_at_a(&self) -> SingleInterface {
        SingleInterface { lo: self.q, hi: self.r, skew: self.beta, at: self.a }
    }

    /// Reconstruct a physical medium, fixing the density gauge by
    /// `rho_2 = 1`: the densities are only determined up to a common
    /// positive factor.
    pub fn to_physical_medium(&self) -> PhysicalMedium {
        let (a1, a2, a3) = (self.p * self.p, self.q * self.q, self.r * self.r);
        let rho2 = 1.0;
        let rho1 = (1.0 - self.alpha) * rho2 * a2 / a1;
        let rho3 = rho2 * a2 / ((1.0 - self.beta) * a3);
        PhysicalMedium::new(self.a, [a1, a2, a3], [rho1, rho2, rho3])
            .expect("valid parameters always yield a valid medium")
    }
}

/// The piecewise-linear changes of variable that straighten the
/// diffusivity out of the SDE:
///
/// ```text
/// s(x)     = x/p (x < 0), x/q (0 <= x <= a), (x-a)/r + a/q (x > a)
/// sigma(y) = inverse of s
/// f(x)     = x/p (x <= 0), x/q (x > 0)            one interface at 0
/// g(x)     = (x-a)/q (x <= a), (x-a)/r (x > a)    one interface at a
/// phi(x)   = a + (r/q)(x-a)^+ - (x-a)^-           graft of the upper leg
/// ```
///
/// `s` maps the two-interface diffusion to a process with unit volatility
/// and skew points at `0` and `s(a)`; `f` and `g` do the same for the
/// one-interface diffusions; `phi` maps the one-interface diffusion at 0
/// (volatilities `p|q`) to the two-interface diffusion with
/// `beta = 1 - q/r` by rescaling everything above `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFunctions {
    p: f64,
    q: f64,
    r: f64,
    a: f64,
}

impl ScaleFunctions {
    /// Image of the upper interface, `s(a) = a/q`.
    pub fn s_a(&self) -> f64 {
        self.a / self.q
    }

    pub fn s(&self, x: f64) -> f64 {
        if x < 0.0 {
            x / self.p
        } else if x <= self.a {
            x / self.q
        } else {
            (x - self.a) / self.r + self.a / self.q
        }
    }

    pub fn sigma(&self, y: f64) -> f64 {
        let s_a = self.s_a();
        if y < 0.0 {
            self.p * y
        } else if y <= s_a {
            self.q * y
        } else {
            self.r * (y - s_a) + self.a
        }
    }

    /// Left derivative of `s` (closed-left region convention).
    pub fn s_left(&self, x: f64) -> f64 {
        match Region::classify(x, self.a) {
            Region::Lower => 1.0 / self.p,
            Region::Middle => 1.0 / self.q,
            Region::Upper => 1.0 / self.r,
        }
    }

    /// Left derivative of `sigma`.
    pub fn sigma_left(&self, y: f64) -> f64 {
        match Region::classify(y, self.s_a()) {
            Region::Lower => self.p,
            Region::Middle => self.q,
            Region::Upper => self.r,
        }
    }

    /// Scale map of the one-interface diffusion at 0.
    pub fn f(&self, x: f64) -> f64 {
        if x <= 0.0 {
            x / self.p
        } else {
            x / self.q
        }
    }

    /// Scale map of the one-interface diffusion at `a`, centred so that
    /// `g(a) = 0`.
    pub fn g(&self, x: f64) -> f64 {
        if x <= self.a {
            (x - self.a) / self.q
        } else {
            (x - self.a) / self.r
        }
    }

    /// Graft transform `phi(x) = a + (r/q)(x-a)^+ - (x-a)^-`: identity at
    /// and below `a`, slope `r/q` above.
    pub fn phi(&self, x: f64) -> f64 {
        if x <= self.a {
            x
        } else {
            self.a + self.r / self.q * (x - self.a)
        }
    }

    pub fn phi_inverse(&self, y: f64) -> f64 {
        if y <= self.a {
            y
        } else {
            self.a + self.q / self.r * (y - self.a)
        }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite { name, value });
    }
    if value <= 0.0 {
        return Err(Error::InvalidParameter { name, value, constraint: "must be > 0" });
    }
    Ok(())
}
