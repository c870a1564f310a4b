//! The potential `𝒩` in `i u_t - (-Δ)^{s/2} u + 𝒩(|u|) u = 0`.
//!
//! Two families are supported:
//!
//! * [`CjNonlinearity`]: a `C^J` function on `(0, ∞)` with derivative decay
//!   `|𝒩⁽ⁿ⁾(x)| <= c_n x^{γ-n}` (powers, `log x`, `log(1 + x^γ)`, or a
//!   user-supplied function with its derivatives);
//! * [`SeriesNonlinearity`]: `𝒩(x) = Σ_k a_k x^{γ_k}` with complex `a_k` and
//!   arbitrary real `γ_k` (exponential and sine-quotient generators, finite
//!   combinations of inverse powers, or explicit coefficient lists).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FnlsError, Result};
use crate::jet::Jet;
use crate::norms::certified_infimum;
use crate::quadrature::adaptive_simpson;
use crate::spectral::{oversample, project, PhysicalField, SpectralField};

/// Highest derivative order carried by the built-in `C^J` families.
pub const MAX_DERIVATIVE_ORDER: usize = 8;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// User-supplied potential with its derivatives.
#[derive(Clone)]
pub struct CustomPotential {
    pub eval: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    pub deriv: Arc<dyn Fn(usize, f64) -> Complex64 + Send + Sync>,
    /// Whether `𝒩` blows up (or is undefined) at 0.
    pub singular: bool,
}

impl fmt::Debug for CustomPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPotential").field("singular", &self.singular).finish()
    }
}

#[derive(Debug, Clone)]
pub enum CjKind {
    /// `coeff · x^γ`.
    Power { gamma: f64, coeff: f64 },
    /// `log x`.
    Log,
    /// `log(1 + x^γ)`.
    Log1p { gamma: f64 },
    Custom(CustomPotential),
}

#[derive(Debug, Clone)]
pub struct CjNonlinearity {
    kind: CjKind,
    gamma: f64,
    decay_constants: Vec<f64>,
    label: String,
}

fn falling_factorial(x: f64, n: usize) -> f64 {
    (0..n).map(|j| x - j as f64).product()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl CjNonlinearity {
    pub fn power(gamma: f64, coeff: f64) -> Self {
        let decay_constants = (1..=MAX_DERIVATIVE_ORDER)
            .map(|n| {
                let c = (coeff * falling_factorial(gamma, n)).abs();
                if c > 0.0 {
                    c
                } else {
                    1.0
                }
            })
            .collect();
        let label = if coeff == 1.0 {
            format!("power({gamma})")
        } else {
            format!("{coeff}*power({gamma})")
        };
        CjNonlinearity { kind: CjKind::Power { gamma, coeff }, gamma, decay_constants, label }
    }

    /// `log x`; derivatives decay like `x^{-n}`, recorded as `γ = 0`.
    pub fn log() -> Self {
        CjNonlinearity {
            kind: CjKind::Log,
            gamma: 0.0,
            decay_constants: (1..=MAX_DERIVATIVE_ORDER).map(|n| factorial(n - 1)).collect(),
            label: "log".into(),
        }
    }

    /// `log(1 + x^γ)`; `x^n 𝒩⁽ⁿ⁾(x)` is bounded for every `n`, so `γ = 0` with
    /// constants measured on a wide logarithmic grid (5% headroom).
    pub fn log1p(gamma: f64) -> Self {
        let mut nl = CjNonlinearity {
            kind: CjKind::Log1p { gamma },
            gamma: 0.0,
            decay_constants: vec![1.0; MAX_DERIVATIVE_ORDER],
            label: format!("log1p({gamma})"),
        };
        if gamma != 0.0 {
            let span = (50.0 / gamma.abs()).min(700.0);
            let samples = 4000;
            let mut sup = vec![0.0f64; MAX_DERIVATIVE_ORDER];
            for i in 0..=samples {
                let y = -span + 2.0 * span * i as f64 / samples as f64;
                let x = y.exp();
                let jet = Self::log1p_jet(gamma, x, MAX_DERIVATIVE_ORDER);
                for (n, s) in sup.iter_mut().enumerate() {
                    *s = s.max(jet.derivative(n + 1).abs() * x.powi(n as i32 + 1));
                }
            }
            nl.decay_constants =
                sup.into_iter().map(|s| if s > 0.0 { 1.05 * s } else { 1.0 }).collect();
        }
        nl
    }

    pub fn custom(
        label: impl Into<String>,
        potential: CustomPotential,
        gamma: f64,
        decay_constants: Vec<f64>,
    ) -> Result<Self> {
        if decay_constants.iter().any(|&c| !(c > 0.0)) {
            return Err(FnlsError::InvalidParameter("decay constants must be positive".into()));
        }
        Ok(CjNonlinearity {
            kind: CjKind::Custom(potential),
            gamma,
            decay_constants,
            label: label.into(),
        })
    }

    fn log1p_jet(gamma: f64, x: f64, order: usize) -> Jet {
        Jet::variable(x, order).powf(gamma).add_scalar(1.0).ln()
    }

    pub fn kind(&self) -> &CjKind {
        &self.kind
    }

    /// Exponent `γ` of the derivative decay hypothesis.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `c_n` for `n = 1..`, as declared.
    pub fn decay_constants(&self) -> &[f64] {
        &self.decay_constants
    }

    pub fn decay_constant(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.decay_constants.get(i)).copied()
    }

    pub fn is_singular(&self) -> bool {
        match &self.kind {
            CjKind::Power { gamma, coeff } => *gamma < 0.0 && *coeff != 0.0,
            CjKind::Log => true,
            CjKind::Log1p { gamma } => *gamma < 0.0,
            CjKind::Custom(c) => c.singular,
        }
    }

    /// `𝒩(x)` without domain checks.
    pub fn eval(&self, x: f64) -> Complex64 {
        match &self.kind {
            CjKind::Power { gamma, coeff } => {
                if *coeff == 0.0 {
                    ZERO
                } else {
                    Complex64::new(coeff * x.powf(*gamma), 0.0)
                }
            }
            CjKind::Log => Complex64::new(x.ln(), 0.0),
            CjKind::Log1p { gamma } => Complex64::new(x.powf(*gamma).ln_1p(), 0.0),
            CjKind::Custom(c) => (c.eval)(x),
        }
    }

    /// `𝒩⁽ⁿ⁾(x)`; `n = 0` is the value itself.
    pub fn deriv(&self, n: usize, x: f64) -> Complex64 {
        if n == 0 {
            return self.eval(x);
        }
        match &self.kind {
            CjKind::Power { gamma, coeff } => {
                Complex64::new(coeff * falling_factorial(*gamma, n) * x.powf(gamma - n as f64), 0.0)
            }
            CjKind::Log => {
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                Complex64::new(sign * factorial(n - 1) * x.powi(-(n as i32)), 0.0)
            }
            CjKind::Log1p { gamma } => {
                Complex64::new(Self::log1p_jet(*gamma, x, n).derivative(n), 0.0)
            }
            CjKind::Custom(c) => (c.deriv)(n, x),
        }
    }

    /// Worst ratio `|𝒩⁽ⁿ⁾(x)| / (c_n x^{γ-n})` over `samples` log-spaced points
    /// in `[lo, hi]` and `n = 1..=j`; the decay hypothesis holds when `<= 1`.
    pub fn decay_check(&self, j: usize, lo: f64, hi: f64, samples: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for n in 1..=j {
            let cn = self.decay_constant(n).ok_or_else(|| {
                FnlsError::InvalidParameter(format!("no decay constant declared for n = {n}"))
            })?;
            for x in log_space(lo, hi, samples) {
                let bound = cn * x.powf(self.gamma - n as f64);
                worst = worst.max(self.deriv(n, x).norm() / bound);
            }
        }
        Ok(worst)
    }
}

pub(crate) fn log_space(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| {
        if n == 1 {
            lo
        } else {
            (a + (b - a) * i as f64 / (n - 1) as f64).exp()
        }
    })
}

/// Truncation policy for infinite series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub max_terms: usize,
    pub tail_tol: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { max_terms: 128, tail_tol: 1e-15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub coeff: Complex64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesNonlinearity {
    terms: Vec<SeriesTerm>,
    truncation: Truncation,
    /// `true` for finite sums, `false` for truncations of infinite series.
    exact: bool,
    label: String,
}

impl SeriesNonlinearity {
    /// A finite sum `Σ a_k x^{γ_k}` taken as exact.
    pub fn finite(terms: Vec<SeriesTerm>, label: impl Into<String>) -> Self {
        SeriesNonlinearity {
            terms,
            truncation: Truncation::default(),
            exact: true,
            label: label.into(),
        }
    }

    /// Leading terms of an infinite series, evaluated under `truncation`.
    pub fn truncated(
        terms: Vec<SeriesTerm>,
        truncation: Truncation,
        label: impl Into<String>,
    ) -> Self {
        SeriesNonlinearity { terms, truncation, exact: false, label: label.into() }
    }

    /// `e^{x^r} = Σ x^{rk}/k!`.
    pub fn exp(r: f64, truncation: Truncation) -> Self {
        let mut coeff = 1.0;
        let terms = (0..truncation.max_terms)
            .map(|k| {
                if k > 0 {
                    coeff /= k as f64;
                }
                SeriesTerm { coeff: Complex64::new(coeff, 0.0), exponent: r * k as f64 }
            })
            .collect();
        Self::truncated(terms, truncation, format!("exp({r})"))
    }

    /// `sin(x^{r₁}) / x^{r₂} = Σ (-1)^k/(2k+1)! · x^{2r₁k + r₁ - r₂}`.
    pub fn sin_quotient(r1: f64, r2: f64, truncation: Truncation) -> Self {
        let mut coeff = 1.0;
        let terms = (0..truncation.max_terms)
            .map(|k| {
                if k > 0 {
                    coeff /= -((2 * k) as f64 * (2 * k + 1) as f64);
                }
                SeriesTerm {
                    coeff: Complex64::new(coeff, 0.0),
                    exponent: 2.0 * r1 * k as f64 + r1 - r2,
                }
            })
            .collect();
        Self::truncated(terms, truncation, format!("sin_quotient({r1},{r2})"))
    }

    /// `Σ a_k / x^{ν_k}`.
    pub fn combined(terms: &[(Complex64, f64)]) -> Self {
        Self::finite(
            terms.iter().map(|&(a, nu)| SeriesTerm { coeff: a, exponent: -nu }).collect(),
            "combined",
        )
    }

    pub fn terms(&self) -> &[SeriesTerm] {
        &self.terms
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_singular(&self) -> bool {
        self.terms.iter().any(|t| t.exponent < 0.0 && t.coeff != ZERO)
    }

    pub fn has_real_coefficients(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.im == 0.0)
    }

    /// Multiply every coefficient by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= lambda;
        }
        out
    }

    /// Partial sum with the early-stopping rule for truncated series.
    pub fn eval(&self, x: f64) -> PotentialValue {
        let mut sum = ZERO;
        let mut tail = 0.0;
        for t in &self.terms {
            let term = t.coeff * x.powf(t.exponent);
            sum += term;
            if !self.exact && term.norm() < self.truncation.tail_tol {
                tail = term.norm();
                break;
            }
        }
        PotentialValue { value: sum, tail_bound: tail }
    }

    pub fn deriv(&self, n: usize, x: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coeff * falling_factorial(t.exponent, n) * x.powf(t.exponent - n as f64))
            .sum()
    }
}

/// Value of a potential with the tail estimate of a truncated series (zero
/// for closed forms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone)]
pub enum NonlinearitySpec {
    Cj(CjNonlinearity),
    Series(SeriesNonlinearity),
}

/// Named constructors for the built-in potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Builtin {
    Power { gamma: f64 },
    Log,
    Log1p { gamma: f64 },
    /// `-x^{-ν}`.
    InversePower { nu: f64 },
    Exp { r: f64 },
    SinQuotient { r1: f64, r2: f64 },
    /// `Σ a_k x^{-ν_k}`.
    Combined { terms: Vec<(Complex64, f64)> },
}

impl Builtin {
    /// Look up a built-in by name; `params` are the numeric parameters in
    /// declaration order.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Builtin> {
        let need = |n: usize| -> Result<()> {
            if params.len() != n {
                Err(FnlsError::InvalidParameter(format!(
                    "`{name}` takes {n} parameter(s), got {}",
                    params.len()
                )))
            } else {
                Ok(())
            }
        };
        Ok(match name {
            "power" => {
                need(1)?;
                Builtin::Power { gamma: params[0] }
            }
            "log" => {
                need(0)?;
                Builtin::Log
            }
            "log1p" | "log1p_gamma" => {
                need(1)?;
                Builtin::Log1p { gamma: params[0] }
            }
            "inverse_power" => {
                need(1)?;
                Builtin::InversePower { nu: params[0] }
            }
            "exp" | "exp_r" => {
                need(1)?;
                Builtin::Exp { r: params[0] }
            }
            "sin_quotient" => {
                need(2)?;
                Builtin::SinQuotient { r1: params[0], r2: params[1] }
            }
            "combined" => {
                if !params.len().is_multiple_of(2) {
                    return Err(FnlsError::InvalidParameter(
                        "`combined` takes (a_k, nu_k) pairs".into(),
                    ));
                }
                Builtin::Combined {
                    terms: params
                        .chunks(2)
                        .map(|p| (Complex64::new(p[0], 0.0), p[1]))
                        .collect(),
                }
            }
            other => return Err(FnlsError::UnknownNonlinearity(other.to_string())),
        })
    }

    pub fn build(&self, truncation: Truncation) -> NonlinearitySpec {
        match self {
            Builtin::Power { gamma } => NonlinearitySpec::Cj(CjNonlinearity::power(*gamma, 1.0)),
            Builtin::Log => NonlinearitySpec::Cj(CjNonlinearity::log()),
            Builtin::Log1p { gamma } => NonlinearitySpec::Cj(CjNonlinearity::log1p(*gamma)),
            Builtin::InversePower { nu } => {
                let mut nl = CjNonlinearity::power(-nu, -1.0);
                nl.label = format!("inverse_power({nu})");
                NonlinearitySpec::Cj(nl)
            }
            Builtin::Exp { r } => {
                NonlinearitySpec::Series(SeriesNonlinearity::exp(*r, truncation))
            }
            Builtin::SinQuotient { r1, r2 } => {
                NonlinearitySpec::Series(SeriesNonlinearity::sin_quotient(*r1, *r2, truncation))
            }
            Builtin::Combined { terms } => {
                NonlinearitySpec::Series(SeriesNonlinearity::combined(terms))
            }
        }
    }
}

/// Fully populated spec for a built-in with the default truncation.
pub fn builtin(b: &Builtin) -> NonlinearitySpec {
    b.build(Truncation::default())
}

impl NonlinearitySpec {
    /// `𝒩 ≡ 0`.
    pub fn zero() -> Self {
        let mut nl = CjNonlinearity::power(0.0, 0.0);
        nl.label = "zero".into();
        NonlinearitySpec::Cj(nl)
    }

    pub fn power(gamma: f64) -> Self {
        NonlinearitySpec::Cj(CjNonlinearity::power(gamma, 1.0))
    }

    pub fn log() -> Self {
        NonlinearitySpec::Cj(CjNonlinearity::log())
    }

    pub fn label(&self) -> &str {
        match self {
            NonlinearitySpec::Cj(c) => c.label(),
            NonlinearitySpec::Series(s) => s.label(),
        }
    }

    /// Whether `𝒩` is singular at 0, which makes the non-vanishing
    /// condition mandatory.
    pub fn is_singular(&self) -> bool {
        match self {
            NonlinearitySpec::Cj(c) => c.is_singular(),
            NonlinearitySpec::Series(s) => s.is_singular(),
        }
    }

    /// Whether `𝒩` takes real values, the setting in which mass and energy
    /// are conserved.
    pub fn is_real_valued(&self) -> bool {
        match self {
            NonlinearitySpec::Cj(c) => match c.kind() {
                CjKind::Custom(_) => [0.5, 1.0, 2.0].iter().all(|&x| c.eval(x).im == 0.0),
                _ => true,
            },
            NonlinearitySpec::Series(s) => s.has_real_coefficients(),
        }
    }

    /// `𝒩(x)` without domain checks; singular specs are only ever called
    /// after certification.
    #[inline]
    pub fn value(&self, x: f64) -> Complex64 {
        match self {
            NonlinearitySpec::Cj(c) => c.eval(x),
            NonlinearitySpec::Series(s) => s.eval(x).value,
        }
    }

    pub fn deriv(&self, n: usize, x: f64) -> Complex64 {
        match self {
            NonlinearitySpec::Cj(c) => c.deriv(n, x),
            NonlinearitySpec::Series(s) => s.deriv(n, x),
        }
    }
}

/// `𝒩(x)` with domain checking.
pub fn evaluate_potential(spec: &NonlinearitySpec, x: f64) -> Result<PotentialValue> {
    if x < 0.0 || !x.is_finite() || (x == 0.0 && spec.is_singular()) {
        return Err(FnlsError::Domain { label: spec.label().to_string(), x });
    }
    Ok(match spec {
        NonlinearitySpec::Cj(c) => PotentialValue { value: c.eval(x), tail_bound: 0.0 },
        NonlinearitySpec::Series(s) => s.eval(x),
    })
}

/// `𝒩(|u|)u` at every node of a physical field, in place.
pub fn apply_pointwise(spec: &NonlinearitySpec, field: &mut PhysicalField) {
    for z in field.samples_mut() {
        let r = z.norm();
        *z = if r == 0.0 { ZERO } else { spec.value(r) * *z };
    }
}

/// Pseudo-spectral `𝒩(|u|)u`: evaluate on a grid refined by
/// `oversample_factor`, transform back and truncate to the original band.
pub fn apply_nonlinear_term(
    spec: &NonlinearitySpec,
    field: &SpectralField,
    oversample_factor: usize,
) -> Result<SpectralField> {
    if spec.is_singular() {
        let bound = certified_infimum(field, oversample_factor.max(2))?;
        if bound <= 0.0 {
            return Err(FnlsError::NonVanishing { certified_inf: bound });
        }
    }
    let mut fine = oversample(field, oversample_factor)?;
    apply_pointwise(spec, &mut fine);
    project(&fine, field.grid())
}

/// `𝐍(τ) = ∫ 𝒩(ν) ν dν`, with the lower limit that was used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Antiderivative {
    pub value: Complex64,
    /// `true` when some term is not integrable at 0 (`γ <= -2`) and was
    /// integrated from 1 instead.
    pub base_point_one: bool,
}

fn power_antiderivative(gamma: f64, tau: f64) -> (f64, bool) {
    if gamma == -2.0 {
        (tau.ln(), true)
    } else if gamma < -2.0 {
        ((tau.powf(gamma + 2.0) - 1.0) / (gamma + 2.0), true)
    } else {
        (tau.powf(gamma + 2.0) / (gamma + 2.0), false)
    }
}

/// Base point for custom `C^J` potentials.
pub const CUSTOM_ANTIDERIVATIVE_BASE: f64 = 1.0;

pub fn big_n_antiderivative(spec: &NonlinearitySpec, tau: f64) -> Result<Antiderivative> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(FnlsError::Domain { label: spec.label().to_string(), x: tau });
    }
    let quad_tol = 1e-14 * tau.powi(2).max(1.0);
    Ok(match spec {
        NonlinearitySpec::Cj(c) => match c.kind() {
            CjKind::Power { gamma, coeff } => {
                let (v, one) = power_antiderivative(*gamma, tau);
                Antiderivative { value: Complex64::new(coeff * v, 0.0), base_point_one: one }
            }
            CjKind::Log => Antiderivative {
                value: Complex64::new(tau * tau * (2.0 * tau.ln() - 1.0) / 4.0, 0.0),
                base_point_one: false,
            },
            CjKind::Log1p { gamma } => {
                let g = *gamma;
                let f = move |v: f64| if v == 0.0 { 0.0 } else { v * v.powf(g).ln_1p() };
                Antiderivative {
                    value: Complex64::new(adaptive_simpson(&f, 0.0, tau, quad_tol), 0.0),
                    base_point_one: false,
                }
            }
            CjKind::Custom(p) => {
                let re = |v: f64| (p.eval)(v).re * v;
                let im = |v: f64| (p.eval)(v).im * v;
                let a = CUSTOM_ANTIDERIVATIVE_BASE;
                Antiderivative {
                    value: Complex64::new(
                        adaptive_simpson(&re, a, tau, quad_tol),
                        adaptive_simpson(&im, a, tau, quad_tol),
                    ),
                    base_point_one: true,
                }
            }
        },
        NonlinearitySpec::Series(s) => {
            let mut value = ZERO;
            let mut one = false;
            for t in s.terms() {
                let (v, b) = power_antiderivative(t.exponent, tau);
                value += t.coeff * v;
                one |= b;
            }
            Antiderivative { value, base_point_one: one }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn all_cj() -> Vec<CjNonlinearity> {
        vec![
            CjNonlinearity::power(2.0, 1.0),
            CjNonlinearity::power(-1.0, 1.0),
            CjNonlinearity::power(0.5, 1.0),
            CjNonlinearity::power(-2.5, -1.0),
            CjNonlinearity::log(),
            CjNonlinearity::log1p(1.0),
            CjNonlinearity::log1p(-0.7),
            CjNonlinearity::log1p(2.5),
        ]
    }

    #[test]
    fn power_example() {
        let NonlinearitySpec::Cj(p) = builtin(&Builtin::Power { gamma: 2.0 }) else {
            panic!()
        };
        assert_eq!(p.gamma(), 2.0);
        assert_eq!(p.eval(3.0), c(9.0, 0.0));
        assert_eq!(p.deriv(1, 3.0), c(6.0, 0.0));
    }

    #[test]
    fn log_derivative_formula() {
        let l = CjNonlinearity::log();
        for n in 1..=5 {
            for x in [0.3f64, 1.0, 4.0] {
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                let expect = sign * factorial(n - 1) * x.powi(-(n as i32));
                assert!((l.deriv(n, x).re - expect).abs() <= 1e-12 * expect.abs());
            }
        }
        assert_eq!(l.gamma(), 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for nl in all_cj() {
            for n in 1..=4 {
                for x in log_space(0.1, 10.0, 25) {
                    let h = 1e-5 * x;
                    let fd = (nl.deriv(n - 1, x + h) - nl.deriv(n - 1, x - h)) / (2.0 * h);
                    let exact = nl.deriv(n, x);
                    let scale = exact.norm().max(nl.deriv(n - 1, x).norm() / x).max(1e-8);
                    assert!(
                        (fd - exact).norm() <= 1e-6 * scale,
                        "{} n={n} x={x}: fd={fd} exact={exact}",
                        nl.label()
                    );
                }
            }
        }
    }

    #[test]
    fn decay_hypothesis_holds() {
        for nl in all_cj() {
            let worst = nl.decay_check(4, 1e-3, 1e3, 200).unwrap();
            assert!(worst <= 1.0 + 1e-12, "{}: worst ratio {worst}", nl.label());
        }
    }

    #[test]
    fn series_generators_match_closed_forms() {
        let e = SeriesNonlinearity::exp(1.0, Truncation::default());
        let expect = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (t, e) in e.terms().iter().zip(expect) {
            assert!((t.coeff.re - e).abs() < 1e-16);
        }
        let s = SeriesNonlinearity::sin_quotient(1.0, 0.0, Truncation::default());
        let expect = [1.0, -1.0 / 6.0, 1.0 / 120.0, -1.0 / 5040.0, 1.0 / 362880.0];
        for (k, (t, e)) in s.terms().iter().zip(expect).enumerate() {
            assert!((t.coeff.re - e).abs() < 1e-18);
            assert_eq!(t.exponent, (2 * k + 1) as f64);
        }

        for x in log_space(0.1, 3.0, 40) {
            let v = e.eval(x);
            assert!((v.value.re - x.exp()).abs() <= 1e-15 * x.exp().max(1.0) * 4.0);
            let r2 = 0.5;
            let sq = SeriesNonlinearity::sin_quotient(1.5, r2, Truncation::default());
            let direct = x.powf(1.5).sin() / x.powf(r2);
            assert!((sq.eval(x).value.re - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn evaluate_potential_examples() {
        let log = NonlinearitySpec::log();
        assert_eq!(evaluate_potential(&log, 1.0).unwrap().value, c(0.0, 0.0));
        assert!(evaluate_potential(&log, 0.0).is_err());
        let inv = NonlinearitySpec::power(-1.0);
        assert_eq!(evaluate_potential(&inv, 2.0).unwrap().value, c(0.5, 0.0));
        let e = builtin(&Builtin::Exp { r: 1.0 });
        let v = evaluate_potential(&e, 1.0).unwrap();
        assert!((v.value.re - std::f64::consts::E).abs() < Truncation::default().tail_tol);
        assert!(v.tail_bound < Truncation::default().tail_tol);
        assert!(evaluate_potential(&NonlinearitySpec::power(2.0), 0.0).is_ok());
        assert!(evaluate_potential(&NonlinearitySpec::power(2.0), -1.0).is_err());
    }

    #[test]
    fn inverse_power_sign() {
        let inv = builtin(&Builtin::InversePower { nu: 2.0 });
        assert_eq!(inv.value(2.0), c(-0.25, 0.0));
        assert!(inv.is_singular());
        assert!(matches!(
            Builtin::from_name("cosh", &[]),
            Err(FnlsError::UnknownNonlinearity(_))
        ));
    }

    #[test]
    fn nonlinear_term_examples() {
        let g = TorusGrid::new(1, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut f = SpectralField::constant(g, c(2.0, 0.5));
        for k in 1..4 {
            f.set_coeff(&[k], c(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)))
                .unwrap();
        }
        let out = apply_nonlinear_term(&NonlinearitySpec::power(0.0), &f, 2).unwrap();
        assert!(out.max_abs_diff(&f) < 1e-14);

        let cst = SpectralField::constant(g, c(-1.5, 2.0));
        let out = apply_nonlinear_term(&NonlinearitySpec::log(), &cst, 2).unwrap();
        let expect = SpectralField::constant(g, c(-1.5, 2.0) * 2.5f64.ln());
        assert!(out.max_abs_diff(&expect) < 1e-14);

        let a = c(1.2, -0.4);
        let w = SpectralField::plane_wave(g, a, &[3]).unwrap();
        for spec in [
            NonlinearitySpec::power(2.0),
            NonlinearitySpec::power(-1.0),
            NonlinearitySpec::log(),
            builtin(&Builtin::Exp { r: 1.0 }),
        ] {
            let out = apply_nonlinear_term(&spec, &w, 2).unwrap();
            let expect = w.scale(spec.value(a.norm()));
            assert!(out.max_abs_diff(&expect) < 1e-13, "{}", spec.label());
        }

        let err = apply_nonlinear_term(&NonlinearitySpec::log(), &SpectralField::zeros(g), 2);
        assert!(matches!(err, Err(FnlsError::NonVanishing { .. })));
        assert!(apply_nonlinear_term(&NonlinearitySpec::power(2.0), &SpectralField::zeros(g), 2)
            .is_ok());
    }

    #[test]
    fn gauge_invariance() {
        let g = TorusGrid::new(1, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut f = SpectralField::constant(g, c(2.0, 0.0));
        for k in -3..=3 {
            if k != 0 {
                f.set_coeff(&[k], c(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)))
                    .unwrap();
            }
        }
        let phase = Complex64::from_polar(1.0, 0.83);
        for spec in [NonlinearitySpec::power(3.0), NonlinearitySpec::log()] {
            let lhs = apply_nonlinear_term(&spec, &f.scale(phase), 2).unwrap();
            let rhs = apply_nonlinear_term(&spec, &f, 2).unwrap().scale(phase);
            assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        }
    }

    #[test]
    fn antiderivative_examples() {
        let p2 = NonlinearitySpec::power(2.0);
        assert!((big_n_antiderivative(&p2, 1.0).unwrap().value.re - 0.25).abs() < 1e-15);
        let log = NonlinearitySpec::log();
        assert!((big_n_antiderivative(&log, 1.0).unwrap().value.re + 0.25).abs() < 1e-15);
        let p0 = NonlinearitySpec::power(0.0);
        assert!((big_n_antiderivative(&p0, 3.0).unwrap().value.re - 4.5).abs() < 1e-14);
        let sing = NonlinearitySpec::power(-3.0);
        let a = big_n_antiderivative(&sing, 2.0).unwrap();
        assert!(a.base_point_one);
        assert!((a.value.re - 0.5).abs() < 1e-15);
        assert!(big_n_antiderivative(&p2, 0.0).is_err());
    }

    #[test]
    fn antiderivative_derivative_is_potential_times_tau() {
        let specs = vec![
            NonlinearitySpec::power(2.0),
            NonlinearitySpec::power(-1.0),
            NonlinearitySpec::power(-2.0),
            NonlinearitySpec::power(-3.0),
            NonlinearitySpec::log(),
            builtin(&Builtin::Log1p { gamma: 1.0 }),
            builtin(&Builtin::Log1p { gamma: -0.5 }),
            builtin(&Builtin::Exp { r: 1.0 }),
            builtin(&Builtin::SinQuotient { r1: 1.0, r2: 0.5 }),
            builtin(&Builtin::Combined { terms: vec![(c(1.0, 0.0), 1.0), (c(-0.5, 0.0), 2.0)] }),
        ];
        for spec in specs {
            for tau in [0.3, 1.0, 1.7, 2.5] {
                let h = 1e-4 * tau;
                let fd = (big_n_antiderivative(&spec, tau + h).unwrap().value
                    - big_n_antiderivative(&spec, tau - h).unwrap().value)
                    / (2.0 * h);
                let exact = spec.value(tau) * tau;
                assert!(
                    (fd - exact).norm() <= 1e-6 * exact.norm().max(1.0),
                    "{} tau={tau}: {fd} vs {exact}",
                    spec.label()
                );
            }
        }
    }
}
