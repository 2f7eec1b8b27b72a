//! Construction constants and their feasibility certificate.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Constants certified to satisfy every sufficient condition.
    Strict,
    /// User-chosen ratio; failed conditions are informational and the verifiers decide.
    Relaxed,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Relaxed => "relaxed",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantBundle {
    pub mode: Mode,
    pub c_star: f64,
    pub big_c_star: f64,
    pub gamma: f64,
    /// Packing constant `N`.
    pub n_pack: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub alpha5: f64,
    pub alpha6: f64,
    pub r0: f64,
    pub r: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Number of close parent pairs a block may need, `N(N-1)/2`.
pub fn pair_bound(n_pack: usize) -> usize {
    n_pack * n_pack.saturating_sub(1) / 2
}

/// Closed form `C* (1+γ)(2+γ) (γ^j - 1)/(γ - 1)`, with the `γ → 1` limit `C*(1+γ)(2+γ) j`.
pub fn beta(big_c_star: f64, gamma: f64, j: u32) -> f64 {
    let lead = big_c_star * (1.0 + gamma) * (2.0 + gamma);
    let h = gamma - 1.0;
    if j == 0 {
        return 0.0;
    }
    if h.abs() < 1e-300 {
        return lead * j as f64;
    }
    // (γ^j - 1)/(γ - 1) without cancellation near γ = 1
    lead * libm::expm1(j as f64 * libm::log1p(h)) / h
}

/// `β_0 = 0`, `β_j = γ β_{j-1} + (1+γ)(2+γ) C*`.
pub fn beta_recurrence(big_c_star: f64, gamma: f64, j: u32) -> f64 {
    let step = (1.0 + gamma) * (2.0 + gamma) * big_c_star;
    (0..j).fold(0.0, |b, _| gamma * b + step)
}

/// The sufficient conditions checked on every bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    /// `r/(1-r) α₁ < min(α₂, α₃ - C*)`
    Ratio,
    /// `α₁ > α₃ > max(C*, 1) γ`
    Tc1,
    /// `(1+γ) α₂ < min(α₁ - α₃, c*)`
    Tc2,
    /// `r C* < α₂`
    Tc3,
    /// `(1+γ)(α₂ + α₆ r + C* r) < c*`
    Tc4,
    /// `(1+γ) α₂ + (4+γ) α₆ r + (2+γ) C* r < α₁ - α₃`
    Tc5,
    /// `α₅ = α₂ - α₁ r/(1-r) > 0`
    InnerBall,
    /// `C₃ = α₃ - C* - α₁ r/(1-r) > 0`
    Chain,
}

impl Condition {
    pub const ALL: [Condition; 8] = [
        Condition::Ratio,
        Condition::Tc1,
        Condition::Tc2,
        Condition::Tc3,
        Condition::Tc4,
        Condition::Tc5,
        Condition::InnerBall,
        Condition::Chain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Ratio => "ratio",
            Condition::Tc1 => "TC1",
            Condition::Tc2 => "TC2",
            Condition::Tc3 => "TC3",
            Condition::Tc4 => "TC4",
            Condition::Tc5 => "TC5",
            Condition::InnerBall => "alpha5>0",
            Condition::Chain => "C3>0",
        }
    }
}

/// One inequality `lhs < rhs` evaluated numerically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub lhs: f64,
    pub rhs: f64,
}

impl ConditionCheck {
    pub fn holds(&self) -> bool {
        self.lhs < self.rhs
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Every condition with `r` in place of `r₀`.
pub fn evaluate(b: &ConstantBundle, r: f64) -> Vec<ConditionCheck> {
    let g = b.gamma;
    let grow = r / (1.0 - r) * b.alpha1;
    Condition::ALL
        .iter()
        .map(|&condition| {
            let (lhs, rhs) = match condition {
                Condition::Ratio => (grow, b.alpha2.min(b.alpha3 - b.big_c_star)),
                // chained: α₃ - max(C*,1)γ > 0 and α₁ - α₃ > 0 reported as the smaller margin
                Condition::Tc1 => {
                    let floor = b.big_c_star.max(1.0) * g;
                    let margin = (b.alpha1 - b.alpha3).min(b.alpha3 - floor);
                    (0.0, margin)
                }
                Condition::Tc2 => ((1.0 + g) * b.alpha2, (b.alpha1 - b.alpha3).min(b.c_star)),
                Condition::Tc3 => (r * b.big_c_star, b.alpha2),
                Condition::Tc4 => ((1.0 + g) * (b.alpha2 + b.alpha6 * r + b.big_c_star * r), b.c_star),
                Condition::Tc5 => (
                    (1.0 + g) * b.alpha2 + (4.0 + g) * b.alpha6 * r + (2.0 + g) * b.big_c_star * r,
                    b.alpha1 - b.alpha3,
                ),
                Condition::InnerBall => (0.0, b.alpha2 - grow),
                Condition::Chain => (0.0, b.alpha3 - b.big_c_star - grow),
            };
            ConditionCheck { condition, lhs, rhs }
        })
        .collect()
}

/// The failing subset of [`evaluate`]; empty iff every condition holds at `r`.
pub fn check_feasible(b: &ConstantBundle, r: f64) -> Vec<ConditionCheck> {
    evaluate(b, r).into_iter().filter(|c| !c.holds()).collect()
}

fn check_inputs(c_star: f64, big_c_star: f64, gamma: f64, n_pack: usize) -> Result<()> {
    if !(c_star > 0.0 && c_star <= big_c_star && big_c_star.is_finite()) {
        return Err(Error::InvalidInput(format!("need 0 < c* <= C*, got {c_star}, {big_c_star}")));
    }
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!("need gamma > 1, got {gamma}")));
    }
    if n_pack == 0 {
        return Err(Error::InvalidInput("need N >= 1".into()));
    }
    Ok(())
}

/// Optional replacements for the recipe's alphas.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AlphaOverrides {
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub alpha3: Option<f64>,
    pub alpha6: Option<f64>,
}

fn recipe(c_star: f64, big_c_star: f64, gamma: f64, n_pack: usize, o: &AlphaOverrides) -> (f64, f64, f64, f64) {
    let alpha3 = o.alpha3.unwrap_or(1.05 * big_c_star.max(1.0) * gamma);
    let alpha1 = o.alpha1.unwrap_or((2.0 * alpha3).max(alpha3 + 2.0 * c_star));
    let alpha2 = o.alpha2.unwrap_or(0.9 * (alpha1 - alpha3).min(c_star) / (1.0 + gamma));
    let alpha6 = o.alpha6.unwrap_or(beta(big_c_star, gamma, pair_bound(n_pack) as u32));
    (alpha1, alpha2, alpha3, alpha6)
}

fn finish(
    mode: Mode,
    (c_star, big_c_star, gamma, n_pack): (f64, f64, f64, usize),
    (alpha1, alpha2, alpha3, alpha6): (f64, f64, f64, f64),
    r0: f64,
    r: f64,
) -> ConstantBundle {
    let alpha4 = alpha1 / (1.0 - r0);
    let alpha5 = alpha2 - alpha1 * r0 / (1.0 - r0);
    ConstantBundle {
        mode,
        c_star,
        big_c_star,
        gamma,
        n_pack,
        alpha1,
        alpha2,
        alpha3,
        alpha4,
        alpha5,
        alpha6,
        r0,
        r,
        c1: alpha5,
        c2: alpha4,
        c3: alpha3 - big_c_star - alpha4 * r0,
    }
}

/// Largest ratios admitted by each `r`-dependent condition, in the order ratio, TC3, TC4, TC5.
pub fn ratio_bounds(c_star: f64, big_c_star: f64, gamma: f64, alphas: (f64, f64, f64, f64)) -> [f64; 4] {
    let (a1, a2, a3, a6) = alphas;
    let t = a2.min(a3 - big_c_star) / a1;
    [
        t / (1.0 + t),
        a2 / big_c_star,
        (c_star / (1.0 + gamma) - a2) / (a6 + big_c_star),
        (a1 - a3 - (1.0 + gamma) * a2) / ((4.0 + gamma) * a6 + (2.0 + gamma) * big_c_star),
    ]
}

/// Strict bundle from the fixed recipe, with `r = r₀ = 0.9 ·` the tightest ratio bound.
pub fn derive_constants(c_star: f64, big_c_star: f64, gamma: f64, n_pack: usize) -> Result<ConstantBundle> {
    check_inputs(c_star, big_c_star, gamma, n_pack)?;
    let alphas = recipe(c_star, big_c_star, gamma, n_pack, &AlphaOverrides::default());
    let tightest = ratio_bounds(c_star, big_c_star, gamma, alphas).iter().copied().fold(1.0, f64::min);
    if !(tightest > 0.0) || !alphas.3.is_finite() {
        return Err(Error::Infeasible(format!("no admissible ratio (bound {tightest})")));
    }
    let r0 = 0.9 * tightest;
    let bundle = finish(Mode::Strict, (c_star, big_c_star, gamma, n_pack), alphas, r0, r0);
    if let Some(c) = check_feasible(&bundle, r0).first() {
        return Err(Error::Infeasible(format!("{} fails: {} >= {}", c.condition.name(), c.lhs, c.rhs)));
    }
    Ok(bundle)
}

/// Relaxed bundle at a user ratio `r`; `r₀` is set to `r` so `α₄, α₅, C₃` are evaluated there.
pub fn relaxed_constants(
    c_star: f64,
    big_c_star: f64,
    gamma: f64,
    n_pack: usize,
    r: f64,
    overrides: &AlphaOverrides,
) -> Result<ConstantBundle> {
    check_inputs(c_star, big_c_star, gamma, n_pack)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidInput(format!("ratio {r} outside (0,1)")));
    }
    let alphas = recipe(c_star, big_c_star, gamma, n_pack, overrides);
    let (a1, a2, a3, a6) = alphas;
    if !(a1 > 0.0 && a2 > 0.0 && a3 > 0.0 && a6 >= 0.0) {
        return Err(Error::InvalidInput(format!("alphas must be positive, got {alphas:?}")));
    }
    Ok(finish(Mode::Relaxed, (c_star, big_c_star, gamma, n_pack), alphas, r, r))
}

impl ConstantBundle {
    /// Strict bundle running at a smaller ratio; larger ratios are rejected naming a condition.
    pub fn with_ratio(&self, r: f64) -> Result<ConstantBundle> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidInput(format!("ratio {r} outside (0,1)")));
        }
        if self.mode == Mode::Strict && r > self.r0 {
            let why = match check_feasible(self, r).first() {
                Some(c) => format!("{} fails at r = {r}: {} >= {}", c.condition.name(), c.lhs, c.rhs),
                None => format!("r = {r} exceeds the certified r0 = {}", self.r0),
            };
            return Err(Error::Infeasible(why));
        }
        let mut b = self.clone();
        b.r = r;
        if self.mode == Mode::Relaxed {
            b = finish(
                Mode::Relaxed,
                (b.c_star, b.big_c_star, b.gamma, b.n_pack),
                (b.alpha1, b.alpha2, b.alpha3, b.alpha6),
                r,
                r,
            );
        }
        Ok(b)
    }

    /// `m = N(N-1)/2`.
    pub fn pair_bound(&self) -> usize {
        pair_bound(self.n_pack)
    }

    pub fn beta(&self, j: u32) -> f64 {
        beta(self.big_c_star, self.gamma, j)
    }
}
