//! Turns parameter values into a concrete Hamiltonian.

use num_complex::Complex64;

use super::config::{ConfigError, RunConfig};
use crate::canonical::{CanonicalTransform, Generator, QuadraticHamiltonian};
use crate::spectra::{quadratic_critical_frequency, ThreeParamOscillator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `p^2/2 + k x^2/2`, `k = 1` unless given.
    Sho,
    /// `h11 p^2 + i h12 (xp + px) + h22 x^2`.
    ThreeParam,
    /// Oscillator under `rath_mallick(rm-alpha, rm-beta)`.
    RathMallick,
    /// `(p + i beta x)^2/2 + (alpha^2 + beta^2) x^2/2`.
    Ahmed,
    /// `(p - gamma x)^2/2 + k x^2/2`, `k = alpha^2 - gamma^2` unless given.
    Gamma,
    /// Oscillator under the transform generated by `(a, b, c)`.
    Generator,
    /// Oscillator under `gauge(g)`.
    Gauge,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Sho => "sho",
            Family::ThreeParam => "three-param",
            Family::RathMallick => "rm",
            Family::Ahmed => "ahmed",
            Family::Gamma => "gamma",
            Family::Generator => "generator",
            Family::Gauge => "gauge",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "sho" => Family::Sho,
            "three-param" | "h" => Family::ThreeParam,
            "rm" | "rath-mallick" => Family::RathMallick,
            "ahmed" => Family::Ahmed,
            "gamma" => Family::Gamma,
            "generator" => Family::Generator,
            "gauge" => Family::Gauge,
            other => return Err(ConfigError(format!("unknown family '{other}'"))),
        })
    }

    /// Parameters the family reads; anything else given is an error.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Family::Sho => &["k"],
            Family::ThreeParam => &["h11", "h12", "h22"],
            Family::RathMallick => &["rm-alpha", "rm-beta", "lambda"],
            Family::Ahmed => &["alpha", "beta"],
            Family::Gamma => &["alpha", "gamma", "k"],
            Family::Generator => &["a", "b", "c"],
            Family::Gauge => &["g"],
        }
    }

    /// From the parameter names present.
    pub fn infer(keys: &[&str]) -> Result<Self, ConfigError> {
        let has = |k: &str| keys.contains(&k);
        let mut found = Vec::new();
        if has("h11") || has("h12") || has("h22") {
            found.push(Family::ThreeParam);
        }
        if has("rm-alpha") || has("rm-beta") || has("lambda") {
            found.push(Family::RathMallick);
        }
        if has("gamma") {
            found.push(Family::Gamma);
        } else if has("alpha") || has("beta") {
            found.push(Family::Ahmed);
        }
        if has("a") || has("b") || has("c") {
            found.push(Family::Generator);
        }
        if has("g") {
            found.push(Family::Gauge);
        }
        match found.as_slice() {
            [] => Ok(Family::Sho),
            [one] => Ok(*one),
            many => Err(ConfigError(format!(
                "parameters mix families: {}; pass --family",
                many.iter().map(|f| f.name()).collect::<Vec<_>>().join(", ")
            ))),
        }
    }
}

/// A quadratic Hamiltonian with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub family: Family,
    /// Hermitian (or at least explicitly solvable) starting point.
    pub base: QuadraticHamiltonian,
    pub transform: Option<CanonicalTransform>,
    pub quadratic: QuadraticHamiltonian,
    /// Set when the quadratic has the three-parameter form.
    pub oscillator: Option<ThreeParamOscillator>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const HALF: Complex64 = Complex64::new(0.5, 0.0);

impl Model {
    pub fn from_config(cfg: &RunConfig) -> Result<Self, ConfigError> {
        let keys: Vec<&str> = cfg
            .params
            .keys()
            .map(String::as_str)
            .filter(|k| *k != "omega")
            .collect();
        let family = match &cfg.family {
            Some(f) => Family::parse(f)?,
            None => Family::infer(&keys)?,
        };
        if let Some(k) = keys.iter().find(|k| !family.keys().contains(k)) {
            return Err(ConfigError(format!(
                "parameter '{k}' does not apply to family '{}'",
                family.name()
            )));
        }
        let lib = |e: crate::Error| ConfigError(e.to_string());
        let (base, transform) = match family {
            Family::Sho => {
                let k = cfg.complex("k")?.unwrap_or(Complex64::new(1.0, 0.0));
                (QuadraticHamiltonian::new(HALF, ZERO, HALF * k), None)
            }
            Family::ThreeParam => {
                let h = ThreeParamOscillator::new(
                    cfg.real("h11")?.unwrap_or(0.0),
                    cfg.real("h12")?.unwrap_or(0.0),
                    cfg.real("h22")?.unwrap_or(0.0),
                )
                .map_err(lib)?;
                (h.to_quadratic(), None)
            }
            Family::RathMallick => {
                if cfg.params.contains_key("rm-alpha") && cfg.params.contains_key("lambda") {
                    return Err(ConfigError(
                        "--lambda is an alias of --rm-alpha; give one".into(),
                    ));
                }
                let a = match cfg.complex("rm-alpha")? {
                    Some(a) => a,
                    None => cfg.complex("lambda")?.unwrap_or(ZERO),
                };
                let b = cfg.complex("rm-beta")?.unwrap_or(ZERO);
                let u = CanonicalTransform::rath_mallick(a, b).map_err(lib)?;
                (QuadraticHamiltonian::harmonic(), Some(u))
            }
            Family::Ahmed => {
                let alpha = cfg.real("alpha")?.unwrap_or(1.0);
                let beta = cfg.complex("beta")?.unwrap_or(ZERO);
                let k = Complex64::new(alpha * alpha, 0.0) + beta * beta;
                (
                    QuadraticHamiltonian::new(HALF, ZERO, HALF * k),
                    Some(CanonicalTransform::gauge_complex(beta)),
                )
            }
            Family::Gamma => {
                let gamma = cfg.real("gamma")?.unwrap_or(0.0);
                let k = match cfg.real("k")? {
                    Some(k) => {
                        if cfg.params.contains_key("alpha") {
                            return Err(ConfigError(
                                "give either --alpha or --k for the gamma family".into(),
                            ));
                        }
                        k
                    }
                    None => {
                        let alpha = cfg.real("alpha")?.unwrap_or(1.0);
                        alpha * alpha - gamma * gamma
                    }
                };
                let base = QuadraticHamiltonian::with_force_constant(k);
                // p -> p - gamma x
                (
                    base,
                    Some(CanonicalTransform::gauge_complex(Complex64::new(
                        0.0, gamma,
                    ))),
                )
            }
            Family::Generator => {
                let g = Generator::new(
                    cfg.complex("a")?.unwrap_or(ZERO),
                    cfg.complex("b")?.unwrap_or(ZERO),
                    cfg.complex("c")?.unwrap_or(ZERO),
                );
                (
                    QuadraticHamiltonian::harmonic(),
                    Some(CanonicalTransform::from_generator(&g)),
                )
            }
            Family::Gauge => {
                let g = cfg.complex("g")?.unwrap_or(ZERO);
                (
                    QuadraticHamiltonian::harmonic(),
                    Some(CanonicalTransform::gauge_complex(g)),
                )
            }
        };
        let quadratic = match &transform {
            Some(u) => u.apply_to_quadratic(&base),
            None => base,
        };
        let oscillator = if quadratic.has_pt_form(1e-14) {
            ThreeParamOscillator::from_quadratic(&quadratic).ok()
        } else {
            None
        };
        Ok(Self {
            family,
            base,
            transform,
            quadratic,
            oscillator,
        })
    }

    /// Half level spacing of the base Hamiltonian; its levels are `Omega (2n + 1)`.
    pub fn base_spacing(&self) -> Complex64 {
        self.base.level_spacing_half()
    }

    /// Signed normalizability margin. Transforms of the unit oscillator use
    /// the transform's own margin; other families use `Re` of the critical
    /// frequency, the width of the ground-state Gaussian.
    pub fn margin(&self) -> Option<f64> {
        match (self.family, &self.transform) {
            (Family::RathMallick | Family::Generator | Family::Gauge, Some(u)) => {
                u.normalizable().ok().map(|m| m.margin)
            }
            _ => quadratic_critical_frequency(&self.quadratic).map(|w| w.re),
        }
    }
}
