use std::fmt;
use std::str::FromStr;

use crate::error::{IfflError, Result};
use crate::scalar::Scalar;

/// How `x` represses `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `y' = c u / x - delta y (+ Hill term)`: `x` inhibits production of `y`.
    ProductionInhibition,
    /// `y' = c u - delta x y`: `x` accelerates degradation of `y`.
    Degradation,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::ProductionInhibition => "production",
            Variant::Degradation => "degradation",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "production" | "production_inhibition" | "ProductionInhibition" => {
                Ok(Variant::ProductionInhibition)
            }
            "degradation" | "Degradation" => Ok(Variant::Degradation),
            other => Err(format!(
                "unknown variant `{other}` (expected `production` or `degradation`)"
            )),
        }
    }
}

/// Rate constants of the model together with the variant selector.
///
/// `v_max`, `k_half` and `n_hill` describe the autocatalytic Hill term
/// `V y^n / (K^n + y^n)`; it is switched off by `v_max = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub delta: T,
    pub kappa: T,
    pub lambda: T,
    pub v_max: T,
    pub k_half: T,
    pub n_hill: T,
    pub variant: Variant,
}

impl<T: Scalar> ModelParams<T> {
    /// Production-inhibition model without autocatalysis.
    pub fn new(a: T, b: T, c: T, delta: T, kappa: T, lambda: T) -> Self {
        ModelParams {
            a,
            b,
            c,
            delta,
            kappa,
            lambda,
            v_max: T::zero(),
            k_half: T::one(),
            n_hill: T::lit(2.0),
            variant: Variant::ProductionInhibition,
        }
    }

    pub fn with_autocatalysis(mut self, v_max: T, k_half: T, n_hill: T) -> Self {
        self.v_max = v_max;
        self.k_half = k_half;
        self.n_hill = n_hill;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_kappa(mut self, kappa: T) -> Self {
        self.kappa = kappa;
        self
    }

    /// True when the Hill self-activation term is present.
    pub fn autocatalytic(&self) -> bool {
        self.v_max > T::zero()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("delta", self.delta),
            ("kappa", self.kappa),
            ("K", self.k_half),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= T::zero() {
                return Err(IfflError::InvalidParameter {
                    name,
                    reason: format!("must be a finite positive number, got {value}"),
                });
            }
        }
        if !self.lambda.is_finite() {
            return Err(IfflError::InvalidParameter {
                name: "lambda",
                reason: format!("must be finite, got {}", self.lambda),
            });
        }
        if !self.v_max.is_finite() || self.v_max < T::zero() {
            return Err(IfflError::InvalidParameter {
                name: "V",
                reason: format!("must be finite and non-negative, got {}", self.v_max),
            });
        }
        if !self.n_hill.is_finite() || self.n_hill < T::one() {
            return Err(IfflError::InvalidParameter {
                name: "n",
                reason: format!("Hill exponent must be >= 1, got {}", self.n_hill),
            });
        }
        if self.variant == Variant::Degradation && self.autocatalytic() {
            return Err(IfflError::InvalidParameter {
                name: "V",
                reason: "the degradation variant has no autocatalytic term; set V = 0".into(),
            });
        }
        Ok(())
    }

    pub fn validated(self) -> Result<Self> {
        self.validate().map(|_| self)
    }

    pub fn get(&self, name: ParamName) -> T {
        match name {
            ParamName::A => self.a,
            ParamName::B => self.b,
            ParamName::C => self.c,
            ParamName::Delta => self.delta,
            ParamName::Kappa => self.kappa,
            ParamName::Lambda => self.lambda,
            ParamName::V => self.v_max,
            ParamName::K => self.k_half,
            ParamName::N => self.n_hill,
        }
    }

    /// Copy with one parameter replaced. The result is not validated.
    pub fn with(mut self, name: ParamName, value: T) -> Self {
        let slot = match name {
            ParamName::A => &mut self.a,
            ParamName::B => &mut self.b,
            ParamName::C => &mut self.c,
            ParamName::Delta => &mut self.delta,
            ParamName::Kappa => &mut self.kappa,
            ParamName::Lambda => &mut self.lambda,
            ParamName::V => &mut self.v_max,
            ParamName::K => &mut self.k_half,
            ParamName::N => &mut self.n_hill,
        };
        *slot = value;
        self
    }
}

/// Numeric fields of [`ModelParams`], used to name sweep axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamName {
    A,
    B,
    C,
    Delta,
    Kappa,
    Lambda,
    V,
    K,
    N,
}

impl ParamName {
    pub const ALL: [ParamName; 9] = [
        ParamName::A,
        ParamName::B,
        ParamName::C,
        ParamName::Delta,
        ParamName::Kappa,
        ParamName::Lambda,
        ParamName::V,
        ParamName::K,
        ParamName::N,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ParamName::A => "a",
            ParamName::B => "b",
            ParamName::C => "c",
            ParamName::Delta => "delta",
            ParamName::Kappa => "kappa",
            ParamName::Lambda => "lambda",
            ParamName::V => "V",
            ParamName::K => "K",
            ParamName::N => "n",
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ParamName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ParamName::ALL
            .into_iter()
            .find(|p| p.key() == s)
            .ok_or_else(|| format!("unknown parameter `{s}`"))
    }
}
