use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// `R^d -> R^d` map used as a covector integrand, with its Jacobian
/// (row-major, row = output coordinate).
pub trait VectorField {
    fn value(&self, x: &[f64]) -> Vec<f64>;
    fn jacobian(&self, x: &[f64]) -> Vec<f64>;
}

/// `C^2` function `R^d -> R`.
pub trait ScalarC2 {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn hessian(&self, x: &[f64]) -> Vec<f64>;
}

/// Scalar functions `g` used coordinatewise: as a vector field
/// `x -> (g(x_1), ..., g(x_d))`, and as the scalar `x -> sum_i g(x_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Elementary {
    Identity,
    Square,
    Cube,
    Sin,
    Cos,
    Exp,
}

impl Elementary {
    pub fn f(self, x: f64) -> f64 {
        match self {
            Elementary::Identity => x,
            Elementary::Square => x * x,
            Elementary::Cube => x * x * x,
            Elementary::Sin => x.sin(),
            Elementary::Cos => x.cos(),
            Elementary::Exp => x.exp(),
        }
    }

    pub fn df(self, x: f64) -> f64 {
        match self {
            Elementary::Identity => 1.0,
            Elementary::Square => 2.0 * x,
            Elementary::Cube => 3.0 * x * x,
            Elementary::Sin => x.cos(),
            Elementary::Cos => -x.sin(),
            Elementary::Exp => x.exp(),
        }
    }

    pub fn d2f(self, x: f64) -> f64 {
        match self {
            Elementary::Identity => 0.0,
            Elementary::Square => 2.0,
            Elementary::Cube => 6.0 * x,
            Elementary::Sin => -x.sin(),
            Elementary::Cos => -x.cos(),
            Elementary::Exp => x.exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Elementary::Identity => "identity",
            Elementary::Square => "square",
            Elementary::Cube => "cube",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Exp => "exp",
        }
    }
}

impl fmt::Display for Elementary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Elementary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "identity" | "x" => Elementary::Identity,
            "square" | "x2" => Elementary::Square,
            "cube" | "x3" => Elementary::Cube,
            "sin" => Elementary::Sin,
            "cos" => Elementary::Cos,
            "exp" => Elementary::Exp,
            other => return Err(Error::UnknownKind(other.to_string())),
        })
    }
}

fn diagonal(d: usize, f: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = f(i);
    }
    m
}

impl VectorField for Elementary {
    fn value(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| self.f(v)).collect()
    }

    fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        diagonal(x.len(), |i| self.df(x[i]))
    }
}

impl ScalarC2 for Elementary {
    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|&v| self.f(v)).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| self.df(v)).collect()
    }

    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        diagonal(x.len(), |i| self.d2f(x[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let all = [
            Elementary::Identity,
            Elementary::Square,
            Elementary::Cube,
            Elementary::Sin,
            Elementary::Cos,
            Elementary::Exp,
        ];
        let h = 1e-5;
        for g in all {
            for x in [-1.3, 0.0, 0.4, 2.0] {
                let d1 = (g.f(x + h) - g.f(x - h)) / (2.0 * h);
                let d2 = (g.df(x + h) - g.df(x - h)) / (2.0 * h);
                assert!((d1 - g.df(x)).abs() < 1e-8, "{g} {x}");
                assert!((d2 - g.d2f(x)).abs() < 1e-8, "{g} {x}");
            }
            assert_eq!(g.name().parse::<Elementary>().unwrap(), g);
        }
        assert!("tan".parse::<Elementary>().is_err());
    }

    #[test]
    fn coordinatewise_forms() {
        let x = [0.5, -2.0];
        assert_eq!(VectorField::value(&Elementary::Square, &x), vec![0.25, 4.0]);
        assert_eq!(VectorField::jacobian(&Elementary::Square, &x), vec![1.0, 0.0, 0.0, -4.0]);
        assert_eq!(ScalarC2::value(&Elementary::Square, &x), 4.25);
        assert_eq!(ScalarC2::hessian(&Elementary::Cube, &x), vec![3.0, 0.0, 0.0, -12.0]);
    }
}
