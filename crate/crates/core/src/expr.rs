//! Expression trees for the system nonlinearities f_i(x, z, w).
//!
//! The grammar is deliberately closed: nonnegative constants, component
//! values z_1..z_m, the functional value w, sums, differences, products,
//! exp and integer powers. Every expression is a total continuous function
//! of (z, w), and every expression can be bounded by interval arithmetic —
//! the certificate layer depends on both properties.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarExpr {
    /// Nonnegative literal.
    Const(f64),
    /// Component value z_i (1-based index, matching the component list).
    Z(usize),
    /// The functional value w.
    W,
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Sub(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Exp(Box<ScalarExpr>),
    /// Integer power.
    Pow(Box<ScalarExpr>, u32),
}

#[allow(clippy::should_implement_trait)] // builder-style associated constructors
impl ScalarExpr {
    pub fn constant(v: f64) -> Self {
        ScalarExpr::Const(v)
    }

    pub fn z(i: usize) -> Self {
        ScalarExpr::Z(i)
    }

    pub fn w() -> Self {
        ScalarExpr::W
    }

    pub fn add(a: ScalarExpr, b: ScalarExpr) -> Self {
        ScalarExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: ScalarExpr, b: ScalarExpr) -> Self {
        ScalarExpr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: ScalarExpr, b: ScalarExpr) -> Self {
        ScalarExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn exp(a: ScalarExpr) -> Self {
        ScalarExpr::Exp(Box::new(a))
    }

    pub fn pow(a: ScalarExpr, k: u32) -> Self {
        ScalarExpr::Pow(Box::new(a), k)
    }

    /// Check well-formedness against a system with `m` components:
    /// constants nonnegative, z-indices in 1..=m.
    pub fn validate(&self, m: usize) -> Result<()> {
        match self {
            ScalarExpr::Const(v) => {
                if *v >= 0.0 && v.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!(
                        "expression constants must be finite and nonnegative, got {v}"
                    )))
                }
            }
            ScalarExpr::Z(i) => {
                if *i >= 1 && *i <= m {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!(
                        "component index z{i} out of range 1..={m}"
                    )))
                }
            }
            ScalarExpr::W => Ok(()),
            ScalarExpr::Add(a, b) | ScalarExpr::Sub(a, b) | ScalarExpr::Mul(a, b) => {
                a.validate(m)?;
                b.validate(m)
            }
            ScalarExpr::Exp(a) => a.validate(m),
            ScalarExpr::Pow(a, _) => a.validate(m),
        }
    }

    pub fn uses_w(&self) -> bool {
        match self {
            ScalarExpr::W => true,
            ScalarExpr::Const(_) | ScalarExpr::Z(_) => false,
            ScalarExpr::Add(a, b) | ScalarExpr::Sub(a, b) | ScalarExpr::Mul(a, b) => {
                a.uses_w() || b.uses_w()
            }
            ScalarExpr::Exp(a) | ScalarExpr::Pow(a, _) => a.uses_w(),
        }
    }

    /// Total evaluation at (z, w); z is 0-indexed storage for z_1..z_m.
    pub fn eval(&self, z: &[f64], w: f64) -> f64 {
        match self {
            ScalarExpr::Const(v) => *v,
            ScalarExpr::Z(i) => z[*i - 1],
            ScalarExpr::W => w,
            ScalarExpr::Add(a, b) => a.eval(z, w) + b.eval(z, w),
            ScalarExpr::Sub(a, b) => a.eval(z, w) - b.eval(z, w),
            ScalarExpr::Mul(a, b) => a.eval(z, w) * b.eval(z, w),
            ScalarExpr::Exp(a) => a.eval(z, w).exp(),
            ScalarExpr::Pow(a, k) => a.eval(z, w).powi(*k as i32),
        }
    }

    /// Interval enclosure of the range over a box of component values and
    /// an interval of functional values.
    pub fn eval_interval(&self, z: &[Interval], w: Interval) -> Interval {
        match self {
            ScalarExpr::Const(v) => Interval::point(*v),
            ScalarExpr::Z(i) => z[*i - 1],
            ScalarExpr::W => w,
            ScalarExpr::Add(a, b) => a.eval_interval(z, w) + b.eval_interval(z, w),
            ScalarExpr::Sub(a, b) => a.eval_interval(z, w) - b.eval_interval(z, w),
            ScalarExpr::Mul(a, b) => a.eval_interval(z, w) * b.eval_interval(z, w),
            ScalarExpr::Exp(a) => a.eval_interval(z, w).exp(),
            ScalarExpr::Pow(a, k) => a.eval_interval(z, w).powi(*k),
        }
    }

    /// Syntactically factor out one power of z_i: returns g with
    /// self = z_i * g when the tree carries the literal factor, and None
    /// otherwise. Used to certify linear-growth constants.
    pub fn factor_out_component(&self, i: usize) -> Option<ScalarExpr> {
        match self {
            ScalarExpr::Z(j) if *j == i => Some(ScalarExpr::Const(1.0)),
            ScalarExpr::Pow(a, k) if **a == ScalarExpr::Z(i) && *k >= 1 => Some(if *k == 1 {
                ScalarExpr::Const(1.0)
            } else {
                ScalarExpr::pow(ScalarExpr::z(i), *k - 1)
            }),
            ScalarExpr::Mul(a, b) => {
                if let Some(ga) = a.factor_out_component(i) {
                    Some(ScalarExpr::mul(ga, (**b).clone()))
                } else {
                    b.factor_out_component(i)
                        .map(|gb| ScalarExpr::mul((**a).clone(), gb))
                }
            }
            _ => None,
        }
    }
}
