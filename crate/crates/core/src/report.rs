//! Decomposition reports shared by the identity and bound checkers.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

/// A reported quantity: exact rational, real, or complex.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Real(f64),
    Complex(Complex64),
}

impl Value {
    pub fn abs(&self) -> f64 {
        match self {
            Value::Exact(r) => crate::dd::ratio_to_f64(&r.abs()),
            Value::Real(x) => x.abs(),
            Value::Complex(z) => z.norm(),
        }
    }

    pub fn approx(&self) -> f64 {
        match self {
            Value::Exact(r) => crate::dd::ratio_to_f64(r),
            Value::Real(x) => *x,
            Value::Complex(z) => z.re,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, Value::Exact(r) if r.is_zero())
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Real(x) => s.serialize_f64(*x),
            Value::Exact(r) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("exact", &r.to_string())?;
                m.serialize_entry("approx", &self.approx())?;
                m.end()
            }
            Value::Complex(z) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("re", &z.re)?;
                m.serialize_entry("im", &z.im)?;
                m.end()
            }
        }
    }
}

/// Scalars in which identities are checked without rounding.
pub trait Exact: Clone + Zero + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> + PartialEq + Send + Sync {
    fn to_value(&self) -> Value;
}

impl Exact for i128 {
    fn to_value(&self) -> Value {
        Value::Exact(BigRational::from_integer(BigInt::from(*self)))
    }
}

impl Exact for BigInt {
    fn to_value(&self) -> Value {
        Value::Exact(BigRational::from_integer(self.clone()))
    }
}

impl Exact for BigRational {
    fn to_value(&self) -> Value {
        Value::Exact(self.clone())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Part {
    pub name: String,
    pub value: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub check: String,
    pub lhs: Value,
    pub parts: Vec<Part>,
    pub residual: Value,
    pub bound: f64,
    pub satisfied: bool,
    pub metrics: BTreeMap<String, f64>,
}

impl DecompositionReport {
    /// Report for an identity that must hold exactly.
    pub fn exact<V: Exact>(check: &str, lhs: V, parts: Vec<(&str, V)>, rhs: V) -> Self {
        let residual = lhs.clone() - rhs;
        let satisfied = residual.is_zero();
        DecompositionReport {
            check: check.to_string(),
            lhs: lhs.to_value(),
            parts: parts.into_iter().map(|(n, v)| Part { name: n.to_string(), value: v.to_value() }).collect(),
            residual: residual.to_value(),
            bound: 0.0,
            satisfied,
            metrics: BTreeMap::new(),
        }
    }

    pub fn part(&self, name: &str) -> Option<&Value> {
        self.parts.iter().find(|p| p.name == name).map(|p| &p.value)
    }

    pub fn metric(mut self, k: &str, v: f64) -> Self {
        if v.is_finite() {
            self.metrics.insert(k.to_string(), v);
        }
        self
    }
}
