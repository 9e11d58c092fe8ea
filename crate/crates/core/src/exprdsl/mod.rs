//! Scalar expression language with exact forward-mode derivatives.
//!
//! Expressions are parsed from plain infix text (see `docs/expressions.md`)
//! or built directly from [`Node`]s, and can be evaluated over any
//! [`Scalar`]: plain `f64`, the second-order [`DualScalar`] used for
//! gradients and Hessians, or a truncated [`Jet`] of arbitrary order.

mod ast;
mod jet;
mod parser;
mod scalar;
pub(crate) mod taylor;

use std::fmt;

use thiserror::Error;

pub use ast::{BinaryOp, Function, Node};
pub use jet::{Jet, JetLayout};
pub use scalar::{DualScalar, Scalar};

use crate::linalg::Matrix;

/// Byte range in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("invalid variable name '{name}': {reason}")]
    InvalidVariable { name: String, reason: &'static str },
}

impl ParseError {
    /// Byte offset of the error, when it refers to a source position.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                Some(*offset)
            }
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    DivisionByZero,
    LogNonPositive,
    SqrtNegative,
    NegativeBaseFractionalPower,
    NonPositiveBaseVariablePower,
    /// The value exists but a requested derivative does not (e.g. `sqrt` at 0).
    NotDifferentiable,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::LogNonPositive => "logarithm of a non-positive value",
            DomainKind::SqrtNegative => "square root of a negative value",
            DomainKind::NegativeBaseFractionalPower => "negative base with non-integer exponent",
            DomainKind::NonPositiveBaseVariablePower => "non-positive base with variable exponent",
            DomainKind::NotDifferentiable => "derivative undefined at this point",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {kind} in `{subexpression}`{}", fmt_span(.span))]
    Domain {
        kind: DomainKind,
        span: Option<Span>,
        subexpression: String,
    },
    #[error("expected a point of dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

fn fmt_span(span: &Option<Span>) -> String {
    match span {
        Some(s) => format!(" (bytes {}..{})", s.start, s.end),
        None => String::new(),
    }
}

/// Parsed scalar expression over an ordered list of named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    root: Node,
    variables: Vec<String>,
}

/// Identifier rules shared by the parser and every variable list.
pub fn validate_variables<S: AsRef<str>>(variables: &[S]) -> Result<Vec<String>, ParseError> {
    let mut out: Vec<String> = Vec::with_capacity(variables.len());
    for v in variables {
        let name = v.as_ref();
        let mut chars = name.chars();
        let valid = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        let invalid = |reason| ParseError::InvalidVariable {
            name: name.to_string(),
            reason,
        };
        if !valid {
            return Err(invalid("not an identifier"));
        }
        if Function::from_name(name).is_some() {
            return Err(invalid("reserved function name"));
        }
        if out.iter().any(|o| o == name) {
            return Err(invalid("duplicate variable"));
        }
        out.push(name.to_string());
    }
    Ok(out)
}

impl Expression {
    pub fn parse<S: AsRef<str>>(source: &str, variables: &[S]) -> Result<Self, ParseError> {
        let variables = validate_variables(variables)?;
        let root = parser::Parser::parse(source, &variables)?;
        Ok(Self { root, variables })
    }

    /// Wraps a programmatically built tree. Fails if a variable index is out
    /// of range or a name is invalid.
    pub fn from_node<S: AsRef<str>>(root: Node, variables: &[S]) -> Result<Self, ParseError> {
        let variables = validate_variables(variables)?;
        if let Some(i) = root.max_var() {
            if i >= variables.len() {
                return Err(ParseError::InvalidVariable {
                    name: format!("#{i}"),
                    reason: "variable index out of range",
                });
            }
        }
        Ok(Self { root, variables })
    }

    pub fn constant<S: AsRef<str>>(value: f64, variables: &[S]) -> Result<Self, ParseError> {
        Self::from_node(Node::Const(value), variables)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn arity(&self) -> usize {
        self.variables.len()
    }

    pub fn into_node(self) -> Node {
        self.root
    }

    fn check_dim(&self, got: usize) -> Result<(), EvalError> {
        if got != self.variables.len() {
            return Err(EvalError::Dimension {
                expected: self.variables.len(),
                got,
            });
        }
        Ok(())
    }

    /// Evaluates over any scalar type; `vars` holds one value per variable.
    pub fn eval_scalar<T: Scalar>(&self, vars: &[T], shape: &T::Shape) -> Result<T, EvalError> {
        self.check_dim(vars.len())?;
        self.root.eval(vars, shape, &self.variables)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.eval_scalar(point, &())
    }

    /// Value, gradient and Hessian in one second-order dual pass.
    pub fn eval_dual(&self, point: &[f64]) -> Result<DualScalar, EvalError> {
        self.check_dim(point.len())?;
        let n = point.len();
        let vars: Vec<DualScalar> = point
            .iter()
            .enumerate()
            .map(|(i, &v)| DualScalar::variable(v, i, n))
            .collect();
        self.eval_scalar(&vars, &n)
    }

    pub fn gradient(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        Ok(self.eval_dual(point)?.first().to_vec())
    }

    pub fn hessian(&self, point: &[f64]) -> Result<Matrix, EvalError> {
        let d = self.eval_dual(point)?;
        let n = point.len();
        Ok(Matrix::from_fn(n, n, |i, j| d.second_at(i, j)))
    }

    /// Rewrites the expression against a new variable list, mapping each old
    /// variable to a node over the new list.
    pub fn substitute<S: AsRef<str>>(
        &self,
        variables: &[S],
        f: impl Fn(usize) -> Node,
    ) -> Result<Self, ParseError> {
        Self::from_node(self.root.substitute(&f), variables)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        ast::Display {
            node: &self.root,
            names: &self.variables,
        }
        .fmt(f)
    }
}
