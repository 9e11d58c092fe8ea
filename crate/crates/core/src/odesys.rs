//! Autonomous first-order systems `dx/dt = f(x)`.

use std::sync::Arc;

use thiserror::Error;

use crate::exprdsl::{EvalError, Expression, Jet, JetLayout, ParseError, Scalar};
use crate::linalg::Matrix;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FieldError {
    #[error("a vector field needs at least one component")]
    Empty,
    #[error("expected {expected} components for {expected} variables, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("component {index} is defined over different variables than the field")]
    VariableMismatch { index: usize },
    #[error("component {index}: {source}")]
    Parse {
        index: usize,
        #[source]
        source: ParseError,
    },
    #[error("component {index}: {source}")]
    Eval {
        index: usize,
        #[source]
        source: EvalError,
    },
    #[error("state has dimension {got}, field has dimension {expected}")]
    Dimension { expected: usize, got: usize },
}

/// `n` smooth component functions over `n` shared state variables.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    name: String,
    variables: Vec<String>,
    components: Vec<Expression>,
}

/// Jacobian `∂fⁱ/∂xʲ` together with the state it was evaluated at.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianMatrix {
    pub entries: Matrix,
    pub evaluated_at: Vec<f64>,
}

impl VectorField {
    pub fn new(name: impl Into<String>, components: Vec<Expression>) -> Result<Self, FieldError> {
        let first = components.first().ok_or(FieldError::Empty)?;
        let variables = first.variables().to_vec();
        if components.len() != variables.len() {
            return Err(FieldError::ComponentCount {
                expected: variables.len(),
                got: components.len(),
            });
        }
        if let Some(index) = components.iter().position(|c| c.variables() != variables) {
            return Err(FieldError::VariableMismatch { index });
        }
        Ok(Self {
            name: name.into(),
            variables,
            components,
        })
    }

    /// Parses one source string per component over `variables`.
    pub fn parse<S: AsRef<str>, V: AsRef<str>>(
        name: impl Into<String>,
        variables: &[V],
        sources: &[S],
    ) -> Result<Self, FieldError> {
        let components = sources
            .iter()
            .enumerate()
            .map(|(index, s)| {
                Expression::parse(s.as_ref(), variables)
                    .map_err(|source| FieldError::Parse { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(name, components)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn check(&self, len: usize) -> Result<(), FieldError> {
        if len != self.dimension() {
            return Err(FieldError::Dimension {
                expected: self.dimension(),
                got: len,
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, FieldError> {
        self.check(x.len())?;
        self.components
            .iter()
            .enumerate()
            .map(|(index, c)| c.eval(x).map_err(|source| FieldError::Eval { index, source }))
            .collect()
    }

    /// Evaluates every component over an arbitrary scalar type.
    pub fn eval_scalar<T: Scalar>(&self, x: &[T], shape: &T::Shape) -> Result<Vec<T>, FieldError> {
        self.check(x.len())?;
        self.components
            .iter()
            .enumerate()
            .map(|(index, c)| {
                c.eval_scalar(x, shape)
                    .map_err(|source| FieldError::Eval { index, source })
            })
            .collect()
    }

    /// Components as jets of order `order` over a `layout` whose first `n`
    /// variables are the state.
    pub fn eval_jets(
        &self,
        x: &[f64],
        layout: &Arc<JetLayout>,
        order: usize,
    ) -> Result<Vec<Jet>, FieldError> {
        self.check(x.len())?;
        let vars: Vec<Jet> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(layout, order, i, v))
            .collect();
        self.eval_scalar(&vars, &(layout.clone(), order))
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<JacobianMatrix, FieldError> {
        let (j, _) = self.jacobian_and_hessians(x)?;
        Ok(j)
    }

    /// `H_{fᵏ}(x)` for each component `k`.
    pub fn hessians(&self, x: &[f64]) -> Result<Vec<Matrix>, FieldError> {
        let (_, h) = self.jacobian_and_hessians(x)?;
        Ok(h)
    }

    /// Both derivative blocks from a single dual-number pass.
    pub fn jacobian_and_hessians(
        &self,
        x: &[f64],
    ) -> Result<(JacobianMatrix, Vec<Matrix>), FieldError> {
        self.check(x.len())?;
        let n = self.dimension();
        let mut jac = Matrix::zeros(n, n);
        let mut hessians = Vec::with_capacity(n);
        for (i, c) in self.components.iter().enumerate() {
            let d = c
                .eval_dual(x)
                .map_err(|source| FieldError::Eval { index: i, source })?;
            for (j, g) in d.first().iter().enumerate() {
                jac[(i, j)] = *g;
            }
            hessians.push(Matrix::from_fn(n, n, |a, b| d.second_at(a, b)));
        }
        Ok((
            JacobianMatrix {
                entries: jac,
                evaluated_at: x.to_vec(),
            },
            hessians,
        ))
    }
}
