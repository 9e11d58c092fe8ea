use std::fmt;

use super::scalar::Scalar;
use super::taylor;
use super::{DomainKind, EvalError, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Function {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Function {
    pub const ALL: [Function; 6] = [
        Function::Sin,
        Function::Cos,
        Function::Exp,
        Function::Ln,
        Function::Sqrt,
        Function::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Exp => "exp",
            Function::Ln => "ln",
            Function::Sqrt => "sqrt",
            Function::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Function> {
        Function::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree node. Variables are referenced by position in the owning
/// [`Expression`](super::Expression)'s variable list.
///
/// `span` is the source byte range for nodes that came from the parser and
/// can raise domain errors; programmatically built nodes leave it `None`.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Binary {
        op: BinaryOp,
        lhs: Box<Node>,
        rhs: Box<Node>,
        span: Option<Span>,
    },
    Call {
        func: Function,
        arg: Box<Node>,
        span: Option<Span>,
    },
}

impl Node {
    pub fn binary(op: BinaryOp, lhs: Node, rhs: Node) -> Node {
        Node::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            span: None,
        }
    }

    pub fn call(func: Function, arg: Node) -> Node {
        Node::Call {
            func,
            arg: Box::new(arg),
            span: None,
        }
    }

    pub fn neg(arg: Node) -> Node {
        Node::Neg(Box::new(arg))
    }

    /// True when the subtree references no variable.
    pub fn is_constant(&self) -> bool {
        match self {
            Node::Const(_) => true,
            Node::Var(_) => false,
            Node::Neg(a) => a.is_constant(),
            Node::Binary { lhs, rhs, .. } => lhs.is_constant() && rhs.is_constant(),
            Node::Call { arg, .. } => arg.is_constant(),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) => a.max_var(),
            Node::Binary { lhs, rhs, .. } => lhs.max_var().max(rhs.max_var()),
            Node::Call { arg, .. } => arg.max_var(),
        }
    }

    /// Replaces every `Var(i)` with `f(i)`.
    pub fn substitute(&self, f: &impl Fn(usize) -> Node) -> Node {
        match self {
            Node::Const(c) => Node::Const(*c),
            Node::Var(i) => f(*i),
            Node::Neg(a) => Node::Neg(Box::new(a.substitute(f))),
            Node::Binary { op, lhs, rhs, span } => Node::Binary {
                op: *op,
                lhs: Box::new(lhs.substitute(f)),
                rhs: Box::new(rhs.substitute(f)),
                span: *span,
            },
            Node::Call { func, arg, span } => Node::Call {
                func: *func,
                arg: Box::new(arg.substitute(f)),
                span: *span,
            },
        }
    }

    pub(crate) fn eval<T: Scalar>(
        &self,
        vars: &[T],
        shape: &T::Shape,
        names: &[String],
    ) -> Result<T, EvalError> {
        match self {
            Node::Const(c) => Ok(T::constant(*c, shape)),
            Node::Var(i) => Ok(vars[*i].clone()),
            Node::Neg(a) => Ok(a.eval(vars, shape, names)?.neg()),
            Node::Binary { op, lhs, rhs, span } => {
                let fail = |kind| self.domain_error(kind, *span, names);
                let l = lhs.eval(vars, shape, names)?;
                if *op == BinaryOp::Pow {
                    return self.eval_pow(l, rhs, vars, shape, names, *span);
                }
                let r = rhs.eval(vars, shape, names)?;
                match op {
                    BinaryOp::Add => Ok(l.add(&r)),
                    BinaryOp::Sub => Ok(l.sub(&r)),
                    BinaryOp::Mul => Ok(l.mul(&r)),
                    BinaryOp::Div => {
                        if r.value() == 0.0 {
                            Err(fail(DomainKind::DivisionByZero))
                        } else {
                            Ok(l.div(&r))
                        }
                    }
                    BinaryOp::Pow => unreachable!(),
                }
            }
            Node::Call { func, arg, span } => {
                let u = arg.eval(vars, shape, names)?;
                let v = u.value();
                let order = u.order();
                let fail = |kind| self.domain_error(kind, *span, names);
                let coeffs = match func {
                    Function::Sin => taylor::sin(v, order),
                    Function::Cos => taylor::cos(v, order),
                    Function::Exp => taylor::exp(v, order),
                    Function::Ln => {
                        if !(v > 0.0) {
                            return Err(fail(DomainKind::LogNonPositive));
                        }
                        taylor::ln(v, order)
                    }
                    Function::Sqrt => {
                        if v < 0.0 || v.is_nan() {
                            return Err(fail(DomainKind::SqrtNegative));
                        }
                        if v == 0.0 && order > 0 {
                            return Err(fail(DomainKind::NotDifferentiable));
                        }
                        taylor::sqrt(v, order)
                    }
                    Function::Abs => {
                        if v == 0.0 && order > 0 {
                            return Err(fail(DomainKind::NotDifferentiable));
                        }
                        taylor::abs(v, order)
                    }
                };
                Ok(u.compose(&coeffs))
            }
        }
    }

    fn eval_pow<T: Scalar>(
        &self,
        base: T,
        exponent: &Node,
        vars: &[T],
        shape: &T::Shape,
        names: &[String],
        span: Option<Span>,
    ) -> Result<T, EvalError> {
        let fail = |kind| self.domain_error(kind, span, names);
        let b = base.value();
        let order = base.order();
        if exponent.is_constant() {
            let p = exponent.eval::<f64>(&[], &(), names)?;
            if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
                let n = p as i32;
                if n < 0 && b == 0.0 {
                    return Err(fail(DomainKind::DivisionByZero));
                }
                return Ok(base.compose(&taylor::powi(b, n, order)));
            }
            if b < 0.0 {
                return Err(fail(DomainKind::NegativeBaseFractionalPower));
            }
            if b == 0.0 {
                if order > 0 {
                    return Err(fail(DomainKind::NotDifferentiable));
                }
                if p > 0.0 {
                    return Ok(T::constant(0.0, shape));
                }
                return Err(fail(DomainKind::DivisionByZero));
            }
            return Ok(base.compose(&taylor::powf(b, p, order)));
        }
        // variable exponent: b^e = exp(e ln b)
        if !(b > 0.0) {
            return Err(fail(DomainKind::NonPositiveBaseVariablePower));
        }
        let e = exponent.eval(vars, shape, names)?;
        let log_b = base.compose(&taylor::ln(b, order));
        let product = e.mul(&log_b);
        let pv = product.value();
        Ok(product.compose(&taylor::exp(pv, product.order())))
    }

    fn domain_error(&self, kind: DomainKind, span: Option<Span>, names: &[String]) -> EvalError {
        EvalError::Domain {
            kind,
            span,
            subexpression: Display { node: self, names }.to_string(),
        }
    }
}

/// Fully parenthesised infix rendering against a variable-name table.
pub(crate) struct Display<'a> {
    pub node: &'a Node,
    pub names: &'a [String],
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |node| Display {
            node,
            names: self.names,
        };
        match self.node {
            Node::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "(-")?;
                    write_number(f, -c)?;
                    write!(f, ")")
                } else {
                    write_number(f, *c)
                }
            }
            Node::Var(i) => match self.names.get(*i) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "<var{i}>"),
            },
            Node::Neg(a) => write!(f, "(-{})", sub(a)),
            Node::Binary { op, lhs, rhs, .. } => {
                write!(f, "({} {} {})", sub(lhs), op.symbol(), sub(rhs))
            }
            Node::Call { func, arg, .. } => write!(f, "{}({})", func.name(), sub(arg)),
        }
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v == 0.0 || (1e-5..1e16).contains(&v) {
        write!(f, "{v}")
    } else {
        write!(f, "{v:e}")
    }
}
