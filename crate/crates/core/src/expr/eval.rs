use super::ast::{BinOp, Expr, Func};
use super::parse::{parse_with_names, ParseError};
use num_dual::DualNum;
use std::fmt;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub struct EvalError {
    pub op: &'static str,
    pub arg: f64,
    pub offset: usize,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` undefined at argument {} (byte {})", self.op, self.arg, self.offset)
    }
}

#[derive(Clone, Debug)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>, usize),
    PowI(Box<Node>, i32),
    PowF(Box<Node>, f64, usize),
    Call(Func, Vec<Node>, usize),
}

/// An expression with variables resolved to argument slots and parameters folded in.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    source: Expr,
    vars: Vec<String>,
    root: Node,
}

fn lower(e: &Expr, vars: &[String], params: &[(String, f64)]) -> Result<Node, String> {
    Ok(match e {
        Expr::Num(v) => Node::Num(*v),
        Expr::Const(c) => Node::Num(c.value()),
        Expr::Var(n, _) => {
            if let Some(i) = vars.iter().position(|v| v == n) {
                Node::Var(i)
            } else if let Some((_, v)) = params.iter().find(|(k, _)| k == n) {
                Node::Num(*v)
            } else {
                return Err(n.clone());
            }
        }
        Expr::Neg(a) => Node::Neg(Box::new(lower(a, vars, params)?)),
        Expr::Bin(BinOp::Pow, a, b, s) => {
            let base = lower(a, vars, params)?;
            let exp = lower(b, vars, params)?;
            match const_value(&exp) {
                Some(p) if p.fract() == 0.0 && p.abs() < 1e9 => Node::PowI(Box::new(base), p as i32),
                Some(p) => Node::PowF(Box::new(base), p, s.start),
                None => Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp), s.start),
            }
        }
        Expr::Bin(op, a, b, s) => Node::Bin(
            *op,
            Box::new(lower(a, vars, params)?),
            Box::new(lower(b, vars, params)?),
            s.start,
        ),
        Expr::Call(f, args, s) => Node::Call(
            *f,
            args.iter().map(|a| lower(a, vars, params)).collect::<Result<_, _>>()?,
            s.start,
        ),
    })
}

fn const_value(n: &Node) -> Option<f64> {
    match n {
        Node::Num(v) => Some(*v),
        Node::Neg(a) => const_value(a).map(|v| -v),
        Node::PowI(a, p) => const_value(a).map(|v| v.powi(*p)),
        Node::PowF(a, p, _) => const_value(a).map(|v| v.powf(*p)),
        Node::Bin(op, a, b, _) => {
            let (x, y) = (const_value(a)?, const_value(b)?);
            Some(match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
                BinOp::Pow => x.powf(y),
            })
        }
        _ => None,
    }
}

fn check<D: DualNum<Primitive = f64>>(ok: bool, op: &'static str, x: &D, offset: usize) -> Result<(), EvalError> {
    if ok {
        Ok(())
    } else {
        Err(EvalError { op, arg: x.re(), offset })
    }
}

fn eval_node<D: DualNum<Primitive = f64>>(n: &Node, x: &[D]) -> Result<D, EvalError> {
    Ok(match n {
        Node::Num(v) => D::from(*v),
        Node::Var(i) => x[*i].clone(),
        Node::Neg(a) => -eval_node(a, x)?,
        Node::PowI(a, p) => {
            let b = eval_node(a, x)?;
            if *p < 0 && b.re() == 0.0 {
                return Err(EvalError { op: "^", arg: 0.0, offset: 0 });
            }
            b.powi(*p)
        }
        Node::PowF(a, p, off) => {
            let b = eval_node(a, x)?;
            check(b.re() > 0.0 || (b.re() == 0.0 && *p > 0.0), "^", &b, *off)?;
            if b.re() == 0.0 {
                D::from(0.0)
            } else {
                b.powf(*p)
            }
        }
        Node::Bin(op, a, b, off) => {
            let l = eval_node(a, x)?;
            let r = eval_node(b, x)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    check(r.re() != 0.0, "/", &r, *off)?;
                    l / r
                }
                BinOp::Pow => {
                    check(l.re() > 0.0, "^", &l, *off)?;
                    (r * l.ln()).exp()
                }
            }
        }
        Node::Call(f, args, off) => {
            let u = eval_node(&args[0], x)?;
            let r = u.re();
            let off = *off;
            match f {
                Func::Sin => u.sin(),
                Func::Cos => u.cos(),
                Func::Tan => {
                    check(r.cos() != 0.0, "tan", &u, off)?;
                    u.tan()
                }
                Func::Sinh => u.sinh(),
                Func::Cosh => u.cosh(),
                Func::Tanh => u.tanh(),
                Func::Asin => {
                    check(r.abs() <= 1.0, "asin", &u, off)?;
                    u.asin()
                }
                Func::Acos => {
                    check(r.abs() <= 1.0, "acos", &u, off)?;
                    u.acos()
                }
                Func::Atan => u.atan(),
                Func::Asinh => u.asinh(),
                Func::Acosh => {
                    check(r >= 1.0, "acosh", &u, off)?;
                    u.acosh()
                }
                Func::Atanh => {
                    check(r.abs() < 1.0, "atanh", &u, off)?;
                    u.atanh()
                }
                Func::Exp => u.exp(),
                Func::Ln => {
                    check(r > 0.0, "ln", &u, off)?;
                    u.ln()
                }
                Func::Sqrt => {
                    check(r >= 0.0, "sqrt", &u, off)?;
                    u.sqrt()
                }
                Func::Abs => {
                    if r < 0.0 {
                        -u
                    } else {
                        u
                    }
                }
                Func::Min | Func::Max => {
                    let v = eval_node(&args[1], x)?;
                    let take_u = if *f == Func::Min { r <= v.re() } else { r >= v.re() };
                    if take_u {
                        u
                    } else {
                        v
                    }
                }
            }
        }
    })
}

impl CompiledExpr {
    pub fn new(expr: &Expr, vars: &[&str], params: &[(&str, f64)]) -> Result<Self, ParseError> {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let params: Vec<(String, f64)> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let root = lower(expr, &vars, &params).map_err(|name| {
            let offset = find_var_offset(expr, &name).unwrap_or(0);
            ParseError { offset, kind: super::parse::ParseErrorKind::UnknownIdentifier(name) }
        })?;
        let bound: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        Ok(CompiledExpr { source: expr.substitute(&bound), vars, root })
    }

    /// Parse `text` and compile it over the given variables and bound parameters.
    pub fn parse(text: &str, vars: &[&str], params: &[(&str, f64)]) -> Result<Self, ParseError> {
        let mut names: Vec<&str> = vars.to_vec();
        names.extend(params.iter().map(|(k, _)| *k));
        let e = parse_with_names(text, &names)?;
        CompiledExpr::new(&e, vars, params)
    }

    pub fn expr(&self) -> &Expr {
        &self.source
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let v = eval_node::<f64>(&self.root, x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError { op: "result", arg: v, offset: 0 })
        }
    }

    pub fn eval_dual<D: DualNum<Primitive = f64>>(&self, x: &[D]) -> Result<D, EvalError> {
        eval_node(&self.root, x)
    }

    /// Symbolic derivative with respect to variable slot `i`.
    pub fn derivative(&self, i: usize) -> CompiledExpr {
        let d = self.source.derivative(&self.vars[i]);
        let vars: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        CompiledExpr::new(&d, &vars, &[]).expect("derivative introduces no new names")
    }
}

fn find_var_offset(e: &Expr, name: &str) -> Option<usize> {
    match e {
        Expr::Var(n, s) if n == name => Some(s.start),
        Expr::Neg(a) => find_var_offset(a, name),
        Expr::Bin(_, a, b, _) => find_var_offset(a, name).or_else(|| find_var_offset(b, name)),
        Expr::Call(_, args, _) => args.iter().find_map(|a| find_var_offset(a, name)),
        _ => None,
    }
}
