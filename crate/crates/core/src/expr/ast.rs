use std::fmt;

/// Byte range in the source text. Ignored by equality so that reparsed trees compare equal.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "pi" => Some(Constant::Pi),
            "e" => Some(Constant::E),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Asin,
    Acos,
    Atan,
    Asinh,
    Acosh,
    Atanh,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 18] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Asin,
        Func::Acos,
        Func::Atan,
        Func::Asinh,
        Func::Acosh,
        Func::Atanh,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Abs,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Asin => "asin",
            Func::Acos => "acos",
            Func::Atan => "atan",
            Func::Asinh => "asinh",
            Func::Acosh => "acosh",
            Func::Atanh => "atanh",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Func::ALL.iter().copied().find(|f| f.name() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(String, Span),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>, Span),
    Call(Func, Vec<Expr>, Span),
}

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string(), Span::default())
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r), Span::default())
    }

    pub fn call(f: Func, args: Vec<Expr>) -> Expr {
        Expr::Call(f, args, Span::default())
    }

    pub fn call1(f: Func, a: Expr) -> Expr {
        Expr::call(f, vec![a])
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => PREC_NEG,
            Expr::Num(_) | Expr::Const(_) | Expr::Var(..) | Expr::Call(..) => PREC_ATOM,
            Expr::Neg(_) => PREC_NEG,
            Expr::Bin(op, ..) => match op {
                BinOp::Add | BinOp::Sub => PREC_ADD,
                BinOp::Mul | BinOp::Div => PREC_MUL,
                BinOp::Pow => PREC_POW,
            },
        }
    }

    /// Names of free variables, in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(n, _) => {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            Expr::Neg(a) => a.collect_vars(out),
            Expr::Bin(_, a, b, _) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Call(_, args, _) => args.iter().for_each(|a| a.collect_vars(out)),
            Expr::Num(_) | Expr::Const(_) => {}
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        match self {
            Expr::Var(n, _) => n == var,
            Expr::Neg(a) => a.depends_on(var),
            Expr::Bin(_, a, b, _) => a.depends_on(var) || b.depends_on(var),
            Expr::Call(_, args, _) => args.iter().any(|a| a.depends_on(var)),
            Expr::Num(_) | Expr::Const(_) => false,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.variables().is_empty()
    }

    /// Replace named variables by literal values.
    pub fn substitute(&self, values: &[(&str, f64)]) -> Expr {
        match self {
            Expr::Var(n, s) => match values.iter().find(|(k, _)| k == n) {
                Some((_, v)) => Expr::Num(*v),
                None => Expr::Var(n.clone(), *s),
            },
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(values))),
            Expr::Bin(op, a, b, s) => Expr::Bin(
                *op,
                Box::new(a.substitute(values)),
                Box::new(b.substitute(values)),
                *s,
            ),
            Expr::Call(f, args, s) => {
                Expr::Call(*f, args.iter().map(|a| a.substitute(values)).collect(), *s)
            }
            Expr::Num(_) | Expr::Const(_) => self.clone(),
        }
    }

    fn write_prec(&self, out: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.prec() < min;
        if paren {
            out.write_str("(")?;
        }
        match self {
            Expr::Num(v) => {
                if v.is_sign_negative() {
                    write!(out, "-{:?}", -v)?;
                } else {
                    write!(out, "{:?}", v)?;
                }
            }
            Expr::Const(c) => out.write_str(c.name())?,
            Expr::Var(n, _) => out.write_str(n)?,
            Expr::Neg(a) => {
                out.write_str("-")?;
                a.write_prec(out, PREC_NEG)?;
            }
            Expr::Bin(op, a, b, _) => {
                let (lmin, rmin) = match op {
                    BinOp::Add | BinOp::Sub => (PREC_ADD, PREC_MUL),
                    BinOp::Mul | BinOp::Div => (PREC_MUL, PREC_NEG),
                    BinOp::Pow => (PREC_ATOM, PREC_NEG),
                };
                a.write_prec(out, lmin)?;
                out.write_str(op.symbol())?;
                b.write_prec(out, rmin)?;
            }
            Expr::Call(f, args, _) => {
                out.write_str(f.name())?;
                out.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.write_str(", ")?;
                    }
                    a.write_prec(out, PREC_ADD)?;
                }
                out.write_str(")")?;
            }
        }
        if paren {
            out.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}
