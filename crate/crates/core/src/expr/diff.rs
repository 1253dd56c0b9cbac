use super::ast::{BinOp, Expr, Func};

fn num_of(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(v) => Some(*v),
        _ => None,
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    match (num_of(&a), num_of(&b)) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::bin(BinOp::Add, a, b),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (num_of(&a), num_of(&b)) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::bin(BinOp::Sub, a, b),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (num_of(&a), num_of(&b)) {
        (Some(x), Some(y)) => Expr::Num(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Num(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Expr::bin(BinOp::Mul, a, b),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (num_of(&a), num_of(&b)) {
        (Some(x), Some(y)) if y != 0.0 => Expr::Num(x / y),
        (Some(x), _) if x == 0.0 => Expr::Num(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::bin(BinOp::Div, a, b),
    }
}

pub fn pow(a: Expr, b: Expr) -> Expr {
    match (num_of(&a), num_of(&b)) {
        (_, Some(y)) if y == 0.0 => Expr::Num(1.0),
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), Some(y)) if x > 0.0 => Expr::Num(x.powf(y)),
        _ => Expr::bin(BinOp::Pow, a, b),
    }
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::neg(other),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::call1(f, a)
}

impl Expr {
    /// Symbolic partial derivative with light algebraic simplification.
    pub fn derivative(&self, var: &str) -> Expr {
        if !self.depends_on(var) {
            return Expr::Num(0.0);
        }
        match self {
            Expr::Num(_) | Expr::Const(_) => Expr::Num(0.0),
            Expr::Var(n, _) => Expr::Num(if n == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.derivative(var)),
            Expr::Bin(op, a, b, _) => {
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                let (da, db) = (a.derivative(var), b.derivative(var));
                match op {
                    BinOp::Add => add(da, db),
                    BinOp::Sub => sub(da, db),
                    BinOp::Mul => add(mul(da, b.clone()), mul(a, db)),
                    BinOp::Div => div(
                        sub(mul(da, b.clone()), mul(a, db)),
                        pow(b, Expr::Num(2.0)),
                    ),
                    BinOp::Pow => {
                        if !b.depends_on(var) {
                            let bm1 = sub(b.clone(), Expr::Num(1.0));
                            mul(mul(b, pow(a, bm1)), da)
                        } else if !a.depends_on(var) {
                            mul(mul(self.clone(), call(Func::Ln, a)), db)
                        } else {
                            let inner = add(
                                mul(db, call(Func::Ln, a.clone())),
                                div(mul(b, da), a),
                            );
                            mul(self.clone(), inner)
                        }
                    }
                }
            }
            Expr::Call(f, args, _) => {
                let u = args[0].clone();
                let du = u.derivative(var);
                let one = || Expr::Num(1.0);
                let sq = |e: Expr| pow(e, Expr::Num(2.0));
                let outer = match f {
                    Func::Sin => call(Func::Cos, u),
                    Func::Cos => neg(call(Func::Sin, u)),
                    Func::Tan => div(one(), sq(call(Func::Cos, u))),
                    Func::Sinh => call(Func::Cosh, u),
                    Func::Cosh => call(Func::Sinh, u),
                    Func::Tanh => div(one(), sq(call(Func::Cosh, u))),
                    Func::Asin => div(one(), call(Func::Sqrt, sub(one(), sq(u)))),
                    Func::Acos => neg(div(one(), call(Func::Sqrt, sub(one(), sq(u))))),
                    Func::Atan => div(one(), add(one(), sq(u))),
                    Func::Asinh => div(one(), call(Func::Sqrt, add(sq(u), one()))),
                    Func::Acosh => div(one(), call(Func::Sqrt, sub(sq(u), one()))),
                    Func::Atanh => div(one(), sub(one(), sq(u))),
                    Func::Exp => call(Func::Exp, u),
                    Func::Ln => div(one(), u),
                    Func::Sqrt => div(one(), mul(Expr::Num(2.0), call(Func::Sqrt, u))),
                    Func::Abs => div(u.clone(), call(Func::Abs, u)),
                    Func::Min | Func::Max => {
                        // min(a,b) = (a+b-|a-b|)/2, max(a,b) = (a+b+|a-b|)/2
                        let v = args[1].clone();
                        let dv = v.derivative(var);
                        let diff = sub(u.clone(), v.clone());
                        let dabs = mul(div(diff.clone(), call(Func::Abs, diff)), sub(du.clone(), dv.clone()));
                        let s = add(du, dv);
                        let tot = if *f == Func::Min { sub(s, dabs) } else { add(s, dabs) };
                        return div(tot, Expr::Num(2.0));
                    }
                };
                mul(outer, du)
            }
        }
    }

    /// k-th derivative in one variable.
    pub fn nth_derivative(&self, var: &str, k: usize) -> Expr {
        (0..k).fold(self.clone(), |e, _| e.derivative(var))
    }
}
