//! Exact arithmetic expressions over integers, π, square roots and inverse
//! trigonometric terms, evaluated in 512-bit floating point.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

const PREC: usize = 512;
const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i128),
    Pi,
    Sqrt(Box<Expr>),
    Atan(Box<Expr>),
    /// `arccot x = arctan(1/x)`, for `x > 0`.
    Acot(Box<Expr>),
    /// `arcsec x = arccos(1/x)`.
    Asec(Box<Expr>),
    Neg(Box<Expr>),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Quot(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

pub fn int(v: i128) -> Expr {
    Expr::Int(v)
}

pub fn pi() -> Expr {
    Expr::Pi
}

pub fn sqrt(e: Expr) -> Expr {
    Expr::Sqrt(Box::new(e))
}

pub fn atan(e: Expr) -> Expr {
    Expr::Atan(Box::new(e))
}

pub fn acot(e: Expr) -> Expr {
    Expr::Acot(Box::new(e))
}

pub fn asec(e: Expr) -> Expr {
    Expr::Asec(Box::new(e))
}

pub fn pow(base: Expr, n: u32) -> Expr {
    Expr::Pow(Box::new(base), n)
}

/// `n / d` with integer parts.
pub fn ratio(n: i128, d: i128) -> Expr {
    int(n) / int(d)
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match self {
            Expr::Sum(mut v) => {
                v.push(rhs);
                Expr::Sum(v)
            }
            lhs => Expr::Sum(vec![lhs, rhs]),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match self {
            Expr::Prod(mut v) => {
                v.push(rhs);
                Expr::Prod(v)
            }
            lhs => Expr::Prod(vec![lhs, rhs]),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Quot(Box::new(self), Box::new(rhs))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl Expr {
    /// Value rounded once to the nearest `f64`.
    pub fn eval(&self) -> f64 {
        let mut cc = Consts::new().expect("astro-float constant cache");
        let v = self.eval_big(&mut cc);
        let s = v
            .format(Radix::Dec, RM, &mut cc)
            .expect("decimal formatting of a finite value");
        s.parse().unwrap_or(f64::NAN)
    }

    /// Value in 512-bit precision.
    pub fn eval_big(&self, cc: &mut Consts) -> BigFloat {
        let one = || BigFloat::from_i32(1, PREC);
        match self {
            Expr::Int(v) => BigFloat::from_i128(*v, PREC),
            Expr::Pi => cc.pi(PREC, RM),
            Expr::Sqrt(e) => e.eval_big(cc).sqrt(PREC, RM),
            Expr::Atan(e) => e.eval_big(cc).atan(PREC, RM, cc),
            Expr::Acot(e) => one().div(&e.eval_big(cc), PREC, RM).atan(PREC, RM, cc),
            Expr::Asec(e) => one().div(&e.eval_big(cc), PREC, RM).acos(PREC, RM, cc),
            Expr::Neg(e) => e.eval_big(cc).neg(),
            Expr::Sum(v) => v
                .iter()
                .fold(BigFloat::from_i32(0, PREC), |acc, e| acc.add(&e.eval_big(cc), PREC, RM)),
            Expr::Prod(v) => v.iter().fold(one(), |acc, e| acc.mul(&e.eval_big(cc), PREC, RM)),
            Expr::Quot(n, d) => n.eval_big(cc).div(&d.eval_big(cc), PREC, RM),
            Expr::Pow(b, n) => b.eval_big(cc).powi(*n as usize, PREC, RM),
        }
    }

    /// Plain double-precision evaluation; loses digits on cancelling sums.
    pub fn eval_f64(&self) -> f64 {
        match self {
            Expr::Int(v) => *v as f64,
            Expr::Pi => std::f64::consts::PI,
            Expr::Sqrt(e) => e.eval_f64().sqrt(),
            Expr::Atan(e) => e.eval_f64().atan(),
            Expr::Acot(e) => (1.0 / e.eval_f64()).atan(),
            Expr::Asec(e) => (1.0 / e.eval_f64()).acos(),
            Expr::Neg(e) => -e.eval_f64(),
            Expr::Sum(v) => v.iter().map(Expr::eval_f64).sum(),
            Expr::Prod(v) => v.iter().map(Expr::eval_f64).product(),
            Expr::Quot(n, d) => n.eval_f64() / d.eval_f64(),
            Expr::Pow(b, n) => b.eval_f64().powi(*n as i32),
        }
    }

    fn is_atom(&self) -> bool {
        match self {
            Expr::Int(v) => *v >= 0,
            Expr::Pi | Expr::Sqrt(_) | Expr::Atan(_) | Expr::Acot(_) | Expr::Asec(_) => true,
            _ => false,
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_atom() || matches!(self, Expr::Pow(..)) {
            write!(f, "{self}")
        } else {
            write!(f, "({self})")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Pi => write!(f, "pi"),
            Expr::Sqrt(e) => write!(f, "sqrt({e})"),
            Expr::Atan(e) => write!(f, "atan({e})"),
            Expr::Acot(e) => write!(f, "acot({e})"),
            Expr::Asec(e) => write!(f, "asec({e})"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_operand(f)
            }
            Expr::Sum(v) => {
                for (i, e) in v.iter().enumerate() {
                    match (i, e) {
                        (0, _) => write!(f, "{e}")?,
                        (_, Expr::Neg(inner)) => {
                            write!(f, " - ")?;
                            if matches!(**inner, Expr::Sum(_)) {
                                write!(f, "({inner})")?;
                            } else {
                                write!(f, "{inner}")?;
                            }
                        }
                        _ => write!(f, " + {e}")?,
                    }
                }
                Ok(())
            }
            Expr::Prod(v) => {
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    e.fmt_operand(f)?;
                }
                Ok(())
            }
            Expr::Quot(n, d) => {
                n.fmt_operand(f)?;
                write!(f, "/")?;
                d.fmt_operand(f)
            }
            Expr::Pow(b, n) => {
                b.fmt_operand(f)?;
                write!(f, "^{n}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_values() {
        assert_eq!(ratio(8, 33).eval(), 8.0 / 33.0);
        assert_eq!(pow(int(2), 10).eval(), 1024.0);
        assert_eq!(sqrt(int(2)).eval(), std::f64::consts::SQRT_2);
        assert_eq!(pi().eval(), std::f64::consts::PI);
        assert!((asec(int(3)).eval() - (1.0f64 / 3.0).acos()).abs() < 1e-15);
        assert!((acot(int(5) / sqrt(int(2))).eval() - (2f64.sqrt() / 5.0).atan()).abs() < 1e-15);
        assert_eq!((int(1) - int(3)).eval(), -2.0);
    }

    #[test]
    fn cancellation_is_resolved() {
        // 10^30 + 1 - 10^30 loses the 1 in double precision
        let e = pow(int(10), 30) + int(1) - pow(int(10), 30);
        assert_eq!(e.eval(), 1.0);
        assert_eq!(e.eval_f64(), 0.0);
    }

    #[test]
    fn display() {
        let e = (int(6928) - int(2205) * pi()) / (pow(int(2), 4) * sqrt(int(2)));
        assert_eq!(e.to_string(), "(6928 - 2205*pi)/(2^4*sqrt(2))");
        assert_eq!((-(int(3))).to_string(), "-3");
    }
}
