//! Expressions in the arc parameter `s`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 's' | 'pi' | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin cos abs sqrt exp` of one argument, `min max` of two.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("column {column}: {message}")]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Abs,
    Sqrt,
    Exp,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "abs" => (Func::Abs, 1),
            "sqrt" => (Func::Sqrt, 1),
            "exp" => (Func::Exp, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    S,
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression together with its source text.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr, ExprError> {
        let mut p = Parser {
            chars: source.char_indices().collect(),
            pos: 0,
        };
        let root = p.expr()?;
        p.skip_ws();
        if let Some(&(i, c)) = p.chars.get(p.pos) {
            return Err(ExprError {
                column: i + 1,
                message: format!("unexpected `{c}`"),
            });
        }
        Ok(Expr {
            source: source.to_string(),
            root,
        })
    }

    pub fn eval(&self, s: f64) -> f64 {
        eval(&self.root, s)
    }

    /// True when the expression does not mention `s`.
    pub fn is_constant(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Num(_) => true,
                Node::S => false,
                Node::Neg(a) => walk(a),
                Node::Bin(_, a, b) => walk(a) && walk(b),
                Node::Call(_, args) => args.iter().all(walk),
            }
        }
        walk(&self.root)
    }
}

fn eval(n: &Node, s: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::S => s,
        Node::Neg(a) => -eval(a, s),
        Node::Bin(op, a, b) => {
            let (x, y) = (eval(a, s), eval(b, s));
            match op {
                '+' => x + y,
                '-' => x - y,
                '*' => x * y,
                '/' => x / y,
                '^' => {
                    if y.fract() == 0.0 && y.abs() <= i32::MAX as f64 {
                        x.powi(y as i32)
                    } else {
                        x.powf(y)
                    }
                }
                _ => unreachable!("operators are fixed by the parser"),
            }
        }
        Node::Call(f, args) => {
            let x = eval(&args[0], s);
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Abs => x.abs(),
                Func::Sqrt => x.sqrt(),
                Func::Exp => x.exp(),
                Func::Min => x.min(eval(&args[1], s)),
                Func::Max => x.max(eval(&args[1], s)),
            }
        }
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self
            .chars
            .get(self.pos)
            .is_some_and(|(_, c)| c.is_whitespace())
        {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn column(&self) -> usize {
        self.chars.get(self.pos).map_or_else(
            || self.chars.last().map_or(1, |&(i, _)| i + 2),
            |&(i, _)| i + 1,
        )
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            column: self.column(),
            message: message.into(),
        })
    }

    fn expect(&mut self, want: char) -> Result<(), ExprError> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => self.error(format!("expected `{want}`, found `{c}`")),
            None => self.error(format!("expected `{want}` at end of input")),
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.peek() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            None => self.error("unexpected end of input"),
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|(_, c)| c.is_ascii_alphanumeric() || *c == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos]
                    .iter()
                    .map(|&(_, c)| c)
                    .collect();
                match name.as_str() {
                    "s" => Ok(Node::S),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    _ => {
                        let Some((func, arity)) = Func::lookup(&name) else {
                            self.pos = start;
                            return self.error(format!("unknown name `{name}`"));
                        };
                        self.expect('(')?;
                        let mut args = vec![self.expr()?];
                        while self.peek() == Some(',') {
                            self.pos += 1;
                            args.push(self.expr()?);
                        }
                        self.expect(')')?;
                        if args.len() != arity {
                            return self.error(format!(
                                "`{name}` takes {arity} argument(s), got {}",
                                args.len()
                            ));
                        }
                        Ok(Node::Call(func, args))
                    }
                }
            }
            Some(c) => self.error(format!("unexpected `{c}`")),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        let mut seen_exp = false;
        while let Some(&(_, c)) = self.chars.get(self.pos) {
            let prev = self.pos.checked_sub(1).map(|p| self.chars[p].1);
            let ok = c.is_ascii_digit()
                || c == '.'
                || (!seen_exp && (c == 'e' || c == 'E') && self.pos > start)
                || ((c == '+' || c == '-') && matches!(prev, Some('e' | 'E')) && seen_exp);
            if !ok {
                break;
            }
            if c == 'e' || c == 'E' {
                seen_exp = true;
            }
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos]
            .iter()
            .map(|&(_, c)| c)
            .collect();
        match text.parse::<f64>() {
            Ok(v) => Ok(Node::Num(v)),
            Err(_) => {
                self.pos = start;
                self.error(format!("malformed number `{text}`"))
            }
        }
    }
}
