use super::{BinOp, Expr, ExprError, Func, C64};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut k = 0;
    while k < chars.len() {
        let ch = chars[k];
        let (l0, c0) = (line, column);
        if ch == '\n' {
            line += 1;
            column = 1;
            k += 1;
            continue;
        }
        if ch.is_whitespace() {
            column += 1;
            k += 1;
            continue;
        }
        let single = match ch {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, line: l0, column: c0 });
            column += 1;
            k += 1;
            continue;
        }
        if ch.is_ascii_digit() || ch == '.' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let mut j = k + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    k = j;
                }
            }
            let text: String = chars[start..k].iter().collect();
            let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                line: l0,
                column: c0,
                message: format!("malformed number `{text}`"),
            })?;
            column += k - start;
            out.push(Spanned { tok: Tok::Num(value), line: l0, column: c0 });
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            let text: String = chars[start..k].iter().collect();
            column += k - start;
            out.push(Spanned { tok: Tok::Ident(text), line: l0, column: c0 });
            continue;
        }
        return Err(ExprError::Syntax {
            line: l0,
            column: c0,
            message: format!("unexpected character `{ch}`"),
        });
    }
    out.push(Spanned { tok: Tok::End, line, column });
    Ok(out)
}

pub(super) struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    pub(super) fn new(src: &str) -> Result<Self, ExprError> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ExprError {
        let t = self.peek();
        ExprError::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    pub(super) fn parse_document(&mut self) -> Result<Expr, ExprError> {
        let e = self.parse_sum()?;
        if self.peek().tok != Tok::End {
            return Err(self.error_here("unexpected trailing input"));
        }
        Ok(e)
    }

    fn parse_sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_product()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn parse_product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.parse_unary()?)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ExprError> {
        let base = self.parse_primary()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let (line, column) = (self.peek().line, self.peek().column);
        // the exponent is itself a unary expression, which makes `^` right associative
        let exponent = self.parse_unary()?;
        let n = fold_integer(&exponent).ok_or(ExprError::NonIntegerExponent { line, column })?;
        Ok(Expr::Pow(Box::new(base), n))
    }

    fn parse_primary(&mut self) -> Result<Expr, ExprError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.parse_sum()?;
                if self.peek().tok != Tok::RParen {
                    return Err(self.error_here("expected `)`"));
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    let func = Func::from_name(&name).ok_or(ExprError::UnknownFunction {
                        name: name.clone(),
                        line: t.line,
                        column: t.column,
                    })?;
                    self.bump();
                    let arg = self.parse_sum()?;
                    if self.peek().tok != Tok::RParen {
                        return Err(self.error_here("expected `)` after function argument"));
                    }
                    self.bump();
                    Ok(Expr::Call(func, Box::new(arg)))
                } else if name == "i" {
                    Ok(Expr::ImagUnit)
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Tok::End => Err(ExprError::Syntax {
                line: t.line,
                column: t.column,
                message: "unexpected end of input".into(),
            }),
            other => Err(ExprError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }
}

/// Folds a variable-free real expression to an `i32`, if it is integral.
fn fold_integer(e: &Expr) -> Option<i32> {
    let v = fold(e)?;
    if v.im != 0.0 || !v.re.is_finite() || v.re.fract() != 0.0 || v.re.abs() > i32::MAX as f64 {
        return None;
    }
    Some(v.re as i32)
}

fn fold(e: &Expr) -> Option<C64> {
    Some(match e {
        Expr::Num(v) => C64::new(*v, 0.0),
        Expr::Neg(a) => -fold(a)?,
        Expr::Binary(op, a, b) => {
            let (a, b) = (fold(a)?, fold(b)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == C64::new(0.0, 0.0) {
                        return None;
                    }
                    a / b
                }
            }
        }
        Expr::Pow(a, n) => {
            let a = fold(a)?;
            if a == C64::new(0.0, 0.0) && *n < 0 {
                return None;
            }
            a.powi(*n)
        }
        // only real integer arithmetic can produce an exponent
        Expr::ImagUnit | Expr::Var(_) | Expr::Call(..) => return None,
    })
}
