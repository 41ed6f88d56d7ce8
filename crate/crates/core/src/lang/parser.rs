use std::collections::{BTreeSet, HashSet};

use super::ast::{Cond, Expr, Program, Stmt, StmtKind};
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::expr::{BoolExpr, Comparison, Relop};

/// Parses a `.imp` source into a checked [`Program`].
pub fn parse(source: &str) -> Result<Program, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        scopes: Vec::new(),
        assigned: HashSet::new(),
    };
    let prog = p.program()?;
    check_unique_lines(&prog)?;
    Ok(prog)
}

fn check_unique_lines(p: &Program) -> Result<(), ParseError> {
    let mut seen = BTreeSet::new();
    let mut dup = None;
    p.walk(&mut |s| {
        if !seen.insert(s.line) && dup.is_none() {
            dup = Some(s.line);
        }
    });
    match dup {
        Some(line) => Err(ParseError::DuplicateLine { line }),
        None => Ok(()),
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    scopes: Vec<HashSet<String>>,
    // definitely-assigned variables at the current point
    assigned: HashSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (u32, u32) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.advance())
        } else {
            self.syntax(format!("expected {what}, found {:?}", self.peek()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, u32), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let t = self.advance();
                Ok((name, t.line))
            }
            other => self.syntax(format!("expected identifier, found {other:?}")),
        }
    }

    fn is_declared(&self, name: &str) -> bool {
        self.scopes.iter().any(|s| s.contains(name))
    }

    fn declare(&mut self, name: &str) -> Result<(), ParseError> {
        if self.is_declared(name) {
            return self.syntax(format!("variable {name} is already declared"));
        }
        self.scopes
            .last_mut()
            .expect("scope stack is never empty while parsing")
            .insert(name.to_string());
        Ok(())
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        self.expect(Tok::Prog, "`prog`")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen, "`(`")?;
        self.scopes.push(HashSet::new());
        let mut inputs = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                self.expect(Tok::KwInt, "`int`")?;
                let (param, _) = self.ident()?;
                self.declare(&param)?;
                self.assigned.insert(param.clone());
                inputs.push(param);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::LBrace, "`{`")?;
        self.expect(Tok::Pre, "`pre`")?;
        let precondition = self.cond()?;
        self.expect(Tok::Semi, "`;`")?;
        let mut locals = Vec::new();
        while *self.peek() == Tok::KwInt
            && matches!(self.toks.get(self.pos + 2).map(|t| &t.tok), Some(Tok::Semi))
        {
            self.advance();
            let (name, _) = self.ident()?;
            self.advance();
            self.declare(&name)?;
            locals.push(name);
        }
        let mut body = Vec::new();
        while *self.peek() != Tok::Post {
            if *self.peek() == Tok::Eof || *self.peek() == Tok::RBrace {
                return self.syntax("expected `post` before end of program");
            }
            body.push(self.stmt()?);
        }
        self.advance();
        let postcondition = self.cond()?;
        self.expect(Tok::Semi, "`;`")?;
        self.expect(Tok::RBrace, "`}`")?;
        if *self.peek() != Tok::Eof {
            return self.syntax("trailing input after program");
        }
        Ok(Program {
            name,
            inputs,
            locals,
            precondition,
            body,
            postcondition,
        })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        self.scopes.push(HashSet::new());
        let mut out = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return self.syntax("unterminated block");
            }
            out.push(self.stmt()?);
        }
        self.advance();
        self.scopes.pop();
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let (line, _) = self.here();
        match self.peek().clone() {
            Tok::KwInt => {
                self.advance();
                let (target, _) = self.ident()?;
                self.expect(Tok::Assign, "`=` (declarations need an initializer)")?;
                let rhs = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                // the initializer cannot see the variable it declares
                self.declare(&target)?;
                self.assigned.insert(target.clone());
                Ok(Stmt {
                    kind: StmtKind::Assign {
                        target,
                        rhs,
                        declares: true,
                    },
                    line,
                })
            }
            Tok::Ident(name) => {
                self.advance();
                if !self.is_declared(&name) {
                    return Err(ParseError::UndeclaredVariable { name, line });
                }
                self.expect(Tok::Assign, "`=`")?;
                let rhs = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                self.assigned.insert(name.clone());
                Ok(Stmt {
                    kind: StmtKind::Assign {
                        target: name,
                        rhs,
                        declares: false,
                    },
                    line,
                })
            }
            Tok::If => self.if_stmt(),
            Tok::While => {
                self.advance();
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.cond()?;
                self.expect(Tok::RParen, "`)`")?;
                let before = self.assigned.clone();
                let body = self.block()?;
                // the body may run zero times
                self.assigned = before;
                Ok(Stmt {
                    kind: StmtKind::While { cond, body },
                    line,
                })
            }
            Tok::Assume => {
                self.advance();
                let cond = self.cond()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(Stmt {
                    kind: StmtKind::Guard { cond },
                    line,
                })
            }
            other => self.syntax(format!("expected statement, found {other:?}")),
        }
    }

    fn if_stmt(&mut self) -> Result<Stmt, ParseError> {
        let (line, _) = self.here();
        self.expect(Tok::If, "`if`")?;
        self.expect(Tok::LParen, "`(`")?;
        let cond = self.cond()?;
        self.expect(Tok::RParen, "`)`")?;
        let before = self.assigned.clone();
        let then_branch = self.block()?;
        let after_then = std::mem::replace(&mut self.assigned, before);
        let else_branch = if self.eat(&Tok::Else) {
            if *self.peek() == Tok::If {
                vec![self.if_stmt()?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        self.assigned.retain(|v| after_then.contains(v));
        Ok(Stmt {
            kind: StmtKind::IfElse {
                cond,
                then_branch,
                else_branch,
            },
            line,
        })
    }

    // ---- conditions ----

    fn cond(&mut self) -> Result<Cond, ParseError> {
        let mut lhs = self.cond_and()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.cond_and()?;
            lhs = BoolExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn cond_and(&mut self) -> Result<Cond, ParseError> {
        let mut lhs = self.cond_not()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.cond_not()?;
            lhs = BoolExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn cond_not(&mut self) -> Result<Cond, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(BoolExpr::negation(self.cond_not()?));
        }
        self.cond_atom()
    }

    fn cond_atom(&mut self) -> Result<Cond, ParseError> {
        match self.peek() {
            Tok::True => {
                self.advance();
                Ok(BoolExpr::True)
            }
            Tok::False => {
                self.advance();
                Ok(BoolExpr::False)
            }
            Tok::LParen => {
                // `(` opens either an arithmetic group or a condition group
                let save = self.pos;
                match self.comparison() {
                    Ok(c) => Ok(c),
                    Err(e @ (ParseError::NonLinearExpression { .. }
                    | ParseError::UndeclaredVariable { .. })) => Err(e),
                    Err(_) => {
                        self.pos = save;
                        self.advance();
                        let inner = self.cond()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(inner)
                    }
                }
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> Result<Cond, ParseError> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::EqEq => Relop::Eq,
            Tok::Ne => Relop::Ne,
            Tok::Lt => Relop::Lt,
            Tok::Le => Relop::Le,
            Tok::Gt => Relop::Gt,
            Tok::Ge => Relop::Ge,
            other => return self.syntax(format!("expected comparison operator, found {other:?}")),
        };
        self.advance();
        let rhs = self.expr()?;
        Ok(BoolExpr::Cmp(Comparison { lhs, op, rhs }))
    }

    // ---- linear arithmetic ----

    fn overflow<T>(&self) -> Result<T, ParseError> {
        self.syntax("integer overflow in constant folding")
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            let neg = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => return Ok(acc),
            };
            self.advance();
            let rhs = self.term()?;
            let next = if neg {
                acc.checked_sub(&rhs)
            } else {
                acc.checked_add(&rhs)
            };
            acc = match next {
                Some(e) => e,
                None => return self.overflow(),
            };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            let (line, _) = self.here();
            match self.peek() {
                Tok::Star => {
                    self.advance();
                    let rhs = self.unary()?;
                    let product = if acc.is_constant() {
                        rhs.checked_scale(acc.constant_term())
                    } else if rhs.is_constant() {
                        acc.checked_scale(rhs.constant_term())
                    } else {
                        return Err(ParseError::NonLinearExpression { line });
                    };
                    acc = match product {
                        Some(e) => e,
                        None => return self.overflow(),
                    };
                }
                Tok::Slash | Tok::Percent => {
                    return Err(ParseError::NonLinearExpression { line });
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            let inner = self.unary()?;
            return match inner.checked_scale(-1) {
                Some(e) => Ok(e),
                None => self.overflow(),
            };
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(Expr::constant(v))
            }
            Tok::Ident(name) => {
                let t = self.advance();
                if !self.is_declared(&name) {
                    return Err(ParseError::UndeclaredVariable { name, line: t.line });
                }
                if !self.assigned.contains(&name) {
                    return Err(ParseError::UnassignedVariable { name, line: t.line });
                }
                Ok(Expr::var(name))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            other => self.syntax(format!("expected expression, found {other:?}")),
        }
    }
}
