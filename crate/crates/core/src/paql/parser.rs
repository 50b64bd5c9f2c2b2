//! Recursive-descent parser for the PaQL skeleton:
//!
//! ```text
//! SELECT PACKAGE(rel_alias [, ...]) [AS] package_name
//! FROM rel_name [[AS] rel_alias] [REPEAT k]
//! [WHERE w_condition]
//! [SUCH THAT st_condition]
//! [(MINIMIZE | MAXIMIZE) objective]
//! ```

use super::ast::{AggregateExpr, Bound, GlobalOp, GlobalPredicate, Objective, PackageQuery, Sense};
use super::lexer::{tokenize, Pos, Tok, Token};
use super::{ParseError, ParseErrorKind};
use crate::predicate::{BasePredicate, CmpOp, ColumnRef, Comparison, Literal};

const CLAUSE_KEYWORDS: &[&str] = &["REPEAT", "WHERE", "SUCH", "MINIMIZE", "MAXIMIZE", "AS"];

pub fn parse(text: &str) -> Result<PackageQuery, ParseError> {
    let tokens = tokenize(text)?;
    Parser {
        tokens,
        at: 0,
        package: String::new(),
        scope_names: Vec::new(),
    }
    .query()
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    package: String,
    /// Qualifiers accepted in the base predicate (relation alias and name).
    scope_names: Vec<String>,
}

/// Which names may qualify a column in a conjunctive predicate.
#[derive(Clone, Copy)]
enum Scope {
    Relation,
    Package,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_at(&self, off: usize) -> &Tok {
        let i = (self.at + off).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn error_at(&self, pos: Pos, kind: ParseErrorKind) -> ParseError {
        ParseError::new(pos.line, pos.column, kind)
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        self.error_at(self.pos(), kind)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error(ParseErrorKind::Syntax(format!(
            "expected {expected}, found {}",
            self.peek().describe()
        )))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(kw))
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn query(mut self) -> Result<PackageQuery, ParseError> {
        self.expect_kw("SELECT")?;
        self.expect_kw("PACKAGE")?;
        self.expect(Tok::LParen)?;
        let mut package_of = vec![self.ident("relation alias")?];
        while *self.peek() == Tok::Comma {
            self.advance();
            package_of.push(self.ident("relation alias")?);
        }
        self.expect(Tok::RParen)?;
        self.eat_kw("AS");
        let package_name = self.ident("package name")?;
        self.package = package_name.clone();

        self.expect_kw("FROM")?;
        let relation_name = self.ident("relation name")?;
        let relation_alias = if self.eat_kw("AS") {
            self.ident("relation alias")?
        } else {
            match self.peek() {
                Tok::Ident(s) if !CLAUSE_KEYWORDS.iter().any(|k| s.eq_ignore_ascii_case(k)) => {
                    self.ident("relation alias")?
                }
                _ => relation_name.clone(),
            }
        };
        let repeat = if self.eat_kw("REPEAT") {
            let pos = self.pos();
            match self.advance().tok {
                Tok::Number(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
                    Some(v as u64)
                }
                _ => {
                    return Err(self.error_at(
                        pos,
                        ParseErrorKind::Syntax("REPEAT expects a non-negative integer".into()),
                    ))
                }
            }
        } else {
            None
        };
        if *self.peek() == Tok::Comma {
            return Err(self.error(ParseErrorKind::UnsupportedJoin));
        }
        self.scope_names = vec![relation_alias.clone(), relation_name.clone()];

        let base_predicate = if self.eat_kw("WHERE") {
            Some(self.conjunction(Scope::Relation)?)
        } else {
            None
        };

        let mut global_predicates = Vec::new();
        if self.eat_kw("SUCH") {
            self.expect_kw("THAT")?;
            loop {
                global_predicates.push(self.global_predicate()?);
                if self.eat_kw("AND") {
                    continue;
                }
                if self.is_kw("OR") {
                    return Err(self.error(ParseErrorKind::Disjunction));
                }
                break;
            }
        }

        let objective = if self.eat_kw("MINIMIZE") {
            Some(Objective {
                sense: Sense::Minimize,
                expr: self.aggregate()?,
            })
        } else if self.eat_kw("MAXIMIZE") {
            Some(Objective {
                sense: Sense::Maximize,
                expr: self.aggregate()?,
            })
        } else {
            None
        };
        if objective.is_some() {
            self.reject_arithmetic()?;
        }

        if *self.peek() == Tok::Semicolon {
            self.advance();
        }
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected("end of query"));
        }

        Ok(PackageQuery {
            package_of,
            package_name,
            relation_name,
            relation_alias,
            repeat,
            base_predicate,
            global_predicates,
            objective,
        })
    }

    fn signed_number(&mut self) -> Result<Option<f64>, ParseError> {
        let (sign, off) = match self.peek() {
            Tok::Minus => (-1.0, 1),
            Tok::Plus => (1.0, 1),
            _ => (1.0, 0),
        };
        if let Tok::Number(v) = *self.peek_at(off) {
            for _ in 0..=off {
                self.advance();
            }
            Ok(Some(sign * v))
        } else if off == 1 {
            Err(self.error(ParseErrorKind::Syntax(
                "unary sign must precede a number".into(),
            )))
        } else {
            Ok(None)
        }
    }

    fn number(&mut self, what: &str) -> Result<f64, ParseError> {
        self.signed_number()?.ok_or_else(|| self.unexpected(what))
    }

    fn literal(&mut self) -> Result<Option<Literal>, ParseError> {
        if let Tok::Str(s) = self.peek() {
            let s = s.clone();
            self.advance();
            return Ok(Some(Literal::Str(s)));
        }
        Ok(self.signed_number()?.map(Literal::Num))
    }

    /// Column reference; the qualifier must be a name visible in `scope`.
    fn column(&mut self, scope: Scope) -> Result<ColumnRef, ParseError> {
        let pos = self.pos();
        let first = self.ident("attribute")?;
        if *self.peek() != Tok::Dot {
            return Ok(ColumnRef::bare(first));
        }
        self.advance();
        let name = self.ident("attribute")?;
        let ok = match scope {
            Scope::Relation => self.scope_names.contains(&first),
            Scope::Package => first == self.package,
        };
        if !ok {
            return Err(self.error_at(pos, ParseErrorKind::UnknownQualifier(first)));
        }
        Ok(ColumnRef::bare(name))
    }

    fn comparison_op(&mut self) -> Result<CmpOp, ParseError> {
        match *self.peek() {
            Tok::Op(op) => {
                self.advance();
                Ok(op)
            }
            _ => Err(self.unexpected("comparison operator")),
        }
    }

    /// `term (AND term)*` where a term is `col op lit`, `lit op col`,
    /// `col BETWEEN lit AND lit`, or a parenthesized conjunction.
    fn conjunction(&mut self, scope: Scope) -> Result<BasePredicate, ParseError> {
        let mut terms = Vec::new();
        loop {
            self.predicate_term(scope, &mut terms)?;
            if self.eat_kw("AND") {
                continue;
            }
            if self.is_kw("OR") {
                return Err(self.error(ParseErrorKind::Disjunction));
            }
            break;
        }
        Ok(BasePredicate::new(terms))
    }

    fn predicate_term(&mut self, scope: Scope, out: &mut Vec<Comparison>) -> Result<(), ParseError> {
        if self.is_kw("NOT") {
            return Err(self.error(ParseErrorKind::Unsupported("NOT in predicates".into())));
        }
        if *self.peek() == Tok::LParen {
            self.advance();
            let inner = self.conjunction(scope)?;
            self.expect(Tok::RParen)?;
            out.extend(inner.terms);
            return Ok(());
        }
        if let Some(value) = self.literal()? {
            let op = self.comparison_op()?.flipped();
            let column = self.column(scope)?;
            out.push(Comparison { column, op, value });
            return Ok(());
        }
        let column = self.column(scope)?;
        if self.eat_kw("BETWEEN") {
            let lo = self.literal()?.ok_or_else(|| self.unexpected("literal"))?;
            self.expect_kw("AND")?;
            let hi = self.literal()?.ok_or_else(|| self.unexpected("literal"))?;
            out.push(Comparison {
                column: column.clone(),
                op: CmpOp::Ge,
                value: lo,
            });
            out.push(Comparison {
                column,
                op: CmpOp::Le,
                value: hi,
            });
            return Ok(());
        }
        if matches!(self.peek(), Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash) {
            return Err(self.error(ParseErrorKind::Unsupported(
                "arithmetic in base predicates".into(),
            )));
        }
        let op = self.comparison_op()?;
        let value = self.literal()?.ok_or_else(|| self.unexpected("literal"))?;
        out.push(Comparison { column, op, value });
        Ok(())
    }

    fn global_op(&mut self) -> Result<GlobalOp, ParseError> {
        let pos = self.pos();
        match self.comparison_op()? {
            CmpOp::Le => Ok(GlobalOp::Le),
            CmpOp::Ge => Ok(GlobalOp::Ge),
            CmpOp::Eq => Ok(GlobalOp::Eq),
            CmpOp::Lt | CmpOp::Gt => {
                Err(self.error_at(pos, ParseErrorKind::StrictGlobalInequality))
            }
            CmpOp::Ne => Err(self.error_at(
                pos,
                ParseErrorKind::Unsupported("`<>` in global predicates".into()),
            )),
        }
    }

    fn reject_arithmetic(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Star | Tok::Slash => Err(self.error(ParseErrorKind::NonLinear)),
            Tok::Plus | Tok::Minus => Err(self.error(ParseErrorKind::Unsupported(
                "arithmetic over aggregates".into(),
            ))),
            _ => Ok(()),
        }
    }

    fn global_predicate(&mut self) -> Result<GlobalPredicate, ParseError> {
        // constant on the left: `3 = COUNT(P.*)`
        if let Some(v) = self.signed_number()? {
            let op = self.global_op()?.flipped();
            let lhs = self.aggregate()?;
            self.reject_arithmetic()?;
            return Ok(GlobalPredicate {
                lhs,
                bound: Bound::Cmp(op, v),
            });
        }
        let lhs = self.aggregate()?;
        self.reject_arithmetic()?;
        if self.eat_kw("BETWEEN") {
            let pos = self.pos();
            let lo = self.number("lower bound")?;
            self.expect_kw("AND")?;
            let hi = self.number("upper bound")?;
            if lo > hi {
                return Err(self.error_at(pos, ParseErrorKind::EmptyRange { lo, hi }));
            }
            return Ok(GlobalPredicate {
                lhs,
                bound: Bound::Between(lo, hi),
            });
        }
        let op = self.global_op()?;
        let bound = match self.signed_number()? {
            Some(v) => Bound::Cmp(op, v),
            None => Bound::Aggregate(op, self.aggregate()?),
        };
        self.reject_arithmetic()?;
        Ok(GlobalPredicate { lhs, bound })
    }

    fn aggregate(&mut self) -> Result<AggregateExpr, ParseError> {
        if *self.peek() == Tok::LParen {
            return self.subquery();
        }
        let pos = self.pos();
        let name = match self.peek() {
            Tok::Ident(s) => s.to_ascii_uppercase(),
            _ => return Err(self.unexpected("aggregate")),
        };
        match name.as_str() {
            "COUNT" => {
                self.advance();
                self.expect(Tok::LParen)?;
                if *self.peek() != Tok::Star {
                    let qpos = self.pos();
                    let q = self.ident("`*` or `P.*`")?;
                    if q != self.package {
                        return Err(self.error_at(qpos, ParseErrorKind::UnknownQualifier(q)));
                    }
                    self.expect(Tok::Dot)?;
                }
                self.expect(Tok::Star)?;
                self.expect(Tok::RParen)?;
                Ok(AggregateExpr::CountStar)
            }
            "SUM" | "AVG" => {
                self.advance();
                self.expect(Tok::LParen)?;
                let col = self.column(Scope::Package)?;
                self.reject_arithmetic()?;
                self.expect(Tok::RParen)?;
                Ok(if name == "SUM" {
                    AggregateExpr::Sum(col.name)
                } else {
                    AggregateExpr::Avg(col.name)
                })
            }
            _ if *self.peek_at(1) == Tok::LParen => Err(self.error_at(
                pos,
                ParseErrorKind::UnsupportedAggregate(name),
            )),
            _ => Err(self.unexpected("aggregate")),
        }
    }

    /// `(SELECT agg FROM P [WHERE cond])`
    fn subquery(&mut self) -> Result<AggregateExpr, ParseError> {
        self.expect(Tok::LParen)?;
        self.expect_kw("SELECT")?;
        let pos = self.pos();
        let func = self.ident("aggregate function")?.to_ascii_uppercase();
        self.expect(Tok::LParen)?;
        let column = match func.as_str() {
            "COUNT" => {
                self.expect(Tok::Star)?;
                None
            }
            "SUM" | "AVG" => {
                let c = self.column(Scope::Package)?;
                self.reject_arithmetic()?;
                Some(c.name)
            }
            _ => return Err(self.error_at(pos, ParseErrorKind::UnsupportedAggregate(func))),
        };
        self.expect(Tok::RParen)?;
        self.expect_kw("FROM")?;
        let from_pos = self.pos();
        let from = self.ident("package name")?;
        if from != self.package {
            return Err(self.error_at(from_pos, ParseErrorKind::UnknownQualifier(from)));
        }
        let filter = if self.eat_kw("WHERE") {
            Some(self.conjunction(Scope::Package)?)
        } else {
            None
        };
        self.expect(Tok::RParen)?;
        match (column, filter) {
            (None, None) => Ok(AggregateExpr::CountStar),
            (None, Some(f)) => Ok(AggregateExpr::FilteredCount(f)),
            (Some(c), None) if func == "SUM" => Ok(AggregateExpr::Sum(c)),
            (Some(c), None) => Ok(AggregateExpr::Avg(c)),
            (Some(_), Some(_)) => Err(self.error_at(
                pos,
                ParseErrorKind::Unsupported("filtered SUM/AVG subqueries".into()),
            )),
        }
    }
}
