//! Parser for the level-specification DSL.
//!
//! A file holds `level` blocks:
//!
//! ```text
//! level SerA {
//!   framework commit_order;
//!   axiom forall x:Obj, t1:Txn, t2:Txn, t3:Txn .
//!     wr[x](t1,t2) && writesx(t3,x) && t3 != t1 && co(t3,t2) => co(t3,t1)
//! }
//! ```
//!
//! Formula syntax: `forall v:Sort, ... . body`, `exists`, `&&`, `||`, `!`,
//! `=>`, `=`, `!=`, relation application `r(a,b)`, relation expressions
//! `r | s` (union), `r ; s` (composition), `r+` (transitive closure), and
//! parentheses. `wr(a,b)` is the derived read-from relation, `wr[x](a,b)`
//! restricts it to one object, and `writesx(t,x)` abbreviates
//! `exists v:Val. writes(t,x,v)`. `let` introduces reusable macros.
//! Comments run from `//` to end of line.

use crate::fol::{
    self, base_signature, check_well_formed, Formula, RelExpr, RelationSymbol, Sort, Term, Var,
};
use crate::levels::{framework_by_name, Framework, LevelSpec};
use std::fmt;
use std::rc::Rc;

/// A parse or validation failure with its source location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Dot,
    Colon,
    Bang,
    BangEq,
    Eq,
    AndAnd,
    OrOr,
    FatArrow,
    Pipe,
    Plus,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{}", s),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::Comma => write!(f, ","),
            Tok::Semi => write!(f, ";"),
            Tok::Dot => write!(f, "."),
            Tok::Colon => write!(f, ":"),
            Tok::Bang => write!(f, "!"),
            Tok::BangEq => write!(f, "!="),
            Tok::Eq => write!(f, "="),
            Tok::AndAnd => write!(f, "&&"),
            Tok::OrOr => write!(f, "||"),
            Tok::FatArrow => write!(f, "=>"),
            Tok::Pipe => write!(f, "|"),
            Tok::Plus => write!(f, "+"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseDiagnostic> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let advance = |chars: &mut std::iter::Peekable<std::str::Chars>,
                           line: &mut usize,
                           col: &mut usize| {
            let c = chars.next().unwrap();
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            c
        };
        if c.is_whitespace() {
            advance(&mut chars, &mut line, &mut col);
            continue;
        }
        if c == '/' {
            advance(&mut chars, &mut line, &mut col);
            if chars.peek() == Some(&'/') {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    advance(&mut chars, &mut line, &mut col);
                }
                continue;
            }
            return Err(ParseDiagnostic {
                line: tline,
                col: tcol,
                message: "unexpected character '/'".to_string(),
            });
        }
        if c.is_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' {
                    ident.push(advance(&mut chars, &mut line, &mut col));
                } else {
                    break;
                }
            }
            out.push(Spanned { tok: Tok::Ident(ident), line: tline, col: tcol });
            continue;
        }
        advance(&mut chars, &mut line, &mut col);
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '.' => Tok::Dot,
            ':' => Tok::Colon,
            '+' => Tok::Plus,
            '!' => {
                if chars.peek() == Some(&'=') {
                    advance(&mut chars, &mut line, &mut col);
                    Tok::BangEq
                } else {
                    Tok::Bang
                }
            }
            '=' => {
                if chars.peek() == Some(&'>') {
                    advance(&mut chars, &mut line, &mut col);
                    Tok::FatArrow
                } else {
                    Tok::Eq
                }
            }
            '&' => {
                if chars.peek() == Some(&'&') {
                    advance(&mut chars, &mut line, &mut col);
                    Tok::AndAnd
                } else {
                    return Err(ParseDiagnostic {
                        line: tline,
                        col: tcol,
                        message: "expected '&&'".to_string(),
                    });
                }
            }
            '|' => {
                if chars.peek() == Some(&'|') {
                    advance(&mut chars, &mut line, &mut col);
                    Tok::OrOr
                } else {
                    Tok::Pipe
                }
            }
            other => {
                return Err(ParseDiagnostic {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character {:?}", other),
                })
            }
        };
        out.push(Spanned { tok, line: tline, col: tcol });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

#[derive(Clone)]
enum LetDef {
    Formula { params: Vec<(String, Sort)>, body: Formula },
    Rel(RelExpr),
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    diags: Vec<ParseDiagnostic>,
    signature: Vec<Rc<RelationSymbol>>,
    lets: Vec<(String, LetDef)>,
    binders: Vec<(String, Sort)>,
    gensym: usize,
}

/// Parse failure marker; the diagnostic was already recorded.
struct Fail;
type PResult<T> = Result<T, Fail>;

impl Parser {
    fn new(tokens: Vec<Spanned>, signature: Vec<Rc<RelationSymbol>>) -> Self {
        Parser { tokens, pos: 0, diags: Vec::new(), signature, lets: Vec::new(), binders: Vec::new(), gensym: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.tokens[self.pos];
        (s.line, s.col)
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error<T>(&mut self, message: impl Into<String>) -> PResult<T> {
        let (line, col) = self.here();
        self.diags.push(ParseDiagnostic { line, col, message: message.into() });
        Err(Fail)
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            let found = self.peek().clone();
            self.error(format!("expected '{}', found '{}'", tok, found))
        }
    }

    fn expect_ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            other => self.error(format!("expected identifier, found '{}'", other)),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Tok::Ident(name) if name == kw => {
                self.bump();
                Ok(())
            }
            other => {
                let found = other.clone();
                self.error(format!("expected '{}', found '{}'", kw, found))
            }
        }
    }

    fn lookup_symbol(&self, name: &str) -> Option<Rc<RelationSymbol>> {
        self.signature.iter().find(|s| s.name == name).cloned()
    }

    fn lookup_let(&self, name: &str) -> Option<LetDef> {
        self.lets.iter().rev().find(|(n, _)| n == name).map(|(_, def)| def.clone())
    }

    fn fresh_suffix(&mut self) -> usize {
        self.gensym += 1;
        self.gensym
    }

    // --- terms --------------------------------------------------------------

    fn parse_sort(&mut self) -> PResult<Sort> {
        let name = self.expect_ident()?;
        match name.as_str() {
            "Txn" => Ok(Sort::Txn),
            "Obj" => Ok(Sort::Obj),
            "Val" => Ok(Sort::Val),
            other => {
                self.pos -= 1;
                self.error(format!("unknown sort {}", other))
            }
        }
    }

    fn constant_from_name(name: &str) -> Option<Term> {
        let (prefix, sort) = match name.chars().next()? {
            't' => ("t", Sort::Txn),
            'x' => ("x", Sort::Obj),
            'n' => ("n", Sort::Val),
            _ => return None,
        };
        let digits = name.strip_prefix(prefix)?;
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        if digits.len() > 1 && digits.starts_with('0') {
            return None;
        }
        Some(Term::constant(digits.parse().ok()?, sort))
    }

    fn parse_term(&mut self) -> PResult<Term> {
        let name = self.expect_ident()?;
        if let Some((_, sort)) = self.binders.iter().rev().find(|(n, _)| *n == name) {
            return Ok(Term::var(name, *sort));
        }
        if let Some(constant) = Self::constant_from_name(&name) {
            return Ok(constant);
        }
        self.pos -= 1;
        self.error(format!("unbound variable or unknown constant {}", name))
    }

    // --- relation expressions -------------------------------------------------

    /// Quiet attempt used for backtracking: no diagnostics on failure.
    fn try_rel_expr_application(&mut self) -> Option<Formula> {
        let save_pos = self.pos;
        let save_diags = self.diags.len();
        let result = (|| -> PResult<Formula> {
            let expr = self.parse_rel_expr()?;
            self.expect(Tok::LParen)?;
            let a = self.parse_term()?;
            self.expect(Tok::Comma)?;
            let b = self.parse_term()?;
            self.expect(Tok::RParen)?;
            Ok(self.rel_application(expr, a, b))
        })();
        match result {
            Ok(f) => Some(f),
            Err(Fail) => {
                self.pos = save_pos;
                self.diags.truncate(save_diags);
                None
            }
        }
    }

    /// A plain symbol expression becomes an ordinary atom; anything
    /// structured stays a relation-expression atom.
    fn rel_application(&self, expr: RelExpr, a: Term, b: Term) -> Formula {
        if let fol::RelExprKind::Symbol(sym) = expr.kind() {
            Formula::atom(sym.clone(), vec![a, b])
        } else {
            Formula::rel_atom(expr, a, b)
        }
    }

    fn parse_rel_expr(&mut self) -> PResult<RelExpr> {
        let mut left = self.parse_rel_compose()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let right = self.parse_rel_compose()?;
            left = left.union(right);
        }
        Ok(left)
    }

    /// Relation expression without bare top-level composition, for `let`
    /// bodies where ';' terminates the statement. Compositions there need
    /// parentheses: `let r() = (a ; b);`.
    fn parse_rel_expr_stmt(&mut self) -> PResult<RelExpr> {
        let mut left = self.parse_rel_postfix()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let right = self.parse_rel_postfix()?;
            left = left.union(right);
        }
        Ok(left)
    }

    fn parse_rel_compose(&mut self) -> PResult<RelExpr> {
        let mut left = self.parse_rel_postfix()?;
        while *self.peek() == Tok::Semi {
            self.bump();
            let right = self.parse_rel_postfix()?;
            left = left.compose(right);
        }
        Ok(left)
    }

    fn parse_rel_postfix(&mut self) -> PResult<RelExpr> {
        let mut expr = self.parse_rel_primary()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            expr = expr.closure();
        }
        Ok(expr)
    }

    fn parse_rel_primary(&mut self) -> PResult<RelExpr> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let expr = self.parse_rel_expr()?;
                self.expect(Tok::RParen)?;
                Ok(expr)
            }
            Tok::Ident(name) => {
                if name == "wr" {
                    self.bump();
                    return Ok(RelExpr::write_read());
                }
                if let Some(LetDef::Rel(expr)) = self.lookup_let(&name) {
                    self.bump();
                    return Ok(expr);
                }
                match self.lookup_symbol(&name) {
                    Some(sym) if sym.is_txn_binary() => {
                        self.bump();
                        Ok(RelExpr::symbol(sym))
                    }
                    _ => self.error(format!("{} is not a binary transaction relation", name)),
                }
            }
            other => self.error(format!("expected relation expression, found '{}'", other)),
        }
    }

    // --- formulas ---------------------------------------------------------------

    fn parse_formula(&mut self) -> PResult<Formula> {
        let left = self.parse_or()?;
        if *self.peek() == Tok::FatArrow {
            self.bump();
            let right = self.parse_formula()?;
            Ok(left.implies(right))
        } else {
            Ok(left)
        }
    }

    fn parse_or(&mut self) -> PResult<Formula> {
        let mut left = self.parse_and()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            let right = self.parse_and()?;
            left = left.or(right);
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> PResult<Formula> {
        let mut left = self.parse_unary()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            let right = self.parse_unary()?;
            left = left.and(right);
        }
        Ok(left)
    }

    fn parse_unary(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(self.parse_unary()?.not())
            }
            Tok::Ident(kw) if kw == "forall" || kw == "exists" => {
                self.bump();
                let mut binders = Vec::new();
                loop {
                    let name = self.expect_ident()?;
                    self.expect(Tok::Colon)?;
                    let sort = self.parse_sort()?;
                    binders.push(Var::new(name.clone(), sort));
                    self.binders.push((name, sort));
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                let result = self.expect(Tok::Dot).and_then(|_| self.parse_formula());
                for _ in 0..binders.len() {
                    self.binders.pop();
                }
                let body = result?;
                Ok(if kw == "forall" {
                    Formula::forall_many(binders, body)
                } else {
                    Formula::exists_many(binders, body)
                })
            }
            _ => self.parse_atom(),
        }
    }

    fn parse_atom(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::LParen => {
                // Could be a parenthesized relation expression applied to a
                // pair, or a parenthesized formula. Try the former first.
                if let Some(atom) = self.try_rel_expr_application() {
                    return Ok(atom);
                }
                self.bump();
                let inner = self.parse_formula()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                // wr[x](a, b)
                if name == "wr" && *self.peek2() == Tok::LBracket {
                    self.bump();
                    self.bump();
                    let obj = self.parse_term()?;
                    self.expect(Tok::RBracket)?;
                    self.expect(Tok::LParen)?;
                    let a = self.parse_term()?;
                    self.expect(Tok::Comma)?;
                    let b = self.parse_term()?;
                    self.expect(Tok::RParen)?;
                    return Ok(wr_on_object(obj, a, b));
                }
                if *self.peek2() == Tok::LParen {
                    return self.parse_application(name);
                }
                // equality / inequality between terms
                let a = self.parse_term()?;
                match self.peek().clone() {
                    Tok::Eq => {
                        self.bump();
                        let b = self.parse_term()?;
                        Ok(Formula::eq(a, b))
                    }
                    Tok::BangEq => {
                        self.bump();
                        let b = self.parse_term()?;
                        Ok(Formula::neq(a, b))
                    }
                    other => self.error(format!("expected '=' or '!=', found '{}'", other)),
                }
            }
            other => self.error(format!("expected formula, found '{}'", other)),
        }
    }

    fn parse_application(&mut self, name: String) -> PResult<Formula> {
        // Relation expressions may start with a bare binary symbol followed
        // by postfix/infix operators, e.g. so+(a,b). Handle the general
        // case with backtracking when the name could begin one.
        let could_be_rexpr = name == "wr"
            || self.lookup_symbol(&name).is_some_and(|s| s.is_txn_binary())
            || matches!(self.lookup_let(&name), Some(LetDef::Rel(_)));
        if could_be_rexpr {
            if let Some(atom) = self.try_rel_expr_application() {
                return Ok(atom);
            }
        }
        self.bump(); // the name
        self.expect(Tok::LParen)?;
        let mut args = vec![self.parse_term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.parse_term()?);
        }
        self.expect(Tok::RParen)?;

        if name == "writesx" {
            if args.len() != 2 {
                return self.error("writesx takes two arguments: writesx(t, x)");
            }
            return Ok(writes_some_value(args[0].clone(), args[1].clone()));
        }
        if let Some(def) = self.lookup_let(&name) {
            return match def {
                LetDef::Formula { params, body } => self.expand_let(&name, &params, &body, args),
                LetDef::Rel(_) => self.error(format!(
                    "{} names a relation expression, apply it to a transaction pair",
                    name
                )),
            };
        }
        match self.lookup_symbol(&name) {
            Some(sym) => {
                if args.len() != sym.arity() {
                    return self.error(format!(
                        "{} expects {} arguments, got {}",
                        name,
                        sym.arity(),
                        args.len()
                    ));
                }
                Ok(Formula::atom(sym, args))
            }
            None => self.error(format!("unknown relation {}", name)),
        }
    }

    fn expand_let(
        &mut self,
        name: &str,
        params: &[(String, Sort)],
        body: &Formula,
        args: Vec<Term>,
    ) -> PResult<Formula> {
        if args.len() != params.len() {
            return self.error(format!(
                "{} expects {} arguments, got {}",
                name,
                params.len(),
                args.len()
            ));
        }
        for ((pname, psort), arg) in params.iter().zip(&args) {
            if arg.sort() != *psort {
                return self.error(format!(
                    "argument for parameter {} of {} has sort {}, expected {}",
                    pname,
                    name,
                    arg.sort(),
                    psort
                ));
            }
        }
        // Freshen the body's bound variables so argument variables cannot be
        // captured, then substitute arguments for parameters.
        let suffix = self.fresh_suffix();
        let mut body = freshen_binders(body, suffix);
        for ((pname, psort), arg) in params.iter().zip(&args) {
            body = fol::substitute_unchecked(&body, &Var::new(pname.clone(), *psort), arg);
        }
        Ok(body)
    }

    // --- level blocks ---------------------------------------------------------

    fn parse_let_def(&mut self) -> PResult<()> {
        self.expect_keyword("let")?;
        let name = self.expect_ident()?;
        self.expect(Tok::LParen)?;
        let mut params: Vec<(String, Sort)> = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let pname = self.expect_ident()?;
                self.expect(Tok::Colon)?;
                let sort = self.parse_sort()?;
                params.push((pname, sort));
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Eq)?;

        // A parameterless definition may name a relation expression.
        if params.is_empty() {
            let save_pos = self.pos;
            let save_diags = self.diags.len();
            if let Ok(expr) = self.parse_rel_expr_stmt() {
                if *self.peek() == Tok::Semi {
                    self.bump();
                    self.lets.push((name, LetDef::Rel(expr)));
                    return Ok(());
                }
            }
            self.pos = save_pos;
            self.diags.truncate(save_diags);
        }

        for (pname, sort) in &params {
            self.binders.push((pname.clone(), *sort));
        }
        let body = self.parse_formula();
        for _ in 0..params.len() {
            self.binders.pop();
        }
        let body = body?;
        self.expect(Tok::Semi)?;
        self.lets.push((name, LetDef::Formula { params, body }));
        Ok(())
    }

    fn parse_level(&mut self) -> PResult<LevelSpec> {
        self.expect_keyword("level")?;
        let name = self.expect_ident()?;
        self.expect(Tok::LBrace)?;
        self.expect_keyword("framework")?;
        let (fline, fcol) = self.here();
        let framework_name = self.expect_ident()?;
        let framework = match framework_by_name(&framework_name) {
            Some(fw) => fw,
            None => {
                self.diags.push(ParseDiagnostic {
                    line: fline,
                    col: fcol,
                    message: format!("unknown framework {}", framework_name),
                });
                return Err(Fail);
            }
        };
        self.expect(Tok::Semi)?;

        // the level's working signature: base plus the framework's aux
        let outer_signature = self.signature.clone();
        self.signature.extend(framework.aux.iter().cloned());
        let outer_lets = self.lets.len();

        let result = self.parse_level_body(&name, &framework);

        self.signature = outer_signature;
        self.lets.truncate(outer_lets);
        result
    }

    fn parse_level_body(&mut self, name: &str, framework: &Rc<Framework>) -> PResult<LevelSpec> {
        let mut axioms: Vec<(Formula, usize, usize)> = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Ident(kw) if kw == "let" => self.parse_let_def()?,
                Tok::Ident(kw) if kw == "axiom" => {
                    self.bump();
                    let (line, col) = self.here();
                    let formula = self.parse_formula()?;
                    if *self.peek() == Tok::Semi {
                        self.bump();
                    }
                    axioms.push((formula, line, col));
                }
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                other => {
                    return self.error(format!(
                        "expected 'let', 'axiom' or '}}' in level {}, found '{}'",
                        name, other
                    ))
                }
            }
        }
        if axioms.is_empty() {
            return self.error(format!("level {} has no axioms", name));
        }

        let mut failed = false;
        for (formula, line, col) in &axioms {
            if let Err(diags) = check_well_formed(formula, &self.signature) {
                for d in diags {
                    self.diags.push(ParseDiagnostic { line: *line, col: *col, message: d.message });
                }
                failed = true;
            }
            if !formula.is_constant_free() {
                self.diags.push(ParseDiagnostic {
                    line: *line,
                    col: *col,
                    message: "level axioms must not mention constants".to_string(),
                });
                failed = true;
            }
        }
        if failed {
            return Err(Fail);
        }
        let formula = Formula::and_all(axioms.into_iter().map(|(f, _, _)| f));
        Ok(LevelSpec { name: name.to_string(), framework: framework.clone(), formula })
    }

    fn parse_file(&mut self) -> Vec<LevelSpec> {
        let mut specs = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(kw) if kw == "level" => match self.parse_level() {
                    Ok(spec) => specs.push(spec),
                    Err(Fail) => self.skip_to_next_level(),
                },
                other => {
                    let _ = self.error::<()>(format!("expected 'level', found '{}'", other));
                    self.skip_to_next_level();
                }
            }
        }
        specs
    }

    /// Error recovery: skip past the current block so later levels still
    /// get diagnostics.
    fn skip_to_next_level(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::LBrace => {
                    depth += 1;
                    self.bump();
                }
                Tok::RBrace => {
                    self.bump();
                    if depth <= 1 {
                        break;
                    }
                    depth -= 1;
                }
                Tok::Ident(kw) if kw == "level" && depth == 0 => break,
                _ => {
                    self.bump();
                }
            }
        }
    }
}

/// `wr[x](a, b)`: b reads the value of x that a wrote. The bound value
/// variable uses a name the lexer cannot produce, so capture is impossible.
fn wr_on_object(obj: Term, a: Term, b: Term) -> Formula {
    let v = Var::new("v$wr", Sort::Val);
    Formula::exists(
        v.clone(),
        Formula::atom(fol::writes_symbol(), vec![a, obj.clone(), Term::Var(v.clone())]).and(
            Formula::atom(fol::reads_symbol(), vec![b, obj, Term::Var(v)]),
        ),
    )
}

/// `writesx(t, x)`: t writes some value to x.
fn writes_some_value(t: Term, x: Term) -> Formula {
    let v = Var::new("v$w", Sort::Val);
    Formula::exists(
        v.clone(),
        Formula::atom(fol::writes_symbol(), vec![t, x, Term::Var(v)]),
    )
}

/// Renames every bound variable `name` to `name$suffix`.
fn freshen_binders(f: &Formula, suffix: usize) -> Formula {
    use crate::fol::FormulaKind;
    fn rename_term(t: &Term, map: &[(String, String)]) -> Term {
        match t {
            Term::Var(v) => match map.iter().rev().find(|(old, _)| *old == v.name) {
                Some((_, new)) => Term::var(new.clone(), v.sort),
                None => t.clone(),
            },
            c => c.clone(),
        }
    }
    fn walk(f: &Formula, suffix: usize, map: &mut Vec<(String, String)>) -> Formula {
        match f.kind() {
            FormulaKind::Atom(sym, args) => {
                Formula::atom(sym.clone(), args.iter().map(|t| rename_term(t, map)).collect())
            }
            FormulaKind::RelAtom(expr, a, b) => {
                Formula::rel_atom(expr.clone(), rename_term(a, map), rename_term(b, map))
            }
            FormulaKind::Eq(a, b) => Formula::eq(rename_term(a, map), rename_term(b, map)),
            FormulaKind::Not(g) => walk(g, suffix, map).not(),
            FormulaKind::And(a, b) => walk(a, suffix, map).and(walk(b, suffix, map)),
            FormulaKind::Or(a, b) => walk(a, suffix, map).or(walk(b, suffix, map)),
            FormulaKind::Implies(a, b) => walk(a, suffix, map).implies(walk(b, suffix, map)),
            FormulaKind::Forall(v, g) | FormulaKind::Exists(v, g) => {
                let fresh = format!("{}${}", v.name, suffix);
                map.push((v.name.clone(), fresh.clone()));
                let body = walk(g, suffix, map);
                map.pop();
                let var = Var::new(fresh, v.sort);
                if matches!(f.kind(), FormulaKind::Forall(_, _)) {
                    Formula::forall(var, body)
                } else {
                    Formula::exists(var, body)
                }
            }
        }
    }
    walk(f, suffix, &mut Vec::new())
}

/// Parses a level file. On any error, returns every diagnostic found and no
/// specs. An empty file parses to an empty list.
pub fn parse_level_file(text: &str) -> Result<Vec<LevelSpec>, Vec<ParseDiagnostic>> {
    let tokens = match lex(text) {
        Ok(tokens) => tokens,
        Err(diag) => return Err(vec![diag]),
    };
    let mut parser = Parser::new(tokens, base_signature());
    let specs = parser.parse_file();
    if parser.diags.is_empty() {
        Ok(specs)
    } else {
        Err(parser.diags)
    }
}

/// Parses a standalone formula against base symbols plus `extra`. Constants
/// are permitted; closedness is the caller's concern.
pub fn parse_formula(
    text: &str,
    extra: &[Rc<RelationSymbol>],
) -> Result<Formula, Vec<ParseDiagnostic>> {
    let tokens = match lex(text) {
        Ok(tokens) => tokens,
        Err(diag) => return Err(vec![diag]),
    };
    let mut signature = base_signature();
    signature.extend(extra.iter().cloned());
    let mut parser = Parser::new(tokens, signature);
    match parser.parse_formula() {
        Ok(f) if parser.diags.is_empty() && *parser.peek() == Tok::Eof => Ok(f),
        Ok(_) if parser.diags.is_empty() => {
            let (line, col) = parser.here();
            Err(vec![ParseDiagnostic {
                line,
                col,
                message: format!("trailing input starting at '{}'", parser.peek()),
            }])
        }
        _ => Err(parser.diags),
    }
}
