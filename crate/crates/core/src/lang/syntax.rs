use std::collections::{BTreeMap, BTreeSet};

use num_traits::Signed;

use super::{Context, Expr, FnDef, Program};
use crate::error::{Error, Result};
use crate::poset::FinitePoset;
use crate::rational::{fmt_q, in_unit_interval, parse_q};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 13] = ["->", "{", "}", "(", ")", ";", ",", "=", ".", ":", "<", "|", "/"];

fn lex(source: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (line_no, line) in source.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, col) = (line_no + 1, i + 1);
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphanumeric() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Word(chars[start..i].iter().collect()), line, col });
            } else if let Some(sym) = SYMBOLS.iter().find(|s| line_has(&chars, i, s)) {
                i += sym.len();
                out.push(Token { tok: Tok::Sym(sym), line, col });
            } else {
                return Err(Error::Syntax { line, col, msg: format!("unexpected character `{c}`") });
            }
        }
    }
    let line = source.lines().count().max(1);
    out.push(Token { tok: Tok::Eof, line, col: 1 });
    Ok(out)
}

fn line_has(chars: &[char], at: usize, sym: &str) -> bool {
    sym.chars().enumerate().all(|(k, s)| chars.get(at + k) == Some(&s))
}

const KEYWORDS: [&str; 11] = ["poset", "def", "main", "const", "var", "fail", "choice", "sample", "let", "in", "case"];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

struct RawProgram {
    posets: Vec<(String, FinitePoset)>,
    defs: Vec<(FnDef, usize, usize)>,
    main: Option<Expr>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = self.peek();
        Err(Error::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn at_sym(&self, sym: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(s) if *s == sym)
    }

    fn at_word(&self, word: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(w) if w == word)
    }

    fn expect_sym(&mut self, sym: &str) -> Result<()> {
        if self.at_sym(sym) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{sym}`, found {}", describe(&self.peek().tok)))
        }
    }

    fn expect_keyword(&mut self, word: &str) -> Result<()> {
        if self.at_word(word) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{word}`, found {}", describe(&self.peek().tok)))
        }
    }

    /// Any word, keywords included (element names may collide with them).
    fn word(&mut self) -> Result<String> {
        match &self.peek().tok {
            Tok::Word(w) => {
                let w = w.clone();
                self.bump();
                Ok(w)
            }
            other => self.error(format!("expected identifier, found {}", describe(other))),
        }
    }

    /// A non-keyword identifier.
    fn ident(&mut self) -> Result<String> {
        if let Tok::Word(w) = &self.peek().tok {
            if KEYWORDS.contains(&w.as_str()) {
                return self.error(format!("keyword `{w}` cannot be used as a name"));
            }
        }
        self.word()
    }

    fn rational(&mut self) -> Result<crate::rational::Q> {
        let start = self.peek().clone();
        let mut text = self.word()?;
        if self.at_sym("/") {
            self.bump();
            text.push('/');
            text.push_str(&self.word()?);
        }
        parse_q(&text).map_err(|_| Error::Syntax { line: start.line, col: start.col, msg: format!("invalid rational `{text}`") })
    }

    fn program(&mut self) -> Result<RawProgram> {
        let mut raw = RawProgram { posets: Vec::new(), defs: Vec::new(), main: None };
        loop {
            if self.peek().tok == Tok::Eof {
                return Ok(raw);
            }
            if self.at_word("poset") {
                self.bump();
                let name = self.ident()?;
                let poset = self.poset_body(&name)?;
                raw.posets.push((name, poset));
            } else if self.at_word("def") {
                let (line, col) = (self.peek().line, self.peek().col);
                self.bump();
                let name = self.ident()?;
                self.expect_sym("(")?;
                let mut params = Vec::new();
                while !self.at_sym(")") {
                    let x = self.ident()?;
                    self.expect_sym(":")?;
                    let p = self.ident()?;
                    params.push((x, p));
                    if !self.at_sym(")") {
                        self.expect_sym(",")?;
                    }
                }
                self.bump();
                self.expect_sym("=")?;
                let body = self.expr()?;
                raw.defs.push((FnDef { name, params, body, result: String::new() }, line, col));
            } else if self.at_word("main") {
                if raw.main.is_some() {
                    return self.error("`main` defined twice");
                }
                self.bump();
                self.expect_sym("=")?;
                raw.main = Some(self.expr()?);
            } else {
                return self.error(format!("expected `poset`, `def` or `main`, found {}", describe(&self.peek().tok)));
            }
            if self.at_sym(";") {
                self.bump();
            } else if self.peek().tok != Tok::Eof {
                return self.error(format!("expected `;`, found {}", describe(&self.peek().tok)));
            }
        }
    }

    /// `= { a, b, c | a < b < c, a < d }`
    fn poset_body(&mut self, name: &str) -> Result<FinitePoset> {
        let (line, col) = (self.peek().line, self.peek().col);
        self.expect_sym("=")?;
        self.expect_sym("{")?;
        let mut elems = Vec::new();
        let mut covers = Vec::new();
        while !self.at_sym("|") && !self.at_sym("}") {
            elems.push(self.word()?);
            if self.at_sym(",") {
                self.bump();
            }
        }
        if self.at_sym("|") {
            self.bump();
            while !self.at_sym("}") {
                let mut lo = self.word()?;
                self.expect_sym("<")?;
                loop {
                    let hi = self.word()?;
                    covers.push((lo, hi.clone()));
                    if !self.at_sym("<") {
                        break;
                    }
                    self.bump();
                    lo = hi;
                }
                if self.at_sym(",") {
                    self.bump();
                }
            }
        }
        self.expect_sym("}")?;
        FinitePoset::build(name, &elems, &covers).map_err(|e| Error::Syntax { line, col, msg: e.to_string() })
    }

    fn expr(&mut self) -> Result<Expr> {
        let word = match &self.peek().tok {
            Tok::Word(w) => w.clone(),
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                return Ok(e);
            }
            other => return self.error(format!("expected expression, found {}", describe(other))),
        };
        match word.as_str() {
            "const" => {
                self.bump();
                let poset = self.ident()?;
                self.expect_sym(".")?;
                let elem = self.word()?;
                Ok(Expr::Const { poset, elem })
            }
            "var" => {
                self.bump();
                Ok(Expr::Var(self.ident()?))
            }
            "fail" => {
                self.bump();
                Ok(Expr::Fail(self.ident()?))
            }
            "choice" => {
                self.bump();
                let p = self.rational()?;
                let left = Box::new(self.expr()?);
                let right = Box::new(self.expr()?);
                Ok(Expr::Choice { p, left, right })
            }
            "sample" => {
                self.bump();
                let cdf = self.ident()?;
                let stepmap = self.ident()?;
                Ok(Expr::Sample { cdf, stepmap })
            }
            "let" => {
                self.bump();
                let name = self.ident()?;
                self.expect_sym("=")?;
                let bound = Box::new(self.expr()?);
                self.expect_keyword("in")?;
                let body = Box::new(self.expr()?);
                Ok(Expr::Let { name, bound, body })
            }
            "case" => {
                self.bump();
                let scrutinee = Box::new(self.expr()?);
                self.expect_sym("{")?;
                let mut arms = Vec::new();
                while !self.at_sym("}") {
                    let key = self.word()?;
                    self.expect_sym("->")?;
                    arms.push((key, self.expr()?));
                    if self.at_sym(";") {
                        self.bump();
                    } else if !self.at_sym("}") {
                        return self.error(format!("expected `;` or `}}`, found {}", describe(&self.peek().tok)));
                    }
                }
                self.bump();
                Ok(Expr::Case { scrutinee, arms })
            }
            _ => {
                let func = self.ident()?;
                self.expect_sym("(")?;
                let mut args = Vec::new();
                while !self.at_sym(")") {
                    args.push(self.expr()?);
                    if !self.at_sym(")") {
                        self.expect_sym(",")?;
                    }
                }
                self.bump();
                Ok(Expr::Call { func, args })
            }
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Word(w) => format!("`{w}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses and resolves a program against `context`. Posets declared in the
/// source are added to the program's own copy of the context.
pub fn parse(source: &str, context: &Context) -> Result<Program> {
    let mut parser = Parser { tokens: lex(source)?, pos: 0 };
    let raw = parser.program()?;
    let Some(main) = raw.main else {
        let t = parser.peek();
        return Err(Error::Syntax { line: t.line, col: t.col, msg: "missing `main`".into() });
    };

    let mut context = context.clone();
    for (name, poset) in raw.posets {
        if context.posets.contains_key(&name) {
            return Err(Error::Resolution(format!("poset `{name}` declared twice")));
        }
        context.add_poset(poset.into_ref());
    }

    let mut defs: BTreeMap<String, FnDef> = BTreeMap::new();
    for (def, _, _) in raw.defs {
        if defs.contains_key(&def.name) {
            return Err(Error::Resolution(format!("function `{}` defined twice", def.name)));
        }
        defs.insert(def.name.clone(), def);
    }
    for def in defs.values() {
        for call in calls_in(&def.body) {
            if !defs.contains_key(&call) {
                return Err(Error::Resolution(format!("unknown function `{call}` in `{}`", def.name)));
            }
        }
    }
    let order = definition_order(&defs)?;

    let mut typed: BTreeMap<String, FnDef> = BTreeMap::new();
    for name in order {
        let mut def = defs.remove(&name).expect("ordered names come from defs");
        let mut seen = BTreeSet::new();
        for (x, p) in &def.params {
            if !seen.insert(x.clone()) {
                return Err(Error::Resolution(format!("parameter `{x}` repeated in `{name}`")));
            }
            if !context.posets.contains_key(p) {
                return Err(Error::Resolution(format!("unknown poset `{p}` for parameter `{x}`")));
            }
        }
        let scope: Vec<(String, String)> = def.params.clone();
        def.result = infer(&def.body, &scope, &context, &typed)?;
        typed.insert(name, def);
    }

    let result = infer(&main, &[], &context, &typed)?;
    Ok(Program { context, defs: typed, main, result })
}

fn calls_in(expr: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn walk(e: &Expr, out: &mut BTreeSet<String>) {
        match e {
            Expr::Call { func, args } => {
                out.insert(func.clone());
                args.iter().for_each(|a| walk(a, out));
            }
            Expr::Choice { left, right, .. } => {
                walk(left, out);
                walk(right, out);
            }
            Expr::Let { bound, body, .. } => {
                walk(bound, out);
                walk(body, out);
            }
            Expr::Case { scrutinee, arms } => {
                walk(scrutinee, out);
                arms.iter().for_each(|(_, a)| walk(a, out));
            }
            Expr::Const { .. } | Expr::Var(_) | Expr::Fail(_) | Expr::Sample { .. } => {}
        }
    }
    walk(expr, &mut out);
    out
}

/// Callees before callers; any cycle is a [`Error::Recursion`].
fn definition_order(defs: &BTreeMap<String, FnDef>) -> Result<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Active,
        Done,
    }
    fn visit(
        name: &str,
        defs: &BTreeMap<String, FnDef>,
        marks: &mut BTreeMap<String, Mark>,
        stack: &mut Vec<String>,
        out: &mut Vec<String>,
    ) -> Result<()> {
        match marks[name] {
            Mark::Done => return Ok(()),
            Mark::Active => {
                let start = stack.iter().position(|s| s == name).unwrap_or(0);
                let mut cycle = stack[start..].to_vec();
                cycle.push(name.to_string());
                return Err(Error::Recursion(cycle.join(" -> ")));
            }
            Mark::Fresh => {}
        }
        marks.insert(name.to_string(), Mark::Active);
        stack.push(name.to_string());
        for callee in calls_in(&defs[name].body) {
            visit(&callee, defs, marks, stack, out)?;
        }
        stack.pop();
        marks.insert(name.to_string(), Mark::Done);
        out.push(name.to_string());
        Ok(())
    }
    let mut marks: BTreeMap<String, Mark> = defs.keys().map(|k| (k.clone(), Mark::Fresh)).collect();
    let mut out = Vec::new();
    for name in defs.keys() {
        visit(name, defs, &mut marks, &mut Vec::new(), &mut out)?;
    }
    Ok(out)
}

/// The result poset name of `expr` with `scope` binding variables to
/// poset names (innermost last).
pub(crate) fn infer(
    expr: &Expr,
    scope: &[(String, String)],
    context: &Context,
    defs: &BTreeMap<String, FnDef>,
) -> Result<String> {
    let known_poset = |p: &str| -> Result<()> {
        if context.posets.contains_key(p) {
            Ok(())
        } else {
            Err(Error::Resolution(format!("unknown poset `{p}`")))
        }
    };
    match expr {
        Expr::Const { poset, elem } => {
            known_poset(poset)?;
            context.posets[poset]
                .index_of(elem)
                .map_err(|_| Error::Resolution(format!("`{elem}` is not an element of `{poset}`")))?;
            Ok(poset.clone())
        }
        Expr::Var(x) => scope
            .iter()
            .rev()
            .find(|(name, _)| name == x)
            .map(|(_, p)| p.clone())
            .ok_or_else(|| Error::Resolution(format!("unbound variable `{x}`"))),
        Expr::Fail(p) => {
            known_poset(p)?;
            Ok(p.clone())
        }
        Expr::Choice { p, left, right } => {
            if !in_unit_interval(p) || p.is_negative() {
                return Err(Error::Resolution(format!("choice probability {} outside [0,1]", fmt_q(p))));
            }
            let l = infer(left, scope, context, defs)?;
            let r = infer(right, scope, context, defs)?;
            if l != r {
                return Err(Error::Resolution(format!("choice branches have types `{l}` and `{r}`")));
            }
            Ok(l)
        }
        Expr::Sample { cdf, stepmap } => {
            if context.cdf(cdf).is_none() {
                return Err(Error::Resolution(format!("unknown cdf `{cdf}`")));
            }
            let map = context
                .stepmaps
                .get(stepmap)
                .ok_or_else(|| Error::Resolution(format!("unknown stepmap `{stepmap}`")))?;
            let target = map.target().name().to_string();
            match context.posets.get(&target) {
                Some(p) if p.as_ref() == map.target().as_ref() => Ok(target),
                _ => Err(Error::Resolution(format!("stepmap `{stepmap}` targets undeclared poset `{target}`"))),
            }
        }
        Expr::Let { name, bound, body } => {
            let t = infer(bound, scope, context, defs)?;
            let mut inner = scope.to_vec();
            inner.push((name.clone(), t));
            infer(body, &inner, context, defs)
        }
        Expr::Call { func, args } => {
            let def = defs
                .get(func)
                .ok_or_else(|| Error::Resolution(format!("unknown function `{func}`")))?;
            if def.params.len() != args.len() {
                return Err(Error::Resolution(format!(
                    "`{func}` takes {} arguments, got {}",
                    def.params.len(),
                    args.len()
                )));
            }
            for ((x, p), arg) in def.params.iter().zip(args) {
                let t = infer(arg, scope, context, defs)?;
                if &t != p {
                    return Err(Error::Resolution(format!("argument `{x}` of `{func}` expects `{p}`, got `{t}`")));
                }
            }
            Ok(def.result.clone())
        }
        Expr::Case { scrutinee, arms } => {
            let t = infer(scrutinee, scope, context, defs)?;
            let poset = &context.posets[&t];
            let mut covered = vec![false; poset.len()];
            for (key, _) in arms {
                let i = poset
                    .index_of(key)
                    .map_err(|_| Error::Resolution(format!("case arm `{key}` is not an element of `{t}`")))?;
                if std::mem::replace(&mut covered[i], true) {
                    return Err(Error::Resolution(format!("case arm `{key}` repeated")));
                }
            }
            if let Some(i) = covered.iter().position(|c| !c) {
                return Err(Error::Resolution(format!("case has no arm for `{}`", poset.element(i))));
            }
            let mut result: Option<String> = None;
            for (key, arm) in arms {
                let r = infer(arm, scope, context, defs)?;
                match &result {
                    Some(prev) if prev != &r => {
                        return Err(Error::Resolution(format!("case arm `{key}` has type `{r}`, expected `{prev}`")))
                    }
                    _ => result = Some(r),
                }
            }
            result.ok_or_else(|| Error::Resolution(format!("case over empty poset `{t}`")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Context {
        let c2 = FinitePoset::chain("C2", &["a", "b"]).unwrap().into_ref();
        Context::with_posets([c2])
    }

    #[test]
    fn let_of_const() {
        let p = parse("main = let x = const C2.a in var x", &ctx()).unwrap();
        assert_eq!(
            p.main,
            Expr::Let {
                name: "x".into(),
                bound: Box::new(Expr::Const { poset: "C2".into(), elem: "a".into() }),
                body: Box::new(Expr::Var("x".into())),
            }
        );
        assert_eq!(p.result, "C2");
    }

    #[test]
    fn poset_declarations() {
        let src = "poset V = { bot, l, r | bot < l, bot < r } ;\n poset C3 = { x y z | x < y < z } ;\n main = const V.l";
        let p = parse(src, &Context::default()).unwrap();
        let v = p.poset("V").unwrap();
        assert!(v.leq(0, 1) && v.leq(0, 2) && !v.leq(1, 2));
        let c3 = p.poset("C3").unwrap();
        assert!(c3.leq(0, 2));
    }

    #[test]
    fn resolution_errors() {
        for src in [
            "main = var x",
            "main = const C2.z",
            "main = const Nope.a",
            "main = choice 1/2 (const C2.a) (fail Nope)",
            "main = f(const C2.a)",
            "main = case const C2.a { a -> const C2.a }",
            "main = case const C2.a { a -> const C2.a ; b -> const C2.b ; a -> const C2.a }",
            "main = choice 3/2 (const C2.a) (const C2.b)",
            "main = sample lebesgue nothing",
            "def f(x:C2) = var x ; main = f()",
            "poset C2 = { q } ; main = fail C2",
        ] {
            assert!(matches!(parse(src, &ctx()), Err(Error::Resolution(_))), "{src}");
        }
    }

    #[test]
    fn recursion_is_rejected() {
        let src = "def f(x:C2) = g(var x) ; def g(x:C2) = f(var x) ; main = f(const C2.a)";
        assert!(matches!(parse(src, &ctx()), Err(Error::Recursion(_))));
        let src = "def f(x:C2) = f(var x) ; main = const C2.a";
        assert!(matches!(parse(src, &ctx()), Err(Error::Recursion(_))));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse("main = let x = const C2.a\n  var x", &ctx()) {
            Err(Error::Syntax { line: 2, col: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("main = choice 0.5 (const C2.a) (const C2.b)", &ctx()), Err(Error::Syntax { .. })));
        assert!(matches!(parse("const C2.a", &ctx()), Err(Error::Syntax { .. })));
        assert!(matches!(parse("def f(x:C2) = var x", &ctx()), Err(Error::Syntax { .. })));
        assert!(matches!(parse("main = const C2.a $", &ctx()), Err(Error::Syntax { .. })));
    }

    #[test]
    fn display_round_trips() {
        let src = "def k(u:C2, v:C2) = case var u { a -> var v ; b -> const C2.b } ;\n\
                   main = let x = choice 1/3 (const C2.a) (fail C2) in k(var x, sample lebesgue half)";
        let mut c = ctx();
        c.add_stepmap(
            crate::interval::StepMap::from_ids("half", &c.posets["C2"].clone(), 1, &["a", "b"]).unwrap(),
        );
        let p = parse(src, &c).unwrap();
        let again = parse(&format!("def k(u:C2, v:C2) = {} ; main = {}", p.defs["k"].body, p.main), &c).unwrap();
        assert_eq!(again.main, p.main);
        assert_eq!(again.defs["k"].body, p.defs["k"].body);
    }
}
