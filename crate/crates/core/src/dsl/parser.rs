use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use super::lexer::{lex, Line, Tok, Token};
use super::{ParseError, ParseErrorKind};
use crate::model::{
    Component, DesignClass, Division, FailureModeType, Hazard, Link, LinkKind, LinkRef, Loss, Origin, RedundancyGroup,
    SharedResource, SourceSpan, SystemModel, UnknownVariant,
};

pub(super) fn parse(text: &str, file: &str) -> Result<SystemModel, ParseError> {
    let lines = lex(text, file)?;
    let mut p = Parser { lines, idx: 0, ids: IdRegistry::default() };
    p.document()
}

/// Per-namespace duplicate detection.
#[derive(Default)]
struct IdRegistry {
    seen: BTreeMap<&'static str, BTreeSet<String>>,
}

impl IdRegistry {
    fn claim(&mut self, ns: &'static str, id: &str, span: &SourceSpan) -> Result<(), ParseError> {
        if !self.seen.entry(ns).or_default().insert(id.to_string()) {
            return Err(ParseError::new(
                ParseErrorKind::DuplicateId,
                span.clone(),
                format!("duplicate {ns} id `{id}`"),
            ));
        }
        Ok(())
    }
}

struct Parser {
    lines: Vec<Line>,
    idx: usize,
    ids: IdRegistry,
}

struct Cursor<'a> {
    line: &'a Line,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a Line) -> Self {
        Cursor { line, pos: 0 }
    }

    fn peek(&self) -> Option<&'a Token> {
        self.line.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.line.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn last_span(&self) -> SourceSpan {
        self.line.tokens.last().map(|t| t.span.clone()).unwrap_or_else(|| self.line.span.clone())
    }

    fn unexpected(&self, tok: Option<&Token>, wanted: &str) -> ParseError {
        match tok {
            Some(t) => ParseError::syntax(t.span.clone(), format!("expected {wanted}, found {}", t.tok.describe())),
            None => ParseError::syntax(self.last_span(), format!("expected {wanted} before end of line")),
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<(String, SourceSpan), ParseError> {
        match self.next() {
            Some(Token { tok: Tok::Ident(s), span }) => Ok((s.clone(), span.clone())),
            other => Err(self.unexpected(other, wanted)),
        }
    }

    fn string(&mut self, wanted: &str) -> Result<String, ParseError> {
        match self.next() {
            Some(Token { tok: Tok::Str(s), .. }) => Ok(s.clone()),
            other => Err(self.unexpected(other, wanted)),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        match self.next() {
            Some(t) if t.tok == tok => Ok(()),
            other => Err(self.unexpected(other, &tok.describe())),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek().is_some_and(|t| &t.tok == tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn keyword<T: FromStr<Err = UnknownVariant>>(&mut self, wanted: &str) -> Result<T, ParseError> {
        let (word, span) = self.ident(wanted)?;
        word.parse::<T>().map_err(|e| ParseError::new(ParseErrorKind::UnknownEnumValue, span, e.to_string()))
    }

    fn id_list(&mut self, wanted: &str) -> Result<Vec<String>, ParseError> {
        let mut out = vec![self.ident(wanted)?.0];
        while self.eat(&Tok::Comma) {
            out.push(self.ident(wanted)?.0);
        }
        Ok(out)
    }

    fn keyword_list<T: FromStr<Err = UnknownVariant>>(
        &mut self,
        wanted: &str,
    ) -> Result<Vec<(T, SourceSpan)>, ParseError> {
        let mut out = Vec::new();
        loop {
            let span = self.peek().map(|t| t.span.clone()).unwrap_or_else(|| self.last_span());
            out.push((self.keyword::<T>(wanted)?, span));
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn ref_list(&mut self) -> Result<Vec<LinkRef>, ParseError> {
        let mut out = Vec::new();
        loop {
            let component = self.ident("component reference")?.0;
            let port = if self.eat(&Tok::Dot) { Some(self.ident("port name")?.0) } else { None };
            out.push(LinkRef { component, port });
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    /// Consumes `key:` pairs until end of line, `->` or an opening brace, handing
    /// each key to `on_key`, which must consume the value.
    fn keys(
        &mut self,
        allowed: &[&str],
        mut on_key: impl FnMut(&str, &mut Self) -> Result<(), ParseError>,
    ) -> Result<(), ParseError> {
        let mut seen = BTreeSet::new();
        while let Some(t) = self.peek() {
            if matches!(t.tok, Tok::LBrace | Tok::Arrow) {
                break;
            }
            let (key, span) = self.ident("key")?;
            if !allowed.contains(&key.as_str()) {
                return Err(ParseError::new(
                    ParseErrorKind::UnknownKey,
                    span,
                    format!("unknown key `{key}` (expected one of: {})", allowed.join(", ")),
                ));
            }
            if !seen.insert(key.clone()) {
                return Err(ParseError::syntax(span, format!("key `{key}` given twice")));
            }
            self.expect(Tok::Colon)?;
            on_key(&key, self)?;
        }
        Ok(())
    }

    /// Returns true when the line ends with `{`, opening a block.
    fn block_open(&mut self) -> Result<bool, ParseError> {
        match self.next() {
            None => Ok(false),
            Some(t) if t.tok == Tok::LBrace => match self.next() {
                None => Ok(true),
                other => Err(self.unexpected(other, "end of line after `{`")),
            },
            other => Err(self.unexpected(other, "end of line")),
        }
    }

    fn end(&mut self) -> Result<(), ParseError> {
        match self.next() {
            None => Ok(()),
            other => Err(self.unexpected(other, "end of line")),
        }
    }
}

fn missing(span: &SourceSpan, key: &str) -> ParseError {
    ParseError::syntax(span.clone(), format!("missing required key `{key}`"))
}

fn is_close(line: &Line) -> bool {
    line.tokens.len() == 1 && line.tokens[0].tok == Tok::RBrace
}

impl Parser {
    fn next_line(&mut self) -> Option<Line> {
        let line = self.lines.get(self.idx).cloned();
        if line.is_some() {
            self.idx += 1;
        }
        line
    }

    /// Parses body lines until the closing brace of the block opened at `open`.
    fn block(
        &mut self,
        open: &SourceSpan,
        mut on_line: impl FnMut(&mut Self, &Line) -> Result<(), ParseError>,
    ) -> Result<(), ParseError> {
        loop {
            let Some(line) = self.next_line() else {
                return Err(ParseError::syntax(open.clone(), "block is never closed"));
            };
            if is_close(&line) {
                return Ok(());
            }
            on_line(self, &line)?;
        }
    }

    fn document(&mut self) -> Result<SystemModel, ParseError> {
        let mut model = SystemModel::default();
        let mut seen_system = None::<SourceSpan>;
        let mut seen_top = None::<SourceSpan>;
        while let Some(line) = self.next_line() {
            let mut cur = Cursor::new(&line);
            let (word, span) = cur.ident("statement")?;
            match word.as_str() {
                "system" => {
                    if seen_system.replace(span.clone()).is_some() {
                        return Err(ParseError::syntax(span, "`system` given twice"));
                    }
                    model.name = cur.string("system name")?;
                    cur.end()?;
                }
                "top_event" => {
                    if seen_top.replace(span.clone()).is_some() {
                        return Err(ParseError::syntax(span, "`top_event` given twice"));
                    }
                    model.top_event = cur.string("top event description")?;
                    cur.end()?;
                }
                "loss" => {
                    let (id, idspan) = cur.ident("loss id")?;
                    self.ids.claim("loss", &id, &idspan)?;
                    let description = cur.string("loss description")?;
                    cur.end()?;
                    model.losses.push(Loss { id, description, origin: Origin::at(span) });
                }
                "hazard" => {
                    let (id, idspan) = cur.ident("hazard id")?;
                    self.ids.claim("hazard", &id, &idspan)?;
                    let description = cur.string("hazard description")?;
                    let mut linked_losses = Vec::new();
                    cur.keys(&["losses"], |_, c| {
                        linked_losses = c.id_list("loss id")?;
                        Ok(())
                    })?;
                    cur.end()?;
                    model.hazards.push(Hazard { id, description, linked_losses, origin: Origin::at(span) });
                }
                "design_class" => {
                    let (id, idspan) = cur.ident("design class id")?;
                    self.ids.claim("design_class", &id, &idspan)?;
                    let description = cur.string("design class description")?;
                    let mut tag = None;
                    cur.keys(&["diversity"], |_, c| {
                        tag = Some(c.string("diversity tag")?);
                        Ok(())
                    })?;
                    cur.end()?;
                    model.design_classes.push(DesignClass {
                        diversity_tag: tag.unwrap_or_else(|| id.clone()),
                        id,
                        description,
                        origin: Origin::at(span),
                    });
                }
                "division" => {
                    let division = self.division(&mut cur, span)?;
                    model.divisions.push(division);
                }
                "redundancy_group" => {
                    let (id, idspan) = cur.ident("group id")?;
                    self.ids.claim("redundancy_group", &id, &idspan)?;
                    let (mut level, mut logic, mut members) = (None, None, Vec::new());
                    cur.keys(&["level", "logic", "members"], |k, c| {
                        match k {
                            "level" => level = Some(c.keyword("redundancy level")?),
                            "logic" => logic = Some(c.keyword("group logic")?),
                            _ => members = c.id_list("member id")?,
                        }
                        Ok(())
                    })?;
                    cur.end()?;
                    model.redundancy_groups.push(RedundancyGroup {
                        level: level.ok_or_else(|| missing(&span, "level"))?,
                        logic: logic.ok_or_else(|| missing(&span, "logic"))?,
                        id,
                        members,
                        origin: Origin::at(span),
                    });
                }
                "shared_resource" => {
                    let (id, idspan) = cur.ident("resource id")?;
                    self.ids.claim("shared_resource", &id, &idspan)?;
                    let (mut scope, mut dependents) = (None, Vec::new());
                    cur.keys(&["scope", "dependents"], |k, c| {
                        match k {
                            "scope" => scope = Some(c.keyword("resource scope")?),
                            _ => dependents = c.id_list("component id")?,
                        }
                        Ok(())
                    })?;
                    cur.end()?;
                    model.shared_resources.push(SharedResource {
                        scope: scope.ok_or_else(|| missing(&span, "scope"))?,
                        id,
                        dependents,
                        origin: Origin::at(span),
                    });
                }
                other => {
                    return Err(ParseError::syntax(span, format!("unknown statement `{other}`")));
                }
            }
        }
        Ok(model)
    }

    fn division(&mut self, cur: &mut Cursor<'_>, span: SourceSpan) -> Result<Division, ParseError> {
        let (id, idspan) = cur.ident("division id")?;
        self.ids.claim("division", &id, &idspan)?;
        let mut division = Division { id, components: Vec::new(), replicates: None, origin: Origin::at(span.clone()) };
        if cur.peek().is_some_and(|t| t.tok == Tok::Ident("replicates".into())) {
            cur.next();
            division.replicates = Some(cur.ident("replicated division id")?.0);
            cur.end()?;
            return Ok(division);
        }
        if !cur.block_open()? {
            return Err(ParseError::syntax(cur.last_span(), "expected `{` or `replicates`"));
        }
        let mut components = Vec::new();
        self.block(&span, |p, line| {
            let mut c = Cursor::new(line);
            let (word, wspan) = c.ident("`component`")?;
            if word != "component" {
                return Err(ParseError::syntax(
                    wspan,
                    format!("unknown division item `{word}` (expected `component`)"),
                ));
            }
            components.push(p.component(&mut c, wspan)?);
            Ok(())
        })?;
        division.components = components;
        Ok(division)
    }

    fn component(&mut self, cur: &mut Cursor<'_>, span: SourceSpan) -> Result<Component, ParseError> {
        let (id, idspan) = cur.ident("component id")?;
        self.ids.claim("component", &id, &idspan)?;
        let (mut kind, mut tech, mut class, mut stub) = (None, None, None, false);
        cur.keys(&["kind", "tech", "class", "stub"], |k, c| {
            match k {
                "kind" => kind = Some(c.keyword("component kind")?),
                "tech" => tech = Some(c.keyword("technology")?),
                "class" => class = Some(c.ident("design class id")?.0),
                _ => {
                    let (v, vspan) = c.ident("`true` or `false`")?;
                    stub = match v.as_str() {
                        "true" => true,
                        "false" => false,
                        _ => {
                            return Err(ParseError::new(
                                ParseErrorKind::UnknownEnumValue,
                                vspan,
                                format!("unknown boolean `{v}`"),
                            ))
                        }
                    };
                }
            }
            Ok(())
        })?;
        let mut component = Component {
            id,
            kind: kind.ok_or_else(|| missing(&span, "kind"))?,
            tech: tech.ok_or_else(|| missing(&span, "tech"))?,
            design_class: class.ok_or_else(|| missing(&span, "class"))?,
            stub,
            inputs: Vec::new(),
            feedback_inputs: Vec::new(),
            links: Vec::new(),
            origin: Origin::at(span.clone()),
        };
        if !cur.block_open()? {
            return Ok(component);
        }
        self.block(&span, |p, line| {
            let mut c = Cursor::new(line);
            let (word, wspan) = c.ident("component item")?;
            match word.as_str() {
                "inputs" | "feedback" => {
                    c.expect(Tok::Colon)?;
                    let refs = c.ref_list()?;
                    c.end()?;
                    if word == "inputs" {
                        component.inputs.extend(refs);
                    } else {
                        component.feedback_inputs.extend(refs);
                    }
                }
                "control_action" => component.links.push(p.link(&mut c, wspan, LinkKind::ControlAction)?),
                "info_flow" => component.links.push(p.link(&mut c, wspan, LinkKind::InformationFlow)?),
                other => {
                    return Err(ParseError::new(
                        ParseErrorKind::UnknownKey,
                        wspan,
                        format!(
                            "unknown component item `{other}` (expected inputs, feedback, control_action or info_flow)"
                        ),
                    ))
                }
            }
            Ok(())
        })?;
        Ok(component)
    }

    fn link(&mut self, cur: &mut Cursor<'_>, span: SourceSpan, kind: LinkKind) -> Result<Link, ParseError> {
        let (id, idspan) = cur.ident("link id")?;
        self.ids.claim("link", &id, &idspan)?;
        let mut port = None;
        cur.keys(&["port"], |_, c| {
            port = Some(c.ident("port name")?.0);
            Ok(())
        })?;
        let targets = if cur.eat(&Tok::Arrow) { cur.id_list("target component id")? } else { Vec::new() };
        let mut link = Link {
            id,
            kind,
            port: port.unwrap_or_else(|| "out".to_string()),
            targets,
            applicability: BTreeMap::new(),
            origin: Origin::at(span.clone()),
        };
        if !cur.block_open()? {
            return Ok(link);
        }
        let mut applicability = BTreeMap::new();
        self.block(&span, |_, line| {
            let mut c = Cursor::new(line);
            let (word, wspan) = c.ident("`applicable`")?;
            if word != "applicable" {
                return Err(ParseError::new(
                    ParseErrorKind::UnknownKey,
                    wspan,
                    format!("unknown link item `{word}` (expected `applicable`)"),
                ));
            }
            c.expect(Tok::Colon)?;
            let types = c.keyword_list::<FailureModeType>("failure mode type")?;
            let mut hazards = Vec::new();
            c.keys(&["hazards"], |_, c| {
                hazards = c.id_list("hazard id")?;
                Ok(())
            })?;
            c.end()?;
            for (ty, tspan) in types {
                if applicability.insert(ty, hazards.clone()).is_some() {
                    return Err(ParseError::syntax(tspan, format!("type {ty} declared twice")));
                }
            }
            Ok(())
        })?;
        link.applicability = applicability;
        Ok(link)
    }
}
