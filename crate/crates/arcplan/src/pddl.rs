//! PDDL rendering of domain models and grounded instances, plus a reader.
//!
//! Emission goes through canonical parsed structures: the text is rendered
//! from a [`ParsedDomain`]/[`ParsedInstance`] and the parser inverts the
//! rendering exactly, which is what the round-trip checks rely on. External
//! functions appear as atoms prefixed with `@`; action and predicate
//! parameters carry the `?` prefix.

use std::collections::{BTreeMap, BTreeSet};

use crate::abstraction::compute_flags;
use crate::domain::{DomainModel, ObjType, ObjectVal, PlanningInstance, PredicateId, SchemeId};
use crate::relations;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Atom {
    pub name: String,
    pub args: Vec<String>,
}

impl Atom {
    fn new(name: &str, args: &[String]) -> Self {
        Atom { name: name.to_string(), args: args.to_vec() }
    }

    fn render(&self) -> String {
        if self.args.is_empty() {
            format!("({})", self.name)
        } else {
            format!("({} {})", self.name, self.args.join(" "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedAction {
    pub params: Vec<(String, String)>,
    pub precondition: Vec<Atom>,
    pub effect: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedDomain {
    pub name: String,
    pub types: BTreeSet<String>,
    pub predicates: BTreeMap<String, Vec<String>>,
    pub actions: BTreeMap<String, ParsedAction>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedInstance {
    pub name: String,
    pub domain: String,
    pub objects: BTreeMap<String, String>,
    pub init: BTreeSet<Atom>,
    pub goal: BTreeSet<Atom>,
}

const ALL_TYPES: [ObjType; 9] = [
    ObjType::Node,
    ObjType::Pixel,
    ObjType::Color,
    ObjType::Size,
    ObjType::Step,
    ObjType::Rotation,
    ObjType::FDirection,
    ObjType::MDirection,
    ObjType::Shape,
];

fn param_prefix(ty: ObjType) -> &'static str {
    match ty {
        ObjType::Node => "n",
        ObjType::Pixel => "p",
        ObjType::Color => "c",
        ObjType::Size => "s",
        ObjType::Step => "t",
        ObjType::Rotation => "r",
        ObjType::FDirection => "f",
        ObjType::MDirection => "d",
        ObjType::Shape => "h",
    }
}

/// Typed parameter names for a signature: `?n1 - node ?c1 - color ...`.
fn param_names(params: &[ObjType]) -> Vec<(String, String)> {
    let mut counters: BTreeMap<&str, usize> = BTreeMap::new();
    params
        .iter()
        .map(|&ty| {
            let prefix = param_prefix(ty);
            let n = counters.entry(prefix).or_insert(0);
            *n += 1;
            (format!("?{prefix}{n}"), ty.name().to_string())
        })
        .collect()
}

/// PDDL object name of a value. Rotation names get a `deg-` prefix since
/// PDDL identifiers cannot start with a digit.
fn object_name(val: ObjectVal) -> String {
    match val {
        ObjectVal::Rotation(r) => format!("deg-{}", r.name()),
        other => other.display(),
    }
}

fn scheme_precondition(scheme: SchemeId, params: &[(String, String)]) -> Vec<Atom> {
    let arg = |i: usize| params[i].0.clone();
    match scheme {
        SchemeId::UpdateColor => vec![Atom::new("node-color", &[arg(0), arg(1)])],
        SchemeId::SwapColor | SchemeId::CopyColor => {
            vec![Atom::new("@distinct", &[arg(0), arg(1)])]
        }
        SchemeId::MoveNode1 | SchemeId::MoveNode2 | SchemeId::ExtendNode => {
            vec![Atom::new("@spatially-related", &[arg(0), arg(1)])]
        }
        SchemeId::MoveNodeDirection1
        | SchemeId::MoveNodeDirection2
        | SchemeId::ExtendNodeDirection => Vec::new(),
        SchemeId::RotateNode => vec![Atom::new("@can-rotate-node", &[arg(0), arg(1)])],
        SchemeId::HollowNode => vec![Atom::new("@can-hollow-node", &[arg(0)])],
        SchemeId::AddBorder => vec![Atom::new("@can-add-border", &[arg(0), arg(1)])],
        SchemeId::MirrorNode => vec![Atom::new("@can-mirror-node", &[arg(0), arg(1)])],
        SchemeId::FlipNode => vec![Atom::new("@can-flip-node", &[arg(0), arg(1)])],
        SchemeId::InsertNode => vec![Atom::new("@can-insert-node", &[arg(0), arg(1)])],
        SchemeId::FillNode => vec![Atom::new("@can-fill-node", &[arg(0), arg(1)])],
    }
}

/// The canonical parsed form of a domain model.
pub fn canonical_domain(model: &DomainModel) -> ParsedDomain {
    let mut predicates = BTreeMap::new();
    for pred in &model.predicates {
        predicates.insert(
            pred.name().to_string(),
            pred.params().iter().map(|t| t.name().to_string()).collect(),
        );
    }
    let mut actions = BTreeMap::new();
    for &scheme in &model.schemes {
        let params = param_names(scheme.params());
        let precondition = scheme_precondition(scheme, &params);
        let effect = vec![Atom::new(
            &format!("@{}", scheme.pddl_name()),
            &params.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        )];
        actions.insert(
            scheme.pddl_name().to_string(),
            ParsedAction { params, precondition, effect },
        );
    }
    ParsedDomain {
        name: format!("arcplan-{}", model.kind.name()),
        types: ALL_TYPES.iter().map(|t| t.name().to_string()).collect(),
        predicates,
        actions,
    }
}

fn initial_atoms(model: &DomainModel, instance: &PlanningInstance) -> BTreeSet<Atom> {
    let graph = &instance.graph;
    let flags = compute_flags(&graph.nodes, graph.dims, graph.background, &instance.input);
    let relations = relations::compute_relations(graph).ok();
    let node = |i: usize| ObjectVal::Node(i).display();
    let color = |c: u8| ObjectVal::Color(c).display();
    let mut atoms = BTreeSet::new();
    for &pred in &model.predicates {
        match pred {
            PredicateId::Background => {
                atoms.insert(Atom::new("background", &[color(graph.background)]));
            }
            PredicateId::PixelColor => {
                for (r, c, col) in instance.input.iter_cells() {
                    atoms.insert(Atom::new(
                        "pixel-color",
                        &[ObjectVal::Pixel(r, c).display(), color(col)],
                    ));
                }
            }
            PredicateId::ContainPixel => {
                for n in graph.active_nodes() {
                    for &(r, c, _) in &n.cells {
                        atoms.insert(Atom::new(
                            "contain-pixel",
                            &[node(n.id), ObjectVal::Pixel(r, c).display()],
                        ));
                    }
                }
            }
            PredicateId::NodeColor => {
                for n in graph.active_nodes() {
                    if let Some(c) = n.color {
                        atoms.insert(Atom::new("node-color", &[node(n.id), color(c)]));
                    }
                }
            }
            PredicateId::NodeSize => {
                for n in graph.active_nodes() {
                    atoms.insert(Atom::new(
                        "node-size",
                        &[node(n.id), ObjectVal::Size(n.size()).display()],
                    ));
                }
            }
            PredicateId::NodeShape => {
                for n in graph.active_nodes() {
                    atoms.insert(Atom::new(
                        "node-shape",
                        &[node(n.id), n.shape().name().to_string()],
                    ));
                }
            }
            PredicateId::DenoisingColor => {
                for (i, n) in graph.nodes.iter().enumerate() {
                    if n.active && flags.denoising[i] {
                        if let Some(c) = n.color {
                            atoms.insert(Atom::new("denoising-color", &[node(i), color(c)]));
                        }
                    }
                }
            }
            PredicateId::ColorMost => {
                if let Some(c) = flags.color_most {
                    atoms.insert(Atom::new("color-most", &[color(c)]));
                }
            }
            PredicateId::ColorLeast => {
                if let Some(c) = flags.color_least {
                    atoms.insert(Atom::new("color-least", &[color(c)]));
                }
            }
            PredicateId::ColorMax
            | PredicateId::ColorMin
            | PredicateId::SizeMax
            | PredicateId::SizeMin
            | PredicateId::Odd
            | PredicateId::Even
            | PredicateId::UpBorder
            | PredicateId::DownBorder
            | PredicateId::LeftBorder
            | PredicateId::RightBorder
            | PredicateId::LeftDiagonal
            | PredicateId::RightDiagonal
            | PredicateId::HorizontalMiddle
            | PredicateId::VerticalMiddle => {
                let values = match pred {
                    PredicateId::ColorMax => &flags.color_max,
                    PredicateId::ColorMin => &flags.color_min,
                    PredicateId::SizeMax => &flags.size_max,
                    PredicateId::SizeMin => &flags.size_min,
                    PredicateId::Odd => &flags.odd,
                    PredicateId::Even => &flags.even,
                    PredicateId::UpBorder => &flags.up_border,
                    PredicateId::DownBorder => &flags.down_border,
                    PredicateId::LeftBorder => &flags.left_border,
                    PredicateId::RightBorder => &flags.right_border,
                    PredicateId::LeftDiagonal => &flags.left_diagonal,
                    PredicateId::RightDiagonal => &flags.right_diagonal,
                    PredicateId::HorizontalMiddle => &flags.horizontal_middle,
                    PredicateId::VerticalMiddle => &flags.vertical_middle,
                    _ => unreachable!(),
                };
                for (i, n) in graph.nodes.iter().enumerate() {
                    if n.active && values[i] {
                        atoms.insert(Atom::new(pred.name(), &[node(i)]));
                    }
                }
            }
            PredicateId::NodeSpatial
            | PredicateId::NodeDiagonal
            | PredicateId::SameColorPair
            | PredicateId::Congruent
            | PredicateId::ContainNode
            | PredicateId::PartiallyContainNode
            | PredicateId::RelativePosition => {
                if let Some(rel) = &relations {
                    match pred {
                        PredicateId::NodeSpatial => {
                            for &(a, b, d) in &rel.spatial {
                                atoms.insert(Atom::new(
                                    "node-spatial",
                                    &[node(a), node(b), d.name().to_string()],
                                ));
                            }
                        }
                        PredicateId::RelativePosition => {
                            for &(a, b, d) in &rel.relative_position {
                                atoms.insert(Atom::new(
                                    "relative-position",
                                    &[node(a), node(b), d.name().to_string()],
                                ));
                            }
                        }
                        _ => {
                            let pairs = match pred {
                                PredicateId::NodeDiagonal => &rel.diagonal,
                                PredicateId::SameColorPair => &rel.same_color,
                                PredicateId::Congruent => &rel.congruent,
                                PredicateId::ContainNode => &rel.contains,
                                PredicateId::PartiallyContainNode => &rel.partially_contains,
                                _ => unreachable!(),
                            };
                            for &(a, b) in pairs {
                                atoms.insert(Atom::new(pred.name(), &[node(a), node(b)]));
                            }
                        }
                    }
                }
            }
        }
    }
    atoms
}

/// The canonical parsed form of one grounded instance.
pub fn canonical_instance(
    model: &DomainModel,
    instance: &PlanningInstance,
    name: &str,
) -> ParsedInstance {
    let mut objects = BTreeMap::new();
    for i in 0..instance.graph.nodes.len() {
        objects.insert(ObjectVal::Node(i).display(), "node".to_string());
    }
    for &c in &instance.colors {
        objects.insert(ObjectVal::Color(c).display(), "color".to_string());
    }
    for &s in &instance.sizes {
        objects.insert(ObjectVal::Size(s).display(), "size".to_string());
    }
    let (h, w) = instance.graph.dims;
    let (gh, gw) = instance
        .goal
        .as_ref()
        .map(|g| g.dims())
        .unwrap_or((0, 0));
    for r in 0..h.max(gh) {
        for c in 0..w.max(gw) {
            objects.insert(ObjectVal::Pixel(r, c).display(), "pixel".to_string());
        }
    }
    for s in crate::domain::ALL_STEPS {
        objects.insert(ObjectVal::Step(s).display(), "step".to_string());
    }
    for r in crate::domain::ALL_ROTATIONS {
        objects.insert(object_name(ObjectVal::Rotation(r)), "rotation".to_string());
    }
    for f in crate::domain::ALL_FDIRECTIONS {
        objects.insert(ObjectVal::FDir(f).display(), "f-direction".to_string());
    }
    for d in relations::ALL_MDIRECTIONS {
        objects.insert(ObjectVal::MDir(d).display(), "m-direction".to_string());
    }
    for s in crate::shape::ALL_SHAPES {
        objects.insert(ObjectVal::Shape(s).display(), "shape".to_string());
    }
    let goal = instance
        .goal
        .as_ref()
        .map(|g| {
            g.iter_cells()
                .map(|(r, c, col)| {
                    Atom::new(
                        "pixel-color",
                        &[
                            ObjectVal::Pixel(r, c).display(),
                            ObjectVal::Color(col).display(),
                        ],
                    )
                })
                .collect()
        })
        .unwrap_or_default();
    ParsedInstance {
        name: name.to_string(),
        domain: format!("arcplan-{}", model.kind.name()),
        objects,
        init: initial_atoms(model, instance),
        goal,
    }
}

pub fn render_domain(domain: &ParsedDomain) -> String {
    let mut out = String::new();
    out.push_str(&format!("(define (domain {})\n", domain.name));
    out.push_str("  (:requirements :typing)\n");
    let types: Vec<&str> = domain.types.iter().map(String::as_str).collect();
    out.push_str(&format!("  (:types {})\n", types.join(" ")));
    out.push_str("  (:predicates\n");
    for (name, params) in &domain.predicates {
        let typed = param_names_from(params);
        out.push_str(&format!("    ({name}{typed})\n"));
    }
    out.push_str("  )\n");
    for (name, action) in &domain.actions {
        out.push_str(&format!("  (:action {name}\n"));
        let params: Vec<String> = action
            .params
            .iter()
            .map(|(n, t)| format!("{n} - {t}"))
            .collect();
        out.push_str(&format!("    :parameters ({})\n", params.join(" ")));
        out.push_str(&format!(
            "    :precondition {}\n",
            render_conjunction(&action.precondition)
        ));
        out.push_str(&format!("    :effect {}\n", render_conjunction(&action.effect)));
        out.push_str("  )\n");
    }
    out.push_str(")\n");
    out
}

fn param_names_from(types: &[String]) -> String {
    let mut counters: BTreeMap<&str, usize> = BTreeMap::new();
    let mut out = String::new();
    for ty in types {
        let obj = ALL_TYPES
            .iter()
            .find(|t| t.name() == ty)
            .copied()
            .unwrap_or(ObjType::Node);
        let prefix = param_prefix(obj);
        let n = counters.entry(prefix).or_insert(0);
        *n += 1;
        out.push_str(&format!(" ?{prefix}{n} - {ty}"));
    }
    out
}

fn render_conjunction(atoms: &[Atom]) -> String {
    match atoms.len() {
        0 => "(and)".to_string(),
        1 => atoms[0].render(),
        _ => format!(
            "(and {})",
            atoms.iter().map(Atom::render).collect::<Vec<_>>().join(" ")
        ),
    }
}

pub fn render_instance(instance: &ParsedInstance) -> String {
    let mut out = String::new();
    out.push_str(&format!("(define (problem {})\n", instance.name));
    out.push_str(&format!("  (:domain {})\n", instance.domain));
    out.push_str("  (:objects\n");
    let mut by_type: BTreeMap<&String, Vec<&String>> = BTreeMap::new();
    for (obj, ty) in &instance.objects {
        by_type.entry(ty).or_default().push(obj);
    }
    for (ty, objs) in by_type {
        let names: Vec<&str> = objs.iter().map(|s| s.as_str()).collect();
        out.push_str(&format!("    {} - {}\n", names.join(" "), ty));
    }
    out.push_str("  )\n");
    out.push_str("  (:init\n");
    for atom in &instance.init {
        out.push_str(&format!("    {}\n", atom.render()));
    }
    out.push_str("  )\n");
    let goal: Vec<Atom> = instance.goal.iter().cloned().collect();
    out.push_str(&format!("  (:goal {})\n", render_conjunction(&goal)));
    out.push_str(")\n");
    out
}

/// Emit the domain file text for a model.
pub fn domain_text(model: &DomainModel) -> String {
    render_domain(&canonical_domain(model))
}

/// Emit one instance file text.
pub fn instance_text(model: &DomainModel, instance: &PlanningInstance, name: &str) -> String {
    render_instance(&canonical_instance(model, instance, name))
}

// ---------------------------------------------------------------------------
// Reader

#[derive(Debug, Clone, PartialEq)]
enum Sexpr {
    Sym(String),
    List(Vec<Sexpr>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn read_sexpr(tokens: &[String], pos: &mut usize) -> Result<Sexpr> {
    match tokens.get(*pos) {
        None => Err(Error::Pddl("unexpected end of input".into())),
        Some(t) if t == "(" => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => return Err(Error::Pddl("unclosed parenthesis".into())),
                    Some(t) if t == ")" => {
                        *pos += 1;
                        return Ok(Sexpr::List(items));
                    }
                    _ => items.push(read_sexpr(tokens, pos)?),
                }
            }
        }
        Some(t) if t == ")" => Err(Error::Pddl("unexpected closing parenthesis".into())),
        Some(t) => {
            *pos += 1;
            Ok(Sexpr::Sym(t.clone()))
        }
    }
}

fn parse_sexpr(text: &str) -> Result<Sexpr> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let expr = read_sexpr(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(Error::Pddl("trailing tokens after the form".into()));
    }
    Ok(expr)
}

impl Sexpr {
    fn sym(&self) -> Result<&str> {
        match self {
            Sexpr::Sym(s) => Ok(s),
            Sexpr::List(_) => Err(Error::Pddl("expected a symbol".into())),
        }
    }

    fn list(&self) -> Result<&[Sexpr]> {
        match self {
            Sexpr::List(items) => Ok(items),
            Sexpr::Sym(s) => Err(Error::Pddl(format!("expected a list, got {s}"))),
        }
    }
}

/// Parse `?a ?b - t ?c - u` style typed lists.
fn parse_typed_list(items: &[Sexpr]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let sym = items[i].sym()?;
        if sym == "-" {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| Error::Pddl("dangling type dash".into()))?
                .sym()?;
            for name in pending.drain(..) {
                out.push((name, ty.to_string()));
            }
            i += 2;
        } else {
            pending.push(sym.to_string());
            i += 1;
        }
    }
    for name in pending {
        out.push((name, "object".to_string()));
    }
    Ok(out)
}

fn parse_atom(expr: &Sexpr) -> Result<Atom> {
    let items = expr.list()?;
    if items.is_empty() {
        return Err(Error::Pddl("empty atom".into()));
    }
    let name = items[0].sym()?.to_string();
    let args = items[1..]
        .iter()
        .map(|a| a.sym().map(str::to_string))
        .collect::<Result<Vec<_>>>()?;
    Ok(Atom { name, args })
}

fn parse_conjunction(expr: &Sexpr) -> Result<Vec<Atom>> {
    let items = expr.list()?;
    if items.first().and_then(|s| s.sym().ok()) == Some("and") {
        items[1..].iter().map(parse_atom).collect()
    } else if items.is_empty() {
        Ok(Vec::new())
    } else {
        Ok(vec![parse_atom(expr)?])
    }
}

pub fn parse_domain(text: &str) -> Result<ParsedDomain> {
    let expr = parse_sexpr(text)?;
    let items = expr.list()?;
    if items.first().and_then(|s| s.sym().ok()) != Some("define") {
        return Err(Error::Pddl("domain must start with define".into()));
    }
    let mut domain = ParsedDomain {
        name: String::new(),
        types: BTreeSet::new(),
        predicates: BTreeMap::new(),
        actions: BTreeMap::new(),
    };
    for item in &items[1..] {
        let section = item.list()?;
        match section.first().and_then(|s| s.sym().ok()) {
            Some("domain") => {
                domain.name = section
                    .get(1)
                    .ok_or_else(|| Error::Pddl("missing domain name".into()))?
                    .sym()?
                    .to_string();
            }
            Some(":requirements") => {}
            Some(":types") => {
                for t in &section[1..] {
                    domain.types.insert(t.sym()?.to_string());
                }
            }
            Some(":predicates") => {
                for p in &section[1..] {
                    let decl = p.list()?;
                    let name = decl[0].sym()?.to_string();
                    let params = parse_typed_list(&decl[1..])?
                        .into_iter()
                        .map(|(_, ty)| ty)
                        .collect();
                    domain.predicates.insert(name, params);
                }
            }
            Some(":action") => {
                let name = section
                    .get(1)
                    .ok_or_else(|| Error::Pddl("missing action name".into()))?
                    .sym()?
                    .to_string();
                let mut params = Vec::new();
                let mut precondition = Vec::new();
                let mut effect = Vec::new();
                let mut i = 2;
                while i + 1 < section.len() {
                    match section[i].sym()? {
                        ":parameters" => params = parse_typed_list(section[i + 1].list()?)?,
                        ":precondition" => precondition = parse_conjunction(&section[i + 1])?,
                        ":effect" => effect = parse_conjunction(&section[i + 1])?,
                        other => {
                            return Err(Error::Pddl(format!("unknown action field {other}")))
                        }
                    }
                    i += 2;
                }
                domain
                    .actions
                    .insert(name, ParsedAction { params, precondition, effect });
            }
            other => return Err(Error::Pddl(format!("unknown domain section {other:?}"))),
        }
    }
    Ok(domain)
}

pub fn parse_instance(text: &str) -> Result<ParsedInstance> {
    let expr = parse_sexpr(text)?;
    let items = expr.list()?;
    if items.first().and_then(|s| s.sym().ok()) != Some("define") {
        return Err(Error::Pddl("problem must start with define".into()));
    }
    let mut instance = ParsedInstance {
        name: String::new(),
        domain: String::new(),
        objects: BTreeMap::new(),
        init: BTreeSet::new(),
        goal: BTreeSet::new(),
    };
    for item in &items[1..] {
        let section = item.list()?;
        match section.first().and_then(|s| s.sym().ok()) {
            Some("problem") => {
                instance.name = section
                    .get(1)
                    .ok_or_else(|| Error::Pddl("missing problem name".into()))?
                    .sym()?
                    .to_string();
            }
            Some(":domain") => {
                instance.domain = section
                    .get(1)
                    .ok_or_else(|| Error::Pddl("missing domain reference".into()))?
                    .sym()?
                    .to_string();
            }
            Some(":objects") => {
                for (name, ty) in parse_typed_list(&section[1..])? {
                    instance.objects.insert(name, ty);
                }
            }
            Some(":init") => {
                for atom in &section[1..] {
                    instance.init.insert(parse_atom(atom)?);
                }
            }
            Some(":goal") => {
                let goal = section
                    .get(1)
                    .ok_or_else(|| Error::Pddl("missing goal body".into()))?;
                instance.goal = parse_conjunction(goal)?.into_iter().collect();
            }
            other => return Err(Error::Pddl(format!("unknown problem section {other:?}"))),
        }
    }
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::AbstractionKind;
    use crate::arc_io::Grid;
    use crate::domain::build_domain;
    use crate::{Task, TaskInstance};
    use crate::domain::{DomainModel, PlanningInstance};

    fn grid(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn sample_task() -> Task {
        let a = grid(&[&[2, 0, 0], &[0, 0, 0], &[0, 3, 3]]);
        let b = grid(&[&[4, 0, 0], &[0, 0, 0], &[0, 3, 3]]);
        Task {
            id: "sample".into(),
            train: vec![TaskInstance { input: a.clone(), output: Some(b.clone()) }],
            test: vec![TaskInstance { input: a, output: Some(b) }],
        }
    }

    #[test]
    fn update_color_action_has_three_typed_parameters() {
        let (model, _, _) = build_domain(&sample_task(), AbstractionKind::Cc4).unwrap();
        let text = domain_text(&model);
        assert!(text.contains(":action update-color"));
        assert!(text.contains(":parameters (?n1 - node ?c1 - color ?c2 - color)"));
        assert!(text.contains(":precondition (node-color ?n1 ?c1)"));
        assert!(text.contains(":effect (@update-color ?n1 ?c1 ?c2)"));
    }

    #[test]
    fn one_by_one_instance_has_one_pixel_color_atom() {
        let g = grid(&[&[2]]);
        let o = grid(&[&[3]]);
        // On a 1x1 grid the single color is the background, so the pruned
        // domain is empty; emit from the raw catalog instead.
        let (predicates, schemes) = crate::domain::catalog_for(AbstractionKind::Cc4);
        let model = DomainModel {
            kind: AbstractionKind::Cc4,
            predicates,
            schemes,
            test_predicates: vec![],
            whitelist: Default::default(),
        };
        let pair = TaskInstance { input: g, output: Some(o) };
        let inst = PlanningInstance::new(&pair, AbstractionKind::Cc4);
        let parsed = canonical_instance(&model, &inst, "tiny-train-0");
        let pixel_atoms = parsed
            .init
            .iter()
            .filter(|a| a.name == "pixel-color")
            .count();
        assert_eq!(pixel_atoms, 1);
        assert_eq!(parsed.goal.len(), 1);
    }

    #[test]
    fn domain_round_trips_through_the_reader() {
        for kind in [
            AbstractionKind::Cc4,
            AbstractionKind::Pixels,
            AbstractionKind::Image,
            AbstractionKind::Cc4Spatial,
        ] {
            let task = sample_task();
            let Ok((model, train, _)) = build_domain(&task, kind) else {
                continue;
            };
            let canonical = canonical_domain(&model);
            let parsed = parse_domain(&render_domain(&canonical)).unwrap();
            assert_eq!(parsed, canonical, "{kind:?}");

            let canonical = canonical_instance(&model, &train[0], "sample-train-0");
            let parsed = parse_instance(&render_instance(&canonical)).unwrap();
            assert_eq!(parsed, canonical, "{kind:?}");
        }
    }

    #[test]
    fn every_scheme_precondition_predicate_is_declared() {
        // declared predicates plus external functions cover all precondition
        // atom names
        let (model, _, _) = build_domain(&sample_task(), AbstractionKind::Cc4).unwrap();
        let domain = canonical_domain(&model);
        for action in domain.actions.values() {
            for atom in action.precondition.iter().chain(action.effect.iter()) {
                if atom.name.starts_with('@') {
                    continue;
                }
                assert!(
                    domain.predicates.contains_key(&atom.name),
                    "undeclared predicate {}",
                    atom.name
                );
            }
        }
    }

    #[test]
    fn reader_rejects_malformed_text() {
        assert!(parse_domain("(define (domain x)").is_err());
        assert!(parse_domain("nonsense").is_err());
        assert!(parse_instance("(define (problem p) (:bogus))").is_err());
    }
}
