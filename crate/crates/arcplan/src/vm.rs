//! Programs over a fixed instruction set with pointer registers, and their
//! deterministic execution.
//!
//! A program is an application section (searched) followed by a generated
//! looping section that enumerates every combination of pointer values and
//! ends with `end`. Execution keeps a line position, pointer values and a
//! condition flag; planning actions that are inapplicable leave the state
//! unchanged.

use crate::actions::{self, GroundAction};
use crate::arc_io::grids_equal;
use crate::domain::{ObjType, ObjectVal, PlanningInstance, PredicateId, SchemeId};
use crate::state::AbstractState;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pointer {
    pub name: String,
    pub ty: ObjType,
}

impl Pointer {
    pub fn new(name: &str, ty: ObjType) -> Self {
        Pointer { name: name.to_string(), ty }
    }

    pub fn describe(&self) -> String {
        format!("{}:{}", self.name, self.ty.name())
    }

    pub fn from_description(text: &str) -> Option<Pointer> {
        let (name, ty) = text.split_once(':')?;
        let ty = match ty {
            "node" => ObjType::Node,
            "color" => ObjType::Color,
            "m-direction" => ObjType::MDirection,
            "size" => ObjType::Size,
            "shape" => ObjType::Shape,
            "pixel" => ObjType::Pixel,
            "step" => ObjType::Step,
            "rotation" => ObjType::Rotation,
            "f-direction" => ObjType::FDirection,
            _ => return None,
        };
        Some(Pointer::new(name, ty))
    }
}

/// An argument slot: either a pointer (resolved at execution time) or a
/// constant object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Ptr(usize),
    Const(ObjectVal),
}

/// A goto target: an application line, or the start of the looping section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dest {
    Line(usize),
    Loop,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instruction {
    Action { scheme: SchemeId, args: Vec<Slot> },
    Inc(usize),
    Reset(usize),
    Test { pred: PredicateId, args: Vec<Slot> },
    TestTrue,
    Goto { dest: Dest, on: bool },
    End,
}

impl Instruction {
    pub fn is_test(&self) -> bool {
        matches!(self, Instruction::Test { .. } | Instruction::TestTrue)
    }

    pub fn is_action(&self) -> bool {
        matches!(self, Instruction::Action { .. })
    }
}

/// A complete program: every application line programmed, looping attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanningProgram {
    pub application: Vec<Instruction>,
    pub looping: Vec<Instruction>,
    pub pointers: Vec<Pointer>,
}

impl PlanningProgram {
    pub fn new(application: Vec<Instruction>, pointers: Vec<Pointer>) -> Result<Self> {
        let looping = generate_looping_section(pointers.len())?;
        Ok(PlanningProgram { application, looping, pointers })
    }

    pub fn view(&self) -> ProgramView<'_> {
        ProgramView {
            application: &self.application,
            looping: &self.looping,
            pointers: &self.pointers,
            closed: true,
        }
    }
}

/// The canonical pointer-enumeration block: advance the first pointer and
/// restart the application; on overflow reset it and advance the next one;
/// when the last pointer overflows, fall through to `end`.
pub fn generate_looping_section(pointer_count: usize) -> Result<Vec<Instruction>> {
    if pointer_count == 0 {
        return Err(Error::Validation("a program needs at least one pointer".into()));
    }
    let mut lines = Vec::new();
    for p in 0..pointer_count {
        if p > 0 {
            lines.push(Instruction::Reset(p - 1));
        }
        lines.push(Instruction::Inc(p));
        lines.push(Instruction::Goto { dest: Dest::Line(0), on: true });
    }
    lines.push(Instruction::End);
    Ok(lines)
}

/// Structural rules for the application section: a test is always followed
/// by a goto, the first line is a test, once a planning action appears only
/// planning actions may follow, and gotos jump strictly forward.
pub fn validate_structure(application: &[Instruction]) -> bool {
    if application.is_empty() || !application[0].is_test() {
        return false;
    }
    let mut seen_action = false;
    for (i, inst) in application.iter().enumerate() {
        match inst {
            Instruction::Inc(_) | Instruction::Reset(_) | Instruction::End => return false,
            Instruction::Test { .. } | Instruction::TestTrue => {
                if seen_action {
                    return false;
                }
                match application.get(i + 1) {
                    Some(Instruction::Goto { .. }) => {}
                    _ => return false,
                }
            }
            Instruction::Goto { dest, .. } => {
                if seen_action {
                    return false;
                }
                if let Dest::Line(d) = dest {
                    if *d <= i {
                        return false;
                    }
                }
            }
            Instruction::Action { .. } => {
                seen_action = true;
            }
        }
    }
    true
}

/// A complete program must also resolve every goto target to a real line.
pub fn validate_closed(application: &[Instruction]) -> bool {
    validate_structure(application)
        && application.iter().all(|inst| match inst {
            Instruction::Goto { dest: Dest::Line(d), .. } => *d < application.len(),
            _ => true,
        })
}

/// A view over a possibly partial program. When `closed` is false, the
/// application section conceptually continues with unprogrammed lines and
/// reaching one of them is a partial execution.
#[derive(Debug, Clone, Copy)]
pub struct ProgramView<'a> {
    pub application: &'a [Instruction],
    pub looping: &'a [Instruction],
    pub pointers: &'a [Pointer],
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pos {
    App(usize),
    Loop(usize),
    Done,
}

#[derive(Debug, Clone)]
pub struct VmState {
    pub state: AbstractState,
    pub pos: Pos,
    pub pointers: Vec<usize>,
    pub flag: bool,
    pub steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepResult {
    Running,
    /// An unprogrammed application line was reached.
    Partial,
    Ended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Solved,
    TerminatedNotGoal,
    StepLimit,
    Partial,
}

#[derive(Debug)]
pub struct RunResult {
    pub outcome: Outcome,
    pub state: AbstractState,
    pub steps: u64,
}

pub fn pointer_ranges(pointers: &[Pointer], instance: &PlanningInstance) -> Vec<usize> {
    pointers.iter().map(|p| instance.object_count(p.ty)).collect()
}

fn resolve_slot(
    slot: Slot,
    pointers: &[Pointer],
    values: &[usize],
    instance: &PlanningInstance,
) -> ObjectVal {
    match slot {
        Slot::Const(v) => v,
        Slot::Ptr(i) => instance.object_at(pointers[i].ty, values[i]),
    }
}

fn resolve_args(
    slots: &[Slot],
    pointers: &[Pointer],
    values: &[usize],
    instance: &PlanningInstance,
) -> Vec<ObjectVal> {
    slots
        .iter()
        .map(|&s| resolve_slot(s, pointers, values, instance))
        .collect()
}

fn goto_target(view: &ProgramView, dest: Dest) -> Result<Pos> {
    match dest {
        Dest::Loop => Ok(Pos::Loop(0)),
        Dest::Line(d) if d < view.application.len() => Ok(Pos::App(d)),
        Dest::Line(_) if !view.closed => Ok(Pos::App(view.application.len())),
        Dest::Line(d) => Err(Error::Validation(format!(
            "goto target {d} outside the application section"
        ))),
    }
}

/// Execute one instruction. Pointer ranges must come from the same instance
/// the state was built from.
pub fn step(
    view: &ProgramView,
    vm: &mut VmState,
    ranges: &[usize],
    instance: &PlanningInstance,
) -> StepResult {
    vm.steps += 1;
    let (inst, in_app, idx) = match vm.pos {
        Pos::Done => return StepResult::Ended,
        Pos::App(i) => {
            if i < view.application.len() {
                (&view.application[i], true, i)
            } else if view.closed {
                vm.pos = Pos::Loop(0);
                vm.steps -= 1;
                return step(view, vm, ranges, instance);
            } else {
                return StepResult::Partial;
            }
        }
        Pos::Loop(j) => (&view.looping[j], false, j),
    };
    let advance = |vm: &mut VmState| {
        vm.pos = if in_app {
            Pos::App(idx + 1)
        } else {
            Pos::Loop(idx + 1)
        };
    };
    match inst {
        Instruction::Action { scheme, args } => {
            let args = resolve_args(args, view.pointers, &vm.pointers, instance);
            let action = GroundAction { scheme: *scheme, args };
            let _ = actions::apply(&mut vm.state, &action);
            advance(vm);
        }
        Instruction::Inc(p) => {
            if vm.pointers[*p] + 1 < ranges[*p] {
                vm.pointers[*p] += 1;
                vm.flag = true;
            } else {
                vm.flag = false;
            }
            advance(vm);
        }
        Instruction::Reset(p) => {
            vm.pointers[*p] = 0;
            advance(vm);
        }
        Instruction::Test { pred, args } => {
            let args = resolve_args(args, view.pointers, &vm.pointers, instance);
            vm.flag = actions::eval_predicate(&vm.state, *pred, &args);
            advance(vm);
        }
        Instruction::TestTrue => {
            vm.flag = true;
            advance(vm);
        }
        Instruction::Goto { dest, on } => {
            if vm.flag == *on {
                vm.pos = goto_target(view, *dest)
                    .expect("goto targets are validated for closed programs");
            } else {
                advance(vm);
            }
            // A jump to an unprogrammed line of an open program stops here.
            if !view.closed {
                if let Pos::App(i) = vm.pos {
                    if i >= view.application.len() {
                        return StepResult::Partial;
                    }
                }
            }
        }
        Instruction::End => {
            vm.pos = Pos::Done;
            return StepResult::Ended;
        }
    }
    StepResult::Running
}

/// Worst-case step bound of a structurally valid program: every line can run
/// at most once per pointer-value combination.
pub fn termination_bound(view: &ProgramView, ranges: &[usize]) -> u64 {
    let lines = (view.application.len() + view.looping.len()) as u64;
    let tuples: u64 = ranges.iter().map(|&r| r as u64).product();
    lines.saturating_mul(tuples.max(1))
}

/// Run a program on an instance from its initial state.
pub fn run(view: &ProgramView, instance: &PlanningInstance) -> RunResult {
    let state = AbstractState::from_graph(&instance.graph, &instance.input);
    run_from(view, instance, state)
}

pub fn run_from(
    view: &ProgramView,
    instance: &PlanningInstance,
    state: AbstractState,
) -> RunResult {
    let ranges = pointer_ranges(view.pointers, instance);
    if ranges.iter().any(|&r| r == 0) {
        // A pointer over an empty object list cannot enumerate anything.
        return RunResult { outcome: Outcome::TerminatedNotGoal, state, steps: 0 };
    }
    let budget = 4 * termination_bound(view, &ranges);
    let mut vm = VmState {
        state,
        pos: Pos::App(0),
        pointers: vec![0; view.pointers.len()],
        flag: false,
        steps: 0,
    };
    loop {
        if vm.steps >= budget {
            return RunResult { outcome: Outcome::StepLimit, state: vm.state, steps: vm.steps };
        }
        match step(view, &mut vm, &ranges, instance) {
            StepResult::Running => {}
            StepResult::Partial => {
                return RunResult { outcome: Outcome::Partial, state: vm.state, steps: vm.steps }
            }
            StepResult::Ended => break,
        }
    }
    let outcome = match &instance.goal {
        Some(goal) if grids_equal(vm.state.rendered(), goal) => Outcome::Solved,
        _ => Outcome::TerminatedNotGoal,
    };
    RunResult { outcome, state: vm.state, steps: vm.steps }
}

fn slot_text(slot: &Slot, pointers: &[Pointer]) -> String {
    match slot {
        Slot::Ptr(i) => pointers[*i].name.clone(),
        Slot::Const(v) => v.display(),
    }
}

fn instruction_text(inst: &Instruction, program: &PlanningProgram) -> String {
    let loop_start = program.application.len();
    match inst {
        Instruction::Action { scheme, args } => {
            let args: Vec<String> = args
                .iter()
                .map(|s| slot_text(s, &program.pointers))
                .collect();
            format!("{}({})", scheme.name(), args.join(", "))
        }
        Instruction::Inc(p) => format!("inc({})", program.pointers[*p].name),
        Instruction::Reset(p) => format!("reset({})", program.pointers[*p].name),
        Instruction::Test { pred, args } => {
            let args: Vec<String> = args
                .iter()
                .map(|s| slot_text(s, &program.pointers))
                .collect();
            format!("test({}({}))", pred.name(), args.join(", "))
        }
        Instruction::TestTrue => "test(true)".to_string(),
        Instruction::Goto { dest, on } => {
            let line = match dest {
                Dest::Line(d) => *d,
                Dest::Loop => loop_start,
            };
            format!("goto({line}, {on})")
        }
        Instruction::End => "end".to_string(),
    }
}

/// Render a complete program in a numbered line format, looping section
/// included.
pub fn pretty(program: &PlanningProgram) -> String {
    let mut out = String::new();
    for (i, inst) in program
        .application
        .iter()
        .chain(program.looping.iter())
        .enumerate()
    {
        out.push_str(&format!("{i}. {}\n", instruction_text(inst, program)));
    }
    out
}

fn parse_call(text: &str) -> Result<(String, Vec<String>)> {
    let text = text.trim();
    let open = text
        .find('(')
        .ok_or_else(|| Error::Parse(format!("expected call syntax: {text}")))?;
    if !text.ends_with(')') {
        return Err(Error::Parse(format!("unbalanced call: {text}")));
    }
    let head = text[..open].trim().to_string();
    let inner = &text[open + 1..text.len() - 1];
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(|a| a.trim().to_string()).collect()
    };
    Ok((head, args))
}

fn parse_slot(text: &str, pointers: &[Pointer]) -> Result<Slot> {
    if let Some(i) = pointers.iter().position(|p| p.name == text) {
        return Ok(Slot::Ptr(i));
    }
    ObjectVal::parse(text)
        .map(Slot::Const)
        .ok_or_else(|| Error::Parse(format!("unknown argument: {text}")))
}

/// Parse the pretty-printed form back into a program. The looping section is
/// regenerated from the pointer list and checked against the text.
pub fn parse_program(text: &str, pointers: Vec<Pointer>) -> Result<PlanningProgram> {
    let mut application = Vec::new();
    let mut body_lines = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let line = match line.split_once(". ") {
            Some((num, rest)) if num.chars().all(|c| c.is_ascii_digit()) => rest.trim(),
            _ => line,
        };
        body_lines.push(line.to_string());
    }
    let mut iter = body_lines.iter().peekable();
    while let Some(line) = iter.peek() {
        if line.starts_with("inc(") || *line == "end" {
            break;
        }
        let line = iter.next().unwrap();
        if let Some(rest) = line.strip_prefix("test(") {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced test: {line}")))?;
            if inner == "true" {
                application.push(Instruction::TestTrue);
            } else {
                let (pred, args) = parse_call(inner)?;
                let pred = PredicateId::from_name(&pred)
                    .ok_or_else(|| Error::Parse(format!("unknown predicate: {pred}")))?;
                let args = args
                    .iter()
                    .map(|a| parse_slot(a, &pointers))
                    .collect::<Result<Vec<_>>>()?;
                application.push(Instruction::Test { pred, args });
            }
        } else if line.starts_with("goto(") {
            let (_, args) = parse_call(line)?;
            if args.len() != 2 {
                return Err(Error::Parse(format!("goto needs two arguments: {line}")));
            }
            let target: usize = args[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad goto target: {line}")))?;
            let on: bool = args[1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad goto flag: {line}")))?;
            application.push(Instruction::Goto { dest: Dest::Line(target), on });
        } else {
            let (head, args) = parse_call(line)?;
            let scheme = SchemeId::from_name(&head)
                .ok_or_else(|| Error::Parse(format!("unknown instruction: {line}")))?;
            let args = args
                .iter()
                .map(|a| parse_slot(a, &pointers))
                .collect::<Result<Vec<_>>>()?;
            application.push(Instruction::Action { scheme, args });
        }
    }
    // Goto targets at or past the loop start point at the looping section.
    let loop_start = application.len();
    for inst in &mut application {
        if let Instruction::Goto { dest: Dest::Line(d), .. } = inst {
            if *d >= loop_start {
                *inst = match inst {
                    Instruction::Goto { on, .. } => Instruction::Goto { dest: Dest::Loop, on: *on },
                    _ => unreachable!(),
                };
            }
        }
    }
    let program = PlanningProgram::new(application, pointers)?;
    if !validate_closed(&program.application) {
        return Err(Error::Validation("parsed program is structurally invalid".into()));
    }
    // The remaining lines must be the canonical looping section.
    let expected: Vec<String> = program
        .looping
        .iter()
        .map(|inst| instruction_text(inst, &program))
        .collect();
    let got: Vec<String> = iter.cloned().collect();
    if !got.is_empty() && got != expected {
        return Err(Error::Parse("looping section does not match the pointer list".into()));
    }
    Ok(program)
}
