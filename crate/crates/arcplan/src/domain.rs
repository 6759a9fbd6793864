//! Per-task planning domain generation: object types, the predicate and
//! action-scheme catalogs of each abstraction, task-driven action pruning,
//! and the argument whitelists that keep test conditions generalizable.

use std::collections::BTreeSet;

use crate::abstraction::{self, AbstractGraph, AbstractionKind};
use crate::arc_io::{Color, Grid};
use crate::relations::MDirection;
use crate::shape::Shape;
use crate::{Error, Result, Task, TaskInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjType {
    Node,
    Pixel,
    Color,
    Size,
    Step,
    Rotation,
    FDirection,
    MDirection,
    Shape,
}

impl ObjType {
    pub fn name(self) -> &'static str {
        match self {
            ObjType::Node => "node",
            ObjType::Pixel => "pixel",
            ObjType::Color => "color",
            ObjType::Size => "size",
            ObjType::Step => "step",
            ObjType::Rotation => "rotation",
            ObjType::FDirection => "f-direction",
            ObjType::MDirection => "m-direction",
            ObjType::Shape => "shape",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FDirection {
    Vertical,
    Horizontal,
    LeftDiagonal,
    RightDiagonal,
}

pub const ALL_FDIRECTIONS: [FDirection; 4] = [
    FDirection::Vertical,
    FDirection::Horizontal,
    FDirection::LeftDiagonal,
    FDirection::RightDiagonal,
];

impl FDirection {
    pub fn name(self) -> &'static str {
        match self {
            FDirection::Vertical => "vertical",
            FDirection::Horizontal => "horizontal",
            FDirection::LeftDiagonal => "left-diagonal",
            FDirection::RightDiagonal => "right-diagonal",
        }
    }

    pub fn from_name(name: &str) -> Option<FDirection> {
        ALL_FDIRECTIONS.iter().copied().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rotation {
    R90,
    R180,
    R270,
}

pub const ALL_ROTATIONS: [Rotation; 3] = [Rotation::R90, Rotation::R180, Rotation::R270];

impl Rotation {
    pub fn name(self) -> &'static str {
        match self {
            Rotation::R90 => "90",
            Rotation::R180 => "180",
            Rotation::R270 => "270",
        }
    }

    pub fn from_name(name: &str) -> Option<Rotation> {
        ALL_ROTATIONS.iter().copied().find(|r| r.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepKind {
    One,
    Max,
}

pub const ALL_STEPS: [StepKind; 2] = [StepKind::One, StepKind::Max];

impl StepKind {
    pub fn name(self) -> &'static str {
        match self {
            StepKind::One => "one",
            StepKind::Max => "max",
        }
    }

    pub fn from_name(name: &str) -> Option<StepKind> {
        ALL_STEPS.iter().copied().find(|s| s.name() == name)
    }
}

/// A concrete object value, as bound into an action or predicate argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectVal {
    Node(usize),
    Pixel(usize, usize),
    Color(Color),
    Size(usize),
    Step(StepKind),
    Rotation(Rotation),
    FDir(FDirection),
    MDir(MDirection),
    Shape(Shape),
}

impl ObjectVal {
    pub fn obj_type(self) -> ObjType {
        match self {
            ObjectVal::Node(_) => ObjType::Node,
            ObjectVal::Pixel(..) => ObjType::Pixel,
            ObjectVal::Color(_) => ObjType::Color,
            ObjectVal::Size(_) => ObjType::Size,
            ObjectVal::Step(_) => ObjType::Step,
            ObjectVal::Rotation(_) => ObjType::Rotation,
            ObjectVal::FDir(_) => ObjType::FDirection,
            ObjectVal::MDir(_) => ObjType::MDirection,
            ObjectVal::Shape(_) => ObjType::Shape,
        }
    }

    pub fn display(self) -> String {
        match self {
            ObjectVal::Node(i) => format!("node-{i}"),
            ObjectVal::Pixel(r, c) => format!("pixel-{r}-{c}"),
            ObjectVal::Color(c) => format!("color-{c}"),
            ObjectVal::Size(s) => format!("size-{s}"),
            ObjectVal::Step(s) => s.name().to_string(),
            ObjectVal::Rotation(r) => r.name().to_string(),
            ObjectVal::FDir(f) => f.name().to_string(),
            ObjectVal::MDir(m) => m.name().to_string(),
            ObjectVal::Shape(s) => s.name().to_string(),
        }
    }

    /// Inverse of [`ObjectVal::display`].
    pub fn parse(text: &str) -> Option<ObjectVal> {
        if let Some(rest) = text.strip_prefix("node-") {
            return rest.parse().ok().map(ObjectVal::Node);
        }
        if let Some(rest) = text.strip_prefix("pixel-") {
            let mut it = rest.splitn(2, '-');
            let r = it.next()?.parse().ok()?;
            let c = it.next()?.parse().ok()?;
            return Some(ObjectVal::Pixel(r, c));
        }
        if let Some(rest) = text.strip_prefix("color-") {
            return rest.parse().ok().map(ObjectVal::Color);
        }
        if let Some(rest) = text.strip_prefix("size-") {
            return rest.parse().ok().map(ObjectVal::Size);
        }
        if let Some(s) = StepKind::from_name(text) {
            return Some(ObjectVal::Step(s));
        }
        if let Some(r) = Rotation::from_name(text) {
            return Some(ObjectVal::Rotation(r));
        }
        if let Some(m) = MDirection::from_name(text) {
            return Some(ObjectVal::MDir(m));
        }
        if let Some(f) = FDirection::from_name(text) {
            return Some(ObjectVal::FDir(f));
        }
        Shape::from_name(text).map(ObjectVal::Shape)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PredicateId {
    ColorMost,
    ColorLeast,
    ColorMax,
    ColorMin,
    SizeMin,
    SizeMax,
    Odd,
    Even,
    UpBorder,
    DownBorder,
    LeftBorder,
    RightBorder,
    LeftDiagonal,
    RightDiagonal,
    HorizontalMiddle,
    VerticalMiddle,
    NodeColor,
    NodeShape,
    NodeSize,
    DenoisingColor,
    Background,
    NodeDiagonal,
    SameColorPair,
    Congruent,
    ContainNode,
    PartiallyContainNode,
    RelativePosition,
    NodeSpatial,
    PixelColor,
    ContainPixel,
}

impl PredicateId {
    pub fn name(self) -> &'static str {
        match self {
            PredicateId::ColorMost => "color-most",
            PredicateId::ColorLeast => "color-least",
            PredicateId::ColorMax => "color-max",
            PredicateId::ColorMin => "color-min",
            PredicateId::SizeMin => "size-min",
            PredicateId::SizeMax => "size-max",
            PredicateId::Odd => "odd",
            PredicateId::Even => "even",
            PredicateId::UpBorder => "up-border",
            PredicateId::DownBorder => "down-border",
            PredicateId::LeftBorder => "left-border",
            PredicateId::RightBorder => "right-border",
            PredicateId::LeftDiagonal => "left-diagonal",
            PredicateId::RightDiagonal => "right-diagonal",
            PredicateId::HorizontalMiddle => "horizontal-middle",
            PredicateId::VerticalMiddle => "vertical-middle",
            PredicateId::NodeColor => "node-color",
            PredicateId::NodeShape => "node-shape",
            PredicateId::NodeSize => "node-size",
            PredicateId::DenoisingColor => "denoising-color",
            PredicateId::Background => "background",
            PredicateId::NodeDiagonal => "node-diagonal",
            PredicateId::SameColorPair => "same-color",
            PredicateId::Congruent => "congruent",
            PredicateId::ContainNode => "contain-node",
            PredicateId::PartiallyContainNode => "partially-contain-node",
            PredicateId::RelativePosition => "relative-position",
            PredicateId::NodeSpatial => "node-spatial",
            PredicateId::PixelColor => "pixel-color",
            PredicateId::ContainPixel => "contain-pixel",
        }
    }

    pub fn from_name(name: &str) -> Option<PredicateId> {
        ALL_PREDICATES.iter().copied().find(|p| p.name() == name)
    }

    pub fn params(self) -> &'static [ObjType] {
        use ObjType::*;
        match self {
            PredicateId::ColorMost | PredicateId::ColorLeast | PredicateId::Background => {
                &[Color]
            }
            PredicateId::ColorMax
            | PredicateId::ColorMin
            | PredicateId::SizeMin
            | PredicateId::SizeMax
            | PredicateId::Odd
            | PredicateId::Even
            | PredicateId::UpBorder
            | PredicateId::DownBorder
            | PredicateId::LeftBorder
            | PredicateId::RightBorder
            | PredicateId::LeftDiagonal
            | PredicateId::RightDiagonal
            | PredicateId::HorizontalMiddle
            | PredicateId::VerticalMiddle => &[Node],
            PredicateId::NodeColor | PredicateId::DenoisingColor => &[Node, Color],
            PredicateId::NodeShape => &[Node, Shape],
            PredicateId::NodeSize => &[Node, Size],
            PredicateId::NodeDiagonal
            | PredicateId::SameColorPair
            | PredicateId::Congruent
            | PredicateId::ContainNode
            | PredicateId::PartiallyContainNode => &[Node, Node],
            PredicateId::RelativePosition | PredicateId::NodeSpatial => {
                &[Node, Node, MDirection]
            }
            PredicateId::PixelColor => &[Pixel, Color],
            PredicateId::ContainPixel => &[Node, Pixel],
        }
    }

    /// Whether a test action may interpret this predicate at all. Spatial,
    /// background and pixel-level predicates only encode state.
    pub fn test_eligible(self) -> bool {
        !matches!(
            self,
            PredicateId::Background
                | PredicateId::NodeSpatial
                | PredicateId::PixelColor
                | PredicateId::ContainPixel
        )
    }
}

pub const ALL_PREDICATES: [PredicateId; 30] = [
    PredicateId::ColorMost,
    PredicateId::ColorLeast,
    PredicateId::ColorMax,
    PredicateId::ColorMin,
    PredicateId::SizeMin,
    PredicateId::SizeMax,
    PredicateId::Odd,
    PredicateId::Even,
    PredicateId::UpBorder,
    PredicateId::DownBorder,
    PredicateId::LeftBorder,
    PredicateId::RightBorder,
    PredicateId::LeftDiagonal,
    PredicateId::RightDiagonal,
    PredicateId::HorizontalMiddle,
    PredicateId::VerticalMiddle,
    PredicateId::NodeColor,
    PredicateId::NodeShape,
    PredicateId::NodeSize,
    PredicateId::DenoisingColor,
    PredicateId::Background,
    PredicateId::NodeDiagonal,
    PredicateId::SameColorPair,
    PredicateId::Congruent,
    PredicateId::ContainNode,
    PredicateId::PartiallyContainNode,
    PredicateId::RelativePosition,
    PredicateId::NodeSpatial,
    PredicateId::PixelColor,
    PredicateId::ContainPixel,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    UpdateColor,
    SwapColor,
    CopyColor,
    MoveNode1,
    MoveNode2,
    MoveNodeDirection1,
    MoveNodeDirection2,
    ExtendNode,
    ExtendNodeDirection,
    RotateNode,
    HollowNode,
    AddBorder,
    MirrorNode,
    FlipNode,
    InsertNode,
    FillNode,
}

pub const ALL_SCHEMES: [SchemeId; 16] = [
    SchemeId::UpdateColor,
    SchemeId::SwapColor,
    SchemeId::CopyColor,
    SchemeId::MoveNode1,
    SchemeId::MoveNode2,
    SchemeId::MoveNodeDirection1,
    SchemeId::MoveNodeDirection2,
    SchemeId::ExtendNode,
    SchemeId::ExtendNodeDirection,
    SchemeId::RotateNode,
    SchemeId::HollowNode,
    SchemeId::AddBorder,
    SchemeId::MirrorNode,
    SchemeId::FlipNode,
    SchemeId::InsertNode,
    SchemeId::FillNode,
];

impl SchemeId {
    pub fn name(self) -> &'static str {
        match self {
            SchemeId::UpdateColor => "UpdateColor",
            SchemeId::SwapColor => "SwapColor",
            SchemeId::CopyColor => "CopyColor",
            SchemeId::MoveNode1 => "MoveNode1",
            SchemeId::MoveNode2 => "MoveNode2",
            SchemeId::MoveNodeDirection1 => "MoveNodeDirection1",
            SchemeId::MoveNodeDirection2 => "MoveNodeDirection2",
            SchemeId::ExtendNode => "ExtendNode",
            SchemeId::ExtendNodeDirection => "ExtendNodeDirection",
            SchemeId::RotateNode => "RotateNode",
            SchemeId::HollowNode => "HollowNode",
            SchemeId::AddBorder => "AddBorder",
            SchemeId::MirrorNode => "MirrorNode",
            SchemeId::FlipNode => "FlipNode",
            SchemeId::InsertNode => "InsertNode",
            SchemeId::FillNode => "FillNode",
        }
    }

    pub fn pddl_name(self) -> &'static str {
        match self {
            SchemeId::UpdateColor => "update-color",
            SchemeId::SwapColor => "swap-color",
            SchemeId::CopyColor => "copy-color",
            SchemeId::MoveNode1 => "move-node1",
            SchemeId::MoveNode2 => "move-node2",
            SchemeId::MoveNodeDirection1 => "move-node-direction1",
            SchemeId::MoveNodeDirection2 => "move-node-direction2",
            SchemeId::ExtendNode => "extend-node",
            SchemeId::ExtendNodeDirection => "extend-node-direction",
            SchemeId::RotateNode => "rotate-node",
            SchemeId::HollowNode => "hollow-node",
            SchemeId::AddBorder => "add-border",
            SchemeId::MirrorNode => "mirror-node",
            SchemeId::FlipNode => "flip-node",
            SchemeId::InsertNode => "insert-node",
            SchemeId::FillNode => "fill-node",
        }
    }

    pub fn from_name(name: &str) -> Option<SchemeId> {
        ALL_SCHEMES.iter().copied().find(|s| s.name() == name)
    }

    pub fn params(self) -> &'static [ObjType] {
        use ObjType::*;
        match self {
            SchemeId::UpdateColor => &[Node, Color, Color],
            SchemeId::SwapColor
            | SchemeId::CopyColor
            | SchemeId::MoveNode1
            | SchemeId::MoveNode2
            | SchemeId::ExtendNode
            | SchemeId::MirrorNode
            | SchemeId::InsertNode => &[Node, Node],
            SchemeId::MoveNodeDirection1 | SchemeId::ExtendNodeDirection => &[Node, MDirection],
            SchemeId::MoveNodeDirection2 => &[Node, MDirection, Step],
            SchemeId::RotateNode => &[Node, Rotation],
            SchemeId::HollowNode | SchemeId::AddBorder | SchemeId::FillNode => &[Node, Color],
            SchemeId::FlipNode => &[Node, FDirection],
        }
    }

    /// Two-node schemes are never instantiated with the same pointer twice;
    /// their preconditions exclude self-pairs.
    pub fn distinct_node_args(self) -> bool {
        self.params().iter().filter(|t| **t == ObjType::Node).count() > 1
    }
}

const CC4_PREDICATES: &[PredicateId] = &[
    PredicateId::NodeColor,
    PredicateId::NodeSize,
    PredicateId::NodeShape,
    PredicateId::ContainNode,
    PredicateId::PartiallyContainNode,
    PredicateId::NodeSpatial,
    PredicateId::NodeDiagonal,
    PredicateId::Odd,
    PredicateId::Even,
    PredicateId::SizeMax,
    PredicateId::SizeMin,
    PredicateId::ColorMax,
    PredicateId::ColorMin,
    PredicateId::Background,
    PredicateId::ContainPixel,
    PredicateId::PixelColor,
];

const CC4_SCHEMES: &[SchemeId] = &[
    SchemeId::UpdateColor,
    SchemeId::MoveNode1,
    SchemeId::ExtendNode,
    SchemeId::AddBorder,
    SchemeId::MirrorNode,
    SchemeId::InsertNode,
    SchemeId::HollowNode,
    SchemeId::FillNode,
];

const SPATIAL_PREDICATES: &[PredicateId] = &[
    PredicateId::NodeColor,
    PredicateId::NodeSize,
    PredicateId::NodeShape,
    PredicateId::ContainNode,
    PredicateId::PartiallyContainNode,
    PredicateId::NodeSpatial,
    PredicateId::RelativePosition,
    PredicateId::NodeDiagonal,
    PredicateId::Background,
    PredicateId::ContainPixel,
    PredicateId::PixelColor,
];

const SPATIAL_SCHEMES: &[SchemeId] = &[
    SchemeId::UpdateColor,
    SchemeId::MoveNode2,
    SchemeId::MoveNodeDirection1,
    SchemeId::MoveNodeDirection2,
    SchemeId::ExtendNodeDirection,
];

const CONGRUENT_PREDICATES: &[PredicateId] = &[
    PredicateId::NodeColor,
    PredicateId::NodeSize,
    PredicateId::ContainNode,
    PredicateId::PartiallyContainNode,
    PredicateId::NodeSpatial,
    PredicateId::SameColorPair,
    PredicateId::Congruent,
    PredicateId::ColorMax,
    PredicateId::ColorMin,
    PredicateId::Background,
    PredicateId::ContainPixel,
    PredicateId::PixelColor,
];

const CONGRUENT_SCHEMES: &[SchemeId] = &[
    SchemeId::UpdateColor,
    SchemeId::SwapColor,
    SchemeId::CopyColor,
];

const MULTICOLOR_PREDICATES: &[PredicateId] = &[
    PredicateId::NodeSize,
    PredicateId::NodeShape,
    PredicateId::ContainNode,
    PredicateId::PartiallyContainNode,
    PredicateId::NodeSpatial,
    PredicateId::NodeDiagonal,
    PredicateId::SizeMax,
    PredicateId::SizeMin,
    PredicateId::Even,
    PredicateId::Odd,
    PredicateId::Background,
    PredicateId::ContainPixel,
    PredicateId::PixelColor,
];

const MULTICOLOR_SCHEMES: &[SchemeId] = &[
    SchemeId::MoveNode1,
    SchemeId::ExtendNode,
    SchemeId::AddBorder,
    SchemeId::MirrorNode,
    SchemeId::InsertNode,
    SchemeId::HollowNode,
    SchemeId::FillNode,
];

const PIXELS_PREDICATES: &[PredicateId] = &[
    PredicateId::NodeColor,
    PredicateId::Background,
    PredicateId::ColorMost,
    PredicateId::ColorLeast,
    PredicateId::DenoisingColor,
    PredicateId::RightDiagonal,
    PredicateId::LeftDiagonal,
    PredicateId::UpBorder,
    PredicateId::DownBorder,
    PredicateId::LeftBorder,
    PredicateId::RightBorder,
    PredicateId::VerticalMiddle,
    PredicateId::HorizontalMiddle,
    PredicateId::ContainPixel,
    PredicateId::PixelColor,
];

const IMAGE_PREDICATES: &[PredicateId] = &[PredicateId::ContainPixel, PredicateId::PixelColor];

/// Predicate and action-scheme catalog of an abstraction.
pub fn catalog_for(kind: AbstractionKind) -> (Vec<PredicateId>, Vec<SchemeId>) {
    use AbstractionKind::*;
    let (preds, schemes): (&[PredicateId], &[SchemeId]) = match kind {
        Cc4 | Cc4Black | Cc4All | Cc8 | Cc8Black | Cc8All | Vertical | Horizontal | MaxRect => {
            (CC4_PREDICATES, CC4_SCHEMES)
        }
        BgRect => (CC4_PREDICATES, &[SchemeId::UpdateColor]),
        SameColor => (CC4_PREDICATES, CONGRUENT_SCHEMES),
        MultiColor4 | MultiColor8 => (MULTICOLOR_PREDICATES, MULTICOLOR_SCHEMES),
        Pixels => (PIXELS_PREDICATES, &[SchemeId::UpdateColor]),
        Image => (IMAGE_PREDICATES, &[SchemeId::RotateNode, SchemeId::FlipNode]),
        Cc4Spatial | Cc8Spatial => (SPATIAL_PREDICATES, SPATIAL_SCHEMES),
        Cc4Congruent | Cc8Congruent => (CONGRUENT_PREDICATES, CONGRUENT_SCHEMES),
    };
    (preds.to_vec(), schemes.to_vec())
}

/// Which task-level conditions hold across the training pairs. Each firing
/// condition prunes its associated schemes from the domain.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConstraintFlags {
    pub position_unchanged: bool,
    pub color_unchanged: bool,
    pub size_unchanged: bool,
    pub no_unknown_shape: bool,
    pub no_solid_rect: bool,
    pub no_consistent_pattern: bool,
}

const POSITION_PRUNED: &[SchemeId] = &[
    SchemeId::MoveNodeDirection1,
    SchemeId::MoveNodeDirection2,
    SchemeId::MoveNode1,
    SchemeId::MoveNode2,
    SchemeId::ExtendNodeDirection,
    SchemeId::ExtendNode,
    SchemeId::AddBorder,
    SchemeId::InsertNode,
    SchemeId::FillNode,
    SchemeId::MirrorNode,
    SchemeId::RotateNode,
    SchemeId::FlipNode,
];

const SIZE_PRUNED: &[SchemeId] = &[
    SchemeId::InsertNode,
    SchemeId::ExtendNode,
    SchemeId::ExtendNodeDirection,
    SchemeId::AddBorder,
    SchemeId::FillNode,
    SchemeId::HollowNode,
];

/// Evaluate the pruning conditions over (input, output) graph pairs of the
/// training set.
///
/// Positions are unchanged when input and output node pixel-sets coincide
/// exactly; colors (sizes) are unchanged when the color (size) multisets
/// coincide, which also covers nodes that merely moved.
pub fn evaluate_constraints(pairs: &[(AbstractGraph, AbstractGraph)]) -> ConstraintFlags {
    let mut flags = ConstraintFlags {
        position_unchanged: true,
        color_unchanged: true,
        size_unchanged: true,
        no_unknown_shape: true,
        no_solid_rect: true,
        no_consistent_pattern: true,
    };
    let mut common: Option<BTreeSet<(Option<Color>, usize, Shape)>> = None;
    for (input, output) in pairs {
        // A uniform node's position is its pixel set; a multi-colored node
        // additionally carries its cell pattern, so that e.g. rotating the
        // image node counts as a position change.
        let pixel_sets = |g: &AbstractGraph| {
            let mut v: Vec<Vec<(usize, usize, Option<Color>)>> = g
                .active_nodes()
                .map(|n| {
                    let mut cells: Vec<(usize, usize, Option<Color>)> = n
                        .cells
                        .iter()
                        .map(|&(r, c, col)| {
                            (r, c, if n.color.is_some() { None } else { Some(col) })
                        })
                        .collect();
                    cells.sort_unstable();
                    cells
                })
                .collect();
            v.sort();
            v
        };
        if pixel_sets(input) != pixel_sets(output) {
            flags.position_unchanged = false;
        }
        let colors = |g: &AbstractGraph| {
            let mut v: Vec<Option<Color>> = g.active_nodes().map(|n| n.color).collect();
            v.sort();
            v
        };
        if colors(input) != colors(output) {
            flags.color_unchanged = false;
        }
        let sizes = |g: &AbstractGraph| {
            let mut v: Vec<usize> = g.active_nodes().map(|n| n.size()).collect();
            v.sort_unstable();
            v
        };
        if sizes(input) != sizes(output) {
            flags.size_unchanged = false;
        }
        let mut sigs: BTreeSet<(Option<Color>, usize, Shape)> = BTreeSet::new();
        for node in input.active_nodes() {
            let shape = node.shape();
            sigs.insert((node.color, node.size(), shape));
            if shape == Shape::Unknown {
                flags.no_unknown_shape = false;
            }
            if matches!(shape, Shape::Square | Shape::Rectangle) {
                flags.no_solid_rect = false;
            }
        }
        common = Some(match common {
            None => sigs,
            Some(prev) => prev.intersection(&sigs).copied().collect(),
        });
    }
    if let Some(common) = common {
        flags.no_consistent_pattern = common.is_empty();
    }
    flags
}

/// The schemes removed by the firing constraints.
pub fn pruned_schemes(flags: &ConstraintFlags) -> BTreeSet<SchemeId> {
    let mut pruned = BTreeSet::new();
    if flags.position_unchanged {
        pruned.extend(POSITION_PRUNED.iter().copied());
    }
    if flags.color_unchanged {
        pruned.insert(SchemeId::UpdateColor);
    }
    if flags.size_unchanged {
        pruned.extend(SIZE_PRUNED.iter().copied());
    }
    if flags.no_unknown_shape {
        pruned.insert(SchemeId::FillNode);
    }
    if flags.no_solid_rect {
        pruned.insert(SchemeId::HollowNode);
    }
    if flags.no_consistent_pattern {
        pruned.insert(SchemeId::InsertNode);
    }
    pruned
}

pub fn prune_actions(schemes: &[SchemeId], flags: &ConstraintFlags) -> Vec<SchemeId> {
    let pruned = pruned_schemes(flags);
    schemes
        .iter()
        .copied()
        .filter(|s| !pruned.contains(s))
        .collect()
}

/// Constant arguments permitted in generated instructions: colors occurring
/// in every training and test input image, and node sizes occurring in every
/// training and test input graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArgumentWhitelist {
    pub colors: Vec<Color>,
    pub sizes: Vec<usize>,
}

pub fn argument_whitelist(
    input_grids: &[&Grid],
    input_graphs: &[&AbstractGraph],
) -> ArgumentWhitelist {
    let mut colors = Vec::new();
    for color in 0u8..10 {
        if input_grids
            .iter()
            .all(|g| g.iter_cells().any(|(_, _, c)| c == color))
        {
            colors.push(color);
        }
    }
    let mut sizes: BTreeSet<usize> = input_graphs
        .first()
        .map(|g| g.active_nodes().map(|n| n.size()).collect())
        .unwrap_or_default();
    for graph in input_graphs.iter().skip(1) {
        let present: BTreeSet<usize> = graph.active_nodes().map(|n| n.size()).collect();
        sizes = sizes.intersection(&present).copied().collect();
    }
    ArgumentWhitelist {
        colors,
        sizes: sizes.into_iter().collect(),
    }
}

/// Node-attribute predicates are only worth testing when two nodes somewhere
/// in the training and test inputs disagree on the attribute; relation
/// predicates stay eligible whenever the catalog includes them.
pub fn eligible_test_predicates(
    catalog: &[PredicateId],
    input_grids: &[&Grid],
    input_graphs: &[&AbstractGraph],
) -> Vec<PredicateId> {
    let mut colors: BTreeSet<Option<Color>> = BTreeSet::new();
    let mut sizes: BTreeSet<usize> = BTreeSet::new();
    let mut parities: BTreeSet<bool> = BTreeSet::new();
    let mut shapes: BTreeSet<Shape> = BTreeSet::new();
    let mut flag_values: std::collections::BTreeMap<PredicateId, BTreeSet<bool>> =
        Default::default();
    let flag_preds = [
        PredicateId::UpBorder,
        PredicateId::DownBorder,
        PredicateId::LeftBorder,
        PredicateId::RightBorder,
        PredicateId::LeftDiagonal,
        PredicateId::RightDiagonal,
        PredicateId::HorizontalMiddle,
        PredicateId::VerticalMiddle,
        PredicateId::DenoisingColor,
    ];
    for (graph, grid) in input_graphs.iter().zip(input_grids) {
        let flags = abstraction::compute_flags(&graph.nodes, graph.dims, graph.background, grid);
        for (i, node) in graph.nodes.iter().enumerate() {
            if !node.active {
                continue;
            }
            colors.insert(node.color);
            sizes.insert(node.size());
            parities.insert(node.size() % 2 == 1);
            shapes.insert(node.shape());
            for pred in flag_preds {
                let value = match pred {
                    PredicateId::UpBorder => flags.up_border[i],
                    PredicateId::DownBorder => flags.down_border[i],
                    PredicateId::LeftBorder => flags.left_border[i],
                    PredicateId::RightBorder => flags.right_border[i],
                    PredicateId::LeftDiagonal => flags.left_diagonal[i],
                    PredicateId::RightDiagonal => flags.right_diagonal[i],
                    PredicateId::HorizontalMiddle => flags.horizontal_middle[i],
                    PredicateId::VerticalMiddle => flags.vertical_middle[i],
                    PredicateId::DenoisingColor => flags.denoising[i],
                    _ => unreachable!(),
                };
                flag_values.entry(pred).or_default().insert(value);
            }
        }
    }
    catalog
        .iter()
        .copied()
        .filter(|p| p.test_eligible())
        .filter(|p| match p {
            PredicateId::NodeColor
            | PredicateId::ColorMax
            | PredicateId::ColorMin
            | PredicateId::ColorMost
            | PredicateId::ColorLeast => colors.len() > 1,
            PredicateId::NodeSize | PredicateId::SizeMax | PredicateId::SizeMin => sizes.len() > 1,
            PredicateId::Odd | PredicateId::Even => parities.len() > 1,
            PredicateId::NodeShape => shapes.len() > 1,
            PredicateId::UpBorder
            | PredicateId::DownBorder
            | PredicateId::LeftBorder
            | PredicateId::RightBorder
            | PredicateId::LeftDiagonal
            | PredicateId::RightDiagonal
            | PredicateId::HorizontalMiddle
            | PredicateId::VerticalMiddle
            | PredicateId::DenoisingColor => {
                flag_values.get(p).is_some_and(|v| v.len() > 1)
            }
            _ => true,
        })
        .collect()
}

/// The pruned domain for one (task, abstraction) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainModel {
    pub kind: AbstractionKind,
    pub predicates: Vec<PredicateId>,
    pub schemes: Vec<SchemeId>,
    pub test_predicates: Vec<PredicateId>,
    pub whitelist: ArgumentWhitelist,
}

/// One grounded problem: the abstraction of an input grid plus the goal grid.
/// Pointer ranges adapt per instance through the object lists here.
#[derive(Debug, Clone)]
pub struct PlanningInstance {
    pub graph: AbstractGraph,
    pub input: Grid,
    pub goal: Option<Grid>,
    /// Colors occurring in this instance (input plus goal), ascending.
    pub colors: Vec<Color>,
    /// Node sizes occurring in the input graph, ascending.
    pub sizes: Vec<usize>,
}

impl PlanningInstance {
    pub fn new(pair: &TaskInstance, kind: AbstractionKind) -> Self {
        let graph = abstraction::abstract_grid(&pair.input, kind);
        let mut colors: BTreeSet<Color> = pair.input.cells().iter().copied().collect();
        if let Some(goal) = &pair.output {
            colors.extend(goal.cells().iter().copied());
        }
        let sizes: BTreeSet<usize> = graph.active_nodes().map(|n| n.size()).collect();
        PlanningInstance {
            graph,
            input: pair.input.clone(),
            goal: pair.output.clone(),
            colors: colors.into_iter().collect(),
            sizes: sizes.into_iter().collect(),
        }
    }

    pub fn object_count(&self, ty: ObjType) -> usize {
        match ty {
            ObjType::Node => self.graph.nodes.len(),
            ObjType::Pixel => self.graph.dims.0 * self.graph.dims.1,
            ObjType::Color => self.colors.len(),
            ObjType::Size => self.sizes.len(),
            ObjType::Step => 2,
            ObjType::Rotation => 3,
            ObjType::FDirection => 4,
            ObjType::MDirection => 8,
            ObjType::Shape => 8,
        }
    }

    /// The object a pointer of type `ty` with value `idx` denotes.
    pub fn object_at(&self, ty: ObjType, idx: usize) -> ObjectVal {
        match ty {
            ObjType::Node => ObjectVal::Node(idx),
            ObjType::Pixel => {
                let w = self.graph.dims.1;
                ObjectVal::Pixel(idx / w, idx % w)
            }
            ObjType::Color => ObjectVal::Color(self.colors[idx]),
            ObjType::Size => ObjectVal::Size(self.sizes[idx]),
            ObjType::Step => ObjectVal::Step(ALL_STEPS[idx]),
            ObjType::Rotation => ObjectVal::Rotation(ALL_ROTATIONS[idx]),
            ObjType::FDirection => ObjectVal::FDir(ALL_FDIRECTIONS[idx]),
            ObjType::MDirection => ObjectVal::MDir(crate::relations::ALL_MDIRECTIONS[idx]),
            ObjType::Shape => ObjectVal::Shape(crate::shape::ALL_SHAPES[idx]),
        }
    }
}

/// Build the pruned domain and the grounded train/test instances for one
/// abstraction of a task. Fails with [`Error::EmptyDomain`] when every scheme
/// is pruned, in which case the (task, abstraction) pair is skipped.
pub fn build_domain(
    task: &Task,
    kind: AbstractionKind,
) -> Result<(DomainModel, Vec<PlanningInstance>, Vec<PlanningInstance>)> {
    let (predicates, schemes) = catalog_for(kind);
    let pairs: Vec<(AbstractGraph, AbstractGraph)> = task
        .train
        .iter()
        .map(|p| {
            let output = p
                .output
                .as_ref()
                .ok_or_else(|| Error::Validation("training pair without output".into()))?;
            Ok((
                abstraction::abstract_grid(&p.input, kind),
                abstraction::abstract_grid(output, kind),
            ))
        })
        .collect::<Result<_>>()?;
    let flags = evaluate_constraints(&pairs);
    let schemes = prune_actions(&schemes, &flags);
    if schemes.is_empty() {
        return Err(Error::EmptyDomain);
    }

    let train: Vec<PlanningInstance> = task
        .train
        .iter()
        .map(|p| PlanningInstance::new(p, kind))
        .collect();
    let test: Vec<PlanningInstance> = task
        .test
        .iter()
        .map(|p| PlanningInstance::new(p, kind))
        .collect();

    let input_grids: Vec<&Grid> = task
        .train
        .iter()
        .chain(task.test.iter())
        .map(|p| &p.input)
        .collect();
    let input_graphs: Vec<&AbstractGraph> = train
        .iter()
        .chain(test.iter())
        .map(|i| &i.graph)
        .collect();
    let whitelist = argument_whitelist(&input_grids, &input_graphs);
    let test_predicates = eligible_test_predicates(&predicates, &input_grids, &input_graphs);

    let model = DomainModel {
        kind,
        predicates,
        schemes,
        test_predicates,
        whitelist,
    };
    Ok((model, train, test))
}
