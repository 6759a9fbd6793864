//! Task loading, grid values and machine-readable run reports.
//!
//! The on-disk task format is the public ARC JSON layout: a top-level object
//! with `train` and `test` lists of `{"input": [[..]], "output": [[..]]}`
//! pairs, cells being color indices 0-9 on grids of at most 30x30.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_SIDE: usize = 30;
pub const NUM_COLORS: u8 = 10;

pub type Color = u8;

/// An immutable grid of color indices, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    height: usize,
    width: usize,
    cells: Vec<Color>,
}

impl Grid {
    pub fn new(height: usize, width: usize, cells: Vec<Color>) -> Result<Self> {
        if height == 0 || width == 0 || height > MAX_SIDE || width > MAX_SIDE {
            return Err(Error::Validation(format!(
                "grid dimensions {height}x{width} outside 1..={MAX_SIDE}"
            )));
        }
        if cells.len() != height * width {
            return Err(Error::Validation(format!(
                "expected {} cells, got {}",
                height * width,
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|&&c| c >= NUM_COLORS) {
            return Err(Error::Validation(format!("cell value {bad} outside 0..=9")));
        }
        Ok(Grid { height, width, cells })
    }

    pub fn filled(height: usize, width: usize, color: Color) -> Self {
        Grid::new(height, width, vec![color; height * width]).expect("valid fill dims")
    }

    pub fn from_rows(rows: &[Vec<Color>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Validation("ragged grid rows".into()));
        }
        Grid::new(height, width, rows.concat())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn get(&self, row: usize, col: usize) -> Color {
        debug_assert!(row < self.height && col < self.width);
        self.cells[row * self.width + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, color: Color) {
        self.cells[row * self.width + col] = color;
    }

    pub fn cells(&self) -> &[Color] {
        &self.cells
    }

    /// Iterate cells as `(row, col, color)` in raster order.
    pub fn iter_cells(&self) -> impl Iterator<Item = (usize, usize, Color)> + '_ {
        (0..self.height).flat_map(move |r| (0..self.width).map(move |c| (r, c, self.get(r, c))))
    }

    pub fn to_rows(&self) -> Vec<Vec<Color>> {
        (0..self.height)
            .map(|r| self.cells[r * self.width..(r + 1) * self.width].to_vec())
            .collect()
    }
}

/// Exact cell-by-cell grid equality, the goal test of the whole system.
pub fn grids_equal(a: &Grid, b: &Grid) -> bool {
    a.height == b.height && a.width == b.width && a.cells == b.cells
}

/// One input/output pair. `output` is absent only for unlabeled test pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskInstance {
    pub input: Grid,
    pub output: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: String,
    pub train: Vec<TaskInstance>,
    pub test: Vec<TaskInstance>,
}

#[derive(Deserialize, Serialize)]
struct RawPair {
    input: Vec<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<Vec<Vec<u8>>>,
}

#[derive(Deserialize, Serialize)]
struct RawTask {
    train: Vec<RawPair>,
    test: Vec<RawPair>,
}

fn pair_from_raw(raw: &RawPair, require_output: bool) -> Result<TaskInstance> {
    let input = Grid::from_rows(&raw.input)?;
    let output = match &raw.output {
        Some(rows) => Some(Grid::from_rows(rows)?),
        None if require_output => {
            return Err(Error::Validation("training pair without output".into()))
        }
        None => None,
    };
    Ok(TaskInstance { input, output })
}

pub fn task_from_json(id: &str, text: &str) -> Result<Task> {
    let raw: RawTask = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if raw.train.is_empty() {
        return Err(Error::Validation("task has an empty train list".into()));
    }
    if raw.test.is_empty() {
        return Err(Error::Validation("task has an empty test list".into()));
    }
    let train = raw
        .train
        .iter()
        .map(|p| pair_from_raw(p, true))
        .collect::<Result<Vec<_>>>()?;
    let test = raw
        .test
        .iter()
        .map(|p| pair_from_raw(p, false))
        .collect::<Result<Vec<_>>>()?;
    Ok(Task { id: id.to_string(), train, test })
}

pub fn task_to_json(task: &Task) -> String {
    let raw = RawTask {
        train: task
            .train
            .iter()
            .map(|p| RawPair {
                input: p.input.to_rows(),
                output: p.output.as_ref().map(Grid::to_rows),
            })
            .collect(),
        test: task
            .test
            .iter()
            .map(|p| RawPair {
                input: p.input.to_rows(),
                output: p.output.as_ref().map(Grid::to_rows),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("task serialization")
}

/// Load a task file; the task id is the file stem.
pub fn load_task(path: &Path) -> Result<Task> {
    let text = std::fs::read_to_string(path)?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "task".to_string());
    task_from_json(&id, &text)
}

/// Per-task outcome record written to the run report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub id: String,
    pub solved_train: bool,
    pub solved_test: bool,
    /// Abstraction name of the solving configuration, when solved.
    pub abstraction: Option<String>,
    /// Pointer list of the solving configuration, as `name:type` strings.
    pub pointers: Vec<String>,
    pub lines: Option<usize>,
    pub novelty: Option<usize>,
    /// Programs generated and evaluated across all attempted configurations.
    pub expanded: u64,
    pub wall_ms: u64,
    /// Pretty-printed solution program, replayable via the CLI.
    pub program: Option<String>,
}

impl TaskReport {
    pub fn unsolved(id: &str, expanded: u64, wall_ms: u64) -> Self {
        TaskReport {
            id: id.to_string(),
            solved_train: false,
            solved_test: false,
            abstraction: None,
            pointers: Vec::new(),
            lines: None,
            novelty: None,
            expanded,
            wall_ms,
            program: None,
        }
    }

    /// A task can only count as solved in testing if training was solved.
    pub fn normalize(mut self) -> Self {
        if !self.solved_train {
            self.solved_test = false;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tasks: Vec<TaskReport>,
}

pub fn report_to_json(records: &[TaskReport]) -> String {
    let report = RunReport {
        tasks: records.iter().cloned().map(TaskReport::normalize).collect(),
    };
    serde_json::to_string_pretty(&report).expect("report serialization")
}

pub fn write_report(records: &[TaskReport], path: &Path) -> Result<()> {
    std::fs::write(path, report_to_json(records))?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_task_parses() {
        let text = r#"{"train":[{"input":[[0]],"output":[[1]]}],"test":[{"input":[[0]],"output":[[1]]}]}"#;
        let task = task_from_json("t", text).unwrap();
        assert_eq!(task.train.len(), 1);
        assert_eq!(task.test.len(), 1);
        assert_eq!(task.train[0].input.dims(), (1, 1));
        assert_eq!(task.train[0].output.as_ref().unwrap().get(0, 0), 1);
    }

    #[test]
    fn out_of_range_cell_rejected() {
        let text = r#"{"train":[{"input":[[10]],"output":[[1]]}],"test":[{"input":[[0]],"output":[[1]]}]}"#;
        match task_from_json("t", text) {
            Err(Error::Validation(_)) => {}
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn oversized_grid_rejected() {
        let rows = vec![vec![0u8; 31]; 2];
        assert!(Grid::from_rows(&rows).is_err());
        let rows = vec![vec![0u8; 2]; 31];
        assert!(Grid::from_rows(&rows).is_err());
    }

    #[test]
    fn empty_train_rejected() {
        let text = r#"{"train":[],"test":[{"input":[[0]]}]}"#;
        assert!(matches!(task_from_json("t", text), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(task_from_json("t", "{nope"), Err(Error::Parse(_))));
    }

    #[test]
    fn task_round_trips_through_json() {
        let text = r#"{"train":[{"input":[[0,1],[2,3]],"output":[[1,1],[1,1]]}],"test":[{"input":[[4]]}]}"#;
        let task = task_from_json("t", text).unwrap();
        let again = task_from_json("t", &task_to_json(&task)).unwrap();
        assert_eq!(task, again);
    }

    #[test]
    fn grids_equal_basics() {
        let g = Grid::from_rows(&[vec![0]]).unwrap();
        let h = Grid::from_rows(&[vec![1]]).unwrap();
        assert!(grids_equal(&g, &g));
        assert!(!grids_equal(&g, &h));
    }

    #[test]
    fn grids_equal_matches_cellwise_loop() {
        // Brute-force comparison oracle on random 10x10 pairs.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a: Vec<u8> = (0..100).map(|_| rng.gen_range(0..10)).collect();
            let b: Vec<u8> = if rng.gen_bool(0.5) {
                a.clone()
            } else {
                (0..100).map(|_| rng.gen_range(0..10)).collect()
            };
            let ga = Grid::new(10, 10, a.clone()).unwrap();
            let gb = Grid::new(10, 10, b.clone()).unwrap();
            let mut naive = true;
            for r in 0..10 {
                for c in 0..10 {
                    if a[r * 10 + c] != b[r * 10 + c] {
                        naive = false;
                    }
                }
            }
            assert_eq!(grids_equal(&ga, &gb), naive);
        }
    }

    proptest! {
        #[test]
        fn grids_equal_is_an_equivalence(
            rows in proptest::collection::vec(proptest::collection::vec(0u8..10, 1..6), 1..6),
            rows2 in proptest::collection::vec(proptest::collection::vec(0u8..10, 1..6), 1..6),
            rows3 in proptest::collection::vec(proptest::collection::vec(0u8..10, 1..6), 1..6),
        ) {
            let fix = |rs: Vec<Vec<u8>>| {
                let w = rs[0].len();
                let rs: Vec<Vec<u8>> = rs.into_iter().map(|mut r| { r.resize(w, 0); r }).collect();
                Grid::from_rows(&rs).unwrap()
            };
            let a = fix(rows);
            let b = fix(rows2);
            let c = fix(rows3);
            prop_assert!(grids_equal(&a, &a));
            prop_assert_eq!(grids_equal(&a, &b), grids_equal(&b, &a));
            if grids_equal(&a, &b) && grids_equal(&b, &c) {
                prop_assert!(grids_equal(&a, &c));
            }
        }
    }

    #[test]
    fn report_empty_and_round_trip() {
        let json = report_to_json(&[]);
        let parsed: RunReport = serde_json::from_str(&json).unwrap();
        assert!(parsed.tasks.is_empty());

        let rec = TaskReport {
            id: "x".into(),
            solved_train: true,
            solved_test: true,
            abstraction: Some("cc4".into()),
            pointers: vec!["no1:node".into()],
            lines: Some(3),
            novelty: Some(1),
            expanded: 42,
            wall_ms: 5,
            program: Some("0. end".into()),
        };
        let json = report_to_json(std::slice::from_ref(&rec));
        let parsed: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.tasks, vec![rec]);
    }

    #[test]
    fn unsolved_train_forces_unsolved_test() {
        let mut rec = TaskReport::unsolved("x", 0, 0);
        rec.solved_test = true;
        assert!(!rec.normalize().solved_test);
    }
}
