//! JSON instance and schedule files.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_execution_graph, Allocation, ExecutionGraph, Task};
use crate::schedule::{Segment, SpeedProfile, TaskRun};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub precedence: Vec<(String, String)>,
    pub allocation: Vec<ProcessorOrder>,
    pub deadline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessorOrder {
    /// Any JSON label; only the order matters.
    pub processor: serde_json::Value,
    pub order: Vec<String>,
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("instance: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances always serialize")
    }

    pub fn to_graph(&self) -> Result<ExecutionGraph> {
        let allocation = Allocation::new(self.allocation.iter().map(|p| p.order.clone()).collect());
        build_execution_graph(self.tasks.clone(), &self.precedence, &allocation, self.deadline)
    }

    /// Every task on its own processor; the graph's edges become precedence.
    pub fn from_graph(graph: &ExecutionGraph) -> Self {
        Self {
            tasks: graph.tasks().to_vec(),
            precedence: graph
                .edges()
                .iter()
                .map(|&(u, v)| (graph.id(u).to_string(), graph.id(v).to_string()))
                .collect(),
            allocation: graph
                .tasks()
                .iter()
                .enumerate()
                .map(|(p, t)| ProcessorOrder {
                    processor: p.into(),
                    order: vec![t.id.clone()],
                })
                .collect(),
            deadline: graph.deadline(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileJson {
    Constant(f64),
    /// `[speed, duration]` pairs.
    Segments(Vec<(f64, f64)>),
}

impl From<&SpeedProfile> for ProfileJson {
    fn from(p: &SpeedProfile) -> Self {
        match p {
            SpeedProfile::Constant(s) => ProfileJson::Constant(*s),
            SpeedProfile::Segments(segs) => ProfileJson::Segments(segs.iter().map(|g| (g.speed, g.duration)).collect()),
        }
    }
}

impl From<ProfileJson> for SpeedProfile {
    fn from(p: ProfileJson) -> Self {
        match p {
            ProfileJson::Constant(s) => SpeedProfile::Constant(s),
            ProfileJson::Segments(segs) => SpeedProfile::Segments(
                segs.into_iter()
                    .map(|(speed, duration)| Segment { speed, duration })
                    .collect(),
            ),
        }
    }
}

/// One task of a schedule file. The profile may also be given inline as a
/// top-level `"constant"` or `"segments"` key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
}

impl ScheduleEntry {
    fn profile(&self) -> Result<SpeedProfile> {
        let given = [
            self.profile.clone(),
            self.constant.map(ProfileJson::Constant),
            self.segments.clone().map(ProfileJson::Segments),
        ];
        let mut given = given.into_iter().flatten();
        match (given.next(), given.next()) {
            (Some(p), None) => Ok(p.into()),
            (None, _) => Err(Error::InvalidInput(format!("task {:?} has no profile", self.id))),
            (Some(_), Some(_)) => Err(Error::InvalidInput(format!("task {:?} has several profiles", self.id))),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScheduleFile {
    Bare(Vec<ScheduleEntry>),
    Wrapped { schedule: Vec<ScheduleEntry> },
}

/// Profiles and optional start times, indexed like the graph's tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSchedule {
    pub profiles: Vec<SpeedProfile>,
    pub starts: Vec<Option<f64>>,
}

/// Reads a schedule given as an array of entries, or as an object whose
/// `"schedule"` key holds that array (as in solver reports).
pub fn parse_schedule(text: &str, graph: &ExecutionGraph) -> Result<ParsedSchedule> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("schedule: {e}")))?;
    let entries = match serde_json::from_value(value) {
        Ok(ScheduleFile::Bare(v)) | Ok(ScheduleFile::Wrapped { schedule: v }) => v,
        Err(e) => return Err(Error::InvalidInput(format!("schedule: {e}"))),
    };
    let mut slots: Vec<Option<(SpeedProfile, Option<f64>)>> = vec![None; graph.len()];
    for entry in &entries {
        let i = graph
            .index_of(&entry.id)
            .ok_or_else(|| Error::InvalidInput(format!("schedule names unknown task {:?}", entry.id)))?;
        if slots[i].is_some() {
            return Err(Error::InvalidInput(format!("task {:?} is scheduled twice", entry.id)));
        }
        slots[i] = Some((entry.profile()?, entry.start));
    }
    let mut profiles = Vec::with_capacity(graph.len());
    let mut starts = Vec::with_capacity(graph.len());
    for (i, slot) in slots.into_iter().enumerate() {
        let (p, s) = slot.ok_or_else(|| Error::InvalidInput(format!("task {:?} is not scheduled", graph.id(i))))?;
        profiles.push(p);
        starts.push(s);
    }
    Ok(ParsedSchedule { profiles, starts })
}

/// Schedule entries for timed runs, with the profile under `"profile"`.
pub fn schedule_entries(graph: &ExecutionGraph, runs: &[TaskRun]) -> Vec<ScheduleEntry> {
    runs.iter()
        .enumerate()
        .map(|(i, r)| ScheduleEntry {
            id: graph.id(i).to_string(),
            profile: Some((&r.profile).into()),
            constant: None,
            segments: None,
            start: Some(r.start),
        })
        .collect()
}
