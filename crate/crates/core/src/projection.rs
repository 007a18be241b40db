//! Temporal projection of a state through actions.
//!
//! The preceding state's nodes are renamed into slice 0 (`name@0`). Each
//! projected action appends a slice: its effect nodes get fresh copies whose
//! tables come from the action model, with qualifying parents attached to the
//! most recent copy of each distinction. Indirect effects (descendants of the
//! direct effects) are copied too; everything else persists and is shared
//! with earlier slices rather than copied.
//!
//! Two variants differ only in where indirect effects come from:
//! [`project_original`] takes descendants and tables from the preceding state
//! network, [`project_modified`] takes them from the environment model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::action::{check_compatibility, ActionModel, EnvironmentModel, EFFECT_MARK};
use crate::error::{Error, Result};
use crate::graph::{d_separated, descendants};
use crate::model::{BeliefNetwork, Cpt, Distinction};
use crate::surgery::remove_nodes;

pub const SLICE_MARK: char = '@';

/// Base names must not contain the slice or effect markers.
pub(crate) fn check_base_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains(SLICE_MARK) || name.contains(EFFECT_MARK) {
        Err(Error::InvalidName(name.to_string()))
    } else {
        Ok(())
    }
}

/// A distinction's copy in a given time slice, rendered `base@slice`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimedName {
    pub base: String,
    pub slice: usize,
}

impl TimedName {
    pub fn new(base: impl Into<String>, slice: usize) -> Self {
        Self {
            base: base.into(),
            slice,
        }
    }
}

impl fmt::Display for TimedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{SLICE_MARK}{}", self.base, self.slice)
    }
}

impl FromStr for TimedName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (base, slice) = s
            .rsplit_once(SLICE_MARK)
            .ok_or_else(|| Error::InvalidName(s.to_string()))?;
        check_base_name(base)?;
        let slice = slice.parse().map_err(|_| Error::InvalidName(s.to_string()))?;
        Ok(Self::new(base, slice))
    }
}

/// What one projected action did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepSummary {
    pub action: String,
    /// Slice the action was applied to; its copies live in `from_slice + 1`.
    pub from_slice: usize,
    pub qual: BTreeSet<String>,
    pub direct_effects: BTreeSet<String>,
    pub indirect_effects: BTreeSet<String>,
    pub persisted: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    combined: BeliefNetwork,
    /// `slices[t]` maps every base name to its most recent copy as of slice `t`.
    slices: Vec<BTreeMap<String, TimedName>>,
    steps: Vec<StepSummary>,
}

impl ProjectionResult {
    /// Slice-0 lift of a preceding state; no actions applied yet.
    pub fn initial(state: &BeliefNetwork) -> Result<Self> {
        let report = state.validate();
        if !report.is_valid() {
            return Err(Error::Invalid(report));
        }
        for n in state.names() {
            check_base_name(n)?;
        }
        let combined = state.map_names(|n| TimedName::new(n, 0).to_string());
        let slice0 = state
            .names()
            .map(|n| (n.to_string(), TimedName::new(n, 0)))
            .collect();
        Ok(Self {
            combined,
            slices: vec![slice0],
            steps: Vec::new(),
        })
    }

    /// The combined multi-slice network.
    pub fn combined(&self) -> &BeliefNetwork {
        &self.combined
    }

    pub fn latest_slice(&self) -> usize {
        self.slices.len() - 1
    }

    /// Most recent copy of every base name.
    pub fn latest(&self) -> &BTreeMap<String, TimedName> {
        self.slices.last().expect("at least slice 0")
    }

    pub fn slice_map(&self, slice: usize) -> Option<&BTreeMap<String, TimedName>> {
        self.slices.get(slice)
    }

    pub fn steps(&self) -> &[StepSummary] {
        &self.steps
    }

    /// Base names of the ontology.
    pub fn bases(&self) -> BTreeSet<String> {
        self.latest().keys().cloned().collect()
    }

    /// Direct effects of the last action (empty before any action).
    pub fn direct_effects(&self) -> BTreeSet<String> {
        self.steps.last().map(|s| s.direct_effects.clone()).unwrap_or_default()
    }

    /// Indirect effects of the last action.
    pub fn indirect_effects(&self) -> BTreeSet<String> {
        self.steps.last().map(|s| s.indirect_effects.clone()).unwrap_or_default()
    }

    /// Distinctions the last action left untouched (all of them before any action).
    pub fn persisted(&self) -> BTreeSet<String> {
        self.steps
            .last()
            .map(|s| s.persisted.clone())
            .unwrap_or_else(|| self.bases())
    }

    /// Name in the combined network of the most recent copy of `base`.
    pub fn latest_name(&self, base: &str) -> Result<String> {
        self.latest()
            .get(base)
            .map(ToString::to_string)
            .ok_or_else(|| Error::UnknownNode(base.to_string()))
    }

    fn latest_distinction(&self, base: &str) -> Option<&Distinction> {
        let timed = self.latest().get(base)?;
        self.combined.distinction(&timed.to_string()).ok()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProjectionOptions {
    /// Accept actions whose effects are bound in the environment model; the
    /// action's table then takes priority for those effects.
    pub allow_incompatible: bool,
    /// Copy persisted distinctions into each new slice as identity tables
    /// instead of sharing the earlier copy.
    pub materialize_persisted: bool,
}

enum IndirectSource<'a> {
    State(&'a BeliefNetwork),
    Environment(&'a EnvironmentModel),
}

fn identity_rows(card: usize) -> Vec<Vec<f64>> {
    (0..card)
        .map(|i| (0..card).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn project_step(
    mut pr: ProjectionResult,
    action: &ActionModel,
    source: IndirectSource<'_>,
    opts: ProjectionOptions,
) -> Result<ProjectionResult> {
    action.check_ontology(|n| pr.latest_distinction(n))?;

    let from = pr.latest_slice();
    let to = from + 1;
    let prev = pr.latest().clone();
    let mut next = prev.clone();

    let direct = action.eff();
    for e in &direct {
        next.insert(e.clone(), TimedName::new(e.clone(), to));
    }

    let mut indirect = BTreeSet::new();
    match &source {
        IndirectSource::State(state) => {
            for f in &direct {
                indirect.extend(descendants(state, f)?);
            }
        }
        IndirectSource::Environment(v) => {
            let ontology: Vec<Distinction> = pr
                .latest()
                .keys()
                .filter_map(|b| pr.latest_distinction(b).map(|d| d.renamed(b.clone())))
                .collect();
            crate::cbn::same_distinctions(v.ontology(), ontology.iter())?;
            let report = check_compatibility(action, v)?;
            if !report.compatible && !opts.allow_incompatible {
                return Err(Error::Incompatible {
                    action: action.name().to_string(),
                    bound_effects: report.bound_effects,
                });
            }
            let structure = v.cbn().structure();
            for f in &direct {
                indirect.extend(descendants(&structure, f)?);
            }
        }
    }
    for f in &direct {
        indirect.remove(f);
    }
    for k in &indirect {
        next.insert(k.clone(), TimedName::new(k.clone(), to));
    }

    // Effect copies: tables from the action, qual parents on the preceding slice.
    for e in &direct {
        let cpt = action.cbn().cpt(&crate::action::effect_name(e))?;
        let parents = cpt
            .parents
            .iter()
            .map(|p| match p.strip_suffix(EFFECT_MARK) {
                Some(base) => TimedName::new(base, to).to_string(),
                None => prev[p].to_string(),
            })
            .collect();
        let name = next[e].to_string();
        let domain = pr.latest_distinction(e).expect("ontology checked").renamed(&name);
        pr.combined.insert_node(domain, Cpt::new(name, parents, cpt.rows.clone()));
    }

    // Indirect copies: tables from the state or the environment model, each
    // parent attached to its most recent copy.
    for k in &indirect {
        let cpt = match &source {
            IndirectSource::State(state) => state.cpt(k)?,
            IndirectSource::Environment(v) => v.cbn().cpt(k)?,
        };
        let parents = cpt
            .parents
            .iter()
            .map(|p| {
                next.get(p)
                    .map(ToString::to_string)
                    .ok_or_else(|| Error::UnknownNode(p.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let name = next[k].to_string();
        let domain = pr.latest_distinction(k).expect("known base").renamed(&name);
        pr.combined.insert_node(domain, Cpt::new(name, parents, cpt.rows.clone()));
    }

    let persisted: BTreeSet<String> = prev
        .keys()
        .filter(|b| !direct.contains(*b) && !indirect.contains(*b))
        .cloned()
        .collect();
    if opts.materialize_persisted {
        for p in &persisted {
            let copy = TimedName::new(p.clone(), to);
            let d = pr.latest_distinction(p).expect("known base").renamed(copy.to_string());
            let rows = identity_rows(d.card());
            pr.combined
                .insert_node(d, Cpt::new(copy.to_string(), vec![prev[p].to_string()], rows));
            next.insert(p.clone(), copy);
        }
    }

    pr.steps.push(StepSummary {
        action: action.name().to_string(),
        from_slice: from,
        qual: action.qual(),
        direct_effects: direct,
        indirect_effects: indirect,
        persisted,
    });
    pr.slices.push(next);
    Ok(pr)
}

/// Projection with indirect effects taken from the preceding state network.
pub fn project_original(state: &BeliefNetwork, action: &ActionModel) -> Result<ProjectionResult> {
    project_original_with(state, action, ProjectionOptions::default())
}

pub fn project_original_with(
    state: &BeliefNetwork,
    action: &ActionModel,
    opts: ProjectionOptions,
) -> Result<ProjectionResult> {
    let pr = ProjectionResult::initial(state)?;
    project_step(pr, action, IndirectSource::State(state), opts)
}

/// Projection with indirect effects taken from the environment model.
/// Incompatible actions are rejected unless `allow_incompatible` is set.
pub fn project_modified(
    state: &BeliefNetwork,
    action: &ActionModel,
    env: &EnvironmentModel,
) -> Result<ProjectionResult> {
    project_modified_with(state, action, env, ProjectionOptions::default())
}

pub fn project_modified_with(
    state: &BeliefNetwork,
    action: &ActionModel,
    env: &EnvironmentModel,
    opts: ProjectionOptions,
) -> Result<ProjectionResult> {
    let pr = ProjectionResult::initial(state)?;
    project_step(pr, action, IndirectSource::Environment(env), opts)
}

/// Folds [`project_modified`] over `actions`, one slice per action, without
/// intermediate extraction.
pub fn project_sequence(
    state: &BeliefNetwork,
    actions: &[ActionModel],
    env: &EnvironmentModel,
) -> Result<ProjectionResult> {
    project_sequence_with(state, actions, env, ProjectionOptions::default())
}

pub fn project_sequence_with(
    state: &BeliefNetwork,
    actions: &[ActionModel],
    env: &EnvironmentModel,
    opts: ProjectionOptions,
) -> Result<ProjectionResult> {
    let mut pr = ProjectionResult::initial(state)?;
    for (index, action) in actions.iter().enumerate() {
        pr = project_step(pr, action, IndirectSource::Environment(env), opts).map_err(|e| {
            Error::SequenceStep {
                index,
                action: action.name().to_string(),
                source: Box::new(e),
            }
        })?;
    }
    Ok(pr)
}

/// The succeeding state: every stale copy is marginalized out of the
/// combined network and the surviving copies take their bare names.
pub fn extract_successor(pr: &ProjectionResult) -> Result<BeliefNetwork> {
    let current: BTreeSet<String> = pr.latest().values().map(ToString::to_string).collect();
    let stale: Vec<&str> = pr
        .combined
        .names()
        .filter(|n| !current.contains(*n))
        .collect();
    let reduced = remove_nodes(&pr.combined, &stale)?;
    let renamed = reduced.map_names(|n| {
        n.parse::<TimedName>()
            .map(|t| t.base)
            .unwrap_or_else(|_| n.to_string())
    });
    renamed.checked()
}

/// Whether the effect copies of step `step` are d-separated from the other
/// preceding-state nodes by the qualifying nodes, in the combined network.
pub fn qual_screens_effects(pr: &ProjectionResult, step: usize) -> Result<bool> {
    let summary = pr
        .steps
        .get(step)
        .ok_or_else(|| Error::NameMismatch(format!("no projection step {step}")))?;
    let before = &pr.slices[summary.from_slice];
    let z: Vec<String> = summary.qual.iter().map(|q| before[q].to_string()).collect();
    let x: Vec<String> = summary
        .direct_effects
        .iter()
        .map(|e| TimedName::new(e.clone(), summary.from_slice + 1).to_string())
        .collect();
    let y: Vec<String> = before
        .values()
        .map(ToString::to_string)
        .filter(|n| !z.contains(n))
        .collect();
    if x.is_empty() || y.is_empty() {
        return Ok(true);
    }
    d_separated(&pr.combined, &x, &y, &z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timed_name_round_trip() {
        let t = TimedName::new("alarm", 3);
        assert_eq!(t.to_string(), "alarm@3");
        assert_eq!("alarm@3".parse::<TimedName>().unwrap(), t);
        assert!("alarm".parse::<TimedName>().is_err());
        assert!("a@b@1".parse::<TimedName>().is_err());
        assert!("alarm@x".parse::<TimedName>().is_err());
    }

    #[test]
    fn base_names_reject_markers() {
        assert!(check_base_name("ok_name").is_ok());
        assert!(check_base_name("x@1").is_err());
        assert!(check_base_name("x'").is_err());
        assert!(check_base_name("").is_err());
    }
}
