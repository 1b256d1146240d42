//! All seven stages in one call, plus the artifact layout.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::ccf::{ccf_csv, detect_ccf_groups, inject_ccf_events, CcfError, CcfGroup};
use crate::cutsets::{cutsets_csv, minimal_cut_sets, CutSetCollection, CutSetError};
use crate::dsl::{parse_model_named, ParseError};
use crate::ftree::{
    branch_census, export_ft, integrate_software, synthesize_hardware_ft, BranchCensus, FaultTree, FtError,
    SynthOptions,
};
use crate::model::{expand_replication, validate_model, ModelError, SystemModel, ValidationReport};
use crate::report::{generate_guidance, render_summary_md, render_summary_text, GuidanceReport};
use crate::stpa::{
    apply_applicability, enumerate_candidates, extract_control_structure, traceability_csv, ControlStructure,
    StpaError, UcaUifInstance,
};

/// Files written by [`write_artifacts`], in write order.
pub const ARTIFACT_FILES: [&str; 6] =
    ["ft.json", "cutsets.csv", "ccf.csv", "traceability.csv", "summary.md", "summary.txt"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PipelineOptions {
    pub include_hw_design: bool,
    pub max_order: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    /// The model after replication expansion.
    pub model: SystemModel,
    pub hardware_ft: FaultTree,
    pub census: BranchCensus,
    pub control_structure: ControlStructure,
    /// Every failure-mode candidate before applicability filtering.
    pub candidates: Vec<UcaUifInstance>,
    pub instances: Vec<UcaUifInstance>,
    pub integrated_ft: FaultTree,
    pub groups: Vec<CcfGroup>,
    pub final_ft: FaultTree,
    pub cutsets: CutSetCollection,
    pub guidance: GuidanceReport,
}

#[derive(Debug)]
pub enum PipelineError {
    Parse(ParseError),
    Invalid(ValidationReport),
    Expand(ModelError),
    Tree(FtError),
    Stpa(StpaError),
    Ccf(CcfError),
    CutSets(CutSetError),
}

impl PipelineError {
    /// 1 for validation problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Invalid(_) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Parse(e) => write!(f, "parse error: {e}"),
            PipelineError::Invalid(r) => {
                write!(f, "model has {} violation(s):", r.len())?;
                for v in &r.violations {
                    write!(f, "\n  {v}")?;
                }
                Ok(())
            }
            PipelineError::Expand(e) => write!(f, "replication: {e}"),
            PipelineError::Tree(e) => write!(f, "fault tree: {e}"),
            PipelineError::Stpa(e) => write!(f, "stpa: {e}"),
            PipelineError::Ccf(e) => write!(f, "ccf: {e}"),
            PipelineError::CutSets(e) => write!(f, "cut sets: {e}"),
        }
    }
}

impl std::error::Error for PipelineError {}

macro_rules! from_error {
    ($($variant:ident($ty:ty)),*) => {
        $(impl From<$ty> for PipelineError {
            fn from(e: $ty) -> Self {
                PipelineError::$variant(e)
            }
        })*
    };
}

from_error!(Parse(ParseError), Expand(ModelError), Tree(FtError), Stpa(StpaError), Ccf(CcfError), CutSets(CutSetError));

/// Parses `text` (reported as `file` in spans) and runs every stage.
pub fn run_pipeline(text: &str, file: &str, options: PipelineOptions) -> Result<PipelineRun, PipelineError> {
    let model = parse_model_named(text, file)?;
    run_model(&model, options)
}

pub fn run_model(model: &SystemModel, options: PipelineOptions) -> Result<PipelineRun, PipelineError> {
    let report = validate_model(model);
    if !report.is_empty() {
        return Err(PipelineError::Invalid(report));
    }
    let model = expand_replication(model)?;
    let hardware_ft = synthesize_hardware_ft(&model, SynthOptions { include_hw_design: options.include_hw_design })?;
    let census = branch_census(&hardware_ft);
    let control_structure = extract_control_structure(&model);
    let candidates = enumerate_candidates(&control_structure);
    let instances = apply_applicability(&candidates, &model)?;
    let integrated_ft = integrate_software(&hardware_ft, &instances)?;
    let groups = detect_ccf_groups(&integrated_ft, &model, &instances);
    let final_ft = inject_ccf_events(&integrated_ft, &groups)?;
    let cutsets = minimal_cut_sets(&final_ft, options.max_order)?;
    let guidance = generate_guidance(&groups, &cutsets, &model);
    Ok(PipelineRun {
        model,
        hardware_ft,
        census,
        control_structure,
        candidates,
        instances,
        integrated_ft,
        groups,
        final_ft,
        cutsets,
        guidance,
    })
}

/// Artifact file names paired with their contents, in [`ARTIFACT_FILES`]
/// order.
pub fn artifacts(run: &PipelineRun) -> Vec<(&'static str, String)> {
    let contents = [
        export_ft(&run.final_ft),
        cutsets_csv(&run.cutsets),
        ccf_csv(&run.groups),
        traceability_csv(&run.instances, &run.model),
        render_summary_md(run),
        render_summary_text(run),
    ];
    ARTIFACT_FILES.into_iter().zip(contents).collect()
}

/// Writes every artifact under `dir`, creating it if needed.
pub fn write_artifacts(run: &PipelineRun, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, body) in artifacts(run) {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
