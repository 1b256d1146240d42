//! `resha`: run the hazard-analysis stages from the command line.
//!
//! Every stage reads the model file plus, where it needs them, the JSON
//! artifacts of earlier stages, so the pipeline can be scripted piecewise:
//!
//! ```text
//! resha stpa model.resha --format json > instances.json
//! resha synth model.resha > hw.json
//! resha integrate model.resha --ft hw.json --instances instances.json > int.json
//! resha ccf model.resha --ft int.json --instances instances.json --out-dir out/
//! resha cutsets --ft out/ft.json --max-order 2
//! ```
//!
//! Exit status: 0 on success, 1 when the model violates an invariant, 2 on
//! parse, I/O or internal errors.

use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use resha_core::casestudy::{compare, parse_golden};
use resha_core::ccf::{ccf_csv, ccf_json, detect_ccf_groups, inject_ccf_events, CcfGroup};
use resha_core::cutsets::{cutsets_csv, cutsets_json, first_order_cut_sets, minimal_cut_sets};
use resha_core::dsl::parse_model_named;
use resha_core::ftree::{
    branch_census, export_ft, import_ft, integrate_software, synthesize_hardware_ft, FaultTree, SynthOptions,
};
use resha_core::model::{expand_replication, validate_model, SystemModel};
use resha_core::pipeline::{run_model, write_artifacts, PipelineError, PipelineOptions, PipelineRun};
use resha_core::report::{guidance_json, render_summary_md, render_summary_text};
use resha_core::stpa::{applicable_instances, traceability_csv, UcaUifInstance};

#[derive(Parser)]
#[command(name = "resha", version, about = "Redundancy-guided systems-theoretic hazard analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Md,
    Txt,
}

#[derive(clap::Args)]
struct Common {
    /// Write output files here instead of printing to standard output.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Add a hardware design-failure event to every component.
    #[arg(long)]
    include_hw_design: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model against every invariant.
    Validate { model: PathBuf },
    /// Enumerate applicable unsafe control actions and information flows.
    Stpa {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Synthesize the hardware fault tree and print its branch census.
    Synth {
        model: PathBuf,
        /// Print the branch census instead of the tree.
        #[arg(long)]
        census: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Hang failure-mode events under the software branches of a tree.
    Integrate {
        model: PathBuf,
        /// Hardware tree from `synth`; synthesized on the fly when omitted.
        #[arg(long, value_name = "FILE")]
        ft: Option<PathBuf>,
        /// Instances from `stpa --format json`; enumerated when omitted.
        #[arg(long, value_name = "FILE")]
        instances: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Detect common-cause failure groups and inject their events.
    Ccf {
        model: PathBuf,
        /// Integrated tree from `integrate`; rebuilt when omitted.
        #[arg(long, value_name = "FILE")]
        ft: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        instances: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Minimal cut sets of a tree, or of a model's fully integrated tree.
    Cutsets {
        /// Model to run through every earlier stage. Ignored with `--ft`.
        model: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        ft: Option<PathBuf>,
        /// Drop cut sets larger than this.
        #[arg(long, value_name = "K")]
        max_order: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Guidance report and stage summary.
    Report {
        model: PathBuf,
        #[arg(long, value_name = "K")]
        max_order: Option<usize>,
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Run every stage and write all artifacts.
    Pipeline {
        model: PathBuf,
        #[arg(long, value_name = "K")]
        max_order: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare a model's results with a golden record.
    Golden { model: PathBuf, golden: PathBuf },
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn internal(message: impl std::fmt::Display) -> Self {
        Failure { code: 2, message: message.to_string() }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure { code: e.exit_code() as u8, message: e.to_string() }
    }
}

type Outcome = Result<(), Failure>;

fn color_enabled() -> bool {
    std::env::var_os("RESHA_NO_COLOR").is_none() && std::io::stderr().is_terminal()
}

fn paint(text: &str, code: &str) -> String {
    if color_enabled() {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::internal(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<SystemModel, Failure> {
    let text = read(path)?;
    parse_model_named(&text, &path.display().to_string()).map_err(|e| PipelineError::Parse(e).into())
}

/// Parses, validates and expands.
fn load_expanded(path: &Path) -> Result<SystemModel, Failure> {
    let model = load_model(path)?;
    let report = validate_model(&model);
    if !report.is_empty() {
        return Err(PipelineError::Invalid(report).into());
    }
    expand_replication(&model).map_err(|e| PipelineError::Expand(e).into())
}

fn load_ft(path: &Path) -> Result<FaultTree, Failure> {
    import_ft(&read(path)?).map_err(|e| Failure::internal(format!("{}: {e}", path.display())))
}

fn load_instances(path: Option<&Path>, model: &SystemModel) -> Result<Vec<UcaUifInstance>, Failure> {
    match path {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Failure::internal(format!("{}: {e}", p.display()))),
        None => applicable_instances(model).map_err(|e| PipelineError::Stpa(e).into()),
    }
}

fn instances_json(instances: &[UcaUifInstance]) -> String {
    let mut s = serde_json::to_string_pretty(instances).unwrap_or_default();
    s.push('\n');
    s
}

/// Prints `files` to standard output, or writes them under `out_dir`.
fn emit(out_dir: Option<&Path>, files: &[(&str, String)]) -> Outcome {
    match out_dir {
        None => {
            for (_, body) in files.iter().take(1) {
                print!("{body}");
            }
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Failure::internal(format!("{}: {e}", dir.display())))?;
            for (name, body) in files {
                let path = dir.join(name);
                std::fs::write(&path, body).map_err(|e| Failure::internal(format!("{}: {e}", path.display())))?;
            }
            Ok(())
        }
    }
}

fn synth(model: &SystemModel, common: &Common) -> Result<FaultTree, Failure> {
    synthesize_hardware_ft(model, SynthOptions { include_hw_design: common.include_hw_design })
        .map_err(|e| PipelineError::Tree(e).into())
}

fn full_run(path: &Path, common: &Common, max_order: Option<usize>) -> Result<PipelineRun, Failure> {
    let model = load_model(path)?;
    Ok(run_model(&model, PipelineOptions { include_hw_design: common.include_hw_design, max_order })?)
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { model } => {
            let parsed = load_model(&model)?;
            let report = validate_model(&parsed);
            if report.is_empty() {
                println!("{}: ok", model.display());
                return Ok(());
            }
            for v in &report.violations {
                eprintln!("{} {v}", paint("violation:", "31"));
            }
            Err(Failure { code: 1, message: format!("{} violation(s)", report.len()) })
        }
        Command::Stpa { model, format, common } => {
            let m = load_expanded(&model)?;
            let instances = applicable_instances(&m).map_err(PipelineError::Stpa)?;
            let json = ("instances.json", instances_json(&instances));
            let csv = ("traceability.csv", traceability_csv(&instances, &m));
            let files = if format == Format::Csv { [csv, json] } else { [json, csv] };
            emit(common.out_dir.as_deref(), &files)
        }
        Command::Synth { model, census: census_only, common } => {
            let m = load_expanded(&model)?;
            let ft = synth(&m, &common)?;
            let c = branch_census(&ft);
            let census_text = format!(
                "hw_stochastic_events: {}\ndependency_branches: {}\nsw_design_branches: {}\nhw_design_branches: {}\n",
                c.hw_stochastic_events, c.dependency_branches, c.sw_design_branches, c.hw_design_branches
            );
            let tree = ("ft.json", export_ft(&ft));
            let census = ("census.txt", census_text);
            let files = if census_only { [census, tree] } else { [tree, census] };
            emit(common.out_dir.as_deref(), &files)
        }
        Command::Integrate { model, ft, instances, common } => {
            let m = load_expanded(&model)?;
            let hw = match ft {
                Some(p) => load_ft(&p)?,
                None => synth(&m, &common)?,
            };
            let inst = load_instances(instances.as_deref(), &m)?;
            let integrated = integrate_software(&hw, &inst).map_err(PipelineError::Tree)?;
            emit(common.out_dir.as_deref(), &[("ft.json", export_ft(&integrated))])
        }
        Command::Ccf { model, ft, instances, format, common } => {
            let m = load_expanded(&model)?;
            let inst = load_instances(instances.as_deref(), &m)?;
            let integrated = match ft {
                Some(p) => load_ft(&p)?,
                None => integrate_software(&synth(&m, &common)?, &inst).map_err(PipelineError::Tree)?,
            };
            let groups: Vec<CcfGroup> = detect_ccf_groups(&integrated, &m, &inst);
            let injected = inject_ccf_events(&integrated, &groups).map_err(PipelineError::Ccf)?;
            let json = ("ccf.json", ccf_json(&groups));
            let csv = ("ccf.csv", ccf_csv(&groups));
            let tree = ("ft.json", export_ft(&injected));
            let files = if format == Format::Csv { [csv, json, tree] } else { [json, csv, tree] };
            emit(common.out_dir.as_deref(), &files)
        }
        Command::Cutsets { model, ft, max_order, format, common } => {
            let tree = match (ft, model) {
                (Some(p), _) => load_ft(&p)?,
                (None, Some(m)) => full_run(&m, &common, max_order)?.final_ft,
                (None, None) => return Err(Failure::internal("give a model or --ft")),
            };
            let c = minimal_cut_sets(&tree, max_order).map_err(PipelineError::CutSets)?;
            let first = first_order_cut_sets(&c);
            eprintln!(
                "{} minimal cut sets; first order: {} software, {} hardware",
                c.sets.len(),
                first.software.len(),
                first.hardware.len()
            );
            let json = ("cutsets.json", cutsets_json(&c));
            let csv = ("cutsets.csv", cutsets_csv(&c));
            let files = if format == Format::Json { [json, csv] } else { [csv, json] };
            emit(common.out_dir.as_deref(), &files)
        }
        Command::Report { model, max_order, format, common } => {
            let r = full_run(&model, &common, max_order)?;
            let md = ("summary.md", render_summary_md(&r));
            let txt = ("summary.txt", render_summary_text(&r));
            let json = ("guidance.json", guidance_json(&r.guidance));
            let files = match format {
                Format::Json => [json, md, txt],
                Format::Txt | Format::Csv => [txt, md, json],
                Format::Md => [md, txt, json],
            };
            emit(common.out_dir.as_deref(), &files)
        }
        Command::Pipeline { model, max_order, common } => {
            let r = full_run(&model, &common, max_order)?;
            match &common.out_dir {
                Some(dir) => {
                    let written =
                        write_artifacts(&r, dir).map_err(|e| Failure::internal(format!("{}: {e}", dir.display())))?;
                    for p in written {
                        println!("{}", p.display());
                    }
                }
                None => print!("{}", render_summary_text(&r)),
            }
            Ok(())
        }
        Command::Golden { model, golden } => {
            let record =
                parse_golden(&read(&golden)?).map_err(|e| Failure::internal(format!("{}: {e}", golden.display())))?;
            let r = full_run(&model, &Common { out_dir: None, include_hw_design: false }, None)?;
            let report = compare(&record, &r);
            let text = report.to_string();
            if report.passed() {
                println!("{}", text.replacen("PASS", &paint("PASS", "32"), 1));
                Ok(())
            } else {
                println!("{}", text.replacen("FAIL", &paint("FAIL", "31"), 1));
                Err(Failure { code: 1, message: format!("{} field(s) differ", report.diffs.len()) })
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{} {}", paint("error:", "31;1"), f.message);
            ExitCode::from(f.code)
        }
    }
}
