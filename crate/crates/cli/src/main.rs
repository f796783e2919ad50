//! `cutproject`: cut-and-project analysis of one-dimensional substitution
//! point sets from the command line.
//!
//! Subcommands mirror the pipeline stages: `validate` checks the spec and
//! tile equation, `points` and `xi` dump exact point data, `cps` prints the
//! scheme, `coincidence` searches for a certificate, `window` computes the
//! window covers, and `verify` / `report` run everything and exit with a
//! verdict code (0 regular-model-set evidence, 2 window overlap, 3 no
//! certificate, 4 inapplicable, 1 error).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cutproject_core::pipeline::{run_pipeline, PipelineParams, Stage, Verdict};
use cutproject_core::render;
use cutproject_core::substitution::{parse_spec, SubstitutionSpec};
use cutproject_core::PipelineRun64;

#[derive(Parser)]
#[command(name = "cutproject", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Substitution spec file (JSON, format 1).
    spec: PathBuf,
    /// Certificate window radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Dyadic depth of the window grids.
    #[arg(long)]
    depth: Option<u32>,
    /// Largest coincidence exponent searched.
    #[arg(long = "m-max")]
    m_max: Option<u32>,
    /// Seed for the density probe.
    #[arg(long)]
    seed: Option<u64>,
    /// Write JSON output here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Route {
    Ifs,
    Projection,
    Both,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse the spec; derive matrix, lengths, digit sets; check the tile equation.
    Validate(Common),
    /// Emit the generated control points as CSV.
    Points {
        #[command(flatten)]
        common: Common,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Emit the return vectors as CSV.
    Xi {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the cut-and-project scheme: roots, contraction, lattice, delta*.
    Cps(Common),
    /// Search for an algebraic coincidence certificate.
    Coincidence {
        #[command(flatten)]
        common: Common,
        /// Candidate search radius for the translate.
        #[arg(long)]
        candidates: Option<f64>,
    },
    /// Compute window covers and emit figures.
    Window {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Route::Both)]
        route: Route,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the full pipeline and print the compact verdict report.
    Verify(Common),
    /// Run the full pipeline; print the full report and write artifacts.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn load(common: &Common) -> Result<(SubstitutionSpec, PipelineParams)> {
    let text = fs::read_to_string(&common.spec)
        .with_context(|| format!("reading {}", common.spec.display()))?;
    let spec = parse_spec(&text)?;
    let mut params = PipelineParams::default();
    params.apply_spec(spec.params());
    if let Some(r) = common.radius {
        params.radius = r;
    }
    if let Some(d) = common.depth {
        params.depth = Some(d);
    }
    if let Some(m) = common.m_max {
        params.m_max = m;
    }
    if let Some(s) = common.seed {
        params.seed = s;
    }
    Ok((spec, params))
}

fn emit_text(target: &Option<PathBuf>, text: &str) -> Result<()> {
    match target {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<S: Serialize>(target: &Option<PathBuf>, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit_text(target, &text)
}

fn run(spec: &SubstitutionSpec, params: &PipelineParams, stage: Stage) -> Result<PipelineRun64> {
    Ok(run_pipeline::<f64>(spec, params, stage)?)
}

/// The compact verdict document emitted by `verify`.
#[derive(Serialize)]
struct VerifySummary {
    unimodular: Option<bool>,
    pisot_family: Option<bool>,
    pisot_margin: Option<f64>,
    coincidence: Option<bool>,
    coincidence_m: Option<u32>,
    overlap: Option<bool>,
    regularity: Option<bool>,
    model_set_inclusions: Option<serde_json::Value>,
    verdict: Verdict,
    bounds: serde_json::Value,
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Validate(common) => {
            let (spec, params) = load(&common)?;
            let run = run(&spec, &params, Stage::Validate)?;
            emit_json(&common.json, &run.report)?;
            if let Verdict::Inapplicable(reason) = &run.report.verdict {
                eprintln!("inapplicable: {reason}");
                return Ok(ExitCode::from(4));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Points { common, csv } => {
            let (spec, params) = load(&common)?;
            let run = run(&spec, &params, Stage::Points)?;
            let patch = run.artifacts.patch.as_ref().context("no patch generated")?;
            emit_text(&csv, &render::points_csv(patch, spec.letters()))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Xi { common, csv } => {
            let (spec, params) = load(&common)?;
            let run = run(&spec, &params, Stage::Points)?;
            let xi = run.artifacts.xi.as_ref().context("no return module generated")?;
            emit_text(&csv, &render::xi_csv(xi))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Cps(common) => {
            let (spec, params) = load(&common)?;
            let run = run(&spec, &params, Stage::Scheme)?;
            #[derive(Serialize)]
            struct CpsDump<'a> {
                roots: &'a Vec<cutproject_core::pipeline::RootReport>,
                cps: &'a Option<cutproject_core::pipeline::CpsReport>,
                verdict: &'a Verdict,
            }
            emit_json(
                &common.json,
                &CpsDump { roots: &run.report.roots, cps: &run.report.cps, verdict: &run.report.verdict },
            )?;
            if let Verdict::Inapplicable(reason) = &run.report.verdict {
                eprintln!("inapplicable: {reason}");
                return Ok(ExitCode::from(4));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Coincidence { common, candidates } => {
            let (spec, mut params) = load(&common)?;
            if let Some(c) = candidates {
                params.candidate_radius = Some(c);
            }
            let run = run(&spec, &params, Stage::Coincidence)?;
            emit_json(&common.json, &run.report.coincidence)?;
            if let Verdict::Inapplicable(reason) = &run.report.verdict {
                eprintln!("inapplicable: {reason}");
                return Ok(ExitCode::from(4));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Window { common, route, svg, csv } => {
            let (spec, params) = load(&common)?;
            let result = run(&spec, &params, Stage::Full)?;
            if let Verdict::Inapplicable(reason) = &result.report.verdict {
                eprintln!("inapplicable: {reason}");
                return Ok(ExitCode::from(4));
            }
            let wa = match route {
                Route::Ifs | Route::Both => result.artifacts.windows_iter.as_ref(),
                Route::Projection => result.artifacts.windows_proj.as_ref(),
            }
            .context("no window cover computed")?;
            if let Some(path) = &svg {
                fs::write(path, render::windows_svg(wa, spec.letters()))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = &csv {
                fs::write(path, render::cells_csv(wa, spec.letters()))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            emit_json(&common.json, &result.report.windows)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify(common) => {
            let (spec, params) = load(&common)?;
            let result = run(&spec, &params, Stage::Full)?;
            let r = &result.report;
            let summary = VerifySummary {
                unimodular: r.unimodular,
                pisot_family: r.pisot_family,
                pisot_margin: r.pisot_margin,
                coincidence: r.coincidence.as_ref().map(|c| c.found),
                coincidence_m: r.coincidence.as_ref().filter(|c| c.found).map(|c| c.m),
                overlap: r.overlap.as_ref().map(|o| o.significant),
                regularity: r.regularity.as_ref().map(|g| g.strictly_decreasing),
                model_set_inclusions: r
                    .inclusions
                    .as_ref()
                    .map(|i| serde_json::to_value(i).unwrap()),
                verdict: r.verdict.clone(),
                bounds: serde_json::to_value(&r.params).unwrap(),
            };
            emit_json(&common.json, &summary)?;
            Ok(ExitCode::from(r.verdict.exit_code() as u8))
        }
        Cmd::Report { common, svg, csv } => {
            let (spec, params) = load(&common)?;
            let result = run(&spec, &params, Stage::Full)?;
            emit_json(&common.json, &result.report)?;
            if let Some(wa) = result.artifacts.windows_iter.as_ref() {
                if let Some(path) = &svg {
                    fs::write(path, render::windows_svg(wa, spec.letters()))
                        .with_context(|| format!("writing {}", path.display()))?;
                }
            } else if svg.is_some() {
                eprintln!("no window cover computed; skipping figure");
            }
            if let Some(patch) = result.artifacts.patch.as_ref() {
                if let Some(path) = &csv {
                    fs::write(path, render::points_csv(patch, spec.letters()))
                        .with_context(|| format!("writing {}", path.display()))?;
                }
            } else if csv.is_some() {
                eprintln!("no patch generated; skipping point dump");
            }
            Ok(ExitCode::from(result.report.verdict.exit_code() as u8))
        }
    }
}
