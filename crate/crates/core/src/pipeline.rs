//! End-to-end orchestration: gates, stages, and the verdict report.
//!
//! The pipeline runs parse, matrix and primitivity, exact lengths and digit
//! sets, minimal polynomial and roots, the unimodularity and Pisot gates,
//! patch and return-module generation, the scheme construction, the
//! coincidence search, window computation by both routes, and the model-set
//! inclusion checks. It stops at the first hard gate with an inapplicability
//! reason. Every number in the report carries its generation bounds; nothing
//! here is a proof.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::algebra::{
    field_from_min_poly, find_roots, pisot_family_check, AlgebraError, EmbeddingData, FieldRef,
    RootKind,
};
use crate::coincidence::{
    delta_star, find_k_for_e_delta, search_coincidence, CoincidenceError,
};
use crate::cps::{build_cps, density_probe, enumerate_module_box, CpsContext, CpsError};
use crate::pointset::{
    compute_xi, find_seed, generate_patch, meyer_flc_probe, module_analysis, PatchPointSet,
    PointsetError, ReturnModule, Seed,
};
use crate::scalar::Scalar;
use crate::substitution::{
    build_matrix, check_primitive, derive_digit_sets, derive_lengths, derive_min_poly,
    validate_tile_equation, DigitSets, SpecParams, SubMatrix, SubstitutionError, SubstitutionSpec,
};
use crate::window::{
    attractor_by_projection, attractor_levels, build_dual_ifs, overlap_report, regularity_report,
    verify_model_set, window_agreement, DualIfs, WindowApprox, WindowError,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("substitution stage: {0}")]
    Substitution(#[from] SubstitutionError),
    #[error("algebra stage: {0}")]
    Algebra(#[from] AlgebraError),
    #[error("point-set stage: {0}")]
    Pointset(#[from] PointsetError),
    #[error("scheme stage: {0}")]
    Cps(#[from] CpsError),
    #[error("coincidence stage: {0}")]
    Coincidence(#[from] CoincidenceError),
    #[error("window stage: {0}")]
    Window(#[from] WindowError),
    #[error("configuration: {0}")]
    Config(String),
}

/// Numeric knobs with their built-in defaults. Spec-file parameters are
/// applied over the defaults, command-line flags over both.
#[derive(Clone, Debug)]
pub struct PipelineParams {
    /// Certificate window: the coincidence check quantifies over
    /// `Xi` inside `[-radius, radius]`.
    pub radius: f64,
    /// Dyadic depth of the window grids; default 9 for a one-dimensional
    /// internal space, 8 otherwise.
    pub depth: Option<u32>,
    /// Largest coincidence exponent searched.
    pub m_max: u32,
    /// Largest scaling exponent for the `E_delta` bridge; default derived
    /// from the generated radii.
    pub k_max: Option<u32>,
    /// Physical window for the `E_delta` enumeration; default `radius / 10`.
    pub e_delta_radius: Option<f64>,
    /// Candidate search ball for the coincidence translate.
    pub candidate_radius: Option<f64>,
    /// Window ball for `E_delta`; default is the empirical `delta*`.
    pub delta: Option<f64>,
    pub seed: u64,
    pub tol: f64,
    pub root_tol: f64,
    pub density_samples: usize,
    pub density_eps: f64,
    pub density_coeff_bound: i64,
    /// Erosion margin (cells) for the inner-window surrogate.
    pub margin: u32,
    /// Minimum projected points per letter for the projection route.
    pub min_proj_points: usize,
    /// Projection sampling: points per cover cell.
    pub proj_oversample: f64,
    pub tile_cap: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            radius: 200.0,
            depth: None,
            m_max: 4,
            k_max: None,
            e_delta_radius: None,
            candidate_radius: None,
            delta: None,
            seed: 42,
            tol: 1e-9,
            root_tol: 1e-13,
            density_samples: 100,
            density_eps: 1e-2,
            density_coeff_bound: 400,
            margin: 2,
            min_proj_points: 1000,
            proj_oversample: 2.5,
            tile_cap: 4_000_000,
        }
    }
}

impl PipelineParams {
    /// Overlays the optional spec-file parameters.
    pub fn apply_spec(&mut self, p: &SpecParams) {
        if let Some(r) = p.radius {
            self.radius = r;
        }
        if let Some(d) = p.delta {
            self.delta = Some(d);
        }
        if let Some(m) = p.m_max {
            self.m_max = m;
        }
        if let Some(g) = p.grid_depth {
            self.depth = Some(g);
        }
        if let Some(t) = p.tol {
            self.tol = t;
        }
    }
}

/// How far to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    /// Parse, matrix, lengths, digit sets, tile equation.
    Validate,
    /// Plus seed, patch, return module, lattice analysis.
    Points,
    /// Plus roots, scheme, density probe.
    Scheme,
    /// Plus the coincidence search and the E_delta bridge.
    Coincidence,
    /// Everything: windows, overlap, regularity, inclusions, verdict.
    Full,
}

/// Final classification; order matters for exit codes.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "reason")]
pub enum Verdict {
    /// Finite-radius evidence for a regular Euclidean model set.
    RegularEuclideanModelSetEvidence,
    /// Window interiors overlap; letters cannot be separated in this scheme.
    WindowOverlap,
    /// No algebraic coincidence found within the searched bounds.
    NoCoincidenceCertificate,
    /// A structural gate failed; the construction does not apply.
    Inapplicable(String),
    /// The requested stage stops before a verdict is meaningful.
    NotEvaluated,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::RegularEuclideanModelSetEvidence => 0,
            Verdict::WindowOverlap => 2,
            Verdict::NoCoincidenceCertificate => 3,
            Verdict::Inapplicable(_) => 4,
            Verdict::NotEvaluated => 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecEcho {
    pub letters: Vec<String>,
    pub rules: BTreeMap<String, String>,
    pub lengths: Vec<String>,
    pub min_poly: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamsEcho {
    pub radius: f64,
    pub depth: u32,
    pub m_max: u32,
    pub k_max: u32,
    pub e_delta_radius: f64,
    pub candidate_radius: f64,
    pub seed: u64,
    pub tol: f64,
    pub root_tol: f64,
    pub margin: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixReport {
    pub counts: Vec<Vec<u64>>,
    pub perron_value: f64,
    pub primitivity_power: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootReport {
    pub re: f64,
    pub im: f64,
    pub kind: String,
    pub expanding: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PatchReport {
    pub requested_radius: f64,
    pub generated_radius: f64,
    pub tiles: usize,
    pub per_letter: Vec<usize>,
    pub all_integral: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct XiReport {
    pub radius: f64,
    pub count: usize,
    pub index_in_ambient: String,
    pub hnf_basis: Vec<Vec<String>>,
    pub index_stable: bool,
    pub support_min_gap: f64,
    pub xi_diff_min_gap: f64,
    pub config_count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CpsReport {
    pub internal_dim: usize,
    pub d_matrix: Vec<Vec<f64>>,
    pub contraction: f64,
    pub lattice_det: f64,
    pub delta_star: f64,
    pub delta_used: f64,
    pub density_hit_rate: f64,
    pub density_eps: f64,
    pub density_samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoincidenceReport {
    pub found: bool,
    pub m: u32,
    pub xi_coeffs: Vec<String>,
    pub letter: String,
    pub radius_checked: f64,
    pub m_max: u32,
    pub candidate_radius: f64,
    pub counterexample: Option<Vec<String>>,
    pub k_for_e_delta: Option<u32>,
    pub k_max: u32,
    pub e_delta_radius: f64,
    pub e_delta_points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowLetterReport {
    pub cells: usize,
    pub measure: f64,
    pub boundary_cells: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowsReport {
    pub depth: u32,
    pub dim: usize,
    pub per_letter: Vec<WindowLetterReport>,
    pub route_agreement_cells: Option<u32>,
    pub projection_points: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapPairReport {
    pub letters: (String, String),
    pub eroded_cells: usize,
    pub eroded_volume: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapSection {
    pub pairs: Vec<OverlapPairReport>,
    pub disjoint_interiors: bool,
    /// Largest eroded overlap as a fraction of the total cover measure.
    /// Outer covers of genuinely disjoint windows can share thin bands
    /// around fractal boundaries at any finite depth, so the verdict calls
    /// overlap only above one percent.
    pub max_fraction: f64,
    pub significant: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularitySection {
    pub boundary_series: Vec<(u32, f64)>,
    pub strictly_decreasing: bool,
    pub decay_exponent: f64,
    pub eigen_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InclusionSection {
    pub dir1_checked: usize,
    pub dir1_exceptions: usize,
    pub dir2_checked: usize,
    pub dir2_exceptions: usize,
    pub margin: u32,
    pub radius: f64,
}

/// The full JSON-serializable outcome. Optional sections stay `None` when a
/// gate stopped the pipeline or a shallower stage was requested.
#[derive(Clone, Debug, Serialize)]
pub struct VerdictReport {
    pub spec: SpecEcho,
    pub params: ParamsEcho,
    pub matrix: Option<MatrixReport>,
    pub unimodular: Option<bool>,
    pub pisot_family: Option<bool>,
    pub pisot_margin: Option<f64>,
    pub roots: Vec<RootReport>,
    pub seed_tile: Option<(String, String, usize)>,
    pub patch: Option<PatchReport>,
    pub xi: Option<XiReport>,
    pub cps: Option<CpsReport>,
    pub coincidence: Option<CoincidenceReport>,
    pub windows: Option<WindowsReport>,
    pub overlap: Option<OverlapSection>,
    pub regularity: Option<RegularitySection>,
    pub inclusions: Option<InclusionSection>,
    pub gate_notes: Vec<String>,
    pub verdict: Verdict,
    pub evidence_note: String,
}

/// Everything heavyweight the pipeline built, for rendering and tests.
pub struct Artifacts<T: Scalar> {
    pub field: Option<FieldRef>,
    pub matrix: Option<SubMatrix<T>>,
    pub lengths: Option<Vec<crate::algebra::AlgebraicElement>>,
    pub digits: Option<DigitSets>,
    pub embedding: Option<EmbeddingData<T>>,
    pub seed: Option<Seed>,
    pub patch: Option<PatchPointSet>,
    pub xi: Option<ReturnModule>,
    pub cps: Option<CpsContext<T>>,
    pub ifs: Option<DualIfs<T>>,
    pub windows_iter: Option<WindowApprox<T>>,
    pub windows_proj: Option<WindowApprox<T>>,
    pub windows_series: Vec<WindowApprox<T>>,
}

impl<T: Scalar> Default for Artifacts<T> {
    fn default() -> Self {
        Artifacts {
            field: None,
            matrix: None,
            lengths: None,
            digits: None,
            embedding: None,
            seed: None,
            patch: None,
            xi: None,
            cps: None,
            ifs: None,
            windows_iter: None,
            windows_proj: None,
            windows_series: vec![],
        }
    }
}

pub struct PipelineRun<T: Scalar> {
    pub report: VerdictReport,
    pub artifacts: Artifacts<T>,
}

const EVIDENCE_NOTE: &str = "All verdicts are finite-radius evidence computed at the \
recorded bounds (radius, depth, m_max); no statement here is a proof.";

/// Runs the pipeline up to `stage`.
pub fn run_pipeline<T: Scalar>(
    spec: &SubstitutionSpec,
    params: &PipelineParams,
    stage: Stage,
) -> Result<PipelineRun<T>, PipelineError> {
    let mut arts = Artifacts::<T>::default();
    let mut notes: Vec<String> = vec![];

    // Matrix and primitivity.
    let matrix = build_matrix::<T>(spec, T::from_f64_lossy(1e-13));
    let perron = matrix.perron_value().to_f64_lossy();
    let primitivity = match check_primitive(&matrix) {
        Ok(l) => Some(l),
        Err(SubstitutionError::NotPrimitive { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    // Minimal polynomial, field, roots.
    let min_poly = derive_min_poly(&matrix, spec.min_poly_override(), T::from_f64_lossy(params.tol))?;
    let field = field_from_min_poly(min_poly.clone())?;
    let embedding = find_roots::<T>(&min_poly, T::from_f64_lossy(params.root_tol))?;
    let beta = embedding.expanding_root().to_f64_lossy();
    if (beta - perron).abs() > params.tol * (1.0 + perron) {
        return Err(PipelineError::Config(format!(
            "expanding root {beta} does not match the Perron value {perron}"
        )));
    }

    // Exact lengths, digit sets, tile equation.
    let lengths = derive_lengths(spec, &matrix, &field, embedding.expanding_root())?;
    let digits = derive_digit_sets(spec, &field, &lengths);
    validate_tile_equation(spec, &digits, &lengths, &field, embedding.expanding_root())?;

    let unimodular = field.is_unimodular();
    if !unimodular {
        notes.push("non-unimodular expansion".into());
    }

    let depth = params.depth.unwrap_or(if embedding.internal_dim() <= 1 { 9 } else { 8 });
    let mut report = VerdictReport {
        spec: SpecEcho {
            letters: spec.letters().iter().map(|c| c.to_string()).collect(),
            rules: spec.echo(),
            lengths: lengths.iter().map(|l| format!("{l:?}")).collect(),
            min_poly: min_poly.coeffs().iter().map(|c| c.to_string()).collect(),
        },
        params: ParamsEcho {
            radius: params.radius,
            depth,
            m_max: params.m_max,
            k_max: 0,
            e_delta_radius: 0.0,
            candidate_radius: 0.0,
            seed: params.seed,
            tol: params.tol,
            root_tol: params.root_tol,
            margin: params.margin,
        },
        matrix: Some(MatrixReport {
            counts: matrix.counts().to_vec(),
            perron_value: perron,
            primitivity_power: primitivity,
        }),
        unimodular: Some(unimodular),
        pisot_family: None,
        pisot_margin: None,
        roots: embedding
            .roots()
            .iter()
            .zip(embedding.kinds())
            .enumerate()
            .map(|(i, (z, k))| RootReport {
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
                kind: match k {
                    RootKind::Real => "real".into(),
                    RootKind::ComplexPair => "complex-pair".into(),
                },
                expanding: i == embedding.expanding_index(),
            })
            .collect(),
        seed_tile: None,
        patch: None,
        xi: None,
        cps: None,
        coincidence: None,
        windows: None,
        overlap: None,
        regularity: None,
        inclusions: None,
        gate_notes: notes,
        verdict: Verdict::NotEvaluated,
        evidence_note: EVIDENCE_NOTE.into(),
    };
    arts.matrix = Some(matrix.clone());
    arts.field = Some(field.clone());
    arts.lengths = Some(lengths.clone());
    arts.digits = Some(digits.clone());
    arts.embedding = Some(embedding.clone());

    // Primitivity gate.
    if primitivity.is_none() {
        report.verdict = Verdict::Inapplicable("substitution matrix is not primitive".into());
        return Ok(PipelineRun { report, artifacts: arts });
    }
    if stage <= Stage::Validate {
        return Ok(PipelineRun { report, artifacts: arts });
    }

    // Structural gates come before any heavy generation when the scheme is
    // actually needed; plain point-set stages skip them.
    if stage >= Stage::Scheme {
        if embedding.internal_dim() == 0 {
            report.verdict = Verdict::Inapplicable("empty internal space".into());
            return Ok(PipelineRun { report, artifacts: arts });
        }
        let pisot = match pisot_family_check(&embedding, T::from_f64_lossy(params.tol)) {
            Ok(v) => v,
            Err(AlgebraError::Inconclusive { modulus }) => {
                report.verdict = Verdict::Inapplicable(format!(
                    "Pisot test inconclusive: conjugate modulus {modulus} within tolerance of 1"
                ));
                return Ok(PipelineRun { report, artifacts: arts });
            }
            Err(e) => return Err(e.into()),
        };
        report.pisot_family = Some(pisot.pisot_family);
        report.pisot_margin = Some(pisot.margin.to_f64_lossy());
        if !pisot.pisot_family {
            report.verdict = Verdict::Inapplicable(
                "Pisot family violated: a non-expanding conjugate has modulus at least 1".into(),
            );
            return Ok(PipelineRun { report, artifacts: arts });
        }
    }

    // Patch, return module, lattice analysis.
    // Translates are searched out to several inflated tiles: fixed points
    // anchored away from the origin can need candidates well beyond one
    // tile (the canonical one for the three-letter example sits near 21).
    let candidate_radius = params
        .candidate_radius
        .unwrap_or_else(|| 15.0 * lengths.iter().map(|l| l.eval_real(beta)).fold(0.0, f64::max));
    let e_delta_radius = params.e_delta_radius.unwrap_or(params.radius / 10.0);
    let patch_radius = beta.powi(params.m_max as i32) * params.radius + candidate_radius + 1.0;
    let seed = find_seed(spec)?;
    let patch = generate_patch(spec, &field, &lengths, &digits, seed, patch_radius, Some(params.tile_cap))?;
    if !patch.all_integral() {
        report
            .gate_notes
            .push("control points leave Z[beta]; module normalization does not apply".into());
    }
    let xi_cap = (2.5 * params.radius).min(0.9 * patch.radius());
    let k_max = params.k_max.unwrap_or_else(|| {
        let mut k = 0u32;
        while beta.powi(k as i32 + 1) * e_delta_radius * 1.02 <= xi_cap && k < 6 {
            k += 1;
        }
        k.max(1)
    });
    let xi_radius = params
        .radius
        .max(beta.powi(k_max as i32) * e_delta_radius * 1.02)
        .min(patch.radius());
    let xi = compute_xi(&patch, xi_radius);
    let analysis = module_analysis(&xi, field.degree())?;
    let analysis_half = module_analysis(&compute_xi(&patch, xi_radius / 2.0), field.degree())?;
    let index_stable = analysis.hnf_basis == analysis_half.hnf_basis;
    if analysis.index_in_ambient != num_bigint::BigInt::from(1) {
        report.gate_notes.push(format!(
            "return vectors generate a proper submodule of index {}; window checks use that module",
            analysis.index_in_ambient
        ));
    }
    let probe = meyer_flc_probe(&patch, &xi, 2.0 * candidate_radius / 3.0);

    report.params.k_max = k_max;
    report.params.e_delta_radius = e_delta_radius;
    report.params.candidate_radius = candidate_radius;
    report.seed_tile = Some((
        spec.letter(seed.left).to_string(),
        spec.letter(seed.right).to_string(),
        seed.power,
    ));
    report.patch = Some(PatchReport {
        requested_radius: patch_radius,
        generated_radius: patch.radius(),
        tiles: patch.tiles().len(),
        per_letter: (0..spec.kappa()).map(|l| patch.letter_count(l)).collect(),
        all_integral: patch.all_integral(),
    });
    report.xi = Some(XiReport {
        radius: xi.radius(),
        count: xi.len(),
        index_in_ambient: analysis.index_in_ambient.to_string(),
        hnf_basis: analysis
            .hnf_basis
            .iter()
            .map(|col| col.iter().map(|c| c.to_string()).collect())
            .collect(),
        index_stable,
        support_min_gap: probe.support_min_gap,
        xi_diff_min_gap: probe.xi_diff_min_gap,
        config_count: probe.config_count,
    });
    arts.seed = Some(seed);
    arts.patch = Some(patch);
    arts.xi = Some(xi);
    if stage <= Stage::Points {
        return Ok(PipelineRun { report, artifacts: arts });
    }
    let patch = arts.patch.as_ref().unwrap();
    let xi = arts.xi.as_ref().unwrap();

    // Scheme, delta*, density evidence.
    let cps = build_cps(&field, &embedding, T::from_f64_lossy(params.tol))?;
    let dstar = delta_star(&cps, xi).to_f64_lossy();
    let delta_used = params.delta.unwrap_or(dstar);
    let hit_rate = density_probe(
        &cps,
        params.density_samples,
        T::from_f64_lossy(params.density_eps),
        params.seed,
        params.density_coeff_bound,
    );
    report.cps = Some(CpsReport {
        internal_dim: cps.internal_dim(),
        d_matrix: cps
            .d_matrix()
            .iter()
            .map(|r| r.iter().map(|c| c.to_f64_lossy()).collect())
            .collect(),
        contraction: cps.contraction().to_f64_lossy(),
        lattice_det: cps.lattice_det().to_f64_lossy(),
        delta_star: dstar,
        delta_used,
        density_hit_rate: hit_rate.to_f64_lossy(),
        density_eps: params.density_eps,
        density_samples: params.density_samples,
    });
    arts.cps = Some(cps);
    if stage <= Stage::Scheme {
        return Ok(PipelineRun { report, artifacts: arts });
    }
    let cps = arts.cps.as_ref().unwrap();

    // Coincidence search and the E_delta bridge.
    let cert = search_coincidence(patch, xi, params.m_max, params.radius, candidate_radius)?;
    let e_points = enumerate_module_box(
        cps,
        &analysis.hnf_basis,
        T::from_f64_lossy(e_delta_radius),
        T::from_f64_lossy(delta_used),
    )?;
    let k_found = if cert.found {
        match find_k_for_e_delta(&e_points, xi, cps, k_max, e_delta_radius) {
            Ok(k) => Some(k),
            Err(CoincidenceError::NotFound { bound }) => {
                report.gate_notes.push(format!(
                    "no K <= {bound} scales E_delta into Xi at radius {e_delta_radius}; \
                     inconsistent with pure discreteness at this radius"
                ));
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    report.coincidence = Some(CoincidenceReport {
        found: cert.found,
        m: cert.m,
        xi_coeffs: cert.xi.numerators().iter().map(|c| c.to_string()).collect(),
        letter: spec.letter(cert.letter).to_string(),
        radius_checked: cert.radius_checked,
        m_max: cert.m_max,
        candidate_radius: cert.candidate_radius,
        counterexample: cert
            .counterexample
            .as_ref()
            .map(|x| x.numerators().iter().map(|c| c.to_string()).collect()),
        k_for_e_delta: k_found,
        k_max,
        e_delta_radius,
        e_delta_points: e_points.len(),
    });
    if stage <= Stage::Coincidence {
        return Ok(PipelineRun { report, artifacts: arts });
    }

    // Windows by both routes.
    let ifs = build_dual_ifs(&digits, cps)?;
    let series_top = depth.max(9);
    let series = attractor_levels(&ifs, 6, series_top, 500)?;
    let wa_iter = series
        .iter()
        .find(|wa| wa.depth == depth)
        .expect("series covers the requested depth")
        .clone();

    // Projection route: size the patch so each letter oversamples its cover
    // and clears the minimum point count.
    let mut proj_radius: f64 = params.radius;
    for letter in 0..spec.kappa() {
        let cells = wa_iter.covers[letter].occupied_count() as f64;
        let density = patch.letter_count(letter) as f64 / (2.0 * patch.radius());
        let target = (params.proj_oversample * cells).max(1.05 * params.min_proj_points as f64);
        proj_radius = proj_radius.max(target / density / 2.0);
    }
    let proj_patch;
    let patch_for_proj = if proj_radius <= patch.radius() {
        patch
    } else {
        proj_patch = generate_patch(spec, &field, &lengths, &digits, seed, proj_radius, Some(params.tile_cap))?;
        &proj_patch
    };
    let wa_proj = attractor_by_projection(patch_for_proj, cps, depth, params.min_proj_points)?;
    let agreement = window_agreement(&wa_iter, &wa_proj, 10)?;

    let overlap = overlap_report(&wa_iter);
    let regularity = regularity_report(&series, &ifs, cps.det_d_abs());
    let verify_radius = params.radius.min(0.9 * patch.radius());
    let inclusions = verify_model_set(patch, &wa_iter, cps, &analysis.hnf_basis, params.margin, verify_radius)?;

    report.windows = Some(WindowsReport {
        depth,
        dim: wa_iter.dim,
        per_letter: (0..spec.kappa())
            .map(|l| WindowLetterReport {
                cells: wa_iter.covers[l].occupied_count(),
                measure: wa_iter.measures[l].to_f64_lossy(),
                boundary_cells: wa_iter.boundary_cells[l],
            })
            .collect(),
        route_agreement_cells: Some(agreement),
        projection_points: (0..spec.kappa()).map(|l| patch_for_proj.letter_count(l)).collect(),
    });
    let total_measure = wa_iter.total_measure().to_f64_lossy();
    let max_fraction = overlap
        .pairs
        .iter()
        .map(|&(_, _, _, vol)| vol.to_f64_lossy() / total_measure.max(f64::MIN_POSITIVE))
        .fold(0.0f64, f64::max);
    let significant_overlap = max_fraction > 0.01;
    report.overlap = Some(OverlapSection {
        pairs: overlap
            .pairs
            .iter()
            .map(|&(i, j, cells, vol)| OverlapPairReport {
                letters: (spec.letter(i).to_string(), spec.letter(j).to_string()),
                eroded_cells: cells,
                eroded_volume: vol.to_f64_lossy(),
            })
            .collect(),
        disjoint_interiors: overlap.disjoint_interiors,
        max_fraction,
        significant: significant_overlap,
    });
    report.regularity = Some(RegularitySection {
        boundary_series: regularity
            .boundary_series
            .iter()
            .map(|&(d, v)| (d, v.to_f64_lossy()))
            .collect(),
        strictly_decreasing: regularity.strictly_decreasing,
        decay_exponent: regularity.decay_exponent,
        eigen_residual: regularity.eigen_residual.to_f64_lossy(),
    });
    report.inclusions = Some(InclusionSection {
        dir1_checked: inclusions.dir1_checked,
        dir1_exceptions: inclusions.dir1_exceptions,
        dir2_checked: inclusions.dir2_checked,
        dir2_exceptions: inclusions.dir2_exceptions,
        margin: inclusions.margin,
        radius: inclusions.radius,
    });

    report.verdict = if significant_overlap {
        Verdict::WindowOverlap
    } else if !cert.found {
        Verdict::NoCoincidenceCertificate
    } else if inclusions.dir1_exceptions == 0
        && inclusions.dir2_exceptions == 0
        && regularity.strictly_decreasing
    {
        Verdict::RegularEuclideanModelSetEvidence
    } else {
        Verdict::Inapplicable(format!(
            "finite-radius checks inconsistent: {} + {} inclusion exceptions, decreasing = {}",
            inclusions.dir1_exceptions, inclusions.dir2_exceptions, regularity.strictly_decreasing
        ))
    };

    arts.ifs = Some(ifs);
    arts.windows_iter = Some(wa_iter);
    arts.windows_proj = Some(wa_proj);
    arts.windows_series = series;
    Ok(PipelineRun { report, artifacts: arts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substitution::parse_spec;

    const FIB: &str = r#"{"format":1,"letters":["a","b"],"rules":{"a":"ab","b":"a"}}"#;
    const TM: &str = r#"{"format":1,"letters":["a","b"],"rules":{"a":"ab","b":"ba"},
        "lengths":{"a":"1","b":"1"}}"#;
    const NON_PISOT: &str = r#"{"format":1,"letters":["a","b"],"rules":{"a":"abbb","b":"a"}}"#;

    #[test]
    fn fibonacci_full_run_is_positive() {
        let spec = parse_spec(FIB).unwrap();
        let mut params = PipelineParams::default();
        params.radius = 40.0;
        let run = run_pipeline::<f64>(&spec, &params, Stage::Full).unwrap();
        assert_eq!(run.report.verdict, Verdict::RegularEuclideanModelSetEvidence);
        let c = run.report.coincidence.as_ref().unwrap();
        assert!(c.found);
        assert!(c.k_for_e_delta.is_some());
        assert_eq!(run.report.inclusions.as_ref().unwrap().dir1_exceptions, 0);
    }

    #[test]
    fn thue_morse_gates_at_internal_space() {
        let spec = parse_spec(TM).unwrap();
        let params = PipelineParams::default();
        let run = run_pipeline::<f64>(&spec, &params, Stage::Full).unwrap();
        assert_eq!(
            run.report.verdict,
            Verdict::Inapplicable("empty internal space".into())
        );
        assert_eq!(run.report.verdict.exit_code(), 4);
    }

    #[test]
    fn non_pisot_gates_at_pisot_family() {
        let spec = parse_spec(NON_PISOT).unwrap();
        let mut params = PipelineParams::default();
        params.radius = 30.0;
        let run = run_pipeline::<f64>(&spec, &params, Stage::Full).unwrap();
        match &run.report.verdict {
            Verdict::Inapplicable(reason) => assert!(reason.contains("Pisot"), "{reason}"),
            v => panic!("expected Pisot gate, got {v:?}"),
        }
        assert_eq!(run.report.pisot_family, Some(false));
    }

    #[test]
    fn stages_stop_early() {
        let spec = parse_spec(FIB).unwrap();
        let mut params = PipelineParams::default();
        params.radius = 30.0;
        let run = run_pipeline::<f64>(&spec, &params, Stage::Validate).unwrap();
        assert!(run.report.patch.is_none());
        let run = run_pipeline::<f64>(&spec, &params, Stage::Points).unwrap();
        assert!(run.report.patch.is_some());
        assert!(run.report.cps.is_none());
        let run = run_pipeline::<f64>(&spec, &params, Stage::Scheme).unwrap();
        assert!(run.report.cps.is_some());
        assert!(run.report.coincidence.is_none());
    }

    #[test]
    fn reports_are_deterministic() {
        let spec = parse_spec(FIB).unwrap();
        let mut params = PipelineParams::default();
        params.radius = 30.0;
        let a = run_pipeline::<f64>(&spec, &params, Stage::Full).unwrap();
        let b = run_pipeline::<f64>(&spec, &params, Stage::Full).unwrap();
        let ja = serde_json::to_string_pretty(&a.report).unwrap();
        let jb = serde_json::to_string_pretty(&b.report).unwrap();
        assert_eq!(ja, jb);
    }
}
