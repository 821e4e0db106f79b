// SPDX-License-Identifier: MIT OR Apache-2.0

//! Run configuration and report assembly behind the `qbnf` binary.
//!
//! Reports are plain `serde_json` values with sorted keys, so a fixed
//! configuration always serializes to the same bytes.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::classical::{action_hessian, classical_normal_form, default_fan, twist_from_flow};
use crate::direct::f0_direct_dim2;
use crate::error::{Error, Result};
use crate::germ::{germ_from_curvature_2d, germ_from_profile, MetricGerm, Profile};
use crate::jacobi::{frame_from_germ, integrate_monodromy, morse_index, JacobiFrame};
use crate::laplacian::{build_scaled_terms, conjugate_to_model, GRADE_LEDGER};
use crate::normal_form::{
    action_degree, max_imaginary, normal_form_defect, qbnf_assemble, scnf_iterate, spectral_function,
    QbnfResult, ScnfResult,
};
use crate::random::{random_elliptic_germ_2d, random_jacobi_matrix, rng_from_seed, RandomGermSpec};
use crate::spectral::{quasimode_fit, rev_surface_eigenvalues, Mesh};
use crate::symbol::{
    commutator, max_freq_for_bandwidth, moyal_product, Monomial, WeylPolynomial, DEFAULT_BANDWIDTH,
};
use crate::wave::{wave_invariant, CONVENTION_LEDGER};

pub const REPORT_SCHEMA: &str = "qbnf-report/1";

/// Germs in each randomized suite.
pub const SUITE_GERMS: usize = 8;

/// Angular momenta of the spectral ladder.
pub const SPECTRAL_KS: [i64; 13] = [80, 90, 100, 110, 120, 130, 140, 150, 160, 170, 180, 190, 200];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Compute,
    Validate,
    OracleSpectral,
    OracleDynamics,
    Suite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Compute => "compute",
            Command::Validate => "validate",
            Command::OracleSpectral => "oracle-spectral",
            Command::OracleDynamics => "oracle-dynamics",
            Command::Suite => "suite",
        }
    }
}

/// Where the germ comes from. File contents are read by the caller.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GermSource {
    Preset(String),
    File {
        path: String,
        #[serde(skip)]
        contents: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub germ: GermSource,
    pub order: usize,
    pub fourier_bandwidth: usize,
    pub resonance_tol: f64,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(command: Command, germ: GermSource) -> Self {
        Self {
            command,
            germ,
            order: 0,
            fourier_bandwidth: DEFAULT_BANDWIDTH,
            resonance_tol: crate::symbol::DEFAULT_RESONANCE_TOL,
            seed: 0,
        }
    }

    fn max_freq(&self) -> i64 {
        max_freq_for_bandwidth(self.fourier_bandwidth)
    }

    fn jet_order(&self) -> u32 {
        4 + 2 * self.order as u32
    }
}

/// A named tolerance test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
            detail: None,
        }
    }

    pub fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            tolerance: 0.0,
            passed: false,
            detail: Some(detail.into()),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub config: RunConfig,
    pub body: Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failing(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": REPORT_SCHEMA,
            "config": self.config,
            "conventions": { "symbols": CONVENTION_LEDGER, "grades": GRADE_LEDGER },
            "passed": self.passed(),
            "checks": self.checks,
            "result": self.body,
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# qbnf {} report\n\n", self.config.command.name()));
        out.push_str(&format!("schema: `{REPORT_SCHEMA}`\n\n## Configuration\n\n"));
        let cfg = serde_json::to_value(&self.config).expect("config serializes");
        if let Value::Object(map) = cfg {
            for (k, v) in map {
                out.push_str(&format!("- {k}: `{v}`\n"));
            }
        }
        out.push_str("\n## Conventions\n\n");
        for line in CONVENTION_LEDGER.iter().chain(GRADE_LEDGER) {
            out.push_str(&format!("- {line}\n"));
        }
        out.push_str("\n## Checks\n\n| check | value | tolerance | status |\n|---|---|---|---|\n");
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let value = match &c.detail {
                Some(d) if c.value.is_nan() => d.clone(),
                _ => format!("{:.3e}", c.value),
            };
            out.push_str(&format!("| {} | {} | {:.1e} | {} |\n", c.name, value, c.tolerance, status));
        }
        out.push_str("\n## Result\n\n```json\n");
        out.push_str(&serde_json::to_string_pretty(&self.body).expect("body serializes"));
        out.push_str("\n```\n");
        out
    }
}

/// True for errors caused by the configuration or input file rather than the computation.
pub fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::MalformedInput(_) | Error::InsufficientJets { .. } | Error::DimensionMismatch { .. }
    )
}

fn profile_preset(name: &str) -> Result<Profile> {
    Profile::preset(name).ok_or_else(|| {
        Error::MalformedInput(format!(
            "unknown preset {name:?}; available: {}",
            Profile::preset_names().join(", ")
        ))
    })
}

/// Germ of the configured source, carrying `4 + 2K` transverse jets.
pub fn load_germ(config: &RunConfig) -> Result<MetricGerm> {
    let max_freq = config.max_freq();
    let germ = match &config.germ {
        GermSource::Preset(name) => {
            let c = germ_from_profile(&profile_preset(name)?, 0.0, max_freq)?;
            germ_from_curvature_2d(&c, config.jet_order(), max_freq)?
        }
        GermSource::File { contents, .. } => MetricGerm::from_json_str(contents, max_freq)?,
    };
    if germ.max_jet_order() < config.jet_order() {
        return Err(Error::InsufficientJets {
            needed: config.jet_order() as usize,
            available: germ.max_jet_order() as usize,
        });
    }
    Ok(germ)
}

/// Executes one command. `Err` is reserved for malformed input; computational
/// failures become failing checks.
pub fn run(config: &RunConfig) -> Result<Report> {
    let outcome = match config.command {
        Command::Compute => compute(config),
        Command::Validate => validate(config),
        Command::OracleSpectral => oracle_spectral(config),
        Command::OracleDynamics => oracle_dynamics(config),
        Command::Suite => Ok(suite(config)),
    };
    match outcome {
        Ok((body, checks)) => Ok(Report {
            config: config.clone(),
            body,
            checks,
        }),
        Err(e) if is_input_error(&e) => Err(e),
        Err(e) => Ok(Report {
            config: config.clone(),
            body: json!({ "error": e.to_string() }),
            checks: vec![Check::failed(error_name(&e), e.to_string())],
        }),
    }
}

fn error_name(e: &Error) -> &'static str {
    match e {
        Error::Resonance { .. } | Error::NearResonance(_) => "resonance",
        Error::NotElliptic(_) | Error::NonElliptic { .. } | Error::Degenerate { .. } => "ellipticity",
        Error::UnsupportedHolonomy => "holonomy",
        Error::Unconverged(_) | Error::IntegrationFailure(_) => "convergence",
        Error::FitFailure(_) => "fit",
        _ => "pipeline",
    }
}

type Outcome = Result<(Value, Vec<Check>)>;

/// Normal form and wave invariants of one germ.
pub struct Computation {
    pub frame: JacobiFrame,
    pub sigma: usize,
    pub scnf: ScnfResult,
    pub qbnf: QbnfResult,
}

pub fn compute_germ(g: &MetricGerm, order: usize, resonance_tol: f64) -> Result<Computation> {
    let frame = frame_from_germ(g, resonance_tol)?;
    let sigma = morse_index(g)?;
    let ladder = build_scaled_terms(g, 4 + 2 * order as u32)?;
    let model = conjugate_to_model(&ladder, &frame)?;
    let scnf = scnf_iterate(&model, order, resonance_tol)?;
    let qbnf = qbnf_assemble(&scnf)?;
    Ok(Computation {
        frame,
        sigma,
        scnf,
        qbnf,
    })
}

fn coefficient_list(list: &[(Monomial, Complex64)]) -> Vec<Value> {
    list.iter()
        .map(|(m, c)| json!({ "monomial": m.label(), "re": c.re, "im": c.im }))
        .collect()
}

fn normal_form_checks(c: &Computation, checks: &mut Vec<Check>) {
    for (k, f) in c.scnf.f.iter().enumerate() {
        checks.push(Check::at_most(format!("realness f_{k}"), max_imaginary(f), 1e-8));
        checks.push(Check::at_most(format!("diagonal f_{k}"), normal_form_defect(f), 1e-8));
        let deg = action_degree(f) as f64;
        checks.push(Check::at_most(format!("degree bound f_{k}"), deg, (k + 2) as f64));
    }
    if c.frame.dim() == 1 {
        let quad = c.scnf.f[0].constant_coefficient(&Monomial::new(vec![1], vec![1]));
        checks.push(Check::at_most("vanishing |z|^2 in f_0", quad.norm(), 1e-8));
    }
}

fn compute(config: &RunConfig) -> Outcome {
    let g = load_germ(config)?;
    let c = compute_germ(&g, config.order, config.resonance_tol)?;
    let mut checks = vec![Check::at_most("frame wronskian", c.frame.wronskian_defect(), 1e-9)];
    normal_form_checks(&c, &mut checks);
    let birkhoff: Vec<Value> = (0..=config.order)
        .map(|k| json!({ "k": k, "coefficients": coefficient_list(&c.qbnf.b(k)) }))
        .collect();
    let waves: Vec<Value> = (0..=config.order)
        .map(|k| wave_invariant(&c.qbnf, k, &c.frame, c.sigma).map(|w| w.to_json()))
        .collect::<Result<_>>()?;
    let body = json!({
        "alpha": c.frame.alpha(),
        "lifted_rotation": c.frame.lifted_rotation,
        "L": g.length(),
        "morse_index": c.sigma,
        "resonance_witness": c.frame.floquet.resonance_witness,
        "normal_form": c.scnf.to_json(),
        "qbnf": c.qbnf.to_json(),
        "birkhoff": birkhoff,
        "wave_invariants": waves,
    });
    Ok((body, checks))
}

fn validate(config: &RunConfig) -> Outcome {
    let g = load_germ(config)?;
    let diag = g.validate();
    let mut checks: Vec<Check> = diag
        .violations
        .iter()
        .map(|v| Check::failed(v.name.clone(), v.detail.clone()))
        .collect();
    let m = integrate_monodromy(&g)?;
    checks.push(Check::at_most("monodromy symplecticity", m.symplectic_defect(), 1e-9));
    let mut body = json!({ "germ": diag, "monodromy_steps": m.steps });
    match frame_from_germ(&g, config.resonance_tol) {
        Ok(fr) => {
            checks.push(Check::at_most("frame wronskian", fr.wronskian_defect(), 1e-9));
            checks.push(Check::at_most("frame quasi-periodicity", fr.quasi_periodicity_defect(), 1e-8));
            body["alpha"] = json!(fr.alpha());
            body["lifted_rotation"] = json!(fr.lifted_rotation);
            body["resonance_witness"] = json!(fr.floquet.resonance_witness);
            body["morse_index"] = json!(morse_index(&g)?);
        }
        Err(e) => checks.push(Check::failed(error_name(&e), e.to_string())),
    }
    Ok((body, checks))
}

fn preset_only(config: &RunConfig) -> Result<Profile> {
    match &config.germ {
        GermSource::Preset(name) => profile_preset(name),
        GermSource::File { .. } => Err(Error::MalformedInput(format!(
            "{} needs a surface-of-revolution preset",
            config.command.name()
        ))),
    }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Eigenvalue ladders of a preset against the engine's `p₁`.
pub fn spectral_comparison(profile: &Profile, max_freq: i64, resonance_tol: f64) -> Outcome {
    let c = germ_from_profile(profile, 0.0, max_freq)?;
    let g = germ_from_curvature_2d(&c, 4, max_freq)?;
    let comp = compute_germ(&g, 0, resonance_tol)?;
    let engine = spectral_function(&comp.qbnf.p[0])?;
    let ladders = rev_surface_eigenvalues(profile, &SPECTRAL_KS, 1, Mesh::default(), 1e-3)?;
    let fits = quasimode_fit(&ladders, comp.frame.lifted_rotation, c.length, 1)?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for fit in &fits {
        let predicted = engine.eval(&[fit.q as f64 + 0.5]).re;
        let rel = relative(fit.p1, predicted);
        checks.push(
            Check::at_most(format!("spectral p1 q={}", fit.q), rel, 0.05)
                .with_detail(format!("fitted {:.6e}, engine {:.6e}", fit.p1, predicted)),
        );
        let mut row = fit.to_json();
        row["engine_p1"] = json!(predicted);
        rows.push(row);
    }
    let body = json!({
        "alpha": comp.frame.alpha(),
        "lifted_rotation": comp.frame.lifted_rotation,
        "L": c.length,
        "ks": SPECTRAL_KS,
        "ladders": ladders.iter().map(|l| l.to_json()).collect::<Vec<_>>(),
        "fits": rows,
    });
    Ok((body, checks))
}

fn oracle_spectral(config: &RunConfig) -> Outcome {
    spectral_comparison(&preset_only(config)?, config.max_freq(), config.resonance_tol)
}

/// Classical twist, quantum top coefficient and flow twist of a germ.
pub fn dynamics_comparison(g: &MetricGerm, resonance_tol: f64) -> Outcome {
    let frame = frame_from_germ(g, resonance_tol)?;
    let classical = classical_normal_form(g, &frame, 0, resonance_tol)?;
    let comp = compute_germ(g, 0, resonance_tol)?;
    let quantum = action_hessian(&comp.qbnf.p[0]);
    let flow = twist_from_flow(g, &default_fan())?;
    let (tc, tq) = (classical.twist[(0, 0)], quantum[(0, 0)]);
    let checks = vec![
        Check::at_most("classical vs quantum twist", relative(tc, tq), 1e-6),
        Check::at_most("flow vs classical twist", relative(flow.twist, tc), 5e-3),
        Check::at_most("flow vs quantum twist", relative(flow.twist, tq), 5e-3),
        Check::at_most(
            "flow rotation at zero action",
            relative(flow.rotation_at_zero, frame.lifted_rotation),
            1e-6,
        ),
    ];
    let samples: Vec<Value> = flow
        .samples
        .iter()
        .map(|s| json!({ "action": s.action, "period": s.period, "rotation": s.rotation }))
        .collect();
    let body = json!({
        "alpha": frame.alpha(),
        "lifted_rotation": frame.lifted_rotation,
        "classical": classical.to_json(),
        "quantum_twist": tq,
        "flow": {
            "twist": flow.twist,
            "rotation_at_zero": flow.rotation_at_zero,
            "residual": flow.residual,
            "samples": samples,
        },
    });
    Ok((body, checks))
}

fn oracle_dynamics(config: &RunConfig) -> Outcome {
    let g = load_germ(config)?;
    dynamics_comparison(&g, config.resonance_tol)
}

fn random_symbol(rng: &mut rand_chacha::ChaCha8Rng) -> WeylPolynomial {
    let mut p = WeylPolynomial::zero(1, 1.0, 0);
    for m in 0..=4u16 {
        for n in m..=(4 - m) {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let c = if m == n { Complex64::new(c.re, 0.0) } else { c };
            p = p.add(&WeylPolynomial::monomial(1, 1.0, 0, Monomial::new(vec![m], vec![n]), c));
            if m != n {
                let mono = Monomial::new(vec![n], vec![m]);
                p = p.add(&WeylPolynomial::monomial(1, 1.0, 0, mono, c.conj()));
            }
        }
    }
    p
}

fn symbol_suite(seed: u64) -> Vec<Check> {
    let mut rng = rng_from_seed(seed);
    let mut worst: f64 = 0.0;
    let mut adjoint: f64 = 0.0;
    for _ in 0..SUITE_GERMS {
        let (a, b, c) = (random_symbol(&mut rng), random_symbol(&mut rng), random_symbol(&mut rng));
        let left = moyal_product(&moyal_product(&a, &b).unwrap(), &c).unwrap();
        let right = moyal_product(&a, &moyal_product(&b, &c).unwrap()).unwrap();
        worst = worst.max(left.distance(&right) / left.max_abs().max(1.0));
        // (a#b)* = b*#a*
        let ab = moyal_product(&a, &b).unwrap().adjoint();
        let ba = moyal_product(&b.adjoint(), &a.adjoint()).unwrap();
        adjoint = adjoint.max(ab.distance(&ba));
    }
    let z = WeylPolynomial::z(1, 1.0, 0, 0);
    let zbar = WeylPolynomial::zbar(1, 1.0, 0, 0);
    let bracket = commutator(&z, &zbar).unwrap();
    let two = WeylPolynomial::constant(1, 1.0, 0, Complex64::new(2.0, 0.0));
    vec![
        Check::at_most("symbol associativity", worst, 1e-10),
        Check::at_most("symbol adjoint", adjoint, 1e-10),
        Check::at_most("symbol [z, zbar] = 2", bracket.distance(&two), 0.0),
    ]
}

fn jacobi_suite(seed: u64) -> Vec<Check> {
    let mut rng = rng_from_seed(seed);
    let mut worst: f64 = 0.0;
    for n in [1usize, 2] {
        for _ in 0..SUITE_GERMS {
            let k = random_jacobi_matrix(&mut rng, n, std::f64::consts::TAU, 3, 16);
            let g = MetricGerm::from_jacobi_matrix(std::f64::consts::TAU, &k, 2, 16);
            match integrate_monodromy(&g) {
                Ok(m) => worst = worst.max(m.symplectic_defect()),
                Err(e) => return vec![Check::failed("jacobi monodromy", e.to_string())],
            }
        }
    }
    vec![Check::at_most("jacobi symplecticity", worst, 1e-9)]
}

fn germ_suite(seed: u64, resonance_tol: f64) -> Vec<Check> {
    let mut rng = rng_from_seed(seed);
    let spec = RandomGermSpec::default();
    let mut checks = Vec::new();
    for i in 0..SUITE_GERMS {
        let (_, g, fr) = random_elliptic_germ_2d(&mut rng, &spec, resonance_tol);
        let result = compute_germ(&g, 0, resonance_tol).and_then(|c| {
            let direct = f0_direct_dim2(&g, &fr)?;
            Ok((c, direct))
        });
        match result {
            Ok((c, direct)) => {
                let f0 = &c.scnf.f[0];
                let quad = f0.constant_coefficient(&Monomial::new(vec![1], vec![1]));
                let scale = f0.max_abs().max(1.0);
                checks.push(Check::at_most(format!("germ {i}: vanishing |z|^2"), quad.norm(), 1e-8));
                checks.push(Check::at_most(
                    format!("germ {i}: two-path f_0"),
                    f0.distance(&direct) / scale,
                    1e-8,
                ));
                checks.push(Check::at_most(format!("germ {i}: realness"), max_imaginary(f0), 1e-8));
                checks.push(Check::at_most(
                    format!("germ {i}: degree bound"),
                    action_degree(f0) as f64,
                    2.0,
                ));
            }
            Err(e) => checks.push(Check::failed(format!("germ {i}"), e.to_string())),
        }
    }
    checks
}

/// Randomized property suites; each runs on its own thread with its own stream.
fn suite(config: &RunConfig) -> (Value, Vec<Check>) {
    let seed = config.seed;
    let tol = config.resonance_tol;
    let (symbol, jacobi, germ) = std::thread::scope(|scope| {
        let a = scope.spawn(move || symbol_suite(seed));
        let b = scope.spawn(move || jacobi_suite(seed.wrapping_add(1)));
        let c = scope.spawn(move || germ_suite(seed.wrapping_add(2), tol));
        (
            a.join().expect("symbol suite"),
            b.join().expect("jacobi suite"),
            c.join().expect("germ suite"),
        )
    });
    let body = json!({
        "suites": {
            "symbol": symbol.len(),
            "jacobi": jacobi.len(),
            "germ": germ.len(),
        },
        "germs_per_suite": SUITE_GERMS,
    });
    let checks = symbol.into_iter().chain(jacobi).chain(germ).collect();
    (body, checks)
}
