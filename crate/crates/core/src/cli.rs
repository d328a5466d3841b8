//! Command-line front end: input parsing, dispatch and report rendering.

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::dual::{commutant_dimension, DualParameter, RationalDual};
use crate::gabor::{density_predicate, frame_grid, frame_sum, gabor_admissibility_report, zak, zak_intertwine, SampledSignal};
use crate::group::{classify, classify_irrational, GroupKind, GroupSpec};
use crate::heisenberg::{irrational_report, IrrationalCheckConfig};
use crate::lattice::Lattice;
use crate::matrix::{Matrix, RationalMatrix};
use crate::plancherel::{integer_spectrum, left_regular_report, plancherel_report};
use crate::scalar::{format_rational, int, parse_rational, rat, to_f64, Integer, Rational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    Analysis(String),
}

macro_rules! analysis_err {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Analysis(e.to_string())
            }
        }
    )*};
}

analysis_err!(
    crate::group::GroupError,
    crate::dual::DualError,
    crate::plancherel::PlancherelError,
    crate::gabor::GaborError,
    crate::heisenberg::HeisenbergError,
    crate::lattice::LatticeError
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Kind of the group and order of its commutator subgroup
    Classify,
    /// The lattice A with AZ^d = B^{-T}Z^d ∩ Z^d and the quotient Z^d/AZ^d
    Lattice,
    /// Stabilizers, orbits, little groups and irreducibility checks
    Dual,
    /// Plancherel atoms and the Plancherel identity on random functions
    Plancherel,
    /// Gabor admissibility, Zak transform and frame-sum checks
    Gabor,
    /// The irrational case: decomposition report and lattice representation checks
    Heisenberg,
    /// Every applicable analysis
    Full,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "tfharmonic", version, about = "Representation theory of time-frequency groups")]
pub struct AnalysisRequest {
    #[command(subcommand)]
    pub command: Command,
    /// Inline JSON: {"d": 2, "B": [["1/2","1/5"],["2/3","-3/4"]]}
    #[arg(long, global = true)]
    pub spec: Option<String>,
    /// Path to a JSON file with the same schema as --spec
    #[arg(long, global = true)]
    pub input: Option<String>,
    /// Irrational modulation step for d = 1
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, global = true, default_value_t = 16)]
    pub truncation: usize,
    #[arg(long, global = true, default_value_t = 32)]
    pub grid: usize,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Window for the gabor command: "indicator" or "gaussian:<width>"
    #[arg(long, global = true, default_value = "gaussian:1")]
    pub signal: String,
}

impl AnalysisRequest {
    pub fn new(command: Command) -> Self {
        AnalysisRequest {
            command,
            spec: None,
            input: None,
            alpha: None,
            json: true,
            seed: 0,
            trials: 20,
            truncation: 16,
            grid: 32,
            tolerance: 1e-9,
            threads: None,
            signal: "gaussian:1".into(),
        }
    }
}

/// Result of a run: exit code and the text for stdout or stderr.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn parse_entry(v: &Value) -> Result<Rational, CliError> {
    match v {
        Value::String(s) => parse_rational(s).ok_or_else(|| CliError::Input(format!("not an exact rational: {s:?}"))),
        Value::Number(n) if n.is_i64() => Ok(rat(n.as_i64().unwrap(), 1)),
        Value::Number(n) => Err(CliError::Input(format!("floating point entry {n} in B; write it as a \"p/q\" string"))),
        other => Err(CliError::Input(format!("bad matrix entry {other}"))),
    }
}

/// Parses `{"d": .., "B": ..}` or `{"d": 1, "alpha": {"irrational": true, "value": ..}}`.
pub fn parse_spec(text: &str) -> Result<GroupSpec, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed JSON: {e}")))?;
    let d = v.get("d").and_then(Value::as_u64).ok_or_else(|| CliError::Input("missing integer field \"d\"".into()))? as usize;
    if d == 0 {
        return Err(CliError::Input("d must be positive".into()));
    }
    if let Some(alpha) = v.get("alpha") {
        if alpha.get("irrational").and_then(Value::as_bool) != Some(true) {
            return Err(CliError::Input("alpha requires \"irrational\": true; rational steps go in \"B\"".into()));
        }
        let value = alpha.get("value").and_then(Value::as_f64).ok_or_else(|| CliError::Input("alpha.value must be a number".into()))?;
        return classify_irrational(d, value).map_err(|e| CliError::Input(e.to_string()));
    }
    let b = v.get("B").ok_or_else(|| CliError::Input("missing field \"B\"".into()))?;
    let rows: Vec<Vec<Rational>> = match b {
        Value::Array(rows) if d == 1 && rows.len() == 1 && !rows[0].is_array() => vec![vec![parse_entry(&rows[0])?]],
        Value::Array(rows) => rows
            .iter()
            .map(|r| match r {
                Value::Array(xs) => xs.iter().map(parse_entry).collect(),
                _ => Err(CliError::Input("B must be a list of rows".into())),
            })
            .collect::<Result<_, _>>()?,
        other => vec![vec![parse_entry(other)?]],
    };
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(CliError::Input(format!("B must be {d}x{d}")));
    }
    classify(Matrix::from_rows(rows)).map_err(|e| CliError::Input(e.to_string()))
}

fn load_spec(req: &AnalysisRequest) -> Result<GroupSpec, CliError> {
    let sources = [req.spec.is_some(), req.input.is_some(), req.alpha.is_some()].iter().filter(|x| **x).count();
    if sources != 1 {
        return Err(CliError::Input("give exactly one of --spec, --input, --alpha".into()));
    }
    if let Some(a) = req.alpha {
        return classify_irrational(1, a).map_err(|e| CliError::Input(e.to_string()));
    }
    let text = match (&req.spec, &req.input) {
        (Some(s), _) => s.clone(),
        (_, Some(p)) => std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{p}: {e}")))?,
        _ => unreachable!(),
    };
    parse_spec(&text)
}

fn matrix_json(m: &RationalMatrix) -> Value {
    Value::Array(m.to_rows().iter().map(|r| Value::Array(r.iter().map(|x| Value::String(format_rational(x))).collect())).collect())
}

fn int_matrix_json(m: &Matrix<Integer>) -> Value {
    Value::Array(m.to_rows().iter().map(|r| Value::Array(r.iter().map(|x| Value::String(x.to_string())).collect())).collect())
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report serializes")
}

/// A named pass/fail line in the aggregated report.
#[derive(Debug, Clone, Serialize)]
struct Check {
    name: String,
    passed: bool,
    detail: String,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, detail: detail.into() }
}

struct Section {
    report: Value,
    checks: Vec<Check>,
}

fn classify_section(spec: &GroupSpec) -> Result<Section, CliError> {
    let mut report = json!({
        "kind": spec.kind().name(),
        "d": spec.dim(),
        "m": spec.m(),
    });
    match spec.kind() {
        GroupKind::IrrationalD1 => {
            report["alpha"] = json!(spec.alpha());
            report["commutator"] = json!("infinite, dense in the circle");
        }
        _ => {
            report["B"] = matrix_json(spec.b()?);
            report["detB"] = json!(format_rational(&spec.b()?.det()));
            report["commutator"] = json!(format!("Z_{}", spec.m().unwrap()));
        }
    }
    Ok(Section { report, checks: Vec::new() })
}

fn lattice_section(spec: &GroupSpec) -> Result<Section, CliError> {
    let n = spec.normal_subgroup()?;
    let q = n.lattice().quotient_structure()?;
    let det = n.abs_det();
    let dual_b = spec.dual_modulation_lattice()?;
    let mut checks = vec![check("index equals |det A|", Integer::from(q.order()) == det, format!("{} cosets", q.order()))];
    let inside = n.lattice().basis().columns().iter().all(|c| dual_b.contains(c) && Lattice::standard(spec.dim()).contains(c));
    checks.push(check("AZ^d inside B^{-T}Z^d and Z^d", inside, ""));
    let report = json!({
        "A": int_matrix_json(n.a()),
        "detA": det.to_string(),
        "BInvT": matrix_json(spec.b_inv_tr()?),
        "Lambda1": matrix_json(n.lattice().dual().basis()),
        "elementaryDivisors": q.elementary_divisors().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
    });
    Ok(Section { report, checks })
}

fn random_gamma(rng: &mut ChaCha8Rng, lattice: &Lattice) -> Vec<Rational> {
    let coords: Vec<Rational> = (0..lattice.dim()).map(|_| Rational::new(int(rng.random_range(0..12)), int(12))).collect();
    lattice.basis().mul_vec(&coords)
}

fn dual_section(spec: &GroupSpec, req: &AnalysisRequest, rng: &mut ChaCha8Rng) -> Result<Section, CliError> {
    let dual = RationalDual::new(spec)?;
    let det_a = dual.abs_det_a();
    let gens = spec.generators()?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut all_volume = true;
    let mut all_hom = true;
    let mut all_irred = true;
    let mut all_central = true;
    for stab in dual.stabilizers()? {
        let vol_ok = dual.lambda2().volume() == Rational::from_integer(int(stab.orbit_size as i64)) * stab.e_sigma.volume();
        all_volume &= vol_ok;
        let zetas = stab.little_group.characters();
        let zeta = zetas[rng.random_range(0..zetas.len())].clone();
        let gamma1 = random_gamma(rng, dual.lambda1());
        let gamma2 = stab.e_sigma.basis().mul_vec(&(0..spec.dim()).map(|_| Rational::new(int(rng.random_range(0..12)), int(12))).collect::<Vec<_>>());
        let param = DualParameter { gamma1, gamma2, sigma: stab.sigma, zeta };
        let rep = dual.representation_with(&stab, &param)?;
        let mats: Vec<_> = gens.iter().map(|g| rep.matrix(g)).collect::<Result<_, _>>()?;
        let commutant = commutant_dimension(&mats);
        all_irred &= commutant == 1;
        let tau = gens.last().unwrap();
        let sigma_phase = Rational::new(int(stab.sigma as i64), int(dual.m() as i64));
        all_central &= rep.matrix(tau)? == crate::dual::MonomialMatrix::scalar(rep.dim(), sigma_phase);
        for _ in 0..req.trials {
            let g = spec.random_element(rng, 5)?;
            let h = spec.random_element(rng, 5)?;
            let lhs = rep.matrix(&spec.multiply(&g, &h)?)?;
            let rhs = rep.matrix(&g)?.mul(&rep.matrix(&h)?);
            all_hom &= lhs == rhs && lhs.is_unitary();
        }
        rows.push(json!({
            "sigma": stab.sigma,
            "ASigma": int_matrix_json(&stab.a_sigma),
            "orbitSize": stab.orbit_size,
            "ESigmaVolume": format_rational(&stab.e_sigma.volume()),
            "zetaCount": stab.little_group.order().to_string(),
            "commutantDimension": commutant,
        }));
        let divides = (&det_a % Integer::from(stab.orbit_size)) == Integer::from(0);
        if !divides {
            checks.push(check("dimension divides |det A|", false, format!("sigma {}", stab.sigma)));
        }
    }
    checks.push(check("vol(Lambda2) = orbit size * vol(E_sigma)", all_volume, ""));
    checks.push(check("induced representations are homomorphisms", all_hom, format!("{} pairs per sigma", req.trials)));
    checks.push(check("central generator acts by e^{2 pi i sigma/m}", all_central, ""));
    checks.push(check("commutant dimension 1", all_irred, ""));
    Ok(Section { report: json!({ "m": dual.m(), "detA": det_a.to_string(), "stabilizers": rows }), checks })
}

fn plancherel_section(spec: &GroupSpec, req: &AnalysisRequest, rng: &mut ChaCha8Rng) -> Result<Section, CliError> {
    let support = if spec.dim() == 1 { 30 } else { 10 };
    let report = plancherel_report(spec, rng, req.trials, support, req.tolerance)?;
    let mut checks = vec![
        check(
            "Plancherel identity",
            report.plancherel_check.max_rel_error < req.tolerance,
            format!("max relative error {:e}", report.plancherel_check.max_rel_error),
        ),
        check(
            "polarized identity",
            report.polarized_check.max_rel_error < req.tolerance,
            format!("max relative error {:e}", report.polarized_check.max_rel_error),
        ),
    ];
    let mut value = to_value(&report);
    if spec.kind() == GroupKind::Integer {
        let ispec = integer_spectrum(spec, rng, req.trials.min(5), support)?;
        checks.push(check("integer spectrum identity", ispec.plancherel_check.max_rel_error < req.tolerance, ""));
        value["integerSpectrum"] = to_value(&ispec);
    }
    value["leftRegular"] = to_value(&left_regular_report(spec)?);
    Ok(Section { report: value, checks })
}

fn gabor_section(spec: &GroupSpec, req: &AnalysisRequest, rng: &mut ChaCha8Rng) -> Result<Section, CliError> {
    let adm = gabor_admissibility_report(spec)?;
    let mut value = to_value(&adm);
    let mut checks = Vec::new();
    let d = spec.dim();
    let b = spec.b()?;
    value["density"] = to_value(&density_predicate(&Matrix::identity(d), b)?);
    if spec.kind() == GroupKind::Integer && d <= 2 {
        let (grid, extent) = if d == 1 { (req.grid, req.truncation.max(8)) } else { (req.grid.min(16), req.truncation.clamp(4, 8)) };
        let f = SampledSignal::<f64>::named(&req.signal, d, grid, extent)?;
        let z = zak(&f, grid, 1e-6)?;
        let mut worst: f64 = 0.0;
        for _ in 0..req.trials {
            let k: Vec<Integer> = (0..d).map(|_| int(rng.random_range(-3..=3))).collect();
            let l: Vec<Integer> = (0..d).map(|_| int(rng.random_range(-3..=3))).collect();
            worst = worst.max(zak_intertwine(spec, &f, &k, &l, grid, 1e-6)?);
        }
        checks.push(check("Zak intertwining", worst < 1e-10, format!("max error {worst:e}")));
        let norm_gap = (z.norm_sqr() - f.norm_sqr()).abs();
        checks.push(check("Zak norm preservation", norm_gap < 1e-6, format!("gap {norm_gap:e}")));
        value["zak"] = json!({ "grid": grid, "truncation": extent, "maxIntertwiningError": worst, "normGap": norm_gap });
    }
    if d == 1 {
        // For |b| <= 1 the window sqrt|b| 1_[0,1) gives a Parseval frame
        // M_{bk} T_n g. Above density one h = e^{2πix}·envelope sits in a
        // band the modulations miss, so the sum falls well short of ‖h‖².
        let r = req.truncation;
        let grid = req.grid.max(frame_grid(b, r));
        let vol = to_f64(&spec.abs_det_b()?);
        let g = SampledSignal::<f64>::indicator(1, grid, r + 4)?.scale(num_complex::Complex64::new(vol.min(1.0).sqrt(), 0.0));
        let c: f64 = rng.random_range(-1.0..1.0);
        let mut h = SampledSignal::<f64>::gaussian(1, grid, r + 4, 4.0, &[c])?;
        if vol > 1.0 {
            h = h.modulate(&[rat(1, 1)]);
        }
        let fs = frame_sum(&g, &h, &Matrix::identity(1), b, r, 1e-2)?;
        let ratio = fs.value / h.norm_sqr();
        if vol == 1.0 {
            checks.push(check("indicator window is Parseval", (ratio - 1.0).abs() <= 0.01, format!("ratio {ratio}")));
        } else if vol < 1.0 {
            checks.push(check("scaled indicator window is Parseval", (ratio - 1.0).abs() <= 0.02, format!("ratio {ratio}")));
        } else {
            checks.push(check("frame deficient on an uncovered band", ratio < 0.5, format!("ratio {ratio}")));
        }
        value["frameSum"] = json!({ "R": r, "grid": grid, "ratio": ratio, "boundaryShell": fs.boundary_shell });
    }
    Ok(Section { report: value, checks })
}

fn heisenberg_section(spec: &GroupSpec, req: &AnalysisRequest, rng: &mut ChaCha8Rng) -> Result<Section, CliError> {
    let cfg = IrrationalCheckConfig { trials: req.trials, ..Default::default() };
    let report = irrational_report(spec, rng, cfg)?;
    let checks = report.checks.iter().map(|c| check(&c.name, c.passed, format!("max error {:e}", c.max_error))).collect();
    Ok(Section { report: to_value(&report), checks })
}

fn section(cmd: Command, spec: &GroupSpec, req: &AnalysisRequest, rng: &mut ChaCha8Rng) -> Result<Section, CliError> {
    match cmd {
        Command::Classify => classify_section(spec),
        Command::Lattice => lattice_section(spec),
        Command::Dual => dual_section(spec, req, rng),
        Command::Plancherel => plancherel_section(spec, req, rng),
        Command::Gabor => gabor_section(spec, req, rng),
        Command::Heisenberg => heisenberg_section(spec, req, rng),
        Command::Full => unreachable!(),
    }
}

fn name(cmd: Command) -> &'static str {
    match cmd {
        Command::Classify => "classify",
        Command::Lattice => "lattice",
        Command::Dual => "dual",
        Command::Plancherel => "plancherel",
        Command::Gabor => "gabor",
        Command::Heisenberg => "heisenberg",
        Command::Full => "full",
    }
}

fn applicable(kind: GroupKind) -> &'static [Command] {
    match kind {
        GroupKind::IrrationalD1 => &[Command::Classify, Command::Heisenberg],
        _ => &[Command::Classify, Command::Lattice, Command::Dual, Command::Plancherel, Command::Gabor],
    }
}

fn render_text(v: &Value, prefix: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                render_text(x, &p, out);
            }
        }
        Value::Array(xs) if xs.iter().any(|x| x.is_object()) => {
            for (i, x) in xs.iter().enumerate() {
                render_text(x, &format!("{prefix}[{i}]"), out);
            }
        }
        other => {
            out.push_str(&format!("{prefix:<48} {other}\n"));
        }
    }
}

fn execute(req: &AnalysisRequest) -> Result<(Value, bool), CliError> {
    let spec = load_spec(req)?;
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let cmds: Vec<Command> = if req.command == Command::Full { applicable(spec.kind()).to_vec() } else { vec![req.command] };
    if req.command != Command::Full && !applicable(spec.kind()).contains(&req.command) {
        return Err(CliError::Input(format!("{} does not apply to {} groups", name(req.command), spec.kind().name())));
    }
    let mut report = serde_json::Map::new();
    let mut checks = Vec::new();
    for cmd in cmds {
        let s = section(cmd, &spec, req, &mut rng)?;
        report.insert(name(cmd).into(), s.report);
        checks.extend(s.checks.into_iter().map(|c| Check { name: format!("{}: {}", name(cmd), c.name), ..c }));
    }
    let passed = checks.iter().all(|c| c.passed);
    let mut top = serde_json::Map::new();
    top.insert("command".into(), json!(name(req.command)));
    top.insert("seed".into(), json!(req.seed));
    if req.command == Command::Full || report.len() > 1 {
        top.insert("report".into(), Value::Object(report));
    } else {
        top.insert("report".into(), report.into_iter().next().map(|(_, v)| v).unwrap_or(Value::Null));
    }
    top.insert("checks".into(), to_value(&checks));
    top.insert("passed".into(), json!(passed));
    Ok((Value::Object(top), passed))
}

/// Runs one request. Verification failures give exit code 2, input errors 1.
pub fn run(req: &AnalysisRequest) -> Outcome {
    if let Some(n) = req.threads {
        // Fails harmlessly if a pool already exists in this process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match execute(req) {
        Ok((value, passed)) => {
            let stdout = if req.json {
                serde_json::to_string_pretty(&value).expect("json") + "\n"
            } else {
                let mut s = String::new();
                render_text(&value, "", &mut s);
                s
            };
            Outcome { code: if passed { EXIT_OK } else { EXIT_VERIFICATION }, stdout, stderr: String::new() }
        }
        Err(CliError::Input(msg)) => Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: format!("error: {msg}\n") },
        Err(CliError::Analysis(msg)) => Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: format!("error: {msg}\n") },
    }
}
