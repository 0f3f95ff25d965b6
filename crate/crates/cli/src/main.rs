//! Command-line front end: each experiment is a subcommand emitting a JSON
//! report (sorted keys, decimal strings) and, where a series is produced, a
//! CSV. Identical invocations produce byte-identical output.

mod expr;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use diagorbit::arith::{
    big, ArithError, BigReal, Integer, IntPoly, Rational, Scalar, DEFAULT_PRECISION,
};
use diagorbit::dioph::{gdp_probe, propc1_search, propc2_search, DiophError, RecordTrace, Witness};
use diagorbit::flows::{
    cone_construct, trajectory, trajectory_csv, FlowError, LieElement, TracelessDiag,
    TrajectorySample,
};
use diagorbit::irregular::{
    make_zv, omega_experiment, Coord, IrregularError, OmegaParams, VParams,
};
use diagorbit::lattice::{LatticeBasis, LatticeError};
use diagorbit::linalg::RMat;
use diagorbit::numberfield::{
    is_cm, scalar_parabolic_factor, torus_orbit_compactness, unit_search, CmVerdict,
    CompactnessVerdict, FieldError, KLattice, NumberField,
};

// ---------------------------------------------------------------------------
// Errors and exit codes
// ---------------------------------------------------------------------------

/// Exit codes: 0 success, 2 precondition violations, 3 precision
/// exhaustion, 64 malformed flags.
struct CliError {
    code: u8,
    msg: String,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError {
        code: 64,
        msg: msg.into(),
    }
}

impl From<ArithError> for CliError {
    fn from(e: ArithError) -> Self {
        let code = match &e {
            ArithError::RootCertification(_) => 3,
            _ => 2,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        CliError {
            code: 2,
            msg: e.to_string(),
        }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        let code = match &e {
            FlowError::UncertifiedInput(_) => 3,
            FlowError::Arith(ArithError::RootCertification(_)) => 3,
            _ => 2,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        let code = match &e {
            FieldError::Arith(ArithError::RootCertification(_)) => 3,
            _ => 2,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<IrregularError> for CliError {
    fn from(e: IrregularError) -> Self {
        let code = match &e {
            IrregularError::PrecisionExhausted(_) | IrregularError::ToleranceAmbiguous { .. } => 3,
            _ => 2,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<DiophError> for CliError {
    fn from(e: DiophError) -> Self {
        let code = match &e {
            DiophError::Numeric(_) => 3,
            DiophError::Arith(ArithError::RootCertification(_)) => 3,
            _ => 2,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: 2,
            msg: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

// ---------------------------------------------------------------------------
// Flags
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
struct Common {
    /// Working precision in bits (≥ 64); DIAGORBIT_PRECISION overrides the
    /// default of 256.
    #[arg(long)]
    precision: Option<u32>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the CSV series (when the subcommand produces one) here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Seed for randomized grids (echoed into the report).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Parser, Debug)]
#[command(name = "diagorbit", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Geometric embedding of a number-field module as a unit-covolume lattice.
    Embed {
        /// Descending integer coefficients of the defining polynomial, e.g. 1,0,0,-2.
        #[arg(long)]
        minpoly: String,
        /// "identity" for the power order, or basis elements "a0,a1,..;b0,b1,..".
        #[arg(long, default_value = "identity")]
        basis: String,
        #[command(flatten)]
        common: Common,
    },
    /// Bounded search for units of the module's stabilizer order.
    Units {
        #[arg(long)]
        minpoly: String,
        #[arg(long, default_value = "identity")]
        basis: String,
        /// Coordinate height bound of the search box.
        #[arg(long, default_value_t = 10)]
        height: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Diagonal flow on the embedded module lattice; systole series.
    TorusOrbit {
        #[arg(long)]
        minpoly: String,
        #[arg(long, default_value = "identity")]
        basis: String,
        /// Rational log-direction entries, e.g. 1,0,-1 (projected traceless).
        #[arg(long)]
        direction: String,
        #[arg(long, default_value_t = 30)]
        tmax: i64,
        /// Samples on [0, tmax]; default 20 per unit time.
        #[arg(long)]
        steps: Option<usize>,
        /// Recurrence threshold on the systole.
        #[arg(long, default_value = "1/10")]
        rho: String,
        #[command(flatten)]
        common: Common,
    },
    /// Cone construction: contracting direction and exact margin for a
    /// nilpotent span.
    Cone {
        /// Basis matrices: entries ',', rows ';', matrices '|'; e.g.
        /// "0,1,1;0,0,0;0,0,0".
        #[arg(long)]
        elements: String,
        #[command(flatten)]
        common: Common,
    },
    /// Diagonal flow on an explicit lattice; systole series.
    Flow {
        /// "standard:d" or exact rational columns "c00,c10,..;c01,c11,..".
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        direction: String,
        #[arg(long, default_value_t = 30)]
        tmax: i64,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value = "1/10")]
        rho: String,
        #[command(flatten)]
        common: Common,
    },
    /// Recurrence/membership experiment along the contracting ray of a
    /// sheared lattice.
    Irregular {
        /// Exact literal, e.g. sqrt2 or root(1,0,0,-2;0).
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        /// Flow family: 1 fixes the third coordinates, 2 the second.
        #[arg(long, default_value_t = 1)]
        family: u8,
        #[arg(long, default_value_t = 20)]
        tmax: i64,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value = "1/10")]
        rho: String,
        /// Membership tolerance (decimal).
        #[arg(long)]
        tol: Option<String>,
        /// Relation-search bound on the modulus.
        #[arg(long, default_value_t = 64)]
        qmax: i64,
        /// Off-ray witness grid runs over (t, s) in {0..grid}².
        #[arg(long, default_value_t = 15)]
        grid: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Record scans for the multiplicative approximation properties.
    Dioph {
        /// c1: |n|·∏⟨n·v_i − γ_i⟩ over 0 < |n| ≤ N.
        /// c2: ∏|n_i|·⟨Σn_i·v_i − γ⟩ over 0 < ∏|n_i| ≤ N.
        #[arg(long)]
        mode: String,
        /// Comma-separated exact literals, e.g. cbrt2,cbrt4.
        #[arg(long)]
        v: String,
        /// Shift: a vector matching --v for c1, a single value for c2.
        #[arg(long, default_value = "0")]
        gamma: String,
        #[arg(long = "N")]
        n: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Grid product probe: search u + w with |∏(u_i + w_i) − target| < eps.
    Gdp {
        /// Build the sheared dual lattice of these exact coordinates…
        #[arg(long)]
        v: Option<String>,
        /// …or use an explicit lattice ("standard:d" or rational columns).
        #[arg(long)]
        lattice: Option<String>,
        /// Shift vector: decimals "0.5,0.5,0.5" or "random" (uses --seed).
        #[arg(long)]
        w: String,
        /// Decimal target, or "pi".
        #[arg(long)]
        target: String,
        #[arg(long)]
        eps: String,
        /// Coefficient box bound against the reduced basis.
        #[arg(long, default_value_t = 100)]
        bound: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Scalar–parabolic–embedding factorization of the first-row matrix of
    /// a field basis.
    Factor {
        #[arg(long)]
        minpoly: String,
        #[arg(long, default_value = "identity")]
        basis: String,
        #[command(flatten)]
        common: Common,
    },
}

// ---------------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------------

fn resolve_precision(c: &Common) -> CliResult<u32> {
    let p = match c.precision {
        Some(p) => p,
        None => match std::env::var("DIAGORBIT_PRECISION") {
            Ok(s) => s
                .trim()
                .parse::<u32>()
                .map_err(|_| usage(format!("bad DIAGORBIT_PRECISION value {s:?}")))?,
            Err(_) => DEFAULT_PRECISION,
        },
    };
    if p < 64 {
        return Err(usage(format!("precision must be at least 64 bits, got {p}")));
    }
    Ok(p)
}

fn parse_i64_list(s: &str, what: &str) -> CliResult<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| usage(format!("bad integer {t:?} in {what}")))
        })
        .collect()
}

fn parse_rational(s: &str, what: &str) -> CliResult<Rational> {
    s.trim()
        .parse::<Rational>()
        .map_err(|_| usage(format!("bad rational {s:?} in {what}")))
}

fn parse_rational_list(s: &str, what: &str) -> CliResult<Vec<Rational>> {
    s.split(',').map(|t| parse_rational(t, what)).collect()
}

fn parse_real(s: &str, prec: u32, what: &str) -> CliResult<BigReal> {
    let parsed = BigReal::parse(s.trim())
        .map_err(|_| usage(format!("bad decimal {s:?} in {what}")))?;
    Ok(BigReal::with_val(prec, parsed))
}

fn parse_scalar_flag(s: &str, what: &str) -> CliResult<Scalar> {
    expr::parse_scalar(s).map_err(|e| usage(format!("bad expression in {what}: {e}")))
}

fn parse_minpoly(s: &str) -> CliResult<IntPoly> {
    let coeffs = parse_i64_list(s, "--minpoly")?;
    Ok(IntPoly::from_descending_i64(&coeffs))
}

fn build_field(minpoly: &str, basis: &str) -> CliResult<(NumberField, KLattice)> {
    let field = NumberField::new(parse_minpoly(minpoly)?)?;
    let kl = if basis == "identity" {
        KLattice::power_order(&field)
    } else {
        let mut elements = Vec::new();
        for part in basis.split(';') {
            let coords = parse_rational_list(part, "--basis")?;
            elements.push(field.element(coords)?);
        }
        KLattice::new(&field, elements)?
    };
    Ok((field, kl))
}

fn parse_lattice(s: &str, prec: u32) -> CliResult<LatticeBasis> {
    if let Some(d) = s.strip_prefix("standard:") {
        let d: usize = d
            .parse()
            .map_err(|_| usage(format!("bad dimension in --lattice {s:?}")))?;
        return Ok(LatticeBasis::standard(d, prec)?);
    }
    let mut cols = Vec::new();
    for part in s.split(';') {
        let col: Vec<Scalar> = parse_rational_list(part, "--lattice")?
            .into_iter()
            .map(Scalar::Rational)
            .collect();
        cols.push(col);
    }
    Ok(LatticeBasis::from_exact_columns(cols, prec)?)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn seeded_unit_reals(seed: u64, count: usize, prec: u32) -> Vec<BigReal> {
    let mut state = seed;
    (0..count)
        .map(|_| {
            let bits = splitmix64(&mut state) >> 11;
            big(prec, bits as f64 / (1u64 << 53) as f64)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// JSON rendering
// ---------------------------------------------------------------------------

fn real_json(x: &BigReal) -> Value {
    json!(x.to_string_radix(10, Some(24)))
}

fn rat_json(q: &Rational) -> Value {
    json!(q.to_string())
}

fn int_json(n: &Integer) -> Value {
    json!(n.to_string())
}

fn rmat_json(m: &RMat) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            let row: Vec<Value> = (0..m.ncols()).map(|j| real_json(m.get(i, j))).collect();
            Value::Array(row)
        })
        .collect();
    Value::Array(rows)
}

fn report(subcommand: &str, inputs: Map<String, Value>, precision: u32, results: Value) -> Value {
    json!({
        "inputs": Value::Object(inputs),
        "precision": precision,
        "results": results,
        "subcommand": subcommand,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn summarize_trajectory(samples: &[TrajectorySample]) -> Value {
    let mut min_sys: Option<(&BigReal, &Rational)> = None;
    let mut max_sys: Option<&BigReal> = None;
    let mut recurrences = 0usize;
    for s in samples {
        if min_sys.map_or(true, |(m, _)| s.systole < *m) {
            min_sys = Some((&s.systole, &s.t));
        }
        if max_sys.map_or(true, |m| s.systole > *m) {
            max_sys = Some(&s.systole);
        }
        if s.recurrence {
            recurrences += 1;
        }
    }
    let (min_val, min_t) = min_sys.expect("trajectory is never empty");
    json!({
        "min_systole": real_json(min_val),
        "min_t": rat_json(min_t),
        "max_systole": real_json(max_sys.expect("nonempty")),
        "recurrence_count": recurrences,
        "samples": samples.len(),
        "final_systole": real_json(&samples.last().expect("nonempty").systole),
    })
}

fn trace_json(trace: &RecordTrace, mode: &str) -> Value {
    let records: Vec<Value> = trace
        .records
        .iter()
        .enumerate()
        .map(|(idx, r)| {
            let witness = match &r.witness {
                Witness::Scalar(n) => int_json(n),
                Witness::Vector(v) => Value::Array(v.iter().map(int_json).collect()),
            };
            json!({
                "rank": idx + 1,
                "witness": witness,
                "value": real_json(&r.value),
                "shift": r.shift.iter().map(real_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "mode": mode,
        "scan_bound": int_json(&trace.scan_bound),
        "record_count": trace.records.len(),
        "records": records,
        "csv": trace.csv(),
    })
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

fn echo(pairs: &[(&str, String)]) -> Map<String, Value> {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert((*k).to_string(), json!(v));
    }
    m
}

fn run(cmd: &Cmd) -> CliResult<(Value, Option<(PathBuf, String)>)> {
    match cmd {
        Cmd::Embed {
            minpoly,
            basis,
            common,
        } => {
            let prec = resolve_precision(common)?;
            let (field, kl) = build_field(minpoly, basis)?;
            let x = field.lattice_from_basis(&kl, prec)?;
            let (len, vec) = x.shortest_vector()?;
            let (r, s) = field.signature();
            let gram = x.exact_gram_det();
            let results = json!({
                "basis": rmat_json(x.columns()),
                "degree": field.degree(),
                "signature": [r, s],
                "discriminant": rat_json(&field.poly_discriminant()),
                "det": real_json(&x.columns().det()),
                "gram_det": gram.as_ref().map(rat_json).unwrap_or(Value::Null),
                "systole": real_json(&len),
                "shortest_coefficients": vec.coords().iter().map(int_json).collect::<Vec<_>>(),
            });
            let inputs = echo(&[("minpoly", minpoly.clone()), ("basis", basis.clone())]);
            Ok((report("embed", inputs, prec, results), None))
        }
        Cmd::Units {
            minpoly,
            basis,
            height,
            common,
        } => {
            let prec = resolve_precision(common)?;
            let (field, kl) = build_field(minpoly, basis)?;
            let units = unit_search(&field, &kl, *height, prec)?;
            let compact = torus_orbit_compactness(&field, &kl, &units);
            let cm = is_cm(&field, &units);
            let generators: Vec<Value> = units
                .generators
                .iter()
                .map(|u| Value::Array(u.coords.iter().map(rat_json).collect()))
                .collect();
            let norms: Vec<Value> = units
                .generators
                .iter()
                .map(|u| rat_json(&field.norm(u)))
                .collect();
            let logs: Vec<Value> = units
                .log_matrix
                .iter()
                .map(|row| Value::Array(row.iter().map(real_json).collect()))
                .collect();
            let (cm_verdict, cm_height) = match cm {
                CmVerdict::Yes => ("yes", Value::Null),
                CmVerdict::No { searched_height } => (
                    "no",
                    searched_height.map(|h| json!(h)).unwrap_or(Value::Null),
                ),
                CmVerdict::Inconclusive { searched_height } => {
                    ("inconclusive", json!(searched_height))
                }
            };
            let results = json!({
                "rank": units.rank,
                "rank_bound": field.unit_rank_bound(),
                "full_rank": units.full_rank,
                "height_bound": units.height_bound,
                "generators": generators,
                "norms": norms,
                "log_matrix": logs,
                "all_real_rank": units.all_real_rank.map(|r| json!(r)).unwrap_or(Value::Null),
                "compactness": match compact {
                    CompactnessVerdict::CertifiedCompact => "certified_compact",
                    CompactnessVerdict::Inconclusive => "inconclusive",
                },
                "cm": { "verdict": cm_verdict, "searched_height": cm_height },
            });
            let inputs = echo(&[
                ("minpoly", minpoly.clone()),
                ("basis", basis.clone()),
                ("height", height.to_string()),
            ]);
            Ok((report("units", inputs, prec, results), None))
        }
        Cmd::TorusOrbit {
            minpoly,
            basis,
            direction,
            tmax,
            steps,
            rho,
            common,
        } => {
            let prec = resolve_precision(common)?;
            let (field, kl) = build_field(minpoly, basis)?;
            let x = field.lattice_from_basis(&kl, prec)?;
            let dir = parse_rational_list(direction, "--direction")?;
            if dir.len() != x.dim() {
                return Err(usage(format!(
                    "--direction has {} entries for a dimension-{} lattice",
                    dir.len(),
                    x.dim()
                )));
            }
            let v = TracelessDiag::from_rationals(prec, &dir);
            let steps = steps.unwrap_or(((*tmax).max(1) * 20) as usize);
            let rho = parse_rational(rho, "--rho")?;
            let samples = trajectory(&x, &v, &Rational::from(*tmax), steps, &rho)?;
            let results = summarize_trajectory(&samples);
            let inputs = echo(&[
                ("minpoly", minpoly.clone()),
                ("basis", basis.clone()),
                ("direction", direction.clone()),
                ("tmax", tmax.to_string()),
                ("steps", steps.to_string()),
                ("rho", rho.to_string()),
            ]);
            let csv = common
                .csv
                .as_ref()
                .map(|p| (p.clone(), trajectory_csv(&samples)));
            Ok((report("torus-orbit", inputs, prec, results), csv))
        }
        Cmd::Cone { elements, common } => {
            let prec = resolve_precision(common)?;
            let mut basis = Vec::new();
            for mat in elements.split('|') {
                let rows: Vec<Vec<Rational>> = mat
                    .split(';')
                    .map(|row| parse_rational_list(row, "--elements"))
                    .collect::<CliResult<_>>()?;
                basis.push(LieElement::from_rational_rows(prec, &rows)?);
            }
            let cert = cone_construct(&basis, prec)?;
            let v0: Value = match cert.v0.exact() {
                Some(entries) => Value::Array(entries.iter().map(rat_json).collect()),
                None => Value::Array(cert.v0.entries().iter().map(real_json).collect()),
            };
            let results = json!({
                "dominant": [cert.dominant.i, cert.dominant.j],
                "v0": v0,
                "margin": rat_json(&cert.margin),
                "measured_slope": real_json(&cert.measured_slope),
                "nilpotent_coefficient": real_json(&cert.nilpotent_coefficient),
                "chosen_index": cert.chosen_index,
                "conjugated": cert.conjugated,
            });
            let inputs = echo(&[("elements", elements.clone())]);
            Ok((report("cone", inputs, prec, results), None))
        }
        Cmd::Flow {
            lattice,
            direction,
            tmax,
            steps,
            rho,
            common,
        } => {
            let prec = resolve_precision(common)?;
            let x = parse_lattice(lattice, prec)?;
            let dir = parse_rational_list(direction, "--direction")?;
            if dir.len() != x.dim() {
                return Err(usage(format!(
                    "--direction has {} entries for a dimension-{} lattice",
                    dir.len(),
                    x.dim()
                )));
            }
            let v = TracelessDiag::from_rationals(prec, &dir);
            let steps = steps.unwrap_or(((*tmax).max(1) * 20) as usize);
            let rho = parse_rational(rho, "--rho")?;
            let samples = trajectory(&x, &v, &Rational::from(*tmax), steps, &rho)?;
            let results = summarize_trajectory(&samples);
            let inputs = echo(&[
                ("lattice", lattice.clone()),
                ("direction", direction.clone()),
                ("tmax", tmax.to_string()),
                ("steps", steps.to_string()),
                ("rho", rho.to_string()),
            ]);
            let csv = common
                .csv
                .as_ref()
                .map(|p| (p.clone(), trajectory_csv(&samples)));
            Ok((report("flow", inputs, prec, results), csv))
        }
        Cmd::Irregular {
            alpha,
            beta,
            family,
            tmax,
            steps,
            rho,
            tol,
            qmax,
            grid,
            common,
        } => {
            let prec = resolve_precision(common)?;
            let a = parse_scalar_flag(alpha, "--alpha")?;
            let b = parse_scalar_flag(beta, "--beta")?;
            let v = VParams::exact(vec![a, b], prec)?;
            let mut params = OmegaParams::standard(*tmax, prec);
            if let Some(s) = steps {
                params.steps = *s;
            }
            params.rho = parse_rational(rho, "--rho")?;
            if let Some(t) = tol {
                params.tol = parse_real(t, prec, "--tol")?;
            }
            params.q_max = Integer::from(*qmax);
            params.grid_max = *grid;
            let rep = omega_experiment(&v, *family, &params)?;
            let inputs = echo(&[
                ("alpha", alpha.clone()),
                ("beta", beta.clone()),
                ("family", family.to_string()),
                ("tmax", tmax.to_string()),
                ("steps", params.steps.to_string()),
                ("rho", params.rho.to_string()),
                ("qmax", qmax.to_string()),
                ("grid", grid.to_string()),
            ]);
            Ok((report("irregular", inputs, prec, rep.to_json()), None))
        }
        Cmd::Dioph {
            mode,
            v,
            gamma,
            n,
            common,
        } => {
            let prec = resolve_precision(common)?;
            let coords: Vec<Coord> = expr::split_top_level(v, ',')
                .iter()
                .map(|s| parse_scalar_flag(s, "--v").map(Coord::Exact))
                .collect::<CliResult<_>>()?;
            let (results, csv_text) = match mode.as_str() {
                "c1" => {
                    let shifts_src = expr::split_top_level(gamma, ',');
                    let shifts: Vec<Coord> = if shifts_src.len() == 1 && coords.len() > 1 {
                        let one = parse_scalar_flag(&shifts_src[0], "--gamma")?;
                        std::iter::repeat_with(|| Coord::Exact(one.clone()))
                            .take(coords.len())
                            .collect()
                    } else {
                        shifts_src
                            .iter()
                            .map(|s| parse_scalar_flag(s, "--gamma").map(Coord::Exact))
                            .collect::<CliResult<_>>()?
                    };
                    let trace = propc1_search(&coords, &shifts, *n, prec)?;
                    (trace_json(&trace, "c1"), trace.csv())
                }
                "c2" => {
                    let g = Coord::Exact(parse_scalar_flag(gamma, "--gamma")?);
                    let trace = propc2_search(&coords, &g, *n, prec)?;
                    (trace_json(&trace, "c2"), trace.csv())
                }
                other => return Err(usage(format!("unknown --mode {other:?} (use c1 or c2)"))),
            };
            let inputs = echo(&[
                ("mode", mode.clone()),
                ("v", v.clone()),
                ("gamma", gamma.clone()),
                ("N", n.to_string()),
            ]);
            let csv = common.csv.as_ref().map(|p| (p.clone(), csv_text));
            Ok((report("dioph", inputs, prec, results), csv))
        }
        Cmd::Gdp {
            v,
            lattice,
            w,
            target,
            eps,
            bound,
            common,
        } => {
            let prec = resolve_precision(common)?;
            let x = match (v, lattice) {
                (Some(vexpr), None) => {
                    let coords: Vec<Scalar> = expr::split_top_level(vexpr, ',')
                        .iter()
                        .map(|s| parse_scalar_flag(s, "--v"))
                        .collect::<CliResult<_>>()?;
                    let params = VParams::exact(coords, prec)?;
                    make_zv(&params)?
                }
                (None, Some(l)) => parse_lattice(l, prec)?,
                _ => {
                    return Err(usage(
                        "give exactly one of --v (sheared dual) or --lattice",
                    ))
                }
            };
            let d = x.dim();
            let shift: Vec<BigReal> = if w == "random" {
                let seed = common
                    .seed
                    .ok_or_else(|| usage("--w random requires --seed"))?;
                seeded_unit_reals(seed, d, prec)
            } else {
                w.split(',')
                    .map(|t| parse_real(t, prec, "--w"))
                    .collect::<CliResult<_>>()?
            };
            let target_val = if target == "pi" {
                BigReal::with_val(prec, rug::float::Constant::Pi)
            } else {
                parse_real(target, prec, "--target")?
            };
            let eps_val = parse_real(eps, prec, "--eps")?;
            let probe = gdp_probe(&x, &shift, &target_val, &eps_val, *bound)?;
            let results = match probe {
                Some(hit) => json!({
                    "found": true,
                    "coefficients": hit.coeffs.iter().map(int_json).collect::<Vec<_>>(),
                    "point": hit.point.iter().map(real_json).collect::<Vec<_>>(),
                    "shift": hit.shift.iter().map(real_json).collect::<Vec<_>>(),
                    "product": real_json(&hit.product),
                    "target": real_json(&hit.target),
                    "error": real_json(&hit.error),
                }),
                None => json!({
                    "found": false,
                    "shift": shift.iter().map(real_json).collect::<Vec<_>>(),
                    "target": real_json(&target_val),
                }),
            };
            let mut inputs = echo(&[
                ("w", w.clone()),
                ("target", target.clone()),
                ("eps", eps.clone()),
                ("bound", bound.to_string()),
            ]);
            if let Some(vexpr) = v {
                inputs.insert("v".into(), json!(vexpr));
            }
            if let Some(l) = lattice {
                inputs.insert("lattice".into(), json!(l));
            }
            if let Some(seed) = common.seed {
                inputs.insert("seed".into(), json!(seed));
            }
            Ok((report("gdp", inputs, prec, results), None))
        }
        Cmd::Factor {
            minpoly,
            basis,
            common,
        } => {
            let prec = resolve_precision(common)?;
            let (field, kl) = build_field(minpoly, basis)?;
            let f = scalar_parabolic_factor(&field, &kl, prec)?;
            let first_row: Vec<Value> = (0..f.p.ncols()).map(|j| real_json(f.p.get(0, j))).collect();
            let results = json!({
                "c": real_json(&f.c),
                "p": rmat_json(&f.p),
                "phi": rmat_json(&f.phi),
                "g": rmat_json(&f.g),
                "det_p": real_json(&f.p.det()),
                "p_first_row": first_row,
            });
            let inputs = echo(&[("minpoly", minpoly.clone()), ("basis", basis.clone())]);
            Ok((report("factor", inputs, prec, results), None))
        }
    }
}

fn common_of(cmd: &Cmd) -> &Common {
    match cmd {
        Cmd::Embed { common, .. }
        | Cmd::Units { common, .. }
        | Cmd::TorusOrbit { common, .. }
        | Cmd::Cone { common, .. }
        | Cmd::Flow { common, .. }
        | Cmd::Irregular { common, .. }
        | Cmd::Dioph { common, .. }
        | Cmd::Gdp { common, .. }
        | Cmd::Factor { common, .. } => common,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help/version requests are successes; anything else is a usage
            // error with the dedicated exit code.
            use clap::error::ErrorKind;
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(64);
        }
    };
    match run(&cli.cmd) {
        Ok((rep, csv)) => {
            let text = serde_json::to_string_pretty(&rep).expect("report serializes");
            let out = common_of(&cli.cmd).out.clone();
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, format!("{text}\n")) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                let mut stdout = std::io::stdout().lock();
                let _ = writeln!(stdout, "{text}");
            }
            if let Some((path, series)) = csv {
                if let Err(e) = std::fs::write(&path, series) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
