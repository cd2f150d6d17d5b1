//! Command-line front end: expansions, dimensions, Jacobi-form structure
//! commands, lattice VOA characters, and the numeric verification harness.
//!
//! Exit codes: 0 = success / all checks pass, 1 = a check failed,
//! 2 = bad usage or a precondition violation.

use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num::complex::Complex64;

use jacform::jacobi::{
    codimension_sum, dim_jacobi, dim_weak_jacobi, phi_0_1, phi_minus2_1, x_power_basis,
    Classification, CriterionDecision, JacobiSeries,
};
use jacform::lattice::{
    automorphism_trace, character, index_integrality, twisted_character, CosetModule, EvenLattice,
    LatticeVector,
};
use jacform::modular::{delta, dim_modular_forms, eisenstein};
use jacform::qseries::eta;
use jacform::verify::{
    check_elliptic_transform, check_modular_transform, check_phi_recursion,
    check_twisted_s_transform, default_fit_points, default_sample_points, default_tau_points,
    sample_points_for, Gamma, SamplePoint, TransformReport, DEFAULT_ORDER, DEFAULT_TOL,
};

#[derive(Parser)]
#[command(name = "jacform", version, about = "Exact weak Jacobi forms, lattice VOA characters, and transformation-law verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the q-expansion of a named form as JSON
    Expand {
        /// One of E4, E6, Delta, eta
        #[arg(long)]
        form: String,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: i64,
    },
    /// Dimension of the space of level-1 modular forms of a given weight
    Dims {
        #[arg(long)]
        weight: i64,
    },
    /// Weak Jacobi form commands
    Jacobi {
        #[command(subcommand)]
        command: JacobiCommand,
    },
    /// Lattice VOA characters and traces
    Voa {
        #[command(subcommand)]
        command: VoaCommand,
    },
    /// Numeric verification of the transformation laws
    Verify {
        #[command(subcommand)]
        command: VerifyCommand,
    },
}

#[derive(Subcommand)]
enum JacobiCommand {
    /// Print the two index-1 generators (weights -2 and 0) as JSON
    Gens {
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: i64,
    },
    /// Basis Q_0..Q_m with leading polynomials x^i (weight >= 4, index >= 1)
    Basis {
        #[arg(long)]
        weight: i64,
        #[arg(long)]
        index: i64,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: i64,
    },
    /// Dimensions of weak and true Jacobi forms
    Dims {
        #[arg(long)]
        weight: i64,
        #[arg(long)]
        index: i64,
    },
    /// Classify the support of a serialized Jacobi series
    Classify {
        #[arg(long)]
        input: String,
    },
}

#[derive(Subcommand)]
enum VoaCommand {
    /// Character of a lattice VOA module with elliptic variable along h
    Character {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        h: String,
        /// Module number in the discriminant-group ordering (0 = the VOA)
        #[arg(long, default_value_t = 0)]
        coset: usize,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: i64,
    },
    /// Twisted-sector character for the automorphism attached to a
    Twisted {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        a: String,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: i64,
    },
    /// Trace of g = e^(2 pi i h(0)/R), exact over the R-th cyclotomic field
    Trace {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        h: String,
        #[arg(long = "R")]
        r: i64,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: i64,
    },
    /// Index integrality of <h,h>/2 against the conformal weights
    Index {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        h: String,
    },
}

#[derive(Args)]
struct VerifyCommon {
    #[arg(long)]
    lattice: String,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: i64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// JSON file with sample points `[{"tau":[re,im],"z":[re,im]}, ...]`
    #[arg(long)]
    points: Option<String>,
    /// Write the report JSON to this file as well as stdout
    #[arg(long)]
    json: Option<String>,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Modular transformation of the character vector under S or T
    Modular {
        #[command(flatten)]
        common: VerifyCommon,
        #[arg(long)]
        h: String,
        #[arg(long)]
        gamma: String,
    },
    /// Elliptic transformation z -> z + u tau + v of the character vector
    Elliptic {
        #[command(flatten)]
        common: VerifyCommon,
        #[arg(long)]
        h: String,
        #[arg(long, default_value_t = 1)]
        u: i64,
        #[arg(long, default_value_t = 0)]
        v: i64,
    },
    /// Two-parameter trace recursion under S or T at rational vectors u, v
    Miyamoto {
        #[command(flatten)]
        common: VerifyCommon,
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
        #[arg(long)]
        gamma: String,
    },
    /// S-transform of the exponential-automorphism trace against the
    /// twisted-sector character, plus exact translation periodicity
    Theorem3 {
        #[command(flatten)]
        common: VerifyCommon,
        #[arg(long)]
        h: String,
        #[arg(long = "R")]
        r: i64,
    },
}

fn load_lattice(spec: &str) -> anyhow::Result<EvenLattice> {
    if Path::new(spec).exists() || spec.ends_with(".json") {
        let text = std::fs::read_to_string(spec)?;
        Ok(EvenLattice::from_json(&text)?)
    } else {
        Ok(EvenLattice::from_name(spec)?)
    }
}

fn load_points(file: &Option<String>, fallback: Vec<SamplePoint>) -> anyhow::Result<Vec<SamplePoint>> {
    match file {
        None => Ok(fallback),
        Some(f) => {
            let text = std::fs::read_to_string(f)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn coset(lattice: &EvenLattice, index: usize) -> anyhow::Result<CosetModule> {
    let group = lattice.discriminant_group();
    group
        .get(index)
        .cloned()
        .ok_or_else(|| anyhow::anyhow!("coset {index} out of range (|L*/L| = {})", group.len()))
}

fn all_characters(
    lattice: &EvenLattice,
    h: &LatticeVector,
    order: i64,
) -> anyhow::Result<Vec<JacobiSeries>> {
    let mut out = Vec::new();
    for module in lattice.discriminant_group() {
        out.push(character(lattice, &module, h, order)?);
    }
    Ok(out)
}

fn emit_report(report: &TransformReport, json_out: &Option<String>) -> anyhow::Result<ExitCode> {
    let text = serde_json::to_string_pretty(report)?;
    println!("{text}");
    if let Some(path) = json_out {
        std::fs::write(path, &text)?;
    }
    eprintln!(
        "{}: {} (max residual {:.3e}, tol {:.1e})",
        report.equation,
        if report.passed() { "pass" } else { "FAIL" },
        report.max_residual(),
        report.tol
    );
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Fit the S- or T-matrix from the z = 0 character vector, the (u,v) = (0,0)
/// base case of the trace recursion.
fn fit_matrix(
    lattice: &EvenLattice,
    gamma: Gamma,
    points: &[SamplePoint],
    tol: f64,
    order: i64,
) -> anyhow::Result<Vec<Vec<Complex64>>> {
    let zero = LatticeVector::zero(lattice.rank());
    let series = all_characters(lattice, &zero, order)?;
    let report = check_modular_transform(&series, gamma, points, tol)?;
    if !report.passed() {
        anyhow::bail!("base-case fit for {gamma} did not pass; cannot trust the matrix");
    }
    Ok(report.matrix.expect("modular check always reports a matrix"))
}

fn classification_json(series: &JacobiSeries) -> serde_json::Value {
    let class = match series.classify() {
        Ok(c) => c,
        Err(e) => {
            return serde_json::json!({ "error": e.to_string() });
        }
    };
    let (name, witness) = match &class {
        Classification::TrueToTruncation => ("true-to-truncation", None),
        Classification::WeakOnly { witness } => ("weak-only", Some(*witness)),
        Classification::ViolatesWeakBound { witness } => ("violates-weak-bound", Some(*witness)),
    };
    let criterion = match series.jacobi_criterion() {
        Ok(CriterionDecision::Jacobi) => serde_json::json!("jacobi"),
        Ok(CriterionDecision::NotJacobi { witness_r }) => {
            serde_json::json!({ "not-jacobi": { "witness_r": witness_r } })
        }
        Ok(CriterionDecision::Inconsistent { witness }) => {
            serde_json::json!({ "inconsistent": { "witness": witness } })
        }
        Err(_) => serde_json::Value::Null, // outside the weight/index hypotheses
    };
    serde_json::json!({
        "classification": name,
        "witness": witness,
        "criterion": criterion,
    })
}

fn run() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Expand { form, order } => {
            let series = match form.as_str() {
                "E4" => eisenstein(4, order)?.expansion().clone(),
                "E6" => eisenstein(6, order)?.expansion().clone(),
                "Delta" | "delta" => delta(order).expansion().clone(),
                "eta" => eta(order),
                other => anyhow::bail!("unknown form '{other}' (expected E4, E6, Delta, eta)"),
            };
            println!("{}", serde_json::to_string_pretty(&series)?);
        }
        Command::Dims { weight } => {
            println!("{}", dim_modular_forms(weight));
        }
        Command::Jacobi { command } => match command {
            JacobiCommand::Gens { order } => {
                let out = serde_json::json!({
                    "phi_minus2_1": phi_minus2_1(order),
                    "phi_0_1": phi_0_1(order),
                });
                println!("{}", serde_json::to_string_pretty(&out)?);
            }
            JacobiCommand::Basis { weight, index, order } => {
                let basis = x_power_basis(weight, index, order)?;
                println!("{}", serde_json::to_string_pretty(&basis)?);
            }
            JacobiCommand::Dims { weight, index } => {
                let weak = dim_weak_jacobi(weight, index)?;
                let codim = codimension_sum(index)?;
                let true_dim = dim_jacobi(weight, index).ok();
                let out = serde_json::json!({
                    "weak": weak,
                    "codim": codim,
                    "true": true_dim,
                });
                println!("{}", serde_json::to_string_pretty(&out)?);
            }
            JacobiCommand::Classify { input } => {
                let text = std::fs::read_to_string(&input)?;
                let series: JacobiSeries = serde_json::from_str(&text)?;
                println!("{}", serde_json::to_string_pretty(&classification_json(&series))?);
            }
        },
        Command::Voa { command } => match command {
            VoaCommand::Character { lattice, h, coset: j, order } => {
                let lattice = load_lattice(&lattice)?;
                let h = LatticeVector::parse(&h)?;
                let module = coset(&lattice, j)?;
                let chi = character(&lattice, &module, &h, order)?;
                println!("{}", serde_json::to_string_pretty(&chi)?);
            }
            VoaCommand::Twisted { lattice, a, order } => {
                let lattice = load_lattice(&lattice)?;
                let a = LatticeVector::parse(&a)?;
                let tw = twisted_character(&lattice, &a, order)?;
                println!("{}", serde_json::to_string_pretty(&tw)?);
            }
            VoaCommand::Trace { lattice, h, r, order } => {
                let lattice = load_lattice(&lattice)?;
                let h = LatticeVector::parse(&h)?;
                let tr = automorphism_trace(&lattice, &h, r, order)?;
                let terms: Vec<serde_json::Value> = tr
                    .coeffs()
                    .iter()
                    .map(|(k, v)| {
                        let vs: Vec<String> = v.iter().map(jacform::rat::rat_to_string).collect();
                        serde_json::json!([k, vs])
                    })
                    .collect();
                let out = serde_json::json!({
                    "R": tr.r_order(),
                    "den": tr.den(),
                    "terms": terms,
                    "trunc": tr.trunc(),
                    "translation_period": tr.translation_period(),
                });
                println!("{}", serde_json::to_string_pretty(&out)?);
            }
            VoaCommand::Index { lattice, h } => {
                let lattice = load_lattice(&lattice)?;
                let h = LatticeVector::parse(&h)?;
                let report = index_integrality(&lattice, &h)?;
                let out = serde_json::json!({
                    "half_norm": jacform::rat::rat_to_string(&report.half_norm),
                    "unimodular": report.unimodular,
                    "integral": report.integral,
                    "matched_coset": report.matched_coset,
                    "verdict": if report.passed { "pass" } else { "fail" },
                });
                println!("{}", serde_json::to_string_pretty(&out)?);
                if !report.passed {
                    return Ok(ExitCode::from(1));
                }
            }
        },
        Command::Verify { command } => {
            return match command {
                VerifyCommand::Modular { common, h, gamma } => {
                    let lattice = load_lattice(&common.lattice)?;
                    let h = LatticeVector::parse(&h)?;
                    let gamma = Gamma::parse(&gamma)?;
                    let series = all_characters(&lattice, &h, common.order)?;
                    let r = series.len();
                    let points = load_points(&common.points, sample_points_for(r * r + 3 + r))?;
                    let report = check_modular_transform(&series, gamma, &points, common.tol)?;
                    emit_report(&report, &common.json)
                }
                VerifyCommand::Elliptic { common, h, u, v } => {
                    let lattice = load_lattice(&common.lattice)?;
                    let h = LatticeVector::parse(&h)?;
                    let points = load_points(&common.points, default_sample_points())?;
                    let series = all_characters(&lattice, &h, common.order)?;
                    let report = check_elliptic_transform(&series, u, v, &points, common.tol)?;
                    emit_report(&report, &common.json)
                }
                VerifyCommand::Miyamoto { common, u, v, gamma } => {
                    let lattice = load_lattice(&common.lattice)?;
                    let u = LatticeVector::parse(&u)?;
                    let v = LatticeVector::parse(&v)?;
                    let gamma = Gamma::parse(&gamma)?;
                    let fit_pts = load_points(&common.points, default_fit_points())?;
                    let matrix = fit_matrix(&lattice, gamma, &fit_pts, common.tol, common.order)?;
                    let points = load_points(&common.points, default_tau_points())?;
                    let report = check_phi_recursion(
                        &lattice,
                        &u,
                        &v,
                        gamma,
                        &matrix,
                        &points,
                        common.tol,
                        common.order,
                    )?;
                    emit_report(&report, &common.json)
                }
                VerifyCommand::Theorem3 { common, h, r } => {
                    let lattice = load_lattice(&common.lattice)?;
                    let h = LatticeVector::parse(&h)?;
                    let points = load_points(&common.points, default_tau_points())?;
                    let report = check_twisted_s_transform(
                        &lattice,
                        &h,
                        r,
                        &points,
                        common.tol,
                        common.order,
                    )?;
                    emit_report(&report, &common.json)
                }
            };
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
