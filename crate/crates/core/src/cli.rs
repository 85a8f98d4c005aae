//! Command-line front end. Exit codes: 0 pass, 1 verification failure,
//! 2 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::dft::dft;
use crate::error::{Error, Result};
use crate::extremal::{support_arc, ExtremalBasis};
use crate::interp::{
    all_actions, magic_functions, reconstruction_error, restrict, InterpolationKernel,
};
use crate::lowdim::{
    base_case_nonvanishing, closed_form_eigenfunctions, induction_step, spectral_overlap,
};
use crate::spectral::{
    multiplicity_closed_form, multiplicity_table, residue_class, write_multiplicity_csv,
    MultiplicityRow, SpectralData,
};
use crate::theta::{
    dft_theta_check, n2_identities_check, symmetrized_wronskian_check, wronskian_kernel_check,
};
use crate::verify::{
    operator_for, reconstruction_tolerance, run_verify, VerifyConfig, DEFAULT_SEED, DEFAULT_TAUS,
};
use crate::zmod::{DiscreteInterval, GridFunction, GridSize, SUPPORT_TOL};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Default upper end of sweeps; `RDFT_MAX_N` lowers or raises it.
pub const DEFAULT_MAX_N: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "rdft",
    version,
    about = "Spectral toolkit for the DFT restricted to a discrete interval"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Grid size N.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,

    /// Half-width a of the interval [-a, a].
    #[arg(long, global = true)]
    pub a: Option<usize>,

    /// Point in the upper half-plane as `re,im`.
    #[arg(long, global = true, value_parser = parse_tau, allow_hyphen_values = true)]
    pub tau: Option<Complex64>,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Multiplier applied to every floating-point tolerance.
    #[arg(long = "tol-scale", global = true, default_value_t = 1.0)]
    pub tol_scale: f64,

    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Perturb J across the cut (negative control for `verify`).
    #[arg(long = "inject-fault", global = true, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant suites over a range of N (or one N, a).
    Verify,
    /// Labelled eigen-data of J for one (N, a).
    Spectrum,
    /// F_N multiplicities on C_a.
    MultiplicityTable,
    /// The extremal basis of C_a.
    Basis,
    /// Closed-form eigenfunctions of F_N on C_m.
    Lowdim,
    /// Rebuild f outside [-a, a] from f and Ff on [-a, a].
    Reconstruct {
        /// Values of f: GridFunction JSON or 2a+1 `[re, im]` pairs in order -a..a.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Values of Ff, same formats.
        #[arg(long = "input-hat")]
        input_hat: Option<PathBuf>,
        /// Also write the kernel tables here.
        #[arg(long = "kernel-out")]
        kernel_out: Option<PathBuf>,
    },
    /// Theta-function identities and Wronskian kernels.
    ThetaCheck,
}

fn parse_tau(s: &str) -> std::result::Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or("expected `re,im`")?;
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|e| format!("bad real part: {e}"))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|e| format!("bad imaginary part: {e}"))?;
    if im <= 0.0 {
        return Err("tau must have positive imaginary part".into());
    }
    Ok(Complex64::new(re, im))
}

/// `RDFT_MAX_N` if set and valid, else [`DEFAULT_MAX_N`].
pub fn max_n() -> Result<usize> {
    match std::env::var("RDFT_MAX_N") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 2)
            .ok_or_else(|| {
                Error::Invalid(format!("RDFT_MAX_N must be an integer >= 2, got `{v}`"))
            }),
        Err(_) => Ok(DEFAULT_MAX_N),
    }
}

enum Outcome {
    Pass,
    Fail,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn require_n(cli: &Cli) -> Result<GridSize> {
    GridSize::new(
        cli.n
            .ok_or_else(|| Error::Invalid("--N is required".into()))?,
    )
}

fn require_a(cli: &Cli) -> Result<usize> {
    cli.a
        .ok_or_else(|| Error::Invalid("--a is required".into()))
}

fn json_only(cli: &Cli) -> Result<()> {
    if cli.format == Some(Format::Csv) {
        return Err(Error::Invalid("this command only writes JSON".into()));
    }
    Ok(())
}

fn cmd_verify(cli: &Cli) -> Result<Outcome> {
    json_only(cli)?;
    let grid_sizes = match cli.n {
        Some(n) => vec![GridSize::new(n)?.get()],
        None => (2..=max_n()?).collect(),
    };
    let cfg = VerifyConfig {
        grid_sizes,
        a: cli.a,
        seed: cli.seed,
        tol_scale: cli.tol_scale,
        inject_fault: cli.inject_fault,
    };
    let report = run_verify(&cfg)?;
    emit(cli.out.as_deref(), &to_json(&report)?)?;
    for c in report.checks.iter().filter(|c| c.gating && !c.passed) {
        eprintln!(
            "FAIL {} (N={}, a={}): {}{}",
            c.name,
            c.n,
            c.a.map_or("-".into(), |a| a.to_string()),
            c.claim,
            c.detail
                .as_ref()
                .map_or(String::new(), |d| format!(" [{d}]"))
        );
    }
    Ok(if report.passed {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn cmd_spectrum(cli: &Cli) -> Result<Outcome> {
    json_only(cli)?;
    let n = require_n(cli)?;
    let a = require_a(cli)?;
    let j = operator_for(n, a, cli.inject_fault)?;
    let sd = SpectralData::from_operator(&j, n, a)?;
    let actions = all_actions(&sd)?;
    let simple: Vec<_> = sd
        .simple
        .iter()
        .zip(&sd.fourier_on_ca)
        .map(|(p, f)| json!({"mu": p.mu, "fourier_eigenvalue": f.eigenvalue, "residual": f.residual, "rho": p.rho}))
        .collect();
    let doubled: Vec<_> = sd
        .doubled
        .iter()
        .zip(&actions)
        .map(|(d, act)| {
            json!({
                "lambda": d.lambda,
                "lambda_complement": d.lambda_complement,
                "alpha": act.alpha,
                "beta": act.beta,
                "parity": act.parity,
                "phi": d.phi,
                "phi_tilde": d.phi_tilde,
            })
        })
        .collect();
    let doc = json!({
        "N": n.get(),
        "a": a,
        "r": sd.r,
        "s": sd.s,
        "match_tolerance": sd.match_tolerance,
        "multiplicities": sd.multiplicities(),
        "simple": simple,
        "doubled": doubled,
    });
    emit(cli.out.as_deref(), &to_json(&doc)?)?;
    Ok(Outcome::Pass)
}

fn cmd_multiplicity_table(cli: &Cli) -> Result<Outcome> {
    let sizes: Vec<usize> = match cli.n {
        Some(n) => vec![GridSize::new(n)?.get()],
        None => (5..=max_n()?).collect(),
    };
    let mut rows = Vec::new();
    for nn in sizes {
        let n = GridSize::new(nn)?;
        let (m, _) = residue_class(nn);
        let range: Vec<usize> = match cli.a {
            Some(a) => {
                multiplicity_closed_form(nn, a)?;
                vec![a]
            }
            None => (m..=(nn - 1) / 2).collect(),
        };
        for a in range {
            rows.push(MultiplicityRow::new(nn, a, multiplicity_table(n, a)?));
        }
    }
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            write_multiplicity_csv(&rows, &mut buf)?;
            String::from_utf8(buf).map_err(|e| Error::Invalid(e.to_string()))?
        }
        Format::Json => to_json(&rows)?,
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(Outcome::Pass)
}

fn cmd_basis(cli: &Cli) -> Result<Outcome> {
    json_only(cli)?;
    let n = require_n(cli)?;
    let a = require_a(cli)?;
    let basis = ExtremalBasis::new(n, a)?;
    let supports: Vec<_> = basis
        .basis
        .iter()
        .map(|f| {
            f.support(SUPPORT_TOL)
                .map(|s| s.into_iter().map(|k| n.signed(k)).collect::<Vec<_>>())
        })
        .collect::<Result<_>>()?;
    let transform_supports: Vec<_> = (0..basis.r)
        .map(|k| basis.inverse_transform_support(k))
        .collect();
    let arcs: Vec<_> = basis
        .basis
        .iter()
        .map(|f| support_arc(&crate::dft::idft(f), SUPPORT_TOL))
        .collect::<Result<_>>()?;
    let doc = json!({
        "N": basis.n,
        "a": basis.a,
        "r": basis.r,
        "basis": basis.basis,
        "supports": supports,
        "inverse_transform_supports": transform_supports,
        "inverse_transform_arcs": arcs,
    });
    emit(cli.out.as_deref(), &to_json(&doc)?)?;
    Ok(Outcome::Pass)
}

fn cmd_lowdim(cli: &Cli) -> Result<Outcome> {
    json_only(cli)?;
    let n = require_n(cli)?;
    let (m, d) = residue_class(n.get());
    let fs = closed_form_eigenfunctions(n)?;
    let sd = SpectralData::compute(n, m)?;
    let root = (n.get() as f64).sqrt();
    let tol = 1e-9 * cli.tol_scale;
    let mut ok = true;
    let mut items = Vec::new();
    for f in &fs {
        let overlap = spectral_overlap(f, &sd)?;
        ok &= f.residual <= tol * root && overlap >= 1.0 - tol;
        items.push(json!({
            "case": f.case_tag,
            "eigenvalue": f.eigenvalue,
            "residual": f.residual,
            "spectral_overlap": overlap,
            "values": f.values,
        }));
    }
    let base = base_case_nonvanishing(n)?;
    ok &= base;
    let step = if 2 * m + 3 <= n.get() {
        let steps = induction_step(n)?;
        ok &= steps.iter().all(|s| s.passes(n));
        Some(steps)
    } else {
        None
    };
    let doc = json!({
        "N": n.get(),
        "m": m,
        "d": d,
        "eigenfunctions": items,
        "base_case_nonvanishing": base,
        "induction_step": step,
    });
    emit(cli.out.as_deref(), &to_json(&doc)?)?;
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

/// Reads interval values: a GridFunction of length `N` (restricted to
/// `[-a, a]`) or a bare list of `2a+1` `[re, im]` pairs in signed order.
pub fn read_interval_values(path: &Path, interval: &DiscreteInterval) -> Result<Vec<Complex64>> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.is_object() {
        let f: GridFunction = serde_json::from_value(value)?;
        if f.grid() != interval.grid() {
            return Err(Error::SizeMismatch {
                expected: interval.grid().get(),
                found: f.len(),
            });
        }
        return Ok(restrict(&f, interval));
    }
    let pairs: Vec<[f64; 2]> = serde_json::from_value(value)?;
    if pairs.len() != interval.len() {
        return Err(Error::SizeMismatch {
            expected: interval.len(),
            found: pairs.len(),
        });
    }
    Ok(pairs
        .into_iter()
        .map(|[re, im]| Complex64::new(re, im))
        .collect())
}

fn cmd_reconstruct(
    cli: &Cli,
    input: Option<&Path>,
    input_hat: Option<&Path>,
    kernel_out: Option<&Path>,
) -> Result<Outcome> {
    json_only(cli)?;
    let n = require_n(cli)?;
    let a = require_a(cli)?;
    let interval = DiscreteInterval::new(n, a)?;
    let sd = SpectralData::from_operator(&operator_for(n, a, cli.inject_fault)?, n, a)?;
    let kernel: InterpolationKernel = magic_functions(&all_actions(&sd)?, &sd)?;
    if let Some(p) = kernel_out {
        fs::write(p, to_json(&kernel)?)?;
    }
    eprintln!("condition estimate: {:e}", kernel.condition);
    match (input, input_hat) {
        (Some(fp), Some(hp)) => {
            let f_in = read_interval_values(fp, &interval)?;
            let h_in = read_interval_values(hp, &interval)?;
            let full = kernel.reconstruct_full(&f_in, &h_in)?;
            emit(cli.out.as_deref(), &to_json(&full)?)?;
            Ok(Outcome::Pass)
        }
        (None, None) => {
            // round trip on a seeded random function
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let vals = (0..n.get())
                .map(|_| {
                    use rand::Rng;
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
                .collect();
            let f = GridFunction::new(n, vals)?;
            let err = reconstruction_error(&kernel, &f)?;
            let tol = reconstruction_tolerance(kernel.condition) * cli.tol_scale;
            let full = kernel
                .reconstruct_full(&restrict(&f, &interval), &restrict(&dft(&f), &interval))?;
            let doc = json!({
                "N": n.get(),
                "a": a,
                "seed": cli.seed,
                "condition": kernel.condition,
                "error": err,
                "tolerance": tol,
                "passed": err <= tol,
                "reconstructed": full,
            });
            emit(cli.out.as_deref(), &to_json(&doc)?)?;
            Ok(if err <= tol {
                Outcome::Pass
            } else {
                Outcome::Fail
            })
        }
        _ => Err(Error::Invalid(
            "give both --input and --input-hat, or neither".into(),
        )),
    }
}

fn cmd_theta_check(cli: &Cli) -> Result<Outcome> {
    json_only(cli)?;
    let n = require_n(cli)?;
    let taus: Vec<Complex64> = match cli.tau {
        Some(t) => vec![t, t + 1.0],
        None => DEFAULT_TAUS.to_vec(),
    };
    let tol = cli.tol_scale;
    let mut ok = true;
    let mut dft_res = Vec::new();
    for &t in &taus {
        let r = dft_theta_check(n, t)?;
        ok &= r <= 1e-11 * tol;
        dft_res.push(json!({"tau": [t.re, t.im], "residual": r}));
    }
    let n2 = if n.get() == 2 {
        let rs = taus
            .iter()
            .map(|&t| n2_identities_check(t))
            .collect::<Result<Vec<_>>>()?;
        ok &= rs.iter().all(|r| r.max_asserted() <= 1e-9 * tol);
        Some(rs)
    } else {
        None
    };
    let wronskian = match cli.a {
        Some(a) if n.get() <= 6 => {
            let literal = match wronskian_kernel_check(n, a, &taus) {
                Ok(r) => {
                    ok &= r.passes(1e-8 * tol);
                    serde_json::to_value(r)?
                }
                Err(e) if !e.is_usage() => {
                    ok = false;
                    json!({"error": e.to_string()})
                }
                Err(e) => return Err(e),
            };
            let symmetrized = match symmetrized_wronskian_check(n, a, &taus) {
                Ok(r) => serde_json::to_value(r)?,
                Err(e) => json!({"error": e.to_string()}),
            };
            Some(json!({"literal": literal, "symmetrized": symmetrized}))
        }
        _ => None,
    };
    let doc = json!({
        "N": n.get(),
        "a": cli.a,
        "dft_theta": dft_res,
        "n2_identities": n2,
        "wronskian": wronskian,
        "passed": ok,
    });
    emit(cli.out.as_deref(), &to_json(&doc)?)?;
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Verify => cmd_verify(cli),
        Command::Spectrum => cmd_spectrum(cli),
        Command::MultiplicityTable => cmd_multiplicity_table(cli),
        Command::Basis => cmd_basis(cli),
        Command::Lowdim => cmd_lowdim(cli),
        Command::Reconstruct {
            input,
            input_hat,
            kernel_out,
        } => cmd_reconstruct(
            cli,
            input.as_deref(),
            input_hat.as_deref(),
            kernel_out.as_deref(),
        ),
        Command::ThetaCheck => cmd_theta_check(cli),
    };
    match result {
        Ok(Outcome::Pass) => EXIT_PASS,
        Ok(Outcome::Fail) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                EXIT_USAGE
            } else {
                EXIT_FAIL
            }
        }
    }
}

/// Parses `std::env::args` and runs; clap's own usage errors exit with 2.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    run(&cli)
}
