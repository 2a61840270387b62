use std::path::Path;

use cmvlab::cmv::{angle, AlphaWindow, CmvOperator, VerblunskySequence};
use cmvlab::contfrac::{cf_expand, convergents, periodic_quadratic, Frequency};
use cmvlab::gordon::{
    certify, check_three_block, check_two_block, eigenvalue_excluder, gordon_sequence_test, rotcode_phase_measure,
    rotcode_three_block_fraction,
};
use cmvlab::real::Real;
use cmvlab::tracemap::{spectrum_scan, OrbitStatus, ScanOptions, SpectrumScan};
use cmvlab::transfer::{
    check_one_step_identity, check_sgz_identity, gz_cocycle, perturbation_gap, szego_cocycle,
};
use cmvlab::words::{gordon_scales, mechanical_word, rotation_word, sturmian_word, RotationInterval, Variant, Word};
use cmvlab::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{c64, parse_complex, parse_range, precision_bits, ExperimentConfig, OutputPaths, ThetaSpec};
use crate::output::{read_json, to_json, write_file, Envelope, SpectrumScanFile};
use crate::{plot, CliError, GordonArgs, GordonMode, ModelArgs, ScanArgs, TransferCheck, WordVariant};

const SGZ_TOL: f64 = 1e-10;
const ONE_STEP_TOL: f64 = 1e-13;
const COCYCLE_TOL: f64 = 1e-10;
const UNITARITY_TOL: f64 = 1e-12;

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = to_json(value, true)?;
    match out {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

impl ThetaSpec {
    fn real(&self, bits: u32) -> Result<Real, CliError> {
        Ok(match self {
            Self::Named(n) if n == "golden" => Real::golden(),
            Self::Named(n) if n == "silver" => Real::silver(),
            Self::Named(n) => return Err(CliError::Config(format!("unknown frequency {n:?}"))),
            Self::Decimal(s) => Real::parse(s, bits)?,
            Self::Cf(period) => periodic_quadratic(period)?,
        })
    }
}

fn parse_phase(phi: Option<&str>, theta: &Real, bits: u32) -> Result<Real, CliError> {
    match phi {
        None | Some("theta") => Ok(theta.clone()),
        Some(s) => Ok(Real::parse(s, bits)?),
    }
}

/// `l,r` as the arc `[l, r)`.
fn parse_interval(s: Option<&str>, theta: &Real, bits: u32) -> Result<RotationInterval, CliError> {
    match s {
        None => Ok(RotationInterval::sturmian(theta)?),
        Some(s) => {
            let (l, r) = s
                .split_once(',')
                .ok_or_else(|| CliError::Config(format!("bad interval {s:?}; expected l,r")))?;
            Ok(RotationInterval::new(Real::parse(l, bits)?, Real::parse(r, bits)?, true, false)?)
        }
    }
}

struct Model {
    freq: Frequency,
    beta: C64,
    gamma: C64,
    degenerate: bool,
}

impl Model {
    fn build(args: &ModelArgs, n_terms: usize) -> Result<Self, CliError> {
        let spec = ThetaSpec::parse(args.theta.as_deref(), args.cf.as_deref())?;
        let (beta, gamma) = (c64(parse_complex(&args.beta)?), c64(parse_complex(&args.gamma)?));
        for (name, v) in [("beta", beta), ("gamma", gamma)] {
            if !(v.norm() < 1.0) {
                return Err(CliError::Config(format!("|{name}| = {} must be < 1", v.norm())));
            }
        }
        if beta == gamma && !args.degenerate {
            return Err(CliError::Config("beta = gamma gives a periodic model; pass --degenerate to allow it".into()));
        }
        let freq = spec.frequency(n_terms, precision_bits()?)?;
        Ok(Self {
            freq,
            beta,
            gamma,
            degenerate: args.degenerate,
        })
    }

    fn alpha(&self, word: Word) -> Result<AlphaWindow, CliError> {
        let seq = if self.degenerate {
            VerblunskySequence::allowing_degenerate(self.beta, self.gamma, word)?
        } else {
            VerblunskySequence::new(self.beta, self.gamma, word)?
        };
        Ok(seq.window())
    }

    fn q(&self, k: usize) -> Result<u64, CliError> {
        convergents(&self.freq.cf, k)
            .q_u64(k)
            .ok_or_else(|| CliError::Config(format!("q_{k} does not fit in 64 bits")))
    }
}

#[derive(Serialize)]
struct CfReport {
    theta: String,
    exact: bool,
    terminated: bool,
    a: Vec<u64>,
    /// Decimal strings, since convergents outgrow every fixed-width integer.
    p: Vec<String>,
    q: Vec<String>,
}

pub fn cf(theta: Option<&str>, cf: Option<&str>, terms: usize) -> Result<(), CliError> {
    let spec = ThetaSpec::parse(theta, cf)?;
    let bits = precision_bits()?;
    let real = spec.real(bits)?;
    let (a, terminated) = match &spec {
        ThetaSpec::Decimal(_) => {
            let e = cf_expand(&real, terms)?;
            (e.terms, e.terminated)
        }
        _ => (spec.frequency(terms, bits)?.cf, false),
    };
    let conv = convergents(&a, a.len());
    emit(
        &Envelope::new(
            "cf",
            CfReport {
                theta: real.to_string(),
                exact: real.is_exact(),
                terminated,
                a,
                p: conv.p.iter().map(|x| x.to_string()).collect(),
                q: conv.q.iter().map(|x| x.to_string()).collect(),
            },
        ),
        None,
    )
}

#[derive(Serialize)]
struct WordReport {
    theta: String,
    phi: String,
    variant: &'static str,
    interval: Option<[String; 2]>,
    start: i64,
    len: usize,
    symbols: String,
}

pub fn word(
    theta: Option<&str>,
    cf: Option<&str>,
    phi: Option<&str>,
    variant: WordVariant,
    interval: Option<&str>,
    range: &str,
) -> Result<(), CliError> {
    let bits = precision_bits()?;
    let theta = ThetaSpec::parse(theta, cf)?.real(bits)?;
    let phi = parse_phase(phi, &theta, bits)?;
    let (n0, n1) = parse_range(range)?;
    let len = (n1 - n0) as usize;
    if len == 0 || len > 10_000_000 {
        return Err(CliError::Config(format!("range length {len} must be in 1..=10^7")));
    }
    let (w, name, iv) = match variant {
        WordVariant::Floor => (mechanical_word(&theta, &phi, n0, len, Variant::Floor)?, "floor", None),
        WordVariant::Ceiling => (mechanical_word(&theta, &phi, n0, len, Variant::Ceiling)?, "ceiling", None),
        WordVariant::Coding => {
            let i = parse_interval(interval, &theta, bits)?;
            let ends = [i.left.to_string(), i.right.to_string()];
            (rotation_word(&theta, &phi, &i, n0, len)?, "coding", Some(ends))
        }
    };
    if interval.is_some() && variant != WordVariant::Coding {
        return Err(CliError::Config("--interval only applies to --variant coding".into()));
    }
    emit(
        &Envelope::new(
            "word",
            WordReport {
                theta: theta.to_string(),
                phi: phi.to_string(),
                variant: name,
                interval: iv,
                start: n0,
                len,
                symbols: w.to_string(),
            },
        ),
        None,
    )
}

#[derive(Serialize)]
struct CmvReport {
    start: i64,
    window: usize,
    beta: [f64; 2],
    gamma: [f64; 2],
    symbols: String,
    alpha: Vec<[f64; 2]>,
    /// `max |(E*E − I)_{ij}|` for the unitary truncation with boundary 1.
    truncation_unitarity: Option<f64>,
    spectrum_angles: Option<Vec<f64>>,
}

pub fn cmv(model: &ModelArgs, window: usize, start: i64, dump: bool, spectrum: bool) -> Result<(), CliError> {
    if !(2..=4096).contains(&window) {
        return Err(CliError::Config(format!("window {window} must be in 2..=4096")));
    }
    let m = Model::build(model, 8)?;
    let w = sturmian_word(&m.freq, start, window, Variant::Floor)?;
    let symbols = w.to_string();
    let alpha = m.alpha(w)?;
    let op = CmvOperator::new(alpha.clone());
    if dump {
        let d = op.dense();
        let mut csv = String::from("row,col,re,im\n");
        for i in 0..window {
            for j in 0..window {
                let v = d[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    csv.push_str(&format!(
                        "{},{},{:.16e},{:.16e}\n",
                        start + i as i64,
                        start + j as i64,
                        v.re,
                        v.im
                    ));
                }
            }
        }
        print!("{csv}");
        return Ok(());
    }
    let even = window.is_multiple_of(2) && start.rem_euclid(2) == 0;
    let one = C64::new(1.0, 0.0);
    let truncation_unitarity = if even {
        let e = op.truncation(window, one)?;
        let g = e.adjoint() * &e;
        let mut dev: f64 = 0.0;
        for i in 0..window {
            for j in 0..window {
                let target = if i == j { one } else { C64::new(0.0, 0.0) };
                dev = dev.max((g[(i, j)] - target).norm());
            }
        }
        Some(dev)
    } else {
        None
    };
    let spectrum_angles = if spectrum {
        if !even {
            return Err(CliError::Config("--spectrum needs an even window starting at an even site".into()));
        }
        Some(op.truncated_spectrum(window, one)?.into_iter().map(angle).collect())
    } else {
        None
    };
    let report = CmvReport {
        start,
        window,
        beta: [m.beta.re, m.beta.im],
        gamma: [m.gamma.re, m.gamma.im],
        symbols,
        alpha: alpha.values.iter().map(|a| [a.re, a.im]).collect(),
        truncation_unitarity,
        spectrum_angles,
    };
    emit(&Envelope::new("cmv", &report), None)?;
    if let Some(dev) = truncation_unitarity {
        if dev > UNITARITY_TOL {
            return Err(CliError::Violation(format!("truncation unitarity deviation {dev:e}")));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct IdentityReport {
    z: [f64; 2],
    /// `(n, ‖z^{-n}T(2n,0) − Z(2n,0)‖)`
    sgz: Vec<(usize, f64)>,
    sgz_max: f64,
    /// `max_j ‖Q(α_{2j+1})P(α_{2j}) − z⁻¹S(α_{2j+1})S(α_{2j})‖`
    one_step_max: f64,
    tolerances: [f64; 2],
}

#[derive(Serialize)]
struct CocycleReport {
    z: [f64; 2],
    n: usize,
    /// `max_m ‖T(n,0) − T(n,m)T(m,0)‖ / (‖T(n,m)‖‖T(m,0)‖)`
    szego_split: f64,
    gz_split: f64,
    /// `|det T(n,0) − zⁿ|`, `|det Z(n,0) − (−1)ⁿ|`
    szego_det: f64,
    gz_det: f64,
    tolerance: f64,
}

pub fn transfer(
    model: &ModelArgs,
    z: &str,
    steps: usize,
    check: TransferCheck,
    delta: f64,
    seed: u64,
) -> Result<(), CliError> {
    if steps == 0 || steps > 10_000 {
        return Err(CliError::Config(format!("steps {steps} must be in 1..=10000")));
    }
    let z = c64(parse_complex(z)?);
    let m = Model::build(model, 8)?;
    let alpha = m.alpha(sturmian_word(&m.freq, 0, 2 * steps + 2, Variant::Floor)?)?;
    let zz = [z.re, z.im];
    match check {
        TransferCheck::Identity => {
            let mut sgz = Vec::with_capacity(steps);
            for n in 1..=steps {
                sgz.push((n, check_sgz_identity(&alpha, z, n as i64)?));
            }
            let mut one_step: f64 = 0.0;
            for j in 0..steps as i64 {
                one_step = one_step.max(check_one_step_identity(alpha.get(2 * j + 1)?, alpha.get(2 * j)?, z)?);
            }
            let sgz_max = sgz.iter().map(|r| r.1).fold(0.0, f64::max);
            emit(
                &Envelope::new(
                    "transfer-identity",
                    IdentityReport {
                        z: zz,
                        sgz,
                        sgz_max,
                        one_step_max: one_step,
                        tolerances: [SGZ_TOL, ONE_STEP_TOL],
                    },
                ),
                None,
            )?;
            if !(sgz_max <= SGZ_TOL && one_step <= ONE_STEP_TOL) {
                return Err(CliError::Violation(format!(
                    "identity deviation {sgz_max:e} / one-step {one_step:e}"
                )));
            }
        }
        TransferCheck::Cocycle => {
            let n = steps as i64;
            let (t, y) = (szego_cocycle(&alpha, n, 0, z)?, gz_cocycle(&alpha, n, 0, z)?);
            let (mut s_split, mut g_split): (f64, f64) = (0.0, 0.0);
            for k in 0..=n {
                let (a, b) = (szego_cocycle(&alpha, n, k, z)?, szego_cocycle(&alpha, k, 0, z)?);
                s_split = s_split.max((t - a * b).norm() / (a.norm() * b.norm()));
                let (a, b) = (gz_cocycle(&alpha, n, k, z)?, gz_cocycle(&alpha, k, 0, z)?);
                g_split = g_split.max((y - a * b).norm() / (a.norm() * b.norm()));
            }
            let sign = if steps.is_multiple_of(2) { 1.0 } else { -1.0 };
            let r = CocycleReport {
                z: zz,
                n: steps,
                szego_split: s_split,
                gz_split: g_split,
                szego_det: (t.det() - z.powi(n as i32)).norm() / t.frobenius_sq().max(1.0),
                gz_det: (y.det() - sign).norm() / y.frobenius_sq().max(1.0),
                tolerance: COCYCLE_TOL,
            };
            emit(&Envelope::new("transfer-cocycle", &r), None)?;
            let worst = r.szego_split.max(r.gz_split).max(r.szego_det).max(r.gz_det);
            if !(worst <= COCYCLE_TOL) {
                return Err(CliError::Violation(format!("cocycle deviation {worst:e}")));
            }
        }
        TransferCheck::Perturbation => {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(CliError::Config(format!("delta {delta} must lie in (0, 1)")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tilde: Vec<C64> = alpha
                .values
                .iter()
                .map(|&a| a + C64::from_polar(delta * rng.gen::<f64>(), rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            if tilde.iter().any(|a| a.norm() >= 1.0) {
                return Err(CliError::Config("perturbation leaves the unit disk".into()));
            }
            let tilde = AlphaWindow::new(alpha.start, tilde)?;
            let gap = perturbation_gap(&alpha, &tilde, z, steps as i64)?;
            emit(&Envelope::new("transfer-perturbation", &gap), None)?;
            if !gap.holds {
                return Err(CliError::Violation(format!(
                    "‖Z − Z̃‖ = {:e} exceeds δC(r)^n = {:e}",
                    gap.lhs, gap.bound
                )));
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ScanSummary {
    grid: usize,
    budget: usize,
    bounded_grid_points: usize,
    refined_points: usize,
    arc_measure: Vec<f64>,
    final_measure: f64,
    monotone: bool,
    certified_fraction: Option<f64>,
    outputs: OutputPaths,
}

fn config_from_args(args: &ScanArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => read_json::<ExperimentConfig>(path).map_err(|e| match e {
            CliError::Schema(m) => CliError::Config(m),
            other => other,
        })?,
        None => {
            let m = &args.model;
            let (lo, hi) = parse_range(&args.k_range)?;
            ExperimentConfig {
                beta: parse_complex(&m.beta)?,
                gamma: parse_complex(&m.gamma)?,
                theta: ThetaSpec::parse(m.theta.as_deref(), m.cf.as_deref())?,
                phi: None,
                grid: args.grid,
                budget: args.budget,
                refine: args.refine,
                escape_threshold: args.escape_threshold,
                k_range: (lo.max(0) as usize, hi.max(0) as usize),
                seed: args.seed,
                degenerate: m.degenerate,
                precision_bits: precision_bits()?,
                outputs: OutputPaths {
                    scan: args.out.clone(),
                    certificates: args.certificates.clone(),
                    svg: args.svg.clone(),
                },
            }
        }
    };
    if std::env::var(crate::config::PRECISION_ENV).is_ok() {
        config.precision_bits = precision_bits()?;
    }
    config.validate()?;
    Ok(config)
}

fn run_scan(config: &ExperimentConfig, freq: &Frequency) -> Result<SpectrumScan, CliError> {
    Ok(spectrum_scan(
        c64(config.beta),
        c64(config.gamma),
        &freq.cf,
        config.grid,
        config.budget,
        ScanOptions {
            escape_threshold: config.escape_threshold,
            refine: config.refine,
        },
    )?)
}

#[derive(Serialize)]
struct CertificatesFile<'a, T: Serialize> {
    config: &'a ExperimentConfig,
    summary: T,
}

pub fn scan(args: &ScanArgs) -> Result<(), CliError> {
    let config = config_from_args(args)?;
    let freq = config.frequency()?;
    let scan = run_scan(&config, &freq)?;
    let file = SpectrumScanFile::new(&config, &scan);
    file.validate().map_err(|e| CliError::Violation(e.to_string()))?;
    let monotone = scan.arc_measure.windows(2).all(|w| w[1] <= w[0]);

    let outputs = &config.outputs;
    if let Some(path) = &outputs.scan {
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let text = if is_csv { file.to_csv() } else { to_json(&file, true)? };
        write_file(path, &text)?;
    }
    if let Some(path) = &outputs.svg {
        write_file(path, &plot::render(&file))?;
    }
    let mut certified_fraction = None;
    let mut failed_pairs = 0;
    if let Some(path) = &outputs.certificates {
        let (lo, hi) = config.k_range;
        let summary = eigenvalue_excluder(c64(config.beta), c64(config.gamma), &freq, &scan, lo..=hi, None)?;
        certified_fraction = Some(summary.certified_fraction);
        failed_pairs = summary.pairs - summary.certified;
        let cert = Envelope::new(
            "certificates",
            CertificatesFile {
                config: &config,
                summary,
            },
        );
        write_file(path, &to_json(&cert, true)?)?;
    }
    let summary = ScanSummary {
        grid: config.grid,
        budget: config.budget,
        bounded_grid_points: scan.grid().iter().filter(|p| p.status == OrbitStatus::Bounded).count(),
        refined_points: scan.points.len() - scan.grid_size,
        final_measure: *scan.arc_measure.last().unwrap_or(&0.0),
        arc_measure: scan.arc_measure.clone(),
        monotone,
        certified_fraction,
        outputs: outputs.clone(),
    };
    emit(&Envelope::new("scan-summary", &summary), None)?;
    if !monotone {
        return Err(CliError::Violation("bounded-arc measure increased with the budget".into()));
    }
    if failed_pairs > 0 {
        return Err(CliError::Violation(format!("{failed_pairs} Gordon checks failed")));
    }
    Ok(())
}

fn spectral_parameter(args: &GordonArgs) -> Result<C64, CliError> {
    match (&args.z, args.angle) {
        (Some(_), Some(_)) => Err(CliError::Config("give either --z or --angle".into())),
        (Some(z), None) => Ok(c64(parse_complex(z)?)),
        (None, Some(a)) => Ok(C64::from_polar(1.0, a)),
        (None, None) => Err(CliError::Config("this mode needs --z or --angle".into())),
    }
}

fn k_range(args: &GordonArgs) -> Result<(usize, usize), CliError> {
    let (lo, hi) = parse_range(&args.k_range)?;
    if lo < 1 {
        return Err(CliError::Config("scale indices start at 1".into()));
    }
    Ok((lo as usize, hi as usize))
}

/// `ω` on `[start, start + len)`: the Sturmian word at phase `phi`, or the
/// rotation coding of `interval` when one is given.
fn coefficient_word(m: &Model, args: &GordonArgs, start: i64, len: usize) -> Result<Word, CliError> {
    let bits = precision_bits()?;
    let theta = &m.freq.theta;
    let phi = parse_phase(args.phi.as_deref(), theta, bits)?;
    match &args.interval {
        Some(_) => {
            let iv = parse_interval(args.interval.as_deref(), theta, bits)?;
            Ok(rotation_word(theta, &phi, &iv, start, len)?)
        }
        None => Ok(mechanical_word(theta, &phi, start, len, Variant::Floor)?),
    }
}

#[derive(Serialize)]
struct SingleCertificate<T: Serialize, C: Serialize> {
    z: [f64; 2],
    scale: T,
    certificate: C,
}

pub fn gordon(args: &GordonArgs) -> Result<(), CliError> {
    let (lo, hi) = k_range(args)?;
    let n_terms = args.scale.max(hi).max(args.budget) + 3;
    let m = Model::build(&args.model, n_terms)?;
    let out = args.out.as_deref();
    let violation = |bad: bool, what: String| -> Result<(), CliError> {
        if bad && args.fail_on_violation {
            Err(CliError::Violation(what))
        } else {
            Ok(())
        }
    };
    match args.mode {
        GordonMode::Two => {
            let z = spectral_parameter(args)?;
            let k = args.scale;
            let reach = (m.q(k + 1)? + m.q(k)?) as i64;
            let word = coefficient_word(&m, args, -reach, 3 * reach as usize)?;
            let scale = gordon_scales(&word, &m.freq.cf, k)?;
            let alpha = m.alpha(word)?;
            let trace = szego_cocycle(&alpha, scale.n as i64, 0, z)?.trace().norm();
            let c = args.c.unwrap_or(trace);
            let cert = certify(z, &[scale.n], |n, phi0| check_two_block(&alpha, z, n, phi0, c))?;
            let ok = cert.all_ok();
            emit(
                &Envelope::new(
                    "gordon-two",
                    SingleCertificate {
                        z: [z.re, z.im],
                        scale,
                        certificate: cert,
                    },
                ),
                out,
            )?;
            violation(!ok, "two-block bound failed".into())
        }
        GordonMode::Three => {
            if let Some(phases) = args.phases {
                let bits = precision_bits()?;
                let iv = parse_interval(args.interval.as_deref(), &m.freq.theta, bits)?;
                let fraction = rotcode_three_block_fraction(&m.freq.theta, &iv, &m.freq.cf, lo..=hi, phases)?;
                let measure = rotcode_phase_measure(&m.freq.cf, lo..=hi)?;
                #[derive(Serialize)]
                struct Phases<A: Serialize, B: Serialize> {
                    fraction: A,
                    measure: B,
                }
                return emit(&Envelope::new("gordon-three-phases", Phases { fraction, measure }), out);
            }
            let z = spectral_parameter(args)?;
            let n = m.q(args.scale)?;
            let word = coefficient_word(&m, args, -(n as i64), 3 * n as usize)?;
            let alpha = m.alpha(word)?;
            let cert = certify(z, &[n], |n, phi0| check_three_block(&alpha, z, n, phi0))?;
            let ok = cert.all_ok();
            emit(
                &Envelope::new(
                    "gordon-three",
                    SingleCertificate {
                        z: [z.re, z.im],
                        scale: n,
                        certificate: cert,
                    },
                ),
                out,
            )?;
            violation(!ok, "three-block bound failed".into())
        }
        GordonMode::Sequence => {
            let scales: Vec<u64> = (lo..=hi).map(|k| m.q(k)).collect::<Result<_, _>>()?;
            let n_max = *scales.last().unwrap() as i64;
            let word = coefficient_word(&m, args, -n_max, 3 * n_max as usize)?;
            let alpha = m.alpha(word)?;
            let c_list = args
                .c_list
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::Config(format!("bad --c-list {:?}", args.c_list)))?;
            if c_list.iter().any(|&c| !(c > 0.0)) || !(args.tol > 0.0) {
                return Err(CliError::Config("constants and tolerance must be positive".into()));
            }
            let report = gordon_sequence_test(&alpha, &scales, &c_list, args.tol)?;
            emit(&Envelope::new("gordon-sequence", report), out)
        }
        GordonMode::Exclude => {
            let config = ExperimentConfig {
                beta: [m.beta.re, m.beta.im],
                gamma: [m.gamma.re, m.gamma.im],
                theta: ThetaSpec::parse(args.model.theta.as_deref(), args.model.cf.as_deref())?,
                phi: None,
                grid: args.grid,
                budget: args.budget,
                refine: 0,
                escape_threshold: cmvlab::tracemap::DEFAULT_ESCAPE_THRESHOLD,
                k_range: (lo, hi),
                seed: 0,
                degenerate: m.degenerate,
                precision_bits: precision_bits()?,
                outputs: OutputPaths {
                    certificates: args.out.clone(),
                    ..Default::default()
                },
            };
            config.validate()?;
            let freq = config.frequency()?;
            let scan = run_scan(&config, &freq)?;
            let summary = eigenvalue_excluder(m.beta, m.gamma, &freq, &scan, lo..=hi, args.max_points)?;
            let failed = summary.pairs - summary.certified;
            let line = format!(
                "{} points, {} of {} pairs certified ({:.6}), min slack {:.6}",
                summary.points, summary.certified, summary.pairs, summary.certified_fraction, summary.min_slack
            );
            emit(
                &Envelope::new(
                    "certificates",
                    CertificatesFile {
                        config: &config,
                        summary,
                    },
                ),
                out,
            )?;
            if out.is_some() {
                println!("{line}");
            }
            violation(failed > 0, format!("{failed} Gordon checks failed"))
        }
    }
}

pub fn plot(scan: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let file = SpectrumScanFile::read(scan)?;
    let svg = plot::render(&file);
    match out {
        Some(p) => write_file(p, &svg),
        None => {
            print!("{svg}");
            Ok(())
        }
    }
}
