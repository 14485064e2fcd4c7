//! Command-line front end for `mcgroots`.
//!
//! Every command produces a [`Report`], printed as text or (with `--json`)
//! as a stable JSON object. Exit codes: 0 success, 1 usage error, 2 the
//! mathematics says no.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::presentation::{check_certificate, relation_catalog, Certificate, RelationInstance};
use crate::repr::{homology_of, perm_of, sign_of};
use crate::roots::{
    construct_braid_root, construct_root, is_nontrivial, Complement, RootError, RootRequest,
    RootResult, Target, Verdict,
};
use crate::small_genus::{
    certify_no_root_g3, mn2_nontrivial_roots, mn2_root_search, G3Verdict, KleinFour,
    DEFAULT_SCAN_BOUND,
};
use crate::word::{Genus, SurfaceModel, Word};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

pub const SCAN_BOUND_ENV: &str = "MCGROOTS_SCAN_BOUND";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    pub sign: Verdict,
    pub permutation: Verdict,
    pub homology: Verdict,
    pub certificate: Verdict,
    pub nontriviality: Verdict,
}

impl Checks {
    pub fn all_na() -> Self {
        Checks {
            sign: Verdict::NotApplicable,
            permutation: Verdict::NotApplicable,
            homology: Verdict::NotApplicable,
            certificate: Verdict::NotApplicable,
            nontriviality: Verdict::NotApplicable,
        }
    }
}

impl From<crate::roots::VerificationReport> for Checks {
    fn from(r: crate::roots::VerificationReport) -> Self {
        Checks {
            sign: r.sign,
            permutation: r.permutation,
            homology: r.homology,
            certificate: r.certificate,
            nontriviality: r.nontriviality,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub genus: Option<u32>,
    pub model: Option<String>,
    pub target: Option<String>,
    pub root: Option<String>,
    pub degree: Option<u32>,
    pub checks: Checks,
    pub assumptions: Vec<String>,
    pub verdict: String,
    pub citation: Option<String>,
    pub notes: Vec<String>,
    pub details: Option<serde_json::Value>,
    pub elapsed_ms: u64,
}

impl Report {
    fn new(command: String) -> Self {
        Report {
            command,
            genus: None,
            model: None,
            target: None,
            root: None,
            degree: None,
            checks: Checks::all_na(),
            assumptions: Vec::new(),
            verdict: String::new(),
            citation: None,
            notes: Vec::new(),
            details: None,
            elapsed_ms: 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("command: {}\n", self.command);
        if let (Some(g), Some(m)) = (self.genus, &self.model) {
            s += &format!("model: {m}, genus {g}\n");
        }
        let fields = [("target", &self.target), ("root", &self.root)];
        for (name, value) in fields {
            if let Some(v) = value {
                s += &format!("{name}: {v}\n");
            }
        }
        if let Some(d) = self.degree {
            s += &format!("degree: {d}\n");
        }
        let c = &self.checks;
        s += &format!(
            "checks: sign={} permutation={} homology={} certificate={} nontriviality={}\n",
            c.sign, c.permutation, c.homology, c.certificate, c.nontriviality
        );
        if !self.assumptions.is_empty() {
            s += "assumptions:\n";
            for a in &self.assumptions {
                s += &format!("  - {a}\n");
            }
        }
        for n in &self.notes {
            s += &format!("note: {n}\n");
        }
        s += &format!("verdict: {}\n", self.verdict);
        if let Some(c) = &self.citation {
            s += &format!("citation: {c}\n");
        }
        s += &format!("elapsed: {} ms\n", self.elapsed_ms);
        s
    }
}

#[derive(Debug, Parser)]
#[command(name = "mcgroots", version, about = "Roots of crosscap transpositions and slides")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    U,
    Y,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::U => Target::U,
            TargetArg::Y => Target::Y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ComplementArg {
    Auto,
    Orientable,
    Nonorientable,
}

impl From<ComplementArg> for Complement {
    fn from(c: ComplementArg) -> Self {
        match c {
            ComplementArg::Auto => Complement::Auto,
            ComplementArg::Orientable => Complement::Orientable,
            ComplementArg::Nonorientable => Complement::Nonorientable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RepArg {
    Sign,
    Perm,
    Homology,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Standard,
    Hybrid,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct and verify a root of u1 or y1.
    Root {
        #[arg(long)]
        genus: u32,
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long, value_enum, default_value = "auto")]
        complement: ComplementArg,
        #[arg(long)]
        json: bool,
        /// Write the rewriting certificate to this file.
        #[arg(long)]
        certificate_out: Option<PathBuf>,
    },
    /// Check every relation of the presentation under the representations.
    Relations {
        #[arg(long)]
        genus: u32,
        #[arg(long, value_enum, default_value = "all")]
        rep: RepArg,
        #[arg(long)]
        json: bool,
    },
    /// Certify nonexistence of roots at genus 2 or 3.
    SmallGenus {
        #[arg(long)]
        genus: u32,
        #[arg(long, value_enum, default_value = "u")]
        target: TargetArg,
        #[arg(long, default_value_t = 9)]
        max_degree: u32,
        /// Entry bound of the GL(2,Z) scan (overrides MCGROOTS_SCAN_BOUND).
        #[arg(long)]
        bound: Option<i64>,
        #[arg(long)]
        json: bool,
    },
    /// Root of an elementary braid, via its image in the crosscap alphabet.
    BraidRoot {
        #[arg(long)]
        punctures: u32,
        #[arg(long)]
        index: u32,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        certificate_out: Option<PathBuf>,
    },
    /// Check W^d = V with every applicable oracle.
    Verify {
        #[arg(long)]
        genus: u32,
        #[arg(long, value_enum, default_value = "standard")]
        model: ModelArg,
        #[arg(long)]
        word: String,
        #[arg(long, allow_hyphen_values = true)]
        power: i64,
        #[arg(long)]
        equals: String,
        /// Certificate file proving W^d = V.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

impl Command {
    fn json(&self) -> bool {
        match self {
            Command::Root { json, .. }
            | Command::Relations { json, .. }
            | Command::SmallGenus { json, .. }
            | Command::BraidRoot { json, .. }
            | Command::Verify { json, .. } => *json,
        }
    }
}

/// Error that maps to exit code 1.
#[derive(Debug)]
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let echo = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let json = cli.command.json();
    let start = Instant::now();
    match execute(&cli.command, echo) {
        Ok((mut report, code)) => {
            report.elapsed_ms = start.elapsed().as_millis() as u64;
            let text = if json {
                report.to_json() + "\n"
            } else {
                report.to_text()
            };
            let _ = write!(out, "{text}");
            code
        }
        Err(Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn execute(cmd: &Command, echo: String) -> Result<(Report, i32), Usage> {
    let mut report = Report::new(echo);
    let code = match cmd {
        Command::Root {
            genus,
            target,
            complement,
            certificate_out,
            ..
        } => {
            let req = RootRequest {
                genus: Genus::new(*genus)?,
                target: (*target).into(),
                complement: (*complement).into(),
            };
            report.genus = Some(*genus);
            report.target = Some(format!("{}1", Target::from(*target)));
            let result = construct_root(&req);
            root_outcome(&mut report, result, certificate_out.as_ref())?
        }
        Command::BraidRoot {
            punctures,
            index,
            certificate_out,
            ..
        } => {
            report.genus = Some(*punctures);
            report.target = Some(format!("u{index}"));
            report
                .notes
                .push(format!("elementary braid sigma_{index} in M(S_0^{punctures}) maps to u{index}"));
            let result = construct_braid_root(*punctures, *index);
            root_outcome(&mut report, result, certificate_out.as_ref())?
        }
        Command::Relations { genus, rep, .. } => cmd_relations(&mut report, *genus, *rep)?,
        Command::SmallGenus {
            genus,
            target,
            max_degree,
            bound,
            ..
        } => cmd_small_genus(&mut report, *genus, (*target).into(), *max_degree, *bound)?,
        Command::Verify {
            genus,
            model,
            word,
            power,
            equals,
            certificate,
            ..
        } => {
            let model = match model {
                ModelArg::Standard => SurfaceModel::standard(*genus)?,
                ModelArg::Hybrid => SurfaceModel::hybrid(*genus)?,
            };
            let cert = match certificate {
                Some(path) => Some(Certificate::from_text(&std::fs::read_to_string(path)?)?),
                None => None,
            };
            cmd_verify(&mut report, model, word, *power, equals, cert.as_ref())?
        }
    };
    Ok((report, code))
}

fn root_outcome(
    report: &mut Report,
    result: Result<RootResult, RootError>,
    certificate_out: Option<&PathBuf>,
) -> Result<i32, Usage> {
    match result {
        Ok(r) => {
            let model = r.root.model();
            report.model = Some(model.keyword().to_string());
            report.target = Some(r.target.to_string());
            report.root = Some(r.root.to_string());
            report.degree = Some(r.degree);
            report.checks = r.report.into();
            report.assumptions = r.assumptions.clone();
            if let Some(b) = r.bezout {
                report.notes.push(format!(
                    "Bezout pair p = {}, q = {} for modulus {}",
                    b.p, b.q, b.modulus
                ));
            }
            if let Some(from) = r.translated_from {
                report.notes.push(format!(
                    "translated construction: conjugate of the u{from} root"
                ));
            }
            report.notes.push(format!(
                "certificate: {} steps",
                r.certificate.steps.len()
            ));
            if let Some(path) = certificate_out {
                std::fs::write(path, r.certificate.to_text())?;
            }
            let ok = r.report.all_ok();
            report.verdict = if ok { "root-verified" } else { "verification-failed" }.into();
            Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Err(RootError::Nonexistence {
            citation,
            machine_certified,
            ..
        }) => {
            report.verdict = "nonexistent".into();
            report.citation = Some(citation);
            report.notes.push(if machine_certified {
                "machine-certified by the small-genus command".to_string()
            } else {
                "not machine-certified".to_string()
            });
            Ok(EXIT_NEGATIVE)
        }
        Err(e) => Err(Usage(e.to_string())),
    }
}

/// Outcome of running the relation catalog through the oracles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub instances: usize,
    pub sign: Verdict,
    pub permutation: Verdict,
    pub homology: Verdict,
    pub failures: Vec<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn check_instance(rel: &RelationInstance, rep: RepArg) -> [Option<bool>; 3] {
    let want = |r: RepArg| rep == RepArg::All || rep == r;
    let hybrid = rel.model().is_hybrid();
    let sign = want(RepArg::Sign).then(|| sign_of(&rel.lhs) == sign_of(&rel.rhs));
    let perm = (want(RepArg::Perm) && !hybrid)
        .then(|| matches!((perm_of(&rel.lhs), perm_of(&rel.rhs)), (Ok(a), Ok(b)) if a == b));
    let hom = (want(RepArg::Homology) && !hybrid).then(|| {
        matches!((homology_of(&rel.lhs), homology_of(&rel.rhs)), (Ok(a), Ok(b)) if a == b)
    });
    [sign, perm, hom]
}

/// Runs every catalog instance at genus `g` (both models when the hybrid
/// model exists) through the chosen oracles.
pub fn relation_suite(g: u32, rep: RepArg) -> Result<SuiteOutcome, crate::word::WordError> {
    let mut catalog = relation_catalog(SurfaceModel::standard(g)?);
    if let Ok(h) = SurfaceModel::hybrid(g) {
        catalog.extend(relation_catalog(h));
    }
    let results: Vec<[Option<bool>; 3]> =
        catalog.par_iter().map(|rel| check_instance(rel, rep)).collect();
    let names = ["sign", "permutation", "homology"];
    let mut failures = Vec::new();
    let mut verdicts = [Verdict::NotApplicable; 3];
    for (rel, res) in catalog.iter().zip(&results) {
        for k in 0..3 {
            match res[k] {
                Some(true) if verdicts[k] == Verdict::NotApplicable => verdicts[k] = Verdict::Pass,
                Some(false) => {
                    verdicts[k] = Verdict::Fail;
                    failures.push(format!("{}: {rel}", names[k]));
                }
                _ => {}
            }
        }
    }
    Ok(SuiteOutcome {
        instances: catalog.len(),
        sign: verdicts[0],
        permutation: verdicts[1],
        homology: verdicts[2],
        failures,
    })
}

fn cmd_relations(report: &mut Report, g: u32, rep: RepArg) -> Result<i32, Usage> {
    let outcome = relation_suite(g, rep)?;
    report.genus = Some(g);
    report.model = Some(
        if SurfaceModel::hybrid(g).is_ok() {
            "standard+hybrid"
        } else {
            "standard"
        }
        .into(),
    );
    report.checks.sign = outcome.sign;
    report.checks.permutation = outcome.permutation;
    report.checks.homology = outcome.homology;
    report.notes.push(format!("{} relation instances checked", outcome.instances));
    report.notes.extend(outcome.failures.iter().map(|f| format!("FAILED {f}")));
    let ok = outcome.passed();
    report.verdict = if ok { "all-relations-hold" } else { "relation-failed" }.into();
    report.details = Some(serde_json::to_value(&outcome)?);
    Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
}

/// Scan bound from the environment, defaulting to [`DEFAULT_SCAN_BOUND`].
pub fn scan_bound_from_env() -> Result<i64, String> {
    match std::env::var(SCAN_BOUND_ENV) {
        Ok(v) => v
            .trim()
            .parse::<i64>()
            .ok()
            .filter(|b| *b >= 1)
            .ok_or_else(|| format!("{SCAN_BOUND_ENV} must be a positive integer, got `{v}`")),
        Err(_) => Ok(DEFAULT_SCAN_BOUND),
    }
}

fn cmd_small_genus(
    report: &mut Report,
    g: u32,
    target: Target,
    max_degree: u32,
    bound: Option<i64>,
) -> Result<i32, Usage> {
    report.genus = Some(g);
    report.model = Some("standard".into());
    let model = SurfaceModel::standard(g)?;
    let target_word = Word::letter(model, target.letter(1))?;
    report.target = Some(target_word.to_string());
    match g {
        2 => {
            let element = KleinFour::of_word(&target_word).expect("genus 2 word");
            let solutions = mn2_root_search(element);
            let nontrivial = mn2_nontrivial_roots(element);
            report.notes.push(format!(
                "M(N_2) = Z_2 + Z_2; target image {element}; solutions of x^d = target for d in 2..=4: {}",
                solutions
                    .iter()
                    .map(|(x, d)| format!("({x}, {d})"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
            report.assumptions.push(
                "M(N_2) is presented by t1^2 = y1^2 = (t1 y1)^2 = 1".into(),
            );
            report.checks.nontriviality = Verdict::from_bool(nontrivial.is_empty());
            report.details = Some(serde_json::json!({
                "solutions": solutions.iter().map(|(x, d)| (x.to_string(), d)).collect::<Vec<_>>(),
                "nontrivial": nontrivial.iter().map(|(x, d)| (x.to_string(), d)).collect::<Vec<_>>(),
            }));
            if nontrivial.is_empty() {
                report.verdict = "no-nontrivial-root".into();
                report.citation = Some(crate::roots::CITE_G2.into());
                Ok(EXIT_OK)
            } else {
                report.verdict = "not-certified".into();
                Ok(EXIT_NEGATIVE)
            }
        }
        3 => {
            let bound = match bound {
                Some(b) => b,
                None => scan_bound_from_env()?,
            };
            let cert = certify_no_root_g3(&target_word, max_degree, bound)?;
            report.degree = Some(max_degree);
            report.assumptions = cert.assumptions.clone();
            report.notes.push(format!(
                "scan: {} torsion elements with entries <= {}, {} conjugacy classes, orders {:?}",
                cert.table.torsion_elements,
                cert.table.entry_bound,
                cert.table.classes.len(),
                cert.table.classes.iter().map(|c| c.order).collect::<Vec<_>>()
            ));
            report.notes.push(format!(
                "maximal finite order {}; order-6 classes: {}",
                cert.table.max_order,
                cert.table.classes_of_order(6).count()
            ));
            report.notes.push(format!(
                "order of t1 t2: {}; every order-6 element cubes to determinant +1: {}",
                cert.twist_chain_order, cert.order_six_cubes_have_det_plus_one
            ));
            let ok = cert.verdict == G3Verdict::NoNontrivialRoot;
            report.checks.nontriviality = Verdict::from_bool(ok);
            report.details = Some(serde_json::to_value(&cert)?);
            if ok {
                report.verdict = "no-nontrivial-root".into();
                report.citation = Some(crate::roots::CITE_G3.into());
                Ok(EXIT_OK)
            } else {
                report.verdict = "not-certified".into();
                Ok(EXIT_NEGATIVE)
            }
        }
        _ => Err(Usage(format!(
            "small-genus handles genus 2 and 3 only, got {g}"
        ))),
    }
}

fn cmd_verify(
    report: &mut Report,
    model: SurfaceModel,
    word: &str,
    power: i64,
    equals: &str,
    certificate: Option<&Certificate>,
) -> Result<i32, Usage> {
    let w = Word::parse(word, model)?;
    let v = Word::parse(equals, model)?;
    let powered = w.power(power)?;
    report.genus = Some(model.genus().get());
    report.model = Some(model.keyword().into());
    report.target = Some(v.to_string());
    report.root = Some(w.to_string());
    report.degree = u32::try_from(power).ok();
    report.checks.sign = Verdict::from_bool(sign_of(&powered) == sign_of(&v));
    if !model.is_hybrid() {
        report.checks.permutation = Verdict::from_bool(perm_of(&powered)? == perm_of(&v)?);
        report.checks.homology = Verdict::from_bool(homology_of(&powered)? == homology_of(&v)?);
    }
    if let Some(c) = certificate {
        if c.model() != model {
            return Err(Usage(format!(
                "certificate is for {}, expected {model}",
                c.model()
            )));
        }
        report.checks.certificate = Verdict::from_bool(
            c.start == powered && c.end == v && check_certificate(c).unwrap_or(false),
        );
        report.assumptions = c
            .schemas_used()
            .into_iter()
            .filter_map(|s| s.assumption())
            .map(str::to_string)
            .collect();
    }
    report.checks.nontriviality = Verdict::from_bool(power.unsigned_abs() >= 2 && is_nontrivial(&w, &v, power.unsigned_abs() as u32));
    let c = report.checks;
    let ok = [c.sign, c.permutation, c.homology, c.certificate]
        .into_iter()
        .all(Verdict::is_ok);
    if model.is_hybrid() && certificate.is_none() {
        report
            .notes
            .push("hybrid words are only checked by the sign character unless a certificate is given".into());
    }
    report.verdict = if ok { "verified" } else { "refuted" }.into();
    Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
}
