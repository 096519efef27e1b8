//! Command-line surface over the library: parsing and checking the text
//! formats, applying and composing translations, emitting interpretation
//! obligations (optionally as TPTP problem files), evaluating formulas on
//! finite models, building internal models, running the Schröder–Bernstein
//! construction and its formula-level builder, the directification rewrites,
//! and the bundled verification demos.
//!
//! Exit codes: `0` — the command ran and every verdict it printed passed;
//! `1` — the command ran but at least one check failed; `2` — usage, I/O,
//! parse, or precondition errors.
//!
//! Wherever a command takes a theory, translation, or interpretation, the
//! argument is first tried as a bundled name ([`corpus`]) and then as a file
//! path. Reports go to stdout and are byte-stable across runs; timings, when
//! collected, go to stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::corpus;
use crate::interp::{
    export_tptp, interpretation_obligations, Interpretation, Obligation,
};
use crate::model::internal::internal_model;
use crate::model::{parse_model, print_model, FiniteStructure};
use crate::report::RunReport;
use crate::sb::{
    build_h_formula, check_bijection_on_quotients, compute_h, compute_h_fast, parse_sb, print_sb,
    validate_sb, SbStructure,
};
use crate::synonymy::{make_direct, sb_directify, testbed, BiInterpretation};
use crate::syntax::parse::{parse_formula, parse_formula_open, parse_proto, parse_theory, MacroTable};
use crate::syntax::print::{formula_to_string, proto_to_string, theory_to_string};
use crate::syntax::{ProtoFormula, Signature, Theory};
use crate::translation::{parse_translation, print_translation, Translation};
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "folint",
    version,
    about = "First-order theories, relativized translations, interpretation obligations, \
             finite models, and constructive Schröder–Bernstein bijections",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a theory, translation, model, or sb file and reprint it canonically.
    Parse {
        /// Input file; its kind is detected from the leading keyword.
        file: PathBuf,
    },
    /// Parse a theory and report per-axiom well-formedness verdicts.
    CheckTheory {
        /// Bundled theory name or theory file.
        theory: String,
    },
    /// Apply a translation to a formula over its source signature.
    Translate {
        /// Bundled translation name or translation file.
        #[arg(long)]
        translation: String,
        /// Formula text over the source signature (free variables allowed).
        #[arg(long)]
        formula: String,
    },
    /// Compose two translations, applying the first and then the second.
    Compose {
        /// Bundled translation name or file; applied first.
        t1: String,
        /// Bundled translation name or file; applied second (its source must
        /// be the target of the first).
        t2: String,
        /// Write the composite translation to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the proof obligations of an interpretation.
    Obligations {
        /// Bundled interpretation name (L, K, M, N, Ktoy, Mtoy, Kpart,
        /// Mpart) or a translation file between bundled theories.
        #[arg(long)]
        interp: String,
        /// Also write one TPTP FOF problem file per obligation into this
        /// directory (requires a one-sorted target).
        #[arg(long, value_name = "DIR")]
        tptp: Option<PathBuf>,
    },
    /// Evaluate a sentence on a finite model.
    Eval {
        /// Model file; its header names the signature.
        #[arg(long)]
        model: PathBuf,
        /// Closed formula text over the model's signature.
        #[arg(long)]
        formula: String,
    },
    /// Build the internal model induced by a translation on a model of its
    /// target.
    InternalModel {
        /// Bundled translation name or translation file.
        #[arg(long)]
        translation: String,
        /// Model file over the translation's target signature.
        #[arg(long)]
        model: PathBuf,
    },
    /// Validate an sb structure, compute the bijection H, and check it.
    SbRun {
        /// Structure file (sections: objects, classes, A, B, EA, EB, F, G).
        #[arg(long)]
        structure: PathBuf,
        /// Use the chain-tracing fast path (requires the full powerset
        /// class family).
        #[arg(long)]
        fast: bool,
        /// Cross-check the result against the other algorithm.
        #[arg(long)]
        oracle: bool,
    },
    /// Build the bijection formula H(x, y) from class data over a theory.
    SbFormula {
        /// Class interpretation: `ACL`, `ACFb`, or a translation file whose
        /// source is the two-sorted object/class signature.
        #[arg(long)]
        ac_interp: String,
        /// Data file defining A, B, EA, EB, F, G as `NAME = [params] body`
        /// lines over the class interpretation's target.
        #[arg(long)]
        data: PathBuf,
    },
    /// Rewrite an interpretation into a definably isomorphic direct one.
    Mkdirect {
        /// The interpretation to rewrite (bundled name or translation file).
        #[arg(long)]
        k: String,
        /// A direct interpretation back (bundled name or translation file).
        #[arg(long)]
        m: String,
        /// Graph of an isomorphism K∘M → id, as `[params] body` over K's
        /// target.
        #[arg(long)]
        iso: String,
    },
    /// Directify the forward half of a bi-interpretation via the switch
    /// construction.
    Synonymize {
        /// Bi-interpretation: `toy`, `part`, or a file with `k`, `m`, `fv`,
        /// and `gu` lines.
        #[arg(long)]
        bi: String,
        /// Class interpretation over the forward target: `ACL`, `ACFb`, or a
        /// translation file.
        #[arg(long)]
        ac_interp: String,
        /// Downgrade failed identity-preservation preconditions to warnings.
        #[arg(long)]
        force: bool,
    },
    /// Build a truncated tagged-set universe and exhibit a nontrivial
    /// involution fixing a chosen finite set.
    Countermodel {
        /// Rank bound of the universe.
        #[arg(long)]
        depth: usize,
        /// Width bound: members kept per set at each rank.
        #[arg(long)]
        width: usize,
        /// Elements the involution must fix, as printed terms like `0{}`;
        /// repeatable, and each occurrence may list several separated by
        /// spaces.
        #[arg(long, value_name = "IDS")]
        fix: Vec<String>,
    },
    /// Run a bundled end-to-end demonstration.
    Demo {
        /// Which demonstration to run; currently `appendix-c`.
        what: String,
        /// Rank bound of the truncated universe.
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Width bound of the truncated universe.
        #[arg(long, default_value_t = 2)]
        width: usize,
        /// Rank margin reserved for coding overhead.
        #[arg(long, default_value_t = 2)]
        margin: usize,
    },
}

/// Entry point used by the binary and by tests. Never panics on bad input;
/// returns the process exit code.
pub fn run<I>(args: I) -> i32
where
    I: IntoIterator<Item = OsString>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Parse { file } => cmd_parse(&file),
        Command::CheckTheory { theory } => cmd_check_theory(&theory),
        Command::Translate { translation, formula } => cmd_translate(&translation, &formula),
        Command::Compose { t1, t2, out } => cmd_compose(&t1, &t2, out.as_deref()),
        Command::Obligations { interp, tptp } => cmd_obligations(&interp, tptp.as_deref()),
        Command::Eval { model, formula } => cmd_eval(&model, &formula),
        Command::InternalModel { translation, model } => cmd_internal_model(&translation, &model),
        Command::SbRun { structure, fast, oracle } => cmd_sb_run(&structure, fast, oracle),
        Command::SbFormula { ac_interp, data } => cmd_sb_formula(&ac_interp, &data),
        Command::Mkdirect { k, m, iso } => cmd_mkdirect(&k, &m, &iso),
        Command::Synonymize { bi, ac_interp, force } => cmd_synonymize(&bi, &ac_interp, force),
        Command::Countermodel { depth, width, fix } => cmd_countermodel(depth, width, &fix),
        Command::Demo { what, depth, width, margin } => cmd_demo(&what, depth, width, margin),
    }
}

// ---------------------------------------------------------------------------
// Argument resolution: bundled names first, then files.

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Unknown(format!("cannot read {}: {}", path.display(), e))
    })
}

/// Signature-and-macros resolver over the bundled theories, used when parsing
/// translation and model files.
fn resolve_bundled(name: &str) -> Option<(Signature, MacroTable)> {
    corpus::theory(name).map(|t| (t.signature, t.macros))
}

fn load_theory(spec: &str) -> Result<Theory> {
    if let Some(t) = corpus::theory(spec) {
        return Ok(t);
    }
    parse_theory(&read_file(Path::new(spec))?)
}

fn load_translation(spec: &str) -> Result<Translation> {
    if let Some(t) = corpus::translation(spec) {
        return Ok(t);
    }
    parse_translation(&read_file(Path::new(spec))?, &resolve_bundled)
}

/// The bundled theory a signature came from, required to wrap a bare
/// translation into an interpretation.
fn theory_of_signature(sig: &Signature) -> Result<Theory> {
    match corpus::theory(&sig.name) {
        Some(t) if t.signature == *sig => Ok(t),
        _ => Err(Error::Unknown(format!(
            "no bundled theory over the signature {}",
            sig.name
        ))),
    }
}

fn load_interp(spec: &str) -> Result<Interpretation> {
    if let Some(i) = corpus::interpretation(spec) {
        return Ok(i);
    }
    match spec {
        "Ktoy" => return Ok(testbed::toy_bi_interpretation()?.0.k),
        "Mtoy" => return Ok(testbed::toy_bi_interpretation()?.0.m),
        "Kpart" => return Ok(testbed::part_bi_interpretation()?.k),
        "Mpart" => return Ok(testbed::part_bi_interpretation()?.m),
        _ => {}
    }
    let tau = load_translation(spec)?;
    let source = theory_of_signature(&tau.source)?;
    let target = theory_of_signature(&tau.target)?;
    Interpretation::new(tau.name.clone(), source, tau, target)
}

/// A class interpretation for the switch construction: the two-sorted
/// object/class signature read inside a one-sorted theory.
fn load_ac_interp(spec: &str) -> Result<Translation> {
    match spec {
        "ACL" => Ok(testbed::toy_bi_interpretation()?.1),
        "ACFb" => parse_translation(
            "translation iACFb : ac -> ACFb\n\
             delta c (z) = cl(z)\n\
             map in(x ; z) = in(x, z)\n",
            &resolve_bundled,
        ),
        _ => parse_translation(&read_file(Path::new(spec))?, &resolve_bundled),
    }
}

fn load_model(path: &Path) -> Result<FiniteStructure> {
    parse_model(&read_file(path)?, &|name| {
        corpus::theory(name).map(|t| t.signature)
    })
}

/// Macros usable in formulas over a signature: those of the bundled theory
/// of the same name, if any.
fn macros_for(sig: &Signature) -> MacroTable {
    match corpus::theory(&sig.name) {
        Some(t) if t.signature == *sig => t.macros,
        _ => MacroTable::default(),
    }
}

fn exit_code(passed: bool) -> i32 {
    if passed {
        0
    } else {
        1
    }
}

// ---------------------------------------------------------------------------
// Commands.

fn cmd_parse(file: &Path) -> Result<i32> {
    let text = read_file(file)?;
    let keyword = text
        .lines()
        .map(|l| match l.find('#') {
            Some(p) => l[..p].trim(),
            None => l.trim(),
        })
        .find(|l| !l.is_empty())
        .and_then(|l| l.split_whitespace().next())
        .unwrap_or("");
    let printed = match keyword {
        "theory" => theory_to_string(&parse_theory(&text)?),
        "translation" => print_translation(&parse_translation(&text, &resolve_bundled)?),
        "model" => print_model(&parse_model(&text, &|name| {
            corpus::theory(name).map(|t| t.signature)
        })?),
        "sb" => print_sb(&parse_sb(&text)?),
        other => {
            return Err(Error::Parse {
                line: 1,
                msg: format!(
                    "unrecognized leading keyword {:?}; expected theory, translation, model, or sb",
                    other
                ),
            })
        }
    };
    print!("{}", printed);
    Ok(0)
}

fn cmd_check_theory(spec: &str) -> Result<i32> {
    let th = load_theory(spec)?;
    let mut report = RunReport::new(format!("check-theory {}", th.name()));
    match th.validate() {
        Ok(()) => report.pass("signature"),
        Err(e) => report.fail("signature", e.to_string()),
    }
    for (label, ax) in &th.axioms {
        let item = format!("axiom {}", label);
        match ax.well_formed(&th.signature, &[]) {
            Ok(()) if ax.is_closed() => report.pass(item),
            Ok(()) => report.fail(item, "axiom is not a closed sentence"),
            Err(e) => report.fail(item, e.to_string()),
        }
    }
    print!("{}", report.render());
    Ok(exit_code(report.passed()))
}

fn cmd_translate(tspec: &str, formula: &str) -> Result<i32> {
    let tau = load_translation(tspec)?;
    let macros = macros_for(&tau.source);
    let (f, _free) = parse_formula_open(&tau.source, &macros, formula)?;
    let out = tau.apply(&f)?;
    println!("{}", formula_to_string(&out, !tau.target.is_one_sorted()));
    Ok(0)
}

fn cmd_compose(spec1: &str, spec2: &str, out: Option<&Path>) -> Result<i32> {
    let t1 = load_translation(spec1)?;
    let t2 = load_translation(spec2)?;
    let composite = t1.compose(&t2)?;
    let printed = print_translation(&composite);
    match out {
        Some(path) => fs::write(path, printed)?,
        None => print!("{}", printed),
    }
    Ok(0)
}

fn cmd_obligations(spec: &str, tptp: Option<&Path>) -> Result<i32> {
    let k = load_interp(spec)?;
    let annotate = !k.target.signature.is_one_sorted();
    let obligations = interpretation_obligations(&k)?;
    println!(
        "interpretation {} : {} -> {}",
        k.name,
        k.source.name(),
        k.target.name()
    );
    println!("obligations {}", obligations.len());
    for ob in &obligations {
        println!("{}: {}", ob.label, formula_to_string(&ob.sentence, annotate));
    }
    if let Some(dir) = tptp {
        fs::create_dir_all(dir)?;
        for (i, ob) in obligations.iter().enumerate() {
            let text = export_tptp(std::slice::from_ref(ob), &k.target)?;
            fs::write(dir.join(problem_file_name(i, ob)), text)?;
        }
        println!("tptp: {} ({} files)", dir.display(), obligations.len());
    }
    Ok(0)
}

fn problem_file_name(index: usize, ob: &Obligation) -> String {
    let slug: String = ob
        .label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    format!("{:03}_{}.p", index, slug)
}

fn cmd_eval(model: &Path, formula: &str) -> Result<i32> {
    let s = load_model(model)?;
    let macros = macros_for(&s.signature);
    let f = parse_formula(&s.signature, &macros, formula, &[])?;
    let value = s.eval_sentence(&f)?;
    let mut report = RunReport::new(format!("eval {}", s.name));
    if value {
        report.pass(formula.trim());
    } else {
        report.fail(formula.trim(), "the sentence is false in the model");
    }
    print!("{}", report.render());
    Ok(exit_code(report.passed()))
}

fn cmd_internal_model(tspec: &str, model: &Path) -> Result<i32> {
    let tau = load_translation(tspec)?;
    let s = load_model(model)?;
    match internal_model(&tau, &s)? {
        Some(inner) => {
            print!("{}", print_model(&inner));
            Ok(0)
        }
        None => {
            println!(
                "no internal model: a relativized domain of {} is empty in {}",
                tau.name, s.name
            );
            Ok(1)
        }
    }
}

fn cmd_sb_run(structure: &Path, fast: bool, oracle: bool) -> Result<i32> {
    let s = parse_sb(&read_file(structure)?)?;
    let validation = validate_sb(&s);
    print!("{}", validation.render());
    let mut ok = validation.passed();

    let h = if fast { compute_h_fast(&s)? } else { compute_h(&s)? };
    if oracle {
        let other = if fast { compute_h(&s)? } else { compute_h_fast(&s)? };
        let mut report = RunReport::new(format!("oracle({})", s.name));
        if h == other {
            report.pass("oracle.agreement");
        } else {
            let diff = h
                .symmetric_difference(&other)
                .next()
                .map(|&(x, y)| pair_text(&s, x, y))
                .unwrap_or_default();
            report.fail("oracle.agreement", format!("H differs at {}", diff));
        }
        print!("{}", report.render());
        ok &= report.passed();
    }

    let bijection = check_bijection_on_quotients(&s, &h);
    print!("{}", bijection.render());
    ok &= bijection.passed();

    let pairs: Vec<String> = h.iter().map(|&(x, y)| pair_text(&s, x, y)).collect();
    if pairs.is_empty() {
        println!("H: (empty)");
    } else {
        println!("H: {}", pairs.join(", "));
    }
    Ok(exit_code(ok))
}

fn pair_text(s: &SbStructure, x: u32, y: u32) -> String {
    format!("{} -> {}", s.objects[x as usize], s.objects[y as usize])
}

/// The six class-data sections of an `sb-formula` data file, in fixed order.
const DATA_SECTIONS: [&str; 6] = ["A", "B", "EA", "EB", "F", "G"];

fn parse_sb_data(
    text: &str,
    sig: &Signature,
    macros: &MacroTable,
) -> Result<BTreeMap<&'static str, ProtoFormula>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((name, body)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: line_no,
                msg: "expected NAME = [params] body".into(),
            });
        };
        let Some(&key) = DATA_SECTIONS.iter().find(|&&s| s == name.trim()) else {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "unknown section {:?}; expected one of {}",
                    name.trim(),
                    DATA_SECTIONS.join(", ")
                ),
            });
        };
        if out
            .insert(key, parse_proto(sig, macros, body.trim())?)
            .is_some()
        {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("duplicate section {}", key),
            });
        }
    }
    for key in DATA_SECTIONS {
        if !out.contains_key(key) {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: format!("missing section {}", key),
            });
        }
    }
    Ok(out)
}

fn cmd_sb_formula(ispec: &str, data: &Path) -> Result<i32> {
    let iota = load_ac_interp(ispec)?;
    let macros = macros_for(&iota.target);
    let sections = parse_sb_data(&read_file(data)?, &iota.target, &macros)?;
    let h = build_h_formula(
        &iota,
        &sections["A"],
        &sections["B"],
        &sections["EA"],
        &sections["EB"],
        &sections["F"],
        &sections["G"],
    )?;
    println!("H = {}", proto_to_string(&h, !iota.target.is_one_sorted()));
    Ok(0)
}

fn print_obligations(obligations: &[Obligation], annotate: bool) {
    println!("obligations {}", obligations.len());
    for ob in obligations {
        println!("{}: {}", ob.label, formula_to_string(&ob.sentence, annotate));
    }
}

fn cmd_mkdirect(kspec: &str, mspec: &str, iso: &str) -> Result<i32> {
    let k = load_interp(kspec)?;
    let m = load_interp(mspec)?;
    let macros = macros_for(&k.target.signature);
    let f = parse_proto(&k.target.signature, &macros, iso)?;
    let (kp, graph, obligations) = make_direct(&k, &m, &f)?;
    let annotate = !kp.target.signature.is_one_sorted();
    print!("{}", print_translation(&kp.translation));
    println!("iso = {}", proto_to_string(&graph, annotate));
    print_obligations(&obligations, annotate);
    Ok(0)
}

/// Read a bi-interpretation description: `bi NAME`, `k SPEC`, `m SPEC`
/// (interpretation names or translation files), and the isomorphism graphs
/// `fv = [params] body` (over K's target) and `gu = [params] body` (over K's
/// source).
fn parse_bi_file(text: &str) -> Result<BiInterpretation> {
    let mut k: Option<Interpretation> = None;
    let mut m: Option<Interpretation> = None;
    let mut fv_text: Option<String> = None;
    let mut gu_text: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = match line.split_once(char::is_whitespace) {
            Some((h, r)) => (h, r.trim()),
            None => (line, ""),
        };
        let graph_body = |rest: &str| -> Result<String> {
            match rest.strip_prefix('=') {
                Some(b) => Ok(b.trim().to_string()),
                None => Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {} = [params] body", head),
                }),
            }
        };
        match head {
            "bi" => {}
            "k" => k = Some(load_interp(rest)?),
            "m" => m = Some(load_interp(rest)?),
            "fv" => fv_text = Some(graph_body(rest)?),
            "gu" => gu_text = Some(graph_body(rest)?),
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unknown keyword {:?} in bi-interpretation file", other),
                })
            }
        }
    }
    let missing = |what: &str| Error::Parse {
        line: text.lines().count(),
        msg: format!("missing {} line", what),
    };
    let k = k.ok_or_else(|| missing("k"))?;
    let m = m.ok_or_else(|| missing("m"))?;
    let fv_text = fv_text.ok_or_else(|| missing("fv"))?;
    let gu_text = gu_text.ok_or_else(|| missing("gu"))?;
    let fv = parse_proto(
        &k.target.signature,
        &macros_for(&k.target.signature),
        &fv_text,
    )?;
    let gu = parse_proto(
        &k.source.signature,
        &macros_for(&k.source.signature),
        &gu_text,
    )?;
    BiInterpretation::new(k, m, fv, gu)
}

fn load_bi(spec: &str) -> Result<BiInterpretation> {
    match spec {
        "toy" => Ok(testbed::toy_bi_interpretation()?.0),
        "part" => testbed::part_bi_interpretation(),
        _ => parse_bi_file(&read_file(Path::new(spec))?),
    }
}

fn cmd_synonymize(bspec: &str, ispec: &str, force: bool) -> Result<i32> {
    let bi = load_bi(bspec)?;
    let iota = load_ac_interp(ispec)?;
    let witness = sb_directify(&bi, &iota, force)?;
    for w in &witness.warnings {
        println!("warning: {}", w);
    }
    let annotate = !witness.k_prime.target.signature.is_one_sorted();
    print!("{}", print_translation(&witness.k_prime.translation));
    print_obligations(&witness.obligations, annotate);
    Ok(0)
}

fn cmd_countermodel(depth: usize, width: usize, fix: &[String]) -> Result<i32> {
    let ids: Vec<&str> = fix
        .iter()
        .flat_map(|chunk| chunk.split_whitespace())
        .collect();
    let demo = crate::corpus::countermodel_demo(depth, width, &ids)?;
    print!("{}", demo.report.render());
    if !demo.fixed.is_empty() {
        println!("fixed: {}", demo.fixed.join(" "));
    }
    println!("top-pair-classes: {}", demo.top_pair_classes);
    eprint!("{}", demo.report.render_timings());
    Ok(exit_code(demo.report.passed()))
}

fn cmd_demo(what: &str, depth: usize, width: usize, margin: usize) -> Result<i32> {
    if what != "appendix-c" {
        return Err(Error::Unknown(format!(
            "unknown demo {:?}; available: appendix-c",
            what
        )));
    }
    let report = corpus::appendixc_check(depth, width, margin)?;
    print!("{}", report.render());
    eprint!("{}", report.render_timings());
    Ok(exit_code(report.passed()))
}
