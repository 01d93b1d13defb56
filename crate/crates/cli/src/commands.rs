use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use ctxlab::construct::{compile_binary_fn, compile_pair_fn, margin_report, parse_fn_table, FnTable};
use ctxlab::machines::{
    lba_to_lag, parse_machine, transducer_to_dfa, DfaLabel, Fault, MachineError, TransducerSim,
};
use ctxlab::managers::{parse_lag_rule, write_lag_rule, Manager, ManagerConfig, ManagerStyle};
use ctxlab::system::{
    parse_mock, run_system, HaltReason, Mode, NextTokenSource, SystemConfig, SystemTrace,
};
use ctxlab::transformer::{read_weights, write_weights};
use ctxlab::verify::{pipeline_system, run_suite, VerifyError, VerifyOptions};
use ctxlab::vocab::{ACCEPT, CONTROL_1, CONTROL_2, REJECT};
use ctxlab::{NumericFormat, TokenId, Transformer, Vocabulary};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{DfaArgs, FaultArg, ModeArg, RunArgs, SourceArgs};

pub const EXIT_ACCEPT: u8 = 0;
pub const EXIT_REJECT: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;
pub const EXIT_BOUND: u8 = 4;

pub struct Failure {
    pub code: u8,
    pub msg: String,
}

type CmdResult = Result<u8, Failure>;

fn config_err(e: impl Display) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        msg: e.to_string(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path) -> impl Fn(&dyn Display) -> Failure + '_ {
    move |e| config_err(format!("{}: {e}", path.display()))
}

pub fn compile_fn(table: &Path, out: &Path, format: NumericFormat) -> CmdResult {
    let parsed = parse_fn_table(&read(table)?).map_err(|e| in_file(table)(&e))?;
    let (model, cases): (Transformer, Vec<(Vec<TokenId>, TokenId)>) = match &parsed {
        FnTable::Binary(t) => {
            let m = compile_binary_fn(t, format).map_err(config_err)?;
            let cases = t.entries().map(|(a, b, c)| (vec![a, b], c)).collect();
            (m, cases)
        }
        FnTable::Pair(t) => {
            let m = compile_pair_fn(t, format).map_err(config_err)?;
            let v = m.vocab();
            let (c1, c2) = (v.id(CONTROL_1).map_err(config_err)?, v.id(CONTROL_2).map_err(config_err)?);
            let cases = t
                .entries()
                .flat_map(|(a, b, (o1, o2))| [(vec![c1, a, b], o1), (vec![c2, a, b], o2)])
                .collect();
            (m, cases)
        }
    };
    write(out, &write_weights(&model))?;
    let report = margin_report(&model, &cases);
    println!("d_model {}", model.spec().d_model);
    println!(
        "margin cases={} min_gap={:.6} failures={}",
        report.cases,
        report.min_gap,
        report.failures.len()
    );
    if !report.all_correct() {
        return Err(config_err(format!(
            "compiled model misdecodes {} windows",
            report.failures.len()
        )));
    }
    Ok(0)
}

fn load_source(
    args: &SourceArgs,
    config_rule: Option<PathBuf>,
    seed: u64,
    format: Option<NumericFormat>,
) -> Result<Box<dyn NextTokenSource>, Failure> {
    if let Some(p) = &args.model {
        let m = read_weights(&read(p)?).map_err(|e| in_file(p)(&e))?;
        let m = match format {
            Some(f) => m.with_format(f).map_err(config_err)?,
            None => m,
        };
        return Ok(Box::new(m));
    }
    if let Some(p) = &args.mock {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok(Box::new(parse_mock(&read(p)?, &mut rng).map_err(|e| in_file(p)(&e))?));
    }
    if let Some(p) = args.rule.clone().or(config_rule) {
        return Ok(Box::new(parse_lag_rule(&read(&p)?).map_err(|e| in_file(&p)(&e))?));
    }
    Err(config_err("no next-token source: give --model, --mock, --rule or a config `rule`"))
}

fn load_config(path: &Path) -> Result<(ManagerConfig, Option<PathBuf>), Failure> {
    let cfg = ManagerConfig::from_toml(&read(path)?).map_err(|e| in_file(path)(&e))?;
    let rule = cfg.rule.as_ref().map(|r| {
        let r = PathBuf::from(r);
        match path.parent() {
            Some(dir) if r.is_relative() => dir.join(r),
            _ => r,
        }
    });
    Ok((cfg, rule))
}

fn emit_trace(trace: &SystemTrace, vocab: &Vocabulary, dest: Option<&Path>) -> Result<(), Failure> {
    let text = trace.render(vocab);
    match dest {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs `source` and maps the halt to an exit code.
fn execute(
    source: &dyn NextTokenSource,
    cfg: &SystemConfig,
    input: &[TokenId],
    trace_path: Option<&Path>,
) -> CmdResult {
    let vocab = source.vocab();
    if cfg.mode == Mode::Decide && input.is_empty() {
        println!("verdict reject");
        return Ok(EXIT_REJECT);
    }
    let trace = run_system(source, cfg, input).map_err(config_err)?;
    emit_trace(&trace, vocab, trace_path)?;
    if trace.reason == HaltReason::Cap {
        println!("diverged after {} steps", trace.steps());
        return Ok(EXIT_DIVERGED);
    }
    if cfg.mode == Mode::Transduce {
        println!("output {}", vocab.render(&trace.output));
        return Ok(0);
    }
    match trace.reason {
        HaltReason::Token(t) if vocab.name(t) == ACCEPT => {
            println!("verdict accept");
            Ok(EXIT_ACCEPT)
        }
        HaltReason::Token(t) if vocab.name(t) == REJECT => {
            println!("verdict reject");
            Ok(EXIT_REJECT)
        }
        HaltReason::Token(t) => Err(config_err(format!("halted on `{}` without a verdict", vocab.name(t)))),
        _ => Err(config_err("halted on an empty string without a verdict")),
    }
}

pub fn run(args: RunArgs) -> CmdResult {
    let mode = match args.mode {
        ModeArg::Decide => Mode::Decide,
        ModeArg::Transduce => Mode::Transduce,
    };
    if let Some(path) = &args.machine {
        let m = parse_machine(&read(path)?).map_err(|e| in_file(path)(&e))?;
        let p = pipeline_system(&m, args.format.unwrap_or_default(), args.cap).map_err(config_err)?;
        let word = m.parse_input(&args.input).map_err(config_err)?;
        let encoded = p.lag.encode(&word).map_err(config_err)?;
        let cfg = SystemConfig { mode, ..p.config.clone() };
        return execute(&p.model, &cfg, &encoded, args.trace.as_deref());
    }
    let config_path = args
        .config
        .as_deref()
        .ok_or_else(|| config_err("--config is required unless --machine is given"))?;
    let (mcfg, rule) = load_config(config_path)?;
    let source = load_source(&args.source, rule, args.seed, args.format)?;
    let manager = mcfg.resolve(source.vocab(), source.window()).map_err(config_err)?;
    let cfg = SystemConfig::new(manager, mode).with_max_steps(args.cap);
    let input = source.vocab().parse_tokens(&args.input).map_err(config_err)?;
    execute(source.as_ref(), &cfg, &input, args.trace.as_deref())
}

pub fn compile_tm(machine: &Path, out: &Path, weights: Option<&Path>, format: NumericFormat) -> CmdResult {
    let m = parse_machine(&read(machine)?).map_err(|e| in_file(machine)(&e))?;
    let lag = lba_to_lag(&m).map_err(config_err)?;
    write(out, &write_lag_rule(lag.rule()))?;
    println!("rule window 2, {} symbols", lag.vocab().len());
    if let Some(w) = weights {
        let p = pipeline_system(&m, format, 1).map_err(config_err)?;
        write(w, &write_weights(&p.model))?;
        println!("d_model {}", p.model.spec().d_model);
    }
    Ok(0)
}

pub fn extract_dfa(args: DfaArgs) -> CmdResult {
    let (mcfg, rule) = load_config(&args.config)?;
    if mcfg.style != ManagerStyle::Summarization {
        return Err(config_err("DFA extraction needs a summarization manager"));
    }
    let source = load_source(&args.source, rule, args.seed, args.format)?;
    let vocab = source.vocab().clone();
    let Manager::Summarization(sm) = mcfg.resolve(&vocab, source.window()).map_err(config_err)? else {
        unreachable!("style checked above");
    };
    let alphabet: Vec<TokenId> = match &args.alphabet {
        Some(a) => vocab.parse_tokens(a).map_err(config_err)?,
        None => vocab
            .ids()
            .filter(|&t| !vocab.is_control(t) && ![ACCEPT, REJECT].contains(&vocab.name(t)))
            .collect(),
    };
    let sim = TransducerSim::new(source.as_ref(), sm.n, Mode::Decide).map_err(config_err)?;
    let dfa = match transducer_to_dfa(&sim, &alphabet, args.dfa_bound) {
        Ok(d) => d,
        Err(e @ MachineError::Bound(_)) => {
            return Err(Failure {
                code: EXIT_BOUND,
                msg: format!("{e} (bound {})", args.dfa_bound),
            })
        }
        Err(e) => return Err(config_err(e)),
    };
    write(&args.out, &dfa.to_dot(|t| vocab.name(t).to_string()))?;
    let accepting = dfa.labels.iter().filter(|&&l| l == DfaLabel::Accept).count();
    println!(
        "states {} (accepting {accepting}, explored {}, bound {})",
        dfa.len(),
        dfa.explored,
        args.dfa_bound
    );
    Ok(0)
}

pub fn verify(suite: &str, seed: u64, cap: u64, dfa_bound: usize, fault: Option<FaultArg>) -> CmdResult {
    let opts = VerifyOptions {
        seed,
        cap,
        dfa_bound,
        fault: fault.map(|FaultArg::BrokenShift| Fault::BrokenShift),
    };
    let reports = match run_suite(suite, &opts) {
        Ok(r) => r,
        Err(e @ VerifyError::UnknownSuite(_)) => return Err(config_err(e)),
    };
    let mut failed = 0;
    for r in &reports {
        println!("{r}");
        failed += usize::from(!r.passed);
    }
    println!("suite {suite}: {}/{} passed", reports.len() - failed, reports.len());
    Ok(if failed == 0 { 0 } else { 1 })
}
