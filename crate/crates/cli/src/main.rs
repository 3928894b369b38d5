//! Command-line front end for the fixelim library.

mod report;

use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use fixelim::elim::{eliminate_all_with, ElimOptions};
use fixelim::game::{closed_form_below_iterate, is_star, play_game, StarConjunction, DEFAULT_BUDGET};
use fixelim::gen::{atoms, Gen};
use fixelim::heyting::{for_each_assignment, refute_equiv, Compiled, FiniteHeytingAlgebra, FinitePoset};
use fixelim::normal::to_normal_form;
use fixelim::ordinal::{
    applicable_cl_bounds, applicable_rho_bounds, closure_ordinal, family_atop_generic, family_chain_conj,
    family_phi_n, ruitenburg_number, verify_bounds,
};
use fixelim::prover::{equiv, with_prover, Sequent};
use fixelim::{parse, Error, Formula, Kind, Sym};
use rayon::prelude::*;

use report::{BenchRow, Countermodel, Report};

#[derive(Parser, Debug)]
#[command(name = "fixelim", version, about = "Fixed-point elimination for the intuitionistic mu-calculus")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Discharge every trace obligation with the prover.
    #[arg(long, global = true)]
    verify: bool,
    /// Prover-simplify elimination results.
    #[arg(long, global = true)]
    simplify: bool,
    /// Iteration cap for ordinal computations.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    cap: Option<u64>,
    /// Seed for random corpora.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Fixed-point variable.
    #[arg(long, global = true, default_value = "x")]
    var: String,
    /// Read one input per line from this file (`-` for stdin).
    #[arg(long, short = 'f', global = true)]
    file: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    #[value(name = "phi_n")]
    PhiN,
    Chain,
    Atop,
    Random,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Remove every fixed-point binder.
    Eliminate { formula: Option<String> },
    /// Decide derivability of a fixed-point free formula.
    Prove { formula: Option<String> },
    /// Decide provable equivalence; batch lines read `f == g`.
    CheckEquiv { left: Option<String>, right: Option<String> },
    /// Normal form of a strongly positive formula in `--var`.
    Normalize { formula: Option<String> },
    /// Least n with φⁿ⁺¹(⊥) ≡ φⁿ(⊥).
    ClosureOrdinal { formula: Option<String> },
    /// Least n with φⁿ⁺² ≡ φⁿ.
    Ruitenburg { formula: Option<String> },
    /// Compute cl and ρ and check them against every applicable bound.
    VerifyBounds { formula: Option<String> },
    /// (cl, ρ) table for a formula family, parameters 1..=param.
    Bench {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        param: usize,
    },
    /// Play Eve's memory strategy against every Adam.
    Game {
        /// One star formula per line; together they form the conjunction.
        #[arg(long)]
        conjuncts: PathBuf,
        /// Number of rounds; defaults to (N+1)(M+1).
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Check validity on the upset algebra of a finite poset.
    ModelCheck {
        /// Poset file: element count, then lines `i<j`.
        #[arg(long)]
        poset: PathBuf,
        formula: Option<String>,
    },
}

/// Failures that are not logical verdicts.
enum Failure {
    Usage(String),
    Logic(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Parse { .. } | Error::InvalidArgument(_) | Error::OutsideFragment(_) | Error::InvalidPoset(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Logic(e.to_string()),
        }
    }
}

impl Failure {
    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Logic(m) => m,
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Logic(_) => 1,
        }
    }
}

fn read_source(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }
}

fn input_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

fn countermodel(poset: &FinitePoset, h: &FiniteHeytingAlgebra, valuation: &[(Sym, usize)]) -> Countermodel {
    Countermodel {
        poset: poset.to_text(),
        valuation: valuation
            .iter()
            .map(|(s, e)| {
                let mask = h.upset_of(*e).unwrap_or(0);
                let pts = (0..poset.len()).filter(|i| mask >> i & 1 == 1).collect();
                (s.name().to_owned(), pts)
            })
            .collect(),
    }
}

struct Ctx {
    verify: bool,
    simplify: bool,
    cap: Option<usize>,
    var: Sym,
}

fn eliminate(ctx: &Ctx, line: &str) -> Result<Report, Failure> {
    let f = parse(line)?;
    let opts = ElimOptions {
        verify: ctx.verify,
        simplify: ctx.simplify,
    };
    let (output, trace) = eliminate_all_with(&f, opts)?;
    Ok(Report::Eliminate { input: f, output, trace })
}

fn prove(line: &str) -> Result<Report, Failure> {
    let f = parse(line)?;
    let out = with_prover(|p| p.prove(&Sequent::new(Vec::new(), f.clone())))?;
    Ok(Report::Prove {
        formula: f,
        derivable: out.derivable,
        nodes: out.stats.nodes,
    })
}

fn check_equiv(left: &str, right: &str) -> Result<Report, Failure> {
    let (l, r) = (parse(left)?, parse(right)?);
    let equivalent = equiv(&l, &r)?;
    let countermodel = if equivalent {
        None
    } else {
        refute_equiv(&l, &r, 4).map(|w| {
            let h = FiniteHeytingAlgebra::upset_algebra(&w.poset).expect("witness poset");
            let vals: Vec<(Sym, usize)> = w.valuation.into_iter().collect();
            countermodel(&w.poset, &h, &vals)
        })
    };
    Ok(Report::CheckEquiv {
        left: l,
        right: r,
        equivalent,
        countermodel,
    })
}

fn normalize(ctx: &Ctx, line: &str) -> Result<Report, Failure> {
    let f = parse(line)?;
    let nf = to_normal_form(&f, ctx.var)?;
    let output = nf.to_formula();
    if ctx.verify && !equiv(&f, &output)? {
        return Err(Failure::Logic(format!("normal form {output} is not equivalent to {f}")));
    }
    Ok(Report::Normalize {
        input: f,
        var: ctx.var,
        x_free_part: nf.x_free_part,
        disjuncts: nf.disjuncts,
        output,
    })
}

fn ordinal(ctx: &Ctx, line: &str, rho: bool) -> Result<Report, Failure> {
    let f = parse(line)?;
    if rho {
        let r = ruitenburg_number(&f, ctx.var, ctx.cap)?;
        Ok(Report::Ruitenburg {
            formula: f,
            var: ctx.var,
            value: r.value,
            cap_hit: r.cap_hit,
            approximants: r.approximants,
        })
    } else {
        let r = closure_ordinal(&f, ctx.var, ctx.cap)?;
        Ok(Report::ClosureOrdinal {
            formula: f,
            var: ctx.var,
            value: r.value,
            cap_hit: r.cap_hit,
            approximants: r.approximants,
        })
    }
}

fn bounds(ctx: &Ctx, line: &str) -> Result<Report, Failure> {
    let f = parse(line)?;
    Ok(Report::Bounds {
        report: verify_bounds(&f, ctx.var)?,
    })
}

fn model_check(poset: &FinitePoset, line: &str) -> Result<Report, Failure> {
    let f = parse(line)?;
    let h = FiniteHeytingAlgebra::upset_algebra(poset)?;
    let inputs: Vec<Sym> = f.free_vars().to_vec();
    let prog = Compiled::new(&f, &inputs)?;
    let mut refuting = None;
    for_each_assignment(&h, inputs.len(), |vals| {
        if prog.eval(&h, vals) != h.top() {
            refuting = Some(vals.to_vec());
            return false;
        }
        true
    });
    let countermodel = refuting.map(|vals| {
        let pairs: Vec<(Sym, usize)> = inputs.iter().copied().zip(vals).collect();
        countermodel(poset, &h, &pairs)
    });
    Ok(Report::ModelCheck {
        formula: f,
        poset: poset.to_text(),
        valid: countermodel.is_none(),
        countermodel,
    })
}

fn bench_formulas(family: Family, param: usize, seed: u64) -> Result<Vec<(usize, Formula)>, Failure> {
    if param == 0 {
        return Err(Failure::Usage("--param must be at least 1".into()));
    }
    let mut gen = Gen::new(seed);
    (1..=param)
        .map(|k| {
            let f = match family {
                Family::PhiN => family_phi_n(k),
                Family::Chain => family_chain_conj(k)?.0,
                Family::Atop => family_atop_generic(k),
                Family::Random => gen.positive_body(Sym::new("x"), &atoms(3), 10),
            };
            Ok((k, f))
        })
        .collect()
}

fn bench_row(ctx: &Ctx, family: Family, k: usize, f: Formula) -> Result<Report, Failure> {
    let x = Sym::new("x");
    let start = Instant::now();
    let cl = closure_ordinal(&f, x, ctx.cap)?;
    let rho = ruitenburg_number(&f, x, ctx.cap)?;
    let wall_time = start.elapsed().as_secs_f64();
    let mut bounds: std::collections::BTreeMap<String, usize> = applicable_cl_bounds(&f, x)?
        .into_iter()
        .map(|(k, v)| (format!("cl.{k}"), v))
        .collect();
    bounds.extend(applicable_rho_bounds(&f, x)?.into_iter().map(|(k, v)| (format!("rho.{k}"), v)));
    let name = family.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default();
    Ok(Report::Bench {
        row: BenchRow {
            family: name,
            param: k,
            formula: f,
            cl: cl.value,
            rho: rho.value,
            bounds,
            wall_time,
        },
    })
}

fn game(var: Sym, path: &Path, rounds: Option<usize>, budget: u64) -> Result<Report, Failure> {
    let text = read_source(path)?;
    let mut conjuncts = Vec::new();
    for line in input_lines(&text) {
        let f = parse(&line)?;
        match f.kind() {
            Kind::And(cs) => conjuncts.extend(cs.iter().cloned()),
            _ => conjuncts.push(f),
        }
    }
    if conjuncts.is_empty() {
        return Err(Failure::Usage(format!("{}: no conjuncts", path.display())));
    }
    for c in &conjuncts {
        if !is_star(c, var)? {
            return Err(Failure::Usage(format!("{c} is not a star formula")));
        }
    }
    let star = StarConjunction::from_formulas(&conjuncts, var)?;
    let (n, m) = star.dims();
    let rounds = rounds.unwrap_or((n + 1) * (m + 1));
    let outcome = play_game(&star, rounds, budget)?;
    let closed_form_below = if outcome.eve_wins_all {
        None
    } else {
        Some(closed_form_below_iterate(&star, rounds)?)
    };
    Ok(Report::Game {
        formula: star.formula(),
        heads: n,
        sides: m,
        outcome,
        closed_form_below,
    })
}

fn emit(format: Format, reports: &[Report], batch: bool, out: &mut impl Write) -> io::Result<()> {
    match format {
        Format::Text => {
            for r in reports {
                writeln!(out, "{}", r.text())?;
            }
        }
        Format::Json => {
            let doc = if batch {
                serde_json::to_string_pretty(reports)
            } else {
                serde_json::to_string_pretty(&reports[0])
            };
            writeln!(out, "{}", doc.map_err(io::Error::other)?)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header: Option<Vec<&str>> = None;
            for r in reports {
                let h = r.csv_header();
                if header.as_ref() != Some(&h) {
                    w.write_record(&h)?;
                    header = Some(h);
                }
                w.write_record(r.csv_row())?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn single_input(
    file: &Option<PathBuf>,
    inline: Option<String>,
) -> Result<(Vec<String>, bool), Failure> {
    match (file, inline) {
        (Some(_), Some(_)) => Err(Failure::Usage("give either an inline formula or --file, not both".into())),
        (None, None) => Err(Failure::Usage("missing input formula (inline or --file)".into())),
        (None, Some(s)) => Ok((vec![s], false)),
        (Some(p), None) => Ok((input_lines(&read_source(p)?), true)),
    }
}

fn run(cli: Cli) -> Result<(Vec<Report>, bool, u8), Failure> {
    let var = Sym::new(cli.var.trim());
    let ctx = Ctx {
        verify: cli.verify,
        simplify: cli.simplify,
        cap: cli.cap.map(|c| c as usize),
        var,
    };
    type Job<'a> = Box<dyn Fn(&str) -> Result<Report, Failure> + Sync + 'a>;
    let (lines, batch, job): (Vec<String>, bool, Job) = match cli.cmd {
        Cmd::Eliminate { formula } => {
            let (l, b) = single_input(&cli.file, formula)?;
            (l, b, Box::new(|s| eliminate(&ctx, s)))
        }
        Cmd::Prove { formula } => {
            let (l, b) = single_input(&cli.file, formula)?;
            (l, b, Box::new(prove))
        }
        Cmd::CheckEquiv { left, right } => {
            let (lines, batch) = match (&cli.file, left, right) {
                (None, Some(l), Some(r)) => (vec![format!("{l} == {r}")], false),
                (Some(p), None, None) => (input_lines(&read_source(p)?), true),
                _ => return Err(Failure::Usage("check-equiv takes two formulas or --file".into())),
            };
            let job: Job = Box::new(|s: &str| {
                let (l, r) = s
                    .split_once("==")
                    .ok_or_else(|| Failure::Usage(format!("expected `f == g`, got `{s}`")))?;
                check_equiv(l, r)
            });
            (lines, batch, job)
        }
        Cmd::Normalize { formula } => {
            let (l, b) = single_input(&cli.file, formula)?;
            (l, b, Box::new(|s| normalize(&ctx, s)))
        }
        Cmd::ClosureOrdinal { formula } => {
            let (l, b) = single_input(&cli.file, formula)?;
            (l, b, Box::new(|s| ordinal(&ctx, s, false)))
        }
        Cmd::Ruitenburg { formula } => {
            let (l, b) = single_input(&cli.file, formula)?;
            (l, b, Box::new(|s| ordinal(&ctx, s, true)))
        }
        Cmd::VerifyBounds { formula } => {
            let (l, b) = single_input(&cli.file, formula)?;
            (l, b, Box::new(|s| bounds(&ctx, s)))
        }
        Cmd::ModelCheck { poset, formula } => {
            let p = FinitePoset::parse(&read_source(&poset)?)?;
            let (l, b) = single_input(&cli.file, formula)?;
            let job: Job = Box::new(move |s| model_check(&p, s));
            (l, b, job)
        }
        Cmd::Game { conjuncts, rounds, budget } => {
            let report = game(var, &conjuncts, rounds, budget)?;
            let code = u8::from(report.failed());
            return Ok((vec![report], false, code));
        }
        Cmd::Bench { family, param } => {
            let formulas = bench_formulas(family, param, cli.seed)?;
            let rows: Vec<Result<Report, Failure>> = formulas
                .into_par_iter()
                .map(|(k, f)| bench_row(&ctx, family, k, f))
                .collect();
            let reports = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
            return Ok((reports, true, 0));
        }
    };
    if lines.is_empty() {
        return Err(Failure::Usage("no input".into()));
    }
    let results: Vec<Result<Report, Failure>> = lines.par_iter().map(|l| job(l)).collect();
    if !batch {
        let report = results.into_iter().next().unwrap()?;
        let code = u8::from(report.failed());
        return Ok((vec![report], false, code));
    }
    let mut code = 0;
    let reports = results
        .into_iter()
        .zip(&lines)
        .map(|(r, line)| match r {
            Ok(rep) => {
                code = code.max(u8::from(rep.failed()));
                rep
            }
            Err(f) => {
                code = code.max(f.code());
                Report::Error {
                    input: line.clone(),
                    message: f.message().to_owned(),
                }
            }
        })
        .collect();
    Ok((reports, true, code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok((reports, batch, code)) => {
            let stdout = io::stdout();
            if let Err(e) = emit(format, &reports, batch, &mut stdout.lock()) {
                eprintln!("fixelim: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("fixelim: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
