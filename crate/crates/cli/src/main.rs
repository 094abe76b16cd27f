mod config;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;

use betadyn::admissibility::{bound_check, count_brute, BoundCheck};
use betadyn::cylinders::write_cylinders_csv;
use betadyn::measure::{dyadic_family, DimensionEstimate};
use betadyn::numfmt::parse_rational;
use betadyn::{
    box_dimension_estimate, count_admissible, cylinders, digits, enumerate_admissible, grid_cells,
    hit_sequence, hit_sequence_2d, is_admissible, kgb_select, monte_carlo_measure, partition_check,
    rectangle_cover, series_thm1, series_thm2, star_sequence, Ambient, Backend, Beta, Centre,
    DimensionFn, Error, HitMode, KgbOptions, McOptions, PrecisionCfg, TargetFn, Value, Word,
};

#[derive(Parser, Debug)]
#[command(name = "betadyn", version, about = "Beta-expansions and shrinking targets")]
#[command(args_override_self = true)]
struct Cli {
    /// Working precision in bits for non-exact bases (at least 64).
    #[arg(long, global = true, env = "BETADYN_PRECISION")]
    precision: Option<u32>,
    /// Write machine output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// File of `key = value` lines, one per flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct BetaArg {
    /// Base: an integer, p/q, a decimal, golden, pi, quadratic:a,b,c@lo,hi or real:d@bits.
    #[arg(long)]
    beta: String,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Greedy digits of x.
    Expand {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        x: String,
        #[arg(long)]
        depth: usize,
    },
    /// The digit sequence eps* attached to 1.
    Star {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long, default_value_t = 32)]
        m: usize,
    },
    /// Whether a word is admissible.
    Admissible {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        word: String,
    },
    /// Admissible words of length n in lexicographic order.
    Enumerate {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
    },
    /// Number of admissible words of length n.
    Count {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        n: usize,
        /// Count by filtering all digit strings.
        #[arg(long)]
        brute: bool,
        /// Also check beta^n <= count <= beta^(n+1)/(beta-1).
        #[arg(long)]
        bounds: bool,
    },
    /// Cylinders of depth n.
    Cylinders {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
        /// Decimal places in the output.
        #[arg(long, default_value_t = 20)]
        digits: usize,
    },
    /// Checks that the cylinders of depth n tile [0, 1].
    PartitionCheck {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
    },
    /// Indices n where the orbit of x comes within Psi(n) of y.
    Hits {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        psi: String,
        #[arg(long = "N", alias = "n-max")]
        n_max: usize,
        #[arg(long, default_value = "two-sided")]
        mode: HitMode,
        /// Treat (x, y) as a point of the square.
        #[arg(long)]
        planar: bool,
    },
    /// Monte Carlo hit statistics over random x.
    Simulate {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        y: String,
        #[arg(long)]
        psi: String,
        #[arg(long = "N", alias = "n-max")]
        n_max: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "two-sided")]
        mode: HitMode,
        #[arg(long)]
        tail_from: Option<usize>,
        /// Comma-separated hit-count thresholds.
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
        ks: Vec<usize>,
    },
    /// The grid of [0, 1] with mesh Psi(n)/beta^n.
    Grid {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        psi: String,
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
        #[arg(long, default_value_t = 20)]
        digits: usize,
    },
    /// The rectangle cover of the planar hit set at level n.
    Cover {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        psi: String,
        #[arg(long, value_enum, default_value_t = CentreArg::Corrected)]
        centre: CentreArg,
        /// Test membership of (x, y).
        #[arg(long, requires = "y")]
        x: Option<String>,
        #[arg(long, requires = "x")]
        y: Option<String>,
    },
    /// Convergence verdict for the line (1) or plane (2) series.
    Series {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        theorem: u8,
        #[command(flatten)]
        beta: BetaArg,
        /// Dimension function, `power:s` or `powerlog:s,b`.
        #[arg(long, alias = "g")]
        f: String,
        #[arg(long)]
        psi: String,
        #[arg(long = "N", alias = "n-max")]
        n_max: usize,
    },
    /// Box-counting slope for Psi(n) = beta^(-n tau).
    Dimension {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long, default_value = "0")]
        y: String,
        #[arg(long)]
        tau: String,
        /// Levels as `a..b` (inclusive) or a comma list.
        #[arg(long, default_value = "10..20")]
        levels: String,
        #[arg(long, value_enum, default_value_t = AmbientArg::Line)]
        ambient: AmbientArg,
    },
    /// Greedy disjoint blow-ups of a dyadic family inside B.
    Kgb {
        #[arg(long)]
        f: String,
        /// The interval B as `lo,hi`.
        #[arg(long, default_value = "0,1")]
        b: String,
        /// Smallest generation used.
        #[arg(long = "G")]
        g: u32,
        /// Number of generations beyond G in the family.
        #[arg(long, default_value_t = 6)]
        depth: u32,
        #[arg(long)]
        min_coverage: Option<f64>,
    },
}

const SUBCOMMANDS: &[&str] = &[
    "expand", "star", "admissible", "enumerate", "count", "cylinders", "partition-check", "hits",
    "simulate", "grid", "cover", "series", "dimension", "kgb",
];

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CentreArg {
    Corrected,
    Unscaled,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AmbientArg {
    Line,
    Plane,
}

impl From<AmbientArg> for Ambient {
    fn from(a: AmbientArg) -> Self {
        match a {
            AmbientArg::Line => Ambient::Line,
            AmbientArg::Plane => Ambient::Plane,
        }
    }
}

enum Failure {
    Usage(String),
    Core(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Res<T = ()> = std::result::Result<T, Failure>;

struct Ctx {
    precision: Option<u32>,
    out: Option<PathBuf>,
    format: Format,
}

impl Ctx {
    fn beta(&self, b: &BetaArg) -> Res<Beta> {
        let beta: Beta = b.beta.parse()?;
        Ok(match self.precision {
            Some(bits) => {
                let cfg = PrecisionCfg::default();
                beta.with_precision(PrecisionCfg::new(bits, cfg.max.max(bits), cfg.factor)?)
            }
            None => beta,
        })
    }

    fn sink(&self) -> Res<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn text(&self, s: &str) -> Res {
        let mut w = self.sink()?;
        writeln!(w, "{s}")?;
        w.flush()?;
        Ok(())
    }

    fn json<T: Serialize>(&self, v: &T) -> Res {
        let mut w = self.sink()?;
        serde_json::to_writer_pretty(&mut w, v)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn csv(&self, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Res {
        let mut w = csv::Writer::from_writer(self.sink()?);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn no_csv(&self, cmd: &str) -> Res {
        if self.format == Format::Csv {
            return Err(Failure::Usage(format!("{cmd} has no CSV output")));
        }
        Ok(())
    }
}

fn point(beta: &Beta, s: &str) -> Res<Value> {
    Ok(beta.point(&Value::parse(s)?)?)
}

fn psi_at(beta: &Beta, psi: &TargetFn, n: usize) -> Res<BigRational> {
    Ok(psi.rational(n, beta.ln(), beta.as_rational())?)
}

fn parse_levels(s: &str) -> Res<Vec<usize>> {
    let bad = || Failure::Usage(format!("bad level list {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

#[derive(Serialize)]
struct Expansion {
    beta: String,
    x: String,
    digits: Word,
    terminal: String,
}

#[derive(Serialize)]
struct CountOut {
    #[serde(flatten)]
    count: betadyn::AdmissibleCount,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<BoundCheck>,
}

#[derive(Serialize)]
struct CoverOut {
    n: usize,
    psi_n: String,
    centre: Centre,
    words: String,
    cells: u64,
    cardinality: String,
    squares: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    contains: Option<Option<bool>>,
}

#[derive(Serialize)]
struct CellOut {
    i: u64,
    lo: String,
    hi: String,
}

fn dimension_text(e: &DimensionEstimate) -> String {
    format!(
        "slope: {:.6}\nresidual: {:.3e}\npredicted: {:.6}",
        e.slope, e.residual, e.predicted
    )
}

fn run(cli: Cli) -> Res {
    if cli.precision.is_some_and(|p| p < 64) {
        return Err(Failure::Usage("--precision must be at least 64".into()));
    }
    let ctx = Ctx {
        precision: cli.precision,
        out: cli.out,
        format: cli.format,
    };
    match cli.cmd {
        Cmd::Expand { beta, x, depth } => {
            let beta = ctx.beta(&beta)?;
            let x = point(&beta, &x)?;
            let seq = digits(&beta, &x, depth)?;
            let word = Word(seq.digits.clone());
            match ctx.format {
                Format::Text => ctx.text(&word.to_string()),
                Format::Json => ctx.json(&Expansion {
                    beta: beta.to_string(),
                    x: beta.to_decimal(&x, 20),
                    digits: word,
                    terminal: seq.base.to_decimal(&seq.terminal, 20),
                }),
                Format::Csv => ctx.csv(
                    &["i", "digit"],
                    seq.digits.iter().enumerate().map(|(i, d)| vec![(i + 1).to_string(), d.to_string()]),
                ),
            }
        }
        Cmd::Star { beta, m } => {
            ctx.no_csv("star")?;
            let beta = ctx.beta(&beta)?;
            let star = star_sequence(&beta, m)?;
            match ctx.format {
                Format::Json => ctx.json(&star),
                _ => ctx.text(&star.to_string()),
            }
        }
        Cmd::Admissible { beta, word } => {
            ctx.no_csv("admissible")?;
            let beta = ctx.beta(&beta)?;
            let w: Word = word.parse()?;
            let ok = is_admissible(&beta, &w.0)?;
            match ctx.format {
                Format::Json => ctx.json(&serde_json::json!({ "word": w, "admissible": ok })),
                _ => ctx.text(&ok.to_string()),
            }
        }
        Cmd::Enumerate { beta, n, cap } => {
            let beta = ctx.beta(&beta)?;
            let words: Vec<Word> = enumerate_admissible(&beta, n, cap)?.collect();
            match ctx.format {
                Format::Json => ctx.json(&words),
                Format::Csv => ctx.csv(&["word"], words.iter().map(|w| vec![w.to_string()])),
                Format::Text => {
                    let lines: Vec<String> = words.iter().map(Word::to_string).collect();
                    ctx.text(&lines.join("\n"))
                }
            }
        }
        Cmd::Count { beta, n, brute, bounds } => {
            ctx.no_csv("count")?;
            let beta = ctx.beta(&beta)?;
            let count = if brute { count_brute(&beta, n)? } else { count_admissible(&beta, n)? };
            let bounds = bounds.then(|| bound_check(&beta, n, &count.count));
            match ctx.format {
                Format::Json => ctx.json(&CountOut { count, bounds }),
                _ => {
                    let mut s = count.count.to_string();
                    if let Some(b) = bounds {
                        s += &format!("\nbounds: {}", if b.holds() { "hold" } else { "fail" });
                    }
                    ctx.text(&s)
                }
            }
        }
        Cmd::Cylinders { beta, n, cap, digits } => {
            let beta = ctx.beta(&beta)?;
            let cyls = cylinders(&beta, n, cap)?;
            match ctx.format {
                Format::Json => {
                    let rows: Vec<_> = cyls
                        .iter()
                        .map(|c| {
                            serde_json::json!({
                                "word": c.word,
                                "left": beta.decimal(&c.left, digits),
                                "length": beta.decimal(&c.length, digits),
                            })
                        })
                        .collect();
                    ctx.json(&rows)
                }
                _ => {
                    let mut w = ctx.sink()?;
                    write_cylinders_csv(&beta, &cyls, digits, &mut w)?;
                    w.flush()?;
                    Ok(())
                }
            }
        }
        Cmd::PartitionCheck { beta, n, cap } => {
            ctx.no_csv("partition-check")?;
            let beta = ctx.beta(&beta)?;
            let r = partition_check(&beta, n, cap)?;
            match ctx.format {
                Format::Json => ctx.json(&r),
                _ => ctx.text(&format!(
                    "cylinders: {}\ntotal length: {}\nmax gap: {:e}\nmax overlap: {:e}\ntiles: {}",
                    r.cylinders,
                    r.total_length,
                    r.max_gap,
                    r.max_overlap,
                    r.tiles(1e-10)
                )),
            }
        }
        Cmd::Hits { beta, x, y, psi, n_max, mode, planar } => {
            let beta = ctx.beta(&beta)?;
            let psi: TargetFn = psi.parse()?;
            let (x, y) = (point(&beta, &x)?, point(&beta, &y)?);
            let r = if planar {
                hit_sequence_2d(&beta, &x, &y, &psi, n_max)?
            } else {
                hit_sequence(&beta, &x, &y, &psi, n_max, mode)?
            };
            if !r.uncertain.is_empty() {
                eprintln!("uncertain at n = {:?}", r.uncertain);
            }
            match ctx.format {
                Format::Json => ctx.json(&r),
                Format::Csv => ctx.csv(&["n"], r.hits.iter().map(|n| vec![n.to_string()])),
                Format::Text => ctx.text(&Word(r.hits.iter().map(|&n| n as u32).collect()).to_string()),
            }
        }
        Cmd::Simulate { beta, y, psi, n_max, samples, seed, mode, tail_from, ks } => {
            let beta = ctx.beta(&beta)?;
            let psi: TargetFn = psi.parse()?;
            let y = point(&beta, &y)?;
            let opts = McOptions {
                samples,
                seed,
                mode,
                ks,
                tail_from,
                resolution_bits: None,
            };
            let r = monte_carlo_measure(&beta, &y, &psi, n_max, &opts)?;
            match ctx.format {
                Format::Json => ctx.json(&r),
                Format::Csv => {
                    let mut w = ctx.sink()?;
                    r.write_rows_csv(&mut w)?;
                    w.flush()?;
                    Ok(())
                }
                Format::Text => {
                    let oracle = r.oracle_mean.map_or("n/a".to_string(), |o| format!("{o:.6}"));
                    ctx.text(&format!(
                        "mean hits: {:.6}\nstd err: {:.6}\noracle: {oracle}\ntail fraction: {:.6}\nfailed samples: {}",
                        r.mean_hits, r.std_err, r.tail_frac, r.failed_samples
                    ))
                }
            }
        }
        Cmd::Grid { beta, n, psi, cap, digits } => {
            let beta = ctx.beta(&beta)?;
            let psi: TargetFn = psi.parse()?;
            let cells = grid_cells(&beta, n, &psi_at(&beta, &psi, n)?, cap)?;
            let rows: Vec<CellOut> = cells
                .iter()
                .map(|c| CellOut {
                    i: c.i,
                    lo: beta.decimal(&c.lo, digits),
                    hi: beta.decimal(&c.hi, digits),
                })
                .collect();
            match ctx.format {
                Format::Json => ctx.json(&rows),
                _ => ctx.csv(&["i", "lo", "hi"], rows.into_iter().map(|c| vec![c.i.to_string(), c.lo, c.hi])),
            }
        }
        Cmd::Cover { beta, n, psi, centre, x, y } => {
            ctx.no_csv("cover")?;
            let beta = ctx.beta(&beta)?;
            let psi: TargetFn = psi.parse()?;
            let psi_n = psi_at(&beta, &psi, n)?;
            let centre = match centre {
                CentreArg::Corrected => Centre::Corrected,
                CentreArg::Unscaled => Centre::Unscaled,
            };
            let cover = rectangle_cover(&beta, n, &psi_n, centre)?;
            let contains = match (x, y) {
                (Some(x), Some(y)) => Some(cover.contains(&point(&beta, &x)?, &point(&beta, &y)?)?),
                _ => None,
            };
            let out = CoverOut {
                n,
                psi_n: psi_n.to_string(),
                centre,
                words: cover.words.to_string(),
                cells: cover.cells,
                cardinality: cover.cardinality().to_string(),
                squares: cover.squares().to_string(),
                contains,
            };
            match ctx.format {
                Format::Json => ctx.json(&out),
                _ => {
                    let mut s = out.cardinality.clone();
                    if let Some(c) = contains {
                        s += &format!("\ncontains: {}", c.map_or("uncertain".into(), |b| b.to_string()));
                    }
                    ctx.text(&s)
                }
            }
        }
        Cmd::Series { theorem, beta, f, psi, n_max } => {
            let beta = ctx.beta(&beta)?;
            let f: DimensionFn = f.parse()?;
            let psi: TargetFn = psi.parse()?;
            let r = if theorem == 1 {
                series_thm1(&f, &psi, &beta, n_max)?
            } else {
                series_thm2(&f, &psi, &beta, n_max)?
            };
            match ctx.format {
                Format::Json => ctx.json(&r),
                Format::Csv => ctx.csv(
                    &["n", "partial_sum", "log10_partial_sum"],
                    r.checkpoints.iter().map(|c| {
                        vec![
                            c.n.to_string(),
                            c.partial_sum.map_or(String::new(), |v| v.to_string()),
                            c.log10_partial_sum.to_string(),
                        ]
                    }),
                ),
                Format::Text => {
                    let measure = match r.measure_verdict {
                        betadyn::MeasureVerdict::Zero => "zero",
                        betadyn::MeasureVerdict::Full => "full",
                        betadyn::MeasureVerdict::Undetermined => "undetermined",
                    };
                    let mut s = format!("verdict: {}\nmeasure: {measure}", r.verdict);
                    for note in &r.notes {
                        s += &format!("\nnote: {note}");
                    }
                    ctx.text(&s)
                }
            }
        }
        Cmd::Dimension { beta, y, tau, levels, ambient } => {
            let beta = ctx.beta(&beta)?;
            let y = point(&beta, &y)?;
            let tau = parse_rational(&tau)?;
            let e = box_dimension_estimate(&beta, &y, &tau, &parse_levels(&levels)?, ambient.into())?;
            match ctx.format {
                Format::Json => ctx.json(&e),
                Format::Csv => {
                    let mut w = ctx.sink()?;
                    e.write_csv(&mut w)?;
                    w.flush()?;
                    Ok(())
                }
                Format::Text => ctx.text(&dimension_text(&e)),
            }
        }
        Cmd::Kgb { f, b, g, depth, min_coverage } => {
            let f: DimensionFn = f.parse()?;
            let bounds: Vec<f64> = b
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Failure::Usage(format!("bad interval {b:?}")))?;
            let [lo, hi] = bounds[..] else {
                return Err(Failure::Usage(format!("bad interval {b:?}")));
            };
            let mut opts = KgbOptions::default();
            if let Some(c) = min_coverage {
                opts.min_coverage = c;
            }
            let family = dyadic_family::<f64>(g, g + depth);
            let sel = kgb_select(&family, &f, (lo, hi), g as usize, &opts)?;
            match ctx.format {
                Format::Json => ctx.json(&sel),
                Format::Csv => ctx.csv(
                    &["index", "center", "radius"],
                    sel.selected.iter().map(|s| {
                        vec![s.index.to_string(), s.ball.center.to_string(), s.ball.radius.to_string()]
                    }),
                ),
                Format::Text => ctx.text(&format!(
                    "selected: {}\nmass: {}\nbound: {}\ncoverage: {}",
                    sel.selected.len(),
                    sel.mass,
                    sel.bound,
                    sel.coverage
                )),
            }
        }
    }
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args().collect(), SUBCOMMANDS) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                e if e.is_certification() => 2,
                Error::BudgetExceeded { .. } => 3,
                _ => 1,
            })
        }
    }
}
