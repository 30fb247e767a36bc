use std::fmt::Write as _;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use colorkr::complex::{AbelianGroup, BigradedAbelianGroup};
use colorkr::flag_ring::{build_quotient, SubgroupBlocks};
use colorkr::laurent::poincare_flag;
use colorkr::link::{
    equivariant_hilbert, equivariant_resolution_check, golden_trefoil, homology, table_differences,
    trefoil_summand_range, EquivariantSeries, Framing, HomologyReport, LinkSpec, GOLDEN_TREFOIL,
};
use colorkr::repspace::{
    describe, enumerate_components, total_space_check, verify_braid, BraidResidual, ComponentListing, ComponentParams,
    TotalSpaceCheck,
};

/// Colored sl(N) homology of the trefoil and Hopf link, and the matching SU(N) representation spaces.
#[derive(Parser, Debug)]
#[command(name = "colorkr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,

    /// Write torsion as the full invariant-factor chain instead of grouping equal orders.
    #[arg(long, global = true)]
    divisor_chain: bool,

    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0, global = true)]
    threads: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Homology of the right-handed trefoil colored by Λ^a.
    Trefoil {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = Framing::Seifert, value_parser = parse_framing)]
        framing: Framing,
        /// Print the equivariant Hilbert series of each summand up to this q-degree instead.
        #[arg(long)]
        truncation: Option<i64>,
    },
    /// Homology of the positive Hopf link colored by Λ^a and Λ^b.
    Hopf {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        b: usize,
    },
    /// Homology of the unknot colored by Λ^a.
    Unknot {
        #[command(flatten)]
        common: Common,
    },
    /// Components of the representation space with their cohomology and numeric residuals.
    Repspace {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        a: usize,
        /// Second label; selects the Hopf link instead of the trefoil.
        #[arg(long)]
        b: Option<usize>,
        /// Largest allowed numeric residual.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Recompute every bundled trefoil table and compare cell by cell.
    VerifyTables,
    /// Fast internal consistency checks.
    Selftest {
        /// q-degree through which the Koszul resolution property is checked.
        #[arg(long, default_value_t = 12)]
        truncation: i64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    a: usize,
    #[arg(long)]
    reduced: bool,
}

fn parse_framing(s: &str) -> Result<Framing, String> {
    s.parse().map_err(|e: colorkr::link::LinkError| e.to_string())
}

/// A request that parsed but names an impossible computation; reported with exit code 2.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

enum Outcome {
    Success,
    VerificationFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .context("starting the thread pool")?;
    let style = Style {
        format: cli.format,
        chain: cli.divisor_chain,
    };
    match &cli.command {
        Command::Trefoil {
            common,
            framing,
            truncation: Some(t),
        } => {
            if common.reduced {
                return Err(Invalid("--truncation does not combine with --reduced".into()).into());
            }
            LinkSpec::trefoil(common.n, common.a).map_err(|e| Invalid(e.to_string()))?;
            let series = equivariant_hilbert(common.n, common.a, *framing, *t).map_err(|e| Invalid(e.to_string()))?;
            print!("{}", render_series(&series, style.format)?);
            Ok(Outcome::Success)
        }
        Command::Trefoil { common, framing, .. } => {
            let spec = framing_spec(LinkSpec::trefoil(common.n, common.a), *framing, common.reduced)?;
            emit_homology(&spec, style)
        }
        Command::Hopf { common, b } => {
            let spec = framing_spec(LinkSpec::hopf(common.n, common.a, *b), Framing::Seifert, common.reduced)?;
            emit_homology(&spec, style)
        }
        Command::Unknot { common } => {
            let spec = framing_spec(LinkSpec::unknot(common.n, common.a), Framing::Seifert, common.reduced)?;
            emit_homology(&spec, style)
        }
        Command::Repspace { n, a, b, tol } => repspace(*n, *a, *b, *tol, style.format),
        Command::VerifyTables => verify_tables(style),
        Command::Selftest { truncation, tol } => selftest(*truncation, *tol),
    }
}

fn framing_spec(spec: Result<LinkSpec, colorkr::link::LinkError>, framing: Framing, reduced: bool) -> Result<LinkSpec> {
    let spec = spec.map_err(|e| Invalid(e.to_string()))?;
    Ok(spec.with_framing(framing).with_reduced(reduced))
}

#[derive(Clone, Copy)]
struct Style {
    format: Format,
    chain: bool,
}

impl Style {
    fn group(self, g: &AbelianGroup) -> String {
        if self.chain {
            g.display_chain()
        } else {
            g.display_grouped()
        }
    }
}

fn emit_homology(spec: &LinkSpec, style: Style) -> Result<Outcome> {
    let groups = homology(spec).with_context(|| format!("computing {}", spec.link))?;
    let out = match style.format {
        Format::Table => {
            let mut s = render_table(&groups, style);
            writeln!(s, "euler: {}", groups.euler_characteristic())?;
            s
        }
        Format::Json => json(&HomologyReport::new(spec, &groups))?,
        Format::Csv => render_csv(&groups),
    };
    print!("{out}");
    Ok(Outcome::Success)
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// h runs left to right over every column between the extremes, q runs top to
/// bottom in descending order. Rows step by 2 when all q share a parity.
fn render_table(groups: &BigradedAbelianGroup, style: Style) -> String {
    let cells: Vec<_> = groups.cells().collect();
    if cells.is_empty() {
        return "0\n".to_string();
    }
    let (h_min, h_max) = min_max(cells.iter().map(|((h, _), _)| *h));
    let (q_min, q_max) = min_max(cells.iter().map(|((_, q), _)| *q));
    let step = if cells.iter().all(|((_, q), _)| (q - q_min) % 2 == 0) {
        2
    } else {
        1
    };
    let qs: Vec<i64> = (0..=(q_max - q_min) / step).map(|i| q_max - i * step).collect();
    let hs: Vec<i64> = (h_min..=h_max).collect();

    let mut grid = vec![std::iter::once("q\\h".to_string())
        .chain(hs.iter().map(|h| h.to_string()))
        .collect::<Vec<_>>()];
    for &q in &qs {
        let mut row = vec![q.to_string()];
        for &h in &hs {
            let g = groups.get((h, q));
            row.push(if g.is_zero() { String::new() } else { style.group(&g) });
        }
        grid.push(row);
    }
    let widths: Vec<usize> = (0..=hs.len())
        .map(|j| grid.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in grid {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn min_max(xs: impl Iterator<Item = i64>) -> (i64, i64) {
    xs.fold((i64::MAX, i64::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn render_csv(groups: &BigradedAbelianGroup) -> String {
    let mut out = String::from("h,q,rank,torsion\n");
    for ((h, q), g) in groups.cells() {
        let torsion: Vec<String> = g.torsion.iter().map(u64::to_string).collect();
        out.push_str(&format!("{h},{q},{},{}\n", g.rank, torsion.join(" ")));
    }
    out
}

fn render_series(series: &[EquivariantSeries], format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => json(&series)?,
        Format::Csv => {
            let mut out = String::from("l,h,q,rank\n");
            for s in series {
                for (q, r) in s.series.terms() {
                    out.push_str(&format!("{},{},{q},{r}\n", s.l, s.h));
                }
            }
            out
        }
        Format::Table => series
            .iter()
            .map(|s| format!("l={}  h={}  {}\n", s.l, s.h, s.series))
            .collect(),
    })
}

#[derive(Serialize)]
struct RepSpaceReport {
    link: String,
    #[serde(rename = "N")]
    n: usize,
    labels: Vec<usize>,
    components: Vec<ComponentListing>,
    /// Trefoil only: residuals of the explicit representation, keyed by l.
    residuals: Vec<(usize, BraidResidual)>,
    max_residual: f64,
    tol: f64,
    total_space: TotalSpaceCheck,
}

fn repspace(n: usize, a: usize, b: Option<usize>, tol: f64, format: Format) -> Result<Outcome> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Invalid(format!("--tol must be a positive number, got {tol}")).into());
    }
    let spec = match b {
        Some(b) => LinkSpec::hopf(n, a, b),
        None => LinkSpec::trefoil(n, a),
    }
    .map_err(|e| Invalid(e.to_string()))?;
    let components = enumerate_components(&spec)?
        .iter()
        .map(describe)
        .collect::<Result<Vec<_>, _>>()?;
    let residuals = match b {
        Some(_) => Vec::new(),
        None => trefoil_summand_range(n, a)
            .map(|l| Ok((l, verify_braid(n, a, l)?)))
            .collect::<Result<Vec<_>>>()?,
    };
    let max_residual = residuals.iter().map(|(_, r)| r.max()).fold(0.0, f64::max);
    let report = RepSpaceReport {
        link: spec.link.to_string(),
        n,
        labels: spec.labels.clone(),
        components,
        residuals,
        max_residual,
        tol,
        total_space: total_space_check(&spec)?,
    };
    let out = match format {
        Format::Json => json(&report)?,
        Format::Csv => {
            let mut out = String::from("component,name,dim,poincare,torsion\n");
            for c in &report.components {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    params_label(&c.params),
                    c.name,
                    c.dim,
                    c.poincare,
                    torsion_label(&c.torsion)
                ));
            }
            out
        }
        Format::Table => repspace_table(&report),
    };
    print!("{out}");
    let ok = report.max_residual <= tol && report.total_space.holds();
    Ok(if ok {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

fn params_label(p: &ComponentParams) -> String {
    match p {
        ComponentParams::Unknot => "point".to_string(),
        ComponentParams::Hopf { k } => format!("k={k}"),
        ComponentParams::Trefoil { l } => format!("l={l}"),
    }
}

fn torsion_label(t: &[(i64, Vec<u64>)]) -> String {
    let parts: Vec<String> = t
        .iter()
        .map(|(d, orders)| format!("H^{d}:{}", AbelianGroup::new(0, orders)))
        .collect();
    parts.join(" ")
}

fn repspace_table(r: &RepSpaceReport) -> String {
    let mut out = format!(
        "{} N={} labels={:?}: {} component(s)\n",
        r.link,
        r.n,
        r.labels,
        r.components.len()
    );
    for c in &r.components {
        let _ = write!(
            out,
            "  {:<5} {:<24} dim {:>2}  P(t) = {}",
            params_label(&c.params),
            c.name,
            c.dim,
            c.poincare
        );
        if !c.torsion.is_empty() {
            let _ = write!(out, "  torsion {}", torsion_label(&c.torsion));
        }
        out.push('\n');
    }
    for (l, res) in &r.residuals {
        let _ = writeln!(out, "  residual l={l}: {:.3e}", res.max());
    }
    let t = &r.total_space;
    let _ = writeln!(
        out,
        "total space: rank {} vs link {}, torsion {:?} vs link {:?}: {}",
        t.rep_rank,
        t.link_rank,
        t.rep_torsion,
        t.link_torsion,
        if t.holds() { "agree" } else { "DIFFER" }
    );
    let _ = writeln!(
        out,
        "max residual {:.3e} (tol {:e}): {}",
        r.max_residual,
        r.tol,
        if r.max_residual <= r.tol { "ok" } else { "FAIL" }
    );
    out
}

fn verify_tables(style: Style) -> Result<Outcome> {
    let mut failed = false;
    for ((n, a), _) in GOLDEN_TREFOIL {
        let want = golden_trefoil(n, a).expect("bundled table");
        let got = homology(&LinkSpec::trefoil(n, a)?)?;
        let diffs = table_differences(&got, &want);
        match diffs.first() {
            None => println!("(N,a)=({n},{a}): ok, {} cells", want.cells().count()),
            Some(((h, q), computed, table)) => {
                failed = true;
                println!(
                    "(N,a)=({n},{a}): first mismatch at (h,q)=({h},{q}): computed {}, table {} ({} cell(s) differ)",
                    style.group(computed),
                    style.group(table),
                    diffs.len()
                );
            }
        }
    }
    Ok(if failed {
        Outcome::VerificationFailed
    } else {
        Outcome::Success
    })
}

type SelfCheck = Box<dyn Fn() -> Result<String>>;

fn selftest(truncation: i64, tol: f64) -> Result<Outcome> {
    if truncation < 0 {
        return Err(Invalid(format!("--truncation must be non-negative, got {truncation}")).into());
    }
    let checks: [(&str, SelfCheck); 5] = [
        (
            "table (4,2)",
            Box::new(|| {
                let got = homology(&LinkSpec::trefoil(4, 2)?)?;
                let diffs = table_differences(&got, &golden_trefoil(4, 2).expect("bundled table"));
                anyhow::ensure!(diffs.is_empty(), "{} cells differ", diffs.len());
                Ok("all cells match".into())
            }),
        ),
        (
            "reduced unknot",
            Box::new(|| {
                for n in 1..=4 {
                    for a in 0..=n {
                        let g = homology(&LinkSpec::unknot(n, a)?.with_reduced(true))?;
                        anyhow::ensure!(
                            g.cells().map(|(k, g)| (k, g.clone())).collect::<Vec<_>>()
                                == vec![((0, 0), AbelianGroup::free(1))],
                            "N={n}, a={a}"
                        );
                    }
                }
                Ok("Z at (0,0) for N ≤ 4".into())
            }),
        ),
        (
            "flag rings",
            Box::new(|| {
                let mut count = 0;
                for n in 1..=4 {
                    for blocks in compositions(n) {
                        let ring = build_quotient(&SubgroupBlocks::in_unitary(blocks.clone()))?;
                        anyhow::ensure!(ring.poincare() == poincare_flag(&blocks, n)?, "blocks {blocks:?}");
                        count += 1;
                    }
                }
                Ok(format!(
                    "{count} flag manifolds free with the expected Poincaré polynomial"
                ))
            }),
        ),
        (
            "koszul resolution",
            Box::new(move || {
                let boxes = (truncation / 2) as usize;
                for n in 1..=4 {
                    for a in 0..=n {
                        for l in trefoil_summand_range(n, a) {
                            equivariant_resolution_check(n, a, l, boxes)?;
                        }
                    }
                }
                Ok(format!("N ≤ 4 through q-degree {}", 2 * boxes))
            }),
        ),
        (
            "rep spaces",
            Box::new(move || {
                let mut worst = 0.0f64;
                for n in 1..=5 {
                    for a in 0..=n {
                        for l in trefoil_summand_range(n, a) {
                            worst = worst.max(verify_braid(n, a, l)?.max());
                        }
                    }
                }
                anyhow::ensure!(worst <= tol, "residual {worst:.3e} exceeds {tol:e}");
                for n in 1..=4 {
                    for a in 0..=n.min(2) {
                        let check = total_space_check(&LinkSpec::trefoil(n, a)?)?;
                        anyhow::ensure!(check.holds(), "trefoil N={n}, a={a}: {check:?}");
                    }
                }
                Ok(format!("braid residuals ≤ {tol:e}, totals agree for N ≤ 4"))
            }),
        ),
    ];
    let mut failed = false;
    for (name, check) in &checks {
        match check() {
            Ok(detail) => println!("{name}: ok, {detail}"),
            Err(e) => {
                failed = true;
                println!("{name}: FAIL, {e:#}");
            }
        }
    }
    Ok(if failed {
        Outcome::VerificationFailed
    } else {
        Outcome::Success
    })
}

/// Ordered block sizes summing to n.
fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    (1..=n)
        .flat_map(|first| {
            compositions(n - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}
