//! The `fabric` command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad input or
//! structural error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{boundedness, count_report};
use crate::routing::{k_benes_route, kr_benes_route, looping_route, RoutePlan};
use crate::topology::{export_dot, Network, NetworkKind};
use crate::verify::{gen_random_k_bounded, verify_plan};
use crate::Permutation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fabric",
    version,
    about = "Build, route and verify Benes-family networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a network document.
    Build(BuildArgs),
    /// Route a permutation and print the plan.
    Route(RouteArgs),
    /// Check a plan against a network and permutation.
    Verify(VerifyArgs),
    /// Count K-bounded permutations.
    Count(CountArgs),
    /// Route random permutations through a KR-Benes and tabulate costs.
    Sweep(SweepArgs),
    /// Write a Graphviz rendering of a network.
    Dot(DotArgs),
}

#[derive(Debug, Args)]
pub struct NetSource {
    /// Network document written by `build`.
    #[arg(long, conflicts_with_all = ["kind", "n", "k"])]
    pub net: Option<PathBuf>,
    #[arg(long)]
    pub kind: Option<NetworkKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub kind: NetworkKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: Option<usize>,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(id = "perm_source", required = true, multiple = false)]
pub struct PermSource {
    /// Comma-separated images of 0..n-1.
    #[arg(long, group = "perm_source")]
    pub perm: Option<String>,
    #[arg(long, group = "perm_source")]
    pub perm_file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Auto,
    Benes,
    KBenes,
    KrBenes,
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    #[command(flatten)]
    pub net: NetSource,
    #[command(flatten)]
    pub perm: PermSource,
    #[arg(long, value_enum, default_value_t = Algo::Auto)]
    pub algo: Algo,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub plan: PathBuf,
    /// Permutation to check against; defaults to the plan's own.
    #[arg(long, conflicts_with = "perm_file")]
    pub perm: Option<String>,
    #[arg(long)]
    pub perm_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub exhaustive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Dist {
    /// Uniform over all permutations.
    Uniform,
    /// Band width drawn geometrically, favouring narrow bands.
    Locality,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, env = "FABRIC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Dist::Uniform)]
    pub dist: Dist,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DotArgs {
    #[command(flatten)]
    pub net: NetSource,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command: the exit code and the message for stderr.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure {
            code: EXIT_BAD_INPUT,
            message: format!("{e:#}"),
        }
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parse `args` (program name first), run the command and return its exit
/// code. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_BAD_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Build(a) => build(a, out),
        Command::Route(a) => route(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Count(a) => count(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Dot(a) => dot(a, out),
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => out.write_all(text.as_bytes()).context("writing output"),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_network(src: &NetSource, fallback: Option<NetworkKind>) -> anyhow::Result<Network> {
    if let Some(path) = &src.net {
        return Ok(Network::from_json(&read(path)?)?);
    }
    let Some(kind) = src.kind.or(fallback) else {
        bail!("give --net or --kind");
    };
    let Some(n) = src.n else {
        bail!("--n is required with --kind");
    };
    Ok(Network::build(kind, n, src.k)?)
}

fn parse_perm(text: Option<&str>, file: Option<&Path>) -> anyhow::Result<Option<Permutation>> {
    let text = match (text, file) {
        (Some(t), _) => t.to_string(),
        (None, Some(f)) => read(f)?,
        (None, None) => return Ok(None),
    };
    Ok(Some(text.trim().parse()?))
}

fn build(a: BuildArgs, out: &mut dyn Write) -> Outcome {
    let net = Network::build(a.kind, a.n, a.k).map_err(anyhow::Error::from)?;
    emit(&net.to_json(), a.out.as_deref(), out)?;
    Ok(EXIT_OK)
}

pub fn route_with(net: &Network, p: &Permutation, algo: Algo) -> crate::Result<RoutePlan> {
    let kind = match algo {
        Algo::Auto => net.kind(),
        Algo::Benes => NetworkKind::Benes,
        Algo::KBenes => NetworkKind::KBenes,
        Algo::KrBenes => NetworkKind::KrBenes,
    };
    match kind {
        NetworkKind::Benes => looping_route(net, p),
        NetworkKind::KBenes => k_benes_route(net, p),
        NetworkKind::KrBenes => kr_benes_route(net, p),
        other => Err(crate::Error::WrongNetworkKind {
            expected: "benes, k-benes or kr-benes".into(),
            found: other.to_string(),
        }),
    }
}

fn route(a: RouteArgs, out: &mut dyn Write) -> Outcome {
    let fallback = match a.algo {
        Algo::Auto => None,
        Algo::Benes => Some(NetworkKind::Benes),
        Algo::KBenes => Some(NetworkKind::KBenes),
        Algo::KrBenes => Some(NetworkKind::KrBenes),
    };
    let net = load_network(&a.net, fallback)?;
    let p = parse_perm(a.perm.perm.as_deref(), a.perm.perm_file.as_deref())?
        .expect("clap requires a permutation source");
    let plan = route_with(&net, &p, a.algo).map_err(anyhow::Error::from)?;
    let mut text = plan.to_json();
    text.push('\n');
    emit(&text, a.out.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Outcome {
    let net = Network::from_json(&read(&a.net)?).map_err(anyhow::Error::from)?;
    let plan = RoutePlan::from_json(&read(&a.plan)?).map_err(anyhow::Error::from)?;
    let p = parse_perm(a.perm.as_deref(), a.perm_file.as_deref())?
        .unwrap_or_else(|| plan.permutation.clone());
    let report = verify_plan(&net, &plan, &p).map_err(anyhow::Error::from)?;
    let mut text = report.to_json();
    text.push('\n');
    emit(&text, None, out)?;
    if report.ok {
        Ok(EXIT_OK)
    } else {
        let first = &report.violations[0];
        Err(Failure {
            code: EXIT_VERIFY_FAILED,
            message: format!(
                "{} violation(s); first: {:?} for input {} at column {} line {}",
                report.violations.len(),
                first.kind,
                first.input,
                first.column.map_or("output".to_string(), |c| c.to_string()),
                first.line
            ),
        })
    }
}

fn count(a: CountArgs, out: &mut dyn Write) -> Outcome {
    let report = count_report(a.n, a.k, a.exhaustive).map_err(anyhow::Error::from)?;
    let mut text = report.to_json();
    text.push('\n');
    emit(&text, None, out)?;
    Ok(EXIT_OK)
}

/// One routed trial of a sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub trial: usize,
    pub seed: u64,
    pub k_exact: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub terminal_visits: usize,
    pub overhead: usize,
    pub verified: bool,
}

fn sweep_permutation(n: usize, seed: u64, dist: Dist) -> Permutation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match dist {
        Dist::Uniform => {
            let mut map: Vec<usize> = (0..n).collect();
            map.shuffle(&mut rng);
            Permutation::new(map).expect("shuffled identity")
        }
        Dist::Locality => {
            let mut k = 1;
            while k < n - 1 && rng.gen_bool(0.5) {
                k *= 2;
            }
            gen_random_k_bounded(n, k.min(n - 1), rng.gen())
        }
    }
}

/// Route `trials` permutations through a KR-Benes on `n` lines; trial `t`
/// uses seed `seed + t`.
pub fn sweep_rows(n: usize, trials: usize, seed: u64, dist: Dist) -> crate::Result<Vec<SweepRow>> {
    if n > 64 {
        return Err(crate::Error::OutOfDomain(format!(
            "sweeps take n <= 64, got {n}"
        )));
    }
    let net = Network::build(NetworkKind::KrBenes, n, None)?;
    let router = crate::routing::KrBenesRouter::new(&net)?;
    (0..trials)
        .map(|trial| {
            let s = seed.wrapping_add(trial as u64);
            let p = sweep_permutation(n, s, dist);
            let b = boundedness(&p);
            let plan = router.route(&p)?;
            let verified = verify_plan(&net, &plan, &p)?.ok;
            Ok(SweepRow {
                trial,
                seed: s,
                k_exact: b.k_exact,
                k: b.k,
                terminal_visits: plan.cost.terminal_visits,
                overhead: plan.cost.overhead,
                verified,
            })
        })
        .collect()
}

pub fn rows_to_csv(rows: &[SweepRow]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Outcome {
    let rows = sweep_rows(a.n, a.trials, a.seed, a.dist).map_err(anyhow::Error::from)?;
    emit(&rows_to_csv(&rows)?, a.out.as_deref(), out)?;
    if rows.iter().all(|r| r.verified) {
        Ok(EXIT_OK)
    } else {
        Err(Failure {
            code: EXIT_VERIFY_FAILED,
            message: "some trials failed verification".into(),
        })
    }
}

fn dot(a: DotArgs, out: &mut dyn Write) -> Outcome {
    let net = load_network(&a.net, None)?;
    emit(&export_dot(&net), a.out.as_deref(), out)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("fabric").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn build_to_stdout() {
        let (code, out, _) = run_capture(&["build", "--kind", "benes", "--n", "8"]);
        assert_eq!(code, 0);
        assert_eq!(Network::from_json(&out).unwrap().depth(), 5);
    }

    #[test]
    fn bad_size_exits_2() {
        let (code, _, err) = run_capture(&["build", "--kind", "benes", "--n", "6"]);
        assert_eq!(code, 2);
        assert!(err.contains("invalid network size"));
    }

    #[test]
    fn route_two_band_example() {
        let (code, out, _) = run_capture(&[
            "route",
            "--kind",
            "benes",
            "--n",
            "8",
            "--perm",
            "4,5,0,6,1,2,7,3",
        ]);
        assert_eq!(code, 0);
        let plan = RoutePlan::from_json(&out).unwrap();
        assert_eq!(plan.cost.terminal_visits, 40);
    }

    #[test]
    fn route_rejects_duplicates_by_name() {
        let (code, _, err) =
            run_capture(&["route", "--kind", "benes", "--n", "4", "--perm", "0,1,1,3"]);
        assert_eq!(code, 2);
        assert!(err.contains("duplicate image 1"));
    }

    #[test]
    fn count_json() {
        let (code, out, _) = run_capture(&["count", "--n", "4", "--k", "2", "--exhaustive"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["formula_count"], 18);
        assert_eq!(v["exhaustive_count"], 14);
        assert_eq!(v["agrees"], false);
    }

    #[test]
    fn sweep_rows_are_deterministic() {
        let a = sweep_rows(16, 20, 1, Dist::Locality).unwrap();
        assert_eq!(a, sweep_rows(16, 20, 1, Dist::Locality).unwrap());
        assert!(a.iter().all(|r| r.verified && r.terminal_visits <= 112));
    }
}
