mod manifest;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use coopnet::gadgets::{build_tape_gadgets, CounterMode};
use coopnet::mmsys::{
    assemble, lcm_bounds, plan, run_experiments, ExperimentOptions, MMParams, MMSystem, PlanRequest,
    Profile,
};
use coopnet::netcore::{find_attractor, run, to_dot, Network, State, TraceGroup, TraceWriter};
use coopnet::rng::trial_rng;
use coopnet::suites::{
    counter_suite, increment_suite, mm_suite, monotone_suite, normalizer_suite, structure_suite,
    SuiteReport,
};

use manifest::RunManifest;

#[derive(Parser, Serialize)]
#[command(name = "coopnet", version, about = "Build and study cooperative Boolean networks with long attractors")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Serialize)]
enum Cmd {
    /// Choose parameters and write them as JSON.
    Plan {
        #[command(flatten)]
        sys: SysArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assemble the network; writes the network and a layout file.
    Build {
        #[command(flatten)]
        sys: SysArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a CSV trace of a trajectory.
    Simulate {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, default_value = "random")]
        init: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        horizon: u64,
        /// Trace labelled blocks (label prefix before '.') as hex.
        #[arg(long)]
        blocks: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Find the attractor reached from one state; prints `transient,period`.
    Attractor {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, default_value = "random")]
        init: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "max-steps", default_value_t = 1_000_000)]
        max_steps: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one verification suite; exits 1 when it fails.
    Verify {
        #[arg(long, alias = "gadget", value_enum)]
        suite: Suite,
        #[arg(long)]
        net: Option<PathBuf>,
        #[command(flatten)]
        sys: SysArgs,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random samples for the normalizer beyond 16 inputs.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Random ordered pairs for the monotonicity check.
        #[arg(long, default_value_t = 100_000)]
        pairs: u64,
        #[arg(long = "macro-steps", default_value_t = 10)]
        macro_steps: u64,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo over random starts; writes CSV and a JSON summary.
    Stats {
        #[command(flatten)]
        sys: SysArgs,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long = "macro-steps", default_value_t = 10)]
        macro_steps: u64,
        /// Draw the engaged blocks crude (condition on event E).
        #[arg(long = "condition-e")]
        condition_e: bool,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the wiring graph in DOT.
    Export {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Table of LCM(n, ..., n-k) against (n-k)^k / k!.
    Lcm {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Serialize, Clone)]
struct SysArgs {
    /// Read parameters from a plan file instead.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long, default_value_t = 0.9)]
    p: f64,
    #[arg(long, default_value_t = 1.3)]
    c: f64,
    #[arg(long)]
    n: Option<u64>,
    /// Target variable count.
    #[arg(long = "N")]
    big_n: Option<usize>,
    #[arg(long, value_enum, default_value_t = Mode::Seeded)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = ProfileArg::Desk)]
    profile: ProfileArg,
    /// Engaged slots (toy profile).
    #[arg(long)]
    engaged: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Seeded,
    Selfinit,
}

#[derive(ValueEnum, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum ProfileArg {
    Strict,
    Desk,
    Toy,
}

#[derive(ValueEnum, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Suite {
    Structure,
    Monotone,
    F1,
    F3,
    Counter,
    Mm,
}

enum Failure {
    /// Exit 2: bad arguments, unreadable files, infeasible requests.
    Usage(String),
    /// Exit 1: a check ran and failed.
    Check(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Out = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Flat string map of the parsed arguments for the manifest.
fn arg_map(cmd: &Cmd) -> (String, BTreeMap<String, String>) {
    let v = serde_json::to_value(cmd).expect("arguments serialize");
    let mut map = BTreeMap::new();
    let mut name = String::new();
    if let serde_json::Value::Object(outer) = v {
        for (k, inner) in outer {
            name = k.to_lowercase();
            flatten("", &inner, &mut map);
        }
    }
    (name, map)
}

fn flatten(prefix: &str, v: &serde_json::Value, map: &mut BTreeMap<String, String>) {
    match v {
        serde_json::Value::Object(o) => {
            for (k, x) in o {
                flatten(k, x, map);
            }
        }
        serde_json::Value::Null => {}
        serde_json::Value::String(s) => {
            map.insert(prefix.into(), s.clone());
        }
        other => {
            map.insert(prefix.into(), other.to_string());
        }
    }
}

fn manifest(cli: &Cli, seed: Option<u64>) -> RunManifest {
    let (name, args) = arg_map(&cli.cmd);
    RunManifest::new(&name, args, seed)
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Failure::Usage("--jobs must be positive".into())),
        Some(j) => Ok(rayon::ThreadPoolBuilder::new().num_threads(j).build()?.install(f)),
    }
}

fn request(a: &SysArgs) -> PlanRequest {
    let mode = match a.mode {
        Mode::Seeded => CounterMode::Seeded,
        Mode::Selfinit => CounterMode::SelfInit,
    };
    let profile = match a.profile {
        ProfileArg::Strict => Profile::Strict,
        ProfileArg::Desk => Profile::Desk,
        ProfileArg::Toy => Profile::Toy,
    };
    let toy = profile == Profile::Toy;
    PlanRequest {
        p: a.p,
        c: a.c,
        n: a.n.or(if toy && a.big_n.is_none() { Some(8) } else { None }),
        big_n: a.big_n,
        mode,
        profile,
        engaged: a.engaged.or(if toy { Some(2) } else { None }),
    }
}

fn params(a: &SysArgs, m: &mut RunManifest) -> Result<MMParams, Failure> {
    match &a.plan {
        Some(path) => {
            m.input(path);
            Ok(MMParams::from_json(&fs::read_to_string(path)?)?)
        }
        None => Ok(plan(&request(a))?),
    }
}

fn write(path: &Path, data: &str, m: &mut RunManifest) -> Out {
    fs::write(path, data)?;
    m.output(path);
    Ok(())
}

fn load_net(path: &Path, m: &mut RunManifest) -> Result<Network, Failure> {
    m.input(path);
    Ok(Network::from_json(&fs::read_to_string(path)?)?)
}

/// `random`, `hex:<digits>` or `file:<path>` holding hex digits.
fn initial_state(net: &Network, init: &str, seed: u64) -> Result<State, Failure> {
    let n = net.len();
    let s = if init == "random" {
        let mut s = State::random(n, &mut trial_rng(seed, 0));
        for (&v, &b) in &net.preset {
            s.set(v, b);
        }
        s
    } else if let Some(h) = init.strip_prefix("hex:") {
        State::from_hex(n, h.trim())?
    } else if let Some(p) = init.strip_prefix("file:") {
        State::from_hex(n, fs::read_to_string(p)?.trim())?
    } else {
        return Err(Failure::Usage(format!("--init must be random, hex:<digits> or file:<path>, got {init:?}")));
    };
    Ok(s)
}

#[derive(Serialize)]
struct LayoutFile<'a> {
    params: &'a MMParams,
    layout: &'a coopnet::mmsys::Layout,
    summary: coopnet::mmsys::SystemSummary,
    checks: Vec<coopnet::mmsys::Check>,
    s_plus: String,
}

fn layout_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.layout.json"))
}

fn build_files(sys: &MMSystem, out: &Path, m: &mut RunManifest) -> Out {
    write(out, &sys.net.to_json(), m)?;
    let lf = LayoutFile {
        params: &sys.params,
        layout: &sys.layout,
        summary: sys.summary(),
        checks: sys.check_constraints(),
        s_plus: sys.s_plus.to_hex(),
    };
    write(&layout_path(out), &serde_json::to_string_pretty(&lf)?, m)
}

fn report_suite(r: &SuiteReport, out: Option<&Path>, m: &mut RunManifest) -> Out {
    println!("{}", r.line());
    if let Some(o) = out {
        write(o, &serde_json::to_string_pretty(r)?, m)?;
        m.write_next_to(o)?;
    }
    if r.pass() {
        Ok(())
    } else {
        Err(Failure::Check(r.line()))
    }
}

fn dispatch(cli: &Cli) -> Out {
    match &cli.cmd {
        Cmd::Plan { sys, out } => {
            let mut m = manifest(cli, None);
            let p = params(sys, &mut m)?;
            write(out, &p.to_json(), &mut m)?;
            m.write_next_to(out)?;
            println!(
                "plan: n={} k={} eps={} l={} m={} |I|={} engaged={} taus=({}, {}, {}) profile={:?}",
                p.n, p.k, p.eps, p.ell, p.m, p.tape_len, p.engaged, p.tau1, p.tau2, p.tau3, p.profile
            );
            for c in p.violated() {
                println!("  not satisfied{}: {} ({} {} {})", if c.enforced { "" } else { " (waived)" }, c.name, c.lhs, c.relation, c.rhs);
            }
            Ok(())
        }
        Cmd::Build { sys, out } => {
            let mut m = manifest(cli, None);
            let p = params(sys, &mut m)?;
            let s = assemble(&p)?;
            if p.profile == Profile::Strict {
                let bad: Vec<String> = s.check_constraints().iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
                if !bad.is_empty() {
                    return Err(Failure::Usage(format!("infeasible under strict profile: {}", bad.join("; "))));
                }
            }
            build_files(&s, out, &mut m)?;
            m.write_next_to(out)?;
            let sm = s.summary();
            println!(
                "built {} variables (tape {}, counter {}), t0={}, predicted period {}",
                sm.n_vars, sm.tape_vars, sm.counter_vars, sm.t0, sm.predicted_period
            );
            Ok(())
        }
        Cmd::Simulate { net, init, seed, horizon, blocks, out } => {
            let mut m = manifest(cli, Some(*seed));
            let n = load_net(net, &mut m)?;
            let s0 = initial_state(&n, init, *seed)?;
            let file = fs::File::create(out)?;
            let buf = std::io::BufWriter::new(file);
            let mut tw = if *blocks {
                let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
                for (&v, l) in &n.labels {
                    if let Some((g, _)) = l.split_once('.') {
                        groups.entry(g.to_string()).or_default().push(v);
                    }
                }
                let mut gs: Vec<TraceGroup> = groups.into_iter().map(|(name, vars)| TraceGroup { name, vars }).collect();
                gs.sort_by_key(|g| g.vars[0]);
                TraceWriter::grouped(buf, n.len(), gs)?
            } else {
                TraceWriter::full(buf, n.len())?
            };
            let mut err = None;
            let mut sink = |t: u64, s: &State| {
                if err.is_none() {
                    err = tw.write(t, s).err();
                }
            };
            let end = run(&n, &s0, *horizon, Some(&mut sink))?;
            if let Some(e) = err {
                return Err(e.into());
            }
            tw.finish()?;
            m.output(out);
            m.write_next_to(out)?;
            println!("simulated {horizon} steps of {} variables; final state has {} ones", n.len(), end.count_ones());
            Ok(())
        }
        Cmd::Attractor { net, init, seed, max_steps, out } => {
            let mut m = manifest(cli, Some(*seed));
            let n = load_net(net, &mut m)?;
            let s0 = initial_state(&n, init, *seed)?;
            let r = find_attractor(&n, &s0, *max_steps)?;
            if let Some(o) = out {
                write(o, &serde_json::to_string_pretty(&r)?, &mut m)?;
                m.write_next_to(o)?;
            }
            if r.truncated {
                return Err(Failure::Check(format!("no cycle within {max_steps} steps")));
            }
            println!("transient,period");
            println!("{},{}", r.transient, r.period);
            Ok(())
        }
        Cmd::Verify { suite, net, sys, trials, seed, samples, pairs, macro_steps, jobs, out } => {
            let mut m = manifest(cli, Some(*seed));
            let r = match suite {
                Suite::Structure | Suite::Monotone => {
                    let n = match net {
                        Some(path) => load_net(path, &mut m)?,
                        None => assemble(&params(sys, &mut m)?)?.net,
                    };
                    if *suite == Suite::Structure {
                        structure_suite(&n)
                    } else {
                        monotone_suite(&n, *pairs, *seed)?
                    }
                }
                Suite::F1 | Suite::F3 => {
                    let p = params(sys, &mut m)?;
                    let cb = p.codebook()?;
                    let (f1, f3, _) = build_tape_gadgets(&cb, p.m)?;
                    if *suite == Suite::F1 {
                        increment_suite(&f1, &cb, p.m)?
                    } else {
                        normalizer_suite(&f3, &cb, *samples, *seed)?
                    }
                }
                Suite::Counter => {
                    let s = assemble(&params(sys, &mut m)?)?;
                    with_jobs(*jobs, || counter_suite(&s.bundle.counter, *trials, *seed))?
                }
                Suite::Mm => {
                    let s = assemble(&params(sys, &mut m)?)?;
                    with_jobs(*jobs, || mm_suite(&s, *trials, *seed, *macro_steps))??
                }
            };
            report_suite(&r, out.as_deref(), &mut m)
        }
        Cmd::Stats { sys, trials, seed, horizon, macro_steps, condition_e, jobs, out } => {
            let mut m = manifest(cli, Some(*seed));
            let s = assemble(&params(sys, &mut m)?)?;
            let opts = ExperimentOptions {
                trials: *trials,
                seed: *seed,
                macro_steps: *macro_steps,
                horizon: *horizon,
                condition_e: *condition_e,
                pairs: true,
            };
            let r = with_jobs(*jobs, || run_experiments(&s, &opts))??;
            write(out, &r.to_csv()?, &mut m)?;
            write(&out.with_extension("json"), &r.to_json(), &mut m)?;
            m.write_next_to(out)?;
            println!(
                "{} trials: E {} (exact P(E) {:.4}), F {}, hit s+ {}, window pass {}, pairs coalesced by t0 {}/{}",
                r.trials, r.event_e, r.p_e_exact, r.event_f, r.hit_s_plus, r.window_pass, r.pairs_coalesced_by_t0, r.pairs
            );
            Ok(())
        }
        Cmd::Export { net, out } => {
            let mut m = manifest(cli, None);
            let n = load_net(net, &mut m)?;
            write(out, &to_dot(&n), &mut m)?;
            m.write_next_to(out)?;
            println!("wrote {} nodes", n.len());
            Ok(())
        }
        Cmd::Lcm { n, out } => {
            let mut m = manifest(cli, None);
            if *n < 2 {
                return Err(Failure::Usage("--n must be at least 2".into()));
            }
            let mut w = String::from("n,k,lcm,bound,holds\n");
            let mut bad = 0;
            for k in 1..*n {
                let (e, b) = lcm_bounds(*n, k)?;
                let ok = e >= b;
                bad += u32::from(!ok);
                w.push_str(&format!("{n},{k},{e},{b},{}\n", u8::from(ok)));
            }
            write(out, &w, &mut m)?;
            m.write_next_to(out)?;
            println!("lcm bound checked for k = 1..{}: {} failures", n - 1, bad);
            if bad > 0 {
                return Err(Failure::Check(format!("{bad} rows violate the bound")));
            }
            Ok(())
        }
    }
}
