//! Command-line front end.
//!
//! Every subcommand resolves its settings as flags > config file > defaults;
//! the output directory additionally honours `NDE_SHOCKKIT_OUT` between
//! flags and file. Results land in `<out>/<run_id>/` next to a
//! `manifest.conf` that can be passed back through `--config`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::blowup::{collapse_jump, solve_blowup_profile, solve_collapse_profile, OriginSeed};
use crate::bundles::SolveConfig;
use crate::error::Error;
use crate::euler::{euler_characteristics, euler_f, euler_shock_value, EulerParams};
use crate::extension::{
    default_f2_bracket, family_sweep, log_grid, nonexistence_scan, normalize_family, shoot, CauchyTriple, Component,
    F1Policy, ShootConfig,
};
use crate::odeint::Trajectory;
use crate::output::{fmt_f64, trajectory_table, write_csv, write_svg, write_text, Axes, Series, Table};
use crate::regpde::{blowup_initial_field, evolve, EvolveOptions, Grid, LeftClamp, Operator, RunStatus};
use crate::shock::{check_symmetry_breaking, rh_speed, select_fbp_profile, FbpSearch, ShockSide};
use crate::similarity::SimilarityParams;
use crate::verify::{run_suite, PRIMARY};

pub const OUT_ENV: &str = "NDE_SHOCKKIT_OUT";
pub const DEFAULT_OUT: &str = "nde-shockkit-out";
pub const MANIFEST: &str = "manifest.conf";

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

macro_rules! flags {
    ($name:ident { $($(#[doc = $doc:literal])* $field:ident),* $(,)? }) => {
        #[derive(Args, Debug, Default)]
        pub struct $name {
            $(
                $(#[doc = $doc])*
                #[arg(long, allow_hyphen_values = true, value_name = "V")]
                $field: Option<String>,
            )*
        }

        impl $name {
            fn given(&self) -> Vec<(&'static str, &str)> {
                let mut v = Vec::new();
                $(
                    if let Some(x) = &self.$field {
                        v.push((stringify!($field), x.as_str()));
                    }
                )*
                v
            }
        }
    };
}

flags!(BlowupFlags {
    /// comma-separated list
    alpha,
    /// origin series coefficient A < 0
    a,
    /// series step-off distance
    delta,
    y_end,
    rtol,
    atol,
});

flags!(CollapseFlags {
    alpha,
    f0,
    f1,
    f2,
    /// time t < 0 at which the jump is reported
    t,
    y_end,
    rtol,
    atol,
});

flags!(ShootFlags {
    alpha,
    f0,
    f1,
    /// F''(0) of the y < 0 profile
    f2,
    /// f0, f1 or f2
    tune,
    /// starting bracket for the tuned component
    lo,
    hi,
    tol,
    agreement,
    y_end,
    rtol,
    atol,
});

flags!(FamilyFlags {
    alpha,
    /// comma-separated list
    f0,
    /// F1 = f1_ratio * F0
    f1_ratio,
    /// far-field constant the members are rescaled to
    c0_target,
    tol,
    agreement,
    y_end,
    rtol,
    atol,
});

flags!(NonexistFlags {
    /// comma-separated list
    alpha,
    a_min,
    a_max,
    points,
    y_end,
    rtol,
    atol,
});

flags!(ShockFlags {
    alpha,
    /// comma-separated list
    kappa,
    c0_target,
    f0_min,
    f0_max,
    grid_points,
    tol,
    agreement,
});

flags!(EulerFlags {
    alpha,
    c0,
    y_min,
    points,
    /// comma-separated times for the shock law table
    t,
});

flags!(RegpdeFlags {
    l,
    n,
    cfl,
    /// comma-separated snapshot times
    taus,
    /// initial data tag; only `sqrt` (v = sqrt|y| on y < 0)
    data,
});

flags!(VerifyFlags {
    /// only `primary`
    suite,
    /// comma-separated criterion ids; all when absent
    criteria,
});

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Blow-up profiles from the origin series
    Blowup(BlowupFlags),
    /// Profile with a collapsing shock from regular Cauchy data
    Collapse(CollapseFlags),
    /// Shoot one Cauchy component of an extension profile
    Shoot(ShootFlags),
    /// Extension family over F0, normalized to a common C0
    Family(FamilyFlags),
    /// Bundle classification of F0 = 0 orbits
    Nonexist(NonexistFlags),
    /// FBP selection and Rankine-Hugoniot checks
    ShockConditions(ShockFlags),
    /// Euler limit profile against characteristics
    Euler(EulerFlags),
    /// Regularized PDE from sqrt|y| data
    Regpde(RegpdeFlags),
    /// Acceptance suite
    Verify(VerifyFlags),
}

#[derive(Parser, Debug)]
#[command(
    name = "nde-shockkit",
    version,
    about = "Similarity profiles and shocks for u_t = (u u_x)_xx"
)]
pub struct Cli {
    /// `key = value` file; flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    F64,
    F64List,
    Usize,
    Str,
}

type Schema = &'static [(&'static str, Kind, Option<&'static str>)];

const TOLS: [(&str, Kind, Option<&str>); 2] = [("rtol", Kind::F64, Some("1e-10")), ("atol", Kind::F64, Some("1e-10"))];

const BLOWUP: Schema = &[
    ("alpha", Kind::F64List, Some("0.5,0.4,0.3,0.2,0.1,0.01")),
    ("a", Kind::F64, Some("-1")),
    ("delta", Kind::F64, None),
    ("y_end", Kind::F64, Some("-50")),
    TOLS[0],
    TOLS[1],
];
const COLLAPSE: Schema = &[
    ("alpha", Kind::F64, Some("0.3")),
    ("f0", Kind::F64, Some("1")),
    ("f1", Kind::F64, Some("0")),
    ("f2", Kind::F64, Some("0")),
    ("t", Kind::F64, Some("-1")),
    ("y_end", Kind::F64, Some("-50")),
    TOLS[0],
    TOLS[1],
];
const SHOOT: Schema = &[
    ("alpha", Kind::F64, Some("0.1")),
    ("f0", Kind::F64, Some("1")),
    ("f1", Kind::F64, None),
    ("f2", Kind::F64, None),
    ("tune", Kind::Str, Some("f1")),
    ("lo", Kind::F64, None),
    ("hi", Kind::F64, None),
    ("tol", Kind::F64, Some("1e-12")),
    ("agreement", Kind::F64, Some("1e-6")),
    ("y_end", Kind::F64, Some("-200")),
    TOLS[0],
    TOLS[1],
];
const FAMILY: Schema = &[
    ("alpha", Kind::F64, Some("0.1")),
    ("f0", Kind::F64List, Some("0.5,1,2")),
    ("f1_ratio", Kind::F64, Some("-1")),
    ("c0_target", Kind::F64, Some("1")),
    ("tol", Kind::F64, Some("1e-12")),
    ("agreement", Kind::F64, Some("1e-6")),
    ("y_end", Kind::F64, Some("-200")),
    TOLS[0],
    TOLS[1],
];
const NONEXIST: Schema = &[
    ("alpha", Kind::F64List, Some("0.1,0.3")),
    ("a_min", Kind::F64, Some("-10")),
    ("a_max", Kind::F64, Some("-0.1")),
    ("points", Kind::Usize, Some("9")),
    ("y_end", Kind::F64, Some("-200")),
    TOLS[0],
    TOLS[1],
];
const SHOCK: Schema = &[
    ("alpha", Kind::F64, Some("0.1")),
    ("kappa", Kind::F64List, Some("0,1")),
    ("c0_target", Kind::F64, Some("1")),
    ("f0_min", Kind::F64, Some("1e-4")),
    ("f0_max", Kind::F64, Some("100")),
    ("grid_points", Kind::Usize, Some("13")),
    ("tol", Kind::F64, Some("1e-12")),
    ("agreement", Kind::F64, Some("1e-6")),
];
const EULER: Schema = &[
    ("alpha", Kind::F64, Some("0.2")),
    ("c0", Kind::F64, Some("1")),
    ("y_min", Kind::F64, Some("-10")),
    ("points", Kind::Usize, Some("201")),
    ("t", Kind::F64List, Some("0.5,1,2")),
];
const REGPDE: Schema = &[
    ("l", Kind::F64, Some("10")),
    ("n", Kind::Usize, Some("512")),
    ("cfl", Kind::F64, Some("0.25")),
    ("taus", Kind::F64List, Some("0.001,0.005,0.01")),
    ("data", Kind::Str, Some("sqrt")),
];
const VERIFY: Schema = &[("suite", Kind::Str, Some("primary")), ("criteria", Kind::F64List, None)];

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Blowup(_) => "blowup",
            Command::Collapse(_) => "collapse",
            Command::Shoot(_) => "shoot",
            Command::Family(_) => "family",
            Command::Nonexist(_) => "nonexist",
            Command::ShockConditions(_) => "shock-conditions",
            Command::Euler(_) => "euler",
            Command::Regpde(_) => "regpde",
            Command::Verify(_) => "verify",
        }
    }

    fn schema(&self) -> Schema {
        match self {
            Command::Blowup(_) => BLOWUP,
            Command::Collapse(_) => COLLAPSE,
            Command::Shoot(_) => SHOOT,
            Command::Family(_) => FAMILY,
            Command::Nonexist(_) => NONEXIST,
            Command::ShockConditions(_) => SHOCK,
            Command::Euler(_) => EULER,
            Command::Regpde(_) => REGPDE,
            Command::Verify(_) => VERIFY,
        }
    }

    fn given(&self) -> Vec<(&'static str, &str)> {
        match self {
            Command::Blowup(f) => f.given(),
            Command::Collapse(f) => f.given(),
            Command::Shoot(f) => f.given(),
            Command::Family(f) => f.given(),
            Command::Nonexist(f) => f.given(),
            Command::ShockConditions(f) => f.given(),
            Command::Euler(f) => f.given(),
            Command::Regpde(f) => f.given(),
            Command::Verify(f) => f.given(),
        }
    }
}

/// Failure of a run, mapped onto an exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Numerical(Error::Range(_)) => EXIT_USAGE,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    /// `error: kind=<kind> msg=<message>` on a single line.
    pub fn line(&self) -> String {
        let (kind, msg) = match self {
            Failure::Usage(m) => ("usage", m.clone()),
            Failure::Numerical(e) => (e.kind(), e.to_string()),
        };
        format!("error: kind={kind} msg={}", msg.replace(['\n', '\r'], " "))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parses `key = value` lines; `#` starts a comment, `-` in keys reads as `_`.
pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let k = k.trim().replace('-', "_");
        if k.is_empty() {
            return Err(usage(format!("config line {}: empty key", i + 1)));
        }
        if out.iter().any(|(prev, _)| *prev == k) {
            return Err(usage(format!("config line {}: duplicate key `{k}`", i + 1)));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Shortest round-trip form, in exponent notation away from order one.
fn number(x: f64) -> String {
    if x == 0.0 || (1e-4..1e6).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn canonical(key: &str, kind: Kind, raw: &str) -> CliResult<String> {
    let bad = |what: &str| usage(format!("{key} = {raw:?}: expected {what}"));
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite());
    match kind {
        Kind::F64 => num(raw).map(number).ok_or_else(|| bad("a finite number")),
        Kind::F64List => raw
            .split(',')
            .map(|s| {
                num(s)
                    .map(number)
                    .ok_or_else(|| bad("a comma-separated list of numbers"))
            })
            .collect::<CliResult<Vec<_>>>()
            .map(|v| v.join(",")),
        Kind::Usize => raw
            .trim()
            .parse::<usize>()
            .map(|x| x.to_string())
            .map_err(|_| bad("a non-negative integer")),
        Kind::Str => Ok(raw.trim().to_string()),
    }
}

/// Effective settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub values: BTreeMap<String, String>,
    pub out: PathBuf,
}

impl RunConfig {
    fn resolve(cli: &Cli, env_out: Option<PathBuf>) -> CliResult<Self> {
        let cmd = &cli.command;
        let schema = cmd.schema();
        let mut values: BTreeMap<String, String> = BTreeMap::new();
        for (k, _, d) in schema {
            if let Some(d) = d {
                values.insert(k.to_string(), d.to_string());
            }
        }
        let mut file_out = None;
        if let Some(path) = &cli.config {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            for (k, v) in parse_config(&text)? {
                match k.as_str() {
                    "subcommand" if v == cmd.name() => {}
                    "subcommand" => {
                        return Err(usage(format!("config is for `{v}`, not `{}`", cmd.name())));
                    }
                    "out" => file_out = Some(PathBuf::from(v)),
                    _ if schema.iter().any(|(s, _, _)| *s == k) => {
                        if v.is_empty() {
                            values.remove(&k);
                        } else {
                            values.insert(k, v);
                        }
                    }
                    _ => return Err(usage(format!("unknown key `{k}` for `{}`", cmd.name()))),
                }
            }
        }
        for (k, v) in cmd.given() {
            values.insert(k.to_string(), v.to_string());
        }
        for (k, kind, _) in schema {
            if let Some(v) = values.get_mut(*k) {
                *v = canonical(k, *kind, v)?;
            }
        }
        let out = cli
            .out
            .clone()
            .or(env_out)
            .or(file_out)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        Ok(Self {
            subcommand: cmd.name(),
            values,
            out,
        })
    }

    fn body(&self) -> String {
        let mut s = format!("subcommand = {}\n", self.subcommand);
        for (k, v) in &self.values {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// First 16 hex digits of the SHA-256 of the settings, output directory excluded.
    pub fn run_id(&self) -> String {
        let digest = Sha256::digest(self.body().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn run_dir(&self) -> PathBuf {
        self.out.join(self.run_id())
    }

    /// Reusable config file echoing every effective setting.
    pub fn manifest(&self, notes: &[String]) -> String {
        let mut s = format!(
            "# nde-shockkit {} manifest\n# run_id = {}\n",
            env!("CARGO_PKG_VERSION"),
            self.run_id()
        );
        for n in notes {
            let _ = writeln!(s, "# {n}");
        }
        s.push_str(&self.body());
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn f64_opt(&self, key: &str) -> Option<f64> {
        self.raw(key).and_then(|v| v.parse().ok())
    }

    fn f64(&self, key: &str) -> CliResult<f64> {
        self.f64_opt(key)
            .ok_or_else(|| usage(format!("missing value for `{key}`")))
    }

    fn list(&self, key: &str) -> CliResult<Vec<f64>> {
        self.raw(key)
            .ok_or_else(|| usage(format!("missing value for `{key}`")))
            .map(|v| v.split(',').filter_map(|s| s.parse().ok()).collect())
    }

    fn usize(&self, key: &str) -> CliResult<usize> {
        self.raw(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| usage(format!("missing value for `{key}`")))
    }

    fn str(&self, key: &str) -> CliResult<&str> {
        self.raw(key).ok_or_else(|| usage(format!("missing value for `{key}`")))
    }

    fn solve(&self) -> CliResult<SolveConfig> {
        let mut cfg = SolveConfig::default();
        if let Some(r) = self.f64_opt("rtol") {
            cfg.rtol = r;
        }
        if let Some(a) = self.f64_opt("atol") {
            cfg.atol = a;
        }
        if let Some(y) = self.f64_opt("y_end") {
            cfg.y_end = y;
        }
        if !(cfg.rtol > 0.0 && cfg.atol > 0.0) {
            return Err(Error::Range("rtol and atol must be positive".into()).into());
        }
        Ok(cfg)
    }

    fn shoot_config(&self) -> CliResult<ShootConfig> {
        let mut cfg = ShootConfig {
            solve: self.solve()?,
            ..ShootConfig::default()
        };
        if let Some(t) = self.f64_opt("tol") {
            cfg.tol = t;
        }
        if let Some(a) = self.f64_opt("agreement") {
            cfg.agreement = a;
        }
        Ok(cfg)
    }
}

/// What a subcommand produced.
struct Outcome {
    summary: Vec<(String, String)>,
    notes: Vec<String>,
    failure: Option<Failure>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            summary: Vec::new(),
            notes: Vec::new(),
            failure: None,
        }
    }

    fn put(&mut self, k: impl Into<String>, v: impl ToString) {
        self.summary.push((k.into(), v.to_string()));
    }
}

fn params(alpha: f64) -> CliResult<SimilarityParams> {
    Ok(SimilarityParams::new(alpha)?)
}

fn profile_series(label: String, traj: &Trajectory, y_lo: f64) -> Series {
    let (lo, hi) = traj.bounds();
    Series::new(label, traj.sample_component(0, lo.max(y_lo), hi, 400))
}

fn run_blowup(cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> CliResult<()> {
    let alphas = cfg.list("alpha")?;
    let a = cfg.f64("a")?;
    let seed = match cfg.f64_opt("delta") {
        Some(d) => OriginSeed::with_delta(a, d)?,
        None => OriginSeed::new(a)?,
    };
    let solve = cfg.solve()?;
    let ps = alphas.iter().map(|&x| params(x)).collect::<CliResult<Vec<_>>>()?;
    let mut tails = Table::new(&["alpha", "a", "c0", "omega", "c1", "c2", "delta_exp", "residual"]);
    let mut series = Vec::new();
    for (i, p) in ps.iter().enumerate() {
        let (traj, tail) = solve_blowup_profile(p, &seed, solve.y_end, &solve)?;
        write_csv(&trajectory_table(&traj), &dir.join(format!("profile_{i}.csv")))?;
        tails.push_numeric(&[
            p.alpha(),
            a,
            tail.c0,
            tail.omega,
            tail.c1,
            tail.c2,
            tail.delta_exp,
            tail.residual,
        ]);
        series.push(profile_series(
            format!("alpha = {}", p.alpha()),
            &traj,
            f64::NEG_INFINITY,
        ));
        out.put(format!("c0[alpha={}]", p.alpha()), fmt_f64(tail.c0));
    }
    write_csv(&tails, &dir.join("tails.csv"))?;
    write_svg(
        &series,
        &Axes::new("blow-up profiles", "y", "f(y)"),
        &dir.join("profiles.svg"),
    )?;
    Ok(())
}

fn run_collapse(cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> CliResult<()> {
    let p = params(cfg.f64("alpha")?)?;
    let (f0, f1, f2, t) = (cfg.f64("f0")?, cfg.f64("f1")?, cfg.f64("f2")?, cfg.f64("t")?);
    let solve = cfg.solve()?;
    let jump = collapse_jump(f0, &p, t)?;
    let (traj, tail) = solve_collapse_profile(&p, f0, f1, f2, solve.y_end, &solve)?;
    write_csv(&trajectory_table(&traj), &dir.join("profile.csv"))?;
    let mut t_row = Table::new(&["alpha", "f0", "f1", "f2", "c0", "t", "jump"]);
    t_row.push_numeric(&[p.alpha(), f0, f1, f2, tail.c0, t, jump]);
    write_csv(&t_row, &dir.join("collapse.csv"))?;
    write_svg(
        &[profile_series("f".into(), &traj, f64::NEG_INFINITY)],
        &Axes::new("collapsing-shock profile", "y", "f(y)"),
        &dir.join("profile.svg"),
    )?;
    out.put("c0", fmt_f64(tail.c0));
    out.put("jump", fmt_f64(jump));
    Ok(())
}

fn run_shoot(cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> CliResult<()> {
    let p = params(cfg.f64("alpha")?)?;
    let tuned: Component = cfg.str("tune")?.parse().map_err(|e: Error| usage(e.to_string()))?;
    let f0 = cfg.f64("f0")?;
    let f1 = cfg.f64_opt("f1").unwrap_or(0.0);
    let f2 = cfg.f64_opt("f2").unwrap_or(0.0);
    let base = CauchyTriple::new(f0, f1, f2);
    let default = match tuned {
        Component::F0 => (0.01, 10.0),
        Component::F1 => (-2.0, -0.01),
        Component::F2 => default_f2_bracket(f0.abs().max(1e-12), f1),
    };
    let bracket = (
        cfg.f64_opt("lo").unwrap_or(default.0),
        cfg.f64_opt("hi").unwrap_or(default.1),
    );
    let scfg = cfg.shoot_config()?;
    let r = shoot(&p, &base, tuned, bracket, &scfg)?;
    write_csv(&trajectory_table(&r.trajectory), &dir.join("profile.csv"))?;
    let mut row = Table::new(&[
        "alpha",
        "f0",
        "f1",
        "f2",
        "tuned_value",
        "bracket_lo",
        "bracket_hi",
        "c0",
        "tail_residual",
        "window_lo",
        "window_hi",
        "iterations",
    ]);
    let t = r.triple;
    row.push_numeric(&[
        p.alpha(),
        t.f0,
        t.f1,
        t.f2,
        r.tuned_value,
        r.bracket.0,
        r.bracket.1,
        r.c0(),
        r.tail.residual,
        r.tail.window.0,
        r.tail.window.1,
        r.iterations as f64,
    ]);
    write_csv(&row, &dir.join("shoot.csv"))?;
    write_svg(
        &[profile_series(
            format!("{} = {:.8}", tuned.name(), r.tuned_value),
            &r.trajectory,
            r.tail.window.0,
        )],
        &Axes::new("extension profile", "y", "f(y)"),
        &dir.join("profile.svg"),
    )?;
    out.put("tuned", tuned.name());
    out.put("tuned_value", fmt_f64(r.tuned_value));
    out.put("c0", fmt_f64(r.c0()));
    out.put(
        "bracket_kinds",
        format!("{},{}", r.bracket_kinds.0.label(), r.bracket_kinds.1.label()),
    );
    Ok(())
}

fn run_family(cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> CliResult<()> {
    let p = params(cfg.f64("alpha")?)?;
    let f0s = cfg.list("f0")?;
    let ratio = cfg.f64("f1_ratio")?;
    let target = cfg.f64("c0_target")?;
    let fam = family_sweep(&p, &f0s, F1Policy::Ratio(ratio), &cfg.shoot_config()?)?;
    let norm = normalize_family(&fam, target)?;
    let mut table = Table::new(&[
        "f0",
        "f1",
        "f2",
        "c0",
        "norm_f0",
        "norm_f1",
        "norm_f2",
        "norm_c0",
        "norm_jump",
    ]);
    let mut series = Vec::new();
    for (m, n) in fam.members.iter().zip(&norm.members) {
        let (a, b) = (m.result.triple, n.result.triple);
        let jump = 2.0 * b.f0;
        table.push_numeric(&[a.f0, a.f1, a.f2, m.result.c0(), b.f0, b.f1, b.f2, n.result.c0(), jump]);
        series.push(profile_series(
            format!("F0 = {}", m.f0),
            &n.result.trajectory,
            n.result.tail.window.0,
        ));
    }
    write_csv(&table, &dir.join("family.csv"))?;
    if !series.is_empty() {
        write_svg(
            &series,
            &Axes::new(format!("family normalized to C0 = {target}"), "y", "f(y)"),
            &dir.join("family.svg"),
        )?;
    }
    out.put("members", fam.members.len());
    out.put("failures", fam.failures.len());
    if let Some((f0, e)) = fam.failures.into_iter().next() {
        out.notes.push(format!("member F0 = {f0} failed"));
        out.failure = Some(Failure::Numerical(e));
    }
    Ok(())
}

fn run_nonexist(cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> CliResult<()> {
    let alphas = cfg.list("alpha")?;
    let grid = log_grid(cfg.f64("a_min")?, cfg.f64("a_max")?, cfg.usize("points")?);
    let solve = cfg.solve()?;
    let ps = alphas.iter().map(|&x| params(x)).collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(&["alpha", "a", "bundle", "trigger_y"]);
    for p in &ps {
        let rep = nonexistence_scan(p, &grid, &solve)?;
        for e in &rep.entries {
            let bundle = match &e.outcome {
                Ok(k) => k.label().to_string(),
                Err(err) => format!("error:{}", err.kind()),
            };
            let trig = e.trigger_y.map(fmt_f64).unwrap_or_default();
            table.push(vec![fmt_f64(p.alpha()), fmt_f64(e.a), bundle, trig]);
        }
        out.put(format!("matched[alpha={}]", p.alpha()), rep.matched_count());
    }
    write_csv(&table, &dir.join("scan.csv"))?;
    Ok(())
}

fn run_shock(cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> CliResult<()> {
    let p = params(cfg.f64("alpha")?)?;
    let kappas = cfg.list("kappa")?;
    let target = cfg.f64("c0_target")?;
    let search = FbpSearch {
        f0_range: (cfg.f64("f0_min")?, cfg.f64("f0_max")?),
        grid_points: cfg.usize("grid_points")?,
        ..FbpSearch::default()
    };
    let scfg = cfg.shoot_config()?;
    let mut fbp = Table::new(&[
        "kappa",
        "f0",
        "f1",
        "f2",
        "c0",
        "defect",
        "rh_speed",
        "symmetry_residual",
        "sign_lo",
        "sign_hi",
    ]);
    let mut scan = Table::new(&["kappa", "f0", "gap"]);
    let mut series = Vec::new();
    for &kappa in &kappas {
        let sel = select_fbp_profile(&p, kappa, target, &search, &scfg)?;
        let t = sel.result.triple;
        let minus = ShockSide::from(t);
        let plus = minus.mirrored();
        let rh = rh_speed(&minus, &plus)?;
        let sym = check_symmetry_breaking(&minus, &plus, 1e-12);
        fbp.push_numeric(&[
            kappa,
            t.f0,
            t.f1,
            t.f2,
            sel.result.c0(),
            sel.defect,
            rh.lambda,
            sym.residual,
            sel.sign_change.0,
            sel.sign_change.1,
        ]);
        for &(f0, gap) in &sel.scan {
            scan.push_numeric(&[kappa, f0, gap]);
        }
        series.push(Series::new(
            format!("kappa = {kappa}"),
            sel.scan.iter().map(|&(f0, g)| (f0.log10(), g)).collect(),
        ));
        out.put(format!("f0[kappa={kappa}]"), fmt_f64(t.f0));
        out.put(format!("defect[kappa={kappa}]"), fmt_f64(sel.defect));
    }
    write_csv(&fbp, &dir.join("fbp.csv"))?;
    write_csv(&scan, &dir.join("kappa_scan.csv"))?;
    write_svg(
        &series,
        &Axes::new("FBP gap on F1 = -F0", "log10 F0", "F0 F2 / F1^2 - kappa"),
        &dir.join("kappa_scan.svg"),
    )?;
    Ok(())
}

fn run_euler(cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> CliResult<()> {
    let p = EulerParams::new(cfg.f64("alpha")?, cfg.f64("c0")?)?;
    let y_min = cfg.f64("y_min")?;
    let n = cfg.usize("points")?;
    if !(y_min < 0.0) || n < 2 {
        return Err(usage("need y_min < 0 and points >= 2"));
    }
    let mut table = Table::new(&["y", "f", "f_characteristics", "difference"]);
    let (mut pts, mut worst) = (Vec::new(), 0.0f64);
    for i in 0..n {
        let y = y_min * (1.0 - i as f64 / (n - 1) as f64);
        let f = euler_f(y, &p)?;
        let g = euler_characteristics(y, 1.0, &p)?;
        worst = worst.max((f - g).abs());
        table.push_numeric(&[y, f, g, f - g]);
        pts.push((y, f));
    }
    write_csv(&table, &dir.join("euler.csv"))?;
    let mut shock = Table::new(&["t", "u0", "law"]);
    for t in cfg.list("t")? {
        let u0 = euler_characteristics(0.0, t, &p)?;
        shock.push_numeric(&[t, u0, euler_shock_value(t, &p)?]);
    }
    write_csv(&shock, &dir.join("shock_law.csv"))?;
    write_svg(
        &[Series::new(format!("alpha = {}, C0 = {}", p.alpha(), p.c0()), pts)],
        &Axes::new("Euler similarity profile", "y", "F(y)"),
        &dir.join("euler.svg"),
    )?;
    out.put("max_difference", fmt_f64(worst));
    Ok(())
}

fn run_regpde(cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> CliResult<()> {
    let (l, n, cfl) = (cfg.f64("l")?, cfg.usize("n")?, cfg.f64("cfl")?);
    let taus = cfg.list("taus")?;
    let data = cfg.str("data")?;
    if data != "sqrt" {
        return Err(usage(format!("data = {data:?}: only `sqrt` is available")));
    }
    out.notes
        .push("boundary: v and v_y clamped at y = -L to the initial data; odd reflection at y = 0".into());
    let grid = Grid::new(l, n)?;
    let field = blowup_initial_field(&grid)?;
    let ev = evolve(
        &field,
        &grid,
        &Operator::new(LeftClamp::blowup_data(l)),
        &taus,
        &EvolveOptions { cfl, record_l2: false },
    )?;
    let mut series = Vec::new();
    for (k, snap) in ev.snapshots.iter().enumerate() {
        let mut t = Table::new(&["y", "v"]);
        let mut pts = Vec::with_capacity(snap.values.len());
        for (i, &v) in snap.values.iter().enumerate() {
            t.push_numeric(&[grid.y(i), v]);
            pts.push((grid.y(i), v));
        }
        write_csv(&t, &dir.join(format!("snapshot_{k}.csv")))?;
        series.push(Series::new(format!("tau = {}", snap.tau), pts));
    }
    if !series.is_empty() {
        write_svg(
            &series,
            &Axes::new("regularized PDE", "y", "v"),
            &dir.join("snapshots.svg"),
        )?;
    }
    out.put("steps", ev.steps);
    out.put("snapshots", ev.snapshots.len());
    if let RunStatus::Aborted { tau, reason } = ev.status {
        out.failure = Some(Failure::Numerical(Error::Undefined(format!(
            "aborted at tau = {tau}: {reason}"
        ))));
    }
    Ok(())
}

fn run_verify(cfg: &RunConfig, dir: &Path, out: &mut Outcome) -> CliResult<()> {
    let suite = cfg.str("suite")?;
    if suite != "primary" {
        return Err(usage(format!("suite = {suite:?}: only `primary` is available")));
    }
    let ids: Vec<u8> = if cfg.raw("criteria").is_some() {
        cfg.list("criteria")?
            .into_iter()
            .map(|x| {
                if x.fract() == 0.0 && x >= 1.0 && x <= PRIMARY.len() as f64 {
                    Ok(x as u8)
                } else {
                    Err(usage(format!("criterion {x} is not in 1..={}", PRIMARY.len())))
                }
            })
            .collect::<CliResult<_>>()?
    } else {
        (1..=PRIMARY.len() as u8).collect()
    };
    let reports = run_suite(&ids);
    let mut text = String::new();
    for r in &reports {
        say(&format!("{}\n", r.line()));
        text.push_str(&r.to_string());
    }
    write_text(&dir.join("report.txt"), &text)?;
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    out.put("passed", reports.len() - failed.len());
    out.put("failed", failed.len());
    if !failed.is_empty() {
        out.failure = Some(Failure::Numerical(Error::NotFound(format!(
            "criteria {} failed",
            failed.join(",")
        ))));
    }
    Ok(())
}

/// Stdout without panicking on a closed pipe.
fn say(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn execute(cli: &Cli, env_out: Option<PathBuf>) -> CliResult<Option<Failure>> {
    let cfg = RunConfig::resolve(cli, env_out)?;
    let dir = cfg.run_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut out = Outcome::new();
    let res = match &cli.command {
        Command::Blowup(_) => run_blowup(&cfg, &dir, &mut out),
        Command::Collapse(_) => run_collapse(&cfg, &dir, &mut out),
        Command::Shoot(_) => run_shoot(&cfg, &dir, &mut out),
        Command::Family(_) => run_family(&cfg, &dir, &mut out),
        Command::Nonexist(_) => run_nonexist(&cfg, &dir, &mut out),
        Command::ShockConditions(_) => run_shock(&cfg, &dir, &mut out),
        Command::Euler(_) => run_euler(&cfg, &dir, &mut out),
        Command::Regpde(_) => run_regpde(&cfg, &dir, &mut out),
        Command::Verify(_) => run_verify(&cfg, &dir, &mut out),
    };
    write_text(&dir.join(MANIFEST), &cfg.manifest(&out.notes))?;
    res?;
    let mut text = format!("run_id = {}\nrun_dir = {}\n", cfg.run_id(), dir.display());
    for (k, v) in &out.summary {
        let _ = writeln!(text, "{k} = {v}");
    }
    say(&text);
    Ok(out.failure)
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", usage(first).line());
            return EXIT_USAGE;
        }
    };
    let env_out = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    match execute(&cli, env_out) {
        Ok(None) => EXIT_OK,
        Ok(Some(f)) | Err(f) => {
            eprintln!("{}", f.line());
            f.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let v = parse_config("# c\nalpha = 0.2 # x\n\ny-end=-30\n").unwrap();
        assert_eq!(v, vec![("alpha".into(), "0.2".into()), ("y_end".into(), "-30".into())]);
        assert!(parse_config("alpha 0.2").is_err());
        assert!(parse_config("a = 1\na = 2").is_err());
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonical("x", Kind::F64, " 1e-3 ").unwrap(), "0.001");
        assert_eq!(canonical("x", Kind::F64, "0.0000000001").unwrap(), "1e-10");
        assert_eq!(canonical("x", Kind::F64, "-2e6").unwrap(), "-2e6");
        assert_eq!(canonical("x", Kind::F64List, "0.5, 1,2.0").unwrap(), "0.5,1,2");
        assert!(canonical("x", Kind::F64, "nan").is_err());
        assert!(canonical("x", Kind::Usize, "-1").is_err());
    }

    #[test]
    fn flags_override_and_run_id_ignores_out() {
        let a = Cli::try_parse_from(["x", "shoot", "--alpha", "0.2", "--out", "a"]).unwrap();
        let b = Cli::try_parse_from(["x", "shoot", "--alpha", "0.20", "--out", "b"]).unwrap();
        let ra = RunConfig::resolve(&a, None).unwrap();
        let rb = RunConfig::resolve(&b, Some("env".into())).unwrap();
        assert_eq!(ra.values["alpha"], "0.2");
        assert_eq!(rb.out, PathBuf::from("b"));
        assert_eq!(ra.run_id(), rb.run_id());
        let c = Cli::try_parse_from(["x", "shoot"]).unwrap();
        assert_eq!(
            RunConfig::resolve(&c, Some("env".into())).unwrap().out,
            PathBuf::from("env")
        );
    }

    #[test]
    fn failure_exit_codes() {
        assert_eq!(usage("x").exit_code(), EXIT_USAGE);
        assert_eq!(Failure::from(Error::Range("r".into())).exit_code(), EXIT_USAGE);
        assert_eq!(Failure::from(Error::Fit("f".into())).exit_code(), EXIT_NUMERICAL);
        assert_eq!(usage("a\nb").line(), "error: kind=usage msg=a b");
    }
}
