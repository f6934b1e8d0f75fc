mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use sibuya_core::bd::{simulate_ctmc, stationary_solve, SimConfig};
use sibuya_core::branching::{offspring_series, progeny_sign_diagnosis, simulate_progeny, ProgenyConfig};
use sibuya_core::distributions::{divisibility_report, g_function, pmf_table};
use sibuya_core::gf::{fmt17, pgf_coefficients, pgf_thin};
use sibuya_core::moments::{abs_moment_classify, default_ladder, factorial_moments};
use sibuya_core::sampling::sample;
use sibuya_core::selfdecomp::{bondesson_check, bondesson_check_g, residual_pgf};
use sibuya_core::verify::tv_distance;
use sibuya_core::{make_spec, BdModel, BranchingModel, DistributionSpec, Error, Family, FamilyParams, Pgf, PmfTable};

use config::{pick, Defaults};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "sibuya-lab", version, about = "Sibuya-like discrete distributions from the command line")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Probability table p_0..p_N
    Pmf {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Evaluate the pgf on a comma-separated grid
    PgfEval {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        w: Vec<f64>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Table of the law with pgf Q(1 - a + a w)
    Thin {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Birth-death models read from JSON {"alpha":[..],"beta":[..],"floor":i}
    Bd {
        #[command(subcommand)]
        cmd: BdCmd,
    },
    /// Scaled factorial moments F_1..F_J
    Moments {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long)]
        j_max: Option<usize>,
    },
    /// Whether E N^r is finite
    MomentFinite {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long)]
        r: f64,
    },
    /// Self-decomposability evidence
    CheckSd {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long)]
        j_max: Option<usize>,
        #[arg(long, value_enum, default_value_t = SdMethod::Bondesson)]
        method: SdMethod,
        /// Thinning factor for the residual method
        #[arg(long, default_value_t = 0.5)]
        a: f64,
    },
    /// Offspring law whose total progeny is extended Sibuya(b, gamma)
    Progeny {
        #[arg(long)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        simulate: bool,
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Random variates, one per line
    Sample {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(short = 'n', long = "count")]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum BdCmd {
    /// Stationary law
    Solve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Event-driven simulation; reports TV distance to the stationary law
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long, default_value_t = 0)]
        initial: usize,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

#[derive(Args)]
struct FamilyArgs {
    /// Family name, e.g. sibuya, extended_sibuya, nbd
    family: String,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    mean: Option<f64>,
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    /// Bernoulli success probability
    #[arg(long)]
    p: Option<f64>,
}

impl FamilyArgs {
    fn spec(&self) -> Result<DistributionSpec, Error> {
        let params = FamilyParams {
            gamma: self.gamma,
            lambda: self.lambda,
            nu: self.nu,
            b: self.b,
            theta: self.theta,
            q: self.q,
            k: self.k,
            mean: self.mean,
            ell: self.ell,
            m: self.m,
            a: self.p,
        };
        make_spec(&self.family.replace('-', "_"), &params)
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SdMethod {
    Bondesson,
    Residual,
}

enum Failure {
    Lib(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Out = Result<String, Failure>;

fn format_of(flag: Option<Format>, cfg: &Defaults) -> Result<Format, Failure> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match cfg.format.as_deref() {
        None | Some("csv") => Ok(Format::Csv),
        Some("json") => Ok(Format::Json),
        Some(other) => Err(Failure::Usage(format!("config format = {other:?}: expected csv or json"))),
    }
}

fn document(command: &str, body: impl Serialize) -> Out {
    let mut v = json!({ "schema_version": SCHEMA_VERSION, "command": command });
    match serde_json::to_value(body).map_err(|e| Failure::Usage(e.to_string()))? {
        Value::Object(m) => v.as_object_mut().unwrap().extend(m),
        other => {
            v["result"] = other;
        }
    }
    Ok(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
}

fn table_out(command: &str, spec: Option<&DistributionSpec>, t: &PmfTable, f: Format) -> Out {
    match f {
        Format::Csv => Ok(t.to_csv()),
        Format::Json => document(command, json!({ "spec": spec, "table": t })),
    }
}

fn read_model(path: &PathBuf) -> Result<BdModel, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let m: BdModel = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(BdModel::new(m.alpha, m.beta, m.floor)?)
}

fn run(cmd: Cmd, cfg: &Defaults) -> Out {
    match cmd {
        Cmd::Pmf { fam, n_max, format } => {
            let spec = fam.spec()?;
            let t = pmf_table(&spec, pick(n_max, cfg.n_max, 50))?;
            table_out("pmf", Some(&spec), &t, format_of(format, cfg)?)
        }
        Cmd::PgfEval { fam, w, format } => {
            let spec = fam.spec()?;
            let pgf = Pgf::family(spec);
            let values = w.iter().map(|&x| pgf.eval(x)).collect::<Result<Vec<_>, _>>()?;
            match format_of(format, cfg)? {
                Format::Csv => {
                    let mut s = String::from("w,value\n");
                    for (x, v) in w.iter().zip(&values) {
                        s.push_str(&format!("{},{}\n", fmt17(*x), fmt17(*v)));
                    }
                    Ok(s)
                }
                Format::Json => document("pgf-eval", json!({ "spec": spec, "w": w, "values": values })),
            }
        }
        Cmd::Thin { fam, a, n_max, format } => {
            let spec = fam.spec()?;
            let thinned = pgf_thin(&Pgf::family(spec), a)?;
            let t = pgf_coefficients(&thinned, pick(n_max, cfg.n_max, 50))?;
            match format_of(format, cfg)? {
                Format::Csv => Ok(t.to_csv()),
                Format::Json => document("thin", json!({ "spec": spec, "a": a, "table": t })),
            }
        }
        Cmd::Bd { cmd: BdCmd::Solve { model, n_max, format } } => {
            let m = read_model(&model)?;
            let sol = stationary_solve(&m, pick(n_max, cfg.n_max, 100))?;
            match format_of(format, cfg)? {
                Format::Csv => Ok(sol.pmf.to_csv()),
                Format::Json => {
                    document("bd solve", json!({ "model": m, "floor": sol.floor, "ln_norm": sol.ln_norm, "table": sol.pmf }))
                }
            }
        }
        Cmd::Bd { cmd: BdCmd::Simulate { model, t_end, seed, replicas, initial, format } } => {
            let m = read_model(&model)?;
            let mut sc = SimConfig::new(pick(t_end, cfg.t_end, 1e5), pick(seed, cfg.seed, 0), initial);
            sc.replicas = pick(replicas, cfg.replicas, 1);
            let stats = simulate_ctmc(&m, &sc)?;
            let emp = stats.probabilities();
            // the analytic law is whatever the solver gives; absent when it diverges
            let tv = stationary_solve(&m, emp.len().max(1) - 1).ok().map(|sol| {
                let mut want = sol.pmf.probs;
                want.push(sol.pmf.tail_mass);
                let mut got = emp.clone();
                got.resize(want.len(), 0.0);
                tv_distance(&got, &want)
            });
            match format_of(format, cfg)? {
                Format::Csv => {
                    if let Some(tv) = tv {
                        eprintln!("tv_distance={}", fmt17(tv));
                    }
                    Ok(stats.to_csv())
                }
                Format::Json => document(
                    "bd simulate",
                    json!({ "model": m, "events": stats.events, "observed_time": stats.observed_time,
                            "probabilities": emp, "tv_distance": tv }),
                ),
            }
        }
        Cmd::Moments { fam, j_max } => {
            let spec = fam.spec()?;
            document("moments", factorial_moments(&spec, pick(j_max, cfg.j_max, 4))?)
        }
        Cmd::MomentFinite { fam, r } => {
            let spec = fam.spec()?;
            document("moment-finite", abs_moment_classify(&Pgf::family(spec), r, &default_ladder())?)
        }
        Cmd::CheckSd { fam, j_max, method, a } => {
            let spec = fam.spec()?;
            let j = pick(j_max, cfg.j_max, 200);
            let verdict = divisibility_report(&spec);
            match method {
                SdMethod::Bondesson => {
                    let r = match g_function(&spec) {
                        Ok(g) => bondesson_check_g(&g, j)?,
                        Err(_) => bondesson_check(&pmf_table(&spec, j + 2)?, j)?,
                    };
                    document("check-sd", json!({ "method": "bondesson", "analytic": verdict, "report": r }))
                }
                SdMethod::Residual => {
                    let r = residual_pgf(&Pgf::family(spec), a, j)?;
                    let nonnegative = r.nonnegative();
                    document(
                        "check-sd",
                        json!({ "method": "residual", "analytic": verdict, "nonnegative": nonnegative, "report": r }),
                    )
                }
            }
        }
        Cmd::Progeny { b, gamma, n_max, simulate, replicas, seed } => {
            let n = pick(n_max, cfg.n_max, 30);
            let series = offspring_series(b, gamma, n)?;
            let sign = progeny_sign_diagnosis(b, gamma, n)?;
            let mut body = json!({ "b": b, "gamma": gamma, "offspring": series, "sign_diagnosis": sign });
            if sign.is_progeny_evidence && gamma != 0.0 {
                let model = BranchingModel::extended_sibuya(b, gamma)?;
                body["mean_offspring"] = json!(model.mean_offspring);
                body["second_factorial"] = json!(model.second_factorial);
                body["criticality"] = json!(model.criticality);
                if simulate {
                    let pc = ProgenyConfig::new(pick(replicas, cfg.replicas, 100_000), pick(seed, cfg.seed, 0));
                    let emp = simulate_progeny(&model, &pc)?;
                    let spec: DistributionSpec = Family::ExtendedSibuya { b, gamma }.into();
                    let want = pmf_table(&spec, emp.probs.len().max(1) - 1)?;
                    let tv = tv_distance(&emp.probs, &want.probs);
                    body["simulation"] = json!({ "replicas": pc.replicas, "seed": pc.seed, "table": emp, "tv_distance": tv });
                }
            } else if simulate {
                return Err(Failure::Lib(Error::Unsupported(format!(
                    "b = {b}, gamma = {gamma}: the offspring series has a negative coefficient, nothing to simulate"
                ))));
            }
            document("progeny", body)
        }
        Cmd::Sample { fam, count, seed } => {
            let spec = fam.spec()?;
            let xs = sample(&spec, count, pick(seed, cfg.seed, 0))?;
            let mut s = String::with_capacity(xs.len() * 4);
            for x in xs {
                s.push_str(&x.to_string());
                s.push('\n');
            }
            Ok(s)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match Defaults::load() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.cmd, &cfg) {
        Ok(s) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(s.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
