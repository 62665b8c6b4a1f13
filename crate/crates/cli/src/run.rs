//! Validation of parsed arguments and execution of the four commands.

use std::path::PathBuf;

use kgamma::certifier::{
    self, certify_claim, certify_lemma3, certify_sign_pattern_orders, ClaimId, GridSpec, Side,
};
use kgamma::identities::{self, IdentityId};
use kgamma::kcore::{Backend, Evaluator, KParams, PrecisionConfig};
use kgamma::{Error, Result};
use rayon::prelude::*;

use crate::args::{parse_grid, parse_ints, parse_reals, Command, Common, Format, Function, Params};
use crate::report::{
    certificate_record, error_record, identity_record, summarize, Combination, EvalRecord, Record,
    Report, RunConfig,
};

/// Default parameter lists of the identity grid.
pub const IDENTITY_K: [f64; 4] = [0.5, 1.0, 2.0, 3.0];
pub const IDENTITY_M: [u32; 4] = [2, 3, 4, 5];

/// Default x-grid for identity checks: 50 log-spaced points over [1e-2, 1e2].
pub fn identity_grid() -> GridSpec {
    GridSpec {
        x_min: 1e-2,
        x_max: 1e2,
        points: 50,
        anchors: Vec::new(),
        ..GridSpec::default()
    }
}

/// A validated invocation.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: RunConfig,
    pub evaluator: Evaluator,
    pub out: Option<PathBuf>,
}

fn reals(flag: &str, v: &Option<String>) -> Result<Option<Vec<f64>>> {
    v.as_deref().map(|s| parse_reals(flag, s)).transpose()
}

fn ints(flag: &str, v: &Option<String>) -> Result<Option<Vec<u32>>> {
    v.as_deref().map(|s| parse_ints(flag, s)).transpose()
}

fn require_all_positive(flag: &str, v: &[f64]) -> Result<()> {
    match v.iter().find(|&&x| x <= 0.0) {
        Some(&bad) => Err(Error::Domain {
            what: match flag {
                "x" => "x",
                "k" => "k",
                "t" => "t",
                _ => "value",
            },
            value: bad,
            requirement: "a finite value > 0",
        }),
        None => Ok(()),
    }
}

fn require_m(m: &[u32]) -> Result<()> {
    match m.iter().find(|&&v| v < 2) {
        Some(&bad) => Err(Error::Domain {
            what: "m",
            value: f64::from(bad),
            requirement: "an integer >= 2",
        }),
        None => Ok(()),
    }
}

fn evaluator(common: &Common) -> Result<Evaluator> {
    let backend: Backend = common.backend.parse()?;
    if backend == Backend::Direct {
        return Err(Error::Config(
            "backend must be reduction, series or quadrature".into(),
        ));
    }
    let precision = PrecisionConfig::for_target(common.digits)?;
    Ok(Evaluator::new(backend, precision))
}

fn base_config(command: &str, selectors: Vec<String>, ev: &Evaluator, format: Format) -> RunConfig {
    RunConfig {
        command: command.to_string(),
        selectors,
        x: Vec::new(),
        k: Vec::new(),
        m: Vec::new(),
        order: Vec::new(),
        rmax: None,
        n: Vec::new(),
        t: Vec::new(),
        grid: None,
        include_r0: false,
        backend: ev.backend,
        target_digits: ev.precision.target_digits,
        working_digits: ev.precision.working_digits,
        format,
    }
}

/// Expands claim aliases (`cor1`, `cor3`) into claim ids.
pub fn expand_claims(s: &str) -> Result<Vec<ClaimId>> {
    let mut out = Vec::new();
    for name in s.split(',').map(str::trim) {
        match name.to_ascii_lowercase().as_str() {
            "cor1" => out.extend([
                ClaimId::Cor1Lower,
                ClaimId::Cor1Upper,
                ClaimId::Cor1Reversed,
            ]),
            "cor3" => out.extend([ClaimId::Cor3Lower, ClaimId::Cor3Upper]),
            _ => out.push(name.parse()?),
        }
    }
    out.dedup();
    Ok(out)
}

/// Turns a parsed command line into a validated plan. Every numeric argument
/// is checked here, before any evaluation.
pub fn plan(command: &Command) -> Result<Plan> {
    match command {
        Command::Eval {
            function,
            params,
            common,
        } => {
            let ev = evaluator(common)?;
            let mut cfg = base_config(
                "eval",
                vec![function.name().to_string()],
                &ev,
                common.format,
            );
            cfg.x =
                reals("x", &params.x)?.ok_or_else(|| Error::Config("eval requires --x".into()))?;
            cfg.k =
                reals("k", &params.k)?.ok_or_else(|| Error::Config("eval requires --k".into()))?;
            require_all_positive("x", &cfg.x)?;
            require_all_positive("k", &cfg.k)?;
            let needs_m = matches!(
                function,
                Function::RatioF | Function::RatioG | Function::LogDerivF | Function::LogDerivInvG
            );
            let needs_order = matches!(
                function,
                Function::PolygammaK | Function::LogDerivF | Function::LogDerivInvG
            );
            if needs_m {
                cfg.m = ints("m", &params.m)?
                    .ok_or_else(|| Error::Config(format!("{} requires --m", function.name())))?;
                require_m(&cfg.m)?;
            }
            if needs_order {
                cfg.order = ints("order", &params.order)?.ok_or_else(|| {
                    Error::Config(format!("{} requires --order", function.name()))
                })?;
                if let Some(&bad) = cfg.order.iter().find(|&&r| r < 1) {
                    return Err(Error::Order {
                        order: i64::from(bad),
                        min: 1,
                    });
                }
            }
            Ok(Plan {
                config: cfg,
                evaluator: ev,
                out: common.out.clone(),
            })
        }
        Command::Identity {
            identity,
            params,
            common,
        } => {
            let ev = evaluator(common)?;
            let id: IdentityId = identity.parse()?;
            let mut cfg = base_config("identity", vec![id.name().to_string()], &ev, common.format);
            let grid = params.grid.as_deref().map(parse_grid).transpose()?;
            let explicit_x = reals("x", &params.x)?;
            match id {
                IdentityId::Lemma3 => {
                    cfg.n = ints("n", &params.n)?.unwrap_or_else(|| (1..=8).collect());
                    if let Some(&bad) = cfg.n.iter().find(|&&n| n < 1) {
                        return Err(Error::Domain {
                            what: "n",
                            value: f64::from(bad),
                            requirement: "an integer >= 1",
                        });
                    }
                    match reals("t", &params.t)? {
                        Some(t) => cfg.t = t,
                        None => cfg.grid = Some(grid.unwrap_or_else(GridSpec::lemma3_default)),
                    }
                    require_all_positive("t", &cfg.t)?;
                }
                _ => {
                    cfg.k = reals("k", &params.k)?.unwrap_or_else(|| IDENTITY_K.to_vec());
                    require_all_positive("k", &cfg.k)?;
                    let uses_m = !matches!(id, IdentityId::Recurrence | IdentityId::PowerKernel);
                    if uses_m {
                        cfg.m = ints("m", &params.m)?.unwrap_or_else(|| IDENTITY_M.to_vec());
                        require_m(&cfg.m)?;
                    }
                    match id {
                        IdentityId::PolygammaMult => {
                            cfg.order =
                                ints("order", &params.order)?.unwrap_or_else(|| vec![1, 2, 3]);
                            if let Some(&bad) = cfg.order.iter().find(|&&r| r < 1) {
                                return Err(Error::Order {
                                    order: i64::from(bad),
                                    min: 1,
                                });
                            }
                        }
                        IdentityId::PowerKernel => {
                            cfg.k.clear();
                            cfg.order =
                                ints("order", &params.order)?.unwrap_or_else(|| (0..=6).collect());
                        }
                        _ => {}
                    }
                    if id != IdentityId::EulerProduct {
                        match explicit_x {
                            Some(x) => cfg.x = x,
                            None => cfg.grid = Some(grid.unwrap_or_else(identity_grid)),
                        }
                        require_all_positive("x", &cfg.x)?;
                    }
                }
            }
            Ok(Plan {
                config: cfg,
                evaluator: ev,
                out: common.out.clone(),
            })
        }
        Command::Certify {
            claim,
            params,
            rmax,
            include_r0,
            common,
        } => certify_plan(
            "certify",
            claim,
            params,
            *rmax,
            *include_r0,
            common,
            vec![1.0],
            vec![2],
        ),
        Command::Sweep {
            claims,
            params,
            rmax,
            include_r0,
            common,
        } => certify_plan(
            "sweep",
            claims,
            params,
            *rmax,
            *include_r0,
            common,
            IDENTITY_K.to_vec(),
            IDENTITY_M.to_vec(),
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn certify_plan(
    command: &str,
    claims: &str,
    params: &Params,
    rmax: Option<u32>,
    include_r0: bool,
    common: &Common,
    default_k: Vec<f64>,
    default_m: Vec<u32>,
) -> Result<Plan> {
    let ev = evaluator(common)?;
    let ids = expand_claims(claims)?;
    let mut cfg = base_config(
        command,
        ids.iter().map(|c| c.id().to_string()).collect(),
        &ev,
        common.format,
    );
    cfg.k = reals("k", &params.k)?.unwrap_or(default_k);
    require_all_positive("k", &cfg.k)?;
    cfg.m = ints("m", &params.m)?.unwrap_or(default_m);
    require_m(&cfg.m)?;
    if ids.iter().any(|c| c.is_sign_pattern()) {
        let r = rmax.unwrap_or(6);
        if r < 1 {
            return Err(Error::Config("--rmax must be >= 1".into()));
        }
        cfg.rmax = Some(r);
        cfg.include_r0 = include_r0;
    }
    if ids.contains(&ClaimId::Lemma3) {
        cfg.n = ints("n", &params.n)?.unwrap_or_else(|| (1..=8).collect());
        if let Some(&bad) = cfg.n.iter().find(|&&n| n < 1) {
            return Err(Error::Domain {
                what: "n",
                value: f64::from(bad),
                requirement: "an integer >= 1",
            });
        }
    }
    cfg.grid = Some(match params.grid.as_deref() {
        Some(g) => parse_grid(g)?,
        None if ids.iter().all(|c| *c == ClaimId::Lemma3) => GridSpec::lemma3_default(),
        None => GridSpec::default(),
    });
    Ok(Plan {
        config: cfg,
        evaluator: ev,
        out: common.out.clone(),
    })
}

fn xs(cfg: &RunConfig) -> Vec<f64> {
    match &cfg.grid {
        Some(g) if cfg.x.is_empty() => g.points_for(1.0),
        _ => cfg.x.clone(),
    }
}

fn ts(cfg: &RunConfig) -> Vec<f64> {
    match &cfg.grid {
        Some(g) if cfg.t.is_empty() => g.points_for(1.0),
        _ => cfg.t.clone(),
    }
}

fn eval_one(
    ev: &Evaluator,
    f: Function,
    x: f64,
    k: f64,
    m: Option<u32>,
    order: Option<u32>,
) -> Result<kgamma::EvalResult> {
    let params = |m: Option<u32>, r: Option<u32>| KParams::new(k, m.unwrap_or(2), r.unwrap_or(1));
    match f {
        Function::GammaK => ev.gamma_k(x, k),
        Function::LnGammaK => ev.ln_gamma_k(x, k),
        Function::DigammaK => ev.digamma_k(x, k),
        Function::PolygammaK => ev.polygamma_k(order.unwrap_or(1), x, k),
        Function::RatioF => certifier::ratio_F(ev, x, &params(m, None)?),
        Function::RatioG => certifier::ratio_G(ev, x, &params(m, None)?),
        Function::LogDerivF => {
            certifier::log_deriv_f(ev, order.unwrap_or(1), x, &params(m, order)?)
        }
        Function::LogDerivInvG => {
            certifier::log_deriv_inv_g(ev, order.unwrap_or(1), x, &params(m, order)?)
        }
    }
}

fn run_eval(plan: &Plan) -> Vec<Record> {
    let cfg = &plan.config;
    let f = match cfg.selectors[0].as_str() {
        "gammak" => Function::GammaK,
        "lngammak" => Function::LnGammaK,
        "digammak" => Function::DigammaK,
        "polygammak" => Function::PolygammaK,
        "ratioF" => Function::RatioF,
        "ratioG" => Function::RatioG,
        "logderivF" => Function::LogDerivF,
        _ => Function::LogDerivInvG,
    };
    let ms: Vec<Option<u32>> = if cfg.m.is_empty() {
        vec![None]
    } else {
        cfg.m.iter().map(|&m| Some(m)).collect()
    };
    let orders: Vec<Option<u32>> = if cfg.order.is_empty() {
        vec![None]
    } else {
        cfg.order.iter().map(|&r| Some(r)).collect()
    };
    let mut jobs = Vec::new();
    for &k in &cfg.k {
        for &m in &ms {
            for &r in &orders {
                for &x in &cfg.x {
                    jobs.push((x, k, m, r));
                }
            }
        }
    }
    let digits = cfg.target_digits;
    jobs.par_iter()
        .map(
            |&(x, k, m, order)| match eval_one(&plan.evaluator, f, x, k, m, order) {
                Ok(r) => Record::Evaluation(EvalRecord {
                    function: f,
                    x,
                    k,
                    m,
                    order,
                    value: r.value.to_decimal(digits),
                    abs_error_bound: crate::report::fmt_bound(r.abs_error_bound),
                    backend: r.backend,
                    digits_requested: r.digits_requested,
                }),
                Err(e) => Record::Error(error_record(&e)),
            },
        )
        .collect()
}

fn run_identity(plan: &Plan) -> Vec<Record> {
    let cfg = &plan.config;
    let ev = &plan.evaluator;
    let id: IdentityId = cfg.selectors[0].parse().expect("validated identity");
    let digits = cfg.target_digits;
    let mut jobs: Vec<Box<dyn Fn() -> Result<identities::IdentityOutcome> + Send + Sync>> =
        Vec::new();
    match id {
        IdentityId::Lemma3 => {
            for &n in &cfg.n {
                for t in ts(cfg) {
                    let p = ev.precision;
                    jobs.push(Box::new(move || identities::check_lemma3(&p, n, t)));
                }
            }
        }
        IdentityId::EulerProduct => {
            for &k in &cfg.k {
                for &m in &cfg.m {
                    let ev = *ev;
                    jobs.push(Box::new(move || identities::check_euler_product(&ev, k, m)));
                }
            }
        }
        IdentityId::PowerKernel => {
            for &r in &cfg.order {
                for x in xs(cfg) {
                    let ev = *ev;
                    jobs.push(Box::new(move || identities::check_power_kernel(&ev, r, x)));
                }
            }
        }
        IdentityId::Recurrence => {
            for &k in &cfg.k {
                for x in xs(cfg) {
                    let ev = *ev;
                    jobs.push(Box::new(move || identities::check_recurrence(&ev, x, k)));
                }
            }
        }
        IdentityId::GaussMult | IdentityId::DigammaMult => {
            for &k in &cfg.k {
                for &m in &cfg.m {
                    for x in xs(cfg) {
                        let ev = *ev;
                        jobs.push(Box::new(move || {
                            if id == IdentityId::GaussMult {
                                identities::check_gauss_multiplication(&ev, x, k, m)
                            } else {
                                identities::check_digamma_multiplication(&ev, x, k, m)
                            }
                        }));
                    }
                }
            }
        }
        IdentityId::PolygammaMult => {
            for &r in &cfg.order {
                for &k in &cfg.k {
                    for &m in &cfg.m {
                        for x in xs(cfg) {
                            let ev = *ev;
                            jobs.push(Box::new(move || {
                                identities::check_polygamma_multiplication(&ev, r, x, k, m)
                            }));
                        }
                    }
                }
            }
        }
    }
    jobs.par_iter()
        .map(|job| match job() {
            Ok(o) => Record::Identity(identity_record(&o, digits)),
            Err(e) => Record::Error(error_record(&e)),
        })
        .collect()
}

fn run_certify(plan: &Plan) -> (Vec<Record>, Vec<Combination>) {
    let cfg = &plan.config;
    let ev = &plan.evaluator;
    let grid = cfg.grid.clone().expect("certify plans carry a grid");
    let digits = cfg.target_digits;
    let mut results = Vec::new();
    let mut combos = Vec::new();
    let claims: Vec<ClaimId> = cfg
        .selectors
        .iter()
        .map(|s| s.parse().expect("validated claim"))
        .collect();
    for claim in claims {
        let mut push = |k: f64, m: u32, records: Vec<Record>| {
            combos.push(Combination {
                claim_id: claim.id().to_string(),
                k,
                m,
                summary: summarize(&records),
            });
            results.extend(records);
        };
        if claim == ClaimId::Lemma3 {
            for &n in &cfg.n {
                let rec = match certify_lemma3(&ev.precision, n, &grid) {
                    Ok(c) => Record::Certificate(certificate_record(&c, digits)),
                    Err(e) => Record::Error(error_record(&e)),
                };
                push(1.0, n + 1, vec![rec]);
            }
            continue;
        }
        for &k in &cfg.k {
            for &m in &cfg.m {
                let params = match KParams::new(k, m, 1) {
                    Ok(p) => p,
                    Err(e) => {
                        push(k, m, vec![Record::Error(error_record(&e))]);
                        continue;
                    }
                };
                let records = if claim.is_sign_pattern() {
                    let first = if cfg.include_r0 { 0 } else { 1 };
                    let rmax = cfg.rmax.unwrap_or(6);
                    match certify_sign_pattern_orders(ev, claim, &params, first..=rmax, &grid) {
                        Ok(cs) => cs
                            .iter()
                            .map(|c| Record::Certificate(certificate_record(c, digits)))
                            .collect(),
                        Err(e) => vec![Record::Error(error_record(&e))],
                    }
                } else {
                    // Corollary 1 grids are split at x = k automatically
                    let g = match claim.side() {
                        Side::All => grid.clone(),
                        side => grid.restricted(side),
                    };
                    match certify_claim(ev, claim, &params, &g) {
                        Ok(c) => vec![Record::Certificate(certificate_record(&c, digits))],
                        Err(e) => vec![Record::Error(error_record(&e))],
                    }
                };
                push(k, m, records);
            }
        }
    }
    (results, combos)
}

/// Executes a validated plan.
pub fn execute(plan: &Plan) -> Report {
    let (results, combos) = match plan.config.command.as_str() {
        "eval" => (run_eval(plan), Vec::new()),
        "identity" => (run_identity(plan), Vec::new()),
        "certify" => (run_certify(plan).0, Vec::new()),
        _ => run_certify(plan),
    };
    Report::new(Some(plan.config.clone()), results, combos)
}

/// Plans and executes; a planning error becomes a report with exit code 3.
pub fn run_command(command: &Command) -> (Report, Option<PathBuf>, Format) {
    let format = match command {
        Command::Eval { common, .. }
        | Command::Identity { common, .. }
        | Command::Certify { common, .. }
        | Command::Sweep { common, .. } => (common.format, common.out.clone()),
    };
    match plan(command) {
        Ok(p) => {
            let report = execute(&p);
            (report, p.out, p.config.format)
        }
        Err(e) => (
            Report::new(None, vec![Record::Error(error_record(&e))], Vec::new()),
            format.1,
            format.0,
        ),
    }
}
