use std::fmt::Write as _;
use std::path::Path;

use effortnet::design::{
    check_stability, design_reward_scheme, stability_lp, DesignOptions, Guarantee, StabilityMethod,
};
use effortnet::equilibrium::{
    effort_update, solve_equilibrium_fixed_point, solve_equilibrium_tree,
    uniqueness_certificate_general, uniqueness_certificate_tree, CertificateKind,
    EquilibriumResult, FixedPointOptions, SampledCertificateOptions, SolveMethod,
    UniquenessCertificate, Verdict,
};
use effortnet::welfare::{
    optimal_effort, poa, poa_bound_balanced, OptimalEffortOptions, OptimalMethod, PoaOptions,
};
use effortnet::{DirectPayoff, NetworkKind, ProductivityModel, RewardScheme};
use rayon::prelude::*;

use crate::error::CliError;
use crate::files::{load_efforts, save_network, Bundle};
use crate::format::{num, vector};

/// Solver knobs shared by all subcommands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solver {
    pub tol: f64,
    pub max_iter: usize,
    pub starts: usize,
    pub seed: u64,
    pub grid: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
            starts: 16,
            seed: 42,
            grid: 101,
        }
    }
}

impl Solver {
    pub fn check(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Usage(format!(
                "--tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 || self.starts == 0 {
            return Err(CliError::Usage(
                "--max-iter and --starts must be at least 1".into(),
            ));
        }
        if self.grid < 2 {
            return Err(CliError::Usage(format!(
                "--grid must be at least 2, got {}",
                self.grid
            )));
        }
        Ok(())
    }

    fn fixed_point(&self) -> FixedPointOptions {
        FixedPointOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            starts: self.starts,
            seed: self.seed,
            extra_starts: Vec::new(),
        }
    }

    fn optimal(&self) -> OptimalEffortOptions {
        OptimalEffortOptions {
            grid: self.grid,
            ..Default::default()
        }
    }

    fn poa(&self) -> PoaOptions {
        PoaOptions {
            optimal: self.optimal(),
            fixed_point: self.fixed_point(),
        }
    }

    fn sampled(&self) -> SampledCertificateOptions {
        SampledCertificateOptions {
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EqMethod {
    Tree,
    FixedPoint,
}

fn ep_params_or_err(bundle: &Bundle, what: &str) -> Result<(), CliError> {
    match bundle.model {
        ProductivityModel::Ep(_) => Ok(()),
        ProductivityModel::Linear => Err(CliError::Validation(format!(
            "{what} needs the ep productivity model"
        ))),
    }
}

fn payoff(bundle: &Bundle) -> DirectPayoff {
    DirectPayoff::from(&bundle.params)
}

fn tree_applies(bundle: &Bundle) -> bool {
    bundle.net.kind() == NetworkKind::Hierarchy && matches!(bundle.model, ProductivityModel::Ep(_))
}

/// The proof-grade certificate when it applies, the sampled one otherwise.
fn certificate(bundle: &Bundle, h: &RewardScheme, solver: &Solver) -> UniquenessCertificate {
    if tree_applies(bundle) {
        if let Ok(c) = uniqueness_certificate_tree(&bundle.net, &bundle.params, h) {
            return c;
        }
    }
    uniqueness_certificate_general(
        &bundle.net,
        &bundle.model,
        &payoff(bundle),
        h,
        &solver.sampled(),
    )
}

fn write_certificate(out: &mut String, prefix: &str, c: &UniquenessCertificate) {
    let kind = match c.kind {
        CertificateKind::TreeAnalytic => "tree-analytic",
        CertificateKind::SampledSpectral => "sampled-spectral (heuristic)",
    };
    let verdict = match c.verdict {
        Verdict::Unique => "unique",
        Verdict::Inconclusive => "inconclusive",
    };
    let _ = writeln!(out, "{prefix}.kind = {kind}");
    let _ = writeln!(out, "{prefix}.h_max = {}", num(c.h_max));
    let _ = writeln!(out, "{prefix}.observed = {}", num(c.observed));
    let _ = writeln!(out, "{prefix}.threshold = {}", num(c.threshold));
    let _ = writeln!(out, "{prefix}.verdict = {verdict}");
    if c.kind == CertificateKind::SampledSpectral {
        let _ = writeln!(out, "{prefix}.samples = {}", c.samples);
        if let Some(seed) = c.seed {
            let _ = writeln!(out, "{prefix}.seed = {seed}");
        }
        let _ = writeln!(out, "{prefix}.unconverged_norms = {}", c.unconverged_norms);
        if let Some(w) = &c.worst_sample {
            let _ = writeln!(out, "{prefix}.worst_sample = {}", vector(w));
        }
    }
}

fn write_scheme(out: &mut String, h: &RewardScheme) {
    let _ = writeln!(out, "h_entries = {}", h.entries().count());
    for (i, j, v) in h.entries() {
        let _ = writeln!(out, "h {} {} {}", i + 1, j + 1, num(v));
    }
}

fn optimal_method_name(m: OptimalMethod) -> &'static str {
    match m {
        OptimalMethod::ClosedFormBalanced => "closed-form-balanced",
        OptimalMethod::ClosedFormFlat => "closed-form-flat",
        OptimalMethod::BruteForce => "brute-force",
    }
}

fn solve(
    bundle: &Bundle,
    method: EqMethod,
    solver: &Solver,
) -> Result<EquilibriumResult, CliError> {
    match method {
        EqMethod::Tree => {
            ep_params_or_err(bundle, "--method tree")?;
            Ok(solve_equilibrium_tree(
                &bundle.net,
                &bundle.params,
                &bundle.h,
            )?)
        }
        EqMethod::FixedPoint => Ok(solve_equilibrium_fixed_point(
            &bundle.net,
            &bundle.model,
            &payoff(bundle),
            &bundle.h,
            &solver.fixed_point(),
        )?),
    }
}

pub fn eq(bundle: &Bundle, method: Option<EqMethod>, solver: &Solver) -> Result<String, CliError> {
    let method = method.unwrap_or(if bundle.net.kind() == NetworkKind::Hierarchy {
        EqMethod::Tree
    } else {
        EqMethod::FixedPoint
    });
    let r = solve(bundle, method, solver)?;
    let f = effort_update(&bundle.net, &bundle.model, &payoff(bundle), &bundle.h, &r.x);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "method = {}",
        match r.method {
            SolveMethod::TreeBackwardInduction => "tree",
            SolveMethod::FixedPointIteration => "fixed-point",
        }
    );
    let _ = writeln!(
        out,
        "{:>6}  {:>20}  {:>20}  {:>20}",
        "node", "x", "y", "residual"
    );
    for (i, ((x, y), fi)) in r.x.iter().zip(&r.outputs).zip(&f).enumerate() {
        let _ = writeln!(
            out,
            "{:>6}  {:>20}  {:>20}  {:>20}",
            i + 1,
            num(*x),
            num(*y),
            num((x - fi).abs())
        );
    }
    let _ = writeln!(out, "x = {}", vector(&r.x));
    let _ = writeln!(out, "social_output = {}", num(r.social_output()));
    let _ = writeln!(out, "max_residual = {}", num(r.residual));
    let _ = writeln!(out, "iterations = {}", r.iterations);
    if let Some(seed) = r.seed {
        let _ = writeln!(out, "seed = {seed}");
        let _ = writeln!(out, "failed_starts = {}", r.failed_starts);
    }
    let _ = writeln!(out, "distinct_fixed_points = {}", r.distinct_fixed_points);
    let _ = writeln!(out, "multiplicity = {}", r.multiplicity());
    for (i, alt) in r.alternatives.iter().enumerate() {
        if !alt.is_empty() {
            let _ = writeln!(out, "alternatives {} = {}", i + 1, vector(alt));
        }
    }
    write_certificate(
        &mut out,
        "certificate",
        &certificate(bundle, &bundle.h, solver),
    );
    Ok(out)
}

pub fn opt(bundle: &Bundle, solver: &Solver) -> Result<String, CliError> {
    let o = optimal_effort(&bundle.net, &bundle.model, &solver.optimal())?;
    let mut out = String::new();
    let _ = writeln!(out, "method = {}", optimal_method_name(o.method));
    if o.method == OptimalMethod::BruteForce {
        let _ = writeln!(out, "grid = {}", o.grid);
        let _ = writeln!(out, "refine_rounds = {}", o.refine_rounds);
    }
    let _ = writeln!(out, "x = {}", vector(&o.x));
    let _ = writeln!(out, "social_output = {}", num(o.social_output));
    Ok(out)
}

pub fn poa_cmd(bundle: &Bundle, solver: &Solver) -> Result<String, CliError> {
    let r = poa(
        &bundle.net,
        &bundle.model,
        &payoff(bundle),
        &bundle.h,
        &solver.poa(),
    )?;
    let mut out = String::new();
    let _ = writeln!(out, "so_equilibrium = {}", num(r.so_equilibrium));
    let _ = writeln!(out, "so_optimal = {}", num(r.so_optimal));
    let _ = writeln!(out, "poa = {}", num(r.poa));
    let _ = writeln!(out, "x_star = {}", vector(&r.x_star));
    let _ = writeln!(out, "x_opt = {}", vector(&r.x_opt));
    let _ = writeln!(
        out,
        "optimal_method = {}",
        optimal_method_name(r.optimal_method)
    );
    let _ = writeln!(out, "multiplicity = {}", r.multiplicity_note);
    Ok(out)
}

pub fn bound(d: usize, depth: usize, beta: f64) -> Result<String, CliError> {
    let r = poa_bound_balanced(d, depth, beta)?;
    let mut out = String::new();
    let _ = writeln!(out, "d = {}", r.d);
    let _ = writeln!(out, "D = {}", r.depth);
    let _ = writeln!(out, "beta = {}", num(r.beta));
    match r.xi {
        Some(xi) => {
            let _ = writeln!(out, "xi = {}", num(xi));
        }
        None => {
            let _ = writeln!(out, "xi = none");
        }
    }
    let _ = writeln!(out, "xi_near_degenerate = {}", r.xi_near_degenerate);
    let _ = writeln!(out, "t = {}", vector(&r.t));
    let _ = writeln!(out, "raw_bound = {}", num(r.raw_bound));
    let _ = writeln!(out, "bound = {}", num(r.bound));
    let _ = writeln!(out, "clamped = {}", r.clamped);
    Ok(out)
}

pub fn stable(bundle: &Bundle, efforts: &Path, lp: bool) -> Result<String, CliError> {
    ep_params_or_err(bundle, "stable")?;
    let x = load_efforts(efforts, bundle.net.node_count())?;
    let r = if lp {
        stability_lp(&bundle.net, &bundle.params, &x)?
    } else {
        check_stability(&bundle.net, &bundle.params, &x)?
    };
    let mut out = String::new();
    let method = match r.method {
        StabilityMethod::AnalyticPerNode => "analytic",
        StabilityMethod::GenericLp => "lp",
    };
    let _ = writeln!(out, "method = {method}");
    let _ = writeln!(
        out,
        "verdict = {}",
        if r.stable { "stable" } else { "INFEASIBLE" }
    );
    let _ = writeln!(
        out,
        "{:>6}  {:>11}  {:>20}  {:>20}",
        "node", "satisfiable", "output_slack", "budget_slack"
    );
    for b in &r.binding {
        let _ = writeln!(
            out,
            "{:>6}  {:>11}  {:>20}  {:>20}",
            b.node + 1,
            b.satisfiable,
            num(b.output_slack),
            num(b.budget_slack)
        );
    }
    if let Some(h) = &r.h {
        write_scheme(&mut out, h);
    }
    Ok(out)
}

fn design_options(solver: &Solver, candidates: usize) -> DesignOptions {
    DesignOptions {
        optimal: solver.optimal(),
        candidates,
        seed: solver.seed,
    }
}

pub fn design(
    bundle: &Bundle,
    solver: &Solver,
    candidates: usize,
    save: Option<&Path>,
) -> Result<String, CliError> {
    ep_params_or_err(bundle, "design")?;
    let r = design_reward_scheme(
        &bundle.net,
        &bundle.params,
        &design_options(solver, candidates),
    )?;
    let mut out = String::new();
    let guarantee = match r.guarantee {
        Guarantee::OptimalSupported => "optimal-supported".to_string(),
        Guarantee::BalancedBounded { bound } => {
            format!("balanced-bounded (bound = {})", num(bound))
        }
        Guarantee::HeuristicBestFound { candidates, seed } => {
            format!("heuristic-best-found (candidates = {candidates}, seed = {seed})")
        }
    };
    let _ = writeln!(out, "guarantee = {guarantee}");
    let _ = writeln!(out, "achieved_so = {}", num(r.achieved_so));
    let _ = writeln!(out, "so_optimal = {}", num(r.so_optimal));
    let _ = writeln!(out, "poa = {}", num(r.poa()));
    let _ = writeln!(out, "x_star = {}", vector(&r.x_star));
    let _ = writeln!(out, "x_opt = {}", vector(&r.x_opt));
    write_scheme(&mut out, &r.h);
    if let Some(path) = save {
        save_network(
            path,
            &Bundle {
                h: r.h.clone(),
                ..bundle.clone()
            },
        )?;
    }
    Ok(out)
}

pub fn check(bundle: &Bundle, solver: &Solver) -> Result<String, CliError> {
    let mut out = String::new();
    if tree_applies(bundle) {
        let c = uniqueness_certificate_tree(&bundle.net, &bundle.params, &bundle.h)?;
        write_certificate(&mut out, "tree", &c);
    } else {
        let reason = if bundle.net.kind() != NetworkKind::Hierarchy {
            "network is not a hierarchy"
        } else {
            "productivity model is not ep"
        };
        let _ = writeln!(out, "tree.kind = not applicable ({reason})");
    }
    let c = uniqueness_certificate_general(
        &bundle.net,
        &bundle.model,
        &payoff(bundle),
        &bundle.h,
        &solver.sampled(),
    );
    write_certificate(&mut out, "sampled", &c);
    Ok(out)
}

/// `lo:hi:step` with `beta_k = lo + k * step` for every `beta_k <= hi`.
pub fn parse_beta_range(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("--beta-range expects lo:hi:step, got '{s}'"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || lo < 0.0 || hi < lo || step <= 0.0
    {
        return Err(CliError::Usage(format!(
            "--beta-range needs 0 <= lo <= hi and step > 0, got '{s}'"
        )));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(CliError::Usage(format!(
            "--beta-range yields {count} rows, more than 10^6"
        )));
    }
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

struct Row {
    beta: f64,
    so_eq: f64,
    so_opt: f64,
    poa: f64,
    bound: Option<f64>,
    unique: bool,
}

fn sweep_row(
    base: &Bundle,
    beta: f64,
    fixed_h: bool,
    solver: &Solver,
    candidates: usize,
) -> Result<Row, CliError> {
    let bundle = base.with_beta(beta)?;
    let (so_eq, so_opt, h) = if fixed_h {
        let r = poa(
            &bundle.net,
            &bundle.model,
            &payoff(&bundle),
            &bundle.h,
            &solver.poa(),
        )?;
        (r.so_equilibrium, r.so_optimal, bundle.h.clone())
    } else {
        let r = design_reward_scheme(
            &bundle.net,
            &bundle.params,
            &design_options(solver, candidates),
        )?;
        (r.achieved_so, r.so_optimal, r.h)
    };
    let bound = match (
        bundle.net.balanced_shape(),
        bundle.model,
        bundle.params.mu(),
    ) {
        (Some((d, depth)), ProductivityModel::Ep(_), effortnet::Attenuation::One) => {
            Some(poa_bound_balanced(d, depth, beta)?.bound)
        }
        _ => None,
    };
    let unique = certificate(&bundle, &h, solver).verdict == Verdict::Unique;
    Ok(Row {
        beta,
        so_eq,
        so_opt,
        poa: so_opt / so_eq,
        bound,
        unique,
    })
}

pub const SWEEP_HEADER: &str = "beta,so_eq,so_opt,poa,bound,unique";

pub fn sweep(
    bundle: &Bundle,
    betas: &[f64],
    fixed_h: bool,
    solver: &Solver,
    candidates: usize,
) -> Result<String, CliError> {
    if !fixed_h {
        ep_params_or_err(bundle, "sweep without --fixed-h")?;
        if bundle.net.kind() != NetworkKind::Hierarchy {
            return Err(CliError::Validation(
                "sweep designs a scheme per beta, which needs a hierarchy; pass --fixed-h".into(),
            ));
        }
    }
    let rows: Vec<Result<Row, CliError>> = betas
        .par_iter()
        .map(|&beta| sweep_row(bundle, beta, fixed_h, solver, candidates))
        .collect();
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        let r = row?;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(r.beta),
            num(r.so_eq),
            num(r.so_opt),
            num(r.poa),
            r.bound.map(num).unwrap_or_default(),
            r.unique
        );
    }
    Ok(out)
}
