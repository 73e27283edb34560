//! Seeded experiment subcommands. Parameters come from flags, a JSON
//! `--config` file with the same field names, or defaults, in that order.
//! Task `k` of a run draws from `split_seed(seed, k)`, so rows do not depend
//! on the thread count.

use std::path::{Path, PathBuf};

use buymany::coretail::decomposition_report;
use buymany::demand::{revenue, revenue_by_type};
use buymany::gen::{gen_hart_nisan, random_pricing, random_product};
use buymany::io::{DemandFile, PricingFile};
use buymany::lattice::ToleranceConfig;
use buymany::lowerbound::{
    build_additive_instance, build_singleminded_instance, gap_report, gen_desk_matroid_spec, gen_set_system,
    sample_beta, BetaVector, GapConfig, InstanceMode, SetSystemParams,
};
use buymany::rng::{split_seed, task_rng};
use buymany::simple_opt::{brev_exact, srev_grid};
use buymany::ItemUniverse;
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;

use crate::output::{num, opt, Table};
use crate::{read_json, Failure};

fn tol() -> ToleranceConfig<f64> {
    ToleranceConfig::default()
}

/// Fills every unset field of `flags` from `config`.
macro_rules! merge {
    ($flags:expr, $config:expr; $($field:ident),+) => {
        $( if $flags.$field.is_none() { $flags.$field = $config.$field; } )+
    };
}

fn load_config<C: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<C, Failure> {
    match path {
        Some(p) => read_json(p),
        None => Ok(C::default()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Cover,
    Matroid,
    Additive,
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LowerboundArgs {
    /// Items [default: 48].
    #[arg(long)]
    pub n: Option<usize>,
    /// Sets, one buyer type each [default: 24].
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n_sets: Option<usize>,
    /// Set size [default: 6].
    #[arg(long)]
    pub d: Option<usize>,
    /// Largest pairwise intersection [default: 1].
    #[arg(long)]
    pub t: Option<usize>,
    /// Value levels `b_min·2^k`, `k < m` [default: 6].
    #[arg(long)]
    pub m: Option<u32>,
    /// Smallest value [default: 4].
    #[arg(long)]
    pub bmin: Option<u64>,
    /// Value draws [default: 20].
    #[arg(long)]
    pub samples: Option<u64>,
    /// Root seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Completion of the set values [default: cover].
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Largeness depth of generated matroid specs [default: 2].
    #[arg(long)]
    pub tau: Option<usize>,
    /// Price levels per item for the item-pricing grid search [default: 8].
    #[arg(long)]
    pub levels: Option<usize>,
    /// Grid-search restarts [default: 1].
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Scaled extensions `2^-j q` for `j <= scale_steps` [default: 8].
    #[arg(long)]
    pub scale_steps: Option<u32>,
    /// Set-system draw budget [default: 1000000].
    #[arg(long)]
    pub max_tries: Option<usize>,
    /// JSON file with any of the fields above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

const LOWERBOUND_HEADER: &[&str] = &[
    "sample",
    "seed",
    "n",
    "N",
    "m",
    "mode",
    "rev_p",
    "target_revenue",
    "identity",
    "undercut",
    "expected_price",
    "brev",
    "brev_target",
    "brev_induced",
    "srev",
    "srev_exact",
    "srev_grid",
    "best_scaled",
    "ratio_brev",
    "ratio_brev_target",
    "ratio_brev_induced",
    "ratio_srev",
    "ratio_scaled",
    "afb_brev_induced",
    "afb_srev_grid",
    "afb_best_scaled",
];

pub fn lowerbound(mut a: LowerboundArgs, out: Option<&Path>) -> Result<(), Failure> {
    let cfg: LowerboundArgs = load_config(a.config.as_deref())?;
    merge!(a, cfg; n, n_sets, d, t, m, bmin, samples, seed, mode, tau, levels, restarts, scale_steps, max_tries);
    let n = a.n.unwrap_or(48);
    let n_sets = a.n_sets.unwrap_or(24);
    let m = a.m.unwrap_or(6);
    let bmin = a.bmin.unwrap_or(4);
    let seed = a.seed.unwrap_or(0);
    let mode = a.mode.unwrap_or(ModeArg::Cover);
    let tau = a.tau.unwrap_or(2);
    let gap = GapConfig {
        grid_levels: a.levels.unwrap_or(8),
        grid_restarts: a.restarts.unwrap_or(1),
        grid_seed: 0,
        scale_steps: a.scale_steps.unwrap_or(8),
    };
    let universe = ItemUniverse::new(n)?;
    let sets = match mode {
        ModeArg::Matroid => Vec::new(),
        _ => {
            let params = SetSystemParams {
                n,
                n_sets,
                d: a.d.unwrap_or(6),
                t: a.t.unwrap_or(1),
                max_tries: a.max_tries.unwrap_or(1_000_000),
            };
            gen_set_system(&params, split_seed(seed, 0))?
        }
    };
    let tol = tol();
    let rows = (0..a.samples.unwrap_or(20))
        .into_par_iter()
        .map(|sample| -> Result<Vec<String>, Failure> {
            let task = split_seed(seed, 1 + sample);
            let inst = match mode {
                ModeArg::Cover => {
                    let beta = sample_beta(n_sets, m, bmin, task)?;
                    build_singleminded_instance(universe, &sets, &beta, InstanceMode::Cover, None, &tol)?
                }
                ModeArg::Additive => {
                    let beta = sample_beta(n_sets, m, bmin, task)?;
                    build_additive_instance(universe, &sets, &beta, &tol)?
                }
                ModeArg::Matroid => {
                    let spec = gen_desk_matroid_spec(n, n_sets, tau, task)?;
                    let beta = BetaVector {
                        values: spec.b.clone(),
                        b_min: spec.b.iter().copied().min().unwrap_or(0),
                        m,
                    };
                    let sets = spec.sets.clone();
                    build_singleminded_instance(universe, &sets, &beta, InstanceMode::Matroid, Some(&spec), &tol)?
                }
            };
            let r = gap_report(&inst, &GapConfig { grid_seed: task, ..gap }, &tol)?;
            // payments are multiples of 1/2, so the sums are exact
            let paid: f64 = revenue_by_type(&inst.d, &inst.p, &tol).iter().sum();
            let owed = inst.beta.values.iter().sum::<u64>() as f64 / 2.0;
            let srev = r.srev_exact.unwrap_or(r.srev_grid).max(r.srev_grid);
            Ok(vec![
                sample.to_string(),
                task.to_string(),
                n.to_string(),
                n_sets.to_string(),
                m.to_string(),
                inst.mode.name().to_string(),
                num(r.rev_p),
                num(r.target_revenue),
                (paid == owed).to_string(),
                inst.undercut.len().to_string(),
                num(r.expected_price),
                num(r.brev),
                num(r.brev_target),
                num(r.brev_induced),
                num(srev),
                opt(r.srev_exact),
                num(r.srev_grid),
                num(r.best_scaled),
                num(r.ratio_brev),
                num(r.ratio_brev_target),
                num(r.ratio_brev_induced),
                num(r.ratio_srev),
                num(r.ratio_scaled),
                num(r.afb_brev_induced),
                num(r.afb_srev_grid),
                num(r.afb_best_scaled),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(LOWERBOUND_HEADER);
    for row in rows {
        t.push(row);
    }
    t.write(out)
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoretailArgs {
    /// Items [default: 6].
    #[arg(long)]
    pub n: Option<usize>,
    /// Random instances [default: 20].
    #[arg(long)]
    pub samples: Option<u64>,
    /// Root seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest base price of the random pricings [default: 20].
    #[arg(long)]
    pub max_price: Option<u32>,
    /// Analyze this pricing instead of random ones (needs --demand).
    #[arg(long, requires = "demand")]
    pub pricing: Option<PathBuf>,
    /// Product demand for --pricing.
    #[arg(long, requires = "pricing")]
    pub demand: Option<PathBuf>,
    /// JSON file with any of the fields above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

const CORETAIL_HEADER: &[&str] = &[
    "sample",
    "n",
    "seed",
    "rev",
    "e_tail",
    "e_core",
    "a",
    "c",
    "brev",
    "tail_srev",
    "ratio",
    "regime",
    "hit_probability",
    "violations",
];

pub fn coretail(mut a: CoretailArgs, out: Option<&Path>) -> Result<(), Failure> {
    let cfg: CoretailArgs = load_config(a.config.as_deref())?;
    merge!(a, cfg; n, samples, seed, max_price, pricing, demand);
    let seed = a.seed.unwrap_or(0);
    let tol = tol();
    let instances: Vec<(u64, u64, _, _)> = match (&a.pricing, &a.demand) {
        (Some(pp), Some(dp)) => {
            let p = read_json::<PricingFile>(pp)?.build::<f64>()?;
            let pi = read_json::<DemandFile>(dp)?.build::<f64>()?;
            vec![(0, seed, p, pi)]
        }
        (None, None) => {
            let universe = ItemUniverse::new(a.n.unwrap_or(6))?;
            universe.require_enumerable()?;
            let max_price = a.max_price.unwrap_or(20);
            (0..a.samples.unwrap_or(20))
                .map(|s| {
                    let task = split_seed(seed, s);
                    let mut rng = task_rng(task, 0);
                    let p = random_pricing::<f64, _>(universe, max_price, &mut rng)?;
                    let pi = random_product::<f64, _>(universe, &mut rng)?;
                    Ok((s, task, p, pi))
                })
                .collect::<Result<_, Failure>>()?
        }
        _ => return Err(Failure::invalid("--pricing and --demand go together")),
    };
    let rows = instances
        .par_iter()
        .map(|(sample, task, p, pi)| -> Result<(Vec<String>, Vec<&'static str>), Failure> {
            let r = decomposition_report(p, pi, &tol)?;
            let violations = r.violations(tol.eps_report);
            let row = vec![
                sample.to_string(),
                p.universe().n().to_string(),
                task.to_string(),
                num(r.rev),
                num(r.e_tail),
                num(r.e_core),
                num(r.a),
                num(r.c),
                num(r.brev),
                num(r.tail_srev),
                num(r.ratio),
                r.split.regime.name().to_string(),
                num(r.hit_probability),
                violations.join(" "),
            ];
            Ok((row, violations))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(CORETAIL_HEADER);
    let mut violated = Vec::new();
    for (k, (row, v)) in rows.into_iter().enumerate() {
        if !v.is_empty() {
            violated.push(format!("sample {k}: {}", v.join(", ")));
        }
        t.push(row);
    }
    t.write(out)?;
    if violated.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violated(violated))
    }
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HartnisanArgs {
    /// Items, 2 to 8 [default: 2].
    #[arg(long)]
    pub n: Option<usize>,
    /// Price levels per item for the item-pricing grid search [default: 16].
    #[arg(long)]
    pub levels: Option<usize>,
    /// Grid-search restarts [default: 4].
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Root seed of the restarts [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON file with any of the fields above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

pub fn hartnisan(mut a: HartnisanArgs, out: Option<&Path>) -> Result<(), Failure> {
    let cfg: HartnisanArgs = load_config(a.config.as_deref())?;
    merge!(a, cfg; n, levels, restarts, seed);
    let n = a.n.unwrap_or(2);
    let tol = tol();
    let hn = gen_hart_nisan::<f64>(n)?;
    let value = hn.d.expected_grand_value();
    let raw = revenue(&hn.d, &hn.raw, &tol);
    let families = [
        ("raw", raw),
        ("closure", revenue(&hn.d, &hn.closure, &tol)),
        ("bundle", brev_exact(&hn.d, &tol)?.value),
        (
            "item",
            srev_grid(&hn.d, a.levels.unwrap_or(16), a.restarts.unwrap_or(4), a.seed.unwrap_or(0), &tol)?.value,
        ),
    ];
    let mut t = Table::new(&["n", "family", "rev", "expected_value", "share", "raw_over_rev"]);
    for (name, rev) in families {
        let gap = if rev > 0.0 { raw / rev } else { f64::INFINITY };
        t.push(vec![n.to_string(), name.into(), num(rev), num(value), num(rev / value), num(gap)]);
    }
    t.write(out)
}
