//! Subcommands that read a JSON document.

use std::path::{Path, PathBuf};

use buymany::demand::{best_response, revenue as expected_revenue};
use buymany::io::{InstanceFile, MenuFile, OptionsFile, PricingFile};
use buymany::lattice::{
    additive_extension, buy_many_closure, check_deterministic_sybil_proof, PricingForm, ToleranceConfig, Violation,
};
use buymany::lottery::{adaptive_acquisition_cost, dominates, lottery_item_floor, multiset_plan};
use buymany::scaling::{
    combined_bound_check, combined_bound_margins, expected_scaled_revenue, scaled_bound_check,
    scaled_bound_margins, ScaleDistribution, MAX_COMBINED_ITEMS,
};
use buymany::simple_opt::{brev_exact, srev_exact_singleminded, srev_grid, MAX_EXACT_SUPPORT};
use buymany::Error;
use clap::Args;

use crate::output::{num, opt, parse_set, set, Table};
use crate::{read_json, Failure};

fn tol() -> ToleranceConfig<f64> {
    ToleranceConfig::default()
}

fn flag(b: bool) -> String {
    b.to_string()
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Pricing document.
    pub pricing: PathBuf,
    /// Violating pairs to list.
    #[arg(long, default_value_t = 16)]
    pub max_witnesses: usize,
}

pub fn verify(a: &VerifyArgs, out: Option<&Path>) -> Result<(), Failure> {
    let p = read_json::<PricingFile>(&a.pricing)?.build::<f64>()?;
    let check = check_deterministic_sybil_proof(&p, &tol(), a.max_witnesses)?;
    let mut t = Table::new(&["monotone", "subadditive", "partial", "witness", "first", "second"]);
    let base = || vec![flag(check.monotone), flag(check.subadditive), flag(check.partial)];
    if check.witnesses.is_empty() {
        let mut row = base();
        row.extend([String::new(), String::new(), String::new()]);
        t.push(row);
    }
    for w in &check.witnesses {
        let kind = match w.kind {
            Violation::Monotone => "monotone",
            Violation::Subadditive => "subadditive",
        };
        let mut row = base();
        row.extend([kind.to_string(), set(w.first), set(w.second)]);
        t.push(row);
    }
    t.write(out)?;
    eprintln!("monotone: {}", check.monotone);
    eprintln!("subadditive: {}", check.subadditive);
    eprintln!("partial: {}", check.partial);
    Ok(())
}

#[derive(Args, Debug)]
pub struct ClosureArgs {
    /// Set-offer list.
    pub options: PathBuf,
}

pub fn closure(a: &ClosureArgs, out: Option<&Path>) -> Result<(), Failure> {
    let (universe, options) = read_json::<OptionsFile>(&a.options)?.build::<f64>()?;
    let table = buy_many_closure(&options, universe)?.table()?;
    let mut t = Table::new(&["set", "price"]);
    for s in universe.subsets() {
        t.push(vec![set(s), num(table[s.bits() as usize])]);
    }
    t.write(out)
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Price levels per item for the item-pricing grid search.
    #[arg(long, default_value_t = 16)]
    pub levels: usize,
    /// Grid-search restarts.
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    /// Root seed of the restarts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct RevenueArgs {
    /// Instance document (pricing plus buyer distribution).
    pub instance: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
}

pub fn revenue(a: &RevenueArgs, out: Option<&Path>) -> Result<(), Failure> {
    let tol = tol();
    let (p, d) = read_json::<InstanceFile>(&a.instance)?.build::<f64>()?;
    let rev = expected_revenue(&d, &p, &tol);
    let (srev, method) = if d.all_single_minded() && d.len() <= MAX_EXACT_SUPPORT {
        (srev_exact_singleminded(&d, &tol)?.value, "exact")
    } else {
        let g = srev_grid(&d, a.grid.levels, a.grid.restarts, a.grid.seed, &tol)?;
        (g.value, "grid")
    };
    let brev = brev_exact(&d, &tol)?;
    let brev_price = match brev.best_pricing.form() {
        PricingForm::Bundle(x) => *x,
        _ => 0.0,
    };
    let mut t = Table::new(&["rev", "srev", "srev_method", "brev", "brev_price", "expected_grand_value"]);
    t.push(vec![
        num(rev),
        num(srev),
        method.into(),
        num(brev.value),
        num(brev_price),
        num(d.expected_grand_value()),
    ]);
    t.write(out)
}

#[derive(Args, Debug)]
pub struct ScaleArgs {
    /// Instance document (pricing plus buyer distribution).
    pub instance: PathBuf,
    /// Lower end of the scale range for the per-type scaled revenue;
    /// defaults to 1/(2c) with c the pointwise factor.
    #[arg(long)]
    pub lo: Option<f64>,
    /// Upper end of the scale range; defaults to 1.
    #[arg(long)]
    pub hi: Option<f64>,
    /// Largest exponent of the uniform item pricings.
    #[arg(long, default_value_t = 64)]
    pub a_max: u32,
    /// Evaluate the bounds even if the pricing is not monotone and
    /// subadditive (they may then fail).
    #[arg(long)]
    pub allow_non_sybil: bool,
}

pub fn scale(a: &ScaleArgs, out: Option<&Path>) -> Result<(), Failure> {
    let tol = tol();
    let (p, d) = read_json::<InstanceFile>(&a.instance)?.build::<f64>()?;
    let q = additive_extension(&p)?;
    let bound = if a.allow_non_sybil {
        scaled_bound_margins(&p, &d, &tol)?
    } else {
        scaled_bound_check(&p, &d, &tol)?
    };
    let combined = if p.universe().n() > MAX_COMBINED_ITEMS {
        None
    } else if a.allow_non_sybil {
        Some(combined_bound_margins(&p, &d, a.a_max, &tol)?)
    } else {
        Some(combined_bound_check(&p, &d, a.a_max, &tol)?)
    };
    let sd = ScaleDistribution::new(a.lo.unwrap_or(bound.scale.lo), a.hi.unwrap_or(bound.scale.hi))?;
    let mut t = Table::new(&[
        "type",
        "weight",
        "kind",
        "paid",
        "scale_lo",
        "scale_hi",
        "scaled_revenue",
        "utility_drop",
        "bound_c",
        "bound_lhs",
        "bound_rhs",
        "bound_margin",
        "combined_lhs",
        "combined_target",
        "combined_margin",
    ]);
    let mut violated = Vec::new();
    for (k, (w, v)) in d.support().iter().enumerate() {
        let r = expected_scaled_revenue(v, &q, &sd)?;
        let drop = r.utility_drop_bound(&sd);
        if (r.value - drop).abs() > tol.eps_report {
            violated.push(format!("type {k}: scaled revenue {} != utility drop {}", num(r.value), num(drop)));
        }
        let rowb = bound.rows[k];
        if rowb.margin < -tol.eps_report {
            violated.push(format!("type {k}: scaled bound margin {}", num(rowb.margin)));
        }
        let rowc = combined.as_ref().map(|c| c.rows[k]);
        if let Some(rc) = rowc {
            if rc.margin < -tol.eps_report {
                violated.push(format!("type {k}: combined bound margin {}", num(rc.margin)));
            }
        }
        t.push(vec![
            k.to_string(),
            num(*w),
            v.kind_name().into(),
            num(best_response(v, &p, &tol).price_paid),
            num(sd.lo),
            num(sd.hi),
            num(r.value),
            num(drop),
            num(bound.c),
            num(rowb.lhs),
            num(rowb.rhs),
            num(rowb.margin),
            opt(rowc.map(|r| r.lhs)),
            opt(rowc.map(|r| r.target)),
            opt(rowc.map(|r| r.margin)),
        ]);
    }
    t.write(out)?;
    if violated.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violated(violated))
    }
}

#[derive(Args, Debug)]
pub struct LotteryArgs {
    /// Lottery menu document.
    pub menu: PathBuf,
    /// Set to acquire, e.g. `0,2,3`.
    #[arg(long)]
    pub target: String,
    /// Also price the non-adaptive plan buying this many copies.
    #[arg(long)]
    pub copies: Option<u32>,
}

pub fn lottery(a: &LotteryArgs, out: Option<&Path>) -> Result<(), Failure> {
    let menu = read_json::<MenuFile>(&a.menu)?.build::<f64>()?;
    let target = parse_set(&a.target, menu.universe().n())?;
    let mut t = Table::new(&["record", "first", "second", "value"]);
    let floors = lottery_item_floor(&menu);
    for (i, (&price, arg)) in floors.prices.iter().zip(&floors.argmin).enumerate() {
        t.push(vec![
            "floor".into(),
            i.to_string(),
            arg.map(|k| k.to_string()).unwrap_or_default(),
            num(price),
        ]);
    }
    let cost = match adaptive_acquisition_cost(&menu, target) {
        Ok(c) => c,
        Err(Error::Unreachable { .. }) => f64::INFINITY,
        Err(e) => return Err(e.into()),
    };
    t.push(vec!["adaptive_cost".into(), set(target), String::new(), num(cost)]);
    if let Some(m) = a.copies {
        let cost = match multiset_plan(&menu, target, m) {
            Ok(plan) => plan.cost,
            Err(Error::Unreachable { .. }) => f64::INFINITY,
            Err(e) => return Err(e.into()),
        };
        t.push(vec!["multiset_cost".into(), set(target), m.to_string(), num(cost)]);
    }
    let options = menu.options();
    for (i, (x, _)) in options.iter().enumerate() {
        for (j, (y, _)) in options.iter().enumerate() {
            if i != j {
                t.push(vec!["dominates".into(), i.to_string(), j.to_string(), flag(dominates(x, y))]);
            }
        }
    }
    t.write(out)
}
