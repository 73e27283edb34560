//! JSON documents for pricings, valuations, instances, option lists,
//! demand distributions and lottery menus. Field names are listed in
//! `docs/schema.md`.
//!
//! Sets are sorted arrays of item indices. Explicit tables are indexed by
//! bitset, and `null` stands for an unavailable set (infinite price).

use serde::{Deserialize, Serialize};

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::lattice::{Pricing, PricingForm, Valuation, ValuationDistribution, ValuationForm};
use crate::lottery::{Lottery, LotteryMenu};
use crate::scalar::Scalar;
use crate::subset::{ItemUniverse, Subset};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetPrice {
    pub set: Subset,
    pub price: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PricingDoc {
    Explicit { table: Vec<Option<f64>> },
    Item { prices: Vec<f64> },
    Bundle { price: f64 },
    Cover { options: Vec<SetPrice> },
    Scaled { factor: f64, inner: Box<PricingDoc> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValuationDoc {
    Explicit { table: Vec<f64> },
    Additive { values: Vec<f64> },
    SingleMinded { set: Subset, value: f64 },
    UnitDemand { values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricingFile {
    pub n: usize,
    pub pricing: PricingDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedValuation {
    pub weight: f64,
    pub valuation: ValuationDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub pricing: PricingDoc,
    /// Weights must sum to 1.
    pub distribution: Vec<WeightedValuation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionsFile {
    pub n: usize,
    pub options: Vec<SetPrice>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub p: f64,
    pub set: Subset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DemandDoc {
    Explicit { outcomes: Vec<Outcome> },
    Product { marginals: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemandFile {
    pub n: usize,
    pub demand: DemandDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MenuOption {
    pub price: f64,
    pub outcomes: Vec<Outcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MenuFile {
    pub n: usize,
    pub options: Vec<MenuOption>,
}

fn of<T: Scalar>(xs: &[f64]) -> Vec<T> {
    xs.iter().map(|&x| T::of(x)).collect()
}

fn lossy<T: Scalar>(xs: &[T]) -> Vec<f64> {
    xs.iter().map(|x| x.to_f64_lossy()).collect()
}

fn checked_set(universe: ItemUniverse, s: Subset) -> Result<Subset> {
    universe.check(s)?;
    Ok(s)
}

fn set_prices<T: Scalar>(universe: ItemUniverse, xs: &[SetPrice]) -> Result<Vec<(Subset, T)>> {
    xs.iter()
        .map(|o| Ok((checked_set(universe, o.set)?, T::of(o.price))))
        .collect()
}

impl PricingDoc {
    pub fn build<T: Scalar>(&self, universe: ItemUniverse) -> Result<Pricing<T>> {
        match self {
            Self::Explicit { table } => Pricing::explicit(
                universe,
                table
                    .iter()
                    .map(|x| x.map_or(T::infinity(), T::of))
                    .collect(),
            ),
            Self::Item { prices } => Pricing::item(universe, of(prices)),
            Self::Bundle { price } => Pricing::bundle(universe, T::of(*price)),
            Self::Cover { options } => Pricing::cover(universe, set_prices(universe, options)?),
            Self::Scaled { factor, inner } => Pricing::scaled(T::of(*factor), inner.build(universe)?),
        }
    }

    pub fn from_pricing<T: Scalar>(p: &Pricing<T>) -> Self {
        match p.form() {
            PricingForm::Explicit(table) => Self::Explicit {
                table: table
                    .iter()
                    .map(|x| x.is_finite().then(|| x.to_f64_lossy()))
                    .collect(),
            },
            PricingForm::Item(prices) => Self::Item { prices: lossy(prices) },
            PricingForm::Bundle(price) => Self::Bundle {
                price: price.to_f64_lossy(),
            },
            PricingForm::Cover(c) => Self::Cover {
                options: c
                    .options()
                    .iter()
                    .map(|&(set, x)| SetPrice {
                        set,
                        price: x.to_f64_lossy(),
                    })
                    .collect(),
            },
            PricingForm::Scaled { factor, inner } => Self::Scaled {
                factor: factor.to_f64_lossy(),
                inner: Box::new(Self::from_pricing(inner)),
            },
        }
    }
}

impl ValuationDoc {
    pub fn build<T: Scalar>(&self, universe: ItemUniverse) -> Result<Valuation<T>> {
        match self {
            Self::Explicit { table } => Valuation::explicit(universe, of(table)),
            Self::Additive { values } => Valuation::additive(universe, of(values)),
            Self::SingleMinded { set, value } => {
                Valuation::single_minded(universe, checked_set(universe, *set)?, T::of(*value))
            }
            Self::UnitDemand { values } => Valuation::unit_demand(universe, of(values)),
        }
    }

    pub fn from_valuation<T: Scalar>(v: &Valuation<T>) -> Self {
        match v.form() {
            ValuationForm::Explicit(t) => Self::Explicit { table: lossy(t) },
            ValuationForm::Additive(x) => Self::Additive { values: lossy(x) },
            ValuationForm::SingleMinded { set, value } => Self::SingleMinded {
                set: *set,
                value: value.to_f64_lossy(),
            },
            ValuationForm::UnitDemand(x) => Self::UnitDemand { values: lossy(x) },
        }
    }
}

impl PricingFile {
    pub fn build<T: Scalar>(&self) -> Result<Pricing<T>> {
        self.pricing.build(ItemUniverse::new(self.n)?)
    }

    pub fn from_pricing<T: Scalar>(p: &Pricing<T>) -> Self {
        Self {
            n: p.universe().n(),
            pricing: PricingDoc::from_pricing(p),
        }
    }
}

impl InstanceFile {
    pub fn build<T: Scalar>(&self) -> Result<(Pricing<T>, ValuationDistribution<T>)> {
        let universe = ItemUniverse::new(self.n)?;
        let p = self.pricing.build(universe)?;
        let d = ValuationDistribution::new(
            self.distribution
                .iter()
                .map(|t| Ok((T::of(t.weight), t.valuation.build(universe)?)))
                .collect::<Result<Vec<_>>>()?,
        )?;
        Ok((p, d))
    }

    pub fn from_parts<T: Scalar>(p: &Pricing<T>, d: &ValuationDistribution<T>) -> Self {
        Self {
            n: p.universe().n(),
            pricing: PricingDoc::from_pricing(p),
            distribution: d
                .support()
                .iter()
                .map(|(w, v)| WeightedValuation {
                    weight: w.to_f64_lossy(),
                    valuation: ValuationDoc::from_valuation(v),
                })
                .collect(),
        }
    }
}

impl OptionsFile {
    pub fn build<T: Scalar>(&self) -> Result<(ItemUniverse, Vec<(Subset, T)>)> {
        let universe = ItemUniverse::new(self.n)?;
        Ok((universe, set_prices(universe, &self.options)?))
    }
}

fn outcomes<T: Scalar>(universe: ItemUniverse, xs: &[Outcome]) -> Result<Vec<(T, Subset)>> {
    xs.iter()
        .map(|o| Ok((T::of(o.p), checked_set(universe, o.set)?)))
        .collect()
}

fn outcome_docs<T: Scalar>(xs: &[(T, Subset)]) -> Vec<Outcome> {
    xs.iter()
        .map(|&(p, set)| Outcome {
            p: p.to_f64_lossy(),
            set,
        })
        .collect()
}

impl DemandFile {
    pub fn build<T: Scalar>(&self) -> Result<DemandDistribution<T>> {
        let universe = ItemUniverse::new(self.n)?;
        match &self.demand {
            DemandDoc::Explicit { outcomes: xs } => DemandDistribution::explicit(universe, outcomes(universe, xs)?),
            DemandDoc::Product { marginals } => DemandDistribution::product(universe, of(marginals)),
        }
    }

    pub fn from_demand<T: Scalar>(d: &DemandDistribution<T>) -> Self {
        let demand = match d {
            DemandDistribution::Explicit { outcomes, .. } => DemandDoc::Explicit {
                outcomes: outcome_docs(outcomes),
            },
            DemandDistribution::ProductMarginals { marginals, .. } => DemandDoc::Product {
                marginals: lossy(marginals),
            },
        };
        Self {
            n: d.universe().n(),
            demand,
        }
    }
}

impl MenuFile {
    pub fn build<T: Scalar>(&self) -> Result<LotteryMenu<T>> {
        let universe = ItemUniverse::new(self.n)?;
        let options = self
            .options
            .iter()
            .map(|o| Ok((Lottery::new(universe, outcomes(universe, &o.outcomes)?)?, T::of(o.price))))
            .collect::<Result<Vec<_>>>()?;
        LotteryMenu::new(universe, options)
    }

    pub fn from_menu<T: Scalar>(m: &LotteryMenu<T>) -> Self {
        Self {
            n: m.universe().n(),
            options: m
                .options()
                .iter()
                .map(|(l, price)| MenuOption {
                    price: price.to_f64_lossy(),
                    outcomes: outcome_docs(l.outcomes()),
                })
                .collect(),
        }
    }
}

/// Parse a JSON document, mapping syntax and shape errors to
/// [`Error::InvalidParams`].
pub fn from_json<D: for<'de> Deserialize<'de>>(text: &str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("bad JSON: {e}")))
}

pub fn to_json<S: Serialize>(doc: &S) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{random_distribution, random_pricing, random_product};
    use crate::rng::task_rng;

    fn u(n: usize) -> ItemUniverse {
        ItemUniverse::new(n).unwrap()
    }

    #[test]
    fn pricing_kinds_parse() {
        let item: PricingFile = from_json(r#"{"n": 2, "pricing": {"kind": "item", "prices": [1, 2.5]}}"#).unwrap();
        assert_eq!(item.build::<f64>().unwrap().price(Subset::full(2)), 3.5);
        let ex: PricingFile = from_json(r#"{"n": 1, "pricing": {"kind": "explicit", "table": [0, null]}}"#).unwrap();
        assert!(ex.build::<f64>().unwrap().price(Subset::singleton(0)).is_infinite());
        let cover: PricingFile = from_json(
            r#"{"n": 3, "pricing": {"kind": "scaled", "factor": 0.5,
                "inner": {"kind": "cover", "options": [{"set": [0, 1], "price": 4}, {"set": [2], "price": 2}]}}}"#,
        )
        .unwrap();
        assert_eq!(cover.build::<f64>().unwrap().price(Subset::full(3)), 3.0);
        let bad: PricingFile = from_json(r#"{"n": 2, "pricing": {"kind": "cover", "options": [{"set": [5], "price": 1}]}}"#).unwrap();
        assert!(bad.build::<f64>().is_err());
        assert!(from_json::<PricingFile>(r#"{"n": 2, "pricing": {"kind": "lottery"}}"#).is_err());
    }

    #[test]
    fn random_instances_round_trip() {
        let mut rng = task_rng(8, 0);
        for n in 1..=5 {
            for _ in 0..20 {
                let p = random_pricing::<f64, _>(u(n), 9, &mut rng).unwrap();
                let d = random_distribution::<f64, _>(u(n), 6, 9, &mut rng).unwrap();
                let doc = InstanceFile::from_parts(&p, &d);
                let back: InstanceFile = from_json(&to_json(&doc)).unwrap();
                assert_eq!(back, doc);
                let (p2, d2) = back.build::<f64>().unwrap();
                assert_eq!(p2.table().unwrap(), p.table().unwrap());
                assert_eq!(d2, d);

                let pi = random_product::<f64, _>(u(n), &mut rng).unwrap();
                let doc = DemandFile::from_demand(&pi);
                let back: DemandFile = from_json(&to_json(&doc)).unwrap();
                assert_eq!(back.build::<f64>().unwrap().marginals(), pi.marginals());
            }
        }
    }

    #[test]
    fn infinite_prices_round_trip_as_null() {
        let p = Pricing::explicit(u(1), vec![0.0, f64::INFINITY]).unwrap();
        let text = to_json(&PricingFile::from_pricing(&p));
        assert!(text.contains("null"));
        let back: PricingFile = from_json(&text).unwrap();
        assert!(back.build::<f64>().unwrap().price(Subset::singleton(0)).is_infinite());
    }

    #[test]
    fn menu_round_trip() {
        let text = r#"{"n": 2, "options": [
            {"price": 1, "outcomes": [{"p": 0.5, "set": [0]}, {"p": 0.5, "set": [1]}]},
            {"price": 3, "outcomes": [{"p": 1, "set": [0, 1]}]}]}"#;
        let doc: MenuFile = from_json(text).unwrap();
        let menu = doc.build::<f64>().unwrap();
        assert_eq!(menu.options().len(), 2);
        assert_eq!(MenuFile::from_menu(&menu), doc);
        let explicit = DemandFile {
            n: 2,
            demand: DemandDoc::Explicit {
                outcomes: vec![Outcome { p: 1.0, set: Subset::full(2) }],
            },
        };
        let back: DemandFile = from_json(&to_json(&explicit)).unwrap();
        assert_eq!(back, explicit);
        assert_eq!(back.build::<f64>().unwrap().outcomes().unwrap(), vec![(1.0, Subset::full(2))]);
    }

    #[test]
    fn options_file() {
        let doc: OptionsFile = from_json(r#"{"n": 2, "options": [{"set": [0], "price": 1}, {"set": [1], "price": 2}]}"#).unwrap();
        let (universe, options) = doc.build::<f64>().unwrap();
        assert_eq!(universe.n(), 2);
        assert_eq!(options[1], (Subset::singleton(1), 2.0));
    }
}
