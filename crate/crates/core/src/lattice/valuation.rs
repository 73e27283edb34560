use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::subset::{ItemUniverse, Subset};

#[derive(Clone, Debug, PartialEq)]
pub enum ValuationForm<T> {
    /// One value per subset, indexed by bitset.
    Explicit(Vec<T>),
    Additive(Vec<T>),
    /// Worth `value` on every superset of `set`, zero elsewhere.
    SingleMinded { set: Subset, value: T },
    /// Worth the largest item value in the set.
    UnitDemand(Vec<T>),
}

/// A monotone buyer valuation with `v(∅) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Valuation<T> {
    universe: ItemUniverse,
    form: ValuationForm<T>,
}

fn check_value<T: Scalar>(what: &'static str, x: T) -> Result<()> {
    if !x.is_finite() || x < T::zero() {
        return Err(Error::InvalidValue {
            what,
            value: x.to_f64_lossy(),
        });
    }
    Ok(())
}

fn check_len<T>(universe: ItemUniverse, values: &[T]) -> Result<()> {
    if values.len() != universe.n() {
        return Err(Error::UniverseMismatch {
            expected: universe.n(),
            found: values.len(),
        });
    }
    Ok(())
}

impl<T: Scalar> Valuation<T> {
    /// Checked exhaustively for monotonicity over single-item additions.
    pub fn explicit(universe: ItemUniverse, table: Vec<T>) -> Result<Self> {
        universe.require_enumerable()?;
        if table.len() != universe.lattice_size() {
            return Err(Error::InvalidTable(format!(
                "expected {} values, found {}",
                universe.lattice_size(),
                table.len()
            )));
        }
        for &x in &table {
            check_value("explicit value", x)?;
        }
        if table[0] != T::zero() {
            return Err(Error::InvalidTable("value of the empty set must be 0".into()));
        }
        for s in universe.subsets() {
            for i in (0..universe.n()).filter(|&i| !s.contains(i)) {
                let t = s.insert(i);
                if table[s.bits() as usize] > table[t.bits() as usize] {
                    return Err(Error::NonMonotoneValuation {
                        smaller: s,
                        larger: t,
                    });
                }
            }
        }
        Ok(Self {
            universe,
            form: ValuationForm::Explicit(table),
        })
    }

    pub fn additive(universe: ItemUniverse, values: Vec<T>) -> Result<Self> {
        check_len(universe, &values)?;
        for &x in &values {
            check_value("item value", x)?;
        }
        Ok(Self {
            universe,
            form: ValuationForm::Additive(values),
        })
    }

    pub fn single_minded(universe: ItemUniverse, set: Subset, value: T) -> Result<Self> {
        universe.check(set)?;
        check_value("single-minded value", value)?;
        Ok(Self {
            universe,
            form: ValuationForm::SingleMinded { set, value },
        })
    }

    pub fn unit_demand(universe: ItemUniverse, values: Vec<T>) -> Result<Self> {
        check_len(universe, &values)?;
        for &x in &values {
            check_value("item value", x)?;
        }
        Ok(Self {
            universe,
            form: ValuationForm::UnitDemand(values),
        })
    }

    pub fn zero(universe: ItemUniverse) -> Self {
        Self {
            universe,
            form: ValuationForm::Additive(vec![T::zero(); universe.n()]),
        }
    }

    #[inline]
    pub fn universe(&self) -> ItemUniverse {
        self.universe
    }

    #[inline]
    pub fn form(&self) -> &ValuationForm<T> {
        &self.form
    }

    pub fn value(&self, s: Subset) -> T {
        match &self.form {
            ValuationForm::Explicit(t) => t[s.bits() as usize],
            ValuationForm::Additive(v) => s.items().map(|i| v[i]).fold(T::zero(), |a, x| a + x),
            ValuationForm::SingleMinded { set, value } => {
                if set.is_subset_of(s) {
                    *value
                } else {
                    T::zero()
                }
            }
            ValuationForm::UnitDemand(v) => s.items().map(|i| v[i]).fold(T::zero(), T::max),
        }
    }

    /// Value of the grand bundle.
    pub fn grand_value(&self) -> T {
        self.value(self.universe.full())
    }

    /// Items outside this set never change the value: `v(S) = v(S ∩ support)`.
    pub fn support(&self) -> Subset {
        match &self.form {
            ValuationForm::Explicit(_) => self.universe.full(),
            ValuationForm::Additive(v) | ValuationForm::UnitDemand(v) => {
                Subset::from_items(v.iter().enumerate().filter(|(_, &x)| x > T::zero()).map(|(i, _)| i))
            }
            ValuationForm::SingleMinded { set, value } => {
                if *value > T::zero() {
                    *set
                } else {
                    Subset::EMPTY
                }
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.form {
            ValuationForm::Explicit(_) => "explicit",
            ValuationForm::Additive(_) => "additive",
            ValuationForm::SingleMinded { .. } => "single_minded",
            ValuationForm::UnitDemand(_) => "unit_demand",
        }
    }
}

/// Finite-support distribution over valuations sharing one universe.
#[derive(Clone, Debug, PartialEq)]
pub struct ValuationDistribution<T> {
    universe: ItemUniverse,
    support: Vec<(T, Valuation<T>)>,
}

/// Weights must sum to one within this slack.
pub(crate) fn normalization_slack<T: Scalar>(len: usize) -> T {
    T::of(1e-12).max(T::epsilon() * T::of_usize(4 * len.max(1)))
}

impl<T: Scalar> ValuationDistribution<T> {
    pub fn new(support: Vec<(T, Valuation<T>)>) -> Result<Self> {
        let universe = support.first().ok_or(Error::EmptySupport)?.1.universe();
        let mut sum = T::zero();
        for (w, v) in &support {
            universe.same_as(v.universe())?;
            if !(*w > T::zero()) || !w.is_finite() {
                return Err(Error::InvalidValue {
                    what: "support weight",
                    value: w.to_f64_lossy(),
                });
            }
            sum = sum + *w;
        }
        if (sum - T::one()).abs() > normalization_slack::<T>(support.len()) {
            return Err(Error::NotNormalized {
                sum: sum.to_f64_lossy(),
            });
        }
        Ok(Self { universe, support })
    }

    /// Equal weight on every valuation.
    pub fn uniform(valuations: Vec<Valuation<T>>) -> Result<Self> {
        let w = T::one() / T::of_usize(valuations.len().max(1));
        Self::new(valuations.into_iter().map(|v| (w, v)).collect())
    }

    /// Weights proportional to the given non-negative masses; zero masses
    /// are dropped.
    pub fn normalized(masses: Vec<(T, Valuation<T>)>) -> Result<Self> {
        let total = masses.iter().fold(T::zero(), |a, (w, _)| a + *w);
        if !(total > T::zero()) {
            return Err(Error::EmptySupport);
        }
        Self::new(
            masses
                .into_iter()
                .filter(|(w, _)| *w > T::zero())
                .map(|(w, v)| (w / total, v))
                .collect(),
        )
    }

    pub fn point_mass(v: Valuation<T>) -> Self {
        Self {
            universe: v.universe(),
            support: vec![(T::one(), v)],
        }
    }

    #[inline]
    pub fn universe(&self) -> ItemUniverse {
        self.universe
    }

    #[inline]
    pub fn support(&self) -> &[(T, Valuation<T>)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn all_single_minded(&self) -> bool {
        self.support
            .iter()
            .all(|(_, v)| matches!(v.form(), ValuationForm::SingleMinded { .. }))
    }

    /// `E[v([n])]`.
    pub fn expected_grand_value(&self) -> T {
        self.support
            .iter()
            .fold(T::zero(), |a, (w, v)| a + *w * v.grand_value())
    }
}
