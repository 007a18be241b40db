//! Dense factor tables over named discrete variables.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{combinations, BeliefNetwork, Cpt};

/// Non-negative table indexed lexicographically over `scope` (last fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTable {
    pub scope: Vec<String>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

impl FactorTable {
    pub fn new(scope: Vec<String>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(cards.iter().product::<usize>(), values.len());
        Self {
            scope,
            cards,
            values,
        }
    }

    /// The constant factor with empty scope.
    pub fn unit() -> Self {
        Self::new(Vec::new(), Vec::new(), vec![1.0])
    }

    /// `P(child | parents)` as a factor over `parents ++ [child]`. Row-major CPT
    /// storage already matches that layout.
    pub fn from_cpt(cpt: &Cpt, bn: &BeliefNetwork) -> Result<Self> {
        let mut scope = cpt.parents.clone();
        scope.push(cpt.child.clone());
        let cards = bn.cards(&scope)?;
        let values = cpt.rows.iter().flatten().copied().collect();
        Ok(Self::new(scope, cards, values))
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.scope.iter().position(|s| s == name)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.cards.len()];
        for i in (0..self.cards.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.cards[i + 1];
        }
        strides
    }

    /// Flat index for value indices given in scope order.
    pub fn index(&self, values: &[usize]) -> usize {
        values
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&v, &c)| acc * c + v)
    }

    pub fn get(&self, values: &[usize]) -> f64 {
        self.values[self.index(values)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Pointwise product over the union of both scopes (self's order first).
    pub fn product(&self, other: &FactorTable) -> FactorTable {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        for (name, &card) in other.scope.iter().zip(&other.cards) {
            if !scope.contains(name) {
                scope.push(name.clone());
                cards.push(card);
            }
        }
        let self_map: Vec<usize> = self.scope.iter().map(|s| scope.iter().position(|t| t == s).unwrap()).collect();
        let other_map: Vec<usize> = other.scope.iter().map(|s| scope.iter().position(|t| t == s).unwrap()).collect();
        let self_strides = self.strides();
        let other_strides = other.strides();
        let values = combinations(&cards)
            .into_iter()
            .map(|combo| {
                let a: usize = self_map.iter().zip(&self_strides).map(|(&p, &s)| combo[p] * s).sum();
                let b: usize = other_map.iter().zip(&other_strides).map(|(&p, &s)| combo[p] * s).sum();
                self.values[a] * other.values[b]
            })
            .collect();
        FactorTable::new(scope, cards, values)
    }

    /// Sums `name` out of the table. Unknown names leave it unchanged.
    pub fn sum_out(&self, name: &str) -> FactorTable {
        let Some(pos) = self.position(name) else {
            return self.clone();
        };
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        let mut out = FactorTable::new(scope, cards.clone(), vec![0.0; cards.iter().product()]);
        let strides = self.strides();
        for combo in combinations(&self.cards) {
            let src: usize = combo.iter().zip(&strides).map(|(v, s)| v * s).sum();
            let mut reduced = combo.clone();
            reduced.remove(pos);
            let dst = out.index(&reduced);
            out.values[dst] += self.values[src];
        }
        out
    }

    /// Restricts `name` to the value index `value` and drops it from scope.
    pub fn reduce(&self, name: &str, value: usize) -> FactorTable {
        let Some(pos) = self.position(name) else {
            return self.clone();
        };
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        let values = combinations(&cards)
            .into_iter()
            .map(|mut combo| {
                combo.insert(pos, value);
                self.get(&combo)
            })
            .collect();
        FactorTable::new(scope, cards, values)
    }

    /// Same table with its scope permuted into `order` (a permutation of scope).
    pub fn reorder(&self, order: &[String]) -> Result<FactorTable> {
        let map: Vec<usize> = order
            .iter()
            .map(|n| self.position(n).ok_or_else(|| Error::UnknownNode(n.clone())))
            .collect::<Result<_>>()?;
        if map.len() != self.scope.len() {
            return Err(Error::NameMismatch(format!(
                "reorder {:?} -> {:?}",
                self.scope, order
            )));
        }
        let cards: Vec<usize> = map.iter().map(|&p| self.cards[p]).collect();
        let mut src = vec![0; self.scope.len()];
        let values = combinations(&cards)
            .into_iter()
            .map(|combo| {
                for (i, &p) in map.iter().enumerate() {
                    src[p] = combo[i];
                }
                self.get(&src)
            })
            .collect();
        Ok(FactorTable::new(order.to_vec(), cards, values))
    }

    /// Reads the table as `P(child | parents)`, normalizing each row. A row
    /// with zero mass becomes uniform.
    pub fn to_cpt(&self, child: &str, parents: &[String]) -> Result<Cpt> {
        let mut order = parents.to_vec();
        order.push(child.to_string());
        let t = self.reorder(&order)?;
        let child_card = *t.cards.last().unwrap();
        let rows = t
            .values
            .chunks(child_card)
            .map(normalized_or_uniform)
            .collect();
        Ok(Cpt::new(child, parents.to_vec(), rows))
    }
}

pub(crate) fn normalized_or_uniform(row: &[f64]) -> Vec<f64> {
    let sum: f64 = row.iter().sum();
    if sum > 0.0 {
        row.iter().map(|v| v / sum).collect()
    } else {
        vec![1.0 / row.len() as f64; row.len()]
    }
}

/// Normalized distribution over the joint values of `scope`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    pub scope: Vec<String>,
    pub domains: Vec<Vec<String>>,
    pub probabilities: Vec<f64>,
}

impl Dist {
    /// Normalizes a factor into a distribution over its scope.
    pub(crate) fn from_factor(factor: FactorTable, bn: &BeliefNetwork) -> Result<Self> {
        let total = factor.total();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::ZeroProbabilityEvidence);
        }
        let domains = factor
            .scope
            .iter()
            .map(|n| bn.distinction(n).map(|d| d.domain.clone()))
            .collect::<Result<_>>()?;
        Ok(Self {
            scope: factor.scope,
            domains,
            probabilities: factor.values.into_iter().map(|v| v / total).collect(),
        })
    }

    pub fn cards(&self) -> Vec<usize> {
        self.domains.iter().map(Vec::len).collect()
    }

    /// Probability of the joint value given as labels in scope order.
    pub fn prob(&self, labels: &[&str]) -> Result<f64> {
        if labels.len() != self.scope.len() {
            return Err(Error::NameMismatch(format!(
                "expected {} labels for {:?}",
                self.scope.len(),
                self.scope
            )));
        }
        let mut index = 0;
        for ((label, domain), name) in labels.iter().zip(&self.domains).zip(&self.scope) {
            let v = domain
                .iter()
                .position(|d| d == label)
                .ok_or_else(|| Error::UnknownValue {
                    node: name.clone(),
                    value: label.to_string(),
                })?;
            index = index * domain.len() + v;
        }
        Ok(self.probabilities[index])
    }

    /// Single-variable marginal of `name` from this joint.
    pub fn marginal_of(&self, name: &str) -> Result<Vec<f64>> {
        let pos = self
            .scope
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))?;
        let mut out = vec![0.0; self.domains[pos].len()];
        for (combo, p) in combinations(&self.cards()).into_iter().zip(&self.probabilities) {
            out[combo[pos]] += p;
        }
        Ok(out)
    }

    /// Rows as (labels, probability) in table order.
    pub fn rows(&self) -> Vec<(Vec<&str>, f64)> {
        combinations(&self.cards())
            .into_iter()
            .zip(&self.probabilities)
            .map(|(combo, &p)| {
                let labels = combo
                    .iter()
                    .zip(&self.domains)
                    .map(|(&v, d)| d[v].as_str())
                    .collect();
                (labels, p)
            })
            .collect()
    }

    /// Largest entrywise difference; `None` when the scopes or domains differ.
    pub fn max_abs_diff(&self, other: &Dist) -> Option<f64> {
        if self.scope != other.scope || self.domains != other.domains {
            return None;
        }
        Some(
            self.probabilities
                .iter()
                .zip(&other.probabilities)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = self.rows();
        let mut widths: Vec<usize> = self.scope.iter().map(String::len).collect();
        for (labels, _) in &rows {
            for (w, l) in widths.iter_mut().zip(labels) {
                *w = (*w).max(l.len());
            }
        }
        for (name, w) in self.scope.iter().zip(&widths) {
            write!(f, "{name:<w$}  ")?;
        }
        writeln!(f, "probability")?;
        for (labels, p) in rows {
            for (l, w) in labels.iter().zip(&widths) {
                write!(f, "{l:<w$}  ")?;
            }
            writeln!(f, "{p:.12}")?;
        }
        Ok(())
    }
}
