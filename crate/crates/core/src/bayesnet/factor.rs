use crate::data::config_strides;
use crate::error::{Error, Result};

/// Nonnegative table over the Cartesian product of its variables' states,
/// stored row-major with the last variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    pub fn new(vars: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if vars.len() != cards.len() {
            return Err(Error::Shape("one cardinality per variable required".into()));
        }
        for (k, v) in vars.iter().enumerate() {
            if vars[..k].contains(v) {
                return Err(Error::InvalidArgument(format!("variable {v} repeated in factor scope")));
            }
        }
        let size: usize = cards.iter().product();
        if values.len() != size {
            return Err(Error::Shape(format!(
                "factor over cards {cards:?} needs {size} values, got {}",
                values.len()
            )));
        }
        if let Some(x) = values.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("factor value {x} is not a finite nonnegative number")));
        }
        Ok(Factor { vars, cards, values })
    }

    /// Factor over the empty scope holding a single value.
    pub fn scalar(value: f64) -> Self {
        Factor {
            vars: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    fn position(&self, var: usize) -> Option<usize> {
        self.vars.iter().position(|&v| v == var)
    }

    /// Value at an assignment given in scope order.
    pub fn get(&self, assignment: &[usize]) -> f64 {
        let idx: usize = config_strides(&self.cards)
            .iter()
            .zip(assignment)
            .map(|(s, x)| s * x)
            .sum();
        self.values[idx]
    }

    pub fn product(&self, other: &Factor) -> Result<Factor> {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (&v, &c) in other.vars.iter().zip(&other.cards) {
            match self.position(v) {
                Some(k) if self.cards[k] != c => return Err(Error::CardinalityMismatch(v)),
                Some(_) => {}
                None => {
                    vars.push(v);
                    cards.push(c);
                }
            }
        }
        // strides of each input expressed over the output scope
        let a_strides = embed_strides(&self.vars, &self.cards, &vars);
        let b_strides = embed_strides(&other.vars, &other.cards, &vars);
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assignment = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            // odometer increment, last variable fastest
            for k in (0..vars.len()).rev() {
                assignment[k] += 1;
                ia += a_strides[k];
                ib += b_strides[k];
                if assignment[k] < cards[k] {
                    break;
                }
                ia -= a_strides[k] * cards[k];
                ib -= b_strides[k] * cards[k];
                assignment[k] = 0;
            }
        }
        Ok(Factor { vars, cards, values })
    }

    /// Sums `var` out of the factor.
    pub fn marginalize(&self, var: usize) -> Result<Factor> {
        let k = self
            .position(var)
            .ok_or_else(|| Error::UnknownVariable(format!("variable {var} not in factor scope")))?;
        let card = self.cards[k];
        let inner: usize = self.cards[k + 1..].iter().product();
        let outer: usize = self.cards[..k].iter().product();
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for s in 0..card {
                let base = (o * card + s) * inner;
                for i in 0..inner {
                    values[o * inner + i] += self.values[base + i];
                }
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(k);
        cards.remove(k);
        Ok(Factor { vars, cards, values })
    }

    /// Fixes `var = state` and drops `var` from the scope. Factors that do not
    /// mention `var` are returned unchanged.
    pub fn reduce(&self, var: usize, state: usize) -> Result<Factor> {
        let Some(k) = self.position(var) else {
            return Ok(self.clone());
        };
        let card = self.cards[k];
        if state >= card {
            return Err(Error::InvalidArgument(format!("state {state} out of range for variable {var}")));
        }
        let inner: usize = self.cards[k + 1..].iter().product();
        let outer: usize = self.cards[..k].iter().product();
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = (o * card + state) * inner;
            values.extend_from_slice(&self.values[base..base + inner]);
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(k);
        cards.remove(k);
        Ok(Factor { vars, cards, values })
    }

    pub fn normalized(&self) -> Result<Factor> {
        let z = self.sum();
        if !(z > 0.0) {
            return Err(Error::ZeroEvidenceProbability);
        }
        Ok(Factor {
            vars: self.vars.clone(),
            cards: self.cards.clone(),
            values: self.values.iter().map(|x| x / z).collect(),
        })
    }

    /// Same factor with its scope reordered to `order` (a permutation of the
    /// current scope).
    pub fn permuted(&self, order: &[usize]) -> Result<Factor> {
        if order.len() != self.vars.len() || order.iter().any(|v| self.position(*v).is_none()) {
            return Err(Error::InvalidArgument("order must be a permutation of the scope".into()));
        }
        let cards: Vec<usize> = order.iter().map(|&v| self.cards[self.position(v).unwrap()]).collect();
        let src_strides = embed_strides(&self.vars, &self.cards, order);
        let size = self.values.len();
        let mut values = Vec::with_capacity(size);
        let mut assignment = vec![0usize; order.len()];
        let mut idx = 0usize;
        for _ in 0..size {
            values.push(self.values[idx]);
            for k in (0..order.len()).rev() {
                assignment[k] += 1;
                idx += src_strides[k];
                if assignment[k] < cards[k] {
                    break;
                }
                idx -= src_strides[k] * cards[k];
                assignment[k] = 0;
            }
        }
        Ok(Factor {
            vars: order.to_vec(),
            cards,
            values,
        })
    }
}

/// For each variable of `target`, the stride of that variable in a factor
/// with scope `vars` (zero when absent).
fn embed_strides(vars: &[usize], cards: &[usize], target: &[usize]) -> Vec<usize> {
    let strides = config_strides(cards);
    target
        .iter()
        .map(|t| vars.iter().position(|v| v == t).map_or(0, |k| strides[k]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(vars: &[usize], cards: &[usize], values: &[f64]) -> Factor {
        Factor::new(vars.to_vec(), cards.to_vec(), values.to_vec()).unwrap()
    }

    #[test]
    fn scalar_one_is_identity() {
        let a = f(&[0, 1], &[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(a.product(&Factor::scalar(1.0)).unwrap(), a);
        assert_eq!(Factor::scalar(1.0).product(&a).unwrap(), a);
    }

    #[test]
    fn disjoint_product_is_outer() {
        let a = f(&[0], &[2], &[0.2, 0.8]);
        let b = f(&[1], &[3], &[1.0, 2.0, 3.0]);
        let p = a.product(&b).unwrap();
        assert_eq!(p.vars(), &[0, 1]);
        let expected = [0.2, 0.4, 0.6, 0.8, 1.6, 2.4];
        for (x, e) in p.values().iter().zip(expected) {
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn shared_variable_product() {
        // f(X,Y) g(Y,Z) at (x0, y1, z0)
        let fxy = f(&[0, 1], &[2, 2], &[1.0, 2.0, 3.0, 4.0]);
        let gyz = f(&[1, 2], &[2, 2], &[5.0, 6.0, 7.0, 8.0]);
        let p = fxy.product(&gyz).unwrap();
        assert_eq!(p.vars(), &[0, 1, 2]);
        assert_eq!(p.get(&[0, 1, 0]), 2.0 * 7.0);
        assert_eq!(p.get(&[1, 0, 1]), 3.0 * 6.0);
    }

    #[test]
    fn product_cardinality_mismatch() {
        let a = f(&[0], &[2], &[1.0, 1.0]);
        let b = f(&[0], &[3], &[1.0, 1.0, 1.0]);
        assert!(matches!(a.product(&b), Err(Error::CardinalityMismatch(0))));
    }

    #[test]
    fn marginalize_examples() {
        let a = f(&[0], &[2], &[0.4, 0.6]);
        let m = a.marginalize(0).unwrap();
        assert!(m.vars().is_empty());
        assert!((m.values()[0] - 1.0).abs() < 1e-15);

        let g = f(&[1], &[3], &[1.0, 2.0, 3.0]);
        let outer = a.product(&g).unwrap().marginalize(1).unwrap();
        assert_eq!(outer.vars(), &[0]);
        assert!((outer.values()[0] - 0.4 * 6.0).abs() < 1e-12);
        assert!((outer.values()[1] - 0.6 * 6.0).abs() < 1e-12);

        assert!(matches!(a.marginalize(7), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn reduce_and_permute() {
        let a = f(&[0, 1], &[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(a.reduce(1, 2).unwrap().values(), &[3.0, 6.0]);
        assert_eq!(a.reduce(0, 1).unwrap().values(), &[4.0, 5.0, 6.0]);
        let p = a.permuted(&[1, 0]).unwrap();
        assert_eq!(p.get(&[2, 1]), a.get(&[1, 2]));
        assert_eq!(p.values(), &[1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
    }

    #[test]
    fn rejects_negative_values() {
        assert!(Factor::new(vec![0], vec![2], vec![-1.0, 1.0]).is_err());
        assert!(Factor::new(vec![0], vec![2], vec![1.0]).is_err());
    }
}
