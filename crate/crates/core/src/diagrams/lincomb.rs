use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{canonicalize, CanonicalKey, Diagram};
use crate::error::DiagramError;
use crate::exactla::Rational;

/// Formal rational combination of canonical diagrams.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinComb {
    terms: BTreeMap<CanonicalKey, Rational>,
}

#[derive(Serialize, Deserialize)]
struct LinCombJson {
    coeffs: BTreeMap<String, String>,
}

impl LinComb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_key(key: CanonicalKey, coeff: Rational) -> Self {
        let mut c = Self::new();
        c.add_key(key, coeff);
        c
    }

    /// The combination equal to one signed diagram.
    pub fn from_diagram(d: &Diagram) -> Result<Self, DiagramError> {
        let mut c = Self::new();
        c.add_diagram(d, Rational::one())?;
        Ok(c)
    }

    pub fn add_key(&mut self, key: CanonicalKey, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(key);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Adds `coeff * d`, canonicalizing `d`; zero diagrams contribute nothing.
    pub fn add_diagram(&mut self, d: &Diagram, coeff: Rational) -> Result<(), DiagramError> {
        let (key, sign) = canonicalize(d)?;
        if sign != 0 {
            self.add_key(key, coeff * Rational::from_integer(sign.into()));
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &LinComb) {
        for (k, v) in &other.terms {
            self.add_key(k.clone(), v.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &LinComb, s: &Rational) {
        for (k, v) in &other.terms {
            self.add_key(k.clone(), v * s);
        }
    }

    pub fn scaled(&self, s: &Rational) -> LinComb {
        let mut out = LinComb::new();
        out.add_scaled(self, s);
        out
    }

    pub fn sub(&self, other: &LinComb) -> LinComb {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one());
        out
    }

    pub fn coefficient(&self, key: &CanonicalKey) -> Rational {
        self.terms.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalKey, &Rational)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &CanonicalKey> {
        self.terms.keys()
    }

    /// Terms whose key satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&CanonicalKey) -> bool) -> LinComb {
        LinComb {
            terms: self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    /// Coefficient vector over an ordered basis; `None` if a term falls
    /// outside the basis.
    pub fn to_vector(&self, basis: &[CanonicalKey]) -> Option<Vec<Rational>> {
        let index: BTreeMap<&CanonicalKey, usize> = basis.iter().enumerate().map(|(i, k)| (k, i)).collect();
        let mut v = vec![Rational::zero(); basis.len()];
        for (k, c) in &self.terms {
            v[*index.get(k)?] = c.clone();
        }
        Some(v)
    }

    pub fn from_vector(basis: &[CanonicalKey], v: &[Rational]) -> LinComb {
        let mut out = LinComb::new();
        for (k, c) in basis.iter().zip(v) {
            out.add_key(k.clone(), c.clone());
        }
        out
    }

    pub fn from_sparse(basis: &[CanonicalKey], v: &[(usize, Rational)]) -> LinComb {
        let mut out = LinComb::new();
        for (i, c) in v {
            out.add_key(basis[*i].clone(), c.clone());
        }
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let coeffs = self.terms.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        serde_json::to_value(LinCombJson { coeffs }).expect("lincomb serializes")
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Self, DiagramError> {
        let raw: LinCombJson = serde_json::from_value(v).map_err(|e| DiagramError::Malformed(e.to_string()))?;
        let mut out = LinComb::new();
        for (k, c) in raw.coeffs {
            let key: CanonicalKey = k.parse()?;
            let coeff: Rational =
                c.trim().parse().map_err(|_| DiagramError::Malformed(format!("bad coefficient {c:?}")))?;
            out.add_key(key, coeff);
        }
        Ok(out)
    }

    pub fn from_json(s: &str) -> Result<Self, DiagramError> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| DiagramError::Malformed(e.to_string()))?;
        Self::from_json_value(v)
    }
}

impl FromIterator<(CanonicalKey, Rational)> for LinComb {
    fn from_iter<I: IntoIterator<Item = (CanonicalKey, Rational)>>(iter: I) -> Self {
        let mut out = LinComb::new();
        for (k, v) in iter {
            out.add_key(k, v);
        }
        out
    }
}

impl fmt::Display for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, v)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({v})[{k}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::rat;

    #[test]
    fn cancellation_drops_terms() {
        let t = Diagram::tripod(3, 1, 2, 3);
        let mut c = LinComb::from_diagram(&t).unwrap();
        c.add_diagram(&t.clone().with_sign(-1), rat(1)).unwrap();
        assert!(c.is_zero());
    }

    #[test]
    fn json_round_trip() {
        let mut c = LinComb::from_diagram(&Diagram::from_chords(3, &[(1, 2), (1, 3)])).unwrap();
        c.add_diagram(&Diagram::tripod(3, 1, 2, 3), Rational::new(3.into(), 2.into())).unwrap();
        let text = c.to_json();
        assert_eq!(LinComb::from_json(&text).unwrap(), c);
        assert!(text.contains(r#""3/2""#));
    }
}
