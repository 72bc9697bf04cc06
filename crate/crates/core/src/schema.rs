//! Schema, attribute domains and tuples.
//!
//! Attributes are categorical: every attribute carries a finite, ordered list
//! of value labels and tuple values are stored as indices into that list.
//! Numeric columns are expected to be discretized before they reach a
//! [`Schema`] (see the CSV loader).

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::DataError;

/// Hard cap on the attribute count, imposed by the bitmask representation
/// used in itemset mining.
pub const MAX_ATTRIBUTES: usize = 128;

/// Index of an attribute within a schema.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttrId(pub u16);

impl AttrId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AttrId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Index of a value within an attribute's domain.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Value(pub u16);

impl Value {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Stable identifier of a tuple within its dataset.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TupleId(pub u32);

impl TupleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TupleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// One categorical attribute: a name plus its finite domain of labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub domain: Vec<String>,
}

impl Attribute {
    pub fn new(name: impl Into<String>, domain: Vec<String>) -> Self {
        Attribute { name: name.into(), domain }
    }

    /// Convenience for boolean attributes with domain `["0", "1"]`.
    pub fn boolean(name: impl Into<String>) -> Self {
        Attribute::new(name, vec!["0".to_string(), "1".to_string()])
    }

    pub fn domain_size(&self) -> usize {
        self.domain.len()
    }
}

/// An ordered list of attributes.
///
/// Invariants enforced at construction: at least one attribute, unique
/// names, every domain has at least two values, and at most
/// [`MAX_ATTRIBUTES`] attributes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    attributes: Vec<Attribute>,
}

impl Schema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self, DataError> {
        if attributes.is_empty() {
            return Err(DataError::EmptySchema);
        }
        if attributes.len() > MAX_ATTRIBUTES {
            return Err(DataError::TooManyAttributes {
                count: attributes.len(),
                max: MAX_ATTRIBUTES,
            });
        }
        let mut seen = std::collections::HashSet::new();
        for attr in &attributes {
            if !seen.insert(attr.name.clone()) {
                return Err(DataError::DuplicateAttribute { name: attr.name.clone() });
            }
            if attr.domain.len() < 2 {
                return Err(DataError::DegenerateDomain {
                    attribute: attr.name.clone(),
                    size: attr.domain.len(),
                });
            }
            let mut values = std::collections::HashSet::new();
            for v in &attr.domain {
                if !values.insert(v.clone()) {
                    return Err(DataError::DuplicateDomainValue {
                        attribute: attr.name.clone(),
                        value: v.clone(),
                    });
                }
            }
        }
        Ok(Schema { attributes })
    }

    /// `m`, the number of attributes.
    pub fn attr_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attr(&self, id: AttrId) -> &Attribute {
        &self.attributes[id.index()]
    }

    pub fn attr_ids(&self) -> impl Iterator<Item = AttrId> {
        (0..self.attributes.len() as u16).map(AttrId)
    }

    pub fn attr_id(&self, name: &str) -> Option<AttrId> {
        self.attributes
            .iter()
            .position(|a| a.name == name)
            .map(|i| AttrId(i as u16))
    }

    /// Resolve a value label to its index within an attribute's domain.
    pub fn value_of(&self, attr: AttrId, label: &str) -> Option<Value> {
        self.attr(attr)
            .domain
            .iter()
            .position(|v| v == label)
            .map(|i| Value(i as u16))
    }

    pub fn label(&self, attr: AttrId, value: Value) -> &str {
        &self.attr(attr).domain[value.index()]
    }
}

/// A tuple: one value per schema attribute, plus a stable id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tuple {
    pub id: TupleId,
    pub values: Vec<Value>,
}

impl Tuple {
    pub fn new(id: TupleId, values: Vec<Value>) -> Self {
        Tuple { id, values }
    }

    pub fn value(&self, attr: AttrId) -> Value {
        self.values[attr.index()]
    }

    /// Render the tuple's values as labels, in schema order.
    pub fn labels(&self, schema: &Schema) -> Vec<String> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| schema.label(AttrId(i as u16), *v).to_string())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bool_schema(m: usize) -> Vec<Attribute> {
        (1..=m).map(|i| Attribute::boolean(format!("A{i}"))).collect()
    }

    #[test]
    fn schema_accepts_boolean_attributes() {
        let s = Schema::new(bool_schema(5)).unwrap();
        assert_eq!(s.attr_count(), 5);
        assert_eq!(s.attr_id("A3"), Some(AttrId(2)));
        assert_eq!(s.value_of(AttrId(2), "1"), Some(Value(1)));
        assert_eq!(s.label(AttrId(2), Value(1)), "1");
    }

    #[test]
    fn schema_rejects_duplicate_names() {
        let mut attrs = bool_schema(2);
        attrs[1].name = "A1".into();
        assert!(matches!(
            Schema::new(attrs),
            Err(DataError::DuplicateAttribute { .. })
        ));
    }

    #[test]
    fn schema_rejects_single_valued_domain() {
        let attrs = vec![Attribute::new("A1", vec!["x".into()])];
        assert!(matches!(
            Schema::new(attrs),
            Err(DataError::DegenerateDomain { .. })
        ));
    }

    #[test]
    fn schema_rejects_empty() {
        assert!(matches!(Schema::new(vec![]), Err(DataError::EmptySchema)));
    }
}
