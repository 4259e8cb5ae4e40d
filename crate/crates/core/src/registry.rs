//! Name-keyed registry of strategy factories.
//!
//! Studies, spectral filters and Zlatos kernels are selected at runtime by a
//! string from the config file or the command line.

use std::collections::BTreeMap;

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Box<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Registers `item` under `name`, replacing any previous entry.
    pub fn register(&mut self, name: &'static str, item: Box<T>) -> &mut Self {
        self.entries.insert(name, item);
        self
    }

    pub fn get(&self, name: &str) -> crate::Result<&T> {
        self.entries.get(name).map(|b| b.as_ref()).ok_or_else(|| {
            crate::Error::config(format!(
                "unknown {} '{}' (known: {})",
                self.kind,
                name,
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &T)> {
        self.entries.iter().map(|(k, v)| (*k, v.as_ref()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Named {
        fn value(&self) -> i32;
    }
    struct A;
    impl Named for A {
        fn value(&self) -> i32 {
            1
        }
    }

    #[test]
    fn lookup_and_unknown_name() {
        let mut reg: Registry<dyn Named> = Registry::new("thing");
        reg.register("a", Box::new(A));
        assert_eq!(reg.get("a").unwrap().value(), 1);
        let err = reg.get("b").err().unwrap().to_string();
        assert!(err.contains("unknown thing 'b'"));
        assert!(err.contains("known: a"));
    }
}
