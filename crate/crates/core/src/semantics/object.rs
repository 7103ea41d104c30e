use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A named finite factor of an object.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub name: String,
    pub card: usize,
}

impl Atom {
    pub fn new(name: impl Into<String>, card: usize) -> Self {
        Atom { name: name.into(), card }
    }
}

/// A finite value space given as an ordered product of named atoms.
/// The empty sequence is the unit object.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinObject {
    atoms: Vec<Atom>,
}

impl FinObject {
    pub fn unit() -> Self {
        FinObject { atoms: Vec::new() }
    }

    pub fn atom(name: impl Into<String>, card: usize) -> Self {
        FinObject { atoms: vec![Atom::new(name, card)] }
    }

    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            if a.card == 0 {
                return Err(invalid(format!("atom `{}` has cardinality 0", a.name)));
            }
            if atoms[..i].iter().any(|b| b.name == a.name) {
                return Err(invalid(format!("duplicate atom name `{}`", a.name)));
            }
        }
        Ok(FinObject { atoms })
    }

    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, usize)]) -> Result<Self> {
        Self::new(pairs.iter().map(|(n, c)| Atom::new(n.as_ref(), *c)).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_unit(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn size(&self) -> usize {
        self.atoms.iter().map(|a| a.card).product()
    }

    pub fn cards(&self) -> Vec<usize> {
        self.atoms.iter().map(|a| a.card).collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.atoms.iter().map(|a| a.name.clone()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn card_of(&self, name: &str) -> Result<usize> {
        self.position(name)
            .map(|i| self.atoms[i].card)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    /// Concatenation of atoms. A name already present gets primes appended
    /// until it is fresh.
    pub fn tensor(&self, other: &FinObject) -> FinObject {
        let mut atoms = self.atoms.clone();
        for a in &other.atoms {
            let mut name = a.name.clone();
            while atoms.iter().any(|b| b.name == name) {
                name.push('\'');
            }
            atoms.push(Atom::new(name, a.card));
        }
        FinObject { atoms }
    }

    /// Sub-object made of the named atoms, in the given order.
    pub fn select(&self, names: &[String]) -> Result<FinObject> {
        let atoms = names
            .iter()
            .map(|n| {
                self.position(n)
                    .map(|i| self.atoms[i].clone())
                    .ok_or_else(|| Error::UnknownName(n.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        FinObject::new(atoms)
    }

    /// Atoms not named in `names`, in object order.
    pub fn without(&self, names: &[String]) -> FinObject {
        FinObject {
            atoms: self.atoms.iter().filter(|a| !names.contains(&a.name)).cloned().collect(),
        }
    }

    pub fn renamed(&self, f: impl Fn(&str) -> String) -> Result<FinObject> {
        FinObject::new(self.atoms.iter().map(|a| Atom::new(f(&a.name), a.card)).collect())
    }

    /// Mixed-radix index of a value tuple (last atom varies fastest).
    pub fn index_of(&self, tuple: &[usize]) -> Result<usize> {
        if tuple.len() != self.atoms.len() {
            return Err(Error::Index(format!(
                "tuple of length {} for object with {} atoms",
                tuple.len(),
                self.atoms.len()
            )));
        }
        let mut idx = 0;
        for (v, a) in tuple.iter().zip(&self.atoms) {
            if *v >= a.card {
                return Err(Error::Index(format!("value {} for atom `{}` of cardinality {}", v, a.name, a.card)));
            }
            idx = idx * a.card + v;
        }
        Ok(idx)
    }

    pub fn tuple_of(&self, mut idx: usize) -> Vec<usize> {
        let mut t = vec![0; self.atoms.len()];
        for (k, a) in self.atoms.iter().enumerate().rev() {
            t[k] = idx % a.card;
            idx /= a.card;
        }
        t
    }

    /// Same cardinality sequence, names ignored.
    pub fn compatible(&self, other: &FinObject) -> bool {
        self.cards() == other.cards()
    }
}

impl std::fmt::Display for FinObject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self.atoms.iter().map(|a| format!("{}:{}", a.name, a.card)).collect();
        write!(f, "{}", parts.join(" ⊗ "))
    }
}
