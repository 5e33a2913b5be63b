use std::collections::HashMap;

use super::{OracleDescriptor, RandomOracle};
use crate::bits::Bits;
use crate::error::{Error, Result};

/// Ordered `(argument, value)` pairs with distinct arguments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TwistList {
    entries: Vec<(Vec<u8>, Bits)>,
    index: HashMap<Vec<u8>, usize>,
}

impl TwistList {
    pub fn new(entries: Vec<(Vec<u8>, Bits)>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (pos, (arg, _)) in entries.iter().enumerate() {
            if index.insert(arg.clone(), pos).is_some() {
                return Err(Error::DuplicateTwistArgument(hex::encode(arg)));
            }
        }
        Ok(TwistList { entries, index })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(Vec<u8>, Bits)] {
        &self.entries
    }

    pub fn get(&self, arg: &[u8]) -> Option<&Bits> {
        self.index.get(arg).map(|&i| &self.entries[i].1)
    }

    pub fn contains(&self, arg: &[u8]) -> bool {
        self.index.contains_key(arg)
    }
}

/// An oracle that answers the listed arguments from its twist list and
/// defers everything else to `base`. Twisting again layers a new list on
/// top; the outermost list wins on overlap.
#[derive(Clone, Debug)]
pub struct Twisted<O> {
    base: O,
    list: TwistList,
}

pub fn twist<O: RandomOracle>(base: O, list: TwistList) -> Result<Twisted<O>> {
    let n = base.output_bits();
    if let Some((_, v)) = list.entries.iter().find(|(_, v)| v.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "twist value has {} bits, oracle outputs {n}",
            v.len()
        )));
    }
    Ok(Twisted { base, list })
}

impl<O> Twisted<O> {
    pub fn base(&self) -> &O {
        &self.base
    }

    pub fn list(&self) -> &TwistList {
        &self.list
    }
}

impl<O: RandomOracle> RandomOracle for Twisted<O> {
    fn output_bits(&self) -> usize {
        self.base.output_bits()
    }

    fn query(&self, msg: &[u8]) -> Bits {
        match self.list.get(msg) {
            Some(v) => v.clone(),
            None => self.base.query(msg),
        }
    }

    fn descriptor(&self) -> OracleDescriptor {
        OracleDescriptor::Twisted {
            base: Box::new(self.base.descriptor()),
            twists: self.list.len(),
        }
    }
}
