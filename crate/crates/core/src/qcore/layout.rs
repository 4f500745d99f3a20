use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered list of named subsystems.
///
/// Flat basis indices are the big-endian mixed-radix encoding of the
/// per-register indices: the first declared register is the most
/// significant digit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, usize)>", into = "Vec<(String, usize)>")]
pub struct RegisterLayout {
    registers: Vec<(String, usize)>,
}

impl RegisterLayout {
    pub fn new<S: Into<String>>(registers: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let registers: Vec<(String, usize)> =
            registers.into_iter().map(|(n, d)| (n.into(), d)).collect();
        for (i, (name, dim)) in registers.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::DimensionMismatch(format!(
                    "register `{name}` has dimension 0"
                )));
            }
            if registers[..i].iter().any(|(other, _)| other == name) {
                return Err(Error::LayoutConflict(format!("duplicate register `{name}`")));
            }
        }
        Ok(Self { registers })
    }

    /// Layout with a single register.
    pub fn single(name: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(name.into(), dim)])
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn registers(&self) -> &[(String, usize)] {
        &self.registers
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.registers.iter().map(|(n, _)| n.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|(_, d)| *d).collect()
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.registers.iter().map(|(_, d)| *d).product()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.registers.iter().position(|(n, _)| n == name)
    }

    pub fn dim_of(&self, name: &str) -> Result<usize> {
        self.position(name)
            .map(|p| self.registers[p].1)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    /// Flat-index stride of the register at `pos`.
    pub fn stride(&self, pos: usize) -> usize {
        self.registers[pos + 1..].iter().map(|(_, d)| *d).product()
    }

    pub fn encode(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.registers.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} register indices, got {}",
                self.registers.len(),
                digits.len()
            )));
        }
        let mut flat = 0;
        for (&digit, (name, dim)) in digits.iter().zip(&self.registers) {
            if digit >= *dim {
                return Err(Error::DimensionMismatch(format!(
                    "index {digit} out of range for register `{name}` (dim {dim})"
                )));
            }
            flat = flat * dim + digit;
        }
        Ok(flat)
    }

    pub fn decode(&self, mut flat: usize) -> Vec<usize> {
        let mut digits = vec![0; self.registers.len()];
        for (slot, (_, dim)) in digits.iter_mut().zip(&self.registers).rev() {
            *slot = flat % dim;
            flat /= dim;
        }
        digits
    }

    /// Concatenation `self` then `other`; names must be disjoint.
    pub fn concat(&self, other: &RegisterLayout) -> Result<Self> {
        for name in other.names() {
            if self.contains(name) {
                return Err(Error::LayoutConflict(format!(
                    "register `{name}` appears on both sides of the tensor product"
                )));
            }
        }
        let mut registers = self.registers.clone();
        registers.extend(other.registers.iter().cloned());
        Ok(Self { registers })
    }

    /// Sub-layout with the given registers, in the order given.
    pub fn select(&self, names: &[&str]) -> Result<Self> {
        let regs = names
            .iter()
            .map(|n| self.dim_of(n).map(|d| (n.to_string(), d)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(regs)
    }

    /// Registers not named in `names`, in declared order.
    pub fn complement(&self, names: &[&str]) -> Self {
        Self {
            registers: self
                .registers
                .iter()
                .filter(|(n, _)| !names.contains(&n.as_str()))
                .cloned()
                .collect(),
        }
    }

    /// Same dimensions, registers renamed through `f`.
    pub fn renamed(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        Self::new(self.registers.iter().map(|(n, d)| (f(n), *d)))
    }

    /// Index tables for splitting this layout into `subset` (in the order of
    /// `subset`'s own registers) and the complement (in declared order).
    ///
    /// `table[c * d_sub + s]` is the flat index in `self` whose subset part is
    /// `s` and complement part is `c`.
    pub(crate) fn split(&self, subset: &RegisterLayout) -> Result<Split> {
        let mut sub_pos = Vec::with_capacity(subset.len());
        for (name, dim) in subset.registers() {
            let pos = self
                .position(name)
                .ok_or_else(|| Error::UnknownRegister(name.clone()))?;
            if self.registers[pos].1 != *dim {
                return Err(Error::DimensionMismatch(format!(
                    "register `{name}` has dimension {} in the state but {dim} in the operand",
                    self.registers[pos].1
                )));
            }
            sub_pos.push(pos);
        }
        let names: Vec<&str> = subset.names().collect();
        let complement = self.complement(&names);
        let comp_pos: Vec<usize> = complement
            .names()
            .map(|n| self.position(n).expect("complement register"))
            .collect();

        let d_sub = subset.dim();
        let d_comp = complement.dim();
        let strides: Vec<usize> = (0..self.len()).map(|p| self.stride(p)).collect();

        // Offsets contributed by each subset index and each complement index.
        let sub_offsets = offsets(&sub_pos, subset, &strides);
        let comp_offsets = offsets(&comp_pos, &complement, &strides);

        let mut table = Vec::with_capacity(d_sub * d_comp);
        for c in &comp_offsets {
            for s in &sub_offsets {
                table.push(c + s);
            }
        }
        Ok(Split {
            complement,
            d_sub,
            d_comp,
            table,
        })
    }
}

fn offsets(positions: &[usize], layout: &RegisterLayout, strides: &[usize]) -> Vec<usize> {
    (0..layout.dim())
        .map(|flat| {
            layout
                .decode(flat)
                .iter()
                .zip(positions)
                .map(|(digit, &p)| digit * strides[p])
                .sum()
        })
        .collect()
}

pub(crate) struct Split {
    pub complement: RegisterLayout,
    pub d_sub: usize,
    pub d_comp: usize,
    pub table: Vec<usize>,
}

impl Split {
    #[inline]
    pub fn flat(&self, sub: usize, comp: usize) -> usize {
        self.table[comp * self.d_sub + sub]
    }
}

impl TryFrom<Vec<(String, usize)>> for RegisterLayout {
    type Error = Error;

    fn try_from(value: Vec<(String, usize)>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<RegisterLayout> for Vec<(String, usize)> {
    fn from(value: RegisterLayout) -> Self {
        value.registers
    }
}

impl std::fmt::Display for RegisterLayout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .registers
            .iter()
            .map(|(n, d)| format!("{n}:{d}"))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}
