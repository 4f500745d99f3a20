use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Complex, DensityMatrix, Operator, RegisterLayout, Tensor, PROB_CUTOFF};
use crate::error::{Error, Result};

/// Pure state (or un-normalized branch) over a register layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<Complex>,
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    layout: RegisterLayout,
    amplitudes: Vec<[f64; 2]>,
}

impl TryFrom<StateRepr> for StateVector {
    type Error = Error;

    fn try_from(r: StateRepr) -> Result<Self> {
        StateVector::new(
            r.layout,
            r.amplitudes.into_iter().map(|[re, im]| Complex::new(re, im)).collect(),
        )
    }
}

impl From<StateVector> for StateRepr {
    fn from(s: StateVector) -> Self {
        StateRepr {
            layout: s.layout,
            amplitudes: s.amps.into_iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

/// Result of projecting onto a target state on a register subset.
#[derive(Debug, Clone)]
pub struct Projection {
    pub probability: f64,
    /// `None` when the probability is at or below [`PROB_CUTOFF`].
    pub post_state: Option<StateVector>,
}

/// One outcome of a computational-basis measurement.
#[derive(Debug, Clone)]
pub struct MeasurementBranch {
    /// Per-register outcome, in the order the registers were requested.
    pub outcome: Vec<usize>,
    pub probability: f64,
    pub post_state: StateVector,
}

impl StateVector {
    pub fn new(layout: RegisterLayout, amps: Vec<Complex>) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::DimensionMismatch(format!(
                "layout {layout} has dimension {} but {} amplitudes were given",
                layout.dim(),
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        Ok(Self { layout, amps })
    }

    pub(crate) fn from_parts_unchecked(layout: RegisterLayout, amps: Vec<Complex>) -> Self {
        debug_assert_eq!(layout.dim(), amps.len());
        Self { layout, amps }
    }

    pub fn zeros(layout: RegisterLayout) -> Self {
        let d = layout.dim();
        Self {
            layout,
            amps: vec![Complex::new(0.0, 0.0); d],
        }
    }

    /// Computational basis state with the given per-register indices.
    pub fn basis(layout: RegisterLayout, digits: &[usize]) -> Result<Self> {
        let flat = layout.encode(digits)?;
        let mut s = Self::zeros(layout);
        s.amps[flat] = Complex::new(1.0, 0.0);
        Ok(s)
    }

    /// Single-register basis state `|index⟩`.
    pub fn ket(name: &str, dim: usize, index: usize) -> Result<Self> {
        Self::basis(RegisterLayout::single(name, dim)?, &[index])
    }

    /// Single-register state from explicit amplitudes.
    pub fn register(name: &str, amps: Vec<Complex>) -> Result<Self> {
        Self::new(RegisterLayout::single(name, amps.len())?, amps)
    }

    /// Tensor product of several states, in order.
    pub fn product(parts: &[StateVector]) -> Result<Self> {
        let mut iter = parts.iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::InvalidState("empty product".into()))?
            .clone();
        iter.try_fold(first, |acc, p| acc.tensor(p))
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<Complex> {
        Ok(self.amps[self.layout.encode(digits)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n <= PROB_CUTOFF {
            return Err(Error::InvalidState(format!(
                "cannot normalize a vector with squared norm {n:e}"
            )));
        }
        Ok(self.scaled(Complex::new(1.0 / n.sqrt(), 0.0)))
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn scaled(&self, factor: Complex) -> Self {
        Self {
            layout: self.layout.clone(),
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// `self + other`; layouts must match exactly.
    pub fn add(&self, other: &StateVector) -> Result<Self> {
        self.same_layout(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &StateVector) -> Result<Self> {
        self.add(&other.scaled(Complex::new(-1.0, 0.0)))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex> {
        self.same_layout(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn same_layout(&self, other: &StateVector) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch(format!(
                "layouts differ: {} vs {}",
                self.layout, other.layout
            )));
        }
        Ok(())
    }

    /// Same state with registers permuted into `target` order.
    pub fn reordered(&self, target: &RegisterLayout) -> Result<Self> {
        if target.len() != self.layout.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot reorder {} into {target}",
                self.layout
            )));
        }
        let split = self.layout.split(target)?;
        let amps = (0..target.dim()).map(|s| self.amps[split.flat(s, 0)]).collect();
        Ok(Self {
            layout: target.clone(),
            amps,
        })
    }

    /// Applies `op` to the registers it is declared on, identity elsewhere.
    pub fn apply(&self, op: &Operator) -> Result<Self> {
        let split = self.layout.split(op.layout())?;
        let m = op.matrix();
        let d = split.d_sub;
        let mut out = vec![Complex::new(0.0, 0.0); self.amps.len()];
        let mut local = vec![Complex::new(0.0, 0.0); d];
        for comp in 0..split.d_comp {
            for (s, slot) in local.iter_mut().enumerate() {
                *slot = self.amps[split.flat(s, comp)];
            }
            if local.iter().all(|a| a.re == 0.0 && a.im == 0.0) {
                continue;
            }
            for row in 0..d {
                let mut acc = Complex::new(0.0, 0.0);
                for (col, v) in local.iter().enumerate() {
                    acc += m[(row, col)] * v;
                }
                out[split.flat(row, comp)] = acc;
            }
        }
        Ok(Self {
            layout: self.layout.clone(),
            amps: out,
        })
    }

    /// Applies a basis permutation on `registers`: the basis state with
    /// digits `d` (in `registers` order) is sent to `map(d)`.
    pub fn permute_basis(
        &self,
        registers: &[&str],
        map: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<Self> {
        let sub = self.layout.select(registers)?;
        let split = self.layout.split(&sub)?;
        let targets: Vec<usize> = (0..split.d_sub)
            .map(|s| sub.encode(&map(&sub.decode(s))))
            .collect::<Result<_>>()?;
        let mut seen = vec![false; split.d_sub];
        for &t in &targets {
            if std::mem::replace(&mut seen[t], true) {
                return Err(Error::NonUnitary(1.0));
            }
        }
        let mut out = vec![Complex::new(0.0, 0.0); self.amps.len()];
        for comp in 0..split.d_comp {
            for (s, &t) in targets.iter().enumerate() {
                out[split.flat(t, comp)] = self.amps[split.flat(s, comp)];
            }
        }
        Ok(Self {
            layout: self.layout.clone(),
            amps: out,
        })
    }

    /// `(⟨target| ⊗ I)|self⟩`, a vector on the complementary registers.
    pub fn contract(&self, target: &StateVector) -> Result<Self> {
        let split = self.layout.split(&target.layout)?;
        let mut out = vec![Complex::new(0.0, 0.0); split.d_comp];
        for (comp, slot) in out.iter_mut().enumerate() {
            *slot = target
                .amps
                .iter()
                .enumerate()
                .map(|(s, t)| t.conj() * self.amps[split.flat(s, comp)])
                .sum();
        }
        Ok(Self {
            layout: split.complement,
            amps: out,
        })
    }

    /// Embeds `sub ⊗ comp` into `layout`, where `sub` and `comp` together
    /// cover every register of `layout` exactly once.
    pub fn compose(layout: &RegisterLayout, sub: &StateVector, comp: &StateVector) -> Result<Self> {
        let split = layout.split(&sub.layout)?;
        if split.complement != comp.layout {
            return Err(Error::DimensionMismatch(format!(
                "complement {} does not match {}",
                split.complement, comp.layout
            )));
        }
        let mut out = vec![Complex::new(0.0, 0.0); layout.dim()];
        for (ci, cv) in comp.amps.iter().enumerate() {
            for (si, sv) in sub.amps.iter().enumerate() {
                out[split.flat(si, ci)] = sv * cv;
            }
        }
        Ok(Self {
            layout: layout.clone(),
            amps: out,
        })
    }

    /// Un-normalized `(|t⟩⟨t| ⊗ I)|self⟩`.
    pub fn project_component(&self, target: &StateVector) -> Result<Self> {
        let rest = self.contract(target)?;
        Self::compose(&self.layout, target, &rest)
    }

    /// Projects onto `target` (normalized) living on a subset of registers.
    pub fn project(&self, target: &StateVector) -> Result<Projection> {
        if !target.is_normalized(super::STATE_TOL) {
            return Err(Error::NotNormalized(target.norm_sqr()));
        }
        let component = self.project_component(target)?;
        let probability = component.norm_sqr();
        let post_state = if probability > PROB_CUTOFF {
            Some(component.scaled(Complex::new(1.0 / probability.sqrt(), 0.0)))
        } else {
            None
        };
        Ok(Projection {
            probability,
            post_state,
        })
    }

    /// Un-normalized branches of a computational-basis measurement, one per
    /// outcome with squared norm above `cutoff`.
    pub fn measurement_components(
        &self,
        registers: &[&str],
        cutoff: f64,
    ) -> Result<Vec<(Vec<usize>, StateVector)>> {
        if registers.is_empty() {
            return Err(Error::Domain("measurement needs at least one register".into()));
        }
        let sub = self.layout.select(registers)?;
        let split = self.layout.split(&sub)?;
        let mut branches = Vec::new();
        for s in 0..split.d_sub {
            let weight: f64 = (0..split.d_comp)
                .map(|c| self.amps[split.flat(s, c)].norm_sqr())
                .sum();
            if weight <= cutoff {
                continue;
            }
            let mut amps = vec![Complex::new(0.0, 0.0); self.amps.len()];
            for c in 0..split.d_comp {
                let f = split.flat(s, c);
                amps[f] = self.amps[f];
            }
            branches.push((
                sub.decode(s),
                Self {
                    layout: self.layout.clone(),
                    amps,
                },
            ));
        }
        Ok(branches)
    }

    /// Exhaustive computational-basis measurement of `registers`.
    pub fn measure(&self, registers: &[&str]) -> Result<Vec<MeasurementBranch>> {
        let total = self.norm_sqr();
        self.measurement_components(registers, PROB_CUTOFF * total.max(1.0))?
            .into_iter()
            .map(|(outcome, comp)| {
                let p = comp.norm_sqr();
                Ok(MeasurementBranch {
                    outcome,
                    probability: p / total,
                    post_state: comp.scaled(Complex::new(1.0 / p.sqrt(), 0.0)),
                })
            })
            .collect()
    }

    /// Draws a single measurement branch from `rng`.
    pub fn measure_sampled<R: Rng + ?Sized>(
        &self,
        registers: &[&str],
        rng: &mut R,
    ) -> Result<MeasurementBranch> {
        let branches = self.measure(registers)?;
        Ok(sample_branch(branches, |b| b.probability, rng))
    }

    /// Reduced density matrix on `keep` (in the order given).
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let sub = self.layout.select(keep)?;
        let split = self.layout.split(&sub)?;
        let d = split.d_sub;
        let mut m = nalgebra::DMatrix::<Complex>::zeros(d, d);
        for comp in 0..split.d_comp {
            for r in 0..d {
                let a = self.amps[split.flat(r, comp)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for col in 0..d {
                    m[(r, col)] += a * self.amps[split.flat(col, comp)].conj();
                }
            }
        }
        Ok(DensityMatrix::from_matrix_unchecked(sub, m))
    }

    /// `|self⟩⟨self|` without normalization.
    pub fn to_density(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityMatrix::from_matrix_unchecked(self.layout.clone(), &v * v.adjoint())
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex] {
        &mut self.amps
    }
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let mut amps = Vec::with_capacity(layout.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Self { layout, amps })
    }
}

/// Picks one item with probability proportional to `weight`.
pub(crate) fn sample_branch<T, R: Rng + ?Sized>(
    mut items: Vec<T>,
    weight: impl Fn(&T) -> f64,
    rng: &mut R,
) -> T {
    let total: f64 = items.iter().map(&weight).sum();
    let mut draw = rng.random::<f64>() * total;
    let last = items.len() - 1;
    for i in 0..last {
        let w = weight(&items[i]);
        if draw < w {
            return items.swap_remove(i);
        }
        draw -= w;
    }
    items.swap_remove(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{c, Tensor};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus(name: &str) -> StateVector {
        StateVector::register(name, vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let s = StateVector::ket("X", 2, 0)
            .unwrap()
            .tensor(&StateVector::ket("Y", 2, 1).unwrap())
            .unwrap();
        assert_eq!(s.amplitudes()[1], c(1.0, 0.0));
        assert_eq!(s.norm_sqr(), 1.0);
    }

    #[test]
    fn tensor_superposition_with_zero() {
        let s = plus("X").tensor(&StateVector::ket("Y", 2, 0).unwrap()).unwrap();
        let expect = [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert!((a - c(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn contract_and_compose_invert() {
        let x = plus("X");
        let y = StateVector::register("Y", vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let s = x.tensor(&y).unwrap();
        let rest = s.contract(&y).unwrap();
        assert_eq!(rest.layout().names().collect::<Vec<_>>(), vec!["X"]);
        let back = StateVector::compose(s.layout(), &y, &rest).unwrap();
        for (a, b) in back.amplitudes().iter().zip(s.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn measurement_of_basis_state_has_one_branch() {
        let s = StateVector::basis(RegisterLayout::new([("X", 3), ("Y", 2)]).unwrap(), &[2, 1])
            .unwrap();
        let b = s.measure(&["X"]).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].outcome, vec![2]);
        assert!((b[0].probability - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_keep_is_an_error() {
        assert_eq!(plus("X").partial_trace(&[]).unwrap_err(), Error::EmptyKeep);
    }

    #[test]
    fn projection_below_cutoff_has_no_post_state() {
        let s = StateVector::ket("X", 2, 0).unwrap();
        let p = s.project(&StateVector::ket("X", 2, 1).unwrap()).unwrap();
        assert_eq!(p.probability, 0.0);
        assert!(p.post_state.is_none());
    }

    #[test]
    fn json_shape() {
        let s = StateVector::ket("Q1", 2, 1).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"layout":[["Q1",2]],"amplitudes":[[0.0,0.0],[1.0,0.0]]}"#);
        let back: StateVector = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
