use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qcore::linalg::{c, identity, max_abs, unitarity_residual, CMatrix, ZERO};

/// The `m²` shift-and-clock unitaries `X^a Z^b`, indexed by `a·m + b`.
#[derive(Debug, Clone)]
pub struct WeylSet {
    m: usize,
    unitaries: Vec<CMatrix>,
}

impl WeylSet {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }

    /// `X^a Z^b`.
    pub fn get(&self, a: usize, b: usize) -> &CMatrix {
        &self.unitaries[(a % self.m) * self.m + (b % self.m)]
    }

    /// `(1/m²) Σ_i W^i X W^i†`.
    pub fn twirl(&self, x: &CMatrix) -> CMatrix {
        let mut acc = CMatrix::zeros(self.m, self.m);
        for w in &self.unitaries {
            acc += w * x * w.adjoint();
        }
        acc / c((self.m * self.m) as f64, 0.0)
    }

    /// Largest deviation from the mixture identity `twirl(X) = tr(X) I/m` on `x`,
    /// together with the worst unitarity residual of the set.
    pub fn residual(&self, x: &CMatrix) -> f64 {
        let target = identity(self.m) * (x.trace() / c(self.m as f64, 0.0));
        let mix = max_abs(&(self.twirl(x) - target));
        let unit = self.unitaries.iter().map(unitarity_residual).fold(0.0, f64::max);
        mix.max(unit)
    }
}

pub fn shift(m: usize) -> CMatrix {
    let mut x = CMatrix::from_element(m, m, ZERO);
    for j in 0..m {
        x[((j + 1) % m, j)] = c(1.0, 0.0);
    }
    x
}

pub fn clock(m: usize) -> CMatrix {
    let mut z = CMatrix::from_element(m, m, ZERO);
    for j in 0..m {
        let phase = 2.0 * PI * j as f64 / m as f64;
        z[(j, j)] = c(phase.cos(), phase.sin());
    }
    z
}

pub fn weyl_set(m: usize) -> Result<WeylSet> {
    if m < 2 {
        return Err(Error::input("Weyl set needs m >= 2"));
    }
    let x = shift(m);
    let z = clock(m);
    let mut unitaries = Vec::with_capacity(m * m);
    let mut xa = identity(m);
    for _ in 0..m {
        let mut zb = identity(m);
        for _ in 0..m {
            unitaries.push(&xa * &zb);
            zb = &zb * &z;
        }
        xa = &xa * &x;
    }
    Ok(WeylSet { m, unitaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{pauli_x, pauli_z};
    use crate::qcore::random::{ginibre, rng_from_seed};

    fn equal_up_to_phase(a: &CMatrix, b: &CMatrix) -> bool {
        let ip = (b.adjoint() * a).trace();
        let n = a.nrows() as f64;
        (ip.norm() - n).abs() < 1e-12
    }

    #[test]
    fn qubit_weyl_set_is_the_paulis() {
        let w = weyl_set(2).unwrap();
        let expected = [identity(2), pauli_z(), pauli_x(), pauli_x() * pauli_z()];
        for (got, want) in w.unitaries().iter().zip(expected.iter()) {
            assert!(equal_up_to_phase(got, want));
        }
    }

    #[test]
    fn twirl_is_completely_depolarizing() {
        let mut rng = rng_from_seed(4);
        for m in 2..5 {
            let w = weyl_set(m).unwrap();
            for _ in 0..20 {
                let x = ginibre(m, m, &mut rng);
                assert!(w.residual(&x) <= 1e-10);
            }
        }
        assert!(weyl_set(1).is_err());
    }
}
