//! Symmetric-group machinery: permutations of `k` tensor copies, their cycle
//! types, the operators that permute copies, and the spectral weights
//! `h_sigma = prod_m Tr rho^{n_m}` over the cycle lengths `n_m` of `sigma`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::tensor::{OperatorMatrix, Spectrum};
use crate::C64;

/// A bijection on `0..k`, `sigma(i) = image[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &i in &image {
            if i >= image.len() || seen[i] {
                return Err(Error::invalid(format!("{image:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Permutation { image })
    }

    pub fn identity(k: usize) -> Self {
        Permutation {
            image: (0..k).collect(),
        }
    }

    /// Transposition of `a` and `b` in `S_k`.
    pub fn transposition(k: usize, a: usize, b: usize) -> Result<Self> {
        let mut image: Vec<usize> = (0..k).collect();
        if a >= k || b >= k {
            return Err(Error::invalid("transposition index outside 0..k"));
        }
        image.swap(a, b);
        Ok(Permutation { image })
    }

    /// The cycle `0 -> 1 -> .. -> k-1 -> 0`.
    pub fn full_cycle(k: usize) -> Self {
        Permutation {
            image: (0..k).map(|i| (i + 1) % k.max(1)).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.k()];
        for (i, &j) in self.image.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { image: inv }
    }

    /// `self o other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.k() != other.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                found: other.k(),
            });
        }
        Ok(Permutation {
            image: other.image.iter().map(|&i| self.image[i]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn cycle_type(&self) -> CycleType {
        cycle_type(self)
    }
}

/// Cycle lengths of a permutation, sorted descending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycleType {
    parts: Vec<usize>,
}

impl CycleType {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::invalid("cycle lengths must be positive"));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(CycleType { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// `|sigma|`, the number of cycles.
    pub fn n_cycles(&self) -> usize {
        self.parts.len()
    }

    pub fn k(&self) -> usize {
        self.parts.iter().sum()
    }
}

pub fn cycle_type(sigma: &Permutation) -> CycleType {
    let k = sigma.k();
    let mut seen = vec![false; k];
    let mut parts = Vec::new();
    for start in 0..k {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = sigma.apply(i);
            len += 1;
        }
        parts.push(len);
    }
    parts.sort_unstable_by(|a, b| b.cmp(a));
    CycleType { parts }
}

/// All `k!` elements of `S_k` in lexicographic order of their images.
pub fn enumerate_sk(k: usize, limits: &Limits) -> Result<Vec<Permutation>> {
    limits.check_k(k)?;
    let mut current: Vec<usize> = (0..k).collect();
    let mut out = vec![Permutation {
        image: current.clone(),
    }];
    while next_permutation(&mut current) {
        out.push(Permutation {
            image: current.clone(),
        });
    }
    Ok(out)
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// For every basis index of `(C^local_dim)^{(x) k}`, the index it is sent to
/// by `Perm(sigma)`. Copy 0 is the slowest digit.
pub fn perm_index_map(sigma: &Permutation, local_dim: usize) -> Vec<usize> {
    let k = sigma.k();
    let dim = local_dim.pow(k as u32);
    let inv = sigma.inverse();
    // place[j] = weight of output position j
    let weight: Vec<usize> = (0..k).map(|j| local_dim.pow((k - 1 - j) as u32)).collect();
    let mut digits = vec![0usize; k];
    (0..dim)
        .map(|input| {
            let mut rem = input;
            for (j, w) in weight.iter().enumerate() {
                digits[j] = rem / w;
                rem %= w;
            }
            (0..k).map(|j| digits[inv.apply(j)] * weight[j]).sum()
        })
        .collect()
}

/// `Perm(sigma)` on `(C^local_dim)^{(x) k}`: `|i_1..i_k> -> |i_{s^-1(1)}..i_{s^-1(k)}>`.
///
/// With this pull-back action `Perm(sigma) Perm(tau) = Perm(sigma o tau)`.
pub fn perm_operator(
    sigma: &Permutation,
    local_dim: usize,
    limits: &Limits,
) -> Result<OperatorMatrix> {
    let dim = limits.check_power_dim(local_dim, sigma.k())?;
    let mut m = DMatrix::zeros(dim, dim);
    for (input, output) in perm_index_map(sigma, local_dim).into_iter().enumerate() {
        m[(output, input)] = C64::new(1.0, 0.0);
    }
    OperatorMatrix::new(m)
}

/// `sum_sigma weight(sigma) Perm(sigma)` as a dense matrix.
pub fn permutation_sum(
    k: usize,
    local_dim: usize,
    limits: &Limits,
    mut weight: impl FnMut(&Permutation) -> f64,
) -> Result<OperatorMatrix> {
    let dim = limits.check_power_dim(local_dim, k)?;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for sigma in enumerate_sk(k, limits)? {
        let w = weight(&sigma);
        if w == 0.0 {
            continue;
        }
        for (input, output) in perm_index_map(&sigma, local_dim).into_iter().enumerate() {
            m[(output, input)] += C64::new(w, 0.0);
        }
    }
    OperatorMatrix::new(m)
}

/// `[t_1, .., t_k]` with `t_n = sum_l lambda_l^n`.
pub fn power_traces(spectrum: &Spectrum, k: usize) -> Vec<f64> {
    (1..=k as u32).map(|n| spectrum.power_trace(n)).collect()
}

/// `prod_m t_{n_m}` over the parts of `ct`.
pub fn h_sigma(traces: &[f64], ct: &CycleType) -> Result<f64> {
    ct.parts()
        .iter()
        .map(|&n| {
            traces.get(n - 1).copied().ok_or_else(|| {
                Error::invalid(format!(
                    "cycle of length {n} needs power trace t_{n}, only {} available",
                    traces.len()
                ))
            })
        })
        .product()
}

/// `D (D+1) .. (D+k-1)`.
pub fn rising_factorial(d: f64, k: usize) -> f64 {
    (0..k).map(|i| d + i as f64).product()
}
