//! Queue-length-dependent additive noise over residues mod `|F|`.

use serde::{Deserialize, Serialize};

use crate::analytic::StationaryDist;
use crate::dist::{Pmf, NORMALIZATION_TOL};
use crate::error::{Error, Result};
use crate::numeric::{ksum, plog2p, CompensatedSum};

/// Symbol alphabet of size `|F| >= 2`; symbols are residues with addition mod size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Alphabet(u32);

impl Alphabet {
    pub fn new(size: u32) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidParameter(format!(
                "alphabet size must be at least 2, got {size}"
            )));
        }
        Ok(Alphabet(size))
    }

    pub fn size(self) -> u32 {
        self.0
    }

    /// `log2 |F|`.
    pub fn log_size(self) -> f64 {
        (self.0 as f64).log2()
    }

    pub fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.0 as u64) as u32
    }

    pub fn sub(self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.0 as u64 - (b % self.0) as u64) % self.0 as u64) as u32
    }
}

impl TryFrom<u32> for Alphabet {
    type Error = Error;
    fn try_from(v: u32) -> Result<Self> {
        Alphabet::new(v)
    }
}

impl From<Alphabet> for u32 {
    fn from(a: Alphabet) -> u32 {
        a.0
    }
}

/// Entropy in bits, `0 log 0 = 0`.
pub fn entropy(psi: &Pmf) -> f64 {
    ksum(psi.masses().iter().map(|p| plog2p(*p)))
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseKind {
    /// `psi_low` for `q <= b`, `psi_high` for `q > b`.
    Thresholded {
        b: usize,
        psi_low: Pmf,
        psi_high: Pmf,
    },
    /// `psis[q]` for `q < psis.len()`, `tail_psi` beyond.
    Tabulated { psis: Vec<Pmf>, tail_psi: Pmf },
}

/// Family of noise laws indexed by the queue length seen at departure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NoiseRepr", into = "NoiseRepr")]
pub struct NoiseModel {
    alphabet: Alphabet,
    kind: NoiseKind,
    // Distinct laws: index `min(q, tail_start)`.
    states: Vec<Pmf>,
    entropies: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum NoiseRepr {
    Thresholded {
        alphabet: u32,
        b: usize,
        psi_low: Vec<f64>,
        psi_high: Vec<f64>,
    },
    Tabulated {
        alphabet: u32,
        psis: Vec<Vec<f64>>,
        tail_psi: Vec<f64>,
    },
}

impl TryFrom<NoiseRepr> for NoiseModel {
    type Error = Error;
    fn try_from(r: NoiseRepr) -> Result<Self> {
        match r {
            NoiseRepr::Thresholded {
                alphabet,
                b,
                psi_low,
                psi_high,
            } => {
                let a = Alphabet::new(alphabet)?;
                NoiseModel::thresholded(a, b, symbol_pmf(a, psi_low)?, symbol_pmf(a, psi_high)?)
            }
            NoiseRepr::Tabulated {
                alphabet,
                psis,
                tail_psi,
            } => {
                let a = Alphabet::new(alphabet)?;
                let psis = psis
                    .into_iter()
                    .map(|p| symbol_pmf(a, p))
                    .collect::<Result<_>>()?;
                NoiseModel::tabulated(a, psis, symbol_pmf(a, tail_psi)?)
            }
        }
    }
}

impl From<NoiseModel> for NoiseRepr {
    fn from(nm: NoiseModel) -> Self {
        let n = nm.alphabet.size() as usize;
        let alphabet = nm.alphabet.size();
        match nm.kind {
            NoiseKind::Thresholded {
                b,
                psi_low,
                psi_high,
            } => NoiseRepr::Thresholded {
                alphabet,
                b,
                psi_low: psi_low.dense(n),
                psi_high: psi_high.dense(n),
            },
            NoiseKind::Tabulated { psis, tail_psi } => NoiseRepr::Tabulated {
                alphabet,
                psis: psis.iter().map(|p| p.dense(n)).collect(),
                tail_psi: tail_psi.dense(n),
            },
        }
    }
}

/// Noise law given as a dense vector over the alphabet.
pub fn symbol_pmf(alphabet: Alphabet, masses: Vec<f64>) -> Result<Pmf> {
    if masses.len() != alphabet.size() as usize {
        return Err(Error::InvalidDistribution(format!(
            "noise law has {} entries, alphabet has {}",
            masses.len(),
            alphabet.size()
        )));
    }
    Pmf::new(0, masses)
}

fn check_support(alphabet: Alphabet, psi: &Pmf) -> Result<()> {
    if psi.max_support() >= alphabet.size() as usize || psi.tail_bound() != 0.0 {
        return Err(Error::InvalidDistribution(format!(
            "noise law not supported on the {} alphabet symbols",
            alphabet.size()
        )));
    }
    Ok(())
}

impl NoiseModel {
    pub fn thresholded(alphabet: Alphabet, b: usize, psi_low: Pmf, psi_high: Pmf) -> Result<Self> {
        check_support(alphabet, &psi_low)?;
        check_support(alphabet, &psi_high)?;
        let mut states = vec![psi_low.clone(); b + 1];
        states.push(psi_high.clone());
        Ok(Self::build(
            alphabet,
            NoiseKind::Thresholded {
                b,
                psi_low,
                psi_high,
            },
            states,
        ))
    }

    pub fn tabulated(alphabet: Alphabet, psis: Vec<Pmf>, tail_psi: Pmf) -> Result<Self> {
        for p in psis.iter().chain(std::iter::once(&tail_psi)) {
            check_support(alphabet, p)?;
        }
        let mut states = psis.clone();
        states.push(tail_psi.clone());
        Ok(Self::build(
            alphabet,
            NoiseKind::Tabulated { psis, tail_psi },
            states,
        ))
    }

    /// Binary thresholded model with flip probabilities `p_low` (q <= b) and `p_high`.
    pub fn binary_flip(b: usize, p_low: f64, p_high: f64) -> Result<Self> {
        let a = Alphabet::new(2)?;
        NoiseModel::thresholded(
            a,
            b,
            symbol_pmf(a, vec![1.0 - p_low, p_low])?,
            symbol_pmf(a, vec![1.0 - p_high, p_high])?,
        )
    }

    /// Same noise law for every queue length.
    pub fn constant(alphabet: Alphabet, psi: Pmf) -> Result<Self> {
        NoiseModel::thresholded(alphabet, 0, psi.clone(), psi)
    }

    /// Point mass at zero for every queue length.
    pub fn noiseless(alphabet: Alphabet) -> Self {
        NoiseModel::constant(alphabet, Pmf::point(0)).expect("point mass is valid")
    }

    fn build(alphabet: Alphabet, kind: NoiseKind, states: Vec<Pmf>) -> Self {
        let entropies = states.iter().map(entropy).collect();
        NoiseModel {
            alphabet,
            kind,
            states,
            entropies,
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn kind(&self) -> &NoiseKind {
        &self.kind
    }

    /// First queue length from which the noise law no longer changes.
    pub fn tail_start(&self) -> usize {
        self.states.len() - 1
    }

    /// Index into the table of distinct laws for queue length `q`.
    pub fn state_index(&self, q: usize) -> usize {
        q.min(self.tail_start())
    }

    /// Distinct laws, indexed by [`NoiseModel::state_index`].
    pub fn states(&self) -> &[Pmf] {
        &self.states
    }

    pub fn psi(&self, q: usize) -> &Pmf {
        &self.states[self.state_index(q)]
    }

    /// `H(psi_q)` in bits.
    pub fn entropy_profile(&self, q: usize) -> f64 {
        self.entropies[self.state_index(q)]
    }

    /// True when every `psi_q` is the same law.
    pub fn is_constant(&self) -> bool {
        self.states
            .iter()
            .all(|p| p.tv_distance(&self.states[0]) <= NORMALIZATION_TOL)
    }

    /// `(h_0, h_{b+1})` for thresholded models.
    pub fn threshold_entropies(&self) -> Option<(usize, f64, f64)> {
        match &self.kind {
            NoiseKind::Thresholded {
                b,
                psi_low,
                psi_high,
            } => Some((*b, entropy(psi_low), entropy(psi_high))),
            NoiseKind::Tabulated { .. } => None,
        }
    }

    /// Whether the thresholded entropies increase across the threshold; warns otherwise.
    pub fn check_threshold_order(&self) -> bool {
        match self.threshold_entropies() {
            Some((b, h0, h1)) if h0 > h1 => {
                log::warn!("thresholded noise has H(psi_low)={h0} > H(psi_high)={h1} at b={b}");
                false
            }
            _ => true,
        }
    }

    /// `sum_q pi_q H(psi_q)` with the unresolved tail mass assigned the law beyond
    /// the truncation point. Returns `(value, unresolved_mass_at_non_constant_law)`.
    pub fn mean_entropy(&self, pi: &StationaryDist) -> (f64, f64) {
        let mut acc = CompensatedSum::new();
        for (q, p) in pi.masses().iter().enumerate() {
            acc.add(p * self.entropy_profile(q));
        }
        let k = pi.masses().len();
        let residual = pi.residual_mass();
        acc.add(residual * self.entropy_profile(k));
        let unresolved = if k < self.tail_start() { residual } else { 0.0 };
        (acc.value(), unresolved)
    }

    /// Stationary mixture `sum_q pi_q psi_q` over the alphabet.
    pub fn mixture(&self, pi: &StationaryDist) -> Pmf {
        let n = self.alphabet.size() as usize;
        let mut acc = vec![CompensatedSum::new(); n];
        let mut add = |weight: f64, psi: &Pmf| {
            for (z, p) in psi.iter() {
                acc[z].add(weight * p);
            }
        };
        let k = pi.masses().len();
        if k <= self.tail_start() {
            for (q, w) in pi.masses().iter().enumerate() {
                add(*w, self.psi(q));
            }
        } else {
            // Beyond tail_start every law is the same; fold those masses together.
            for (q, w) in pi.masses()[..self.tail_start()].iter().enumerate() {
                add(*w, self.psi(q));
            }
            let beyond = ksum(pi.masses()[self.tail_start()..].iter().copied());
            add(beyond, self.psi(self.tail_start()));
        }
        add(pi.residual_mass(), self.psi(k));
        let masses: Vec<f64> = acc.iter().map(|c| c.value().max(0.0)).collect();
        let total = ksum(masses.iter().copied());
        Pmf::from_parts(0, masses.into_iter().map(|m| m / total).collect(), 0.0)
    }
}

/// Free-function form of [`NoiseModel::entropy_profile`].
pub fn entropy_profile(nm: &NoiseModel, q: usize) -> f64 {
    nm.entropy_profile(q)
}

/// Free-function form of [`NoiseModel::mixture`].
pub fn mixture(nm: &NoiseModel, pi: &StationaryDist) -> Pmf {
    nm.mixture(pi)
}
