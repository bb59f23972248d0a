//! Diagonalized operators as finite frequency lists, and Sobolev norms on them.

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::io::{Read, Write};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One eigenvalue `λ ≥ 0` with its aggregated multiplicity/Plancherel weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDescriptor<T> {
    pub label: String,
    pub lambda: T,
    pub weight: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Torus,
    Su2,
    GradedAbstract,
    Custom,
}

/// Finite truncation of the spectrum, sorted by `(λ, label)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectrum<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct Spectrum<T> {
    kind: SpectrumKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    nu: Option<T>,
    modes: Vec<ModeDescriptor<T>>,
}

#[derive(Deserialize)]
struct RawSpectrum<T> {
    kind: SpectrumKind,
    #[serde(default)]
    nu: Option<T>,
    modes: Vec<ModeDescriptor<T>>,
}

impl<T: Real> TryFrom<RawSpectrum<T>> for Spectrum<T> {
    type Error = Error;
    fn try_from(raw: RawSpectrum<T>) -> Result<Self> {
        Spectrum::new(raw.kind, raw.nu, raw.modes)
    }
}

impl<T: Real> Spectrum<T> {
    pub fn new(kind: SpectrumKind, nu: Option<T>, mut modes: Vec<ModeDescriptor<T>>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Config("spectrum has no modes".into()));
        }
        if let Some(nu) = nu {
            if !(nu.is_finite() && nu > T::zero()) {
                return Err(Error::Config(format!("homogeneity degree {nu} must be positive")));
            }
        }
        let mut seen = HashSet::new();
        for m in &modes {
            if !(m.lambda.is_finite() && m.lambda >= T::zero()) {
                return Err(Error::Config(format!("mode '{}' has invalid frequency {}", m.label, m.lambda)));
            }
            if !(m.weight.is_finite() && m.weight > T::zero()) {
                return Err(Error::Config(format!("mode '{}' has nonpositive weight {}", m.label, m.weight)));
            }
            if !seen.insert(m.label.as_str()) {
                return Err(Error::Config(format!("duplicate mode label '{}'", m.label)));
            }
        }
        modes.sort_by(|a, b| {
            a.lambda.partial_cmp(&b.lambda).expect("finite frequencies").then_with(|| a.label.cmp(&b.label))
        });
        Ok(Self { kind, nu, modes })
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn nu(&self) -> Option<T> {
        self.nu
    }

    pub fn modes(&self) -> &[ModeDescriptor<T>] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Union with a spectrum carrying disjoint labels.
    pub fn union(&self, other: &Self) -> Result<Self> {
        let modes = self.modes.iter().chain(&other.modes).cloned().collect();
        Self::new(SpectrumKind::Custom, self.nu.or(other.nu), modes)
    }
}

/// Distinct `|k|` for `k ∈ ℤ^dim` with `|k|_∞ ≤ K`, weighted by lattice counts.
pub fn torus_spectrum<T: Real>(dim: usize, k_max: usize) -> Result<Spectrum<T>> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Config(format!("torus dimension {dim} not in 1..=3")));
    }
    if k_max == 0 {
        return Err(Error::Config("torus truncation K must be at least 1".into()));
    }
    let k = k_max as i64;
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let range = || -k..=k;
    let zs: Vec<i64> = if dim == 3 { range().collect() } else { vec![0] };
    let ys: Vec<i64> = if dim >= 2 { range().collect() } else { vec![0] };
    for x in range() {
        for &y in &ys {
            for &z in &zs {
                *counts.entry((x * x + y * y + z * z) as u64).or_default() += 1;
            }
        }
    }
    let modes = counts
        .into_iter()
        .map(|(r2, c)| ModeDescriptor {
            label: format!("r2={r2}"),
            lambda: T::from_u64(r2).expect("lattice norm fits").sqrt(),
            weight: T::from_u64(c).expect("lattice count fits"),
        })
        .collect();
    Spectrum::new(SpectrumKind::Torus, None, modes)
}

/// Casimir spectrum of SU(2): `λ_ℓ = √(ℓ(ℓ+1))` with weight `(2ℓ+1)³`.
pub fn su2_spectrum<T: Real>(l_max: usize) -> Result<Spectrum<T>> {
    let modes = (0..=l_max)
        .map(|l| {
            let lf = T::count(l);
            let d = T::count(2 * l + 1);
            ModeDescriptor { label: format!("l={l}"), lambda: (lf * (lf + T::one())).sqrt(), weight: d * d * d }
        })
        .collect();
    Spectrum::new(SpectrumKind::Su2, None, modes)
}

/// Spectrum from explicit `(λ, weight)` pairs, labelled `j=<index>`.
pub fn abstract_spectrum<T: Real>(entries: &[(T, T)], nu: Option<T>) -> Result<Spectrum<T>> {
    let modes = entries
        .iter()
        .enumerate()
        .map(|(j, &(lambda, weight))| ModeDescriptor { label: format!("j={j}"), lambda, weight })
        .collect();
    let kind = if nu.is_some() { SpectrumKind::GradedAbstract } else { SpectrumKind::Custom };
    Spectrum::new(kind, nu, modes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SobolevConvention {
    /// `(1 + λ²)^s`
    Inhomogeneous,
    /// `λ^{2s}`, zero modes excluded
    Homogeneous,
    /// `λ^{4s/ν}`, zero modes excluded
    Graded,
}

/// Per-mode Sobolev multiplier.
///
/// Returns [`Error::ZeroModeExcluded`] for `λ = 0` under the homogeneous and
/// graded conventions; callers skip such modes.
pub fn sobolev_weight<T: Real>(lambda: T, s: T, conv: SobolevConvention, nu: Option<T>) -> Result<T> {
    match conv {
        SobolevConvention::Inhomogeneous => Ok((T::one() + lambda * lambda).powf(s)),
        SobolevConvention::Homogeneous => {
            if lambda == T::zero() {
                return Err(Error::ZeroModeExcluded);
            }
            Ok(lambda.powf(T::lit(2.0) * s))
        }
        SobolevConvention::Graded => {
            let nu = nu.ok_or_else(|| Error::Config("graded convention needs a homogeneity degree".into()))?;
            if lambda == T::zero() {
                return Err(Error::ZeroModeExcluded);
            }
            Ok(lambda.powf(T::lit(4.0) * s / nu))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Position,
    Velocity,
}

/// Per-mode `(û, ∂ₜû)` aligned with a spectrum's mode order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState<T> {
    pub entries: Vec<(Complex<T>, Complex<T>)>,
}

impl<T: Real> SpectralState<T> {
    pub fn new(entries: Vec<(Complex<T>, Complex<T>)>) -> Result<Self> {
        if entries.iter().any(|(u, v)| !(u.re.is_finite() && u.im.is_finite() && v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Config("spectral state has non-finite entries".into()));
        }
        Ok(Self { entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self { entries: vec![(Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero())); n] }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self { entries: self.entries.iter().map(|(u, v)| (*u * c, *v * c)).collect() }
    }

    /// Writes `label,re_u,im_u,re_ut,im_ut` rows.
    pub fn write_csv<W: Write>(&self, spectrum: &Spectrum<T>, out: W) -> Result<()> {
        check_aligned(self, spectrum)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["label", "re_u", "im_u", "re_ut", "im_ut"])?;
        for (m, (u, v)) in spectrum.modes().iter().zip(&self.entries) {
            w.write_record([
                m.label.clone(),
                fmt_num(u.re),
                fmt_num(u.im),
                fmt_num(v.re),
                fmt_num(v.im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a CSV keyed by label; modes absent from the file start at rest.
    pub fn read_csv<R: Read>(spectrum: &Spectrum<T>, input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        let expected = ["label", "re_u", "im_u", "re_ut", "im_ut"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Config(format!("state CSV header must be {}", expected.join(","))));
        }
        let index: BTreeMap<&str, usize> =
            spectrum.modes().iter().enumerate().map(|(i, m)| (m.label.as_str(), i)).collect();
        let mut state = Self::zeros(spectrum.len());
        for rec in rdr.records() {
            let rec = rec?;
            let label = &rec[0];
            let i = *index
                .get(label)
                .ok_or_else(|| Error::Config(format!("state CSV label '{label}' not in spectrum")))?;
            let num = |k: usize| -> Result<T> {
                rec[k]
                    .trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::Config(format!("bad number '{}': {e}", &rec[k])))
            };
            state.entries[i] = (Complex::new(num(1)?, num(2)?), Complex::new(num(3)?, num(4)?));
        }
        Self::new(state.entries)
    }
}

/// Shortest round-trip scientific notation, as written to every CSV.
pub fn fmt_num<T: Real>(x: T) -> String {
    format!("{:e}", x.to_f64_lossy())
}

fn check_aligned<T: Real>(state: &SpectralState<T>, spectrum: &Spectrum<T>) -> Result<()> {
    if state.len() != spectrum.len() {
        return Err(Error::Contract(format!(
            "state has {} entries but spectrum has {} modes",
            state.len(),
            spectrum.len()
        )));
    }
    Ok(())
}

/// `√(Σ_j weight_j · w(λ_j, s) · |c_j|²)`, summed in mode order.
pub fn sobolev_norm<T: Real>(
    state: &SpectralState<T>,
    spectrum: &Spectrum<T>,
    s: T,
    conv: SobolevConvention,
    which: Component,
) -> Result<T> {
    check_aligned(state, spectrum)?;
    let coeffs = state.entries.iter().map(|(u, v)| match which {
        Component::Position => *u,
        Component::Velocity => *v,
    });
    weighted_norm(spectrum, coeffs, s, conv)
}

/// Sobolev norm of a coefficient sequence aligned with `spectrum`.
pub fn weighted_norm<T: Real>(
    spectrum: &Spectrum<T>,
    coeffs: impl Iterator<Item = Complex<T>>,
    s: T,
    conv: SobolevConvention,
) -> Result<T> {
    let mut acc = T::zero();
    for (m, c) in spectrum.modes().iter().zip(coeffs) {
        match sobolev_weight(m.lambda, s, conv, spectrum.nu()) {
            Ok(w) => acc += m.weight * w * c.norm_sqr(),
            Err(Error::ZeroModeExcluded) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(acc.sqrt())
}
