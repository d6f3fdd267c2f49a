//! Tabulated complex refractive-index data and the material catalog.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaterialError {
    #[error("dispersion table needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("column lengths differ: {wavelengths} wavelengths, {n} n values, {k} k values")]
    LengthMismatch { wavelengths: usize, n: usize, k: usize },
    #[error("wavelengths must be positive and strictly increasing (sample {index})")]
    NotIncreasing { index: usize },
    #[error("non-physical sample {index}: n = {n}, k = {k} (need n > 0, k >= 0)")]
    NonPhysical { index: usize, n: f64, k: f64 },
    #[error("wavelength {wavelength_nm} nm outside data range [{min}, {max}] nm")]
    OutOfRange { wavelength_nm: f64, min: f64, max: f64 },
    #[error("material `{name}`: {source}")]
    InMaterial {
        name: String,
        #[source]
        source: alloc::boxed::Box<MaterialError>,
    },
    #[error("duplicate material name `{0}`")]
    DuplicateName(String),
    #[error("no materials found")]
    Empty,
    #[error("materials share no common wavelength range")]
    NoCommonSupport,
    #[error("unknown material id {0}")]
    UnknownId(usize),
    #[error("unknown material `{name}` (closest: {})", suggestions.join(", "))]
    UnknownName { name: String, suggestions: Vec<String> },
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
}

impl MaterialError {
    fn in_material(self, name: &str) -> Self {
        MaterialError::InMaterial { name: name.to_string(), source: alloc::boxed::Box::new(self) }
    }
}

/// Index of a material inside a [`MaterialDb`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MaterialId(pub usize);

impl fmt::Display for MaterialId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Coarse material class. Only used to judge embedding quality, never by
/// the optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Metal,
    Alloy,
    Semiconductor,
    Dielectric,
    Transparent,
    Other,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Metal,
        Category::Alloy,
        Category::Semiconductor,
        Category::Dielectric,
        Category::Transparent,
        Category::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Metal => "Metal",
            Category::Alloy => "Alloy",
            Category::Semiconductor => "Semiconductor",
            Category::Dielectric => "Dielectric",
            Category::Transparent => "Transparent",
            Category::Other => "Other",
        }
    }

    /// Three-way grouping used for clustering scores: metals and alloys,
    /// absorbing non-metals, transparent materials. `None` for `Other`.
    pub fn macro_group(self) -> Option<usize> {
        match self {
            Category::Metal | Category::Alloy => Some(0),
            Category::Semiconductor | Category::Dielectric => Some(1),
            Category::Transparent => Some(2),
            Category::Other => None,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = MaterialError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| MaterialError::UnknownCategory(s.to_string()))
    }
}

/// Tabulated n(λ), k(λ) with linear interpolation and no extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionTable {
    wavelengths_nm: Vec<f64>,
    n: Vec<f64>,
    k: Vec<f64>,
}

impl DispersionTable {
    pub fn new(wavelengths_nm: Vec<f64>, n: Vec<f64>, k: Vec<f64>) -> Result<Self, MaterialError> {
        if wavelengths_nm.len() != n.len() || n.len() != k.len() {
            return Err(MaterialError::LengthMismatch {
                wavelengths: wavelengths_nm.len(),
                n: n.len(),
                k: k.len(),
            });
        }
        if wavelengths_nm.len() < 2 {
            return Err(MaterialError::TooFewSamples(wavelengths_nm.len()));
        }
        for (i, &w) in wavelengths_nm.iter().enumerate() {
            let ok = w.is_finite() && w > 0.0 && (i == 0 || w > wavelengths_nm[i - 1]);
            if !ok {
                return Err(MaterialError::NotIncreasing { index: i });
            }
        }
        for (i, (&nv, &kv)) in n.iter().zip(&k).enumerate() {
            if !(nv.is_finite() && kv.is_finite() && nv > 0.0 && kv >= 0.0) {
                return Err(MaterialError::NonPhysical { index: i, n: nv, k: kv });
            }
        }
        Ok(Self { wavelengths_nm, n, k })
    }

    /// A wavelength-independent index valid on `[min_nm, max_nm]`.
    pub fn constant(index: Complex64, min_nm: f64, max_nm: f64) -> Result<Self, MaterialError> {
        Self::new(
            alloc::vec![min_nm, max_nm],
            alloc::vec![index.re, index.re],
            alloc::vec![index.im, index.im],
        )
    }

    pub fn wavelengths_nm(&self) -> &[f64] {
        &self.wavelengths_nm
    }

    pub fn n(&self) -> &[f64] {
        &self.n
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.wavelengths_nm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths_nm.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.wavelengths_nm[0], self.wavelengths_nm[self.wavelengths_nm.len() - 1])
    }

    /// Complex index n + ik at `wavelength_nm`.
    pub fn index_at(&self, wavelength_nm: f64) -> Result<Complex64, MaterialError> {
        let (min, max) = self.range();
        if !(wavelength_nm >= min && wavelength_nm <= max) {
            return Err(MaterialError::OutOfRange { wavelength_nm, min, max });
        }
        let w = &self.wavelengths_nm;
        // first sample strictly greater than λ; clamp so that λ = max uses the last segment
        let hi = w.partition_point(|&x| x <= wavelength_nm).min(w.len() - 1);
        let lo = hi - 1;
        if wavelength_nm == w[lo] {
            return Ok(Complex64::new(self.n[lo], self.k[lo]));
        }
        if wavelength_nm == w[hi] {
            return Ok(Complex64::new(self.n[hi], self.k[hi]));
        }
        let t = (wavelength_nm - w[lo]) / (w[hi] - w[lo]);
        let n = self.n[lo] + t * (self.n[hi] - self.n[lo]);
        let k = self.k[lo] + t * (self.k[hi] - self.k[lo]);
        Ok(Complex64::new(n, k))
    }

    /// Interpolated n and k columns on `grid`.
    pub fn resample(&self, grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>), MaterialError> {
        let mut n = Vec::with_capacity(grid.len());
        let mut k = Vec::with_capacity(grid.len());
        for &w in grid {
            let idx = self.index_at(w)?;
            n.push(idx.re);
            k.push(idx.im);
        }
        Ok((n, k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialRecord {
    pub id: MaterialId,
    pub name: String,
    pub category: Category,
    pub dispersion: DispersionTable,
}

impl MaterialRecord {
    pub fn refractive_index(&self, wavelength_nm: f64) -> Result<Complex64, MaterialError> {
        self.dispersion
            .index_at(wavelength_nm)
            .map_err(|e| e.in_material(&self.name))
    }

    pub fn resample(&self, grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>), MaterialError> {
        self.dispersion.resample(grid).map_err(|e| e.in_material(&self.name))
    }
}

/// Immutable material catalog. Ids are dense, `0..len()`, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialDb {
    records: Vec<MaterialRecord>,
    support: (f64, f64),
}

impl MaterialDb {
    /// Builds a catalog from `(name, category, table)` entries, assigning ids
    /// in order.
    pub fn new<I>(entries: I) -> Result<Self, MaterialError>
    where
        I: IntoIterator<Item = (String, Category, DispersionTable)>,
    {
        let mut records: Vec<MaterialRecord> = Vec::new();
        for (name, category, dispersion) in entries {
            if records.iter().any(|r| r.name == name) {
                return Err(MaterialError::DuplicateName(name));
            }
            records.push(MaterialRecord { id: MaterialId(records.len()), name, category, dispersion });
        }
        if records.is_empty() {
            return Err(MaterialError::Empty);
        }
        let lo = records.iter().map(|r| r.dispersion.range().0).fold(f64::NEG_INFINITY, f64::max);
        let hi = records.iter().map(|r| r.dispersion.range().1).fold(f64::INFINITY, f64::min);
        if lo >= hi {
            return Err(MaterialError::NoCommonSupport);
        }
        Ok(Self { records, support: (lo, hi) })
    }

    pub fn records(&self) -> &[MaterialRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `[λ_min, λ_max]` on which every material has data.
    pub fn wavelength_support(&self) -> (f64, f64) {
        self.support
    }

    pub fn get(&self, id: MaterialId) -> Result<&MaterialRecord, MaterialError> {
        self.records.get(id.0).ok_or(MaterialError::UnknownId(id.0))
    }

    pub fn find(&self, name: &str) -> Option<&MaterialRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    /// Looks a material up by name; the error lists the closest names.
    pub fn by_name(&self, name: &str) -> Result<&MaterialRecord, MaterialError> {
        self.find(name).ok_or_else(|| MaterialError::UnknownName {
            name: name.to_string(),
            suggestions: self.suggest(name, 3),
        })
    }

    /// Up to `count` catalog names ordered by edit distance to `name`.
    pub fn suggest(&self, name: &str, count: usize) -> Vec<String> {
        let lowered = name.to_lowercase();
        let mut scored: Vec<(usize, &str)> = self
            .records
            .iter()
            .map(|r| (edit_distance(&lowered, &r.name.to_lowercase()), r.name.as_str()))
            .collect();
        scored.sort();
        scored.into_iter().take(count).map(|(_, n)| n.to_string()).collect()
    }

    pub fn refractive_index(&self, id: MaterialId, wavelength_nm: f64) -> Result<Complex64, MaterialError> {
        self.get(id)?.refractive_index(wavelength_nm)
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0; b.len() + 1];
    for (i, ca) in a.chars().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
