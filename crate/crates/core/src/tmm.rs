//! Transfer-matrix solver for planar multilayers and the spectral merit
//! functions.
//!
//! Internally the thin-film (Macleod) sign convention is used: a physical
//! index `n + ik` enters the matrices as `N = n - ik`, which makes the
//! characteristic matrix `[[cos δ, i sin δ / η], [i η sin δ, cos δ]]` passive.
//! Admittances are in units of the free-space admittance.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::material::{MaterialDb, MaterialError, MaterialId};

/// Tolerance for round-off when clamping R, T and A into `[0, 1]`.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TmmError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("angle {0}° is not in [0, 90)")]
    GrazingIncidence(f64),
    #[error("layer thickness must be positive and finite, got {0} nm")]
    BadThickness(f64),
    #[error("wavelength must be positive, got {0} nm")]
    BadWavelength(f64),
    #[error("stack has no layers")]
    EmptyStack,
    #[error("no incidence angles given")]
    NoAngles,
    #[error("wavelength grids differ (spectrum {spectrum} points, target {target} points)")]
    GridMismatch { spectrum: usize, target: usize },
    #[error("target arrays must have equal lengths and at least one non-zero weight")]
    BadTarget,
    #[error("non-passive result at {wavelength_nm} nm: R = {reflection}, T = {transmission}")]
    NonPassive { wavelength_nm: f64, reflection: f64, transmission: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    S,
    P,
    Unpolarized,
}

/// A single linear polarization state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Linear {
    S,
    P,
}

impl Polarization {
    fn components(self) -> &'static [Linear] {
        match self {
            Polarization::S => &[Linear::S],
            Polarization::P => &[Linear::P],
            Polarization::Unpolarized => &[Linear::S, Linear::P],
        }
    }
}

/// Incident or exit medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Medium {
    Material(MaterialId),
    /// Fixed physical index `n + ik`.
    Index(Complex64),
}

impl Medium {
    pub const VACUUM: Medium = Medium::Index(Complex64::new(1.0, 0.0));

    fn index(&self, db: &MaterialDb, wavelength_nm: f64) -> Result<Complex64, MaterialError> {
        match *self {
            Medium::Material(id) => db.refractive_index(id, wavelength_nm),
            Medium::Index(n) => Ok(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub material: MaterialId,
    pub thickness_nm: f64,
}

/// Incident medium, layers listed from the light-incident side, and a
/// semi-infinite substrate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stack {
    pub incident: Medium,
    pub layers: Vec<Layer>,
    pub substrate: Medium,
}

impl Stack {
    pub fn new(incident: Medium, layers: Vec<Layer>, substrate: Medium) -> Result<Self, TmmError> {
        if layers.is_empty() {
            return Err(TmmError::EmptyStack);
        }
        if let Some(bad) = layers.iter().find(|l| !(l.thickness_nm.is_finite() && l.thickness_nm > 0.0)) {
            return Err(TmmError::BadThickness(bad.thickness_nm));
        }
        Ok(Self { incident, layers, substrate })
    }

    fn check_materials(&self, db: &MaterialDb) -> Result<(), TmmError> {
        let media = [self.incident, self.substrate];
        for m in media.iter() {
            if let Medium::Material(id) = m {
                db.get(*id)?;
            }
        }
        for l in &self.layers {
            db.get(l.material)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceSpec {
    pub angles_deg: Vec<f64>,
    pub polarization: Polarization,
}

impl IncidenceSpec {
    pub fn normal() -> Self {
        Self { angles_deg: alloc::vec![0.0], polarization: Polarization::Unpolarized }
    }

    pub fn validate(&self) -> Result<(), TmmError> {
        if self.angles_deg.is_empty() {
            return Err(TmmError::NoAngles);
        }
        for &a in &self.angles_deg {
            check_angle(a)?;
        }
        Ok(())
    }
}

impl Default for IncidenceSpec {
    fn default() -> Self {
        Self::normal()
    }
}

fn check_angle(angle_deg: f64) -> Result<(), TmmError> {
    if (0.0..90.0).contains(&angle_deg) {
        Ok(())
    } else {
        Err(TmmError::GrazingIncidence(angle_deg))
    }
}

/// Which part of the optical response a target constrains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    #[default]
    Absorption,
    Reflection,
    Transmission,
}

/// A/R/T on a wavelength grid for one angle of incidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub angle_deg: f64,
    pub wavelengths_nm: Vec<f64>,
    pub absorption: Vec<f64>,
    pub reflection: Vec<f64>,
    pub transmission: Vec<f64>,
}

impl Spectrum {
    pub fn quantity(&self, q: Quantity) -> &[f64] {
        match q {
            Quantity::Absorption => &self.absorption,
            Quantity::Reflection => &self.reflection,
            Quantity::Transmission => &self.transmission,
        }
    }

    /// Mean absorption over samples with `lo <= λ <= hi`.
    pub fn band_average_absorption(&self, lo: f64, hi: f64) -> Option<f64> {
        let (sum, count) = self
            .wavelengths_nm
            .iter()
            .zip(&self.absorption)
            .filter(|(w, _)| **w >= lo && **w <= hi)
            .fold((0.0, 0usize), |(s, c), (_, a)| (s + a, c + 1));
        (count > 0).then(|| sum / count as f64)
    }
}

/// Desired spectrum and per-wavelength weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpectrum {
    pub wavelengths_nm: Vec<f64>,
    pub target: Vec<f64>,
    pub weights: Vec<f64>,
    #[serde(default)]
    pub quantity: Quantity,
}

impl TargetSpectrum {
    pub fn new(wavelengths_nm: Vec<f64>, target: Vec<f64>, weights: Vec<f64>, quantity: Quantity) -> Result<Self, TmmError> {
        let t = Self { wavelengths_nm, target, weights, quantity };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), TmmError> {
        let n = self.wavelengths_nm.len();
        let ok = n > 0
            && self.target.len() == n
            && self.weights.len() == n
            && self.weights.iter().all(|w| w.is_finite() && *w >= 0.0)
            && self.weights.iter().any(|w| *w > 0.0);
        if ok {
            Ok(())
        } else {
            Err(TmmError::BadTarget)
        }
    }

    /// Unit absorption on `[band_lo, band_hi]`, zero elsewhere, on a uniform
    /// grid from `start` to `end` inclusive with spacing `step`, uniform weights.
    pub fn band_absorber(start: f64, end: f64, step: f64, band_lo: f64, band_hi: f64) -> Self {
        let count = ((end - start) / step).round() as usize + 1;
        let wavelengths_nm: Vec<f64> = (0..count).map(|i| start + step * i as f64).collect();
        let target = wavelengths_nm
            .iter()
            .map(|&w| if w >= band_lo && w <= band_hi { 1.0 } else { 0.0 })
            .collect();
        let weights = alloc::vec![1.0; count];
        Self { wavelengths_nm, target, weights, quantity: Quantity::Absorption }
    }

    /// Default solar selective absorber target: 250–2500 nm in 5 nm steps,
    /// full absorption up to 800 nm and none beyond.
    pub fn solar_absorber() -> Self {
        Self::band_absorber(250.0, 2500.0, 5.0, 250.0, 800.0)
    }
}

/// Column-major free 2×2 complex matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Matrix2 {
    pub const IDENTITY: Matrix2 = Matrix2 {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
        d: Complex64::new(1.0, 0.0),
    };

    pub fn mul(&self, o: &Matrix2) -> Matrix2 {
        Matrix2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn max_abs_diff(&self, o: &Matrix2) -> f64 {
        [(self.a - o.a), (self.b - o.b), (self.c - o.c), (self.d - o.d)]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Direction and polarization of the incoming plane wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    /// Physical index `n + ik` of the incident medium.
    pub incident_index: Complex64,
    pub angle_deg: f64,
    pub polarization: Linear,
}

impl Ray {
    pub fn normal(polarization: Linear) -> Self {
        Self { incident_index: Complex64::new(1.0, 0.0), angle_deg: 0.0, polarization }
    }

    /// `N0 sin θ0`, conserved across interfaces.
    fn invariant(&self) -> Complex64 {
        let theta = self.angle_deg.to_radians();
        self.incident_index.conj() * theta.sin()
    }
}

/// `N cos θ` inside a medium of physical index `index` (Macleod convention),
/// on the branch that decays into the medium.
fn n_cos(index: Complex64, invariant: Complex64) -> Complex64 {
    let big_n = index.conj();
    let nc = (big_n * big_n - invariant * invariant).sqrt();
    // decaying/outgoing branch: Im < 0, or Re > 0 when lossless
    if nc.im > 1e-15 || (nc.im.abs() <= 1e-15 && nc.re < 0.0) {
        -nc
    } else {
        nc
    }
}

/// Tilted admittance of a medium, and the phase factor `N cos θ` for δ.
fn admittance(index: Complex64, ray: &Ray) -> (Complex64, Complex64) {
    let nc = n_cos(index, ray.invariant());
    let eta = match ray.polarization {
        Linear::S => nc,
        Linear::P => {
            let big_n = index.conj();
            big_n * big_n / nc
        }
    };
    (eta, nc)
}

fn layer_matrix(eta: Complex64, n_cos_theta: Complex64, thickness_nm: f64, wavelength_nm: f64) -> Matrix2 {
    let delta = n_cos_theta * (2.0 * PI * thickness_nm / wavelength_nm);
    let (cos, sin) = (delta.cos(), delta.sin());
    let i = Complex64::i();
    Matrix2 { a: cos, b: i * sin / eta, c: i * eta * sin, d: cos }
}

/// Characteristic matrix of one homogeneous layer.
pub fn characteristic_matrix(
    index: Complex64,
    thickness_nm: f64,
    wavelength_nm: f64,
    ray: &Ray,
) -> Result<Matrix2, TmmError> {
    if !(thickness_nm.is_finite() && thickness_nm >= 0.0) {
        return Err(TmmError::BadThickness(thickness_nm));
    }
    if !(wavelength_nm.is_finite() && wavelength_nm > 0.0) {
        return Err(TmmError::BadWavelength(wavelength_nm));
    }
    check_angle(ray.angle_deg)?;
    let (eta, nc) = admittance(index, ray);
    Ok(layer_matrix(eta, nc, thickness_nm, wavelength_nm))
}

/// R, T, A at one wavelength for one linear polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub reflection: f64,
    pub transmission: f64,
    pub absorption: f64,
}

/// Solves a stack given the physical indices of incident medium, layers and
/// substrate at a single wavelength.
pub fn solve(
    incident: Complex64,
    layers: &[(Complex64, f64)],
    substrate: Complex64,
    wavelength_nm: f64,
    angle_deg: f64,
    polarization: Linear,
) -> Response {
    let ray = Ray { incident_index: incident, angle_deg, polarization };
    let (eta0, _) = admittance(incident, &ray);
    let (eta_s, _) = admittance(substrate, &ray);
    let mut m = Matrix2::IDENTITY;
    for &(index, d) in layers {
        let (eta, nc) = admittance(index, &ray);
        m = m.mul(&layer_matrix(eta, nc, d, wavelength_nm));
    }
    let b = m.a + m.b * eta_s;
    let c = m.c + m.d * eta_s;
    let denom = eta0 * b + c;
    let r = (eta0 * b - c) / denom;
    let reflection = r.norm_sqr();
    let transmission = 4.0 * eta0.re * eta_s.re / denom.norm_sqr();
    Response { reflection, transmission, absorption: 1.0 - reflection - transmission }
}

fn clamp_unit(value: f64) -> Option<f64> {
    if !(-CLAMP_TOLERANCE..=1.0 + CLAMP_TOLERANCE).contains(&value) {
        None
    } else {
        Some(value.clamp(0.0, 1.0))
    }
}

/// Averages the requested polarizations and clamps round-off into `[0, 1]`.
fn finish(responses: &[Response], wavelength_nm: f64) -> Result<(f64, f64, f64), TmmError> {
    let count = responses.len() as f64;
    let r = responses.iter().map(|x| x.reflection).sum::<f64>() / count;
    let t = responses.iter().map(|x| x.transmission).sum::<f64>() / count;
    let a = 1.0 - r - t;
    match (clamp_unit(r), clamp_unit(t), clamp_unit(a)) {
        (Some(r), Some(t), Some(a)) => Ok((a, r, t)),
        _ => Err(TmmError::NonPassive { wavelength_nm, reflection: r, transmission: t }),
    }
}

/// Indices of every medium in a stack, tabulated once on a wavelength grid.
///
/// Evaluating many thickness vectors for the same materials (the GA inner
/// loop) only needs the matrix products.
#[derive(Debug, Clone)]
pub struct PreparedStack {
    wavelengths_nm: Vec<f64>,
    incident: Vec<Complex64>,
    layers: Vec<Vec<Complex64>>,
    substrate: Vec<Complex64>,
}

impl PreparedStack {
    pub fn new(
        incident: Medium,
        materials: &[MaterialId],
        substrate: Medium,
        grid: &[f64],
        db: &MaterialDb,
    ) -> Result<Self, TmmError> {
        if materials.is_empty() {
            return Err(TmmError::EmptyStack);
        }
        if let Some(&bad) = grid.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(TmmError::BadWavelength(bad));
        }
        let tabulate = |m: Medium| -> Result<Vec<Complex64>, TmmError> {
            grid.iter().map(|&w| m.index(db, w).map_err(TmmError::from)).collect()
        };
        let layers = materials
            .iter()
            .map(|&id| tabulate(Medium::Material(id)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            wavelengths_nm: grid.to_vec(),
            incident: tabulate(incident)?,
            layers,
            substrate: tabulate(substrate)?,
        })
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn wavelengths_nm(&self) -> &[f64] {
        &self.wavelengths_nm
    }

    /// Spectra (one per angle) for the given thicknesses.
    pub fn spectra(&self, thicknesses_nm: &[f64], incidence: &IncidenceSpec) -> Result<Vec<Spectrum>, TmmError> {
        incidence.validate()?;
        assert_eq!(thicknesses_nm.len(), self.layers.len(), "one thickness per layer");
        if let Some(&bad) = thicknesses_nm.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(TmmError::BadThickness(bad));
        }
        let pols = incidence.polarization.components();
        let mut out = Vec::with_capacity(incidence.angles_deg.len());
        let mut layer_buf: Vec<(Complex64, f64)> = Vec::with_capacity(self.layers.len());
        for &angle in &incidence.angles_deg {
            let n = self.wavelengths_nm.len();
            let mut spec = Spectrum {
                angle_deg: angle,
                wavelengths_nm: self.wavelengths_nm.clone(),
                absorption: Vec::with_capacity(n),
                reflection: Vec::with_capacity(n),
                transmission: Vec::with_capacity(n),
            };
            for (i, &w) in self.wavelengths_nm.iter().enumerate() {
                layer_buf.clear();
                layer_buf.extend(self.layers.iter().zip(thicknesses_nm).map(|(idx, &d)| (idx[i], d)));
                let mut responses = [Response { reflection: 0.0, transmission: 0.0, absorption: 0.0 }; 2];
                for (slot, &pol) in pols.iter().enumerate() {
                    responses[slot] = solve(self.incident[i], &layer_buf, self.substrate[i], w, angle, pol);
                }
                let (a, r, t) = finish(&responses[..pols.len()], w)?;
                spec.absorption.push(a);
                spec.reflection.push(r);
                spec.transmission.push(t);
            }
            out.push(spec);
        }
        Ok(out)
    }
}

/// Spectra of `stack` on `grid`, one entry per angle in `incidence`.
pub fn spectrum(
    stack: &Stack,
    grid: &[f64],
    incidence: &IncidenceSpec,
    db: &MaterialDb,
) -> Result<Vec<Spectrum>, TmmError> {
    stack.check_materials(db)?;
    let materials: Vec<MaterialId> = stack.layers.iter().map(|l| l.material).collect();
    let thicknesses: Vec<f64> = stack.layers.iter().map(|l| l.thickness_nm).collect();
    PreparedStack::new(stack.incident, &materials, stack.substrate, grid, db)?.spectra(&thicknesses, incidence)
}

fn check_grid(spectra: &[Spectrum], target: &TargetSpectrum) -> Result<(), TmmError> {
    target.validate()?;
    if spectra.is_empty() {
        return Err(TmmError::NoAngles);
    }
    for s in spectra {
        let same = s.wavelengths_nm.len() == target.wavelengths_nm.len()
            && s.wavelengths_nm
                .iter()
                .zip(&target.wavelengths_nm)
                .all(|(a, b)| (a - b).abs() <= 1e-9 * b.abs().max(1.0));
        if !same {
            return Err(TmmError::GridMismatch { spectrum: s.wavelengths_nm.len(), target: target.wavelengths_nm.len() });
        }
    }
    Ok(())
}

/// Sum of squared deviations from the target over the grid, averaged over
/// angles. Zero only for an exact match.
pub fn merit(spectra: &[Spectrum], target: &TargetSpectrum) -> Result<f64, TmmError> {
    check_grid(spectra, target)?;
    let total: f64 = spectra
        .iter()
        .map(|s| {
            s.quantity(target.quantity)
                .iter()
                .zip(&target.target)
                .map(|(v, t)| (v - t) * (v - t))
                .sum::<f64>()
        })
        .sum();
    Ok(total / spectra.len() as f64)
}

/// Weighted absolute deviation `Σ_{λ,θ} W(λ) |S − S*|`, summed (not averaged)
/// over angles.
pub fn observation_error(spectra: &[Spectrum], target: &TargetSpectrum) -> Result<f64, TmmError> {
    check_grid(spectra, target)?;
    Ok(spectra
        .iter()
        .map(|s| {
            s.quantity(target.quantity)
                .iter()
                .zip(&target.target)
                .zip(&target.weights)
                .map(|((v, t), w)| w * (v - t).abs())
                .sum::<f64>()
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{Category, DispersionTable};
    use alloc::string::String;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent direct evaluation: cos/sin from complex exponentials.
    fn direct_matrix(index: Complex64, d: f64, lambda: f64) -> Matrix2 {
        let n = index.conj();
        let delta = n * (2.0 * PI * d / lambda);
        let i = Complex64::i();
        let e_plus = (i * delta).exp();
        let e_minus = (-i * delta).exp();
        let cos = (e_plus + e_minus) / 2.0;
        let sin = (e_plus - e_minus) / (2.0 * i);
        Matrix2 { a: cos, b: i * sin / n, c: i * n * sin, d: cos }
    }

    #[test]
    fn zero_thickness_is_identity() {
        let m = characteristic_matrix(c(2.3, 0.4), 0.0, 500.0, &Ray::normal(Linear::S)).unwrap();
        assert!(m.max_abs_diff(&Matrix2::IDENTITY) < 1e-15);
    }

    #[test]
    fn quarter_wave_matrix() {
        let m = characteristic_matrix(c(2.0, 0.0), 500.0 / 8.0, 500.0, &Ray::normal(Linear::S)).unwrap();
        let expected = Matrix2 { a: c(0.0, 0.0), b: c(0.0, 0.5), c: c(0.0, 2.0), d: c(0.0, 0.0) };
        assert!(m.max_abs_diff(&expected) < 1e-12, "{m:?}");
    }

    #[test]
    fn absorbing_layer_matches_direct_evaluation() {
        let index = c(2.0, 1.0);
        let m = characteristic_matrix(index, 100.0, 500.0, &Ray::normal(Linear::P)).unwrap();
        let oracle = direct_matrix(index, 100.0, 500.0);
        assert!(m.max_abs_diff(&oracle) < 1e-12);
        // unimodular
        let det = m.a * m.d - m.b * m.c;
        assert!((det - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn grazing_angle_rejected() {
        let ray = Ray { incident_index: c(1.0, 0.0), angle_deg: 90.0, polarization: Linear::S };
        assert!(matches!(characteristic_matrix(c(1.5, 0.0), 10.0, 500.0, &ray), Err(TmmError::GrazingIncidence(_))));
    }

    #[test]
    fn bare_glass_fresnel() {
        // vanishingly thin vacuum layer on glass
        let r = solve(c(1.0, 0.0), &[(c(1.0, 0.0), 1e-9)], c(1.5, 0.0), 550.0, 0.0, Linear::S);
        let fresnel = ((1.5f64 - 1.0) / (1.5 + 1.0)).powi(2);
        assert!((r.reflection - fresnel).abs() < 1e-12);
        assert!((r.reflection - 0.04).abs() < 1e-12);
        assert!((r.transmission - 0.96).abs() < 1e-12);
        assert!(r.absorption.abs() < 1e-12);
    }

    #[test]
    fn quarter_wave_antireflection() {
        let (nf, ns) = (1.38f64, 1.5f64);
        let r = solve(c(1.0, 0.0), &[(c(nf, 0.0), 550.0 / (4.0 * nf))], c(ns, 0.0), 550.0, 0.0, Linear::S);
        let analytic = ((ns - nf * nf) / (ns + nf * nf)).powi(2);
        assert!((r.reflection - analytic).abs() < 1e-12);
    }

    #[test]
    fn index_matched_layer_is_invisible() {
        let bare = solve(c(1.0, 0.0), &[(c(1.0, 0.0), 1e-9)], c(1.7, 0.2), 600.0, 0.0, Linear::S);
        let matched = solve(c(1.0, 0.0), &[(c(1.7, 0.2), 1e-9)], c(1.7, 0.2), 600.0, 0.0, Linear::S);
        assert!((bare.reflection - matched.reflection).abs() < 1e-12);
        for d in [1.0, 50.0, 333.0] {
            let m = solve(c(1.0, 0.0), &[(c(1.5, 0.0), d)], c(1.5, 0.0), 600.0, 0.0, Linear::S);
            assert!((m.reflection - 0.04).abs() < 1e-12);
            assert!((m.transmission - 0.96).abs() < 1e-12);
        }
    }

    #[test]
    fn s_and_p_agree_at_normal_incidence() {
        let layers = [(c(2.1, 0.3), 40.0), (c(1.4, 0.0), 90.0), (c(0.2, 3.5), 20.0)];
        let s = solve(c(1.0, 0.0), &layers, c(1.5, 0.0), 633.0, 0.0, Linear::S);
        let p = solve(c(1.0, 0.0), &layers, c(1.5, 0.0), 633.0, 0.0, Linear::P);
        assert!((s.reflection - p.reflection).abs() < 1e-12);
        assert!((s.transmission - p.transmission).abs() < 1e-12);
    }

    #[test]
    fn brewster_angle_kills_p_reflection() {
        let theta = 1.5f64.atan().to_degrees();
        let p = solve(c(1.0, 0.0), &[(c(1.0, 0.0), 1e-9)], c(1.5, 0.0), 500.0, theta, Linear::P);
        let s = solve(c(1.0, 0.0), &[(c(1.0, 0.0), 1e-9)], c(1.5, 0.0), 500.0, theta, Linear::S);
        assert!(p.reflection < 1e-20);
        assert!(s.reflection > 0.1);
    }

    #[test]
    fn total_internal_reflection() {
        // glass to air beyond the critical angle, via a thick spacer
        let r = solve(c(1.5, 0.0), &[(c(1.5, 0.0), 100.0)], c(1.0, 0.0), 500.0, 60.0, Linear::S);
        assert!((r.reflection - 1.0).abs() < 1e-12);
        assert!(r.transmission.abs() < 1e-12);
    }

    #[test]
    fn thick_metal_is_opaque() {
        let r = solve(c(1.0, 0.0), &[(c(0.2, 3.0), 500.0)], c(1.5, 0.0), 600.0, 0.0, Linear::S);
        assert!(r.transmission < 1e-9);
        assert!(r.absorption > 0.0 && r.absorption < 0.2);
    }

    fn db() -> MaterialDb {
        let t = |n: Complex64| DispersionTable::constant(n, 200.0, 3000.0).unwrap();
        MaterialDb::new(vec![
            (String::from("glass"), Category::Transparent, t(c(1.5, 0.0))),
            (String::from("MgF2"), Category::Transparent, t(c(1.38, 0.0))),
            (String::from("metal"), Category::Metal, t(c(0.5, 3.0))),
        ])
        .unwrap()
    }

    #[test]
    fn spectrum_and_merit() {
        let db = db();
        let stack = Stack::new(
            Medium::VACUUM,
            vec![Layer { material: MaterialId(2), thickness_nm: 30.0 }],
            Medium::Material(MaterialId(0)),
        )
        .unwrap();
        let grid: Vec<f64> = (0..100).map(|i| 400.0 + 3.0 * i as f64).collect();
        let spectra = spectrum(&stack, &grid, &IncidenceSpec::normal(), &db).unwrap();
        assert_eq!(spectra.len(), 1);
        for i in 0..grid.len() {
            let s = &spectra[0];
            assert!((s.absorption[i] + s.reflection[i] + s.transmission[i] - 1.0).abs() < 1e-9);
        }

        let mut zero = spectra[0].clone();
        zero.absorption.iter_mut().for_each(|a| *a = 0.0);
        let ones = TargetSpectrum::new(grid.clone(), vec![1.0; 100], vec![1.0; 100], Quantity::Absorption).unwrap();
        assert!((merit(&[zero], &ones).unwrap() - 100.0).abs() < 1e-12);

        let exact = TargetSpectrum::new(grid.clone(), spectra[0].absorption.clone(), vec![1.0; 100], Quantity::Absorption).unwrap();
        assert_eq!(merit(&spectra, &exact).unwrap(), 0.0);
        assert_eq!(observation_error(&spectra, &exact).unwrap(), 0.0);

        let short = TargetSpectrum::new(grid[..50].to_vec(), vec![0.0; 50], vec![1.0; 50], Quantity::Absorption).unwrap();
        assert!(matches!(merit(&spectra, &short), Err(TmmError::GridMismatch { .. })));
    }

    #[test]
    fn observation_error_half_everywhere() {
        let grid: Vec<f64> = (0..10).map(|i| 500.0 + i as f64).collect();
        let s = Spectrum {
            angle_deg: 0.0,
            wavelengths_nm: grid.clone(),
            absorption: vec![0.5; 10],
            reflection: vec![0.5; 10],
            transmission: vec![0.0; 10],
        };
        let t = TargetSpectrum::new(grid, vec![1.0; 10], vec![1.0; 10], Quantity::Absorption).unwrap();
        assert!((observation_error(&[s], &t).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_grid_is_an_error() {
        let db = db();
        let stack = Stack::new(Medium::VACUUM, vec![Layer { material: MaterialId(1), thickness_nm: 10.0 }], Medium::VACUUM).unwrap();
        let err = spectrum(&stack, &[100.0], &IncidenceSpec::normal(), &db).unwrap_err();
        assert!(matches!(err, TmmError::Material(_)));
    }

    #[test]
    fn target_validation() {
        assert!(TargetSpectrum::new(vec![1.0], vec![1.0], vec![0.0], Quantity::Absorption).is_err());
        assert!(TargetSpectrum::new(vec![1.0, 2.0], vec![1.0], vec![1.0, 1.0], Quantity::Absorption).is_err());
        let solar = TargetSpectrum::solar_absorber();
        assert_eq!(solar.wavelengths_nm.len(), 451);
        assert_eq!(solar.target.iter().filter(|t| **t == 1.0).count(), 111);
        assert_eq!(*solar.wavelengths_nm.last().unwrap(), 2500.0);
    }
}
