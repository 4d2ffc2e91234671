//! Scene geometry and geometric channel synthesis.
//!
//! Every channel coefficient is a free-space line-of-sight term plus one
//! first-order specular reflection per reflector plane. Reflectors are
//! infinite planes `x = const`; the reflected path length is computed with
//! the image method.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::alpha::AlphaDb;
use crate::detection::GammaScheme;
use crate::numerics::{CMat, CVec, Complex64};
use crate::{Error, Result};

pub type Point3 = [f64; 3];

fn vec3(p: &Point3) -> Vector3<f64> {
    Vector3::new(p[0], p[1], p[2])
}

/// Euclidean distance between two points.
pub fn distance(a: &Point3, b: &Point3) -> f64 {
    (vec3(a) - vec3(b)).norm()
}

/// Antenna element positions in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    elements: Vec<Point3>,
}

impl ArrayGeometry {
    pub fn new(elements: Vec<Point3>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Geometry("array needs at least one element".into()));
        }
        if elements.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Geometry("element position is not finite".into()));
        }
        for (i, a) in elements.iter().enumerate() {
            for b in &elements[i + 1..] {
                if distance(a, b) == 0.0 {
                    return Err(Error::Geometry(format!("duplicate element position {a:?}")));
                }
            }
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[Point3] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn centroid(&self) -> Point3 {
        let n = self.elements.len() as f64;
        let s = self
            .elements
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + vec3(p))
            / n;
        [s.x, s.y, s.z]
    }
}

/// Uniform linear array of `count` elements at pitch `spacing`, symmetric
/// about `center` along `axis` (normalized internally).
pub fn build_ula(
    center: Point3,
    count: usize,
    spacing: f64,
    axis: Point3,
) -> Result<ArrayGeometry> {
    if count == 0 {
        return Err(Error::Geometry("array element count must be >= 1".into()));
    }
    if !(spacing > 0.0) {
        return Err(Error::Geometry(format!(
            "element spacing must be > 0, got {spacing}"
        )));
    }
    let axis = vec3(&axis);
    let len = axis.norm();
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::Geometry(
            "array axis must be a non-zero finite vector".into(),
        ));
    }
    let u = axis / len;
    let c = vec3(&center);
    let mid = (count as f64 - 1.0) / 2.0;
    let elements = (0..count)
        .map(|i| {
            let p = c + u * ((i as f64 - mid) * spacing);
            [p.x, p.y, p.z]
        })
        .collect();
    ArrayGeometry::new(elements)
}

/// Mirror image of `p` in the plane `x = reflector_x`.
pub fn image_point(p: Point3, reflector_x: f64) -> Point3 {
    [2.0 * reflector_x - p[0], p[1], p[2]]
}

/// Free-space coefficient `lambda / (4 pi d) * exp(-j 2 pi d / lambda)`.
pub fn los_coeff(d: f64, wavelength: f64) -> Result<Complex64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Geometry(format!(
            "path length must be positive and finite, got {d}"
        )));
    }
    let amp = wavelength / (4.0 * PI * d);
    Ok(Complex64::from_polar(amp, -2.0 * PI * d / wavelength))
}

/// Full scene description. Lengths in meters, powers linear, `alphas_db` in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub wavelength: f64,
    pub ce_array: ArrayGeometry,
    pub reader_array: ArrayGeometry,
    pub bde_position: Point3,
    pub reflector_x: Vec<f64>,
    pub g_smc: f64,
    pub p_max: f64,
    pub slots: usize,
    pub gamma0: Vec<f64>,
    pub gamma1: Vec<f64>,
    /// Default SIR-constraint set for sweeps; `-inf` selects the null-space design.
    pub alphas_db: Vec<AlphaDb>,
}

impl SceneConfig {
    /// The reference deployment: 16-element half-wavelength ULAs along x at
    /// (0,0,0) and (0,8,0), tag at (0,2,0), reflectors at x = +-2 m.
    pub fn reference() -> Self {
        let wavelength = 0.1;
        let spacing = 0.5 * wavelength;
        let axis = [1.0, 0.0, 0.0];
        Self {
            wavelength,
            ce_array: build_ula([0.0, 0.0, 0.0], 16, spacing, axis).expect("valid"),
            reader_array: build_ula([0.0, 8.0, 0.0], 16, spacing, axis).expect("valid"),
            bde_position: [0.0, 2.0, 0.0],
            reflector_x: vec![2.0, -2.0],
            g_smc: 0.5,
            p_max: 1.0,
            slots: 1,
            gamma0: vec![-1.0],
            gamma1: vec![1.0],
            alphas_db: vec![AlphaDb::NEG_INF, AlphaDb(33.0), AlphaDb(39.2)],
        }
    }

    pub fn with_bde(mut self, bde: Point3) -> Self {
        self.bde_position = bde;
        self
    }

    pub fn m(&self) -> usize {
        self.ce_array.len()
    }

    pub fn n(&self) -> usize {
        self.reader_array.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0) || !self.wavelength.is_finite() {
            return Err(Error::scene(
                "wavelength",
                "must be a positive finite length",
            ));
        }
        if !(self.p_max > 0.0) || !self.p_max.is_finite() {
            return Err(Error::scene("p_max", "must be positive and finite"));
        }
        if !(0.0..=1.0).contains(&self.g_smc) {
            return Err(Error::scene("g_smc", "must lie in [0, 1]"));
        }
        if self.reflector_x.iter().any(|x| !x.is_finite()) {
            return Err(Error::scene("reflector_x", "entries must be finite"));
        }
        if self.bde_position.iter().any(|c| !c.is_finite()) {
            return Err(Error::scene("bde_position", "coordinates must be finite"));
        }
        if self.slots == 0 {
            return Err(Error::scene("slots", "must be >= 1"));
        }
        if self.gamma0.len() != self.slots {
            return Err(Error::scene(
                "gamma0",
                format!("expected {} entries", self.slots),
            ));
        }
        if self.gamma1.len() != self.slots {
            return Err(Error::scene(
                "gamma1",
                format!("expected {} entries", self.slots),
            ));
        }
        GammaScheme::new(self.gamma0.clone(), self.gamma1.clone())
            .map_err(|e| Error::scene("gamma1", e.to_string()))?;
        for (i, a) in self.alphas_db.iter().enumerate() {
            if a.0.is_nan() || a.0 == f64::INFINITY {
                return Err(Error::scene(
                    format!("alphas_db[{i}]"),
                    "must be finite or -inf",
                ));
            }
        }
        Ok(())
    }

    pub fn gamma_scheme(&self) -> Result<GammaScheme> {
        GammaScheme::new(self.gamma0.clone(), self.gamma1.clone())
    }

    /// Coefficient of the path between two points: LOS plus one image path per reflector.
    pub fn path_coeff(&self, a: &Point3, b: &Point3) -> Result<Complex64> {
        let mut h = los_coeff(distance(a, b), self.wavelength)?;
        for &xr in &self.reflector_x {
            let d = distance(&image_point(*a, xr), b);
            h += self.g_smc * los_coeff(d, self.wavelength)?;
        }
        Ok(h)
    }

    /// Channel from every CE element to `point`, indexed by CE element.
    pub fn ce_to_point(&self, point: &Point3) -> Result<CVec> {
        let coeffs = self
            .ce_array
            .elements()
            .iter()
            .map(|p| self.path_coeff(p, point))
            .collect::<Result<Vec<_>>>()?;
        Ok(CVec::from_vec(coeffs))
    }
}

/// `H_DL` (N x M), `h_C` (M), `h_R` (N) and the rank-one cascade `H_BD = h_R h_C^T`.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub h_dl: CMat,
    pub h_c: CVec,
    pub h_r: CVec,
    pub h_bd: CMat,
}

impl ChannelSet {
    /// Build from explicit channels; the cascade is formed as the outer product.
    pub fn new(h_dl: CMat, h_c: CVec, h_r: CVec) -> Result<Self> {
        let (n, m) = h_dl.shape();
        if h_c.len() != m || h_r.len() != n {
            return Err(Error::Dimension(format!(
                "H_DL is {n}x{m} but h_C has {} and h_R has {} entries",
                h_c.len(),
                h_r.len()
            )));
        }
        let h_bd = &h_r * h_c.transpose();
        let set = Self {
            h_dl,
            h_c,
            h_r,
            h_bd,
        };
        crate::numerics::check_finite_c(&set.h_dl, "H_DL")?;
        crate::numerics::check_finite_c(&set.h_bd, "H_BD")?;
        Ok(set)
    }

    pub fn m(&self) -> usize {
        self.h_c.len()
    }

    pub fn n(&self) -> usize {
        self.h_r.len()
    }
}

pub fn synth_channels(scene: &SceneConfig) -> Result<ChannelSet> {
    scene.validate()?;
    let ce = scene.ce_array.elements();
    let rd = scene.reader_array.elements();
    let bde = scene.bde_position;

    let mut h_dl = CMat::zeros(rd.len(), ce.len());
    for (n, pr) in rd.iter().enumerate() {
        for (m, pc) in ce.iter().enumerate() {
            h_dl[(n, m)] = scene.path_coeff(pc, pr)?;
        }
    }
    let h_c = scene.ce_to_point(&bde)?;
    let h_r = CVec::from_vec(
        rd.iter()
            .map(|p| scene.path_coeff(p, &bde))
            .collect::<Result<Vec<_>>>()?,
    );
    ChannelSet::new(h_dl, h_c, h_r)
}

/// Far-field transmit steering vector of `array` toward azimuth `theta`
/// (radians from broadside +y, positive toward +x).
///
/// Element m carries `exp(+j 2 pi / lambda * (p_m - c) . u(theta))` with
/// `u = (sin theta, cos theta, 0)` and `c` the array centroid, so that
/// `|g(theta)^T x|^2` is the array factor radiated toward `theta`.
pub fn steering_vector(theta: f64, array: &ArrayGeometry, wavelength: f64) -> CVec {
    let u = Vector3::new(theta.sin(), theta.cos(), 0.0);
    let c = vec3(&array.centroid());
    let k = 2.0 * PI / wavelength;
    CVec::from_iterator(
        array.len(),
        array
            .elements()
            .iter()
            .map(|p| Complex64::from_polar(1.0, k * (vec3(p) - c).dot(&u))),
    )
}
