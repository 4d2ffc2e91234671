//! Figures of merit: direct-link interference ratio, path gain and the
//! transmit radiation pattern.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::DEFAULT_NULL_EPS;
use crate::numerics::{norm_sqr, real_embed_matrix, sym_eig_desc, to_db, CVec};
use crate::scene::{distance, steering_vector, ArrayGeometry, ChannelSet, Point3, SceneConfig};
use crate::{Error, Result};

/// Residual interference below this fraction of the backscatter power is reported as `-inf` dB.
pub const ETA_FLOOR: f64 = 1e-15;

/// `sigma_max(H_DL)^2`.
pub fn dl_gain_bound(channels: &ChannelSet) -> Result<f64> {
    let e = sym_eig_desc(&real_embed_matrix(&channels.h_dl).gram())?;
    Ok(e.values[0].max(0.0))
}

/// True when `‖H_DL x‖²` is zero to the resolution of the numerical null
/// space, i.e. at most `DEFAULT_NULL_EPS * sigma_max(H_DL)^2 * ‖x‖²`.
pub fn dl_cancelled(channels: &ChannelSet, x: &CVec) -> Result<bool> {
    let (dl, _) = received_powers(channels, x)?;
    Ok(dl <= DEFAULT_NULL_EPS * dl_gain_bound(channels)? * norm_sqr(x))
}

/// `‖H_DL x‖²` and `‖H_BD x‖²`.
pub fn received_powers(channels: &ChannelSet, x: &CVec) -> Result<(f64, f64)> {
    if x.len() != channels.m() {
        return Err(Error::Dimension(format!(
            "beamformer has {} entries, CE array has {}",
            x.len(),
            channels.m()
        )));
    }
    let dl = norm_sqr(&(&channels.h_dl * x));
    let bd = norm_sqr(&(&channels.h_bd * x));
    Ok((dl, bd))
}

/// `10 log10(‖H_DL x‖² / ‖H_BD x‖²)`, or `-inf` once the direct link is
/// numerically cancelled (see [`ETA_FLOOR`] and [`dl_cancelled`]).
pub fn eta_db(channels: &ChannelSet, x: &CVec) -> Result<f64> {
    let (dl, bd) = received_powers(channels, x)?;
    if !(bd > 0.0) {
        return Err(Error::InvalidInput(
            "beamformer delivers no backscatter power".into(),
        ));
    }
    if dl < ETA_FLOOR * bd || dl_cancelled(channels, x)? {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(raw_eta_db(dl, bd))
}

/// The ratio without any cancellation rule applied.
pub fn raw_eta_db(dl: f64, bd: f64) -> f64 {
    to_db(dl / bd)
}

/// Received-to-transmitted power ratio `|h^T x|² / ‖x‖²` at `point`, in dB.
pub fn path_gain_db(scene: &SceneConfig, x: &CVec, point: &Point3) -> Result<f64> {
    if x.len() != scene.m() {
        return Err(Error::Dimension(format!(
            "beamformer has {} entries, CE array has {}",
            x.len(),
            scene.m()
        )));
    }
    let p = norm_sqr(x);
    if !(p > 0.0) {
        return Err(Error::InvalidInput("zero beamforming vector".into()));
    }
    let h = scene.ce_to_point(point)?;
    Ok(to_db((h.transpose() * x)[(0, 0)].norm_sqr() / p))
}

/// Rectangular lattice in the plane `z = const`. Endpoints are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub step: f64,
    pub z: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: -2.0,
            x_max: 2.0,
            y_min: 0.0,
            y_max: 8.0,
            step: 0.05,
            z: 0.0,
        }
    }
}

impl GridSpec {
    fn axis(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err(Error::InvalidInput(format!(
                "bad grid axis [{lo}, {hi}] step {step}"
            )));
        }
        let count = ((hi - lo) / step).round() as usize + 1;
        if count == 1 {
            return Ok(vec![lo]);
        }
        // interpolate rather than accumulate so that grid points land exactly on round coordinates
        Ok((0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect())
    }

    pub fn xs(&self) -> Result<Vec<f64>> {
        Self::axis(self.x_min, self.x_max, self.step)
    }

    pub fn ys(&self) -> Result<Vec<f64>> {
        Self::axis(self.y_min, self.y_max, self.step)
    }
}

/// Path gain sampled on a [`GridSpec`]. `pg_db` is row-major with `x` varying fastest.
#[derive(Debug, Clone)]
pub struct PathGainMap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub z: f64,
    pub pg_db: Vec<f64>,
}

impl PathGainMap {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.pg_db[iy * self.xs.len() + ix]
    }

    /// `(x, y, pg_db)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.ys
            .iter()
            .flat_map(move |&y| self.xs.iter().map(move |&x| (x, y)))
            .zip(&self.pg_db)
            .map(|((x, y), &v)| (x, y, v))
    }
}

/// Evaluate the path gain over `grid`. Points within a quarter wavelength of a
/// CE element are singular and reported as `-inf`.
pub fn pg_map(scene: &SceneConfig, x: &CVec, grid: &GridSpec) -> Result<PathGainMap> {
    let xs = grid.xs()?;
    let ys = grid.ys()?;
    let keep_out = scene.wavelength / 4.0;
    let points: Vec<Point3> = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| [x, y, grid.z]))
        .collect();
    let pg_db = points
        .par_iter()
        .map(|p| {
            if scene
                .ce_array
                .elements()
                .iter()
                .any(|e| distance(e, p) < keep_out)
            {
                Ok(f64::NEG_INFINITY)
            } else {
                path_gain_db(scene, x, p)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PathGainMap {
        xs,
        ys,
        z: grid.z,
        pg_db,
    })
}

/// `E_t(theta) = |g(theta)^T x|²` for each angle (radians), linear scale.
pub fn radiation_pattern(
    x: &CVec,
    array: &ArrayGeometry,
    wavelength: f64,
    thetas: &[f64],
) -> Result<Vec<f64>> {
    if x.len() != array.len() {
        return Err(Error::Dimension(format!(
            "beamformer has {} entries, array has {} elements",
            x.len(),
            array.len()
        )));
    }
    Ok(thetas
        .par_iter()
        .map(|&t| (steering_vector(t, array, wavelength).transpose() * x)[(0, 0)].norm_sqr())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{CMat, Complex64};
    use crate::scene::{build_ula, los_coeff, synth_channels};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn toy() -> ChannelSet {
        let h_dl = CMat::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 0.0)]);
        ChannelSet::new(
            h_dl,
            CVec::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]),
            CVec::from_element(1, c(1.0, 0.0)),
        )
        .unwrap()
    }

    #[test]
    fn eta_equal_powers_is_zero_db() {
        let x = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        assert!(eta_db(&toy(), &x).unwrap().abs() < 1e-12);
    }

    #[test]
    fn eta_cancelled_and_rejected() {
        let ch = toy();
        assert_eq!(
            eta_db(&ch, &CVec::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)])).unwrap(),
            f64::NEG_INFINITY
        );
        assert!(eta_db(&ch, &CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).is_err());
        assert!(eta_db(&ch, &CVec::zeros(3)).is_err());
    }

    #[test]
    fn reference_null_design_counts_as_cancelled() {
        let ch = synth_channels(&SceneConfig::reference()).unwrap();
        let out = crate::beamforming::null_dli_beamformer(&ch, 1.0, DEFAULT_NULL_EPS).unwrap();
        assert_eq!(out.achieved_eta_db, f64::NEG_INFINITY);
        // the realized ratio is small but not at the 1e-15 floor
        let raw = raw_eta_db(out.residual_dli, out.objective);
        assert!(raw < -55.0 && raw > -150.0, "{raw}");
        let m = crate::beamforming::mrt(&ch, 1.0).unwrap();
        assert!(!dl_cancelled(&ch, &m.x).unwrap());
    }

    #[test]
    fn single_antenna_pure_los_gain() {
        let mut scene = SceneConfig::reference();
        scene.g_smc = 0.0;
        let mut x = CVec::zeros(scene.m());
        x[3] = c(0.0, 2.0);
        let p = [0.3, 1.7, 0.0];
        let d = distance(&scene.ce_array.elements()[3], &p);
        let expect = to_db(los_coeff(d, scene.wavelength).unwrap().norm_sqr());
        assert!((path_gain_db(&scene, &x, &p).unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn path_gain_on_element_is_error() {
        let scene = SceneConfig::reference();
        let x = CVec::from_element(scene.m(), c(1.0, 0.0));
        let e = scene.ce_array.elements()[0];
        assert!(path_gain_db(&scene, &x, &e).is_err());
    }

    #[test]
    fn coherent_broadside_pattern() {
        let arr = build_ula([0.0; 3], 8, 0.05, [1.0, 0.0, 0.0]).unwrap();
        let x = CVec::from_element(8, c(1.0 / 8f64.sqrt(), 0.0));
        let e = radiation_pattern(&x, &arr, 0.1, &[0.0]).unwrap();
        assert!((e[0] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn single_element_pattern_is_flat() {
        let arr = ArrayGeometry::new(vec![[0.2, 0.1, 0.0]]).unwrap();
        let x = CVec::from_element(1, c(0.6, -0.8));
        let thetas: Vec<f64> = (0..36).map(|i| i as f64 * 0.17).collect();
        for e in radiation_pattern(&x, &arr, 0.1, &thetas).unwrap() {
            assert!((e - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_hits_round_coordinates() {
        let g = GridSpec::default();
        let xs = g.xs().unwrap();
        let ys = g.ys().unwrap();
        assert_eq!((xs.len(), ys.len()), (81, 161));
        assert_eq!(xs[40], 0.0);
        assert_eq!(ys[40], 2.0);
        assert_eq!(*xs.last().unwrap(), 2.0);
    }

    #[test]
    fn pg_map_masks_ce_elements_and_matches_point_eval() {
        let scene = SceneConfig::reference();
        let ch = synth_channels(&scene).unwrap();
        let x = ch.h_c.map(|z| z.conj());
        let grid = GridSpec {
            x_min: -0.5,
            x_max: 0.5,
            y_min: 0.0,
            y_max: 2.0,
            step: 0.25,
            z: 0.0,
        };
        let map = pg_map(&scene, &x, &grid).unwrap();
        assert!(map.get(2, 0).is_finite());
        let bde = map.get(2, 8);
        assert_eq!(bde, path_gain_db(&scene, &x, &scene.bde_position).unwrap());
        assert_eq!(map.iter().count(), 5 * 9);

        let e = scene.ce_array.elements()[5];
        let on_element = GridSpec {
            x_min: e[0],
            x_max: e[0],
            y_min: 0.01,
            y_max: 0.01,
            step: 1.0,
            z: 0.0,
        };
        assert_eq!(
            pg_map(&scene, &x, &on_element).unwrap().pg_db,
            vec![f64::NEG_INFINITY]
        );
    }

    proptest! {
        #[test]
        fn eta_and_pg_ignore_complex_scaling(re in -3.0..3.0f64, im in -3.0..3.0f64, phase in 0.0..6.3f64) {
            prop_assume!(re.hypot(im) > 1e-3);
            let scene = SceneConfig::reference();
            let ch = synth_channels(&scene).unwrap();
            let x = CVec::from_fn(scene.m(), |i, _| Complex64::from_polar(1.0, 0.7 * i as f64 + phase));
            let y = &x * c(re, im);
            let a = eta_db(&ch, &x).unwrap();
            let b = eta_db(&ch, &y).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
            let pa = path_gain_db(&scene, &x, &scene.bde_position).unwrap();
            let pb = path_gain_db(&scene, &y, &scene.bde_position).unwrap();
            prop_assert!((pa - pb).abs() < 1e-9);
        }

        #[test]
        fn pattern_mean_ignores_global_phase(phase in 0.0..6.3f64) {
            let arr = build_ula([0.0; 3], 6, 0.05, [1.0, 0.0, 0.0]).unwrap();
            let x = CVec::from_fn(6, |i, _| c(1.0 + i as f64, 0.5 - i as f64));
            let y = &x * Complex64::from_polar(1.0, phase);
            let thetas: Vec<f64> = (0..90).map(|i| i as f64 * std::f64::consts::TAU / 90.0).collect();
            let a: f64 = radiation_pattern(&x, &arr, 0.1, &thetas).unwrap().iter().sum();
            let b: f64 = radiation_pattern(&y, &arr, 0.1, &thetas).unwrap().iter().sum();
            prop_assert!((a - b).abs() < 1e-9 * a);
        }
    }
}
