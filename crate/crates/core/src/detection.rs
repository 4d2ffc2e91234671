//! MAP detection of the tag bit and its error probability.
//!
//! With the direct term removed, `y'_j = gamma_j^i H_BD x + w_j` under bit `i`.
//! The log-likelihood ratio reduces to the statistic
//! `L' = sum_j (g1_j - g0_j) Re{y'_j^H H_BD x}` compared against
//! `mu = sum_j (g1_j^2 - g0_j^2) / 2 * |H_BD x|^2`.

use std::f64::consts::{PI, SQRT_2};

use libm::erfc;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::numerics::{frobenius_sqr, norm_sqr, re_inner, to_db, CMat, CVec, Complex64};
use crate::scene::{ChannelSet, SceneConfig};
use crate::{Error, Result};

/// Trials per independent RNG stream in [`MonteCarlo`].
pub const MC_BLOCK: u64 = 1 << 14;

/// Name of the random-number scheme, recorded in run manifests.
pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha), stream = 16384-trial block index; Box-Muller normals";

/// Reflection coefficients per slot under bit 0 and bit 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaScheme {
    gamma0: Vec<f64>,
    gamma1: Vec<f64>,
}

impl GammaScheme {
    pub fn new(gamma0: Vec<f64>, gamma1: Vec<f64>) -> Result<Self> {
        if gamma0.is_empty() || gamma0.len() != gamma1.len() {
            return Err(Error::InvalidInput(format!(
                "gamma sequences must be non-empty and equally long ({} vs {})",
                gamma0.len(),
                gamma1.len()
            )));
        }
        if gamma0
            .iter()
            .chain(&gamma1)
            .any(|g| !g.is_finite() || g.abs() > 1.0)
        {
            return Err(Error::InvalidInput(
                "reflection coefficients must satisfy |gamma| <= 1".into(),
            ));
        }
        let s = Self { gamma0, gamma1 };
        if !(s.delta_energy() > 0.0) {
            return Err(Error::InvalidInput(
                "gamma0 and gamma1 are identical; bits are indistinguishable".into(),
            ));
        }
        Ok(s)
    }

    /// Antipodal +-1 signalling repeated over `slots` slots.
    pub fn antipodal(slots: usize) -> Self {
        Self::new(vec![-1.0; slots], vec![1.0; slots]).expect("valid")
    }

    pub fn slots(&self) -> usize {
        self.gamma0.len()
    }

    pub fn gamma(&self, bit: u8) -> &[f64] {
        if bit == 0 {
            &self.gamma0
        } else {
            &self.gamma1
        }
    }

    /// `sum_j (g1_j - g0_j)^2`.
    pub fn delta_energy(&self) -> f64 {
        self.gamma0
            .iter()
            .zip(&self.gamma1)
            .map(|(a, b)| (b - a).powi(2))
            .sum()
    }

    fn deltas(&self) -> impl Iterator<Item = f64> + '_ {
        self.gamma0.iter().zip(&self.gamma1).map(|(a, b)| b - a)
    }
}

fn backscatter(h_bd: &CMat, x: &CVec) -> Result<CVec> {
    if h_bd.ncols() != x.len() {
        return Err(Error::Dimension(format!(
            "H_BD has {} columns but x has {} entries",
            h_bd.ncols(),
            x.len()
        )));
    }
    Ok(h_bd * x)
}

/// Decision statistic over all slots. `y_prime[j]` is the slot-j observation
/// with the known direct-link term already subtracted.
pub fn map_statistic(y_prime: &[CVec], scheme: &GammaScheme, h_bd: &CMat, x: &CVec) -> Result<f64> {
    if y_prime.len() != scheme.slots() {
        return Err(Error::Dimension(format!(
            "{} observations for {} slots",
            y_prime.len(),
            scheme.slots()
        )));
    }
    let v = backscatter(h_bd, x)?;
    let mut l = 0.0;
    for (y, d) in y_prime.iter().zip(scheme.deltas()) {
        if y.len() != v.len() {
            return Err(Error::Dimension(format!(
                "observation has {} entries, expected {}",
                y.len(),
                v.len()
            )));
        }
        l += d * re_inner(y, &v);
    }
    Ok(l)
}

pub fn map_threshold(scheme: &GammaScheme, h_bd: &CMat, x: &CVec) -> Result<f64> {
    let gain = norm_sqr(&backscatter(h_bd, x)?);
    let w: f64 = scheme
        .gamma0
        .iter()
        .zip(&scheme.gamma1)
        .map(|(g0, g1)| (g1 * g1 - g0 * g0) / 2.0)
        .sum();
    Ok(w * gain)
}

/// Bit 1 iff `l_prime > mu`; ties go to bit 0.
pub fn decide(l_prime: f64, mu: f64) -> u8 {
    u8::from(l_prime > mu)
}

/// Gaussian tail probability `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Error probability for a given backscatter power `|H_BD x|^2`.
pub fn pe_from_gain(scheme: &GammaScheme, backscatter_power: f64) -> f64 {
    q_function((backscatter_power * scheme.delta_energy() / 2.0).sqrt())
}

/// `Q(|H_BD x| / sqrt(2) * sqrt(sum_j (g1_j - g0_j)^2))`, unit-variance noise.
pub fn closed_form_pe(scheme: &GammaScheme, h_bd: &CMat, x: &CVec) -> Result<f64> {
    Ok(pe_from_gain(scheme, norm_sqr(&backscatter(h_bd, x)?)))
}

/// `SNR = P_max J |H_BD|_F^2 / (M N)` in dB.
pub fn snr_db(scene: &SceneConfig, channels: &ChannelSet) -> f64 {
    snr_db_for(scene.p_max, scene.slots, channels)
}

pub fn snr_db_for(p_max: f64, slots: usize, channels: &ChannelSet) -> f64 {
    let mn = (channels.m() * channels.n()) as f64;
    to_db(p_max * slots as f64 * frobenius_sqr(&channels.h_bd) / mn)
}

/// Transmit power that realizes `snr_db` for the given channels and slot count.
pub fn p_max_for_snr(snr_db: f64, slots: usize, channels: &ChannelSet) -> f64 {
    let mn = (channels.m() * channels.n()) as f64;
    crate::numerics::from_db(snr_db) * mn / (slots as f64 * frobenius_sqr(&channels.h_bd))
}

/// Outcome of a Monte Carlo error-rate run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub trials: u64,
    pub errors: u64,
    pub trials_bit0: u64,
    pub errors_bit0: u64,
    pub estimate: f64,
    /// Wald 95% half-width.
    pub ci95: f64,
}

impl McEstimate {
    fn from_counts(c: Counts) -> Self {
        let p = if c.trials > 0 {
            c.errors as f64 / c.trials as f64
        } else {
            0.0
        };
        let ci95 = if c.trials > 0 {
            1.96 * (p * (1.0 - p) / c.trials as f64).sqrt()
        } else {
            0.0
        };
        Self {
            trials: c.trials,
            errors: c.errors,
            trials_bit0: c.trials0,
            errors_bit0: c.errors0,
            estimate: p,
            ci95,
        }
    }

    pub fn trials_bit1(&self) -> u64 {
        self.trials - self.trials_bit0
    }

    pub fn errors_bit1(&self) -> u64 {
        self.errors - self.errors_bit0
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    trials: u64,
    errors: u64,
    trials0: u64,
    errors0: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            trials: self.trials + o.trials,
            errors: self.errors + o.errors,
            trials0: self.trials0 + o.trials0,
            errors0: self.errors0 + o.errors0,
        }
    }
}

/// Monte Carlo simulation of the full received signal and MAP detector.
///
/// Trials are split into blocks of [`MC_BLOCK`]; block `b` draws from its
/// own ChaCha8 stream `b` under `seed`, and blocks are merged by summing
/// integer counts. The result depends only on `(seed, trials)`, not on the
/// number of worker threads.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarlo {
    pub trials: u64,
    pub seed: u64,
    /// Multiplies the unit noise standard deviation (1.0 in the model).
    pub noise_scale: f64,
}

impl MonteCarlo {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            noise_scale: 1.0,
        }
    }

    pub fn run(&self, channels: &ChannelSet, x: &CVec, scheme: &GammaScheme) -> Result<McEstimate> {
        if self.trials == 0 {
            return Err(Error::InvalidInput(
                "Monte Carlo needs at least one trial".into(),
            ));
        }
        let direct = &channels.h_dl * x;
        let bs = backscatter(&channels.h_bd, x)?;
        let mu = map_threshold(scheme, &channels.h_bd, x)?;
        let blocks = self.trials.div_ceil(MC_BLOCK);
        let counts = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let len = MC_BLOCK.min(self.trials - b * MC_BLOCK);
                self.run_block(b, len, &direct, &bs, scheme, mu)
            })
            .reduce(Counts::default, |a, b| a + b);
        Ok(McEstimate::from_counts(counts))
    }

    fn run_block(
        &self,
        block: u64,
        len: u64,
        direct: &CVec,
        bs: &CVec,
        scheme: &GammaScheme,
        mu: f64,
    ) -> Counts {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(block);
        let sigma = self.noise_scale * (0.5f64).sqrt();
        let n = bs.len();
        let mut y = CVec::zeros(n);
        let mut c = Counts::default();
        for _ in 0..len {
            let bit = (rng.next_u32() & 1) as u8;
            let mut l = 0.0;
            for (j, d) in scheme.deltas().enumerate() {
                let g = scheme.gamma(bit)[j];
                for k in 0..n {
                    let (a, b) = box_muller(&mut rng);
                    let w = Complex64::new(sigma * a, sigma * b);
                    y[k] = direct[k] + bs[k] * g + w;
                }
                // remove the known direct-link term before detection
                let yp = &y - direct;
                l += d * re_inner(&yp, bs);
            }
            let err = decide(l, mu) != bit;
            c.trials += 1;
            c.errors += u64::from(err);
            if bit == 0 {
                c.trials0 += 1;
                c.errors0 += u64::from(err);
            }
        }
        c
    }
}

pub fn monte_carlo_pe(
    channels: &ChannelSet,
    x: &CVec,
    scheme: &GammaScheme,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    MonteCarlo::new(trials, seed).run(channels, x, scheme)
}

fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    // 53-bit uniform in (0, 1]
    ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

/// Two independent standard normals.
fn box_muller(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = uniform_open(rng);
    let u2 = uniform_open(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let t = 2.0 * PI * u2;
    (r * t.cos(), r * t.sin())
}

/// One SNR point of an error-probability curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeRow {
    pub snr_db: f64,
    pub pe_closed_form: f64,
    pub monte_carlo: Option<McEstimate>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeCurve {
    pub rows: Vec<PeRow>,
}

impl PeCurve {
    /// Sweep SNR by scaling a unit-power beamformer `x_unit` (`|x_unit|^2 = 1`)
    /// to the transmit power each SNR point requires; noise stays unit variance.
    pub fn sweep(
        channels: &ChannelSet,
        x_unit: &CVec,
        scheme: &GammaScheme,
        snrs_db: &[f64],
        mc: Option<MonteCarlo>,
    ) -> Result<Self> {
        let unit_gain = norm_sqr(&backscatter(&channels.h_bd, x_unit)?);
        let rows = snrs_db
            .iter()
            .enumerate()
            .map(|(i, &snr)| {
                let p = p_max_for_snr(snr, scheme.slots(), channels);
                let pe = pe_from_gain(scheme, p * unit_gain);
                let monte_carlo = match mc {
                    Some(m) if m.trials > 0 => {
                        let x = x_unit * Complex64::new(p.sqrt(), 0.0);
                        let sub = MonteCarlo {
                            seed: derive_seed(m.seed, i as u64),
                            ..m
                        };
                        Some(sub.run(channels, &x, scheme)?)
                    }
                    _ => None,
                };
                Ok(PeRow {
                    snr_db: snr,
                    pe_closed_form: pe,
                    monte_carlo,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows })
    }
}

/// SNR (dB) at which the closed-form error probability of a unit-power
/// beamformer reaches `target`.
pub fn snr_for_pe(
    channels: &ChannelSet,
    x_unit: &CVec,
    scheme: &GammaScheme,
    target: f64,
) -> Result<f64> {
    if !(target > 0.0 && target < 0.5) {
        return Err(Error::InvalidInput(format!(
            "target error probability {target} outside (0, 0.5)"
        )));
    }
    let unit_gain = norm_sqr(&backscatter(&channels.h_bd, x_unit)?);
    if !(unit_gain > 0.0) {
        return Err(Error::InvalidInput(
            "beamformer delivers no backscatter power".into(),
        ));
    }
    let pe_at = |snr: f64| {
        pe_from_gain(
            scheme,
            p_max_for_snr(snr, scheme.slots(), channels) * unit_gain,
        )
    };
    let (mut lo, mut hi) = (-400.0, 400.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pe_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// SplitMix64 mix of a base seed with a row index.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
