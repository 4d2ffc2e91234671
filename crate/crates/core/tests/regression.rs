use bibc_core::detection::{p_max_for_snr, snr_db_for, GammaScheme, MonteCarlo};
use bibc_core::{design, synth_channels, AlphaDb, Design, SceneConfig};

#[test]
fn reference_snr_at_unit_power_is_pinned() {
    let ch = synth_channels(&SceneConfig::reference()).unwrap();
    let snr = snr_db_for(1.0, 1, &ch);
    assert!((snr - -103.35503540617748).abs() < 1e-9, "{snr}");
    let p = p_max_for_snr(snr, 1, &ch);
    assert!((p - 1.0).abs() < 1e-12);
}

#[test]
fn tight_sir_constraints_still_solve_to_optimality() {
    let ch = synth_channels(&SceneConfig::reference()).unwrap();
    let null = design(&ch, Design::Alpha(AlphaDb::NEG_INF), 1.0).unwrap();
    let mut prev = null.objective;
    for alpha in [0.0, 5.0, 10.0] {
        let out = design(&ch, Design::Alpha(AlphaDb(alpha)), 1.0).unwrap();
        let sdp = out.sdp.unwrap();
        assert!(
            sdp.duality_gap <= 1e-9,
            "alpha {alpha}: gap {}",
            sdp.duality_gap
        );
        assert!(
            out.rank_ratio <= 1e-6,
            "alpha {alpha}: rank ratio {}",
            out.rank_ratio
        );
        assert!(
            (out.achieved_eta_db - alpha).abs() < 1e-3,
            "alpha {alpha}: eta {}",
            out.achieved_eta_db
        );
        assert!(out.objective >= prev * (1.0 - 1e-9));
        prev = out.objective;
    }
}

#[test]
fn errors_are_symmetric_between_bits() {
    let ch = synth_channels(&SceneConfig::reference()).unwrap();
    let x = design(&ch, Design::Alpha(AlphaDb(33.0)), 1.0).unwrap().x;
    // scale so the closed form sits near 5%
    let p = 1.5 / (&ch.h_bd * &x).norm_squared();
    let x = x.scale(p.sqrt());
    let mc = MonteCarlo::new(400_000, 5)
        .run(&ch, &x, &GammaScheme::antipodal(1))
        .unwrap();
    let rate = |e: u64, t: u64| e as f64 / t as f64;
    let p0 = rate(mc.errors_bit0, mc.trials_bit0);
    let p1 = rate(mc.errors_bit1(), mc.trials_bit1());
    let se = (p0 * (1.0 - p0) / mc.trials_bit0 as f64 + p1 * (1.0 - p1) / mc.trials_bit1() as f64)
        .sqrt();
    assert!(p0 > 0.01 && p1 > 0.01);
    assert!((p0 - p1).abs() <= 3.0 * se, "p0 {p0} p1 {p1} se {se}");
}
