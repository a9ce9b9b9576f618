use lorlab::families::{build_family, norm_sandwich_check, plan_grid, CoefficientRule, FamilyKind, FamilySpec, GridConfig};
use lorlab::lp::{lp_decompose, BumpFamily, Scale, SmoothnessParams};
use lorlab::measure::{lorentz_norm, rearrange, GridFunction, LorentzExponents};

fn space(scale: Scale, s: f64, p: f64, q: f64, r: f64) -> SmoothnessParams {
    SmoothnessParams::new(scale, s, p, q, r).unwrap()
}

#[test]
fn lattice_norms_track_coefficient_norms() {
    let spec = FamilySpec::new(FamilyKind::Lattice, 4);
    let fast: Vec<f64> = (1..=4).map(|l| 2f64.powi(-l)).collect();
    let slow: Vec<f64> = (1..=4).map(|l| 2f64.powf(-0.5 * l as f64)).collect();
    for sp in [space(Scale::B, 0.0, 2.0, 2.0, 2.0), space(Scale::F, 0.0, 2.0, 1.0, 4.0)] {
        assert!(norm_sandwich_check(&spec, &fast, &slow, &sp, &GridConfig::default()).unwrap(), "{sp}");
    }
}

#[test]
fn critical_h_norms_track_coefficient_norms() {
    let spec = FamilySpec::new(FamilyKind::CriticalH, 4);
    let fast: Vec<f64> = (1..=4).map(|l| 2f64.powi(-l)).collect();
    let slow: Vec<f64> = (1..=4).map(|l| 2f64.powf(-0.5 * l as f64)).collect();
    let sp = space(Scale::F, 0.0, 2.0, 2.0, 2.0);
    assert!(norm_sandwich_check(&spec, &fast, &slow, &sp, &GridConfig::default()).unwrap());
}

fn band_norms(f: &GridFunction, fam: &BumpFamily) -> Vec<f64> {
    let e = LorentzExponents::new(2.0, 2.0).unwrap();
    lp_decompose(f, fam).unwrap().members().iter().map(|g| lorentz_norm(&rearrange(g).unwrap(), e)).collect()
}

#[test]
fn critical_h_terms_dominate_their_own_band() {
    let cfg = GridConfig::default();
    let n = 4;
    let spec = FamilySpec::new(FamilyKind::CriticalH, n);
    let plan = plan_grid(&spec, &cfg).unwrap();
    let fam = BumpFamily::new(plan.cells, plan.period, plan.k_max).unwrap();
    let full = band_norms(&build_family(&spec, &cfg).unwrap(), &fam);
    for l in 0..n {
        let mut alone = spec.clone();
        let mut values = vec![0.0; n];
        values[l] = 1.0;
        alone.coefficients = CoefficientRule::Explicit { values };
        let isolated = band_norms(&build_family(&alone, &cfg).unwrap(), &fam);
        let (k, peak) = isolated.iter().copied().enumerate().fold((0, 0.0), |best, (k, v)| if v > best.1 { (k, v) } else { best });
        let gap = (full[k] - peak).abs() / peak;
        assert!(gap <= 0.25, "term {l}: band {k} differs by {gap:.3}");
    }
}

#[test]
fn grid_cap_is_reported_as_infeasible() {
    let cfg = GridConfig { max_cells: 1 << 10, ..GridConfig::default() };
    let err = plan_grid(&FamilySpec::new(FamilyKind::CriticalH, 8), &cfg).unwrap_err();
    assert!(matches!(err, lorlab::LabError::Infeasible { .. }), "{err}");
}
