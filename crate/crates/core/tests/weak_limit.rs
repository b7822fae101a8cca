use std::f64::consts::{FRAC_1_SQRT_2, PI};

use anisowalk::coin::{CoinField, CoinMatrix};
use anisowalk::konno::{KOperator, VelocityGrid};
use anisowalk::lattice::LatticeState;
use anisowalk::linalg::Mat2;
use anisowalk::momentum::{velocity_function, Branch, Gauge, MomentumFrame};
use anisowalk::scattering::{verify_intertwining, PairState};
use anisowalk::weaklimit::{compare_empirical, default_v_grid, limit_distribution, LimitConfig, LimitDistribution};
use num_complex::Complex64 as C64;

fn defect_field() -> CoinField {
    let s = FRAC_1_SQRT_2;
    let phase = |sigma: f64| {
        let e = C64::from_polar(1.0, sigma);
        CoinMatrix::from_matrix(Mat2([[C64::new(s, 0.0), e * s], [e.conj() * s, C64::new(-s, 0.0)]])).unwrap()
    };
    CoinField::two_phase(phase(0.0), phase(PI / 2.0))
        .with_override(0, Mat2::real(1.0, 0.0, 0.0, -1.0))
        .unwrap()
}

fn two_phase() -> CoinField {
    CoinField::two_phase(
        CoinMatrix::from_params(0.8, 0.3, -0.4, 0.7).unwrap(),
        CoinMatrix::from_params(0.6, -0.2, 0.5, 1.1).unwrap(),
    )
}

fn up() -> LatticeState {
    LatticeState::delta(0, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
}

fn limit(field: &CoinField, psi: &LatticeState, grid_half: usize) -> LimitDistribution {
    let config = LimitConfig {
        grid_half,
        ..LimitConfig::default()
    };
    limit_distribution(psi, field, &config).unwrap()
}

#[test]
fn defect_walk_has_the_bound_state_atom() {
    let dist = limit(&defect_field(), &up(), 513);
    assert!((dist.kappa0 - 0.4).abs() < 1e-3, "κ₀ = {}", dist.kappa0);
    assert!((dist.total_mass() - 1.0).abs() < 1e-3);
    let meta = dist.meta.as_ref().unwrap();
    assert!(meta.extrapolated);
    assert!((meta.time_average.unwrap() - dist.kappa0).abs() < 5e-2);
}

fn weighted_l1(coarse: &LimitDistribution, fine: &LimitDistribution) -> Vec<f64> {
    coarse
        .densities()
        .zip(fine.densities())
        .map(|(c, f)| {
            f.nodes
                .iter()
                .zip(&f.weights)
                .zip(&f.w)
                .map(|((v, q), w)| (c.w_at(*v) - w).abs() * q)
                .sum()
        })
        .collect()
}

#[test]
fn decomposition_does_not_depend_on_the_grid() {
    let field = defect_field();
    let psi = up();
    let coarse = limit(&field, &psi, 257);
    let fine = limit(&field, &psi, 513);
    assert!((coarse.kappa0 - fine.kappa0).abs() < 1e-6);
    for (c, f) in coarse.densities().zip(fine.densities()) {
        assert!((c.mass() - f.mass()).abs() < 1e-6);
    }
    for d in weighted_l1(&coarse, &fine) {
        assert!(d < 1e-4, "weighted L1 distance {d}");
    }
}

/// A threshold of the right phase inside the left velocity range puts a
/// square-root cusp into `w_ℓ`; refinement still converges, more slowly.
#[test]
fn grid_refinement_converges_across_a_threshold_cusp() {
    let field = two_phase();
    let psi = up();
    let d: Vec<LimitDistribution> = [257, 513, 1025].iter().map(|g| limit(&field, &psi, *g)).collect();
    let first = weighted_l1(&d[0], &d[1]);
    let second = weighted_l1(&d[1], &d[2]);
    assert!((d[0].kappa0 - d[2].kappa0).abs() < 1e-6);
    assert!(first[0] < 1e-3 && second[0] < 0.6 * first[0], "{first:?} {second:?}");
    assert!(first[1] < 1e-4 && second[1] < 1e-4);
}

#[test]
fn moments_cdf_and_characteristic_function_agree() {
    let dist = limit(&defect_field(), &up(), 513);
    let h = 1e-4;
    let derivative = (dist.cf(h) - dist.cf(-h)) / (2.0 * h);
    assert!((derivative.im - dist.moment(1).unwrap()).abs() < 1e-6);
    assert!(derivative.re.abs() < 1e-6);
    let second = -(dist.cf(h) - 2.0 * dist.cf(0.0) + dist.cf(-h)).re / (h * h);
    assert!((second - dist.moment(2).unwrap()).abs() < 1e-5);
    assert!((dist.cf(0.0) - C64::new(dist.total_mass(), 0.0)).norm() < 1e-14);

    let grid = default_v_grid(441);
    let values: Vec<f64> = grid.iter().map(|v| dist.cdf(*v)).collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    assert_eq!(dist.cdf(-1.1), 0.0);
    assert!((dist.cdf(1.1) - dist.total_mass()).abs() < 1e-14);
    let jump = dist.cdf(0.0) - dist.cdf(-1e-9);
    assert!(jump >= dist.kappa0 - 1e-12);
    assert!(dist.moment(0).is_err());
    assert!(dist.moment(9).is_err());
}

#[test]
fn finite_time_laws_approach_the_limit() {
    let field = defect_field();
    let psi = up();
    let dist = limit(&field, &psi, 513);
    let report = compare_empirical(&psi, &field, &dist, &[250, 500, 1000, 2000], &default_v_grid(2201), 0.02).unwrap();
    assert!(report.nonincreasing_tail);
    let d: Vec<f64> = report.rows.iter().map(|r| r.kolmogorov_distance).collect();
    assert!(d[3] < d[0], "{d:?}");
    assert!(d[3] < 0.03);
    assert!(report.to_csv().starts_with("n,kolmogorov_distance,mean_n,mean_limit\n"));
}

fn bump(v: f64, lo: f64, hi: f64) -> f64 {
    let t = (2.0 * v - lo - hi) / (hi - lo);
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

#[test]
fn intertwining_residual_decays() {
    let field = two_phase();
    let prepare = |coin: &CoinMatrix, lo: f64, hi: f64| {
        let psi = LatticeState::from_entries((-3..=3).map(|x| (x, [C64::new(1.0, 0.2 * x as f64), C64::new(0.3, -0.5)])));
        let frame = MomentumFrame::around(&psi, 512);
        velocity_function(&psi, coin, |v| bump(v, lo, hi), &frame, 256, 1e-10).unwrap()
    };
    let pair = PairState::new(prepare(field.left(), -0.7, -0.1), prepare(field.right(), 0.1, 0.5));
    let early = verify_intertwining(&field, &pair, 4).unwrap();
    let late = verify_intertwining(&field, &pair, 1024).unwrap();
    assert!(late < 1e-2 * pair.norm(), "residual {late}");
    assert!(late < early);
}

#[test]
fn velocity_functions_ignore_the_eigenvector_gauge() {
    fn theta(k: f64, j: Branch) -> f64 {
        (2.0 * k).cos() * j as f64 + 0.5
    }
    let coin = CoinMatrix::from_params(0.7, 0.4, -1.1, 2.0).unwrap();
    let grid = VelocityGrid::new(coin.a(), 129).unwrap();
    let psi = LatticeState::from_entries([(0, [C64::new(0.6, 0.0), C64::new(0.0, 0.8)]), (2, [C64::new(0.1, 0.3), C64::new(0.2, 0.0)])]);
    let f = |v: f64| v * v - 0.2 * v;
    let route = |gauge: Gauge| {
        let mut out = LatticeState::zeros(-20, 20);
        for k in KOperator::all(coin).unwrap() {
            let k = k.with_gauge(gauge);
            out.add_scaled_in_place(&k.adjoint(&k.apply(&psi, &grid).multiplied(f), -20, 20), C64::new(1.0, 0.0));
        }
        out
    };
    let a = route(Gauge::Standard);
    let b = route(Gauge::Rephased(theta));
    assert!(a.distance(&b) < 1e-12);
    assert!(a.norm() > 1e-3);
}

#[test]
fn fast_side_moves_faster() {
    let field = CoinField::two_phase(
        CoinMatrix::from_params(0.9, 0.3, 0.2, 1.0).unwrap(),
        CoinMatrix::from_params(0.4, -0.5, 0.1, 2.0).unwrap(),
    );
    let psi = LatticeState::delta(0, [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)]);
    let dist = limit(&field, &psi, 257);
    let l = dist.density_l.as_ref().unwrap();
    let r = dist.density_r.as_ref().unwrap();
    let mean_speed = |d: &anisowalk::weaklimit::SideDensity| d.integrate(f64::abs) / d.mass();
    assert!(mean_speed(l) > mean_speed(r));
    assert!(dist.cdf(-0.9) < 1e-12);
    assert!((dist.cdf(0.4) - dist.total_mass()).abs() < 1e-12);
}
