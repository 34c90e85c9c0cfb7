mod common;

use std::f64::consts::TAU;

use common::*;
use fracdyn::flow::Similarity;
use fracdyn::fracdim::{seq_gap_dim, seq_order_dim, spiral_grid, CurveEstimator, Registry, SausageOptions};
use fracdyn::models::{closed_spiral, gen_trig, ClosedSpiralKind};
use fracdyn::numerics::quad::integrate;
use fracdyn::slowfast::{entry_exit_sequence, Mode};
use proptest::prelude::*;

fn box_dim(tr: &fracdyn::flow::Trajectory) -> f64 {
    let reg = Registry::<dyn CurveEstimator>::curves(SausageOptions::default());
    let grid = spiral_grid(tr, 24).unwrap();
    reg.get("box").unwrap().estimate(tr, &grid).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn similarity_keeps_box_dimension(
        alpha in 0.3f64..0.8,
        angle in 0.0f64..TAU,
        scale in 0.1f64..10.0,
        dx in -5.0f64..5.0,
        dy in -5.0f64..5.0,
    ) {
        let tr = closed_spiral(ClosedSpiralKind::PowerSpiral { alpha }, (1.0, 60.0 * TAU), 256).unwrap();
        let base = box_dim(&tr);
        let moved = box_dim(&tr.transformed(Similarity { scale: 1.0, angle, shift: [dx, dy] }));
        prop_assert!((moved - base).abs() <= 0.02, "{moved} vs {base}");
        let scaled = box_dim(&tr.transformed(Similarity { scale, angle: 0.0, shift: [0.0, 0.0] }));
        prop_assert!((scaled - base).abs() <= 0.02, "{scaled} vs {base}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3))]

    #[test]
    fn box_and_sausage_agree(alpha in 0.3f64..0.9) {
        let (b, s) = curve_dims(&zoo_curve("power-spiral", &power(alpha)));
        prop_assert!((b - s).abs() <= 0.04, "box {b} sausage {s}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn hopf_dimension_ignores_first_element(y0 in 0.5f64..2.0) {
        let ctx = slow_fast("y - x^2", "-x + 0.3*x^2");
        let a = entry_exit_sequence(&ctx, y0, 40, Mode::Hopf).unwrap();
        let b = entry_exit_sequence(&ctx, a.values.values()[1], 40, Mode::Hopf).unwrap();
        let (da, db) = (seq_gap_dim(&a.values).unwrap().value, seq_gap_dim(&b.values).unwrap().value);
        prop_assert!((da - db).abs() <= 0.02, "{da} vs {db}");
    }

    #[test]
    fn canard_dimension_ignores_first_element(offset in 0.02f64..0.06) {
        let ctx = slow_fast("y - x^2", "-x - x^2 + 20*x^4");
        let ys = ctx.balanced_canard_level((0.01, 0.15), 64).unwrap();
        let mode = Mode::Canard(ys);
        let a = entry_exit_sequence(&ctx, ys + offset, 40, mode).unwrap();
        let b = entry_exit_sequence(&ctx, a.values.values()[1], 40, mode).unwrap();
        let (da, db) = (seq_order_dim(&a.values).unwrap().value, seq_order_dim(&b.values).unwrap().value);
        prop_assert!((da - db).abs() <= 0.02, "{da} vs {db}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetric_system_has_no_divergence(y in 1e-4f64..2.0) {
        let ctx = slow_fast("y - x^2", "-x");
        let v = ctx.tilde_i(y).unwrap();
        prop_assert!(v.abs() <= 1e-10, "Ĩ({y}) = {v}");
    }

    #[test]
    fn sdi_is_additive(yt in 0.01f64..1.0, yb in 0.01f64..1.0, c1 in 0.05f64..0.5, c2 in 0.5f64..0.95) {
        let ctx = slow_fast("y - x^2", "-x + 0.3*x^2");
        let f = |a: f64, b: f64| integrate(|x| 4.0 * x / (-1.0 + 0.3 * x), a, b, 1e-14, 1e-14, 2000).value;
        let (lo, hi) = (-yb.sqrt(), yt.sqrt());
        let cuts = [lo, lo + c1 * (hi - lo), lo + c2 * (hi - lo), hi];
        let parts: f64 = cuts.windows(2).map(|w| f(w[0], w[1])).sum();
        let whole = ctx.sdi(yt, yb).unwrap().value;
        prop_assert!((whole - parts).abs() <= 1e-9, "{whole} vs {parts}");
    }

    #[test]
    fn sdi_matches_oracles(i in 0usize..3, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let o = &sdi_oracles()[i];
        let (lo, hi) = o.levels;
        let (yt, yb) = (lo * (hi / lo).powf(u), lo * (hi / lo).powf(v));
        let got = slow_fast(o.f, o.g).sdi(yt, yb).unwrap().value;
        prop_assert!((got - o.value(yt, yb)).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gen_trig_conserves_energy(i in 0u32..11, j in 0u32..6) {
        let (m, n) = (2 * i + 1, 2 * j + 1);
        let t = gen_trig(m, n, 1000).unwrap();
        for s in &t.samples {
            let e = s[1].powi(2 * m as i32) + s[2].powi(2 * n as i32) - 1.0;
            prop_assert!(e.abs() <= 1e-9, "({m},{n}) at φ={}: {e}", s[0]);
        }
    }
}
