use proptest::prelude::*;
use vicinal_core::*;

fn cap(dim: usize) -> AdmissibleCap {
    AdmissibleCap::standard(dim).unwrap()
}

fn point(seed: u64, dim: usize) -> SpherePoint {
    sample_point(&cap(dim), seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resolvent_is_firmly_vicinal(sx in any::<u64>(), sy in any::<u64>(), sa in any::<u64>(), dim in 3usize..7) {
        let f = ConvexFunctional::pull_to_point(point(sa, dim));
        let t = MappingHandle::resolvent_of(f, cap(dim)).unwrap();
        let (x, y) = (point(sx, dim), point(sy, dim));
        let r = properties::firmly_vicinal_residual(&t, &x, &y).unwrap();
        prop_assert!(r.residual >= -1e-9, "residual {}", r.residual);
    }

    #[test]
    fn projection_stays_in_ball(sx in any::<u64>(), radius in 0.05f64..0.55) {
        let ball = Ball::new(cap(3).center().clone(), radius).unwrap();
        let x = point(sx, 3);
        let p = metric_projection(&ball, &x).unwrap();
        prop_assert!(ball.contains(&p).unwrap());
        // projection never moves a point of the ball
        if ball.contains(&x).unwrap() {
            prop_assert!(dist(&p, &x).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn geodesic_point_splits_distance(sx in any::<u64>(), sy in any::<u64>(), alpha in 0.0f64..=1.0) {
        let (x, y) = (point(sx, 4), point(sy, 4));
        let m = geodesic_point(&x, &y, alpha).unwrap();
        let d = dist(&x, &y).unwrap();
        prop_assert!((dist(&x, &m).unwrap() - (1.0 - alpha) * d).abs() <= 1e-12);
        prop_assert!((dist(&m, &y).unwrap() - alpha * d).abs() <= 1e-12);
    }

    #[test]
    fn serde_roundtrip_is_exact(sx in any::<u64>()) {
        let x = point(sx, 5);
        let json = serde_json::to_string(&x).unwrap();
        let back: SpherePoint = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, x);
    }
}

#[test]
fn ppa_fejer_monotone_in_dim_four() {
    let cap = cap(4);
    let q = point(11, 4);
    let run = ppa_run(&ConvexFunctional::neg_cos_dist(q.clone()), &cap, &point(12, 4), PpaOptions::default()).unwrap();
    assert_eq!(run.trace.stop_reason, StopReason::Tolerance);
    let fejer = iteration::fejer_residuals(&run.trace).unwrap();
    assert!(fejer.iter().all(|r| *r >= -1e-9));
    assert!(dist(&run.minimizer, &q).unwrap() < 1e-6);
}

proptest! {
    #[test]
    fn parsing_a_serialized_point_is_identity(raw in proptest::collection::vec(-1.0f64..1.0, 2..8)) {
        prop_assume!(raw.iter().map(|c| c * c).sum::<f64>() > 1e-6);
        let p = SpherePoint::from_ambient(raw).unwrap();
        let q = SpherePoint::new(p.coords().to_vec()).unwrap();
        prop_assert_eq!(p.coords(), q.coords());
    }
}
