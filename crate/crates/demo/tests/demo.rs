use cdma_downlink::policy::PolicyKind;
use cdma_downlink_demo::{Demo, DemoParams};

fn demo() -> Demo {
    Demo::new(DemoParams::default()).unwrap()
}

#[test]
fn snapshot_accounts_for_every_mobile() {
    let s = demo().snapshot();
    assert_eq!(s.stations.len(), 50);
    assert_eq!(s.mobiles.len(), 200);
    let served = s.mobiles.iter().filter(|m| m.serving.is_some()).count();
    assert_eq!(served + s.denied, 200);
    assert_eq!(s.stations.iter().map(|b| b.load).sum::<usize>(), served);
    assert!(s.stations.iter().all(|b| b.load <= 16));
    for m in &s.mobiles {
        assert!(m.x.hypot(m.y) <= s.radius);
        assert_eq!(
            m.serving.is_none(),
            m.rate_control == 0.0 && m.power_control == 0.0
        );
    }
}

#[test]
fn nearest_mobile_finds_itself() {
    let d = demo();
    let s = d.snapshot();
    for j in [0, 17, 199] {
        assert_eq!(d.nearest_mobile(s.mobiles[j].x, s.mobiles[j].y), Some(j));
    }
}

#[test]
fn outage_curve_crosses_target_at_threshold() {
    let d = demo();
    let j = d
        .snapshot()
        .mobiles
        .iter()
        .position(|m| m.serving.is_some())
        .unwrap();
    let o = d.outage_curve(j, 41).unwrap().unwrap();
    assert_eq!(o.curves.len(), 2);
    for c in &o.curves {
        // the middle of an odd-length grid sits exactly on β*
        let (beta, eps) = c.points[20];
        assert_eq!(beta, c.beta_star);
        assert!((eps - o.epsilon_hat).abs() < 1e-8, "{eps}");
        assert!(c
            .points
            .windows(2)
            .all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
        assert!((c.rate - (1.0 + c.beta_star).log2()).abs() < 1e-12);
        assert!(c.points[0].1 < 1e-3 && c.points[40].1 > 0.99);
    }
    assert!(d.outage_curve(10_000, 10).is_err());
}

#[test]
fn denied_mobiles_have_no_curve() {
    let params = DemoParams {
        km: 20.0,
        ..Default::default()
    };
    let d = Demo::new(params).unwrap();
    let s = d.snapshot();
    let j = s
        .mobiles
        .iter()
        .position(|m| m.serving.is_none())
        .expect("overloaded cells at K/M = 20");
    assert!(d.outage_curve(j, 10).unwrap().is_none());
}

#[test]
fn single_trial_ccdf_matches_the_snapshot() {
    let d = demo();
    let s = d.snapshot();
    let curves = d.rate_ccdf(1).unwrap();
    let kinds: Vec<_> = curves.iter().map(|c| c.policy).collect();
    assert_eq!(kinds, PolicyKind::ALL);
    for c in &curves {
        let rates: Vec<f64> = s
            .mobiles
            .iter()
            .map(|m| {
                if c.policy == PolicyKind::RateControl {
                    m.rate_control
                } else {
                    m.power_control
                }
            })
            .collect();
        let mean = rates.iter().sum::<f64>() / rates.len() as f64;
        assert!((c.mean_rate - mean).abs() < 1e-12);
        for &(r, p) in &c.points {
            let direct = rates.iter().filter(|&&x| x > r).count() as f64 / rates.len() as f64;
            assert_eq!(p, direct);
        }
        assert!(c.points.windows(2).all(|w| w[1].1 <= w[0].1));
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    let bad = DemoParams {
        alpha: 1.0,
        ..Default::default()
    };
    assert!(Demo::new(bad).is_err());
}
