//! Cross-module invariants over randomized inputs.

use proptest::prelude::*;

use tanksim::gmproc::{froude_scale, GroundMotion};
use tanksim::mechmodel::{convective_params, impulsive_params};
use tanksim::model::{liquid_mass, Anchorage};
use tanksim::simulate::{assemble_system, newmark, NewmarkParams, RotationSpring, SystemOptions};
use tanksim::text::num;
use tanksim::uplift::{pinned_closed_form, solve_strip, EndRestraint, StripModel, UpliftCurve};
use tanksim::{Exec, ScaleModel, TankSpec};

fn tank(radius: f64, gamma: f64) -> TankSpec {
    let mut spec = TankSpec::broad();
    spec.geometry.radius = radius;
    spec.geometry.fill_height = gamma * radius;
    spec.geometry.total_height = 1.1 * gamma * radius;
    spec.geometry.anchorage = Anchorage::Anchored;
    spec.declared_total_mass = None;
    spec
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn impulsive_and_convective_masses_close(radius in 0.5f64..10.0, gamma in 0.3f64..3.0) {
        let spec = tank(radius, gamma);
        let mi = impulsive_params(&spec).mass;
        let mc: f64 = convective_params(&spec, 50).unwrap().iter().map(|m| m.mass).sum();
        let ml = liquid_mass(&spec);
        prop_assert!(((mi + mc) / ml - 1.0).abs() < 0.005);
    }

    #[test]
    fn convective_periods_follow_froude_scaling(radius in 0.5f64..10.0, gamma in 0.3f64..3.0, lambda in 0.05f64..1.0) {
        let spec = tank(radius, gamma);
        let small = spec.geometrically_scaled(lambda);
        let a = convective_params(&spec, 3).unwrap();
        let b = convective_params(&small, 3).unwrap();
        for (p, m) in a.iter().zip(&b) {
            prop_assert!((m.period / (p.period * lambda.sqrt()) - 1.0).abs() < 1e-12);
            prop_assert!((m.mass / (p.mass * lambda.powi(3)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pinned_strip_matches_closed_form(log_d in 0.0f64..3.0, log_q in 3.0f64..5.0, log_w in -4.0f64..-1.5) {
        let (d, q, w) = (10f64.powf(log_d), 10f64.powf(log_q), 10f64.powf(log_w));
        let strip = StripModel {
            rigidity: d,
            load: q,
            length: StripModel::length_for(d, q, w),
            nodes: 200,
            restraint: EndRestraint::Pinned,
        };
        let s = solve_strip(&strip, w).unwrap();
        let (p, l) = pinned_closed_form(d, q, w);
        prop_assert!((s.edge_force / p - 1.0).abs() < 0.01, "P {} vs {p}", s.edge_force);
        prop_assert!((s.uplift_length / l - 1.0).abs() < 0.01, "l {} vs {l}", s.uplift_length);
        prop_assert!(s.complementarity() < 1e-10 * q * strip.length / 200.0);
    }

    #[test]
    fn edge_force_grows_with_uplift(spring in 0.0f64..500.0) {
        let spec = TankSpec::broad();
        let strip = StripModel::for_tank(&spec, 0.01, 120, Some(EndRestraint::RotationSpring(spring))).unwrap();
        let w: Vec<f64> = (0..=12).map(|k| 0.01 * (k as f64 / 12.0).powi(2)).collect();
        let curve = UpliftCurve::compute(&strip, &w, Exec::Sequential).unwrap();
        prop_assert!(curve.is_monotone());
    }

    #[test]
    fn rotation_spring_energy_is_moment_integral(
        steps in prop::collection::vec((1e-4f64..1e-2, 0.0f64..1e5), 2..8),
        frac in 0.0f64..1.5,
    ) {
        let mut rotation = vec![0.0];
        let mut moment = vec![0.0];
        for (dr, dm) in &steps {
            rotation.push(rotation.last().unwrap() + dr);
            moment.push(moment.last().unwrap() + dm);
        }
        let uplift = rotation.iter().map(|r| 0.5 * r).collect();
        let theta = frac * rotation.last().unwrap();
        let spring = RotationSpring { rotation, moment, uplift };
        let h = 1e-7;
        let fd = (spring.energy(theta + h) - spring.energy((theta - h).max(0.0))) / (theta + h - (theta - h).max(0.0));
        let (m, _) = spring.moment(theta);
        let (mp, _) = spring.moment(theta + h);
        let (mm, _) = spring.moment((theta - h).max(0.0));
        // the secant lies between the moments at its ends
        prop_assert!(fd >= mm.min(mp) - 1e-6 * (1.0 + m.abs()) && fd <= mm.max(mp) + 1e-6 * (1.0 + m.abs()));
        prop_assert_eq!(spring.energy(-theta), spring.energy(theta));
        prop_assert_eq!(spring.moment(-theta).0, -m);
    }

    #[test]
    fn csv_numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(num(x).parse::<f64>().unwrap(), if x == 0.0 { 0.0 } else { x });
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn anchored_response_scales_with_record(factor in -3.0f64..3.0, freq in 0.2f64..4.0) {
        let mut spec = TankSpec::broad();
        spec.geometry.anchorage = Anchorage::Anchored;
        let sys = assemble_system(&spec, &SystemOptions::default(), None).unwrap();
        let gm = GroundMotion::sine("s", 1.0, freq, 0.01, 3.0);
        let a = newmark(&sys, &gm, &NewmarkParams::default()).unwrap();
        let b = newmark(&sys, &gm.scaled_amplitude(factor), &NewmarkParams::default()).unwrap();
        let peak = a.base_shear.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.base_shear.iter().zip(&b.base_shear) {
            prop_assert!((y - factor * x).abs() <= 1e-9 * peak * factor.abs().max(1.0));
        }
    }

    #[test]
    fn froude_scaled_record_preserves_accelerations(lambda in 0.01f64..1.0) {
        let gm = GroundMotion::sine("s", 2.0, 1.0, 0.01, 2.0);
        let scaled = froude_scale(&gm, ScaleModel::new(lambda).unwrap());
        prop_assert_eq!(&scaled.accel, &gm.accel);
        prop_assert!((scaled.dt / gm.dt - lambda.sqrt()).abs() < 1e-15);
    }
}
