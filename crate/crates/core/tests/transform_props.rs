//! Similarity-transform properties over random inputs.

use depthforge_core::cloud::PointCloud;
use depthforge_core::transform::SimilarityTransform;
use nalgebra::{Point3, Unit, UnitQuaternion, Vector3};
use proptest::prelude::*;

fn arb_transform() -> impl Strategy<Value = SimilarityTransform<f64>> {
    (
        0.1f64..5.0,
        -3.0f64..3.0,
        -1.5f64..1.5,
        -3.0f64..3.0,
        prop::array::uniform3(-50.0f64..50.0),
    )
        .prop_map(|(s, roll, pitch, yaw, t)| {
            SimilarityTransform::new(
                s,
                UnitQuaternion::from_euler_angles(roll, pitch, yaw),
                Vector3::new(t[0], t[1], t[2]),
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pairwise_distance_ratios_are_preserved(
        t in arb_transform(),
        p in prop::array::uniform3(-100.0f64..100.0),
        q in prop::array::uniform3(-100.0f64..100.0),
    ) {
        let p = Point3::new(p[0], p[1], p[2]);
        let q = Point3::new(q[0], q[1], q[2]);
        let before = (p - q).norm();
        let after = (t.apply_point(&p) - t.apply_point(&q)).norm();
        prop_assert!((after - t.scale * before).abs() <= 1e-9 * t.scale * before.max(1.0));
    }

    #[test]
    fn normals_stay_unit_length(
        t in arb_transform(),
        n in prop::array::uniform3(-1.0f64..1.0),
    ) {
        prop_assume!(n.iter().map(|v| v * v).sum::<f64>() > 1e-4);
        let normal = Unit::new_normalize(Vector3::new(n[0], n[1], n[2]));
        let rotated = t.apply_normal(&normal);
        prop_assert!((rotated.as_ref().norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_composes_to_identity(
        t in arb_transform(),
        p in prop::array::uniform3(-100.0f64..100.0),
    ) {
        let p = Point3::new(p[0], p[1], p[2]);
        let round = t.compose(&t.inverse());
        prop_assert!((round.apply_point(&p) - p).norm() < 1e-9 * p.coords.norm().max(1.0));
    }
}

#[test]
fn cloud_transform_carries_fields() {
    let mut cloud = PointCloud::from_points(vec![
        Point3::new(1.0f64, 0.0, 0.0),
        Point3::new(0.0, 2.0, 0.0),
    ]);
    cloud.normals = Some(vec![
        Unit::new_normalize(Vector3::new(1.0, 1.0, 0.0)),
        Unit::new_normalize(Vector3::z()),
    ]);
    cloud.source_frames = Some(vec![3, 9]);
    let t = SimilarityTransform::new(
        2.0,
        UnitQuaternion::from_euler_angles(0.0, 0.0, std::f64::consts::FRAC_PI_2),
        Vector3::new(0.0, 0.0, 1.0),
    );
    let out = t.apply_cloud(&cloud);
    assert!((out.points[0] - Point3::new(0.0, 2.0, 1.0)).norm() < 1e-12);
    assert_eq!(out.source_frames, cloud.source_frames);
    // Normals rotate but do not scale.
    let n0 = out.normals.as_ref().unwrap()[0];
    assert!((n0.as_ref().norm() - 1.0).abs() < 1e-12);
    assert!((n0.into_inner() - Vector3::new(-1.0, 1.0, 0.0).normalize()).norm() < 1e-12);
}
