//! Rigid transforms and turning axes.

use nalgebra::{Matrix3, Point3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-9;

/// A proper rigid motion: rotation followed by translation, `x -> R x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl RigidTransform {
    /// Builds a transform, rejecting rotation matrices that are not proper
    /// orthonormal (determinant +1 within 1e-9).
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let det = rotation.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::InvalidTransform(format!(
                "rotation determinant {det} is not +1"
            )));
        }
        let gram = rotation.transpose() * rotation;
        if (gram - Matrix3::identity()).norm() > 1e-7 {
            return Err(Error::InvalidTransform(
                "rotation columns are not orthonormal".into(),
            ));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn translation(t: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    /// Rotation about an arbitrary point: `x -> R (x - pivot) + pivot`.
    pub fn rotation_about(rotation: Matrix3<f64>, pivot: Point3<f64>) -> Result<Self> {
        let t = pivot.coords - rotation * pivot.coords;
        Self::new(rotation, t)
    }

    /// Rotation by `angle` radians about the given axis direction through `pivot`.
    pub fn axis_angle_about(dir: Unit<Vector3<f64>>, angle: f64, pivot: Point3<f64>) -> Self {
        let rot = nalgebra::Rotation3::from_axis_angle(&dir, angle);
        Self::rotation_about(rot.into_inner(), pivot)
            .expect("axis-angle rotation is always proper")
    }

    /// The shortest rotation carrying `from` onto `to` (both unit), as a transform
    /// about the origin.
    pub fn rotation_between(from: Unit<Vector3<f64>>, to: Unit<Vector3<f64>>) -> Self {
        let rot = nalgebra::Rotation3::rotation_between(&from, &to).unwrap_or_else(|| {
            // Antiparallel: rotate by pi about any perpendicular axis.
            let perp = Unit::new_normalize(perpendicular(&from));
            nalgebra::Rotation3::from_axis_angle(&perp, std::f64::consts::PI)
        });
        Self {
            rotation: rot.into_inner(),
            translation: Vector3::zeros(),
        }
    }

    pub fn rotation_matrix(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation_vector(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn apply_point(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// Composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rot_inv = self.rotation.transpose();
        RigidTransform {
            rotation: rot_inv,
            translation: -(rot_inv * self.translation),
        }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        (self.rotation - Matrix3::identity()).norm() <= tol && self.translation.norm() <= tol
    }
}

/// An oriented line in space: a point on the line and a unit direction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Axis {
    point: Point3<f64>,
    #[serde(with = "unit_vector_serde")]
    dir: Unit<Vector3<f64>>,
}

impl Axis {
    pub fn new(point: Point3<f64>, dir: Vector3<f64>) -> Result<Self> {
        let norm = dir.norm();
        if norm < 1e-12 {
            return Err(Error::DegenerateAxis);
        }
        Ok(Self {
            point,
            dir: Unit::new_normalize(dir),
        })
    }

    /// The machine spindle axis: +z through the origin.
    pub fn spindle() -> Self {
        Self {
            point: Point3::origin(),
            dir: Vector3::z_axis(),
        }
    }

    pub fn point(&self) -> Point3<f64> {
        self.point
    }

    pub fn dir(&self) -> Unit<Vector3<f64>> {
        self.dir
    }

    /// Deterministic right-handed frame `(e1, e2, dir)` with `e1, e2` spanning the
    /// plane perpendicular to the axis.
    pub fn frame(&self) -> (Vector3<f64>, Vector3<f64>) {
        let e1 = perpendicular(&self.dir).normalize();
        let e2 = self.dir.cross(&e1);
        (e1, e2)
    }

    /// Cylindrical coordinates of `p` about this axis: `(z, r)`.
    pub fn to_cylindrical(&self, p: &Point3<f64>) -> (f64, f64) {
        let v = p - self.point;
        let z = v.dot(&self.dir);
        let radial = v - z * self.dir.into_inner();
        (z, radial.norm())
    }

    /// Point at axial coordinate `z`, radius `r`, and angle `theta` in the axis frame.
    pub fn from_cylindrical(&self, z: f64, r: f64, theta: f64) -> Point3<f64> {
        let (e1, e2) = self.frame();
        self.point + z * self.dir.into_inner() + r * (theta.cos() * e1 + theta.sin() * e2)
    }

    /// Angle in `[0, pi/2]` between this axis line and another, ignoring orientation.
    pub fn line_angle_to(&self, other: &Axis) -> f64 {
        self.dir.dot(&other.dir).abs().clamp(0.0, 1.0).acos()
    }
}

/// Some vector perpendicular to `v`, chosen deterministically.
fn perpendicular(v: &Vector3<f64>) -> Vector3<f64> {
    // Cross with the coordinate axis of smallest |component| to stay well-conditioned.
    let a = v.x.abs();
    let b = v.y.abs();
    let c = v.z.abs();
    let basis = if a <= b && a <= c {
        Vector3::x()
    } else if b <= c {
        Vector3::y()
    } else {
        Vector3::z()
    };
    v.cross(&basis)
}

mod unit_vector_serde {
    use nalgebra::{Unit, Vector3};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        v: &Unit<Vector3<f64>>,
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        [v.x, v.y, v.z].serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<Unit<Vector3<f64>>, D::Error> {
        let raw = <[f64; 3]>::deserialize(de)?;
        let v = Vector3::new(raw[0], raw[1], raw[2]);
        if v.norm() < 1e-12 {
            return Err(serde::de::Error::custom("axis direction has zero length"));
        }
        Ok(Unit::new_normalize(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn compose_is_associative() {
        let a = RigidTransform::axis_angle_about(
            Vector3::x_axis(),
            0.3,
            Point3::new(1.0, 2.0, 3.0),
        );
        let b = RigidTransform::axis_angle_about(
            Vector3::y_axis(),
            -1.1,
            Point3::new(-2.0, 0.5, 0.0),
        );
        let c = RigidTransform::translation(Vector3::new(4.0, -1.0, 2.0));
        let p = Point3::new(0.7, -0.2, 1.9);
        let lhs = a.compose(&b).compose(&c).apply_point(&p);
        let rhs = a.compose(&b.compose(&c)).apply_point(&p);
        assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn inverse_round_trip() {
        let t = RigidTransform::axis_angle_about(
            Unit::new_normalize(Vector3::new(1.0, 1.0, -0.5)),
            2.1,
            Point3::new(0.3, 0.0, -1.0),
        );
        let p = Point3::new(5.0, -3.0, 2.0);
        let q = t.inverse().apply_point(&t.apply_point(&p));
        assert_relative_eq!(p, q, epsilon = 1e-12);
        assert!(t.compose(&t.inverse()).is_identity(1e-12));
    }

    #[test]
    fn improper_rotation_rejected() {
        let mut m = Matrix3::identity();
        m[(0, 0)] = -1.0; // reflection
        assert!(RigidTransform::new(m, Vector3::zeros()).is_err());
    }

    #[test]
    fn zero_direction_rejected() {
        assert!(Axis::new(Point3::origin(), Vector3::zeros()).is_err());
    }

    #[test]
    fn cylindrical_round_trip() {
        let axis = Axis::new(Point3::new(1.0, 0.0, -2.0), Vector3::new(0.0, 1.0, 1.0)).unwrap();
        let p = axis.from_cylindrical(3.0, 1.5, 0.8);
        let (z, r) = axis.to_cylindrical(&p);
        assert_relative_eq!(z, 3.0, epsilon = 1e-12);
        assert_relative_eq!(r, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn rotation_between_antiparallel() {
        let t = RigidTransform::rotation_between(Vector3::z_axis(), -Vector3::z_axis());
        let v = t.apply_vector(&Vector3::z());
        assert_relative_eq!(v, -Vector3::z(), epsilon = 1e-12);
    }
}
