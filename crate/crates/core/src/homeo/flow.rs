use crate::geometry::Point;

pub const DEFAULT_STEPS: usize = 64;

/// Fixed-step RK4 over t ∈ [0, 1]; `backward` integrates the reversed field.
pub fn rk4<F: Fn(Point) -> Point>(x: Point, field: F, steps: usize, backward: bool) -> Point {
    let h = if backward { -1.0 } else { 1.0 } / steps as f64;
    let mut y = x;
    for _ in 0..steps {
        let k1 = field(y);
        let k2 = field(y + k1 * (h / 2.0));
        let k3 = field(y + k2 * (h / 2.0));
        let k4 = field(y + k3 * h);
        y += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
    }
    y
}
