//! Variable cycles and clause segments.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use super::{Parity, ReductionError};
use crate::geom::{dist_sq, int, side_of_line, Point, Rational, Segment};

const ANGLE_BITS: u32 = 24;

/// Rational point on the unit circle at angle close to `phi`, from the
/// rational parametrisation `((1-t^2)/(1+t^2), 2t/(1+t^2))`.
pub fn unit_vector(phi: f64) -> Point {
    let mut a = phi.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    let flip = a.abs() > PI / 2.0;
    if flip {
        a = if a > 0.0 { a - PI } else { a + PI };
    }
    let den = 1i64 << ANGLE_BITS;
    let t = Rational::new(BigInt::from(((a / 2.0).tan() * den as f64).round() as i64), BigInt::from(den));
    let t2 = &t * &t;
    let one = Rational::one();
    let d = &one + &t2;
    let x = (&one - &t2) / &d;
    let y = (&t + &t) / &d;
    if flip {
        Point::new(-x, -y)
    } else {
        Point::new(x, y)
    }
}

pub fn angle_of(d: &Point) -> f64 {
    let (x, y) = d.to_f64();
    y.atan2(x)
}

/// Integer upper bound on `sqrt(r)` for `r >= 0`.
pub fn ceil_sqrt(r: &Rational) -> BigInt {
    let q = r.ceil().to_integer();
    let s = q.sqrt();
    if &s * &s < q {
        s + 1
    } else {
        s
    }
}

#[derive(Debug, Clone)]
pub struct VariableCycle {
    pub vertices: Vec<Point>,
    pub sides: Vec<Segment>,
    pub parities: Vec<Parity>,
    /// Corner point and the two sides crossing there.
    pub corners: Vec<(Point, [usize; 2])>,
    /// Side crossed by each incidence, in input order.
    pub incidence_side: Vec<usize>,
}

fn extended(p: &Point, q: &Point, ext: &Rational) -> Segment {
    let d = q.sub(p).scale(ext);
    Segment::new(p.sub(&d), q.add(&d))
}

/// Builds the gadget of one variable. `incidences` holds, per incident
/// clause edge, its direction away from `center` and the parity of the side
/// it has to cross.
pub fn build_variable_cycle(
    var: usize,
    center: &Point,
    radius: &Rational,
    incidences: &[(Point, Parity)],
    ext: &Rational,
) -> Result<VariableCycle, ReductionError> {
    let k = incidences.len();
    assert!(k >= 1, "variable cycle needs an incidence");
    for a in 0..k {
        for b in a + 1..k {
            let (da, db) = (&incidences[a].0, &incidences[b].0);
            if crate::geom::cross(da, db) == int(0) && crate::geom::dot(da, db) > int(0) {
                return Err(ReductionError::DegenerateDirections { var });
            }
        }
    }
    let at = |phi: f64| center.add(&unit_vector(phi).scale(radius));

    if k == 1 {
        let (dir, parity) = &incidences[0];
        let th = angle_of(dir);
        let p0 = at(th - PI / 4.0);
        let p1 = at(th + PI / 4.0);
        let p2 = at(th + 3.0 * PI / 4.0);
        let sides = vec![extended(&p0, &p1, ext), extended(&p1, &p2, ext)];
        return Ok(VariableCycle {
            vertices: vec![p0, p1.clone(), p2],
            sides,
            parities: vec![*parity, parity.flip()],
            corners: vec![(p1, [0, 1])],
            incidence_side: vec![0],
        });
    }

    let mut order: Vec<usize> = (0..k).collect();
    let angles: Vec<f64> = incidences.iter().map(|(d, _)| angle_of(d)).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));

    // slot j has parity j % 2; each incidence takes the next slot of its parity
    let m = 2 * k;
    let mut slot = vec![0usize; k];
    let mut prev: Option<usize> = None;
    for &i in &order {
        let want = incidences[i].1.index();
        let mut j = prev.map_or(want, |p| p + 1);
        if j % 2 != want {
            j += 1;
        }
        slot[i] = j;
        prev = Some(j);
    }
    let first = slot[order[0]];
    debug_assert!(slot[order[k - 1]] < first + m);

    let mut phi = vec![0f64; m];
    for (pos, &i) in order.iter().enumerate() {
        let next = order[(pos + 1) % k];
        let th0 = angles[i];
        let mut th1 = angles[next];
        let j1 = if pos + 1 == k { slot[next] + m } else { slot[next] };
        if th1 <= th0 {
            th1 += 2.0 * PI;
        }
        let count = j1 - slot[i];
        for step in 1..=count {
            phi[(slot[i] + step) % m] = th0 + (th1 - th0) * step as f64 / (count + 1) as f64;
        }
    }
    let vertices: Vec<Point> = phi.iter().map(|&f| at(f)).collect();
    let sides: Vec<Segment> = (0..m).map(|j| extended(&vertices[j], &vertices[(j + 1) % m], ext)).collect();
    let parities = (0..m).map(|j| if j % 2 == 0 { Parity::Even } else { Parity::Odd }).collect();
    let corners = (0..m).map(|j| (vertices[j].clone(), [(j + m - 1) % m, j])).collect();
    Ok(VariableCycle {
        vertices,
        sides,
        parities,
        corners,
        incidence_side: slot.iter().map(|s| s % m).collect(),
    })
}

/// Clause segment for the leg from `var_pos` to `clause_pos`, shifted along
/// its carrier towards the clause so that it starts inside the cycle (short of
/// `crossed`) and runs past the clause vertex.
pub fn clause_segment(var_pos: &Point, clause_pos: &Point, radius: &Rational, crossed: &Segment) -> Segment {
    let d = clause_pos.sub(var_pos);
    let len = Rational::from_integer(ceil_sqrt(&dist_sq(var_pos, clause_pos)));
    let mut lambda = radius / (len * int(4));
    let inside = side_of_line(var_pos, crossed);
    loop {
        let start = var_pos.add(&d.scale(&lambda));
        if side_of_line(&start, crossed) == inside {
            return Segment::new(start, clause_pos.add(&d.scale(&lambda)));
        }
        lambda /= int(2);
    }
}

pub fn f64_of(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{segments_cross_properly, segments_conflict};

    #[test]
    fn unit_vectors_are_exact() {
        for k in 0..64 {
            let u = unit_vector(k as f64 * 0.1 - 3.2);
            assert_eq!(&u.x * &u.x + &u.y * &u.y, int(1));
            let (x, y) = u.to_f64();
            let want = k as f64 * 0.1 - 3.2;
            assert!((x - want.cos()).abs() < 1e-6 && (y - want.sin()).abs() < 1e-6);
        }
    }

    fn ray_meets(center: &Point, dir: &Point, s: &Segment) -> bool {
        let far = center.add(&dir.scale(&int(1000)));
        segments_cross_properly(&Segment::new(center.clone(), far), s)
    }

    #[test]
    fn six_cycle_parities() {
        let c = Point::from_ints(0, 0);
        let dirs = [(1, 0, Parity::Even), (-1, 2, Parity::Even), (-1, -3, Parity::Odd)];
        let inc: Vec<(Point, Parity)> = dirs.iter().map(|&(x, y, p)| (Point::from_ints(x, y), p)).collect();
        let cyc = build_variable_cycle(0, &c, &int(5), &inc, &crate::geom::rat(1, 16)).unwrap();
        assert_eq!(cyc.sides.len(), 6);
        assert_eq!(cyc.corners.len(), 6);
        assert_eq!(cyc.parities.iter().filter(|p| **p == Parity::Even).count(), 3);
        for (i, (d, p)) in inc.iter().enumerate() {
            let s = cyc.incidence_side[i];
            assert_eq!(cyc.parities[s], *p);
            assert!(ray_meets(&c, d, &cyc.sides[s]));
        }
        for a in 0..6 {
            for b in a + 1..6 {
                let adjacent = b == a + 1 || (a == 0 && b == 5);
                assert_eq!(segments_conflict(&cyc.sides[a], &cyc.sides[b]), adjacent, "{a} {b}");
            }
        }
    }

    #[test]
    fn all_positive_hits_even_sides() {
        let c = Point::from_ints(0, 0);
        let inc: Vec<(Point, Parity)> = [(1, 1), (1, -1), (-2, 1), (-1, -5)]
            .iter()
            .map(|&(x, y)| (Point::from_ints(x, y), Parity::Even))
            .collect();
        let cyc = build_variable_cycle(0, &c, &int(4), &inc, &crate::geom::rat(1, 16)).unwrap();
        for (i, (d, _)) in inc.iter().enumerate() {
            assert_eq!(cyc.parities[cyc.incidence_side[i]], Parity::Even);
            assert!(ray_meets(&c, d, &cyc.sides[cyc.incidence_side[i]]));
        }
    }

    #[test]
    fn degree_one_gadget() {
        let c = Point::from_ints(0, 0);
        let cyc = build_variable_cycle(0, &c, &int(3), &[(Point::from_ints(0, 1), Parity::Odd)], &crate::geom::rat(1, 8))
            .unwrap();
        assert_eq!(cyc.sides.len(), 2);
        assert_eq!(cyc.parities, vec![Parity::Odd, Parity::Even]);
        assert!(segments_cross_properly(&cyc.sides[0], &cyc.sides[1]));
        assert!(ray_meets(&c, &Point::from_ints(0, 1), &cyc.sides[0]));
    }

    #[test]
    fn degenerate_directions() {
        let inc = [(Point::from_ints(1, 1), Parity::Odd), (Point::from_ints(2, 2), Parity::Even)];
        assert!(matches!(
            build_variable_cycle(3, &Point::from_ints(0, 0), &int(3), &inc, &crate::geom::rat(1, 8)),
            Err(ReductionError::DegenerateDirections { var: 3 })
        ));
    }
}
