use orbit_census::dynamics::{billiard_map, birkhoff_coords, reflect, MapStep, PhasePoint};
use orbit_census::geometry::{hull_distance, validate_table, Vec2};
use orbit_census::{BilliardTable, Disk};
use proptest::prelude::*;

fn eclipsed_disks() -> Vec<Disk> {
    vec![
        Disk::new(0, [0.0, 0.0], 1.0),
        Disk::new(1, [8.0, 0.0], 1.0),
        Disk::new(2, [4.0, 0.5], 0.8),
        Disk::new(3, [4.0, 7.0], 1.2),
    ]
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn relabeling_permutes_offending_triples() {
    let disks = eclipsed_disks();
    let base = validate_table(&disks).unwrap();
    assert!(!base.offending_triples.is_empty());
    for perm in permutations(disks.len()) {
        let relabeled: Vec<Disk> = disks
            .iter()
            .map(|d| Disk { id: perm[d.id as usize] as u8, ..*d })
            .collect();
        let r = validate_table(&relabeled).unwrap();
        assert_eq!(r.min_eclipse_margin, base.min_eclipse_margin);
        assert_eq!(r.min_center_hull_distance, base.min_center_hull_distance);
        assert_eq!(r.min_gap, base.min_gap);
        let mut expected: Vec<_> = base
            .offending_triples
            .iter()
            .map(|&(i, j, k)| (perm[i as usize] as u8, perm[j as usize] as u8, perm[k as usize] as u8))
            .collect();
        let mut got = r.offending_triples.clone();
        expected.sort();
        got.sort();
        assert_eq!(got, expected, "permutation {perm:?}");
    }
}

fn disk_strategy(id: u8) -> impl Strategy<Value = Disk> {
    (-10.0..10.0f64, -10.0..10.0f64, 0.1..3.0f64).prop_map(move |(x, y, r)| Disk::new(id, [x, y], r))
}

fn motion(disk: &Disk, angle: f64, shift: (f64, f64)) -> Disk {
    let (c, s) = (angle.cos(), angle.sin());
    let p = disk.center;
    Disk::new(disk.id, [c * p.x - s * p.y + shift.0, s * p.x + c * p.y + shift.1], disk.radius)
}

proptest! {
    #[test]
    fn hull_distance_is_symmetric_and_below_both_disks(
        d1 in disk_strategy(0),
        d2 in disk_strategy(1),
        px in -15.0..15.0f64,
        py in -15.0..15.0f64,
    ) {
        let p = Vec2::new(px, py);
        let a = hull_distance(&d1, &d2, p);
        let b = hull_distance(&d2, &d1, p);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        let to_disk = |d: &Disk| ((p - d.center).norm() - d.radius).max(0.0);
        prop_assert!(a <= to_disk(&d1).min(to_disk(&d2)) + 1e-12);
    }

    #[test]
    fn rigid_motions_preserve_reported_distances(
        angle in 0.0..std::f64::consts::TAU,
        dx in -20.0..20.0f64,
        dy in -20.0..20.0f64,
    ) {
        for disks in [eclipsed_disks(), BilliardTable::square_four_disk(6.0, 1.0).obstacles().to_vec()] {
            let base = validate_table(&disks).unwrap();
            let moved: Vec<Disk> = disks.iter().map(|d| motion(d, angle, (dx, dy))).collect();
            let r = validate_table(&moved).unwrap();
            prop_assert!((r.min_gap - base.min_gap).abs() < 1e-12);
            prop_assert!((r.min_eclipse_margin - base.min_eclipse_margin).abs() < 1e-12);
            prop_assert!((r.min_center_hull_distance - base.min_center_hull_distance).abs() < 1e-12);
            for (t, u) in base.triples.iter().zip(&r.triples) {
                prop_assert!((t.margin - u.margin).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reflection_is_an_involution(a in 0.0..std::f64::consts::TAU, b in 0.0..std::f64::consts::TAU) {
        let n = Vec2::new(a.cos(), a.sin());
        let v = Vec2::new(b.cos(), b.sin());
        prop_assume!(v.dot(&n) < -1e-6);
        let w = reflect(v, n).unwrap();
        let back = reflect(-w, n).unwrap();
        prop_assert!((back + v).norm() < 1e-15);
    }

    #[test]
    fn reversed_flights_retrace_their_segment(
        id in 0u8..4,
        s in 0.0..std::f64::consts::TAU,
        p in -0.98..0.98f64,
    ) {
        let table = BilliardTable::square_four_disk(6.0, 1.0);
        let z = PhasePoint::from_birkhoff(table.disk(id), s, p);
        let Ok(MapStep::Bounce { next, flight_time }) = billiard_map(&z, &table) else {
            return Ok(());
        };
        // Arrive at `next` along the incoming ray, then leave backwards.
        let incoming = (next.position(&table) - z.position(&table)).normalize();
        let back = PhasePoint::new(next.obstacle_id, next.theta, -incoming);
        let (home, t_back) = billiard_map(&back, &table).unwrap().bounce().unwrap();
        prop_assert_eq!(home.obstacle_id, id);
        prop_assert!((t_back - flight_time).abs() < 1e-12);
        // Flight time is the Euclidean length of the segment.
        let seg = (next.position(&table) - z.position(&table)).norm();
        prop_assert!((seg - flight_time).abs() < 1e-12);
    }

    #[test]
    fn boundary_map_preserves_area(
        id in 0u8..4,
        target in 1u8..4,
        theta in 0.0..std::f64::consts::TAU,
        offset in -0.9..0.9f64,
    ) {
        // Non-glancing here means |sin φ| <= 0.8 at both ends. Closer to
        // grazing the O(h²) error of the central difference exceeds 1e-6.
        let table = BilliardTable::square_four_disk(6.0, 1.0);
        let disk = table.disk(id);
        let aim = table.disk((id + target) % 4).center;
        let from = disk.center + Vec2::new(theta.cos(), theta.sin());
        let perp = Vec2::new(-(aim - from).y, (aim - from).x).normalize();
        let z = PhasePoint::new(id, theta, (aim + offset * perp - from).normalize());
        prop_assume!(z.direction.dot(&z.normal()) > 0.0);
        let (s, p) = birkhoff_coords(&z, disk);
        prop_assume!(p.abs() <= 0.8);
        let image = |s: f64, p: f64| {
            billiard_map(&PhasePoint::from_birkhoff(disk, s, p), &table)
                .ok()
                .and_then(MapStep::bounce)
                .map(|(z, _)| (z.obstacle_id, birkhoff_coords(&z, table.disk(z.obstacle_id))))
        };
        let h = 1e-6;
        let probes = [(s + h, p), (s - h, p), (s, p + h), (s, p - h)];
        let imgs: Vec<_> = probes.iter().filter_map(|&(a, b)| image(a, b)).collect();
        prop_assume!(imgs.len() == 4 && imgs.iter().all(|i| i.0 == imgs[0].0));
        prop_assume!(imgs.iter().all(|i| i.1 .1.abs() <= 0.8));
        let c = table.disk(imgs[0].0).circumference();
        let ds = |a: f64, b: f64| ((a - b + 0.5 * c).rem_euclid(c) - 0.5 * c) / (2.0 * h);
        let det = ds(imgs[0].1 .0, imgs[1].1 .0) * (imgs[2].1 .1 - imgs[3].1 .1) / (2.0 * h)
            - ds(imgs[2].1 .0, imgs[3].1 .0) * (imgs[0].1 .1 - imgs[1].1 .1) / (2.0 * h);
        prop_assert!((det.abs() - 1.0).abs() < 1e-6, "det = {}", det);
    }
}
