use proptest::prelude::*;
use rdz_core::geo::{distance_3d, Grid, GridPos, ZoneBoundary};

/// Winding number of a closed polygon around `p`, with points on an edge
/// reported separately.
fn winding_oracle(v: &[GridPos], p: GridPos) -> bool {
    let n = v.len();
    let mut wn = 0i32;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let cross = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
        let within = p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y);
        if cross.abs() < 1e-9 && within {
            return true;
        }
        if a.y <= p.y {
            if b.y > p.y && cross > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && cross < 0.0 {
            wn -= 1;
        }
    }
    wn != 0
}

/// Star-shaped polygons around a center: sorted angles give a simple boundary.
fn star_polygon(size: f64) -> impl Strategy<Value = Vec<GridPos>> {
    (3usize..9, any::<u64>()).prop_flat_map(move |(n, _)| {
        (
            proptest::collection::vec(0.0..1.0f64, n),
            proptest::collection::vec(0.15..0.48f64, n),
            (0.3..0.7f64, 0.3..0.7f64),
        )
            .prop_map(move |(mut angles, radii, (cx, cy))| {
                angles.sort_by(f64::total_cmp);
                angles.dedup_by(|a, b| (*a - *b).abs() < 0.02);
                angles
                    .iter()
                    .zip(&radii)
                    .map(|(a, r)| {
                        let t = a * std::f64::consts::TAU;
                        // Snap to quarter cells so vertices and edges often hit cell centers.
                        let x = ((cx + r * t.cos()) * size * 4.0).round() / 4.0;
                        let y = ((cy + r * t.sin()) * size * 4.0).round() / 4.0;
                        GridPos::new(x.clamp(0.0, size - 1.0), y.clamp(0.0, size - 1.0))
                    })
                    .collect()
            })
    })
}

fn naive_obstruction(g: &Grid, a: GridPos, ah: f64, b: GridPos, bh: f64) -> usize {
    let steps = (b.x - a.x).abs().max((b.y - a.y).abs()).ceil() as usize;
    let n = steps as f64;
    let (start, end) = (g.cell_of(a), g.cell_of(b));
    let mut last = start;
    let mut count = 0;
    for i in 1..steps {
        let p = GridPos::new(a.x + (b.x - a.x) / n * i as f64, a.y + (b.y - a.y) / n * i as f64);
        let c = g.cell_of(p);
        let los = ah + (bh - ah) * (i as f64 / n);
        if c != last && c != start && c != end && g.elevation()[g.index(c.0, c.1)] > los {
            count += 1;
        }
        last = c;
    }
    count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contains_matches_winding_oracle(v in star_polygon(48.0)) {
        let g = Grid::flat(48, 48, 10.0).unwrap();
        let Ok(zone) = ZoneBoundary::new(v.clone(), &g) else {
            // Snapping can collapse a star into a degenerate shape.
            return Ok(());
        };
        let mut inside = 0;
        for y in 0..48 {
            for x in 0..48 {
                let p = GridPos::new(x as f64, y as f64);
                let c = zone.contains(p);
                prop_assert_eq!(c, winding_oracle(&v, p), "cell ({}, {})", x, y);
                inside += c as usize;
            }
        }
        prop_assert_eq!(zone.area(&g), inside);
        prop_assert_eq!(zone.outside_cells(&g).len(), 48 * 48 - inside);
    }

    #[test]
    fn distance_is_a_metric(
        pts in proptest::collection::vec((0.0..399.0f64, 0.0..399.0f64, 0.0..50.0f64), 3),
    ) {
        let g = Grid::flat(400, 400, 10.0).unwrap();
        let p: Vec<_> = pts.iter().map(|&(x, y, h)| (GridPos::new(x, y), h)).collect();
        let d = |i: usize, j: usize| distance_3d(p[i].0, p[i].1, p[j].0, p[j].1, &g);
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert!(d(0, 1) >= 0.0);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn obstruction_walk_matches_oracle(
        towers in proptest::collection::vec((0usize..64, 0usize..64, 1usize..6, 1usize..6, 0.0..60.0f64), 0..12),
        ends in ((0.0..63.0f64, 0.0..63.0f64, 0.5..40.0f64), (0.0..63.0f64, 0.0..63.0f64, 0.5..40.0f64)),
        cap in 1usize..90,
    ) {
        let mut elev = vec![0.0; 64 * 64];
        for (x, y, w, h, z) in towers {
            for yy in y..(y + h).min(64) {
                for xx in x..(x + w).min(64) {
                    elev[yy * 64 + xx] = z;
                }
            }
        }
        let g = Grid::with_elevation(64, 64, 10.0, elev).unwrap();
        let ((ax, ay, ah), (bx, by, bh)) = ends;
        let (a, b) = (GridPos::new(ax, ay), GridPos::new(bx, by));
        let (ah, bh) = (g.elevation_at(a) + ah, g.elevation_at(b) + bh);
        let want = naive_obstruction(&g, a, ah, b, bh).min(cap);
        prop_assert_eq!(g.obstructed_cells(a, ah, b, bh, cap), want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn indexed_walk_matches_plain_walk(
        towers in proptest::collection::vec((0usize..96, 0usize..96, 1usize..9, 1usize..9, 0.0..60.0f64), 0..10),
        origin in (0.0..95.0f64, 0.0..95.0f64, 0.5..40.0f64),
        rx_height in 0.5..5.0f64,
        cap in 1usize..90,
    ) {
        let mut elev = vec![0.0; 96 * 96];
        for (x, y, w, h, z) in towers {
            for yy in y..(y + h).min(96) {
                for xx in x..(x + w).min(96) {
                    elev[yy * 96 + xx] = z;
                }
            }
        }
        let g = Grid::with_elevation(96, 96, 10.0, elev).unwrap();
        let a = GridPos::new(origin.0, origin.1);
        let ah = g.elevation_at(a) + origin.2;
        let index = g.shadow_index(a, ah, rx_height);
        for y in 0..96 {
            for x in 0..96 {
                let b = GridPos::new(x as f64, y as f64);
                let bh = g.elevation_at(b) + rx_height;
                prop_assert_eq!(
                    g.obstructed_cells_indexed(&index, ah, b, bh, cap),
                    g.obstructed_cells(a, ah, b, bh, cap),
                    "ray to ({}, {})", x, y
                );
            }
        }
    }
}

#[test]
fn sliver_encloses_no_centers() {
    let g = Grid::flat(400, 400, 10.0).unwrap();
    let z = ZoneBoundary::new(
        vec![GridPos::new(10.2, 10.2), GridPos::new(20.7, 10.4), GridPos::new(15.1, 10.6)],
        &g,
    )
    .unwrap();
    assert_eq!(z.area(&g), 0);
}

#[test]
fn boundary_cells_of_rectangle_are_inside() {
    let g = Grid::flat(400, 400, 10.0).unwrap();
    let z = ZoneBoundary::rect(50.0, 50.0, 350.0, 350.0, &g).unwrap();
    let v = z.vertices().to_vec();
    for i in 0..400 {
        for p in [GridPos::new(i as f64, 50.0), GridPos::new(350.0, i as f64)] {
            assert_eq!(z.contains(p), winding_oracle(&v, p));
        }
    }
    assert_eq!(z.area(&g), 301 * 301);
}
