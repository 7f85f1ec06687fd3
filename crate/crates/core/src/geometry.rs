//! Site layout, wrap-around, the Manhattan microcell overlay and user drops.
//!
//! Conventions: flat-top hexagons (vertices at 0, 60, ... deg), sites at
//! hexagon centers indexed centre-first then ring by ring, and three sectors
//! per site with boresights at 30, 150 and 270 deg. Sector `k` belongs to
//! site `k / 3`. All coordinates are in km.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::{link_gain, Layer, PropagationParams, Transmitter};

pub const SECTORS_PER_SITE: usize = 3;
pub const SECTOR_BORESIGHTS_DEG: [f64; SECTORS_PER_SITE] = [30.0, 150.0, 270.0];
/// Half-width of a sector's coverage wedge.
pub const SECTOR_HALF_WIDTH_DEG: f64 = 60.0;
pub const DEFAULT_MAX_ATTEMPTS: usize = 10_000;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// RNG sub-streams of a drop seed.
pub(crate) const STREAM_POSITIONS: u64 = 0;
pub(crate) const STREAM_MACRO_SHADOW: u64 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn offset(self, by: Point) -> Point {
        Point::new(self.x + by.x, self.y + by.y)
    }

    pub fn scaled(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HexLayout {
    pub cell_count: usize,
    pub cell_radius_km: f64,
    /// Number of rings around the centre cell.
    pub rings: usize,
    /// Axial `(q, r)` coordinates of each site.
    pub axial: Vec<(i32, i32)>,
    pub site_positions: Vec<Point>,
    pub sector_boresights: Vec<[f64; SECTORS_PER_SITE]>,
}

fn axial_to_point(q: i32, r: i32, radius: f64) -> Point {
    Point::new(
        radius * 1.5 * q as f64,
        radius * SQRT3 * (r as f64 + q as f64 / 2.0),
    )
}

/// Axial coordinates of a hexagonal cluster with `rings` rings, centre first.
fn hex_cluster(rings: usize) -> Vec<(i32, i32)> {
    const DIRS: [(i32, i32); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];
    let mut out = vec![(0, 0)];
    for k in 1..=rings as i32 {
        let (mut q, mut r) = (DIRS[4].0 * k, DIRS[4].1 * k);
        for dir in DIRS {
            for _ in 0..k {
                out.push((q, r));
                q += dir.0;
                r += dir.1;
            }
        }
    }
    out
}

/// Rings needed for a centred hexagonal number of cells (1, 7, 19, 37, ...).
fn rings_for(cell_count: usize) -> Option<usize> {
    (0..64).find(|&n| 3 * n * (n + 1) + 1 == cell_count)
}

pub fn build_hex_layout(cell_count: usize, cell_radius_km: f64) -> Result<HexLayout> {
    let rings = rings_for(cell_count).ok_or_else(|| {
        Error::config(
            "cell_count",
            format!(
                "{cell_count} is not a centred hexagonal number; supported: 1, 7, 19, 37, 61, ..."
            ),
        )
    })?;
    if !(cell_radius_km.is_finite() && cell_radius_km > 0.0) {
        return Err(Error::config(
            "cell_radius_km",
            format!("must be positive, got {cell_radius_km}"),
        ));
    }
    let axial = hex_cluster(rings);
    let site_positions = axial
        .iter()
        .map(|&(q, r)| axial_to_point(q, r, cell_radius_km))
        .collect();
    Ok(HexLayout {
        cell_count,
        cell_radius_km,
        rings,
        sector_boresights: vec![SECTOR_BORESIGHTS_DEG; cell_count],
        axial,
        site_positions,
    })
}

impl HexLayout {
    pub fn sector_count(&self) -> usize {
        self.cell_count * SECTORS_PER_SITE
    }

    pub fn sector_site(&self, sector: usize) -> usize {
        sector / SECTORS_PER_SITE
    }

    pub fn sector_boresight_deg(&self, sector: usize) -> f64 {
        self.sector_boresights[sector / SECTORS_PER_SITE][sector % SECTORS_PER_SITE]
    }

    /// Macro sector transmitters, indexed by sector id.
    pub fn sectors(&self) -> Vec<Transmitter> {
        (0..self.sector_count())
            .map(|k| Transmitter {
                layer: Layer::Macro,
                position: self.site_positions[self.sector_site(k)],
                boresight_deg: Some(self.sector_boresight_deg(k)),
            })
            .collect()
    }

    /// Distance between neighbouring site centres (`sqrt(3) * radius`).
    pub fn site_spacing_km(&self) -> f64 {
        SQRT3 * self.cell_radius_km
    }

    /// Whether `p` lies inside (or on the border of) site `site`'s hexagon.
    pub fn contains(&self, site: usize, p: Point) -> bool {
        in_flat_hexagon(p, self.site_positions[site], self.cell_radius_km)
    }
}

fn in_flat_hexagon(p: Point, centre: Point, radius: f64) -> bool {
    let eps = 1e-12 * radius;
    let dx = (p.x - centre.x).abs();
    let dy = (p.y - centre.y).abs();
    dy <= SQRT3 / 2.0 * radius + eps && SQRT3 * dx + dy <= SQRT3 * radius + eps
}

/// The cluster plus its six translated copies (toroidal wrap-around).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WrapAround {
    /// Identity first, then the six cluster translations.
    pub image_offsets: Vec<Point>,
}

impl WrapAround {
    pub fn for_layout(layout: &HexLayout) -> Self {
        let n = layout.rings as i32;
        // cube coordinates of the first tiling translation
        let (mut q, mut r, mut s) = (2 * n + 1, -n, -n - 1);
        let mut image_offsets = vec![Point::default()];
        for _ in 0..6 {
            image_offsets.push(axial_to_point(q, r, layout.cell_radius_km));
            (q, r, s) = (-r, -s, -q);
        }
        debug_assert_eq!(q + r + s, 0);
        WrapAround { image_offsets }
    }

    /// No wrap-around: only the identity image.
    pub fn identity() -> Self {
        WrapAround {
            image_offsets: vec![Point::default()],
        }
    }

    /// The image of `target` closest to `from`.
    pub fn nearest_image(&self, from: Point, target: Point) -> Point {
        let mut best = target;
        let mut best_d = f64::INFINITY;
        for &off in &self.image_offsets {
            let img = target.offset(off);
            let d = img.distance(from);
            if d < best_d {
                best_d = d;
                best = img;
            }
        }
        best
    }

    pub fn wrapped_distance(&self, a: Point, b: Point) -> f64 {
        self.image_offsets
            .iter()
            .map(|&off| a.distance(b.offset(off)))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManhattanOverlay {
    pub block_size_m: f64,
    pub street_width_m: f64,
    pub micro_positions: Vec<Point>,
    /// Hosting site of each microcell.
    pub micro_site: Vec<usize>,
    pub per_cell_counts: Vec<usize>,
}

impl ManhattanOverlay {
    pub fn total(&self) -> usize {
        self.micro_positions.len()
    }

    /// Street pitch (block plus street) in km.
    pub fn pitch_km(&self) -> f64 {
        (self.block_size_m + self.street_width_m) / 1000.0
    }

    pub fn transmitters(&self) -> Vec<Transmitter> {
        self.micro_positions
            .iter()
            .map(|&position| Transmitter {
                layer: Layer::Micro,
                position,
                boresight_deg: None,
            })
            .collect()
    }
}

/// Places microcells on a street grid laid out around every site.
///
/// Each cell carries its own axis-aligned grid with pitch `block + street`,
/// anchored so the site sits on a street and midway between cross streets.
/// Microcells go on every other street running north-south, at each crossing
/// with an east-west street, clipped to the hexagon. With 200 m blocks and
/// 30 m streets this gives 24 microcells per 1 km cell.
pub fn build_manhattan_overlay(
    layout: &HexLayout,
    block_m: f64,
    street_m: f64,
) -> Result<ManhattanOverlay> {
    for (field, v) in [("block_m", block_m), ("street_m", street_m)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::config(field, format!("must be positive, got {v}")));
        }
    }
    let pitch = (block_m + street_m) / 1000.0;
    let radius = layout.cell_radius_km;
    let ix = (radius / (2.0 * pitch)).ceil() as i64 + 1;
    let iy = (radius / pitch).ceil() as i64 + 1;

    let mut micro_positions = Vec::new();
    let mut micro_site = Vec::new();
    let mut per_cell_counts = Vec::with_capacity(layout.cell_count);
    for (site, &centre) in layout.site_positions.iter().enumerate() {
        let mut count = 0;
        for i in -ix..=ix {
            for j in -iy..=iy {
                let p = centre.offset(Point::new(
                    (2 * i + 1) as f64 * pitch,
                    (j as f64 + 0.5) * pitch,
                ));
                if layout.contains(site, p) {
                    micro_positions.push(p);
                    micro_site.push(site);
                    count += 1;
                }
            }
        }
        if count == 0 {
            return Err(Error::config(
                "block_m",
                format!("grid with {block_m} m blocks places no microcell in cell {site}"),
            ));
        }
        per_cell_counts.push(count);
    }
    Ok(ManhattanOverlay {
        block_size_m: block_m,
        street_width_m: street_m,
        micro_positions,
        micro_site,
        per_cell_counts,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UserDrop {
    /// One user per sector; user `i` is served by sector `serving_sector[i]`.
    pub user_positions: Vec<Point>,
    pub serving_sector: Vec<usize>,
    pub rng_seed: u64,
    /// Shadowing draw (dB) from every macro sector to every user, `[user][sector]`.
    pub macro_shadow_db: Vec<Vec<f64>>,
    /// Candidates generated per sector before one passed the best-server test.
    pub attempts: Vec<usize>,
}

fn normal_or_zero(sigma: f64) -> Option<Normal<f64>> {
    (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("sigma validated"))
}

/// Uniform point in `sector`'s 120 deg wedge of its hexagon.
fn sample_in_sector(rng: &mut impl Rng, layout: &HexLayout, sector: usize) -> Point {
    let site = layout.sector_site(sector);
    let centre = layout.site_positions[site];
    let boresight = layout.sector_boresight_deg(sector);
    let r = layout.cell_radius_km;
    loop {
        let p = centre.offset(Point::new(
            rng.random_range(-r..r),
            rng.random_range(-SQRT3 / 2.0 * r..SQRT3 / 2.0 * r),
        ));
        if !layout.contains(site, p) || p == centre {
            continue;
        }
        let bearing = (p.y - centre.y).atan2(p.x - centre.x).to_degrees();
        let off = crate::propagation::normalize_angle_deg(bearing - boresight);
        if off.abs() <= SECTOR_HALF_WIDTH_DEG {
            return p;
        }
    }
}

/// Drops one user per macro sector, one sector at a time.
///
/// A candidate is kept only if, with every sector transmitting the same power,
/// its own sector delivers the strongest signal (path loss, pattern,
/// shadowing and MCL included). Otherwise it is discarded and redrawn, up to
/// `max_attempts` times per sector. The shadowing draws of accepted users are
/// returned with the drop so later phases see the same channel.
pub fn drop_users(
    layout: &HexLayout,
    wrap: &WrapAround,
    params: &PropagationParams,
    seed: u64,
    max_attempts: usize,
) -> Result<UserDrop> {
    let mut pos_rng = ChaCha8Rng::seed_from_u64(seed);
    pos_rng.set_stream(STREAM_POSITIONS);
    let mut shadow_rng = ChaCha8Rng::seed_from_u64(seed);
    shadow_rng.set_stream(STREAM_MACRO_SHADOW);
    let shadow = normal_or_zero(params.shadow_sigma_db);

    let sectors = layout.sectors();
    let n = sectors.len();
    let mut user_positions = Vec::with_capacity(n);
    let mut macro_shadow_db = Vec::with_capacity(n);
    let mut attempts = Vec::with_capacity(n);

    for k in 0..n {
        let mut accepted = false;
        for attempt in 1..=max_attempts {
            let p = sample_in_sector(&mut pos_rng, layout, k);
            let draws: Vec<f64> = (0..n)
                .map(|_| shadow.map_or(0.0, |d| d.sample(&mut shadow_rng)))
                .collect();
            if best_sector(&sectors, p, &draws, params, wrap) == k {
                user_positions.push(p);
                macro_shadow_db.push(draws);
                attempts.push(attempt);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::Placement {
                sector: k,
                attempts: max_attempts,
            });
        }
    }
    Ok(UserDrop {
        user_positions,
        serving_sector: (0..n).collect(),
        rng_seed: seed,
        macro_shadow_db,
        attempts,
    })
}

/// Index of the strongest sector at `p` under equal transmit powers.
pub fn best_sector(
    sectors: &[Transmitter],
    p: Point,
    shadow_db: &[f64],
    params: &PropagationParams,
    wrap: &WrapAround,
) -> usize {
    let mut best = 0;
    let mut best_gain = f64::NEG_INFINITY;
    for (j, tx) in sectors.iter().enumerate() {
        let g = link_gain(tx, p, shadow_db[j], params, wrap).gain_linear;
        if g > best_gain {
            best_gain = g;
            best = j;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub id: usize,
    pub layer: Layer,
    pub x_km: f64,
    pub y_km: f64,
    /// `None` for omnidirectional transmitters.
    pub boresight_deg: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub id: usize,
    pub x_km: f64,
    pub y_km: f64,
    pub serving_sector: usize,
}

/// Plot-ready export of a layout, optional overlay and optional drop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutExport {
    /// One record per macro sector, then one per microcell.
    pub transmitters: Vec<SiteRecord>,
    pub users: Vec<UserRecord>,
    pub microcell_count: usize,
    pub per_cell_microcells: Vec<usize>,
}

impl LayoutExport {
    pub fn new(
        layout: &HexLayout,
        overlay: Option<&ManhattanOverlay>,
        drop: Option<&UserDrop>,
    ) -> Self {
        let mut transmitters: Vec<SiteRecord> = layout
            .sectors()
            .iter()
            .enumerate()
            .map(|(id, tx)| SiteRecord {
                id,
                layer: Layer::Macro,
                x_km: tx.position.x,
                y_km: tx.position.y,
                boresight_deg: tx.boresight_deg,
            })
            .collect();
        if let Some(ov) = overlay {
            transmitters.extend(
                ov.micro_positions
                    .iter()
                    .enumerate()
                    .map(|(id, p)| SiteRecord {
                        id,
                        layer: Layer::Micro,
                        x_km: p.x,
                        y_km: p.y,
                        boresight_deg: None,
                    }),
            );
        }
        let users = drop
            .map(|d| {
                d.user_positions
                    .iter()
                    .zip(&d.serving_sector)
                    .enumerate()
                    .map(|(id, (p, &s))| UserRecord {
                        id,
                        x_km: p.x,
                        y_km: p.y,
                        serving_sector: s,
                    })
                    .collect()
            })
            .unwrap_or_default();
        LayoutExport {
            transmitters,
            users,
            microcell_count: overlay.map_or(0, |o| o.total()),
            per_cell_microcells: overlay
                .map(|o| o.per_cell_counts.clone())
                .unwrap_or_default(),
        }
    }
}
